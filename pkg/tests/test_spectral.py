"""Spectral diagnostics: eigen decomposition, winding, isolation, overlaps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlssh import (
    ContractViolationError,
    DegenerateInputError,
    DimensionError,
    GaplessError,
    ParameterError,
    Species,
    SpectrumSnapshot,
    WindingInput,
    defect_region_fraction,
    diagonalize,
    gap_top,
    inject_pump,
    isolated_modes,
    localization_profile,
    overlap,
    pump_hamiltonian,
    winding_number,
)

from conftest import make_lattice


def chain_matrix(couplings):
    """Open tight-binding chain with the given bond values."""
    values = np.asarray(couplings, dtype=float)
    n = values.size + 1
    H = np.zeros((n, n))
    for j, v in enumerate(values):
        H[j, j + 1] = H[j + 1, j] = v
    return H


@pytest.fixture(scope="module")
def dark_snapshot(reference):
    """Zero-pump spectrum of the reference lattice (periodic)."""
    H = pump_hamiltonian(inject_pump(reference, -1, 0.0), reference)
    return diagonalize(H)


@pytest.fixture(scope="module")
def pumped_snapshot(reference):
    """Spectrum under the initial 30 W pump field."""
    H = pump_hamiltonian(inject_pump(reference, -1, 30.0), reference)
    return diagonalize(H)


class TestDiagonalize:
    def test_three_site_chain(self):
        snapshot = diagonalize(chain_matrix([1.0, 1.0]))
        np.testing.assert_allclose(
            snapshot.eigenvalues, [-np.sqrt(2.0), 0.0, np.sqrt(2.0)], atol=1e-14
        )
        assert snapshot.zero_index == 1
        assert snapshot.zero_eigenvalue() == pytest.approx(0.0, abs=1e-14)
        assert snapshot.gap_top == pytest.approx(np.sqrt(2.0))
        assert not snapshot.isolated.any()

    def test_tagged_modes_are_eigenvectors(self, pumped_snapshot, reference):
        H = pump_hamiltonian(inject_pump(reference, -1, 30.0), reference).matrix
        norm = np.abs(pumped_snapshot.eigenvalues).max()
        for mode, index in (
            (pumped_snapshot.zero_mode, pumped_snapshot.zero_index),
            (pumped_snapshot.max_mode, pumped_snapshot.max_index),
            (pumped_snapshot.min_mode, pumped_snapshot.min_index),
        ):
            lam = pumped_snapshot.eigenvalues[index]
            assert np.abs(H @ mode - lam * mode).max() < 1e-10 * norm
            assert np.linalg.norm(mode) == pytest.approx(1.0)

    def test_sign_convention(self, dark_snapshot):
        for mode in (
            dark_snapshot.zero_mode,
            dark_snapshot.max_mode,
            dark_snapshot.min_mode,
        ):
            assert mode[np.argmax(np.abs(mode))] > 0

    def test_eigenvalues_sorted(self, pumped_snapshot):
        assert np.all(np.diff(pumped_snapshot.eigenvalues) >= 0)

    def test_species_tag(self, reference):
        H = pump_hamiltonian(inject_pump(reference, -1, 0.0), reference)
        assert diagonalize(H).species is Species.PUMP
        assert diagonalize(H.matrix).species is None

    def test_extremal_indices(self, dark_snapshot):
        assert dark_snapshot.min_index == 0
        assert dark_snapshot.max_index == dark_snapshot.n_modes - 1

    def test_rejects_asymmetric(self):
        with pytest.raises(ContractViolationError, match="symmetric"):
            diagonalize(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError, match="square"):
            diagonalize(np.zeros((2, 3)))

    def test_rejects_single_site(self):
        with pytest.raises(DegenerateInputError, match="at least 2"):
            diagonalize(np.zeros((1, 1)))


class TestChiralPairing:
    def test_open_chain_spectrum_is_symmetric(self):
        config = make_lattice(n_sites=103, boundary="open")
        H = pump_hamiltonian(inject_pump(config, -1, 0.0), config)
        lam = diagonalize(H).eigenvalues
        scale = np.abs(lam).max()
        assert np.abs(lam + np.flip(lam)).max() < 1e-10 * scale

    def test_open_chain_midgap_level(self):
        config = make_lattice(n_sites=103, boundary="open")
        H = pump_hamiltonian(inject_pump(config, -1, 0.0), config)
        snapshot = diagonalize(H)
        assert abs(snapshot.zero_eigenvalue()) < 1e-8 * np.abs(snapshot.eigenvalues).max()


class TestWinding:
    @pytest.mark.parametrize("n_k", [64, 256, 1024])
    def test_topological_pair(self, n_k):
        assert winding_number(WindingInput(u=1.0, v=2.0, n_k=n_k)) == 1

    @pytest.mark.parametrize("n_k", [64, 256, 1024])
    def test_trivial_pair(self, n_k):
        assert winding_number(WindingInput(u=2.0, v=1.0, n_k=n_k)) == 0

    def test_reference_couplings_are_topological(self, reference):
        pump = reference.couplings[Species.PUMP]
        assert winding_number(WindingInput(u=pump.v_long, v=pump.v_short)) == 1

    def test_gap_closing_rejected(self):
        with pytest.raises(GaplessError, match="u = v"):
            WindingInput(u=1.5, v=1.5)

    def test_positive_hoppings_required(self):
        with pytest.raises(ParameterError, match="positive"):
            WindingInput(u=-1.0, v=2.0)
        with pytest.raises(ParameterError, match="positive"):
            WindingInput(u=1.0, v=0.0)

    def test_grid_floor(self):
        with pytest.raises(ParameterError, match="n_k"):
            WindingInput(u=1.0, v=2.0, n_k=32)

    @settings(max_examples=50, deadline=None)
    @given(
        u=st.floats(min_value=0.1, max_value=10.0),
        v=st.floats(min_value=0.1, max_value=10.0),
        scale=st.floats(min_value=0.01, max_value=100.0),
    )
    def test_scale_invariance(self, u, v, scale):
        """The winding depends only on the ratio of the two hoppings."""
        if abs(u - v) < 1e-6 * max(u, v):
            return
        expected = 1 if u < v else 0
        assert winding_number(WindingInput(u=u, v=v)) == expected
        assert winding_number(WindingInput(u=scale * u, v=scale * v)) == expected


class TestIsolation:
    def test_dark_lattice_hosts_one_isolated_level(self, dark_snapshot):
        assert isolated_modes(dark_snapshot) == [51]
        assert dark_snapshot.isolated.sum() == 1

    def test_pumped_lattice_hosts_three(self, pumped_snapshot):
        assert isolated_modes(pumped_snapshot) == [0, 51, 102]

    @pytest.mark.parametrize("factor", [3.0, 5.0, 10.0])
    def test_uniform_chain_has_none(self, factor):
        snapshot = diagonalize(chain_matrix(np.ones(49)))
        assert isolated_modes(snapshot, factor) == []

    def test_factor_must_exceed_one(self, dark_snapshot):
        with pytest.raises(ParameterError, match="isolation factor"):
            isolated_modes(dark_snapshot, 1.0)

    def test_tiny_spectrum_rejected(self):
        snapshot = diagonalize(chain_matrix([1.0, 1.0]))
        with pytest.raises(DegenerateInputError, match="at least 5"):
            isolated_modes(snapshot)


class TestGapTop:
    def test_unit_gap(self):
        snapshot = diagonalize(chain_matrix([1.0 / np.sqrt(2.0)] * 2))
        assert gap_top(snapshot) == pytest.approx(1.0, rel=1e-12)

    def test_matches_snapshot_field(self, pumped_snapshot):
        assert gap_top(pumped_snapshot) == pumped_snapshot.gap_top
        lam = pumped_snapshot.eigenvalues
        assert pumped_snapshot.gap_top == pytest.approx(lam[-1] - lam[-2])


class TestOverlap:
    def test_identical_modes(self):
        e = np.zeros(4)
        e[0] = 1.0
        result = overlap(e, e)
        assert result.inner == pytest.approx(1.0)
        assert result.density == pytest.approx(1.0)

    def test_disjoint_modes(self):
        a = np.zeros(4)
        b = np.zeros(4)
        a[0] = b[1] = 1.0
        result = overlap(a, b)
        assert result.inner == 0.0
        assert result.density == 0.0

    def test_dark_zero_and_max_share_support(self, dark_snapshot):
        result = overlap(dark_snapshot.zero_mode, dark_snapshot.max_mode)
        assert result.inner < 1e-8
        assert result.density > 0.0

    def test_pumped_zero_and_max_overlap_strongly(self, pumped_snapshot):
        result = overlap(pumped_snapshot.zero_mode, pumped_snapshot.max_mode)
        assert result.inner < 1e-8
        assert result.density > 0.2

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError, match="shapes differ"):
            overlap(np.ones(3) / np.sqrt(3.0), np.ones(4) / 2.0)

    def test_unit_norm_required(self):
        with pytest.raises(ParameterError, match="unit vector"):
            overlap(np.ones(4), np.ones(4) / 2.0)


class TestLocalization:
    def test_profile_is_normalized(self, dark_snapshot):
        profile = localization_profile(dark_snapshot.zero_mode)
        assert profile.sum() == pytest.approx(1.0)
        assert np.all(profile >= 0)

    def test_zero_mode_peaks_on_defect(self, dark_snapshot, reference):
        profile = localization_profile(dark_snapshot.zero_mode)
        assert np.argmax(profile) == reference.site_offset(0)

    def test_sublattice_leakage(self, dark_snapshot, reference):
        # the midgap mode lives on the defect's own sublattice; weight on
        # odd sites is pure numerical leakage
        profile = localization_profile(dark_snapshot.zero_mode)
        sites = np.array(reference.sites())
        assert profile[np.abs(sites) % 2 == 1].sum() < 1e-8

    def test_exponential_decay_rate(self, dark_snapshot, reference):
        pump = reference.couplings[Species.PUMP]
        target = np.log(pump.v_short / pump.v_long)
        amps = np.array(
            [
                abs(dark_snapshot.zero_mode[reference.site_offset(j)])
                for j in range(2, 42, 2)
            ]
        )
        slope = np.polyfit(np.arange(amps.size, dtype=float), np.log(amps), 1)[0]
        assert -slope == pytest.approx(target, rel=0.10)

    def test_rejects_non_unit(self):
        with pytest.raises(ParameterError, match="unit vector"):
            localization_profile(np.ones(5))

    def test_rejects_matrix(self):
        with pytest.raises(DimensionError, match="vector"):
            localization_profile(np.eye(3))


class TestDefectRegionFraction:
    def test_delta_at_center(self):
        weights = np.zeros(11)
        weights[5] = 3.0
        assert defect_region_fraction(weights) == 1.0

    def test_uniform_distribution(self):
        assert defect_region_fraction(np.ones(25)) == pytest.approx(5.0 / 25.0)

    def test_zero_total(self):
        assert defect_region_fraction(np.zeros(7)) == 0.0

    def test_radius_clamped_to_edges(self):
        assert defect_region_fraction(np.ones(5), radius=10) == 1.0

    def test_even_length_rejected(self):
        with pytest.raises(DimensionError, match="odd-length"):
            defect_region_fraction(np.ones(6))

    def test_negative_radius_rejected(self):
        with pytest.raises(ParameterError, match="radius"):
            defect_region_fraction(np.ones(5), radius=-1)


class TestSnapshotValidation:
    def _modes(self, n):
        mode = np.zeros(n)
        mode[0] = 1.0
        return {name: mode for name in ("zero_mode", "max_mode", "min_mode")}

    def test_rejects_unsorted_eigenvalues(self):
        with pytest.raises(ParameterError, match="ascending"):
            SpectrumSnapshot(
                step=0,
                eigenvalues=np.array([1.0, 0.0, 2.0]),
                **self._modes(3),
                zero_index=0,
                max_index=2,
                min_index=0,
                isolated=np.zeros(3, dtype=bool),
                gap_top=1.0,
            )

    def test_rejects_non_unit_mode(self):
        modes = self._modes(3)
        modes["zero_mode"] = np.ones(3)
        with pytest.raises(ParameterError, match="unit vector"):
            SpectrumSnapshot(
                step=0,
                eigenvalues=np.array([0.0, 1.0, 2.0]),
                **modes,
                zero_index=0,
                max_index=2,
                min_index=0,
                isolated=np.zeros(3, dtype=bool),
                gap_top=1.0,
            )

    def test_rejects_length_mismatch(self):
        modes = self._modes(3)
        modes["max_mode"] = np.array([1.0, 0.0])
        with pytest.raises(DimensionError, match="max_mode"):
            SpectrumSnapshot(
                step=0,
                eigenvalues=np.array([0.0, 1.0, 2.0]),
                **modes,
                zero_index=0,
                max_index=2,
                min_index=0,
                isolated=np.zeros(3, dtype=bool),
                gap_top=1.0,
            )
