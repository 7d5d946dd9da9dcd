"""Power sweeps, disorder ensembles, and reproducible cell seeding."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlssh import (
    DisorderPlan,
    DisorderRealization,
    IntegratorSpec,
    ParameterError,
    SweepPlan,
    derive_seed,
    diagonalize,
    inject_pump,
    pump_hamiltonian,
    run_disorder_study,
    run_power_sweep,
    run_single,
)

from conftest import make_lattice


@pytest.fixture(scope="module")
def lattice():
    return make_lattice()


@pytest.fixture(scope="module")
def spec():
    return IntegratorSpec(n_steps=20)


class TestSeeds:
    def test_pure_function(self):
        assert derive_seed(0, 0.3, 30.0, 5) == derive_seed(0, 0.3, 30.0, 5)

    def test_every_coordinate_matters(self):
        base = derive_seed(7, 0.3, 30.0, 5)
        assert derive_seed(8, 0.3, 30.0, 5) != base
        assert derive_seed(7, 0.2, 30.0, 5) != base
        assert derive_seed(7, 0.3, 15.0, 5) != base
        assert derive_seed(7, 0.3, 30.0, 6) != base

    def test_adjacent_floats_differ(self):
        eta = 0.3
        assert derive_seed(0, np.nextafter(eta, 1.0), 30.0, 0) != derive_seed(
            0, eta, 30.0, 0
        )

    def test_grid_seeds_all_distinct(self):
        seeds = {
            derive_seed(0, eta, power, index)
            for eta in (0.1, 0.2, 0.3, 0.4, 0.5)
            for power in (5.0, 15.0, 30.0, 50.0)
            for index in range(20)
        }
        assert len(seeds) == 400

    @settings(max_examples=100, deadline=None)
    @given(
        base=st.integers(min_value=0, max_value=2**64 - 1),
        eta=st.floats(min_value=0.0, max_value=1.0),
        power=st.floats(min_value=0.0, max_value=1e6),
        index=st.integers(min_value=0, max_value=2**32),
    )
    def test_output_fits_in_64_bits(self, base, eta, power, index):
        seed = derive_seed(base, eta, power, index)
        assert 0 <= seed < 2**64


@pytest.fixture(scope="module")
def result(lattice, spec):
    """One 30 W run with the default observables."""
    return run_single(lattice, spec, 30.0)


class TestRunSingle:
    def test_default_observables(self, result, spec):
        assert result.record is not None
        assert result.gap_series is not None
        assert result.gap_series.shape == (spec.n_steps + 1,)

    def test_series_accessors(self, result):
        np.testing.assert_array_equal(result.series("topo_weight"), result.record.weights)
        np.testing.assert_array_equal(result.series("pump_intensity"), result.pump_totals)

    def test_gap_series_starts_at_injection_value(self, result, lattice):
        H = pump_hamiltonian(inject_pump(lattice, -1, 30.0), lattice)
        assert result.gap_series[0] == pytest.approx(diagonalize(H).gap_top, rel=1e-12)

    def test_population_series_is_a_fraction(self, result):
        series = result.series("biphoton_population")
        assert series[0] == 0.0
        assert np.all((series >= 0.0) & (series <= 1.0))

    def test_unrequested_series_raise(self, lattice, spec):
        result = run_single(lattice, spec, 1.0, observables=("pump_intensity",))
        assert result.record is None
        assert result.gap_series is None
        with pytest.raises(ParameterError, match="not recorded"):
            result.series("topo_weight")
        with pytest.raises(ParameterError, match="not recorded"):
            result.series("gap_top")

    def test_unknown_observables_rejected(self, lattice, spec, result):
        with pytest.raises(ParameterError, match="unknown observables"):
            run_single(lattice, spec, 1.0, observables=("entropy",))
        with pytest.raises(ParameterError, match="unknown observable"):
            result.series("entropy")

    def test_disorder_is_recorded(self, lattice, spec):
        realization = DisorderRealization.draw(0.2, 99, lattice.n_bonds)
        result = run_single(lattice, spec, 1.0, disorder=realization)
        assert result.disorder is realization


class TestSweepPlan:
    def test_rejects_empty_grid(self, lattice, spec):
        with pytest.raises(ParameterError, match="empty"):
            SweepPlan(powers=(), config=lattice, spec=spec)

    def test_rejects_negative_power(self, lattice, spec):
        with pytest.raises(ParameterError, match="non-negative"):
            SweepPlan(powers=(-1.0, 2.0), config=lattice, spec=spec)

    def test_rejects_non_increasing_grid(self, lattice, spec):
        with pytest.raises(ParameterError, match="strictly increasing"):
            SweepPlan(powers=(1.0, 1.0), config=lattice, spec=spec)

    def test_rejects_unknown_observable(self, lattice, spec):
        with pytest.raises(ParameterError, match="unknown observables"):
            SweepPlan(powers=(1.0,), config=lattice, spec=spec, observables=("x",))

    def test_rejects_unknown_weight_mode(self, lattice, spec):
        with pytest.raises(ParameterError, match="weight_modes"):
            SweepPlan(powers=(1.0,), config=lattice, spec=spec, weight_modes="x")

    def test_powers_coerced_to_floats(self, lattice, spec):
        plan = SweepPlan(powers=(0, 1, 30), config=lattice, spec=spec)
        assert plan.powers == (0.0, 1.0, 30.0)


@pytest.fixture(scope="module")
def sweep(lattice, spec):
    """A three-power sweep and the plan that produced it."""
    plan = SweepPlan(
        powers=(0.0, 1.0, 30.0),
        config=lattice,
        spec=spec,
        observables=("topo_weight", "gap_top", "pump_intensity"),
    )
    return plan, run_power_sweep(plan)


class TestPowerSweep:
    def test_grid_shapes(self, sweep, spec):
        plan, result = sweep
        for name in plan.observables:
            assert result.grid(name).shape == (3, spec.n_steps + 1)
        np.testing.assert_allclose(
            result.z_grid, np.arange(spec.n_steps + 1) * spec.dz
        )
        assert result.errors == {}

    def test_dark_row_is_inert(self, sweep):
        _, result = sweep
        np.testing.assert_array_equal(result.grid("topo_weight")[0], 0.0)
        np.testing.assert_array_equal(result.grid("pump_intensity")[0], 0.0)

    def test_rows_match_single_runs(self, sweep, lattice, spec):
        plan, result = sweep
        single = run_single(lattice, spec, 30.0, observables=plan.observables)
        for name in plan.observables:
            np.testing.assert_array_equal(result.grid(name)[2], single.series(name))

    def test_worker_count_is_invisible(self, sweep, lattice, spec):
        plan, serial = sweep
        parallel = run_power_sweep(plan, workers=2)
        for name in plan.observables:
            np.testing.assert_array_equal(
                serial.grid(name), parallel.grid(name)
            )

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_failed_cell_leaves_nan_row(self, lattice):
        plan = SweepPlan(
            powers=(1.0, 1e9),
            config=lattice,
            spec=IntegratorSpec(n_steps=5),
            observables=("topo_weight",),
        )
        result = run_power_sweep(plan)
        assert list(result.errors) == [1]
        assert "NumericFailureError" in result.errors[1]
        assert np.all(np.isnan(result.grid("topo_weight")[1]))
        assert np.all(np.isfinite(result.grid("topo_weight")[0]))


class TestDisorderPlan:
    def test_rejects_eta_out_of_range(self, lattice, spec):
        with pytest.raises(ParameterError, match="lie in"):
            DisorderPlan(etas=(1.5,), powers=(1.0,), config=lattice, spec=spec)

    def test_rejects_empty_grids(self, lattice, spec):
        with pytest.raises(ParameterError, match="empty"):
            DisorderPlan(etas=(), powers=(1.0,), config=lattice, spec=spec)

    def test_rejects_non_increasing_etas(self, lattice, spec):
        with pytest.raises(ParameterError, match="strictly increasing"):
            DisorderPlan(etas=(0.3, 0.1), powers=(1.0,), config=lattice, spec=spec)

    def test_rejects_zero_realizations(self, lattice, spec):
        with pytest.raises(ParameterError, match="n_realizations"):
            DisorderPlan(
                etas=(0.1,), powers=(1.0,), config=lattice, spec=spec, n_realizations=0
            )

    def test_rejects_negative_seed(self, lattice, spec):
        with pytest.raises(ParameterError, match="base_seed"):
            DisorderPlan(
                etas=(0.1,), powers=(1.0,), config=lattice, spec=spec, base_seed=-1
            )

    def test_seed_for_matches_derivation(self, lattice, spec):
        plan = DisorderPlan(
            etas=(0.1,), powers=(1.0,), config=lattice, spec=spec, base_seed=11
        )
        assert plan.seed_for(0.1, 1.0, 3) == derive_seed(11, 0.1, 1.0, 3)


@pytest.fixture(scope="module")
def study(lattice):
    """A minimal two-eta ensemble and the plan that produced it."""
    plan = DisorderPlan(
        etas=(0.0, 0.3),
        powers=(30.0,),
        config=lattice,
        spec=IntegratorSpec(n_steps=10),
        n_realizations=3,
        base_seed=17,
    )
    return plan, run_disorder_study(plan)


class TestDisorderStudy:
    def test_shapes_and_counts(self, study):
        plan, result = study
        assert result.mean.shape == (2, 1, 11)
        assert result.seeds.shape == (2, 1, 3)
        assert result.seeds.dtype == np.uint64
        assert len(np.unique(result.seeds)) == 6
        np.testing.assert_array_equal(result.counts, 3)
        assert result.errors == {}

    def test_zero_disorder_collapses_the_ensemble(self, study, lattice):
        plan, result = study
        np.testing.assert_array_equal(result.variance[0, 0], 0.0)
        clean = run_single(
            lattice, plan.spec, 30.0, observables=("topo_weight",)
        )
        np.testing.assert_array_equal(result.mean[0, 0], clean.series("topo_weight"))

    def test_extrema_bracket_the_mean(self, study):
        _, result = study
        assert np.all(result.minimum <= result.mean + 1e-15)
        assert np.all(result.mean <= result.maximum + 1e-15)

    def test_variance_matches_recomputed_cells(self, study, lattice):
        """Reseed every realization independently and redo the statistics."""
        plan, result = study
        rows = []
        for r in range(plan.n_realizations):
            seed = plan.seed_for(0.3, 30.0, r)
            realization = DisorderRealization.draw(0.3, seed, lattice.n_bonds)
            single = run_single(
                lattice, plan.spec, 30.0,
                disorder=realization, observables=("topo_weight",),
            )
            rows.append(single.series("topo_weight"))
        stacked = np.array(rows)
        np.testing.assert_allclose(
            result.variance[1, 0], stacked.var(axis=0, ddof=0), atol=1e-12
        )
        np.testing.assert_allclose(result.mean[1, 0], stacked.mean(axis=0), atol=1e-12)

    def test_std_error_arithmetic(self, study):
        _, result = study
        sample_var = result.variance[:, :, -1] * 3.0 / 2.0
        np.testing.assert_allclose(
            result.final_std_error(), np.sqrt(sample_var / 3.0), atol=1e-15
        )
        np.testing.assert_array_equal(result.final_mean(), result.mean[:, :, -1])

    def test_per_species_draws_change_the_answer(self, lattice):
        kwargs = dict(
            etas=(0.3,),
            powers=(30.0,),
            config=lattice,
            spec=IntegratorSpec(n_steps=10),
            n_realizations=2,
            base_seed=5,
        )
        shared = run_disorder_study(DisorderPlan(**kwargs))
        split = run_disorder_study(DisorderPlan(per_species=True, **kwargs))
        assert not np.array_equal(shared.mean, split.mean)

    def test_worker_count_is_invisible(self, study):
        plan, serial = study
        parallel = run_disorder_study(plan, workers=2)
        np.testing.assert_array_equal(serial.mean, parallel.mean)
        np.testing.assert_array_equal(serial.variance, parallel.variance)
        np.testing.assert_array_equal(serial.seeds, parallel.seeds)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_failed_cells_drop_out_of_counts(self, lattice):
        plan = DisorderPlan(
            etas=(0.1,),
            powers=(1e9,),
            config=lattice,
            spec=IntegratorSpec(n_steps=5),
            n_realizations=2,
            base_seed=1,
        )
        result = run_disorder_study(plan)
        assert result.counts[0, 0] == 0
        assert len(result.errors) == 2
        assert np.all(np.isnan(result.mean))
