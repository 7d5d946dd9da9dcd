"""Shared fixtures and the acceptance criteria reporter."""

import numpy as np
import pytest

from nlssh import (
    IntegratorSpec,
    LatticeConfig,
    SpeciesCouplings,
    reference_lattice,
)

# (name, passed, detail) tuples collected by the acceptance suite
_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def criterion_log():
    """Record one acceptance criterion outcome for the terminal summary."""

    def record(name: str, passed: bool, detail: str) -> None:
        _CRITERIA.append((name, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


@pytest.fixture(scope="session")
def reference() -> LatticeConfig:
    return reference_lattice()


@pytest.fixture(scope="session")
def default_spec() -> IntegratorSpec:
    return IntegratorSpec()


def make_lattice(n_sites: int = 21, **kwargs) -> LatticeConfig:
    """Compact lattice with the reference couplings, for fast tests."""
    base = reference_lattice()
    kwargs.setdefault("couplings", base.couplings)
    kwargs.setdefault("gamma", base.gamma)
    return LatticeConfig(n_sites=n_sites, **kwargs)


def make_linear_lattice(n_sites: int = 21, **kwargs) -> LatticeConfig:
    """Same geometry with nu = 0 everywhere, so the evolution is linear."""
    base = reference_lattice()
    couplings = {
        s: SpeciesCouplings(v_long=c.v_long, v_short=c.v_short, nu=0.0)
        for s, c in base.couplings.items()
    }
    return make_lattice(n_sites=n_sites, couplings=couplings, **kwargs)


@pytest.fixture()
def small_lattice() -> LatticeConfig:
    return make_lattice()


@pytest.fixture()
def small_spec() -> IntegratorSpec:
    return IntegratorSpec(n_steps=30)


def rank_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation of two equal-length series."""
    ra = np.argsort(np.argsort(a)).astype(float)
    rb = np.argsort(np.argsort(b)).astype(float)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra * rb).sum() / np.sqrt((ra * ra).sum() * (rb * rb).sum()))
