"""Golden run directories produced once through the simulator CLI."""

import subprocess

import pytest

CONFIGS = {
    "evolve": (
        "[lattice]\nn_sites = 21\n"
        "[integrator]\nn_steps = 40\n"
        '[experiment]\nmode = "evolve"\npower_w = 30.0\n'
    ),
    "spectrum": (
        "[lattice]\nn_sites = 21\n"
        "[integrator]\nn_steps = 20\n"
        '[experiment]\nmode = "spectrum"\npower_w = 30.0\nrecord_steps = [10]\n'
    ),
    # 1e9 W blows up, leaving one masked heatmap row
    "sweep": (
        "[lattice]\nn_sites = 21\n"
        "[integrator]\nn_steps = 10\n"
        '[experiment]\nmode = "sweep"\npowers = [1.0, 30.0, 1e9]\n'
        'observables = ["topo_weight", "gap_top"]\n'
    ),
    "disorder": (
        "[lattice]\nn_sites = 21\n"
        "[integrator]\nn_steps = 10\n"
        '[experiment]\nmode = "disorder"\netas = [0.1, 0.3]\npowers = [15.0]\n'
        "n_realizations = 3\n"
    ),
}

EXPECTED_EXIT = {"evolve": 0, "spectrum": 0, "sweep": 1, "disorder": 0}


@pytest.fixture(scope="session")
def goldens(tmp_path_factory):
    """Map of mode -> run directory written by the producer CLI."""
    root = tmp_path_factory.mktemp("goldens")
    dirs = {}
    for mode, text in CONFIGS.items():
        config = root / f"{mode}.toml"
        config.write_text(text)
        out = root / mode
        proc = subprocess.run(
            ["nlssh", mode, "--config", str(config), "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == EXPECTED_EXIT[mode], proc.stderr
        dirs[mode] = out
    return dirs
