"""Shared fixtures: small genuine simulator outputs produced via its CLI.

The renderer talks to the simulator only through files, so these fixtures
shell out to the installed ``polarpic`` entry point instead of importing it.
"""

import shutil
import subprocess

import pytest


def _simulator(*args):
    exe = shutil.which("polarpic")
    assert exe is not None, "simulator CLI not installed"
    proc = subprocess.run([exe, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory):
    """Directory of a short controlled run: diagnostics plus t=0 snapshot."""
    out = tmp_path_factory.mktemp("simrun")
    _simulator("run", "--particles", "20000", "--grid", "32x32",
               "--tf", "5", "--dt", "0.5", "--seed", "11",
               "--mode", "strategy_two", "--snapshots", "2.5",
               "--out", str(out))
    return out


@pytest.fixture(scope="session")
def convergence_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("simconv")
    _simulator("converge", "--particles", "200", "--grid", "16x16",
               "--tf", "1", "--nt-list", "4,8,16", "--nt-ref", "64",
               "--out", str(out))
    return out / "convergence.csv"
