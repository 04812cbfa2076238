"""Acceptance criteria, each at its stated tolerance.

Every test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary prints one PASS/FAIL line per criterion.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from _oracles import random_grading_unitary, random_homogeneous, sign_rule_product
from fermi_klein.algebras import KLEIN_SUITE, pauli_m2, swap_leg
from fermi_klein.fermi_tensor import build_product_n, is_symmetric, product_state_n, symmetry_residuals
from fermi_klein.graded_hilbert import GradedHilbert, fermi_op_product
from fermi_klein.klein import klein_iterated, klein_transpose, verify_klein
from fermi_klein.states import (
    StateFunctional,
    check_product_gns_equivalence,
    gns,
    has_central_support,
    mix,
    random_even_state,
)
from fermi_klein.structure import run_counterexample

DATA = Path(__file__).resolve().parent.parent / "data"
acceptance = pytest.mark.acceptance

ISO_CHECKS = ("multiplicativity", "star_preservation", "bijectivity", "grading_equivariance", "compatibility")


# ---------------------------------------------------------------- 1
@acceptance(1, "CAR(2) counterexample battery, 7 checks < 1e-12, under 1 s")
def test_counterexample_battery():
    start = time.perf_counter()
    report = run_counterexample()
    elapsed = time.perf_counter() - start
    assert len(report.checks) == 7
    assert report.ok, report.failures()
    assert all(c.residual < 1e-12 for c in report.checks)
    assert elapsed < 1.0, f"took {elapsed:.2f} s"


# ---------------------------------------------------------------- 2
@pytest.fixture(scope="module")
def klein_suite():
    """Build and verify every (algebra, n) pair once; record the wall time."""
    start = time.perf_counter()
    maps, reports = {}, {}
    for name, make in KLEIN_SUITE.items():
        factor = make()
        for n in (2, 3):
            kmap = klein_iterated(factor, n)
            maps[name, n] = kmap
            reports[name, n] = verify_klein(kmap)
    return maps, reports, time.perf_counter() - start


@acceptance(2, "Klein isomorphism suite, residuals < 1e-9, under 30 s")
@pytest.mark.parametrize("name", list(KLEIN_SUITE))
@pytest.mark.parametrize("n", [2, 3])
def test_klein_isomorphism(klein_suite, name, n):
    _, reports, _ = klein_suite
    report = reports[name, n]
    for check in ISO_CHECKS:
        assert report[check].residual < 1e-9, (check, report[check].residual)
        assert report[check].passed


@acceptance(2, "Klein isomorphism suite, residuals < 1e-9, under 30 s")
def test_klein_suite_runtime(klein_suite):
    _, _, elapsed = klein_suite
    assert elapsed < 30.0, f"took {elapsed:.1f} s"


# ---------------------------------------------------------------- 3
@acceptance(3, "Klein transpose maps ordinary product states to Fermi product states < 1e-9")
@pytest.mark.parametrize("name", list(KLEIN_SUITE))
@pytest.mark.parametrize("n", [2, 3])
def test_product_state_preservation(klein_suite, name, n):
    maps, _, _ = klein_suite
    kmap = maps[name, n]
    factor = kmap.source.factors[0]
    rng = np.random.default_rng(1000 + 10 * n + list(KLEIN_SUITE).index(name))
    for _ in range(5):
        phi = random_even_state(factor, rng)
        psi = product_state_n(phi, n, "ordinary", kmap.target)
        pulled = klein_transpose(kmap, psi)
        fermi = product_state_n(phi, n, "fermi", kmap.source)
        assert np.max(np.abs(pulled.values - fermi.values)) < 1e-9


# ---------------------------------------------------------------- 4
GNS_TITLE = "GNS reconstruction, covariance and product equivalence < 1e-9"


@acceptance(4, GNS_TITLE)
@pytest.mark.parametrize("name", list(KLEIN_SUITE))
def test_gns_reconstruction_and_covariance(name):
    factor = KLEIN_SUITE[name]()
    rng = np.random.default_rng(7)
    states = [StateFunctional.tracial(factor), random_even_state(factor, rng)]
    for phi in states:
        report = gns(phi).residuals()
        for check in ("reconstruction", "covariance_unitary", "covariance_action", "covariance_vector"):
            assert report[check].residual < 1e-9, (check, report[check].residual)
        assert report.ok


@acceptance(4, GNS_TITLE)
def test_gns_non_even_reconstruction():
    report = gns(StateFunctional(pauli_m2(), np.array([[0.6, 0.2], [0.2, 0.4]]))).residuals()
    assert report["reconstruction"].residual < 1e-9
    assert report.ok


@acceptance(4, GNS_TITLE)
@pytest.mark.parametrize("make", [pauli_m2, swap_leg], ids=["tracial_m2", "car_pair"])
def test_product_gns_equivalence(make):
    phi = StateFunctional.tracial(make())
    report = check_product_gns_equivalence(phi, phi)
    assert report["dimension"].passed
    assert report["state_values"].residual < 1e-9
    assert report.ok, report.failures()


# ---------------------------------------------------------------- 5
@acceptance(5, "central support of product states follows the leg state (n = 2, 3)")
@pytest.mark.parametrize("n", [2, 3])
def test_central_support(n):
    m2 = pauli_m2()
    faithful = StateFunctional(m2, np.diag([0.7, 0.3]))
    pure = StateFunctional(m2, np.diag([1.0, 0.0]))
    assert has_central_support(product_state_n(faithful, n))
    assert not has_central_support(product_state_n(pure, n))


# ---------------------------------------------------------------- 6
SYM_TITLE = "symmetric product states and affine Klein transpose at n = 3 < 1e-9"


@acceptance(6, SYM_TITLE)
def test_product_state_symmetric():
    m2 = pauli_m2()
    phi = random_even_state(m2, np.random.default_rng(11))
    prod = build_product_n(m2, 3)
    omega = product_state_n(phi, 3, "fermi", prod)
    res = symmetry_residuals(omega, prod)
    assert len(res) == 6
    assert max(res.values()) < 1e-9


@acceptance(6, SYM_TITLE)
def test_klein_transpose_of_symmetric_mix(klein_suite):
    maps, _, _ = klein_suite
    kmap = maps["M2", 3]
    factor = kmap.source.factors[0]
    rng = np.random.default_rng(12)
    phis = [random_even_state(factor, rng) for _ in range(3)]
    weights = [0.2, 0.5, 0.3]
    psi = mix([product_state_n(p, 3, "ordinary", kmap.target) for p in phis], weights)
    pulled = klein_transpose(kmap, psi)
    expected = sum(w * product_state_n(p, 3, "fermi", kmap.source).values for w, p in zip(weights, phis))
    assert np.max(np.abs(pulled.values - expected)) < 1e-9
    assert is_symmetric(pulled, kmap.source)
    assert max(symmetry_residuals(pulled, kmap.source).values()) < 1e-9


# ---------------------------------------------------------------- 7
@acceptance(7, "Fermi operator product closed form matches the sign rule < 1e-12 on 200 pairs")
def test_sign_rule_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        dh, dk = (int(x) for x in rng.integers(1, 5, size=2))
        uh = random_grading_unitary(dh, rng)
        uk = random_grading_unitary(dk, rng)
        s = random_homogeneous(uh, rng, int(rng.choice([1, -1])))
        t = random_homogeneous(uk, rng, int(rng.choice([1, -1])))
        s /= max(np.linalg.norm(s), 1e-300)
        t /= max(np.linalg.norm(t), 1e-300)
        closed = fermi_op_product(s, t, GradedHilbert(dh, uh), GradedHilbert(dk, uk))
        worst = max(worst, float(np.max(np.abs(closed - sign_rule_product(s, t, uh, uk)))))
    assert worst < 1e-12, worst


# ---------------------------------------------------------------- 8
CLI_RUNS = {
    "check": ["check", "m2.json"],
    "check_failing": ["check", "m2_bad_grading.json"],
    "fermi": ["fermi", "m2_fermi_2.json"],
    "ordinary": ["ordinary", "m2_fermi_2.json"],
    "klein": ["klein", "m2_fermi_3.json", "--seed", "5"],
    "klein_outer": ["klein", "swap_leg_fermi_2.json"],
    "gns": ["gns", "m2_tracial.json"],
    "symmetric": ["symmetric", "m2_tracial.json", "--n", "3"],
    "counterexample": ["counterexample", "--noise", "1e-6", "--seed", "3"],
}


def _cli_bytes(argv, out: Path) -> tuple[int, bytes]:
    args = [a if not a.endswith(".json") else str(DATA / a) for a in argv]
    env = {k: v for k, v in os.environ.items() if k != "FERMI_KLEIN_TOLERANCE"}
    proc = subprocess.run([sys.executable, "-m", "fermi_klein.cli", *args, "--out", str(out)],
                          capture_output=True, env=env)
    return proc.returncode, out.read_bytes()


@acceptance(8, "every CLI command is byte-for-byte deterministic")
@pytest.mark.parametrize("key", list(CLI_RUNS))
def test_cli_determinism(key, tmp_path):
    code1, first = _cli_bytes(CLI_RUNS[key], tmp_path / "a.json")
    code2, second = _cli_bytes(CLI_RUNS[key], tmp_path / "b.json")
    assert code1 == code2 and code1 in (0, 1)
    assert first and first == second
