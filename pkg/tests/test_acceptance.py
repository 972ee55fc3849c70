"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import io
import json
import random
import time
from fractions import Fraction

import mpmath
import pytest

import oracle
from asymreg import certify, rates
from asymreg.certify import SuiteConfig, run_suites
from asymreg.cli import main
from asymreg.corpus import builtin_corpus, corpus_instance
from asymreg.rates import Constant

SEED = 20240601


@pytest.fixture(scope="module")
def corpus():
    return builtin_corpus()


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail
    return emit


def _suite(instances, suite, **cfg):
    t0 = time.perf_counter()
    reports = run_suites(instances, [suite], SuiteConfig(seed=SEED, **cfg))
    return reports, time.perf_counter() - t0


def test_criterion_01_rate_soundness(corpus, verdict):
    reports, elapsed = _suite(corpus, "check_rate", eps_grid=(1.0, 0.1, 0.01))
    violations = sum(r.violation_count for r in reports)
    errors = [r.error for r in reports if r.error]
    conclusive = sum(r.samples - r.skipped for r in reports)
    ok = len(corpus) >= 20 and violations == 0 and not errors and elapsed < 60
    verdict(1, "rate soundness", ok, f"{len(corpus)} instances, {conclusive} conclusive checks, "
            f"{violations} violations, {elapsed:.1f}s")


def test_criterion_02_exact_regression(verdict):
    th = rates.theta(1, 1, 1, 1)
    ph = rates.phi(Fraction(1, 2), Fraction(1, 2), Constant(1), 4)
    bb = rates.b_bound(Fraction(1, 2), Constant(1), 4)
    ulp = mpmath.mpf(2) ** (-256 + 4)  # one unit in the last place of 10 at 256 bits
    ok_theta = abs(mpmath.mpf(th.upper) - 10) <= ulp and th.precision_bits == 256
    ok_phi = 61.9550 <= float(ph.lower) and float(ph.upper) <= 61.9570
    ok_b = 5.4750 <= float(bb.lower) and float(bb.upper) <= 5.4755
    with mpmath.workprec(1024):
        one = lambda e: 1  # noqa: E731
        ref = (oracle.theta(1, 1, 1, 1), oracle.phi(Fraction(1, 2), Fraction(1, 2), one, 4),
               oracle.b_bound(Fraction(1, 2), one, 4))
        ok_oracle = (ref[0] == 10 and mpmath.mpf(ph.lower) <= ref[1] <= mpmath.mpf(ph.upper)
                     and mpmath.mpf(bb.lower) <= ref[2] <= mpmath.mpf(bb.upper))
    verdict(2, "exact regression", ok_theta and ok_phi and ok_b and ok_oracle,
            f"theta={float(th.upper)!r} phi={float(ph.upper):.10f} b={float(bb.upper):.10f}")


def test_criterion_03_rectangularity(verdict):
    reports, elapsed = _suite([], "check_rectangularity", samples=10_000)
    violations = sum(r.violation_count for r in reports)
    min_samples = min(r.samples for r in reports)
    ok = len(reports) == 5 and violations == 0 and min_samples >= 10_000 and elapsed < 10 \
        and all(r.error is None for r in reports)
    verdict(3, "rectangularity", ok, f"{len(reports)} sources, >= {min_samples} points each, "
            f"{violations} violations, {elapsed:.2f}s")


def test_criterion_04_modulus(corpus, verdict):
    reports, elapsed = _suite(corpus, "check_sne_modulus", samples=10_000)
    violations = sum(r.violation_count for r in reports)
    vacuous = [r.instance for r in reports if r.inconclusive]
    rotation_runs = sum(r.instance.startswith("rotation(") for r in reports)
    corpus_runs = len(reports) - rotation_runs
    ok = violations == 0 and not vacuous and rotation_runs > 0 and corpus_runs == len(corpus) \
        and elapsed < 10 and all(r.error is None for r in reports)
    verdict(4, "strong nonexpansiveness modulus", ok,
            f"{rotation_runs} rotation-family + {corpus_runs} corpus runs, {violations} violations, "
            f"vacuous={vacuous}, {elapsed:.2f}s")


def test_criterion_05_correspondence(verdict):
    reports, _ = _suite([], "check_averaged_correspondence", samples=10_000)
    violations = sum(r.violation_count for r in reports)
    ok = len(reports) == 5 and violations == 0 and min(r.samples for r in reports) >= 10_000 \
        and all(r.error is None for r in reports)
    verdict(5, "cocoercive/averaged correspondence", ok, f"{len(reports)} sources, {violations} violations")


def test_criterion_06_uc_lemma(verdict):
    reports, _ = _suite([], "check_uc_lemma", uc_samples=100_000)
    r = reports[0]
    ok = r.passed and r.samples >= 100_000
    verdict(6, "uniform convexity lemma", ok, f"{r.samples} draws over dims 2, 8, 32, "
            f"{r.violation_count} violations; {r.notes[0]}")


def test_criterion_07_witness(corpus, verdict):
    sub = [inst for inst in corpus if inst.common_fixed_point is not None]
    reports, _ = _suite(sub, "check_witness", budget=10_000, witness_deltas=(4.0, 1.0))
    violations = sum(r.violation_count for r in reports)
    inconclusive = [r.instance for r in reports if r.inconclusive]
    found = sum(len(r.witnesses) for r in reports)
    ok = bool(sub) and violations == 0 and not inconclusive and found == 2 * len(sub)
    verdict(7, "witness bound", ok, f"{len(sub)} instances with a common fixed point, {found} witnesses, "
            f"{violations} violations, inconclusive={inconclusive}")


def test_criterion_08_closed_form(verdict):
    inst = corpus_instance("rot2-quarter")
    hit = certify.first_hit_index(inst.composite, inst.x0, 0.1, 1000)
    traj = certify.run_picard(inst.composite, inst.x0, 21)
    err = max(abs(d - 2 ** (-(n + 1) / 2)) for n, d in enumerate(traj.displacements))
    ok = hit == 6 and len(traj.displacements) == 21 and err <= 1e-12
    verdict(8, "closed-form cross-check", ok, f"first_hit(0.1)={hit}, max error over n<=20 = {err:.2e}")


def _random_tuple(rng: random.Random):
    def pos():
        # log-uniform over [1e-3, 1e3]
        return Fraction(10 ** rng.uniform(-3, 3)).limit_denominator(10**9)

    def alpha():
        return Fraction(rng.uniform(0.001, 0.999)).limit_denominator(10**6)

    kind = rng.choice(["theta", "b_bound", "phi", "omega", "psi3"])
    if kind == "theta":
        args = (pos(), pos(), pos(), pos())
        return kind, rates.theta(*args), lambda: oracle.theta(*args)
    if kind == "omega":
        args = (alpha(), pos(), pos())
        return kind, rates.omega(*args), lambda: oracle.omega(*args)
    k, delta = pos(), pos()
    if kind == "b_bound":
        a = alpha()
        return kind, rates.b_bound(a, Constant(k), delta), lambda: oracle.b_bound(a, lambda e: k, delta)
    if kind == "phi":
        a1, a2 = alpha(), alpha()
        return kind, rates.phi(a1, a2, Constant(k), delta), lambda: oracle.phi(a1, a2, lambda e: k, delta)
    alphas = [alpha(), alpha(), alpha()]
    return kind, rates.psi(3, alphas, Constant(k), delta), lambda: oracle.psi(alphas, lambda e: k, delta)


def test_criterion_09_upper_bound_arithmetic(verdict):
    rng = random.Random(SEED)
    undershoots = []
    with mpmath.workprec(4 * rates.DEFAULT_PRECISION):
        # the reference is itself rounded; allow its own accumulated error, far below 256-bit resolution
        ref_slack = 1 - mpmath.mpf(2) ** -(4 * rates.DEFAULT_PRECISION - 64)
        for i in range(10_000):
            kind, value, reference = _random_tuple(rng)
            ref = reference()
            if mpmath.mpf(value.upper) < ref * ref_slack:
                undershoots.append((i, kind))
    verdict(9, "upper-bound arithmetic", not undershoots, f"10000 tuples, {len(undershoots)} undershoots "
            f"{undershoots[:5]}")


def test_criterion_10_determinism_and_self_test(tmp_path, verdict):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    codes = []
    for p in paths:
        codes.append(main(["certify", "--corpus", "builtin", "--seed", "7", "--report", str(p)], out=io.StringIO()))
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    falsified = tmp_path / "f.json"
    fcode = main(["certify", "--corpus", "builtin", "--seed", "7", "--falsify", "--report", str(falsified)],
                 out=io.StringIO())
    doc = json.loads(falsified.read_text())
    caught = {r["suite"] for r in doc["reports"] if r["violation_count"]}
    ok = identical and codes == [0, 0] and fcode == 1 and caught == set(certify.SUITES)
    verdict(10, "determinism and self-test", ok, f"byte-identical={identical}, exit codes {codes}, "
            f"falsified exit {fcode}, suites catching the falsified bound: {len(caught)}/{len(certify.SUITES)}")
