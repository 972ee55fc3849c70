"""Empirical certification: Picard runs and inequality suites on concrete instances.

Each ``check_*`` function returns a :class:`CertReport`. A report passes iff
it recorded no violation; a suite that could not test anything (empty
filtered sample, no witness found) is marked inconclusive instead.
Every bound the suites compare against is injectable so the harness can be
fed a deliberately false bound and shown to catch it.
"""

from __future__ import annotations

import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import rates
from .errors import InvalidInput, NumericFailure
from .instances import Instance
from .operators import (AveragedMap, LinearMonotone, MonotoneSource, QuadraticGradient, Vector, as_vector,
                        averaged_from_cocoercive, nonexpansive_part, rotation, sample_pair)

SLACK = 1e-9
MAX_RECORDED = 20
SUITES = ("check_rate", "check_rectangularity", "check_sne_modulus", "check_averaged_correspondence",
          "check_witness", "check_uc_lemma")


@dataclass(frozen=True)
class Exceeded:
    """No index below ``cap`` reached the requested displacement."""

    cap: int


@dataclass
class Trajectory:
    start: Vector
    steps: int
    displacements: list[float]
    points: list[Vector] | None = None

    def is_monotone(self, tol: float = SLACK) -> bool:
        d = self.displacements
        return all(b <= a + tol for a, b in zip(d, d[1:]))


@dataclass
class Witness:
    p: Vector
    delta: float
    norm: float
    step: int

    def to_dict(self) -> dict:
        return {"p": [float(v) for v in self.p], "delta": self.delta, "norm": self.norm, "step": self.step}


@dataclass
class Sampler:
    count: int = 10_000
    norm_cap: float = 1e3
    seed: int = 0

    def __post_init__(self):
        if self.count < 1 or not self.norm_cap > 0:
            raise InvalidInput("sampler needs count >= 1 and norm_cap > 0")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class CertReport:
    suite: str
    instance: str
    seed: int
    samples: int = 0
    violations: list[dict] = field(default_factory=list)
    violation_count: int = 0
    skipped: int = 0
    inconclusive: bool = False
    notes: list[str] = field(default_factory=list)
    witnesses: list[Witness] = field(default_factory=list)
    runtime: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.violation_count == 0 and self.error is None

    @property
    def status(self) -> str:
        if not self.passed:
            return "fail"
        return "inconclusive" if self.inconclusive else "pass"

    def violate(self, inputs: dict, lhs, rhs, slack: float = SLACK) -> None:
        self.violation_count += 1
        if len(self.violations) < MAX_RECORDED:
            self.violations.append({"inputs": inputs, "lhs": _jsonable(lhs), "rhs": _jsonable(rhs),
                                    "slack": slack})

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "suite": self.suite, "instance": self.instance, "seed": self.seed, "status": self.status,
            "passed": self.passed, "samples": self.samples, "violation_count": self.violation_count,
            "violations": self.violations, "skipped": self.skipped, "inconclusive": self.inconclusive,
            "notes": self.notes, "witnesses": [w.to_dict() for w in self.witnesses], "error": self.error,
        }
        if include_timing:
            out["runtime"] = self.runtime
        return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Fraction):
        return float(v)
    return v


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        report = fn(*args, **kwargs)
        report.runtime = time.perf_counter() - t0
        return report
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


def run_picard(fmap: AveragedMap, x0, steps: int, stop_eps: float | None = None,
               keep_points: bool = False) -> Trajectory:
    """Iterate ``x_{n+1} = R x_n`` recording ``|x_n - x_{n+1}|`` for n = 0, 1, ..."""
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    x = as_vector(x0, fmap.dim).copy()
    start = x.copy()
    disp: list[float] = []
    points = [x.copy()] if keep_points else None
    for n in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            y = fmap._apply(x)
        if not np.all(np.isfinite(y)):
            exc = NumericFailure("non-finite iterate", n + 1)
            exc.trajectory = Trajectory(start, steps, disp, points)
            raise exc
        dn = float(np.linalg.norm(x - y))
        disp.append(dn)
        if points is not None:
            points.append(y.copy())
        x = y
        if stop_eps is not None and dn <= stop_eps:
            break
    return Trajectory(start, steps, disp, points)


def _first_hit(displacements: Sequence[float], eps: float) -> int | None:
    for n, dn in enumerate(displacements):
        if dn <= eps:
            return n
    return None


def first_hit_index(fmap: AveragedMap, x0, eps: float, cap: int) -> int | Exceeded:
    """Smallest ``n < cap`` with ``|R^n x0 - R^{n+1} x0| <= eps``."""
    if cap < 1:
        raise InvalidInput("cap must be >= 1")
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    hit = _first_hit(run_picard(fmap, x0, cap, stop_eps=eps).displacements, eps)
    return Exceeded(cap) if hit is None else hit


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _sigma_of(inst: Instance, eps: float) -> int:
    return rates.sigma(inst.m, inst.alphas, inst.K, inst.b, inst.d, eps)


@_timed
def check_rate(inst: Instance, eps_grid: Sequence[float] | None = None, cap: int = 100_000,
               sigma_fn: Callable[[Instance, float], int] = _sigma_of, seed: int = 0) -> CertReport:
    """First-hit index of the Picard iterates against the rate ``sigma`` for each eps."""
    eps_grid = tuple(inst.eps_grid if eps_grid is None else eps_grid)
    if inst.b < np.linalg.norm(inst.x0):
        raise InvalidInput(f"b={inst.b!r} is below |x0|")
    if inst.d < np.linalg.norm(inst.x0 - inst.composite(inst.x0)):
        raise InvalidInput(f"d={inst.d!r} is below |x0 - R x0|")
    report = CertReport("check_rate", inst.id, seed)
    traj = run_picard(inst.composite, inst.x0, cap, stop_eps=min(eps_grid))
    if not traj.is_monotone():
        report.notes.append("displacement sequence increased by more than 1e-9")
        report.violate({"check": "monotone displacements"}, "increase", 0)
    for eps in eps_grid:
        bound = sigma_fn(inst, eps)
        hit = _first_hit(traj.displacements, eps)
        report.samples += 1
        if hit is None:
            if cap > bound:
                report.violate({"eps": eps, "first_hit": f"> {cap - 1}"}, cap, bound, 0)
            else:
                report.skipped += 1
                report.notes.append(f"eps={eps!r}: cap {cap} <= sigma, inconclusive")
        elif hit > bound:
            report.violate({"eps": eps, "first_hit": hit}, hit, bound, 0)
        else:
            report.notes.append(f"eps={eps!r}: first_hit={hit} sigma={bound}")
    report.inconclusive = report.skipped == report.samples
    return report


def _norm_up(v: Vector) -> float:
    """A float at least as large as ``|v|`` despite rounding in the norm."""
    return float(np.linalg.norm(v)) * (1 + 1e-12) + 1e-300


def _theta_float(beta, l1, l2, l3) -> float:
    return rates.theta(beta, l1, l2, l3).upper_float()


def _log_uniform_points(rng, count: int, dim: int, low: float, high: float) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (10.0 ** rng.uniform(math.log10(low), math.log10(high), size=(count, 1)))


@_timed
def check_rectangularity(src: MonotoneSource, beta: float, b_pt, c_pt, sampler: Sampler,
                         theta_fn: Callable = _theta_float, name: str = "source") -> CertReport:
    """``<a - c, Ab - Aa> <= Theta(beta, |b|, |c|, |Ab|)`` over sampled ``a``."""
    b_pt, c_pt = as_vector(b_pt, src.dim), as_vector(c_pt, src.dim)
    lengths = [max(_norm_up(v), 2.0 ** -40) for v in (b_pt, c_pt, src._apply(b_pt))]
    bound = theta_fn(beta, *lengths)
    rng = sampler.rng()
    report = CertReport("check_rectangularity", name, sampler.seed)
    report.notes.append(f"beta={beta!r} L={lengths} theta={bound!r}")

    points = [_log_uniform_points(rng, sampler.count, src.dim, 1e-3, sampler.norm_cap)]
    # the maximiser of the concave quadratic a -> <a - c, M(b - a)> and its neighbourhood
    m = src.matrix
    best = np.linalg.lstsq(m + m.T, m @ b_pt + m.T @ c_pt, rcond=None)[0]
    points.append(best[None, :] + _log_uniform_points(rng, 64, src.dim, 1e-6, 1.0))
    points.append(np.vstack([best, b_pt, c_pt, np.zeros(src.dim)]))
    # directions of strongest response, far out (large |Aa| branch)
    _, vecs = np.linalg.eigh(0.5 * (m + m.T))
    far = np.vstack([vecs.T, -vecs.T]) * sampler.norm_cap
    points.append(far)

    a = np.vstack(points)
    values = np.sum((a - c_pt) * (src._apply(b_pt) - src._apply(a)), axis=1)
    report.samples = len(a)
    for i in np.flatnonzero(values > bound + SLACK):
        report.violate({"a": a[i].tolist()}, float(values[i]), bound)
    return report


def _omega_float(alpha, b, eps) -> float:
    return rates.omega(alpha, b, eps).lower_float()


@_timed
def check_sne_modulus(fmap: AveragedMap, b: float, eps: float, sampler: Sampler,
                      omega_fn: Callable = _omega_float, extra_pairs: Sequence = (),
                      name: str = "map") -> CertReport:
    """Pairs with ``|x-y| <= b`` and gap below the modulus must move by less than eps."""
    if not (b > 0 and eps > 0):
        raise InvalidInput("b and eps must be positive")
    w = omega_fn(fmap.alpha, b, eps)
    rng = sampler.rng()
    report = CertReport("check_sne_modulus", name, sampler.seed)
    dim = fmap.dim
    filtered = 0

    xs, ys = [], []
    for x, y in extra_pairs:
        xs.append(np.asarray(x, dtype=float))
        ys.append(np.asarray(y, dtype=float))
    # random pairs, separations log-uniform down to 1e-6 b
    base = _log_uniform_points(rng, sampler.count, dim, 1e-2, sampler.norm_cap)
    xs.extend(base)
    ys.extend(base + _log_uniform_points(rng, sampler.count, dim, 1e-6 * b, b))
    # consecutive Picard iterates: the gap shrinks along the orbit
    orbit = _log_uniform_points(rng, 32, dim, 1e-1, sampler.norm_cap)
    for _ in range(64):
        nxt = fmap._apply(orbit)
        xs.extend(orbit)
        ys.extend(nxt)
        orbit = nxt
    x_all, y_all = np.array(xs), np.array(ys)

    dxy = x_all - y_all
    dist = np.linalg.norm(dxy, axis=1)
    keep = dist <= b
    x_all, y_all, dxy, dist = x_all[keep], y_all[keep], dxy[keep], dist[keep]
    report.samples = int(keep.sum())
    rdiff = fmap._apply(x_all) - fmap._apply(y_all)
    hyp = dist - np.linalg.norm(rdiff, axis=1) < w
    filtered = int(hyp.sum())
    moved = np.linalg.norm(dxy - rdiff, axis=1)
    for i in np.flatnonzero(hyp & (moved >= eps + SLACK)):
        report.violate({"x": x_all[i].tolist(), "y": y_all[i].tolist()}, float(moved[i]), eps)
    report.notes.append(f"omega={w!r} filtered={filtered}")
    if filtered == 0:
        report.inconclusive = True
        report.notes.append("no sampled pair satisfied the modulus hypothesis")
    return report


def rotation_family(b: float, eps: float, alphas: Sequence[float] = (0.1, 0.5, 0.9),
                    margins: Sequence[float] = (0.5, 0.9, 0.999)):
    """Scaled rotations tuned so in-plane pairs of length up to ``b`` sit just inside the modulus.

    For ``R = (1-a) id + a Rot(t)`` and in-plane ``v`` with ``|v| = s``:
    ``|Rv| = s sqrt(1 - 2a(1-a)(1 - cos t))``. The angle is chosen so that the
    gap at ``s = b`` equals ``margin * omega_a(b, eps)``.
    Yields ``(label, map, pairs)``.
    """
    for a in alphas:
        w = float(rates.omega(a, b, eps).lower)
        for margin in margins:
            shrink = 1 - margin * w / b
            cos_t = 1 - (1 - shrink * shrink) / (2 * a * (1 - a))
            t = math.acos(max(-1.0, min(1.0, cos_t)))
            fmap = AveragedMap(a, rotation(t))
            pairs = []
            for s in np.linspace(eps / 2, b, 16):
                for phase in np.linspace(0, 2 * math.pi, 8, endpoint=False):
                    v = s * np.array([math.cos(phase), math.sin(phase)])
                    pairs.append((v + 1.0, np.ones(2)))
            yield f"rotation(alpha={a},margin={margin})", fmap, pairs


def _sample_norm_pairs(rng, count: int, dim: int, cap: float):
    xs = _log_uniform_points(rng, count, dim, 1e-3, cap)
    us = _log_uniform_points(rng, count, dim, 1e-3, cap)
    return xs, xs + us


@_timed
def check_averaged_correspondence(src: MonotoneSource, beta, sampler: Sampler, name: str = "source") -> CertReport:
    """The reflected resolvent of a beta-cocoercive source is ``1/(1+beta)``-averaged."""
    fmap = averaged_from_cocoercive(src, beta, verify=False)
    T = nonexpansive_part(fmap)
    rng = sampler.rng()
    report = CertReport("check_averaged_correspondence", name, sampler.seed)
    report.notes.append(f"beta={float(beta)!r} alpha={float(fmap.alpha)!r}")
    xs, ys = _sample_norm_pairs(rng, sampler.count, src.dim, sampler.norm_cap)
    tx, ty = T._apply(xs), T._apply(ys)
    lhs = np.linalg.norm(tx - ty, axis=1)
    rhs = np.linalg.norm(xs - ys, axis=1)
    report.samples = len(xs)
    for i in np.flatnonzero(lhs > rhs + SLACK):
        report.violate({"x": xs[i].tolist(), "y": ys[i].tolist()}, float(lhs[i]), float(rhs[i]))
    # the averaged form must reproduce the reflected resolvent
    recon = float(fmap._keep) * xs + float(fmap._mix) * tx
    err = np.linalg.norm(recon - fmap._apply(xs), axis=1)
    tol = 1e-9 * np.maximum(1.0, np.linalg.norm(xs, axis=1))
    for i in np.flatnonzero(err > tol):
        report.violate({"x": xs[i].tolist(), "check": "reconstruction"}, float(err[i]), 0.0)
    return report


def _psi_float(m, alphas, K, delta) -> float:
    return rates.psi(m, alphas, K, delta).upper_float()


@_timed
def check_witness(composite: AveragedMap, K, deltas: Sequence[float], budget: int = 10_000,
                  psi_fn: Callable = _psi_float, name: str = "composite", seed: int = 0) -> CertReport:
    """Find ``p`` with ``|p - Rp| <= delta`` by Picard iteration from the origin and bound ``|p|``."""
    if budget < 1:
        raise InvalidInput("budget must be >= 1")
    alphas = [f.alpha for f in composite.factors]
    report = CertReport("check_witness", name, seed)
    traj = run_picard(composite, np.zeros(composite.dim), budget + 1, stop_eps=min(deltas), keep_points=True)
    missing = 0
    for delta in deltas:
        report.samples += 1
        step = _first_hit(traj.displacements, delta)
        if step is None:
            missing += 1
            report.notes.append(f"delta={delta!r}: no witness within {budget} steps")
            continue
        p = traj.points[step]
        w = Witness(p, traj.displacements[step], float(np.linalg.norm(p)), step)
        report.witnesses.append(w)
        bound = psi_fn(len(alphas), alphas, K, delta)
        report.notes.append(f"delta={delta!r}: |p|={w.norm!r} psi={bound!r}")
        if w.norm > bound + SLACK:
            report.violate({"delta": delta, "p": w.p.tolist()}, w.norm, bound)
    report.inconclusive = missing > 0
    report.skipped = missing
    return report


def _uc_modulus(eps):
    return eps * eps / 8


@_timed
def check_uc_lemma(sampler: Sampler, dims: Sequence[int] = (2, 8, 32),
                   modulus: Callable = _uc_modulus, name: str = "hilbert") -> CertReport:
    """Uniform convexity of the Euclidean norm with modulus ``eps -> eps**2/8``."""
    rng = sampler.rng()
    report = CertReport("check_uc_lemma", name, sampler.seed)
    per_dim = -(-sampler.count // len(dims))
    hyp_count = 0
    for dim in dims:
        n = per_dim
        eps = 2.0 * (1.0 - rng.uniform(0.0, 1.0, n))            # (0, 2]
        d = 10.0 ** rng.uniform(-2, 2, n)
        alpha = rng.uniform(0.0, 1.0, n)
        alpha[alpha == 0.0] = 0.5
        dirs = rng.standard_normal((n, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        other = rng.standard_normal((n, dim))
        other -= np.sum(other * dirs, axis=1, keepdims=True) * dirs
        other /= np.linalg.norm(other, axis=1, keepdims=True)
        family = np.arange(n) % 4
        x = dirs * d[:, None]
        # 0: random inside the ball; 1: sphere pairs near the boundary separation; 2: near-equal; 3: antipodal
        t = rng.uniform(0.0, 1.2, n) * eps
        angle = 2 * np.arcsin(np.clip(t / 2, 0, 1))
        on_sphere = d[:, None] * (np.cos(angle)[:, None] * dirs + np.sin(angle)[:, None] * other)
        rand_in = _log_uniform_points(rng, n, dim, 1e-3, 1.0) * d[:, None]
        near = x + 1e-9 * d[:, None] * other
        y = np.where((family == 0)[:, None], rand_in,
                     np.where((family == 1)[:, None], on_sphere,
                              np.where((family == 2)[:, None], near / np.maximum(
                                  1.0, np.linalg.norm(near, axis=1) / d)[:, None], -x)))
        x = np.where((family == 0)[:, None], _log_uniform_points(rng, n, dim, 1e-3, 1.0) * d[:, None], x)
        mix = np.linalg.norm((1 - alpha)[:, None] * x + alpha[:, None] * y, axis=1)
        thresh = (1 - 2 * alpha * (1 - alpha) * modulus(eps)) * d
        sep = np.linalg.norm(x - y, axis=1)
        hyp = mix > thresh
        bad = hyp & (sep >= eps * d + SLACK)
        report.samples += n
        hyp_count += int(hyp.sum())
        for i in np.flatnonzero(bad):
            report.violate({"dim": dim, "eps": eps[i], "d": d[i], "alpha": alpha[i]}, float(sep[i]),
                           float(eps[i] * d[i]))
    report.notes.append(f"hypothesis held on {hyp_count} draws")
    return report


# ---------------------------------------------------------------------------
# suite driver
# ---------------------------------------------------------------------------


def standard_sources() -> list[tuple[str, MonotoneSource, float]]:
    """Five cocoercive sources with their certified constants."""
    rng = np.random.default_rng(5)
    g = rng.standard_normal((8, 8))
    psd = g @ g.T / 8
    q = np.diag([0.5, 1.0, 3.0])
    out = [
        ("identity2", LinearMonotone(np.eye(2)), 1.0),
        ("diag12", LinearMonotone(np.diag([1.0, 2.0])), 0.5),
        ("twice-identity3", LinearMonotone(2 * np.eye(3)), 0.5),
        ("psd8", LinearMonotone(psd), None),
        ("quadratic3", QuadraticGradient(q, [1.0, -2.0, 0.5]), None),
    ]
    from .operators import cocoercivity_constant
    return [(n, s, b if b is not None else cocoercivity_constant(s)) for n, s, b in out]


def derive_seed(seed: int, suite: str, name: str) -> int:
    return int(np.random.SeedSequence([seed, zlib.crc32(suite.encode()), zlib.crc32(name.encode())])
               .generate_state(1)[0])


@dataclass
class SuiteConfig:
    seed: int = 0
    samples: int = 10_000
    cap: int = 100_000
    budget: int = 10_000
    eps_grid: tuple[float, ...] | None = None
    witness_deltas: tuple[float, ...] = (4.0, 1.0)
    uc_samples: int = 100_000
    precision: int = rates.DEFAULT_PRECISION
    falsify: bool = False


def _tasks(instances: Sequence[Instance], suites: Sequence[str], cfg: SuiteConfig):
    """Yield ``(suite, name, thunk)`` in deterministic order."""
    sources = [(n, s, b) for n, s, b in standard_sources()]
    for inst in instances:
        for k, f in enumerate(inst.factors):
            if f.source is not None:
                sources.append((f"{inst.id}/factor{k}", f.source, float(1 / f.map.alpha - 1)))

    for suite in suites:
        if suite == "check_rate":
            def sigma_fn(inst, eps):
                if cfg.falsify:
                    return 0
                return rates.sigma(inst.m, inst.alphas, inst.K, inst.b, inst.d, eps, cfg.precision)
            for inst in instances:
                yield suite, inst.id, lambda inst=inst: check_rate(
                    inst, cfg.eps_grid, cfg.cap, sigma_fn, seed=derive_seed(cfg.seed, suite, inst.id))
        elif suite == "check_rectangularity":
            theta_fn = (lambda *a: -1.0) if cfg.falsify else _theta_float
            for name, src, beta in sources:
                def run(name=name, src=src, beta=beta):
                    s = derive_seed(cfg.seed, suite, name)
                    rng = np.random.default_rng(s)
                    b_pt = _log_uniform_points(rng, 1, src.dim, 0.5, 5.0)[0]
                    c_pt = _log_uniform_points(rng, 1, src.dim, 0.5, 5.0)[0]
                    return check_rectangularity(src, beta, b_pt, c_pt, Sampler(cfg.samples, 1e3, s),
                                                theta_fn, name)
                yield suite, name, run
        elif suite == "check_sne_modulus":
            omega_fn = (lambda *a: math.inf) if cfg.falsify else _omega_float
            for label, fmap, pairs in rotation_family(2.0, 0.5):
                yield suite, label, lambda fmap=fmap, pairs=pairs, label=label: check_sne_modulus(
                    fmap, 2.0, 0.5, Sampler(max(cfg.samples // 10, 1), 10.0, derive_seed(cfg.seed, suite, label)),
                    omega_fn, pairs, label)
            for inst in instances:
                b = max(1.0, inst.d)
                yield suite, inst.id, lambda inst=inst, b=b: check_sne_modulus(
                    inst.composite, b, 0.25 * b, Sampler(cfg.samples, 10.0, derive_seed(cfg.seed, suite, inst.id)),
                    omega_fn, (), inst.id)
        elif suite == "check_averaged_correspondence":
            for name, src, beta in sources:
                bb = Fraction(beta) * (10 if cfg.falsify else 1)
                yield suite, name, lambda name=name, src=src, bb=bb: check_averaged_correspondence(
                    src, bb, Sampler(cfg.samples, 10.0, derive_seed(cfg.seed, suite, name)), name)
        elif suite == "check_witness":
            psi_fn = (lambda *a: -1.0) if cfg.falsify else _psi_float
            for inst in instances:
                yield suite, inst.id, lambda inst=inst: check_witness(
                    inst.composite, inst.K, cfg.witness_deltas, cfg.budget, psi_fn, inst.id,
                    derive_seed(cfg.seed, suite, inst.id))
        elif suite == "check_uc_lemma":
            modulus = (lambda e: 8.0) if cfg.falsify else _uc_modulus
            yield suite, "hilbert", lambda: check_uc_lemma(
                Sampler(cfg.uc_samples, 1.0, derive_seed(cfg.seed, suite, "hilbert")), modulus=modulus)
        else:
            raise InvalidInput(f"unknown suite {suite!r}")


def _guarded(suite: str, name: str, thunk) -> CertReport:
    try:
        return thunk()
    except Exception as exc:  # crash is reported, not raised
        report = CertReport(suite, name, 0)
        report.error = f"{type(exc).__name__}: {exc}"
        return report


def run_suites(instances: Sequence[Instance], suites: Sequence[str] = SUITES, cfg: SuiteConfig | None = None,
               workers: int = 1) -> list[CertReport]:
    """Run the selected suites; reports come back in (suite, instance) task order."""
    cfg = cfg or SuiteConfig()
    tasks = list(_tasks(instances, suites, cfg))
    if workers <= 1:
        return [_guarded(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: _guarded(*t), tasks))
