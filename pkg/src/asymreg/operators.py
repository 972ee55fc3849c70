"""Averaged mappings, projections and resolvents on R^d.

Vectors are plain 1-D ``float64`` numpy arrays. Every map here is immutable
after construction and evaluation is pure.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ConsistencyError, InvalidInput, UnsupportedRepresentation
from .rates import as_alpha, star_many

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]

MAX_DIM = 1024
CHECK_PAIRS = 256
CHECK_SLACK = 1e-9
CHECK_SEED = 0x5EED
LINEAR_NORM_TOL = 1e-12
ORTHONORMAL_TOL = 1e-12
PSD_TOL = 1e-10
ZERO_OPERATOR_CAP = 1e6


def as_vector(x, dim: int | None = None) -> Vector:
    """Validate ``x`` as a finite real vector, optionally of length ``dim``."""
    v = np.array(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInput(f"expected a nonempty 1-D vector, got shape {v.shape}")
    if v.size > MAX_DIM:
        raise InvalidInput(f"dimension {v.size} exceeds the maximum {MAX_DIM}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("vector has non-finite entries")
    if dim is not None and v.size != dim:
        raise InvalidInput(f"dimension mismatch: expected {dim}, got {v.size}")
    v.setflags(write=False)
    return v


def _as_matrix(m, dim: int | None = None) -> Matrix:
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise InvalidInput(f"dimension {a.shape[0]} exceeds the maximum {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    if dim is not None and a.shape[0] != dim:
        raise InvalidInput(f"dimension mismatch: expected {dim}, got {a.shape[0]}")
    a.setflags(write=False)
    return a


def _matvec(m: Matrix, x: np.ndarray) -> np.ndarray:
    """``m @ x`` for one vector, row-wise for a stack of vectors (shape ``(n, dim)``)."""
    return m @ x if x.ndim == 1 else x @ m.T


def sample_pair(rng: np.random.Generator, dim: int, low: float = -2.0, high: float = 2.0):
    """Gaussian directions with log-uniform norms in [10**low, 10**high]."""
    x = rng.standard_normal(dim)
    x *= 10.0 ** rng.uniform(low, high) / max(np.linalg.norm(x), 1e-300)
    u = rng.standard_normal(dim)
    u *= 10.0 ** rng.uniform(low, high) / max(np.linalg.norm(u), 1e-300)
    return x, x + u


# ---------------------------------------------------------------------------
# convex sets
# ---------------------------------------------------------------------------


class ConvexSet:
    """Closed convex nonempty subset of R^d with a closed-form projection."""

    dim: int

    def project(self, x: Vector) -> Vector:
        raise NotImplementedError

    def contains(self, x: Vector, tol: float = 1e-12) -> bool:
        return bool(np.linalg.norm(self.project(x) - x) <= tol * max(1.0, np.linalg.norm(x)))

    def point(self) -> Vector:
        """Some point of the set (used as a known fixed point of the projection)."""
        raise NotImplementedError


class Halfspace(ConvexSet):
    """``{x : <normal, x> <= offset}``."""

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        if not np.isfinite(self.offset):
            raise InvalidInput("halfspace offset must be finite")
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0.0:
            raise InvalidInput("halfspace normal must be nonzero")
        self.dim = self.normal.size

    def project(self, x):
        if x.ndim > 1:
            excess = np.maximum(x @ self.normal - self.offset, 0.0)
            return x - (excess / self._nn)[..., None] * self.normal
        excess = float(self.normal @ x) - self.offset
        if excess <= 0.0:
            return x.copy()
        return x - (excess / self._nn) * self.normal

    def point(self):
        return (self.offset / self._nn) * self.normal

    def __repr__(self):
        return f"Halfspace(normal={self.normal.tolist()}, offset={self.offset})"


class Ball(ConvexSet):
    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not (self.radius > 0.0 and np.isfinite(self.radius)):
            raise InvalidInput("ball radius must be positive and finite")
        self.dim = self.center.size

    def project(self, x):
        diff = x - self.center
        if x.ndim > 1:
            dist = np.linalg.norm(diff, axis=-1, keepdims=True)
            scale = np.where(dist <= self.radius, 1.0, self.radius / np.maximum(dist, self.radius))
            return np.where(dist <= self.radius, x, self.center + scale * diff)
        dist = float(np.linalg.norm(diff))
        if dist <= self.radius:
            return x.copy()
        return self.center + (self.radius / dist) * diff

    def point(self):
        return self.center.copy()

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


class Box(ConvexSet):
    def __init__(self, lower, upper):
        self.lower = as_vector(lower)
        self.upper = as_vector(upper, self.lower.size)
        if np.any(self.lower > self.upper):
            raise InvalidInput("box is empty: lower > upper in some coordinate")
        self.dim = self.lower.size

    def project(self, x):
        return np.clip(x, self.lower, self.upper)

    def point(self):
        return np.clip(np.zeros(self.dim), self.lower, self.upper)

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class AffineSubspace(ConvexSet):
    """``anchor + span(basis rows)``; rows must be orthonormal."""

    def __init__(self, basis, anchor):
        self.anchor = as_vector(anchor)
        self.dim = self.anchor.size
        b = np.array(basis, dtype=np.float64).reshape(-1, self.dim) if len(basis) else np.zeros((0, self.dim))
        if not np.all(np.isfinite(b)):
            raise InvalidInput("affine basis has non-finite entries")
        if b.shape[0] > self.dim:
            raise InvalidInput("affine basis has more rows than the dimension")
        if np.max(np.abs(b @ b.T - np.eye(b.shape[0])), initial=0.0) > ORTHONORMAL_TOL:
            raise InvalidInput("affine basis is not orthonormal within 1e-12")
        b.setflags(write=False)
        self.basis = b

    def project(self, x):
        return self.anchor + _matvec(self.basis.T, _matvec(self.basis, x - self.anchor))

    def point(self):
        return self.project(np.zeros(self.dim))

    def __repr__(self):
        return f"AffineSubspace(rank={self.basis.shape[0]}, dim={self.dim})"


def project(cset: ConvexSet, x) -> Vector:
    """Metric projection of ``x`` onto ``cset``."""
    return cset.project(as_vector(x, cset.dim))


# ---------------------------------------------------------------------------
# nonexpansive maps
# ---------------------------------------------------------------------------


class NonexpansiveMap:
    """Base class; subclasses implement ``_apply`` on validated vectors."""

    dim: int

    def __call__(self, x) -> Vector:
        return self._apply(as_vector(x, self.dim))

    def _apply(self, x: Vector) -> Vector:
        raise NotImplementedError


def verify_nonexpansive(T, dim: int, pairs: int = CHECK_PAIRS, slack: float = CHECK_SLACK,
                        seed: int = CHECK_SEED) -> None:
    """Raise InvalidInput if a seeded pair sample shows ``T`` expanding distances."""
    rng = np.random.default_rng(seed)
    for _ in range(pairs):
        x, y = sample_pair(rng, dim)
        lhs = np.linalg.norm(T(x) - T(y))
        rhs = np.linalg.norm(x - y)
        if lhs > rhs + slack:
            raise InvalidInput(f"map is not nonexpansive: |Tx-Ty|={lhs!r} > |x-y|={rhs!r}")


class LinearMap(NonexpansiveMap):
    def __init__(self, matrix, *, verify: bool = True):
        self.matrix = _as_matrix(matrix)
        self.dim = self.matrix.shape[0]
        if verify:
            norm = np.linalg.norm(self.matrix, 2)
            if norm > 1.0 + LINEAR_NORM_TOL:
                raise InvalidInput(f"linear map has operator norm {norm!r} > 1")

    def _apply(self, x):
        return _matvec(self.matrix, x)


class AffineMap(NonexpansiveMap):
    """``x -> L x + shift`` with ``||L|| <= 1``."""

    def __init__(self, linear, shift, *, verify: bool = True):
        self.linear = LinearMap(linear, verify=verify)
        self.shift = as_vector(shift, self.linear.dim)
        self.dim = self.linear.dim

    def _apply(self, x):
        return _matvec(self.linear.matrix, x) + self.shift


def identity(dim: int) -> LinearMap:
    return LinearMap(np.eye(dim))


def negation(dim: int) -> LinearMap:
    return LinearMap(-np.eye(dim))


def rotation(theta: float, dim: int = 2, plane: tuple[int, int] = (0, 1), scale: float = 1.0) -> LinearMap:
    """Rotation by ``theta`` in a coordinate plane, scaled by ``scale`` there."""
    i, j = plane
    if not (0 <= i < dim and 0 <= j < dim and i != j):
        raise InvalidInput(f"invalid rotation plane {plane} for dimension {dim}")
    if not 0.0 <= scale <= 1.0:
        raise InvalidInput("rotation scale must lie in [0, 1]")
    m = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    m[i, i], m[i, j], m[j, i], m[j, j] = scale * c, -scale * s, scale * s, scale * c
    return LinearMap(m)


class Projection(NonexpansiveMap):
    def __init__(self, cset: ConvexSet, *, verify: bool = True):
        self.set = cset
        self.dim = cset.dim
        if verify:
            verify_nonexpansive(self._apply, self.dim)

    def _apply(self, x):
        return self.set.project(x)


class Reflection(NonexpansiveMap):
    """``2 P_C - id``; nonexpansive because ``P_C`` is firmly nonexpansive."""

    def __init__(self, cset: ConvexSet, *, verify: bool = True):
        self.set = cset
        self.dim = cset.dim
        if verify:
            verify_nonexpansive(self._apply, self.dim)

    def _apply(self, x):
        return 2.0 * self.set.project(x) - x


class Composition(NonexpansiveMap):
    """Apply ``maps`` in order, first element first."""

    def __init__(self, maps: Sequence[NonexpansiveMap]):
        if not maps:
            raise InvalidInput("composition needs at least one map")
        self.maps = tuple(maps)
        self.dim = self.maps[0].dim
        if any(m.dim != self.dim for m in self.maps):
            raise InvalidInput("dimension mismatch inside composition")

    def _apply(self, x):
        for m in self.maps:
            x = m._apply(x)
        return x


class ReflectedResolventMap(NonexpansiveMap):
    def __init__(self, src: MonotoneSource, *, verify: bool = True):
        self.src = src
        self.dim = src.dim
        if verify:
            verify_nonexpansive(self._apply, self.dim)

    def _apply(self, x):
        return self.src._reflected(x)


class ExtractedPart(NonexpansiveMap):
    """``T x = (R x - (1 - alpha) x) / alpha`` for a directly evaluated ``R``."""

    def __init__(self, direct: Callable[[Vector], Vector], alpha, dim: int, *, verify: bool = True):
        self.direct = direct
        self.alpha = as_alpha(alpha)
        self.dim = dim
        self._inv = float(1 / self.alpha)
        self._ratio = float((1 - self.alpha) / self.alpha)
        if verify:
            verify_nonexpansive(self._apply, self.dim)

    def _apply(self, x):
        return self._inv * self.direct(x) - self._ratio * x


# ---------------------------------------------------------------------------
# averaged maps
# ---------------------------------------------------------------------------


class AveragedMap:
    """``R = (1 - alpha) id + alpha T`` with ``T`` nonexpansive.

    ``alpha`` is kept as an exact Fraction so that composition bookkeeping
    stays exact. When ``direct`` is given (compositions, reflected resolvents)
    it is used for evaluation and ``inner`` is its extracted nonexpansive part.
    """

    def __init__(self, alpha, inner: NonexpansiveMap, *, direct: Callable[[Vector], Vector] | None = None,
                 factors: tuple[AveragedMap, ...] = ()):
        self.alpha = as_alpha(alpha)
        self.inner = inner
        self.dim = inner.dim
        self.factors = factors
        self._direct = direct
        self._keep = float(1 - self.alpha)
        self._mix = float(self.alpha)

    def __call__(self, x) -> Vector:
        return self._apply(as_vector(x, self.dim))

    def _apply(self, x: Vector) -> Vector:
        if self._direct is not None:
            return self._direct(x)
        return self._keep * x + self._mix * self.inner._apply(x)

    def __repr__(self):
        return f"AveragedMap(alpha={self.alpha}, inner={type(self.inner).__name__}, dim={self.dim})"


def evaluate(fmap: AveragedMap | NonexpansiveMap, x) -> Vector:
    return fmap(x)


def averaged_projection(cset: ConvexSet, alpha=Fraction(1, 2)) -> AveragedMap:
    """Relaxed projection ``(1 - alpha) id + alpha (2 P_C - id)``; ``alpha = 1/2`` gives ``P_C``."""
    alpha = as_alpha(alpha)
    if alpha == Fraction(1, 2):
        return AveragedMap(alpha, Reflection(cset), direct=cset.project)
    return AveragedMap(alpha, Reflection(cset))


def compose(maps: Sequence[AveragedMap]) -> AveragedMap:
    """Composite ``R_m o ... o R_1`` (first list element applied first)."""
    maps = tuple(maps)
    if len(maps) < 2:
        raise InvalidInput("compose needs at least two maps")
    dim = maps[0].dim
    if any(m.dim != dim for m in maps):
        raise InvalidInput("dimension mismatch among composed maps")
    alpha = star_many([m.alpha for m in maps])

    def direct(x):
        for m in maps:
            x = m._apply(x)
        return x

    inner = ExtractedPart(direct, alpha, dim)
    return AveragedMap(alpha, inner, direct=direct, factors=maps)


def nonexpansive_part(fmap: AveragedMap) -> NonexpansiveMap:
    return fmap.inner


# ---------------------------------------------------------------------------
# monotone sources and resolvents
# ---------------------------------------------------------------------------


class MonotoneSource:
    """Single-valued affine monotone operator ``A x = M x + shift``."""

    kind = "linear"

    def __init__(self, matrix, shift=None, beta: float | None = None):
        self.matrix = _as_matrix(matrix)
        self.dim = self.matrix.shape[0]
        self.shift = as_vector(np.zeros(self.dim) if shift is None else shift, self.dim)
        sym = 0.5 * (self.matrix + self.matrix.T)
        if np.linalg.eigvalsh(sym)[0] < -PSD_TOL:
            raise InvalidInput("operator is not monotone: symmetric part has a negative eigenvalue")
        try:
            self._jmat = np.linalg.inv(np.eye(self.dim) + self.matrix)
        except np.linalg.LinAlgError as exc:
            raise ConsistencyError("I + M is singular for a monotone M") from exc
        self.beta = None if beta is None else float(beta)
        if self.beta is not None:
            if not self.beta > 0:
                raise InvalidInput("cocoercivity constant must be positive")
            self._check_cocoercive(self.beta)

    @property
    def is_symmetric(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return bool(np.max(np.abs(self.matrix - self.matrix.T)) <= 1e-12 * scale)

    def apply(self, x) -> Vector:
        return self._apply(as_vector(x, self.dim))

    def _apply(self, x):
        return _matvec(self.matrix, x) + self.shift

    def _resolvent(self, x):
        return _matvec(self._jmat, x - self.shift)

    def _reflected(self, x):
        return 2.0 * self._resolvent(x) - x

    def _check_cocoercive(self, beta: float, pairs: int = CHECK_PAIRS, slack: float = CHECK_SLACK) -> None:
        rng = np.random.default_rng(CHECK_SEED)
        for _ in range(pairs):
            x, y = sample_pair(rng, self.dim, -2.0, 1.0)
            diff = self._apply(x) - self._apply(y)
            if float((x - y) @ diff) < beta * float(diff @ diff) - slack:
                raise InvalidInput(f"operator is not {beta}-cocoercive on a sampled pair")


class LinearMonotone(MonotoneSource):
    kind = "linear"

    def __init__(self, matrix, beta: float | None = None):
        super().__init__(matrix, None, beta)


class QuadraticGradient(MonotoneSource):
    """Gradient ``x -> Q x + q`` of ``x -> <Qx, x>/2 + <q, x>`` with ``Q`` symmetric PSD."""

    kind = "quadratic"

    def __init__(self, Q, q, beta: float | None = None):
        super().__init__(Q, q, beta)
        if not self.is_symmetric:
            raise InvalidInput("quadratic gradient needs a symmetric Q")


def resolvent(src: MonotoneSource, x) -> Vector:
    """``J_A x``: the unique ``y`` with ``y + A y = x``."""
    return src._resolvent(as_vector(x, src.dim))


def reflected_resolvent(src: MonotoneSource, x) -> Vector:
    return src._reflected(as_vector(x, src.dim))


def inverse_resolvent(src: MonotoneSource, x) -> Vector:
    """``x - J_A x``, the resolvent of ``A^{-1}``."""
    x = as_vector(x, src.dim)
    return x - src._resolvent(x)


def cocoercivity_constant(src: MonotoneSource, cap: float = ZERO_OPERATOR_CAP) -> float:
    """``1 / lambda_max(M)`` for symmetric sources; ``cap`` when that is larger."""
    if not src.is_symmetric:
        raise UnsupportedRepresentation("cocoercivity constant is only certified for symmetric matrices")
    lam = float(np.linalg.eigvalsh(0.5 * (src.matrix + src.matrix.T))[-1])
    if lam <= 1.0 / cap:
        return float(cap)
    return 1.0 / lam


def averaged_from_cocoercive(src: MonotoneSource, beta, *, verify: bool = True) -> AveragedMap:
    """Reflected resolvent of a ``beta``-cocoercive source as a ``1/(1+beta)``-averaged map."""
    beta = Fraction(beta)
    if beta <= 0:
        raise InvalidInput("beta must be positive")
    alpha = 1 / (1 + beta)
    eye = np.eye(src.dim)
    # T = R/alpha - ((1-alpha)/alpha) id = (1+beta) R - beta id
    r_lin = 2.0 * src._jmat - eye
    r_shift = -2.0 * (src._jmat @ src.shift)
    c1, c2 = float(1 / alpha), float(beta)
    t_lin = c1 * r_lin - c2 * eye
    if np.any(src.shift):
        inner: NonexpansiveMap = AffineMap(t_lin, c1 * r_shift, verify=verify)
    else:
        inner = LinearMap(t_lin, verify=verify)
    return AveragedMap(alpha, inner, direct=src._reflected)
