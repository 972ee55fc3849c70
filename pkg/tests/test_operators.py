import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from asymreg.errors import ConsistencyError, InvalidInput, UnsupportedRepresentation
from asymreg.operators import (AffineSubspace, AveragedMap, Ball, Box, Halfspace, LinearMap, LinearMonotone,
                               QuadraticGradient, as_vector, averaged_from_cocoercive, averaged_projection,
                               cocoercivity_constant, compose, evaluate, identity, inverse_resolvent,
                               negation, nonexpansive_part, project, reflected_resolvent, resolvent, rotation)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
vec2 = arrays(np.float64, 2, elements=finite)
vec3 = arrays(np.float64, 3, elements=finite)


def test_as_vector_validation():
    v = as_vector([1, 2])
    assert v.dtype == np.float64 and not v.flags.writeable
    for bad in ([], [[1, 2]], [1, float("nan")], [float("inf")]):
        with pytest.raises(InvalidInput):
            as_vector(bad)
    with pytest.raises(InvalidInput):
        as_vector([1, 2], 3)
    with pytest.raises(InvalidInput):
        as_vector(np.zeros(1025))


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def test_projection_examples():
    np.testing.assert_allclose(project(Halfspace([0, 1], 0), [3, 5]), [3, 0])
    np.testing.assert_allclose(project(Halfspace([0, 1], 0), [3, -5]), [3, -5])
    np.testing.assert_allclose(project(Ball([0, 0], 1), [3, 4]), [0.6, 0.8])
    np.testing.assert_allclose(project(Box([-1, -1], [1, 1]), [2, 0.5]), [1, 0.5])
    line = AffineSubspace([[1, 0]], [0, 2])
    np.testing.assert_allclose(project(line, [5, 7]), [5, 2])


def test_set_validation():
    with pytest.raises(InvalidInput):
        Halfspace([0, 0], 1)
    with pytest.raises(InvalidInput):
        Ball([0, 0], 0)
    with pytest.raises(InvalidInput):
        Box([1, 0], [0, 1])
    with pytest.raises(InvalidInput):
        AffineSubspace([[1, 1]], [0, 0])


SETS = [Halfspace([1, -2, 0.5], 0.3), Ball([1, 0, -1], 2), Box([-1, 0, -2], [1, 3, 0]),
        AffineSubspace([[1, 0, 0], [0, 0.6, 0.8]], [0, 1, 1])]


@pytest.mark.parametrize("cset", SETS, ids=lambda s: type(s).__name__)
@settings(max_examples=60)
@given(x=vec3, y=vec3)
def test_projection_is_firmly_nonexpansive_and_idempotent(cset, x, y):
    px, py = cset.project(x), cset.project(y)
    assert float((x - y) @ (px - py)) >= float((px - py) @ (px - py)) - 1e-9 * (1 + float(x @ x + y @ y))
    np.testing.assert_allclose(cset.project(px), px, atol=1e-9 * (1 + np.abs(x).max()))
    assert cset.contains(px, tol=1e-9)


@pytest.mark.parametrize("cset", SETS, ids=lambda s: type(s).__name__)
def test_projection_batched_matches_single(cset):
    rng = np.random.default_rng(1)
    xs = rng.normal(scale=3, size=(50, 3))
    batch = cset.project(xs)
    for x, px in zip(xs, batch):
        np.testing.assert_allclose(px, cset.project(x), rtol=1e-13, atol=1e-13)


# ---------------------------------------------------------------------------
# averaged maps
# ---------------------------------------------------------------------------


def test_linear_map_rejects_expansion():
    with pytest.raises(InvalidInput):
        LinearMap(2 * np.eye(2))
    assert LinearMap(np.eye(2) * (1 + 1e-13)).dim == 2


def test_rotation_and_factories():
    np.testing.assert_allclose(rotation(math.pi / 2)([1, 0]), [0, 1], atol=1e-15)
    np.testing.assert_allclose(identity(3)([1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(negation(2)([1, 2]), [-1, -2])
    with pytest.raises(InvalidInput):
        rotation(1.0, 2, (0, 2))


def test_averaged_map_evaluation():
    R = AveragedMap(Fraction(1, 2), rotation(math.pi / 2))
    np.testing.assert_allclose(evaluate(R, [1, 0]), [0.5, 0.5])
    for bad in (0, 1, 1.5):
        with pytest.raises(InvalidInput):
            AveragedMap(bad, identity(2))


def test_averaged_projection_half_is_projection():
    hs = Halfspace([0, 1], 0)
    R = averaged_projection(hs)
    assert R.alpha == Fraction(1, 2)
    np.testing.assert_allclose(R([3, 5]), [3, 0])
    Q = averaged_projection(hs, Fraction(1, 4))
    np.testing.assert_allclose(Q([3, 4]), [3, 2])


def test_compose_alpha_and_order():
    a = averaged_projection(Halfspace([0, 1], 0))
    b = AveragedMap(Fraction(1, 2), rotation(math.pi / 2))
    c = compose([a, b])
    assert c.alpha == Fraction(2, 3)
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(c(x), b(a(x)))
    with pytest.raises(InvalidInput):
        compose([a])
    with pytest.raises(InvalidInput):
        compose([a, AveragedMap(Fraction(1, 2), identity(3))])


@settings(max_examples=60)
@given(x=vec2, y=vec2, t1=st.floats(-3, 3), t2=st.floats(-3, 3),
       a1=st.fractions(Fraction(1, 20), Fraction(19, 20)), a2=st.fractions(Fraction(1, 20), Fraction(19, 20)))
def test_composite_decomposition_and_nonexpansive_part(x, y, t1, t2, a1, a2):
    c = compose([AveragedMap(a1, rotation(t1)), averaged_projection(Ball([1, 0], 1), a2)])
    T = nonexpansive_part(c)
    scale = 1 + max(np.abs(x).max(), np.abs(y).max())
    keep, mix = float(1 - c.alpha), float(c.alpha)
    np.testing.assert_allclose(keep * x + mix * T(x), c(x), atol=1e-9 * scale)
    assert np.linalg.norm(T(x) - T(y)) <= np.linalg.norm(x - y) + 1e-9 * scale / float(c.alpha)


@settings(max_examples=60)
@given(x=vec2, y=vec2, alpha=st.fractions(Fraction(1, 20), Fraction(19, 20)), t=st.floats(-3, 3))
def test_averaged_maps_are_strongly_nonexpansive(x, y, alpha, t):
    # |Rx - Ry|^2 <= |x - y|^2 - (1 - a)/a |(x - Rx) - (y - Ry)|^2
    R = AveragedMap(alpha, rotation(t))
    rx, ry = R(x), R(y)
    a = float(alpha)
    lhs = float(np.sum((rx - ry) ** 2))
    rhs = float(np.sum((x - y) ** 2)) - (1 - a) / a * float(np.sum(((x - rx) - (y - ry)) ** 2))
    assert lhs <= rhs + 1e-9 * (1 + float(np.sum((x - y) ** 2)))


# ---------------------------------------------------------------------------
# monotone sources and resolvents
# ---------------------------------------------------------------------------


def test_resolvent_of_identity():
    src = LinearMonotone(np.eye(2))
    np.testing.assert_allclose(resolvent(src, [2, 4]), [1, 2])
    np.testing.assert_allclose(reflected_resolvent(src, [2, 4]), [0, 0])
    np.testing.assert_allclose(inverse_resolvent(src, [2, 4]), [1, 2])


def test_resolvent_defining_equation():
    src = QuadraticGradient(np.diag([1.0, 3.0]), [1.0, -1.0])
    x = np.array([0.3, 2.0])
    y = resolvent(src, x)
    np.testing.assert_allclose(y + src.apply(y), x)


def test_monotone_validation():
    with pytest.raises(InvalidInput):
        LinearMonotone(-np.eye(2))
    with pytest.raises(InvalidInput):
        QuadraticGradient([[1, 1], [0, 1]], [0, 0])
    with pytest.raises(InvalidInput):
        LinearMonotone(np.diag([1.0, 2.0]), beta=1.0)
    assert LinearMonotone(np.diag([1.0, 2.0]), beta=0.5).beta == 0.5
    assert issubclass(ConsistencyError, RuntimeError)


def test_cocoercivity_constant():
    assert cocoercivity_constant(LinearMonotone(np.diag([1.0, 2.0]))) == 0.5
    assert cocoercivity_constant(LinearMonotone(np.zeros((2, 2)))) == 1e6
    with pytest.raises(UnsupportedRepresentation):
        cocoercivity_constant(LinearMonotone([[1.0, 1.0], [-1.0, 1.0]]))


def test_averaged_from_cocoercive_identity():
    R = averaged_from_cocoercive(LinearMonotone(np.eye(2)), 1)
    assert R.alpha == Fraction(1, 2)
    np.testing.assert_allclose(R([3, -1]), [0, 0])
    np.testing.assert_allclose(nonexpansive_part(R)([3, -1]), [-3, 1])


def test_averaged_from_cocoercive_zero_operator():
    R = averaged_from_cocoercive(LinearMonotone(np.zeros((2, 2))), 10**6)
    np.testing.assert_allclose(nonexpansive_part(R)([3, -1]), [3, -1])


def test_averaged_from_cocoercive_diag():
    R = averaged_from_cocoercive(LinearMonotone(np.diag([1.0, 2.0])), Fraction(1, 2))
    assert R.alpha == Fraction(2, 3)
    x = np.array([1.0, 1.0])
    np.testing.assert_allclose(R(x), [0.0, -1 / 3])


def test_averaged_from_cocoercive_rejects_wrong_beta():
    with pytest.raises(InvalidInput):
        averaged_from_cocoercive(LinearMonotone(np.diag([1.0, 2.0])), 5)


@settings(max_examples=40)
@given(x=vec3, y=vec3)
def test_reflected_resolvent_with_shift_is_averaged(x, y):
    src = QuadraticGradient(np.diag([0.5, 1.0, 3.0]), [1.0, -2.0, 0.5])
    beta = cocoercivity_constant(src)
    R = averaged_from_cocoercive(src, beta)
    T = nonexpansive_part(R)
    scale = 1 + max(np.abs(x).max(), np.abs(y).max())
    assert np.linalg.norm(T(x) - T(y)) <= np.linalg.norm(x - y) + 1e-9 * scale
    np.testing.assert_allclose(float(1 - R.alpha) * x + float(R.alpha) * T(x), R(x), atol=1e-9 * scale)
