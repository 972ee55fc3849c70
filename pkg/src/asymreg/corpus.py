"""Builtin instance corpus.

Every instance is written out as the same JSON document an instance file
would hold and then parsed, so the corpus exercises the file format too.
Random data (normals, orthogonal matrices, PSD matrices) comes from
``numpy.random.default_rng`` with the seed stored in the instance metadata.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .instances import Instance, instance_from_dict

_ORIGIN_NOTE = "every factor fixes the origin, so any positive constant is an admissible K"


def _proj(alpha, cset):
    return {"alpha": alpha, "kind": "projection", "params": {"set": cset}}


def _halfspace(normal, offset):
    return {"type": "halfspace", "normal": list(map(float, normal)), "offset": float(offset)}


def _ball(center, radius):
    return {"type": "ball", "center": list(map(float, center)), "radius": float(radius)}


def _box(lower, upper):
    return {"type": "box", "lower": list(map(float, lower)), "upper": list(map(float, upper))}


def _affine(basis, anchor):
    return {"type": "affine", "basis": [list(map(float, r)) for r in basis], "anchor": list(map(float, anchor))}


def _rot(alpha, theta, plane=None):
    params = {"theta": float(theta)}
    if plane is not None:
        params["plane"] = list(plane)
    return {"alpha": alpha, "kind": "rotation_avg", "params": params}


def _lres(matrix, beta="auto", alpha="auto"):
    return {"alpha": alpha, "kind": "linear_resolvent",
            "params": {"matrix": np.asarray(matrix, dtype=float).tolist(), "beta": beta}}


def _alin(alpha, matrix):
    return {"alpha": alpha, "kind": "averaged_linear", "params": {"matrix": np.asarray(matrix, dtype=float).tolist()}}


def _const(c):
    return {"form": "constant", "value": c}


def _doc(id_, dim, factors, x0, K, note, *, cfp=True, seed=None, eps_grid=(1.0, 0.1, 0.01), d="auto"):
    meta = {"k_justification": note}
    if cfp:
        meta["common_fixed_point"] = [0.0] * dim
    if seed is not None:
        meta["seed"] = seed
    return {"id": id_, "dim": dim, "factors": factors, "x0": list(map(float, x0)), "K": K,
            "b": "auto", "d": d, "eps_grid": list(eps_grid), "metadata": meta}


def _orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _unit_rows(rng, rows, dim):
    g = rng.standard_normal((rows, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def corpus_documents() -> list[dict]:
    pi = math.pi
    docs = [
        _doc("rot2-quarter", 2, [_rot(0.5, pi / 2), _rot(0.5, 0.0)], [1, 0], _const(1),
             "both factors fix the origin; the composite is (id + quarter turn)/2", d=1.0),
        _doc("rot2-mixed", 2, [_rot(0.5, pi / 3), _rot("1/3", -pi / 4)], [2, -1], _const(1), _ORIGIN_NOTE),
        _doc("rot2-slow", 2, [_rot(0.5, 0.1), _rot(0.5, 0.0)], [1, 0], _const(1), _ORIGIN_NOTE),
        _doc("identity-pair", 2, [_rot(0.5, 0.0), _rot(0.5, 0.0)], [1, 1], _const(1), _ORIGIN_NOTE),
        _doc("zero-map", 2, [_alin(0.5, -np.eye(2)), _rot(0.5, 0.0)], [3, 4], _const(1), _ORIGIN_NOTE),
        _doc("rot3-plane8", 8, [_rot(0.5, 1.0, (0, 1)), _rot(0.25, 2.0, (2, 3)), _rot(0.6, -0.7, (4, 5))],
             np.ones(8), _const(1), _ORIGIN_NOTE),
        _doc("proj2-consistent", 2,
             [_proj(0.5, _halfspace([0, 1], 0)), _proj(0.5, _halfspace([1, 1], 1))], [3, 5], _const(1),
             "both halfspaces contain the origin"),
        _doc("proj2-inconsistent", 2,
             [_proj(0.5, _halfspace([0, 1], 0)), _proj(0.5, _halfspace([0, -1], -1))], [5, 7], _const(1),
             "disjoint halfspaces; (0,0) and (0,1) are fixed points of the two factors", cfp=False),
        _doc("proj2-relaxed-inconsistent", 2,
             [_proj(0.3, _ball([0, 0], 1)), _proj(0.45, _halfspace([-1, 0], -3))], [0, 4], _const(3),
             "ball fixes (0,0), halfspace {x1 >= 3} fixes (3,0)", cfp=False),
        _doc("proj2-ball-pair", 2,
             [_proj(0.5, _ball([-2, 0], 1)), _proj(0.5, _ball([2, 0], 1))], [0, 3],
             {"form": "inverse_power", "c0": 1, "c": 1, "k": 1},
             "disjoint balls; (-1,0) and (1,0) are fixed points of norm 1 <= c0", cfp=False),
        _doc("proj3-mixed2", 2,
             [_proj(0.5, _ball([0, 0], 2)), _proj(0.4, _box([-1, -1], [1, 3])),
              _proj(0.6, _halfspace([1, -1], 0.5))], [6, -3], _const(1), "all three sets contain the origin"),
        _doc("proj3-inconsistent2", 2,
             [_proj(0.5, _ball([0, 0], 1)), _proj(0.5, _ball([4, 0], 1)), _proj(0.5, _halfspace([0, 1], -2))],
             [1, 1], _const(4), "fixed points (0,0), (4,0), (0,-2) of the factors", cfp=False),
        _doc("resolvent-diag", 2, [_lres(np.diag([1.0, 2.0]), 0.5), _lres(np.diag([1.0, 2.0]), 0.5)],
             [1, -2], _const(1), "A x = diag(1,2) x vanishes at the origin"),
        _doc("resolvent-identity", 2, [_lres(np.eye(2)), _lres(np.eye(2))], [2, 3], _const(1),
             "A = id vanishes at the origin"),
        _doc("resolvent-skew", 2, [_lres([[1.0, 1.0], [-1.0, 1.0]], 0.5), _lres(np.diag([1.0, 2.0]))],
             [2, 2], _const(1), "linear monotone sources vanish at the origin"),
        _doc("mixed2-m4", 2,
             [_rot(0.5, pi / 2), _proj(0.5, _ball([0, 0], 1)), _lres(np.diag([1.0, 3.0])),
              _proj(0.5, _halfspace([1, 0], 0.5))], [4, 4], _const(1), _ORIGIN_NOTE),
    ]

    rng = np.random.default_rng(8)
    normals = _unit_rows(rng, 4, 8)
    docs.append(_doc("proj4-hs8", 8, [_proj(0.5, _halfspace(n, 0.0)) for n in normals],
                     5 * rng.standard_normal(8), _const(1), "halfspaces through the origin", seed=8))

    rng = np.random.default_rng(16)
    q = _orthogonal(rng, 16)
    docs.append(_doc("proj4-affine16", 16,
                     [_proj(0.5, _affine(q[:12], np.zeros(16))), _proj(0.3, _affine(q[4:12], np.zeros(16))),
                      _proj(0.5, _box(-np.ones(16), np.ones(16))), _proj(0.7, _ball(np.zeros(16), 3))],
                     3 * rng.standard_normal(16), _const(1), "all four sets contain the origin", seed=16))

    docs.append(_doc("proj3-inconsistent8", 8,
                     [_proj(0.5, _box(np.ones(8), 2 * np.ones(8))), _proj(0.5, _ball(np.zeros(8), 1)),
                      _proj(0.5, _halfspace(np.ones(8), -1))],
                     np.linspace(-2, 2, 8), _const(3),
                     "fixed points (1,...,1) of norm sqrt(8) < 3, the origin, and -(1/8)(1,...,1)", cfp=False))

    e1 = np.eye(16)[0]
    docs.append(_doc("proj2-strip16", 16,
                     [_proj(0.25, _halfspace(e1, 0)), _proj(0.75, _halfspace(-e1, -2))],
                     np.full(16, 0.5), _const(2), "disjoint parallel halfspaces; 0 and 2 e1 are fixed points",
                     cfp=False))

    rng = np.random.default_rng(88)
    psd = []
    for _ in range(3):
        g = rng.standard_normal((8, 8))
        psd.append(g @ g.T / 8)
    docs.append(_doc("resolvent-psd8", 8, [_lres(m) for m in psd], 2 * rng.standard_normal(8), _const(1),
                     "linear monotone sources vanish at the origin", seed=88))

    rng = np.random.default_rng(1616)
    docs.append(_doc("averaged-linear16", 16,
                     [_alin(0.5, 0.9 * _orthogonal(rng, 16)), _alin(0.3, _orthogonal(rng, 16))],
                     rng.standard_normal(16), _const(1), "linear factors fix the origin", seed=1616))

    rng = np.random.default_rng(4)
    docs.append(_doc("mixed16-m4", 16,
                     [_proj(0.5, _halfspace(np.eye(16)[0], 1)), _rot(0.5, 1.2, (2, 3)),
                      _lres(np.diag(np.linspace(0.5, 2.0, 16))), _alin(0.4, 0.95 * _orthogonal(rng, 16))],
                     rng.standard_normal(16), _const(1), _ORIGIN_NOTE, seed=4))

    docs.append(_doc("proj3-table8", 8,
                     [_proj(0.5, _ball(np.zeros(8), 1)), _proj(0.5, _box(-np.ones(8), np.ones(8))),
                      _proj(0.5, _halfspace(np.ones(8), 0.5))],
                     np.arange(8) - 3.5, {"form": "table", "points": [[1e-12, 2.0], [0.5, 1.0]]},
                     "all sets contain the origin; table values stay positive"))
    return docs


@lru_cache(maxsize=1)
def _corpus() -> tuple[Instance, ...]:
    return tuple(instance_from_dict(d) for d in corpus_documents())


def builtin_corpus() -> list[Instance]:
    return list(_corpus())


def corpus_instance(instance_id: str) -> Instance:
    for inst in _corpus():
        if inst.id == instance_id:
            return inst
    raise KeyError(instance_id)
