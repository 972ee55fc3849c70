"""Straight-line reference evaluation of the rate formulas.

Independent of the package: plain mpmath, round-to-nearest, high working
precision, no enclosures, no shared code. Used to freeze expected values and
as the reference side of the upper-bound soundness check.
"""

from __future__ import annotations

import math

import mpmath


def _mp(x):
    return mpmath.mpf(x) if not hasattr(x, "numerator") else mpmath.mpf(x.numerator) / x.denominator


def theta(beta, l1, l2, l3):
    beta, l1, l2, l3 = map(_mp, (beta, l1, l2, l3))
    disc = l1**2 + l2**2 + 2 * l1 * l2 + 8 * beta * l1 * l3 + 4 * beta * l2 * l3
    rho = (l1 + l2 + 2 * beta * l3 + mpmath.sqrt(disc)) / (2 * beta)
    return (l1 + l2) * (l3 + rho)


def b_bound(alpha2, k, delta):
    alpha2, delta = _mp(alpha2), _mp(delta)
    kk = _mp(k(delta / 4)) + delta / 8
    return mpmath.sqrt(kk**2 + 2 * theta(1 / alpha2 - 1, kk, kk, delta / 8))


def phi(alpha1, alpha2, k, delta):
    alpha1, delta = _mp(alpha1), _mp(delta)
    b = b_bound(alpha2, k, delta)
    kk = _mp(k(delta / 4)) + delta / 8
    return (b * max(mpmath.sqrt(2), 4 * b / delta) / (1 - alpha1)
            + alpha1 / (1 - alpha1) * kk + delta / 8)


def star_many(alphas):
    s = sum(_mp(a) / (1 - _mp(a)) for a in alphas)
    return 1 / (1 + 1 / s)


def psi(alphas, k, delta):
    if len(alphas) == 2:
        return phi(alphas[0], alphas[1], k, delta)
    head = alphas[:-1]
    inner = lambda rho: max(psi(head, k, rho), _mp(k(rho)))  # noqa: E731
    return phi(star_many(head), alphas[-1], inner, delta)


def omega(alpha, b, eps):
    alpha, b, eps = map(_mp, (alpha, b, eps))
    return alpha * (1 - alpha) / (4 * b) * eps**2


def varphi(eps, b, d, afp, modulus):
    eps, b, d = map(_mp, (eps, b, d))
    a = _mp(afp(eps / 6))
    first = int(mpmath.ceil((18 * b + 12 * a) / eps - 1))
    second = int(mpmath.ceil(d / modulus(d, eps**2 / (27 * b + 18 * a))))
    return max(first, 0) * second


def sigma(alphas, k, b, d, eps):
    a = star_many(alphas)
    return varphi(eps, b, d, lambda delta: psi(alphas, k, delta),
                  lambda bb, e: omega(a, bb, e))


if __name__ == "__main__":
    mpmath.mp.prec = 1024
    one = lambda e: 1  # noqa: E731
    half = mpmath.mpf(1) / 2
    print("theta(1,1,1,1)       ", theta(1, 1, 1, 1))
    print("theta(1/2,1,1,1)     ", theta(half, 1, 1, 1))
    print("theta(1,1.5,1.5,.5)  ", theta(1, 1.5, 1.5, 0.5))
    print("theta(1,1.125,1.125,.125)", theta(1, 1.125, 1.125, 0.125))
    print("b_bound(1/2,1,4)     ", b_bound(half, one, 4))
    print("b_bound(1/2,1,1)     ", b_bound(half, one, 1))
    print("phi(1/2,1/2,1,4)     ", phi(half, half, one, 4))
    print("phi(1/2,1/2,1,1)     ", phi(half, half, one, 1))
    for delta in (1, 2, 4, 8):
        print("phi delta", delta, mpmath.nstr(phi(half, half, one, delta), 30))
    for m in (2, 3, 4):
        print("psi m", m, mpmath.nstr(psi([half] * m, one, 4), 40))
    print("varphi stub", varphi(6, 1, 1, one, lambda d, e: e))
    print("varphi w1/2", varphi(6, 1, 1, one, lambda d, e: omega(half, d, e)))
    print("varphi eps30", varphi(30, 1, 1, one, lambda d, e: e))
    for eps in (6, 3, 1, 0.5, 0.1):
        print("sigma m2 eps", eps, sigma([half, half], one, 1, 1, eps))
    print(math.pi)
