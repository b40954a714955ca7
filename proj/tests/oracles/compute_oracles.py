# Copyright (c) apriori contributors.
# SPDX-License-Identifier: Apache-2.0

"""Independent oracles for the frozen expected values used by the C++ tests.

Everything here is computed from closed forms or brute-force numerics
(scipy quadrature / dense grids / an independent BVP solve) and never
calls into the C++ library.
"""
import math

import numpy as np
from scipy import integrate, optimize


def r0_quadratic(offset):
    # smallest r with (offset + r^2/2)/r >= 1 on [r, inf): larger root of r^2/2 - r + offset
    disc = 1.0 - 2.0 * offset
    if disc < 0:
        return 1e-6
    return 1.0 + math.sqrt(disc)


def lq_constants(c_g, xi, delta, t0=0.99):
    r0 = r0_quadratic(0.1)
    quad, _ = integrate.quad(lambda t: 0.1 + 0.5, 0.0, 1.0)
    c = r0 + quad
    radius = c_g * c
    xs = np.linspace(-radius, radius, 200001)
    lam0 = np.max(0.1 + 0.5 * (xs - 1.0) ** 2)
    # sigma(r) = max over x,|u|<=r of u*u - L = u^2/2 - 0.1 - (x-1)^2/2
    def sigma(r):
        us = np.linspace(-r, r, 2001)
        xg = np.linspace(-radius, radius, 4001)
        best = -np.inf
        for x in (xg.tolist() + [1.0]):
            best = max(best, np.max(0.5 * us ** 2 - 0.1 - 0.5 * (x - 1.0) ** 2))
        return best
    beta = sigma((c + 1.0) / t0)
    assert beta > delta / xi
    return dict(r0=r0, c=c, radius=radius, lambda0=lam0, lambda1=0.0, beta=beta, sigma=sigma)


def eta_of(theta, beta):
    res = optimize.minimize_scalar(lambda r: -r / (theta(r) + beta), bounds=(0.0, 1e3), method="bounded",
                                   options=dict(xatol=1e-12))
    return -res.fun


def lq_closed_form():
    th = math.tanh(1.0)
    u = lambda t: th * math.cosh(t) - math.sinh(t)
    x = lambda t: 1.0 - math.cosh(t) + th * math.sinh(t)
    cost, _ = integrate.quad(lambda t: 0.1 + 0.5 * u(t) ** 2 + 0.5 * (x(t) - 1.0) ** 2, 0, 1, epsabs=1e-14)
    # independent BVP check of the Euler-Lagrange system
    sol = integrate.solve_bvp(lambda t, z: np.vstack([z[1], z[0] - 1.0]),
                              lambda za, zb: np.array([za[0], zb[1]]),
                              np.linspace(0, 1, 50), np.zeros((2, 50)), tol=1e-10)
    return dict(u0=u(0.0), cost=cost, closed_vs_bvp=abs(sol.sol(0.0)[1] - u(0.0)),
                cost_formula=0.1 + th / 2.0)


def main():
    print("== lq-tracking ==")
    lq = lq_constants(c_g=1.0, xi=1.0, delta=0.1)
    ell = max(math.sqrt(2.0 * (lq["lambda0"] + lq["beta"])), math.sqrt(4 * lq["lambda0"]) / 2)
    for k in ("r0", "c", "radius", "lambda0", "beta"):
        print(f"{k} = {lq[k]:.12f}")
    print(f"sigma(2) = {lq['sigma'](2.0):.12f}   sigma(0) = {lq['sigma'](0.0):.12f}")
    print(f"ell = {ell:.12f}")

    print("== lq-tv ==")
    tv = lq_constants(c_g=1.5, xi=2.0, delta=0.5)
    theta = lambda r: 0.1 + 0.5 * r * r
    eta = eta_of(theta, tv["beta"])
    c_g, c_dg, xi, mu = 1.5, math.pi, 2.0, 1.0
    gamma = (c_dg + c_g * xi) / (c_g * xi) * math.exp(c_g * eta * xi * (tv["lambda0"] + tv["beta"]))
    ell2 = max(math.sqrt(2.0 / mu * (tv["lambda0"] + tv["beta"]) * (1 + gamma * xi)),
               math.sqrt(4 * mu * tv["lambda0"]) / 2)
    for k in ("c", "radius", "lambda0", "beta"):
        print(f"{k} = {tv[k]:.12f}")
    print(f"eta = {eta:.12f} (closed form {1/math.sqrt(2*(0.1+tv['beta'])):.12f})")
    print(f"gamma = {gamma:.9e}")
    print(f"ell = {ell2:.9e}")

    print("== sin-well ==")
    c = 1e-6 + 2.0
    xs = np.linspace(-c, c, 400001)
    lam0 = np.max(2.0 + np.sin(xs))
    beta = 0.5 * ((c + 1) / 0.99) ** 2 - 2.0 + np.max(-np.sin(xs))
    print(f"c = {c:.12f} lambda0 = {lam0:.12f} beta = {beta:.12f}")
    print(f"ell = {max(math.sqrt(2*(lam0+beta)), math.sqrt(4*lam0)/2):.12f}")

    print("== toy-quadratic ==")
    c = 1e-6 + 1.0
    beta_05 = 0.5 * ((c + 1) / 0.5) ** 2 - 1.0
    beta_099 = 0.5 * ((c + 1) / 0.99) ** 2 - 1.0
    print(f"beta(T0=0.5) = {beta_05:.12f} ell = {math.sqrt(2*(1+beta_05)):.12f}")
    print(f"beta(T0=0.99) = {beta_099:.12f} ell = {math.sqrt(2*(1+beta_099)):.12f}")

    print("== LQ closed form ==")
    for k, v in lq_closed_form().items():
        print(f"{k} = {v:.12g}")


if __name__ == "__main__":
    main()
