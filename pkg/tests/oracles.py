"""Independent reference computations used by the tests.

Nothing here calls into the routines under test for the quantity being
checked; each oracle uses a different algorithm or a different library.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize


def gaussian_cdf_quad(x: float) -> float:
    """Standard normal CDF by adaptive quadrature of the density."""
    dens = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    if x >= 0:
        val, _ = integrate.quad(dens, 0.0, x, epsabs=1e-14, epsrel=1e-14)
        return 0.5 + val
    val, _ = integrate.quad(dens, x, 0.0, epsabs=1e-14, epsrel=1e-14)
    return 0.5 - val


def dh_linprog(lam, mu, eps: float) -> float:
    """Commuting ``D_H^eps`` in bits from a linear program over diagonal tests."""
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    res = optimize.linprog(
        c=mu,
        A_ub=-lam[None, :],
        b_ub=[-(1.0 - eps)],
        bounds=[(0.0, 1.0)] * lam.size,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    assert res.status == 0
    return math.inf if res.fun <= 0 else -math.log2(res.fun)


def dh_binomial_brute(p: float, q: float, n: int, eps: float) -> float:
    """``D_H^eps`` of ``n`` i.i.d. copies of ``(p, 1-p)`` vs ``(q, 1-q)`` by listing all ``2^n`` strings."""
    lam = np.array([1.0])
    mu = np.array([1.0])
    for _ in range(n):
        lam = np.kron(lam, [p, 1 - p])
        mu = np.kron(mu, [q, 1 - q])
    return dh_linprog(lam, mu, eps)


def dh_sdp(rho: np.ndarray, sigma: np.ndarray, eps: float) -> float:
    """General ``D_H^eps`` from a semidefinite program (requires cvxpy)."""
    import cvxpy as cp

    d = rho.shape[0]
    L = cp.Variable((d, d), hermitian=True)
    cons = [L >> 0, np.eye(d) - L >> 0, cp.real(cp.trace(L @ rho)) >= 1 - eps]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(L @ sigma))), cons)
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200000)
    return -math.log2(prob.value)


def kron_all(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def swap_matrix(d1: int, d2: int) -> np.ndarray:
    """Permutation ``|i>|j> -> |j>|i>`` from ``C^d1 (x) C^d2`` to ``C^d2 (x) C^d1``."""
    s = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            s[j * d1 + i, i * d2 + j] = 1.0
    return s


def bell_projector() -> np.ndarray:
    v = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return np.outer(v, v.conj())
