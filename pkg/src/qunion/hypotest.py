"""Hypothesis-testing relative entropy and the log-likelihood random variable.

All logarithms are base 2. Infinite values use ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import (
    ValidationError,
    as_density,
    partial_trace,
    positive_part_projector,
    spectral_decompose,
    support_projector,
    tensor,
)

ZERO_TOL = 1e-12
OVERLAP_TOL = 1e-12
BISECTION_ITERS = 200
BISECTION_WIDTH = 1e-12


@dataclass(frozen=True)
class LogLikelihoodDistribution:
    """Atoms ``(z, p)`` of ``Z = log2(lambda_x / mu_y)`` with ``p = lambda_x Tr{P_x Q_y}``.

    ``infinite_mass`` collects the probability of pairs with ``lambda_x > 0``
    and ``mu_y = 0`` (where ``Z = +inf``).
    """

    z: np.ndarray
    p: np.ndarray
    infinite_mass: float

    @property
    def total_mass(self) -> float:
        return float(self.p.sum()) + self.infinite_mass

    def tail(self, threshold_bits: float) -> float:
        """``Pr{Z >= threshold_bits}``, counting the ``+inf`` atoms."""
        return float(self.p[self.z >= threshold_bits].sum()) + self.infinite_mass


def _spectra(rho, sigma):
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise ValidationError(f"state dims differ: {rho.shape[0]} vs {sigma.shape[0]}")
    return rho, sigma, spectral_decompose(rho), spectral_decompose(sigma)


def z_distribution(rho, sigma) -> LogLikelihoodDistribution:
    _, _, sr, ss = _spectra(rho, sigma)
    lam = sr.eigenvalues
    mu = ss.eigenvalues
    overlap = np.abs(sr.vectors.conj().T @ ss.vectors) ** 2  # [x, y]
    z, p = [], []
    inf_mass = 0.0
    for x in range(len(lam)):
        if lam[x] <= ZERO_TOL:
            continue
        for y in range(len(mu)):
            if overlap[x, y] <= OVERLAP_TOL:
                continue
            mass = lam[x] * overlap[x, y]
            if mu[y] <= ZERO_TOL:
                inf_mass += mass
            else:
                z.append(math.log2(lam[x] / mu[y]))
                p.append(mass)
    return LogLikelihoodDistribution(np.array(z, dtype=float), np.array(p, dtype=float), float(inf_mass))


@dataclass(frozen=True)
class DvtTriple:
    """Mean ``D``, variance ``V`` and absolute third central moment ``T`` of ``Z``."""

    D: float
    V: float
    T: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.D)


INFINITE_TRIPLE = DvtTriple(math.inf, math.inf, math.inf)


def dvt_from_distribution(dist: LogLikelihoodDistribution) -> DvtTriple:
    if dist.infinite_mass > ZERO_TOL:
        return INFINITE_TRIPLE
    D = float(np.dot(dist.p, dist.z))
    dev = dist.z - D
    V = float(np.dot(dist.p, dev**2))
    T = float(np.dot(dist.p, np.abs(dev) ** 3))
    return DvtTriple(D, V, T)


def dvt(rho, sigma) -> DvtTriple:
    """``(D, V, T)`` of ``rho`` relative to ``sigma``; infinite if supp(rho) is not in supp(sigma)."""
    return dvt_from_distribution(z_distribution(rho, sigma))


# -- hypothesis testing relative entropy ------------------------------------


@dataclass(frozen=True)
class DhBracket:
    """Certified enclosure ``lower <= D_H^eps(rho||sigma) <= upper``.

    ``witness`` is a feasible test achieving ``lower``; ``t`` is the dual
    multiplier that certifies ``upper``. ``t_lo``/``t_hi`` bracket the
    Neyman-Pearson threshold on ``rho - t sigma``.
    """

    lower: float
    upper: float
    witness: np.ndarray
    t: float
    eps: float
    type1_success: float
    type2: float
    t_lo: float
    t_hi: float

    @property
    def width(self) -> float:
        if math.isinf(self.lower) and math.isinf(self.upper):
            return 0.0
        return self.upper - self.lower


def _neg_log2(x: float) -> float:
    return math.inf if x <= 0 else -math.log2(x)


def _np_test(rho: np.ndarray, sigma: np.ndarray, t: float) -> tuple[np.ndarray, float]:
    tol = 1e-14 * (1.0 + t)
    proj = positive_part_projector(rho - t * sigma, tol)
    return proj, float(np.trace(proj @ rho).real)


def _dual_value(rho: np.ndarray, sigma: np.ndarray, eps: float, t: float) -> float:
    """``t (1 - eps) - Tr{(t rho - sigma)_+}``, a lower bound on the optimal type-II error."""
    w = np.linalg.eigvalsh(t * rho - sigma)
    return t * (1.0 - eps) - float(w[w > 0].sum())


def _maximize_dual(rho, sigma, eps, lo, hi, candidates, iters: int = 120):
    best_t, best = 0.0, 0.0
    for t in candidates:
        if math.isfinite(t) and t >= 0:
            v = _dual_value(rho, sigma, eps, t)
            if v > best:
                best_t, best = t, v
    # the dual objective is concave in t, so golden-section search is valid
    gr = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = _dual_value(rho, sigma, eps, c)
    fd = _dual_value(rho, sigma, eps, d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = _dual_value(rho, sigma, eps, c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = _dual_value(rho, sigma, eps, d)
    for t, v in ((c, fc), (d, fd)):
        if v > best:
            best_t, best = t, v
    return best_t, best


def dh_epsilon(rho, sigma, eps: float) -> DhBracket:
    """Bracket ``D_H^eps(rho||sigma) = -log2 min{Tr L sigma : Tr L rho >= 1 - eps, 0 <= L <= I}``.

    Bisects the threshold ``t`` of the projector onto the positive part of
    ``rho - t sigma``, mixes the two bracketing tests so that the type-I
    constraint is met with equality, and certifies an upper value through
    the dual point ``(t, (t rho - sigma)_+)``.
    """
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps!r}")
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise ValidationError("state dims differ")
    target = 1.0 - eps
    d = rho.shape[0]

    w_sig, v_sig = np.linalg.eigh(sigma)
    ker = v_sig[:, w_sig <= ZERO_TOL]
    kernel_proj = ker @ ker.conj().T
    if float(np.trace(kernel_proj @ rho).real) >= target:
        # a test inside ker(sigma) already meets the type-I constraint
        succ = float(np.trace(kernel_proj @ rho).real)
        return DhBracket(math.inf, math.inf, kernel_proj, math.inf, eps, succ, 0.0, math.inf, math.inf)

    lam_max = float(np.linalg.eigvalsh(rho)[-1])
    mu_min = float(w_sig[w_sig > ZERO_TOL].min())
    t_lo, t_hi = 0.0, lam_max / mu_min
    proj_lo, g_lo = _np_test(rho, sigma, t_lo)
    proj_hi, g_hi = _np_test(rho, sigma, t_hi)
    for _ in range(BISECTION_ITERS):
        if g_hi < target:
            break
        t_lo, proj_lo, g_lo = t_hi, proj_hi, g_hi
        t_hi *= 2.0
        proj_hi, g_hi = _np_test(rho, sigma, t_hi)
    else:
        raise RuntimeError("could not find a threshold with type-I success below 1 - eps")

    for _ in range(BISECTION_ITERS):
        if t_hi - t_lo <= BISECTION_WIDTH * max(1.0, t_hi):
            break
        mid = 0.5 * (t_lo + t_hi)
        proj, g = _np_test(rho, sigma, mid)
        if g >= target:
            t_lo, proj_lo, g_lo = mid, proj, g
        else:
            t_hi, proj_hi, g_hi = mid, proj, g

    gamma = 0.0 if g_lo == g_hi else (g_lo - target) / (g_lo - g_hi)
    gamma = min(max(gamma, 0.0), 1.0)
    witness = (1.0 - gamma) * proj_lo + gamma * proj_hi
    succ = float(np.trace(witness @ rho).real)
    beta = float(np.trace(witness @ sigma).real)
    lower = _neg_log2(beta)

    cands = [1.0 / t_hi]
    if t_lo > 0:
        cands.append(1.0 / t_lo)
    lo = 0.5 / t_hi
    hi = 2.0 / t_lo if t_lo > 0 else 1e12 * d
    t_dual, dual = _maximize_dual(rho, sigma, eps, lo, hi, cands)
    upper = _neg_log2(dual)
    return DhBracket(lower, upper, witness, t_dual, eps, succ, beta, t_lo, t_hi)


def _greedy_log2_type2(lam: np.ndarray, log2_mu: np.ndarray, eps: float) -> float:
    """Exact minimal type-II error (as log2) for commuting hypotheses.

    Fractional knapsack: take outcomes in decreasing likelihood ratio until
    the ``rho`` mass reaches ``1 - eps``.
    """
    lam = np.asarray(lam, dtype=float)
    log2_mu = np.asarray(log2_mu, dtype=float)
    keep = lam > 0
    lam, log2_mu = lam[keep], log2_mu[keep]
    order = np.argsort(-(np.log2(lam) - log2_mu), kind="stable")
    remaining = 1.0 - eps
    log2_beta = -math.inf
    for k in order:
        if remaining <= 0:
            break
        frac = remaining / lam[k] if lam[k] > remaining else 1.0
        if log2_mu[k] > -math.inf:
            term = math.log2(frac) + log2_mu[k]
            log2_beta = np.logaddexp2(log2_beta, term)
        remaining -= frac * lam[k]
    return float(log2_beta)


def dh_commuting_oracle(lam: Sequence[float], mu: Sequence[float], eps: float) -> float:
    """``D_H^eps`` in bits for diagonal states with spectra ``lam`` and ``mu``."""
    if not 0.0 <= eps < 1.0:
        raise ValidationError(f"eps must lie in [0, 1), got {eps!r}")
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore"):
        log2_mu = np.where(mu > 0, np.log2(np.where(mu > 0, mu, 1.0)), -np.inf)
    return -_greedy_log2_type2(np.asarray(lam, dtype=float), log2_mu, eps)


# -- test operator from the likelihood-ratio pairs ---------------------------


@dataclass(frozen=True)
class TLResult:
    """Support projector of ``sum_{lambda_x >= thresh mu_y} Q_y P_x Q_y`` and its checks."""

    T: np.ndarray
    tr_rho: float
    tr_sigma: float
    prob_z: float
    thresh: float

    @property
    def rho_ok(self) -> bool:
        return self.tr_rho >= self.prob_z - 1e-8

    @property
    def sigma_ok(self) -> bool:
        return self.tr_sigma <= 1.0 / self.thresh + 1e-8

    @property
    def holds(self) -> bool:
        return self.rho_ok and self.sigma_ok


def build_TL(rho, sigma, thresh: float) -> TLResult:
    """Likelihood-ratio test operator for threshold ``thresh > 0``.

    Uses the spectral projectors of distinct eigenvalues. ``prob_z`` is
    ``Pr{Z >= log2 thresh}``. The returned result reports whether
    ``Tr{T rho} >= prob_z`` and ``Tr{T sigma} <= 1/thresh`` hold; it does not
    raise when they fail.
    """
    if not thresh > 0:
        raise ValidationError(f"thresh must be positive, got {thresh!r}")
    rho, sigma, sr, ss = _spectra(rho, sigma)
    px = [(lam, p) for lam, p in sr.grouped() if lam > ZERO_TOL]
    qy = [(max(mu, 0.0), q) for mu, q in ss.grouped()]
    d = rho.shape[0]
    t_tilde = np.zeros((d, d), dtype=complex)
    prob = 0.0
    for lam, p in px:
        for mu, q in qy:
            overlap = float(np.trace(p @ q).real)
            if overlap <= OVERLAP_TOL:
                continue
            if mu <= ZERO_TOL or lam >= thresh * mu * (1 - 1e-12):
                t_tilde += q @ p @ q
                prob += lam * overlap
    # absolute cutoff: T~ has trace equal to a sum of overlaps, each above OVERLAP_TOL
    w, v = np.linalg.eigh(0.5 * (t_tilde + t_tilde.conj().T))
    keep = v[:, w > 1e-10]
    T = keep @ keep.conj().T
    return TLResult(
        T=T,
        tr_rho=float(np.trace(T @ rho).real),
        tr_sigma=float(np.trace(T @ sigma).real),
        prob_z=prob,
        thresh=float(thresh),
    )


def optimal_threshold_test(rho, sigma, thresh: float) -> tuple[np.ndarray, float, float, float]:
    """Optimal test with ``Tr{T rho} >= Pr{Z >= log2 thresh}``.

    Returns ``(T, tr_rho, tr_sigma, prob_z)``. This is the Neyman-Pearson
    witness at type-I error ``1 - prob_z``; it decides whether *some* test
    meets both inequalities, independently of how :func:`build_TL` builds
    its projector.
    """
    rho = as_density(rho)
    sigma = as_density(sigma)
    prob = build_TL(rho, sigma, thresh).prob_z
    d = rho.shape[0]
    if prob <= 1e-15:
        T = np.zeros((d, d), dtype=complex)
    elif prob >= 1 - 1e-12:
        T = support_projector(rho, 1e-12)
    else:
        T = dh_epsilon(rho, sigma, 1.0 - prob).witness
    return T, float(np.trace(T @ rho).real), float(np.trace(T @ sigma).real), prob


# -- mutual information --------------------------------------------------------


@dataclass(frozen=True)
class MutualInformation:
    """``zeta_CD`` together with ``zeta_C (x) zeta_D``."""

    joint: np.ndarray
    product: np.ndarray
    dims: tuple[int, int]
    triple: DvtTriple

    def hypothesis_testing(self, eps: float) -> DhBracket:
        """``I_H^eps(C;D) = D_H^eps(zeta_CD || zeta_C (x) zeta_D)``."""
        return dh_epsilon(self.joint, self.product, eps)


def mutual_information_quantities(zeta, dims: Sequence[int]) -> MutualInformation:
    zeta = as_density(zeta)
    if len(dims) != 2:
        raise ValidationError("dims must list exactly two subsystems")
    dc, dd = int(dims[0]), int(dims[1])
    if dc * dd != zeta.shape[0]:
        raise ValidationError(f"dims {dims} do not match state dim {zeta.shape[0]}")
    zc = partial_trace(zeta, [dc, dd], [0])
    zd = partial_trace(zeta, [dc, dd], [1])
    prod = tensor(zc, zd)
    prod = 0.5 * (prod + prod.conj().T)
    return MutualInformation(joint=zeta, product=prod, dims=(dc, dd), triple=dvt(zeta, prod))
