"""Gaussian approximation machinery and coding-rate lower bounds.

The i.i.d. expansion used here is the Berry-Esseen-corrected lower bound

    D_H^eps(rho^n || sigma^n) >= n D + sqrt(n V) Phi^{-1}(eps - C T / sqrt(n V^3)),

valid once the argument of ``Phi^{-1}`` is positive, with ``C = 0.4784``.
Rate bounds keep every finite-``n`` term explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hypotest import DvtTriple, _greedy_log2_type2
from .operators import ValidationError, as_hermitian

# upper end of the known range 0.40973 <= C <= 0.4784; any valid upper bound keeps the bound valid
BERRY_ESSEEN_C = 0.4784


class NTooSmallError(ValueError):
    """The blocklength is below the threshold where the expansion applies."""

    def __init__(self, message: str, n_min: int):
        super().__init__(message)
        self.n_min = n_min


def phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def phi_inv(eps: float) -> float:
    """Inverse standard normal CDF on ``(0, 1)``: bisection, then Newton."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"phi_inv needs eps in (0, 1), got {eps!r}")
    lo, hi = -40.0, 40.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if phi(mid) < eps:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        dens = _pdf(x)
        if dens == 0.0:
            break
        step = (phi(x) - eps) / dens
        x_new = min(max(x - step, lo - 1e-6), hi + 1e-6)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    return x


def berry_esseen_correction(n: int, triple: DvtTriple, c_be: float = BERRY_ESSEEN_C) -> float:
    return c_be * triple.T / math.sqrt(n * triple.V**3)


def expansion_threshold_n(eps: float, triple: DvtTriple, c_be: float = BERRY_ESSEEN_C) -> int:
    """Smallest ``n`` with ``eps - C T / sqrt(n V^3) > 0``."""
    n_star = (c_be * triple.T / (eps * triple.V**1.5)) ** 2
    return int(math.floor(n_star)) + 1


def _check_triple(triple: DvtTriple):
    if not (math.isfinite(triple.D) and math.isfinite(triple.V) and math.isfinite(triple.T)):
        raise ValidationError(f"triple must be finite, got {triple}")
    if not triple.V > 0:
        raise ValidationError("the expansion needs V > 0")
    if triple.T < 0:
        raise ValidationError("T must be non-negative")


def expansion_lower_bound(n: int, eps: float, triple: DvtTriple, c_be: float = BERRY_ESSEEN_C) -> float:
    """Lower bound in bits on ``D_H^eps(rho^{(x)n} || sigma^{(x)n})``."""
    if n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps!r}")
    _check_triple(triple)
    arg = eps - berry_esseen_correction(n, triple, c_be)
    if not arg > 0:
        n_min = expansion_threshold_n(eps, triple, c_be)
        raise NTooSmallError(f"n = {n} is too small for eps = {eps}: need n >= {n_min}", n_min)
    return n * triple.D + math.sqrt(n * triple.V) * phi_inv(arg)


def normal_approximation(n: int, eps: float, triple: DvtTriple) -> float:
    """``n D + sqrt(n V) Phi^{-1}(eps)`` without the remainder."""
    return n * triple.D + math.sqrt(n * triple.V) * phi_inv(eps)


@dataclass(frozen=True)
class RateBound:
    n: int
    eps: float
    eta: float
    rate_bits_per_use: float
    info_bits: float
    penalty_bits: float

    @property
    def log2_messages(self) -> float:
        return self.rate_bits_per_use * self.n


def rate_penalty(eps: float, eta: float) -> float:
    """``log2(4 eps / eta^2)``."""
    return math.log2(4.0 * eps / eta**2)


def _check_eps_eta(eps: float, eta: float):
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps!r}")
    if not 0.0 < eta < eps:
        raise ValidationError(f"eta must lie in (0, eps), got {eta!r}")


def ea_rate_lower_bound(info_bits: float, eps: float, eta: float) -> RateBound:
    """One-shot entanglement-assisted rate ``I_H^{eps-eta}(R;B) - log2(4 eps / eta^2)``."""
    _check_eps_eta(eps, eta)
    pen = rate_penalty(eps, eta)
    return RateBound(1, eps, eta, info_bits - pen, info_bits, pen)


def ea_second_order_rate(triple: DvtTriple, n: int, eps: float, c_be: float = BERRY_ESSEEN_C) -> RateBound:
    """Explicit finite-``n`` rate with ``eta = 1/sqrt(n)``.

    ``(1/n) [ n I + sqrt(n V) Phi^{-1}(eps - eta - C T/sqrt(n V^3)) - log2(4 eps n) ]``
    """
    if n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    eta = 1.0 / math.sqrt(n)
    if not eta < eps:
        raise NTooSmallError(f"n = {n} gives eta = 1/sqrt(n) >= eps = {eps}", int(math.floor(1 / eps**2)) + 1)
    _check_eps_eta(eps, eta)
    info = expansion_lower_bound(n, eps - eta, triple, c_be)
    pen = rate_penalty(eps, eta)
    return RateBound(n, eps, eta, (info - pen) / n, info, pen)


def dh_iid_binary(lam: Sequence[float], mu: Sequence[float], n: int, eps: float) -> float:
    """Exact ``D_H^eps`` of ``n`` copies of commuting qubit states, in bits.

    Outcome strings are grouped by their count ``k`` of the first outcome;
    each of the ``n + 1`` classes has one likelihood ratio. Probabilities of
    ``sigma`` stay in the log domain so large ``n`` does not underflow.
    """
    p, q = float(lam[0]), float(mu[0])
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ValidationError("binary distributions need entries in [0, 1]")
    if not 0.0 <= eps < 1.0:
        raise ValidationError(f"eps must lie in [0, 1), got {eps!r}")
    k = np.arange(n + 1)
    log_binom = np.array([math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) for j in k])

    def log2_class(a: float) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.log(a) if a > 0 else -np.inf
            lb = np.log1p(-a) if a < 1 else -np.inf
            ln = log_binom + np.where(k > 0, k * la, 0.0) + np.where(n - k > 0, (n - k) * lb, 0.0)
        return ln / math.log(2.0)

    lam_k = np.exp2(log2_class(p))
    return -_greedy_log2_type2(lam_k, log2_class(q), eps)


@dataclass(frozen=True)
class EnergyObservable:
    """``G = sum_j g_j |e_j><e_j|`` with ``g_j >= 0``."""

    eigenvalues: np.ndarray
    eigenbasis: np.ndarray  # columns

    def __post_init__(self):
        g = np.asarray(self.eigenvalues, dtype=float)
        basis = np.asarray(self.eigenbasis, dtype=complex)
        if np.any(g < 0):
            raise ValidationError("energy eigenvalues must be non-negative")
        if basis.shape != (g.size, g.size):
            raise ValidationError("eigenbasis must be square with one column per eigenvalue")
        if np.max(np.abs(basis.conj().T @ basis - np.eye(g.size))) > 1e-8:
            raise ValidationError("eigenbasis is not orthonormal")
        object.__setattr__(self, "eigenvalues", g)
        object.__setattr__(self, "eigenbasis", basis)

    @classmethod
    def diagonal(cls, g: Sequence[float]) -> EnergyObservable:
        g = np.asarray(g, dtype=float)
        return cls(g, np.eye(g.size, dtype=complex))

    @classmethod
    def from_matrix(cls, G) -> EnergyObservable:
        w, v = np.linalg.eigh(as_hermitian(G))
        return cls(np.clip(w, 0.0, None) if w.min() > -1e-9 else w, v)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def matrix(self) -> np.ndarray:
        return (self.eigenbasis * self.eigenvalues) @ self.eigenbasis.conj().T

    def extension(self, n: int) -> np.ndarray:
        """``(1/n) sum_k I (x) ... (x) G (x) ... (x) I`` on ``n`` factors."""
        d = self.dim
        g = self.matrix
        total = np.zeros((d**n, d**n), dtype=complex)
        for k in range(n):
            total += np.kron(np.kron(np.eye(d**k), g), np.eye(d ** (n - k - 1)))
        return total / n


@dataclass(frozen=True)
class EnergyReport:
    average: float
    budget: float
    margin: float
    satisfied: bool


def energy_check(states: Sequence[np.ndarray], G: EnergyObservable, P: float, n: int | None = None) -> EnergyReport:
    """Average of ``Tr{G_n rho^m}`` over codewords against the budget ``P``."""
    if not states:
        raise ValidationError("need at least one codeword state")
    dim = states[0].shape[0]
    if n is None:
        n = round(math.log(dim) / math.log(G.dim)) if G.dim > 1 else 1
    if G.dim**n != dim or any(s.shape != (dim, dim) for s in states):
        raise ValidationError(f"codeword dim {dim} is not a power of the observable dim {G.dim}")
    gn = G.extension(n)
    avg = float(np.mean([np.trace(gn @ s).real for s in states]))
    margin = float(P) - avg
    return EnergyReport(avg, float(P), margin, margin >= -1e-12)
