"""Naimark dilation of binary POVMs ``{Lambda, I - Lambda}``.

A measurement operator ``0 <= Lambda <= I`` on a system S is realized as the
projector ``Pi = U^dag (I_S (x) |1><1|) U`` on S (x) probe, where

    U = sqrt(I - Lambda) (x) (|0><0| + |1><1|) + sqrt(Lambda) (x) (|1><0| - |0><1|).

With the probe prepared in ``|0>`` the outcome statistics of ``Pi`` equal
those of ``Lambda``. Because each probe is touched by exactly one
measurement, the probe can be traced out right after its measurement; the
system then evolves by the two-element Kraus families returned by
:meth:`NaimarkDilation.yes_kraus` and :meth:`NaimarkDilation.no_kraus`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import (
    ValidationError,
    apply_kraus,
    as_hermitian,
    as_psd,
    operator_function,
    partial_trace,
    tensor,
)
from .union_bound import BoundReport, report_from_errors

SPECTRUM_TOL = 1e-6
MAX_DILATED_DIM = 4096

KET0 = np.array([[1, 0], [0, 0]], dtype=complex)
KET1 = np.array([[0, 0], [0, 1]], dtype=complex)
_FLIP = np.array([[0, -1], [1, 0]], dtype=complex)  # |1><0| - |0><1|


@dataclass(frozen=True)
class NaimarkDilation:
    lam: np.ndarray
    sqrt_lam: np.ndarray
    sqrt_comp: np.ndarray
    unitary: np.ndarray
    pi: np.ndarray

    @property
    def dim(self) -> int:
        return self.lam.shape[0]

    @property
    def pi_hat(self) -> np.ndarray:
        return np.eye(2 * self.dim, dtype=complex) - self.pi

    def probability(self, rho: np.ndarray) -> float:
        """``Tr{Pi (rho (x) |0><0|)}``, computed on the dilated space."""
        return float(np.trace(self.pi @ tensor(rho, KET0)).real)

    def yes_kraus(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lam, self.sqrt_comp @ self.sqrt_lam

    def no_kraus(self) -> tuple[np.ndarray, np.ndarray]:
        comp = np.eye(self.dim, dtype=complex) - self.lam
        return comp, self.sqrt_lam @ self.sqrt_comp


def dilate(lam) -> NaimarkDilation:
    lam = as_hermitian(lam)
    w = np.linalg.eigvalsh(lam)
    if w[0] < -SPECTRUM_TOL or w[-1] > 1 + SPECTRUM_TOL:
        raise ValidationError(f"spectrum [{w[0]:.3g}, {w[-1]:.3g}] is outside [0, 1]")
    d = lam.shape[0]
    lam = operator_function(lam, lambda x: x, lo=0.0, hi=1.0)
    sqrt_lam = operator_function(lam, np.sqrt, lo=0.0, hi=1.0)
    sqrt_comp = operator_function(np.eye(d) - lam, np.sqrt, lo=0.0, hi=1.0)
    u = np.kron(sqrt_comp, np.eye(2)) + np.kron(sqrt_lam, _FLIP)
    pi = u.conj().T @ np.kron(np.eye(d), KET1) @ u
    pi = 0.5 * (pi + pi.conj().T)
    return NaimarkDilation(lam=lam, sqrt_lam=sqrt_lam, sqrt_comp=sqrt_comp, unitary=u, pi=pi)


def probe_elision_residual(dil: NaimarkDilation, rho: np.ndarray) -> float:
    """Max-abs gap between explicit-probe and probe-elided post-measurement states."""
    big = tensor(rho, KET0)
    worst = 0.0
    for proj, kraus in ((dil.pi, dil.yes_kraus()), (dil.pi_hat, dil.no_kraus())):
        explicit = partial_trace(proj @ big @ proj, [dil.dim, 2], [0])
        elided = sum(k @ rho @ k.conj().T for k in kraus)
        worst = max(worst, float(np.max(np.abs(explicit - elided))))
    return worst


def sequential_yes_probability(rho: np.ndarray, dilations: Sequence[NaimarkDilation]) -> float:
    """Probability that every measurement in order answers "yes", probe-elided."""
    x = rho
    for dil in dilations:
        x = sum(k @ x @ k.conj().T for k in dil.yes_kraus())
    return float(np.trace(x).real)


def explicit_chain_state(rho: np.ndarray, dilations: Sequence[NaimarkDilation], outcomes: Sequence[int]) -> np.ndarray:
    """``... Pi_2 Pi_1 (rho (x) |0..0><0..0|) Pi_1 Pi_2 ...`` on system (x) probes.

    ``outcomes[i]`` selects ``Pi_i`` (1) or ``I - Pi_i`` (0).
    """
    L = len(dilations)
    d = rho.shape[0]
    total = d * 2**L
    if total > MAX_DILATED_DIM:
        raise ValidationError(f"dilated dimension {total} exceeds {MAX_DILATED_DIM}")
    x = tensor(rho, *([KET0] * L))
    dims = [d] + [2] * L
    for i, (dil, bit) in enumerate(zip(dilations, outcomes)):
        proj = dil.pi if bit else dil.pi_hat
        x, _ = apply_kraus([proj], x, dims, [0, i + 1])
    return x


def povm_union_bound(state, lambdas: Sequence[np.ndarray], c: float) -> BoundReport:
    """Union bound for measurement operators through their dilations.

    ``lhs`` is computed on the explicit ``d * 2**L`` dilated space.
    """
    rho = as_psd(state)
    if len(lambdas) < 2:
        raise ValidationError("need at least two measurement operators")
    d = rho.shape[0]
    L = len(lambdas)
    if d * 2**L > MAX_DILATED_DIM:
        raise ValidationError(f"dilated dimension {d * 2**L} exceeds {MAX_DILATED_DIM}")
    dils = [dilate(lam) for lam in lambdas]
    if any(dil.dim != d for dil in dils):
        raise ValidationError("measurement operator dimensions do not match the state")
    final = explicit_chain_state(rho, dils, [1] * L)
    lhs = float(np.trace(rho).real) - float(np.trace(final).real)
    a = [float(np.trace((np.eye(d) - dil.lam) @ rho).real) for dil in dils]
    return report_from_errors(lhs, a, c)
