"""Quantum union bound for sequences of binary projective measurements.

For projectors ``P_1, ..., P_L`` applied in order to ``rho`` the failure
probability ``1 - Tr{P_L ... P_1 rho P_1 ... P_L}`` is bounded by

    (1 + c) a_L + (2 + c + 1/c) (a_2 + ... + a_{L-1}) + (2 + 1/c) a_1,

with ``a_i = Tr{(I - P_i) rho}`` and any ``c > 0``. This module evaluates both
sides, optimizes ``c`` in closed form, compares with the earlier ``4 sum a_i``
and ``2 sqrt(sum a_i)`` bounds, and evaluates the intermediate identities of
the proof on concrete instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import (
    ValidationError,
    as_density,
    as_projector,
    as_pure_state,
    complement,
    expectation,
)

VIOLATION_TOL = 1e-8
C_GRID = (0.01, 0.1, 1.0, 10.0)


def _validate_instance(state, projectors: Sequence[np.ndarray], min_len: int = 2):
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        state = as_pure_state(state)
    else:
        state = as_density(state)
    projectors = [as_projector(p) for p in projectors]
    if len(projectors) < min_len:
        raise ValidationError(f"need at least {min_len} projectors, got {len(projectors)}")
    d = state.shape[0]
    if any(p.shape[0] != d for p in projectors):
        raise ValidationError("projector dimensions do not match the state")
    return state, projectors


def sequential_success_prob(state, projectors: Sequence[np.ndarray], validate: bool = True) -> float:
    """``Tr{P_L ... P_1 rho P_1 ... P_L}`` (or ``||P_L ... P_1 psi||^2``).

    A 1-D ``state`` is read as a pure state vector. Any number of projectors
    (including one) is accepted here; the bound itself needs two or more.
    """
    if validate:
        state, projectors = _validate_instance(state, projectors, min_len=1)
    if state.ndim == 1:
        v = state
        for p in projectors:
            v = p @ v
        return float(np.vdot(v, v).real)
    x = state
    for p in projectors:
        x = p @ x @ p
    return float(np.trace(x).real)


def individual_errors(state, projectors: Sequence[np.ndarray]) -> list[float]:
    """``a_i = Tr{(I - P_i) rho}`` for each projector."""
    return [float(expectation(complement(p), state).real) for p in projectors]


def _coeff_sums(a: Sequence[float]) -> tuple[float, float, float]:
    a = [float(x) for x in a]
    if len(a) < 2:
        raise ValidationError("the union bound needs L >= 2 error terms")
    return a[0], sum(a[1:-1]), a[-1]


def sequential_bound_rhs(a: Sequence[float], c: float) -> float:
    if not c > 0:
        raise ValidationError(f"c must be positive, got {c!r}")
    first, mid, last = _coeff_sums(a)
    return (1 + c) * last + (2 + c + 1 / c) * mid + (2 + 1 / c) * first


def gao_rhs(a: Sequence[float]) -> float:
    return 4.0 * float(sum(a))


def sen_rhs(a: Sequence[float]) -> float:
    return 2.0 * math.sqrt(max(float(sum(a)), 0.0))


@dataclass(frozen=True)
class OptimalC:
    """Minimizer of the bound over ``c > 0``.

    ``branch`` is ``"interior"`` when the minimum is attained at
    ``c_star = sqrt(B/A)``. ``"c->0"`` and ``"c->inf"`` mark an infimum that
    is only approached at the boundary; then ``c_star`` is ``None`` and
    ``rhs_min`` is the limiting value. ``"zero"`` means every ``a_i`` is 0.
    """

    c_star: float | None
    rhs_min: float
    branch: str


def optimal_c(a: Sequence[float]) -> OptimalC:
    # rhs(c) = const + c*A + B/c with A = sum_{i>=2} a_i, B = sum_{i<=L-1} a_i
    first, mid, last = _coeff_sums(a)
    A = mid + last
    B = first + mid
    const = last + 2 * mid + 2 * first
    if A > 0 and B > 0:
        c_star = math.sqrt(B / A)
        return OptimalC(c_star, sequential_bound_rhs(a, c_star), "interior")
    if A > 0:
        return OptimalC(None, const, "c->0")
    if B > 0:
        return OptimalC(None, const, "c->inf")
    return OptimalC(1.0, 0.0, "zero")


@dataclass
class BoundReport:
    lhs: float
    a: list[float]
    c: float
    rhs_ours: float
    rhs_gao: float
    rhs_sen: float
    c_star: float | None
    rhs_min: float
    c_branch: str
    slack: float = field(init=False)
    holds: bool = field(init=False)

    def __post_init__(self):
        self.slack = self.rhs_ours - self.lhs
        self.holds = self.lhs <= self.rhs_ours + VIOLATION_TOL

    def row(self) -> dict:
        return {
            "lhs": self.lhs,
            **{f"a_{i + 1}": x for i, x in enumerate(self.a)},
            "c": self.c,
            "rhs_ours": self.rhs_ours,
            "rhs_gao": self.rhs_gao,
            "rhs_sen": self.rhs_sen,
            "c_star": self.c_star,
            "rhs_min": self.rhs_min,
        }


def report_from_errors(lhs: float, a: Sequence[float], c: float) -> BoundReport:
    opt = optimal_c(a)
    return BoundReport(
        lhs=float(lhs),
        a=[float(x) for x in a],
        c=float(c),
        rhs_ours=sequential_bound_rhs(a, c),
        rhs_gao=gao_rhs(a),
        rhs_sen=sen_rhs(a),
        c_star=opt.c_star,
        rhs_min=opt.rhs_min,
        c_branch=opt.branch,
    )


def verify_union_bound(state, projectors: Sequence[np.ndarray], c: float) -> BoundReport:
    """Evaluate both sides of the bound; ``report.holds`` flags a violation."""
    state, projectors = _validate_instance(state, projectors)
    norm = float(np.vdot(state, state).real) if state.ndim == 1 else float(np.trace(state).real)
    lhs = norm - sequential_success_prob(state, projectors, validate=False)
    a = individual_errors(state, projectors)
    return report_from_errors(lhs, a, c)


@dataclass(frozen=True)
class LemmaResiduals:
    """Residuals of the proof identities on one pure-state instance.

    ``left_telescope``, ``right_telescope`` and ``sandwich_telescope`` are
    absolute residuals of the three telescoping sums for ``1 - <psi|P_L..P_1|psi>``
    and ``1 - ||P_L..P_1 psi||^2`` (ideally 0). ``cauchy_schwarz_slack`` and
    ``deviation_slack`` are RHS - LHS of the two inequalities that bound them
    (ideally >= 0). ``pure_bound_slack`` is RHS - LHS of the pure-state bound
    at ``c = 1``.
    """

    left_telescope: float
    right_telescope: float
    sandwich_telescope: float
    cauchy_schwarz_slack: float
    deviation_slack: float
    pure_bound_slack: float

    def ok(self, tol: float = 1e-9) -> bool:
        return (
            max(self.left_telescope, self.right_telescope, self.sandwich_telescope) <= tol
            and self.cauchy_schwarz_slack >= -tol
            and self.deviation_slack >= -tol
            and self.pure_bound_slack >= -tol
        )


def check_lemma_identities(psi, projectors: Sequence[np.ndarray]) -> LemmaResiduals:
    psi = as_pure_state(psi)
    projectors = [as_projector(p) for p in projectors]
    if not projectors:
        raise ValidationError("need at least one projector")
    L = len(projectors)
    # prefix[k] = P_k ... P_1 psi, prefix[0] = psi
    prefix = [psi]
    for p in projectors:
        prefix.append(p @ prefix[-1])
    q_psi = [complement(p) @ psi for p in projectors]

    s1 = sum(np.vdot(psi, complement(projectors[i]) @ prefix[i]) for i in range(L))
    left_telescope = abs(s1 - (1 - np.vdot(psi, prefix[L])))

    s2 = sum(np.vdot(prefix[i], q_psi[i]) for i in range(L))
    right_telescope = abs(s2 - (1 - np.vdot(prefix[L], psi)))

    sandwiched = [float(np.vdot(prefix[i], complement(projectors[i]) @ prefix[i]).real) for i in range(L)]
    final = float(np.vdot(prefix[L], prefix[L]).real)
    sandwich_telescope = abs(sum(sandwiched) - (1 - final))

    q_exp = [float(np.vdot(q, q).real) for q in q_psi]
    p_last = float(np.vdot(psi, projectors[-1] @ psi).real)
    lhs_cs = 1 - math.sqrt(max(p_last, 0.0)) * math.sqrt(max(final, 0.0))
    rhs_cs = sum(math.sqrt(max(q, 0.0)) * math.sqrt(max(s, 0.0)) for q, s in zip(q_exp, sandwiched))
    cauchy_schwarz_slack = rhs_cs - lhs_cs

    if L >= 2:
        lhs_dev = sum(
            float(np.linalg.norm(complement(projectors[i]) @ (psi - prefix[i])) ** 2)
            for i in range(1, L)
        )
        deviation_slack = sum(q_exp[: L - 1]) - lhs_dev
        pure_bound_slack = sequential_bound_rhs(q_exp, 1.0) - (1 - final)
    else:
        deviation_slack = 0.0
        pure_bound_slack = q_exp[0] - (1 - final)
    return LemmaResiduals(
        left_telescope=float(left_telescope),
        right_telescope=float(right_telescope),
        sandwich_telescope=float(sandwich_telescope),
        cauchy_schwarz_slack=float(cauchy_schwarz_slack),
        deviation_slack=float(deviation_slack),
        pure_bound_slack=float(pure_bound_slack),
    )
