"""Exact simulation of position-based coding with a sequential decoder.

Alice and Bob share ``M`` copies of ``rho_RA``; to send message ``m`` Alice
pushes the ``m``-th ``A`` system through the channel. Bob holds
``R_1 ... R_M B`` and asks, in order ``i = 1, 2, ...``, whether slot ``i``
carries the message, using the dilated binary test of ``Lambda_RB`` on
``R_i B``. He stops at the first "yes"; if no slot fires the round is an
error.

The default path traces each probe out right after its measurement
(two-Kraus updates on the system). :func:`sequential_decode_explicit` keeps
all probes and serves as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hypotest import DhBracket, dh_commuting_oracle, dh_epsilon
from .naimark import KET0, dilate
from .operators import (
    QuantumChannel,
    ValidationError,
    apply_channel,
    apply_kraus,
    apply_local,
    as_density,
    as_measurement,
    partial_trace,
    tensor,
)
from .second_order import RateBound, ea_rate_lower_bound, rate_penalty

DIM_CAP = 4096
BOUND_TOL = 1e-8


class PremiseError(ValueError):
    """The decoding test misses the type-I requirement ``Tr{(I - L) zeta} <= eps - eta``."""

    def __init__(self, message: str, slack: float):
        super().__init__(message)
        self.slack = slack


def default_c(eps: float, eta: float) -> float:
    return eta / (2 * eps - eta)


@dataclass
class CodingScenario:
    channel: QuantumChannel
    resource: np.ndarray
    dims: tuple[int, int]  # (d_R, d_A)
    M: int
    eps: float
    eta: float
    c: float | None = None
    cap: int = DIM_CAP

    zeta_rb: np.ndarray = field(init=False, repr=False)
    rho_r: np.ndarray = field(init=False, repr=False)
    channel_out: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.eta < self.eps < 1.0:
            raise ValidationError(f"need 0 < eta < eps < 1, got eps={self.eps}, eta={self.eta}")
        if self.M < 1:
            raise ValidationError("M must be at least 1")
        if self.c is None:
            self.c = default_c(self.eps, self.eta)
        if not self.c > 0:
            raise ValidationError("c must be positive")
        d_r, d_a = (int(x) for x in self.dims)
        self.dims = (d_r, d_a)
        self.resource = as_density(self.resource)
        if d_r * d_a != self.resource.shape[0]:
            raise ValidationError(f"dims {self.dims} do not match resource dim {self.resource.shape[0]}")
        if self.channel.dim_in != d_a:
            raise ValidationError(f"channel input dim {self.channel.dim_in} != d_A = {d_a}")
        total = d_r**self.M * self.d_b
        if total > self.cap:
            raise ValidationError(f"Bob's space has dim {total} > cap {self.cap}")
        self.zeta_rb = apply_channel(self.channel, self.resource, 1, [d_r, d_a])
        self.rho_r = partial_trace(self.resource, [d_r, d_a], [0])
        rho_a = partial_trace(self.resource, [d_r, d_a], [1])
        self.channel_out = apply_channel(self.channel, rho_a)

    @property
    def d_r(self) -> int:
        return self.dims[0]

    @property
    def d_b(self) -> int:
        return self.channel.dim_out

    @property
    def bob_dims(self) -> list[int]:
        return [self.d_r] * self.M + [self.d_b]

    @property
    def product_rb(self) -> np.ndarray:
        """``rho_R (x) N(rho_A)``, the state of ``R_i B`` for ``i != m``."""
        return tensor(self.rho_r, self.channel_out)


def permute_subsystems(op: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems: output subsystem ``k`` is input subsystem ``perm[k]``."""
    dims = list(dims)
    n = len(dims)
    t = op.reshape(dims + dims)
    t = np.transpose(t, list(perm) + [p + n for p in perm])
    d = op.shape[0]
    return t.reshape(d, d)


def bob_marginal(scenario: CodingScenario, m: int) -> np.ndarray:
    """``rho_R1 (x) ... (x) zeta_{R_m B} (x) ... (x) rho_RM`` ordered as ``R_1..R_M B``."""
    M = scenario.M
    if not 1 <= m <= M:
        raise ValidationError(f"message index {m} outside 1..{M}")
    # build in order (R_m, B, other R's) and move into place
    state = tensor(scenario.zeta_rb, *([scenario.rho_r] * (M - 1)))
    src = [0, 1] + list(range(2, M + 1))
    slots = [m - 1, M] + [i for i in range(M) if i != m - 1]
    order = [0] * (M + 1)
    for s, slot in zip(src, slots):
        order[slot] = s
    src_dims = [scenario.d_r, scenario.d_b] + [scenario.d_r] * (M - 1)
    return permute_subsystems(state, src_dims, order)


@dataclass(frozen=True)
class DecodingRow:
    """Outcome probabilities when message ``m`` was sent.

    ``outcomes[i]`` is the probability that the decoder first fires at slot
    ``i + 1``; ``outcomes[M]`` is the probability that it never fires.
    """

    m: int
    outcomes: np.ndarray

    @property
    def success(self) -> float:
        return float(self.outcomes[self.m - 1])

    @property
    def error(self) -> float:
        return 1.0 - self.success


def check_premise(scenario: CodingScenario, lam: np.ndarray) -> float:
    """Returns ``Tr{(I - lam) zeta_RB}``; raises :class:`PremiseError` if it exceeds ``eps - eta``."""
    type1 = float(np.trace((np.eye(lam.shape[0]) - lam) @ scenario.zeta_rb).real)
    slack = scenario.eps - scenario.eta - type1
    if slack < -1e-9:
        raise PremiseError(
            f"Tr{{(I - Lambda) zeta}} = {type1:.6g} exceeds eps - eta = {scenario.eps - scenario.eta:.6g}",
            slack,
        )
    return type1


def _check_test(scenario: CodingScenario, lam) -> np.ndarray:
    lam = as_measurement(lam)
    if lam.shape[0] != scenario.d_r * scenario.d_b:
        raise ValidationError(f"Lambda has dim {lam.shape[0]}, expected d_R * d_B = {scenario.d_r * scenario.d_b}")
    return lam


def sequential_decode(scenario: CodingScenario, lam, m_true: int, check: bool = True) -> DecodingRow:
    lam = _check_test(scenario, lam)
    if check:
        check_premise(scenario, lam)
    dil = dilate(lam)
    no_kraus = list(dil.no_kraus())
    M = scenario.M
    dims = scenario.bob_dims
    x = bob_marginal(scenario, m_true)
    outcomes = np.zeros(M + 1)
    for i in range(M):
        targets = [i, M]
        outcomes[i] = float(np.trace(apply_local(dil.lam, x, dims, targets)).real)
        x, _ = apply_kraus(no_kraus, x, dims, targets)
    outcomes[M] = float(np.trace(x).real)
    return DecodingRow(m_true, outcomes)


def sequential_decode_explicit(scenario: CodingScenario, lam, m_true: int) -> DecodingRow:
    """Same statistics as :func:`sequential_decode`, keeping all ``M`` probes."""
    lam = _check_test(scenario, lam)
    dil = dilate(lam)
    M = scenario.M
    d_total = scenario.d_r**M * scenario.d_b * 2**M
    if d_total > scenario.cap:
        raise ValidationError(f"explicit-probe dim {d_total} > cap {scenario.cap}")
    dims = scenario.bob_dims + [2] * M
    x = tensor(bob_marginal(scenario, m_true), *([KET0] * M))
    outcomes = np.zeros(M + 1)
    for i in range(M):
        targets = [i, M, M + 1 + i]
        outcomes[i] = float(np.trace(apply_local(dil.pi, x, dims, targets)).real)
        x, _ = apply_kraus([dil.pi_hat], x, dims, targets)
    outcomes[M] = float(np.trace(x).real)
    return DecodingRow(m_true, outcomes)


@dataclass
class DecodingResult:
    per_message_error: list[float]
    analytic_bound: float
    outcome_distribution: list[list[float]]
    c: float
    beta: float
    type1_error: float
    info_bits: float
    union_rhs: list[float]

    @property
    def holds(self) -> bool:
        return all(p <= self.analytic_bound + BOUND_TOL for p in self.per_message_error)

    @property
    def max_error(self) -> float:
        return max(self.per_message_error)


def decoding_error_bound(eps: float, eta: float, c: float, M: int, beta: float) -> float:
    """``(1 + c)(eps - eta) + (2 + c + 1/c) M beta``."""
    return (1 + c) * (eps - eta) + (2 + c + 1 / c) * M * beta


def witness_test(scenario: CodingScenario) -> DhBracket:
    """Feasible test from the ``D_H^{eps - eta}`` bracket of ``zeta_RB`` against ``rho_R (x) N(rho_A)``."""
    return dh_epsilon(scenario.zeta_rb, scenario.product_rb, scenario.eps - scenario.eta)


def run_decoding_experiment(scenario: CodingScenario, lam=None) -> DecodingResult:
    if lam is None:
        lam = witness_test(scenario).witness
    lam = _check_test(scenario, lam)
    type1 = check_premise(scenario, lam)
    beta = float(np.trace(lam @ scenario.product_rb).real)
    c = float(scenario.c)
    rows = [sequential_decode(scenario, lam, m, check=False) for m in range(1, scenario.M + 1)]
    # per-message union-bound value: slot m has error type1, earlier slots fire with prob. beta
    union_rhs = [(1 + c) * type1 + (2 + c + 1 / c) * (m - 1) * beta for m in range(1, scenario.M + 1)]
    return DecodingResult(
        per_message_error=[r.error for r in rows],
        analytic_bound=decoding_error_bound(scenario.eps, scenario.eta, c, scenario.M, beta),
        outcome_distribution=[r.outcomes.tolist() for r in rows],
        c=c,
        beta=beta,
        type1_error=type1,
        info_bits=math.inf if beta <= 0 else -math.log2(beta),
        union_rhs=union_rhs,
    )


def message_count(info_bits: float, eps: float, eta: float) -> int:
    """``M = floor(2^(I - log2(4 eps / eta^2)))``, at least 1."""
    if not math.isfinite(info_bits):
        raise ValidationError("message count needs a finite information value")
    log2_m = info_bits - rate_penalty(eps, eta)
    return max(1, int(math.floor(2.0**log2_m + 1e-12)))


# -- classical-quantum resource ------------------------------------------------


@dataclass(frozen=True)
class CqRate:
    rate: RateBound
    info_bits: float
    method: str
    upper_bits: float


def _joint_diagonalize(ops: Sequence[np.ndarray], tol: float = 1e-10):
    """Common eigenbasis of commuting Hermitian operators, or ``None``."""
    for a in ops:
        for b in ops:
            if np.max(np.abs(a @ b - b @ a)) > tol:
                return None
    weights = [math.sqrt(2.0 + k) - math.floor(math.sqrt(2.0 + k)) + 0.1 * k for k in range(len(ops))]
    h = sum(w * a for w, a in zip(weights, ops))
    _, u = np.linalg.eigh(h)
    for a in ops:
        da = u.conj().T @ a @ u
        if np.max(np.abs(da - np.diag(np.diag(da)))) > 1e-9:
            return None
    return u


def cq_rate_point(rho_xa, dims: Sequence[int], channel: QuantumChannel, eps: float, eta: float) -> CqRate:
    """Unassisted rate ``I_H^{eps-eta}(X;B) - log2(4 eps / eta^2)`` for a block-diagonal resource."""
    rho_xa = as_density(rho_xa)
    d_x, d_a = int(dims[0]), int(dims[1])
    if d_x * d_a != rho_xa.shape[0]:
        raise ValidationError(f"dims {dims} do not match state dim {rho_xa.shape[0]}")
    blocks = rho_xa.reshape(d_x, d_a, d_x, d_a)
    for x in range(d_x):
        for y in range(d_x):
            if x != y and np.max(np.abs(blocks[x, :, y, :])) > 1e-9:
                raise ValidationError("resource is not block diagonal in the classical basis")
    e = eps - eta
    zeta = apply_channel(channel, rho_xa, 1, [d_x, d_a])
    d_b = channel.dim_out
    zb = zeta.reshape(d_x, d_b, d_x, d_b)
    px = [float(np.trace(blocks[x, :, x, :]).real) for x in range(d_x)]
    joint_blocks = [zb[x, :, x, :] for x in range(d_x)]
    zeta_b = sum(joint_blocks)
    u = _joint_diagonalize(joint_blocks + [zeta_b])
    if u is not None:
        lam = np.concatenate([np.diag(u.conj().T @ jb @ u).real for jb in joint_blocks])
        mu = np.concatenate([p * np.diag(u.conj().T @ zeta_b @ u).real for p in px])
        info = dh_commuting_oracle(np.clip(lam, 0, None), np.clip(mu, 0, None), e)
        upper = info
        method = "commuting"
    else:
        zx = np.diag(px).astype(complex)
        br = dh_epsilon(zeta, tensor(zx, zeta_b), e)
        info, upper, method = br.lower, br.upper, "bracket"
    return CqRate(ea_rate_lower_bound(info, eps, eta), info, method, upper)
