"""Seeded randomized campaigns behind the CLI and the acceptance suite.

Each campaign maps a trial index ``k`` to an independent Philox stream
``rng_for(seed, CAMPAIGN_ID, k)``, so rows are identical for any thread count.
Every campaign returns a :class:`CampaignResult` whose ``rows`` are plain
dicts ready for CSV output and whose ``violations`` hold full instances.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import coding_sim as cs
from .hypotest import (
    build_TL,
    dh_commuting_oracle,
    dh_epsilon,
    dvt,
    optimal_threshold_test,
    z_distribution,
)
from .instances import (
    haar_unitary,
    random_channel,
    random_commuting_pair,
    random_density,
    random_measurement,
    random_projector,
    random_pure_state,
    rng_for,
)
from .jsonio import channel_to_json, operator_to_json
from .naimark import dilate, povm_union_bound, probe_elision_residual, sequential_yes_probability
from .operators import (
    amplitude_damping_channel,
    depolarizing_channel,
    identity_channel,
    max_entangled,
    pure_density,
)
from .second_order import (
    NTooSmallError,
    dh_iid_binary,
    expansion_lower_bound,
    expansion_threshold_n,
    normal_approximation,
)
from .union_bound import C_GRID, VIOLATION_TOL, check_lemma_identities, optimal_c, verify_union_bound

UNION_DIMS = (2, 4, 8, 16, 32)
MAX_L = 8
EPS_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SECOND_ORDER_NS = (50, 100, 200, 500, 1000)
SECOND_ORDER_EPS = (0.1, 0.5, 0.9)

# stream identifiers, one per campaign
_UNION, _LEMMA, _NAIMARK, _POVM, _DH_COMM, _DH_GEN, _TL, _SECOND, _CODING = range(1, 10)


@dataclass
class CampaignResult:
    name: str
    rows: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def default_threads() -> int:
    return os.cpu_count() or 1


def ordered_map(fn: Callable, items: Iterable, threads: int | None = None) -> list:
    """``[fn(x) for x in items]`` evaluated on a thread pool, results in input order."""
    items = list(items)
    threads = threads or default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _state_json(state: np.ndarray) -> dict:
    if state.ndim == 1:
        return {"vector_re": state.real.tolist(), "vector_im": state.imag.tolist()}
    return operator_to_json(state)


# -- union bound ---------------------------------------------------------------


def _aligned_projector(ref: np.ndarray, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Rank-``rank`` projector whose range contains a small perturbation of ``ref``."""
    d = ref.size
    delta = 10.0 ** rng.uniform(-3.0, -0.3)
    g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    cols = [ref + delta * g / np.linalg.norm(g)]
    for _ in range(rank - 1):
        cols.append(rng.standard_normal(d) + 1j * rng.standard_normal(d))
    q, _ = np.linalg.qr(np.stack(cols, axis=1))
    return q @ q.conj().T


def union_instance(seed: int, k: int, dim: int | None = None, num_projectors: int | None = None, state_kind: str = "both"):
    """Trial ``k``: ``(state, projectors, meta)``.

    Half the trials use Haar-random projectors; the other half use projectors
    nearly aligned with the state so the individual errors are small.
    """
    rng = rng_for(seed, _UNION, k)
    d = dim or int(rng.choice(UNION_DIMS))
    L = num_projectors or int(rng.integers(2, MAX_L + 1))
    kind = state_kind if state_kind != "both" else ("pure" if k % 2 == 0 else "mixed")
    layout = "aligned" if rng.random() < 0.5 else "random"
    if kind == "pure":
        state = random_pure_state(d, rng)
        ref = state
    else:
        rank = int(rng.integers(1, d + 1))
        state = random_density(d, rank, rng)
        ref = np.linalg.eigh(state)[1][:, -1]
    projectors = []
    for _ in range(L):
        # rank d would be the identity, a measurement that never fails
        r = int(rng.integers(1, d))
        if layout == "aligned":
            projectors.append(_aligned_projector(ref, r, rng))
        else:
            projectors.append(random_projector(d, r, rng))
    return state, projectors, {"dim": d, "L": L, "state": kind, "layout": layout}


UNION_COLUMNS = ["trial", "dim", "L", "state", "layout", "c", "lhs"] + [f"a_{i}" for i in range(1, MAX_L + 1)] + [
    "rhs_ours",
    "rhs_gao",
    "rhs_sen",
    "c_star",
    "rhs_min",
    "slack",
    "holds",
]


def union_bound_campaign(
    seed: int,
    trials: int,
    threads: int | None = None,
    dim: int | None = None,
    num_projectors: int | None = None,
    state_kind: str = "both",
) -> CampaignResult:
    def trial(k):
        state, projectors, meta = union_instance(seed, k, dim, num_projectors, state_kind)
        grid = list(C_GRID)
        opt = None
        reports = []
        for c in grid:
            reports.append(verify_union_bound(state, projectors, c))
        opt = optimal_c(reports[0].a)
        if opt.c_star is not None and opt.branch == "interior":
            reports.append(verify_union_bound(state, projectors, opt.c_star))
        return k, state, projectors, meta, reports

    res = CampaignResult("union-bound")
    at_c1_ok = 0
    strict_improve = 0
    nonzero = 0
    for k, state, projectors, meta, reports in ordered_map(trial, range(trials), threads):
        for rep in reports:
            row = {"trial": k, **meta, "c": rep.c, "lhs": rep.lhs}
            row.update({f"a_{i + 1}": x for i, x in enumerate(rep.a)})
            row.update(
                rhs_ours=rep.rhs_ours,
                rhs_gao=rep.rhs_gao,
                rhs_sen=rep.rhs_sen,
                c_star=rep.c_star,
                rhs_min=rep.rhs_min,
                slack=rep.slack,
                holds=rep.holds,
            )
            res.rows.append(row)
            if not rep.holds:
                res.violations.append(
                    {
                        "campaign": "union-bound",
                        "trial": k,
                        "c": rep.c,
                        "lhs": rep.lhs,
                        "rhs": rep.rhs_ours,
                        "state": _state_json(state),
                        "projectors": [operator_to_json(p) for p in projectors],
                    }
                )
        rep1 = next(r for r in reports if r.c == 1.0)
        at_c1_ok += rep1.rhs_ours <= rep1.rhs_gao + VIOLATION_TOL
        if sum(rep1.a) > 1e-12:
            nonzero += 1
            strict_improve += min(r.rhs_ours for r in reports) < rep1.rhs_gao
    res.summary = {
        "instances": trials,
        "evaluations": len(res.rows),
        "violations": len(res.violations),
        "c1_not_above_gao": at_c1_ok,
        "nonzero_instances": nonzero,
        "strictly_below_gao": strict_improve,
    }
    return res


# -- proof identities ------------------------------------------------------------

LEMMA_COLUMNS = ["trial", "dim", "L", "left_telescope", "right_telescope", "sandwich_telescope", "cauchy_schwarz_slack", "deviation_slack", "pure_bound_slack", "ok"]


def lemma_campaign(seed: int, trials: int, threads: int | None = None, dim: int | None = None, num_projectors: int | None = None, tol: float = 1e-9) -> CampaignResult:
    def trial(k):
        psi, projectors, meta = union_instance(seed, k, dim, num_projectors, "pure")
        return k, psi, projectors, meta, check_lemma_identities(psi, projectors)

    res = CampaignResult("lemmas")
    for k, psi, projectors, meta, r in ordered_map(trial, range(trials), threads):
        ok = r.ok(tol)
        res.rows.append(
            {
                "trial": k,
                "dim": meta["dim"],
                "L": meta["L"],
                "left_telescope": r.left_telescope,
                "right_telescope": r.right_telescope,
                "sandwich_telescope": r.sandwich_telescope,
                "cauchy_schwarz_slack": r.cauchy_schwarz_slack,
                "deviation_slack": r.deviation_slack,
                "pure_bound_slack": r.pure_bound_slack,
                "ok": ok,
            }
        )
        if not ok:
            res.violations.append(
                {
                    "campaign": "lemmas",
                    "trial": k,
                    "residuals": res.rows[-1],
                    "state": _state_json(psi),
                    "projectors": [operator_to_json(p) for p in projectors],
                }
            )
    res.summary = {
        "instances": trials,
        "violations": len(res.violations),
        "max_identity_residual": max((max(r["left_telescope"], r["right_telescope"], r["sandwich_telescope"]) for r in res.rows), default=0.0),
        "min_inequality_slack": min((min(r["cauchy_schwarz_slack"], r["deviation_slack"]) for r in res.rows), default=0.0),
    }
    return res


# -- Naimark dilation --------------------------------------------------------------

NAIMARK_COLUMNS = ["trial", "dim", "prob_gap", "elision_residual", "ok"]
POVM_COLUMNS = ["trial", "dim", "L", "c", "lhs", "rhs_ours", "slack", "elided_gap", "holds"]


def naimark_campaign(seed: int, trials: int, threads: int | None = None, tol: float = 1e-8) -> CampaignResult:
    """Probability preservation and probe elision on random ``(Lambda, rho)``."""

    def trial(k):
        rng = rng_for(seed, _NAIMARK, k)
        d = int(rng.integers(2, 9))
        lam = random_measurement(d, rng)
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        dil = dilate(lam)
        gap = abs(dil.probability(rho) - float(np.trace(dil.lam @ rho).real))
        return k, d, lam, rho, gap, probe_elision_residual(dil, rho)

    res = CampaignResult("naimark")
    for k, d, lam, rho, gap, resid in ordered_map(trial, range(trials), threads):
        ok = gap <= tol and resid <= tol
        res.rows.append({"trial": k, "dim": d, "prob_gap": gap, "elision_residual": resid, "ok": ok})
        if not ok:
            res.violations.append(
                {"campaign": "naimark", "trial": k, "lambda": operator_to_json(lam), "rho": operator_to_json(rho)}
            )
    res.summary = {
        "instances": trials,
        "violations": len(res.violations),
        "max_prob_gap": max((r["prob_gap"] for r in res.rows), default=0.0),
        "max_elision_residual": max((r["elision_residual"] for r in res.rows), default=0.0),
    }
    return res


def povm_campaign(seed: int, trials: int, threads: int | None = None, dim: int | None = None, num_ops: int | None = None) -> CampaignResult:
    """Union bound for random measurement-operator chains through their dilations."""

    def trial(k):
        rng = rng_for(seed, _POVM, k)
        d = dim or int(rng.integers(2, 9))
        L = num_ops or int(rng.integers(2, 6))
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        lambdas = []
        for _ in range(L):
            if rng.random() < 0.5:
                lambdas.append(random_measurement(d, rng))
            else:
                # close to the identity so the errors are small
                u = haar_unitary(d, rng)
                w = 1.0 - 10.0 ** rng.uniform(-3.0, -0.5, size=d)
                lambdas.append((u * w) @ u.conj().T)
        c = float(rng.choice(C_GRID))
        rep = povm_union_bound(rho, lambdas, c)
        elided = float(np.trace(rho).real) - sequential_yes_probability(rho, [dilate(x) for x in lambdas])
        return k, d, L, rho, lambdas, rep, abs(elided - rep.lhs)

    res = CampaignResult("povm-bound")
    for k, d, L, rho, lambdas, rep, gap in ordered_map(trial, range(trials), threads):
        ok = rep.holds and gap <= 1e-8
        res.rows.append(
            {
                "trial": k,
                "dim": d,
                "L": L,
                "c": rep.c,
                "lhs": rep.lhs,
                "rhs_ours": rep.rhs_ours,
                "slack": rep.slack,
                "elided_gap": gap,
                "holds": ok,
            }
        )
        if not ok:
            res.violations.append(
                {
                    "campaign": "povm-bound",
                    "trial": k,
                    "c": rep.c,
                    "rho": operator_to_json(rho),
                    "lambdas": [operator_to_json(x) for x in lambdas],
                }
            )
    res.summary = {
        "instances": trials,
        "violations": len(res.violations),
        "min_slack": min((r["slack"] for r in res.rows), default=0.0),
        "max_elided_gap": max((r["elided_gap"] for r in res.rows), default=0.0),
    }
    return res


# -- hypothesis testing --------------------------------------------------------------

DH_COLUMNS = ["trial", "kind", "dim", "eps", "lower", "upper", "width", "oracle", "oracle_gap", "type1_success", "feasibility_gap", "ok"]


def _witness_feasibility(witness: np.ndarray, rho: np.ndarray, eps: float) -> float:
    """Largest violation of ``0 <= L <= I`` and ``Tr{L rho} >= 1 - eps`` (0 when feasible)."""
    w = np.linalg.eigvalsh(0.5 * (witness + witness.conj().T))
    succ = float(np.trace(witness @ rho).real)
    return max(0.0, -w[0], w[-1] - 1.0, (1.0 - eps) - succ)


def dh_commuting_instance(seed: int, k: int, max_dim: int = 16):
    """Trial ``k`` of the commuting part: ``(d, eps, rho, sigma, lam, mu)``."""
    rng = rng_for(seed, _DH_COMM, k)
    d = int(rng.integers(2, max_dim + 1))
    eps = float(rng.choice(EPS_GRID))
    rho, sigma, lam, mu = random_commuting_pair(d, rng)
    return d, eps, rho, sigma, lam, mu


def dh_campaign(seed: int, trials: int, threads: int | None = None, max_dim: int = 16) -> CampaignResult:
    """Commuting pairs against the fractional-knapsack oracle; general pairs for the sandwich."""

    def trial(k):
        d, eps, rho, sigma, lam, mu = dh_commuting_instance(seed, k, max_dim)
        out = []
        br = dh_epsilon(rho, sigma, eps)
        oracle = dh_commuting_oracle(lam, mu, eps)
        out.append(("commuting", d, eps, rho, sigma, br, oracle))
        rng2 = rng_for(seed, _DH_GEN, k)
        d2 = int(rng2.integers(2, max_dim + 1))
        rho2 = random_density(d2, int(rng2.integers(1, d2 + 1)), rng2)
        sigma2 = random_density(d2, d2, rng2)
        out.append(("general", d2, eps, rho2, sigma2, dh_epsilon(rho2, sigma2, eps), None))
        same = dh_epsilon(sigma2, sigma2, eps)
        out.append(("equal", d2, eps, sigma2, sigma2, same, -math.log2(1.0 - eps)))
        return k, out

    res = CampaignResult("dh")
    worst = {"commuting_gap": 0.0, "commuting_width": 0.0, "general_width": 0.0, "feasibility": 0.0, "equal_gap": 0.0}
    for k, items in ordered_map(trial, range(trials), threads):
        for kind, d, eps, rho, sigma, br, oracle in items:
            feas = _witness_feasibility(br.witness, rho, eps)
            gap = abs(br.lower - oracle) if oracle is not None else None
            if kind == "commuting":
                ok = gap <= 1e-6 and br.width <= 1e-4
                worst["commuting_gap"] = max(worst["commuting_gap"], gap)
                worst["commuting_width"] = max(worst["commuting_width"], br.width)
            elif kind == "equal":
                ok = gap <= 1e-9
                worst["equal_gap"] = max(worst["equal_gap"], gap)
            else:
                ok = br.lower <= br.upper + 1e-9
                worst["general_width"] = max(worst["general_width"], br.width)
            ok = ok and feas <= 1e-9
            worst["feasibility"] = max(worst["feasibility"], feas)
            res.rows.append(
                {
                    "trial": k,
                    "kind": kind,
                    "dim": d,
                    "eps": eps,
                    "lower": br.lower,
                    "upper": br.upper,
                    "width": br.width,
                    "oracle": oracle,
                    "oracle_gap": gap,
                    "type1_success": br.type1_success,
                    "feasibility_gap": feas,
                    "ok": ok,
                }
            )
            if not ok:
                res.violations.append(
                    {
                        "campaign": "dh",
                        "trial": k,
                        "kind": kind,
                        "eps": eps,
                        "rho": operator_to_json(rho),
                        "sigma": operator_to_json(sigma),
                    }
                )
    res.summary = {"instances": trials, "violations": len(res.violations), **worst}
    return res


TL_COLUMNS = ["trial", "dim", "commuting", "thresh", "prob_z", "tr_rho", "tr_sigma", "rho_ok", "sigma_ok", "holds", "opt_tr_rho", "opt_tr_sigma", "exists"]


def tl_instance(seed: int, k: int, max_dim: int = 16):
    rng = rng_for(seed, _TL, k)
    d = int(rng.integers(2, max_dim + 1))
    commuting = rng.random() < 0.3
    if commuting:
        rho, sigma, _, _ = random_commuting_pair(d, rng)
    else:
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        sigma = random_density(d, d, rng)
    dist = z_distribution(rho, sigma)
    # threshold drawn inside the support of Z so both branches are exercised
    lo, hi = float(dist.z.min()), float(dist.z.max())
    thresh = 2.0 ** rng.uniform(lo - 0.5, hi + 0.5)
    return rho, sigma, thresh, commuting


def tl_campaign(seed: int, trials: int, threads: int | None = None, max_dim: int = 16) -> CampaignResult:
    """Checks the two trace inequalities of the likelihood-ratio test projector.

    ``holds`` is the constructed projector's verdict. ``exists`` says whether
    the optimal test at type-I error ``1 - prob_z`` meets both inequalities.
    """

    def trial(k):
        rho, sigma, thresh, commuting = tl_instance(seed, k, max_dim)
        tl = build_TL(rho, sigma, thresh)
        _, opt_rho, opt_sigma, _ = optimal_threshold_test(rho, sigma, thresh)
        return k, rho, sigma, commuting, tl, opt_rho, opt_sigma

    res = CampaignResult("tl-check")
    exists = 0
    for k, rho, sigma, commuting, tl, opt_rho, opt_sigma in ordered_map(trial, range(trials), threads):
        ex = opt_rho >= tl.prob_z - 1e-8 and opt_sigma <= 1.0 / tl.thresh + 1e-8
        exists += ex
        res.rows.append(
            {
                "trial": k,
                "dim": rho.shape[0],
                "commuting": commuting,
                "thresh": tl.thresh,
                "prob_z": tl.prob_z,
                "tr_rho": tl.tr_rho,
                "tr_sigma": tl.tr_sigma,
                "rho_ok": tl.rho_ok,
                "sigma_ok": tl.sigma_ok,
                "holds": tl.holds,
                "opt_tr_rho": opt_rho,
                "opt_tr_sigma": opt_sigma,
                "exists": ex,
            }
        )
        if not tl.holds:
            res.violations.append(
                {
                    "campaign": "tl-check",
                    "trial": k,
                    "thresh": tl.thresh,
                    "tr_rho": tl.tr_rho,
                    "tr_sigma": tl.tr_sigma,
                    "prob_z": tl.prob_z,
                    "rho": operator_to_json(rho),
                    "sigma": operator_to_json(sigma),
                }
            )
    rows = res.rows
    res.summary = {
        "instances": trials,
        "violations": len(res.violations),
        "rho_failures": sum(not r["rho_ok"] for r in rows),
        "sigma_failures": sum(not r["sigma_ok"] for r in rows),
        "commuting_failures": sum((not r["holds"]) and r["commuting"] for r in rows),
        "optimal_test_exists": exists,
    }
    return res


# -- second order ------------------------------------------------------------------

SECOND_ORDER_COLUMNS = [
    "pair",
    "p",
    "q",
    "n",
    "eps",
    "D",
    "V",
    "T",
    "exact",
    "expansion",
    "n_min",
    "normal",
    "band_gap",
    "band",
    "bound_ok",
    "band_ok",
]


def binary_pair(seed: int, k: int) -> tuple[float, float]:
    rng = rng_for(seed, _SECOND, k)
    while True:
        p, q = rng.uniform(0.02, 0.98, size=2)
        if abs(p - q) > 0.02:
            return float(p), float(q)


def second_order_campaign(
    seed: int,
    pairs: int = 50,
    threads: int | None = None,
    ns: Sequence[int] = SECOND_ORDER_NS,
    eps_grid: Sequence[float] = SECOND_ORDER_EPS,
) -> CampaignResult:
    """Exact i.i.d. ``D_H^eps`` of commuting qubit pairs against the expansion bound."""
    points = [(k, n, eps) for k in range(pairs) for n in ns for eps in eps_grid]

    def trial(point):
        k, n, eps = point
        p, q = binary_pair(seed, k)
        lam, mu = np.array([p, 1 - p]), np.array([q, 1 - q])
        triple = dvt(np.diag(lam), np.diag(mu))
        exact = dh_iid_binary(lam, mu, n, eps)
        try:
            bound = expansion_lower_bound(n, eps, triple)
            n_min = None
        except NTooSmallError as exc:
            bound, n_min = None, exc.n_min
        return k, p, q, n, eps, triple, exact, bound, n_min

    res = CampaignResult("second-order")
    for k, p, q, n, eps, triple, exact, bound, n_min in ordered_map(trial, points, threads):
        normal = normal_approximation(n, eps, triple)
        band = 10.0 * math.log2(n)
        bound_ok = bound is None or bound <= exact + 1e-6
        band_ok = abs(exact - normal) <= band
        res.rows.append(
            {
                "pair": k,
                "p": p,
                "q": q,
                "n": n,
                "eps": eps,
                "D": triple.D,
                "V": triple.V,
                "T": triple.T,
                "exact": exact,
                "expansion": bound,
                "n_min": n_min if n_min is not None else expansion_threshold_n(eps, triple),
                "normal": normal,
                "band_gap": abs(exact - normal),
                "band": band,
                "bound_ok": bound_ok,
                "band_ok": band_ok,
            }
        )
        if not (bound_ok and band_ok):
            res.violations.append({"campaign": "second-order", **res.rows[-1]})
    rows = res.rows
    res.summary = {
        "points": len(rows),
        "points_with_bound": sum(r["expansion"] is not None for r in rows),
        "bound_failures": sum(not r["bound_ok"] for r in rows),
        "band_failures": sum(not r["band_ok"] for r in rows),
        "max_band_gap": max((r["band_gap"] for r in rows), default=0.0),
        "violations": len(res.violations),
    }
    return res


# -- position-based coding ------------------------------------------------------------

CODING_COLUMNS = [
    "scenario",
    "channel",
    "resource",
    "d",
    "M",
    "M_rule",
    "eps",
    "eta",
    "c",
    "beta",
    "info_bits",
    "type1_error",
    "bound",
    "max_error",
    "explicit_gap",
    "completeness_gap",
    "holds",
    "below_eps",
]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    channel: str
    resource: str
    d: int
    M: int | None  # None: set from the message-count rule
    eps: float
    eta: float


_EPS_ETA = ((0.5, 0.2), (0.3, 0.1), (0.9, 0.5))


def default_scenarios() -> list[ScenarioSpec]:
    """Qubit scenarios with fixed ``M`` in 2..4 and with the rule-derived ``M``,
    plus ququart scenarios where the rule yields ``M >= 2``."""
    specs = []
    channels = ("identity", "depolarizing-0.1", "depolarizing-0.4", "amplitude-damping-0.3", "random")
    resources = ("bell", "random-pure", "random-mixed")
    i = 0
    # 5 and 3 are coprime, so the first 15 cover every channel/resource pair
    for j in range(24):
        eps, eta = _EPS_ETA[(j // 3) % len(_EPS_ETA)]
        specs.append(ScenarioSpec(f"q{i:02d}", channels[j % 5], resources[j % 3], 2, 2 + j % 3, eps, eta))
        i += 1
    for ch in channels:
        for res in ("bell", "random-pure"):
            specs.append(ScenarioSpec(f"q{i:02d}", ch, res, 2, None, 0.9, 0.5))
            i += 1
    for ch in ("identity", "depolarizing-0.05"):
        specs.append(ScenarioSpec(f"u{i:02d}", ch, "bell", 4, None, 0.9, 0.85))
        i += 1
    return specs


def _make_channel(name: str, d: int, rng: np.random.Generator):
    if name == "identity":
        return identity_channel(d)
    if name.startswith("depolarizing-"):
        return depolarizing_channel(d, float(name.split("-")[1]))
    if name.startswith("amplitude-damping-"):
        return amplitude_damping_channel(float(name.rsplit("-", 1)[1]))
    if name == "random":
        return random_channel(d, d, 3, rng)
    raise ValueError(f"unknown channel {name!r}")


def _make_resource(name: str, d: int, rng: np.random.Generator) -> np.ndarray:
    if name == "bell":
        return pure_density(max_entangled(d))
    if name == "random-pure":
        return pure_density(random_pure_state(d * d, rng))
    if name == "random-mixed":
        return random_density(d * d, 2, rng)
    raise ValueError(f"unknown resource {name!r}")


def build_scenario(spec: ScenarioSpec, seed: int, k: int) -> cs.CodingScenario:
    rng = rng_for(seed, _CODING, k)
    channel = _make_channel(spec.channel, spec.d, rng)
    resource = _make_resource(spec.resource, spec.d, rng)
    M = spec.M
    if M is None:
        probe = cs.CodingScenario(channel, resource, (spec.d, spec.d), 1, spec.eps, spec.eta)
        M = cs.message_count(cs.witness_test(probe).lower, spec.eps, spec.eta)
    return cs.CodingScenario(channel, resource, (spec.d, spec.d), M, spec.eps, spec.eta)


def scenario_row(name: str, spec_fields: dict, sc: cs.CodingScenario, result: cs.DecodingResult, lam: np.ndarray, rule: bool) -> dict:
    explicit_gap = None
    if sc.d_r**sc.M * sc.d_b * 2**sc.M <= sc.cap:
        explicit = [cs.sequential_decode_explicit(sc, lam, m).outcomes for m in range(1, sc.M + 1)]
        explicit_gap = float(np.max(np.abs(np.array(explicit) - np.array(result.outcome_distribution))))
    completeness = max(abs(sum(o) - 1.0) for o in result.outcome_distribution)
    return {
        "scenario": name,
        **spec_fields,
        "M": sc.M,
        "M_rule": rule,
        "eps": sc.eps,
        "eta": sc.eta,
        "c": result.c,
        "beta": result.beta,
        "info_bits": result.info_bits,
        "type1_error": result.type1_error,
        "bound": result.analytic_bound,
        "max_error": result.max_error,
        "explicit_gap": explicit_gap,
        "completeness_gap": completeness,
        "holds": result.holds,
        "below_eps": result.max_error <= sc.eps + cs.BOUND_TOL,
    }


def coding_campaign(seed: int, threads: int | None = None, specs: Sequence[ScenarioSpec] | None = None) -> CampaignResult:
    specs = list(specs) if specs is not None else default_scenarios()

    def trial(k):
        spec = specs[k]
        sc = build_scenario(spec, seed, k)
        lam = cs.witness_test(sc).witness
        result = cs.run_decoding_experiment(sc, lam)
        fields = {"channel": spec.channel, "resource": spec.resource, "d": spec.d}
        return spec, sc, result, scenario_row(spec.name, fields, sc, result, lam, spec.M is None)

    res = CampaignResult("simulate-decoding")
    for spec, sc, result, row in ordered_map(trial, range(len(specs)), threads):
        res.rows.append(row)
        bad = (
            not row["holds"]
            or (row["M_rule"] and not row["below_eps"])
            or row["completeness_gap"] > 1e-8
            or (row["explicit_gap"] is not None and row["explicit_gap"] > 1e-8)
        )
        if bad:
            res.violations.append(
                {
                    "campaign": "simulate-decoding",
                    "scenario": spec.name,
                    "row": row,
                    "channel": channel_to_json(sc.channel),
                    "resource": operator_to_json(sc.resource),
                    "per_message_error": result.per_message_error,
                }
            )
    rows = res.rows
    res.summary = {
        "scenarios": len(rows),
        "violations": len(res.violations),
        "fixed_M_scenarios": sum(not r["M_rule"] for r in rows),
        "rule_M_scenarios": sum(r["M_rule"] for r in rows),
        "rule_M_values": sorted({r["M"] for r in rows if r["M_rule"]}),
    }
    return res
