"""Command-line front end: ``qunion <subcommand> [flags]``.

Every run writes its data files and a ``<command>.manifest.json`` into
``--out-dir``. Exit codes: 0 success, 1 usage or input error, 2 when an
invariant is falsified (the counterexample path is printed on stderr).
Settings come from flags, then ``--config`` JSON, then defaults.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import campaigns as cp
from . import coding_sim as cs
from .hypotest import DvtTriple, build_TL, dh_epsilon, dvt, optimal_threshold_test, mutual_information_quantities
from .jsonio import channel_from_json, dumps, fmt, load_channel, load_operator, operator_from_json, operator_to_json
from .operators import ValidationError, apply_channel
from .second_order import (
    NTooSmallError,
    ea_rate_lower_bound,
    ea_second_order_rate,
    expansion_lower_bound,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- output helpers --------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def csv_text(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


class Run:
    """Collects output files and writes the manifest at the end."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
        self.seed = args.seed
        self.started = datetime.now(timezone.utc).isoformat()
        self.outputs: dict[str, str] = {}

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.outputs[name] = hashlib.sha256(data).hexdigest()
        return path

    def counterexamples(self, violations: list[dict]) -> Path | None:
        if not violations:
            return None
        return self.write(f"{self.command}.counterexamples.json", dumps(violations))

    def finish(self, summary: dict | None = None) -> Path:
        manifest = {
            "command": self.command,
            "version": __version__,
            "master_seed": self.seed,
            "config": self.config,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": self.outputs,
        }
        if summary is not None:
            manifest["summary"] = summary
        path = self.out_dir / f"{self.command}.manifest.json"
        path.write_text(dumps(manifest), encoding="utf-8")
        return path


def _finish_campaign(run: Run, res: cp.CampaignResult, columns: Sequence[str], stem: str) -> int:
    run.write(f"{stem}.csv", csv_text(res.rows, columns))
    run.write(f"{stem}.summary.json", dumps(res.summary))
    bad = run.counterexamples(res.violations)
    run.finish(res.summary)
    if bad is not None:
        print(f"{len(res.violations)} violation(s); counterexamples written to {bad}", file=sys.stderr)
        return 2
    return 0


def _parse_triple(text: str) -> DvtTriple:
    try:
        d, v, t = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--triple expects D,V,T, got {text!r}") from exc
    return DvtTriple(d, v, t)


def _parse_range(text: str) -> list[int]:
    try:
        a, b, step = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--n-range expects a:b:step, got {text!r}") from exc
    if step <= 0 or a < 1 or b < a:
        raise UsageError(f"--n-range {text!r} must satisfy 1 <= a <= b and step > 0")
    return list(range(a, b + 1, step))


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--dims expects a,b, got {text!r}") from exc
    return a, b


# -- subcommands -----------------------------------------------------------------


def cmd_verify_union_bound(args) -> int:
    run = Run("verify-union-bound", args)
    res = cp.union_bound_campaign(args.seed, args.trials, args.threads, args.dim, args.num_projectors, args.state)
    return _finish_campaign(run, res, cp.UNION_COLUMNS, "union_bound")


def cmd_verify_lemmas(args) -> int:
    run = Run("verify-lemmas", args)
    res = cp.lemma_campaign(args.seed, args.trials, args.threads, args.dim, args.num_projectors)
    return _finish_campaign(run, res, cp.LEMMA_COLUMNS, "lemmas")


def cmd_povm_bound(args) -> int:
    run = Run("povm-bound", args)
    nm = cp.naimark_campaign(args.seed, args.trials, args.threads)
    pv = cp.povm_campaign(args.seed, args.trials, args.threads, args.dim, args.num_ops)
    run.write("naimark.csv", csv_text(nm.rows, cp.NAIMARK_COLUMNS))
    res = cp.CampaignResult("povm-bound", pv.rows, nm.violations + pv.violations, {"dilation": nm.summary, "chains": pv.summary})
    return _finish_campaign(run, res, cp.POVM_COLUMNS, "povm_bound")


def cmd_dh(args) -> int:
    run = Run("dh", args)
    if args.random_trials:
        res = cp.dh_campaign(args.seed, args.random_trials, args.threads, args.max_dim)
        return _finish_campaign(run, res, cp.DH_COLUMNS, "dh_campaign")
    if args.rho is None or args.sigma is None or args.eps is None:
        raise UsageError("dh needs --rho, --sigma and --eps (or --random-trials)")
    br = dh_epsilon(load_operator(args.rho), load_operator(args.sigma), args.eps)
    witness_path = run.write("dh_witness.json", dumps(operator_to_json(br.witness)))
    out = {
        "eps": br.eps,
        "lower": br.lower,
        "upper": br.upper,
        "width": br.width,
        "t": br.t,
        "type1_success": br.type1_success,
        "type2": br.type2,
        "witness_path": witness_path.name,
    }
    run.write("dh.json", dumps(out))
    run.finish()
    return 0


def cmd_dvt(args) -> int:
    run = Run("dvt", args)
    t = dvt(load_operator(args.rho), load_operator(args.sigma))
    run.write("dvt.json", dumps({"D": t.D, "V": t.V, "T": t.T}))
    run.finish()
    return 0


def cmd_tl_check(args) -> int:
    run = Run("tl-check", args)
    if args.random_trials:
        res = cp.tl_campaign(args.seed, args.random_trials, args.threads, args.max_dim)
        return _finish_campaign(run, res, cp.TL_COLUMNS, "tl_campaign")
    if args.rho is None or args.sigma is None or args.thresh is None:
        raise UsageError("tl-check needs --rho, --sigma and --thresh (or --random-trials)")
    rho, sigma = load_operator(args.rho), load_operator(args.sigma)
    tl = build_TL(rho, sigma, args.thresh)
    _, opt_rho, opt_sigma, _ = optimal_threshold_test(rho, sigma, args.thresh)
    out = {
        "thresh": tl.thresh,
        "prob_z": tl.prob_z,
        "tr_rho": tl.tr_rho,
        "tr_sigma": tl.tr_sigma,
        "rho_ok": tl.rho_ok,
        "sigma_ok": tl.sigma_ok,
        "holds": tl.holds,
        "optimal_test_tr_rho": opt_rho,
        "optimal_test_tr_sigma": opt_sigma,
        "T": operator_to_json(tl.T),
    }
    run.write("tl_check.json", dumps(out))
    violations = [] if tl.holds else [{"campaign": "tl-check", **{k: v for k, v in out.items() if k != "T"}}]
    bad = run.counterexamples(violations)
    run.finish()
    if bad is not None:
        print(f"trace inequality violated; counterexample written to {bad}", file=sys.stderr)
        return 2
    return 0


SECOND_ORDER_CURVE_COLUMNS = ["n", "lower_bound_bits", "per_use_rate"]


def cmd_second_order(args) -> int:
    run = Run("second-order", args)
    if args.sweep_pairs:
        res = cp.second_order_campaign(args.seed, args.sweep_pairs, args.threads)
        return _finish_campaign(run, res, cp.SECOND_ORDER_COLUMNS, "second_order_sweep")
    if args.triple is None or args.eps is None or args.n_range is None:
        raise UsageError("second-order needs --triple, --eps and --n-range (or --sweep-pairs)")
    triple = _parse_triple(args.triple)
    rows = []
    for n in _parse_range(args.n_range):
        try:
            bound = expansion_lower_bound(n, args.eps, triple)
            rows.append({"n": n, "lower_bound_bits": bound, "per_use_rate": bound / n})
        except NTooSmallError:
            # below the threshold the expansion says nothing; keep the row, leave values empty
            rows.append({"n": n, "lower_bound_bits": None, "per_use_rate": None})
    run.write("second_order.csv", csv_text(rows, SECOND_ORDER_CURVE_COLUMNS))
    run.finish()
    return 0


def cmd_rate(args) -> int:
    run = Run("rate", args)
    if args.eps is None:
        raise UsageError("rate needs --eps")
    out: dict = {"mode": args.mode, "eps": args.eps}
    if args.mode == "ea" and args.triple is not None:
        if args.n is None:
            raise UsageError("rate --triple needs --n")
        rb = ea_second_order_rate(_parse_triple(args.triple), args.n, args.eps)
        out["method"] = "second-order"
    elif args.mode == "ea" and args.info_bits is not None:
        if args.eta is None:
            raise UsageError("rate --info-bits needs --eta")
        rb = ea_rate_lower_bound(args.info_bits, args.eps, args.eta)
        out["method"] = "given"
    else:
        if args.state is None or args.channel is None or args.dims is None or args.eta is None:
            raise UsageError("rate needs --state, --dims, --channel and --eta (or --info-bits / --triple for ea)")
        state = load_operator(args.state)
        channel = load_channel(args.channel)
        dims = _parse_dims(args.dims)
        if args.mode == "unassisted":
            cq = cs.cq_rate_point(state, dims, channel, args.eps, args.eta)
            rb = cq.rate
            out.update(method=cq.method, info_upper_bits=cq.upper_bits)
        else:
            zeta = apply_channel(channel, state, 1, list(dims))
            mi = mutual_information_quantities(zeta, (dims[0], channel.dim_out))
            br = mi.hypothesis_testing(args.eps - args.eta)
            rb = ea_rate_lower_bound(br.lower, args.eps, args.eta)
            out.update(method="bracket", info_upper_bits=br.upper)
    out.update(
        n=rb.n,
        eta=rb.eta,
        info_bits=rb.info_bits,
        penalty_bits=rb.penalty_bits,
        rate_bits_per_use=rb.rate_bits_per_use,
        log2_messages=rb.log2_messages,
    )
    run.write("rate.json", dumps(out))
    run.finish()
    return 0


def _scenario_from_json(obj: dict) -> tuple[cs.CodingScenario, np.ndarray | None]:
    try:
        channel = channel_from_json(obj["channel"])
        resource = operator_from_json(obj["resource"])
        dims = tuple(int(x) for x in obj["dims"])
        sc = cs.CodingScenario(
            channel,
            resource,
            dims,
            int(obj["M"]),
            float(obj["eps"]),
            float(obj["eta"]),
            None if obj.get("c") is None else float(obj["c"]),
        )
    except KeyError as exc:
        raise ValidationError(f"scenario JSON is missing {exc}") from exc
    lam = operator_from_json(obj["lambda"]) if obj.get("lambda") is not None else None
    return sc, lam


def cmd_simulate_decoding(args) -> int:
    run = Run("simulate-decoding", args)
    if args.scenario is None:
        res = cp.coding_campaign(args.seed, args.threads)
        return _finish_campaign(run, res, cp.CODING_COLUMNS, "decoding_campaign")
    sc, lam = _scenario_from_json(json.loads(Path(args.scenario).read_text()))
    if lam is None:
        lam = cs.witness_test(sc).witness
    try:
        result = cs.run_decoding_experiment(sc, lam)
    except cs.PremiseError as exc:
        raise ValidationError(f"{exc} (slack {exc.slack:.6g})") from exc
    out = {
        "M": sc.M,
        "eps": sc.eps,
        "eta": sc.eta,
        "c": result.c,
        "beta": result.beta,
        "info_bits": result.info_bits,
        "type1_error": result.type1_error,
        "analytic_bound": result.analytic_bound,
        "per_message_error": result.per_message_error,
        "union_bound_per_message": result.union_rhs,
        "outcome_distribution": result.outcome_distribution,
        "holds": result.holds,
    }
    run.write("decoding.json", dumps(out))
    bad = None
    if not result.holds:
        bad = run.counterexamples([{"campaign": "simulate-decoding", "scenario": json.loads(Path(args.scenario).read_text()), **out}])
    run.finish()
    if bad is not None:
        print(f"error probability exceeds the bound; counterexample written to {bad}", file=sys.stderr)
        return 2
    return 0


# -- parser ----------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out-dir", default="qunion-out", help="directory for data files and the manifest")
    p.add_argument("--seed", type=int, default=0, help="master seed for randomized campaigns")
    p.add_argument("--threads", type=int, default=cp.default_threads(), help="worker threads for campaigns")
    p.add_argument("--config", default=None, help="JSON file with flag defaults (flags take precedence)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qunion", description="Quantum union bound and sequential decoding experiments.")
    parser.add_argument("--version", action="version", version=f"qunion {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify-union-bound", help="random campaign for the projector union bound")
    _common(p)
    p.add_argument("--dim", type=int, default=None, help="fixed dimension (default: random from 2,4,8,16,32)")
    p.add_argument("--num-projectors", type=int, default=None, help="fixed L (default: random 2..8)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--state", choices=("pure", "mixed", "both"), default="both")
    p.set_defaults(func=cmd_verify_union_bound)

    p = sub.add_parser("verify-lemmas", help="residuals of the proof identities on pure states")
    _common(p)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--num-projectors", type=int, default=None)
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("povm-bound", help="Naimark dilation checks and the measurement-operator union bound")
    _common(p)
    p.add_argument("--dim", type=int, default=None, help="fixed dimension (default: random 2..8)")
    p.add_argument("--num-ops", type=int, default=None, help="fixed chain length (default: random 2..5)")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_povm_bound)

    p = sub.add_parser("dh", help="bracket the hypothesis-testing relative entropy")
    _common(p)
    p.add_argument("--rho", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--random-trials", type=int, default=0, help="run a random campaign instead of one pair")
    p.add_argument("--max-dim", type=int, default=16)
    p.set_defaults(func=cmd_dh)

    p = sub.add_parser("dvt", help="mean, variance and third absolute moment of the log-likelihood ratio")
    _common(p)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.set_defaults(func=cmd_dvt)

    p = sub.add_parser("tl-check", help="trace inequalities of the likelihood-ratio test projector")
    _common(p)
    p.add_argument("--rho", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--thresh", type=float, default=None)
    p.add_argument("--random-trials", type=int, default=0)
    p.add_argument("--max-dim", type=int, default=16)
    p.set_defaults(func=cmd_tl_check)

    p = sub.add_parser("second-order", help="finite-n expansion curve or exact validity sweep")
    _common(p)
    p.add_argument("--triple", default=None, help="D,V,T")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-range", default=None, help="a:b:step (inclusive)")
    p.add_argument("--sweep-pairs", type=int, default=0, help="exact-vs-bound sweep over random qubit pairs")
    p.set_defaults(func=cmd_second_order)

    p = sub.add_parser("rate", help="one-shot or second-order coding rate lower bounds")
    _common(p)
    p.add_argument("--mode", choices=("ea", "unassisted"), default="ea")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--info-bits", type=float, default=None, help="given hypothesis-testing information (ea)")
    p.add_argument("--triple", default=None, help="D,V,T for the second-order rate with eta = 1/sqrt(n) (ea)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--state", default=None, help="resource state JSON")
    p.add_argument("--dims", default=None, help="d_first,d_A of the resource")
    p.add_argument("--channel", default=None, help="channel JSON")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("simulate-decoding", help="exact position-based coding with sequential decoding")
    _common(p)
    p.add_argument("--scenario", default=None, help="scenario JSON (default: built-in scenario campaign)")
    p.set_defaults(func=cmd_simulate_decoding)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(vars(args)) - {"func", "command", "config"}
    config = {k.replace("-", "_"): v for k, v in config.items()}
    unknown = sorted(set(config) - known)
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    # re-parse with the config as defaults so explicit flags still win
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparsers.choices[args.command].set_defaults(**config)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 1
    except (UsageError, ValidationError, FileNotFoundError) as exc:
        print(f"qunion: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
