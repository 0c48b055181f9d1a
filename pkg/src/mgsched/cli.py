"""Command-line entry point.

Every command prints JSON to stdout (or writes it to ``--out`` where the
command produces JSON). Exit status is 0 on success, 2 for configuration or
input errors and 3 when a schedule or trace fails validation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bounds import BOUND_KINDS, cr_bound
from .errors import ConfigError, DataError, ValidationError
from .experiment import (
    read_json,
    cost_reduction,
    dumps,
    load_params,
    params_dict,
    run_experiment,
    seed_from_env,
)
from .model import baseline_cost, total_cost
from .offline import ofa_multi
from .online import (
    POLICY_NAMES,
    Policy,
    chase_gen_step,
    chase_s_lk_step,
    chase_s_plus_step,
    rhc_step,
    run_policy,
)
from .traces import SynthSpec, load_trace, synth_trace, write_trace

EXIT_OK, EXIT_CONFIG, EXIT_INVALID = 0, 2, 3


def _emit(obj, out=None):
    text = dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    report = run_experiment(args.config)
    _emit(report, args.out)


def _policies(text: str, lookahead: int):
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise ConfigError("no policies given")
    return [Policy(n, lookahead) for n in names]


def cmd_compare(args):
    gen, ext, n = load_params(args.params)
    if args.n_gens is not None:
        n = args.n_gens
    trace = load_trace(args.trace, ext)
    base = baseline_cost(trace, ext)
    off = total_cost(ofa_multi(trace, gen.relaxed(), ext, n), trace, gen, ext).total
    rows = {"offline": {"total": off, "cost_reduction": cost_reduction(base, off)}}
    for pol in _policies(args.policies, args.lookahead):
        _, cost = run_policy(pol, trace, gen, ext, n)
        rows[pol.label] = {
            "total": cost.total,
            "cost": cost.as_dict(),
            "cost_reduction": cost_reduction(base, cost.total),
            "empirical_ratio": cost.total / off if off > 0 else None,
        }
    _emit({"params": params_dict(gen, ext, n), "slots": len(trace), "baseline_cost": base, "policies": rows}, args.out)


def cmd_bound(args):
    gen, ext, _ = load_params(args.params)
    b = cr_bound(args.kind, gen, ext, args.lookahead, args.slot_len)
    _emit({"lookahead": args.lookahead, "slot_len_h": args.slot_len, **b.as_dict()}, args.out)


_ADV_STEPS = {
    "chase_s": chase_s_lk_step,
    "chase_s_plus": chase_s_plus_step,
    "chase": chase_s_plus_step,
    "chase_gen": chase_gen_step,
    "rhc": rhc_step,
}


def cmd_adversarial(args):
    from .analysis import adversarial_trace, empirical_cr

    gen, ext, _ = load_params(args.params)
    if args.policy not in _ADV_STEPS:
        raise ConfigError(f"unknown policy {args.policy!r}; expected one of {POLICY_NAMES}")
    if args.horizon < 1:
        raise ConfigError("horizon must be >= 1")
    trace = adversarial_trace(_ADV_STEPS[args.policy], gen, ext, args.horizon)
    write_trace(trace, args.out)
    _, cost = run_policy(Policy(args.policy), trace, gen, ext)
    off = total_cost(ofa_multi(trace, gen.relaxed(), ext, 1), trace, gen, ext).total
    kind = {"chase_s": "chase_s", "chase_gen": "chase_gen", "rhc": None}.get(args.policy, "chase_s_plus")
    summary = {
        "policy": args.policy,
        "horizon": args.horizon,
        "trace_csv": str(args.out),
        "policy_cost": cost.total,
        "offline_cost": off,
        "empirical_ratio": empirical_cr(cost.total, off),
        "bound": None if kind is None else cr_bound(kind, gen, ext).bound,
    }
    _emit(summary)


def cmd_synth(args):
    spec = SynthSpec() if args.spec in (None, "default") else SynthSpec.from_dict(read_json(args.spec))
    seed = seed_from_env(args.seed)
    trace = synth_trace(spec, seed)
    write_trace(trace, args.out)
    _emit({"slots": len(trace), "seed": seed, "out": str(args.out), "spec": spec.as_dict()})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mgsched", description="Microgrid generation scheduling with online algorithms.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment config and emit its report")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run several policies on one trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--policies", required=True, help=f"comma-separated subset of {','.join(POLICY_NAMES)}")
    p.add_argument("--lookahead", type=int, default=0, help="look-ahead window in slots")
    p.add_argument("--params", default="P1", help="S0, P1 or a params JSON file")
    p.add_argument("--n-gens", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bound", help="evaluate a competitive-ratio bound")
    p.add_argument("--params", required=True, help="S0, P1 or a params JSON file")
    p.add_argument("--kind", required=True, choices=BOUND_KINDS)
    p.add_argument("--lookahead", type=int, default=0, help="look-ahead window in slots")
    p.add_argument("--slot-len", type=float, default=1.0, help="slot length in hours")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("adversarial", help="build the worst-case input against a policy")
    p.add_argument("--policy", required=True, choices=POLICY_NAMES)
    p.add_argument("--horizon", required=True, type=int)
    p.add_argument("--out", required=True, help="CSV path for the generated trace")
    p.add_argument("--params", default="S0", help="S0, P1 or a params JSON file")
    p.set_defaults(func=cmd_adversarial)

    p = sub.add_parser("synth", help="generate a synthetic hourly trace")
    p.add_argument("--spec", help="SynthSpec JSON file, or 'default'")
    p.add_argument("--seed", type=int, help="random seed (falls back to $CHASE_SEED)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
