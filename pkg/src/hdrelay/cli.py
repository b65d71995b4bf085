"""hdrelay command line.

Examples
--------
  hdrelay capacity --model ternary --relays 1
  hdrelay region --asymptotic --points 100 --output region.csv --figure region.png
  hdrelay simulate --relays 2 --n 64 --optimize-slots --blocks 40 --seed 7
  hdrelay simulate --two-source --n 6 --slots 2 --k0 1 --blocks 20
  hdrelay cutset-check --relays 4 --relay-source 2 --trials 50 --seed 9
  hdrelay sweep --relays 1 --n-list 8,16,64,256,640

JSON or CSV goes to stdout unless --output is given.  Relative --output and
--figure paths are resolved against $HDRELAY_OUTPUT_DIR when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .channel import RelayModel
from .errors import DomainError, IntegrityError, SolverError, ValidationError, ZeroErrorViolation

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_ZERO_ERROR, EXIT_CUTSET = 0, 2, 3, 4, 5
OUTPUT_ENV = "HDRELAY_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, output: str | None) -> None:
    target = _resolve(output)
    if target is None:
        sys.stdout.write(text)
    else:
        target.write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _model(args) -> RelayModel:
    return RelayModel(args.model)


# -- subcommands ---------------------------------------------------------------------

def cmd_capacity(args) -> int:
    from .capacity import closed_form, solve_cascade

    model = _model(args)
    if args.relays < 1:
        raise UsageError("--relays must be >= 1")
    if args.method == "closed-form":
        out = closed_form(args.relays, model).to_dict()
    else:
        res = solve_cascade(args.relays, model, restricted=not args.full_support, max_iter=args.max_iter)
        out = res.to_dict()
        if args.method == "both":
            try:
                ref = closed_form(args.relays, model)
            except DomainError:
                # no closed form for ternary m >= 2: cross-check against the unrestricted optimizer
                ref = solve_cascade(args.relays, model, restricted=args.full_support, seed=args.seed)
            out["cross_check"] = {"method": ref.method, "capacity_bits": ref.capacity_bits,
                                  "delta": res.capacity_bits - ref.capacity_bits}
    _emit(_json(out), args.output)
    return EXIT_OK


def cmd_region(args) -> int:
    from . import region

    if args.points < 1:
        raise UsageError("--points must be >= 1")
    curves = [region.sum_cap_line(), region.outer_bound_curve(args.points)]
    if args.n_finite is not None:
        curves.append(region.finite_n_achievable(args.n_finite))
    else:
        curves.append(region.achievable_segment(max(args.points, 2)))
    rows = [row for c in curves for row in c.rows()]
    _emit(_csv(["r0_bits", "r1_bits", "label"], rows), args.output)
    if args.figure:
        from .figures import plot_region
        plot_region(curves, _resolve(args.figure),
                    title=f"n = {args.n_finite}" if args.n_finite is not None else "asymptotic")
    return EXIT_OK


def _single_spec(args):
    from .coding import CodebookSpec, optimize_slot_counts

    if args.optimize_slots:
        return optimize_slot_counts(args.n, args.relays, _model(args))
    if args.slots is None:
        raise UsageError("give --slots or --optimize-slots")
    return CodebookSpec(args.n, args.relays, tuple(args.slots), _model(args))


def cmd_simulate(args) -> int:
    from .coding import TwoSourceSpec
    from .simulator import ExperimentConfig, run_pipeline, run_two_source

    source = "explicit" if args.messages is not None else args.message_source
    if args.two_source:
        if args.relays != 1:
            raise UsageError("--two-source needs --relays 1")
        if args.slots is None or len(args.slots) != 1:
            raise UsageError("--two-source needs --slots n1")
        if args.model != "ternary":
            raise UsageError("--two-source runs the ternary model only")
        spec = TwoSourceSpec(args.n, args.slots[0], args.k0 if args.k0 is not None else args.slots[0])
        run = run_two_source
    else:
        if args.k0 is not None:
            raise UsageError("--k0 needs --two-source")
        spec = _single_spec(args)
        run = run_pipeline
    cfg = ExperimentConfig(spec, args.blocks, seed=args.seed, message_source=source,
                           messages=args.messages, trace=args.trace)
    out = {"spec": spec.to_dict()}
    try:
        report = run(cfg)
    except ZeroErrorViolation as e:
        out.update(report=e.report.to_dict(), error=str(e))
        _emit(_json(out), args.output)
        return EXIT_ZERO_ERROR
    except IntegrityError as e:
        out["error"] = str(e)
        _emit(_json(out), args.output)
        return EXIT_ZERO_ERROR
    out["report"] = report.to_dict()
    _emit(_json(out), args.output)
    return EXIT_OK


def cmd_cutset_check(args) -> int:
    from .capacity import solve_cascade
    from .cutset import MAX_SINGLE, MAX_TWO_SOURCE, verify_ascending_minimality, verify_two_source_ascending

    m = args.relays
    if args.relay_source is None:
        if not 1 <= m <= MAX_SINGLE:
            raise UsageError(f"--relays must lie in 1..{MAX_SINGLE}")
    elif not 1 <= args.relay_source <= m <= MAX_TWO_SOURCE:
        raise UsageError(f"need 1 <= --relay-source <= --relays <= {MAX_TWO_SOURCE}")
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    # the capacity-achieving chain is checked first, then the random ones
    chain = solve_cascade(m).chain
    if args.relay_source is None:
        report = verify_ascending_minimality(chain, args.trials, args.seed)
    else:
        report = verify_two_source_ascending(chain, args.relay_source, args.trials, args.seed)
    out = {"relays": m, "relay_source": args.relay_source, "seed": args.seed, **report.to_dict()}
    _emit(_json(out), args.output)
    return EXIT_OK if report.passed else EXIT_CUTSET


def cmd_sweep(args) -> int:
    from .simulator import sweep_rates

    if not args.n_list:
        raise UsageError("--n-list is empty")
    rows = sweep_rates(args.n_list, args.relays, _model(args), seed=args.seed)
    header = ["n", "n_counts", "rate_bits", "capacity_bits", "gap_bits", "achieved_rate_bits", "monotone"]
    body = [(r.n, ";".join(map(str, r.n_counts)), r.rate_bits, r.capacity_bits, r.gap_bits,
             r.achieved_rate_bits, int(r.monotone)) for r in rows]
    _emit(_csv(header, body), args.output)
    if args.figure:
        from .figures import plot_sweep
        plot_sweep(rows, _resolve(args.figure))
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdrelay", description="Half-duplex relay cascade capacities, "
                                "rate regions and zero-error codes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--output", "-o", help="write here instead of stdout")
        if model:
            sp.add_argument("--model", choices=[m.value for m in RelayModel], default="ternary")

    sp = sub.add_parser("capacity", help="zero-error capacity of an m-relay cascade (JSON)")
    common(sp)
    sp.add_argument("--relays", "-m", type=int, default=1)
    sp.add_argument("--method", choices=["closed-form", "optimize", "both"], default="optimize")
    sp.add_argument("--max-iter", type=int, default=100000)
    sp.add_argument("--full-support", action="store_true",
                    help="optimize over all Markov chains instead of the restricted family")
    sp.add_argument("--seed", type=int, default=0, help="start seed of the full-support optimizer")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("region", help="two-source rate-region curves for one relay (CSV)")
    common(sp, model=False)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--n-finite", type=int, metavar="N", help="finite block-length frontier")
    g.add_argument("--asymptotic", action="store_true", help="asymptotic achievable segment")
    sp.add_argument("--points", type=int, default=100, help="samples per analytic curve; 1 = endpoints")
    sp.add_argument("--figure", help="also save a figure (png/pdf)")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("simulate", help="run the block-pipelined code (JSON report)")
    common(sp)
    sp.add_argument("--relays", "-m", type=int, default=1)
    sp.add_argument("--n", type=int, required=True, help="block length")
    sp.add_argument("--blocks", type=int, default=10)
    sg = sp.add_mutually_exclusive_group()
    sg.add_argument("--slots", type=_int_list, help="n_1,...,n_m")
    sg.add_argument("--optimize-slots", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--message-source", choices=["random", "exhaustive"], default="random")
    sp.add_argument("--messages", type=_int_list, help="explicit source messages")
    sp.add_argument("--two-source", action="store_true", help="relay 1 adds its own stream")
    sp.add_argument("--k0", type=int, help="relay bits spent on the source stream (two-source)")
    sp.add_argument("--trace", action="store_true", help="include per-block symbol rows")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("cutset-check", help="brute-force ascending-cut checks (JSON)")
    common(sp, model=False)
    sp.add_argument("--relays", "-m", type=int, default=1)
    sp.add_argument("--relay-source", type=int, help="relay that also originates data")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_cutset_check)

    sp = sub.add_parser("sweep", help="optimized code rate against block length (CSV)")
    common(sp)
    sp.add_argument("--relays", "-m", type=int, default=1)
    sp.add_argument("--n-list", type=_int_list, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--figure", help="also save a figure (png/pdf)")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ValidationError) as e:
        parser.print_usage(sys.stderr)
        print(f"hdrelay {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"hdrelay {args.command}: solver did not converge: {e}", file=sys.stderr)
        if getattr(e, "best", None) is not None:
            print(_json({"best": e.best.to_dict()}), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
