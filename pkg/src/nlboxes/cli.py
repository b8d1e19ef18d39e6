"""Command-line front end: evaluation, benchmark tables, region sweeps,
non-adaptive bounds and protocol search, emitting CSV or JSON.

Exit codes: 0 success, 1 validation failure (bad box or probabilities),
2 usage error (bad flags, unknown protocol, malformed ranges).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path
from typing import Sequence

import numpy as np

from .boxes import (BoxParams, DomainError, NoSignalingBox, ValidationError,
                    box_from_json, chsh_value, make_general_nlb, make_symmetric_nlb)
from .evaluator import distill, distilled_value
from .protocols import (NonAdaptiveProtocol, Protocol, embed_nonadaptive,
                        named_protocol, parity_protocol, protocol_from_json)
from .analysis import (DEFAULT_SWEEP_PROTOCOLS, nonadaptive_bound, sweep_symmetric,
                       write_sweep_csv)
from . import search as search_mod

USAGE_EXIT = 2
VALIDATION_EXIT = 1
DEPTH_WARN = 10

# Benchmark boxes for the two bundled reference tables.
TABLE_I_ROWS = (
    BoxParams(0.92, 0.92, 0.92, -0.22),
    BoxParams(0.96, 0.84, 0.96, 0.24),
    BoxParams(0.96, 0.96, 0.84, 0.24),
    BoxParams(0.96, 0.96, 0.96, 0.60),
)
TABLE_II_ROWS = ((0.96, -0.48), (0.96, 0.60), (0.92, -0.22))
TABLE_II_PARITY_MAX_DEPTH = 8


@dataclass
class RunConfig:
    """Normalized options of one CLI invocation."""

    subcommand: str
    box: NoSignalingBox | None = None
    protocol_name: str | None = None
    protocol: Protocol | None = None
    depth: int | None = None
    grid: tuple[tuple[float, float], tuple[float, float], float] | None = None
    out: str | None = None
    fmt: str = "json"
    seed: int | None = None
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise DomainError("worker count must be >= 1")
        if self.grid is not None:
            (dlo, dhi), (elo, ehi), step = self.grid
            if step <= 0:
                raise DomainError("grid step must be positive")
            for v in (dlo, dhi, elo, ehi):
                if not -1.0 <= v <= 1.0:
                    raise DomainError("grid ranges must lie within [-1, 1]")


class _UsageError(Exception):
    pass


def _parse_floats(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise _UsageError(f"{what} needs {count} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"could not parse {what}: {exc}") from exc


def _parse_range(text: str, what: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise _UsageError(f"{what} must look like LO:HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _UsageError(f"could not parse {what}: {exc}") from exc
    if hi < lo:
        raise _UsageError(f"{what} has HI < LO")
    return lo, hi


def _grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(round((hi - lo) / step)) + 1
    axis = lo + step * np.arange(count)
    return axis[axis <= hi + step * 1e-9]


def _load_box(args) -> NoSignalingBox:
    given = [v for v in (args.box, args.symmetric, args.box_file) if v is not None]
    if len(given) != 1:
        raise _UsageError("give exactly one of --box, --symmetric, --box-file")
    if args.box is not None:
        return make_general_nlb(BoxParams(*_parse_floats(args.box, 4, "--box")))
    if args.symmetric is not None:
        d, e = _parse_floats(args.symmetric, 2, "--symmetric")
        return make_symmetric_nlb(d, e)
    return box_from_json(Path(args.box_file).read_text(encoding="utf-8"))


def _load_protocol(args) -> tuple[str, Protocol]:
    if getattr(args, "protocol_file", None):
        proto = protocol_from_json(Path(args.protocol_file).read_text(encoding="utf-8"))
        return f"file:{args.protocol_file}", proto
    if not getattr(args, "protocol", None):
        raise _UsageError("give --protocol NAME or --protocol-file PATH")
    try:
        return named_protocol(args.protocol, getattr(args, "depth", None))
    except KeyError as exc:
        raise _UsageError(str(exc.args[0])) from exc


def _write_output(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _round4(value: float) -> str:
    return str(Decimal(repr(float(value))).quantize(Decimal("0.0001"),
                                                    rounding=ROUND_HALF_UP))


def _default_workers() -> int:
    env = os.environ.get("NLBD_WORKERS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    box = _load_box(args)
    name, proto = _load_protocol(args)
    if proto.depth > DEPTH_WARN:
        print(f"warning: depth {proto.depth} enumerates 4^{proto.depth} paths; "
              "expect a long run", file=sys.stderr)
    out_box = distill(proto, box)
    v_in = chsh_value(box)
    v_out = chsh_value(out_box)
    distills = bool(v_out - v_in > 1e-12)
    probs = [float(v) for v in out_box.p.reshape(16)]
    if args.format == "json":
        text = json.dumps({
            "protocol": name, "v_in": v_in, "v_out": v_out,
            "distills": distills, "distilled_box": probs,
        }, indent=2)
    else:
        lines = ["field,value", f"protocol,{name}", f"v_in,{v_in:.10g}",
                 f"v_out,{v_out:.10g}", f"distills,{int(distills)}"]
        lines += [f"p{i},{p:.10g}" for i, p in enumerate(probs)]
        text = "\n".join(lines)
    _write_output(text, args.out)
    return 0


def _table_one_lines() -> list[str]:
    protos = {
        "P_xor": embed_nonadaptive(parity_protocol(2)),
        "P_BS": named_protocol("bs", 2)[1],
        "P_A": named_protocol("allcock2")[1],
        "P_perm": named_protocol("allcock_perm")[1],
    }
    header = ["delta1", "delta2", "delta3", "epsilon", "P"] + list(protos) + ["best"]
    lines = [",".join(header)]
    for params in TABLE_I_ROWS:
        box = make_general_nlb(params)
        cells = [f"{v:g}" for v in params.as_tuple()] + [_round4(chsh_value(box))]
        rounded = {name: _round4(distilled_value(proto, box))
                   for name, proto in protos.items()}
        cells += list(rounded.values())
        top = max(Decimal(v) for v in rounded.values())
        cells.append("+".join(n for n, v in rounded.items() if Decimal(v) == top))
        lines.append(",".join(cells))
    return lines


def _best_parity(box: NoSignalingBox, max_depth: int) -> tuple[float, int]:
    """Largest |value| of the parity wiring over 1 <= k <= max_depth, via the evaluator."""
    best, best_k = -1.0, 1
    for k in range(1, max_depth + 1):
        v = abs(distilled_value(embed_nonadaptive(parity_protocol(k)), box))
        if v > best + 1e-15:
            best, best_k = v, k
    return best, best_k


def _table_two_lines() -> list[str]:
    protos = {
        "P_A": named_protocol("allcock2")[1],
        "P_3": named_protocol("gen", 3)[1],
        "P_6": named_protocol("gen", 6)[1],
        "P_new": named_protocol("new3")[1],
    }
    header = ["delta", "epsilon", "P", "P_xor", "k_xor"] + list(protos) + ["best"]
    lines = [",".join(header)]
    for delta, epsilon in TABLE_II_ROWS:
        box = make_symmetric_nlb(delta, epsilon)
        v_xor, k_xor = _best_parity(box, TABLE_II_PARITY_MAX_DEPTH)
        rounded = {"P_xor": _round4(v_xor)}
        rounded.update({name: _round4(distilled_value(proto, box))
                        for name, proto in protos.items()})
        cells = [f"{delta:g}", f"{epsilon:g}", _round4(chsh_value(box)),
                 rounded["P_xor"], str(k_xor)]
        cells += [rounded[name] for name in protos]
        top = max(Decimal(v) for v in rounded.values())
        cells.append("+".join(n for n, v in rounded.items() if Decimal(v) == top))
        lines.append(",".join(cells))
    return lines


def cmd_table(args) -> int:
    lines = _table_one_lines() if args.which == "I" else _table_two_lines()
    _write_output("\n".join(lines), args.out)
    return 0


def cmd_sweep(args) -> int:
    dlo, dhi = _parse_range(args.delta, "--delta")
    elo, ehi = _parse_range(args.eps, "--eps")
    try:
        step = float(args.step)
    except ValueError as exc:
        raise _UsageError(f"could not parse --step: {exc}") from exc
    config = RunConfig("sweep", grid=((dlo, dhi), (elo, ehi), step),
                       workers=args.workers, out=args.out)
    names = [n.strip() for n in args.protocols.split(",") if n.strip()]
    try:
        data = sweep_symmetric(names, _grid_axis(dlo, dhi, step),
                               _grid_axis(elo, ehi, step), workers=config.workers)
    except KeyError as exc:
        raise _UsageError(str(exc.args[0])) from exc
    import io
    buf = io.StringIO()
    write_sweep_csv(data, buf)
    _write_output(buf.getvalue(), args.out)
    return 0


def cmd_bound(args) -> int:
    box = _load_box(args)
    params = search_mod.family_params(box)
    if params is None:
        raise ValidationError("the non-adaptive bound needs a box of the diagonal family")
    result = nonadaptive_bound(params, args.max_depth)
    if args.format == "json":
        text = json.dumps({"bound": result.value, "depth": result.depth})
    else:
        text = f"bound,{result.value:.10g}\ndepth,{result.depth}"
    _write_output(text, args.out)
    return 0


def cmd_search(args) -> int:
    box = _load_box(args)
    if args.nonadaptive == args.adaptive:
        raise _UsageError("choose exactly one of --nonadaptive or --adaptive")
    if args.nonadaptive:
        depth = args.depth or 2
        if args.sample:
            report = search_mod.search_nonadaptive_sampled(
                box, depth, args.sample, seed=args.seed if args.seed is not None else 0)
        elif depth in (1, 2):
            report = search_mod.search_nonadaptive(box, depth)
        else:
            raise _UsageError(
                f"exhaustive non-adaptive search at depth {depth} is not supported; "
                "rerun with --sample N")
    else:
        if args.depth not in (None, 2):
            raise _UsageError("adaptive exhaustive search supports depth 2 only")
        report = search_mod.search_adaptive_depth2(
            box, restrict_first_layer=not args.unrestricted, workers=args.workers)
    _write_output(search_mod.report_to_json(report), args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser plumbing
# ---------------------------------------------------------------------------

def _add_box_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--box", help="delta1,delta2,delta3,epsilon")
    parser.add_argument("--symmetric", help="delta,epsilon")
    parser.add_argument("--box-file", help="JSON box file")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write output to this path instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--workers", type=int, default=_default_workers(),
                        help="worker count (default: NLBD_WORKERS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlboxes",
        description="Exact evaluation, search and mapping of box wiring protocols")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("eval", help="distill one box with one protocol")
    _add_box_flags(p)
    p.add_argument("--protocol", help="protocol name (e.g. parity, bs, allcock2, new3)")
    p.add_argument("--depth", type=int, help="depth for parameterized families")
    p.add_argument("--protocol-file", help="JSON protocol file")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("table", help="recompute a bundled benchmark table as CSV")
    p.add_argument("which", choices=("I", "II"))
    _add_common_flags(p)
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("sweep", help="map distillability over the symmetric plane")
    p.add_argument("--delta", required=True, help="LO:HI")
    p.add_argument("--eps", required=True, help="LO:HI")
    p.add_argument("--step", required=True, help="grid step")
    p.add_argument("--protocols", default=",".join(DEFAULT_SWEEP_PROTOCOLS),
                   help="comma-separated protocol names")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("bound", help="non-adaptive optimality bound of a box")
    _add_box_flags(p)
    p.add_argument("--max-depth", type=int, default=8)
    _add_common_flags(p)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("search", help="search protocol space for the best wiring")
    _add_box_flags(p)
    p.add_argument("--nonadaptive", action="store_true")
    p.add_argument("--adaptive", action="store_true")
    p.add_argument("--depth", type=int)
    p.add_argument("--sample", type=int, help="sampled mode: number of random candidates")
    p.add_argument("--seed", type=int, help="seed for the sampled mode")
    p.add_argument("--unrestricted", action="store_true",
                   help="adaptive mode: also scan first-layer functions")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_search)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT


if __name__ == "__main__":
    sys.exit(main())
