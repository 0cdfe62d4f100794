"""Command-line entry point: ``linf-trees ultra|tree|type|fan3|census``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fan3, treemetric, ultra
from .io import ParseError, dumps, jsonable, parse_dissimilarity, parse_subspace_problem
from .omatroid import LinearSubspace, closest_set_dim, is_uniform, linf_distance, sign_rank, type_of
from .trees import topology_of_ultrametric

EXIT_OK, EXIT_PARSE, EXIT_GUARD = 0, 2, 3
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 50_000


class GuardViolation(Exception):
    pass


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def cmd_ultra(args) -> dict:
    delta = parse_dissimilarity(_read(args.input))
    if delta.n > ultra.MAX_TOP_LEAVES:
        raise GuardViolation(f"{delta.n} leaves; ultra supports at most {ultra.MAX_TOP_LEAVES}")
    tops = sorted(ultra.top_set(delta))
    canon = ultra.canonical_closest(delta)
    return {
        "labels": list(delta.labels),
        "delta": delta,
        "subdominant": ultra.subdominant(delta),
        "distance": ultra.distance_to_ultrametrics(delta),
        "canonical": canon,
        "canonical_topology": topology_of_ultrametric(canon).topology.format(),
        "top": [t.format() for t in tops],
        "district": ultra.format_district(tops),
        "dimension": ultra.closest_set_dimension(delta),
    }


def cmd_tree(args) -> dict:
    delta = parse_dissimilarity(_read(args.input))
    if not 4 <= delta.n <= treemetric.MAX_TREE_LEAVES:
        raise GuardViolation(f"{delta.n} leaves; tree supports 4 to {treemetric.MAX_TREE_LEAVES}")
    report = treemetric.closest_tree_components(delta, args.mode)
    _, table = treemetric.distance_to_tree_metrics(delta, args.mode)
    out = report.to_json()
    out["labels"] = list(delta.labels)
    out["delta"] = delta
    out["table"] = [{"topology": t.format(), "distance": f.distance,
                     "minimal": f.distance == report.distance}
                    for t, f in sorted(table.items(), key=lambda kv: kv[0].format())]
    return out


def cmd_type(args) -> dict:
    rows, point = parse_subspace_problem(_read(args.input))
    try:
        L = LinearSubspace.from_rows(rows, ambient_dim=len(point))
    except ValueError as e:
        raise ParseError(str(e)) from None
    sigma = type_of(point, L)
    return {
        "type": str(sigma),
        "rank": sign_rank(sigma, L),
        "distance": linf_distance(point, L),
        "dimension": closest_set_dim(point, L),
        "uniform": is_uniform(L),
    }


def cmd_fan3(args):
    delta = None
    if args.input is not None:
        delta = parse_dissimilarity(_read(args.input))
        if delta.n != 3:
            raise GuardViolation(f"fan3 overlays need 3 leaves, got {delta.n}")
    fmt = args.format or "svg"
    if fmt == "svg":
        return fan3.render_svg(delta)
    cones = [{"dimension": c.dimension, "generators": [list(g) for g in c.generators],
              "district": c.label} for c in fan3.fan3_cones()]
    return {"cones": cones, "cone_count": len(cones)}


def cmd_census(args) -> dict:
    if args.samples < 1:
        raise ParseError("--samples must be at least 1")
    lo, hi = args.box
    if hi < lo:
        raise ParseError(f"empty box [{lo}, {hi}]")
    counts = ultra.district_census(4, args.samples, args.seed, (lo, hi), workers=args.workers)
    return {
        "seed": args.seed,
        "samples": args.samples,
        "box": [lo, hi],
        "districts": dict(sorted(counts.items())),
        "distinct_count": len(counts),
    }


COMMANDS = {"ultra": cmd_ultra, "tree": cmd_tree, "type": cmd_type, "fan3": cmd_fan3,
            "census": cmd_census}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="linf-trees",
        description="Exact l-infinity fitting of ultrametrics and tree metrics.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", help="input file ('-' or omitted reads stdin)")
    p.add_argument("--mode", choices=treemetric.MODES, default=treemetric.TREE)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--box", type=int, nargs=2, metavar=("LO", "HI"), default=(0, 100))
    p.add_argument("--workers", type=int, default=1, help="census worker processes")
    p.add_argument("--format", choices=("json", "text", "svg"))
    p.add_argument("--output", help="write here instead of stdout")
    return p


def _as_text(obj, depth: int = 0) -> list[str]:
    pad = "  " * depth
    lines = []
    items = sorted(obj.items()) if isinstance(obj, dict) else [(None, v) for v in obj]
    for k, v in items:
        head = f"{pad}{k}:" if k is not None else f"{pad}-"
        if isinstance(v, dict) or (isinstance(v, list) and any(isinstance(x, (dict, list)) for x in v)):
            lines.append(head)
            lines.extend(_as_text(v, depth + 1))
        elif isinstance(v, list):
            lines.append(f"{head} " + ", ".join(str(x) for x in v))
        else:
            lines.append(f"{head} {str(v).lower() if isinstance(v, bool) else v}")
    return lines


def render(result, fmt: str | None) -> str:
    if isinstance(result, str):
        return result
    if fmt == "svg":
        raise ParseError("svg output is only available for fan3")
    if fmt == "text":
        return "\n".join(_as_text(jsonable(result))) + "\n"
    return dumps(result)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command != "fan3" and args.format == "svg":
            raise ParseError("svg output is only available for fan3")
        text = render(COMMANDS[args.command](args), args.format)
    except ParseError as e:
        print(f"linf-trees: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (GuardViolation, ultra.GuardError) as e:
        print(f"linf-trees: guard violation: {e}", file=sys.stderr)
        return EXIT_GUARD
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
