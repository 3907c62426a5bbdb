"""Command-line front end: parsing, experiment drivers, and emitters.

Exit codes are a stable scripting contract: 0 success, 1 input error,
2 numerical non-convergence, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .classicality import (
    ClassicalCertificate,
    classify_domain_sequence,
    deform_toward_classical,
    search_classical_generators,
)
from .curves import (
    build_quasicircle,
    curve_from_csv_rows,
    curve_to_csv_rows,
    default_generating_curve,
    frechet_distance,
)
from .dimension import (
    METHOD_BOXCOUNT,
    METHOD_EXPONENT,
    METHOD_TRANSFER,
    box_counting,
    default_scales,
    exponent_of_convergence,
    poincare_partial_sum,
    transfer_dimension,
)
from .errors import NonConvergedError, SchottkyLabError
from .moebius import MoebiusMap, from_fixed_points_multiplier
from .schottky import (
    Circle,
    CirclePairing,
    DegeneratePoint,
    SchottkyGroup,
    enumerate_reduced_words,
    sample_limit_set,
    word_str,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2
EXIT_BUDGET = 3


class InputError(SchottkyLabError):
    """Structured parse failure naming the offending field."""


@dataclass
class ExperimentConfig:
    seed: int = 0
    deterministic: bool = False
    depth: int | None = None
    method: str | None = None
    budget: int | None = None
    threshold: float | None = None
    steps: int | None = None
    samples: int | None = None
    tool_version: str = __version__
    backend: str = BACKEND

    def snapshot(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def worker_count(config: ExperimentConfig) -> int:
    if config.deterministic:
        return 1
    raw = os.environ.get("SCHOTTKY_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


# --- document parsing --------------------------------------------------------


def _expect_pair(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise InputError(f"{where}: expected [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def parse_group_document(doc) -> tuple[SchottkyGroup, dict]:
    if not isinstance(doc, dict):
        raise InputError("document root: expected a JSON object")
    if "rank" not in doc:
        raise InputError("rank: missing")
    rank = doc["rank"]
    if not isinstance(rank, int) or rank < 1:
        raise InputError(f"rank: expected a positive integer, got {rank!r}")
    gens_doc = doc.get("generators")
    if not isinstance(gens_doc, list) or len(gens_doc) != rank:
        raise InputError(f"generators: expected a list of {rank} matrices")
    generators = []
    for i, mat in enumerate(gens_doc):
        if not isinstance(mat, list) or len(mat) != 4:
            raise InputError(f"generators[{i}]: expected four [re, im] entries")
        entries = [_expect_pair(mat[k], f"generators[{i}][{k}]") for k in range(4)]
        try:
            generators.append(MoebiusMap.from_entries(*entries))
        except ValueError as err:
            raise InputError(f"generators[{i}]: {err}") from err
    pairing = None
    if "circles" in doc and doc["circles"] is not None:
        circ_doc = doc["circles"]
        if not isinstance(circ_doc, list) or len(circ_doc) != 2 * rank:
            raise InputError(f"circles: expected a list of {2 * rank} circles")
        circles = []
        for i, c in enumerate(circ_doc):
            if not isinstance(c, dict) or "center" not in c or "radius" not in c:
                raise InputError(f"circles[{i}]: expected center/radius object")
            center = _expect_pair(c["center"], f"circles[{i}].center")
            radius = c["radius"]
            if not isinstance(radius, (int, float)) or radius <= 0:
                raise InputError(f"circles[{i}].radius: expected a positive number")
            circles.append(Circle(center, float(radius)))
        pairing = CirclePairing(tuple(circles))
    try:
        group = SchottkyGroup(tuple(generators), pairing)
    except SchottkyLabError as err:
        raise InputError(f"group: {err}") from err
    return group, doc.get("metadata", {}) or {}


def load_group(path: str) -> tuple[SchottkyGroup, dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise InputError(f"{path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: invalid JSON ({err})") from err
    return parse_group_document(doc)


def parse_domain_steps(doc):
    if not isinstance(doc, list) or len(doc) < 3:
        raise InputError("steps: expected a JSON array of at least 3 steps")
    steps = []
    for t, step in enumerate(doc):
        if not isinstance(step, list):
            raise InputError(f"steps[{t}]: expected a list of entries")
        entries = []
        for i, entry in enumerate(step):
            where = f"steps[{t}][{i}]"
            if not isinstance(entry, dict):
                raise InputError(f"{where}: expected an object")
            if "point" in entry:
                entries.append(DegeneratePoint(_expect_pair(entry["point"], where)))
            elif "center" in entry and "radius" in entry:
                entries.append(
                    Circle(_expect_pair(entry["center"], where), float(entry["radius"]))
                )
            else:
                raise InputError(f"{where}: need center/radius or point")
        steps.append(entries)
    return steps


# --- emitters ---------------------------------------------------------------


def _config_comment(config: ExperimentConfig) -> str:
    return json.dumps(config.snapshot(), sort_keys=True)


def write_json(path: str | None, payload: dict, config: ExperimentConfig) -> None:
    payload = dict(payload)
    payload["config"] = config.snapshot()
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def write_csv(path: str, header: str, rows, config: ExperimentConfig) -> None:
    with open(path, "w") as fh:
        fh.write(f"# config: {_config_comment(config)}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _svg_fmt(x: float) -> str:
    return f"{x:.6f}"


def render_svg(
    path: str,
    config: ExperimentConfig,
    circles=(),
    points=(),
    curve=None,
    extra_comment: str = "",
) -> None:
    xs, ys = [], []
    for c in circles:
        xs += [c.center.real - c.radius, c.center.real + c.radius]
        ys += [c.center.imag - c.radius, c.center.imag + c.radius]
    for p in points:
        xs.append(p.real)
        ys.append(p.imag)
    if curve is not None:
        for piece in curve.pieces:
            x0, y0, x1, y1 = piece.bbox()
            xs += [x0, x1]
            ys += [y0, y1]
    if not xs:
        raise InputError("nothing to render")
    margin = 0.05 * max(max(xs) - min(xs), max(ys) - min(ys), 1e-6)
    x0, y0 = min(xs) - margin, min(ys) - margin
    w, h = max(xs) - x0 + margin, max(ys) - y0 + margin
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- schottkylab {__version__} | config: {_config_comment(config)}"
        + (f" | {extra_comment}" if extra_comment else "")
        + " -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_svg_fmt(x0)} {_svg_fmt(-y0 - h)} '
        f'{_svg_fmt(w)} {_svg_fmt(h)}">',
    ]
    stroke = max(w, h) / 600.0
    if circles:
        lines.append('<g id="circles" fill="none" stroke="#4477aa" '
                     f'stroke-width="{_svg_fmt(stroke)}">')
        for c in circles:
            lines.append(
                f'<circle cx="{_svg_fmt(c.center.real)}" cy="{_svg_fmt(-c.center.imag)}" '
                f'r="{_svg_fmt(c.radius)}"/>'
            )
        lines.append("</g>")
    if points:
        r = max(w, h) / 800.0
        lines.append('<g id="limitset" fill="#cc3311" stroke="none">')
        for p in points:
            lines.append(
                f'<circle cx="{_svg_fmt(p.real)}" cy="{_svg_fmt(-p.imag)}" r="{_svg_fmt(r)}"/>'
            )
        lines.append("</g>")
    if curve is not None:
        parts = []
        first = curve.pieces[0].start
        parts.append(f"M {_svg_fmt(first.real)} {_svg_fmt(-first.imag)}")
        for piece in curve.pieces:
            e = piece.end
            if piece.kind == "seg":
                parts.append(f"L {_svg_fmt(e.real)} {_svg_fmt(-e.imag)}")
            else:
                large = 1 if piece.sweep > math.pi else 0
                # Flipped y-axis reverses the sweep flag.
                sweep_flag = 0 if piece.ccw else 1
                parts.append(
                    f"A {_svg_fmt(piece.radius)} {_svg_fmt(piece.radius)} 0 "
                    f"{large} {sweep_flag} {_svg_fmt(e.real)} {_svg_fmt(-e.imag)}"
                )
        parts.append("Z")
        lines.append(
            f'<g id="curve" fill="none" stroke="#222222" stroke-width="{_svg_fmt(stroke)}">'
            f'<path d="{" ".join(parts)}"/></g>'
        )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# --- random group sampler -----------------------------------------------------


def _uniform_disk(rng, radius: float) -> complex:
    while True:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z) <= radius:
            return z


def sample_rank2_group(rng) -> SchottkyGroup:
    """Documented sampler for the classification experiment: fixed-point
    pairs uniform in the radius-5 disk, multipliers log-uniform in
    [1.5, 20], rejection on close fixed points or non-loxodromic output.
    """
    while True:
        gens = []
        ok = True
        for _ in range(2):
            p = _uniform_disk(rng, 5.0)
            q = _uniform_disk(rng, 5.0)
            if abs(p - q) < 0.2:
                ok = False
                break
            kappa = math.exp(rng.uniform(math.log(1.5), math.log(20.0)))
            gens.append(from_fixed_points_multiplier(p, q, kappa))
        if not ok:
            continue
        if any(g.classify() != "loxodromic" for g in gens):
            continue
        return SchottkyGroup(tuple(gens))


# --- subcommands --------------------------------------------------------------


def cmd_group_validate(args, config) -> int:
    group, metadata = load_group(args.file)
    payload = {
        "rank": group.rank,
        "loxodromic": True,
        "classical_margin": group.pairing.min_gap() if group.pairing else None,
        "metadata": metadata,
    }
    write_json(args.out, payload, config)
    return EXIT_OK


def cmd_dim(args, config) -> int:
    group, _ = load_group(args.file)
    method = args.method
    if method == METHOD_EXPONENT:
        est = exponent_of_convergence(group, args.depth)
    elif method == METHOD_TRANSFER:
        est = transfer_dimension(group, args.depth)
    elif method == METHOD_BOXCOUNT:
        points = sample_limit_set(group, args.depth)
        est = box_counting(points, default_scales(points))
    else:
        raise InputError(f"method: unknown {method!r}")
    if args.series_csv:
        rows = []
        for s in np.linspace(0.0, 2.0, 41):
            st = poincare_partial_sum(group, float(s), min(args.depth, 10))
            rows.append(f"{s!r},{st.partial_sum!r}")
        write_csv(args.series_csv, "s,partial_sum", rows, config)
    write_json(args.out, est.to_json(), config)
    return EXIT_OK


def cmd_limitset(args, config) -> int:
    group, _ = load_group(args.file)
    points = sample_limit_set(group, args.depth)
    words = enumerate_reduced_words(group.rank, args.depth)
    rows = [
        f"{p.real!r},{p.imag!r},{word_str(w, group.rank)}"
        for p, w in zip(points, words)
    ]
    write_csv(args.out, "re,im,word", rows, config)
    return EXIT_OK


def cmd_quasicircle(args, config) -> int:
    group, _ = load_group(args.file)
    zeta = default_generating_curve(group)
    curve = build_quasicircle(group, zeta, args.depth)
    header = "piece_index,tag,x0,y0,x1,y1,cx,cy,r"
    write_csv(args.out, header, curve_to_csv_rows(curve), config)
    return EXIT_OK


def cmd_frechet(args, config) -> int:
    curves = []
    for path in (args.curve1, args.curve2):
        try:
            with open(path) as fh:
                curves.append(curve_from_csv_rows(fh.readlines()))
        except OSError as err:
            raise InputError(f"{path}: {err}") from err
        except (ValueError, IndexError) as err:
            raise InputError(f"{path}: malformed curve CSV ({err})") from err
    value = frechet_distance(
        curves[0], curves[1], include_length_term=not args.classical
    )
    write_json(args.out, {"frechet_distance": value, "length_term": not args.classical}, config)
    return EXIT_OK


def cmd_classical(args, config) -> int:
    group, _ = load_group(args.file)
    result = search_classical_generators(group, args.budget)
    if isinstance(result, ClassicalCertificate):
        write_json(args.out, {"status": "certified", **result.to_json()}, config)
        return EXIT_OK
    write_json(args.out, result.to_json(), config)
    return EXIT_BUDGET


def cmd_singularity(args, config) -> int:
    try:
        with open(args.file) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise InputError(f"{args.file}: {err}") from err
    except json.JSONDecodeError as err:
        raise InputError(f"{args.file}: invalid JSON ({err})") from err
    steps = parse_domain_steps(doc)
    report = classify_domain_sequence(steps)
    write_json(args.out, report.to_json(), config)
    return EXIT_OK


def cmd_deform(args, config) -> int:
    group, _ = load_group(args.file)
    trace = deform_toward_classical(group, args.steps, depth=args.depth)
    rows = []
    for step, (grp, est, cert) in enumerate(trace):
        mults = ";".join(repr(abs(g.multiplier())) for g in grp.generators)
        rows.append(f"{step},{mults},{est.value!r},{cert is not None}")
    write_csv(args.out, "step,multipliers,dimension,certified", rows, config)
    return EXIT_OK


def run_theorem_check(
    samples: int,
    threshold: float,
    budget: int,
    seed: int,
    depth: int = 8,
    workers: int = 1,
) -> dict:
    """Sample seeded random rank-2 groups, filter by dimension estimate,
    and search each survivor for classical generators."""
    rng = np.random.default_rng(seed)
    groups = []
    attempts = 0
    while len(groups) < samples and attempts < 100 * samples:
        attempts += 1
        group = sample_rank2_group(rng)
        try:
            est = exponent_of_convergence(group, depth)
        except NonConvergedError:
            continue
        groups.append((group, est))

    kept = [(g, e) for g, e in groups if e.value < threshold]

    def attempt(item):
        group, est = item
        result = search_classical_generators(group, budget)
        return group, est, result

    if workers > 1 and len(kept) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, kept))
    else:
        outcomes = [attempt(item) for item in kept]

    failures = []
    budgets_used = []
    for group, est, result in outcomes:
        if isinstance(result, ClassicalCertificate):
            budgets_used.append(result.expansions)
        else:
            budgets_used.append(result.expansions)
            failures.append(
                {
                    "group": group.to_json(),
                    "estimate": est.to_json(),
                    "report": result.to_json(),
                }
            )
    return {
        "samples": samples,
        "threshold": threshold,
        "budget": budget,
        "seed": seed,
        "kept": len(kept),
        "successes": len(kept) - len(failures),
        "success_fraction": (len(kept) - len(failures)) / len(kept) if kept else None,
        "budgets_used": budgets_used,
        "failures": failures,
    }


def cmd_theorem_check(args, config) -> int:
    report = run_theorem_check(
        samples=args.samples,
        threshold=args.threshold,
        budget=args.budget,
        seed=args.seed,
        depth=args.depth,
        workers=worker_count(config),
    )
    write_json(args.out, report, config)
    return EXIT_OK


def cmd_render(args, config) -> int:
    group, _ = load_group(args.file)
    circles = group.pairing.circles if group.pairing else ()
    points = ()
    curve = None
    if args.what in ("limitset", "all"):
        points = sample_limit_set(group, args.depth)
    if args.what in ("quasicircle", "all"):
        zeta = default_generating_curve(group)
        curve = build_quasicircle(group, zeta, args.depth)
    extra = f"what={args.what} depth={args.depth}"
    try:
        render_svg(args.out, config, circles=circles, points=points, curve=curve,
                   extra_comment=extra)
    except OSError as err:
        raise InputError(f"{args.out}: {err}") from err
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schottkylab",
        description="Desk-scale laboratory for rank-g Schottky groups.",
    )
    parser.add_argument("--deterministic", action="store_true",
                        help="single-threaded, byte-stable outputs for a fixed seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_group = sub.add_parser("group", help="group document utilities")
    group_sub = p_group.add_subparsers(dest="group_command", required=True)
    p_validate = group_sub.add_parser("validate", help="parse and verify a group JSON")
    p_validate.add_argument("file")
    p_validate.add_argument("--out")
    p_validate.set_defaults(func=cmd_group_validate)

    p_dim = sub.add_parser("dim", help="estimate the limit-set dimension")
    p_dim.add_argument("file")
    p_dim.add_argument("--method", default=METHOD_EXPONENT,
                       choices=[METHOD_EXPONENT, METHOD_TRANSFER, METHOD_BOXCOUNT])
    p_dim.add_argument("--depth", type=int, default=8)
    p_dim.add_argument("--series-csv", help="also dump (s, partial_sum) samples")
    p_dim.add_argument("--out")
    p_dim.set_defaults(func=cmd_dim)

    p_limit = sub.add_parser("limitset", help="sample the limit set to CSV")
    p_limit.add_argument("file")
    p_limit.add_argument("--depth", type=int, default=6)
    p_limit.add_argument("--out", required=True)
    p_limit.set_defaults(func=cmd_limitset)

    p_qc = sub.add_parser("quasicircle", help="truncated quasi-circle to CSV")
    p_qc.add_argument("file")
    p_qc.add_argument("--depth", type=int, default=4)
    p_qc.add_argument("--out", required=True)
    p_qc.set_defaults(func=cmd_quasicircle)

    p_fr = sub.add_parser("frechet", help="Frechet distance between curve CSVs")
    p_fr.add_argument("curve1")
    p_fr.add_argument("curve2")
    p_fr.add_argument("--classical", action="store_true",
                      help="drop the |len1-len2| term")
    p_fr.add_argument("--out")
    p_fr.set_defaults(func=cmd_frechet)

    p_cl = sub.add_parser("classical", help="search for classical generators")
    p_cl.add_argument("file")
    p_cl.add_argument("--budget", type=int, default=100_000)
    p_cl.add_argument("--out")
    p_cl.set_defaults(func=cmd_classical)

    p_sing = sub.add_parser("singularity", help="classify a domain sequence JSON")
    p_sing.add_argument("file")
    p_sing.add_argument("--out")
    p_sing.set_defaults(func=cmd_singularity)

    p_def = sub.add_parser("deform", help="multiplier-inflation path to classical")
    p_def.add_argument("file")
    p_def.add_argument("--steps", type=int, default=20)
    p_def.add_argument("--depth", type=int, default=7)
    p_def.add_argument("--out", required=True)
    p_def.set_defaults(func=cmd_deform)

    p_thm = sub.add_parser("theorem-check",
                           help="classification check on sampled groups")
    p_thm.add_argument("--samples", type=int, default=25)
    p_thm.add_argument("--threshold", type=float, default=0.85)
    p_thm.add_argument("--budget", type=int, default=100_000)
    p_thm.add_argument("--seed", type=int, default=0)
    p_thm.add_argument("--depth", type=int, default=8)
    p_thm.add_argument("--out")
    p_thm.set_defaults(func=cmd_theorem_check)

    p_r = sub.add_parser("render", help="layered SVG figure")
    p_r.add_argument("file")
    p_r.add_argument("--what", default="all",
                     choices=["limitset", "quasicircle", "domain", "all"])
    p_r.add_argument("--depth", type=int, default=5)
    p_r.add_argument("--out", required=True)
    p_r.set_defaults(func=cmd_render)

    return parser


def _config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        seed=getattr(args, "seed", 0),
        deterministic=bool(getattr(args, "deterministic", False)),
        depth=getattr(args, "depth", None),
        method=getattr(args, "method", None),
        budget=getattr(args, "budget", None),
        threshold=getattr(args, "threshold", None),
        steps=getattr(args, "steps", None),
        samples=getattr(args, "samples", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(args)
    try:
        return args.func(args, config)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergedError as err:
        print(f"non-converged: {err}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except SchottkyLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
