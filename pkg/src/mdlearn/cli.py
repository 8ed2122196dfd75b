"""Command-line entry point: ``mdlearn {learnability,correlate,identify,plot-data}``.

Exit codes: 0 on success (unlearnable constructions and exhausted runs are
results, not failures), 2 on invalid input, 1 on internal errors.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
from pathlib import Path

from . import ingest
from .errors import InsufficientData, MDLearnError
from .identification import IdentificationConfig, RunTrace, run_seeds
from .learnability import (
    COCA_WORDS,
    DEFAULT_ANNUAL_EXPOSURE,
    DEFAULT_SYMBOLS,
    ExposureModel,
    evaluate,
)
from .stats import correlate, relative_grammaticality

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def cmd_learnability(args) -> int:
    specs = ingest.load_constructions(args.constructions)
    exposure = ExposureModel(args.corpus_words, args.exposure)
    results = [evaluate(s, args.symbols, exposure, smoothing=args.smoothing) for s in specs]
    ingest.write_report(args.out, results)
    return EXIT_OK


def cmd_correlate(args) -> int:
    results = ingest.load_report(args.report)
    judgments = ingest.load_judgments(args.judgments)
    outcome = correlate(results, judgments)
    for cid, reason in outcome.excluded:
        _warn(f"excluded {cid}: {reason}")
    ingest.write_correlations(args.out, outcome.reports)
    return EXIT_OK


def _summary(traces: list[RunTrace], exhausted: list[int], true_index: int) -> str:
    total = len(traces) + len(exhausted)
    conv = [t for t in traces if t.converged]
    steps = [t.convergence_step for t in conv]
    median = statistics.median(steps) if steps else float("nan")
    frac = len(conv) / total if total else float("nan")
    true_elim = sum(t.true_eliminated for t in traces)
    return (
        f"runs={total} true_index={true_index} converged={len(conv)} fraction={frac:.4f} "
        f"median_convergence_step={ingest.fmt(median)} true_eliminated={true_elim} "
        f"exhausted={len(exhausted)}"
    )


def cmd_identify(args) -> int:
    family = ingest.load_family(args.family)
    config = IdentificationConfig(delta=args.delta, n_max=args.samples, seed=args.seed)
    seeds = range(args.seed, args.seed + args.seeds)
    out_dir = ingest.ensure_dir(args.out) if args.out else None
    traces, exhausted = [], []
    for seed, res in run_seeds(family, config, seeds):
        if isinstance(res, MDLearnError):
            exhausted.append(seed)
            _warn(f"seed {seed}: {res}")
            continue
        traces.append(res)
        if out_dir is not None:
            ingest.write_trace(out_dir / f"trace_seed{seed}.csv", res)
    print(_summary(traces, exhausted, family.true_index))
    return EXIT_OK


def _svg_scatter(points, xlabel: str, ylabel: str) -> str:
    w, h, pad = 480, 360, 50
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (w - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (h - 2 * pad) / ((y1 - y0) or 1.0)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
        f'<text x="{w // 2}" y="{h - 12}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="14" y="{h // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 14 {h // 2})">{ylabel}</text>',
    ]
    for label, x, y in points:
        cx = pad + (x - x0) * sx
        cy = h - pad - (y - y0) * sy
        out.append(f'<circle class="marker" cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="steelblue">'
                   f'<title>{label}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot_data(args) -> int:
    results = ingest.load_report(args.report)
    bars = sorted(results, key=lambda r: (r.n_years, r.construction_id))
    rows = [["years", r.construction_id, i, ingest.fmt(r.n_years)] for i, r in enumerate(bars, start=1)]

    scatter = []
    if args.judgments:
        judged = {j.construction_id: j for j in ingest.load_judgments(args.judgments)}
        for r in sorted(results, key=lambda r: r.construction_id):
            j = judged.get(r.construction_id)
            if j is None:
                _warn(f"{r.construction_id}: no judgment row, left out of the scatter")
                continue
            if not (math.isfinite(r.learnability) and math.isfinite(r.entrenchment)):
                _warn(f"{r.construction_id}: non-finite score, left out of the scatter")
                continue
            scatter.append((r.construction_id, r.learnability, r.entrenchment, relative_grammaticality(j)))
        for var, col in (("learnability", 1), ("entrenchment", 2)):
            rows += [[var, p[0], ingest.fmt(p[col]), ingest.fmt(p[3])] for p in scatter]

    ingest._write_csv(args.out, ["figure", "label", "x", "y"], rows)
    if args.svg:
        if not scatter:
            raise InputError("--svg needs --judgments with at least one joinable construction")
        pts = [(p[0], p[1], p[3]) for p in scatter]
        Path(args.svg).write_text(
            _svg_scatter(pts, "learnability log10(1/N_years)", "relative grammaticality"),
            encoding="utf-8",
        )
    return EXIT_OK


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _symbols(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError("symbol inventory must be >= 2")
    return v


def _delta(s: str) -> float:
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("delta must lie in (0, 1)")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learnability", help="years-to-learn report for each construction")
    p.add_argument("--constructions", required=True, help="constructions JSON file")
    p.add_argument("--out", default="-", help="report CSV (default: stdout)")
    p.add_argument("--symbols", type=_symbols, default=DEFAULT_SYMBOLS,
                   help="total symbols in the original grammar (default %(default)s)")
    p.add_argument("--corpus-words", type=_positive_int, default=COCA_WORDS,
                   help="words in the corpus the counts come from (default %(default)s, the size of COCA)")
    p.add_argument("--exposure", type=_positive_int, default=DEFAULT_ANNUAL_EXPOSURE,
                   help="words heard per year (default %(default)s; a configuration default, "
                        "not an empirical estimate)")
    p.add_argument("--smoothing", action="store_true",
                   help="add-one smoothing instead of failing when a disallowed form occurs")
    p.set_defaults(func=cmd_learnability)

    p = sub.add_parser("correlate", help="correlate judgments with learnability and entrenchment")
    p.add_argument("--report", required=True, help="report CSV from 'learnability'")
    p.add_argument("--judgments", required=True, help="judgments CSV")
    p.add_argument("--out", default="-", help="correlations CSV (default: stdout)")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("identify", help="simulate identification of a distribution from samples")
    p.add_argument("--family", required=True, help="hypothesis family JSON file")
    p.add_argument("--out", help="directory for per-seed trace CSVs (omit to print only the summary)")
    p.add_argument("--delta", type=_delta, default=0.01, help="band failure probability (default %(default)s)")
    p.add_argument("--samples", type=_positive_int, default=2000, help="samples per run (default %(default)s)")
    p.add_argument("--seeds", type=_positive_int, default=1, help="number of runs (default %(default)s)")
    p.add_argument("--seed", type=_seed, default=0, help="first seed; runs use seed, seed+1, ... (default %(default)s)")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("plot-data", help="bar and scatter data for the years and judgment plots")
    p.add_argument("--report", required=True, help="report CSV from 'learnability'")
    p.add_argument("--judgments", help="judgments CSV; adds the two scatter series")
    p.add_argument("--out", default="-", help="plot-data CSV (default: stdout)")
    p.add_argument("--svg", help="write the learnability scatter as SVG")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (MDLearnError, InputError, OSError) as exc:
        if isinstance(exc, InsufficientData):
            print(f"error: insufficient data: {exc}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
