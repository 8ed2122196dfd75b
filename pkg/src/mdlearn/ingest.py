"""Reading and writing construction specs, judgments, reports, families and traces.

Construction specs and hypothesis families are JSON; everything tabular is
UTF-8 CSV with a header row. CSV inputs may carry ``#`` comment lines.
Numbers are written at 6 significant digits, with ``inf``/``-inf`` for
unlearnable values, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .constructions import ConstructionSpec, ContextBlock, FormOption
from .errors import ParseError, ValidationError
from .identification import (
    ExactSchedule,
    GeometricGapSchedule,
    Hypothesis,
    HypothesisFamily,
    LanguageIndex,
    RationalPMF,
    RunTrace,
    StaircaseSchedule,
)
from .learnability import LearnabilityResult
from .stats import CorrelationReport, JudgmentRow

REPORT_COLUMNS = [
    "construction_id", "grammar_delta_bits", "savings_bits", "O_needed",
    "O_year", "N_years", "learnability", "entrenchment",
]
JUDGMENT_COLUMNS = ["construction_id", "mean_grammatical", "mean_ungrammatical", "n"]
CORRELATION_COLUMNS = ["variable", "r", "p", "n"]
TRACE_COLUMNS = ["n", "guess", "eliminated", "epsilon"]
CORRELATION_ORDER = ("learnability", "entrenchment")


def fmt(x) -> str:
    """6 significant digits; exact for integers; ``inf``/``-inf``/``nan``."""
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, ".6g")


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}", path) from None


def _load_json(path):
    text = _read_text(path)
    if not text.strip():
        raise ParseError("file is empty", path, 1)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None


def _require(obj, key, where, kind=None):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ValidationError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    if kind is int and isinstance(val, bool):
        raise ValidationError(f"{where}.{key}: expected int")
    return val


# -- constructions -------------------------------------------------------------


def spec_from_dict(d: dict, where: str = "construction") -> ConstructionSpec:
    cid = _require(d, "id", where, str)
    where = f"{where} {cid!r}"
    diag = _require(d, "diagnostic", where, dict)
    contexts = []
    for ci, c in enumerate(_require(d, "contexts", where, list)):
        cw = f"{where}.contexts[{ci}]"
        options = []
        for oi, o in enumerate(_require(c, "options", cw, list)):
            ow = f"{cw}.options[{oi}]"
            options.append(
                FormOption(
                    _require(o, "form", ow, str),
                    _require(o, "allowed", ow, bool),
                    _require(o, "count", ow, int),
                )
            )
        try:
            contexts.append(ContextBlock(_require(c, "id", cw, str), tuple(options)))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return ConstructionSpec(
        id=cid,
        name=d.get("name", cid),
        n_new_symbols=_require(d, "n_new_symbols", where, int),
        contexts=tuple(contexts),
        diagnostic=(_require(diag, "context", where + ".diagnostic", str),
                    _require(diag, "form", where + ".diagnostic", str)),
    )


def spec_to_dict(spec: ConstructionSpec) -> dict:
    return {
        "id": spec.id,
        "name": spec.name,
        "n_new_symbols": spec.n_new_symbols,
        "diagnostic": {"context": spec.diagnostic[0], "form": spec.diagnostic[1]},
        "contexts": [
            {
                "id": c.context_id,
                "options": [{"form": o.form_id, "allowed": o.allowed, "count": o.count} for o in c.options],
            }
            for c in spec.contexts
        ],
    }


def load_constructions(path) -> list[ConstructionSpec]:
    """Load and validate a constructions file.

    The top level is either a list of construction objects or an object
    with a ``constructions`` list (other keys, such as ``_comment``, are
    ignored).
    """
    data = _load_json(path)
    if isinstance(data, dict):
        if "constructions" not in data:
            raise ValidationError(f"{path}: top-level object has no 'constructions' list")
        data = data["constructions"]
    if not isinstance(data, list):
        raise ValidationError(f"{path}: expected a list of constructions")
    if not data:
        raise ParseError("no constructions in file", path)
    specs = []
    seen = set()
    for i, d in enumerate(data):
        try:
            spec = spec_from_dict(d, where=f"constructions[{i}]")
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
        if spec.id in seen:
            raise ValidationError(f"{path}: duplicate construction id {spec.id!r}")
        seen.add(spec.id)
        specs.append(spec)
    return specs


def write_constructions(path, specs: Iterable[ConstructionSpec], comment: str | None = None) -> None:
    body: object = [spec_to_dict(s) for s in specs]
    if comment is not None:
        body = {"_comment": comment, "constructions": body}
    Path(path).write_text(json.dumps(body, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# -- CSV helpers ---------------------------------------------------------------


def _csv_rows(path, columns: Sequence[str]):
    """Yield ``(line_number, row_dict)`` skipping blank and ``#`` lines."""
    text = _read_text(path)
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("file is empty", path, 1)
    header_line, header = lines[0]
    names = next(csv.reader([header]))
    names = [c.strip() for c in names]
    missing = [c for c in columns if c not in names]
    if missing:
        raise ParseError(f"header lacks columns {missing}", path, header_line)
    for lineno, ln in lines[1:]:
        values = next(csv.reader([ln]))
        if len(values) != len(names):
            raise ParseError(f"expected {len(names)} fields, got {len(values)}", path, lineno)
        yield lineno, dict(zip(names, (v.strip() for v in values)))


def _num(row, key, path, lineno, conv=float):
    try:
        return conv(row[key])
    except ValueError:
        raise ParseError(f"column {key!r}: cannot parse {row[key]!r}", path, lineno) from None


def _write_csv(path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    data = buf.getvalue()
    if path == "-" or path is None:
        import sys
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)


# -- judgments -----------------------------------------------------------------


def load_judgments(path) -> list[JudgmentRow]:
    rows = []
    seen = set()
    for lineno, r in _csv_rows(path, JUDGMENT_COLUMNS):
        cid = r["construction_id"]
        if not cid:
            raise ParseError("empty construction_id", path, lineno)
        if cid in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate construction id {cid!r}")
        seen.add(cid)
        try:
            rows.append(JudgmentRow(
                cid,
                _num(r, "mean_grammatical", path, lineno),
                _num(r, "mean_ungrammatical", path, lineno),
                _num(r, "n", path, lineno, int),
            ))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return rows


def write_judgments(path, rows: Iterable[JudgmentRow]) -> None:
    _write_csv(path, JUDGMENT_COLUMNS, [
        [j.construction_id, fmt(j.mean_grammatical), fmt(j.mean_ungrammatical), j.n_respondents]
        for j in rows
    ])


# -- reports -------------------------------------------------------------------


def write_report(path, results: Iterable[LearnabilityResult]) -> None:
    rows = []
    for r in sorted(results, key=lambda r: r.construction_id):
        o_needed = r.o_needed
        if isinstance(o_needed, float) and o_needed.is_integer():
            o_needed = int(o_needed)
        rows.append([
            r.construction_id, fmt(r.grammar_delta), fmt(r.savings), fmt(o_needed),
            fmt(r.o_year), fmt(r.n_years), fmt(r.learnability), fmt(r.entrenchment),
        ])
    _write_csv(path, REPORT_COLUMNS, rows)


def _count(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def load_report(path) -> list[LearnabilityResult]:
    out = []
    for lineno, r in _csv_rows(path, REPORT_COLUMNS):
        out.append(LearnabilityResult(
            construction_id=r["construction_id"],
            grammar_delta=_num(r, "grammar_delta_bits", path, lineno),
            savings=_num(r, "savings_bits", path, lineno),
            o_needed=_num(r, "O_needed", path, lineno, _count),
            o_year=_num(r, "O_year", path, lineno),
            n_years=_num(r, "N_years", path, lineno),
            learnability=_num(r, "learnability", path, lineno),
            entrenchment=_num(r, "entrenchment", path, lineno),
        ))
    return out


def write_correlations(path, reports: Iterable[CorrelationReport]) -> None:
    rank = {name: i for i, name in enumerate(CORRELATION_ORDER)}
    ordered = sorted(reports, key=lambda c: (rank.get(c.variable, len(rank)), c.variable))
    _write_csv(path, CORRELATION_COLUMNS, [[c.variable, fmt(c.r), fmt(c.p), c.n] for c in ordered])


def load_correlations(path) -> list[CorrelationReport]:
    return [
        CorrelationReport(
            r["variable"],
            _num(r, "r", path, lineno),
            _num(r, "p", path, lineno),
            _num(r, "n", path, lineno, int),
        )
        for lineno, r in _csv_rows(path, CORRELATION_COLUMNS)
    ]


# -- hypothesis families ---------------------------------------------------------


def _fraction(v, where):
    try:
        if isinstance(v, bool) or isinstance(v, float):
            raise ValueError
        return Fraction(v)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ValidationError(f"{where}: expected an exact rational such as \"1/3\", got {v!r}") from None


def _schedule_from_dict(d, where):
    if d is None:
        return GeometricGapSchedule()
    kind = _require(d, "kind", where, str)
    if kind == "geometric":
        rate = _fraction(d.get("rate", "1/2"), where + ".rate")
        try:
            return GeometricGapSchedule(rate)
        except ValueError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    if kind == "staircase":
        table = _require(d, "table", where, dict)
        return StaircaseSchedule({
            x: [_fraction(v, f"{where}.table[{x!r}]") for v in vals] for x, vals in table.items()
        })
    if kind == "exact":
        return ExactSchedule()
    raise ValidationError(f"{where}: unknown schedule kind {kind!r}")


def family_from_dict(d) -> HypothesisFamily:
    try:
        return _family_from_dict(d)
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(f"family: {exc}") from None


def _family_from_dict(d) -> HypothesisFamily:
    elements = _require(d, "elements", "family", list)
    hyps = []
    for i, h in enumerate(_require(d, "hypotheses", "family", list), start=1):
        where = f"family.hypotheses[{i}]"
        masses = _require(h, "masses", where, dict)
        pmf = RationalPMF(
            {x: _fraction(v, f"{where}.masses[{x!r}]") for x, v in masses.items()},
            kind=h.get("kind"),
        )
        hyps.append(Hypothesis(pmf, _schedule_from_dict(h.get("schedule"), where + ".schedule")))
    return HypothesisFamily(LanguageIndex(elements), tuple(hyps), _require(d, "true_index", "family", int))


def load_family(path) -> HypothesisFamily:
    try:
        return family_from_dict(_load_json(path))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def family_to_dict(family: HypothesisFamily) -> dict:
    def sched(s):
        if isinstance(s, GeometricGapSchedule):
            return {"kind": "geometric", "rate": str(s.rate)}
        if isinstance(s, ExactSchedule):
            return {"kind": "exact"}
        return {"kind": "staircase", "table": {x: [str(v) for v in vals] for x, vals in s.table.items()}}

    return {
        "elements": list(family.language),
        "true_index": family.true_index,
        "hypotheses": [
            {"masses": {x: str(v) for x, v in h.pmf.masses.items()}, "kind": h.pmf.kind,
             "schedule": sched(h.schedule)}
            for h in family.hypotheses
        ],
    }


def write_trace(path, trace: RunTrace) -> None:
    rows = []
    for rec in trace.records():
        rows.append([rec.n, rec.guess, ";".join(str(i) for i in sorted(rec.eliminated)), fmt(rec.epsilon)])
    _write_csv(path, TRACE_COLUMNS, rows)


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
