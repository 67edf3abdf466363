"""
Comparison tables for the embedded datasets and text/csv/json rendering of
fits, compound quantities and simulation summaries.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel

from . import config, fixtures
from .fitting import MODEL_NAMES, CountDataset, FitReport, FitResult, fit_at, fit_models
from .performance import Timer

logger = logging.getLogger("ndoppe_report")

FORMATS = ("text", "csv", "json")


def fmt(value: Optional[float]) -> str:
    """Reals with SIGNIFICANT_DIGITS significant digits."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if math.isinf(value) or math.isnan(value):
        return str(value)
    return f"{value:.{config.SIGNIFICANT_DIGITS}g}"


REPRODUCED = "reproduced"
PUBLISHED_NOT_MLE = "published_not_mle"
NOT_REPRODUCED = "not_reproduced"


class ModelAccuracy(BaseModel):
    fitted_max_error: float
    nll_rel_error: float
    chi_sq_rel_error: float
    within_tolerance: bool
    status: str = REPRODUCED


class TableReport(BaseModel):
    name: str
    coeffs: List[float]
    fits: FitReport
    accuracy: Dict[str, ModelAccuracy] = {}


class ReproductionReport(BaseModel):
    tables: List[TableReport]
    metadata: Dict[str, Any] = {}

    def not_reproduced(self) -> List[str]:
        return [t.name for t in self.tables
                if any(a.status == NOT_REPRODUCED for a in t.accuracy.values())]


def _rel(value: float, ref: float) -> float:
    return abs(value - ref) / abs(ref)


def compare_cells(fit: FitResult, published: List[Optional[float]],
                  tol: Dict[str, float]) -> Tuple[float, bool]:
    """
    Largest relative error over the published cells of at least 10, and whether
    every cell is within tolerance. Smaller cells are compared on an absolute
    scale; missing published cells are skipped.
    """
    worst = 0.0
    ok = True
    for value, ref in zip(fit.fitted_counts, published):
        if ref is None:
            continue
        if ref < 10:
            ok = ok and abs(value - ref) <= tol["small_abs"]
        else:
            err = _rel(value, ref)
            ok = ok and err <= tol["fitted"]
            worst = max(worst, err)
    return worst, ok


def explains_published(name: str, fit: FitResult, data: CountDataset) -> bool:
    """
    True when the printed column of `fit.model` is reproduced by the recorded
    non-MLE parameters and the MLE is at least as likely as the printed fit.
    """
    params = fixtures.PUBLISHED_PARAMS.get((name, fit.model))
    ref = fixtures.reference(name, fit.model)
    if params is None or ref is None:
        return False
    tol = fixtures.tolerance_for(name, fit.model)
    printed = fit_at(data, fit.model, params, coeffs=fit.coeffs)
    _, cells_ok = compare_cells(printed, ref["fitted"], tol)
    nll_ok = _rel(printed.nll, ref["nll"]) <= tol["nll"]
    return cells_ok and nll_ok and fit.nll <= ref["nll"]


def grade(name: str, fits: FitReport) -> Dict[str, ModelAccuracy]:
    """
    Score each fit against the published values. Negative binomial fits are
    graded on the NLL only; chi-square is graded for NDOPPE only.
    """
    out = {}
    for fit in fits.fits:
        ref = fixtures.reference(name, fit.model)
        if ref is None:
            continue
        tol = fixtures.tolerance_for(name, fit.model)
        worst, cells_ok = compare_cells(fit, ref["fitted"], tol)
        nll_err = _rel(fit.nll, ref["nll"])
        chi_err = _rel(fit.chi_sq, ref["chi_sq"])
        ok = nll_err <= tol["nll"]
        if fit.model != "negbin":
            ok = ok and cells_ok
        if fit.model == "ndoppe":
            ok = ok and chi_err <= tol["chi_sq"]
        if ok:
            status = REPRODUCED
        elif explains_published(name, fit, fits.dataset):
            status = PUBLISHED_NOT_MLE
        else:
            status = NOT_REPRODUCED
        out[fit.model] = ModelAccuracy(fitted_max_error=worst, nll_rel_error=nll_err,
                                       chi_sq_rel_error=chi_err, within_tolerance=ok, status=status)
    return out


def build_table_report(name: str, models=MODEL_NAMES) -> TableReport:
    data = fixtures.load_fixture(name)
    coeffs = fixtures.TABLE_COEFFS[name]
    fits = fit_models(data, models, coeffs)
    return TableReport(name=name, coeffs=coeffs, fits=fits, accuracy=grade(name, fits))


def run_report(workers: int = config.REPORT_WORKERS, models=MODEL_NAMES) -> ReproductionReport:
    """Fit every embedded dataset; fits are independent and run on a thread pool."""
    timings: Dict[str, Any] = {}
    with Timer("report_total", metadata=timings):
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            tables = list(pool.map(lambda n: build_table_report(n, models), fixtures.FIXTURE_NAMES))
    report = ReproductionReport(tables=tables, metadata={"timings_ms": timings, "workers": workers})
    failing = report.not_reproduced()
    if failing:
        logger.warning(f"published values not reproduced within tolerance for: {', '.join(failing)}")
    return report


# --- rendering ---------------------------------------------------------------

def fit_rows(report: FitReport) -> List[List[str]]:
    models = [f.model for f in report.fits]
    rows = [["count", "observed"] + models]
    for i, (x, obs) in enumerate(report.dataset.cells):
        rows.append([str(x), str(obs)] + [fmt(f.fitted_counts[i]) for f in report.fits])
    rows.append(["total", str(report.dataset.n)] + [fmt(sum(f.fitted_counts)) for f in report.fits])
    params = ["; ".join(f"{k}={fmt(v)}" for k, v in f.params.items()) for f in report.fits]
    rows.append(["params", ""] + params)
    rows.append(["nll", ""] + [fmt(f.nll) for f in report.fits])
    rows.append(["chi_sq", ""] + [fmt(f.chi_sq) for f in report.fits])
    return rows


def _text_table(rows: List[List[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for j, row in enumerate(rows):
        lines.append(" | ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(row, widths))))
        if j == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def _csv(rows: List[List[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def render_fit(report: FitReport, fmt_name: str = "text") -> str:
    if fmt_name == "json":
        return report.model_dump_json(indent=2)
    rows = fit_rows(report)
    if fmt_name == "csv":
        return _csv(rows)
    title = f"Dataset: {report.dataset.name or '(file)'}  n={report.dataset.n}"
    return f"{title}\n{_text_table(rows)}\n"


def render_mapping(values: Dict[str, Any], fmt_name: str = "text") -> str:
    """Flat key/value results (compound quantities, simulation summaries)."""
    if fmt_name == "json":
        return json.dumps(values, indent=2, sort_keys=False)
    rows = [[str(k), fmt(v) if isinstance(v, float) else str(v)] for k, v in values.items()]
    if fmt_name == "csv":
        return _csv([["key", "value"]] + rows)
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{k:<{width}} : {v}" for k, v in rows) + "\n"


_STATUS_LABELS = {REPRODUCED: "yes", PUBLISHED_NOT_MLE: "printed fit not MLE", NOT_REPRODUCED: "NO"}


def render_report(report: ReproductionReport, fmt_name: str = "text") -> str:
    if fmt_name == "json":
        return report.model_dump_json(indent=2)
    if fmt_name == "csv":
        return "\n".join(f"# {t.name}\n{_csv(fit_rows(t.fits))}" for t in report.tables)

    parts = []
    for t in report.tables:
        parts.append(render_fit(t.fits, "text"))
        parts.append(f"NDOPPE coefficients: {','.join(fmt(a) for a in t.coeffs)}\n")
    summary = [["table", "model", "max |rel err| fitted", "rel err nll", "rel err chi_sq", "ok"]]
    for t in report.tables:
        for model, acc in t.accuracy.items():
            summary.append([t.name, model, fmt(acc.fitted_max_error), fmt(acc.nll_rel_error),
                            fmt(acc.chi_sq_rel_error), _STATUS_LABELS[acc.status]])
    parts.append("Agreement with published values\n" + _text_table(summary) + "\n")
    return "\n".join(parts)


def table_csv_files(report: ReproductionReport) -> Dict[str, str]:
    """One CSV document per dataset, keyed by file name."""
    return {f"{t.name}.csv": _csv(fit_rows(t.fits)) for t in report.tables}
