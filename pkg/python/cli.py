"""
Command-line front end.

    ndoppe fit --fixture table1 --models poisson,negbin,ndoppe --coeffs 1,1
    ndoppe report [--format csv --output-dir out/]
    ndoppe compound {pdf|cdf|mean|var|mgf|premium} --model KIND --gamma G ...
    ndoppe simulate {count|aggregate} --model KIND --n N --seed S ...

Data goes to stdout (or --output); diagnostics go to stderr. Exit status is 0
on success, 2 for invalid input and 1 for numerical failures.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from . import config, fixtures, report
from .compound import MODEL_KINDS, make_model
from .errors import (
    DatasetError,
    DomainError,
    NdoppeError,
    ParameterError,
    UnsupportedOperationError,
)
from .fitting import MODEL_NAMES, CountDataset, FitReport, fit_models
from .ndoppe import CoefficientVector
from .simulate import SimConfig, sample_aggregate, sample_counts, summarize

logger = logging.getLogger("ndoppe_cli")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
COMPOUND_ACTIONS = ("pdf", "cdf", "mean", "var", "mgf", "premium")
SIMULATE_ACTIONS = ("count", "aggregate")
COUNT_KINDS = ("ndoppe", "poisson", "negbin")
VALIDATION_ERRORS = (ValidationError, ParameterError, DomainError, DatasetError, UnsupportedOperationError)


def configure_logging(level: Optional[str] = None):
    """Root logger to stderr (plus LOG_FILE when configured)."""
    root_logger = logging.getLogger()
    root_logger.setLevel(level or config.LOG_LEVEL)

    # Clear existing handlers to avoid duplicates on repeated calls
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root_logger.addHandler(stream_handler)

    if config.LOG_FILE:
        file_handler = logging.FileHandler(config.LOG_FILE, mode='a')
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root_logger.addHandler(file_handler)


class RunConfig(BaseModel):
    """Validated view of the parsed command line."""
    command: Literal["fit", "report", "compound", "simulate"]
    action: Optional[str] = None
    format: Literal["text", "csv", "json"] = "text"
    output: Optional[str] = None
    output_dir: Optional[str] = None
    # fit
    fixture: Optional[str] = None
    input: Optional[str] = None
    models: List[str] = list(MODEL_NAMES)
    coeffs: Optional[List[float]] = None
    # report / simulate
    workers: int = config.REPORT_WORKERS
    # compound / simulate
    model: Optional[str] = None
    gamma: Optional[float] = None
    theta: Optional[float] = None
    alpha: Optional[float] = None
    r: Optional[float] = None
    p: Optional[float] = None
    lam: Optional[float] = None
    x: float = 0.0
    t: float = 0.0
    retention: float = 0.0
    seed: int = config.DEFAULT_SEED
    n: Optional[int] = None
    shard_size: int = config.SIM_SHARD_SIZE

    @field_validator("coeffs", mode="before")
    @classmethod
    def _parse_coeffs(cls, v):
        if isinstance(v, str):
            return CoefficientVector.parse(v).as_list()
        return v

    @field_validator("models", mode="before")
    @classmethod
    def _parse_models(cls, v):
        if isinstance(v, str):
            v = [m.strip() for m in v.split(",") if m.strip()]
        unknown = [m for m in v if m not in MODEL_NAMES]
        if unknown:
            raise ValueError(f"unknown model(s) {unknown}; choose from {', '.join(MODEL_NAMES)}")
        return v

    @model_validator(mode="after")
    def _check_sources(self):
        if self.coeffs is not None:
            CoefficientVector(tuple(self.coeffs))
        if self.command == "fit" and (self.fixture is None) == (self.input is None):
            raise ValueError("give exactly one of --fixture or --input")
        if self.command == "simulate" and (self.n is None or self.n < 1):
            raise ValueError("--n must be a positive number of replicates")
        if self.command in ("compound", "simulate") and self.gamma is None \
                and not (self.command == "simulate" and self.action == "count"):
            raise ValueError("--gamma is required")
        return self

    def model_params(self) -> Dict[str, object]:
        return dict(coeffs=self.coeffs, theta=self.theta, alpha=self.alpha,
                    r=self.r, p=self.p, lam=self.lam)


# --- commands ----------------------------------------------------------------

def ingest(path: str) -> CountDataset:
    """Read a `count,frequency` CSV file into a validated dataset."""
    p = Path(path)
    if not p.is_file():
        raise DatasetError(f"input file not found: {path}")
    with open(p, encoding="utf-8") as fh:
        return fixtures.parse_dataset(fh, name=p.stem)


def _emit(text: str, cfg: RunConfig):
    target = config.resolve_output_path(cfg.output)
    if target is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"wrote {target}")


def cmd_fit(cfg: RunConfig) -> FitReport:
    if cfg.fixture is not None:
        data = fixtures.load_fixture(cfg.fixture)
        coeffs = cfg.coeffs or fixtures.TABLE_COEFFS[cfg.fixture]
    else:
        data = ingest(cfg.input)
        coeffs = cfg.coeffs or [1.0, 1.0]
    result = fit_models(data, cfg.models, coeffs)
    _emit(report.render_fit(result, cfg.format), cfg)
    return result


def cmd_report(cfg: RunConfig) -> report.ReproductionReport:
    result = report.run_report(workers=cfg.workers)
    if cfg.format == "csv" and cfg.output_dir:
        out_dir = config.resolve_output_path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in report.table_csv_files(result).items():
            (out_dir / name).write_text(text, encoding="utf-8")
        logger.info(f"wrote {len(result.tables)} table files to {out_dir}")
    else:
        _emit(report.render_report(result, cfg.format), cfg)
    return result


def cmd_compound(cfg: RunConfig) -> Dict[str, object]:
    m = make_model(cfg.model, cfg.gamma, **cfg.model_params())
    values: Dict[str, object] = {"model": m.kind, **m.params()}
    if cfg.action == "pdf":
        values.update(x=cfg.x, pdf=m.pdf(cfg.x), atom=m.atom())
    elif cfg.action == "cdf":
        values.update(x=cfg.x, cdf=m.cdf(cfg.x))
    elif cfg.action == "mean":
        values.update(mean=m.mean())
    elif cfg.action == "var":
        values.update(variance=m.variance())
    elif cfg.action == "mgf":
        values.update(t=cfg.t, mgf=m.mgf(cfg.t))
    elif cfg.action == "premium":
        values.update(retention=cfg.retention, premium=m.stop_loss_premium(cfg.retention))
    else:
        raise ParameterError(f"unknown compound action {cfg.action!r}")
    _emit(report.render_mapping(values, cfg.format), cfg)
    return values


def cmd_simulate(cfg: RunConfig) -> Dict[str, object]:
    sim = SimConfig(seed=cfg.seed, replicates=cfg.n, shard_size=cfg.shard_size, workers=cfg.workers)
    if cfg.action == "count":
        if cfg.model not in COUNT_KINDS:
            raise ParameterError(f"count sampling supports {', '.join(COUNT_KINDS)}, got {cfg.model!r}")
        # the claim-count law of the compound model carries the parameters
        m = make_model(cfg.model, cfg.gamma or 1.0, **cfg.model_params())
        primary = m.primary
        sample = sample_counts(primary, sim)
        expected = {"expected_mean": primary.mean(), "expected_variance": primary.variance(),
                    "expected_atom": float(primary.pmf(0))}
        params = {k: v for k, v in m.params().items() if k != "gamma"}
    elif cfg.action == "aggregate":
        m = make_model(cfg.model, cfg.gamma, **cfg.model_params())
        sample = sample_aggregate(m, sim)
        expected = {"expected_atom": m.atom()}
        try:
            expected.update(expected_mean=m.mean(), expected_variance=m.variance())
        except UnsupportedOperationError:
            pass
        params = m.params()
    else:
        raise ParameterError(f"unknown simulate action {cfg.action!r}")
    summary = summarize(sample, sim)
    values: Dict[str, object] = {"model": cfg.model, **params}
    values.update(summary.model_dump(exclude={"metadata"}))
    values.update(expected)
    values.update(summary.metadata)
    _emit(report.render_mapping(values, cfg.format), cfg)
    return values


# --- argument parsing ----------------------------------------------------------

def _add_output_args(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=report.FORMATS, default="text", help="Output format")
    p.add_argument("--output", help=f"Output file (relative paths go under NDOPPE_OUTPUT_DIR={config.OUTPUT_DIR})")


def _add_model_args(p: argparse.ArgumentParser, kinds):
    p.add_argument("--model", required=True, choices=kinds, help="Claim-count model")
    p.add_argument("--gamma", type=float, help="Exponential claim rate")
    p.add_argument("--coeffs", help="NDOPPE coefficients a0,a1,...")
    p.add_argument("--theta", type=float, help="NDOPPE parameter")
    p.add_argument("--alpha", type=float, help="Poisson rate")
    p.add_argument("--r", type=float, help="Negative binomial size")
    p.add_argument("--p", type=float, help="Negative binomial / dxgamma parameter")
    p.add_argument("--lambda", dest="lam", type=float, help="Discrete Lindley parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ndoppe", description="NDOPPE count models and aggregate claims")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    subparsers = parser.add_subparsers(dest="command")

    # Fit
    fit_parser = subparsers.add_parser("fit", help="Fit count models to a dataset")
    source = fit_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture", choices=fixtures.FIXTURE_NAMES, help="Embedded dataset")
    source.add_argument("--input", help="CSV file with header count,frequency")
    fit_parser.add_argument("--models", default=",".join(MODEL_NAMES), help="Comma separated model list")
    fit_parser.add_argument("--coeffs", help="NDOPPE coefficients a0,a1,...")
    _add_output_args(fit_parser)

    # Report
    report_parser = subparsers.add_parser("report", help="Fit all embedded datasets and compare")
    report_parser.add_argument("--workers", type=int, default=config.REPORT_WORKERS)
    report_parser.add_argument("--output-dir", help="With --format csv: write one file per table here")
    _add_output_args(report_parser)

    # Compound
    compound_parser = subparsers.add_parser("compound", help="Aggregate claim quantities")
    compound_parser.add_argument("action", choices=COMPOUND_ACTIONS)
    _add_model_args(compound_parser, MODEL_KINDS)
    compound_parser.add_argument("--x", type=float, default=0.0, help="Claim amount for pdf/cdf")
    compound_parser.add_argument("--t", type=float, default=0.0, help="Argument of the mgf")
    compound_parser.add_argument("--retention", type=float, default=0.0, help="Stop-loss retention")
    _add_output_args(compound_parser)

    # Simulate
    simulate_parser = subparsers.add_parser("simulate", help="Seeded Monte-Carlo sampling")
    simulate_parser.add_argument("action", choices=SIMULATE_ACTIONS)
    _add_model_args(simulate_parser, MODEL_KINDS)
    simulate_parser.add_argument("--n", type=int, required=True, help="Number of replicates")
    simulate_parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    simulate_parser.add_argument("--workers", type=int, default=1)
    simulate_parser.add_argument("--shard-size", type=int, default=config.SIM_SHARD_SIZE)
    _add_output_args(simulate_parser)

    return parser


def _to_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "verbose"}
    return RunConfig(**values)


def error_message(e: Exception) -> str:
    """One line for stderr; pydantic errors are reduced to their first message."""
    if isinstance(e, ValidationError):
        first = e.errors()[0]
        msg = first["msg"].removeprefix("Value error, ")
        loc = ".".join(str(part) for part in first.get("loc", ()))
        return f"{loc}: {msg}" if loc else msg
    return str(e)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging("DEBUG" if args.verbose else None)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        cfg = _to_config(args)
        if cfg.command == "fit":
            cmd_fit(cfg)
        elif cfg.command == "report":
            cmd_report(cfg)
        elif cfg.command == "compound":
            cmd_compound(cfg)
        elif cfg.command == "simulate":
            cmd_simulate(cfg)
    except VALIDATION_ERRORS as e:
        logger.debug("validation failure", exc_info=True)
        print(f"error: {error_message(e)}", file=sys.stderr)
        return 2
    except (NdoppeError, ArithmeticError) as e:
        logger.debug("numerical failure", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
