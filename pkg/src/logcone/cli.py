"""Batch command line for the log-metric toolkit.

Every command is a pure function of its input files and flags: JSON output
is emitted with sorted keys and shortest round-trip floats, so identical
inputs produce byte-identical bytes.  Exit codes: 0 success, 1 usage,
2 parse or schema error, 3 non-positive data, 4 degenerate input,
5 singular covariance, 6 dependent constraints, 7 non-adapted process,
8 Doob decomposition requested for a non-submartingale.
"""

from __future__ import annotations

import csv
import json
import math
import sys

import click
import numpy as np

from . import __version__
from .cone_geometry import (
    PositiveDomainError,
    PositiveVector,
    geodesic,
    geometric_mean,
    log_distance,
)
from .discrete_prob import (
    MARTINGALE,
    SUBMARTINGALE,
    AdaptedProcess,
    FiniteSpace,
    Filtration,
    NotAdaptedError,
    NotSubmartingaleError,
    Partition,
    RandomVariable,
    classify_l_martingale,
    classify_ordinary_martingale,
    doob_decompose,
)
from .limit_lab import (
    DegenerateDistributionError,
    PositiveDistribution,
    TrialConfig,
    clt_experiment,
    ks_critical_value,
    lln_experiment,
)
from .lmoments import (
    DegenerateRegressorError,
    Sample,
    SingularCovarianceError,
    empirical_l_variance,
    fit_power_law,
    l_covariance,
    l_mean,
    l_mean_jensen_gap,
)
from .portfolio_opt import (
    DependentConstraintsError,
    ReturnsPanel,
    efficient_frontier,
    estimate_log_moments,
    min_lvar_portfolio,
    portfolio_stats,
)

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_DEGENERATE = 4
EXIT_SINGULAR = 5
EXIT_DEPENDENT = 6
EXIT_NOT_ADAPTED = 7
EXIT_DOOB = 8


class PanelFormatError(ValueError):
    """A CSV panel cannot be parsed."""


class PanelDomainError(ValueError):
    """A parsed CSV cell is not strictly positive and finite."""


class SchemaError(ValueError):
    """An experiment spec violates its schema; carries a JSON-pointer path."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer

    def __str__(self) -> str:
        base = super().__str__()
        return f"at {self.pointer or '/'}: {base}"


# --------------------------------------------------------------------------
# input parsing


def _read_panel(path: str) -> tuple[list[str], np.ndarray]:
    """Parse a CSV panel: header of labels, then rows of positive decimals."""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise PanelFormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError as exc:
        raise PanelFormatError(f"{path} is not valid UTF-8: {exc}") from None
    if not rows:
        raise PanelFormatError(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0]]
    if not header or any(not label for label in header):
        raise PanelFormatError(f"{path}: line 1: the header must name every column")
    width = len(header)
    data = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise PanelFormatError(
                f"{path}: line {line_no}: expected {width} fields, found {len(row)}"
            )
        parsed = []
        for col_no, cell in enumerate(row, start=1):
            text = cell.strip()
            try:
                value = float(text)
            except ValueError:
                raise PanelFormatError(
                    f"{path}: line {line_no}, column {col_no}: cannot parse {text!r} as a number"
                ) from None
            if not math.isfinite(value) or value <= 0.0:
                raise PanelDomainError(
                    f"{path}: line {line_no}, column {col_no} ({header[col_no - 1]}): "
                    f"value {text!r} must be strictly positive and finite"
                )
            parsed.append(value)
        data.append(parsed)
    if not data:
        raise PanelFormatError(f"{path}: no data rows")
    return header, np.array(data)


def _resolve_column(labels: list[str], name: str) -> int:
    if name in labels:
        return labels.index(name)
    try:
        index = int(name)
    except ValueError:
        raise PanelFormatError(f"column {name!r} not found; available: {', '.join(labels)}") from None
    if not 0 <= index < len(labels):
        raise PanelFormatError(f"column index {index} out of range for {len(labels)} columns")
    return index


def _parse_inline_vector(text: str) -> PositiveVector:
    parts = [piece.strip() for piece in text.split(",")]
    try:
        values = [float(piece) for piece in parts]
    except ValueError:
        raise click.UsageError(f"cannot parse vector {text!r}; expected comma-separated numbers") from None
    return PositiveVector(values)


def _collect_points(
    inline: tuple[str, ...], panel_path: str | None, exactly: int | None = None
) -> list[PositiveVector]:
    if panel_path is not None:
        if inline:
            raise click.UsageError("give either inline vectors or --panel, not both")
        _, data = _read_panel(panel_path)
        points = [PositiveVector(row) for row in data]
        if exactly is not None and len(points) != exactly:
            raise PanelFormatError(f"{panel_path}: expected exactly {exactly} rows, found {len(points)}")
    else:
        if exactly is not None and len(inline) != exactly:
            raise click.UsageError(f"expected exactly {exactly} vectors, got {len(inline)}")
        if not inline:
            raise click.UsageError("give at least one vector or --panel")
        points = [_parse_inline_vector(text) for text in inline]
    return points


# --------------------------------------------------------------------------
# experiment spec schemas (hand-rolled; errors carry JSON-pointer paths)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None


def _as_object(value, pointer: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError("expected an object", pointer)
    return value


def _as_array(value, pointer: str) -> list:
    if not isinstance(value, list):
        raise SchemaError("expected an array", pointer)
    return value


def _require(obj: dict, key: str, pointer: str):
    if key not in obj:
        raise SchemaError("missing required key", f"{pointer}/{key}")
    return obj[key]


def _as_number(value, pointer: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", pointer)
    if not math.isfinite(value):
        raise SchemaError("expected a finite number", pointer)
    return float(value)


def _as_int(value, pointer: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError("expected an integer", pointer)
    return value


def _parse_distribution(doc, pointer: str) -> PositiveDistribution:
    obj = _as_object(doc, pointer)
    family = _require(obj, "family", pointer)
    if family == "lognormal":
        mu = _as_number(_require(obj, "mu", pointer), f"{pointer}/mu")
        sigma = _as_number(_require(obj, "sigma", pointer), f"{pointer}/sigma")
        if sigma <= 0.0:
            raise SchemaError("sigma must be positive", f"{pointer}/sigma")
        return PositiveDistribution.lognormal(mu, sigma)
    if family == "uniform":
        lo = _as_number(_require(obj, "lo", pointer), f"{pointer}/lo")
        hi = _as_number(_require(obj, "hi", pointer), f"{pointer}/hi")
        if lo <= 0.0:
            raise SchemaError("lo must be positive", f"{pointer}/lo")
        if hi <= lo:
            raise SchemaError("hi must exceed lo", f"{pointer}/hi")
        return PositiveDistribution.uniform(lo, hi)
    if family == "pareto":
        x_min = _as_number(_require(obj, "x_min", pointer), f"{pointer}/x_min")
        alpha = _as_number(_require(obj, "alpha", pointer), f"{pointer}/alpha")
        if x_min <= 0.0:
            raise SchemaError("x_min must be positive", f"{pointer}/x_min")
        if alpha <= 2.0:
            raise SchemaError("alpha must exceed 2", f"{pointer}/alpha")
        return PositiveDistribution.pareto(x_min, alpha)
    if family == "point_mass":
        c = _as_number(_require(obj, "c", pointer), f"{pointer}/c")
        if c <= 0.0:
            raise SchemaError("c must be positive", f"{pointer}/c")
        return PositiveDistribution.point_mass(c)
    raise SchemaError(
        "family must be one of lognormal, uniform, pareto, point_mass", f"{pointer}/family"
    )


def _parse_trials(doc, pointer: str) -> TrialConfig:
    obj = _as_object(doc, pointer)
    size = _as_int(_require(obj, "sample_size", pointer), f"{pointer}/sample_size")
    if size < 1:
        raise SchemaError("sample_size must be >= 1", f"{pointer}/sample_size")
    trials = _as_int(_require(obj, "num_trials", pointer), f"{pointer}/num_trials")
    if trials < 1:
        raise SchemaError("num_trials must be >= 1", f"{pointer}/num_trials")
    seed = _as_int(_require(obj, "seed", pointer), f"{pointer}/seed")
    return TrialConfig(sample_size=size, num_trials=trials, seed=seed)


def _parse_simulate_spec(path: str):
    raw = _load_json(path)
    root = _as_object(raw, "")
    dist = _parse_distribution(_require(root, "distribution", ""), "/distribution")
    cfg = _parse_trials(_require(root, "trials", ""), "/trials")
    ladder = None
    if "ladder" in root:
        items = _as_array(root["ladder"], "/ladder")
        ladder = []
        for i, item in enumerate(items):
            size = _as_int(item, f"/ladder/{i}")
            if size < 1:
                raise SchemaError("ladder sizes must be >= 1", f"/ladder/{i}")
            ladder.append(size)
        if not ladder:
            raise SchemaError("ladder must not be empty", "/ladder")
    return raw, dist, cfg, ladder


def _parse_martingale_spec(path: str):
    raw = _load_json(path)
    root = _as_object(raw, "")
    space_obj = _as_object(_require(root, "space", ""), "/space")
    probs_doc = _as_array(_require(space_obj, "probs", "/space"), "/space/probs")
    probs = []
    for i, item in enumerate(probs_doc):
        p = _as_number(item, f"/space/probs/{i}")
        if p <= 0.0:
            raise SchemaError("atom probabilities must be positive", f"/space/probs/{i}")
        probs.append(p)
    if not probs:
        raise SchemaError("need at least one atom", "/space/probs")
    if abs(sum(probs) - 1.0) > 1e-12:
        raise SchemaError("atom probabilities must sum to 1", "/space/probs")
    space = FiniteSpace(probs)
    num_atoms = space.num_atoms

    filtration_doc = _as_array(_require(root, "filtration", ""), "/filtration")
    if not filtration_doc:
        raise SchemaError("need at least one partition", "/filtration")
    partitions = []
    for t, partition_doc in enumerate(filtration_doc):
        blocks_doc = _as_array(partition_doc, f"/filtration/{t}")
        blocks = []
        for bi, block_doc in enumerate(blocks_doc):
            block = []
            for j, item in enumerate(_as_array(block_doc, f"/filtration/{t}/{bi}")):
                atom = _as_int(item, f"/filtration/{t}/{bi}/{j}")
                if not 0 <= atom < num_atoms:
                    raise SchemaError(
                        f"atom index must lie in [0, {num_atoms - 1}]", f"/filtration/{t}/{bi}/{j}"
                    )
                block.append(atom)
            blocks.append(block)
        try:
            partitions.append(Partition(blocks))
        except ValueError as exc:
            raise SchemaError(str(exc), f"/filtration/{t}") from None
    try:
        filtration = Filtration(partitions)
    except ValueError as exc:
        raise SchemaError(str(exc), "/filtration") from None

    process_doc = _as_array(_require(root, "process", ""), "/process")
    if len(process_doc) != len(partitions):
        raise SchemaError(
            f"need one variable per filtration time ({len(partitions)})", "/process"
        )
    variables = []
    width = None
    for t, variable_doc in enumerate(process_doc):
        rows_doc = _as_array(variable_doc, f"/process/{t}")
        if len(rows_doc) != num_atoms:
            raise SchemaError(f"need one value per atom ({num_atoms})", f"/process/{t}")
        rows = []
        for k, row_doc in enumerate(rows_doc):
            if isinstance(row_doc, list):
                row = [
                    _as_number(item, f"/process/{t}/{k}/{j}") for j, item in enumerate(row_doc)
                ]
            else:
                row = [_as_number(row_doc, f"/process/{t}/{k}")]
            if any(value <= 0.0 for value in row):
                raise SchemaError("process values must be strictly positive", f"/process/{t}/{k}")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise SchemaError(f"expected {width} components", f"/process/{t}/{k}")
            rows.append(row)
        variables.append(RandomVariable(np.array(rows)))
    return raw, space, filtration, variables


# --------------------------------------------------------------------------
# output


def _jsonify(value):
    if isinstance(value, dict):
        return {str(key): _jsonify(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonify(value.tolist())
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _emit_json(payload: dict) -> None:
    click.echo(json.dumps(_jsonify(payload), sort_keys=True, indent=2))


def _emit_csv(header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(value)) for value in row))
    click.echo("\n".join(lines))


# --------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__, prog_name="logcone")
def cli():
    """Log-metric statistics on the positive cone: batch front end."""


@cli.command()
@click.argument("panel", type=click.Path(dir_okay=False))
def stats(panel):
    """Log-moment summary of a CSV panel (rows are observations)."""
    _, data = _read_panel(panel)
    s = Sample(data)
    payload = {
        "l_mean": l_mean(s).values,
        "arithmetic_mean": s.weights @ s.data,
        "jensen_gap": l_mean_jensen_gap(s),
        "log_covariance": l_covariance(s, s),
        "empirical_l_variance": empirical_l_variance(s) if s.num_observations >= 2 else None,
    }
    _emit_json(payload)


@cli.command()
@click.argument("panel", type=click.Path(dir_okay=False))
@click.option("--x", "x_column", required=True, help="Predictor column (label or index).")
@click.option("--y", "y_column", required=True, help="Response column (label or index).")
def predict(panel, x_column, y_column):
    """Best power-law predictor y = a*x^b in the log metric."""
    labels, data = _read_panel(panel)
    xi = _resolve_column(labels, x_column)
    yi = _resolve_column(labels, y_column)
    fit = fit_power_law(Sample(data[:, xi]), Sample(data[:, yi]))
    _emit_json(
        {
            "a": fit.a,
            "b": fit.b,
            "D": fit.d_denominator,
            "residual_log_variance": fit.residual_lvar,
            "m_ell_predictor": fit.m_ell_predictor,
            "predictor_log_variance": fit.predictor_log_variance,
        }
    )


def _panel_from_csv(path: str) -> ReturnsPanel:
    labels, data = _read_panel(path)
    try:
        return ReturnsPanel(data, labels)
    except ValueError as exc:
        raise PanelFormatError(f"{path}: {exc}") from None


@cli.command()
@click.argument("panel", type=click.Path(dir_okay=False))
@click.option("--target", type=float, required=True, help="Target expected log return.")
@click.option(
    "--target-is-gross",
    is_flag=True,
    help="Interpret --target as a gross l-mean target e^mu and convert.",
)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def portfolio(panel, target, target_is_gross, fmt):
    """Minimum-log-variance weights for one target log return."""
    returns_panel = _panel_from_csv(panel)
    if target_is_gross:
        if target <= 0.0:
            raise click.UsageError("a gross target must be positive")
        target = math.log(target)
    moments = estimate_log_moments(returns_panel)
    weights = min_lvar_portfolio(moments, target)
    growth, variance = portfolio_stats(moments, weights)
    if fmt == "json":
        _emit_json(
            {
                "labels": list(returns_panel.labels),
                "target_mu": target,
                "weights": weights.w,
                "log_growth": growth,
                "log_variance": variance,
            }
        )
    else:
        header = ["target_mu", "log_growth", "log_variance"] + [
            f"w_{i + 1}" for i in range(weights.dim)
        ]
        _emit_csv(header, [[target, growth, variance, *weights.w]])


def _parse_targets(spec: str) -> np.ndarray:
    pieces = spec.split(":")
    if len(pieces) != 3:
        raise click.UsageError("--targets must look like lo:hi:steps")
    try:
        lo, hi, steps = float(pieces[0]), float(pieces[1]), int(pieces[2])
    except ValueError:
        raise click.UsageError("--targets must look like lo:hi:steps") from None
    if steps < 1:
        raise click.UsageError("--targets needs at least one step")
    return np.linspace(lo, hi, steps)


@cli.command()
@click.argument("panel", type=click.Path(dir_okay=False))
@click.option("--targets", "targets_spec", required=True, help="Sweep as lo:hi:steps.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def frontier(panel, targets_spec, fmt):
    """Efficient frontier sweep, sorted by target."""
    returns_panel = _panel_from_csv(panel)
    moments = estimate_log_moments(returns_panel)
    points = efficient_frontier(moments, _parse_targets(targets_spec))
    if fmt == "csv":
        header = ["target_mu", "log_variance"] + [
            f"w_{i + 1}" for i in range(returns_panel.num_assets)
        ]
        _emit_csv(
            header,
            [[p.target_mu, p.log_variance, *p.weights.w] for p in points],
        )
    else:
        _emit_json(
            {
                "labels": list(returns_panel.labels),
                "points": [
                    {
                        "target_mu": p.target_mu,
                        "log_variance": p.log_variance,
                        "weights": p.weights.w,
                    }
                    for p in points
                ],
            }
        )


@cli.group()
def simulate():
    """Monte Carlo checks of the log-scale limit theorems."""


@simulate.command("lln")
@click.argument("spec", type=click.Path(dir_okay=False))
def simulate_lln(spec):
    """Law-of-large-numbers experiment from a JSON spec."""
    raw, dist, cfg, ladder = _parse_simulate_spec(spec)
    report = lln_experiment(dist, cfg, ladder)
    _emit_json(
        {
            "command": "simulate-lln",
            "spec": raw,
            "version": __version__,
            "report": {
                "m_ell": report.m_ell,
                "sigma_ell_sq": report.sigma_ell_sq,
                "statistics": report.statistics,
                "abs_log_errors": report.abs_log_errors,
                "ladder_sizes": list(report.ladder_sizes),
                "ladder_median_abs_log_errors": list(report.ladder_median_errors),
            },
        }
    )


@simulate.command("clt")
@click.argument("spec", type=click.Path(dir_okay=False))
def simulate_clt(spec):
    """Central-limit-theorem experiment from a JSON spec."""
    raw, dist, cfg, _ = _parse_simulate_spec(spec)
    report = clt_experiment(dist, cfg)
    _emit_json(
        {
            "command": "simulate-clt",
            "spec": raw,
            "version": __version__,
            "report": {
                "m_ell": report.m_ell,
                "sigma_ell_sq": report.sigma_ell_sq,
                "statistics": report.statistics,
                "ks_statistic": report.ks_stat,
                "ks_critical_1pct": ks_critical_value(cfg.num_trials, 0.01),
            },
        }
    )


@cli.command()
@click.argument("spec", type=click.Path(dir_okay=False))
@click.option(
    "--doob",
    "require_doob",
    is_flag=True,
    help="Fail (exit 8) unless the Doob decomposition applies.",
)
def martingale(spec, require_doob):
    """Classify an adapted positive process; decompose when a submartingale."""
    raw, space, filtration, variables = _parse_martingale_spec(spec)
    process = AdaptedProcess(variables, filtration)
    labels = classify_l_martingale(process, space)
    ordinary = classify_ordinary_martingale(process, space)
    decomposable = all(label in (MARTINGALE, SUBMARTINGALE) for label in labels)
    doob_payload = None
    if decomposable:
        martingale_part, increasing_part = doob_decompose(process, space)
        residual = 0.0
        for t in range(process.num_steps):
            rebuilt = martingale_part.variables[t].values * increasing_part.variables[t].values
            original = process.variables[t].values
            residual = max(residual, float(np.max(np.abs(rebuilt - original) / original)))
        doob_payload = {
            "martingale": [v.values for v in martingale_part.variables],
            "compensator": [v.values for v in increasing_part.variables],
            "reconstruction_max_rel_error": residual,
        }
    elif require_doob:
        raise NotSubmartingaleError(
            f"Doob decomposition requested but classification is {labels!r}"
        )
    _emit_json(
        {
            "command": "martingale",
            "version": __version__,
            "l_classification": labels,
            "ordinary_submartingale": [
                label in (MARTINGALE, SUBMARTINGALE) for label in ordinary
            ],
            "doob": doob_payload,
        }
    )


@cli.command()
@click.argument("vectors", nargs=-1)
@click.option("--panel", "panel_path", type=click.Path(dir_okay=False), default=None)
def distance(vectors, panel_path):
    """Log distance between two positive vectors (inline or panel rows)."""
    points = _collect_points(vectors, panel_path, exactly=2)
    _emit_json({"distance": log_distance(points[0], points[1])})


@cli.command("geodesic")
@click.argument("vectors", nargs=-1)
@click.option("--t", "t", type=float, required=True, help="Curve parameter (0 at x1, 1 at x2).")
@click.option("--panel", "panel_path", type=click.Path(dir_okay=False), default=None)
def geodesic_command(vectors, t, panel_path):
    """Point on the geodesic between two positive vectors."""
    points = _collect_points(vectors, panel_path, exactly=2)
    _emit_json({"point": geodesic(points[0], points[1], t).values, "t": t})


@cli.command()
@click.argument("vectors", nargs=-1)
@click.option("--panel", "panel_path", type=click.Path(dir_okay=False), default=None)
def gmean(vectors, panel_path):
    """Geometric mean of positive vectors (inline or panel rows)."""
    points = _collect_points(vectors, panel_path)
    _emit_json({"gmean": geometric_mean(points).values})


# --------------------------------------------------------------------------
# entry points

_ERROR_EXIT_CODES = (
    (PanelFormatError, EXIT_PARSE),
    (SchemaError, EXIT_PARSE),
    (PanelDomainError, EXIT_DOMAIN),
    (PositiveDomainError, EXIT_DOMAIN),
    (DegenerateRegressorError, EXIT_DEGENERATE),
    (DegenerateDistributionError, EXIT_DEGENERATE),
    (SingularCovarianceError, EXIT_SINGULAR),
    (DependentConstraintsError, EXIT_DEPENDENT),
    (NotAdaptedError, EXIT_NOT_ADAPTED),
    (NotSubmartingaleError, EXIT_DOOB),
)


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code (never raises SystemExit)."""
    try:
        result = cli.main(args=argv, prog_name="logcone", standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except tuple(kind for kind, _ in _ERROR_EXIT_CODES) as exc:
        click.echo(f"error: {exc}", err=True)
        return next(code for kind, code in _ERROR_EXIT_CODES if isinstance(exc, kind))
    return int(result) if isinstance(result, int) else 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
