"""CSV ingestion, custom poverty-index files and the JSON report envelope."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, EmptyAfterFilter, MissingColumn, NonPositiveValue, SampleTooSmall
from .indices import GpiConfig
from .sample import EmpiricalDistribution, PairedSample, make_distribution, make_paired

__all__ = [
    "ParsedInput",
    "parse_income_csv",
    "parse_index",
    "load_gpi_file",
    "ReportEnvelope",
    "SCHEMA_VERSION",
    "write_lorenz_csv",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class ParsedInput:
    sample: Union[EmpiricalDistribution, PairedSample]
    rows_read: int
    rows_dropped: int
    warnings: tuple = ()


def _cell(text: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def parse_income_csv(path, columns: Sequence[str], policy: str = "reject") -> ParsedInput:
    """Read one or two income columns from a comma-separated file with a header.

    ``policy`` decides what happens to rows with a non-positive or
    non-numeric entry: ``"reject"`` raises :class:`NonPositiveValue` naming
    the data row (1-based, header excluded), ``"drop"`` skips the row and
    records a warning. One column gives an :class:`EmpiricalDistribution`,
    two give a :class:`PairedSample`.
    """
    if isinstance(columns, str):
        columns = [columns]
    columns = list(columns)
    if len(columns) not in (1, 2):
        raise ConfigError("expected one or two column names")
    if policy not in ("reject", "drop"):
        raise ConfigError(f"unknown non-positive policy {policy!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingColumn(f"{path} is empty (a header row is required)")
        header = [h.strip() for h in header]
        idx = []
        for c in columns:
            if c not in header:
                raise MissingColumn(f"column {c!r} not found in {path}; available: {header}")
            idx.append(header.index(c))
        kept, dropped, read = [], 0, 0
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            read += 1
            vals = [_cell(row[i]) if i < len(row) else math.nan for i in idx]
            bad = [v for v in vals if not (math.isfinite(v) and v > 0)]
            if bad:
                if policy == "reject":
                    raise NonPositiveValue(read, bad[0], what="row")
                dropped += 1
                continue
            kept.append(vals)
    notes = []
    if dropped:
        notes.append(f"dropped {dropped} of {read} rows with non-positive or non-numeric entries")
        log.warning(notes[-1])
    if not kept:
        raise EmptyAfterFilter(f"no usable rows left in {path}")
    arr = np.array(kept, dtype=float)
    if len(columns) == 1:
        sample = make_distribution(arr[:, 0])
    else:
        if arr.shape[0] < 2:
            raise SampleTooSmall("two-period commands need at least 2 rows")
        sample = make_paired(arr[:, 0], arr[:, 1])
    return ParsedInput(sample, read, dropped, tuple(notes))


_SAFE = {"np": np, "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "where": np.where, "minimum": np.minimum,
         "maximum": np.maximum, "clip": np.clip, "abs": np.abs}


def _expr(text: str, *names: str):
    code = compile(str(text), "<gpi-spec>", "eval")

    def fn(*args):
        env = dict(_SAFE)
        env.update(zip(names, args))
        return eval(code, {"__builtins__": {}}, env)  # noqa: S307 - restricted namespace, local files only

    return fn


def load_gpi_file(path, poverty_line: float) -> GpiConfig:
    """Build a custom :class:`GpiConfig` from a JSON file of numpy expressions.

    Keys: ``weight`` (in ``t``), ``deprivation`` (in ``y``), ``scale`` (in
    ``q, n, z``), optional ``mu`` (four numbers), ``residual_g`` (in ``x``)
    and ``residual_nu`` (in ``s``). Expressions see numpy as ``np`` and no
    Python builtins.
    """
    try:
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    missing = [k for k in ("weight", "deprivation", "scale") if k not in spec]
    if missing:
        raise ConfigError(f"{path}: missing keys {missing}")
    mu = [float(v) for v in spec.get("mu", [0, 0, 0, 0])]
    if len(mu) != 4:
        raise ConfigError("mu must list four numbers")
    return GpiConfig(
        float(poverty_line),
        weight=_expr(spec["weight"], "t"),
        deprivation=_expr(spec["deprivation"], "y"),
        scale=_expr(spec["scale"], "q", "n", "z"),
        mu1=mu[0], mu2=mu[1], mu3=mu[2], mu4=mu[3],
        residual_g=_expr(spec["residual_g"], "x") if "residual_g" in spec else None,
        residual_nu=_expr(spec["residual_nu"], "s") if "residual_nu" in spec else None,
        kind="custom",
        params={"file": str(path)},
    )


def parse_index(selector: str, poverty_line: Optional[float]) -> Optional[GpiConfig]:
    """``gini`` -> None; ``fgt:alpha``, ``sen``, ``kakwani:kappa``, ``gpi:FILE`` -> :class:`GpiConfig`."""
    name, _, arg = selector.partition(":")
    if name == "gini":
        return None
    if poverty_line is None:
        raise ConfigError(f"index {selector!r} needs --poverty-line")
    try:
        if name == "fgt":
            return GpiConfig.fgt(poverty_line, float(arg or 0))
        if name == "sen":
            return GpiConfig.sen(poverty_line)
        if name == "kakwani":
            return GpiConfig.kakwani(poverty_line, float(arg or 1))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad index parameter in {selector!r}") from exc
    if name == "gpi" and arg:
        return load_gpi_file(arg, poverty_line)
    raise ConfigError(f"unknown index {selector!r}; use gini, fgt:ALPHA, sen, kakwani:KAPPA or gpi:FILE")


@dataclass
class ReportEnvelope:
    """Versioned JSON report. Ledgers are flat name -> number maps."""

    command: str
    config: dict
    estimates: dict
    ledgers: dict = field(default_factory=dict)
    ci: Optional[dict] = None
    warnings: list = field(default_factory=list)
    version: str = ""
    timing: Optional[float] = None
    schema: str = SCHEMA_VERSION

    def __post_init__(self):
        for name in ("config", "estimates", "ledgers", "ci", "warnings"):
            setattr(self, name, _plain(getattr(self, name)))

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"schema": d.pop("schema"), **d}

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, allow_nan=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportEnvelope":
        d = json.loads(text)
        if str(d.get("schema")) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported report schema {d.get('schema')!r}")
        return cls(**d)


def _plain(obj):
    """Convert numpy scalars and tuples so ``json`` can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_lorenz_csv(points: np.ndarray, fh) -> None:
    fh.write("p,L\n")
    for p, l in points:
        fh.write(f"{float(p)!r},{float(l)!r}\n")
