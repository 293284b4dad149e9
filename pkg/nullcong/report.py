import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from typing import Any, Dict, Iterable, List, Optional, Sequence

import simplejson

from .errors import ArgumentError
from .utils import Residual, string_from_snake_to_camel_case

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")
CSV_HEADER = ("check", "samples", "max_abs", "max_rel", "tol", "pass")


@dataclass(frozen=True)
class RunConfig:
    """
    One verification run.

    Attributes:
    ----------
    suite: str - Suite name, see suites.SUITE_NAMES
    m: int - Holomorphic rank of the base
    base: str - "heisenberg", "fs-lift" or "file:<path>"
    cosmological: float - Λ
    ulambda: float, optional - Λ̲, None to read it from the base
    c: float - c̲
    samples: int - Number of sample points
    seed: int - Seed of the point sampler
    tol: float - Relative tolerance of every check
    phi_margin: float - Sampled φ stays within π/2 − phi_margin of the origin
    format: str - "json" or "csv"
    jobs: int - Worker threads evaluating points
    """

    suite: str
    m: int = 2
    base: str = "heisenberg"
    cosmological: float = 1.0
    ulambda: Optional[float] = None
    c: float = 0.0
    samples: int = 20
    seed: int = 42
    tol: float = 1e-7
    phi_margin: float = 0.2
    format: str = "json"
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ArgumentError(f"m must be at least 1, got {self.m}")
        if self.samples < 1:
            raise ArgumentError(f"samples must be at least 1, got {self.samples}")
        if not 0.0 < self.phi_margin < math.pi / 2:
            raise ArgumentError(f"phi margin must lie in (0, π/2), got {self.phi_margin}")
        if not self.tol > 0.0:
            raise ArgumentError(f"tolerance must be positive, got {self.tol}")
        if self.format not in FORMATS:
            raise ArgumentError(f"unknown format {self.format!r}: use json or csv")
        if self.jobs < 1:
            raise ArgumentError(f"jobs must be at least 1, got {self.jobs}")

    @property
    def phi_max(self) -> float:
        return math.pi / 2 - self.phi_margin

    def echo(self) -> Dict[str, Any]:
        """
        The configuration as report keys; an unset Λ̲ reads "auto".
        """
        values = asdict(self)
        values["lambda"] = values.pop("cosmological")
        if values["ulambda"] is None:
            values["ulambda"] = "auto"
        return {string_from_snake_to_camel_case(k): v for k, v in values.items()}


@dataclass(frozen=True)
class CheckResult:
    """
    Attributes:
    ----------
    name: str - Check name, "<suite>.<identity>"
    samples: int - Number of evaluated points
    max_abs: float - Largest absolute residual
    max_rel: float - Largest relative residual
    tol: float - Tolerance applied to max_rel
    point: List[float], optional - The failing point of an evaluation error
    message: str, optional - The evaluation error
    """

    name: str
    samples: int
    max_abs: float
    max_rel: float
    tol: float
    point: Optional[List[float]] = None
    message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return bool(self.message is None and self.max_rel <= self.tol)

    @classmethod
    def from_residuals(cls, name: str, residuals: Sequence[Residual], tol: float) -> "CheckResult":
        if not residuals:
            return cls(name, 0, 0.0, 0.0, tol)
        return cls(
            name,
            len(residuals),
            max(r.max_abs for r in residuals),
            max(r.max_rel for r in residuals),
            tol,
        )

    @classmethod
    def failure(
        cls, name: str, message: str, point: Optional[Iterable[float]], tol: float
    ) -> "CheckResult":
        point = None if point is None else [float(x) for x in point]
        return cls(name, 0, math.nan, math.nan, tol, point=point, message=message)


@dataclass
class ResidualReport:
    """
    Outcome of a suite: the echoed configuration and one result per check.
    """

    suite: str
    config: Dict[str, Any]
    checks: List[CheckResult] = field(default_factory=list)
    wall_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_evaluation(self) -> bool:
        return any(check.message is not None for check in self.checks)


def _number(x: float) -> Optional[Decimal]:
    if not math.isfinite(x):
        return None
    return Decimal(format(x, ".17g"))


def _format(x: float) -> str:
    return format(x, ".17g") if math.isfinite(x) else ""


def _check_object(check: CheckResult) -> Dict[str, Any]:
    out = {
        "name": check.name,
        "samples": check.samples,
        "max_abs": _number(check.max_abs),
        "max_rel": _number(check.max_rel),
        "tol": _number(check.tol),
        "pass": check.passed,
    }
    if check.message is not None:
        out["message"] = check.message
        out["point"] = [_number(x) for x in check.point] if check.point is not None else None
    return out


def _config_object(config: Dict[str, Any]) -> Dict[str, Any]:
    return {k: _number(v) if isinstance(v, float) else v for k, v in config.items()}


def to_json(report: ResidualReport) -> str:
    document = {
        "suite": report.suite,
        "config": _config_object(report.config),
        "checks": [_check_object(check) for check in report.checks],
        "pass": report.passed,
        "wall_ms": _number(report.wall_ms),
    }
    return simplejson.dumps(document, use_decimal=True, sort_keys=True, indent=2)


def to_csv(report: ResidualReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for check in report.checks:
        writer.writerow(
            [
                check.name,
                check.samples,
                _format(check.max_abs),
                _format(check.max_rel),
                _format(check.tol),
                "true" if check.passed else "false",
            ]
        )
    return buffer.getvalue()


def emit(report: ResidualReport, format: str = "json") -> str:
    """
    Render a report.

    Parameters
    ----------
    report : ResidualReport - The finished report.
    format : str - "json" for the schema-conforming document, "csv" for one row per check.

    Returns
    -------
    str - The rendered report.
    """

    logger.debug("rendering %d checks of %s as %s", len(report.checks), report.suite, format)
    if format == "json":
        return to_json(report)
    if format == "csv":
        return to_csv(report)
    raise ArgumentError(f"unknown format {format!r}: use json or csv")
