import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .appendix import appendix_oracle
from .cr_base import CRBase, lift_residual, load_base, reeb_residuals, validate_adapted
from .curvature import (
    conformal_rescale,
    curvature_pack,
    first_bianchi_residual,
    second_bianchi_residual,
    transform_law_residuals,
    weyl_trace_residual,
)
from .einstein_checks import (
    coframe_derivative_check,
    conformal_flatness_check,
    dual_robinson_check,
    fefferman_criteria,
    kerr_schild_check,
    killing_check,
    weyl_einstein_components,
)
from .errors import (
    ArgumentError,
    EvaluationError,
    NumericError,
    PreconditionError,
    StructureError,
)
from .jets import Jet3, jet_apply, lift_coordinate
from .manifest_compiler import ManifestOptions
from .optics import (
    congruence_invariants,
    e_alpha_ode_residual,
    repeated_direction_residual,
    rescaled_expansion_residual,
    twist_complex_structure_residual,
    weyl_degeneracy_report,
    weyl_twist_identity_residual,
)
from .report import CheckResult, ResidualReport, RunConfig
from .robinson import (
    EinsteinParams,
    SpacetimeModel,
    aj_coefficients,
    assemble_einstein,
    assemble_general,
    base_einstein_constant,
    bce_residuals,
    einstein_check,
    frame_pattern_residual,
    lambda0,
    lambda0_ode_residuals,
    lambda0_spread,
    polynomial_lambda,
    pure_radiation,
    schouten_steps,
)
from .taubnut import taubnut_einstein_check, taubnut_map, taubnut_metric
from .utils import Residual, max_abs, residual
from .webster import (
    cr_einstein_check,
    first_bianchi_residuals,
    structure_residuals,
    torsion_bianchi_residuals,
    webster_curvature,
)

logger = logging.getLogger(__name__)

PointCheck = Callable[[np.ndarray], Dict[str, Optional[Residual]]]

SUITE_NAMES = (
    "einstein",
    "appendix",
    "twist-identity",
    "weyl-degeneracy",
    "cr-base",
    "lambda0",
    "fefferman",
    "taubnut",
    "killing",
    "dual-robinson",
    "conformal-laws",
)

# Checks built on third derivatives or on limits carry a looser floor.
TOLERANCE_FLOORS = {
    "lambda0.boundary": 1e-6,
    "fefferman.cotton": 1e-6,
    "conformal-laws.bianchi2": 1e-6,
}

BOUNDARY_EPSILON = 1e-3


def sample_points(config: RunConfig, z_radius: Optional[float] = None) -> np.ndarray:
    """
    Seeded sample points (φ, t, x1, y1, ..., xm, ym) of a run.

    Parameters
    ----------
    config : RunConfig - Supplies m, samples, seed and the φ margin.
    z_radius : float, optional - Bound on |z| of the base point, as for the fs-lift chart.

    Returns
    -------
    np.ndarray - Points of shape (samples, 2m + 2), φ uniform in [−π/2 + margin, π/2 − margin]
        and the base coordinates uniform in [−1, 1].
    """

    rng = np.random.default_rng(config.seed)
    dim = 2 * config.m + 2
    points = rng.uniform(-1.0, 1.0, size=(config.samples, dim))
    points[:, 0] = rng.uniform(-config.phi_max, config.phi_max, size=config.samples)
    if z_radius is not None:
        z = points[:, 2:]
        norms = np.linalg.norm(z, axis=1)
        scale = np.minimum(1.0, z_radius / np.maximum(norms, 1e-300))
        points[:, 2:] = z * scale[:, None]
    return points


def _params(config: RunConfig, base: CRBase) -> EinsteinParams:
    return EinsteinParams.for_base(base, config.cosmological, config.c, config.ulambda)


def _einstein_model(config: RunConfig, base: CRBase) -> SpacetimeModel:
    return assemble_einstein(base, _params(config, base))


def _general_model(config: RunConfig, base: CRBase) -> SpacetimeModel:
    lam = polynomial_lambda(config.m, np.random.default_rng(config.seed))
    return assemble_general(base, lam)


def _prefixed(prefix: str, values: Dict[str, Residual]) -> Dict[str, Residual]:
    return {f"{prefix}.{name}": value for name, value in values.items()}


def _flag(ok: bool) -> Residual:
    return Residual(0.0 if ok else 1.0, 1.0)


def _einstein_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _einstein_model(config, base)
    signature = (2 * model.m + 1, 1)

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        out = {
            "einstein": einstein_check(model, pt),
            "frame_pattern": frame_pattern_residual(model, pt),
            "pure_radiation": Residual(abs(pure_radiation(model, pt))),
            "signature": _flag(model.rescaled.signature_at(pt) == signature),
        }
        out.update(_prefixed("schouten", schouten_steps(model, pt)))
        out.update(_prefixed("coframe", coframe_derivative_check(model, pt)))
        return out

    return check


def _appendix_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _general_model(config, base)

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        out = dict(appendix_oracle(model, pt).families())
        out.update(_prefixed("bce", bce_residuals(model, pt)))
        return out

    return check


def _einstein_model_if_any(config: RunConfig, base: CRBase) -> Optional[SpacetimeModel]:
    if config.m < 2:
        return None
    try:
        base_einstein_constant(base)
    except PreconditionError as e:
        logger.info("%s is not CR–Einstein, Einstein model skipped: %s", base.name, e.message)
        return None
    return _einstein_model(config, base)


def _twist_identity_suite(config: RunConfig, base: CRBase) -> PointCheck:
    models = {"general": _general_model(config, base)}
    einstein = _einstein_model_if_any(config, base)
    if einstein is not None:
        models["einstein"] = einstein

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        out = {}
        for label, model in models.items():
            invariants = congruence_invariants(model.metric, pt)
            scale = max(max_abs(invariants.data.metric), 1.0)
            out[f"identity.{label}"] = weyl_twist_identity_residual(model.metric, pt)
            out[f"twist_structure.{label}"] = Residual(
                twist_complex_structure_residual(invariants), max_abs(invariants.twist)
            )
            out[f"shear.{label}"] = Residual(max_abs(invariants.shear), scale)
            out[f"expansion.{label}"] = Residual(abs(invariants.expansion), scale)
            out[f"geodesy.{label}"] = Residual(invariants.geodesy, scale)
            out[f"rescaled_expansion.{label}"] = rescaled_expansion_residual(model, pt)
        return out

    return check


def _weyl_degeneracy_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _einstein_model(config, base)
    general = _general_model(config, base)
    params = model.params
    flat = params.cosmological == 0.0 and params.ulambda == 0.0 and params.c == 0.0

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        report = weyl_degeneracy_report(model.metric, pt)
        out = {name: report[name] for name in ("null_null", "null_all", "repeated", "trace_free")}
        out.update(_prefixed("components", weyl_einstein_components(model, pt)))
        out["repeated_direction.general"] = repeated_direction_residual(general, pt)
        if flat:
            out["full"] = report["full"]
            out["conformally_flat"] = conformal_flatness_check(model, pt)
        return out

    return check


def _cr_base_suite(config: RunConfig, base: CRBase) -> PointCheck:
    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        b = pt[1:]
        pack = webster_curvature(base, b)
        reeb_norm, reeb_contact = reeb_residuals(base, b)
        record = cr_einstein_check(base, b, pack)
        out = {
            "adapted": validate_adapted(base, b),
            "reeb.normalization": Residual(reeb_norm, 1.0),
            "reeb.contact": Residual(reeb_contact, 1.0),
        }
        if base.kahler is not None:
            out["kahler_lift"] = lift_residual(base, b)
        out.update(_prefixed("structure", structure_residuals(pack.solution)))
        out.update(_prefixed("bianchi", first_bianchi_residuals(pack)))
        out.update(_prefixed("torsion_bianchi", torsion_bianchi_residuals(pack)))
        out.update(
            {
                "cr_einstein.torsion": Residual(record.a_res, 1.0),
                "cr_einstein.nijenhuis_divergence": Residual(record.div_n_res, 1.0),
                "cr_einstein.ricci": Residual(record.ricci_res, max(abs(record.ulambda), 1.0)),
                "cr_einstein.constant": Residual(
                    record.grad_ulambda_res, max(abs(record.ulambda), 1.0)
                ),
            }
        )
        return out

    return check


def _lambda0_suite(config: RunConfig, base: CRBase) -> PointCheck:
    params = _params(config, base)
    model = assemble_einstein(base, params)
    m = params.m
    logger.info(
        "λ₀(0) = %.17g, a_j = %s", float(lambda0(params, 0.0).value), list(aj_coefficients(m))
    )
    origin = Residual(
        abs(float(lambda0(params, 0.0).value) - (params.ulambda - params.cosmological)),
        max(abs(params.ulambda - params.cosmological), 1.0),
    )
    limit = params.cosmological / (2 * m + 1)
    edge = np.pi / 2 - BOUNDARY_EPSILON
    boundary = max(abs(float(lambda0(params, s * edge).value) - limit) for s in (-1.0, 1.0))
    boundary = Residual(boundary, max(abs(params.cosmological), abs(params.ulambda), 1.0))

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        phi = float(pt[0])
        zero = model.lambda0_at(pt)
        spread = lambda0_spread(model, phi, [pt[1:], np.zeros(base.dim)])
        out = _prefixed("ode", lambda0_ode_residuals(params, phi))
        out.update(
            {
                "spread": Residual(spread, max(abs(zero), 1.0)),
                "origin": origin,
                "boundary": boundary,
                "lambda_alpha_ode": Residual(e_alpha_ode_residual(m, phi, 1.0, 0.0), 1.0),
            }
        )
        return out

    return check


def _fefferman_suite(config: RunConfig, base: CRBase) -> PointCheck:
    params = _params(config, base)
    model = assemble_einstein(base, params)
    reference = assemble_einstein(base, EinsteinParams.fefferman(params.m, params.ulambda))

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        record = fefferman_criteria(reference, pt)
        return {
            "weyl": record.weyl_res,
            "cotton": record.cotton_res,
            "scalar": Residual(abs(record.scalar_value + 1.0), 1.0),
            "conformal_killing": killing_check(reference, pt).conformal_killing,
            "kerr_schild": kerr_schild_check(model, pt, reference),
        }

    return check


def _taubnut_suite(config: RunConfig, base: CRBase) -> PointCheck:
    params = _params(config, base)
    metric = taubnut_metric(base, params)

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        r = params.ulambda * float(np.tan(pt[0]))
        point = taubnut_map(params, r)
        mass = None
        if point.extracted_mass is not None:
            mass = Residual(abs(point.extracted_mass - point.mass), max(abs(point.mass), 1.0))
        chart = np.concatenate([[r], pt[1:]])
        return {
            "f_ode": point.f_ode_residual,
            "round_trip": Residual(point.round_trip, max(abs(r), 1.0)),
            "mass": mass,
            "einstein": taubnut_einstein_check(base, params, chart, metric=metric),
        }

    return check


def _killing_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _einstein_model(config, base)
    fefferman = model.params.is_fefferman

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        record = killing_check(model, pt)
        return {
            "symmetric": record.sym_residual,
            "norm": record.norm_residual,
            "conformal": record.conformal_killing if fefferman else None,
        }

    return check


def _dual_robinson_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _einstein_model(config, base)

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        return dual_robinson_check(model, pt) or {}

    return check


def _log_sec(point: np.ndarray, order: int) -> Jet3:
    return jet_apply("log", jet_apply("sec", lift_coordinate(point, 0, order)))


def _conformal_laws_suite(config: RunConfig, base: CRBase) -> PointCheck:
    model = _general_model(config, base)
    rescaled = conformal_rescale(model.metric, _log_sec)

    def check(pt: np.ndarray) -> Dict[str, Optional[Residual]]:
        out = dict(transform_law_residuals(model.metric, _log_sec, pt))
        out["rescaled_metric"] = residual(
            rescaled.at(pt, 0).value, model.rescaled.at(pt, 0).value
        )
        pack = curvature_pack(model.rescaled, pt, 3)
        out["weyl_trace"] = weyl_trace_residual(pack)
        out["bianchi1"] = first_bianchi_residual(pack)
        out["bianchi2"] = second_bianchi_residual(pack)
        return out

    return check


SUITES: Dict[str, Callable[[RunConfig, CRBase], PointCheck]] = {
    "einstein": _einstein_suite,
    "appendix": _appendix_suite,
    "twist-identity": _twist_identity_suite,
    "weyl-degeneracy": _weyl_degeneracy_suite,
    "cr-base": _cr_base_suite,
    "lambda0": _lambda0_suite,
    "fefferman": _fefferman_suite,
    "taubnut": _taubnut_suite,
    "killing": _killing_suite,
    "dual-robinson": _dual_robinson_suite,
    "conformal-laws": _conformal_laws_suite,
}

_EVALUATION_ERRORS = (EvaluationError, NumericError, StructureError)


def _evaluate(
    check: PointCheck, pt: np.ndarray
) -> Tuple[Dict[str, Optional[Residual]], Optional[Exception]]:
    try:
        return check(pt), None
    except PreconditionError as e:
        return {"precondition": Residual(e.residual, 1.0)}, None
    except _EVALUATION_ERRORS as e:
        return {}, e


def _tolerance(name: str, tol: float) -> float:
    return max(tol, TOLERANCE_FLOORS.get(name, 0.0))


def _run_points(
    suite: str, check: PointCheck, points: np.ndarray, config: RunConfig
) -> List[CheckResult]:
    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        outcomes = list(executor.map(lambda pt: _evaluate(check, pt), points))

    collected: Dict[str, List[Residual]] = {}
    failure = None
    for pt, (values, error) in zip(points, outcomes):
        if error is not None:
            failure = CheckResult.failure(
                f"{suite}.evaluation", str(error), pt, _tolerance(f"{suite}.evaluation", config.tol)
            )
            logger.error("%s failed at %s: %s", suite, list(pt), error)
            break
        for name, value in values.items():
            bucket = collected.setdefault(f"{suite}.{name}", [])
            if value is not None:
                bucket.append(value)

    results = [
        CheckResult.from_residuals(name, residuals, _tolerance(name, config.tol))
        for name, residuals in collected.items()
    ]
    if failure is not None:
        results.append(failure)
    return results


def _run_one(suite: str, config: RunConfig, base: CRBase, points: np.ndarray) -> List[CheckResult]:
    logger.info("suite %s: %d points over %s", suite, len(points), base.name)
    try:
        check = SUITES[suite](config, base)
    except PreconditionError as e:
        logger.error("suite %s: %s", suite, e.message)
        name = f"{suite}.precondition"
        return [
            CheckResult.from_residuals(name, [Residual(e.residual, 1.0)], _tolerance(name, config.tol))
        ]
    results = _run_points(suite, check, points, config)
    failed = [r.name for r in results if not r.passed]
    logger.info("suite %s: %d checks, %d failed", suite, len(results), len(failed))
    return results


def run_suite(
    config: RunConfig,
    base: Optional[CRBase] = None,
    options: ManifestOptions = ManifestOptions(),
    dump_path: Optional[str] = None,
) -> ResidualReport:
    """
    Run a verification suite, or every suite for "all".

    Parameters
    ----------
    config : RunConfig - The run configuration.
    base : CRBase, optional - A base to use instead of resolving config.base.
    options : ManifestOptions - Options for reading a base manifest.
    dump_path : str, optional - Directory for the JSON dump of a base manifest.

    Returns
    -------
    ResidualReport - One result per check; results are ordered by suite, then by
        first appearance over the sample points, independently of config.jobs.
    """

    if config.suite != "all" and config.suite not in SUITES:
        raise ArgumentError(
            f"unknown suite {config.suite!r}: use one of {', '.join(SUITE_NAMES)} or all"
        )
    start = time.perf_counter()
    if base is None:
        base = load_base(config.base, config.m, options, dump_path)
    elif base.m != config.m:
        raise ArgumentError(f"base of rank {base.m} for a run with m={config.m}")
    points = sample_points(config, base.z_radius)
    report = ResidualReport(config.suite, config.echo())

    for suite in SUITE_NAMES if config.suite == "all" else (config.suite,):
        if config.suite == "all":
            try:
                results = _run_one(suite, config, base, points)
            except ArgumentError as e:
                logger.warning("suite %s skipped: %s", suite, e.message)
                continue
        else:
            results = _run_one(suite, config, base, points)
        report.checks.extend(results)
        if report.failed_evaluation:
            break

    report.wall_ms = (time.perf_counter() - start) * 1000.0
    logger.info(
        "%s: %s in %.0f ms", config.suite, "pass" if report.passed else "FAIL", report.wall_ms
    )
    return report
