"""Geometry comparison: minimal effective decay and band-edge distance for ten cases."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from ..couplings import assemble_system
from ..geometry import nearest_neighbor_stats
from .common import case_array, log_error, parallel_map, run_sweep
from .config import ExperimentConfig


@dataclass(frozen=True)
class ReferenceRow:
    kind: str
    placement: str
    n_nearest: int
    n_distinct: int
    gamma_min: float
    d_be: float


REFERENCE_ROWS = (
    ReferenceRow("square", "interstitial", 4, 2, 5.94e-5, 2.65),
    ReferenceRow("triangular", "interstitial", 3, 1, 1.03e-4, 5.845),
    ReferenceRow("oblique", "interstitial", 2, 1, 5.38e-4, 2.32),
    ReferenceRow("rectangular", "interstitial", 4, 3, 1.74e-4, 1.42),
    ReferenceRow("honeycomb", "interstitial", 6, 4, 2.9e-2, 0.0),
    ReferenceRow("square", "substitutional", 4, 2, 2.63e-4, 0.0),
    ReferenceRow("triangular", "substitutional", 6, 4, 1.3e-2, 0.0),
    ReferenceRow("oblique", "substitutional", 2, 1, 8.54e-3, 0.0),
    ReferenceRow("rectangular", "substitutional", 2, 1, 1.51e-3, 0.0),
    ReferenceRow("honeycomb", "substitutional", 3, 1, 7.78e-3, 0.0),
)


def case_label(kind: str, placement: str) -> str:
    return f"{kind} {'int.' if placement == 'interstitial' else 'subst.'}"


@dataclass
class GeometryComparisonRecord:
    label: str
    kind: str
    placement: str
    n_nearest: Optional[int] = None
    n_distinct: Optional[int] = None
    gamma_min: Optional[float] = None
    d_be: Optional[float] = None
    delta_min: Optional[float] = None
    band_edge: Optional[float] = None
    spacing: Optional[float] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def run_case(kind: str, placement: str, config: ExperimentConfig, substitution: str = "rescaled",
             triangular: str = "equal_distance") -> GeometryComparisonRecord:
    rec = GeometryComparisonRecord(case_label(kind, placement), kind, placement)
    try:
        array = case_array(kind, placement, config, substitution=substitution, triangular=triangular)
        stats = nearest_neighbor_stats(array)
        curve = run_sweep(assemble_system(array), config)
    except (ArithmeticError, ValueError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    rec.spacing = array.spec.spacing
    rec.n_nearest = stats.n_nearest
    rec.n_distinct = stats.n_distinct_distances
    # reported in units of gamma_L whatever gamma_I was used; Gamma_eff scales with gamma_I
    rec.gamma_min = curve.gamma_min / config.gamma_I
    rec.delta_min = curve.delta_min
    rec.band_edge = curve.band_edge if math.isfinite(curve.band_edge) else None
    rec.d_be = curve.d_be
    return rec


def calibrate_conventions(config: ExperimentConfig) -> dict:
    """Pick the impurity-rate, substitutional-spacing and triangular-spacing conventions.

    Each candidate is scored by the summed |log(computed / reference)| of the
    minimal effective decay against the reference table; ties keep the first
    candidate. Both impurity-rate candidates report Gamma_eff / gamma_I.
    """
    ref = {(r.kind, r.placement): r for r in REFERENCE_ROWS}
    out: dict = {"scores": {}}

    sq_ref = ref[("square", "interstitial")].gamma_min
    gamma_scores = {}
    for label, gI in (("gamma_I=gamma_L", 1.0), ("gamma_I=1e-2 gamma_L", 1e-2)):
        rec = run_case("square", "interstitial", config.replace(gamma_I=gI))
        gamma_scores[label] = log_error(rec.gamma_min, sq_ref)
    out["scores"]["gamma_I"] = gamma_scores
    # rounding keeps float noise from breaking the tie in favour of the second option
    out["gamma_I"] = min(gamma_scores, key=lambda k: round(gamma_scores[k], 9))

    if config.triangular == "auto":
        tri_ref = ref[("triangular", "interstitial")].gamma_min
        tri_scores = {
            rule: log_error(run_case("triangular", "interstitial", config, triangular=rule).gamma_min, tri_ref)
            for rule in ("closed_form", "equal_distance")
        }
        out["scores"]["triangular"] = tri_scores
        out["triangular"] = min(tri_scores, key=tri_scores.get)
    else:
        out["triangular"] = config.triangular

    if config.substitution == "auto":
        sub_scores = {}
        for conv in ("rescaled", "equal_distance"):
            total = 0.0
            for row in REFERENCE_ROWS:
                if row.placement != "substitutional":
                    continue
                rec = run_case(row.kind, row.placement, config, substitution=conv,
                               triangular=out["triangular"])
                total += log_error(rec.gamma_min, row.gamma_min) if rec.gamma_min else math.inf
            sub_scores[conv] = total
        out["scores"]["substitution"] = sub_scores
        out["substitution"] = min(sub_scores, key=sub_scores.get)
    else:
        out["substitution"] = config.substitution
    return out


def run_table1(config: ExperimentConfig = ExperimentConfig(),
               conventions: Optional[dict] = None) -> list[GeometryComparisonRecord]:
    """All ten geometry/placement cases; failures are recorded per case."""
    if conventions is None:
        if config.substitution == "auto" or config.triangular == "auto":
            conventions = calibrate_conventions(config)
        else:
            conventions = {"substitution": config.substitution, "triangular": config.triangular}
    sub, tri = conventions["substitution"], conventions["triangular"]
    return parallel_map(
        lambda row: run_case(row.kind, row.placement, config, substitution=sub, triangular=tri),
        REFERENCE_ROWS, config.threads,
    )


def comparison(records: list[GeometryComparisonRecord]) -> list[dict]:
    """Per-row {paper_value, computed, rel_error}: reference value, this run, relative gap."""
    ref = {(r.kind, r.placement): r for r in REFERENCE_ROWS}
    rows = []
    for rec in records:
        r = ref[(rec.kind, rec.placement)]
        entry = {"label": rec.label}
        for key in ("gamma_min", "d_be", "n_nearest", "n_distinct"):
            ref_value, got = getattr(r, key), getattr(rec, key)
            rel = None
            if got is not None and ref_value != 0:
                rel = abs(got - ref_value) / abs(ref_value)
            entry[key] = {"paper_value": ref_value, "computed": got, "rel_error": rel}
        rows.append(entry)
    return rows


def table1_report(records, conventions: Optional[dict] = None, config: Optional[ExperimentConfig] = None) -> dict:
    return {
        "records": [r.to_dict() for r in records],
        "comparison": comparison(records),
        "conventions": conventions,
        "config": None if config is None else config.to_dict(),
    }
