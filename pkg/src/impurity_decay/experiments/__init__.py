from .config import ConfigError, ExperimentConfig
from .plaquette import run_plaquette_couplings
from .position_map import PositionMap, run_position_map
from .table1 import (
    REFERENCE_ROWS,
    GeometryComparisonRecord,
    calibrate_conventions,
    comparison,
    run_table1,
    table1_report,
)
from .vacancy import VACANCY_OFFSETS, VacancyCurve, run_vacancy_scan, vacancy_array

__all__ = [
    "ConfigError", "ExperimentConfig", "GeometryComparisonRecord", "REFERENCE_ROWS", "PositionMap",
    "VACANCY_OFFSETS", "VacancyCurve", "calibrate_conventions", "comparison", "run_plaquette_couplings",
    "run_position_map", "run_table1", "run_vacancy_scan", "table1_report", "vacancy_array",
]
