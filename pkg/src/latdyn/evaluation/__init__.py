from .metrics import classic_iqr, iqr75, normalized_mse, rmse_over_time
from .report import EvalReport, emit_report, evaluate_checkpoint, file_hash, parse_report

__all__ = [
    "normalized_mse",
    "rmse_over_time",
    "iqr75",
    "classic_iqr",
    "EvalReport",
    "evaluate_checkpoint",
    "emit_report",
    "parse_report",
    "file_hash",
]
