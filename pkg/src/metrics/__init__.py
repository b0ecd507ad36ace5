from .report import MetricsReport, WindowRecord, build_report, METRIC_FIELDS
from .compare import (
    ComparisonRow,
    compare_strategies,
    comparison_columns,
    write_comparison_csv,
    write_comparison_json
)

__all__ = [
    'MetricsReport',
    'WindowRecord',
    'build_report',
    'METRIC_FIELDS',
    'ComparisonRow',
    'compare_strategies',
    'comparison_columns',
    'write_comparison_csv',
    'write_comparison_json'
]
