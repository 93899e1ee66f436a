from .experiment import (  # noqa: F401
    ExperimentSpec,
    ResultsTable,
    leak_check,
    reproduce_matrix,
    run_experiment,
)
from .error_report import ErrorReport, error_report  # noqa: F401
