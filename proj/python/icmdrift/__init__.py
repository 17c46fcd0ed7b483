"""Streaming concept-drift detection with conformal martingales."""

try:
    from ._icmdrift import (
        DataError,
        SpecError,
        generate,
        histogram_density,
        knn_density,
        run_experiment,
        z_test,
    )
except ImportError:  # module built flat on PYTHONPATH (test harness)
    from _icmdrift import (
        DataError,
        SpecError,
        generate,
        histogram_density,
        knn_density,
        run_experiment,
        z_test,
    )

__all__ = [
    "DataError",
    "SpecError",
    "generate",
    "histogram_density",
    "knn_density",
    "run_experiment",
    "z_test",
]
