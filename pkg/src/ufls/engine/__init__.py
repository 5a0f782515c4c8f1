from ufls.engine.metrics import accumulate_metrics, compare_runs
from ufls.engine.result import RunMetrics, SimulationResult, TimeSeries
from ufls.engine.simulation import run
from ufls.engine.sweep import expand_grid, parse_grid_axis, run_sweep

__all__ = [
    "RunMetrics",
    "SimulationResult",
    "TimeSeries",
    "accumulate_metrics",
    "compare_runs",
    "expand_grid",
    "parse_grid_axis",
    "run",
    "run_sweep",
]
