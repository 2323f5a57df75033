"""Experiment orchestration: splits, tasks, controls, synthesis, saturation."""

from .splits import SplitPlan, Splits, make_splits  # noqa: F401
from .saturation import wasserstein1, saturation_curve, SaturationPoint  # noqa: F401
from .pipeline import PairSet, build_pairs, graphs_by_provenance  # noqa: F401
from .tasks import TaskData, TaskReport, make_task_data, run_rf_task, run_gnn_task  # noqa: F401
from .synth import SynthParams, generate  # noqa: F401
