"""careflow: clinical guideline conformance checking on event logs.

Parse day-granular event logs (CSV/XES) and BPMN 2.0 guideline models,
compile the models to workflow nets, compute cost-optimal alignments,
and report fitness plus per-activity deviation tables.
"""

from .alignment import (
    Alignment,
    AlignmentResourceError,
    ConformanceResult,
    CostScheme,
    Move,
    OracleInconclusive,
    UnsoundModelError,
    align_log,
    brute_force_alignment,
    min_model_path_cost,
    moves_tsv,
    optimal_alignment,
    result_to_json,
)
from .bpmn import (
    BpmnModel,
    BpmnNode,
    BpmnStructureError,
    Diagnostic,
    ModelStats,
    SequenceFlow,
    model_stats,
    parse_bpmn,
    validate,
)
from .event_log import (
    DottedChartData,
    Event,
    EventLog,
    LogRowError,
    LogSchemaError,
    Trace,
    Variant,
    WaveBoundaries,
    abstract_activities,
    average_duration_days,
    dotted_chart,
    dotted_chart_svg,
    filter_infrequent_variants,
    inject_noise,
    parse_csv,
    parse_xes,
    remove_duration_outliers,
    split_by_waves,
    trace_duration_days,
    variants,
    write_csv,
    write_dotted_csv,
)
from .figures import dotted_chart_png, moves_bar_png
from .petri import (
    CompileError,
    FiringError,
    Marking,
    PetriNet,
    PlayoutDeadEnd,
    Transition,
    check_workflow_net,
    compile_bpmn,
    find_silent_cycle,
    random_playout,
    to_pnml,
)
from .report import ActivityMoveRow, ConformanceReport, per_activity_moves, render

__version__ = "0.1.0"

__all__ = [
    "ActivityMoveRow",
    "Alignment",
    "AlignmentResourceError",
    "BpmnModel",
    "BpmnNode",
    "BpmnStructureError",
    "CompileError",
    "ConformanceReport",
    "ConformanceResult",
    "CostScheme",
    "Diagnostic",
    "DottedChartData",
    "Event",
    "EventLog",
    "FiringError",
    "LogRowError",
    "LogSchemaError",
    "Marking",
    "ModelStats",
    "Move",
    "OracleInconclusive",
    "PetriNet",
    "PlayoutDeadEnd",
    "SequenceFlow",
    "Trace",
    "Transition",
    "UnsoundModelError",
    "Variant",
    "WaveBoundaries",
    "abstract_activities",
    "align_log",
    "average_duration_days",
    "brute_force_alignment",
    "check_workflow_net",
    "compile_bpmn",
    "dotted_chart",
    "dotted_chart_png",
    "dotted_chart_svg",
    "filter_infrequent_variants",
    "find_silent_cycle",
    "inject_noise",
    "min_model_path_cost",
    "model_stats",
    "moves_bar_png",
    "moves_tsv",
    "optimal_alignment",
    "parse_bpmn",
    "parse_csv",
    "parse_xes",
    "per_activity_moves",
    "random_playout",
    "remove_duration_outliers",
    "render",
    "result_to_json",
    "split_by_waves",
    "to_pnml",
    "trace_duration_days",
    "validate",
    "variants",
    "write_csv",
    "write_dotted_csv",
]
