# Scheduling solver: instances, optimal recombination, GA and exact methods
from app.scheduling.exact import (
    AssignmentSolution,
    SubtourCut,
    build_model,
    emit_cut,
    export_ilp,
    find_subtours,
    held_karp_path,
    write_ilp,
)
from app.scheduling.genetic import GAConfig, RunRecord, run_ga
from app.scheduling.instance import (
    Instance,
    Schedule,
    evaluate_cost,
    load_instance,
    parse_tsplib,
    to_tsplib,
)
from app.scheduling.recombination import (
    RecombinationResult,
    solve_bruteforce,
    solve_gray,
)

__all__ = [
    "AssignmentSolution",
    "SubtourCut",
    "build_model",
    "emit_cut",
    "export_ilp",
    "find_subtours",
    "held_karp_path",
    "write_ilp",
    "GAConfig",
    "RunRecord",
    "run_ga",
    "Instance",
    "Schedule",
    "evaluate_cost",
    "load_instance",
    "parse_tsplib",
    "to_tsplib",
    "RecombinationResult",
    "solve_bruteforce",
    "solve_gray",
]
