"""Road upgrade planning: equilibrium assignment, subset selection and scheduling."""

from ._roadplan import (
    Assignment,
    DataError,
    DeltaTable,
    DemandMatrix,
    FeasibilityReport,
    Link,
    Network,
    ParseError,
    PlanningHorizon,
    Schedule,
    Selection,
    SelectionProblem,
    SolverError,
    SolverSettings,
    Upgrade,
    UpgradeSet,
    apply_upgrades,
    check_schedule,
    compute_deltas,
    estimate_delta,
    evaluate_selection,
    independent_schedule,
    optimize_subset,
    pairwise_distances,
    predict_pairs_clustering,
    predict_pairs_count,
    predict_pairs_threshold,
    present_value,
    read_demand,
    read_network,
    read_nodes,
    read_upgrades,
    selection_problem_from,
    shortest_path_labels,
    solve_ue,
    subset_mask,
    subsets_up_to,
)

__all__ = [name for name in dir() if not name.startswith("_")]
