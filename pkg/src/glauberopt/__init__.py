"""Online discrete optimization by a network of locally interacting agents:
centralized Gibbs strategy, decentralized single-site dynamics, exact
desk-scale regret, and numerical certification of the governing bounds."""

from .core import (
    CapExceededError,
    DENSE_CAP_DEFAULT,
    DefaultMeasure,
    NetworkCost,
    NetworkGraph,
    RunningAvgCost,
    build_graph,
    evaluate_cost,
    evaluate_cost_dense,
    load_graph_file,
    local_cost,
    local_cost_vector,
    update_running_average,
)
from .measures import (
    Coupling,
    Dist,
    GibbsSpec,
    OT_CAP_DEFAULT,
    gibbs,
    gibbs_spec,
    hamming,
    kl_divergence,
    log_partition,
    optimal_tv_coupling,
    product_dist,
    shannon_entropy,
    span_seminorm,
    transport_cost,
    tv_distance,
    wasserstein1_hamming,
)
from .centralized import (
    RegretLedger,
    best_static_comparator,
    centralized_regret,
    centralized_regret_bound,
    centralized_step_recursive,
    centralized_strategy_closed_form,
    instantaneous_loss,
)
from .glauber import (
    GlauberKernel,
    SamplePath,
    build_kernel,
    decentralized_regret,
    empirical_profile_dist,
    evolve_exact,
    kernel_row,
    local_conditional,
    simulate_path,
    simulate_replicas,
)
from .schedules import (
    CostSchedule,
    ScheduleFormatError,
    generate_iid,
    generate_shocks,
    load_schedule,
    save_schedule,
)
from .theory import (
    BoundReport,
    RegularityError,
    TheoryConstants,
    check_suite,
    curvature_floor,
    decay_onsets,
    decay_polynomial,
    decay_polynomial_curve,
    decentralized_regret_bound,
    invariant_shift_bound,
    max_adjacent_w1,
    ricci_estimate,
    run_instance,
    suite_passed,
    theory_constants,
    tracking_bound,
    tracking_bound_curve,
)

__version__ = "0.1.0"
