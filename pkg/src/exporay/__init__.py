"""Rays, landing points and parameter-plane structure for exp(z) + kappa.

The public surface re-exports the working vocabulary: external
addresses and their order, the exponential family and its periodic
orbits, dynamic-ray evaluation and landing, parameter-ray continuation
with parabolic polishing, component scans, wakes, the experiment
harness, and the renderers.
"""

from .address import (
    ExternalAddress,
    enumerate_periodic,
    in_open_interval,
    lex_cmp,
    sort_lex,
)
from .dynamics import (
    NotACycle,
    OrbitOverflow,
    OrbitSearchResult,
    PeriodicOrbit,
    classify,
    classify_singular_orbit,
    exp_map,
    find_periodic_points,
    growth,
    growth_inv,
    growth_iter,
    multiplier,
    newton_periodic,
    orbit,
)
from .geometry import (
    Rect,
    point_in_polygon,
    point_polyline_distance,
    point_segment_distance,
)
from .parallel import default_threads, parallel_map
from .parameter import (
    ComponentGrid,
    ContinuationStalled,
    HypothesisNotMet,
    ParabolicParameter,
    ParameterRayTrace,
    PeriodMismatch,
    PolishDiverged,
    RaysNotFound,
    RootNotFound,
    Wake,
    check_parameter_ray_bound,
    continue_to_multiplier,
    find_characteristic_rays,
    land_parameter_ray,
    param_vertical_order,
    parameter_ray_bound,
    period_one_wake,
    polish_parabolic,
    scan_components,
    trace_and_land,
    trace_parameter_ray,
    wake_membership,
)
from .rays import (
    DepthSaturated,
    LandingEstimate,
    NotConverged,
    OrderUnresolved,
    RayBroken,
    RayEvalConfig,
    RaySample,
    eval_ray,
    eval_ray_dk,
    functional_residual,
    land_ray,
    ray_polyline,
    strip_violations,
    vertical_order,
)
from .render import (
    draw_polyline,
    escape_counts,
    grid_image,
    period_color,
    render_dynamical,
    render_parameter,
    save_png,
    shade_counts,
)
from .verify import (
    ExperimentReport,
    PathCrossesRay,
    verify_holomorphic_motion,
    verify_theorem1,
    verify_theorem2,
    verify_wake_persistence,
)

__version__ = "0.1.0"

__all__ = [
    "ExternalAddress", "enumerate_periodic", "in_open_interval", "lex_cmp",
    "sort_lex",
    "NotACycle", "OrbitOverflow", "OrbitSearchResult", "PeriodicOrbit",
    "classify", "classify_singular_orbit", "exp_map", "find_periodic_points",
    "growth", "growth_inv", "growth_iter", "multiplier", "newton_periodic",
    "orbit",
    "Rect", "point_in_polygon", "point_polyline_distance",
    "point_segment_distance",
    "default_threads", "parallel_map",
    "ComponentGrid", "ContinuationStalled", "HypothesisNotMet",
    "ParabolicParameter", "ParameterRayTrace", "PeriodMismatch",
    "PolishDiverged", "RaysNotFound", "RootNotFound", "Wake",
    "check_parameter_ray_bound", "continue_to_multiplier",
    "find_characteristic_rays", "land_parameter_ray", "param_vertical_order",
    "parameter_ray_bound", "period_one_wake", "polish_parabolic",
    "scan_components", "trace_and_land", "trace_parameter_ray",
    "wake_membership",
    "DepthSaturated", "LandingEstimate", "NotConverged", "OrderUnresolved",
    "RayBroken", "RayEvalConfig", "RaySample", "eval_ray", "eval_ray_dk",
    "functional_residual", "land_ray", "ray_polyline", "strip_violations",
    "vertical_order",
    "draw_polyline", "escape_counts", "grid_image", "period_color",
    "render_dynamical", "render_parameter", "save_png", "shade_counts",
    "ExperimentReport", "PathCrossesRay", "verify_holomorphic_motion",
    "verify_theorem1", "verify_theorem2", "verify_wake_persistence",
    "__version__",
]
