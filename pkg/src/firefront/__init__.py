"""Wind-driven fire front propagation with anisotropic travel-time geometry."""

from .errors import (
    DegenerateTangent,
    EmptyFan,
    EmptyIntersection,
    FireFrontError,
    GridTooCoarse,
    IoError,
    ModeMismatch,
    NonNavigable,
    NonSpd,
    OutOfHorizon,
    ParseError,
    SingularMetric,
    StepFailure,
    Unreachable,
    ValidationError,
    ZeroBaseVector,
    ZeroDirection,
    ZeroVector,
)
from .indicatrix import (
    EllipsoidSpec,
    IndicatrixSample,
    metric_from_spec,
    quadratic_eval,
    rotation_matrix,
    sample_randers_indicatrix,
)
from .metric import (
    RandersEval,
    ZermeloData,
    eval_randers,
    fundamental_tensor,
    is_f_orthogonal,
    polyline_length,
    unit_f_direction,
    validate_spd,
)
from .wind import (
    AnalyticWind,
    ConstantWind,
    FlowMap,
    GridWind,
    WindSegment,
    flow,
    flow_differential,
    is_killing,
    lie_derivative_h,
    load_grid_wind,
    rotation_wind,
    shear_wind,
)
from .geodesics import (
    GeodesicProblem,
    RayBundle,
    Trajectory,
    christoffel,
    integrate_h_geodesic,
    trace_wave_ray,
    trace_wave_rays,
)
from .propagation import (
    ArrivalField,
    CurveFront,
    FrontGeometry,
    FrontSampling,
    PlaneGrid,
    PointFront,
    SampledFront,
    SurfaceFront,
    VolumeGrid,
    Wavefront,
    arrival_time_field,
    huygens_step,
    launch_directions,
    polyline_hausdorff,
    propagate_front,
    propagate_front_slice,
    select_mode,
    spherical_wavefront,
)
from .strategy import (
    BallRegion,
    HalfSpaceRegion,
    ImplicitRegion,
    StrategicResult,
    TriangleRegion,
    strategic_path_all_equal,
    strategic_path_to_point,
    strategic_path_to_region,
    strategic_points,
)
from .scenario import (
    RunReport,
    Scenario,
    load_scenario,
    parse_scenario,
    run_scenario,
    serialize_scenario,
    wavefronts_to_csv,
    write_outputs,
)
from .render import render_slice
from . import fixtures

__version__ = "0.1.0"
