"""Synthetic handwriting with controllable graphic maturity.

The pipeline runs in two stages mirroring how people write: an
effector-independent action plan (a walk over a hexagonal grid) and its
effector-dependent execution (a train of overlapping lognormal speed
pulses).  Maturity is controlled by the percentage of plan points a
writer retains, plus noise levels that shrink as skill grows.
"""

from .errors import (
    DegenerateSegmentError,
    GlyphFileError,
    InfeasibleMaturityError,
    LegibilityError,
    MissingGlyphError,
    ParameterDomainError,
    TrajectoryFileError,
)
from .evaluation import (
    FeatureVector,
    MaturityRow,
    SimilarityWeights,
    anova_one_way,
    count_velocity_peaks,
    estimate_static_strokes,
    extract_features,
    maturity_curve,
    similarity,
    sweep_table,
)
from .evolution import EvolutionConfig, evolve_plan, scale_noise, target_count
from .kinematics import (
    ParameterAssignment,
    SampledTrajectory,
    StrokeSegment,
    WriterProfile,
    assign_parameters,
    integrate_trajectory,
    interior_angle,
    synthesize_plan,
    synthesize_velocity,
    synthesize_word,
)
from .lognormal import LognormalStroke, delay_factor, lognormal_speed, sigmoid
from .plan import (
    GlyphPlan,
    GuideLines,
    HexGrid,
    TrajectoryPlan,
    build_word_plan,
    builtin_library,
    default_guides,
    dump_glyph_library,
    grid_node_position,
    load_glyph_library,
)
from .render import InkModel, RasterImage, load_png, render_offline, save_png
from .trajio import export_svg, export_trajectory, import_trajectory

__version__ = "0.1.0"

__all__ = [
    "DegenerateSegmentError",
    "EvolutionConfig",
    "FeatureVector",
    "GlyphFileError",
    "GlyphPlan",
    "GuideLines",
    "HexGrid",
    "InfeasibleMaturityError",
    "InkModel",
    "LegibilityError",
    "LognormalStroke",
    "MaturityRow",
    "MissingGlyphError",
    "ParameterAssignment",
    "ParameterDomainError",
    "RasterImage",
    "SampledTrajectory",
    "SimilarityWeights",
    "StrokeSegment",
    "TrajectoryFileError",
    "TrajectoryPlan",
    "WriterProfile",
    "anova_one_way",
    "assign_parameters",
    "build_word_plan",
    "builtin_library",
    "count_velocity_peaks",
    "default_guides",
    "delay_factor",
    "dump_glyph_library",
    "estimate_static_strokes",
    "evolve_plan",
    "export_svg",
    "export_trajectory",
    "extract_features",
    "grid_node_position",
    "import_trajectory",
    "integrate_trajectory",
    "interior_angle",
    "load_glyph_library",
    "load_png",
    "lognormal_speed",
    "maturity_curve",
    "render_offline",
    "save_png",
    "scale_noise",
    "sigmoid",
    "similarity",
    "synthesize_plan",
    "synthesize_velocity",
    "synthesize_word",
    "sweep_table",
    "target_count",
]
