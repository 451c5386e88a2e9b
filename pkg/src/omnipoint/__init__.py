"""Point-at-object estimation on equirectangular panoramas.

Lifts 2D skeleton keypoints to a directed great circle on the viewing sphere,
scans perspective regions of interest along the circle, and ranks
back-projected object detections by distance to the circle or with a linear
SVM over five standardized features.
"""

from .config import PipelineConfig
from .errors import (
    BehindView,
    DegenerateBox,
    DegenerateCircle,
    EmptyCorpus,
    InvalidParams,
    MeridianCircle,
    MissingFixture,
    MissingKeypoints,
    NoArmDetected,
    NoPositives,
    NotConverged,
    OutOfGrid,
    PipelineError,
    SingleClass,
    TooFewSamples,
    TooFewVertices,
)
from .gesture import (
    Keypoint,
    PersonBox,
    Skeleton,
    elbow_angle,
    person_view_spec,
    pointing_circle,
    pointing_circle_from_dirs,
    select_pointing_arm,
    user_lonlat_from_bbox,
)
from .pipeline import (
    ModeFlags,
    SceneResult,
    estimate,
    evaluate,
    match_gt,
    result_to_dict,
    train_model,
)
from .projection import (
    EquirectGrid,
    LonLatRect,
    SphericalFootprint,
    ViewSpec,
    backproject_bbox,
    equirect_px_to_lonlat,
    footprint_from_equirect_bbox,
    gnomonic_forward,
    gnomonic_inverse,
    lonlat_to_equirect_px,
    render_view,
    spherical_polygon_area,
    wrapped_rect_iou,
)
from .scan import (
    FEATURE_NAMES,
    Candidate,
    Detection,
    FeatureVector,
    build_candidates,
    compute_features,
    scan_views,
)
from .select import (
    Ranking,
    Standardizer,
    SvmModel,
    build_freq_table,
    decision_value,
    fit_standardizer,
    rank_by_distance,
    rank_by_svc,
    solve_hinge_svm,
    train_svc,
)
from .sphere import (
    DirectedPointing,
    GreatCircle,
    LonLat,
    SphereDir,
    angular_distance_to_circle,
    circle_lat_at_lon,
    dir_to_lonlat,
    great_circle_from_two,
    lonlat_to_dir,
    point_at_arc,
)
from .synth import SynthParams, synth_corpus, synth_scene, write_scene

__version__ = "0.1.0"
