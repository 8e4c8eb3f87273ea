"""Toolkit for 68-point facial landmark animation pipelines.

Covers semantic landmark matching over dense feature maps, per-part
appearance gallery selection, two-stage coordinate-frame motion
retargeting, accuracy metrics, interchange file formats and deterministic
rendering.
"""
from .errors import (
    BadMagicError,
    DegenerateBoxError,
    DegenerateEndpointsError,
    DimensionMismatchError,
    DivergentRatioError,
    EmptyGalleryError,
    FormatError,
    LengthMismatchError,
    MissingPartError,
    MixedShapesError,
    NonFiniteError,
    OutOfBoundsError,
    ReposeError,
    TrailingDataError,
    TruncatedPayloadError,
    VersionUnsupportedError,
    WrongCountError,
    ZeroQueryError,
)
from .formats import (
    LandmarkFile,
    decode_embedding,
    decode_landmark_file,
    decode_tensor,
    encode_embedding,
    encode_landmark_file,
    encode_tensor,
    read_embedding,
    read_landmark_file,
    read_tensor,
    write_embedding,
    write_landmark_file,
    write_tensor,
)
from .gallery import (
    Domain,
    GalleryManifest,
    TargetRef,
    assemble_targets,
    closest_domain,
    load_gallery_manifest,
)
from .geometry import (
    CoordinateFrame,
    frame_from_endpoints,
    from_local,
    to_local,
    wrap_angle,
)
from .matching import (
    AnnotatedTarget,
    FeatureMap,
    as_landmark_set,
    average_descriptor,
    descriptor_at,
    match_landmarks,
    match_point,
    upsample_bilinear,
)
from .metrics import NmeReport, nme, nme_report, trajectory_error
from .model import (
    DEFAULT_ENDPOINTS,
    NUM_LANDMARKS,
    PART_RANGES,
    FacialPart,
    LandmarkSequence,
    LandmarkSet,
    PartLayout,
    PartSpec,
    part_slice,
    validate_landmark_set,
)
from .render import (
    PART_CHAINS,
    PART_COLORS,
    RenderStyle,
    frame_filename,
    render_frame,
    render_sequence,
    write_ppm,
)
from .retarget import (
    MotionDelta,
    RetargetConfig,
    apply_global,
    global_delta,
    global_frame,
    part_extent,
    retarget_frame,
    retarget_sequence,
)

__version__ = "0.1.0"
