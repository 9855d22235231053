"""foamforge: protective-foam design for packing 3D objects into cuboid cases.

Load an object mesh, pose it, and generate two height-field foam blocks
that fill the gap between the object and a block-discretized case interior,
ready to export for fabrication.
"""

from .angle_opt import OptimizerConfig, ScoreReport, foam_volume_score, optimize_rotation
from .block_map import (
    FOAM,
    FOAM_MINUS,
    FOAM_PLUS,
    OCCUPIED,
    BlockMap,
    Diagnostics,
    GapReport,
    build_block_map,
    gap_volume,
    solid_voxels,
    split_regions,
)
from .depth_raster import (
    DEFAULT_SPACE,
    DEFAULT_SUPERSAMPLE,
    EMPTY,
    ColumnDepthMap,
    DepthTexture,
    DesignSpace,
    Direction,
    reduce_to_blocks,
    render_depth,
    render_depth_pair,
)
from .errors import (
    DegenerateRay,
    DimensionMismatch,
    EmptyMesh,
    FoamForgeError,
    LayerOutOfRange,
    MalformedFile,
    UnsupportedFeature,
)
from .foam_export import (
    ExportFormat,
    FoamResult,
    SliceStack,
    extract_region_mesh,
    extract_slices,
    render_slice_svg,
    signed_volume,
    write_mesh,
)
from .mesh_core import (
    EulerAngles,
    MeshFormat,
    TriangleMesh,
    bounding_box,
    center_mesh,
    format_from_extension,
    load_mesh,
    rotate_mesh,
)
from .pipeline import generate_block_map, generate_foam, generation_time_ms, warmup

__version__ = "0.1.0"
