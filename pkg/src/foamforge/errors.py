"""Exception types shared across the package."""


class FoamForgeError(Exception):
    """Base class for all foamforge errors."""


class MalformedFile(FoamForgeError):
    """Input bytes do not parse under the declared format."""


class EmptyMesh(FoamForgeError):
    """Operation requires a mesh with at least one triangle/vertex."""


class UnsupportedFeature(FoamForgeError):
    """File parses but uses a feature outside the supported subset."""


class DimensionMismatch(FoamForgeError):
    """Texture or grid dimensions do not agree with the design space."""


class LayerOutOfRange(FoamForgeError):
    """Slice layer index outside [0, nx)."""


class DegenerateRay(FoamForgeError):
    """A parity ray still grazes mesh edges/vertices after all retries."""
