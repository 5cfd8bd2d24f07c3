"""Exception types raised across the package."""


class ParameterDomainError(ValueError):
    """A numeric parameter lies outside its valid domain."""


class MissingGlyphError(KeyError):
    """A character has no glyph plan in the active library."""


class InfeasibleMaturityError(ValueError):
    """Requested retention percentage cannot yield at least 5 plan points."""


class LegibilityError(RuntimeError):
    """Point selection could not keep a guide-line point for some glyph."""


class DegenerateSegmentError(ValueError):
    """A geometric construction received coincident points."""


class GlyphFileError(ValueError):
    """A glyph library file is malformed."""


class TrajectoryFileError(ValueError):
    """A trajectory file is malformed."""
