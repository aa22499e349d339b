"""Exception types raised across the package."""


class SketchdexError(Exception):
    """Base class for all package-specific errors."""


class OutOfBoundsError(SketchdexError):
    """A window or rectangle extends outside the page it refers to."""


class DimensionMismatchError(SketchdexError):
    """A vector's dimensionality does not match the codebook or index."""


class InsufficientSamplesError(SketchdexError):
    """Too few training vectors to learn the requested number of centroids."""


class IndexOutOfRangeError(SketchdexError):
    """A code references a centroid index outside [0, K)."""


class EmptyIndexError(SketchdexError):
    """The index holds no pages (or no searchable windows)."""


class PageNotFoundError(SketchdexError):
    """No page with the requested id exists in the index."""


class BlankQueryError(SketchdexError):
    """The query sketch or region contains no usable edge content."""


# A relevance-feedback rectangle with no ink is the same failure as a blank
# sketch; both surface as HTTP 422 with the same machine-readable code.
BlankRegionError = BlankQueryError


class CorruptIndexError(SketchdexError):
    """An index or codebook file failed structural validation.

    Carries the byte offset at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
