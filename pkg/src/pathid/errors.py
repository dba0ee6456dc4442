"""Exception types shared across the package.

The CLI maps these onto distinct exit codes so failures stay
machine-distinguishable: file parsing (2), circuit evolution (3),
degenerate fit input (4) and graph problems (5).
"""


class PathIdError(Exception):
    """Base class for package-specific errors."""


class FileFormatError(PathIdError):
    """A circuit, graph or sweep file could not be parsed or validated."""


class EvolutionError(PathIdError):
    """A circuit could not be evolved (unbound parameter, bad element input)."""


class DegenerateDataError(PathIdError):
    """Fringe-fit input does not constrain the model (constant data, too few points)."""


class GraphError(PathIdError):
    """Invalid graph operation (odd vertex count, all-zero distribution)."""
