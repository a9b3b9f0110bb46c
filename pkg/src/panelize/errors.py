"""Exception hierarchy.

CLI exit codes map onto these classes (see ``panelize.cli``).
"""


class PanelizeError(Exception):
    """Base class for all library errors."""


class MeshError(PanelizeError, ValueError):
    """Invalid mesh construction (duplicate ids, dangling node references...)."""


class BdfParseError(PanelizeError):
    """A bulk-data deck could not be parsed.

    ``line`` is the 1-based line number of the offending card, or ``None``
    when the problem is not tied to a single line.
    """

    def __init__(self, message, line=None):
        self.line = line
        self.reason = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ManifestError(PanelizeError):
    """Manifest document has an unknown version or violates the schema."""


class TopologyError(PanelizeError):
    """Mesh topology does not support the requested extraction."""


class WalkError(TopologyError):
    """A boundary or mid-element walk could not be completed."""


class OpenBoundaryError(TopologyError):
    """Flood fill leaked past the supplied boundary."""


class PartitionError(TopologyError):
    """Dividing curves do not partition the skin into panels."""


class MalformedStiffenerError(TopologyError):
    """Stiffener quads do not form simple chains."""


class AnalysisError(PanelizeError):
    """Panel analysis rejected its inputs."""


class OptimizationError(PanelizeError):
    """Sizing could not produce a feasible design."""


class ConfigError(PanelizeError):
    """Unreadable or inconsistent sizing config."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
