"""Exception types raised by the g2flow engine."""


class G2FlowError(Exception):
    """Base class for all engine errors."""


class DegreeError(G2FlowError, ValueError):
    """Form degrees are incompatible with the requested operation."""


class MetricError(G2FlowError, ValueError):
    """A bilinear form is not a valid Riemannian metric."""


class InvalidAlgebra(G2FlowError, ValueError):
    """Structure constants violate antisymmetry or the Jacobi identity."""


class NotPositive(G2FlowError, ValueError):
    """A 3-form does not define a G2-structure."""


class PositivityLost(NotPositive):
    """The evolving 3-form left the open orbit of positive forms."""


class NotCoclosed(G2FlowError, ValueError):
    """A co-closed-only computation was given a structure with d(psi) != 0."""


class BlowUpHalt(G2FlowError):
    """The blow-up quantity crossed the configured halting threshold."""


class ConfigError(G2FlowError, ValueError):
    """A run configuration is malformed or unresolvable."""
