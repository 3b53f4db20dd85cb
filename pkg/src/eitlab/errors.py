"""Exception types shared across the package."""


class EitlabError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(EitlabError):
    """Operands live on grids with different node counts or lengths."""


class NonZeroMean(EitlabError):
    """Integration requested for a function outside the zero-mean subspace."""


class NoSpectralGap(EitlabError):
    """Singular values show no clean rank cutoff; discretization under-resolved."""


class RankDeficientProbes(EitlabError):
    """Probe functions failed to span the target finite-rank range."""


class CertificateFailed(EitlabError):
    """Completed trace violates the conjugate Cauchy-Riemann identity."""


class TooCloseToContour(EitlabError):
    """Target point is inside the plain-quadrature exclusion band."""


class NonIntegerWinding(EitlabError):
    """Contour integral for a winding number did not round cleanly."""


class UnivalenceViolated(EitlabError):
    """Polynomial map fails the sufficient injectivity condition."""


class InterpolationUnderresolved(EitlabError):
    """Fourier tail of a reparametrization is too large for the grid."""


class SingularInterior(EitlabError):
    """Interior stiffness block is not invertible."""


class NonManifoldMesh(EitlabError):
    """Mesh violates manifold or boundary-loop requirements."""


class DerivativeVanishes(EitlabError):
    """Tangential derivative of the chart trace vanishes at the anchor."""


class WindowCollapse(EitlabError):
    """Chart window shrank below the minimum usable size."""


class OutOfChart(EitlabError):
    """Point falls outside the domain of a boundary chart."""


class DeltaTooSmall(EitlabError):
    """Split radius for the near-contour integral is below the grid scale."""


class EmptyCloud(EitlabError):
    """Point-cloud metric requested on an empty cloud."""


class ConfigInvalid(EitlabError):
    """Experiment configuration failed validation."""


class AllChartsFailed(EitlabError):
    """No anchor admitted a valid boundary chart."""
