"""Exception and warning types shared across the solver."""


class SolverError(Exception):
    """Base class for all solver failures."""


class ConvergenceFailure(SolverError):
    """An iteration did not reach its tolerance within the step budget."""


class DependentInput(SolverError):
    """Input vectors are linearly dependent up to tolerance."""


class DegenerateResultant(SolverError):
    """The resultant vanished identically: the two polynomials share a factor."""


class SingularJacobian(SolverError):
    """Newton hit a (numerically) singular Jacobian."""


class RankDeficientPencil(SolverError):
    """The pencil dropped below rank 3 at the requested point."""


class NoSectionZero(SolverError):
    """The sweep produced no certified zero; input is likely degenerate."""


class FlagDegenerate(SolverError):
    """No third flag vector survives projection; candidate needs re-dispatch."""


class Unsolved(SolverError):
    """All solution paths, including the perturbation ladder, failed."""


class ParseError(ValueError):
    """Malformed matrix input."""


class RepeatedEigenvalueWarning(UserWarning):
    """Eigenvalues clustered within tolerance; multiplicities are estimates."""


class UnstableCountWarning(UserWarning):
    """A degree-count experiment disagreed across random retries."""
