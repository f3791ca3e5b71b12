"""Exception types raised by the library."""


class LatticeCPWLError(Exception):
    """Base class for all errors raised by ``lattice_cpwl``."""


class DegenerateLattice(LatticeCPWLError, ValueError):
    """The two generator directions are (numerically) collinear."""


class InvalidStepsize(LatticeCPWLError, ValueError):
    """A stepsize incompatible with the requested construction."""


class QuadratureUnderResolved(LatticeCPWLError, ArithmeticError):
    """Successive quadrature refinements failed to agree."""


class SolverDiverged(LatticeCPWLError, ArithmeticError):
    """The conjugate-gradient solve hit its iteration cap."""
