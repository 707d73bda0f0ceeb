"""Typed errors raised by the engine.

Every failure mode that callers are expected to handle gets its own class;
anything else is a plain ValueError/AssertionError and indicates a bug.
"""


class CRFormsError(Exception):
    """Base class for all engine errors."""


# -- linear algebra ----------------------------------------------------------

class InconsistentSystem(CRFormsError):
    """A linear system Ax = b has no solution (b is not in the image of A)."""


class NonUniqueSolution(CRFormsError):
    """Uniqueness was asserted but the kernel of the system is nonzero."""


class DegenerateGram(CRFormsError):
    """The Gram matrix restricted to a subspace is singular."""


# -- exterior algebra --------------------------------------------------------

class IndexOutOfRange(CRFormsError):
    """A frame index lies outside {1..n}."""


class DimensionMismatch(CRFormsError):
    """Two forms live over different model dimensions."""


# -- model construction ------------------------------------------------------

class LeviMismatch(CRFormsError):
    """The supplied Levi matrix is not hermitian invertible."""


class JacobiFailure(CRFormsError):
    """d^2 != 0 on some coframe element of the supplied structure data."""


class ConnectionSolveFailure(CRFormsError):
    """The connection system is inconsistent or non-unique (malformed input)."""


class SymmetryViolation(CRFormsError):
    """An extracted curvature tensor lacks its required symmetries."""


class NotInvariantModel(CRFormsError):
    """An invariant-complex computation was requested on a non-quotient model."""


class NotTorsionFree(CRFormsError):
    """A Sasaki-only operation was requested on a model with torsion."""


class NotStrictlyPseudoconvex(CRFormsError):
    """A Hodge-theoretic operation was requested with an indefinite Levi form."""


# -- Rumin spaces and operators ----------------------------------------------

class BadBidegree(CRFormsError):
    """A (p, q) pair is incompatible with the requested operation."""


class NotTraceFree(CRFormsError):
    """A component table that must be trace-free is not."""


class BidegreeMismatch(CRFormsError):
    """Operands of a bidegree-homogeneous pairing have different bidegrees."""


class MiddleDegreeOnly(CRFormsError):
    """An operator defined only in middle degree was requested elsewhere."""


class MembershipViolation(CRFormsError):
    """A form does not lie in the asserted Rumin space."""


class NotClosed(CRFormsError):
    """A cup-product representative is not a cocycle."""
