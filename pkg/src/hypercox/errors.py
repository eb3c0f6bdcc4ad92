"""Exception types used across the package."""


class HypercoxError(Exception):
    """Base class for all package-specific errors."""


class DivisionByZero(HypercoxError, ZeroDivisionError):
    pass


class TowerMismatch(HypercoxError):
    """Operands live in incompatible square-root towers and neither is rational."""


class NegativeRadicand(HypercoxError):
    """sqrt of a negative value was requested."""


class NotTotallyRealTower(HypercoxError):
    """Operation requires a totally real tower."""


class InvalidEmbedding(HypercoxError):
    pass


class ExprSyntaxError(HypercoxError):
    """Expression parse failure; carries the 0-based input position."""

    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnsupportedAngle(HypercoxError):
    """pi/m with non-constructible cosine: cos(pi/m) does not live in any
    iterated square-root tower (phi(2m) is not a power of two)."""

    def __init__(self, m):
        super().__init__(
            f"angle pi/{m} not supported: cos(pi/{m}) is not constructible "
            f"by square roots (phi({2 * m}) is not a power of two)"
        )
        self.m = m


class PositiveEntry(HypercoxError):
    """Off-diagonal Gram entry with positive sign (obtuse angle)."""


class NotAFace(HypercoxError):
    """Facet subset whose Gram submatrix is not positive definite."""


class SizeLimit(HypercoxError):
    """Matrix too large for exhaustive canonical-form search."""


class CycleExplosion(HypercoxError):
    """Simple-cycle enumeration exceeded the configured cap; the integrality
    verdict is inconclusive, never guessed."""


class SearchExhausted(HypercoxError):
    """Root search hit its bound without producing a candidate."""


class IterationLimit(HypercoxError):
    """Vinberg iteration hit max_roots before reaching finite volume.

    Carries the partial output in ``roots`` and ``gram``.
    """

    def __init__(self, message, roots=None, gram=None):
        super().__init__(message)
        self.roots = roots
        self.gram = gram
