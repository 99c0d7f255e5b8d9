"""Exception hierarchy shared by all wedgelab modules."""


class WedgeLabError(Exception):
    """Base class for every error raised by wedgelab."""


class PoleProximity(WedgeLabError):
    """Evaluation point lies within the exclusion radius of a declared pole."""


class NotAPole(WedgeLabError):
    pass


class ContourInconsistent(WedgeLabError):
    """Residue estimates from two contour radii disagree."""


class InvalidParameter(WedgeLabError, ValueError):
    pass


class EvenFactorCount(InvalidParameter):
    """An even number of imaginary Blaschke pair factors flips the residue sign."""


class OrbitOverflow(InvalidParameter):
    pass


class QuadratureBudgetExceeded(WedgeLabError):
    pass


class TooManyParticles(WedgeLabError, ValueError):
    pass


class UncancelledPole(WedgeLabError):
    pass


class MismatchedParticleNumber(WedgeLabError, ValueError):
    pass


class DomainViolation(WedgeLabError):
    """A vector lies outside the domain required by an operator."""


class WedgeMismatch(WedgeLabError, ValueError):
    pass


class ConfigError(WedgeLabError, ValueError):
    """Invalid run configuration; ``field`` names the offending key path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
