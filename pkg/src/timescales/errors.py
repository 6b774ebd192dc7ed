"""Exception hierarchy shared by every module of the package."""


class TimeScaleError(Exception):
    """Base class for all errors raised by :mod:`timescales`."""


# scale construction / membership

class EmptyInput(TimeScaleError, ValueError):
    pass


class NonFinite(TimeScaleError, ValueError):
    pass


class PointNotInScale(TimeScaleError, ValueError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"point {t!r} is not in the time scale")


class ResultEmpty(TimeScaleError, ValueError):
    pass


# expressions

class ExprSyntaxError(TimeScaleError, ValueError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownVariable(TimeScaleError, ValueError):
    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__(f"unknown variable {name!r}")


class UnboundVariable(TimeScaleError, ValueError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no binding for variable {name!r}")


class DomainError(TimeScaleError, ArithmeticError):
    """Evaluation left the domain of an elementary function."""


# calculus

class NotInDomainKappa(TimeScaleError, ValueError):
    pass


class StepUnderflow(TimeScaleError, ArithmeticError):
    pass


class EndpointNotInScale(TimeScaleError, ValueError):
    pass


class OrderViolation(TimeScaleError, ValueError):
    pass


# variational

class ConvexityPreconditionFailed(TimeScaleError):
    def __init__(self, witness):
        self.witness = dict(witness)
        super().__init__(f"sampled convexity condition violated at {self.witness}")


class NonConvergence(TimeScaleError, ArithmeticError):
    def __init__(self, iterations, gradient_norm):
        self.iterations = iterations
        self.gradient_norm = gradient_norm
        super().__init__(
            f"Newton iteration did not converge after {iterations} steps "
            f"(gradient norm {gradient_norm:.3e})"
        )


class SingularHessian(TimeScaleError, ArithmeticError):
    pass


class ConfigError(TimeScaleError, ValueError):
    pass
