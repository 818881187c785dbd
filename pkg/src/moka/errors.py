"""Exception hierarchy shared by all moka modules."""


class MokaError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MokaError):
    pass


class ValidationError(MokaError):
    pass


class NotTotal(ValidationError):
    def __init__(self, state):
        super().__init__(f"state {state!r} has no successor")
        self.state = state


class InconsistentLabeling(ValidationError):
    pass


class UnknownState(ValidationError):
    def __init__(self, state):
        super().__init__(f"unknown state {state!r}")
        self.state = state


class UnknownProp(MokaError):
    def __init__(self, prop):
        super().__init__(f"unknown proposition {prop!r}")
        self.prop = prop


class UnknownBasic(MokaError):
    def __init__(self, name):
        super().__init__(f"unknown basic expression {name!r}")
        self.name = name


class ModulusZero(ValidationError):
    pass


class NonMonotone(MokaError):
    pass


class IterationBudgetExceeded(MokaError):
    pass


class UnboundVariable(MokaError):
    def __init__(self, name):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class UnfoldBudgetExceeded(MokaError):
    pass


class NonFrameLocalBody(MokaError):
    pass


class NotAMuTerm(MokaError):
    pass


class DialectViolation(MokaError):
    pass


class UnboundLogicVar(MokaError):
    def __init__(self, name):
        super().__init__(f"free logic variable {name!r} has no valuation")
        self.name = name


class NotMooreClosed(ValidationError):
    pass


class IncompatibleEquivalence(ValidationError):
    """An equivalence class is not closed under joins."""


class IncompatibleResult(IncompatibleEquivalence):
    pass


class BudgetExceeded(MokaError):
    pass


class NoStrictRefinement(MokaError):
    pass
