"""Exception hierarchy shared by the engines and the CLI."""


class AvezError(Exception):
    """Base class for every error raised by avezlab."""


class GroupError(AvezError, ValueError):
    pass


class TableNotAGroup(GroupError):
    def __init__(self, axiom, witness):
        self.axiom = axiom
        self.witness = tuple(witness)
        super().__init__(f"table is not a group: {axiom} fails at {self.witness}")


class ElementError(GroupError):
    """An element literal or key does not belong to the group."""


class MixedGroupError(GroupError):
    def __init__(self, left, right):
        super().__init__(f"operands live in different groups: {left} vs {right}")


class SubgroupError(GroupError):
    pass


class NormalityViolation(SubgroupError):
    def __init__(self, conjugator, element, conjugator_text=None, element_text=None):
        self.conjugator = conjugator
        self.element = element
        x = conjugator_text if conjugator_text is not None else conjugator
        f = element_text if element_text is not None else element
        super().__init__(f"subgroup is not normal: {x}^-1 {f} {x} lies outside it")


class CapExceeded(AvezError, RuntimeError):
    """A configured resource cap stopped a computation before completion."""


class BallCapExceeded(CapExceeded):
    def __init__(self, cap, radius_reached):
        self.cap = cap
        self.radius_reached = radius_reached
        super().__init__(f"ball enumeration exceeded cap {cap} after radius {radius_reached}")


class SupportCapExceeded(CapExceeded):
    def __init__(self, cap, size, step=None):
        self.cap = cap
        self.size = size
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"measure support {size} exceeds cap {cap}{where}")


class MeasureError(AvezError, ValueError):
    pass
