"""Exception hierarchy. Every input problem is a ``ParafreeError``."""


class ParafreeError(Exception):
    """Base class for all errors raised on bad input."""


class InvalidLetter(ParafreeError):
    pass


class EmptyWordError(ParafreeError):
    pass


class WordSyntaxError(ParafreeError):
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class ShapeError(ParafreeError):
    pass


class ValidationError(ParafreeError):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class DisconnectedGraph(ValidationError):
    pass


class TrivialEdgeWord(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class UnknownVertexRef(ValidationError):
    pass


class UnknownEdge(ValidationError):
    pass


class UnknownGenerator(ParafreeError):
    pass


class IncompatibleTargets(ParafreeError):
    pass


class EdgeNotCyclic(ParafreeError):
    pass


class JsonError(ParafreeError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
