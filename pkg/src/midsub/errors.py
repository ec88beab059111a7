"""Exception types shared across the package."""


class MidsubError(Exception):
    """Base class for all errors raised by :mod:`midsub`."""


class InvalidParameter(MidsubError, ValueError):
    pass


class WordSyntaxError(InvalidParameter):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class InvalidWord(InvalidParameter):
    pass


class NonManifoldError(MidsubError):
    def __init__(self, message: str, elements):
        self.elements = list(elements)
        shown = ", ".join(str(e) for e in self.elements[:10])
        super().__init__(f"{message}: {shown}" if shown else message)


class StateError(MidsubError):
    pass


class StructuralError(MidsubError):
    pass


class ResourceError(MidsubError):
    pass


class NotABaseCase(MidsubError):
    pass
