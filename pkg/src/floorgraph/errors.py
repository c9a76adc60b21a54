"""Exception hierarchy.

``DataError`` subclasses map to CLI exit code 3 and ``ModelError`` subclasses
to exit code 4.
"""


class FloorGraphError(Exception):
    pass


class DataError(FloorGraphError):
    pass


class ModelError(FloorGraphError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DuplicateRecordId(DataError):
    pass


class InsufficientLabels(DataError):
    pass


class NonPositiveWeight(DataError):
    pass


class OutsideBuilding(DataError):
    """Every MAC of an online scan is unknown to the graph."""


class EmptyGraph(DataError):
    pass


class EmptyInput(DataError):
    pass


class DegenerateSpec(DataError):
    pass


class NotNeighbors(ModelError):
    pass


class UnknownNode(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class NoLabels(ModelError):
    pass


class EmptyModel(ModelError):
    pass


class ModelVersionMismatch(ModelError):
    pass
