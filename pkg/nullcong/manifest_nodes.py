from typing import Dict, List, Optional, Tuple


class Position:
    """
    Contains the cursor position (line and column) in the manifest text.
    """

    def __init__(self, line: int, col: int) -> None:
        self.line: int = line
        self.column: int = col


class Location:
    """
    Contains the location (start line/column & end line/column) of a node in the manifest.

    Attributes:
    ----------
    start: Position - The line and column of the start of the node
    end: Position - The line and column of the end of the node
    """

    def __init__(self, start: Tuple[int, int], end: Tuple[int, int]) -> None:
        self.start: Position = Position(start[0], start[1])
        self.end: Position = Position(end[0], end[1])


class BaseManifestNode:
    """
    Base class for all manifest nodes.

    Attributes:
    ----------
    type: str - The string representation of a type of the node
    loc: Location - The location of the node in the manifest text
    """

    def __init__(self, type: str = None, loc: Optional[Location] = None) -> None:
        self.type: str = type if type else self.type
        self.loc: Location = loc

    def __new__(cls, *args, **kwargs) -> "BaseManifestNode":
        o = object.__new__(cls)
        setattr(o, "type", cls.__name__)
        setattr(o, "loc", None)
        return o

    def add_loc(self, loc: Location) -> None:
        self.loc = loc


class ExpressionNode(BaseManifestNode):
    """
    A closed-form expression in the chart coordinates.

    The parsed sympy expression is kept in ``_expr`` and is not part of the JSON dump.
    """

    def __init__(self, source: str, expr=None) -> None:
        self.source: str = source
        self.canonical: str = "" if expr is None else str(expr)
        self._expr = expr

    @property
    def expr(self):
        return self._expr


class RankDeclaration(BaseManifestNode):
    def __init__(self, m: int) -> None:
        self.m: int = m


class CoordinatesDeclaration(BaseManifestNode):
    def __init__(self, names: List[str]) -> None:
        self.names: List[str] = names


class FormDeclaration(BaseManifestNode):
    """
    One coframe 1-form: ``theta0`` (real contact form) or ``theta<k>`` (complex).
    """

    def __init__(self, name: str, index: int, components: List[ExpressionNode]) -> None:
        self.name: str = name
        self.index: int = index
        self.components: List[ExpressionNode] = components


class LeviEntry(BaseManifestNode):
    """
    The Levi form entry h_{row, column-bar}, indices starting at 1.
    """

    def __init__(self, row: int, column: int, value: ExpressionNode) -> None:
        self.row: int = row
        self.column: int = column
        self.value: ExpressionNode = value


class Manifest(BaseManifestNode):
    """
    A root node of a parsed base manifest.
    """

    def __init__(
        self,
        rank: Optional[RankDeclaration],
        coordinates: Optional[CoordinatesDeclaration],
        forms: Dict[int, FormDeclaration],
        levi: List[LeviEntry],
        name: str = "manifest",
    ) -> None:
        self.name: str = name
        self.rank: Optional[RankDeclaration] = rank
        self.coordinates: Optional[CoordinatesDeclaration] = coordinates
        self.forms: Dict[int, FormDeclaration] = forms
        self.levi: List[LeviEntry] = levi
        self.errors = []

    @property
    def m(self) -> int:
        return self.rank.m

    @property
    def coordinate_names(self) -> List[str]:
        return self.coordinates.names
