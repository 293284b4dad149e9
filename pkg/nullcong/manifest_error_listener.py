import logging
from dataclasses import dataclass
from typing import List, Optional

from typing_extensions import override

logger = logging.getLogger(__name__)

DECLARATION = "declaration"
EXPRESSION = "expression"


@dataclass(frozen=True)
class ManifestError:
    """
    Attributes:
    ----------
    message: str - What is wrong
    line: int - 1-based manifest line
    column: int - 0-based column of the offending text
    kind: str - "declaration" for the line structure, "expression" for a coframe or Levi entry
    source: str, optional - The offending expression text
    """

    message: str
    line: int
    column: int
    kind: str = DECLARATION
    source: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.message} ({self.line}:{self.column})"


class ErrorListener:
    """
    Receives the errors found while reading a manifest.
    """

    def declaration_error(self, line: int, column: int, msg: str) -> None:
        pass

    def expression_error(self, line: int, column: int, msg: str, source: str) -> None:
        pass


class ManifestErrorListener(ErrorListener):
    """
    Collects every error of a manifest so that all of them are reported at once.
    """

    def __init__(self) -> None:
        super().__init__()
        self._errors: List[ManifestError] = []

    @override
    def declaration_error(self, line: int, column: int, msg: str) -> None:
        logger.debug("manifest %d:%d: %s", line, column, msg)
        self._errors.append(ManifestError(msg, line, column))

    @override
    def expression_error(self, line: int, column: int, msg: str, source: str) -> None:
        logger.debug("manifest %d:%d: %s in %r", line, column, msg, source)
        self._errors.append(ManifestError(msg, line, column, EXPRESSION, source))

    def get_errors(self) -> List[ManifestError]:
        return list(self._errors)

    def has_errors(self) -> bool:
        return bool(self._errors)
