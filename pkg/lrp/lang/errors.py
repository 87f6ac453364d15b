import enum
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Position:
    """1-based location inside a source text."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class TypeErrorCode(str, enum.Enum):
    """Diagnostics raised while checking a program."""

    UNDEF_VAR = "E-UNDEF-VAR"
    MISMATCH = "E-MISMATCH"
    NOT_FUNC = "E-NOT-FUNC"
    NOT_PROPERTIED = "E-NOT-PROPERTIED"
    NO_PROP = "E-NO-PROP"
    DUP_PROP = "E-DUP-PROP"
    RET_PROPERTIED = "E-RET-PROPERTIED"
    RET_FUNC = "E-RET-FUNC"
    IFHAS_SCRUTINEE = "E-IFHAS-SCRUTINEE"


class TransformErrorCode(str, enum.Enum):
    """Diagnostics raised by the compile-time transformation."""

    NO_PROP = "T-NO-PROP"
    UNKNOWN_FUNC = "T-UNKNOWN-FUNC"
    SPLICE_SCOPE = "T-SPLICE-SCOPE"
    INTERNAL = "T-INTERNAL"


class RuntimeErrorCode(str, enum.Enum):
    """Diagnostics raised while executing a ready program."""

    STUCK = "R-STUCK"
    OVERFLOW = "R-OVERFLOW"
    MAX_STEPS = "R-MAX-STEPS"
    UNREADY = "R-UNREADY"


PARSE_ERROR_CODE = "E-PARSE"
IR_ERROR_CODE = "IR-LOAD"


class LanguageError(Exception):
    """
    Base class of every diagnostic the toolchain reports.

    :param code: stable diagnostic code.
    :param message: human readable description.
    :param position: where the problem was found, if known.
    """

    def __init__(
        self,
        code: str,
        message: str,
        position: Optional[Position] = None,
    ) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.position = position

    def render(self) -> str:
        """
        Format the diagnostic for terminals.

        :return: `error[CODE]: message at line:col`.
        """
        text = f"error[{self.code}]: {self.message}"
        if self.position is not None:
            text += f" at {self.position}"
        return text

    def __str__(self) -> str:
        return self.render()


class ParseError(LanguageError):
    """Lexical or syntactic error; always positioned."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(PARSE_ERROR_CODE, message, Position(line, col))
        self.line = line
        self.col = col


class TypeCheckError(LanguageError):
    """Rejected by the type checker; positioned at the offending node."""

    def __init__(
        self,
        code: TypeErrorCode,
        message: str,
        position: Optional[Position] = None,
    ) -> None:
        super().__init__(code.value, message, position)


class TransformError(LanguageError):
    """Raised by the transformation pass; T-INTERNAL marks a broken invariant."""

    def __init__(self, code: TransformErrorCode, message: str) -> None:
        super().__init__(code.value, message)


class ExecutionError(LanguageError):
    """Raised by the ready gate or the machine."""

    def __init__(self, code: RuntimeErrorCode, message: str) -> None:
        super().__init__(code.value, message)


class IrError(LanguageError):
    """Malformed or incompatible IR document."""

    def __init__(self, message: str) -> None:
        super().__init__(IR_ERROR_CODE, message)
