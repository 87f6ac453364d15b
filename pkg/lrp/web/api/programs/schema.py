from typing import List, Optional

from pydantic import BaseModel, Field


class ProgramRequest(BaseModel):
    """Program text submitted for processing."""

    source: str


class RunRequest(ProgramRequest):
    """Program with an optional step budget and trace flag."""

    max_steps: Optional[int] = Field(default=None, ge=0)
    trace: bool = False


class CheckResponse(BaseModel):
    """Pretty-printed type of an accepted program."""

    type: str


class TransformResponse(BaseModel):
    """Transformed program and its functional context, one entry per line."""

    expr: str
    type: str
    delta: List[str]


class RunResponse(BaseModel):
    """Final value; `trace` holds one line per step when requested."""

    value: str
    steps: int
    trace: Optional[List[str]] = None


class ErrorResponse(BaseModel):
    """A diagnostic; position fields are set for parse and type errors."""

    code: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None
