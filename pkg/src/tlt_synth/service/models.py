"""Request/response schemas of the steering service."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class ResolverSpec(BaseModel):
    kind: str = "random"  # random | adversarial | scripted | external
    seed: int = 0
    script: list[int] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind not in ("random", "adversarial", "scripted", "external"):
            raise ValueError(f"unknown resolver kind {self.kind!r}")
        if self.kind == "scripted" and self.script is None:
            raise ValueError("scripted resolver needs a script")
        return self


class CreateSessionRequest(BaseModel):
    formula: str
    system: dict | None = None  # controlled system JSON document
    linear: dict | None = None  # linear system spec JSON document
    grid: list[int] | None = None
    input_samples: list[int] | None = None
    x0: int | list[float] | None = None
    resolver: ResolverSpec = Field(default_factory=ResolverSpec)

    @model_validator(mode="after")
    def _check(self):
        if (self.system is None) == (self.linear is None):
            raise ValueError("provide exactly one of system / linear")
        if self.linear is not None and self.grid is None:
            raise ValueError("linear systems need a grid")
        return self


class StepRequest(BaseModel):
    input: int
    successor: int | None = None  # only honored by the external resolver


class SpecUpdateRequest(BaseModel):
    formula: str


class ParseRequest(BaseModel):
    formula: str


class FeasibleInput(BaseModel):
    index: int
    name: str
    vector: list[float] | None = None


class StateView(BaseModel):
    id: int
    labels: list[str]
    coords: list[float] | None = None


class TltSnapshot(BaseModel):
    active: list[int]
    membership: dict[int, bool]


class HistoryEntry(BaseModel):
    k: int
    state: int
    feasible: list[int]
    chosen: int
    next: int


class StepView(BaseModel):
    session_id: str
    k: int
    status: str
    formula: str
    state: StateView
    inputs: list[FeasibleInput]  # the full palette; feasible is the choosable subset
    feasible: list[FeasibleInput]
    suggested: list[int]
    tlt: TltSnapshot
    history: list[HistoryEntry]


class SessionCreated(BaseModel):
    session_id: str
    step: StepView


class ParseResponse(BaseModel):
    ok: bool
    formula: str | None = None
    offset: int | None = None
    expected: list[str] | None = None


class ApiError(BaseModel):
    code: str
    message: str
    field: str | None = None
