from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from .types import MeasureKind


class VertexEntry(BaseModel):
    id: str
    mu: Optional[float] = Field(None, gt=0)


class EdgeEntry(BaseModel):
    a: str
    b: str
    w: float = Field(..., gt=0)


class GraphFile(BaseModel):
    """Schema of the graph JSON file."""

    vertices: List[VertexEntry]
    edges: List[EdgeEntry] = []
    measure: MeasureKind = MeasureKind.UNIT

    @model_validator(mode="after")
    def explicit_measure_needs_mu(self) -> "GraphFile":
        if self.measure is MeasureKind.EXPLICIT:
            missing = [v.id for v in self.vertices if v.mu is None]
            if missing:
                raise ValueError(f"explicit measure requires mu on every vertex; missing {missing}")
        return self
