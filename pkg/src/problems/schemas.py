from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator


class ConstantProfileModel(BaseModel):
    kind: Literal["constant"]
    value: float


class PolynomialProfileModel(BaseModel):
    kind: Literal["poly"]
    coefficients: List[float] = Field(..., min_length=1)


class SinusoidProfileModel(BaseModel):
    kind: Literal["sin"]
    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0


class SampledProfileModel(BaseModel):
    kind: Literal["samples"]
    times: List[float] = Field(..., min_length=2)
    values: List[float] = Field(..., min_length=2)

    @field_validator("times")
    @classmethod
    def strictly_increasing(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("sample times must be strictly increasing")
        return v


ProfileModel = Annotated[
    Union[ConstantProfileModel, PolynomialProfileModel, SinusoidProfileModel, SampledProfileModel],
    Field(discriminator="kind"),
]


class ProfileEntry(BaseModel):
    profile: ProfileModel


class ForcingEntry(BaseModel):
    amplitude: Dict[str, float]
    profile: ProfileModel


class HolderEntry(BaseModel):
    alpha: float = Field(..., gt=0, le=1)
    c: float = Field(..., gt=0)
    c_tilde: Optional[Union[float, Dict[float, float]]] = None

    @field_validator("c_tilde")
    @classmethod
    def nonnegative_bounds(cls, v):
        if v is None:
            return v
        bounds = v.values() if isinstance(v, dict) else [v]
        if any(b < 0 for b in bounds):
            raise ValueError("c_tilde bounds must be nonnegative")
        return v


class ProblemFile(BaseModel):
    """Schema of the problem JSON file."""

    graph: Union[str, Dict[str, Any]]
    omega: List[str] = Field(..., min_length=1)
    g: Dict[str, float] = {}
    h: Dict[str, float] = {}
    forcing: List[ForcingEntry] = []
    holder: Optional[HolderEntry] = None
