from typing import Any

from pydantic import BaseModel, ConfigDict, Field

# |W(E7)| is 2,903,040; the default cap admits the full group
DEFAULT_CLOSURE_CAP = 3_000_000


class ClosureOptions(BaseModel):
    """Limits applied while enumerating a subgroup of W(E7)"""

    model_config = ConfigDict(frozen=True)

    cap: int = Field(default=DEFAULT_CLOSURE_CAP, ge=1)
    log_every: int = Field(default=250_000, ge=1)

    def to_closure_kwargs(self) -> dict[str, Any]:
        """Converts these options into keyword arguments for `weyl.closure`"""
        return {"cap": self.cap, "log_every": self.log_every}


class SearchOptions(BaseModel):
    """Limits for the equivariant minimal model search"""

    model_config = ConfigDict(frozen=True)

    early_exit_k2: int = Field(default=9, ge=2, le=9)
    max_states: int = Field(default=2_000_000, ge=1)


class NumericOptions(BaseModel):
    """Tolerances for the floating-point line model of the quartic family.

    Numerics only decide which combinatorial object a computed line is; every
    identification made with them is re-validated with exact lattice arithmetic.
    """

    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(default=1e-7, gt=0.0)


class RunOptions(BaseModel):
    """Global options shared by every CLI subcommand"""

    model_config = ConfigDict(frozen=True)

    json_output: bool = Field(default=False)
    cap: int = Field(default=DEFAULT_CLOSURE_CAP, ge=1)
    store_path: str | None = Field(default=None)
    verbose: bool = Field(default=False)

    def closure_options(self) -> ClosureOptions:
        return ClosureOptions(cap=self.cap)
