"""Defines Pydantic models for body specs, Hamiltonian specs and run configuration.

Body and Hamiltonian specs are the JSON documents accepted on the command line;
each model validates its own invariants and converts itself into the value
objects of `app.core.bodies` and `app.models.hamiltonians`. Validation failures
surface as SpecError with a dotted path to the offending field.
"""

import json
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from app.analysis.scan import ramos_body, ramos_union_body
from app.config import settings
from app.core import bodies
from app.exceptions import SpecError
from app.models import hamiltonians

COMMANDS = ("mean-width", "msp", "optimize", "variation", "staircase", "ramos", "criteria")


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _positive(values: List[float], name: str):
    if not values or any(value <= 0 for value in values):
        raise ValueError(f"{name} must be a non-empty list of positive numbers")


class EllipsoidSpec(_Spec):
    """E(a, b) = {sum x_i^2/a_i^2 + y_i^2/b_i^2 <= 1}, optionally translated."""
    type: Literal["ellipsoid"]
    a: List[float] = Field(..., description="Semi-axes along x_1..x_n.")
    b: List[float] = Field(..., description="Semi-axes along y_1..y_n.")
    center: Optional[List[float]] = Field(None, description="Translation vector of length 2n.")

    @model_validator(mode="after")
    def check_axes(self):
        _positive(self.a, "a")
        _positive(self.b, "b")
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have the same length")
        if self.center is not None and len(self.center) != 2 * len(self.a):
            raise ValueError(f"center must have {2 * len(self.a)} coordinates")
        return self

    def to_body(self) -> bodies.SupportBody:
        return bodies.Ellipsoid(self.a, self.b, self.center)


class BallSpec(_Spec):
    type: Literal["ball"]
    n: int = Field(..., ge=1, description="Half-dimension.")
    radius: float = Field(1.0, gt=0)

    def to_body(self) -> bodies.SupportBody:
        return bodies.ball(self.n, self.radius)


class PolydiskSpec(_Spec):
    """P(r), the product of disks of radii r_i."""
    type: Literal["polydisk"]
    r: List[float] = Field(..., description="Disk radii.")

    @model_validator(mode="after")
    def check_radii(self):
        _positive(self.r, "r")
        return self

    def to_body(self) -> bodies.SupportBody:
        return bodies.Polydisk(self.r)


class PolyannulusSpec(_Spec):
    """X_[a,b] = {a_i <= |z_i| <= b_i}."""
    type: Literal["polyannulus"]
    a: List[float] = Field(..., description="Inner radii.")
    b: List[float] = Field(..., description="Outer radii.")

    @model_validator(mode="after")
    def check_radii(self):
        if len(self.a) != len(self.b) or not self.a:
            raise ValueError("a and b must be non-empty and of the same length")
        if any(low < 0 or low > high for low, high in zip(self.a, self.b)):
            raise ValueError("radii must satisfy 0 <= a_i <= b_i")
        return self

    def to_body(self) -> bodies.SupportBody:
        return bodies.Polyannulus(self.a, self.b)


class UnionSpec(_Spec):
    type: Literal["union"]
    members: List["BodySpec"] = Field(..., min_length=1, description="Bodies of equal dimension.")

    def to_body(self) -> bodies.SupportBody:
        return bodies.Union(tuple(member.to_body() for member in self.members))


class LagrangianBidiskSpec(_Spec):
    type: Literal["lagrangian-bidisk"]

    def to_body(self) -> bodies.SupportBody:
        return bodies.LagrangianBidisk()


class PointCloudSpec(_Spec):
    type: Literal["point-cloud"]
    points: List[List[float]] = Field(..., min_length=1, description="Points of R^{2n}.")

    @model_validator(mode="after")
    def check_points(self):
        sizes = {len(point) for point in self.points}
        if len(sizes) != 1 or sizes.pop() % 2:
            raise ValueError("points must all have the same even number of coordinates")
        return self

    def to_body(self) -> bodies.SupportBody:
        return bodies.PointCloud(self.points)


class LinearImageSpec(_Spec):
    """T K for a square matrix T given row by row."""
    type: Literal["linear-image"]
    matrix: List[List[float]] = Field(..., description="Row-major 2n x 2n matrix.")
    inner: "BodySpec"

    @model_validator(mode="after")
    def check_square(self):
        size = len(self.matrix)
        if size == 0 or size % 2 or any(len(row) != size for row in self.matrix):
            raise ValueError("matrix must be square with an even number of rows")
        return self

    def to_body(self) -> bodies.SupportBody:
        return bodies.LinearImage(self.matrix, self.inner.to_body())


class BoxSpec(_Spec):
    a: List[float] = Field(..., description="Lower moment corner.")
    b: List[float] = Field(..., description="Upper moment corner.")

    @model_validator(mode="after")
    def check_corners(self):
        if len(self.a) != len(self.b) or not self.a:
            raise ValueError("a and b must be non-empty and of the same length")
        if any(low < 0 or low > high for low, high in zip(self.a, self.b)):
            raise ValueError("corners must satisfy 0 <= a_i <= b_i")
        return self


class ToricProfileSpec(_Spec):
    """mu^{-1}(Omega) with Omega a union of moment boxes or the region under a curve."""
    type: Literal["toric-profile"]
    boxes: Optional[List[BoxSpec]] = Field(None, description="Moment boxes [a, b].")
    curve: Optional[List[List[float]]] = Field(None, description="Monotone curve from the omega_2 axis to the omega_1 axis (n = 2).")
    outer: bool = Field(False, description="Evaluate a curve through its guaranteed upper bound.")

    @model_validator(mode="after")
    def check_one_representation(self):
        if (self.boxes is None) == (self.curve is None):
            raise ValueError("exactly one of boxes and curve is required")
        if self.boxes is not None:
            if not self.boxes or len({len(box.a) for box in self.boxes}) != 1:
                raise ValueError("boxes must be non-empty and of equal dimension")
        return self

    def to_body(self) -> bodies.SupportBody:
        if self.curve is not None:
            return bodies.ToricBody(bodies.ToricProfile.from_curve(self.curve), self.outer)
        profile = bodies.ToricProfile.from_boxes([box.a for box in self.boxes], [box.b for box in self.boxes])
        return bodies.ToricBody(profile)


class RamosOmega0Spec(_Spec):
    type: Literal["ramos-omega0"]
    samples: Optional[int] = Field(None, ge=16, description="Curve samples.")

    def to_body(self) -> bodies.SupportBody:
        return ramos_body(self.samples)


class RamosOmega1Spec(_Spec):
    type: Literal["ramos-omega1"]

    def to_body(self) -> bodies.SupportBody:
        return ramos_union_body()


BodySpec = Annotated[
    Union[
        EllipsoidSpec,
        BallSpec,
        PolydiskSpec,
        PolyannulusSpec,
        UnionSpec,
        LagrangianBidiskSpec,
        PointCloudSpec,
        LinearImageSpec,
        ToricProfileSpec,
        RamosOmega0Spec,
        RamosOmega1Spec,
    ],
    Field(discriminator="type"),
]

UnionSpec.model_rebuild()
LinearImageSpec.model_rebuild()

BODY_TYPES = frozenset(
    ("ellipsoid", "ball", "polydisk", "polyannulus", "union", "lagrangian-bidisk", "point-cloud",
     "linear-image", "toric-profile", "ramos-omega0", "ramos-omega1")
)

_body_adapter = TypeAdapter(BodySpec)


class HopfTermSpec(_Spec):
    ctheta: List[int] = Field(..., description="Angle multipliers k_1..k_n.")
    cr: List[int] = Field(default_factory=list, description="Radial exponents p_1..p_{n-1}, optionally p_n.")
    coeff: float = 1.0
    phase: Literal["cos", "sin"] = "cos"


class HopfTrigTerms(_Spec):
    terms: List[HopfTermSpec] = Field(..., min_length=1)


class MonomialSpec(_Spec):
    exponents: List[int] = Field(..., description="Exponents of x_1..x_n, y_1..y_n.")
    coeff: float = 1.0


class CartesianMonomials(_Spec):
    monomials: List[MonomialSpec] = Field(..., min_length=1)


class PresetHamiltonianSpec(_Spec):
    preset: Literal["x1y1", "r2cos", "r2cos2", "oscillator", "linear-x1"]

    def to_system(self, n: int) -> hamiltonians.HamiltonianSystem:
        return hamiltonians.preset(self.preset, n)


class HopfTrigSpec(_Spec):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    hopf_trig: HopfTrigTerms = Field(..., alias="hopf-trig")

    def to_system(self, n: int) -> hamiltonians.HamiltonianSystem:
        return hamiltonians.hopf_term_arrays(n, [term.model_dump() for term in self.hopf_trig.terms])


class CartesianPolySpec(_Spec):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    cartesian_poly: CartesianMonomials = Field(..., alias="cartesian-poly")

    def to_system(self, n: int) -> hamiltonians.HamiltonianSystem:
        monomials = self.cartesian_poly.monomials
        for index, monomial in enumerate(monomials):
            if len(monomial.exponents) != 2 * n:
                raise SpecError(f"ham.cartesian-poly.monomials.{index}.exponents must have {2 * n} entries")
        return hamiltonians.CartesianPolynomial(
            [monomial.exponents for monomial in monomials], [monomial.coeff for monomial in monomials]
        )


HamiltonianSpec = Union[PresetHamiltonianSpec, HopfTrigSpec, CartesianPolySpec]

_ham_adapter = TypeAdapter(HamiltonianSpec)


def _error_path(prefix: str, error: ValidationError) -> str:
    first = error.errors()[0]
    # Tagged unions insert the tag into the location; the JSON path has no such level.
    loc = [str(part) for part in first["loc"] if not (isinstance(part, str) and part in BODY_TYPES)]
    loc = [part for part in loc if not part.endswith("Spec")]
    return ".".join([prefix, *loc]) + f": {first['msg']}"


def load_json_argument(text: Any, name: str) -> Any:
    """Parses inline JSON or reads a JSON file; already-parsed values pass through.

    Raises:
        SpecError: If the text is neither valid JSON nor a readable JSON file.
    """
    if not isinstance(text, str):
        return text
    stripped = text.strip()
    try:
        if stripped.startswith(("{", "[")):
            return json.loads(stripped)
        return json.loads(Path(stripped).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SpecError(f"{name}: invalid JSON ({e.msg} at line {e.lineno} column {e.colno})") from e
    except OSError as e:
        raise SpecError(f"{name}: cannot read {stripped!r}: {e}") from e


def parse_body(data: Any, prefix: str = "body") -> bodies.SupportBody:
    """Validates a body spec (JSON text, file path or parsed object) and builds the body.

    Raises:
        SpecError: With the dotted path of the first invalid field.
    """
    data = load_json_argument(data, prefix)
    try:
        spec = _body_adapter.validate_python(data)
    except ValidationError as e:
        raise SpecError(_error_path(prefix, e)) from e
    return spec.to_body()


def parse_hamiltonian(data: Any, n: int, prefix: str = "ham") -> hamiltonians.HamiltonianSystem:
    """Validates a Hamiltonian spec and builds the system on R^{2n}.

    Raises:
        SpecError: With the dotted path of the first invalid field.
    """
    data = load_json_argument(data, prefix)
    try:
        spec = _ham_adapter.validate_python(data)
    except ValidationError as e:
        raise SpecError(_error_path(prefix, e)) from e
    return spec.to_system(n)


class RunConfig(BaseModel):
    """The fully resolved configuration of one command-line run.

    Every output embeds `model_dump(mode="json")` of this model; validating that
    dump again yields an equal RunConfig.

    Attributes:
        command: Subcommand name.
        body: Parsed body spec.
        ham: Parsed Hamiltonian spec.
        n: Half-dimension; inferred from the body when omitted.
        radial: Gauss-Legendre points per radial Hopf coordinate.
        angular: Trapezoid points per Hopf angle.
        mc_samples: When set, a Monte-Carlo rule with this many nodes replaces the product rule.
        seed: Seed of every generator used by the run.
        output: "json" or "csv".
        threads: Worker cap.
        tol: Override of the command's primary tolerance.
        log_level: Logging level on standard error.
    """
    model_config = ConfigDict(extra="forbid")

    command: Literal["mean-width", "msp", "optimize", "variation", "staircase", "ramos", "criteria"]
    body: Optional[Any] = None
    ham: Optional[Any] = None
    n: Optional[int] = Field(None, ge=1)
    radial: int = Field(default_factory=lambda: settings.QUAD_RADIAL_POINTS)
    angular: int = Field(default_factory=lambda: settings.QUAD_ANGULAR_POINTS)
    mc_samples: Optional[int] = Field(None, ge=1)
    seed: int = Field(default_factory=lambda: settings.SEED)
    output: Literal["json", "csv"] = "json"
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)
    tol: Optional[float] = Field(None, gt=0)
    log_level: str = Field(default_factory=lambda: settings.LOG_LEVEL)

    starts: int = Field(default_factory=lambda: settings.STARTS, ge=1)
    h_step: float = Field(default_factory=lambda: settings.FIRST_VARIATION_STEP, gt=0)
    h2_step: float = Field(default_factory=lambda: settings.SECOND_VARIATION_STEP, gt=0)
    boundary_samples: int = Field(default_factory=lambda: settings.FLOW_BOUNDARY_SAMPLES, ge=2)
    angular_refine: Optional[int] = Field(None, ge=1)
    a_from: float = 1.0
    a_to: float = 6.5
    steps: int = Field(101, ge=1)
    optimize: bool = False
    samples: int = Field(default_factory=lambda: settings.CURVE_SAMPLES, ge=16)

    @model_validator(mode="after")
    def check_inputs(self):
        if self.command in ("mean-width", "msp", "optimize", "variation", "criteria") and self.body is None:
            raise ValueError(f"{self.command} needs --body")
        if self.command == "variation" and self.ham is None:
            raise ValueError("variation needs --ham")
        return self

    @classmethod
    def build(cls, **values) -> "RunConfig":
        """Validates raw values, converting failures to SpecError."""
        try:
            return cls(**values)
        except ValidationError as e:
            raise SpecError(_error_path("config", e)) from e
