from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from fpulyap.utils.errors import ModelError

Array = np.ndarray


class ModelFamily(str, Enum):
    LINEAR = "linear"
    TODA = "toda"
    POLYNOMIAL = "polynomial"


class Boundary(str, Enum):
    FIXED_ENDS = "fixed_ends"
    PERIODIC = "periodic"


def n_particles(n_springs: int, boundary: Boundary) -> int:
    """Moving particles: N-1 between two walls, N on a ring."""
    return n_springs - 1 if boundary is Boundary.FIXED_ENDS else n_springs


def _coeff_array(value: float | Sequence[float] | Array, n: int, name: str) -> Array:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ModelError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} has non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """
    Nearest-neighbour chain potential.

    Polynomial bonds use V_i(r) = r^2/2 + a_i r^3/3 + b_i r^4/4 + g_i r^5/5 + d_i r^6/6
    with per-site coefficient sequences of length N (the number of springs).
    Toda bonds use V(r) = (exp(c r) - 1 - c r) / c^2. Linear is the polynomial with
    all coefficients zero.
    """

    family: ModelFamily
    n_springs: int
    alpha: Array = field(default=None)  # type: ignore[assignment]
    beta: Array = field(default=None)  # type: ignore[assignment]
    gamma: Array = field(default=None)  # type: ignore[assignment]
    delta: Array = field(default=None)  # type: ignore[assignment]
    boundary: Boundary = Boundary.FIXED_ENDS
    toda_c: float = -2.0
    preset_name: str | None = None

    def __post_init__(self) -> None:
        n = int(self.n_springs)
        if n < 2:
            raise ModelError(f"need at least 2 springs, got {n}")
        object.__setattr__(self, "n_springs", n)
        object.__setattr__(self, "family", ModelFamily(self.family))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("alpha", "beta", "gamma", "delta"):
            raw = getattr(self, name)
            object.__setattr__(self, name, _coeff_array(0.0 if raw is None else raw, n, name))

        if self.family is ModelFamily.LINEAR and self.has_nonlinear_terms:
            raise ModelError("linear model cannot carry nonlinear coefficients")
        if self.family is ModelFamily.TODA:
            if self.toda_c == 0 or not np.isfinite(self.toda_c):
                raise ModelError(f"Toda stiffness must be finite and nonzero, got {self.toda_c}")
            if self.has_nonlinear_terms:
                raise ModelError("Toda model takes no polynomial coefficients")
        if self.family is ModelFamily.POLYNOMIAL:
            self._check_stability()

    @property
    def has_nonlinear_terms(self) -> bool:
        return bool(
            np.any(self.alpha) or np.any(self.beta) or np.any(self.gamma) or np.any(self.delta)
        )

    @property
    def n_particles(self) -> int:
        return n_particles(self.n_springs, self.boundary)

    @property
    def label(self) -> str:
        return self.preset_name or self.family.value

    def _check_stability(self) -> None:
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        sextic = d > 0
        quartic = (d == 0) & (g == 0) & (b > 0)
        harmonic = (a == 0) & (b == 0) & (g == 0) & (d == 0)
        bad = ~(sextic | quartic | harmonic)
        if np.any(bad):
            sites = np.flatnonzero(bad)[:5].tolist()
            raise ModelError(f"potential without a single minimum at sites {sites}")

    def is_constant(self, name: str) -> bool:
        arr = getattr(self, name)
        return bool(np.all(arr == arr[0]))

    def with_boundary(self, boundary: Boundary) -> ModelSpec:
        return ModelSpec(
            family=self.family,
            n_springs=self.n_springs,
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            delta=self.delta,
            boundary=boundary,
            toda_c=self.toda_c,
            preset_name=self.preset_name,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "n_springs": self.n_springs,
            "boundary": self.boundary.value,
            "toda_c": float(self.toda_c),
            "preset_name": self.preset_name,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "delta": self.delta.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelSpec:
        return cls(**data)


@dataclass
class ChainState:
    q: Array
    p: Array
    n_springs: int
    boundary: Boundary = Boundary.FIXED_ENDS

    def __post_init__(self) -> None:
        self.boundary = Boundary(self.boundary)
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        expected = n_particles(int(self.n_springs), self.boundary)
        if self.q.shape != (expected,) or self.p.shape != (expected,):
            raise ModelError(
                f"state for N={self.n_springs} ({self.boundary.value}) needs {expected} particles, "
                f"got q{self.q.shape} p{self.p.shape}"
            )

    @classmethod
    def rest(cls, model: ModelSpec) -> ChainState:
        n = model.n_particles
        return cls(q=np.zeros(n), p=np.zeros(n), n_springs=model.n_springs, boundary=model.boundary)

    def copy(self) -> ChainState:
        return ChainState(self.q.copy(), self.p.copy(), self.n_springs, self.boundary)

    def scaled(self, lam: float) -> ChainState:
        return ChainState(lam * self.q, lam * self.p, self.n_springs, self.boundary)


@dataclass
class TangentState:
    dq: Array
    dp: Array

    def __post_init__(self) -> None:
        self.dq = np.asarray(self.dq, dtype=float)
        self.dp = np.asarray(self.dp, dtype=float)
        if self.dq.shape != self.dp.shape:
            raise ModelError(f"tangent shapes differ: dq{self.dq.shape} dp{self.dp.shape}")

    @classmethod
    def random_unit(cls, size: int, rng: np.random.Generator) -> TangentState:
        v = rng.standard_normal(2 * size)
        v /= np.linalg.norm(v)
        return cls(dq=v[size:], dp=v[:size])

    def norm(self) -> float:
        # Euclidean norm of the concatenated (dp, dq) vector
        return float(np.sqrt(np.dot(self.dp, self.dp) + np.dot(self.dq, self.dq)))

    def copy(self) -> TangentState:
        return TangentState(self.dq.copy(), self.dp.copy())

    def rescale_(self, factor: float) -> None:
        self.dq *= factor
        self.dp *= factor
