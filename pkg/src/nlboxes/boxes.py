"""No-signalling correlation boxes: construction, validation and scoring.

A box is a conditional distribution p(ab|xy) over binary outputs given
binary inputs, stored as a 4x4 matrix with row index 2x+y and column
index 2a+b.  The two-parameter and four-parameter bias families used
throughout this package put the correlation weight on the diagonal
pattern (1+d, 1-d, 1-d, 1+d)/4 of each row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12


class DomainError(ValueError):
    """A scalar argument is outside its admissible range."""


class ValidationError(ValueError):
    """A probability table violates positivity, normalization or no-signalling."""


@dataclass(frozen=True)
class BoxParams:
    """Diagonal biases (delta1, delta2, delta3, epsilon) of the general box family.

    Row xy in {00, 01, 10} of the box carries bias delta_{1,2,3}; row 11
    carries bias epsilon.  All four values live in [-1, 1].
    """

    delta1: float
    delta2: float
    delta3: float
    epsilon: float

    def __post_init__(self) -> None:
        for name in ("delta1", "delta2", "delta3", "epsilon"):
            v = getattr(self, name)
            if not (-1.0 - ATOL <= float(v) <= 1.0 + ATOL):
                raise DomainError(f"{name}={v!r} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.delta1, self.delta2, self.delta3, self.epsilon)


@dataclass(frozen=True, eq=False)
class NoSignalingBox:
    """A validated 4x4 table p(ab|xy), row index 2x+y, column index 2a+b."""

    p: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.p, dtype=np.float64)
        if arr.shape != (4, 4):
            raise ValidationError(f"box table must be 4x4, got shape {arr.shape}")
        if np.any(arr < -ATOL) or np.any(arr > 1.0 + ATOL):
            raise ValidationError("box entries must lie in [0, 1]")
        if np.any(np.abs(arr.sum(axis=1) - 1.0) > ATOL):
            raise ValidationError("each row of a box must sum to 1")
        # Alice's marginal may not depend on y, Bob's may not depend on x.
        pa = arr.reshape(2, 2, 2, 2).sum(axis=3)   # [x, y, a]
        pb = arr.reshape(2, 2, 2, 2).sum(axis=2)   # [x, y, b]
        if np.any(np.abs(pa[:, 0, :] - pa[:, 1, :]) > ATOL):
            raise ValidationError("signalling from Bob to Alice detected")
        if np.any(np.abs(pb[0, :, :] - pb[1, :, :]) > ATOL):
            raise ValidationError("signalling from Alice to Bob detected")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[2 * x + y, 2 * a + b])


@dataclass(frozen=True)
class CorrelatorVector:
    """Per-input correlators E_xy = p(a=b|xy) - p(a!=b|xy)."""

    e00: float
    e01: float
    e10: float
    e11: float

    def __post_init__(self) -> None:
        for name in ("e00", "e01", "e10", "e11"):
            v = float(getattr(self, name))
            if not (-1.0 - ATOL <= v <= 1.0 + ATOL):
                raise DomainError(f"{name}={v!r} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e00, self.e01, self.e10, self.e11)


def _diag_row(bias: float) -> np.ndarray:
    return np.array([1.0 + bias, 1.0 - bias, 1.0 - bias, 1.0 + bias]) / 4.0


def make_general_nlb(params: BoxParams) -> NoSignalingBox:
    """Box of the four-parameter family: rows biased along a=b by the deltas.

    Rows 00, 01, 10 have pattern (1+d, 1-d, 1-d, 1+d)/4 with d = delta1,
    delta2, delta3; row 11 uses epsilon.
    """
    d1, d2, d3, e = params.as_tuple()
    return NoSignalingBox(np.stack([_diag_row(d1), _diag_row(d2), _diag_row(d3), _diag_row(e)]))


def make_symmetric_nlb(delta: float, epsilon: float) -> NoSignalingBox:
    """Two-parameter box with delta1 = delta2 = delta3 = delta."""
    return make_general_nlb(BoxParams(delta, delta, delta, epsilon))


def perfect_nlb() -> NoSignalingBox:
    """The box winning the CHSH game with certainty: a XOR b = xy, uniform outputs."""
    return make_general_nlb(BoxParams(1.0, 1.0, 1.0, -1.0))


def correlated_nlb(epsilon: float) -> NoSignalingBox:
    """One-parameter family that is perfect on rows 00, 01, 10 and biased on row 11."""
    return make_general_nlb(BoxParams(1.0, 1.0, 1.0, epsilon))


_CHSH_SIGNS = np.array([
    [1.0, -1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0],
])


def chsh_value(box: NoSignalingBox) -> float:
    """Winning-minus-losing probability sum of the CHSH game, in [-4, 4].

    Equals delta1 + delta2 + delta3 - epsilon on the general family.
    """
    return float(np.sum(_CHSH_SIGNS * box.p))


def correlators(box: NoSignalingBox) -> CorrelatorVector:
    """Extract E_xy = p(00|xy) + p(11|xy) - p(01|xy) - p(10|xy) for each row."""
    e = box.p[:, 0] + box.p[:, 3] - box.p[:, 1] - box.p[:, 2]
    return CorrelatorVector(float(e[0]), float(e[1]), float(e[2]), float(e[3]))


def landau_margins(e00, e01, e10, e11):
    """Max over j of |sum_{i != j} arcsin(E_i) - arcsin(E_j)|, array-friendly."""
    s = [np.arcsin(e00), np.arcsin(e01), np.arcsin(e10), np.arcsin(e11)]
    total = s[0] + s[1] + s[2] + s[3]
    worst = np.abs(total - 2.0 * s[0])
    for t in s[1:]:
        worst = np.maximum(worst, np.abs(total - 2.0 * t))
    return worst


def is_quantum_boundary_inside(c: CorrelatorVector) -> bool:
    """Whether four correlators admit a quantum model (unbiased marginals assumed).

    Tests, for every choice of a distinguished input pair j, that
    |sum_{i != j} arcsin(E_i) - arcsin(E_j)| <= pi within tolerance.
    """
    return bool(landau_margins(*c.as_tuple()) <= np.pi + ATOL)


def box_to_json(box: NoSignalingBox) -> str:
    """Serialize as {"p": [16 reals]} in row-major order of the fixed convention."""
    return json.dumps({"p": [float(v) for v in box.p.reshape(16)]})


def params_to_json(params: BoxParams) -> str:
    return json.dumps({
        "delta1": params.delta1, "delta2": params.delta2,
        "delta3": params.delta3, "epsilon": params.epsilon,
    })


def box_from_json(text: str) -> NoSignalingBox:
    """Accepts either the parameterized form (delta1..3, epsilon) or a raw 16-entry table."""
    obj = json.loads(text)
    if "p" in obj:
        flat = np.asarray(obj["p"], dtype=np.float64)
        if flat.size != 16:
            raise ValidationError("field 'p' must hold exactly 16 probabilities")
        return NoSignalingBox(flat.reshape(4, 4))
    try:
        params = BoxParams(obj["delta1"], obj["delta2"], obj["delta3"], obj["epsilon"])
    except KeyError as exc:
        raise ValidationError(f"box JSON missing field {exc}") from exc
    return make_general_nlb(params)
