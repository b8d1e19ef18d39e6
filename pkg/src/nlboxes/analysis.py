"""Closed-form values, Fourier machinery for the non-adaptive optimality
bound, and distillability/quantum region sweeps over the symmetric family.

The Fourier tools operate on +-1 valued Boolean functions given as truth
tables of length 2^n.  Subsets of {0,1}^n are passed as 0/1 indicator
arrays indexed by the integer encoding of the string; all set operations
here only depend on XOR and popcount, so the bit order is immaterial as
long as it is used consistently.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boxes import ATOL, BoxParams, DomainError, ValidationError, landau_margins
from .evaluator import distilled_value_entries, symmetric_rows
from .protocols import Protocol, named_protocol

DISTILL_TOL = 1e-12


# ---------------------------------------------------------------------------
# Fourier analysis of Boolean functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Coefficients c_z = 2^-n sum_s (-1)^(z.s) f(s) of a +-1 valued f."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.float64)
        if arr.shape != (1 << self.n,):
            raise ValidationError(f"spectrum of arity {self.n} needs {1 << self.n} coefficients")
        if abs(float(np.sum(arr * arr)) - 1.0) > ATOL:
            raise ValidationError("Parseval violated: squared coefficients must sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)


def _walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized transform W[z] = sum_s (-1)^(z.s) v[s], in place butterflies."""
    v = np.array(values, dtype=np.float64)
    h = 1
    while h < v.size:
        v = v.reshape(-1, 2, h)
        even = v[:, 0, :] + v[:, 1, :]
        odd = v[:, 0, :] - v[:, 1, :]
        v = np.stack([even, odd], axis=1).reshape(-1)
        h *= 2
    return v


def fourier_transform(table: Sequence[float]) -> FourierSpectrum:
    """Spectrum of a +-1 valued truth table of length 2^n."""
    values = np.asarray(table, dtype=np.float64)
    size = values.size
    if size < 1 or size & (size - 1):
        raise DomainError(f"truth table length {size} is not a power of two")
    if np.any(np.abs(np.abs(values) - 1.0) > ATOL):
        raise DomainError("truth table must be +-1 valued")
    n = size.bit_length() - 1
    return FourierSpectrum(n, _walsh_hadamard(values) / size)


def _indicator(subset: Sequence[float]) -> np.ndarray:
    ind = np.asarray(subset, dtype=np.float64)
    size = ind.size
    if size < 2 or size & (size - 1):
        raise DomainError(f"indicator length {size} is not a power of two")
    if np.any((ind != 0.0) & (ind != 1.0)):
        raise DomainError("subset indicator must be 0/1 valued")
    return ind


def _popcounts(n: int) -> np.ndarray:
    return np.array([int(v).bit_count() for v in range(1 << n)])


def _check_delta(delta: float) -> float:
    if not (-1.0 - ATOL <= delta <= 1.0 + ATOL):
        raise DomainError(f"bias {delta!r} outside [-1, 1]")
    return float(delta)


def q_AB(A: Sequence[float], B: Sequence[float], delta: float) -> float:
    """Probability that both parties output 1 after n boxes of diagonal bias delta.

    Direct double sum (1/4^n) sum_{a in A, b in B}
    (1-delta)^|a xor b| (1+delta)^(n-|a xor b|) over indicator arrays A, B.
    """
    delta = _check_delta(delta)
    ia, ib = _indicator(A), _indicator(B)
    if ia.size != ib.size:
        raise DomainError("A and B must be subsets of the same cube")
    n = ia.size.bit_length() - 1
    idx = np.arange(ia.size)
    dist = _popcounts(n)[idx[:, None] ^ idx[None, :]]
    weight = (1.0 - delta) ** dist * (1.0 + delta) ** (n - dist)
    return float(ia @ weight @ ib) / 4.0 ** n


def q_AB_fourier(A: Sequence[float], B: Sequence[float], delta: float) -> float:
    """Spectral form of q_AB: sum_z delta^|z| (f_z g_z + (1+f_0+g_0)[z=0]) / 4."""
    delta = _check_delta(delta)
    ia, ib = _indicator(A), _indicator(B)
    if ia.size != ib.size:
        raise DomainError("A and B must be subsets of the same cube")
    n = ia.size.bit_length() - 1
    f = fourier_transform(2.0 * ia - 1.0).coeffs
    g = fourier_transform(2.0 * ib - 1.0).coeffs
    powers = delta ** _popcounts(n)
    return float(np.sum(powers * f * g) + 1.0 + f[0] + g[0]) / 4.0


def r_AB(A: Sequence[float], B: Sequence[float], delta: float) -> float:
    """Probability the two final outputs agree: (1 + sum_z f_z g_z delta^|z|) / 2."""
    delta = _check_delta(delta)
    ia, ib = _indicator(A), _indicator(B)
    if ia.size != ib.size:
        raise DomainError("A and B must be subsets of the same cube")
    n = ia.size.bit_length() - 1
    f = fourier_transform(2.0 * ia - 1.0).coeffs
    g = fourier_transform(2.0 * ib - 1.0).coeffs
    return 0.5 * (1.0 + float(np.sum(delta ** _popcounts(n) * f * g)))


# ---------------------------------------------------------------------------
# Closed-form protocol values on the bias families
# ---------------------------------------------------------------------------

def parity_value(params: BoxParams, n: int) -> float:
    """Value of the depth-n non-adaptive parity wiring: d1^n + d2^n + d3^n - e^n."""
    if n < 1:
        raise DomainError("parity value needs depth >= 1")
    d1, d2, d3, e = params.as_tuple()
    return d1 ** n + d2 ** n + d3 ** n - e ** n


@dataclass(frozen=True)
class NonAdaptiveBound:
    """Least upper bound over non-adaptive wirings, with the depth attaining it."""

    value: float
    depth: int


def nonadaptive_bound(params: BoxParams, n: int) -> NonAdaptiveBound:
    """max over 1 <= k <= n of |d1^k + d2^k + d3^k - e^k|, smallest maximizer reported."""
    if n < 1:
        raise DomainError("bound needs depth >= 1")
    best, best_k = -1.0, 1
    for k in range(1, n + 1):
        v = abs(parity_value(params, k))
        if v > best + 1e-15:
            best, best_k = v, k
    return NonAdaptiveBound(best, best_k)


def bs_value(delta: float, epsilon: float) -> float:
    """Depth-2 adaptive parity value on the symmetric family."""
    return (12.0 * delta ** 2 + delta - 3.0 * epsilon * delta - epsilon - epsilon ** 2) / 4.0


def allcock2_value(delta: float, epsilon: float) -> float:
    """Depth-2 XOR/gated wiring value on the symmetric family."""
    return (11.0 * delta ** 2 + 2.0 * delta - 2.0 * epsilon * delta
            - 2.0 * epsilon - epsilon ** 2) / 4.0


def depth3_value(delta: float, epsilon: float) -> float:
    """Depth-3 extension's value on the symmetric family (cubic in delta)."""
    return (39.0 * delta ** 3 + delta ** 2 * (epsilon + 16.0)
            + delta * (1.0 - 16.0 * epsilon - 8.0 * epsilon ** 2) - epsilon) / 16.0


def adaptive_parity_correlated_value(epsilon: float, k: int) -> float:
    """Depth-k adaptive parity value on the one-erring-row family: 4(1 - p(p+1/2)^(k-1))."""
    if k < 1:
        raise DomainError("adaptive parity value needs depth >= 1")
    p = (1.0 + epsilon) / 4.0
    return 4.0 * (1.0 - p * (p + 0.5) ** (k - 1))


def bs_map(delta: float, epsilon: float) -> tuple[float, float]:
    """Image of a symmetric box under depth-2 adaptive parity.

    Returns (new diagonal bias of rows 00/01/10, full pattern entry
    1 + new bias of row 11), mirroring the two-entry shorthand of the
    symmetric family.
    """
    return (delta ** 2,
            (epsilon ** 2 + epsilon + 3.0 * epsilon * delta - delta + 4.0) / 4.0)


def allcock_map(delta: float, epsilon: float) -> tuple[float, float, float, float]:
    """Per-row diagonal entries p(00|xy) of the depth-2 XOR/gated wiring's image."""
    return ((1.0 + delta ** 2) / 4.0,
            (3.0 * delta ** 2 + delta + epsilon * delta - epsilon + 4.0) / 16.0,
            (1.0 + delta ** 2) / 4.0,
            (epsilon ** 2 + epsilon + 3.0 * epsilon * delta - delta + 4.0) / 16.0)


# ---------------------------------------------------------------------------
# Distillability and quantum regions over the symmetric (delta, epsilon) plane
# ---------------------------------------------------------------------------

DEFAULT_SWEEP_PROTOCOLS = ("parity2", "parity3", "parity4", "parity5", "parity6",
                           "bs2", "allcock2", "new3")


@dataclass(frozen=True)
class SweepRecord:
    """Distilled values and distillability flags at one (delta, epsilon) point."""

    delta: float
    epsilon: float
    v_in: float
    quantum: bool
    values: dict[str, float]
    distills: dict[str, bool]


@dataclass(frozen=True)
class SweepData:
    """Column-oriented sweep result, row-major over the (delta, epsilon) grid."""

    names: tuple[str, ...]
    delta: np.ndarray
    epsilon: np.ndarray
    v_in: np.ndarray
    quantum: np.ndarray
    values: dict[str, np.ndarray]
    distills: dict[str, np.ndarray]

    def records(self) -> list[SweepRecord]:
        out = []
        for i in range(self.delta.size):
            out.append(SweepRecord(
                float(self.delta[i]), float(self.epsilon[i]), float(self.v_in[i]),
                bool(self.quantum[i]),
                {k: float(self.values[k][i]) for k in self.names},
                {k: bool(self.distills[k][i]) for k in self.names},
            ))
        return out


def _resolve_protocols(protocol_ids: Sequence[str]) -> list[tuple[str, Protocol]]:
    resolved = []
    for pid in protocol_ids:
        name, proto = named_protocol(pid)
        resolved.append((name, proto))
    return resolved


def sweep_symmetric(protocol_ids: Sequence[str], deltas: Sequence[float],
                    epsilons: Sequence[float], workers: int = 1) -> SweepData:
    """Evaluate the named protocols on every symmetric box of the grid.

    The grid is the cartesian product of the two axes, delta outermost.
    Results are deterministic and independent of the worker count.
    """
    d_ax = np.asarray(deltas, dtype=np.float64)
    e_ax = np.asarray(epsilons, dtype=np.float64)
    if np.any(np.abs(d_ax) > 1.0 + ATOL) or np.any(np.abs(e_ax) > 1.0 + ATOL):
        raise DomainError("grid values must lie in [-1, 1]")
    protos = _resolve_protocols(protocol_ids)
    dg, eg = np.meshgrid(d_ax, e_ax, indexing="ij")
    dflat, eflat = dg.reshape(-1), eg.reshape(-1)
    v_in = 3.0 * dflat - eflat
    quantum = landau_margins(dflat, dflat, dflat, eflat) <= np.pi + ATOL

    def eval_chunk(sl: slice) -> dict[str, np.ndarray]:
        rows = symmetric_rows(dflat[sl], eflat[sl])
        return {name: np.asarray(distilled_value_entries(proto, rows))
                for name, proto in protos}

    if workers <= 1 or dflat.size < 2 * workers:
        chunks = [eval_chunk(slice(0, dflat.size))]
    else:
        bounds = np.linspace(0, dflat.size, workers + 1, dtype=int)
        slices = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(eval_chunk, slices))

    values = {name: np.concatenate([c[name] for c in chunks]) for name, _ in protos}
    distills = {name: values[name] - v_in > DISTILL_TOL for name, _ in protos}
    return SweepData(tuple(name for name, _ in protos), dflat, eflat,
                     v_in, quantum, values, distills)


def distillable_region(protocol_ids: Sequence[str], deltas: Sequence[float],
                       epsilons: Sequence[float], workers: int = 1) -> list[SweepRecord]:
    """Per-point sweep records over the symmetric grid (see sweep_symmetric)."""
    return sweep_symmetric(protocol_ids, deltas, epsilons, workers=workers).records()


def write_sweep_csv(data: SweepData, stream) -> None:
    """CSV with columns delta,epsilon,v_in,quantum,v_<name>...,distills_<name>...

    Floats carry 10 significant digits; flags are 0/1; lines end with LF.
    """
    header = ["delta", "epsilon", "v_in", "quantum"]
    for name in data.names:
        header += [f"v_{name}", f"distills_{name}"]
    stream.write(",".join(header) + "\n")
    for i in range(data.delta.size):
        cells = [f"{data.delta[i]:.10g}", f"{data.epsilon[i]:.10g}",
                 f"{data.v_in[i]:.10g}", str(int(data.quantum[i]))]
        for name in data.names:
            cells.append(f"{data.values[name][i]:.10g}")
            cells.append(str(int(data.distills[name][i])))
        stream.write(",".join(cells) + "\n")
