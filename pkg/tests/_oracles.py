"""Independent reference implementations used to cross-check the library.

Everything here deliberately avoids the code paths under test: the
non-adaptive evaluator walks output tables directly, the family oracle
tracks outcome parities through a 4-state transfer chain instead of
enumerating paths, and the agreement probability is computed from the
explicit per-box outcome distribution.
"""

from __future__ import annotations

import numpy as np

from nlboxes.boxes import NoSignalingBox
from nlboxes.protocols import NonAdaptiveProtocol


def direct_nonadaptive_box(proto: NonAdaptiveProtocol, box: NoSignalingBox) -> np.ndarray:
    """Distilled 4x4 table of a non-adaptive protocol, by direct string summation."""
    n = proto.depth
    out = np.zeros((4, 4))
    for x in (0, 1):
        for y in (0, 1):
            row = box.p[2 * x + y]
            for astr in range(1 << n):
                for bstr in range(1 << n):
                    prob = 1.0
                    for i in range(n):
                        prob *= row[2 * ((astr >> i) & 1) + ((bstr >> i) & 1)]
                    a = (proto.alice_out[x] >> astr) & 1
                    b = (proto.bob_out[y] >> bstr) & 1
                    out[2 * x + y, 2 * a + b] += prob
    return out


def direct_nonadaptive_value(proto: NonAdaptiveProtocol, box: NoSignalingBox) -> float:
    table = direct_nonadaptive_box(proto, box)
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    v = 0.0
    for r in range(4):
        v += (-1.0 if r == 3 else 1.0) * float(signs @ table[r])
    return v


def parity_family_value(kind: str, depth: int, box: NoSignalingBox) -> float:
    """Transfer-chain value of the parity-output wiring families.

    Tracks only the pair of running outcome parities (pa, pb), which
    determines the next box inputs for each family:
      "parity": every box gets (x, y);
      "bs":     box 1 gets (x, y), later boxes (x*pa, y*pb);
      "gen":    box 1 gets (x, y), later boxes (x^pa, y*(1^pb)).
    Both parties output their final parity.
    """
    total = 0.0
    for x in (0, 1):
        for y in (0, 1):
            dist = {(0, 0): 1.0}
            for step in range(1, depth + 1):
                new: dict[tuple[int, int], float] = {}
                for (pa, pb), w in dist.items():
                    if step == 1:
                        u, v = x, y
                    elif kind == "parity":
                        u, v = x, y
                    elif kind == "bs":
                        u, v = x & pa, y & pb
                    elif kind == "gen":
                        u, v = x ^ pa, y & (1 ^ pb)
                    else:
                        raise ValueError(kind)
                    row = box.p[2 * u + v]
                    for ai in (0, 1):
                        for bi in (0, 1):
                            key = (pa ^ ai, pb ^ bi)
                            new[key] = new.get(key, 0.0) + w * float(row[2 * ai + bi])
                dist = new
            corr = sum(w * (-1.0) ** (pa ^ pb) for (pa, pb), w in dist.items())
            total += (-1.0 if x & y else 1.0) * corr
    return total


def agreement_probability(A, B, delta: float) -> float:
    """P[final outputs agree] from the explicit product outcome distribution.

    Each box outputs (a_i, b_i) with probabilities (1+d, 1-d, 1-d, 1+d)/4;
    the parties output membership of their outcome strings in A and B.
    """
    ia = np.asarray(A, dtype=np.float64)
    ib = np.asarray(B, dtype=np.float64)
    n = ia.size.bit_length() - 1
    mu = np.array([1.0 + delta, 1.0 - delta, 1.0 - delta, 1.0 + delta]) / 4.0
    total = 0.0
    for astr in range(1 << n):
        for bstr in range(1 << n):
            prob = 1.0
            for i in range(n):
                prob *= mu[2 * ((astr >> i) & 1) + ((bstr >> i) & 1)]
            if ia[astr] == ib[bstr]:
                total += prob
    return total


def inverse_fourier(coeffs: np.ndarray) -> np.ndarray:
    """f(s) = sum_z c_z (-1)^(z.s), evaluated term by term."""
    size = coeffs.shape[0]
    out = np.zeros(size)
    for s in range(size):
        acc = 0.0
        for z in range(size):
            acc += coeffs[z] * (-1.0) ** int(z & s).bit_count()
        out[s] = acc
    return out


def random_ns_box(rng: np.random.Generator) -> NoSignalingBox:
    """Random mixture of the 24 no-signalling polytope vertices.

    Includes the 16 local deterministic boxes (biased marginals) and the
    8 maximally nonlocal vertices, so mixtures exercise boxes outside
    the diagonal family.
    """
    tables = []
    for fa in range(4):
        for gb in range(4):
            t = np.zeros((4, 4))
            for x in (0, 1):
                for y in (0, 1):
                    a = (fa >> x) & 1
                    b = (gb >> y) & 1
                    t[2 * x + y, 2 * a + b] = 1.0
            tables.append(t)
    for alpha in (0, 1):
        for beta in (0, 1):
            for gamma in (0, 1):
                t = np.zeros((4, 4))
                for x in (0, 1):
                    for y in (0, 1):
                        target = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma
                        for a in (0, 1):
                            t[2 * x + y, 2 * a + (a ^ target)] = 0.5
                tables.append(t)
    weights = rng.exponential(size=len(tables))
    weights /= weights.sum()
    mixed = sum(w * t for w, t in zip(weights, tables))
    return NoSignalingBox(mixed)


def random_strategy_masks(rng: np.random.Generator, depth: int) -> tuple[tuple[int, ...], int]:
    """Uniformly random step masks and output mask for one party."""
    steps = tuple(int(rng.integers(0, 1 << (1 << i))) for i in range(1, depth + 1))
    output = int(rng.integers(0, 1 << (1 << (depth + 1))))
    return steps, output
