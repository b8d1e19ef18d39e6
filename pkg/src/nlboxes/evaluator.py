"""Exact evaluation of wiring protocols by enumeration of all outcome paths.

For each original input pair (x, y) the evaluator walks every joint
outcome sequence (a1, b1, ..., an, bn) of the n consumed boxes, in
lexicographic order, multiplying the conditional probabilities selected
by the step tables and accumulating the product into the distilled
entry chosen by the output tables.  Cost is O(4 * 4^n * n).

The core works elementwise, so probability entries may be numpy arrays;
this is what lets region sweeps and batched checks evaluate a protocol
over an entire parameter grid in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .boxes import DomainError, NoSignalingBox, chsh_value
from .protocols import Protocol

MAX_DEPTH = 16


@dataclass(frozen=True)
class OutcomePath:
    """The joint outcomes of the n boxes along one enumeration branch."""

    a_bits: tuple[int, ...]
    b_bits: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.a_bits)


def _check_depth(proto: Protocol) -> int:
    n = proto.depth
    if n > MAX_DEPTH:
        raise DomainError(f"protocol depth {n} exceeds the supported maximum {MAX_DEPTH}")
    return n


def distill_entries(proto: Protocol, rows):
    """Run the enumeration on a 4x4 nested sequence of probability entries.

    Entries may be floats or broadcastable numpy arrays; returns the 4x4
    nested list of distilled entries, indexed [2x+y][2a+b].
    """
    n = _check_depth(proto)
    alice, bob = proto.alice, proto.bob
    out = [[0.0, 0.0, 0.0, 0.0] for _ in range(4)]

    for x in (0, 1):
        for y in (0, 1):
            acc = out[2 * x + y]

            def walk(i: int, ha: int, hb: int, weight) -> None:
                if i == n:
                    a = alice.output(x, ha)
                    b = bob.output(y, hb)
                    acc[2 * a + b] = acc[2 * a + b] + weight
                    return
                row = rows[2 * alice.step_input(i + 1, x, ha) + bob.step_input(i + 1, y, hb)]
                for ai in (0, 1):
                    ha2 = ha | (ai << i)
                    for bi in (0, 1):
                        walk(i + 1, ha2, hb | (bi << i), weight * row[2 * ai + bi])

            walk(0, 0, 0, 1.0)
    return out


def distill(proto: Protocol, box: NoSignalingBox) -> NoSignalingBox:
    """Distilled box produced by running the protocol on n copies of `box`."""
    rows = [[float(v) for v in row] for row in box.p]
    return NoSignalingBox(np.array(distill_entries(proto, rows)))


def distilled_value(proto: Protocol, box: NoSignalingBox) -> float:
    """CHSH value of the distilled box."""
    return chsh_value(distill(proto, box))


def value_of_entries(entries) -> object:
    """CHSH value from a 4x4 nested list of entries (elementwise on arrays)."""
    v = 0.0
    for r in range(4):
        sign = -1.0 if r == 3 else 1.0
        v = v + sign * (entries[r][0] + entries[r][3] - entries[r][1] - entries[r][2])
    return v


def distilled_value_entries(proto: Protocol, rows):
    """CHSH value of the distilled box over array-valued probability entries."""
    return value_of_entries(distill_entries(proto, rows))


def symmetric_rows(delta, epsilon):
    """4x4 entry table of the two-parameter family, accepting scalar or array biases."""
    rows = []
    for bias in (delta, delta, delta, epsilon):
        rows.append([(1.0 + bias) / 4.0, (1.0 - bias) / 4.0,
                     (1.0 - bias) / 4.0, (1.0 + bias) / 4.0])
    return rows


def general_rows(delta1, delta2, delta3, epsilon):
    """4x4 entry table of the four-parameter family, scalar or array biases."""
    rows = []
    for bias in (delta1, delta2, delta3, epsilon):
        rows.append([(1.0 + bias) / 4.0, (1.0 - bias) / 4.0,
                     (1.0 - bias) / 4.0, (1.0 + bias) / 4.0])
    return rows


def enumerate_paths(proto: Protocol, box: NoSignalingBox,
                    x: int, y: int) -> Iterator[tuple[OutcomePath, float]]:
    """Yield (path, probability) for one input pair, in enumeration order."""
    n = _check_depth(proto)
    alice, bob = proto.alice, proto.bob

    def walk(i, ha, hb, a_bits, b_bits, weight):
        if i == n:
            yield OutcomePath(a_bits, b_bits), weight
            return
        row = box.p[2 * alice.step_input(i + 1, x, ha) + bob.step_input(i + 1, y, hb)]
        for ai in (0, 1):
            for bi in (0, 1):
                yield from walk(i + 1, ha | (ai << i), hb | (bi << i),
                                a_bits + (ai,), b_bits + (bi,),
                                weight * float(row[2 * ai + bi]))

    yield from walk(0, 0, 0, (), (), 1.0)
