"""Exhaustive and sampled search over wiring protocols.

The searches factor a protocol's value into small per-input-pair tables
so that the whole space is scored with dense array arithmetic instead of
one evaluator call per candidate; witnesses are always re-checked
through the path-enumeration evaluator.  Tie-breaking is by lowest
serialized-table order, so reports are deterministic.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boxes import ATOL, BoxParams, DomainError, NoSignalingBox
from .evaluator import distilled_value
from .protocols import (LocalStrategy, NonAdaptiveProtocol, Protocol,
                        embed_nonadaptive, protocol_to_dict, serialization_key)
from .analysis import NonAdaptiveBound, nonadaptive_bound

BOUND_TOL = 1e-12
_WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class SearchReport:
    best_value: float
    best_protocol: Protocol | NonAdaptiveProtocol
    candidates_examined: int
    search_space_description: str
    bound_used: float | None = None
    seed: int | None = None
    best_name: str | None = None
    protocol_values: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.candidates_examined <= 0:
            raise ValueError("a search must examine at least one candidate")
        if self.bound_used is not None and self.best_value > self.bound_used + BOUND_TOL:
            raise ValueError(
                f"search found {self.best_value}, above the bound {self.bound_used}")


def family_params(box: NoSignalingBox) -> BoxParams | None:
    """Biases of the diagonal family if the box belongs to it, else None."""
    p = box.p
    if np.any(np.abs(p[:, 0] - p[:, 3]) > ATOL) or np.any(np.abs(p[:, 1] - p[:, 2]) > ATOL):
        return None
    e = p[:, 0] + p[:, 3] - p[:, 1] - p[:, 2]
    return BoxParams(float(e[0]), float(e[1]), float(e[2]), float(e[3]))


def _clip_params(params: BoxParams) -> BoxParams:
    return BoxParams(*(min(1.0, max(-1.0, v)) for v in params.as_tuple()))


def _bound_for(box: NoSignalingBox, n: int) -> NonAdaptiveBound | None:
    params = family_params(box)
    if params is None:
        return None
    return nonadaptive_bound(_clip_params(params), n)


def _path_prob_matrix(box: NoSignalingBox, row: int, n: int) -> np.ndarray:
    """P[a, b] = product_i p(a_i b_i | row) over little-endian outcome strings."""
    q = np.asarray(box.p[row]).reshape(2, 2)
    mat = np.ones((1, 1))
    for _ in range(n):
        mat = np.kron(q, mat)
    return mat


def _sign_matrix(n_outcomes: int) -> np.ndarray:
    """Row t holds (-1)^(bit h of t) over all outcome strings h."""
    tables = np.arange(1 << (1 << n_outcomes))
    bits = (tables[:, None] >> np.arange(1 << n_outcomes)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _report_nonadaptive(box: NoSignalingBox, n: int, best: float,
                        witness: NonAdaptiveProtocol, count: int, description: str,
                        seed: int | None = None) -> SearchReport:
    check = distilled_value(embed_nonadaptive(witness), box)
    if abs(check - best) > _WITNESS_TOL:
        raise AssertionError(f"witness re-evaluation {check} != reported best {best}")
    bound = _bound_for(box, n)
    return SearchReport(best, witness, count, description,
                        bound_used=None if bound is None else bound.value, seed=seed)


def search_nonadaptive(box: NoSignalingBox, n: int) -> SearchReport:
    """Exhaustive search over all per-input output-table pairs at depth n <= 2.

    Scores every (Alice, Bob) table pair by exact path enumeration and
    checks the result against the non-adaptive optimality bound.
    """
    if n not in (1, 2):
        raise DomainError(
            "exhaustive non-adaptive search supports n in {1, 2}; "
            "use search_nonadaptive_sampled for larger depths")
    signs = _sign_matrix(n)
    m = {}
    for x in (0, 1):
        for y in (0, 1):
            pmat = _path_prob_matrix(box, 2 * x + y, n)
            m[x, y] = signs @ pmat @ signs.T
    v4 = (m[0, 0][:, None, :, None] + m[0, 1][:, None, None, :]
          + m[1, 0][None, :, :, None] - m[1, 1][None, :, None, :])
    best = float(v4.max())
    t0, t1, u0, u1 = np.argwhere(v4 == v4.max())[0]
    witness = NonAdaptiveProtocol(n, (int(t0), int(t1)), (int(u0), int(u1)))
    count = v4.size
    return _report_nonadaptive(
        box, n, best, witness, count,
        f"exhaustive non-adaptive depth {n}: all {count} output-table pairs")


def search_nonadaptive_sampled(box: NoSignalingBox, n: int, samples: int,
                               seed: int, chunk: int = 1 << 15) -> SearchReport:
    """Uniform random non-adaptive table pairs from a seeded generator."""
    if n < 1 or samples < 1:
        raise DomainError("need n >= 1 and samples >= 1")
    rng = np.random.default_rng(seed)
    width = 1 << n
    pmats = {(x, y): _path_prob_matrix(box, 2 * x + y, n) for x in (0, 1) for y in (0, 1)}
    powers = 1 << np.arange(width, dtype=object)

    best = -np.inf
    best_key: tuple | None = None
    witness: NonAdaptiveProtocol | None = None
    done = 0
    while done < samples:
        take = min(chunk, samples - done)
        bits = rng.integers(0, 2, size=(take, 4, width), dtype=np.int8)
        s = 1.0 - 2.0 * bits
        v = (np.einsum("si,ij,sj->s", s[:, 0], pmats[0, 0], s[:, 2])
             + np.einsum("si,ij,sj->s", s[:, 0], pmats[0, 1], s[:, 3])
             + np.einsum("si,ij,sj->s", s[:, 1], pmats[1, 0], s[:, 2])
             - np.einsum("si,ij,sj->s", s[:, 1], pmats[1, 1], s[:, 3]))
        vmax = float(v.max())
        if vmax >= best:
            for i in np.nonzero(v == vmax)[0]:
                masks = tuple(int(sum(powers[h] for h in range(width) if bits[i, j, h]))
                              for j in range(4))
                key = (masks[0], masks[1], masks[2], masks[3])
                if vmax > best or key < best_key:
                    best, best_key = vmax, key
                    witness = NonAdaptiveProtocol(n, (masks[0], masks[1]),
                                                  (masks[2], masks[3]))
        done += take
    assert witness is not None
    return _report_nonadaptive(
        box, n, best, witness, samples,
        f"sampled non-adaptive depth {n}: {samples} uniform table pairs", seed=seed)


# ---------------------------------------------------------------------------
# Exhaustive adaptive depth-2 search
# ---------------------------------------------------------------------------
#
# A depth-2 strategy with a fixed first-layer function is equivalent to
# choosing, for each (own input w, first outcome o1) cell, an "atom":
# the box-2 input bit u plus the final output restricted to that cell,
# which is o2 -> sbit XOR (e AND o2).  Atom index = u + 2e + 4*sbit.
# A profile packs the two atoms of one w value: P = atom(o1=0) + 8*atom(o1=1).

_ATOMS = np.arange(8)
_ATOM_U, _ATOM_E, _ATOM_S = _ATOMS & 1, (_ATOMS >> 1) & 1, (_ATOMS >> 2) & 1
_PROF_LO, _PROF_HI = np.arange(64) % 8, np.arange(64) // 8


def _atom_pair_table(box: NoSignalingBox) -> np.ndarray:
    """W[ta, tb] = sum_{a2 b2} p(a2 b2 | ua ub) * sign_a(a2) * sign_b(b2)."""
    w = np.zeros((8, 8))
    for ta in range(8):
        ua, ea, sa = int(_ATOM_U[ta]), int(_ATOM_E[ta]), int(_ATOM_S[ta])
        for tb in range(8):
            ub, eb, sb = int(_ATOM_U[tb]), int(_ATOM_E[tb]), int(_ATOM_S[tb])
            total = 0.0
            for a2 in (0, 1):
                for b2 in (0, 1):
                    sign = (-1.0) ** (sa ^ (ea & a2)) * (-1.0) ** (sb ^ (eb & b2))
                    total += box.prob(a2, b2, ua, ub) * sign
            w[ta, tb] = total
    return w


def _profile_tables(box: NoSignalingBox) -> dict[tuple[int, int], np.ndarray]:
    """K[(r, s)][P, Q]: value contribution when box 1 is fed the input pair (r, s)."""
    w = _atom_pair_table(box)
    lo, hi = _PROF_LO, _PROF_HI
    k = {}
    for r in (0, 1):
        for s in (0, 1):
            row = box.p[2 * r + s]
            k[r, s] = (row[0] * w[np.ix_(lo, lo)] + row[1] * w[np.ix_(lo, hi)]
                       + row[2] * w[np.ix_(hi, lo)] + row[3] * w[np.ix_(hi, hi)])
    return k


def _strategy_from_profiles(step1_mask: int, p0: int, p1: int) -> LocalStrategy:
    atoms = {(0, 0): p0 % 8, (0, 1): p0 // 8, (1, 0): p1 % 8, (1, 1): p1 // 8}
    step2 = 0
    output = 0
    for w in (0, 1):
        for o1 in (0, 1):
            atom = atoms[w, o1]
            if atom & 1:
                step2 |= 1 << (w + 2 * o1)
            e, sbit = (atom >> 1) & 1, (atom >> 2) & 1
            for o2 in (0, 1):
                if sbit ^ (e & o2):
                    output |= 1 << (w + 2 * (o1 + 2 * o2))
    return LocalStrategy(2, (step1_mask, step2), output)


_IDENTITY_STEP1 = 0b10


def search_adaptive_depth2(box: NoSignalingBox, restrict_first_layer: bool = True,
                           workers: int = 1) -> SearchReport:
    """Exhaustive search over depth-2 adaptive strategy pairs.

    With restrict_first_layer, box 1 receives the original inputs and the
    per-party space is the 4096 combinations of a step-2 table with an
    output table; otherwise all four first-layer functions per party are
    scanned as well (16384 strategies per party).  The value of every
    pair is scored exactly; ties resolve to the lowest serialized tables.
    """
    k = _profile_tables(box)
    step1_masks = (_IDENTITY_STEP1,) if restrict_first_layer else (0, 1, 2, 3)

    candidates: list[tuple[tuple, float, Protocol]] = []
    best = -np.inf

    def scan_combo(combo: tuple[int, int]) -> tuple[float, list[tuple[int, ...]]]:
        ma, mb = combo
        fa = ((ma >> 0) & 1, (ma >> 1) & 1)
        fb = ((mb >> 0) & 1, (mb >> 1) & 1)
        k00, k01 = k[fa[0], fb[0]], k[fa[0], fb[1]]
        k10, k11 = k[fa[1], fb[0]], k[fa[1], fb[1]]
        v4 = (k00[:, None, :, None] + k01[:, None, None, :]
              + k10[None, :, :, None] - k11[None, :, None, :])
        vmax = float(v4.max())
        hits = [(ma, mb, int(p0), int(p1), int(q0), int(q1))
                for p0, p1, q0, q1 in np.argwhere(v4 == vmax)]
        return vmax, hits

    combos = [(ma, mb) for ma in step1_masks for mb in step1_masks]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan_combo, combos))
    else:
        results = [scan_combo(c) for c in combos]

    best = max(v for v, _ in results)
    winner: Protocol | None = None
    winner_key: tuple | None = None
    for v, hits in results:
        if v != best:
            continue
        for ma, mb, p0, p1, q0, q1 in hits:
            proto = Protocol(_strategy_from_profiles(ma, p0, p1),
                             _strategy_from_profiles(mb, q0, q1))
            key = serialization_key(proto)
            if winner_key is None or key < winner_key:
                winner, winner_key = proto, key
    assert winner is not None

    check = distilled_value(winner, box)
    if abs(check - best) > _WITNESS_TOL:
        raise AssertionError(f"witness re-evaluation {check} != reported best {best}")
    per_party = 4096 * len(step1_masks)
    mode = "first layer fixed to the original inputs" if restrict_first_layer \
        else "all first-layer functions"
    return SearchReport(best, winner, per_party * per_party,
                        f"exhaustive adaptive depth 2, {mode}: "
                        f"{per_party}^2 strategy pairs")


# ---------------------------------------------------------------------------
# Comparison of the built-in named protocols
# ---------------------------------------------------------------------------

def builtin_protocols(max_depth: int) -> list[tuple[str, Protocol]]:
    """Registered named protocols of depth <= max_depth, in listing order."""
    from .protocols import (adaptive_parity_protocol, allcock2_protocol,
                            allcock_generalized_protocol, allcock_permuted_protocol,
                            new_depth3_protocol, parity_protocol)
    if max_depth < 1:
        raise DomainError("max_depth must be >= 1")
    entries: list[tuple[str, Protocol]] = []
    for k in range(1, max_depth + 1):
        entries.append((f"parity{k}", embed_nonadaptive(parity_protocol(k))))
    for k in range(1, max_depth + 1):
        entries.append((f"bs{k}", adaptive_parity_protocol(k)))
    if max_depth >= 2:
        entries.append(("allcock2", allcock2_protocol()))
        entries.append(("allcock_perm", allcock_permuted_protocol()))
        for k in range(2, max_depth + 1):
            entries.append((f"gen{k}", allcock_generalized_protocol(k)))
    if max_depth >= 3:
        entries.append(("new3", new_depth3_protocol()))
    return entries


def best_builtin(box: NoSignalingBox, max_depth: int) -> SearchReport:
    """Evaluate every registered named protocol of depth <= max_depth on the box."""
    entries = builtin_protocols(max_depth)
    values = {name: distilled_value(proto, box) for name, proto in entries}
    best_name = max(values, key=lambda name: values[name])
    best_proto = dict(entries)[best_name]
    return SearchReport(values[best_name], best_proto, len(entries),
                        f"built-in protocols of depth <= {max_depth}",
                        best_name=best_name, protocol_values=values)


def report_to_dict(report: SearchReport) -> dict:
    if isinstance(report.best_protocol, NonAdaptiveProtocol):
        witness = protocol_to_dict(embed_nonadaptive(report.best_protocol))
        witness["nonadaptive_output_tables"] = {
            "alice": [format(m, "x") for m in report.best_protocol.alice_out],
            "bob": [format(m, "x") for m in report.best_protocol.bob_out],
        }
    else:
        witness = protocol_to_dict(report.best_protocol)
    out = {
        "best_value": report.best_value,
        "candidates_examined": report.candidates_examined,
        "search_space": report.search_space_description,
        "witness": witness,
    }
    if report.bound_used is not None:
        out["bound"] = report.bound_used
    if report.seed is not None:
        out["seed"] = report.seed
    if report.best_name is not None:
        out["best_name"] = report.best_name
    if report.protocol_values:
        out["protocol_values"] = report.protocol_values
    return out


def report_to_json(report: SearchReport) -> str:
    return json.dumps(report_to_dict(report), indent=2)
