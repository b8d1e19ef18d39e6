"""Depth-n local wiring strategies encoded as bit-exact truth tables.

One party's strategy consists of, per step i, a table choosing the input
bit of box i from (own original input w, own outcomes o1..o_{i-1}), plus
a final output table over (w, o1..o_n).  Tables are stored as integer
bit masks; the lookup index is w + 2*(o1 + 2*o2 + ... + 2^{i-2}*o_{i-1}),
i.e. the outcome history is little-endian above the input bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

from .boxes import DomainError, ValidationError


def mask_from_fn(index_bits: int, fn: Callable[[int], int]) -> int:
    """Compile fn over all 2**index_bits lookup indices into a bit mask."""
    mask = 0
    for idx in range(1 << index_bits):
        if fn(idx) & 1:
            mask |= 1 << idx
    return mask


def _parity(v: int) -> int:
    return v.bit_count() & 1


@dataclass(frozen=True)
class LocalStrategy:
    """One party's wiring: n step tables plus a final output table."""

    depth: int
    step_masks: tuple[int, ...]
    output_mask: int

    def __post_init__(self) -> None:
        n = self.depth
        if n < 1:
            raise DomainError("strategy depth must be >= 1")
        object.__setattr__(self, "step_masks", tuple(int(m) for m in self.step_masks))
        object.__setattr__(self, "output_mask", int(self.output_mask))
        if len(self.step_masks) != n:
            raise ValidationError(f"expected {n} step tables, got {len(self.step_masks)}")
        for i, mask in enumerate(self.step_masks, start=1):
            if not 0 <= mask < (1 << (1 << i)):
                raise ValidationError(f"step {i} table must have exactly {1 << i} bits")
        if not 0 <= self.output_mask < (1 << (1 << (n + 1))):
            raise ValidationError(f"output table must have exactly {1 << (n + 1)} bits")

    def step_input(self, i: int, w: int, history: int) -> int:
        """Input bit fed to box i (1-based) given own input and past outcomes."""
        return (self.step_masks[i - 1] >> (w + 2 * history)) & 1

    def output(self, w: int, history: int) -> int:
        """Final output bit from own input and all n outcomes."""
        return (self.output_mask >> (w + 2 * history)) & 1


@dataclass(frozen=True)
class Protocol:
    """An (Alice, Bob) pair of equal-depth local strategies."""

    alice: LocalStrategy
    bob: LocalStrategy

    def __post_init__(self) -> None:
        if self.alice.depth != self.bob.depth:
            raise ValidationError("Alice and Bob must consume the same number of boxes")

    @property
    def depth(self) -> int:
        return self.alice.depth


@dataclass(frozen=True)
class NonAdaptiveProtocol:
    """Wiring in which every box receives the original inputs unchanged.

    Only the final output tables vary: alice_out[x] maps the n outcomes
    (little-endian index) to the output bit, and likewise bob_out[y].
    """

    depth: int
    alice_out: tuple[int, int]
    bob_out: tuple[int, int]

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise DomainError("protocol depth must be >= 1")
        object.__setattr__(self, "alice_out", tuple(int(m) for m in self.alice_out))
        object.__setattr__(self, "bob_out", tuple(int(m) for m in self.bob_out))
        limit = 1 << (1 << self.depth)
        for side in (self.alice_out, self.bob_out):
            if len(side) != 2:
                raise ValidationError("need one output table per original input value")
            for mask in side:
                if not 0 <= mask < limit:
                    raise ValidationError(
                        f"output table must have exactly {1 << self.depth} bits")


# ---------------------------------------------------------------------------
# Constructors for the named protocols
# ---------------------------------------------------------------------------

def _identity_step_mask() -> int:
    # step 1 table over index w: input bit equals w
    return 0b10


def _constant_step_masks(depth: int) -> tuple[int, ...]:
    # every step forwards the original input w, ignoring history
    return tuple(mask_from_fn(i, lambda idx: idx & 1) for i in range(1, depth + 1))


def parity_protocol(n: int) -> NonAdaptiveProtocol:
    """Non-adaptive wiring outputting the XOR of all n outcomes."""
    if n < 1:
        raise DomainError("parity protocol needs depth >= 1")
    table = mask_from_fn(n, _parity)
    return NonAdaptiveProtocol(n, (table, table), (table, table))


def adaptive_parity_protocol(k: int) -> Protocol:
    """Depth-k wiring feeding box i the AND of the input with the running outcome parity.

    Box 1 receives the original input; box i > 1 receives
    w * (o1 XOR ... XOR o_{i-1}); the final output is the parity of all
    k outcomes.  Alice and Bob play identical strategies.
    """
    if k < 1:
        raise DomainError("adaptive parity protocol needs depth >= 1")
    steps = [_identity_step_mask()]
    for i in range(2, k + 1):
        steps.append(mask_from_fn(i, lambda idx: (idx & 1) & _parity(idx >> 1)))
    out = mask_from_fn(k + 1, lambda idx: _parity(idx >> 1))
    strategy = LocalStrategy(k, tuple(steps), out)
    return Protocol(strategy, strategy)


def allcock_generalized_protocol(n: int) -> Protocol:
    """Depth-n wiring: Alice XORs her input with her outcome parity, Bob gates his.

    Alice feeds box k > 1 the bit x XOR a1 XOR ... XOR a_{k-1}; Bob feeds
    y * (1 XOR b1 XOR ... XOR b_{k-1}).  Both output the parity of their
    outcomes.
    """
    if n < 2:
        raise DomainError("generalized depth-n wiring needs depth >= 2")
    a_steps = [_identity_step_mask()]
    b_steps = [_identity_step_mask()]
    for i in range(2, n + 1):
        a_steps.append(mask_from_fn(i, lambda idx: (idx & 1) ^ _parity(idx >> 1)))
        b_steps.append(mask_from_fn(i, lambda idx: (idx & 1) & (1 ^ _parity(idx >> 1))))
    out = mask_from_fn(n + 1, lambda idx: _parity(idx >> 1))
    return Protocol(LocalStrategy(n, tuple(a_steps), out),
                    LocalStrategy(n, tuple(b_steps), out))


def allcock2_protocol() -> Protocol:
    """The depth-2 specialization of the generalized XOR/gated wiring."""
    return allcock_generalized_protocol(2)


def allcock_permuted_protocol() -> Protocol:
    """Depth-2 local variant: Alice feeds x*a1, Bob feeds 1 XOR y XOR b1."""
    a2 = mask_from_fn(2, lambda idx: (idx & 1) & (idx >> 1))
    b2 = mask_from_fn(2, lambda idx: 1 ^ (idx & 1) ^ (idx >> 1))
    out = mask_from_fn(3, lambda idx: _parity(idx >> 1))
    return Protocol(LocalStrategy(2, (_identity_step_mask(), a2), out),
                    LocalStrategy(2, (_identity_step_mask(), b2), out))


def new_depth3_protocol() -> Protocol:
    """Depth-3 wiring extending the depth-2 XOR/gated scheme by one box.

    The first two boxes are wired as in the depth-2 scheme.  Box 3 inputs:
      Alice: a2*(a1 XOR 1) XOR x*(a1 XOR a2 XOR a1*a2)
      Bob:   1 XOR b1 XOR b2*(1 XOR b1) XOR y*(1 XOR b2 XOR b1*b2)
    Both parties output the parity of their three outcomes.
    """
    base = allcock2_protocol()

    def f3(idx: int) -> int:
        x, a1, a2 = idx & 1, (idx >> 1) & 1, (idx >> 2) & 1
        return (a2 & (a1 ^ 1)) ^ (x & (a1 ^ a2 ^ (a1 & a2)))

    def g3(idx: int) -> int:
        y, b1, b2 = idx & 1, (idx >> 1) & 1, (idx >> 2) & 1
        return 1 ^ b1 ^ (b2 & (1 ^ b1)) ^ (y & (1 ^ b2 ^ (b1 & b2)))

    out = mask_from_fn(4, lambda idx: _parity(idx >> 1))
    alice = LocalStrategy(3, base.alice.step_masks + (mask_from_fn(3, f3),), out)
    bob = LocalStrategy(3, base.bob.step_masks + (mask_from_fn(3, g3),), out)
    return Protocol(alice, bob)


def embed_nonadaptive(p: NonAdaptiveProtocol) -> Protocol:
    """Lift a non-adaptive protocol into the general strategy representation."""
    n = p.depth
    steps = _constant_step_masks(n)

    def lift(tables: tuple[int, int]) -> int:
        return mask_from_fn(n + 1, lambda idx: (tables[idx & 1] >> (idx >> 1)) & 1)

    return Protocol(LocalStrategy(n, steps, lift(p.alice_out)),
                    LocalStrategy(n, steps, lift(p.bob_out)))


def pad_protocol(proto: Protocol, pad_input: int = 0) -> Protocol:
    """Depth n+1 protocol feeding a constant to the extra box and ignoring its outcome."""
    n = proto.depth
    extra = mask_from_fn(n + 1, lambda idx: pad_input & 1)
    keep = (1 << n) - 1

    def widen(strategy: LocalStrategy) -> LocalStrategy:
        out = mask_from_fn(
            n + 2,
            lambda idx: strategy.output(idx & 1, (idx >> 1) & keep),
        )
        return LocalStrategy(n + 1, strategy.step_masks + (extra,), out)

    return Protocol(widen(proto.alice), widen(proto.bob))


# ---------------------------------------------------------------------------
# Serialization: depth plus zero-padded hex masks under the fixed indexing
# ---------------------------------------------------------------------------

def _hex(mask: int, table_bits: int) -> str:
    return format(mask, f"0{max(1, table_bits // 4)}x")


def _strategy_dict(s: LocalStrategy) -> dict:
    return {
        "steps": [_hex(m, 1 << i) for i, m in enumerate(s.step_masks, start=1)],
        "output": _hex(s.output_mask, 1 << (s.depth + 1)),
    }


def protocol_to_dict(proto: Protocol) -> dict:
    return {
        "depth": proto.depth,
        "alice": _strategy_dict(proto.alice),
        "bob": _strategy_dict(proto.bob),
    }


def protocol_to_json(proto: Protocol) -> str:
    return json.dumps(protocol_to_dict(proto))


def _strategy_from_dict(depth: int, obj: dict) -> LocalStrategy:
    steps = tuple(int(h, 16) for h in obj["steps"])
    return LocalStrategy(depth, steps, int(obj["output"], 16))


def protocol_from_json(text: str) -> Protocol:
    obj = json.loads(text)
    depth = int(obj["depth"])
    return Protocol(_strategy_from_dict(depth, obj["alice"]),
                    _strategy_from_dict(depth, obj["bob"]))


def serialization_key(proto: Protocol) -> tuple:
    """Deterministic comparison key: lexicographic over the serialized tables."""
    return (proto.alice.step_masks, proto.alice.output_mask,
            proto.bob.step_masks, proto.bob.output_mask)


# ---------------------------------------------------------------------------
# Name registry used by the CLI, sweeps and the built-in comparison search
# ---------------------------------------------------------------------------

_FIXED_DEPTH = {
    "allcock2": (2, lambda: allcock2_protocol()),
    "allcock_perm": (2, lambda: allcock_permuted_protocol()),
    "new3": (3, lambda: new_depth3_protocol()),
}
_FAMILIES = {
    "parity": lambda k: embed_nonadaptive(parity_protocol(k)),
    "bs": adaptive_parity_protocol,
    "gen": allcock_generalized_protocol,
}
_ALIASES = {
    "perm": "allcock_perm",
    "allcock-perm": "allcock_perm",
    "allcock_permuted": "allcock_perm",
    "adaptive_parity": "bs",
    "adaptive-parity": "bs",
    "allcock_gen": "gen",
    "allcock-gen": "gen",
    "new_depth3": "new3",
    "new-depth3": "new3",
}


def named_protocol(name: str, depth: int | None = None) -> tuple[str, Protocol]:
    """Resolve a protocol name (optionally with a trailing depth digit) to an instance.

    Returns (canonical name, protocol).  Family names (parity, bs, gen)
    need a depth, either as an argument or as a suffix like "parity3".
    """
    key = _ALIASES.get(name.lower(), name.lower())
    if key in _FIXED_DEPTH:
        fixed, ctor = _FIXED_DEPTH[key]
        if depth is not None and depth != fixed:
            raise DomainError(f"protocol {key!r} has fixed depth {fixed}")
        return key, ctor()
    stem = key.rstrip("0123456789")
    if stem != key:
        if depth is not None:
            raise DomainError(f"depth given twice for protocol {name!r}")
        depth = int(key[len(stem):])
        key = _ALIASES.get(stem, stem)
    if key in _FAMILIES:
        if depth is None:
            raise DomainError(f"protocol family {key!r} needs a depth")
        return f"{key}{depth}", _FAMILIES[key](depth)
    raise KeyError(f"unknown protocol name {name!r}")
