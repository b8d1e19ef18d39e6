"""Truth-table constructors, their invariants, and serialization."""

import numpy as np
import pytest

from nlboxes.boxes import BoxParams, DomainError, ValidationError, make_general_nlb
from nlboxes.evaluator import distill, distilled_value
from nlboxes.protocols import (LocalStrategy, NonAdaptiveProtocol, Protocol,
                               adaptive_parity_protocol, allcock2_protocol,
                               allcock_generalized_protocol, allcock_permuted_protocol,
                               embed_nonadaptive, mask_from_fn, named_protocol,
                               new_depth3_protocol, pad_protocol, parity_protocol,
                               protocol_from_json, protocol_to_json)

from _oracles import direct_nonadaptive_box, random_ns_box


def random_family_box(rng):
    return make_general_nlb(BoxParams(*rng.uniform(-1, 1, size=4)))


class TestConstructors:
    def test_parity_tables(self):
        p = parity_protocol(2)
        # outcome histories 0..3 have parities 0,1,1,0 -> mask 0b0110
        assert p.alice_out == (0b0110, 0b0110)
        assert p.bob_out == (0b0110, 0b0110)

    def test_adaptive_parity_depth2_tables(self):
        proto = adaptive_parity_protocol(2)
        assert proto.alice == proto.bob
        assert proto.alice.step_masks[0] == 0b10          # box 1 gets w
        # step 2 feeds w AND o1: set only at index w=1, o1=1 (idx 3)
        assert proto.alice.step_masks[1] == 0b1000
        # output = o1 xor o2, independent of w
        assert proto.alice.output_mask == 0b00111100

    def test_depth2_xor_gated_tables(self):
        proto = allcock2_protocol()
        assert proto.alice.step_masks == (0b10, 0b0110)   # w, then w xor o1
        assert proto.bob.step_masks == (0b10, 0b0010)     # w, then w and not o1
        assert proto.alice.output_mask == 0b00111100
        assert proto.bob.output_mask == 0b00111100

    def test_permuted_variant_tables(self):
        proto = allcock_permuted_protocol()
        assert proto.alice.step_masks[1] == 0b1000        # w and o1
        assert proto.bob.step_masks[1] == 0b1001          # not (w xor o1)

    def test_generalized_depth2_is_bit_identical_to_fixed_constructor(self):
        a = allcock_generalized_protocol(2)
        b = allcock2_protocol()
        assert a.alice == b.alice and a.bob == b.bob

    def test_depth3_extension_reuses_the_depth2_front(self):
        proto = new_depth3_protocol()
        base = allcock2_protocol()
        assert proto.alice.step_masks[:2] == base.alice.step_masks
        assert proto.bob.step_masks[:2] == base.bob.step_masks
        assert proto.depth == 3

    def test_identical_strategies_for_parity_families(self):
        for k in range(1, 5):
            proto = adaptive_parity_protocol(k)
            assert proto.alice == proto.bob
            nonad = parity_protocol(k)
            assert nonad.alice_out == nonad.bob_out

    @pytest.mark.parametrize("ctor", [parity_protocol, adaptive_parity_protocol])
    def test_zero_depth_rejected(self, ctor):
        with pytest.raises(DomainError):
            ctor(0)

    def test_generalized_needs_depth_two(self):
        with pytest.raises(DomainError):
            allcock_generalized_protocol(1)


class TestInvariants:
    def test_step_mask_widths_enforced(self):
        with pytest.raises(ValidationError):
            LocalStrategy(2, (0b10, 1 << 4), 0)   # step-2 table needs 4 bits
        with pytest.raises(ValidationError):
            LocalStrategy(2, (0b10,), 0)          # missing a step table

    def test_output_mask_width_enforced(self):
        with pytest.raises(ValidationError):
            LocalStrategy(1, (0b10,), 1 << 4)

    def test_depth_mismatch_rejected(self):
        a = adaptive_parity_protocol(2).alice
        b = adaptive_parity_protocol(3).bob
        with pytest.raises(ValidationError):
            Protocol(a, b)

    def test_padding_preserves_the_distilled_box(self):
        rng = np.random.default_rng(17)
        protos = [allcock2_protocol(), adaptive_parity_protocol(2),
                  embed_nonadaptive(parity_protocol(2))]
        for proto in protos:
            for pad_input in (0, 1):
                padded = pad_protocol(proto, pad_input)
                assert padded.depth == proto.depth + 1
                for _ in range(20):
                    box = random_family_box(rng)
                    np.testing.assert_allclose(distill(padded, box).p,
                                               distill(proto, box).p, atol=1e-12)


class TestEmbedding:
    def test_embedded_steps_ignore_history(self):
        proto = embed_nonadaptive(parity_protocol(3))
        for i, mask in enumerate(proto.alice.step_masks, start=1):
            expected = mask_from_fn(i, lambda idx: idx & 1)
            assert mask == expected

    def test_identity_at_depth_one(self):
        proto = embed_nonadaptive(parity_protocol(1))
        rng = np.random.default_rng(23)
        for _ in range(50):
            box = random_family_box(rng)
            np.testing.assert_allclose(distill(proto, box).p, box.p, atol=1e-12)

    def test_matches_direct_evaluation_on_random_protocols(self):
        """Embedded evaluation must agree with the independent string-sum oracle."""
        rng = np.random.default_rng(29)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            tables = rng.integers(0, 1 << (1 << n), size=4)
            proto = NonAdaptiveProtocol(n, (int(tables[0]), int(tables[1])),
                                        (int(tables[2]), int(tables[3])))
            box = random_ns_box(rng)
            expected = direct_nonadaptive_box(proto, box)
            actual = distill(embed_nonadaptive(proto), box).p
            np.testing.assert_allclose(actual, expected, atol=1e-12)

    def test_benchmark_value_through_embedding(self):
        box = make_general_nlb(BoxParams(0.92, 0.92, 0.92, -0.22))
        v = distilled_value(embed_nonadaptive(parity_protocol(2)), box)
        assert v == pytest.approx(2.4908, abs=5e-5)


class TestSerialization:
    def test_roundtrip(self):
        proto = new_depth3_protocol()
        again = protocol_from_json(protocol_to_json(proto))
        assert again == proto

    def test_hex_masks_are_zero_padded(self):
        text = protocol_to_json(adaptive_parity_protocol(3))
        import json
        obj = json.loads(text)
        assert obj["depth"] == 3
        assert [len(h) for h in obj["alice"]["steps"]] == [1, 1, 2]
        assert len(obj["alice"]["output"]) == 4

    def test_registry_resolves_names_and_depths(self):
        assert named_protocol("allcock2")[0] == "allcock2"
        assert named_protocol("parity", 3)[0] == "parity3"
        assert named_protocol("bs2")[0] == "bs2"
        name, proto = named_protocol("gen6")
        assert name == "gen6" and proto.depth == 6
        with pytest.raises(KeyError):
            named_protocol("nosuch")
        with pytest.raises(DomainError):
            named_protocol("parity")   # family without a depth
