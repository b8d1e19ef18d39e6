"""Box construction, validation, scoring and the quantum-boundary predicate."""

import json
import math

import numpy as np
import pytest

from nlboxes.boxes import (BoxParams, CorrelatorVector, DomainError, NoSignalingBox,
                           ValidationError, box_from_json, box_to_json, chsh_value,
                           correlated_nlb, correlators, is_quantum_boundary_inside,
                           landau_margins, make_general_nlb, make_symmetric_nlb,
                           params_to_json, perfect_nlb)


class TestConstruction:
    def test_perfect_box_rows(self):
        box = make_general_nlb(BoxParams(1, 1, 1, -1))
        expected = np.array([
            [0.5, 0.0, 0.0, 0.5],
            [0.5, 0.0, 0.0, 0.5],
            [0.5, 0.0, 0.0, 0.5],
            [0.0, 0.5, 0.5, 0.0],
        ])
        np.testing.assert_allclose(box.p, expected, atol=1e-15)

    def test_correlated_family_rows(self):
        box = correlated_nlb(0.4)
        np.testing.assert_allclose(box.p[:3], np.tile([0.5, 0.0, 0.0, 0.5], (3, 1)))
        np.testing.assert_allclose(box.p[3], np.array([1.4, 0.6, 0.6, 1.4]) / 4)

    def test_uniform_box(self):
        box = make_general_nlb(BoxParams(0, 0, 0, 0))
        np.testing.assert_allclose(box.p, np.full((4, 4), 0.25))

    def test_symmetric_equals_general(self):
        a = make_symmetric_nlb(0.3, -0.7)
        b = make_general_nlb(BoxParams(0.3, 0.3, 0.3, -0.7))
        np.testing.assert_array_equal(a.p, b.p)

    def test_general_family_always_valid(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            params = BoxParams(*rng.uniform(-1, 1, size=4))
            make_general_nlb(params)  # validation inside must not raise

    @pytest.mark.parametrize("bad", [(1.2, 0, 0, 0), (0, 0, 0, -1.0001)])
    def test_out_of_range_params_rejected(self, bad):
        with pytest.raises(DomainError):
            BoxParams(*bad)

    def test_row_sum_violation_rejected(self):
        p = np.full((4, 4), 0.25)
        p[0, 0] = 0.3
        with pytest.raises(ValidationError):
            NoSignalingBox(p)

    def test_signalling_rejected(self):
        # Alice's marginal at x=0 depends on y: deterministic vs uniform rows.
        p = np.full((4, 4), 0.25)
        p[0] = [1.0, 0.0, 0.0, 0.0]
        with pytest.raises(ValidationError):
            NoSignalingBox(p)

    def test_negative_entry_rejected(self):
        p = np.full((4, 4), 0.25)
        p[2] = [0.5, -0.25, 0.5, 0.25]
        with pytest.raises(ValidationError):
            NoSignalingBox(p)


class TestChshValue:
    def test_perfect_box_attains_four(self):
        assert chsh_value(perfect_nlb()) == pytest.approx(4.0, abs=1e-15)

    def test_uniform_box_scores_zero(self):
        assert chsh_value(make_general_nlb(BoxParams(0, 0, 0, 0))) == pytest.approx(0.0, abs=1e-15)

    def test_benchmark_value(self):
        box = make_general_nlb(BoxParams(0.92, 0.92, 0.92, -0.22))
        assert chsh_value(box) == pytest.approx(2.98, abs=1e-12)

    def test_matches_bias_sum_on_family(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            d1, d2, d3, e = rng.uniform(-1, 1, size=4)
            v = chsh_value(make_general_nlb(BoxParams(d1, d2, d3, e)))
            assert abs(v - (d1 + d2 + d3 - e)) <= 1e-12

    def test_output_flip_negates_value(self):
        # Swapping a with 1-a permutes columns (0,1,2,3) -> (2,3,0,1).
        rng = np.random.default_rng(11)
        for _ in range(100):
            box = make_general_nlb(BoxParams(*rng.uniform(-1, 1, size=4)))
            flipped = NoSignalingBox(box.p[:, [2, 3, 0, 1]])
            assert chsh_value(flipped) == -chsh_value(box)


class TestCorrelators:
    def test_perfect_box(self):
        assert correlators(perfect_nlb()).as_tuple() == pytest.approx((1, 1, 1, -1))

    def test_uniform_box(self):
        box = make_general_nlb(BoxParams(0, 0, 0, 0))
        assert correlators(box).as_tuple() == pytest.approx((0, 0, 0, 0), abs=1e-15)

    def test_symmetric_benchmark(self):
        c = correlators(make_symmetric_nlb(0.96, 0.24))
        assert c.as_tuple() == pytest.approx((0.96, 0.96, 0.96, 0.24), abs=1e-12)

    def test_roundtrip_through_general_family(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            params = BoxParams(*rng.uniform(-1, 1, size=4))
            c = correlators(make_general_nlb(params))
            np.testing.assert_allclose(c.as_tuple(), params.as_tuple(), atol=1e-12)


class TestQuantumBoundary:
    def test_anchor_point_is_exactly_on_the_boundary(self):
        # 3*arcsin(cos(pi/9)) - arcsin(1/2) = 3*(pi/2 - pi/9) - pi/6 = pi.
        delta = math.cos(math.pi / 9)
        margin = 3 * math.asin(delta) - math.asin(0.5)
        assert margin == pytest.approx(math.pi, abs=1e-12)
        c = correlators(make_symmetric_nlb(delta, 0.5))
        assert is_quantum_boundary_inside(c)

    def test_weakly_correlated_symmetric_boxes_are_quantum(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            e = rng.uniform(-1, 1)
            d = rng.uniform(-1, e) if e > -1 else -1.0
            assert is_quantum_boundary_inside(CorrelatorVector(d, d, d, e))

    def test_perfect_box_is_not_quantum(self):
        assert not is_quantum_boundary_inside(CorrelatorVector(1, 1, 1, -1))

    def test_predicate_flips_across_the_symmetric_boundary(self):
        # Boundary curve: 3*arcsin(d) - arcsin(e) = pi, for d near 1.
        for delta in np.linspace(0.87, 0.999, 40):
            e_boundary = math.sin(3 * math.asin(delta) - math.pi)
            for off, expected in ((-1e-6, False), (1e-6, True)):
                e = e_boundary + off
                if not -1 <= e <= 1:
                    continue
                c = CorrelatorVector(delta, delta, delta, e)
                assert is_quantum_boundary_inside(c) is expected

    def test_margins_are_array_friendly(self):
        d = np.array([0.5, 1.0])
        m = landau_margins(d, d, d, np.array([0.5, -1.0]))
        assert m.shape == (2,)

    def test_out_of_range_correlator_rejected(self):
        with pytest.raises(DomainError):
            CorrelatorVector(1.5, 0, 0, 0)


class TestSerialization:
    def test_raw_table_roundtrip(self):
        box = make_symmetric_nlb(0.5, -0.25)
        again = box_from_json(box_to_json(box))
        np.testing.assert_array_equal(again.p, box.p)

    def test_parameterized_form(self):
        params = BoxParams(0.9, 0.8, 0.7, -0.6)
        box = box_from_json(params_to_json(params))
        np.testing.assert_allclose(box.p, make_general_nlb(params).p)

    def test_missing_fields_rejected(self):
        with pytest.raises(ValidationError):
            box_from_json(json.dumps({"delta1": 1.0}))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValidationError):
            box_from_json(json.dumps({"p": [0.25] * 12}))
