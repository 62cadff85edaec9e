import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wpersist.errors import CapacityError
from wpersist.symcorr import (
    BellFunctional,
    SettingProfile,
    StrategyCounts,
    SymVector,
    apply_functional,
    enumerate_profiles,
    permanent,
    s_o1_closed_form,
    strategy_matrix,
    vertex_image,
    vertex_image_permanent,
)


def abcd_tuples(n):
    for a in range(n + 1):
        for b in range(n - a + 1):
            for c in range(n - a - b + 1):
                yield (a, b, c, n - a - b - c)


@st.composite
def strategy_cases(draw, n_max=6):
    """(n, four-tuple summing to n), sampled without rejection."""
    n = draw(st.integers(1, n_max))
    abcd = draw(st.sampled_from(list(abcd_tuples(n))))
    return n, abcd


class TestEnumerateProfiles:
    def test_single_party_two_settings(self):
        profiles = enumerate_profiles(1, 2)
        assert [(p.o, p.r) for p in profiles] == [(1, 1), (1, 0)]

    def test_four_party_order_matches_s_vector_listing(self):
        profiles = enumerate_profiles(4, 2)
        assert len(profiles) == 14
        assert [(p.o, p.r) for p in profiles] == [
            (1, 1), (1, 0),
            (2, 2), (2, 1), (2, 0),
            (3, 3), (3, 2), (3, 1), (3, 0),
            (4, 4), (4, 3), (4, 2), (4, 1), (4, 0),
        ]

    def test_three_setting_count(self):
        assert len(enumerate_profiles(6, 3)) == math.comb(9, 3) - 1

    @given(st.integers(1, 7), st.integers(1, 3))
    def test_count_formula(self, n, m):
        assert len(enumerate_profiles(n, m)) == math.comb(n + m, m) - 1

    def test_deterministic(self):
        assert enumerate_profiles(5, 2) == enumerate_profiles(5, 2)


class TestVertexImage:
    def test_all_plus_strategy_is_all_ones(self):
        img = vertex_image(StrategyCounts.from_abcd(4, 0, 0, 0), 4)
        assert all(v == 1 for v in img.entries.values())

    def test_all_minus_strategy_alternates_with_order(self):
        img = vertex_image(StrategyCounts.from_abcd(0, 0, 0, 4), 4)
        assert all(v == (-1) ** p.o for p, v in img.entries.items())

    def test_mixed_strategy_marginal_vanishes(self):
        # two (+,+) and two (+,-) parties: the setting-2 marginal averages to 0
        img = vertex_image(StrategyCounts.from_abcd(2, 2, 0, 0), 4)
        assert img.entries[SettingProfile((0, 1), 4)] == 0

    def test_mixed_strategy_frozen_values(self):
        img = vertex_image(StrategyCounts.from_abcd(2, 2, 0, 0), 4)
        assert img.entries[SettingProfile((0, 2), 4)] == Fraction(-1, 3)
        assert img.entries[SettingProfile((1, 2), 4)] == Fraction(-1, 3)
        assert img.entries[SettingProfile((1, 1), 4)] == 0

    def test_entries_within_unit_box(self):
        for abcd in abcd_tuples(5):
            img = vertex_image(StrategyCounts.from_abcd(*abcd), 5)
            assert all(-1 <= v <= 1 for v in img.entries.values())

    def test_mismatched_n_rejected(self):
        with pytest.raises(ValueError):
            vertex_image(StrategyCounts.from_abcd(2, 0, 0, 0), 4)

    @given(strategy_cases())
    def test_setting_swap_relabeling(self, case):
        # exchanging the two settings maps (a,b,c,d) -> (a,c,b,d) and mirrors profiles
        n, (a, b, c, d) = case
        img = vertex_image(StrategyCounts.from_abcd(a, b, c, d), n)
        swapped = vertex_image(StrategyCounts.from_abcd(a, c, b, d), n)
        for p, v in img.entries.items():
            mirrored = SettingProfile((p.counts[1], p.counts[0]), n)
            assert swapped.entries[mirrored] == v

    @given(strategy_cases())
    def test_setting_two_sign_flip(self, case):
        # negating every setting-2 outcome maps (a,b,c,d) -> (b,a,d,c) and
        # scales each coordinate by (-1)^(setting-2 count)
        n, (a, b, c, d) = case
        img = vertex_image(StrategyCounts.from_abcd(a, b, c, d), n)
        flipped = vertex_image(StrategyCounts.from_abcd(b, a, d, c), n)
        for p, v in img.entries.items():
            assert flipped.entries[p] == (-1) ** p.counts[1] * v


class TestPermanentOracle:
    def test_permanent_of_all_ones(self):
        import numpy as np

        assert permanent(np.ones((4, 4), dtype=int)) == 24

    def test_all_plus_profile_value(self):
        st_ = StrategyCounts.from_abcd(4, 0, 0, 0)
        prof = SettingProfile((1, 0), 4)
        assert vertex_image_permanent(st_, prof, 4) == 1

    def test_matrix_shape_and_signs(self):
        st_ = StrategyCounts.from_abcd(1, 1, 1, 1)
        prof = SettingProfile((1, 1), 4)  # o=2, r=1
        mat = strategy_matrix(st_, prof)
        assert mat.shape == (4, 4)
        # identity rows all +1
        assert (mat[:2] == 1).all()
        # setting-1 row: -1 on the c, d columns
        assert list(mat[2]) == [1, 1, -1, -1]
        # setting-2 row: -1 on the b, d columns
        assert list(mat[3]) == [1, -1, 1, -1]

    def test_capacity_error(self):
        st_ = StrategyCounts.from_abcd(15, 0, 0, 0)
        with pytest.raises(CapacityError):
            vertex_image_permanent(st_, SettingProfile((1, 0), 15), 15)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_exhaustive_agreement_with_generating_function(self, n):
        profiles = enumerate_profiles(n, 2)
        for abcd in abcd_tuples(n):
            st_ = StrategyCounts.from_abcd(*abcd)
            img = vertex_image(st_, n)
            for p in profiles:
                assert vertex_image_permanent(st_, p, n) == img.entries[p], (abcd, p)


class TestClosedFormRowExpansion:
    def test_all_plus(self):
        assert s_o1_closed_form((4, 0, 0, 0), 1, 4) == 1

    def test_all_minus_parity(self):
        assert s_o1_closed_form((0, 0, 0, 4), 3, 4) == -1

    def test_hand_worked_case(self):
        # (a,b,c,d)=(2,1,1,0), o=2: generating function gives 8/4! = 1/3
        assert s_o1_closed_form((2, 1, 1, 0), 2, 4) == Fraction(1, 3)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_exhaustive_against_vertex_image(self, n):
        for abcd in abcd_tuples(n):
            img = vertex_image(StrategyCounts.from_abcd(*abcd), n)
            for o in range(1, n + 1):
                prof = SettingProfile((1, o - 1), n)
                assert s_o1_closed_form(abcd, o, n) == img.entries[prof], (abcd, o)


class TestApplyFunctional:
    def test_zero_functional(self):
        img = vertex_image(StrategyCounts.from_abcd(1, 1, 1, 1), 4)
        func = BellFunctional(n=4, m=2, alpha={})
        assert apply_functional(func, img) == 0

    def test_single_coefficient_restores_factorial_scale(self):
        img = vertex_image(StrategyCounts.from_abcd(4, 0, 0, 0), 4)
        prof = SettingProfile((1, 0), 4)
        func = BellFunctional(n=4, m=2, alpha={prof: Fraction(1)})
        assert apply_functional(func, img) == 24

    def test_dimension_mismatch(self):
        img = vertex_image(StrategyCounts.from_abcd(3, 0, 0, 0), 3)
        func = BellFunctional(n=4, m=2, alpha={})
        with pytest.raises(ValueError):
            apply_functional(func, img)


class TestSymVectorSerialization:
    def test_round_trip(self):
        img = vertex_image(StrategyCounts.from_abcd(2, 1, 1, 0), 4)
        data = img.to_json_dict()
        assert data["n"] == 4 and data["m"] == 2
        back = SymVector.from_json_dict(data)
        assert back.entries == img.entries

    def test_schema_fields(self):
        img = vertex_image(StrategyCounts.from_abcd(1, 0, 0, 1), 2)
        data = img.to_json_dict()
        assert set(data) == {"n", "m", "entries"}
        assert all(set(e) == {"profile", "num", "den"} for e in data["entries"])
