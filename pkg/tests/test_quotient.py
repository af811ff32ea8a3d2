from fractions import Fraction

import pytest

from dpquotient.errors import UnknownScenario, UnsupportedRegime
from dpquotient.quotient import (
    CurveRole,
    RamificationCurve,
    ScenarioName,
    du_val,
    hirzebruch_jung,
    hurwitz_k2,
    proper_transform_self_int,
    rational_text,
    run_scenario,
    singularity,
)


class TestHirzebruchJung:
    """Tests for continued fraction resolution chains"""

    def test_seven_over_three(self) -> None:
        """7/3 = 3 - 1/(2 - 1/2)"""
        assert hirzebruch_jung(7, 3) == (3, 2, 2)

    def test_three_over_one(self) -> None:
        """1/3(1,1) resolves to a single -3 curve"""
        assert hirzebruch_jung(3, 1) == (3,)

    @pytest.mark.parametrize("m", [2, 3, 5, 8])
    def test_du_val_chain_is_all_twos(self, m: int) -> None:
        """A_{m-1} resolves to m-1 curves of self-intersection -2"""
        assert hirzebruch_jung(m, m - 1) == (2,) * (m - 1)

    @pytest.mark.parametrize("m,q", [(1, 0), (4, 4), (4, 2), (6, 0)])
    def test_invalid_singularity(self, m: int, q: int) -> None:
        """Non coprime or out of range data is rejected"""
        with pytest.raises(ValueError):
            hirzebruch_jung(m, q)


class TestSingularityCatalog:
    """Tests for singularity corrections"""

    def test_du_val_has_no_k2_correction(self) -> None:
        """Du Val points are crepant"""
        assert du_val(1).delta_k2 == 0
        assert du_val(1).label == "A1"
        assert du_val(1).delta_c2 == Fraction(-1, 2)

    def test_non_du_val_entries(self) -> None:
        """1/3(1,1) and 1/7(1,3) lower K^2 by 1/3 and 3/7"""
        assert singularity(3, 1).delta_k2 == Fraction(-1, 3)
        assert singularity(7, 3).delta_k2 == Fraction(-3, 7)
        assert singularity(7, 3).chain == (-3, -2, -2)
        assert singularity(7, 3).correction(CurveRole.D) == Fraction(-5, 7)

    def test_unknown_singularity(self) -> None:
        """1/5(1,2) is outside the catalog"""
        with pytest.raises(UnsupportedRegime):
            singularity(5, 2)

    def test_proper_transform_through_four_a1(self) -> None:
        """A curve with image self-intersection 1 through four A1 points becomes a (-1)-curve"""
        passes = [(du_val(1), CurveRole.C)] * 4
        assert proper_transform_self_int(1, passes) == -1


class TestHurwitz:
    """Tests for the Hurwitz formula"""

    def test_free_action_divides_k2(self) -> None:
        """Without ramification K^2 is divided by |G|"""
        assert hurwitz_k2(2, 2, []) == 1

    def test_ramified_involution(self) -> None:
        """An involution fixing a curve of class -K gives K^2 = 4"""
        assert hurwitz_k2(2, 2, [RamificationCurve(1, 2)]) == 4

    def test_inertia_must_divide_order(self) -> None:
        """An inertia order of 3 is impossible for an involution"""
        with pytest.raises(ValueError):
            hurwitz_k2(2, 2, [RamificationCurve(1, 3)])

    def test_inertia_at_least_two(self) -> None:
        """A curve with trivial inertia is not a ramification curve"""
        with pytest.raises(ValueError):
            RamificationCurve(1, 1)

    def test_group_order_positive(self) -> None:
        """|G| must be positive"""
        with pytest.raises(ValueError):
            hurwitz_k2(0, 2, [])


class TestScenarios:
    """Tests for the named quotient ledgers"""

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("Type0", 9),
            ("Type1", 4),
            ("Type2", 2),
            ("Type3", 6),
            ("Type4", 4),
            ("Type5", 8),
            ("V4", 8),
            ("PSL2F7", 5),
        ],
    )
    def test_final_k2(self, name: str, expected: int) -> None:
        """Each scenario ends at its known K^2"""
        assert run_scenario(name).result == expected

    def test_psl2f7_ledger(self) -> None:
        """The Klein quartic ledger goes 121/21, 114/21, 5"""
        ledger = run_scenario(ScenarioName.PSL2F7)
        assert ledger.group_order == 168
        assert ledger.values == (Fraction(121, 21), Fraction(38, 7), Fraction(5))

    def test_replay_reproduces_values(self) -> None:
        """Replaying the steps gives the recorded values"""
        ledger = run_scenario("Type4")
        assert ledger.replay() == ledger.values

    def test_json_rendering(self) -> None:
        """Every step records the running K^2 as p/q"""
        steps = run_scenario("Type2").to_json_obj()
        assert [s["step"] for s in steps] == ["hurwitz", "resolve", "proper_transform", "contract"]
        assert steps[-1]["k2"] == "2/1"
        assert steps[2]["selfIntersection"] == "-1/1"

    def test_parse_is_case_insensitive(self) -> None:
        """psl2f7 names the PSL2F7 scenario"""
        assert ScenarioName.parse("psl2f7") is ScenarioName.PSL2F7

    def test_unknown_scenario(self) -> None:
        """Unknown names raise UnknownScenario"""
        with pytest.raises(UnknownScenario):
            run_scenario("Type9")

    def test_rational_text_keeps_denominator(self) -> None:
        """Integers render with a denominator of 1"""
        assert rational_text(5) == "5/1"
        assert rational_text(Fraction(-2, 6)) == "-1/3"
