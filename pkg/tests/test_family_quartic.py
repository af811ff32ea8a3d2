from collections import Counter

import pytest

from dpquotient import family_quartic as fq
from dpquotient.classify import ElementLabel, Rationality, proposition_dp2
from dpquotient.errors import (
    CertificateMismatch,
    Impossible,
    ParseError,
    PreconditionFailed,
    UnsupportedRegime,
)
from dpquotient.piclattice import enumerate_lines
from dpquotient.store import CertificateStore
from dpquotient.weyl import geiser


class TestPresets:
    """Tests for the named members of the family"""

    def test_lookup_accepts_bare_number(self) -> None:
        """`4` and `ex4` name the same preset"""
        assert fq.preset("4") == fq.preset("ex4")

    def test_unknown_preset(self) -> None:
        """Unknown names raise PreconditionFailed"""
        with pytest.raises(PreconditionFailed):
            fq.preset("ex9")

    def test_galois_signs_of_squares(self) -> None:
        """All parameters square means trivial Galois action"""
        assert fq.preset("ex0").galois_signs() == ((1, 1, 1),)

    def test_galois_signs_of_two_classes(self) -> None:
        """sigma, tau, eta in classes mu, nu, mu*nu give four sign vectors"""
        assert len(fq.preset("ex4").galois_signs()) == 4

    def test_is_square(self) -> None:
        """sigma * tau is a square when both lie in the class mu"""
        p = fq.preset("ex1")
        assert p.is_square(("s", "t"))
        assert not p.is_square(("s",))


class TestAutomorphisms:
    """Tests for words in a, b, d and g"""

    @pytest.mark.parametrize(
        "word,label",
        [
            ("a2b2", ElementLabel.TYPE1),
            ("a2b2g", ElementLabel.TYPE2),
            ("g", ElementLabel.TYPE0),
            ("a2g", ElementLabel.TYPE2),
            ("d", ElementLabel.TYPE1),
            ("a3b", ElementLabel.ORDER4_T),
            ("a3bg", ElementLabel.ORDER4_MINUS_T),
            ("a2d", ElementLabel.ORDER4_T),
        ],
    )
    def test_element_types(self, word: str, label: ElementLabel) -> None:
        """Each word has its geometric type"""
        assert fq.element_type(fq.Automorphism.parse(word)) is label

    def test_orders(self) -> None:
        """a3b has order 4 and a2b2 order 2"""
        assert fq.Automorphism.parse("a3b").order == 4
        assert fq.Automorphism.parse("a2b2").order == 2
        assert fq.Automorphism.parse("1").is_identity()

    def test_a_alone_is_not_an_automorphism(self) -> None:
        """(ix:y:z:t) changes the sign of the x^2 y^2 term"""
        with pytest.raises(UnsupportedRegime):
            fq.Automorphism.parse("a")

    def test_bad_letters(self) -> None:
        """Only a, b, d and g are letters"""
        with pytest.raises(ParseError):
            fq.Automorphism.parse("a2x")

    def test_square_of_a2d_is_n(self) -> None:
        """(a2d)^2 = N"""
        square = fq.Automorphism.parse("a2d") * fq.Automorphism.parse("a2d")
        assert square == fq.Automorphism.parse(fq.N_WORD)


class TestFamilyGroups:
    """Tests for subgroups of the order 32 group"""

    @pytest.mark.parametrize(
        "name,order",
        [("trivial", 1), ("N", 2), ("C4", 4), ("C2xC2", 4), ("D8", 8), ("Q8", 8), ("Q8g", 8)],
    )
    def test_orders(self, name: str, order: int) -> None:
        """Named groups have their orders"""
        assert fq.FamilyGroup.parse(name).order == order

    @pytest.mark.parametrize(
        "name,case",
        [
            ("N", 2),
            ("C2type2", 3),
            ("C4", 5),
            ("C4g", 6),
            ("C2xC2", 7),
            ("D8", 9),
            ("Q8", 10),
            ("Q8g", 11),
        ],
    )
    def test_case_index(self, name: str, case: int) -> None:
        """Named groups land on their exceptional case"""
        descriptor = fq.describe(fq.FamilyGroup.parse(name))
        assert proposition_dp2(descriptor).case_index == case

    def test_parse_generator_list(self) -> None:
        """Comma separated words generate a group"""
        group = fq.FamilyGroup.parse("a3b,dg")
        assert group.order == 8
        assert group.name == "<a3b,dg>"
        assert fq.Automorphism.parse(fq.N_WORD) in group


class TestLineModel:
    """Tests for the labelled line catalog"""

    def test_family_sizes(self) -> None:
        """8 theta lines and 16 in each other family"""
        counts = Counter(ln.family for ln in fq.catalog())
        assert counts == Counter(fq.FAMILY_SIZES)

    def test_catalog_labels_are_distinct(self) -> None:
        """Every line receives its own label"""
        labels = [ln.label for ln in fq.catalog()]
        assert sorted(labels) == sorted(ln.label for ln in enumerate_lines())

    def test_theta_lines_fixed_by_n(self, uvw_model: fq.QuarticLineModel) -> None:
        """N fixes each theta line"""
        n = fq.automorphism_isometry(fq.QChoice.UVW, fq.Automorphism.parse(fq.N_WORD))
        for i in uvw_model.family_indices("theta"):
            assert n.perm[i] == i

    def test_n_pairs_meeting_lines(self, uvw_model: fq.QuarticLineModel) -> None:
        """Outside theta a line meets its N image once"""
        n = fq.automorphism_isometry(fq.QChoice.UVW, fq.Automorphism.parse(fq.N_WORD))
        lines = enumerate_lines()
        for family in ("eta", "sigma", "tau"):
            for i in uvw_model.family_indices(family):
                assert lines[i].cls.dot(lines[n.perm[i]].cls) == 1

    def test_t_flip_is_geiser(self) -> None:
        """(x:y:z:-t) acts as the Geiser involution"""
        assert fq.automorphism_isometry(fq.QChoice.UVW, fq.Automorphism.parse("g")) == geiser()

    def test_group_structure(self) -> None:
        """ab, ab3, d and g generate a group of order 32 with central N and Geiser"""
        structure = fq.group_structure()
        assert structure.order == 32
        assert structure.ok


class TestDictionary:
    """Tests for the pinned lattice dictionary"""

    def test_certificate_shape(self) -> None:
        """The certificate lists E1..E7 images for each generator"""
        certificate = fq.dictionary_certificate()
        assert certificate["order"] == 32
        assert set(certificate["images"]) == set(fq.DICTIONARY_WORDS)  # type: ignore[arg-type]
        assert len(certificate["labels"]) == 56  # type: ignore[arg-type]

    def test_pin_then_compare(self, memory_store: CertificateStore) -> None:
        """The first call stores the dictionary and the second agrees with it"""
        first = fq.pin_dictionary(memory_store)
        assert memory_store.get(fq.DICTIONARY_KIND, "uvw") == first
        assert fq.pin_dictionary(memory_store) == first

    def test_tampered_copy(self, memory_store: CertificateStore) -> None:
        """A stored copy that differs raises CertificateMismatch"""
        memory_store.put(fq.DICTIONARY_KIND, "uvw", {"order": 16})
        with pytest.raises(CertificateMismatch):
            fq.pin_dictionary(memory_store)


class TestGaloisModel:
    """Tests for the Galois action on the line families"""

    def test_trivial_action(self) -> None:
        """All parameters square: Galois fixes every line"""
        model = fq.galois_model(fq.preset("ex0"))
        assert model.group_order == 1
        assert all(actions == ("1",) for actions in model.per_family.values())

    def test_all_nonsquare(self) -> None:
        """With q = uvw and one class mu, Galois acts as N * g on each family"""
        model = fq.galois_model(fq.preset("ex1"))
        assert model.group_order == 2
        assert all(actions == ("1", "a2b2g") for actions in model.per_family.values())

    def test_eta_only(self) -> None:
        """With q = uvw*ste and only eta nonsquare, sigma and tau move by N and eta by g"""
        model = fq.galois_model(fq.preset("ex6"))
        assert model.per_family == {"eta": ("1", "g"), "sigma": ("1", "a2b2"), "tau": ("1", "a2b2")}

    def test_three_classes_need_conic_point(self) -> None:
        """Three distinct classes without a conic point are unsupported"""
        p = fq.QuarticPreset("x", fq.QChoice.UVW, fq.SquareSymbol.MU, fq.SquareSymbol.NU, fq.SquareSymbol.MU_NU)
        with pytest.raises(UnsupportedRegime):
            fq.galois_model(p)


class TestRationalityOfX:
    """Tests for the rationality of the surface itself"""

    def test_pair_contraction(self) -> None:
        """q = uvw members contract invariant pairs to K^2 >= 6"""
        result = fq.x_rationality(fq.preset("ex1"))
        assert result.verdict is Rationality.RATIONAL
        assert result.rule == "pair-contraction"
        assert result.k2 >= 6

    def test_pair_contraction_needs_uvw(self) -> None:
        """The pair chain is only built for q = uvw"""
        with pytest.raises(PreconditionFailed):
            fq.pairwise_contraction_chain(fq.preset("ex5"))

    def test_picard_rank_one(self) -> None:
        """ex5 has rho(X) = 1"""
        result = fq.x_rationality(fq.preset("ex5"))
        assert result.verdict is Rationality.NON_RATIONAL
        assert result.rule == "picard-rank-one"

    def test_minimal_dp4(self) -> None:
        """ex6 contracts to a minimal del Pezzo surface of degree 4"""
        result = fq.x_rationality(fq.preset("ex6"))
        assert result.verdict is Rationality.NON_RATIONAL
        assert result.k2 == 4


class TestQuotients:
    """Tests for the rationality of X/G"""

    def test_q8_minimal_on_ex0(self) -> None:
        """<a3b, a2d> has invariant rank 1 on ex0"""
        minimality = fq.g_minimality(fq.FamilyGroup.parse("Q8"), fq.preset("ex0"))
        assert minimality.minimal
        assert all(minimality.families.values())

    @pytest.mark.parametrize("name", ["N", "C4", "Q8"])
    def test_rank_one_on_ex8(self, name: str) -> None:
        """ex8 stays minimal under N, C4 and Q8"""
        assert fq.g_minimality(fq.FamilyGroup.parse(name), fq.preset("ex8")).rank == 1

    def test_c4_on_ex1_is_not_rational(self) -> None:
        """Every fixed point of <a3b> on ex1 is fused"""
        verdict = fq.quotient_verdict(fq.FamilyGroup.parse("C4"), fq.preset("ex1"))
        assert verdict.verdict is Rationality.NON_RATIONAL
        assert verdict.rule == "no-fixed-k-points"
        assert all(record.fused for record in verdict.records)

    def test_d8_on_ex1_is_rational(self) -> None:
        """D8 leaves a fixed point over k"""
        verdict = fq.quotient_verdict(fq.FamilyGroup.parse("D8"), fq.preset("ex1"))
        assert verdict.verdict is Rationality.RATIONAL

    def test_c4g_on_ex2_is_rational(self) -> None:
        """<a3bg> on ex2 has a fixed point that is not fused"""
        verdict = fq.quotient_verdict(fq.FamilyGroup.parse("a3bg"), fq.preset("ex2"))
        assert verdict.verdict is Rationality.RATIONAL

    def test_geiser_in_group(self) -> None:
        """Groups containing g have rational quotients"""
        verdict = fq.quotient_verdict(fq.FamilyGroup.parse("g"), fq.preset("ex5"))
        assert verdict.verdict is Rationality.RATIONAL
        assert verdict.rule == "geiser-quotient-is-plane-quotient"

    def test_trivial_group_reduces_to_x(self) -> None:
        """X/1 is X"""
        verdict = fq.quotient_verdict(fq.FamilyGroup.parse("trivial"), fq.preset("ex5"))
        assert verdict.rule == "quotient-is-x:picard-rank-one"

    def test_group_without_n(self) -> None:
        """<d> neither contains N nor is generated by a type 2 involution"""
        with pytest.raises(UnsupportedRegime):
            fq.quotient_verdict(fq.FamilyGroup.parse("d"), fq.preset("ex1"))


class TestVerdictMatrix:
    """Tests for the table of realising examples"""

    def test_cell_lookup(self) -> None:
        """Cells name their examples"""
        assert fq.table4(9, fq.Table4Column.RAT_NOT).example == "ex3"
        assert fq.table4(10, "1").example == "ex0"
        assert fq.table4(8, "2").example == "6.18b"
        assert fq.table4(4, "2").family == "cubic"

    def test_impossible_cell(self) -> None:
        """The trivial group cannot have X rational"""
        with pytest.raises(Impossible) as info:
            fq.table4(1, fq.Table4Column.RAT_RAT)
        assert info.value.details["row"] == 1

    def test_row_out_of_range(self) -> None:
        """Rows run from 1 to 11"""
        with pytest.raises(PreconditionFailed):
            fq.table4(12, "1")

    def test_column_parse(self) -> None:
        """Columns parse from 1..4 or their text"""
        assert fq.Table4Column.parse("X not, X/G not") is fq.Table4Column.NOT_NOT
        with pytest.raises(ParseError):
            fq.Table4Column.parse("5")

    def test_single_cell(self) -> None:
        """ex3 with D8 gives X rational and X/G not"""
        evaluation = fq.evaluate_cell(fq.table4(9, "2"))
        assert evaluation.consistent

    @pytest.mark.parametrize(
        "row,column",
        [
            (1, "4"), (2, "1"), (3, "4"), (4, "1"), (5, "2"), (6, "3"),
            (7, "4"), (8, "2"), (9, "3"), (10, "1"), (11, "2"),
        ],
    )
    def test_one_cell_per_row(self, row: int, column: str) -> None:
        """One realisable cell of every row reproduces its column"""
        evaluation = fq.evaluate_cell(fq.table4(row, column))
        assert isinstance(evaluation.x, Rationality)
        assert isinstance(evaluation.quotient, Rationality)
        assert evaluation.consistent
        assert evaluation.to_json_obj()["x"] in {r.value for r in Rationality}

    @pytest.mark.slow
    def test_every_cell_is_consistent(self) -> None:
        """All 44 cells are impossible or reproduce their column"""
        matrix = fq.verdict_matrix()
        assert len(matrix) == 44
        assert sum(1 for cell in matrix if "impossible" in cell) == 6
        assert all(cell["consistent"] for cell in matrix if "impossible" not in cell)
