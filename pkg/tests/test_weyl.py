import pytest

from dpquotient.config import ClosureOptions, SearchOptions
from dpquotient.errors import (
    CapExceeded,
    InvalidRoot,
    NotAnIsometry,
    ParseError,
    SearchExhausted,
)
from dpquotient.piclattice import K, ContractedModel, line
from dpquotient.weyl import (
    LatticeIsometry,
    SubgroupClosure,
    closure,
    closure_with,
    conjugate_in,
    coxeter_generators,
    geiser,
    in_rational_span,
    index_orbits,
    invariant_basis,
    invariant_rank,
    invariant_rank_on_k_perp,
    minimal_model_search,
    named,
    normalizer,
    orbits,
    parse_generator,
    parse_generators,
)


class TestLatticeIsometry:
    """Tests for single elements of W(E7)"""

    def test_identity_fixes_every_line(self) -> None:
        """The identity fixes all 56 lines"""
        assert len(LatticeIsometry.identity().fixed_lines()) == 56

    def test_geiser_sends_line_to_partner(self) -> None:
        """The Geiser involution swaps E_i and C_i"""
        g = geiser()
        assert g.image_of(line("E3")).label == "C3"
        assert g.order == 2
        assert g.fixed_lines() == []

    def test_geiser_trace(self) -> None:
        """Geiser acts as -1 on K-perp and fixes K, so its trace is -6"""
        assert geiser().trace == -6
        assert geiser()(K) == K

    def test_reflection_has_trace_six(self) -> None:
        """A root reflection fixes a hyperplane"""
        refl = parse_generator("refl:L-E1-E2-E3")
        assert refl.order == 2
        assert refl.trace == 6

    def test_from_line_images_solves_permutation(self) -> None:
        """Images of E1..E7 determine the isometry"""
        swap = LatticeIsometry.from_line_images(
            {"E1": "E2", "E2": "E1", **{f"E{i}": f"E{i}" for i in range(3, 8)}}
        )
        assert swap == parse_generator("perm:(1 2)")

    def test_from_line_images_rejects_non_isometry(self) -> None:
        """E1 and E2 cannot both map to E1"""
        with pytest.raises(NotAnIsometry):
            LatticeIsometry.from_line_images({"E1": "E1", **{f"E{i}": "E1" for i in range(2, 8)}})

    def test_from_line_images_requires_all_images(self) -> None:
        """All of E1..E7 must be given"""
        with pytest.raises(NotAnIsometry):
            LatticeIsometry.from_line_images({"E1": "E2"})

    def test_from_perm_round_trips_matrix(self) -> None:
        """Rebuilding from the permutation gives the same matrix"""
        r = named("r")
        assert LatticeIsometry.from_perm(r.perm).matrix == r.matrix

    def test_inverse_and_power(self) -> None:
        """g * g^-1 is the identity and g^order is the identity"""
        a = named("a")
        assert (a * a.inverse()).is_identity()
        assert (a ** a.order).is_identity()
        assert a**-1 == a.inverse()

    def test_named_elements_orders(self) -> None:
        """a, b and r have order 3 while c and s are involutions"""
        assert [named(x).order for x in "abcrs"] == [3, 3, 2, 3, 2]

    def test_geiser_commutes_with_coxeter_generators(self) -> None:
        """The Geiser involution is central"""
        g = geiser()
        for h in coxeter_generators():
            assert g * h == h * g


class TestGeneratorParsing:
    """Tests for the generator text format"""

    def test_products_compose_right_to_left(self) -> None:
        """named:a*named:b is a composed with b"""
        assert parse_generator("named:a*named:b") == named("a") * named("b")

    def test_perm_cycles(self) -> None:
        """perm:(1 2 3) equals named a"""
        assert parse_generator("perm:(1 2 3)") == named("a")

    def test_parse_generators_splits_on_commas(self) -> None:
        """Comma separated elements become a generator list"""
        assert parse_generators("geiser, id") == [geiser(), LatticeIsometry.identity()]

    @pytest.mark.parametrize("text", ["perm:(1 8)", "perm:(1 2)x", "named:z", "rotate", "perm:(1 2)(2 3)"])
    def test_malformed_generator(self, text: str) -> None:
        """Bad tokens raise ParseError"""
        with pytest.raises(ParseError):
            parse_generator(text)

    def test_reflection_in_non_root(self) -> None:
        """Reflections need a root of K-perp"""
        with pytest.raises(InvalidRoot):
            parse_generator("refl:L-E1")


class TestClosure:
    """Tests for subgroup enumeration"""

    def test_trivial_closure(self) -> None:
        """No generators give the trivial group"""
        assert closure([]).order == 1

    def test_abelian_closure(self) -> None:
        """<a, b> is C3 x C3"""
        assert closure([named("a"), named("b")]).order == 9

    def test_symmetric_group(self) -> None:
        """A transposition and a 7-cycle generate S7"""
        gens = parse_generators("perm:(1 2), perm:(1 2 3 4 5 6 7)")
        assert closure(gens).order == 5040

    def test_cap_exceeded(self) -> None:
        """Closure stops once the cap is passed"""
        with pytest.raises(CapExceeded) as info:
            closure_with(coxeter_generators(), ClosureOptions(cap=1000))
        assert info.value.cap == 1000

    def test_cap_must_be_positive(self) -> None:
        """A zero cap is a usage error"""
        with pytest.raises(ValueError):
            closure([named("a")], cap=0)

    def test_order_counts_every_element(self) -> None:
        """The order of a closure is the number of its elements, identity included"""
        group = closure(parse_generators("perm:(1 2), perm:(1 2 3)"))
        assert group.order == len(list(group.elements())) == 6
        assert LatticeIsometry.identity() in group

    def test_membership(self) -> None:
        """Elements of the closure are members and others are not"""
        group = closure([named("a")])
        assert named("a") ** 2 in group
        assert named("b") not in group

    def test_orbits_of_three_cycle(self) -> None:
        """<a> has orbits of size 1 and 3 only, and an orbit may leave the given lines"""
        sizes = sorted(len(o) for o in index_orbits(closure([named("a")]), range(56)))
        assert set(sizes) == {1, 3}
        assert sum(sizes) == 56
        assert orbits(closure([named("a")]), [line("E1"), line("E2")]) == [
            (line("E1"), line("E2"), line("E3"))
        ]
        assert orbits(closure([named("a")]), [line("E7")]) == [(line("E7"),)]

    def test_normalizer_inside_symmetric_group(self) -> None:
        """The normalizer of <(1 2 3)> in S7 has order 6 * 24"""
        s7 = closure(parse_generators("perm:(1 2), perm:(1 2 3 4 5 6 7)"))
        assert normalizer(closure([named("a")]), s7).order == 144

    def test_conjugate_transpositions(self) -> None:
        """Two transpositions are conjugate in S7 and the witness conjugates"""
        s7 = closure(parse_generators("perm:(1 2), perm:(1 2 3 4 5 6 7)"))
        g, h = parse_generator("perm:(1 2)"), parse_generator("perm:(2 3)")
        w = conjugate_in(g, h, s7)
        assert w is not None
        assert w * g * w.inverse() == h

    def test_conjugate_rejects_different_cycle_types(self) -> None:
        """A transposition and the Geiser involution are not conjugate"""
        s7 = closure(parse_generators("perm:(1 2), perm:(1 2 3 4 5 6 7)"))
        assert conjugate_in(parse_generator("perm:(1 2)"), geiser(), s7) is None


@pytest.mark.slow
class TestFullWeylGroup:
    """Tests needing the whole of W(E7)"""

    def test_order(self, weyl_group: SubgroupClosure) -> None:
        """|W(E7)| = 2,903,040"""
        assert weyl_group.order == 2_903_040

    def test_contains_geiser(self, weyl_group: SubgroupClosure) -> None:
        """The Geiser involution lies in W(E7)"""
        assert geiser() in weyl_group

    def test_centralizer_of_type4(self, type4_centralizer: SubgroupClosure) -> None:
        """The centralizer of <ab> has order 216 and holds a, b, cs, r, s and the Geiser"""
        assert type4_centralizer.order == 216
        for g in (named("a"), named("b"), named("c") * named("s"), named("r"), named("s"), geiser()):
            assert g in type4_centralizer

    def test_reflections_are_conjugate(self, weyl_group: SubgroupClosure) -> None:
        """All root reflections are conjugate in W(E7)"""
        w = conjugate_in(parse_generator("perm:(1 2)"), parse_generator("refl:L-E1-E2-E3"), weyl_group)
        assert w is not None


class TestInvariantLattice:
    """Tests for ranks of invariant Picard lattices"""

    def test_trivial_group_has_full_rank(self) -> None:
        """Every class is fixed by the trivial group"""
        assert invariant_rank(closure([])) == 8

    def test_geiser_has_rank_one(self) -> None:
        """Only multiples of K are Geiser invariant"""
        group = closure([geiser()])
        assert invariant_rank(group) == 1
        assert invariant_rank_on_k_perp(group) == 0

    def test_ab_with_r_has_rank_two(self) -> None:
        """<ab, r> fixes a rank two lattice"""
        assert invariant_rank(closure([named("a") * named("b"), named("r")])) == 2

    def test_s_geiser_has_rank_two(self) -> None:
        """<s * geiser> fixes a rank two lattice"""
        assert invariant_rank(closure([named("s") * geiser()])) == 2

    def test_k_lies_in_every_invariant_lattice(self) -> None:
        """K is in the span of the invariant basis"""
        group = closure([named("a"), named("r")])
        basis = invariant_basis(group)
        assert len(basis) == invariant_rank(group)
        assert in_rational_span(K, basis)
        assert not in_rational_span(line("E1").cls, basis)


class TestMinimalModelSearch:
    """Tests for equivariant contractions"""

    def test_trivial_action_reaches_the_plane(self) -> None:
        """With no Galois action the surface blows down to P2"""
        result = minimal_model_search(closure([]))
        assert result.k2 == 9
        assert result.model().current_k2 == 9

    def test_geiser_action_is_minimal(self) -> None:
        """No Geiser orbit is a disjoint pair"""
        result = minimal_model_search(closure([geiser()]))
        assert result.k2 == 2
        assert result.chain == ()
        assert result.model() == ContractedModel()

    def test_orbit_contraction(self) -> None:
        """A three-cycle contracts {E1, E2, E3} in one step"""
        result = minimal_model_search(closure([named("a")]))
        assert result.k2 == 9
        assert all(len(step) in (1, 3) for step in result.chain)

    def test_state_limit(self) -> None:
        """The search gives up once too many states are visited"""
        with pytest.raises(SearchExhausted):
            minimal_model_search(closure([]), SearchOptions(max_states=1))
