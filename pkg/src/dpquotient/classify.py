"""Decision procedures for quotients of degree 2 del Pezzo surfaces.

Three procedures live here:

* `proposition_dp2` sorts a finite automorphism group G into the eleven cases where
  X/G can fail to be rational, or discharges it as always rational;
* `type2_nonrationality_certificate` checks the lattice condition that makes a
  surface with an invariant type 2 involution non-rational;
* the Gamma scan enumerates the subgroups of the centralizer of an order 3 element
  of type 4 and keeps those that are minimal together with G yet rational.
"""

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum

import sympy
from attrs import field, frozen

from .config import SearchOptions
from .errors import InconsistentDescriptor, PreconditionFailed
from .piclattice import FORM_DIAGONAL, K, RANK
from .weyl import (
    IDENTITY_PERM,
    LatticeIsometry,
    SubgroupClosure,
    centralizer,
    closure,
    compose_perms,
    geiser,
    invariant_rank,
    invert_perm,
    minimal_model_search,
    named,
    normalizer,
)

logger = logging.getLogger(__name__)


class AbstractType(str, Enum):
    TRIVIAL = "Trivial"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C2XC2 = "C2xC2"
    S3 = "S3"
    D8 = "D8"
    Q8 = "Q8"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "AbstractType":
        token = text.strip().lower().replace("^2", "xc2")
        for member in cls:
            if member.value.lower() == token:
                return member
        return cls.OTHER


class ElementLabel(str, Enum):
    """Geometric type of an automorphism, as read from its action on P^2 and t"""

    TYPE0 = "0"
    TYPE1 = "1"
    TYPE2 = "2"
    TYPE3 = "3"
    TYPE4 = "4"
    TYPE5 = "5"
    ORDER4_T = "(ix:-iy:z:t)"
    ORDER4_MINUS_T = "(ix:-iy:z:-t)"
    ORDER4_OTHER = "order4"

    @property
    def element_order(self) -> int:
        if self in (ElementLabel.TYPE0, ElementLabel.TYPE1, ElementLabel.TYPE2):
            return 2
        if self in (ElementLabel.TYPE3, ElementLabel.TYPE4):
            return 3
        if self is ElementLabel.TYPE5:
            return 7
        return 4


_ALLOWED_ORDERS: dict[AbstractType, frozenset[int]] = {
    AbstractType.TRIVIAL: frozenset(),
    AbstractType.C2: frozenset({2}),
    AbstractType.C3: frozenset({3}),
    AbstractType.C4: frozenset({2, 4}),
    AbstractType.C2XC2: frozenset({2}),
    AbstractType.S3: frozenset({2, 3}),
    AbstractType.D8: frozenset({2, 4}),
    AbstractType.Q8: frozenset({2, 4}),
}


@frozen
class GroupDescriptor:
    """A group G with the types of its nontrivial conjugacy classes.

    `element_types` maps a class name (any string, e.g. `"involutions"` or `"a3b"`) to
    its label.
    """

    abstract_type: AbstractType
    element_types: Mapping[str, ElementLabel] = field(factory=dict)
    contains_geiser: bool = False
    name: str = ""

    def __attrs_post_init__(self) -> None:
        labels = set(self.element_types.values())
        if ElementLabel.TYPE0 in labels and not self.contains_geiser:
            raise InconsistentDescriptor("A type 0 element is the Geiser involution itself")
        allowed = _ALLOWED_ORDERS.get(self.abstract_type)
        if allowed is None:
            return
        wrong = sorted(label.value for label in labels if label.element_order not in allowed)
        if wrong:
            raise InconsistentDescriptor(
                f"{self.abstract_type.value} has no elements of the orders required by "
                f"labels {', '.join(wrong)}"
            )
        if self.abstract_type is AbstractType.TRIVIAL and self.contains_geiser:
            raise InconsistentDescriptor("The trivial group cannot contain the Geiser involution")
        if self.contains_geiser and 2 not in allowed:
            raise InconsistentDescriptor(
                f"{self.abstract_type.value} has no involutions, so it cannot contain Geiser"
            )

    @property
    def labels(self) -> frozenset[ElementLabel]:
        return frozenset(self.element_types.values())

    @classmethod
    def from_labels(
        cls, abstract_type: AbstractType, labels: Iterable[str], contains_geiser: bool = False
    ) -> "GroupDescriptor":
        types = {f"class{i}": ElementLabel(label) for i, label in enumerate(labels, start=1)}
        return cls(abstract_type, types, contains_geiser)


class Rationality(str, Enum):
    RATIONAL = "Rational"
    NON_RATIONAL = "NonRational"
    UNDETERMINED = "Undetermined"


class VerdictKind(str, Enum):
    ALWAYS_RATIONAL = "AlwaysRational"
    POTENTIALLY_NON_RATIONAL = "PotentiallyNonRational"
    NON_RATIONAL_CERTIFIED = "NonRationalCertified"


CASE_COUNT = 11


class Citation(str, Enum):
    """Named argument that settles a verdict"""

    GEISER_INSIDE = "geiser-quotient-is-plane-quotient"
    MINIMAL_SURFACE = "minimal-surface-itself"
    TYPE1_ISKOVSKIKH = "type1-quotient-iskovskikh"
    TYPE2_DP2 = "type2-quotient-dp2"
    TYPE3_K2_6 = "type3-quotient-k2-6"
    TYPE4_DP4 = "type4-quotient-dp4"
    TYPE5_K2_8 = "type5-normal-subgroup-k2-8"
    KLEIN_FOUR_TYPE1 = "klein-four-type1-quotient-k2-8"
    KLEIN_FOUR_TYPE2 = "klein-four-type2"
    ORDER4_CONIC_BUNDLE = "order4-quotient-conic-bundle"
    ORDER4_SQUARE_FIXES_CURVE = "order4-square-fixes-curve"
    S3_TYPE1 = "s3-type1-involutions"
    S3_TYPE2 = "s3-type2-involutions"
    DIHEDRAL_TYPE2 = "dihedral-type2"
    DIHEDRAL_TYPE1 = "dihedral-type1-subgroup"
    QUATERNION_CONIC_BUNDLE = "quaternion-conic-bundle"
    QUATERNION_SQUARE_FIXES_CURVE = "quaternion-square-fixes-curve"
    TWO_GROUP_NOT_LISTED = "two-group-contains-discharged-subgroup"
    ORDER_2K3_NOT_LISTED = "order-2k3-contains-discharged-subgroup"
    KLEIN_QUARTIC_K2_5 = "klein-quartic-group-k2-5"
    TYPE2_FIXES_ELLIPTIC_CURVE = "type2-involution-fixes-elliptic-curve"
    GALOIS_IN_TWISTED_EIGENSPACE = "galois-invariants-in-twisted-eigenspace"
    CERTIFICATE_NOT_ISSUED = "certificate-not-issued"


@frozen
class Verdict:
    kind: VerdictKind
    case_index: int | None = None
    citations: tuple[Citation, ...] = ()

    def __attrs_post_init__(self) -> None:
        if self.kind is VerdictKind.POTENTIALLY_NON_RATIONAL:
            if self.case_index is None or not 1 <= self.case_index <= CASE_COUNT:
                raise ValueError(f"Case index must lie in 1..{CASE_COUNT}, got {self.case_index}")

    def to_json_obj(self) -> dict[str, object]:
        obj: dict[str, object] = {"kind": self.kind.value, "citations": [c.value for c in self.citations]}
        if self.case_index is not None:
            obj["caseIndex"] = self.case_index
        return obj


def _rational(*citations: Citation) -> Verdict:
    return Verdict(VerdictKind.ALWAYS_RATIONAL, None, citations)


def _case(index: int, *citations: Citation) -> Verdict:
    return Verdict(VerdictKind.POTENTIALLY_NON_RATIONAL, index, citations)


def proposition_dp2(g: GroupDescriptor) -> Verdict:
    """Sorts G into the exceptional cases or discharges X/G as always rational"""
    labels = g.labels
    involutions = {lb for lb in labels if lb.element_order == 2}
    order3 = {lb for lb in labels if lb.element_order == 3}
    order4 = {lb for lb in labels if lb.element_order == 4}
    only_type2 = involutions == {ElementLabel.TYPE2}
    # the central N of the order 4 groups is type 1 even when type 2 elements generate
    counts = Counter(g.element_types.values())
    type2_generated = counts[ElementLabel.TYPE2] >= 2 and counts[ElementLabel.TYPE1] <= 1

    if g.contains_geiser:
        return _rational(Citation.GEISER_INSIDE)
    kind = g.abstract_type
    if kind is AbstractType.TRIVIAL:
        return _case(1, Citation.MINIMAL_SURFACE)
    if kind is AbstractType.C2:
        if involutions == {ElementLabel.TYPE1}:
            return _case(2, Citation.TYPE1_ISKOVSKIKH)
        if only_type2:
            return _case(3, Citation.TYPE2_DP2)
    elif kind is AbstractType.C3:
        if order3 == {ElementLabel.TYPE4}:
            return _case(4, Citation.TYPE4_DP4)
        if order3 == {ElementLabel.TYPE3}:
            return _rational(Citation.TYPE3_K2_6)
    elif kind is AbstractType.C4:
        if order4 == {ElementLabel.ORDER4_T}:
            return _case(5, Citation.ORDER4_CONIC_BUNDLE)
        if order4 == {ElementLabel.ORDER4_MINUS_T}:
            return _case(6, Citation.ORDER4_CONIC_BUNDLE)
        if order4:
            return _rational(Citation.ORDER4_SQUARE_FIXES_CURVE)
    elif kind is AbstractType.C2XC2:
        if only_type2 or type2_generated:
            return _case(7, Citation.KLEIN_FOUR_TYPE2)
        if involutions:
            return _rational(Citation.KLEIN_FOUR_TYPE1)
    elif kind is AbstractType.S3:
        if ElementLabel.TYPE3 in order3:
            return _rational(Citation.TYPE3_K2_6)
        if only_type2 and order3 <= {ElementLabel.TYPE4}:
            return _case(8, Citation.S3_TYPE2)
        if ElementLabel.TYPE1 in involutions:
            return _rational(Citation.S3_TYPE1)
    elif kind is AbstractType.D8:
        if only_type2 or type2_generated:
            return _case(9, Citation.DIHEDRAL_TYPE2)
        if ElementLabel.TYPE1 in involutions:
            return _rational(Citation.DIHEDRAL_TYPE1)
    elif kind is AbstractType.Q8:
        if ElementLabel.ORDER4_MINUS_T in order4:
            return _case(11, Citation.QUATERNION_CONIC_BUNDLE)
        if order4 == {ElementLabel.ORDER4_T}:
            return _case(10, Citation.QUATERNION_CONIC_BUNDLE)
        if order4:
            return _rational(Citation.QUATERNION_SQUARE_FIXES_CURVE)
    else:
        if ElementLabel.TYPE5 in labels:
            return _rational(Citation.TYPE5_K2_8)
        if g.name.upper() in ("PSL2F7", "PSL(2,7)", "PSL2(F7)"):
            return _rational(Citation.KLEIN_QUARTIC_K2_5)
        if ElementLabel.TYPE3 in order3:
            return _rational(Citation.TYPE3_K2_6)
        if order3:
            return _rational(Citation.ORDER_2K3_NOT_LISTED)
        return _rational(Citation.TWO_GROUP_NOT_LISTED)
    raise InconsistentDescriptor(
        f"Labels {sorted(lb.value for lb in labels)} do not describe a group of type "
        f"{kind.value}"
    )


# --- type 2 certificate ---------------------------------------------------------


def _k_row() -> sympy.Matrix:
    return sympy.Matrix([[s * c for s, c in zip(FORM_DIAGONAL, K.coeffs)]])


def _eigenspace_on_k_perp(g: LatticeIsometry, eigenvalue: int) -> list[sympy.Matrix]:
    conditions = sympy.Matrix.vstack(
        sympy.Matrix(g.matrix) - eigenvalue * sympy.eye(RANK), _k_row()
    )
    return list(conditions.nullspace())


def eigenspace_dimensions(g: LatticeIsometry) -> tuple[int, int]:
    """Dimensions of V^g and V^(g * Geiser) inside K-perp (over Q)"""
    if g.order > 2:
        raise PreconditionFailed(f"Expected an involution, got an element of order {g.order}")
    return len(_eigenspace_on_k_perp(g, 1)), len(_eigenspace_on_k_perp(g, -1))


def type2_nonrationality_certificate(g: LatticeIsometry, gal: SubgroupClosure) -> Verdict:
    """Certifies non-rationality from an invariant type 2 involution.

    Raises:
        PreconditionFailed: If g is not an involution or Pic(X) has invariant rank other
            than 1 under g together with gal
    """
    if g.order != 2:
        raise PreconditionFailed(f"Expected an involution, got an element of order {g.order}")
    combined = closure([g, *gal.generators])
    rank = invariant_rank(combined)
    if rank != 1:
        raise PreconditionFailed(
            f"Invariant Picard rank of <g> with the Galois image is {rank}, not 1"
        )
    plus, minus = eigenspace_dimensions(g)
    if plus + minus != RANK - 1:
        raise PreconditionFailed(f"Eigenspaces of g on K-perp have dimensions {plus} + {minus}")
    # (-1)-eigenspace of g is the fixed space of g * Geiser on K-perp
    twisted = sympy.Matrix(g.matrix) + sympy.eye(RANK)
    gal_conditions = [sympy.Matrix(h.matrix) - sympy.eye(RANK) for h in gal.generators]
    gal_fixed = sympy.Matrix.vstack(*gal_conditions, _k_row()).nullspace()
    if all((twisted * v).is_zero_matrix for v in gal_fixed):
        return Verdict(
            VerdictKind.NON_RATIONAL_CERTIFIED,
            None,
            (Citation.TYPE2_FIXES_ELLIPTIC_CURVE, Citation.GALOIS_IN_TWISTED_EIGENSPACE),
        )
    logger.info("Galois invariants leave the (-1)-eigenspace of g; no certificate issued")
    return _case(3, Citation.CERTIFICATE_NOT_ISSUED)


class Type2Model(str, Enum):
    RHO_ONE = "rho(Y)=1"
    MINIMAL_CONIC_BUNDLE = "minimal conic bundle"
    MINIMAL_CUBIC = "minimal cubic surface"
    MINIMAL_DP4_RHO_ONE = "minimal dP4 with rho=1"
    MINIMAL_DP4_CONIC_BUNDLE = "minimal dP4 with minimal conic bundle structure"


def remark_type2_models(root_orbits: Sequence[Sequence[int]]) -> Type2Model:
    """Minimal model of X/G for a type 2 involution, from the Galois orbits on four roots.

    Args:
        root_orbits: a partition of {1, 2, 3, 4}; singleton blocks are rational roots

    Raises:
        InconsistentDescriptor: If the blocks do not partition {1, 2, 3, 4}
    """
    flat = sorted(i for block in root_orbits for i in block)
    if flat != [1, 2, 3, 4] or any(not block for block in root_orbits):
        raise InconsistentDescriptor(f"{list(root_orbits)} is not a partition of {{1, 2, 3, 4}}")
    sizes = sorted(len(block) for block in root_orbits)
    rational = sizes.count(1)
    if sizes == [4]:
        return Type2Model.RHO_ONE
    if sizes == [2, 2]:
        return Type2Model.MINIMAL_CONIC_BUNDLE
    if rational == 1:
        return Type2Model.MINIMAL_CUBIC
    if rational == 2:
        return Type2Model.MINIMAL_DP4_RHO_ONE
    return Type2Model.MINIMAL_DP4_CONIC_BUNDLE


# --- Gamma classification for the type 4 group ------------------------------------


def type4_element() -> LatticeIsometry:
    """ab = (123)(456), the order 3 element of type 4"""
    return named("a") * named("b")


def type4_group() -> SubgroupClosure:
    return closure([type4_element()])


def gamma_tag_groups() -> dict[str, SubgroupClosure]:
    """The three Galois images for which X is rational although minimal with G"""
    r, s, c, gamma = named("r"), named("s"), named("c"), geiser()
    return {
        "<r,csg>": closure([r, c * s * gamma]),
        "<r,cg>": closure([r, c * gamma]),
        "<r,cg,s>": closure([r, c * gamma, s]),
    }


def gamma_classification_for_type4(
    candidate: SubgroupClosure, options: SearchOptions | None = None
) -> bool:
    """True iff <ab> and the candidate Galois image have invariant rank 1 and X is rational.

    Raises:
        PreconditionFailed: If the candidate does not centralize ab
    """
    ab = type4_element()
    for h in candidate.generators:
        if h * ab != ab * h:
            raise PreconditionFailed("Galois image must lie in the centralizer of ab")
    combined = closure([ab, *candidate.generators])
    if invariant_rank(combined) != 1:
        return False
    return minimal_model_search(candidate, options).k2 >= 5


def enumerate_subgroups(group: SubgroupClosure) -> list[SubgroupClosure]:
    """All subgroups of a solvable group, by extending normal subgroups cyclically.

    Every subgroup H of a solvable group has a normal subgroup of prime index, so H is
    reached from a smaller subgroup N by adjoining one element z normalizing N with
    z^p in N.
    """
    elements = group.sorted_keys()
    inverses = {x: invert_perm(x) for x in elements}
    trivial = frozenset({IDENTITY_PERM})
    found: dict[frozenset[bytes], tuple[bytes, ...]] = {trivial: ()}
    layer = [trivial]
    while layer:
        grown: list[frozenset[bytes]] = []
        for base in layer:
            gens = found[base]
            for z in elements:
                if z in base:
                    continue
                z_inv = inverses[z]
                if any(compose_perms(compose_perms(z, k), z_inv) not in base for k in gens):
                    continue
                power, index = z, 1
                while power not in base:
                    power = compose_perms(z, power)
                    index += 1
                if not sympy.isprime(index):
                    continue
                members: set[bytes] = set()
                coset_rep = IDENTITY_PERM
                for _ in range(index):
                    members |= {compose_perms(coset_rep, k) for k in base}
                    coset_rep = compose_perms(z, coset_rep)
                extended = frozenset(members)
                if extended not in found:
                    found[extended] = gens + (z,)
                    grown.append(extended)
        logger.debug("Subgroup layer: %d new subgroups", len(grown))
        layer = grown
    return [
        SubgroupClosure(tuple(LatticeIsometry.from_perm(g) for g in gens), keys)
        for keys, gens in sorted(found.items(), key=lambda item: (len(item[0]), sorted(item[0])))
    ]


def _conjugate_keys(keys: frozenset[bytes], w: bytes) -> frozenset[bytes]:
    w_inv = invert_perm(w)
    return frozenset(compose_perms(compose_perms(w, k), w_inv) for k in keys)


@frozen
class GammaScanResult:
    centralizer_order: int
    normalizer_order: int
    subgroups_scanned: int
    rank_one_count: int
    survivors: tuple[SubgroupClosure, ...]
    classes: tuple[tuple[SubgroupClosure, ...], ...]

    def class_of(self, group: SubgroupClosure) -> int | None:
        for index, members in enumerate(self.classes):
            if any(member.keys == group.keys for member in members):
                return index
        return None


def scan_type4_gamma(
    ambient: SubgroupClosure, options: SearchOptions | None = None
) -> GammaScanResult:
    """Scans every subgroup of C(<ab>) for the two Gamma conditions.

    Survivors are grouped into classes under conjugation by the normalizer of <ab>.
    """
    g = type4_group()
    cent = centralizer(g, ambient)
    norm = normalizer(g, ambient)
    subgroups = enumerate_subgroups(cent)
    traces = {key: LatticeIsometry.from_perm(key).trace for key in cent.keys}
    g_keys = list(g.keys)

    rank_one: list[SubgroupClosure] = []
    for h in subgroups:
        combined = {compose_perms(x, t) for x in h.keys for t in g_keys}
        # dimension of the fixed space is the average trace
        total = sum(traces[x] for x in combined)
        if total == len(combined):
            rank_one.append(h)
    survivors = [h for h in rank_one if minimal_model_search(h, options).k2 >= 5]
    logger.debug(
        "Gamma scan: %d subgroups, %d of rank one, %d rational",
        len(subgroups),
        len(rank_one),
        len(survivors),
    )

    normalizer_keys = norm.sorted_keys()
    classes: list[tuple[SubgroupClosure, ...]] = []
    assigned: set[frozenset[bytes]] = set()
    for h in survivors:
        if h.keys in assigned:
            continue
        orbit = {_conjugate_keys(h.keys, w) for w in normalizer_keys}
        members = tuple(s for s in survivors if s.keys in orbit)
        assigned |= {m.keys for m in members}
        classes.append(members)
    return GammaScanResult(
        centralizer_order=cent.order,
        normalizer_order=norm.order,
        subgroups_scanned=len(subgroups),
        rank_one_count=len(rank_one),
        survivors=tuple(survivors),
        classes=tuple(classes),
    )
