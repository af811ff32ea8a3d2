"""The family (x^3 + y^3) z + A x^2 y^2 + 2B xyz^2 + C z^4 - t^2 = 0.

Every member carries the order 3 automorphism of type 4, so its Galois image Gamma
lies in the centralizer of ab. The image is read off from three auxiliary
polynomials and from the square classes of A, D2 = 16A^3 C - 27 and D1 = AC * D2.
"""

import logging
from enum import Enum
from fractions import Fraction
from itertools import product

import sympy
from attrs import field, frozen

from .classify import Rationality, gamma_tag_groups
from .errors import PreconditionFailed, RepeatedRoots
from .numberfield import (
    RationalLike,
    RationalPoly,
    SquareClassField,
    Transitivity,
    as_fraction,
    cubic_analysis,
    is_square_in,
    quartic_transitive_over,
)
from .weyl import SubgroupClosure

logger = logging.getLogger(__name__)

ECKARDT_POINTS = 6


@frozen
class CubicFamilyParams:
    """Coefficients A, B, C over a multiquadratic field k containing w"""

    a: Fraction = field(converter=as_fraction)
    b: Fraction = field(converter=as_fraction)
    c: Fraction = field(converter=as_fraction)
    k: SquareClassField = field(factory=lambda: SquareClassField.parse("w"))

    def __attrs_post_init__(self) -> None:
        if not self.k.contains_omega():
            raise PreconditionFailed(
                f"The field {self.k} must contain a primitive cube root of unity (adjoin 'w')"
            )

    @classmethod
    def of(
        cls, a: RationalLike, b: RationalLike, c: RationalLike, field_text: str = "w"
    ) -> "CubicFamilyParams":
        return cls(as_fraction(a), as_fraction(b), as_fraction(c), SquareClassField.parse(field_text))

    def _require_c(self) -> None:
        if self.c == 0:
            raise PreconditionFailed("Quotient criteria need C != 0")


def _poly(*coeffs: Fraction) -> RationalPoly:
    """Strips leading zero coefficients of degenerate members"""
    trimmed = list(coeffs)
    while len(trimmed) > 1 and trimmed[0] == 0:
        trimmed.pop(0)
    return RationalPoly(tuple(trimmed))


@frozen
class AuxPolynomials:
    eckardt_cubic: RationalPoly
    conic_inv_cubic: RationalPoly
    s3_quartic: RationalPoly


def aux_polynomials(params: CubicFamilyParams) -> AuxPolynomials:
    a, b, c = params.a, params.b, params.c
    return AuxPolynomials(
        eckardt_cubic=_poly(4 * (b * b - a * c), -12 * b, Fraction(9), -4 * a),
        conic_inv_cubic=_poly(4 * c, -4 * (b * b - a * c), -4 * b, Fraction(-1)),
        # C z^4 + 2B z^2 + 2z + A, the fixed points of the involutions of S3 with x = 1
        s3_quartic=_poly(c, Fraction(0), 2 * b, Fraction(2), a),
    )


def d2(params: CubicFamilyParams) -> Fraction:
    return 16 * params.a**3 * params.c - 27


def d1(params: CubicFamilyParams) -> Fraction:
    return params.a * params.c * d2(params)


def c3_quotient_rational(params: CubicFamilyParams) -> bool:
    """X/C3 is rational iff C is a square in k"""
    params._require_c()
    return is_square_in(params.c, params.k)


def s3_quotient_verdict(params: CubicFamilyParams) -> Rationality:
    """Rationality of X/S3.

    Rational when C is a square. Otherwise non-rational when Galois permutes the four
    roots of the S3 fixed-point quartic transitively, and undetermined when it does not.
    """
    params._require_c()
    if is_square_in(params.c, params.k):
        return Rationality.RATIONAL
    try:
        transitivity = quartic_transitive_over(aux_polynomials(params).s3_quartic, params.k)
    except RepeatedRoots:
        logger.info("S3 fixed-point quartic of %s has repeated roots", params)
        return Rationality.UNDETERMINED
    if transitivity is Transitivity.TRANSITIVE:
        return Rationality.NON_RATIONAL
    logger.info("S3 quotient undetermined: fixed-point quartic is %s", transitivity.value)
    return Rationality.UNDETERMINED


@frozen
class Discrimination:
    eckardt_even: bool
    conic_inv_even: bool


def discrimination(params: CubicFamilyParams) -> Discrimination:
    """Parity of the Galois groups of the Eckardt cubic and the conic cubic over k.

    Raises:
        PreconditionFailed: If B != 0
    """
    if params.b != 0:
        raise PreconditionFailed("The discrimination criterion applies to B = 0 only")
    first = d1(params) == 0 or not is_square_in(d1(params), params.k)
    second = d2(params) == 0 or not is_square_in(d2(params), params.k)
    aux = aux_polynomials(params)
    for poly, expected in ((aux.eckardt_cubic, first), (aux.conic_inv_cubic, second)):
        if poly.degree != 3:
            continue
        try:
            parity = cubic_analysis(poly, params.k).galois_order_even_over_k
        except RepeatedRoots:
            continue
        if parity != expected:
            raise PreconditionFailed(
                f"Discriminant of {poly} disagrees with its square-class formula over {params.k}"
            )
    return Discrimination(eckardt_even=first, conic_inv_even=second)


class GammaTag(str, Enum):
    CONTAINS_GEISER_ONLY = "containsGeiserOnly"
    CONTAINS_S_GEISER_CLASS = "containsSGeiserClass"
    R_CSG = "<r,csg>"
    R_CG = "<r,cg>"
    R_CG_S = "<r,cg,s>"
    OTHER = "other"


_RATIONAL_TAGS = (GammaTag.R_CSG, GammaTag.R_CG, GammaTag.R_CG_S)

# characters (chi_A, chi_D2, chi_D1) of a Galois element -> its image in <s, c, Geiser>
_CHARACTER_IMAGES: dict[tuple[int, int, int], str] = {
    (0, 0, 0): "1",
    (1, 0, 0): "g",
    (0, 1, 0): "s",
    (0, 0, 1): "cs",
    (1, 1, 0): "sg",
    (1, 0, 1): "csg",
    (0, 1, 1): "c",
    (1, 1, 1): "cg",
}


def two_part(params: CubicFamilyParams) -> frozenset[str]:
    """Images in <s, c, Geiser> of the Galois group of k(sqrt A, sqrt D2, sqrt D1) / k.

    A character triple is achievable exactly when it is orthogonal to every relation,
    a relation being a product of the three numbers that is already a square in k.
    """
    values = (params.a, d2(params), d1(params))
    if any(v == 0 for v in values):
        raise PreconditionFailed(f"A, D2 and D1 must be nonzero, got {values}")
    relations = []
    for exponents in product((0, 1), repeat=3):
        value = Fraction(1)
        for v, e in zip(values, exponents):
            value *= v**e
        if is_square_in(value, params.k):
            relations.append(exponents)
    achievable = [
        t
        for t in product((0, 1), repeat=3)
        if all(sum(x * y for x, y in zip(t, rel)) % 2 == 0 for rel in relations)
    ]
    return frozenset(_CHARACTER_IMAGES[t] for t in achievable)


def has_r(params: CubicFamilyParams) -> bool:
    """r lies in Gamma when the conic cubic has no root in k"""
    return not aux_polynomials(params).conic_inv_cubic.has_rational_root()


def eckardt_has_root(params: CubicFamilyParams) -> bool:
    """A root of the Eckardt cubic in k keeps a^2 b out of Gamma"""
    return aux_polynomials(params).eckardt_cubic.has_rational_root()


def gamma_identification(params: CubicFamilyParams) -> GammaTag:
    if params.b != 0:
        logger.info("Gamma is only identified for B = 0; got B = %s", params.b)
        return GammaTag.OTHER
    two = two_part(params)
    if "sg" in two:
        return GammaTag.CONTAINS_S_GEISER_CLASS
    if has_r(params) and eckardt_has_root(params):
        if two == {"1", "csg"}:
            return GammaTag.R_CSG
        if two == {"1", "cg"}:
            return GammaTag.R_CG
        if two == {"1", "cg", "s", "csg"}:
            return GammaTag.R_CG_S
    if two == {"1", "g"}:
        return GammaTag.CONTAINS_GEISER_ONLY
    return GammaTag.OTHER


def gamma_subgroup(tag: GammaTag) -> SubgroupClosure:
    """The lattice subgroup behind one of the three rational tags"""
    if tag not in _RATIONAL_TAGS:
        raise PreconditionFailed(f"Tag {tag.value} does not name a single subgroup")
    return gamma_tag_groups()[tag.value]


def x_rationality_cubic(params: CubicFamilyParams) -> Rationality:
    tag = gamma_identification(params)
    if tag in _RATIONAL_TAGS:
        return Rationality.RATIONAL
    if tag in (GammaTag.CONTAINS_S_GEISER_CLASS, GammaTag.CONTAINS_GEISER_ONLY):
        return Rationality.NON_RATIONAL
    return Rationality.UNDETERMINED


@frozen
class EckardtCertificate:
    count: int
    polynomial: str
    degree: int
    distinct_roots: int


def eckardt_points_count(params: CubicFamilyParams) -> EckardtCertificate:
    """Generalized Eckardt points (w^i : -w^2i : 0 : +-sqrt(A)) with their certificate.

    The certificate is k * (Eckardt cubic): each candidate point lies on four reducible
    sections z = k(x + y) exactly when it has four distinct roots.

    Raises:
        RepeatedRoots: If the quartic in k has fewer than four distinct roots, or A = 0
            merges the candidate points in pairs
    """
    k = sympy.Symbol("k")
    cubic = aux_polynomials(params).eckardt_cubic.to_sympy().as_expr().subs(sympy.Symbol("x"), k)
    poly = sympy.Poly(sympy.expand(k * cubic), k, domain="QQ")
    distinct = sympy.Poly(sympy.quo(poly, sympy.gcd(poly, poly.diff(k))), k).degree()
    candidates = 3 * (2 if params.a != 0 else 1)
    count = candidates if distinct == 4 else 0
    if count != ECKARDT_POINTS:
        raise RepeatedRoots(
            f"{poly.as_expr()} has {distinct} distinct roots over {candidates} candidate points; "
            f"expected {ECKARDT_POINTS} generalized Eckardt points"
        )
    return EckardtCertificate(
        count=count,
        polynomial=str(poly.as_expr()),
        degree=poly.degree(),
        distinct_roots=distinct,
    )


@frozen
class CubicPreset:
    name: str
    params: CubicFamilyParams
    description: str


def presets() -> dict[str, CubicPreset]:
    """Named members covering the four rationality combinations of X and X/S3"""
    return {
        "6.15": CubicPreset(
            "6.15", CubicFamilyParams.of(2, 0, "9/32", "w"), "X and X/G non-rational"
        ),
        "6.16": CubicPreset(
            "6.16", CubicFamilyParams.of("9/5", 0, "25/81", "w"), "X non-rational, X/G rational"
        ),
        "6.17": CubicPreset(
            "6.17", CubicFamilyParams.of(-1, 0, "-13/4", "w,-13"), "X and X/G rational"
        ),
        "6.18": CubicPreset(
            "6.18", CubicFamilyParams.of(2, 0, "1/8", "w,-22"), "X rational, X/C3 non-rational"
        ),
        # k = 1 is an Eckardt root and 9 - 4A = 25; the S3 quartic 25z^4 - 32z + 64 has an
        # irreducible resolvent cubic, so it stays transitive over every multiquadratic k
        "6.18b": CubicPreset(
            "6.18b",
            CubicFamilyParams.of(-4, 0, "-25/16", "w,-13"),
            "X rational, X/S3 non-rational",
        ),
    }


def preset(name: str) -> CubicPreset:
    try:
        return presets()[name]
    except KeyError as e:
        raise PreconditionFailed(
            f"Unknown cubic family preset '{name}'. Known presets: {', '.join(presets())}"
        ) from e


def report(params: CubicFamilyParams) -> dict[str, object]:
    """The CLI summary: Gamma tag, rationality of X, and the C3 and S3 quotients"""
    return {
        "gamma": gamma_identification(params).value,
        "xRational": x_rationality_cubic(params).value,
        "c3Quotient": "Rational" if c3_quotient_rational(params) else "NonRational",
        "s3Quotient": s3_quotient_verdict(params).value,
    }
