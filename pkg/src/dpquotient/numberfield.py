"""Square classes and small Galois questions over multiquadratic fields.

Every field condition the rationality criteria ask about reduces to one of two
questions: is a rational number a square in k = Q(sqrt(d1), ..., sqrt(dn)), and
how does the Galois group of k act on the roots of a small rational polynomial.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Union

import sympy
from attrs import field, frozen
from sympy.polys.polyerrors import PolynomialError
from typing_extensions import Self

from .errors import ParseError, RepeatedRoots

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]

# `w` stands for a primitive cube root of unity: Q(w) = Q(sqrt(-3))
OMEGA_ALIAS = "w"
OMEGA_CLASS = -3

_X = sympy.Symbol("x")


def as_fraction(r: RationalLike) -> Fraction:
    if isinstance(r, Fraction):
        return r
    try:
        return Fraction(r)
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"Cannot read '{r}' as an exact rational number") from e


def squarefree_part(r: RationalLike) -> int:
    """Returns the signed squarefree integer s such that r / s is a rational square.

    Args:
        r: a nonzero rational

    Returns:
        The squarefree representative of the square class of r

    Raises:
        ValueError: If r is zero
    """
    q = as_fraction(r)
    if q == 0:
        raise ValueError("The square class of 0 is undefined")
    # p/q and p*q differ by the square q^2
    n = q.numerator * q.denominator
    part = -1 if n < 0 else 1
    for prime, exponent in sympy.factorint(abs(n)).items():
        if exponent % 2:
            part *= int(prime)
    return part


def _span(generators: tuple[int, ...]) -> frozenset[int]:
    classes = {1}
    for d in generators:
        classes |= {squarefree_part(d * c) for c in classes}
    return frozenset(classes)


@frozen
class SquareClassField:
    """The multiquadratic field Q(sqrt(d1), ..., sqrt(dn)).

    `adjoined` is reduced: every entry is a squarefree integer other than 1 and no
    product of a sub-list is a square. Use `of` or `parse` to build a field from
    arbitrary rationals; the constructor itself only validates.
    """

    adjoined: tuple[int, ...] = field(converter=tuple)

    def __attrs_post_init__(self) -> None:
        seen = {1}
        for d in self.adjoined:
            if squarefree_part(d) != d:
                raise ValueError(f"Adjoined class {d} is not a squarefree integer")
            if d in seen:
                raise ValueError(
                    f"Adjoined classes {self.adjoined} are not multiplicatively independent "
                    f"modulo squares; build the field with SquareClassField.of(...)"
                )
            seen |= {squarefree_part(d * c) for c in seen}

    @classmethod
    def rationals(cls) -> Self:
        return cls(())

    @classmethod
    def of(cls, *values: RationalLike) -> Self:
        """Builds the field generated by the square roots of the given rationals"""
        reduced: list[int] = []
        span = frozenset({1})
        for value in values:
            d = squarefree_part(value)
            if d in span:
                continue
            reduced.append(d)
            span = _span(tuple(reduced))
        return cls(tuple(reduced))

    @classmethod
    def parse(cls, text: str) -> Self:
        """Parses a descriptor such as `"w,-13"`; `w` is an alias for -3"""
        values: list[RationalLike] = []
        for token in (t.strip() for t in text.split(",")):
            if not token:
                continue
            values.append(OMEGA_CLASS if token == OMEGA_ALIAS else token)
        return cls.of(*values)

    def classes(self) -> frozenset[int]:
        """All square classes of Q that become squares in this field"""
        return _span(self.adjoined)

    def extend(self, *values: RationalLike) -> "SquareClassField":
        return SquareClassField.of(*self.adjoined, *values)

    @property
    def degree(self) -> int:
        return 2 ** len(self.adjoined)

    def contains_omega(self) -> bool:
        return is_square_in(OMEGA_CLASS, self)

    def __str__(self) -> str:
        if not self.adjoined:
            return "Q"
        return "Q(" + ",".join(f"sqrt({d})" for d in self.adjoined) + ")"


def is_square_in(r: RationalLike, k: SquareClassField) -> bool:
    """Checks whether the rational r is a square in k.

    Raises:
        ValueError: If r is zero
    """
    return squarefree_part(r) in k.classes()


def _coefficient_converter(values: tuple[RationalLike, ...]) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


@frozen
class RationalPoly:
    """A univariate polynomial of degree 1..4 with exact rational coefficients.

    `coeffs` are ordered from the leading coefficient down to the constant term.
    """

    coeffs: tuple[Fraction, ...] = field(converter=_coefficient_converter)

    @coeffs.validator
    def _check(self, _attribute: object, value: tuple[Fraction, ...]) -> None:
        if not 2 <= len(value) <= 5:
            raise ValueError(f"Only degrees 1 through 4 are supported, got {len(value) - 1}")
        if value[0] == 0:
            raise ValueError(f"Leading coefficient of {value} must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: RationalLike) -> Fraction:
        value = Fraction(0)
        for c in self.coeffs:
            value = value * as_fraction(x) + c
        return value

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly(
            [sympy.Rational(c.numerator, c.denominator) for c in self.coeffs], _X, domain="QQ"
        )

    def discriminant(self) -> Fraction:
        disc = sympy.Rational(self.to_sympy().discriminant())
        return Fraction(int(disc.p), int(disc.q))

    def irreducible_factor_degrees(self) -> list[int]:
        _, factors = self.to_sympy().factor_list()
        degrees: list[int] = []
        for factor, multiplicity in factors:
            degrees.extend([factor.degree()] * multiplicity)
        return sorted(degrees)

    def has_rational_root(self) -> bool:
        return 1 in self.irreducible_factor_degrees()

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


@frozen
class CubicAnalysis:
    has_root_in_k: bool
    discriminant_class: int
    galois_order_even_over_k: bool


class Transitivity(str, Enum):
    TRANSITIVE = "Transitive"
    NOT_TRANSITIVE = "NotTransitive"
    INCONCLUSIVE = "Inconclusive"


def _require_separable(p: RationalPoly) -> Fraction:
    disc = p.discriminant()
    if disc == 0:
        raise RepeatedRoots(f"Polynomial {p} has repeated roots (discriminant 0)")
    return disc


def cubic_analysis(p: RationalPoly, k: SquareClassField) -> CubicAnalysis:
    """Root, discriminant and Galois-parity data of a separable rational cubic over k.

    A cubic over Q has a root in a multiquadratic field exactly when it has a rational
    root, since an irreducible cubic stays irreducible over any extension of 2-power
    degree.

    Raises:
        ValueError: If p is not a cubic
        RepeatedRoots: If p is not separable
    """
    if p.degree != 3:
        raise ValueError(f"cubic_analysis expects a degree 3 polynomial, got degree {p.degree}")
    disc = _require_separable(p)
    return CubicAnalysis(
        has_root_in_k=p.has_rational_root(),
        discriminant_class=squarefree_part(disc),
        galois_order_even_over_k=not is_square_in(disc, k),
    )


def quartic_transitive_over(p: RationalPoly, k: SquareClassField) -> Transitivity:
    """Decides whether Gal(k-bar/k) permutes the four roots of p transitively.

    The roots are transitive exactly when p is irreducible over k. A quartic that is
    irreducible over Q and factors over k already factors over one quadratic subfield
    Q(sqrt(d)) of k, so irreducibility over k is checked with one exact factorisation
    per nontrivial square class of k. Factorisation failures are reported as
    `Inconclusive`.

    Raises:
        ValueError: If p is not a quartic
        RepeatedRoots: If p is not separable
    """
    if p.degree != 4:
        raise ValueError(f"quartic_transitive_over expects a quartic, got degree {p.degree}")
    _require_separable(p)
    try:
        if p.irreducible_factor_degrees() != [4]:
            return Transitivity.NOT_TRANSITIVE
        expr = p.to_sympy().as_expr()
        for d in sorted(k.classes() - {1}):
            _, factors = sympy.factor_list(expr, _X, extension=sympy.sqrt(d))
            if any(0 < sympy.degree(f, _X) < 4 for f, _ in factors):
                logger.debug("%s factors over Q(sqrt(%d))", p, d)
                return Transitivity.NOT_TRANSITIVE
    except (PolynomialError, NotImplementedError) as e:
        logger.info("Could not factor %s over %s: %s", p, k, e)
        return Transitivity.INCONCLUSIVE
    return Transitivity.TRANSITIVE
