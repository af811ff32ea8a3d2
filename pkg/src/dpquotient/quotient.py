"""K^2 bookkeeping for quotients of a degree 2 del Pezzo surface.

A ledger starts from K_X^2 = 2, applies the Hurwitz formula for the quotient map,
corrects for the cyclic quotient singularities of X/G on the minimal resolution, and
finally contracts (-1)-curves. Every value is an exact `Fraction`.
"""

import logging
from collections.abc import Sequence
from enum import Enum
from fractions import Fraction
from functools import cache
from typing import Any, Union

from attrs import field, frozen

from .errors import UnknownScenario, UnsupportedRegime

logger = logging.getLogger(__name__)

DP2_K2 = Fraction(2)


def rational_text(value: Fraction | int) -> str:
    """Renders a rational as `p/q`, including the denominator 1"""
    v = Fraction(value)
    return f"{v.numerator}/{v.denominator}"


def hirzebruch_jung(m: int, q: int) -> tuple[int, ...]:
    """Continued fraction m/q = b1 - 1/(b2 - 1/(...)), the resolution chain of 1/m(1,q).

    The exceptional curves of the minimal resolution have self-intersections -b_i.
    """
    if m < 2 or not 0 < q < m:
        raise ValueError(f"1/{m}(1,{q}) is not a cyclic quotient singularity")
    if Fraction(m, q).denominator != q:
        raise ValueError(f"1/{m}(1,{q}) requires gcd(m, q) = 1")
    chain: list[int] = []
    num, den = m, q
    while den:
        b = -(-num // den)
        chain.append(b)
        num, den = den, b * den - num
    return tuple(chain)


class CurveRole(str, Enum):
    """Which branch of the singularity a curve passes through"""

    C = "C"
    D = "D"


@frozen
class SingularityType:
    """A row of the singularity catalog: 1/m(1,q) and its numerical corrections"""

    m: int
    q: int
    delta_k2: Fraction
    delta_c2: Fraction
    delta_d2: Fraction
    chain: tuple[int, ...]

    @property
    def label(self) -> str:
        if self.q == self.m - 1:
            return f"A{self.m - 1}"
        return f"1/{self.m}(1,{self.q})"

    def correction(self, role: CurveRole) -> Fraction:
        return self.delta_c2 if role is CurveRole.C else self.delta_d2


@cache
def singularity(m: int, q: int) -> SingularityType:
    """Looks up 1/m(1,q) in the catalog.

    The catalog holds the Du Val points A_{m-1} = 1/m(1,m-1) and the two non Du Val
    points 1/3(1,1) and 1/7(1,3).

    Raises:
        UnsupportedRegime: If the singularity is outside the catalog
    """
    chain = tuple(-b for b in hirzebruch_jung(m, q))
    if q == m - 1:
        d = Fraction(-(m - 1), m)
        return SingularityType(m, q, Fraction(0), d, d, chain)
    if (m, q) == (3, 1):
        return SingularityType(3, 1, Fraction(-1, 3), Fraction(-1, 3), Fraction(-1, 3), chain)
    if (m, q) == (7, 3):
        return SingularityType(7, 3, Fraction(-3, 7), Fraction(-3, 7), Fraction(-5, 7), chain)
    raise UnsupportedRegime(
        f"1/{m}(1,{q}) is outside the singularity catalog (A_n, 1/3(1,1), 1/7(1,3))"
    )


def du_val(n: int) -> SingularityType:
    return singularity(n + 1, n)


@frozen
class RamificationCurve:
    """A curve pointwise fixed by a cyclic subgroup of order `inertia`.

    Its class is `anticanonical_multiple * (-K)`.
    """

    anticanonical_multiple: int
    inertia: int = field()

    @inertia.validator
    def _check_inertia(self, _attribute: object, value: int) -> None:
        if value < 2:
            raise ValueError(f"Inertia order of a ramification curve must be >= 2, got {value}")


def hurwitz_k2(group_order: int, kx2: Fraction | int, ram: Sequence[RamificationCurve]) -> Fraction:
    """K^2 of X/G from the Hurwitz formula K_X = f^*(K_{X/G}) + R.

    Args:
        group_order: |G|
        kx2: K_X^2
        ram: the ramification curves, R = sum of (e - 1) C

    Returns:
        (K_X - R)^2 / |G|

    Raises:
        ValueError: If |G| < 1, a curve class is not a positive multiple of -K, or an
            inertia order does not divide |G|
    """
    if group_order < 1:
        raise ValueError(f"Group order must be positive, got {group_order}")
    scale = 1
    for curve in ram:
        if not isinstance(curve.anticanonical_multiple, int) or curve.anticanonical_multiple < 1:
            raise ValueError(
                f"Ramification curve class must be a positive integral multiple of -K, "
                f"got {curve.anticanonical_multiple}"
            )
        if group_order % curve.inertia:
            raise ValueError(
                f"Inertia order {curve.inertia} does not divide the group order {group_order}"
            )
        scale += (curve.inertia - 1) * curve.anticanonical_multiple
    # K - R = K + sum (e-1) n K
    return Fraction(scale * scale) * Fraction(kx2) / group_order


def proper_transform_self_int(
    c2: Fraction | int, passes: Sequence[tuple[SingularityType, CurveRole]]
) -> Fraction:
    """Self-intersection on the resolution of a curve through catalog singularities"""
    return Fraction(c2) + sum((s.correction(role) for s, role in passes), Fraction(0))


@frozen
class HurwitzStep:
    ramification: tuple[RamificationCurve, ...] = ()

    def describe(self) -> dict[str, Any]:
        return {
            "step": "hurwitz",
            "ramification": [
                {"class": f"{c.anticanonical_multiple}(-K)", "inertia": c.inertia}
                for c in self.ramification
            ],
        }


@frozen
class ResolveStep:
    singularity: SingularityType
    count: int

    def describe(self) -> dict[str, Any]:
        return {
            "step": "resolve",
            "singularity": self.singularity.label,
            "count": self.count,
            "deltaK2": rational_text(self.singularity.delta_k2),
        }


@frozen
class ProperTransformStep:
    """Records the self-intersection of a proper transform; K^2 is unchanged"""

    image_self_intersection: Fraction
    passes: tuple[tuple[SingularityType, CurveRole], ...]

    @property
    def value(self) -> Fraction:
        return proper_transform_self_int(self.image_self_intersection, self.passes)

    def describe(self) -> dict[str, Any]:
        return {
            "step": "proper_transform",
            "imageSelfIntersection": rational_text(self.image_self_intersection),
            "passes": [f"{s.label}:{role.value}" for s, role in self.passes],
            "selfIntersection": rational_text(self.value),
        }


@frozen
class ContractStep:
    count: int

    def describe(self) -> dict[str, Any]:
        return {"step": "contract", "count": self.count}


LedgerStep = Union[HurwitzStep, ResolveStep, ProperTransformStep, ContractStep]


def _apply(step: LedgerStep, group_order: int, value: Fraction) -> Fraction:
    if isinstance(step, HurwitzStep):
        return hurwitz_k2(group_order, value, step.ramification)
    if isinstance(step, ResolveStep):
        return value + step.count * step.singularity.delta_k2
    if isinstance(step, ContractStep):
        return value + step.count
    return value


@frozen
class QuotientLedger:
    """An ordered K^2 computation with the value after every step"""

    group_order: int
    kx_squared: Fraction
    steps: tuple[LedgerStep, ...]
    values: tuple[Fraction, ...]

    @property
    def result(self) -> Fraction:
        return self.values[-1] if self.values else self.kx_squared

    def replay(self) -> tuple[Fraction, ...]:
        return run_ledger(self.group_order, self.steps, self.kx_squared).values

    def to_json_obj(self) -> list[dict[str, Any]]:
        return [
            {**step.describe(), "k2": rational_text(value)}
            for step, value in zip(self.steps, self.values)
        ]


def run_ledger(
    group_order: int, steps: Sequence[LedgerStep], kx2: Fraction = DP2_K2
) -> QuotientLedger:
    values: list[Fraction] = []
    value = Fraction(kx2)
    for step in steps:
        value = _apply(step, group_order, value)
        values.append(value)
    return QuotientLedger(group_order, Fraction(kx2), tuple(steps), tuple(values))


class ScenarioName(str, Enum):
    TYPE0 = "Type0"
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    TYPE4 = "Type4"
    V4 = "V4"
    TYPE5 = "Type5"
    PSL2F7 = "PSL2F7"

    @classmethod
    def parse(cls, text: str) -> "ScenarioName":
        for member in cls:
            if member.value.lower() == text.strip().lower():
                return member
        known = ", ".join(m.value for m in cls)
        raise UnknownScenario(f"Unknown scenario '{text}'. Known scenarios: {known}")


def _anticanonical(count: int, inertia: int) -> tuple[RamificationCurve, ...]:
    return tuple(RamificationCurve(1, inertia) for _ in range(count))


def _scenario_steps(name: ScenarioName) -> tuple[int, list[LedgerStep]]:
    a1 = du_val(1)
    a2 = du_val(2)
    if name is ScenarioName.TYPE0:
        # the Geiser involution fixes the branch curve, of class -2K
        return 2, [HurwitzStep((RamificationCurve(2, 2),))]
    if name is ScenarioName.TYPE1:
        return 2, [HurwitzStep(_anticanonical(1, 2)), ResolveStep(a1, 2)]
    if name is ScenarioName.TYPE2:
        return 2, [
            HurwitzStep(),
            ResolveStep(a1, 4),
            # C^2 = 2 on X, so f(C)^2 = 1 before the four A1 corrections
            ProperTransformStep(Fraction(1), tuple((a1, CurveRole.C) for _ in range(4))),
            ContractStep(1),
        ]
    if name is ScenarioName.TYPE3:
        return 3, [HurwitzStep(_anticanonical(1, 3)), ResolveStep(a2, 1)]
    if name is ScenarioName.TYPE4:
        return 3, [
            HurwitzStep(),
            ResolveStep(a2, 2),
            ResolveStep(singularity(3, 1), 2),
            ContractStep(4),
        ]
    if name is ScenarioName.V4:
        return 4, [HurwitzStep(_anticanonical(3, 2))]
    if name is ScenarioName.TYPE5:
        return 7, [HurwitzStep(), ResolveStep(singularity(7, 3), 3), ContractStep(9)]
    # 21 reflection curves of class -K give K - R = 22K
    return 168, [
        HurwitzStep(_anticanonical(21, 2)),
        ResolveStep(singularity(3, 1), 1),
        ResolveStep(singularity(7, 3), 1),
    ]


def run_scenario(name: ScenarioName | str) -> QuotientLedger:
    """Builds and evaluates the ledger of a named quotient scenario.

    Raises:
        UnknownScenario: If the name is not a known scenario
    """
    scenario = name if isinstance(name, ScenarioName) else ScenarioName.parse(name)
    group_order, steps = _scenario_steps(scenario)
    ledger = run_ledger(group_order, steps)
    logger.debug("Scenario %s ends at K^2 = %s", scenario.value, ledger.result)
    return ledger
