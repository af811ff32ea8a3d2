"""Quotients of an Iskovskikh surface.

An Iskovskikh surface is a conic bundle over P^1 with four singular fibres and two
(-2)-sections. A group G acting minimally on it is described by three pieces: the
cyclic subgroup G0 acting trivially on all (-1)-curves, the subgroup GB of order at
most 2 acting trivially on the base, and the image F of G acting on the base. The
quotient is analysed one piece at a time; once a stage reaches K^2 >= 5 every later
quotient keeps K^2 >= 5.
"""

import logging
from collections.abc import Sequence
from enum import Enum

from attrs import field, frozen

from .errors import InconsistentDescriptor, ParseError

logger = logging.getLogger(__name__)

ISKOVSKIKH_K2 = 4


class BaseGroupKind(str, Enum):
    TRIVIAL = "trivial"
    C2 = "C2"
    C2XC2 = "C2xC2"
    OTHER = "other"


@frozen
class BaseGroup:
    """The group F acting faithfully on the base of the conic bundle"""

    kind: BaseGroupKind
    order: int
    name: str = ""

    @classmethod
    def trivial(cls) -> "BaseGroup":
        return cls(BaseGroupKind.TRIVIAL, 1)

    @classmethod
    def c2(cls) -> "BaseGroup":
        return cls(BaseGroupKind.C2, 2)

    @classmethod
    def c2xc2(cls) -> "BaseGroup":
        return cls(BaseGroupKind.C2XC2, 4)

    @classmethod
    def other(cls, name: str, order: int) -> "BaseGroup":
        if order < 2:
            raise InconsistentDescriptor(f"Base group {name} must have order >= 2, got {order}")
        return cls(BaseGroupKind.OTHER, order, name)

    @classmethod
    def parse(cls, text: str) -> "BaseGroup":
        """Reads `trivial`, `c2`, `c2xc2` or `<name>:<order>` (e.g. `s3:6`)"""
        token = text.strip().lower()
        if token in ("trivial", "1"):
            return cls.trivial()
        if token == "c2":
            return cls.c2()
        if token in ("c2xc2", "c2^2", "v4"):
            return cls.c2xc2()
        name, _, order = token.partition(":")
        known = {"c3": 3, "c4": 4, "s3": 6, "c6": 6, "d8": 8, "c8": 8}
        if order.isdigit():
            return cls.other(name.upper(), int(order))
        if name in known:
            return cls.other(name.upper(), known[name])
        raise ParseError(f"Cannot parse base group '{text}'; use trivial, c2, c2xc2 or name:order")


@frozen
class FixData:
    """Fixed-point behaviour of one nontrivial element of F on its invariant fibres.

    Attributes:
        isolated_only: the element has only isolated fixed points
        fused: every pair of fixed points in an invariant fibre lies in one orbit of
            G x Gal
    """

    isolated_only: bool
    fused: bool


@frozen
class IskAction:
    g0_order: int = field()
    gb_nontrivial: bool
    base: BaseGroup
    fiber_fix: tuple[FixData, ...] = field(converter=tuple)

    @g0_order.validator
    def _check_g0(self, _attribute: object, value: int) -> None:
        if value < 1:
            raise InconsistentDescriptor(f"|G0| must be at least 1, got {value}")

    def __attrs_post_init__(self) -> None:
        if len(self.fiber_fix) != self.base.order - 1:
            raise InconsistentDescriptor(
                f"Fixed-point data is required for each of the {self.base.order - 1} nontrivial "
                f"elements of the base group {self.base.kind.value}, got {len(self.fiber_fix)}"
            )

    @property
    def group_order(self) -> int:
        return self.g0_order * (2 if self.gb_nontrivial else 1) * self.base.order


class ModelKind(str, Enum):
    K2_8 = "K2_8"
    ISKOVSKIKH_AGAIN = "IskovskikhAgain"
    MINIMAL_CONIC_BUNDLE_K4 = "MinimalConicBundleK4"
    K2_AT_LEAST_5 = "K2_atLeast5"


_BOUNDS = {
    ModelKind.K2_8: 8,
    ModelKind.ISKOVSKIKH_AGAIN: ISKOVSKIKH_K2,
    ModelKind.MINIMAL_CONIC_BUNDLE_K4: 4,
    ModelKind.K2_AT_LEAST_5: 5,
}


@frozen
class IskVerdict:
    """Birational model of the quotient.

    `passthrough` marks a stage that did nothing (trivial subgroup).
    """

    model_kind: ModelKind
    k2_bound: int
    rule: str
    passthrough: bool = False

    def __attrs_post_init__(self) -> None:
        expected = _BOUNDS[self.model_kind]
        consistent = (
            self.k2_bound >= expected
            if self.model_kind is ModelKind.K2_AT_LEAST_5
            else self.k2_bound == expected
        )
        if not consistent:
            raise InconsistentDescriptor(
                f"Verdict {self.model_kind.value} cannot carry K^2 bound {self.k2_bound}"
            )


def _verdict(kind: ModelKind, rule: str) -> IskVerdict:
    return IskVerdict(kind, _BOUNDS[kind], rule)


def _passthrough(rule: str) -> IskVerdict:
    return IskVerdict(ModelKind.ISKOVSKIKH_AGAIN, ISKOVSKIKH_K2, rule, passthrough=True)


def quotient_by_g0(d: int) -> IskVerdict:
    """Quotient by the cyclic group G0 of order d"""
    if d < 1:
        raise InconsistentDescriptor(f"|G0| must be at least 1, got {d}")
    if d == 1:
        return _passthrough("g0-trivial")
    if d % 2 == 0:
        return _verdict(ModelKind.K2_8, "g0-even-order")
    return _verdict(ModelKind.ISKOVSKIKH_AGAIN, "g0-odd-order")


def quotient_by_gb(present: bool = True) -> IskVerdict:
    """Quotient by the involution acting trivially on the base; the result is smooth"""
    if not present:
        return _passthrough("gb-trivial")
    return _verdict(ModelKind.K2_8, "gb-smooth-quotient")


def base_quotient(f: BaseGroup, fix: Sequence[FixData]) -> IskVerdict:
    """Quotient by the group acting faithfully on the base.

    Raises:
        InconsistentDescriptor: If `fix` does not describe each nontrivial element of f
    """
    if len(fix) != f.order - 1:
        raise InconsistentDescriptor(
            f"Base group of order {f.order} needs {f.order - 1} fixed-point entries, got {len(fix)}"
        )
    if f.kind is BaseGroupKind.TRIVIAL:
        return _passthrough("base-trivial")
    if f.kind is BaseGroupKind.OTHER:
        return _verdict(ModelKind.K2_AT_LEAST_5, "base-group-not-c2-or-c2xc2")
    if all(entry.isolated_only and entry.fused for entry in fix):
        return _verdict(ModelKind.MINIMAL_CONIC_BUNDLE_K4, "base-fixed-pairs-fused")
    return _verdict(ModelKind.K2_AT_LEAST_5, "base-fixed-points-not-fused")


def _compose(current: IskVerdict, stage: IskVerdict) -> IskVerdict:
    if stage.passthrough:
        return current
    if current.model_kind in (ModelKind.K2_8, ModelKind.K2_AT_LEAST_5):
        # quotients of a surface with K^2 >= 5 stay birational to one
        return _verdict(ModelKind.K2_AT_LEAST_5, f"{current.rule}+{stage.rule}")
    return stage


def _is_power_of_two(n: int) -> bool:
    return n & (n - 1) == 0


def full_pipeline(action: IskAction) -> IskVerdict:
    """Runs the G0, GB and base stages in order.

    A 2-group with an element fixing a fibre curve is settled before the stages run.
    """
    has_fixed_curve = any(not entry.isolated_only for entry in action.fiber_fix)
    if has_fixed_curve and _is_power_of_two(action.group_order):
        verdict = _verdict(ModelKind.K2_AT_LEAST_5, "two-group-with-fixed-curve")
        logger.debug("Iskovskikh action %s -> %s", action, verdict.model_kind.value)
        return verdict
    verdict = _passthrough("trivial-action")
    for stage in (
        quotient_by_g0(action.g0_order),
        quotient_by_gb(action.gb_nontrivial),
        base_quotient(action.base, action.fiber_fix),
    ):
        verdict = _compose(verdict, stage)
    logger.debug("Iskovskikh action %s -> %s", action, verdict.model_kind.value)
    return verdict
