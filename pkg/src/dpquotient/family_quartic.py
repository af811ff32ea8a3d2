"""The family A x^4 + 2B x^2 y^2 + A y^4 + C z^4 - t^2 = 0 and its order 32 group.

The parameters satisfy A = w^2 eta = u^2 sigma + v^2 tau, B = u^2 sigma - v^2 tau and
C = q^2 sigma tau eta, with q one of uvw, uvw*sigma*tau*eta or uvw*sigma*tau. Over the
algebraic closure the configuration of the 56 lines does not depend on the values, so
the lines are written down from their equations at fixed numerical stand-ins. Which
Galois elements occur depends only on the square classes of sigma, tau and eta in k;
a preset records those classes symbolically and each class becomes a sign flip of
the matching square root.

Numerics only decide which line a computed line is. Intersection numbers, the
identification with the lattice catalog and every induced permutation are checked
with exact lattice arithmetic before they are used.
"""

import logging
import math
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from enum import Enum
from functools import cache
from itertools import product
from typing import TYPE_CHECKING

import numpy as np
import sympy
from attrs import field, frozen
from numpy.typing import NDArray

from .classify import (
    AbstractType,
    ElementLabel,
    GroupDescriptor,
    Rationality,
    VerdictKind,
    proposition_dp2,
    type2_nonrationality_certificate,
)
from .config import NumericOptions, SearchOptions
from .errors import (
    CertificateMismatch,
    DisjointnessViolation,
    Impossible,
    LatticeError,
    ParseError,
    PreconditionFailed,
    UnsupportedRegime,
)
from .piclattice import (
    LINE_COUNT,
    ContractedModel,
    DivisorClass,
    K,
    contract,
    enumerate_lines,
    index_of_class,
    intersection_matrix,
)
from .weyl import (
    LatticeIsometry,
    SubgroupClosure,
    closure,
    geiser,
    index_orbits,
    invariant_rank,
    minimal_model_search,
)

if TYPE_CHECKING:
    from .store import CertificateStore

logger = logging.getLogger(__name__)

FAMILIES = ("theta", "eta", "sigma", "tau")
FAMILY_SIZES = {"theta": 8, "eta": 16, "sigma": 16, "tau": 16}

# numerical stand-ins: A = 23 = 1*3 + 4*5, B = -17
_U, _V, _W = 1, 2, 1
_VALUES = {"s": 3, "t": 5, "e": 23}
_SLOT = {"s": 0, "t": 1, "e": 2}
_A = _W**2 * _VALUES["e"]
_B = _U**2 * _VALUES["s"] - _V**2 * _VALUES["t"]

# generic sample values used to pick points on a plane line
_PROBE1 = np.array([0.31 + 0.17j, -0.53 + 0.29j, 0.71 - 0.11j])
_PROBE2 = np.array([-0.23 + 0.61j, 0.41 + 0.05j, 0.19 + 0.37j])


class QChoice(str, Enum):
    UVW = "uvw"
    UVW_STE = "uvw*ste"
    UVW_ST = "uvw*st"

    @property
    def extra(self) -> tuple[str, ...]:
        """The factors of q beyond uvw"""
        return {QChoice.UVW: (), QChoice.UVW_STE: ("s", "t", "e"), QChoice.UVW_ST: ("s", "t")}[
            self
        ]


class SquareSymbol(str, Enum):
    """Square class of a parameter relative to two independent non-squares mu, nu"""

    ONE = "1"
    MU = "mu"
    NU = "nu"
    MU_NU = "munu"

    def character(self, a: int, b: int) -> int:
        return {SquareSymbol.ONE: 1, SquareSymbol.MU: a, SquareSymbol.NU: b, SquareSymbol.MU_NU: a * b}[
            self
        ]


Signs = tuple[int, int, int]


@frozen
class QuarticPreset:
    name: str
    q_choice: QChoice
    sigma: SquareSymbol
    tau: SquareSymbol
    eta: SquareSymbol
    conic_point: bool = False

    def symbol(self, parameter: str) -> SquareSymbol:
        return {"s": self.sigma, "t": self.tau, "e": self.eta}[parameter]

    def galois_signs(self) -> tuple[Signs, ...]:
        """The distinct sign vectors on (sqrt sigma, sqrt tau, sqrt eta), identity first"""
        found = {
            (self.sigma.character(a, b), self.tau.character(a, b), self.eta.character(a, b))
            for a, b in product((1, -1), repeat=2)
        }
        return tuple(sorted(found, reverse=True))

    def character(self, parameters: Iterable[str], signs: Signs) -> int:
        result = 1
        for p, n in Counter(parameters).items():
            if n % 2:
                result *= signs[_SLOT[p]]
        return result

    def is_square(self, parameters: Iterable[str]) -> bool:
        """Whether the product of the named parameters is a square in k"""
        wanted = tuple(parameters)
        return all(self.character(wanted, s) == 1 for s in self.galois_signs())


_PRESETS = {
    "ex0": QuarticPreset("ex0", QChoice.UVW, SquareSymbol.ONE, SquareSymbol.ONE, SquareSymbol.ONE),
    "ex1": QuarticPreset("ex1", QChoice.UVW, SquareSymbol.MU, SquareSymbol.MU, SquareSymbol.MU),
    "ex2": QuarticPreset("ex2", QChoice.UVW, SquareSymbol.MU, SquareSymbol.MU, SquareSymbol.ONE),
    "ex3": QuarticPreset("ex3", QChoice.UVW, SquareSymbol.ONE, SquareSymbol.ONE, SquareSymbol.MU),
    "ex4": QuarticPreset(
        "ex4", QChoice.UVW, SquareSymbol.MU, SquareSymbol.NU, SquareSymbol.MU_NU, conic_point=True
    ),
    "ex5": QuarticPreset(
        "ex5", QChoice.UVW_STE, SquareSymbol.MU, SquareSymbol.MU, SquareSymbol.MU
    ),
    "ex6": QuarticPreset(
        "ex6", QChoice.UVW_STE, SquareSymbol.ONE, SquareSymbol.ONE, SquareSymbol.MU
    ),
    "ex7": QuarticPreset(
        "ex7", QChoice.UVW_STE, SquareSymbol.MU, SquareSymbol.NU, SquareSymbol.ONE, conic_point=True
    ),
    "ex8": QuarticPreset(
        "ex8", QChoice.UVW_ST, SquareSymbol.MU, SquareSymbol.NU, SquareSymbol.MU_NU, conic_point=True
    ),
}


def presets() -> dict[str, QuarticPreset]:
    return dict(_PRESETS)


def preset(name: str) -> QuarticPreset:
    key = name if name.startswith("ex") else f"ex{name}"
    try:
        return _PRESETS[key]
    except KeyError as e:
        raise PreconditionFailed(
            f"Unknown quartic family preset '{name}'. Known presets: {', '.join(_PRESETS)}"
        ) from e


# --- automorphisms -------------------------------------------------------------------

_WORD = re.compile(r"([abdg])(\d*)")
_LETTERS: dict[str, tuple[sympy.ImmutableMatrix, int]] = {
    "a": (sympy.ImmutableMatrix(sympy.diag(sympy.I, 1, 1)), 1),
    "b": (sympy.ImmutableMatrix(sympy.diag(1, sympy.I, 1)), 1),
    "d": (sympy.ImmutableMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]]), 1),
    "g": (sympy.ImmutableMatrix(sympy.eye(3)), -1),
}


@cache
def _preserves_surface(matrix: sympy.ImmutableMatrix) -> bool:
    x, y, z, a, b, c = sympy.symbols("x y z A B C")

    def quartic(p: Sequence[sympy.Expr]) -> sympy.Expr:
        return a * p[0] ** 4 + 2 * b * p[0] ** 2 * p[1] ** 2 + a * p[1] ** 4 + c * p[2] ** 4

    image = matrix * sympy.Matrix([x, y, z])
    return sympy.expand(quartic(list(image)) - quartic([x, y, z])) == 0


@frozen
class Automorphism:
    """(x:y:z:t) -> (M(x,y,z) : eps t), with M block diagonal and its z-entry 1.

    Words use a, b, d and g for the generators (ix:y:z:t), (x:iy:z:t), (y:x:z:t) and
    (x:y:z:-t); a word is read as a product applied from the right.
    """

    matrix: sympy.ImmutableMatrix
    eps: int
    word: str = field(default="1", eq=False)

    @classmethod
    def identity(cls) -> "Automorphism":
        return cls(sympy.ImmutableMatrix(sympy.eye(3)), 1, "1")

    @classmethod
    def parse(cls, word: str) -> "Automorphism":
        """Parses a word such as `a3b`, `a2dg` or `1`.

        Raises:
            ParseError: If the word has letters other than a, b, d and g
            UnsupportedRegime: If the word does not preserve the surface for B != 0
        """
        text = word.strip().replace("*", "")
        if text in ("", "1", "id"):
            return cls.identity()
        if "".join(m.group(0) for m in _WORD.finditer(text)) != text:
            raise ParseError(f"Cannot parse automorphism word '{word}'")
        result = cls.identity()
        for m in _WORD.finditer(text):
            matrix, eps = _LETTERS[m.group(1)]
            for _ in range(int(m.group(2) or 1)):
                result = result * cls(matrix, eps)
        if not _preserves_surface(result.matrix):
            raise UnsupportedRegime(f"'{word}' is not an automorphism of the family when B != 0")
        return cls(result.matrix, result.eps, text)

    def __mul__(self, other: "Automorphism") -> "Automorphism":
        word = other.word if self.word == "1" else self.word if other.word == "1" else self.word + other.word
        return Automorphism(
            sympy.ImmutableMatrix(self.matrix * other.matrix), self.eps * other.eps, word
        )

    def is_identity(self) -> bool:
        return self.matrix == sympy.eye(3) and self.eps == 1

    @property
    def order(self) -> int:
        power, n = self, 1
        while not power.is_identity():
            power, n = power * self, n + 1
            if n > 64:
                raise LatticeError(f"Automorphism {self.word} has no finite order")
        return n

    @property
    def block(self) -> sympy.Matrix:
        return sympy.Matrix(self.matrix[:2, :2])

    def numeric(self) -> NDArray[np.complex128]:
        return np.array([[complex(v) for v in row] for row in self.matrix.tolist()])


NAMED_GROUPS: dict[str, tuple[str, ...]] = {
    "trivial": (),
    "N": ("a2b2",),
    "C2type2": ("a2b2g",),
    "C4": ("a3b",),
    "C4'": ("a2d",),
    "C4g": ("a3bg",),
    "C2xC2": ("a2g", "b2g"),
    "D8": ("a3b", "dg"),
    "Q8": ("a3b", "a2d"),
    "Q8g": ("a3bg", "a2d"),
    "Q8'": ("a3b", "a2dg"),
}


@frozen
class FamilyGroup:
    generators: tuple[Automorphism, ...]
    elements: tuple[Automorphism, ...]

    @classmethod
    def generated_by(cls, *words: str) -> "FamilyGroup":
        gens = tuple(Automorphism.parse(w) for w in words if w.strip() not in ("", "1"))
        elements = [Automorphism.identity()]
        seen = {elements[0]}
        frontier = list(elements)
        while frontier:
            grown = []
            for x in frontier:
                for g in gens:
                    y = x * g
                    if y not in seen:
                        seen.add(y)
                        grown.append(y)
            elements += grown
            frontier = grown
        return cls(gens, tuple(elements))

    @classmethod
    def parse(cls, text: str) -> "FamilyGroup":
        """A named group (`D8`, `Q8g`, ...) or comma separated generator words"""
        if text in NAMED_GROUPS:
            return cls.generated_by(*NAMED_GROUPS[text])
        return cls.generated_by(*(w for w in text.split(",")))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def name(self) -> str:
        return "<" + ",".join(g.word for g in self.generators) + ">"

    def __contains__(self, aut: Automorphism) -> bool:
        return aut in self.elements


N_WORD = "a2b2"


def _is_zero(value: sympy.Expr) -> bool:
    return sympy.expand(value) == 0


def element_type(aut: Automorphism) -> ElementLabel:
    """Geometric type of an automorphism of order 2 or 4.

    An involution is scaled so that M has eigenvalues (1, 1, -1) or is the identity; an
    element of order 4 so that M has eigenvalues (i, -i, 1). The sign left on t then
    separates the types.
    """
    order = aut.order
    spectrum = [
        v for v, mult in sympy.Matrix(aut.matrix).eigenvals().items() for _ in range(mult)
    ]
    if order == 2:
        repeated = next(
            v for v in spectrum if sum(1 for w in spectrum if _is_zero(w - v)) >= 2
        )
        scaled = sympy.simplify(aut.eps / repeated**2)
        if all(_is_zero(w - repeated) for w in spectrum):
            return ElementLabel.TYPE0
        return ElementLabel.TYPE1 if scaled == 1 else ElementLabel.TYPE2
    if order == 4:
        for i, e in enumerate(spectrum):
            rest = spectrum[:i] + spectrum[i + 1 :]
            targets = [sympy.I * e, -sympy.I * e]
            if (_is_zero(rest[0] - targets[0]) and _is_zero(rest[1] - targets[1])) or (
                _is_zero(rest[0] - targets[1]) and _is_zero(rest[1] - targets[0])
            ):
                scaled = sympy.simplify(aut.eps / e**2)
                return ElementLabel.ORDER4_T if scaled == 1 else ElementLabel.ORDER4_MINUS_T
        return ElementLabel.ORDER4_OTHER
    raise UnsupportedRegime(f"Elements of order {order} are not typed ({aut.word})")


def describe(group: FamilyGroup) -> GroupDescriptor:
    """The descriptor `proposition_dp2` consumes, one entry per nontrivial element"""
    types = {g.word: element_type(g) for g in group.elements if not g.is_identity()}
    orders = Counter(g.order for g in group.elements if not g.is_identity())
    if group.order == 1:
        kind = AbstractType.TRIVIAL
    elif group.order == 2:
        kind = AbstractType.C2
    elif group.order == 4:
        kind = AbstractType.C4 if orders[4] else AbstractType.C2XC2
    elif group.order == 8 and orders[2] == 1 and orders[4] == 6:
        kind = AbstractType.Q8
    elif group.order == 8 and orders[2] == 5 and orders[4] == 2:
        kind = AbstractType.D8
    else:
        kind = AbstractType.OTHER
    return GroupDescriptor(
        kind,
        types,
        contains_geiser=ElementLabel.TYPE0 in types.values(),
        name=group.name,
    )


# --- numeric line model --------------------------------------------------------------


@frozen(eq=False)
class NumericLine:
    """A line {plane . p = 0, t = p^T form p} on the surface"""

    family: str
    index: int
    plane: NDArray[np.complex128]
    form: NDArray[np.complex128]

    def points(self) -> tuple[NDArray[np.complex128], ...]:
        p1 = np.cross(self.plane, _PROBE1)
        p2 = np.cross(self.plane, _PROBE2)
        return p1, p2, p1 + p2

    def t_value(self, p: NDArray[np.complex128]) -> complex:
        return complex(p @ self.form @ p)


def _close(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _parallel(l1: NDArray[np.complex128], l2: NDArray[np.complex128], tol: float) -> bool:
    n1 = l1 / np.linalg.norm(l1)
    n2 = l2 / np.linalg.norm(l2)
    return bool(np.linalg.norm(np.cross(n1, n2)) < tol)


def _same_line(a: NumericLine, b: NumericLine, tol: float) -> bool:
    if not _parallel(a.plane, b.plane, tol):
        return False
    return all(_close(a.t_value(p), b.t_value(p), tol) for p in a.points())


def _meet(a: NumericLine, b: NumericLine, tol: float) -> int:
    if _parallel(a.plane, b.plane, tol):
        if _same_line(a, b, tol):
            raise LatticeError(f"Lines {a.family}{a.index} and {b.family}{b.index} coincide")
        return 2
    p = np.cross(a.plane, b.plane)
    return 1 if _close(a.t_value(p), b.t_value(p), tol) else 0


def _root(parameters: Iterable[str], signs: Signs) -> float:
    """sqrt of a product of sigma, tau and eta, with the given signs on the radicals"""
    value = 1.0
    for p, n in Counter(parameters).items():
        value *= _VALUES[p] ** (n // 2)
        if n % 2:
            value *= signs[_SLOT[p]] * math.sqrt(_VALUES[p])
    return value


def _q_value(q_choice: QChoice) -> int:
    return _U * _V * _W * math.prod(_VALUES[p] for p in q_choice.extra)


def _c_value(q_choice: QChoice) -> int:
    return _q_value(q_choice) ** 2 * _VALUES["s"] * _VALUES["t"] * _VALUES["e"]


def build_lines(q_choice: QChoice, signs: Signs = (1, 1, 1)) -> list[NumericLine]:
    """The 56 lines in family order theta, eta, sigma, tau"""
    if _A != _U**2 * _VALUES["s"] + _V**2 * _VALUES["t"]:
        raise LatticeError("Numerical stand-ins violate A = u^2 sigma + v^2 tau")
    m = q_choice.extra
    q = _q_value(q_choice)
    r = {p: _root((p,), signs) for p in "ste"}
    found: dict[str, list[tuple[tuple[complex, ...], NDArray[np.complex128]]]] = {
        f: [] for f in FAMILIES
    }

    top = q * _root(("s", "t", "e"), signs)
    for a, b in product((1, -1), repeat=2):
        k = (a * _V * r["t"] + b * 1j * _U * r["s"]) / (_W * r["e"])
        for eps in (1, -1):
            found["theta"].append(((1, -k, 0), eps * top * np.diag([0, 0, 1])))

    root_eta = _root(("e", *m), signs)
    ratio = _B / _A
    for on_y in (True, False):
        for c, e in product((1, -1), repeat=2):
            k = e * (1 + c * 1j) / (_W * root_eta)
            plane = (0, k, -1) if on_y else (k, 0, -1)
            diagonal = np.diag([1, ratio, 0] if on_y else [ratio, 1, 0])
            for eps in (1, -1):
                found["eta"].append((plane, eps * _W * r["e"] * diagonal))

    root_sigma = _root(("s", *m), signs)
    for sgn in (1, -1):
        cross = sgn * (_A - _B) / 2
        base = np.array([[_A, cross, 0], [cross, _A, 0], [0, 0, 0]])
        for unit in (1, -1, 1j, -1j):
            k = unit / (_U * root_sigma)
            for eps in (1, -1):
                found["sigma"].append(((k, sgn * k, -1), eps / (_U * r["s"]) * base))

    root_tau = _root(("t", *m), signs)
    for sgn in (1, -1):
        cross = sgn * 1j * (_A + _B) / 2
        base = np.array([[_A, cross, 0], [cross, -_A, 0], [0, 0, 0]])
        for unit in (1, -1, 1j, -1j):
            k = unit / (_V * root_tau)
            for eps in (1, -1):
                found["tau"].append(((k, sgn * 1j * k, -1), eps / (_V * r["t"]) * base))

    return [
        NumericLine(family, i, np.array(plane, dtype=complex), np.array(form, dtype=complex))
        for family in FAMILIES
        for i, (plane, form) in enumerate(found[family])
    ]


def _check_on_surface(line: NumericLine, c_value: int, tol: float) -> None:
    for p in line.points():
        x, y, z = p
        quartic = _A * x**4 + 2 * _B * x**2 * y**2 + _A * y**4 + c_value * z**4
        if not _close(line.t_value(p) ** 2, quartic, tol):
            raise LatticeError(f"Line {line.family}{line.index} does not lie on the surface")


def _exceptional_basis(inter: NDArray[np.int64]) -> tuple[int, ...]:
    """The lexicographically first seven pairwise disjoint lines"""
    chosen: list[int] = []

    def extend(start: int) -> bool:
        if len(chosen) == 7:
            return True
        for j in range(start, len(inter)):
            if all(inter[j, c] == 0 for c in chosen):
                chosen.append(j)
                if extend(j + 1):
                    return True
                chosen.pop()
        return False

    if not extend(0):
        raise LatticeError("No seven pairwise disjoint lines in the numeric model")
    return tuple(chosen)


@frozen(eq=False)
class QuarticLineModel:
    q_choice: QChoice
    tolerance: float
    lines: tuple[NumericLine, ...]
    to_catalog: tuple[int, ...]

    @classmethod
    def build(cls, q_choice: QChoice, tolerance: float) -> "QuarticLineModel":
        lines = build_lines(q_choice)
        c_value = _c_value(q_choice)
        for ln in lines:
            _check_on_surface(ln, c_value, tolerance)
        n = len(lines)
        inter = np.full((n, n), -1, dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                inter[i, j] = inter[j, i] = _meet(lines[i], lines[j], tolerance)
        basis = _exceptional_basis(inter)
        to_catalog: list[int] = []
        for j in range(n):
            c = [-int(inter[j, e]) for e in basis]
            top, rem = divmod(1 - sum(c), 3)
            index = index_of_class(DivisorClass((top, *c))) if rem == 0 else None
            if index is None:
                raise LatticeError(f"Line {lines[j].family}{lines[j].index} has no lattice class")
            to_catalog.append(index)
        if sorted(to_catalog) != list(range(LINE_COUNT)):
            raise LatticeError("Numeric lines do not match the catalog one to one")
        lattice = intersection_matrix()
        if not np.array_equal(lattice[np.ix_(to_catalog, to_catalog)], inter):
            raise LatticeError("Numeric intersection numbers disagree with the lattice form")
        logger.debug("Labelled the lines of the %s model from basis %s", q_choice.value, basis)
        return cls(q_choice, tolerance, tuple(lines), tuple(to_catalog))

    def label(self, model_index: int) -> str:
        return enumerate_lines()[self.to_catalog[model_index]].label

    def match(self, line: NumericLine) -> int:
        for j, candidate in enumerate(self.lines):
            if _same_line(line, candidate, self.tolerance):
                return j
        raise LatticeError(f"Image of {line.family}{line.index} is not a line of the model")

    def _isometry(self, images: Sequence[NumericLine]) -> LatticeIsometry:
        perm = [0] * LINE_COUNT
        for j, image in enumerate(images):
            perm[self.to_catalog[j]] = self.to_catalog[self.match(image)]
        return LatticeIsometry.from_perm(bytes(perm))

    def isometry(self, aut: Automorphism) -> LatticeIsometry:
        m = aut.numeric()
        inv_t = np.linalg.inv(m).T
        images = [
            NumericLine(ln.family, ln.index, inv_t @ ln.plane, aut.eps * inv_t @ ln.form @ inv_t.T)
            for ln in self.lines
        ]
        return self._isometry(images)

    def galois_isometry(self, signs: Signs) -> LatticeIsometry:
        return self._isometry(build_lines(self.q_choice, signs))

    def family_indices(self, family: str) -> list[int]:
        return [self.to_catalog[j] for j, ln in enumerate(self.lines) if ln.family == family]


@cache
def line_model(q_choice: QChoice, tolerance: float = NumericOptions().tolerance) -> QuarticLineModel:
    return QuarticLineModel.build(q_choice, tolerance)


@cache
def automorphism_isometry(
    q_choice: QChoice, aut: Automorphism, tolerance: float = NumericOptions().tolerance
) -> LatticeIsometry:
    return line_model(q_choice, tolerance).isometry(aut)


def group_isometries(
    group: FamilyGroup, q_choice: QChoice, options: NumericOptions | None = None
) -> SubgroupClosure:
    tol = (options or NumericOptions()).tolerance
    return closure([automorphism_isometry(q_choice, g, tol) for g in group.generators])


@frozen
class LabeledLine:
    family: str
    index: int
    label: str


def catalog(
    q_choice: QChoice = QChoice.UVW, options: NumericOptions | None = None
) -> list[LabeledLine]:
    model = line_model(q_choice, (options or NumericOptions()).tolerance)
    return [LabeledLine(ln.family, ln.index, model.label(j)) for j, ln in enumerate(model.lines)]


# --- the order 32 group and its lattice dictionary -------------------------------------

DICTIONARY_WORDS = ("ab", "ab3", "d", "g")
DICTIONARY_KIND = "quartic-dictionary"


@frozen
class GroupStructure:
    order: int
    geiser_is_t_flip: bool
    t_flip_central: bool
    n_central: bool

    @property
    def ok(self) -> bool:
        return self.order == 32 and self.geiser_is_t_flip and self.t_flip_central and self.n_central


def group_structure(options: NumericOptions | None = None) -> GroupStructure:
    """Checks the order 32 group generated by ab, ab3, d and g inside W(E7)"""
    tol = (options or NumericOptions()).tolerance
    gens = [automorphism_isometry(QChoice.UVW, Automorphism.parse(w), tol) for w in DICTIONARY_WORDS]
    group = closure(gens)
    flip = automorphism_isometry(QChoice.UVW, Automorphism.parse("g"), tol)
    n = automorphism_isometry(QChoice.UVW, Automorphism.parse(N_WORD), tol)
    return GroupStructure(
        order=group.order,
        geiser_is_t_flip=flip == geiser(),
        t_flip_central=all(flip * h == h * flip for h in gens),
        n_central=all(n * h == h * n for h in gens),
    )


def dictionary_certificate(options: NumericOptions | None = None) -> dict[str, object]:
    """Images of E1..E7 under the generators, on the q = uvw model"""
    tol = (options or NumericOptions()).tolerance
    lines = enumerate_lines()
    structure = group_structure(options)
    if not structure.ok:
        raise LatticeError(f"The automorphism group fails its structure checks: {structure}")
    images = {}
    for word in DICTIONARY_WORDS:
        iso = automorphism_isometry(QChoice.UVW, Automorphism.parse(word), tol)
        images[word] = {f"E{i}": lines[iso.perm[i - 1]].label for i in range(1, 8)}
    return {
        "model": QChoice.UVW.value,
        "order": structure.order,
        "images": images,
        "labels": [f"{ln.family}{ln.index}={ln.label}" for ln in catalog(QChoice.UVW, options)],
    }


def pin_dictionary(store: "CertificateStore", options: NumericOptions | None = None) -> dict[str, object]:
    """Stores the dictionary on first use and checks it against the stored copy afterwards.

    Raises:
        CertificateMismatch: If a stored dictionary differs from the computed one
    """
    computed = dictionary_certificate(options)
    key = QChoice.UVW.value
    stored = store.get(DICTIONARY_KIND, key)
    if stored is None:
        store.put(DICTIONARY_KIND, key, computed)
        store.save_changes()
        logger.info("Pinned the quartic family dictionary")
        return computed
    if stored != computed:
        raise CertificateMismatch(DICTIONARY_KIND, key)
    return stored


# --- Galois action -------------------------------------------------------------------

_ACTIONS = ("1", N_WORD, "a2b2g", "g")


def _require_supported(preset: QuarticPreset) -> None:
    classes = {preset.sigma, preset.tau, preset.eta}
    if len(classes) == 3 and not preset.conic_point:
        raise UnsupportedRegime(
            f"{preset.name}: sigma, tau and eta lie in three distinct classes; a k-point on "
            f"the conic u^2 sigma + v^2 tau = w^2 eta is required"
        )


@cache
def galois_group(
    preset: QuarticPreset, tolerance: float = NumericOptions().tolerance
) -> SubgroupClosure:
    model = line_model(preset.q_choice, tolerance)
    gens = [model.galois_isometry(s) for s in preset.galois_signs()[1:]]
    return closure(gens)


@frozen
class GaloisActionModel:
    per_family: dict[str, tuple[str, ...]]
    theta_orbits: tuple[tuple[str, ...], ...]
    group_order: int


def galois_model(preset: QuarticPreset, options: NumericOptions | None = None) -> GaloisActionModel:
    """Which of 1, N, N*g and g each Galois element induces on the eta, sigma and tau lines.

    Raises:
        UnsupportedRegime: If the preset lies outside the supported square-class patterns
    """
    _require_supported(preset)
    tol = (options or NumericOptions()).tolerance
    model = line_model(preset.q_choice, tol)
    actions = {w: automorphism_isometry(preset.q_choice, Automorphism.parse(w), tol) for w in _ACTIONS}
    gal = galois_group(preset, tol)
    per_family = {}
    for family in FAMILIES[1:]:
        indices = model.family_indices(family)
        found = set()
        for h in gal.elements():
            match = [w for w, a in actions.items() if all(h.perm[i] == a.perm[i] for i in indices)]
            if not match:
                raise LatticeError(f"Galois acts on the {family} lines outside <N, g>")
            found.add(match[0])
        per_family[family] = tuple(w for w in _ACTIONS if w in found)
    lines = enumerate_lines()
    theta = index_orbits(gal, model.family_indices("theta"))
    return GaloisActionModel(
        per_family=per_family,
        theta_orbits=tuple(tuple(lines[i].label for i in orbit) for orbit in theta),
        group_order=gal.order,
    )


# --- minimality and rationality of X -------------------------------------------------


def _anticanonical_multiple(classes: Iterable[DivisorClass]) -> bool:
    total = sum(classes, DivisorClass.zero())
    n, rem = divmod(-total.coeffs[0], 3)
    return rem == 0 and total == K * n


@frozen
class GMinimality:
    rank: int
    families: dict[str, bool]

    @property
    def minimal(self) -> bool:
        return self.rank == 1


def g_minimality(
    group: FamilyGroup, preset: QuarticPreset, options: NumericOptions | None = None
) -> GMinimality:
    """Invariant Picard rank under G and Galois, checked family by family.

    Each of the eta, sigma and tau families splits into orbits whose classes sum to a
    multiple of -K exactly when the invariant rank is 1.
    """
    _require_supported(preset)
    tol = (options or NumericOptions()).tolerance
    model = line_model(preset.q_choice, tol)
    isos = [automorphism_isometry(preset.q_choice, g, tol) for g in group.generators]
    gal = galois_group(preset, tol)
    combined = closure([*isos, *gal.generators])
    rank = invariant_rank(combined)
    lines = enumerate_lines()
    families = {
        family: all(
            _anticanonical_multiple(lines[i].cls for i in orbit)
            for orbit in index_orbits(combined, model.family_indices(family))
        )
        for family in FAMILIES[1:]
    }
    if all(families.values()) != (rank == 1):
        raise LatticeError(
            f"Family orbits {families} disagree with invariant rank {rank} for {group.name}"
        )
    return GMinimality(rank, families)


@frozen
class ContractionChain:
    pairs: tuple[tuple[str, str], ...]
    model: ContractedModel

    @property
    def k2(self) -> int:
        return self.model.current_k2


def pairwise_contraction_chain(
    preset: QuarticPreset, options: NumericOptions | None = None
) -> ContractionChain:
    """Contracts Galois-invariant pairs {E, N*g E} of disjoint lines, one per family.

    Raises:
        PreconditionFailed: If q is not uvw
    """
    if preset.q_choice is not QChoice.UVW:
        raise PreconditionFailed(f"{preset.name}: pair contraction needs q = uvw")
    tol = (options or NumericOptions()).tolerance
    model = line_model(QChoice.UVW, tol)
    gal = galois_group(preset, tol)
    n = automorphism_isometry(QChoice.UVW, Automorphism.parse(N_WORD), tol)
    twin = automorphism_isometry(QChoice.UVW, Automorphism.parse("a2b2g"), tol)
    lines = enumerate_lines()
    contracted = ContractedModel()
    pairs: list[tuple[str, str]] = []
    for family in ("sigma", "tau", "eta"):
        for i in sorted(model.family_indices(family)):
            j = twin.perm[i]
            if lines[i].cls.dot(lines[n.perm[i]].cls) != 1 or lines[i].cls.dot(lines[j].cls) != 0:
                raise LatticeError(f"{lines[i].label} breaks the N-pairing of its family")
            if any(h.perm[i] not in (i, j) for h in gal.generators):
                continue
            try:
                contracted = contract(contracted, [lines[i].cls, lines[j].cls])
            except DisjointnessViolation:
                continue
            pairs.append((lines[i].label, lines[j].label))
            break
    if contracted.current_k2 < 6:
        raise LatticeError(f"Pair contraction of {preset.name} stopped at K^2 = {contracted.current_k2}")
    return ContractionChain(tuple(pairs), contracted)


@frozen
class XRationality:
    verdict: Rationality
    rule: str
    k2: int
    chain: tuple[tuple[str, ...], ...] = ()


def x_rationality(
    preset: QuarticPreset,
    options: NumericOptions | None = None,
    search: SearchOptions | None = None,
) -> XRationality:
    _require_supported(preset)
    if preset.q_choice is QChoice.UVW:
        chain = pairwise_contraction_chain(preset, options)
        return XRationality(Rationality.RATIONAL, "pair-contraction", chain.k2, chain.pairs)
    gal = galois_group(preset, (options or NumericOptions()).tolerance)
    if invariant_rank(gal) == 1:
        return XRationality(Rationality.NON_RATIONAL, "picard-rank-one", 2)
    result = minimal_model_search(gal, search)
    steps = tuple(tuple(ln.label for ln in step) for step in result.chain)
    if result.k2 >= 5:
        return XRationality(Rationality.RATIONAL, "minimal-model-k2-at-least-5", result.k2, steps)
    return XRationality(Rationality.NON_RATIONAL, f"minimal-model-k2-{result.k2}", result.k2, steps)


# --- rationality of X/G ----------------------------------------------------------------


@frozen
class MemberFixedPoints:
    """Fixed points of one element on one member of the pencil of lines through (0:0:1)"""

    member: str
    kind: str
    fused: bool


@frozen
class FixedPointRecord:
    element: str
    members: tuple[MemberFixedPoints, ...]

    @property
    def fused(self) -> bool:
        return all(m.fused for m in self.members)


def _member(v: Sequence[sympy.Expr]) -> tuple[str, str]:
    """Pencil member through direction v and the parameter giving the class of F(v)"""
    x, y = v
    if _is_zero(x):
        return "x=0", "e"
    ratio = sympy.simplify(y / x)
    table = {0: ("y=0", "e"), 1: ("x=y", "s"), -1: ("x=-y", "s"), sympy.I: ("x=-iy", "t"), -sympy.I: ("x=iy", "t")}
    for key, value in table.items():
        if _is_zero(ratio - key):
            return value
    raise UnsupportedRegime(f"Fixed member with slope {ratio} is not one of the six special lines")


def _multiplier(h: Automorphism, v: sympy.Matrix) -> sympy.Expr | None:
    w = h.block * v
    if not _is_zero(w[0] * v[1] - w[1] * v[0]):
        return None
    j = 0 if not _is_zero(v[0]) else 1
    return sympy.simplify(w[j] / v[j])


def fixed_point_records(
    group: FamilyGroup, preset: QuarticPreset, n_swapped: bool
) -> tuple[FixedPointRecord, ...]:
    """Fixed points on X of the elements outside <N>, with their fusion status.

    A member fixed with eigenvalue lam and t-sign eps carries a fixed curve (lam = eps = 1),
    the N-points (eps = 1 != lam), a pair on the member (eps = lam^2) or four points over
    the member (lam = 1, eps = -1). The points are fused when G or Galois moves each of
    them.
    """
    n = Automorphism.parse(N_WORD)
    records = []
    for g in group.elements:
        if g.is_identity() or g == n:
            continue
        block = g.block
        if _is_zero(block[0, 1]) and _is_zero(block[1, 0]) and _is_zero(block[0, 0] - block[1, 1]):
            raise UnsupportedRegime(f"{g.word} acts by a scalar on x, y and is not N")
        members = []
        for lam, _, vectors in block.eigenvects():
            v = vectors[0]
            label, parameter = _member(v)
            curve = _is_zero(lam - 1) and g.eps == 1
            n_points = g.eps == 1 and not _is_zero(lam - 1)
            pair = _is_zero(g.eps - lam**2)
            kummer = _is_zero(lam - 1) and g.eps == -1
            stabilizer = [(h, mu) for h in group.elements if (mu := _multiplier(h, v)) is not None]
            if curve:
                members.append(MemberFixedPoints(label, "curve", False))
            elif n_points and pair:
                members.append(MemberFixedPoints(label, "mixed", False))
            elif n_points:
                members.append(MemberFixedPoints(label, "n-points", n_swapped))
            elif pair:
                fused = not preset.is_square((parameter,)) or any(
                    _is_zero(h.eps / mu**2 + 1) for h, mu in stabilizer
                )
                members.append(MemberFixedPoints(label, "pair", fused))
            elif kummer:
                fused = not preset.is_square(("s", "t", "e", parameter)) or any(
                    _is_zero(mu - sympy.I) or _is_zero(mu + sympy.I) for _, mu in stabilizer
                )
                members.append(MemberFixedPoints(label, "kummer", fused))
            else:
                members.append(MemberFixedPoints(label, "none", True))
        records.append(FixedPointRecord(g.word, tuple(members)))
    return tuple(records)


@frozen
class QuotientVerdict:
    verdict: Rationality
    rule: str
    n_swapped: bool | None = None
    records: tuple[FixedPointRecord, ...] = ()


def quotient_verdict(
    group: FamilyGroup,
    preset: QuarticPreset,
    options: NumericOptions | None = None,
    search: SearchOptions | None = None,
) -> QuotientVerdict:
    """Rationality of X/G for a subgroup of the order 32 group.

    Raises:
        UnsupportedRegime: If G is not trivial, does not contain g, is not generated by a
            type 2 involution and does not contain N, or if G is not minimal
    """
    _require_supported(preset)
    tol = (options or NumericOptions()).tolerance
    if group.order == 1:
        x = x_rationality(preset, options, search)
        return QuotientVerdict(x.verdict, f"quotient-is-x:{x.rule}")
    descriptor = describe(group)
    if descriptor.contains_geiser:
        return QuotientVerdict(Rationality.RATIONAL, "geiser-quotient-is-plane-quotient")
    if group.order == 2 and descriptor.labels == {ElementLabel.TYPE2}:
        g = automorphism_isometry(preset.q_choice, group.generators[0], tol)
        try:
            certificate = type2_nonrationality_certificate(g, galois_group(preset, tol))
        except PreconditionFailed as e:
            raise UnsupportedRegime(str(e)) from e
        if certificate.kind is VerdictKind.NON_RATIONAL_CERTIFIED:
            return QuotientVerdict(Rationality.NON_RATIONAL, "type2-certificate")
        return QuotientVerdict(Rationality.UNDETERMINED, "type2-certificate-not-issued")
    if Automorphism.parse(N_WORD) not in group:
        raise UnsupportedRegime(f"{group.name} does not contain N = a2b2")
    minimality = g_minimality(group, preset, options)
    if not minimality.minimal:
        raise UnsupportedRegime(
            f"{group.name} on {preset.name} has invariant Picard rank {minimality.rank}"
        )
    n_swapped = any(g.eps == -1 for g in group.elements) or not preset.is_square(("s", "t", "e"))
    records = fixed_point_records(group, preset, n_swapped)
    if n_swapped and all(r.fused for r in records):
        return QuotientVerdict(Rationality.NON_RATIONAL, "no-fixed-k-points", n_swapped, records)
    return QuotientVerdict(Rationality.RATIONAL, "fixed-point-blowup", n_swapped, records)


# --- verdict matrix ----------------------------------------------------------------


class Table4Column(str, Enum):
    RAT_RAT = "X rat, X/G rat"
    RAT_NOT = "X rat, X/G not"
    NOT_RAT = "X not, X/G rat"
    NOT_NOT = "X not, X/G not"

    @classmethod
    def parse(cls, text: str) -> "Table4Column":
        columns = list(cls)
        if text.strip().isdigit() and 1 <= int(text) <= len(columns):
            return columns[int(text) - 1]
        for c in columns:
            if c.value.lower() == text.strip().lower():
                return c
        raise ParseError(f"Unknown column '{text}'; use 1..4 or one of {[c.value for c in columns]}")

    @property
    def expected(self) -> tuple[Rationality, Rationality]:
        r, n = Rationality.RATIONAL, Rationality.NON_RATIONAL
        return {
            Table4Column.RAT_RAT: (r, r),
            Table4Column.RAT_NOT: (r, n),
            Table4Column.NOT_RAT: (n, r),
            Table4Column.NOT_NOT: (n, n),
        }[self]


@frozen
class Table4Cell:
    row: int
    column: Table4Column
    example: str
    group: tuple[str, ...]
    family: str = "quartic"


_IMPOSSIBLE_TRIVIAL = "With G trivial X/G is X itself, and rho(X) = 1 leaves no contraction"
_IMPOSSIBLE_TYPE2 = "An invariant type 2 involution with rho^G = 1 makes both X and X/G non-rational"

_CUBIC_ROWS = {
    4: ("6.17", "6.18", "6.16", "6.15"),
    # the S3 quartic of 6.18 has the rational root z = -2
    8: ("6.17", "6.18b", "6.16", "6.15"),
}
_ROWS: dict[int, tuple[tuple[str, tuple[str, ...]] | str, ...]] = {
    1: (_IMPOSSIBLE_TRIVIAL, _IMPOSSIBLE_TRIVIAL, _IMPOSSIBLE_TRIVIAL, ("ex5", ())),
    2: (("ex4", ("a2b2",)), ("ex1", ("a2b2",)), ("ex8", ("a2b2",)), ("ex5", ("a2b2",))),
    3: (_IMPOSSIBLE_TYPE2, _IMPOSSIBLE_TYPE2, _IMPOSSIBLE_TYPE2, ("ex5", ("a2b2g",))),
    5: (("ex2", ("a2d",)), ("ex1", ("a3b",)), ("ex8", ("a3b",)), ("ex5", ("a3b",))),
    6: (("ex2", ("a3bg",)), ("ex1", ("a3bg",)), ("ex7", ("a3bg",)), ("ex5", ("a3bg",))),
    7: (
        ("ex1", ("a2g", "b2g")),
        ("ex4", ("a2g", "b2g")),
        ("ex5", ("a2g", "b2g")),
        ("ex7", ("a2g", "b2g")),
    ),
    9: (("ex1", ("a3b", "dg")), ("ex3", ("a3b", "dg")), ("ex5", ("a3b", "dg")), ("ex6", ("a3b", "dg"))),
    10: (
        ("ex0", ("a3b", "a2d")),
        ("ex1", ("a3b", "a2d")),
        ("ex8", ("a3b", "a2d")),
        ("ex5", ("a3b", "a2d")),
    ),
    11: (
        ("ex2", ("a3bg", "a2d")),
        ("ex1", ("a3bg", "a2d")),
        ("ex6", ("a3b", "a2dg")),
        ("ex5", ("a3bg", "a2d")),
    ),
}


def table4(row: int, column: Table4Column | str) -> Table4Cell:
    """The example realising one cell of the verdict matrix.

    Raises:
        PreconditionFailed: If the row is not 1..11
        Impossible: If no surface and group realise the cell
    """
    col = column if isinstance(column, Table4Column) else Table4Column.parse(column)
    position = list(Table4Column).index(col)
    if row in (4, 8):
        return Table4Cell(row, col, _CUBIC_ROWS[row][position], ("C3",) if row == 4 else ("S3",), "cubic")
    if row not in _ROWS:
        raise PreconditionFailed(f"Verdict matrix rows are 1..11, got {row}")
    entry = _ROWS[row][position]
    if isinstance(entry, str):
        raise Impossible(entry, row=row, column=col.value)
    name, words = entry
    return Table4Cell(row, col, name, words)


@frozen
class CellEvaluation:
    cell: Table4Cell
    x: Rationality
    quotient: Rationality
    case_index: int | None
    invariant_rank: int | None

    @property
    def consistent(self) -> bool:
        return (
            (self.x, self.quotient) == self.cell.column.expected
            and self.case_index == self.cell.row
            and self.invariant_rank in (None, 1)
        )

    def to_json_obj(self) -> dict[str, object]:
        return {
            "row": self.cell.row,
            "column": self.cell.column.value,
            "example": self.cell.example,
            "group": list(self.cell.group),
            "x": self.x.value,
            "quotient": self.quotient.value,
            "caseIndex": self.case_index,
            "invariantRank": self.invariant_rank,
            "consistent": self.consistent,
        }


def evaluate_cell(cell: Table4Cell, options: NumericOptions | None = None) -> CellEvaluation:
    if cell.family == "cubic":
        from . import family_cubic

        params = family_cubic.preset(cell.example).params
        x = family_cubic.x_rationality_cubic(params)
        if cell.row == 4:
            rational = family_cubic.c3_quotient_rational(params)
            quotient = Rationality.RATIONAL if rational else Rationality.NON_RATIONAL
        else:
            quotient = family_cubic.s3_quotient_verdict(params)
        return CellEvaluation(cell, x, quotient, cell.row, None)
    p = preset(cell.example)
    group = FamilyGroup.generated_by(*cell.group)
    x = x_rationality(p, options).verdict
    quotient = quotient_verdict(group, p, options)
    case_index = proposition_dp2(describe(group)).case_index
    rank = g_minimality(group, p, options).rank if group.order > 1 else None
    if rank is None:
        rank = invariant_rank(galois_group(p, (options or NumericOptions()).tolerance))
    return CellEvaluation(cell, x, quotient.verdict, case_index, rank)


def verdict_matrix(options: NumericOptions | None = None) -> list[dict[str, object]]:
    """Every cell of the matrix, evaluated; impossible cells carry their reason"""
    result: list[dict[str, object]] = []
    for row in range(1, 12):
        for column in Table4Column:
            try:
                cell = table4(row, column)
            except Impossible as e:
                result.append({"row": row, "column": column.value, "impossible": e.reason})
                continue
            result.append(evaluate_cell(cell, options).to_json_obj())
    return result
