"""The Picard lattice of a degree 2 del Pezzo surface.

Classes are stored in raw coordinates (c0; c1..c7) of the basis (L, E1, ..., E7),
meaning c0*L + c1*E1 + ... + c7*E7. The intersection form is diag(1, -1, ..., -1) and
the canonical class is K = -3L + E1 + ... + E7. Text output uses the classical
`aL-b1E1-...-b7E7` shape, so b_i = -c_i.
"""

import logging
import re
from collections.abc import Iterable, Sequence
from functools import cache
from itertools import combinations

import numpy as np
from attrs import field, frozen
from numpy.typing import NDArray

from .errors import DisjointnessViolation, LatticeError, ParseError

logger = logging.getLogger(__name__)

RANK = 8
LINE_COUNT = 56
FORM_DIAGONAL = (1, -1, -1, -1, -1, -1, -1, -1)

# bounds of the exhaustive line search; every closed-form line lies inside them
SEARCH_BOUND_L = 3
SEARCH_BOUND_E = 2

_TERM = re.compile(r"([+-]?)(\d*)(L|E[1-7])")


def _coordinates(values: Iterable[int]) -> tuple[int, ...]:
    coords = tuple(int(v) for v in values)
    if len(coords) != RANK:
        raise LatticeError(f"A divisor class needs {RANK} coordinates, got {len(coords)}")
    return coords


@frozen
class DivisorClass:
    """An element of Pic(X) = Z^8 with the signature (1, 7) form"""

    coeffs: tuple[int, ...] = field(converter=_coordinates)

    @classmethod
    def zero(cls) -> "DivisorClass":
        return cls((0,) * RANK)

    @classmethod
    def hyperplane(cls) -> "DivisorClass":
        return cls((1,) + (0,) * 7)

    @classmethod
    def exceptional(cls, i: int) -> "DivisorClass":
        if not 1 <= i <= 7:
            raise LatticeError(f"Exceptional curves are E1..E7, got E{i}")
        coords = [0] * RANK
        coords[i] = 1
        return cls(coords)

    @classmethod
    def parse(cls, text: str) -> "DivisorClass":
        """Reads classes such as `L-E1-E2-E3`, `4L-E1-2E4` or `-3L+E1+E2`"""
        compact = text.replace(" ", "")
        if not compact:
            raise ParseError("Cannot parse an empty divisor class")
        coords = [0] * RANK
        position = 0
        for match in _TERM.finditer(compact):
            if match.start() != position:
                break
            sign, amount, symbol = match.groups()
            value = int(amount) if amount else 1
            if sign == "-":
                value = -value
            index = 0 if symbol == "L" else int(symbol[1:])
            coords[index] += value
            position = match.end()
        if position != len(compact):
            raise ParseError(
                f"Cannot parse divisor class '{text}': expected terms like 'aL' or 'bE3' "
                f"near position {position}"
            )
        return cls(coords)

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(-a for a in self.coeffs)

    def __mul__(self, n: int) -> "DivisorClass":
        return DivisorClass(n * a for a in self.coeffs)

    __rmul__ = __mul__

    def dot(self, other: "DivisorClass") -> int:
        return sum(s * a * b for s, a, b in zip(FORM_DIAGONAL, self.coeffs, other.coeffs))

    @property
    def self_intersection(self) -> int:
        return self.dot(self)

    def as_array(self) -> NDArray[np.int64]:
        return np.array(self.coeffs, dtype=np.int64)

    def __str__(self) -> str:
        terms: list[str] = []
        for index, c in enumerate(self.coeffs):
            if c == 0:
                continue
            symbol = "L" if index == 0 else f"E{index}"
            magnitude = "" if abs(c) == 1 else str(abs(c))
            sign = "-" if c < 0 else "+"
            terms.append(f"{sign}{magnitude}{symbol}")
        if not terms:
            return "0"
        text = "".join(terms)
        return text[1:] if text.startswith("+") else text


K = DivisorClass((-3, 1, 1, 1, 1, 1, 1, 1))


def canonical_class() -> DivisorClass:
    return K


def intersect(d1: DivisorClass, d2: DivisorClass) -> int:
    """The intersection number of two classes"""
    return d1.dot(d2)


@frozen
class Line:
    """A (-1)-curve, labelled `E3`, `L25`, `Q17` or `C4`"""

    label: str
    cls: DivisorClass

    def __str__(self) -> str:
        return self.label


def _closed_form_lines() -> list[Line]:
    h = DivisorClass.hyperplane()
    e = {i: DivisorClass.exceptional(i) for i in range(1, 8)}
    total = sum((e[i] for i in range(1, 8)), DivisorClass.zero())
    lines = [Line(f"E{i}", e[i]) for i in range(1, 8)]
    pairs = list(combinations(range(1, 8), 2))
    lines += [Line(f"L{i}{j}", h - e[i] - e[j]) for i, j in pairs]
    lines += [Line(f"Q{i}{j}", 2 * h + e[i] + e[j] - total) for i, j in pairs]
    lines += [Line(f"C{i}", 3 * h - e[i] - total) for i in range(1, 8)]
    return lines


@cache
def enumerate_lines() -> tuple[Line, ...]:
    """The 56 lines in catalog order: E_i, L_ij, Q_ij, C_i"""
    lines = tuple(_closed_form_lines())
    for ln in lines:
        if ln.cls.self_intersection != -1 or ln.cls.dot(K) != -1:
            raise LatticeError(f"Closed form for {ln.label} is not a (-1)-class: {ln.cls}")
    if len(lines) != LINE_COUNT:
        raise LatticeError(f"Expected {LINE_COUNT} lines, built {len(lines)}")
    return lines


@cache
def _label_index() -> dict[str, int]:
    return {ln.label: i for i, ln in enumerate(enumerate_lines())}


@cache
def _class_index() -> dict[tuple[int, ...], int]:
    return {ln.cls.coeffs: i for i, ln in enumerate(enumerate_lines())}


def line_index(label: str) -> int:
    try:
        return _label_index()[label]
    except KeyError as e:
        raise LatticeError(
            f"Unknown line label '{label}'. Labels are E1..E7, Lij, Qij (i<j) and C1..C7"
        ) from e


def line(label: str) -> Line:
    return enumerate_lines()[line_index(label)]


def index_of_class(cls: DivisorClass) -> int | None:
    """Catalog index of the line with this class, or None if the class is not a line"""
    return _class_index().get(cls.coeffs)


@cache
def line_matrix() -> NDArray[np.int64]:
    """56 x 8 matrix whose rows are the line classes in catalog order"""
    return np.array([ln.cls.coeffs for ln in enumerate_lines()], dtype=np.int64)


@cache
def intersection_matrix() -> NDArray[np.int64]:
    """56 x 56 matrix of pairwise line intersection numbers"""
    rows = line_matrix()
    matrix: NDArray[np.int64] = (rows * np.array(FORM_DIAGONAL)) @ rows.T
    matrix.setflags(write=False)
    return matrix


def geiser_partner(ln: Line) -> Line:
    """The unique line meeting `ln` with multiplicity 2"""
    row = intersection_matrix()[line_index(ln.label)]
    (partners,) = np.nonzero(row == 2)
    if len(partners) != 1:
        raise LatticeError(f"{ln.label} meets {len(partners)} lines twice, expected one")
    return enumerate_lines()[int(partners[0])]


@frozen
class ContractedModel:
    """A blow-down of X recorded at the level of the Picard lattice.

    The ambient lattice never changes; contracting disjoint (-1)-classes only moves the
    canonical class, so the model is the ordered list of contraction steps.
    """

    steps: tuple[tuple[DivisorClass, ...], ...] = ()

    @property
    def contracted(self) -> tuple[DivisorClass, ...]:
        return tuple(c for step in self.steps for c in step)

    @property
    def current_k(self) -> DivisorClass:
        result = K
        for c in self.contracted:
            result = result - c
        return result

    @property
    def current_k2(self) -> int:
        return self.current_k.self_intersection


def _violation(a: DivisorClass, b: DivisorClass, product: int, why: str) -> DisjointnessViolation:
    return DisjointnessViolation(
        (str(a), str(b)),
        product,
        f"Cannot contract: {why} ({a}) . ({b}) = {product}",
    )


def contract(model: ContractedModel, sigma: Sequence[DivisorClass]) -> ContractedModel:
    """Contracts a set of disjoint (-1)-classes of the current model.

    Args:
        model: the model to contract
        sigma: the classes contracted together in this step

    Returns:
        The model with one more contraction step

    Raises:
        DisjointnessViolation: If a class is not a (-1)-class of the current model or two
            classes (new or previously contracted) meet
    """
    current_k = model.current_k
    for c in sigma:
        if c.self_intersection != -1:
            raise _violation(c, c, c.self_intersection, "class is not a (-1)-class:")
        if c.dot(current_k) != -1:
            raise _violation(c, current_k, c.dot(current_k), "class is not a curve of degree 1:")
        for previous in model.contracted:
            if c.dot(previous) != 0:
                raise _violation(c, previous, c.dot(previous), "class meets a contracted curve:")
    for a, b in combinations(sigma, 2):
        if a.dot(b) != 0:
            raise _violation(a, b, a.dot(b), "classes are not disjoint:")
    contracted = ContractedModel(model.steps + (tuple(sigma),))
    logger.debug("Contracted %d classes, K^2 is now %d", len(sigma), contracted.current_k2)
    return contracted


@cache
def _search_grid() -> NDArray[np.int64]:
    axes = [np.arange(-SEARCH_BOUND_L, SEARCH_BOUND_L + 1)]
    axes += [np.arange(-SEARCH_BOUND_E, SEARCH_BOUND_E + 1)] * 7
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, RANK)
    grid = grid.astype(np.int64)
    grid.setflags(write=False)
    return grid


def _bounded_search(current_k: DivisorClass, contracted: Sequence[DivisorClass]) -> list[DivisorClass]:
    grid = _search_grid()
    twisted = grid * np.array(FORM_DIAGONAL)
    mask = (twisted * grid).sum(axis=1) == -1
    mask &= twisted @ current_k.as_array() == -1
    for c in contracted:
        mask &= twisted @ c.as_array() == 0
    return [DivisorClass(row) for row in grid[mask]]


def residual_lines(model: ContractedModel) -> list[Line]:
    """The (-1)-curves of a contracted model, found by bounded exhaustive search"""
    found = _bounded_search(model.current_k, model.contracted)
    lines = enumerate_lines()
    result: list[Line] = []
    for cls in found:
        index = index_of_class(cls)
        if index is None:
            raise LatticeError(f"Residual search produced {cls}, which is not a line of X")
        result.append(lines[index])
    return sorted(result, key=lambda ln: line_index(ln.label))


def brute_force_lines() -> set[DivisorClass]:
    """All classes with D^2 = -1 and D.K = -1 inside the search bounds"""
    return set(_bounded_search(K, ()))


def witness_chain() -> list[ContractedModel]:
    """Successive contractions of E7, E6, ..., E1, starting from X itself"""
    models = [ContractedModel()]
    for i in range(7, 0, -1):
        models.append(contract(models[-1], [DivisorClass.exceptional(i)]))
    return models
