"""W(E7) as the group of K-fixing isometries of the Picard lattice.

An element is keyed by the permutation it induces on the 56 lines (one byte per line,
`perm[i]` is the catalog index of the image of line i). The action on lines is
faithful, so the permutation determines the 8 x 8 matrix; both are carried on a
`LatticeIsometry`, while large closures store only the raw permutation bytes.
"""

import logging
import math
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from functools import cache
from typing import Literal, Union

import numpy as np
import sympy
from attrs import field, frozen
from numpy.typing import NDArray

from .config import DEFAULT_CLOSURE_CAP, ClosureOptions, SearchOptions
from .errors import CapExceeded, InvalidRoot, NotAnIsometry, ParseError, SearchExhausted
from .piclattice import (
    FORM_DIAGONAL,
    LINE_COUNT,
    RANK,
    ContractedModel,
    DivisorClass,
    K,
    Line,
    contract,
    enumerate_lines,
    index_of_class,
    intersection_matrix,
    line_index,
    line_matrix,
)

logger = logging.getLogger(__name__)

WEYL_E7_ORDER = 2_903_040

IDENTITY_PERM = bytes(range(LINE_COUNT))
_TRANSLATE_TAIL = bytes(range(LINE_COUNT, 256))
_FORM = np.diag(FORM_DIAGONAL).astype(np.int64)


def compose_perms(outer: bytes, inner: bytes) -> bytes:
    """The permutation `outer o inner` (apply `inner` first)"""
    return inner.translate(outer + _TRANSLATE_TAIL)


def invert_perm(p: bytes) -> bytes:
    inverse = bytearray(LINE_COUNT)
    for i, image in enumerate(p):
        inverse[image] = i
    return bytes(inverse)


Matrix = tuple[tuple[int, ...], ...]


def _matrix_from_columns(columns: Sequence[DivisorClass]) -> Matrix:
    return tuple(tuple(col.coeffs[row] for col in columns) for row in range(RANK))


def _image_of_hyperplane(e_images: Sequence[DivisorClass]) -> DivisorClass:
    # L = (E1 + ... + E7 - K) / 3 and isometries fix K
    total = DivisorClass.zero()
    for image in e_images:
        total = total + image
    numerator = total - K
    if any(c % 3 for c in numerator.coeffs):
        raise NotAnIsometry(
            f"Images {[str(e) for e in e_images]} of E1..E7 do not extend to an integral "
            f"isometry fixing K: (sum - K) = {numerator} is not divisible by 3"
        )
    return DivisorClass(c // 3 for c in numerator.coeffs)


@frozen
class LatticeIsometry:
    """An element of W(E7). Equality and hashing use the line permutation only."""

    perm: bytes
    matrix: Matrix = field(eq=False, repr=False)

    @classmethod
    def identity(cls) -> "LatticeIsometry":
        return cls.from_perm(IDENTITY_PERM)

    @classmethod
    def from_matrix(cls, matrix: Matrix | NDArray[np.int64]) -> "LatticeIsometry":
        """Validates an integral matrix and derives its line permutation.

        Raises:
            NotAnIsometry: If the matrix does not preserve the form, does not fix K, or
                does not permute the 56 lines
        """
        m = np.array(matrix, dtype=np.int64)
        if m.shape != (RANK, RANK):
            raise NotAnIsometry(f"Expected an {RANK}x{RANK} matrix, got shape {m.shape}")
        if not np.array_equal(m.T @ _FORM @ m, _FORM):
            raise NotAnIsometry(f"Matrix does not preserve the intersection form:\n{m}")
        if not np.array_equal(m @ K.as_array(), K.as_array()):
            raise NotAnIsometry(f"Matrix does not fix the canonical class:\n{m}")
        images = line_matrix() @ m.T
        perm = bytearray(LINE_COUNT)
        for i, row in enumerate(images):
            index = index_of_class(DivisorClass(row))
            if index is None:
                raise NotAnIsometry(
                    f"Matrix sends line {enumerate_lines()[i].label} to {DivisorClass(row)}, "
                    f"which is not a line"
                )
            perm[i] = index
        return cls(bytes(perm), tuple(tuple(int(v) for v in r) for r in m))

    @classmethod
    def from_perm(cls, perm: bytes) -> "LatticeIsometry":
        """Rebuilds the matrix of a line permutation from the images of E1..E7.

        Raises:
            NotAnIsometry: If the permutation is not induced by a lattice isometry
        """
        if len(perm) != LINE_COUNT or sorted(perm) != list(range(LINE_COUNT)):
            raise NotAnIsometry(f"Not a permutation of the {LINE_COUNT} lines: {perm!r}")
        lines = enumerate_lines()
        e_images = [lines[perm[i]].cls for i in range(7)]
        columns = [_image_of_hyperplane(e_images), *e_images]
        candidate = cls.from_matrix(_matrix_from_columns(columns))
        if candidate.perm != perm:
            raise NotAnIsometry("Line permutation is not induced by a lattice isometry")
        return candidate

    @classmethod
    def from_line_images(cls, images: Mapping[str, str]) -> "LatticeIsometry":
        """Solves the isometry determined by the images of E1..E7.

        Args:
            images: maps each of `E1`..`E7` to the label of its image line

        Raises:
            NotAnIsometry: If the images do not extend to a K-fixing isometry
        """
        missing = [f"E{i}" for i in range(1, 8) if f"E{i}" not in images]
        if missing:
            raise NotAnIsometry(f"Images of {', '.join(missing)} are required")
        lines = enumerate_lines()
        e_images = [lines[line_index(images[f"E{i}"])].cls for i in range(1, 8)]
        columns = [_image_of_hyperplane(e_images), *e_images]
        return cls.from_matrix(_matrix_from_columns(columns))

    def as_array(self) -> NDArray[np.int64]:
        return np.array(self.matrix, dtype=np.int64)

    def __call__(self, d: DivisorClass) -> DivisorClass:
        return DivisorClass(self.as_array() @ d.as_array())

    def image_of(self, ln: Line) -> Line:
        return enumerate_lines()[self.perm[line_index(ln.label)]]

    def __mul__(self, other: "LatticeIsometry") -> "LatticeIsometry":
        """Composition `self o other`"""
        product = compose_perms(self.perm, other.perm)
        m = self.as_array() @ other.as_array()
        return LatticeIsometry(product, tuple(tuple(int(v) for v in r) for r in m))

    def inverse(self) -> "LatticeIsometry":
        # the inverse of an isometry is J M^T J
        m = _FORM @ self.as_array().T @ _FORM
        return LatticeIsometry(invert_perm(self.perm), tuple(tuple(int(v) for v in r) for r in m))

    def __pow__(self, n: int) -> "LatticeIsometry":
        result = LatticeIsometry.identity()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            result = result * base
        return result

    @property
    def order(self) -> int:
        return perm_order(self.perm)

    @property
    def trace(self) -> int:
        return int(np.trace(self.as_array()))

    def is_identity(self) -> bool:
        return self.perm == IDENTITY_PERM

    def fixed_lines(self) -> list[Line]:
        lines = enumerate_lines()
        return [lines[i] for i, image in enumerate(self.perm) if i == image]

    def cycle_type(self) -> tuple[int, ...]:
        return perm_cycle_type(self.perm)


def perm_cycle_type(p: bytes) -> tuple[int, ...]:
    seen = bytearray(LINE_COUNT)
    lengths: list[int] = []
    for start in range(LINE_COUNT):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = 1
            i = p[i]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def perm_order(p: bytes) -> int:
    return math.lcm(*set(perm_cycle_type(p)))


# --- named generators -------------------------------------------------------


@frozen
class Perm:
    """A permutation sigma of {1..7} acting by E_i -> E_sigma(i)"""

    cycles: tuple[tuple[int, ...], ...]

    def mapping(self) -> dict[int, int]:
        images = {i: i for i in range(1, 8)}
        for cycle in self.cycles:
            for position, point in enumerate(cycle):
                if not 1 <= point <= 7:
                    raise ParseError(f"Permutation points must lie in 1..7, got {point}")
                images[point] = cycle[(position + 1) % len(cycle)]
        if sorted(images.values()) != list(range(1, 8)):
            raise ParseError(f"Cycles {self.cycles} do not describe a permutation of 1..7")
        return images


@frozen
class Geiser:
    pass


@frozen
class RootReflection:
    root: DivisorClass


@frozen
class Named:
    letter: Literal["a", "b", "c", "r", "s"]


NamedGenerator = Union[Perm, Geiser, RootReflection, Named]

# images of E1..E7 under s and r; the matrices are solved from these
_S_IMAGES = {**{f"E{i}": f"Q{i}7" for i in range(1, 7)}, "E7": "E7"}
_R_IMAGES = {
    "E1": "Q17",
    "E2": "Q27",
    "E3": "Q37",
    "E4": "L56",
    "E5": "L46",
    "E6": "L45",
    "E7": "E7",
}
_NAMED_PERMS: dict[str, tuple[tuple[int, ...], ...]] = {
    "a": ((1, 2, 3),),
    "b": ((4, 5, 6),),
    "c": ((1, 4), (2, 5), (3, 6)),
}


def _reflection_matrix(root: DivisorClass) -> Matrix:
    columns = []
    for i in range(RANK):
        basis = DivisorClass(1 if j == i else 0 for j in range(RANK))
        columns.append(basis + basis.dot(root) * root)
    return _matrix_from_columns(columns)


def _geiser_matrix() -> Matrix:
    columns = []
    for i in range(RANK):
        basis = DivisorClass(1 if j == i else 0 for j in range(RANK))
        columns.append(basis.dot(K) * K - basis)
    return _matrix_from_columns(columns)


@cache
def _build_cached(named: NamedGenerator) -> LatticeIsometry:
    if isinstance(named, Perm):
        sigma = named.mapping()
        return LatticeIsometry.from_line_images({f"E{i}": f"E{sigma[i]}" for i in range(1, 8)})
    if isinstance(named, Geiser):
        return LatticeIsometry.from_matrix(_geiser_matrix())
    if isinstance(named, RootReflection):
        root = named.root
        if root.self_intersection != -2 or root.dot(K) != 0:
            raise InvalidRoot(
                f"{root} is not a root: need root^2 = -2 and root.K = 0, "
                f"got {root.self_intersection} and {root.dot(K)}"
            )
        return LatticeIsometry.from_matrix(_reflection_matrix(root))
    if named.letter in _NAMED_PERMS:
        return _build_cached(Perm(_NAMED_PERMS[named.letter]))
    if named.letter == "s":
        return LatticeIsometry.from_line_images(_S_IMAGES)
    if named.letter == "r":
        return LatticeIsometry.from_line_images(_R_IMAGES)
    raise ValueError(f"Unknown named generator: {named}")


def build(named: NamedGenerator) -> LatticeIsometry:
    """Builds the isometry of a named generator.

    Raises:
        InvalidRoot: If a reflection root fails root^2 = -2, root.K = 0
        NotAnIsometry: If stated line images do not extend to an isometry
    """
    return _build_cached(named)


def geiser() -> LatticeIsometry:
    return build(Geiser())


def named(letter: Literal["a", "b", "c", "r", "s"]) -> LatticeIsometry:
    return build(Named(letter))


def geiser_twin(g: LatticeIsometry) -> LatticeIsometry:
    """g composed with the Geiser involution; pairs the two lifts of a plane automorphism"""
    return g * geiser()


_CYCLE = re.compile(r"\(([^()]*)\)")


def _parse_factor(text: str) -> LatticeIsometry:
    token = text.strip()
    if token == "geiser":
        return geiser()
    if token == "id":
        return LatticeIsometry.identity()
    kind, _, body = token.partition(":")
    if kind == "perm":
        cycles = tuple(
            tuple(int(p) for p in m.group(1).split()) for m in _CYCLE.finditer(body) if m.group(1)
        )
        if _CYCLE.sub("", body).strip():
            raise ParseError(f"Cannot parse permutation '{body}', expected cycles like (1 2 3)")
        return build(Perm(cycles))
    if kind == "refl":
        return build(RootReflection(DivisorClass.parse(body)))
    if kind == "named" and body in ("a", "b", "c", "r", "s"):
        return named(body)  # type: ignore[arg-type]
    raise ParseError(
        f"Unknown generator '{token}'. Use perm:(..), geiser, refl:<class> or named:a|b|c|r|s"
    )


def parse_generator(text: str) -> LatticeIsometry:
    """Parses one DSL element, a `*`-separated product composed right to left"""
    result = LatticeIsometry.identity()
    for factor in text.split("*"):
        result = result * _parse_factor(factor)
    return result


def parse_generators(text: str) -> list[LatticeIsometry]:
    return [parse_generator(part) for part in text.split(",") if part.strip()]


def coxeter_generators() -> list[LatticeIsometry]:
    """Adjacent transpositions of S7 plus the reflection in L-E1-E2-E3"""
    gens = [build(Perm(((i, i + 1),))) for i in range(1, 7)]
    gens.append(build(RootReflection(DivisorClass.parse("L-E1-E2-E3"))))
    return gens


# --- closures -----------------------------------------------------------------


@frozen
class SubgroupClosure:
    """A finite subgroup of W(E7), stored as the set of its line permutations"""

    generators: tuple[LatticeIsometry, ...]
    keys: frozenset[bytes] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.keys)

    def __contains__(self, g: LatticeIsometry) -> bool:
        return g.perm in self.keys

    def __len__(self) -> int:
        return len(self.keys)

    def sorted_keys(self) -> list[bytes]:
        return sorted(self.keys)

    def elements(self) -> Iterator[LatticeIsometry]:
        """Materialises the elements in a deterministic order"""
        for key in self.sorted_keys():
            yield LatticeIsometry.from_perm(key)


def closure(
    gens: Sequence[LatticeIsometry],
    cap: int = DEFAULT_CLOSURE_CAP,
    log_every: int = 250_000,
) -> SubgroupClosure:
    """Enumerates the subgroup generated by `gens` breadth first.

    Args:
        gens: generating isometries
        cap: the largest order that may be enumerated
        log_every: emit a progress record each time this many new elements were found

    Returns:
        The generated subgroup

    Raises:
        ValueError: If cap is smaller than 1
        CapExceeded: If the group has more than `cap` elements
    """
    if cap < 1:
        raise ValueError(f"Closure cap must be at least 1, got {cap}")
    generator_perms = [g.perm for g in gens]
    seen = {IDENTITY_PERM}
    frontier = [IDENTITY_PERM]
    next_report = log_every
    tail = _TRANSLATE_TAIL
    tables = [p + tail for p in generator_perms]
    while frontier:
        grown: list[bytes] = []
        for x in frontier:
            for table in tables:
                y = x.translate(table)
                if y not in seen:
                    seen.add(y)
                    grown.append(y)
        if len(seen) > cap:
            raise CapExceeded(cap)
        if len(seen) >= next_report:
            logger.debug("Closure has %d elements, frontier %d", len(seen), len(grown))
            next_report = len(seen) + log_every
        frontier = grown
    logger.debug("Closure of %d generators has order %d", len(gens), len(seen))
    return SubgroupClosure(tuple(gens), frozenset(seen))


def closure_with(gens: Sequence[LatticeIsometry], options: ClosureOptions) -> SubgroupClosure:
    return closure(gens, **options.to_closure_kwargs())


def full_weyl_group(options: ClosureOptions | None = None) -> SubgroupClosure:
    return closure_with(coxeter_generators(), options or ClosureOptions())


def subgroup_from_keys(keys: Iterable[bytes]) -> SubgroupClosure:
    """Wraps a set of permutations known to form a group, choosing a small generating set"""
    key_set = frozenset(keys)
    generators: list[LatticeIsometry] = []
    spanned = frozenset({IDENTITY_PERM})
    for key in sorted(key_set):
        if key in spanned:
            continue
        generators.append(LatticeIsometry.from_perm(key))
        spanned = closure(generators, cap=len(key_set)).keys
        if spanned == key_set:
            break
    if spanned != key_set:
        raise ValueError("The given permutations are not closed under composition")
    return SubgroupClosure(tuple(generators), key_set)


def centralizer(g: SubgroupClosure, ambient: SubgroupClosure) -> SubgroupClosure:
    """Elements of `ambient` commuting with every generator of `g`"""
    gens = [k.perm for k in g.generators if not k.is_identity()]
    if not gens:
        return ambient
    keys = [
        h
        for h in ambient.keys
        if all(compose_perms(h, k) == compose_perms(k, h) for k in gens)
    ]
    logger.debug("Centralizer has order %d inside a group of order %d", len(keys), ambient.order)
    return subgroup_from_keys(keys)


def normalizer(g: SubgroupClosure, ambient: SubgroupClosure) -> SubgroupClosure:
    """Elements of `ambient` conjugating every generator of `g` back into `g`"""
    gens = [k.perm for k in g.generators if not k.is_identity()]
    if not gens:
        return ambient
    keys = [
        h
        for h in ambient.keys
        if all(compose_perms(compose_perms(h, k), invert_perm(h)) in g.keys for k in gens)
    ]
    return subgroup_from_keys(keys)


def conjugate_in(
    g: LatticeIsometry, h: LatticeIsometry, ambient: SubgroupClosure
) -> LatticeIsometry | None:
    """Finds w in `ambient` with w g w^-1 = h, scanning in a deterministic order.

    Pairs with different line cycle types or matrix traces are rejected without a scan.
    """
    if g == h:
        return LatticeIsometry.identity()
    if g.cycle_type() != h.cycle_type() or g.trace != h.trace:
        return None
    for w in ambient.sorted_keys():
        if compose_perms(w, g.perm) == compose_perms(h.perm, w):
            return LatticeIsometry.from_perm(w)
    return None


def orbits(group: SubgroupClosure, points: Sequence[Line] | None = None) -> list[tuple[Line, ...]]:
    """Full orbits of `points` (all 56 lines by default) under the group.

    An orbit may leave `points`; points sharing an orbit give it once. Orbits are
    listed by their first catalog index and sorted internally.
    """
    lines = enumerate_lines()
    indices = (
        sorted(line_index(p.label) for p in points) if points is not None else range(LINE_COUNT)
    )
    return [tuple(lines[i] for i in orbit) for orbit in index_orbits(group, indices)]


def index_orbits(group: SubgroupClosure, indices: Iterable[int]) -> list[tuple[int, ...]]:
    gens = [g.perm for g in group.generators]
    wanted = set(indices)
    seen: set[int] = set()
    result: list[tuple[int, ...]] = []
    for start in sorted(wanted):
        if start in seen:
            continue
        orbit = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for p in gens:
                j = p[i]
                if j not in orbit:
                    orbit.add(j)
                    stack.append(j)
        seen |= orbit
        result.append(tuple(sorted(orbit)))
    return result


# --- invariant lattices -----------------------------------------------------


def _stacked_fixed_conditions(group: SubgroupClosure) -> sympy.Matrix:
    blocks = [sympy.Matrix(g.matrix) - sympy.eye(RANK) for g in group.generators]
    if not blocks:
        return sympy.zeros(1, RANK)
    return sympy.Matrix.vstack(*blocks)


def invariant_rank(group: SubgroupClosure) -> int:
    """Rank of Pic(X)^H: the kernel dimension of the stacked blocks (M_g - I)"""
    return RANK - int(_stacked_fixed_conditions(group).rank())


def invariant_rank_on_k_perp(group: SubgroupClosure) -> int:
    """Rank of the H-fixed part of the orthogonal complement of K"""
    k_row = sympy.Matrix([[s * c for s, c in zip(FORM_DIAGONAL, K.coeffs)]])
    stacked = sympy.Matrix.vstack(_stacked_fixed_conditions(group), k_row)
    return RANK - int(stacked.rank())


def invariant_basis(group: SubgroupClosure) -> list[DivisorClass]:
    """An integral basis certificate of Pic(X)^H (over Q)"""
    basis: list[DivisorClass] = []
    for vector in _stacked_fixed_conditions(group).nullspace():
        scale = math.lcm(*(int(sympy.fraction(v)[1]) for v in vector))
        basis.append(DivisorClass(int(v * scale) for v in vector))
    return basis


def in_rational_span(target: DivisorClass, basis: Sequence[DivisorClass]) -> bool:
    if not basis:
        return target == DivisorClass.zero()
    columns = sympy.Matrix([list(b.coeffs) for b in basis]).T
    augmented = columns.row_join(sympy.Matrix(target.coeffs))
    return bool(columns.rank() == augmented.rank())


# --- equivariant minimal models ---------------------------------------------


@frozen
class MinimalModelResult:
    """Best K^2 reachable by contracting invariant disjoint sets of lines"""

    k2: int
    chain: tuple[tuple[Line, ...], ...]
    states_visited: int

    def model(self) -> ContractedModel:
        """Replays the chain through exact lattice contraction"""
        m = ContractedModel()
        for step in self.chain:
            m = contract(m, [ln.cls for ln in step])
        return m


def minimal_model_search(
    gal: SubgroupClosure, options: SearchOptions | None = None
) -> MinimalModelResult:
    """Depth-first search over gal-invariant sets of pairwise disjoint lines.

    Each step contracts one orbit whose lines are pairwise disjoint and disjoint from
    everything contracted before; unions of orbits are reached as successive steps.

    Raises:
        SearchExhausted: If more than `options.max_states` states would be visited
    """
    opts = options or SearchOptions()
    inter = intersection_matrix()
    candidates: list[tuple[int, int, tuple[int, ...]]] = []
    for orbit in index_orbits(gal, range(LINE_COUNT)):
        if any(inter[i, j] != 0 for i in orbit for j in orbit if i != j):
            continue
        mask = sum(1 << i for i in orbit)
        conflict = 0
        for i in orbit:
            for j in np.nonzero(inter[i])[0]:
                conflict |= 1 << int(j)
        candidates.append((mask, conflict, orbit))

    lines = enumerate_lines()
    best_k2 = 2
    best_chain: list[tuple[int, ...]] = []
    visited: set[int] = set()
    chain: list[tuple[int, ...]] = []

    def explore(state: int, k2: int) -> bool:
        nonlocal best_k2, best_chain
        if k2 > best_k2:
            best_k2, best_chain = k2, list(chain)
            if best_k2 >= opts.early_exit_k2:
                return True
        for mask, conflict, orbit in candidates:
            if state & conflict:
                continue
            nxt = state | mask
            if nxt in visited:
                continue
            visited.add(nxt)
            if len(visited) > opts.max_states:
                raise SearchExhausted(
                    f"Minimal model search visited more than {opts.max_states} states; "
                    f"raise SearchOptions.max_states"
                )
            chain.append(orbit)
            done = explore(nxt, k2 + len(orbit))
            chain.pop()
            if done:
                return True
        return False

    explore(0, 2)
    logger.debug("Minimal model search: K^2 = %d after %d states", best_k2, len(visited))
    return MinimalModelResult(
        k2=best_k2,
        chain=tuple(tuple(lines[i] for i in step) for step in best_chain),
        states_visited=len(visited),
    )
