"""Boolean functions, dual-layer tasks and the combinatorics around them.

Bit-index convention used everywhere in the package: the input bits
``a1 ... ak`` of a k-ary function address the truth table at
``sum(a_i * 2**(k - i))``, i.e. ``a1`` is the most significant bit.  For
two bits this is ``index = 2*a1 + a2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "InputShapeError",
    "UnsupportedArityError",
    "BooleanFunction",
    "FunctionClass",
    "DualLayerTask",
    "QuadGroup",
    "QuadScan",
    "ALIASES",
    "bits_of",
    "index_of",
    "all_strings",
    "classify_function",
    "associative_form",
    "evaluate_task",
    "output_ratio",
    "quad_groups",
    "quad_group_scan",
    "enumerate_tasks",
    "corollary1_sufficient_trivial",
    "parse_function",
    "parse_task",
]


class InputShapeError(ValueError):
    """Input strings or tables have the wrong length."""


class UnsupportedArityError(ValueError):
    """The operation is only defined for a specific arity."""


def bits_of(index: int, k: int) -> tuple[int, ...]:
    """Most-significant-first bit tuple of ``index`` on ``k`` bits."""
    return tuple((index >> (k - 1 - i)) & 1 for i in range(k))


def index_of(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (int(b) & 1)
    return out


def all_strings(k: int) -> list[tuple[int, ...]]:
    return [bits_of(i, k) for i in range(2**k)]


def _as_bits(s, n: int | None = None) -> tuple[int, ...]:
    if isinstance(s, str):
        if any(c not in "01" for c in s):
            raise InputShapeError(f"not a bit string: {s!r}")
        out = tuple(int(c) for c in s)
    elif isinstance(s, int) and n is not None:
        if not 0 <= s < 2**n:
            raise InputShapeError(f"{s} does not fit on {n} bits")
        out = bits_of(s, n)
    else:
        out = tuple(int(b) for b in s)
        if any(b not in (0, 1) for b in out):
            raise InputShapeError(f"not a bit sequence: {s!r}")
    if n is not None and len(out) != n:
        raise InputShapeError(f"expected {n} bits, got {len(out)}")
    return out


@dataclass(frozen=True)
class BooleanFunction:
    """A k-ary Boolean function stored as its truth table."""

    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise InputShapeError("arity must be positive")
        table = tuple(int(v) for v in self.table)
        if len(table) != 2**self.arity:
            raise InputShapeError(
                f"table of length {len(table)} for arity {self.arity}"
            )
        if any(v not in (0, 1) for v in table):
            raise InputShapeError("table entries must be bits")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_bits(cls, s: str) -> "BooleanFunction":
        k = len(s).bit_length() - 1
        if len(s) != 2**k or k < 1:
            raise InputShapeError(f"table length {len(s)} is not a power of two")
        return cls(k, _as_bits(s))

    @classmethod
    def from_callable(cls, arity: int, fn) -> "BooleanFunction":
        return cls(arity, tuple(int(fn(*a)) & 1 for a in all_strings(arity)))

    def __call__(self, *bits: int) -> int:
        if len(bits) == 1 and not isinstance(bits[0], int):
            bits = tuple(bits[0])
        if len(bits) != self.arity:
            raise InputShapeError(f"expected {self.arity} bits, got {len(bits)}")
        return self.table[index_of(bits)]

    @property
    def bits(self) -> str:
        return "".join(map(str, self.table))

    @property
    def ones(self) -> int:
        return sum(self.table)

    def negated_inputs(self, mask: Sequence[int]) -> "BooleanFunction":
        """``a -> self(a XOR mask)``."""
        mask = tuple(mask)
        return BooleanFunction.from_callable(
            self.arity, lambda *a: self(*(ai ^ mi for ai, mi in zip(a, mask)))
        )

    def complement(self) -> "BooleanFunction":
        return BooleanFunction(self.arity, tuple(1 - v for v in self.table))

    def __str__(self) -> str:
        name = _NAME_OF.get((self.arity, self.table))
        return name if name else self.bits


def _fold(op, arity: int) -> BooleanFunction:
    def fn(*a):
        acc = a[0]
        for v in a[1:]:
            acc = op(acc, v)
        return acc

    return BooleanFunction.from_callable(arity, fn)


_BINARY_OPS = {
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
}


def _alias(name: str, arity: int) -> BooleanFunction:
    name = name.upper()
    if name in ("CONST0", "CONST1"):
        return BooleanFunction(arity, (int(name[-1]),) * 2**arity)
    if name in _BINARY_OPS:
        return _fold(_BINARY_OPS[name], arity)
    if name in ("NAND", "NOR", "XNOR"):
        return _alias(name[1:] if name != "XNOR" else "XOR", arity).complement()
    raise KeyError(name)


ALIASES = ("OR", "AND", "XOR", "XNOR", "NOR", "NAND", "CONST0", "CONST1")
_NAME_OF = {(2, _alias(a, 2).table): a for a in ALIASES}


@dataclass(frozen=True)
class FunctionClass:
    kind: str  # "constant" | "balanced" | "unbalanced"
    single_bit: bool
    symmetric: bool
    relevant: tuple[int, ...]


def _relevant_positions(g: BooleanFunction) -> tuple[int, ...]:
    out = []
    for i in range(g.arity):
        flip = 1 << (g.arity - 1 - i)
        if any(g.table[j] != g.table[j ^ flip] for j in range(2**g.arity)):
            out.append(i)
    return tuple(out)


def _permutation_invariant(g: BooleanFunction) -> bool:
    # invariant under all permutations <=> depends only on the Hamming weight
    by_weight: dict[int, int] = {}
    for a in all_strings(g.arity):
        w = sum(a)
        if by_weight.setdefault(w, g(*a)) != g(*a):
            return False
    return True


def classify_function(g: BooleanFunction) -> FunctionClass:
    """Constant / balanced / unbalanced plus the single-bit and symmetric flags.

    ``single_bit`` means the output depends on exactly one input position.
    ``symmetric`` is invariance of the truth table under every permutation
    of the arguments; the complemented form ``g(not a1, ..., not ak)`` of a
    permutation-invariant function is again permutation invariant, so the
    complemented-form alternative adds nothing to this test.
    """
    ones = g.ones
    size = 2**g.arity
    if ones in (0, size):
        kind = "constant"
    elif 2 * ones == size:
        kind = "balanced"
    else:
        kind = "unbalanced"
    relevant = _relevant_positions(g)
    return FunctionClass(
        kind=kind,
        single_bit=len(relevant) == 1,
        symmetric=_permutation_invariant(g),
        relevant=relevant,
    )


def associative_form(g: BooleanFunction) -> tuple[str, int] | None:
    """Write ``g`` as ``c XOR (a1 * a2 * ... * ak)`` for ``*`` in AND/OR/XOR.

    Returns ``(op_name, c)`` or ``None``.  These are exactly the
    permutation-invariant functions whose fold can be regrouped between
    the two parties, which is what the two-way parity-style strategies need.
    """
    for name, op in _BINARY_OPS.items():
        core = _fold(op, g.arity)
        if core.table == g.table:
            return name, 0
        if core.complement().table == g.table:
            return name, 1
    return None


@dataclass(frozen=True)
class DualLayerTask:
    """``(F, f)`` with ``F`` on n bits and ``f`` on two bits."""

    outer: BooleanFunction
    inner: BooleanFunction

    def __post_init__(self):
        if self.inner.arity != 2:
            raise UnsupportedArityError("inner function must have arity 2")

    @property
    def n(self) -> int:
        return self.outer.arity

    def __call__(self, x, y) -> int:
        return evaluate_task(self, x, y)

    def table(self) -> tuple[tuple[int, ...], ...]:
        """Output matrix indexed ``[x][y]`` with strings as integers."""
        n = self.n
        strs = all_strings(n)
        return tuple(tuple(evaluate_task(self, x, y) for y in strs) for x in strs)

    def __str__(self) -> str:
        return f"F:{self.outer},f:{self.inner}"


def evaluate_task(task: DualLayerTask, x, y) -> int:
    x = _as_bits(x, task.n)
    y = _as_bits(y, task.n)
    z = tuple(task.inner(xi, yi) for xi, yi in zip(x, y))
    return task.outer(*z)


def output_ratio(task: DualLayerTask) -> tuple[int, int]:
    """``(#zeros, #ones)`` of the task over all ``4**n`` input pairs."""
    ones = sum(sum(row) for row in task.table())
    return 4**task.n - ones, ones


@dataclass(frozen=True)
class QuadGroup:
    x_pair: tuple[tuple[int, ...], tuple[int, ...]]
    y_pair: tuple[tuple[int, ...], tuple[int, ...]]

    def inputs(self):
        return [(x, y) for x in self.x_pair for y in self.y_pair]


@dataclass(frozen=True)
class QuadScan:
    ratios: dict[QuadGroup, tuple[int, int]]
    has_1_3_group: bool

    @property
    def groups_scanned(self) -> int:
        return len(self.ratios)


def quad_groups(n: int = 2) -> list[QuadGroup]:
    strs = all_strings(n)
    pairs = list(itertools.combinations(strs, 2))
    return [QuadGroup(xp, yp) for xp in pairs for yp in pairs]


def quad_group_scan(task: DualLayerTask) -> QuadScan:
    if task.n != 2:
        raise UnsupportedArityError("quad-group scan is defined for n = 2")
    ratios = {}
    for g in quad_groups(2):
        ones = sum(evaluate_task(task, x, y) for x, y in g.inputs())
        ratios[g] = (4 - ones, ones)
    has = any(r in ((1, 3), (3, 1)) for r in ratios.values())
    return QuadScan(ratios, has)


def enumerate_tasks(n: int = 2, outers: Iterable[BooleanFunction] | None = None) -> Iterator[DualLayerTask]:
    """All ``(F, f)`` pairs for n = 2; for larger n, pair each supplied F with all 16 f."""
    if n < 2:
        raise UnsupportedArityError("n must be at least 2")
    inners = [BooleanFunction(2, bits_of(i, 4)) for i in range(16)]
    if outers is None:
        if n != 2:
            raise UnsupportedArityError("full enumeration is only supported for n = 2")
        outers = [BooleanFunction(2, bits_of(i, 4)) for i in range(16)]
    for F in outers:
        if F.arity != n:
            raise InputShapeError(f"outer function of arity {F.arity}, expected {n}")
        for f in inners:
            yield DualLayerTask(F, f)


def _literal_form(f: BooleanFunction, op: str) -> bool:
    core = _BINARY_OPS[op]
    for m1, m2 in itertools.product((0, 1), repeat=2):
        cand = BooleanFunction.from_callable(2, lambda a, b: core(a ^ m1, b ^ m2))
        if cand.table == f.table:
            return True
    return False


def corollary1_sufficient_trivial(task: DualLayerTask) -> bool:
    """Sufficient triviality criteria; also necessary when n = 2.

    (i) a constant function, (ii) a single-bit function, or (iii) ``F``
    is ``c XOR fold(*)`` for an associative ``*`` and ``f`` is ``*`` applied
    to (possibly negated) arguments.  Then
    ``F(z) = c XOR (*_i l1(x_i)) * (*_i l2(y_i))`` and one bit per party
    suffices.
    """
    F, f = task.outer, task.inner
    cF, cf = classify_function(F), classify_function(f)
    if cF.kind == "constant" or cf.kind == "constant":
        return True
    if cF.single_bit or cf.single_bit:
        return True
    form = associative_form(F)
    return form is not None and _literal_form(f, form[0])


def parse_function(text: str, arity: int) -> BooleanFunction:
    """Parse an alias, a most-significant-first bit string or a ``0x`` hex string."""
    s = text.strip()
    if s.upper() in ALIASES:
        return _alias(s, arity)
    if s.lower().startswith("0x"):
        width = 2**arity
        value = int(s, 16)
        if value >= 2**width:
            raise InputShapeError(f"{s} does not fit a table of {width} bits")
        return BooleanFunction(arity, bits_of(value, width))
    g = BooleanFunction.from_bits(s)
    if g.arity != arity:
        raise InputShapeError(f"table {s} has arity {g.arity}, expected {arity}")
    return g


def parse_task(literal: str, n: int | None = None) -> DualLayerTask:
    """Parse ``F:<table-or-alias>,f:<table-or-alias>``.

    Without ``n`` the arity of ``F`` is taken from its bit string (aliases
    default to n = 2).
    """
    parts = dict(p.split(":", 1) for p in literal.replace(" ", "").split(","))
    if set(parts) != {"F", "f"}:
        raise InputShapeError(f"bad task literal: {literal!r}")
    fs = parts["F"]
    if n is None:
        if fs.upper() in ALIASES:
            n = 2
        elif fs.lower().startswith("0x"):
            n = (4 * (len(fs) - 2)).bit_length() - 1
        else:
            n = len(fs).bit_length() - 1
    return DualLayerTask(parse_function(fs, n), parse_function(parts["f"], 2))
