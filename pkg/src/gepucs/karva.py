"""Karva genes: fixed-length symbol strings that decode to expression trees.

A gene is a head (functions or terminals) followed by a tail (terminals
only).  The tail is long enough that every gene decodes to a complete
tree, so no repair step is ever needed.  Decoding is breadth-first: the
first symbol is the root and each following symbol fills the next open
argument slot, reading left to right.  Symbols past the last filled slot
are non-coding.

Random numeric constants use a placeholder terminal ``?``.  Each gene
carries a Dc region (one constant index per tail position) and an array
of real constants; the k-th ``?`` met while decoding takes the value
``constants[dc[k]]``.

Arithmetic is *not* protected: division by zero, ``ln`` of a negative
number and friends produce ``inf``/``nan`` which propagate to the result.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

CONSTANT = "?"


class KarvaError(ValueError):
    """Base class for gene construction and decoding errors."""


class MalformedGeneError(KarvaError):
    pass


class MissingBindingError(KarvaError, KeyError):
    pass


@dataclass(frozen=True)
class FunctionSymbol:
    id: str
    arity: int
    semantics: str

    def __post_init__(self):
        expected = _ARITY.get(self.semantics)
        if expected is None:
            raise KarvaError(f"unknown function semantics {self.semantics!r}")
        if self.arity != expected:
            raise KarvaError(
                f"{self.semantics} has arity {expected}, got {self.arity}"
            )

    def apply(self, *args):
        return _IMPL[self.semantics](*args)


@dataclass(frozen=True)
class TerminalSymbol:
    """An input variable (``index`` >= 0) or the constant placeholder."""

    id: str
    index: int | None = None

    @property
    def is_constant(self) -> bool:
        return self.index is None


_ARITY = {
    "add": 2, "sub": 2, "mul": 2, "div": 2,
    "neg": 1, "sin": 1, "cos": 1, "sqrt": 1, "ln": 1, "exp": 1,
}

_IMPL: dict[str, Callable] = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "ln": np.log,
    "exp": np.exp,
}

_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}

#: Built-in symbols, keyed by token.
FUNCTIONS: dict[str, FunctionSymbol] = {
    s.id: s
    for s in (
        FunctionSymbol("+", 2, "add"),
        FunctionSymbol("-", 2, "sub"),
        FunctionSymbol("*", 2, "mul"),
        FunctionSymbol("/", 2, "div"),
        FunctionSymbol("~", 1, "neg"),
        FunctionSymbol("s", 1, "sin"),
        FunctionSymbol("c", 1, "cos"),
        FunctionSymbol("q", 1, "sqrt"),
        FunctionSymbol("l", 1, "ln"),
        FunctionSymbol("e", 1, "exp"),
    )
}
_BY_NAME = {s.semantics: s for s in FUNCTIONS.values()}

DEFAULT_FUNCTIONS = ("+", "-", "*", "/")


def function(key: str) -> FunctionSymbol:
    """Look up a built-in function by token (``"+"``) or name (``"add"``)."""
    if key in FUNCTIONS:
        return FUNCTIONS[key]
    if key in _BY_NAME:
        return _BY_NAME[key]
    raise KarvaError(f"unknown function {key!r}")


@dataclass(frozen=True)
class FunctionSet:
    functions: tuple[FunctionSymbol, ...]

    def __post_init__(self):
        ids = [f.id for f in self.functions]
        if len(set(ids)) != len(ids):
            raise KarvaError(f"duplicate function ids in {ids}")

    @classmethod
    def of(cls, keys: Iterable[str] = DEFAULT_FUNCTIONS) -> FunctionSet:
        return cls(tuple(function(k) for k in keys))

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.functions)

    @cached_property
    def max_arity(self) -> int:
        return max((f.arity for f in self.functions), default=1)

    @cached_property
    def _by_id(self) -> dict[str, FunctionSymbol]:
        return {f.id: f for f in self.functions}

    def get(self, token: str) -> FunctionSymbol | None:
        return self._by_id.get(token)


def tail_length(head_length: int, max_arity: int) -> int:
    """Tail size that guarantees closure: ``h * (a_max - 1) + 1``."""
    return head_length * (max_arity - 1) + 1


@dataclass(frozen=True)
class Gene:
    symbols: tuple[str, ...]
    head_length: int
    tail_length: int
    dc: tuple[int, ...] = ()
    constants: tuple[float, ...] = ()

    def __post_init__(self):
        if self.head_length < 1 or self.tail_length < 1:
            raise MalformedGeneError("head and tail lengths must be positive")
        if len(self.symbols) != self.head_length + self.tail_length:
            raise MalformedGeneError(
                f"gene has {len(self.symbols)} symbols, expected "
                f"{self.head_length + self.tail_length}"
            )
        if self.dc and len(self.dc) != self.tail_length:
            raise MalformedGeneError("Dc region must match the tail length")
        if self.dc and not self.constants:
            raise MalformedGeneError("Dc region given without constants")
        if any(not 0 <= i < len(self.constants) for i in self.dc):
            raise MalformedGeneError("Dc index out of range")

    @property
    def head(self) -> tuple[str, ...]:
        return self.symbols[: self.head_length]

    @property
    def tail(self) -> tuple[str, ...]:
        return self.symbols[self.head_length:]

    def validate(self, functions: FunctionSet, terminals: Sequence[str]) -> None:
        """Check the tail-closure invariant against a symbol alphabet."""
        known = set(terminals)
        for pos, tok in enumerate(self.symbols):
            if tok in known:
                continue
            if functions.get(tok) is None:
                raise MalformedGeneError(f"unknown symbol {tok!r} at {pos}")
            if pos >= self.head_length:
                raise MalformedGeneError(f"function {tok!r} in tail at {pos}")
        if CONSTANT in self.symbols and not self.dc:
            raise MalformedGeneError("constant placeholder without Dc region")
        if self.tail_length < tail_length(self.head_length, functions.max_arity):
            raise MalformedGeneError("tail too short for the function set")


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[Gene, ...]
    linking: FunctionSymbol = FUNCTIONS["+"]

    def __post_init__(self):
        if not self.genes:
            raise MalformedGeneError("a chromosome needs at least one gene")
        if self.linking.arity != 2:
            raise KarvaError("linking function must be binary")
        shape = {(g.head_length, g.tail_length, bool(g.dc)) for g in self.genes}
        if len(shape) != 1:
            raise MalformedGeneError("genes must share head and tail lengths")

    @property
    def head_length(self) -> int:
        return self.genes[0].head_length

    @property
    def tail_length(self) -> int:
        return self.genes[0].tail_length


@dataclass(frozen=True)
class ExprTree:
    node: FunctionSymbol | TerminalSymbol | float
    children: tuple[ExprTree, ...] = field(default=())

    def __post_init__(self):
        arity = self.node.arity if isinstance(self.node, FunctionSymbol) else 0
        if len(self.children) != arity:
            raise KarvaError(
                f"node {self.node!r} needs {arity} children, got {len(self.children)}"
            )

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


def decode(
    gene: Gene, functions: FunctionSet, terminals: Sequence[str] | None = None
) -> ExprTree:
    """Build the expression tree of a gene by breadth-first slot filling.

    ``terminals`` lists the input-variable tokens in feature order; if it is
    omitted, any token that is not a function is taken as a variable.
    """
    index = {t: i for i, t in enumerate(terminals)} if terminals is not None else None
    syms = gene.symbols
    arities = []
    # Walk the string once to find the coding region.
    need, pos = 1, 0
    while need:
        if pos >= len(syms):
            raise MalformedGeneError("gene ends before the tree is complete")
        tok = syms[pos]
        f = functions.get(tok)
        a = f.arity if f is not None else 0
        if f is None and tok != CONSTANT and index is not None and tok not in index:
            raise MalformedGeneError(f"unknown symbol {tok!r} at {pos}")
        arities.append(a)
        need += a - 1
        pos += 1
    n_coding = pos

    # Children of node i occupy a contiguous run in level order.
    first_child = [0] * n_coding
    nxt = 1
    for i, a in enumerate(arities):
        first_child[i] = nxt
        nxt += a

    # Placeholders take Dc entries in reading order.
    leaves: list[ExprTree | None] = [None] * n_coding
    k = 0
    for i in range(n_coding):
        tok = syms[i]
        if arities[i]:
            continue
        if tok == CONSTANT:
            if k >= len(gene.dc):
                raise MalformedGeneError("more placeholders than Dc entries")
            leaves[i] = ExprTree(float(gene.constants[gene.dc[k]]))
            k += 1
        else:
            idx = index[tok] if index is not None else -1
            leaves[i] = ExprTree(TerminalSymbol(tok, idx))

    built: list[ExprTree | None] = [None] * n_coding
    for i in range(n_coding - 1, -1, -1):
        a = arities[i]
        if a == 0:
            built[i] = leaves[i]
        else:
            kids = tuple(built[first_child[i] + j] for j in range(a))
            built[i] = ExprTree(functions.get(syms[i]), kids)
    return built[0]


def coding_length(gene: Gene, functions: FunctionSet) -> int:
    need, pos = 1, 0
    while need:
        f = functions.get(gene.symbols[pos])
        need += (f.arity if f is not None else 0) - 1
        pos += 1
    return pos


def evaluate_tree(tree: ExprTree, bindings: Mapping[str, object]):
    """Evaluate in float64.  Bindings may be scalars or equal-length arrays."""
    with np.errstate(all="ignore"):
        return _eval(tree, bindings)


def _eval(tree: ExprTree, bindings):
    node = tree.node
    if isinstance(node, FunctionSymbol):
        return node.apply(*(_eval(c, bindings) for c in tree.children))
    if isinstance(node, TerminalSymbol):
        try:
            value = bindings[node.id]
        except KeyError:
            raise MissingBindingError(f"no value bound to terminal {node.id!r}") from None
        return np.asarray(value, dtype=np.float64)
    return np.float64(node)


def decode_chromosome(
    chrom: Chromosome, functions: FunctionSet, terminals: Sequence[str] | None = None
) -> list[ExprTree]:
    return [decode(g, functions, terminals) for g in chrom.genes]


def evaluate_chromosome(
    chrom: Chromosome,
    bindings: Mapping[str, object],
    functions: FunctionSet,
    terminals: Sequence[str] | None = None,
):
    """Fold the linking function left to right over the per-gene values."""
    values = [evaluate_tree(t, bindings) for t in decode_chromosome(chrom, functions, terminals)]
    with np.errstate(all="ignore"):
        return reduce(chrom.linking.apply, values)


def format_constant(value: float) -> str:
    # repr gives the shortest string that round-trips the float exactly.
    text = repr(float(value))
    return f"({text})" if text.startswith("-") else text


def to_infix(tree: ExprTree) -> str:
    node = tree.node
    if isinstance(node, TerminalSymbol):
        return node.id
    if not isinstance(node, FunctionSymbol):
        return format_constant(node)
    args = [to_infix(c) for c in tree.children]
    if node.semantics in _INFIX:
        return f"({args[0]}{_INFIX[node.semantics]}{args[1]})"
    if node.semantics == "neg":
        return f"(-{args[0]})"
    return f"{node.semantics}({args[0]})"


def chromosome_infix(chrom: Chromosome, functions: FunctionSet, terminals=None) -> str:
    trees = decode_chromosome(chrom, functions, terminals)
    parts = [to_infix(t) for t in trees]
    op = _INFIX.get(chrom.linking.semantics, chrom.linking.semantics)
    return reduce(lambda a, b: f"({a}{op}{b})", parts)


def encode(
    tree: ExprTree,
    head_length: int,
    functions: FunctionSet,
    pad: str,
    constants: Sequence[float] = (),
) -> Gene:
    """Write a tree as a K-expression; the inverse of :func:`decode`.

    Literal constants become ``?`` placeholders pointing into
    ``constants`` (every literal must appear there).  Unused positions are
    filled with the terminal ``pad``.
    """
    order: list[ExprTree] = []
    level = [tree]
    while level:
        order.extend(level)
        level = [c for t in level for c in t.children]

    tokens, dc = [], []
    for i, t in enumerate(order):
        node = t.node
        if isinstance(node, FunctionSymbol):
            if i >= head_length:
                raise MalformedGeneError(
                    f"function at position {i} does not fit a head of {head_length}"
                )
            tokens.append(node.id)
        elif isinstance(node, TerminalSymbol):
            tokens.append(node.id)
        else:
            try:
                dc.append(list(constants).index(node))
            except ValueError:
                raise KarvaError(f"constant {node!r} missing from constants") from None
            tokens.append(CONSTANT)

    t_len = tail_length(head_length, functions.max_arity)
    total = head_length + t_len
    if len(tokens) > total:
        raise MalformedGeneError("tree does not fit the gene")
    tokens += [pad] * (total - len(tokens))
    if constants:
        dc += [0] * (t_len - len(dc))
    return Gene(tuple(tokens), head_length, t_len, tuple(dc), tuple(float(c) for c in constants))
