import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gepucs.karva import (
    CONSTANT,
    FUNCTIONS,
    Chromosome,
    ExprTree,
    FunctionSet,
    FunctionSymbol,
    Gene,
    KarvaError,
    MalformedGeneError,
    MissingBindingError,
    TerminalSymbol,
    chromosome_infix,
    coding_length,
    decode,
    encode,
    evaluate_chromosome,
    evaluate_tree,
    tail_length,
    to_infix,
)

from conftest import ALL, eval_infix, random_gene_symbols, rel_close

ARITH = FunctionSet.of("+-*/")
TRIG_SET = FunctionSet.of(["+", "*", "s"])


def gene(text, h, functions=ARITH, dc=(), constants=()):
    syms = tuple(text.split())
    return Gene(syms, h, len(syms) - h, dc, constants)


@pytest.mark.parametrize("h, a, t", [(3, 2, 4), (1, 1, 1), (6, 2, 7), (5, 3, 11)])
def test_tail_length(h, a, t):
    assert tail_length(h, a) == t


class TestSymbols:
    def test_arity_must_match_semantics(self):
        with pytest.raises(KarvaError):
            FunctionSymbol("+", 1, "add")
        with pytest.raises(KarvaError):
            FunctionSymbol("s", 2, "sin")

    def test_duplicate_ids_rejected(self):
        with pytest.raises(KarvaError):
            FunctionSet((FUNCTIONS["+"], FunctionSymbol("+", 2, "mul")))

    def test_lookup_by_name_or_token(self):
        assert FunctionSet.of(["add", "*"]).ids == ("+", "*")
        with pytest.raises(KarvaError):
            FunctionSet.of(["pow"])


class TestDecode:
    def test_level_order(self):
        tree = decode(gene("+ * a b c d e", 3), ARITH)
        assert to_infix(tree) == "((b*c)+a)"
        assert evaluate_tree(tree, {"a": 1, "b": 2, "c": 3}) == 7

    def test_root_terminal(self):
        g = gene("a + * b c d e", 3)
        tree = decode(g, ARITH)
        assert tree.size() == 1 and tree.node.id == "a"
        assert coding_length(g, ARITH) == 1

    def test_trig_demo_gene(self):
        # Z^2 (sin x + C1), head 6 over {+, *, sin}
        syms = "* * + Z Z s C1 x x x x x x"
        tree = decode(gene(syms, 6), TRIG_SET, ["Z", "x", "C1"])
        assert to_infix(tree) == "((Z*Z)*(sin(x)+C1))"
        assert evaluate_tree(tree, {"Z": 2, "x": 0, "C1": 1}) == 4

    def test_unknown_symbol(self):
        with pytest.raises(MalformedGeneError):
            decode(gene("+ q a b c d e", 3), FunctionSet.of("+"), ["a", "b", "c", "d", "e"])

    def test_constants_follow_dc_in_reading_order(self):
        g = gene("+ ? * ? a a a", 3, dc=(2, 0, 1, 1), constants=(10.0, 20.0, 30.0))
        tree = decode(g, ARITH, ["a"])
        # + (c0) (* c1 a): c0 = constants[dc[0]] = 30, c1 = constants[dc[1]] = 10
        assert to_infix(tree) == "(30.0+(10.0*a))"

    def test_gene_shape_checks(self):
        with pytest.raises(MalformedGeneError):
            Gene(("a", "b"), 2, 3)
        g = gene("+ a * b c", 2)
        with pytest.raises(MalformedGeneError, match="tail"):
            g.validate(ARITH, ["a", "b", "c"])


class TestEvaluate:
    def test_unprotected_division(self):
        tree = decode(gene("/ a b a a", 1), ARITH)
        assert math.isinf(evaluate_tree(tree, {"a": 1.0, "b": 0.0}))
        assert math.isnan(evaluate_tree(tree, {"a": 0.0, "b": 0.0}))

    def test_unprotected_log_sqrt(self):
        ln = decode(gene("l a", 1, FunctionSet.of("l")), FunctionSet.of("l"))
        sq = decode(gene("q a", 1, FunctionSet.of("q")), FunctionSet.of("q"))
        assert math.isnan(evaluate_tree(ln, {"a": -1.0}))
        assert math.isnan(evaluate_tree(sq, {"a": -4.0}))

    def test_missing_binding(self):
        tree = decode(gene("+ a b a a", 1), ARITH)
        with pytest.raises(MissingBindingError):
            evaluate_tree(tree, {"a": 1.0})

    def test_vectorized_bindings(self):
        tree = decode(gene("+ * a b c d e", 3), ARITH)
        out = evaluate_tree(tree, {"a": np.array([1.0, 0.0]), "b": 2.0, "c": np.array([3.0, 4.0])})
        assert out.tolist() == [7.0, 8.0]


class TestChromosome:
    def _const_gene(self, value):
        return Gene(("?", "a", "a"), 1, 2, (0, 0), (value,))

    def test_single_gene_is_identity(self):
        g = gene("* a b a a", 1)
        chrom = Chromosome((g,), FUNCTIONS["+"])
        b = {"a": 1.5, "b": -2.0}
        assert evaluate_chromosome(chrom, b, ARITH) == evaluate_tree(decode(g, ARITH), b)

    def test_add_linking(self):
        chrom = Chromosome(tuple(self._const_gene(v) for v in (1.0, 2.0, 3.0)), FUNCTIONS["+"])
        assert evaluate_chromosome(chrom, {}, ARITH) == 6.0

    def test_nan_propagates(self):
        div = Gene(("/", "a", "a"), 1, 2, (0, 0), (0.0,))
        genes = (self._const_gene(1.0), div, self._const_gene(3.0))
        chrom = Chromosome(genes, FUNCTIONS["+"])
        assert math.isnan(evaluate_chromosome(chrom, {"a": 0.0}, ARITH))

    def test_mixed_shapes_rejected(self):
        with pytest.raises(MalformedGeneError):
            Chromosome((gene("a a", 1), gene("a a a a a", 2)))

    def test_linking_must_be_binary(self):
        with pytest.raises(KarvaError):
            Chromosome((gene("a a", 1),), FUNCTIONS["s"])


class TestInfix:
    def test_terminal(self):
        assert to_infix(ExprTree(TerminalSymbol("n", 0))) == "n"

    def test_negative_constant_parenthesized(self):
        tree = ExprTree(FUNCTIONS["-"], (ExprTree(TerminalSymbol("a", 0)), ExprTree(-2.5)))
        text = to_infix(tree)
        assert text == "(a-(-2.5))"
        assert eval_infix(text, {"a": 1.0}) == 3.5

    def test_constants_keep_full_precision(self):
        tree = ExprTree(1 / 88)
        assert float(to_infix(tree)) == 1 / 88

    def test_chromosome_infix(self):
        genes = (gene("* a b", 1), gene("a a a", 1))
        assert chromosome_infix(Chromosome(genes), ARITH) == "((a*b)+a)"


class TestEncode:
    def test_roundtrip(self):
        g = gene("+ * a b c d e", 3)
        tree = decode(g, ARITH)
        back = encode(tree, 3, ARITH, pad="e")
        assert to_infix(decode(back, ARITH)) == to_infix(tree)

    def test_too_deep_for_head(self):
        tree = decode(gene("* * * a a a a a a a a a a a a", 7), ARITH)
        with pytest.raises(MalformedGeneError):
            encode(tree, 2, ARITH, pad="a")


# ------------------------------------------------------------ properties

TERMS = ("x", "y", "z")


def test_closure_fuzz():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        h = int(rng.integers(1, 9))
        syms, t = random_gene_symbols(rng, ALL, TERMS, h)
        tree = decode(Gene(syms, h, t), ALL, TERMS)
        stack = [tree]
        while stack:
            node = stack.pop()
            arity = node.node.arity if isinstance(node.node, FunctionSymbol) else 0
            assert len(node.children) == arity
            stack.extend(node.children)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), h=st.integers(1, 8))
def test_noncoding_region_is_neutral(seed, h):
    rng = np.random.default_rng(seed)
    syms, t = random_gene_symbols(rng, ARITH, TERMS, h)
    g = Gene(syms, h, t)
    k = coding_length(g, ARITH)
    altered = list(syms)
    for i in range(k, len(syms)):
        pool = ARITH.ids + TERMS if i < h else TERMS
        altered[i] = pool[rng.integers(len(pool))]
    b = dict(zip(TERMS, rng.uniform(-3, 3, size=3)))
    x = evaluate_tree(decode(g, ARITH), b)
    y = evaluate_tree(decode(Gene(tuple(altered), h, t), ARITH), b)
    assert (x == y) or (np.isnan(x) and np.isnan(y))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_genes=st.integers(1, 4))
def test_add_linking_is_left_fold_sum(seed, n_genes):
    rng = np.random.default_rng(seed)
    genes = []
    for _ in range(n_genes):
        syms, t = random_gene_symbols(rng, ARITH, TERMS, 4)
        genes.append(Gene(syms, 4, t))
    b = dict(zip(TERMS, rng.uniform(-3, 3, size=3)))
    total = None
    for g in genes:
        v = evaluate_tree(decode(g, ARITH), b)
        total = v if total is None else total + v
    got = evaluate_chromosome(Chromosome(tuple(genes)), b, ARITH)
    assert (got == total) or (np.isnan(got) and np.isnan(total))


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), h=st.integers(1, 8))
def test_infix_agrees_with_tree(seed, h):
    rng = np.random.default_rng(seed)
    terms = TERMS + (CONSTANT,)
    syms, t = random_gene_symbols(rng, ALL, terms, h)
    consts = tuple(float(c) for c in rng.uniform(-5, 5, size=4))
    dc = tuple(int(i) for i in rng.integers(4, size=t))
    tree = decode(Gene(syms, h, t, dc, consts), ALL, TERMS)
    b = dict(zip(TERMS, rng.uniform(0.1, 3, size=3)))
    expected = float(evaluate_tree(tree, b))
    if not math.isfinite(expected):
        return
    assert rel_close(eval_infix(to_infix(tree), b), expected, 1e-12)
