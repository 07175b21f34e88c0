"""Generational GEP engine: population setup, fitness, selection, operators.

Random draws come from a single :class:`numpy.random.Generator` (PCG64)
and are consumed in a fixed order:

1. initialization, individual by individual: for each gene the head,
   tail, Dc region and constants array;
2. then, per generation: the roulette draws for the mating pool; for each
   consecutive pair in the pool one-point, two-point and gene
   recombination; for each offspring mutation, inversion, IS, RIS and gene
   transposition followed by constant mutation.

Each rate-gated operator draws its firing decision even when its rate is
0 or 1.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property, reduce

import numpy as np

from .karva import (
    CONSTANT,
    DEFAULT_FUNCTIONS,
    FUNCTIONS,
    Chromosome,
    FunctionSet,
    Gene,
    KarvaError,
    decode,
    evaluate_tree,
    function,
    tail_length,
)

MAX_FITNESS = 1000.0
_BELOW_MAX = math.nextafter(MAX_FITNESS, 0.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 50
    generations: int = 100
    head_length: int = 8
    num_genes: int = 3
    linking: str = "+"
    function_set: tuple[str, ...] = DEFAULT_FUNCTIONS
    mutation_rate: float = 0.044
    inversion_rate: float = 0.1
    is_rate: float = 0.1
    ris_rate: float = 0.1
    gene_transposition_rate: float = 0.1
    one_point_rate: float = 0.3
    two_point_rate: float = 0.3
    gene_recombination_rate: float = 0.1
    rnc_enabled: bool = False
    rnc_range: tuple[float, float] = (-10.0, 10.0)
    rnc_array_length: int = 10
    rnc_mutation_rate: float = 0.01
    elitism_count: int = 1
    seed: int = 0
    target_fitness: float | None = None

    def __post_init__(self):
        try:
            ids = tuple(function(k).id for k in self.function_set)
            link = function(self.linking).id
        except KarvaError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "function_set", ids)
        object.__setattr__(self, "linking", link)
        object.__setattr__(self, "rnc_range", tuple(float(x) for x in self.rnc_range))

        if not ids:
            raise ConfigError("function set is empty")
        if len(set(ids)) != len(ids):
            raise ConfigError("function set lists a function twice")
        if FUNCTIONS[link].arity != 2:
            raise ConfigError("linking function must be binary")
        for name in ("population_size", "generations", "head_length", "num_genes"):
            if int(getattr(self, name)) < (0 if name == "generations" else 1):
                raise ConfigError(f"{name} must be positive")
        for name in (
            "mutation_rate", "inversion_rate", "is_rate", "ris_rate",
            "gene_transposition_rate", "one_point_rate", "two_point_rate",
            "gene_recombination_rate", "rnc_mutation_rate",
        ):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        lo, hi = self.rnc_range
        if len(self.rnc_range) != 2 or not lo < hi:
            raise ConfigError("rnc_range needs lo < hi")
        if self.rnc_array_length < 1:
            raise ConfigError("rnc_array_length must be positive")
        # elitism == population_size is allowed: it freezes the population.
        if not 0 <= self.elitism_count <= self.population_size:
            raise ConfigError("elitism_count must lie in [0, population_size]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @cached_property
    def functions(self) -> FunctionSet:
        return FunctionSet.of(self.function_set)

    @property
    def tail_length(self) -> int:
        return tail_length(self.head_length, self.functions.max_arity)


@dataclass(frozen=True)
class TrainingSet:
    """Feature columns keyed by terminal name, plus the target column."""

    features: Mapping[str, np.ndarray]
    target: np.ndarray

    def __post_init__(self):
        feats = {k: np.asarray(v, dtype=np.float64) for k, v in self.features.items()}
        target = np.asarray(self.target, dtype=np.float64)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "target", target)
        if target.size == 0:
            raise ConfigError("training set is empty")
        for name, col in feats.items():
            if name in FUNCTIONS or name == CONSTANT:
                raise ConfigError(f"terminal name {name!r} clashes with a function token")
            if col.shape != target.shape:
                raise ConfigError(f"column {name!r} length differs from the target")
        if not feats:
            raise ConfigError("terminal set is empty")

    @classmethod
    def from_dataset(cls, ds) -> TrainingSet:
        if len(ds) == 0:
            raise ConfigError("training set is empty")
        return cls(ds.features(), ds.target())

    @property
    def terminals(self) -> tuple[str, ...]:
        return tuple(self.features)


@dataclass
class Population:
    individuals: list[Chromosome]
    fitnesses: np.ndarray  # NaN marks "not evaluated yet"

    def __len__(self):
        return len(self.individuals)


@dataclass(frozen=True)
class EvolutionResult:
    best: Chromosome
    best_fitness: float
    history: tuple[float, ...]
    generations_run: int
    population: tuple[Chromosome, ...] = field(default=(), compare=False, repr=False)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(rng))


class Alphabet:
    """Symbols available to head, tail and Dc positions."""

    def __init__(self, config: EvolutionConfig, terminals: Sequence[str]):
        terminals = tuple(terminals)
        if not terminals:
            raise ConfigError("terminal set is empty")
        self.variables = terminals
        self.tail = terminals + ((CONSTANT,) if config.rnc_enabled else ())
        self.head = config.function_set + self.tail
        self.h = config.head_length
        self.t = config.tail_length
        self.n_constants = config.rnc_array_length if config.rnc_enabled else 0

    def random_gene(self, rng, config: EvolutionConfig) -> Gene:
        head = [self.head[i] for i in rng.integers(len(self.head), size=self.h)]
        tail = [self.tail[i] for i in rng.integers(len(self.tail), size=self.t)]
        dc: tuple[int, ...] = ()
        consts: tuple[float, ...] = ()
        if self.n_constants:
            dc = tuple(int(i) for i in rng.integers(self.n_constants, size=self.t))
            lo, hi = config.rnc_range
            consts = tuple(float(c) for c in rng.uniform(lo, hi, size=self.n_constants))
        return Gene(tuple(head + tail), self.h, self.t, dc, consts)


def init_population(config: EvolutionConfig, rng, terminals: Sequence[str]) -> Population:
    rng = _rng(rng)
    alpha = Alphabet(config, terminals)
    link = FUNCTIONS[config.linking]
    individuals = [
        Chromosome(tuple(alpha.random_gene(rng, config) for _ in range(config.num_genes)), link)
        for _ in range(config.population_size)
    ]
    return Population(individuals, np.full(config.population_size, np.nan))


# ---------------------------------------------------------------- fitness

class Evaluator:
    """Per-gene prediction cache over one training set."""

    def __init__(self, train: TrainingSet, functions: FunctionSet | None = None,
                 max_cache: int = 200_000):
        self.train = train
        self.functions = functions or FunctionSet(tuple(FUNCTIONS.values()))
        self.max_cache = max_cache
        self._cache: dict[Gene, np.ndarray] = {}

    def gene_values(self, gene: Gene) -> np.ndarray:
        out = self._cache.get(gene)
        if out is None:
            tree = decode(gene, self.functions, self.train.terminals)
            out = np.broadcast_to(
                evaluate_tree(tree, self.train.features), self.train.target.shape
            )
            if len(self._cache) >= self.max_cache:
                self._cache.clear()
            self._cache[gene] = out
        return out

    def predict(self, chrom: Chromosome) -> np.ndarray:
        with np.errstate(all="ignore"):
            return reduce(chrom.linking.apply, (self.gene_values(g) for g in chrom.genes))

    def fitness(self, chrom: Chromosome) -> float:
        return fitness_from_predictions(self.predict(chrom), self.train.target)


def fitness_from_predictions(pred, target) -> float:
    """``1000 / (1 + RMSE)``, or 0 if any prediction is not finite.

    Exactly 1000 is reserved for a perfect fit.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if not np.all(np.isfinite(pred)):
        return 0.0
    if np.array_equal(pred, np.broadcast_to(target, pred.shape)):
        return MAX_FITNESS
    with np.errstate(over="ignore", under="ignore"):
        err = pred - target
        rmse = float(np.sqrt(np.mean(err * err)))
    if not math.isfinite(rmse):
        return 0.0
    return min(MAX_FITNESS / (1.0 + rmse), _BELOW_MAX)


def fitness(chrom: Chromosome, train: TrainingSet) -> float:
    return Evaluator(train).fitness(chrom)


def evaluate_population(pop: Population, evaluator: Evaluator) -> None:
    for i, chrom in enumerate(pop.individuals):
        if np.isnan(pop.fitnesses[i]):
            pop.fitnesses[i] = evaluator.fitness(chrom)


# -------------------------------------------------------------- selection

def elite_indices(fitnesses: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` fittest individuals, in population order."""
    if k == 0:
        return np.array([], dtype=int)
    order = np.argsort(-fitnesses, kind="stable")[:k]
    return np.sort(order)


def roulette(fitnesses: np.ndarray, size: int, rng) -> np.ndarray:
    total = float(np.sum(fitnesses))
    if total <= 0.0:
        return rng.integers(len(fitnesses), size=size)
    cum = np.cumsum(fitnesses) / total
    picks = np.searchsorted(cum, rng.random(size), side="right")
    return np.minimum(picks, len(fitnesses) - 1)


def select(pop: Population, config: EvolutionConfig, rng) -> list[Chromosome]:
    """Fitness-proportional mating pool of ``population_size - elitism_count``."""
    rng = _rng(rng)
    if np.any(np.isnan(pop.fitnesses)):
        raise ValueError("population has unevaluated individuals")
    size = config.population_size - config.elitism_count
    return [pop.individuals[i] for i in roulette(pop.fitnesses, size, rng)]


# -------------------------------------------------------------- operators

def _with_gene(chrom: Chromosome, index: int, gene: Gene) -> Chromosome:
    genes = list(chrom.genes)
    genes[index] = gene
    return replace(chrom, genes=tuple(genes))


def _with_head(gene: Gene, head: Sequence[str]) -> Gene:
    return replace(gene, symbols=tuple(head) + gene.tail)


def mutate(chrom: Chromosome, config: EvolutionConfig, rng, terminals: Sequence[str]) -> Chromosome:
    rng = _rng(rng)
    alpha = Alphabet(config, terminals)
    rate = config.mutation_rate
    genes = []
    for gene in chrom.genes:
        n = len(gene.symbols)
        hits = np.flatnonzero(rng.random(n) < rate)
        dc_hits = np.flatnonzero(rng.random(len(gene.dc)) < rate) if gene.dc else ()
        if len(hits) == 0 and len(dc_hits) == 0:
            genes.append(gene)
            continue
        syms = list(gene.symbols)
        for pos in hits:
            pool = alpha.head if pos < gene.head_length else alpha.tail
            syms[pos] = pool[rng.integers(len(pool))]
        dc = list(gene.dc)
        for pos in dc_hits:
            dc[pos] = int(rng.integers(len(gene.constants)))
        genes.append(replace(gene, symbols=tuple(syms), dc=tuple(dc)))
    return replace(chrom, genes=tuple(genes))


def invert_segment(head: Sequence[str], start: int, end: int) -> tuple[str, ...]:
    """Reverse ``head[start..end]`` (both ends inclusive)."""
    head = list(head)
    head[start:end + 1] = head[start:end + 1][::-1]
    return tuple(head)


def invert(chrom: Chromosome, config: EvolutionConfig, rng) -> Chromosome:
    rng = _rng(rng)
    if rng.random() >= config.inversion_rate or chrom.head_length < 2:
        return chrom
    gi = int(rng.integers(len(chrom.genes)))
    start, end = sorted(int(i) for i in rng.choice(chrom.head_length, size=2, replace=False))
    gene = chrom.genes[gi]
    return _with_gene(chrom, gi, _with_head(gene, invert_segment(gene.head, start, end)))


def insert_truncated(head: Sequence[str], segment: Sequence[str], pos: int) -> tuple[str, ...]:
    """Insert ``segment`` at ``pos`` and drop what spills past the head."""
    head = tuple(head)
    return (head[:pos] + tuple(segment) + head[pos:])[: len(head)]


def is_transpose(chrom: Chromosome, config: EvolutionConfig, rng) -> Chromosome:
    rng = _rng(rng)
    if rng.random() >= config.is_rate or chrom.head_length < 2:
        return chrom
    source = chrom.genes[int(rng.integers(len(chrom.genes)))]
    ti = int(rng.integers(len(chrom.genes)))
    length = int(rng.integers(1, 4))
    start = int(rng.integers(len(source.symbols) - length + 1))
    pos = int(rng.integers(1, chrom.head_length))
    seg = source.symbols[start:start + length]
    target = chrom.genes[ti]
    return _with_gene(chrom, ti, _with_head(target, insert_truncated(target.head, seg, pos)))


def ris_transpose(chrom: Chromosome, config: EvolutionConfig, rng) -> Chromosome:
    """Root transposition: a function-led segment becomes the new root."""
    rng = _rng(rng)
    if rng.random() >= config.ris_rate:
        return chrom
    gi = int(rng.integers(len(chrom.genes)))
    scan_from = int(rng.integers(chrom.head_length))
    length = int(rng.integers(1, 4))
    gene = chrom.genes[gi]
    head = gene.head
    start = next((i for i in range(scan_from, len(head)) if head[i] in FUNCTIONS), None)
    if start is None:
        return chrom
    seg = gene.symbols[start:start + length]
    return _with_gene(chrom, gi, _with_head(gene, insert_truncated(head, seg, 0)))


def gene_transpose(chrom: Chromosome, config: EvolutionConfig, rng) -> Chromosome:
    rng = _rng(rng)
    if rng.random() >= config.gene_transposition_rate or len(chrom.genes) < 2:
        return chrom
    gi = int(rng.integers(1, len(chrom.genes)))
    genes = list(chrom.genes)
    moved = genes.pop(gi)
    return replace(chrom, genes=(moved, *genes))


def _flatten(chrom: Chromosome) -> list:
    out: list = []
    for g in chrom.genes:
        out.extend(g.symbols)
        out.extend(g.dc)
    return out


def _unflatten(flat: Sequence, like: Chromosome) -> Chromosome:
    genes, pos = [], 0
    for g in like.genes:
        n, d = len(g.symbols), len(g.dc)
        genes.append(replace(g, symbols=tuple(flat[pos:pos + n]),
                             dc=tuple(flat[pos + n:pos + n + d])))
        pos += n + d
    return replace(like, genes=tuple(genes))


def _check_shape(a: Chromosome, b: Chromosome) -> None:
    shape = lambda c: [(len(g.symbols), g.head_length, len(g.dc), len(g.constants)) for g in c.genes]
    if shape(a) != shape(b):
        raise ValueError("parents have different shapes")


def one_point_splice(a: Sequence, b: Sequence, cut: int) -> tuple[list, list]:
    a, b = list(a), list(b)
    return a[:cut] + b[cut:], b[:cut] + a[cut:]


def two_point_splice(a: Sequence, b: Sequence, start: int, end: int) -> tuple[list, list]:
    """Swap the segment ``[start..end]`` (both inclusive)."""
    a, b = list(a), list(b)
    return (a[:start] + b[start:end + 1] + a[end + 1:],
            b[:start] + a[start:end + 1] + b[end + 1:])


# In both point recombinations each child keeps its own parent's constant
# arrays; only symbols and Dc indices cross over.

def recombine_one_point(a: Chromosome, b: Chromosome, config: EvolutionConfig, rng):
    rng = _rng(rng)
    _check_shape(a, b)
    if rng.random() >= config.one_point_rate:
        return a, b
    fa, fb = _flatten(a), _flatten(b)
    ca, cb = one_point_splice(fa, fb, int(rng.integers(len(fa))))
    return _unflatten(ca, a), _unflatten(cb, b)


def recombine_two_point(a: Chromosome, b: Chromosome, config: EvolutionConfig, rng):
    rng = _rng(rng)
    _check_shape(a, b)
    if rng.random() >= config.two_point_rate:
        return a, b
    fa, fb = _flatten(a), _flatten(b)
    i, j = sorted(int(x) for x in rng.integers(len(fa), size=2))
    ca, cb = two_point_splice(fa, fb, i, j)
    return _unflatten(ca, a), _unflatten(cb, b)


def swap_gene(a: Chromosome, b: Chromosome, index: int):
    return (_with_gene(a, index, b.genes[index]), _with_gene(b, index, a.genes[index]))


def recombine_gene(a: Chromosome, b: Chromosome, config: EvolutionConfig, rng):
    rng = _rng(rng)
    _check_shape(a, b)
    if rng.random() >= config.gene_recombination_rate:
        return a, b
    return swap_gene(a, b, int(rng.integers(len(a.genes))))


def rnc_mutate(chrom: Chromosome, config: EvolutionConfig, rng) -> Chromosome:
    rng = _rng(rng)
    if not config.rnc_enabled:
        return chrom
    lo, hi = config.rnc_range
    genes = []
    for gene in chrom.genes:
        k = len(gene.constants)
        hits = rng.random(k) < config.rnc_mutation_rate
        fresh = rng.uniform(lo, hi, size=k)
        if not hits.any():
            genes.append(gene)
            continue
        consts = tuple(float(fresh[i]) if hits[i] else c for i, c in enumerate(gene.constants))
        genes.append(replace(gene, constants=consts))
    return replace(chrom, genes=tuple(genes))


def reproduce(parents: list[Chromosome], config: EvolutionConfig, rng,
              terminals: Sequence[str]) -> list[Chromosome]:
    """Apply recombination to consecutive pairs, then the unary operators."""
    kids = list(parents)
    for i in range(0, len(kids) - 1, 2):
        a, b = kids[i], kids[i + 1]
        a, b = recombine_one_point(a, b, config, rng)
        a, b = recombine_two_point(a, b, config, rng)
        a, b = recombine_gene(a, b, config, rng)
        kids[i], kids[i + 1] = a, b
    out = []
    for c in kids:
        c = mutate(c, config, rng, terminals)
        c = invert(c, config, rng)
        c = is_transpose(c, config, rng)
        c = ris_transpose(c, config, rng)
        c = gene_transpose(c, config, rng)
        c = rnc_mutate(c, config, rng)
        out.append(c)
    return out


# ------------------------------------------------------------------- loop

def evolve(config: EvolutionConfig, train: TrainingSet, rng=None, callback=None) -> EvolutionResult:
    """Run the generational loop.

    ``history[g]`` is the best fitness of generation ``g``, generation 0
    being the random initial population, so ``len(history) ==
    generations_run + 1``.  The loop stops after ``config.generations``
    rounds or as soon as the best fitness reaches ``target_fitness``.
    ``callback(gen, best_fitness)`` is called once per evaluated generation.
    """
    if not isinstance(train, TrainingSet):
        train = TrainingSet.from_dataset(train)
    rng = _rng(config.seed if rng is None else rng)
    terminals = train.terminals
    evaluator = Evaluator(train, config.functions)

    pop = init_population(config, rng, terminals)
    evaluate_population(pop, evaluator)

    history: list[float] = []
    best, best_fit = None, -1.0
    gen = 0
    while True:
        i = int(np.argmax(pop.fitnesses))
        if pop.fitnesses[i] > best_fit:
            best, best_fit = pop.individuals[i], float(pop.fitnesses[i])
        history.append(float(pop.fitnesses[i]))
        if callback is not None:
            callback(gen, history[-1])
        if gen >= config.generations:
            break
        if config.target_fitness is not None and best_fit >= config.target_fitness:
            break

        elites = elite_indices(pop.fitnesses, config.elitism_count)
        pool = select(pop, config, rng)
        kids = reproduce(pool, config, rng, terminals)
        individuals = [pop.individuals[j] for j in elites] + kids
        fits = np.concatenate([pop.fitnesses[elites], np.full(len(kids), np.nan)])
        pop = Population(individuals, fits)
        evaluate_population(pop, evaluator)
        gen += 1

    return EvolutionResult(best, best_fit, tuple(history), gen, tuple(pop.individuals))
