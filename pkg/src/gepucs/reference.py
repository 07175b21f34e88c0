"""Published carbonate-rock UCS models.

* :func:`predict_ucs_eq2` - the closed-form GEP formula for UCS (MPa) from
  porosity ``n`` (percent) and P-wave velocity ``v`` (m/s).
* :func:`eq2_chromosome` - the same formula written as a 3-gene Karva
  chromosome, so the engine's decode/evaluate path can be checked against it.
* A 2-3-1 feed-forward network trained by online backpropagation with
  momentum (sigmoid hidden layer, linear output, min-max scaling to [0, 1]).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, RockSample
from .karva import (
    Chromosome,
    ExprTree,
    FunctionSet,
    TerminalSymbol,
    FUNCTIONS,
    encode,
)

EQ2_FUNCTIONS = FunctionSet.of(("+", "-", "*", "/"))
EQ2_TERMINALS = ("n", "v")
EQ2_CONSTANTS = (1 / 88, 1.0, 2.0, 4.0, 120000.0)
EQ2_HEAD_LENGTH = 12


def predict_ucs_eq2(n, v):
    """UCS in MPa; ``n`` is porosity in percent (not a fraction), ``v`` in m/s.

    Accepts scalars or arrays.
    """
    n = np.asarray(n, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any(v <= 0):
        raise ValueError("P-wave velocity must be positive")
    out = -(1 / 88) * (n**3 + v) / (1 + n**2) + v * (n - 2) / (4 + v) + 120000.0 / v
    return float(out) if out.ndim == 0 else out


def _f(tok, *kids):
    return ExprTree(FUNCTIONS[tok], tuple(kids))


def _t(name):
    return ExprTree(TerminalSymbol(name, EQ2_TERMINALS.index(name)))


def _c(value):
    return ExprTree(float(value))


def eq2_trees() -> tuple[ExprTree, ExprTree, ExprTree]:
    n, v = _t("n"), _t("v")
    k, one, two, four, big = (_c(c) for c in EQ2_CONSTANTS)
    # -(n^3 + v) / (88 (1 + n^2)) with only +-*/: the denominator is
    # (1 - n^2) - 2 = -(1 + n^2).
    first = _f(
        "/",
        _f("*", k, _f("+", _f("*", _f("*", n, n), n), v)),
        _f("-", _f("-", one, _f("*", n, n)), two),
    )
    second = _f("/", _f("*", v, _f("-", n, two)), _f("+", four, v))
    third = _f("/", big, v)
    return first, second, third


def eq2_chromosome() -> Chromosome:
    """The published formula as an add-linked 3-gene chromosome.

    Decode with :data:`EQ2_FUNCTIONS` and terminals :data:`EQ2_TERMINALS`.
    """
    genes = tuple(
        encode(t, EQ2_HEAD_LENGTH, EQ2_FUNCTIONS, pad="n", constants=EQ2_CONSTANTS)
        for t in eq2_trees()
    )
    return Chromosome(genes, FUNCTIONS["+"])


# ------------------------------------------------------------------- ANN

class AnnStateError(RuntimeError):
    pass


_INPUTS = ("n", "v")
_OUTPUT = "ucs"


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class AnnNetwork:
    hidden_w: np.ndarray  # (3, 2)
    hidden_b: np.ndarray  # (3,)
    out_w: np.ndarray  # (3,)
    out_b: float
    norm: dict[str, tuple[float, float]] | None = None
    # previous updates, for the momentum term
    d_hidden_w: np.ndarray = field(default_factory=lambda: np.zeros((3, 2)))
    d_hidden_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d_out_w: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d_out_b: float = 0.0

    def __post_init__(self):
        self.hidden_w = np.asarray(self.hidden_w, dtype=np.float64).reshape(3, 2)
        self.hidden_b = np.asarray(self.hidden_b, dtype=np.float64).reshape(3)
        self.out_w = np.asarray(self.out_w, dtype=np.float64).reshape(3)
        self.out_b = float(self.out_b)
        if self.norm is not None:
            for key, (lo, hi) in self.norm.items():
                if not lo < hi:
                    raise ValueError(f"normalization range for {key} is empty")

    def params(self) -> np.ndarray:
        """All weights and biases as one flat vector."""
        return np.concatenate(
            [self.hidden_w.ravel(), self.hidden_b, self.out_w, [self.out_b]]
        )

    def set_params(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        self.hidden_w = flat[:6].reshape(3, 2).copy()
        self.hidden_b = flat[6:9].copy()
        self.out_w = flat[9:12].copy()
        self.out_b = float(flat[12])

    def to_json(self) -> str:
        doc = {
            "hidden_w": self.hidden_w.tolist(),
            "hidden_b": self.hidden_b.tolist(),
            "out_w": self.out_w.tolist(),
            "out_b": self.out_b,
            "norm": {k: list(v) for k, v in self.norm.items()} if self.norm else None,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> AnnNetwork:
        doc = json.loads(text)
        norm = doc.get("norm")
        if norm is not None:
            norm = {k: (float(v[0]), float(v[1])) for k, v in norm.items()}
        return cls(doc["hidden_w"], doc["hidden_b"], doc["out_w"], doc["out_b"], norm)


@dataclass(frozen=True)
class TrainParams:
    learning_rate: float = 0.3
    momentum: float = 0.2
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


def ann_init(seed) -> AnnNetwork:
    """Uniform weights in [-0.5, 0.5]; no normalization yet."""
    rng = np.random.default_rng(seed)
    u = lambda *shape: rng.uniform(-0.5, 0.5, size=shape)
    return AnnNetwork(u(3, 2), u(3), u(3), float(u(1)[0]))


def _forward(net: AnnNetwork, x: np.ndarray):
    h = _sigmoid(net.hidden_w @ x + net.hidden_b)
    return float(net.out_w @ h + net.out_b), h


def _gradients(net: AnnNetwork, x: np.ndarray, target: float):
    """Gradients of ``0.5 * (y - target)**2`` in :meth:`AnnNetwork.params` order."""
    y, h = _forward(net, x)
    dy = y - target
    dz = dy * net.out_w * h * (1.0 - h)
    grad = np.concatenate([np.outer(dz, x).ravel(), dz, dy * h, [dy]])
    return grad, y


def _scale(value, lohi):
    lo, hi = lohi
    return (value - lo) / (hi - lo)


def _inputs(sample) -> np.ndarray:
    if isinstance(sample, RockSample):
        return np.array([sample.n, sample.v], dtype=np.float64)
    return np.asarray(sample, dtype=np.float64).reshape(2)


def ann_forward(net: AnnNetwork, sample, raw: bool = False) -> float:
    """Predicted UCS (MPa) for a sample or an ``(n, v)`` pair.

    With ``raw=True`` inputs go to the network unscaled and the raw output
    is returned.
    """
    x = _inputs(sample)
    if raw:
        return _forward(net, x)[0]
    if net.norm is None:
        raise AnnStateError("network has no normalization parameters; train it first")
    xs = np.array([_scale(x[i], net.norm[k]) for i, k in enumerate(_INPUTS)])
    y, _ = _forward(net, xs)
    lo, hi = net.norm[_OUTPUT]
    return y * (hi - lo) + lo


def fit_normalization(ds: Dataset) -> dict[str, tuple[float, float]]:
    cols = ds.features()
    cols[_OUTPUT] = ds.target()
    norm = {}
    for key in (*_INPUTS, _OUTPUT):
        lo, hi = float(cols[key].min()), float(cols[key].max())
        if not lo < hi:
            raise ValueError(f"cannot scale constant column {key!r}")
        norm[key] = (lo, hi)
    return norm


def ann_train(net: AnnNetwork, train: Dataset, params: TrainParams):
    """Online backpropagation with momentum on the scaled target.

    Returns a trained copy and the per-epoch mean squared error, measured
    on each sample just before its update (scaled units).
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    net = copy.deepcopy(net)
    if net.norm is None:
        net.norm = fit_normalization(train)
    feats = train.features()
    X = np.column_stack([_scale(feats[k], net.norm[k]) for k in _INPUTS])
    T = _scale(train.target(), net.norm[_OUTPUT])

    rng = np.random.default_rng(params.seed)
    lr, mom = params.learning_rate, params.momentum
    prev = np.concatenate([net.d_hidden_w.ravel(), net.d_hidden_b, net.d_out_w, [net.d_out_b]])
    history = []
    for _ in range(params.epochs):
        sq = 0.0
        for i in rng.permutation(len(T)):
            grad, y = _gradients(net, X[i], T[i])
            sq += (y - T[i]) ** 2
            step = -lr * grad + mom * prev
            net.set_params(net.params() + step)
            prev = step
        history.append(sq / len(T))

    net.d_hidden_w = prev[:6].reshape(3, 2).copy()
    net.d_hidden_b = prev[6:9].copy()
    net.d_out_w = prev[9:12].copy()
    net.d_out_b = float(prev[12])
    return net, history


def ann_gradient_check(net: AnnNetwork, sample, target: float | None = None,
                       step: float = 1e-5) -> float:
    """Largest relative gap between backprop and central-difference gradients.

    ``sample`` is a raw input pair (or a :class:`RockSample`, whose ``ucs``
    is used when ``target`` is omitted).  Relative gaps are taken against
    ``max(|analytic|, |numeric|, 1e-7)``.
    """
    x = _inputs(sample)
    if target is None:
        target = sample.ucs
    analytic, _ = _gradients(net, x, target)
    probe = copy.deepcopy(net)
    base = net.params()

    def loss(p):
        probe.set_params(p)
        y, _ = _forward(probe, x)
        return 0.5 * (y - target) ** 2

    worst = 0.0
    for j in range(base.size):
        up, down = base.copy(), base.copy()
        up[j] += step
        down[j] -= step
        numeric = (loss(up) - loss(down)) / (2 * step)
        scale = max(abs(analytic[j]), abs(numeric), 1e-7)
        worst = max(worst, abs(analytic[j] - numeric) / scale)
    return worst
