"""Three-layer sigmoid perceptron trained by online backpropagation with momentum.

Weight matrices carry the bias as their last row: ``hidden_weights`` is
``(n_in + 1, n_hidden)`` and ``output_weights`` is ``(n_hidden + 1, n_out)``.
The previous weight steps are kept alongside for the momentum term.

Grades 1..4 are encoded on the two output units as the binary code of
``grade - 1`` (high bit first) with soft targets 0.1/0.9, and decoded by
thresholding each output at 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyInputError, NumericError, ParameterError, ShapeError
from .rng import GRADCHECK_STREAM, INIT_STREAM, make_rng

LOW_TARGET = 0.1
HIGH_TARGET = 0.9
GRADES = (1, 2, 3, 4)


@dataclass(frozen=True)
class MlpConfig:
    n_in: int = 132
    n_hidden: int = 5
    n_out: int = 2
    learning_rate: float = 0.3
    momentum: float = 0.5
    tolerance: float = 0.001
    max_epochs: int = 2000
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise ParameterError("layer sizes must be at least 1")
        if not self.learning_rate >= 0:
            raise ParameterError("learning rate must be non-negative")
        if not 0 <= self.momentum < 1:
            raise ParameterError("momentum must lie in [0, 1)")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.max_epochs < 0:
            raise ParameterError("max_epochs must be non-negative")
        if self.rng_seed < 0:
            raise ParameterError("rng_seed must be non-negative")


@dataclass(eq=False)
class MlpModel:
    hidden_weights: np.ndarray
    output_weights: np.ndarray
    config: MlpConfig = field(default_factory=MlpConfig)
    hidden_delta: np.ndarray | None = None
    output_delta: np.ndarray | None = None

    def __post_init__(self):
        c = self.config
        self.hidden_weights = np.array(self.hidden_weights, dtype=np.float64)
        self.output_weights = np.array(self.output_weights, dtype=np.float64)
        if self.hidden_delta is None:
            self.hidden_delta = np.zeros_like(self.hidden_weights)
        if self.output_delta is None:
            self.output_delta = np.zeros_like(self.output_weights)
        self.hidden_delta = np.array(self.hidden_delta, dtype=np.float64)
        self.output_delta = np.array(self.output_delta, dtype=np.float64)
        hshape, oshape = (c.n_in + 1, c.n_hidden), (c.n_hidden + 1, c.n_out)
        if self.hidden_weights.shape != hshape or self.hidden_delta.shape != hshape:
            raise ShapeError(f"hidden weights must be {hshape}")
        if self.output_weights.shape != oshape or self.output_delta.shape != oshape:
            raise ShapeError(f"output weights must be {oshape}")
        for arr in self.arrays():
            if not np.all(np.isfinite(arr)):
                raise NumericError("model contains non-finite weights")

    def arrays(self):
        return (self.hidden_weights, self.output_weights, self.hidden_delta, self.output_delta)

    def copy(self) -> "MlpModel":
        w, v, dw, dv = (a.copy() for a in self.arrays())
        return MlpModel(w, v, config=self.config, hidden_delta=dw, output_delta=dv)

    def __eq__(self, other):
        if not isinstance(other, MlpModel):
            return NotImplemented
        return self.config == other.config and all(
            np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays())
        )

    __hash__ = None


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mse: float
    recognition: float


def sigmoid(x):
    """Logistic function, evaluated without overflow for large ``|x|``."""
    x = np.asarray(x, dtype=np.float64)
    ex = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))
    return out if out.ndim else float(out)


def nguyen_widrow_beta(n_in: int, n_hidden: int) -> float:
    return 0.7 * n_hidden ** (1.0 / n_in)


def init_nguyen_widrow(config: MlpConfig, rng: np.random.Generator | None = None) -> MlpModel:
    """Nguyen-Widrow initialisation.

    Hidden input weights are drawn from U[-0.5, 0.5] and each hidden unit's
    column is rescaled to Euclidean norm ``beta = 0.7 * n_hidden**(1/n_in)``;
    hidden biases come from U[-beta, beta]; the output layer (weights and
    biases) from U[-0.5, 0.5].  Without an explicit ``rng`` the stream is
    ``make_rng(config.rng_seed, INIT_STREAM)``.
    """
    if rng is None:
        rng = make_rng(config.rng_seed, INIT_STREAM)
    beta = nguyen_widrow_beta(config.n_in, config.n_hidden)
    w = rng.uniform(-0.5, 0.5, size=(config.n_in, config.n_hidden))
    norms = np.linalg.norm(w, axis=0)
    norms[norms == 0] = 1.0
    w = w * (beta / norms)
    bias = rng.uniform(-beta, beta, size=(1, config.n_hidden))
    v = rng.uniform(-0.5, 0.5, size=(config.n_hidden + 1, config.n_out))
    return MlpModel(np.vstack([w, bias]), v, config=config)


def forward(model: MlpModel, x):
    """Hidden and output activations for one input vector or a batch (rows)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (model.config.n_in,):
        raise ShapeError(f"expected {model.config.n_in} inputs, got shape {x.shape}")
    w, v = model.hidden_weights, model.output_weights
    hidden = sigmoid(x @ w[:-1] + w[-1])
    output = sigmoid(hidden @ v[:-1] + v[-1])
    return np.asarray(hidden), np.asarray(output)


def pattern_error(model: MlpModel, x, target) -> float:
    """Half the summed squared output error; the objective backprop descends."""
    _, y = forward(model, x)
    e = np.asarray(target, dtype=np.float64) - y
    return 0.5 * float(np.dot(e, e))


def _deltas(model: MlpModel, x: np.ndarray, t: np.ndarray):
    h, y = forward(model, x)
    d_out = (t - y) * y * (1.0 - y)
    d_hid = h * (1.0 - h) * (model.output_weights[:-1] @ d_out)
    return h, y, d_out, d_hid


def gradients(model: MlpModel, x, target):
    """Analytic gradients of :func:`pattern_error` w.r.t. both weight matrices."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    h, _, d_out, d_hid = _deltas(model, x, t)
    g_hidden = -np.outer(np.append(x, 1.0), d_hid)
    g_output = -np.outer(np.append(h, 1.0), d_out)
    return g_hidden, g_output


def _check_pattern(model: MlpModel, x: np.ndarray, t: np.ndarray):
    if x.shape != (model.config.n_in,):
        raise ShapeError(f"expected {model.config.n_in} inputs, got shape {x.shape}")
    if t.shape != (model.config.n_out,):
        raise ShapeError(f"expected {model.config.n_out} targets, got shape {t.shape}")


def train_pattern(model: MlpModel, x, target):
    """One online backprop step with momentum, in place.

    Both layers' deltas are computed from the pre-update weights.  Returns the
    model and the pattern's summed squared error ``sum((t - y)**2)`` measured
    before the update.
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_pattern(model, x, t)
    c = model.config
    with np.errstate(invalid="ignore", over="ignore"):
        h, y, d_out, d_hid = _deltas(model, x, t)
        step_hidden = c.learning_rate * np.outer(np.append(x, 1.0), d_hid) + c.momentum * model.hidden_delta
        step_output = c.learning_rate * np.outer(np.append(h, 1.0), d_out) + c.momentum * model.output_delta
    if not (np.all(np.isfinite(step_hidden)) and np.all(np.isfinite(step_output))):
        raise NumericError("non-finite weight update")
    model.hidden_weights += step_hidden
    model.output_weights += step_output
    model.hidden_delta = step_hidden
    model.output_delta = step_output
    e = t - y
    return model, float(np.dot(e, e))


def _as_arrays(patterns):
    patterns = list(patterns)
    if not patterns:
        raise EmptyInputError("no training patterns")
    xs = np.asarray([p[0] for p in patterns], dtype=np.float64)
    ts = np.asarray([p[1] for p in patterns], dtype=np.float64)
    return xs, ts


def mse(model: MlpModel, patterns) -> float:
    """Mean over patterns and output units of the squared error."""
    xs, ts = _as_arrays(patterns)
    _, ys = forward(model, xs)
    return float(np.mean((ts - ys) ** 2))


def encode_grade(grade: int) -> tuple[float, float]:
    if grade not in GRADES:
        raise ParameterError(f"grade must be one of {GRADES}, got {grade!r}")
    code = grade - 1
    bit = lambda b: HIGH_TARGET if b else LOW_TARGET  # noqa: E731
    return (bit(code >> 1 & 1), bit(code & 1))


def decode_output(output, threshold: float = 0.5) -> int:
    high, low = (1 if o >= threshold else 0 for o in output)
    return 2 * high + low + 1


def _recognition(ys: np.ndarray, ts: np.ndarray) -> float:
    hits = sum(decode_output(y) == decode_output(t) for y, t in zip(ys, ts))
    return hits / len(ts)


def evaluate_patterns(model: MlpModel, patterns) -> EpochRecord:
    xs, ts = _as_arrays(patterns)
    _, ys = forward(model, xs)
    return EpochRecord(0, float(np.mean((ts - ys) ** 2)), _recognition(ys, ts))


def train(model: MlpModel, patterns, callback=None):
    """Epochs of :func:`train_pattern` in the given order until MSE < tolerance.

    Mutates ``model``.  ``callback(record)`` is called after every epoch.
    Returns ``(model, history)`` with one :class:`EpochRecord` per epoch.
    """
    patterns = list(patterns)
    xs, ts = _as_arrays(patterns)
    c = model.config
    history: list[EpochRecord] = []
    for epoch in range(1, c.max_epochs + 1):
        try:
            for x, t in zip(xs, ts):
                train_pattern(model, x, t)
        except NumericError as exc:
            raise NumericError(str(exc), epoch=epoch) from None
        _, ys = forward(model, xs)
        err = float(np.mean((ts - ys) ** 2))
        if not np.isfinite(err):
            raise NumericError("non-finite MSE", epoch=epoch)
        record = EpochRecord(epoch, err, _recognition(ys, ts))
        history.append(record)
        if callback is not None:
            callback(record)
        if err < c.tolerance:
            break
    return model, history


def _extended_error(w, v, x, t) -> np.longdouble:
    # forward pass repeated in extended precision; only used by the checker
    h = 1 / (1 + np.exp(-(x @ w[:-1] + w[-1])))
    y = 1 / (1 + np.exp(-(h @ v[:-1] + v[-1])))
    e = t - y
    return 0.5 * np.dot(e, e)


def gradient_check(model: MlpModel, pattern, epsilon: float = 1e-5) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    The relative error of each weight is ``|a - n| / max(|a|, |n|, 1e-12)``.
    The analytic side is the float64 backprop gradient.  The numeric side
    ``(E(w + eps) - E(w - eps)) / (2 eps)`` re-evaluates the network in
    ``np.longdouble``: in plain float64 the subtraction loses ~1e-12 absolute,
    which swamps weights whose true gradient is ~1e-7 (hidden units whose
    back-propagated signals nearly cancel).  Where ``longdouble`` is just
    float64 the check still runs, with that larger noise floor.
    The model is left unchanged.
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    x, t = (np.asarray(p, dtype=np.float64) for p in pattern)
    _check_pattern(model, x, t)
    analytic = gradients(model, x, t)
    ext = np.longdouble
    xe, te, eps = x.astype(ext), t.astype(ext), ext(epsilon)
    we = model.hidden_weights.astype(ext)
    ve = model.output_weights.astype(ext)
    worst = 0.0
    for grad, weights in zip(analytic, (we, ve)):
        for idx in np.ndindex(weights.shape):
            saved = weights[idx]
            weights[idx] = saved + eps
            e_plus = _extended_error(we, ve, xe, te)
            weights[idx] = saved - eps
            e_minus = _extended_error(we, ve, xe, te)
            weights[idx] = saved
            numeric = float((e_plus - e_minus) / (2 * eps))
            a = float(grad[idx])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-12)
            worst = max(worst, rel)
    return worst


def random_check_case(seed: int, trial: int, config: MlpConfig | None = None):
    """Seeded random (model, pattern) pair for gradient checking."""
    config = replace(config or MlpConfig(), rng_seed=seed)
    rng = make_rng(seed, GRADCHECK_STREAM + trial)
    model = init_nguyen_widrow(config, rng)
    x = rng.uniform(LOW_TARGET, HIGH_TARGET, size=config.n_in)
    if config.n_out == 2:
        t = np.array(encode_grade(int(rng.integers(1, 5))))
    else:
        t = rng.choice([LOW_TARGET, HIGH_TARGET], size=config.n_out)
    return model, (x, t)


def gradient_check_trials(seed: int = 0, trials: int = 20, epsilon: float = 1e-5,
                          config: MlpConfig | None = None) -> float:
    return max(gradient_check(*random_check_case(seed, k, config), epsilon) for k in range(trials))
