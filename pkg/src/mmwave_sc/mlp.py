"""Multilayer perceptron decoder: forward/backward passes, ADAM, training and I/O.

Hidden layers use ReLU, the output layer is linear, and the loss is the
mean squared error over all outputs of a batch.  All parameters of a model
live in one flat buffer; ``weights`` and ``biases`` are views into it, which
lets the optimiser update everything with a handful of vector operations.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zipfile
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

from .channel import is_ideal_adc, quantize
from .gf2codes import as_binary, count_supports, enumerate_supports

FORMAT_NAME = "mmwave-sc-mlp"
FORMAT_VERSION = 1
REFERENCE_HIDDEN = (1024, 512, 512, 128, 128)
REFERENCE_OUTPUT = 23


class TrainingDivergedError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass
class MlpModel:
    layer_sizes: list[int]
    params: np.ndarray
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    weights: list[np.ndarray] = field(init=False, repr=False)
    biases: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ValueError(f"bad layer sizes {self.layer_sizes}")
        if self.params.ndim != 1 or self.params.size != n_params(self.layer_sizes):
            raise ValueError("parameter buffer does not match layer sizes")
        self.weights, self.biases = _views(self.params, self.layer_sizes)

    @property
    def dtype(self):
        return self.params.dtype

    def copy(self) -> "MlpModel":
        return MlpModel(list(self.layer_sizes), self.params.copy(),
                        self.hidden_activation, self.output_activation)


def n_params(layer_sizes) -> int:
    return sum(a * b + b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))


def _views(buf: np.ndarray, layer_sizes):
    weights, biases, off = [], [], 0
    for a, b in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(buf[off:off + a * b].reshape(a, b))
        off += a * b
        biases.append(buf[off:off + b])
        off += b
    return weights, biases


def init_model(layer_sizes, rng: np.random.Generator, dtype=np.float64) -> MlpModel:
    """He-uniform weights, zero biases."""
    buf = np.zeros(n_params(layer_sizes), dtype=dtype)
    model = MlpModel(list(layer_sizes), buf)
    for W in model.weights:
        limit = math.sqrt(6.0 / W.shape[0])
        W[...] = rng.uniform(-limit, limit, size=W.shape)
    return model


def default_architecture(m: int, n: int) -> list[int]:
    """Input m, the five-layer hidden ladder scaled by n / 23, output n."""
    scale = n / REFERENCE_OUTPUT
    return [m, *[max(8, int(round(h * scale))) for h in REFERENCE_HIDDEN], n]


def forward(model: MlpModel, x) -> np.ndarray:
    """Network output for a sample (1-D) or a batch (rows)."""
    x = np.asarray(x)
    single = x.ndim == 1
    a = np.atleast_2d(x).astype(model.dtype, copy=False)
    if a.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"input width {a.shape[1]} != model input {model.layer_sizes[0]}")
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        a = a @ W + b
        if i < last:
            np.maximum(a, 0, out=a)
    return a[0] if single else a


def loss_and_grad(model: MlpModel, X: np.ndarray, Y: np.ndarray,
                  grad: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Batch MSE and its gradient, written into ``grad`` (same layout as params)."""
    if grad is None:
        grad = np.empty_like(model.params)
    gW, gb = _views(grad, model.layer_sizes)
    acts = [X]
    a = X
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        a = a @ W + b
        if i < last:
            np.maximum(a, 0, out=a)
        acts.append(a)
    diff = acts[-1] - Y
    loss = float(np.mean(diff * diff))
    delta = diff * (2.0 / diff.size)
    for i in range(last, -1, -1):
        np.matmul(acts[i].T, delta, out=gW[i])
        np.sum(delta, axis=0, out=gb[i])
        if i > 0:
            delta = delta @ model.weights[i].T
            delta *= acts[i] > 0
    return loss, grad


# Moments smaller than this are flushed to zero; float32 denormals are slow.
_FLUSH = 1e-30


def _adam_numpy(p, g, m, v, tmp, lr_t, b1, b2, eps):
    m *= b1
    np.multiply(g, 1 - b1, out=tmp)
    m += tmp
    m[np.abs(m) < _FLUSH] = 0
    v *= b2
    np.multiply(g, g, out=tmp)
    tmp *= 1 - b2
    v += tmp
    v[v < _FLUSH] = 0
    np.sqrt(v, out=tmp)
    tmp += eps
    np.divide(m, tmp, out=tmp)
    tmp *= lr_t
    p -= tmp


if njit is not None:
    @njit(cache=True, nogil=True, fastmath=True)
    def _adam_fused(p, g, m, v, tmp, lr_t, b1, b2, eps):
        dt = p.dtype.type
        lr_t, b1, b2, eps = dt(lr_t), dt(b1), dt(b2), dt(eps)
        c1, c2, fl, zero = dt(1) - b1, dt(1) - b2, dt(_FLUSH), dt(0)
        for i in range(p.size):
            gi = g[i]
            mi = b1 * m[i] + c1 * gi
            vi = b2 * v[i] + c2 * gi * gi
            mi = mi if abs(mi) >= fl else zero
            vi = vi if vi >= fl else zero
            m[i] = mi
            v[i] = vi
            p[i] -= lr_t * mi / (np.sqrt(vi) + eps)
else:  # pragma: no cover
    _adam_fused = _adam_numpy


class Adam:
    """ADAM on a flat parameter vector (bias-corrected step size form)."""

    def __init__(self, params: np.ndarray, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8,
                 fused: bool = True):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros_like(params)
        self.v = np.zeros_like(params)
        self._tmp = np.empty_like(params)
        self._kernel = _adam_fused if fused else _adam_numpy
        self.t = 0

    def step(self, grad: np.ndarray) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * math.sqrt(1 - b2**self.t) / (1 - b1**self.t)
        self._kernel(self.params, grad, self.m, self.v, self._tmp, lr_t, b1, b2, self.eps)


@dataclass
class NoiseSpec:
    """Measurement corruption applied to training inputs (DNN-sd models)."""

    snr_db: float
    adc_bits: float | None = None
    v_fs: float = 3.0
    family: str = "gaussian"


@dataclass
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray
    noise: NoiseSpec | None = None

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets differ in length")


def gen_training_data(G, L: int, n_s: int, alpha_max: float, noise: NoiseSpec | None,
                      rng: np.random.Generator, budget: int = 5_000_000) -> TrainingSet:
    """n_s random real channels per support of size <= L, with inputs G @ target.

    With a NoiseSpec the inputs are corrupted like one real component of a
    measurement: Gaussian (or uniform) noise of variance ||g_i||^2 / (2 SNR)
    followed by the ADC.
    """
    G = as_binary(G).astype(float)
    m, n = G.shape
    total = n_s * count_supports(n, L)
    if total > budget:
        raise ValueError(f"{total} training samples exceed the budget {budget}")
    targets = np.zeros((total, n))
    row = 0
    for sup in enumerate_supports(n, L):
        block = slice(row, row + n_s)
        if sup:
            targets[block, list(sup)] = rng.uniform(-alpha_max, alpha_max, size=(n_s, len(sup)))
        row += n_s
    inputs = targets @ G.T
    if noise is not None and not math.isinf(noise.snr_db):
        snr = 10 ** (noise.snr_db / 10)
        var = G.sum(axis=1) / (2 * snr)
        if noise.family == "gaussian":
            z = rng.normal(size=inputs.shape) * np.sqrt(var)
        else:
            half = np.sqrt(3 * var)
            z = rng.uniform(-1, 1, size=inputs.shape) * half
        inputs = inputs + z
    if noise is not None and not is_ideal_adc(noise.adc_bits):
        inputs = quantize(inputs, noise.adc_bits, noise.v_fs)
    return TrainingSet(inputs, targets, noise)


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.30
    seed: int = 0
    patience: int | None = None
    dtype: str = "float32"

    def __post_init__(self):
        if not 0 < self.val_fraction < 1:
            raise ValueError("val_fraction must lie strictly between 0 and 1")


@dataclass
class TrainResult:
    model: MlpModel
    curve: list[tuple[int, float, float]]
    best_epoch: int
    best_val_mse: float


def evaluate_mse(model: MlpModel, X: np.ndarray, Y: np.ndarray, chunk: int = 8192) -> float:
    total = 0.0
    for s in range(0, len(X), chunk):
        d = forward(model, X[s:s + chunk]) - Y[s:s + chunk]
        total += float(np.sum(d.astype(np.float64) ** 2))
    return total / Y.size


def train(data: TrainingSet, arch, cfg: TrainConfig = TrainConfig(),
          rng: np.random.Generator | None = None, log=None) -> TrainResult:
    """Mini-batch ADAM on the MSE, keeping the parameters with the best validation MSE.

    The shuffle/split and initialisation are drawn from ``rng`` (defaulting to
    a generator seeded with ``cfg.seed``), so a fixed seed reproduces the
    same parameters bit for bit.
    """
    arch = list(arch)
    X = np.asarray(data.inputs)
    Y = np.asarray(data.targets)
    if arch[0] != X.shape[1] or arch[-1] != Y.shape[1]:
        raise ValueError(f"architecture {arch} does not match data {X.shape[1]}->{Y.shape[1]}")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    dtype = np.dtype(cfg.dtype)

    order = rng.permutation(len(X))
    n_val = int(round(cfg.val_fraction * len(X)))
    if n_val == 0 or n_val == len(X):
        raise ValueError("validation split leaves an empty partition")
    val_idx, tr_idx = order[:n_val], order[n_val:]
    Xtr, Ytr = X[tr_idx].astype(dtype), Y[tr_idx].astype(dtype)
    Xva, Yva = X[val_idx].astype(dtype), Y[val_idx].astype(dtype)

    model = init_model(arch, rng, dtype)
    opt = Adam(model.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    grad = np.empty_like(model.params)
    best = model.params.copy()
    best_val, best_epoch, stale = math.inf, 0, 0
    curve = []
    bs = cfg.batch_size
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(len(Xtr))
        acc, count = 0.0, 0
        for s in range(0, len(perm), bs):
            idx = perm[s:s + bs]
            loss, _ = loss_and_grad(model, Xtr[idx], Ytr[idx], grad)
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"loss became {loss} at epoch {epoch}, batch {s // bs}")
            opt.step(grad)
            acc += loss * len(idx)
            count += len(idx)
        train_mse = acc / count
        val_mse = evaluate_mse(model, Xva, Yva)
        if not math.isfinite(val_mse):
            raise TrainingDivergedError(f"validation MSE became {val_mse} at epoch {epoch}")
        curve.append((epoch, train_mse, val_mse))
        if log is not None:
            log(f"epoch {epoch:4d}  train {train_mse:.6f}  val {val_mse:.6f}")
        if val_mse < best_val:
            best_val, best_epoch, stale = val_mse, epoch, 0
            best[...] = model.params
        else:
            stale += 1
            if cfg.patience is not None and stale >= cfg.patience:
                break
    model.params[...] = best
    return TrainResult(model, curve, best_epoch, best_val)


def save_model(model: MlpModel, path) -> None:
    """Write an .npz container: a JSON header plus one row-major array per layer."""
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "layer_sizes": model.layer_sizes,
        "activations": [model.hidden_activation] * (len(model.layer_sizes) - 2)
        + [model.output_activation],
        "dtype": model.dtype.name,
    }
    arrays = {"header": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)}
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path) -> MlpModel:
    try:
        with np.load(path, allow_pickle=False) as z:
            header = json.loads(bytes(z["header"]).decode())
            if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
                raise ModelFormatError(f"{path}: unsupported model format {header.get('format')!r} "
                                       f"v{header.get('version')}")
            sizes = header["layer_sizes"]
            buf = np.zeros(n_params(sizes), dtype=np.dtype(header["dtype"]))
            model = MlpModel(sizes, buf, header["activations"][0] if len(sizes) > 2 else "relu",
                             header["activations"][-1])
            for i, (W, b) in enumerate(zip(model.weights, model.biases)):
                Wf, bf = z[f"W{i}"], z[f"b{i}"]
                if Wf.shape != W.shape or bf.shape != b.shape:
                    raise ModelFormatError(f"{path}: layer {i} has shape {Wf.shape}, expected {W.shape}")
                W[...] = Wf
                b[...] = bf
    except (zipfile.BadZipFile, EOFError, KeyError, OSError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: cannot read model ({exc})") from exc
    return model


def write_curve_csv(curve, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "train_mse", "val_mse"])
    for epoch, tr, va in curve:
        w.writerow([epoch, repr(float(tr)), repr(float(va))])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
