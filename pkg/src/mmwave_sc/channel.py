"""Sparse angular-domain mmWave channels, DFT bases, noise and ADC models."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array; ``delta`` is the element spacing in wavelengths."""

    n: int
    delta: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("array needs at least one element")
        if self.delta <= 0:
            raise ValueError("antenna spacing must be positive")

    @property
    def length_norm(self) -> float:
        return self.n * self.delta

    @property
    def critically_spaced(self) -> bool:
        return math.isclose(self.delta, 0.5)


def spatial_signature(geom: ArrayGeometry, omega: float) -> np.ndarray:
    """Unit-norm array response at directional cosine ``omega``."""
    k = np.arange(geom.n)
    return np.exp(-2j * np.pi * geom.delta * omega * k) / math.sqrt(geom.n)


def dft_matrix(geom: ArrayGeometry) -> np.ndarray:
    """Columns are spatial signatures at omega = k / length_norm, k = 0..n-1.

    The spacing cancels out of the phases, so this is always the unitary
    DFT; only at half-wavelength spacing do the n cosines tile one period
    of the visible region without gaps.
    """
    return np.stack(
        [spatial_signature(geom, k / geom.length_norm) for k in range(geom.n)], axis=1)


@dataclass(frozen=True)
class PathSpec:
    rx_bin: int
    tx_bin: int
    gain: complex


@dataclass
class AngularChannel:
    """Perfectly sparse angular channel: one nonzero entry per path."""

    n_r: int
    n_t: int
    paths: list[PathSpec] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for p in self.paths:
            if not (0 <= p.rx_bin < self.n_r and 0 <= p.tx_bin < self.n_t):
                raise ValueError(f"path bin ({p.rx_bin}, {p.tx_bin}) outside {self.n_r}x{self.n_t}")
            if (p.rx_bin, p.tx_bin) in seen:
                raise ValueError(f"duplicate path bin ({p.rx_bin}, {p.tx_bin})")
            seen.add((p.rx_bin, p.tx_bin))

    @property
    def entries(self) -> np.ndarray:
        Qa = np.zeros((self.n_r, self.n_t), dtype=complex)
        for p in self.paths:
            Qa[p.rx_bin, p.tx_bin] = p.gain
        return Qa

    @property
    def n_paths(self) -> int:
        return sum(1 for p in self.paths if p.gain != 0)

    def support(self) -> set[tuple[int, int]]:
        return {(p.rx_bin, p.tx_bin) for p in self.paths if p.gain != 0}

    @classmethod
    def from_matrix(cls, Qa, tol: float = 0.0) -> "AngularChannel":
        Qa = np.asarray(Qa, dtype=complex)
        if Qa.ndim == 1:
            Qa = Qa[:, None]
        rows, cols = np.nonzero(np.abs(Qa) > tol)
        paths = [PathSpec(int(i), int(j), complex(Qa[i, j])) for i, j in zip(rows, cols)]
        return cls(Qa.shape[0], Qa.shape[1], paths)

    def to_dict(self) -> dict:
        return {
            "n_r": self.n_r,
            "n_t": self.n_t,
            "paths": [{"rx": p.rx_bin, "tx": p.tx_bin, "re": complex(p.gain).real,
                       "im": complex(p.gain).imag} for p in self.paths],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "AngularChannel":
        d = json.loads(text)
        paths = [PathSpec(p["rx"], p["tx"], complex(p["re"], p["im"])) for p in d["paths"]]
        return cls(d["n_r"], d["n_t"], paths)


def sample_channel(n_r: int, n_t: int, L_max: int, alpha_max: float,
                   rng: np.random.Generator, uniform_support: bool = False) -> AngularChannel:
    """Draw a channel with at most ``L_max`` paths on distinct (rx, tx) bins.

    By default the path count is uniform on {0..L_max} and the bins are then
    uniform without replacement.  ``uniform_support=True`` instead draws the
    support uniformly over every support of size <= L_max (the
    entropy-maximising law behind the measurement lower bound).  Real and
    imaginary parts of each gain are independent U[-alpha_max, alpha_max].
    """
    N = n_r * n_t
    if L_max > N:
        raise ValueError(f"L_max={L_max} exceeds the {N} available bins")
    if uniform_support:
        sizes = np.array([math.comb(N, k) for k in range(L_max + 1)], dtype=float)
        k = int(rng.choice(L_max + 1, p=sizes / sizes.sum()))
    else:
        k = int(rng.integers(L_max + 1))
    bins = np.sort(rng.choice(N, size=k, replace=False))
    gains = rng.uniform(-alpha_max, alpha_max, size=(bins.size, 2))
    paths = [PathSpec(int(b // n_t), int(b % n_t), complex(g[0], g[1]))
             for b, g in zip(bins, gains)]
    return AngularChannel(n_r, n_t, paths)


def to_physical(ch, U_r: np.ndarray, U_t: np.ndarray) -> np.ndarray:
    """Q = U_r Q^a U_t^H.  ``ch`` may be an AngularChannel or a matrix."""
    Qa = ch.entries if isinstance(ch, AngularChannel) else np.asarray(ch, dtype=complex)
    if Qa.ndim == 1:
        Qa = Qa[:, None]
    if U_r.shape != (Qa.shape[0], Qa.shape[0]) or U_t.shape != (Qa.shape[1], Qa.shape[1]):
        raise ValueError(f"basis shapes {U_r.shape}, {U_t.shape} do not fit channel {Qa.shape}")
    return U_r @ Qa @ U_t.conj().T


def to_angular(Q: np.ndarray, U_r: np.ndarray, U_t: np.ndarray) -> np.ndarray:
    return U_r.conj().T @ np.asarray(Q, dtype=complex) @ U_t


def is_ideal_adc(bits) -> bool:
    return bits is None or (isinstance(bits, float) and math.isinf(bits))


def quantize(x, bits, v_fs: float):
    """Mid-tread ADC on real and imaginary parts separately.

    Clip to [-v_fs, v_fs] and round to the nearest multiple of
    v_fs / 2^(bits-1), giving 2^bits + 1 levels.  ``bits`` of None or inf is
    an ideal converter.
    """
    if is_ideal_adc(bits):
        return x
    if bits < 1 or v_fs <= 0:
        raise ValueError("need bits >= 1 and v_fs > 0")
    step = v_fs / 2 ** (int(bits) - 1)

    def q(r):
        return np.round(np.clip(r, -v_fs, v_fs) / step) * step

    x = np.asarray(x)
    if np.iscomplexobj(x):
        out = q(x.real) + 1j * q(x.imag)
    else:
        out = q(x)
    return out if out.ndim else out[()]


def awgn(rng: np.random.Generator, n0: float, size=None):
    """Circularly symmetric complex Gaussian noise with E|z|^2 = n0."""
    if n0 < 0:
        raise ValueError("noise power must be non-negative")
    s = math.sqrt(n0 / 2)
    z = rng.normal(0.0, 1.0, size) + 1j * rng.normal(0.0, 1.0, size)
    return z * s


def uniform_noise(rng: np.random.Generator, n0: float, size=None):
    """Complex noise with i.i.d. uniform real/imag parts and E|z|^2 = n0."""
    half = math.sqrt(3 * n0 / 2)
    return rng.uniform(-half, half, size) + 1j * rng.uniform(-half, half, size)
