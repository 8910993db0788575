"""Code-driven beamformers, measurement acquisition and energy accounting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import awgn, is_ideal_adc, quantize, uniform_noise
from .gf2codes import as_binary


@dataclass(frozen=True)
class BeamformerBank:
    """One beamformer per row of ``vectors`` (shape m x n).

    ``code`` is the binary matrix the bank was built from, or None for
    banks that are not code-driven (random phases, DFT sweeps).
    """

    vectors: np.ndarray
    code: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def overlap_counts(self) -> np.ndarray:
        if self.code is None:
            return np.ones(self.m, dtype=int)
        return self.code.sum(axis=1).astype(int)

    def overlap(self, statistic: str = "max") -> float:
        counts = self.overlap_counts
        if statistic == "max":
            return float(counts.max())
        if statistic == "mean":
            return float(counts.mean())
        raise ValueError(f"unknown overlap statistic {statistic!r}")

    @property
    def norms_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.vectors) ** 2, axis=1)


def _build_bank(G, U: np.ndarray, tol: float = 1e-9) -> BeamformerBank:
    G = as_binary(G)
    if G.shape[1] != U.shape[0] or U.shape[0] != U.shape[1]:
        raise ValueError(f"code with {G.shape[1]} columns does not fit a {U.shape} basis")
    # v_i = sum of basis columns selected by row i, i.e. V = G U^T.
    V = G.astype(float) @ U.T
    check = V.conj() @ U
    if np.max(np.abs(check - G)) > tol:
        raise ValueError("basis is not unitary: beam patterns do not reproduce the code rows")
    return BeamformerBank(V, G)


def build_combiners(G_r, U_r: np.ndarray) -> BeamformerBank:
    """Rx combiners w_i = sum of U_r columns j with g_ij = 1, so w_i^H U_r = g_i."""
    return _build_bank(G_r, U_r)


def build_precoders(G_t, U_t: np.ndarray) -> BeamformerBank:
    """Tx precoders f_j built like the combiners, so f_j^H U_t = g_j."""
    return _build_bank(G_t, U_t)


def db_to_linear(db: float) -> float:
    return 0.0 if math.isinf(db) and db < 0 else 10 ** (db / 10)


@dataclass
class MeasurementSet:
    """Clean measurements Y^s and the noisy, quantised observation (m_r x m_t)."""

    clean: np.ndarray
    observed: np.ndarray
    snr_db: float
    adc_bits: float | None

    def __post_init__(self):
        if self.clean.shape != self.observed.shape:
            raise ValueError("clean and observed shapes differ")
        if not np.all(np.isfinite(self.observed - self.clean)):
            raise ValueError("measurement error is not finite")

    @property
    def error(self) -> np.ndarray:
        return self.observed - self.clean

    def to_json(self) -> str:
        bits = None if is_ideal_adc(self.adc_bits) else self.adc_bits
        return json.dumps({
            "snr_db": None if math.isinf(self.snr_db) else self.snr_db,
            "adc_bits": bits,
            "clean": {"re": self.clean.real.tolist(), "im": self.clean.imag.tolist()},
            "observed": {"re": self.observed.real.tolist(), "im": self.observed.imag.tolist()},
        })

    @classmethod
    def from_json(cls, text: str) -> "MeasurementSet":
        d = json.loads(text)

        def grid(g):
            return np.array(g["re"], dtype=float) + 1j * np.array(g["im"], dtype=float)

        snr = math.inf if d["snr_db"] is None else d["snr_db"]
        return cls(grid(d["clean"]), grid(d["observed"]), snr, d["adc_bits"])


def acquire(Q: np.ndarray, W: BeamformerBank, F: BeamformerBank, snr_db: float,
            adc_bits, v_fs: float, rng: np.random.Generator,
            noise: str = "gaussian") -> MeasurementSet:
    """Take every (combiner i, precoder j) measurement of the physical channel Q.

    clean[i, j] = w_i^H Q f_j with a unit pilot.  The receiver noise after
    combining has variance ||w_i||^2 / SNR relative to that unit-gain
    signal; the ADC sees the gain-normalised sum, so ``v_fs`` is the full
    scale in channel-gain units.  ``snr_db = inf`` disables noise.
    """
    Q = np.asarray(Q, dtype=complex)
    if Q.shape != (W.n, F.n):
        raise ValueError(f"channel {Q.shape} does not fit banks {W.n}x{F.n}")
    clean = W.vectors.conj() @ Q @ F.vectors.T
    snr = db_to_linear(snr_db)
    if math.isinf(snr):
        noisy = clean
    else:
        if snr <= 0:
            raise ValueError("SNR must be positive")
        draw = awgn if noise == "gaussian" else uniform_noise
        unit = draw(rng, 1.0, clean.shape)
        noisy = clean + unit * np.sqrt(W.norms_sq / snr)[:, None]
    observed = quantize(noisy, adc_bits, v_fs)
    return MeasurementSet(clean, np.asarray(observed, dtype=complex), snr_db, adc_bits)


@dataclass(frozen=True)
class LinkBudget:
    """Path loss, noise power and per-measurement duration used for E_T."""

    mu_db: float = -88.0
    n0_dbm: float = -88.0
    tau_s: float = 23e-6

    @property
    def n0_over_mu_mw(self) -> float:
        return 10 ** (self.n0_dbm / 10) / 10 ** (self.mu_db / 10)

    def energy(self, m: int, o_t: float, o_r: float, snr_linear: float) -> float:
        return total_energy(m, o_t, o_r, snr_linear, 10 ** (self.n0_dbm / 10),
                            10 ** (self.mu_db / 10), self.tau_s)

    def snr_for_energy(self, e_mj: float, m: int, o_t: float, o_r: float) -> float:
        """Per-beam linear SNR that spends exactly ``e_mj`` over ``m`` measurements."""
        return e_mj / (m * o_t * o_r * self.n0_over_mu_mw * self.tau_s)


def total_energy(m: int, o_t: float, o_r: float, snr_linear: float, n0_mw: float,
                 mu_linear: float, tau_s: float) -> float:
    """E_T = m * o_t * o_r * SNR * (N_0 / mu) * tau, in mJ when N_0 is in mW."""
    return m * o_t * o_r * snr_linear * (n0_mw / mu_linear) * tau_s
