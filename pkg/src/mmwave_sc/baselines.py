"""Reference schemes: random-phase compressed sensing with l0 recovery, and an 802.11ad sector sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .channel import quantize
from .decoders import TIE_RTOL, SearchDecoder
from .gf2codes import count_supports
from .measurement import BeamformerBank, db_to_linear

L0_BUDGET = 10**7


class BudgetExceededError(RuntimeError):
    pass


def cs_random_beamformers(n: int, m: int, rng: np.random.Generator) -> BeamformerBank:
    """m unit-norm beamformers whose entries are exp(j*theta)/sqrt(n), theta ~ U[0, 2pi)."""
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    theta = rng.uniform(0.0, 2 * np.pi, size=(m, n))
    return BeamformerBank(np.exp(1j * theta) / math.sqrt(n), None)


@dataclass(frozen=True)
class SensingMatrix:
    """B with B @ vec(Q^a) = vec(Y), both vectorised column-major.

    Row ``j * m_r + i`` belongs to combiner i and precoder j; column
    ``t * n_r + r`` to angular bin (r, t).  ``A_r`` and ``A_t`` are the
    per-side factors, B = kron(A_t, A_r).
    """

    b: np.ndarray
    A_r: np.ndarray
    A_t: np.ndarray

    @property
    def shape(self):
        return self.b.shape

    @property
    def n_r(self) -> int:
        return self.A_r.shape[1]

    @property
    def n_t(self) -> int:
        return self.A_t.shape[1]


def build_sensing_matrix(W: BeamformerBank, F: BeamformerBank, U_r, U_t) -> SensingMatrix:
    A_r = W.vectors.conj() @ U_r
    A_t = F.vectors @ np.asarray(U_t).conj()
    return SensingMatrix(np.kron(A_t, A_r), A_r, A_t)


def vec(X) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(x, n_r: int, n_t: int) -> np.ndarray:
    return np.asarray(x).reshape((n_r, n_t), order="F")


def sparse_recover_l0(y, B, L: int, budget: int = L0_BUDGET, chunk: int = 4096) -> np.ndarray:
    """Exhaustive l0 search over the columns of an arbitrary complex B.

    Supports are scanned by size then lexicographically, and a later support
    replaces the incumbent only when its residual is smaller beyond the tie
    margin.  Returns the length-N estimate; callers reshape with ``unvec``.
    """
    Bm = B.b if isinstance(B, SensingMatrix) else np.asarray(B)
    y = np.asarray(y, dtype=complex).ravel()
    m, N = Bm.shape
    if y.size != m:
        raise ValueError(f"expected {m} measurements, got {y.size}")
    kmax = min(L, N, m)
    total = count_supports(N, kmax)
    if total > budget:
        raise BudgetExceededError(f"{total} supports exceed the l0 budget {budget}")
    best_res = float(np.linalg.norm(y))
    tol = TIE_RTOL * max(1.0, best_res)
    best = np.zeros(N, dtype=complex)
    Bc = Bm.astype(complex)
    for k in range(1, kmax + 1):
        it = combinations(range(N), k)
        while True:
            idx = np.array([s for _, s in zip(range(chunk), it)], dtype=int)
            if idx.size == 0:
                break
            sub = np.transpose(Bc[:, idx], (1, 0, 2))              # (c, m, k)
            gram = np.conj(np.transpose(sub, (0, 2, 1))) @ sub       # (c, k, k)
            rhs = np.conj(np.transpose(sub, (0, 2, 1))) @ y          # (c, k)
            try:
                x = np.linalg.solve(gram, rhs[..., None])[..., 0]
            except np.linalg.LinAlgError:
                x = np.stack([np.linalg.lstsq(s, y, rcond=None)[0] for s in sub])
            res = np.linalg.norm(y[None, :] - np.einsum("cmk,ck->cm", sub, x), axis=1)
            i = int(np.argmin(res))
            if res[i] < best_res - tol:
                i = int(np.argmax(res <= res[i] + tol))
                best_res = float(res[i])
                best = np.zeros(N, dtype=complex)
                best[idx[i]] = x[i]
    return best


class TwoStepCsDecoder:
    """Separable CS decode: columns of Y with A_r, then rows of the result with A_t.

    Used when the joint search over all n_r * n_t bins is beyond budget.
    """

    def __init__(self, S: SensingMatrix, L: int):
        self.S = S
        self.rx = SearchDecoder(S.A_r, L)
        self.tx = SearchDecoder(S.A_t, L)

    def decode(self, Y) -> np.ndarray:
        inter = self.rx.decode(np.asarray(Y, dtype=complex))
        return self.tx.decode(inter.T).T


def cs_decode(Y, S: SensingMatrix, L: int, mode: str = "auto", budget: int = L0_BUDGET) -> np.ndarray:
    """Estimate Q^a (n_r x n_t) from the m_r x m_t CS observation."""
    Y = np.asarray(Y, dtype=complex)
    N = S.n_r * S.n_t
    joint_ok = count_supports(N, min(L, N, S.b.shape[0])) <= budget
    if mode == "joint" or (mode == "auto" and joint_ok):
        return unvec(sparse_recover_l0(vec(Y), S, L, budget), S.n_r, S.n_t)
    if mode in ("auto", "two_step"):
        return TwoStepCsDecoder(S, L).decode(Y)
    raise ValueError(f"unknown CS decoder mode {mode!r}")


class SweepResult(NamedTuple):
    rx_bin: int
    tx_bin: int
    gain: complex
    n_measurements: int
    no_signal: bool


# Peak magnitudes below this (after the ADC) are flagged as no signal.
NO_SIGNAL_LEVEL = 1e-12


def sector_sweep_80211ad(Q, U_r, U_t, snr_db: float, adc_bits, rng: np.random.Generator,
                         v_fs: float = 1.0, noise: str = "gaussian") -> SweepResult:
    """Sector-level sweep with a single-element quasi-omni pattern on the idle side.

    Phase 1 steers each DFT transmit beam while one receive element listens,
    phase 2 swaps roles.  The strongest measurement of each phase picks that
    side's bin (first index on ties).  The gain estimate averages both phases
    after undoing the 1/sqrt(n) quasi-omni gain.
    """
    Q = np.asarray(Q, dtype=complex)
    n_r, n_t = Q.shape
    omni_r = np.zeros(n_r)
    omni_r[0] = 1.0
    omni_t = np.zeros(n_t)
    omni_t[0] = 1.0
    u1 = omni_r @ Q @ U_t          # w = omni, f_j = U_t[:, j]
    u2 = U_r.conj().T @ Q @ omni_t  # w_i = U_r[:, i], f = omni
    snr = db_to_linear(snr_db)
    if not math.isinf(snr):
        from .channel import awgn, uniform_noise

        draw = awgn if noise == "gaussian" else uniform_noise
        u1 = u1 + draw(rng, 1.0 / snr, n_t)
        u2 = u2 + draw(rng, 1.0 / snr, n_r)
    u1 = np.asarray(quantize(u1, adc_bits, v_fs))
    u2 = np.asarray(quantize(u2, adc_bits, v_fs))
    tx = int(np.argmax(np.abs(u1)))
    rx = int(np.argmax(np.abs(u2)))
    peak = max(abs(u1[tx]), abs(u2[rx]))
    gain = 0.5 * (math.sqrt(n_r) * u1[tx] + math.sqrt(n_t) * u2[rx])
    return SweepResult(rx, tx, complex(gain), n_r + n_t, bool(peak < NO_SIGNAL_LEVEL))
