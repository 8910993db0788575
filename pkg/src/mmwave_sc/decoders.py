"""Measurement decoders: exhaustive l0 search, MLP mapping and the two-step MIMO pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .gf2codes import as_binary, count_supports

# Supports whose residual is within this (relative) margin of the best count as ties.
TIE_RTOL = 1e-9
# Estimates below THRESHOLD_REL * alpha_max are zeroed before scoring.
THRESHOLD_REL = 1e-6


class DecoderSizeError(ValueError):
    pass


class SearchDecoder:
    """Least-squares fit on every support of size <= L, keep the smallest residual.

    ``A`` is the m x n sensing matrix (a 0/1 generator matrix or any complex
    matrix).  Supports are visited by size, then lexicographically; a support
    wins only if its residual is strictly better than every earlier one
    beyond a relative tie margin, so exact fits prefer the sparsest
    explanation.  One QR factorisation per support is cached at
    construction.
    """

    def __init__(self, A, L: int, budget: int = 10**7):
        A = np.asarray(A)
        if A.ndim != 2:
            raise ValueError("sensing matrix must be 2-D")
        self.A = A.astype(complex if np.iscomplexobj(A) else float)
        self.L = int(L)
        self.m, self.n = self.A.shape
        n_sup = count_supports(self.n, self.L)
        if n_sup > budget:
            raise ValueError(f"{n_sup} supports exceed the search budget {budget}")
        self._blocks = []
        for k in range(1, min(self.L, self.n, self.m) + 1):
            idx = np.array(list(combinations(range(self.n), k)), dtype=int)
            sub = np.transpose(self.A[:, idx], (1, 0, 2))  # (N_k, m, k)
            Qf, Rf = np.linalg.qr(sub)
            self._blocks.append((idx, Qf, Rf))

    @property
    def G(self):
        return self.A

    def decode(self, Y) -> np.ndarray:
        """Decode each column of ``Y`` (m x c, or a length-m vector)."""
        return self.decode_with_residual(Y)[0]

    def decode_with_residual(self, Y):
        Y = np.asarray(Y)
        vector = Y.ndim == 1
        if vector:
            Y = Y[:, None]
        if Y.shape[0] != self.m:
            raise DecoderSizeError(f"expected {self.m} measurements, got {Y.shape[0]}")
        dtype = complex if (np.iscomplexobj(Y) or np.iscomplexobj(self.A)) else float
        Y = Y.astype(dtype)
        c = Y.shape[1]

        best_res = np.linalg.norm(Y, axis=0)
        tol = TIE_RTOL * np.maximum(1.0, best_res)
        X = np.zeros((self.n, c), dtype=dtype)
        for idx, Qf, Rf in self._blocks:
            proj = np.einsum("smk,mc->skc", Qf.conj(), Y)
            res = np.linalg.norm(Y[None] - Qf @ proj, axis=1)  # (N_k, c)
            s_best = np.argmin(res, axis=0)
            r_best = res[s_best, np.arange(c)]
            better = r_best < best_res - tol
            if not better.any():
                continue
            cols = np.flatnonzero(better)
            # first support (in order) within tolerance of this block's minimum
            within = res[:, cols] <= r_best[cols] + tol[cols]
            s_pick = np.argmax(within, axis=0)
            coef = np.linalg.solve(Rf[s_pick], proj[s_pick, :, cols][..., None])[..., 0]
            X[:, cols] = 0
            X[idx[s_pick].T, cols[None, :]] = coef.T
            best_res[cols] = res[s_pick, cols]
        if vector:
            return X[:, 0], best_res[0]
        return X, best_res


@lru_cache(maxsize=32)
def _cached_search(key: bytes, shape: tuple[int, int], L: int) -> SearchDecoder:
    G = np.frombuffer(key, dtype=np.uint8).reshape(shape)
    return SearchDecoder(G, L)


def search_decode_simo(y, G, L: int) -> np.ndarray:
    """Exhaustive l0 decode of one measurement vector with generator matrix G."""
    G = as_binary(G)
    dec = _cached_search(G.tobytes(), G.shape, int(L))
    return dec.decode(np.asarray(y))


class MlpDecoder:
    """Apply a trained MLP to the real and imaginary parts separately."""

    def __init__(self, model, G=None):
        self.model = model
        self.m = model.layer_sizes[0]
        self.n = model.layer_sizes[-1]
        self.G = None if G is None else np.asarray(G, dtype=float)
        if self.G is not None and self.G.shape != (self.m, self.n):
            raise DecoderSizeError(f"model {self.m}->{self.n} does not match code {self.G.shape}")

    def decode(self, Y) -> np.ndarray:
        from .mlp import forward

        Y = np.asarray(Y)
        vector = Y.ndim == 1
        if vector:
            Y = Y[:, None]
        if Y.shape[0] != self.m:
            raise DecoderSizeError(f"expected {self.m} measurements, got {Y.shape[0]}")
        re = forward(self.model, np.ascontiguousarray(Y.real.T))
        im = forward(self.model, np.ascontiguousarray(np.imag(Y).T))
        X = (re + 1j * im).T.astype(complex)
        return X[:, 0] if vector else X


def mlp_decode_simo(y, model) -> np.ndarray:
    return MlpDecoder(model).decode(y)


@dataclass
class MimoEstimate:
    q_hat: np.ndarray
    intermediate: np.ndarray
    residual: float


def decode_mimo(ms, rx_dec, tx_dec, threshold: float = 0.0) -> MimoEstimate:
    """Two-step decode: columns with the rx decoder, then rows with the tx decoder.

    ``ms`` is a MeasurementSet or an m_r x m_t observation matrix.  Entries
    of the final estimate with magnitude below ``threshold`` are zeroed.
    """
    Y = np.asarray(getattr(ms, "observed", ms))
    if Y.ndim != 2 or Y.shape != (rx_dec.m, tx_dec.m):
        raise DecoderSizeError(
            f"measurements {Y.shape} do not match decoders ({rx_dec.m}, {tx_dec.m})")
    inter = rx_dec.decode(Y)                 # n_r x m_t
    q_hat = tx_dec.decode(inter.T).T         # n_r x n_t
    q_hat = np.asarray(q_hat, dtype=complex)
    if threshold > 0:
        q_hat[np.abs(q_hat) < threshold] = 0
    residual = float("nan")
    if rx_dec.G is not None and tx_dec.G is not None:
        residual = float(np.linalg.norm(Y - rx_dec.G @ q_hat @ tx_dec.G.T))
    return MimoEstimate(q_hat, inter, residual)


def top_l_paths(q_hat, L: int) -> list[tuple[int, int, complex]]:
    """The L largest-magnitude entries, descending; ties in (rx, tx) order."""
    if L < 1:
        raise ValueError("L must be >= 1")
    Q = np.asarray(q_hat)
    if Q.ndim == 1:
        Q = Q[:, None]
    flat = Q.ravel()
    order = np.argsort(-np.abs(flat), kind="stable")[:L]
    n_t = Q.shape[1]
    return [(int(i // n_t), int(i % n_t), complex(flat[i])) for i in order]
