"""Binary linear source codes used as beamforming measurement designs.

A generator matrix ``G`` (m x n, entries in {0, 1}) maps a binary support
vector of length n to an m-bit syndrome.  Row i of ``G`` lists the angular
directions combined by measurement i, so a code that is one-to-one over all
supports of weight <= L yields measurements that identify any channel with
at most L paths.

Matrices are plain ``numpy.uint8`` arrays; every public function accepts
anything array-like and validates it with :func:`as_binary`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

# Golay (23, 12) generator polynomial x^11 + x^10 + x^6 + x^5 + x^4 + x^2 + 1.
GOLAY_POLY = 0b110001110101

# Difference vectors examined by the injectivity check before giving up.
INJECTIVITY_BUDGET = 50_000_000


class InvalidParameterError(ValueError):
    """Raised for out-of-range code parameters."""


class NotFullRankError(ValueError):
    """Raised when an operation needs full GF(2) row rank."""


class TooExpensiveError(RuntimeError):
    """Raised when an exhaustive enumeration exceeds its budget."""


def as_binary(M) -> np.ndarray:
    """Return ``M`` as a 2-D uint8 array, checking every entry is 0 or 1."""
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidParameterError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all((A == 0) | (A == 1)):
        raise InvalidParameterError("binary matrix entries must be 0 or 1")
    return A.astype(np.uint8)


@dataclass(frozen=True)
class SupportVector:
    """Sorted index set of the nonzero components of a length-``length`` vector."""

    length: int
    ones: tuple[int, ...] = ()

    def __post_init__(self):
        ones = tuple(int(i) for i in self.ones)
        if any(b <= a for a, b in zip(ones, ones[1:])):
            raise InvalidParameterError("support indices must be strictly increasing")
        if ones and (ones[0] < 0 or ones[-1] >= self.length):
            raise InvalidParameterError("support index out of range")
        object.__setattr__(self, "ones", ones)

    @classmethod
    def of(cls, v, tol: float = 0.0) -> "SupportVector":
        v = np.asarray(v).ravel()
        return cls(v.size, tuple(np.flatnonzero(np.abs(v) > tol)))

    @property
    def weight(self) -> int:
        return len(self.ones)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.uint8)
        out[list(self.ones)] = 1
        return out


def enumerate_supports(n: int, L: int) -> list[tuple[int, ...]]:
    """All index sets of size <= L over ``range(n)``, by size then lexicographically."""
    out: list[tuple[int, ...]] = []
    for k in range(min(L, n) + 1):
        out.extend(combinations(range(n), k))
    return out


def count_supports(n: int, L: int) -> int:
    return sum(math.comb(n, i) for i in range(min(L, n) + 1))


def rank_gf2(M) -> int:
    """Row rank of ``M`` over GF(2) by Gaussian elimination."""
    R = as_binary(M).copy()
    m, n = R.shape
    rank = 0
    for col in range(n):
        if rank == m:
            break
        pivots = np.flatnonzero(R[rank:, col])
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            R[[rank, p]] = R[[p, rank]]
        below = rank + 1 + np.flatnonzero(R[rank + 1:, col])
        R[below] ^= R[rank]
        rank += 1
    return rank


def gf2_matmul(A, B) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % 2


def hamming_parity_check(r: int) -> np.ndarray:
    """r x (2^r - 1) matrix whose columns are 1..2^r-1 in binary, MSB in row 0."""
    if r < 2:
        raise InvalidParameterError(f"Hamming parameter r must be >= 2, got {r}")
    values = np.arange(1, 2**r)
    shifts = np.arange(r - 1, -1, -1)[:, None]
    return ((values[None, :] >> shifts) & 1).astype(np.uint8)


def golay_parity_check() -> np.ndarray:
    """11 x 23 parity-check matrix [I_11 | P] of the binary (23, 12) Golay code.

    Column j holds the coefficients of x^j mod g(x), so the first eleven
    columns form the identity and H @ c = c(x) mod g(x) for a word c.
    """
    H = np.zeros((11, 23), dtype=np.uint8)
    for j in range(23):
        rem = _poly_mod(1 << j, GOLAY_POLY)
        H[:, j] = [(rem >> i) & 1 for i in range(11)]
    return H


def _poly_mod(a: int, g: int) -> int:
    dg = g.bit_length() - 1
    while a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a


def reed_muller_generator(r: int, m: int) -> np.ndarray:
    """Generator matrix of RM(r, m): monomials of degree <= r on all 2^m points.

    RM(m - r - 1, m) is the dual code, so RM(2, 5) (16 x 32, minimum distance 8)
    is its own parity-check matrix.
    """
    if not 0 <= r <= m:
        raise InvalidParameterError(f"need 0 <= r <= m, got r={r}, m={m}")
    points = (np.arange(2**m)[None, :] >> np.arange(m)[:, None]) & 1
    rows = []
    for deg in range(r + 1):
        for mono in combinations(range(m), deg):
            rows.append(np.prod(points[list(mono)], axis=0) if mono else np.ones(2**m, dtype=np.int64))
    return np.array(rows, dtype=np.uint8)


def identity_code(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidParameterError("identity code needs n >= 1")
    return np.eye(n, dtype=np.uint8)


def _column_ints(G: np.ndarray) -> np.ndarray:
    m = G.shape[0]
    if m > 63:
        raise InvalidParameterError("at most 63 rows supported by the syndrome packer")
    weights = np.left_shift(np.uint64(1), np.arange(m, dtype=np.uint64))
    return (G.astype(np.uint64) * weights[:, None]).sum(axis=0).astype(np.uint64)


def is_injective_over_supports(G, L: int, budget: int = INJECTIVITY_BUDGET) -> bool:
    """True iff G maps every support of weight <= L to a distinct syndrome.

    Equivalent check used here: no nonzero binary v with weight(v) <= 2L has
    G v = 0 (mod 2), since two distinct supports of weight <= L differ by
    such a v and every such v splits into two of them.
    """
    G = as_binary(G)
    n = G.shape[1]
    if L > n:
        raise InvalidParameterError(f"L={L} exceeds the number of columns {n}")
    max_w = min(2 * L, n)
    if max_w == 0:
        return True
    needed = sum(math.comb(n, w) for w in range(1, max_w + 1))
    if needed > budget:
        raise TooExpensiveError(
            f"{needed} difference vectors for n={n}, L={L} exceeds budget {budget}")

    cols = _column_ints(G)
    syn = cols.copy()
    last = np.arange(n)
    if np.any(syn == 0):
        return False
    for _ in range(2, max_w + 1):
        new_syn, new_last = [], []
        for j in range(1, n):
            mask = last < j
            if mask.any():
                new_syn.append(syn[mask] ^ cols[j])
                new_last.append(np.full(int(mask.sum()), j))
        if not new_syn:
            break
        syn = np.concatenate(new_syn)
        last = np.concatenate(new_last)
        if np.any(syn == 0):
            return False
    return True


def min_measurements_lower_bound(n: int, L: int) -> int:
    """ceil(log2(sum_{i<=L} C(n, i))) in exact integer arithmetic."""
    if L < 0 or L > n:
        raise InvalidParameterError(f"need 0 <= L <= n, got n={n}, L={L}")
    total = count_supports(n, L)
    return (total - 1).bit_length()


def to_standard_form(G) -> tuple[np.ndarray, np.ndarray]:
    """Bring G to [I_m | P] by GF(2) row operations plus a column permutation.

    Returns ``(G_std, perm)`` where ``G_std`` is row-equivalent to
    ``G[:, perm]``.  Columns are only moved when the natural column has no
    pivot, so a matrix already in standard form comes back unchanged.
    """
    R = as_binary(G).copy()
    m, n = R.shape
    perm = np.arange(n)
    for r in range(m):
        col = None
        for c in range(r, n):
            if R[r:, c].any():
                col = c
                break
        if col is None:
            raise NotFullRankError(f"matrix has GF(2) rank {r} < {m} rows")
        if col != r:
            R[:, [r, col]] = R[:, [col, r]]
            perm[[r, col]] = perm[[col, r]]
        p = r + np.flatnonzero(R[r:, r])[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        others = np.flatnonzero(R[:, r])
        others = others[others != r]
        R[others] ^= R[r]
    return R, perm


def min_singular_value(G) -> float:
    """Smallest of the min(m, n) singular values of G read as a real 0/1 matrix.

    Uses the eigenvalues of the smaller Gram matrix (G G^T when m <= n).
    """
    A = np.asarray(G, dtype=float)
    gram = A @ A.T if A.shape[0] <= A.shape[1] else A.T @ A
    lam = np.linalg.eigvalsh(gram)[0]
    return float(math.sqrt(max(lam, 0.0)))


def write_code(G, path) -> None:
    """Write G as text: "m n" then m lines of n space-separated digits."""
    G = as_binary(G)
    lines = [f"{G.shape[0]} {G.shape[1]}"]
    lines += [" ".join(str(int(b)) for b in row) for row in G]
    Path(path).write_text("\n".join(lines) + "\n")


def read_code(path) -> np.ndarray:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise InvalidParameterError(f"{path}: missing 'm n' header")
    m, n = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m or any(len(r) != n for r in body):
        raise InvalidParameterError(f"{path}: body does not match header {m}x{n}")
    return as_binary([[int(x) for x in r] for r in body])


@dataclass(frozen=True)
class CodeSpec:
    """A named measurement code.

    ``kind`` is one of ``hamming``, ``golay23``, ``reed_muller``, ``identity``
    or ``explicit``; ``params`` carries the integers for the named kinds
    (Hamming r; Golay shortened length; RM (r, m); identity size).
    """

    kind: str
    params: tuple[int, ...] = ()
    explicit: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def parse(cls, text: str) -> "CodeSpec":
        """Parse ``hamming:r``, ``golay23[:n]``, ``rm:r:m``, ``identity:n`` or a file path."""
        parts = text.strip().split(":")
        head = parts[0].lower()
        try:
            nums = tuple(int(p) for p in parts[1:])
        except ValueError:
            nums = None
        if head == "hamming" and nums is not None and len(nums) == 1:
            return cls("hamming", nums)
        if head == "golay23" and nums is not None and len(nums) <= 1:
            return cls("golay23", nums)
        if head == "rm" and nums is not None and len(nums) == 2:
            return cls("reed_muller", nums)
        if head == "identity" and nums is not None and len(nums) == 1:
            return cls("identity", nums)
        if Path(text).exists():
            return cls("explicit", (), read_code(text))
        raise InvalidParameterError(f"unrecognised code spec {text!r}")

    def matrix(self) -> np.ndarray:
        if self.kind == "hamming":
            return hamming_parity_check(self.params[0])
        if self.kind == "golay23":
            H = golay_parity_check()
            if self.params:
                n = self.params[0]
                if not 11 <= n <= 23:
                    raise InvalidParameterError("shortened Golay length must be in 11..23")
                H = H[:, :n]
            return H
        if self.kind == "reed_muller":
            return reed_muller_generator(*self.params)
        if self.kind == "identity":
            return identity_code(self.params[0])
        if self.kind == "explicit":
            return as_binary(self.explicit)
        raise InvalidParameterError(f"unknown code kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "explicit":
            G = self.matrix()
            return f"explicit{G.shape[0]}x{G.shape[1]}"
        return ":".join([{"reed_muller": "rm"}.get(self.kind, self.kind), *map(str, self.params)])

    @property
    def m(self) -> int:
        return self.matrix().shape[0]

    @property
    def n(self) -> int:
        return self.matrix().shape[1]
