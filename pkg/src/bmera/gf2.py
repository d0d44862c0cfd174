"""GF(2) linear algebra and the fast graph encoders.

Two code families are supported:

* polar: ``c = u @ B_n @ F^{(x)m}`` with the 2x2 lower-triangular kernel,
* bmera (convolutional polar): ``c = u @ B_n @ G_n`` where ``G_n`` adds a
  circularly shifted kernel stage per recursion level (closed boundaries).

Dense generator matrices exist as test oracles for n <= 4096; the graph
encoders are the production path and run in O(n log n).
"""

from functools import lru_cache

import numpy as np


def _check_power_of_two(n, minimum=1):
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"block length must be an integer, got {n!r}")
    n = int(n)
    if n < minimum or (n & (n - 1)) != 0:
        raise ValueError(f"block length must be a power of two >= {minimum}, got {n}")
    return n


def as_bits(v, length=None):
    """Normalize a bit sequence to a uint8 array, validating entries."""
    bits = np.asarray(v, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError(f"expected a 1-D bit sequence, got shape {bits.shape}")
    if bits.size and bits.max() > 1:
        raise ValueError("bit sequence contains values outside {0, 1}")
    if length is not None and bits.size != length:
        raise ValueError(f"expected {length} bits, got {bits.size}")
    return bits


def kernel_f():
    """The 2x2 polarization kernel [[1,0],[1,1]]."""
    return np.array([[1, 0], [1, 1]], dtype=np.uint8)


def shift_matrix(n):
    """Identity of size n with columns circularly shifted to the left by one.

    Column j of the result is e_{(j+1) mod n}.  n must be even and >= 2.
    """
    if not isinstance(n, (int, np.integer)) or int(n) < 2 or int(n) % 2 != 0:
        raise ValueError(f"shift matrix needs an even size >= 2, got {n!r}")
    n = int(n)
    m = np.zeros((n, n), dtype=np.uint8)
    m[(np.arange(n) + 1) % n, np.arange(n)] = 1
    return m


def bit_reversal_perm(n):
    """Permutation mapping index (b_{m-1}..b_0) to (b_0..b_{m-1}), n = 2^m."""
    n = _check_power_of_two(n)
    m = n.bit_length() - 1
    perm = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = 0
        x = i
        for _ in range(m):
            r = (r << 1) | (x & 1)
            x >>= 1
        perm[i] = r
    return perm


def bit_reversal_matrix(n):
    """Permutation matrix B_n of the bit reversal."""
    perm = bit_reversal_perm(n)
    m = np.zeros((n, n), dtype=np.uint8)
    m[np.arange(n), perm] = 1
    return m


def gf2_matmul(a, b):
    """Matrix product over GF(2).

    Uses float64 BLAS internally; exact for inner dimensions < 2^53.
    """
    prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def gf2_rank(mat):
    """Rank over GF(2) by Gaussian elimination."""
    a = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        pivots = np.nonzero(a[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        a[hit] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def gf2_is_invertible(mat):
    mat = np.asarray(mat)
    return mat.shape[0] == mat.shape[1] and gf2_rank(mat) == mat.shape[0]


@lru_cache(maxsize=None)
def _bmera_generator_cached(n):
    g = np.array([[1]], dtype=np.uint8)
    k = 2
    i2 = np.eye(2, dtype=np.uint8)
    while k <= n:
        ikf = np.kron(np.eye(k // 2, dtype=np.uint8), kernel_f())
        s = shift_matrix(k)
        a = gf2_matmul(gf2_matmul(gf2_matmul(s, ikf), s.T), ikf)
        g = gf2_matmul(a, np.kron(g, i2))
        k *= 2
    return g


def bmera_generator(n):
    """Generator G_n of the closed-boundary convolutional polar transform.

    G_1 = [1]; G_n = [S_n (I (x) F) S_n^T (I (x) F)] (G_{n/2} (x) I_2).
    """
    n = _check_power_of_two(n)
    return _bmera_generator_cached(n).copy()


@lru_cache(maxsize=None)
def _polar_generator_cached(n):
    m = n.bit_length() - 1
    fm = np.array([[1]], dtype=np.uint8)
    for _ in range(m):
        fm = np.kron(fm, kernel_f())
    return gf2_matmul(bit_reversal_matrix(n), fm)


def polar_generator(n):
    """B_n @ F^{(x)log2 n}, the polar transform with bit reversal."""
    n = _check_power_of_two(n)
    return _polar_generator_cached(n).copy()


def _graph_transform(u, shifted):
    n = u.size
    x = u[bit_reversal_perm(n)].copy()
    m = n.bit_length() - 1
    for s in range(m):
        stride = 1 << s
        block = x.reshape(-1, stride)
        rows = block.shape[0]
        if shifted:
            # kernel stage on pairs offset by one, wrapping around
            nxt = (np.arange(1, rows, 2) + 1) % rows
            block[1::2] ^= block[nxt]
        block[0::2] ^= block[1::2]
    return x


def encode_bmera(u):
    """Codeword c = u @ B_n @ G_n via the graph, O(n log n)."""
    u = as_bits(u)
    _check_power_of_two(u.size, minimum=4)
    return _graph_transform(u, shifted=True)


def encode_polar(u):
    """Codeword c = u @ B_n @ F^{(x)m} via butterfly stages, O(n log n)."""
    u = as_bits(u)
    _check_power_of_two(u.size, minimum=2)
    return _graph_transform(u, shifted=False)
