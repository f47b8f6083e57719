"""Band-storage square matrices with a partially pivoted LU factorization."""

import numpy as np


class SingularMatrixError(ArithmeticError):
    def __init__(self, pivot):
        super().__init__(f"matrix is numerically singular at pivot {pivot}")
        self.pivot = pivot


class BandError(IndexError):
    pass


class BandedMatrix:
    """Square n x n matrix holding only entries with -kl <= j - i <= ku.

    Row i is stored in ``data[i, j - i + kl]``.
    """

    def __init__(self, n, kl, ku, dtype=float):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        if kl < 0 or ku < 0:
            raise ValueError("bandwidths must be non-negative")
        self.n = int(n)
        self.kl = int(kl)
        self.ku = int(ku)
        self.data = np.zeros((self.n, self.kl + self.ku + 1), dtype=dtype)

    @classmethod
    def from_dense(cls, a, kl, ku):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        out = cls(n, kl, ku)
        for i in range(n):
            for j in range(max(0, i - kl), min(n, i + ku + 1)):
                out.data[i, j - i + kl] = a[i, j]
        rows, cols = np.nonzero(a)
        if np.any(cols - rows > ku) or np.any(rows - cols > kl):
            raise BandError("dense matrix has entries outside the band")
        return out

    def _in_band(self, i, j):
        return -self.kl <= j - i <= self.ku

    def _check(self, i, j):
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"index ({i}, {j}) out of range for n={self.n}")

    def get(self, i, j):
        self._check(i, j)
        if not self._in_band(i, j):
            return 0.0
        return float(self.data[i, j - i + self.kl])

    def set(self, i, j, value):
        self._check(i, j)
        if not self._in_band(i, j):
            if value == 0:
                return
            raise BandError(f"entry ({i}, {j}) lies outside band kl={self.kl}, ku={self.ku}")
        self.data[i, j - i + self.kl] = value

    def add(self, i, j, value):
        self._check(i, j)
        if not self._in_band(i, j):
            raise BandError(f"entry ({i}, {j}) lies outside band kl={self.kl}, ku={self.ku}")
        self.data[i, j - i + self.kl] += value

    def add_block(self, start, block):
        """Add a dense square block with its top-left corner at (start, start)."""
        k = block.shape[0]
        for a in range(k):
            i = start + a
            lo = start - i + self.kl
            if lo < 0 or lo + k > self.data.shape[1]:
                raise BandError("block does not fit inside the band")
            self.data[i, lo:lo + k] += block[a]

    def set_unit_row(self, i):
        self.data[i, :] = 0.0
        self.data[i, self.kl] = 1.0

    def copy(self):
        out = BandedMatrix(self.n, self.kl, self.ku)
        out.data = self.data.copy()
        return out

    def to_dense(self):
        a = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo = max(0, i - self.kl)
            hi = min(self.n, i + self.ku + 1)
            a[i, lo:hi] = self.data[i, lo - i + self.kl:hi - i + self.kl]
        return a

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"vector length {x.shape} does not match n={self.n}")
        # pad so every row sees a full window of width kl + ku + 1
        padded = np.concatenate([np.zeros(self.kl), x, np.zeros(self.ku)])
        width = self.kl + self.ku + 1
        windows = np.lib.stride_tricks.sliding_window_view(padded, width)[: self.n]
        return np.einsum("ij,ij->i", self.data, windows)

    def norm_inf(self):
        return float(np.max(np.sum(np.abs(self.data), axis=1)))

    def __repr__(self):
        return f"BandedMatrix(n={self.n}, kl={self.kl}, ku={self.ku})"


class BandedLU:
    """LU factors of a BandedMatrix with row pivoting, reusable across solves."""

    def __init__(self, n, kl, upper, lower, perm):
        self.n = n
        self.kl = kl
        self._upper = upper  # upper[k, d] = U[k, k + d]
        self._lower = lower  # lower[k, d] = L[k + 1 + d, k]
        self._perm = perm

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise ValueError(f"right-hand side has shape {b.shape}, expected ({self.n},)")
        n, kl = self.n, self.kl
        x = b.copy()
        perm, lower, upper = self._perm, self._lower, self._upper
        for k in range(n):
            p = perm[k]
            if p != k:
                x[k], x[p] = x[p], x[k]
            stop = min(n, k + kl + 1)
            if stop > k + 1:
                x[k + 1:stop] -= lower[k, : stop - k - 1] * x[k]
        width = upper.shape[1]
        for k in range(n - 1, -1, -1):
            stop = min(n, k + width)
            acc = x[k]
            if stop > k + 1:
                acc -= np.dot(upper[k, 1:stop - k], x[k + 1:stop])
            x[k] = acc / upper[k, 0]
        return x


def lu_factor(a, rtol=1e-14):
    """Factor a BandedMatrix with scaled partial pivoting.

    Raises SingularMatrixError when a pivot falls below ``rtol`` times the
    largest magnitude in the original row it came from.
    """
    n, kl, ku = a.n, a.kl, a.ku
    diag = kl + ku
    # LAPACK-style column storage: A[i, j] lives at ab[diag + i - j, j],
    # with kl extra rows on top for the fill-in that pivoting creates
    ab = np.zeros((2 * kl + ku + 1, n))
    for d in range(-kl, ku + 1):
        i = np.arange(max(0, -d), min(n, n - d))
        ab[diag - d, i + d] = a.data[i, d + kl]
    scale = np.max(np.abs(a.data), axis=1)
    origin = np.arange(n)

    width = kl + ku + 1
    upper = np.zeros((n, width))
    lower = np.zeros((n, max(kl, 1)))
    perm = np.zeros(n, dtype=int)
    for k in range(n):
        last = min(n - 1, k + kl)
        jmax = min(n - 1, k + kl + ku)
        cols = np.arange(k, jmax + 1)
        # scaled partial pivoting: compare entries relative to their original
        # row size, so a unit boundary row is not mixed with stiffness rows
        cand = np.abs(ab[diag:diag + last - k + 1, k])
        sizes = scale[origin[k:last + 1]]
        ratio = np.divide(cand, sizes, out=np.zeros_like(cand), where=sizes > 0)
        p = k + int(np.argmax(ratio))
        perm[k] = p
        if p != k:
            rk = ab[diag + k - cols, cols].copy()
            ab[diag + k - cols, cols] = ab[diag + p - cols, cols]
            ab[diag + p - cols, cols] = rk
            origin[k], origin[p] = origin[p], origin[k]
        pivot = ab[diag, k]
        if pivot == 0.0 or abs(pivot) < rtol * scale[origin[k]]:
            raise SingularMatrixError(k)
        if last > k:
            mult = ab[diag + 1:diag + 1 + last - k, k] / pivot
            lower[k, : last - k] = mult
            if jmax > k:
                rows = np.arange(k + 1, last + 1)[:, None]
                jj = cols[None, 1:]
                ab[diag + rows - jj, jj] -= mult[:, None] * ab[diag + k - jj, jj]
        upper[k, : jmax - k + 1] = ab[diag + k - cols, cols]
    return BandedLU(n, kl, upper, lower, perm)
