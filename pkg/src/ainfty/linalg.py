"""Exact rational sparse linear algebra and finite cochain complexes.

Scalars are ``fractions.Fraction`` throughout: arithmetic is exact, values
are kept in lowest terms with positive denominator, and nothing here ever
touches floating point.
"""

from fractions import Fraction

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(s):
    """Parse a decimal rational string like '3', '-1/2' into a Fraction."""
    return Fraction(str(s))


def rat_str(x):
    """Format a Fraction as the canonical decimal rational string."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class SparseMatrix:
    """Sparse matrix over Q; zero entries are never stored."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (r, c), v in entries.items():
                self[r, c] = v

    def __getitem__(self, rc):
        return self.entries.get(rc, ZERO)

    def __setitem__(self, rc, v):
        r, c = rc
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(rc)
        v = Fraction(v)
        if v:
            self.entries[rc] = v
        else:
            self.entries.pop(rc, None)

    def add_to(self, r, c, v):
        self[r, c] = self[r, c] + v

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = SparseMatrix(self.rows, other.cols)
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        for (r, c), v in self.entries.items():
            for cc, vv in by_row.get(c, ()):
                out.add_to(r, cc, v * vv)
        return out

    def transpose(self):
        out = SparseMatrix(self.cols, self.rows)
        for (r, c), v in self.entries.items():
            out[c, r] = v
        return out

    def is_zero(self):
        return not self.entries

    @classmethod
    def identity(cls, n):
        m = cls(n, n)
        for i in range(n):
            m[i, i] = ONE
        return m

    def column(self, c):
        return {r: v for (r, cc), v in self.entries.items() if cc == c}

    def apply(self, vec):
        """Matrix times a dense list vector."""
        out = [ZERO] * self.rows
        for (r, c), v in self.entries.items():
            if vec[c]:
                out[r] += v * vec[c]
        return out

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


class Reduction:
    """Result of Gaussian elimination: rank, kernel and image bases.

    Bases are lists of dense Fraction vectors.  The computation is
    deterministic: pivots are chosen by first column, then first row.
    """

    __slots__ = ("rank", "kernel_basis", "image_basis", "pivot_cols",
                 "_echelon", "_shape")

    def __init__(self, rank, kernel_basis, image_basis, pivot_cols,
                 echelon, shape):
        self.rank = rank
        self.kernel_basis = kernel_basis
        self.image_basis = image_basis
        self.pivot_cols = pivot_cols
        self._echelon = echelon
        self._shape = shape


def reduce(m):
    """Row-reduce a SparseMatrix; returns a Reduction.

    rank + len(kernel_basis) == cols always holds; image_basis consists of
    the original pivot columns.
    """
    rows, cols = m.rows, m.cols
    # dense-ish row dicts, processed in order
    work = {}
    for (r, c), v in m.entries.items():
        work.setdefault(r, {})[c] = v
    row_order = sorted(work)
    echelon = []  # list of (pivot_col, row dict normalized)
    for r in row_order:
        cur = dict(work[r])
        for pc, prow in echelon:
            if pc in cur:
                f = cur[pc]
                for c, v in prow.items():
                    nv = cur.get(c, ZERO) - f * v
                    if nv:
                        cur[c] = nv
                    else:
                        cur.pop(c, None)
        if cur:
            pc = min(cur)
            piv = cur[pc]
            cur = {c: v / piv for c, v in cur.items()}
            echelon.append((pc, cur))
    echelon.sort(key=lambda t: t[0])
    # back-substitute to reduced echelon form
    for i in range(len(echelon) - 1, -1, -1):
        pc, row = echelon[i]
        for j in range(i):
            qc, qrow = echelon[j]
            if pc in qrow:
                f = qrow[pc]
                for c, v in row.items():
                    nv = qrow.get(c, ZERO) - f * v
                    if nv:
                        qrow[c] = nv
                    else:
                        qrow.pop(c, None)
    pivot_cols = [pc for pc, _ in echelon]
    pivset = set(pivot_cols)
    rank = len(pivot_cols)
    kernel = []
    for c in range(cols):
        if c in pivset:
            continue
        vec = [ZERO] * cols
        vec[c] = ONE
        for pc, row in echelon:
            if c in row:
                vec[pc] = -row[c]
        kernel.append(vec)
    image = []
    for c in pivot_cols:
        col = m.column(c)
        vec = [ZERO] * rows
        for r, v in col.items():
            vec[r] = v
        image.append(vec)
    return Reduction(rank, kernel, image, pivot_cols, echelon, (rows, cols))


def rank(m):
    return reduce(m).rank


def solve(m, b):
    """One solution x of m x = b (dense list b), or None."""
    aug = SparseMatrix(m.rows, m.cols + 1, dict(m.entries))
    for r, v in enumerate(b):
        if v:
            aug[r, m.cols] = v
    red = reduce(aug)
    if m.cols in red.pivot_cols:
        return None
    # reduced row reads x_pc + sum over free c of row[c] x_c = row[aug];
    # with free variables set to 0, x_pc is the augmented entry
    x = [ZERO] * m.cols
    for pc, row in red._echelon:
        x[pc] = row.get(m.cols, ZERO)
    return x


def in_span(vectors, target):
    """Is target in the span of the given dense vectors?"""
    if not vectors:
        return all(v == 0 for v in target)
    n = len(target)
    m = SparseMatrix(n, len(vectors))
    for j, vec in enumerate(vectors):
        for i, v in enumerate(vec):
            if v:
                m[i, j] = v
    return solve(m, target) is not None


class CochainComplex:
    """Finite complex of Q-vector spaces with differentials of degree +1.

    dims: {degree: dimension}; diff: {degree k: SparseMatrix dims[k] ->
    dims[k+1]}.  d_{k+1} d_k = 0 is checked at construction.
    """

    def __init__(self, dims, diff, check=True):
        self.dims = {k: d for k, d in dims.items() if d}
        self.diff = {}
        for k, m in diff.items():
            if m.rows != self.dims.get(k + 1, 0) or m.cols != self.dims.get(k, 0):
                raise ValueError(f"differential at degree {k} has wrong shape")
            if m.entries:
                self.diff[k] = m
        if check:
            for k, m in self.diff.items():
                nxt = self.diff.get(k + 1)
                if nxt is not None and not (nxt @ m).is_zero():
                    raise ValueError(f"d^2 != 0 at degree {k}")

    def homology(self):
        """Degreewise cohomology dimensions, zero degrees omitted."""
        ranks = {k: reduce(m).rank for k, m in self.diff.items()}
        h = {}
        for k, d in self.dims.items():
            hk = d - ranks.get(k, 0) - ranks.get(k - 1, 0)
            if hk:
                h[k] = hk
        return h

    def total_dim(self):
        return sum(self.dims.values())


def homology(c):
    return c.homology()
