"""Exact dense linear algebra over Z and Q, plus chain complexes built on it.

Everything downstream (cubical complexes, twisted complexes, sheaf towers)
reduces to the primitives in this module: integer Smith normal form with a
pinned pivot rule, saturated kernels, exact solving, homology with torsion,
Hom-complexes and mapping cones.  No floats anywhere; matrices are dense
tuples of tuples (soft practical limit around 512x512 -- callers needing
bigger systems use the sparse rational routines at the bottom).
"""

from dataclasses import dataclass
from fractions import Fraction


RING_Z = "Z"
RING_Q = "Q"


def xgcd(a, b):
    """Extended gcd: returns (g, x, y) with g = a*x + b*y and g >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _coerce(ring, value):
    if ring == RING_Z:
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise ValueError("non-integral entry in Z matrix: %r" % (value,))
            return int(value)
        return int(value)
    return Fraction(value)


class Matrix:
    """Immutable dense matrix over Z (python ints) or Q (Fractions)."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, rows, nrows=None, ncols=None):
        if ring not in (RING_Z, RING_Q):
            raise ValueError("unknown ring %r" % (ring,))
        rows = tuple(tuple(_coerce(ring, v) for v in row) for row in rows)
        if rows:
            width = len(rows[0])
            for row in rows:
                if len(row) != width:
                    raise ValueError("ragged rows")
        else:
            width = 0 if ncols is None else ncols
            if nrows and width:
                raise ValueError("nrows mismatch")
            if nrows:
                rows = tuple(() for _ in range(nrows))
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "nrows", len(rows) if nrows is None else nrows)
        object.__setattr__(self, "ncols", width)
        if nrows is not None and nrows != len(rows) and rows:
            raise ValueError("nrows mismatch")

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @staticmethod
    def zero(ring, nrows, ncols):
        return Matrix(ring, [[0] * ncols for _ in range(nrows)], nrows=nrows, ncols=ncols)

    @staticmethod
    def identity(ring, n):
        return Matrix(ring, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def from_rows(ring, rows):
        return Matrix(ring, rows)

    @staticmethod
    def column(ring, entries):
        return Matrix(ring, [[v] for v in entries], ncols=1)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.ring == other.ring
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.ring, self.nrows, self.ncols, self.rows))

    def __repr__(self):
        return "Matrix(%s, %d x %d)" % (self.ring, self.nrows, self.ncols)

    def is_zero(self):
        return all(v == 0 for row in self.rows for v in row)

    def __add__(self, other):
        self._check_same_shape(other)
        return Matrix(
            self.ring,
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.rows, other.rows)
            ],
            nrows=self.nrows,
            ncols=self.ncols,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Matrix(
            self.ring,
            [[-v for v in row] for row in self.rows],
            nrows=self.nrows,
            ncols=self.ncols,
        )

    def scale(self, c):
        c = _coerce(self.ring, c)
        return Matrix(
            self.ring,
            [[c * v for v in row] for row in self.rows],
            nrows=self.nrows,
            ncols=self.ncols,
        )

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.ring != other.ring:
            raise ValueError("ring mismatch in product")
        if self.ncols != other.nrows:
            raise ValueError(
                "shape mismatch: %dx%d times %dx%d"
                % (self.nrows, self.ncols, other.nrows, other.ncols)
            )
        if self.ncols == 0 or other.ncols == 0:
            return Matrix.zero(self.ring, self.nrows, other.ncols)
        zero = _coerce(self.ring, 0)
        out = []
        for row in self.rows:
            acc = [zero] * other.ncols
            for k, a in enumerate(row):
                if a:
                    orow = other.rows[k]
                    for j, b in enumerate(orow):
                        if b:
                            acc[j] += a * b
            out.append(acc)
        return Matrix(self.ring, out, nrows=self.nrows, ncols=other.ncols)

    def transpose(self):
        return Matrix(
            self.ring,
            list(zip(*self.rows)) if self.rows else [],
            nrows=self.ncols,
            ncols=self.nrows,
        )

    def kron(self, other):
        """Kronecker product; row/column index order is (i_self, i_other) row-major."""
        if self.ring != other.ring:
            raise ValueError("ring mismatch in kron")
        out = []
        for r1 in self.rows:
            for r2 in other.rows:
                out.append([a * b for a in r1 for b in r2])
        return Matrix(
            self.ring,
            out,
            nrows=self.nrows * other.nrows,
            ncols=self.ncols * other.ncols,
        )

    def hstack(self, other):
        if self.nrows != other.nrows or self.ring != other.ring:
            raise ValueError("hstack mismatch")
        rows = [r1 + r2 for r1, r2 in zip(self.rows, other.rows)]
        if self.nrows == 0:
            return Matrix(self.ring, [], nrows=0, ncols=self.ncols + other.ncols)
        return Matrix(self.ring, rows, nrows=self.nrows, ncols=self.ncols + other.ncols)

    def vstack(self, other):
        if self.ncols != other.ncols or self.ring != other.ring:
            raise ValueError("vstack mismatch")
        return Matrix(
            self.ring,
            list(self.rows) + list(other.rows),
            nrows=self.nrows + other.nrows,
            ncols=self.ncols,
        )

    def submatrix(self, row_idx, col_idx):
        return Matrix(
            self.ring,
            [[self.rows[i][j] for j in col_idx] for i in row_idx],
            nrows=len(row_idx),
            ncols=len(col_idx),
        )

    def col(self, j):
        return [row[j] for row in self.rows]

    def to_q(self):
        if self.ring == RING_Q:
            return self
        return Matrix(RING_Q, self.rows, nrows=self.nrows, ncols=self.ncols)

    def to_z(self):
        if self.ring == RING_Z:
            return self
        return Matrix(RING_Z, self.rows, nrows=self.nrows, ncols=self.ncols)

    def _check_same_shape(self, other):
        if (
            self.ring != other.ring
            or self.nrows != other.nrows
            or self.ncols != other.ncols
        ):
            raise ValueError("shape/ring mismatch")


def block_matrix(ring, blocks):
    """Assemble from a 2d list of Matrix/None; None blocks need inferable shapes.

    `blocks[i][j]` sits at block-row i, block-column j.  Every block row must
    contain at least one real matrix fixing the row count, ditto columns.
    """
    nbr = len(blocks)
    nbc = len(blocks[0]) if nbr else 0
    row_h = [None] * nbr
    col_w = [None] * nbc
    for i in range(nbr):
        for j in range(nbc):
            b = blocks[i][j]
            if b is not None:
                if row_h[i] is None:
                    row_h[i] = b.nrows
                elif row_h[i] != b.nrows:
                    raise ValueError("inconsistent block heights")
                if col_w[j] is None:
                    col_w[j] = b.ncols
                elif col_w[j] != b.ncols:
                    raise ValueError("inconsistent block widths")
    if any(h is None for h in row_h) or any(w is None for w in col_w):
        raise ValueError("cannot infer shapes of empty block rows/columns")
    rows = []
    for i in range(nbr):
        for r in range(row_h[i]):
            row = []
            for j in range(nbc):
                b = blocks[i][j]
                if b is None:
                    row.extend([0] * col_w[j])
                else:
                    row.extend(b.rows[r])
            rows.append(row)
    return Matrix(ring, rows, nrows=sum(row_h), ncols=sum(col_w))


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithDecomposition:
    """U * A * V = D with U, V unimodular and D diagonal, d1 | d2 | ... , di >= 0."""

    U: Matrix
    D: Matrix
    V: Matrix

    def diagonal(self):
        return [
            self.D.rows[i][i]
            for i in range(min(self.D.nrows, self.D.ncols))
            if self.D.rows[i][i] != 0
        ]

    @property
    def rank(self):
        return len(self.diagonal())


def _find_pivot(a, t, m, n):
    """Smallest nonzero |entry| in the trailing submatrix, ties row-major."""
    best = None
    for i in range(t, m):
        row = a[i]
        for j in range(t, n):
            v = row[j]
            if v:
                av = -v if v < 0 else v
                if best is None or av < best[0]:
                    best = (av, i, j)
                    if av == 1:
                        return best
    return best


def smith_normal_form(A):
    """Deterministic SNF over Z.

    Pivot rule: at each stage pick the nonzero entry of smallest absolute
    value in the remaining submatrix, ties broken row-major.  Row operations
    are mirrored into U, column operations into V, so U A V = D exactly.
    """
    if A.ring != RING_Z:
        raise ValueError("smith_normal_form needs a Z matrix")
    m, n = A.nrows, A.ncols
    a = [list(row) for row in A.rows]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def addmul_row(dst, src, c):
        arow, srow = a[dst], a[src]
        for j in range(n):
            arow[j] += c * srow[j]
        urow, usrc = u[dst], u[src]
        for j in range(m):
            urow[j] += c * usrc[j]

    def addmul_col(dst, src, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    bound = min(m, n)
    while t < bound:
        piv = _find_pivot(a, t, m, n)
        if piv is None:
            break
        _, pi, pj = piv
        if pi != t:
            swap_rows(pi, t)
        if pj != t:
            swap_cols(pj, t)
        if a[t][t] < 0:
            negate_row(t)
        while True:
            # clear column t below/above the pivot, re-pivoting on remainders
            dirty = False
            for i in range(m):
                if i != t and a[i][t]:
                    q = a[i][t] // a[t][t]
                    addmul_row(i, t, -q)
                    if a[i][t]:
                        swap_rows(i, t)
                        if a[t][t] < 0:
                            negate_row(t)
                        dirty = True
            for j in range(n):
                if j != t and a[t][j]:
                    q = a[t][j] // a[t][t]
                    addmul_col(j, t, -q)
                    if a[t][j]:
                        swap_cols(j, t)
                        dirty = True
            if dirty:
                continue
            # enforce divisibility of everything left by the pivot
            offender = None
            d = a[t][t]
            for i in range(t + 1, m):
                row = a[i]
                for j in range(t + 1, n):
                    if row[j] % d:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            addmul_row(t, offender, 1)
        t += 1

    return SmithDecomposition(
        U=Matrix(RING_Z, u, nrows=m, ncols=m),
        D=Matrix(RING_Z, a, nrows=m, ncols=n),
        V=Matrix(RING_Z, v, nrows=n, ncols=n),
    )


def det_z(A):
    """Integer determinant by Bareiss fraction-free elimination."""
    if A.nrows != A.ncols:
        raise ValueError("det of non-square matrix")
    n = A.nrows
    if n == 0:
        return 1
    a = [list(row) for row in A.rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def z_kernel(A):
    """Columns form a saturated basis of ker(A) over Z (a direct summand)."""
    snf = smith_normal_form(A)
    r = snf.rank
    cols = list(range(r, A.ncols))
    return snf.V.submatrix(range(A.ncols), cols)


def z_image_invariants(A):
    """Invariant factors (>1 entries keep torsion info) of the image lattice."""
    return smith_normal_form(A).diagonal()


def z_solve(A, B):
    """Solve A X = B over Z exactly; returns X or None when unsolvable."""
    snf = smith_normal_form(A)
    ub = snf.U * B
    m, n = A.nrows, A.ncols
    diag = [snf.D.rows[i][i] for i in range(min(m, n))]
    r = sum(1 for d in diag if d)
    y_rows = []
    for i in range(n):
        row = []
        for j in range(B.ncols):
            if i < r:
                num = ub.rows[i][j]
                if num % diag[i]:
                    return None
                row.append(num // diag[i])
            else:
                row.append(0)
        y_rows.append(row)
    for i in range(r, m):
        if any(ub.rows[i][j] != 0 for j in range(B.ncols)):
            return None
    Y = Matrix(RING_Z, y_rows, nrows=n, ncols=B.ncols)
    return snf.V * Y


# ---------------------------------------------------------------------------
# Rational elimination (the independent route for ranks/kernels)
# ---------------------------------------------------------------------------


def q_rref(A):
    """Reduced row echelon form over Q; returns (R, pivot_columns)."""
    a = [[Fraction(v) for v in row] for row in A.rows]
    m, n = A.nrows, A.ncols
    pivots = []
    r = 0
    for j in range(n):
        sel = next((i for i in range(r, m) if a[i][j] != 0), None)
        if sel is None:
            continue
        a[r], a[sel] = a[sel], a[r]
        inv = 1 / a[r][j]
        a[r] = [v * inv for v in a[r]]
        for i in range(m):
            if i != r and a[i][j] != 0:
                c = a[i][j]
                a[i] = [x - c * y for x, y in zip(a[i], a[r])]
        pivots.append(j)
        r += 1
        if r == m:
            break
    return Matrix(RING_Q, a, nrows=m, ncols=n), pivots


def q_rank(A):
    return len(q_rref(A.to_q())[1])


def q_kernel(A):
    """Columns form a basis of ker(A) over Q."""
    A = A.to_q()
    R, pivots = q_rref(A)
    n = A.ncols
    free = [j for j in range(n) if j not in pivots]
    cols = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -R.rows[r][f]
        cols.append(vec)
    return Matrix(RING_Q, list(zip(*cols)) if cols else [], nrows=n, ncols=len(cols))


def q_solve(A, B):
    """Solve A X = B over Q; returns one solution or None."""
    A = A.to_q()
    B = B.to_q()
    aug = A.hstack(B)
    R, pivots = q_rref(aug)
    n = A.ncols
    if any(p >= n for p in pivots):
        return None
    x_rows = [[Fraction(0)] * B.ncols for _ in range(n)]
    for r, p in enumerate(pivots):
        for j in range(B.ncols):
            x_rows[p][j] = R.rows[r][n + j]
    return Matrix(RING_Q, x_rows, nrows=n, ncols=B.ncols)


def kernel(A):
    return z_kernel(A) if A.ring == RING_Z else q_kernel(A)


def solve(A, B):
    return z_solve(A, B) if A.ring == RING_Z else q_solve(A, B)


def rank(A):
    """Rank via SNF for Z, elimination for Q (two genuinely distinct routes)."""
    if A.ring == RING_Z:
        return smith_normal_form(A).rank
    return q_rank(A)


# ---------------------------------------------------------------------------
# Chain complexes (cohomological grading: d raises degree by 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomologyGroup:
    """Finitely generated abelian group: Z^free_rank + sum Z/t, t in torsion."""

    free_rank: int
    torsion: tuple

    def __post_init__(self):
        for i in range(len(self.torsion) - 1):
            if self.torsion[i + 1] % self.torsion[i]:
                raise ValueError("torsion coefficients must form a divisibility chain")
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion coefficients must be >= 2")

    def is_zero(self):
        return self.free_rank == 0 and not self.torsion

    def describe(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank:
            parts.append("Z^%d" % self.free_rank)
        parts.extend("Z/%d" % t for t in self.torsion)
        return " + ".join(parts) if parts else "0"


class ChainComplex:
    """Bounded complex of free modules in a degree window [lo, hi].

    `d(n)` maps degree n to degree n+1; differentials whose source or target
    falls outside the window are zero by convention, so homology at the window
    boundary silently assumes the complex continues by zero.
    """

    __slots__ = ("ring", "lo", "hi", "ranks", "diffs")

    def __init__(self, ring, lo, ranks, diffs):
        # ranks: tuple indexed by deg-lo; diffs: tuple of len(ranks)-1 matrices
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "ranks", tuple(ranks))
        object.__setattr__(self, "hi", lo + len(self.ranks) - 1)
        object.__setattr__(self, "diffs", tuple(diffs))

    def __setattr__(self, name, value):
        raise AttributeError("ChainComplex is immutable")

    def rank(self, n):
        if self.lo <= n <= self.hi:
            return self.ranks[n - self.lo]
        return 0

    def d(self, n):
        if self.lo <= n < self.hi:
            return self.diffs[n - self.lo]
        return Matrix.zero(self.ring, self.rank(n + 1), self.rank(n))

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def total_rank(self):
        return sum(self.ranks)

    def __eq__(self, other):
        return (
            isinstance(other, ChainComplex)
            and self.ring == other.ring
            and self.lo == other.lo
            and self.ranks == other.ranks
            and self.diffs == other.diffs
        )

    def __hash__(self):
        return hash((self.ring, self.lo, self.ranks, self.diffs))

    def __repr__(self):
        return "ChainComplex(%s, [%d..%d], ranks=%s)" % (
            self.ring,
            self.lo,
            self.hi,
            list(self.ranks),
        )


def make_complex(ring, lo, ranks, diffs=None, check=True):
    """Build a ChainComplex from ranks (list from degree lo up) and diffs.

    diffs may be a dict {deg: Matrix} or a list aligned with ranks[:-1].
    """
    ranks = list(ranks)
    if not ranks:
        ranks = [0]
    n = len(ranks)
    if isinstance(diffs, dict):
        dl = []
        for k in range(n - 1):
            deg = lo + k
            dl.append(diffs.get(deg, Matrix.zero(ring, ranks[k + 1], ranks[k])))
    elif diffs is None:
        dl = [Matrix.zero(ring, ranks[k + 1], ranks[k]) for k in range(n - 1)]
    else:
        dl = list(diffs)
    if check:
        if len(dl) != n - 1:
            raise ValueError("differential count mismatch")
        for k, mat in enumerate(dl):
            if mat.ring != ring:
                raise ValueError("differential ring mismatch at degree %d" % (lo + k))
            if mat.nrows != ranks[k + 1] or mat.ncols != ranks[k]:
                raise ValueError(
                    "differential shape mismatch at degree %d: %dx%d vs %dx%d"
                    % (lo + k, mat.nrows, mat.ncols, ranks[k + 1], ranks[k])
                )
        for k in range(n - 2):
            if not (dl[k + 1] * dl[k]).is_zero():
                raise ValueError("d^2 != 0 between degrees %d and %d" % (lo + k, lo + k + 2))
    return ChainComplex(ring, lo, ranks, dl)


def zero_complex(ring, lo=0, hi=0):
    return make_complex(ring, lo, [0] * (hi - lo + 1))


def single_complex(ring, deg, rank_):
    return make_complex(ring, deg, [rank_])


def two_term_complex(ring, lo_deg, matrix):
    """The complex (matrix: C^lo -> C^(lo+1)) concentrated in two degrees."""
    return make_complex(ring, lo_deg, [matrix.ncols, matrix.nrows], [matrix])


def shift_complex(C, k):
    """C[k]^n = C^(n+k) with differential scaled by (-1)^k."""
    sgn = -1 if k % 2 else 1
    return ChainComplex(
        C.ring,
        C.lo - k,
        C.ranks,
        tuple(m.scale(sgn) for m in C.diffs),
    )


def dsum_complex(C, D):
    if C.ring != D.ring:
        raise ValueError("ring mismatch")
    lo = min(C.lo, D.lo)
    hi = max(C.hi, D.hi)
    ranks = [C.rank(n) + D.rank(n) for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi):
        diffs.append(
            block_matrix(
                C.ring,
                [
                    [C.d(n), Matrix.zero(C.ring, C.rank(n + 1), D.rank(n))],
                    [Matrix.zero(C.ring, D.rank(n + 1), C.rank(n)), D.d(n)],
                ],
            )
        )
    return make_complex(C.ring, lo, ranks, diffs, check=False)


def tensor_basis(C, D, n):
    """Ordered basis of (C (x) D)^n: triples (p, i, j) for C^p_i (x) D^(n-p)_j."""
    out = []
    for p in range(C.lo, C.hi + 1):
        q = n - p
        if C.rank(p) and D.rank(q):
            for i in range(C.rank(p)):
                for j in range(D.rank(q)):
                    out.append((p, i, j))
    return out


def tensor_complex(C, D):
    """(C (x) D)^n = sum_p C^p (x) D^(n-p); d(x(x)y) = dx(x)y + (-1)^p x(x)dy."""
    if C.ring != D.ring:
        raise ValueError("ring mismatch")
    lo = C.lo + D.lo
    hi = C.hi + D.hi
    bases = {n: tensor_basis(C, D, n) for n in range(lo, hi + 2)}
    ranks = [len(bases[n]) for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi):
        src = bases[n]
        dst = bases[n + 1]
        pos = {key: idx for idx, key in enumerate(dst)}
        rows = [[0] * len(src) for _ in dst]
        for cidx, (p, i, j) in enumerate(src):
            q = n - p
            dc = C.d(p)
            for i2 in range(C.rank(p + 1)):
                v = dc.rows[i2][i]
                if v:
                    rows[pos[(p + 1, i2, j)]][cidx] += v
            sgn = -1 if p % 2 else 1
            dd = D.d(q)
            for j2 in range(D.rank(q + 1)):
                v = dd.rows[j2][j]
                if v:
                    rows[pos[(p, i, j2)]][cidx] += sgn * v
        diffs.append(Matrix(C.ring, rows, nrows=len(dst), ncols=len(src)))
    return make_complex(C.ring, lo, ranks, diffs, check=False)


def hom_basis(C, D, n):
    """Ordered basis of Hom(C, D)^n: triples (p, i, j) = matrix unit E_ij in
    Hom(C^p, D^(p+n)), blocks by ascending p, entries row-major."""
    out = []
    for p in range(C.lo, C.hi + 1):
        if C.rank(p) and D.rank(p + n):
            for i in range(D.rank(p + n)):
                for j in range(C.rank(p)):
                    out.append((p, i, j))
    return out


def hom_element_matrices(C, D, n, vec):
    """Unflatten a Hom(C,D)^n coordinate vector into per-degree matrices."""
    mats = {}
    idx = 0
    for p in range(C.lo, C.hi + 1):
        rc, rd = C.rank(p), D.rank(p + n)
        if rc and rd:
            rows = []
            for i in range(rd):
                rows.append(list(vec[idx + i * rc : idx + (i + 1) * rc]))
            idx += rd * rc
            mats[p] = Matrix(C.ring, rows, nrows=rd, ncols=rc)
    return mats


def hom_element_vector(C, D, n, mats):
    """Flatten per-degree matrices back to Hom(C,D)^n coordinates."""
    vec = []
    for p in range(C.lo, C.hi + 1):
        rc, rd = C.rank(p), D.rank(p + n)
        if rc and rd:
            m = mats.get(p)
            if m is None:
                vec.extend([0] * (rc * rd))
            else:
                if m.nrows != rd or m.ncols != rc:
                    raise ValueError("component shape mismatch at degree %d" % p)
                for row in m.rows:
                    vec.extend(row)
    return tuple(vec)


def hom_complex(C, D):
    """Hom(C, D)^n = prod_p Hom(C^p, D^(p+n)), d f = d_D f - (-1)^n f d_C."""
    if C.ring != D.ring:
        raise ValueError("ring mismatch")
    lo = D.lo - C.hi
    hi = D.hi - C.lo
    ranks = []
    diffs = []
    for n in range(lo, hi + 1):
        ranks.append(len(hom_basis(C, D, n)))
    for n in range(lo, hi):
        src = hom_basis(C, D, n)
        cols = []
        sgn = -1 if n % 2 else 1
        for p, i, j in src:
            unit = {p: _matrix_unit(C.ring, D.rank(p + n), C.rank(p), i, j)}
            mats = hom_differential_matrices(C, D, n, unit, sgn)
            cols.append(hom_element_vector(C, D, n + 1, mats))
        nrows = ranks[n + 1 - lo]
        rows = [[col[r] for col in cols] for r in range(nrows)]
        diffs.append(Matrix(C.ring, rows, nrows=nrows, ncols=len(src)))
    return make_complex(C.ring, lo, ranks, diffs, check=False)


def _matrix_unit(ring, nrows, ncols, i, j):
    rows = [[0] * ncols for _ in range(nrows)]
    rows[i][j] = 1
    return Matrix(ring, rows, nrows=nrows, ncols=ncols)


def hom_differential_matrices(C, D, n, mats, sgn):
    """(df)_p = d_D . f_p - (-1)^n f_(p+1) . d_C as per-degree matrices."""
    out = {}
    for p in range(C.lo, C.hi + 1):
        rc, rd = C.rank(p), D.rank(p + n + 1)
        if not (rc and rd):
            continue
        acc = Matrix.zero(C.ring, rd, rc)
        fp = mats.get(p)
        if fp is not None and D.rank(p + n):
            acc = acc + D.d(p + n) * fp
        fq = mats.get(p + 1)
        if fq is not None and C.rank(p + 1):
            acc = acc - (fq * C.d(p)).scale(sgn)
        if not acc.is_zero():
            out[p] = acc
    return out


def hom_compose_vec(C, D, E, n_g, vec_g, n_f, vec_f):
    """Compose Hom(D,E)^n_g with Hom(C,D)^n_f into Hom(C,E)^(n_g+n_f).

    Plain componentwise composition (g . f)_p = g_(p+n_f) . f_p, no signs:
    the Koszul signs of the graded Hom live in the differential, not here.
    """
    g = hom_element_matrices(D, E, n_g, vec_g)
    f = hom_element_matrices(C, D, n_f, vec_f)
    out = {}
    for p, fp in f.items():
        gp = g.get(p + n_f)
        if gp is not None:
            out[p] = gp * fp
    return hom_element_vector(C, E, n_g + n_f, out)


def identity_hom_vector(C):
    mats = {p: Matrix.identity(C.ring, C.rank(p)) for p in C.degrees() if C.rank(p)}
    return hom_element_vector(C, C, 0, mats)


class ChainMap:
    """Degree-0 chain map; components indexed by source degree."""

    __slots__ = ("source", "target", "comps")

    def __init__(self, source, target, comps):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "comps", dict(comps))

    def __setattr__(self, name, value):
        raise AttributeError("ChainMap is immutable")

    def comp(self, n):
        m = self.comps.get(n)
        if m is None:
            return Matrix.zero(self.source.ring, self.target.rank(n), self.source.rank(n))
        return m

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return False
        if self.source != other.source or self.target != other.target:
            return False
        degs = set(self.comps) | set(other.comps)
        return all(self.comp(n) == other.comp(n) for n in degs)

    def __hash__(self):
        return hash((self.source, self.target))


def make_chain_map(source, target, comps, check=True):
    f = ChainMap(source, target, comps)
    if check:
        for n, m in f.comps.items():
            if m.nrows != target.rank(n) or m.ncols != source.rank(n):
                raise ValueError("chain map component shape mismatch at degree %d" % n)
        lo = min(source.lo, target.lo)
        hi = max(source.hi, target.hi)
        for n in range(lo, hi):
            if target.d(n) * f.comp(n) != f.comp(n + 1) * source.d(n):
                raise ValueError("chain map fails to commute with d at degree %d" % n)
    return f


def identity_chain_map(C):
    return ChainMap(C, C, {n: Matrix.identity(C.ring, C.rank(n)) for n in C.degrees()})


def compose_chain_maps(g, f):
    if f.target != g.source:
        raise ValueError("chain maps not composable")
    degs = set(f.comps) | set(g.comps)
    return ChainMap(f.source, g.target, {n: g.comp(n) * f.comp(n) for n in degs})


def tensor_chain_map(f, g, source=None, target=None):
    """f (x) g on tensor complexes of degree-0 chain maps (no Koszul signs)."""
    if source is None:
        source = tensor_complex(f.source, g.source)
    if target is None:
        target = tensor_complex(f.target, g.target)
    comps = {}
    for n in source.degrees():
        src = tensor_basis(f.source, g.source, n)
        dst = tensor_basis(f.target, g.target, n)
        if not src or not dst:
            continue
        pos = {key: idx for idx, key in enumerate(dst)}
        rows = [[0] * len(src) for _ in dst]
        for cidx, (p, i, j) in enumerate(src):
            fp = f.comp(p)
            gq = g.comp(n - p)
            for i2 in range(fp.nrows):
                a = fp.rows[i2][i]
                if not a:
                    continue
                for j2 in range(gq.nrows):
                    b = gq.rows[j2][j]
                    if b:
                        rows[pos[(p, i2, j2)]][cidx] += a * b
        comps[n] = Matrix(source.ring, rows, nrows=len(dst), ncols=len(src))
    return ChainMap(source, target, comps)


def cone_of_map(f):
    """Cone(f)^n = D^n + C^(n+1), d = [[d_D, f],[0, -d_C]]; returns
    (cone, inclusion D -> cone, projection cone -> C[1])."""
    C, D = f.source, f.target
    ring = C.ring
    lo = min(D.lo, C.lo - 1)
    hi = max(D.hi, C.hi - 1)
    ranks = [D.rank(n) + C.rank(n + 1) for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi):
        diffs.append(
            block_matrix(
                ring,
                [
                    [D.d(n), f.comp(n + 1)],
                    [Matrix.zero(ring, C.rank(n + 2), D.rank(n)), -C.d(n + 1)],
                ],
            )
        )
    cone = make_complex(ring, lo, ranks, diffs, check=False)
    incl = ChainMap(
        D,
        cone,
        {
            n: Matrix.identity(ring, D.rank(n)).vstack(
                Matrix.zero(ring, C.rank(n + 1), D.rank(n))
            )
            for n in range(lo, hi + 1)
        },
    )
    shifted = shift_complex(C, 1)
    proj = ChainMap(
        cone,
        shifted,
        {
            n: Matrix.zero(ring, C.rank(n + 1), D.rank(n)).hstack(
                Matrix.identity(ring, C.rank(n + 1))
            )
            for n in range(lo, hi + 1)
        },
    )
    return cone, incl, proj


def complex_homology(C, n):
    """H^n = ker d^n / im d^(n-1) as a HomologyGroup (exact, with torsion).

    Degrees at the window boundary see zero differentials beyond the window.
    """
    dn = C.d(n)
    dprev = C.d(n - 1)
    if C.ring == RING_Q:
        free = (C.rank(n) - q_rank(dn)) - q_rank(dprev)
        return HomologyGroup(free, ())
    K = z_kernel(dn)
    s = K.ncols
    if s == 0:
        return HomologyGroup(0, ())
    if dprev.is_zero():
        return HomologyGroup(s, ())
    X = z_solve(K, dprev)
    if X is None:
        raise AssertionError("image not contained in kernel: complex is broken")
    inv = [d for d in smith_normal_form(X).diagonal()]
    torsion = tuple(d for d in inv if d > 1)
    return HomologyGroup(s - len(inv), torsion)


@dataclass(frozen=True)
class QuasiIsoReport:
    ok: bool
    window: tuple
    failing: tuple  # (degree, description) pairs

    def __bool__(self):
        return self.ok


def is_quasi_iso(f, window=None):
    """True when the mapping cone of f is acyclic on the (interior of the) window.

    The cone's homology at its own boundary degrees is an artifact of
    truncation, so those degrees are never consulted unless the caller's
    window forces them.
    """
    cone, _, _ = cone_of_map(f)
    if window is None:
        lo, hi = cone.lo + 1, cone.hi - 1
    else:
        lo, hi = window
    failing = []
    for n in range(lo, hi + 1):
        h = complex_homology(cone, n)
        if not h.is_zero():
            failing.append((n, h.describe()))
    return QuasiIsoReport(not failing, (lo, hi), tuple(failing))


# ---------------------------------------------------------------------------
# Sparse rational elimination, for the simplicial-compatibility systems whose
# dense form would not fit the soft size limit.
# ---------------------------------------------------------------------------


def sparse_rref(rows, ncols):
    """Row-reduce a list of {col: Fraction} rows; returns (rows', pivots)
    where pivots maps pivot column -> index into rows'."""
    work = [dict(r) for r in rows if r]
    pivots = {}
    reduced = []
    for r in work:
        while r:
            j = min(r)
            if j in pivots:
                coeff = r[j]
                prow = reduced[pivots[j]]
                for k, v in prow.items():
                    nv = r.get(k, Fraction(0)) - coeff * v
                    if nv:
                        r[k] = nv
                    elif k in r:
                        del r[k]
            else:
                inv = 1 / r[j]
                r = {k: v * inv for k, v in r.items()}
                pivots[j] = len(reduced)
                reduced.append(r)
                break
        # fully cancelled rows vanish
    # full reduction: eliminate pivot columns from the other rows
    for j in sorted(pivots):
        pi = pivots[j]
        prow = reduced[pi]
        for idx, row in enumerate(reduced):
            if idx != pi and j in row:
                c = row[j]
                for k, v in prow.items():
                    nv = row.get(k, Fraction(0)) - c * v
                    if nv:
                        row[k] = nv
                    elif k in row:
                        del row[k]
    return reduced, pivots


def sparse_kernel_basis(rows, ncols):
    """Basis of the kernel of the sparse row system, as {col: Fraction} vectors."""
    reduced, pivots = sparse_rref(rows, ncols)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        vec = {f: Fraction(1)}
        for j, ridx in pivots.items():
            v = reduced[ridx].get(f)
            if v:
                vec[j] = -v
        basis.append(vec)
    return basis


def sparse_rank(rows, ncols):
    return len(sparse_rref(rows, ncols)[1])
