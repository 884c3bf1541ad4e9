"""Finite DG categories with exact structure-constant composition.

A category here is a finite object list, a Hom chain complex per ordered
pair, and one composition matrix per degree pair acting on Kronecker
coordinate vectors.  Everything is checked as an exact matrix identity:
the Leibniz rule, associativity, the unit laws, and later the enrichment
laws are all statements of the form "these two integer (or rational)
matrices are equal", so a law either holds on the nose or fails with a
coordinate witness.

The second half of the module builds DG categories out of ordinary
additive tensor data: a co-cubical object with a comultiplication turns
degree-0 Hom modules into Hom complexes whose level n part is
Hom(X (x) cube^n, Y), with composition "duplicate the cube, then cup".
Two hosts are provided, a finite-correspondence toy whose cubes are all
the unit object, and a free-module host whose cubes are spanned by the
cube vertices with the diagonal comultiplication.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .cube import (
    compose as compose_cube,
    identity_map,
    front_projection,
    back_projection,
    sign_character,
    signed_as_cube_map,
    signed_symmetry_group,
    vertex_index,
)
from .cubical import (
    CubicalAbelianGroup,
    alternating_complex,
    alternating_projector,
    associated_complex,
    degenerate_splitting,
    generator_maps,
)
from .linalg import (
    Matrix,
    complex_homology,
    is_quasi_iso,
    hom_complex,
    hom_compose_vec,
    identity_hom_vector,
    kernel,
    make_chain_map,
    make_complex,
    single_complex,
    solve,
)


# ---------------------------------------------------------------------------
# Elements and categories.


@dataclass(frozen=True)
class HomElement:
    """A homogeneous element of a Hom complex, as coordinates in the
    chosen basis of its degree."""

    source: object
    target: object
    degree: int
    vector: tuple

    def is_zero(self):
        return all(v == 0 for v in self.vector)


def _apply(mat, vec):
    out = mat * Matrix.column(mat.ring, list(vec))
    return tuple(out.rows[r][0] for r in range(out.nrows))


def _kron_vec(u, v):
    return tuple(a * b for a in u for b in v)


def _columns_to_matrix(ring, nrows, cols):
    rows = [[col[r] for col in cols] for r in range(nrows)]
    return Matrix(ring, rows, nrows=nrows, ncols=len(cols))


class DGCategory:
    """Objects, Hom complexes, composition tables and units.

    `comp_matrix(x, y, z, p, q)` is the matrix of

        Hom(y,z)^p (x) Hom(x,y)^q -> Hom(x,z)^(p+q)

    acting on kron(g, f) with the outer factor first.  Hom complexes and
    composition matrices may be supplied lazily through callables; keys
    outside `objects` are allowed so that a small listed category can sit
    inside a larger ambient one (the ambient Homs are what the cubical
    enrichment consumes).
    """

    def __init__(self, ring, objects, hom_fn, comp_fn=None, id_fn=None,
                 comp_vec_fn=None, name=""):
        self.ring = ring
        self.objects = tuple(objects)
        self.name = name
        self._hom_fn = hom_fn
        self._comp_fn = comp_fn
        self._comp_vec_fn = comp_vec_fn
        self._id_fn = id_fn
        self._hom = {}
        self._comp = {}
        self._id = {}

    def hom(self, x, y):
        key = (x, y)
        if key not in self._hom:
            cx = self._hom_fn(x, y)
            if cx.ring != self.ring:
                raise ValueError("hom complex ring mismatch at %r" % (key,))
            self._hom[key] = cx
        return self._hom[key]

    def comp_matrix(self, x, y, z, p, q):
        rows = self.hom(x, z).rank(p + q)
        cols = self.hom(y, z).rank(p) * self.hom(x, y).rank(q)
        if rows == 0 or cols == 0:
            return Matrix.zero(self.ring, rows, cols)
        key = (x, y, z, p, q)
        if key not in self._comp:
            mat = self._comp_fn(x, y, z, p, q) if self._comp_fn else None
            if mat is None:
                mat = self._assemble_comp(x, y, z, p, q)
            if mat.nrows != rows or mat.ncols != cols:
                raise ValueError("composition matrix shape mismatch at %r" % (key,))
            self._comp[key] = mat
        return self._comp[key]

    def _assemble_comp(self, x, y, z, p, q):
        if self._comp_vec_fn is None:
            raise ValueError("no composition data for (%r, %r, %r)" % (x, y, z))
        rg = self.hom(y, z).rank(p)
        rf = self.hom(x, y).rank(q)
        rows = self.hom(x, z).rank(p + q)
        cols = []
        for i in range(rg):
            gvec = tuple(1 if k == i else 0 for k in range(rg))
            for j in range(rf):
                fvec = tuple(1 if k == j else 0 for k in range(rf))
                cols.append(self._comp_vec_fn(x, y, z, p, q, gvec, fvec))
        return _columns_to_matrix(self.ring, rows, cols)

    def identity(self, x):
        if x not in self._id:
            vec = tuple(self._id_fn(x))
            if len(vec) != self.hom(x, x).rank(0):
                raise ValueError("identity vector length mismatch at %r" % (x,))
            self._id[x] = HomElement(x, x, 0, vec)
        return self._id[x]

    def element(self, x, y, degree, coords):
        coords = tuple(coords)
        if len(coords) != self.hom(x, y).rank(degree):
            raise ValueError("coordinate length mismatch")
        return HomElement(x, y, degree, coords)

    def zero_element(self, x, y, degree):
        return HomElement(x, y, degree, (0,) * self.hom(x, y).rank(degree))

    def basis(self, x, y, degree):
        r = self.hom(x, y).rank(degree)
        return [
            HomElement(x, y, degree, tuple(1 if k == i else 0 for k in range(r)))
            for i in range(r)
        ]

    def differential(self, f):
        cx = self.hom(f.source, f.target)
        vec = _apply(cx.d(f.degree), f.vector)
        return HomElement(f.source, f.target, f.degree + 1, vec)

    def compose(self, g, f):
        """g after f; f: x -> y, g: y -> z."""
        if f.target != g.source:
            raise ValueError("elements are not composable")
        x, y, z = f.source, f.target, g.target
        p, q = g.degree, f.degree
        rows = self.hom(x, z).rank(p + q)
        if rows == 0:
            return self.zero_element(x, z, p + q)
        if self._comp_vec_fn is not None and (x, y, z, p, q) not in self._comp:
            return HomElement(
                x, z, p + q, self._comp_vec_fn(x, y, z, p, q, g.vector, f.vector)
            )
        mat = self.comp_matrix(x, y, z, p, q)
        return HomElement(x, z, p + q, _apply(mat, _kron_vec(g.vector, f.vector)))

    def add(self, f, g):
        if (f.source, f.target, f.degree) != (g.source, g.target, g.degree):
            raise ValueError("cannot add elements of different type")
        return HomElement(
            f.source, f.target, f.degree,
            tuple(a + b for a, b in zip(f.vector, g.vector)),
        )

    def scale(self, f, c):
        return HomElement(f.source, f.target, f.degree, tuple(c * a for a in f.vector))

    def __repr__(self):
        return "DGCategory(%s, %d objects)" % (self.name or self.ring, len(self.objects))


# ---------------------------------------------------------------------------
# The law checker.


@dataclass(frozen=True)
class DGFailure:
    law: str
    where: tuple
    note: str


@dataclass(frozen=True)
class DGReport:
    ok: bool
    failures: tuple

    def laws_failed(self):
        return sorted({f.law for f in self.failures})


def _first_diff(a, b):
    for i in range(a.nrows):
        for j in range(a.ncols):
            if a.rows[i][j] != b.rows[i][j]:
                return "entry (%d, %d): %s != %s" % (i, j, a.rows[i][j], b.rows[i][j])
    return "equal"


def _ranked_degrees(cx):
    return [n for n in cx.degrees() if cx.rank(n)]


def validate_dg(C):
    """Check d^2, closed units, the Leibniz rule, associativity and the unit
    laws over the listed objects; every violation is reported with its
    location and a differing matrix entry.

    Degree pairs whose composite falls below the window of the target Hom
    are skipped: the dropped composition makes the laws unobservable there,
    and the window edge is not evidence either way.
    """
    failures = []

    def mismatch(law, where, lhs, rhs):
        if lhs != rhs:
            failures.append(DGFailure(law, where, _first_diff(lhs, rhs)))

    for x in C.objects:
        for y in C.objects:
            cx = C.hom(x, y)
            for n in cx.degrees():
                sq = cx.d(n + 1) * cx.d(n)
                if not sq.is_zero():
                    failures.append(DGFailure("dsq", (x, y, n), "d(n+1) d(n) != 0"))

    for x in C.objects:
        e = C.identity(x)
        if e.degree != 0:
            failures.append(DGFailure("unit-degree", (x,), "degree %d" % e.degree))
        if not C.differential(e).is_zero():
            failures.append(DGFailure("unit-closed", (x,), "d(id) != 0"))

    for x in C.objects:
        for y in C.objects:
            for z in C.objects:
                gz = C.hom(y, z)
                fz = C.hom(x, y)
                lo = C.hom(x, z).lo
                for p in _ranked_degrees(gz):
                    for q in _ranked_degrees(fz):
                        if p + q < lo:
                            continue
                        rq = fz.rank(q)
                        rp = gz.rank(p)
                        lhs = C.hom(x, z).d(p + q) * C.comp_matrix(x, y, z, p, q)
                        rhs = C.comp_matrix(x, y, z, p + 1, q) * gz.d(p).kron(
                            Matrix.identity(C.ring, rq)
                        )
                        term = C.comp_matrix(x, y, z, p, q + 1) * Matrix.identity(
                            C.ring, rp
                        ).kron(fz.d(q))
                        rhs = rhs + (term.scale(-1) if p % 2 else term)
                        mismatch("leibniz", (x, y, z, p, q), lhs, rhs)

    for x in C.objects:
        for y in C.objects:
            for z in C.objects:
                for w in C.objects:
                    hz = C.hom(z, w)
                    gz = C.hom(y, z)
                    fz = C.hom(x, y)
                    mid_l = C.hom(y, w)
                    mid_r = C.hom(x, z)
                    for p in _ranked_degrees(hz):
                        for q in _ranked_degrees(gz):
                            if not (mid_l.lo <= p + q <= mid_l.hi):
                                continue
                            for r in _ranked_degrees(fz):
                                if not (mid_r.lo <= q + r <= mid_r.hi):
                                    continue
                                rr = fz.rank(r)
                                rp = hz.rank(p)
                                lhs = C.comp_matrix(x, y, w, p + q, r) * C.comp_matrix(
                                    y, z, w, p, q
                                ).kron(Matrix.identity(C.ring, rr))
                                rhs = C.comp_matrix(x, z, w, p, q + r) * Matrix.identity(
                                    C.ring, rp
                                ).kron(C.comp_matrix(x, y, z, q, r))
                                mismatch("assoc", (x, y, z, w, p, q, r), lhs, rhs)

    for x in C.objects:
        for y in C.objects:
            fz = C.hom(x, y)
            idy = Matrix.column(C.ring, list(C.identity(y).vector))
            idx = Matrix.column(C.ring, list(C.identity(x).vector))
            for q in _ranked_degrees(fz):
                eye = Matrix.identity(C.ring, fz.rank(q))
                mismatch(
                    "unit-left", (x, y, q),
                    C.comp_matrix(x, y, y, 0, q) * idy.kron(eye), eye,
                )
                mismatch(
                    "unit-right", (x, y, q),
                    C.comp_matrix(x, x, y, q, 0) * eye.kron(idx), eye,
                )

    return DGReport(ok=not failures, failures=tuple(failures))


def flip_composition_signs(C):
    """Negative control: scale composition in degrees (p, q) by (-1)^(pq).

    The rescaled pairing still has the right shape but violates the Leibniz
    rule as soon as a differential moves an element across the parity of q,
    so `validate_dg` must flag it on any category with a nonzero d.
    """

    def comp(x, y, z, p, q):
        mat = C.comp_matrix(x, y, z, p, q)
        return mat.scale(-1) if (p * q) % 2 else mat

    return DGCategory(
        C.ring,
        C.objects,
        C.hom,
        comp_fn=comp,
        id_fn=lambda x: C.identity(x).vector,
        name="flipped(%s)" % (C.name or "?"),
    )


# ---------------------------------------------------------------------------
# Truncation and the homotopy category.


def truncate_nonpositive(C):
    """The canonical non-positive truncation: degrees below zero are kept,
    degree 0 becomes the kernel of d^0, positive degrees are dropped.
    Composition is restricted along the kernel embeddings; closed elements
    compose to closed elements, so the restriction always solves."""
    kernels = {}

    def kern(x, y):
        if (x, y) not in kernels:
            kernels[(x, y)] = kernel(C.hom(x, y).d(0))
        return kernels[(x, y)]

    def embed(x, y, n):
        cx = C.hom(x, y)
        if n < 0:
            return Matrix.identity(C.ring, cx.rank(n))
        if n == 0:
            return kern(x, y)
        return Matrix.zero(C.ring, cx.rank(n), 0)

    def hom_fn(x, y):
        cx = C.hom(x, y)
        if cx.hi <= 0:
            hi = cx.hi
        else:
            hi = 0
        lo = min(cx.lo, hi)
        ranks = [embed(x, y, n).ncols for n in range(lo, hi + 1)]
        diffs = {}
        for n in range(lo, hi):
            if n == -1:
                restricted = solve(kern(x, y), cx.d(-1))
                if restricted is None:
                    raise ValueError("image of d(-1) escapes the kernel of d(0)")
                diffs[n] = restricted
            else:
                diffs[n] = cx.d(n)
        return make_complex(C.ring, lo, ranks, diffs)

    def comp_fn(x, y, z, p, q):
        mat = C.comp_matrix(x, y, z, p, q) * embed(y, z, p).kron(embed(x, y, q))
        target = embed(x, z, p + q)
        out = solve(target, mat)
        if out is None:
            raise ValueError("composition does not preserve the truncation")
        return out

    def id_fn(x):
        coords = solve(kern(x, x), Matrix.column(C.ring, list(C.identity(x).vector)))
        if coords is None:
            raise ValueError("identity is not closed")
        return tuple(coords.rows[r][0] for r in range(coords.nrows))

    return DGCategory(
        C.ring, C.objects, hom_fn, comp_fn=comp_fn, id_fn=id_fn,
        name="tau<=0(%s)" % (C.name or "?"),
    )


@dataclass(eq=False)
class H0Category:
    """H^0 of a DG category: cycle bases, boundary lattices in cycle
    coordinates, and composition descended to cycle representatives."""

    ring: str
    objects: tuple
    cycles: dict
    boundaries: dict
    groups: dict
    comp: dict
    ident: dict

    def hom_group(self, x, y):
        return self.groups[(x, y)]

    def compose(self, x, y, z, gvec, fvec):
        return _apply(self.comp[(x, y, z)], _kron_vec(gvec, fvec))

    def same_class(self, x, y, u, v):
        diff = Matrix.column(self.ring, [a - b for a, b in zip(u, v)])
        return solve(self.boundaries[(x, y)], diff) is not None

    def is_invertible(self, x, y, fvec):
        """Two-sided invertibility of a cycle class, decided by one linear
        solve for the inverse together with boundary slack."""
        ring = self.ring
        fcol = Matrix.column(ring, list(fvec))
        rg = self.cycles[(y, x)].ncols
        eye = Matrix.identity(ring, rg)
        m1 = self.comp[(x, y, x)] * eye.kron(fcol)
        m2 = self.comp[(y, x, y)] * fcol.kron(eye)
        bxx = self.boundaries[(x, x)]
        byy = self.boundaries[(y, y)]
        top = m1.hstack(bxx).hstack(Matrix.zero(ring, m1.nrows, byy.ncols))
        bot = m2.hstack(Matrix.zero(ring, m2.nrows, bxx.ncols)).hstack(byy)
        lhs = top.vstack(bot)
        rhs = Matrix.column(ring, list(self.ident[x]) + list(self.ident[y]))
        return solve(lhs, rhs) is not None

    def iso_exists(self, x, y, bound=1):
        if x == y:
            return True
        r = self.cycles[(x, y)].ncols
        if r == 0:
            return self.cycles[(y, x)].ncols == 0 and self.groups[(x, y)].is_zero()
        if r <= 6:
            values = range(-bound, bound + 1)
            for coords in itertools.product(values, repeat=r):
                if any(coords) and self.is_invertible(x, y, coords):
                    return True
            return False
        for i in range(r):
            for s in (1, -1):
                coords = tuple(s if k == i else 0 for k in range(r))
                if self.is_invertible(x, y, coords):
                    return True
        return False


def homotopy_category(C):
    cycles = {}
    boundaries = {}
    groups = {}
    comp = {}
    ident = {}
    for x in C.objects:
        for y in C.objects:
            cx = C.hom(x, y)
            K = kernel(cx.d(0))
            B = solve(K, cx.d(-1))
            if B is None:
                raise ValueError("boundaries escape the cycle lattice")
            cycles[(x, y)] = K
            boundaries[(x, y)] = B
            groups[(x, y)] = complex_homology(cx, 0)
    for x in C.objects:
        for y in C.objects:
            for z in C.objects:
                mat = C.comp_matrix(x, y, z, 0, 0) * cycles[(y, z)].kron(cycles[(x, y)])
                out = solve(cycles[(x, z)], mat)
                if out is None:
                    raise ValueError("composition does not preserve cycles")
                comp[(x, y, z)] = out
    for x in C.objects:
        coords = solve(
            cycles[(x, x)], Matrix.column(C.ring, list(C.identity(x).vector))
        )
        if coords is None:
            raise ValueError("identity is not a cycle")
        ident[x] = tuple(coords.rows[r][0] for r in range(coords.nrows))
    return H0Category(C.ring, C.objects, cycles, boundaries, groups, comp, ident)


def cycles_category(C):
    """Z^0 of a DG category, returned as a DG category concentrated in
    degree 0 so the same law checker applies."""
    H = homotopy_category(C)

    def hom_fn(x, y):
        return single_complex(C.ring, 0, H.cycles[(x, y)].ncols)

    def comp_fn(x, y, z, p, q):
        return H.comp[(x, y, z)]

    return DGCategory(
        C.ring, C.objects, hom_fn, comp_fn=comp_fn,
        id_fn=lambda x: H.ident[x], name="Z0(%s)" % (C.name or "?"),
    )


# ---------------------------------------------------------------------------
# Functors and the homotopy-equivalence report.


@dataclass(eq=False)
class DGFunctor:
    source: DGCategory
    target: DGCategory
    obj_map: dict
    mor_maps: dict  # (x, y) -> ChainMap between the Hom complexes


@dataclass(frozen=True)
class FunctorReport:
    ok: bool
    failures: tuple


def validate_functor(F):
    failures = []
    C, D = F.source, F.target
    for x in C.objects:
        if x not in F.obj_map:
            failures.append(DGFailure("object-map", (x,), "missing"))
    if failures:
        return FunctorReport(False, tuple(failures))
    for x in C.objects:
        for y in C.objects:
            cmap = F.mor_maps[(x, y)]
            src = C.hom(x, y)
            tgt = D.hom(F.obj_map[x], F.obj_map[y])
            if cmap.source != src or cmap.target != tgt:
                failures.append(DGFailure("hom-map", (x, y), "wrong complexes"))
                continue
            for n in src.degrees():
                lhs = tgt.d(n) * cmap.comp(n)
                rhs = cmap.comp(n + 1) * src.d(n)
                if lhs != rhs:
                    failures.append(DGFailure("chain-map", (x, y, n), _first_diff(lhs, rhs)))
    for x in C.objects:
        e = C.identity(x)
        img = _apply(F.mor_maps[(x, x)].comp(0), e.vector)
        if img != D.identity(F.obj_map[x]).vector:
            failures.append(DGFailure("unit-image", (x,), "F(id) != id"))
    for x in C.objects:
        for y in C.objects:
            for z in C.objects:
                fx, fy, fz = F.obj_map[x], F.obj_map[y], F.obj_map[z]
                tgt = D.hom(fx, fz)
                gz = C.hom(y, z)
                fzc = C.hom(x, y)
                for p in _ranked_degrees(gz):
                    for q in _ranked_degrees(fzc):
                        if not (tgt.lo <= p + q <= tgt.hi):
                            continue
                        if not (C.hom(x, z).lo <= p + q <= C.hom(x, z).hi):
                            continue
                        lhs = F.mor_maps[(x, z)].comp(p + q) * C.comp_matrix(x, y, z, p, q)
                        rhs = D.comp_matrix(fx, fy, fz, p, q) * F.mor_maps[(y, z)].comp(
                            p
                        ).kron(F.mor_maps[(x, y)].comp(q))
                        if lhs != rhs:
                            failures.append(
                                DGFailure("composition-image", (x, y, z, p, q), _first_diff(lhs, rhs))
                            )
    return FunctorReport(ok=not failures, failures=tuple(failures))


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    functor: FunctorReport
    hom_reports: tuple  # ((x, y), QuasiIsoReport) pairs
    missing_objects: tuple

    def failing_pairs(self):
        return tuple(pair for pair, rep in self.hom_reports if not rep.ok)


def dg_homotopy_equivalence_check(F, window=None, search_bound=1):
    """Quasi-isomorphism on every Hom pair plus H^0 essential surjectivity.

    The surjectivity search compares each target object against the images
    of the source objects inside H^0 of the target, looking for a two-sided
    inverse with bounded cycle coordinates; the bound keeps the search exact
    and finite, at the price of missing isomorphisms with large entries.
    """
    frep = validate_functor(F)
    if not frep.ok:
        raise ValueError("functor data fails: %s" % frep.failures[0].law)
    hom_reports = []
    ok = True
    for x in F.source.objects:
        for y in F.source.objects:
            rep = is_quasi_iso(F.mor_maps[(x, y)], window=window)
            hom_reports.append(((x, y), rep))
            ok = ok and rep.ok
    H = homotopy_category(F.target)
    missing = []
    images = [F.obj_map[a] for a in F.source.objects]
    for b in F.target.objects:
        if not any(H.iso_exists(img, b, bound=search_bound) for img in images):
            missing.append(b)
            ok = False
    return EquivalenceReport(ok, frep, tuple(hom_reports), tuple(missing))


def collapse_functor(C):
    """Everything to a single object with zero Homs; a valid functor that is
    never an equivalence unless C itself is trivial."""
    target = DGCategory(
        C.ring, ("*",),
        hom_fn=lambda x, y: make_complex(C.ring, 0, [0]),
        comp_fn=lambda x, y, z, p, q: Matrix.zero(C.ring, 0, 0),
        id_fn=lambda x: (),
        name="point",
    )
    mor_maps = {}
    for x in C.objects:
        for y in C.objects:
            src = C.hom(x, y)
            comps = {n: Matrix.zero(C.ring, 0, src.rank(n)) for n in src.degrees()}
            mor_maps[(x, y)] = make_chain_map(src, target.hom("*", "*"), comps, check=False)
    return DGFunctor(C, target, {x: "*" for x in C.objects}, mor_maps)


# ---------------------------------------------------------------------------
# Tensor data over a DG category.


@dataclass(eq=False)
class TensorDGData:
    """A DG category with a strict monoidal structure on object keys.

    `obj_tensor` must be strictly associative and strictly unital on keys;
    `mor_tensor` takes the left factor first; `symmetry(x, y)` is the closed
    degree-0 element of Hom(x (x) y, y (x) x).
    """

    category: DGCategory
    unit: object
    obj_tensor: object
    mor_tensor: object
    symmetry: object


def tensor_data_report(T, triples):
    """Spot-check bifunctoriality and the symmetry axioms on listed element
    pairs; `triples` is an iterable of ((f, g), (f2, g2)) with f, f2 and
    g, g2 composable."""
    failures = []
    C = T.category
    for (f, g), (f2, g2) in triples:
        lhs = C.compose(T.mor_tensor(f, g), T.mor_tensor(f2, g2))
        rhs = T.mor_tensor(C.compose(f, f2), C.compose(g, g2))
        if (g.degree * f2.degree) % 2:
            rhs = C.scale(rhs, -1)
        if lhs != rhs:
            failures.append(DGFailure("tensor-interchange", (f.source, g.source), "mismatch"))
    for (f, g), _ in triples:
        t_out = T.symmetry(f.target, g.target)
        t_in = T.symmetry(f.source, g.source)
        lhs = C.compose(t_out, T.mor_tensor(f, g))
        rhs = C.compose(T.mor_tensor(g, f), t_in)
        if (f.degree * g.degree) % 2:
            rhs = C.scale(rhs, -1)
        if lhs != rhs:
            failures.append(DGFailure("tensor-symmetry", (f.source, g.source), "mismatch"))
    return DGReport(ok=not failures, failures=tuple(failures))


# ---------------------------------------------------------------------------
# The category of complexes as a DG category.


def complexes_category(complexes, name="complexes"):
    """DG category with Hom the mapping complexes and plain componentwise
    composition; the Koszul signs live entirely in the Hom differential."""
    items = dict(complexes)
    rings = {cx.ring for cx in items.values()}
    if len(rings) != 1:
        raise ValueError("all complexes must share a ring")
    ring = rings.pop()

    def hom_fn(x, y):
        return hom_complex(items[x], items[y])

    def comp_vec(x, y, z, p, q, gvec, fvec):
        return hom_compose_vec(items[x], items[y], items[z], p, gvec, q, fvec)

    return DGCategory(
        ring, tuple(sorted(items)), hom_fn,
        comp_vec_fn=comp_vec,
        id_fn=lambda x: identity_hom_vector(items[x]),
        name=name,
    )


# ---------------------------------------------------------------------------
# Co-cubical objects.


@dataclass(eq=False)
class CoCubicalObject:
    """A covariant assignment of host objects to cube levels.

    `cube(n)` is the object for level n with `cube(0)` the tensor unit,
    `image(f)` the degree-0 host element of a cube-category map f, and
    `delta(n)` the comultiplication at level n.  `top` bounds the levels
    the enrichment will touch.
    """

    host: TensorDGData
    top: int
    extended: bool
    cube: object
    image: object
    delta: object


@dataclass(frozen=True)
class CoCubicalReport:
    ok: bool
    failures: tuple


def validate_cocubical(Q, bound=None):
    """Functoriality on the generated morphism closure plus the four
    comultiplication axioms, each reported under its own name.

    The closure walk is exact but exponential in the level bound, so the
    default stops at 3 without merges and 2 with them; the table-driven
    builders below are functorial at every level by construction.
    """
    if bound is None:
        bound = min(Q.top, 2 if Q.extended else 3)
    host = Q.host
    C = host.category
    failures = []

    def note(law, where, text):
        failures.append(DGFailure(law, where, text))

    if Q.cube(0) != host.unit:
        note("unit-object", (0,), "cube(0) is not the tensor unit")

    gens = list(generator_maps(bound, Q.extended).items())
    table = {}
    frontier = []
    for n in range(bound + 1):
        f = identity_map(n)
        table[(n, n, f.table)] = C.identity(Q.cube(n))
        frontier.append(f)
        direct = Q.image(f)
        if direct.vector != table[(n, n, f.table)].vector:
            note("functoriality", (n, n), "image of the identity is not the identity")
    while frontier:
        new = []
        for f in frontier:
            known = table[(f.dom, f.cod, f.table)]
            for token, g in gens:
                if g.dom != f.cod:
                    continue
                h = compose_cube(g, f)
                cand = C.compose(Q.image(g), known)
                key = (h.dom, h.cod, h.table)
                prev = table.get(key)
                if prev is None:
                    table[key] = cand
                    new.append(h)
                    if Q.image(h).vector != cand.vector:
                        note(
                            "functoriality", (h.dom, h.cod),
                            "direct image disagrees with a factorization through %s" % token,
                        )
                elif prev.vector != cand.vector:
                    note(
                        "functoriality", (h.dom, h.cod),
                        "two factorizations of the same map disagree at %s" % token,
                    )
        frontier = new

    d0 = Q.delta(0)
    if d0.vector != C.identity(host.unit).vector:
        note("co-unital", (0,), "delta(0) is not the unit identity")
    for n in range(bound + 1):
        dn = Q.delta(n)
        cn = Q.cube(n)
        idc = C.identity(cn)
        lhs = C.compose(host.mor_tensor(dn, idc), dn)
        rhs = C.compose(host.mor_tensor(idc, dn), dn)
        if lhs != rhs:
            note("co-associative", (n,), "the two iterates differ")
        tw = C.compose(host.symmetry(cn, cn), dn)
        if tw != dn:
            note("symmetric", (n,), "twist changes delta")
    for token, g in gens:
        if g.cod > bound:
            continue
        lhs = C.compose(Q.delta(g.cod), Q.image(g))
        rhs = C.compose(host.mor_tensor(Q.image(g), Q.image(g)), Q.delta(g.dom))
        if lhs != rhs:
            note("co-cubical", (g.dom, g.cod), "delta is not natural for %s" % token)
    return CoCubicalReport(ok=not failures, failures=tuple(failures))


# ---------------------------------------------------------------------------
# Host 1: the finite-correspondence toy.


def fincor_elements(key):
    """Points of a tuple-of-finite-sets object, lexicographically."""
    return tuple(itertools.product(*key))


def _fincor_rank(key):
    n = 1
    for s in key:
        n *= len(s)
    return n


def fincor_vector(X, Y, pairs):
    """Element of Hom(X, Y) from (point of X, point of Y, coefficient)
    triples; basis order is (target point, source point) row-major."""
    ex, ey = fincor_elements(X), fincor_elements(Y)
    ix = {v: i for i, v in enumerate(ex)}
    iy = {v: i for i, v in enumerate(ey)}
    vec = [0] * (len(ex) * len(ey))
    for px, py, c in pairs:
        vec[iy[tuple(py)] * len(ex) + ix[tuple(px)]] += c
    return tuple(vec)


def fincor_matrix(elem):
    """Incidence matrix of a degree-0 correspondence, targets indexing rows."""
    nx = _fincor_rank(elem.source)
    ny = _fincor_rank(elem.target)
    rows = [list(elem.vector[r * nx : (r + 1) * nx]) for r in range(ny)]
    return rows


def graph_vector(X, Y, fn):
    """The graph of a point map as a correspondence."""
    return fincor_vector(X, Y, [(p, fn[p], 1) for p in fincor_elements(X)])


def build_fincor(universe, ring="Z", top=4):
    """Finite sets and correspondences, with every cube equal to the unit.

    Objects are tuples of the universe's atomic sets, the tensor product is
    concatenation (so it is strictly associative and unital on keys), and
    Hom(X, Y) is the free module on points of X x Y composed by incidence
    matrix product.  A correspondence on X x cube^n that is a disjoint
    union of graphs of maps surjective onto components is forced to be
    constant in the cube directions, which collapses every cube object to
    the unit and every structure map and the comultiplication to the
    identity; the enrichment below then shows the collapse explicitly.
    """
    universe = tuple(tuple(s) for s in universe)
    objects = ((),) + tuple((s,) for s in universe)

    def hom_fn(X, Y):
        return single_complex(ring, 0, _fincor_rank(X) * _fincor_rank(Y))

    def comp_vec(X, Y, Z, p, q, gvec, fvec):
        nx, ny, nz = _fincor_rank(X), _fincor_rank(Y), _fincor_rank(Z)
        out = [0] * (nx * nz)
        for iz in range(nz):
            for iy in range(ny):
                c = gvec[iz * ny + iy]
                if c == 0:
                    continue
                base = iy * nx
                for ix in range(nx):
                    out[iz * nx + ix] += c * fvec[base + ix]
        return tuple(out)

    def id_fn(X):
        n = _fincor_rank(X)
        vec = [0] * (n * n)
        for i in range(n):
            vec[i * n + i] = 1
        return tuple(vec)

    cat = DGCategory(ring, objects, hom_fn, comp_vec_fn=comp_vec, id_fn=id_fn,
                     name="fincor/%s" % ring)

    def mor_tensor(f, g):
        if f.degree or g.degree:
            raise ValueError("correspondences are concentrated in degree 0")
        X, Y = f.source, f.target
        X2, Y2 = g.source, g.target
        XX, YY = X + X2, Y + Y2
        ex, ey = fincor_elements(X), fincor_elements(Y)
        ex2, ey2 = fincor_elements(X2), fincor_elements(Y2)
        ixx = {v: i for i, v in enumerate(fincor_elements(XX))}
        iyy = {v: i for i, v in enumerate(fincor_elements(YY))}
        nx, nxx = len(ex), len(ex) * len(ex2)
        nx2 = len(ex2)
        vec = [0] * (nxx * len(ey) * len(ey2))
        for iy, py in enumerate(ey):
            for ix, px in enumerate(ex):
                a = f.vector[iy * nx + ix]
                if a == 0:
                    continue
                for iy2, py2 in enumerate(ey2):
                    for ix2, px2 in enumerate(ex2):
                        b = g.vector[iy2 * nx2 + ix2]
                        if b == 0:
                            continue
                        row = iyy[py + py2]
                        col = ixx[px + px2]
                        vec[row * nxx + col] += a * b
        return HomElement(XX, YY, 0, tuple(vec))

    def symmetry(X, Y):
        exy = fincor_elements(X + Y)
        iyx = {v: i for i, v in enumerate(fincor_elements(Y + X))}
        k = len(X)
        n = len(exy)
        vec = [0] * (n * n)
        for col, p in enumerate(exy):
            swapped = p[k:] + p[:k]
            vec[iyx[swapped] * n + col] = 1
        return HomElement(X + Y, Y + X, 0, tuple(vec))

    host = TensorDGData(cat, (), lambda a, b: a + b, mor_tensor, symmetry)
    unit_id = cat.identity(())
    cocube = CoCubicalObject(
        host, top, True,
        cube=lambda n: (),
        image=lambda f: unit_id,
        delta=lambda n: unit_id,
    )
    return host, cocube


# ---------------------------------------------------------------------------
# Host 2: free modules with vertex-spanned cubes.


def build_vertex_cubes(ring="Q", top=3, objects=(1, 2)):
    """Free modules of listed ranks; cube^n is the free module on the cube
    vertices, structure maps act by the vertex tables, and delta is the
    linear extension of the diagonal.  Unlike the correspondence toy this
    host gives the enrichment honest differentials: the level-n Hom is the
    module of vertex functions with values in Hom(X, Y)."""

    def hom_fn(m, n):
        return single_complex(ring, 0, m * n)

    def comp_vec(x, y, z, p, q, gvec, fvec):
        out = [0] * (x * z)
        for iz in range(z):
            for iy in range(y):
                c = gvec[iz * y + iy]
                if c == 0:
                    continue
                base = iy * x
                for ix in range(x):
                    out[iz * x + ix] += c * fvec[base + ix]
        return tuple(out)

    def id_fn(m):
        vec = [0] * (m * m)
        for i in range(m):
            vec[i * m + i] = 1
        return tuple(vec)

    cat = DGCategory(ring, tuple(objects), hom_fn, comp_vec_fn=comp_vec,
                     id_fn=id_fn, name="freemod/%s" % ring)

    def mor_tensor(f, g):
        if f.degree or g.degree:
            raise ValueError("module maps are concentrated in degree 0")
        a, b = f.source, f.target
        a2, b2 = g.source, g.target
        mf = Matrix(ring, [list(f.vector[r * a : (r + 1) * a]) for r in range(b)],
                    nrows=b, ncols=a)
        mg = Matrix(ring, [list(g.vector[r * a2 : (r + 1) * a2]) for r in range(b2)],
                    nrows=b2, ncols=a2)
        kk = mf.kron(mg)
        return HomElement(a * a2, b * b2,
                          0, tuple(v for row in kk.rows for v in row))

    def symmetry(a, b):
        n = a * b
        vec = [0] * (n * n)
        for ia in range(a):
            for ib in range(b):
                vec[(ib * a + ia) * n + (ia * b + ib)] = 1
        return HomElement(n, n, 0, tuple(vec))

    host = TensorDGData(cat, 1, lambda a, b: a * b, mor_tensor, symmetry)

    def image(f):
        dom, cod = 2 ** f.dom, 2 ** f.cod
        idx = vertex_index(f.cod)
        vec = [0] * (dom * cod)
        for col, v in enumerate(f.table):
            vec[idx[v] * dom + col] = 1
        return HomElement(dom, cod, 0, tuple(vec))

    def delta(n):
        dom = 2 ** n
        vec = [0] * (dom * dom * dom)
        for u in range(dom):
            vec[(u * dom + u) * dom + u] = 1
        return HomElement(dom, dom * dom, 0, tuple(vec))

    cocube = CoCubicalObject(host, top, True,
                             cube=lambda n: 2 ** n, image=image, delta=delta)
    return host, cocube


# ---------------------------------------------------------------------------
# The cubical enrichment.


class CubicalEnrichment:
    """Hom(X, Y)^(-n) = Hom_C(X (x) cube^n, Y) with the degenerate part
    split off, composition by cube duplication after the cup pairing.

    The stored model of each Hom complex is the intersection of the level's
    one-valued face kernels; composition is computed on the full levels and
    projected back along the splitting, which is legitimate because the
    degenerate part is an ideal for the pairing.
    """

    def __init__(self, host, cocube, objects=None, name=""):
        rep = validate_cocubical(cocube)
        if not rep.ok:
            raise ValueError("comultiplication axiom failed: %s" % rep.failures[0].law)
        self.host = host
        self.cocube = cocube
        self.window = cocube.top
        objs = tuple(objects) if objects is not None else host.category.objects
        for x in objs:
            for y in objs:
                cx = host.category.hom(x, y)
                if any(cx.rank(n) for n in cx.degrees() if n != 0):
                    raise ValueError("host morphisms must be concentrated in degree 0")
        self._groups = {}
        self._models = {}
        self._splits = {}
        self.category = DGCategory(
            host.category.ring, objs,
            hom_fn=lambda x, y: self.model(x, y).complex,
            comp_fn=self._comp_matrix,
            id_fn=self._identity,
            name=name or "enriched(%s)" % (host.category.name or "?"),
        )

    # -- the level data -----------------------------------------------------

    def _level_object(self, x, n):
        return self.host.obj_tensor(x, self.cocube.cube(n))

    def group(self, x, y):
        key = (x, y)
        if key not in self._groups:
            host, Q = self.host, self.cocube
            C = host.category
            idx = C.identity(x)
            ranks = [
                C.hom(self._level_object(x, n), y).rank(0)
                for n in range(self.window + 1)
            ]

            def act(f, x=x, y=y, idx=idx):
                u = host.mor_tensor(idx, Q.image(f))
                src = C.hom(self._level_object(x, f.cod), y)
                cols = []
                for i in range(src.rank(0)):
                    e = C.element(self._level_object(x, f.cod), y, 0,
                                  tuple(1 if k == i else 0 for k in range(src.rank(0))))
                    cols.append(C.compose(e, u).vector)
                return _columns_to_matrix(
                    C.ring, C.hom(self._level_object(x, f.dom), y).rank(0), cols
                )

            self._groups[key] = CubicalAbelianGroup(
                C.ring, self.window, ranks, act, extended=Q.extended,
                name="Hom(%r, %r)" % (x, y),
            )
        return self._groups[key]

    def model(self, x, y):
        key = (x, y)
        if key not in self._models:
            self._models[key] = associated_complex(self.group(x, y), "reduced")
        return self._models[key]

    def splitting(self, x, y, n):
        key = (x, y, n)
        if key not in self._splits:
            self._splits[key] = degenerate_splitting(self.group(x, y), n)
        return self._splits[key]

    def degree0_iso(self, x, y):
        """Matrix identifying the host Hom module with the degree-0 part of
        the enriched Hom; the reduced basis at level 0 is the whole level,
        so this is the recorded change of basis (the identity)."""
        return self.model(x, y).level_basis[0]

    # -- category structure -------------------------------------------------

    def _chat(self, x, y, z, gvec, fvec, n):
        """g . (f (x) id_cube) . (id_x (x) delta) at a common level n."""
        host, Q = self.host, self.cocube
        C = host.category
        cn = Q.cube(n)
        g = C.element(self._level_object(y, n), z, 0, gvec)
        f = C.element(self._level_object(x, n), y, 0, fvec)
        dup = host.mor_tensor(C.identity(x), Q.delta(n))
        w = C.compose(host.mor_tensor(f, C.identity(cn)), dup)
        return C.compose(g, w).vector

    def _comp_matrix(self, x, y, z, p, q):
        b, a = -p, -q
        n = a + b
        rows = self.model(x, z).complex.rank(p + q)
        Byz = self.model(y, z).level_basis[b]
        Bxy = self.model(x, y).level_basis[a]
        cols_n = Byz.ncols * Bxy.ncols
        if rows == 0 or cols_n == 0:
            return Matrix.zero(self.category.ring, rows, cols_n)
        Ayz = self.group(y, z)
        Axy = self.group(x, y)
        gfull = Ayz.act(front_projection(b, a)) * Byz
        ffull = Axy.act(back_projection(b, a)) * Bxy
        cols = []
        fcols = [
            tuple(ffull.rows[r][j] for r in range(ffull.nrows))
            for j in range(ffull.ncols)
        ]
        for i in range(gfull.ncols):
            gcol = tuple(gfull.rows[r][i] for r in range(gfull.nrows))
            for fcol in fcols:
                cols.append(self._chat(x, y, z, gcol, fcol, n))
        raw = _columns_to_matrix(self.category.ring, self.group(x, z).rank(n), cols)
        reduced = solve(
            self.model(x, z).level_basis[n], self.splitting(x, z, n).projector * raw
        )
        if reduced is None:
            raise ValueError("projected composition escapes the reduced part")
        return reduced

    def _identity(self, x):
        coords = solve(
            self.model(x, x).level_basis[0],
            Matrix.column(self.category.ring, list(self.host.category.identity(x).vector)),
        )
        return tuple(coords.rows[r][0] for r in range(coords.nrows))


def cubical_enrichment(host, cocube, objects=None, name=""):
    return CubicalEnrichment(host, cocube, objects=objects, name=name)


# ---------------------------------------------------------------------------
# The alternating enrichment.


class AlternatingEnrichment:
    """Sign-isotypic subcomplexes of the full levels with the alternating
    projection folded into composition and into the box tensor product."""

    def __init__(self, host, cocube, objects=None):
        if host.category.ring != "Q":
            raise ValueError("the alternating enrichment needs rational coefficients")
        if not cocube.extended:
            raise ValueError("the alternating enrichment needs the extended cube maps")
        rep = validate_cocubical(cocube)
        if not rep.ok:
            raise ValueError("comultiplication axiom failed: %s" % rep.failures[0].law)
        self.host = host
        self.cocube = cocube
        self.window = cocube.top
        self._plain = CubicalEnrichment(host, cocube, objects=objects)
        self._alt = {}
        self._alt_cube = {}
        objs = tuple(objects) if objects is not None else host.category.objects
        self.category = DGCategory(
            "Q", objs,
            hom_fn=lambda x, y: self.alt(x, y).complex,
            comp_fn=self._comp_matrix,
            id_fn=self._identity,
            name="alt(%s)" % (host.category.name or "?"),
        )
        self.tensor = TensorDGData(
            self.category, host.unit, host.obj_tensor, self.box_tensor, self._symmetry
        )

    def group(self, x, y):
        return self._plain.group(x, y)

    def alt(self, x, y):
        key = (x, y)
        if key not in self._alt:
            self._alt[key] = alternating_complex(self.group(x, y), group="F", variant="full")
        return self._alt[key]

    def _alt_cube_element(self, n):
        """The averaged signed symmetries as an endomorphism of cube^n."""
        if n not in self._alt_cube:
            host, Q = self.host, self.cocube
            C = host.category
            cn = Q.cube(n)
            r = C.hom(cn, cn).rank(0)
            total = [Fraction(0)] * r
            elements = signed_symmetry_group(n, "F")
            c = Fraction(1, len(elements))
            for g in elements:
                vec = Q.image(signed_as_cube_map(g)).vector
                s = c * sign_character(g)
                total = [t + s * v for t, v in zip(total, vec)]
            self._alt_cube[n] = HomElement(cn, cn, 0, tuple(total))
        return self._alt_cube[n]

    def _comp_matrix(self, x, y, z, p, q):
        b, a = -p, -q
        n = a + b
        rows = self.alt(x, z).complex.rank(p + q)
        Byz = self.alt(y, z).level_basis[b]
        Bxy = self.alt(x, y).level_basis[a]
        cols_n = Byz.ncols * Bxy.ncols
        if rows == 0 or cols_n == 0:
            return Matrix.zero("Q", rows, cols_n)
        Ayz = self.group(y, z)
        Axy = self.group(x, y)
        gfull = Ayz.act(front_projection(b, a)) * Byz
        ffull = Axy.act(back_projection(b, a)) * Bxy
        cols = []
        fcols = [
            tuple(ffull.rows[r][j] for r in range(ffull.nrows))
            for j in range(ffull.ncols)
        ]
        for i in range(gfull.ncols):
            gcol = tuple(gfull.rows[r][i] for r in range(gfull.nrows))
            for fcol in fcols:
                cols.append(self._plain._chat(x, y, z, gcol, fcol, n))
        raw = _columns_to_matrix("Q", self.group(x, z).rank(n), cols)
        proj = alternating_projector(self.group(x, z), n, "F")
        reduced = solve(self.alt(x, z).level_basis[n], proj * raw)
        if reduced is None:
            raise ValueError("projected composition escapes the alternating part")
        return reduced

    def _identity(self, x):
        coords = solve(
            self.alt(x, x).level_basis[0],
            Matrix.column("Q", [Fraction(v) for v in self.host.category.identity(x).vector]),
        )
        return tuple(coords.rows[r][0] for r in range(coords.nrows))

    def _symmetry(self, x, y):
        t = self.host.symmetry(x, y)
        xy = self.host.obj_tensor(x, y)
        yx = self.host.obj_tensor(y, x)
        coords = solve(
            self.alt(xy, yx).level_basis[0],
            Matrix.column("Q", [Fraction(v) for v in t.vector]),
        )
        return self.category.element(
            xy, yx, 0, tuple(coords.rows[r][0] for r in range(coords.nrows))
        )

    def _embed(self, f):
        """Full-level host element behind an alternating coordinate vector."""
        n = -f.degree
        basis = self.alt(f.source, f.target).level_basis[n]
        vec = _apply(basis, f.vector)
        return self.host.category.element(
            self._plain._level_object(f.source, n), f.target, 0, vec
        )

    def box_tensor(self, f, g):
        """f box g: split the cube, swap the middle factors, tensor in the
        host, then average over the signed symmetries of the big cube."""
        host, Q = self.host, self.cocube
        C = host.category
        n, n2 = -f.degree, -g.degree
        N = n + n2
        xx = host.obj_tensor(f.source, g.source)
        yy = host.obj_tensor(f.target, g.target)
        if n < 0 or n2 < 0 or N > self.window:
            return self.category.zero_element(xx, yy, f.degree + g.degree)
        split = C.compose(
            host.mor_tensor(
                Q.image(front_projection(n, n2)), Q.image(back_projection(n, n2))
            ),
            Q.delta(N),
        )
        mid = host.mor_tensor(
            host.mor_tensor(C.identity(f.source), host.symmetry(g.source, Q.cube(n))),
            C.identity(Q.cube(n2)),
        )
        pre = C.compose(mid, host.mor_tensor(C.identity(xx), split))
        tilde = C.compose(host.mor_tensor(self._embed(f), self._embed(g)), pre)
        res = C.compose(tilde, host.mor_tensor(C.identity(xx), self._alt_cube_element(N)))
        coords = solve(
            self.alt(xx, yy).level_basis[N],
            Matrix.column("Q", list(res.vector)),
        )
        if coords is None:
            raise ValueError("box tensor escapes the alternating part")
        return self.category.element(
            xx, yy, f.degree + g.degree,
            tuple(coords.rows[r][0] for r in range(coords.nrows)),
        )


def alternating_enrichment(host, cocube, objects=None):
    return AlternatingEnrichment(host, cocube, objects=objects)


def alternating_inclusion_functor(alt_enr, enr):
    """The comparison map from the alternating enrichment to the reduced
    model of the plain one: embed the sign part into the full level, then
    project along the degenerate splitting.

    This is a chain map on every Hom pair, but strict compatibility with
    composition can genuinely fail: two sign-isotypic elements may compose,
    in the reduced model, to something the sign average kills (the sign
    character is absent from most level representations above 1, so the
    alternating side records 0).  `validate_functor` reports exactly where.
    The strict functor between the two enrichments is the projection below.
    """
    src = alt_enr.category
    tgt = enr.category
    mor_maps = {}
    for x in src.objects:
        for y in src.objects:
            comps = {}
            for n in range(enr.window + 1):
                proj = enr.splitting(x, y, n).projector
                emb = alt_enr.alt(x, y).level_basis[n]
                mat = solve(enr.model(x, y).level_basis[n], proj * emb)
                if mat is None:
                    raise ValueError("projection escapes the reduced part")
                comps[-n] = mat
            mor_maps[(x, y)] = make_chain_map(
                src.hom(x, y), tgt.hom(x, y), comps
            )
    return DGFunctor(src, tgt, {x: x for x in src.objects}, mor_maps)


def alternating_projection_functor(enr, alt_enr):
    """The sign average as a strict DG functor from the reduced model onto
    the alternating enrichment.

    Strictness comes from an ideal property: precomposing with a signed
    symmetry moves across the pairing as a block symmetry of the composite
    level, so the kernel of the average is an ideal and the projected
    composition agrees with composing the projections.
    """
    src = enr.category
    tgt = alt_enr.category
    mor_maps = {}
    for x in src.objects:
        for y in src.objects:
            comps = {}
            for n in range(enr.window + 1):
                proj = alternating_projector(enr.group(x, y), n, "F")
                emb = enr.model(x, y).level_basis[n]
                mat = solve(alt_enr.alt(x, y).level_basis[n], proj * emb)
                if mat is None:
                    raise ValueError("sign average escapes the alternating part")
                comps[-n] = mat
            mor_maps[(x, y)] = make_chain_map(src.hom(x, y), tgt.hom(x, y), comps)
    return DGFunctor(src, tgt, {x: x for x in src.objects}, mor_maps)


# ---------------------------------------------------------------------------
# The tensor action of the host on its enrichment.


class TensorAction:
    """A (x) - for host objects A, acting on the enriched category.

    The integral enrichment has no full tensor structure (the cube factors
    of a doubly-enriched product come out in the wrong order), but tensoring
    with a plain degree-0 host morphism on the left is a DG functor.
    """

    def __init__(self, host, enr):
        if enr.host is not host:
            raise ValueError("the enrichment must come from the same host")
        self.host = host
        self.enr = enr

    def act_on(self, a, f):
        """a (x) f for a host degree-0 element a and an enriched element f."""
        if a.degree != 0:
            raise ValueError("the action takes degree-0 host elements")
        host, enr = self.host, self.enr
        C = host.category
        n = -f.degree
        basis = enr.model(f.source, f.target).level_basis[n]
        full = C.element(
            enr._level_object(f.source, n), f.target, 0, _apply(basis, f.vector)
        )
        res = host.mor_tensor(a, full)
        sx = host.obj_tensor(a.source, f.source)
        tx = host.obj_tensor(a.target, f.target)
        coords = solve(
            enr.model(sx, tx).level_basis[n],
            Matrix.column(C.ring, list(res.vector)),
        )
        if coords is None:
            raise ValueError("action escapes the reduced part")
        return enr.category.element(
            sx, tx, f.degree, tuple(coords.rows[r][0] for r in range(coords.nrows))
        )

    def functor(self, A):
        """The DG endofunctor A (x) -, with components assembled columnwise."""
        enr = self.enr
        ida = self.host.category.identity(A)
        obj_map = {x: self.host.obj_tensor(A, x) for x in enr.category.objects}
        mor_maps = {}
        for x in enr.category.objects:
            for y in enr.category.objects:
                src = enr.category.hom(x, y)
                tgt = enr.category.hom(obj_map[x], obj_map[y])
                comps = {}
                for deg in src.degrees():
                    cols = [
                        self.act_on(ida, f).vector for f in enr.category.basis(x, y, deg)
                    ]
                    if cols:
                        comps[deg] = _columns_to_matrix(src.ring, tgt.rank(deg), cols)
                    else:
                        comps[deg] = Matrix.zero(src.ring, tgt.rank(deg), 0)
                mor_maps[(x, y)] = make_chain_map(src, tgt, comps)
        return DGFunctor(enr.category, enr.category, obj_map, mor_maps)


def tensor_action(host, enr):
    return TensorAction(host, enr)
