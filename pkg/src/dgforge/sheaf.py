"""Finite sites, presheaves of complexes, and stalk-product resolutions.

A site here is a finite poset.  Opens are the up-closed subsets, the
minimal open around a point is its up-set, and the stalk of a presheaf is
its value on that minimal open.  Replacing a presheaf by the tower of
iterated stalk products gives a cosimplicial resolution whose total
complex computes hypercohomology; a front-face/back-face pairing makes
the construction weakly monoidal, and pushing a presheaf of DG categories
through it yields a global-sections DG category whose Hom complexes carry
that hypercohomology.  An alternating cover complex over the minimal
opens serves as the independent second route for every homology claim.

Two tower flavours are provided.  The full tower indexes level n by
weakly increasing chains of n+1 points; the reduced tower keeps only
strictly increasing chains, which kills every level beyond the poset
dimension and so needs no truncation bookkeeping.  Both produce the same
homology and the inclusion of the reduced tower into the full one is a
chain map, which the tests check on every fixture.
"""

import itertools
from dataclasses import dataclass

from .dgcat import DGCategory, DGFunctor
from .linalg import (
    ChainMap,
    Matrix,
    block_matrix,
    complex_homology,
    identity_chain_map,
    kernel,
    make_chain_map,
    make_complex,
    single_complex,
    solve,
    tensor_basis,
    tensor_chain_map,
    tensor_complex,
    zero_complex,
)


# ---------------------------------------------------------------------------
# Sites.


@dataclass(frozen=True)
class FiniteSite:
    """A finite poset presented by its reflexive-transitive order relation.

    The pair (x, y) lies in `order` exactly when every open containing x
    also contains y; opens are the up-closed subsets, canonically written
    as tuples in `points` order.
    """

    points: tuple
    order: frozenset

    def leq(self, x, y):
        return (x, y) in self.order

    def up(self, x):
        """The minimal open around x."""
        if x not in self.points:
            raise ValueError("unknown point %r" % (x,))
        return tuple(y for y in self.points if self.leq(x, y))

    def space(self):
        return tuple(self.points)

    def as_open(self, subset):
        sub = set(subset)
        unknown = sub - set(self.points)
        if unknown:
            raise ValueError("unknown points %r" % (sorted(unknown),))
        U = tuple(x for x in self.points if x in sub)
        for x in U:
            for y in self.points:
                if self.leq(x, y) and y not in sub:
                    raise ValueError(
                        "subset is not up-closed: contains %r but not %r" % (x, y)
                    )
        return U

    def is_open(self, subset):
        try:
            self.as_open(subset)
        except ValueError:
            return False
        return True

    def opens(self):
        """Every open, smallest first, ties broken by point order."""
        out = []
        pts = self.points
        for bits in itertools.product((0, 1), repeat=len(pts)):
            sub = tuple(x for x, b in zip(pts, bits) if b)
            if self.is_open(sub):
                out.append(sub)
        out.sort(key=lambda U: (len(U), tuple(self.points.index(x) for x in U)))
        return tuple(out)

    def meet(self, U, V):
        sub = set(U) & set(V)
        return tuple(x for x in self.points if x in sub)

    def dimension(self):
        """Length (in edges) of the longest strictly increasing chain."""
        best = 0
        for length in range(1, len(self.points) + 1):
            if self.strict_chains(length):
                best = length - 1
        return best

    def multichains(self, length, inside=None):
        """Weakly increasing point tuples of the given length starting in
        `inside` (default: anywhere), in lexicographic point order."""
        U = self.space() if inside is None else inside
        out = []

        def rec(prefix):
            if len(prefix) == length:
                out.append(tuple(prefix))
                return
            cand = U if not prefix else self.up(prefix[-1])
            for y in cand:
                rec(prefix + [y])

        if length > 0:
            rec([])
        return tuple(out)

    def strict_chains(self, length, inside=None):
        U = self.space() if inside is None else inside
        out = []

        def rec(prefix):
            if len(prefix) == length:
                out.append(tuple(prefix))
                return
            cand = U if not prefix else [y for y in self.up(prefix[-1]) if y != prefix[-1]]
            for y in cand:
                rec(prefix + [y])

        if length > 0:
            rec([])
        return tuple(out)

    def components(self, U):
        """Connected components of an open under comparability."""
        rest = list(U)
        comps = []
        while rest:
            block = {rest[0]}
            grew = True
            while grew:
                grew = False
                for x in rest:
                    if x in block:
                        continue
                    if any(self.leq(x, y) or self.leq(y, x) for y in block):
                        block.add(x)
                        grew = True
            comps.append(tuple(x for x in self.points if x in block))
            rest = [x for x in rest if x not in block]
        return tuple(comps)

    def __repr__(self):
        return "FiniteSite(%d points)" % len(self.points)


def make_site(points, below=()):
    """Build a site from generating pairs (x, y), each read as "every open
    containing x also contains y"."""
    points = tuple(points)
    if len(set(points)) != len(points):
        raise ValueError("duplicate points")
    rel = {(x, x) for x in points}
    for x, y in below:
        if x not in points or y not in points:
            raise ValueError("relation mentions unknown point in (%r, %r)" % (x, y))
        rel.add((x, y))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(tuple(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    for x, y in rel:
        if x != y and (y, x) in rel:
            raise ValueError("order relation has a cycle through %r and %r" % (x, y))
    return FiniteSite(points, frozenset(rel))


def point_site():
    return make_site(("pt",))


def sierpinski_site():
    """Two points: an open point above a closed one."""
    return make_site(("eta", "s"), (("s", "eta"),))


def pseudo_circle_site():
    """Four points, two closed below two open; the minimal finite circle."""
    return make_site(
        ("a", "b", "u", "v"),
        (("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")),
    )


def minimal_cover(site):
    """The minimal opens of all points, deduplicated in point order."""
    out = []
    for x in site.points:
        U = site.up(x)
        if U not in out:
            out.append(U)
    return tuple(out)


# ---------------------------------------------------------------------------
# Presheaves of chain complexes.


@dataclass
class Presheaf:
    """Per-open chain complexes with a restriction map for every inclusion."""

    site: FiniteSite
    vals: dict
    res: dict

    def value(self, U):
        return self.vals[self.site.as_open(U)]

    def restriction(self, U, V):
        return self.res[(self.site.as_open(U), self.site.as_open(V))]

    def stalk(self, x):
        return self.value(self.site.up(x))

    @property
    def ring(self):
        return self.vals[self.site.space()].ring

    def window(self):
        lo = min(C.lo for C in self.vals.values())
        hi = max(C.hi for C in self.vals.values())
        return lo, hi

    def __repr__(self):
        return "Presheaf(%r over %d opens)" % (self.ring, len(self.vals))


def make_presheaf(site, vals, res, check=True):
    """Normalize keys, fill in identity restrictions, and (by default)
    verify shapes, chain-map property and functoriality."""
    vals = {site.as_open(U): C for U, C in vals.items()}
    allopens = site.opens()
    for U in allopens:
        if U not in vals:
            raise ValueError("no value supplied for open %r" % (U,))
    full = {}
    for (U, V), f in res.items():
        full[(site.as_open(U), site.as_open(V))] = f
    for U in allopens:
        if (U, U) not in full:
            full[(U, U)] = identity_chain_map(vals[U])
    F = Presheaf(site, vals, full)
    if check:
        validate_presheaf(F)
    return F


def validate_presheaf(F):
    site = F.site
    allopens = site.opens()
    for U in allopens:
        for V in allopens:
            if set(V) <= set(U):
                if (U, V) not in F.res:
                    raise ValueError("missing restriction %r -> %r" % (U, V))
                f = F.res[(U, V)]
                make_chain_map(F.vals[U], F.vals[V], f.comps, check=True)
    for U in allopens:
        if F.res[(U, U)] != identity_chain_map(F.vals[U]):
            raise ValueError("restriction along %r -> itself is not the identity" % (U,))
    for U in allopens:
        for V in allopens:
            if not set(V) <= set(U):
                continue
            for W in allopens:
                if not set(W) <= set(V):
                    continue
                lhs = _compose_cm(F.res[(V, W)], F.res[(U, V)])
                if lhs != F.res[(U, W)]:
                    raise ValueError(
                        "restrictions fail to compose along %r -> %r -> %r" % (U, V, W)
                    )
    return True


def _compose_cm(g, f):
    degs = set(f.comps) | set(g.comps)
    return ChainMap(f.source, g.target, {n: g.comp(n) * f.comp(n) for n in degs})


def constant_presheaf(site, C):
    """Value C on every nonempty open, identity restrictions."""
    empty = zero_complex(C.ring, C.lo, C.hi)
    vals = {U: (C if U else empty) for U in site.opens()}
    res = {}
    for U in site.opens():
        for V in site.opens():
            if set(V) <= set(U):
                if V:
                    res[(U, V)] = identity_chain_map(C)
                else:
                    res[(U, V)] = ChainMap(vals[U], empty, {})
    return make_presheaf(site, vals, res, check=False)


def unit_presheaf(site, ring):
    return constant_presheaf(site, single_complex(ring, 0, 1))


def tensor_presheaf(F, G):
    if F.site is not G.site and F.site != G.site:
        raise ValueError("presheaves live on different sites")
    site = F.site
    vals = {U: tensor_complex(F.vals[U], G.vals[U]) for U in site.opens()}
    res = {}
    for (U, V) in F.res:
        res[(U, V)] = tensor_chain_map(
            F.res[(U, V)], G.res[(U, V)], source=vals[U], target=vals[V]
        )
    return make_presheaf(site, vals, res, check=False)


@dataclass
class PresheafMap:
    """A degree-0 map of presheaves: one chain map per open, commuting
    with restrictions."""

    source: Presheaf
    target: Presheaf
    comps: dict

    def at(self, U):
        return self.comps[self.source.site.as_open(U)]


def make_presheaf_map(source, target, comps, check=True):
    site = source.site
    comps = {site.as_open(U): f for U, f in comps.items()}
    phi = PresheafMap(source, target, comps)
    if check:
        for U in site.opens():
            if U not in comps:
                raise ValueError("missing component at open %r" % (U,))
            make_chain_map(source.vals[U], target.vals[U], comps[U].comps, check=True)
        for (U, V) in source.res:
            lhs = _compose_cm(comps[V], source.res[(U, V)])
            rhs = _compose_cm(target.res[(U, V)], comps[U])
            if lhs != rhs:
                raise ValueError(
                    "map fails to commute with restriction %r -> %r" % (U, V)
                )
    return phi


def tensor_assoc_map(A, B, C):
    """The canonical regrouping (A (x) B) (x) C -> A (x) (B (x) C); a
    permutation of the tensor bases, checked to be a chain map."""
    AB = tensor_complex(A, B)
    BC = tensor_complex(B, C)
    src = tensor_complex(AB, C)
    tgt = tensor_complex(A, BC)
    comps = {}
    for n in src.degrees():
        sbasis = tensor_basis(AB, C, n)
        tbasis = tensor_basis(A, BC, n)
        if not sbasis or not tbasis:
            continue
        tpos = {key: idx for idx, key in enumerate(tbasis)}
        ab = {t: tensor_basis(A, B, t) for t in AB.degrees()}
        bc = {m: {key: idx for idx, key in enumerate(tensor_basis(B, C, m))}
              for m in BC.degrees()}
        rows = [[0] * len(sbasis) for _ in tbasis]
        for cidx, (t, ij, k) in enumerate(sbasis):
            a, i, j = ab[t][ij]
            jk = bc[n - a][(t - a, j, k)]
            rows[tpos[(a, i, jk)]][cidx] = 1
        comps[n] = Matrix(src.ring, rows, nrows=len(tbasis), ncols=len(sbasis))
    return make_chain_map(src, tgt, comps, check=True)


def tensor_presheaf_assoc(F, G, H):
    src = tensor_presheaf(tensor_presheaf(F, G), H)
    tgt = tensor_presheaf(F, tensor_presheaf(G, H))
    comps = {
        U: tensor_assoc_map(F.vals[U], G.vals[U], H.vals[U]) for U in F.site.opens()
    }
    return make_presheaf_map(src, tgt, comps, check=True)


# ---------------------------------------------------------------------------
# Sheafification by exact limits over points.


def sheafify(F):
    """The associated sheaf: value on U is the limit of the stalks over
    the points of U, computed as an exact kernel; restrictions project.

    The result only depends on the stalks of F, and its own stalks agree
    with those of F, so applying it twice changes nothing.
    """
    site = F.site
    ring = F.ring
    lo, hi = F.window()
    kbases = {}
    vals = {}
    for U in site.opens():
        if not U:
            vals[U] = zero_complex(ring, lo, hi)
            continue
        stalks = [F.stalk(x) for x in U]
        pairs = [
            (xi, yi)
            for xi, x in enumerate(U)
            for yi, y in enumerate(U)
            if x != y and site.leq(x, y)
        ]
        ks = {}
        for n in range(lo, hi + 1):
            cols = sum(S.rank(n) for S in stalks)
            if not pairs:
                ks[n] = Matrix.identity(ring, cols)
                continue
            blocks = []
            for xi, yi in pairs:
                x, y = U[xi], U[yi]
                row = []
                rmat = F.restriction(site.up(x), site.up(y)).comp(n)
                for zi, S in enumerate(stalks):
                    if zi == yi:
                        row.append(Matrix.identity(ring, S.rank(n)))
                    elif zi == xi:
                        row.append(rmat.scale(-1))
                    else:
                        row.append(Matrix.zero(ring, stalks[yi].rank(n), S.rank(n)))
                blocks.append(row)
            ks[n] = kernel(block_matrix(ring, blocks))
        diffs = []
        for n in range(lo, hi):
            dP = block_matrix(
                ring,
                [
                    [
                        S.d(n) if si == sj else Matrix.zero(ring, stalks[si].rank(n + 1), S.rank(n))
                        for sj, S in enumerate(stalks)
                    ]
                    for si, _ in enumerate(stalks)
                ],
            )
            dk = solve(ks[n + 1], dP * ks[n])
            if dk is None:
                raise AssertionError("stalk differential does not preserve the limit")
            diffs.append(dk)
        vals[U] = make_complex(ring, lo, [ks[n].ncols for n in range(lo, hi + 1)], diffs)
        kbases[U] = ks
    res = {}
    for U in site.opens():
        for V in site.opens():
            if not set(V) <= set(U):
                continue
            if not V:
                res[(U, V)] = ChainMap(vals[U], vals[V], {})
                continue
            comps = {}
            for n in range(lo, hi + 1):
                proj = _stalk_projection(F, U, V, n)
                mat = solve(kbases[V][n], proj * kbases[U][n])
                if mat is None:
                    raise AssertionError("limit projection left the limit")
                comps[n] = mat
            res[(U, V)] = ChainMap(vals[U], vals[V], comps)
    return make_presheaf(site, vals, res, check=False)


def _stalk_projection(F, U, V, n):
    ring = F.ring
    rows = []
    for y in V:
        row = []
        for x in U:
            ry = F.stalk(y).rank(n)
            rx = F.stalk(x).rank(n)
            row.append(Matrix.identity(ring, ry) if x == y else Matrix.zero(ring, ry, rx))
        rows.append(row)
    return block_matrix(ring, rows)


def sheafification_map(F, aF=None):
    """The canonical comparison of F with its associated sheaf."""
    site = F.site
    if aF is None:
        aF = sheafify(F)
    lo, hi = F.window()
    comps = {}
    for U in site.opens():
        if not U:
            comps[U] = ChainMap(F.vals[U], aF.vals[U], {})
            continue
        cmap = {}
        for n in range(lo, hi + 1):
            stacked = None
            for x in U:
                blockm = F.restriction(U, site.up(x)).comp(n)
                stacked = blockm if stacked is None else stacked.vstack(blockm)
            kb = _sheaf_kernel_basis(F, aF, U, n)
            mat = solve(kb, stacked)
            if mat is None:
                raise AssertionError("restrictions do not land in the limit")
            cmap[n] = mat
        comps[U] = ChainMap(F.vals[U], aF.vals[U], cmap)
    return make_presheaf_map(F, aF, comps, check=True)


def _sheaf_kernel_basis(F, aF, U, n):
    # recover the kernel inclusion from the sheafified restriction data:
    # project to each stalk (= restriction to the minimal opens) and stack
    site = F.site
    stacked = None
    for x in U:
        blockm = aF.restriction(U, site.up(x)).comp(n)
        stacked = blockm if stacked is None else stacked.vstack(blockm)
    return stacked


# ---------------------------------------------------------------------------
# The stalk-product tower.


class GodementTower:
    """Level p assigns to U the product of stalks over chains of p+1
    points starting in U; with `strict=True` only strictly increasing
    chains are kept (the reduced tower)."""

    def __init__(self, source, depth, strict=False):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.source = source
        self.site = source.site
        self.depth = depth
        self.strict = strict
        self.lo, self.hi = source.window()
        self._chains = {}
        self._chain_pos = {}
        self._level_cx = {}
        self._offsets = {}
        self._totals = {}
        self._level_sheaves = {}

    # -- chain bookkeeping

    def chains(self, p, U):
        U = self.site.as_open(U)
        key = (p, U)
        if key not in self._chains:
            if self.strict:
                self._chains[key] = self.site.strict_chains(p + 1, inside=U)
            else:
                self._chains[key] = self.site.multichains(p + 1, inside=U)
        return self._chains[key]

    def chain_pos(self, p, U):
        U = self.site.as_open(U)
        key = (p, U)
        if key not in self._chain_pos:
            self._chain_pos[key] = {c: i for i, c in enumerate(self.chains(p, U))}
        return self._chain_pos[key]

    def chain_value(self, c):
        return self.source.stalk(c[-1])

    def level_complex(self, p, U):
        U = self.site.as_open(U)
        key = (p, U)
        if key not in self._level_cx:
            ring = self.source.ring
            stalks = [self.chain_value(c) for c in self.chains(p, U)]
            ranks = [sum(S.rank(n) for S in stalks) for n in range(self.lo, self.hi + 1)]
            diffs = []
            for n in range(self.lo, self.hi):
                diffs.append(
                    block_matrix(
                        ring,
                        [
                            [
                                S.d(n)
                                if si == sj
                                else Matrix.zero(ring, stalks[si].rank(n + 1), S.rank(n))
                                for sj, S in enumerate(stalks)
                            ]
                            for si, _ in enumerate(stalks)
                        ],
                    )
                    if stalks
                    else Matrix.zero(ring, 0, 0)
                )
            self._level_cx[key] = make_complex(ring, self.lo, ranks, diffs, check=False)
        return self._level_cx[key]

    def offsets(self, p, U, n):
        """Starting column of each chain block inside level p at internal
        degree n."""
        U = self.site.as_open(U)
        key = (p, U, n)
        if key not in self._offsets:
            out = []
            pos = 0
            for c in self.chains(p, U):
                out.append(pos)
                pos += self.chain_value(c).rank(n)
            self._offsets[key] = tuple(out)
        return self._offsets[key]

    def level(self, p):
        """Level p as an honest presheaf (restriction = chain projection)."""
        if p not in self._level_sheaves:
            site = self.site
            vals = {U: self.level_complex(p, U) for U in site.opens()}
            res = {}
            for U in site.opens():
                for V in site.opens():
                    if set(V) <= set(U):
                        res[(U, V)] = self._chain_projection(p, U, V)
            self._level_sheaves[p] = make_presheaf(site, vals, res, check=False)
        return self._level_sheaves[p]

    def _chain_projection(self, p, U, V):
        src = self.level_complex(p, U)
        tgt = self.level_complex(p, V)
        big = self.chains(p, U)
        small = self.chains(p, V)
        comps = {}
        for n in range(self.lo, self.hi + 1):
            rows = []
            offs = self.offsets(p, U, n)
            for c in small:
                ci = big.index(c)
                r = self.chain_value(c).rank(n)
                start = offs[ci]
                for k in range(r):
                    rows.append(
                        tuple(
                            1 if col == start + k else 0 for col in range(src.rank(n))
                        )
                    )
            comps[n] = Matrix(src.ring, rows, nrows=tgt.rank(n), ncols=src.rank(n))
        return ChainMap(src, tgt, comps)

    # -- the cosimplicial structure (full tower only)

    def cosimplicial_matrix(self, p, q, f, U, n):
        """Matrix at internal degree n of the structure map from level p
        to level q induced by the monotone map f: [p] -> [q]."""
        if self.strict:
            raise ValueError("the reduced tower is not cosimplicial")
        f = tuple(f)
        if len(f) != p + 1 or any(f[i] > f[i + 1] for i in range(p)) or f[-1] > q or f[0] < 0:
            raise ValueError("not a monotone map [%d] -> [%d]: %r" % (p, q, f))
        U = self.site.as_open(U)
        src = self.level_complex(p, U)
        tgt = self.level_complex(q, U)
        soffs = self.offsets(p, U, n)
        toffs = self.offsets(q, U, n)
        spos = {c: i for i, c in enumerate(self.chains(p, U))}
        entries = [[0] * src.rank(n) for _ in range(tgt.rank(n))]
        for ti, C in enumerate(self.chains(q, U)):
            pullback = tuple(C[f[i]] for i in range(p + 1))
            si = spos[pullback]
            rmat = self.source.restriction(
                self.site.up(pullback[-1]), self.site.up(C[-1])
            ).comp(n)
            for r in range(rmat.nrows):
                for cidx in range(rmat.ncols):
                    v = rmat.rows[r][cidx]
                    if v:
                        entries[toffs[ti] + r][soffs[si] + cidx] += v
        return Matrix(src.ring, entries, nrows=tgt.rank(n), ncols=src.rank(n))

    def coface_matrix(self, p, j, U, n):
        f = tuple(i if i < j else i + 1 for i in range(p + 1))
        return self.cosimplicial_matrix(p, p + 1, f, U, n)

    def codegeneracy_matrix(self, p, j, U, n):
        f = tuple(i if i <= j else i - 1 for i in range(p + 2))
        return self.cosimplicial_matrix(p + 1, p, f, U, n)

    def delta_matrix(self, p, U, n):
        """Alternating sum of the faces, level p -> p+1, assembled
        directly from the chain combinatorics (works for both flavours)."""
        U = self.site.as_open(U)
        src = self.level_complex(p, U)
        tgt = self.level_complex(p + 1, U)
        soffs = self.offsets(p, U, n)
        toffs = self.offsets(p + 1, U, n)
        spos = {c: i for i, c in enumerate(self.chains(p, U))}
        entries = [[0] * src.rank(n) for _ in range(tgt.rank(n))]
        for ti, C in enumerate(self.chains(p + 1, U)):
            for j in range(p + 2):
                face = C[:j] + C[j + 1 :]
                sgn = -1 if j % 2 else 1
                si = spos[face]
                if j == p + 1:
                    rmat = self.source.restriction(
                        self.site.up(face[-1]), self.site.up(C[-1])
                    ).comp(n)
                else:
                    rmat = Matrix.identity(src.ring, self.chain_value(face).rank(n))
                for r in range(rmat.nrows):
                    for cidx in range(rmat.ncols):
                        v = rmat.rows[r][cidx]
                        if v:
                            entries[toffs[ti] + r][soffs[si] + cidx] += sgn * v
        return Matrix(src.ring, entries, nrows=tgt.rank(n), ncols=src.rank(n))

    # -- totalization

    def total(self, U):
        """The total complex at U: cosimplicial direction plus (-1)^level
        times the coefficient differential."""
        U = self.site.as_open(U)
        if U not in self._totals:
            ring = self.source.ring
            lo = self.lo
            hi = self.hi + self.depth
            ranks = []
            for n in range(lo, hi + 1):
                ranks.append(
                    sum(
                        self.level_complex(p, U).rank(n - p)
                        for p in range(0, self.depth + 1)
                    )
                )
            diffs = []
            for n in range(lo, hi):
                rows = ranks[n + 1 - lo]
                cols = ranks[n - lo]
                entries = [[0] * cols for _ in range(rows)]
                coff = 0
                for p in range(0, self.depth + 1):
                    q = n - p
                    Lp = self.level_complex(p, U)
                    w = Lp.rank(q)
                    if w:
                        # vertical part: (-1)^p d on the coefficients
                        roff = self._total_offset(U, n + 1, p)
                        sgn = -1 if p % 2 else 1
                        dmat = Lp.d(q)
                        for r in range(dmat.nrows):
                            for c in range(dmat.ncols):
                                v = dmat.rows[r][c]
                                if v:
                                    entries[roff + r][coff + c] += sgn * v
                        # cosimplicial part
                        if p + 1 <= self.depth:
                            roff = self._total_offset(U, n + 1, p + 1)
                            dl = self.delta_matrix(p, U, q)
                            for r in range(dl.nrows):
                                for c in range(dl.ncols):
                                    v = dl.rows[r][c]
                                    if v:
                                        entries[roff + r][coff + c] += v
                    coff += w
                diffs.append(Matrix(ring, entries, nrows=rows, ncols=cols))
            self._totals[U] = make_complex(ring, lo, ranks, diffs)
        return self._totals[U]

    def _total_offset(self, U, n, p):
        return sum(
            self.level_complex(pp, U).rank(n - pp) for pp in range(0, p)
        )

    def layout(self, U, n):
        """Flat coordinate decoding for total degree n at U: one tuple
        (level, internal degree, chain index, local index) per column."""
        U = self.site.as_open(U)
        out = []
        for p in range(0, self.depth + 1):
            q = n - p
            for ci, c in enumerate(self.chains(p, U)):
                for k in range(self.chain_value(c).rank(q)):
                    out.append((p, q, ci, k))
        return out

    def block_start(self, U, n, p, ci):
        U = self.site.as_open(U)
        return self._total_offset(U, n, p) + self.offsets(p, U, n - p)[ci]

    def augmentation(self, U):
        """The restriction-to-stalks inclusion of F(U) into total degree
        zero of the tower."""
        U = self.site.as_open(U)
        src = self.source.vals[U]
        tgt = self.total(U)
        comps = {}
        for n in range(self.lo, self.hi + 1):
            stacked = None
            for x in U:
                blockm = self.source.restriction(U, self.site.up(x)).comp(n)
                stacked = blockm if stacked is None else stacked.vstack(blockm)
            if stacked is None:
                stacked = Matrix.zero(src.ring, 0, src.rank(n))
            pad = Matrix.zero(src.ring, tgt.rank(n) - stacked.nrows, stacked.ncols)
            comps[n] = stacked.vstack(pad)
        return make_chain_map(src, tgt, comps, check=True)

    def stable_upto(self):
        """Largest total degree whose homology is unaffected by the depth
        cut; None means every degree (the reduced tower at full depth)."""
        if self.strict and self.depth >= self.site.dimension():
            return None
        return self.lo + self.depth - 1

    def __repr__(self):
        kind = "reduced" if self.strict else "full"
        return "GodementTower(%s, depth=%d)" % (kind, self.depth)


def reduced_inclusion(Tred, Tfull, U):
    """The placement of the reduced tower inside the full one: each
    strictly increasing chain sits among the weakly increasing ones."""
    if not Tred.strict or Tfull.strict:
        raise ValueError("expected a reduced tower and a full tower, in that order")
    if Tfull.depth < Tred.depth:
        raise ValueError("the full tower is too shallow to receive the inclusion")
    site = Tred.site
    U = site.as_open(U)
    src = Tred.total(U)
    tgt = Tfull.total(U)
    ring = src.ring
    comps = {}
    for n in range(Tred.lo, Tred.hi + Tred.depth + 1):
        entries = [[0] * src.rank(n) for _ in range(tgt.rank(n))]
        for p in range(0, Tred.depth + 1):
            full_chains = Tfull.chains(p, U)
            for ci, c in enumerate(Tred.chains(p, U)):
                r = Tred.chain_value(c).rank(n - p)
                if not r:
                    continue
                roff = Tfull.block_start(U, n, p, full_chains.index(c))
                coff = Tred.block_start(U, n, p, ci)
                for k in range(r):
                    entries[roff + k][coff + k] = 1
        comps[n] = Matrix(ring, entries, nrows=tgt.rank(n), ncols=src.rank(n))
    return make_chain_map(src, tgt, comps, check=True)


def default_depth(site, window_len, strict=False):
    if strict:
        return site.dimension()
    return site.dimension() + window_len + 1


def godement_tower(F, depth=None, strict=False):
    lo, hi = F.window()
    if depth is None:
        depth = default_depth(F.site, hi - lo, strict)
    return GodementTower(F, depth, strict=strict)


def total_godement(F, depth=None, strict=False):
    """The tower's total complexes bundled as a presheaf."""
    T = godement_tower(F, depth, strict=strict)
    site = F.site
    vals = {U: T.total(U) for U in site.opens()}
    res = {}
    for U in site.opens():
        for V in site.opens():
            if not set(V) <= set(U):
                continue
            comps = {}
            for n in range(T.lo, T.hi + T.depth + 1):
                rows = []
                for (p, q, ci, k) in T.layout(V, n):
                    c = T.chains(p, V)[ci]
                    bigci = T.chain_pos(p, U)[c]
                    col = T.block_start(U, n, p, bigci) + k
                    rows.append(
                        tuple(1 if cc == col else 0 for cc in range(vals[U].rank(n)))
                    )
                comps[n] = Matrix(
                    F.ring, rows, nrows=vals[V].rank(n), ncols=vals[U].rank(n)
                )
            res[(U, V)] = ChainMap(vals[U], vals[V], comps)
    return make_presheaf(site, vals, res, check=False)


def godement_augmentation(F, depth=None, strict=False):
    """The augmentation as a map of presheaves into the total."""
    T = godement_tower(F, depth, strict=strict)
    total = total_godement(F, T.depth, strict=strict)
    comps = {U: make_chain_map(F.vals[U], total.vals[U], T.augmentation(U).comps, check=False)
             for U in F.site.opens()}
    return make_presheaf_map(F, total, comps, check=True)


def tower_map_at(phi, Tsrc, Ttgt, U):
    """Apply a presheaf map levelwise through two towers of equal shape."""
    if Tsrc.depth != Ttgt.depth or Tsrc.strict != Ttgt.strict:
        raise ValueError("depth mismatch")
    U = Tsrc.site.as_open(U)
    src = Tsrc.total(U)
    tgt = Ttgt.total(U)
    ring = src.ring
    comps = {}
    for n in range(min(Tsrc.lo, Ttgt.lo), max(Tsrc.hi + Tsrc.depth, Ttgt.hi + Ttgt.depth) + 1):
        entries = [[0] * src.rank(n) for _ in range(tgt.rank(n))]
        for p in range(0, Tsrc.depth + 1):
            q = n - p
            for ci, c in enumerate(Tsrc.chains(p, U)):
                mat = phi.at(Tsrc.site.up(c[-1])).comp(q)
                if mat.nrows == 0 or mat.ncols == 0:
                    continue
                roff = Ttgt.block_start(U, n, p, ci)
                coff = Tsrc.block_start(U, n, p, ci)
                for r in range(mat.nrows):
                    for cc in range(mat.ncols):
                        v = mat.rows[r][cc]
                        if v:
                            entries[roff + r][coff + cc] += v
        comps[n] = Matrix(ring, entries, nrows=tgt.rank(n), ncols=src.rank(n))
    return make_chain_map(src, tgt, comps, check=True)


# ---------------------------------------------------------------------------
# The cover complex over the minimal opens: the second route.


def cech_total(F, cover=None):
    """Alternating cover complex of a presheaf of complexes, totalized
    with the same sign convention as the tower.

    The values of F are used as given; feed it a sheaf (for instance the
    output of `sheafify`) when the answer should be a cohomology group of
    the space.
    """
    site = F.site
    if cover is None:
        cover = minimal_cover(site)
    cover = tuple(site.as_open(V) for V in cover)
    covered = set().union(*[set(V) for V in cover]) if cover else set()
    if covered != set(site.points):
        raise ValueError("cover misses points %r" % (sorted(set(site.points) - covered),))
    ring = F.ring
    lo, hi = F.window()
    k = len(cover)
    blocks = {}
    for p in range(0, k):
        for idx in itertools.combinations(range(k), p + 1):
            V = cover[idx[0]]
            for i in idx[1:]:
                V = site.meet(V, cover[i])
            blocks.setdefault(p, []).append((idx, V))
    depth = max(blocks) if blocks else 0
    ranks = []
    for n in range(lo, hi + depth + 1):
        ranks.append(
            sum(
                F.vals[V].rank(n - p)
                for p in blocks
                for (_, V) in blocks[p]
            )
        )

    def offset(n, p, which):
        off = 0
        for pp in sorted(blocks):
            for bi, (_, V) in enumerate(blocks[pp]):
                if pp == p and bi == which:
                    return off
                off += F.vals[V].rank(n - pp)
        raise AssertionError("block not found")

    diffs = []
    for n in range(lo, hi + depth):
        rows = ranks[n + 1 - lo]
        cols = ranks[n - lo]
        entries = [[0] * cols for _ in range(rows)]
        for p in sorted(blocks):
            for bi, (idx, V) in enumerate(blocks[p]):
                q = n - p
                w = F.vals[V].rank(q)
                if not w:
                    continue
                coff = offset(n, p, bi)
                # vertical: (-1)^p times the coefficient differential
                sgn = -1 if p % 2 else 1
                dmat = F.vals[V].d(q)
                roff = offset(n + 1, p, bi)
                for r in range(dmat.nrows):
                    for c in range(dmat.ncols):
                        v = dmat.rows[r][c]
                        if v:
                            entries[roff + r][coff + c] += sgn * v
                # horizontal: alternating insertion of a cover index
                if p + 1 in blocks:
                    for ti, (tidx, W) in enumerate(blocks[p + 1]):
                        for j in range(p + 2):
                            if tidx[:j] + tidx[j + 1 :] == idx:
                                rmat = F.restriction(V, W).comp(q)
                                fsgn = -1 if j % 2 else 1
                                roff = offset(n + 1, p + 1, ti)
                                for r in range(rmat.nrows):
                                    for c in range(rmat.ncols):
                                        v = rmat.rows[r][c]
                                        if v:
                                            entries[roff + r][coff + c] += fsgn * v
        diffs.append(Matrix(ring, entries, nrows=rows, ncols=cols))
    return make_complex(ring, lo, ranks, diffs)


def cech_hypercohomology(F, n, cover=None):
    """Homology of the cover complex of the associated sheaf."""
    return complex_homology(cech_total(sheafify(F), cover), n)


# ---------------------------------------------------------------------------
# The front-face/back-face pairing.


class AWPairing:
    """The weakly monoidal structure of the tower: a chain pairing

        total(F) (x) total(G) -> total(F (x) G)

    placing the first factor on the front face of a chain and the second
    on the back face, with the Koszul sign (-1)^(q*b) for an internal
    degree q front block meeting a level b back block."""

    def __init__(self, left, right, product):
        if not (left.depth == right.depth == product.depth):
            raise ValueError("depth mismatch")
        if not (left.strict == right.strict == product.strict):
            raise ValueError("the towers mix the two flavours")
        self.left = left
        self.right = right
        self.product = product
        self._pairings = {}
        self._positions = {}

    def _stalk_positions(self, UL, n):
        key = (UL, n)
        if key not in self._positions:
            self._positions[key] = _tensor_positions(
                self.left.source.vals[UL], self.right.source.vals[UL], n
            )
        return self._positions[key]

    def pairing(self, U):
        site = self.left.site
        U = site.as_open(U)
        if U in self._pairings:
            return self._pairings[U]
        TF, TG, TP = self.left, self.right, self.product
        totF = TF.total(U)
        totG = TG.total(U)
        src = tensor_complex(totF, totG)
        tgt = TP.total(U)
        ring = src.ring
        comps = {}
        for n in src.degrees():
            basis = tensor_basis(totF, totG, n)
            entries = [[0] * len(basis) for _ in range(tgt.rank(n))]
            if basis and tgt.rank(n):
                layoutF = {t: TF.layout(U, t) for t in totF.degrees()}
                layoutG = {t: TG.layout(U, t) for t in totG.degrees()}
                for col, (t, i, j) in enumerate(basis):
                    p, q, ci, u = layoutF[t][i]
                    b, s, cj, v = layoutG[n - t][j]
                    if p + b > TP.depth:
                        continue
                    c = TF.chains(p, U)[ci]
                    cprime = TG.chains(b, U)[cj]
                    if c[-1] != cprime[0]:
                        continue
                    glued = c + cprime[1:]
                    gi = TP.chain_pos(p + b, U)[glued]
                    UL = site.up(glued[-1])
                    rmat = TF.source.restriction(site.up(c[-1]), UL).comp(q)
                    pos = self._stalk_positions(UL, q + s)
                    roff = TP.block_start(U, n, p + b, gi)
                    sgn = -1 if (q * b) % 2 else 1
                    for r in range(rmat.nrows):
                        w = rmat.rows[r][u]
                        if w:
                            entries[roff + pos[(q, r, v)]][col] += sgn * w
            comps[n] = Matrix(ring, entries, nrows=tgt.rank(n), ncols=len(basis))
        out = make_chain_map(src, tgt, comps, check=True)
        self._pairings[U] = out
        return out


def _tensor_positions(A, B, n):
    return {key: idx for idx, key in enumerate(tensor_basis(A, B, n))}


def aw_cup(F, G, depth=None, strict=False):
    """Build matching towers for F, G and F (x) G and return the pairing."""
    loF, hiF = F.window()
    loG, hiG = G.window()
    if depth is None:
        depth = default_depth(F.site, (hiF - loF) + (hiG - loG), strict)
    TF = godement_tower(F, depth, strict=strict)
    TG = godement_tower(G, depth, strict=strict)
    TP = godement_tower(tensor_presheaf(F, G), depth, strict=strict)
    return AWPairing(TF, TG, TP)


# ---------------------------------------------------------------------------
# Presheaves of DG categories and their global-sections category.


@dataclass
class CategoryPresheaf:
    """A DG category per nonempty open with a restriction functor per
    inclusion."""

    site: FiniteSite
    cats: dict
    res: dict

    def category(self, U):
        return self.cats[self.site.as_open(U)]

    def functor(self, U, V):
        return self.res[(self.site.as_open(U), self.site.as_open(V))]

    def restrict_object(self, X, U):
        return self.functor(self.site.space(), U).obj_map[X]


def constant_category_presheaf(site, C):
    nonempty = [U for U in site.opens() if U]
    obj_map = {x: x for x in C.objects}
    cats = {U: C for U in nonempty}
    res = {}
    for U in nonempty:
        for V in nonempty:
            if set(V) <= set(U):
                mor_maps = {
                    (x, y): identity_chain_map(C.hom(x, y))
                    for x in C.objects
                    for y in C.objects
                }
                res[(U, V)] = DGFunctor(C, C, dict(obj_map), mor_maps)
    return CategoryPresheaf(site, cats, res)


def hom_presheaf(CP, X, Y):
    """The per-open Hom complexes of a pair of global objects."""
    site = CP.site
    S = site.space()
    ring = CP.category(S).ring
    vals = {}
    win = None
    for U in site.opens():
        if not U:
            continue
        XU = CP.restrict_object(X, U)
        YU = CP.restrict_object(Y, U)
        cx = CP.category(U).hom(XU, YU)
        vals[U] = cx
        win = (cx.lo, cx.hi) if win is None else (min(win[0], cx.lo), max(win[1], cx.hi))
    vals[()] = zero_complex(ring, win[0], win[1])
    res = {}
    for U in site.opens():
        for V in site.opens():
            if not set(V) <= set(U):
                continue
            if not V:
                res[(U, V)] = ChainMap(vals[U], vals[()], {})
            else:
                XU = CP.restrict_object(X, U)
                YU = CP.restrict_object(Y, U)
                res[(U, V)] = CP.functor(U, V).mor_maps[(XU, YU)]
    return make_presheaf(site, vals, res, check=True)


def composition_presheaf_map(CP, X, Y, Z):
    """Per-open composition, bundled as a presheaf map from the tensor of
    Hom presheaves; building it checks the Leibniz rule open by open."""
    site = CP.site
    HYZ = hom_presheaf(CP, Y, Z)
    HXY = hom_presheaf(CP, X, Y)
    HXZ = hom_presheaf(CP, X, Z)
    src = tensor_presheaf(HYZ, HXY)
    comps = {}
    for U in site.opens():
        if not U:
            comps[U] = ChainMap(src.vals[U], HXZ.vals[U], {})
            continue
        cat = CP.category(U)
        XU, YU, ZU = (CP.restrict_object(W, U) for W in (X, Y, Z))
        cmap = {}
        for n in src.vals[U].degrees():
            pieces = []
            for p in HYZ.vals[U].degrees():
                q = n - p
                if HYZ.vals[U].rank(p) and HXY.vals[U].rank(q):
                    pieces.append(cat.comp_matrix(XU, YU, ZU, p, q))
            if pieces:
                mat = pieces[0]
                for m in pieces[1:]:
                    mat = mat.hstack(m)
                cmap[n] = mat
        comps[U] = make_chain_map(src.vals[U], HXZ.vals[U], cmap, check=True)
    return make_presheaf_map(src, HXZ, comps, check=True)


class _RGammaData:
    def __init__(self, CP, depth, strict):
        self.CP = CP
        self.site = CP.site
        self.S = CP.site.space()
        self.strict = strict
        C = CP.category(self.S)
        self.base = C
        if depth is None:
            span = 0
            for x in C.objects:
                for y in C.objects:
                    H = hom_presheaf(CP, x, y)
                    lo, hi = H.window()
                    span = max(span, hi - lo)
            depth = default_depth(CP.site, span, strict)
        self.depth = depth
        self._homs = {}
        self._towers = {}
        self._bigcomp = {}

    def tower(self, X, Y):
        key = (X, Y)
        if key not in self._towers:
            H = hom_presheaf(self.CP, X, Y)
            self._homs[key] = H
            self._towers[key] = GodementTower(H, self.depth, strict=self.strict)
        return self._towers[key]

    def hom_fn(self, X, Y):
        return self.tower(X, Y).total(self.S)

    def big_comp(self, x, y, z):
        key = (x, y, z)
        if key not in self._bigcomp:
            TYZ = self.tower(y, z)
            TXY = self.tower(x, y)
            TXZ = self.tower(x, z)
            cpm = composition_presheaf_map(self.CP, x, y, z)
            TP = GodementTower(cpm.source, self.depth, strict=self.strict)
            pairing = AWPairing(TYZ, TXY, TP).pairing(self.S)
            push = tower_map_at(cpm, TP, TXZ, self.S)
            self._bigcomp[key] = _compose_cm(push, pairing)
        return self._bigcomp[key]

    def comp_fn(self, x, y, z, p, q):
        n = p + q
        B = self.big_comp(x, y, z).comp(n)
        totYZ = self.hom_fn(y, z)
        totXY = self.hom_fn(x, y)
        off = 0
        for t in totYZ.degrees():
            if t == p:
                break
            off += totYZ.rank(t) * totXY.rank(n - t)
        w = totYZ.rank(p) * totXY.rank(q)
        rows = [list(B.rows[r][off : off + w]) for r in range(B.nrows)]
        return Matrix(B.ring, rows, nrows=B.nrows, ncols=w)

    def id_fn(self, X):
        T = self.tower(X, X)
        aug = T.augmentation(self.S)
        vec = aug.comp(0) * Matrix.column(
            self.base.ring, list(self.base.identity(X).vector)
        )
        return tuple(vec.rows[r][0] for r in range(vec.nrows))


def rgamma(CP, depth=None, strict=True):
    """The global-sections DG category of a presheaf of DG categories:
    same objects as over the whole space, Hom complexes the totals of the
    stalk-product towers of the Hom presheaves, composition through the
    front-face/back-face pairing.

    The reduced tower is the default: its levels vanish beyond the poset
    dimension, so no degree needs a truncation flag.
    """
    data = _RGammaData(CP, depth, strict)
    C = data.base
    return DGCategory(
        C.ring,
        C.objects,
        data.hom_fn,
        comp_fn=data.comp_fn,
        id_fn=data.id_fn,
        name="rgamma(%s)" % (C.name or C.ring),
    )


def augmentation_functor(CP, R, depth=None, strict=True):
    """The global-sections embedding of the base category into rgamma."""
    data = _RGammaData(CP, depth, strict)
    C = data.base
    mor_maps = {}
    for x in C.objects:
        for y in C.objects:
            T = data.tower(x, y)
            mor_maps[(x, y)] = make_chain_map(
                C.hom(x, y), R.hom(x, y), T.augmentation(data.S).comps, check=True
            )
    return DGFunctor(C, R, {x: x for x in C.objects}, mor_maps)


@dataclass(frozen=True)
class CompareReport:
    degree: int
    via_tower: str
    via_cover: str
    stable: bool

    @property
    def ok(self):
        return self.stable and self.via_tower == self.via_cover


def hypercohomology_compare(CP, X, Y, n, depth=None, strict=True):
    """Homology of the global Hom total against the cover complex of the
    sheafified Hom presheaf: two routes to the same group."""
    H = hom_presheaf(CP, X, Y)
    T = godement_tower(H, depth, strict=strict)
    g = complex_homology(T.total(CP.site.space()), n)
    c = cech_hypercohomology(H, n)
    cut = T.stable_upto()
    stable = cut is None or n <= cut
    return CompareReport(n, g.describe(), c.describe(), stable)
