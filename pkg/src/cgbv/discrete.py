"""Exact-arithmetic mapping-cone cohomology on small simplicial meshes.

Everything runs over rationals: ranks, kernels, and induced maps are
computed by fraction-pivot elimination, so Betti-level duality statements
are integer equalities rather than tolerance checks.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (ChainMapError, ComplexError, ConsistencyError,
                     SurjectivityError)

ZERO = Fraction(0)
ONE = Fraction(1)


def _to_fraction_matrix(rows):
    return [[Fraction(v) for v in row] for row in rows]


def _mat_mul(A, B):
    if not A or not B:
        return []
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        for j in range(k):
            a = A[i][j]
            if a:
                for c in range(m):
                    out[i][c] += a * B[j][c]
    return out


def _rref(rows):
    """Row echelon over Fraction; returns (reduced rows, pivot columns)."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = ONE / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat, pivots


def _rank(mat):
    if not mat or not mat[0]:
        return 0
    return len(_rref(mat)[1])


def _kernel_basis(mat, ncols):
    """Columns spanning the null space of ``mat`` acting on Q^ncols."""
    if ncols == 0:
        return []
    if not mat:
        return [[ONE if i == j else ZERO for i in range(ncols)]
                for j in range(ncols)]
    red, pivots = _rref(mat)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][f]
        basis.append(vec)
    return basis


def _solve_coords(columns, target):
    """Coordinates of ``target`` in the span of ``columns`` (exists by caller)."""
    if not columns:
        if any(target):
            raise ComplexError("vector outside the expected span")
        return []
    n = len(target)
    aug = [[columns[j][i] for j in range(len(columns))] + [target[i]]
           for i in range(n)]
    red, pivots = _rref(aug)
    coords = [ZERO] * len(columns)
    for r, pc in enumerate(pivots):
        if pc == len(columns):
            raise ComplexError("vector outside the expected span")
        coords[pc] = red[r][len(columns)]
    return coords


class CochainComplex:
    """Finite complex of rational cochain spaces with explicit differentials.

    ``dims[k]`` is the dimension in degree k; ``diffs[k]`` maps degree k to
    degree k+1 and has shape dims[k+1] x dims[k].
    """

    def __init__(self, dims, diffs, label: str = ""):
        self.dims = list(dims)
        self.diffs = [_to_fraction_matrix(d) for d in diffs]
        self.label = label
        if len(self.diffs) != max(len(self.dims) - 1, 0):
            raise ComplexError(
                f"{label}: expected {max(len(self.dims) - 1, 0)} "
                f"differentials, got {len(self.diffs)}")
        for k, d in enumerate(self.diffs):
            rows, cols = len(d), len(d[0]) if d else 0
            if rows != self.dims[k + 1] or (rows and cols != self.dims[k]):
                raise ComplexError(
                    f"{label}: differential {k} has shape {rows}x{cols}, "
                    f"wanted {self.dims[k + 1]}x{self.dims[k]}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def diff(self, k):
        """Differential out of degree k, as a rows x dims[k] matrix."""
        if 0 <= k < len(self.diffs):
            return self.diffs[k]
        return []

    def check(self):
        for k in range(len(self.diffs) - 1):
            square = _mat_mul(self.diffs[k + 1], self.diffs[k])
            if any(any(v for v in row) for row in square):
                raise ComplexError(
                    f"{self.label}: d compose d is nonzero out of degree {k}")

    def euler(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.dims))


def betti(c: CochainComplex):
    """Rational Betti numbers by exact rank-nullity."""
    c.check()
    out = []
    for k, n in enumerate(c.dims):
        r_out = _rank(c.diff(k)) if n else 0
        r_in = _rank(c.diff(k - 1)) if k > 0 else 0
        out.append(n - r_out - r_in)
    return out


def _check_chain_map(cm: CochainComplex, cb: CochainComplex, r):
    if len(r) != len(cm.dims):
        raise ChainMapError(
            f"restriction needs {len(cm.dims)} matrices, got {len(r)}")
    r = [_to_fraction_matrix(m) for m in r]
    for k, mat in enumerate(r):
        want_rows = cb.dims[k] if k < len(cb.dims) else 0
        rows = len(mat)
        if rows != want_rows or (rows and len(mat[0]) != cm.dims[k]):
            raise ChainMapError(f"restriction {k} has the wrong shape")
    for k in range(len(cm.dims) - 1):
        lhs = _mat_mul(r[k + 1], cm.diff(k)) if k + 1 < len(r) else []
        rhs = _mat_mul(cb.diff(k), r[k]) if k < len(cb.dims) else []
        flat_l = [v for row in lhs for v in row]
        flat_r = [v for row in rhs for v in row]
        if len(flat_l) != len(flat_r) or any(
                a != b for a, b in zip(flat_l, flat_r)):
            raise ChainMapError(
                f"restriction does not commute with d at degree {k}")
    return r


def mapping_cone(cm: CochainComplex, cb: CochainComplex, r) -> CochainComplex:
    """Cone of the restriction: degree k holds (omega_k, gamma_{k-1}).

    The differential sends (omega, gamma) to (-d omega, r omega + d gamma).
    """
    r = _check_chain_map(cm, cb, r)
    top = max(cm.top, cb.top + 1)
    bdim = lambda k: cb.dims[k] if 0 <= k < len(cb.dims) else 0
    mdim = lambda k: cm.dims[k] if 0 <= k < len(cm.dims) else 0
    dims = [mdim(k) + bdim(k - 1) for k in range(top + 1)]
    diffs = []
    for k in range(top):
        rows = mdim(k + 1) + bdim(k)
        cols = mdim(k) + bdim(k - 1)
        block = [[ZERO] * cols for _ in range(rows)]
        dm = cm.diff(k)
        for i in range(len(dm)):
            for j in range(mdim(k)):
                block[i][j] = -dm[i][j]
        rk = r[k] if k < len(r) else []
        for i in range(len(rk)):
            for j in range(mdim(k)):
                block[mdim(k + 1) + i][j] = rk[i][j]
        db = cb.diff(k - 1)
        for i in range(len(db)):
            for j in range(bdim(k - 1)):
                block[mdim(k + 1) + i][mdim(k) + j] = db[i][j]
        diffs.append(block)
    cone = CochainComplex(dims, diffs, f"cone({cm.label}|{cb.label})")
    cone.check()
    return cone


def _cohomology_data(c: CochainComplex, k: int):
    """(boundary basis, representative basis) for H^k."""
    cycles = _kernel_basis(c.diff(k), c.dims[k])
    d_in = c.diff(k - 1) if k > 0 else []
    boundaries = []
    if d_in:
        seen = []
        for j in range(len(d_in[0])):
            col = [d_in[i][j] for i in range(len(d_in))]
            trial = seen + [col]
            if _rank([[v[i] for v in trial] for i in range(len(col))]) \
                    == len(trial):
                seen.append(col)
        boundaries = seen
    reps = []
    span = list(boundaries)
    for v in cycles:
        trial = span + [v]
        if _rank([[u[i] for u in trial] for i in range(len(v))]) == len(trial):
            span.append(v)
            reps.append(v)
    return boundaries, reps


def _induced_map(src_data, dst_data, matrix, src_dim, dst_dim):
    """Matrix of a chain map on cohomology, in representative coordinates."""
    _, src_reps = src_data
    dst_bound, dst_reps = dst_data
    if not src_reps or not dst_reps:
        return [[ZERO] * len(src_reps) for _ in range(len(dst_reps))]
    columns = dst_bound + dst_reps
    out = [[ZERO] * len(src_reps) for _ in range(len(dst_reps))]
    for j, v in enumerate(src_reps):
        if matrix:
            img = [sum(matrix[i][t] * v[t] for t in range(src_dim))
                   for i in range(dst_dim)]
        else:
            img = [ZERO] * dst_dim
        coords = _solve_coords(columns, img)
        for i in range(len(dst_reps)):
            out[i][j] = coords[len(dst_bound) + i]
    return out


class ExactnessSpot:
    def __init__(self, label, dim, rank_in, rank_out, composite_zero):
        self.label = label
        self.dim = dim
        self.rank_in = rank_in
        self.rank_out = rank_out
        self.composite_zero = composite_zero
        self.exact = composite_zero and (rank_in + rank_out == dim)

    def __repr__(self):
        flag = "exact" if self.exact else "NOT EXACT"
        return (f"<{self.label}: dim {self.dim} = {self.rank_in} in + "
                f"{self.rank_out} out [{flag}]>")


class ExactnessReport:
    def __init__(self, spots):
        self.spots = spots

    @property
    def all_exact(self) -> bool:
        return all(s.exact for s in self.spots)

    def failures(self):
        return [s for s in self.spots if not s.exact]


def les_check(cm: CochainComplex, cb: CochainComplex, r) -> ExactnessReport:
    """Exactness of ... -> H^k(cone) -> H^k(M) -> H^k(bdry) -> H^(k+1)(cone) -> ...

    The three maps are the cone projection, the restriction, and the
    inclusion of the boundary summand; exactness at each spot is decided
    by exact rank bookkeeping on induced matrices.
    """
    r = _check_chain_map(cm, cb, r)
    cone = mapping_cone(cm, cb, r)
    bdim = lambda k: cb.dims[k] if 0 <= k < len(cb.dims) else 0
    mdim = lambda k: cm.dims[k] if 0 <= k < len(cm.dims) else 0
    cdim = lambda k: cone.dims[k] if 0 <= k < len(cone.dims) else 0

    m_data = {k: _cohomology_data(cm, k) for k in range(len(cm.dims))}
    b_data = {k: _cohomology_data(cb, k) for k in range(len(cb.dims))}
    c_data = {k: _cohomology_data(cone, k) for k in range(len(cone.dims))}

    def proj_matrix(k):
        # cone^k -> M^k, drop the boundary summand
        return [[ONE if i == j else ZERO for j in range(cdim(k))]
                for i in range(mdim(k))]

    def incl_matrix(k):
        # bdry^k -> cone^(k+1), land in the boundary summand
        rows = cdim(k + 1)
        out = [[ZERO] * bdim(k) for _ in range(rows)]
        for i in range(bdim(k)):
            out[mdim(k + 1) + i][i] = ONE
        return out

    maps = {}
    for k in range(len(cone.dims)):
        if k < len(cm.dims):
            maps[("b", k)] = _induced_map(c_data[k], m_data[k],
                                          proj_matrix(k), cdim(k), mdim(k))
        if k < len(cm.dims) and k < len(cb.dims):
            maps[("r", k)] = _induced_map(m_data[k], b_data[k], r[k],
                                          mdim(k), bdim(k))
        if k < len(cb.dims) and k + 1 < len(cone.dims):
            maps[("a", k)] = _induced_map(b_data[k], c_data[k + 1],
                                          incl_matrix(k), bdim(k),
                                          cdim(k + 1))

    def h(cdata):
        return len(cdata[1])

    def rank_of(key):
        mat = maps.get(key)
        return _rank(mat) if mat else 0

    def composite_zero(first_key, second_key):
        A, B = maps.get(second_key), maps.get(first_key)
        if not A or not B:
            return True
        prod = _mat_mul(A, B)
        return not any(any(v for v in row) for row in prod)

    spots = []
    for k in range(len(cone.dims)):
        # spot H^k(cone): in = a at k-1, out = b at k
        spots.append(ExactnessSpot(
            f"H^{k}(cone)", h(c_data[k]),
            rank_of(("a", k - 1)), rank_of(("b", k)),
            composite_zero(("a", k - 1), ("b", k))))
        if k < len(cm.dims):
            spots.append(ExactnessSpot(
                f"H^{k}(M)", h(m_data[k]),
                rank_of(("b", k)), rank_of(("r", k)),
                composite_zero(("b", k), ("r", k))))
        if k < len(cb.dims):
            spots.append(ExactnessSpot(
                f"H^{k}(bdry)", h(b_data[k]),
                rank_of(("r", k)), rank_of(("a", k)),
                composite_zero(("r", k), ("a", k))))
    return ExactnessReport(spots)


def dirichlet_betti(cm: CochainComplex, cb: CochainComplex, r):
    """Betti numbers of the kernel subcomplex of the restriction.

    Demands degreewise surjectivity (the partition-of-unity analog); the
    result is checked against the mapping-cone Betti numbers before it is
    returned, since their equality is the point of the construction.
    """
    r = _check_chain_map(cm, cb, r)
    for k in range(len(cb.dims)):
        if _rank(r[k]) != cb.dims[k]:
            raise SurjectivityError(
                f"restriction is not onto in degree {k}")
    kernels = [_kernel_basis(r[k], cm.dims[k]) if k < len(r)
               else [] for k in range(len(cm.dims))]
    dims = [len(kb) for kb in kernels]
    diffs = []
    for k in range(len(cm.dims) - 1):
        dm = cm.diff(k)
        cols = []
        for v in kernels[k]:
            img = [sum(dm[i][t] * v[t] for t in range(cm.dims[k]))
                   for i in range(cm.dims[k + 1])] if dm else []
            cols.append(_solve_coords(kernels[k + 1], img))
        block = [[cols[j][i] if cols else ZERO
                  for j in range(dims[k])] for i in range(dims[k + 1])]
        diffs.append(block)
    sub = CochainComplex(dims, diffs, f"ker({cm.label})")
    out = betti(sub)
    cone_b = betti(mapping_cone(cm, cb, r))
    padded = out + [0] * (len(cone_b) - len(out))
    if padded != cone_b:
        raise ConsistencyError(
            f"kernel subcomplex Betti {out} disagrees with cone {cone_b}")
    return padded


class Mesh:
    """Oriented simplicial mesh of dimension <= 2 with a marked boundary.

    Edges are ordered vertex pairs; triangles are vertex triples whose
    cyclic edges must already be present.  Construction rejects meshes
    whose triangles cannot be coherently oriented.
    """

    def __init__(self, name: str, n_vertices: int, edges, triangles=(),
                 boundary_vertices=(), boundary_edges=()):
        self.name = name
        self.n_vertices = n_vertices
        self.edges = [tuple(e) for e in edges]
        self.triangles = [tuple(t) for t in triangles]
        self.boundary_vertices = list(boundary_vertices)
        self.boundary_edges = list(boundary_edges)
        self._edge_index = {e: i for i, e in enumerate(self.edges)}
        if len(self._edge_index) != len(self.edges):
            raise ComplexError(f"{name}: duplicate edges")
        self._check_orientable()

    def _tri_incidence(self, tri):
        """Signed edge incidences of one triangle."""
        a, b, c = tri
        out = []
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in self._edge_index:
                out.append((self._edge_index[(u, v)], 1))
            elif (v, u) in self._edge_index:
                out.append((self._edge_index[(v, u)], -1))
            else:
                raise ComplexError(
                    f"{self.name}: triangle {tri} uses missing edge {(u, v)}")
        return out

    def _check_orientable(self):
        if not self.triangles:
            return
        edge_users = {}
        for t, tri in enumerate(self.triangles):
            for e, sign in self._tri_incidence(tri):
                edge_users.setdefault(e, []).append((t, sign))
        for e, users in edge_users.items():
            if len(users) > 2:
                raise ComplexError(
                    f"{self.name}: edge {self.edges[e]} borders "
                    f"{len(users)} triangles")
        # 2-color the triangle adjacency graph: same color when the shared
        # edge is traversed oppositely, else opposite color
        color = {}
        for start in range(len(self.triangles)):
            if start in color:
                continue
            color[start] = 0
            queue = [start]
            while queue:
                t = queue.pop()
                for e, users in edge_users.items():
                    mine = [s for u, s in users if u == t]
                    if not mine:
                        continue
                    for u, s in users:
                        if u == t:
                            continue
                        want = color[t] if s != mine[0] else 1 - color[t]
                        if u not in color:
                            color[u] = want
                            queue.append(u)
                        elif color[u] != want:
                            raise ConsistencyError(
                                f"{self.name}: mesh is not orientable")
        flipped = [c for c in color.values() if c == 1]
        if flipped:
            raise ConsistencyError(
                f"{self.name}: {len(flipped)} triangles are oriented "
                f"against the rest; flip them in the registry data")

    def complex(self) -> CochainComplex:
        # head +1, tail -1
        d0 = [[ZERO] * self.n_vertices for _ in self.edges]
        for i, (u, v) in enumerate(self.edges):
            d0[i][v] += ONE
            d0[i][u] -= ONE
        if not self.triangles:
            dims = [self.n_vertices, len(self.edges)]
            return CochainComplex(dims, [d0] if self.edges else [],
                                  self.name)
        d1 = [[ZERO] * len(self.edges) for _ in self.triangles]
        for t, tri in enumerate(self.triangles):
            for e, sign in self._tri_incidence(tri):
                d1[t][e] += sign
        dims = [self.n_vertices, len(self.edges), len(self.triangles)]
        return CochainComplex(dims, [d0, d1], self.name)

    def boundary_complex(self) -> CochainComplex:
        vmap = {v: i for i, v in enumerate(self.boundary_vertices)}
        edges = []
        for e in self.boundary_edges:
            u, v = self.edges[e]
            edges.append((vmap[u], vmap[v]))
        d0 = [[ZERO] * len(self.boundary_vertices) for _ in edges]
        for i, (u, v) in enumerate(edges):
            d0[i][v] += ONE
            d0[i][u] -= ONE
        dims = [len(self.boundary_vertices), len(edges)]
        if not edges:
            dims = [len(self.boundary_vertices)]
            return CochainComplex(dims, [], f"bdry({self.name})")
        return CochainComplex(dims, [d0], f"bdry({self.name})")

    def restriction(self):
        """Chain map matrices picking out boundary simplices."""
        nb = len(self.boundary_vertices)
        r0 = [[ZERO] * self.n_vertices for _ in range(nb)]
        for i, v in enumerate(self.boundary_vertices):
            r0[i][v] = ONE
        out = [r0]
        if self.edges:
            r1 = [[ZERO] * len(self.edges)
                  for _ in range(len(self.boundary_edges))]
            for i, e in enumerate(self.boundary_edges):
                r1[i][e] = ONE
            out.append(r1)
        if self.triangles:
            out.append([])
        return out

    def complexes(self):
        return self.complex(), self.boundary_complex(), self.restriction()


def _interval() -> Mesh:
    return Mesh("interval", 3, [(0, 1), (1, 2)],
                boundary_vertices=[0, 2])


def _circle() -> Mesh:
    return Mesh("circle", 4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def _disk() -> Mesh:
    rim = [(0, 1), (1, 2), (2, 3), (3, 0)]
    spokes = [(0, 4), (1, 4), (2, 4), (3, 4)]
    tris = [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)]
    return Mesh("disk", 5, rim + spokes, tris,
                boundary_vertices=[0, 1, 2, 3], boundary_edges=[0, 1, 2, 3])


def _annulus() -> Mesh:
    outer = [(0, 1), (1, 2), (2, 3), (3, 0)]
    inner = [(4, 5), (5, 6), (6, 7), (7, 4)]
    radial = [(0, 4), (1, 5), (2, 6), (3, 7)]
    diag = [(0, 5), (1, 6), (2, 7), (3, 4)]
    tris = [(0, 1, 5), (0, 5, 4), (1, 2, 6), (1, 6, 5),
            (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7)]
    return Mesh("annulus", 8, outer + inner + radial + diag, tris,
                boundary_vertices=[0, 1, 2, 3, 4, 5, 6, 7],
                boundary_edges=[0, 1, 2, 3, 4, 5, 6, 7])


def _cylinder() -> Mesh:
    bottom = [(0, 1), (1, 2), (2, 0)]
    top = [(3, 4), (4, 5), (5, 3)]
    vertical = [(0, 3), (1, 4), (2, 5)]
    diag = [(0, 4), (1, 5), (2, 3)]
    tris = [(0, 1, 4), (0, 4, 3), (1, 2, 5), (1, 5, 4), (2, 0, 3), (2, 3, 5)]
    return Mesh("cylinder", 6, bottom + top + vertical + diag, tris,
                boundary_vertices=[0, 1, 2, 3, 4, 5],
                boundary_edges=[0, 1, 2, 3, 4, 5])


def moebius_mesh() -> Mesh:
    """Minimal five-vertex band with a half twist; construction must fail."""
    tris = [(0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 0), (4, 0, 1)]
    edges = [(0, 1), (1, 2), (0, 2), (2, 3), (1, 3), (3, 4), (2, 4),
             (0, 4), (0, 3), (1, 4)]
    return Mesh("moebius", 5, edges, tris)


MESH_REGISTRY = {
    "interval": _interval,
    "circle": _circle,
    "disk": _disk,
    "annulus": _annulus,
    "cylinder": _cylinder,
}


def make_mesh(name: str) -> Mesh:
    try:
        factory = MESH_REGISTRY[name]
    except KeyError:
        raise ComplexError(f"unknown mesh {name!r}") from None
    return factory()
