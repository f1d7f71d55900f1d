"""Oriented chart domains, quadrature, boundaries, and fiber integration.

A :class:`ChartDomain` is a reference box (or signed point set) together
with an embedding into the ambient coordinates its forms are written in,
plus a global orientation sign.  Integration pulls the form back along the
embedding and applies tensor Gauss-Legendre quadrature, so every integral
in the package reduces to polynomial-exact rules on boxes.

Orientation conventions, pinned once and tested:

* iterated polar spheres put the outward normal first, so every sphere
  chart is positively oriented (S^1 counterclockwise, det[u,u_theta,u_phi]
  = sin(theta) > 0 on S^2, and so on inductively);
* balls in polar coordinates are positive for the ambient orientation and
  their boundary sphere carries sign +1;
* box faces {x_i = hi} carry sign (-1)^i, {x_i = lo} carry (-1)^(i+1),
  indices 0-based;
* products obey boundary(A x B) = boundary(A) x B + (-1)^dim(A) A x
  boundary(B);
* fiber coordinates always come first in a total chart, and the fiber
  integral extracts the front block, the coefficient of dt_1..dt_f ^ dx_I.
"""

from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

import numpy as np

from .dual import cos, sin
from .errors import ChartError, DegreeError
from .forms import Form, SmoothMap, ZeroForm, combos, combo_index, det, submatrix


@lru_cache(maxsize=None)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return tuple(float(v) for v in x), tuple(float(v) for v in w)


def gauss_nodes(order: int, lo: float, hi: float):
    """Gauss-Legendre nodes and weights on [lo, hi]."""
    x, w = _leggauss(order)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return [mid + half * xi for xi in x], [half * wi for wi in w]


def tensor_nodes(bounds, orders):
    """Iterate (point, weight) over a tensor Gauss-Legendre grid."""
    axes = [gauss_nodes(o, lo, hi) for (lo, hi), o in zip(bounds, orders)]
    pairs = [list(zip(xs, ws)) for xs, ws in axes]
    for combo in itertools.product(*pairs):
        pt = [c[0] for c in combo]
        w = 1.0
        for c in combo:
            w *= c[1]
        yield pt, w


def unit_sphere_point(angles):
    """Iterated polar parametrization of S^(m-1), first axis polar.

    One angle gives (cos, sin); each extra angle theta prepends cos(theta)
    and scales the remaining block by sin(theta).  Dual-number safe.
    """
    if len(angles) == 1:
        return [cos(angles[0]), sin(angles[0])]
    inner = unit_sphere_point(angles[1:])
    c, s = cos(angles[0]), sin(angles[0])
    return [c] + [s * v for v in inner]


def sphere_bounds(m: int):
    """Reference bounds for the m-1 angles of S^(m-1) in R^m."""
    return [(0.0, math.pi)] * (m - 2) + [(0.0, 2.0 * math.pi)]


class ChartDomain:
    """Oriented integration domain: reference box plus ambient embedding."""

    def __init__(self, name: str, kind: str, dim: int, ambient_dim: int,
                 bounds=None, orders=None, embed: SmoothMap | None = None,
                 orientation: int = 1, point_entries=None, boundary_builder=None):
        self.name = name
        self.kind = kind
        self.dim = dim
        self.ambient_dim = ambient_dim
        self.bounds = [tuple(b) for b in bounds] if bounds is not None else []
        self.orders = list(orders) if orders is not None else [16] * dim
        self.embed = embed
        self.orientation = orientation
        self.point_entries = list(point_entries) if point_entries is not None else None
        self._boundary_builder = boundary_builder
        if kind == "points":
            if dim != 0 or not self.point_entries:
                raise ChartError("points domain needs dim 0 and at least one entry")
        elif len(self.bounds) != dim or len(self.orders) != dim:
            raise ChartError(f"domain {name}: need {dim} bounds and orders")

    # ------------------------------------------------------------------
    # constructors

    @staticmethod
    def box(name: str, bounds, orders=None, embed: SmoothMap | None = None,
            ambient_dim: int | None = None, orientation: int = 1) -> "ChartDomain":
        dim = len(bounds)
        if embed is None:
            ambient_dim = dim if ambient_dim is None else ambient_dim
            if ambient_dim != dim:
                raise ChartError("identity embedding requires ambient_dim == dim")
        else:
            ambient_dim = embed.dst_dim
            if embed.src_dim != dim:
                raise ChartError("embedding source dimension mismatch")
        return ChartDomain(name, "box", dim, ambient_dim, bounds, orders, embed, orientation)

    @staticmethod
    def interval(name: str, lo: float, hi: float, order: int = 16) -> "ChartDomain":
        return ChartDomain.box(name, [(lo, hi)], [order])

    @staticmethod
    def points(name: str, entries) -> "ChartDomain":
        amb = len(entries[0][1])
        return ChartDomain(name, "points", 0, amb, point_entries=entries)

    @staticmethod
    def sphere(ambient_dim: int, radius: float = 1.0, order: int = 16,
               name: str | None = None) -> "ChartDomain":
        """S^(m-1) in R^m, positively oriented (outward normal first)."""
        m = ambient_dim
        name = name or f"S{m - 1}"
        if m < 1:
            raise ChartError("sphere needs ambient dimension >= 1")
        if m == 1:
            return ChartDomain.points(name, [(1, [radius]), (-1, [-radius])])
        embed = SmoothMap(m - 1, m,
                          lambda a: [radius * v for v in unit_sphere_point(a)])
        return ChartDomain(name, "sphere", m - 1, m, sphere_bounds(m),
                           [order] * (m - 1), embed)

    @staticmethod
    def ball(ambient_dim: int, radius: float = 1.0, order: int = 16,
             name: str | None = None) -> "ChartDomain":
        """Solid ball D^m in polar coordinates; boundary is the sphere, +1."""
        m = ambient_dim
        name = name or f"D{m}"
        if m == 1:
            dom = ChartDomain.box(name, [(-radius, radius)], [order])
            return dom
        embed = SmoothMap(m, m,
                          lambda ra: [ra[0] * v for v in unit_sphere_point(ra[1:])])
        bounds = [(0.0, radius)] + sphere_bounds(m)

        def boundary():
            return [ChartDomain.sphere(m, radius, order)]

        return ChartDomain(name, "ball", m, m, bounds, [order] * m, embed,
                           boundary_builder=boundary)

    @staticmethod
    def annulus(r_inner: float, r_outer: float, ambient_dim: int = 2,
                order: int = 16, name: str | None = None) -> "ChartDomain":
        """Radial shell; outer sphere +1, inner sphere -1 on the boundary."""
        m = ambient_dim
        name = name or f"shell{m}"
        embed = SmoothMap(m, m,
                          lambda ra: [ra[0] * v for v in unit_sphere_point(ra[1:])])
        bounds = [(r_inner, r_outer)] + sphere_bounds(m)

        def boundary():
            return [ChartDomain.sphere(m, r_outer, order),
                    ChartDomain.sphere(m, r_inner, order).reorient(-1)]

        return ChartDomain(name, "annulus", m, m, bounds, [order] * m, embed,
                           boundary_builder=boundary)

    @staticmethod
    def product(a: "ChartDomain", b: "ChartDomain", name: str | None = None) -> "ChartDomain":
        """Product domain; coordinates and ambient blocks of ``a`` come first."""
        if a.kind == "points" or b.kind == "points":
            raise ChartError("products with point domains are not supported")
        name = name or f"{a.name}x{b.name}"
        na, nb = a.ambient_dim, b.ambient_dim
        ea = a.embed or SmoothMap.identity(a.dim)
        eb = b.embed or SmoothMap.identity(b.dim)
        da = a.dim

        def fn(x):
            return ea.fn(x[:da]) + eb.fn(x[da:])

        embed = SmoothMap(a.dim + b.dim, na + nb, fn)

        def boundary():
            faces = [ChartDomain.product(fa, b) for fa in a.boundary_faces()]
            sgn = (-1) ** a.dim
            faces += [ChartDomain.product(a, fb).reorient(sgn) for fb in b.boundary_faces()]
            return faces

        dom = ChartDomain(name, "product", a.dim + b.dim, na + nb,
                          a.bounds + b.bounds, a.orders + b.orders, embed,
                          a.orientation * b.orientation, boundary_builder=boundary)
        dom.factors = (a, b)
        return dom

    # ------------------------------------------------------------------

    def _copy(self, **overrides) -> "ChartDomain":
        kw = dict(name=self.name, kind=self.kind, dim=self.dim,
                  ambient_dim=self.ambient_dim, bounds=self.bounds,
                  orders=self.orders, embed=self.embed,
                  orientation=self.orientation, point_entries=self.point_entries,
                  boundary_builder=self._boundary_builder)
        kw.update(overrides)
        out = ChartDomain(**kw)
        if hasattr(self, "factors"):
            out.factors = self.factors
        return out

    def reorient(self, sign: int) -> "ChartDomain":
        return self._copy(orientation=self.orientation * sign)

    def with_orders(self, order) -> "ChartDomain":
        if isinstance(order, int):
            return self._copy(orders=[order] * self.dim)
        return self._copy(orders=list(order))

    def embedding(self) -> SmoothMap:
        return self.embed or SmoothMap.identity(self.dim)

    # ------------------------------------------------------------------
    # integration

    def integrate(self, form: Form) -> float:
        """Integral of an ambient form of degree equal to the chart dimension."""
        if form.n != self.ambient_dim:
            raise ChartError(
                f"form lives in dimension {form.n}, domain {self.name} embeds in {self.ambient_dim}")
        if self.kind == "points":
            if form.p != 0:
                raise DegreeError("point domains integrate 0-forms only")
            total = 0.0
            for sign, pt in self.point_entries:
                total += sign * form(pt)[0]
            return self.orientation * total
        if form.p != self.dim:
            raise DegreeError(
                f"degree {form.p} form cannot be integrated over {self.dim}-dimensional {self.name}")
        pulled = form.pullback(self.embed) if self.embed is not None else form
        total = 0.0
        for pt, w in tensor_nodes(self.bounds, self.orders):
            total += w * pulled.comps(pt)[0]
        return self.orientation * total

    def boundary_faces(self):
        """Oriented codimension-one faces; empty for closed domains."""
        if self._boundary_builder is not None:
            return self._boundary_builder()
        if self.kind in ("sphere", "points"):
            return []
        if self.kind == "box":
            return self._box_faces()
        raise ChartError(f"no boundary decomposition for kind {self.kind}")

    def _box_faces(self):
        faces = []
        parent_embed = self.embedding()
        for i in range(self.dim):
            rest = self.bounds[:i] + self.bounds[i + 1:]
            rest_orders = self.orders[:i] + self.orders[i + 1:]
            for value, base_sign in ((self.bounds[i][1], (-1) ** i),
                                     (self.bounds[i][0], (-1) ** (i + 1))):
                insert = _insert_map(self.dim, i, value)
                faces.append(ChartDomain(
                    f"{self.name}|x{i}={value:g}", "box", self.dim - 1,
                    self.ambient_dim, rest, rest_orders,
                    parent_embed.compose(insert),
                    self.orientation * base_sign))
        return faces

    # ------------------------------------------------------------------
    # sampling for pointwise checks

    def sample_ref_points(self, rng: random.Random, count: int, margin: float = 0.05):
        """Reference points away from coordinate edges, for pointwise tests."""
        if self.kind == "points":
            return [list(pt) for _, pt in self.point_entries][:count]
        pts = []
        for _ in range(count):
            pt = []
            for lo, hi in self.bounds:
                u = rng.uniform(margin, 1.0 - margin)
                pt.append(lo + (hi - lo) * u)
            pts.append(pt)
        return pts

    def sample_ambient_points(self, rng: random.Random, count: int, margin: float = 0.05):
        emb = self.embedding()
        return [emb(p) for p in self.sample_ref_points(rng, count, margin)]


def _insert_map(dim: int, slot: int, value: float) -> SmoothMap:
    def fn(x):
        return list(x[:slot]) + [value] + list(x[slot:])
    return SmoothMap(dim - 1, dim, fn)


class FiberBundleDomain:
    """Trivialized bundle whose total chart lists fiber coordinates first."""

    def __init__(self, fiber: ChartDomain, base: ChartDomain, name: str | None = None):
        self.fiber = fiber
        self.base = base
        self.name = name or f"{fiber.name}->{base.name}"
        if fiber.kind == "points":
            self.total = None  # zero-dimensional fiber: no product chart needed
        else:
            self.total = ChartDomain.product(fiber, base, name=self.name)

    def projection(self) -> SmoothMap:
        """Total ambient -> base ambient, dropping the fiber block."""
        fa = self.fiber.ambient_dim
        return SmoothMap(fa + self.base.ambient_dim, self.base.ambient_dim,
                         lambda x: list(x[fa:]))

    def fiber_nodes(self):
        """(ambient fiber point, jacobian, weight) triples for the fiber rule."""
        if self.fiber.kind == "points":
            for sign, pt in self.fiber.point_entries:
                yield list(pt), [[] for _ in range(self.fiber.ambient_dim)], float(sign)
            return
        emb = self.fiber.embedding()
        for pt, w in tensor_nodes(self.fiber.bounds, self.fiber.orders):
            yield emb(pt), emb.jacobian(pt), w * self.fiber.orientation

    def fiber_integrate(self, form: Form) -> Form:
        """Integrate the front block of a total-space form over the fiber.

        The result is the base form whose dx_I coefficient is the fiber
        integral of the dt_1..dt_f ^ dx_I coefficient, dt the fiber block.
        Degrees below the fiber dimension integrate to zero and come back
        as a flagged :class:`ZeroForm`.
        """
        fa, fd = self.fiber.ambient_dim, self.fiber.dim
        nb = self.base.ambient_dim
        n_tot = fa + nb
        if form.n != n_tot:
            raise ChartError(f"form dimension {form.n} != total dimension {n_tot}")
        if form.p < fd:
            return ZeroForm(nb, 0)
        p_out = form.p - fd
        if p_out > nb:
            return ZeroForm(nb, p_out)
        idx_tot = combo_index(n_tot, form.p)
        # index layout: fiber-ambient block K in front, base block I shifted by fa
        layout = []
        for iI, I in enumerate(combos(nb, p_out)):
            shifted = tuple(i + fa for i in I)
            entries = []
            for K in combos(fa, fd):
                entries.append((K, idx_tot[K + shifted]))
            layout.append(entries)
        nodes = list(self.fiber_nodes())
        all_cols = list(range(fd))

        def comps(y):
            out = [0.0] * len(layout)
            for v, Jf, w in nodes:
                vals = form.comps(list(v) + list(y))
                for iI, entries in enumerate(layout):
                    acc = 0.0
                    for K, iM in entries:
                        c = vals[iM]
                        if fd:
                            acc = acc + c * det(submatrix(Jf, K, all_cols))
                        else:
                            acc = acc + c
                    out[iI] += w * acc
            return out

        return Form(nb, p_out, comps)


def _slice_chart(base: ChartDomain, value: float, total_ambient: int) -> ChartDomain:
    emb = base.embedding()

    def fn(x):
        return [value] + list(emb.fn(x))

    return base._copy(name=f"{base.name}@{value:g}", ambient_dim=total_ambient,
                      embed=SmoothMap(base.dim, total_ambient, fn))


def stokes_residual(form: Form, domain: ChartDomain, cylinder: bool = False) -> float:
    """Absolute defect of the Stokes identity for ``form`` on ``domain``.

    Plain mode compares the integral of the exterior derivative against the
    sum over the oriented boundary faces.  With ``cylinder`` set the domain
    must be a product whose first factor is an interval [t0, t1]; the
    boundary integral is then assembled as

        slice(t1) - slice(t0) - lateral([t0, t1] x boundary of the base),

    the convention every parameter-cylinder argument in the package uses.
    """
    lhs = domain.integrate(form.d())
    if not cylinder:
        rhs = sum(face.integrate(form) for face in domain.boundary_faces())
        return abs(lhs - rhs)
    seg, base = getattr(domain, "factors", (None, None))
    if seg is None or seg.dim != 1 or seg.kind != "box":
        raise ChartError("cylinder residual needs a product with an interval first factor")
    t0, t1 = seg.bounds[0]
    rhs = _slice_chart(base, t1, domain.ambient_dim).integrate(form)
    rhs -= _slice_chart(base, t0, domain.ambient_dim).integrate(form)
    for side in base.boundary_faces():
        rhs -= ChartDomain.product(seg, side).integrate(form)
    return abs(lhs - rhs)
