"""Mapping-cone pairs on a chart with boundary, pairings, and zero counts.

A relative pair couples a degree-k form on the chart with a degree k-1
companion on the boundary.  Companions are written in the ambient
coordinates of the chart, so restriction to a boundary face is plain
evaluation and commutes with d on the nose; the cone differential mixes
the slots through that restriction.

Currents are never materialized: every duality statement is tested
weakly, by evaluating both sides against finite families of test forms.
The homotopy operators integrate over a parameter interval placed in
front of the chart coordinates, the same convention fiber integration
uses.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .errors import (BoundaryZeroError, ChartError, DegreeError,
                     HomotopyError, TransversalityError)
from .forms import Form, SmoothMap
from .geometry import ChartDomain


class RelativeDomain:
    """Chart together with its oriented boundary faces.

    ``boundary_defect`` measures how far an ambient point is from the
    boundary; the homotopy operators require it to spot-check that a flow
    keeps boundary points on the boundary.
    """

    def __init__(self, manifold: ChartDomain, faces=None, boundary_defect=None):
        self.manifold = manifold
        self.faces = list(faces) if faces is not None else manifold.boundary_faces()
        self.boundary_defect = boundary_defect

    @property
    def dim(self) -> int:
        return self.manifold.dim

    @property
    def ambient_dim(self) -> int:
        return self.manifold.ambient_dim

    def integrate(self, form: Form) -> float:
        return self.manifold.integrate(form)

    def integrate_boundary(self, form: Form) -> float:
        return sum(face.integrate(form) for face in self.faces)


class FormPair:
    """Cone pair: a degree-k form and its degree k-1 boundary companion.

    The companion is only ever read on the boundary faces.  In degree
    zero the companion space is trivial and ``gamma`` must be None.
    """

    def __init__(self, domain: RelativeDomain, omega: Form, gamma: Form | None):
        n = domain.ambient_dim
        if omega.n != n:
            raise ChartError(f"first slot lives in dimension {omega.n}, chart has {n}")
        if omega.p == 0:
            if gamma is not None:
                raise DegreeError("degree-zero pairs carry no boundary companion")
        elif gamma is None:
            raise DegreeError("positive-degree pairs need a boundary companion")
        elif gamma.n != n or gamma.p != omega.p - 1:
            raise DegreeError(
                f"companion must be a degree {omega.p - 1} form in dimension {n}")
        self.domain = domain
        self.omega = omega
        self.gamma = gamma

    @property
    def degree(self) -> int:
        return self.omega.p


def pair_d(p: FormPair) -> FormPair:
    """Cone differential (omega, gamma) -> (-d omega, omega|b + d gamma)."""
    second = p.omega if p.gamma is None else p.omega + p.gamma.d()
    return FormPair(p.domain, p.omega.d().smul(-1.0), second)


def from_boundary(domain: RelativeDomain, gamma: Form) -> FormPair:
    """Boundary form included as the pair (0, gamma)."""
    return FormPair(domain, Form.zero(domain.ambient_dim, gamma.p + 1), gamma)


def absolute_part(p: FormPair) -> Form:
    """Projection onto the first slot; anticommutes with the differentials."""
    return p.omega


def pair_pullback(p: FormPair, phi: SmoothMap, source: RelativeDomain) -> FormPair:
    """Pull a pair back along a map that respects the boundaries."""
    gamma = None if p.gamma is None else p.gamma.pullback(phi)
    return FormPair(source, p.omega.pullback(phi), gamma)


# ---------------------------------------------------------------------------
# pairings

def lefschetz_I(p: FormPair, eta: Form) -> float:
    """Pair against a test form: int_M omega^eta + int_bM gamma^eta."""
    dom = p.domain
    if p.omega.p + eta.p != dom.dim:
        raise DegreeError(
            f"pairing a degree {p.omega.p} pair needs a degree "
            f"{dom.dim - p.omega.p} test form, got {eta.p}")
    total = dom.integrate(p.omega.wedge(eta))
    if p.gamma is not None:
        total += dom.integrate_boundary(p.gamma.wedge(eta))
    return total


def lefschetz_II(eta: Form, p: FormPair) -> tuple:
    """The two current evaluations (int_M omega^eta, int_bM gamma^eta)."""
    dom = p.domain
    if eta.p + p.omega.p != dom.dim:
        raise DegreeError(
            f"degree {eta.p} test form cannot pair with a degree "
            f"{p.omega.p} pair on a {dom.dim}-dimensional chart")
    first = dom.integrate(p.omega.wedge(eta))
    second = 0.0
    if p.gamma is not None:
        second = dom.integrate_boundary(p.gamma.wedge(eta))
    return first, second


# ---------------------------------------------------------------------------
# homotopy operators

def slice_map(phi: SmoothMap, s: float) -> SmoothMap:
    """Time slice of a cylinder flow: x -> phi(s, x)."""
    return SmoothMap(phi.src_dim - 1, phi.dst_dim,
                     lambda x, s=s: phi.fn([s] + list(x)))


def _drop_first(n: int) -> SmoothMap:
    return SmoothMap(n + 1, n, lambda x: list(x[1:]))


def _segment_cylinders(seg: ChartDomain, face: ChartDomain):
    """Cylinders over one boundary face, in product orientation.

    Faces that are signed point sets get one embedded segment per point,
    carrying the point's sign, since the product constructor rejects
    zero-dimensional point factors.
    """
    if face.kind != "points":
        return [ChartDomain.product(seg, face)]
    out = []
    for sign, pt in face.point_entries:
        fixed = [float(v) for v in pt]
        emb = SmoothMap(1, 1 + len(fixed), lambda x, fixed=fixed: [x[0]] + fixed)
        out.append(ChartDomain(
            f"{seg.name}x{face.name}", "box", 1, 1 + len(fixed),
            list(seg.bounds), list(seg.orders), emb,
            face.orientation * sign))
    return out


def _check_boundary_compat(phi: SmoothMap, t: float, source: RelativeDomain,
                           target: RelativeDomain, samples: int = 4,
                           tol: float = 1e-8):
    """Sample [0,t] x boundary(source) and require images on boundary(target)."""
    if target.boundary_defect is None:
        raise ChartError(
            f"target domain {target.manifold.name} has no boundary defect function")
    rng = random.Random(7)
    for face in source.faces:
        pts = face.sample_ref_points(rng, samples)
        if face.kind != "points":
            emb = face.embedding()
            pts = [emb(ref) for ref in pts]
        for x in pts:
            for s in (0.37 * t, 0.81 * t, t):
                defect = target.boundary_defect(phi([s] + list(x)))
                if abs(defect) > tol:
                    raise HomotopyError(
                        f"flow leaves the boundary at s={s:.3f}: defect {defect:.3e}")


def homotopy_TI(phi: SmoothMap, t: float, p: FormPair, eta: Form,
                source: RelativeDomain, t_order: int = 8) -> float:
    """First cylinder operator against a test form on the source.

    The value is -int_{[0,t] x B} phi^*omega ^ pr^*eta plus the boundary
    cylinder integral of phi^*gamma ^ pr^*eta, pr the projection to B.
    """
    nb = source.ambient_dim
    if phi.src_dim != nb + 1 or phi.dst_dim != p.domain.ambient_dim:
        raise ChartError("flow does not map the source cylinder to the target chart")
    if p.omega.p + eta.p != source.dim + 1:
        raise DegreeError(
            f"cylinder pairing needs degree {source.dim + 1 - p.omega.p} "
            f"test forms, got {eta.p}")
    _check_boundary_compat(phi, t, source, p.domain)
    seg = ChartDomain.interval("s", 0.0, t, t_order)
    eta_c = eta.pullback(_drop_first(nb))
    total = -ChartDomain.product(seg, source.manifold).integrate(
        p.omega.pullback(phi).wedge(eta_c))
    if p.gamma is not None:
        gpull = p.gamma.pullback(phi)
        for face in source.faces:
            for cyl in _segment_cylinders(seg, face):
                total += cyl.integrate(gpull.wedge(eta_c))
    return total


def homotopy_TII(phi: SmoothMap, t: float, eta: Form, p: FormPair,
                 target: RelativeDomain, t_order: int = 8) -> tuple:
    """Second cylinder operator: the pair lives on the source of the flow.

    Returns (-int_{[0,t] x B} pr^*omega ^ phi^*eta,
             int_{[0,t] x bB} pr^*gamma ^ phi^*eta).
    """
    source = p.domain
    nb = source.ambient_dim
    if phi.src_dim != nb + 1 or phi.dst_dim != target.ambient_dim:
        raise ChartError("flow does not map the source cylinder to the target chart")
    if p.omega.p + eta.p != source.dim + 1:
        raise DegreeError(
            f"cylinder pairing needs degree {source.dim + 1 - p.omega.p} "
            f"test forms, got {eta.p}")
    _check_boundary_compat(phi, t, source, target)
    seg = ChartDomain.interval("s", 0.0, t, t_order)
    eta_c = eta.pullback(phi)
    pr = _drop_first(nb)
    first = -ChartDomain.product(seg, source.manifold).integrate(
        p.omega.pullback(pr).wedge(eta_c))
    second = 0.0
    if p.gamma is not None:
        gpull = p.gamma.pullback(pr)
        for face in source.faces:
            for cyl in _segment_cylinders(seg, face):
                second += cyl.integrate(gpull.wedge(eta_c))
    return first, second


def homotopy_defect_I(phi: SmoothMap, t: float, p: FormPair, eta: Form,
                      source: RelativeDomain, t_order: int = 8) -> float:
    """Residual of the first homotopy identity against one test form.

    The operator applied to the differentiated pair, plus (-1)^(k-1) times
    the operator transposed onto d(eta), must equal the difference of the
    endpoint pairings.
    """
    k = p.degree
    sign = 1.0 if (k - 1) % 2 == 0 else -1.0
    lhs = homotopy_TI(phi, t, pair_d(p), eta, source, t_order)
    lhs += sign * homotopy_TI(phi, t, p, eta.d(), source, t_order)
    end = lefschetz_I(pair_pullback(p, slice_map(phi, t), source), eta)
    start = lefschetz_I(pair_pullback(p, slice_map(phi, 0.0), source), eta)
    return abs(lhs - (end - start))


def homotopy_defect_II(phi: SmoothMap, t: float, eta: Form, p: FormPair,
                       target: RelativeDomain, t_order: int = 8) -> float:
    """Residual of the second homotopy identity against one pair.

    With a the pair degree, the identity is
    (-1)^(a+1) T(d eta) + T(eta) on the differentiated pair
    = endpoint pairing difference.  The exponent a+1 is forced by Stokes
    on the two cylinders once the transpositions above are fixed; see the
    sign derivation exercised in the tests.
    """
    a = p.degree
    if a + eta.p != p.domain.dim:
        raise DegreeError(
            f"identity needs a degree {p.domain.dim - a} test form, got {eta.p}")
    sign = 1.0 if (a + 1) % 2 == 0 else -1.0
    lhs1 = homotopy_TII(phi, t, eta.d(), p, target, t_order)
    lhs2 = homotopy_TII(phi, t, eta, pair_d(p), target, t_order)
    lhs = sign * (lhs1[0] + lhs1[1]) + lhs2[0] + lhs2[1]

    def endpoint(s: float) -> float:
        return sum(lefschetz_II(eta.pullback(slice_map(phi, s)), p))

    return abs(lhs - (endpoint(t) - endpoint(0.0)))


# ---------------------------------------------------------------------------
# sign constants

class SignConstants:
    """Transposition exponents for moving d across the boundary pairings."""

    @staticmethod
    def tau(n: int, k: int) -> int:
        return k * (n - k - 1)

    @staticmethod
    def upsilon(n: int, k: int) -> int:
        return k * (n - k)

    @staticmethod
    def table(max_n: int = 6) -> dict:
        return {(n, k): (SignConstants.tau(n, k), SignConstants.upsilon(n, k))
                for n in range(max_n + 1) for k in range(n + 1)}


# ---------------------------------------------------------------------------
# currents

class CurrentEvaluator:
    """Current given purely by its evaluation rule on test forms."""

    def __init__(self, dim: int, fn, label: str = ""):
        self.dim = dim
        self.fn = fn
        self.label = label

    def __call__(self, form: Form) -> float:
        return self.fn(form)

    @staticmethod
    def from_chart(chart: ChartDomain) -> "CurrentEvaluator":
        return CurrentEvaluator(chart.dim, chart.integrate, chart.name)

    @staticmethod
    def from_signed_points(entries, label: str = "signed-points") -> "CurrentEvaluator":
        """0-dimensional current: sum of signed point evaluations."""

        def ev(form: Form) -> float:
            if form.p != 0:
                raise DegreeError("signed point sets evaluate 0-forms only")
            return sum(sign * form(list(pt))[0] for sign, pt in entries)

        return CurrentEvaluator(0, ev, label)


# ---------------------------------------------------------------------------
# signed zeros of sections

def _membership(B: ChartDomain):
    """(inside, boundary distance) predicates for the supported chart kinds."""
    if B.kind == "ball":
        radius = B.bounds[0][1]

        def r(x):
            return math.sqrt(sum(v * v for v in x))

        return (lambda x: r(x) < radius), (lambda x: radius - r(x))
    if B.kind == "annulus":
        rin, rout = B.bounds[0]

        def r(x):
            return math.sqrt(sum(v * v for v in x))

        return (lambda x: rin < r(x) < rout), (lambda x: min(r(x) - rin, rout - r(x)))
    if B.kind == "box" and B.embed is None:

        def inside(x):
            return all(lo < v < hi for v, (lo, hi) in zip(x, B.bounds))

        def bdist(x):
            return min(min(v - lo, hi - v) for v, (lo, hi) in zip(x, B.bounds))

        return inside, bdist
    raise ChartError(f"no membership test for domain kind {B.kind!r}")


def _newton(smap: SmoothMap, x0, tol: float = 1e-12, max_iter: int = 60):
    x = np.asarray(x0, dtype=float)
    fx = np.asarray(smap(list(x)), dtype=float)
    for _ in range(max_iter):
        nrm = float(np.linalg.norm(fx))
        if nrm < tol:
            return [float(v) for v in x]
        J = np.asarray(smap.jacobian(list(x)), dtype=float)
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(30):
            xn = x + lam * step
            fn = np.asarray(smap(list(xn)), dtype=float)
            if float(np.linalg.norm(fn)) < nrm:
                break
            lam *= 0.5
        else:
            return None
        x, fx = xn, fn
    return None


def signed_zero_count(section, B: ChartDomain, zeros=None, grid: int = 7,
                      transversality_tol: float = 1e-6,
                      boundary_tol: float = 1e-6):
    """Zeros of a section over a chart, each signed by its vertical derivative.

    Zeros are polished by damped Newton, starting from the explicit list
    when given and from a coarse reference grid otherwise.  The sign of a
    zero is the sign of det(ds) in the ambient trivialization, so the
    identity section counts +1.  Returns (total, [(point, sign), ...]).
    """
    m = B.ambient_dim
    smap = SmoothMap(m, m, section)
    inside, bdist = _membership(B)
    if zeros is not None:
        starts = [list(z) for z in zeros]
    else:
        emb = B.embedding()
        axes = [[lo + (hi - lo) * (i + 0.5) / grid for i in range(grid)]
                for lo, hi in B.bounds]
        starts = []

        def fill(prefix, rest):
            if not rest:
                starts.append(emb(prefix))
                return
            for v in rest[0]:
                fill(prefix + [v], rest[1:])

        fill([], axes)
    found = []
    for x0 in starts:
        z = _newton(smap, x0)
        if z is None:
            continue
        if any(sum((a - b) ** 2 for a, b in zip(z, w)) < 1e-12 for w, _ in found):
            continue
        margin = bdist(z)
        if abs(margin) < boundary_tol:
            raise BoundaryZeroError(
                f"zero at {z} sits on the boundary (margin {margin:.3e})")
        if not inside(z):
            continue
        J = np.asarray(smap.jacobian(z), dtype=float)
        smin = float(np.linalg.svd(J, compute_uv=False)[-1])
        if smin < transversality_tol:
            raise TransversalityError(
                f"zero at {z} is degenerate (min singular value {smin:.3e})")
        sign = 1 if float(np.linalg.det(J)) > 0.0 else -1
        found.append((z, sign))
    return sum(s for _, s in found), found


def boundary_winding(section, B: ChartDomain) -> float:
    """Planar winding of a section along the boundary, an independent oracle.

    Integrates (s1 ds2 - s2 ds1) / (2 pi |s|^2) over the boundary faces;
    for a transversal planar section this equals the signed zero count.
    """
    if B.ambient_dim != 2:
        raise ChartError("winding oracle only applies to planar charts")
    smap = SmoothMap(2, 2, section)

    def comps(x):
        v, J = smap.value_and_jacobian(x)
        s1, s2 = v
        den = (s1 * s1 + s2 * s2) * (2.0 * math.pi)
        return [(s1 * J[1][c] - s2 * J[0][c]) / den for c in range(2)]

    w = Form(2, 1, comps)
    return sum(face.integrate(w) for face in B.boundary_faces())
