import math
import random

import pytest

from cgbv import dual
from cgbv.bundles import (AssociatedBundles, ODD_REGISTRY, OddRankTriple,
                          REGISTRY, Subbundle, TrivializedBundle,
                          frame_split_connection, make_bundle, point_base,
                          projected_connection, rank_extension,
                          section_splitting_connection, section_transgression,
                          stereographic, stereographic_total, total_connection)
from cgbv.chern_weil import Connection, transgression
from cgbv.errors import (ChartError, ProjectorError, RankError, ShapeError,
                         VanishingSectionError)
from cgbv.forms import MatrixForm, SmoothMap
from cgbv.geometry import ChartDomain

TWO_PI = 2.0 * math.pi


def random_skew(n: int, m: int, seed: int) -> Connection:
    rng = random.Random(seed)
    coefs = [[[[rng.uniform(-1.0, 1.0) for _ in range(3)]
               for _ in range(n)] for _ in range(m)] for _ in range(m)]

    def ev(x):
        out = [[[0.0] * n for _ in range(m)] for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                for c in range(n):
                    a, b, cc = coefs[i][j][c]
                    val = a + b * x[0] + cc * x[0] * x[-1]
                    out[i][j][c] = val
                    out[j][i][c] = -val
        return out

    return Connection(m, MatrixForm(n, 1, m, ev))


def max_entry(A) -> float:
    return max((abs(v) for row in A for e in row for v in e), default=0.0)


def mat_diff(A, B) -> float:
    return max(abs(a - b) for r1, r2 in zip(A, B)
               for e1, e2 in zip(r1, r2) for a, b in zip(e1, e2))


class TestProjectedConnection:
    def test_circle_line_potential(self):
        # projecting the flat plane bundle over S^1 onto the rotating line
        # span(cos, sin) gives exactly the angular potential J dpsi
        conn = Connection.flat(2, 1)
        sub = Subbundle(2, lambda x: [
            [dual.cos(x[0]) ** 2, dual.cos(x[0]) * dual.sin(x[0])],
            [dual.cos(x[0]) * dual.sin(x[0]), dual.sin(x[0]) ** 2]])
        split = projected_connection(conn, sub)
        for psi in (0.0, 0.4, 1.9, 4.4):
            A = split.A.eval([psi])
            assert A[0][0][0] == pytest.approx(0.0, abs=1e-12)
            assert A[1][1][0] == pytest.approx(0.0, abs=1e-12)
            assert A[0][1][0] == pytest.approx(1.0, abs=1e-12)
            assert A[1][0][0] == pytest.approx(-1.0, abs=1e-12)

    def test_identity_projector_returns_connection(self):
        conn = random_skew(2, 2, 30)
        eye = Subbundle(2, lambda x: [[1.0, 0.0], [0.0, 1.0]])
        out = projected_connection(conn, eye)
        for x in ([0.3, 0.1], [-0.5, 0.9]):
            assert mat_diff(out.A.eval(x), conn.A.eval(x)) < 1e-12

    def test_constant_projector_on_flat_is_flat(self):
        conn = Connection.flat(3, 2)
        sub = Subbundle(3, lambda x: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                                      [0.0, 0.0, 0.0]])
        out = projected_connection(conn, sub)
        assert max_entry(out.A.eval([0.2, -0.7])) == 0.0

    def test_projector_defect_raises(self):
        conn = Connection.flat(2, 1)
        bad = Subbundle(2, lambda x: [[0.9, 0.0], [0.0, 0.0]], "bad")
        with pytest.raises(ProjectorError):
            projected_connection(conn, bad, check_points=[[0.0]])

    def test_rank_mismatch(self):
        with pytest.raises(ShapeError):
            projected_connection(Connection.flat(2, 1),
                                 Subbundle(3, lambda x: [[1.0] * 3] * 3))


class TestSectionSplitting:
    def test_scale_invariance(self):
        conn = random_skew(2, 2, 31)
        s1 = lambda x: [dual.cos(x[0]), dual.sin(x[0] + x[1])]
        s3 = lambda x: [3.0 * v for v in s1(x)]
        a = section_splitting_connection(conn, s1)
        b = section_splitting_connection(conn, s3)
        for x in ([0.3, 0.1], [1.0, -0.4]):
            assert mat_diff(a.A.eval(x), b.A.eval(x)) < 1e-12

    def test_constant_section_on_flat_is_flat(self):
        conn = Connection.flat(2, 2)
        out = section_splitting_connection(conn, lambda x: [1.0, 0.0])
        assert max_entry(out.A.eval([0.5, 0.5])) == 0.0

    def test_vanishing_at_evaluation(self):
        conn = Connection.flat(2, 1)
        out = section_splitting_connection(conn, lambda x: [x[0], 0.0])
        with pytest.raises(VanishingSectionError):
            out.A.eval([0.0])

    def test_vanishing_at_check_points(self):
        conn = Connection.flat(2, 1)
        with pytest.raises(VanishingSectionError):
            section_splitting_connection(conn, lambda x: [x[0], 0.0],
                                         check_points=[[1.0], [1e-12]])

    def test_circle_winding_transgression(self):
        # the unit section winding once around the plane bundle over [0, 2pi]
        # transgresses to total winding -1
        base = ChartDomain.interval("psi", 0.0, TWO_PI, 16)
        conn = Connection.flat(2, 1)
        T = section_transgression(conn, lambda x: [dual.cos(x[0]), dual.sin(x[0])])
        assert base.integrate(T) == pytest.approx(-1.0, abs=1e-10)


class TestFrameSplit:
    def test_full_constant_frame_trivializes(self):
        conn = random_skew(2, 3, 32)
        frames = [lambda x: [1.0, 0.0, 0.0], lambda x: [0.0, 1.0, 0.0],
                  lambda x: [0.0, 0.0, 1.0]]
        out = frame_split_connection(conn, frames)
        assert max_entry(out.A.eval([0.4, -0.2])) == 0.0

    def test_gram_defect_raises(self):
        conn = Connection.flat(2, 1)
        with pytest.raises(ProjectorError):
            frame_split_connection(conn, [lambda x: [1.0, 1.0]],
                                   check_points=[[0.0]])

    def test_single_frame_matches_section_split_on_flat(self):
        # over a flat bundle both constructions reduce to the projector terms
        conn = Connection.flat(2, 1)
        u = lambda x: [dual.cos(x[0]), dual.sin(x[0])]
        a = frame_split_connection(conn, [u])
        b = section_splitting_connection(conn, u)
        for psi in (0.1, 2.2):
            A, B = a.A.eval([psi]), b.A.eval([psi])
            # both make u parallel: compare the compressed so(2) block
            assert A[0][1][0] == pytest.approx(B[0][1][0], abs=1e-10)


class TestStereographic:
    def test_pinned_values(self):
        st = stereographic(3)
        assert st([0.0, 0.0, 0.0]) == pytest.approx([1.0, 0.0, 0.0, 0.0])
        assert st([1.0, 0.0, 0.0]) == pytest.approx([0.0, 1.0, 0.0, 0.0])
        assert st([2.0, 0.0, 0.0]) == pytest.approx([-0.6, 0.8, 0.0, 0.0])

    def test_unit_norm(self):
        st = stereographic(2)
        rng = random.Random(33)
        for _ in range(20):
            v = [rng.uniform(-3, 3), rng.uniform(-3, 3)]
            w = st(v)
            assert sum(x * x for x in w) == pytest.approx(1.0, abs=1e-12)

    def test_total_chart_passes_base_through(self):
        st = stereographic_total(2, 2)
        out = st([0.0, 0.0, 0.7, -0.3])
        assert out == pytest.approx([1.0, 0.0, 0.0, 0.7, -0.3])


class TestLifts:
    def test_total_connection_shifts_coefficients(self):
        conn = random_skew(2, 2, 34)
        lifted = total_connection(conn, 3)
        x = [9.0, 9.0, 9.0, 0.3, 0.4]  # fiber coords must be ignored
        A = lifted.A.eval(x)
        B = conn.A.eval([0.3, 0.4])
        for i in range(2):
            for j in range(2):
                assert A[i][j][:3] == [0.0, 0.0, 0.0]
                assert A[i][j][3:] == pytest.approx(B[i][j])

    def test_rank_extension_blocks(self):
        conn = random_skew(2, 2, 35)
        ext = rank_extension(conn)
        assert ext.rank == 3
        x = [0.2, -0.6]
        A = ext.A.eval(x)
        B = conn.A.eval(x)
        assert all(v == 0.0 for v in A[0][0] + A[0][1] + A[1][0])
        for i in range(2):
            for j in range(2):
                assert A[i + 1][j + 1] == pytest.approx(B[i][j])


class TestAssociatedBundles:
    def test_chart_dimensions(self):
        assoc = AssociatedBundles(make_bundle("tangent-s2"))
        assert assoc.se.fiber.dim == 1 and assoc.se.fiber.ambient_dim == 2
        assert assoc.de.fiber.dim == 2 and assoc.de.fiber.ambient_dim == 2
        assert assoc.sre.fiber.dim == 2 and assoc.sre.fiber.ambient_dim == 3

    def test_tautological_section(self):
        assoc = AssociatedBundles(make_bundle("tangent-s2"))
        s = assoc.tautological_section()
        assert s([0.3, 0.4, 9.0, 9.0]) == [0.3, 0.4]


def sphere_points(m: int, count: int, seed: int):
    """Random unit vectors in R^m."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        v = [rng.gauss(0.0, 1.0) for _ in range(m)]
        r = math.sqrt(sum(x * x for x in v))
        if r > 0.3:
            out.append([x / r for x in v])
    return out


class TestOddRankTriple:
    def test_even_rank_rejected(self):
        with pytest.raises(RankError):
            OddRankTriple(make_bundle("flat-rank2-disk"))

    def test_connections_are_skew(self):
        tri = OddRankTriple(make_bundle("odd-rank3-point"))
        pts = sphere_points(4, 8, 36)
        for conn in (tri.ambient, tri.split, tri.plane_split):
            assert conn.skew_residual(pts) < 1e-12

    def test_rank1_split_is_angular_potential(self):
        tri = OddRankTriple(make_bundle("odd-rank1-point"))
        for a in (0.3, 1.1, 2.8, 5.0):
            c, s = math.cos(a), math.sin(a)
            A = tri.split.A.eval([c, s])
            assert A[0][1] == pytest.approx([-s, c], abs=1e-12)
            assert A[1][0] == pytest.approx([s, -c], abs=1e-12)
            assert max(abs(v) for v in A[0][0] + A[1][1]) < 1e-12

    def test_equator_restrictions_agree(self):
        # restricted to the equator sphere, the section splitting and the
        # plane splitting produce the same potential
        tri = OddRankTriple(make_bundle("odd-rank3-point"))
        r1 = tri.split.pullback(tri.equator)
        r3 = tri.plane_split.pullback(tri.equator)
        for pt in ([0.5, 1.0], [1.2, 2.0], [2.4, 5.1], [0.9, 0.1]):
            assert mat_diff(r1.A.eval(pt), r3.A.eval(pt)) < 1e-10

    def test_rank1_equator_is_none(self):
        tri = OddRankTriple(make_bundle("odd-rank1-point"))
        assert tri.equator is None

    def test_ambient_plane_transgression_vanishes_on_equator(self):
        # the constant frame vector stays parallel for both endpoints, so
        # the transgression vanishes as an ambient form along |u| = 1, x0 = 0
        tri = OddRankTriple(make_bundle("odd-rank3-point"))
        T = transgression(tri.ambient, tri.plane_split, t_order=8)
        for u in sphere_points(3, 6, 37):
            vals = T([0.0] + u)
            assert max(abs(v) for v in vals) < 1e-8

    def test_restricted_transgressions_degenerate(self):
        # on the equator chart the transgression degree exceeds the
        # dimension; the restrictions are empty zero forms
        tri = OddRankTriple(make_bundle("odd-rank3-point"))
        for other in (tri.split, tri.ambient):
            T = transgression(other, tri.plane_split, t_order=8)
            restricted = T.pullback(tri.equator)
            assert restricted([0.5, 1.0]) == []

    def test_rank1_transgression_vanishes_at_equator_points(self):
        tri = OddRankTriple(make_bundle("odd-rank1-point"))
        T = transgression(tri.ambient, tri.plane_split, t_order=8)
        for u in (1.0, -1.0):
            assert max(abs(v) for v in T([0.0, u])) < 1e-12

    def test_rank1_sre_integral(self):
        tri = OddRankTriple(make_bundle("odd-rank1-point"))
        T = transgression(*tri.ordered_pair("split-first"))
        val = tri.sre.fiber_integrate(T)([])
        assert val[0] == pytest.approx(-1.0, abs=1e-10)

    def test_ordering_labels(self):
        tri = OddRankTriple(make_bundle("odd-rank1-point"))
        a, b = tri.ordered_pair("split-first")
        assert (a.label, b.label) == ("split", "ambient")
        a, b = tri.ordered_pair("ambient-first")
        assert (a.label, b.label) == ("ambient", "split")
        with pytest.raises(ChartError):
            tri.ordered_pair("sideways")

    def test_pole_sections_agree_over_base(self):
        # along the poles u = (+-1, 0, ..., 0) the tautological projector is
        # constant, so split and ambient potentials restrict identically
        base = ChartDomain.interval("x", -1.0, 1.0, 8)
        conn = random_skew(1, 3, 38)
        tri = OddRankTriple(TrivializedBundle(3, base, conn, "line-test"))
        for sign in (1.0, -1.0):
            pole = SmoothMap(1, 5, lambda b, s=sign: [s, 0.0, 0.0, 0.0, b[0]])
            a = tri.split.pullback(pole)
            b = tri.ambient.pullback(pole)
            for x in ([0.3], [-0.8]):
                assert mat_diff(a.A.eval(x), b.A.eval(x)) < 1e-10


class TestRegistry:
    def test_all_entries_construct(self):
        for name in REGISTRY:
            bundle = make_bundle(name)
            assert bundle.label == name or bundle.label

    def test_unknown_name(self):
        with pytest.raises(ChartError):
            make_bundle("klein-bottle")

    def test_odd_registry_builds_triples(self):
        for name in ODD_REGISTRY:
            tri = OddRankTriple(make_bundle(name))
            assert tri.total_rank % 2 == 0

    def test_point_base(self):
        pt = point_base()
        assert pt.dim == 0 and pt.ambient_dim == 0
