import numpy as np
import pytest

from rollsym import Euclidean, GeometryError, Hyperbolic, Sphere
from rollsym.curvature import wedge_matrix
from rollsym.brackets import (
    StructuredField,
    bracket_fd,
    bracket_field,
    bracket_structured,
    controllability_verdict,
    curvature_mismatch,
    double_bracket_identity_residual,
    flag_ranks,
    frame_field_derivative,
    rolling_generators,
)
from rollsym.rolling import RollingPair, TangentOfQ, q_dim, random_rotation
from rollsym.symmetry import killing_catalog

RNG = np.random.default_rng(31)

PAIRS = {
    "spheres_1_3": lambda: RollingPair(Sphere(2, 3.0), Sphere(2, 1.0)),  # mismatch -8/9
    "sphere_plane": lambda: RollingPair(Sphere(2, 1.0), Euclidean(2)),   # mismatch +1
    "hyp_sphere": lambda: RollingPair(Hyperbolic(2, 1.0), Sphere(2, 1.0)),  # mismatch -2
}


def frame_bracket(pair, q, i, j):
    """[E_i, E_j] at the contact point from the frame-field stencil."""
    n = pair.dim
    d_j = frame_field_derivative(pair.space, q.x, q.from_coords(np.eye(n)[i]))[j]
    d_i = frame_field_derivative(pair.space, q.x, q.from_coords(np.eye(n)[j]))[i]
    return d_j - d_i


def expected_generator_bracket(pair, q, i, j):
    n = pair.dim
    w = frame_bracket(pair, q, i, j)
    kappa = curvature_mismatch(pair)
    return TangentOfQ(q, w, q.apply(w), kappa * wedge_matrix(np.eye(n)[i], np.eye(n)[j]))


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_generator_bracket_identity_structured_and_fd(name):
    pair = PAIRS[name]()
    q = pair.random_state(RNG)
    gens = rolling_generators(pair)
    expected = expected_generator_bracket(pair, q, 0, 1).coords()
    got = bracket_structured(gens[0], gens[1], q).coords()
    assert np.abs(got - expected).max() < 1e-9
    got_fd = bracket_fd(gens[0], gens[1], q).coords()
    assert np.abs(got_fd - expected).max() < 1e-5
    assert np.abs(got_fd - got).max() < 1e-5


def test_bracket_antisymmetry_and_self_bracket():
    pair = PAIRS["spheres_1_3"]()
    q = pair.random_state(RNG)
    gens = rolling_generators(pair)
    b01 = bracket_structured(gens[0], gens[1], q).coords()
    b10 = bracket_structured(gens[1], gens[0], q).coords()
    assert np.abs(b01 + b10).max() < 1e-8
    assert np.abs(bracket_structured(gens[0], gens[0], q).coords()).max() < 1e-10


def test_flat_flat_coordinate_fields_commute():
    pair = RollingPair(Euclidean(2), Euclidean(2))
    q = pair.random_state(RNG)
    n = pair.dim

    def const_field(vec):
        return StructuredField(
            pair, lambda s: TangentOfQ(s, np.array(vec), s.apply(np.array(vec)), np.zeros((n, n)))
        )

    f1 = const_field([1.0, 0.0])
    f2 = const_field([0.0, 1.0])
    assert np.abs(bracket_structured(f1, f2, q).coords()).max() < 1e-9
    assert np.abs(bracket_fd(f1, f2, q).coords()).max() < 1e-8


def test_fd_bracket_reproduces_vertical_part_on_spheres():
    pair = PAIRS["spheres_1_3"]()
    q = pair.random_state(RNG)
    gens = rolling_generators(pair)
    fd = bracket_fd(gens[0], gens[1], q)
    assert abs(fd.C[0, 1] - (-8.0 / 9.0)) < 1e-5


def killing_induced_fields(pair, rng):
    """Structured test fields built from Killing data on both factors."""
    cat = killing_catalog(pair.space)
    cat_hat = killing_catalog(pair.space_hat)
    k1 = cat[rng.integers(len(cat))]
    k2 = cat_hat[rng.integers(len(cat_hat))]
    c0 = wedge_matrix(rng.standard_normal(pair.dim), rng.standard_normal(pair.dim))

    def value(q):
        return TangentOfQ(q, k1.value(q.x), k2.value(q.x_hat), c0)

    return StructuredField(pair, value)


def test_jacobi_identity_residual():
    pair = PAIRS["spheres_1_3"]()
    rng = np.random.default_rng(8)
    q = pair.random_state(rng)
    fields = [killing_induced_fields(pair, rng) for _ in range(3)]
    total = np.zeros(q_dim(pair.dim))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        inner = bracket_field(fields[b], fields[c])
        total = total + bracket_structured(fields[a], inner, q, h=1e-2).coords()
    assert np.abs(total).max() < 1e-4


def test_structured_vs_fd_on_random_fields():
    pair = PAIRS["sphere_plane"]()
    rng = np.random.default_rng(9)
    for _ in range(3):
        q = pair.random_state(rng)
        f1 = killing_induced_fields(pair, rng)
        f2 = killing_induced_fields(pair, rng)
        a = bracket_structured(f1, f2, q).coords()
        b = bracket_fd(f1, f2, q).coords()
        assert np.abs(a - b).max() < 1e-5


# -- growth vector ------------------------------------------------------------------


def test_flag_ranks_examples():
    pair = RollingPair(Sphere(2, 1.0), Sphere(2, 3.0))
    q = pair.random_state(RNG)
    rep = flag_ranks(q, depth=3)
    assert rep.ranks == (2, 3, 5)

    pair3 = RollingPair(Sphere(3, 1.0), Euclidean(3))
    q3 = pair3.random_state(RNG)
    rep3 = flag_ranks(q3, depth=3)
    assert rep3.ranks == (3, 6, 9)

    equal = RollingPair(Sphere(2, 1.0), Sphere(2, 1.0))
    qe = equal.random_state(RNG)
    repe = flag_ranks(qe, depth=3)
    assert repe.ranks == (2, 2, 2)  # the flag stalls at the distribution rank


def test_flag_report_invariants():
    pair = RollingPair(Sphere(2, 1.0), Euclidean(2))
    q = pair.random_state(RNG)
    rep = flag_ranks(q, depth=3)
    assert all(a <= b for a, b in zip(rep.ranks[:-1], rep.ranks[1:]))
    assert rep.ranks[-1] <= q_dim(pair.dim)
    data = rep.to_json()
    assert data["ranks"] == list(rep.ranks)


def test_flag_ranks_frame_independent():
    pair = RollingPair(Sphere(2, 1.0), Sphere(2, 3.0))
    q = pair.random_state(RNG)
    rot = random_rotation(np.random.default_rng(4), 2)
    assert flag_ranks(q, depth=3).ranks == flag_ranks(q, depth=3, rotation=rot).ranks


def test_flag_depth_guard():
    pair = RollingPair(Sphere(2, 1.0), Euclidean(2))
    q = pair.random_state(RNG)
    with pytest.raises(GeometryError):
        flag_ranks(q, depth=0)
    with pytest.raises(GeometryError):
        flag_ranks(q, depth=7)


def test_controllability_verdict():
    pair = RollingPair(Sphere(2, 1.0), Sphere(2, 3.0))
    assert controllability_verdict(pair.random_state(RNG))
    pair3 = RollingPair(Sphere(3, 1.0), Euclidean(3))
    assert controllability_verdict(pair3.random_state(RNG))
    equal = RollingPair(Sphere(2, 2.0), Sphere(2, 2.0))
    assert not controllability_verdict(equal.random_state(RNG))


def test_equiregularity_across_states():
    pair = RollingPair(Sphere(2, 1.0), Hyperbolic(2, 1.0))
    rng = np.random.default_rng(17)
    growths = {flag_ranks(pair.random_state(rng), depth=3).ranks for _ in range(20)}
    assert growths == {(2, 3, 5)}


def test_structured_vs_fd_over_hundred_states():
    catalog_pairs = [
        RollingPair(Sphere(2, 3.0), Sphere(2, 1.0)),
        RollingPair(Sphere(2, 1.0), Euclidean(2)),
        RollingPair(Hyperbolic(2, 1.0), Sphere(2, 1.0)),
        RollingPair(Euclidean(2), Hyperbolic(2, 2.0)),
    ]
    rng = np.random.default_rng(23)
    worst = 0.0
    for k in range(100):
        pair = catalog_pairs[k % len(catalog_pairs)]
        q = pair.random_state(rng)
        gens = rolling_generators(pair)
        a = bracket_structured(gens[0], gens[1], q).coords()
        b = bracket_fd(gens[0], gens[1], q).coords()
        worst = max(worst, float(np.abs(a - b).max()))
    assert worst < 1e-5


# -- double bracket -----------------------------------------------------------------


def test_double_bracket_identity_on_three_pairs():
    # identity coefficient is K_hat - K; the pair below realizes -8/9
    pair = RollingPair(Sphere(2, 1.0), Sphere(2, 3.0))
    rng = np.random.default_rng(5)
    q = pair.random_state(rng)
    fr = q.frame
    assert double_bracket_identity_residual(q, fr[0], fr[1], fr[0]) < 1e-5

    pair2 = RollingPair(Hyperbolic(2, 1.0), Sphere(2, 1.0))
    q2 = pair2.random_state(rng)
    fr2 = q2.frame
    assert double_bracket_identity_residual(q2, fr2[0], fr2[1], fr2[0]) < 1e-5


def test_double_bracket_orthogonal_triple_vanishes():
    pair = RollingPair(Sphere(3, 1.0), Euclidean(3))
    q = pair.random_state(RNG)
    fr = q.frame
    assert double_bracket_identity_residual(q, fr[0], fr[1], fr[2]) < 1e-5


def test_double_bracket_zero_mismatch():
    pair = RollingPair(Sphere(2, 1.0), Sphere(2, 1.0))
    q = pair.random_state(RNG)
    fr = q.frame
    assert double_bracket_identity_residual(q, fr[0], fr[1], fr[0]) < 1e-5


def test_double_bracket_requires_constant_curvature():
    from rollsym import WarpFunction, Warped

    warped = Warped((-1.2, 1.2), WarpFunction("cosh"), Sphere(1, 1.0))
    pair = RollingPair(warped, Euclidean(2))
    q = pair.random_state(RNG)
    with pytest.raises(GeometryError):
        double_bracket_identity_residual(q, q.frame[0], q.frame[1], q.frame[0])


def test_structured_field_vertical_data_is_skew_checked():
    pair = RollingPair(Sphere(2, 1.0), Euclidean(2))
    q = pair.random_state(RNG)

    bad = StructuredField(
        pair,
        lambda s: TangentOfQ(s, np.zeros(3), np.zeros(2), np.array([[0.0, 1.0], [0.5, 0.0]])),
    )
    with pytest.raises(GeometryError):
        bad.value(q)
