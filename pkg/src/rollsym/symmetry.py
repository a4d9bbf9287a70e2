"""Infinitesimal symmetries of the rolling distribution.

A symmetry candidate is a triple of bundle maps (Z, Z_hat, U_bar): a drift
on each factor plus a vertical part, subject to two first-order equations
that characterize when the associated field preserves the rolling
distribution:

    U_bar(q) X = -A D_X Z + D_X Z_hat                      (drift equation)
    D_X U_bar  = -A R(X ^ Z) + R_hat(AX ^ Z_hat) A         (curvature equation)

with D_X the derivative along rolling curves.  Candidates with Z = 0 form
the base-fixing class (tagged 'sym0'); every Killing field of the second
factor induces one through Z_hat(q) = K_hat at the contact point and
U_bar(q) = (nabla K_hat) A, and the evaluation data (Z_hat(q0), A0^{-1}
U_bar(q0)) of such candidates spans at most n(n+1)/2 dimensions.

All residual checkers evaluate candidates through finite-difference
stencils, so user-supplied closures are tested against the actual
definitions rather than against their own derivative formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .curvature import skew_part, skew_to_vector, so_pairs, wedge_matrix
from .spaces import _rk4
from .rolling import (
    RollingPair,
    RollingState,
    det_transport_matrix,
    rolling_derivative,
    rolling_lift,
    tangent_curve,
    vertical_derivative,
)
from .curvature import rolling_curvature
from .spaces import Euclidean, GeometryError, Hyperbolic, SpaceForm, Sphere

KIND_TAGS = ("general", "sym0", "inner", "killing-induced")


# -- Killing fields of the catalog manifolds -----------------------------------


class KillingField:
    """Killing field of a constant-curvature catalog manifold, given by a
    linear generator of the ambient isometry group.

    For spheres the generator is skew, for hyperbolic spaces it is skew with
    respect to the Minkowski form, and for Euclidean spaces it splits into a
    skew matrix plus a constant translation part.  The covariant differential
    is the tangential compression of the generator and is skew at every
    point; its second covariant derivative reproduces the curvature term
    R(X ^ K), which is what makes the induced symmetry candidate close.
    """

    def __init__(self, manifold: SpaceForm, generator, translation=None, name=""):
        self.manifold = manifold
        self.generator = None if generator is None else np.asarray(generator, float)
        self.translation = None if translation is None else np.asarray(translation, float)
        self.name = name

    def value(self, x):
        out = np.zeros(self.manifold.amb_dim)
        if self.generator is not None:
            out = out + self.generator @ x
        if self.translation is not None:
            out = out + self.translation
        return self.manifold.project(x, out)

    def nabla_matrix(self, x):
        """Matrix of the covariant differential in the deterministic frame."""
        m = self.manifold
        fr = m.frame(x)
        n = m.dim
        if self.generator is None:
            return np.zeros((n, n))
        out = np.empty((n, n))
        for b in range(n):
            col = m.project(x, self.generator @ fr[b])
            for a in range(n):
                out[a, b] = m.inner_at(x, col, fr[a])
        return out

    def derivative_along(self, x, v):
        """Covariant derivative of the field along v at x, in closed form."""
        m = self.manifold
        if self.generator is None:
            return np.zeros(m.amb_dim)
        return m.project(x, self.generator @ v)


def killing_catalog(manifold: SpaceForm):
    """The full Killing algebra of a constant-curvature catalog manifold:
    exactly n(n+1)/2 fields."""
    n = manifold.dim
    fields = []
    if isinstance(manifold, Euclidean):
        for k in range(n):
            t = np.zeros(n)
            t[k] = 1.0
            fields.append(KillingField(manifold, None, t, name=f"translation-{k}"))
        for i, j in so_pairs(n):
            gen = np.zeros((n, n))
            gen[i, j] = -1.0
            gen[j, i] = 1.0
            fields.append(KillingField(manifold, gen, name=f"rotation-{i}{j}"))
    elif isinstance(manifold, Sphere):
        for i, j in so_pairs(n + 1):
            gen = np.zeros((n + 1, n + 1))
            gen[i, j] = -1.0
            gen[j, i] = 1.0
            fields.append(KillingField(manifold, gen, name=f"rotation-{i}{j}"))
    elif isinstance(manifold, Hyperbolic):
        for i, j in so_pairs(n + 1):
            gen = np.zeros((n + 1, n + 1))
            if i == 0:
                gen[0, j] = 1.0
                gen[j, 0] = 1.0
                name = f"boost-{j}"
            else:
                gen[i, j] = -1.0
                gen[j, i] = 1.0
                name = f"rotation-{i}{j}"
            fields.append(KillingField(manifold, gen, name=name))
    else:
        raise GeometryError(
            "the Killing catalog covers constant-curvature manifolds only; "
            f"got kind {manifold.kind!r}"
        )
    return fields


def standard_contact_field(manifold: SpaceForm) -> KillingField:
    """The standard contact (characteristic) field of an odd-dimensional
    unit sphere: x -> J x for the block rotation J pairing consecutive
    ambient coordinates.

    This is the constant-curvature instance of the contact-geometry example
    of an inner symmetry: rolling the unit sphere on itself, the lift of
    this unit field preserves the rolling distribution.  The general
    contact-geometry version (non-constant curvature) is outside the
    catalog.
    """
    if not isinstance(manifold, Sphere) or manifold.dim % 2 == 0 or manifold.radius != 1.0:
        raise GeometryError("the standard contact field lives on odd-dimensional unit spheres")
    n_amb = manifold.amb_dim
    gen = np.zeros((n_amb, n_amb))
    for k in range(0, n_amb - 1, 2):
        gen[k, k + 1] = -1.0
        gen[k + 1, k] = 1.0
    return KillingField(manifold, gen, name="contact")


def killing_ode_residual(field: KillingField, x, v, h=1e-4, order=4):
    """Residual of the second-order Killing identity
    nabla_v (nabla K) = R(v ^ K) at x, as a frame matrix norm."""
    m = field.manifold

    def sample(t):
        xt, vt = m.geodesic_flow(x, v, t)
        mat = field.nabla_matrix(xt)
        p = det_transport_matrix(m, x, v, t)
        return p.T @ mat @ p

    if order == 4:
        d = (-sample(2 * h) + 8 * sample(h) - 8 * sample(-h) + sample(-2 * h)) / (12 * h)
    else:
        d = (sample(h) - sample(-h)) / (2 * h)
    fr = m.frame(x)
    a = m.frame_coords(x, fr, v)
    b = m.frame_coords(x, fr, field.value(x))
    expected = m.curvature_matrix_apply(x, wedge_matrix(a, b))
    return float(np.linalg.norm(d - expected))


# -- symmetry candidates ----------------------------------------------------------


class SymmetryCandidate:
    """Closure triple (Z, Z_hat, U_bar) with a kind tag.

    Z and Z_hat map states to ambient tangent vectors at the respective
    contact points (Z may be None, meaning identically zero); U_bar maps
    states to the deterministic-frame matrix of a map T_x M -> T_xhat Mhat
    with A^{-1} U_bar skew.  Kinds: 'general'; 'sym0' forces Z = 0;
    'killing-induced' is the sym0 subclass built from a Killing field;
    'inner' forces Z_hat = A Z and U_bar = 0.
    """

    def __init__(self, pair: RollingPair, kind, Z=None, Z_hat=None, U_bar=None, name=""):
        if kind not in KIND_TAGS:
            raise GeometryError(f"unknown candidate kind {kind!r}")
        self.pair = pair
        self.kind = kind
        self._Z = Z
        self._Z_hat = Z_hat
        self._U_bar = U_bar
        self.name = name

    def Z(self, q):
        if self._Z is None or self.kind in ("sym0", "killing-induced"):
            return np.zeros(self.pair.space.amb_dim)
        return np.asarray(self._Z(q), float)

    def Z_hat(self, q):
        if self.kind == "inner":
            return q.apply(self.Z(q))
        if self._Z_hat is None:
            return np.zeros(self.pair.space_hat.amb_dim)
        return np.asarray(self._Z_hat(q), float)

    def U_bar(self, q):
        n = self.pair.dim
        if self.kind == "inner" or self._U_bar is None:
            return np.zeros((n, n))
        return np.asarray(self._U_bar(q), float)

    def is_base_fixing(self):
        return self.kind in ("sym0", "killing-induced")

    def validate(self, q, tol=1e-10):
        """Check the structural invariant A^{-1} U_bar in so(n) at a state;
        returns the skewness residual, raising when it exceeds tol."""
        pulled = q.isometry.T @ self.U_bar(q)
        skew_res = float(np.abs(pulled + pulled.T).max())
        if skew_res > tol:
            raise GeometryError(f"A^-1 U_bar is not skew (residual {skew_res:.3e})")
        return skew_res


def killing_to_symmetry(pair: RollingPair, field: KillingField) -> SymmetryCandidate:
    """Base-fixing symmetry candidate induced by a Killing field of the
    second factor: Z_hat is the field at the contact point and U_bar its
    covariant differential composed with the contact map."""
    if field.manifold is not pair.space_hat:
        raise GeometryError("Killing field must live on the second factor of the pair")
    return SymmetryCandidate(
        pair,
        "killing-induced",
        Z_hat=lambda q: field.value(q.x_hat),
        U_bar=lambda q: field.nabla_matrix(q.x_hat) @ q.isometry,
        name=f"killing({field.name})",
    )


def perturb_candidate(cand: SymmetryCandidate, eps, rng) -> SymmetryCandidate:
    """Add a fixed random skew perturbation of size eps to U_bar; used to
    check that the residual operations reject near-symmetries."""
    n = cand.pair.dim
    noise = skew_part(rng.standard_normal((n, n)))
    noise *= eps / max(np.abs(noise).max(), 1e-300)

    return SymmetryCandidate(
        cand.pair,
        cand.kind,
        Z=cand._Z,
        Z_hat=cand._Z_hat,
        U_bar=lambda q: cand.U_bar(q) + q.isometry @ noise,
        name=cand.name + f"+skew({eps:g})",
    )


# -- residual operations ------------------------------------------------------------


def symmetry_residual(cand: SymmetryCandidate, q: RollingState, X, h=1e-4):
    """Residual pair of the two symmetry equations at (q, X), with the
    rolling derivatives evaluated by stencils."""
    pair = q.pair
    X = np.asarray(X, float)
    d_zhat = rolling_derivative(lambda s: cand.Z_hat(s), q, X, "vector_hat", h=h)
    u_x = q.from_coords_hat(cand.U_bar(q) @ q.coords(X))
    if cand.is_base_fixing():
        r1_vec = u_x - d_zhat
    else:
        d_z = rolling_derivative(lambda s: cand.Z(s), q, X, "vector", h=h)
        r1_vec = u_x + q.apply(d_z) - d_zhat
    r1 = math.sqrt(pair.space_hat.inner_at(q.x_hat, r1_vec, r1_vec))

    d_u = rolling_derivative(lambda s: cand.U_bar(s), q, X, "map", h=h)
    a = q.isometry
    r_term = np.zeros((pair.dim, pair.dim))
    if not cand.is_base_fixing():
        z = cand.Z(q)
        r_term = a @ pair.space.curvature_matrix_apply(
            q.x, wedge_matrix(q.coords(X), q.coords(z))
        )
    zh = cand.Z_hat(q)
    rh_term = pair.space_hat.curvature_matrix_apply(
        q.x_hat, wedge_matrix(q.coords_hat(q.apply(X)), q.coords_hat(zh))
    ) @ a
    r2 = float(np.linalg.norm(d_u + r_term - rh_term))
    return r1, r2


def sym0_residual(cand: SymmetryCandidate, q: RollingState, X, h=1e-4):
    """Residuals of the base-fixing characterization (the Z terms dropped)."""
    if not cand.is_base_fixing():
        raise GeometryError("sym0 residual requires a base-fixing candidate")
    return symmetry_residual(cand, q, X, h=h)


def inner_symmetry_residual(Z, q: RollingState) -> float:
    """Largest rolling-curvature norm over frame planes through Z(q):
    max_i || Rol_q(E_i ^ Z) ||.  Zero certifies the inner-symmetry
    hypothesis at q."""
    n = q.pair.dim
    z = Z(q) if callable(Z) else np.asarray(Z, float)
    zc = q.coords(z)
    worst = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        mat = rolling_curvature(q, wedge_matrix(e, zc))
        worst = max(worst, float(np.linalg.norm(mat)))
    return worst


def vertical_compatibility_residual(cand: SymmetryCandidate, q: RollingState, X, Y,
                                    h=1e-5) -> float:
    """Residual of the fiber-derivative compatibility along the rolling
    curvature direction of the plane (X, Y):

        A . (d_fiber Z) = d_fiber Z_hat   along  nu(Rol_q(X ^ Y)).
    """
    pair = q.pair
    xi = wedge_matrix(q.coords(np.asarray(X, float)), q.coords(np.asarray(Y, float)))
    b = rolling_curvature(q, xi)
    c = skew_part(q.isometry.T @ b)
    if np.abs(c).max() < 1e-14:
        return 0.0
    d_z = vertical_derivative(lambda s: cand.Z(s), q, c, "vector", h=h)
    d_zhat = vertical_derivative(lambda s: cand.Z_hat(s), q, c, "vector_hat", h=h)
    diff = q.apply(d_z) - d_zhat
    return math.sqrt(pair.space_hat.inner_at(q.x_hat, diff, diff))


# -- propagation along rolling curves ---------------------------------------------


@dataclass
class PropagationResult:
    times: np.ndarray
    states: list
    Z_hat: list
    U_bar: list

    def final(self):
        return self.states[-1], self.Z_hat[-1], self.U_bar[-1]


def propagate_sym0(q1: RollingState, X, Z_hat_0, U_bar_0, t_grid) -> PropagationResult:
    """Propagate base-fixing symmetry data along the rolling curve driven by
    the geodesic through (x1, X).

    The drift value follows the geodesic-variation equation on the second
    factor (integrated by RK4 in a parallel frame) and the vertical part
    follows its transport-integral formula, evaluated with composite Simpson
    quadrature on the supplied grid.
    """
    pair = q1.pair
    m, mh = pair.space, pair.space_hat
    n = pair.dim
    t_grid = np.asarray(t_grid, float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise GeometryError("time grid must start at 0 and increase")
    X = np.asarray(X, float)
    v_hat = q1.apply(X)

    # parallel frame along the development geodesic
    fr1_hat = q1.frame_hat

    def par_frame(t):
        return np.array(
            [mh.transport_along_geodesic(q1.x_hat, v_hat, t, fr1_hat[k]) for k in range(n)]
        )

    def jacobi_rhs(t, y):
        eta, deta = y[:n], y[n:]
        xt, vt = mh.geodesic_flow(q1.x_hat, v_hat, t)
        frt = par_frame(t)
        y_amb = frt.T @ eta
        frame_det = mh.frame(xt)
        a = mh.frame_coords(xt, frame_det, vt)
        b = mh.frame_coords(xt, frame_det, y_amb)
        r_apply = frame_det.T @ (mh.curvature_matrix_apply(xt, wedge_matrix(a, b)) @ a)
        dd = np.array([mh.inner_at(xt, r_apply, frt[k]) for k in range(n)])
        return np.concatenate((deta, dd))

    eta0 = np.array([mh.inner_at(q1.x_hat, np.asarray(Z_hat_0, float), fr1_hat[k]) for k in range(n)])
    deta0 = np.asarray(U_bar_0, float) @ q1.coords(X)

    etas = [np.concatenate((eta0, deta0))]
    for a, b in zip(t_grid[:-1], t_grid[1:]):
        etas.append(_rk4(jacobi_rhs, etas[-1], a, b, max(2, int(math.ceil((b - a) / 1e-3)))))

    states = [tangent_curve(q1, rolling_lift(q1, X), t) for t in t_grid]
    z_hats = []
    integrand = []
    p_hats = []
    for t, y in zip(t_grid, etas):
        frt = par_frame(t)
        y_amb = frt.T @ y[:n]
        z_hats.append(y_amb)
        xt, vt = mh.geodesic_flow(q1.x_hat, v_hat, t)
        frame_det = mh.frame(xt)
        a = mh.frame_coords(xt, frame_det, vt)
        b = mh.frame_coords(xt, frame_det, y_amb)
        r_mat = mh.curvature_matrix_apply(xt, wedge_matrix(a, b))
        p_hat = det_transport_matrix(mh, q1.x_hat, v_hat, t)
        p_hats.append(p_hat)
        integrand.append(p_hat.T @ r_mat @ p_hat)

    integrand = np.array(integrand)
    if len(t_grid) > 1:
        integral = cumulative_simpson(integrand, x=t_grid, axis=0, initial=0.0)
    else:
        integral = np.zeros_like(integrand)

    u1 = np.asarray(U_bar_0, float)
    a1 = q1.isometry
    u_bars = []
    for k, t in enumerate(t_grid):
        p = det_transport_matrix(m, q1.x, X, t)
        u_bars.append(p_hats[k] @ (u1 + integral[k] @ a1) @ p.T)
    return PropagationResult(t_grid, states, z_hats, u_bars)


def propagate_chain(q0: RollingState, segments, Z_hat_0, U_bar_0, samples_per_segment=48):
    """Propagate along a broken-geodesic chain; each segment is (X, length).
    Returns the final state and data."""
    q = q0
    z, u = np.asarray(Z_hat_0, float), np.asarray(U_bar_0, float)
    for X, length in segments:
        grid = np.linspace(0.0, length, samples_per_segment + 1)
        res = propagate_sym0(q, X, z, u, grid)
        q, z, u = res.final()
    return q, z, u


# -- dimension probe -------------------------------------------------------------------


@dataclass
class DimensionReport:
    rank: int
    singular_values: np.ndarray
    gap: float
    tol: float

    def to_json(self):
        return {
            "rank": self.rank,
            "singular_values": self.singular_values.tolist(),
            "gap": None if math.isinf(self.gap) else self.gap,
            "tol": self.tol,
        }


def sym0_dimension_probe(q0: RollingState, candidates, tol=1e-8) -> DimensionReport:
    """Numerical rank of the evaluation data (Z_hat(q0), A0^{-1} U_bar(q0))
    over a list of base-fixing candidates.  The data determines the
    candidate along the reachable set, so the rank bounds the dimension of
    the base-fixing symmetry space; the full Killing catalog realizes
    n(n+1)/2."""
    rows = []
    for cand in candidates:
        if not cand.is_base_fixing():
            raise GeometryError("dimension probe requires base-fixing candidates")
        zh = q0.coords_hat(cand.Z_hat(q0))
        u = skew_part(q0.isometry.T @ cand.U_bar(q0))
        rows.append(np.concatenate((zh, skew_to_vector(u))))
    mat = np.array(rows)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0.0:
        return DimensionReport(0, sv, math.inf, tol)
    rank = int(np.sum(sv > tol * sv[0]))
    gap = math.inf
    if rank < len(sv) and sv[rank] > 0:
        gap = sv[rank - 1] / sv[rank]
    return DimensionReport(rank, sv, gap, tol)
