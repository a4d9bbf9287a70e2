"""Graded nilpotent approximation of the rolling distribution and the
non-flatness obstruction arithmetic.

The approximation is the step-3 graded Lie algebra R^n + so(n) + R^n with
brackets

    [(a,0,0), (a',0,0)] = (0, a ^ a', 0)
    [(a,0,0), (0,B,0)]  = (0, 0, -B a)
    [layer 3, anything] = 0,     [layer 2, layer 2] = 0 (step-3 grading)

realized here over exact rational arithmetic: structure checks are
certificates, not approximations.  Floating point enters only where actual
manifolds do.

The obstruction arithmetic encodes the terminal computation of the
non-flatness argument for constant-curvature pairs: a hypothetical flat
frame forces an orthogonal frame of common squared norm beta > 0 whose
fiber derivatives produce the quantities (beta K / kappa)^2 and the
mirrored (beta K_hat / kappa)^2; any nonzero value contradicts flatness,
and K != K_hat makes at least one nonzero.  In dimension two the argument
is void (the 1:3 sphere pair really is flat), so the verdict is forced to
inconclusive there.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

from .curvature import so_pairs, so_dim
from .spaces import GeometryError


def _exact(x):
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return x


@dataclass(frozen=True)
class GradedVector:
    """Element of the graded algebra: layer-1 and layer-3 vectors of length
    n plus a layer-2 skew matrix stored as strictly upper triangular
    coefficients in lexicographic order."""

    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        n = len(self.a)
        if len(self.c) != n or len(self.b) != so_dim(n):
            raise GeometryError("graded layers have inconsistent dimensions")

    @property
    def n(self):
        return len(self.a)

    @classmethod
    def from_layers(cls, a, b, c):
        return cls(tuple(_exact(x) for x in a), tuple(_exact(x) for x in b),
                   tuple(_exact(x) for x in c))

    @classmethod
    def zero(cls, n):
        return cls((0,) * n, (0,) * so_dim(n), (0,) * n)

    @classmethod
    def layer1(cls, n, i):
        a = [0] * n
        a[i] = 1
        return cls(tuple(a), (0,) * so_dim(n), (0,) * n)

    @classmethod
    def layer2(cls, n, i, j):
        if not i < j:
            raise GeometryError("layer-2 basis indices must satisfy i < j")
        b = [0] * so_dim(n)
        b[so_pairs(n).index((i, j))] = 1
        return cls((0,) * n, tuple(b), (0,) * n)

    @classmethod
    def layer3(cls, n, i):
        c = [0] * n
        c[i] = 1
        return cls((0,) * n, (0,) * so_dim(n), tuple(c))

    def __add__(self, other):
        return GradedVector(
            tuple(x + y for x, y in zip(self.a, other.a)),
            tuple(x + y for x, y in zip(self.b, other.b)),
            tuple(x + y for x, y in zip(self.c, other.c)),
        )

    def scale(self, s):
        s = _exact(s)
        return GradedVector(
            tuple(s * x for x in self.a),
            tuple(s * x for x in self.b),
            tuple(s * x for x in self.c),
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return all(x == 0 for x in self.a + self.b + self.c)

    def skew_apply(self, vec):
        """Apply the layer-2 skew matrix to a length-n vector."""
        n = self.n
        out = [0] * n
        for (i, j), coef in zip(so_pairs(n), self.b):
            if coef != 0:
                out[i] += coef * vec[j]
                out[j] -= coef * vec[i]
        return tuple(out)


def nil_bracket(u: GradedVector, v: GradedVector) -> GradedVector:
    """Bracket of the graded algebra: bilinear, antisymmetric, exact on
    rational inputs; layers combine as 1+1 -> 2, 1+2 -> 3, all else 0."""
    if u.n != v.n:
        raise GeometryError("graded vectors have different dimensions")
    n = u.n
    b = tuple(u.a[i] * v.a[j] - u.a[j] * v.a[i] for i, j in so_pairs(n))
    # [a, B'] = -B'a and [B, a'] = +B a'
    c_from_u = u.skew_apply(v.a)
    c_from_v = v.skew_apply(u.a)
    c = tuple(c_from_u[k] - c_from_v[k] for k in range(n))
    return GradedVector((0,) * n, b, c)


def basis(n):
    """Full graded basis: layer-1 generators, layer-2 planes, layer-3 tails."""
    out = [GradedVector.layer1(n, i) for i in range(n)]
    out += [GradedVector.layer2(n, i, j) for i, j in so_pairs(n)]
    out += [GradedVector.layer3(n, i) for i in range(n)]
    return out


def graded_dims(n):
    """Layer dimensions (n, n(n-1)/2, n); cumulative sums give the growth
    vector (n, n(n+1)/2, 2n + n(n-1)/2)."""
    if n < 2:
        raise GeometryError("graded dimensions need n >= 2")
    return (n, so_dim(n), n)


def growth_vector(n):
    d1, d2, d3 = graded_dims(n)
    return (d1, d1 + d2, d1 + d2 + d3)


def verify_structure(n) -> dict:
    """Exhaustive exact verification of the graded algebra for a given n:
    the triple-bracket identity on generators, the Jacobi identity over all
    basis triples, vanishing of all four-fold brackets (step-3 nilpotency),
    and the layer dimensions.  All comparisons are exact."""
    if n < 2:
        raise GeometryError("structure verification needs n >= 2")
    bas = basis(n)
    gens = [GradedVector.layer1(n, i) for i in range(n)]
    tails = [GradedVector.layer3(n, i) for i in range(n)]

    # [N_i, [N_j, N_k]] = -delta_ik Z_j + delta_ij Z_k
    triple_failures = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                got = nil_bracket(gens[i], nil_bracket(gens[j], gens[k]))
                want = GradedVector.zero(n)
                if i == k:
                    want = want - tails[j]
                if i == j:
                    want = want + tails[k]
                if not (got - want).is_zero():
                    triple_failures += 1

    jacobi_failures = 0
    for x in bas:
        for y in bas:
            for z in bas:
                s = (
                    nil_bracket(x, nil_bracket(y, z))
                    + nil_bracket(y, nil_bracket(z, x))
                    + nil_bracket(z, nil_bracket(x, y))
                )
                if not s.is_zero():
                    jacobi_failures += 1

    # step-3 nilpotency: every 4-fold bracket over the basis vanishes;
    # inner triples are computed once, zero triples short-circuit exactly
    step3_failures = 0
    nonzero_triples = []
    for y in bas:
        for z in bas:
            for w in bas:
                t = nil_bracket(y, nil_bracket(z, w))
                if not t.is_zero():
                    nonzero_triples.append(t)
    for x in bas:
        for t in nonzero_triples:
            if not nil_bracket(x, t).is_zero():
                step3_failures += 1

    # layer dimensions as generated, not as declared: the spans of the
    # first brackets and of the triple brackets must have the full ranks
    layer2_rank = _exact_rank(
        [list(nil_bracket(gens[i], gens[j]).b) for i in range(n) for j in range(n)]
    )
    layer3_rank = _exact_rank(
        [
            list(nil_bracket(gens[i], nil_bracket(gens[j], gens[k])).c)
            for i in range(n)
            for j in range(n)
            for k in range(n)
        ]
    )
    dims_ok = (layer2_rank, layer3_rank) == (so_dim(n), n)
    return {
        "n": n,
        "dims": (n, layer2_rank, layer3_rank),
        "growth": growth_vector(n),
        "triple_identity_failures": triple_failures,
        "jacobi_failures": jacobi_failures,
        "step3_failures": step3_failures,
        "dims_ok": dims_ok,
        "ok": triple_failures == 0
        and jacobi_failures == 0
        and step3_failures == 0
        and dims_ok,
    }


def _exact_rank(rows):
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    mat = [[Fraction(x) for x in row] for row in rows if any(x != 0 for x in row)]
    rank = 0
    col = 0
    width = len(mat[0]) if mat else 0
    while rank < len(mat) and col < width:
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        lead = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                factor = mat[r][col] / lead
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        col += 1
    return rank


# -- non-flatness obstruction ---------------------------------------------------------


@dataclass
class ObstructionReport:
    """Result of the terminal obstruction arithmetic.

    kappa follows the convention -K + K_hat; it only enters the
    obstructions squared, so its sign never affects the verdict.
    verdict is 'not_flat' when either obstruction is positive (n >= 3)
    and 'inconclusive' for n = 2, where flat pairs genuinely exist.
    """

    K: object
    K_hat: object
    beta: object
    n: int
    kappa: object
    obstruction_M: object
    obstruction_M_hat: object
    verdict: str

    def to_json(self):
        def num(x):
            if isinstance(x, Fraction):
                return {"num": x.numerator, "den": x.denominator, "value": float(x)}
            return x

        return {
            "K": num(self.K),
            "K_hat": num(self.K_hat),
            "beta": num(self.beta),
            "n": self.n,
            "kappa": num(self.kappa),
            "obstruction_M": num(self.obstruction_M),
            "obstruction_M_hat": num(self.obstruction_M_hat),
            "verdict": self.verdict,
        }


def flatness_obstruction(K, K_hat, beta, n=3) -> ObstructionReport:
    """Obstruction quotients (beta K / kappa)^2 and (beta K_hat / kappa)^2
    of the hypothetical flat frame, with exact rational arithmetic whenever
    the inputs are rational.

    Raises on kappa = 0 (the mismatch hypothesis is a precondition, not a
    verdict) and on beta <= 0.
    """
    K = _exact(K)
    K_hat = _exact(K_hat)
    beta = _exact(beta)
    if all(isinstance(v, (int, Fraction)) for v in (K, K_hat, beta)):
        K, K_hat, beta = Fraction(K), Fraction(K_hat), Fraction(beta)
    if isinstance(K, numbers.Real) and isinstance(K_hat, numbers.Real):
        kappa = -K + K_hat
    else:
        raise GeometryError("curvatures must be real scalars")
    if kappa == 0:
        raise GeometryError("equal curvatures: the obstruction needs K != K_hat")
    if not beta > 0:
        raise GeometryError("beta must be positive")
    if n < 2:
        raise GeometryError("dimension must be at least 2")
    obs_m = (beta * K / kappa) ** 2
    obs_mh = (beta * K_hat / kappa) ** 2
    if n == 2:
        verdict = "inconclusive"
    else:
        verdict = "not_flat" if max(obs_m, obs_mh) > 0 else "inconclusive"
    return ObstructionReport(K, K_hat, beta, n, kappa, obs_m, obs_mh, verdict)


def vertical_action_consistency(q, beta=1.0) -> float:
    """Mechanical check of the penultimate step of the non-flatness
    argument at a state of a constant-curvature pair.

    With W_i = sqrt(beta) times the deterministic frame, the flat-frame
    hypotheses force the fiber derivative of W_k along nu(A(W_i ^ W_j)) to
    take the closed form (beta K / kappa)(delta_jk W_i - delta_ik W_j);
    this evaluates kappa times that form against K (W_i ^ W_j) W_k computed
    mechanically through the wedge action, and returns the largest norm of
    the difference over all index triples.  kappa = -K + K_hat.
    """
    pair = q.pair
    for m in (pair.space, pair.space_hat):
        if not hasattr(m, "curvature_constant"):
            raise GeometryError("consistency check needs a constant-curvature pair")
    K = pair.space.curvature_constant
    K_hat = pair.space_hat.curvature_constant
    kappa = -K + K_hat
    if kappa == 0:
        raise GeometryError("equal curvatures: kappa vanishes")
    if not beta > 0:
        raise GeometryError("beta must be positive")
    n = pair.dim
    fr = q.frame
    sb = math.sqrt(beta)
    w = [sb * fr[i] for i in range(n)]
    m_space = pair.space
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                lemma_form = (beta * K / kappa) * (
                    (1.0 if j == k else 0.0) * w[i] - (1.0 if i == k else 0.0) * w[j]
                )
                # wedge action evaluated on the actual frame vectors
                wedge = m_space.inner_at(q.x, w[k], w[j]) * w[i] - m_space.inner_at(
                    q.x, w[k], w[i]
                ) * w[j]
                diff = kappa * lemma_form - K * wedge
                worst = max(worst, math.sqrt(m_space.inner_at(q.x, diff, diff)))
    return worst
