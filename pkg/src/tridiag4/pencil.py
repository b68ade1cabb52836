"""The pencil t0*I + t1*A + t2*A*, its determinant curve, and the kernel map.

For a 4x4 complex matrix A, the locus ``D = {det(t0 I + t1 A + t2 A*) = 0}``
is a plane quartic.  At every point of ``D`` the pencil has a
one-dimensional kernel (for suitably generic A), and the kernel vector
``v`` traces out the curve of points in projective 3-space where
``{v, Av, A*v}`` is linearly dependent.  A tridiagonalizing flag comes
from the finitely many points where the two enlarged spans
``span(v, Av, A*v) + A span(...)`` and ``... + A* span(...)`` coincide;
that coincidence is what :func:`section_residual` measures and what
:func:`section_zeros` hunts down by sweeping the base line and polishing
candidates with Newton.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConvergenceFailure, NoSectionZero, RankDeficientPencil, SingularJacobian
from .linalg import adjugate, adjugate_directional, canonical_projective, projective_distance
from .polyroots import newton_system

#: Relative threshold below which the pencil counts as rank-deficient (<= 2).
RANK_TOL = 1e-8

#: Relative threshold for "this point lies on the determinant curve".
ON_CURVE_TOL = 1e-8


@dataclass(frozen=True)
class Pencil:
    """A 4x4 matrix together with its cached adjoint and derived products."""

    a: np.ndarray
    astar: np.ndarray = field(init=False)
    a2: np.ndarray = field(init=False)
    astar2: np.ndarray = field(init=False)
    norm: float = field(init=False)

    def __post_init__(self):
        a = linalg.as_matrix(self.a)
        if a.shape != (4, 4):
            raise ValueError("Pencil expects a 4x4 matrix")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "astar", linalg.adjoint(a))
        object.__setattr__(self, "a2", a @ a)
        object.__setattr__(self, "astar2", self.astar @ self.astar)
        object.__setattr__(self, "norm", linalg.matrix_norm(a))

    @property
    def generators(self):
        return np.eye(4, dtype=complex), self.a, self.astar


@dataclass
class PencilPoint:
    """A point of the determinant curve with its kernel vector.

    ``t`` is the canonical projective triple, ``v`` the canonical kernel
    vector, ``base`` the image ``[t1 : t2]`` under the projection to the
    base line, ``sheet`` the index of this point within its fiber, and
    ``near_branch`` flags eigenvalue collisions that make sheet tracking
    unreliable nearby.
    """

    t: np.ndarray
    v: np.ndarray
    sheet: int = 0
    base: np.ndarray | None = None
    near_branch: bool = False


@dataclass
class SectionCandidate:
    """A certified (or rejected) zero candidate.

    ``span_det`` is the scale-normalized determinant of
    ``[v, Av, A^2 v, A*^2 v]`` (the holomorphic proxy that Newton
    polishes) and ``sigma4`` the normalized fourth singular value of the
    seven-column matrix ``[v, Av, A*v, A^2 v, A A* v, A* A v, A*^2 v]``
    (the rank condition that actually certifies acceptance).
    """

    point: PencilPoint
    span_det: complex
    sigma4: float
    accepted: bool
    shortcut: bool = False


@dataclass
class SectionOptions:
    """Knobs for the sweep in :func:`section_zeros`."""

    samples: int = 720
    restarts: int = 16
    tol: float = 1e-8
    dedupe_tol: float = 1e-6
    gap_tol: float = 1e-6
    seed: int = 0
    stop_after_first: bool = False
    stop_on_shortcut: bool = True
    max_seeds: int = 900
    stagnation: int = 120
    max_zeros: int = 60
    newton_tol: float = 1e-11
    newton_steps: int = 50
    chunk: int = 240


def pencil_matrix(pencil: Pencil, t) -> np.ndarray:
    """The 4x4 matrix ``t0*I + t1*A + t2*A*``."""
    t = linalg.as_vector(t)
    if t.size != 3:
        raise ValueError("pencil parameter must have 3 coordinates")
    return t[0] * np.eye(4, dtype=complex) + t[1] * pencil.a + t[2] * pencil.astar


def kernel_vector(pencil: Pencil, t, tol: float = RANK_TOL) -> np.ndarray:
    """Unit kernel vector of the pencil at a point of the determinant curve.

    Takes the right singular vector for the smallest singular value.
    Raises :class:`RankDeficientPencil` when the second-smallest singular
    value is also below ``tol * sigma_max`` (rank <= 2, which the generic
    construction excludes and the caller must escalate).
    """
    m = pencil_matrix(pencil, t)
    _, s, vh = np.linalg.svd(m)
    if s[0] == 0.0 or s[2] <= tol * s[0]:
        raise RankDeficientPencil(
            f"pencil rank <= 2 at t={np.round(t, 6)} (sigma3/sigma1 = "
            f"{0.0 if s[0] == 0 else s[2] / s[0]:.2e})"
        )
    return canonical_projective(np.conj(vh[-1]))


def fiber_points(pencil: Pencil, base, gap_tol: float = 1e-6):
    """The four points of the determinant curve over a base point [t1 : t2].

    Over the base the curve is cut out by ``-t0`` running through the
    eigenvalues of ``t1*A + t2*A*``; each eigenvalue contributes one
    point (repeated eigenvalues are listed with multiplicity).
    ``near_branch`` is set on a point when its eigenvalue sits within
    ``gap_tol * ||t1*A + t2*A*||`` of another one.

    Raises whatever :func:`kernel_vector` raises at rank-deficient points.
    """
    b = canonical_projective(linalg.as_vector(base))
    if b.size != 2:
        raise ValueError("base point must have 2 coordinates")
    n = b[0] * pencil.a + b[1] * pencil.astar
    lam = np.linalg.eigvals(n)
    lam = lam[np.lexsort((lam.imag, lam.real))]
    scale = max(float(np.linalg.norm(n)), 1e-300)
    points = []
    for sheet, ev in enumerate(lam):
        gap = min(abs(ev - other) for j, other in enumerate(lam) if j != sheet)
        t = canonical_projective(np.array([-ev, b[0], b[1]]))
        v = kernel_vector(pencil, t)
        points.append(
            PencilPoint(t=t, v=v, sheet=sheet, base=b, near_branch=bool(gap < gap_tol * scale))
        )
    return points


def curve_residual(pencil: Pencil, v) -> float:
    """Scale-invariant distance of [v] from the dependence locus.

    Largest 3x3 minor of the 3x4 matrix with rows ``v, Av, A*v``,
    normalized by the product of the row norms.  At or below tolerance
    exactly when ``{v, Av, A*v}`` is numerically dependent.
    """
    v = linalg.as_vector(v)
    rows = np.stack([v, pencil.a @ v, pencil.astar @ v])
    norms = np.linalg.norm(rows, axis=1)
    if np.min(norms) <= 1e-300:
        return 0.0
    cols = np.stack([rows[:, [j for j in range(4) if j != k]] for k in range(4)])
    minors = np.abs(np.linalg.det(cols))
    return float(np.max(minors) / np.prod(norms))


def _seven_columns(pencil: Pencil, v: np.ndarray) -> np.ndarray:
    a, astar = pencil.a, pencil.astar
    av = a @ v
    asv = astar @ v
    return np.column_stack([v, av, asv, a @ av, a @ asv, astar @ av, astar @ asv])


def section_residual(pencil: Pencil, v):
    """The two residuals whose simultaneous vanishing marks a flag point.

    Returns ``(h, sigma4)`` where ``h = det[v, Av, A^2 v, A*^2 v]``
    normalized by the column norms (holomorphic in v up to that fixed
    scaling) and ``sigma4`` is the fourth singular value of the
    seven-column matrix, normalized by its largest.  On the open part of
    the dependence curve where v is not an eigenvector of A, ``h = 0``
    is equivalent to the two enlarged spans agreeing, but ``sigma4`` is
    the authoritative certificate: it also rejects the degenerate zeros
    of ``h`` at eigenvectors.
    """
    v = linalg.as_vector(v)
    av = pencil.a @ v
    cols = np.column_stack([v, av, pencil.a @ av, pencil.astar2 @ v])
    norms = np.linalg.norm(cols, axis=0)
    if np.min(norms) <= 1e-300:
        h = 0j
    else:
        h = complex(np.linalg.det(cols) / np.prod(norms))
    s = np.linalg.svd(_seven_columns(pencil, v), compute_uv=False)
    sigma4 = float(s[3] / s[0]) if s[0] > 0 else 0.0
    return h, sigma4


# ---------------------------------------------------------------------------
# sweep machinery


def _ring_bases(n_rings: int, n_angles: int):
    radii = np.logspace(-2.0, 2.0, n_rings)
    angles = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    t2 = (radii[:, None] * angles[None, :]).reshape(-1)
    bases = np.column_stack([np.ones_like(t2), t2])
    return bases / np.linalg.norm(bases, axis=1, keepdims=True)


def _random_bases(n: int, rng: np.random.Generator):
    # complex Gaussian pairs normalize to the uniform measure on the base line
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _fiber_table(pencil: Pencil, bases: np.ndarray, gap_tol: float):
    """Vectorized fiber data for a batch of base points.

    Returns a dict of arrays with leading shape (m, 4): one row per base
    point, one column per sheet.
    """
    m = bases.shape[0]
    t1 = bases[:, 0]
    t2 = bases[:, 1]
    n = t1[:, None, None] * pencil.a + t2[:, None, None] * pencil.astar
    lam = np.linalg.eigvals(n)
    order = np.lexsort((lam.imag, lam.real), axis=1)
    lam = np.take_along_axis(lam, order, axis=1)

    diff = np.abs(lam[:, :, None] - lam[:, None, :])
    diff[:, np.arange(4), np.arange(4)] = np.inf
    gaps = diff.min(axis=2)
    scale = np.linalg.norm(n, axis=(1, 2))
    near_branch = gaps < gap_tol * scale[:, None]

    t = np.empty((m, 4, 3), dtype=complex)
    t[:, :, 0] = -lam
    t[:, :, 1] = t1[:, None]
    t[:, :, 2] = t2[:, None]
    t /= np.linalg.norm(t, axis=2, keepdims=True)

    flat_t = t.reshape(-1, 3)
    eye = np.eye(4, dtype=complex)
    pm = (
        flat_t[:, 0, None, None] * eye
        + flat_t[:, 1, None, None] * pencil.a
        + flat_t[:, 2, None, None] * pencil.astar
    )
    _, s, vh = np.linalg.svd(pm)
    v = np.conj(vh[:, -1, :])
    rank_bad = s[:, 2] <= RANK_TOL * s[:, 0]

    av = v @ pencil.a.T
    asv = v @ pencil.astar.T
    a2v = av @ pencil.a.T
    aasv = asv @ pencil.a.T
    asav = av @ pencil.astar.T
    as2v = asv @ pencil.astar.T

    v4 = np.stack([v, av, a2v, as2v], axis=2)
    norms = np.linalg.norm(v4, axis=1)
    prod = np.prod(norms, axis=1)
    h = np.where(prod > 1e-300, np.linalg.det(v4) / np.where(prod > 0, prod, 1.0), 0.0)

    seven = np.stack([v, av, asv, a2v, aasv, asav, as2v], axis=2)
    s7 = np.linalg.svd(seven, compute_uv=False)
    sigma4 = s7[:, 3] / np.maximum(s7[:, 0], 1e-300)

    five_a = seven[:, :, [0, 1, 2, 3, 4]]
    sa = np.linalg.svd(five_a, compute_uv=False)
    five_b = seven[:, :, [0, 1, 2, 6, 5]]
    sb = np.linalg.svd(five_b, compute_uv=False)
    top = np.maximum(sa[:, 0], 1e-300)
    short_a = sa[:, 2] / top
    dim3_a = sa[:, 3] / top
    topb = np.maximum(sb[:, 0], 1e-300)
    short_b = sb[:, 2] / topb
    dim3_b = sb[:, 3] / topb

    def sq(x):
        return x.reshape(m, 4)

    return {
        "t": t,
        "v": v.reshape(m, 4, 4),
        "near_branch": near_branch,
        "rank_bad": sq(rank_bad),
        "h": sq(h),
        "sigma4": sq(sigma4),
        "short_a": sq(short_a),
        "short_b": sq(short_b),
        "dim3_a": sq(dim3_a),
        "dim3_b": sq(dim3_b),
        "sheet": np.broadcast_to(np.arange(4), (m, 4)),
        "base": bases,
    }


def _kernel_values(pencil: Pencil, bases: np.ndarray):
    """Curve points and kernel vectors over a batch of bases (light)."""
    t1 = bases[:, 0]
    t2 = bases[:, 1]
    n = t1[:, None, None] * pencil.a + t2[:, None, None] * pencil.astar
    lam = np.linalg.eigvals(n)
    t = np.empty((bases.shape[0], 4, 3), dtype=complex)
    t[:, :, 0] = -lam
    t[:, :, 1] = t1[:, None]
    t[:, :, 2] = t2[:, None]
    t /= np.linalg.norm(t, axis=2, keepdims=True)
    flat_t = t.reshape(-1, 3)
    eye = np.eye(4, dtype=complex)
    pm = (
        flat_t[:, 0, None, None] * eye
        + flat_t[:, 1, None, None] * pencil.a
        + flat_t[:, 2, None, None] * pencil.astar
    )
    _, s, vh = np.linalg.svd(pm)
    v = np.conj(vh[:, -1, :])
    bad = s[:, 2] <= RANK_TOL * s[:, 0]
    return flat_t, v, bad


def _sigma4_table(pencil: Pencil, bases: np.ndarray):
    """sigma4 and points for a batch of bases; lighter than _fiber_table."""
    flat_t, v, bad = _kernel_values(pencil, bases)
    av = v @ pencil.a.T
    asv = v @ pencil.astar.T
    seven = np.stack(
        [v, av, asv, av @ pencil.a.T, asv @ pencil.a.T, av @ pencil.astar.T, asv @ pencil.astar.T],
        axis=2,
    )
    s7 = np.linalg.svd(seven, compute_uv=False)
    sigma4 = np.where(bad, np.inf, s7[:, 3] / np.maximum(s7[:, 0], 1e-300))
    return flat_t, sigma4


def _refine_seed(pencil: Pencil, t_seed: np.ndarray, rounds: int = 4, radius: float = 0.08):
    """Local sigma4 descent on the curve before Newton (single seed)."""
    t_ref, s_ref = _refine_seeds(pencil, np.asarray(t_seed, dtype=complex)[None, :], rounds, radius)
    return t_ref[0], float(s_ref[0])


def _refine_seeds(
    pencil: Pencil,
    t_seeds: np.ndarray,
    rounds: int = 4,
    radius: float = 0.08,
    score_table=None,
):
    """Batched local score descent on the curve before Newton.

    Zooms each seed's base coordinate toward the nearest score minimum
    over a shrinking probe ring; Newton basins around paired zeros are
    smaller than any affordable global grid, so this bridges the gap.
    All seeds advance together so the fiber evaluations stay vectorized.
    ``score_table(bases) -> (points, score)`` defaults to the sigma4
    evaluator; the degree experiments pass their own objective.
    Returns the refined points (k, 3) and the score values reached.
    """
    if score_table is None:
        def score_table(bases):
            return _sigma4_table(pencil, bases)
    k = t_seeds.shape[0]
    if k == 0:
        return t_seeds.copy(), np.empty(0)
    b = t_seeds[:, 1:]
    nb = np.linalg.norm(b, axis=1)
    ok = nb > 1e-14
    flip = np.abs(b[:, 0]) < np.abs(b[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(flip, b[:, 0] / b[:, 1], b[:, 1] / b[:, 0])
    mu = np.where(ok, mu, 0.0)

    best_t = t_seeds.copy()
    best_s = np.full(k, np.inf)
    r = radius
    for _ in range(rounds):
        offs = np.concatenate([[0.0], r * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)])
        mus = mu[:, None] + offs[None, :]  # (k, 9)
        flat_mu = mus.reshape(-1)
        ones = np.ones_like(flat_mu)
        flipped = np.repeat(flip, offs.size)
        probes = np.where(flipped[:, None], np.column_stack([flat_mu, ones]), np.column_stack([ones, flat_mu]))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        flat_t, sigma4 = score_table(probes)
        sig = sigma4.reshape(k, offs.size * 4)
        idx = np.argmin(sig, axis=1)
        val = sig[np.arange(k), idx]
        better = ok & (val < best_s)
        if np.any(better):
            rows = np.nonzero(better)[0]
            best_s[rows] = val[rows]
            best_t[rows] = flat_t.reshape(k, offs.size * 4, 3)[rows, idx[rows]]
            mu[rows] = mus.reshape(k, -1)[rows, idx[rows] // 4]
        r *= 0.33
    return best_t, best_s


def _dedupe_pits(refined: np.ndarray, s_ref: np.ndarray, known: list, radius: float = 2e-3):
    """Distinct refined pits ordered by depth, excluding known zeros.

    Vectorized: pits are unit vectors, so proximity is an inner-product
    threshold.  Returns at most the distinct representatives, deepest
    (smallest sigma4) first.
    """
    mask = np.isfinite(s_ref) & (s_ref < 1e-1)
    if not np.any(mask):
        return []
    pts = refined[mask]
    vals = s_ref[mask]
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    pts = pts / np.where(norms > 0, norms, 1.0)
    thresh = 1.0 - radius**2
    if known:
        ka = np.asarray(known, dtype=complex)
        ip = np.abs(pts @ np.conj(ka).T) ** 2
        keep = ~(ip > thresh).any(axis=1)
        pts, vals = pts[keep], vals[keep]
    order = np.argsort(vals)
    out: list[np.ndarray] = []
    blocked = np.zeros(pts.shape[0], dtype=bool)
    for i in order:
        if blocked[i]:
            continue
        out.append(pts[i])
        blocked |= np.abs(pts @ np.conj(pts[i])) ** 2 > thresh
    return out


def _certify_on_curve(pencil: Pencil, t):
    """Membership test for the determinant curve at rank 3.

    Returns ``(canonical t, kernel vector)`` or None when t is off the
    curve or the pencil drops below rank 3 there.
    """
    try:
        t = canonical_projective(t)
    except ValueError:
        return None
    m = pencil_matrix(pencil, t)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0 or s[2] <= RANK_TOL * s[0]:
        return None
    if s[3] > ON_CURVE_TOL * s[0]:
        return None
    try:
        v = kernel_vector(pencil, t)
    except RankDeficientPencil:
        return None
    return t, v


def _certify(pencil: Pencil, t, tol: float, gap_tol: float = 1e-6):
    """Re-derive every acceptance quantity at ``t`` and certify or reject."""
    on_curve = _certify_on_curve(pencil, t)
    if on_curve is None:
        return None
    t, v = on_curve
    if curve_residual(pencil, v) > tol:
        return None

    h, sigma4 = section_residual(pencil, v)
    seven = _seven_columns(pencil, v)
    wcols = seven[:, :3]
    sw = np.linalg.svd(wcols, compute_uv=False)
    if sw[1] <= tol * sw[0] or sw[2] > tol * sw[0]:
        return None  # span(v, Av, A*v) is not 2-dimensional

    sa = np.linalg.svd(seven[:, [0, 1, 2, 3, 4]], compute_uv=False)
    sb = np.linalg.svd(seven[:, [0, 1, 2, 6, 5]], compute_uv=False)
    shortcut_a = sa[2] <= tol * sa[0]
    shortcut_b = sb[2] <= tol * sb[0]
    dims_ok = (shortcut_a or sa[3] <= tol * sa[0]) and (shortcut_b or sb[3] <= tol * sb[0])
    accepted = bool(sigma4 <= tol and dims_ok)
    if not accepted:
        return None

    base = canonical_projective(t[1:]) if np.linalg.norm(t[1:]) > 1e-14 else None
    near_branch = False
    sheet = 0
    if base is not None:
        n = base[0] * pencil.a + base[1] * pencil.astar
        lam = np.linalg.eigvals(n)
        lam = lam[np.lexsort((lam.imag, lam.real))]
        # t is proportional to [-lam, base]; recover the factor from the
        # larger base coordinate and match -t0 to its sheet
        kappa = t[1] / base[0] if abs(base[0]) >= abs(base[1]) else t[2] / base[1]
        target = -t[0] / kappa
        sheet = int(np.argmin(np.abs(lam - target)))
        gap = min(abs(lam[sheet] - lam[j]) for j in range(4) if j != sheet)
        near_branch = bool(gap < gap_tol * max(float(np.linalg.norm(n)), 1e-300))
    point = PencilPoint(t=t, v=v, sheet=sheet, base=base, near_branch=near_branch)
    return SectionCandidate(
        point=point,
        span_det=h,
        sigma4=float(sigma4),
        accepted=True,
        shortcut=bool(shortcut_a or shortcut_b),
    )


def _chart_setup(pencil: Pencil, t_seed: np.ndarray):
    k = int(np.argmax(np.abs(t_seed)))
    ts = t_seed / t_seed[k]
    free = [i for i in range(3) if i != k]
    gens = pencil.generators
    return k, free, ts[free].copy(), gens[k], gens[free[0]], gens[free[1]]


def _polish(pencil: Pencil, t_seed, second, opts: SectionOptions):
    """Newton-polish a seed on (det curve, second equation) in a local chart.

    ``second(m0, w)`` must return ``(value_fn, row_fn, ok)`` where
    ``value_fn(v)`` evaluates the second equation on the holomorphic
    kernel representative ``v = adj(M) w`` and ``row_fn(v, dv_a, dv_b)``
    returns its two chart derivatives at once.  Returns the polished
    projective point or None when the run fails.
    """
    t_seed = np.asarray(t_seed, dtype=complex)
    k, free, s0, pk, pa, pb = _chart_setup(pencil, t_seed)
    m0 = pk + s0[0] * pa + s0[1] * pb
    u, sv, _ = np.linalg.svd(m0)
    if sv[0] == 0.0 or sv[2] <= RANK_TOL * sv[0]:
        return None
    w = np.conj(u[:, -1])
    g_scale = sv[0] ** 4

    value_fn, row_fn, ok = second(m0, w)
    if not ok:
        return None

    last = {}

    def assemble(s):
        m = pk + s[0] * pa + s[1] * pb
        adj, m2, stats = linalg._adj4(m)
        detm = (m * adj.T).sum() / 4.0
        v = adj @ w
        return m, adj, m2, stats, detm, v

    def f(s):
        m, adj, m2, stats, detm, v = assemble(s)
        last["s"] = s.copy()
        last["data"] = (m, adj, m2, stats, v)
        return np.array([detm / g_scale, value_fn(v)], dtype=complex)

    def jac(s):
        if last.get("s") is not None and np.array_equal(last["s"], s):
            m, adj, m2, stats, v = last["data"]
        else:
            m, adj, m2, stats, _, v = assemble(s)
        dv_a = linalg._adj4_dir(m, m2, stats, pa) @ w
        dv_b = linalg._adj4_dir(m, m2, stats, pb) @ w
        row2 = row_fn(v, dv_a, dv_b)
        return np.array(
            [
                [(adj * pa.T).sum() / g_scale, (adj * pb.T).sum() / g_scale],
                [row2[0], row2[1]],
            ],
            dtype=complex,
        )

    try:
        s_star, _ = newton_system(f, jac, s0, tol=opts.newton_tol, max_steps=opts.newton_steps)
    except (ConvergenceFailure, SingularJacobian):
        return None
    if np.max(np.abs(s_star)) > 6.0:
        return None  # escaped the chart; the seed was bad
    t = np.empty(3, dtype=complex)
    t[k] = 1.0
    t[free[0]] = s_star[0]
    t[free[1]] = s_star[1]
    return canonical_projective(t)


def _section_second(pencil: Pencil):
    """Second Newton equation for section zeros: det[v, Av, A^2 v, A*^2 v]."""
    a, a2, astar2 = pencil.a, pencil.a2, pencil.astar2

    def build(v):
        return np.column_stack([v, a @ v, a2 @ v, astar2 @ v])

    def make(m0, w):
        v0 = adjugate(m0) @ w
        h_scale = float(np.prod(np.linalg.norm(build(v0), axis=0)))
        if not np.isfinite(h_scale) or h_scale <= 1e-280:
            return None, None, False

        def value(v):
            return complex(np.linalg.det(build(v)) / h_scale)

        def row(v, dv_a, dv_b):
            adj_v = linalg._adj4(build(v))[0]
            da = (adj_v * build(dv_a).T).sum()
            db = (adj_v * build(dv_b).T).sum()
            return complex(da / h_scale), complex(db / h_scale)

        return value, row, True

    return make


def _distinguished_seeds(pencil: Pencil):
    """Pencil points carried by eigenvectors of A and of A*.

    An eigenvector of A with eigenvalue lam corresponds to the point
    [-lam : 1 : 0]; an eigenvector of A* with eigenvalue nu to
    [-nu : 0 : 1].  These always lie on the dependence curve and cover
    the structured inputs (nilpotent blocks, near-invariant subspaces)
    that the random sweep handles poorly.
    """
    import warnings as _warnings

    seeds = []
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        try:
            for lam, _ in linalg.eigen(pencil.a):
                seeds.append(np.array([-lam, 1.0, 0.0], dtype=complex))
            for nu, _ in linalg.eigen(pencil.astar):
                seeds.append(np.array([-nu, 0.0, 1.0], dtype=complex))
        except ConvergenceFailure:
            pass
    return seeds


class _Dedupe:
    """Accepted-candidate store with projective deduplication on t."""

    def __init__(self, tol: float):
        self.tol = tol
        self.items: list[SectionCandidate] = []

    def add(self, cand: SectionCandidate) -> bool:
        for i, other in enumerate(self.items):
            if projective_distance(cand.point.t, other.point.t) < self.tol:
                if cand.sigma4 < other.sigma4:
                    self.items[i] = cand
                return False
        self.items.append(cand)
        return True

    def sorted(self):
        return sorted(
            self.items,
            key=lambda c: (c.sigma4, tuple(np.round(c.point.t, 9).view(float))),
        )


def _seed_order(table, max_seeds: int, extra: list[int] | None = None, spacing: float = 0.02, score=None):
    """Flattened fiber points ordered for polishing, in coverage tiers.

    The first tier picks the best-scoring seed per coarse spatial region
    (spacing 0.3 in projective distance on the base), then finer tiers at
    0.1 and ``spacing`` fill in, so spatial coverage comes before greed.
    ``extra`` indices (e.g. ring-local minima) are appended afterwards.
    The default score is the certified rank gap sigma4; the degree
    experiments pass their own.
    """
    if score is None:
        score = table["sigma4"]
    score = np.where(table["rank_bad"] | table["near_branch"], np.inf, score)
    flat = score.reshape(-1)
    order = np.argsort(flat)
    order = order[np.isfinite(flat[order])]
    tflat = table["t"].reshape(-1, 3)
    bases = np.repeat(table["base"], 4, axis=0)

    chosen: list[int] = []
    taken = np.zeros(flat.size, dtype=bool)
    for tier_spacing in (0.3, 0.1, spacing):
        # unit base vectors: distance < s  <=>  |<b1, b2>|^2 > 1 - s^2
        thresh = 1.0 - tier_spacing**2
        if chosen:
            ip = np.abs(bases @ np.conj(bases[chosen]).T) ** 2
            blocked = (ip > thresh).any(axis=1)
        else:
            blocked = np.zeros(flat.size, dtype=bool)
        for idx in order:
            if len(chosen) >= max_seeds:
                break
            if taken[idx] or blocked[idx]:
                continue
            chosen.append(int(idx))
            taken[idx] = True
            blocked |= np.abs(bases @ np.conj(bases[idx])) ** 2 > thresh
        if len(chosen) >= max_seeds:
            break
    for idx in extra or []:
        if np.isfinite(flat[idx]) and not taken[idx]:
            chosen.append(int(idx))
            taken[idx] = True
    return chosen, tflat


def _ring_minima(table, n_rings: int, n_angles: int, tol: float, score=None):
    """Per-ring, per-sheet local minima of the score (flattened indices).

    Rings are closed circles, so the comparison wraps around.  Only the
    first ``n_rings * n_angles`` rows of the table are ring samples.
    """
    if score is None:
        score = table["sigma4"]
    count = n_rings * n_angles
    score = np.where(
        table["rank_bad"][:count] | table["near_branch"][:count],
        np.inf,
        score[:count],
    ).reshape(n_rings, n_angles, 4)
    left = np.roll(score, 1, axis=1)
    right = np.roll(score, -1, axis=1)
    mask = (score < left) & (score < right) & np.isfinite(score) & (score < 1e-1)
    rows, angs, sheets = np.nonzero(mask)
    return [int((r * n_angles + a) * 4 + s) for r, a, s in zip(rows, angs, sheets)]


def section_zeros(pencil: Pencil, opts: SectionOptions | None = None):
    """All certified flag points of the pencil, sorted by their sigma4.

    Sweeps the base line (structured rings plus uniform random points,
    ``opts.samples`` in total), evaluates the residual pair on every
    sheet, Newton-polishes the most promising seeds on the pair
    (det curve, span determinant) in a local chart, and keeps only
    candidates that pass the full certification: on-curve, dependence
    residual, 2-dimensional span, rank-3 closures, and ``sigma4`` below
    ``opts.tol``.  Zeros are deduplicated at projective distance
    ``opts.dedupe_tol``.

    A point whose forward closure is only 2-dimensional short-circuits
    the search when ``opts.stop_on_shortcut`` is set: such a point
    already produces a flag without any zero-finding.

    For matrices inside the generic regime the result has at most 12
    entries.  Near-degenerate inputs can certify a near-continuum of
    points; the search cuts off at ``opts.max_zeros`` accepted zeros to
    stay bounded there.

    Raises
    ------
    NoSectionZero
        When no candidate passes certification; degenerate inputs land
        here and the caller escalates to the perturbation path.
    """
    if opts is None:
        opts = SectionOptions()
    rng = np.random.default_rng(opts.seed)
    store = _Dedupe(opts.dedupe_tol)
    second = _section_second(pencil)
    polish_budget = 0

    def try_candidate(t):
        """Certify t; returns (candidate or None, newly-added flag)."""
        cand = _certify(pencil, t, opts.tol, opts.gap_tol)
        if cand is None:
            return None, False
        return cand, store.add(cand)

    # eigenvector-derived points: exact members of the curve, and the only
    # reliable entry for nilpotent/near-decomposable structure
    for t_seed in _distinguished_seeds(pencil):
        cand, _ = try_candidate(t_seed)
        if cand is not None and cand.shortcut and opts.stop_on_shortcut:
            return store.sorted()
        if cand is not None and opts.stop_after_first:
            return store.sorted()

    n_struct = opts.samples // 2
    n_angles = 60
    n_rings = max(1, n_struct // n_angles)
    ring = _ring_bases(n_rings, n_angles)
    rand = _random_bases(max(0, opts.samples - ring.shape[0]), rng)
    bases = np.vstack([ring, rand])

    chunk = opts.chunk if opts.stop_after_first else bases.shape[0]
    for lo in range(0, bases.shape[0], chunk):
        table = _fiber_table(pencil, bases[lo : lo + chunk], opts.gap_tol)

        # forward-closure shortcut: certify immediately, no Newton required
        short_mask = (~table["rank_bad"]) & (
            (table["short_a"] <= opts.tol) | (table["short_b"] <= opts.tol)
        )
        if opts.stop_on_shortcut and np.any(short_mask):
            for idx in np.flatnonzero(short_mask.reshape(-1)):
                cand, _ = try_candidate(table["t"].reshape(-1, 3)[idx])
                if cand is not None and cand.shortcut:
                    return store.sorted()

        extra = None
        if lo == 0 and not opts.stop_after_first:
            extra = _ring_minima(table, n_rings, n_angles, opts.tol)
        seeds, tflat = _seed_order(table, opts.max_seeds, extra)

        if opts.stop_after_first:
            for idx in seeds:
                polish_budget += 1
                t_pol = _polish(pencil, tflat[idx], second, opts)
                cand, _ = try_candidate(t_pol) if t_pol is not None else (None, False)
                if cand is not None:
                    return store.sorted()
            continue

        # exhaustive mode: refine every seed toward its local sigma4 pit
        # (batched), keep one representative per pit, and polish pits in
        # order of depth; genuine zeros refine much deeper than the
        # spurious shallow minima, so they surface first
        seed_ts = np.array([tflat[i] for i in seeds]).reshape(-1, 3)
        refined, s_ref = _refine_seeds(pencil, seed_ts)
        targets = _dedupe_pits(refined, s_ref, [z.point.t for z in store.items])
        # adaptive cutoff: stop polishing once a run of pits brings
        # nothing new, so the budget concentrates where zeros still hide
        stagnant = 0
        for tcur in targets:
            if len(store.items) >= opts.max_zeros:
                return store.sorted()
            if any(projective_distance(tcur, z.point.t) < 2e-3 for z in store.items):
                continue
            polish_budget += 1
            t_pol = _polish(pencil, tcur, second, opts)
            _, is_new = try_candidate(t_pol) if t_pol is not None else (None, False)
            if is_new:
                stagnant = 0
            else:
                stagnant += 1
                if stagnant >= opts.stagnation and store.items:
                    break

    # random restarts: cover zeros hiding near branch points or in
    # regions the structured sweep left unexplored
    if opts.restarts > 0 and not (opts.stop_after_first and store.items):
        extra = _random_bases(opts.restarts, rng)
        table = _fiber_table(pencil, extra, opts.gap_tol)
        score = np.where(table["rank_bad"], np.inf, table["sigma4"])
        tflat = table["t"].reshape(-1, 3)
        picks = []
        for row in range(score.shape[0]):
            for idx in np.argsort(score[row])[:2]:
                if np.isfinite(score[row, idx]):
                    picks.append(tflat[row * 4 + idx])
        if picks and opts.stop_after_first:
            for tcur in picks:
                polish_budget += 1
                t_pol = _polish(pencil, tcur, second, opts)
                if t_pol is None:
                    continue
                cand, _ = try_candidate(t_pol)
                if cand is not None:
                    return store.sorted()
        elif picks:
            refined, s_ref = _refine_seeds(pencil, np.asarray(picks))
            for tcur in _dedupe_pits(refined, s_ref, [z.point.t for z in store.items]):
                if len(store.items) >= opts.max_zeros:
                    return store.sorted()
                polish_budget += 1
                t_pol = _polish(pencil, tcur, second, opts)
                if t_pol is not None:
                    try_candidate(t_pol)

    # cluster pass: zeros frequently come in tight clusters (pairs and
    # quadruples ~0.05-0.1 apart in projective distance) whose Newton
    # basins are smaller than any affordable global grid.  Ring every
    # accepted zero with chart-coordinate perturbations and re-run Newton;
    # new finds get ringed in turn.
    if not opts.stop_after_first and store.items and len(store.items) < opts.max_zeros:
        frontier = list(store.items)
        for _ in range(3):
            new_items = []
            for cand in frontier:
                if len(store.items) >= opts.max_zeros:
                    break
                tc = cand.point.t
                k = int(np.argmax(np.abs(tc)))
                ts = tc / tc[k]
                free = [i for i in range(3) if i != k]
                for radius in (0.05, 0.11, 0.18):
                    for j in range(6):
                        phase = np.exp(2j * np.pi * (j + 0.3) / 6)
                        d = np.zeros(3, dtype=complex)
                        d[free[0]] = radius * phase
                        d[free[1]] = radius * np.conj(phase) * (1j) ** j
                        t_start = ts + d
                        polish_budget += 1
                        t_pol = _polish(pencil, t_start / np.linalg.norm(t_start), second, opts)
                        if t_pol is None:
                            continue
                        got, is_new = try_candidate(t_pol)
                        if is_new:
                            new_items.append(got)
            if not new_items or len(store.items) >= opts.max_zeros:
                break
            frontier = new_items

    if not store.items:
        raise NoSectionZero(
            f"no certified zero after sweeping {bases.shape[0]} base points "
            f"and {polish_budget} polish runs (tol={opts.tol:.1e})"
        )
    return store.sorted()
