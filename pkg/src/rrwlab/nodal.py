"""Nodal-set extraction and measurement.

Zero counts on the circle by sign-scan plus bisection; nodal curves in 2-d
by marching squares with linear edge interpolation (saddle cells resolved
by the exact field value at the cell center); weighted nodal integrals;
the local-ball stochastic representation check; and the Crofton-type
vertex-segment lower bound with its Rolle companion.

Chart-patch soups live in chart coordinates; torus soups live on the
fundamental domain with periodic wraparound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NodalEstimate",
    "SegmentSoup",
    "GridTooCoarseError",
    "count_zeros_1d",
    "marching_squares",
    "nodal_length_2d",
    "nodal_measure_integral",
    "local_global_check",
    "clip_segments_to_disk",
    "clip_segments_to_box",
    "crofton_lower_bound",
    "rolle_vertex_bound_check",
    "RolleCheck",
]


class GridTooCoarseError(ValueError):
    """Raised when an estimate is unstable under grid doubling."""


@dataclass(frozen=True)
class NodalEstimate:
    """A zero count or nodal length with its resolution metadata."""

    value: float
    grid_n: int
    refined: bool
    lam: float
    domain: str

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("nodal measurements are nonnegative")


@dataclass(frozen=True)
class SegmentSoup:
    """Line segments (rows of endpoints) approximating a nodal curve."""

    a: np.ndarray  # (n, 2)
    b: np.ndarray  # (n, 2)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.b - self.a, axis=1)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)

    def total_length(self, weights: np.ndarray | None = None) -> float:
        ln = self.lengths
        return float(np.sum(ln if weights is None else ln * weights))


# ---------------------------------------------------------------------------
# one-dimensional zero counting

def _bisect_brackets(f, lo: np.ndarray, hi: np.ndarray, iters: int = 48) -> np.ndarray:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = (flo <= 0) != (fm <= 0)
        hi = np.where(left, mid, hi)
        keep = ~left
        lo = np.where(keep, mid, lo)
        flo = np.where(keep, fm, flo)
    return 0.5 * (lo + hi)


def count_zeros_1d(evaluator, interval: tuple[float, float], grid_n: int,
                   lam: float = 0.0, periodic: bool = True) -> NodalEstimate:
    """Count the simple zeros of a smooth 1-d function by a sign-change scan
    refined with bisection to ~1e-12; the count must be stable under grid
    doubling, else GridTooCoarseError."""
    if grid_n < 4:
        raise ValueError("grid_n must be at least 4")
    if lam > 0 and grid_n < 4 * lam / (2.0 * math.pi):
        raise ValueError("grid_n below 4x the trigonometric degree proxy")

    def count_at(n: int) -> tuple[int, np.ndarray]:
        lo, hi = interval
        if periodic:
            xs = lo + (hi - lo) * np.arange(n) / n
        else:
            xs = np.linspace(lo, hi, n)
        vals = np.asarray(evaluator(xs), dtype=float).copy()
        vals[vals == 0.0] += 1e-14
        pos = vals > 0
        if periodic:
            flips = pos != np.roll(pos, -1)
            left = xs[flips]
            right = left + (hi - lo) / n
        else:
            flips = pos[:-1] != pos[1:]
            left = xs[:-1][flips]
            right = xs[1:][flips]
        if left.size == 0:
            return 0, np.empty(0)
        roots = _bisect_brackets(lambda t: np.asarray(evaluator(t)), left, right)
        return int(left.size), roots

    c1, _ = count_at(grid_n)
    c2, roots = count_at(2 * grid_n)
    tol = max(1, int(0.01 * max(c1, c2)))
    if abs(c1 - c2) > tol:
        raise GridTooCoarseError(
            f"zero count unstable under doubling: {c1} at n={grid_n}, {c2} at n={2 * grid_n}"
        )
    return NodalEstimate(value=float(c2), grid_n=2 * grid_n, refined=True,
                         lam=lam, domain=f"interval{interval}")


# ---------------------------------------------------------------------------
# marching squares

# case -> list of (edge, edge) pairs; edges: 0 bottom, 1 right, 2 top, 3 left.
# corner bits: 1 = V00, 2 = V10, 4 = V11, 8 = V01 positive.
_MS_TABLE = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(3, 1)], 4: [(2, 1)],
    6: [(0, 2)], 7: [(2, 3)], 8: [(2, 3)], 9: [(0, 2)],
    11: [(2, 1)], 12: [(3, 1)], 13: [(0, 1)], 14: [(0, 3)],
}


def marching_squares(values: np.ndarray, spacing, origin=(0.0, 0.0),
                     periodic: bool = False, center_fn=None) -> SegmentSoup:
    """Extract the zero level set of a grid-sampled field as a segment soup.

    values[i, j] is the field at origin + (i*h0, j*h1).  With periodic=True
    the grid is a full fundamental-domain sample and cells wrap around.
    Saddle cells (two opposite positive corners) are disambiguated with
    center_fn(points) when given, else with the corner average.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ValueError("need a 2-d grid of samples")
    h = np.broadcast_to(np.asarray(spacing, dtype=float), (2,))
    v = np.where(v == 0.0, 1e-14, v)
    if periodic:
        v00 = v
        v10 = np.roll(v, -1, axis=0)
        v01 = np.roll(v, -1, axis=1)
        v11 = np.roll(np.roll(v, -1, axis=0), -1, axis=1)
    else:
        v00 = v[:-1, :-1]
        v10 = v[1:, :-1]
        v01 = v[:-1, 1:]
        v11 = v[1:, 1:]
    case = ((v00 > 0).astype(np.uint8)
            + 2 * (v10 > 0).astype(np.uint8)
            + 4 * (v11 > 0).astype(np.uint8)
            + 8 * (v01 > 0).astype(np.uint8))

    nc0, nc1 = case.shape
    seg_a, seg_b = [], []

    def edge_points(ii, jj, edge, V00, V10, V01, V11):
        u0 = origin[0] + ii * h[0]
        w0 = origin[1] + jj * h[1]
        if edge == 0:
            t = V00 / (V00 - V10)
            return np.stack([u0 + t * h[0], w0], axis=1)
        if edge == 1:
            t = V10 / (V10 - V11)
            return np.stack([u0 + h[0], w0 + t * h[1]], axis=1)
        if edge == 2:
            t = V01 / (V01 - V11)
            return np.stack([u0 + t * h[0], w0 + h[1]], axis=1)
        t = V00 / (V00 - V01)
        return np.stack([u0, w0 + t * h[1]], axis=1)

    for cid, pairs in _MS_TABLE.items():
        ii, jj = np.nonzero(case == cid)
        if ii.size == 0:
            continue
        V00, V10, V01, V11 = v00[ii, jj], v10[ii, jj], v01[ii, jj], v11[ii, jj]
        for e1, e2 in pairs:
            seg_a.append(edge_points(ii, jj, e1, V00, V10, V01, V11))
            seg_b.append(edge_points(ii, jj, e2, V00, V10, V01, V11))

    for cid in (5, 10):
        ii, jj = np.nonzero(case == cid)
        if ii.size == 0:
            continue
        V00, V10, V01, V11 = v00[ii, jj], v10[ii, jj], v01[ii, jj], v11[ii, jj]
        centers = np.stack([origin[0] + (ii + 0.5) * h[0],
                            origin[1] + (jj + 0.5) * h[1]], axis=1)
        if center_fn is not None:
            cv = np.asarray(center_fn(centers), dtype=float)
        else:
            cv = 0.25 * (V00 + V10 + V01 + V11)
        cpos = cv > 0
        if cid == 5:
            # positive corners V00, V11; center sign picks the pairing
            pair_pos = [(0, 1), (2, 3)]   # center > 0
            pair_neg = [(0, 3), (1, 2)]
        else:
            # positive corners V10, V01
            pair_pos = [(0, 3), (1, 2)]
            pair_neg = [(0, 1), (2, 3)]
        for grp, mask in ((pair_pos, cpos), (pair_neg, ~cpos)):
            if not np.any(mask):
                continue
            for e1, e2 in grp:
                seg_a.append(edge_points(ii[mask], jj[mask], e1,
                                         V00[mask], V10[mask], V01[mask], V11[mask]))
                seg_b.append(edge_points(ii[mask], jj[mask], e2,
                                         V00[mask], V10[mask], V01[mask], V11[mask]))

    if not seg_a:
        empty = np.empty((0, 2))
        return SegmentSoup(empty, empty)
    return SegmentSoup(np.concatenate(seg_a), np.concatenate(seg_b))


def nodal_length_2d(values: np.ndarray, spacing, lam: float,
                    origin=(0.0, 0.0), periodic: bool = False, center_fn=None,
                    weight_fn=None, domain: str = "grid") -> tuple[NodalEstimate, SegmentSoup]:
    """Nodal length of a grid-sampled field: marching squares, then the sum
    of segment lengths, optionally weighted (e.g. a metric factor at the
    segment midpoints)."""
    soup = marching_squares(values, spacing, origin=origin, periodic=periodic,
                            center_fn=center_fn)
    weights = None
    if weight_fn is not None and soup.n:
        weights = np.asarray(weight_fn(soup.midpoints), dtype=float)
    est = NodalEstimate(value=soup.total_length(weights),
                        grid_n=int(np.asarray(values).shape[0]),
                        refined=False, lam=lam, domain=domain)
    return est, soup


def nodal_measure_integral(soup: SegmentSoup, weight, lam: float) -> float:
    """(1/lambda) * integral of the weight over the nodal curve, by midpoint
    weights per segment."""
    if soup.n == 0:
        return 0.0
    w = np.asarray(weight(soup.midpoints), dtype=float)
    return float(np.sum(w * soup.lengths) / lam)


# ---------------------------------------------------------------------------
# segment clipping

def clip_segments_to_disk(a: np.ndarray, b: np.ndarray, center: np.ndarray,
                          radius: float) -> np.ndarray:
    """Length of each segment's intersection with the closed disk."""
    u = b - a
    w = a - center
    qa = np.sum(u * u, axis=1)
    qb = 2.0 * np.sum(u * w, axis=1)
    qc = np.sum(w * w, axis=1) - radius * radius
    disc = qb * qb - 4.0 * qa * qc
    out = np.zeros(a.shape[0])
    ok = (disc > 0) & (qa > 0)
    if np.any(ok):
        sq = np.sqrt(disc[ok])
        t1 = (-qb[ok] - sq) / (2.0 * qa[ok])
        t2 = (-qb[ok] + sq) / (2.0 * qa[ok])
        lo = np.maximum(t1, 0.0)
        hi = np.minimum(t2, 1.0)
        out[ok] = np.maximum(hi - lo, 0.0) * np.sqrt(qa[ok])
    return out


def clip_segments_to_box(soup: SegmentSoup, lo, hi) -> SegmentSoup:
    """Clip every segment to the axis box [lo, hi] (Liang-Barsky)."""
    if soup.n == 0:
        return soup
    a, b = soup.a, soup.b
    u = b - a
    t0 = np.zeros(soup.n)
    t1 = np.ones(soup.n)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    for axis in range(2):
        d = u[:, axis]
        nonpar = np.abs(d) > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo[axis] - a[:, axis]) / d
            tb = (hi[axis] - a[:, axis]) / d
        tlo = np.where(d > 0, ta, tb)
        thi = np.where(d > 0, tb, ta)
        t0 = np.where(nonpar, np.maximum(t0, tlo), t0)
        t1 = np.where(nonpar, np.minimum(t1, thi), t1)
        inside = (a[:, axis] >= lo[axis]) & (a[:, axis] <= hi[axis])
        t1 = np.where(nonpar | inside, t1, -1.0)
    keep = t1 > t0
    if not np.any(keep):
        e = np.empty((0, 2))
        return SegmentSoup(e, e)
    aa = a[keep] + t0[keep, None] * u[keep]
    bb = a[keep] + t1[keep, None] * u[keep]
    return SegmentSoup(aa, bb)


# ---------------------------------------------------------------------------
# stochastic representation check (local balls vs global nodal volume)

def local_global_check(soup: SegmentSoup, lam: float, n_ball_samples: int,
                       ball_radius: float | None = None) -> float:
    """Compare lambda^d * E_X[length of the nodal set inside B(X, delta/lambda)]
    against the total nodal length on the torus.  E_X is taken over a
    midpoint grid of ball centers (quadrature, not sampling noise); the grid
    is refined beyond n_ball_samples when needed so several nodes span the
    ball diameter, since the integrand is supported on a band of width
    ~2*radius around the nodal set.  The representation formula puts the
    ratio at 1 + O(1/lambda^2).
    """
    total = soup.total_length()
    if soup.n == 0 or total <= 0:
        raise ValueError("nodal set is empty; local/global ratio undefined")
    d = 2
    if ball_radius is None:
        delta = (math.pi) ** (-0.5)  # sigma_2^{-1/2}: unit-area disk radius
        ball_radius = delta / lam
    g = max(2, int(round(math.sqrt(n_ball_samples))), int(math.ceil(6.0 / ball_radius)))
    g += g % 2
    mids = np.mod(soup.midpoints, 1.0)
    half = 0.5 * (soup.b - soup.a)
    seg_r = float(np.max(np.linalg.norm(half, axis=1)))
    # every grid center within reach of some point of each segment
    W = int(math.ceil((ball_radius + seg_r) * g + 0.5)) + 1
    off = np.arange(-W, W + 1)
    offsets = np.stack(np.meshgrid(off, off, indexing="ij"), axis=-1).reshape(-1, 2)
    K = offsets.shape[0]
    acc = 0.0
    chunk = max(1, int(2e6) // K)
    for s in range(0, soup.n, chunk):
        m = mids[s:s + chunk]
        hv = half[s:s + chunk]
        n = m.shape[0]
        base = np.floor(m * g - 0.5)
        centers = (base[:, None, :] + offsets[None, :, :] + 0.5) / g
        rel = m[:, None, :] - centers  # periodic images handled by locality
        a = (rel - hv[:, None, :]).reshape(-1, 2)
        b = (rel + hv[:, None, :]).reshape(-1, 2)
        acc += float(np.sum(clip_segments_to_disk(a, b, np.zeros(2), ball_radius)))
        del centers, rel, a, b
    mean_local = acc / g**2
    return lam**d * mean_local / total


# ---------------------------------------------------------------------------
# Crofton-type vertex-segment bound

def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx


def _count_crossings(pa: np.ndarray, pb: np.ndarray, verts: np.ndarray,
                     ends: np.ndarray) -> np.ndarray:
    """Transversal crossing counts of each chord (verts[i], ends[i]) with
    the soup segments (pa, pb); vectorized over chords and segments."""
    r = ends - verts  # (m, 2)
    w1 = pa[None, :, :] - verts[:, None, :]  # (m, n, 2)
    w2 = pb[None, :, :] - verts[:, None, :]
    d1 = _cross2(r[:, None, 0], r[:, None, 1], w1[:, :, 0], w1[:, :, 1])
    d2 = _cross2(r[:, None, 0], r[:, None, 1], w2[:, :, 0], w2[:, :, 1])
    u = pb - pa  # (n, 2)
    q1 = verts[:, None, :] - pa[None, :, :]
    q2 = ends[:, None, :] - pa[None, :, :]
    d3 = _cross2(u[None, :, 0], u[None, :, 1], q1[:, :, 0], q1[:, :, 1])
    d4 = _cross2(u[None, :, 0], u[None, :, 1], q2[:, :, 0], q2[:, :, 1])
    return np.sum((d1 * d2 < 0) & (d3 * d4 < 0), axis=1)


def crofton_lower_bound(soup: SegmentSoup, a: float, samples: int,
                        rng: np.random.Generator, c: float | None = None,
                        origin=(0.0, 0.0), aim_at_soup: bool = True) -> tuple[int, bool]:
    """Search for a vertex chord witnessing the Crofton-type lower bound.

    Samples points P uniformly in the cube of side a; for each of the 4
    vertices counts transversal crossings of the soup with the chord from
    the vertex through P up to the far boundary; reports the best count and
    whether it clears c * H^1(soup in cube) / a^{d-1} (default
    c = 1/(2^{d+1} d) = 1/16 for d = 2).  With aim_at_soup the candidate
    set also includes chords through soup midpoints, which only improves
    the max the bound is tested against.
    """
    d = 2
    if c is None:
        c = 1.0 / (2.0 ** (d + 1) * d)
    origin = np.asarray(origin, dtype=float)
    lo, hi = origin, origin + a
    clipped = clip_segments_to_box(soup, lo, hi)
    total = clipped.total_length()
    if clipped.n == 0 or total <= 0:
        return 0, True
    targets = [lo + a * rng.random((samples, 2))]
    if aim_at_soup:
        mids = clipped.midpoints
        if mids.shape[0] > samples:
            mids = mids[rng.choice(mids.shape[0], samples, replace=False)]
        targets.append(mids)
    pts = np.concatenate(targets)
    vertices = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]])
    pa, pb = clipped.a, clipped.b
    best = 0
    eps = 1e-12 * max(a, 1.0)
    for vert in vertices:
        dirv = pts - vert
        nrm = np.linalg.norm(dirv, axis=1)
        keep = nrm > 1e-300
        dirv = dirv[keep] / nrm[keep, None]
        # chord from the vertex through each target to the far boundary
        tmax = np.full(dirv.shape[0], np.inf)
        for axis in range(2):
            nz = np.abs(dirv[:, axis]) > 1e-300
            for bound in (lo[axis], hi[axis]):
                t = (bound - vert[axis]) / dirv[nz, axis]
                upd = np.where(t > eps, t, np.inf)
                tmax[nz] = np.minimum(tmax[nz], upd)
        ends = vert + dirv * tmax[:, None]
        chunk = max(1, int(4e6) // max(1, pa.shape[0]))
        for s in range(0, ends.shape[0], chunk):
            counts = _count_crossings(pa, pb, np.broadcast_to(vert, ends[s:s + chunk].shape),
                                      ends[s:s + chunk])
            if counts.size:
                best = max(best, int(counts.max()))
    return best, best >= c * total / a ** (d - 1)


@dataclass(frozen=True)
class RolleCheck:
    holds: bool
    vacuous: bool
    vertex_value: float
    bound: float
    zeros_found: int


def rolle_vertex_bound_check(field, a: float, p: int,
                             deriv_sup: float | None = None,
                             origin=(0.0, 0.0), n_candidates: int = 24,
                             n_grid: int = 2048) -> RolleCheck:
    """Generalized-Rolle consistency check on the cube of side a.

    Scans segments from each cube vertex to points on the far sides for one
    carrying >= p sign-change zeros of the field; on such a segment the
    vertex value must satisfy |g(vertex)| <= (L^p / p!) sup |g_S^(p)| with
    g_S the restriction to the segment.  The p-th directional derivative is
    estimated by order-p finite differences on a fine grid along the
    segment, unless an analytic bound (sum over |alpha| = p of sup
    |d_alpha g|) is supplied, in which case the cube-diameter constant
    d^p / p! * a^p multiplies it.  No qualifying segment: vacuous.
    """
    d = 2
    origin = np.asarray(origin, dtype=float)
    lo, hi = origin, origin + a
    vertices = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]])
    ts = np.linspace(0.0, 1.0, n_grid)
    best = None
    for vi, vert in enumerate(vertices):
        far = vertices[3 - vi]
        sides = [np.stack([np.full(n_candidates, far[0]),
                           np.linspace(lo[1], hi[1], n_candidates)], axis=1),
                 np.stack([np.linspace(lo[0], hi[0], n_candidates),
                           np.full(n_candidates, far[1])], axis=1)]
        for targets in sides:
            for tgt in targets:
                pts = vert + ts[:, None] * (tgt - vert)
                vals = np.asarray(field(pts), dtype=float)
                flips = int(np.sum((vals[:-1] > 0) != (vals[1:] > 0)))
                if flips >= p and (best is None or flips > best[0]):
                    best = (flips, vert, tgt, vals)
    if best is None:
        return RolleCheck(holds=True, vacuous=True, vertex_value=0.0,
                          bound=0.0, zeros_found=0)
    flips, vert, tgt, vals = best
    length = float(np.linalg.norm(tgt - vert))
    vval = abs(float(vals[0]))
    if deriv_sup is not None:
        bound = a**p * d**p / math.factorial(p) * deriv_sup
    else:
        hstep = length / (n_grid - 1)
        dp = np.diff(vals, n=p) / hstep**p
        bound = length**p / math.factorial(p) * float(np.max(np.abs(dp)))
    return RolleCheck(holds=vval <= bound * (1.0 + 1e-9), vacuous=False,
                      vertex_value=vval, bound=bound, zeros_found=flips)
