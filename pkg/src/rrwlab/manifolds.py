"""Explicit spectral geometry: flat unit-volume tori and the round 2-sphere.

Both manifolds carry unit total volume (torus side 1, sphere radius
(4*pi)^{-1/2}), so the volume measure is a probability measure and basis
functions are normalized against it.  Torus modes are cos/sin lattice
waves with frequency 2*pi*|k|; sphere modes are real spherical harmonics
of degree l with frequency sqrt(4*pi*l*(l+1)).

Points are ndarray rows: shape (..., d) in [0,1)^d for the torus, (..., 3)
embedded vectors of norm R for the sphere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, Regime
from .rng import substream

__all__ = [
    "ManifoldKind",
    "ManifoldSpec",
    "SpectralBasis",
    "ChartMap",
    "enumerate_spectrum",
    "eval_mode",
    "eval_mode_gradient",
    "geodesic_distance",
    "chart_at",
    "exp_map",
    "spectral_kernel",
    "uniform_point",
    "weyl_count_prediction",
]

SPHERE_RADIUS = 1.0 / math.sqrt(4.0 * math.pi)


class ManifoldKind(enum.Enum):
    TORUS = "torus"
    SPHERE2 = "sphere2"


@dataclass(frozen=True)
class ManifoldSpec:
    """A flat torus T^d (d = 1, 2, 3) or the area-one round 2-sphere."""

    kind: ManifoldKind
    dim: int

    def __post_init__(self):
        if self.kind is ManifoldKind.TORUS and self.dim not in (1, 2, 3):
            raise ValueError("torus supported for d in {1, 2, 3}")
        if self.kind is ManifoldKind.SPHERE2 and self.dim != 2:
            raise ValueError("sphere has dimension 2")

    @classmethod
    def torus(cls, d: int) -> "ManifoldSpec":
        return cls(ManifoldKind.TORUS, d)

    @classmethod
    def sphere2(cls) -> "ManifoldSpec":
        return cls(ManifoldKind.SPHERE2, 2)

    @classmethod
    def parse(cls, name: str) -> "ManifoldSpec":
        key = name.strip().lower()
        if key in ("torus1", "t1"):
            return cls.torus(1)
        if key in ("torus2", "t2"):
            return cls.torus(2)
        if key in ("torus3", "t3"):
            return cls.torus(3)
        if key in ("sphere2", "sphere", "s2"):
            return cls.sphere2()
        raise ValueError(f"unknown manifold {name!r}")

    @property
    def radius(self) -> float:
        if self.kind is not ManifoldKind.SPHERE2:
            raise ValueError("radius defined for the sphere only")
        return SPHERE_RADIUS

    @property
    def injectivity_guard(self) -> float:
        if self.kind is ManifoldKind.TORUS:
            return 0.5
        return math.pi * SPHERE_RADIUS * (1.0 - 1e-9)

    def first_positive_frequency(self) -> float:
        if self.kind is ManifoldKind.TORUS:
            return 2.0 * math.pi
        return math.sqrt(4.0 * math.pi * 2.0)


@dataclass(frozen=True)
class SpectralBasis:
    """All eigen-modes of a manifold selected by a frequency window.

    Torus mode indexing: 0 is the constant mode, then each lattice
    representative k (first nonzero component positive) contributes the
    pair sqrt(2)*cos(2 pi k.x), sqrt(2)*sin(2 pi k.x).  Sphere modes are
    real harmonics indexed l^2 + l + m over the selected degrees.
    """

    manifold: ManifoldSpec
    lambda_cut: float
    regime: Regime
    lattice: np.ndarray | None = field(default=None, repr=False)   # torus reps
    degrees: np.ndarray | None = field(default=None, repr=False)   # sphere l list

    @property
    def count(self) -> int:
        if self.manifold.kind is ManifoldKind.TORUS:
            return 1 + 2 * self.lattice.shape[0]
        return int(np.sum(2 * self.degrees + 1))

    @property
    def frequencies(self) -> np.ndarray:
        """Frequency of every mode, in index order."""
        if self.manifold.kind is ManifoldKind.TORUS:
            freqs = 2.0 * math.pi * np.linalg.norm(self.lattice, axis=1)
            return np.concatenate([[0.0], np.repeat(freqs, 2)])
        per_degree = np.sqrt(4.0 * math.pi * self.degrees * (self.degrees + 1.0))
        return np.repeat(per_degree, 2 * self.degrees + 1)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    @property
    def effective_lambda(self) -> float:
        """Frequency used for chart rescaling: the cut itself in the large
        band, the selected eigenfrequency in the monochromatic regime."""
        if (self.manifold.kind is ManifoldKind.SPHERE2
                and self.regime is Regime.MONOCHROMATIC):
            return sphere_degree_frequency(int(self.degrees[0]))
        return self.lambda_cut

    def mode_lm(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays of (l, m) per sphere mode index."""
        ls, ms = [], []
        for l in self.degrees:
            ls.append(np.full(2 * l + 1, l))
            ms.append(np.arange(-l, l + 1))
        return np.concatenate(ls), np.concatenate(ms)


def sphere_degree_frequency(l: int) -> float:
    return math.sqrt(4.0 * math.pi * l * (l + 1.0))


def enumerate_spectrum(m: ManifoldSpec, lam: float, regime: Regime | KernelSpec = Regime.LARGE_BAND) -> SpectralBasis:
    """Complete mode list with frequencies <= lam (large band), or the single
    sphere eigenspace with frequency nearest lam (monochromatic)."""
    if isinstance(regime, KernelSpec):
        regime = regime.regime
    if lam <= 0:
        raise ValueError("frequency cut must be positive")
    if m.kind is ManifoldKind.TORUS:
        if regime is Regime.MONOCHROMATIC:
            raise ValueError("monochromatic regime is realized on the sphere only")
        radius = lam / (2.0 * math.pi)
        # closed ball, ties included: compare squared integer norms with a
        # small relative slack so eigenvalue multiplicities stay whole
        r2max = radius * radius * (1.0 + 1e-9) + 1e-9
        kmax = int(math.floor(math.sqrt(r2max))) + 1
        axes = [np.arange(-kmax, kmax + 1)] * m.dim
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m.dim)
        norms2 = np.sum(grid * grid, axis=1)
        inside = grid[(norms2 <= r2max) & (norms2 > 0)]
        # one representative per {k, -k}: first nonzero component positive
        lead = inside[np.arange(inside.shape[0]), np.argmax(inside != 0, axis=1)]
        reps = inside[lead > 0]
        if reps.shape[0] == 0:
            raise ValueError(
                f"empty spectrum: lambda={lam:g} is below the first positive "
                f"torus frequency {2 * math.pi:g}"
            )
        order = np.lexsort(reps.T[::-1])
        return SpectralBasis(m, float(lam), regime, lattice=reps[order])
    # sphere
    if regime is Regime.LARGE_BAND:
        lmax = -1
        while sphere_degree_frequency(lmax + 1) <= lam * (1.0 + 1e-12):
            lmax += 1
        if lmax < 0:
            raise ValueError("empty spectrum: no sphere degree below the cut")
        return SpectralBasis(m, float(lam), regime, degrees=np.arange(0, lmax + 1))
    best_l, best_gap = 1, abs(sphere_degree_frequency(1) - lam)
    l = 2
    while True:
        gap = abs(sphere_degree_frequency(l) - lam)
        if gap < best_gap:
            best_l, best_gap = l, gap
        if sphere_degree_frequency(l) > lam:
            break
        l += 1
    return SpectralBasis(m, float(lam), regime, degrees=np.array([best_l]))


def weyl_count_prediction(m: ManifoldSpec, lam: float) -> float:
    """Leading Weyl term sigma_d / (2 pi)^d * lam^d for the counting function."""
    from .kernels import unit_ball_volume

    d = m.dim
    return unit_ball_volume(d) / (2.0 * math.pi) ** d * lam**d


# ---------------------------------------------------------------------------
# charts

@dataclass(frozen=True)
class ChartMap:
    """Isometric tangent frame at a base point plus the exponential map."""

    manifold: ManifoldSpec
    base: np.ndarray
    frame: np.ndarray  # (ambient_dim, d), orthonormal columns

    @property
    def guard(self) -> float:
        return self.manifold.injectivity_guard


def _rotation_to(u: np.ndarray) -> np.ndarray:
    """Rotation taking the north pole (0,0,1) to the unit vector u."""
    north = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(north, u))
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return np.diag([1.0, -1.0, -1.0])
    a = np.cross(north, u)
    ax = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + ax + ax @ ax / (1.0 + c)


def chart_at(m: ManifoldSpec, x: np.ndarray, rng_seed: int | None = None) -> ChartMap:
    """Chart at x: identity frame on the torus; on the sphere the reference
    frame rotated to x (deterministic in x).  An optional seed applies an
    extra random in-plane rotation of the tangent frame."""
    x = np.asarray(x, dtype=float)
    if m.kind is ManifoldKind.TORUS:
        frame = np.eye(m.dim)
    else:
        rot = _rotation_to(x / np.linalg.norm(x))
        frame = rot[:, :2]
    if rng_seed is not None:
        ang = 2.0 * math.pi * substream(rng_seed, "frame").random()
        spin = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
        if m.kind is ManifoldKind.TORUS and m.dim != 2:
            raise ValueError("random frame spin implemented for d=2 charts")
        frame = frame @ spin
    return ChartMap(m, x.copy(), frame)


def sphere_frames(m: ManifoldSpec, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tangent frames at many sphere points at once: the rows of the two
    returned arrays are the frame columns chart_at would produce."""
    pts = np.atleast_2d(points)
    u = pts / m.radius
    c = u[:, 2]
    south = c < -1.0 + 1e-14
    denom = np.where(south, 1.0, 1.0 + c)
    e1 = np.stack([1.0 - u[:, 0] ** 2 / denom,
                   -u[:, 0] * u[:, 1] / denom,
                   -u[:, 0]], axis=1)
    e2 = np.stack([-u[:, 0] * u[:, 1] / denom,
                   1.0 - u[:, 1] ** 2 / denom,
                   -u[:, 1]], axis=1)
    if np.any(south):
        e1[south] = [1.0, 0.0, 0.0]
        e2[south] = [0.0, -1.0, 0.0]
    return e1, e2


def sphere_exp_batch(m: ManifoldSpec, base: np.ndarray, e1: np.ndarray,
                     e2: np.ndarray, v: np.ndarray) -> np.ndarray:
    """exp at many base points (with their frames) of one tangent offset v."""
    R = m.radius
    nv = float(np.linalg.norm(v))
    if nv < 1e-300:
        return base.copy()
    t = (v[0] * e1 + v[1] * e2) / nv
    return math.cos(nv / R) * base + R * math.sin(nv / R) * t


def exp_map(chart: ChartMap, v: np.ndarray) -> np.ndarray:
    """Geodesic exponential of tangent vectors v (rows) in chart coordinates."""
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    vv = np.atleast_2d(v)
    norms = np.linalg.norm(vv, axis=1)
    if np.any(norms > chart.guard * (1.0 + 1e-12)):
        raise ValueError("tangent vector beyond the injectivity guard")
    m = chart.manifold
    if m.kind is ManifoldKind.TORUS:
        out = np.mod(chart.base + vv @ chart.frame.T, 1.0)
    else:
        R = m.radius
        tang = vv @ chart.frame.T  # ambient tangent vectors
        out = np.empty_like(tang)
        zero = norms < 1e-300
        s = np.where(zero, 1.0, norms)
        unit_t = tang / s[:, None]
        ang = norms / R
        out = np.cos(ang)[:, None] * chart.base + R * np.sin(ang)[:, None] * unit_t
        out[zero] = chart.base
    return out[0] if single else out


def geodesic_distance(m: ManifoldSpec, x: np.ndarray, y: np.ndarray):
    """Riemannian distance; wraparound minimum on the torus, great-circle
    arc on the sphere."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.kind is ManifoldKind.TORUS:
        diff = np.abs(x - y) % 1.0
        diff = np.minimum(diff, 1.0 - diff)
        return np.sqrt(np.sum(diff * diff, axis=-1))
    R = m.radius
    cosang = np.clip(np.sum(x * y, axis=-1) / (R * R), -1.0, 1.0)
    return R * np.arccos(cosang)


def uniform_point(m: ManifoldSpec, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Exactly uniform sample(s) for the volume probability measure."""
    size = 1 if n is None else n
    if m.kind is ManifoldKind.TORUS:
        pts = rng.random((size, m.dim))
    else:
        R = m.radius
        z = R * (2.0 * rng.random(size) - 1.0)
        phi = 2.0 * math.pi * rng.random(size)
        rho = np.sqrt(np.maximum(R * R - z * z, 0.0))
        pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    return pts[0] if n is None else pts


# ---------------------------------------------------------------------------
# associated Legendre / real spherical harmonics
#
# ThreeP[l][m] below is the "probability normalized" function
#   Ptil_l^m = sqrt((2l+1) (l-m)!/(l+m)!) P_l^m   (no Condon-Shortley phase)
# so that the real modes  Ptil_l^0,  sqrt(2) Ptil_l^m cos(m phi),
# sqrt(2) Ptil_l^m sin(m phi)  are orthonormal in L^2 of the *probability*
# measure on the sphere and satisfy sum_m mode^2 = 2l+1.


def _legendre_ptil(ct: np.ndarray, st: np.ndarray, lmax: int):
    """Yield (m, rows) with rows[j] = Ptil_{m+j}^m(ct), j = 0..lmax-m."""
    pmm = np.ones_like(ct)
    for m in range(0, lmax + 1):
        if m > 0:
            pmm = math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * pmm
        rows = [pmm]
        if m < lmax:
            rows.append(math.sqrt(2.0 * m + 3.0) * ct * pmm)
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m))
                          / ((2.0 * l - 3.0) * (l * l - m * m)))
            rows.append(a * ct * rows[-1] - b * rows[-2])
        yield m, rows


def _sphere_angles(m: ManifoldSpec, points: np.ndarray):
    R = m.radius
    pts = np.atleast_2d(points) / R
    ct = np.clip(pts[:, 2], -1.0, 1.0)
    st = np.sqrt(np.maximum(1.0 - ct * ct, 0.0))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return ct, st, phi


def sphere_mode_matrix(basis: SpectralBasis, points: np.ndarray) -> np.ndarray:
    """Matrix (n_points, count) of all basis harmonics at the given points."""
    ct, st, phi = _sphere_angles(basis.manifold, points)
    lmax = basis.max_degree
    wanted = set(int(l) for l in basis.degrees)
    offsets = {}
    off = 0
    for l in sorted(wanted):
        offsets[l] = off
        off += 2 * l + 1
    out = np.empty((ct.shape[0], off))
    sqrt2 = math.sqrt(2.0)
    for m, rows in _legendre_ptil(ct, st, lmax):
        if m == 0:
            cosm, sinm = None, None
        else:
            cosm, sinm = np.cos(m * phi), np.sin(m * phi)
        for j, row in enumerate(rows):
            l = m + j
            if l not in wanted:
                continue
            base = offsets[l] + l  # column of m = 0
            if m == 0:
                out[:, base] = row
            else:
                out[:, base + m] = sqrt2 * row * cosm
                out[:, base - m] = sqrt2 * row * sinm
    return out


def sphere_mode_gradient_matrices(basis: SpectralBasis, points: np.ndarray):
    """Surface-gradient components of every basis harmonic at the points.

    Returns (grad_theta, grad_phi): ndarrays (n_points, count) holding the
    e_theta and e_phi components of grad (both already divided by the
    sphere radius).  Pole points are rejected: the ladder identities are
    finite there but the e_theta/e_phi frame is not.
    """
    ct, st, phi = _sphere_angles(basis.manifold, points)
    if np.any(np.abs(ct) > 1.0 - 1e-12):
        raise ValueError("gradient evaluation rejected at the sphere poles")
    lmax = basis.max_degree
    wanted = set(int(l) for l in basis.degrees)
    offsets = {}
    off = 0
    for l in sorted(wanted):
        offsets[l] = off
        off += 2 * l + 1
    n = ct.shape[0]
    # Ptil over degrees up to lmax+1: the azimuthal ladder reaches degree l+1
    ptil = {}
    for m, rows in _legendre_ptil(ct, st, lmax + 1):
        for j, row in enumerate(rows):
            ptil[(m + j, m)] = row

    def P(l, m):
        if m < 0 or m > l:
            return 0.0
        return ptil[(l, m)]

    dtheta = np.zeros((n, off))
    dphi = np.zeros((n, off))
    R = basis.manifold.radius
    sqrt2 = math.sqrt(2.0)
    for l in sorted(wanted):
        base = offsets[l] + l
        for m in range(0, l + 1):
            # d/dtheta ladder
            if m == 0:
                dth = -math.sqrt(l * (l + 1.0)) * P(l, 1)
            else:
                up = math.sqrt((l - m) * (l + m + 1.0)) * P(l, m + 1)
                down = math.sqrt((l + m) * (l - m + 1.0)) * P(l, m - 1)
                dth = 0.5 * (down - up)
            # m * Ptil / sin(theta) ladder (pole-safe)
            if m > 0:
                cnorm = 0.5 * math.sqrt((2.0 * l + 1.0) / (2.0 * l + 3.0))
                msin = cnorm * (
                    math.sqrt((l + m + 1.0) * (l + m + 2.0)) * P(l + 1, m + 1)
                    + math.sqrt((l - m + 1.0) * (l - m + 2.0)) * P(l + 1, m - 1)
                )
            if m == 0:
                dtheta[:, base] = dth / R
            else:
                cosm, sinm = np.cos(m * phi), np.sin(m * phi)
                dtheta[:, base + m] = sqrt2 * dth * cosm / R
                dtheta[:, base - m] = sqrt2 * dth * sinm / R
                dphi[:, base + m] = -sqrt2 * msin * sinm / R
                dphi[:, base - m] = sqrt2 * msin * cosm / R
    return dtheta, dphi


def _sphere_frame_components(points: np.ndarray):
    """Unit e_theta, e_phi vectors at each point (rows)."""
    pts = np.atleast_2d(points)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    rho = np.sqrt(x * x + y * y)
    R = np.linalg.norm(pts, axis=1)
    ct, st = z / R, rho / R
    cp = np.where(rho > 0, x / np.where(rho > 0, rho, 1.0), 1.0)
    sp = np.where(rho > 0, y / np.where(rho > 0, rho, 1.0), 0.0)
    e_theta = np.stack([ct * cp, ct * sp, -st], axis=1)
    e_phi = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
    return e_theta, e_phi


def eval_mode(basis: SpectralBasis, n: int, x: np.ndarray):
    """Value of basis mode n at point(s) x, L^2(mu)-normalized."""
    if n < 0 or n >= basis.count:
        raise IndexError(f"mode index {n} out of range [0, {basis.count})")
    m = basis.manifold
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if m.kind is ManifoldKind.TORUS:
        if n == 0:
            vals = np.ones(xs.shape[0])
        else:
            k = basis.lattice[(n - 1) // 2]
            phase = 2.0 * math.pi * xs @ k
            vals = math.sqrt(2.0) * (np.cos(phase) if (n - 1) % 2 == 0 else np.sin(phase))
    else:
        vals = sphere_mode_matrix(basis, xs)[:, n]
    return vals if np.asarray(x).ndim > 1 else float(vals[0])


def eval_mode_gradient(basis: SpectralBasis, n: int, x: np.ndarray, chart: ChartMap) -> np.ndarray:
    """Gradient of mode n at x, expressed in the chart's tangent frame."""
    if n < 0 or n >= basis.count:
        raise IndexError(f"mode index {n} out of range [0, {basis.count})")
    m = basis.manifold
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if m.kind is ManifoldKind.TORUS:
        if n == 0:
            grad = np.zeros((xs.shape[0], m.dim))
        else:
            k = basis.lattice[(n - 1) // 2].astype(float)
            phase = 2.0 * math.pi * xs @ k
            two_pi_s2 = 2.0 * math.pi * math.sqrt(2.0)
            if (n - 1) % 2 == 0:
                grad = -two_pi_s2 * np.sin(phase)[:, None] * k
            else:
                grad = two_pi_s2 * np.cos(phase)[:, None] * k
        out = grad @ chart.frame
    else:
        dth, dph = sphere_mode_gradient_matrices(basis, xs)
        e_theta, e_phi = _sphere_frame_components(xs)
        ambient = dth[:, n, None] * e_theta + dph[:, n, None] * e_phi
        out = ambient @ chart.frame
    return out if np.asarray(x).ndim > 1 else out[0]


# ---------------------------------------------------------------------------
# spectral kernel

def _legendre_sum(weights: np.ndarray, c: np.ndarray) -> np.ndarray:
    """sum_l weights[l] P_l(c) by the Legendre three-term recurrence."""
    lmax = weights.shape[0] - 1
    pm, pc = np.ones_like(c), c.copy()
    acc = weights[0] * pm
    if lmax >= 1:
        acc = acc + weights[1] * pc
    for l in range(2, lmax + 1):
        pm, pc = pc, ((2.0 * l - 1.0) * c * pc - (l - 1.0) * pm) / l
        acc = acc + weights[l] * pc
    return acc


def spectral_kernel(basis: SpectralBasis, x: np.ndarray, y: np.ndarray):
    """Normalized spectral projector K(x,y)/K: the exact covariance of the
    wave ensemble between points x and y (rows broadcast pairwise)."""
    m = basis.manifold
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    ys = np.atleast_2d(np.asarray(y, dtype=float))
    if m.kind is ManifoldKind.TORUS:
        diff = np.atleast_2d(xs - ys)
        vals = np.empty(diff.shape[0])
        step = max(1, int(2e7) // max(1, basis.lattice.shape[0]))
        for s in range(0, diff.shape[0], step):
            phases = 2.0 * math.pi * diff[s:s + step] @ basis.lattice.T
            vals[s:s + step] = (1.0 + 2.0 * np.sum(np.cos(phases), axis=1)) / basis.count
    else:
        R = m.radius
        c = np.clip(np.sum(xs * ys, axis=-1) / (R * R), -1.0, 1.0)
        if basis.regime is Regime.MONOCHROMATIC:
            l = int(basis.degrees[0])
            w = np.zeros(l + 1)
            w[l] = 1.0
            vals = _legendre_sum(w, c)
        else:
            lmax = basis.max_degree
            w = 2.0 * np.arange(lmax + 1) + 1.0
            vals = _legendre_sum(w, c) / basis.count
    return vals if np.asarray(x).ndim > 1 or np.asarray(y).ndim > 1 else float(vals[0])
