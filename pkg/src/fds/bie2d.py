"""Interior Dirichlet Laplace problem on a smooth closed curve.

The solution is sought as a double layer potential with density sigma;
collocation at nodes equispaced in parameter with trapezoidal weights
w_j = (2 pi / N) |gamma'(t_j)| gives the Nystrom system

    (-1/2 I + K) sigma = f,     K[i, j] = w_j d(x_i, x_j),

where d(x, y) = n(y) . grad_y phi(x - y) and phi(r) = -log|r| / (2 pi).
The kernel is smooth on the curve; its diagonal limit is -kappa/(4 pi)
with kappa the signed curvature of the counterclockwise
parameterization. Under these conventions the double layer of the unit
density equals -1 everywhere inside (the Gauss identity), which the
tests pin down against an adaptive-quadrature oracle.

Also here: proxy-surface compression of far-field blocks of the Nystrom
matrix, and the separated multipole expansion of the log kernel used to
explain the observed ranks.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import (
    LowRankFactor,
    dense_lu_solve,
    interpolative_decomposition,
    recompress,
)

__all__ = [
    "Curve",
    "make_curve",
    "dlp_kernel",
    "BieSystem",
    "assemble_bie",
    "solve_interior_dirichlet",
    "eval_double_layer",
    "SeparationError",
    "proxy_compress_block",
    "multipole_approx",
    "laplace_fundamental",
]

GAUSS_INTERIOR_CONSTANT = -1.0  # value of D[1] inside Gamma under our conventions


class SeparationError(ValueError):
    """A geometric separation precondition was violated."""


def laplace_fundamental(r):
    """phi(r) = -log(r) / (2 pi), the 2D Laplace fundamental solution."""
    return -np.log(r) / (2.0 * np.pi)


@dataclass
class Curve:
    """Closed analytic curve sampled at N parameter-equispaced nodes."""

    kind: str
    t: np.ndarray  # parameter values on [0, 2 pi)
    x: np.ndarray  # nodes, (N, 2)
    normal: np.ndarray  # outward unit normals, (N, 2)
    speed: np.ndarray  # |gamma'(t_j)|
    curvature: np.ndarray  # signed curvature of the CCW parameterization
    weights: np.ndarray  # (2 pi / N) * speed

    @property
    def N(self) -> int:
        return len(self.t)

    def max_spacing(self) -> float:
        d = np.linalg.norm(np.roll(self.x, -1, axis=0) - self.x, axis=1)
        return float(d.max())


def _parameterization(kind, params):
    if kind == "circle":
        (r,) = params
        if r <= 0:
            raise ValueError("circle radius must be positive")
        return (
            lambda t: np.column_stack([r * np.cos(t), r * np.sin(t)]),
            lambda t: np.column_stack([-r * np.sin(t), r * np.cos(t)]),
            lambda t: np.column_stack([-r * np.cos(t), -r * np.sin(t)]),
        )
    if kind == "ellipse":
        a, b = params
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        return (
            lambda t: np.column_stack([a * np.cos(t), b * np.sin(t)]),
            lambda t: np.column_stack([-a * np.sin(t), b * np.cos(t)]),
            lambda t: np.column_stack([-a * np.cos(t), -b * np.sin(t)]),
        )
    if kind == "starfish":
        amp, arms = params
        if not 0 < amp < 1:
            raise ValueError("starfish amplitude must lie in (0, 1)")
        arms = int(arms)

        def gamma(t):
            r = 1.0 + amp * np.cos(arms * t)
            return np.column_stack([r * np.cos(t), r * np.sin(t)])

        def dgamma(t):
            r = 1.0 + amp * np.cos(arms * t)
            dr = -amp * arms * np.sin(arms * t)
            return np.column_stack(
                [dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)]
            )

        def ddgamma(t):
            r = 1.0 + amp * np.cos(arms * t)
            dr = -amp * arms * np.sin(arms * t)
            ddr = -amp * arms * arms * np.cos(arms * t)
            return np.column_stack(
                [
                    ddr * np.cos(t) - 2 * dr * np.sin(t) - r * np.cos(t),
                    ddr * np.sin(t) + 2 * dr * np.cos(t) - r * np.sin(t),
                ]
            )

        return gamma, dgamma, ddgamma
    raise ValueError(f"unknown curve kind {kind!r}")


def _coarse_intersection_scan(x):
    """Reject self-intersecting polygons on a coarse node subsample."""
    n = min(len(x), 128)
    idx = np.linspace(0, len(x), n, endpoint=False).astype(int)
    p = x[idx]
    q = np.roll(p, -1, axis=0)
    d = q - p
    for i in range(n):
        # segment i against all non-adjacent segments j > i + 1
        j = np.arange(i + 2, n - (1 if i == 0 else 0))
        if len(j) == 0:
            continue
        r = d[i]
        s = d[j]
        pq = p[j] - p[i]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        mask = np.abs(denom) > 1e-15
        tt = (pq[:, 0] * s[:, 1] - pq[:, 1] * s[:, 0])[mask] / denom[mask]
        uu = (pq[:, 0] * r[1] - pq[:, 1] * r[0])[mask] / denom[mask]
        if np.any((tt > 0) & (tt < 1) & (uu > 0) & (uu < 1)):
            return True
    return False


def make_curve(kind, N, *params) -> Curve:
    """Sample a named analytic curve: circle(r), ellipse(a, b),
    starfish(amp, arms).

    Nodes are equispaced in parameter; weights carry the speed factor so
    that sums approximate arclength integrals with spectral accuracy.
    """
    if N < 16 or N % 2:
        raise ValueError(f"need an even node count N >= 16, got {N}")
    gamma, dgamma, ddgamma = _parameterization(kind, params)
    t = 2.0 * np.pi * np.arange(N) / N
    x = gamma(t)
    dx = dgamma(t)
    ddx = ddgamma(t)
    speed = np.linalg.norm(dx, axis=1)
    if np.any(speed <= 0):
        raise ValueError("degenerate parameterization (zero speed)")
    normal = np.column_stack([dx[:, 1], -dx[:, 0]]) / speed[:, None]
    curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
    if _coarse_intersection_scan(x):
        raise ValueError(f"{kind} curve self-intersects for parameters {params}")
    return Curve(
        kind=kind,
        t=t,
        x=x,
        normal=normal,
        speed=speed,
        curvature=curvature,
        weights=(2.0 * np.pi / N) * speed,
    )


def dlp_kernel(x, y, n_y):
    """Double layer kernel d(x, y) = n(y) . grad_y phi(x - y).

    With phi = -log|r|/(2 pi) this is (x - y) . n(y) / (2 pi |x - y|^2).
    Broadcasts over leading dimensions; x == y raises (callers must use
    the curvature limit).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = x - y
    r2 = np.sum(r * r, axis=-1)
    if np.any(r2 == 0.0):
        raise ValueError("kernel evaluated at coincident points; use the curvature limit")
    return np.sum(r * np.asarray(n_y), axis=-1) / (2.0 * np.pi * r2)


@dataclass
class BieSystem:
    curve: Curve
    matrix: np.ndarray  # -1/2 I + K, with the curvature limit on the diagonal
    rhs: np.ndarray


def assemble_bie(curve: Curve, f) -> BieSystem:
    """Nystrom system (-1/2 I + K) sigma = f on the curve nodes."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != curve.N:
        raise ValueError("boundary data must be sampled at the curve nodes")
    x = curve.x
    r = x[:, None, :] - x[None, :, :]
    r2 = np.sum(r * r, axis=-1)
    np.fill_diagonal(r2, 1.0)  # placeholder, overwritten below
    K = np.sum(r * curve.normal[None, :, :], axis=-1) / (2.0 * np.pi * r2)
    np.fill_diagonal(K, -curve.curvature / (4.0 * np.pi))
    A = K * curve.weights[None, :]
    A[np.diag_indices_from(A)] -= 0.5
    return BieSystem(curve=curve, matrix=A, rhs=f)


def solve_interior_dirichlet(curve: Curve, f, backend="dense", tol=1e-10):
    """Density sigma solving the interior Dirichlet problem with data f.

    ``backend`` picks the linear solver applied to the Nystrom system:
    a dense LU, or HODLR / HBS compression at tolerance ``tol`` followed
    by the corresponding structured inverse.
    """
    from . import hbs as _hbs
    from . import hodlr as _hodlr
    from .tree import build_uniform_tree

    system = assemble_bie(curve, f)
    if backend == "dense":
        return dense_lu_solve(system.matrix, system.rhs)
    tree = build_uniform_tree(curve.N, leaf_size=max(32, min(64, curve.N // 4)))
    if backend == "hodlr":
        H = _hodlr.compress_to_hodlr(system.matrix, tree, tol)
        return _hodlr.invert_woodbury(H).apply(system.rhs)
    if backend == "hbs":
        H = _hbs.compress_to_hbs(system.matrix, tree, tol)
        return _hbs.hbs_invert(H).apply(system.rhs)
    raise ValueError(f"unknown backend {backend!r}")


def eval_double_layer(curve: Curve, sigma, targets):
    """Evaluate u = D[sigma] at interior targets by plain quadrature.

    Returns (values, near_mask); entries of ``near_mask`` flag targets
    closer to the curve than five node spacings, where the plain rule is
    inaccurate (a warning is also emitted; no corrected quadrature here).
    """
    sigma = np.asarray(sigma, dtype=float)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    K = dlp_kernel(targets[:, None, :], curve.x[None, :, :], curve.normal[None, :, :])
    u = K @ (curve.weights * sigma)
    dists = np.min(
        np.linalg.norm(targets[:, None, :] - curve.x[None, :, :], axis=-1), axis=1
    )
    near = dists < 5.0 * curve.max_spacing()
    if np.any(near):
        warnings.warn(
            f"{int(near.sum())} target(s) within 5 node spacings of the curve; "
            "plain quadrature is inaccurate there",
            stacklevel=2,
        )
    return u, near


# -- proxy-surface compression --------------------------------------------------


def proxy_compress_block(curve: Curve, source_idx, far_idx, center, radius, n_proxy, tol):
    """Low-rank factor of the far-field block A(far, source) via a proxy circle.

    The potential on any circle enclosing the sources determines their
    field everywhere outside, so the small source-to-proxy matrix is
    skeletonized instead of the tall source-to-far block: its column ID
    picks the skeleton sources, and the factor is A(far, skeleton) times
    the interpolation weights. Entries follow the assembled system,
    A(i, j) = w_j d(x_i, x_j). The proxy basis resolves *every* exterior
    direction, while the actual far nodes occupy only some of them, so
    the raw skeleton runs systematically larger than the block's own
    numerical rank; a final O((m + n) k^2) recompression of the factor
    pair removes that slack without ever forming the dense block.
    """
    source_idx = np.asarray(source_idx, dtype=int)
    far_idx = np.asarray(far_idx, dtype=int)
    center = np.asarray(center, dtype=float)
    src = curve.x[source_idx]
    src_radius = np.max(np.linalg.norm(src - center, axis=1))
    if radius < 1.5 * src_radius:
        raise SeparationError(
            f"proxy radius {radius:.3g} is below 1.5x the source patch radius "
            f"{src_radius:.3g}"
        )
    if far_idx.size:
        far_dist = np.linalg.norm(curve.x[far_idx] - center, axis=1)
        if np.min(far_dist) <= radius:
            raise SeparationError("far nodes intersect the proxy circle")
    if far_idx.size == 0:
        z = np.zeros
        return LowRankFactor(z((0, 0)), z((len(source_idx), 0)))
    ang = 2.0 * np.pi * np.arange(n_proxy) / n_proxy
    proxy = center + radius * np.column_stack([np.cos(ang), np.sin(ang)])
    B = dlp_kernel(
        proxy[:, None, :], curve.x[source_idx][None, :, :],
        curve.normal[source_idx][None, :, :],
    ) * curve.weights[source_idx][None, :]
    cid = interpolative_decomposition(B, tol)
    Ufar = dlp_kernel(
        curve.x[far_idx][:, None, :],
        curve.x[source_idx[cid.skeleton]][None, :, :],
        curve.normal[source_idx[cid.skeleton]][None, :, :],
    ) * curve.weights[source_idx[cid.skeleton]][None, :]
    return recompress(LowRankFactor(Ufar, cid.interp_full().conj().T), tol)


# -- multipole expansion of the log kernel --------------------------------------


def multipole_approx(sources, charges, targets, center, p):
    """Truncated separated expansion of sum_s q_s * (-log|x - y_s|).

    ``p`` counts retained harmonics: the monopole -log(r) plus p - 1
    cosine/sine pairs of the standard 2D multipole expansion about
    ``center``. Targets must be well separated from the source box
    (outside the concentric box of three times its side length).
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    charges = np.asarray(charges, dtype=float)
    center = np.asarray(center, dtype=float)
    if p < 1:
        raise ValueError("need at least the monopole term (p >= 1)")
    half = np.max(np.abs(sources - center))  # half the source box side
    if np.any(np.max(np.abs(targets - center), axis=1) < 3.0 * half):
        raise SeparationError(
            "target inside the 3x concentric box; expansion not valid there"
        )
    ds = sources - center
    rs = np.hypot(ds[:, 0], ds[:, 1])
    ths = np.arctan2(ds[:, 1], ds[:, 0])
    dt = targets - center
    rt = np.hypot(dt[:, 0], dt[:, 1])
    tht = np.arctan2(dt[:, 1], dt[:, 0])
    u = np.sum(charges) * (-np.log(rt))
    for j in range(1, p):
        rj = rs**j
        cj = np.dot(charges, rj * np.cos(j * ths))
        sj = np.dot(charges, rj * np.sin(j * ths))
        u += (rt ** (-j) / j) * (np.cos(j * tht) * cj + np.sin(j * tht) * sj)
    return u
