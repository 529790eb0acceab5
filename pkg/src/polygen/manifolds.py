"""Analytic target distributions for the synthetic experiments.

Five manifolds, each with a seeded sampler, a pointwise residual (an
analytic distance proxy measuring how far a point lies off the manifold),
and a bin-coverage metric over the manifold's parameter range that flags
mode collapse.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

MANIFOLD_IDS = ("sin2d", "astroid", "sin3d", "swissroll", "gabriels_horn")

# grid resolution for the swiss-roll nearest-point search
_SWISSROLL_GRID = 2000


@dataclass(frozen=True)
class ManifoldSpec:
    """Target distribution identifier plus its shape parameters.

    ``alpha`` scales the astroid and the horn; ``noise`` is the additive
    Gaussian sigma of the swiss roll; ``astroid_full`` switches the astroid
    parameter range from the literal ``[-alpha, alpha]`` arc to the full
    four-cusp curve ``[0, 2*pi]``; ``margin`` is how far past the sine's
    x-range a point may sit before its residual is treated as infinite.
    """

    id: str
    alpha: float = 1.0
    noise: float = 0.05
    astroid_full: bool = False
    margin: float = 1.0

    def __post_init__(self):
        if self.id not in MANIFOLD_IDS:
            raise ValueError(f"unknown manifold {self.id!r}, expected one of {MANIFOLD_IDS}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")

    @property
    def dim(self) -> int:
        return 2 if self.id in ("sin2d", "astroid") else 3

    @property
    def param_range(self) -> tuple:
        if self.id == "sin2d":
            return (0.0, 2.0 * np.pi)
        if self.id == "astroid":
            return (0.0, 2.0 * np.pi) if self.astroid_full else (-self.alpha, self.alpha)
        if self.id == "sin3d":
            return (-0.5, 0.5)
        if self.id == "swissroll":
            return (0.0, 1.0)
        return (1.0, 4.0)  # gabriels_horn: the x coordinate


def default_latent_dim(manifold_id: str) -> int:
    """Latent size used when a config does not pin one: 1 for the sine
    curve, 2 for the other planar target, 3 for the surfaces."""
    return {"sin2d": 1, "astroid": 2, "sin3d": 3, "swissroll": 3, "gabriels_horn": 3}[manifold_id]


def sample_rng(spec: ManifoldSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `n` points from the manifold using an existing generator."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if spec.id == "sin2d":
        x = rng.uniform(0.0, 2.0 * np.pi, n)
        return np.column_stack([x, np.sin(x)])
    if spec.id == "astroid":
        lo, hi = spec.param_range
        t = rng.uniform(lo, hi, n)
        return spec.alpha * np.column_stack([np.cos(t) ** 3, np.sin(t) ** 3])
    if spec.id == "sin3d":
        x = rng.uniform(-0.5, 0.5, n)
        y = rng.uniform(-0.5, 0.5, n)
        return np.column_stack([x, y, np.sin(10.0 * np.sqrt(x**2 + y**2))])
    if spec.id == "swissroll":
        t = rng.uniform(0.0, 1.0, n)
        y = rng.uniform(0.0, 1.0, n)
        pts = np.column_stack([t * np.sin(t), y, t * np.cos(t)])
        return pts + spec.noise * rng.standard_normal((n, 3))
    t = rng.uniform(0.0, 160.0 * np.pi, n)
    x = rng.uniform(1.0, 4.0, n)
    return np.column_stack([x, spec.alpha * np.cos(t) / x, spec.alpha * np.sin(t) / x])


def sample(spec: ManifoldSpec, n: int, seed: int) -> np.ndarray:
    """Deterministically draw `n` points (counter-based generator)."""
    return sample_rng(spec, n, np.random.Generator(np.random.Philox(seed)))


def _swissroll_curve():
    t = np.linspace(0.0, 1.0, _SWISSROLL_GRID)
    return t, t * np.sin(t), t * np.cos(t)


def residuals(spec: ManifoldSpec, points) -> np.ndarray:
    """Vectorized residual for an ``(n, dim)`` array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != spec.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, manifold {spec.id} needs {spec.dim}")
    if spec.id == "sin2d":
        r = np.abs(pts[:, 1] - np.sin(pts[:, 0]))
        out_of_range = (pts[:, 0] < -spec.margin) | (pts[:, 0] > 2.0 * np.pi + spec.margin)
        return np.where(out_of_range, np.inf, r)
    if spec.id == "astroid":
        return np.abs(np.abs(pts[:, 0]) ** (2.0 / 3.0) + np.abs(pts[:, 1]) ** (2.0 / 3.0) - spec.alpha ** (2.0 / 3.0))
    if spec.id == "sin3d":
        return np.abs(pts[:, 2] - np.sin(10.0 * np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)))
    if spec.id == "swissroll":
        _, cx, cz = _swissroll_curve()
        planar = np.sqrt(
            np.min((pts[:, 0, None] - cx[None, :]) ** 2 + (pts[:, 2, None] - cz[None, :]) ** 2, axis=1)
        )
        dy = np.maximum(np.maximum(pts[:, 1] - 1.0, -pts[:, 1]), 0.0)
        return np.sqrt(planar**2 + dy**2)
    return np.abs((pts[:, 0] * pts[:, 1]) ** 2 + (pts[:, 0] * pts[:, 2]) ** 2 - spec.alpha**2)


def residual(spec: ManifoldSpec, point) -> float:
    """Residual of a single point."""
    return float(residuals(spec, np.asarray(point, dtype=np.float64)[None, :])[0])


def _param_estimate(spec: ManifoldSpec, pts: np.ndarray) -> np.ndarray:
    """Map points back to the manifold's scalar parameter for binning."""
    if spec.id == "sin2d":
        return pts[:, 0]
    if spec.id == "astroid":
        t = np.arctan2(np.cbrt(pts[:, 1] / spec.alpha), np.cbrt(pts[:, 0] / spec.alpha))
        if spec.astroid_full:
            t = np.mod(t, 2.0 * np.pi)
        return t
    if spec.id == "sin3d":
        return pts[:, 0]
    if spec.id == "swissroll":
        t, cx, cz = _swissroll_curve()
        idx = np.argmin((pts[:, 0, None] - cx[None, :]) ** 2 + (pts[:, 2, None] - cz[None, :]) ** 2, axis=1)
        return t[idx]
    return pts[:, 0]


def coverage(spec: ManifoldSpec, points, bins: int = 16) -> float:
    """Fraction of parameter-range bins holding at least a 0.25/bins share
    of the points (out-of-range parameters are clipped into the end bins)."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != spec.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, manifold {spec.id} needs {spec.dim}")
    if pts.shape[0] == 0:
        return 0.0
    lo, hi = spec.param_range
    params = np.clip(_param_estimate(spec, pts), lo, hi)
    counts, _ = np.histogram(params, bins=bins, range=(lo, hi))
    threshold = 0.25 / bins * pts.shape[0]
    return float(np.count_nonzero(counts >= threshold) / bins)


def write_samples_csv(path, points) -> None:
    """One point per row under an ``x1,x2[,x3]`` header."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    header = [f"x{i + 1}" for i in range(pts.shape[1])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header not in (["x1", "x2"], ["x1", "x2", "x3"]):
            raise ValueError(f"expected an x1,x2[,x3] header in {path}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return np.asarray(rows, dtype=np.float64).reshape(-1, len(header))
