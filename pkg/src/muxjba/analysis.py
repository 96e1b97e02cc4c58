"""Switching decisions, S-curves and readout error budgets."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = [
    "AnalysisError",
    "SCurve",
    "Separatrix",
    "ErrorBudget",
    "binomial_std",
    "fit_separatrix",
    "split_clusters",
    "projected_histogram",
    "scurve_width",
    "scurve_crossing",
    "scurve_separation",
    "reconstruct_ideal_scurves",
    "optimal_index",
    "error_budget",
]


class AnalysisError(ValueError):
    pass


def binomial_std(p, n):
    """Standard deviation of a switching probability estimated from n shots."""
    n = np.asarray(n)
    if np.any(n < 1):
        raise AnalysisError("n must be >= 1")
    p = np.asarray(p, dtype=float)
    out = np.sqrt(p * (1.0 - p) / n)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SCurve:
    """Switching probability versus readout power (dB)."""

    power_db: np.ndarray
    p_switch: np.ndarray
    n_shots: np.ndarray

    def __post_init__(self):
        power = np.asarray(self.power_db, dtype=float)
        p = np.asarray(self.p_switch, dtype=float)
        n = np.broadcast_to(np.asarray(self.n_shots, dtype=np.int64), p.shape).copy()
        if power.shape != p.shape or p.ndim != 1:
            raise AnalysisError("power_db and p_switch must be 1-D and of equal length")
        if np.any(p < 0) or np.any(p > 1):
            raise AnalysisError("switching probabilities must lie in [0, 1]")
        if np.any(np.diff(power) < 0):
            raise AnalysisError("power grid must be non-decreasing")
        object.__setattr__(self, "power_db", power)
        object.__setattr__(self, "p_switch", p)
        object.__setattr__(self, "n_shots", n)

    @property
    def std(self):
        return binomial_std(self.p_switch, self.n_shots)

    def __len__(self):
        return self.p_switch.size

    def shifted(self, db):
        return SCurve(self.power_db + db, self.p_switch, self.n_shots)

    def at(self, power_db):
        """Linear interpolation, held constant beyond the grid."""
        return np.interp(power_db, self.power_db, self.p_switch)

    def to_rows(self):
        return [
            (float(x), float(p), int(n), float(s))
            for x, p, n, s in zip(self.power_db, self.p_switch, self.n_shots, np.atleast_1d(self.std))
        ]


@dataclass(frozen=True)
class Separatrix:
    """Straight decision boundary ``normal . (I, Q) = offset`` in the IQ plane.

    Points with a projection above ``offset`` are classified as switched.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        norm = np.hypot(*normal)
        if norm == 0:
            raise AnalysisError("separatrix normal must be non-zero")
        object.__setattr__(self, "normal", normal / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def project(self, iq):
        iq = np.asarray(iq, dtype=float)
        return iq @ self.normal

    def decide(self, iq):
        return self.project(iq) > self.offset


def _as_cloud(points):
    pts = np.asarray(
        [(p.i_value, p.q_value) for p in points] if len(points) and hasattr(points[0], "i_value") else points,
        dtype=float,
    )
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise AnalysisError("clouds must be (N, 2) arrays of (I, Q)")
    return pts


def projected_histogram(values, bin_width):
    lo, hi = float(np.min(values)), float(np.max(values))
    n_bins = max(1, int(math.ceil((hi - lo) / bin_width)) + 1)
    edges = lo + bin_width * (np.arange(n_bins + 1) - 0.5)
    counts, _ = np.histogram(values, bins=edges)
    return counts, edges


def fit_separatrix(cloud_a, cloud_b, bins_per_std=4):
    """Fisher discriminant between two IQ clouds.

    The normal is ``S_w^-1 (mu_b - mu_a)``; the threshold sits at the
    emptiest histogram bin between the two projected modes. ``bins_per_std``
    sets the histogram resolution relative to the pooled cloud width.
    Points on the ``cloud_b`` side are labelled switched.
    """
    a = _as_cloud(cloud_a)
    b = _as_cloud(cloud_b)
    if len(a) < 50 or len(b) < 50:
        raise AnalysisError("each cloud needs at least 50 points")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    pooled = (np.cov(a, rowvar=False) * (len(a) - 1) + np.cov(b, rowvar=False) * (len(b) - 1)) / (
        len(a) + len(b) - 2
    )
    diff = mu_b - mu_a
    # tiny ridge keeps the solve defined for degenerate (e.g. 1-D) clouds
    ridge = 1e-12 * max(np.trace(pooled), 1e-300)
    w = np.linalg.solve(pooled + ridge * np.eye(2), diff)
    if not np.all(np.isfinite(w)) or np.hypot(*w) == 0:
        raise AnalysisError("clouds are degenerate: no separation between centroids")
    w = w / np.hypot(*w)
    pa, pb = a @ w, b @ w
    spread = math.sqrt(0.5 * (pa.var(ddof=1) + pb.var(ddof=1)))
    gap = pb.mean() - pa.mean()
    if spread == 0 or gap < spread:
        raise AnalysisError("clouds are degenerate: centroid separation below one pooled std")

    counts, edges = projected_histogram(np.concatenate([pa, pb]), spread / bins_per_std)
    centers = 0.5 * (edges[:-1] + edges[1:])
    lo_mode = int(np.argmin(np.abs(centers - np.median(pa))))
    hi_mode = int(np.argmin(np.abs(centers - np.median(pb))))
    between = counts[lo_mode : hi_mode + 1]
    cmin = between.min()
    idx = np.flatnonzero(between == cmin) + lo_mode
    # centre of the longest run of minimal bins
    runs = np.split(idx, np.flatnonzero(np.diff(idx) != 1) + 1)
    best = max(runs, key=len)
    offset = 0.5 * (centers[best[0]] + centers[best[-1]])
    return Separatrix(w, offset)


def split_clusters(iq, iterations=50):
    """Two-means split of a pooled IQ set into (low, high) clouds by amplitude."""
    iq = np.asarray(iq, dtype=float)
    amp = np.hypot(iq[:, 0], iq[:, 1])
    centers = np.array([iq[np.argmin(amp)], iq[np.argmax(amp)]])
    labels = np.zeros(len(iq), dtype=bool)
    for _ in range(iterations):
        d0 = np.sum((iq - centers[0]) ** 2, axis=1)
        d1 = np.sum((iq - centers[1]) ** 2, axis=1)
        new = d1 < d0
        if np.array_equal(new, labels) and _ > 0:
            break
        labels = new
        if labels.all() or not labels.any():
            break
        centers = np.array([iq[~labels].mean(axis=0), iq[labels].mean(axis=0)])
    return iq[~labels], iq[labels]


def _probit(p, n):
    floor = 0.5 / np.maximum(n, 1)
    return ndtri(np.clip(p, floor, 1.0 - floor))


def scurve_crossing(s, level):
    """Power where ``s`` first rises through ``level``.

    Interpolates linearly in probit space between the bracketing points,
    which is exact for error-function curves.
    """
    p, x = s.p_switch, s.power_db
    above = p >= level
    if not above.any() or above[0]:
        raise AnalysisError(f"S-curve does not cross p = {level}")
    k = int(np.argmax(above))
    if p[k] == level or x[k] == x[k - 1]:
        return float(x[k])
    z = _probit(p[k - 1 : k + 1], s.n_shots[k - 1 : k + 1])
    zl = ndtri(level)
    if z[1] == z[0]:
        return float(x[k])
    frac = (zl - z[0]) / (z[1] - z[0])
    frac = min(max(frac, 0.0), 1.0)
    return float(x[k - 1] + frac * (x[k] - x[k - 1]))


def scurve_width(s, lo=0.01, hi=0.99):
    """Power span (dB) between the ``lo`` and ``hi`` switching levels."""
    return scurve_crossing(s, hi) - scurve_crossing(s, lo)


def scurve_separation(s0, s1):
    """50 % power of ``s0`` minus that of ``s1`` (dB)."""
    return scurve_crossing(s0, 0.5) - scurve_crossing(s1, 0.5)


def reconstruct_ideal_scurves(s0, s1, p_th=0.0, relax_shift=None, max_jump=0.02):
    """Ideal ground and excited S-curves from measured ones.

    The ground curve keeps its upper half and takes its lower half from the
    excited curve shifted onto it; the excited curve keeps its lower half and
    takes its upper half from the shifted ground curve. Shifts default to the
    difference of the 50 % powers, making both splices continuous. ``p_th``
    undoes the thermal dilution of the excited preparation before splicing.
    Both outputs live on the grid of ``s0``.
    """
    x = s0.power_db
    x50_0 = scurve_crossing(s0, 0.5)
    p1 = np.clip(s1.p_switch / (1.0 - p_th), 0.0, 1.0)
    s1c = SCurve(s1.power_db, p1, s1.n_shots)
    x50_1 = scurve_crossing(s1c, 0.5)
    shift_g = x50_0 - x50_1
    shift_e = -shift_g if relax_shift is None else -abs(relax_shift)

    lower = s1c.at(x - shift_g)
    ground = np.where(x >= x50_0, s0.at(x), lower)
    upper = s0.at(x - shift_e)
    x_split = x50_1
    excited = np.where(x >= x_split, upper, s1c.at(x))

    jump_g = abs(float(s0.at(x50_0)) - float(s1c.at(x50_0 - shift_g)))
    jump_e = abs(float(s1c.at(x_split)) - float(s0.at(x_split - shift_e)))
    if max(jump_g, jump_e) > max_jump:
        raise AnalysisError(
            f"splice discontinuity {max(jump_g, jump_e):.3f} exceeds {max_jump} in p"
        )
    n = np.minimum(s0.n_shots, np.interp(x, s1.power_db, s1.n_shots).astype(np.int64))
    return SCurve(x, ground, n), SCurve(x, excited, n)


def optimal_index(p_ground, p_excited):
    """Grid index of maximum contrast ``p_excited - p_ground``."""
    contrast = np.asarray(p_excited) - np.asarray(p_ground)
    return int(np.argmax(contrast))


@dataclass
class ErrorBudget:
    ground_error: float
    excited_error_noshelve: float
    excited_error_shelve: float
    thermal_component: float
    prep_relaxation_noshelve: float
    prep_relaxation_shelve: float
    readout_relaxation_noshelve: float
    readout_relaxation_shelve: float
    optimal_power_noshelve: float = math.nan
    optimal_power_shelve: float = math.nan
    ground_error_at_shelve_power: float = math.nan
    extras: dict = field(default_factory=dict)

    @property
    def prep_relaxation_component(self):
        return self.prep_relaxation_noshelve

    @property
    def readout_relaxation_component(self):
        return self.readout_relaxation_noshelve

    def check(self, slack=0.002):
        """True if every attributed component is within its total."""
        return (
            self.thermal_component <= self.ground_error + slack
            and self.thermal_component + self.prep_relaxation_noshelve <= self.excited_error_noshelve + slack
            and self.thermal_component + self.prep_relaxation_shelve <= self.excited_error_shelve + slack
        )

    def to_json(self, **kwargs):
        return json.dumps(asdict(self), **kwargs)


def error_budget(p0_curve, p1_curve, p1_shelved_curve, params, prep_relaxation=None):
    """Error totals at the optimal powers and their attribution.

    ``prep_relaxation`` is ``(no_shelve, shelve)`` relaxation losses before
    readout; by default they are estimated with :func:`prep_relaxation_loss`
    from the control-pulse timeline of ``params``.
    """
    grid = p0_curve.power_db
    for s in (p1_curve, p1_shelved_curve):
        if not np.array_equal(s.power_db, grid):
            raise AnalysisError("curves must share the power grid")
    k1 = optimal_index(p0_curve.p_switch, p1_curve.p_switch)
    k2 = optimal_index(p0_curve.p_switch, p1_shelved_curve.p_switch)
    ground = float(p0_curve.p_switch[k1])
    e1 = 1.0 - float(p1_curve.p_switch[k1])
    e2 = 1.0 - float(p1_shelved_curve.p_switch[k2])
    p_th = float(params.thermal_excited_population)
    if prep_relaxation is None:
        from .transmon import prep_relaxation_loss

        prep_relaxation = (
            prep_relaxation_loss(params, shelve=False),
            prep_relaxation_loss(params, shelve=True),
        )
    r1, r2 = (float(v) for v in prep_relaxation)
    return ErrorBudget(
        ground_error=ground,
        excited_error_noshelve=e1,
        excited_error_shelve=e2,
        thermal_component=p_th,
        prep_relaxation_noshelve=r1,
        prep_relaxation_shelve=r2,
        readout_relaxation_noshelve=e1 - p_th - r1,
        readout_relaxation_shelve=e2 - p_th - r2,
        optimal_power_noshelve=float(grid[k1]),
        optimal_power_shelve=float(grid[k2]),
        ground_error_at_shelve_power=float(p0_curve.p_switch[k2]),
    )
