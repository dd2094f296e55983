"""Exact and sampled concentration functions.

``Q(F, lam)`` is the largest mass a closed Euclidean ball of diameter ``lam``
can carry. For discrete laws it is computed exactly in d = 1 (interval sweep)
and d = 2 (angular sweep over disks through an atom); otherwise it is
estimated from samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (DimensionError, DiscreteDist1D, DiscreteDistD, DomainError,
                   ResourceError, WeightMatrix, _scaled_tol, merge_points)

DEFAULT_ENUMERATION_CAP = 2 ** 24
DEFAULT_2D_ATOM_CAP = 2000


@dataclass(frozen=True)
class SampleBatch:
    points: np.ndarray  # (count, d)
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def scaled(self, z: float) -> "SampleBatch":
        return SampleBatch(self.points * z, self.seed)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            fh.write(f"# seed={self.seed} count={self.count} d={self.dimension}\n")
            w = csv.writer(fh)
            w.writerow([f"x{j}" for j in range(self.dimension)])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SampleBatch":
        with open(Path(path)) as fh:
            header = fh.readline()
            seed = int(header.split("seed=")[1].split()[0])
            pts = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
        return cls(pts, seed)


# --------------------------------------------------------------------------
# enumeration

def weighted_sum_dist(a: WeightMatrix, F: DiscreteDist1D,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> DiscreteDistD:
    """Exact law of S_a = sum_k X_k a_k for X_k i.i.d. ~ F.

    The law is built by convolving one coefficient at a time and merging
    coincident points after each step, so the work is bounded by the support
    sizes actually reached; ``cap`` bounds the raw outcome count
    ``len(F) ** n``.
    """
    m = len(F)
    if m > 1 and a.n * math.log(m) > math.log(cap) + 1e-12:
        raise ResourceError(f"{m}^{a.n} outcomes exceed the enumeration cap {cap}; "
                            "use the Monte Carlo path")
    pts = np.zeros((1, a.d))
    ms = np.ones(1)
    for row in a.rows:
        step = F.atoms[:, None] * row[None, :]  # (m, d)
        pts = (pts[:, None, :] + step[None, :, :]).reshape(-1, a.d)
        ms = np.multiply.outer(ms, F.masses).ravel()
        pts, ms = merge_points(pts, ms)
    return DiscreteDistD(pts, ms)


# --------------------------------------------------------------------------
# exact concentration functions

def _window_masses(x: np.ndarray, p: np.ndarray, lam: float) -> np.ndarray:
    """Mass of [x_i, x_i + lam] for every sorted atom x_i."""
    eps = _scaled_tol(x)
    cum = np.concatenate([[0.0], np.cumsum(p)])
    j = np.searchsorted(x, x + lam + eps, side="right")
    i = np.arange(x.size)
    return cum[j] - cum[i]


def q_exact_1d(F, lam: float) -> float:
    """Exact concentration function of a discrete law on the line.

    Closed windows: an atom at distance exactly ``lam`` from the left end is
    counted. The supremum is attained with the left end at an atom.
    """
    if isinstance(F, DiscreteDistD):
        F = F.to_1d()
    lam = float(lam)
    if math.isnan(lam) or lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam!r}")
    if math.isinf(lam):
        return 1.0
    if lam == 0:
        return float(F.masses.max())
    return float(min(1.0, _window_masses(F.atoms, F.masses, lam).max()))


def q_exact_2d(F: DiscreteDistD, lam: float, atom_cap: int = DEFAULT_2D_ATOM_CAP) -> float:
    """Exact maximal mass of a closed disk of diameter ``lam`` in the plane.

    An optimal disk can be moved until an atom lies on its boundary; for each
    such anchor atom the admissible centers form a circle, and every other
    atom within distance ``lam`` is covered on a closed arc of it. A sweep
    over arc endpoints gives the best center for that anchor.
    """
    if F.dimension != 2:
        raise DimensionError(f"q_exact_2d needs d = 2, got d = {F.dimension}")
    lam = float(lam)
    if math.isnan(lam) or lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam!r}")
    if math.isinf(lam):
        return 1.0
    m = len(F)
    if m > atom_cap:
        raise ResourceError(f"{m} atoms exceed the 2-d exact cap {atom_cap}")
    pts, p = F.points, F.masses
    if lam == 0 or m == 1:
        return float(p.max())
    r = lam / 2.0
    eps = _scaled_tol(pts)
    best = float(p.max())
    for i in range(m):
        diff = pts - pts[i]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        near = (dist <= 2 * r + eps)
        near[i] = False
        if not np.any(near):
            continue
        dn = dist[near]
        theta = np.arctan2(diff[near, 1], diff[near, 0])
        alpha = np.arccos(np.clip(dn / (2 * r), -1.0, 1.0))
        # widen each arc by the angular equivalent of the merge tolerance
        alpha = alpha + eps / max(r, eps)
        start = np.mod(theta - alpha, 2 * np.pi)
        w = p[near]
        ang = np.concatenate([start, start + 2 * alpha, start + 2 * np.pi,
                              start + 2 * alpha + 2 * np.pi])
        delta = np.concatenate([w, -w, w, -w])
        # entries before exits at equal angles: arcs are closed
        order = np.lexsort((-delta, ang))
        run = np.cumsum(delta[order])
        best = max(best, float(p[i] + run.max()))
    return float(min(1.0, best))


def q_exact(F, lam: float) -> float:
    """Dispatch on dimension (d <= 2)."""
    if isinstance(F, DiscreteDist1D):
        return q_exact_1d(F, lam)
    if F.dimension == 1:
        return q_exact_1d(F.to_1d(), lam)
    if F.dimension == 2:
        return q_exact_2d(F, lam)
    raise DimensionError("exact Q is only available for d <= 2")


# --------------------------------------------------------------------------
# sampling

def sample_H(a: WeightMatrix, lambda_exp: float, count: int, seed: int) -> SampleBatch:
    """Draw from H_1^lambda, the compound Poisson law with Levy measure
    (lambda/4) * sum_k (delta_{a_k} + delta_{-a_k}).

    Uses Poisson splitting: the number of jumps equal to +a_k and to -a_k are
    independent Poisson(lambda/4) variables, so a draw is
    ``sum_k (N_k^+ - N_k^-) a_k``. This is the same law as drawing
    N ~ Poisson(lambda n / 2) jumps uniformly from the 2n points.
    """
    if not lambda_exp >= 0:
        raise DomainError(f"lambda_exp must be >= 0, got {lambda_exp!r}")
    count = int(count)
    if lambda_exp == 0:
        return SampleBatch(np.zeros((count, a.d)), seed)
    rng = np.random.default_rng(seed)
    rate = lambda_exp / 4.0
    out = np.zeros((count, a.d))
    for row in a.rows:
        k = rng.poisson(rate, size=count) - rng.poisson(rate, size=count)
        out += k[:, None] * row[None, :]
    return SampleBatch(out, seed)


def sample_weighted_sum(a: WeightMatrix, F: DiscreteDist1D, count: int,
                        seed: int) -> SampleBatch:
    """Direct draws of S_a."""
    rng = np.random.default_rng(seed)
    cum = np.cumsum(F.masses)
    cum[-1] = 1.0
    out = np.zeros((int(count), a.d))
    for row in a.rows:
        x = F.atoms[np.searchsorted(cum, rng.random(int(count)), side="right")]
        out += x[:, None] * row[None, :]
    return SampleBatch(out, seed)


def empirical_cf(batch: SampleBatch, t) -> tuple[np.ndarray, np.ndarray]:
    """Empirical cf at the rows of ``t`` and its standard error (real part)."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != batch.dimension:
        t = t.reshape(-1, batch.dimension)
    vals = np.empty(t.shape[0], dtype=complex)
    se = np.empty(t.shape[0])
    for i, ti in enumerate(t):
        ph = batch.points @ ti
        c = np.cos(ph)
        vals[i] = c.mean() + 1j * np.sin(ph).mean()
        se[i] = c.std(ddof=1) / math.sqrt(batch.count)
    return vals, se


def _pair_centres(pts: np.ndarray, r: float) -> np.ndarray:
    """Centres of the radius-r circles through each pair of points at most 2r apart."""
    i, j = np.triu_indices(pts.shape[0], k=1)
    p, q = pts[i], pts[j]
    dist = np.hypot(*(q - p).T)
    keep = (dist > 0) & (dist <= 2 * r)
    p, q, dist = p[keep], q[keep], dist[keep]
    h = np.sqrt(np.maximum(r * r - (dist / 2) ** 2, 0.0))
    perp = np.stack([p[:, 1] - q[:, 1], q[:, 0] - p[:, 0]], axis=1) / dist[:, None]
    mid = (p + q) / 2
    return np.vstack([mid + h[:, None] * perp, mid - h[:, None] * perp]).reshape(-1, 2)


def q_monte_carlo(batch: SampleBatch, lam: float, n_boot: int = 100,
                  n_candidates: int = 256) -> tuple[float, float]:
    """Cross-fitted estimate of Q from samples, with a bootstrap standard error.

    The batch is split into its first and second half. On each half the best
    region is selected (d = 1: the closed window [x, x + lam] anchored at a
    sample point; d = 2: the closed disk of diameter ``lam`` centred at one of
    ``n_candidates`` sample points or passing through two of the heaviest
    ones), and its mass is then measured on the
    other half. The estimate is the sample-weighted average of the two
    held-out fractions.

    A held-out fraction is unbiased for the mass of the selected region, which
    is at most Q, so the estimate is biased downward (by the gap between the
    selected and the best region). The in-sample maximum would instead be
    biased upward whenever several regions are nearly optimal.
    """
    lam = float(lam)
    if math.isnan(lam) or lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam!r}")
    N = batch.count
    if N < 1000:
        raise DomainError("q_monte_carlo needs at least 1000 samples")
    if math.isinf(lam):
        return 1.0, 0.0
    rng = np.random.default_rng(np.random.SeedSequence([batch.seed, 0x9E3779B9]))
    d = batch.dimension
    h = N // 2
    if d == 1:
        u, inv = np.unique(batch.points[:, 0], return_inverse=True)
        if u.size == 1:
            return 1.0, 0.0
        inv = inv.ravel()
        halves = (np.bincount(inv[:h], minlength=u.size),
                  np.bincount(inv[h:], minlength=u.size))
        eps = _scaled_tol(u)
        j = np.searchsorted(u, u + lam + eps, side="right")
        i = np.arange(u.size)

        def windows(c):
            cum = np.concatenate([[0], np.cumsum(c)])
            return cum[j] - cum[i]

        def stat(ca, cb):
            wa, wb = windows(ca), windows(cb)
            return (wb[np.argmax(wa)] + wa[np.argmax(wb)]) / N
    elif d == 2:
        from scipy.spatial import cKDTree
        u, inv = np.unique(batch.points, axis=0, return_inverse=True)
        if u.shape[0] == 1:
            return 1.0, 0.0
        inv = inv.ravel()
        halves = (np.bincount(inv[:h], minlength=u.shape[0]),
                  np.bincount(inv[h:], minlength=u.shape[0]))
        tree = cKDTree(u)
        r = lam / 2.0 * (1 + 1e-12) + _scaled_tol(u)

        def pool(c):
            # centres: the heaviest distinct points of this half, a random
            # subsample, and the disks through pairs of the heaviest points;
            # the 8 best disks are kept for the bootstrap
            heavy = np.argsort(-c, kind="stable")[: n_candidates // 2]
            rand = rng.choice(u.shape[0], size=min(u.shape[0], n_candidates - heavy.size),
                              replace=False)
            cand = np.unique(np.concatenate([heavy, rand]))
            centres = np.vstack([u[cand], _pair_centres(u[heavy[:48]], lam / 2.0)])
            nbrs = tree.query_ball_point(centres, r)
            covered = np.array([c[nb].sum() for nb in nbrs])
            top = np.argsort(-covered, kind="stable")[:8]
            return [np.asarray(nbrs[t], dtype=np.int64) for t in top]

        pools = (pool(halves[0]), pool(halves[1]))

        def stat(ca, cb):
            pa = pools[0][int(np.argmax([ca[ix].sum() for ix in pools[0]]))]
            pb = pools[1][int(np.argmax([cb[ix].sum() for ix in pools[1]]))]
            return (cb[pa].sum() + ca[pb].sum()) / N
    else:
        raise DimensionError("q_monte_carlo supports d <= 2")
    est = stat(*halves)
    if n_boot < 2:
        return float(est), 0.0
    pa, pb = halves[0] / h, halves[1] / (N - h)
    boots = np.array([stat(rng.multinomial(h, pa), rng.multinomial(N - h, pb))
                      for _ in range(n_boot)])
    return float(est), float(boots.std(ddof=1))
