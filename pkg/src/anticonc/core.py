"""Discrete laws, weight matrices, symmetrization and scenario configuration.

Everything here is immutable: constructors validate, sort and merge their
input once and the resulting objects are safe to share.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

MERGE_TOL = 1e-12
PROB_TOL = 1e-12


class AnticoncError(Exception):
    """Base class for library errors."""


class DomainError(AnticoncError, ValueError):
    """Argument outside the domain of an operation."""


class DimensionError(DomainError):
    """Incompatible or unsupported dimension."""


class ResourceError(AnticoncError):
    """Exact computation would exceed a configured cap."""


class ContractError(AnticoncError):
    """A documented precondition between arguments does not hold."""


def _scaled_tol(values: np.ndarray, tol: float = MERGE_TOL) -> float:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    return tol * max(1.0, scale)


def merge_points(points: np.ndarray, masses: np.ndarray,
                 tol: float = MERGE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Merge points closer than ``tol`` (max-norm, scaled by magnitude).

    Clustering is single-linkage along each coordinate in turn, conditional
    on the clusters found for the previous coordinates. Merged positions are
    mass-weighted averages, except that clusters of identical values keep
    that value exactly. Returns points sorted lexicographically.
    """
    points = np.asarray(points, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    m, d = points.shape
    if m == 0:
        return points, masses
    eps = _scaled_tol(points, tol)
    labels = np.zeros(m, dtype=np.int64)
    for c in range(d):
        order = np.lexsort((points[:, c], labels))
        lab = labels[order]
        col = points[order, c]
        start = np.empty(m, dtype=bool)
        start[0] = True
        start[1:] = (lab[1:] != lab[:-1]) | (np.diff(col) > eps)
        new = np.cumsum(start) - 1
        labels = np.empty(m, dtype=np.int64)
        labels[order] = new
    k = int(labels.max()) + 1
    tot = np.bincount(labels, weights=masses, minlength=k)
    pos = np.empty((k, d))
    for c in range(d):
        avg = np.bincount(labels, weights=masses * points[:, c], minlength=k) / tot
        lo = np.full(k, np.inf)
        hi = np.full(k, -np.inf)
        np.minimum.at(lo, labels, points[:, c])
        np.maximum.at(hi, labels, points[:, c])
        pos[:, c] = np.where(lo == hi, lo, np.clip(avg, lo, hi))
    order = np.lexsort(pos.T[::-1])
    return pos[order], tot[order]


@dataclass(frozen=True)
class DiscreteDist1D:
    """Finite discrete measure on the real line.

    With ``total=None`` the masses are a probability vector: they must sum to
    one within ``PROB_TOL`` and are renormalized exactly. Passing ``total``
    declares a sub-probability measure (such as the measure ``V``
    of the compound Poisson bound) whose masses are kept as given.
    """

    atoms: np.ndarray
    masses: np.ndarray
    total: Optional[float] = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        masses = np.asarray(self.masses, dtype=float).ravel()
        if atoms.shape != masses.shape:
            raise DomainError("atoms and masses must have the same length")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(masses))):
            raise DomainError("atoms and masses must be finite")
        if np.any(masses < 0):
            raise DomainError("masses must be nonnegative")
        keep = masses > 0
        atoms, masses = atoms[keep], masses[keep]
        pts, masses = merge_points(atoms, masses)
        atoms = pts[:, 0]
        s = float(masses.sum())
        if self.total is None:
            if abs(s - 1.0) > PROB_TOL:
                raise DomainError(f"probability masses sum to {s!r}, not 1")
            masses = masses / s
        else:
            total = float(self.total)
            if total < 0 or abs(s - total) > PROB_TOL or total > 1 + PROB_TOL:
                raise DomainError(f"masses sum to {s!r}, declared total {total!r}")
            object.__setattr__(self, "total", total)
        atoms.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_dict(cls, mapping: dict[float, float]) -> "DiscreteDist1D":
        return cls(list(mapping.keys()), list(mapping.values()))

    @classmethod
    def point_mass(cls, x: float = 0.0) -> "DiscreteDist1D":
        return cls([x], [1.0])

    @property
    def is_probability(self) -> bool:
        return self.total is None

    @property
    def mass(self) -> float:
        return 1.0 if self.total is None else self.total

    def __len__(self) -> int:
        return self.atoms.size

    def mass_at(self, x: float) -> float:
        eps = _scaled_tol(np.append(self.atoms, x))
        hit = np.abs(self.atoms - x) <= eps
        return float(self.masses[hit].sum())

    def to_dict(self) -> dict[str, Any]:
        out = {"atoms": self.atoms.tolist(), "masses": self.masses.tolist()}
        if self.total is not None:
            out["total"] = self.total
        return out

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist1D):
            return NotImplemented
        return (self.total == other.total and np.array_equal(self.atoms, other.atoms)
                and np.array_equal(self.masses, other.masses))

    def __hash__(self):
        return hash((self.atoms.tobytes(), self.masses.tobytes(), self.total))


@dataclass(frozen=True)
class DiscreteDistD:
    """Finite discrete probability law on R^d (points are rows)."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        masses = np.asarray(self.masses, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DimensionError("points must be an (m, d) array with d >= 1")
        if pts.shape[0] != masses.size:
            raise DomainError("points and masses must have the same length")
        if np.any(masses < 0) or not np.all(np.isfinite(pts)):
            raise DomainError("invalid points or masses")
        keep = masses > 0
        pts, masses = merge_points(pts[keep], masses[keep])
        s = float(masses.sum())
        if abs(s - 1.0) > PROB_TOL:
            raise DomainError(f"probability masses sum to {s!r}, not 1")
        masses = masses / s
        pts.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", masses)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.masses.size

    def to_1d(self) -> DiscreteDist1D:
        if self.dimension != 1:
            raise DimensionError(f"law has dimension {self.dimension}, not 1")
        return DiscreteDist1D(self.points[:, 0], self.masses)


@dataclass(frozen=True)
class WeightMatrix:
    """The coefficient vectors a_1..a_n as rows of an (n, d) array."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DomainError("weights must be a nonempty (n, d) array")
        if not np.all(np.isfinite(rows)):
            raise DomainError("weights must be finite")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def scaled(self, gamma: float) -> "WeightMatrix":
        return WeightMatrix(self.rows * gamma)

    def key(self) -> bytes:
        return self.rows.tobytes() + bytes(str(self.rows.shape), "ascii")

    def __eq__(self, other):
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.key())


def strict_floor(x: float) -> int:
    """Largest integer strictly smaller than ``x`` (so ``strict_floor(1) == 0``)."""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"strict_floor needs a finite positive argument, got {x!r}")
    k = math.floor(x)
    return k - 1 if k == x else k


def symmetrize(F: DiscreteDist1D) -> DiscreteDist1D:
    """Law of X1 - X2 for independent X1, X2 ~ F.

    The result is built from the pairwise differences and then made exactly
    symmetric by averaging the masses at z and -z.
    """
    if not F.is_probability:
        raise DomainError("symmetrize expects a probability law")
    diffs = (F.atoms[:, None] - F.atoms[None, :]).ravel()
    probs = (F.masses[:, None] * F.masses[None, :]).ravel()
    both = np.concatenate([diffs, -diffs])
    G = DiscreteDist1D(both, np.concatenate([probs, probs]) / 2.0)
    # pair the atoms exactly: atoms[k] and atoms[-1-k] are negatives of each other
    atoms = (G.atoms - G.atoms[::-1]) / 2.0
    masses = (G.masses + G.masses[::-1]) / 2.0
    return DiscreteDist1D(atoms, masses)


def tail_mass(G: DiscreteDist1D, delta: float) -> float:
    """Mass of the atoms z with |z| strictly greater than ``delta``."""
    delta = float(delta)
    if not delta >= 0:
        raise DomainError(f"delta must be nonnegative, got {delta!r}")
    return float(G.masses[np.abs(G.atoms) > delta].sum())


def restrict_and_normalize(G: DiscreteDist1D, threshold: float
                           ) -> tuple[float, Optional[DiscreteDist1D]]:
    """Split off the part of ``G`` outside ``[-threshold, threshold]``.

    Returns ``(p1, G1)`` where ``p1`` is the tail mass and ``G1`` the
    conditional law given ``|z| > threshold`` (``None`` when ``p1 == 0``).
    """
    threshold = float(threshold)
    if not threshold >= 0:
        raise DomainError(f"threshold must be nonnegative, got {threshold!r}")
    sel = np.abs(G.atoms) > threshold
    p1 = float(G.masses[sel].sum())
    if p1 == 0.0:
        return 0.0, None
    return p1, DiscreteDist1D(G.atoms[sel], G.masses[sel] / p1)


def tail_measure(G: DiscreteDist1D, threshold: float) -> Optional[DiscreteDist1D]:
    """The sub-probability measure ``p1 * G1`` (the restriction of G to the tail)."""
    sel = np.abs(G.atoms) > threshold
    if not np.any(sel):
        return None
    return DiscreteDist1D(G.atoms[sel], G.masses[sel], total=float(G.masses[sel].sum()))


def check_dominated(V: DiscreteDist1D, G: DiscreteDist1D, tol: float = 1e-12) -> None:
    """Raise ContractError unless V <= G atom by atom."""
    eps = _scaled_tol(np.concatenate([V.atoms, G.atoms]))
    for z, v in zip(V.atoms.tolist(), V.masses.tolist()):
        idx = np.flatnonzero(np.abs(G.atoms - z) <= eps)
        if idx.size == 0:
            raise ContractError(f"V has an atom at {z!r} which is not an atom of G")
        g = float(G.masses[idx].sum())
        if v > g + tol:
            raise ContractError(f"V{{{z!r}}} = {v!r} exceeds G{{{z!r}}} = {g!r}")


# --------------------------------------------------------------------------
# scenario configuration

def _parse_extended(x) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise DomainError(f"cannot parse {x!r} as a number")
    return float(x)


@dataclass(frozen=True)
class Scenario:
    """One (weights, law of X, tau, epsilon) configuration."""

    weights: WeightMatrix
    law_x: DiscreteDist1D
    tau: float
    epsilon: float
    quadrature: Any = None  # charfn.QuadratureSpec; None means defaults
    enumeration_cap: int = 2 ** 24
    seed: int = 0
    mc_samples: int = 200_000

    def __post_init__(self):
        from .charfn import QuadratureSpec
        tau = float(self.tau)
        eps = float(self.epsilon)
        if math.isnan(tau) or tau < 0:
            raise DomainError(f"tau must be >= 0, got {tau!r}")
        if not (eps > 0 and math.isfinite(eps)):
            raise DomainError(f"epsilon must be positive, got {eps!r}")
        if int(self.enumeration_cap) < 1:
            raise DomainError("enumeration_cap must be positive")
        if not self.law_x.is_probability:
            raise DomainError("law_x must be a probability law")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "epsilon", eps)
        if self.quadrature is None:
            object.__setattr__(self, "quadrature", QuadratureSpec.from_env())

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        from .charfn import QuadratureSpec
        try:
            law = data["law_x"]
            return cls(
                weights=WeightMatrix(np.asarray(data["weights"], dtype=float)),
                law_x=DiscreteDist1D(law["atoms"], law["masses"]),
                tau=_parse_extended(data["tau"]),
                epsilon=float(data["epsilon"]),
                quadrature=QuadratureSpec.from_dict(data.get("quadrature") or {}),
                enumeration_cap=int(data.get("enumeration_cap", 2 ** 24)),
                seed=int(data.get("seed", 0)),
                mc_samples=int(data.get("mc_samples", 200_000)),
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed scenario: {exc!r}") from exc

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.rows.tolist(),
            "law_x": {"atoms": self.law_x.atoms.tolist(),
                      "masses": self.law_x.masses.tolist()},
            "tau": "inf" if math.isinf(self.tau) else self.tau,
            "epsilon": self.epsilon,
            "quadrature": self.quadrature.to_dict(),
            "enumeration_cap": self.enumeration_cap,
            "seed": self.seed,
            "mc_samples": self.mc_samples,
        }

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace
        return replace(self, **changes)


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON: {exc}") from exc
    return Scenario.from_dict(data)
