"""Characteristic functions and tensor-product quadrature over cubes.

The integrals that appear in the concentration bounds are all of the form
``tau**d * int_{|t| <= 1/tau} f(t) dt`` where ``|t|`` is the max-norm, i.e. the
domain is the cube ``[-1/tau, 1/tau]**d``.
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .core import DiscreteDist1D, DimensionError, DomainError, ContractError, WeightMatrix

ENV_NODES = "ANTICONC_QUAD_NODES"
ENV_RELTOL = "ANTICONC_QUAD_RELTOL"
RULES = ("trapezoid", "gauss-legendre-composite")

# Nodes per unit of (cube side * bandwidth): about 9 nodes per period.
_NODES_PER_CYCLE = 1.5
# Base nodes per axis in d >= 2 (refinement still doubles from here).
_BASE_NODES_MULTI = {2: 129, 3: 33}


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_axis: int = 513
    max_refinements: int = 6
    rel_tol: float = 1e-6
    rule: str = "trapezoid"
    max_points: int = 5_000_000

    def __post_init__(self):
        if int(self.nodes_per_axis) < 3:
            raise DomainError("nodes_per_axis must be >= 3")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.rule not in RULES:
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        if int(self.max_refinements) < 0:
            raise DomainError("max_refinements must be >= 0")
        object.__setattr__(self, "nodes_per_axis", int(self.nodes_per_axis))
        object.__setattr__(self, "max_refinements", int(self.max_refinements))

    @classmethod
    def from_env(cls, **kw) -> "QuadratureSpec":
        """Defaults, overridden by ANTICONC_QUAD_NODES / ANTICONC_QUAD_RELTOL."""
        if ENV_NODES in os.environ and "nodes_per_axis" not in kw:
            kw["nodes_per_axis"] = int(os.environ[ENV_NODES])
        if ENV_RELTOL in os.environ and "rel_tol" not in kw:
            kw["rel_tol"] = float(os.environ[ENV_RELTOL])
        return cls(**kw)

    @classmethod
    def from_dict(cls, data: dict) -> "QuadratureSpec":
        known = {k: data[k] for k in ("nodes_per_axis", "max_refinements", "rel_tol",
                                      "rule", "max_points") if k in data}
        return cls.from_env(**known)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CfHandle:
    """A characteristic function on R^d.

    ``evaluator`` maps an ``(N, d)`` array of frequencies to ``N`` values.
    ``bandwidth`` is a rough upper bound on the angular frequency content of
    the function (per unit of ``t`` in max-norm) and is only used to pick a
    node floor for quadrature. ``active`` lists the coordinates the function
    depends on (None means all); quadrature skips the others.
    """

    d: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    symmetric_nonneg: bool = False
    bandwidth: float = 0.0
    min_nodes: int = 0
    active: Optional[tuple] = None

    def reduced(self) -> "CfHandle":
        """The same function restricted to its active coordinates."""
        idx = list(self.active)
        d = self.d

        def ev(T):
            full = np.zeros((T.shape[0], d))
            full[:, idx] = T
            return self.evaluator(full)
        return CfHandle(len(idx), ev, self.symmetric_nonneg, self.bandwidth, self.min_nodes)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.ndim == 1:
            t = t[:, None] if self.d == 1 else t[None, :]
        if t.shape[-1] != self.d:
            raise DimensionError(f"expected frequencies of dimension {self.d}")
        return self.evaluator(t)

    def spot_check(self, n: int = 64, scale: float = 10.0, seed: int = 0) -> None:
        """Sample the documented invariants at random points (raise on failure)."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(-scale, scale, size=(n, self.d))
        v = self(np.vstack([np.zeros((1, self.d)), t]))
        if abs(v[0] - 1) > 1e-12:
            raise ContractError("characteristic function must equal 1 at t = 0")
        if np.any(np.abs(v) > 1 + 1e-12):
            raise ContractError("characteristic function exceeds 1 in modulus")
        if self.symmetric_nonneg and (np.any(np.abs(np.imag(v)) > 1e-12)
                                      or np.any(np.real(v) < -1e-12)):
            raise ContractError("flagged symmetric_nonneg but takes negative/complex values")


# --------------------------------------------------------------------------
# characteristic functions

def cf_X(F: DiscreteDist1D, s):
    """sum_j p_j exp(i s x_j); vectorized over ``s``."""
    s = np.asarray(s, dtype=float)
    phase = np.multiply.outer(s, F.atoms)
    out = np.exp(1j * phase) @ F.masses
    return out[()] if out.ndim == 0 else out


def _as_freqs(t, d: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        t = t.reshape(1, 1)
    elif t.ndim == 1:
        t = t[None, :] if t.size == d and d > 1 else t.reshape(-1, 1)
    if t.shape[-1] != d:
        raise DimensionError(f"frequency dimension {t.shape[-1]} != weight dimension {d}")
    return t


def _chunks(N: int, n: int, budget: int = 2_000_000):
    step = max(1, budget // max(n, 1))
    for lo in range(0, N, step):
        yield slice(lo, min(N, lo + step))


def cf_Fa(a: WeightMatrix, F: DiscreteDist1D, t):
    """cf of S_a = sum_k X_k a_k: prod_k cf_X(F, <t, a_k>)."""
    scalar = np.ndim(t) == 0 or (np.ndim(t) == 1 and np.size(t) == a.d and a.d > 1)
    T = _as_freqs(t, a.d)
    out = np.empty(T.shape[0], dtype=complex)
    for sl in _chunks(T.shape[0], a.n * len(F)):
        proj = T[sl] @ a.rows.T  # (N, n)
        out[sl] = np.prod(cf_X(F, proj), axis=1)
    return out[0] if scalar else out


def cf_H(a: WeightMatrix, z: float, lambda_exp: float, t):
    """exp(-(lambda/2) * sum_k (1 - cos(<t, a_k> z)))."""
    if not lambda_exp >= 0:
        raise DomainError(f"lambda_exp must be >= 0, got {lambda_exp!r}")
    scalar = np.ndim(t) == 0 or (np.ndim(t) == 1 and np.size(t) == a.d and a.d > 1)
    T = _as_freqs(t, a.d)
    out = np.empty(T.shape[0])
    for sl in _chunks(T.shape[0], a.n):
        proj = T[sl] @ a.rows.T
        out[sl] = np.exp(-0.5 * lambda_exp * np.sum(1.0 - np.cos(proj * z), axis=1))
    return float(out[0]) if scalar else out


def _bandwidth(a: WeightMatrix, scale: float) -> float:
    # |<t, a_k>| <= |t|_max * ||a_k||_1
    return float(np.sum(np.abs(a.rows))) * abs(scale)


def _active(a: WeightMatrix) -> Optional[tuple]:
    # a coordinate no weight touches leaves the cf constant along it
    used = tuple(int(j) for j in np.flatnonzero(np.any(a.rows != 0, axis=0)))
    return used if 0 < len(used) < a.d else None


def handle_Fa(a: WeightMatrix, F: DiscreteDist1D) -> CfHandle:
    span = float(np.max(np.abs(F.atoms)))
    return CfHandle(a.d, lambda T: cf_Fa(a, F, T), symmetric_nonneg=False,
                    bandwidth=_bandwidth(a, span), min_nodes=64 * a.n, active=_active(a))


def handle_H(a: WeightMatrix, z: float, lambda_exp: float) -> CfHandle:
    return CfHandle(a.d, lambda T: cf_H(a, z, lambda_exp, T), symmetric_nonneg=True,
                    bandwidth=_bandwidth(a, z), active=_active(a))


def handle_symmetric_sum(a: WeightMatrix, G: DiscreteDist1D) -> CfHandle:
    """cf of sum_k Y_k a_k with Y_k ~ G, G symmetric with nonnegative cf."""
    def ev(T):
        return np.real(cf_Fa(a, G, T))
    span = float(np.max(np.abs(G.atoms)))
    return CfHandle(a.d, ev, symmetric_nonneg=True, bandwidth=_bandwidth(a, span),
                    min_nodes=64 * a.n, active=_active(a))


def gaussian_cf(d: int = 1, sigma: float = 1.0) -> CfHandle:
    return CfHandle(d, lambda T: np.exp(-0.5 * sigma ** 2 * np.sum(T ** 2, axis=1)),
                    symmetric_nonneg=True, bandwidth=0.0)


def constant_cf(d: int = 1) -> CfHandle:
    """cf of the point mass at the origin."""
    return CfHandle(d, lambda T: np.ones(T.shape[0]), symmetric_nonneg=True)


# --------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadResult:
    value: float
    est_error: float
    converged: bool
    nodes_per_axis: int
    refinements: int


def _axis_rule(half: float, nodes: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    if rule == "trapezoid":
        x = np.linspace(-half, half, nodes)
        w = np.full(nodes, 2 * half / (nodes - 1))
        w[0] = w[-1] = half / (nodes - 1)
        return x, w
    # composite 3-point Gauss-Legendre on (nodes - 1) // 2 panels
    panels = max(1, (nodes - 1) // 2)
    g, gw = np.polynomial.legendre.leggauss(3)
    edges = np.linspace(-half, half, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2
    h = (edges[1:] - edges[:-1]) / 2
    x = (mid[:, None] + h[:, None] * g[None, :]).ravel()
    w = (h[:, None] * gw[None, :]).ravel()
    return x, w


def simpson_axis(half: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Simpson rule on [-half, half]; ``nodes`` is made odd."""
    if nodes % 2 == 0:
        nodes += 1
    x = np.linspace(-half, half, nodes)
    h = 2 * half / (nodes - 1)
    w = np.full(nodes, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * h / 3


def tensor_grid(x: np.ndarray, w: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    if d == 1:
        return x[:, None], w
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    wts = w
    for _ in range(d - 1):
        wts = np.multiply.outer(wts, w).ravel()
    return pts, wts


def _integrate_fixed(fn, half: float, d: int, nodes: int, rule: str) -> float:
    x, w = _axis_rule(half, nodes, rule)
    if d == 1:
        return float(np.dot(fn(x[:, None]), w))
    # sum blocks of slabs of the tensor grid to bound memory
    total = 0.0
    sub_pts, sub_w = tensor_grid(x, w, d - 1)
    per = max(1, 1_000_000 // sub_pts.shape[0])
    for lo in range(0, x.size, per):
        xs = x[lo:lo + per]
        pts = np.hstack([np.repeat(xs, sub_pts.shape[0])[:, None],
                         np.tile(sub_pts, (xs.size, 1))])
        vals = fn(pts).reshape(xs.size, -1)
        total += float(w[lo:lo + per] @ (vals @ sub_w))
    return total


def base_nodes(f: CfHandle, tau: float, spec: QuadratureSpec) -> int:
    side = 2.0 / tau
    base = spec.nodes_per_axis if f.d == 1 else min(spec.nodes_per_axis,
                                                    _BASE_NODES_MULTI[min(f.d, 3)])
    want = max(base, f.min_nodes if f.d == 1 else 0,
               int(math.ceil(_NODES_PER_CYCLE * side * f.bandwidth)) + 1)
    if want % 2 == 0:
        want += 1
    cap = int(spec.max_points ** (1.0 / f.d))
    if want > cap:
        want = cap if cap % 2 else cap - 1
    return max(want, 3)


def cube_integral(f: CfHandle, tau: float, spec: Optional[QuadratureSpec] = None,
                  absolute: bool = False) -> QuadResult:
    """Integrate ``f`` (or ``|f|``) over the cube ``[-1/tau, 1/tau]**d``.

    The trapezoid rule is refined by doubling the panels; successive values
    are Richardson-extrapolated (which is Simpson's rule) and the iteration
    stops once the relative change drops below ``spec.rel_tol``. The
    Gauss-Legendre rule is refined the same way without extrapolation.
    Non-convergence raises a QuadratureWarning and sets ``converged=False``.
    """
    spec = spec or QuadratureSpec.from_env()
    if f.d > 3:
        raise DimensionError("cube quadrature supports d <= 3")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    half = 1.0 / tau
    if f.active is not None and len(f.active) < f.d:
        r = cube_integral(f.reduced(), tau, spec, absolute)
        factor = (2 * half) ** (f.d - len(f.active))
        return QuadResult(r.value * factor, r.est_error * factor, r.converged,
                          r.nodes_per_axis, r.refinements)
    if absolute:
        def fn(T):
            return np.abs(f(T))
    else:
        def fn(T):
            v = f(T)
            return np.real(v) if np.iscomplexobj(v) else v
    nodes = base_nodes(f, tau, spec)
    prev_t = _integrate_fixed(fn, half, f.d, nodes, spec.rule)
    prev = prev_t
    err = math.inf
    converged = False
    k = 0
    for k in range(1, spec.max_refinements + 1):
        finer = (nodes - 1) * 2 + 1
        if finer ** f.d > spec.max_points:
            k -= 1
            break
        nodes = finer
        cur_t = _integrate_fixed(fn, half, f.d, nodes, spec.rule)
        cur = (4 * cur_t - prev_t) / 3 if spec.rule == "trapezoid" else cur_t
        err = abs(cur - prev)
        prev_t, prev = cur_t, cur
        if k >= 2 or spec.rule != "trapezoid":
            if err <= spec.rel_tol * abs(cur):
                converged = True
                break
    if spec.max_refinements == 0 and k == 0:
        err = math.inf
    if not converged:
        warnings.warn(f"cube quadrature did not reach rel_tol={spec.rel_tol} "
                      f"(last change {err:.3g}, {nodes} nodes/axis)", QuadratureWarning,
                      stacklevel=2)
    return QuadResult(float(prev), float(err), converged, nodes, k)


def esseen_upper(fhat: CfHandle, tau: float, spec: Optional[QuadratureSpec] = None) -> float:
    """tau^d times the integral of |fhat| over the cube of side 2/tau.

    The right-hand side of the Esseen inequality without its dimension
    constant: Q(F, tau) <= C_d * esseen_upper(...).
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    res = cube_integral(fhat, tau, spec, absolute=True)
    return tau ** fhat.d * res.value


def q_proxy_symmetric(fhat: CfHandle, tau: float, spec: Optional[QuadratureSpec] = None) -> float:
    """tau^d times the integral of fhat over the cube of side 2/tau.

    Valid only for symmetric laws whose cf is nonnegative, where it is
    equivalent to Q(F, tau) up to constants depending on d alone.
    """
    if not fhat.symmetric_nonneg:
        raise ContractError("q_proxy_symmetric needs a symmetric law with nonnegative cf")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    res = cube_integral(fhat, tau, spec)
    return tau ** fhat.d * res.value


def q_H_unclamped(a: WeightMatrix, lambda_exp: float, radius: float,
                  spec: Optional[QuadratureSpec] = None) -> float:
    if math.isinf(radius):
        return 1.0
    if lambda_exp == 0:
        return 2.0 ** a.d
    return q_proxy_symmetric(handle_H(a, 1.0, lambda_exp), radius, spec)


def q_H(a: WeightMatrix, lambda_exp: float, radius: float,
        spec: Optional[QuadratureSpec] = None) -> float:
    """Proxy for Q(H_1^lambda, radius), clamped to 1.

    ``radius = inf`` gives exactly 1.
    """
    if not lambda_exp >= 0:
        raise DomainError(f"lambda_exp must be >= 0, got {lambda_exp!r}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius!r}")
    return min(1.0, q_H_unclamped(a, lambda_exp, radius, spec))
