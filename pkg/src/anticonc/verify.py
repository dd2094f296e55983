"""Numerical checks of the inequalities behind the comparison bounds.

Each ``check_*`` function evaluates both sides of one inequality and
returns the values; ``run_suite`` drives them over seeded random instances
and collects pass/fail records. The integrals inside a check are all taken
with the same fixed positive quadrature rule, for which the inequalities
hold exactly (up to rounding), so the 1e-9 relative slack only absorbs
floating-point noise. A separate resolution test compares each rule with
one twice as fine and fails the instance if they disagree by more than
``100 * spec.rel_tol``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bounds
from .charfn import (QuadratureSpec, QuadratureWarning, cf_Fa, cf_X, simpson_axis,
                     tensor_grid)
from .core import (DiscreteDist1D, DomainError, Scenario, WeightMatrix, symmetrize,
                   tail_measure)

REL_SLACK = 1e-9
EXACT_SLACK = 1e-12
FAMILIES = ("all_ones", "arithmetic", "geometric", "random_uniform", "dilated")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    n: int
    d: int = 1
    step: float = 1.0
    ratio: float = 2.0
    scale: float = 1.0
    seed: int = 0
    base: Optional["FamilySpec"] = None

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise DomainError(f"unknown weight family {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise DomainError("n and d must be positive")
        if self.kind == "dilated" and self.base is None:
            object.__setattr__(self, "base", FamilySpec("all_ones", self.n, self.d))

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        data = dict(data)
        if data.get("base") is not None:
            data["base"] = cls.from_dict(data["base"])
        return cls(**data)


def generate_family(f: FamilySpec) -> WeightMatrix:
    """Weight matrix for a named family; every row is a multiple of e_1
    except for ``random_uniform``."""
    k = np.arange(1, f.n + 1, dtype=float)
    e1 = np.zeros(f.d)
    e1[0] = 1.0
    if f.kind == "all_ones":
        return WeightMatrix(np.outer(np.ones(f.n), e1))
    if f.kind == "arithmetic":
        return WeightMatrix(np.outer(k * f.step, e1))
    if f.kind == "geometric":
        return WeightMatrix(np.outer(f.ratio ** (k - 1), e1))
    if f.kind == "random_uniform":
        rng = np.random.default_rng(f.seed)
        return WeightMatrix(rng.uniform(-1.0, 1.0, size=(f.n, f.d)))
    base = generate_family(dataclasses.replace(f.base, n=f.n, d=f.d))
    return base.scaled(f.scale)


@dataclass
class ConstantEstimate:
    bound: str
    d: int
    max_ratio: float
    argmax: int
    seed: int
    count: int


@dataclass
class CheckRecord:
    check: str
    instance: int
    passed: bool
    detail: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# quadrature helpers

def _nodes(half: float, bandwidth: float, spec: QuadratureSpec, d: int) -> int:
    n = max(spec.nodes_per_axis if d == 1 else min(spec.nodes_per_axis, 129),
            int(math.ceil(4.0 * 2 * half * bandwidth)) + 1)
    cap = int(spec.max_points ** (1.0 / d)) // 2
    n = min(n, cap)
    return n if n % 2 else n + 1


def _rule(half: float, d: int, nodes: int):
    x, w = simpson_axis(half, nodes)
    return tensor_grid(x, w, d)


def _resolved(values_fn, half, d, nodes, spec) -> tuple[int, bool, float]:
    """Refine ``nodes`` until the rule agrees with the next finer one.

    Returns the node count to use, whether it is resolved, and the last
    relative difference.
    """
    cap = int(spec.max_points ** (1.0 / d))
    pts, w = _rule(half, d, nodes)
    c = float(values_fn(pts) @ w)
    while True:
        finer = 2 * nodes - 1
        pts, w = _rule(half, d, finer)
        f = float(values_fn(pts) @ w)
        rel = abs(c - f) / max(abs(f), 1e-300)
        if rel <= 100 * spec.rel_tol or 2 * finer - 1 > cap:
            return nodes, rel <= 100 * spec.rel_tol, rel
        nodes, c = finer, f


def _deficit(a: WeightMatrix, atoms: np.ndarray, masses: np.ndarray, T: np.ndarray
             ) -> np.ndarray:
    """sum_k sum_j m_j (1 - cos(<t, a_k> z_j)) for each row t of T."""
    proj = T @ a.rows.T  # (N, n)
    out = np.zeros(T.shape[0])
    for z, m in zip(atoms, masses):
        out += m * np.sum(1.0 - np.cos(proj * z), axis=1)
    return out


# --------------------------------------------------------------------------
# checks

def check_holder(a: WeightMatrix, W: DiscreteDist1D, lambda_exp: float, T: float,
                 spec: Optional[QuadratureSpec] = None) -> tuple[float, float, dict]:
    """Both sides of the generalized Hoelder step.

    lhs = int_{|t|<=T} exp(-(lam/2) sum_j p_j sum_k (1 - cos(<t,a_k> z_j))) dt
    rhs = prod_j (int_{|t|<=T} exp(-(lam/2) sum_k (1 - cos(<t,a_k> z_j))) dt)^{p_j}
    """
    spec = spec or QuadratureSpec.from_env()
    if not W.is_probability:
        raise DomainError("W must be a probability law")
    if len(W) > 8:
        raise DomainError("check_holder takes W with at most 8 atoms")
    bw = float(np.sum(np.abs(a.rows))) * float(np.max(np.abs(W.atoms)))

    def lhs_vals(P):
        return np.exp(-0.5 * lambda_exp * _deficit(a, W.atoms, W.masses, P))

    nodes, ok, rel = _resolved(lhs_vals, T, a.d, _nodes(T, bw, spec, a.d), spec)
    pts, wts = _rule(T, a.d, nodes)

    lhs = float(lhs_vals(pts) @ wts)
    log_rhs = 0.0
    for z, p in zip(W.atoms, W.masses):
        v = np.exp(-0.5 * lambda_exp * _deficit(a, [z], [1.0], pts))
        log_rhs += p * math.log(float(v @ wts))
    rhs = math.exp(log_rhs)
    return lhs, rhs, {"nodes": nodes, "resolved": ok, "resolution_rel": rel}


CHAIN_STEPS = ("abs_cf", "cf_bound", "g_form", "v_form", "log_average", "proxy_average")


def check_jensen_chain(s: Scenario, V: Optional[DiscreteDist1D]
                       ) -> tuple[dict, list, dict]:
    """Evaluate the six displayed quantities of the proof chain.

    Returns ``(values, comparisons, info)``; ``comparisons`` lists
    ``(left_step, right_step, ok)`` for each adjacent pair, where ``ok`` is
    ``None`` when the chain is degenerate (V empty or zero mass).
    """
    a, F, tau, spec = s.weights, s.law_x, s.tau, s.quadrature
    if not 0 < tau < math.inf:
        raise DomainError("the chain is evaluated for finite tau > 0")
    G = symmetrize(F)
    half = 1.0 / tau
    span = float(np.max(np.abs(G.atoms)))
    bw = float(np.sum(np.abs(a.rows))) * max(span, 1e-300)
    scale = tau ** a.d
    vals = {}

    def abs_cf(P):
        return np.abs(cf_Fa(a, F, P))

    nodes, ok_res, rel = _resolved(abs_cf, half, a.d, _nodes(half, bw, spec, a.d), spec)
    pts, wts = _rule(half, a.d, nodes)

    vals["abs_cf"] = scale * float(abs_cf(pts) @ wts)
    proj = pts @ a.rows.T
    mod2 = np.abs(cf_X(F, proj)) ** 2
    vals["cf_bound"] = scale * float(np.exp(-0.5 * np.sum(1 - mod2, axis=1)) @ wts)
    vals["g_form"] = scale * float(np.exp(-0.5 * _deficit(a, G.atoms, G.masses, pts)) @ wts)
    degenerate = V is None or V.mass <= 0
    if not degenerate:
        lam = V.mass
        vals["v_form"] = scale * float(np.exp(-0.5 * _deficit(a, V.atoms, V.masses, pts))
                                       @ wts)
        w = V.masses / lam
        per_atom = np.array([
            scale * float(np.exp(-0.5 * lam * _deficit(a, [z], [1.0], pts)) @ wts)
            for z in V.atoms])
        vals["log_average"] = math.exp(float(w @ np.log(per_atom)))
        vals["proxy_average"] = float(w @ per_atom)
    comps = []
    for left, right in zip(CHAIN_STEPS[:-1], CHAIN_STEPS[1:]):
        if left not in vals or right not in vals:
            comps.append((left, right, None))
            continue
        ok = vals[left] <= vals[right] * (1 + REL_SLACK) + 1e-300
        comps.append((left, right, bool(ok)))
    return vals, comps, {"nodes": nodes, "resolved": ok_res, "resolution_rel": rel}


def check_cf_inequality(F: DiscreteDist1D, a: WeightMatrix, t_grid) -> float:
    """max over the grid of |cf_Fa(t)| - exp(-(1 - |cf_Fa(t)|^2) / 2)."""
    T = np.asarray(t_grid, dtype=float).reshape(-1, a.d)
    x = np.abs(cf_Fa(a, F, T))
    return float(np.max(x - np.exp(-0.5 * (1 - x ** 2))))


# --------------------------------------------------------------------------
# random instances

def random_law(rng: np.random.Generator, max_atoms: int = 4) -> DiscreteDist1D:
    kind = rng.integers(0, 4)
    if kind == 0:
        return DiscreteDist1D([-1.0, 1.0], [0.5, 0.5])
    if kind == 1:
        q = float(rng.uniform(0.2, 0.9))
        return DiscreteDist1D([-1.0, 0.0, 1.0], [q / 2, 1 - q, q / 2])
    if kind == 2:
        q = float(rng.uniform(0.1, 0.9))
        return DiscreteDist1D([0.0, 1.0], [1 - q, q])
    m = int(rng.integers(2, max_atoms + 1))
    atoms = rng.choice(np.arange(-3, 4), size=m, replace=False).astype(float)
    p = rng.dirichlet(np.ones(m))
    return DiscreteDist1D(atoms, p)


def random_weights(rng: np.random.Generator, n_max: int, d: int, kinds=None) -> WeightMatrix:
    kinds = kinds or ("all_ones", "arithmetic", "random_uniform")
    kind = kinds[int(rng.integers(0, len(kinds)))]
    n = int(rng.integers(1, n_max + 1))
    return generate_family(FamilySpec(kind, n, d, seed=int(rng.integers(2 ** 31))))


def enumeration_budget(F: DiscreteDist1D, n_max: int, d: int) -> int:
    """Largest n keeping len(F)**n within the d-dependent enumeration budget."""
    cap = 2 ** 16 if d == 1 else 1500
    m = max(len(F), 2)
    return max(1, min(n_max, int(math.floor(math.log(cap) / math.log(m)))))


def random_scenario(rng: np.random.Generator, n_max: int = 12, d: int = 1,
                    kinds=None, spec: Optional[QuadratureSpec] = None,
                    law: Optional[DiscreteDist1D] = None) -> Scenario:
    F = law or random_law(rng)
    n_cap = enumeration_budget(F, n_max, d)
    a = random_weights(rng, n_cap, d, kinds)
    scale = float(np.max(np.abs(a.rows))) * float(np.max(np.abs(F.atoms)) or 1.0)
    tau = float(np.exp(rng.uniform(np.log(0.1), np.log(3.0)))) * scale
    eps = float(np.exp(rng.uniform(np.log(0.1), np.log(2.0)))) * scale
    return Scenario(a, F, tau, eps, quadrature=spec or QuadratureSpec.from_env(),
                    seed=int(rng.integers(2 ** 31)))


def make_suite(seed: int, size: int, n_max: int = 12, d: int = 1, kinds=None,
               spec: Optional[QuadratureSpec] = None) -> list[Scenario]:
    rng = np.random.default_rng(seed)
    return [random_scenario(rng, n_max, d, kinds, spec) for _ in range(size)]


# --------------------------------------------------------------------------
# constants

def bound_value(s: Scenario, name: str) -> Optional[float]:
    """One named bound (without constant) for a scenario; None if undefined.

    ``thm1_nonzero`` uses V = the restriction of G to z != 0.
    """
    G = symmetrize(s.law_x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureWarning)
        if name == "thm1_nonzero":
            V = tail_measure(G, 0.0)
            if V is None or not 0 < s.tau < math.inf:
                return None
            return bounds.theorem1_rhs(s.weights, V, s.tau, s.quadrature)
        rep = bounds.build_report(s, which=(name,), compute_q=False)
    return rep.bound(name)


def estimate_constant(bound: str, suite: Sequence[Scenario], seed: int = 0,
                      q_values: Optional[Sequence[float]] = None) -> ConstantEstimate:
    """Largest observed Q(F_a, tau) / bound over the suite.

    Undefined bounds and vacuous ones (value >= 1) are skipped.
    """
    best, arg, count, d = -math.inf, -1, 0, None
    for i, s in enumerate(suite):
        b = bound_value(s, bound)
        if b is None or b >= 1 or b <= 0:
            continue
        if q_values is not None:
            q = q_values[i]
        else:
            q, mc, _ = bounds.concentration(s)
            q = q if q is not None else mc[0]
        ratio = q / b
        count += 1
        d = s.weights.d
        if ratio > best:
            best, arg = ratio, i
    if count == 0:
        raise DomainError(f"no scenario in the suite gives a non-vacuous {bound} bound")
    return ConstantEstimate(bound, d, float(best), arg, seed, count)


def constants_csv(estimates: Sequence[ConstantEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bound", "d", "max_ratio", "argmax_scenario_id", "seed"])
    for e in estimates:
        w.writerow([e.bound, e.d, repr(e.max_ratio), e.argmax, e.seed])
    return buf.getvalue()


# --------------------------------------------------------------------------
# suites

RADEMACHER = DiscreteDist1D([-1.0, 1.0], [0.5, 0.5])
CONSTANT_BOUNDS = ("esseen", "thm1_nonzero", "thm1_tail", "thm1_floor", "cor1", "cor2")


def _random_sub_measure(rng, G: DiscreteDist1D) -> Optional[DiscreteDist1D]:
    """A random V <= G: one of the canonical choices or a random thinning."""
    pick = int(rng.integers(0, 4))
    if pick == 0:
        return tail_measure(G, 0.0)
    if pick == 1:
        nz = np.abs(G.atoms[G.atoms != 0])
        thr = float(rng.choice(nz)) * 0.999 if nz.size else 0.0
        return tail_measure(G, thr)
    if pick == 2:
        return DiscreteDist1D(G.atoms, G.masses, total=1.0)
    m = G.masses * rng.uniform(0.05, 1.0, size=len(G))
    return DiscreteDist1D(G.atoms, m, total=float(m.sum()))


def holder_instances(seed: int, count: int = 200):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = 1 if rng.random() < 0.75 else 2
        n = int(rng.integers(1, 7))
        a = WeightMatrix(rng.uniform(-1.5, 1.5, size=(n, d)))
        k = int(rng.integers(1, 9))
        z = rng.uniform(-3.0, 3.0, size=k)
        if rng.random() < 0.2:
            z[0] = 0.0
        W = DiscreteDist1D(z, rng.dirichlet(np.ones(k)))
        lam = float(rng.uniform(0.05, 3.0))
        T = float(rng.uniform(0.2, 3.0))
        out.append((a, W, lam, T))
    return out


def run_holder(seed: int = 0, count: int = 200,
               spec: Optional[QuadratureSpec] = None) -> list[CheckRecord]:
    spec = spec or QuadratureSpec.from_env()
    recs = []
    for i, (a, W, lam, T) in enumerate(holder_instances(seed, count)):
        lhs, rhs, info = check_holder(a, W, lam, T, spec)
        ok = lhs <= rhs * (1 + REL_SLACK) and info["resolved"]
        recs.append(CheckRecord("holder", i, bool(ok),
                                {"lhs": lhs, "rhs": rhs, "d": a.d, **info}))
    return recs


def jensen_instances(seed: int, count: int = 100, spec: Optional[QuadratureSpec] = None):
    rng = np.random.default_rng(seed)
    spec = spec or QuadratureSpec.from_env()
    out = []
    for _ in range(count):
        d = 1 if rng.random() < 0.7 else 2
        s = random_scenario(rng, n_max=8 if d == 1 else 5, d=d, spec=spec)
        G = symmetrize(s.law_x)
        out.append((s, _random_sub_measure(rng, G)))
    return out


def run_jensen(seed: int = 0, count: int = 100,
               spec: Optional[QuadratureSpec] = None) -> list[CheckRecord]:
    recs = []
    for i, (s, V) in enumerate(jensen_instances(seed, count, spec)):
        vals, comps, info = check_jensen_chain(s, V)
        ok = all(c[2] is not False for c in comps) and info["resolved"]
        recs.append(CheckRecord("jensen", i, bool(ok), {
            "values": vals, "comparisons": [list(c) for c in comps],
            "degenerate": any(c[2] is None for c in comps), "d": s.weights.d, **info}))
    return recs


def run_cf(seed: int = 0, scenarios: int = 50, grid: int = 1000) -> list[CheckRecord]:
    rng = np.random.default_rng(seed)
    recs = []
    for i in range(scenarios):
        d = 1 if rng.random() < 0.7 else 2
        s = random_scenario(rng, n_max=12, d=d)
        t = rng.uniform(-10.0, 10.0, size=(grid, d))
        v = check_cf_inequality(s.law_x, s.weights, t)
        recs.append(CheckRecord("cf", i, v <= EXACT_SLACK, {"max_violation": v, "d": d}))
    return recs


def theorem1_suite(seed: int, d: int = 1, random_count: int = 48,
                   spec: Optional[QuadratureSpec] = None) -> list[Scenario]:
    """Deterministic structured grid (all-ones and arithmetic weights,
    Rademacher X) followed by ``random_count`` seeded random scenarios."""
    spec = spec or QuadratureSpec.from_env()
    suite = []
    ns = (4, 8, 12, 16) if d == 1 else (4, 8, 12)
    taus = (0.25, 0.5, 1.0, 2.0) if d == 1 else (0.5, 1.0, 2.0)
    for kind in ("all_ones", "arithmetic"):
        for n in ns:
            a = generate_family(FamilySpec(kind, n, d))
            for tau in taus:
                suite.append(Scenario(a, RADEMACHER, tau, 1.0, quadrature=spec))
    rng = np.random.default_rng(seed)
    for _ in range(random_count):
        F = RADEMACHER if rng.random() < 0.5 else random_law(rng)
        n_cap = enumeration_budget(F, 16 if d == 1 else 10, d)
        kind = ("all_ones", "arithmetic", "random_uniform")[int(rng.integers(0, 3))]
        n = int(rng.integers(max(1, n_cap // 2), n_cap + 1))
        a = generate_family(FamilySpec(kind, n, d, seed=int(rng.integers(2 ** 31))))
        scale = float(np.max(np.abs(a.rows))) * float(np.max(np.abs(F.atoms)))
        tau = float(np.exp(rng.uniform(np.log(0.05), np.log(1.5)))) * scale
        eps = float(np.exp(rng.uniform(np.log(0.1), np.log(2.0)))) * scale
        suite.append(Scenario(a, F, tau, eps, quadrature=spec,
                              seed=int(rng.integers(2 ** 31))))
    return suite


def esseen_suite(seed: int, size: int = 200, spec: Optional[QuadratureSpec] = None
                 ) -> list[Scenario]:
    return make_suite(seed, size, n_max=12, d=1, spec=spec)


def suite_q_values(suite: Sequence[Scenario]) -> list[float]:
    out = []
    for s in suite:
        q, mc, _ = bounds.concentration(s)
        out.append(q if q is not None else mc[0])
    return out


def run_constants(seed: int = 0, spec: Optional[QuadratureSpec] = None,
                  names: Sequence[str] = CONSTANT_BOUNDS, dims=(1, 2)
                  ) -> list[ConstantEstimate]:
    est = []
    for d in dims:
        suite = theorem1_suite(seed, d, spec=spec)
        qs = suite_q_values(suite)
        for name in names:
            if name == "esseen" and d != 1:
                continue
            try:
                est.append(estimate_constant(name, suite, seed, qs))
            except DomainError:
                est.append(ConstantEstimate(name, d, math.nan, -1, seed, 0))
    return est


# Frozen validation constants. C_1 is fixed a priori; C_2 was frozen after
# calibration runs with seeds 1 and 2 (largest observed Q / bound: 0.604 and
# 0.646 in d = 1, 0.294 and 0.294 in d = 2), rounded up to 1.
ESSEEN_CONSTANT = 2.0
THEOREM1_CONSTANTS = {1: 1.0, 2: 1.0}
THEOREM1_VARIANTS = ("thm1_nonzero", "thm1_tail", "thm1_floor")


def run_frozen_constants(seed: int = 0, spec: Optional[QuadratureSpec] = None
                         ) -> tuple[list[CheckRecord], list[ConstantEstimate]]:
    """Check Q <= C * bound with the frozen constants on seeded suites.

    Returns one record per (scenario, bound) pair with a defined bound and
    the per-bound constant estimates for ``constants.csv``.
    """
    recs: list[CheckRecord] = []
    est: list[ConstantEstimate] = []
    jobs = [("esseen", 1, esseen_suite(seed, spec=spec), ("esseen",), ESSEEN_CONSTANT)]
    for d in (1, 2):
        jobs.append(("thm1", d, theorem1_suite(seed, d, spec=spec), THEOREM1_VARIANTS,
                     THEOREM1_CONSTANTS[d]))
    for tag, d, suite, names, C in jobs:
        qs = suite_q_values(suite)
        for name in names:
            best, arg, count = -math.inf, -1, 0
            for i, (s, q) in enumerate(zip(suite, qs)):
                b = bound_value(s, name)
                if b is None:
                    continue
                recs.append(CheckRecord(f"{name}_d{d}", len(recs), bool(q <= C * b + EXACT_SLACK),
                                        {"scenario": i, "q": q, "bound": b, "constant": C}))
                if 0 < b < 1:
                    count += 1
                    if q / b > best:
                        best, arg = q / b, i
            est.append(ConstantEstimate(name, d, float(best) if count else math.nan,
                                        arg, seed, count))
    return recs, est
