"""Comparison bounds for Q(F_a, tau) in terms of the laws H_1^lambda.

Every bound here is returned *without* its dimension constant: the
guarantees read ``Q(F_a, tau) <= C_d * bound``. The constants are estimated
empirically by :mod:`anticonc.verify`.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import exact
from .charfn import QuadratureSpec, esseen_upper, handle_Fa, q_H
from .core import (DiscreteDist1D, DomainError, ResourceError, Scenario, WeightMatrix,
                   check_dominated, strict_floor, symmetrize, tail_mass, tail_measure,
                   _scaled_tol)

BOUND_NAMES = ("esseen", "thm1_tail", "thm1_floor", "cor1", "cor2")
CSV_COLUMNS = ("scenario_id", "n", "d", "tau", "epsilon", "q_exact", "q_mc", "q_mc_stderr",
               "esseen", "thm1_tail", "thm1_floor", "cor1", "cor2", "cor2_lambda", "flags")

_INT_SNAP = 1e-12


def _snap(x: float) -> float:
    """Round ratios within relative 1e-12 of an integer onto it."""
    r = round(x)
    if r >= 1 and abs(x - r) <= _INT_SNAP * r:
        return float(r)
    return x


def theorem1_rhs(a: WeightMatrix, V: DiscreteDist1D, tau: float,
                 spec: Optional[QuadratureSpec] = None,
                 G: Optional[DiscreteDist1D] = None) -> float:
    """sum_j w_j * Q(H_1^lambda, tau / |z_j|) with lambda = V(R), W = V / lambda.

    An atom at z = 0 contributes its weight times Q(., inf) = 1. If ``G`` is
    given, ``V <= G`` is validated first.
    """
    lam = V.mass
    if not lam > 0:
        raise DomainError("the compound Poisson bound needs a measure V of positive total mass")
    if not tau > 0:
        raise DomainError("the compound Poisson bound is evaluated for tau > 0")
    if G is not None:
        check_dominated(V, G)
    w = V.masses / lam
    absz = np.abs(V.atoms)
    total = 0.0
    # identical |z| share one quadrature
    eps = _scaled_tol(absz)
    uniq = []
    for z in absz:
        if not any(abs(z - u) <= eps for u in uniq):
            uniq.append(z)
    cache = {}
    for u in uniq:
        cache[u] = 1.0 if u <= eps else q_H(a, lam, tau / u, spec)
    wsum = 0.0
    for z, wj in zip(absz, w):
        key = next(u for u in uniq if abs(z - u) <= eps)
        total += wj * cache[key]
        wsum += wj
    # W sums to 1 only up to rounding; all-clamped terms must give exactly 1
    return float(total / wsum)


def corollary1_rhs(a: WeightMatrix, G: DiscreteDist1D, tau: float, epsilon: float,
                   spec: Optional[QuadratureSpec] = None) -> float:
    """Q(H_1^{p(tau/epsilon)}, epsilon), with p the tail mass of G."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    p = tail_mass(G, tau / epsilon)
    return q_H(a, p, epsilon, spec)


def floor_weights(G: DiscreteDist1D, tau: float, epsilon: float, d: int) -> np.ndarray:
    """(1 + strict_floor(tau / (epsilon |z|)))^-d per atom of G, 0 at z = 0."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    z = np.abs(G.atoms)
    wts = np.zeros(z.size)
    for i, zi in enumerate(z):
        if zi == 0:
            continue
        ratio = tau / (epsilon * zi)
        if ratio == 0:  # includes underflow of tiny tau
            wts[i] = 1.0
            continue
        if math.isinf(ratio):
            continue  # (1 + floor(inf))^-d = 0
        wts[i] = (1 + strict_floor(_snap(ratio))) ** (-d)
    return wts


def corollary2_lambda(G: DiscreteDist1D, tau: float, epsilon: float, d: int) -> float:
    """int (1 + strict_floor(tau / (epsilon |z|)))^-d G(dz).

    Atoms beyond tau/epsilon have weight exactly 1; their mass is summed
    first, exactly as :func:`tail_mass` does, so the result never falls
    below ``tail_mass(G, tau / epsilon)`` even by rounding.
    """
    delta = tau / epsilon
    tail = np.abs(G.atoms) > delta
    lam = float(G.masses[tail].sum())
    wts = floor_weights(G, tau, epsilon, d)
    rest = float(np.dot(G.masses[~tail], wts[~tail]))
    return lam + rest


def floor_measure(G: DiscreteDist1D, tau: float, epsilon: float, d: int
                  ) -> Optional[DiscreteDist1D]:
    """The measure V(dz) = (1 + strict_floor(tau/(epsilon|z|)))^-d G(dz)."""
    wts = floor_weights(G, tau, epsilon, d)
    m = G.masses * wts
    keep = m > 0
    if not np.any(keep):
        return None
    return DiscreteDist1D(G.atoms[keep], m[keep], total=float(m[keep].sum()))


def corollary2_rhs(a: WeightMatrix, G: DiscreteDist1D, tau: float, epsilon: float,
                   spec: Optional[QuadratureSpec] = None) -> float:
    """lambda^-1 * Q(H_1^lambda, epsilon) with lambda = corollary2_lambda."""
    lam = corollary2_lambda(G, tau, epsilon, a.d)
    if lam <= 0:
        raise DomainError("the floor-weighted bound is undefined when lambda = 0")
    return q_H(a, lam, epsilon, spec) / lam


def regularity_check(F: DiscreteDist1D, mu: float, lam: float, d: int = 1
                     ) -> tuple[float, float]:
    """(Q(F, mu), (1 + strict_floor(mu/lam))^d * Q(F, lam)) from exact Q."""
    if not (mu > 0 and lam > 0):
        raise DomainError("mu and lambda must be positive")
    lhs = exact.q_exact(F, mu)
    factor = (1 + strict_floor(_snap(mu / lam))) ** d
    return lhs, factor * exact.q_exact(F, lam)


# --------------------------------------------------------------------------
# reports

@dataclass
class BoundReport:
    scenario: dict
    q_exact: Optional[float] = None
    q_method: Optional[str] = None
    q_mc: Optional[tuple] = None
    esseen: Optional[float] = None
    thm1: Optional[float] = None
    thm1_tail: Optional[float] = None
    thm1_floor: Optional[float] = None
    cor1: Optional[float] = None
    cor2: Optional[float] = None
    cor2_lambda: Optional[float] = None
    v_choice: str = "tail"
    ratios: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    seed: int = 0

    @property
    def q_value(self) -> Optional[float]:
        if self.q_exact is not None:
            return self.q_exact
        return None if self.q_mc is None else self.q_mc[0]

    def bound(self, name: str) -> Optional[float]:
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "q_exact": self.q_exact,
            "q_method": self.q_method,
            "q_mc": None if self.q_mc is None else
            {"estimate": self.q_mc[0], "stderr": self.q_mc[1], "seed": self.seed},
            "esseen": self.esseen,
            "thm1": self.thm1,
            "thm1_tail": self.thm1_tail,
            "thm1_floor": self.thm1_floor,
            "cor1": self.cor1,
            "cor2": self.cor2,
            "cor2_lambda": self.cor2_lambda,
            "v_choice": self.v_choice,
            "ratios": self.ratios,
            "flags": self.flags,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def csv_row(self, scenario_id) -> list:
        def f(x):
            return "" if x is None else repr(float(x))
        sc = self.scenario
        return [scenario_id, len(sc["weights"]), len(sc["weights"][0]), sc["tau"],
                sc["epsilon"], f(self.q_exact), f(None if self.q_mc is None else self.q_mc[0]),
                f(None if self.q_mc is None else self.q_mc[1]), f(self.esseen),
                f(self.thm1_tail), f(self.thm1_floor), f(self.cor1), f(self.cor2),
                f(self.cor2_lambda), ";".join(self.flags)]


def reports_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for sid, rep in rows:
        w.writerow(rep.csv_row(sid))
    return buf.getvalue()


def concentration(s: Scenario, mc_ok: bool = True) -> tuple:
    """(q_exact, q_mc, method) for a scenario; enumeration when under the cap."""
    a, F, tau = s.weights, s.law_x, s.tau
    if math.isinf(tau):
        return 1.0, None, "definition"
    try:
        if a.d > 2:
            raise ResourceError("exact Q only for d <= 2")
        law = exact.weighted_sum_dist(a, F, s.enumeration_cap)
        return exact.q_exact(law, tau), None, "enumeration"
    except ResourceError:
        if not mc_ok:
            raise
    batch = exact.sample_weighted_sum(a, F, s.mc_samples, s.seed)
    est = exact.q_monte_carlo(batch, tau)
    return None, est, "monte-carlo"


def build_report(s: Scenario, v_choice: str = "tail",
                 custom_v: Optional[DiscreteDist1D] = None,
                 which=BOUND_NAMES, compute_q: bool = True, mc_ok: bool = True) -> BoundReport:
    """Evaluate Q(F_a, tau) and the requested bounds for one scenario.

    ``v_choice`` selects the measure used for the reported ``thm1`` value:
    ``"tail"`` (the tail part of G beyond tau/epsilon), ``"floor"`` (the
    floor-weighted restriction of G) or ``"custom"`` (``custom_v``, which is
    validated against G). Undefined or vacuous bounds are left as ``None``
    or flagged rather than raising.
    """
    a, F, tau, eps, spec = s.weights, s.law_x, s.tau, s.epsilon, s.quadrature
    G = symmetrize(F)
    rep = BoundReport(scenario=s.to_dict(), v_choice=v_choice, seed=s.seed)
    if compute_q:
        try:
            q, mc, method = concentration(s, mc_ok)
            rep.q_exact, rep.q_mc, rep.q_method = q, mc, method
        except ResourceError as exc:
            rep.flags.append(f"q:unavailable({exc})")
        except Exception as exc:  # partial report
            rep.flags.append(f"q:error({exc})")
    finite_tau = 0 < tau < math.inf

    if "esseen" in which:
        if finite_tau:
            rep.esseen = esseen_upper(handle_Fa(a, F), tau, spec)
        else:
            rep.flags.append("esseen:undefined_tau")

    def thm1_for(V, label):
        if V is None or V.mass <= 0:
            rep.flags.append(f"{label}:vacuous_empty_V")
            return None
        if not finite_tau:
            rep.flags.append(f"{label}:undefined_tau")
            return None
        return theorem1_rhs(a, V, tau, spec)

    if "thm1_tail" in which or v_choice == "tail":
        rep.thm1_tail = thm1_for(tail_measure(G, tau / eps), "thm1_tail")
    if "thm1_floor" in which or v_choice == "floor":
        rep.thm1_floor = thm1_for(floor_measure(G, tau, eps, a.d), "thm1_floor")
    if v_choice == "tail":
        rep.thm1 = rep.thm1_tail
    elif v_choice == "floor":
        rep.thm1 = rep.thm1_floor
    elif v_choice == "custom":
        if custom_v is None:
            raise DomainError("custom V requested but none given")
        check_dominated(custom_v, G)
        rep.thm1 = thm1_for(custom_v, "thm1_custom")
    else:
        raise DomainError(f"unknown V choice {v_choice!r}")

    if "cor1" in which:
        rep.cor1 = corollary1_rhs(a, G, tau, eps, spec)
    if "cor2" in which or "cor2_lambda" in which:
        lam = corollary2_lambda(G, tau, eps, a.d)
        rep.cor2_lambda = lam
        if lam > 0:
            rep.cor2 = q_H(a, lam, eps, spec) / lam
        else:
            rep.flags.append("cor2:vacuous_lambda_zero")

    q = rep.q_exact
    for name in BOUND_NAMES + ("thm1",):
        b = getattr(rep, name)
        if b is None:
            continue
        if b >= 1 and (name != "thm1" or v_choice == "custom"):
            rep.flags.append(f"{name}:vacuous")
        if q is not None and b > 0:
            rep.ratios[name] = b / q
    return rep
