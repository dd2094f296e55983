import csv
import io
import json
import math

import numpy as np
import pytest

from anticonc.bounds import (BOUND_NAMES, CSV_COLUMNS, build_report, corollary1_rhs,
                             corollary2_lambda, corollary2_rhs, floor_measure,
                             regularity_check, reports_to_csv, theorem1_rhs)
from anticonc.charfn import q_H
from anticonc.core import (ContractError, DiscreteDist1D, DomainError, Scenario, WeightMatrix,
                           symmetrize, tail_mass, tail_measure)
from anticonc.exact import q_monte_carlo, sample_H
from anticonc.verify import ESSEEN_CONSTANT, THEOREM1_CONSTANTS, FamilySpec, generate_family
from oracles import central_binomial

RAD = DiscreteDist1D([-1, 1], [0.5, 0.5])
G_RAD = symmetrize(RAD)


class TestCompoundPoissonBound:
    def test_single_atom(self):
        a = WeightMatrix([1.0, 2.0])
        V = DiscreteDist1D([2.0], [0.25], total=0.25)
        assert theorem1_rhs(a, V, 0.8) == q_H(a, 0.25, 0.4)

    def test_all_mass_at_zero(self):
        V = DiscreteDist1D([0.0], [0.5], total=0.5)
        assert theorem1_rhs(WeightMatrix([1, 1]), V, 1.0) == 1.0

    def test_tail_v_is_radius_mixture(self):
        a = WeightMatrix(np.ones(10))
        V = tail_measure(G_RAD, 1.0)
        # both atoms sit at |z| = 2
        assert theorem1_rhs(a, V, 1.0) == pytest.approx(q_H(a, 0.5, 0.5), abs=1e-15)

    def test_weights_average(self):
        a = WeightMatrix([1.0, 3.0])
        G = symmetrize(DiscreteDist1D([0, 1, 3], [0.2, 0.3, 0.5]))
        V = tail_measure(G, 0.5)
        lam = V.mass
        expect = sum(m / lam * q_H(a, lam, 0.7 / abs(z)) for z, m in zip(V.atoms, V.masses))
        assert theorem1_rhs(a, V, 0.7, G=G) == pytest.approx(expect, rel=1e-12)

    def test_errors(self):
        a = WeightMatrix([1])
        with pytest.raises(DomainError):
            theorem1_rhs(a, DiscreteDist1D([], [], total=0.0), 1.0)
        with pytest.raises(DomainError):
            theorem1_rhs(a, tail_measure(G_RAD, 0), 0.0)
        with pytest.raises(ContractError):
            theorem1_rhs(a, DiscreteDist1D([2], [0.5], total=0.5), 1.0, G=G_RAD)


class TestDerivedBounds:
    def test_cor1_empty_tail(self):
        assert corollary1_rhs(WeightMatrix([1]), G_RAD, 2.0, 1.0) == 1.0

    def test_cor1_rademacher_example(self):
        a = WeightMatrix([1])
        val = corollary1_rhs(a, G_RAD, 1.0, 1.0)
        assert val == q_H(a, 0.5, 1.0)
        est, _ = q_monte_carlo(sample_H(a, 0.5, 200_000, 5), 1.0)
        assert 0.25 <= val / est <= 4

    def test_cor1_small_tau_limit(self):
        a = WeightMatrix([1, 2])
        p0 = 1 - G_RAD.mass_at(0.0)
        assert corollary1_rhs(a, G_RAD, 1e-9, 0.5) == q_H(a, p0, 0.5)

    def test_cor2_lambda_examples(self):
        assert corollary2_lambda(G_RAD, 1.0, 1.0, 1) == 0.5
        assert corollary2_lambda(G_RAD, 4.0, 1.0, 1) == 0.25
        G = symmetrize(DiscreteDist1D([0, 1, 3], [0.2, 0.3, 0.5]))
        assert corollary2_lambda(G, 0.0, 1.0, 2) == 1 - G.mass_at(0.0)

    def test_cor2_lambda_dimension(self):
        # ratio 2 at |z| = 2 with tau/eps = 4: weight (1 + 1)^-d
        assert corollary2_lambda(G_RAD, 4.0, 1.0, 2) == 0.125

    def test_cor2_rhs(self):
        a = WeightMatrix([1, 1, 1])
        assert corollary2_rhs(a, G_RAD, 0.7, 0.7) == 2 * q_H(a, 0.5, 0.7)
        G = DiscreteDist1D([-1, 1], [0.5, 0.5])
        assert corollary2_rhs(a, G, 0.0, 0.6) == q_H(a, 1.0, 0.6)
        with pytest.raises(DomainError):
            corollary2_rhs(a, DiscreteDist1D.point_mass(), 1.0, 1.0)

    def test_floor_measure_dominated(self):
        G = symmetrize(DiscreteDist1D([0, 0.5, 2, 3], [0.1, 0.2, 0.3, 0.4]))
        for r in (0.1, 0.5, 1, 2, 4, 9):
            V = floor_measure(G, r, 1.0, 1)
            assert V.mass == pytest.approx(corollary2_lambda(G, r, 1.0, 1), rel=1e-12)
            assert np.all(V.masses <= np.array([G.mass_at(z) for z in V.atoms]) + 1e-15)


class TestRegularity:
    def test_examples(self):
        F = DiscreteDist1D([0, 1], [0.5, 0.5])
        assert regularity_check(F, 2.0, 0.5) == (1.0, 2.0)
        lhs, rhs = regularity_check(F, 0.7, 0.7)
        assert lhs == rhs
        pm = DiscreteDist1D.point_mass(2.0)
        assert regularity_check(pm, 5.0, 1.0) == (1.0, 5.0)
        with pytest.raises(DomainError):
            regularity_check(F, 0.0, 1.0)


def scenario(a, F=RAD, tau=0.5, eps=1.0):
    return Scenario(WeightMatrix(a), F, tau, eps)


class TestReport:
    def test_binomial_tau_zero(self):
        rep = build_report(scenario(np.ones(8), tau=0.0))
        assert rep.q_exact == 0.2734375 == central_binomial(8)
        assert rep.esseen is None and rep.thm1_tail is None
        assert "esseen:undefined_tau" in rep.flags
        assert rep.cor1 == 1.0 and rep.cor2_lambda == 0.5 and rep.cor2 == 2.0
        for name in ("cor1", "cor2"):
            assert rep.bound(name) >= rep.q_exact / THEOREM1_CONSTANTS[1]
            assert f"{name}:vacuous" in rep.flags

    def test_binomial_positive_tau(self):
        rep = build_report(scenario(np.ones(8), tau=0.5))
        for name in BOUND_NAMES + ("cor2_lambda",):
            assert rep.bound(name) is not None
        assert rep.q_exact <= ESSEEN_CONSTANT * rep.esseen
        assert rep.q_exact <= THEOREM1_CONSTANTS[1] * rep.thm1_tail
        assert rep.ratios["esseen"] == rep.esseen / rep.q_exact

    def test_point_mass(self):
        rep = build_report(scenario([1.0], F=DiscreteDist1D.point_mass(), tau=1.0))
        assert rep.q_exact == 1.0
        for name in BOUND_NAMES:
            b = rep.bound(name)
            assert b is None or b >= 1
        assert rep.cor1 == 1.0
        assert "cor2:vacuous_lambda_zero" in rep.flags
        assert "thm1_tail:vacuous_empty_V" in rep.flags

    def test_arithmetic_both_v(self):
        a = generate_family(FamilySpec("arithmetic", 16))
        rep_t = build_report(Scenario(a, RAD, 0.5, 1.0), v_choice="tail")
        rep_f = build_report(Scenario(a, RAD, 0.5, 1.0), v_choice="floor")
        assert rep_t.thm1 == rep_t.thm1_tail and rep_f.thm1 == rep_f.thm1_floor
        assert rep_t.thm1_floor == rep_f.thm1_floor
        assert set(rep_t.ratios) >= {"thm1_tail", "thm1_floor"}

    def test_custom_v(self):
        s = scenario([1, 2, 3])
        V = DiscreteDist1D([-2, 2], [0.1, 0.1], total=0.2)
        rep = build_report(s, v_choice="custom", custom_v=V)
        assert rep.thm1 == theorem1_rhs(s.weights, V, s.tau)
        with pytest.raises(ContractError):
            build_report(s, v_choice="custom", custom_v=DiscreteDist1D([1], [0.1], total=0.1))

    def test_tau_infinite(self):
        rep = build_report(scenario([1, 1], tau=math.inf))
        assert rep.q_exact == 1.0 and "esseen:undefined_tau" in rep.flags

    def test_monte_carlo_path(self):
        s = Scenario(WeightMatrix(np.ones(12)), RAD, 1.0, 1.0, enumeration_cap=100,
                     mc_samples=20_000, seed=3)
        rep = build_report(s, which=())
        assert rep.q_exact is None and rep.q_method == "monte-carlo"
        assert rep.q_mc == build_report(s, which=()).q_mc

    def test_permutation_and_negation_invariance(self):
        rng = np.random.default_rng(8)
        a = rng.uniform(-1, 1, size=(6, 2))
        base = build_report(Scenario(WeightMatrix(a), RAD, 0.4, 0.9))
        b = a[rng.permutation(6)] * np.array([[1], [-1], [1], [-1], [-1], [1]])
        other = build_report(Scenario(WeightMatrix(b), RAD, 0.4, 0.9))
        assert other.q_exact == pytest.approx(base.q_exact, abs=1e-12)
        for name in BOUND_NAMES:
            assert other.bound(name) == pytest.approx(base.bound(name), rel=1e-6)

    def test_serialization(self):
        rep = build_report(scenario([1, 2, 2]))
        d = json.loads(rep.to_json())
        assert {"q_exact", "esseen", "thm1", "cor1", "cor2", "cor2_lambda", "ratios",
                "flags", "scenario"} <= d.keys()
        text = reports_to_csv([(0, rep), (1, rep)])
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 3 and float(rows[1][CSV_COLUMNS.index("q_exact")]) == rep.q_exact

    def test_report_invariants(self):
        rep = build_report(scenario([1, 0.5, 0.25], F=DiscreteDist1D([0, 1, 2], [0.5, 0.3, 0.2])))
        for name in BOUND_NAMES:
            assert rep.bound(name) >= 0
        assert 0 <= rep.cor2_lambda <= 1
        assert rep.cor2_lambda >= tail_mass(symmetrize(rep_law(rep)), 0.5)


def rep_law(rep):
    law = rep.scenario["law_x"]
    return DiscreteDist1D(law["atoms"], law["masses"])
