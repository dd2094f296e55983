import json
import math

import numpy as np
import pytest

from anticonc.charfn import QuadratureSpec
from anticonc.core import (ContractError, DiscreteDist1D, DiscreteDistD, DomainError,
                           Scenario, WeightMatrix, check_dominated, load_scenario,
                           restrict_and_normalize, strict_floor, symmetrize, tail_mass,
                           tail_measure)
from oracles import enumerate_symmetrized

RAD = DiscreteDist1D([-1, 1], [0.5, 0.5])
G_RAD = DiscreteDist1D([-2, 0, 2], [0.25, 0.5, 0.25])


def as_dict(F):
    return {float(x): float(m) for x, m in zip(F.atoms, F.masses)}


class TestStrictFloor:
    @pytest.mark.parametrize("x, k", [(1.0, 0), (1.5, 1), (0.3, 0), (2.0, 1), (7.0, 6),
                                      (7.000001, 7), (1e-9, 0)])
    def test_values(self, x, k):
        assert strict_floor(x) == k

    @pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            strict_floor(x)

    def test_agrees_with_floor_off_integers(self):
        rng = np.random.default_rng(0)
        for x in rng.uniform(0.01, 50, 1000):
            if x != math.floor(x):
                assert strict_floor(x) == math.floor(x)


class TestDistributions:
    def test_merge_and_sort(self):
        F = DiscreteDist1D([1.0, 0.0, 1.0 + 1e-15], [0.25, 0.5, 0.25])
        assert F.atoms[0] == 0.0 and F.atoms[1] == pytest.approx(1.0, abs=1e-14)
        assert F.masses.tolist() == [0.5, 0.5]

    def test_identical_atoms_stay_exact(self):
        F = DiscreteDist1D([3.0, 3.0, 3.0, -1.0], [0.1, 0.2, 0.3, 0.4])
        assert F.atoms.tolist() == [-1.0, 3.0]

    def test_zero_masses_dropped(self):
        F = DiscreteDist1D([0, 1, 2], [0.5, 0.0, 0.5])
        assert len(F) == 2

    def test_probability_validation(self):
        with pytest.raises(DomainError):
            DiscreteDist1D([0, 1], [0.5, 0.6])
        with pytest.raises(DomainError):
            DiscreteDist1D([0, 1], [1.5, -0.5])
        with pytest.raises(DomainError):
            DiscreteDist1D([0, math.nan], [0.5, 0.5])

    def test_renormalized_exactly(self):
        F = DiscreteDist1D([0, 1, 2], [0.1, 0.2, 0.7 + 5e-13])
        assert abs(F.masses.sum() - 1) < 1e-15

    def test_sub_probability(self):
        V = DiscreteDist1D([-2, 2], [0.1, 0.1], total=0.2)
        assert not V.is_probability
        assert V.mass == pytest.approx(0.2)
        with pytest.raises(DomainError):
            DiscreteDist1D([-2, 2], [0.1, 0.1], total=0.5)

    def test_immutable(self):
        with pytest.raises(ValueError):
            RAD.atoms[0] = 3.0

    def test_dist_d(self):
        F = DiscreteDistD([[0, 0], [1, 0], [0, 0]], [0.25, 0.5, 0.25])
        assert F.dimension == 2 and len(F) == 2
        with pytest.raises(DomainError):
            DiscreteDistD([[0, 0]], [0.5])

    def test_weight_matrix(self):
        a = WeightMatrix([1, 2, 3])
        assert (a.n, a.d) == (3, 1)
        with pytest.raises(DomainError):
            WeightMatrix([[1.0, math.nan]])
        with pytest.raises(DomainError):
            WeightMatrix(np.zeros((0, 1)))


class TestSymmetrize:
    @pytest.mark.parametrize("F, expected", [
        (RAD, {-2.0: 0.25, 0.0: 0.5, 2.0: 0.25}),
        (DiscreteDist1D.point_mass(3.7), {0.0: 1.0}),
        (DiscreteDist1D([0, 1], [0.9, 0.1]), {-1.0: 0.09, 0.0: 0.82, 1.0: 0.09}),
    ])
    def test_examples(self, F, expected):
        got = as_dict(symmetrize(F))
        assert got.keys() == expected.keys()
        for k in got:
            assert got[k] == pytest.approx(expected[k], abs=1e-15)

    def test_against_pair_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            m = int(rng.integers(1, 7))
            atoms = rng.choice(np.arange(-6, 7), size=m, replace=False).astype(float)
            masses = rng.dirichlet(np.ones(m))
            G = as_dict(symmetrize(DiscreteDist1D(atoms, masses)))
            ref = enumerate_symmetrized(atoms.tolist(), masses.tolist())
            assert G.keys() == ref.keys()
            for k in ref:
                assert G[k] == pytest.approx(ref[k], abs=1e-14)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            m = int(rng.integers(1, 8))
            F = DiscreteDist1D(rng.normal(size=m), rng.dirichlet(np.ones(m)))
            G = symmetrize(F)
            assert np.array_equal(G.atoms, -G.atoms[::-1])
            assert np.array_equal(G.masses, G.masses[::-1])


class TestTails:
    @pytest.mark.parametrize("G, delta, p", [(G_RAD, 1, 0.5), (G_RAD, 2, 0.0),
                                             (DiscreteDist1D.point_mass(), 0, 0.0),
                                             (DiscreteDist1D.point_mass(), 5, 0.0)])
    def test_tail_mass(self, G, delta, p):
        assert tail_mass(G, delta) == p

    def test_tail_mass_domain(self):
        with pytest.raises(DomainError):
            tail_mass(G_RAD, -0.1)

    def test_tail_at_zero(self):
        assert tail_mass(G_RAD, 0.0) == 1 - G_RAD.mass_at(0.0)

    def test_non_increasing(self):
        G = symmetrize(DiscreteDist1D([0, 1, 3], [0.2, 0.5, 0.3]))
        vals = [tail_mass(G, d) for d in np.linspace(0, 4, 200)]
        assert all(x >= y for x, y in zip(vals, vals[1:]))

    def test_restrict_examples(self):
        p1, G1 = restrict_and_normalize(G_RAD, 1)
        assert p1 == 0.5 and as_dict(G1) == {-2.0: 0.5, 2.0: 0.5}
        p1, G1 = restrict_and_normalize(DiscreteDist1D.point_mass(), 0)
        assert p1 == 0 and G1 is None
        G = DiscreteDist1D([-1, 1], [0.5, 0.5])
        p1, G1 = restrict_and_normalize(G, 0)
        assert p1 == 1 and G1 == G

    def test_restrict_mass_balance(self):
        G = symmetrize(DiscreteDist1D([0, 1, 2.5], [0.3, 0.3, 0.4]))
        for thr in (0, 0.5, 1, 1.5, 2.5, 3):
            p1, G1 = restrict_and_normalize(G, thr)
            inside = float(G.masses[np.abs(G.atoms) <= thr].sum())
            assert abs(p1 + inside - 1) < 1e-12
            if G1 is not None:
                assert abs(G1.masses.sum() - 1) < 1e-12

    def test_tail_measure(self):
        V = tail_measure(G_RAD, 1)
        assert V.mass == 0.5 and not V.is_probability
        assert tail_measure(G_RAD, 2) is None


class TestDominance:
    def test_ok(self):
        check_dominated(DiscreteDist1D([-2, 2], [0.25, 0.1], total=0.35), G_RAD)

    def test_excess_names_atom(self):
        with pytest.raises(ContractError, match="2.0"):
            check_dominated(DiscreteDist1D([2], [0.3], total=0.3), G_RAD)

    def test_foreign_atom(self):
        with pytest.raises(ContractError, match="1.0"):
            check_dominated(DiscreteDist1D([1], [0.1], total=0.1), G_RAD)


class TestScenario:
    def make(self, **kw):
        base = dict(weights=WeightMatrix([1, 1]), law_x=RAD, tau=0.5, epsilon=1.0)
        base.update(kw)
        return Scenario(**base)

    def test_json_round_trip(self, tmp_path):
        s = self.make(tau=math.inf, quadrature=QuadratureSpec(nodes_per_axis=257))
        path = tmp_path / "s.json"
        path.write_text(json.dumps(s.to_dict()))
        t = load_scenario(path)
        assert t.to_dict() == s.to_dict()
        assert math.isinf(t.tau) and t.to_dict()["tau"] == "inf"

    def test_validation(self):
        with pytest.raises(DomainError):
            self.make(tau=-1)
        with pytest.raises(DomainError):
            self.make(epsilon=0)
        with pytest.raises(DomainError):
            self.make(law_x=DiscreteDist1D([1], [0.5], total=0.5))

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(DomainError):
            load_scenario(p)
        p.write_text(json.dumps({"weights": [[1]]}))
        with pytest.raises(DomainError):
            load_scenario(p)
        p.write_text(json.dumps({"weights": [[1]], "law_x": {"atoms": [0], "masses": [1]},
                                 "tau": "big", "epsilon": 1}))
        with pytest.raises(DomainError):
            load_scenario(p)
