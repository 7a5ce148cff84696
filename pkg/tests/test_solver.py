"""Exhaustive and annealing minimisers, the lambda iteration and its oracle."""

import numpy as np
import pytest

from isingchem.locality import IsingModel, reduce_to_2local
from isingchem.molecules import exchange_model, h2_spin_hamiltonian, load_coefficient_table
from isingchem.pauli import PauliSum
from isingchem.replication import (
    ReplicationLayout,
    ZPolynomial,
    build_replicated_hamiltonian,
    count_polynomial,
    count_values_all,
)
from isingchem.solver import (
    AnnealSchedule,
    IterationLimitError,
    NonHermitianError,
    algorithm1,
    dense_ground_energy,
    min_diagonal_anneal,
    min_diagonal_exhaustive,
    restricted_minimum_oracle,
)
from isingchem.verification import oracle_suite, random_hermitian, random_zpoly

EXCHANGE = exchange_model(0.001, -0.1, 0.0)
PP, MP = ReplicationLayout(2, 2, (1, 1)), ReplicationLayout(2, 2, (-1, 1))


def shifted(H, layout, lam):
    return build_replicated_hamiltonian(H, layout) - count_polynomial(layout) * lam


def random_ising(n, rng):
    h = {i: float(rng.normal()) for i in range(n)}
    J = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4}
    return IsingModel(float(rng.normal()), h, J, n_vars=n)


@pytest.fixture(scope="module")
def table():
    return load_coefficient_table()


class TestExhaustive:
    def test_all_positive_copies_at_lambda_100(self):
        bits, value = min_diagonal_exhaustive(shifted(EXCHANGE, PP, 100.0), 4)
        assert bits == "0000"
        assert value == pytest.approx(-400.008, abs=1e-12)

    def test_mixed_copies_at_lambda_100(self):
        """With one negative copy the shared pattern has count 0, so 0000 cannot win."""
        p = shifted(EXCHANGE, MP, 100.0)
        bits, value = min_diagonal_exhaustive(p, 4)
        assert (bits, value) == ("0110", pytest.approx(-200.2, abs=1e-12))
        assert build_replicated_hamiltonian(EXCHANGE, MP).evaluate("0000") == 0.0
        assert count_polynomial(MP).evaluate("0000") == 0.0

    def test_single_field(self):
        assert min_diagonal_exhaustive(ZPolynomial({(0,): 0.7}), 1) == ("1", pytest.approx(-0.7))

    def test_tie_prefers_score_then_lexicographic(self):
        p = ZPolynomial({(0, 1): -1.0})  # minima at 00 and 11
        assert min_diagonal_exhaustive(p, 2)[0] == "00"
        assert min_diagonal_exhaustive(p, 2, prefer=np.array([0, 0, 0, 5]))[0] == "11"

    def test_reversed_scan(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            p = random_zpoly(10, rng, 25, 4)
            bits, value = min_diagonal_exhaustive(p, 10)
            vals = p.values(10)
            rev = len(vals) - 1 - int(np.argmin(vals[::-1]))
            assert value == pytest.approx(vals[rev], abs=1e-12)
            assert p.evaluate(bits) == pytest.approx(value, abs=1e-12)

    def test_ising_input(self):
        m = random_ising(6, np.random.default_rng(1))
        bits, value = min_diagonal_exhaustive(m)
        assert value == pytest.approx(m.energies().min()) and m.energy(bits) == pytest.approx(value)

    def test_cap(self):
        with pytest.raises(ValueError, match="cap"):
            min_diagonal_exhaustive(ZPolynomial({(30,): 1.0}))


class TestAnneal:
    def test_twelve_variable_instances(self):
        rng = np.random.default_rng(2)
        hits = 0
        for seed in range(100):
            m = random_ising(12, rng)
            _, value = min_diagonal_anneal(m, AnnealSchedule(sweeps=100, restarts=8, seed=seed))
            exact = float(m.energies().min())
            assert value >= exact - 1e-9
            hits += abs(value - exact) < 1e-9
        assert hits >= 95

    def test_uncoupled_fields(self):
        m = IsingModel(0.0, {0: 1.0, 1: -2.0, 2: 0.5}, {})
        assert min_diagonal_anneal(m) == ("101", pytest.approx(-3.5))

    def test_h2_reduced_instance(self, table):
        H = h2_spin_hamiltonian(table.coefficients(table.row(1.4)))
        m = reduce_to_2local(shifted(H, PP, 0.0))
        _, value = min_diagonal_anneal(m, AnnealSchedule(seed=3))
        assert value == pytest.approx(min_diagonal_exhaustive(m)[1], abs=1e-9)

    def test_deterministic(self):
        m = random_ising(10, np.random.default_rng(4))
        assert min_diagonal_anneal(m, AnnealSchedule(seed=7)) == min_diagonal_anneal(m, AnnealSchedule(seed=7))

    @pytest.mark.parametrize(
        "kwargs", [dict(sweeps=0), dict(restarts=0), dict(t_initial=-1.0), dict(t_initial=0.1, t_final=1.0)]
    )
    def test_schedule_validation(self, kwargs):
        with pytest.raises(ValueError):
            AnnealSchedule(**kwargs)


class TestAlgorithm1:
    def test_worked_trace_warm(self):
        """Starting at 100 with all-positive copies, then continuing with the first copy negative."""
        res = algorithm1(EXCHANGE, 2, lambda0=100.0, warm_start=True, layouts=[PP, MP])
        trace = res.lambda_trace()
        assert len(trace) == 3
        assert trace[0] == 100.0
        assert trace[1] == pytest.approx(0.0, abs=5e-3)
        assert trace[2] == pytest.approx(-0.1, abs=1e-12)
        productive = [rec for rep in res.reports for rec in rep.records if rec.min_value < 0]
        assert [(rec.state, rec.count) for rec in productive] == [("0000", 4), ("0110", 2)]
        assert productive[0].min_value == pytest.approx(-400, abs=1e-2)
        assert productive[1].min_value == pytest.approx(-0.2, abs=5e-3)
        assert res.energy == pytest.approx(-0.1, abs=1e-12)

    def test_mixed_config_alone(self):
        rep = algorithm1(EXCHANGE, 2, lambda0=100.0, layouts=[MP]).reports[0]
        assert rep.lambdas == [100.0, pytest.approx(-0.1, abs=1e-12)]
        assert [(rec.state, rec.count) for rec in rep.records] == [("0110", 2), ("0110", 2)]

    def test_default_run(self):
        res = algorithm1(EXCHANGE, 2)
        assert [rep.sign_label for rep in res.reports] == ["++", "-+"]
        assert res.energy == pytest.approx(-0.1, abs=1e-12)
        assert res.best.sign_label == "-+"

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_scaled_identity(self, r):
        res = algorithm1(PauliSum.identity(2, -0.8), r)
        for rep in res.reports:
            assert rep.lambdas[1:] == [pytest.approx(-0.8, abs=1e-12)]
            assert rep.iterations == 2

    def test_h2_four_copies_near_simulated_value(self, table):
        row = table.row(1.5)
        res = algorithm1(h2_spin_hamiltonian(table.coefficients(row)), 4)
        assert res.energy == pytest.approx(-1.1450, abs=5e-3)

    def test_anneal_path_matches(self, table):
        H = h2_spin_hamiltonian(table.coefficients(table.row(1.4)))
        a = algorithm1(H, 2).energy
        b = algorithm1(H, 2, solver="anneal", schedule=AnnealSchedule(seed=1)).energy
        assert b == pytest.approx(a, abs=1e-9)

    def test_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            algorithm1(PauliSum.from_terms(1, [(1j, "Z")]), 2)

    def test_iteration_cap(self):
        with pytest.raises(IterationLimitError):
            algorithm1(random_hermitian(2, np.random.default_rng(5)), 3, max_iter=1)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            algorithm1(EXCHANGE, 0)
        with pytest.raises(ValueError):
            algorithm1(EXCHANGE, 2, solver="quantum")


class TestInvariants:
    def test_monotone_and_final_nonnegative(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            res = algorithm1(random_hermitian(2, rng), 3, lambda0=50.0)
            for rep in res.reports:
                assert rep.is_monotone()
                assert rep.records[-1].min_value >= -1e-9 * 50
                assert all(rec.count > 0 for rec in rep.records)

    def test_sandwich(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            H = random_hermitian(2, rng)
            e2, e4 = algorithm1(H, 2).energy, algorithm1(H, 4).energy
            assert dense_ground_energy(H) <= e4 + 1e-12
            assert e4 <= e2 + 1e-12

    def test_zero_count_states_never_chosen(self):
        rng = np.random.default_rng(8)
        layout = ReplicationLayout(2, 4, (-1, -1, 1, 1))
        for _ in range(10):
            rep = algorithm1(random_hermitian(2, rng), 4, layouts=[layout]).reports[0]
            counts = count_values_all(layout)
            assert all(counts[int(rec.state, 2)] > 0 for rec in rep.records)


class TestOracle:
    def test_exchange(self):
        assert restricted_minimum_oracle(EXCHANGE, 2) == pytest.approx(-0.1, abs=1e-12)

    def test_suite(self):
        res = oracle_suite(seed=9, cases=50)
        assert res.passed, res.failures
        assert res.cases == 150

    def test_nesting(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            H = random_hermitian(2, rng)
            assert restricted_minimum_oracle(H, 4) <= restricted_minimum_oracle(H, 2) + 1e-12

    def test_cap(self):
        with pytest.raises(ValueError, match="cap"):
            restricted_minimum_oracle(PauliSum.identity(3), 7)
