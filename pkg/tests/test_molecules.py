"""Molecular Hamiltonian builders, integral files and the H2 coefficient table."""

import math

import numpy as np
import pytest

from helpers import generic_integrals, h2_like_integrals, kron_label, zero_integrals
from isingchem.molecules import (
    IntegralSet,
    MissingIntegralError,
    MoleculeCoefficients,
    TableFormatError,
    dump_coefficient_table,
    dump_integrals,
    dumps_coefficient_table,
    exchange_J_of_R,
    exchange_model,
    ground_energy,
    h2_fermion_groups,
    h2_qubit_hamiltonian,
    h2_reduced_coefficients,
    h2_second_quantized,
    h2_spin_hamiltonian,
    he2_coefficients,
    he2_spin_hamiltonian,
    heh_coefficients,
    heh_spin_hamiltonian,
    load_coefficient_table,
    load_integrals,
)
from isingchem.pauli import FermionTerm, PauliSum


def h2_integrals_from_params(h00, h22, h0000, h2222, h0022, h0220):
    eri = np.zeros((2, 2, 2, 2))
    eri[0, 0, 0, 0], eri[1, 1, 1, 1] = h0000, h2222
    eri[0, 0, 1, 1] = eri[1, 1, 0, 0] = h0220
    for idx in [(0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0)]:
        eri[idx] = h0022
    return IntegralSet.from_spatial(np.diag([h00, h22]), eri)


@pytest.fixture(scope="module")
def table():
    return load_coefficient_table()


class TestIntegralSet:
    def test_symmetry_lookup(self):
        ints = generic_integrals(np.random.default_rng(0))
        assert ints.g(0, 2, 2, 0) == ints.g(2, 0, 0, 2)
        assert ints.h(0, 2) == ints.h(2, 0)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            IntegralSet({(0, 1): 1.0, (1, 0): 2.0}, {})

    def test_missing_index(self):
        with pytest.raises(MissingIntegralError):
            IntegralSet({(0, 0): 1.0}, {}).g(0, 0, 2, 2)

    def test_file_round_trip(self, tmp_path):
        ints = generic_integrals(np.random.default_rng(1), charge=2.0)
        dump_integrals(ints, tmp_path / "ints.txt")
        back = load_integrals(tmp_path / "ints.txt")
        assert back == ints

    def test_malformed_record(self, tmp_path):
        (tmp_path / "bad.txt").write_text("one 0 0 1.0\ntwo 0 0 1\n")
        with pytest.raises(TableFormatError, match=":2:"):
            load_integrals(tmp_path / "bad.txt")


class TestH2SecondQuantized:
    def test_zero_integrals(self):
        assert h2_second_quantized(zero_integrals()) == []

    def test_twelve_groups(self):
        groups = h2_fermion_groups(h2_like_integrals(np.random.default_rng(2)))
        assert len(groups) == 12
        last_two = [str(t).split(" ", 1)[1] for _, terms in groups[10:11] for t in terms]
        assert last_two == ["[0^ 1^ 3 2]", "[2^ 3^ 1 0]"]

    def test_product_count(self):
        assert len(h2_second_quantized(h2_like_integrals(np.random.default_rng(3)))) == 14

    def test_full_hamiltonian_spectrum(self):
        """The grouped Hamiltonian equals the generic one-plus-two-body operator."""
        from isingchem.molecules import molecular_fermion_terms
        from isingchem.pauli import jordan_wigner

        ints = h2_like_integrals(np.random.default_rng(4))
        a = jordan_wigner(h2_second_quantized(ints), 4)
        b = jordan_wigner(list(molecular_fermion_terms(ints)), 4)
        np.testing.assert_allclose(np.linalg.eigvalsh(a.to_dense()), np.linalg.eigvalsh(b.to_dense()), atol=1e-10)


class TestH2ReducedCoefficients:
    def test_zero_integrals(self):
        assert h2_reduced_coefficients(zero_integrals(), 1.0).coeffs == (1.0, 0.0, 0.0, 0.0, 0.0)

    def test_g4(self):
        ints = h2_like_integrals(np.random.default_rng(5))
        assert h2_reduced_coefficients(ints, 1.2).coeffs[4] == 0.5 * ints.g(0, 0, 2, 2)

    def test_bad_R(self):
        with pytest.raises(ValueError):
            h2_reduced_coefficients(zero_integrals(), 0.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_bk_projection(self, seed):
        """Closed form equals the BK operator with qubits 1 and 3 frozen in |0>."""
        ints = h2_like_integrals(np.random.default_rng(seed))
        R = 0.5 + seed / 10
        projected = h2_qubit_hamiltonian(ints, R).restrict({1: 0, 3: 0})
        closed = h2_spin_hamiltonian(h2_reduced_coefficients(ints, R))
        assert (projected - closed).norm1() < 1e-10

    def test_projection_preserves_sector_spectrum(self):
        ints = h2_like_integrals(np.random.default_rng(30))
        full = h2_qubit_hamiltonian(ints, 1.1).to_dense()
        # basis states with qubits 1 and 3 in |0> (qubit 0 is the most significant bit)
        idx = [b0 * 8 + b2 * 2 for b0 in (0, 1) for b2 in (0, 1)]
        block = full[np.ix_(idx, idx)]
        reduced = h2_spin_hamiltonian(h2_reduced_coefficients(ints, 1.1)).to_dense()
        np.testing.assert_allclose(block, reduced, atol=1e-12)

    def test_table_row_075_from_integrals(self, table):
        """Integrals solved from the R=0.75 row reproduce its coefficients through both routes."""
        row = table.row(0.75)
        R = row.R
        # rows: g0..g4 as linear functions of (h00, h22, h0000, h2222, h0022, h0220)
        A = np.array(
            [
                [1, 1, 0.5, 0.5, -0.5, 1],
                [-1, 0, -0.5, 0, 0.5, -1],
                [0, -1, 0, -0.5, 0.5, -1],
                [0, 0, 0, 0, -0.5, 1],
                [0, 0, 0, 0, 0.5, 0],
            ]
        )
        rhs = np.array(row.coeffs) - np.array([1 / R, 0, 0, 0, 0])
        params, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        ints = h2_integrals_from_params(*params)
        g = h2_reduced_coefficients(ints, R).coeffs
        np.testing.assert_allclose(g, (1.1329, 0.4767, -0.9208, 0.6444, 0.0824), atol=1e-4)
        projected = h2_qubit_hamiltonian(ints, R).restrict({1: 0, 3: 0})
        for label, value in zip(["II", "ZI", "IZ", "ZZ", "XX"], g):
            assert projected.coefficient(label).real == pytest.approx(value, abs=1e-12)


class TestH2SpinHamiltonian:
    def test_six_terms(self, table):
        op = h2_spin_hamiltonian(table.coefficients(table.rows[0]))
        assert len(op) == 6
        assert op.is_hermitian()

    def test_row_14_exact(self, table):
        assert ground_energy(h2_spin_hamiltonian(table.coefficients(table.row(1.4)))) == pytest.approx(-1.1448, abs=1e-3)

    def test_row_31_exact(self, table):
        assert ground_energy(h2_spin_hamiltonian(table.coefficients(table.row(3.1)))) == pytest.approx(-0.9898, abs=1e-3)

    def test_constant_only(self):
        op = h2_spin_hamiltonian(MoleculeCoefficients("H2", 1.0, (0.7, 0, 0, 0, 0)))
        np.testing.assert_allclose(np.linalg.eigvalsh(op.to_dense()), [0.7] * 4)

    def test_species_mismatch(self):
        with pytest.raises(ValueError):
            h2_spin_hamiltonian(MoleculeCoefficients("HeH+", 1.0, (0.0,) * 9))


class TestHe2:
    def test_zero_integrals(self):
        op = he2_spin_hamiltonian(zero_integrals(charge=4.0), 2.0)
        assert op == PauliSum.identity(4, 2.0)

    def test_exchange_family_coefficients(self):
        ints = generic_integrals(np.random.default_rng(6), charge=4.0)
        f = he2_coefficients(ints, 1.5).coeffs
        assert f[10] == -0.25 * ints.g(0, 0, 2, 2)
        assert f[11] == 0.25 * ints.g(0, 0, 2, 2)
        assert len(f) == 14

    def test_structure_and_spectrum(self):
        op = he2_spin_hamiltonian(generic_integrals(np.random.default_rng(7), charge=4.0), 1.5)
        assert len(op) == 15
        assert {lab for lab in op.labels() if set(lab) & set("XY")} == {"XXYY", "XYYX", "YXXY", "YYXX"}
        M = op.to_dense()
        np.testing.assert_allclose(M, M.conj().T, atol=1e-12)
        assert np.all(np.isreal(np.linalg.eigvals(M).round(10)))

    def test_bad_R(self):
        with pytest.raises(ValueError):
            he2_spin_hamiltonian(zero_integrals(), -1.0)


class TestHeH:
    def test_zero_integrals(self):
        assert heh_spin_hamiltonian(zero_integrals(charge=2.0), 1.0) == PauliSum.identity(2, 2.0)

    def test_f6(self):
        ints = generic_integrals(np.random.default_rng(8), charge=2.0)
        assert heh_coefficients(ints, 1.0).coeffs[6] == -1.0 * ints.g(0, 0, 2, 2)

    def test_matches_term_by_term_dense(self):
        ints = generic_integrals(np.random.default_rng(9), charge=2.0)
        f = heh_coefficients(ints, 1.3).coeffs
        labels = ["II", "ZI", "IZ", "XI", "ZZ", "XZ", "ZX", "XX", "YY"]
        want = sum(c * kron_label(lab) for c, lab in zip(f, labels))
        got = heh_spin_hamiltonian(ints, 1.3).to_dense()
        np.testing.assert_allclose(got, want, atol=1e-12)
        assert np.allclose(np.linalg.eigvals(got).imag, 0)


class TestExchangeModel:
    def test_trace_ground_energy(self):
        assert ground_energy(exchange_model(0.001, -0.1, 0.0)) == pytest.approx(-0.1, abs=1e-12)

    def test_no_coupling(self):
        B = 0.3
        np.testing.assert_allclose(np.linalg.eigvalsh(exchange_model(B, 0.0, 0.4).to_dense()), [-2 * B, 0, 0, 2 * B], atol=1e-12)

    @pytest.mark.parametrize("B,J,gamma", [(0.001, -0.1, 0.0), (0.2, 0.7, 0.3), (0.5, -1.1, 1.0), (0.1, 0.4, -0.6)])
    def test_even_block_eigenvalues(self, B, J, gamma):
        """The |00>,|11> block has eigenvalues +-sqrt(4B^2 + J^2 gamma^2)."""
        M = exchange_model(B, J, gamma).to_dense()
        block = M[np.ix_([0, 3], [0, 3])]
        alpha = math.sqrt(4 * B * B + J * J * gamma * gamma)
        np.testing.assert_allclose(np.linalg.eigvalsh(block), [-alpha, alpha], atol=1e-12)

    @pytest.mark.parametrize("gamma", [0.0, 1.0])
    def test_printed_alpha_at_special_anisotropy(self, gamma):
        """With gamma in {0, 1} the square root of 4B^2 + J^2 gamma gives the same block spectrum."""
        B, J = 0.2, 0.7
        block = exchange_model(B, J, gamma).to_dense()[np.ix_([0, 3], [0, 3])]
        alpha = math.sqrt(4 * B * B + J * J * gamma)
        np.testing.assert_allclose(np.linalg.eigvalsh(block), [-alpha, alpha], atol=1e-12)


class TestExchangeCoupling:
    def test_small_R(self):
        assert abs(exchange_J_of_R(1e-6)) < 1e-12

    def test_values(self):
        assert exchange_J_of_R(1.0) == pytest.approx(-0.11111, abs=1e-5)
        assert exchange_J_of_R(2.0) == pytest.approx(-0.08506, abs=1e-5)

    def test_minimum_at_five_quarters(self):
        grid = np.linspace(0.5, 3.0, 2501)
        assert grid[np.argmin([exchange_J_of_R(R) for R in grid])] == pytest.approx(1.25, abs=1e-3)

    def test_bad_R(self):
        with pytest.raises(ValueError):
            exchange_J_of_R(0.0)


class TestCoefficientTable:
    def test_shipped_rows(self, table):
        assert len(table) == 51
        first = table.rows[0]
        assert (first.R, first.coeffs, first.exact, first.simulated) == (
            0.6,
            (1.5943, 0.5132, -1.1008, 0.6598, 0.0809),
            -0.5617,
            -0.5703,
        )

    def test_nuclear_term_consistency(self, table):
        """g0 + g1 + g2 + g3 = 1/R for every row (the integral parts cancel)."""
        for row in table:
            assert sum(row.coeffs[:4]) == pytest.approx(1.0 / row.R, abs=2.5e-4)

    def test_energy_columns_offset_by_one_row(self, table):
        """Dense ground energy of row i agrees with the simulated value printed on row i+1."""
        E = [ground_energy(h2_spin_hamiltonian(table.coefficients(row))) for row in table]
        diffs = [abs(e - nxt.simulated) for e, nxt in zip(E, table.rows[1:])]
        assert max(diffs) < 5e-4

    def test_empty_file(self, tmp_path):
        (tmp_path / "t.csv").write_text("")
        with pytest.raises(TableFormatError, match="no rows"):
            load_coefficient_table(tmp_path / "t.csv")

    def test_header_only(self, tmp_path):
        (tmp_path / "t.csv").write_text("R,g0,g1,g2,g3,g4,exact,simulated\n")
        with pytest.raises(TableFormatError, match="no rows"):
            load_coefficient_table(tmp_path / "t.csv")

    def test_short_row_names_line(self, tmp_path):
        (tmp_path / "t.csv").write_text("R,g0,g1,g2,g3,g4,exact,simulated\n0.6,1,2,3,4,-0.5,-0.6\n")
        with pytest.raises(TableFormatError, match=":2:"):
            load_coefficient_table(tmp_path / "t.csv")

    def test_non_monotone(self, tmp_path):
        body = "R,g0,g1,g2,g3,g4,exact,simulated\n0.7,1,2,3,4,5,-1,-1\n0.6,1,2,3,4,5,-1,-1\n"
        (tmp_path / "t.csv").write_text(body)
        with pytest.raises(TableFormatError, match="increasing"):
            load_coefficient_table(tmp_path / "t.csv")

    def test_round_trip(self, table, tmp_path):
        dump_coefficient_table(table, tmp_path / "t.csv")
        again = load_coefficient_table(tmp_path / "t.csv")
        assert again == table
        assert dumps_coefficient_table(again) == dumps_coefficient_table(table)

    def test_locale_independent(self, table):
        import locale

        try:
            locale.setlocale(locale.LC_NUMERIC, "de_DE.UTF-8")
        except locale.Error:
            pytest.skip("de_DE locale not installed")
        try:
            assert load_coefficient_table() == table
        finally:
            locale.setlocale(locale.LC_NUMERIC, "C")


def test_fermion_term_parse():
    t = FermionTerm.parse(0.5, "0^ 1^ 3 2")
    assert t.ladder == ((0, True), (1, True), (3, False), (2, False))
    assert t.adjoint().ladder == ((2, True), (3, True), (1, False), (0, False))
