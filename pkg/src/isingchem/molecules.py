"""Molecular spin Hamiltonians built from precomputed integrals or coefficient tables.

Integrals are spin-orbital quantities in the physicists' ordering used by
``H = sum h_ij a_i^+ a_j + 1/2 sum h_ijkl a_i^+ a_j^+ a_k a_l``, i.e.
``h_ijkl = (il|jk)`` in chemists' notation. Spin orbitals are interleaved:
orbital ``p`` has spatial index ``p // 2`` and spin ``p % 2`` (0 = alpha).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .pauli import FermionTerm, PauliSum, bravyi_kitaev_4

SPECIES_LENGTHS = {"H2": 5, "He2": 14, "HeH+": 9}
TABLE_COLUMNS = ["R", "g0", "g1", "g2", "g3", "g4", "exact", "simulated"]
INTEGRAL_TOL = 1e-10


class MissingIntegralError(KeyError):
    pass


class TableFormatError(ValueError):
    pass


def _two_body_orbit(i, j, k, l):
    # (il|jk): swap i<->l, swap j<->k, swap the two electrons
    seen = set()
    todo = [(i, j, k, l)]
    while todo:
        t = todo.pop()
        if t in seen:
            continue
        seen.add(t)
        a, b, c, d = t
        todo += [(d, b, c, a), (a, c, b, d), (b, a, d, c)]
    return seen


@dataclass(frozen=True)
class IntegralSet:
    """One- and two-electron integrals (Hartree) plus the nuclear charge product."""

    one_body: Mapping[tuple[int, int], float] = field(default_factory=dict)
    two_body: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)
    nuclear_repulsion_charge_product: float = 1.0

    def __post_init__(self):
        one = {tuple(map(int, k)): float(v) for k, v in self.one_body.items()}
        two = {tuple(map(int, k)): float(v) for k, v in self.two_body.items()}
        for (i, j), v in one.items():
            w = one.get((j, i))
            if w is not None and abs(w - v) > INTEGRAL_TOL:
                raise ValueError(f"h_{i}{j}={v} but h_{j}{i}={w}")
        for key, v in two.items():
            for other in _two_body_orbit(*key):
                w = two.get(other)
                if w is not None and abs(w - v) > INTEGRAL_TOL:
                    raise ValueError(f"two-body integral {key}={v} breaks symmetry with {other}={w}")
        object.__setattr__(self, "one_body", one)
        object.__setattr__(self, "two_body", two)

    def h(self, i: int, j: int) -> float:
        for key in ((i, j), (j, i)):
            if key in self.one_body:
                return self.one_body[key]
        raise MissingIntegralError(f"missing one-body integral h_{i}{j}")

    def g(self, i: int, j: int, k: int, l: int) -> float:
        for key in _two_body_orbit(i, j, k, l):
            if key in self.two_body:
                return self.two_body[key]
        raise MissingIntegralError(f"missing two-body integral h_{i}{j}{k}{l}")

    def __getitem__(self, idx) -> float:
        return self.h(*idx) if len(idx) == 2 else self.g(*idx)

    @property
    def n_orbitals(self) -> int:
        idx = [i for k in self.one_body for i in k] + [i for k in self.two_body for i in k]
        return max(idx, default=-1) + 1

    @classmethod
    def from_spatial(cls, h_spatial, eri_chem, charge_product: float = 1.0) -> "IntegralSet":
        """Expand spatial integrals ``h[p,q]`` and ``(pq|rs)`` to interleaved spin orbitals."""
        h_spatial = np.asarray(h_spatial, dtype=float)
        eri_chem = np.asarray(eri_chem, dtype=float)
        m = h_spatial.shape[0]
        n = 2 * m
        one = {}
        two = {}
        for i in range(n):
            for j in range(n):
                if i % 2 == j % 2:
                    one[(i, j)] = h_spatial[i // 2, j // 2]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        if i % 2 == l % 2 and j % 2 == k % 2:
                            two[(i, j, k, l)] = eri_chem[i // 2, l // 2, j // 2, k // 2]
                        else:
                            two[(i, j, k, l)] = 0.0
        return cls(one, two, charge_product)


def load_integrals(path) -> IntegralSet:
    """Read ``one i j v`` / ``two i j k l v`` / ``znuc v`` records."""
    path = Path(path)
    one, two = {}, {}
    znuc = 1.0
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "one" and len(parts) == 4:
                one[(int(parts[1]), int(parts[2]))] = float(parts[3])
            elif parts[0] == "two" and len(parts) == 6:
                two[tuple(int(p) for p in parts[1:5])] = float(parts[5])
            elif parts[0] == "znuc" and len(parts) == 2:
                znuc = float(parts[1])
            else:
                raise ValueError
        except ValueError:
            raise TableFormatError(f"{path}:{lineno}: malformed integral record {raw!r}") from None
    return IntegralSet(one, two, znuc)


def dump_integrals(integrals: IntegralSet, path) -> None:
    lines = [f"znuc {integrals.nuclear_repulsion_charge_product!r}"]
    lines += [f"one {i} {j} {v!r}" for (i, j), v in sorted(integrals.one_body.items())]
    lines += [f"two {i} {j} {k} {l} {v!r}" for (i, j, k, l), v in sorted(integrals.two_body.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class MoleculeCoefficients:
    species: str
    R: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.species not in SPECIES_LENGTHS:
            raise ValueError(f"unknown species {self.species!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != SPECIES_LENGTHS[self.species]:
            raise ValueError(f"{self.species} needs {SPECIES_LENGTHS[self.species]} coefficients, got {len(self.coeffs)}")
        if not self.R > 0:
            raise ValueError(f"bond length must be positive, got {self.R}")


def _check_R(R: float):
    if not R > 0:
        raise ValueError(f"bond length must be positive, got {R}")


# --------------------------------------------------------------------------
# H2


def h2_fermion_groups(integrals: IntegralSet) -> list[tuple[float, list[FermionTerm]]]:
    """The twelve coefficient groups of the four-spin-orbital H2 Hamiltonian.

    Each entry is ``(coefficient, [ladder products sharing it])``.
    """
    g = integrals.g
    h = integrals.h
    P = FermionTerm.parse
    spec = [
        (h(0, 0), ["0^ 0"]),
        (h(1, 1), ["1^ 1"]),
        (h(2, 2), ["2^ 2"]),
        (h(3, 3), ["3^ 3"]),
        (g(0, 1, 1, 0), ["0^ 1^ 1 0"]),
        (g(2, 3, 3, 2), ["2^ 3^ 3 2"]),
        (g(0, 3, 3, 0), ["0^ 3^ 3 0"]),
        (g(1, 2, 2, 1), ["1^ 2^ 2 1"]),
        (g(0, 2, 2, 0) - g(0, 2, 0, 2), ["0^ 2^ 2 0"]),
        (g(1, 3, 3, 1) - g(1, 3, 1, 3), ["1^ 3^ 3 1"]),
        (g(0, 1, 3, 2), ["0^ 1^ 3 2", "2^ 3^ 1 0"]),
        (g(0, 3, 1, 2), ["0^ 3^ 1 2", "2^ 1^ 3 0"]),
    ]
    return [(c, [P(c, s) for s in ops]) for c, ops in spec]


def h2_second_quantized(integrals: IntegralSet) -> list[FermionTerm]:
    """Flattened ladder products of the H2 Hamiltonian; zero-coefficient groups are dropped."""
    out = []
    for c, terms in h2_fermion_groups(integrals):
        if c != 0.0:
            out.extend(terms)
    return out


def h2_qubit_hamiltonian(integrals: IntegralSet, R: float) -> PauliSum:
    """Four-qubit Bravyi-Kitaev Hamiltonian including nuclear repulsion."""
    _check_R(R)
    op = bravyi_kitaev_4(h2_second_quantized(integrals))
    return op + integrals.nuclear_repulsion_charge_product / R


def h2_reduced_coefficients(integrals: IntegralSet, R: float) -> MoleculeCoefficients:
    """Two-qubit H2 coefficients ``g0..g4`` (qubits 1 and 3 frozen in |0>)."""
    _check_R(R)
    h00, h22 = integrals.h(0, 0), integrals.h(2, 2)
    h0000, h2222 = integrals.g(0, 0, 0, 0), integrals.g(2, 2, 2, 2)
    h0022, h0220 = integrals.g(0, 0, 2, 2), integrals.g(0, 2, 2, 0)
    nuc = integrals.nuclear_repulsion_charge_product / R
    g0 = 1.0 * h00 + 0.5 * h0000 - 0.5 * h0022 + 1.0 * h0220 + 1.0 * h22 + 0.5 * h2222 + nuc
    g1 = -1.0 * h00 - 0.5 * h0000 + 0.5 * h0022 - 1.0 * h0220
    g2 = 0.5 * h0022 - 1.0 * h0220 - 1.0 * h22 - 0.5 * h2222
    # the printed closed form repeats g1 here; projecting the qubit Hamiltonian gives this
    g3 = 1.0 * h0220 - 0.5 * h0022
    g4 = 0.5 * h0022
    return MoleculeCoefficients("H2", R, (g0, g1, g2, g3, g4))


def h2_spin_hamiltonian(c: MoleculeCoefficients) -> PauliSum:
    if c.species != "H2":
        raise ValueError(f"expected H2 coefficients, got {c.species}")
    g0, g1, g2, g3, g4 = c.coeffs
    return PauliSum.from_terms(2, [(g0, "II"), (g1, "ZI"), (g2, "IZ"), (g3, "ZZ"), (g4, "XX"), (g4, "YY")])


def project_frozen_qubits(op: PauliSum, frozen: Mapping[int, int]) -> PauliSum:
    return op.restrict(frozen)


# --------------------------------------------------------------------------
# He2 and HeH+


def he2_coefficients(integrals: IntegralSet, R: float) -> MoleculeCoefficients:
    _check_R(R)
    h00, h22 = integrals.h(0, 0), integrals.h(2, 2)
    h0000, h2222 = integrals.g(0, 0, 0, 0), integrals.g(2, 2, 2, 2)
    h0022, h0220 = integrals.g(0, 0, 2, 2), integrals.g(0, 2, 2, 0)
    z = integrals.nuclear_repulsion_charge_product
    f = [
        1.0 * h00 + 0.25 * h0000 - 0.5 * h0022 + 1.0 * h0220 + 1.0 * h22 + 0.25 * h2222 + z / R,
        -0.5 * h00 - 0.25 * h0000 + 0.25 * h0022 - 0.5 * h0220,
        -0.25 * h0000 + 0.25 * h0022 - 0.5 * h0220 - 0.5 * h00,
        0.25 * h0022 - 0.5 * h0220 - 0.5 * h22 - 0.25 * h2222,
        0.25 * h0022 - 0.5 * h0220 - 0.25 * h2222 - 0.5 * h22,
        0.25 * h0000,
        -0.25 * h0022 + 0.25 * h0220,
        0.25 * h0220,
        0.25 * h0220,
        0.25 * h2222,
        -0.25 * h0022,
        0.25 * h0022,
        0.25 * h0022,
        -0.25 * h0022,
    ]
    return MoleculeCoefficients("He2", R, f)


_HE2_LAYOUT = [
    (0, {}), (1, {0: "Z"}), (2, {1: "Z"}), (3, {2: "Z"}), (4, {3: "Z"}),
    (5, {0: "Z", 1: "Z"}), (6, {0: "Z", 2: "Z"}), (7, {0: "Z", 3: "Z"}),
    (8, {1: "Z", 2: "Z"}), (8, {1: "Z", 3: "Z"}), (9, {2: "Z", 3: "Z"}),
    (10, {0: "X", 1: "X", 2: "Y", 3: "Y"}), (11, {0: "X", 1: "Y", 2: "Y", 3: "X"}),
    (12, {0: "Y", 1: "X", 2: "X", 3: "Y"}), (13, {0: "Y", 1: "Y", 2: "X", 3: "X"}),
]


def he2_from_coefficients(c: MoleculeCoefficients) -> PauliSum:
    if c.species != "He2":
        raise ValueError(f"expected He2 coefficients, got {c.species}")
    return PauliSum.from_terms(4, [(c.coeffs[k], ops) for k, ops in _HE2_LAYOUT])


def he2_spin_hamiltonian(integrals: IntegralSet, R: float) -> PauliSum:
    """Four-qubit He2 Hamiltonian (Jordan-Wigner, minimal basis), 15 Pauli terms."""
    return he2_from_coefficients(he2_coefficients(integrals, R))


def heh_coefficients(integrals: IntegralSet, R: float) -> MoleculeCoefficients:
    _check_R(R)
    h00, h22 = integrals.h(0, 0), integrals.h(2, 2)
    h0000, h2222 = integrals.g(0, 0, 0, 0), integrals.g(2, 2, 2, 2)
    h0022, h0220 = integrals.g(0, 0, 2, 2), integrals.g(0, 2, 2, 0)
    h0002, h0020, h0222 = integrals.g(0, 0, 0, 2), integrals.g(0, 0, 2, 0), integrals.g(0, 2, 2, 2)
    z = integrals.nuclear_repulsion_charge_product
    f = [
        1.0 * h00 + 0.25 * h0000 + 0.5 * h0220 + 1.0 * h22 + 0.25 * h2222 + z / R,
        -0.25 * h0000 + 0.5 * h0220 - 0.25 * h2222,
        0.25 * h0000 + 0.5 * h00 - 0.25 * h2222 - 0.5 * h22,
        -0.25 * h0002 - 0.25 * h0020 + 0.5 * h0222,
        -0.5 * h00 - 0.25 * h0000 + 0.5 * h22 + 0.25 * h2222,
        -0.25 * h0002 - 0.25 * h0020 - 0.5 * h0222,
        -1.0 * h0022,
        0.25 * h0002 + 0.25 * h0020 - 0.5 * h0222,
        0.25 * h0002 + 0.25 * h0020 + 0.5 * h0222,
    ]
    return MoleculeCoefficients("HeH+", R, f)


_HEH_LAYOUT = [
    (0, {}), (1, {0: "Z"}), (2, {1: "Z"}), (3, {0: "X"}), (4, {0: "Z", 1: "Z"}),
    (5, {0: "X", 1: "Z"}), (6, {0: "Z", 1: "X"}), (7, {0: "X", 1: "X"}), (8, {0: "Y", 1: "Y"}),
]


def heh_from_coefficients(c: MoleculeCoefficients) -> PauliSum:
    if c.species != "HeH+":
        raise ValueError(f"expected HeH+ coefficients, got {c.species}")
    return PauliSum.from_terms(2, [(c.coeffs[k], ops) for k, ops in _HEH_LAYOUT])


def heh_spin_hamiltonian(integrals: IntegralSet, R: float) -> PauliSum:
    """Two-qubit HeH+ Hamiltonian, 9 Pauli terms."""
    return heh_from_coefficients(heh_coefficients(integrals, R))


# --------------------------------------------------------------------------
# two-spin exchange model


def exchange_model(B: float, J: float, gamma: float) -> PauliSum:
    """``-(J/2)(1+g) XX - (J/2)(1-g) YY - B Z0 - B Z1``."""
    return PauliSum.from_terms(
        2,
        [(-J / 2 * (1 + gamma), "XX"), (-J / 2 * (1 - gamma), "YY"), (-B, "ZI"), (-B, "IZ")],
    )


def exchange_J_of_R(R: float) -> float:
    """Distance-dependent exchange coupling ``-0.821 R^2.5 exp(-2R)``."""
    _check_R(R)
    return -0.821 * R**2.5 * math.exp(-2.0 * R)


# --------------------------------------------------------------------------
# coefficient tables


@dataclass(frozen=True)
class TableRow:
    R: float
    coeffs: tuple[float, ...]
    exact: float
    simulated: float


@dataclass(frozen=True)
class CoefficientTable:
    species: str
    rows: tuple[TableRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        Rs = [row.R for row in self.rows]
        if any(b <= a for a, b in zip(Rs, Rs[1:])):
            raise TableFormatError("bond lengths must be strictly increasing")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def row(self, R: float, tol: float = 1e-9) -> TableRow:
        for row in self.rows:
            if abs(row.R - R) <= tol:
                return row
        raise KeyError(f"no row with R={R}")

    def coefficients(self, row: TableRow) -> MoleculeCoefficients:
        return MoleculeCoefficients(self.species, row.R, row.coeffs)


def default_table_path() -> Path:
    return Path(str(resources.files("isingchem") / "data" / "h2_sto6g_table.csv"))


def load_coefficient_table(path=None, species: str = "H2") -> CoefficientTable:
    """Parse a ``R,g0,...,g4,exact,simulated`` CSV (``#`` lines are comments)."""
    path = Path(path) if path is not None else default_table_path()
    text = path.read_text(encoding="utf-8")
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise TableFormatError(f"{path}: no rows")
    header_no, header = lines[0]
    cols = [c.strip() for c in header.split(",")]
    if cols != TABLE_COLUMNS:
        raise TableFormatError(f"{path}:{header_no}: expected header {','.join(TABLE_COLUMNS)}, got {header!r}")
    rows = []
    prev = -math.inf
    for lineno, line in lines[1:]:
        fields = next(csv.reader([line]))
        if len(fields) != len(TABLE_COLUMNS):
            raise TableFormatError(f"{path}:{lineno}: expected {len(TABLE_COLUMNS)} fields, got {len(fields)}")
        try:
            vals = [float(f.strip()) for f in fields]
        except ValueError:
            raise TableFormatError(f"{path}:{lineno}: non-numeric field in {line!r}") from None
        R = vals[0]
        if R <= prev:
            raise TableFormatError(f"{path}:{lineno}: R={R} not strictly increasing")
        prev = R
        rows.append(TableRow(R, tuple(vals[1:6]), vals[6], vals[7]))
    if not rows:
        raise TableFormatError(f"{path}: no rows")
    return CoefficientTable(species, tuple(rows))


def dumps_coefficient_table(table: CoefficientTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in table.rows:
        w.writerow([repr(row.R), *map(repr, row.coeffs), repr(row.exact), repr(row.simulated)])
    return buf.getvalue()


def dump_coefficient_table(table: CoefficientTable, path) -> None:
    Path(path).write_text(dumps_coefficient_table(table), encoding="utf-8")


def spin_hamiltonian(c: MoleculeCoefficients) -> PauliSum:
    """Dispatch on species."""
    return {"H2": h2_spin_hamiltonian, "He2": he2_from_coefficients, "HeH+": heh_from_coefficients}[c.species](c)


def ground_energy(op: PauliSum) -> float:
    """Smallest eigenvalue of a Hermitian PauliSum via dense diagonalisation."""
    return float(np.linalg.eigvalsh(op.to_dense())[0])


def molecular_fermion_terms(integrals: IntegralSet, n_orbitals: int | None = None) -> Iterable[FermionTerm]:
    """Generic ``sum h_ij a_i^+ a_j + 1/2 sum h_ijkl a_i^+ a_j^+ a_k a_l`` over stored integrals."""
    n = integrals.n_orbitals if n_orbitals is None else n_orbitals
    for i in range(n):
        for j in range(n):
            try:
                v = integrals.h(i, j)
            except MissingIntegralError:
                continue
            if v:
                yield FermionTerm(v, ((i, True), (j, False)))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    try:
                        v = integrals.g(i, j, k, l)
                    except MissingIntegralError:
                        continue
                    if v:
                        yield FermionTerm(0.5 * v, ((i, True), (j, True), (k, False), (l, False)))
