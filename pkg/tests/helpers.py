"""Shared builders for the test-suite (random integrals, literal oracles)."""

from __future__ import annotations

import itertools

import numpy as np

from isingchem.molecules import IntegralSet
from isingchem.replication import ZPolynomial

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Dense matrix of a Pauli label, qubit 0 = leftmost factor."""
    out = np.eye(1, dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


def h2_like_integrals(rng: np.random.Generator, charge: float = 1.0) -> IntegralSet:
    """Random integrals with the symmetry of a homonuclear two-orbital molecule."""
    h = np.diag(rng.normal(size=2))
    Jg, Ju, Jgu, K = rng.normal(size=4)
    eri = np.zeros((2, 2, 2, 2))
    eri[0, 0, 0, 0], eri[1, 1, 1, 1] = Jg, Ju
    eri[0, 0, 1, 1] = eri[1, 1, 0, 0] = Jgu
    for idx in [(0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0)]:
        eri[idx] = K
    return IntegralSet.from_spatial(h, eri, charge)


def generic_integrals(rng: np.random.Generator, charge: float = 1.0) -> IntegralSet:
    """Random two-orbital integrals with only the generic real 8-fold symmetry."""
    h = rng.normal(size=(2, 2))
    h = (h + h.T) / 2
    eri = rng.normal(size=(2, 2, 2, 2))
    perms = [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]
    eri = sum(eri.transpose(p) for p in perms) / len(perms)
    return IntegralSet.from_spatial(h, eri, charge)


def zero_integrals(charge: float = 1.0) -> IntegralSet:
    return IntegralSet.from_spatial(np.zeros((2, 2)), np.zeros((2, 2, 2, 2)), charge)


def states(n: int):
    """All bit tuples of length ``n`` in lexicographic order."""
    return itertools.product((0, 1), repeat=n)


def spin(bit: int) -> int:
    return 1 - 2 * bit


def literal_count_polynomial(n: int, signs) -> ZPolynomial:
    """Count operator as the sum over patterns of squared signed projector sums."""
    r = len(signs)
    total = ZPolynomial()
    for pattern in states(n):
        tally = ZPolynomial()
        for j, s in enumerate(signs):
            proj = ZPolynomial.constant(float(s))
            for q, bit in enumerate(pattern):
                v = j * n + q
                proj = proj * ZPolynomial({(): 0.5, (v,): 0.5 * spin(bit)})
            tally = tally + proj
        total = total + tally * tally
    assert total.num_vars <= n * r
    return total
