"""Pauli strings, Pauli sums and fermion-to-qubit transforms.

Conventions shared by the whole package:

* qubit ``i`` is bit ``i`` of the ``x_mask``/``z_mask`` integers;
* in dense matrices and ket labels qubit 0 is the leftmost tensor factor,
  i.e. the most significant bit of the basis index;
* ``Z|0> = +|0>``, so bit value 1 means ``z = -1`` (an occupied orbital
  under the Jordan-Wigner number operator ``(1 - Z)/2``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

#: Relative threshold below which coefficients are dropped from a PauliSum.
CANON_RTOL = 1e-12
#: Absolute floor so that fully cancelled sums do not keep round-off debris.
CANON_ATOL = 1e-14
#: Largest register ``to_dense`` will materialise unless told otherwise.
DENSE_QUBIT_LIMIT = 12

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_LABELS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class QubitCountError(ValueError):
    """Operands act on registers of different size."""


class DenseLimitError(ValueError):
    """Dense materialisation requested above the configured qubit limit."""


def _popcount(v: int) -> int:
    return v.bit_count()


def _reverse_bits(v: int, n: int) -> int:
    out = 0
    for i in range(n):
        if (v >> i) & 1:
            out |= 1 << (n - 1 - i)
    return out


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of single-qubit Paulis."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits beyond n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse e.g. ``"XIZ"``, ``"-iYY"``; character ``k`` is qubit ``k``."""
        label = label.strip()
        phase = 0
        if label.startswith("-"):
            phase, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        if label.startswith("i"):
            phase, label = phase + 1, label[1:]
        x = z = 0
        for q, ch in enumerate(label):
            try:
                bx, bz = _BITS[ch.upper()]
            except KeyError:
                raise ValueError(f"unknown Pauli symbol {ch!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Mapping[int, str] | Iterable[tuple[int, str]]) -> "PauliString":
        """Build from sparse ``{qubit: 'X'|'Y'|'Z'|'I'}``."""
        items = ops.items() if isinstance(ops, Mapping) else ops
        x = z = 0
        for q, ch in items:
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            bx, bz = _BITS[ch.upper()]
            if (x | z) >> q & 1:
                raise ValueError(f"qubit {q} given twice")
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z, 0)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @property
    def phase_factor(self) -> complex:
        return _PHASES[self.phase]

    @property
    def key(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if m >> q & 1)

    def op(self, q: int) -> str:
        return _LABELS[(self.x_mask >> q & 1, self.z_mask >> q & 1)]

    @property
    def label(self) -> str:
        return "".join(self.op(q) for q in range(self.n_qubits))

    def ops(self) -> dict[int, str]:
        return {q: self.op(q) for q in self.support}

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, 0)

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return NotImplemented

    def __str__(self):
        prefix = ("", "i", "-", "-i")[self.phase]
        return prefix + self.label

    def to_dense(self, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        return PauliSum.from_string(self).to_dense(max_qubits)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a @ b`` with exact phase tracking."""
    if a.n_qubits != b.n_qubits:
        raise QubitCountError(f"cannot multiply {a.n_qubits}- and {b.n_qubits}-qubit strings")
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    # sigma(x, z) = i^(x.z) X^x Z^z; moving Z^z1 past X^x2 costs (-1)^(z1.x2)
    e = (
        a.phase
        + b.phase
        + _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x & z)
    )
    return PauliString(a.n_qubits, x, z, e)


class PauliSum:
    """Sum of phase-free Pauli strings with complex coefficients.

    Instances are treated as immutable; every operation returns a new sum.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self._terms = _canonical(terms or {})

    # construction -------------------------------------------------------
    @classmethod
    def from_string(cls, s: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(s.n_qubits, {s.key: coeff * s.phase_factor})

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, str | PauliString | Mapping[int, str]]]) -> "PauliSum":
        """Build from ``(coeff, spec)`` pairs; ``spec`` is a label, string or sparse dict."""
        acc: dict[tuple[int, int], complex] = {}
        for coeff, spec in terms:
            if isinstance(spec, PauliString):
                s = spec
            elif isinstance(spec, str):
                s = PauliString.from_label(spec)
            else:
                s = PauliString.from_ops(n_qubits, spec)
            if s.n_qubits != n_qubits:
                raise QubitCountError(f"term {s} does not act on {n_qubits} qubits")
            acc[s.key] = acc.get(s.key, 0) + coeff * s.phase_factor
        return cls(n_qubits, acc)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    # container protocol -------------------------------------------------
    @property
    def terms(self) -> dict[PauliString, complex]:
        return {PauliString(self.n_qubits, x, z): c for (x, z), c in self._terms.items()}

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        for (x, z), c in self._terms.items():
            yield PauliString(self.n_qubits, x, z), c

    def coefficient(self, s: PauliString | str) -> complex:
        if isinstance(s, str):
            s = PauliString.from_label(s)
        return self._terms.get(s.key, 0.0) * s.phase_factor.conjugate()

    def labels(self) -> set[str]:
        return {s.label for s, _ in self.items()}

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return self.items()

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self):
        body = " + ".join(f"({c:.6g}){s.label}" for s, c in sorted(self.items(), key=lambda t: t[0].label))
        return f"PauliSum({self.n_qubits}, {body or '0'})"

    # algebra ------------------------------------------------------------
    def _check(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise QubitCountError(f"{self.n_qubits}- vs {other.n_qubits}-qubit operands")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PauliSum.identity(self.n_qubits, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return PauliSum(self.n_qubits, acc)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n_qubits, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliSum(self.n_qubits, {k: c * other for k, c in self._terms.items()})
        if isinstance(other, PauliString):
            other = PauliSum.from_string(other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        acc: dict[tuple[int, int], complex] = {}
        n = self.n_qubits
        for (xa, za), ca in self._terms.items():
            a = PauliString(n, xa, za)
            for (xb, zb), cb in other._terms.items():
                p = multiply(a, PauliString(n, xb, zb))
                acc[p.key] = acc.get(p.key, 0) + ca * cb * p.phase_factor
        return PauliSum(n, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_diagonal(self) -> bool:
        return all(x == 0 for x, _ in self._terms)

    def real(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: complex(c.real) for k, c in self._terms.items()})

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def restrict(self, fixed: Mapping[int, int]) -> "PauliSum":
        """Project qubits in ``fixed`` onto computational basis states and drop them.

        Terms carrying X or Y on a fixed qubit vanish; Z contributes ``+1``
        for bit 0 and ``-1`` for bit 1. Remaining qubits are renumbered in
        increasing order.
        """
        keep = [q for q in range(self.n_qubits) if q not in fixed]
        acc: dict[tuple[int, int], complex] = {}
        for (x, z), c in self._terms.items():
            if any(x >> q & 1 for q in fixed):
                continue
            sign = 1
            for q, bit in fixed.items():
                if z >> q & 1 and bit:
                    sign = -sign
            nx = nz = 0
            for new, q in enumerate(keep):
                nx |= (x >> q & 1) << new
                nz |= (z >> q & 1) << new
            acc[(nx, nz)] = acc.get((nx, nz), 0) + sign * c
        return PauliSum(len(keep), acc)

    def to_dense(self, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix, qubit 0 as the leftmost tensor factor."""
        n = self.n_qubits
        if n > max_qubits:
            raise DenseLimitError(f"{n} qubits exceeds dense limit of {max_qubits}")
        dim = 1 << n
        out = np.zeros((dim, dim), dtype=complex)
        cols = np.arange(dim, dtype=np.int64)
        for (x, z), c in self._terms.items():
            xr, zr = _reverse_bits(x, n), _reverse_bits(z, n)
            rows = cols ^ xr
            parity = _parity(cols & zr)
            vals = c * (1j ** _popcount(x & z)) * (1 - 2 * parity)
            out[rows, cols] += vals
        return out


def add_into(total: PauliSum, coeff: complex, s: PauliString) -> PauliSum:
    """Return ``total + coeff * s`` in canonical form."""
    if total.n_qubits != s.n_qubits:
        raise QubitCountError(f"{total.n_qubits}- vs {s.n_qubits}-qubit operands")
    return total + PauliSum.from_string(s, coeff)


def to_dense(op: PauliSum | PauliString, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    return op.to_dense(max_qubits)


def _parity(v: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(v) & 1).astype(np.int64)


def _canonical(terms: Mapping[tuple[int, int], complex]) -> dict[tuple[int, int], complex]:
    if not terms:
        return {}
    scale = max(abs(c) for c in terms.values())
    tol = max(CANON_RTOL * scale, CANON_ATOL)
    return {k: complex(c) for k, c in terms.items() if abs(c) > tol}


# --------------------------------------------------------------------------
# fermions


@dataclass(frozen=True)
class FermionTerm:
    """``coefficient * op_1 op_2 ...`` with ops as ``(mode, is_creation)`` in written order."""

    coefficient: complex
    ladder: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        object.__setattr__(self, "ladder", tuple((int(m), bool(c)) for m, c in self.ladder))
        if any(m < 0 for m, _ in self.ladder):
            raise ValueError("negative mode index")

    @classmethod
    def parse(cls, coefficient: complex, spec: str) -> "FermionTerm":
        """``FermionTerm.parse(h, "0^ 1^ 3 2")`` -> ``h a0+ a1+ a3 a2``."""
        ladder = []
        for tok in spec.split():
            ladder.append((int(tok.rstrip("^")), tok.endswith("^")))
        return cls(coefficient, tuple(ladder))

    @property
    def max_mode(self) -> int:
        return max((m for m, _ in self.ladder), default=-1)

    def adjoint(self) -> "FermionTerm":
        return FermionTerm(complex(self.coefficient).conjugate(), tuple((m, not c) for m, c in reversed(self.ladder)))

    def __str__(self):
        ops = " ".join(f"{m}^" if c else f"{m}" for m, c in self.ladder)
        return f"{self.coefficient} [{ops}]"


def _ladder_jw(mode: int, creation: bool, n_modes: int) -> PauliSum:
    zs = (1 << mode) - 1
    x = 1 << mode
    sign = -0.5j if creation else 0.5j
    return PauliSum(n_modes, {(x, zs): 0.5, (x, zs | x): sign})


def _check_modes(term: FermionTerm, n_modes: int):
    if term.max_mode >= n_modes:
        raise ValueError(f"mode {term.max_mode} out of range for {n_modes} modes")


def _apply(terms: FermionTerm | Iterable[FermionTerm], n_modes: int, image) -> PauliSum:
    if isinstance(terms, FermionTerm):
        terms = (terms,)
    total = PauliSum.zero(n_modes)
    for term in terms:
        _check_modes(term, n_modes)
        op = PauliSum.identity(n_modes, term.coefficient)
        for mode, creation in term.ladder:
            op = op * image(mode, creation)
        total = total + op
    return total


def jordan_wigner(terms: FermionTerm | Iterable[FermionTerm], n_modes: int) -> PauliSum:
    """Jordan-Wigner image: ``a_j -> Z_0..Z_{j-1} (X_j + iY_j)/2``."""
    return _apply(terms, n_modes, lambda m, c: _ladder_jw(m, c, n_modes))


# Explicit four-mode Bravyi-Kitaev ladder operators.
_BK4_LABELS: dict[tuple[int, bool], list[tuple[complex, dict[int, str]]]] = {
    (0, False): [(0.5, {3: "X", 1: "X", 0: "X"}), (0.5j, {3: "X", 1: "X", 0: "Y"})],
    (0, True): [(0.5, {3: "X", 1: "X", 0: "X"}), (-0.5j, {3: "X", 1: "X", 0: "Y"})],
    (1, False): [(0.5, {3: "X", 1: "X", 0: "Z"}), (0.5j, {3: "X", 1: "Y"})],
    (1, True): [(0.5, {3: "X", 1: "X", 0: "Z"}), (-0.5j, {3: "X", 1: "Y"})],
    (2, False): [(0.5, {3: "X", 2: "X", 1: "Z"}), (0.5j, {3: "X", 2: "Y", 1: "Z"})],
    (2, True): [(0.5, {3: "X", 2: "X", 1: "Z"}), (-0.5j, {3: "X", 2: "Y", 1: "Z"})],
    (3, False): [(0.5, {3: "X", 2: "Z", 1: "Z"}), (0.5j, {3: "Y"})],
    (3, True): [(0.5, {3: "X", 2: "Z", 1: "Z"}), (-0.5j, {3: "Y"})],
}
_BK4 = {k: PauliSum.from_terms(4, v) for k, v in _BK4_LABELS.items()}


def bravyi_kitaev_4(terms: FermionTerm | Iterable[FermionTerm], n_modes: int = 4) -> PauliSum:
    """Bravyi-Kitaev image for exactly four modes (explicit operator table)."""
    if n_modes != 4:
        raise ValueError(f"four-mode Bravyi-Kitaev table needs n_modes == 4, got {n_modes}")
    return _apply(terms, 4, lambda m, c: _BK4[(m, c)])


def ladder_operator(mode: int, creation: bool, n_modes: int, transform: str = "jw") -> PauliSum:
    """Qubit image of a single ``a_mode`` / ``a_mode^+``."""
    term = FermionTerm(1.0, ((mode, creation),))
    if transform == "jw":
        return jordan_wigner(term, n_modes)
    if transform == "bk":
        return bravyi_kitaev_4(term, n_modes)
    raise ValueError(f"unknown transform {transform!r}")
