"""Replication mapping of an n-qubit Hamiltonian onto a diagonal r*n-qubit one.

Copy ``j`` (0-based) of the register occupies variables ``j*n .. j*n+n-1``.
A basis state of the enlarged register is a bit string whose ``n``-bit
blocks are the per-copy patterns; copy ``j`` contributes its sign ``S'(j)``
to the tally of its pattern.  Variable ``v`` carries spin ``z_v = +1`` for
bit 0 and ``-1`` for bit 1.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import PauliString, PauliSum

IMAG_TOL = 1e-10
ZERO_TOL = 1e-13
COUNT_POLY_MAX_N = 6
WHT_MAX_VARS = 22


class ImaginaryResidualError(ValueError):
    """Diagonal image kept an imaginary part: the input was not Hermitian."""


# --------------------------------------------------------------------------
# bit-string helpers


def bits_to_int(bits: str | Sequence[int]) -> int:
    if isinstance(bits, str):
        return int(bits, 2) if bits else 0
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def spins_of(states: np.ndarray, var: int, n_vars: int) -> np.ndarray:
    """``z`` of variable ``var`` for an array of integer states (var 0 = MSB)."""
    return 1 - 2 * ((states >> (n_vars - 1 - var)) & 1)


# --------------------------------------------------------------------------
# diagonal polynomials


class ZPolynomial:
    """Polynomial in commuting spins ``z_v = +-1``; keys are sorted index tuples.

    Coefficients may be complex while a Hamiltonian is being assembled;
    :meth:`to_real` asserts that the imaginary parts have cancelled.
    Replicated Hamiltonians carry exact ``Fraction`` coefficients so that
    cancellations (for example on zero-count states) are exact.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Iterable[int], complex] | None = None):
        acc: dict[tuple[int, ...], complex] = {}
        for key, c in (terms or {}).items():
            k = _reduce_key(key)
            acc[k] = acc.get(k, 0) + c
        self._terms = _prune(acc)

    @classmethod
    def constant(cls, c: float) -> "ZPolynomial":
        return cls({(): c})

    @classmethod
    def spin(cls, v: int, c: float = 1.0) -> "ZPolynomial":
        return cls({(v,): c})

    @classmethod
    def _raw(cls, terms: dict) -> "ZPolynomial":
        p = cls.__new__(cls)
        p._terms = _prune(terms)
        return p

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, ZPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        return f"ZPolynomial({len(self)} terms, degree {self.degree})"

    def coefficient(self, key: Iterable[int]) -> complex:
        return self._terms.get(_reduce_key(key), 0.0)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    @property
    def variables(self) -> set[int]:
        return {v for k in self._terms for v in k}

    @property
    def num_vars(self) -> int:
        return max(self.variables, default=-1) + 1

    @property
    def is_real(self) -> bool:
        return all(isinstance(c, float) or c.imag == 0 for c in self._terms.values())

    def max_imag(self) -> float:
        return max((abs(complex(c).imag) for c in self._terms.values()), default=0.0)

    def to_real(self, tol: float = IMAG_TOL) -> "ZPolynomial":
        worst = self.max_imag()
        if worst > tol:
            raise ImaginaryResidualError(f"imaginary coefficient {worst:.3e} above tolerance {tol:g}")
        return ZPolynomial._raw({k: _real_part(c) for k, c in self._terms.items()})

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = ZPolynomial.constant(other)
        if not isinstance(other, ZPolynomial):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return ZPolynomial._raw(acc)

    __radd__ = __add__

    def __neg__(self):
        return ZPolynomial._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ZPolynomial._raw({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, ZPolynomial):
            return NotImplemented
        acc: dict[tuple[int, ...], complex] = {}
        for ka, ca in self._terms.items():
            sa = set(ka)
            for kb, cb in other._terms.items():
                k = tuple(sorted(sa.symmetric_difference(kb)))
                acc[k] = acc.get(k, 0) + ca * cb
        return ZPolynomial._raw(acc)

    def __rmul__(self, other):
        return self.__mul__(other)

    # evaluation ---------------------------------------------------------
    def evaluate(self, bits: str | Sequence[int]) -> float | complex:
        """Value on a single basis state; ``bits[v]`` is variable ``v``."""
        bits = [int(b) for b in bits]
        parts = []
        for key, c in self._terms.items():
            sign = 1
            for v in key:
                if v >= len(bits):
                    raise IndexError(f"state of length {len(bits)} does not cover variable {v}")
                if bits[v]:
                    sign = -sign
            parts.append(sign * c)
        if all(isinstance(p, (int, Fraction)) for p in parts):
            return float(sum(parts, Fraction(0)))
        if self.is_real:
            return math.fsum(p.real for p in parts)
        return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))

    def values(self, n_vars: int | None = None) -> np.ndarray:
        """Values on all ``2**n_vars`` states, state index with variable 0 as MSB."""
        n = self.num_vars if n_vars is None else n_vars
        if self.num_vars > n:
            raise IndexError(f"polynomial uses {self.num_vars} variables, only {n} given")
        dtype = float if self.is_real else complex
        if n <= WHT_MAX_VARS:
            coef = np.zeros(1 << n, dtype=dtype)
            for key, c in self._terms.items():
                coef[_mask(key, n)] += _scalar(c, dtype)
            return _walsh_hadamard(coef)
        out = np.zeros(1 << n, dtype=dtype)
        chunk = 1 << 20
        masks = [(_mask(k, n), _scalar(c, dtype)) for k, c in self._terms.items()]
        for start in range(0, 1 << n, chunk):
            s = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
            acc = np.zeros(len(s), dtype=dtype)
            for m, c in masks:
                acc += c * (1 - 2 * (np.bitwise_count(s & m) & 1).astype(np.int64))
            out[start : start + len(s)] = acc
        return out

    def to_pauli_sum(self, n_qubits: int | None = None) -> PauliSum:
        n = self.num_vars if n_qubits is None else n_qubits
        acc = {}
        for key, c in self._terms.items():
            z = 0
            for v in key:
                z |= 1 << v
            acc[(0, z)] = complex(c)
        return PauliSum(n, acc)

    # serialisation -------------------------------------------------------
    def dumps(self) -> str:
        lines = []
        for key in sorted(self._terms, key=lambda k: (len(k), k)):
            c = self._terms[key]
            c = complex(c).real if complex(c).imag == 0 else c
            lines.append(" ".join([repr(float(c)) if not isinstance(c, complex) else repr(c)] + [str(v) for v in key]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str) -> "ZPolynomial":
        terms: dict[tuple[int, ...], float] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                c = float(parts[0])
                key = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed term {raw!r}") from None
            k = _reduce_key(key)
            terms[k] = terms.get(k, 0.0) + c
        return cls(terms)


def _reduce_key(key: Iterable[int]) -> tuple[int, ...]:
    # z_v^2 = 1: keep variables occurring an odd number of times
    odd: set[int] = set()
    for v in key:
        odd ^= {int(v)}
    return tuple(sorted(odd))


def _prune(terms: dict) -> dict:
    # exact coefficients keep everything that is not exactly zero
    return {k: c for k, c in terms.items() if (c != 0 if isinstance(c, Fraction) else abs(c) > ZERO_TOL)}


def _real_part(c):
    return c if isinstance(c, (int, Fraction)) else float(complex(c).real)


def _scalar(c, dtype):
    return float(c) if dtype is float else complex(c)


def _mask(key: tuple[int, ...], n: int) -> int:
    m = 0
    for v in key:
        m |= 1 << (n - 1 - v)
    return m


def _walsh_hadamard(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    n = a.size
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        x, y = a[:, 0, :].copy(), a[:, 1, :]
        a[:, 0, :] += y
        a[:, 1, :] = x - y
        a = a.reshape(n)
        h *= 2
    return a


# --------------------------------------------------------------------------
# layout and states


@dataclass(frozen=True)
class ReplicationLayout:
    """``r`` signed copies of an ``n``-qubit register."""

    n: int
    r: int
    signs: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        signs = (1,) * self.r if self.signs is None else tuple(int(s) for s in self.signs)
        if len(signs) != self.r or any(s not in (1, -1) for s in signs):
            raise ValueError(f"signs must be r={self.r} entries of +-1, got {signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def first_negative(cls, n: int, r: int, i: int) -> "ReplicationLayout":
        """Sign configuration with the first ``i`` copies negative."""
        return cls(n, r, tuple(-1 if j < i else 1 for j in range(r)))

    @property
    def n_vars(self) -> int:
        return self.n * self.r

    def var(self, qubit: int, copy: int) -> int:
        if not (0 <= qubit < self.n and 0 <= copy < self.r):
            raise IndexError(f"qubit {qubit} / copy {copy} outside layout n={self.n}, r={self.r}")
        return copy * self.n + qubit

    def sign_label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class ReplicatedState:
    bits: str
    layout: ReplicationLayout

    def __post_init__(self):
        bits = self.bits if isinstance(self.bits, str) else "".join(str(int(b)) for b in self.bits)
        if len(bits) != self.layout.n_vars or set(bits) - {"0", "1"}:
            raise ValueError(f"state {bits!r} is not a {self.layout.n_vars}-bit string")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_int(cls, value: int, layout: ReplicationLayout) -> "ReplicatedState":
        return cls(int_to_bits(value, layout.n_vars), layout)

    @property
    def patterns(self) -> list[str]:
        n = self.layout.n
        return [self.bits[j * n : (j + 1) * n] for j in range(self.layout.r)]

    def signed_tallies(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for pat, s in zip(self.patterns, self.layout.signs):
            out[pat] = out.get(pat, 0) + s
        return out

    @property
    def count(self) -> int:
        return count_value(self)

    def amplitudes(self) -> np.ndarray | None:
        """Encoded amplitude vector indexed by pattern value, or ``None`` if it has zero norm."""
        vec = np.zeros(1 << self.layout.n)
        for pat, b in self.signed_tallies().items():
            vec[int(pat, 2)] = b
        norm2 = float(vec @ vec)
        if norm2 == 0:
            return None
        return vec / np.sqrt(norm2)


def count_value(state: ReplicatedState) -> int:
    """Sum of squared signed pattern tallies (grouping copies, no polynomial)."""
    return int(sum(b * b for b in state.signed_tallies().values()))


def decode_state(state: ReplicatedState) -> dict[str, tuple[int, int]]:
    """Map pattern -> ``(b, sign)`` for patterns with non-zero signed tally."""
    return {p: (abs(b), 1 if b > 0 else -1) for p, b in state.signed_tallies().items() if b != 0}


def count_values_all(layout: ReplicationLayout) -> np.ndarray:
    """``count_value`` for every state of the layout, vectorised."""
    n, r = layout.n, layout.r
    s = np.arange(1 << layout.n_vars, dtype=np.int64)
    mask = (1 << n) - 1
    pats = [(s >> (n * (r - 1 - j))) & mask for j in range(r)]
    out = np.zeros(s.size, dtype=np.int64)
    for j in range(r):
        for k in range(r):
            out += layout.signs[j] * layout.signs[k] * (pats[j] == pats[k])
    return out


# --------------------------------------------------------------------------
# mapping


_HALF = Fraction(1, 2)


def _factor(op: str, a: int, b: int, same: bool) -> ZPolynomial | None:
    # real part of the per-qubit factor; a Y factor also contributes one power of i
    if same:
        if op in "XY":
            return None
        return ZPolynomial({(a,): Fraction(1)}) if op == "Z" else ZPolynomial({(): Fraction(1)})
    if op == "X":
        return ZPolynomial({(): _HALF, (a, b): -_HALF})
    if op == "Y":
        return ZPolynomial({(b,): _HALF, (a,): -_HALF})
    if op == "Z":
        return ZPolynomial({(a,): _HALF, (b,): _HALF})
    return ZPolynomial({(): _HALF, (a, b): _HALF})


def _image(s: PauliString, j: int, k: int, layout: ReplicationLayout) -> tuple[complex, ZPolynomial]:
    """``(unit, poly)`` with ``unit in {1, i, -1, -i}`` and ``poly`` exact and real."""
    if s.n_qubits != layout.n:
        raise ValueError(f"{s.n_qubits}-qubit string on an n={layout.n} layout")
    if not (0 <= j < layout.r and 0 <= k < layout.r):
        raise IndexError(f"copy pair ({j}, {k}) outside r={layout.r}")
    poly = ZPolynomial({(): Fraction(1)})
    n_y = 0
    for q in range(layout.n):
        op = s.op(q)
        f = _factor(op, layout.var(q, j), layout.var(q, k), j == k)
        if f is None:
            return 0j, ZPolynomial()
        n_y += op == "Y"
        poly = poly * f
    return s.phase_factor * 1j**n_y, poly


def map_pauli_string(s: PauliString, j: int, k: int, layout: ReplicationLayout, coeff: complex = 1.0) -> ZPolynomial:
    """Diagonal image of ``coeff * s`` between copies ``j`` (bra) and ``k`` (ket).

    Its value on a replicated state equals ``coeff * <pattern_j| s |pattern_k>``.
    Copy signs are not applied here.
    """
    unit, poly = _image(s, j, k, layout)
    return poly * (complex(coeff) * unit)


def map_pauli_sum(H: PauliSum, j: int, k: int, layout: ReplicationLayout) -> ZPolynomial:
    """Image ``H'_(j,k)`` of a whole Pauli sum (complex coefficients allowed)."""
    total = ZPolynomial()
    for s, c in H.items():
        total = total + map_pauli_string(s, j, k, layout, c)
    return total


def build_replicated_hamiltonian(H: PauliSum, layout: ReplicationLayout, tol: float = IMAG_TOL) -> ZPolynomial:
    """``sum_{j,k} S'(j) S'(k) H'_(j,k)`` as a real diagonal polynomial.

    Accumulation is exact (rational), so the result does not depend on
    summation order and imaginary parts of Hermitian input cancel exactly.
    """
    if H.n_qubits != layout.n:
        raise ValueError(f"{H.n_qubits}-qubit Hamiltonian on an n={layout.n} layout")
    re: dict[tuple[int, ...], Fraction] = {}
    im: dict[tuple[int, ...], Fraction] = {}
    for j in range(layout.r):
        for k in range(layout.r):
            sign = layout.signs[j] * layout.signs[k]
            for s, c in H.items():
                unit, poly = _image(s, j, k, layout)
                w = complex(c) * unit * sign
                wr, wi = Fraction(w.real), Fraction(w.imag)
                for key, v in poly.items():
                    if wr:
                        re[key] = re.get(key, 0) + wr * v
                    if wi:
                        im[key] = im.get(key, 0) + wi * v
    worst = max((abs(float(v)) for v in im.values()), default=0.0)
    if worst > tol:
        raise ImaginaryResidualError(f"imaginary coefficient {worst:.3e} above tolerance {tol:g}")
    return ZPolynomial._raw(re)


def count_polynomial(layout: ReplicationLayout, max_n: int = COUNT_POLY_MAX_N) -> ZPolynomial:
    """Count operator as an explicit spin polynomial.

    Summing the squared signed pattern projectors over all patterns factorises
    digit by digit into ``sum_{j,k} S'(j)S'(k) prod_i (1 + z_{i_j} z_{i_k})/2``.
    """
    if layout.n > max_n:
        raise ValueError(f"count polynomial for n={layout.n} exceeds cap n<={max_n}; use count_value")
    ident = PauliSum.identity(layout.n)
    return build_replicated_hamiltonian(ident, layout)


def evaluate(p: ZPolynomial, bits: str | Sequence[int] | ReplicatedState) -> float:
    if isinstance(bits, ReplicatedState):
        bits = bits.bits
    return p.evaluate(bits)


def all_layouts(n: int, r: int) -> list[ReplicationLayout]:
    """Sign configurations visited by the solver: first ``i`` copies negative, ``i = 0..r//2``."""
    return [ReplicationLayout.first_negative(n, r, i) for i in range(r // 2 + 1)]


def every_sign_config(n: int, r: int) -> Iterable[ReplicationLayout]:
    for signs in itertools.product((1, -1), repeat=r):
        yield ReplicationLayout(n, r, signs)
