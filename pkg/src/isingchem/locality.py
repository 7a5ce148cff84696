"""Exact quadratisation of spin/boolean polynomials into 2-local Ising models.

Boolean variables relate to spins by ``z = 1 - 2x`` (bit 0 <-> z = +1).
A pair ``x_a x_b`` inside a higher-order term is replaced by a fresh
ancilla ``y`` and the penalty ``M (x_a x_b - 2 x_a y - 2 x_b y + 3 y)`` is
added; the penalty is zero iff ``y == x_a x_b`` and at least ``M`` otherwise.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .replication import ZPolynomial, int_to_bits

DEFAULT_TERM_BUDGET = 1_000_000
VERIFY_MAX_VARS = 20


class TermBudgetExceeded(RuntimeError):
    def __init__(self, message: str, ancillas: int = 0, terms: int = 0):
        super().__init__(message)
        self.ancillas = ancillas
        self.terms = terms


class BoolPolynomial:
    """Multilinear polynomial over ``x_v in {0, 1}``; keys are sorted index tuples."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Iterable[int], float] | None = None):
        acc: dict[tuple[int, ...], float] = {}
        for key, c in (terms or {}).items():
            k = tuple(sorted(set(int(v) for v in key)))
            acc[k] = acc.get(k, 0.0) + float(c)
        self._terms = {k: c for k, c in acc.items() if c != 0.0}

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, BoolPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        body = " + ".join(f"{c:g}*x{list(k)}" for k, c in sorted(self._terms.items()))
        return f"BoolPolynomial({body or '0'})"

    def __add__(self, other: "BoolPolynomial") -> "BoolPolynomial":
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return BoolPolynomial(acc)

    def __mul__(self, c: float) -> "BoolPolynomial":
        return BoolPolynomial({k: v * c for k, v in self._terms.items()})

    __rmul__ = __mul__

    def coefficient(self, key: Iterable[int]) -> float:
        return self._terms.get(tuple(sorted(set(key))), 0.0)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    @property
    def variables(self) -> set[int]:
        return {v for k in self._terms for v in k}

    @property
    def num_vars(self) -> int:
        return max(self.variables, default=-1) + 1

    def evaluate(self, bits: Sequence[int] | str) -> float:
        bits = [int(b) for b in bits]
        return float(sum(c for k, c in self._terms.items() if all(bits[v] for v in k)))

    def values(self, n_vars: int | None = None) -> np.ndarray:
        n = self.num_vars if n_vars is None else n_vars
        s = np.arange(1 << n, dtype=np.int64)
        out = np.zeros(s.size)
        for k, c in self._terms.items():
            m = 0
            for v in k:
                m |= 1 << (n - 1 - v)
            out += c * ((s & m) == m)
        return out


    def dumps(self) -> str:
        """Text lines ``coeff i1 i2 ...`` (same layout as spin polynomials)."""
        keys = sorted(self._terms, key=lambda k: (len(k), k))
        return "".join(" ".join([repr(self._terms[k])] + [str(v) for v in k]) + "\n" for k in keys)

    @classmethod
    def loads(cls, text: str) -> "BoolPolynomial":
        acc: dict[tuple[int, ...], float] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                c = float(parts[0])
                key = tuple(sorted(set(int(v) for v in parts[1:])))
            except ValueError:
                raise ValueError(f"line {lineno}: malformed term {raw!r}") from None
            acc[key] = acc.get(key, 0.0) + c
        return cls(acc)


def z_to_bool(p: ZPolynomial) -> BoolPolynomial:
    """Substitute ``z_v = 1 - 2 x_v``."""
    acc: dict[tuple[int, ...], float] = {}
    for key, c in p.to_real().items():
        for size in range(len(key) + 1):
            for sub in combinations(key, size):
                acc[sub] = acc.get(sub, 0.0) + c * (-2.0) ** size
    return BoolPolynomial(acc)


def bool_to_z(q: BoolPolynomial) -> ZPolynomial:
    """Substitute ``x_v = (1 - z_v) / 2``."""
    acc: dict[tuple[int, ...], float] = {}
    for key, c in q.items():
        scale = c / 2.0 ** len(key)
        for size in range(len(key) + 1):
            for sub in combinations(key, size):
                acc[sub] = acc.get(sub, 0.0) + scale * (-1.0) ** size
    return ZPolynomial(acc).to_real()


def substitution_penalty(a: int, b: int, y: int, weight: float = 1.0) -> BoolPolynomial:
    """``weight * (x_a x_b - 2 x_a y - 2 x_b y + 3 y)``."""
    return BoolPolynomial({(a, b): weight, (a, y): -2.0 * weight, (b, y): -2.0 * weight, (y,): 3.0 * weight})


def reduce_pair(p: BoolPolynomial, a: int, b: int, ancilla: int, penalty: float | None = None) -> BoolPolynomial:
    """Replace ``x_a x_b`` by ``x_ancilla`` in every term of degree >= 3 containing both.

    If no such term exists the polynomial is returned unchanged and no
    penalty is added. ``penalty`` defaults to ``1 + sum |c|`` over the rewritten terms, which
    makes any assignment with ``x_ancilla != x_a x_b`` strictly worse.
    """
    if a == b:
        raise ValueError("pair needs two distinct variables")
    if ancilla in p.variables:
        raise ValueError(f"ancilla index {ancilla} already used by the polynomial")
    out: dict[tuple[int, ...], float] = {}
    moved = 0.0
    hit = False
    for key, c in p.items():
        if a in key and b in key and len(key) >= 3:
            hit = True
            moved += abs(c)
            new = tuple(sorted((set(key) - {a, b}) | {ancilla}))
        else:
            new = key
        out[new] = out.get(new, 0.0) + c
    if not hit:
        return p
    weight = 1.0 + moved if penalty is None else penalty
    return BoolPolynomial(out) + substitution_penalty(a, b, ancilla, weight)


def _pick_pair(p: BoolPolynomial) -> tuple[int, int]:
    counts: Counter = Counter()
    for key in p._terms:
        if len(key) >= 3:
            counts.update(combinations(key, 2))
    best = max(counts.values())
    return min(pair for pair, c in counts.items() if c == best)


@dataclass
class IsingModel:
    """``offset + sum h_i z_i + sum_{i<j} J_ij z_i z_j`` with an ancilla registry."""

    offset: float = 0.0
    h: dict[int, float] = field(default_factory=dict)
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    ancillas: dict[int, tuple[int, int]] = field(default_factory=dict)
    n_vars: int | None = None

    def __post_init__(self):
        J = {}
        for (i, j), v in self.J.items():
            if i == j:
                raise ValueError(f"diagonal coupling J[{i},{i}]")
            key = (min(i, j), max(i, j))
            J[key] = J.get(key, 0.0) + float(v)
        self.J = {k: v for k, v in J.items() if v != 0.0}
        self.h = {int(i): float(v) for i, v in self.h.items() if v != 0.0}
        idx = set(self.h) | {v for k in self.J for v in k} | set(self.ancillas)
        needed = max(idx, default=-1) + 1
        self.n_vars = needed if self.n_vars is None else max(self.n_vars, needed)
        for k, (i, j) in self.ancillas.items():
            if i >= self.n_vars or j >= self.n_vars:
                raise ValueError(f"ancilla {k} has unknown parent ({i}, {j})")

    @classmethod
    def from_zpoly(cls, p: ZPolynomial, ancillas=None, n_vars=None) -> "IsingModel":
        p = p.to_real()
        if p.degree > 2:
            raise ValueError(f"polynomial has degree {p.degree} > 2")
        h, J, offset = {}, {}, 0.0
        for key, c in p.items():
            if len(key) == 0:
                offset += c
            elif len(key) == 1:
                h[key[0]] = c
            else:
                J[key] = c
        return cls(offset, h, J, dict(ancillas or {}), n_vars)

    def to_zpoly(self) -> ZPolynomial:
        terms: dict[tuple[int, ...], float] = {(): self.offset}
        terms.update({(i,): v for i, v in self.h.items()})
        terms.update(self.J)
        return ZPolynomial(terms)

    @property
    def num_terms(self) -> int:
        return len(self.h) + len(self.J) + (1 if self.offset else 0)

    def energy(self, bits: Sequence[int] | str) -> float:
        z = [1 - 2 * int(b) for b in bits]
        e = self.offset + sum(v * z[i] for i, v in self.h.items())
        return e + sum(v * z[i] * z[j] for (i, j), v in self.J.items())

    def energies(self) -> np.ndarray:
        return self.to_zpoly().values(self.n_vars)

    def dense_fields(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_vars
        hv = np.zeros(n)
        Jm = np.zeros((n, n))
        for i, v in self.h.items():
            hv[i] = v
        for (i, j), v in self.J.items():
            Jm[i, j] = Jm[j, i] = v
        return hv, Jm

    def dumps(self) -> str:
        lines = [f"vars {self.n_vars}", f"offset {self.offset!r}"]
        lines += [f"h {i} {v!r}" for i, v in sorted(self.h.items())]
        lines += [f"J {i} {j} {v!r}" for (i, j), v in sorted(self.J.items())]
        lines += [f"anc {k} {i} {j}" for k, (i, j) in sorted(self.ancillas.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "IsingModel":
        offset, h, J, anc, n_vars = 0.0, {}, {}, {}, None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                kind = parts[0]
                if kind == "vars" and len(parts) == 2:
                    n_vars = int(parts[1])
                elif kind == "offset" and len(parts) == 2:
                    offset += float(parts[1])
                elif kind == "h" and len(parts) == 3:
                    h[int(parts[1])] = h.get(int(parts[1]), 0.0) + float(parts[2])
                elif kind == "J" and len(parts) == 4:
                    key = (int(parts[1]), int(parts[2]))
                    J[key] = J.get(key, 0.0) + float(parts[3])
                elif kind == "anc" and len(parts) == 4:
                    anc[int(parts[1])] = (int(parts[2]), int(parts[3]))
                else:
                    raise ValueError
            except ValueError:
                raise ValueError(f"line {lineno}: malformed Ising record {raw!r}") from None
        return cls(offset, h, J, anc, n_vars)


@dataclass
class Quadratization:
    """Output of :func:`quadratize`: the 2-local boolean form plus bookkeeping."""

    qubo: BoolPolynomial
    ancillas: dict[int, tuple[int, int]]
    n_original: int


def quadratize(
    q: BoolPolynomial,
    n_vars: int | None = None,
    max_terms: int = DEFAULT_TERM_BUDGET,
    penalty_scale: float = 1.0,
) -> Quadratization:
    """Repeatedly substitute the most frequent pair until every term is 2-local.

    ``penalty_scale`` multiplies the default penalty weight; a negative value
    deliberately breaks the reduction (used as a negative control).
    """
    n0 = max(q.num_vars, n_vars or 0)
    nxt = n0
    ancillas: dict[int, tuple[int, int]] = {}
    while q.degree > 2:
        a, b = _pick_pair(q)
        moved = sum(abs(c) for k, c in q.items() if a in k and b in k and len(k) >= 3)
        q = reduce_pair(q, a, b, nxt, penalty_scale * (1.0 + moved))
        ancillas[nxt] = (a, b)
        nxt += 1
        if len(q) > max_terms:
            raise TermBudgetExceeded(
                f"term budget {max_terms} exceeded after {len(ancillas)} ancillas ({len(q)} terms)",
                ancillas=len(ancillas),
                terms=len(q),
            )
    return Quadratization(q, ancillas, n0)


def reduce_to_2local(
    p: ZPolynomial,
    n_vars: int | None = None,
    max_terms: int = DEFAULT_TERM_BUDGET,
    penalty_scale: float = 1.0,
) -> IsingModel:
    """Exact minimum-preserving reduction of a spin polynomial to an Ising model.

    Ancillas are numbered consecutively after the original variables.
    """
    if len(p) > max_terms:
        raise TermBudgetExceeded(f"input has {len(p)} terms, budget {max_terms}", terms=len(p))
    red = quadratize(z_to_bool(p), n_vars=max(p.num_vars, n_vars or 0), max_terms=max_terms, penalty_scale=penalty_scale)
    zp = bool_to_z(red.qubo)
    total = red.n_original + len(red.ancillas)
    return IsingModel.from_zpoly(zp, red.ancillas, n_vars=total)


@dataclass
class ReductionReport:
    ok: bool
    original_min: float
    reduced_min: float
    n_original: int
    n_total: int
    witness: str | None = None
    message: str = ""

    def stamp(self) -> str:
        if self.ok:
            return f"min preserved ({self.original_min!r} over {self.n_original} vars, {self.n_total} total)"
        return f"FAILED: {self.message} witness={self.witness}"


def verify_reduction(
    p: ZPolynomial | BoolPolynomial,
    m: IsingModel,
    n_original: int | None = None,
    max_vars: int = VERIFY_MAX_VARS,
    tol: float = 1e-9,
) -> ReductionReport:
    """Exhaustively compare minima and minimiser sets of ``p`` and its reduction ``m``."""
    n0 = p.num_vars if n_original is None else n_original
    N = max(m.n_vars, n0)
    if N > max_vars:
        raise ValueError(f"{N} variables exceeds exhaustive limit {max_vars}")
    pv = p.values(n0) if isinstance(p, BoolPolynomial) else p.to_real().values(n0)
    mv = m.to_zpoly().values(N)
    pmin, mmin = float(pv.min()), float(mv.min())
    scale = tol * max(1.0, abs(pmin), abs(mmin))

    def report(ok, msg="", witness=None):
        return ReductionReport(ok, pmin, mmin, n0, N, witness, msg)

    if abs(pmin - mmin) > scale:
        w = int(np.argmin(mv))
        return report(False, f"minima differ: {pmin!r} vs {mmin!r}", int_to_bits(w, N))
    m_arg = np.flatnonzero(mv <= mmin + scale)
    p_arg = set(np.flatnonzero(pv <= pmin + scale).tolist())
    proj = m_arg >> (N - n0)
    for s, ps in zip(m_arg.tolist(), proj.tolist()):
        if ps not in p_arg:
            return report(False, "reduced minimiser projects to a non-minimiser", int_to_bits(s, N))
        bits = int_to_bits(s, N)
        for k, (i, j) in m.ancillas.items():
            if int(bits[k]) != int(bits[i]) * int(bits[j]):
                return report(False, f"ancilla {k} != x{i}*x{j} at a minimiser", bits)
    missing = p_arg - set(proj.tolist())
    if missing:
        w = min(missing)
        return report(False, "original minimiser has no reduced extension", int_to_bits(w, n0))
    return report(True)


def termwise_term_count(p: ZPolynomial, max_terms: int = DEFAULT_TERM_BUDGET) -> int:
    """Ising term count when each monomial is reduced on its own with private ancillas.

    Nothing is merged across monomials, so this is the size of the naive
    one-term-at-a-time construction; :func:`reduce_to_2local` shares
    ancillas and is usually much smaller.
    """
    total = 0
    for key, c in p.to_real().items():
        total += reduce_to_2local(ZPolynomial({key: c}), n_vars=p.num_vars, max_terms=max_terms).num_terms
        if total > max_terms:
            raise TermBudgetExceeded(f"term budget {max_terms} exceeded", terms=total)
    return total
