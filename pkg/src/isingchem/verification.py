"""Randomised invariant suites used by ``isingchem verify``.

Each suite returns a :class:`SuiteResult` with a verdict and, on failure,
a human-readable dump of the first counterexamples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .locality import reduce_to_2local, verify_reduction
from .pauli import PauliString, PauliSum
from .replication import (
    ReplicatedState,
    ReplicationLayout,
    ZPolynomial,
    build_replicated_hamiltonian,
    count_value,
)
from .solver import algorithm1, restricted_minimum_oracle

MAX_DUMPS = 5


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {verdict} ({self.cases} cases, {len(self.failures)} failures)"


def random_hermitian(n: int, rng: np.random.Generator, n_terms: int | None = None) -> PauliSum:
    """Random real-coefficient combination of distinct Pauli strings (always Hermitian)."""
    n_terms = int(rng.integers(1, 2 * 4**n // 3 + 2)) if n_terms is None else n_terms
    keys = rng.choice(4**n, size=min(n_terms, 4**n), replace=False)
    terms = []
    for key in keys:
        label = "".join("IXYZ"[(int(key) >> (2 * q)) & 3] for q in range(n))
        terms.append((float(rng.normal()), PauliString.from_label(label)))
    return PauliSum.from_terms(n, terms)


def random_zpoly(n_vars: int, rng: np.random.Generator, n_terms: int, max_degree: int) -> ZPolynomial:
    terms = {}
    for _ in range(n_terms):
        k = int(rng.integers(1, min(n_vars, max_degree) + 1))
        terms[tuple(int(v) for v in rng.choice(n_vars, size=k, replace=False))] = float(rng.normal())
    return ZPolynomial(terms)


def mapping_identity_suite(seed: int = 0, cases: int = 200, tol: float = 1e-10) -> SuiteResult:
    """``H'(Psi) == count(Psi) * a^T H a`` on random Hamiltonians, layouts and states."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("mapping_identity")
    for _ in range(cases):
        n, r = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        H = random_hermitian(n, rng)
        layout = ReplicationLayout(n, r, tuple(int(s) for s in rng.choice([-1, 1], size=r)))
        state = ReplicatedState.from_int(int(rng.integers(0, 1 << layout.n_vars)), layout)
        value = build_replicated_hamiltonian(H, layout).evaluate(state.bits)
        amps = state.amplitudes()
        count = count_value(state)
        expect = 0.0 if amps is None else count * float(amps @ H.to_dense().real @ amps)
        res.cases += 1
        bad = (value != 0.0) if amps is None else abs(value - expect) > tol * max(1.0, abs(expect))
        if bad and len(res.failures) < MAX_DUMPS:
            res.failures.append(f"H={H!r} signs={layout.sign_label()} state={state.bits} H'={value!r} expected={expect!r}")
    return res


def reduction_suite(seed: int = 0, cases: int = 100, penalty_scale: float = 1.0, max_vars: int = 20) -> SuiteResult:
    """Exhaustive minimum and argmin preservation of the 2-local reduction."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("reduction_exhaustion")
    while res.cases < cases:
        n = int(rng.integers(3, 9))
        p = random_zpoly(n, rng, int(rng.integers(2, 8)), 5)
        m = reduce_to_2local(p, n_vars=n, penalty_scale=penalty_scale)
        if m.n_vars > max_vars:
            continue
        res.cases += 1
        rep = verify_reduction(p, m, n_original=n, max_vars=max_vars)
        if not rep.ok and len(res.failures) < MAX_DUMPS:
            res.failures.append(f"p={p!r}: {rep.stamp()}")
    return res


def oracle_suite(seed: int = 0, cases: int = 50, rs: tuple[int, ...] = (2, 3, 4), tol: float = 1e-10) -> SuiteResult:
    """Iterative solver against the brute-force restricted minimum."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("oracle_equivalence")
    for _ in range(cases):
        H = random_hermitian(2, rng)
        for r in rs:
            got = algorithm1(H, r).energy
            want = restricted_minimum_oracle(H, r)
            res.cases += 1
            if abs(got - want) > tol * max(1.0, abs(want)) and len(res.failures) < MAX_DUMPS:
                res.failures.append(f"r={r} H={H!r}: algorithm={got!r} oracle={want!r}")
    return res


def run_all(seed: int = 0, inject_fault: bool = False, quick: bool = False) -> list[SuiteResult]:
    scale = 4 if quick else 1
    return [
        mapping_identity_suite(seed, cases=200 // scale),
        reduction_suite(seed, cases=100 // scale, penalty_scale=-1.0 if inject_fault else 1.0),
        oracle_suite(seed, cases=50 // scale),
    ]
