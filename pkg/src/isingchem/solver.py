"""Ground-state search over diagonal Hamiltonians and the iterative lambda driver."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .locality import IsingModel, reduce_to_2local
from .pauli import PauliSum
from .replication import (
    ReplicationLayout,
    ZPolynomial,
    all_layouts,
    build_replicated_hamiltonian,
    count_polynomial,
    count_values_all,
    int_to_bits,
)

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_VARS = 26
ORACLE_MAX_VARS = 20
DEFAULT_MAX_ITER = 10_000


class IterationLimitError(RuntimeError):
    pass


class NonHermitianError(ValueError):
    pass


# --------------------------------------------------------------------------
# minimisers


def _argmin_with_ties(values: np.ndarray, prefer: np.ndarray | None, tol: float) -> int:
    vmin = values.min()
    cand = np.flatnonzero(values <= vmin + tol)
    if prefer is not None and cand.size > 1:
        best = prefer[cand].max()
        cand = cand[prefer[cand] == best]
    return int(cand[0])


def min_diagonal_exhaustive(
    p: ZPolynomial | IsingModel,
    n_vars: int | None = None,
    prefer: np.ndarray | None = None,
    max_vars: int = EXHAUSTIVE_MAX_VARS,
) -> tuple[str, float]:
    """Global minimum by full enumeration.

    Among degenerate minima the state with the largest ``prefer`` score wins
    (the solver passes count values), then the lexicographically smallest.
    """
    if isinstance(p, IsingModel):
        n_vars = p.n_vars if n_vars is None else n_vars
        p = p.to_zpoly()
    n = p.num_vars if n_vars is None else n_vars
    if n > max_vars:
        raise ValueError(f"{n} variables exceeds exhaustive cap {max_vars}")
    vals = p.to_real().values(n)
    tol = 1e-12 * max(1.0, float(np.abs(vals).max(initial=0.0)))
    s = _argmin_with_ties(vals, prefer, tol)
    return int_to_bits(s, n), float(vals[s])


@dataclass(frozen=True)
class AnnealSchedule:
    """Metropolis annealing parameters.

    Temperatures default to values scaled by the model's largest local field
    magnitude: ``t_initial = 2 * scale`` and ``t_final = 1e-3 * scale``.
    """

    sweeps: int = 400
    t_initial: float | None = None
    t_final: float | None = None
    restarts: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        for t in (self.t_initial, self.t_final):
            if t is not None and not t > 0:
                raise ValueError("temperatures must be positive")
        if self.t_initial is not None and self.t_final is not None and self.t_final > self.t_initial:
            raise ValueError("temperature must decrease")

    def temperatures(self, scale: float) -> np.ndarray:
        t0 = self.t_initial if self.t_initial is not None else 2.0 * scale
        t1 = self.t_final if self.t_final is not None else 1e-3 * scale
        t1 = min(t1, t0)
        return np.geomspace(t0, t1, self.sweeps)


def min_diagonal_anneal(m: IsingModel, schedule: AnnealSchedule | None = None) -> tuple[str, float]:
    """Best state over independent simulated-annealing restarts, finished by a greedy quench."""
    schedule = schedule or AnnealSchedule()
    n = m.n_vars
    if n == 0:
        return "", m.offset
    hv, Jm = m.dense_fields()
    rng = np.random.default_rng(schedule.seed)
    R = schedule.restarts
    s = rng.choice(np.array([-1.0, 1.0]), size=(R, n))
    scale = float(np.max(np.abs(hv) + np.abs(Jm).sum(axis=1))) or 1.0
    for T in schedule.temperatures(scale):
        for i in range(n):
            field_i = hv[i] + s @ Jm[i]
            dE = -2.0 * s[:, i] * field_i
            accept = (dE <= 0) | (rng.random(R) < np.exp(-np.clip(dE, 0, None) / T))
            s[accept, i] *= -1
    # zero-temperature descent so every restart ends in a local minimum
    improved = True
    while improved:
        improved = False
        for i in range(n):
            dE = -2.0 * s[:, i] * (hv[i] + s @ Jm[i])
            flip = dE < -1e-12
            if flip.any():
                s[flip, i] *= -1
                improved = True
    energies = m.offset + s @ hv + 0.5 * np.einsum("ri,ij,rj->r", s, Jm, s)
    best = int(np.argmin(energies))
    bits = "".join("0" if v > 0 else "1" for v in s[best])
    return bits, float(m.energy(bits))


# --------------------------------------------------------------------------
# iterative driver


@dataclass(frozen=True)
class IterationRecord:
    lam: float
    min_value: float
    state: str
    count: int


@dataclass
class SolveReport:
    """Outcome of the lambda iteration for one sign configuration."""

    signs: tuple[int, ...]
    lambdas: list[float] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.lambdas[-1]

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def sign_label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def is_monotone(self) -> bool:
        return all(b < a for a, b in zip(self.lambdas, self.lambdas[1:]))


@dataclass
class Algorithm1Result:
    reports: list[SolveReport]
    n: int
    r: int

    @property
    def energy(self) -> float:
        return min(rep.energy for rep in self.reports)

    @property
    def best(self) -> SolveReport:
        return min(self.reports, key=lambda rep: rep.energy)

    def lambda_trace(self) -> list[float]:
        """Distinct lambda values visited across configurations, in order."""
        out: list[float] = []
        for rep in self.reports:
            for lam in rep.lambdas:
                if not out or lam != out[-1]:
                    out.append(lam)
        return out


def default_lambda0(H: PauliSum) -> float:
    return 1.0 + H.norm1()


def _lambda_loop(
    layout: ReplicationLayout,
    hvals: np.ndarray,
    cvals: np.ndarray,
    lam: float,
    eps: float,
    max_iter: int,
    minimise,
) -> SolveReport:
    rep = SolveReport(layout.signs, [lam])
    for _ in range(max_iter):
        s = minimise(lam)
        value = float(hvals[s] - lam * cvals[s])
        count = int(cvals[s])
        state = int_to_bits(s, layout.n_vars)
        rep.records.append(IterationRecord(lam, value, state, count))
        if value >= -eps:
            return rep
        lam_new = float(hvals[s] / count)
        log.debug("signs %s: lambda %.12g -> %.12g at %s (count %d)", layout.sign_label(), lam, lam_new, state, count)
        lam = lam_new
        rep.lambdas.append(lam)
    raise IterationLimitError(f"no convergence within {max_iter} iterations for signs {layout.sign_label()}")


def algorithm1(
    H: PauliSum,
    r: int,
    solver: str = "exhaustive",
    lambda0: float | None = None,
    eps: float | None = None,
    warm_start: bool = False,
    max_iter: int = DEFAULT_MAX_ITER,
    schedule: AnnealSchedule | None = None,
    layouts: Sequence[ReplicationLayout] | None = None,
) -> Algorithm1Result:
    """Iterate ``lambda <- H'(psi)/C(psi)`` with ``psi = argmin(H' - lambda C)``.

    One loop per sign configuration (first ``i`` copies negative,
    ``i = 0..r//2``). With ``warm_start`` the converged lambda of one
    configuration seeds the next instead of restarting from ``lambda0``.
    ``solver="anneal"`` reduces each ``H' - lambda C`` to a 2-local Ising
    model and minimises it by simulated annealing.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if not H.is_hermitian():
        raise NonHermitianError("Hamiltonian has complex Pauli coefficients")
    H = H.real()
    n = H.n_qubits
    lam0 = default_lambda0(H) if lambda0 is None else float(lambda0)
    eps = 1e-9 * max(1.0, abs(lam0)) if eps is None else eps
    layouts = list(layouts) if layouts is not None else all_layouts(n, r)
    reports = []
    lam = lam0
    for layout in layouts:
        hpoly = build_replicated_hamiltonian(H, layout)
        hvals = hpoly.values(layout.n_vars)
        cvals = count_values_all(layout)
        if solver == "exhaustive":
            tol_base = 1e-12 * max(1.0, float(np.abs(hvals).max(initial=0.0)))

            def minimise(lam, hvals=hvals, cvals=cvals, tol_base=tol_base):
                vals = hvals - lam * cvals
                return _argmin_with_ties(vals, cvals, tol_base * max(1.0, abs(lam)))

        elif solver == "anneal":
            cpoly = count_polynomial(layout)

            def minimise(lam, hpoly=hpoly, cpoly=cpoly, layout=layout):
                model = reduce_to_2local(hpoly - cpoly * lam, n_vars=layout.n_vars)
                bits, _ = min_diagonal_anneal(model, schedule)
                return int(bits[: layout.n_vars], 2)

        else:
            raise ValueError(f"unknown solver {solver!r}")
        start = lam if warm_start else lam0
        reports.append(_lambda_loop(layout, hvals, cvals, start, eps, max_iter, minimise))
        lam = reports[-1].energy
    return Algorithm1Result(reports, n, r)


# --------------------------------------------------------------------------
# independent oracle


def restricted_minimum_oracle(H: PauliSum, r: int, max_vars: int = ORACLE_MAX_VARS) -> float:
    """Brute-force minimum Rayleigh quotient over every sign pattern and every replicated state.

    Works directly from the dense matrix of ``H`` and explicit signed
    pattern tallies; it never builds the diagonal image.
    """
    n = H.n_qubits
    if n * r > max_vars:
        raise ValueError(f"r*n = {n * r} exceeds oracle cap {max_vars}")
    D = H.to_dense().real
    dim = 1 << n
    states = np.arange(1 << (n * r), dtype=np.int64)
    pats = [(states >> (n * (r - 1 - j))) & (dim - 1) for j in range(r)]
    best = np.inf
    for signs in itertools.product((1.0, -1.0), repeat=r):
        B = np.zeros((states.size, dim))
        for j, sgn in enumerate(signs):
            np.add.at(B, (states, pats[j]), sgn)
        norm2 = np.einsum("sp,sp->s", B, B)
        quad = np.einsum("sp,pq,sq->s", B, D, B)
        ok = norm2 > 0
        best = min(best, float((quad[ok] / norm2[ok]).min()))
    return best


def dense_ground_energy(H: PauliSum) -> float:
    return float(np.linalg.eigvalsh(H.to_dense())[0])
