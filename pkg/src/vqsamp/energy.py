"""Single-shot energy verification for X-Z Hamiltonians.

One round samples a term index i* with probability |alpha_i|/sum|alpha|,
measures every qubit in the term's support in the basis the term dictates
(X for an X factor, Z for a Z factor), multiplies the +-1 outcomes into
r, and accepts iff sgn(alpha_i*) * r = -1.  The acceptance probability is
1/2 - <H>/(2 sum|alpha|), so zero-energy states accept with probability
exactly 1/2 and any excess energy shows up as a deficit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import WeightedHamiltonian, XZTerm
from .qsim import State, measure_xz_many, rotate_for_xz

EXACT_ENUM_CAP = 12


@dataclass(frozen=True)
class VgsRound:
    """Record of one verification round."""

    term_index: int
    basis_schedule: str
    outcomes: tuple[int, ...]
    r: int
    verdict: str

    @property
    def accepted(self) -> bool:
        return self.verdict == "Acc"


def term_basis_string(term: XZTerm, s: int) -> str:
    """Full-length basis choice: X on the term's X factors, Z elsewhere.

    Qubits outside the term's support default to Z; their outcomes are
    never used, so the choice only fixes a concrete measurement schedule.
    """
    return "".join("0" if (term.xmask >> q) & 1 else "1" for q in range(s))


def _support_wires(term: XZTerm, s: int) -> list[int]:
    return [q for q in range(s) if (term.support >> q) & 1]


def _term_probabilities(ham: WeightedHamiltonian) -> np.ndarray:
    if len(ham) == 0 or ham.alpha_l1 <= 0.0:
        raise ValueError("cannot verify an empty Hamiltonian")
    return np.array([abs(a) for a, _ in ham.terms]) / ham.alpha_l1


def _accepts(alpha: float, r: int) -> bool:
    return math.copysign(1.0, alpha) * r == -1


def vgs_round(ham: WeightedHamiltonian, state: State, rng: np.random.Generator) -> VgsRound:
    """Run one verification round, consuming one fresh copy of ``state``."""
    if state.s != ham.s:
        raise ValueError("state and Hamiltonian qubit counts differ")
    probs = _term_probabilities(ham)
    i_star = int(rng.choice(len(ham), p=probs))
    alpha, term = ham.terms[i_star]
    h = term_basis_string(term, ham.s)
    sample = int(measure_xz_many(state, h, rng, 1)[0])
    outcomes = tuple(1 - 2 * ((sample >> q) & 1) for q in _support_wires(term, ham.s))
    r = 1
    for o in outcomes:
        r *= o
    return VgsRound(
        term_index=i_star,
        basis_schedule=h,
        outcomes=outcomes,
        r=r,
        verdict="Acc" if _accepts(alpha, r) else "Rej",
    )


def vgs_accept_prob_analytic(ham: WeightedHamiltonian, state: State) -> float:
    """Closed-form acceptance probability 1/2 - <H>/(2 sum|alpha|)."""
    if len(ham) == 0 or ham.alpha_l1 <= 0.0:
        raise ValueError("cannot verify an empty Hamiltonian")
    p = 0.5 - ham.expectation(state) / (2.0 * ham.alpha_l1)
    if p < -1e-9 or p > 1.0 + 1e-9:
        raise ValueError(f"acceptance probability {p} outside [0,1]: Hamiltonian bug")
    return min(max(p, 0.0), 1.0)


def _term_accept_prob(term: XZTerm, alpha: float, state: State) -> float:
    """Born-rule acceptance probability of one term by exact enumeration."""
    h = term_basis_string(term, state.s)
    probs = np.abs(rotate_for_xz(state, h).amps) ** 2
    idx = np.arange(state.dim, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(term.support)) & 1
    r = 1 - 2 * parity.astype(np.int64)
    sign = math.copysign(1.0, alpha)
    return float(probs[sign * r == -1].sum())


def vgs_accept_prob_exact(ham: WeightedHamiltonian, state: State) -> float:
    """Acceptance probability by per-term Born-rule enumeration.

    Independent oracle for the analytic formula; capped at 12 qubits.
    """
    if state.s > EXACT_ENUM_CAP:
        raise ValueError(f"exact enumeration capped at {EXACT_ENUM_CAP} qubits")
    probs = _term_probabilities(ham)
    total = 0.0
    for p, (alpha, term) in zip(probs, ham.terms):
        total += p * _term_accept_prob(term, alpha, state)
    return total


def vgs_accept_rate_mc(
    ham: WeightedHamiltonian, state: State, trials: int, rng: np.random.Generator
) -> float:
    """Empirical acceptance rate over ``trials`` independent rounds.

    Batches the per-term measurement sampling; the draw is distributed
    identically to ``trials`` calls of :func:`vgs_round`.
    """
    probs = _term_probabilities(ham)
    counts = rng.multinomial(trials, probs)
    accepted = 0
    for i, count in enumerate(counts):
        if count == 0:
            continue
        alpha, term = ham.terms[i]
        h = term_basis_string(term, ham.s)
        samples = measure_xz_many(state, h, rng, int(count))
        parity = np.bitwise_count(samples.astype(np.uint64) & np.uint64(term.support)) & 1
        r = 1 - 2 * parity.astype(np.int64)
        sign = math.copysign(1.0, alpha)
        accepted += int(np.count_nonzero(sign * r == -1))
    return accepted / trials


def closeness_bound(energy: float) -> float:
    """Trace-distance bound (2/sqrt(3)) * sqrt(energy) to the ground state."""
    if energy < 0.0:
        raise ValueError(f"energy must be non-negative, got {energy}")
    return (2.0 / math.sqrt(3.0)) * math.sqrt(energy)
