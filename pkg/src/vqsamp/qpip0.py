"""Classical-verifier protocols over an idealized measurement functionality.

The four-message measurement protocol is replaced by a session state
machine whose adversary interface is exactly the binding semantics the
security analysis grants: a prover either Binds a state (openings then
return true X/Z measurement outcomes), Breaks the commitment (passes the
testing round with a chosen probability and answers Hadamard rounds from
an arbitrary bit source), or Aborts.  Negligible error terms of the
cryptographic instantiation collapse to zero at this scale.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .energy import term_basis_string
from .qsim import Circuit, State, index_to_bits, measure_xz_many
from .qpip1 import (
    REJECT,
    SampleOutcome,
    SamplingInstance,
    _extract_output_bits,
    _z_schedule,
    prepare_instance,
)


class ProtocolError(RuntimeError):
    """A session was driven out of phase order."""


class Phase(Enum):
    KEY_SENT = "KeySent"
    COMMITTED = "Committed"
    CHALLENGE_SENT = "ChallengeSent"
    DONE = "Done"


@dataclass(frozen=True)
class Bind:
    """Commit honestly to a state; openings are faithful measurements."""

    state: State


@dataclass(frozen=True)
class Break:
    """Break binding: pass tests w.p. ``test_pass_prob``, answer Hadamard
    rounds from ``hadamard_source(rng, length) -> bitstring``."""

    test_pass_prob: float
    hadamard_source: Callable[[np.random.Generator, int], str]

    def __post_init__(self):
        if not 0.0 <= self.test_pass_prob <= 1.0:
            raise ValueError("test_pass_prob must lie in [0,1]")


@dataclass(frozen=True)
class Abort:
    """Send no commitment (y = bottom)."""


CopyStrategy = Bind | Break | Abort


def uniform_bits(rng: np.random.Generator, length: int) -> str:
    return "".join("1" if b else "0" for b in rng.integers(0, 2, size=length))


def constant_bits(bits: str) -> Callable[[np.random.Generator, int], str]:
    def source(rng: np.random.Generator, length: int) -> str:
        if len(bits) != length:
            raise ValueError(f"constant source has {len(bits)} bits, need {length}")
        return bits

    return source


@dataclass
class MeasurementSession:
    """One run of the idealized 4-message commit/challenge functionality.

    The basis choice h never leaves the verifier; the pre-challenge
    transcript (session id, commitment tag) is identical for all h.
    """

    session_id: int
    h: str
    phase: Phase = Phase.KEY_SENT
    commitment: CopyStrategy | None = None
    c: int | None = None

    def public_view_before_challenge(self) -> tuple:
        tag = "bottom" if isinstance(self.commitment, Abort) else "committed"
        return (self.session_id, tag)


def new_session(session_id: int, h: str) -> MeasurementSession:
    return MeasurementSession(session_id=session_id, h=h)


def measurement_commit(session: MeasurementSession, strategy: CopyStrategy) -> MeasurementSession:
    if session.phase is not Phase.KEY_SENT:
        raise ProtocolError(f"commit in phase {session.phase}")
    if isinstance(strategy, Bind) and strategy.state.s != len(session.h):
        raise ProtocolError("bound state size does not match the basis choice")
    session.commitment = strategy
    session.phase = Phase.COMMITTED
    return session


def measurement_open(session: MeasurementSession, c: int, rng: np.random.Generator):
    """Challenge and open a committed session.

    Testing round (c=0) returns 'Acc' or 'Rej'; Hadamard round (c=1)
    returns the outcome bitstring, or None when the session was aborted.
    """
    if session.phase is not Phase.COMMITTED:
        raise ProtocolError(f"open in phase {session.phase} (double open?)")
    if c not in (0, 1):
        raise ProtocolError(f"challenge must be 0 or 1, got {c}")
    session.c = c
    session.phase = Phase.CHALLENGE_SENT
    strat = session.commitment
    if c == 0:
        if isinstance(strat, Bind):
            verdict = "Acc"
        elif isinstance(strat, Break):
            verdict = "Acc" if rng.random() < strat.test_pass_prob else "Rej"
        else:
            verdict = "Rej"
        session.phase = Phase.DONE
        return verdict
    if isinstance(strat, Bind):
        sample = int(measure_xz_many(strat.state, session.h, rng, 1)[0])
        result = index_to_bits(sample, strat.state.s)
    elif isinstance(strat, Break):
        result = strat.hadamard_source(rng, len(session.h))
    else:
        result = None
    session.phase = Phase.DONE
    return result


# -- single-copy naive protocol ----------------------------------------------


def _draw_basis(instance: SamplingInstance, rng: np.random.Generator) -> tuple[int, str]:
    """One energy-test term draw and its full measurement schedule."""
    ham = instance.report.hamiltonian
    probs = np.array([abs(a) for a, _ in ham.terms]) / ham.alpha_l1
    idx = int(rng.choice(len(ham), p=probs))
    return idx, term_basis_string(ham.terms[idx][1], instance.s)


def _single_copy_verdict(instance: SamplingInstance, term_idx: int, bits: str) -> SampleOutcome:
    """Energy-test verdict plus output extraction from one Hadamard opening."""
    alpha, term = instance.report.hamiltonian.terms[term_idx]
    r = 1
    for q in range(instance.s):
        if (term.support >> q) & 1 and bits[q] == "1":
            r = -r
    if math.copysign(1.0, alpha) * r == -1:
        return SampleOutcome("Acc", _extract_output_bits(bits, instance.outputs))
    return REJECT


def run_qpip_naive(
    strategy: CopyStrategy,
    circuit: Circuit,
    x: str,
    epsilon: float,
    rng: np.random.Generator,
    instance: SamplingInstance | None = None,
    padding_override: int | None = None,
) -> SampleOutcome:
    """One-copy composition of the measurement functionality with the
    energy test.

    The verifier draws a test schedule, flips a fair challenge coin, and
    either tests the commitment (accepting yields no sample: the output is
    (Acc, None), the documented deficiency of the single-copy protocol) or
    learns the measurement outcome and finishes the single-copy verdict.
    """
    if instance is None:
        instance = prepare_instance(
            circuit, x, epsilon=epsilon, padding_override=padding_override
        )
    term_idx, h = _draw_basis(instance, rng)
    session = new_session(0, h)
    measurement_commit(session, strategy)
    c = int(rng.integers(0, 2))
    result = measurement_open(session, c, rng)
    if c == 0:
        return SampleOutcome(result, None)
    if result is None:
        return REJECT
    return _single_copy_verdict(instance, term_idx, result)


# -- parallel repetition -------------------------------------------------------


@dataclass(frozen=True)
class CopyTrace:
    copy: int
    challenge: int
    verdict: str | None
    opened_bits: str | None


def run_qpip0(
    strategies: list[CopyStrategy],
    circuit: Circuit,
    x: str,
    copies: int,
    rng: np.random.Generator,
    epsilon: float = 0.5,
    instance: SamplingInstance | None = None,
    padding_override: int | None = None,
    trace: bool = False,
):
    """Parallel repetition with one Hadamard copy.

    Draws an independent test schedule per copy, picks r uniformly, runs
    the testing round on every copy except r and the Hadamard round on r.
    Rejects iff any testing round rejects (or the Hadamard copy aborted);
    otherwise outputs the sample read off the Hadamard copy's output wires.
    """
    if copies < 2:
        raise ValueError("parallel repetition needs at least 2 copies")
    if len(strategies) != copies:
        raise ValueError(f"got {len(strategies)} strategies for {copies} copies")
    if instance is None:
        instance = prepare_instance(
            circuit, x, epsilon=epsilon, padding_override=padding_override
        )
    draws = [_draw_basis(instance, rng) for _ in range(copies)]
    sessions = [new_session(i, draws[i][1]) for i in range(copies)]
    for session, strategy in zip(sessions, strategies):
        measurement_commit(session, strategy)
    r = int(rng.integers(0, copies))

    traces = []
    all_pass = True
    hadamard_bits = None
    for i, session in enumerate(sessions):
        c = 1 if i == r else 0
        result = measurement_open(session, c, rng)
        if c == 0:
            if result != "Acc":
                all_pass = False
            traces.append(CopyTrace(i, c, result, None))
        else:
            hadamard_bits = result
            traces.append(CopyTrace(i, c, None, result))

    if not all_pass or hadamard_bits is None:
        outcome = REJECT
    else:
        outcome = SampleOutcome(
            "Acc", _extract_output_bits(hadamard_bits, instance.outputs)
        )
    if trace:
        return outcome, traces
    return outcome


def qpip0_accept_prob_exact(strategies: list[CopyStrategy]) -> float:
    """Acceptance probability by enumerating the Hadamard-copy choice r.

    The Hadamard copy is never tested, so acceptance given r is the product
    of the other copies' testing pass probabilities (1 for Bind, the chosen
    probability for Break, 0 for Abort).
    """
    copies = len(strategies)
    if copies < 2:
        raise ValueError("parallel repetition needs at least 2 copies")

    def pass_prob(s: CopyStrategy) -> float:
        if isinstance(s, Bind):
            return 1.0
        if isinstance(s, Break):
            return s.test_pass_prob
        return 0.0

    total = 0.0
    for r in range(copies):
        p = 1.0
        for i, s in enumerate(strategies):
            if i != r:
                p *= pass_prob(s)
        if isinstance(strategies[r], Abort):
            p = 0.0
        total += p / copies
    return total
