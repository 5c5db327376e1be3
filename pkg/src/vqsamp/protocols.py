"""Bundled round protocols and named adversaries for the compiler harness."""

import json

import numpy as np

from .blind import Prover, RoundProtocol
from .qpip0 import (
    Abort,
    Bind,
    Break,
    CopyStrategy,
    measurement_commit,
    measurement_open,
    new_session,
    uniform_bits,
    _draw_basis,
)
from .qpip1 import SamplingInstance, _extract_output_bits, prepare_instance
from .qsim import Circuit


def echo_protocol(n_bits: int, rounds: int = 2) -> RoundProtocol:
    """The identity benchmark: every verifier message is a zero-string of
    the input's length and the honest prover echoes it back."""
    if rounds < 1:
        raise ValueError("need at least one round")
    blank = b"0" * n_bits

    def verifier_first(rng, x: str):
        if len(x) != n_bits:
            raise ValueError(f"input must have {n_bits} bits")
        return blank, None

    def verifier_next(t, p_prev: bytes, st, rng):
        return blank, st

    def verifier_out(p_last: bytes, st) -> bytes:
        return p_last

    def prover_first(rng, v1: bytes, x: str):
        return v1, b""

    def prover_next(t, v_t: bytes, st: bytes, rng):
        return v_t, st

    return RoundProtocol(
        name=f"echo[{n_bits}x{rounds}]",
        rounds=rounds,
        verifier_first=verifier_first,
        verifier_next=verifier_next,
        verifier_out=verifier_out,
        prover_first=prover_first,
        prover_next=prover_next,
        prover_msg_len=tuple([n_bits] * rounds),
        verifier_msg_len=tuple([n_bits] * rounds),
        prover_depth=1,
        prover_fdesc=("identity",),
    )


def _parse_strategy(token, instance: SamplingInstance) -> CopyStrategy:
    if token == "bind":
        return Bind(instance.hist)
    if isinstance(token, str) and token.startswith("break:"):
        try:
            p = float(token.split(":", 1)[1])
        except ValueError:
            return Abort()
        if 0.0 <= p <= 1.0:
            return Break(p, uniform_bits)
    return Abort()


def qpip0_protocol(
    circuit: Circuit,
    copies: int,
    padding: int = 3,
    honest_plan: list[str] | None = None,
) -> RoundProtocol:
    """The parallel-repetition sampling protocol as a two-round protocol.

    Message flow: the verifier opens the per-copy measurement sessions
    (their ids are all it reveals; basis choices stay private), the prover
    commits by naming a per-copy strategy, the verifier broadcasts the
    challenge vector with one Hadamard copy, and the output is computed
    from the ideal functionality's openings.  The verifier tolerates
    arbitrary bytes everywhere: unparseable commitments read as aborts.
    """
    if copies < 2:
        raise ValueError("need at least 2 copies")
    plan = honest_plan or ["bind"] * copies
    cache: dict[str, SamplingInstance] = {}

    def _instance(x: str) -> SamplingInstance:
        if x not in cache:
            cache[x] = prepare_instance(circuit, x, padding_override=padding)
        return cache[x]

    def verifier_first(rng, x: str):
        instance = _instance(x)
        draws = [_draw_basis(instance, rng) for _ in range(copies)]
        sessions = [new_session(i, draws[i][1]) for i in range(copies)]
        st = {"instance": instance, "sessions": sessions, "rng": rng}
        return json.dumps({"sessions": list(range(copies))}).encode(), st

    def verifier_next(t, p_prev: bytes, st, rng):
        try:
            tokens = json.loads(p_prev.decode())
        except (ValueError, UnicodeDecodeError):
            tokens = []
        if not isinstance(tokens, list):
            tokens = []
        tokens = (tokens + ["abort"] * copies)[:copies]
        for session, token in zip(st["sessions"], tokens):
            measurement_commit(session, _parse_strategy(token, st["instance"]))
        r = int(rng.integers(0, copies))
        st["r"] = r
        challenge = [1 if i == r else 0 for i in range(copies)]
        return json.dumps({"c": challenge}).encode(), st

    def verifier_out(p_last: bytes, st) -> bytes:
        instance, rng = st["instance"], st["rng"]
        r = st["r"]
        all_pass = True
        hadamard_bits = None
        for i, session in enumerate(st["sessions"]):
            result = measurement_open(session, 1 if i == r else 0, rng)
            if i == r:
                hadamard_bits = result
            elif result != "Acc":
                all_pass = False
        if all_pass and hadamard_bits is not None:
            z = _extract_output_bits(hadamard_bits, instance.outputs)
            return json.dumps({"d": "Acc", "z": z}).encode()
        return json.dumps({"d": "Rej", "z": None}).encode()

    def prover_first(rng, v1: bytes, x: str):
        return json.dumps(plan).encode(), b""

    def prover_next(t, v_t: bytes, st: bytes, rng):
        return b"open", st

    return RoundProtocol(
        name=f"qpip0[{copies}]",
        rounds=2,
        verifier_first=verifier_first,
        verifier_next=verifier_next,
        verifier_out=verifier_out,
        prover_first=prover_first,
        prover_next=prover_next,
        prover_depth=2,
    )


# -- named adversaries ---------------------------------------------------------


def echoing_adversary() -> Prover:
    """Sends every received message straight back (raw ciphertext echo)."""

    def first(rng, v1: bytes, x: str):
        return v1, None

    def next_(t, v_t: bytes, st, rng):
        return v_t, st

    return Prover(first, next_)


def garbage_adversary(length: int = 24) -> Prover:
    """Sends random bytes; exercises the dec-never-fails path."""

    def first(rng, v1: bytes, x: str):
        return rng.bytes(length), None

    def next_(t, v_t: bytes, st, rng):
        return rng.bytes(length), st

    return Prover(first, next_)


def aborting_adversary() -> Prover:
    """Sends empty messages everywhere."""

    def first(rng, v1: bytes, x: str):
        return b"", None

    def next_(t, v_t: bytes, st, rng):
        return b"", st

    return Prover(first, next_)


def corrupting_adversary(pi: RoundProtocol, flip_round: int, seed_offset: int = 0) -> Prover:
    """Runs the honest prover but corrupts one message at byte level."""
    honest = pi.honest_prover()

    def _corrupt(msg: bytes, rng) -> bytes:
        if not msg:
            return b"\xff"
        data = bytearray(msg)
        pos = int(rng.integers(0, len(data)))
        data[pos] ^= int(rng.integers(1, 256))
        return bytes(data)

    def first(rng, v1: bytes, x: str):
        p, st = honest.first(rng, v1, x)
        if flip_round == 1:
            p = _corrupt(p, rng)
        return p, st

    def next_(t, v_t: bytes, st, rng):
        p, st = honest.next(t, v_t, st, rng)
        if t == flip_round:
            p = _corrupt(p, rng)
        return p, st

    return Prover(first, next_)


ADVERSARIES = {
    "echo": lambda pi: echoing_adversary(),
    "garbage": lambda pi: garbage_adversary(),
    "abort": lambda pi: aborting_adversary(),
    "honest": lambda pi: pi.honest_prover(),
}
