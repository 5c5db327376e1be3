"""Dense statevector simulation of Toffoli/Hadamard/Identity circuits.

Conventions used throughout the project:

* Wire (qubit) indices are little-endian: qubit ``q`` corresponds to bit
  ``q`` of a basis-state index, i.e. index ``i`` has qubit ``q`` in state
  ``(i >> q) & 1``.
* Bitstrings are indexed by qubit: character ``i`` of a string refers to
  qubit ``i`` (so the string reads qubit 0 first, unlike binary literals).
* X-basis measurement outcomes are encoded ``|+> -> 0`` and ``|-> -> 1``,
  matching the usual +1/-1 eigenvalue convention via ``(-1)**bit``.
"""

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 26

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_H_MATRIX = np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]])

HADAMARD = "H"
TOFFOLI = "T"
IDENTITY = "I"


@dataclass(frozen=True)
class Gate:
    """A single circuit gate: Hadamard(q), Toffoli(a, b, c) or Identity(q)."""

    kind: str
    wires: tuple[int, ...]

    def __post_init__(self):
        if self.kind in (HADAMARD, IDENTITY):
            if len(self.wires) != 1:
                raise ValueError(f"{self.kind} gate takes one wire, got {self.wires}")
        elif self.kind == TOFFOLI:
            if len(self.wires) != 3 or len(set(self.wires)) != 3:
                raise ValueError(f"Toffoli needs three distinct wires, got {self.wires}")
        else:
            raise ValueError(f"unsupported gate kind {self.kind!r}")
        if any(w < 0 for w in self.wires):
            raise ValueError(f"negative wire index in {self.wires}")


def hadamard(q: int) -> Gate:
    return Gate(HADAMARD, (q,))


def toffoli(a: int, b: int, c: int) -> Gate:
    return Gate(TOFFOLI, (a, b, c))


def identity(q: int) -> Gate:
    return Gate(IDENTITY, (q,))


@dataclass(frozen=True)
class Circuit:
    """A Toffoli+Hadamard+Identity circuit on ``n`` input and ``m`` ancilla wires.

    ``outputs`` lists the data wires whose Z-measurement outcomes form the
    circuit's sample; ancilla wires outside ``outputs`` are discarded.
    """

    n: int
    m: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.n < 0 or self.m < 0:
            raise ValueError("wire counts must be non-negative")
        width = self.n + self.m
        for g in self.gates:
            if any(w >= width for w in g.wires):
                raise ValueError(f"gate {g} touches wire outside [0, {width})")
        if len(set(self.outputs)) != len(self.outputs):
            raise ValueError("output wires must be distinct")
        if any(w < 0 or w >= width for w in self.outputs):
            raise ValueError(f"output wire outside [0, {width})")

    @property
    def width(self) -> int:
        return self.n + self.m

    @property
    def t_gates(self) -> int:
        return len(self.gates)

    def padded(self, extra_identities: int, wire: int = 0) -> "Circuit":
        """Return a copy with ``extra_identities`` identity gates appended."""
        if extra_identities < 0:
            raise ValueError("padding must be non-negative")
        if self.width == 0:
            raise ValueError("cannot pad a circuit with no wires")
        pad = tuple(identity(wire) for _ in range(extra_identities))
        return Circuit(self.n, self.m, self.gates + pad, self.outputs)


@dataclass(frozen=True)
class State:
    """A pure state on ``s`` qubits as 2**s little-endian complex amplitudes."""

    s: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.s > MAX_QUBITS:
            raise ValueError(f"{self.s} qubits exceeds the {MAX_QUBITS}-qubit cap")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2**self.s,):
            raise ValueError(f"expected {2**self.s} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} deviates from 1 by more than 1e-9")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return 2**self.s


def bits_to_index(bits: str) -> int:
    """Little-endian bitstring (char i = qubit i) to basis index."""
    idx = 0
    for q, b in enumerate(bits):
        if b == "1":
            idx |= 1 << q
        elif b != "0":
            raise ValueError(f"invalid bit {b!r} in {bits!r}")
    return idx


def index_to_bits(idx: int, s: int) -> str:
    return "".join("1" if (idx >> q) & 1 else "0" for q in range(s))


def new_basis_state(s: int, bits: str) -> State:
    """Computational basis state |bits> on ``s`` qubits."""
    if len(bits) != s:
        raise ValueError(f"expected {s} bits, got {len(bits)}")
    amps = np.zeros(2**s, dtype=np.complex128)
    amps[bits_to_index(bits)] = 1.0
    return State(s, amps)


def _apply_hadamard(amps: np.ndarray, s: int, q: int) -> np.ndarray:
    # Axis layout of amps.reshape([2]*s) is qubit s-1 first (C order).
    t = amps.reshape(2 ** (s - 1 - q), 2, 2**q)
    return np.einsum("ab,ibj->iaj", _H_MATRIX, t).reshape(-1)


def _apply_toffoli(amps: np.ndarray, a: int, b: int, c: int) -> np.ndarray:
    idx = np.arange(amps.size)
    controlled = ((idx >> a) & 1) & ((idx >> b) & 1)
    src = np.where(controlled == 1, idx ^ (1 << c), idx)
    return amps[src]


def apply_gate(state: State, gate: Gate) -> State:
    """Apply one gate, returning a new normalized state."""
    if any(w >= state.s for w in gate.wires):
        raise ValueError(f"gate {gate} out of range for {state.s} qubits")
    if gate.kind == IDENTITY:
        return state
    if gate.kind == HADAMARD:
        out = _apply_hadamard(state.amps, state.s, gate.wires[0])
    else:
        out = _apply_toffoli(state.amps, *gate.wires)
    return State(state.s, out)


def run_circuit(circuit: Circuit, x: str) -> State:
    """Run the circuit on input ``x`` with ancillas initialized to zero."""
    if len(x) != circuit.n:
        raise ValueError(f"input length {len(x)} != n = {circuit.n}")
    state = new_basis_state(circuit.width, x + "0" * circuit.m)
    for g in circuit.gates:
        state = apply_gate(state, g)
    return state


def born_probabilities(state: State) -> np.ndarray:
    return np.abs(state.amps) ** 2


def marginal_distribution(state: State, wires: tuple[int, ...]) -> dict[str, float]:
    """Born distribution of a Z-basis measurement marginalized onto ``wires``."""
    probs = born_probabilities(state)
    idx = np.arange(state.dim)
    keys = np.zeros(state.dim, dtype=np.int64)
    for j, w in enumerate(wires):
        keys |= ((idx >> w) & 1) << j
    sums = np.bincount(keys, weights=probs, minlength=2 ** len(wires))
    out = {}
    for key, p in enumerate(sums):
        if p > 0.0:
            out[index_to_bits(key, len(wires))] = float(p)
    return out


def output_distribution(circuit: Circuit, x: str) -> dict[str, float]:
    """Exact Born-rule output distribution of ``circuit`` on ``x``.

    This is the ideal sampler C_x that total-variation tests compare against.
    """
    return marginal_distribution(run_circuit(circuit, x), circuit.outputs)


def rotate_for_xz(state: State, h: str) -> State:
    """Apply a Hadamard to every X-basis qubit (h bit 0) of ``state``."""
    if len(h) != state.s:
        raise ValueError(f"basis string length {len(h)} != {state.s} qubits")
    amps = state.amps
    for q, basis in enumerate(h):
        if basis == "0":
            amps = _apply_hadamard(amps, state.s, q)
        elif basis != "1":
            raise ValueError(f"invalid basis char {basis!r}")
    return State(state.s, amps)


def measure_xz_many(state: State, h: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` independent M_XZ(state, h) samples as basis indices."""
    probs = born_probabilities(rotate_for_xz(state, h))
    probs = probs / probs.sum()
    return rng.choice(state.dim, size=size, p=probs)


def measure_xz(state: State, h: str, rng: np.random.Generator) -> str:
    """One destructive qubit-by-qubit X/Z measurement sample of ``state``.

    Qubit ``i`` is measured in the X basis when ``h[i] == '0'`` and the Z
    basis when ``h[i] == '1'``; X outcomes report |+> as 0 and |-> as 1.
    """
    idx = int(measure_xz_many(state, h, rng, 1)[0])
    return index_to_bits(idx, state.s)


def tv_distance(p: dict[str, float], q: dict[str, float]) -> float:
    """Total variation distance (missing keys read as probability 0)."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def validate_distribution(d: dict[str, float], tol: float = 1e-9) -> None:
    total = 0.0
    for k, v in d.items():
        if v < 0.0:
            raise ValueError(f"negative probability {v} for {k!r}")
        total += v
    if abs(total - 1.0) > tol:
        raise ValueError(f"probabilities sum to {total}, not 1")
