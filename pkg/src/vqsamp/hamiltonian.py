"""X-Z local Hamiltonian compilation of padded circuits, and spectra.

A compiled instance is ``H = H_in + J_clock * H_clock + J_prop * H_prop``
over data wires ``[0, n+m)`` and a unary clock register on wires
``[n+m, n+m+T')``.  The history state (the uniform superposition of all
``T'+1`` partial evolutions, each tagged with its unary clock value) is the
unique ground state with eigenvalue 0, and the weights are chosen so all
orthogonal states sit at energy >= 3/4.

All operators here are real linear combinations of tensor products of
Pauli X and Z (no Y), stored as bitmask pairs.  The X-Z expansions of the
propagation terms are chosen to coincide exactly with their projector
counterparts on the legal (unary) clock subspace.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .qsim import (
    HADAMARD,
    IDENTITY,
    MAX_QUBITS,
    TOFFOLI,
    Circuit,
    Gate,
    State,
    apply_gate,
    new_basis_state,
)

DENSE_CAP_QUBITS = 13
COMPILE_CAP_QUBITS = 64
_KERNEL_TOL = 1e-8


class SolverError(RuntimeError):
    """Raised when an iterative eigensolver fails to converge."""


@dataclass(frozen=True)
class XZTerm:
    """A product of Pauli X and Z factors encoded as two disjoint bitmasks."""

    xmask: int
    zmask: int

    def __post_init__(self):
        if self.xmask & self.zmask:
            raise ValueError("X and Z masks overlap: pure X-Z terms carry no Y factor")
        if self.xmask < 0 or self.zmask < 0:
            raise ValueError("masks must be non-negative")

    @property
    def support(self) -> int:
        return self.xmask | self.zmask

    @property
    def locality(self) -> int:
        return bin(self.support).count("1")

    def label(self, s: int) -> str:
        chars = []
        for q in range(s):
            if (self.xmask >> q) & 1:
                chars.append("X")
            elif (self.zmask >> q) & 1:
                chars.append("Z")
            else:
                chars.append("I")
        return "".join(chars)


IDENTITY_TERM = XZTerm(0, 0)


def _merge_terms(entries) -> tuple[tuple[float, XZTerm], ...]:
    acc: dict[XZTerm, float] = {}
    for alpha, term in entries:
        acc[term] = acc.get(term, 0.0) + float(alpha)
    merged = [(a, t) for t, a in acc.items() if a != 0.0]
    merged.sort(key=lambda e: (e[1].zmask, e[1].xmask))
    return tuple(merged)


@dataclass(frozen=True)
class WeightedHamiltonian:
    """A real-weighted sum of X-Z terms on ``s`` qubits, canonically merged."""

    s: int
    terms: tuple[tuple[float, XZTerm], ...]
    alpha_l1: float = field(init=False)

    def __post_init__(self):
        for _, t in self.terms:
            if t.support >> self.s:
                raise ValueError(f"term {t} exceeds {self.s} qubits")
        object.__setattr__(self, "alpha_l1", float(sum(abs(a) for a, _ in self.terms)))

    @classmethod
    def from_terms(cls, s: int, entries, merge: bool = True) -> "WeightedHamiltonian":
        """Build from (alpha, term) pairs; ``merge=False`` keeps duplicates.

        The unmerged form exists for representation-robustness checks only;
        every builder in this module produces the canonical merged form.
        """
        if merge:
            return cls(s, _merge_terms(entries))
        return cls(s, tuple((float(a), t) for a, t in entries if a != 0.0))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def alpha_max(self) -> float:
        return max((abs(a) for a, _ in self.terms), default=0.0)

    @property
    def max_locality(self) -> int:
        return max((t.locality for _, t in self.terms), default=0)

    def scaled(self, factor: float) -> "WeightedHamiltonian":
        return WeightedHamiltonian.from_terms(
            self.s, ((factor * a, t) for a, t in self.terms)
        )

    def __add__(self, other: "WeightedHamiltonian") -> "WeightedHamiltonian":
        if other.s != self.s:
            raise ValueError("qubit counts differ")
        return WeightedHamiltonian.from_terms(self.s, self.terms + other.terms)

    # -- application ------------------------------------------------------

    def z_signs(self, zmask: int, dim: int) -> np.ndarray:
        idx = np.arange(dim, dtype=np.uint64)
        parity = np.bitwise_count(idx & np.uint64(zmask)) & 1
        return 1.0 - 2.0 * parity

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free H @ vec via bit flips (X) and sign flips (Z)."""
        vec = np.asarray(vec)
        dim = 1 << self.s
        if vec.shape != (dim,):
            raise ValueError(f"vector has shape {vec.shape}, expected ({dim},)")
        out = np.zeros(dim, dtype=np.result_type(vec.dtype, np.float64))
        idx = np.arange(dim)
        for alpha, t in self.terms:
            w = vec if t.zmask == 0 else vec * self.z_signs(t.zmask, dim)
            if t.xmask:
                w = w[idx ^ t.xmask]
            out += alpha * w
        return out

    def diagonal(self) -> np.ndarray:
        """Exact diagonal; requires every term to be X-free."""
        if any(t.xmask for _, t in self.terms):
            raise ValueError("Hamiltonian has off-diagonal (X) terms")
        dim = 1 << self.s
        diag = np.zeros(dim)
        for alpha, t in self.terms:
            diag += alpha * self.z_signs(t.zmask, dim)
        return diag

    def to_dense(self) -> np.ndarray:
        if self.s > DENSE_CAP_QUBITS:
            raise ValueError(f"dense form capped at {DENSE_CAP_QUBITS} qubits")
        dim = 1 << self.s
        idx = np.arange(dim)
        mat = np.zeros((dim, dim))
        for alpha, t in self.terms:
            vals = alpha * (self.z_signs(t.zmask, dim) if t.zmask else np.ones(dim))
            mat[idx ^ t.xmask, idx] += vals
        return mat

    def expectation(self, state: State) -> float:
        """<state| H |state>; raises if the imaginary residue exceeds 1e-10."""
        if state.s != self.s:
            raise ValueError("state and Hamiltonian qubit counts differ")
        val = np.vdot(state.amps, self.apply(state.amps))
        if abs(val.imag) > 1e-10:
            raise ValueError(f"expectation has imaginary residue {val.imag}")
        return float(val.real)


def apply_hamiltonian(ham: WeightedHamiltonian, vec: np.ndarray) -> np.ndarray:
    return ham.apply(vec)


def expectation(ham: WeightedHamiltonian, state: State) -> float:
    return ham.expectation(state)


# -- serialization ---------------------------------------------------------


def serialize_hamiltonian(ham: WeightedHamiltonian) -> str:
    lines = [f"{alpha:.17g}\t{term.label(ham.s)}" for alpha, term in ham.terms]
    return "\n".join(lines) + "\n"


def parse_hamiltonian(text: str) -> WeightedHamiltonian:
    entries = []
    s = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            alpha_str, label = line.split("\t")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: expected 'alpha TAB pauli'") from exc
        if s is None:
            s = len(label)
        elif len(label) != s:
            raise ValueError(f"line {lineno}: pauli string length differs")
        xmask = zmask = 0
        for q, ch in enumerate(label):
            if ch == "X":
                xmask |= 1 << q
            elif ch == "Z":
                zmask |= 1 << q
            elif ch != "I":
                raise ValueError(f"line {lineno}: invalid pauli char {ch!r}")
        entries.append((float(alpha_str), XZTerm(xmask, zmask)))
    if s is None:
        raise ValueError("empty Hamiltonian text")
    return WeightedHamiltonian.from_terms(s, entries)


# -- gate decomposition and the three component Hamiltonians ---------------


def decompose_gate(gate: Gate) -> list[tuple[float, XZTerm]]:
    """Exact X-Z expansion of a (Hermitian) gate's unitary matrix.

    The masks refer to the gate's own wire indices, so the returned terms
    drop straight into a Hamiltonian over the full register.
    """
    if gate.kind == IDENTITY:
        return [(1.0, IDENTITY_TERM)]
    if gate.kind == HADAMARD:
        q = gate.wires[0]
        return [(_sqrt_half(), XZTerm(1 << q, 0)), (_sqrt_half(), XZTerm(0, 1 << q))]
    if gate.kind == TOFFOLI:
        a, b, c = gate.wires
        za, zb, xc = 1 << a, 1 << b, 1 << c
        # |11><11| (x) X + (I - |11><11|) (x) I with |11><11| expanded in Z.
        return [
            (0.75, IDENTITY_TERM),
            (0.25, XZTerm(0, za)),
            (0.25, XZTerm(0, zb)),
            (-0.25, XZTerm(0, za | zb)),
            (0.25, XZTerm(xc, 0)),
            (-0.25, XZTerm(xc, za)),
            (-0.25, XZTerm(xc, zb)),
            (0.25, XZTerm(xc, za | zb)),
        ]
    raise ValueError(f"unsupported gate kind {gate.kind!r}")


def _sqrt_half() -> float:
    return 1.0 / math.sqrt(2.0)


def _mul_disjoint(lhs, rhs):
    """Product of two X-Z term sums with disjoint qubit supports."""
    out = []
    for a1, t1 in lhs:
        for a2, t2 in rhs:
            if t1.support & t2.support:
                raise ValueError("term supports overlap; product would leave X-Z algebra")
            out.append((a1 * a2, XZTerm(t1.xmask | t2.xmask, t1.zmask | t2.zmask)))
    return out


@dataclass(frozen=True)
class Layout:
    """Wire map: data wires [0, n+m), clock wires [n+m, n+m+t_padded)."""

    n: int
    m: int
    t_padded: int

    @property
    def data_width(self) -> int:
        return self.n + self.m

    @property
    def s(self) -> int:
        return self.n + self.m + self.t_padded

    def clock_wire(self, t: int) -> int:
        """Global wire of clock qubit t, for t in 1..t_padded."""
        if not 1 <= t <= self.t_padded:
            raise ValueError(f"clock index {t} outside 1..{self.t_padded}")
        return self.n + self.m + t - 1


def build_h_in(x: str, n: int, m: int, t_padded: int) -> WeightedHamiltonian:
    """Input-check Hamiltonian: penalizes wrong inputs/ancillas at time 0.

    X-Z form (1/4)(I - (-1)^{x_i} Z_i)(I + Z_c1) per input wire plus
    (1/4)(I - Z_{n+i})(I + Z_c1) per ancilla wire; equal as a matrix to the
    projector form sum_i (I - |x_i><x_i|) (x) |0><0|_c1.
    """
    if len(x) != n:
        raise ValueError(f"input length {len(x)} != n = {n}")
    if n + m == 0:
        raise ValueError("empty data register")
    layout = Layout(n, m, t_padded)
    zc1 = 1 << layout.clock_wire(1)
    entries = []
    for i in range(n + m):
        sign = -1.0 if (i < n and x[i] == "1") else 1.0
        zi = 1 << i
        entries += [
            (0.25, IDENTITY_TERM),
            (-0.25 * sign, XZTerm(0, zi)),
            (0.25, XZTerm(0, zc1)),
            (-0.25 * sign, XZTerm(0, zi | zc1)),
        ]
    return WeightedHamiltonian.from_terms(layout.s, entries)


def build_h_clock(t_padded: int, layout: Layout | None = None) -> WeightedHamiltonian:
    """Clock-validity Hamiltonian: counts '01' patterns in the clock register.

    Equal as a matrix to sum_{t=1}^{T'-1} |01><01|_{t,t+1}; every unary
    state 1^t 0^{T'-t} is in its kernel.
    """
    if t_padded < 1:
        raise ValueError("need at least one clock qubit")
    layout = layout or Layout(0, 0, t_padded)
    entries = []
    z1 = 1 << layout.clock_wire(1)
    zT = 1 << layout.clock_wire(t_padded)
    entries.append((0.25, XZTerm(0, z1)))
    entries.append((-0.25, XZTerm(0, zT)))
    for t in range(1, t_padded):
        za = 1 << layout.clock_wire(t)
        zb = 1 << layout.clock_wire(t + 1)
        entries.append((0.25, IDENTITY_TERM))
        entries.append((-0.25, XZTerm(0, za | zb)))
    return WeightedHamiltonian.from_terms(layout.s, entries)


def _clock_factor(plus: int | None = None, minus: int | None = None):
    """Expand products of (I + Z_plus)/(I - Z_minus) clock projector factors."""
    factors = []
    if minus is not None:
        factors.append([(1.0, IDENTITY_TERM), (-1.0, XZTerm(0, 1 << minus))])
    if plus is not None:
        factors.append([(1.0, IDENTITY_TERM), (1.0, XZTerm(0, 1 << plus))])
    out = [(1.0, IDENTITY_TERM)]
    for f in factors:
        out = _mul_disjoint(out, f)
    return out


def build_h_prop(circuit_padded: Circuit, layout: Layout | None = None) -> WeightedHamiltonian:
    """Propagation Hamiltonian enforcing gate-by-gate evolution.

    Each time step contributes an X-Z form that equals the hopping operator
    (1/2)(|t><t| + |t-1><t-1|) - (1/2)(U_t (x) |t><t-1| + h.c.) after
    restriction to the legal clock subspace.  The boundary steps use
    two-local clock factors, interior steps three-local ones.
    """
    t_padded = circuit_padded.t_gates
    if t_padded < 1:
        raise ValueError("padded circuit has no gates")
    layout = layout or Layout(circuit_padded.n, circuit_padded.m, t_padded)
    entries = []
    for t in range(1, t_padded + 1):
        gate_terms = decompose_gate(circuit_padded.gates[t - 1])
        xt = [(1.0, XZTerm(1 << layout.clock_wire(t), 0))]
        if t_padded == 1:
            diag = [(0.5, IDENTITY_TERM)]
            hop = _mul_disjoint([(0.5 * a, term) for a, term in gate_terms], xt)
        elif t == 1:
            factor = _clock_factor(plus=layout.clock_wire(2))
            diag = [(0.25 * a, term) for a, term in factor]
            hop = _mul_disjoint(
                [(0.25 * a, term) for a, term in _mul_disjoint(gate_terms, factor)], xt
            )
        elif t == t_padded:
            factor = _clock_factor(minus=layout.clock_wire(t - 1))
            diag = [(0.25 * a, term) for a, term in factor]
            hop = _mul_disjoint(
                [(0.25 * a, term) for a, term in _mul_disjoint(gate_terms, factor)], xt
            )
        else:
            factor = _clock_factor(minus=layout.clock_wire(t - 1), plus=layout.clock_wire(t + 1))
            diag = [(0.125 * a, term) for a, term in factor]
            hop = _mul_disjoint(
                [(0.125 * a, term) for a, term in _mul_disjoint(gate_terms, factor)], xt
            )
        entries += diag
        entries += [(-a, term) for a, term in hop]
    return WeightedHamiltonian.from_terms(layout.s, entries)


# -- weight computation (projection-lemma constants) ------------------------


def _min_nonzero_eigenvalue(ham: WeightedHamiltonian) -> float:
    if ham.s > DENSE_CAP_QUBITS:
        raise ValueError("numeric weight mode is infeasible above the dense-size cap")
    if all(t.xmask == 0 for _, t in ham.terms):
        eigs = np.sort(ham.diagonal())
    else:
        eigs = scipy.linalg.eigvalsh(ham.to_dense())
    nonzero = eigs[np.abs(eigs) > _KERNEL_TOL]
    if nonzero.size == 0:
        raise ValueError("Hamiltonian has no nonzero eigenvalue")
    return float(nonzero.min())


def _lemma_weight(norm_bound: float, lam: float) -> float:
    return (8.0 * norm_bound**2 + 2.0 * norm_bound) / lam


def input_weight(t_padded: int) -> float:
    """Weight on H_in making wrong-input history states cost >= 1.

    A history state assembled from a wrong input or dirty ancilla lies in
    the kernel of both H_clock and H_prop, and H_in only sees it through
    its time-0 component, whose weight is 1/(T'+1).  Scaling the input
    penalty by T'+1 restores a unit energy for every such state, which is
    what the 3/4 spectral-gap target requires.
    """
    return float(t_padded + 1)


def compute_weights(
    h_in: WeightedHamiltonian,
    h_clock: WeightedHamiltonian,
    h_prop: WeightedHamiltonian,
    layout: Layout,
    mode: str = "numeric",
    j_in: float | None = None,
) -> tuple[float, float]:
    """Penalty weights (J_clock, J_prop) from the projection-lemma formula
    J = (8 ||H1||^2 + 2 ||H1||) / lambda(H2 restricted off its kernel).

    Analytic mode uses closed-form bounds: ||J_in H_in|| <= J_in (n+m),
    lambda_clock = 1, ||J_in H_in + J_clock H_clock|| <= J_in (n+m) +
    J_clock (T'-1), and the path-graph spectrum lambda_prop =
    1 - cos(pi/(T'+1)).  Numeric mode instead computes the restricted
    minimum eigenvalues (and, since both operators are diagonal, the exact
    norm of J_in H_in + J_clock H_clock), which keeps the weights small
    enough for well-conditioned spectra.
    """
    t_padded = layout.t_padded
    if j_in is None:
        j_in = input_weight(t_padded)
    b_in = j_in * float(layout.data_width)
    if mode == "analytic":
        lam_clock = 1.0
        j_clock = _lemma_weight(b_in, lam_clock)
        b_mid = b_in + j_clock * max(t_padded - 1, 0)
        lam_prop = 1.0 - math.cos(math.pi / (t_padded + 1))
        return j_clock, _lemma_weight(b_mid, lam_prop)
    if mode == "numeric":
        lam_clock = _min_nonzero_eigenvalue(h_clock) if len(h_clock) else 1.0
        j_clock = _lemma_weight(b_in, lam_clock)
        mid_diag = j_in * h_in.diagonal() + j_clock * h_clock.diagonal()
        b_mid = float(np.abs(mid_diag).max())
        lam_prop = _min_nonzero_eigenvalue(h_prop)
        return j_clock, _lemma_weight(b_mid, lam_prop)
    raise ValueError(f"unknown weight mode {mode!r}")


# -- compilation ------------------------------------------------------------


@dataclass(frozen=True)
class CompileReport:
    """Compiled Hamiltonian plus the measurements the certification needs."""

    hamiltonian: WeightedHamiltonian = field(repr=False)
    j_in: float
    j_clock: float
    j_prop: float
    t_padded: int
    layout: Layout
    max_locality: int
    term_count: int
    alpha_max: float
    alpha_l1: float
    weight_mode: str
    components: tuple[tuple[float, WeightedHamiltonian], ...] = field(repr=False)
    padded_circuit: Circuit = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "j_in": self.j_in,
            "j_clock": self.j_clock,
            "j_prop": self.j_prop,
            "t_padded": self.t_padded,
            "layout": {"n": self.layout.n, "m": self.layout.m, "s": self.layout.s},
            "max_locality": self.max_locality,
            "term_count": self.term_count,
            "terms_per_gate": self.term_count / self.t_padded,
            "alpha_max": self.alpha_max,
            "alpha_l1": self.alpha_l1,
            "weight_mode": self.weight_mode,
        }


def padding_for(t_gates: int, epsilon: float) -> int:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    return math.ceil(6 * t_gates / epsilon)


def compile_hamiltonian(
    circuit: Circuit,
    x: str,
    epsilon: float | None = None,
    padding_override: int | None = None,
    weight_mode: str = "auto",
) -> CompileReport:
    """Pad the circuit, build H_in + J_clock H_clock + J_prop H_prop.

    Padding appends ceil(6 T / epsilon) identity gates unless overridden.
    ``weight_mode='auto'`` uses numeric weights whenever the register fits
    the dense cap and analytic bounds otherwise.
    """
    if padding_override is not None:
        if padding_override < 0:
            raise ValueError("padding must be non-negative")
        padding = padding_override
    else:
        if epsilon is None:
            raise ValueError("need epsilon or an explicit padding override")
        padding = padding_for(circuit.t_gates, epsilon)
    padded = circuit.padded(padding)
    t_padded = padded.t_gates
    if t_padded < 1:
        raise ValueError("padded circuit must contain at least one gate")
    layout = Layout(circuit.n, circuit.m, t_padded)
    # Term lists stay O(T'), so compilation tolerates registers far beyond
    # the statevector cap; only state-level operations enforce MAX_QUBITS.
    if layout.s > COMPILE_CAP_QUBITS:
        raise ValueError(
            f"compiled register needs {layout.s} qubits, exceeding the "
            f"{COMPILE_CAP_QUBITS}-qubit compile cap"
        )
    if weight_mode == "auto":
        weight_mode = "numeric" if layout.s <= DENSE_CAP_QUBITS else "analytic"
    h_in = build_h_in(x, circuit.n, circuit.m, t_padded)
    h_clock = build_h_clock(t_padded, layout)
    h_prop = build_h_prop(padded, layout)
    j_in = input_weight(t_padded)
    j_clock, j_prop = compute_weights(
        h_in, h_clock, h_prop, layout, mode=weight_mode, j_in=j_in
    )
    total = h_in.scaled(j_in) + h_clock.scaled(j_clock) + h_prop.scaled(j_prop)
    if total.max_locality > 6:
        raise AssertionError(f"compiled locality {total.max_locality} exceeds 6")
    return CompileReport(
        hamiltonian=total,
        j_in=j_in,
        j_clock=j_clock,
        j_prop=j_prop,
        t_padded=t_padded,
        layout=layout,
        max_locality=total.max_locality,
        term_count=len(total),
        alpha_max=total.alpha_max,
        alpha_l1=total.alpha_l1,
        weight_mode=weight_mode,
        components=((j_in, h_in), (j_clock, h_clock), (j_prop, h_prop)),
        padded_circuit=padded,
    )


# -- history state and spectra ----------------------------------------------


def history_state(circuit_padded: Circuit, x: str) -> State:
    """Uniform superposition of all T'+1 partial evolutions with unary clock."""
    if len(x) != circuit_padded.n:
        raise ValueError(f"input length {len(x)} != n = {circuit_padded.n}")
    t_padded = circuit_padded.t_gates
    width = circuit_padded.width
    s = width + t_padded
    if s > MAX_QUBITS:
        raise ValueError(f"history state needs {s} qubits, exceeding the cap")
    amps = np.zeros(1 << s, dtype=np.complex128)
    norm = 1.0 / math.sqrt(t_padded + 1)
    stage = new_basis_state(width, x + "0" * circuit_padded.m)
    block = 1 << width
    for t in range(t_padded + 1):
        if t > 0:
            stage = apply_gate(stage, circuit_padded.gates[t - 1])
        clock_pattern = (1 << t) - 1
        offset = clock_pattern << width
        amps[offset : offset + block] = norm * stage.amps
    return State(s, amps)


def history_residual(
    components: tuple[tuple[float, WeightedHamiltonian], ...], state: State
) -> float:
    """|| H |state> || evaluated component-wise.

    Applying each unweighted component before scaling keeps the floating
    cancellation at unit scale, so the residual of an exact kernel vector
    stays near machine epsilon times the weights instead of epsilon times
    the summed coefficient magnitudes.
    """
    total = np.zeros(state.dim, dtype=np.complex128)
    for weight, ham in components:
        total += weight * ham.apply(state.amps)
    return float(np.linalg.norm(total))


@dataclass(frozen=True)
class SpectrumReport:
    lambda0: float
    gap: float | None
    hist_residual: float | None
    method: str
    eigenvalues: tuple[float, ...]
    solver_tol: float

    def to_json_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "gap": self.gap,
            "hist_residual": self.hist_residual,
            "method": self.method,
            "eigenvalues": list(self.eigenvalues),
            "solver_tol": self.solver_tol,
        }


def ground_spectrum(
    ham: WeightedHamiltonian,
    k: int = 4,
    method: str = "dense",
    reference: State | None = None,
    components: tuple[tuple[float, WeightedHamiltonian], ...] | None = None,
    tol: float = 1e-8,
) -> SpectrumReport:
    """The k smallest eigenvalues, the spectral gap, and the residual of an
    optional reference state (computed component-wise when components are
    supplied, e.g. from a CompileReport)."""
    dim = 1 << ham.s
    k = max(1, min(k, dim - 1))
    if method == "dense":
        if ham.s > DENSE_CAP_QUBITS:
            raise ValueError(f"dense solver capped at {DENSE_CAP_QUBITS} qubits")
        eigs = scipy.linalg.eigh(
            ham.to_dense(), eigvals_only=True, subset_by_index=[0, k - 1]
        )
        solver_tol = float(np.finfo(float).eps * max(1.0, ham.alpha_l1) * math.sqrt(dim))
    elif method == "iterative":
        op = scipy.sparse.linalg.LinearOperator(
            (dim, dim), matvec=ham.apply, dtype=np.float64
        )
        try:
            eigs = scipy.sparse.linalg.eigsh(
                op, k=k, which="SA", tol=tol, return_eigenvectors=False
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise SolverError(f"iterative eigensolver did not converge: {exc}") from exc
        eigs = np.sort(eigs)
        solver_tol = float(tol * max(1.0, ham.alpha_l1))
    else:
        raise ValueError(f"unknown method {method!r}")
    residual = None
    if reference is not None:
        comps = components if components is not None else ((1.0, ham),)
        residual = history_residual(comps, reference)
    return SpectrumReport(
        lambda0=float(eigs[0]),
        gap=float(eigs[1] - eigs[0]) if k >= 2 else None,
        hist_residual=residual,
        method=method,
        eigenvalues=tuple(float(e) for e in eigs),
        solver_tol=solver_tol,
    )


def report_to_json(report) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=2)
