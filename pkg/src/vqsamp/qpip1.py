"""Cut-and-choose sampling verification over many state copies.

The verifier asks the prover for M copies of the compiled history state,
energy-tests a random subset I of size m with single-shot rounds, draws
its output sample from the data register of one untested copy, and accepts
iff the test-passes Y clear the threshold m/2 - kappa*m.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import term_basis_string, vgs_accept_prob_exact, vgs_round
from .hamiltonian import CompileReport, compile_hamiltonian, history_state, padding_for
from .qsim import (
    Circuit,
    State,
    index_to_bits,
    marginal_distribution,
    measure_xz_many,
    output_distribution,
    tv_distance,
)

RUN_BUDGET_COPIES = 4096

DESK_M = 32
DESK_SMALL_M = 16
DESK_KAPPA = 0.05
DESK_PADDING_CAP = 8


@dataclass(frozen=True)
class SampleOutcome:
    """The verifier's decision bit and output sample; z is None iff Rej.

    (The single-copy naive protocol in qpip0 is the documented exception:
    its testing rounds accept without producing a sample.)
    """

    d: str
    z: str | None

    def key(self) -> tuple[str, str | None]:
        return (self.d, self.z)


REJECT = SampleOutcome("Rej", None)


@dataclass(frozen=True)
class Qpip1Params:
    M: int
    m: int
    kappa: float
    padding: int
    scale_mode: str

    def __post_init__(self):
        if self.m >= self.M:
            raise ValueError(f"tested copies m={self.m} must be < M={self.M}")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        if self.padding < 0:
            raise ValueError("padding must be non-negative")

    @property
    def threshold(self) -> float:
        return self.m / 2.0 - self.kappa * self.m

    def accepts(self, y: int) -> bool:
        return y > self.threshold


def qpip1_params(
    t_gates: int,
    lambda_sec: int,
    epsilon: float,
    scale_mode: str = "desk",
    alpha_l1: float | None = None,
    overrides: dict | None = None,
) -> Qpip1Params:
    """Protocol parameters at paper scale or desk scale.

    Paper mode evaluates M = ceil(649 T^41 lambda^2 / eps^51),
    m = ceil(T^20 lambda / eps^24) and kappa = eps^2 / (192 sum|alpha|)
    exactly (big integers); such parameter sets are reported but refuse to
    instantiate states.  Desk mode starts from runnable defaults and takes
    explicit overrides.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    overrides = dict(overrides or {})
    if scale_mode == "paper":
        if alpha_l1 is None:
            raise ValueError("paper-mode kappa needs the compiled sum of |alpha|")
        inv_eps = 1 / Fraction(epsilon)
        M = math.ceil(649 * Fraction(t_gates) ** 41 * lambda_sec**2 * inv_eps**51)
        m = math.ceil(Fraction(t_gates) ** 20 * lambda_sec * inv_eps**24)
        kappa = epsilon**2 / (192.0 * alpha_l1)
        padding = padding_for(t_gates, epsilon)
    elif scale_mode == "desk":
        M = DESK_M
        m = DESK_SMALL_M
        kappa = DESK_KAPPA
        padding = min(padding_for(t_gates, epsilon), DESK_PADDING_CAP)
    else:
        raise ValueError(f"unknown scale mode {scale_mode!r}")
    M = overrides.pop("M", M)
    m = overrides.pop("m", m)
    kappa = overrides.pop("kappa", kappa)
    padding = overrides.pop("padding", padding)
    if overrides:
        raise ValueError(f"unknown parameter overrides {sorted(overrides)}")
    return Qpip1Params(M=M, m=m, kappa=kappa, padding=padding, scale_mode=scale_mode)


# -- prover strategies -------------------------------------------------------


@dataclass(frozen=True)
class Honest:
    """Every copy is the compiled history state."""


@dataclass(frozen=True)
class ProductStates:
    """Explicit unentangled per-copy states (length must equal M)."""

    states: tuple[State, ...]


@dataclass(frozen=True)
class JointState:
    """One explicit joint state over the first ``copies`` copies, rest honest."""

    joint: State
    copies: int

    def __post_init__(self):
        if not 1 <= self.copies <= 3:
            raise ValueError("joint-state adversaries are capped at 3 copies")


ProverStrategy = Honest | ProductStates | JointState


@dataclass(frozen=True)
class SamplingInstance:
    """Compiled artifacts shared by every protocol run on (circuit, x)."""

    circuit: Circuit
    x: str
    report: CompileReport
    hist: State
    ideal: dict[str, float]

    @property
    def s(self) -> int:
        return self.report.layout.s

    @property
    def outputs(self) -> tuple[int, ...]:
        return self.circuit.outputs

    @property
    def epsilon_pad(self) -> float:
        t_padded = self.report.t_padded
        padding = t_padded - self.circuit.t_gates
        return 1.0 - (padding + 1) / (t_padded + 1)


def prepare_instance(
    circuit: Circuit,
    x: str,
    epsilon: float | None = None,
    padding_override: int | None = None,
    weight_mode: str = "auto",
) -> SamplingInstance:
    report = compile_hamiltonian(
        circuit, x, epsilon=epsilon, padding_override=padding_override, weight_mode=weight_mode
    )
    return SamplingInstance(
        circuit=circuit,
        x=x,
        report=report,
        hist=history_state(report.padded_circuit, x),
        ideal=output_distribution(circuit, x),
    )


def ideal_sampler(circuit: Circuit, x: str) -> dict[str, float]:
    """The ideal output distribution C_x the soundness experiment compares to."""
    return output_distribution(circuit, x)


# -- protocol execution ------------------------------------------------------


def _strategy_states(strategy: ProverStrategy, instance: SamplingInstance, M: int):
    """Per-copy state table plus the size of the entangled leading block."""
    if isinstance(strategy, Honest):
        return [instance.hist] * M, 0, None
    if isinstance(strategy, ProductStates):
        if len(strategy.states) != M:
            raise ValueError(f"strategy supplies {len(strategy.states)} copies, need {M}")
        for st in strategy.states:
            if st.s != instance.s:
                raise ValueError("per-copy state has wrong qubit count")
        return list(strategy.states), 0, None
    if isinstance(strategy, JointState):
        if strategy.copies > M:
            raise ValueError("joint block larger than M")
        if strategy.joint.s != strategy.copies * instance.s:
            raise ValueError("joint state has wrong qubit count")
        states = [None] * strategy.copies + [instance.hist] * (M - strategy.copies)
        return states, strategy.copies, strategy.joint
    raise TypeError(f"unknown strategy {strategy!r}")


def _z_schedule(s: int) -> str:
    return "1" * s


def _extract_output_bits(sample_bits: str, outputs: tuple[int, ...]) -> str:
    return "".join(sample_bits[w] for w in outputs)


def run_qpip1(
    strategy: ProverStrategy,
    circuit: Circuit,
    x: str,
    params: Qpip1Params,
    rng: np.random.Generator,
    instance: SamplingInstance | None = None,
) -> SampleOutcome:
    """One protocol execution: test m random copies, sample from one more.

    The verifier samples the tested set I and the output copy k up front,
    runs one energy-verification round per tested copy, Z-measures the data
    register of copy k and reads z off the circuit's output wires, then
    accepts iff the number of test passes exceeds m/2 - kappa*m.
    """
    if params.M > RUN_BUDGET_COPIES:
        raise ValueError(
            f"M={params.M} exceeds the run budget of {RUN_BUDGET_COPIES} copies; "
            "paper-scale parameters are report-only"
        )
    if instance is None:
        instance = prepare_instance(circuit, x, padding_override=params.padding)
    ham = instance.report.hamiltonian
    s = instance.s
    M, m = params.M, params.m

    order = rng.permutation(M)
    tested = set(int(i) for i in order[:m])
    k = int(order[rng.integers(m, M)])

    states, block, joint = _strategy_states(strategy, instance, M)

    accepts = 0
    z = None

    # Entangled leading block: one joint destructive measurement covers all
    # of its copies; discarded copies default to Z, whose outcomes are unread.
    block_rounds: dict[int, int] = {}
    if block:
        h_parts = []
        for copy in range(block):
            if copy in tested:
                probs = np.array([abs(a) for a, _ in ham.terms]) / ham.alpha_l1
                block_rounds[copy] = int(rng.choice(len(ham), p=probs))
                h_parts.append(term_basis_string(ham.terms[block_rounds[copy]][1], s))
            else:
                h_parts.append(_z_schedule(s))
        joint_sample = int(measure_xz_many(joint, "".join(h_parts), rng, 1)[0])
        bits = index_to_bits(joint_sample, joint.s)
        for copy, term_idx in block_rounds.items():
            alpha, term = ham.terms[term_idx]
            copy_bits = bits[copy * s : (copy + 1) * s]
            r = 1
            for q in range(s):
                if (term.support >> q) & 1 and copy_bits[q] == "1":
                    r = -r
            if math.copysign(1.0, alpha) * r == -1:
                accepts += 1
        if k < block:
            z = _extract_output_bits(bits[k * s : (k + 1) * s], instance.outputs)

    for copy in sorted(tested):
        if copy < block:
            continue
        if vgs_round(ham, states[copy], rng).accepted:
            accepts += 1

    if k >= block:
        sample = int(measure_xz_many(states[k], _z_schedule(s), rng, 1)[0])
        z = _extract_output_bits(index_to_bits(sample, s), instance.outputs)

    if params.accepts(accepts):
        return SampleOutcome("Acc", z)
    return REJECT


# -- exact enumeration oracle ------------------------------------------------


def _poisson_binomial_tail(qs: list[float], threshold: float) -> float:
    """P[sum of independent Bernoulli(q_i) > threshold]."""
    dist = np.array([1.0])
    for q in qs:
        dist = np.convolve(dist, [1.0 - q, q])
    return float(sum(p for y, p in enumerate(dist) if y > threshold))


def exact_joint_distribution(
    strategy: ProverStrategy,
    circuit: Circuit,
    x: str,
    params: Qpip1Params,
    instance: SamplingInstance | None = None,
) -> dict[tuple[str, str | None], float]:
    """Exact joint (d, z) distribution for unentangled strategies.

    Enumerates every (I, k) choice of the verifier; per-copy test passes
    are independent Bernoulli draws with exactly computed probabilities,
    and the output copy's sample distribution is its Born marginal.
    """
    if instance is None:
        instance = prepare_instance(circuit, x, padding_override=params.padding)
    if isinstance(strategy, Honest):
        states = [instance.hist] * params.M
    elif isinstance(strategy, ProductStates):
        states = list(strategy.states)
        if len(states) != params.M:
            raise ValueError("strategy size mismatch")
    else:
        raise ValueError("exact enumeration supports unentangled strategies only")
    ham = instance.report.hamiltonian

    accept_prob = {}
    z_dist = {}
    for i, st in enumerate(states):
        accept_prob[i] = vgs_accept_prob_exact(ham, st)
        z_dist[i] = marginal_distribution(st, instance.outputs)

    joint: dict[tuple[str, str | None], float] = {}
    choices = list(itertools.combinations(range(params.M), params.m))
    total = 0
    for tested in choices:
        rest = [i for i in range(params.M) if i not in tested]
        for k in rest:
            total += 1
            p_acc = _poisson_binomial_tail([accept_prob[i] for i in tested], params.threshold)
            for z, pz in z_dist[k].items():
                key = ("Acc", z)
                joint[key] = joint.get(key, 0.0) + p_acc * pz
            joint[("Rej", None)] = joint.get(("Rej", None), 0.0) + (1.0 - p_acc)
    return {key: p / total for key, p in joint.items()}


# -- total-variation harness -------------------------------------------------


@dataclass(frozen=True)
class TvEstimate:
    tv_acc_conditional: float
    accept_rate: float
    ci: float
    trials: int
    n_accepted: int

    @property
    def joint_tv(self) -> float:
        """TV distance of (d, z) from (d, z_ideal); rejects contribute 0."""
        return self.accept_rate * self.tv_acc_conditional

    def to_json_dict(self) -> dict:
        return {
            "tv_acc_conditional": self.tv_acc_conditional,
            "accept_rate": self.accept_rate,
            "ci": self.ci,
            "trials": self.trials,
            "n_accepted": self.n_accepted,
            "joint_tv": self.joint_tv,
        }


def estimate_output_tv(
    strategy: ProverStrategy,
    circuit: Circuit,
    x: str,
    params: Qpip1Params,
    trials: int,
    rng: np.random.Generator,
    instance: SamplingInstance | None = None,
    confidence: float = 0.95,
) -> TvEstimate:
    """Monte Carlo estimate of the distance to the ideal experiment.

    Reports the TV distance of the accepted-output histogram from the ideal
    sampler, the acceptance rate, and a Dvoretzky-Kiefer-Wolfowitz-style
    confidence radius sqrt(ln(2/delta) / (2 N_accepted)).
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if instance is None:
        instance = prepare_instance(circuit, x, padding_override=params.padding)
    counts: dict[str, int] = {}
    accepted = 0
    for _ in range(trials):
        outcome = run_qpip1(strategy, circuit, x, params, rng, instance=instance)
        if outcome.d == "Acc":
            accepted += 1
            counts[outcome.z] = counts.get(outcome.z, 0) + 1
    accept_rate = accepted / trials
    if accepted:
        empirical = {z: c / accepted for z, c in counts.items()}
        tv = tv_distance(empirical, instance.ideal)
        ci = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * accepted))
    else:
        tv = 0.0
        ci = 1.0
    return TvEstimate(
        tv_acc_conditional=tv,
        accept_rate=accept_rate,
        ci=ci,
        trials=trials,
        n_accepted=accepted,
    )
