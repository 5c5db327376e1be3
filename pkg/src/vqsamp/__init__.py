"""Desk-scale laboratory for classically verifiable quantum sampling."""

__version__ = "0.1.0"

from .qsim import (
    Circuit,
    Gate,
    State,
    apply_gate,
    hadamard,
    identity,
    measure_xz,
    new_basis_state,
    output_distribution,
    run_circuit,
    toffoli,
    tv_distance,
)
from .hamiltonian import (
    CompileReport,
    SpectrumReport,
    WeightedHamiltonian,
    XZTerm,
    apply_hamiltonian,
    build_h_clock,
    build_h_in,
    build_h_prop,
    compile_hamiltonian,
    compute_weights,
    decompose_gate,
    expectation,
    ground_spectrum,
    history_residual,
    history_state,
)
from .energy import (
    VgsRound,
    closeness_bound,
    vgs_accept_prob_analytic,
    vgs_accept_prob_exact,
    vgs_accept_rate_mc,
    vgs_round,
)
from .qpip1 import (
    Honest,
    JointState,
    ProductStates,
    Qpip1Params,
    SampleOutcome,
    SamplingInstance,
    estimate_output_tv,
    exact_joint_distribution,
    ideal_sampler,
    prepare_instance,
    qpip1_params,
    run_qpip1,
)
from .qpip0 import (
    Abort,
    Bind,
    Break,
    MeasurementSession,
    measurement_commit,
    measurement_open,
    new_session,
    qpip0_accept_prob_exact,
    run_qpip0,
    run_qpip_naive,
    uniform_bits,
)
from .blind import (
    BlindnessResult,
    Prover,
    QHEScheme,
    RoundProtocol,
    Transcript,
    blindness_experiment,
    check_fresh_key_discipline,
    compile_blind,
    otp_qhe,
    run_protocol,
    simulate_pstar,
    transparent_qhe,
)
from .protocols import echo_protocol, qpip0_protocol
