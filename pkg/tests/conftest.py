import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vqsamp.qsim import Circuit, hadamard, identity, toffoli
from vqsamp.qpip1 import prepare_instance


def reference_specs():
    """Certification reference circuits: (name, circuit, x, padding).

    Chosen so the penalty weights stay small enough that the float64
    residual of the history state sits well under 1e-9.
    """
    return [
        ("hadamard-T4", Circuit(1, 0, (hadamard(0),), (0,)), "0", 3),
        ("toffoli-T2", Circuit(2, 1, (toffoli(0, 1, 2),), (0, 2)), "10", 1),
        (
            "two-hadamards-T3",
            Circuit(2, 0, (hadamard(0), hadamard(1), identity(0)), (0, 1)),
            "11",
            0,
        ),
    ]


@pytest.fixture(scope="session")
def reference_instances():
    return [
        (name, prepare_instance(circ, x, padding_override=pad, weight_mode="numeric"))
        for name, circ, x, pad in reference_specs()
    ]


@pytest.fixture(scope="session")
def bell_like_instance():
    """H then Toffoli: accepted outputs land on {00, 11} uniformly."""
    circuit = Circuit(2, 1, (hadamard(0), toffoli(0, 1, 2)), (0, 2))
    return prepare_instance(circuit, "11", padding_override=3)


@pytest.fixture(scope="session")
def tiny_instance():
    """Single Hadamard, two clock qubits: 3-qubit register, cheap to enumerate."""
    circuit = Circuit(1, 0, (hadamard(0),), (0,))
    return prepare_instance(circuit, "0", padding_override=1)
