import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqsamp.qsim import (
    Circuit,
    Gate,
    State,
    apply_gate,
    bits_to_index,
    hadamard,
    identity,
    index_to_bits,
    marginal_distribution,
    measure_xz,
    measure_xz_many,
    new_basis_state,
    output_distribution,
    rotate_for_xz,
    run_circuit,
    toffoli,
    tv_distance,
    validate_distribution,
)

RNG = np.random.default_rng(20240811)


def random_state(s, rng=RNG):
    amps = rng.normal(size=2**s) + 1j * rng.normal(size=2**s)
    return State(s, amps / np.linalg.norm(amps))


class TestBasisStates:
    def test_single_zero(self):
        st_ = new_basis_state(1, "0")
        assert st_.amps[0] == 1.0 and st_.amps[1] == 0.0

    def test_two_qubits_little_endian(self):
        # "10": qubit 0 is 1, qubit 1 is 0 -> index 1
        st_ = new_basis_state(2, "10")
        assert st_.amps[1] == 1.0

    def test_all_ones_is_last_index(self):
        st_ = new_basis_state(3, "111")
        assert st_.amps[-1] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            new_basis_state(2, "101")

    def test_bit_roundtrip(self):
        for idx in range(16):
            assert bits_to_index(index_to_bits(idx, 4)) == idx


class TestGates:
    def test_hadamard_on_zero(self):
        out = apply_gate(new_basis_state(1, "0"), hadamard(0))
        np.testing.assert_allclose(out.amps, np.array([1, 1]) / np.sqrt(2), atol=1e-12)

    def test_toffoli_flips_target(self):
        # |110>: controls (wires 0,1) set, target wire 2 flips -> |111>
        out = apply_gate(new_basis_state(3, "110"), toffoli(0, 1, 2))
        assert out.amps[bits_to_index("111")] == 1.0

    def test_toffoli_idles_without_controls(self):
        out = apply_gate(new_basis_state(3, "100"), toffoli(0, 1, 2))
        assert out.amps[bits_to_index("100")] == 1.0

    def test_identity(self):
        st_ = random_state(3)
        np.testing.assert_array_equal(apply_gate(st_, identity(1)).amps, st_.amps)

    def test_wire_out_of_range(self):
        with pytest.raises(ValueError):
            apply_gate(new_basis_state(1, "0"), hadamard(1))

    def test_bad_gate_kinds(self):
        with pytest.raises(ValueError):
            Gate("H", (0, 1))
        with pytest.raises(ValueError):
            Gate("T", (0, 1, 1))
        with pytest.raises(ValueError):
            Gate("Q", (0,))

    def test_unitarity_many_random_pairs(self):
        # 10^4 random gate/state pairs keep the norm at 1 +- 1e-12.
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(10_000):
            s = int(rng.integers(3, 6))
            st_ = random_state(s, rng)
            kind = rng.integers(0, 3)
            if kind == 0:
                g = hadamard(int(rng.integers(0, s)))
            elif kind == 1:
                wires = rng.choice(s, size=3, replace=False)
                g = toffoli(*map(int, wires))
            else:
                g = identity(int(rng.integers(0, s)))
            worst = max(worst, abs(np.linalg.norm(apply_gate(st_, g).amps) - 1.0))
        assert worst <= 1e-12


class TestRunCircuit:
    def test_empty_circuit(self):
        circ = Circuit(1, 0, (), (0,))
        out = run_circuit(circ, "1")
        assert out.amps[1] == 1.0

    def test_single_hadamard(self):
        circ = Circuit(1, 0, (hadamard(0),), (0,))
        np.testing.assert_allclose(
            run_circuit(circ, "0").amps, np.array([1, 1]) / np.sqrt(2), atol=1e-12
        )

    def test_hadamard_then_toffoli(self):
        # Hand-multiplied 8x8 product: H(0) then Toffoli(0,1,2) on x="01", m=1
        # gives (|010> + |111>)/sqrt(2) in wire order (0,1,2).
        circ = Circuit(2, 1, (hadamard(0), toffoli(0, 1, 2)), (2,))
        out = run_circuit(circ, "01")
        expect = np.zeros(8, dtype=complex)
        expect[bits_to_index("010")] = 1 / np.sqrt(2)
        expect[bits_to_index("111")] = 1 / np.sqrt(2)
        np.testing.assert_allclose(out.amps, expect, atol=1e-12)

    def test_input_length_checked(self):
        with pytest.raises(ValueError):
            run_circuit(Circuit(2, 0, (), (0,)), "1")


class TestOutputDistribution:
    def test_trivial(self):
        assert output_distribution(Circuit(1, 0, (), (0,)), "0") == {"0": 1.0}

    def test_hadamard_uniform(self):
        d = output_distribution(Circuit(1, 0, (hadamard(0),), (0,)), "0")
        assert d["0"] == pytest.approx(0.5) and d["1"] == pytest.approx(0.5)

    def test_marginal_of_entangled_state(self):
        circ = Circuit(2, 1, (hadamard(0), toffoli(0, 1, 2)), (2,))
        d = output_distribution(circ, "01")
        assert d["0"] == pytest.approx(0.5) and d["1"] == pytest.approx(0.5)

    def test_output_ordering_follows_wire_list(self):
        circ = Circuit(2, 0, (), (1, 0))
        assert output_distribution(circ, "10") == {"01": 1.0}

    def test_distribution_is_valid(self):
        circ = Circuit(2, 1, (hadamard(0), toffoli(0, 1, 2), hadamard(1)), (0, 1, 2))
        validate_distribution(output_distribution(circ, "11"))


class TestMeasureXZ:
    def test_z_basis_deterministic(self):
        rng = np.random.default_rng(0)
        assert measure_xz(new_basis_state(1, "0"), "1", rng) == "0"

    def test_plus_state_in_x_basis(self):
        rng = np.random.default_rng(0)
        plus = apply_gate(new_basis_state(1, "0"), hadamard(0))
        for _ in range(20):
            assert measure_xz(plus, "0", rng) == "0"

    def test_minus_state_reports_one(self):
        minus = apply_gate(new_basis_state(1, "1"), hadamard(0))
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert measure_xz(minus, "0", rng) == "1"

    def test_zero_state_x_basis_is_fair(self):
        rng = np.random.default_rng(42)
        n = 100_000
        ones = np.count_nonzero(measure_xz_many(new_basis_state(1, "0"), "0", rng, n))
        sigma = np.sqrt(n * 0.25)
        assert abs(ones - n / 2) <= 3 * sigma

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            measure_xz(new_basis_state(2, "00"), "0", np.random.default_rng(0))

    def test_sampling_consistency_with_born_marginal(self):
        # Z-basis histogram converges to the output distribution (3 sigma).
        circ = Circuit(2, 1, (hadamard(0), toffoli(0, 1, 2)), (0, 2))
        state = run_circuit(circ, "11")
        rng = np.random.default_rng(11)
        n = 100_000
        samples = measure_xz_many(state, "1" * 3, rng, n)
        ideal = marginal_distribution(state, circ.outputs)
        for key, p in ideal.items():
            mask = np.ones(n, dtype=bool)
            for j, w in enumerate(circ.outputs):
                mask &= ((samples >> w) & 1) == int(key[j])
            count = int(mask.sum())
            assert abs(count - n * p) <= 3 * np.sqrt(n * p * (1 - p)) + 1

    def test_basis_change_equivalence(self):
        # X-basis stats on a state match Z-basis stats on its H-rotation.
        rng = np.random.default_rng(5)
        state = random_state(2, rng)
        rotated = apply_gate(apply_gate(state, hadamard(0)), hadamard(1))
        n = 100_000
        a = measure_xz_many(state, "00", np.random.default_rng(1), n)
        b = measure_xz_many(rotated, "11", np.random.default_rng(2), n)
        for idx in range(4):
            ca, cb = np.sum(a == idx), np.sum(b == idx)
            sigma = np.sqrt(n * 0.25) + 1
            assert abs(ca - cb) <= 3 * np.sqrt(2) * sigma

    def test_rotation_only_touches_x_qubits(self):
        state = random_state(3)
        np.testing.assert_array_equal(rotate_for_xz(state, "111").amps, state.amps)


class TestTvDistance:
    def test_identical(self):
        assert tv_distance({"0": 1.0}, {"0": 1.0}) == 0.0

    def test_disjoint(self):
        assert tv_distance({"0": 1.0}, {"1": 1.0}) == 1.0

    def test_direct_formula(self):
        assert tv_distance({"0": 0.75, "1": 0.25}, {"0": 0.5, "1": 0.5}) == pytest.approx(0.25)

    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=6),
        st.lists(st.floats(0, 1), min_size=1, max_size=6),
    )
    @settings(max_examples=200, deadline=None)
    def test_bounds_and_symmetry(self, ws1, ws2):
        def normalize(ws):
            total = sum(ws) or 1.0
            return {format(i, "b"): w / total for i, w in enumerate(ws)}

        p, q = normalize(ws1), normalize(ws2)
        d = tv_distance(p, q)
        assert -1e-12 <= d <= 1.0 + 1e-12
        assert d == pytest.approx(tv_distance(q, p))


class TestStateValidation:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            State(1, np.array([1.0, 1.0]))

    def test_qubit_cap(self):
        with pytest.raises(ValueError):
            State(27, np.zeros(2))

    def test_circuit_validation(self):
        with pytest.raises(ValueError):
            Circuit(1, 0, (hadamard(1),), (0,))
        with pytest.raises(ValueError):
            Circuit(2, 0, (), (0, 0))
        with pytest.raises(ValueError):
            Circuit(2, 0, (), (2,))
