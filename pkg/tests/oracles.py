"""Independent dense oracles used to check the library's constructions.

Everything here is built from explicit projectors and Kronecker products,
deliberately avoiding the bitmask code paths under test.
"""

import numpy as np

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])
H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def kron_le(ops):
    """Kron over qubits in little-endian order (ops[0] acts on qubit 0)."""
    out = np.array([[1.0]])
    for op in ops:
        out = np.kron(op, out)
    return out


def single(op, q, s):
    ops = [I2] * s
    ops[q] = op
    return kron_le(ops)


def gate_unitary(gate, s):
    if gate.kind == "H":
        return single(H2, gate.wires[0], s)
    if gate.kind == "I":
        return np.eye(2**s)
    a, b, c = gate.wires
    dim = 2**s
    mat = np.zeros((dim, dim))
    for col in range(dim):
        row = col ^ (1 << c) if ((col >> a) & 1) and ((col >> b) & 1) else col
        mat[row, col] = 1.0
    return mat


def term_matrix(term, s):
    ops = [I2] * s
    for q in range(s):
        if (term.xmask >> q) & 1:
            ops[q] = X
        elif (term.zmask >> q) & 1:
            ops[q] = Z
    return kron_le(ops)


def dense_from_terms(terms, s):
    dim = 2**s
    out = np.zeros((dim, dim))
    for alpha, term in terms:
        out += alpha * term_matrix(term, s)
    return out


# -- projector-form component Hamiltonians -----------------------------------


def proj_h_in(x, n, m, layout):
    s = layout.s
    clock0 = single(P0, layout.clock_wire(1), s)
    out = np.zeros((2**s, 2**s))
    for i in range(n):
        want = P1 if x[i] == "1" else P0
        out += (np.eye(2**s) - single(want, i, s)) @ clock0
    for i in range(m):
        out += single(P1, n + i, s) @ clock0
    return out


def proj_h_clock(layout):
    s = layout.s
    out = np.zeros((2**s, 2**s))
    for t in range(1, layout.t_padded):
        out += single(P0, layout.clock_wire(t), s) @ single(
            P1, layout.clock_wire(t + 1), s
        )
    return out


def clock_ket_projector(t1, t2, layout):
    """|t1><t2| on the unary clock register, identity on data wires."""
    s = layout.s
    nm = layout.data_width
    dim = 2**s
    pat1 = ((1 << t1) - 1) << nm
    pat2 = ((1 << t2) - 1) << nm
    out = np.zeros((dim, dim))
    for d in range(2**nm):
        out[pat1 + d, pat2 + d] = 1.0
    return out


def proj_h_prop(circuit_padded, layout):
    s = layout.s
    out = np.zeros((2**s, 2**s))
    for t in range(1, layout.t_padded + 1):
        u = gate_unitary(circuit_padded.gates[t - 1], s)
        out += 0.5 * (clock_ket_projector(t, t, layout) + clock_ket_projector(t - 1, t - 1, layout))
        out -= 0.5 * (
            u @ clock_ket_projector(t, t - 1, layout)
            + u.T @ clock_ket_projector(t - 1, t, layout)
        )
    return out


def legal_clock_isometry(layout):
    """Columns form the legal-clock-subspace basis (data (x) unary clock)."""
    s = layout.s
    nm = layout.data_width
    dim = 2**s
    cols = []
    for t in range(layout.t_padded + 1):
        pat = ((1 << t) - 1) << nm
        for d in range(2**nm):
            e = np.zeros(dim)
            e[pat + d] = 1.0
            cols.append(e)
    return np.array(cols).T


# -- exact verification-round acceptance by explicit Born sums ----------------


def vgs_accept_prob_dense(ham, state):
    """Acceptance probability computed from dense rotated Born vectors."""
    total = 0.0
    for alpha, term in ham.terms:
        p_term = abs(alpha) / ham.alpha_l1
        rot = np.eye(state.dim)
        for q in range(state.s):
            if (term.xmask >> q) & 1:
                rot = single(H2, q, state.s) @ rot
        probs = np.abs(rot @ state.amps) ** 2
        acc = 0.0
        for idx in range(state.dim):
            r = 1
            for q in range(state.s):
                if ((term.xmask | term.zmask) >> q) & 1 and (idx >> q) & 1:
                    r = -r
            if np.sign(alpha) * r == -1:
                acc += probs[idx]
        total += p_term * acc
    return total
