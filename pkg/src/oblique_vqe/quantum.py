"""Noiseless statevector emulation of the variational eigensolver workflow.

Conventions, stated once: qubit 0 is the least significant bit of the
amplitude index, character 0 of a Pauli string acts on qubit 0, and
bitstring character k gives the initial value of qubit k. Rotation gates
follow exp(-i theta/2 G) for generator G, so RX(pi)|0> = -i|1>.

Inner products are evaluated directly from statevectors; the test-circuit
counts that hardware would need for the same evaluations are reported by
``resource_count`` instead of being physically constructed.

File formats (JSON):
  Hamiltonian  {"num_qubits": q, "terms": [{"pauli": "XYZI", "coeff": c}, ...]}
  Ansatz       {"num_qubits": q, "num_params": m, "gates": [...]} with gates
               {"kind": "RX"|"RY"|"RZ", "qubit": k, "param": i | "angle": a},
               {"kind": "CNOT", "control": c, "target": t},
               {"kind": "PAULI_ROT", "pauli": "XXYY", "param": i | "angle": a}
  Initial states   ["0011", "0101", ...]
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ImaginaryResidue, InvalidInput, TooLarge
from .linalg import generalized_eigh
from .models import Model, ModelConfig

DENSE_QUBIT_CAP = 12
_PAULI_CHARS = frozenset("IXYZ")


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real linear combination of Pauli strings."""

    num_qubits: int
    terms: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidInput("need at least one qubit")
        if not self.terms:
            raise InvalidInput("Hamiltonian has no terms")
        for pauli, coeff in self.terms:
            if len(pauli) != self.num_qubits or not set(pauli) <= _PAULI_CHARS:
                raise InvalidInput(f"bad Pauli string {pauli!r} for {self.num_qubits} qubits")
            if not np.isfinite(coeff):
                raise InvalidInput("non-finite coefficient")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @classmethod
    def from_file(cls, path) -> "PauliHamiltonian":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        try:
            terms = tuple((str(t["pauli"]), float(t["coeff"])) for t in payload["terms"])
            return cls(num_qubits=int(payload["num_qubits"]), terms=terms)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed Hamiltonian file {path}: {exc}") from exc

    def to_file(self, path) -> None:
        payload = {
            "num_qubits": self.num_qubits,
            "terms": [{"pauli": p, "coeff": c} for p, c in self.terms],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)


def _pauli_action(pauli: str, dim: int):
    """Index permutation and phase such that (P psi)[i] = phase[i] psi[src[i]]."""
    idx = np.arange(dim)
    flip = 0
    for k, ch in enumerate(pauli):
        if ch in "XY":
            flip |= 1 << k
    src = idx ^ flip
    phase = np.ones(dim, dtype=complex)
    for k, ch in enumerate(pauli):
        bit = (idx >> k) & 1
        if ch == "Z":
            phase *= 1.0 - 2.0 * bit
        elif ch == "Y":
            phase *= np.where(bit == 1, 1j, -1j)
    return src, phase


def apply_pauli_string(state: np.ndarray, pauli: str) -> np.ndarray:
    """Apply a Pauli string to a statevector."""
    src, phase = _pauli_action(pauli, state.shape[0])
    return phase * state[src]


def apply_hamiltonian(ham: PauliHamiltonian, state: np.ndarray) -> np.ndarray:
    """Accumulate H|psi> term by term."""
    if state.shape[0] != 2**ham.num_qubits:
        raise DimensionMismatch("state dimension does not match the Hamiltonian")
    out = np.zeros(state.shape[0], dtype=complex)
    for pauli, coeff in ham.terms:
        out += coeff * apply_pauli_string(state, pauli)
    return out


def hamiltonian_matrix(ham: PauliHamiltonian) -> np.ndarray:
    """Dense matrix of the Pauli sum; capped at 12 qubits."""
    if ham.num_qubits > DENSE_QUBIT_CAP:
        raise TooLarge(f"dense construction capped at {DENSE_QUBIT_CAP} qubits")
    dim = 2**ham.num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for pauli, coeff in ham.terms:
        src, phase = _pauli_action(pauli, dim)
        out[idx, src] += coeff * phase
    return out


@dataclass(frozen=True)
class Gate:
    kind: str
    qubit: int | None = None
    control: int | None = None
    target: int | None = None
    pauli: str | None = None
    param: int | None = None
    angle: float | None = None

    @classmethod
    def from_dict(cls, d) -> "Gate":
        kind = d.get("kind")
        if kind in ("RX", "RY", "RZ"):
            return cls(kind=kind, qubit=int(d["qubit"]),
                       param=d.get("param"), angle=d.get("angle"))
        if kind == "CNOT":
            return cls(kind=kind, control=int(d["control"]), target=int(d["target"]))
        if kind == "PAULI_ROT":
            return cls(kind=kind, pauli=str(d["pauli"]),
                       param=d.get("param"), angle=d.get("angle"))
        raise InvalidInput(f"unknown gate kind {kind!r}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for key in ("qubit", "control", "target", "pauli", "param", "angle"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass(frozen=True)
class AnsatzCircuit:
    """Ordered gate list acting on a fixed number of qubits."""

    num_qubits: int
    gates: tuple[Gate, ...]
    num_params: int

    def __post_init__(self):
        q = self.num_qubits
        for gate in self.gates:
            if gate.kind in ("RX", "RY", "RZ"):
                if not 0 <= gate.qubit < q:
                    raise IndexError(f"qubit {gate.qubit} out of range for {q} qubits")
            elif gate.kind == "CNOT":
                if not (0 <= gate.control < q and 0 <= gate.target < q) or gate.control == gate.target:
                    raise IndexError(f"bad CNOT wires ({gate.control}, {gate.target})")
            elif gate.kind == "PAULI_ROT":
                if len(gate.pauli) != q or not set(gate.pauli) <= _PAULI_CHARS:
                    raise InvalidInput(f"bad rotation string {gate.pauli!r}")
            else:
                raise InvalidInput(f"unknown gate kind {gate.kind!r}")
            if gate.kind != "CNOT":
                if gate.param is None and gate.angle is None:
                    raise InvalidInput(f"{gate.kind} needs a param index or a fixed angle")
                if gate.param is not None and not 0 <= gate.param < self.num_params:
                    raise IndexError(f"parameter index {gate.param} out of range")

    @classmethod
    def from_file(cls, path) -> "AnsatzCircuit":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        try:
            gates = tuple(Gate.from_dict(g) for g in payload["gates"])
            return cls(num_qubits=int(payload["num_qubits"]), gates=gates,
                       num_params=int(payload["num_params"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed ansatz file {path}: {exc}") from exc

    def to_file(self, path) -> None:
        payload = {
            "num_qubits": self.num_qubits,
            "num_params": self.num_params,
            "gates": [g.to_dict() for g in self.gates],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)


def basis_state(num_qubits: int, bits: str) -> np.ndarray:
    """Computational basis state; character k of ``bits`` is the value of qubit k."""
    if len(bits) != num_qubits or not set(bits) <= {"0", "1"}:
        raise InvalidInput(f"bad bitstring {bits!r} for {num_qubits} qubits")
    index = sum(1 << k for k, b in enumerate(bits) if b == "1")
    state = np.zeros(2**num_qubits, dtype=complex)
    state[index] = 1.0
    return state


def _apply_single_qubit(state, mat, qubit, num_qubits):
    psi = state.reshape(2 ** (num_qubits - qubit - 1), 2, 2**qubit)
    return np.einsum("ab,ibj->iaj", mat, psi).reshape(-1)


def _rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]])
    return np.array([[np.exp(-1j * theta / 2.0), 0.0], [0.0, np.exp(1j * theta / 2.0)]])


def _apply_cnot(state, control, target, num_qubits):
    psi = state.reshape([2] * num_qubits).copy()
    ax_c = num_qubits - 1 - control
    ax_t = num_qubits - 1 - target
    sl = [slice(None)] * num_qubits
    sl[ax_c] = 1
    sub_axis = ax_t if ax_t < ax_c else ax_t - 1
    psi[tuple(sl)] = np.flip(psi[tuple(sl)], axis=sub_axis)
    return psi.reshape(-1)


def apply_circuit(circuit: AnsatzCircuit, params, state: np.ndarray) -> np.ndarray:
    """Run the gate list over a statevector and return the new state."""
    theta = np.asarray(params, dtype=float)
    if theta.shape != (circuit.num_params,):
        raise InvalidInput(f"expected {circuit.num_params} parameters, got {theta.shape}")
    if state.shape[0] != 2**circuit.num_qubits:
        raise DimensionMismatch("state dimension does not match the circuit")
    psi = np.array(state, dtype=complex)
    for gate in circuit.gates:
        if gate.kind == "CNOT":
            psi = _apply_cnot(psi, gate.control, gate.target, circuit.num_qubits)
            continue
        angle = gate.angle if gate.param is None else theta[gate.param]
        if gate.kind == "PAULI_ROT":
            # exp(-i angle/2 P) psi, using P^2 = I
            psi = np.cos(angle / 2.0) * psi - 1j * np.sin(angle / 2.0) * apply_pauli_string(psi, gate.pauli)
        else:
            psi = _apply_single_qubit(psi, _rotation_matrix(gate.kind, angle),
                                      gate.qubit, circuit.num_qubits)
    return psi


def overlap(psi: np.ndarray, phi: np.ndarray) -> complex:
    """Complex inner product <psi|phi>."""
    if psi.shape != phi.shape:
        raise DimensionMismatch("states live on different qubit counts")
    return complex(np.vdot(psi, phi))


def transition(psi: np.ndarray, ham: PauliHamiltonian, phi: np.ndarray) -> complex:
    """Complex matrix element <psi|H|phi>."""
    if psi.shape != phi.shape:
        raise DimensionMismatch("states live on different qubit counts")
    return complex(np.vdot(psi, apply_hamiltonian(ham, phi)))


def expectation(ham: PauliHamiltonian, psi: np.ndarray) -> float:
    """Real expectation value <psi|H|psi>."""
    value = transition(psi, ham, psi)
    if abs(value.imag) > 1e-10:
        raise ImaginaryResidue(f"expectation carries imaginary part {value.imag:.3e}")
    return value.real


def prepare_states(circuits, initial_bits, params) -> list[np.ndarray]:
    """Run each per-state circuit on its basis initial state."""
    if len(circuits) != len(initial_bits):
        raise InvalidInput("need one initial bitstring per circuit")
    theta = np.asarray(params, dtype=float)
    total = sum(c.num_params for c in circuits)
    if theta.shape != (total,):
        raise InvalidInput(f"expected {total} concatenated parameters, got {theta.shape}")
    states, at = [], 0
    for circuit, bits in zip(circuits, initial_bits):
        chunk = theta[at : at + circuit.num_params]
        at += circuit.num_params
        states.append(apply_circuit(circuit, chunk, basis_state(circuit.num_qubits, bits)))
    return states


def _gram_and_compressed(ham, states):
    p = len(states)
    h_states = [apply_hamiltonian(ham, s) for s in states]
    gram = np.empty((p, p), dtype=complex)
    comp = np.empty((p, p), dtype=complex)
    for i in range(p):
        for j in range(p):
            gram[i, j] = np.vdot(states[i], states[j])
            comp[i, j] = np.vdot(states[i], h_states[j])
    return gram, comp


def objective_from_states(config: ModelConfig, ham: PauliHamiltonian, states) -> float:
    """Model value assembled from the same inner products hardware would measure."""
    gram, comp = _gram_and_compressed(ham, states)
    p = len(states)
    diag = np.diag(comp)
    if np.max(np.abs(diag.imag)) > 1e-8 * np.max(np.abs(diag.real)) + 1e-10:
        raise ImaginaryResidue("Hamiltonian diagonal terms are not real")
    iu = np.triu_indices(p, k=1)
    if config.model is Model.QOMM:
        value = np.trace((2.0 * np.eye(p) - gram) @ comp)
        if abs(value.imag) > 1e-8 * abs(value.real) + 1e-10:
            raise ImaginaryResidue(f"objective imaginary residue {value.imag:.3e}")
        return float(value.real)
    if config.model is Model.QTPM:
        return float(0.5 * diag.real.sum() + 0.25 * config.mu * np.sum(np.abs(gram) ** 2))
    if config.model is Model.QL1M:
        return float(diag.real.sum() + config.mu1 * np.sum(np.abs(gram[iu])))
    if config.model is Model.WEIGHTED_QL1M:
        w = np.asarray(config.weights, dtype=float)
        return float(np.dot(w, diag.real) + config.mu1 * np.sum(np.abs(gram[iu])))
    raise InvalidInput(f"unknown model {config.model}")


def vqe_objective(config: ModelConfig, ham: PauliHamiltonian, circuits, initial_bits, params) -> float:
    """Objective value of the configured model at the given circuit parameters."""
    for circuit in circuits:
        if circuit.num_qubits != ham.num_qubits:
            raise DimensionMismatch("circuit and Hamiltonian qubit counts differ")
    return objective_from_states(config, ham, prepare_states(circuits, initial_bits, params))


@dataclass(frozen=True)
class ResourceReport:
    """Inner-product test circuit counts for one objective evaluation."""

    model: Model
    hamiltonian_circuits: int
    regularization_circuits: int


def resource_count(model: Model, p: int, n_terms: int) -> ResourceReport:
    """Test-circuit counts per objective evaluation.

    The implicit-orthogonalization model needs every cross matrix element,
    p^2 N_U circuits for the Hamiltonian part plus p(p-1) for the complex
    pairwise overlaps; the penalty models need only diagonal Hamiltonian
    terms (p N_U) and one fidelity circuit per pair (p(p-1)/2).
    """
    if p < 1 or n_terms < 1:
        raise InvalidInput("p and the term count must be positive")
    if model is Model.QOMM:
        return ResourceReport(model, p * p * n_terms, p * (p - 1))
    if model in (Model.QTPM, Model.QL1M, Model.WEIGHTED_QL1M):
        return ResourceReport(model, p * n_terms, p * (p - 1) // 2)
    raise InvalidInput(f"unknown model {model}")


def rayleigh_ritz(states, ham: PauliHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Extract ordered eigenvalue estimates from the span of the states.

    Builds B_ij = <psi_i|H|psi_j> and C_ij = <psi_i|psi_j> and solves the
    pencil B R = C R diag(values). Combined eigenvector states are
    ``sum_j states[j] R[j, i]``.
    """
    if not states:
        raise InvalidInput("need at least one state")
    gram, comp = _gram_and_compressed(ham, states)
    return generalized_eigh(comp, gram)


def combine_states(states, r) -> list[np.ndarray]:
    """Mix states by the Rayleigh-Ritz eigenvector matrix columns."""
    stack = np.column_stack(states)
    mixed = stack @ np.asarray(r, dtype=complex)
    return [mixed[:, i] for i in range(mixed.shape[1])]


def load_initial_states(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, list) or not all(isinstance(b, str) for b in payload):
        raise InvalidInput(f"initial state file {path} must hold a list of bitstrings")
    return payload
