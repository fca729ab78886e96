import numpy as np
import pytest


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_negdef(n, seed, lo=0.5, hi=10.0):
    """Random negative definite Hermitian matrix with spectrum in [-hi, -lo]."""
    rng = np.random.default_rng(seed)
    q = random_unitary(n, rng)
    lam = np.sort(-rng.uniform(lo, hi, n))
    a = q @ np.diag(lam) @ q.conj().T
    return 0.5 * (a + a.conj().T)


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + z.conj().T)


def conjugated_spectrum(spectrum, seed):
    """Hermitian matrix with the given spectrum under a random unitary."""
    spectrum = np.asarray(spectrum, dtype=float)
    rng = np.random.default_rng(seed)
    q = random_unitary(spectrum.size, rng)
    a = q @ np.diag(np.sort(spectrum)) @ q.conj().T
    return 0.5 * (a + a.conj().T)


def random_circuit(q, num_params, seed, depth=8):
    """Random gate list touching every supported gate kind."""
    from oblique_vqe.quantum import AnsatzCircuit, Gate

    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(depth):
        kind = rng.choice(["RX", "RY", "RZ", "CNOT", "PAULI_ROT"])
        if kind == "CNOT" and q >= 2:
            c, t = rng.choice(q, size=2, replace=False)
            gates.append(Gate(kind="CNOT", control=int(c), target=int(t)))
        elif kind == "PAULI_ROT":
            pauli = "".join(rng.choice(list("IXYZ"), q))
            gates.append(Gate(kind="PAULI_ROT", pauli=pauli, param=int(rng.integers(num_params))))
        else:
            gates.append(Gate(kind=str(kind), qubit=int(rng.integers(q)),
                              param=int(rng.integers(num_params))))
    return AnsatzCircuit(num_qubits=q, gates=tuple(gates), num_params=num_params)


def random_pauli_hamiltonian(q, n_terms, seed):
    from oblique_vqe.quantum import PauliHamiltonian

    rng = np.random.default_rng(seed)
    terms = tuple(("".join(rng.choice(list("IXYZ"), q)), float(rng.uniform(-1, 1)))
                  for _ in range(n_terms))
    return PauliHamiltonian(num_qubits=q, terms=terms)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
