"""Second-quantized operators of the two-well Bose-Hubbard model.

All operators are dense matrices tied to a FockBasis.  The Hamiltonian is
H(J, U) = -J K + U O with K the hopping operator and O the on-site pair
interaction; hbar = 1 and U sets the energy unit.
"""

from dataclasses import dataclass

import numpy as np

from dwell.basis import FockBasis, FockState, check_same_basis

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Hopping amplitude J and on-site interaction U (energy units)."""

    j: float
    u: float

    def __post_init__(self):
        if not (np.isfinite(self.j) and np.isfinite(self.u)):
            raise ValueError("model parameters must be finite")


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix over a FockBasis, with an explicit hermiticity flag."""

    basis: FockBasis
    data: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        d = self.basis.dim
        if self.data.shape != (d, d):
            raise ValueError(f"matrix shape {self.data.shape} != basis dim {d}")
        if self.hermitian:
            if np.max(np.abs(self.data - self.data.conj().T)) > HERMITICITY_TOL:
                raise ValueError("matrix flagged hermitian is not")

    @property
    def dim(self) -> int:
        return self.basis.dim


def annihilator(basis: FockBasis, well: str) -> OperatorMatrix:
    """Bosonic annihilator b_A or b_B: <n-1|b|n> = sqrt(n) on the given well.

    Only defined on full bases; on a fixed-N sector the image leaves the space.
    """
    if basis.kind != "full":
        raise ValueError("annihilator needs a full basis (it changes N)")
    if well not in ("A", "B"):
        raise ValueError("well must be 'A' or 'B'")
    mat = np.zeros((basis.dim, basis.dim))
    for i, (na, nb) in enumerate(basis.states):
        if well == "A" and na > 0:
            mat[basis.index(FockState(na - 1, nb)), i] = np.sqrt(na)
        elif well == "B" and nb > 0:
            mat[basis.index(FockState(na, nb - 1)), i] = np.sqrt(nb)
    return OperatorMatrix(basis, mat, hermitian=False)


def number_op(basis: FockBasis, well: str) -> OperatorMatrix:
    """Number operator n_A or n_B (diagonal)."""
    if well not in ("A", "B"):
        raise ValueError("well must be 'A' or 'B'")
    occ = [s.na if well == "A" else s.nb for s in basis.states]
    return OperatorMatrix(basis, np.diag(np.asarray(occ, dtype=float)))


def hopping_op(basis: FockBasis) -> OperatorMatrix:
    """K = b_A^dag b_B + b_A b_B^dag; tridiagonal within each N sector."""
    mat = np.zeros((basis.dim, basis.dim))
    for i, (na, nb) in enumerate(basis.states):
        # b_A^dag b_B |na, nb> = sqrt((na+1) nb) |na+1, nb-1>
        if nb > 0 and (na + 1, nb - 1) in basis:
            j = basis.index(FockState(na + 1, nb - 1))
            amp = np.sqrt((na + 1) * nb)
            mat[j, i] = amp
            mat[i, j] = amp
    return OperatorMatrix(basis, mat)


def interaction_op(basis: FockBasis) -> OperatorMatrix:
    """O = sum_k n_k (n_k - 1) / 2 (diagonal)."""
    diag = [na * (na - 1) / 2 + nb * (nb - 1) / 2 for na, nb in basis.states]
    return OperatorMatrix(basis, np.diag(np.asarray(diag, dtype=float)))


def hamiltonian(basis: FockBasis, params: ModelParams) -> OperatorMatrix:
    """H(J, U) = -J K + U O; real symmetric by construction."""
    mat = -params.j * hopping_op(basis).data + params.u * interaction_op(basis).data
    return OperatorMatrix(basis, mat)


def expectation(op: OperatorMatrix, state) -> float:
    """<op> on a pure state vector or a density matrix.

    Accepts a plain 1-D array (pure state) or any object with .basis/.data
    (density matrix).  The imaginary residue must be negligible.
    """
    if not op.hermitian:
        raise ValueError("expectation values are defined for hermitian operators")
    if isinstance(state, np.ndarray):
        if state.ndim != 1 or state.shape[0] != op.dim:
            raise ValueError("state vector has wrong shape for the operator")
        val = np.vdot(state, op.data @ state)
    else:
        check_same_basis(op.basis, state.basis)
        val = np.trace(state.data @ op.data)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)
