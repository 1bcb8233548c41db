"""Bell states, density matrices, root fidelity, and output classification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import psd_sqrt

BELL_LABELS = ("zeta1", "zeta2", "zeta3", "zeta4")
CLASSIFY_TIE_TOL = 1e-9

_BELL_VECTORS = {
    1: np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    2: np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    3: np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    4: np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
}


def bell_index(label) -> int:
    """Normalize a Bell-state label ('zeta3' or 3) to its 1-based index."""
    if isinstance(label, str):
        if label not in BELL_LABELS:
            raise DomainError(f"unknown Bell label {label!r}")
        return BELL_LABELS.index(label) + 1
    idx = int(label)
    if idx not in (1, 2, 3, 4):
        raise DomainError(f"Bell index must be 1..4, got {label!r}")
    return idx


def bell_state(label) -> np.ndarray:
    """The four maximally entangled two-qubit states in the (|00>,|01>,|10>,|11>) basis."""
    return _BELL_VECTORS[bell_index(label)].copy()


def density_matrix(state: np.ndarray) -> np.ndarray:
    """Rank-1 density matrix |psi><psi| of a normalized pure state."""
    v = np.asarray(state, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def _check_density(rho: np.ndarray, name: str) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"{name} must be 4x4, got {rho.shape}")
    if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-8:
        raise DomainError(f"{name} trace {np.trace(rho):.6g} is not 1")
    return rho


def fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Root fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)).

    This (not its square) is the convention behind every reported threshold;
    Hermiticity/positivity guards are inherited from psd_sqrt.
    """
    rho1 = _check_density(rho1, "rho1")
    rho2 = _check_density(rho2, "rho2")
    r = psd_sqrt(rho1)
    inner = r @ rho2 @ r
    return float(np.trace(psd_sqrt(inner)).real)


def similarity(rho_th: np.ndarray, rho_ex: np.ndarray) -> float:
    """Alias of fidelity, named for theory-vs-reconstruction report rows."""
    return fidelity(rho_th, rho_ex)


def fidelity_pure(psi: np.ndarray, other: np.ndarray) -> float:
    """Root fidelity of a pure state against a state vector or a density matrix.

    For a vector this is |<psi|other>|; for a matrix sqrt(<psi|rho|psi>),
    clamped at 0 so slightly indefinite reconstructions stay in range.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    other = np.asarray(other, dtype=complex)
    if other.ndim == 1:
        return float(abs(np.vdot(psi, other)))
    return float(math.sqrt(max(0.0, np.real(np.vdot(psi, other @ psi)))))


@dataclass(frozen=True)
class Classification:
    label: str
    fidelities: tuple[float, float, float, float]
    tie: bool


def classify(state: np.ndarray) -> Classification:
    """Nearest Bell state of a normalized pure state.

    Ties (top two fidelities within 1e-9) resolve to the lowest label index
    and set the tie flag.
    """
    fids = tuple(fidelity_pure(bell_state(j), state) for j in (1, 2, 3, 4))
    top = max(fids)
    candidates = [j for j, f in enumerate(fids) if top - f < CLASSIFY_TIE_TOL]
    return Classification(
        label=BELL_LABELS[candidates[0]],
        fidelities=fids,
        tie=len(candidates) > 1,
    )
