"""One-step evolution operators of the non-Hermitian quantum walk.

A single step on one particle's two-dimensional coin space is

    M = psi(phi) R(theta1/2) G S R(theta2) G^-1 S R(theta1/2)

built from rotations R, the momentum phase S, the gain/loss pair G/G^-1 and
the symmetry-breaking operator psi. The same step has a closed form through
eight scalar coefficients (d0, dx, dy, dz) and their phi-mixed complex
counterparts (D0, DX, DY, DZ); both constructions are kept and cross-checked.
The two-particle step I (x) M is similar to a closed-form 4x4 operator
u_step whose eigenstates are near-Bell, with the similarity transform given
by the control operator C.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooCloseToEP
from .linalg import inverse4, kron

EP_PREFACTOR_GUARD = 1e-6


@dataclass(frozen=True)
class WalkParams:
    """The five scalar knobs of one walk step (angles in radians)."""

    theta1: float
    theta2: float = math.pi / 16
    phi: float = 0.0
    gamma: float = 0.2
    k: float = 0.0


@dataclass(frozen=True)
class DCoefficients:
    """Step-operator coefficients: real d-quadruple and complex D-quadruple."""

    d0: float
    dx: float
    dy: float
    dz: float
    D0: complex
    DX: complex
    DY: complex
    DZ: complex

    def d_identity_residual(self) -> float:
        """|d0^2 - dx^2 + dy^2 + dz^2 - 1|, zero for any valid parameters."""
        return abs(self.d0**2 - self.dx**2 + self.dy**2 + self.dz**2 - 1.0)

    def D_identity_residual(self) -> float:
        """|D0^2 + DZ^2 - DX^2 + DY^2 - 1|, the det = 1 consequence."""
        return abs(self.D0**2 + self.DZ**2 - self.DX**2 + self.DY**2 - 1.0)


def rotation(theta: float) -> np.ndarray:
    """Real rotation R(theta) with det = 1."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phase_shift(k: float) -> np.ndarray:
    """Momentum phase S(k) = diag(e^{ik}, e^{-ik})."""
    return np.diag([np.exp(1j * k), np.exp(-1j * k)])


def gain_loss(gamma: float) -> np.ndarray:
    """Gain/loss operator G = diag(e^gamma, e^-gamma)."""
    return np.diag([math.exp(gamma), math.exp(-gamma)]).astype(complex)


def gain_loss_inverse(gamma: float) -> np.ndarray:
    """Inverse gain/loss operator G^-1 = diag(e^-gamma, e^gamma)."""
    return gain_loss(-gamma)


def symmetry_break(phi: float) -> np.ndarray:
    """Symmetry-breaking coin psi(phi) = ((cos phi, i sin phi), (i sin phi, cos phi))."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def d_coefficients(p: WalkParams) -> DCoefficients:
    """Compute all eight step coefficients for parameters p."""
    c2k = math.cos(2 * p.k)
    ch = math.cosh(2 * p.gamma)
    d0 = c2k * math.cos(p.theta1) * math.cos(p.theta2) - ch * math.sin(p.theta1) * math.sin(p.theta2)
    dx = -math.sinh(2 * p.gamma) * math.sin(p.theta2)
    dy = -math.cos(p.theta2) * math.sin(p.theta1) * c2k - ch * math.cos(p.theta1) * math.sin(p.theta2)
    dz = math.cos(p.theta2) * math.sin(2 * p.k)
    cp, sp = math.cos(p.phi), math.sin(p.phi)
    return DCoefficients(
        d0=d0, dx=dx, dy=dy, dz=dz,
        D0=cp * d0 + 1j * sp * dx,
        DX=cp * dx + 1j * sp * d0,
        DY=cp * dy + sp * dz,
        DZ=cp * dz - sp * dy,
    )


def walk_operator_product(p: WalkParams) -> np.ndarray:
    """One-step coin operator M as the explicit seven-factor product."""
    r1 = rotation(p.theta1 / 2)
    s = phase_shift(p.k)
    return (
        symmetry_break(p.phi)
        @ r1
        @ gain_loss(p.gamma)
        @ s
        @ rotation(p.theta2)
        @ gain_loss_inverse(p.gamma)
        @ s
        @ r1
    )


def walk_operator_closed(p: WalkParams) -> np.ndarray:
    """One-step coin operator M from the D-coefficients only."""
    d = d_coefficients(p)
    return np.array(
        [[d.D0 + 1j * d.DZ, d.DX + d.DY], [d.DX - d.DY, d.D0 - 1j * d.DZ]],
        dtype=complex,
    )


def u_step(p: WalkParams) -> np.ndarray:
    """Closed-form two-particle step operator, similar to I (x) M.

    Layout: D0 on the diagonal and the antisymmetric off-diagonal blocks
    +W / -W with W = ((DZ, i(DX+DY)), (i(DX-DY), -DZ)). The lower-left
    block's sign is forced by the requirement that the spectrum equals that
    of I (x) M for every parameter value.
    """
    d = d_coefficients(p)
    w = np.array(
        [[d.DZ, 1j * (d.DX + d.DY)], [1j * (d.DX - d.DY), -d.DZ]],
        dtype=complex,
    )
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = u[1, 1] = u[2, 2] = u[3, 3] = d.D0
    u[:2, 2:] = w
    u[2:, :2] = -w
    return u


def eta_pair(p: WalkParams) -> tuple[complex, complex]:
    """Eigenvalue pair (eta_plus, eta_minus) = D0 +/- sqrt(D0^2 - 1), principal root."""
    D0 = d_coefficients(p).D0
    s = np.sqrt(complex(D0 * D0 - 1.0))
    return D0 + s, D0 - s


def _coin_eigvec_m(c: complex, d: DCoefficients) -> np.ndarray:
    # eigenvector prefactor 1/c diverges at the EP; callers guard |c|
    return np.array([d.DX + d.DY, c - 1j * d.DZ], dtype=complex) / (math.sqrt(2) * c)


def _coin_eigvec_mu(c: complex, d: DCoefficients, sigma: complex) -> np.ndarray:
    return -np.array([c + 1j * d.DZ, d.DX - d.DY], dtype=complex) / (math.sqrt(2) * sigma)


def control_operator(p: WalkParams) -> tuple[np.ndarray, np.ndarray]:
    """Control pair (C, C_inv) with C (I (x) M) C_inv = u_step.

    C = A B^-1 where A's columns are the right eigenstates of u_step ordered
    by the eigenvalue pattern (eta-, eta-, eta+, eta+), A^-1 is assembled from
    the matching left eigenstates (exact biorthogonality, no inversion), and
    B's columns are tensor products |0>,|1> with the coin eigenvectors of M in
    the gauge that reproduces the known endpoint control matrix.

    Raises TooCloseToEP when the eigenvector prefactor guard |eta - D0| <= 1e-6
    trips.
    """
    from .spectrum import eigensystem  # local import to avoid a module cycle

    d = d_coefficients(p)
    s = np.sqrt(complex(d.D0 * d.D0 - 1.0))
    if abs(s) <= EP_PREFACTOR_GUARD:
        raise TooCloseToEP(f"|eta - D0| = {abs(s):.3e} at {p}")
    sigma = np.sqrt(complex(1.0 - d.D0 * d.D0))
    es = eigensystem(p)
    a = es.alpha
    b = es.beta
    # eigenvalue pattern (eta-, eta-, eta+, eta+): columns (alpha2, alpha3, alpha1, alpha4)
    A = np.column_stack([a[1], a[2], a[0], a[3]])
    # beta kets satisfy beta_i^dag alpha_j = delta_ij, so the dual rows are beta^dag
    A_inv = np.vstack([b[1].conj(), b[2].conj(), b[0].conj(), b[3].conj()])
    e0 = np.array([1, 0], dtype=complex)
    e1 = np.array([0, 1], dtype=complex)
    B = np.column_stack(
        [
            kron(e0, _coin_eigvec_m(-s, d)),
            kron(e1, _coin_eigvec_mu(-s, d, sigma)),
            kron(e0, _coin_eigvec_m(s, d)),
            kron(e1, _coin_eigvec_mu(s, d, sigma)),
        ]
    )
    C = A @ inverse4(B)
    C_inv = B @ A_inv
    return C, C_inv
