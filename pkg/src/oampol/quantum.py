"""Two-qubit state arithmetic for polarization-encoded biphotons.

Kets are length-4 complex vectors over the product basis (HH, HV, VH, VV);
the first letter labels the Stokes arm, the second the anti-Stokes arm.
Density matrices are 4x4 Hermitian unit-trace operators wrapped in
:class:`DensityMatrix`. Positivity is deliberately not enforced at
construction so that raw linear-inversion output remains representable;
use :func:`is_physical` to query it.

Every eigendecomposition goes through :func:`jacobi_eigh`, a cyclic Jacobi
solver for small Hermitian matrices, so results are deterministic and
identical across BLAS builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeEigenvalue,
    NonHermitianInput,
    NumericalError,
    ValidationError,
)

SQRT2 = math.sqrt(2.0)
CHSH_QUANTUM_BOUND = 2.0 * SQRT2


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


SINGLE_PHOTON_KETS = {
    "H": _frozen(np.array([1.0, 0.0], dtype=complex)),
    "V": _frozen(np.array([0.0, 1.0], dtype=complex)),
    "D": _frozen(np.array([1.0, 1.0], dtype=complex) / SQRT2),
    "A": _frozen(np.array([1.0, -1.0], dtype=complex) / SQRT2),
    "L": _frozen(np.array([1.0, 1.0j], dtype=complex) / SQRT2),
    "R": _frozen(np.array([1.0, -1.0j], dtype=complex) / SQRT2),
}
BASIS_LABELS = tuple(SINGLE_PHOTON_KETS)
TWO_QUBIT_LABELS = ("HH", "HV", "VH", "VV")

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")
_BELL_KETS = {
    "phi+": _frozen(np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / SQRT2),
    "phi-": _frozen(np.array([1.0, 0.0, 0.0, -1.0], dtype=complex) / SQRT2),
    "psi+": _frozen(np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / SQRT2),
    "psi-": _frozen(np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / SQRT2),
}

PAULI_X = _frozen(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
PAULI_Y = _frozen(np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex))
PAULI_Z = _frozen(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
_PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

# Joint Pauli products sigma_m (x) sigma_n used by the CHSH bound.
_KRON_PAULIS = _frozen(
    np.array([[np.kron(a, b) for b in _PAULIS] for a in _PAULIS])
)


def single_photon_ket(label: str) -> np.ndarray:
    """Return the single-photon analyzer ket for one of H, V, D, A, L, R."""
    try:
        return SINGLE_PHOTON_KETS[label].copy()
    except KeyError:
        raise ValidationError(f"unknown basis label {label!r}; expected one of {BASIS_LABELS}")


def bell_state(kind: str) -> np.ndarray:
    """Return one of the four Bell kets, named phi+/phi-/psi+/psi-."""
    try:
        return _BELL_KETS[kind.lower()].copy()
    except KeyError:
        raise ValidationError(f"unknown Bell state {kind!r}; expected one of {BELL_LABELS}")


def check_setting(setting: str) -> str:
    """Validate a two-letter joint setting label such as 'HL'."""
    if not (isinstance(setting, str) and len(setting) == 2
            and setting[0] in SINGLE_PHOTON_KETS and setting[1] in SINGLE_PHOTON_KETS):
        raise ValidationError(
            f"bad setting {setting!r}: expected two letters from {''.join(BASIS_LABELS)}")
    return setting


def joint_ket(setting: str) -> np.ndarray:
    """Product analyzer ket for a two-letter setting (Stokes, anti-Stokes)."""
    check_setting(setting)
    return np.kron(SINGLE_PHOTON_KETS[setting[0]], SINGLE_PHOTON_KETS[setting[1]])


def joint_projector(setting: str) -> np.ndarray:
    """Rank-1 projector onto the joint analyzer ket of a setting."""
    psi = joint_ket(setting)
    return np.outer(psi, psi.conj())


def _as_matrix(rho) -> np.ndarray:
    """Accept a DensityMatrix, a 4x4 array, or a ket (mapped to its projector)."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    m = np.asarray(rho, dtype=complex)
    if m.shape == (4,):
        norm = np.linalg.norm(m)
        if norm == 0.0:
            raise ValidationError("state ket must be nonzero")
        psi = m / norm
        return np.outer(psi, psi.conj())
    if m.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix or length-4 ket, got shape {m.shape}")
    return m


def projection_probability(rho, setting: str) -> float:
    """Expectation value <psi_setting| rho |psi_setting>.

    Returned unclamped: for Hermitian but non-positive input it can fall
    outside [0, 1]. Reporting paths are responsible for any clipping.
    """
    psi = joint_ket(setting)
    return float(np.real(psi.conj() @ _as_matrix(rho) @ psi))


def jacobi_eigh(matrix, *, tol: float = 1e-13, max_sweeps: int = 100,
                hermiticity_tol: float = 1e-10):
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi rotations.

    Sweeps over the upper triangle, annihilating one off-diagonal entry at a
    time with a complex plane rotation, until the off-diagonal Frobenius norm
    drops below ``tol`` (scaled by the matrix norm for inputs far from unit
    scale). Deterministic; no BLAS-dependent branching.

    Returns (eigenvalues ascending, eigenvectors as matching columns).
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if float(np.max(np.abs(a - a.conj().T))) > hermiticity_tol * scale:
        raise NonHermitianInput("matrix is not Hermitian within tolerance")
    a = (a + a.conj().T) / 2.0
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    stop = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        hollow = a.copy()
        np.fill_diagonal(hollow, 0.0)
        if float(np.linalg.norm(hollow)) < stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r < 1e-300:
                    continue
                phase = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                v = v @ rot
    else:
        raise NumericalError("Jacobi eigendecomposition did not converge")
    evals = np.real(np.diag(a)).copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


def hermitian_sqrt(matrix, *, negative_floor: float = -1e-6) -> np.ndarray:
    """Principal square root of a Hermitian positive matrix.

    Eigenvalues in [negative_floor, 0) are treated as numerical noise and
    clamped to zero; anything below raises NegativeEigenvalue.
    """
    evals, vecs = jacobi_eigh(_as_matrix(matrix))
    if evals[0] < negative_floor:
        raise NegativeEigenvalue(
            f"eigenvalue {evals[0]:.3e} below floor {negative_floor:.1e}")
    root = np.sqrt(np.clip(evals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def fidelity(rho_exp, rho_tar) -> float:
    """Uhlmann fidelity  [Tr sqrt(sqrt(t) e sqrt(t))]^2  between two states.

    Symmetric in its arguments; reduces to <psi| rho |psi> when the target
    is pure. Inputs must be positive within the hermitian_sqrt tolerance.
    """
    e = _as_matrix(rho_exp)
    t = _as_matrix(rho_tar)
    root_t = hermitian_sqrt(t)
    evals, _ = jacobi_eigh(root_t @ e @ root_t)
    if evals[0] < -1e-6:
        raise NegativeEigenvalue(
            f"fidelity inner matrix has eigenvalue {evals[0]:.3e}")
    lam = np.clip(evals, 0.0, None)
    # Exact-zero eigenvalues come back as O(1e-16) float noise; the square
    # root would amplify them to O(1e-8), so drop anything far below the top.
    lam[lam < 1e-14 * max(1.0, float(lam[-1]))] = 0.0
    return float(np.sum(np.sqrt(lam)) ** 2)


def correlation_matrix(rho) -> np.ndarray:
    """3x3 real matrix of joint Pauli expectations T[m, n] = <sigma_m sigma_n>."""
    m = _as_matrix(rho)
    return np.real(np.einsum("abij,ji->ab", _KRON_PAULIS, m))


def chsh_max(rho) -> float:
    """Largest CHSH value over analyzer angles, from the correlation matrix.

    Equals 2 sqrt(m1 + m2) where m1, m2 are the two largest eigenvalues of
    T^T T. Physical states give a value in [0, 2 sqrt(2)]; values above 2
    certify Bell violation.
    """
    t = correlation_matrix(rho)
    evals, _ = jacobi_eigh(t.T @ t)
    m1 = max(float(evals[-1]), 0.0)
    m2 = max(float(evals[-2]), 0.0)
    return 2.0 * math.sqrt(m1 + m2)


def is_physical(rho, tol: float = 1e-10) -> bool:
    """True when trace is 1 and all eigenvalues are >= -tol."""
    m = _as_matrix(rho)
    if abs(float(np.real(np.trace(m))) - 1.0) > tol:
        return False
    evals, _ = jacobi_eigh(m)
    return bool(evals[0] >= -tol)


def depolarize(rho, strength: float) -> "DensityMatrix":
    """Mix a state with the maximally mixed one: (1-s) rho + s I/4."""
    if not 0.0 <= strength <= 1.0:
        raise ValidationError(f"depolarizing strength {strength} outside [0, 1]")
    m = _as_matrix(rho)
    return DensityMatrix((1.0 - strength) * m + strength * np.eye(4) / 4.0)


HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """4x4 Hermitian unit-trace operator over (HH, HV, VH, VV).

    The stored array is an exactly Hermitian, read-only copy of the input.
    Construction rejects non-Hermitian input (beyond 1e-12) and traces off
    unity by more than 1e-10, but does not require positivity.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError(f"density matrix must be 4x4, got {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValidationError("density matrix has non-finite entries")
        if float(np.max(np.abs(m - m.conj().T))) > HERMITICITY_TOL:
            raise ValidationError("density matrix is not Hermitian within 1e-12")
        trace = float(np.real(np.trace(m)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace {trace!r} is not 1 within 1e-10")
        m = (m + m.conj().T) / 2.0
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        """Pure state |psi><psi| from a (not necessarily normalized) ket."""
        psi = np.asarray(ket, dtype=complex).reshape(-1)
        if psi.shape != (4,):
            raise ValidationError(f"ket must have 4 components, got {psi.shape}")
        norm_sq = float(np.real(psi.conj() @ psi))
        if norm_sq <= 0.0 or not math.isfinite(norm_sq):
            raise ValidationError("ket has zero or non-finite norm")
        return cls(np.outer(psi, psi.conj()) / norm_sq)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(4, dtype=complex) / 4.0)

    @classmethod
    def bell(cls, kind: str) -> "DensityMatrix":
        return cls.from_ket(bell_state(kind))

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in ascending order."""
        evals, _ = jacobi_eigh(self.matrix)
        return evals

    def is_physical(self, tol: float = 1e-10) -> bool:
        return is_physical(self.matrix, tol)

    def to_json_dict(self) -> dict:
        """Row-major {"re": [[...]], "im": [[...]]} representation."""
        return {
            "re": [[float(x) for x in row] for row in self.matrix.real],
            "im": [[float(x) for x in row] for row in self.matrix.imag],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DensityMatrix":
        if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
            raise ValidationError('density matrix JSON needs "re" and "im" keys')
        try:
            re = np.array(obj["re"], dtype=float)
            im = np.array(obj["im"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"density matrix JSON entries are not numeric: {exc}")
        if re.shape != (4, 4) or im.shape != (4, 4):
            raise ValidationError('density matrix JSON "re"/"im" must both be 4x4')
        return cls(re + 1j * im)
