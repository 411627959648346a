"""Sixteen-setting two-qubit tomography.

Two reconstruction routes are provided and kept deliberately independent:

* :func:`linear_inversion` solves the full 16x16 real linear system that
  relates the measured setting probabilities to a 16-real-parameter
  Hermitian matrix (4 populations plus real/imaginary parts of the 6
  lower-triangle coherences). It is exact on consistent input but can
  return a non-positive matrix for noisy data.
* :func:`mle_reconstruct` minimizes a sigma-weighted least-squares cost
  over the Cholesky-style parametrization rho = T^dag T / Tr(T^dag T),
  which is positive by construction, using plain gradient descent with a
  backtracking line search and analytic gradients.

Setting labels are two letters, Stokes arm first ("HL" means H on the
Stokes analyzer, L on the anti-Stokes one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateParameters,
    SingularSystem,
    ValidationError,
)
from .quantum import DensityMatrix, check_setting, jacobi_eigh, joint_ket

CANONICAL_SETTINGS = (
    "HH", "HV", "VH", "VV",
    "HD", "HL", "VD", "VL",
    "DH", "LH", "DV", "LV",
    "DD", "LR", "RA", "AR",
)
COMPUTATIONAL_SETTINGS = ("HH", "HV", "VH", "VV")

SIGMA_FLOOR = 1e-6
PROBABILITY_TOL = 1e-9


def canonical_settings() -> tuple[str, ...]:
    """The sixteen joint analyzer settings in acquisition order."""
    return CANONICAL_SETTINGS


def _validate_values(values, kind: str) -> dict[str, float]:
    if set(values) != set(CANONICAL_SETTINGS):
        missing = set(CANONICAL_SETTINGS) - set(values)
        extra = set(values) - set(CANONICAL_SETTINGS)
        raise ValidationError(
            f"{kind} must cover exactly the canonical settings"
            f" (missing {sorted(missing)}, unexpected {sorted(extra)})")
    out = {}
    for name in CANONICAL_SETTINGS:
        try:
            x = float(values[name])
        except (TypeError, ValueError):
            raise ValidationError(f"{kind}[{name}] is not a number: {values[name]!r}")
        if not math.isfinite(x):
            raise ValidationError(f"{kind}[{name}] is not finite")
        out[name] = x
    return out


@dataclass(frozen=True, eq=False)
class ProbabilitySet:
    """Normalized setting probabilities over the 16 canonical settings.

    Values must lie in [0, 1] (tiny float excursions are clipped) and the
    four computational-basis entries must sum to one; the coincidence
    normalization produces exactly this.
    """

    values: dict[str, float]

    def __post_init__(self):
        vals = _validate_values(self.values, "probability")
        for name, x in vals.items():
            if x < -PROBABILITY_TOL or x > 1.0 + PROBABILITY_TOL:
                raise ValidationError(f"probability[{name}] = {x!r} outside [0, 1]")
            vals[name] = min(max(x, 0.0), 1.0)
        comp = sum(vals[s] for s in COMPUTATIONAL_SETTINGS)
        if abs(comp - 1.0) > PROBABILITY_TOL:
            raise ValidationError(
                f"computational-basis probabilities sum to {comp!r}, expected 1")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, setting: str) -> float:
        return self.values[setting]

    def vector(self) -> np.ndarray:
        return np.array([self.values[s] for s in CANONICAL_SETTINGS])

    @classmethod
    def from_vector(cls, vec) -> "ProbabilitySet":
        v = np.asarray(vec, dtype=float).reshape(-1)
        if v.shape != (16,):
            raise ValidationError(f"probability vector must have 16 entries, got {v.shape}")
        return cls(dict(zip(CANONICAL_SETTINGS, v.tolist())))

    def to_json_dict(self) -> dict:
        return {s: self.values[s] for s in CANONICAL_SETTINGS}

    @classmethod
    def from_json_dict(cls, obj) -> "ProbabilitySet":
        if not isinstance(obj, dict):
            raise ValidationError("probability JSON must be an object keyed by setting")
        return cls(obj)


@dataclass(frozen=True, eq=False)
class SigmaSet:
    """One-sigma probability uncertainties, floored at 1e-6 per setting."""

    values: dict[str, float]

    def __post_init__(self):
        vals = _validate_values(self.values, "sigma")
        for name, x in vals.items():
            if x < 0.0:
                raise ValidationError(f"sigma[{name}] = {x!r} is negative")
            vals[name] = max(x, SIGMA_FLOOR)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, setting: str) -> float:
        return self.values[setting]

    def vector(self) -> np.ndarray:
        return np.array([self.values[s] for s in CANONICAL_SETTINGS])

    @classmethod
    def from_vector(cls, vec) -> "SigmaSet":
        v = np.asarray(vec, dtype=float).reshape(-1)
        if v.shape != (16,):
            raise ValidationError(f"sigma vector must have 16 entries, got {v.shape}")
        return cls(dict(zip(CANONICAL_SETTINGS, v.tolist())))

    def to_json_dict(self) -> dict:
        return {s: self.values[s] for s in CANONICAL_SETTINGS}

    @classmethod
    def from_json_dict(cls, obj) -> "SigmaSet":
        if not isinstance(obj, dict):
            raise ValidationError("sigma JSON must be an object keyed by setting")
        return cls(obj)


# --- linear inversion --------------------------------------------------

# Hermitian parametrization: x[0..3] populations, then (re, im) pairs for
# the lower-triangle coherences in the fixed order below.
_COHERENCE_SLOTS = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


def _hermitian_basis() -> np.ndarray:
    basis = np.zeros((16, 4, 4), dtype=complex)
    for j in range(4):
        basis[j, j, j] = 1.0
    for k, (r, c) in enumerate(_COHERENCE_SLOTS):
        basis[4 + 2 * k, r, c] = 1.0
        basis[4 + 2 * k, c, r] = 1.0
        basis[5 + 2 * k, r, c] = 1.0j
        basis[5 + 2 * k, c, r] = -1.0j
    return basis


_BASIS = _hermitian_basis()


def _design_matrix(settings) -> np.ndarray:
    kets = np.array([joint_ket(s) for s in settings])
    # A[nu, k] = <psi_nu| B_k |psi_nu>, real because each B_k is Hermitian.
    return np.real(np.einsum("ni,kij,nj->nk", kets.conj(), _BASIS, kets))


_CANONICAL_DESIGN = _design_matrix(CANONICAL_SETTINGS)
_CANONICAL_DESIGN_INV = np.linalg.inv(_CANONICAL_DESIGN)


def _matrix_from_params(x: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", x, _BASIS)


def linear_inversion(probs) -> DensityMatrix:
    """Direct inversion of setting probabilities to a Hermitian matrix.

    Accepts a :class:`ProbabilitySet` or any mapping from 16 setting labels
    to probabilities. The result reproduces every input probability exactly
    but may fail :meth:`DensityMatrix.is_physical` for noisy data.
    """
    if isinstance(probs, ProbabilitySet):
        x = _CANONICAL_DESIGN_INV @ probs.vector()
        return DensityMatrix(_matrix_from_params(x))
    if len(probs) != 16:
        raise ValidationError(f"linear inversion needs 16 settings, got {len(probs)}")
    settings = [check_setting(s) for s in probs]
    a = _design_matrix(settings)
    if np.linalg.cond(a) > 1e12:
        raise SingularSystem("the chosen settings do not determine the state")
    p = np.array([float(probs[s]) for s in settings])
    return DensityMatrix(_matrix_from_params(np.linalg.solve(a, p)))


_PROJECTORS = np.array([np.outer(joint_ket(s), joint_ket(s).conj())
                        for s in CANONICAL_SETTINGS])


def _predicted_vector(rho_matrix: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("nij,ji->n", _PROJECTORS, rho_matrix))


def predicted_probabilities(rho) -> ProbabilitySet:
    """Setting probabilities a state would produce, as a ProbabilitySet."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return ProbabilitySet.from_vector(_predicted_vector(m))


# --- maximum likelihood -------------------------------------------------

INITIAL_STATE_POLICIES = ("from_linear_inversion", "maximally_mixed")


@dataclass(frozen=True)
class MLEConfig:
    """Gradient-descent settings for :func:`mle_reconstruct`."""

    max_iterations: int = 5000
    gradient_tolerance: float = 1e-10
    step_shrink_factor: float = 0.5
    initial_state_policy: str = "from_linear_inversion"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if not self.gradient_tolerance > 0.0:
            raise ValidationError("gradient_tolerance must be positive")
        if not 0.0 < self.step_shrink_factor < 1.0:
            raise ValidationError("step_shrink_factor must lie in (0, 1)")
        if self.initial_state_policy not in INITIAL_STATE_POLICIES:
            raise ValidationError(
                f"unknown initial_state_policy {self.initial_state_policy!r};"
                f" expected one of {INITIAL_STATE_POLICIES}")


@dataclass(frozen=True)
class MLEResult:
    rho: DensityMatrix
    cost: float
    iterations: int
    converged: bool


# Parameter layout for the lower-triangular T: 4 real diagonal entries,
# then (re, im) pairs for the sub-diagonal slots in _COHERENCE_SLOTS order.
_T_ROWS = np.array([0, 1, 2, 3] + [r for (r, c) in _COHERENCE_SLOTS for _ in (0, 1)])
_T_COLS = np.array([0, 1, 2, 3] + [c for (r, c) in _COHERENCE_SLOTS for _ in (0, 1)])
_T_IMAG = np.array([False] * 4 + [bad for _ in _COHERENCE_SLOTS for bad in (False, True)])


def _t_from_params(x: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    t[0, 0], t[1, 1], t[2, 2], t[3, 3] = x[0], x[1], x[2], x[3]
    for k, (r, c) in enumerate(_COHERENCE_SLOTS):
        t[r, c] = x[4 + 2 * k] + 1j * x[5 + 2 * k]
    return t


def _rho_from_t(t: np.ndarray) -> tuple[np.ndarray, float]:
    m = t.conj().T @ t
    s = float(np.real(np.trace(m)))
    if s < 1e-300:
        raise DegenerateParameters("parametrized matrix has zero trace")
    return m / s, s


def parametrize(params) -> DensityMatrix:
    """Positive unit-trace state from 16 reals via rho = T^dag T / Tr."""
    x = np.asarray(params, dtype=float).reshape(-1)
    if x.shape != (16,):
        raise ValidationError(f"parametrize needs 16 real parameters, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("parameters must be finite")
    rho, _ = _rho_from_t(_t_from_params(x))
    return DensityMatrix(rho)


def _cost_vec(x: np.ndarray, p: np.ndarray, inv_var: np.ndarray) -> float:
    rho, _ = _rho_from_t(_t_from_params(x))
    resid = _predicted_vector(rho) - p
    return 0.5 * float(inv_var @ (resid * resid))


def _cost_grad_vec(x, p, inv_var):
    t = _t_from_params(x)
    rho, s = _rho_from_t(t)
    q = _predicted_vector(rho)
    resid = q - p

    # d Tr(Pi M) for each parameter slot via W = T Pi; real slots pick
    # 2 Re W[r, c], imaginary slots 2 Im W[r, c].
    w = np.matmul(t[None, :, :], _PROJECTORS)
    sel = w[:, _T_ROWS, _T_COLS]
    d_tr_pim = 2.0 * np.where(_T_IMAG, sel.imag, sel.real)
    tsel = t[_T_ROWS, _T_COLS]
    d_tr_m = 2.0 * np.where(_T_IMAG, tsel.imag, tsel.real)
    dq = (d_tr_pim - q[:, None] * d_tr_m[None, :]) / s

    cost = 0.5 * float(inv_var @ (resid * resid))
    grad = (inv_var * resid) @ dq
    return cost, grad


def mle_cost(rho, probs, sigmas) -> float:
    """Half the sigma-weighted squared residual between data and state."""
    p = probs.vector() if isinstance(probs, ProbabilitySet) else np.asarray(probs, float)
    sg = sigmas.vector() if isinstance(sigmas, SigmaSet) else np.asarray(sigmas, float)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    resid = _predicted_vector(m) - p
    return 0.5 * float(np.sum((resid / sg) ** 2))


def _params_from_rho(rho_matrix: np.ndarray) -> np.ndarray:
    """Lower-triangular T with T^dag T = rho, as a parameter vector.

    Uses the antidiagonal-flipped Cholesky factorization; the input must be
    positive definite (callers regularize first).
    """
    flip = np.fliplr(np.eye(4))
    chol = np.linalg.cholesky(flip @ rho_matrix @ flip)
    t = (flip @ chol @ flip).conj().T
    x = np.empty(16)
    x[:4] = np.real(np.diag(t))
    for k, (r, c) in enumerate(_COHERENCE_SLOTS):
        x[4 + 2 * k] = t[r, c].real
        x[5 + 2 * k] = t[r, c].imag
    return x


_MIXED_PARAMS = np.array([0.5] * 4 + [0.0] * 12)


def _initial_params(p: np.ndarray, policy: str) -> np.ndarray:
    if policy == "maximally_mixed":
        return _MIXED_PARAMS.copy()
    # Linear inversion, clipped to the positive cone and renormalized.
    try:
        x = _CANONICAL_DESIGN_INV @ p
        evals, vecs = jacobi_eigh(_matrix_from_params(x))
        lam = np.clip(evals, 0.0, None)
        total = float(lam.sum())
        if total < 1e-12:
            return _MIXED_PARAMS.copy()
        lam /= total
        rho0 = (vecs * lam) @ vecs.conj().T
        rho0 = (rho0 + rho0.conj().T) / 2.0
        eps = 1e-9
        rho0 = (rho0 + eps * np.eye(4)) / (1.0 + 4.0 * eps)
        return _params_from_rho(rho0)
    except np.linalg.LinAlgError:
        return _MIXED_PARAMS.copy()


def mle_initial_state(probs, policy: str = "from_linear_inversion") -> DensityMatrix:
    """The state the optimizer starts from, exposed for monotonicity checks."""
    if policy not in INITIAL_STATE_POLICIES:
        raise ValidationError(f"unknown initial_state_policy {policy!r}")
    p = probs.vector() if isinstance(probs, ProbabilitySet) else np.asarray(probs, float)
    return parametrize(_initial_params(p, policy))


def mle_reconstruct(probs, sigmas, config: MLEConfig | None = None) -> MLEResult:
    """Weighted least-squares state fit over the positive parametrization.

    Deterministic gradient descent: each accepted step must lower the cost
    (Armijo backtracking), so the returned cost never exceeds the cost at
    the initial state. ``converged`` reports whether the gradient infinity
    norm fell below the configured tolerance within the iteration budget.
    """
    cfg = config or MLEConfig()
    p = probs.vector() if isinstance(probs, ProbabilitySet) else np.asarray(probs, float)
    sg = sigmas.vector() if isinstance(sigmas, SigmaSet) else np.asarray(sigmas, float)
    if p.shape != (16,) or sg.shape != (16,):
        raise ValidationError("mle_reconstruct needs 16 probabilities and 16 sigmas")
    inv_var = 1.0 / np.maximum(sg, SIGMA_FLOOR) ** 2

    x = _initial_params(p, cfg.initial_state_policy)
    cost, grad = _cost_grad_vec(x, p, inv_var)
    step = 1.0
    iterations = 0
    converged = False
    stalled = 0
    for _ in range(cfg.max_iterations):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < cfg.gradient_tolerance:
            converged = True
            break
        gsq = float(grad @ grad)
        t_step = step
        while True:
            x_new = x - t_step * grad
            cost_new = _cost_vec(x_new, p, inv_var)
            if cost_new <= cost - 1e-4 * t_step * gsq:
                break
            t_step *= cfg.step_shrink_factor
            if t_step < 1e-18:
                break
        if t_step < 1e-18:
            break  # no acceptable step at float precision
        # Accepted decreases at the rounding floor of the cost mean the
        # minimum has been located as precisely as float64 allows.
        if cost - cost_new <= 1e-14 * (1.0 + abs(cost)):
            stalled += 1
        else:
            stalled = 0
        x = x_new
        iterations += 1
        step = t_step / cfg.step_shrink_factor  # let the step grow again
        cost, grad = _cost_grad_vec(x, p, inv_var)
        if stalled >= 5:
            break
    if not converged:
        converged = float(np.max(np.abs(grad))) < cfg.gradient_tolerance

    rho, _ = _rho_from_t(_t_from_params(x))
    return MLEResult(rho=DensityMatrix(rho), cost=cost,
                     iterations=iterations, converged=converged)
