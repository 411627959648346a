"""Fork-hologram interface from biphoton OAM entanglement to polarization.

The pair source emits photons whose azimuthal indices are locked equal by
the counter-propagating geometry, giving c0|0,0> + sum_l c_l(|l,l>+|-l,-l>).
Each photon then meets a forked grating whose first diffraction orders
shift its index by +1 or -1; an etalon transmits only the fundamental
(l = 0) mode of each path. The only components that survive are those a
shift pair can bring to (0, 0). Recombining the orders on polarizing beam
splitters labels the +1 order H and the half-wave-plate-rotated -1 order V,
and a phase modulator on the Stokes -1 path sets the relative phase,
selecting which of the four polarization Bell states emerges.

Rotating the anti-Stokes hologram by 180 degrees reverses the sign of the
OAM it imparts, which swaps the interface output between the Phi and Psi
Bell families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllZeroCoefficients, EmptyState, ValidationError
from .quantum import TWO_QUBIT_LABELS, bell_state

DEFAULT_L_MAX = 4
EPM_PATHS = ("stokes_minus_order",)

_NORM_TOL = 1e-12


def _check_amplitude(value) -> complex:
    amp = complex(value)
    if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
        raise ValidationError(f"amplitude {value!r} is not finite")
    return amp


@dataclass(frozen=True, eq=False)
class OAMBiphotonKet:
    """Normalized sparse ket over joint azimuthal indices (l_s, l_as)."""

    amplitudes: dict[tuple[int, int], complex]
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        if not (isinstance(self.l_max, int) and self.l_max >= 0):
            raise ValidationError(f"l_max must be a nonnegative integer, got {self.l_max!r}")
        cleaned: dict[tuple[int, int], complex] = {}
        for key, value in self.amplitudes.items():
            try:
                ls, las = int(key[0]), int(key[1])
            except (TypeError, ValueError, IndexError):
                raise ValidationError(f"amplitude key {key!r} is not an (l_s, l_as) pair")
            if max(abs(ls), abs(las)) > self.l_max:
                raise ValidationError(
                    f"component ({ls}, {las}) exceeds the truncation bound l_max={self.l_max}")
            amp = _check_amplitude(value)
            if amp != 0:
                cleaned[(ls, las)] = cleaned.get((ls, las), 0j) + amp
        norm = math.sqrt(sum(abs(a) ** 2 for a in cleaned.values()))
        if norm == 0.0:
            raise EmptyState("biphoton ket has no nonzero amplitude")
        object.__setattr__(self, "amplitudes", {k: v / norm for k, v in cleaned.items()})

    def amplitude(self, l_s: int, l_as: int) -> complex:
        return self.amplitudes.get((l_s, l_as), 0j)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())


@dataclass(frozen=True, eq=False)
class PathLabeledKet:
    """Sparse ket over (l_s, l_as, order_s, order_as); not normalized.

    The squared norm tracks the probability remaining after diffraction
    and filtering, so no constructor renormalization happens here.
    """

    amplitudes: dict[tuple[int, int, int, int], complex]

    def __post_init__(self):
        cleaned: dict[tuple[int, int, int, int], complex] = {}
        for key, value in self.amplitudes.items():
            try:
                ls, las, os_, oas = (int(key[0]), int(key[1]), int(key[2]), int(key[3]))
            except (TypeError, ValueError, IndexError):
                raise ValidationError(
                    f"amplitude key {key!r} is not an (l_s, l_as, order_s, order_as) tuple")
            if os_ not in (1, -1) or oas not in (1, -1):
                raise ValidationError(f"diffraction orders must be +1 or -1, got {key!r}")
            amp = _check_amplitude(value)
            if amp != 0:
                cleaned[(ls, las, os_, oas)] = cleaned.get((ls, las, os_, oas), 0j) + amp
        object.__setattr__(self, "amplitudes", cleaned)

    def amplitude(self, l_s: int, l_as: int, order_s: int, order_as: int) -> complex:
        return self.amplitudes.get((l_s, l_as, order_s, order_as), 0j)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())


@dataclass(frozen=True)
class InterfaceConfig:
    """Phase-modulator setting and anti-Stokes hologram orientation."""

    theta: float = 0.0
    anti_stokes_rotated: bool = False
    epm_path: str = "stokes_minus_order"

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValidationError(f"theta must be finite, got {self.theta!r}")
        if self.epm_path not in EPM_PATHS:
            raise ValidationError(
                f"epm_path must be one of {EPM_PATHS}, got {self.epm_path!r}")


@dataclass(frozen=True, eq=False)
class PolarizationKet:
    """Two-qubit polarization ket in the (HH, HV, VH, VV) basis.

    success_weight is the squared norm that survived diffraction and
    etalon filtering, before the final normalization.
    """

    vector: np.ndarray
    success_weight: float

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex)
        if vec.shape != (4,):
            raise ValidationError(f"polarization ket must have 4 amplitudes, got {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if not math.isclose(norm, 1.0, abs_tol=_NORM_TOL):
            raise ValidationError(f"polarization ket norm {norm!r} is not 1")
        if not 0.0 <= self.success_weight <= 1.0:
            raise ValidationError(
                f"success_weight must lie in [0, 1], got {self.success_weight!r}")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    def amplitude(self, label: str) -> complex:
        if label not in TWO_QUBIT_LABELS:
            raise ValidationError(f"unknown basis label {label!r}")
        return complex(self.vector[TWO_QUBIT_LABELS.index(label)])


def sfwm_state(c, l_max: int = DEFAULT_L_MAX) -> OAMBiphotonKet:
    """Biphoton state c0|0,0> + sum_{l>=1} c_l (|l,l> + |-l,-l>), normalized.

    ``c`` maps nonnegative integer l to a real coefficient; counter-
    propagation forces l_s = l_as, so one coefficient feeds both members
    of each +-l pair.
    """
    coeffs: dict[int, float] = {}
    for key, value in dict(c).items():
        l = int(key)
        if l < 0:
            raise ValidationError(f"coefficient index must be >= 0, got {key!r}")
        v = float(value)
        if not math.isfinite(v):
            raise ValidationError(f"coefficient c[{l}] = {value!r} is not finite")
        coeffs[l] = v
    if not coeffs or all(v == 0.0 for v in coeffs.values()):
        raise AllZeroCoefficients("at least one coefficient must be nonzero")
    top = max(coeffs)
    if l_max < top:
        raise ValidationError(f"l_max={l_max} is below the largest supplied index {top}")
    amplitudes: dict[tuple[int, int], complex] = {}
    for l, v in coeffs.items():
        if v == 0.0:
            continue
        if l == 0:
            amplitudes[(0, 0)] = v
        else:
            amplitudes[(l, l)] = v
            amplitudes[(-l, -l)] = v
    return OAMBiphotonKet(amplitudes=amplitudes, l_max=l_max)


def fork_diffract(ket: OAMBiphotonKet, rotated_anti_stokes: bool = False) -> PathLabeledKet:
    """Split every component into the four (order_s, order_as) paths.

    Order n shifts l to l + n; the 180-degree-rotated anti-Stokes hologram
    imparts the opposite shift. Each joint path carries half the input
    amplitude, so the four paths together preserve the norm. Components
    pushed past l_max + 2 are dropped (diffraction from a valid input
    reaches at most l_max + 1).
    """
    sign = -1 if rotated_anti_stokes else 1
    bound = ket.l_max + 2
    out: dict[tuple[int, int, int, int], complex] = {}
    for (ls, las), amp in ket.amplitudes.items():
        for order_s in (1, -1):
            for order_as in (1, -1):
                nls = ls + order_s
                nlas = las + sign * order_as
                if max(abs(nls), abs(nlas)) > bound:
                    continue
                key = (nls, nlas, order_s, order_as)
                out[key] = out.get(key, 0j) + 0.5 * amp
    return PathLabeledKet(amplitudes=out)


def etalon_filter(ket: PathLabeledKet) -> PathLabeledKet:
    """Keep only the l_s = l_as = 0 components, without renormalizing."""
    kept = {k: a for k, a in ket.amplitudes.items() if k[0] == 0 and k[1] == 0}
    return PathLabeledKet(amplitudes=kept)


def map_to_polarization(ket: PathLabeledKet, config: InterfaceConfig) -> PolarizationKet:
    """Recombine the filtered paths into a polarization ket.

    Order +1 maps to H; the -1 order passes the half-wave plate and maps
    to V. The modulator phase e^{i theta} rides on the Stokes -1 path.
    """
    if not ket.amplitudes:
        raise EmptyState("no l=0 component survives etalon filtering")
    vec = np.zeros(4, dtype=complex)
    phase = complex(math.cos(config.theta), math.sin(config.theta))
    for (ls, las, order_s, order_as), amp in ket.amplitudes.items():
        if ls != 0 or las != 0:
            raise ValidationError(
                f"component ({ls}, {las}) has not been etalon-filtered to l=0")
        if order_s == -1:
            amp = amp * phase
        index = (0 if order_s == 1 else 2) + (0 if order_as == 1 else 1)
        vec[index] += amp
    weight = float(np.real(np.vdot(vec, vec)))
    if weight <= 0.0:
        raise EmptyState("surviving paths interfere to zero amplitude")
    return PolarizationKet(vector=vec / math.sqrt(weight),
                           success_weight=min(weight, 1.0))


def run_chain(c, config: InterfaceConfig, l_max: int = DEFAULT_L_MAX) -> PolarizationKet:
    """Source coefficients through fork, etalon, and recombination."""
    ket = sfwm_state(c, l_max)
    diffracted = fork_diffract(ket, config.anti_stokes_rotated)
    return map_to_polarization(etalon_filter(diffracted), config)


def bell_fidelity_of_chain(c, config: InterfaceConfig, target) -> float:
    """|<target|chain output>|^2 for a Bell-state name or explicit ket."""
    out = run_chain(c, config)
    tgt = bell_state(target) if isinstance(target, str) else np.asarray(target, dtype=complex)
    if tgt.shape != (4,):
        raise ValidationError(f"target ket must have 4 amplitudes, got {tgt.shape}")
    norm = float(np.linalg.norm(tgt))
    if norm == 0.0:
        raise ValidationError("target ket must be nonzero")
    return float(abs(np.vdot(tgt / norm, out.vector)) ** 2)


def chain_config_from_json_obj(obj) -> tuple[dict[int, float], InterfaceConfig]:
    """Parse {"c": {"0": ..., "1": ...}, "rotated": bool, "theta_rad": float}."""
    if not isinstance(obj, dict):
        raise ValidationError("chain configuration must be a JSON object")
    if "c" not in obj or not isinstance(obj["c"], dict) or not obj["c"]:
        raise ValidationError('chain configuration needs a nonempty "c" coefficient map')
    try:
        coeffs = {int(k): float(v) for k, v in obj["c"].items()}
    except (TypeError, ValueError):
        raise ValidationError('"c" keys must be integers and values numbers')
    rotated = obj.get("rotated", False)
    if not isinstance(rotated, bool):
        raise ValidationError(f'"rotated" must be true or false, got {rotated!r}')
    theta = obj.get("theta_rad", 0.0)
    if not isinstance(theta, (int, float)) or isinstance(theta, bool):
        raise ValidationError(f'"theta_rad" must be a number, got {theta!r}')
    unknown = set(obj) - {"c", "rotated", "theta_rad"}
    if unknown:
        raise ValidationError(f"unknown chain configuration keys: {sorted(unknown)}")
    config = InterfaceConfig(theta=float(theta), anti_stokes_rotated=rotated)
    return coeffs, config
