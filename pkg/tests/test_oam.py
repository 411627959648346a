"""Fork-diffraction interface chain against hand-traced amplitudes.

For a single-ring input only two of the four diffraction-order paths can
reach l = 0 on both photons, so every output below is computable by hand:
success weights are |c_1|^2 / (2 sum |c|^2 counts), and the modulator
phase interpolates between the Bell states as cos^2(theta/2).
"""

import math

import numpy as np
import pytest

from oampol.errors import AllZeroCoefficients, EmptyState, ValidationError
from oampol.oam import (
    DEFAULT_L_MAX,
    EPM_PATHS,
    InterfaceConfig,
    OAMBiphotonKet,
    PathLabeledKet,
    PolarizationKet,
    bell_fidelity_of_chain,
    chain_config_from_json_obj,
    etalon_filter,
    fork_diffract,
    map_to_polarization,
    run_chain,
    sfwm_state,
)
from oampol.quantum import bell_state

C1_ONLY = {1: 1.0}


# --- source state -----------------------------------------------------------


def test_sfwm_state_structure_and_normalization():
    ket = sfwm_state({0: 1.0, 1: 2.0})
    norm = math.sqrt(1.0 + 2.0 * 4.0)
    assert abs(ket.amplitude(0, 0) - 1.0 / norm) < 1e-15
    assert abs(ket.amplitude(1, 1) - 2.0 / norm) < 1e-15
    assert abs(ket.amplitude(-1, -1) - 2.0 / norm) < 1e-15
    assert ket.amplitude(1, -1) == 0j  # counter-propagation forbids l_s != l_as
    assert abs(ket.norm_squared() - 1.0) < 1e-12
    only = sfwm_state({0: 3.0})
    assert only.amplitude(0, 0) == 1.0


def test_sfwm_state_validation():
    with pytest.raises(AllZeroCoefficients):
        sfwm_state({})
    with pytest.raises(AllZeroCoefficients):
        sfwm_state({0: 0.0, 1: 0.0})
    with pytest.raises(ValidationError):
        sfwm_state({-1: 1.0})
    with pytest.raises(ValidationError):
        sfwm_state({0: math.inf})
    with pytest.raises(ValidationError):
        sfwm_state({3: 1.0}, l_max=2)


def test_biphoton_ket_validation():
    ket = OAMBiphotonKet({(1, 1): 3.0, (-1, -1): 4.0})
    assert abs(ket.amplitude(1, 1) - 0.6) < 1e-15
    assert abs(ket.amplitude(-1, -1) - 0.8) < 1e-15
    with pytest.raises(ValidationError):
        OAMBiphotonKet({(5, 5): 1.0})  # beyond the default truncation
    with pytest.raises(EmptyState):
        OAMBiphotonKet({(0, 0): 0.0})
    with pytest.raises(ValidationError):
        OAMBiphotonKet({(0, 0): 1.0}, l_max=-1)
    with pytest.raises(ValidationError):
        OAMBiphotonKet({"xy": 1.0})


def test_path_labeled_ket_validation():
    ket = PathLabeledKet({(0, 0, 1, -1): 0.5, (0, 0, -1, 1): 0.5j})
    assert ket.amplitude(0, 0, 1, -1) == 0.5
    assert abs(ket.norm_squared() - 0.5) < 1e-15
    assert PathLabeledKet({}).norm_squared() == 0.0
    with pytest.raises(ValidationError):
        PathLabeledKet({(0, 0, 2, 1): 1.0})
    with pytest.raises(ValidationError):
        PathLabeledKet({(0, 0, 1, 0): 1.0})


# --- diffraction and filtering ------------------------------------------------


def test_fork_diffract_splits_amplitude_four_ways():
    ket = sfwm_state(C1_ONLY)
    paths = fork_diffract(ket)
    amp = ket.amplitude(1, 1)
    # the (1, 1) component lands on the four shifted pairs with weight 1/2
    assert abs(paths.amplitude(2, 2, 1, 1) - 0.5 * amp) < 1e-15
    assert abs(paths.amplitude(2, 0, 1, -1) - 0.5 * amp) < 1e-15
    assert abs(paths.amplitude(0, 2, -1, 1) - 0.5 * amp) < 1e-15
    assert abs(paths.amplitude(0, 0, -1, -1) - 0.5 * amp) < 1e-15
    assert abs(paths.norm_squared() - 1.0) < 1e-12  # splitting preserves norm


def test_rotated_fork_negates_the_anti_stokes_order_labels():
    ket = sfwm_state({0: 0.6, 1: 0.8})
    plain = fork_diffract(ket, rotated_anti_stokes=False)
    rotated = fork_diffract(ket, rotated_anti_stokes=True)
    assert set(rotated.amplitudes) == {
        (ls, las, os_, -oas) for (ls, las, os_, oas) in plain.amplitudes}
    for (ls, las, os_, oas), amp in plain.amplitudes.items():
        assert rotated.amplitude(ls, las, os_, -oas) == amp


def test_etalon_keeps_only_fundamental_modes():
    paths = fork_diffract(sfwm_state(C1_ONLY))
    kept = etalon_filter(paths)
    assert set(kept.amplitudes) == {(0, 0, -1, -1), (0, 0, 1, 1)}
    assert abs(kept.norm_squared() - 0.25) < 1e-15


def test_map_to_polarization_requires_filtered_input():
    with pytest.raises(EmptyState):
        map_to_polarization(PathLabeledKet({}), InterfaceConfig())
    with pytest.raises(ValidationError):
        map_to_polarization(PathLabeledKet({(1, 0, 1, 1): 1.0}), InterfaceConfig())


# --- full chain ------------------------------------------------------------------


def test_truth_table_of_bell_states():
    cases = [
        (False, 0.0, "phi+"),
        (False, math.pi, "phi-"),
        (True, 0.0, "psi+"),
        (True, math.pi, "psi-"),
    ]
    for rotated, theta, name in cases:
        config = InterfaceConfig(theta=theta, anti_stokes_rotated=rotated)
        assert abs(bell_fidelity_of_chain(C1_ONLY, config, name) - 1.0) < 1e-12
        out = run_chain(C1_ONLY, config)
        assert abs(out.success_weight - 0.25) < 1e-12
        overlap = abs(np.vdot(bell_state(name), out.vector)) ** 2
        assert abs(overlap - 1.0) < 1e-12


def test_cross_family_extinction_is_exact():
    unrot = InterfaceConfig(theta=0.0, anti_stokes_rotated=False)
    rot = InterfaceConfig(theta=0.0, anti_stokes_rotated=True)
    # the unrotated chain has exactly zero HV and VH amplitude, so the
    # Psi-family overlap vanishes identically, not just numerically
    assert bell_fidelity_of_chain(C1_ONLY, unrot, "psi+") == 0.0
    assert bell_fidelity_of_chain(C1_ONLY, unrot, "psi-") == 0.0
    assert bell_fidelity_of_chain(C1_ONLY, rot, "phi+") == 0.0
    assert bell_fidelity_of_chain(C1_ONLY, rot, "phi-") == 0.0
    out = run_chain(C1_ONLY, unrot)
    assert out.amplitude("HV") == 0j
    assert out.amplitude("VH") == 0j
    assert abs(abs(out.amplitude("HH")) - abs(out.amplitude("VV"))) < 1e-15


def test_modulator_phase_interpolates_between_bell_states():
    for theta in (0.0, 0.4, 0.7, 1.9, math.pi, 5.0):
        config = InterfaceConfig(theta=theta)
        f_plus = bell_fidelity_of_chain(C1_ONLY, config, "phi+")
        f_minus = bell_fidelity_of_chain(C1_ONLY, config, "phi-")
        assert abs(f_plus - math.cos(theta / 2.0) ** 2) < 1e-12
        assert abs(f_minus - math.sin(theta / 2.0) ** 2) < 1e-12
    out = run_chain(C1_ONLY, InterfaceConfig(theta=0.7))
    assert abs(np.angle(out.amplitude("VV") / out.amplitude("HH")) - 0.7) < 1e-12
    a = run_chain(C1_ONLY, InterfaceConfig(theta=0.3)).vector
    b = run_chain(C1_ONLY, InterfaceConfig(theta=0.3 + 2.0 * math.pi)).vector
    assert np.allclose(a, b, atol=1e-9)


def test_success_weight_counts_the_filtered_norm():
    # equal c0 and c1: only the two l=+-1 components reach l=0, each with
    # amplitude (1/2)(1/sqrt(3)), so the kept weight is 1/6
    out = run_chain({0: 1.0, 1: 1.0}, InterfaceConfig())
    assert abs(out.success_weight - 1.0 / 6.0) < 1e-12
    # general ladder: weight = c1^2 / (2 * (c0^2 + 2 c1^2 + 2 c2^2))
    c = {0: 0.5, 1: 0.8, 2: 0.3}
    total = 0.5**2 + 2 * 0.8**2 + 2 * 0.3**2
    out = run_chain(c, InterfaceConfig())
    assert abs(out.success_weight - 0.8**2 / (2.0 * total)) < 1e-12
    assert abs(bell_fidelity_of_chain(c, InterfaceConfig(), "phi+") - 1.0) < 1e-12


def test_source_without_ring_one_yields_nothing():
    with pytest.raises(EmptyState):
        run_chain({0: 1.0}, InterfaceConfig())
    with pytest.raises(EmptyState):
        run_chain({0: 1.0, 2: 0.7}, InterfaceConfig())


# --- containers and configuration --------------------------------------------------


def test_polarization_ket_validation():
    vec = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    ket = PolarizationKet(vector=vec, success_weight=0.25)
    assert abs(ket.amplitude("HH") - vec[0]) < 1e-15
    with pytest.raises(ValueError):
        ket.vector[0] = 2.0
    with pytest.raises(ValidationError):
        ket.amplitude("XX")
    with pytest.raises(ValidationError):
        PolarizationKet(vector=np.ones(4), success_weight=0.5)  # norm 2
    with pytest.raises(ValidationError):
        PolarizationKet(vector=np.ones(3), success_weight=0.5)
    with pytest.raises(ValidationError):
        PolarizationKet(vector=vec, success_weight=1.5)


def test_interface_config_validation():
    assert InterfaceConfig().epm_path in EPM_PATHS
    assert DEFAULT_L_MAX == 4
    with pytest.raises(ValidationError):
        InterfaceConfig(theta=math.nan)
    with pytest.raises(ValidationError):
        InterfaceConfig(epm_path="anti_stokes")


def test_chain_config_json_parsing():
    coeffs, config = chain_config_from_json_obj(
        {"c": {"0": 1.0, "1": 0.5}, "rotated": True, "theta_rad": 1.2})
    assert coeffs == {0: 1.0, 1: 0.5}
    assert config.anti_stokes_rotated is True
    assert abs(config.theta - 1.2) < 1e-15
    coeffs, config = chain_config_from_json_obj({"c": {"1": 1.0}})
    assert config.anti_stokes_rotated is False
    assert config.theta == 0.0

    with pytest.raises(ValidationError):
        chain_config_from_json_obj(["c"])
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"rotated": False})
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"c": {}})
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"c": {"1": "x"}})
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"c": {"1": 1.0}, "rotated": 1})
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"c": {"1": 1.0}, "theta_rad": True})
    with pytest.raises(ValidationError):
        chain_config_from_json_obj({"c": {"1": 1.0}, "l_max": 4})


def test_bell_fidelity_accepts_explicit_targets():
    config = InterfaceConfig()
    f = bell_fidelity_of_chain(C1_ONLY, config, [1.0, 0.0, 0.0, 1.0])
    assert abs(f - 1.0) < 1e-12  # target is normalized internally
    with pytest.raises(ValidationError):
        bell_fidelity_of_chain(C1_ONLY, config, [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        bell_fidelity_of_chain(C1_ONLY, config, [1.0, 0.0])
    with pytest.raises(ValidationError):
        bell_fidelity_of_chain(C1_ONLY, config, "phi")
