"""Shared samplers for randomized test loops."""

import numpy as np

from oampol.quantum import SINGLE_PHOTON_KETS, DensityMatrix


def random_physical_rho(rng) -> DensityMatrix:
    """Full-rank random state: G G^dagger normalized (Ginibre construction)."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g @ g.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))


def random_pure_ket(rng) -> np.ndarray:
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return v / np.linalg.norm(v)


def random_single_photon_ket(rng) -> np.ndarray:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def random_product_ket(rng) -> np.ndarray:
    return np.kron(random_single_photon_ket(rng), random_single_photon_ket(rng))


def random_hermitian(rng, n: int = 4, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (g + g.conj().T) / 2.0
