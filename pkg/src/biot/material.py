"""Physical parameters and closed-form poroelastic parameter relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def lame_from_young(young: float, poisson: float) -> tuple[float, float]:
    """Lame parameters from Young's modulus and Poisson's ratio.

    lambda = E*nu / ((1-2nu)(1+nu)), mu = E / (2(1+nu)); mu equals the
    shear modulus G.
    """
    if young <= 0.0:
        raise ValueError(f"Young modulus must be positive, got {young}")
    if not -1.0 < poisson < 0.5:
        raise ValueError(
            f"Poisson ratio must lie in (-1, 1/2), got {poisson} "
            "(nu = 1/2 is incompressible)"
        )
    lam = young * poisson / ((1.0 - 2.0 * poisson) * (1.0 + poisson))
    mu = young / (2.0 * (1.0 + poisson))
    return lam, mu


def derive_coupling(
    porosity: float, fluid_compressibility: float, k_s: float, k_dr: float
) -> tuple[float, float]:
    """Biot coefficient and modulus from micromechanical quantities.

    1/M = phi*c_f + (alpha_B - phi)/K_s with alpha_B = 1 - K_dr/K_s.
    ``k_s = inf`` (incompressible grains) gives alpha_B = 1 and
    1/M = phi*c_f.
    """
    if not 0.0 < porosity < 1.0:
        raise ValueError(f"porosity must lie in (0, 1), got {porosity}")
    if fluid_compressibility < 0.0:
        raise ValueError("fluid compressibility must be non-negative")
    if k_s <= 0.0:
        raise ValueError("solid grain bulk modulus must be positive")
    if not 0.0 < k_dr < k_s:
        raise ValueError(
            f"drained bulk modulus must satisfy 0 < K_dr < K_s, "
            f"got K_dr={k_dr}, K_s={k_s}"
        )
    alpha_b = 1.0 - k_dr / k_s
    m_inv = porosity * fluid_compressibility + (alpha_b - porosity) / k_s
    return alpha_b, np.inf if m_inv == 0.0 else 1.0 / m_inv


def isotropic_stress(lam: float, mu: float, eps: np.ndarray) -> np.ndarray:
    """Action of the isotropic elasticity tensor: C eps = lam tr(eps) I + 2 mu eps."""
    eps = np.asarray(eps, dtype=float)
    d = eps.shape[-1]
    trace = np.trace(eps, axis1=-2, axis2=-1)
    return lam * trace[..., None, None] * np.eye(d) + 2.0 * mu * eps


@dataclass(frozen=True)
class MaterialParams:
    """Poroelastic material data; immutable and freely shareable.

    The permeability is a per-axis diagonal (isotropic when scalar).
    ``k_dr`` defaults to lambda + 2 mu / 3; ``rho_b`` is derived from the
    porosity-weighted phase densities when not supplied.
    """

    lam: float
    mu: float
    alpha_b: float
    biot_modulus: float
    permeability: np.ndarray
    viscosity: float
    k_dr: float | None = None
    porosity: float = 0.2
    c_f: float | None = None
    k_s: float | None = None
    k_f: float | None = None
    rho_f: float = 1.0
    rho_s: float = 1.0
    rho_b: float | None = None
    gravity: np.ndarray | None = None

    def __post_init__(self):
        perm = np.atleast_1d(np.asarray(self.permeability, dtype=float))
        object.__setattr__(self, "permeability", perm)
        if self.lam < 0.0 or self.mu <= 0.0:
            raise ValueError(f"need lambda >= 0 and mu > 0, got {self.lam}, {self.mu}")
        if not 0.0 < self.alpha_b <= 1.0:
            raise ValueError(f"Biot coefficient must lie in (0, 1], got {self.alpha_b}")
        if self.biot_modulus <= 0.0:
            raise ValueError("Biot modulus must be positive")
        if np.any(perm <= 0.0):
            raise ValueError("permeability entries must be positive")
        if self.viscosity <= 0.0:
            raise ValueError("viscosity must be positive")
        if not 0.0 < self.porosity < 1.0:
            raise ValueError(f"porosity must lie in (0, 1), got {self.porosity}")
        if self.k_dr is None:
            object.__setattr__(self, "k_dr", self.lam + 2.0 * self.mu / 3.0)
        if self.rho_b is None:
            object.__setattr__(
                self,
                "rho_b",
                self.porosity * self.rho_f + (1.0 - self.porosity) * self.rho_s,
            )

    @property
    def storage(self) -> float:
        """Storage coefficient c_0 = 1/M."""
        return 1.0 / self.biot_modulus

    def permeability_diag(self, dim: int) -> np.ndarray:
        perm = self.permeability
        if perm.size == 1:
            return np.full(dim, perm[0])
        if perm.size != dim:
            raise ValueError(
                f"permeability has {perm.size} entries for dimension {dim}"
            )
        return perm

    def gravity_vector(self, dim: int) -> np.ndarray:
        if self.gravity is None:
            return np.zeros(dim)
        g = np.asarray(self.gravity, dtype=float)
        if g.size != dim:
            raise ValueError(f"gravity has {g.size} entries for dimension {dim}")
        return g


def _zero_vector(points):
    points = np.atleast_2d(points)
    return np.zeros_like(points)


def _zero_scalar(points):
    return np.zeros(np.atleast_2d(points).shape[0])


@dataclass(frozen=True)
class ReferenceState:
    """Reference fields: initial displacement, pressure and total stress.

    ``sigma_0`` returns symmetric tensors; its volumetric part
    sigma_{v,0} = tr(sigma_0)/3 is derived on evaluation.  ``m_0`` and
    ``rho_f0`` only enter the fluid-mass postprocessing.
    """

    u0: Callable = _zero_vector
    p0: Callable = _zero_scalar
    sigma0: Callable | None = None
    m0: float = 0.0
    rho_f0: float = 1.0

    def sigma0_at(self, points) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.sigma0 is None:
            d = points.shape[1]
            return np.zeros((points.shape[0], d, d))
        sig = np.asarray(self.sigma0(points), dtype=float)
        if not np.allclose(sig, np.swapaxes(sig, -1, -2), atol=1e-12):
            raise ValueError("reference stress must be symmetric")
        return sig

    def sigma_v0_at(self, points) -> np.ndarray:
        return np.trace(self.sigma0_at(points), axis1=-2, axis2=-1) / 3.0


@dataclass(frozen=True)
class StressState:
    """Pointwise stress evaluation: volumetric, total and deviatoric parts."""

    points: np.ndarray
    sigma_v: np.ndarray
    sigma: np.ndarray
    deviatoric: np.ndarray


def volumetric_stress(u, p, ref: ReferenceState, mat: MaterialParams, points=None):
    """Volumetric/total/deviatoric stress of a discrete solution state.

    sigma_v = sigma_{v,0} + K_dr div(u - u_0) - alpha_B (p - p_0) and
    sigma = sigma_0 + C eps(u - u_0) - alpha_B (p - p_0) I, split as
    sigma = (tr sigma / 3) I + s.  ``u`` and ``p`` are discrete fields on
    the same mesh (see :mod:`biot.fespace`).
    """
    if u.mesh is not p.mesh:
        raise ValueError("displacement and pressure live on different meshes")
    if points is None:
        points = u.default_points()
    points = np.atleast_2d(points)
    d = points.shape[1]
    dp = p.value(points) - ref.p0(points)
    eps = u.strain(points) - symmetric_gradient_of(ref.u0, points, d)
    div = np.trace(eps, axis1=-2, axis2=-1)
    sigma_v = ref.sigma_v0_at(points) + mat.k_dr * div - mat.alpha_b * dp
    sigma = (
        ref.sigma0_at(points)
        + isotropic_stress(mat.lam, mat.mu, eps)
        - mat.alpha_b * dp[:, None, None] * np.eye(d)
    )
    dev = sigma - (np.trace(sigma, axis1=-2, axis2=-1) / 3.0)[:, None, None] * np.eye(d)
    return StressState(points=points, sigma_v=sigma_v, sigma=sigma, deviatoric=dev)


def fluid_mass(u, p, ref: ReferenceState, mat: MaterialParams, points=None):
    """Fluid mass per bulk volume:
    m = m_0 + rho_f0 alpha_B div(u - u_0) + rho_f0 (p - p_0)/M.
    """
    if u.mesh is not p.mesh:
        raise ValueError("displacement and pressure live on different meshes")
    if points is None:
        points = u.default_points()
    points = np.atleast_2d(points)
    d = points.shape[1]
    dp = p.value(points) - ref.p0(points)
    eps = u.strain(points) - symmetric_gradient_of(ref.u0, points, d)
    div = np.trace(eps, axis1=-2, axis2=-1)
    return ref.m0 + ref.rho_f0 * (mat.alpha_b * div + dp / mat.biot_modulus)


def symmetric_gradient_of(fn, points, dim, h: float = 1e-6) -> np.ndarray:
    """Symmetrised finite-difference gradient of a vector-valued callable.

    Used for reference displacement fields given as plain functions; the
    zero default short-circuits exactly.
    """
    points = np.atleast_2d(points)
    if fn is _zero_vector:
        return np.zeros((points.shape[0], dim, dim))
    grad = np.empty((points.shape[0], dim, dim))
    for a in range(dim):
        shift = np.zeros(dim)
        shift[a] = h
        grad[:, :, a] = (fn(points + shift) - fn(points - shift)) / (2.0 * h)
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))
