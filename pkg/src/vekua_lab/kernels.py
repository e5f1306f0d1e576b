"""Closed-form fundamental solutions and their derivatives.

Four kernel families:

* cauchy    E(x) = -x / (sigma_n |x|^n), the grade-1 kernel annihilated by
            the Dirac operator away from the origin;
* newton    N(x) = 1 / (sigma_n (n-2) |x|^{n-2}) with grad N = E;
* yukawa    theta_q(x) = exp(-sqrt(q)|x|) / (4 pi |x|), n = 3, satisfying
            (-Delta + q) theta = 0 away from 0 with unit delta flux;
* vekua_phi Phi(x) = grad theta_q(x) - lam * theta_q(x) with q = |lam|^2,
            the grade-1 kernel that reproduces scalar parts of solutions
            of Dw = lam conj(w); lam = 0 reduces it to the cauchy kernel.

Every derivative here is closed form - nothing is differenced - so kernel
identity checks run at machine precision independent of any grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clifford import Multivector, gp_array, vector_to_array

FOUR_PI = 4.0 * math.pi


def sphere_area(n):
    """Surface area of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass
class KernelSpec:
    """Descriptor for a kernel family used by the quadrature engines."""

    family: str
    dimension: int = 3
    q: float | None = None
    lam: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in ("cauchy", "newton", "yukawa", "vekua_phi"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "yukawa":
            if self.q is None or self.q <= 0:
                raise ValueError("yukawa kernel requires q > 0")
        if self.family == "vekua_phi":
            if self.lam is None:
                raise ValueError("vekua_phi kernel requires the exponential rate vector")
            self.lam = np.asarray(self.lam, dtype=float)

    @property
    def singular_order(self):
        n = self.dimension
        return {"cauchy": n - 1, "newton": n - 2, "yukawa": n - 2, "vekua_phi": n - 1}[
            self.family
        ]


def _radii(points, n):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != n:
        raise ValueError(f"points must have {n} components, got {pts.shape[-1]}")
    r = np.sqrt(np.sum(pts * pts, axis=-1))
    if np.any(r == 0.0):
        raise ValueError("kernel evaluation at the origin is rejected")
    return pts, r


# -- cauchy ------------------------------------------------------------------


def cauchy_E_components(points, n=3):
    """Cauchy kernel components, shape (..., n)."""
    pts, r = _radii(points, n)
    return -pts / (sphere_area(n) * r[..., None] ** n)


def cauchy_E(x, n=3) -> Multivector:
    return Multivector.from_vector(cauchy_E_components(np.asarray(x, dtype=float), n), n)


def cauchy_E_jacobian(points, n=3):
    """J[..., i, j] = d_i E_j in closed form."""
    pts, r = _radii(points, n)
    sig = sphere_area(n)
    rn = r[..., None, None] ** n
    eye = np.eye(n)
    outer = pts[..., :, None] * pts[..., None, :]
    return -eye / (sig * rn) + n * outer / (sig * rn * r[..., None, None] ** 2)


# -- newton ------------------------------------------------------------------


def newton_N_components(points, n=3):
    """Newton kernel value and gradient; the gradient equals the cauchy kernel."""
    pts, r = _radii(points, n)
    value = 1.0 / (sphere_area(n) * (n - 2) * r ** (n - 2))
    return value, cauchy_E_components(points, n)


def newton_N(x, n=3):
    value, grad = newton_N_components(np.asarray(x, dtype=float), n)
    return float(value), grad


# -- yukawa ------------------------------------------------------------------


def _yukawa_radial(r, q):
    """theta(r), theta'(r), theta''-support term for the screened 3-d kernel."""
    kappa = math.sqrt(q)
    damp = np.exp(-kappa * r)
    theta = damp / (FOUR_PI * r)
    dtheta = -(1.0 + kappa * r) * damp / (FOUR_PI * r**2)
    ddtheta = (kappa**2 * r**2 + 2.0 * kappa * r + 2.0) * damp / (FOUR_PI * r**3)
    return theta, dtheta, ddtheta


def yukawa_theta_components(points, q):
    """Screened kernel value and gradient, n = 3; q = 0 gives the Newton kernel."""
    if q < 0:
        raise ValueError("yukawa kernel requires q >= 0")
    pts, r = _radii(points, 3)
    theta, dtheta, _ = _yukawa_radial(r, q)
    grad = dtheta[..., None] * (pts / r[..., None])
    return theta, grad


def yukawa_theta(x, q):
    if q <= 0:
        raise ValueError("yukawa kernel requires q > 0")
    value, grad = yukawa_theta_components(np.asarray(x, dtype=float), q)
    return float(value), grad


def yukawa_hessian(points, q):
    """H[..., i, j] = d_i d_j theta_q in closed form (n = 3)."""
    pts, r = _radii(points, 3)
    _, dtheta, ddtheta = _yukawa_radial(r, q)
    hat = pts / r[..., None]
    outer = hat[..., :, None] * hat[..., None, :]
    radial = (ddtheta - dtheta / r)[..., None, None]
    return radial * outer + (dtheta / r)[..., None, None] * np.eye(3)


# -- vekua_phi -----------------------------------------------------------------


def vekua_phi_components(points, lam):
    """Phi = grad theta_q - lam theta_q with q = |lam|^2, shape (..., 3)."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (3,):
        raise ValueError("vekua_phi supports n = 3 only")
    q = float(np.dot(lam, lam))
    theta, grad = yukawa_theta_components(points, q)
    return grad - theta[..., None] * lam


def vekua_phi(x, lam) -> Multivector:
    return Multivector.from_vector(vekua_phi_components(np.asarray(x, dtype=float), lam), 3)


def vekua_phi_jacobian(points, lam):
    """J[..., i, j] = d_i Phi_j in closed form."""
    lam = np.asarray(lam, dtype=float)
    q = float(np.dot(lam, lam))
    _, grad = yukawa_theta_components(points, q)
    hess = yukawa_hessian(points, q)
    return hess - grad[..., :, None] * lam[None, :]


# -- closed-form operator oracles ------------------------------------------------


def dirac_from_jacobian(jac, n=3):
    """Coefficients of D v for a vector field with jacobian J[..., i, j] = d_i v_j.

    D v = -(div v) + sum_{i<j} (d_i v_j - d_j v_i) e_i e_j.
    """
    jac = np.asarray(jac, dtype=float)
    out = np.zeros(jac.shape[:-2] + (1 << n,))
    out[..., 0] = -np.trace(jac, axis1=-2, axis2=-1)
    for i in range(n):
        for j in range(i + 1, n):
            out[..., (1 << i) | (1 << j)] = jac[..., i, j] - jac[..., j, i]
    return out


def dirac_of_cauchy(points, n=3):
    """D E away from the origin; identically zero (monogenic kernel)."""
    return dirac_from_jacobian(cauchy_E_jacobian(points, n), n)


def fundamental_cauchy_residual(points, lam):
    """Residual of (D - lam C)(E / f) for f = exp(lam . x), away from 0.

    The weighted kernel E/f is annihilated by the Vekua operator with the
    constant coefficient lam; closed-form derivatives only.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lam = np.asarray(lam, dtype=float)
    inv_f = np.exp(-pts @ lam)
    E = cauchy_E_components(pts, 3)
    JE = cauchy_E_jacobian(pts, 3)
    # d_i (E_j / f) = (d_i E_j - lam_i E_j) / f
    JG = (JE - lam[:, None] * E[..., None, :]) * inv_f[..., None, None]
    G = E * inv_f[..., None]
    DG = dirac_from_jacobian(JG, 3)
    # lam C (G) = lam * conj(G) = -lam * G for a pure vector G
    lam_arr = vector_to_array(np.broadcast_to(lam, G.shape), 3)
    G_arr = vector_to_array(G, 3)
    residual = DG + gp_array(lam_arr, G_arr, 3)
    return np.max(np.abs(residual), axis=-1)


def vekua_phi_adjoint_residual(points, lam):
    """Residual of (D - M^lam C) Phi away from 0, with closed-form derivatives.

    By the operator factorization with constant coefficient lam, Phi is
    annihilated by the adjoint-side Vekua operator; for the pure vector Phi
    this reads D Phi + Phi lam = 0.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lam = np.asarray(lam, dtype=float)
    J = vekua_phi_jacobian(pts, lam)
    phi = vekua_phi_components(pts, lam)
    Dphi = dirac_from_jacobian(J, 3)
    lam_arr = vector_to_array(np.broadcast_to(lam, phi.shape), 3)
    phi_arr = vector_to_array(phi, 3)
    residual = Dphi + gp_array(phi_arr, lam_arr, 3)
    return np.max(np.abs(residual), axis=-1)


# -- spherical quadrature (for delta-normalization flux checks) -----------------------


def sphere_quadrature(radius, n_polar=32, center=None):
    """Gauss-Legendre x uniform-azimuth quadrature on a sphere in R^3.

    Returns positions (M, 3), outward unit normals (M, 3), weights (M,)
    summing to the sphere area.
    """
    mu, wmu = np.polynomial.legendre.leggauss(n_polar)
    phi = (np.arange(2 * n_polar) + 0.5) * (2.0 * math.pi / (2 * n_polar))
    wphi = 2.0 * math.pi / (2 * n_polar)
    MU, PHI = np.meshgrid(mu, phi, indexing="ij")
    W = np.broadcast_to(wmu[:, None] * wphi, MU.shape)
    sin_t = np.sqrt(1.0 - MU**2)
    normals = np.stack([sin_t * np.cos(PHI), sin_t * np.sin(PHI), MU], axis=-1).reshape(-1, 3)
    weights = (W * radius**2).ravel()
    positions = radius * normals
    if center is not None:
        positions = positions + np.asarray(center, dtype=float)
    return positions, normals, weights


def yukawa_delta_flux(eps, q, n_polar=32):
    """Flux -int_{|x|=eps} grad theta_q . normal ds, which tends to 1 as eps -> 0."""
    pos, normals, weights = sphere_quadrature(eps, n_polar)
    _, grad = yukawa_theta_components(pos, q)
    return float(-np.sum(np.sum(grad * normals, axis=-1) * weights))
