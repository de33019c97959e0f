"""
Hyperkähler Structure Module

The quaternionic triple (I, J, K) of a Ricci-flat Kähler chart and the six
σ-invariants σ_XY(V) = ⟨R(V, XV)YV, V⟩ built from it.

Every structure is a real 4x4 matrix acting on tangent vectors written in the
real chart frame (∂x1, ∂y1, ∂x2, ∂y2):

  - I is multiplication by i on (1,0)-components, so I∂x = ∂y.
  - J is antilinear: ξ ↦ M̄ ξ̄ with
        M = A^{-1/2} [[−g_{12̄}, −g_{22̄}], [g_{11̄}, g_{21̄}]],  A = det g.
    This is the action of J on the holomorphic frame written in holomorphic
    Darboux coordinates; it needs A to be constant near the point.
  - K = I·J (matrix product, J applied first).

Primary functions:
  - quaternionic_frame(source, z): QuaternionicFrame with its invariants checked.
  - sigma_invariants(source, z, v): the six σ numbers for the unit vector along v.
  - sectional_reconstruction(sigma, coeffs=..., angles=...): holomorphic
    sectional curvature of W = αV + βIV + μJV + νKV from the σ's.
  - fixed_set_constraint_check, fixed_set_gauss_curvature, fixed_set_sectional.
  - covariant_derivative_J: finite-difference ∇_X of a structure.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geometry import jets
from geometry.metric import (
    NVARS,
    complex_coordinates,
    complex_hessian,
    hermitian_metric_jets,
    real_coordinates,
    real_metric,
)
from geometry.jets import Jet
from geometry.riemannian import local_geometry
from utils.error_handler import (
    NormalizationError,
    NotHyperkahlerChartError,
    PreconditionError,
)

# |∇ det g| / det g above which a chart is not in Darboux normalization
DET_GRADIENT_TOL = 1e-9

FRAME_TOL = 1e-11
SIGMA_TOL = 1e-10
FIXED_SET_TOL = 1e-12

_I_COMPLEX = np.array([[1j, 0.0], [0.0, 1j]])


@dataclass(frozen=True)
class QuaternionicFrame:
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    metric: np.ndarray   # real G at the point

    def residuals(self) -> dict:
        eye = np.eye(4)
        out = {}
        for name, s in (("I", self.I), ("J", self.J), ("K", self.K)):
            out[f"{name}^2+1"] = float(np.abs(s @ s + eye).max())
            out[f"{name}^T G {name}-G"] = float(np.abs(s.T @ self.metric @ s - self.metric).max())
        out["IJ-K"] = float(np.abs(self.I @ self.J - self.K).max())
        out["JI+K"] = float(np.abs(self.J @ self.I + self.K).max())
        out["JK-I"] = float(np.abs(self.J @ self.K - self.I).max())
        return out

    def basis(self, v: np.ndarray) -> np.ndarray:
        """Rows V, IV, JV, KV."""
        return np.array([v, self.I @ v, self.J @ v, self.K @ v])


@dataclass(frozen=True)
class SigmaInvariants:
    sII: float
    sJJ: float
    sKK: float
    sIJ: float
    sIK: float
    sJK: float
    vector: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def trace(self) -> float:
        return self.sII + self.sJJ + self.sKK

    def as_matrix(self) -> np.ndarray:
        return np.array([
            [self.sII, self.sIJ, self.sIK],
            [self.sIJ, self.sJJ, self.sJK],
            [self.sIK, self.sJK, self.sKK],
        ])

    def as_dict(self) -> dict:
        return {
            "sII": self.sII, "sJJ": self.sJJ, "sKK": self.sKK,
            "sIJ": self.sIJ, "sIK": self.sIK, "sJK": self.sJK,
        }


# ---------------------------------------------------------------------------
# Real matrices of complex-linear and antilinear maps
# ---------------------------------------------------------------------------

def linear_real(matrix: np.ndarray) -> np.ndarray:
    """Real 4x4 of ξ ↦ Lξ on (1,0)-components."""
    p, q = matrix.real, matrix.imag
    out = np.zeros((4, 4))
    out[0::2, 0::2] = p
    out[0::2, 1::2] = -q
    out[1::2, 0::2] = q
    out[1::2, 1::2] = p
    return out


def antilinear_real(matrix: np.ndarray) -> np.ndarray:
    """Real 4x4 of ξ ↦ Nξ̄ on (1,0)-components."""
    p, q = matrix.real, matrix.imag
    out = np.zeros((4, 4))
    out[0::2, 0::2] = p
    out[0::2, 1::2] = q
    out[1::2, 0::2] = q
    out[1::2, 1::2] = -p
    return out


def _j_matrix(g: np.ndarray) -> np.ndarray:
    determinant = float(np.linalg.det(g).real)
    m = np.array([[-g[0, 1], -g[1, 1]], [g[0, 0], g[1, 0]]]) / np.sqrt(determinant)
    return m.conj()


# ---------------------------------------------------------------------------
# Frame and σ-invariants
# ---------------------------------------------------------------------------

def _check_darboux(gj: np.ndarray) -> None:
    det = jets.matrix_det2(gj, NVARS).real
    gradient = np.abs(det[1:NVARS + 1]).max()
    if gradient > DET_GRADIENT_TOL * abs(det[0]):
        raise NotHyperkahlerChartError(
            f"det g is not constant near the point (|∇ det g| = {gradient:.3e}, det g = {det[0]:.6g})"
        )


def frame_from_metric(g: np.ndarray) -> QuaternionicFrame:
    i_real = linear_real(_I_COMPLEX)
    j_real = antilinear_real(_j_matrix(np.asarray(g, dtype=complex)))
    return QuaternionicFrame(I=i_real, J=j_real, K=i_real @ j_real, metric=real_metric(g))


def quaternionic_frame(source, z) -> QuaternionicFrame:
    """(I, J, K) at z; the chart must have constant det g near z."""
    gj = hermitian_metric_jets(source, z, 1)
    _check_darboux(gj)
    frame = frame_from_metric(gj[0])
    worst = max(frame.residuals().values())
    if worst > FRAME_TOL * max(1.0, np.abs(frame.metric).max()):
        logging.warning(f"Quaternionic frame residual {worst:.3e} at z={np.asarray(z)}")
    return frame


def normalize(v, metric: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm_sq = float(v @ metric @ v)
    if not norm_sq > 0.0:
        raise NormalizationError(f"cannot normalize tangent vector {v}")
    return v / np.sqrt(norm_sq)


def _contract(riemann: np.ndarray, v, x, y) -> float:
    return float(np.einsum("abcd,a,b,c,d->", riemann, v, x, y, v))


def sigma_from_geometry(riemann: np.ndarray, frame: QuaternionicFrame, v) -> SigmaInvariants:
    v = normalize(v, frame.metric)
    _, iv, jv, kv = frame.basis(v)
    s_ij = _contract(riemann, v, iv, jv)
    s_ji = _contract(riemann, v, jv, iv)
    if abs(s_ij - s_ji) > SIGMA_TOL * (1.0 + abs(s_ij)):
        logging.warning(f"σ_IJ = {s_ij:.12g} differs from σ_JI = {s_ji:.12g}")
    return SigmaInvariants(
        sII=_contract(riemann, v, iv, iv),
        sJJ=_contract(riemann, v, jv, jv),
        sKK=_contract(riemann, v, kv, kv),
        sIJ=s_ij,
        sIK=_contract(riemann, v, iv, kv),
        sJK=_contract(riemann, v, jv, kv),
        vector=v,
    )


def sigma_invariants(source, z, v) -> SigmaInvariants:
    """σ_XY for the G-unit vector along v (real chart frame)."""
    frame = quaternionic_frame(source, z)
    geometry = local_geometry(source, z)
    return sigma_from_geometry(geometry.riemann, frame, v)


# ---------------------------------------------------------------------------
# Sectional curvature of W = αV + βIV + μJV + νKV
# ---------------------------------------------------------------------------

def angles_to_coefficients(theta: float, phi: float, psi: float = 0.0) -> np.ndarray:
    """(α, β, μ, ν) with α+iβ = cos(θ/2)e^{i(ψ+φ)/2}, μ+iν = sin(θ/2)e^{i(ψ−φ)/2}."""
    first = np.cos(theta / 2) * np.exp(0.5j * (psi + phi))
    second = np.sin(theta / 2) * np.exp(0.5j * (psi - phi))
    return np.array([first.real, first.imag, second.real, second.imag])


def sectional_reconstruction(sigma: SigmaInvariants, coeffs=None, angles=None) -> float:
    """
    ⟨R(W, IW)IW, W⟩ from the six σ's, for unit coefficients (α, β, μ, ν) or
    angles (θ, φ).
    """
    if (coeffs is None) == (angles is None):
        raise NormalizationError("give exactly one of coeffs or angles")
    if angles is not None:
        theta, phi = angles
        c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
        return float(
            c2 * sigma.sII
            + s2 * np.sin(phi) ** 2 * sigma.sJJ
            + s2 * np.cos(phi) ** 2 * sigma.sKK
            + np.sin(2 * theta) * np.sin(phi) * sigma.sIJ
            + np.sin(2 * theta) * np.cos(phi) * sigma.sIK
            + s2 * np.sin(2 * phi) * sigma.sJK
        )
    alpha, beta, mu, nu = (float(c) for c in coeffs)
    norm_sq = alpha ** 2 + beta ** 2 + mu ** 2 + nu ** 2
    if abs(norm_sq - 1.0) > 1e-12:
        raise NormalizationError(f"coefficients have α²+β²+μ²+ν² = {norm_sq:.15g}, expected 1")
    d = alpha ** 2 + beta ** 2 - mu ** 2 - nu ** 2
    p = beta * mu - alpha * nu
    q = alpha * mu + beta * nu
    return float(
        sigma.sII * d * d
        + 4 * sigma.sJJ * p * p
        + 4 * sigma.sKK * q * q
        + 4 * sigma.sIJ * d * p
        + 4 * sigma.sIK * d * q
        + 8 * sigma.sJK * p * q
    )


def direct_sectional(riemann: np.ndarray, frame: QuaternionicFrame, v, coeffs) -> float:
    """Rm(W, IW, IW, W) contracted directly, V normalized first."""
    basis = frame.basis(normalize(v, frame.metric))
    w = np.asarray(coeffs, dtype=float) @ basis
    iw = frame.I @ w
    return _contract(riemann, w, iw, iw)


# ---------------------------------------------------------------------------
# Fixed set {z2 = 0} of (z1, z2) ↦ (z1, e^{2πi/k} z2)
# ---------------------------------------------------------------------------

@dataclass
class FixedSetReport:
    order: int
    sigma: SigmaInvariants
    residuals: dict
    reported: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(value < self.tolerance for value in self.residuals.values())


def _check_fixed_point(z, v) -> None:
    z = np.asarray(z, dtype=complex)
    if abs(z[1]) > FIXED_SET_TOL:
        raise PreconditionError(f"z={z} is not on the fixed set z2 = 0")
    if v is not None and np.abs(np.asarray(v, dtype=float)[2:]).max() > FIXED_SET_TOL:
        raise PreconditionError(f"v={v} is not tangent to the fixed set")


def fixed_set_constraint_check(source, order: int, z, v=(1.0, 0.0, 0.0, 0.0),
                               tolerance: float = SIGMA_TOL) -> FixedSetReport:
    """
    σ constraints forced by a holomorphic isometry of order k fixing {z2 = 0}.

    k >= 3: σ_IJ = σ_IK = σ_JK = 0 and σ_JJ = σ_KK. k = 2: σ_IJ = σ_IK = 0,
    with σ_JK only reported.
    """
    if order < 2:
        raise PreconditionError(f"isometry order must be >= 2, got {order}")
    _check_fixed_point(z, v)
    sigma = sigma_invariants(source, z, v)
    scale = 1.0 + abs(sigma.sII)
    residuals = {"sIJ": abs(sigma.sIJ) / scale, "sIK": abs(sigma.sIK) / scale}
    reported = {}
    if order >= 3:
        residuals["sJK"] = abs(sigma.sJK) / scale
        residuals["sJJ-sKK"] = abs(sigma.sJJ - sigma.sKK) / scale
    else:
        reported["sJK"] = sigma.sJK
    report = FixedSetReport(order, sigma, residuals, reported, tolerance)
    if not report.passed:
        logging.warning(f"Fixed-set constraints for k={order} fail at z={np.asarray(z)}: {residuals}")
    return report


def fixed_set_gauss_curvature(source, z1: complex) -> float:
    """
    Gauss curvature of {z2 = 0} from its induced metric h = g_{11̄}(z1, 0):
    K = −∂∂̄ ln h / h.
    """
    gj = hermitian_metric_jets(source, [z1, 0.0], 2)
    h = Jet(gj[:, 0, 0].real, NVARS, 2)
    hessian = complex_hessian(jets.ln(h))
    return float(-hessian[0, 0].real / h.value)


def fixed_set_sectional(gauss_curvature: float, theta: float) -> float:
    """Holomorphic sectional curvature at angle θ from the fixed set, σ_JJ = σ_KK = −σ_II/2."""
    return float((1.0 + 3.0 * np.cos(2 * theta)) / 4.0 * gauss_curvature)


# ---------------------------------------------------------------------------
# Parallelism
# ---------------------------------------------------------------------------

def _structure(frame: QuaternionicFrame, which: str) -> np.ndarray:
    try:
        return getattr(frame, which)
    except AttributeError:
        raise PreconditionError(f"unknown complex structure '{which}'") from None


def covariant_derivative_J(source, z, direction, step: float = 1e-4, which: str = "J") -> float:
    """
    max |(∇_X S)^a_b| for S in {I, J, K}, with ∂_X S by central differences:

        (∇_X S)^a_b = X^c ∂_c S^a_b + Γ^a_{ce} X^c S^e_b − S^a_e Γ^e_{cb} X^c
    """
    x = np.asarray(direction, dtype=float)
    base = real_coordinates(z)
    ahead = _structure(quaternionic_frame(source, complex_coordinates(base + step * x)), which)
    behind = _structure(quaternionic_frame(source, complex_coordinates(base - step * x)), which)
    here = _structure(quaternionic_frame(source, z), which)
    christoffel = local_geometry(source, z).christoffel
    derivative = (
        (ahead - behind) / (2.0 * step)
        + np.einsum("ace,c,eb->ab", christoffel, x, here)
        - np.einsum("ae,ecb,c->ab", here, christoffel, x)
    )
    return float(np.abs(derivative).max())
