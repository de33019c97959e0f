"""
Curvature Identities of Ricci-flat Kähler Surfaces

Two families of pointwise identities, each computed along two independent
routes and returned as residuals.

Laplacian of the curvature, for a G-unit V on a hyperkähler chart:

    tr_G ∇²Rm(V, IV, IV, V) = −4(σ_II² + 2σ_JJσ_KK + σ_IJ² + σ_IK² − 2σ_JK²)

from jets of ∇²Rm and from second differences of Rm along geodesics with
parallel-transported frames.

Monge-Ampère identities for g̃ = g + i∂∂̄φ with det g̃ = A e^ψ det g,
Tr = tr_g g̃ = 2 + Δφ, and Δ = g^{ν̄μ}∂_μ∂_ν̄ (likewise Δ̃ for g̃):

    2(Ae^ψ − 1) = 2Δφ + (Δφ)² − |∂∂̄φ|²_g
    Δ̃(Δφ) = Δψ − R + g̃^{ν̄μ}(R_{μν̄} + R_{μν̄βᾱ}φ^{ᾱβ}) + g̃^{ν̄μ}g̃^{σ̄ρ}g^{β̄α} φ_{αρν̄} φ_{β̄μσ̄}
    e^{Cφ}Δ̃(e^{−Cφ}Tr) = Tr|C∂φ − ∂Tr/Tr|²_g̃ − |∂Tr|²_g̃/Tr + Δ̃(Δφ) − C·Tr·Δ̃φ
    Δ̃φ = 2 − Tr/det_g g̃

with third derivatives taken covariantly. On a Ricci-flat background the
frame form and the two lower bounds for e^{Cφ}Δ̃(e^{−Cφ}Tr) are checked as well.

Primary functions:
  - laplacian_riemann_identity(source, z, v): LaplacianReport
  - yau_identity_residuals(source, perturbation, z): YauReport
  - random_perturbation, radial_perturbation, random_radial_perturbation
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from configs.defaults import FD_STEP
from geometry import jets
from geometry.geodesics import GeodesicState, parallel_transport
from geometry.hyperkahler import (
    normalize,
    quaternionic_frame,
    sigma_from_geometry,
    SigmaInvariants,
)
from geometry.jets import Jet
from geometry.kummer import ChartKind, ChartPoint
from geometry.metric import (
    NVARS,
    BundleField,
    RadialField,
    complex_hessian_jets,
    coordinate_jets,
    curvature_from_jets,
    hermitian_metric_jets,
    holomorphic_gradient,
    real_coordinates,
)
from geometry.potentials import RadialPotentialSpec
from geometry.riemannian import curvature_jets, local_geometry, real_metric_jets
from utils.error_handler import DegenerateMetricError

C_VALUES = (0.1, 1.0, 10.0)
RICCI_FLAT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Laplacian of the curvature
# ---------------------------------------------------------------------------

def laplacian_rhs(sigma: SigmaInvariants) -> float:
    return -4.0 * (
        sigma.sII ** 2 + 2.0 * sigma.sJJ * sigma.sKK + sigma.sIJ ** 2 + sigma.sIK ** 2 - 2.0 * sigma.sJK ** 2
    )


@dataclass
class LaplacianReport:
    tensorial: float
    finite_difference: float
    rhs: float
    fixed_set_rhs: float              # −6σ_II², valid on a fixed set of order >= 3
    coordinate_laplacian: float       # scalar Laplacian of Rm(V,IV,IV,V)/G(V,V)², diagnostic only
    sigma: SigmaInvariants

    @property
    def tensorial_error(self) -> float:
        return abs(self.tensorial - self.rhs) / max(abs(self.rhs), 1e-300)

    @property
    def finite_difference_error(self) -> float:
        return abs(self.finite_difference - self.rhs) / max(abs(self.rhs), 1e-300)


def _as_field(source):
    return RadialField(source) if isinstance(source, RadialPotentialSpec) else source


def _chart_kind(source) -> ChartKind:
    return ChartKind.BUNDLE if isinstance(source, BundleField) else ChartKind.EGUCHI_HANSON


def _holomorphic_sectional_form(source, z, v, frame) -> float:
    geometry = local_geometry(source, z)
    iv = frame.I @ v
    return float(np.einsum("abcd,a,b,c,d->", geometry.riemann, v, iv, iv, v))


def _transported_values(metric_field, kind, z, direction, v, frame, step: float) -> tuple:
    """f(h/2), f(h) along the geodesic with initial velocity `direction`, f = Rm(PV, IPV, IPV, PV)."""
    state = GeodesicState(ChartPoint(kind, np.asarray(z, dtype=complex)), direction)
    transport = parallel_transport(metric_field, state, [v], step, step=step / 16.0)
    half = len(transport.path.times) // 2
    values = []
    for index in (half, -1):
        position = transport.path.positions[index]
        pv = transport.vectors[index][0]
        values.append(_holomorphic_sectional_form(metric_field, position, pv, frame))
    return tuple(values)


def _finite_difference_laplacian(source, z, v, frame, step: float) -> float:
    metric_field = _as_field(source)
    kind = _chart_kind(source)
    centre = _holomorphic_sectional_form(metric_field, z, v, frame)
    total = 0.0
    for direction in frame.basis(v):
        forward = _transported_values(metric_field, kind, z, direction, v, frame, step)
        backward = _transported_values(metric_field, kind, z, -direction, v, frame, step)
        coarse = (forward[1] - 2.0 * centre + backward[1]) / step ** 2
        fine = (forward[0] - 2.0 * centre + backward[0]) / (0.5 * step) ** 2
        total += (4.0 * fine - coarse) / 3.0
    return float(total)


def _coordinate_laplacian(source, z, v, frame) -> float:
    """Δ of the scalar Rm(V, IV, IV, V)/G(V, V)² with V extended by constant coefficients."""
    metric_jets = real_metric_jets(source, z, 4)
    christoffel, _, riemann = curvature_jets(metric_jets)
    iv = frame.I @ v
    numerator = Jet(np.einsum("Zabcd,a,b,c,d->Z", riemann, v, iv, iv, v).real, NVARS, 2)
    norm = Jet(np.einsum("Zab,a,b->Z", jets.tensor_truncate(metric_jets, NVARS, 2), v, v).real, NVARS, 2)
    scalar = numerator / (norm * norm)
    inverse = np.linalg.inv(metric_jets[0].real)
    hessian = scalar.hessian() - np.einsum("cab,c->ab", christoffel[0].real, scalar.gradient())
    return float(np.einsum("ab,ab->", inverse, hessian))


def laplacian_riemann_identity(source, z, v, step: float = FD_STEP) -> LaplacianReport:
    z = np.asarray(z, dtype=complex)
    frame = quaternionic_frame(source, z)
    geometry = local_geometry(source, z, derivatives=2)
    v = normalize(v, frame.metric)
    sigma = sigma_from_geometry(geometry.riemann, frame, v)
    iv = frame.I @ v
    tensorial = float(np.einsum(
        "fe,fexyzw,x,y,z,w->", geometry.inverse, geometry.nabla2_riemann, v, iv, iv, v
    ))
    report = LaplacianReport(
        tensorial=tensorial,
        finite_difference=_finite_difference_laplacian(source, z, v, frame, step),
        rhs=laplacian_rhs(sigma),
        fixed_set_rhs=-6.0 * sigma.sII ** 2,
        coordinate_laplacian=_coordinate_laplacian(source, z, v, frame),
        sigma=sigma,
    )
    logging.info(
        f"Laplacian identity at z={z}: jets {report.tensorial:.12g}, finite differences "
        f"{report.finite_difference:.12g}, right side {report.rhs:.12g}"
    )
    return report


# ---------------------------------------------------------------------------
# Test perturbations
# ---------------------------------------------------------------------------

class PolynomialPerturbation:
    """φ(x) = Σ c_α (x − centre)^α over real multi-indices of degree 2..degree."""

    def __init__(self, coefficients: dict, centre=(0.0, 0.0, 0.0, 0.0)):
        self.coefficients = coefficients
        self.centre = np.asarray(centre, dtype=float)

    def jet(self, z, order: int) -> Jet:
        variables = [x - c for x, c in zip(Jet.variables(real_coordinates(z), order), self.centre)]
        total = Jet.constant(0.0, NVARS, order)
        for alpha, c in self.coefficients.items():
            term = Jet.constant(c, NVARS, order)
            for x, power in zip(variables, alpha):
                if power:
                    term = term * x ** power
            total = total + term
        return total


class RadialPerturbation:
    """φ = scale·f(|z|²) for a profile f acting on univariate-in-u jets."""

    def __init__(self, profile: Callable[[Jet], Jet], scale: float = 1.0):
        self.profile = profile
        self.scale = scale

    def jet(self, z, order: int) -> Jet:
        z1, z2 = coordinate_jets(z, order)
        u = (z1 * z1.conj() + z2 * z2.conj()).real
        return self.profile(u) * self.scale


def random_perturbation(rng: np.random.Generator, scale: float = 0.01, degree: int = 4,
                        centre=(0.0, 0.0, 0.0, 0.0)) -> PolynomialPerturbation:
    coefficients = {
        alpha: float(rng.normal()) * scale
        for alpha in jets.multi_indices(NVARS, degree)
        if sum(alpha) >= 2
    }
    return PolynomialPerturbation(coefficients, centre)


def radial_perturbation(profile: Callable[[Jet], Jet], scale: float = 1.0) -> RadialPerturbation:
    return RadialPerturbation(profile, scale)


def random_radial_perturbation(rng: np.random.Generator, scale: float = 0.01) -> RadialPerturbation:
    """scale · Σ_k c_k cos(k u / 2 + θ_k), k = 1..3."""
    amplitudes = rng.normal(size=3) / np.arange(1, 4) ** 2
    phases = rng.uniform(0.0, 2.0 * np.pi, 3)

    def profile(u: Jet) -> Jet:
        total = Jet.constant(0.0, u.nvars, u.order)
        for k, (c, theta) in enumerate(zip(amplitudes, phases), start=1):
            total = total + jets.cos(u * (0.5 * k) + theta) * c
        return total

    return RadialPerturbation(profile, scale)


# ---------------------------------------------------------------------------
# Monge-Ampère identities
# ---------------------------------------------------------------------------

@dataclass
class YauReport:
    norm_ma: float
    trace_laplacian: float
    weighted_laplacian: float
    corrected_laplacian: float
    gradient_slack: float                     # g̃g̃g|∇∂∂̄φ|² − |∂Tr|²_g̃/Tr
    am_gm_slack: float                        # Tr/2 − √(det g̃/det g)
    ricci_flat: bool
    trace_laplacian_frame: Optional[float] = None
    curvature_bound_slack: dict = field(default_factory=dict)
    eigenvalue_bound_slack: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    def worst_identity(self) -> float:
        residuals = [self.norm_ma, self.trace_laplacian, self.weighted_laplacian, self.corrected_laplacian]
        if self.trace_laplacian_frame is not None:
            residuals.append(self.trace_laplacian_frame)
        return max(residuals)

    def min_slack(self) -> float:
        slacks = [self.gradient_slack, self.am_gm_slack]
        slacks += list(self.curvature_bound_slack.values()) + list(self.eigenvalue_bound_slack.values())
        return min(slacks)


def _scalar(coeffs: np.ndarray) -> Jet:
    return Jet(np.real(coeffs), NVARS, jets.order_of(len(coeffs), NVARS))


def _laplacian(inverse: np.ndarray, jet: Jet) -> float:
    """g^{ν̄μ}∂_μ∂_ν̄ f at the expansion point."""
    return float(np.einsum("nm,mn->", inverse, complex_hessian_jets(jet.coeffs)[0]).real)


def _norm_squared(inverse: np.ndarray, form: np.ndarray) -> float:
    """g^{ν̄μ} v_μ conj(v_ν) for a (1,0)-form v."""
    return float(np.einsum("nm,m,n->", inverse, form, form.conj()).real)


def yau_identity_residuals(source, perturbation, z, A: float = 1.0,
                           c_values=C_VALUES) -> YauReport:
    z = np.asarray(z, dtype=complex)
    gj = hermitian_metric_jets(source, z, 2)
    phi = perturbation.jet(z, 4)
    hj = complex_hessian_jets(phi.coeffs)                  # φ_{μν̄}, order 2
    tilde = gj + hj
    if np.linalg.eigvalsh(tilde[0])[0] <= 0.0:
        raise DegenerateMetricError(f"g + i∂∂̄φ is not positive definite at z={z}")

    g0, h0 = gj[0], hj[0]
    ginv_jets = jets.matrix_inverse(gj, NVARS)
    ginv, tinv = ginv_jets[0], np.linalg.inv(tilde[0])
    bundle = curvature_from_jets(gj)

    # scalar fields as jets of order 2
    lap_phi = _scalar(jets.tensor_product(ginv_jets, hj, NVARS, "nm,mn->"))
    trace = lap_phi + 2.0
    ratio = _scalar(jets.matrix_det2(tilde, NVARS)) / _scalar(jets.matrix_det2(gj, NVARS))
    psi = jets.ln(ratio) - np.log(A)

    lap_phi0, trace0, ratio0 = lap_phi.value, trace.value, ratio.value
    lap_psi = _laplacian(ginv, psi)
    lap_trace = _laplacian(tinv, trace)

    # covariant third derivative T[α, ρ, ν] = ∇_ρ φ_{αν̄}
    d_h = holomorphic_gradient(hj)[0][:2]
    third = d_h.transpose(1, 0, 2) - np.einsum("lra,ln->arn", bundle.christoffel, h0)
    cubic = float(np.einsum("nm,sr,ba,arn,bsm->", tinv, tinv, ginv, third, third.conj()).real)
    raised = ginv @ h0 @ ginv
    curvature_term = complex(np.einsum("nm,bamn,ab->", tinv, bundle.riemann, raised)).real
    ricci_term = float(np.einsum("nm,mn->", tinv, bundle.ricci).real)
    lap_trace_rhs = lap_psi - bundle.scalar + ricci_term + curvature_term + cubic
    scale = 1.0 + abs(lap_trace)

    # normalized Monge-Ampère identity
    hessian_norm = float(np.einsum("nm,ba,mb,an->", ginv, ginv, h0, h0).real)
    norm_ma = abs(2.0 * (ratio0 - 1.0) - (2.0 * lap_phi0 + lap_phi0 ** 2 - hessian_norm))

    # e^{Cφ}Δ̃(e^{−Cφ}Tr) two ways
    phi2 = phi.truncate(2)
    d_phi = holomorphic_gradient(phi.coeffs)[0][:2]
    d_trace = holomorphic_gradient(trace.coeffs)[0][:2]
    lap_tilde_phi = float(np.einsum("nm,mn->", tinv, h0).real)
    gradient_term = _norm_squared(tinv, d_trace) / trace0
    weighted_laplacian = 0.0
    weighted_lhs = {}
    for c in c_values:
        weighted = jets.exp(phi2 * (-c)) * trace
        lhs = np.exp(c * phi.value) * _laplacian(tinv, weighted)
        rhs = (trace0 * _norm_squared(tinv, c * d_phi - d_trace / trace0) - gradient_term
               + lap_trace - c * lap_tilde_phi * trace0)
        weighted_laplacian = max(weighted_laplacian, abs(lhs - rhs) / (1.0 + abs(lhs)))
        weighted_lhs[c] = lhs

    det_ratio = float(ratio0)
    corrected = abs(lap_tilde_phi - (2.0 - trace0 / det_ratio))
    report = YauReport(
        norm_ma=float(norm_ma),
        trace_laplacian=abs(lap_trace - lap_trace_rhs) / scale,
        weighted_laplacian=float(weighted_laplacian),
        corrected_laplacian=float(corrected),
        gradient_slack=cubic - gradient_term,
        am_gm_slack=float(trace0 / 2.0 - np.sqrt(det_ratio)),
        ricci_flat=bundle.ricci_frame_norm() < RICCI_FLAT_TOL,
        values={"laplacian_trace": lap_trace, "laplacian_psi": lap_psi, "trace": trace0, "det_ratio": det_ratio},
    )

    if report.ricci_flat:
        # g-unitary frame diagonalizing g̃: columns f_k, frame vectors e_k = conj(f_k)
        eigenvalues, f = eigh(h0, g0)
        e = f.conj()
        lam = 1.0 + eigenvalues
        r = float(np.einsum("mnab,m,n,a,b->", bundle.riemann, e[:, 0], e[:, 0].conj(),
                            e[:, 1], e[:, 1].conj()).real)
        framed = np.einsum("arn,ai,rj,nk->ijk", third, e, e, e.conj())
        cubic_frame = float(np.einsum("j,k,ijk->", 1.0 / lam, 1.0 / lam, np.abs(framed) ** 2))
        shape = trace0 ** 2 / det_ratio
        expr = lap_psi + r * (shape - 4.0) + cubic_frame
        report.trace_laplacian_frame = abs(lap_trace - expr) / scale
        for c in c_values:
            curvature_bound = lap_psi + r * (shape - 4.0) - c * trace0 * lap_tilde_phi
            eigenvalue_bound = lap_psi - 4.0 * r - 2.0 * c * trace0 + (c + r) * shape
            report.curvature_bound_slack[c] = float(weighted_lhs[c] - curvature_bound)
            report.eigenvalue_bound_slack[c] = float(weighted_lhs[c] - eigenvalue_bound)
        report.values["R_1122"] = r
    else:
        logging.debug(f"Background is not Ricci-flat at z={z}; frame identities skipped")
    return report
