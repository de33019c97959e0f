"""
Hermitian Metric and Curvature Module

Metric, Christoffel symbols, Riemann, Ricci, Kretschmann and ψ = −ln det g for
Kähler metrics given chart-by-chart in complex coordinates (z1, z2). All
derivatives come from jets in the real coordinates (x1, y1, x2, y2) with
z_μ = x_μ + i·y_μ; holomorphic partials are ∂_μ = (∂_x − i∂_y)/2.

Conventions:
  - g_{μν̄} = G(∂_μ, ∂_ν̄), G the Riemannian metric; G(X, X) = 2·Re(g X X̄).
  - ⟨U, V⟩_g = U^† ḡ V, so G(U, V) = 2·Re⟨U, V⟩_g.
  - Γ^λ_{μα} = ∂_α g_{μν̄} g^{ν̄λ}.
  - R_{μν̄αβ̄} = −∂_α∂_β̄ g_{μν̄} + g^{λ̄σ} ∂_α g_{μλ̄} ∂_β̄ g_{σν̄}.
  - Kretschmann is the hermitian norm Σ|R_{ab̄cd̄}|² in a g-unitary frame; the
    real (0,4) norm is four times this.

Metric sources:
  - RadialPotentialSpec (orbifold chart of a radial potential).
  - Any object with hermitian_jets(z, order): RadialField, BundleField and
    the perturbed metrics of the identity checks.

Primary functions:
  - metric_at, curvature_at, psi_at, bundle_chart_metric
  - hermitian_metric_jets, complex_hessian, real_metric
"""

import logging
from dataclasses import dataclass

import numpy as np

from geometry import jets
from geometry.jets import Jet
from geometry.potentials import (
    PotentialKind,
    RadialPotentialSpec,
    derivative_series,
    eval_potential,
    in_eguchi_hanson_zone,
    radial_determinant,
)
from utils.error_handler import (
    CapabilityError,
    DegenerateMetricError,
    OrbifoldPointError,
    WrongPatchError,
)

NVARS = 4
POSITIVITY_TOL = 1e-13

# rows: ∂_1, ∂_2, ∂_1̄, ∂_2̄ in terms of (∂_x1, ∂_y1, ∂_x2, ∂_y2)
HOLOMORPHIC_PARTIALS = np.array([
    [0.5, -0.5j, 0.0, 0.0],
    [0.0, 0.0, 0.5, -0.5j],
    [0.5, 0.5j, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.5j],
])


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermitianMetric:
    """g_{μν̄} at a point, components[μ, ν]."""
    components: np.ndarray
    chart: str = "orbifold"

    def __post_init__(self):
        g = np.asarray(self.components, dtype=complex)
        if g.shape != (2, 2):
            raise DegenerateMetricError(f"metric must be 2x2, got {g.shape}")
        if not np.allclose(g, g.conj().T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise DegenerateMetricError(f"metric is not hermitian: {g}")
        eigenvalues = np.linalg.eigvalsh(g)
        if eigenvalues[0] <= POSITIVITY_TOL:
            raise DegenerateMetricError(f"metric not positive definite, eigenvalues {eigenvalues}")
        object.__setattr__(self, "components", g)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.components)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.components).real)

    @property
    def inverse(self) -> np.ndarray:
        """Matrix with inverse[ν, λ] = g^{ν̄λ}."""
        return np.linalg.inv(self.components)

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        return complex(np.conj(u) @ np.conj(self.components) @ v)

    def norm_squared(self, v: np.ndarray) -> float:
        """Riemannian G(v, v) = 2⟨v, v⟩_g."""
        return 2.0 * self.inner(v, v).real

    def real(self) -> np.ndarray:
        return real_metric(self.components)


@dataclass(frozen=True)
class CurvatureBundle:
    christoffel: np.ndarray   # [λ, μ, α]
    riemann: np.ndarray       # [μ, ν, α, β] = R_{μν̄αβ̄}
    ricci: np.ndarray         # [μ, ν]
    scalar: float
    kretschmann: float
    metric: HermitianMetric

    @property
    def unitary_frame(self) -> np.ndarray:
        """F with F g F^† = 1; rows are g-unitary (1,0)-vectors."""
        return np.linalg.inv(np.linalg.cholesky(self.metric.components))

    def ricci_frame_norm(self) -> float:
        frame = self.unitary_frame
        return float(np.abs(frame @ self.ricci @ frame.conj().T).max())


# ---------------------------------------------------------------------------
# Coordinates and holomorphic derivatives of jets
# ---------------------------------------------------------------------------

def real_coordinates(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.array([z[0].real, z[0].imag, z[1].real, z[1].imag])


def complex_coordinates(x) -> np.ndarray:
    return np.array([x[0] + 1j * x[1], x[2] + 1j * x[3]])


def coordinate_jets(z, order: int) -> tuple:
    """Complex jets (z1, z2) in the real variables around z."""
    x1, y1, x2, y2 = Jet.variables(real_coordinates(z), order)
    return x1 + 1j * y1, x2 + 1j * y2


def holomorphic_gradient(coeffs: np.ndarray) -> np.ndarray:
    """out[:, k, ...] = ∂_k coeffs for k in (1, 2, 1̄, 2̄)."""
    grad = jets.tensor_gradient(coeffs, NVARS)
    return np.einsum("kr,Zr...->Zk...", HOLOMORPHIC_PARTIALS, grad)


def complex_hessian_jets(coeffs: np.ndarray) -> np.ndarray:
    """Jets of ∂_μ∂_ν̄ f, shape (ncoeff, 2, 2, ...)."""
    second = holomorphic_gradient(holomorphic_gradient(coeffs))
    return second[:, :2, 2:]


def complex_hessian(jet: Jet) -> np.ndarray:
    """∂_μ∂_ν̄ f at the expansion point."""
    if jet.order < 2:
        raise CapabilityError("complex Hessian needs a jet of order >= 2")
    return complex_hessian_jets(jet.coeffs)[0]


def real_metric(g: np.ndarray) -> np.ndarray:
    """
    Real 4x4 metric G from hermitian components, real index order (x1, y1, x2, y2).

    Works on any leading axes: (..., 2, 2) -> (..., 4, 4).
    """
    g = np.asarray(g)
    s, t = g.real, g.imag
    out = np.zeros(g.shape[:-2] + (4, 4))
    out[..., 0::2, 0::2] = 2 * s
    out[..., 1::2, 1::2] = 2 * s
    out[..., 0::2, 1::2] = 2 * t
    out[..., 1::2, 0::2] = -2 * t
    return out


def hol_vector(v_real) -> np.ndarray:
    """(1,0)-components ξ_μ = v_x + i v_y of a real tangent vector."""
    v = np.asarray(v_real, dtype=float)
    return np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]])


def real_vector(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    return np.array([xi[0].real, xi[0].imag, xi[1].real, xi[1].imag])


# ---------------------------------------------------------------------------
# Radial potentials in the orbifold chart
# ---------------------------------------------------------------------------

def _check_point(spec: RadialPotentialSpec, z) -> float:
    z = np.asarray(z, dtype=complex)
    u = float(np.vdot(z, z).real)
    if spec.a > 0.0 and u == 0.0:
        raise OrbifoldPointError("z = 0 is the orbifold point of the chart")
    return u


def potential_jet(spec: RadialPotentialSpec, z, order: int) -> Jet:
    """Φ(u(x)) as a jet in the four real coordinates."""
    u0 = _check_point(spec, z)
    z1, z2 = coordinate_jets(z, order)
    u = (z1 * z1.conj() + z2 * z2.conj()).real
    return u.compose(eval_potential(spec, u0, order).coeffs)


def radial_metric_jets(spec: RadialPotentialSpec, z, order: int) -> np.ndarray:
    """Jets of g_{μν̄} = φ'(u)δ_{μν} + φ''(u) z̄_μ z_ν, shape (ncoeff, 2, 2)."""
    if order > jets.MAX_ORDER - 2:
        raise CapabilityError(f"radial metric jets available to order {jets.MAX_ORDER - 2}, asked {order}")
    u0 = _check_point(spec, z)
    z1, z2 = coordinate_jets(z, order)
    u = (z1 * z1.conj() + z2 * z2.conj()).real
    series = derivative_series(spec, u0, order + 1)
    first = u.compose(series[:order + 1])
    second = u.compose(series[1:] * np.arange(1, order + 2))
    zs = (z1, z2)
    out = np.zeros((jets.ncoeff(NVARS, order), 2, 2), dtype=complex)
    for mu in range(2):
        for nu in range(2):
            entry = second * zs[mu].conj() * zs[nu]
            if mu == nu:
                entry = entry + first
            out[:, mu, nu] = entry.coeffs
    return out


def hermitian_metric_jets(source, z, order: int) -> np.ndarray:
    if isinstance(source, RadialPotentialSpec):
        return radial_metric_jets(source, z, order)
    return source.hermitian_jets(z, order)


def _radial_coefficients(spec: RadialPotentialSpec, u: float) -> tuple:
    """(φ', φ'', φ''') at u; closed forms in the Eguchi-Hanson zone."""
    if in_eguchi_hanson_zone(spec, u):
        a2 = spec.a ** 2
        w = float(np.hypot(spec.a, u))
        first = w / u
        second = -a2 / (u * u * w)
        third = a2 * (2 * a2 + 3 * u * u) / (u ** 3 * w ** 3)
        return first, second, third
    series = derivative_series(spec, u, 2)
    return float(series[0]), float(series[1]), float(2 * series[2])


def metric_at(spec: RadialPotentialSpec, z) -> HermitianMetric:
    u = _check_point(spec, z)
    z = np.asarray(z, dtype=complex)
    first, second, _ = _radial_coefficients(spec, u) if u > 0 else (1.0, 0.0, 0.0)
    components = first * np.eye(2) + second * np.outer(z.conj(), z)
    return HermitianMetric(components, chart="orbifold")


def zeta_inner_product_factor(spec: RadialPotentialSpec, z) -> float:
    """(uφ')' at u = |z|², the factor in ⟨z, V⟩_g = (uφ')'⟨z, V⟩_{C²}."""
    u = _check_point(spec, z)
    first, second, _ = _radial_coefficients(spec, u)
    return first + u * second


def radial_christoffel(spec: RadialPotentialSpec, z) -> np.ndarray:
    """Γ^λ_{μα} of a radial metric from φ', φ'', φ''' in closed form."""
    u = _check_point(spec, z)
    z = np.asarray(z, dtype=complex)
    first, second, third = _radial_coefficients(spec, u)
    zbar = z.conj()
    eye = np.eye(2)
    # dg[α, μ, ν] = ∂_α g_{μν̄}
    dg = (
        second * np.einsum("a,mn->amn", zbar, eye)
        + third * np.einsum("a,m,n->amn", zbar, zbar, z)
        + second * np.einsum("m,an->amn", zbar, eye)
    )
    ginv = np.linalg.inv(first * eye + second * np.outer(zbar, z))
    return np.einsum("amn,nl->lma", dg, ginv)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def christoffel_from_jets(gj: np.ndarray) -> np.ndarray:
    dg = holomorphic_gradient(gj)[0]
    ginv = np.linalg.inv(gj[0])
    return np.einsum("amn,nl->lma", dg[:2], ginv)


def curvature_from_jets(gj: np.ndarray, chart: str = "orbifold") -> CurvatureBundle:
    if jets.order_of(len(gj), NVARS) < 2:
        raise CapabilityError("curvature needs metric jets of order >= 2")
    metric = HermitianMetric(gj[0], chart=chart)
    ginv = metric.inverse
    first = holomorphic_gradient(gj)
    dg = first[0]
    mixed = holomorphic_gradient(first)[0][:2, 2:]       # [α, β, μ, ν] = ∂_α∂_β̄ g_{μν̄}

    christoffel = np.einsum("amn,nl->lma", dg[:2], ginv)
    riemann = -np.einsum("abmn->mnab", mixed) + np.einsum("aml,ls,bsn->mnab", dg[:2], ginv, dg[2:])
    ricci = np.einsum("ba,mnab->mn", ginv, riemann)
    scalar = float(np.einsum("nm,mn->", ginv, ricci).real)

    frame = np.linalg.inv(np.linalg.cholesky(metric.components))
    framed = np.einsum("am,bn,cp,dq,mnpq->abcd", frame, frame.conj(), frame, frame.conj(), riemann)
    kretschmann = float(np.sum(np.abs(framed) ** 2))
    return CurvatureBundle(christoffel, riemann, ricci, scalar, kretschmann, metric)


def curvature_at(source, z) -> CurvatureBundle:
    chart = "orbifold" if isinstance(source, RadialPotentialSpec) else getattr(source, "chart", "field")
    return curvature_from_jets(hermitian_metric_jets(source, z, 2), chart=chart)


def holomorphic_sectional_curvature(bundle: CurvatureBundle, v_real) -> float:
    """⟨R(V, IV)IV, V⟩ / G(V, V)² from the hermitian components, V real."""
    xi = hol_vector(v_real)
    value = np.einsum("mnab,m,n,a,b->", bundle.riemann, xi, xi.conj(), xi, xi.conj())
    norm = bundle.metric.norm_squared(xi)
    return float(4.0 * value.real / norm ** 2)


def real_kretschmann_from_hermitian(bundle: CurvatureBundle) -> float:
    return 4.0 * bundle.kretschmann


def _in_open_neck(spec: RadialPotentialSpec, u: float) -> bool:
    low, high = spec.neck
    return spec.kind is PotentialKind.GLUED and low < u < high


def psi_at(source, z) -> tuple:
    """
    (ψ, Δψ) with ψ = −ln det g and Δψ = g^{ν̄μ}∂_μ∂_ν̄ψ.

    For radial potentials ψ vanishes identically outside the open neck and is
    returned as exact zeros there.
    """
    if isinstance(source, RadialPotentialSpec):
        u = _check_point(source, z)
        if not _in_open_neck(source, u):
            return 0.0, 0.0
        psi = -np.log(radial_determinant(source, u))
    else:
        psi = None
    gj = hermitian_metric_jets(source, z, 2)
    det = Jet(jets.matrix_det2(gj, NVARS).real, NVARS, 2)
    normalization = getattr(source, "volume_normalization", 1.0)
    psi_jet = -jets.ln(det / normalization)
    hessian = complex_hessian(psi_jet)
    laplacian = float(np.einsum("nm,mn->", np.linalg.inv(gj[0]), hessian).real)
    if psi is None:
        psi = float(psi_jet.value)
    return float(psi), laplacian


# ---------------------------------------------------------------------------
# Bundle charts over the exceptional divisor
# ---------------------------------------------------------------------------

PATCHES = ("zeta", "upsilon")


def _bundle_component_jets(a: float, fiber: complex, base: complex, order: int) -> np.ndarray:
    """
    Closed-form Eguchi-Hanson metric in a bundle patch (fiber, base):

        g_ff = s²/W,  g_bb = (a² + s u²)/(s² W),  g_fb = 2 s f̄ b / W,

    s = 1 + |b|², u = 2|f|s, W = √(a² + u²). Written through |f|² only.
    """
    fx, fy, bx, by = Jet.variables([fiber.real, fiber.imag, base.real, base.imag], order)
    f = fx + 1j * fy
    b = bx + 1j * by
    s = 1.0 + bx * bx + by * by
    u_sq = 4.0 * (fx * fx + fy * fy) * s * s
    root = jets.sqrt(a * a + u_sq)
    g_ff = s * s / root
    g_bb = (a * a + s * u_sq) / (s * s * root)
    g_fb = 2.0 * s * f.conj() * b / root
    out = np.zeros((jets.ncoeff(NVARS, order), 2, 2), dtype=complex)
    out[:, 0, 0] = g_ff.coeffs
    out[:, 1, 1] = g_bb.coeffs
    out[:, 0, 1] = g_fb.coeffs
    out[:, 1, 0] = g_fb.conj().coeffs
    return out


def bundle_metric_jets(a: float, coords, order: int, rescaled: bool = False) -> np.ndarray:
    """Jets of the bundle-chart metric; rescaled uses (z_a, ζ) with z = a·z_a."""
    fiber, base = complex(coords[0]), complex(coords[1])
    if rescaled:
        return a * _bundle_component_jets(1.0, fiber, base, order)
    return _bundle_component_jets(a, fiber, base, order)


def bundle_chart_metric(a: float, coords, patch: str = "zeta", rescaled: bool = False) -> HermitianMetric:
    if patch not in PATCHES:
        raise WrongPatchError(f"unknown bundle patch '{patch}'")
    if abs(coords[1]) > 1.0:
        raise WrongPatchError(f"|{patch}| = {abs(coords[1]):.6g} > 1; use the other patch")
    components = bundle_metric_jets(a, coords, 0, rescaled)[0]
    return HermitianMetric(components, chart=f"bundle-{patch}")


def bundle_to_orbifold(coords, patch: str = "zeta", a: float = None, rescaled: bool = False) -> np.ndarray:
    """Orbifold coordinates (z1, z2) of a bundle point, up to the ±1 ambiguity."""
    fiber, base = complex(coords[0]), complex(coords[1])
    if rescaled:
        fiber = a * fiber
    root = np.sqrt(2.0 * fiber + 0j)
    if patch == "zeta":
        return np.array([root, base * root])
    if patch == "upsilon":
        return np.array([base * root, -root])
    raise WrongPatchError(f"unknown bundle patch '{patch}'")


def orbifold_to_bundle(z, patch: str = "zeta") -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if patch == "zeta":
        if z[0] == 0:
            raise WrongPatchError("z1 = 0 lies outside the zeta patch")
        return np.array([z[0] ** 2 / 2.0, z[1] / z[0]])
    if patch == "upsilon":
        if z[1] == 0:
            raise WrongPatchError("z2 = 0 lies outside the upsilon patch")
        return np.array([z[1] ** 2 / 2.0, -z[0] / z[1]])
    raise WrongPatchError(f"unknown bundle patch '{patch}'")


def bundle_jacobian(coords, patch: str = "zeta", a: float = None, rescaled: bool = False) -> np.ndarray:
    """Holomorphic Jacobian J[μ, i] = ∂z_μ/∂w_i of the map to orbifold coordinates."""
    fiber, base = complex(coords[0]), complex(coords[1])
    scale = a if rescaled else 1.0
    root = np.sqrt(2.0 * scale * fiber + 0j)
    if root == 0:
        raise OrbifoldPointError("bundle Jacobian is singular on the zero section")
    if patch == "zeta":
        jac = np.array([[1.0 / root, 0.0], [base / root, root]], dtype=complex)
    elif patch == "upsilon":
        jac = np.array([[base / root, root], [-1.0 / root, 0.0]], dtype=complex)
    else:
        raise WrongPatchError(f"unknown bundle patch '{patch}'")
    jac[:, 0] *= scale
    return jac


def bundle_pullback_metric(a: float, coords, patch: str = "zeta", rescaled: bool = False) -> np.ndarray:
    """Pullback of the orbifold Eguchi-Hanson metric through the bundle map."""
    z = bundle_to_orbifold(coords, patch, a, rescaled)
    g = metric_at(RadialPotentialSpec.eguchi_hanson(a), z).components
    jac = bundle_jacobian(coords, patch, a, rescaled)
    return np.einsum("mi,mn,nj->ij", jac, g, jac.conj())


def cross_term_factor(a: float, coords, patch: str = "zeta") -> float:
    """Closed-form mixed component over the pulled-back one; 1 when they agree."""
    closed = bundle_metric_jets(a, coords, 0)[0][0, 1]
    pulled = bundle_pullback_metric(a, coords, patch)[0, 1]
    if abs(pulled) < 1e-300:
        return 1.0 if abs(closed) < 1e-300 else np.inf
    factor = float((closed / pulled).real)
    if abs(factor - 1.0) > 1e-8:
        logging.warning(f"Bundle mixed term differs from the pullback by factor {factor:.12g}")
    return factor


# ---------------------------------------------------------------------------
# Metric fields (used by geodesics and identity checks)
# ---------------------------------------------------------------------------

class RadialField:
    """Radial potential in an orbifold chart, closed-form metric and Christoffels."""

    def __init__(self, spec: RadialPotentialSpec):
        self.spec = spec
        self.chart = "orbifold"

    def metric(self, z) -> np.ndarray:
        return metric_at(self.spec, z).components

    def christoffel(self, z) -> np.ndarray:
        return radial_christoffel(self.spec, z)

    def hermitian_jets(self, z, order: int) -> np.ndarray:
        return radial_metric_jets(self.spec, z, order)


class BundleField:
    """
    Eguchi-Hanson metric in a bundle patch. The closed form is valid on the
    whole base plane; only bundle_chart_metric enforces |base| <= 1.
    """

    def __init__(self, a: float, patch: str = "zeta", rescaled: bool = False):
        if patch not in PATCHES:
            raise WrongPatchError(f"unknown bundle patch '{patch}'")
        self.a = a
        self.patch = patch
        self.rescaled = rescaled
        self.chart = f"bundle-{patch}"
        self.volume_normalization = a * a if rescaled else 1.0

    def hermitian_jets(self, coords, order: int) -> np.ndarray:
        return bundle_metric_jets(self.a, coords, order, self.rescaled)

    def metric(self, coords) -> np.ndarray:
        return self.hermitian_jets(coords, 0)[0]

    def christoffel(self, coords) -> np.ndarray:
        return christoffel_from_jets(self.hermitian_jets(coords, 1))


# ---------------------------------------------------------------------------
# Neck scaling studies
# ---------------------------------------------------------------------------

def _neck_grid(delta: float, n: int) -> np.ndarray:
    return np.linspace(1.0, 1.0 + delta, n + 2)[1:-1]


def neck_curvature_sup(a: float, delta: float, n: int = 41) -> float:
    """sup over the neck of √Kretschmann for the glued potential."""
    spec = RadialPotentialSpec.glued(a, delta)
    values = [np.sqrt(curvature_at(spec, [np.sqrt(u), 0.0]).kretschmann) for u in _neck_grid(delta, n)]
    return float(max(values))


def neck_psi_sup(a: float, delta: float, n: int = 201) -> float:
    spec = RadialPotentialSpec.glued(a, delta)
    return float(max(abs(np.log(radial_determinant(spec, u))) for u in _neck_grid(delta, n)))


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)
