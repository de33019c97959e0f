"""
Real Riemannian tensor route.

Works with the real 4x4 metric G = 2·Re g in coordinates (x1, y1, x2, y2) and
produces, from jets of G of order m:

  - Γ^a_{bc}                  (order m−1)
  - Rm[x, y, z, w] = ⟨R(∂x, ∂y)∂z, ∂w⟩   (order m−2)
  - ∇Rm[e, x, y, z, w]        (order m−3)
  - ∇²Rm[f, e, x, y, z, w]    (order m−4)

with R(X, Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]. σ contractions, the Laplacian of
the curvature and the second-variation curvature term all read from here.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry import jets
from geometry.metric import NVARS, hermitian_metric_jets, real_metric
from utils.error_handler import CapabilityError

_SLOT_LETTERS = "abcdghijk"


@dataclass(frozen=True)
class LocalGeometry:
    metric: np.ndarray                       # G_ab
    christoffel: np.ndarray                  # Γ^a_bc
    riemann_up: np.ndarray                   # R^a_bcd, R(∂c, ∂d)∂b = R^a_bcd ∂a
    riemann: np.ndarray                      # Rm[x, y, z, w]
    nabla_riemann: Optional[np.ndarray] = None
    nabla2_riemann: Optional[np.ndarray] = None

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)


def _covariant_derivative(tensor: np.ndarray, christoffel: np.ndarray) -> np.ndarray:
    """
    Jets of ∇T for a covariant tensor T (jets, k index axes); new index first.

    ∇_e T_{i1..ik} = ∂_e T_{i1..ik} − Σ_j Γ^s_{e i_j} T_{i1..s..ik}
    """
    rank = tensor.ndim - 1
    slots = _SLOT_LETTERS[:rank]
    result = jets.tensor_gradient(tensor, NVARS)
    for j in range(rank):
        replaced = slots[:j] + "s" + slots[j + 1:]
        subscripts = f"se{slots[j]},{replaced}->e{slots}"
        term = jets.tensor_product(christoffel, tensor, NVARS, subscripts)
        result = result - term[:len(result)]
    return result


def real_metric_jets(source, z, order: int) -> np.ndarray:
    return real_metric(hermitian_metric_jets(source, z, order))


def curvature_jets(metric_jets: np.ndarray) -> tuple:
    """Jets of (Γ^a_bc, R^a_bcd, Rm) from jets of G of order m; orders m−1, m−2, m−2."""
    order = jets.order_of(len(metric_jets), NVARS)
    if order < 2:
        raise CapabilityError(f"curvature needs metric jets of order 2, got {order}")
    d_metric = jets.tensor_gradient(metric_jets, NVARS)        # [d, i, j] = ∂_d G_ij
    lowered = 0.5 * (
        np.einsum("Zabc->Zcab", d_metric)
        + np.einsum("Zbac->Zcab", d_metric)
        - d_metric
    )                                                           # Γ_{c,ab}
    inverse = jets.matrix_inverse(jets.tensor_truncate(metric_jets, NVARS, order - 1), NVARS)
    christoffel = jets.tensor_product(inverse, lowered, NVARS, "ec,cab->eab")

    d_christoffel = jets.tensor_gradient(christoffel, NVARS)   # [c, a, d, b] = ∂_c Γ^a_db
    quadratic = jets.tensor_product(christoffel, christoffel, NVARS, "ace,edb->abcd")[:len(d_christoffel)]
    riemann_up = (
        np.einsum("Zcadb->Zabcd", d_christoffel)
        - np.einsum("Zdacb->Zabcd", d_christoffel)
        + quadratic
        - np.einsum("Zabdc->Zabcd", quadratic)
    )
    riemann = jets.tensor_product(metric_jets, riemann_up, NVARS, "wa,azxy->xyzw")
    return christoffel, riemann_up, riemann


def geometry_from_jets(metric_jets: np.ndarray, derivatives: int = 0) -> LocalGeometry:
    """
    Curvature data from jets of G. `derivatives` = 0, 1 or 2 covariant
    derivatives of Rm, each consuming one more order of the metric jets.
    """
    order = jets.order_of(len(metric_jets), NVARS)
    if order < 2 + derivatives:
        raise CapabilityError(
            f"{derivatives} covariant derivatives of Rm need metric jets of order {2 + derivatives}, got {order}"
        )
    christoffel, riemann_up, riemann = curvature_jets(metric_jets)

    nabla = nabla2 = None
    if derivatives >= 1:
        nabla = _covariant_derivative(riemann, christoffel)
    if derivatives >= 2:
        nabla2 = _covariant_derivative(nabla, christoffel)
    return LocalGeometry(
        metric=metric_jets[0].real,
        christoffel=christoffel[0].real,
        riemann_up=riemann_up[0].real,
        riemann=riemann[0].real,
        nabla_riemann=None if nabla is None else nabla[0].real,
        nabla2_riemann=None if nabla2 is None else nabla2[0].real,
    )


def local_geometry(source, z, derivatives: int = 0) -> LocalGeometry:
    """Real curvature data at z for a radial spec or a metric field."""
    return geometry_from_jets(real_metric_jets(source, z, 2 + derivatives), derivatives)


def real_kretschmann(geometry: LocalGeometry) -> float:
    inv = geometry.inverse
    rm = geometry.riemann
    raised = np.einsum("abcd,ae,bf,cg,dh->efgh", rm, inv, inv, inv, inv)
    return float(np.einsum("abcd,abcd->", rm, raised))


def sectional_form(geometry: LocalGeometry, x, y) -> float:
    """⟨R(X, Y)Y, X⟩ (not normalized)."""
    return float(np.einsum("abcd,a,b,c,d->", geometry.riemann, x, y, y, x))


def ricci_identity_residual(geometry: LocalGeometry) -> float:
    """
    max |∇²_{f,e}Rm − ∇²_{e,f}Rm + Σ_slots R^s_{i f e} Rm_{..s..}|.
    """
    if geometry.nabla2_riemann is None:
        raise CapabilityError("Ricci identity needs second covariant derivatives of Rm")
    d2 = geometry.nabla2_riemann
    lhs = d2 - np.einsum("efxyzw->fexyzw", d2)
    rm = geometry.riemann
    r_up = geometry.riemann_up
    action = (
        np.einsum("sxfe,syzw->fexyzw", r_up, rm)
        + np.einsum("syfe,xszw->fexyzw", r_up, rm)
        + np.einsum("szfe,xysw->fexyzw", r_up, rm)
        + np.einsum("swfe,xyzs->fexyzw", r_up, rm)
    )
    residual = float(np.abs(lhs + action).max())
    logging.debug(f"Ricci identity residual {residual:.3e}")
    return residual
