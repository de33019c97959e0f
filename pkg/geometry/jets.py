"""
Jet Arithmetic Module

Truncated multivariate Taylor expansions ("jets") over up to four real
variables, to order six. Every derivative used by the metric, curvature and
identity code comes from here rather than from finite differences.

Storage:
  - A jet of order N in n variables holds the Taylor coefficients
    c_alpha = (d^alpha f)(p) / alpha! for all multi-indices |alpha| <= N.
  - Multi-indices are kept in graded lexicographic order, so truncating to a
    lower order is a prefix slice of the coefficient array.
  - Coefficients may be complex; holomorphic partials are formed downstream
    as (d_x -/+ i d_y) / 2.

Two layers are provided:
  - The Jet class for scalar fields, with arithmetic and elementary functions
    (sqrt, ln, exp, arsinh, sin, cos, real powers).
  - Array-level helpers for tensor-valued jets (leading axis = coefficient):
    tensor_product (Cauchy product with an einsum contraction), tensor_partial,
    tensor_truncate, tensor_derivative and matrix_inverse.

Primary functions:
  - jet_arithmetic(a, b, op), jet_elementary(a, fn)
  - taylor_series(fn, x0, order), antiderivative(series, constant)
"""

import logging
from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from configs.defaults import JET_MAX_ORDER
from utils.error_handler import JetDomainError, SingularJetError

MAX_NVARS = 4
MAX_ORDER = JET_MAX_ORDER

# reserved einsum label for the coefficient axis
_COEFF_LABEL = "Z"


# ---------------------------------------------------------------------------
# Multi-index bookkeeping
# ---------------------------------------------------------------------------

def _compositions(degree: int, nvars: int) -> list:
    if nvars == 1:
        return [(degree,)]
    result = []
    for first in range(degree, -1, -1):
        for rest in _compositions(degree - first, nvars - 1):
            result.append((first,) + rest)
    return result


@lru_cache(maxsize=None)
def multi_indices(nvars: int, order: int) -> tuple:
    """All multi-indices of total degree <= order, graded lexicographic."""
    indices = []
    for degree in range(order + 1):
        indices.extend(_compositions(degree, nvars))
    return tuple(indices)


@lru_cache(maxsize=None)
def index_map(nvars: int, order: int) -> dict:
    return {alpha: i for i, alpha in enumerate(multi_indices(nvars, order))}


def ncoeff(nvars: int, order: int) -> int:
    return comb(nvars + order, order)


def order_of(length: int, nvars: int) -> int:
    """Recover the order of a coefficient array from its length."""
    for order in range(MAX_ORDER + 1):
        if ncoeff(nvars, order) == length:
            return order
    raise JetDomainError(f"no jet order in {nvars} variables has {length} coefficients")


def _check_shape(nvars: int, order: int) -> None:
    if not 1 <= nvars <= MAX_NVARS:
        raise JetDomainError(f"nvars={nvars} outside 1..{MAX_NVARS}")
    if not 0 <= order <= MAX_ORDER:
        raise JetDomainError(f"order={order} outside 0..{MAX_ORDER}")


@lru_cache(maxsize=None)
def _product_table(nvars: int, order: int) -> tuple:
    """Index triples (i, j, k) with alpha_i + alpha_j = alpha_k, |alpha_k| <= order."""
    mis = multi_indices(nvars, order)
    idx = index_map(nvars, order)
    left, right, target = [], [], []
    for i, a in enumerate(mis):
        da = sum(a)
        for j, b in enumerate(mis):
            if da + sum(b) > order:
                continue
            left.append(i)
            right.append(j)
            target.append(idx[tuple(x + y for x, y in zip(a, b))])
    return np.array(left), np.array(right), np.array(target)


@lru_cache(maxsize=None)
def _partial_table(nvars: int, order: int, var: int) -> tuple:
    """Source indices and factors for d/dx_var, result of order - 1."""
    idx = index_map(nvars, order)
    src, factor = [], []
    for beta in multi_indices(nvars, order - 1):
        alpha = list(beta)
        alpha[var] += 1
        src.append(idx[tuple(alpha)])
        factor.append(beta[var] + 1)
    return np.array(src, dtype=int), np.array(factor, dtype=float)


@lru_cache(maxsize=None)
def _derivative_map(nvars: int, order: int, n: int) -> tuple:
    """Coefficient index and alpha! factor for every ordered index tuple of length n."""
    idx = index_map(nvars, order)
    shape = (nvars,) * n
    positions = np.zeros(shape, dtype=int)
    factors = np.zeros(shape)
    for combo in product(range(nvars), repeat=n):
        alpha = [0] * nvars
        for v in combo:
            alpha[v] += 1
        weight = 1.0
        for k in alpha:
            weight *= factorial(k)
        positions[combo] = idx[tuple(alpha)]
        factors[combo] = weight
    return positions, factors


# ---------------------------------------------------------------------------
# Array-level (tensor-valued) operations
# ---------------------------------------------------------------------------

def _expand(factors: np.ndarray, ndim: int) -> np.ndarray:
    return factors.reshape(factors.shape + (1,) * ndim)


def tensor_truncate(coeffs: np.ndarray, nvars: int, order: int) -> np.ndarray:
    return coeffs[:ncoeff(nvars, order)]


def tensor_product(a: np.ndarray, b: np.ndarray, nvars: int, subscripts: str = None) -> np.ndarray:
    """
    Cauchy product of two tensor-valued jets.

    `subscripts` is an einsum expression for the tensor axes only, e.g.
    "ij,jk->ik"; the coefficient axis is handled here. Without subscripts the
    tensor axes are multiplied elementwise with broadcasting. The result has
    the lower of the two orders.
    """
    order = min(order_of(len(a), nvars), order_of(len(b), nvars))
    a = tensor_truncate(a, nvars, order)
    b = tensor_truncate(b, nvars, order)
    left, right, target = _product_table(nvars, order)
    if subscripts is None:
        terms = a[left] * b[right]
    else:
        lhs, rhs = subscripts.replace(" ", "").split("->")
        sa, sb = lhs.split(",")
        expr = f"{_COEFF_LABEL}{sa},{_COEFF_LABEL}{sb}->{_COEFF_LABEL}{rhs}"
        terms = np.einsum(expr, a[left], b[right])
    out = np.zeros((ncoeff(nvars, order),) + terms.shape[1:], dtype=terms.dtype)
    np.add.at(out, target, terms)
    return out


def tensor_partial(coeffs: np.ndarray, nvars: int, var: int) -> np.ndarray:
    order = order_of(len(coeffs), nvars)
    if order == 0:
        raise JetDomainError("cannot differentiate an order-0 jet")
    src, factor = _partial_table(nvars, order, var)
    return coeffs[src] * _expand(factor, coeffs.ndim - 1)


def tensor_gradient(coeffs: np.ndarray, nvars: int) -> np.ndarray:
    """Stack of partials along a new axis 1: out[:, k, ...] = d_k coeffs."""
    return np.stack([tensor_partial(coeffs, nvars, k) for k in range(nvars)], axis=1)


def tensor_derivative(coeffs: np.ndarray, nvars: int, n: int) -> np.ndarray:
    """Full symmetric n-th derivative tensor at the expansion point, index axes first."""
    order = order_of(len(coeffs), nvars)
    if n > order:
        raise JetDomainError(f"derivative of order {n} requested from a jet of order {order}")
    if n == 0:
        return coeffs[0]
    positions, factors = _derivative_map(nvars, order, n)
    return coeffs[positions] * _expand(factors, coeffs.ndim - 1)


def constant_tensor(value: np.ndarray, nvars: int, order: int) -> np.ndarray:
    value = np.asarray(value)
    out = np.zeros((ncoeff(nvars, order),) + value.shape, dtype=value.dtype)
    out[0] = value
    return out


def matrix_inverse(coeffs: np.ndarray, nvars: int) -> np.ndarray:
    """Inverse of a matrix-valued jet via the Neumann series around its value."""
    order = order_of(len(coeffs), nvars)
    inv0 = np.linalg.inv(coeffs[0])
    nilpotent = coeffs.copy()
    nilpotent[0] = 0.0
    step = -np.einsum("ij,Zjk->Zik", inv0, nilpotent)
    term = constant_tensor(inv0, nvars, order)
    result = term.copy()
    for _ in range(order):
        term = tensor_product(step, term, nvars, "ij,jk->ik")
        result = result + term
    return result


def matrix_det2(coeffs: np.ndarray, nvars: int) -> np.ndarray:
    """Determinant of a 2x2 matrix-valued jet."""
    a = coeffs[:, 0, 0]
    b = coeffs[:, 0, 1]
    c = coeffs[:, 1, 0]
    d = coeffs[:, 1, 1]
    return tensor_product(a, d, nvars) - tensor_product(b, c, nvars)


# ---------------------------------------------------------------------------
# Univariate Taylor series of the elementary functions
# ---------------------------------------------------------------------------

def arsinh_compensated(t: float) -> float:
    """arsinh(t) without cancellation for |t| << 1."""
    if t < 0:
        return -arsinh_compensated(-t)
    return float(np.log1p(t + t * t / (1.0 + np.sqrt(1.0 + t * t))))


def _power_series(x0, p: float, order: int) -> np.ndarray:
    series = np.zeros(order + 1, dtype=np.result_type(x0, float))
    coeff = 1.0
    for k in range(order + 1):
        series[k] = coeff * x0 ** (p - k)
        coeff *= (p - k) / (k + 1)
    return series


def taylor_series(fn: str, x0, order: int, p: float = None) -> np.ndarray:
    """
    Taylor coefficients s_k = fn^(k)(x0) / k! for k = 0..order.

    fn is one of sqrt, ln, exp, arsinh, sin, cos, reciprocal, power (with p).
    """
    x0_real = np.isrealobj(x0) or abs(np.imag(x0)) == 0.0
    fractional = fn == "power" and p is not None and not float(p).is_integer()
    if fn in ("sqrt", "ln", "arsinh", "sin", "cos", "exp") or fractional:
        if not x0_real:
            raise JetDomainError(f"{fn} of a jet with complex constant term {x0}")
        x0 = float(np.real(x0))

    if fn == "sqrt":
        if x0 <= 0.0:
            raise JetDomainError(f"sqrt of a jet with non-positive constant term {x0}")
        return _power_series(x0, 0.5, order)
    if fn == "power":
        if p is None:
            raise JetDomainError("power requires an exponent")
        if not float(p).is_integer() and x0 <= 0.0:
            raise JetDomainError(f"non-integer power of a jet with non-positive constant term {x0}")
        if p < 0 and x0 == 0:
            raise SingularJetError("negative power of a jet with zero constant term")
        return _power_series(x0, float(p), order)
    if fn == "reciprocal":
        if x0 == 0:
            raise SingularJetError("division by a jet with zero constant term")
        series = np.zeros(order + 1, dtype=np.result_type(x0, float))
        for k in range(order + 1):
            series[k] = (-1) ** k / x0 ** (k + 1)
        return series
    if fn == "ln":
        if x0 <= 0.0:
            raise JetDomainError(f"ln of a jet with non-positive constant term {x0}")
        series = np.zeros(order + 1)
        series[0] = np.log(x0)
        for k in range(1, order + 1):
            series[k] = (-1) ** (k + 1) / (k * x0 ** k)
        return series
    if fn == "exp":
        return np.array([np.exp(x0) / factorial(k) for k in range(order + 1)])
    if fn == "sin":
        return np.array([np.sin(x0 + k * np.pi / 2) / factorial(k) for k in range(order + 1)])
    if fn == "cos":
        return np.array([np.cos(x0 + k * np.pi / 2) / factorial(k) for k in range(order + 1)])
    if fn == "arsinh":
        series = np.zeros(order + 1)
        series[0] = arsinh_compensated(x0)
        if order > 0:
            # d/dx arsinh = (1 + x^2)^(-1/2), expanded at x0 and integrated termwise
            x = Jet.variable(0, x0, nvars=1, order=order - 1)
            dseries = power(1.0 + x * x, -0.5).coeffs
            series[1:] = dseries / np.arange(1, order + 1)
        return series
    raise JetDomainError(f"unknown elementary function '{fn}'")


def antiderivative(series: np.ndarray, constant: float) -> np.ndarray:
    """Univariate antiderivative of a Taylor series, one order higher."""
    out = np.zeros(len(series) + 1, dtype=np.result_type(series, constant))
    out[0] = constant
    out[1:] = series / np.arange(1, len(series) + 1)
    return out


# ---------------------------------------------------------------------------
# Scalar jets
# ---------------------------------------------------------------------------

class Jet:
    """Truncated Taylor expansion of a scalar field at a point."""

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, coeffs: np.ndarray, nvars: int, order: int):
        _check_shape(nvars, order)
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (ncoeff(nvars, order),):
            raise JetDomainError(
                f"coefficient array of shape {coeffs.shape} does not fit nvars={nvars}, order={order}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise JetDomainError("non-finite jet coefficient")
        if not np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(float)
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        coeffs = np.zeros(ncoeff(nvars, order), dtype=np.result_type(value, float))
        coeffs[0] = value
        return cls(coeffs, nvars, order)

    @classmethod
    def variable(cls, index: int, value: float, nvars: int, order: int) -> "Jet":
        """The coordinate function x_index expanded at x_index = value."""
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            unit = [0] * nvars
            unit[index] = 1
            jet.coeffs[index_map(nvars, order)[tuple(unit)]] = 1.0
        return jet

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> list:
        return [cls.variable(i, x, len(point), order) for i, x in enumerate(point)]

    # -- plumbing -----------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise JetDomainError(f"jets over {self.nvars} and {other.nvars} variables")
            return other
        return Jet.constant(other, self.nvars, self.order)

    def _aligned(self, other) -> tuple:
        other = self._coerce(other)
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order), order

    @property
    def value(self):
        return self.coeffs[0]

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise JetDomainError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.coeffs[:ncoeff(self.nvars, order)], self.nvars, order)

    def compose(self, series: np.ndarray) -> "Jet":
        """f(self) for f given by its Taylor series at self.value (Horner in the nilpotent part)."""
        nilpotent = self.coeffs.copy()
        nilpotent[0] = 0.0
        dtype = np.result_type(series, nilpotent)
        result = constant_tensor(np.asarray(series[self.order], dtype=dtype), self.nvars, self.order)
        for k in range(self.order - 1, -1, -1):
            result = tensor_product(result, nilpotent, self.nvars)
            result[0] += series[k]
        return Jet(result, self.nvars, self.order)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        a, b, order = self._aligned(other)
        return Jet(a.coeffs + b.coeffs, self.nvars, order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b, order = self._aligned(other)
        return Jet(a.coeffs - b.coeffs, self.nvars, order)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * other, self.nvars, self.order)
        a, b, order = self._aligned(other)
        return Jet(tensor_product(a.coeffs, b.coeffs, self.nvars), self.nvars, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise SingularJetError("division of a jet by zero")
            return Jet(self.coeffs / other, self.nvars, self.order)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            result = Jet.constant(1.0, self.nvars, self.order)
            for _ in range(p):
                result = result * self
            return result
        return power(self, p)

    def conj(self) -> "Jet":
        return Jet(np.conj(self.coeffs), self.nvars, self.order)

    @property
    def real(self) -> "Jet":
        return Jet(np.real(self.coeffs), self.nvars, self.order)

    # -- derivatives --------------------------------------------------------

    def partial(self, var: int) -> "Jet":
        return Jet(tensor_partial(self.coeffs, self.nvars, var), self.nvars, self.order - 1)

    def derivative(self, alpha: Sequence[int]) -> complex:
        """d^alpha f at the expansion point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise JetDomainError(f"derivative {alpha} exceeds jet order {self.order}")
        weight = 1.0
        for k in alpha:
            weight *= factorial(k)
        return self.coeffs[index_map(self.nvars, self.order)[alpha]] * weight

    def gradient(self) -> np.ndarray:
        return tensor_derivative(self.coeffs, self.nvars, 1)

    def hessian(self) -> np.ndarray:
        return tensor_derivative(self.coeffs, self.nvars, 2)

    def derivative_tensor(self, n: int) -> np.ndarray:
        return tensor_derivative(self.coeffs, self.nvars, n)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value})"


# ---------------------------------------------------------------------------
# Elementary functions on jets
# ---------------------------------------------------------------------------

def _elementary(jet: Jet, fn: str, p: float = None) -> Jet:
    return jet.compose(taylor_series(fn, jet.value, jet.order, p))


def sqrt(jet: Jet) -> Jet:
    return _elementary(jet, "sqrt")


def ln(jet: Jet) -> Jet:
    return _elementary(jet, "ln")


def exp(jet: Jet) -> Jet:
    return _elementary(jet, "exp")


def arsinh(jet: Jet) -> Jet:
    return _elementary(jet, "arsinh")


def sin(jet: Jet) -> Jet:
    return _elementary(jet, "sin")


def cos(jet: Jet) -> Jet:
    return _elementary(jet, "cos")


def power(jet: Jet, p: float) -> Jet:
    return _elementary(jet, "power", p)


def reciprocal(jet: Jet) -> Jet:
    return _elementary(jet, "reciprocal")


ELEMENTARY: dict = {
    "sqrt": sqrt,
    "ln": ln,
    "exp": exp,
    "arsinh": arsinh,
    "sin": sin,
    "cos": cos,
}

_ARITHMETIC: dict = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def jet_arithmetic(a: Jet, b: Jet, op: str) -> Jet:
    if a.nvars != b.nvars or a.order != b.order:
        raise JetDomainError(
            f"mismatched jets: ({a.nvars}, {a.order}) vs ({b.nvars}, {b.order})"
        )
    try:
        return _ARITHMETIC[op](a, b)
    except KeyError:
        raise JetDomainError(f"unknown jet operation '{op}'") from None


def jet_elementary(a: Jet, fn: str) -> Jet:
    try:
        func: Callable = ELEMENTARY[fn]
    except KeyError:
        raise JetDomainError(f"unknown elementary function '{fn}'") from None
    return func(a)


logging.debug(f"jets: max {MAX_NVARS} variables, max order {MAX_ORDER}")
