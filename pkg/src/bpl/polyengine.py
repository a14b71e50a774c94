"""Dense multivariate polynomial arithmetic on degree-bounded spaces.

A polynomial in ``n`` variables with per-variable degree bound ``m`` is a
coefficient tensor of shape ``(m+1,)*n``; flattening that tensor in C order
is the lexicographic monomial order used by every operator matrix here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

_EINSUM_LETTERS = "abcdefghijkl"


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial with complex coefficients and a shared per-variable bound."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim > 0 and len(set(c.shape)) > 1:
            raise ValueError(f"coefficient tensor must be hypercubic, got {c.shape}")
        if not (np.isfinite(c.real).all() and np.isfinite(c.imag).all()):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def nvars(self) -> int:
        return self.coeffs.ndim

    @property
    def degree_bound(self) -> int:
        return 0 if self.coeffs.ndim == 0 else self.coeffs.shape[0] - 1

    @classmethod
    def zero(cls, nvars: int, degree_bound: int) -> "MultiPoly":
        return cls(np.zeros((degree_bound + 1,) * nvars, dtype=complex))

    @classmethod
    def constant(cls, nvars: int, degree_bound: int, value: complex) -> "MultiPoly":
        p = cls.zero(nvars, degree_bound)
        p.coeffs[(0,) * nvars] = value
        return p

    @classmethod
    def monomial(cls, nvars: int, degree_bound: int, exponents) -> "MultiPoly":
        p = cls.zero(nvars, degree_bound)
        p.coeffs[tuple(exponents)] = 1.0
        return p

    def __call__(self, point) -> complex:
        return poly_eval(self, point)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised evaluation; ``points`` has shape (npoints, nvars)."""
        points = np.asarray(points, dtype=complex)
        if self.nvars == 0:
            return np.full(len(points), complex(self.coeffs))
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError(f"expected points of shape (P, {self.nvars})")
        m = self.degree_bound
        letters = _EINSUM_LETTERS[: self.nvars]
        spec = ",".join(f"p{c}" for c in letters) + f",{letters}->p"
        powers = [np.vander(points[:, i], m + 1, increasing=True) for i in range(self.nvars)]
        return np.einsum(spec, *powers, self.coeffs)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "MultiPoly":
        return MultiPoly(self.coeffs * scalar)

    __rmul__ = __mul__


def poly_eval(p: MultiPoly, point) -> complex:
    """Evaluate by Horner recursion over one variable at a time."""
    point = [complex(z) for z in (point if np.ndim(point) else [point])] if p.nvars else []
    if len(point) != p.nvars:
        raise ValueError(f"point must have {p.nvars} coordinates")
    acc = p.coeffs
    for z in reversed(point):
        out = acc[..., -1]
        for k in range(acc.shape[-1] - 2, -1, -1):
            out = out * z + acc[..., k]
        acc = out
    return complex(acc)


def partial_derivative(p: MultiPoly, i: int, order: int = 1) -> MultiPoly:
    """Exact coefficient-shift differentiation; the degree bound is kept and
    the vacated top coefficients are zero."""
    if order < 0:
        raise ValueError("order must be non-negative")
    c = p.coeffs
    m = p.degree_bound
    for _ in range(order):
        shifted = np.zeros_like(c)
        if m >= 1:
            idx_src = [slice(None)] * p.nvars
            idx_dst = [slice(None)] * p.nvars
            idx_src[i] = slice(1, m + 1)
            idx_dst[i] = slice(0, m)
            factors = np.arange(1, m + 1).reshape(
                [-1 if ax == i else 1 for ax in range(p.nvars)]
            )
            shifted[tuple(idx_dst)] = c[tuple(idx_src)] * factors
        c = shifted
    return MultiPoly(c)


def substitute(p: MultiPoly, i: int, alpha: complex) -> MultiPoly:
    """Pin variable i to the value alpha.

    The arity is kept: the result has degree 0 in the substituted variable,
    which keeps it directly comparable with the differential realization.
    """
    c = p.coeffs
    m = p.degree_bound
    moved = np.moveaxis(c, i, -1)
    out = moved[..., -1]
    for k in range(m - 1, -1, -1):
        out = out * alpha + moved[..., k]
    res = np.zeros_like(c)
    res_view = np.moveaxis(res, i, -1)
    res_view[..., 0] = out
    return MultiPoly(res)


def taylor_substitution(p: MultiPoly, i: int, alpha: complex) -> MultiPoly:
    """Differential realization of variable replacement on the bounded space:

        sum_{k=0}^{m} (alpha - z_i)^k / k!  d^k/dz_i^k

    Exact (up to roundoff) on polynomials within the degree bound; every term
    stays inside the bound because the k-th derivative loses k degrees before
    the degree-k prefactor multiplies back in.
    """
    m = p.degree_bound
    acc = np.zeros_like(p.coeffs)
    for k in range(m + 1):
        dk = partial_derivative(p, i, k).coeffs
        # multiply by (alpha - z_i)^k, expanded along axis i
        term = np.zeros_like(dk)
        for j in range(k + 1):
            coef = comb(k, j) * alpha ** (k - j) * (-1.0) ** j / factorial(k)
            if j == 0:
                term += coef * dk
            else:
                idx_src = [slice(None)] * p.nvars
                idx_dst = [slice(None)] * p.nvars
                idx_src[i] = slice(0, m + 1 - j)
                idx_dst[i] = slice(j, m + 1)
                term[tuple(idx_dst)] += coef * dk[tuple(idx_src)]
        acc += term
    return MultiPoly(acc)


# -- linear maps in the monomial basis ----------------------------------------

@dataclass(frozen=True)
class PolyOperator:
    """Linear map on the bounded polynomial space, stored in the
    lexicographic monomial basis."""

    nvars: int
    degree_bound: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = (self.degree_bound + 1) ** self.nvars
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix must be {dim}x{dim}, got {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return (self.degree_bound + 1) ** self.nvars

    def apply(self, p: MultiPoly) -> MultiPoly:
        if p.nvars != self.nvars or p.degree_bound != self.degree_bound:
            raise ValueError("operator and polynomial live on different spaces")
        out = self.matrix @ p.coeffs.ravel()
        return MultiPoly(out.reshape(p.coeffs.shape))

    @classmethod
    def identity(cls, nvars: int, degree_bound: int) -> "PolyOperator":
        dim = (degree_bound + 1) ** nvars
        return cls(nvars, degree_bound, np.eye(dim, dtype=complex))

    @classmethod
    def from_action(cls, nvars: int, degree_bound: int, action) -> "PolyOperator":
        """Assemble the matrix column by column from a MultiPoly -> MultiPoly map."""
        dim = (degree_bound + 1) ** nvars
        mat = np.zeros((dim, dim), dtype=complex)
        shape = (degree_bound + 1,) * nvars
        for col in range(dim):
            e = np.zeros(dim, dtype=complex)
            e[col] = 1.0
            mat[:, col] = action(MultiPoly(e.reshape(shape))).coeffs.ravel()
        return cls(nvars, degree_bound, mat)


def derivative_operator(nvars: int, degree_bound: int, i: int, order: int = 1) -> PolyOperator:
    return PolyOperator.from_action(
        nvars, degree_bound, lambda p: partial_derivative(p, i, order)
    )


def substitution_operator_poly(nvars: int, degree_bound: int, i: int) -> list[PolyOperator]:
    """Variable replacement with a symbolic target, as an operator-valued
    polynomial: returns [S_0, ..., S_m] with  D = sum_j alpha^j S_j  for any
    replacement value alpha.

    Obtained by expanding (alpha - z_i)^k in the differential realization and
    collecting powers of alpha.
    """
    m = degree_bound
    shape = (m + 1,) * nvars
    dim = (m + 1) ** nvars

    def shift_mul(coeffs: np.ndarray, power: int) -> np.ndarray:
        # multiply by z_i^power (exact here: inputs were differentiated first)
        out = np.zeros_like(coeffs)
        if power == 0:
            return coeffs.copy()
        idx_src = [slice(None)] * nvars
        idx_dst = [slice(None)] * nvars
        idx_src[i] = slice(0, m + 1 - power)
        idx_dst[i] = slice(power, m + 1)
        out[tuple(idx_dst)] = coeffs[tuple(idx_src)]
        return out

    mats = [np.zeros((dim, dim), dtype=complex) for _ in range(m + 1)]
    for col in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[col] = 1.0
        p = MultiPoly(e.reshape(shape))
        for k in range(m + 1):
            dk = partial_derivative(p, i, k).coeffs
            for j in range(k + 1):
                coef = comb(k, j) * (-1.0) ** (k - j) / factorial(k)
                mats[j][:, col] += coef * shift_mul(dk, k - j).ravel()
    return [PolyOperator(nvars, m, mat) for mat in mats]


# -- tensor-grid interpolation ---------------------------------------------------

def vandermonde(nodes: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(np.asarray(nodes, dtype=complex), degree + 1, increasing=True)


def grid_condition(nodes: np.ndarray) -> float:
    """Condition number of the square Vandermonde system on these nodes."""
    nodes = np.asarray(nodes, dtype=complex)
    return float(np.linalg.cond(vandermonde(nodes, len(nodes) - 1)))


def tensor_interpolate(values: np.ndarray, node_sets) -> np.ndarray:
    """Coefficient tensor of the polynomial matching ``values`` on a tensor
    grid.  The trailing axes of ``values`` run over the per-variable node
    sets; any leading axes are treated as batch dimensions.
    """
    node_sets = [np.asarray(g, dtype=complex) for g in node_sets]
    out = np.asarray(values, dtype=complex)
    batch = out.ndim - len(node_sets)
    if batch < 0:
        raise ValueError("more node sets than value axes")
    for k, nodes in enumerate(node_sets):
        if len(set(np.round(nodes, 14))) != len(nodes):
            raise ValueError("interpolation nodes collide; regrid")
        ax = batch + k
        v = vandermonde(nodes, len(nodes) - 1)
        moved = np.moveaxis(out, ax, 0)
        solved = np.linalg.solve(v, moved.reshape(len(nodes), -1))
        out = np.moveaxis(solved.reshape(moved.shape), 0, ax)
    return out
