"""Functional-equation layer: overlaps of dual transfer eigenvectors with
B-operator products, the linear relation those overlaps satisfy, and their
polynomial parts in the multiplicative variables.

For a dual eigenvector <Lambda| and rapidities lambda_1..lambda_n,

    F_n(lambda_1, ..., lambda_n) = <Lambda| B(lambda_1) ... B(lambda_n) |0>

is symmetric in its arguments and, after stripping the prefactor
``prod_i e^{(1-L) lambda_i}``, is a polynomial of degree L-1 in each
``x_i = e^{2 lambda_i}``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .config import SpectralConfig, random_complex
from .polyengine import MultiPoly, grid_condition, tensor_interpolate
from .ybcore import (
    EigenChoice,
    exchange_m_factors,
    monodromy,
    spectrum,
    transfer,
    weight_a,
    weight_b,
)

__all__ = [
    "EigenChoice",
    "FnSampler",
    "PolyFit",
    "check_fz_residual",
    "circle_grid",
    "compute_fn",
    "extract_fbar",
    "fz_coefficients",
    "lambda_bar_coefficients",
    "lambda_grid",
    "spectrum",
]


# -- interpolation grids in the rapidity plane ---------------------------------

def lambda_grid(count: int, slot: int = 0, nslots: int = 1, spacing: float = 0.35) -> np.ndarray:
    """Rapidity nodes with real spacing >= 0.3 and a slot-dependent offset.

    Distinct slots give disjoint node sets, so tensor grids built from them
    never place two equal x-values in one sample tuple.  A mild imaginary
    tilt spreads the phases of x = e^{2 lambda} to help the Vandermonde
    conditioning.
    """
    k = np.arange(count)
    re = spacing * (k - (count - 1) / 2) + spacing * (slot + 1) / (nslots + 2)
    im = 0.27 * k / max(count, 1) + 0.13 * slot
    return re + 1j * im


def circle_grid(count: int, slot: int = 0, nslots: int = 1) -> np.ndarray:
    """Rapidity nodes whose x = e^{2 lambda} form a scaled circle.

    Scaled roots of unity give near-unit Vandermonde condition numbers, and
    the slot-dependent radius keeps different variables' nodes (and their
    pairwise differences, which appear in coefficient denominators) well
    separated.  Used by the operator-extraction layers.
    """
    rho = 0.66 * (slot / (nslots - 1) - 0.5) if nslots > 1 else 0.0
    theta = 2 * np.pi * np.arange(count) / count + 0.37 * slot + 0.19
    return rho / 2 + 1j * theta / 2


# -- overlap sampler -------------------------------------------------------------

@dataclass
class FnSampler:
    """Evaluates F_n for one eigenpair, caching B-operators and the partial
    products of repeated rapidity suffixes.

    The caches are filled on first use and only read afterwards, so sampling
    is safe to share once warmed up.
    """

    cfg: SpectralConfig
    eig: EigenChoice
    _b_cache: dict = field(default_factory=dict, repr=False)
    _chain_cache: dict = field(default_factory=dict, repr=False)

    def _b(self, lam: complex) -> np.ndarray:
        op = self._b_cache.get(lam)
        if op is None:
            op = monodromy(lam, self.cfg).b.entries
            self._b_cache[lam] = op
        return op

    def _chain(self, lams: tuple[complex, ...]) -> np.ndarray:
        """B(lams[0]) ... B(lams[-1]) |0>, cached on suffixes."""
        if not lams:
            v = np.zeros(self.cfg.quantum_dim, dtype=complex)
            v[0] = 1.0
            return v
        cached = self._chain_cache.get(lams)
        if cached is None:
            cached = self._b(lams[0]) @ self._chain(lams[1:])
            self._chain_cache[lams] = cached
        return cached

    def value(self, lams) -> complex:
        """F_n at the given rapidities.

        The overlap vanishes identically unless the eigenpair sits in the
        sector matching the number of B-factors; a mismatch is reported with
        a warning rather than silently returning the zero function.
        """
        lams = tuple(complex(l) for l in lams)
        if len(lams) != self.eig.sector:
            warnings.warn(
                f"{len(lams)} B-factors against a sector-{self.eig.sector} "
                "eigenvector: the overlap is identically zero",
                stacklevel=2,
            )
            return 0.0
        return complex(self.eig.left @ self._chain(lams))


def compute_fn(sampler: FnSampler, lams) -> complex:
    return sampler.value(lams)


# -- the linear functional relation ----------------------------------------------

def fz_coefficients(lam0: complex, lams, cfg: SpectralConfig):
    """Coefficients (J0, [K_1..K_n]) of the relation

        J0 F_n(lams) - sum_i K_i F_n(lams with lams[i] -> lam0)
            = Lambda(lam0) F_n(lams).

    J0 multiplies the vacuum eigenvalue factors prod a(lam0 - mu_j) and
    prod b(lam0 - mu_j) by the exchange coefficients; each K_i does the same
    at the exchanged rapidity.  Raises on coincident rapidities.
    """
    lams = list(lams)
    ma0, md0, ma, md = exchange_m_factors(lam0, lams, cfg.gamma)
    pa0 = np.prod([weight_a(lam0 - m, cfg.gamma) for m in cfg.mu])
    pb0 = np.prod([weight_b(lam0 - m) for m in cfg.mu])
    j0 = complex(pa0 * ma0 + pb0 * md0)
    ks = []
    for i, lam in enumerate(lams):
        pal = np.prod([weight_a(lam - m, cfg.gamma) for m in cfg.mu])
        pbl = np.prod([weight_b(lam - m) for m in cfg.mu])
        ks.append(complex(pal * ma[i] + pbl * md[i]))
    return j0, ks


def check_fz_residual(sampler: FnSampler, lam0: complex, lams) -> float:
    """Residual of the functional relation, normalised by the largest term."""
    cfg = sampler.cfg
    lams = [complex(l) for l in lams]
    j0, ks = fz_coefficients(lam0, lams, cfg)
    f_here = sampler.value(lams)
    lam_val = sampler.eig.eigenvalue(lam0)
    total = j0 * f_here - lam_val * f_here
    scale = max(abs(j0 * f_here), abs(lam_val * f_here))
    for i, k in enumerate(ks):
        swapped = list(lams)
        swapped[i] = lam0
        term = k * sampler.value(swapped)
        total -= term
        scale = max(scale, abs(term))
    return float(abs(total) / max(scale, 1e-300))


# -- polynomial parts --------------------------------------------------------------

@dataclass(frozen=True)
class PolyFit:
    """An interpolated polynomial plus the diagnostics of its construction."""

    poly: MultiPoly
    grid_condition: float
    holdout_residual: float


def _default_fbar_grids(cfg: SpectralConfig, n: int) -> list[np.ndarray]:
    return [lambda_grid(cfg.L, slot=i, nslots=n) for i in range(n)]


def extract_fbar(sampler: FnSampler, grids: list[np.ndarray] | None = None) -> PolyFit:
    """Polynomial part of F_n in the variables x_i = e^{2 lambda_i}.

    Samples the overlap on a tensor grid of rapidities (one disjoint node
    set per variable), multiplies off the prefactor e^{(L-1) lambda_i} per
    variable, and interpolates at per-variable degree L-1.  A fresh random
    point validates the fit; its relative error is returned alongside the
    largest per-axis Vandermonde condition number.
    """
    cfg = sampler.cfg
    n = sampler.eig.sector
    if n == 0:
        val = complex(sampler.eig.left[0])
        return PolyFit(MultiPoly(np.array(val)), 1.0, 0.0)
    if grids is None:
        grids = _default_fbar_grids(cfg, n)
    xgrids = [np.exp(2 * g) for g in grids]
    vals = np.zeros((cfg.L,) * n, dtype=complex)
    for tup in iproduct(range(cfg.L), repeat=n):
        lams = [grids[i][tup[i]] for i in range(n)]
        vals[tup] = np.exp((cfg.L - 1) * sum(lams)) * sampler.value(lams)
    coeffs = tensor_interpolate(vals, xgrids)
    poly = MultiPoly(coeffs)

    rng = cfg.rng("fbar-holdout")
    test = [random_complex(rng) for _ in range(n)]
    direct = np.exp((cfg.L - 1) * sum(test)) * sampler.value(test)
    fitted = poly.eval_many(np.exp(2 * np.array([test])))[0]
    holdout = abs(direct - fitted) / max(abs(direct), poly.max_abs(), 1e-300)
    cond = max(grid_condition(xg) for xg in xgrids)
    return PolyFit(poly, cond, float(holdout))


def lambda_bar_coefficients(
    eigs, cfg: SpectralConfig, nodes: np.ndarray | None = None
) -> np.ndarray:
    """Coefficients of Lambda_bar(x0) = Lambda(lam0) e^{L lam0} as a degree-L
    polynomial in x0 = e^{2 lam0}, for one eigenpair or a list of them.

    The transfer matrix at each node is built once and shared across all the
    requested eigenpairs.
    """
    single = isinstance(eigs, EigenChoice)
    eig_list = [eigs] if single else list(eigs)
    if nodes is None:
        nodes = circle_grid(cfg.L + 1, slot=0, nslots=1)
    values = np.zeros((len(eig_list), len(nodes)), dtype=complex)
    for j, lam0 in enumerate(nodes):
        t = transfer(lam0, cfg).entries
        for i, eig in enumerate(eig_list):
            val = (eig.left @ t @ eig.right) / (eig.left @ eig.right)
            values[i, j] = val * np.exp(cfg.L * lam0)
    coeffs = tensor_interpolate(values, [np.exp(2 * np.asarray(nodes))])
    return coeffs[0] if single else coeffs
