"""Distance measures deciding cell membership and steal ownership.

All measures compare D(p, site) - w_site.  Divergences are taken in the
first argument, which keeps every bisector a hyperplane: the generator
value at p cancels when two sites are compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

# Positive-orthant generators get their cells clipped at this floor so the
# sampler never leaves the generator's domain.
BREGMAN_DOMAIN_MIN = 1e-9


@dataclass(frozen=True)
class DistanceMeasure:
    """A Bregman comparison rule defined by its convex generator.

    `phi` maps (..., d) arrays to (...,) values; `grad` maps them to
    (..., d) gradients.  `positive_domain` marks generators defined only on
    the strictly positive orthant.
    """

    name: str
    phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    grad: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    positive_domain: bool = False

    def in_domain(self, points) -> bool:
        if not self.positive_domain:
            return True
        return bool(np.all(np.asarray(points, dtype=float) > 0.0))

    def check_domain(self, points) -> None:
        if not self.in_domain(points):
            raise DomainError(
                f"{self.name} requires strictly positive coordinates")

    def distance(self, p, q) -> float:
        """Divergence from p to q: phi(p) - phi(q) - <grad phi(q), p - q>."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        self.check_domain(p)
        self.check_domain(q)
        g = self.grad(q)
        return float(self.phi(p) - self.phi(q) - g @ (p - q))

    def site_linear_form(self, sites: np.ndarray, weights: np.ndarray):
        """Linear scores for ownership queries.

        Returns (G, c) with D(y, site_j) - w_j = phi(y) + c_j - G_j . y;
        the shared phi(y) term never affects an argmin over sites.
        """
        sites = np.asarray(sites, dtype=float)
        self.check_domain(sites)
        G = self.grad(sites)
        c = -self.phi(sites) + np.einsum("kd,kd->k", G, sites) - weights
        return G, c

    def domain_halfspaces(self, d: int):
        """Extra cell faces enforcing the generator domain, as (A, b) rows."""
        if not self.positive_domain:
            return np.zeros((0, d)), np.zeros(0)
        return -np.eye(d), np.full(d, -BREGMAN_DOMAIN_MIN)


# generators as module-level functions so measures pickle across processes
def _sq_phi(p):
    return np.sum(np.square(p), axis=-1)


def _sq_grad(p):
    return 2.0 * np.asarray(p, dtype=float)


def _kl_phi(p):
    return np.sum(p * np.log(p) - p, axis=-1)


def _is_phi(p):
    return -np.sum(np.log(p), axis=-1)


def _is_grad(p):
    return -1.0 / np.asarray(p, dtype=float)


def squared_euclidean() -> DistanceMeasure:
    """Squared Euclidean distance; with weights this is the power-diagram rule."""
    return DistanceMeasure(name="squared-euclidean", phi=_sq_phi, grad=_sq_grad)


def generalized_kl() -> DistanceMeasure:
    """Generalized Kullback-Leibler divergence, phi(p) = sum p log p - p."""
    return DistanceMeasure(name="generalized-kl", phi=_kl_phi, grad=np.log,
                           positive_domain=True)


def itakura_saito() -> DistanceMeasure:
    """Itakura-Saito divergence, phi(p) = -sum log p."""
    return DistanceMeasure(name="itakura-saito", phi=_is_phi, grad=_is_grad,
                           positive_domain=True)


_BY_NAME = {
    "sqeuclidean": squared_euclidean,
    "squared-euclidean": squared_euclidean,
    "kl": generalized_kl,
    "generalized-kl": generalized_kl,
    "itakura-saito": itakura_saito,
}


def measure_by_name(name: str) -> DistanceMeasure:
    try:
        return _BY_NAME[name]()
    except KeyError:
        raise DomainError(f"unknown measure {name!r}; choose from {sorted(_BY_NAME)}") from None
