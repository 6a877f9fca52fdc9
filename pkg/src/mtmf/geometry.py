"""Inner product, norm and distance of MTMF representations.

    rho(f1, f2) = sum_{n in B1 n B2} int a_{n,1} a_{n,2} (g1 g2)^n / n! dx

over a finite quadrature box.  The inner product is a property of the
*representation*, not of the pointwise function: two representations of
the same function can have different norms.  Everything here is
representation-level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ArityError, MtmfError, RankDeficiencyError
from .quadrature import QuadratureSpec, integrate
from .taylor import (
    Coefficients,
    Mtmf,
    field_values,
    linear_combine,
)

RANK_THRESHOLD = 1e-10


@dataclass(frozen=True)
class InnerResult:
    value: float
    error: float
    converged: bool
    terms: list

    def __float__(self) -> float:
        return self.value


def _weighted_power(gg: np.ndarray, n: int) -> np.ndarray:
    """``gg^n / n!`` built factor by factor (no overflow of n!)."""
    w = np.ones_like(gg)
    for m in range(1, n + 1):
        w = w * (gg / m)
    return w


def inner_product_detail(f1: Mtmf, f2: Mtmf, quad: QuadratureSpec) -> InnerResult:
    """Inner product with per-term diagnostics."""
    if f1.arity != f2.arity:
        raise ArityError(f"arity mismatch: {f1.arity} vs {f2.arity}")
    if quad.arity != f1.arity:
        raise ArityError(f"quadrature box has {quad.arity} axes, functions have {f1.arity}")
    policy = f1.policy.merged(f2.policy)
    C = f1.effective_B().intersect(f2.effective_B())
    ns = C.first(policy.max_terms)
    finite = C.is_finite and len(ns) == len(C.first(policy.max_terms + 1))
    values, errors, terms = [], [], []
    converged = True
    small = 0
    for n in ns:
        def integrand(pts, n=n):
            prod = f1.a.values(n, pts) * f2.a.values(n, pts)
            gg = field_values(f1.g, pts) * field_values(f2.g, pts)
            return prod * _weighted_power(gg, n)

        res = integrate(integrand, quad)
        converged = converged and res.converged
        values.append(res.value)
        errors.append(res.error)
        terms.append(n)
        if not finite:
            small = small + 1 if abs(res.value) < policy.abs_tol else 0
            if small >= policy.consecutive_small:
                break
    else:
        if not finite:
            converged = False
    return InnerResult(math.fsum(values), math.fsum(errors), converged, terms)


def inner_product(f1: Mtmf, f2: Mtmf, quad: QuadratureSpec) -> float:
    """Representation-level inner product; symmetric bit for bit."""
    return inner_product_detail(f1, f2, quad).value


def norm(f: Mtmf, quad: QuadratureSpec) -> float:
    """``sqrt(rho(f, f))``.  A slightly negative radicand within the
    quadrature tolerance is read as 0; anything worse is an error."""
    r = inner_product_detail(f, f, quad)
    if r.value < 0:
        if -r.value <= max(quad.abs_tol, r.error) * 10:
            return 0.0
        raise MtmfError(f"negative squared norm {r.value:.3e} (quadrature noise?)")
    return math.sqrt(r.value)


def distance(f1: Mtmf, f2: Mtmf, quad: QuadratureSpec) -> float:
    """Norm of the canonical combination ``f1 - f2``."""
    return norm(linear_combine(1.0, f1, -1.0, f2), quad)


class _ScaledCoefficients(Coefficients):
    def __init__(self, base: Coefficients, c: float):
        self.base = base
        self.c = c
        self.length = base.length
        self.symbolic = False

    def at(self, n):
        from .taylor import NumericFunction

        return NumericFunction(lambda pts: self.values(n, pts), self.required_arity(), f"{self.c}*a[{n}]")

    def values(self, n, pts):
        return self.c * self.base.values(n, pts)

    def required_arity(self):
        return self.base.required_arity()


def scale(f: Mtmf, c: float) -> Mtmf:
    """``c f`` keeping ``B`` and ``g`` (only the coefficients are scaled)."""
    return replace(f, a=_ScaledCoefficients(f.a, float(c)))


def gram_schmidt(fs: Sequence[Mtmf], quad: QuadratureSpec) -> list[Mtmf]:
    """Orthonormalise with respect to ``rho`` (modified Gram-Schmidt).

    Raises :class:`RankDeficiencyError` naming the first input whose
    residual satisfies ``rho(v, v) / rho(f, f) < 1e-10``.
    """
    basis: list[Mtmf] = []
    for i, f in enumerate(fs):
        nf = norm(f, quad)
        if nf == 0.0:
            raise RankDeficiencyError(i, 0.0)
        v = f
        for e in basis:
            c = inner_product(v, e, quad)
            v = linear_combine(1.0, v, -c, e)
        nv = norm(v, quad)
        ratio = (nv / nf) ** 2
        if ratio < RANK_THRESHOLD:
            raise RankDeficiencyError(i, ratio)
        basis.append(scale(v, 1.0 / nv))
    return basis


@dataclass(frozen=True)
class Projection:
    coefficients: list
    residual: float


def project(f: Mtmf, basis: Sequence[Mtmf], quad: QuadratureSpec) -> Projection:
    """Coefficients ``c_i = rho(f, e_i)`` and ``||f - sum c_i e_i||``."""
    cs = [inner_product(f, e, quad) for e in basis]
    r = f
    for c, e in zip(cs, basis):
        r = linear_combine(1.0, r, -c, e)
    return Projection(cs, norm(r, quad))


def gram_matrix(fs: Sequence[Mtmf], quad: QuadratureSpec) -> np.ndarray:
    k = len(fs)
    G = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            G[i, j] = G[j, i] = inner_product(fs[i], fs[j], quad)
    return G
