"""Integration over axis-aligned boxes.

Two rules are available:

* ``"adaptive"``: global adaptive bisection.  Every cell carries a tensor
  Gauss-Kronrod 7/15 estimate; the cell with the largest ``|K15 - G7|`` is
  split along its widest axis until the summed error estimate meets
  ``max(abs_tol, rel_tol * |value|)`` or ``max_subdivisions`` cells exist.
* ``"gauss"``: one tensor Gauss-Legendre rule of the given order over the
  whole box; the error estimate is the difference to the rule two orders
  lower.

Cell contributions are summed with :func:`math.fsum` in a fixed cell order,
so results depend only on integrand values, not on evaluation history.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import QuadratureError
from .expr import Expr, evaluate_many

# Gauss-Kronrod 7/15 on [-1, 1] (standard QUADPACK qk15 constants)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _gk_rule():
    nodes = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    wk = np.concatenate([_WGK[:-1], _WGK[::-1]])
    wg = np.zeros(15)
    # Gauss nodes are the odd-indexed Kronrod nodes (xgk[1], xgk[3], ...)
    gauss_w = {1: _WG[0], 3: _WG[1], 5: _WG[2], 7: _WG[3]}
    for i, x in enumerate(nodes):
        j = int(np.argmin(np.abs(_XGK - abs(x))))
        if j in gauss_w:
            wg[i] = gauss_w[j]
    return nodes, wk, wg


GK_NODES, GK_WK, GK_WG = _gk_rule()

Integrand = Union[Expr, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration box plus rule and tolerances."""

    box: tuple[tuple[float, float], ...]
    rule: str = "adaptive"
    order: int = 8
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        object.__setattr__(self, "box", box)
        if not box:
            raise ValueError("quadrature box needs at least one axis")
        for lo, hi in box:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("quadrature box must be finite; truncate the tails")
            if not lo < hi:
                raise ValueError(f"quadrature axis needs lo < hi, got [{lo}, {hi}]")
        if self.rule not in ("adaptive", "gauss"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.order < 3:
            raise ValueError("Gauss order must be at least 3")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    @property
    def arity(self) -> int:
        return len(self.box)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.box]))

    def tolerance(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    @staticmethod
    def from_dict(d: dict) -> "QuadratureSpec":
        allowed = {"box", "rule", "order", "rel_tol", "abs_tol", "max_subdivisions"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown quadrature keys: {sorted(unknown)}")
        if "box" not in d:
            raise ValueError("quadrature spec needs a 'box'")
        return QuadratureSpec(box=tuple(tuple(b) for b in d["box"]),
                              **{k: v for k, v in d.items() if k != "box"})


@dataclass
class QuadResult:
    value: float
    error: float
    converged: bool
    cells: int = 1
    evaluations: int = 0
    notes: list = field(default_factory=list)

    def __float__(self) -> float:
        return self.value


def as_callable(f: Integrand, arity: int) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, Expr):
        need = max(f.variables(), default=-1) + 1
        if need > arity:
            raise ValueError(f"integrand uses {need} variables, box has {arity}")
        return lambda pts: evaluate_many(f, pts)
    return f


def _tensor(nodes_1d: np.ndarray, weights: Sequence[np.ndarray], p: int):
    grids = np.array(list(itertools.product(range(len(nodes_1d)), repeat=p)))
    pts = nodes_1d[grids]  # (m, p) on [-1,1]^p
    ws = [np.prod(w[grids], axis=1) for w in weights]
    return pts, ws


class _CellRule:
    def __init__(self, p: int):
        self.p = p
        self.pts, (self.wk, self.wg) = _tensor(GK_NODES, [GK_WK, GK_WG], p)

    def apply(self, fn, los: np.ndarray, his: np.ndarray):
        """K and G estimates for a batch of cells (arrays of shape (c, p))."""
        half = (his - los) / 2.0
        mid = (his + los) / 2.0
        c = los.shape[0]
        m = self.pts.shape[0]
        pts = mid[:, None, :] + half[:, None, :] * self.pts[None, :, :]
        vals = np.asarray(fn(pts.reshape(c * m, self.p)), dtype=float).reshape(c, m)
        jac = np.prod(half, axis=1)
        k = (vals @ self.wk) * jac
        g = (vals @ self.wg) * jac
        return k, g, c * m


_RULES: dict[int, _CellRule] = {}


def _rule(p: int) -> _CellRule:
    r = _RULES.get(p)
    if r is None:
        r = _RULES[p] = _CellRule(p)
    return r


def integrate(f: Integrand, spec: QuadratureSpec, strict: bool = False) -> QuadResult:
    """Integral of ``f`` over ``spec.box``.

    ``f`` is an :class:`Expr` or a vectorised callable on ``(m, p)`` point
    arrays.  Non-convergence is reported in the result; ``strict=True``
    raises :class:`QuadratureError` instead.
    """
    fn = as_callable(f, spec.arity)
    if spec.rule == "gauss":
        res = _gauss(fn, spec)
    else:
        res = _adaptive(fn, spec)
    if not np.isfinite(res.value):
        raise QuadratureError("integral is not finite")
    if strict and not res.converged:
        raise QuadratureError(
            f"quadrature did not converge: estimate {res.value:.12g} "
            f"+/- {res.error:.3g} after {res.cells} cells"
        )
    return res


def _gauss(fn, spec: QuadratureSpec) -> QuadResult:
    p = spec.arity
    lo = np.array([b[0] for b in spec.box])
    hi = np.array([b[1] for b in spec.box])
    vals = []
    evals = 0
    for q in (spec.order, spec.order - 2):
        x, w = np.polynomial.legendre.leggauss(q)
        pts, (ws,) = _tensor(x, [w], p)
        mapped = (hi + lo) / 2.0 + (hi - lo) / 2.0 * pts
        v = np.asarray(fn(mapped), dtype=float)
        evals += len(v)
        vals.append(float(np.dot(v, ws)) * float(np.prod((hi - lo) / 2.0)))
    err = abs(vals[0] - vals[1])
    return QuadResult(vals[0], err, err <= spec.tolerance(vals[0]), 1, evals)


def _adaptive(fn, spec: QuadratureSpec) -> QuadResult:
    p = spec.arity
    rule = _rule(p)
    lo0 = np.array([[b[0] for b in spec.box]])
    hi0 = np.array([[b[1] for b in spec.box]])
    k, g, evals = rule.apply(fn, lo0, hi0)
    # heap of (-err, tiebreak, lo, hi, K)
    counter = itertools.count()
    cells = [(-abs(k[0] - g[0]), next(counter), tuple(lo0[0]), tuple(hi0[0]), float(k[0]))]
    total_err = abs(k[0] - g[0])
    while True:
        value = math.fsum(c[4] for c in cells)
        total_err = math.fsum(-c[0] for c in cells)
        if total_err <= spec.tolerance(value) or not np.isfinite(total_err):
            break
        if len(cells) >= spec.max_subdivisions:
            break
        # split the worst cells that together hold half of the error
        heapq.heapify(cells)
        batch = []
        acc = 0.0
        budget = spec.max_subdivisions - len(cells)
        while cells and len(batch) < max(1, min(budget, 64)):
            c = heapq.heappop(cells)
            batch.append(c)
            acc += -c[0]
            if acc >= 0.5 * total_err:
                break
        los, his = [], []
        for _, _, lo, hi, _ in batch:
            lo = np.array(lo)
            hi = np.array(hi)
            ax = int(np.argmax(hi - lo))
            midp = 0.5 * (lo[ax] + hi[ax])
            hi_left = hi.copy()
            hi_left[ax] = midp
            lo_right = lo.copy()
            lo_right[ax] = midp
            los += [lo, lo_right]
            his += [hi_left, hi]
        los_a, his_a = np.array(los), np.array(his)
        kk, gg, ne = rule.apply(fn, los_a, his_a)
        evals += ne
        for i in range(len(los)):
            cells.append((-abs(kk[i] - gg[i]), next(counter), tuple(los_a[i]), tuple(his_a[i]),
                          float(kk[i])))
    # deterministic final sum: order cells by their lower corner
    ordered = sorted(cells, key=lambda c: (c[2], c[3]))
    value = math.fsum(c[4] for c in ordered)
    total_err = math.fsum(-c[0] for c in ordered)
    converged = bool(total_err <= spec.tolerance(value))
    return QuadResult(value, total_err, converged, len(cells), evals)


def cumulative_integral(fn, xs, x0: float, abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                        max_rounds: int = 40):
    """``int_{x0}^{x_i} fn(t) dt`` for every ``x_i`` (1-d, vector valued).

    ``fn`` maps a 1-d array of nodes to an array of shape ``(nodes,)`` or
    ``(nodes, c)``.  The breakpoints ``{x_i} u {x0}`` split the line into
    segments; each segment is refined by bisection until its G7/K15
    difference is below ``max(abs_tol * len/span, rel_tol * |K|)``.
    Returns ``(values, error)`` with ``values`` shaped like ``fn``'s output
    per point.
    """
    xs = np.asarray(xs, dtype=float).reshape(-1)
    bps = np.unique(np.concatenate([xs, [float(x0)]]))
    span = max(bps[-1] - bps[0], 1e-300)
    nseg = len(bps) - 1
    probe = np.asarray(fn(np.array([float(x0)])), dtype=float)
    shape = probe.shape[1:]
    seg_val = np.zeros((nseg,) + shape)
    seg_err = np.zeros(nseg)
    # work list: (segment id, lo, hi)
    ids = np.arange(nseg)
    los = bps[:-1].copy()
    his = bps[1:].copy()
    rounds = 0
    while len(ids):
        half = (his - los) / 2.0
        mid = (his + los) / 2.0
        nodes = (mid[:, None] + half[:, None] * GK_NODES[None, :]).reshape(-1)
        vals = np.asarray(fn(nodes), dtype=float).reshape((len(ids), len(GK_NODES)) + shape)
        k = np.tensordot(GK_WK, vals, axes=(0, 1)) * half.reshape((-1,) + (1,) * len(shape))
        g = np.tensordot(GK_WG, vals, axes=(0, 1)) * half.reshape((-1,) + (1,) * len(shape))
        diff = np.abs(k - g)
        err = diff.reshape(len(ids), -1).max(axis=1) if shape else diff
        mag = np.abs(k).reshape(len(ids), -1).max(axis=1) if shape else np.abs(k)
        tol = np.maximum(abs_tol * (his - los) / span, rel_tol * mag)
        ok = (err <= tol) | (rounds >= max_rounds)
        np.add.at(seg_val, ids[ok], k[ok])
        np.add.at(seg_err, ids[ok], err[ok])
        bad = ~ok
        ids = np.repeat(ids[bad], 2)
        lo_b, hi_b, mid_b = los[bad], his[bad], mid[bad]
        los = np.column_stack([lo_b, mid_b]).reshape(-1)
        his = np.column_stack([mid_b, hi_b]).reshape(-1)
        rounds += 1
    j0 = int(np.searchsorted(bps, x0))
    cum = np.zeros((len(bps),) + shape)
    if j0 < nseg:
        cum[j0 + 1:] = np.cumsum(seg_val[j0:], axis=0)
    if j0 > 0:
        cum[:j0] = -np.cumsum(seg_val[:j0][::-1], axis=0)[::-1]
    idx = np.searchsorted(bps, xs)
    return cum[idx], float(seg_err.sum())
