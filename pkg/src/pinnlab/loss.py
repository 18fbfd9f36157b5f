"""Empirical PINN losses, empirical l1 norms, sensitivity and C0 error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet3
from .pde import POISSON, SampleSet, as_field, exact_solution, residual

C0_GRID = np.linspace(0.0, 1.0, 100)


def _points(colloc) -> np.ndarray:
    pts = colloc.points if isinstance(colloc, SampleSet) else colloc
    pts = np.asarray(pts, dtype=float).ravel()
    if pts.size == 0:
        raise ValueError("collocation set is empty")
    return pts


def _data(data):
    if data is None or len(data) == 0:
        raise ValueError("data set is empty")
    if isinstance(data, tuple) and len(data) == 2 and np.ndim(data[0]) == 1:
        xs, ys = data
    else:
        xs, ys = zip(*data)
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def data_errors(model, data) -> np.ndarray:
    xs, ys = _data(data)
    return as_field(model)(xs).v - ys


def residuals(model, colloc):
    x = _points(colloc)
    return residual(as_field(model)(x), x)


def data_loss(model, data) -> float:
    e = data_errors(model, data)
    return float(np.mean(e * e))


def physics_loss(model, colloc) -> float:
    r, _ = residuals(model, colloc)
    return float(np.mean(r * r))


def empirical_l1_data(model, data) -> float:
    return float(np.mean(np.abs(data_errors(model, data))))


def empirical_l1_residual(model, colloc) -> float:
    r, _ = residuals(model, colloc)
    return float(np.mean(np.abs(r)))


def sobolev_loss(model, colloc, data=None, lam: float = 1.0) -> float:
    """Pointwise H^1 residual loss plus lambda-weighted data mismatch.

    ``data=None`` drops the data term.
    """
    r, rp = residuals(model, colloc)
    value = float(np.mean(r * r + rp * rp))
    if data is not None:
        e = data_errors(model, data)
        value += lam * float(np.mean(e * e))
    return value


def c0_error(model) -> float:
    """max |u(x) - sin(pi x)| over 100 uniformly spaced points of [0, 1]."""
    u = as_field(model)(C0_GRID).v
    return float(np.max(np.abs(u - exact_solution(C0_GRID))))


@dataclass(frozen=True)
class LossReport:
    L_u: float
    L_f: float
    L_pinn: float
    lam: float
    l1_data: float
    l1_residual: float
    S_theta: float
    L_s: float
    c0_error: float


def pinn_loss(model, colloc, data, lam: float = 1.0, C: float | None = None) -> LossReport:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    C = POISSON.operator_constant_C if C is None else C
    x = _points(colloc)
    r, rp = residual(as_field(model)(x), x)
    e = data_errors(model, data)
    L_u = float(np.mean(e * e))
    L_f = float(np.mean(r * r))
    l1_d = float(np.mean(np.abs(e)))
    l1_r = float(np.mean(np.abs(r)))
    return LossReport(
        L_u=L_u,
        L_f=L_f,
        L_pinn=L_u + lam * L_f,
        lam=lam,
        l1_data=l1_d,
        l1_residual=l1_r,
        S_theta=l1_d + lam * C * l1_r,
        L_s=float(np.mean(r * r + rp * rp)) + lam * L_u,
        c0_error=c0_error(model),
    )


class PinnObjective:
    """Training objective evaluated on one stacked batch of points.

    ``kind="pinn"`` is L_u + lam * L_f; ``kind="sobolev"`` is the Sobolev
    loss (residual and residual-derivative squares plus lam * L_u).
    """

    def __init__(self, colloc, data, lam: float = 1.0, kind: str = "pinn"):
        if kind not in ("pinn", "sobolev"):
            raise ValueError(f"unknown objective kind {kind!r}")
        self.colloc = _points(colloc)
        self.data_x, self.data_y = _data(data)
        self.lam = float(lam)
        self.kind = kind
        self.points = np.concatenate([self.colloc, self.data_x])

    def evaluate(self, jet: Jet3):
        nf = self.colloc.size
        nu = self.data_x.size
        u = np.asarray(jet.v)
        d2 = np.asarray(jet.d2)
        d3 = np.asarray(jet.d3)
        r, rp = residual(Jet3(u[:nf], 0.0, d2[:nf], d3[:nf]), self.colloc)
        e = u[nf:] - self.data_y
        n = self.points.size
        g0, g2, g3 = np.zeros(n), np.zeros(n), np.zeros(n)
        if self.kind == "pinn":
            value = np.mean(e * e) + self.lam * np.mean(r * r)
            g0[nf:] = 2.0 * e / nu
            g2[:nf] = self.lam * 2.0 * r / nf
        else:
            value = np.mean(r * r + rp * rp) + self.lam * np.mean(e * e)
            g0[nf:] = self.lam * 2.0 * e / nu
            g2[:nf] = 2.0 * r / nf
            g3[:nf] = 2.0 * rp / nf
        return float(value), (g0, None, g2, g3)

    def __call__(self, model) -> float:
        value, _ = self.evaluate(as_field(model)(self.points))
        return value
