"""The 1D Poisson benchmark: u'' = -pi^2 sin(pi x) on [0, 1], u(0) = u(1) = 0."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet3, jet_apply_unary, jet_lift, jet_scale

PI = np.pi


def forcing(x):
    return -PI ** 2 * np.sin(PI * x)


def exact_solution(x):
    return np.sin(PI * x)


def sine_jet(x, k: int = 1) -> Jet3:
    """Jet of ``sin(k pi x)``."""
    return jet_apply_unary("sin", jet_scale(jet_lift(x), k * PI))


def exact_jet(x) -> Jet3:
    return sine_jet(x, 1)


def operator_constant(k: int = 1) -> float:
    """sup |d^2/dx^2 sin(k pi x)| for the sinusoidal perturbation family."""
    return float((k * PI) ** 2)


@dataclass(frozen=True)
class Problem1D:
    domain: tuple = (0.0, 1.0)
    operator_order: int = 2
    perturb_frequency: int = 1
    boundary_points: tuple = (0.0, 1.0)
    boundary_values: tuple = (0.0, 0.0)

    @property
    def operator_constant_C(self) -> float:
        return operator_constant(self.perturb_frequency)

    forcing = staticmethod(forcing)
    exact = staticmethod(exact_solution)


POISSON = Problem1D()


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray
    seed: int | None = None
    distribution: str = "uniform_iid"

    def __len__(self):
        return len(self.points)


def residual(u_jet: Jet3, x):
    """Residual r = u'' + pi^2 sin(pi x) and its derivative r' = u''' + pi^3 cos(pi x)."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    r = u_jet.d2 + PI ** 2 * np.sin(PI * x)
    r_prime = u_jet.d3 + PI ** 3 * np.cos(PI * x)
    return r, r_prime


def sample_collocation(n: int, seed: int) -> SampleSet:
    """``n`` i.i.d. uniform points in the open interval (0, 1)."""
    if n < 1:
        raise ValueError(f"need at least one collocation point, got n={n}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=n)
    # numpy's uniform is [0, 1); 0.0 is possible in principle
    while np.any(pts <= 0.0):
        bad = pts <= 0.0
        pts[bad] = rng.uniform(0.0, 1.0, size=int(bad.sum()))
    return SampleSet(pts, seed)


def boundary_set():
    return [(0.0, 0.0), (1.0, 0.0)]


def as_field(model):
    """Anything mapping an array of inputs to a :class:`Jet3` (Mlp or callable)."""
    if not callable(model):
        raise TypeError(f"{model!r} is not evaluable on jets")
    return model


def estimate_sup_residual(model, grid_n: int = 1024) -> float:
    """Dense-grid estimate of sup |r| over [0, 1]."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    x = np.linspace(0.0, 1.0, grid_n)
    r, _ = residual(as_field(model)(x), x)
    return float(np.max(np.abs(r)))


def estimate_sup_data_error(model) -> float:
    """max |u(x) - g(x)| over the Dirichlet boundary points."""
    pts = np.array([p for p, _ in boundary_set()])
    vals = np.array([g for _, g in boundary_set()])
    u = as_field(model)(pts).v
    return float(np.max(np.abs(u - vals)))
