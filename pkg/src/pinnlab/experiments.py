"""Training and the three validation studies: perturbation, concentration, generalization."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds
from .jets import AdamState, Mlp, NumericError, adam_step, init_net, mlp_forward, value_and_gradient
from .loss import PinnObjective, c0_error, physics_loss, pinn_loss, sobolev_loss
from .pde import boundary_set, operator_constant, sample_collocation, sine_jet

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# stream ids under the master seed
STREAM_INIT = 0
STREAM_COLLOC = 1

DEFAULT_DELTAS = tuple(np.logspace(-3, -1, 20))
DEFAULT_CONC_GRID = (20, 50, 100, 200)
DEFAULT_GEN_GRID = (10, 20, 40, 80, 120, 160, 200)
# nets in the generalization study are fitted to the Sobolev loss they are scored on
GEN_OBJECTIVE = "sobolev"


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream_id: int) -> int:
    """SplitMix64 finalizer of ``master + (stream_id + 1) * golden`` (mod 2^64).

    The finalizer is a bijection on 64-bit words, so distinct stream ids under
    one master seed never collide.
    """
    return _mix64((master_seed + (stream_id + 1) * GOLDEN) & MASK64)


@dataclass(frozen=True)
class TrainConfig:
    layer_sizes: tuple = (1, 32, 32, 1)
    lr: float = 1e-3
    max_iters: int = 10000
    N_f: int = 100
    lam: float = 1.0
    seed: int = 0
    perturb_frequency: int = 1
    objective: str = "pinn"
    log_every: int = 100

    def __post_init__(self):
        if self.max_iters < 1 or self.N_f < 1 or self.log_every < 1:
            raise ValueError("iteration and sample counts must be positive")
        if not self.lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.perturb_frequency < 1:
            raise ValueError("perturb_frequency must be a positive integer")
        if self.objective not in ("pinn", "sobolev"):
            raise ValueError(f"objective must be 'pinn' or 'sobolev', got {self.objective!r}")

    @property
    def C(self) -> float:
        return operator_constant(self.perturb_frequency)


def training_sets(cfg: TrainConfig):
    """The fixed full-batch collocation set and Dirichlet data used for training."""
    colloc = sample_collocation(cfg.N_f, derive_seed(cfg.seed, STREAM_COLLOC))
    return colloc, boundary_set()


class TrainingError(NumericError):
    def __init__(self, iteration, value):
        super().__init__(f"training diverged at iteration {iteration}: {value}")
        self.iteration = iteration


def train_pinn(cfg: TrainConfig):
    """Full-batch Adam on a fixed collocation set.

    Returns the trained net and a history of ``(iteration, LossReport)`` taken
    every ``cfg.log_every`` iterations and at the final one.
    """
    net = init_net(derive_seed(cfg.seed, STREAM_INIT), cfg.layer_sizes)
    colloc, data = training_sets(cfg)
    objective = PinnObjective(colloc, data, cfg.lam, cfg.objective)
    state = AdamState.zeros(net.n_params, cfg.lr)
    history = []
    for it in range(cfg.max_iters + 1):
        if it % cfg.log_every == 0 or it == cfg.max_iters:
            history.append((it, pinn_loss(net, colloc, data, cfg.lam, cfg.C)))
        if it == cfg.max_iters:
            break
        try:
            _, grads = value_and_gradient(net, objective)
        except NumericError as exc:
            raise TrainingError(it, str(exc)) from exc
        state, net = adam_step(state, net, grads)
    return net, history


@dataclass(frozen=True)
class PerturbationRow:
    delta: float
    d_lu: float
    d_lf: float
    d_total: float
    bound: float
    ratio: float
    bound_lu: float = 0.0
    bound_lf: float = 0.0


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_loglog_slope(points) -> SlopeFit:
    """Ordinary least squares of ln(y) on ln(x)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, y) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("log-log fit needs strictly positive finite values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), min(1.0, max(0.0, r2)), len(pts))


def perturbation_study(net: Mlp, cfg: TrainConfig, delta_grid=DEFAULT_DELTAS):
    """Exact loss changes under ``delta * sin(k pi x)`` added to the network output."""
    deltas = [float(d) for d in delta_grid]
    if any(d < 0 for d in deltas) or deltas != sorted(deltas):
        raise ValueError("delta grid must be non-negative and sorted")
    colloc, data = training_sets(cfg)
    C, lam, k = cfg.C, cfg.lam, cfg.perturb_frequency
    base = pinn_loss(net, colloc, data, lam, C)
    rows = []
    for d in deltas:
        def perturbed(x, d=d):
            return mlp_forward(net, x) + d * sine_jet(x, k)

        pert = pinn_loss(perturbed, colloc, data, lam, C)
        d_lu = abs(pert.L_u - base.L_u)
        d_lf = abs(pert.L_f - base.L_f)
        d_total = abs(pert.L_pinn - base.L_pinn)
        bound = bounds.combined_bound(d, base.S_theta, lam, C)
        rows.append(PerturbationRow(
            delta=d,
            d_lu=d_lu,
            d_lf=d_lf,
            d_total=d_total,
            bound=bound,
            ratio=d_total / bound if bound > 0 else 0.0,
            bound_lu=bounds.data_perturb_bound(d, base.l1_data),
            bound_lf=bounds.physics_perturb_bound(d, base.l1_residual, C),
        ))
    return rows, base


@dataclass(frozen=True)
class ConcentrationRow:
    n_f: int
    trial: int
    l_f: float


@dataclass(frozen=True)
class ConcentrationAgg:
    n_f: int
    mean: float
    std: float


def concentration_study(net: Mlp, master_seed: int, nf_grid=DEFAULT_CONC_GRID, trials: int = 50):
    """Spread of L_f over independent resamplings of the collocation set."""
    if trials < 2:
        raise ValueError("need at least two trials for a sample standard deviation")
    if not nf_grid or any(n < 1 for n in nf_grid):
        raise ValueError("N_f grid must hold positive counts")
    rows, agg = [], []
    for n_f in nf_grid:
        cell_seed = derive_seed(master_seed, int(n_f))
        values = []
        for t in range(trials):
            colloc = sample_collocation(int(n_f), derive_seed(cell_seed, t))
            values.append(physics_loss(net, colloc))
            rows.append(ConcentrationRow(int(n_f), t, values[-1]))
        values = np.array(values)
        agg.append(ConcentrationAgg(int(n_f), float(values.mean()), float(values.std(ddof=1))))
    fit = fit_loglog_slope([(a.n_f, a.std) for a in agg])
    return rows, agg, fit


@dataclass(frozen=True)
class GeneralizationRow:
    n_f: int
    seed: int
    l_s: float
    c0_error: float
    initial_l_pinn: float = float("nan")
    final_l_pinn: float = float("nan")


def _generalization_cell(args):
    cfg, n_f, s = args
    cell = replace(cfg, N_f=n_f, seed=derive_seed(derive_seed(cfg.seed, n_f), s))
    try:
        net, hist = train_pinn(cell)
    except NumericError as exc:
        log.warning("cell N_f=%d seed=%d failed: %s", n_f, s, exc)
        return None
    colloc, data = training_sets(cell)
    return GeneralizationRow(
        n_f=n_f,
        seed=s,
        l_s=sobolev_loss(net, colloc, data, cell.lam),
        c0_error=c0_error(net),
        initial_l_pinn=hist[0][1].L_pinn,
        final_l_pinn=hist[-1][1].L_pinn,
    )


def generalization_study(cfg: TrainConfig, nf_grid=DEFAULT_GEN_GRID, seeds_per_nf: int = 3,
                         workers: int = 1, objective: str | None = GEN_OBJECTIVE):
    """Train one net per (N_f, seed) cell; fit log C0 error against log L_s.

    ``objective`` replaces ``cfg.objective`` for every cell unless it is None.
    Cells are independent and keyed by (N_f, seed), so the rows do not depend
    on ``workers``.  Failed cells are logged and dropped.
    """
    if objective is not None:
        cfg = replace(cfg, objective=objective)
    if seeds_per_nf < 1:
        raise ValueError("seeds_per_nf must be at least 1")
    if not nf_grid or any(n < 1 for n in nf_grid):
        raise ValueError("N_f grid must hold positive counts")
    jobs = [(cfg, int(n), s) for n in nf_grid for s in range(seeds_per_nf)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_generalization_cell, jobs))
    else:
        results = [_generalization_cell(j) for j in jobs]
    rows = [r for r in results if r is not None]
    if len(rows) < 2:
        raise NumericError(f"only {len(rows)} of {len(jobs)} cells trained; cannot fit a slope")
    fit = fit_loglog_slope([(r.l_s, r.c0_error) for r in rows])
    return rows, fit
