"""Command line: ``pinnlab {train,certify,perturb,concentrate,generalize,report}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, experiments, io
from .experiments import TrainConfig
from .loss import pinn_loss
from .pde import estimate_sup_data_error, estimate_sup_residual
from .svg import write_svg_plot

log = logging.getLogger("pinnlab")

COMMANDS = ("train", "certify", "perturb", "concentrate", "generalize", "report")
CHECKPOINT = "model.ckpt"
TRAIN_CONFIG = "train_config.txt"


def _int_list(text):
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)


def _layer_sizes(text):
    sizes = _int_list(text)
    if len(sizes) < 2:
        raise ValueError("need at least input and output sizes")
    return sizes


CONFIG_KEYS = {
    "layer_sizes": _layer_sizes,
    "lr": float,
    "max_iters": int,
    "N_f": int,
    "lambda": float,
    "perturb_frequency": int,
    "objective": str,
    "seed": int,
    "epsilon": float,
    "delta_min": float,
    "delta_max": float,
    "delta_steps": int,
    "trials": int,
    "concentrate_nf_grid": _int_list,
    "generalize_nf_grid": _int_list,
    "seeds_per_nf": int,
    "generalize_objective": str,
    "workers": int,
}

DEFAULTS = {
    "seed": 0,
    "epsilon": 0.01,
    "delta_min": 1e-3,
    "delta_max": 1e-1,
    "delta_steps": 20,
    "trials": 50,
    "concentrate_nf_grid": experiments.DEFAULT_CONC_GRID,
    "generalize_nf_grid": experiments.DEFAULT_GEN_GRID,
    "seeds_per_nf": 3,
    "generalize_objective": experiments.GEN_OBJECTIVE,
    "workers": 1,
}

_TRAIN_FIELDS = {"layer_sizes": "layer_sizes", "lr": "lr", "max_iters": "max_iters", "N_f": "N_f",
                 "lambda": "lam", "perturb_frequency": "perturb_frequency",
                 "objective": "objective", "seed": "seed"}


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    out_dir: Path
    config_path: Path | None = None
    master_seed: int | None = None
    overrides: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def resolve(self):
        """Merge defaults, config file, overrides and flags (later wins)."""
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}")
        values = dict(DEFAULTS)
        if self.config_path is not None:
            path = Path(self.config_path)
            if not path.exists():
                raise CliError(f"config file not found: {path}")
            values.update(io.parse_config_text(path.read_text(), CONFIG_KEYS, str(path)))
        values.update(io.parse_overrides(self.overrides, CONFIG_KEYS))
        values.update({k: v for k, v in self.values.items() if v is not None})
        if self.master_seed is not None:
            values["seed"] = self.master_seed
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return values


def train_config_from(values) -> TrainConfig:
    kw = {attr: values[key] for key, attr in _TRAIN_FIELDS.items() if key in values}
    return TrainConfig(**kw)


def _saved_train_config(out_dir: Path) -> TrainConfig:
    path = out_dir / TRAIN_CONFIG
    if not path.exists():
        raise CliError(f"training config not found: {path} (run 'train' first)")
    return train_config_from(io.parse_config_text(path.read_text(), CONFIG_KEYS, str(path)))


def load_run(out_dir: Path):
    path = out_dir / CHECKPOINT
    if not path.exists():
        raise CliError(f"checkpoint not found: {path} (run 'train' first)")
    return io.load_checkpoint(path), _saved_train_config(out_dir)


def cmd_train(values, out: Path):
    cfg = train_config_from(values)
    net, history = experiments.train_pinn(cfg)
    io.save_checkpoint(net, out / CHECKPOINT)
    lines = [f"{key} = {','.join(map(str, v)) if isinstance(v, tuple) else v}"
             for key, attr in _TRAIN_FIELDS.items() for v in [getattr(cfg, attr)]]
    (out / TRAIN_CONFIG).write_text("\n".join(lines) + "\n")
    io.write_csv([{"iter": it, **asdict(r)} for it, r in history], "history", out / "history.csv")
    final = history[-1][1]
    print(f"trained {cfg.max_iters} iterations: L_pinn={final.L_pinn:.6g} c0_error={final.c0_error:.6g}")


def certificate(net, cfg: TrainConfig, epsilon: float) -> bounds.StabilityCertificate:
    colloc, data = experiments.training_sets(cfg)
    report = pinn_loss(net, colloc, data, cfg.lam, cfg.C)
    return bounds.StabilityCertificate.build(
        S_theta=report.S_theta,
        C=cfg.C,
        lam=cfg.lam,
        M_f=estimate_sup_residual(net),
        M_d=estimate_sup_data_error(net),
        epsilon_tol=epsilon,
    )


def cmd_certify(values, out: Path):
    net, cfg = load_run(out)
    cert = certificate(net, cfg, values["epsilon"])
    io.write_keyvalue(cert.as_dict(), out / "certificate.txt")
    print(f"delta_max = {cert.delta_max:.6g} for epsilon = {cert.epsilon_tol:g}")


def cmd_perturb(values, out: Path):
    net, cfg = load_run(out)
    if not 0 < values["delta_min"] <= values["delta_max"] or values["delta_steps"] < 1:
        raise CliError("need 0 < delta_min <= delta_max and delta_steps >= 1")
    grid = np.geomspace(values["delta_min"], values["delta_max"], values["delta_steps"])
    rows, _ = experiments.perturbation_study(net, cfg, grid)
    io.write_csv(rows, "perturbation", out / "perturbation.csv")
    write_svg_plot(
        [{"label": "measured |dL_PINN|", "x": [r.delta for r in rows], "y": [max(r.d_total, 1e-300) for r in rows]},
         {"label": "combined bound", "x": [r.delta for r in rows], "y": [r.bound for r in rows]}],
        "loglog", out / "perturbation.svg",
        title="Perturbation sensitivity", xlabel="delta", ylabel="loss change",
    )
    violations = sum(r.d_total > r.bound + 1e-12 for r in rows)
    print(f"{len(rows)} perturbation rows, {violations} bound violations")


def cmd_concentrate(values, out: Path):
    net, _ = load_run(out)
    rows, agg, fit = experiments.concentration_study(
        net, values["seed"], values["concentrate_nf_grid"], values["trials"])
    io.write_csv(rows, "concentration", out / "concentration.csv")
    io.write_csv(agg, "concentration_agg", out / "concentration_agg.csv")
    n = [a.n_f for a in agg]
    write_svg_plot(
        [{"label": "std of L_f", "x": n, "y": [a.std for a in agg]},
         {"label": "N_f^-1/2 reference", "x": n, "y": [agg[0].std * (n[0] / k) ** 0.5 for k in n]}],
        "loglog", out / "concentration.svg",
        title="Residual loss concentration", xlabel="N_f", ylabel="std",
    )
    print(f"std log-log slope {fit.slope:.4f} (r^2 {fit.r_squared:.3f})")


def cmd_generalize(values, out: Path):
    cfg = train_config_from(values)
    rows, fit = experiments.generalization_study(
        cfg, values["generalize_nf_grid"], values["seeds_per_nf"], values["workers"],
        values["generalize_objective"])
    io.write_csv(rows, "generalization", out / "generalization.csv")
    write_svg_plot(
        [{"label": "trained nets", "x": [r.l_s for r in rows], "y": [r.c0_error for r in rows],
          "markers_only": True}],
        "loglog", out / "generalization.svg",
        title="Sobolev loss vs C0 error", xlabel="L_s", ylabel="C0 error",
    )
    print(f"C0-vs-L_s log-log slope {fit.slope:.4f} over {len(rows)} nets")


def cmd_report(values, out: Path):
    from . import report

    path = report.write_report(out)
    print(f"wrote {path}")


HANDLERS = {
    "train": cmd_train,
    "certify": cmd_certify,
    "perturb": cmd_perturb,
    "concentrate": cmd_concentrate,
    "generalize": cmd_generalize,
    "report": cmd_report,
}


def run(cfg: RunConfig) -> int:
    try:
        values = cfg.resolve()
        HANDLERS[cfg.command](values, cfg.out_dir)
    except (CliError, ValueError, OSError, ArithmeticError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error: {' '.join(message.split())}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat 'key = value' config file")
    common.add_argument("--out", type=Path, help="output directory (default $PINNLAB_OUT or ./pinnlab_out)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="pinnlab", description="PINN stability bounds on the 1D Poisson benchmark")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("train", parents=[common], help="train the PINN and write a checkpoint")
    p = sub.add_parser("certify", parents=[common], help="write a stability certificate")
    p.add_argument("--epsilon", type=float)
    p = sub.add_parser("perturb", parents=[common], help="perturbation sweep against the bounds")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--delta-steps", type=int)
    p = sub.add_parser("concentrate", parents=[common], help="L_f spread under resampling")
    p.add_argument("--trials", type=int)
    p.add_argument("--nf-grid", type=_int_list)
    p = sub.add_parser("generalize", parents=[common], help="C0 error vs Sobolev loss across N_f")
    p.add_argument("--nf-grid", type=_int_list)
    p.add_argument("--workers", type=int)
    sub.add_parser("report", parents=[common], help="markdown summary and figures of all CSVs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out or Path(os.environ.get("PINNLAB_OUT", "pinnlab_out"))
    flags = {
        "epsilon": getattr(args, "epsilon", None),
        "delta_min": getattr(args, "delta_min", None),
        "delta_max": getattr(args, "delta_max", None),
        "delta_steps": getattr(args, "delta_steps", None),
        "trials": getattr(args, "trials", None),
        "workers": getattr(args, "workers", None),
        f"{args.command}_nf_grid": getattr(args, "nf_grid", None),
    }
    cfg = RunConfig(args.command, Path(out), args.config, args.seed, args.overrides, flags)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
