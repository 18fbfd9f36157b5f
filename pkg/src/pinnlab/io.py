"""Flat text formats: CSV tables, network checkpoints, key = value configs."""

from __future__ import annotations

import csv
import math
from dataclasses import fields
from pathlib import Path

import numpy as np

from .jets import Mlp

SCHEMAS = {
    "perturbation": ("delta", "d_lu", "d_lf", "d_total", "bound", "ratio"),
    "concentration": ("n_f", "trial", "l_f"),
    "concentration_agg": ("n_f", "mean", "std"),
    "generalization": ("n_f", "seed", "l_s", "c0_error"),
    "history": ("iter", "L_u", "L_f", "L_pinn", "l1_data", "l1_residual", "S_theta", "L_s", "c0_error"),
}

INT_COLUMNS = {"n_f", "trial", "seed", "iter"}


class SchemaError(ValueError):
    pass


def format_value(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.12g}"


def _row_values(row, schema):
    if isinstance(row, dict):
        missing = [c for c in schema if c not in row]
        if missing:
            raise SchemaError(f"row is missing columns {missing}")
        return [row[c] for c in schema]
    if hasattr(row, "__dataclass_fields__"):
        names = {f.name for f in fields(row)}
        missing = [c for c in schema if c not in names]
        if missing:
            raise SchemaError(f"{type(row).__name__} lacks columns {missing}")
        return [getattr(row, c) for c in schema]
    values = list(row)
    if len(values) != len(schema):
        raise SchemaError(f"row has {len(values)} fields, schema has {len(schema)}")
    return values


def write_csv(rows, schema, path) -> Path:
    """Write ``rows`` under a header matching ``schema`` (a name in SCHEMAS or a column tuple).

    Floats get 12 significant digits; line endings are LF.
    """
    columns = SCHEMAS[schema] if isinstance(schema, str) else tuple(schema)
    path = Path(path)
    lines = [[format_value(v) for v in _row_values(r, columns)] for r in rows]
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(lines)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_csv(path):
    """Parse a CSV written by :func:`write_csv` into a list of dicts."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: int(v) if k in INT_COLUMNS else float(v) for k, v in rec.items()}
                for rec in reader]


# Checkpoint format:
#   line 1: "mlp <activation> <n0> <n1> ... <nL>"
#   then, per layer: fan_in lines of the weight matrix (row-major, fan_out
#   values each) followed by one line holding the bias vector.
def save_checkpoint(net: Mlp, path) -> Path:
    path = Path(path)
    out = ["mlp " + net.activation + " " + " ".join(str(s) for s in net.layer_sizes)]
    for W, b in zip(net.weights, net.biases):
        out.extend(" ".join(repr(float(v)) for v in row) for row in W)
        out.append(" ".join(repr(float(v)) for v in b))
    path.write_text("\n".join(out) + "\n")
    return path


def load_checkpoint(path) -> Mlp:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) < 4 or head[0] != "mlp":
        raise ValueError(f"{path}:1: not a checkpoint header")
    sizes = [int(s) for s in head[2:]]
    weights, biases, k = [], [], 1
    for a, b in zip(sizes[:-1], sizes[1:]):
        if k + a >= len(lines):
            raise ValueError(f"{path}: truncated checkpoint for sizes {sizes}")
        W = np.array([[float(v) for v in lines[k + i].split()] for i in range(a)])
        bias = np.array([float(v) for v in lines[k + a].split()])
        if W.shape != (a, b) or bias.shape != (b,):
            raise ValueError(f"{path}:{k + 1}: layer block does not match sizes {sizes}")
        weights.append(W)
        biases.append(bias)
        k += a + 1
    return Mlp.from_layers(weights, biases, head[1])


class ConfigError(ValueError):
    pass


def parse_config_text(text: str, known: dict, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment.

    ``known`` maps each accepted key to a converter.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _convert(key, value, known, f"{source}:{lineno}")
    return out


def parse_overrides(pairs, known: dict) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r}: expected key=value")
        key, value = (s.strip() for s in pair.split("=", 1))
        out[key] = _convert(key, value, known, f"override {pair!r}")
    return out


def _convert(key, value, known, where):
    if key not in known:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        converted = known[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
    if isinstance(converted, float) and not math.isfinite(converted):
        raise ConfigError(f"{where}: value for {key!r} must be finite")
    return converted


def write_keyvalue(mapping: dict, path) -> Path:
    path = Path(path)
    path.write_text("".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                            for k, v in mapping.items()))
    return path


def read_keyvalue(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = (s.strip() for s in line.split("=", 1))
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out
