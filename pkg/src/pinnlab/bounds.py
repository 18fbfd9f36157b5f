"""Closed-form perturbation, concentration and generalization bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass


def _nonneg(name, value):
    if not value >= 0:
        raise ValueError(f"{name} must be non-negative, got {value}")


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def _count(name, value):
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")


def _confidence(value):
    if not 0 < value < 1:
        raise ValueError(f"confidence delta must lie in (0, 1), got {value}")


def data_perturb_bound(delta: float, l1_data: float) -> float:
    """Upper bound on |change in L_u| when the output moves by at most ``delta``."""
    _nonneg("delta", delta)
    _nonneg("l1_data", l1_data)
    return 2.0 * delta * l1_data + delta * delta


def physics_perturb_bound(delta: float, l1_residual: float, C: float) -> float:
    _nonneg("delta", delta)
    _nonneg("l1_residual", l1_residual)
    _positive("C", C)
    return 2.0 * C * delta * l1_residual + C * C * delta * delta


def combined_bound(delta: float, S_theta: float, lam: float, C: float) -> float:
    _nonneg("delta", delta)
    _nonneg("S_theta", S_theta)
    _nonneg("lambda", lam)
    _nonneg("C", C)
    return 2.0 * delta * S_theta + delta * delta * (1.0 + lam * C * C)


def admissible_delta(S_theta: float, lam: float, C: float, epsilon_tol: float) -> float:
    """CFL-type admissible perturbation amplitude for tolerance ``epsilon_tol``.

    Evaluates ``(-q + sqrt(q^2 + 8 S eps)) / (4 S)`` with ``q = 1 + lam C^2``
    in the cancellation-free form ``2 eps / (q + sqrt(q^2 + 8 S eps))``; at
    S = 0 this is the continuity limit ``eps / q``.

    Note this is the positive root of ``2 S d^2 + q d = eps``, not of the
    combined bound ``2 S d + q d^2 = eps``; :func:`tolerance_delta` gives the
    latter.
    """
    _positive("epsilon_tol", epsilon_tol)
    _nonneg("S_theta", S_theta)
    _nonneg("lambda", lam)
    q = 1.0 + lam * C * C
    return 2.0 * epsilon_tol / (q + math.sqrt(q * q + 8.0 * S_theta * epsilon_tol))


def tolerance_delta(S_theta: float, lam: float, C: float, epsilon_tol: float) -> float:
    """Positive root of ``combined_bound(d) = epsilon_tol``; ``sqrt(eps / q)`` at S = 0."""
    _positive("epsilon_tol", epsilon_tol)
    _nonneg("S_theta", S_theta)
    _nonneg("lambda", lam)
    q = 1.0 + lam * C * C
    return epsilon_tol / (S_theta + math.sqrt(S_theta * S_theta + q * epsilon_tol))


def first_order_dominated(delta: float, S_theta: float, lam: float, C: float) -> bool:
    """Whether the linear term 2 delta S dominates delta^2 (1 + lam C^2)."""
    return 2.0 * delta * S_theta >= delta * delta * (1.0 + lam * C * C)


def mcdiarmid_tail(epsilon: float, N_f: int, M: float) -> float:
    _nonneg("epsilon", epsilon)
    _count("N_f", N_f)
    _positive("M", M)
    return min(1.0, max(0.0, math.exp(-N_f * epsilon ** 2 / (8.0 * M ** 4))))


def min_samples(M: float, epsilon: float, confidence_delta: float) -> int:
    _positive("M", M)
    _positive("epsilon", epsilon)
    _confidence(confidence_delta)
    n = math.ceil(8.0 * M ** 4 / epsilon ** 2 * math.log(1.0 / confidence_delta))
    # guard against the ceil landing one short through rounding
    while mcdiarmid_tail(epsilon, max(n, 1), M) > confidence_delta:
        n += 1
    return max(n, 1)


def bounded_difference_constants(M_f, M_d, N_f, N_d, lam):
    _count("N_f", N_f)
    _count("N_d", N_d)
    _nonneg("M_f", M_f)
    _nonneg("M_d", M_d)
    return 4.0 * M_f ** 2 / N_f, 4.0 * lam * M_d ** 2 / N_d


def vector_deviation(N_f, N_d, M_f, M_d, lam, confidence_delta) -> float:
    _count("N_f", N_f)
    _count("N_d", N_d)
    _nonneg("M_f", M_f)
    _nonneg("M_d", M_d)
    _confidence(confidence_delta)
    var = 8.0 * M_f ** 4 / N_f + 8.0 * lam ** 2 * M_d ** 4 / N_d
    return math.sqrt(var * math.log(1.0 / confidence_delta))


def generalization_bound(L_s, N_f, N_d, confidence_delta, C_tilde=1.0) -> float:
    _nonneg("L_s", L_s)
    _count("N_f", N_f)
    _count("N_d", N_d)
    _confidence(confidence_delta)
    _positive("C_tilde", C_tilde)
    log_term = math.log(1.0 / confidence_delta)
    return C_tilde * math.sqrt(L_s + math.sqrt(log_term / N_f + log_term / N_d))


@dataclass(frozen=True)
class BoundConfig:
    C_tilde: float = 1.0
    s: int = 1
    d: int = 1
    alpha: float | None = None

    def __post_init__(self):
        if not self.s > self.d / 2:
            raise ValueError(f"Sobolev order s={self.s} must exceed d/2={self.d / 2}")
        _positive("C_tilde", self.C_tilde)


@dataclass(frozen=True)
class StabilityCertificate:
    S_theta: float
    C: float
    lam: float
    M_f: float
    M_d: float
    delta_max: float
    epsilon_tol: float
    delta_tol: float = float("nan")

    @classmethod
    def build(cls, S_theta, C, lam, M_f, M_d, epsilon_tol):
        return cls(S_theta, C, lam, M_f, M_d,
                   admissible_delta(S_theta, lam, C, epsilon_tol), epsilon_tol,
                   tolerance_delta(S_theta, lam, C, epsilon_tol))

    def as_dict(self) -> dict:
        return {
            "S_theta": self.S_theta,
            "C": self.C,
            "lambda": self.lam,
            "M_f": self.M_f,
            "M_d": self.M_d,
            "delta_max": self.delta_max,
            "epsilon": self.epsilon_tol,
            "delta_tol": self.delta_tol,
        }
