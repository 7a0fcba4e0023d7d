"""Deterministic engine: fixed-step ODE integration of the models.

This is the stock-and-flow side of the package: populations are continuous
stocks changed by the model's rate flows, integrated with the classic
fourth-order Runge-Kutta scheme.  Runs that would leave double range are cut
short and flagged as blow-ups instead of emitting non-finite samples; steps
that would undershoot zero are locally halved and tiny negative residues are
clamped, since the dynamics themselves preserve positivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, EngineError, ModelDomainError
from .models import GrowthKind, GrowthLaw, KuznetsovParams, PopulationState
from .trajectory import Paradigm, Termination, Trajectory

__all__ = ["IntegratorConfig", "integrate", "closed_form", "closed_form_log"]

#: Default integration step (days): resolves the fastest scenario rate
#: constant (1.636/day) by three orders of magnitude.
DEFAULT_DT = 0.001

#: Default output spacing (days).
DEFAULT_SAMPLE_EVERY = 0.1

#: Default horizon (days).
DEFAULT_T_END = 100.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration knobs.  Requires dt <= sample_every <= t_end."""

    dt: float = DEFAULT_DT
    t_end: float = DEFAULT_T_END
    sample_every: float = DEFAULT_SAMPLE_EVERY
    blowup_threshold: float = 1e300

    def __post_init__(self) -> None:
        for name in ("dt", "t_end", "sample_every", "blowup_threshold"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"IntegratorConfig.{name} must be finite and > 0, got {v!r}")
        if not (self.dt <= self.sample_every <= self.t_end):
            raise ConfigError(
                f"need dt <= sample_every <= t_end, got dt={self.dt}, "
                f"sample_every={self.sample_every}, t_end={self.t_end}"
            )


def integrate(
    model: GrowthLaw | KuznetsovParams,
    initial: PopulationState,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate a model from ``initial`` and sample on a uniform grid.

    If any component would exceed ``cfg.blowup_threshold`` the run stops at
    the last grid sample already emitted and the trajectory is flagged
    ``Termination.BLOWUP``.
    """
    cfg = cfg or IntegratorConfig()
    if isinstance(model, GrowthLaw):
        if initial.E is not None:
            raise ConfigError("one-equation models take a tumour-only initial state (E must be None)")
        if model.kind is GrowthKind.GOMPERTZ and initial.T <= 0:
            raise ConfigError("Gompertz growth needs T(0) > 0 (ln undefined at 0)")
        kind = 0 if model.kind is GrowthKind.POWER_LAW else 1
        times, values, status = kernels.rk4_growth(
            kind, model.a, model.b, model.alpha, model.beta,
            initial.T, cfg.dt, cfg.t_end, cfg.sample_every, cfg.blowup_threshold,
        )
        states = np.asarray(values, dtype=float).reshape(-1, 1)
        species: tuple[str, ...] = ("tumour",)
    elif isinstance(model, KuznetsovParams):
        if initial.E is None:
            raise ConfigError("the tumour-effector model needs an initial E (use PopulationState(T, E))")
        times, t_vals, e_vals, status = kernels.rk4_kuznetsov(
            model.a, model.b, model.g, model.m, model.n, model.p, model.d, model.s,
            initial.T, initial.E, cfg.dt, cfg.t_end, cfg.sample_every, cfg.blowup_threshold,
        )
        states = np.column_stack([np.asarray(t_vals, dtype=float), np.asarray(e_vals, dtype=float)])
        species = ("tumour", "effector")
    else:
        raise ConfigError(f"unsupported model type {type(model).__name__}")

    if status == kernels.ST_STEP_FAIL:
        raise EngineError("integration step kept undershooting zero after 40 local halvings")
    termination = Termination.BLOWUP if status == kernels.ST_BLOWUP else Termination.COMPLETED
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=states,
        species=species,
        termination=termination,
        paradigm=Paradigm.SDS,
    )


def closed_form(law: GrowthLaw, T0: float, t: float) -> float:
    """Analytic solution of the logistic or Gompertz law, in linear scale.

    Logistic (alpha=0, beta=1): T(t) = K*T0*e^(a t) / (K + T0*(e^(a t) - 1))
    with carrying capacity K = a/b.  Gompertz: exp of ``closed_form_log``;
    returns ``inf`` when the linear value overflows double range (use the
    log form for magnitude checks at that scale).  General power laws have
    no closed form here and raise.
    """
    if law.kind is GrowthKind.GOMPERTZ:
        try:
            return math.exp(closed_form_log(law, T0, t))
        except OverflowError:
            return math.inf
    if law.is_logistic:
        if T0 < 0:
            raise ModelDomainError(f"T0 must be >= 0, got {T0}")
        K = law.a / law.b
        # exp(a t) can overflow; the limit is K whenever T0 > 0
        try:
            g = math.exp(law.a * t)
        except OverflowError:
            return K if T0 > 0 else 0.0
        return K * T0 * g / (K + T0 * (g - 1.0))
    raise ModelDomainError("no closed form for general power laws (only the logistic preset and Gompertz)")


def closed_form_log(law: GrowthLaw, T0: float, t: float) -> float:
    """ln T(t) for the Gompertz law: ln T0 * e^(-b t) + (a/b)*(1 - e^(-b t)).

    Stays finite long after the linear value has overflowed (the asymptote
    is ln T = a/b).
    """
    if law.kind is not GrowthKind.GOMPERTZ:
        raise ModelDomainError("log-scale closed form is for the Gompertz law")
    if T0 <= 0:
        raise ModelDomainError(f"Gompertz needs T0 > 0, got {T0}")
    decay = math.exp(-law.b * t)
    return math.log(T0) * decay + (law.a / law.b) * (1.0 - decay)
