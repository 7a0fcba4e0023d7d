"""Stochastic engine: exact event simulation over integer populations.

This is the agent-based side of the package, realized as a continuous-time
Markov birth-death process: the agents of each population carry no state
beyond being alive (plus, under the frozen-at-birth policy, a death rate
remembered from creation), so cohort counts are distribution-equivalent to
one object per agent and scale far better.

Models compile to a :class:`ChannelSet` of event channels (name, rate law,
integer state delta).  ``simulate_exact`` runs the Gillespie direct method;
``simulate_tau_leap`` is the approximate fixed-step alternative for large
populations.  Extinction floors ("keep tumour >= 1", "keep both >= 1") are
implemented in the exact engine by zeroing the rate of any channel whose
delta would drop a floored population below its floor, which is
distributionally equivalent to vetoing and redrawing such events.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, EngineError, ModelDomainError, PopulationCapError
from .models import GrowthKind, GrowthLaw, KuznetsovParams, PopulationState
from .trajectory import Paradigm, Termination, Trajectory

__all__ = [
    "RateLaw",
    "Channel",
    "ChannelSet",
    "RatePolicy",
    "Floors",
    "Ensemble",
    "EnsembleSpec",
    "growth_channels",
    "kuznetsov_channels",
    "simulate_exact",
    "simulate_tau_leap",
    "run_ensemble",
    "POPULATION_CAP",
    "DEFAULT_MAX_EVENTS",
    "DEFAULT_REPS",
]

#: Hard ceiling on any discrete population; beyond it the run is infeasible
#: (the blow-up laws reach astronomically many agents) and fails cleanly.
POPULATION_CAP = 10**12

#: Safety budget on events per exact run, so runaway configurations fail
#: instead of looping for hours.
DEFAULT_MAX_EVENTS = 50_000_000

#: Replicates per ensemble unless asked otherwise.
DEFAULT_REPS = 50


class RatePolicy(enum.Enum):
    LIVE = "live"
    FROZEN_AT_BIRTH = "frozen"


@dataclass(frozen=True)
class RateLaw:
    """A parametric channel rate, one of the closed set of forms the kernels
    understand.  Calling it evaluates the rate at a state (T, E)."""

    code: int
    c: float
    e: float = 0.0
    g: float = 0.0

    def __post_init__(self) -> None:
        if self.code not in (kernels.R_CONST, kernels.R_POW_T, kernels.R_TLOGT,
                             kernels.R_LIN_E, kernels.R_MASS_TE, kernels.R_MM_TE):
            raise ModelDomainError(f"unknown rate-law code {self.code}")
        if not math.isfinite(self.c) or self.c < 0:
            raise ModelDomainError(f"rate coefficient must be finite and >= 0, got {self.c!r}")
        if self.code == kernels.R_MM_TE and self.g <= 0:
            raise ModelDomainError("saturating rate needs g > 0")

    def __call__(self, T: float, E: float = 0.0) -> float:
        code = self.code
        if code == kernels.R_POW_T:
            return self.c * T if self.e == 1.0 else self.c * math.pow(T, self.e)
        if code == kernels.R_MASS_TE:
            return self.c * T * E
        if code == kernels.R_MM_TE:
            return self.c * T * E / (self.g + T)
        if code == kernels.R_LIN_E:
            return self.c * E
        if code == kernels.R_TLOGT:
            return self.c * T * math.log(T) if T > 0.0 else 0.0
        return self.c


@dataclass(frozen=True)
class Channel:
    """One event channel: a rate law plus the integer jump it applies."""

    name: str
    rate: RateLaw
    delta: tuple[int, int]  # (dT, dE)


@dataclass(frozen=True)
class ChannelSet:
    """The compiled event channels of a model.

    ``law`` / ``params`` record which model produced the set; the
    frozen-at-birth policy needs the one-equation law to re-derive per-agent
    death rates.
    """

    channels: tuple[Channel, ...]
    species: tuple[str, ...]
    law: GrowthLaw | None = None
    params: KuznetsovParams | None = None

    @property
    def two_species(self) -> bool:
        return len(self.species) == 2

    def tables(self) -> tuple[list, list, list, list, list, list]:
        codes = [ch.rate.code for ch in self.channels]
        coefs = [ch.rate.c for ch in self.channels]
        expos = [ch.rate.e for ch in self.channels]
        sats = [ch.rate.g for ch in self.channels]
        d_t = [ch.delta[0] for ch in self.channels]
        d_e = [ch.delta[1] for ch in self.channels]
        return codes, coefs, expos, sats, d_t, d_e


@dataclass(frozen=True)
class Floors:
    """Extinction floors: 0 = none, 1 = never drop below one individual.

    (0, 0) is the plain model, (1, 0) keeps the tumour alive, (1, 1) keeps
    both populations alive.
    """

    min_tumour: int = 0
    min_effector: int = 0

    def __post_init__(self) -> None:
        if self.min_tumour not in (0, 1) or self.min_effector not in (0, 1):
            raise ConfigError(f"floors must be 0 or 1, got {self}")

    @classmethod
    def from_fix(cls, fix: str) -> "Floors":
        table = {"none": cls(0, 0), "tumour": cls(1, 0), "both": cls(1, 1)}
        try:
            return table[fix]
        except KeyError:
            raise ConfigError(f"fix must be one of {sorted(table)}, got {fix!r}") from None


def growth_channels(law: GrowthLaw) -> ChannelSet:
    """Compile a one-equation law to its two channels.

    Total birth rate is T*p(T) and total death rate T*d(T): power laws give
    a*T**(alpha+1) and b*T**(beta+1); Gompertz gives a*T and b*T*ln(T).
    """
    if law.kind is GrowthKind.GOMPERTZ:
        birth = RateLaw(kernels.R_POW_T, law.a, e=1.0)
        death = RateLaw(kernels.R_TLOGT, law.b)
    else:
        birth = RateLaw(kernels.R_POW_T, law.a, e=law.alpha + 1.0)
        death = RateLaw(kernels.R_POW_T, law.b, e=law.beta + 1.0)
    return ChannelSet(
        channels=(
            Channel("tumour birth", birth, (1, 0)),
            Channel("tumour death", death, (-1, 0)),
        ),
        species=("tumour",),
        law=law,
    )


def kuznetsov_channels(params: KuznetsovParams) -> ChannelSet:
    """Compile the tumour-effector system to its seven channels."""
    return ChannelSet(
        channels=(
            Channel("tumour birth", RateLaw(kernels.R_POW_T, params.a, e=1.0), (1, 0)),
            Channel("tumour intrinsic death", RateLaw(kernels.R_POW_T, params.a * params.b, e=2.0), (-1, 0)),
            Channel("tumour kill", RateLaw(kernels.R_MASS_TE, params.n), (-1, 0)),
            Channel("effector proliferation", RateLaw(kernels.R_MM_TE, params.p, g=params.g), (0, 1)),
            Channel("effector interaction death", RateLaw(kernels.R_MASS_TE, params.m), (0, -1)),
            Channel("effector apoptosis", RateLaw(kernels.R_LIN_E, params.d), (0, -1)),
            Channel("effector influx", RateLaw(kernels.R_CONST, params.s), (0, 1)),
        ),
        species=("tumour", "effector"),
        params=params,
    )


@dataclass(frozen=True)
class Ensemble:
    """Replicated stochastic trajectories with seed provenance.

    Replicate i runs with seed ``base_seed + i``.
    """

    replicates: tuple[Trajectory, ...]
    base_seed: int

    def __post_init__(self) -> None:
        if len(self.replicates) < 1:
            raise EngineError("an ensemble needs at least one replicate")

    def __len__(self) -> int:
        return len(self.replicates)


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything one stochastic run needs, minus the seed."""

    channels: ChannelSet
    initial: PopulationState
    t_end: float
    policy: RatePolicy = RatePolicy.LIVE
    floors: Floors = field(default_factory=Floors)
    method: str = "exact"  # "exact" | "tau"
    dt: float | None = None  # leap step, required for "tau"

    def __post_init__(self) -> None:
        if self.method not in ("exact", "tau"):
            raise ConfigError(f"method must be 'exact' or 'tau', got {self.method!r}")
        if self.method == "tau" and not (self.dt and self.dt > 0):
            raise ConfigError("tau-leaping needs a positive dt")


def _check_initial(channels: ChannelSet, initial: PopulationState, floors: Floors) -> tuple[int, int]:
    T = initial.T
    if T != int(T):
        raise ConfigError(f"stochastic runs need integer populations, got T={T!r}")
    if channels.two_species:
        if initial.E is None:
            raise ConfigError("this channel set has two species; the initial state needs E")
        E = initial.E
        if E != int(E):
            raise ConfigError(f"stochastic runs need integer populations, got E={E!r}")
    else:
        if initial.E is not None:
            raise ConfigError("this channel set has one species; E must be None")
        E = 0.0
    if int(T) < floors.min_tumour or int(E) < floors.min_effector:
        raise ConfigError(f"initial state {initial} is below the floors {floors}")
    if T > POPULATION_CAP or E > POPULATION_CAP:
        raise PopulationCapError(
            f"initial state {initial} exceeds the {POPULATION_CAP:.0e} population cap"
        )
    return int(T), int(E)


def _raise_for_status(status: int, seed: int, max_events: int, last: str = "") -> Termination:
    if status == kernels.ST_CAP:
        raise PopulationCapError(
            f"population exceeded the hard cap of {POPULATION_CAP:.0e} agents (seed {seed}); "
            "this configuration is infeasible for discrete simulation"
        )
    if status == kernels.ST_MAX_EVENTS:
        raise EngineError(
            f"event budget of {max_events} exhausted (seed {seed}){last}; "
            "raise max_events, or use tau-leaping for blow-up-scale growth "
            f"(the {POPULATION_CAP:.0e} population cap still applies)"
        )
    if status == kernels.ST_NEG_RATE:
        raise EngineError("a channel rate evaluated negative: model bug")
    return Termination.EXTINCT if status == kernels.ST_EXTINCT else Termination.COMPLETED


def simulate_exact(
    channels: ChannelSet,
    initial: PopulationState,
    t_end: float,
    seed: int,
    policy: RatePolicy = RatePolicy.LIVE,
    floors: Floors = Floors(),
    max_events: int = DEFAULT_MAX_EVENTS,
    replicate: int | None = None,
) -> Trajectory:
    """Gillespie direct method: exponential waiting times from the total
    rate, channel choice proportional to rate, one sample per event plus the
    final hold at ``t_end``."""
    if not (math.isfinite(t_end) and t_end > 0):
        raise ConfigError(f"t_end must be finite and > 0, got {t_end!r}")
    T0, E0 = _check_initial(channels, initial, floors)

    if policy is RatePolicy.FROZEN_AT_BIRTH:
        law = channels.law
        if law is None:
            raise ConfigError("the frozen-at-birth policy applies to one-equation growth models only")
        if law.kind is GrowthKind.GOMPERTZ:
            birth_c, birth_e = law.a, 1.0
            death_log, death_c, death_e = True, law.b, 0.0
        else:
            birth_c, birth_e = law.a, law.alpha + 1.0
            death_log, death_c, death_e = False, law.b, law.beta
        times, t_vals, status = kernels.ssa_frozen(
            birth_c, birth_e, death_log, death_c, death_e,
            T0, t_end, seed, floors.min_tumour, float(POPULATION_CAP), max_events,
        )
        states = np.asarray(t_vals, dtype=float).reshape(-1, 1)
    else:
        codes, coefs, expos, sats, d_t, d_e = channels.tables()
        times, t_vals, e_vals, status = kernels.ssa(
            codes, coefs, expos, sats, d_t, d_e, channels.two_species,
            T0, E0, t_end, seed, floors.min_tumour, floors.min_effector,
            float(POPULATION_CAP), max_events,
        )
        if channels.two_species:
            states = np.column_stack([np.asarray(t_vals, dtype=float), np.asarray(e_vals, dtype=float)])
        else:
            states = np.asarray(t_vals, dtype=float).reshape(-1, 1)

    last = f" at t={times[-1]:.3g} with population {t_vals[-1]:.4g}" if len(times) else ""
    termination = _raise_for_status(status, seed, max_events, last)
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=states,
        species=channels.species,
        termination=termination,
        paradigm=Paradigm.ABS,
        replicate=replicate,
        seed=seed,
    )


def simulate_tau_leap(
    channels: ChannelSet,
    initial: PopulationState,
    t_end: float,
    dt: float,
    seed: int,
    policy: RatePolicy = RatePolicy.LIVE,
    floors: Floors = Floors(),
    replicate: int | None = None,
) -> Trajectory:
    """Poisson tau-leaping over fixed steps of ``dt``; any component pushed
    below its floor is clamped to the floor."""
    if not (math.isfinite(t_end) and t_end > 0):
        raise ConfigError(f"t_end must be finite and > 0, got {t_end!r}")
    if not (math.isfinite(dt) and 0 < dt <= t_end):
        raise ConfigError(f"need 0 < dt <= t_end, got dt={dt!r}")
    if policy is not RatePolicy.LIVE:
        raise ConfigError("tau-leaping supports the live rate policy only")
    T0, E0 = _check_initial(channels, initial, floors)
    codes, coefs, expos, sats, d_t, d_e = channels.tables()
    times, t_vals, e_vals, status = kernels.tau_leap(
        codes, coefs, expos, sats, d_t, d_e, channels.two_species,
        T0, E0, t_end, dt, seed, floors.min_tumour, floors.min_effector,
        float(POPULATION_CAP),
    )
    if channels.two_species:
        states = np.column_stack([np.asarray(t_vals, dtype=float), np.asarray(e_vals, dtype=float)])
    else:
        states = np.asarray(t_vals, dtype=float).reshape(-1, 1)
    termination = _raise_for_status(status, seed, 0)
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=states,
        species=channels.species,
        termination=termination,
        paradigm=Paradigm.ABS,
        replicate=replicate,
        seed=seed,
    )


def run_ensemble(spec: EnsembleSpec, reps: int = DEFAULT_REPS, base_seed: int = 0) -> Ensemble:
    """``reps`` independent replicates seeded ``base_seed + 0 .. reps-1``.

    Replicates are independent (they could run concurrently); results are
    ordered by replicate index either way.
    """
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    out = []
    for i in range(reps):
        seed = base_seed + i
        try:
            if spec.method == "tau":
                traj = simulate_tau_leap(
                    spec.channels, spec.initial, spec.t_end, spec.dt, seed,
                    policy=spec.policy, floors=spec.floors, replicate=i,
                )
            else:
                traj = simulate_exact(
                    spec.channels, spec.initial, spec.t_end, seed,
                    policy=spec.policy, floors=spec.floors, replicate=i,
                )
        except EngineError as exc:
            raise type(exc)(f"replicate {i} (seed {seed}): {exc}") from exc
        out.append(traj)
    return Ensemble(replicates=tuple(out), base_seed=base_seed)
