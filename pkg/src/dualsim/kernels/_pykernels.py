"""Pure-Python simulation kernels.

Same call signatures and status codes as the compiled backend in
``_ckernels``; this module is the fallback selected at import time when the
extension is unavailable (or when DUALSIM_FORCE_PURE is set).  The loops are
written for speed under CPython: bound locals, flat floats, no per-event
allocation beyond the output samples.

Status codes (shared with the compiled backend):
    0 OK, 1 BLOWUP, 2 EXTINCT, 3 CAP, 4 MAX_EVENTS, 5 NEG_RATE, 6 STEP_FAIL

Rate-law codes for the channel-table simulators:
    0 CONST      rate = c
    1 POW_T      rate = c * T**e
    2 TLOGT      rate = c * T * ln(T)   (0 at T = 0)
    3 LIN_E      rate = c * E
    4 MASS_TE    rate = c * T * E
    5 MM_TE      rate = c * T * E / (g + T)

RNG identity of this backend: ``random.Random`` (CPython's MT19937), one
generator per run seeded with the run's seed; draws are consumed as
(waiting time, channel selection) per event.  Per-seed streams are stable,
but they intentionally differ from the compiled backend's generator.
"""

from __future__ import annotations

import math
from random import Random

_INF = math.inf

_MAX_HALVINGS = 40  # per micro-step, before giving up on positivity
_REL_UNDERSHOOT_TOL = 1e-12


def _pow(x: float, e: float) -> float:
    # Fast paths are exact, which keeps equivalent rate formulations
    # (e.g. frozen cohorts vs live channels) bitwise identical.
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.0:
        return 1.0
    try:
        return math.pow(x, e)
    except OverflowError:
        return _INF


def _sample_targets(t_end: float, sample_every: float) -> list[float]:
    n = int(math.floor(t_end / sample_every + 1e-9))
    targets = [min(k * sample_every, t_end) for k in range(1, n + 1)]
    if not targets or t_end - targets[-1] > 1e-9 * max(1.0, t_end):
        targets.append(t_end)
    return targets


# ---------------------------------------------------------------------------
# deterministic fixed-step integration (classic 4th-order Runge-Kutta)
# ---------------------------------------------------------------------------

def _f_growth(kind: int, a: float, b: float, ea: float, eb: float, T: float) -> float:
    # total rate dT/dt; ea = alpha + 1, eb = beta + 1
    if T <= 0.0:
        return 0.0
    if kind == 0:
        return a * _pow(T, ea) - b * _pow(T, eb)
    return a * T - b * T * math.log(T)


def rk4_growth(kind, a, b, alpha, beta, T0, dt, t_end, sample_every, blowup):
    """Integrate a one-equation growth law. Returns (times, values, status)."""
    ea = alpha + 1.0
    eb = beta + 1.0
    T = float(T0)
    t = 0.0
    times = [0.0]
    values = [T]
    for target in _sample_targets(t_end, sample_every):
        while t < target - 1e-12:
            h = dt if t + dt <= target else target - t
            halvings = 0
            while True:
                k1 = _f_growth(kind, a, b, ea, eb, T)
                k2 = _f_growth(kind, a, b, ea, eb, T + 0.5 * h * k1)
                k3 = _f_growth(kind, a, b, ea, eb, T + 0.5 * h * k2)
                k4 = _f_growth(kind, a, b, ea, eb, T + h * k3)
                Tn = T + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                tol = _REL_UNDERSHOOT_TOL * (T if T > 1.0 else 1.0)
                if -tol <= Tn <= blowup:  # false for nan, inf, big, undershoot
                    break
                # nan can only come from overflow (negative stages evaluate
                # to rate 0), so it classifies as a blow-up too
                if Tn != Tn or Tn > blowup:
                    return times, values, 1
                # genuine undershoot: retry with a locally halved step
                halvings += 1
                if halvings > _MAX_HALVINGS:
                    return times, values, 6
                h *= 0.5
            T = Tn if Tn > 0.0 else 0.0
            t += h
        t = target
        times.append(t)
        values.append(T)
    return times, values, 0


def rk4_kuznetsov(a, b, g, m, n, p, d, s, T0, E0, dt, t_end, sample_every, blowup):
    """Integrate the tumour-effector system. Returns (times, T, E, status)."""
    T = float(T0)
    E = float(E0)
    t = 0.0
    times = [0.0]
    Ts = [T]
    Es = [E]
    for target in _sample_targets(t_end, sample_every):
        while t < target - 1e-12:
            h = dt if t + dt <= target else target - t
            halvings = 0
            while True:
                kT1 = a * T * (1.0 - b * T) - n * T * E
                kE1 = p * T * E / (g + T) - m * T * E - d * E + s
                T2 = T + 0.5 * h * kT1
                E2 = E + 0.5 * h * kE1
                kT2 = a * T2 * (1.0 - b * T2) - n * T2 * E2
                kE2 = p * T2 * E2 / (g + T2) - m * T2 * E2 - d * E2 + s
                T3 = T + 0.5 * h * kT2
                E3 = E + 0.5 * h * kE2
                kT3 = a * T3 * (1.0 - b * T3) - n * T3 * E3
                kE3 = p * T3 * E3 / (g + T3) - m * T3 * E3 - d * E3 + s
                T4 = T + h * kT3
                E4 = E + h * kE3
                kT4 = a * T4 * (1.0 - b * T4) - n * T4 * E4
                kE4 = p * T4 * E4 / (g + T4) - m * T4 * E4 - d * E4 + s
                Tn = T + (h / 6.0) * (kT1 + 2.0 * kT2 + 2.0 * kT3 + kT4)
                En = E + (h / 6.0) * (kE1 + 2.0 * kE2 + 2.0 * kE3 + kE4)
                tolT = _REL_UNDERSHOOT_TOL * (T if T > 1.0 else 1.0)
                tolE = _REL_UNDERSHOOT_TOL * (E if E > 1.0 else 1.0)
                if -tolT <= Tn <= blowup and -tolE <= En <= blowup:
                    break
                if Tn != Tn or En != En or Tn > blowup or En > blowup:
                    return times, Ts, Es, 1
                halvings += 1
                if halvings > _MAX_HALVINGS:
                    return times, Ts, Es, 6
                h *= 0.5
            T = Tn if Tn > 0.0 else 0.0
            E = En if En > 0.0 else 0.0
            t += h
        t = target
        times.append(t)
        Ts.append(T)
        Es.append(E)
    return times, Ts, Es, 0


# ---------------------------------------------------------------------------
# exact stochastic simulation (Gillespie direct method)
# ---------------------------------------------------------------------------

def ssa(codes, coefs, expos, sats, d_t, d_e, two_species, T0, E0, t_end, seed,
        floor_t, floor_e, cap, max_events):
    """Event-driven simulation of a channel table over integer populations.

    A channel whose delta would push a floored population below its floor
    contributes rate 0.  Returns (times, T, E, status).
    """
    rng = Random(seed)
    rr = rng.random
    log = math.log
    nch = len(codes)
    codes = tuple(codes)
    coefs = tuple(coefs)
    expos = tuple(expos)
    sats = tuple(sats)
    d_t = tuple(d_t)
    d_e = tuple(d_e)
    rates = [0.0] * nch
    T = float(T0)
    E = float(E0)
    t = 0.0
    nev = 0
    times = [0.0]
    Ts = [T]
    Es = [E]
    while True:
        R = 0.0
        for i in range(nch):
            code = codes[i]
            c = coefs[i]
            if code == 1:
                e = expos[i]
                r = c * T if e == 1.0 else (c * T * T if e == 2.0 else c * _pow(T, e))
            elif code == 4:
                r = c * T * E
            elif code == 5:
                r = c * T * E / (sats[i] + T)
            elif code == 3:
                r = c * E
            elif code == 2:
                r = c * T * log(T) if T > 0.0 else 0.0
            else:
                r = c
            if r < 0.0:
                return times, Ts, Es, 5
            if T + d_t[i] < floor_t or E + d_e[i] < floor_e:
                r = 0.0
            rates[i] = r
            R += r
        if R <= 0.0:
            if t < t_end:
                times.append(t_end)
                Ts.append(T)
                Es.append(E)
            return times, Ts, Es, 2
        if R == _INF or R != R:
            return times, Ts, Es, 3
        t += -log(1.0 - rr()) / R
        if t >= t_end:
            times.append(t_end)
            Ts.append(T)
            Es.append(E)
            return times, Ts, Es, 0
        u = rr() * R
        acc = 0.0
        pick = nch - 1
        for i in range(nch):
            acc += rates[i]
            if u < acc:
                pick = i
                break
        T += d_t[pick]
        E += d_e[pick]
        nev += 1
        if T > cap or E > cap:
            return times, Ts, Es, 3
        times.append(t)
        Ts.append(T)
        Es.append(E)
        if nev >= max_events:
            return times, Ts, Es, 4

def ssa_frozen(birth_c, birth_e, death_log, death_c, death_e, T0, t_end, seed,
               floor_t, cap, max_events):
    """One-species exact simulation with death rates frozen at birth.

    Each agent's per-capita death rate is evaluated once, at the population
    size that includes the agent itself at its creation instant, and kept for
    life.  Agents sharing a frozen rate are held as one cohort, so the state
    is a (rate -> count) table rather than one object per agent.  The birth
    channel stays live.  Returns (times, T, status).
    """
    rng = Random(seed)
    rr = rng.random
    log = math.log
    T = float(T0)
    crates: list[float] = []
    ccounts: list[float] = []
    if T > 0.0:
        d0 = death_c * log(T) if death_log else death_c * _pow(T, death_e)
        crates.append(d0)
        ccounts.append(T)
    t = 0.0
    nev = 0
    times = [0.0]
    Ts = [T]
    while True:
        B = birth_c * T if birth_e == 1.0 else birth_c * _pow(T, birth_e)
        if B < 0.0:
            return times, Ts, 5
        D = 0.0
        ncoh = len(crates)
        for i in range(ncoh):
            D += crates[i] * ccounts[i]
        if D < 0.0:
            return times, Ts, 5
        if T - 1.0 < floor_t:
            D = 0.0
        R = B + D
        if R <= 0.0:
            if t < t_end:
                times.append(t_end)
                Ts.append(T)
            return times, Ts, 2
        if R == _INF or R != R:
            return times, Ts, 3
        t += -log(1.0 - rr()) / R
        if t >= t_end:
            times.append(t_end)
            Ts.append(T)
            return times, Ts, 0
        u = rr() * R
        if u < B:
            T += 1.0
            dnew = death_c * log(T) if death_log else death_c * _pow(T, death_e)
            for i in range(len(crates)):
                if crates[i] == dnew:
                    ccounts[i] += 1.0
                    break
            else:
                crates.append(dnew)
                ccounts.append(1.0)
        else:
            u -= B
            acc = 0.0
            for i in range(len(crates)):
                acc += crates[i] * ccounts[i]
                if u < acc:
                    ccounts[i] -= 1.0
                    if ccounts[i] <= 0.0:
                        del ccounts[i]
                        del crates[i]
                    break
            T -= 1.0
        nev += 1
        if T > cap:
            return times, Ts, 3
        times.append(t)
        Ts.append(T)
        if nev >= max_events:
            return times, Ts, 4


# ---------------------------------------------------------------------------
# approximate stochastic simulation (Poisson tau-leaping)
# ---------------------------------------------------------------------------

def _poisson(rng: Random, lam: float) -> int:
    # Knuth's product method for small means, a rounded normal beyond; the
    # large-mean branch only matters for blow-up detection, not statistics.
    if lam < 30.0:
        L = math.exp(-lam)
        k = 0
        prod = rng.random()
        while prod > L:
            k += 1
            prod *= rng.random()
        return k
    u1 = 1.0 - rng.random()
    u2 = rng.random()
    z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    k = int(math.floor(lam + math.sqrt(lam) * z + 0.5))
    return k if k > 0 else 0


def tau_leap(codes, coefs, expos, sats, d_t, d_e, two_species, T0, E0, t_end, dt,
             seed, floor_t, floor_e, cap):
    """Fixed-step leaping: each channel fires Poisson(rate*dt) times per step,
    deltas apply simultaneously, components below their floor clamp to it.
    Returns (times, T, E, status)."""
    rng = Random(seed)
    log = math.log
    nch = len(codes)
    codes = tuple(codes)
    coefs = tuple(coefs)
    expos = tuple(expos)
    sats = tuple(sats)
    d_t = tuple(d_t)
    d_e = tuple(d_e)
    rates = [0.0] * nch
    T = float(T0)
    E = float(E0)
    t = 0.0
    times = [0.0]
    Ts = [T]
    Es = [E]
    while t < t_end - 1e-12:
        if T > cap or E > cap:
            return times, Ts, Es, 3
        h = dt if t + dt <= t_end else t_end - t
        R = 0.0
        for i in range(nch):
            code = codes[i]
            c = coefs[i]
            if code == 1:
                e = expos[i]
                r = c * T if e == 1.0 else (c * T * T if e == 2.0 else c * _pow(T, e))
            elif code == 4:
                r = c * T * E
            elif code == 5:
                r = c * T * E / (sats[i] + T)
            elif code == 3:
                r = c * E
            elif code == 2:
                r = c * T * log(T) if T > 0.0 else 0.0
            else:
                r = c
            if r < 0.0:
                return times, Ts, Es, 5
            rates[i] = r
            R += r
        if R <= 0.0:
            if t < t_end:
                times.append(t_end)
                Ts.append(T)
                Es.append(E)
            return times, Ts, Es, 2
        if R == _INF or R != R:
            return times, Ts, Es, 3
        nT = T
        nE = E
        for i in range(nch):
            lam = rates[i] * h
            if lam > 0.0:
                k = _poisson(rng, lam)
                if k:
                    nT += d_t[i] * k
                    nE += d_e[i] * k
        if nT < floor_t:
            nT = float(floor_t)
        if nE < floor_e:
            nE = float(floor_e)
        if nT > cap or nE > cap:
            return times, Ts, Es, 3
        t = t + h if t + h < t_end - 1e-12 else t_end
        T = nT
        E = nE
        times.append(t)
        Ts.append(T)
        Es.append(E)
    return times, Ts, Es, 0
