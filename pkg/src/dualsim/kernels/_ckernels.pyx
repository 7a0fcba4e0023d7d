# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels (Cython twin of ``_pykernels``).

Signatures, sampling contracts and status codes match the pure-Python
backend exactly; see that module's docstring for the codes.  This backend
draws randomness from xoshiro256** seeded via splitmix64, so event streams
are reproducible per seed but differ from the pure backend's streams.
"""

from cpython cimport array
from cpython.mem cimport PyMem_Malloc, PyMem_Realloc, PyMem_Free
from libc.math cimport log, exp, sqrt, cos, floor, pow, INFINITY, M_PI
from libc.stdint cimport uint64_t
from libc.string cimport memcpy

import array as _pyarray

cdef double _REL_UNDERSHOOT_TOL = 1e-12
cdef int _MAX_HALVINGS = 40
cdef int _MAX_CHANNELS = 16


# --------------------------------------------------------------------------
# RNG: splitmix64 -> xoshiro256**
# --------------------------------------------------------------------------

cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _sm64(uint64_t* st) noexcept nogil:
    st[0] = st[0] + <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = st[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline void _seed_state(uint64_t* s, uint64_t seed) noexcept nogil:
    cdef uint64_t st = seed
    cdef int i
    for i in range(4):
        s[i] = _sm64(&st)


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = _rotl(s[1] * <uint64_t>5, 7) * <uint64_t>9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _rnd(uint64_t* s) noexcept nogil:
    # uniform on [0, 1) with 53 random bits
    return <double>(_next(s) >> 11) * (1.0 / 9007199254740992.0)


cdef inline long _poisson(uint64_t* s, double lam) noexcept nogil:
    # Knuth product method for small means, rounded normal beyond (the
    # large-mean branch only matters for blow-up detection, not statistics).
    cdef double L, prod, u1, u2, z
    cdef long k
    if lam < 30.0:
        L = exp(-lam)
        k = 0
        prod = _rnd(s)
        while prod > L:
            k += 1
            prod *= _rnd(s)
        return k
    u1 = 1.0 - _rnd(s)
    u2 = _rnd(s)
    z = sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)
    k = <long>floor(lam + sqrt(lam) * z + 0.5)
    return k if k > 0 else 0


cdef inline uint64_t _as_u64(object seed):
    return <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)


# --------------------------------------------------------------------------
# growable output buffer -> array.array('d')
# --------------------------------------------------------------------------

cdef struct DBuf:
    double* data
    Py_ssize_t n
    Py_ssize_t cap


cdef inline int _dbuf_init(DBuf* b, Py_ssize_t cap0) except -1:
    b.data = <double*>PyMem_Malloc(cap0 * sizeof(double))
    if b.data == NULL:
        raise MemoryError()
    b.n = 0
    b.cap = cap0
    return 0


cdef inline int _dbuf_push(DBuf* b, double v) except -1:
    if b.n == b.cap:
        b.cap = b.cap * 2
        b.data = <double*>PyMem_Realloc(b.data, b.cap * sizeof(double))
        if b.data == NULL:
            raise MemoryError()
    b.data[b.n] = v
    b.n += 1
    return 0


cdef object _dbuf_take(DBuf* b):
    cdef array.array out = _pyarray.array('d', [])
    array.resize(out, b.n)
    if b.n > 0:
        memcpy(out.data.as_doubles, b.data, b.n * sizeof(double))
    PyMem_Free(b.data)
    b.data = NULL
    return out


cdef inline void _dbuf_free(DBuf* b) noexcept:
    if b.data != NULL:
        PyMem_Free(b.data)
        b.data = NULL


cdef inline double _powfast(double x, double e) noexcept nogil:
    # exact fast paths keep equivalent rate formulations bitwise identical
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.0:
        return 1.0
    return pow(x, e)


# --------------------------------------------------------------------------
# deterministic fixed-step integration (classic 4th-order Runge-Kutta)
# --------------------------------------------------------------------------

cdef inline double _f_growth(int kind, double a, double b, double ea, double eb,
                             double T) noexcept nogil:
    if T <= 0.0:
        return 0.0
    if kind == 0:
        return a * _powfast(T, ea) - b * _powfast(T, eb)
    return a * T - b * T * log(T)


def rk4_growth(int kind, double a, double b, double alpha, double beta,
               double T0, double dt, double t_end, double sample_every,
               double blowup):
    """Integrate a one-equation growth law. Returns (times, values, status)."""
    cdef double ea = alpha + 1.0
    cdef double eb = beta + 1.0
    cdef double T = T0
    cdef double t = 0.0
    cdef double h, target, k1, k2, k3, k4, Tn, tol
    cdef int halvings, status = 0
    cdef long n = <long>floor(t_end / sample_every + 1e-9)
    cdef long ntargets = n
    cdef bint extra = t_end - n * sample_every > 1e-9 * (t_end if t_end > 1.0 else 1.0)
    if n == 0 or extra:
        ntargets += 1
    cdef long kk
    cdef DBuf times, values
    _dbuf_init(&times, 4096)
    _dbuf_init(&values, 4096)
    _dbuf_push(&times, 0.0)
    _dbuf_push(&values, T)
    for kk in range(1, ntargets + 1):
        target = kk * sample_every if kk <= n else t_end
        if target > t_end:
            target = t_end
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
                if -tol <= Tn <= blowup:
                    break
                # nan can only come from overflow here, so it is a blow-up
                if Tn != Tn or Tn > blowup:
                    status = 1
                    break
                halvings += 1
                if halvings > _MAX_HALVINGS:
                    status = 6
                    break
                h *= 0.5
            if status != 0:
                return _dbuf_take(&times), _dbuf_take(&values), status
            T = Tn if Tn > 0.0 else 0.0
            t += h
        t = target
        _dbuf_push(&times, t)
        _dbuf_push(&values, T)
    return _dbuf_take(&times), _dbuf_take(&values), 0


def rk4_kuznetsov(double a, double b, double g, double m, double n, double p,
                  double d, double s, double T0, double E0, double dt,
                  double t_end, double sample_every, double blowup):
    """Integrate the tumour-effector system. Returns (times, T, E, status)."""
    cdef double T = T0
    cdef double E = E0
    cdef double t = 0.0
    cdef double h, target, Tn, En, tolT, tolE
    cdef double kT1, kE1, kT2, kE2, kT3, kE3, kT4, kE4, T2, E2, T3, E3, T4, E4
    cdef int halvings, status = 0
    cdef long ngrid = <long>floor(t_end / sample_every + 1e-9)
    cdef long ntargets = ngrid
    cdef bint extra = t_end - ngrid * sample_every > 1e-9 * (t_end if t_end > 1.0 else 1.0)
    if ngrid == 0 or extra:
        ntargets += 1
    cdef long kk
    cdef DBuf times, Ts, Es
    _dbuf_init(&times, 4096)
    _dbuf_init(&Ts, 4096)
    _dbuf_init(&Es, 4096)
    _dbuf_push(&times, 0.0)
    _dbuf_push(&Ts, T)
    _dbuf_push(&Es, E)
    for kk in range(1, ntargets + 1):
        target = kk * sample_every if kk <= ngrid else t_end
        if target > t_end:
            target = t_end
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
                    status = 1
                    break
                halvings += 1
                if halvings > _MAX_HALVINGS:
                    status = 6
                    break
                h *= 0.5
            if status != 0:
                return _dbuf_take(&times), _dbuf_take(&Ts), _dbuf_take(&Es), status
            T = Tn if Tn > 0.0 else 0.0
            E = En if En > 0.0 else 0.0
            t += h
        t = target
        _dbuf_push(&times, t)
        _dbuf_push(&Ts, T)
        _dbuf_push(&Es, E)
    return _dbuf_take(&times), _dbuf_take(&Ts), _dbuf_take(&Es), 0


# --------------------------------------------------------------------------
# exact stochastic simulation (Gillespie direct method)
# --------------------------------------------------------------------------

cdef inline double _channel_rate(int code, double c, double e, double sat,
                                 double T, double E) noexcept nogil:
    if code == 1:
        return c * T if e == 1.0 else (c * T * T if e == 2.0 else c * pow(T, e))
    if code == 4:
        return c * T * E
    if code == 5:
        return c * T * E / (sat + T)
    if code == 3:
        return c * E
    if code == 2:
        return c * T * log(T) if T > 0.0 else 0.0
    return c


def ssa(codes, coefs, expos, sats, d_t, d_e, bint two_species, double T0,
        double E0, double t_end, object seed, double floor_t, double floor_e,
        double cap, long max_events):
    """Event-driven simulation of a channel table over integer populations.
    Returns (times, T, E, status)."""
    cdef int nch = len(codes)
    if nch > _MAX_CHANNELS:
        raise ValueError(f"at most {_MAX_CHANNELS} channels supported, got {nch}")
    cdef int ccode[16]
    cdef double ccoef[16]
    cdef double cexpo[16]
    cdef double csat[16]
    cdef double cdt[16]
    cdef double cde[16]
    cdef double rates[16]
    cdef int i
    for i in range(nch):
        ccode[i] = codes[i]
        ccoef[i] = coefs[i]
        cexpo[i] = expos[i]
        csat[i] = sats[i]
        cdt[i] = d_t[i]
        cde[i] = d_e[i]
    cdef uint64_t rs[4]
    _seed_state(rs, _as_u64(seed))
    cdef double T = T0
    cdef double E = E0
    cdef double t = 0.0
    cdef double R, r, u, acc
    cdef long nev = 0
    cdef int pick, status = -1
    cdef DBuf times, Ts, Es
    _dbuf_init(&times, 4096)
    _dbuf_init(&Ts, 4096)
    _dbuf_init(&Es, 4096)
    _dbuf_push(&times, 0.0)
    _dbuf_push(&Ts, T)
    _dbuf_push(&Es, E)
    while True:
        R = 0.0
        for i in range(nch):
            r = _channel_rate(ccode[i], ccoef[i], cexpo[i], csat[i], T, E)
            if r < 0.0:
                status = 5
                break
            if T + cdt[i] < floor_t or E + cde[i] < floor_e:
                r = 0.0
            rates[i] = r
            R += r
        if status != -1:
            break
        if R <= 0.0:
            if t < t_end:
                _dbuf_push(&times, t_end)
                _dbuf_push(&Ts, T)
                _dbuf_push(&Es, E)
            status = 2
            break
        if R == INFINITY or R != R:
            status = 3
            break
        t += -log(1.0 - _rnd(rs)) / R
        if t >= t_end:
            _dbuf_push(&times, t_end)
            _dbuf_push(&Ts, T)
            _dbuf_push(&Es, E)
            status = 0
            break
        u = _rnd(rs) * R
        acc = 0.0
        pick = nch - 1
        for i in range(nch):
            acc += rates[i]
            if u < acc:
                pick = i
                break
        T += cdt[pick]
        E += cde[pick]
        nev += 1
        if T > cap or E > cap:
            status = 3
            break
        _dbuf_push(&times, t)
        _dbuf_push(&Ts, T)
        _dbuf_push(&Es, E)
        if nev >= max_events:
            status = 4
            break
    return _dbuf_take(&times), _dbuf_take(&Ts), _dbuf_take(&Es), status


def ssa_frozen(double birth_c, double birth_e, bint death_log, double death_c,
               double death_e, double T0, double t_end, object seed,
               double floor_t, double cap, long max_events):
    """One-species exact simulation with per-agent death rates frozen at the
    population size at each agent's creation. Returns (times, T, status)."""
    cdef uint64_t rs[4]
    _seed_state(rs, _as_u64(seed))
    cdef double T = T0
    cdef double t = 0.0
    cdef double B, D, R, u, acc, dnew
    cdef long nev = 0
    cdef int status = -1
    cdef Py_ssize_t ncoh = 0, ccap = 64, i
    cdef double* crates = <double*>PyMem_Malloc(ccap * sizeof(double))
    cdef double* ccounts = <double*>PyMem_Malloc(ccap * sizeof(double))
    if crates == NULL or ccounts == NULL:
        raise MemoryError()
    if T > 0.0:
        crates[0] = death_c * log(T) if death_log else death_c * _powfast(T, death_e)
        ccounts[0] = T
        ncoh = 1
    cdef DBuf times, Ts
    _dbuf_init(&times, 4096)
    _dbuf_init(&Ts, 4096)
    _dbuf_push(&times, 0.0)
    _dbuf_push(&Ts, T)
    while True:
        B = birth_c * T if birth_e == 1.0 else birth_c * _powfast(T, birth_e)
        if B < 0.0:
            status = 5
            break
        D = 0.0
        for i in range(ncoh):
            D += crates[i] * ccounts[i]
        if D < 0.0:
            status = 5
            break
        if T - 1.0 < floor_t:
            D = 0.0
        R = B + D
        if R <= 0.0:
            if t < t_end:
                _dbuf_push(&times, t_end)
                _dbuf_push(&Ts, T)
            status = 2
            break
        if R == INFINITY or R != R:
            status = 3
            break
        t += -log(1.0 - _rnd(rs)) / R
        if t >= t_end:
            _dbuf_push(&times, t_end)
            _dbuf_push(&Ts, T)
            status = 0
            break
        u = _rnd(rs) * R
        if u < B:
            T += 1.0
            dnew = death_c * log(T) if death_log else death_c * _powfast(T, death_e)
            for i in range(ncoh):
                if crates[i] == dnew:
                    ccounts[i] += 1.0
                    break
            else:
                if ncoh == ccap:
                    ccap *= 2
                    crates = <double*>PyMem_Realloc(crates, ccap * sizeof(double))
                    ccounts = <double*>PyMem_Realloc(ccounts, ccap * sizeof(double))
                    if crates == NULL or ccounts == NULL:
                        raise MemoryError()
                crates[ncoh] = dnew
                ccounts[ncoh] = 1.0
                ncoh += 1
        else:
            u -= B
            acc = 0.0
            for i in range(ncoh):
                acc += crates[i] * ccounts[i]
                if u < acc:
                    ccounts[i] -= 1.0
                    if ccounts[i] <= 0.0:
                        ncoh -= 1
                        crates[i] = crates[ncoh]
                        ccounts[i] = ccounts[ncoh]
                    break
            T -= 1.0
        nev += 1
        if T > cap:
            status = 3
            break
        _dbuf_push(&times, t)
        _dbuf_push(&Ts, T)
        if nev >= max_events:
            status = 4
            break
    PyMem_Free(crates)
    PyMem_Free(ccounts)
    return _dbuf_take(&times), _dbuf_take(&Ts), status


# --------------------------------------------------------------------------
# approximate stochastic simulation (Poisson tau-leaping)
# --------------------------------------------------------------------------

def tau_leap(codes, coefs, expos, sats, d_t, d_e, bint two_species, double T0,
             double E0, double t_end, double dt, object seed, double floor_t,
             double floor_e, double cap):
    """Fixed-step leaping: each channel fires Poisson(rate*dt) times per step,
    deltas apply simultaneously, components below their floor clamp to it.
    Returns (times, T, E, status)."""
    cdef int nch = len(codes)
    if nch > _MAX_CHANNELS:
        raise ValueError(f"at most {_MAX_CHANNELS} channels supported, got {nch}")
    cdef int ccode[16]
    cdef double ccoef[16]
    cdef double cexpo[16]
    cdef double csat[16]
    cdef double cdt[16]
    cdef double cde[16]
    cdef double rates[16]
    cdef int i
    for i in range(nch):
        ccode[i] = codes[i]
        ccoef[i] = coefs[i]
        cexpo[i] = expos[i]
        csat[i] = sats[i]
        cdt[i] = d_t[i]
        cde[i] = d_e[i]
    cdef uint64_t rs[4]
    _seed_state(rs, _as_u64(seed))
    cdef double T = T0
    cdef double E = E0
    cdef double t = 0.0
    cdef double h, R, r, lam, nT, nE
    cdef long k
    cdef int status = -1
    cdef DBuf times, Ts, Es
    _dbuf_init(&times, 4096)
    _dbuf_init(&Ts, 4096)
    _dbuf_init(&Es, 4096)
    _dbuf_push(&times, 0.0)
    _dbuf_push(&Ts, T)
    _dbuf_push(&Es, E)
    while t < t_end - 1e-12:
        if T > cap or E > cap:
            status = 3
            break
        h = dt if t + dt <= t_end else t_end - t
        R = 0.0
        for i in range(nch):
            r = _channel_rate(ccode[i], ccoef[i], cexpo[i], csat[i], T, E)
            if r < 0.0:
                status = 5
                break
            rates[i] = r
            R += r
        if status != -1:
            break
        if R <= 0.0:
            if t < t_end:
                _dbuf_push(&times, t_end)
                _dbuf_push(&Ts, T)
                _dbuf_push(&Es, E)
            status = 2
            break
        if R == INFINITY or R != R:
            status = 3
            break
        nT = T
        nE = E
        for i in range(nch):
            lam = rates[i] * h
            if lam > 0.0:
                k = _poisson(rs, lam)
                if k:
                    nT += cdt[i] * k
                    nE += cde[i] * k
        if nT < floor_t:
            nT = floor_t
        if nE < floor_e:
            nE = floor_e
        if nT > cap or nE > cap:
            status = 3
            break
        t = t + h if t + h < t_end - 1e-12 else t_end
        T = nT
        E = nE
        _dbuf_push(&times, t)
        _dbuf_push(&Ts, T)
        _dbuf_push(&Es, E)
    if status == -1:
        status = 0
    return _dbuf_take(&times), _dbuf_take(&Ts), _dbuf_take(&Es), status
