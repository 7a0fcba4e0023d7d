"""Backend consistency: the compiled and pure kernels honor one contract."""

import math

import numpy as np
import pytest

from dualsim.kernels import _pykernels as pure

compiled = pytest.importorskip(
    "dualsim.kernels._ckernels", reason="compiled backend not built"
)

KERNELS = ("rk4_growth", "rk4_kuznetsov", "ssa", "ssa_frozen", "tau_leap")


def test_backends_expose_the_same_entry_points():
    for name in KERNELS:
        assert callable(getattr(pure, name))
        assert callable(getattr(compiled, name))


class TestRk4Parity:
    def test_logistic(self):
        args = (0, 1.0, 0.2, 0.0, 1.0, 1.0, 0.001, 10.0, 0.1, 1e300)
        tp, vp, sp = pure.rk4_growth(*args)
        tc, vc, sc = compiled.rk4_growth(*args)
        assert sp == sc == 0
        assert np.array_equal(np.asarray(tp), np.asarray(tc))
        np.testing.assert_allclose(np.asarray(vp), np.asarray(vc), rtol=1e-12)

    def test_gompertz_large_magnitudes(self):
        args = (1, 1.636, 0.002, 0.0, 1.0, 1.0, 0.01, 110.0, 1.0, 1e300)
        _, vp, sp = pure.rk4_growth(*args)
        _, vc, sc = compiled.rk4_growth(*args)
        assert sp == sc == 0
        np.testing.assert_allclose(np.asarray(vp), np.asarray(vc), rtol=1e-10)

    def test_kuznetsov_scenario(self):
        args = (1.636, 0.002, 20.19, 0.00311, 1.0, 1.131, 0.3743, 0.0,
                100.0, 10.0, 0.001, 30.0, 0.5, 1e300)
        tp, Tp, Ep, sp = pure.rk4_kuznetsov(*args)
        tc, Tc, Ec, sc = compiled.rk4_kuznetsov(*args)
        assert sp == sc == 0
        np.testing.assert_allclose(np.asarray(Tp), np.asarray(Tc), rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(np.asarray(Ep), np.asarray(Ec), rtol=1e-10, atol=1e-12)

    def test_blowup_flag_matches(self):
        args = (0, 1.636, 0.002, 1.0 / 3.0, 0.0, 1.0, 0.001, 10.0, 0.1, 1e300)
        _, vp, sp = pure.rk4_growth(*args)
        _, vc, sc = compiled.rk4_growth(*args)
        assert sp == sc == 1
        assert all(map(math.isfinite, vp)) and all(map(math.isfinite, vc))


class TestStochasticAgreement:
    # different RNGs, so agreement is distributional, not per-event

    def test_ssa_linear_birth_death_means(self):
        def mean_final(mod, base):
            finals = []
            for i in range(400):
                _, Ts, _, st = mod.ssa([1, 1], [2.0, 1.0], [1.0, 1.0], [0.0, 0.0],
                                       [1, -1], [0, 0], False, 100, 0, 0.5,
                                       base + i, 0, 0, 1e12, 10**7)
                assert st in (0, 2)
                finals.append(Ts[-1])
            return np.mean(finals), np.std(finals, ddof=1) / math.sqrt(len(finals))

        mp, sep = mean_final(pure, 10_000)
        mc, sec = mean_final(compiled, 20_000)
        assert abs(mp - mc) <= 3 * math.hypot(sep, sec)

    def test_frozen_equals_live_within_each_backend(self):
        for mod in (pure, compiled):
            live = mod.ssa([1, 1], [0.7, 0.9], [1.0, 1.0], [0.0, 0.0], [1, -1], [0, 0],
                           False, 5, 0, 15.0, 4242, 0, 0, 1e12, 10**7)
            frozen = mod.ssa_frozen(0.7, 1.0, False, 0.9, 0.0, 5, 15.0, 4242, 0, 1e12, 10**7)
            assert list(live[0]) == list(frozen[0])
            assert list(live[1]) == list(frozen[1])

    def test_tau_leap_poisson_means(self):
        # a single constant channel: events by t are Poisson(c * t)
        def mean_events(mod, base):
            finals = []
            for i in range(300):
                _, Ts, _, st = mod.tau_leap([0], [3.0], [0.0], [0.0], [1], [0], False,
                                            0, 0, 2.0, 0.01, base + i, 0, 0, 1e12)
                assert st == 0
                finals.append(Ts[-1])
            return np.mean(finals)

        mp = mean_events(pure, 1_000)
        mc = mean_events(compiled, 2_000)
        assert mp == pytest.approx(6.0, abs=0.5)
        assert mc == pytest.approx(6.0, abs=0.5)

    def test_per_seed_determinism_each_backend(self):
        for mod in (pure, compiled):
            a = mod.ssa([1, 1], [1.0, 0.2], [1.0, 2.0], [0.0, 0.0], [1, -1], [0, 0],
                        False, 1, 0, 10.0, 7, 0, 0, 1e12, 10**7)
            b = mod.ssa([1, 1], [1.0, 0.2], [1.0, 2.0], [0.0, 0.0], [1, -1], [0, 0],
                        False, 1, 0, 10.0, 7, 0, 0, 1e12, 10**7)
            assert list(a[0]) == list(b[0])
            assert list(a[1]) == list(b[1])
