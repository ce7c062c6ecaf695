"""
Tests for in-bin frequency refinement: bisection baseline and the robust
five-point search with median repair.
"""

import math

import numpy as np
import pytest

from bin_refine.bin_refine_service import BinRefineService, median3
from models import RefineConfig, REFINE_BISECT, REFINE_ROBUST, bin_width
from oracle_bench.oracle_bench_service import OracleBenchService
from spectrum.spectrum_service import SpectrumService


EPS = 1e-4


@pytest.fixture
def refiner():
    return BinRefineService()


@pytest.fixture
def oracle():
    return OracleBenchService()


def grid_peak_in_bin(oracle, x, k):
    """|X| argmax over bin k at 1e-5 bin resolution."""
    bw = bin_width(x.n_samples)
    return oracle.zoom_grid_peak(x, k * bw, (k + 1) * bw, 1e-5 * bw).frequency


class TestMedian3:
    @pytest.mark.parametrize("a,b,c,expected", [
        (1, 2, 3, 2), (3, 1, 2, 2), (2, 3, 1, 2), (5, 5, 1, 5), (0, 0, 0, 0),
    ])
    def test_median(self, a, b, c, expected):
        assert median3(a, b, c) == expected


class TestRefineConfig:
    """Iteration counts and evaluation budgets."""

    def test_iterations(self):
        assert RefineConfig(epsilon=1e-4).iterations == 14
        assert RefineConfig(epsilon=0.25).iterations == 2
        assert RefineConfig(epsilon=1.0).iterations == 0

    def test_budget(self):
        assert RefineConfig(epsilon=1e-4).evaluation_budget == 29
        assert RefineConfig(epsilon=1e-4, method=REFINE_BISECT).evaluation_budget == 14
        assert RefineConfig(epsilon=1e-4).max_evaluations == 4 * 14 + 8

    @pytest.mark.parametrize("kwargs", [
        {"epsilon": 0.0}, {"epsilon": 1.5}, {"max_evaluations": 2}, {"method": "golden"},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            RefineConfig(**kwargs)


class TestRefineBisect:
    """Tests for BinRefineService.refine_bisect."""

    def test_epsilon_one_returns_midpoint(self, refiner, tone_signal):
        x, _ = tone_signal(256, (30.3, 1.0, 0.0))
        w, trace = refiner.refine_bisect(x, 30, RefineConfig(epsilon=1.0, method=REFINE_BISECT))
        assert w == 30.5 * bin_width(256)
        assert trace.evaluations == 0

    def test_close_to_tone(self, refiner, tone_signal):
        x, tones = tone_signal(1024, (100.37, 1.0, 0.6))
        w, trace = refiner.refine_bisect(x, 100, RefineConfig(epsilon=EPS, method=REFINE_BISECT))
        bw = bin_width(1024)
        assert abs(w - tones[0].frequency) <= 0.005 * bw
        assert trace.evaluations <= RefineConfig(epsilon=EPS).iterations + 2
        assert trace.final_interval_width <= EPS * bw

    def test_symmetric_tone_at_bin_centre(self, refiner, oracle, tone_signal):
        x, tones = tone_signal(1024, (200.5, 1.0, 0.0))
        bw = bin_width(1024)
        w, trace = refiner.refine_bisect(x, 200, RefineConfig(epsilon=EPS, method=REFINE_BISECT))
        assert abs(w - grid_peak_in_bin(oracle, x, 200)) <= 2 * EPS * bw
        assert abs(w - tones[0].frequency) <= 1e-3 * bw
        assert trace.iterations == RefineConfig(epsilon=EPS).iterations


class TestRefineRobust:
    """Tests for BinRefineService.refine_robust."""

    def test_epsilon_one_single_evaluation(self, refiner, tone_signal):
        x, _ = tone_signal(256, (30.3, 1.0, 0.0))
        w, trace = refiner.refine_robust(x, 30, RefineConfig(epsilon=1.0))
        assert w == 30.5 * bin_width(256)
        assert trace.evaluations == 1
        assert trace.iterations == 0

    def test_symmetric_tone_at_bin_centre(self, refiner, oracle, tone_signal):
        """Bin-centre tone: lands on the |X| peak, which the tone's image nudges off centre."""
        x, tones = tone_signal(1024, (200.5, 1.0, 0.0))
        bw = bin_width(1024)
        w, _ = refiner.refine_robust(x, 200, RefineConfig(epsilon=EPS))
        assert abs(w - grid_peak_in_bin(oracle, x, 200)) <= 2 * EPS * bw
        assert abs(w - tones[0].frequency) <= 1e-3 * bw

    def test_matches_grid_and_bisect(self, refiner, oracle, tone_signal):
        x, _ = tone_signal(1024, (100.37, 1.0, 0.6))
        bw = bin_width(1024)
        w, trace = refiner.refine_robust(x, 100, RefineConfig(epsilon=EPS))
        w_bisect, _ = refiner.refine_bisect(x, 100, RefineConfig(epsilon=EPS, method=REFINE_BISECT))
        assert abs(w - grid_peak_in_bin(oracle, x, 100)) <= 2 * EPS * bw
        assert abs(w - w_bisect) <= 1e-3 * bw
        assert trace.repairs == 0

    def test_interval_halves_exactly(self, refiner, tone_signal):
        """After i iterations the interval is bw * 2^-i."""
        x, _ = tone_signal(512, (77.81, 1.0, 1.0))
        bw = bin_width(512)
        for eps in (0.5, 0.25, 1 / 64, EPS):
            cfg = RefineConfig(epsilon=eps)
            _, trace = refiner.refine_robust(x, 77, cfg)
            assert trace.iterations == cfg.iterations
            assert trace.final_interval_width == bw * 2.0 ** -trace.iterations

    def test_evaluation_budget(self, refiner, tone_signal):
        x, _ = tone_signal(512, (150.12, 1.0, 0.0))
        cfg = RefineConfig(epsilon=EPS)
        _, trace = refiner.refine_robust(x, 150, cfg)
        assert trace.evaluations == cfg.evaluation_budget == 2 * math.ceil(math.log2(1 / EPS)) + 1
        assert len(trace.history) == trace.evaluations
        assert not trace.truncated

    def test_truncation_is_reported(self, refiner, tone_signal):
        x, _ = tone_signal(512, (150.12, 1.0, 0.0))
        _, trace = refiner.refine_robust(x, 150, RefineConfig(epsilon=EPS, max_evaluations=7))
        assert trace.truncated
        assert trace.evaluations <= 7

    def test_containment(self, refiner):
        """Returned frequency stays inside the bin even for noise."""
        from models import Signal
        x = Signal(np.random.default_rng(4).standard_normal(128))
        bw = bin_width(128)
        for k in (0, 10, 63):
            w, _ = refiner.refine_robust(x, k, RefineConfig(epsilon=1e-3))
            assert k * bw <= w <= (k + 1) * bw

    def test_repair_never_lowers_magnitudes(self, refiner, tone_signal):
        """Unperturbed samples keep at least their raw magnitude; perturbed ones get raised."""
        x, _ = tone_signal(512, (150.12, 1.0, 0.0))
        perturbed = {i for i in range(64) if i % 3 == 1}
        _, trace = refiner.refine_robust(
            x, 150, RefineConfig(epsilon=EPS), perturb=lambda i, w, m: m * 0.5 if i in perturbed else m
        )
        for i, (_, raw, repaired) in enumerate(trace.history):
            if i in perturbed:
                assert repaired >= 0.5 * raw
            else:
                assert repaired >= raw
        assert trace.repairs >= 1

    def test_repaired_midpoint_reaches_triple_median(self, refiner, tone_signal, monkeypatch):
        """Every repair leaves the middle magnitude at max(own, median of the triple)."""
        x, _ = tone_signal(512, (150.12, 1.0, 0.0))
        seen = []
        real_repair = BinRefineService._repair

        def recording_repair(service, left, mid, right, trace):
            before = (left.magnitude, mid.magnitude, right.magnitude)
            real_repair(service, left, mid, right, trace)
            seen.append((before, mid.magnitude))

        monkeypatch.setattr(BinRefineService, "_repair", recording_repair)
        _, trace = refiner.refine_robust(
            x, 150, RefineConfig(epsilon=EPS), perturb=lambda i, w, m: m * 0.5 if i % 3 == 1 else m
        )
        assert len(seen) == trace.evaluations
        for (l, m, r), repaired in seen:
            assert repaired >= median3(l, m, r)
            assert repaired == max(m, median3(l, m, r))
        assert sum(1 for (l, m, r), repaired in seen if repaired > m) == trace.repairs >= 1

    def test_bin_out_of_range(self, refiner, tone_signal):
        x, _ = tone_signal(64, (10.3, 1.0, 0.0))
        with pytest.raises(ValueError):
            refiner.refine_robust(x, 32, RefineConfig())
        with pytest.raises(ValueError):
            refiner.refine_robust(x, -1, RefineConfig())

    def test_refine_dispatches_on_method(self, refiner, tone_signal):
        x, _ = tone_signal(256, (60.4, 1.0, 0.0))
        spectrum = SpectrumService().dft(x)
        _, robust = refiner.refine(x, 60, RefineConfig(method=REFINE_ROBUST), spectrum=spectrum)
        _, bisect = refiner.refine(x, 60, RefineConfig(method=REFINE_BISECT), spectrum=spectrum)
        assert robust.method == REFINE_ROBUST
        assert bisect.method == REFINE_BISECT


class TestOracleAgreement:
    """Robust refinement against the dense |X| grid on random instances."""

    def _instances(self, count, n_samples=256, seed=2024):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            k = int(rng.integers(4, n_samples // 2 - 5))
            offset = float(rng.uniform(0.05, 0.95))
            phase = float(rng.uniform(-math.pi, math.pi))
            yield k, k + offset, phase

    def test_random_instances_agree(self, refiner, oracle, tone_signal):
        bw = bin_width(256)
        for k, position, phase in self._instances(50):
            x, _ = tone_signal(256, (position, 1.0, phase))
            w, _ = refiner.refine_robust(x, k, RefineConfig(epsilon=EPS))
            assert abs(w - grid_peak_in_bin(oracle, x, k)) <= 2 * EPS * bw

    def test_median_repair_survives_corruption(self, refiner, oracle, tone_signal):
        """One interior magnitude per refinement cut by 50%."""
        bw = bin_width(256)
        corrupted_index = 5
        within, repaired_runs = 0, 0
        for k, position, phase in self._instances(50, seed=77):
            x, _ = tone_signal(256, (position, 1.0, phase))
            w, trace = refiner.refine_robust(
                x, k, RefineConfig(epsilon=EPS),
                perturb=lambda i, freq, mag: 0.5 * mag if i == corrupted_index else mag,
            )
            repaired_runs += trace.repairs >= 1
            within += abs(w - grid_peak_in_bin(oracle, x, k)) <= 2 * EPS * bw
        assert repaired_runs == 50
        assert within >= 48
