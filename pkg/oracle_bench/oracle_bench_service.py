import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from constants import ORACLE_CHUNK_ELEMENTS
from decomposer.decomposer_service import DecomposerService
from models import GridPeak, NoiseSpec, ScalingPoint, ToneParams, TrialReport, bin_width
from signal_model.signal_model_service import SignalModelService
from spectrum.spectrum_service import SpectrumService


logger = logging.getLogger(__name__)

# runtime_scaling tone structure: bin positions at N = 4096, rescaled to every size
SCALING_BINS_4096 = (80.21, 160.68, 411.33)
SCALING_AMPLITUDES = (1.0, 0.7, 0.4)
SCALING_PHASES = (0.3, -1.1, 2.0)


class CountingSpectrumService(SpectrumService):
    """SpectrumService that counts DTFT point evaluations."""

    def __init__(self):
        super().__init__()
        self.count = 0


    def reset(self):
        self.count = 0


    def dtft_point(self, x, w):
        self.count += 1
        return super().dtft_point(x, w)


def scaling_tones(n_samples):
    return [
        ToneParams.at_bin(b * n_samples / 4096.0, n_samples, a, p)
        for b, a, p in zip(SCALING_BINS_4096, SCALING_AMPLITUDES, SCALING_PHASES)
    ]


def _rmse(values):
    if not values:
        return math.inf
    return math.sqrt(sum(v * v for v in values) / len(values))


class OracleBenchService:
    def __init__(self):
        self.signals = SignalModelService()
        self.decomposer = DecomposerService()


    # ------------ brute-force oracles -----------------

    def dense_grid_peak(self, x, w_lo, w_hi, step):
        """
        max |X(w)| over w_lo, w_lo + step, ... <= w_hi by direct summation.
        Products are formed in float64 and summed in long double; the grid is processed
        in chunks of at most ORACLE_CHUNK_ELEMENTS (grid points * samples).
        Ties go to the lower frequency.
        """
        if not (math.isfinite(w_lo) and math.isfinite(w_hi) and math.isfinite(step)):
            raise ValueError("Grid bounds and step must be finite.")
        if step <= 0:
            raise ValueError(f"Grid step must be positive, got {step}.")
        if not w_lo < w_hi:
            raise ValueError(f"Empty grid: w_lo={w_lo} is not below w_hi={w_hi}.")

        count = int(math.floor((w_hi - w_lo) / step * (1 + 1e-12))) + 1
        n = np.arange(x.n_samples, dtype=float)
        samples = x.samples
        rows = max(1, ORACLE_CHUNK_ELEMENTS // x.n_samples)

        best_w, best_mag = None, -1.0
        for start in range(0, count, rows):
            grid = w_lo + step * np.arange(start, min(count, start + rows), dtype=float)
            phase = np.outer(grid, n)
            re = np.sum(samples * np.cos(phase), axis=1, dtype=np.longdouble)
            im = np.sum(samples * np.sin(phase), axis=1, dtype=np.longdouble)
            mags = np.sqrt(re * re + im * im)
            i = int(np.argmax(mags))
            if float(mags[i]) > best_mag:
                best_w, best_mag = float(grid[i]), float(mags[i])

        return GridPeak(frequency=best_w, magnitude=best_mag, grid_step=float(step))


    def zoom_grid_peak(self, x, w_lo, w_hi, step, zoom=100):
        """Coarse grid at zoom*step, then a step grid over +-zoom*step around the coarse peak."""
        if zoom < 1:
            raise ValueError("zoom must be >= 1.")
        coarse = self.dense_grid_peak(x, w_lo, w_hi, step * zoom)
        lo = max(w_lo, coarse.frequency - zoom * step)
        hi = min(w_hi, coarse.frequency + zoom * step)
        return self.dense_grid_peak(x, lo, hi, step)


    # ------------ Monte Carlo -----------------

    def _trial(self, truth, n_samples, sigma, seed, cfg, match_tolerance):
        t0 = time.perf_counter()
        x = self.signals.synthesize(truth, n_samples, NoiseSpec(standard_deviation=sigma, seed=seed))
        t1 = time.perf_counter()
        result = self.decomposer.decompose(x, cfg)
        t2 = time.perf_counter()
        report = self.decomposer.evaluate_against_truth(result, truth, max_frequency_error=match_tolerance)
        t3 = time.perf_counter()

        by_truth = {m.truth_index: m for m in report.matches}
        row = {
            "seed": seed,
            "n_estimates": len(result.tones),
            "stop_reason": result.stop_reason,
            "detected": len(result.tones) == len(truth) and report.unmatched_truths == 0,
            "frequency_errors": tuple(by_truth[i].frequency_error if i in by_truth else None for i in range(len(truth))),
            "amplitude_errors": tuple(by_truth[i].amplitude_error if i in by_truth else None for i in range(len(truth))),
            "phase_errors": tuple(by_truth[i].phase_error if i in by_truth else None for i in range(len(truth))),
        }
        return row, (t1 - t0, t2 - t1, t3 - t2)


    def monte_carlo(self, truth, n_samples, snr_db, trials, cfg, base_seed=0, workers=1, match_tolerance=None):
        """
        Seeded trials: trial i draws its noise with seed base_seed + i, so a report
        is reproducible bit for bit. Estimates are matched to truth within
        match_tolerance (default half a bin); RMSE is taken over matched trials only.
        """
        if trials < 1:
            raise ValueError("trials must be >= 1.")
        truth = [t if isinstance(t, ToneParams) else ToneParams(*t) for t in truth]
        sigma = self.signals.noise_for_snr(truth, snr_db)
        tolerance = 0.5 * bin_width(n_samples) if match_tolerance is None else match_tolerance

        def run(i):
            row, times = self._trial(truth, n_samples, sigma, base_seed + i, cfg, tolerance)
            return {"trial": i, **row}, times

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run, range(trials)))
        else:
            outcomes = [run(i) for i in range(trials)]

        rows = [row for row, _ in outcomes]
        stage_times = {
            stage: sum(times[j] for _, times in outcomes)
            for j, stage in enumerate(("synthesize", "decompose", "evaluate"))
        }

        def column(key, i):
            return [r[key][i] for r in rows if r[key][i] is not None]

        m = len(truth)
        report = TrialReport(
            truth=tuple(truth),
            n_samples=n_samples,
            snr_db=snr_db,
            trials=trials,
            per_trial=tuple(rows),
            frequency_rmse=tuple(_rmse(column("frequency_errors", i)) for i in range(m)),
            amplitude_rmse=tuple(_rmse(column("amplitude_errors", i)) for i in range(m)),
            phase_rmse=tuple(_rmse(column("phase_errors", i)) for i in range(m)),
            matched_counts=tuple(len(column("frequency_errors", i)) for i in range(m)),
            detection_successes=sum(1 for r in rows if r["detected"]),
            stage_times=stage_times,
        )
        logger.info(
            "Monte Carlo: %s trials at %s dB, %s detections, frequency RMSE (bins) %s",
            trials, snr_db, report.detection_successes, report.frequency_rmse_bins,
        )
        return report


    # ------------ runtime scaling -----------------

    def runtime_scaling(self, sizes, cfg, repeats=3):
        """
        Times decompose at every size (best of `repeats`, run serially) on the same
        three-tone structure scaled to the band. Trace evaluations and independently
        counted DTFT calls are reported side by side.
        """
        sizes = [int(s) for s in sizes]
        if not sizes:
            raise ValueError("sizes must not be empty.")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be strictly ascending.")
        if repeats < 1:
            raise ValueError("repeats must be >= 1.")

        counter = CountingSpectrumService()
        decomposer = DecomposerService(counter)
        points = []
        for n in sizes:
            x = self.signals.synthesize(scaling_tones(n), n)
            best = math.inf
            for _ in range(repeats):
                counter.reset()
                t0 = time.perf_counter()
                result = decomposer.decompose(x, cfg)
                best = min(best, time.perf_counter() - t0)
            points.append(ScalingPoint(
                n_samples=n,
                wall_time=best,
                evaluations=result.total_evaluations,
                counted_evaluations=counter.count,
            ))
            logger.info("N=%s: %.4fs, %s evaluations", n, best, result.total_evaluations)
        return points
