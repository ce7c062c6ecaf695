import logging

from bin_detect.bin_detect_service import BinDetectService
from bin_refine.bin_refine_service import BinRefineService
from models import (
    DecompositionResult, IterationRecord, MatchReport, ToneMatch, ToneFitError, DecompositionError,
    IllConditionedFitError, canonical_phase, bin_width,
    MODE_KNOWN, FIT_JOINT,
    STOP_REACHED_M, STOP_RESIDUAL_BELOW_THRESHOLD, STOP_MAX_TONES_HIT, STOP_NO_CANDIDATE,
)
from signal_model.signal_model_service import SignalModelService
from spectrum.spectrum_service import SpectrumService
from tone_fit.tone_fit_service import GramAccumulator, ToneFitService, check_separation, tones_from_coefficients


logger = logging.getLogger(__name__)


class DecomposerService:
    def __init__(self, spectrum_service=None):
        self.spectrum = spectrum_service or SpectrumService()
        self.detector = BinDetectService()
        self.refiner = BinRefineService(self.spectrum)
        self.fitter = ToneFitService()
        self.signals = SignalModelService()


    # ------------ fit strategies -----------------

    def _fit_joint(self, acc, w):
        """Refit every accepted frequency against the original signal."""
        acc.add(w)
        try:
            coeffs = acc.solve()
        except IllConditionedFitError:
            acc.pop()
            raise
        return tones_from_coefficients(coeffs, acc.freqs), acc.residual(coeffs)


    def _fit_residual(self, residual, tones, w, min_separation):
        """Fit only the new frequency against the current residual; earlier tones stay frozen."""
        check_separation([t.frequency for t in tones], w, min_separation)
        coeffs, new_tones = self.fitter.joint_ls_fit(residual, [w], min_separation=min_separation)
        return tones + new_tones, self.fitter.subtract_model(residual, coeffs, [w])


    # ------------ main loop -----------------

    def decompose(self, x, cfg, on_spectrum=None):
        """
        Successive tone extraction:
          1. DFT of the current residual
          2. strongest two-bin candidate
          3. refine the frequency inside that bin
          4. least-squares fit (joint over all accepted frequencies, against the original x)
          5. residual <- x - fitted model
        Known mode stops after exactly M tones; blind mode stops once the residual energy
        drops to residual_energy_fraction of the original energy or max_tones is reached.
        """
        n = x.n_samples
        if n < 4:
            raise ValueError(f"Decomposition needs at least 4 samples, got {n}.")
        known = cfg.mode == MODE_KNOWN
        if known and 2 * cfg.n_tones > n:
            raise ValueError(f"Cannot extract M={cfg.n_tones} tones from N={n} samples (needs 2M <= N).")

        bw = bin_width(n)
        min_separation = cfg.refine.epsilon * bw
        target = cfg.n_tones if known else min(cfg.max_tones, n // 2)

        original_energy = self.signals.signal_energy(x)
        threshold = cfg.residual_energy_fraction * original_energy
        acc = GramAccumulator(x, min_separation=min_separation, tone_fit_service=self.fitter)

        residual = x
        residual_energy = original_energy
        tones = []
        diagnostics = []
        stop_reason = None
        if not known and residual_energy <= threshold:
            stop_reason = STOP_RESIDUAL_BELOW_THRESHOLD

        while stop_reason is None:
            if len(tones) >= target:
                stop_reason = STOP_REACHED_M if known else STOP_MAX_TONES_HIT
                break
            iteration = len(tones)

            spectrum = self.spectrum.dft(residual)
            if on_spectrum is not None:
                on_spectrum(iteration, spectrum)
            candidate = self.detector.strongest_bin(spectrum)
            if candidate.amplitude <= 0.0:
                if known:
                    raise DecompositionError(f"No candidate bin left after {iteration} of {cfg.n_tones} tones.")
                stop_reason = STOP_NO_CANDIDATE
                break

            w, trace = self.refiner.refine(residual, candidate.k, cfg.refine, spectrum=spectrum)
            near = cfg.min_bin_separation > 0 and any(
                abs(w - t.frequency) <= cfg.min_bin_separation * bw for t in tones
            )

            try:
                if cfg.fit_strategy == FIT_JOINT:
                    tones, residual = self._fit_joint(acc, w)
                else:
                    tones, residual = self._fit_residual(residual, tones, w, min_separation)
            except ToneFitError as e:
                if known:
                    raise DecompositionError(f"Tone {iteration + 1} of {cfg.n_tones} rejected: {e}") from e
                logger.info("Blind decomposition stopped at tone %s: %s", iteration + 1, e)
                stop_reason = e.reason
                break

            residual_energy = self.signals.signal_energy(residual)
            diagnostics.append(IterationRecord(
                iteration=iteration,
                selected_bin=candidate.k,
                bin_amplitude=candidate.amplitude,
                refined_frequency=w,
                residual_energy=residual_energy,
                refine=trace.summary(),
                near_accepted=near,
            ))
            logger.debug("Iteration %s: bin %s, w=%.12g, residual energy %.6g", iteration, candidate.k, w, residual_energy)

            if not known and residual_energy <= threshold:
                stop_reason = STOP_RESIDUAL_BELOW_THRESHOLD

        logger.info("Decomposition of %s samples finished with %s tones (%s)", n, len(tones), stop_reason)
        return DecompositionResult(
            tones=tuple(tones),
            residual=residual,
            diagnostics=tuple(diagnostics),
            stop_reason=stop_reason,
            original_energy=original_energy,
            residual_energy=residual_energy,
        )


    # ------------ scoring -----------------

    def evaluate_against_truth(self, result, truth, max_frequency_error=None):
        """
        Greedy matching by frequency proximity: closest (truth, estimate) pairs are taken
        first. Independent of the order of either list.
        """
        estimates = list(result.tones if isinstance(result, DecompositionResult) else result)
        truth = list(truth)

        pairs = sorted(
            (abs(e.frequency - t.frequency), t.frequency, e.frequency, ti, ei)
            for ti, t in enumerate(truth)
            for ei, e in enumerate(estimates)
        )
        used_truth, used_est, matches = set(), set(), []
        for dist, _, _, ti, ei in pairs:
            if ti in used_truth or ei in used_est:
                continue
            if max_frequency_error is not None and dist > max_frequency_error:
                break
            used_truth.add(ti)
            used_est.add(ei)
            t, e = truth[ti], estimates[ei]
            matches.append(ToneMatch(
                truth_index=ti,
                estimate_frequency=e.frequency,
                frequency_error=e.frequency - t.frequency,
                amplitude_error=e.amplitude - t.amplitude,
                phase_error=canonical_phase(e.phase - t.phase),
            ))

        return MatchReport(
            matches=tuple(sorted(matches, key=lambda m: m.truth_index)),
            unmatched_estimates=len(estimates) - len(used_est),
            unmatched_truths=len(truth) - len(used_truth),
        )
