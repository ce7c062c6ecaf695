import logging

from models import RefineConfig, RefineTrace, SpectrumPoint, REFINE_BISECT, REFINE_ROBUST, bin_width
from spectrum.spectrum_service import SpectrumService


logger = logging.getLogger(__name__)


def median3(a, b, c):
    return max(min(a, b), min(max(a, b), c))


class BinRefineService:
    """
    Searches |X(w)| inside the bin [2 pi k / N, 2 pi (k+1) / N] for its peak.

    Positions inside the bin are kept as dyadic fractions t in [0, 1] (w = (k + t) 2 pi / N),
    so every halving of the interval is exact. The endpoint magnitudes come from the DFT
    bins k and k+1; only interior points cost a DTFT evaluation.

    `perturb(index, frequency, magnitude) -> magnitude` is a fault-injection hook applied
    to each interior evaluation right after it is computed (index counts evaluations
    from 0 within one refinement).
    """

    def __init__(self, spectrum_service=None):
        self.spectrum = spectrum_service or SpectrumService()


    # ------------ helpers -----------------

    def _check_bin(self, spectrum, k):
        if not 0 <= k <= spectrum.last_bin - 1:
            raise ValueError(f"Bin index {k} outside 0..{spectrum.last_bin - 1}.")


    def _endpoint(self, spectrum, index):
        return SpectrumPoint(frequency=float(spectrum.frequencies[index]), value=complex(spectrum.bins[index]))


    def _evaluate(self, x, w, trace, perturb):
        point = self.spectrum.evaluate(x, w)
        if perturb is not None:
            point.magnitude = max(0.0, float(perturb(trace.evaluations, w, point.magnitude)))
        trace.evaluations += 1
        trace.history.append(point)
        return point


    def _repair(self, left, mid, right, trace):
        if mid.repair(median3(left.magnitude, mid.magnitude, right.magnitude)):
            trace.repairs += 1


    def _finish(self, trace, width_fraction, n_samples):
        trace.final_interval_width = width_fraction * bin_width(n_samples)
        trace.history = [(p.frequency, p.raw_magnitude, p.magnitude) for p in trace.history]
        return trace


    # ------------ refiners -----------------

    def refine(self, x, k, cfg, spectrum=None, perturb=None):
        if cfg.method == REFINE_BISECT:
            return self.refine_bisect(x, k, cfg, spectrum=spectrum, perturb=perturb)
        return self.refine_robust(x, k, cfg, spectrum=spectrum, perturb=perturb)


    def refine_bisect(self, x, k, cfg=None, spectrum=None, perturb=None):
        """Two-endpoint comparison: move the weaker endpoint to the midpoint."""
        cfg = cfg or RefineConfig(method=REFINE_BISECT)
        spectrum = spectrum or self.spectrum.dft(x)
        self._check_bin(spectrum, k)
        bw = bin_width(x.n_samples)
        trace = RefineTrace(method=REFINE_BISECT)

        t_l, t_r = 0.0, 1.0
        mag_l = abs(spectrum.bins[k])
        mag_r = abs(spectrum.bins[k + 1])
        while t_r - t_l > cfg.epsilon:
            if trace.evaluations >= cfg.max_evaluations:
                trace.truncated = True
                logger.warning("Bisection on bin %s truncated after %s evaluations", k, trace.evaluations)
                break
            t_m = (t_l + t_r) / 2.0
            mag_m = self._evaluate(x, (k + t_m) * bw, trace, perturb).magnitude
            if mag_l < mag_r:
                t_l, mag_l = t_m, mag_m
            else:
                t_r, mag_r = t_m, mag_m
            trace.iterations += 1

        return (k + (t_l + t_r) / 2.0) * bw, self._finish(trace, t_r - t_l, x.n_samples)


    def refine_robust(self, x, k, cfg=None, spectrum=None, perturb=None):
        """
        Quasi-concave 5-point search with median repair of every newly sampled point:
        a sample sitting below the median of itself and its two cached neighbours is
        raised to that median, then the interval re-centres on the largest of
        (l, lm, m, mr, r) and halves.
        """
        cfg = cfg or RefineConfig(method=REFINE_ROBUST)
        spectrum = spectrum or self.spectrum.dft(x)
        self._check_bin(spectrum, k)
        bw = bin_width(x.n_samples)
        trace = RefineTrace(method=REFINE_ROBUST)

        t_l, t_m, t_r = 0.0, 0.5, 1.0
        p_l = self._endpoint(spectrum, k)
        p_r = self._endpoint(spectrum, k + 1)
        p_m = self._evaluate(x, (k + t_m) * bw, trace, perturb)
        self._repair(p_l, p_m, p_r, trace)

        while t_r - t_l > cfg.epsilon:
            if trace.evaluations + 2 > cfg.max_evaluations:
                trace.truncated = True
                logger.warning("Robust search on bin %s truncated after %s evaluations", k, trace.evaluations)
                break
            t_lm, t_mr = (t_l + t_m) / 2.0, (t_m + t_r) / 2.0
            p_lm = self._evaluate(x, (k + t_lm) * bw, trace, perturb)
            p_mr = self._evaluate(x, (k + t_mr) * bw, trace, perturb)
            self._repair(p_l, p_lm, p_m, trace)
            self._repair(p_m, p_mr, p_r, trace)

            peak = max(p.magnitude for p in (p_l, p_lm, p_m, p_mr, p_r))
            # ties resolve centre first, then left, then right
            if p_m.magnitude == peak:
                t_l, p_l, t_r, p_r = t_lm, p_lm, t_mr, p_mr
            elif peak in (p_l.magnitude, p_lm.magnitude):
                t_r, p_r, t_m, p_m = t_m, p_m, t_lm, p_lm
            else:
                t_l, p_l, t_m, p_m = t_m, p_m, t_mr, p_mr
            trace.iterations += 1

        return (k + t_m) * bw, self._finish(trace, t_r - t_l, x.n_samples)
