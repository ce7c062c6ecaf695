import logging
import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from constants import CONDITION_LIMIT, DEFAULT_EPSILON
from models import (
    SinCosBasis, LinearCoefficients, ToneEstimate, Signal,
    DuplicateFrequencyError, IllConditionedFitError, canonical_phase, bin_width,
)


logger = logging.getLogger(__name__)


def tones_from_coefficients(coeffs, freqs):
    """alpha s + beta c = A sin(wn + theta) with alpha = A cos theta, beta = A sin theta."""
    return [
        ToneEstimate(frequency=float(w), amplitude=math.hypot(alpha, beta), phase=canonical_phase(math.atan2(beta, alpha)))
        for w, (alpha, beta) in zip(freqs, coeffs.pairs)
    ]


def check_separation(freqs, w, min_separation):
    """Reject w when it sits within min_separation of an accepted frequency."""
    for existing in freqs:
        if abs(w - existing) <= min_separation:
            raise DuplicateFrequencyError(
                f"Frequency {w!r} duplicates accepted frequency {existing!r} at resolution {min_separation!r}.",
                frequencies=(existing, w),
            )


def _closest_pair(freqs):
    if len(freqs) < 2:
        return (freqs[0], freqs[0]) if freqs else ()
    ordered = sorted(freqs)
    gaps = np.diff(ordered)
    i = int(np.argmin(gaps))
    return ordered[i], ordered[i + 1]


class GramAccumulator:
    """
    Maintains G = Y^T Y and b = Y^T x for Y = [s_w1 c_w1 ... s_wm c_wm].
    Adding a frequency costs O(mN) (one new row/column); solving costs O(m^3).
    """

    def __init__(self, x, min_separation=None, condition_limit=CONDITION_LIMIT, tone_fit_service=None):
        self.x = x
        self.min_separation = bin_width(x.n_samples) * DEFAULT_EPSILON if min_separation is None else min_separation
        self.condition_limit = condition_limit
        self.fitter = tone_fit_service or ToneFitService()
        self.freqs = []
        self.columns = []
        self.gram = np.zeros((0, 0))
        self.rhs = np.zeros(0)


    def __len__(self):
        return len(self.freqs)


    def add(self, w):
        w = float(w)
        check_separation(self.freqs, w, self.min_separation)
        if 2 * (len(self.freqs) + 1) > self.x.n_samples:
            raise ValueError(f"Cannot fit {len(self.freqs) + 1} tones to {self.x.n_samples} samples (needs 2M <= N).")

        basis = self.fitter.make_basis(w, self.x.n_samples)
        new_cols = (basis.sin_vector, basis.cos_vector)
        m = self.gram.shape[0]
        cross = np.array([[np.dot(col, new) for new in new_cols] for col in self.columns]).reshape(m, 2)
        corner = np.array([[np.dot(a, b) for b in new_cols] for a in new_cols])

        gram = np.empty((m + 2, m + 2))
        gram[:m, :m] = self.gram
        gram[:m, m:] = cross
        gram[m:, :m] = cross.T
        gram[m:, m:] = corner

        self.gram = gram
        self.rhs = np.concatenate([self.rhs, [np.dot(c, self.x.samples) for c in new_cols]])
        self.columns.extend(new_cols)
        self.freqs.append(w)


    def pop(self):
        """Drop the most recently added frequency."""
        if not self.freqs:
            raise IndexError("No frequency to remove.")
        self.freqs.pop()
        del self.columns[-2:]
        self.gram = self.gram[:-2, :-2]
        self.rhs = self.rhs[:-2]


    def solve(self):
        if not self.freqs:
            return LinearCoefficients(())
        condition = float(np.linalg.cond(self.gram))
        logger.debug("Joint fit over %s frequencies, condition %.3g", len(self.freqs), condition)
        if not math.isfinite(condition) or condition > self.condition_limit:
            pair = _closest_pair(self.freqs)
            raise IllConditionedFitError(
                f"Normal matrix is ill-conditioned (condition {condition:.3g}); closest frequencies {pair}.",
                frequencies=pair,
                condition=condition,
            )
        try:
            factor = cho_factor(self.gram, lower=True, check_finite=False)
        except LinAlgError as e:
            pair = _closest_pair(self.freqs)
            raise IllConditionedFitError(f"Normal matrix is not positive definite: {e}", frequencies=pair) from e
        return LinearCoefficients.from_vector(cho_solve(factor, self.rhs, check_finite=False))


    def model(self, coeffs):
        if not self.columns:
            return np.zeros(self.x.n_samples)
        return np.column_stack(self.columns) @ coeffs.as_vector()


    def residual(self, coeffs):
        return Signal(self.x.samples - self.model(coeffs))


class ToneFitService:

    def make_basis(self, w, n_samples):
        if not 0.0 < w < math.pi:
            raise ValueError(f"Basis frequency {w} lies outside (0, pi).")
        if n_samples < 2:
            raise ValueError("n_samples must be >= 2.")
        phase = w * np.arange(n_samples, dtype=float)
        return SinCosBasis(frequency=float(w), sin_vector=np.sin(phase), cos_vector=np.cos(phase))


    def joint_ls_fit(self, x, freqs, min_separation=None, condition_limit=CONDITION_LIMIT):
        """
        Least-squares alpha/beta for every frequency at once:
        lambda = argmin || x - Y lambda ||^2, solved from the normal equations by Cholesky.
        """
        freqs = [float(w) for w in freqs]
        if not freqs:
            raise ValueError("joint_ls_fit needs at least one frequency.")
        if 2 * len(freqs) > x.n_samples:
            raise ValueError(f"Cannot fit {len(freqs)} tones to {x.n_samples} samples (needs 2M <= N).")

        acc = GramAccumulator(x, min_separation=min_separation, condition_limit=condition_limit, tone_fit_service=self)
        for w in freqs:
            acc.add(w)
        coeffs = acc.solve()
        return coeffs, tones_from_coefficients(coeffs, freqs)


    def subtract_model(self, x, coeffs, freqs):
        freqs = list(freqs)
        if len(coeffs) != len(freqs):
            raise ValueError(f"{len(coeffs)} coefficient pairs do not match {len(freqs)} frequencies.")
        out = np.array(x.samples, dtype=float)
        for w, (alpha, beta) in zip(freqs, coeffs.pairs):
            basis = self.make_basis(w, x.n_samples)
            out -= alpha * basis.sin_vector + beta * basis.cos_vector
        return Signal(out)
