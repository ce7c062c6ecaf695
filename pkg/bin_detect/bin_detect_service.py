import numpy as np

from constants import DEGENERATE_SCALE, ON_BIN_RATIO
from models import BinCandidate, TWO_PI


class BinDetectService:
    """
    Two-bin sinc-leakage estimator. For every adjacent pair (X_k, X_{k+1}):

        delta_k = |X_k| / (|X_k| + |X_{k+1}|)
        theta_k = sin(pi * delta_k)
        A_k     = (pi / theta_k) * |X_k| |X_{k+1}| / (|X_k| + |X_{k+1}|)

    A tone at 2 pi (k + 1 - delta_k) / N is implied. A_k only ranks pairs; reported
    amplitudes come from the least-squares fit.
    """

    def _candidate_arrays(self, spectrum):
        if spectrum.bins.size < 2:
            raise ValueError("Bin detection needs at least 2 spectrum bins.")
        mags = np.abs(spectrum.bins)
        left, right = mags[:-1], mags[1:]
        denom = left + right

        eta = DEGENERATE_SCALE * np.finfo(float).eps * max(float(mags.max()), np.finfo(float).tiny)
        live = denom >= eta
        safe = np.where(live, denom, 1.0)

        delta = np.clip(np.where(live, left / safe, 0.5), 0.0, 1.0)
        theta = np.sin(np.pi * delta)

        # tone on a bin: the closed form is 0/0, its limit is the larger magnitude
        on_bin = live & (np.minimum(left, right) / safe < ON_BIN_RATIO)
        regular = live & ~on_bin
        amplitude = np.zeros_like(denom)
        amplitude[on_bin] = np.maximum(left, right)[on_bin]
        amplitude[regular] = np.pi / theta[regular] * left[regular] * right[regular] / denom[regular]

        k = np.arange(left.size)
        implied = TWO_PI * (k + 1 - delta) / spectrum.n_samples
        return delta, theta, amplitude, implied


    def _candidate(self, k, delta, theta, amplitude, implied):
        return BinCandidate(
            k=int(k),
            delta=float(delta[k]),
            theta=float(theta[k]),
            amplitude=float(amplitude[k]),
            implied_frequency=float(implied[k]),
        )


    def bin_candidates(self, spectrum):
        arrays = self._candidate_arrays(spectrum)
        return [self._candidate(k, *arrays) for k in range(arrays[0].size)]


    def select_bin(self, candidates):
        if not candidates:
            raise ValueError("Cannot select a bin from an empty candidate list.")
        # ties go to the smaller k
        return min(candidates, key=lambda c: (-c.amplitude, c.k))


    def strongest_bin(self, spectrum):
        """select_bin(bin_candidates(spectrum)) without materializing every candidate."""
        arrays = self._candidate_arrays(spectrum)
        k = int(np.argmax(arrays[2]))  # first maximum, i.e. smallest k
        return self._candidate(k, *arrays)
