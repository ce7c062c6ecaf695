import math

import numpy as np

from models import HalfSpectrum, SpectrumPoint, TWO_PI


class SpectrumService:
    """DFT of a whole signal and DTFT samples at single frequencies (rectangular window only)."""

    def dft(self, x):
        """X_k = sum_n x_n e^{-j 2 pi k n / N} for k = 0..floor(N/2), via the real FFT."""
        return HalfSpectrum(np.fft.rfft(x.samples), x.n_samples)


    def dtft_point(self, x, w):
        """X(w) = sum_n x_n e^{-j w n}, one O(N) pass."""
        if not math.isfinite(w):
            raise ValueError(f"DTFT frequency must be finite, got {w}.")
        n = np.arange(x.n_samples, dtype=float)
        return complex(np.dot(x.samples, np.exp(-1j * (w * n))))


    def evaluate(self, x, w):
        return SpectrumPoint(frequency=w, value=self.dtft_point(x, w))


    def sinc_kernel(self, w, n_samples):
        """S(w) = sin(Nw/2) / (Nw/2) with S(0) = 1 and exact zeros at w = 2 pi m / N."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1.")
        half = n_samples * w / 2.0
        if half == 0.0:
            return 1.0
        cycles = n_samples * w / TWO_PI
        if abs(cycles - round(cycles)) <= 1e-12 * max(1.0, abs(cycles)):
            return 0.0
        return math.sin(half) / half


    def parseval_energy(self, spectrum):
        """(1/N) sum over the full spectrum of |X_k|^2, rebuilt by conjugate symmetry."""
        power = np.abs(spectrum.bins) ** 2
        n = spectrum.n_samples
        # interior bins appear twice in the full spectrum; Nyquist only once when N is even
        weights = np.full(power.size, 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[-1] = 1.0
        return float(np.dot(weights, power) / n)


    def spectrum_frame(self, spectrum):
        """(frequency, magnitude) pairs as plain arrays for dumps."""
        return spectrum.frequencies, spectrum.magnitudes