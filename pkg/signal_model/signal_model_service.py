import logging
import math

import numpy as np

from models import Signal, ToneParams, NoiseSpec


logger = logging.getLogger(__name__)


class SignalModelService:
    """
    Observation model x_n = sum_m A_m sin(w_m n + theta_m) + v_n.
    Noise v_n is i.i.d. Gaussian drawn from numpy's PCG64 generator
    (np.random.default_rng(seed)), so a fixed seed reproduces the sequence bit for bit.
    """

    def synthesize(self, tones, n_samples, noise=None):
        n_samples = int(n_samples)
        if n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {n_samples}.")
        noise = noise or NoiseSpec()

        n = np.arange(n_samples, dtype=float)
        samples = np.zeros(n_samples, dtype=float)
        for tone in tones:
            if not isinstance(tone, ToneParams):
                tone = ToneParams(*tone)
            samples = samples + tone.amplitude * np.sin(tone.frequency * n + tone.phase)

        if noise.standard_deviation > 0.0:
            rng = np.random.default_rng(noise.seed)
            samples = samples + noise.standard_deviation * rng.standard_normal(n_samples)

        return Signal(samples)


    def signal_energy(self, x):
        samples = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
        return float(np.dot(samples, samples))


    def mean_power(self, tones):
        """Mean power of a noiseless mixture, sum A_m^2 / 2."""
        return sum(t.amplitude ** 2 for t in tones) / 2.0


    def noise_for_snr(self, tones, snr_db):
        """Noise sigma for SNR(dB) = 10 log10(mean signal power / sigma^2)."""
        if math.isinf(snr_db) and snr_db > 0:
            return 0.0
        power = self.mean_power(tones)
        return math.sqrt(power / 10.0 ** (snr_db / 10.0))
