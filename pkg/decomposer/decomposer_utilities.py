import json

import numpy as np

from constants import DEFAULT_EPSILON, DEFAULT_MAX_TONES, DEFAULT_RESIDUAL_FRACTION
from models import (
    DecompositionConfig, RefineConfig, Signal, InputDocumentError,
    MODE_BLIND, MODE_KNOWN, REFINE_ROBUST, FIT_JOINT,
)


class DecomposerUtilities:

    def build_config(
        self,
        tones=None,
        blind=False,
        epsilon=DEFAULT_EPSILON,
        max_tones=DEFAULT_MAX_TONES,
        residual_threshold=DEFAULT_RESIDUAL_FRACTION,
        refiner=REFINE_ROBUST,
        fit_strategy=FIT_JOINT,
        min_bin_separation=0,
    ):
        """Known mode when a tone count is given, blind mode otherwise."""
        if tones is not None and blind:
            raise ValueError("Choose either a tone count (known mode) or blind mode, not both.")
        refine = RefineConfig(epsilon=float(epsilon), method=refiner)
        common = dict(
            refine=refine,
            residual_energy_fraction=float(residual_threshold),
            min_bin_separation=int(min_bin_separation),
            fit_strategy=fit_strategy,
        )
        if tones is not None:
            return DecompositionConfig(
                mode=MODE_KNOWN, n_tones=int(tones), max_tones=max(int(max_tones), int(tones)), **common
            )
        return DecompositionConfig(mode=MODE_BLIND, max_tones=int(max_tones), **common)


    def config_from_request(self, data):
        mode = (data.get("mode") or (MODE_KNOWN if data.get("tones") is not None else MODE_BLIND)).lower()
        if mode not in (MODE_KNOWN, MODE_BLIND):
            raise ValueError(f"mode must be '{MODE_KNOWN}' or '{MODE_BLIND}'.")
        if mode == MODE_KNOWN and data.get("tones") is None:
            raise ValueError("Known mode needs 'tones'.")
        return self.build_config(
            tones=data.get("tones") if mode == MODE_KNOWN else None,
            blind=mode == MODE_BLIND,
            epsilon=data.get("epsilon", DEFAULT_EPSILON),
            max_tones=data.get("max_tones", DEFAULT_MAX_TONES),
            residual_threshold=data.get("residual_threshold", DEFAULT_RESIDUAL_FRACTION),
            refiner=data.get("refiner", REFINE_ROBUST),
            fit_strategy=data.get("fit_strategy", FIT_JOINT),
            min_bin_separation=data.get("min_bin_separation", 0),
        )


    def signal_from_samples(self, samples):
        if not isinstance(samples, (list, tuple)):
            raise InputDocumentError("'samples' must be a list of numbers.")
        try:
            arr = np.asarray(samples, dtype=float)
        except (TypeError, ValueError) as e:
            raise InputDocumentError(f"'samples' must be numeric: {e}") from e
        if arr.ndim != 1 or arr.size < 2:
            raise InputDocumentError("At least 2 samples are required.")
        if not np.all(np.isfinite(arr)):
            raise InputDocumentError("Samples must be finite.")
        return Signal(arr)


    def tone_to_dict(self, tone, sample_rate=None):
        out = {
            "frequency_rad_per_sample": tone.frequency,
            "amplitude": tone.amplitude,
            "phase_rad": tone.phase,
        }
        if sample_rate is not None:
            out["frequency_hz"] = tone.frequency_hz(sample_rate)
        return out


    def result_to_document(self, result, cfg, sample_rate=None, source=None):
        return {
            "source": source,
            "n_samples": result.residual.n_samples,
            "sample_rate": sample_rate,
            "tones": [self.tone_to_dict(t, sample_rate) for t in result.tones],
            "residual_energy": result.residual_energy,
            "original_energy": result.original_energy,
            "stop_reason": result.stop_reason,
            "config": cfg.to_dict(),
            "diagnostics": [rec.to_dict() for rec in result.diagnostics],
        }


    def dumps(self, document):
        """Python's float repr is the shortest string that round-trips, so the JSON is lossless."""
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
