import logging
import os
import re
from io import StringIO

import numpy as np
import pandas as pd

from decomposer.decomposer_service import DecomposerService
from decomposer.decomposer_utilities import DecomposerUtilities
from models import InputDocumentError, NoiseSpec, Signal, ToneParams
from signal_model.signal_model_service import SignalModelService
from spectrum.spectrum_service import SpectrumService


logger = logging.getLogger(__name__)

SAMPLE_RATE_HEADER = re.compile(r"^\s*#\s*sample_rate\s*=\s*(\S+)\s*$", re.IGNORECASE)

# (n_samples, [(bin position, amplitude, phase), ...])
SYNTH_PRESETS = {
    "single_tone": (1024, [(100.37, 1.0, 0.6)]),
    "two_tone": (2048, [(50.3, 1.0, 0.1), (120.75, 0.5, -0.7)]),
    "three_tone": (4096, [(80.21, 1.0, 0.3), (160.68, 0.7, -1.1), (411.33, 0.4, 2.0)]),
}


def _first_non_numeric_line(text):
    """(1-based line number, value) of the first data line that does not parse as a number."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        value = line.split("#", 1)[0].strip()
        if value and pd.isna(pd.to_numeric(value, errors="coerce")):
            return lineno, value
    return None


class CliService:
    def __init__(self):
        self.decomposer = DecomposerService()
        self.utils = DecomposerUtilities()
        self.signals = SignalModelService()
        self.spectrum = SpectrumService()


    # ------------ input -----------------

    def parse_samples_text(self, text):
        """
        One sample per line, '#' starts a comment, '# sample_rate=<Hz>' sets the rate.
        Returns (Signal, sample_rate or None).
        """
        sample_rate = None
        for line in text.splitlines():
            m = SAMPLE_RATE_HEADER.match(line)
            if m:
                try:
                    sample_rate = float(m.group(1))
                except ValueError:
                    raise InputDocumentError(f"Invalid sample_rate header: {line.strip()!r}")
                if not (np.isfinite(sample_rate) and sample_rate > 0):
                    raise InputDocumentError(f"sample_rate must be a positive number, got {m.group(1)!r}.")

        try:
            df = pd.read_csv(
                StringIO(text),
                comment="#",
                header=None,
                skip_blank_lines=True,
                float_precision="round_trip",
            )
        except pd.errors.EmptyDataError:
            raise InputDocumentError("Input contains no samples.")
        except pd.errors.ParserError as e:
            raise InputDocumentError(f"Malformed input: {e}")

        if df.shape[1] != 1:
            raise InputDocumentError(f"Expected one sample per line, found {df.shape[1]} columns.")
        column = pd.to_numeric(df.iloc[:, 0], errors="coerce")
        if column.isna().any():
            located = _first_non_numeric_line(text)
            if located is None:
                bad = int(column.isna().to_numpy().argmax())
                raise InputDocumentError(f"Sample {bad + 1} is not a number: {df.iloc[bad, 0]!r}.")
            raise InputDocumentError(f"Line {located[0]} is not a number: {located[1]!r}.")
        values = column.to_numpy(dtype=float)
        if values.size < 2:
            raise InputDocumentError("At least 2 samples are required.")
        if not np.all(np.isfinite(values)):
            raise InputDocumentError("Samples must be finite.")
        return Signal(values), sample_rate


    def read_input(self, path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except (OSError, UnicodeDecodeError) as e:
            raise InputDocumentError(f"Cannot read {path}: {e}")
        return self.parse_samples_text(text)


    def preset_tones(self, preset):
        if preset not in SYNTH_PRESETS:
            raise InputDocumentError(f"Unknown preset '{preset}'. Expected one of {sorted(SYNTH_PRESETS)}.")
        n_samples, triples = SYNTH_PRESETS[preset]
        return n_samples, [ToneParams.at_bin(b, n_samples, a, p) for b, a, p in triples]


    def synthesize_preset(self, preset, noise=0.0, seed=0):
        n_samples, tones = self.preset_tones(preset)
        x = self.signals.synthesize(tones, n_samples, NoiseSpec(standard_deviation=noise, seed=seed))
        return x, tones


    # ------------ run -----------------

    def decompose_with_dump(self, x, cfg):
        """Decompose and keep every residual spectrum (initial, per iteration, final)."""
        spectra = []
        result = self.decomposer.decompose(x, cfg, on_spectrum=lambda i, s: spectra.append((i, s)))
        if not spectra or spectra[-1][0] < len(result.tones):
            spectra.append((len(result.tones), self.spectrum.dft(result.residual)))
        return result, spectra


    def spectrum_dump_frame(self, spectra):
        frames = []
        for iteration, spectrum in spectra:
            freqs, mags = self.spectrum.spectrum_frame(spectrum)
            frames.append(pd.DataFrame({
                "iteration": iteration,
                "frequency_rad_per_sample": freqs,
                "magnitude": mags,
            }))
        return pd.concat(frames, ignore_index=True)


    def write_results(self, document, out_path=None, spectra=None, dump_path=None):
        """
        Serialize the result document (and the spectrum dump when asked for) before
        touching the filesystem. If a later write fails, files written by this call
        are removed again so no partial output is left behind. Returns the JSON text.
        """
        text = self.utils.dumps(document)
        pending = []
        if dump_path is not None:
            pending.append((dump_path, self.spectrum_dump_frame(spectra).to_csv(index=False, float_format="%.17g")))
        if out_path is not None:
            pending.append((out_path, text))

        written = []
        try:
            for path, content in pending:
                with open(path, "w", encoding="utf-8", newline="") as f:
                    f.write(content)
                written.append(path)
        except OSError:
            for path in written:
                try:
                    os.remove(path)
                except OSError:
                    logger.warning("Could not remove partial output %s", path)
            raise
        return text
