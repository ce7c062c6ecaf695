import os

# db.py builds its engine at import time
os.environ["TONESPLIT_DATABASE_URL"] = "sqlite://"

import pytest

from models import ToneParams
from signal_model.signal_model_service import SignalModelService


@pytest.fixture
def signals():
    return SignalModelService()


@pytest.fixture
def tone_signal(signals):
    """Build a noiseless signal from (bin position, amplitude, phase) triples."""
    def build(n_samples, *tones):
        params = [ToneParams.at_bin(b, n_samples, a, p) for b, a, p in tones]
        return signals.synthesize(params, n_samples), params
    return build


@pytest.fixture
def three_tone_scene():
    """Three tones >= 8 bins apart at N = 4096."""
    n = 4096
    return n, [
        ToneParams.at_bin(80.21, n, 1.0, 0.3),
        ToneParams.at_bin(160.68, n, 0.7, -1.1),
        ToneParams.at_bin(411.33, n, 0.4, 2.0),
    ]
