import itertools

import numpy as np
import pytest

from muxjba.demod import (
    DemodWindow,
    DemodulationError,
    default_window,
    demodulate,
    demodulate_many,
    digitize,
    tone,
)
from muxjba.params import CHANNEL_OFFSETS


def test_unit_tone_recovers_phase():
    x = digitize(tone(8e6, 4000, phase=0.7), [8e6])
    iq = demodulate(x, 8e6, DemodWindow(0.0, 1e-6))
    assert abs(iq.complex - np.exp(0.7j)) < 1e-9


def test_orthogonality_leakage_below_60dB():
    window = default_window()
    n = int(round(window.t_stop * 2e9)) + 10
    for i, j in itertools.permutations(range(4), 2):
        x = digitize(tone(CHANNEL_OFFSETS[j], n), CHANNEL_OFFSETS)
        leak = abs(demodulate_many(x, CHANNEL_OFFSETS[i], window))
        assert 20 * np.log10(max(leak, 1e-300)) < -60


def test_out_of_band_channel_rejected():
    with pytest.raises(DemodulationError):
        digitize(tone(1.2e9, 10), [1.2e9])


def test_window_outside_record():
    with pytest.raises(DemodulationError):
        demodulate_many(np.zeros(100), 8e6, DemodWindow(0.0, 1e-6))


def test_default_window_position():
    w = default_window(25e-9, 100e-9)
    assert w.t_start == pytest.approx(425e-9)
    assert w.t_stop - w.t_start == pytest.approx(1e-6)
