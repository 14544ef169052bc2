import numpy as np
import pytest

from emowave import exceptions
from emowave.wavelets.filters import WaveletFilterPair, available_wavelets, load_filters, quadrature_mirror


def test_available_wavelets():
    # act
    wavelets = available_wavelets()

    # assert
    assert wavelets == ("db2", "db4", "haar")


@pytest.mark.parametrize("name", ["haar", "db2", "db4", " DB4 "])
def test_load_filters_is_orthonormal(name):
    # act
    filters = load_filters(name)

    # assert
    assert filters.name == name.strip().lower()
    assert np.isclose(np.dot(filters.lowpass_h, filters.lowpass_h), 1.0, atol=1e-10)
    assert np.isclose(filters.lowpass_h.sum(), np.sqrt(2.0), atol=1e-10)
    assert np.isclose(filters.highpass_g.sum(), 0.0, atol=1e-10)
    assert np.isclose(np.dot(filters.lowpass_h, filters.highpass_g), 0.0, atol=1e-10)


def test_load_filters_db4_has_eight_taps():
    # act
    filters = load_filters("db4")

    # assert
    assert filters.length == 8


def test_load_filters_unknown_wavelet():
    # act
    with pytest.raises(exceptions.UnknownWavelet) as unknown_wavelet:
        load_filters("sym20")

    # assert
    assert str(unknown_wavelet.value) == "Wavelet sym20 not found, available: db2, db4, haar"


def test_quadrature_mirror_haar():
    # act
    highpass = quadrature_mirror([1.0, 2.0, 3.0, 4.0])

    # assert
    np.testing.assert_array_equal(highpass, [4.0, -3.0, 2.0, -1.0])


def test_filters_are_read_only():
    # arrange
    filters = load_filters("haar")

    # act
    with pytest.raises(ValueError):
        filters.lowpass_h[0] = 1.0

    # assert
    assert filters.lowpass_h[0] == pytest.approx(1 / np.sqrt(2.0))


@pytest.mark.parametrize(
    "lowpass",
    [
        ([1.0, 1.0]),
        ([0.5, 0.5, 0.5]),
        ([1.0]),
    ],
)
def test_filter_pair_rejects_non_orthogonal(lowpass):
    # act
    with pytest.raises(exceptions.InvalidFilterBank):
        WaveletFilterPair.from_lowpass("broken", lowpass)


def test_filter_pair_rejects_wrong_mirror():
    # arrange
    lowpass = load_filters("db2").lowpass_h

    # act
    with pytest.raises(exceptions.InvalidFilterBank) as invalid_filter_bank:
        WaveletFilterPair(name="db2", lowpass_h=lowpass, highpass_g=-quadrature_mirror(lowpass)[::-1])

    # assert
    assert str(invalid_filter_bank.value) == "db2: g is not the quadrature mirror of h"
