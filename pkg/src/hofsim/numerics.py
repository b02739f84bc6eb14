"""Shared dense linear algebra, Bessel evaluation and FFT primitives.

All frequencies entering or leaving this module are plain physical units:
angular frequencies are rad/s, FFT axes are Hz.  The FFT frequency axis is
the standard DFT axis (a tone exp(-2j*pi*f0*t) lands in the -f0 bin); the
energy-reading sign convention (peaks at +E/2pi) is applied downstream by
the spectroscopy layer, which negates the axis.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import j0 as _j0, j1 as _j1

BESSEL_ORDERS = (-1, 0, 1)
BESSEL_MAX_ARG = 50.0


class UnsupportedBesselOrder(ValueError):
    """Raised for Bessel orders outside the sideband set {-1, 0, 1}."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum of a Hermitian matrix.

    eigenvalues are real and ascending; eigenvectors[:, j] is the
    orthonormal eigenvector belonging to eigenvalues[j].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def hermitian_from_upper(upper: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle onto the lower one.

    The result satisfies H[j, i] == conj(H[i, j]) exactly (the mirror is a
    conjugation, never a re-rounded sum), and the diagonal is forced real.
    """
    upper = np.asarray(upper, dtype=complex)
    if upper.ndim != 2 or upper.shape[0] != upper.shape[1]:
        raise ValueError("expected a square matrix")
    h = np.triu(upper, k=1)
    h = h + h.conj().T
    h[np.diag_indices_from(h)] = np.real(np.diag(upper))
    return h


def eig_hermitian(h: np.ndarray) -> EigenDecomposition:
    """Diagonalize a dense Hermitian matrix.

    Returns ascending eigenvalues and an orthonormal eigenbasis.  Rejects
    matrices with non-finite entries.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind for the sideband orders -1, 0, 1.

    Valid for |x| <= 50; J_{-1}(x) = -J_1(x).
    """
    if order not in BESSEL_ORDERS:
        raise UnsupportedBesselOrder(
            f"order {order} not supported; only {BESSEL_ORDERS} occur in the drive"
        )
    if abs(x) > BESSEL_MAX_ARG:
        raise ValueError(f"|x| = {abs(x)} exceeds supported range {BESSEL_MAX_ARG}")
    if order == 0:
        return float(_j0(x))
    value = float(_j1(x))
    return -value if order == -1 else value


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1 << (int(n) - 1).bit_length()


def fft_power(series: np.ndarray, dt: float, zero_pad_factor: int = 1):
    """Squared DFT amplitudes of a uniformly sampled complex series.

    The series is zero padded to the next power of two times
    zero_pad_factor.  Returns (frequencies, power) on the fftshifted
    standard axis in Hz (negative frequencies included); power[m] is
    |DFT(series)[m]|**2, so sum(power) == n_fft * sum(|series|**2).
    """
    series = np.asarray(series, dtype=complex)
    if series.ndim != 1 or series.size < 2:
        raise ValueError("need a 1-d series with at least two samples")
    if not np.all(np.isfinite(series)):
        raise ValueError("series has non-finite samples")
    if not (dt > 0.0):
        raise ValueError("dt must be positive")
    if int(zero_pad_factor) != zero_pad_factor or zero_pad_factor < 1:
        raise ValueError("zero_pad_factor must be an integer >= 1")
    n_fft = next_pow2(series.size) * int(zero_pad_factor)
    spectrum = np.fft.fft(series, n=n_fft)
    power = np.abs(spectrum) ** 2
    freqs = np.fft.fftfreq(n_fft, d=dt)
    order = np.fft.fftshift(np.arange(n_fft))
    return freqs[order], power[order]
