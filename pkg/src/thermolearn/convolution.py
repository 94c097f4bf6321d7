"""Linear convolution two ways: direct O(n^2) and via a radix-2 FFT.

The FFT here is written from scratch (iterative, in-place, bit-reversal
permutation followed by butterfly passes) so the fast route is fully
independent of the quadratic reference route. ``conv_naive`` delegates to
the library's direct implementation and serves as the oracle.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError, ValidationError

IMAG_RESIDUE_TOL = 1e-9

__all__ = ["fft_radix2", "ifft_radix2", "conv_naive", "conv_fft", "next_pow2"]


def _as_signal(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return arr


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n < 1:
        raise ValidationError(f"next_pow2: need n >= 1, got {n}")
    return 1 << (n - 1).bit_length()


def _bit_reverse_permute(a: np.ndarray) -> None:
    n = a.size
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            a[i], a[j] = a[j], a[i]


def _fft_inplace(a: np.ndarray, inverse: bool) -> None:
    # a must be complex128 with power-of-two length
    n = a.size
    _bit_reverse_permute(a)
    sign = 1.0 if inverse else -1.0
    length = 2
    while length <= n:
        half = length // 2
        angles = sign * 2.0 * math.pi * np.arange(half) / length
        twiddle = np.exp(1j * angles)
        blocks = a.reshape(n // length, length)
        odd = blocks[:, half:] * twiddle
        even = blocks[:, :half].copy()
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        length *= 2


def fft_radix2(x) -> np.ndarray:
    """Discrete Fourier transform of a power-of-two-length sequence.

    Uses X_k = sum_m x_m exp(-2 pi i k m / n) with no normalization.
    """
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("fft_radix2: need a non-empty 1-D sequence")
    n = arr.size
    if n & (n - 1):
        raise ValidationError(f"fft_radix2: length must be a power of two, got {n}")
    out = arr.copy()
    _fft_inplace(out, inverse=False)
    return out


def ifft_radix2(x) -> np.ndarray:
    """Inverse transform: conjugate twiddles and a 1/n scale."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("ifft_radix2: need a non-empty 1-D sequence")
    n = arr.size
    if n & (n - 1):
        raise ValidationError(f"ifft_radix2: length must be a power of two, got {n}")
    out = arr.copy()
    _fft_inplace(out, inverse=True)
    out /= n
    return out


def conv_naive(x, y) -> np.ndarray:
    """Direct linear convolution, length len(x) + len(y) - 1."""
    a = _as_signal(x, "x")
    b = _as_signal(y, "y")
    return np.convolve(a.astype(np.float64), b.astype(np.float64))


def conv_fft(x, y) -> np.ndarray:
    """Linear convolution via zero-padding to a power of two and the radix-2 FFT.

    The product theorem gives circular convolution at the padded size;
    padding to at least len(x) + len(y) - 1 makes it linear. The result is
    real: the imaginary residue is checked against ``IMAG_RESIDUE_TOL``
    and discarded.
    """
    a = _as_signal(x, "x")
    b = _as_signal(y, "y")
    out_len = a.size + b.size - 1
    size = next_pow2(out_len)
    fa = np.zeros(size, dtype=np.complex128)
    fb = np.zeros(size, dtype=np.complex128)
    fa[: a.size] = a
    fb[: b.size] = b
    _fft_inplace(fa, inverse=False)
    _fft_inplace(fb, inverse=False)
    fa *= fb
    _fft_inplace(fa, inverse=True)
    fa /= size
    result = fa[:out_len]
    residue = float(np.abs(result.imag).max()) if out_len else 0.0
    scale = max(1.0, float(np.abs(result.real).max()))
    if residue > IMAG_RESIDUE_TOL * scale:
        raise NumericalError(f"conv_fft: imaginary residue {residue:g} exceeds tolerance")
    return result.real.copy()
