"""Two-dimensional discrete Fourier transform over the last two axes.

Power-of-two extents use an iterative radix-2 transform; any other extent
falls back to the O(N^2) DFT matrix. Both are unnormalized in the forward
direction.
"""
from dataclasses import dataclass

import numpy as np

from ..utils.errors import ContractError


@dataclass
class SpectrumPair:
    """Modulus and argument of a 2-D spectrum, per channel."""
    amplitude: np.ndarray
    phase: np.ndarray

    def to_complex(self) -> np.ndarray:
        return self.amplitude * np.exp(1j * self.phase)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    index = np.arange(n)
    reversed_index = np.zeros(n, dtype=np.int64)
    for bit in range(bits):
        reversed_index |= ((index >> bit) & 1) << (bits - 1 - bit)
    return reversed_index


def _radix2(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    out = a[..., _bit_reversal(n)].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(out.shape[:-1] + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        out = np.concatenate([even + odd, even - odd], axis=-1).reshape(out.shape)
        size *= 2
    return out


def _naive(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    k = np.arange(n)
    matrix = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return a.astype(np.complex128) @ matrix.T


def fft_last_axis(a: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along the last axis."""
    n = a.shape[-1]
    return _radix2(a) if _is_power_of_two(n) else _naive(a)


def fft2(features: np.ndarray) -> np.ndarray:
    """Complex forward 2-D DFT of each (H, W) plane."""
    features = np.asarray(features)
    if features.ndim < 2 or features.size == 0:
        raise ContractError(f"need a non-empty image, got shape {features.shape}")
    rows = fft_last_axis(features)
    return np.swapaxes(fft_last_axis(np.swapaxes(rows, -1, -2)), -1, -2)


def ifft2(spectrum: np.ndarray) -> np.ndarray:
    """Inverse of fft2 (complex result)."""
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    height, width = spectrum.shape[-2:]
    return np.conj(fft2(np.conj(spectrum))) / (height * width)


def dft2(features: np.ndarray) -> SpectrumPair:
    """Amplitude and phase of the forward transform; phase lies in (-π, π]."""
    spectrum = fft2(features)
    phase = np.angle(spectrum)
    phase = np.where(phase <= -np.pi, phase + 2 * np.pi, phase)
    return SpectrumPair(amplitude=np.abs(spectrum), phase=phase)


def idft2(spectrum) -> np.ndarray:
    """Real image from a SpectrumPair or a complex spectrum."""
    if isinstance(spectrum, SpectrumPair):
        spectrum = spectrum.to_complex()
    return np.real(ifft2(spectrum))
