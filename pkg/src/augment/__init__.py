"""Fourier amplitude augmentation."""
from .fourier import SpectrumPair, dft2, fft2, idft2, ifft2
from .mixing import (IdAllocator, amplitude_mix, augment_batch, build_augmented_pool,
                     mix_amplitude, mix_spectrum)

__all__ = [
    'SpectrumPair',
    'dft2',
    'fft2',
    'idft2',
    'ifft2',
    'IdAllocator',
    'amplitude_mix',
    'augment_batch',
    'build_augmented_pool',
    'mix_amplitude',
    'mix_spectrum',
]
