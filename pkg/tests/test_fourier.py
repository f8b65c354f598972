import pytest
import sys
import os
import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.augment import (IdAllocator, amplitude_mix, augment_batch, build_augmented_pool, dft2, fft2, idft2,
                         ifft2, mix_amplitude, mix_spectrum)
from src.data import Origin, Sample
from src.utils.errors import ContractError


def _sample(sample_id: str, features: np.ndarray, label: int = 0, domain: str = "A") -> Sample:
    return Sample(id=sample_id, features=features, label=label, domain_id=domain)


def _batch(rng: np.random.Generator, n: int, shape=(3, 8, 8)):
    return [_sample(f"s{i}", rng.uniform(0.1, 0.9, size=shape), label=i % 3, domain="AB"[i % 2])
            for i in range(n)]


def test_constant_image_spectrum():
    """Test that a constant 2x2 image has DC amplitude 4 and nothing else."""
    spectrum = dft2(np.ones((2, 2)))
    expected = np.zeros((2, 2))
    expected[0, 0] = 4.0
    np.testing.assert_allclose(spectrum.amplitude, expected, atol=1e-12)


def test_impulse_spectrum_is_flat():
    """Test that an impulse at the origin has unit amplitude at every bin."""
    image = np.zeros((4, 4))
    image[0, 0] = 1.0
    np.testing.assert_allclose(dft2(image).amplitude, np.ones((4, 4)), atol=1e-12)


@pytest.mark.parametrize("shape", [(8, 8), (3, 16, 16), (5, 6), (2, 7, 4)])
def test_fft2_matches_numpy(shape):
    """Test radix-2 and fallback transforms against numpy.fft."""
    x = np.random.default_rng(0).normal(size=shape)
    np.testing.assert_allclose(fft2(x), np.fft.fft2(x), atol=1e-9)
    np.testing.assert_allclose(np.real(ifft2(fft2(x))), x, atol=1e-12)


def test_phase_range():
    """Test that phases lie in (-π, π]."""
    spectrum = dft2(np.random.default_rng(1).normal(size=(8, 8)))
    assert np.all(spectrum.phase > -np.pi)
    assert np.all(spectrum.phase <= np.pi)


def test_parseval():
    """Test energy preservation of the unnormalized transform."""
    x = np.random.default_rng(2).uniform(size=(3, 16, 16))
    energy = np.sum(x ** 2)
    assert np.sum(dft2(x).amplitude ** 2) / x[0].size == pytest.approx(energy, rel=1e-8)


def test_idft2_accepts_pair_and_complex():
    """Test both inverse inputs reconstruct the image."""
    x = np.random.default_rng(3).uniform(size=(4, 4))
    np.testing.assert_allclose(idft2(dft2(x)), x, atol=1e-12)
    np.testing.assert_allclose(idft2(fft2(x)), x, atol=1e-12)


def test_empty_image_is_rejected():
    """Test that an empty image is a contract error."""
    with pytest.raises(ContractError):
        dft2(np.zeros((0, 4)))
    with pytest.raises(ContractError):
        dft2(np.zeros(4))


def test_mix_lambda_zero_is_identity():
    """Test that λ = 0 returns the phase parent."""
    rng = np.random.default_rng(4)
    x_i, x_j = rng.uniform(size=(3, 8, 8)), rng.uniform(size=(3, 8, 8))
    np.testing.assert_allclose(mix_amplitude(x_i, x_j, 0.0), x_i, atol=1e-8)


def test_mix_lambda_one_takes_amplitude_keeps_phase():
    """Test that λ = 1 uses A_j with the phase of x_i."""
    rng = np.random.default_rng(5)
    x_i, x_j = rng.uniform(size=(8, 8)), rng.uniform(size=(8, 8))
    spectrum = dft2(mix_amplitude(x_i, x_j, 1.0, clip=False))
    np.testing.assert_allclose(spectrum.amplitude, dft2(x_j).amplitude, atol=1e-8)


def test_mix_constant_images():
    """Test constants 1.0 and 3.0 mixed at λ = 0.5 give 2.0."""
    mixed = mix_amplitude(np.ones((2, 2)), np.full((2, 2), 3.0), 0.5, clip=False)
    np.testing.assert_allclose(mixed, np.full((2, 2), 2.0), atol=1e-12)


def test_amplitude_interpolation_is_exact():
    """Test the mixed amplitude before the inverse transform."""
    rng = np.random.default_rng(6)
    x_i, x_j = rng.uniform(size=(3, 8, 8)), rng.uniform(size=(3, 8, 8))
    for lam in (0.25, 0.5, 0.75):
        spectrum = mix_spectrum(x_i, x_j, lam)
        expected = (1 - lam) * dft2(x_i).amplitude + lam * dft2(x_j).amplitude
        np.testing.assert_allclose(spectrum.amplitude, expected, atol=1e-12)


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_phase_preserved(lam):
    """Test that the mixed image keeps the phase of its first parent."""
    rng = np.random.default_rng(7)
    x_i, x_j = rng.uniform(size=(8, 8)), rng.uniform(size=(8, 8))
    mixed = dft2(mix_amplitude(x_i, x_j, lam, clip=False))
    original = dft2(x_i)
    significant = mixed.amplitude > 1e-9
    difference = np.angle(np.exp(1j * (mixed.phase - original.phase)))
    assert np.all(np.abs(difference[significant]) < 1e-6)


def test_mix_rejects_bad_inputs():
    """Test shape mismatch and out-of-range λ."""
    with pytest.raises(ContractError):
        mix_amplitude(np.zeros((4, 4)), np.zeros((4, 5)), 0.5)
    with pytest.raises(ContractError):
        mix_amplitude(np.zeros((4, 4)), np.zeros((4, 4)), 1.5)


def test_amplitude_mix_sample_fields():
    """Test label, new domain and provenance of an augmented sample."""
    rng = np.random.default_rng(8)
    x_i = _sample("a", rng.uniform(size=(3, 4, 4)), label=2, domain="A")
    x_j = _sample("b", rng.uniform(size=(3, 4, 4)), label=5, domain="B")
    out = amplitude_mix(x_i, x_j, 0.3, IdAllocator())
    assert out.label == 2
    assert out.origin is Origin.AUGMENTED
    assert out.domain_id not in ("A", "B")
    assert out.provenance.parent_ids == ("a", "b")
    assert out.provenance.parent_domains == ("A", "B")
    assert out.provenance.lam == pytest.approx(0.3)
    assert np.all((out.features >= 0.0) & (out.features <= 1.0))


def test_augment_batch_one_new_domain_per_sample():
    """Test that a batch of 16 gives 16 augmented samples in 16 new domains."""
    batch = _batch(np.random.default_rng(9), 16)
    augmented = augment_batch(batch, np.random.default_rng(10), 1.0, IdAllocator())
    assert len(augmented) == 16
    assert len({s.domain_id for s in augmented}) == 16
    assert len({s.id for s in augmented}) == 16
    assert not {s.domain_id for s in augmented} & {"A", "B"}


def test_augment_batch_odd_size():
    """Test that an odd batch still yields one sample per input."""
    batch = _batch(np.random.default_rng(11), 5)
    augmented = augment_batch(batch, np.random.default_rng(12), 0.5, IdAllocator())
    assert len(augmented) == 5
    assert {s.provenance.parent_ids[0] for s in augmented} == {s.id for s in batch}


def test_augment_batch_eta_zero_copies_parents():
    """Test that η = 0 reproduces the phase parents."""
    batch = _batch(np.random.default_rng(13), 6)
    by_id = {s.id: s for s in batch}
    for sample in augment_batch(batch, np.random.default_rng(14), 0.0, IdAllocator()):
        np.testing.assert_allclose(sample.features, by_id[sample.provenance.parent_ids[0]].features, atol=1e-8)


def test_augment_batch_is_deterministic():
    """Test that a seeded generator replays the same augmented set."""
    batch = _batch(np.random.default_rng(15), 8)
    first = augment_batch(batch, np.random.default_rng(16), 1.0, IdAllocator())
    second = augment_batch(batch, np.random.default_rng(16), 1.0, IdAllocator())
    assert [s.id for s in first] == [s.id for s in second]
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.features, b.features)
        assert a.provenance == b.provenance


def test_augment_batch_errors():
    """Test batch size and η validation."""
    batch = _batch(np.random.default_rng(17), 2)
    with pytest.raises(ContractError):
        augment_batch(batch[:1], np.random.default_rng(0), 1.0, IdAllocator())
    with pytest.raises(ContractError):
        augment_batch(batch, np.random.default_rng(0), 1.5, IdAllocator())


def test_augmented_pool_prefix_property():
    """Test that a smaller pool is a prefix of a larger one under the same seed."""
    sources = {"A": _batch(np.random.default_rng(18), 6)}
    small = build_augmented_pool(sources, 4, np.random.default_rng(19), 1.0, IdAllocator())
    large = build_augmented_pool(sources, 10, np.random.default_rng(19), 1.0, IdAllocator())
    assert len(small) == 4 and len(large) == 10
    for a, b in zip(small, large):
        assert a.id == b.id
        np.testing.assert_array_equal(a.features, b.features)
    assert build_augmented_pool(sources, 0, np.random.default_rng(19), 1.0, IdAllocator()) == []
