import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galmorph import synth
from galmorph.fractal import BINARY, box_masses
from galmorph.raster import load_image
from galmorph.standardize import binarize, galaxy_moments, principal_angle


def test_unrotated_ellipse_is_horizontal():
    p = synth.SynthParams(synth.ELLIPTICAL, axis_ratio=0.5, rotation=0.0)
    assert abs(principal_angle(galaxy_moments(binarize(synth.generate_galaxy(p))))) < 0.02


@pytest.mark.parametrize("label", synth.CLASSES)
def test_byte_determinism(label):
    p = synth.random_params(label, 17)
    assert synth.generate_galaxy(p).pixels.tobytes() == synth.generate_galaxy(p).pixels.tobytes()


def test_spiral_occupies_more_small_boxes_than_ellipse():
    for scale in (10.0, 18.0):
        e = synth.generate_galaxy(synth.SynthParams(synth.ELLIPTICAL, scale=scale))
        s = synth.generate_galaxy(synth.SynthParams(synth.SPIRAL, scale=scale, arms=2))
        assert box_masses(s, None, 4, mode=BINARY).occupied > box_masses(e, None, 4, mode=BINARY).occupied


def test_default_counts_dataset(synth_set):
    images, labels = synth_set
    assert len(images) == 131
    assert [labels.count(c) for c in synth.CLASSES] == [17, 104, 10]
    assert all(img.shape == (256, 256) for img in images)


def test_single_item_and_determinism():
    a = synth.generate_dataset((1, 0, 0), base_seed=3)
    b = synth.generate_dataset((1, 0, 0), base_seed=3)
    assert a[1] == [synth.ELLIPTICAL]
    assert a[0][0] == b[0][0]


def test_item_seeds_follow_index():
    images, _ = synth.generate_dataset((0, 2, 0), base_seed=10)
    assert images[1] == synth.generate_galaxy(synth.random_params(synth.SPIRAL, 11))


def test_invalid_counts():
    with pytest.raises(ValueError):
        synth.generate_dataset((0, 0, 0))
    with pytest.raises(ValueError):
        synth.generate_dataset((1, 2))


@pytest.mark.parametrize(
    "kwargs",
    [{"axis_ratio": 0.0}, {"axis_ratio": 1.2}, {"arms": 0}, {"blobs": 0}, {"noise": 0.3}, {"noise": -0.1}],
)
def test_param_invariants(kwargs):
    with pytest.raises(ValueError):
        synth.SynthParams(synth.SPIRAL, **kwargs)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(synth.CLASSES), st.integers(0, 10**6))
def test_random_params_are_valid(label, seed):
    p = synth.random_params(label, seed, size=64)
    assert 0 < p.axis_ratio <= 1 and 0 <= p.noise <= 0.2
    img = synth.generate_galaxy(p)
    assert img.shape == (64, 64)
    assert img.pixels.max() > 0


def test_write_dataset(tmp_path):
    images, labels = synth.generate_dataset((1, 1, 1), base_seed=7, size=64)
    manifest = synth.write_dataset(images, labels, tmp_path)
    rows = manifest.read_text().splitlines()
    assert rows[0] == "path,label"
    assert len(rows) == 4
    name, label = rows[1].split(",")
    assert load_image(tmp_path / name) == images[0] and label == labels[0]
