import numpy as np
import pytest

from palmid.dataset import (
    SPECTRA,
    Dataset,
    GrayImage,
    PalmSample,
    SplitSpec,
    generate_synthetic,
    load_dataset,
    load_image,
    parse_fraction,
    save_dataset,
    save_image,
    split,
)
from palmid.errors import (
    DimensionNotMultipleOf16,
    InvalidDimensions,
    InvalidParameter,
    InvalidSplit,
    MissingSpectrum,
    RaggedDataset,
    UnsupportedFormat,
)


def write_pgm(path, pixels):
    h, w = pixels.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + pixels.astype(np.uint8).tobytes())


def test_zero_image(tmp_path):
    write_pgm(tmp_path / "z.pgm", np.zeros((128, 128)))
    img = load_image(tmp_path / "z.pgm")
    assert (img.width, img.height) == (128, 128)
    assert img.pixels.dtype == np.float64
    assert np.all(img.pixels == 0.0)


def test_saturated_image(tmp_path):
    write_pgm(tmp_path / "s.pgm", np.full((128, 128), 255))
    assert np.all(load_image(tmp_path / "s.pgm").pixels == 255.0)


def test_reference_writer_round_trip(tmp_path, rng):
    Image = pytest.importorskip("PIL.Image")
    px = rng.integers(0, 256, size=(32, 16), dtype=np.uint8)  # 16 wide, 32 tall
    Image.fromarray(px, mode="L").save(tmp_path / "ref.pgm")
    img = load_image(tmp_path / "ref.pgm")
    assert (img.width, img.height) == (16, 32)
    assert np.array_equal(img.pixels, px.astype(np.float64))

    bad = rng.integers(0, 256, size=(32, 17), dtype=np.uint8)
    Image.fromarray(bad, mode="L").save(tmp_path / "bad.pgm")
    with pytest.raises(DimensionNotMultipleOf16):
        load_image(tmp_path / "bad.pgm")


def test_header_comments_and_ascii(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n16 16\n# another\n255\n" + bytes(range(256)))
    assert load_image(tmp_path / "c.pgm").pixels[15, 15] == 255.0
    ascii_body = " ".join(str(v % 256) for v in range(256))
    (tmp_path / "a.pgm").write_text(f"P2\n16 16\n255\n{ascii_body}\n")
    assert np.array_equal(load_image(tmp_path / "a.pgm").pixels, load_image(tmp_path / "c.pgm").pixels)


@pytest.mark.parametrize(
    "payload",
    [b"P6\n16 16\n255\n" + bytes(768), b"P5\n16 16\n65535\n" + bytes(512), b"P5\n16 16\n255\n" + bytes(10), b"P5\n16"],
)
def test_unsupported_pgm(tmp_path, payload):
    (tmp_path / "x.pgm").write_bytes(payload)
    with pytest.raises(UnsupportedFormat):
        load_image(tmp_path / "x.pgm")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_save_load_round_trip(tmp_path, rng):
    img = GrayImage(rng.integers(0, 256, size=(48, 32)).astype(float))
    save_image(img, tmp_path / "r.pgm")
    assert load_image(tmp_path / "r.pgm") == img


def test_gray_image_validation():
    with pytest.raises(DimensionNotMultipleOf16):
        GrayImage(np.zeros((16, 20)))
    with pytest.raises(InvalidDimensions):
        GrayImage(np.zeros(16))


def _layout(root, persons, skip=None):
    for person, count in persons.items():
        d = root / person
        d.mkdir()
        for i in range(count):
            for spec in SPECTRA:
                if skip == (person, i, spec):
                    continue
                write_pgm(d / f"{i:02d}_{spec}.pgm", np.full((16, 16), i))


def test_load_dataset_counts(tmp_path):
    _layout(tmp_path, {"b": 3, "a": 3})
    ds = load_dataset(tmp_path)
    assert (ds.persons, ds.samples_per_person) == (2, 3)
    assert [s.key for s in ds.samples] == [("a", 0), ("a", 1), ("a", 2), ("b", 0), ("b", 1), ("b", 2)]
    assert ds.samples[1].spectra[3].pixels[0, 0] == 1.0


def test_load_dataset_missing_spectrum(tmp_path):
    _layout(tmp_path, {"a": 2, "b": 2}, skip=("b", 1, "nir"))
    with pytest.raises(MissingSpectrum):
        load_dataset(tmp_path)


def test_load_dataset_ragged(tmp_path):
    _layout(tmp_path, {"A": 3, "B": 2})
    with pytest.raises(RaggedDataset):
        load_dataset(tmp_path)


def test_save_dataset_round_trip(tmp_path):
    ds = generate_synthetic(persons=2, samples_per_person=3, width=16, height=16, noise_sigma=0, seed=1)
    save_dataset(ds, tmp_path)
    back = load_dataset(tmp_path)
    assert [s.key for s in back.samples] == [s.key for s in ds.samples]
    for a, b in zip(back.samples, ds.samples):
        for x, y in zip(a.spectra, b.spectra):
            assert np.array_equal(x.pixels, np.rint(y.pixels))


def test_synthetic_zero_noise_repeats_prototype():
    ds = generate_synthetic(persons=3, samples_per_person=4, width=32, height=16, noise_sigma=0, seed=3)
    for p in ds.person_ids():
        group = [s for s in ds.samples if s.person_id == p]
        for s in group[1:]:
            assert all(a == b for a, b in zip(s.spectra, group[0].spectra))


def test_synthetic_determinism():
    a = generate_synthetic(persons=3, samples_per_person=2, width=32, height=32, noise_sigma=5, seed=11)
    b = generate_synthetic(persons=3, samples_per_person=2, width=32, height=32, noise_sigma=5, seed=11)
    c = generate_synthetic(persons=3, samples_per_person=2, width=32, height=32, noise_sigma=5, seed=12)
    assert all(x == y for sa, sb in zip(a.samples, b.samples) for x, y in zip(sa.spectra, sb.spectra))
    assert not all(x == y for sa, sc in zip(a.samples, c.samples) for x, y in zip(sa.spectra, sc.spectra))


def test_synthetic_range_and_shape():
    ds = generate_synthetic(persons=2, samples_per_person=2, width=48, height=32, noise_sigma=100, seed=0)
    px = np.stack([img.pixels for s in ds.samples for img in s.spectra])
    assert px.shape[1:] == (32, 48)
    assert px.min() >= 0 and px.max() <= 255


def test_synthetic_class_separation():
    ds = generate_synthetic(persons=50, samples_per_person=12, width=128, height=128, noise_sigma=8, seed=42)
    x = np.stack([np.stack([i.pixels for i in s.spectra]).ravel() for s in ds.samples]).astype(np.float32)
    person = np.repeat(np.arange(50), 12)
    sq = (x**2).sum(axis=1)
    dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2 * x @ x.T, 0))
    same = person[:, None] == person[None, :]
    off_diag = ~np.eye(len(x), dtype=bool)
    within = dist[same & off_diag].mean()
    between = dist[~same].mean()
    assert within < between


@pytest.mark.parametrize(
    "kwargs, exc",
    [
        (dict(persons=1), InvalidParameter),
        (dict(noise_sigma=-1), InvalidParameter),
        (dict(width=20), InvalidDimensions),
        (dict(height=0), InvalidDimensions),
    ],
)
def test_synthetic_errors(kwargs, exc):
    args = dict(persons=2, samples_per_person=2, width=16, height=16, noise_sigma=1, seed=0)
    args.update(kwargs)
    with pytest.raises(exc):
        generate_synthetic(**args)


def _fake_dataset(persons, per_person):
    img = GrayImage(np.zeros((16, 16)))
    return Dataset(tuple(PalmSample(f"p{p:03d}", i, (img,) * 4) for p in range(persons) for i in range(per_person)))


def test_split_paper_fraction():
    ds = _fake_dataset(500, 12)
    train, test = split(ds, SplitSpec(4))
    assert (len(train), len(test)) == (2000, 4000)
    assert {s.sample_index for s in train} == {0, 1, 2, 3}


@pytest.mark.parametrize("count", [0, 12, 13])
def test_split_invalid(count):
    with pytest.raises(InvalidSplit):
        split(_fake_dataset(3, 12), SplitSpec(count))


@pytest.mark.parametrize("spec", [SplitSpec(1), SplitSpec(5), SplitSpec(3, seed=9), SplitSpec(11, seed=0)])
def test_split_partition(spec):
    ds = _fake_dataset(7, 12)
    train, test = split(ds, spec)
    tk = {s.key for s in train}
    sk = {s.key for s in test}
    assert not tk & sk
    assert tk | sk == {s.key for s in ds.samples}
    assert len(train) + len(test) == len(ds)
    for p in ds.person_ids():
        assert sum(s.person_id == p for s in train) == spec.train_count


def test_seeded_split_deterministic():
    ds = _fake_dataset(10, 12)
    a = split(ds, SplitSpec(4, seed=5))
    b = split(ds, SplitSpec(4, seed=5))
    assert [s.key for s in a[0]] == [s.key for s in b[0]]
    first_n = split(ds, SplitSpec(4))
    assert [s.key for s in a[0]] != [s.key for s in first_n[0]]


def test_parse_fraction():
    assert parse_fraction("4/12") == (4, 12)
    for bad in ("4", "12/4", "a/b", "0/12"):
        with pytest.raises(InvalidParameter):
            parse_fraction(bad)


def test_pillow_formats(tmp_path, rng):
    Image = pytest.importorskip("PIL.Image")
    px = rng.integers(0, 256, size=(16, 32), dtype=np.uint8)
    Image.fromarray(px, mode="L").save(tmp_path / "g.bmp")
    assert np.array_equal(load_image(tmp_path / "g.bmp").pixels, px)
    Image.fromarray(np.stack([px] * 3, axis=-1), mode="RGB").save(tmp_path / "c.png")
    with pytest.raises(UnsupportedFormat):
        load_image(tmp_path / "c.png")
