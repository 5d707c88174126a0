import numpy as np
import pytest

from restyle.encoder import EncoderConfig
from restyle.imaging import Image
from restyle.mapping import ColorMapMatrix
from restyle.model import Model
from restyle.presets import (
    Preset,
    PresetFormatError,
    decode_preset,
    encode_preset,
    extract_preset,
    load_preset,
    save_preset,
)
from restyle.synth import make_image


def random_preset(seed=0, k=16, name="demo"):
    rng = np.random.default_rng(seed)
    return Preset(
        role="s",
        matrix=ColorMapMatrix(rng.normal(size=(k, k)).astype(np.float32)),
        name=name,
        fingerprint=bytes(rng.integers(0, 256, size=8, dtype=np.uint8)),
        created=1700000000 + seed,
    )


def identity_model(k=4):
    return Model.initialized(EncoderConfig(k=k, thumbnail_size=16, widths=(4, 8)))


class TestExtract:
    def test_deterministic_bytes(self):
        model = identity_model()
        style = make_image(32, 32, seed=1)
        p1 = extract_preset(style, model, "s1")
        p2 = extract_preset(style, model, "s1")
        b1, b2 = encode_preset(p1), encode_preset(p2)
        # created timestamps may differ; compare everything except that field
        assert b1[:-8] == b2[:-8]
        np.testing.assert_array_equal(p1.matrix.values, p2.matrix.values)

    def test_identity_weights_give_identity_matrix(self):
        model = identity_model(k=5)
        preset = extract_preset(make_image(16, 16, seed=2), model, "init")
        np.testing.assert_array_equal(preset.matrix.values, np.eye(5, dtype=np.float32))

    def test_fingerprint_binds_to_model(self):
        model = identity_model()
        preset = extract_preset(make_image(16, 16, seed=3), model, "x")
        assert preset.fingerprint == model.fingerprint

    def test_normalizer_extraction_takes_the_d_head(self):
        from restyle.presets import extract_normalizer

        model = identity_model()
        rng = np.random.default_rng(4)
        model.weights.head_d_w += rng.normal(0, 0.3, model.weights.head_d_w.shape).astype(np.float32)
        img = make_image(16, 16, seed=5)
        normalizer = extract_normalizer(img, model, "n")
        stylizer = extract_preset(img, model, "s")
        assert normalizer.role == "n" and stylizer.role == "s"
        # only head_d was perturbed, so the two heads disagree
        assert not np.array_equal(normalizer.matrix.values, stylizer.matrix.values)
        blob = encode_preset(normalizer)
        assert encode_preset(decode_preset(blob)) == blob


class TestFormat:
    @pytest.mark.parametrize("seed,name", [
        (0, "plain"),
        (1, ""),
        (2, "unicode name éè プリセット"),
        (3, "x" * 300),
    ])
    def test_roundtrip_bitwise(self, seed, name):
        preset = random_preset(seed=seed, name=name)
        blob = encode_preset(preset)
        back = decode_preset(blob)
        assert encode_preset(back) == blob
        assert back.name == name
        np.testing.assert_array_equal(back.matrix.values, preset.matrix.values)

    def test_random_matrix_roundtrips(self):
        for seed in range(10):
            k = int(np.random.default_rng(seed).integers(1, 24))
            preset = random_preset(seed=seed, k=k)
            assert encode_preset(decode_preset(encode_preset(preset))) == encode_preset(preset)

    def test_size_budget_k16(self):
        preset = random_preset(k=16, name="style")
        blob = encode_preset(preset)
        # header 8 + fingerprint 8 + matrix 1024 + name length 2 + name + timestamp 8
        assert len(blob) == 8 + 8 + 16 * 16 * 4 + 2 + len(b"style") + 8
        matrix_section = blob[16 : 16 + 1024]
        assert len(matrix_section) == 1024

    def test_bad_magic(self):
        blob = bytearray(encode_preset(random_preset()))
        blob[:4] = b"XXXX"
        with pytest.raises(PresetFormatError):
            decode_preset(bytes(blob))

    def test_version_mismatch(self):
        blob = bytearray(encode_preset(random_preset()))
        blob[4] = 9
        with pytest.raises(PresetFormatError):
            decode_preset(bytes(blob))

    def test_truncated(self):
        blob = encode_preset(random_preset())
        for cut in (3, 10, 40, len(blob) - 1):
            with pytest.raises(PresetFormatError):
                decode_preset(blob[:cut])

    def test_file_io(self, tmp_path):
        preset = random_preset(seed=7)
        path = tmp_path / "p.npre"
        save_preset(preset, path)
        back = load_preset(path)
        assert encode_preset(back) == encode_preset(preset)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_preset(tmp_path / "missing.npre")
