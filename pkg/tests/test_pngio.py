import io

import numpy as np
import pytest
from PIL import Image

from dfhc.errors import DataError
from dfhc.fold import ImageRaster
from dfhc.pngio import decode_png_u8, encode_png, quantize_u8, read_png, write_png


def random_raster(seed, shape):
    return ImageRaster(np.random.default_rng(seed).uniform(size=shape))


class TestQuantize:
    def test_endpoints(self):
        img = ImageRaster(np.array([[0.0, 1.0]])[:, :, None])
        np.testing.assert_array_equal(quantize_u8(img)[0, :, 0], [0, 255])

    def test_round_half_up(self):
        img = ImageRaster(np.array([[0.5]])[:, :, None])
        assert quantize_u8(img)[0, 0, 0] == 128

    def test_matches_floor_rule(self):
        img = random_raster(0, (16, 16, 3))
        expected = np.floor(img.data * 255.0 + 0.5).astype(np.uint8)
        np.testing.assert_array_equal(quantize_u8(img), expected)


class TestRoundTrip:
    @pytest.mark.parametrize("shape", [(8, 8, 1), (8, 8, 3), (5, 9, 3)])
    def test_own_reader(self, shape):
        img = random_raster(1, shape)
        decoded = decode_png_u8(encode_png(img))
        np.testing.assert_array_equal(decoded, quantize_u8(img))

    @pytest.mark.parametrize("shape", [(12, 12, 1), (12, 12, 3)])
    def test_pillow_oracle(self, shape):
        # an independent decoder must see exactly the quantized pixels
        img = random_raster(2, shape)
        with Image.open(io.BytesIO(encode_png(img))) as pil:
            arr = np.asarray(pil)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        np.testing.assert_array_equal(arr, quantize_u8(img))

    def test_reader_handles_foreign_filters(self, tmp_path):
        # Pillow picks its own scanline filters; our reader must undo them
        rng = np.random.default_rng(3)
        arr = rng.integers(0, 256, size=(33, 17, 3), dtype=np.uint8)
        path = tmp_path / "foreign.png"
        Image.fromarray(arr, mode="RGB").save(path, optimize=True)
        got = decode_png_u8(path.read_bytes(), context=str(path))
        np.testing.assert_array_equal(got, arr)

    def test_file_round_trip(self, tmp_path):
        img = random_raster(4, (10, 10, 3))
        path = tmp_path / "img.png"
        write_png(path, img)
        back = read_png(path)
        np.testing.assert_array_equal(quantize_u8(back), quantize_u8(img))
        assert (back.height, back.width, back.channels) == (10, 10, 3)


class TestErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no_such"):
            read_png(tmp_path / "no_such.png")

    def test_not_a_png(self):
        with pytest.raises(DataError, match="not a PNG"):
            decode_png_u8(b"plainly not a png file")

    def test_unsupported_color_type(self, tmp_path):
        path = tmp_path / "paletted.png"
        arr = np.zeros((4, 4, 3), dtype=np.uint8)
        Image.fromarray(arr, mode="RGB").convert("P").save(path)
        with pytest.raises(DataError, match="only 8-bit"):
            decode_png_u8(path.read_bytes(), context=str(path))

    def test_deterministic_bytes(self):
        img = random_raster(5, (16, 16, 3))
        assert encode_png(img) == encode_png(img)
