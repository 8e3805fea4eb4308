import numpy as np
import pytest

from fsi import codec
from fsi.errors import FsiFormatError
from fsi.fsi_index import BuildConfig, FsiIndex
from fsi.set_store import SetCollection


def _collection():
    rng = np.random.default_rng(5)
    return SetCollection.from_sets(
        [np.unique(rng.integers(0, 300, size=rng.integers(0, 60)))
         for _ in range(15)])


@pytest.mark.parametrize("mode", ["explicit", "compact"])
def test_round_trip_is_bit_identical(mode, tmp_path):
    col = _collection()
    index = FsiIndex.build(col, BuildConfig(leaf_threshold=2, subset_mode=mode))
    data = codec.dumps(index)
    assert data[:4] == b"FSI1"

    path = tmp_path / "index.fsi"
    codec.save(index, str(path))
    loaded = codec.load(str(path))
    assert codec.dumps(loaded) == data
    assert loaded.config == index.config
    loaded.validate()
    for i in range(col.m):
        for j in range(col.m):
            assert loaded.intersect(i, j) == index.intersect(i, j)
            assert loaded.intersection_size(i, j) == index.intersection_size(i, j)


def test_empty_index_round_trip():
    index = FsiIndex.build(SetCollection.from_sets([]))
    data = codec.dumps(index)
    assert codec.dumps(codec.loads(data)) == data


def test_bad_magic():
    with pytest.raises(FsiFormatError):
        codec.loads(b"FSI2" + b"\0" * 40)


def test_bad_version():
    data = bytearray(codec.dumps(FsiIndex.build(_collection())))
    data[4] = 9
    with pytest.raises(FsiFormatError) as e_info:
        codec.loads(bytes(data))
    assert "version" in str(e_info.value)


def test_truncated_container():
    data = codec.dumps(FsiIndex.build(_collection()))
    with pytest.raises(FsiFormatError):
        codec.loads(data[:len(data) // 2])


def test_trailing_bytes():
    data = codec.dumps(FsiIndex.build(_collection()))
    with pytest.raises(FsiFormatError):
        codec.loads(data + b"\0")
