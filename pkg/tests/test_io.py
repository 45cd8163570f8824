import struct

import numpy as np

from symgauge import grid as g
from symgauge.grid import Grid, VectorField
from symgauge.io import MAGIC, CsvSeries, read_csv, read_snapshot, write_snapshot


def test_snapshot_round_trip(tmp_path):
    gr = Grid((8, 6, 4), (1.0, 2.0, 3.0), "central2")
    v = g.random_vector(gr, np.random.default_rng(0))
    path = write_snapshot(tmp_path / "v.sgf", v, "velocity", 1.25)
    back, name, t = read_snapshot(path)
    assert isinstance(back, VectorField)
    assert back.grid == gr and name == "velocity" and t == 1.25
    np.testing.assert_array_equal(back.data, v.data)
    assert "backend = central2" in (tmp_path / "v.sgf.txt").read_text()


def test_snapshot_header_layout(tmp_path):
    gr = Grid((8, 8), (1.0, 1.0))
    s = gr.scalar(lambda x, y: np.sin(2 * np.pi * x))
    path = write_snapshot(tmp_path / "s.sgf", s, "phi", 0.5)
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    ndim, ncomp = struct.unpack_from("<II", raw, 8)
    assert (ndim, ncomp) == (2, 1)
    assert struct.unpack_from("<3I", raw, 16) == (8, 8, 1)
    assert struct.unpack_from("<d", raw, 52)[0] == 0.5
    (nlen,) = struct.unpack_from("<I", raw, 60)
    assert raw[64 : 64 + nlen] == b"phi"
    assert len(raw) == 64 + nlen + 8 * 64
    data = np.frombuffer(raw, "<f8", offset=64 + nlen).reshape(8, 8)
    np.testing.assert_array_equal(data, s.data)


def test_csv_round_trip(tmp_path):
    with CsvSeries(tmp_path / "d.csv", ("t", "a")) as csv:
        csv.write({"t": 0.0, "a": 1 / 3})
        csv.write([0.1, 2.0])
    cols, arr = read_csv(tmp_path / "d.csv")
    assert cols == ["t", "a"]
    assert arr[0, 1] == 1 / 3 and arr.shape == (2, 2)
