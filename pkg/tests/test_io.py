import numpy as np
import pytest

from taperfda import io
from taperfda.errors import DataError, EmptyFile, NonMonotoneTime, ParseError
from taperfda.fourier import Grid


def _write(path, text):
    path.write_text(text)
    return path


def test_wide_file_passes_through_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    grid = Grid(0.0, 365.0, 365)
    vals = rng.normal(size=(31, 365))
    lines = ["day," + ",".join(f"s{k}" for k in range(31))]
    for l, t in enumerate(grid.points):
        lines.append(repr(float(t)) + "," + ",".join(repr(float(v)) for v in vals[:, l]))
    f = _write(tmp_path / "c.csv", "\n".join(lines) + "\n")
    c = io.load_curves(f, grid)
    assert (c.grid.r, c.n_units, c.n_rep) == (365, 31, 1)
    assert not c.interpolated
    np.testing.assert_array_equal(c.values[0], vals)
    inferred = io.load_curves(f)
    assert inferred.grid.r == 365 and not inferred.interpolated
    np.testing.assert_allclose(inferred.grid.points, grid.points, atol=1e-9)


def test_nonuniform_times_are_interpolated(tmp_path):
    f = _write(tmp_path / "c.csv", "# comment\nt,a,b\n0,0,1\n1,1,1\n3,3,1\n4,4,1\n")
    c = io.load_curves(f)
    assert c.interpolated
    np.testing.assert_allclose(c.grid.points, [0, 4 / 3, 8 / 3, 4])
    np.testing.assert_allclose(c.values[0, 0], c.grid.points)  # linear data survives
    np.testing.assert_allclose(c.values[0, 1], 1.0)
    on_target = io.load_curves(f, Grid(0.0, 4.0, 8))
    assert on_target.interpolated and on_target.grid.r == 8


def test_replicate_column(tmp_path):
    f = _write(tmp_path / "c.csv", "t,replicate,a,b\n1,r1,1,2\n2,r1,3,4\n1,r2,5,6\n2,r2,7,8\n")
    c = io.load_curves(f)
    assert c.values.shape == (2, 2, 2)
    np.testing.assert_array_equal(c.values[1], [[5, 7], [6, 8]])
    bad = _write(tmp_path / "d.csv", "t,replicate,a\n1,r1,1\n2,r1,3\n1,r2,5\n3,r2,7\n")
    with pytest.raises(DataError):
        io.load_curves(bad)


def test_parse_errors_name_the_cell(tmp_path):
    f = _write(tmp_path / "c.csv", "t,a,b\n1,0.5,1\n2,oops,1\n")
    with pytest.raises(ParseError) as err:
        io.load_curves(f)
    assert err.value.row == 3 and err.value.column == "a"
    assert "oops" in str(err.value)
    with pytest.raises(ParseError):
        io.load_curves(_write(tmp_path / "d.csv", "t,a\n1,2\n2,inf\n"))
    with pytest.raises(ParseError):
        io.load_curves(_write(tmp_path / "e.csv", "t,a\n1,2,3\n"))


def test_other_data_errors(tmp_path):
    with pytest.raises(NonMonotoneTime):
        io.load_curves(_write(tmp_path / "a.csv", "t,a\n1,2\n1,3\n"))
    with pytest.raises(EmptyFile):
        io.load_curves(_write(tmp_path / "b.csv", ""))
    with pytest.raises(EmptyFile):
        io.load_curves(_write(tmp_path / "c.csv", "t,a\n"))
    with pytest.raises(DataError):
        io.load_curves(_write(tmp_path / "d.csv", "t,a\n1,2\n"))


def test_meta_and_layout(tmp_path):
    f = _write(tmp_path / "m.csv", "unit,group,covariate,extra\nb,East,50.5,x\na,West,44,y\n")
    meta = io.read_meta(f)
    assert list(meta) == ["b", "a"]
    lay = io.layout_for(meta, ["a", "b"])
    assert lay.group_of == ["West", "East"]
    np.testing.assert_array_equal(lay.covariate, [44.0, 50.5])
    with pytest.raises(DataError):
        io.layout_for(meta, ["a", "c"])
    with pytest.raises(ParseError):
        io.read_meta(_write(tmp_path / "n.csv", "unit,group\na,b\n"))
    with pytest.raises(ParseError):
        io.read_meta(_write(tmp_path / "o.csv", "unit,group,covariate\na,b,1\na,c,2\n"))


def test_table_round_trip(tmp_path):
    out = tmp_path / "t.csv"
    rows = [[1, "x", 0.1 + 0.2, True], [2, "y", 1e-300, np.float64(3.5)]]
    io.write_table(out, ["k", "name", "value", "flag"], rows, {"seed": 7, "iterations": 100})
    text = out.read_text()
    assert text.startswith("# version: ")
    meta, header, back = io.read_table(out)
    assert meta["seed"] == "7" and meta["iterations"] == "100"
    assert header == ["k", "name", "value", "flag"]
    assert float(back[0][2]) == 0.1 + 0.2 and back[0][3] == "true"
    assert float(back[1][2]) == 1e-300
