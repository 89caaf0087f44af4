import pytest

from lzzeno import io, plots
from lzzeno.cli import main
from lzzeno.dynamics import SimConfig, integrate
from lzzeno.experiments import SweepSpec, sweep
from lzzeno.lz_model import LzParams


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("plots")
    io.write_trajectory(d / "t.csv", integrate(SimConfig(LzParams(0.5, 1.0), t_start=-10.0, t_end=10.0)))
    io.write_sweep(d / "s.csv", sweep(SweepSpec((0.3, 0.6, 1.0), (0.0, 0.5), t_start=-20.0, t_end=20.0)))
    return d


@pytest.mark.parametrize("src,kind", [("t.csv", "timeseries"), ("s.csv", "asymptote"), ("s.csv", "surface")])
def test_render_is_byte_identical(data, src, kind):
    a = plots.render(data / src, kind, data / f"{kind}1.svg")
    plots.render(data / src, kind, data / f"{kind}2.svg")
    assert (data / f"{kind}1.svg").read_bytes() == (data / f"{kind}2.svg").read_bytes()
    assert a["kind"] == kind


def test_surface_reports_grid_and_labels(data):
    info = plots.render(data / "s.csv", "surface", data / "s.svg")
    assert info["grid_shape"] == (2, 3)


def test_wrong_table_for_kind(data):
    with pytest.raises(plots.PlotInputError, match="missing column"):
        plots.render(data / "t.csv", "surface", data / "x.svg")
    with pytest.raises(plots.PlotInputError):
        plots.render(data / "t.csv", "bars", data / "x.svg")


def test_cli_plot_rejects_malformed_csv_with_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,p1_dia,p2_adi\n0,1,0\n1,0.5\n")
    assert main(["plot", "--in", str(bad), "--kind", "timeseries", "--out", str(tmp_path / "o.svg")]) == 2
    assert "bad.csv:3" in capsys.readouterr().err
