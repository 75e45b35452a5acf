import numpy as np
import pytest

from emi_ace import io
from emi_ace.alarms import Alarm, ConfidenceGrid, GroundTruthEntry, Label, LabeledAlarm, RocCurve
from emi_ace.errors import CsvParseError
from emi_ace.preprocessing import RawLane


def test_lane_round_trip_exact(tmp_path, rng):
    resp = rng.normal(size=(7, 21)) + 1j * rng.normal(size=(7, 21))
    pos = np.column_stack([500000 + rng.random(7), 4200000 + rng.random(7)])
    p = io.write_lane(tmp_path / "lane.csv", RawLane("x", pos, resp))
    back = io.read_lane(p)
    np.testing.assert_array_equal(back.positions, pos)
    np.testing.assert_array_equal(back.responses, resp)
    assert back.lane_id == "lane"
    assert p.read_text().splitlines()[0] == ",".join(io.LANE_HEADER)


def test_dictionary_round_trip(tmp_path, dsrf):
    raw, feats = io.write_dictionary(tmp_path / "d.csv", dsrf)
    assert feats.name == "d_features.csv"
    back = io.read_dictionary(raw)
    np.testing.assert_array_equal(back.features, dsrf.features)
    np.testing.assert_array_equal(back.relaxation_freqs, dsrf.relaxation_freqs)
    lines = feats.read_text().splitlines()
    assert len(lines) == 101 and lines[0].startswith("atom_id,f_1,")


def test_truth_alarms_trace_roc_round_trips(tmp_path):
    truth = [GroundTruthEntry(1.5, 2.5, "target", "LMT", 3.0, "AP"),
             GroundTruthEntry(4.0, 2.5, "clutter", "CL", 0.0)]
    assert io.read_truth(io.write_truth(tmp_path / "t.csv", truth)) == truth

    plain = [Alarm(1.0, 2.0, 0.5), Alarm(3.0, 4.0, 0.25)]
    assert io.read_alarms(io.write_alarms(tmp_path / "a.csv", plain)) == plain
    labeled = [LabeledAlarm(plain[0], Label.HIT), LabeledAlarm(plain[1], Label.FALSE_ALARM)]
    assert io.read_alarms(io.write_alarms(tmp_path / "l.csv", labeled)) == labeled

    pos = np.array([[0.0, 1.0], [0.1, 1.0]])
    p2, c2 = io.read_trace(io.write_trace(tmp_path / "c.csv", pos, [0.1, 1 / 3]))
    np.testing.assert_array_equal(p2, pos)
    assert c2[1] == 1 / 3

    curve = RocCurve(np.array([0.9, -np.inf]), np.array([0.5, 1.0]), np.array([0.0, 0.2]))
    back = io.read_roc(io.write_roc(tmp_path / "r.csv", curve))
    assert back.points == curve.points


def _write(tmp_path, text, name="bad.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_errors_name_file_and_line(tmp_path):
    p = _write(tmp_path, "threshold,pd,far_per_m2\n1.0,0.5,0.0\n0.5,abc,0.1\n")
    with pytest.raises(CsvParseError) as e:
        io.read_roc(p)
    assert e.value.path.name == "bad.csv" and e.value.line == 3
    assert "bad.csv:3:" in str(e.value)

    with pytest.raises(CsvParseError) as e:
        io.read_roc(_write(tmp_path, "threshold,pd\n1,0\n"))
    assert e.value.line == 1
    with pytest.raises(CsvParseError) as e:
        io.read_trace(_write(tmp_path, "easting,northing,confidence\n1,2\n"))
    assert e.value.line == 2
    with pytest.raises(CsvParseError):
        io.read_roc(_write(tmp_path, "threshold,pd,far_per_m2\n1,1.5,0\n"))
    with pytest.raises(CsvParseError):
        io.read_roc(_write(tmp_path, "threshold,pd,far_per_m2\n1,0.5,0\n0.5,0.2,0\n"))
    with pytest.raises(CsvParseError):
        io.read_truth(_write(tmp_path, ",".join(io.TRUTH_HEADER) + "\n0,0,target,CL,1,other\n"))
    with pytest.raises(CsvParseError):
        io.read_alarms(_write(tmp_path, "easting,northing,confidence,label\n0,0,1,MAYBE\n"))
    with pytest.raises(CsvParseError) as e:
        io.read_lane(tmp_path / "missing.csv")
    assert "missing.csv" in str(e.value)
    with pytest.raises(CsvParseError):
        io.read_lane(_write(tmp_path, ""))


def test_pgm_scaling_orientation_and_sidecar(tmp_path):
    cells = np.array([[0.0, 0.5], [1.0, 0.25]])  # row 0 is the southern row
    grid = ConfidenceGrid((10.0, 20.0), 0.05, cells, cells > 0)
    pgm, side = io.write_pgm(tmp_path / "m.pgm", grid)
    assert pgm.read_bytes().startswith(b"P5\n2 2\n255\n")
    img = io.read_pgm(pgm)
    np.testing.assert_array_equal(img, [[255, 64], [0, 128]])
    text = side.read_text()
    assert "origin_easting=10.0" in text and "cell_size=0.05" in text

    flat = ConfidenceGrid((0.0, 0.0), 1.0, np.full((2, 3), 0.4), np.ones((2, 3), bool))
    assert not io.read_pgm(io.write_pgm(tmp_path / "f.pgm", flat)[0]).any()


def test_grid_csv_lists_cell_centres(tmp_path):
    grid = ConfidenceGrid((1.0, 2.0), 0.5, np.array([[0.1, 0.2]]), np.ones((1, 2), bool))
    lines = io.write_grid_csv(tmp_path / "g.csv", grid).read_text().splitlines()
    assert lines == ["easting,northing,confidence", "1.0,2.0,0.1", "1.5,2.0,0.2"]
