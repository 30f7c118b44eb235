"""Trace CSV export/ingest: format contract and round-trip identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanprobe.cca import LoadMatrix, MeasurementTiming, TrafficModel, generate_matrix
from chanprobe.errors import TraceParseError
from chanprobe.traceio import HEADER, ingest_trace, parse_trace, trace_csv_text, write_trace


def tiny_matrix():
    plane = np.array([[0.1, 0.9], [0.25, 1 / 3]])
    return LoadMatrix(plane, plane)


class TestExport:
    def test_header_and_shape(self):
        text = trace_csv_text(tiny_matrix())
        lines = text.split("\n")
        assert lines[0] == HEADER == "round,channel,load"
        assert lines[-1] == ""
        assert len(lines) == 1 + 4 + 1

    def test_lf_only(self):
        assert "\r" not in trace_csv_text(tiny_matrix())

    def test_repr_floats_round_trip(self):
        text = trace_csv_text(tiny_matrix())
        assert "0.3333333333333333" in text


class TestParse:
    def test_round_trip_identity(self, timing):
        mx = generate_matrix(TrafficModel.default(4, seed=9), 6, timing)
        back = parse_trace(trace_csv_text(mx))
        assert np.array_equal(back.measured_load, mx.measured_load)
        assert np.array_equal(back.true_load, mx.measured_load)

    def test_write_then_ingest(self, tmp_path, timing):
        mx = generate_matrix(TrafficModel.default(3, seed=2), 5, timing)
        path = tmp_path / "trace.csv"
        write_trace(mx, str(path))
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        back = ingest_trace(str(path))
        assert np.array_equal(back.measured_load, mx.measured_load)

    @settings(max_examples=30)
    @given(
        st.integers(1, 5),
        st.integers(1, 4),
        st.data(),
    )
    def test_round_trip_arbitrary_planes(self, rounds, channels, data):
        values = data.draw(
            st.lists(
                st.floats(0, 1, allow_nan=False),
                min_size=rounds * channels,
                max_size=rounds * channels,
            )
        )
        plane = np.array(values).reshape(rounds, channels)
        mx = LoadMatrix(plane, plane)
        back = parse_trace(trace_csv_text(mx))
        assert np.array_equal(back.measured_load, plane)

    def test_rejects_wrong_header(self):
        with pytest.raises(TraceParseError, match="header") as exc:
            parse_trace("time,channel,load\n0,1,0.5\n")
        assert exc.value.line == 1

    def test_rejects_empty(self):
        with pytest.raises(TraceParseError, match="empty"):
            parse_trace("")

    def test_rejects_header_only(self):
        with pytest.raises(TraceParseError, match="no rows"):
            parse_trace(HEADER + "\n")

    def test_rejects_wrong_field_count(self):
        with pytest.raises(TraceParseError, match="3 fields") as exc:
            parse_trace(HEADER + "\n0,1\n")
        assert exc.value.line == 2

    def test_rejects_malformed_numbers(self):
        with pytest.raises(TraceParseError, match="malformed") as exc:
            parse_trace(HEADER + "\n0,1,0.5\nzero,1,0.5\n")
        assert exc.value.line == 3

    def test_rejects_out_of_range_load(self):
        with pytest.raises(TraceParseError, match=r"outside \[0, 1\]") as exc:
            parse_trace(HEADER + "\n3,2,1.2\n")
        assert exc.value.line == 2

    def test_rejects_negative_round(self):
        with pytest.raises(TraceParseError, match="negative"):
            parse_trace(HEADER + "\n-1,1,0.5\n")

    def test_rejects_zero_channel(self):
        with pytest.raises(TraceParseError, match="1-based"):
            parse_trace(HEADER + "\n0,0,0.5\n")

    def test_rejects_duplicate_cell(self):
        text = HEADER + "\n0,1,0.5\n0,1,0.6\n"
        with pytest.raises(TraceParseError, match="duplicate cell") as exc:
            parse_trace(text)
        assert exc.value.line == 3

    def test_rejects_missing_cell_naming_hole(self):
        # dense 2x2 grid minus (round 1, channel 2)
        text = HEADER + "\n0,1,0.1\n0,2,0.2\n1,1,0.3\n"
        with pytest.raises(TraceParseError, match="round 1, channel 2") as exc:
            parse_trace(text)
        assert exc.value.line is None

    def test_row_order_does_not_matter(self):
        text = HEADER + "\n1,1,0.3\n0,2,0.2\n0,1,0.1\n1,2,0.4\n"
        mx = parse_trace(text)
        assert mx.measured(0, 1) == 0.1
        assert mx.measured(1, 2) == 0.4
