import pathlib

import pytest

from chanprobe import MeasurementTiming, TrafficModel, ingest_trace

REPO = pathlib.Path(__file__).resolve().parent.parent
REFERENCE_TRACE = REPO / "tests" / "data" / "reference_trace.csv"
REFERENCE_TRAFFIC = REPO / "configs" / "reference_traffic.json"


@pytest.fixture(scope="session")
def timing():
    return MeasurementTiming()


@pytest.fixture(scope="session")
def reference_matrix():
    return ingest_trace(str(REFERENCE_TRACE))


@pytest.fixture(scope="session")
def reference_model():
    return TrafficModel.from_json(str(REFERENCE_TRAFFIC))
