"""HTTP contract: endpoints, status codes, event-stream resumability."""

import json

import pytest
from fastapi.testclient import TestClient

from skillchain.chaining import TransitionBackend, fit_transition
from skillchain.ingest import Corpus
from skillchain.service import create_app

from conftest import DRYWALL_CHAIN

STUD_PAYLOAD = (
    b'{"stud_centers": [[32.75, 1.75, 48.0], [16.75, 1.75, 48.0], [0.75, 1.75, 48.0]]}'
)


@pytest.fixture()
def client(drywall_lib, drywall_task):
    corpus = Corpus.from_token_lists([DRYWALL_CHAIN])
    models = {"transition": TransitionBackend(fit_transition(corpus))}
    app = create_app(drywall_lib, task=drywall_task, models=models)
    with TestClient(app) as c:
        yield c


def _engine(client):
    return client.app.state.engine


def run_to_completion(client, supervisor="boss"):
    body = client.post("/approve", json={"supervisor_id": supervisor}).json()
    guard = 0
    while body["status"] == "awaiting_human":
        body = client.post("/confirm", json={"supervisor_id": supervisor}).json()
        guard += 1
        assert guard < 50
    return body


# ---------------------------------------------------------------------------
# /skills and /send_data
# ---------------------------------------------------------------------------


def test_skills_listing(client):
    body = client.get("/skills").json()
    names = {s["canonical_name"] for s in body["skills"]}
    assert {"install", "cut", "prepare"} <= names
    install = next(s for s in body["skills"] if s["canonical_name"] == "install")
    assert set(install["synonyms"]) == {"connect", "position"}
    assert install["requires_human_gate"] is True


def test_send_data_logged_payload(client):
    response = client.post("/send_data", content=STUD_PAYLOAD)
    assert response.status_code == 200
    assert response.json() == {"status": "Data sent to ROS 2"}
    assert len(_engine(client).task.stud_centers) == 3


def test_send_data_schema_violation_is_atomic(client):
    before = _engine(client).task
    response = client.post("/send_data", content=b'{"mystery": 1}')
    assert response.status_code == 400
    assert "mystery" in response.json()["error"]
    assert _engine(client).task is before


# ---------------------------------------------------------------------------
# /sequence
# ---------------------------------------------------------------------------


def test_sequence_accepts_click_order(client):
    response = client.post("/sequence", json=["prepare", "plan", "cut", "connect"])
    assert response.status_code == 200
    assert response.json()["chain"] == ["prepare", "plan", "cut", "install"]
    assert _engine(client).pending_plan is not None


def test_sequence_discontinuity_reports_break(client):
    before = _engine(client).pending_plan
    response = client.post("/sequence", json=["cut", "prepare"])
    assert response.status_code == 422
    assert response.json()["first_break"] == 1
    assert _engine(client).pending_plan is before


def test_sequence_unknown_skill(client):
    response = client.post("/sequence", json=["prepare", "levitate"])
    assert response.status_code == 422
    assert response.json()["unknown"] == "levitate"


def test_sequence_empty_rejected(client):
    assert client.post("/sequence", json=[]).status_code == 422


# ---------------------------------------------------------------------------
# /chain and /approve
# ---------------------------------------------------------------------------


def test_chain_builds_pending_plan(client):
    response = client.post("/chain", json={"backend": "transition", "start": "start", "max_len": 10})
    assert response.status_code == 200
    assert response.json()["chain"] == DRYWALL_CHAIN


def test_chain_unknown_backend(client):
    response = client.post("/chain", json={"backend": "nope"})
    assert response.status_code == 404


def test_approve_without_plan(client):
    assert client.post("/approve", json={"supervisor_id": "boss"}).status_code == 409


def test_approve_runs_to_first_gate(client):
    client.post("/chain", json={"backend": "transition", "start": "start", "max_len": 10})
    body = client.post("/approve", json={"supervisor_id": "boss"}).json()
    assert body["status"] == "awaiting_human"
    assert body["gate"] == "workpiece"


def test_chain_conflicts_with_live_session(client):
    client.post("/chain", json={"backend": "transition", "start": "start", "max_len": 10})
    client.post("/approve", json={"supervisor_id": "boss"})
    response = client.post("/chain", json={"backend": "transition", "start": "start", "max_len": 10})
    assert response.status_code == 409


def test_confirm_without_gate(client):
    assert client.post("/confirm", json={"supervisor_id": "boss"}).status_code == 409


def test_full_run_over_http(client):
    client.post("/sequence", json=DRYWALL_CHAIN)
    body = run_to_completion(client)
    assert body["status"] == "completed"
    assert body["world"]["fastened"] == ["panel"]
    snapshot = client.get("/session").json()
    assert snapshot["status"] == "completed"


# ---------------------------------------------------------------------------
# /events
# ---------------------------------------------------------------------------


def _stream_events(client, from_seq=0):
    with client.stream("GET", f"/events?from_seq={from_seq}") as response:
        return [json.loads(line) for line in response.iter_lines() if line]


def test_event_stream_replays_full_log(client):
    client.post("/sequence", json=DRYWALL_CHAIN)
    run_to_completion(client)
    events = _stream_events(client)
    session = _engine(client).session
    assert [e["seq_no"] for e in events] == [e.seq_no for e in session.events]
    assert events[-1]["kind"] == "plan_completed"


def test_event_stream_resumes_exactly(client):
    client.post("/sequence", json=DRYWALL_CHAIN)
    run_to_completion(client)
    total = len(_engine(client).session.events)
    for k in (0, 1, 5, total - 1, total):
        tail = _stream_events(client, from_seq=k)
        assert [e["seq_no"] for e in tail] == list(range(k, total))


def test_event_stream_no_session(client):
    assert _stream_events(client) == []


def test_session_snapshot_before_any_plan(client):
    assert client.get("/session").json() == {"status": "no_session"}
