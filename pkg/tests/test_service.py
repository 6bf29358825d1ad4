import base64
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from flowedit.fields import VectorField
from flowedit.io import field_from_bytes, field_to_bytes, pgm_from_bytes, pgm_to_bytes
from flowedit.service import ServiceConfig, create_app

from conftest import rough_field, smooth_field


@pytest.fixture
def client():
    return TestClient(create_app())


def b64_field(f):
    return base64.b64encode(field_to_bytes(f)).decode()


def upload(client, f):
    response = client.post("/sessions", json={"field_b64": b64_field(f)})
    assert response.status_code == 200
    return response.json()


def decode_field(payload):
    return field_from_bytes(base64.b64decode(payload["field_b64"]))


class TestCreateSession:
    def test_field_upload_roundtrip_bitwise(self, client):
        f = rough_field(1, 32, 32)
        created = upload(client, f)
        got = client.get(f"/sessions/{created['session_id']}/field").json()
        assert base64.b64decode(got["field_b64"]) == field_to_bytes(f)
        assert got["version"] == 0

    def test_stroke_payload_generates_256_field(self, client):
        strokes = [[[30.0, 128.0], [220.0, 128.0]]]
        response = client.post("/sessions", json={"strokes": strokes})
        assert response.status_code == 200
        body = response.json()
        assert (body["width"], body["height"]) == (256, 256)
        field = decode_field(body)
        assert float(field.magnitude().max()) > 0.0

    def test_empty_sketch_rejected(self, client):
        blank = pgm_to_bytes(np.zeros((256, 256), dtype=np.uint8))
        response = client.post(
            "/sessions", json={"sketch_pgm_b64": base64.b64encode(blank).decode()})
        assert response.status_code == 422
        assert response.json()["error"] == "EmptySketch"

    def test_no_payload_is_400(self, client):
        assert client.post("/sessions", json={}).status_code == 400

    def test_two_payloads_is_400(self, client):
        f = smooth_field(2, 16, 16)
        blank = base64.b64encode(pgm_to_bytes(np.zeros((256, 256), np.uint8))).decode()
        response = client.post("/sessions", json={"field_b64": b64_field(f),
                                                  "sketch_pgm_b64": blank})
        assert response.status_code == 400

    def test_garbage_field_is_400(self, client):
        response = client.post("/sessions", json={"field_b64": "AAAA"})
        assert response.status_code == 400

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope/field").status_code == 404


class TestEdits:
    def test_identity_edit_keeps_hash(self, client):
        f = smooth_field(3, 32, 32)
        created = upload(client, f)
        sid = created["session_id"]
        response = client.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": ["curl_free", "div_free", "harmonic"],
            "version": 0,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["field_sha256"] == created["field_sha256"]
        assert body["version"] == 1

    def test_div_free_edit_reports_cs(self, client):
        f = smooth_field(4, 32, 32)
        sid = upload(client, f)["session_id"]
        response = client.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": ["div_free"],
            "version": 0,
        })
        assert response.status_code == 200
        assert response.json()["metrics"]["cs"] <= 1e-10

    def test_stale_version_conflict(self, client):
        sid = upload(client, smooth_field(5, 32, 32))["session_id"]
        edit = {"rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
                "keep": ["div_free"], "version": 0}
        assert client.post(f"/sessions/{sid}/edits", json=edit).status_code == 200
        assert client.post(f"/sessions/{sid}/edits", json=edit).status_code == 409

    def test_concurrent_edits_one_wins(self, client):
        sid = upload(client, smooth_field(6, 32, 32))["session_id"]
        edit = {"rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
                "keep": ["div_free"], "version": 0}
        barrier = threading.Barrier(2)
        codes = []

        def shoot():
            barrier.wait()
            codes.append(client.post(f"/sessions/{sid}/edits", json=edit).status_code)

        threads = [threading.Thread(target=shoot) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(codes) == [200, 409]

    def test_small_region_rejected(self, client):
        sid = upload(client, smooth_field(7, 32, 32))["session_id"]
        response = client.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 3, "y1": 32},
            "keep": ["div_free"], "version": 0,
        })
        assert response.status_code == 422
        assert response.json()["error"] == "RegionTooSmall"

    def test_empty_keep_rejected(self, client):
        sid = upload(client, smooth_field(8, 32, 32))["session_id"]
        response = client.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": [], "version": 0,
        })
        assert response.status_code == 422


class TestUndo:
    def test_edit_then_undo_restores_bitwise(self, client):
        f = smooth_field(9, 32, 32)
        created = upload(client, f)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": ["div_free"], "version": 0})
        response = client.post(f"/sessions/{sid}/undo")
        assert response.status_code == 200
        assert base64.b64decode(response.json()["field_b64"]) == field_to_bytes(f)

    def test_undo_fresh_session_conflict(self, client):
        sid = upload(client, smooth_field(10, 32, 32))["session_id"]
        assert client.post(f"/sessions/{sid}/undo").status_code == 409

    def test_three_edits_three_undos(self, client):
        f = smooth_field(11, 32, 32)
        created = upload(client, f)
        sid = created["session_id"]
        keeps = (["div_free"], ["curl_free"], ["curl_free", "div_free"])
        for version, keep in enumerate(keeps):
            response = client.post(f"/sessions/{sid}/edits", json={
                "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
                "keep": keep, "version": version})
            assert response.status_code == 200
        for _ in range(3):
            response = client.post(f"/sessions/{sid}/undo")
        assert base64.b64decode(response.json()["field_b64"]) == field_to_bytes(f)


class TestMetricsEndpoint:
    def test_identity_metrics(self, client):
        f = smooth_field(12, 16, 16)
        response = client.post("/metrics", json={
            "a_b64": b64_field(f), "b_b64": b64_field(f),
            "metrics": ["mse", "ssim_cos"]})
        assert response.status_code == 200
        body = response.json()
        assert body["mse"] == 0.0
        assert abs(body["ssim_cos"] - 1.0) <= 1e-9

    def test_dimension_mismatch(self, client):
        response = client.post("/metrics", json={
            "a_b64": b64_field(smooth_field(13, 16, 16)),
            "b_b64": b64_field(smooth_field(13, 32, 32))})
        assert response.status_code == 422
        assert response.json()["error"] == "DimensionMismatch"


class TestSimulation:
    def test_zero_steps(self, client):
        sid = upload(client, smooth_field(14, 16, 16))["session_id"]
        response = client.post(f"/sessions/{sid}/simulate", json={"steps": 0, "dt": 0.5})
        assert response.status_code == 200
        assert response.json()["frames"] == 0

    def test_zero_field_frames_are_blank(self, client):
        sid = upload(client, VectorField.zeros(16, 16))["session_id"]
        response = client.post(f"/sessions/{sid}/simulate", json={"steps": 5, "dt": 0.5})
        assert response.json()["frames"] == 5
        frame = client.get(f"/sessions/{sid}/frames/0")
        assert frame.status_code == 200
        img = pgm_from_bytes(frame.content)
        assert not img.any()

    def test_frames_satisfy_divergence_contract(self, client):
        sid = upload(client, smooth_field(15, 24, 24))["session_id"]
        response = client.post(f"/sessions/{sid}/simulate", json={
            "steps": 3, "dt": 0.5,
            "inflows": [{"cx": 12.0, "cy": 12.0, "radius": 3.0,
                         "angle": 0.0, "speed": 1.0}]})
        body = response.json()
        assert body["frames"] == 3
        assert all(value <= 1e-8 for value in body["cs"])

    def test_invalid_params(self, client):
        sid = upload(client, smooth_field(16, 16, 16))["session_id"]
        assert client.post(f"/sessions/{sid}/simulate",
                           json={"steps": -1, "dt": 0.5}).status_code == 422
        assert client.post(f"/sessions/{sid}/simulate",
                           json={"steps": 1, "dt": 0.0}).status_code == 422

    def test_missing_frame_404(self, client):
        sid = upload(client, smooth_field(17, 16, 16))["session_id"]
        assert client.get(f"/sessions/{sid}/frames/0").status_code == 404


class TestReplayAndPersistence:
    def test_history_replay_reproduces_current_field(self, client):
        app_store = client.app.state.store
        sid = upload(client, smooth_field(18, 32, 32))["session_id"]
        for version, keep in enumerate((["div_free"], ["curl_free", "div_free"])):
            client.post(f"/sessions/{sid}/edits", json={
                "rect": {"x0": 4, "y0": 4, "x1": 28, "y1": 28},
                "keep": keep, "version": version})
        session = app_store.get(sid)
        replayed = app_store.replay(session)
        assert np.array_equal(replayed.data, session.current.data)

    def test_restart_recovers_sessions(self, tmp_path):
        config = ServiceConfig(persist_dir=tmp_path)
        first = TestClient(create_app(config))
        f = smooth_field(19, 32, 32)
        created = first.post("/sessions", json={"field_b64": b64_field(f)}).json()
        sid = created["session_id"]
        first.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": ["div_free"], "version": 0})
        before = first.get(f"/sessions/{sid}/field").json()

        second = TestClient(create_app(ServiceConfig(persist_dir=tmp_path)))
        after = second.get(f"/sessions/{sid}/field").json()
        assert after["field_b64"] == before["field_b64"]
        assert after["version"] == before["version"]

    def test_recovery_replays_undo(self, tmp_path):
        first = TestClient(create_app(ServiceConfig(persist_dir=tmp_path)))
        f = smooth_field(20, 32, 32)
        sid = first.post("/sessions", json={"field_b64": b64_field(f)}).json()["session_id"]
        first.post(f"/sessions/{sid}/edits", json={
            "rect": {"x0": 0, "y0": 0, "x1": 32, "y1": 32},
            "keep": ["curl_free"], "version": 0})
        first.post(f"/sessions/{sid}/undo")

        second = TestClient(create_app(ServiceConfig(persist_dir=tmp_path)))
        restored = second.get(f"/sessions/{sid}/field").json()
        assert base64.b64decode(restored["field_b64"]) == field_to_bytes(f)
