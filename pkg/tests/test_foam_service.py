"""foam_service: HTTP surface, sessions, caching, determinism."""

import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from foamforge import ExportFormat, write_mesh
from foamforge.foam_service import create_app
from conftest import make_box, make_octasphere, make_torus


@pytest.fixture()
def client(tmp_path):
    app = create_app(spool_dir=str(tmp_path / "spool"), supersample=4)
    with TestClient(app) as c:
        yield c


def cube_stl_bytes():
    return write_mesh(make_box((-15, -15, -15), (15, 15, 15)), ExportFormat.STL_BINARY)


def upload(client, data, name="cube.stl"):
    return client.post("/api/models", files={"file": (name, data, "application/octet-stream")})


def make_session(client, model_id):
    resp = client.post("/api/sessions", json={"model_id": model_id})
    assert resp.status_code == 201
    return resp.json()


class TestModels:
    def test_upload_cube(self, client):
        resp = upload(client, cube_stl_bytes())
        assert resp.status_code == 200
        body = resp.json()
        assert body["vertex_count"] == 8
        assert body["triangle_count"] == 12
        assert body["watertight"] is True
        np.testing.assert_allclose(body["bbox"], [[-15, -15, -15], [15, 15, 15]], atol=1e-5)

    def test_upload_empty_file_400(self, client):
        assert upload(client, b"").status_code == 400

    def test_upload_unknown_extension_400(self, client):
        assert upload(client, cube_stl_bytes(), "cube.xyz").status_code == 400

    def test_upload_benchmark_torus_vertex_count(self, client):
        torus = write_mesh(make_torus(120, 50, 120, 60), ExportFormat.STL_BINARY)
        resp = upload(client, torus, "torus.stl")
        assert resp.json()["vertex_count"] == 7200

    def test_upload_too_large_413(self, tmp_path):
        app = create_app(spool_dir=str(tmp_path / "s2"), max_upload_bytes=500)
        with TestClient(app) as client:
            assert upload(client, cube_stl_bytes()).status_code == 413  # cube STL is 684 bytes


class TestSessions:
    def test_defaults(self, client):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        session = make_session(client, model_id)
        assert session["params"]["resolution"] == [30, 18, 18]
        assert session["params"]["block_size_mm"] == [15.0, 15.0, 22.0]
        assert session["params"]["angles_deg"] == [0.0, 0.0, 0.0]
        assert session["has_result"] is False

    def test_unknown_model_404(self, client):
        assert client.post("/api/sessions", json={"model_id": "nope"}).status_code == 404

    def test_patch_resolution(self, client):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        session = make_session(client, model_id)
        resp = client.patch(
            f"/api/sessions/{session['id']}/params", json={"resolution": [8, 8, 8]}
        )
        assert resp.status_code == 200
        assert resp.json()["params"]["resolution"] == [8, 8, 8]

    @pytest.mark.parametrize(
        "body",
        [
            {"block_size_mm": [0, 15, 22]},
            {"block_size_mm": [15, -1, 22]},
            {"resolution": [0, 8, 8]},
            {"resolution": [8, 8]},
            {"resolution": [8.5, 8, 8]},
            {"angles_deg": ["1e400", 0, 0]},  # parses to inf server-side
            {"angles_deg": ["nope", 0, 0]},
            {"angles_deg": [0, 0]},
        ],
    )
    def test_patch_invalid_params_422(self, client, body):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        session = make_session(client, model_id)
        resp = client.patch(f"/api/sessions/{session['id']}/params", json=body)
        assert resp.status_code == 422

    def test_patch_unknown_session_404(self, client):
        assert client.patch("/api/sessions/zz/params", json={}).status_code == 404


class TestGenerate:
    def _session(self, client, res=(8, 8, 8), block=(10.0, 10.0, 10.0)):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        session = make_session(client, model_id)
        client.patch(
            f"/api/sessions/{session['id']}/params",
            json={"resolution": list(res), "block_size_mm": list(block)},
        )
        return session["id"]

    def test_generate_summary(self, client):
        sid = self._session(client)
        resp = client.post(f"/api/sessions/{sid}/generate")
        assert resp.status_code == 200
        body = resp.json()
        assert body["occupied_blocks"] == 64
        assert body["foam_blocks"] == 512 - 64
        assert body["f_score"] == 1.0 - 64 / 512
        assert body["timing_ms"] > 0
        assert body["links"]["foam_plus_stl"].endswith("/foam/plus.stl")

    def test_generate_repeat_identical(self, client):
        sid = self._session(client)
        a = client.post(f"/api/sessions/{sid}/generate").json()
        b = client.post(f"/api/sessions/{sid}/generate").json()
        assert a["foam_blocks"] == b["foam_blocks"]
        assert a["timing_ms"] == b["timing_ms"]  # cached result reused

    def test_micro_object_degenerate_space(self, client):
        tiny = write_mesh(make_octasphere(0.8, 2, center=(3.0, 2.0, 1.0)), ExportFormat.STL_BINARY)
        model_id = upload(client, tiny, "tiny.stl").json()["model_id"]
        session = make_session(client, model_id)
        client.patch(
            f"/api/sessions/{session['id']}/params",
            json={"resolution": [8, 8, 8], "block_size_mm": [10, 10, 10]},
        )
        body = client.post(f"/api/sessions/{session['id']}/generate").json()
        assert body["occupied_blocks"] in (0, 1)
        assert body["foam_blocks"] == 512 - body["occupied_blocks"]

    def test_generate_unknown_session_404(self, client):
        assert client.post("/api/sessions/zz/generate").status_code == 404

    def test_default_resolution_torus_within_latency_budget(self, tmp_path):
        # full default pipeline on the 7200-vertex benchmark torus
        app = create_app(spool_dir=str(tmp_path / "bench"), supersample=8)
        with TestClient(app) as client:
            torus = write_mesh(make_torus(120, 50, 120, 60), ExportFormat.STL_BINARY)
            model_id = upload(client, torus, "torus.stl").json()["model_id"]
            sid = make_session(client, model_id)["id"]
            client.patch(f"/api/sessions/{sid}/params", json={"resolution": [30, 30, 30]})
            body = client.post(f"/api/sessions/{sid}/generate").json()
            assert body["timing_ms"] <= 500.0

    def test_single_flight_409(self, client, monkeypatch):
        import foamforge.foam_service as svc

        sid = self._session(client)
        original = svc.generate_foam
        started = threading.Event()

        def slow_generate(*args, **kwargs):
            started.set()
            time.sleep(0.4)
            return original(*args, **kwargs)

        monkeypatch.setattr(svc, "generate_foam", slow_generate)
        results = {}

        def first():
            results["first"] = client.post(f"/api/sessions/{sid}/generate").status_code

        t = threading.Thread(target=first)
        t.start()
        assert started.wait(5.0)
        results["second"] = client.post(f"/api/sessions/{sid}/generate").status_code
        t.join()
        assert results["first"] == 200
        assert results["second"] == 409
        # after the in-flight run finishes the session serves normally again
        assert client.post(f"/api/sessions/{sid}/generate").status_code == 200

    def test_distinct_sessions_generate_independently(self, client):
        sid_a = self._session(client)
        sid_b = self._session(client)
        codes = {}

        def run(name, sid):
            codes[name] = client.post(f"/api/sessions/{sid}/generate").status_code

        threads = [
            threading.Thread(target=run, args=("a", sid_a)),
            threading.Thread(target=run, args=("b", sid_b)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert codes == {"a": 200, "b": 200}


class TestOptimizeAngle:
    def test_symmetric_sphere_unchanged(self, client):
        sphere = write_mesh(make_octasphere(13.7, 3), ExportFormat.STL_BINARY)
        model_id = upload(client, sphere, "sphere.stl").json()["model_id"]
        session = make_session(client, model_id)
        client.patch(
            f"/api/sessions/{session['id']}/params",
            json={"resolution": [8, 8, 8], "block_size_mm": [10, 10, 10]},
        )
        body = client.post(f"/api/sessions/{session['id']}/optimize-angle").json()
        assert body["angles_deg"] == [0.0, 0.0, 0.0]
        refreshed = client.get(f"/api/sessions/{session['id']}").json()
        assert refreshed["params"]["angles_deg"] == [0.0, 0.0, 0.0]

    def test_f_never_decreases(self, client):
        torus = write_mesh(make_torus(16, 5, 48, 24), ExportFormat.STL_BINARY)
        model_id = upload(client, torus, "torus.stl").json()["model_id"]
        session = make_session(client, model_id)
        client.patch(
            f"/api/sessions/{session['id']}/params",
            json={"resolution": [8, 8, 8], "block_size_mm": [10, 10, 10], "angles_deg": [35, 10, 70]},
        )
        before = client.post(f"/api/sessions/{session['id']}/generate").json()["f_score"]
        body = client.post(
            f"/api/sessions/{session['id']}/optimize-angle", json={"step": 45}
        ).json()
        assert body["f_score"] >= before


class TestArtifacts:
    def _generated(self, client):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        session = make_session(client, model_id)
        sid = session["id"]
        client.patch(
            f"/api/sessions/{sid}/params",
            json={"resolution": [8, 8, 8], "block_size_mm": [10, 10, 10]},
        )
        client.post(f"/api/sessions/{sid}/generate")
        return sid

    def test_slices_json_layer_count_and_histograms(self, client):
        sid = self._generated(client)
        body = client.get(f"/api/sessions/{sid}/slices").json()
        assert body["nx"] == 8
        assert len(body["layers"]) == 8
        for layer in body["layers"]:
            arr = np.array(layer["labels"])
            assert arr.shape == (8, 8)
            assert layer["histogram"]["occupied"] == int((arr == 0).sum())

    def test_slice_svg_histogram_matches_json(self, client):
        sid = self._generated(client)
        stack = client.get(f"/api/sessions/{sid}/slices").json()
        for layer in stack["layers"]:
            svg = client.get(f"/api/sessions/{sid}/slices/{layer['index']}.svg").text
            assert svg.count('fill="#1f77b4"') == layer["histogram"]["foam_minus"]
            assert svg.count('fill="#ff7f0e"') == layer["histogram"]["foam_plus"]
            assert svg.count('fill="#ffffff"') == layer["histogram"]["occupied"]

    def test_not_generated_404(self, client):
        model_id = upload(client, cube_stl_bytes()).json()["model_id"]
        sid = make_session(client, model_id)["id"]
        assert client.get(f"/api/sessions/{sid}/slices").status_code == 404
        assert client.get(f"/api/sessions/{sid}/foam/plus.stl").status_code == 404

    def test_param_change_invalidates_artifacts(self, client):
        sid = self._generated(client)
        assert client.get(f"/api/sessions/{sid}/foam/plus.stl").status_code == 200
        client.patch(f"/api/sessions/{sid}/params", json={"angles_deg": [5, 0, 0]})
        assert client.get(f"/api/sessions/{sid}/foam/plus.stl").status_code == 404

    def test_foam_downloads_bit_stable(self, client):
        sid = self._generated(client)
        a = client.get(f"/api/sessions/{sid}/foam/plus.stl")
        b = client.get(f"/api/sessions/{sid}/foam/plus.stl")
        assert a.content == b.content
        assert a.headers["etag"] == b.headers["etag"]
        ply = client.get(f"/api/sessions/{sid}/foam/minus.ply")
        assert ply.status_code == 200
        assert ply.content.startswith(b"ply\n")

    def test_layer_out_of_range_404(self, client):
        sid = self._generated(client)
        assert client.get(f"/api/sessions/{sid}/slices/99.svg").status_code == 404

    def test_blockmap_json_round_trip(self, client):
        from foamforge import BlockMap

        sid = self._generated(client)
        body = client.get(f"/api/sessions/{sid}/blockmap.json").json()
        bm = BlockMap.from_json_obj(body)
        assert bm.space.nx == 8
        assert bm.occupied_block_count == 64


class TestDeterminismAcrossRestarts:
    def test_same_bytes_after_restart(self, tmp_path):
        spool = str(tmp_path / "spool")
        data = cube_stl_bytes()
        artifacts = []
        for _ in range(2):
            app = create_app(spool_dir=spool, supersample=4)
            with TestClient(app) as client:
                model_id = upload(client, data).json()["model_id"]
                sid = make_session(client, model_id)["id"]
                client.patch(
                    f"/api/sessions/{sid}/params",
                    json={"resolution": [8, 8, 8], "block_size_mm": [10, 10, 10]},
                )
                client.post(f"/api/sessions/{sid}/generate")
                artifacts.append(
                    (
                        client.get(f"/api/sessions/{sid}/foam/plus.stl").content,
                        client.get(f"/api/sessions/{sid}/foam/minus.ply").content,
                        client.get(f"/api/sessions/{sid}/slices/3.svg").content,
                    )
                )
        assert artifacts[0] == artifacts[1]

    def test_session_snapshot_reloads(self, tmp_path):
        spool = str(tmp_path / "spool")
        snap = str(tmp_path / "sessions.json")
        data = cube_stl_bytes()
        app = create_app(spool_dir=spool, snapshot_path=snap)
        with TestClient(app) as client:
            model_id = upload(client, data).json()["model_id"]
            sid = make_session(client, model_id)["id"]
            client.patch(f"/api/sessions/{sid}/params", json={"resolution": [8, 8, 8]})
        app2 = create_app(spool_dir=spool, snapshot_path=snap)
        with TestClient(app2) as client:
            body = client.get(f"/api/sessions/{sid}").json()
            assert body["params"]["resolution"] == [8, 8, 8]
