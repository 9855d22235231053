"""HTTP/JSON session service exposing the foam pipeline.

Models are uploaded once and spooled to disk; sessions hold the editable
parameters (resolution, block size, rotation angles) and cache the latest
generation until a parameter changes. All artifact bytes (foam meshes,
slice SVGs) are produced by the same pure pipeline the CLI uses, so
identical model bytes + params yield identical artifacts across restarts;
ETags are content hashes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from fastapi.responses import JSONResponse

from .angle_opt import OptimizerConfig, optimize_rotation
from .depth_raster import DEFAULT_SPACE, DEFAULT_SUPERSAMPLE, DesignSpace
from .errors import EmptyMesh, MalformedFile, UnsupportedFeature
from .foam_export import ExportFormat, FoamResult, render_slice_svg, write_mesh
from .mesh_core import EulerAngles, TriangleMesh, bounding_box, center_mesh, format_from_extension, load_mesh
from .pipeline import generate_foam, warmup

logger = logging.getLogger(__name__)

DEFAULT_PORT = 8787
DEFAULT_MAX_UPLOAD = 256 * 1024 * 1024


@dataclass
class ModelRecord:
    model_id: str
    filename: str
    mesh: TriangleMesh  # centered at upload


@dataclass
class Session:
    id: str
    model_id: str
    resolution: tuple = (DEFAULT_SPACE.nx, DEFAULT_SPACE.ny, DEFAULT_SPACE.nz)
    block_size_mm: tuple = (DEFAULT_SPACE.bx, DEFAULT_SPACE.by, DEFAULT_SPACE.bz)
    angles_deg: tuple = (0.0, 0.0, 0.0)
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    result: Optional[FoamResult] = None
    result_params: Optional[tuple] = None
    artifact_cache: Dict[str, bytes] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def space(self) -> DesignSpace:
        nx, ny, nz = self.resolution
        bx, by, bz = self.block_size_mm
        return DesignSpace(nx, ny, nz, bx, by, bz)

    def angles(self) -> EulerAngles:
        return EulerAngles(*self.angles_deg)

    def params_key(self) -> tuple:
        return (self.resolution, self.block_size_mm, self.angles_deg)

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "model_id": self.model_id,
            "params": {
                "resolution": list(self.resolution),
                "block_size_mm": list(self.block_size_mm),
                "angles_deg": list(self.angles_deg),
            },
            "has_result": self.result is not None and self.result_params == self.params_key(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


def _etag_response(data: bytes, media_type: str) -> Response:
    return Response(
        content=data,
        media_type=media_type,
        headers={"ETag": '"' + hashlib.sha256(data).hexdigest() + '"'},
    )


def _validate_params(body: dict, session: Session) -> None:
    if "resolution" in body:
        res = body["resolution"]
        if (
            not isinstance(res, (list, tuple))
            or len(res) != 3
            or any((not isinstance(v, int)) or isinstance(v, bool) or v < 1 for v in res)
        ):
            raise HTTPException(422, "resolution must be three positive integers")
        session.resolution = tuple(res)
    if "block_size_mm" in body:
        size = body["block_size_mm"]
        if (
            not isinstance(size, (list, tuple))
            or len(size) != 3
            or any(not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 for v in size)
        ):
            raise HTTPException(422, "block_size_mm must be three positive numbers")
        session.block_size_mm = tuple(float(v) for v in size)
    if "angles_deg" in body:
        ang = body["angles_deg"]
        if not isinstance(ang, (list, tuple)) or len(ang) != 3:
            raise HTTPException(422, "angles_deg must be three numbers")
        try:
            normalized = EulerAngles(*[float(v) for v in ang])
        except (TypeError, ValueError):
            raise HTTPException(422, "angles_deg must be three finite numbers")
        session.angles_deg = normalized.as_tuple()


def create_app(
    spool_dir: Optional[str] = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
    supersample: int = DEFAULT_SUPERSAMPLE,
    snapshot_path: Optional[str] = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        if snapshot_path:
            payload = {"sessions": [s.to_json_obj() for s in sessions.values()]}
            Path(snapshot_path).write_text(json.dumps(payload))

    app = FastAPI(title="foamforge", version="0.1.0", lifespan=lifespan)
    spool = Path(spool_dir) if spool_dir else None
    if spool:
        spool.mkdir(parents=True, exist_ok=True)
    models: Dict[str, ModelRecord] = {}
    sessions: Dict[str, Session] = {}
    state_lock = threading.Lock()

    def _ingest(data: bytes, filename: str) -> ModelRecord:
        fmt = format_from_extension(filename)
        mesh = center_mesh(load_mesh(data, fmt))
        mesh.is_watertight()  # compute once at upload
        model_id = hashlib.sha256(data).hexdigest()[:16]
        rec = ModelRecord(model_id=model_id, filename=filename, mesh=mesh)
        if spool:
            path = spool / f"{model_id}_{Path(filename).name}"
            if not path.exists():
                path.write_bytes(data)
        return rec

    if spool:
        for path in sorted(spool.glob("*_*")):
            try:
                rec = _ingest(path.read_bytes(), path.name.split("_", 1)[1])
                models[rec.model_id] = rec
            except Exception:
                logger.warning("skipping unreadable spool file %s", path)

    if snapshot_path and Path(snapshot_path).exists():
        try:
            for obj in json.loads(Path(snapshot_path).read_text())["sessions"]:
                s = Session(
                    id=obj["id"],
                    model_id=obj["model_id"],
                    resolution=tuple(obj["params"]["resolution"]),
                    block_size_mm=tuple(obj["params"]["block_size_mm"]),
                    angles_deg=tuple(obj["params"]["angles_deg"]),
                    created_at=obj.get("created_at", time.time()),
                )
                sessions[s.id] = s
        except Exception:
            logger.warning("ignoring unreadable session snapshot %s", snapshot_path)

    def _session_or_404(session_id: str) -> Session:
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(404, "unknown session")
        return s

    def _fresh_result(s: Session) -> FoamResult:
        if s.result is None or s.result_params != s.params_key():
            raise HTTPException(404, "not generated for the current parameters")
        return s.result

    @app.post("/api/models")
    async def upload_model(file: UploadFile, request: Request):
        declared = request.headers.get("content-length")
        if declared and int(declared) > max_upload_bytes + 4096:
            raise HTTPException(413, "upload exceeds the configured size limit")
        data = await file.read()
        if len(data) > max_upload_bytes:
            raise HTTPException(413, "upload exceeds the configured size limit")
        try:
            rec = _ingest(data, file.filename or "model")
        except (MalformedFile, EmptyMesh, UnsupportedFeature) as exc:
            raise HTTPException(400, f"malformed model file: {exc}")
        with state_lock:
            models[rec.model_id] = rec
        lo, hi = bounding_box(rec.mesh)
        return {
            "model_id": rec.model_id,
            "vertex_count": rec.mesh.vertex_count,
            "triangle_count": rec.mesh.triangle_count,
            "bbox": [list(map(float, lo)), list(map(float, hi))],
            "watertight": rec.mesh.is_watertight(),
        }

    @app.post("/api/sessions", status_code=201)
    async def create_session(body: dict):
        model_id = body.get("model_id")
        if model_id not in models:
            raise HTTPException(404, "unknown model")
        s = Session(id=uuid.uuid4().hex[:12], model_id=model_id)
        with state_lock:
            sessions[s.id] = s
        return s.to_json_obj()

    @app.patch("/api/sessions/{session_id}/params")
    async def patch_params(session_id: str, body: dict):
        s = _session_or_404(session_id)
        before = s.params_key()
        _validate_params(body, s)
        if s.params_key() != before:
            s.updated_at = time.time()
            s.artifact_cache.clear()
        return s.to_json_obj()

    @app.post("/api/sessions/{session_id}/generate")
    def generate(session_id: str):
        s = _session_or_404(session_id)
        model = models.get(s.model_id)
        if model is None:
            raise HTTPException(404, "model for this session is gone")
        if not s.lock.acquire(blocking=False):
            raise HTTPException(409, "generation already in flight for this session")
        try:
            key = s.params_key()
            if s.result is None or s.result_params != key:
                warmup()
                try:
                    result = generate_foam(
                        model.mesh, s.space(), s.angles(), supersample=supersample
                    )
                except (EmptyMesh, ValueError) as exc:
                    raise HTTPException(422, str(exc))
                s.result = result
                s.result_params = key
                s.artifact_cache.clear()
            res = s.result
        finally:
            s.lock.release()
        bm = res.block_map
        return {
            "foam_blocks": bm.foam_block_count,
            "occupied_blocks": bm.occupied_block_count,
            "f_score": bm.foam_block_count / bm.space.total_blocks,
            "gap_report": res.gap_report.to_json_obj() if res.gap_report else None,
            "timing_ms": res.timing_ms,
            "diagnostics": {
                "one_sided_columns": bm.diagnostics.one_sided_columns,
            },
            "links": {
                "foam_plus_stl": f"/api/sessions/{s.id}/foam/plus.stl",
                "foam_minus_stl": f"/api/sessions/{s.id}/foam/minus.stl",
                "foam_plus_ply": f"/api/sessions/{s.id}/foam/plus.ply",
                "foam_minus_ply": f"/api/sessions/{s.id}/foam/minus.ply",
                "slices": f"/api/sessions/{s.id}/slices",
            },
        }

    @app.post("/api/sessions/{session_id}/optimize-angle")
    def optimize_angle(session_id: str, body: Optional[dict] = None):
        s = _session_or_404(session_id)
        model = models.get(s.model_id)
        if model is None:
            raise HTTPException(404, "model for this session is gone")
        if not s.lock.acquire(blocking=False):
            raise HTTPException(409, "generation already in flight for this session")
        try:
            warmup()
            cfg = OptimizerConfig()
            if body:
                cfg = OptimizerConfig(
                    step=float(body.get("step", cfg.step)),
                    max_rounds=int(body.get("max_rounds", cfg.max_rounds)),
                )
            report = optimize_rotation(
                model.mesh, s.space(), cfg, start=s.angles(), supersample=supersample
            )
            if report.angles.as_tuple() != s.angles_deg:
                s.angles_deg = report.angles.as_tuple()
                s.updated_at = time.time()
                s.artifact_cache.clear()
            return report.to_json_obj()
        finally:
            s.lock.release()

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        return _session_or_404(session_id).to_json_obj()

    @app.get("/api/sessions/{session_id}/slices")
    def get_slices(session_id: str):
        s = _session_or_404(session_id)
        res = _fresh_result(s)
        stack = res.slices
        layers = []
        for i in range(stack.layer_count):
            layers.append(
                {
                    "index": i,
                    "labels": stack.layer(i).tolist(),
                    "histogram": stack.layer_histogram(i),
                }
            )
        payload = {
            "nx": stack.space.nx,
            "ny": stack.space.ny,
            "nz": stack.space.nz,
            "label_names": {"0": "occupied", "1": "foam_plus", "2": "foam_minus"},
            "layers": layers,
        }
        data = json.dumps(payload, separators=(",", ":"), sort_keys=True).encode()
        return _etag_response(data, "application/json")

    @app.get("/api/sessions/{session_id}/slices/{layer}.svg")
    def get_slice_svg(session_id: str, layer: int):
        s = _session_or_404(session_id)
        res = _fresh_result(s)
        if not 0 <= layer < res.slices.layer_count:
            raise HTTPException(404, "layer out of range")
        key = f"slice:{layer}"
        if key not in s.artifact_cache:
            s.artifact_cache[key] = render_slice_svg(res.slices, layer).encode()
        return _etag_response(s.artifact_cache[key], "image/svg+xml")

    @app.get("/api/sessions/{session_id}/foam/{side}.{ext}")
    def get_foam(session_id: str, side: str, ext: str):
        s = _session_or_404(session_id)
        res = _fresh_result(s)
        if side not in ("plus", "minus") or ext not in ("stl", "ply"):
            raise HTTPException(404, "unknown foam artifact")
        key = f"foam:{side}.{ext}"
        if key not in s.artifact_cache:
            mesh = res.mesh_plus if side == "plus" else res.mesh_minus
            fmt = ExportFormat.STL_BINARY if ext == "stl" else ExportFormat.PLY_ASCII
            s.artifact_cache[key] = write_mesh(mesh, fmt)
        media = "model/stl" if ext == "stl" else "text/plain"
        return _etag_response(s.artifact_cache[key], media)

    @app.get("/api/sessions/{session_id}/blockmap.json")
    def get_blockmap(session_id: str):
        s = _session_or_404(session_id)
        res = _fresh_result(s)
        return _etag_response(res.block_map.to_json().encode(), "application/json")

    @app.exception_handler(json.JSONDecodeError)
    async def _bad_json(_req, _exc):  # pragma: no cover - framework path
        return JSONResponse(status_code=422, content={"detail": "invalid JSON body"})

    return app
