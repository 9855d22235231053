#!/usr/bin/env python3
"""Record real service responses as test fixtures.

Spins the HTTP service in-process, uploads a torus, generates at a modest
resolution, and saves the slices JSON plus every layer SVG under
tests/fixtures/. Rerun after changing the service's slice output.
"""

import json
import sys
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from foamforge import ExportFormat, TriangleMesh, write_mesh
from foamforge.foam_service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def make_torus(R, r, n_major, n_minor):
    u = np.linspace(0, 2 * np.pi, n_major, endpoint=False)
    v = np.linspace(0, 2 * np.pi, n_minor, endpoint=False)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    x = (R + r * np.cos(vv)) * np.cos(uu)
    y = (R + r * np.cos(vv)) * np.sin(uu)
    z = r * np.sin(vv)
    verts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    idx = np.arange(n_major * n_minor).reshape(n_major, n_minor)
    a, b = idx, np.roll(idx, -1, axis=0)
    c = np.roll(b, -1, axis=1)
    d = np.roll(idx, -1, axis=1)
    tris = np.concatenate(
        [
            np.stack([a.ravel(), b.ravel(), c.ravel()], axis=1),
            np.stack([a.ravel(), c.ravel(), d.ravel()], axis=1),
        ]
    ).astype(np.int32)
    return TriangleMesh(verts, tris)


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    mesh_bytes = write_mesh(make_torus(60.0, 22.0, 96, 48), ExportFormat.STL_BINARY)
    with tempfile.TemporaryDirectory() as spool:
        app = create_app(spool_dir=spool, supersample=4)
        with TestClient(app) as client:
            model = client.post(
                "/api/models",
                files={"file": ("torus.stl", mesh_bytes, "application/octet-stream")},
            ).json()
            session = client.post("/api/sessions", json={"model_id": model["model_id"]}).json()
            sid = session["id"]
            client.patch(
                f"/api/sessions/{sid}/params",
                json={"resolution": [12, 10, 10], "block_size_mm": [15, 15, 15]},
            )
            summary = client.post(f"/api/sessions/{sid}/generate").json()
            slices = client.get(f"/api/sessions/{sid}/slices").json()
            (OUT / "generate_summary.json").write_text(json.dumps(summary, indent=2))
            (OUT / "slices.json").write_text(json.dumps(slices, indent=2))
            for layer in slices["layers"]:
                svg = client.get(f"/api/sessions/{sid}/slices/{layer['index']}.svg")
                (OUT / f"slice_{layer['index']:03d}.svg").write_bytes(svg.content)
    print(f"wrote fixtures for {len(slices['layers'])} layers to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
