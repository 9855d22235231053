import * as THREE from "three";

import { ApiClient } from "./api";
import { Panel } from "./panel";
import { SliceView } from "./sliceView";
import { SessionStore } from "./store";
import { Viewport } from "./viewport";

const BASE_URL = import.meta.env.VITE_API_BASE ?? "";

const api = new ApiClient(BASE_URL);
const store = new SessionStore(api);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("show");
  setTimeout(() => el.classList.remove("show"), 4000);
}

const viewport = new Viewport($("viewport") as HTMLCanvasElement, api, store, toast);
new Panel($("panel"), store);
new SliceView(api, store, {
  holder: $("slice-holder"),
  slider: $("slice-slider") as HTMLInputElement,
  caption: $("slice-caption"),
  tooltip: $("tooltip"),
});

$("file-input").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    const buffer = await file.arrayBuffer();
    const model = await api.uploadModel(new Blob([buffer]), file.name);
    const session = await api.createSession(model.model_id);
    store.attachSession(session.id, session.params);
    const [lo, hi] = model.bbox;
    viewport.setObjectFromFile(
      buffer,
      file.name,
      new THREE.Vector3((lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2),
    );
    $("model-info").textContent =
      `${file.name}: ${model.vertex_count} vertices, ${model.triangle_count} triangles` +
      (model.watertight ? "" : " (not watertight)");
    await store.generateNow();
  } catch (err) {
    toast(`upload failed: ${err}`);
  }
});

$("btn-generate").addEventListener("click", () => void store.generateNow());
$("btn-optimize").addEventListener("click", () => void store.optimize());
$("btn-reset").addEventListener("click", () => store.resetDefaults());

for (const [id, key] of [
  ["toggle-object", "object"],
  ["toggle-plus", "foamPlus"],
  ["toggle-minus", "foamMinus"],
  ["toggle-space", "designSpace"],
] as const) {
  $(id).addEventListener("change", () => store.toggleVisibility(key));
}

($("move-slider") as HTMLInputElement).addEventListener("input", (ev) => {
  store.setMoveOffset(Number((ev.target as HTMLInputElement).value));
});

for (const [id, side, ext] of [
  ["dl-plus-stl", "plus", "stl"],
  ["dl-plus-ply", "plus", "ply"],
  ["dl-minus-stl", "minus", "stl"],
  ["dl-minus-ply", "minus", "ply"],
] as const) {
  $(id).addEventListener("click", () => {
    const sid = store.state.sessionId;
    if (!sid || !store.state.generation) {
      toast("generate first");
      return;
    }
    window.open(api.foamUrl(sid, side, ext), "_blank");
  });
}

store.subscribe((s) => {
  $("status").textContent =
    s.status === "in-flight" ? "working…" : s.status === "error" ? "error" : "ready";
  if (s.lastError) toast(s.lastError);
  const g = s.generation;
  $("summary").textContent = g
    ? `foam ${g.foam_blocks} / object ${g.occupied_blocks} blocks · ` +
      `F=${g.f_score.toFixed(4)} · ${g.timing_ms.toFixed(1)} ms` +
      (g.gap_report?.available ? ` · gap ${g.gap_report.gap_blocks} blocks` : "")
    : "";
  const width = s.params.resolution[0] * s.params.block_size_mm[0];
  const move = $("move-slider") as HTMLInputElement;
  move.max = String(width);
  if (s.optimizeReport) {
    $("optimize-info").textContent =
      `optimized: (${s.optimizeReport.angles_deg.map((a) => a.toFixed(0)).join(", ")})°, ` +
      `F=${s.optimizeReport.f_score.toFixed(4)} in ${s.optimizeReport.evaluations} evaluations`;
  }
});

window.addEventListener("resize", () => viewport.resize());
