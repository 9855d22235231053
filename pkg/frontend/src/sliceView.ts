import { ApiClient } from "./api";
import type { SessionStore, UiSessionState } from "./store";
import { LABEL_FOAM_MINUS, LABEL_FOAM_PLUS } from "./types";

/**
 * 2D window: one x-perpendicular layer of the block map as the server's SVG,
 * with a layer slider and a cell tooltip fed by the JSON stack (the SVG is
 * display-only; labels come from data, never re-derived client-side).
 */
export class SliceView {
  private shownSeq = -1;
  private shownIndex = -1;

  constructor(
    private api: ApiClient,
    private store: SessionStore,
    private els: {
      holder: HTMLElement;
      slider: HTMLInputElement;
      caption: HTMLElement;
      tooltip: HTMLElement;
    },
  ) {
    els.slider.addEventListener("input", () => {
      store.setSliceIndex(Number(els.slider.value));
    });
    els.holder.addEventListener("mousemove", (ev) => this.onHover(ev));
    els.holder.addEventListener("mouseleave", () => {
      els.tooltip.style.display = "none";
    });
    store.subscribe((s) => void this.onState(s));
  }

  private async onState(s: UiSessionState): Promise<void> {
    const nx = s.slices?.nx ?? s.params.resolution[0];
    this.els.slider.max = String(Math.max(0, nx - 1));
    this.els.slider.value = String(s.sliceIndex);
    if (!s.sessionId || !s.generation) {
      this.els.holder.innerHTML = '<p class="placeholder">not generated yet</p>';
      this.els.caption.textContent = "";
      return;
    }
    if (s.generationSeq === this.shownSeq && s.sliceIndex === this.shownIndex) return;
    const seq = s.generationSeq;
    const index = s.sliceIndex;
    try {
      const svg = await this.api.fetchSliceSvg(s.sessionId, index);
      if (seq !== this.store.state.generationSeq || index !== this.store.state.sliceIndex) return;
      this.shownSeq = seq;
      this.shownIndex = index;
      this.els.holder.innerHTML = svg;
      const hist = s.slices?.layers[index]?.histogram;
      this.els.caption.textContent = hist
        ? `layer ${index}: ${hist.foam_minus} blue / ${hist.foam_plus} orange / ${hist.occupied} object`
        : `layer ${index}`;
    } catch {
      this.els.holder.innerHTML = '<p class="placeholder">slice fetch failed</p>';
    }
  }

  private onHover(ev: MouseEvent): void {
    const s = this.store.state;
    const svg = this.els.holder.querySelector("svg");
    if (!svg || !s.slices) return;
    const rect = svg.getBoundingClientRect();
    const [, ny, nz] = [s.slices.nx, s.slices.ny, s.slices.nz];
    const j = Math.floor(((ev.clientX - rect.left) / rect.width) * ny);
    const kFromTop = Math.floor(((ev.clientY - rect.top) / rect.height) * nz);
    const k = nz - 1 - kFromTop; // svg rows draw +z downward-flipped
    if (j < 0 || j >= ny || k < 0 || k >= nz) return;
    const label = s.slices.layers[s.sliceIndex]?.labels[j]?.[k];
    const name =
      label === LABEL_FOAM_MINUS ? "foam -x" : label === LABEL_FOAM_PLUS ? "foam +x" : "object";
    this.els.tooltip.style.display = "block";
    this.els.tooltip.style.left = `${ev.clientX + 12}px`;
    this.els.tooltip.style.top = `${ev.clientY + 12}px`;
    this.els.tooltip.textContent = `(j=${j}, k=${k}) ${name}`;
  }
}
