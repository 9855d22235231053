import type { SessionStore, UiSessionState } from "./store";
import type { Params, Triple } from "./types";

/** Tool panel: sliders/inputs bound to the store's optimistic params. */
export class Panel {
  private angleSliders: HTMLInputElement[] = [];
  private resInputs: HTMLInputElement[] = [];
  private blockInputs: HTMLInputElement[] = [];

  constructor(
    private root: HTMLElement,
    private store: SessionStore,
  ) {
    this.build();
    store.subscribe((s) => this.onState(s));
  }

  private row(label: string): HTMLDivElement {
    const div = document.createElement("div");
    div.className = "row";
    const span = document.createElement("label");
    span.textContent = label;
    div.appendChild(span);
    this.root.appendChild(div);
    return div;
  }

  private build(): void {
    const angles = ["ψ (x)", "θ (y)", "φ (z)"];
    angles.forEach((name, axis) => {
      const row = this.row(`angle ${name}`);
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = "359";
      slider.step = "1";
      const value = document.createElement("span");
      value.className = "value";
      slider.addEventListener("input", () => {
        const next = [...this.store.state.params.angles_deg] as Triple;
        next[axis] = Number(slider.value);
        value.textContent = `${slider.value}°`;
        this.store.editParams({ angles_deg: next });
      });
      row.appendChild(slider);
      row.appendChild(value);
      this.angleSliders.push(slider);
    });

    const resRow = this.row("resolution");
    const blockRow = this.row("block mm");
    for (let axis = 0; axis < 3; axis++) {
      const res = document.createElement("input");
      res.type = "number";
      res.min = "1";
      res.addEventListener("change", () => {
        const next = [...this.store.state.params.resolution] as Triple;
        next[axis] = Math.max(1, Math.round(Number(res.value) || 1));
        this.store.editParams({ resolution: next });
      });
      resRow.appendChild(res);
      this.resInputs.push(res);

      const block = document.createElement("input");
      block.type = "number";
      block.min = "0.1";
      block.step = "0.5";
      block.addEventListener("change", () => {
        const next = [...this.store.state.params.block_size_mm] as Triple;
        next[axis] = Number(block.value) || next[axis];
        this.store.editParams({ block_size_mm: next });
      });
      blockRow.appendChild(block);
      this.blockInputs.push(block);
    }
  }

  private onState(s: UiSessionState): void {
    const p: Params = s.params;
    this.angleSliders.forEach((el, i) => {
      if (document.activeElement !== el) el.value = String(Math.round(p.angles_deg[i]));
      const value = el.parentElement?.querySelector(".value");
      if (value) value.textContent = `${Math.round(p.angles_deg[i])}°`;
    });
    this.resInputs.forEach((el, i) => {
      if (document.activeElement !== el) el.value = String(p.resolution[i]);
    });
    this.blockInputs.forEach((el, i) => {
      if (document.activeElement !== el) el.value = String(p.block_size_mm[i]);
    });
  }
}
