import { ApiClient } from "./api";
import { Debouncer } from "./debounce";
import type { GenerateSummary, OptimizeReport, Params, SliceStackJson, Triple } from "./types";

export type GenerationStatus = "idle" | "in-flight" | "error";

export interface UiSessionState {
  sessionId: string | null;
  params: Params; // optimistic: what the controls show
  confirmedParams: Params; // last server-accepted params
  status: GenerationStatus;
  lastError: string | null;
  generation: GenerateSummary | null; // last confirmed generation for `params`
  generationSeq: number; // bumps every time `generation` is replaced
  slices: SliceStackJson | null;
  sliceIndex: number;
  moveOffsetMm: number;
  visibility: { object: boolean; foamPlus: boolean; foamMinus: boolean; designSpace: boolean };
  optimizeReport: OptimizeReport | null;
}

export const DEFAULT_PARAMS: Params = {
  resolution: [30, 18, 18],
  block_size_mm: [15, 15, 22],
  angles_deg: [0, 0, 0],
};

const clone = (p: Params): Params => ({
  resolution: [...p.resolution] as Triple,
  block_size_mm: [...p.block_size_mm] as Triple,
  angles_deg: [...p.angles_deg] as Triple,
});

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/**
 * Session state machine. Edits are optimistic and debounced; each settle
 * PATCHes the params and regenerates. The server is the only geometry
 * authority: the store never computes foam itself, it only mirrors results.
 *
 * Concurrency rules: one sync loop at a time; edits arriving mid-flight set
 * a redo flag, so a stale generation is never displayed and the final state
 * always reflects the last edit (last-writer-wins). A 409 from the server
 * (another generate in flight for the session) is retried after a pause.
 */
export class SessionStore {
  state: UiSessionState;
  private listeners = new Set<(s: UiSessionState) => void>();
  private debouncer: Debouncer<string>;
  private syncing = false;
  private redo = false;
  readonly conflictRetryMs: number;

  constructor(
    private api: ApiClient,
    opts: { debounceMs?: number; conflictRetryMs?: number } = {},
  ) {
    this.debouncer = new Debouncer(opts.debounceMs ?? 300);
    this.conflictRetryMs = opts.conflictRetryMs ?? 250;
    this.state = {
      sessionId: null,
      params: clone(DEFAULT_PARAMS),
      confirmedParams: clone(DEFAULT_PARAMS),
      status: "idle",
      lastError: null,
      generation: null,
      generationSeq: 0,
      slices: null,
      sliceIndex: 0,
      moveOffsetMm: 0,
      visibility: { object: true, foamPlus: true, foamMinus: true, designSpace: true },
      optimizeReport: null,
    };
  }

  subscribe(fn: (s: UiSessionState) => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  attachSession(sessionId: string, params: Params): void {
    this.state.sessionId = sessionId;
    this.state.params = clone(params);
    this.state.confirmedParams = clone(params);
    this.state.generation = null;
    this.state.slices = null;
    this.state.optimizeReport = null;
    this.notify();
  }

  /** Optimistic edit + debounced PATCH/regenerate. */
  editParams(patch: Partial<Params>): void {
    this.state.params = { ...clone(this.state.params), ...patch };
    this.notify();
    this.debouncer.debounce("params", () => void this.sync());
  }

  resetDefaults(): void {
    this.editParams(clone(DEFAULT_PARAMS));
  }

  /** Manual generate button: skip the debounce, sync now. */
  generateNow(): Promise<void> {
    this.debouncer.cancel("params");
    return this.sync();
  }

  async sync(): Promise<void> {
    if (!this.state.sessionId) return;
    if (this.syncing) {
      this.redo = true;
      return;
    }
    this.syncing = true;
    try {
      do {
        this.redo = false;
        await this.syncOnce();
      } while (this.redo);
    } finally {
      this.syncing = false;
    }
  }

  private async syncOnce(): Promise<void> {
    const sessionId = this.state.sessionId!;
    const attempt = clone(this.state.params);
    this.state.status = "in-flight";
    this.state.lastError = null;
    this.notify();

    const patchResp = await this.api.patchParams(sessionId, attempt);
    if (patchResp.status === 422) {
      // reject: roll the controls back to the last server-confirmed params
      this.state.params = clone(this.state.confirmedParams);
      this.state.status = "error";
      this.state.lastError = `invalid parameters: ${await patchResp.text()}`;
      this.notify();
      return;
    }
    if (!patchResp.ok) {
      this.state.status = "error";
      this.state.lastError = `parameter update failed (${patchResp.status})`;
      this.notify();
      return;
    }
    const confirmed = (await patchResp.json()) as { params: Params };
    this.state.confirmedParams = clone(confirmed.params);

    let genResp = await this.api.generate(sessionId);
    while (genResp.status === 409) {
      await delay(this.conflictRetryMs);
      genResp = await this.api.generate(sessionId);
    }
    if (!genResp.ok) {
      this.state.status = "error";
      this.state.lastError = `generate failed (${genResp.status})`;
      this.notify();
      return;
    }
    const summary = (await genResp.json()) as GenerateSummary;
    if (this.redo) return; // superseded by a newer edit: discard, loop again

    this.state.generation = summary;
    this.state.generationSeq += 1;
    this.state.slices = await this.api.getSlices(sessionId).catch(() => null);
    this.state.sliceIndex = this.clampSlice(this.state.sliceIndex);
    this.state.status = "idle";
    this.notify();
  }

  /** Greedy rotation init: POST, copy the returned angles into the sliders,
   * then regenerate at those angles. */
  async optimize(): Promise<void> {
    if (!this.state.sessionId || this.syncing) return;
    this.state.status = "in-flight";
    this.notify();
    let resp = await this.api.optimizeAngle(this.state.sessionId);
    while (resp.status === 409) {
      await delay(this.conflictRetryMs);
      resp = await this.api.optimizeAngle(this.state.sessionId);
    }
    if (!resp.ok) {
      this.state.status = "error";
      this.state.lastError = `optimize failed (${resp.status})`;
      this.notify();
      return;
    }
    const report = (await resp.json()) as OptimizeReport;
    this.state.optimizeReport = report;
    this.state.params = { ...clone(this.state.params), angles_deg: [...report.angles_deg] as Triple };
    this.state.confirmedParams = clone(this.state.params);
    this.notify();
    await this.sync();
  }

  clampSlice(i: number): number {
    const nx = this.state.slices?.nx ?? this.state.params.resolution[0];
    return Math.min(Math.max(0, Math.round(i)), Math.max(0, nx - 1));
  }

  setSliceIndex(i: number): void {
    this.state.sliceIndex = this.clampSlice(i);
    this.notify();
  }

  setMoveOffset(mm: number): void {
    const width = this.state.params.resolution[0] * this.state.params.block_size_mm[0];
    this.state.moveOffsetMm = Math.min(Math.max(0, mm), width);
    this.notify();
  }

  toggleVisibility(key: keyof UiSessionState["visibility"]): void {
    this.state.visibility[key] = !this.state.visibility[key];
    this.notify();
  }
}
