// Session view model: the server is the single source of truth, the view
// model only guards interaction (one in-flight request, no disabled picks)
// and accumulates layout data the server does not resend (trajectory).

import { ApiClient, ApiFailure } from "./api.js";
import type { StepView, TltDump } from "./types.js";

export type Listener = () => void;

export class CockpitViewModel {
  step: StepView;
  tree: TltDump | null = null;
  trajectory: number[][] = [];
  busy = false;
  notice: string | null = null;
  specError: string | null = null;

  private listeners: Listener[] = [];
  private treeFormula: string | null = null;

  constructor(private readonly api: ApiClient, initial: StepView) {
    this.step = initial;
    this.recordCoords(initial);
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  private recordCoords(step: StepView): void {
    if (step.state.coords) this.trajectory.push(step.state.coords);
  }

  enabledInputs(): Set<number> {
    return new Set(this.step.feasible.map((f) => f.index));
  }

  isChoosable(index: number): boolean {
    return !this.busy && this.step.status === "active" && this.enabledInputs().has(index);
  }

  /** Apply an input; refuses disabled indices and double submissions. */
  async chooseInput(index: number): Promise<boolean> {
    if (!this.isChoosable(index)) return false;
    this.busy = true;
    this.notice = null;
    this.emit();
    try {
      const next = await this.api.step(this.step.session_id, index);
      this.applyStep(next);
      return true;
    } catch (err) {
      if (err instanceof ApiFailure && err.detail.code === "input-not-feasible") {
        // stale view: refresh from the server and carry on
        this.notice = err.detail.message;
        this.applyStep(await this.api.getSession(this.step.session_id));
      } else {
        this.notice = err instanceof Error ? err.message : String(err);
      }
      return false;
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  /** Validate via the server parser, then swap the specification. */
  async editSpec(text: string): Promise<boolean> {
    if (this.busy) return false;
    this.busy = true;
    this.specError = null;
    this.emit();
    try {
      const parsed = await this.api.parse(text);
      if (!parsed.ok) {
        this.specError = `parse error at offset ${parsed.offset}`;
        return false;
      }
      const next = await this.api.updateSpec(this.step.session_id, text);
      this.treeFormula = null; // force a tree reload
      this.applyStep(next);
      return true;
    } catch (err) {
      this.specError = err instanceof Error ? err.message : String(err);
      return false;
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  async refreshTree(): Promise<void> {
    if (this.treeFormula === this.step.formula && this.tree !== null) return;
    this.tree = await this.api.tlt(this.step.session_id);
    this.treeFormula = this.step.formula;
    this.emit();
  }

  private applyStep(step: StepView): void {
    const advanced = step.k > this.step.k;
    this.step = step;
    if (advanced) this.recordCoords(step);
  }
}
