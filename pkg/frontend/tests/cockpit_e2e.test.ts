// End-to-end cockpit drive against a live steering service: the golden
// eight-step feasible-set table, exercised through the rendered DOM.
// Asserts the enabled-input palette matches the table at every step and
// that infeasible inputs cannot be submitted through the UI.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import path from "node:path";

import { ApiClient } from "../src/api.js";
import { CockpitViewModel } from "../src/viewmodel.js";
import { renderStep } from "../src/render.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const REPO = path.resolve(HERE, "..", "..");
const PORT = 8765;
const BASE = `http://127.0.0.1:${PORT}`;

const TABLE_FEASIBLE = [
  [0], [0, 1], [0, 1], [0, 1], [0, 1], [0, 1], [0], [0, 1],
];
const TABLE_INPUTS = [0, 1, 0, 0, 0, 1, 0, 1];
const TABLE_STATES = [0, 2, 2, 1, 2, 1, 3, 1];
const SCRIPT = [2, 2, 1, 2, 1, 3, 1, 3];

let service: ChildProcess;

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/parse`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ formula: "true" }),
      });
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("steering service did not come up");
}

beforeAll(async () => {
  service = spawn(
    "python3",
    ["-m", "tlt_synth.cli", "serve", "--host", "127.0.0.1", "--port", String(PORT)],
    { cwd: REPO, stdio: "ignore" },
  );
  await waitForService();
}, 30_000);

afterAll(() => {
  service.kill();
});

function enabledIndices(root: HTMLElement): number[] {
  return [...root.querySelectorAll<HTMLButtonElement>("button.input-button")]
    .filter((b) => !b.disabled)
    .map((b) => Number(b.dataset.index));
}

function paletteButton(root: HTMLElement, index: number): HTMLButtonElement {
  const button = root.querySelector<HTMLButtonElement>(
    `button.input-button[data-index="${index}"]`,
  );
  if (!button) throw new Error(`no palette button for input ${index}`);
  return button;
}

async function settled(vm: CockpitViewModel): Promise<void> {
  // chooseInput resolves before the final render listener fires; one tick is enough
  await new Promise((resolve) => setTimeout(resolve, 0));
  expect(vm.busy).toBe(false);
}

describe("cockpit against the live service", () => {
  it("drives the golden table session through the DOM", async () => {
    const api = new ApiClient(BASE);
    const systemDoc = JSON.parse(
      readFileSync(path.join(REPO, "assets", "four_state_cts.json"), "utf-8"),
    );
    const created = await api.createSession({
      formula: "F G o2",
      system: systemDoc,
      resolver: { kind: "scripted", script: SCRIPT },
    });
    const vm = new CockpitViewModel(api, created.step);
    const root = document.createElement("div");
    document.body.appendChild(root);
    vm.onChange(() => renderStep(vm, root));
    await vm.refreshTree();
    renderStep(vm, root);

    for (let k = 0; k < 8; k += 1) {
      expect(vm.step.k).toBe(k);
      expect(vm.step.state.id).toBe(TABLE_STATES[k]);
      expect(enabledIndices(root)).toEqual(TABLE_FEASIBLE[k]);

      // an infeasible click must be impossible: the button is disabled and
      // the view model refuses it without touching the server
      const infeasible = [0, 1].find((u) => !TABLE_FEASIBLE[k].includes(u));
      if (infeasible !== undefined) {
        const button = paletteButton(root, infeasible);
        expect(button.disabled).toBe(true);
        const before = vm.step.k;
        button.click();
        await settled(vm);
        expect(vm.step.k).toBe(before);
        expect(await vm.chooseInput(infeasible)).toBe(false);
      }

      paletteButton(root, TABLE_INPUTS[k]).click();
      await new Promise((resolve) => setTimeout(resolve, 50));
      await settled(vm);
      expect(vm.step.k).toBe(k + 1);
    }

    const history = vm.step.history;
    expect(history.map((h) => h.feasible)).toEqual(TABLE_FEASIBLE);
    expect(history.map((h) => h.chosen)).toEqual(TABLE_INPUTS);

    // the rendered view equals the server's truth after a refetch
    const refetched = await api.getSession(vm.step.session_id);
    expect(refetched).toEqual(vm.step);
  }, 30_000);

  it("applies a mid-run spec edit through the editor flow", async () => {
    const api = new ApiClient(BASE);
    const systemDoc = JSON.parse(
      readFileSync(path.join(REPO, "assets", "four_state_cts.json"), "utf-8"),
    );
    const created = await api.createSession({
      formula: "F G o2",
      system: systemDoc,
      resolver: { kind: "scripted", script: [1] },
    });
    const vm = new CockpitViewModel(api, created.step);
    expect(await vm.editSpec("F G (")).toBe(false);
    expect(vm.specError).toContain("offset");
    expect(await vm.editSpec("F G o2")).toBe(true);
    expect(vm.step.formula).toBe("F G o2");
    const hash = JSON.stringify((await api.tlt(vm.step.session_id)).nodes);
    expect(await vm.editSpec("F G o2")).toBe(true); // no-op edit
    expect(JSON.stringify((await api.tlt(vm.step.session_id)).nodes)).toBe(hash);
  }, 30_000);
});
