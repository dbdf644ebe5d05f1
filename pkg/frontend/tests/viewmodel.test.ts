// View-model interaction guards against a scripted fake server.

import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { CockpitViewModel } from "../src/viewmodel.js";
import type { StepView } from "../src/types.js";

function stepView(partial: Partial<StepView> = {}): StepView {
  return {
    session_id: "s1",
    k: 0,
    status: "active",
    formula: "F G o2",
    state: { id: 0, labels: ["o1"], coords: null },
    inputs: [
      { index: 0, name: "a1", vector: null },
      { index: 1, name: "a2", vector: null },
    ],
    feasible: [{ index: 0, name: "a1", vector: null }],
    suggested: [0],
    tlt: { active: [0], membership: { "0": true } },
    history: [],
    ...partial,
  };
}

interface Call {
  path: string;
  body: unknown;
}

class FakeServer {
  calls: Call[] = [];
  responses: Array<{ status: number; body: unknown }> = [];
  private gate: Promise<void> = Promise.resolve();
  release: () => void = () => {};

  hold(): void {
    this.gate = new Promise((resolve) => {
      this.release = resolve;
    });
  }

  client(): ApiClient {
    return new ApiClient("", async (input, init) => {
      this.calls.push({ path: input, body: init?.body ? JSON.parse(String(init.body)) : null });
      await this.gate;
      const next = this.responses.shift() ?? { status: 500, body: { code: "empty", message: "no scripted response" } };
      return {
        ok: next.status < 400,
        status: next.status,
        json: async () => next.body,
      } as Response;
    });
  }
}

describe("CockpitViewModel", () => {
  let server: FakeServer;

  beforeEach(() => {
    server = new FakeServer();
  });

  it("refuses inputs outside the served feasible set without any request", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    expect(vm.isChoosable(1)).toBe(false);
    const applied = await vm.chooseInput(1);
    expect(applied).toBe(false);
    expect(server.calls).toHaveLength(0);
  });

  it("applies a feasible input and adopts the served view", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    server.responses.push({
      status: 200,
      body: stepView({ k: 1, state: { id: 2, labels: ["o3"], coords: null } }),
    });
    const applied = await vm.chooseInput(0);
    expect(applied).toBe(true);
    expect(vm.step.k).toBe(1);
    expect(server.calls[0].path).toBe("/sessions/s1/step");
    expect(server.calls[0].body).toEqual({ input: 0 });
  });

  it("ignores a second click while a request is in flight", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    server.hold();
    server.responses.push({ status: 200, body: stepView({ k: 1 }) });
    const first = vm.chooseInput(0);
    const second = await vm.chooseInput(0); // busy: rejected locally
    expect(second).toBe(false);
    server.release();
    expect(await first).toBe(true);
    expect(server.calls).toHaveLength(1);
  });

  it("refreshes after a stale-view rejection", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    server.responses.push({
      status: 409,
      body: { code: "input-not-feasible", message: "input 0 not in feasible set [1]" },
    });
    server.responses.push({
      status: 200,
      body: stepView({ feasible: [{ index: 1, name: "a2", vector: null }], suggested: [1] }),
    });
    const applied = await vm.chooseInput(0);
    expect(applied).toBe(false);
    expect(vm.notice).toContain("not in feasible set");
    expect([...vm.enabledInputs()]).toEqual([1]);
    expect(server.calls.map((c) => c.path)).toEqual(["/sessions/s1/step", "/sessions/s1"]);
  });

  it("pre-validates spec edits and reports the offset on parse errors", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    server.responses.push({
      status: 200,
      body: { ok: false, formula: null, offset: 4, expected: ["atom"] },
    });
    const applied = await vm.editSpec("G (");
    expect(applied).toBe(false);
    expect(vm.specError).toContain("offset 4");
    expect(server.calls.map((c) => c.path)).toEqual(["/parse"]);
  });

  it("no-op edits keep the view and reload the tree lazily", async () => {
    const vm = new CockpitViewModel(server.client(), stepView());
    server.responses.push({ status: 200, body: { ok: true, formula: "F G o2", offset: null, expected: null } });
    server.responses.push({ status: 200, body: stepView() });
    expect(await vm.editSpec("F G o2")).toBe(true);
    expect(vm.step.k).toBe(0);
    server.responses.push({ status: 200, body: { root: 0, nodes: [
      { id: 0, kind: "set", cardinality: 4, members: [0, 1, 2, 3], formula: "true U (o2 W false)", children: [] },
    ] } });
    await vm.refreshTree();
    expect(vm.tree?.root).toBe(0);
    await vm.refreshTree(); // cached: no extra call
    expect(server.calls.filter((c) => c.path.endsWith("/tlt"))).toHaveLength(1);
  });

  it("accumulates the trajectory from served coordinates", async () => {
    const start = stepView({ state: { id: 5, labels: [], coords: [0.5, -2.5] } });
    const vm = new CockpitViewModel(server.client(), start);
    server.responses.push({
      status: 200,
      body: stepView({ k: 1, state: { id: 6, labels: [], coords: [2.4, -2.1] } }),
    });
    await vm.chooseInput(0);
    expect(vm.trajectory).toEqual([[0.5, -2.5], [2.4, -2.1]]);
  });
});
