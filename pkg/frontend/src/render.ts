// DOM rendering: world pane, tree pane, input palette, history strip.

import type { CockpitViewModel } from "./viewmodel.js";
import type { StepView, TltDump, TltNodeDump } from "./types.js";

const MEMBER_BADGE_LIMIT = 24;

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderStep(vm: CockpitViewModel, root: HTMLElement): void {
  root.textContent = "";
  root.appendChild(renderStatus(vm.step, vm.notice));
  const panes = el("div", "panes");
  panes.appendChild(renderWorld(vm));
  panes.appendChild(renderTree(vm.tree, vm.step));
  root.appendChild(panes);
  root.appendChild(renderPalette(vm));
  root.appendChild(renderSpecEditor(vm));
  root.appendChild(renderHistory(vm.step));
}

function renderStatus(step: StepView, notice: string | null): HTMLElement {
  const bar = el("div", `status status-${step.status}`);
  if (step.status === "deadlock") {
    bar.appendChild(el("strong", "nexis", "NExis"));
    bar.appendChild(el("span", undefined, " no feasible input exists; the session is over"));
  } else {
    bar.appendChild(el("span", undefined, `k = ${step.k} | state ${step.state.id}`));
  }
  bar.appendChild(el("span", "formula", `  spec: ${step.formula}`));
  if (notice) bar.appendChild(el("span", "notice", `  ${notice}`));
  return bar;
}

function renderWorld(vm: CockpitViewModel): HTMLElement {
  const pane = el("section", "world");
  pane.appendChild(el("h2", undefined, "world"));
  const step = vm.step;
  const labels = step.state.labels.join(", ") || "(none)";
  pane.appendChild(el("div", "state-chip", `state ${step.state.id}  {${labels}}`));
  if (step.state.coords) {
    pane.appendChild(
      el("div", "coords", `at (${step.state.coords.map((v) => v.toFixed(2)).join(", ")})`),
    );
    pane.appendChild(renderTrajectory(vm.trajectory));
  }
  return pane;
}

function renderTrajectory(points: number[][]): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("class", "trajectory");
  svg.setAttribute("viewBox", "0 0 200 120");
  if (points.length > 1) {
    const xs = points.map((p) => p[0]);
    const ys = points.map((p) => p[1]);
    const minX = Math.min(...xs), maxX = Math.max(...xs);
    const minY = Math.min(...ys), maxY = Math.max(...ys);
    const sx = (v: number) => 10 + (180 * (v - minX)) / Math.max(1e-9, maxX - minX);
    const sy = (v: number) => 110 - (100 * (v - minY)) / Math.max(1e-9, maxY - minY);
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", points.map((p) => `${sx(p[0])},${sy(p[1])}`).join(" "));
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.appendChild(line);
  }
  return svg;
}

function renderTree(tree: TltDump | null, step: StepView): HTMLElement {
  const pane = el("section", "tlt");
  pane.appendChild(el("h2", undefined, "temporal logic tree"));
  if (!tree) {
    pane.appendChild(el("div", "empty", "tree not loaded"));
    return pane;
  }
  const byId = new Map<number, TltNodeDump>(tree.nodes.map((n) => [n.id, n]));
  const active = new Set(step.tlt.active);
  pane.appendChild(renderTreeNode(tree.root, byId, step, active));
  return pane;
}

function renderTreeNode(
  id: number,
  byId: Map<number, TltNodeDump>,
  step: StepView,
  active: Set<number>,
): HTMLElement {
  const node = byId.get(id)!;
  if (node.kind === "op") {
    const wrap = el("div", "op-node");
    wrap.appendChild(el("span", "op-badge", node.op ?? "?"));
    for (const child of node.children) {
      wrap.appendChild(renderTreeNode(child, byId, step, active));
    }
    return wrap;
  }
  const details = document.createElement("details");
  details.open = true;
  details.className = active.has(id) ? "set-node active" : "set-node";
  const summary = document.createElement("summary");
  const inSet = step.tlt.membership[String(id)];
  summary.appendChild(el("span", "member-flag", inSet ? "*" : "-"));
  summary.appendChild(el("span", "node-formula", node.formula ?? ""));
  const size = node.cardinality ?? 0;
  const badge =
    node.members && size <= MEMBER_BADGE_LIMIT
      ? `{${node.members.join(",")}}`
      : `|${size}|`;
  summary.appendChild(el("span", "cardinality", badge));
  details.appendChild(summary);
  for (const child of node.children) {
    details.appendChild(renderTreeNode(child, byId, step, active));
  }
  return details;
}

function renderPalette(vm: CockpitViewModel): HTMLElement {
  const pane = el("section", "palette");
  pane.appendChild(el("h2", undefined, "feasible inputs"));
  const step = vm.step;
  const feasible = vm.enabledInputs();
  for (const info of step.inputs) {
    const button = el("button", "input-button") as HTMLButtonElement;
    button.dataset.index = String(info.index);
    const vector = info.vector ? ` ${JSON.stringify(info.vector)}` : "";
    button.textContent = `${info.name}${vector}`;
    const choosable = feasible.has(info.index) && vm.isChoosable(info.index);
    button.disabled = !choosable;
    if (!feasible.has(info.index)) button.classList.add("infeasible");
    if (step.suggested.includes(info.index)) button.classList.add("suggested");
    button.addEventListener("click", () => {
      void vm.chooseInput(info.index);
    });
    pane.appendChild(button);
  }
  return pane;
}

function renderSpecEditor(vm: CockpitViewModel): HTMLElement {
  const pane = el("section", "spec-editor");
  pane.appendChild(el("h2", undefined, "specification"));
  const input = el("input") as HTMLInputElement;
  input.value = vm.step.formula;
  input.className = "spec-input";
  const apply = el("button", "spec-apply", "update") as HTMLButtonElement;
  apply.addEventListener("click", () => {
    void vm.editSpec(input.value);
  });
  pane.appendChild(input);
  pane.appendChild(apply);
  if (vm.specError) pane.appendChild(el("div", "spec-error", vm.specError));
  return pane;
}

function renderHistory(step: StepView): HTMLElement {
  const pane = el("section", "history");
  pane.appendChild(el("h2", undefined, "history"));
  const strip = el("div", "history-strip");
  for (const entry of step.history) {
    strip.appendChild(
      el(
        "span",
        "history-cell",
        `k${entry.k}: s${entry.state} u${entry.chosen} (${entry.feasible.length} ok)`,
      ),
    );
  }
  pane.appendChild(strip);
  return pane;
}
