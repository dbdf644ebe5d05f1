// Cockpit bootstrap: a small session-creation form, then the live panes.

import { ApiClient, ApiFailure } from "./api.js";
import { CockpitViewModel } from "./viewmodel.js";
import { renderStep } from "./render.js";

const api = new ApiClient("");

function formValue(id: string): string {
  return (document.getElementById(id) as HTMLInputElement | HTMLTextAreaElement).value;
}

async function startSession(): Promise<void> {
  const errorBox = document.getElementById("create-error")!;
  errorBox.textContent = "";
  const formula = formValue("formula");
  const resolver = { kind: formValue("resolver"), seed: Number(formValue("seed") || "0") };
  const systemText = formValue("system-json").trim();
  try {
    const doc = JSON.parse(systemText);
    const payload =
      "A" in doc
        ? {
            formula,
            linear: doc,
            grid: formValue("grid").split(",").map(Number),
            input_samples: formValue("samples").split(",").map(Number),
            x0: formValue("x0").split(",").map(Number),
            resolver,
          }
        : { formula, system: doc, resolver };
    const created = await api.createSession(payload);
    mount(created.step);
  } catch (err) {
    errorBox.textContent =
      err instanceof ApiFailure ? `${err.detail.code}: ${err.detail.message}` : String(err);
  }
}

function mount(step: import("./types.js").StepView): void {
  document.getElementById("create-pane")!.hidden = true;
  const root = document.getElementById("cockpit")!;
  const vm = new CockpitViewModel(api, step);
  vm.onChange(() => renderStep(vm, root));
  void vm.refreshTree().then(() => renderStep(vm, root));
  renderStep(vm, root);
}

document.getElementById("create")?.addEventListener("click", () => {
  void startSession();
});
