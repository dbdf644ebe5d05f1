"""Command-line front end.

Exit codes: check 0=proved 1=refuted 2=unknown; synth 0=ran to the step
budget, 3=deadlock (no feasible input); 64 = file or formula errors.
"""

from __future__ import annotations

import json
import sys

import click

from . import ltl
from .abstraction import GridSpec, abstract_linear
from .reachability import (
    ctrl_reach,
    invariant,
    rcis,
    reach_max,
    reach_min,
    robust_invariant,
)
from .synth import SessionStatus, SynthesisSession, make_resolver
from .systems import ControlledTransitionSystem, StateSet
from .tlt import (
    build_controlled_tlt,
    build_existential_tlt,
    build_universal_tlt,
    tree_to_json,
)
from .verify import model_check

EXIT_USAGE = 64


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _load_formula(text: str | None, path: str | None) -> ltl.Formula:
    if (text is None) == (path is None):
        _fail("provide exactly one of --formula / --formula-file")
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read().strip()
        except OSError as exc:
            _fail(str(exc))
    try:
        return ltl.parse_ltl(text)
    except ltl.LtlSyntaxError as exc:
        _fail(f"formula: {exc}")


def _load_any_system(path: str, grid: str | None, inputs: str | None):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    if "A" in data:  # linear system spec: abstract it
        from .abstraction import LinearSystemSpec

        spec = LinearSystemSpec.from_dict(data)
        if grid is None:
            _fail("linear system specs need --grid a,b[,c...]")
        cells = tuple(int(v) for v in grid.split(","))
        if inputs is None:
            samples = tuple(3 for _ in range(len(spec.b[0])))
        else:
            samples = tuple(int(v) for v in inputs.split(","))
        return abstract_linear(spec, GridSpec(cells, samples))
    try:
        from .systems import system_from_dict

        return system_from_dict(data)
    except (KeyError, ValueError) as exc:
        _fail(f"system file: {exc}")


def _parse_set(system, text: str) -> StateSet:
    """Label-set expression: `S`/`all`, `empty`, or a Boolean formula over atoms."""
    text = text.strip()
    if text in ("S", "all"):
        return system.full_set()
    if text in ("empty", "0"):
        return StateSet.empty(system.n_states)
    try:
        f = ltl.parse_ltl(text)
    except ltl.LtlSyntaxError as exc:
        _fail(f"set expression: {exc}")

    def evaluate(node) -> StateSet:
        if isinstance(node, ltl.TrueF):
            return system.full_set()
        if isinstance(node, ltl.FalseF):
            return StateSet.empty(system.n_states)
        if isinstance(node, ltl.Atom):
            return system.label_set(node.name)
        if isinstance(node, ltl.Not):
            return evaluate(node.operand).complement()
        if isinstance(node, ltl.And):
            return evaluate(node.left) & evaluate(node.right)
        if isinstance(node, ltl.Or):
            return evaluate(node.left) | evaluate(node.right)
        _fail(f"set expressions are Boolean only; got {ltl.format_ltl(node)}")

    return evaluate(f)


@click.group()
def main():
    """Temporal-logic-tree model checking and online control synthesis."""


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path())
@click.option("--formula", "formula_text", default=None)
@click.option("--formula-file", default=None, type=click.Path())
def check(system_path, formula_text, formula_file):
    """Model-check an autonomous system against a formula."""
    system = _load_any_system(system_path, None, None)
    if isinstance(system, ControlledTransitionSystem):
        _fail("check needs an autonomous system")
    formula = _load_formula(formula_text, formula_file)
    try:
        verdict = model_check(system, formula)
    except Exception as exc:
        _fail(str(exc))
    click.echo(json.dumps(verdict.to_json()))
    sys.exit({"proved": 0, "refuted": 1, "unknown": 2}[verdict.kind])


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path())
@click.option("--formula", "formula_text", default=None)
@click.option("--formula-file", default=None, type=click.Path())
@click.option("--steps", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--resolver", default="random", show_default=True,
              help="random | adversarial | scripted:<file with JSON successor list>")
@click.option("--x0", default=None, help="initial state id, or coordinates x,y for grids")
@click.option("--grid", default=None, help="cells per axis for linear specs, e.g. 60,40")
@click.option("--inputs", default=None, help="input samples per axis, e.g. 9")
@click.option("--progress-filter", is_flag=True, default=False)
@click.option("--input-script", default=None, type=click.Path(),
              help="JSON list of input indices to apply instead of auto-choice")
@click.option("--out", "out_path", default=None, type=click.Path())
def synth(system_path, formula_text, formula_file, steps, seed, resolver, x0,
          grid, inputs, progress_filter, input_script, out_path):
    """Run the online synthesis loop; emit a JSON-lines trace."""
    system = _load_any_system(system_path, grid, inputs)
    if not isinstance(system, ControlledTransitionSystem):
        _fail("synth needs a controlled system")
    formula = _load_formula(formula_text, formula_file)
    if resolver.startswith("scripted:"):
        try:
            with open(resolver.split(":", 1)[1], encoding="utf-8") as fh:
                script = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            _fail(str(exc))
        res = make_resolver("scripted", script=script)
    else:
        try:
            res = make_resolver(resolver, seed=seed)
        except ValueError as exc:
            _fail(str(exc))
    state0 = _resolve_x0(system, x0)
    chosen_inputs = None
    if input_script is not None:
        try:
            with open(input_script, encoding="utf-8") as fh:
                chosen_inputs = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            _fail(str(exc))
    try:
        session = SynthesisSession(system, formula, res, state0)
    except Exception as exc:
        _fail(str(exc))
    lines = []
    for k in range(steps):
        if session.status is not SessionStatus.ACTIVE:
            break
        feasible = session.synth_step()
        if not feasible:
            break
        if chosen_inputs is not None:
            if k >= len(chosen_inputs):
                break
            u = chosen_inputs[k]
            if u not in feasible:
                _fail(f"scripted input {u} at step {k} not in feasible set {sorted(feasible)}")
        else:
            pool = session.progress_filter(feasible) if progress_filter else feasible
            u = min(pool)
        session.apply_input(u)
        lines.append(json.dumps(session.history[-1].to_json()))
    text = "\n".join(lines) + ("\n" if lines else "")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    sys.exit(3 if session.status is SessionStatus.DEADLOCK else 0)


def _resolve_x0(system: ControlledTransitionSystem, x0: str | None) -> int:
    if x0 is None:
        if system.initial.is_empty():
            _fail("system has no initial state; pass --x0")
        return next(iter(system.initial))
    if "," in x0:
        if system.cell_geometry is None:
            _fail("coordinate --x0 needs a grid-abstracted system")
        point = [float(v) for v in x0.split(",")]
        return system.cell_geometry.cell_of_point(point)
    return int(x0)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path())
@click.option("--op", "op_name", required=True,
              type=click.Choice(["min", "max", "ri", "inv", "creach", "rcis"]))
@click.option("--from", "from_expr", default="S", help="stay set (reach ops)")
@click.option("--to", "to_expr", default=None, help="target set (reach ops)")
@click.option("--set", "set_expr", default=None, help="the set (invariance ops)")
@click.option("--grid", default=None)
@click.option("--inputs", default=None)
def reach(system_path, op_name, from_expr, to_expr, set_expr, grid, inputs):
    """Run one reachability operator and dump members plus a layer histogram."""
    system = _load_any_system(system_path, grid, inputs)
    controlled = isinstance(system, ControlledTransitionSystem)
    if op_name in ("creach", "rcis") and not controlled:
        _fail("creach/rcis need a controlled system")
    if op_name in ("min", "max", "ri", "inv") and controlled:
        _fail(f"{op_name} needs an autonomous system")
    if op_name in ("min", "max", "creach"):
        if to_expr is None:
            _fail("--to is required for reach operators")
        omega1 = _parse_set(system, from_expr)
        omega2 = _parse_set(system, to_expr)
        fn = {"min": reach_min, "max": reach_max, "creach": ctrl_reach}[op_name]
        result = fn(system, omega1, omega2)
    else:
        if set_expr is None:
            _fail("--set is required for invariance operators")
        omega = _parse_set(system, set_expr)
        if op_name == "ri":
            result = robust_invariant(system, omega)
        elif op_name == "inv":
            result = invariant(system, omega)
        else:
            result = rcis(system, omega)
    histogram: dict[int, int] = {}
    for x in result.set_:
        layer = result.layers[x]
        histogram[layer] = histogram.get(layer, 0) + 1
    click.echo(json.dumps({
        "members": sorted(result.set_),
        "cardinality": len(result.set_),
        "iterations": result.iterations,
        "layer_histogram": {str(k): v for k, v in sorted(histogram.items())},
    }))


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path())
@click.option("--formula", "formula_text", default=None)
@click.option("--formula-file", default=None, type=click.Path())
@click.option("--kind", default="universal", show_default=True,
              type=click.Choice(["universal", "existential", "controlled"]))
@click.option("--grid", default=None)
@click.option("--inputs", default=None)
@click.option("--out", "out_path", default=None, type=click.Path())
def tlt(system_path, formula_text, formula_file, kind, grid, inputs, out_path):
    """Build a TLT and dump it as JSON."""
    system = _load_any_system(system_path, grid, inputs)
    formula = _load_formula(formula_text, formula_file)
    controlled = isinstance(system, ControlledTransitionSystem)
    try:
        if kind == "controlled":
            if not controlled:
                _fail("controlled TLTs need a controlled system")
            root = build_controlled_tlt(system, formula)
        else:
            if controlled:
                _fail(f"{kind} TLTs need an autonomous system")
            builder = build_universal_tlt if kind == "universal" else build_existential_tlt
            root = builder(system, formula)
    except Exception as exc:
        _fail(str(exc))
    payload = json.dumps(tree_to_json(root), indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        click.echo(payload)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Start the steering service (HTTP session API plus the cockpit UI)."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
