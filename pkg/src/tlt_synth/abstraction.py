"""Sound uniform-grid abstraction of uncertain discrete-time linear systems.

x_{k+1} = A x_k + B u_k + w_k with box-bounded disturbance, box state
domain, and box input set.  Cells of a uniform grid become states (plus one
absorbing OUT state labeled `__out`), sampled input vectors become inputs,
and a transition cell ->u cell' exists iff the interval-arithmetic image of
the cell intersects cell' (or exits the domain, then -> OUT).  Cells are
half-open boxes, matching the quantizer that maps a state on a cell edge to
the upper cell.  Transitions over-approximate the quantized concrete steps
and labels under-approximate the regions (a cell carries an atom only when
fully inside it), so forcible-reachability results transfer conservatively
to the concrete system.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .systems import ControlledTransitionSystem, GridGeometry

OUT_ATOM = "__out"

_ALIGN_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


class EmptyGrid(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch("box bounds differ in dimension")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty box {self.lo}..{self.hi}")

    @classmethod
    def from_json(cls, data) -> "Box":
        lo, hi = data
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class LinearSystemSpec:
    a: tuple[tuple[float, ...], ...]
    b: tuple[tuple[float, ...], ...]
    domain: Box  # state working space
    input_box: Box
    disturbance_box: Box
    regions: tuple[tuple[str, Box], ...]  # (atom, box), in labeling order

    def __post_init__(self):
        nx = len(self.a)
        if any(len(row) != nx for row in self.a):
            raise DimensionMismatch("A must be square")
        if len(self.b) != nx:
            raise DimensionMismatch("B row count must match A")
        nu = len(self.b[0]) if self.b else 0
        if any(len(row) != nu for row in self.b):
            raise DimensionMismatch("B rows must have equal length")
        if self.domain.dim != nx or self.disturbance_box.dim != nx:
            raise DimensionMismatch("state/disturbance boxes must have dimension n_x")
        if self.input_box.dim != nu:
            raise DimensionMismatch("input box must have dimension n_u")

    @classmethod
    def from_dict(cls, data: dict) -> "LinearSystemSpec":
        return cls(
            a=tuple(tuple(float(v) for v in row) for row in data["A"]),
            b=tuple(tuple(float(v) for v in row) for row in data["B"]),
            domain=Box.from_json(data["X"]),
            input_box=Box.from_json(data["U"]),
            disturbance_box=Box.from_json(data["W"]),
            regions=tuple(
                (r["atom"], Box.from_json(r["box"])) for r in data.get("regions", [])
            ),
        )


def load_linear_spec(path: str) -> LinearSystemSpec:
    with open(path, encoding="utf-8") as fh:
        return LinearSystemSpec.from_dict(json.load(fh))


@dataclass(frozen=True)
class GridSpec:
    cells_per_axis: tuple[int, ...]
    input_samples_per_axis: tuple[int, ...]

    def __post_init__(self):
        if any(n < 1 for n in self.cells_per_axis) or any(
            n < 1 for n in self.input_samples_per_axis
        ):
            raise EmptyGrid("cell and input sample counts must be >= 1")


def _input_grid(box: Box, samples: tuple[int, ...]) -> list[tuple[float, ...]]:
    axes = []
    for lo, hi, m in zip(box.lo, box.hi, samples):
        if m == 1:
            axes.append([(lo + hi) / 2.0])
        else:
            axes.append(list(np.linspace(lo, hi, m)))
    return [tuple(v) for v in itertools.product(*axes)]


def abstract_linear(
    spec: LinearSystemSpec, grid: GridSpec
) -> ControlledTransitionSystem:
    nx = len(spec.a)
    if len(grid.cells_per_axis) != nx:
        raise DimensionMismatch("cells_per_axis must have dimension n_x")
    nu = len(spec.b[0]) if spec.b else 0
    if len(grid.input_samples_per_axis) != nu:
        raise DimensionMismatch("input_samples_per_axis must have dimension n_u")

    a = np.asarray(spec.a, dtype=float)
    b = np.asarray(spec.b, dtype=float)
    a_pos = np.maximum(a, 0.0)
    a_neg = np.minimum(a, 0.0)
    x_lo = np.asarray(spec.domain.lo)
    x_hi = np.asarray(spec.domain.hi)
    w_lo = np.asarray(spec.disturbance_box.lo)
    w_hi = np.asarray(spec.disturbance_box.hi)
    counts = np.asarray(grid.cells_per_axis, dtype=int)
    widths = (x_hi - x_lo) / counts

    n_cells = int(np.prod(counts))
    out = n_cells
    inputs = _input_grid(spec.input_box, grid.input_samples_per_axis)
    input_names = [f"u{i}" for i in range(len(inputs))]

    idx_grid = np.array(
        list(itertools.product(*[range(n) for n in counts])), dtype=int
    )  # (n_cells, nx), row-major to match GridGeometry.cell_id
    cells_lo = x_lo + idx_grid * widths
    cells_hi = x_lo + (idx_grid + 1) * widths

    successors: list[list[list[int]]] = [
        [[] for _ in inputs] for _ in range(n_cells + 1)
    ]
    strides = np.ones(nx, dtype=int)
    for d in range(nx - 2, -1, -1):
        strides[d] = strides[d + 1] * counts[d + 1]

    for ui, u in enumerate(inputs):
        shift = b @ np.asarray(u)
        img_lo = cells_lo @ a_pos.T + cells_hi @ a_neg.T + shift + w_lo
        img_hi = cells_hi @ a_pos.T + cells_lo @ a_neg.T + shift + w_hi
        # per-axis index ranges of intersected cells under the half-open
        # quantizer (a state on a cell edge belongs to the upper cell), so a
        # lower neighbor touched only at its edge is not a successor
        lo_idx = np.floor((img_lo - x_lo) / widths).astype(int)
        hi_idx = np.floor((img_hi - x_lo) / widths).astype(int)
        out_flags = np.any(img_lo < x_lo, axis=1) | np.any(img_hi > x_hi, axis=1)
        lo_idx = np.clip(lo_idx, 0, counts - 1)
        hi_idx = np.clip(hi_idx, 0, counts - 1)
        inside = np.all(img_hi >= x_lo, axis=1) & np.all(img_lo <= x_hi, axis=1)
        for c in range(n_cells):
            succ = successors[c][ui]
            if inside[c]:
                ranges = [range(lo_idx[c, d], hi_idx[c, d] + 1) for d in range(nx)]
                for combo in itertools.product(*ranges):
                    succ.append(int(np.dot(combo, strides)))
            if out_flags[c]:
                succ.append(out)
        successors[out][ui].append(out)

    atoms = [atom for atom, _ in spec.regions]
    seen = set()
    atoms = [a_ for a_ in atoms if not (a_ in seen or seen.add(a_))]
    atoms.append(OUT_ATOM)
    labels: list[set[str]] = [set() for _ in range(n_cells + 1)]
    for atom, box in spec.regions:
        r_lo = np.asarray(box.lo)
        r_hi = np.asarray(box.hi)
        ok = np.all(cells_lo >= r_lo - _ALIGN_TOL, axis=1) & np.all(
            cells_hi <= r_hi + _ALIGN_TOL, axis=1
        )
        for c in np.nonzero(ok)[0]:
            labels[int(c)].add(atom)
    labels[out] = {OUT_ATOM}

    geometry = GridGeometry(
        lows=tuple(float(v) for v in x_lo),
        highs=tuple(float(v) for v in x_hi),
        cells_per_axis=tuple(int(n) for n in counts),
        out_state=out,
        input_vectors=tuple(inputs),
    )
    return ControlledTransitionSystem(
        n_states=n_cells + 1,
        input_names=input_names,
        successors=successors,
        initial=[],
        alphabet=atoms,
        labels=labels,
        cell_geometry=geometry,
    )
