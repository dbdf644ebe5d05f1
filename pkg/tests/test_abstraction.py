import random

import numpy as np
import pytest

from tlt_synth.abstraction import (
    Box,
    DimensionMismatch,
    EmptyGrid,
    GridSpec,
    LinearSystemSpec,
    OUT_ATOM,
    abstract_linear,
    load_linear_spec,
)


def spec_1d(a=1.0, b=1.0, lo=0.0, hi=2.0, w=0.0, regions=()):
    return LinearSystemSpec(
        a=((a,),),
        b=((b,),),
        domain=Box((lo,), (hi,)),
        input_box=Box((0.0,), (0.0,)),
        disturbance_box=Box((-w,), (w,)),
        regions=tuple(regions),
    )


def test_identity_single_cell_self_loop():
    cts = abstract_linear(spec_1d(), GridSpec((1,), (1,)))
    assert cts.n_states == 2  # one cell plus OUT
    assert sorted(cts.post(0, 0)) == [0]
    assert sorted(cts.post(1, 0)) == [1]  # OUT absorbs
    assert cts.labels[1] == {OUT_ATOM}


def test_drift_leaves_domain():
    cts = abstract_linear(spec_1d(a=1.0, b=0.0, lo=0.0, hi=1.0), GridSpec((2,), (1,)))
    # constant map: the closed cell image grazes the shared edge, whose
    # quantization belongs to the upper cell
    assert sorted(cts.post(0, 0)) == [0, 1]
    assert sorted(cts.post(1, 0)) == [1]
    spec = LinearSystemSpec(
        a=((1.0,),), b=((1.0,),), domain=Box((0.0,), (1.0,)),
        input_box=Box((2.0,), (2.0,)), disturbance_box=Box((0.0,), (0.0,)), regions=(),
    )
    cts = abstract_linear(spec, GridSpec((2,), (1,)))
    out = cts.n_states - 1
    assert sorted(cts.post(0, 0)) == [out]  # x + 2 exits [0, 1] from anywhere
    assert sorted(cts.post(1, 0)) == [out]


def test_region_labeling_under_approximates():
    regions = [("hit", Box((0.4,), (1.6,)))]
    cts = abstract_linear(spec_1d(regions=regions), GridSpec((4,), (1,)))
    # cells: [0,.5) [.5,1) [1,1.5) [1.5,2); only the middle two fit inside
    assert sorted(cts.label_set("hit")) == [1, 2]


def test_obstacle_cell_labeled(assets_dir):
    spec = load_linear_spec(str(assets_dir / "double_integrator.json"))
    cts = abstract_linear(spec, GridSpec((12, 8), (3,)))
    geom = cts.cell_geometry
    inside_o1 = geom.cell_of_point([-7.0, -7.0])
    assert "a2" in cts.labels[inside_o1]
    assert "a1" in cts.labels[inside_o1]


def test_dimension_and_grid_errors():
    with pytest.raises(DimensionMismatch):
        abstract_linear(spec_1d(), GridSpec((2, 2), (1,)))
    with pytest.raises(DimensionMismatch):
        abstract_linear(spec_1d(), GridSpec((2,), (1, 1)))
    with pytest.raises(EmptyGrid):
        GridSpec((0,), (1,))
    with pytest.raises(ValueError):
        Box((1.0,), (0.0,))
    with pytest.raises(DimensionMismatch):
        LinearSystemSpec(
            a=((1.0, 0.0),), b=((1.0,),), domain=Box((0.0,), (1.0,)),
            input_box=Box((0.0,), (0.0,)), disturbance_box=Box((0.0,), (0.0,)),
            regions=(),
        )


def test_every_cell_has_admissible_input(assets_dir):
    spec = load_linear_spec(str(assets_dir / "double_integrator.json"))
    cts = abstract_linear(spec, GridSpec((15, 10), (5,)))
    for x in range(cts.n_states):
        assert cts.admissible(x)


def test_transitions_cover_quantized_dynamics(assets_dir):
    """Sound cover: the quantized image of any sampled concrete step lies in
    the abstract successor set (equivalently, omitted edges are unreachable)."""
    spec = load_linear_spec(str(assets_dir / "double_integrator.json"))
    grid = GridSpec((10, 8), (3,))
    cts = abstract_linear(spec, grid)
    geom = cts.cell_geometry
    a = np.asarray(spec.a)
    b = np.asarray(spec.b)
    rng = random.Random(3)
    n_cells = cts.n_states - 1
    for _ in range(300):
        cell = rng.randrange(n_cells)
        u = rng.randrange(cts.n_inputs)
        lo, hi = geom.cell_box(cell)
        post = cts.post(cell, u)
        for _ in range(20):
            x = np.array([rng.uniform(l, h) for l, h in zip(lo, hi)])
            w = np.array([
                rng.uniform(l, h)
                for l, h in zip(spec.disturbance_box.lo, spec.disturbance_box.hi)
            ])
            nxt = a @ x + b @ np.asarray(geom.input_vectors[u]) + w
            assert geom.cell_of_point(list(nxt)) in post, (cell, u, x, nxt)


def test_input_grid_endpoints():
    spec = LinearSystemSpec(
        a=((1.0,),), b=((1.0,),), domain=Box((0.0,), (10.0,)),
        input_box=Box((-2.0,), (2.0,)), disturbance_box=Box((0.0,), (0.0,)), regions=(),
    )
    cts = abstract_linear(spec, GridSpec((5,), (5,)))
    vectors = [v[0] for v in cts.cell_geometry.input_vectors]
    assert vectors == [-2.0, -1.0, 0.0, 1.0, 2.0]
