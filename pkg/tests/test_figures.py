import numpy as np

from trpca.experiments import SuccessGrid, SyntheticSpec, capture_convergence, gen_low_rank, gen_sparse
from trpca.figures import (
    save_convergence_curves,
    save_grid_heatmap,
    save_sweep_figure,
    save_trace_figure,
)
from trpca.solvers import SolverConfig
from trpca.tensor import Dims


def nonempty(path):
    return path.exists() and path.stat().st_size > 0


def test_grid_heatmap(tmp_path):
    grid = SuccessGrid(
        ranks=[1, 3, 5],
        sparsities=[0.1, 0.2],
        success_rate=np.array([[1.0, 0.5], [1.0, 0.0], [0.0, 0.0]]),
        mean_rse=np.full((3, 2), 1e-4),
        mean_iters=np.full((3, 2), 50.0),
        trials=2,
    )
    out = tmp_path / "grid.png"
    save_grid_heatmap(grid, out)
    assert nonempty(out)


def test_convergence_and_trace_figures(tmp_path):
    spec = SyntheticSpec(Dims(14, 14, 4), 2, 0.1, seed=2)
    L0 = gen_low_rank(spec)
    E0 = gen_sparse(spec)
    cfg = SolverConfig(lam=2e-3, mu1=1e-3, mu2=1e-2, eps=1e-3, k_max=25)
    curves = capture_convergence(L0 + E0, L0, E0, "tnf", cfg)
    conv = tmp_path / "conv.png"
    save_convergence_curves(curves, conv)
    assert nonempty(conv)
    tr = tmp_path / "trace.png"
    save_trace_figure(curves.result.trace, tr)
    assert nonempty(tr)


def test_sweep_figure(tmp_path):
    out = tmp_path / "sweep.png"
    save_sweep_figure([1e-5, 2e-5, 3e-5], [20.0, 25.0, float("inf")], [0.8, 0.9, 1.0], out)
    assert nonempty(out)
