"""Synthetic data generation, phase-transition grids, and convergence capture.

The synthetic protocol: a ground-truth low-tubal-rank tensor is the
tensor product of two Gaussian factors (entries N(0, 1/n1) and
N(0, 1/n2)), the sparse part has entries +1 or -1 each with probability
gamma and zero otherwise, and a trial counts as a success when the
relative square error of the recovered low-rank part is below 1e-3.
Every cell and trial of a grid draws from its own seed derived from the
master seed, so grids are reproducible and cells can run in any order
or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParam, InvalidSpec, NonFinite, ZeroReference
from .metrics import rse
from .rng import gaussian, make_rng, mix_seed
from .solvers import SolverConfig, SolverResult, solve_tnf, solve_tnf_plus, solve_tnn
from .tensor import Dims, fro, t_product

SUCCESS_RSE = 1e-3

SOLVERS: dict[str, Callable] = {
    "tnn": solve_tnn,
    "tnf": solve_tnf,
    "tnf+": solve_tnf_plus,
}

# substream tags so the low-rank and sparse draws never overlap
_TAG_LOWRANK = 0x10
_TAG_SPARSE = 0x52


def solver_for(kind: str) -> Callable:
    try:
        return SOLVERS[kind]
    except KeyError:
        raise InvalidParam(f"unknown solver kind {kind!r}; expected one of {sorted(SOLVERS)}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic instance."""

    dims: Dims
    r: int
    gamma: float  # per-sign probability; the corruption rate is 2*gamma
    seed: int = 0

    def validate(self):
        if not 1 <= self.r <= self.dims.n_min:
            raise InvalidSpec(f"rank {self.r} outside [1, {self.dims.n_min}]")
        if not 0.0 <= 2.0 * self.gamma <= 1.0:
            raise InvalidSpec(f"corruption rate 2*gamma = {2 * self.gamma} outside [0, 1]")


def gen_low_rank(spec: SyntheticSpec) -> np.ndarray:
    """Tensor product of two Gaussian factor tensors; tubal rank <= r,
    and equal to r almost surely."""
    spec.validate()
    rng = make_rng(mix_seed(spec.seed, _TAG_LOWRANK))
    n1, n2, n3 = spec.dims.shape
    P = gaussian(rng, (n1, spec.r, n3)) / math.sqrt(n1)
    Q = gaussian(rng, (spec.r, n2, n3)) / math.sqrt(n2)
    return t_product(P, Q)


def gen_sparse(spec: SyntheticSpec, swap_signs: bool = False) -> np.ndarray:
    """Bernoulli sign tensor: +1 w.p. gamma, -1 w.p. gamma, else 0.

    ``swap_signs`` exchanges the two sign buckets, which negates the
    output exactly (the model is sign-symmetric).
    """
    spec.validate()
    rng = make_rng(mix_seed(spec.seed, _TAG_SPARSE))
    u = rng.random(spec.dims.shape)
    E = np.where(u < spec.gamma, 1.0, np.where(u < 2.0 * spec.gamma, -1.0, 0.0))
    return -E if swap_signs else E


@dataclass
class SuccessGrid:
    """Per-cell success statistics of a rank x sparsity sweep."""

    ranks: list
    sparsities: list
    success_rate: np.ndarray
    mean_rse: np.ndarray
    mean_iters: np.ndarray
    trials: int
    failures: list = field(default_factory=list)  # (rank, sparsity, trial, message)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("rank,sparsity,success_rate,mean_rse,mean_iters\n")
            for i, r in enumerate(self.ranks):
                for j, sp in enumerate(self.sparsities):
                    f.write(
                        f"{r},{sp:.17g},{self.success_rate[i, j]:.17g},"
                        f"{self.mean_rse[i, j]:.17g},{self.mean_iters[i, j]:.17g}\n"
                    )


def _run_trial(args):
    (n1, n2, n3, r, sparsity, seed, kind, cfg) = args
    spec = SyntheticSpec(Dims(n1, n2, n3), r, sparsity / 2.0, seed)
    L0 = gen_low_rank(spec)
    E0 = gen_sparse(spec)
    X = L0 + E0
    try:
        res = solver_for(kind)(X, cfg)
    except NonFinite as exc:
        return False, float("nan"), float("nan"), str(exc)
    err = rse(res.L_hat, L0)
    return err < SUCCESS_RSE, err, float(res.iterations), None


def run_grid(
    ranks,
    sparsities,
    trials: int,
    solver_kind: str,
    cfg: Optional[SolverConfig] = None,
    dims: Dims = Dims(40, 40, 30),
    master_seed: int = 0,
    workers: int = 1,
    progress: Optional[Callable[[str], None]] = None,
) -> SuccessGrid:
    """Success-rate sweep over (tubal rank, corruption rate) cells.

    Each trial gets seed mix(master, i, j, t).  A solver blow-up counts
    as an unsuccessful trial and is logged, not raised, so long sweeps
    survive isolated numerical failures.
    """
    ranks = list(ranks)
    sparsities = list(sparsities)
    if not ranks or not sparsities:
        raise InvalidParam("ranks and sparsities must be nonempty")
    if trials < 1:
        raise InvalidParam(f"trials must be >= 1, got {trials}")
    solver_for(solver_kind)
    cfg = cfg if cfg is not None else SolverConfig()
    jobs = []
    for i, r in enumerate(ranks):
        for j, sp in enumerate(sparsities):
            for t in range(trials):
                seed = mix_seed(master_seed, i, j, t)
                jobs.append((dims.n1, dims.n2, dims.n3, r, sp, seed, solver_kind, cfg))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_trial, jobs, chunksize=1))
    else:
        outcomes = [_run_trial(job) for job in jobs]
    R, S = len(ranks), len(sparsities)
    success = np.zeros((R, S))
    mean_rse = np.full((R, S), float("nan"))
    mean_iters = np.full((R, S), float("nan"))
    failures = []
    idx = 0
    for i, r in enumerate(ranks):
        for j, sp in enumerate(sparsities):
            cell = outcomes[idx : idx + trials]
            idx += trials
            success[i, j] = sum(ok for ok, _, _, _ in cell) / trials
            errs = np.array([e for _, e, _, _ in cell])
            its = np.array([it for _, _, it, _ in cell])
            if np.isfinite(errs).any():
                mean_rse[i, j] = float(np.nanmean(errs))
                mean_iters[i, j] = float(np.nanmean(its))
            for t, (_, _, _, msg) in enumerate(cell):
                if msg is not None:
                    failures.append((r, sp, t, msg))
            if progress is not None:
                progress(
                    f"rank={r} sparsity={sp:g} success={success[i, j]:.2f} "
                    f"mean_rse={mean_rse[i, j]:.3e}"
                )
    return SuccessGrid(ranks, sparsities, success, mean_rse, mean_iters, trials, failures)


@dataclass
class ConvergenceCurves:
    """Per-iteration recovery errors against the ground truth."""

    k: list
    rse_L: list
    rse_E: list
    e_absolute: bool  # when the sparse reference is zero, rse_E holds ||E^(k)||_F
    result: SolverResult

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("k,rse_L,rse_E\n")
            for k, a, b in zip(self.k, self.rse_L, self.rse_E):
                f.write(f"{k},{a:.17g},{b:.17g}\n")


def capture_convergence(
    X: np.ndarray,
    L0: np.ndarray,
    E0: np.ndarray,
    solver_kind: str,
    cfg: Optional[SolverConfig] = None,
) -> ConvergenceCurves:
    """Run a solver while recording rse(L^(k), L0) and rse(E^(k), E0)."""
    if fro(L0) == 0.0:
        raise ZeroReference("convergence capture needs a nonzero low-rank reference")
    e_absolute = fro(E0) == 0.0
    ks, eL, eE = [], [], []

    def record(state):
        ks.append(state.k)
        eL.append(rse(state.L, L0))
        eE.append(fro(state.E) if e_absolute else rse(state.E, E0))

    res = solver_for(solver_kind)(X, cfg, callback=record)
    return ConvergenceCurves(ks, eL, eE, e_absolute, res)
