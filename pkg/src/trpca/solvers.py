"""ADMM solvers for the low-tubal-rank plus sparse decomposition X = L + E.

Three variants share one splitting skeleton:

* :func:`solve_tnn`      convex baseline, slicewise nuclear norm + l1;
  also the default warm start for the other two.
* :func:`solve_tnf`      nuclear-over-Frobenius low-rank term + l1.
* :func:`solve_tnf_plus` nuclear-over-Frobenius + l1-over-Frobenius.

The ratio terms are split with auxiliary copies (H of L, and D of E for
the plus variant) whose subproblems reduce to the cubic scaling solve
in :mod:`trpca.prox`.  Penalty weights grow geometrically each
iteration up to a cap; convergence requires every variable's infinity
norm step and the feasibility residual to fall below ``eps``.

All updates within one iteration read only the previous iterate, so the
sparse and auxiliary subproblems commute; the ``update_order`` knob on
:func:`solve_tnf` exists to let tests pin that down.  Runs are
deterministic: randomness enters only through the zero-input fallback
of the scaling subproblem, drawn from a stream seeded by the config.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParam, NonFinite, ZeroTensor
from .prox import ratio_scale, shrink
from .rng import gaussian, make_rng
from .tensor import as_tensor3, fro, inner, l1, linf
from .tsvd import t_svt, tnn

NAN = float("nan")


def default_lambda(shape) -> float:
    """Sparsity weight 1 / sqrt(max(n1, n2) * n3) used by the baseline."""
    n1, n2, n3 = shape
    return 1.0 / math.sqrt(max(n1, n2) * n3)

# Weight used by the ratio-regularized solver on synthetic-scale data.
TNF_SYNTHETIC_LAMBDA = 2e-4


@dataclass
class SolverConfig:
    """Hyperparameters shared by all solvers.

    ``lam=None`` lets each solver pick its model default.  ``mu3`` is
    ignored by the baseline and the plain ratio model.  ``init``
    selects the warm start: "tnn" (baseline run at loose tolerance),
    "zeros", or "given" (explicit ``init_L``/``init_E``).
    """

    lam: Optional[float] = None
    mu1: float = 1e-4
    mu2: float = 1e-3
    mu3: float = 1e-3
    mu_growth: float = 1.1
    mu_cap: float = 1e10
    eps: float = 1e-4
    k_max: int = 500
    init: str = "tnn"
    init_L: Optional[np.ndarray] = None
    init_E: Optional[np.ndarray] = None
    seed: int = 0

    def validate(self):
        if self.lam is not None and not self.lam > 0:
            raise InvalidParam(f"lam must be positive, got {self.lam}")
        for name in ("mu1", "mu2", "mu3", "eps"):
            if not getattr(self, name) > 0:
                raise InvalidParam(f"{name} must be positive, got {getattr(self, name)}")
        if not self.mu_growth >= 1.0:
            raise InvalidParam(f"mu_growth must be >= 1, got {self.mu_growth}")
        if self.k_max < 1:
            raise InvalidParam(f"k_max must be >= 1, got {self.k_max}")
        if self.init not in ("tnn", "zeros", "given"):
            raise InvalidParam(f"unknown init mode {self.init!r}")
        if self.init == "given" and (self.init_L is None or self.init_E is None):
            raise InvalidParam("init='given' requires init_L and init_E")


@dataclass
class SolverState:
    """One iterate.  D and U are None for the variants without them."""

    L: np.ndarray
    E: np.ndarray
    H: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    Z: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None
    mu1: float = NAN
    mu2: float = NAN
    mu3: float = NAN
    k: int = 0


TRACE_HEADER = "k,lagrangian,res_feas,res_LH,res_ED,dL,dH,dE,dD,dY,dZ,dU,tnf_L,l1_E,ms"


@dataclass
class IterTrace:
    """Per-iteration diagnostics; one list entry per iteration run."""

    lagrangian: list = field(default_factory=list)
    res_feas: list = field(default_factory=list)
    res_LH: list = field(default_factory=list)
    res_ED: list = field(default_factory=list)
    dL: list = field(default_factory=list)
    dH: list = field(default_factory=list)
    dE: list = field(default_factory=list)
    dD: list = field(default_factory=list)
    dY: list = field(default_factory=list)
    dZ: list = field(default_factory=list)
    dU: list = field(default_factory=list)
    tnf_L: list = field(default_factory=list)
    l1_E: list = field(default_factory=list)
    ms: list = field(default_factory=list)

    def __len__(self):
        return len(self.lagrangian)

    def append(self, **cols):
        for name, value in cols.items():
            getattr(self, name).append(value)

    def to_csv(self, path):
        """Write the trace; wall-time column is measured, not reproducible."""
        names = TRACE_HEADER.split(",")[1:]
        with open(path, "w", encoding="utf-8") as f:
            f.write(TRACE_HEADER + "\n")
            for k in range(len(self)):
                row = [str(k + 1)]
                row += [f"{getattr(self, n)[k]:.17g}" for n in names]
                f.write(",".join(row) + "\n")


@dataclass
class SolverResult:
    L_hat: np.ndarray
    E_hat: np.ndarray
    converged: bool
    iterations: int
    trace: IterTrace


def check_convergence(state: SolverState, prev: SolverState, X: np.ndarray, eps: float):
    """Evaluate the per-variable step and feasibility conditions.

    Returns (converged, residuals) where residuals maps condition names
    to infinity norms.  The step of every variable present in the state
    is checked except the multiplier of the sparse-copy constraint,
    which the stopping rule deliberately omits; feasibility of
    L + E = X is always included.
    """
    res = {}
    for name in ("L", "H", "E", "D", "Y", "Z"):
        cur = getattr(state, name)
        old = getattr(prev, name)
        if cur is not None and old is not None:
            res["d" + name] = linf(cur - old)
    res["feas"] = linf(state.L + state.E - X)
    return all(v <= eps for v in res.values()), res


def lagrangian_value(state: SolverState, X: np.ndarray, lam: float, tnn_L: Optional[float] = None) -> float:
    """Augmented Lagrangian of the splitting at the given iterate.

    Uses the penalty weights stored in the state.  Raises ZeroTensor
    when an auxiliary copy in a denominator has zero norm.
    """
    if state.H is None:
        raise InvalidParam("lagrangian_value needs a state with the auxiliary copy H")
    hn = fro(state.H)
    if hn == 0.0:
        raise ZeroTensor("Lagrangian undefined: ||H||_F = 0")
    if tnn_L is None:
        tnn_L = tnn(state.L)
    gap_LH = state.L - state.H
    gap_feas = state.L + state.E - X
    val = (
        tnn_L / hn
        + 0.5 * state.mu1 * fro(gap_LH) ** 2
        + inner(state.Y, gap_LH)
        + 0.5 * state.mu2 * fro(gap_feas) ** 2
        + inner(state.Z, gap_feas)
    )
    if state.D is None:
        val += lam * l1(state.E)
    else:
        dn = fro(state.D)
        if dn == 0.0:
            raise ZeroTensor("Lagrangian undefined: ||D||_F = 0")
        gap_ED = state.E - state.D
        val += (
            lam * l1(state.E) / dn
            + 0.5 * state.mu3 * fro(gap_ED) ** 2
            + inner(state.U, gap_ED)
        )
    return val


def _ensure_finite(k: int, **tensors):
    for name, T in tensors.items():
        if T is not None and not np.isfinite(T).all():
            raise NonFinite(f"{name} developed non-finite entries at iteration {k}")


def _fallback_tensor(norm_target: float, shape, rng) -> np.ndarray:
    """Random tensor of the given Frobenius norm (zero if the norm is)."""
    if norm_target <= 0.0:
        return np.zeros(shape)
    G = gaussian(rng, shape)
    return G * (norm_target / fro(G))


def _require_finite_input(X: np.ndarray):
    if not np.isfinite(X).all():
        raise NonFinite("input tensor contains non-finite entries")


def _initial_LE(X: np.ndarray, cfg: SolverConfig):
    if cfg.init == "zeros":
        return np.zeros_like(X), np.zeros_like(X)
    if cfg.init == "given":
        L = as_tensor3(cfg.init_L, "init_L")
        E = as_tensor3(cfg.init_E, "init_E")
        if L.shape != X.shape or E.shape != X.shape:
            raise InvalidParam("init_L/init_E must match the shape of X")
        return L.copy(), E.copy()
    warm = replace(cfg, lam=None, eps=1e-3, k_max=100, init="zeros")
    res = solve_tnn(X, warm)
    return res.L_hat, res.E_hat


def _tnf_or_nan(tnn_L: float, L: np.ndarray) -> float:
    n = fro(L)
    return tnn_L / n if n > 0 else NAN


def solve_tnn(X: np.ndarray, cfg: Optional[SolverConfig] = None,
              callback: Optional[Callable[[SolverState], None]] = None) -> SolverResult:
    """Baseline convex decomposition: min tnn(L) + lam * ||E||_1 s.t. X = L + E.

    Single-penalty ADMM; the low-rank update is singular-value
    shrinkage at 1/mu2 and the sparse update is a soft threshold at
    lam/mu2.  Used directly and as the warm start of the ratio models.
    """
    X = as_tensor3(X)
    _require_finite_input(X)
    cfg = cfg if cfg is not None else SolverConfig()
    cfg.validate()
    lam = cfg.lam if cfg.lam is not None else default_lambda(X.shape)
    mu2 = cfg.mu2
    n3 = X.shape[2]
    if cfg.init == "given":
        L, E = _initial_LE(X, cfg)
    else:
        L, E = np.zeros_like(X), np.zeros_like(X)
    Z = np.zeros_like(X)
    trace = IterTrace()
    converged = False
    k = 0
    for k in range(1, cfg.k_max + 1):
        t0 = time.perf_counter()
        L_new, sig = t_svt(X - E - Z / mu2, 1.0 / mu2, return_sigma=True)
        tnn_L = float(sig.sum()) / n3
        E_new = shrink(X - L_new - Z / mu2, lam / mu2)
        gap_feas = L_new + E_new - X
        Z_new = Z + mu2 * gap_feas
        _ensure_finite(k, L=L_new, E=E_new, Z=Z_new)
        state = SolverState(L=L_new, E=E_new, Z=Z_new, mu2=mu2, k=k)
        converged, res = check_convergence(state, SolverState(L=L, E=E, Z=Z), X, cfg.eps)
        lag = tnn_L + lam * l1(E_new) + 0.5 * mu2 * fro(gap_feas) ** 2 + inner(Z_new, gap_feas)
        trace.append(
            lagrangian=lag, res_feas=res["feas"], res_LH=NAN, res_ED=NAN,
            dL=res["dL"], dH=NAN, dE=res["dE"], dD=NAN,
            dY=NAN, dZ=res["dZ"], dU=NAN,
            tnf_L=_tnf_or_nan(tnn_L, L_new), l1_E=l1(E_new),
            ms=(time.perf_counter() - t0) * 1e3,
        )
        if callback is not None:
            callback(state)
        mu2 = min(mu2 * cfg.mu_growth, cfg.mu_cap)
        L, E, Z = L_new, E_new, Z_new
        if converged:
            break
    return SolverResult(L, E, converged, k, trace)


def solve_tnf(X: np.ndarray, cfg: Optional[SolverConfig] = None,
              callback: Optional[Callable[[SolverState], None]] = None,
              update_order: str = "LHE") -> SolverResult:
    """Ratio-regularized decomposition: min tnn(L)/||L||_F + lam * ||E||_1.

    The ratio is split through a copy H = L.  Each iteration:
    singular-value shrinkage for L at tau = 1/((mu1 + mu2) * ||H||_F),
    the cubic scaling solve for H, a soft threshold for E, then dual
    ascent on both constraints and geometric growth of the penalties.
    A zero H (possible only in degenerate runs) is restarted from the
    seeded random fallback rather than aborting.
    """
    X = as_tensor3(X)
    _require_finite_input(X)
    cfg = cfg if cfg is not None else SolverConfig()
    cfg.validate()
    if update_order not in ("LHE", "LEH"):
        raise InvalidParam(f"unknown update_order {update_order!r}")
    lam = cfg.lam if cfg.lam is not None else TNF_SYNTHETIC_LAMBDA
    mu1, mu2 = cfg.mu1, cfg.mu2
    n3 = X.shape[2]
    rng = make_rng(cfg.seed)
    L, E = _initial_LE(X, cfg)
    H = L.copy()
    # The H-subproblem's optimality condition pins the copy multiplier to
    # -(tnn(L)/||H||^3) * H after every iteration.  Starting a warmed
    # primal against a zero dual leaves the first shrinkage threshold
    # unopposed, which can irrecoverably collapse instances whose
    # singular values sit near that threshold (low tubal rank at these
    # penalty scales), so the dual starts at its consistent value.
    Y = -(tnn(L) / fro(H) ** 3) * H if fro(H) > 0 else np.zeros_like(X)
    Z = np.zeros_like(X)
    trace = IterTrace()
    converged = False
    k = 0
    for k in range(1, cfg.k_max + 1):
        t0 = time.perf_counter()
        hn = fro(H)
        if hn == 0.0:
            H = _fallback_tensor(float(np.cbrt(tnn(L) / mu1)), X.shape, rng)
            hn = fro(H)
        tau = math.inf if hn == 0.0 else 1.0 / ((mu1 + mu2) * hn)
        L_new, sig = t_svt(
            (mu1 * H + mu2 * (X - E)) / (mu1 + mu2) - (Y + Z) / (mu1 + mu2), tau,
            return_sigma=True,
        )
        tnn_L = float(sig.sum()) / n3
        # H and E read only the fresh L and the previous duals, so the
        # two orders produce identical iterates.
        if update_order == "LHE":
            H_new = ratio_scale(tnn_L, mu1, L_new + Y / mu1, rng)[0]
            E_new = shrink(X - L_new - Z / mu2, lam / mu2)
        else:
            E_new = shrink(X - L_new - Z / mu2, lam / mu2)
            H_new = ratio_scale(tnn_L, mu1, L_new + Y / mu1, rng)[0]
        Y_new = Y + mu1 * (L_new - H_new)
        gap_feas = L_new + E_new - X
        Z_new = Z + mu2 * gap_feas
        _ensure_finite(k, L=L_new, H=H_new, E=E_new, Y=Y_new, Z=Z_new)
        state = SolverState(L=L_new, E=E_new, H=H_new, Y=Y_new, Z=Z_new,
                            mu1=mu1, mu2=mu2, k=k)
        prev = SolverState(L=L, E=E, H=H, Y=Y, Z=Z)
        converged, res = check_convergence(state, prev, X, cfg.eps)
        try:
            lag = lagrangian_value(state, X, lam, tnn_L=tnn_L)
        except ZeroTensor:
            lag = NAN
        trace.append(
            lagrangian=lag, res_feas=res["feas"], res_LH=linf(L_new - H_new), res_ED=NAN,
            dL=res["dL"], dH=res["dH"], dE=res["dE"], dD=NAN,
            dY=res["dY"], dZ=res["dZ"], dU=NAN,
            tnf_L=_tnf_or_nan(tnn_L, L_new), l1_E=l1(E_new),
            ms=(time.perf_counter() - t0) * 1e3,
        )
        if callback is not None:
            callback(state)
        mu1 = min(mu1 * cfg.mu_growth, cfg.mu_cap)
        mu2 = min(mu2 * cfg.mu_growth, cfg.mu_cap)
        L, H, E, Y, Z = L_new, H_new, E_new, Y_new, Z_new
        if converged:
            break
    return SolverResult(L, E, converged, k, trace)


def solve_tnf_plus(X: np.ndarray, cfg: Optional[SolverConfig] = None,
                   callback: Optional[Callable[[SolverState], None]] = None) -> SolverResult:
    """Doubly scale-invariant variant: both terms are ratios.

    Adds a copy D = E with its own multiplier and penalty mu3.  The L
    and H updates match :func:`solve_tnf`; the sparse threshold becomes
    lam / ((mu2 + mu3) * ||D||_F) on a weighted combination, and D gets
    its own cubic scaling solve with rho = lam * ||E||_1.  The stopping
    rule checks seven conditions (the D-multiplier step is not one of
    them).
    """
    X = as_tensor3(X)
    _require_finite_input(X)
    cfg = cfg if cfg is not None else SolverConfig()
    cfg.validate()
    lam = cfg.lam if cfg.lam is not None else default_lambda(X.shape)
    mu1, mu2, mu3 = cfg.mu1, cfg.mu2, cfg.mu3
    n3 = X.shape[2]
    rng = make_rng(cfg.seed)
    L, E = _initial_LE(X, cfg)
    H = L.copy()
    D = E.copy()
    # Y starts at the value the H-subproblem forces from iteration 1 on
    # (see solve_tnf); warming U the same way proved counterproductive,
    # so the sparse-copy dual starts at zero as written.
    Y = -(tnn(L) / fro(H) ** 3) * H if fro(H) > 0 else np.zeros_like(X)
    Z = np.zeros_like(X)
    U = np.zeros_like(X)
    trace = IterTrace()
    converged = False
    k = 0
    for k in range(1, cfg.k_max + 1):
        t0 = time.perf_counter()
        hn = fro(H)
        if hn == 0.0:
            H = _fallback_tensor(float(np.cbrt(tnn(L) / mu1)), X.shape, rng)
            hn = fro(H)
        dn = fro(D)
        if dn == 0.0:
            D = _fallback_tensor(float(np.cbrt(lam * l1(E) / mu3)), X.shape, rng)
            dn = fro(D)
        tau = math.inf if hn == 0.0 else 1.0 / ((mu1 + mu2) * hn)
        L_new, sig = t_svt(
            (mu1 * H + mu2 * (X - E)) / (mu1 + mu2) - (Y + Z) / (mu1 + mu2), tau,
            return_sigma=True,
        )
        tnn_L = float(sig.sum()) / n3
        H_new = ratio_scale(tnn_L, mu1, L_new + Y / mu1, rng)[0]
        thr = math.inf if dn == 0.0 else lam / ((mu2 + mu3) * dn)
        E_new = shrink((mu2 * (X - L_new) + mu3 * D - Z - U) / (mu2 + mu3), thr)
        D_new = ratio_scale(lam * l1(E_new), mu3, E_new + U / mu3, rng)[0]
        Y_new = Y + mu1 * (L_new - H_new)
        gap_feas = L_new + E_new - X
        Z_new = Z + mu2 * gap_feas
        U_new = U + mu3 * (E_new - D_new)
        _ensure_finite(k, L=L_new, H=H_new, E=E_new, D=D_new, Y=Y_new, Z=Z_new, U=U_new)
        state = SolverState(L=L_new, E=E_new, H=H_new, D=D_new, Y=Y_new, Z=Z_new,
                            U=U_new, mu1=mu1, mu2=mu2, mu3=mu3, k=k)
        prev = SolverState(L=L, E=E, H=H, D=D, Y=Y, Z=Z, U=U)
        converged, res = check_convergence(state, prev, X, cfg.eps)
        try:
            lag = lagrangian_value(state, X, lam, tnn_L=tnn_L)
        except ZeroTensor:
            lag = NAN
        trace.append(
            lagrangian=lag, res_feas=res["feas"],
            res_LH=linf(L_new - H_new), res_ED=linf(E_new - D_new),
            dL=res["dL"], dH=res["dH"], dE=res["dE"], dD=res["dD"],
            dY=res["dY"], dZ=res["dZ"], dU=linf(U_new - U),
            tnf_L=_tnf_or_nan(tnn_L, L_new), l1_E=l1(E_new),
            ms=(time.perf_counter() - t0) * 1e3,
        )
        if callback is not None:
            callback(state)
        mu1 = min(mu1 * cfg.mu_growth, cfg.mu_cap)
        mu2 = min(mu2 * cfg.mu_growth, cfg.mu_cap)
        mu3 = min(mu3 * cfg.mu_growth, cfg.mu_cap)
        L, H, E, D, Y, Z, U = L_new, H_new, E_new, D_new, Y_new, Z_new, U_new
        if converged:
            break
    return SolverResult(L, E, converged, k, trace)
