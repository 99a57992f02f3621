"""Command-line interface.

Four subcommands cover the workloads end to end:

* ``decompose``   one tensor file in, low-rank/sparse tensor files out.
* ``grid``        phase-transition success-rate sweep to CSV.
* ``denoise``     corrupt an image, sweep the sparsity weight, report
                  PSNR/SSIM per weight and keep the best recovery.
* ``background``  stack video frames, split background from motion.

Report paths write CSV as the machine-readable contract and render a
PNG figure next to each CSV (suppress with ``--no-figures``).  Every
subcommand prints its fully resolved configuration, accepts a
``key = value`` config file whose entries the flags override, and is
deterministic given identical flags and seed (the trace's wall-time
column excepted).

Exit codes: 0 success/convergence, 1 usage or I/O or numerical failure,
2 iteration cap reached without convergence.
"""

from __future__ import annotations

import argparse
import math
import os
import shutil
import sys

import numpy as np

from .errors import InvalidParam, TrpcaError
from .experiments import run_grid, solver_for
from .metrics import psnr, ssim
from .solvers import SolverConfig, TNF_SYNTHETIC_LAMBDA, default_lambda
from .tensor import Dims, linf
from .tensorio import (
    corrupt_salt,
    load_frames,
    load_ppm,
    read_tns,
    save_gray_ppm,
    save_ppm,
    write_tns,
)

METHODS = ("tnn", "tnf", "tnf+")

# Per-workload penalty defaults, keyed by (task, method).
TASK_MU = {
    ("synthetic", "tnn"): dict(mu1=1e-4, mu2=1e-3, mu3=1e-3),
    ("synthetic", "tnf"): dict(mu1=1e-4, mu2=1e-3, mu3=1e-3),
    ("synthetic", "tnf+"): dict(mu1=1e-4, mu2=1e-3, mu3=1e-3),
    ("image", "tnn"): dict(mu1=1e-4, mu2=1e-4, mu3=1e-4),
    ("image", "tnf"): dict(mu1=1e-4, mu2=1e-4, mu3=1e-4),
    ("image", "tnf+"): dict(mu1=1e-4, mu2=1e-2, mu3=1e-4),
    ("video", "tnn"): dict(mu1=1e-5, mu2=1e-5, mu3=1e-5),
    ("video", "tnf"): dict(mu1=1e-5, mu2=1e-5, mu3=1e-5),
    ("video", "tnf+"): dict(mu1=1e-5, mu2=1e-3, mu3=1e-5),
}

# Weight-sweep defaults for the denoising workload.
SWEEP_DEFAULT = {
    "tnf": "4.5e-5:0.5e-5:6.5e-5",
    "tnf+": "1.6e-2:0.4e-2:2.8e-2",
}


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors; 2 means no-converge."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_float_range(text: str):
    """Parse ``lo:step:hi`` (inclusive) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise InvalidParam(f"range must be lo:step:hi, got {text!r}")
    lo, step, hi = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise InvalidParam(f"range {text!r} needs step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def parse_int_range(text: str):
    vals = parse_float_range(text)
    out = [int(round(v)) for v in vals]
    if any(abs(v - i) > 1e-9 for v, i in zip(vals, out)):
        raise InvalidParam(f"range {text!r} must contain integers")
    return out


def parse_dims(text: str) -> Dims:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise InvalidParam(f"dims must be n1xn2xn3, got {text!r}")
    return Dims(*(int(p) for p in parts))


def load_config_file(path, known: set):
    """Read ``key = value`` lines; '#' starts a comment; unknown keys fail."""
    vals = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParam(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise InvalidParam(f"{path}:{lineno}: unknown config key {key!r}")
            vals[key] = value
    return vals


def _resolve(ns, schema, config_path):
    """Merge defaults, config file, and flags; return {key: value}."""
    resolved = {key: default for key, (_, default, _) in schema.items()}
    if config_path:
        raw = load_config_file(config_path, set(schema))
        for key, text in raw.items():
            typ = schema[key][0]
            resolved[key] = (text.lower() in ("1", "true", "yes")) if typ is bool else typ(text)
    for key, (typ, _, _) in schema.items():
        given = getattr(ns, key.replace("-", "_"))
        if given is not None:
            resolved[key] = given
    return resolved


def _print_config(name, resolved):
    print(f"[{name}] resolved configuration:")
    for key in sorted(resolved):
        print(f"  {key} = {resolved[key]}")


def _add_schema(parser, schema):
    for key, (typ, default, help_text) in schema.items():
        flag = "--" + key
        dest = key.replace("-", "_")
        if key in ("input", "image", "frames"):
            text = f"{help_text} (required)"
        else:
            shown = "per method/task" if default is None else default
            text = f"{help_text} (default: {shown})"
        if typ is bool:
            parser.add_argument(flag, dest=dest, action="store_const", const=True,
                                default=None, help=text)
        else:
            parser.add_argument(flag, dest=dest, type=typ, default=None,
                                metavar=key.upper().replace("-", "_"), help=text)
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="key = value file; flags override its entries")


def _pick(value, default):
    return default if value is None else value


def _solver_config(cfg_vals, task, method, shape) -> SolverConfig:
    mu = TASK_MU[(task, method)]
    lam = cfg_vals.get("lambda")
    if lam is None:
        if task == "video" and method == "tnf":
            lam = 1e-6
        elif method == "tnf" and task == "synthetic":
            lam = TNF_SYNTHETIC_LAMBDA
        elif method == "tnf" and task == "image":
            # midpoint of the sweep range; the sweep itself overrides this
            lam = 5.5e-5
        else:
            lam = default_lambda(shape)
    return SolverConfig(
        lam=lam,
        mu1=_pick(cfg_vals.get("mu1"), mu["mu1"]),
        mu2=_pick(cfg_vals.get("mu2"), mu["mu2"]),
        mu3=_pick(cfg_vals.get("mu3"), mu["mu3"]),
        eps=_pick(cfg_vals.get("eps"), 1e-4),
        k_max=_pick(cfg_vals.get("kmax"), 500),
        seed=_pick(cfg_vals.get("seed"), 0),
    )


# ---------------------------------------------------------------- decompose

DECOMPOSE_SCHEMA = {
    "input": (str, None, "input tensor (TNS1)"),
    "method": (str, "tnf", "tnn | tnf | tnf+"),
    "lambda": (float, None, "sparsity weight (default depends on method)"),
    "mu1": (float, None, "penalty on the low-rank copy constraint"),
    "mu2": (float, None, "penalty on the data-fit constraint"),
    "mu3": (float, None, "penalty on the sparse copy constraint (tnf+ only)"),
    "eps": (float, 1e-4, "stopping tolerance on all infinity-norm conditions"),
    "kmax": (int, 500, "iteration cap"),
    "seed": (int, 0, "seed for the degenerate-restart stream"),
    "out-prefix": (str, "decomposed", "prefix for .L.tns/.E.tns/.trace.csv"),
    "no-figures": (bool, False, "skip PNG rendering next to the CSV"),
}


def cmd_decompose(ns) -> int:
    vals = _resolve(ns, DECOMPOSE_SCHEMA, ns.config)
    if vals["input"] is None:
        raise InvalidParam("decompose requires --input")
    if vals["method"] not in METHODS:
        raise InvalidParam(f"method must be one of {METHODS}")
    X = read_tns(vals["input"])
    cfg = _solver_config(vals, "synthetic", vals["method"], X.shape)
    vals["lambda"] = cfg.lam
    vals["mu1"], vals["mu2"], vals["mu3"] = cfg.mu1, cfg.mu2, cfg.mu3
    _print_config("decompose", vals)
    res = solver_for(vals["method"])(X, cfg)
    prefix = vals["out-prefix"]
    write_tns(prefix + ".L.tns", res.L_hat)
    write_tns(prefix + ".E.tns", res.E_hat)
    res.trace.to_csv(prefix + ".trace.csv")
    if not vals["no-figures"]:
        from .figures import save_trace_figure

        save_trace_figure(res.trace, prefix + ".trace.png")
    print(f"converged={res.converged} iterations={res.iterations}", file=sys.stderr)
    return 0 if res.converged else 2


# --------------------------------------------------------------------- grid

GRID_SCHEMA = {
    "ranks": (str, "1:2:19", "tubal ranks, lo:step:hi"),
    "sparsities": (str, "0.05:0.05:0.5", "corruption rates, lo:step:hi"),
    "trials": (int, 10, "trials per cell"),
    "method": (str, "tnf", "tnn | tnf | tnf+"),
    "dims": (str, "40x40x30", "tensor size n1xn2xn3"),
    "lambda": (float, None, "sparsity weight (default depends on method)"),
    "eps": (float, 1e-4, "stopping tolerance"),
    "kmax": (int, 500, "iteration cap"),
    "seed": (int, 0, "master seed; cell (i,j,t) derives its own"),
    "workers": (int, 1, "parallel workers across trials"),
    "out": (str, "grid.csv", "output CSV path"),
    "no-figures": (bool, False, "skip PNG rendering next to the CSV"),
}


def cmd_grid(ns) -> int:
    vals = _resolve(ns, GRID_SCHEMA, ns.config)
    if vals["method"] not in METHODS:
        raise InvalidParam(f"method must be one of {METHODS}")
    if vals["trials"] < 1:
        raise InvalidParam(f"trials must be >= 1, got {vals['trials']}")
    ranks = parse_int_range(vals["ranks"])
    sparsities = parse_float_range(vals["sparsities"])
    dims = parse_dims(vals["dims"])
    cfg = _solver_config(vals, "synthetic", vals["method"], dims.shape)
    vals["lambda"] = cfg.lam
    _print_config("grid", vals)
    grid = run_grid(
        ranks,
        sparsities,
        vals["trials"],
        vals["method"],
        cfg,
        dims=dims,
        master_seed=vals["seed"],
        workers=vals["workers"],
        progress=lambda msg: print(msg, file=sys.stderr),
    )
    grid.to_csv(vals["out"])
    if not vals["no-figures"]:
        from .figures import save_grid_heatmap

        save_grid_heatmap(grid, os.path.splitext(vals["out"])[0] + ".png")
    for r, sp, t, msg in grid.failures:
        print(f"failed trial rank={r} sparsity={sp} trial={t}: {msg}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ denoise

DENOISE_SCHEMA = {
    "image": (str, None, "input image (P6 PPM)"),
    "corrupt": (float, 0.2, "fraction of pixels to corrupt"),
    "method": (str, "tnf", "tnn | tnf | tnf+"),
    "lambda-sweep": (str, None, "weights to try, lo:step:hi (default per method)"),
    "eps": (float, 1e-4, "stopping tolerance"),
    "kmax": (int, 500, "iteration cap"),
    "mu1": (float, None, "penalty override"),
    "mu2": (float, None, "penalty override"),
    "mu3": (float, None, "penalty override"),
    "seed": (int, 0, "corruption seed"),
    "out-dir": (str, "denoised", "output directory"),
    "no-figures": (bool, False, "skip PNG rendering next to the CSV"),
}


def cmd_denoise(ns) -> int:
    vals = _resolve(ns, DENOISE_SCHEMA, ns.config)
    if vals["image"] is None:
        raise InvalidParam("denoise requires --image")
    if vals["method"] not in METHODS:
        raise InvalidParam(f"method must be one of {METHODS}")
    img = load_ppm(vals["image"])
    sweep_text = vals["lambda-sweep"] or SWEEP_DEFAULT.get(
        vals["method"], f"{default_lambda(img.shape):.6g}"
    )
    vals["lambda-sweep"] = sweep_text
    lambdas = parse_float_range(sweep_text)
    _print_config("denoise", vals)
    out_dir = vals["out-dir"]
    os.makedirs(out_dir, exist_ok=True)
    noisy, _ = corrupt_salt(img, vals["corrupt"], vals["seed"])
    save_ppm(noisy, os.path.join(out_dir, "noisy.ppm"))
    print(f"noisy PSNR = {psnr(img, noisy):.4f} dB", file=sys.stderr)
    rows = []
    best = None
    for lam in lambdas:
        cfg = _solver_config({**vals, "lambda": lam}, "image", vals["method"], img.shape)
        res = solver_for(vals["method"])(noisy, cfg)
        p = psnr(img, res.L_hat)
        s = ssim(img, res.L_hat)
        name = f"recovered_{lam:.6g}.ppm"
        save_ppm(res.L_hat, os.path.join(out_dir, name))
        rows.append((lam, p, s))
        if best is None or p > best[1]:
            best = (name, p)
        print(f"lambda={lam:.6g} psnr={p:.4f} ssim={s:.4f} "
              f"iters={res.iterations}", file=sys.stderr)
    report = os.path.join(out_dir, "report.csv")
    with open(report, "w", encoding="utf-8") as f:
        f.write("lambda,psnr,ssim\n")
        for lam, p, s in rows:
            f.write(f"{lam:.17g},{p:.17g},{s:.17g}\n")
    shutil.copyfile(os.path.join(out_dir, best[0]), os.path.join(out_dir, "best.ppm"))
    if not vals["no-figures"]:
        from .figures import save_sweep_figure

        save_sweep_figure([r[0] for r in rows], [r[1] for r in rows],
                          [r[2] for r in rows], os.path.join(out_dir, "report.png"))
    return 0


# --------------------------------------------------------------- background

BACKGROUND_SCHEMA = {
    "frames": (str, None, "directory of same-sized P6 PPM frames"),
    "method": (str, "tnf", "tnn | tnf | tnf+"),
    "lambda": (float, None, "sparsity weight (default per method)"),
    "mu1": (float, None, "penalty override"),
    "mu2": (float, None, "penalty override"),
    "mu3": (float, None, "penalty override"),
    "eps": (float, 1e-4, "stopping tolerance"),
    "kmax": (int, 500, "iteration cap"),
    "seed": (int, 0, "seed for the degenerate-restart stream"),
    "out-dir": (str, "background", "output directory"),
    "no-figures": (bool, False, "skip PNG rendering"),
}


def cmd_background(ns) -> int:
    vals = _resolve(ns, BACKGROUND_SCHEMA, ns.config)
    if vals["frames"] is None:
        raise InvalidParam("background requires --frames")
    if vals["method"] not in METHODS:
        raise InvalidParam(f"method must be one of {METHODS}")
    paths = sorted(
        os.path.join(vals["frames"], name)
        for name in os.listdir(vals["frames"])
        if name.lower().endswith(".ppm")
    )
    T = load_frames(paths)
    cfg = _solver_config(vals, "video", vals["method"], T.shape)
    vals["lambda"] = cfg.lam
    vals["mu1"], vals["mu2"], vals["mu3"] = cfg.mu1, cfg.mu2, cfg.mu3
    _print_config("background", vals)
    res = solver_for(vals["method"])(T, cfg)
    out_dir = vals["out-dir"]
    os.makedirs(out_dir, exist_ok=True)
    fg = np.abs(res.E_hat)
    fg_peak = linf(fg)
    if fg_peak > 0:
        fg = fg * (255.0 / fg_peak)
    for k in range(T.shape[2]):
        save_gray_ppm(res.L_hat[:, :, k], os.path.join(out_dir, f"bg_{k:04d}.ppm"))
        save_gray_ppm(fg[:, :, k], os.path.join(out_dir, f"fg_{k:04d}.ppm"))
    print(f"converged={res.converged} iterations={res.iterations}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> _Parser:
    parser = _Parser(prog="trpca",
                     description="Low-tubal-rank plus sparse tensor decomposition")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema, fn, desc in (
        ("decompose", DECOMPOSE_SCHEMA, cmd_decompose,
         "decompose one tensor file into low-rank and sparse parts"),
        ("grid", GRID_SCHEMA, cmd_grid,
         "success-rate sweep over rank and corruption level"),
        ("denoise", DENOISE_SCHEMA, cmd_denoise,
         "corrupt an image and sweep the sparsity weight"),
        ("background", BACKGROUND_SCHEMA, cmd_background,
         "separate video frames into background and motion"),
    ):
        p = sub.add_parser(name, help=desc, description=desc)
        _add_schema(p, schema)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.fn(ns)
    except TrpcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
