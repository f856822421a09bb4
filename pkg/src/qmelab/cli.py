"""Command-line front end.

Exit codes: 0 success, 2 bad input or configuration, 3 reference overlap too
small, 1 anything else. Options can also come from a JSON file given with
``--config``; its keys are the long option names (``sigma``, ``shots``,
``input``, ...). Explicit flags win over the file. The seed falls back to
``$QMELAB_SEED`` and then to 0.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as qio
from .cost_model import compare_paths, log_slope
from .distributions import Distribution
from .errors import OverlapTooSmall, QmeError
from .fock_sim import (
    TruncationPolicy,
    as_scalar_sample,
    coherent_amplitudes,
    inner,
    lost_mass,
    min_truncation_dim,
    qme_state,
)
from .kernel_core import KernelSpec, embedding_norm, gram, mean_inner, mmd_biased_sq
from .ledger import CostLedger
from .qme_pipeline import (
    QmePipelineConfig,
    Reference,
    estimate_K,
    estimate_mmd_sq,
    estimate_norm_via_reference,
)
from .rng import ALGORITHM, TAG_TRIAL, derive_seed, resolve_seed, substream
from .swap_sim import recover_inner_positive, run_swap_shots

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_STATISTICAL = 0, 1, 2, 3

DEFAULTS = {
    "kernel": "gaussian",
    "sigma": 1.0,
    "shots": 100_000,
    "seed": None,
    "trials": None,
    "sizes": None,
    "input": [],
    "output": None,
    "path": None,
    "reference": "mean",
    "tol": 1e-12,
    "x_abs_max": None,
    "overlap_floor": 0.05,
    "full": False,
    "dist": "gaussian:0,1",
    "umax": 3.0,
    "dims": None,
    "grid": 61,
    "below_policy": False,
    "shots_grid": "100,1000,10000,100000,1000000",
    "wall_time": False,
}

TRIALS_DEFAULT = {"convergence": 100, "shot-noise": 200}
SIZES_DEFAULT = {
    "convergence": [2**k for k in range(5, 13)],
    "scaling": [2**k for k in range(3, 11)],
}


class InputError(QmeError, ValueError):
    pass


def _int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad integer list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--kernel", choices=["gaussian", "laplacian", "linear"])
    common.add_argument("--sigma", type=float)
    common.add_argument("--shots", type=int, help="shots per swap-test inner product")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--sizes", help="comma-separated sample sizes")
    common.add_argument("-i", "--input", action="append", help="CSV or JSON sample file (repeat for Y)")
    common.add_argument("-o", "--output", help="output file, .json or .csv (default: JSON on stdout)")
    common.add_argument("--path", choices=["classical", "quantum-exact", "quantum-sampled"])
    common.add_argument("--reference", help="mean | median | point=<x>")
    common.add_argument("--tol", type=float, help="truncation tail-mass tolerance")
    common.add_argument("--x-abs-max", type=float, dest="x_abs_max",
                        help="largest |x|/sigma the cutoff must cover (default: from the data)")
    common.add_argument("--overlap-floor", type=float, dest="overlap_floor")

    parser = argparse.ArgumentParser(prog="qmelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gram", parents=[common], help="K(X, Y) by the kernel trick").add_argument(
        "--full", action="store_true", help="also emit the Gram block"
    )
    sub.add_parser("mmd", parents=[common], help="biased squared MMD")
    sub.add_parser("qme-inner", parents=[common], help="<nu_X|nu_Y>")
    sub.add_parser("norm", parents=[common], help="embedding norm N_X")
    p = sub.add_parser("convergence", parents=[common], help="median MMD vs n for one distribution")
    p.add_argument("--dist", help="gaussian:m,s | uniform:a,b | mixture:w,m1,s1,m2,s2")
    p = sub.add_parser("truncation-study", parents=[common], help="kernel error vs Fock cutoff")
    p.add_argument("--umax", type=float, help="grid covers |x|/sigma <= umax")
    p.add_argument("--dims", help="comma-separated cutoffs (default 1..policy minimum)")
    p.add_argument("--grid", type=int, help="grid points per axis")
    p.add_argument("--below-policy", action="store_true", dest="below_policy",
                   help="allow requested cutoffs under the policy minimum")
    p = sub.add_parser("shot-noise", parents=[common], help="swap-test error vs shots")
    p.add_argument("--shots-grid", dest="shots_grid", help="comma-separated shot counts")
    p = sub.add_parser("scaling", parents=[common], help="resource counts vs n, both paths")
    p.add_argument("--wall-time", action="store_true", dest="wall_time",
                   help="include measured wall time (breaks byte-reproducibility)")
    return parser


def resolve_options(ns: argparse.Namespace) -> dict:
    given = vars(ns)
    opts = dict(DEFAULTS)
    if "config" in given:
        try:
            cfg = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {given['config']}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InputError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        opts.update(cfg)
    opts.update({k: v for k, v in given.items() if k != "config" and v is not None})
    if isinstance(opts["input"], str):
        opts["input"] = [opts["input"]]
    opts["seed"] = resolve_seed(opts["seed"])
    if opts["trials"] is None:
        opts["trials"] = TRIALS_DEFAULT.get(opts["command"])
    if opts["sizes"] is None:
        opts["sizes"] = SIZES_DEFAULT.get(opts["command"])
    else:
        opts["sizes"] = _int_list(opts["sizes"])
    return opts


def _provenance(opts: dict, **extra) -> dict:
    hashed = {k: v for k, v in opts.items() if k != "output"}
    return {
        "command": opts["command"],
        "seed": opts["seed"],
        "rng": ALGORITHM,
        "config_hash": qio.config_hash(hashed),
        **extra,
    }


def _emit(opts: dict, record: dict, csv_header=None, csv_rows=None) -> None:
    out = opts["output"]
    if out and Path(out).suffix.lower() == ".csv":
        if csv_header is None:
            flat = {k: v for k, v in record.items() if not isinstance(v, (dict, list))}
            csv_header, csv_rows = list(flat), [list(flat.values())]
        qio.write_csv(out, csv_header, csv_rows)
    elif out:
        Path(out).write_text(qio.dumps(record))
    else:
        sys.stdout.write(qio.dumps(record))


def _samples(opts: dict):
    """X and Y from the input files; Y defaults to X."""
    files = opts["input"]
    if not files:
        raise InputError("no input: pass -i/--input FILE (twice for X and Y)")
    if len(files) > 2:
        raise InputError("at most two input files (X and Y)")
    X = qio.load_sample(files[0])
    Y = qio.load_sample(files[1]) if len(files) > 1 else X
    return X, Y


def _kernel(opts) -> KernelSpec:
    return KernelSpec(opts["kernel"], float(opts["sigma"]))


def _pipeline(opts, *samples) -> QmePipelineConfig:
    if opts["kernel"] != "gaussian":
        raise InputError("the quantum path implements the Gaussian kernel only")
    sigma = float(opts["sigma"])
    x_abs = opts["x_abs_max"]
    if x_abs is None:
        x_abs = max(float(np.max(np.abs(as_scalar_sample(s)))) for s in samples) / sigma
    return QmePipelineConfig(
        sigma=sigma,
        truncation=TruncationPolicy(float(opts["tol"]), float(x_abs)),
        shots_per_inner=int(opts["shots"]),
        reference=Reference.parse(str(opts["reference"])),
        overlap_floor=float(opts["overlap_floor"]),
    )


def _path(opts, default="classical") -> str:
    return opts["path"] or default


def cmd_gram(opts) -> int:
    X, Y = _samples(opts)
    spec = _kernel(opts)
    ledger = CostLedger()
    value = mean_inner(spec, X, Y, ledger)
    rec = _provenance(opts, shots=None, kernel=spec.family, sigma=spec.sigma,
                      n_x=len(X), n_y=len(Y), value=value, ledger=ledger.to_dict())
    if opts["full"]:
        block = gram(spec, X, Y)
        rec["gram"] = block.tolist()
        _emit(opts, rec, [f"y{j}" for j in range(block.shape[1])], block.tolist())
    else:
        _emit(opts, rec)
    return EXIT_OK


def cmd_mmd(opts) -> int:
    X, Y = _samples(opts)
    path = _path(opts)
    ledger = CostLedger()
    if path == "classical":
        spec = _kernel(opts)
        value, raw = mmd_biased_sq(spec, X, Y, ledger, return_raw=True)
        rec = _provenance(opts, shots=None, path=path, kernel=spec.family, sigma=spec.sigma,
                          n_x=len(X), n_y=len(Y), value=value, raw=raw, stderr=0.0,
                          ledger=ledger.to_dict())
    else:
        cfg = _pipeline(opts, X, Y)
        exact = path == "quantum-exact"
        est = estimate_mmd_sq(X, Y, cfg, None if exact else opts["seed"], exact=exact, ledger=ledger)
        rec = _provenance(opts, shots=est.shots, path=path, kernel="gaussian", sigma=cfg.sigma,
                          n_x=len(X), n_y=len(Y), value=est.value, stderr=est.stderr,
                          clamped=est.clamped, fock_dim=cfg.truncation.dim,
                          components=est.kxy.to_dict(), pipeline=cfg.to_dict(),
                          ledger=ledger.to_dict())
    _emit(opts, rec)
    return EXIT_OK


def cmd_qme_inner(opts) -> int:
    X, Y = _samples(opts)
    path = _path(opts, "quantum-exact")
    cfg = _pipeline(opts, X, Y)
    ledger = CostLedger()
    if path == "classical":
        spec = cfg.kernel
        value = mean_inner(spec, X, Y, ledger) / (
            embedding_norm(spec, X, ledger) * embedding_norm(spec, Y, ledger))
        stderr, shots, clamped = 0.0, None, False
    else:
        nu_x = qme_state(X, cfg.sigma, cfg.truncation, ledger)
        nu_y = qme_state(Y, cfg.sigma, cfg.truncation, ledger)
        if path == "quantum-exact":
            value, stderr, shots, clamped = inner(nu_x, nu_y).real, 0.0, None, False
        else:
            est = recover_inner_positive(run_swap_shots(nu_x, nu_y, cfg.shots_per_inner,
                                                        opts["seed"], ledger))
            value, stderr, shots, clamped = est.value, est.stderr, est.shots, est.clamped
    rec = _provenance(opts, shots=shots, path=path, sigma=cfg.sigma, n_x=len(X), n_y=len(Y),
                      value=value, stderr=stderr, clamped=clamped, fock_dim=cfg.truncation.dim,
                      ledger=ledger.to_dict())
    _emit(opts, rec)
    return EXIT_OK


def cmd_norm(opts) -> int:
    X, _ = _samples(opts)
    path = _path(opts, "quantum-exact")
    ledger = CostLedger()
    if path == "classical":
        spec = _kernel(opts)
        value = embedding_norm(spec, X, ledger)
        rec = _provenance(opts, shots=None, path=path, n=len(X), value=value, stderr=0.0,
                          ledger=ledger.to_dict())
    else:
        cfg = _pipeline(opts, X)
        exact = path == "quantum-exact"
        est = estimate_norm_via_reference(X, cfg, None if exact else opts["seed"], exact=exact,
                                          ledger=ledger)
        rec = _provenance(opts, shots=est.norm.shots, path=path, n=len(X), value=est.value,
                          stderr=est.norm.stderr, c=est.c, x_ref=est.x_ref,
                          overlap=est.overlap.to_dict(), pipeline=cfg.to_dict(),
                          ledger=ledger.to_dict())
    _emit(opts, rec)
    return EXIT_OK


def convergence_rows(dist: Distribution, spec: KernelSpec, sizes, trials: int, seed: int):
    """Per-size median of sqrt(MMD_b^2) over same-distribution sample pairs.

    Trial t at size n draws X and Y from streams (seed, TAG_TRIAL, n, t, 0|1).
    """
    rows = []
    for n in sizes:
        vals = []
        for t in range(trials):
            X = dist.sample(substream(seed, TAG_TRIAL, n, t, 0), n)
            Y = dist.sample(substream(seed, TAG_TRIAL, n, t, 1), n)
            vals.append(math.sqrt(mmd_biased_sq(spec, X, Y)))
        rows.append((n, float(np.median(vals)), float(np.mean(vals))))
    return rows


def cmd_convergence(opts) -> int:
    trials, sizes = opts["trials"], opts["sizes"]
    if trials is None or trials < 1:
        raise InputError("trials must be at least 1")
    if not sizes or len(sizes) < 2 or min(sizes) < 1:
        raise InputError("need at least two positive sizes")
    dist = Distribution.parse(str(opts["dist"]))
    spec = _kernel(opts)
    rows = convergence_rows(dist, spec, sizes, trials, opts["seed"])
    slope = log_slope([r[0] for r in rows], [r[1] for r in rows])
    rec = _provenance(opts, shots=None, dist=str(dist), kernel=spec.family, sigma=spec.sigma,
                      trials=trials, slope=slope,
                      rows=[{"n": n, "median_mmd": m, "mean_mmd": a} for n, m, a in rows])
    header = ["n", "median_mmd", "mean_mmd", "trials", "slope", "seed", "config_hash"]
    _emit(opts, rec, header,
          [[n, m, a, trials, slope, rec["seed"], rec["config_hash"]] for n, m, a in rows])
    return EXIT_OK


def truncation_errors(u_max: float, dims, grid: int = 61):
    """Max |<phi(u)|phi(u')> - exp(-(u - u')^2 / 2)| over a grid, for each cutoff."""
    u = np.linspace(-u_max, u_max, grid) if u_max > 0 else np.zeros(1)
    target = np.exp(-0.5 * (u[:, None] - u[None, :]) ** 2)
    out = []
    for d in dims:
        A = coherent_amplitudes(u, d)
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        err = float(np.max(np.abs(A @ A.T - target)))
        out.append((d, err, lost_mass(u_max, d)))
    return out


def cmd_truncation_study(opts) -> int:
    u_max, tol, grid = float(opts["umax"]), float(opts["tol"]), int(opts["grid"])
    if not (u_max >= 0 and math.isfinite(u_max)) or grid < 1:
        raise InputError("umax must be finite and non-negative, grid positive")
    d_min = min_truncation_dim(u_max, tol)
    if opts["dims"] is None:
        dims = list(range(1, d_min + 1))
    else:
        dims = sorted(set(_int_list(opts["dims"])))
        if not dims or dims[0] < 1:
            raise InputError("cutoffs must be positive")
        low = [d for d in dims if d < d_min]
        if low and not opts["below_policy"]:
            raise InputError(
                f"cutoffs {low} are below the policy minimum d={d_min} for "
                f"|x|/sigma <= {u_max:g} at tol {tol:g}; pass --below-policy to study them"
            )
    rows = truncation_errors(u_max, dims, grid)
    rec = _provenance(opts, shots=None, umax=u_max, tol=tol, grid=grid, policy_dim=d_min,
                      rows=[{"d": d, "max_error": e, "tail_mass": m, "meets_policy": d >= d_min}
                            for d, e, m in rows])
    header = ["d", "max_error", "tail_mass", "meets_policy", "policy_dim", "config_hash"]
    _emit(opts, rec, header,
          [[d, e, m, int(d >= d_min), d_min, rec["config_hash"]] for d, e, m in rows])
    return EXIT_OK


def cmd_shot_noise(opts) -> int:
    if len(opts["input"]) != 2:
        raise InputError("shot-noise needs two inputs (-i X -i Y)")
    X, Y = _samples(opts)
    trials = opts["trials"]
    if trials is None or trials < 2:
        raise InputError("trials must be at least 2")
    grid = _int_list(opts["shots_grid"])
    if len(grid) < 2 or min(grid) < 1:
        raise InputError("need at least two positive shot counts")
    cfg = _pipeline(opts, X, Y)
    nu_x = qme_state(X, cfg.sigma, cfg.truncation)
    nu_y = qme_state(Y, cfg.sigma, cfg.truncation)
    exact = abs(inner(nu_x, nu_y)) ** 2
    rows = []
    for shots in grid:
        ests = [run_swap_shots(nu_x, nu_y, shots, derive_seed(opts["seed"], TAG_TRIAL, shots, t))
                for t in range(trials)]
        vals = np.array([e.value for e in ests])
        rows.append((shots, float(vals.mean()), float(vals.std(ddof=1)),
                     float(np.mean([e.stderr for e in ests]))))
    slope = log_slope([r[0] for r in rows], [r[2] for r in rows])
    rec = _provenance(opts, shots=grid, trials=trials, exact_fidelity=exact, slope=slope,
                      rows=[{"shots": s, "mean": m, "empirical_std": sd, "mean_stderr": se}
                            for s, m, sd, se in rows])
    header = ["shots", "mean", "empirical_std", "mean_stderr", "exact", "slope", "config_hash"]
    _emit(opts, rec, header, [[s, m, sd, se, exact, slope, rec["config_hash"]]
                              for s, m, sd, se in rows])
    return EXIT_OK


def cmd_scaling(opts) -> int:
    sizes = opts["sizes"]
    if not sizes or len(sizes) < 4:
        raise InputError("scaling needs at least 4 sizes")
    if opts["kernel"] != "gaussian":
        raise InputError("the quantum path implements the Gaussian kernel only")
    sigma = float(opts["sigma"])
    cfg = QmePipelineConfig(
        sigma=sigma,
        truncation=TruncationPolicy(float(opts["tol"]), float(opts["x_abs_max"] or 2.0)),
        shots_per_inner=int(opts["shots"]),
        reference=Reference.parse(str(opts["reference"])),
        overlap_floor=float(opts["overlap_floor"]),
    )
    report = compare_paths(sizes, cfg, opts["seed"])
    rec = _provenance(opts, shots=cfg.shots_per_inner, **report.to_dict(opts["wall_time"]))
    header = ["n", "path", "kernel_evals", "state_preps", "swap_shots", "wall_time_ns"]
    rows = [list(r) for r in report.rows()]
    if not opts["wall_time"]:
        for r in rows:
            r[-1] = ""
    _emit(opts, rec, header, rows)
    return EXIT_OK


COMMANDS = {
    "gram": cmd_gram,
    "mmd": cmd_mmd,
    "qme-inner": cmd_qme_inner,
    "norm": cmd_norm,
    "convergence": cmd_convergence,
    "truncation-study": cmd_truncation_study,
    "shot-noise": cmd_shot_noise,
    "scaling": cmd_scaling,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = resolve_options(ns)
        return COMMANDS[opts["command"]](opts)
    except OverlapTooSmall as exc:
        print(f"qmelab: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL
    except (ValueError, OSError) as exc:
        print(f"qmelab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"qmelab: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
