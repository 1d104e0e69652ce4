"""Command-line drivers: data generation, QR/PCA diagnostics, operator fits,
prediction-error sweeps and modal decomposition, all emitting CSV/JSON for
external plotting.

Exit codes: 0 ok, 2 validation failure, 3 I/O failure, 4 numerical
precondition failure (e.g. a singular eigenvector matrix).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dynamics, orthonorm, pca
from ._rand import normal, philox
from .datagen import gen_clusters, gen_interacting
from .errors import AllZeroGram, DimensionMismatch, RkhmError, SingularEigvecMatrix
from .kernels import (
    ScalarKernelSpec,
    StructuredSample,
    gram,
    kernel_column,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


# ---------------------------------------------------------------- I/O helpers

def _fmt(x: float) -> str:
    return repr(float(x))


def write_samples_csv(path, samples: list[StructuredSample]):
    m, d = samples[0].m, samples[0].d
    header = ",".join(f"e{i + 1}_c{j + 1}" for i in range(m) for j in range(d))
    lines = [header]
    for x in samples:
        lines.append(",".join(_fmt(v) for v in x.elements.reshape(-1)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_raw_csv(path) -> np.ndarray:
    """Rows x columns float array from a headered CSV."""
    text = Path(path).read_text().strip().splitlines()
    if len(text) < 2:
        raise DimensionMismatch(f"{path}: no data rows")
    rows = [[float(v) for v in line.split(",")] for line in text[1:]]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionMismatch(f"{path}: ragged rows")
    return np.asarray(rows, dtype=np.float64)


def read_samples_csv(path, m: int, d: int | None = None) -> list[StructuredSample]:
    arr = read_raw_csv(path)
    if m < 1 or arr.shape[1] % m:
        raise DimensionMismatch(
            f"{path}: {arr.shape[1]} columns not divisible by m={m}"
        )
    if d is not None and arr.shape[1] != m * d:
        raise DimensionMismatch(
            f"{path}: {arr.shape[1]} columns, expected m*d = {m * d}"
        )
    d = arr.shape[1] // m
    return [StructuredSample(row.reshape(m, d)) for row in arr]


def block_to_json(b: np.ndarray) -> dict:
    return {
        "re": [[_float(v.real) for v in row] for row in b],
        "im": [[_float(v.imag) for v in row] for row in b],
    }


def _float(x) -> float:
    return float(x)


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _kernel_spec(args) -> ScalarKernelSpec:
    return ScalarKernelSpec(family=args.family, gamma=args.gamma)


def _epsilon(args) -> float:
    if args.eps2 < 0:
        from .errors import NegativeEpsilon

        raise NegativeEpsilon(f"--eps2 must be >= 0, got {args.eps2}")
    return float(np.sqrt(args.eps2))


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    if not _:
        lo = hi = text
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise DimensionMismatch(f"empty range {text!r}")
    return lo, hi


# ------------------------------------------------------------- preprocessing

def _load_series(args) -> list[StructuredSample]:
    """Structured samples from CSV, with the optional delay-embed pipeline.

    With --delay-embed W the input is read as a raw multichannel series;
    seeded noise of std --perturb-sigma is added per scalar, each channel
    is normalized to mean 0 / std 1 over time, and windows of length W
    are stacked (channel-fastest) into samples with m = channels * W.
    """
    if args.delay_embed:
        raw = read_raw_csv(args.input)
        if args.perturb_sigma > 0:
            rng = philox(args.seed)
            raw = raw + args.perturb_sigma * normal(rng, raw.shape)
        raw = (raw - raw.mean(axis=0)) / raw.std(axis=0)
        return dynamics.delay_embed(raw, args.delay_embed)
    samples = read_samples_csv(args.input, args.m, args.d)
    if args.perturb_sigma > 0:
        samples = dynamics.perturb(samples, args.perturb_sigma, args.seed)
    return samples


# ------------------------------------------------------------------ commands

def cmd_gen(args):
    if args.kind == "interacting":
        samples = gen_interacting(args.m, args.T - 1, args.sigma, args.seed)
        write_samples_csv(args.output, samples)
    else:
        samples, labels = gen_clusters(args.count, args.sigma, args.seed)
        write_samples_csv(args.output, samples)
        label_path = Path(args.output).with_suffix(".labels.csv")
        label_path.write_text("label\n" + "\n".join(str(v) for v in labels) + "\n")


def cmd_qr(args):
    samples = read_samples_csv(args.input, args.m, args.d)
    g = gram(_kernel_spec(args), samples)
    factors = orthonorm.rkhm_qr(g, _epsilon(args))
    diag = orthonorm.qr_diagnostics(factors, g)
    diag.update({"m": g.m, "n": g.n, "eps2": args.eps2})
    write_json(args.output, diag)


def cmd_pca(args):
    spec = _kernel_spec(args)
    samples = read_samples_csv(args.input, args.m, args.d)
    g = gram(spec, samples)
    model = pca.pca_fit(g, centered=args.centered)
    axes = min(args.axes, model.l)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)

    entries = []
    embed_rows = []
    for t in range(model.n):
        g_col = kernel_column(spec, samples, samples[t])
        blocks, rows, norms = [], [], []
        for s in range(axes):
            row = pca.pc_first_row(model, s, g_col)
            blocks.append(block_to_json(pca.pc_coefficient(model, s, g_col)))
            rows.append({"re": [_float(v.real) for v in row],
                         "im": [_float(v.imag) for v in row]})
            norms.append(_float(np.linalg.norm(row)))
        entries.append({"index": t, "blocks": blocks, "first_rows": rows,
                        "norms": norms})
        embed_rows.append((norms, [v.real for s in range(axes)
                                   for v in pca.pc_first_row(model, s, g_col)]))

    write_json(outdir / "coefficients.json", {
        "m": model.m, "n": model.n, "axes": axes,
        "centered": model.centered,
        "sigma": [_float(v) for v in model.sigma],
        "entries": entries,
    })
    header = ",".join(
        ["index"]
        + [f"norm_{s + 1}" for s in range(axes)]
        + [f"row{s + 1}_{i + 1}" for s in range(axes) for i in range(model.m)]
    )
    lines = [header]
    for t, (norms, flat_rows) in enumerate(embed_rows):
        lines.append(",".join([str(t)] + [_fmt(v) for v in norms]
                              + [_fmt(v) for v in flat_rows]))
    (outdir / "embeddings.csv").write_text("\n".join(lines) + "\n")


def cmd_pf_fit(args):
    spec = _kernel_spec(args)
    series = _load_series(args)
    if args.T is not None:
        series = series[: args.T + 1]
    model = dynamics.pf_fit(spec, series, _epsilon(args))
    diag = orthonorm.qr_diagnostics(model.qr, model.gram)
    diag.update({
        "m": model.m,
        "T": model.basis_size,
        "eps2": args.eps2,
        "rank_total": int(sum(model.qr.ranks)),
        "k_norm": _float(model.k_matrix.norm()),
    })
    write_json(args.output, diag)


def cmd_pf_error(args):
    spec = _kernel_spec(args)
    eps = _epsilon(args)
    s_lo, s_hi = _parse_range(args.S)

    if args.sweep_T:
        t_lo, t_hi = _parse_range(args.sweep_T)
        _sweep_pf_error(args, spec, eps, s_lo, t_lo, t_hi)
        return

    series = _load_series(args)
    t_basis = args.T if args.T is not None else len(series) - 1
    model = dynamics.pf_fit(spec, series[: t_basis + 1], eps)
    rows = []
    matrices = {}
    for s in range(s_lo, s_hi + 1):
        if not 1 <= s < len(series):
            raise DimensionMismatch(f"S={s} outside the series (length {len(series)})")
        err = dynamics.predict_error(model, series[s - 1], series[s])
        trace, norm = float(np.trace(err).real), float(np.linalg.norm(err, 2))
        rows.append((s, trace, norm))
        matrices[str(s)] = {**block_to_json(err), "trace": trace, "norm": norm}
    lines = ["S,trace,norm"] + [
        f"{s},{_fmt(tr)},{_fmt(nm)}" for s, tr, nm in rows
    ]
    Path(args.output).write_text("\n".join(lines) + "\n")
    write_json(Path(args.output).with_suffix(".json"),
               {"m": model.m, "T": model.basis_size, "eps2": args.eps2,
                "errors": matrices})


def _sweep_pf_error(args, spec, eps, s_index, t_lo, t_hi):
    """Convergence criterion ||a_{T+1,S} - a_{T,S}|| per T, seed-averaged."""
    t_values = list(range(t_lo, t_hi + 1))
    per_seed = []
    for r in range(args.seeds):
        seed = args.seed + r
        if args.input:
            series = _load_series(args)
        else:
            steps = max(t_hi, s_index) + 1
            series = gen_interacting(args.m, steps, args.gen_sigma, seed)
        out = dynamics.sweep_prediction_errors(
            series, spec, eps, s_index, t_values,
            gram_jitter=args.gram_jitter, jitter_seed=seed,
        )
        crit = [
            float(np.linalg.norm(out["errors"][t + 1] - out["errors"][t], 2))
            for t in t_values[:-1]
        ]
        per_seed.append(crit)
    arr = np.asarray(per_seed)
    mean = arr.mean(axis=0)
    stderr = (arr.std(axis=0, ddof=1) / np.sqrt(arr.shape[0])
              if arr.shape[0] > 1 else np.zeros(arr.shape[1]))
    lines = ["T,criterion_mean,criterion_stderr"] + [
        f"{t},{_fmt(mu)},{_fmt(se)}"
        for t, mu, se in zip(t_values[:-1], mean, stderr)
    ]
    Path(args.output).write_text("\n".join(lines) + "\n")


def cmd_modal(args):
    spec = _kernel_spec(args)
    series = _load_series(args)
    if args.T is not None:
        series = series[: args.T + 1]
    model = dynamics.pf_fit(spec, series, _epsilon(args))
    md = dynamics.modal_decompose(model, unit_circle_tol=args.delta)
    cinv = dynamics.invariant_term(md)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "modal.json", {
        "m": model.m,
        "T": model.basis_size,
        "eps2": args.eps2,
        "delta": args.delta,
        "eigenvalues": {
            "re": [_float(v.real) for v in md.eigenvalues],
            "im": [_float(v.imag) for v in md.eigenvalues],
        },
        "unit_band_size": int(dynamics.unit_circle_set(md).size),
        "c_inv": {
            **block_to_json(cinv),
            "trace": float(np.trace(cinv).real),
            "norm": float(np.linalg.norm(cinv, 2)),
        },
    })
    lines = [",".join(f"c{j + 1}" for j in range(model.m))]
    for row in np.abs(cinv):
        lines.append(",".join(_fmt(v) for v in row))
    (outdir / "cinv_abs.csv").write_text("\n".join(lines) + "\n")


# -------------------------------------------------------------------- parser

def _add_kernel_flags(p):
    p.add_argument("--family", choices=["laplacian", "gaussian"], default="laplacian")
    p.add_argument("--gamma", type=float, default=1.0)


def _add_series_flags(p):
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, default=1,
                   help="elements per sample (ignored with --delay-embed)")
    p.add_argument("--d", type=int, default=None,
                   help="element dimension (validated; inferred when omitted)")
    p.add_argument("--delay-embed", type=int, default=0, metavar="W",
                   help="treat input as raw channels; embed windows of length W")
    p.add_argument("--perturb-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=int, default=None,
                   help="basis snapshots (default: all but the last sample)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rkhm")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic datasets")
    p.add_argument("--kind", choices=["interacting", "clusters"], required=True)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--T", type=int, default=31, help="rows for kind=interacting")
    p.add_argument("--count", type=int, default=20, help="per-cluster samples")
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("qr", help="orthonormalization diagnostics")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--eps2", type=float, default=0.0)
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_qr)

    p = sub.add_parser("pca", help="principal components with block coefficients")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--axes", type=int, default=2)
    p.add_argument("--centered", action="store_true")
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("pf-fit", help="fit the one-step evolution operator")
    _add_series_flags(p)
    p.add_argument("--eps2", type=float, required=True)
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pf_fit)

    p = sub.add_parser("pf-error", help="matrix-valued prediction errors")
    p.add_argument("--input", default=None)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--delay-embed", type=int, default=0, metavar="W")
    p.add_argument("--perturb-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--S", required=True, help="snapshot index or lo:hi range")
    p.add_argument("--sweep-T", default=None, metavar="LO:HI",
                   help="emit the criterion ||a_{T+1,S} - a_{T,S}|| per T")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--gen-sigma", type=float, default=0.01,
                   help="process noise when generating sweep data (no --input)")
    p.add_argument("--gram-jitter", type=float, default=0.0,
                   help="relative Gram perturbation emulating low precision")
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pf_error)

    p = sub.add_parser("modal", help="eigenpairs and the time-invariant block")
    _add_series_flags(p)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    _add_kernel_flags(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_modal)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "pf-error" and not args.sweep_T and not args.input:
            raise DimensionMismatch("--input is required without --sweep-T")
        args.func(args)
    except (SingularEigvecMatrix, AllZeroGram) as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RkhmError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
