"""Batch command line: ``psical <verb> [flags]``.

Flags override keys of an optional ``--config`` JSON file. Exit status is 0
on success, 1 when a verification suite has failing criteria, 2 for usage
or invalid input and 3 when a numerical guard trips (truncation, memory).
Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as pio
from .acceptance import SUITES, run_suite
from .calculus import quantization_change, sharp, transfer
from .errors import InputError, PsicalError
from .functions import constant_symbol, damped_monomial, gaussian, gaussian_symbol, growth_symbol, hermite_functions
from .grid import Field, MixedNormSpec, make_grid, mixed_norm, symbol_grid
from .quantize import PRESETS, QuantizationMatrix, apply, kernel_from_symbol, op_matrix
from .stft import gaussian_window, stft
from .symbols import X_GROWTH, XI_GROWTH, fit_stft_decay
from .weights import weight_from_json

VERBS = ("gen", "stft", "fit", "quantize", "apply", "transfer", "change-quant", "sharp", "verify", "bench")
FUNCTION_PRESETS = ("gaussian", "window", "hermite")
SYMBOL_PRESETS = ("gaussian", "constant", "damped-poly", "growth")


@dataclass
class JobConfig:
    verb: str
    L: float = 10.0
    N: int = 128
    d: int = 1
    kind: str = "symbol"
    preset: str = "gaussian"
    k: int = 0
    alpha: int = 1
    beta: int = 1
    sigma: float = 8.0
    h: float = 0.5
    s: float = 0.5
    t: str | None = None
    A: list | None = None
    B: str | None = None
    sign: int = 1
    route: str = "kernel"
    orientation: str = X_GROWTH
    weight: str | None = None
    suite: str = "all"
    input: str | None = None
    input2: str | None = None
    out: str = "."
    tol: float = 1e-6

    def validate(self) -> "JobConfig":
        if self.verb not in VERBS:
            raise InputError(f"unknown verb {self.verb!r}; choose from {', '.join(VERBS)}")
        if self.d != 1:
            raise InputError("the command line works at d = 1")
        if self.N < 4 or self.N % 2 or not self.L > 0:
            raise InputError("--grid needs L > 0 and an even N >= 4")
        if self.kind not in ("function", "symbol"):
            raise InputError("kind must be 'function' or 'symbol'")
        presets = FUNCTION_PRESETS if self.kind == "function" else SYMBOL_PRESETS
        if self.preset not in presets:
            raise InputError(f"unknown {self.kind} preset {self.preset!r}; choose from {', '.join(presets)}")
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        if self.route not in ("kernel", "tensor"):
            raise InputError("route must be 'kernel' or 'tensor'")
        if self.orientation not in (X_GROWTH, XI_GROWTH):
            raise InputError(f"orientation must be {X_GROWTH} or {XI_GROWTH}")
        if self.verb == "verify" and self.suite not in SUITES:
            raise InputError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.weight is not None:
            weight_from_json(self.weight)
        return self


def _parse_grid(text: str) -> tuple[float, int]:
    try:
        L, N = text.split(",")
        return float(L), int(N)
    except ValueError:
        raise InputError(f"--grid expects L,N, got {text!r}") from None


def _parse_matrix(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--A expects comma separated numbers, got {text!r}") from None
    n = int(round(len(vals) ** 0.5))
    if n * n != len(vals):
        raise InputError("--A needs d*d entries")
    return [vals[i * n : (i + 1) * n] for i in range(n)]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psical", description="Phase-space calculus workbench.")
    p.add_argument("verb", help=", ".join(VERBS))
    p.add_argument("--config", help="JSON file with job keys; flags override it")
    p.add_argument("--grid", help="L,N: box [-L, L) with N nodes")
    p.add_argument("--t", help="quantization parameter: kn, weyl, one or a number")
    p.add_argument("--A", help="quantization matrix entries a11,a12,... (d = 1: one number)")
    p.add_argument("--B", help="target quantization for change-quant (same forms as --t)")
    p.add_argument("--s", type=float, help="Gevrey index")
    p.add_argument("--h", type=float, help="growth constant for the growth preset")
    p.add_argument("--weight", help="weight spec as JSON, e.g. '{\"kind\": \"unit\"}'")
    p.add_argument("--out", help="output directory")
    p.add_argument("--kind", choices=("function", "symbol"))
    p.add_argument("--preset")
    p.add_argument("--k", type=int, help="Hermite index")
    p.add_argument("--alpha", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--sign", type=int)
    p.add_argument("--route", choices=("kernel", "tensor"))
    p.add_argument("--orientation", choices=(X_GROWTH, XI_GROWTH))
    p.add_argument("--suite")
    p.add_argument("--input", help="input GSF1 file")
    p.add_argument("--input2", help="second input GSF1 file (sharp, apply)")
    p.add_argument("--tol", type=float)
    return p


def config_from_args(argv: Sequence[str]) -> JobConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise InputError("invalid command line") from None
    data: dict = {}
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        known = {f.name for f in fields(JobConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
    data["verb"] = ns.verb
    if ns.grid:
        data["L"], data["N"] = _parse_grid(ns.grid)
    if ns.A is not None:
        data["A"] = _parse_matrix(ns.A)
    for name in ("t", "B", "s", "h", "weight", "out", "kind", "preset", "k", "alpha", "beta", "sigma",
                 "sign", "route", "orientation", "suite", "input", "input2", "tol"):
        v = getattr(ns, name)
        if v is not None:
            data[name] = v
    try:
        cfg = JobConfig(**data)
    except TypeError as exc:
        raise InputError(str(exc)) from None
    return cfg.validate()


# -- verb implementations --------------------------------------------------------------


def _quant(cfg: JobConfig, which: str = "A") -> QuantizationMatrix:
    if which == "B":
        if cfg.B is None:
            raise InputError("change-quant needs --B")
        return _quant_text(cfg.B)
    if cfg.A is not None:
        return QuantizationMatrix(np.asarray(cfg.A, dtype=float))
    return _quant_text(cfg.t if cfg.t is not None else "kn")


def _quant_text(text) -> QuantizationMatrix:
    text = str(text)
    if text in PRESETS:
        return QuantizationMatrix.preset(text)
    try:
        return QuantizationMatrix.from_t(float(text))
    except ValueError:
        raise InputError(f"quantization must be one of {sorted(PRESETS)} or a number, got {text!r}") from None


def _function(cfg: JobConfig) -> Field:
    g = make_grid(0.0, cfg.L, cfg.N)
    if cfg.preset == "window":
        return gaussian_window(g)
    if cfg.preset == "hermite":
        return hermite_functions(g, cfg.k)[cfg.k]
    return gaussian(g)


def _symbol(cfg: JobConfig) -> Field:
    sg = symbol_grid(cfg.L, cfg.N)
    if cfg.preset == "constant":
        return constant_symbol(sg)
    if cfg.preset == "damped-poly":
        return damped_monomial(sg, cfg.alpha, cfg.beta, cfg.sigma)
    if cfg.preset == "growth":
        return growth_symbol(sg, cfg.h, cfg.s)
    return gaussian_symbol(sg)


def _load(path: str | None, fallback) -> Field:
    if not path:
        return fallback()
    try:
        return pio.read_field(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _out(cfg: JobConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, rows) -> None:
    path.write_text(pio.rows_to_csv(rows))


def _grid_cols(g) -> dict:
    return {"L": g.halfwidth[0], "N": g.count[0]}


def run(cfg: JobConfig) -> int:
    out = _out(cfg)
    verb = cfg.verb
    if verb == "gen":
        f = _function(cfg) if cfg.kind == "function" else _symbol(cfg)
        path = pio.write_field(out / f"{cfg.kind}.gsf", f)
        _write_rows(out / "gen.csv", [{"file": path.name, "kind": cfg.kind, "preset": cfg.preset,
                                       "l2": f.l2_norm(), **_grid_cols(f.grid)}])
    elif verb == "stft":
        f = _load(cfg.input, lambda: gaussian(make_grid(0.0, cfg.L, cfg.N)))
        phi = gaussian_window(f.grid)
        V = stft(f, phi)
        pio.write_stft(out / "stft.gsf", V)
        energy = float(np.sum(np.abs(V.values.values) ** 2) * V.values.grid.cell_measure)
        row = {"energy": energy, "f_l2": f.l2_norm(), "window_l2": V.window_l2, **_grid_cols(f.grid)}
        if cfg.weight is not None:
            row["weighted_mod_norm"] = mixed_norm(V.values, MixedNormSpec(2, 2, (0,), weight_from_json(cfg.weight)))
        _write_rows(out / "stft.csv", [row])
    elif verb == "fit":
        if cfg.input:
            if not Path(cfg.input).is_file():
                raise InputError(f"cannot read {cfg.input}")
            V = pio.read_stft(cfg.input)
        else:
            f = gaussian(make_grid(0.0, cfg.L, cfg.N))
            V = stft(f, gaussian_window(f.grid))
        fit = fit_stft_decay(V, cfg.s, cfg.orientation)
        _write_rows(out / "fit.csv", [fit.to_row()])
        (out / "fit.json").write_text(pio.to_json(fit))
    elif verb == "quantize":
        a = _load(cfg.input, lambda: _symbol(cfg))
        q = _quant(cfg)
        M = op_matrix(a, q)
        pio.write_matrix(out / "operator.gsm", M)
        _write_rows(out / "quantize.csv", [{"A": float(q.A[0, 0]), "rows": M.matrix.shape[0],
                                            "cols": M.matrix.shape[1], "fro_norm": float(np.linalg.norm(M.matrix)),
                                            **_grid_cols(M.source)}])
    elif verb == "apply":
        a = _load(cfg.input, lambda: _symbol(cfg))
        f = _load(cfg.input2, lambda: gaussian(a.grid.select([0])))
        q = _quant(cfg)
        g = apply(kernel_from_symbol(a, q), f)
        pio.write_field(out / "image.gsf", g)
        _write_rows(out / "apply.csv", [{"A": float(q.A[0, 0]), "input_l2": f.l2_norm(), "image_l2": g.l2_norm(),
                                         **_grid_cols(f.grid)}])
    elif verb == "transfer":
        a = _load(cfg.input, lambda: _symbol(cfg))
        q = _quant(cfg)
        b = transfer(a, q.A, cfg.sign)
        back = transfer(b, q.A, -cfg.sign)
        pio.write_field(out / "transfer.gsf", b)
        _write_rows(out / "transfer.csv", [{"A": float(q.A[0, 0]), "sign": cfg.sign,
                                            "roundtrip_err": float(np.max(np.abs(back.values - a.values))),
                                            **_grid_cols(a.grid)}])
    elif verb == "change-quant":
        a = _load(cfg.input, lambda: _symbol(cfg))
        qa, qb = _quant(cfg), _quant(cfg, "B")
        b = quantization_change(a, qa, qb)
        Ma, Mb = op_matrix(a, qa).matrix, op_matrix(b, qb).matrix
        resid = float(np.max(np.abs(Ma - Mb)) / max(np.max(np.abs(Ma)), 1e-300))
        pio.write_field(out / "changed.gsf", b)
        _write_rows(out / "change-quant.csv", [{"A": float(qa.A[0, 0]), "B": float(qb.A[0, 0]),
                                                "operator_residual": resid, **_grid_cols(a.grid)}])
    elif verb == "sharp":
        a1 = _load(cfg.input, lambda: _symbol(cfg))
        a2 = _load(cfg.input2, lambda: gaussian_symbol(a1.grid, 0.5, -0.3, 1.2, 0.9))
        q = _quant(cfg)
        c = sharp(a1, a2, q, cfg.route)
        P = op_matrix(a1, q).matrix @ op_matrix(a2, q).matrix
        resid = float(np.linalg.norm(op_matrix(c, q).matrix - P) / max(np.linalg.norm(P), 1e-300))
        pio.write_field(out / "sharp.gsf", c)
        _write_rows(out / "sharp.csv", [{"A": float(q.A[0, 0]), "route": cfg.route, "residual": resid,
                                         "passed": resid < cfg.tol, **_grid_cols(a1.grid)}])
    elif verb == "verify":
        results = run_suite(cfg.suite)
        for r in results:
            print(r.line())
        _write_rows(out / f"verify-{cfg.suite}.csv", [r.row() for r in results])
        return 0 if all(r.passed for r in results) else 1
    elif verb == "bench":
        a = gaussian_symbol(symbol_grid(cfg.L, cfg.N))
        f = gaussian(a.grid.select([0]))
        rows = []
        for name, job in (("stft", lambda: stft(f, gaussian_window(f.grid))),
                          ("op_matrix", lambda: op_matrix(a, 0.5)),
                          ("transfer", lambda: transfer(a, 0.5, 1)),
                          ("sharp", lambda: sharp(a, a, 0.5))):
            t0 = time.perf_counter()
            job()
            rows.append({"op": name, "seconds": time.perf_counter() - t0, **_grid_cols(f.grid)})
        _write_rows(out / "bench.csv", rows)
    return 0


def _error(exc: PsicalError) -> int:
    print(json.dumps({"error": exc.code, "message": str(exc), "exit": exc.exit_status}), file=sys.stderr)
    return exc.exit_status


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except PsicalError as exc:
        return _error(exc)
    except MemoryError as exc:
        print(json.dumps({"error": "memory", "message": str(exc), "exit": 3}), file=sys.stderr)
        return 3
