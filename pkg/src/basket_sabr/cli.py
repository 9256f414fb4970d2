"""Command-line front end.

Subcommands: price, smile, rate, classify, density.  Model parameters come
from a JSON config file or a named preset; individual flags override file
values.  Rows are computed in parallel across (K, t) pairs (cap with
BASKET_SABR_THREADS; 0 or unset means auto) and always emitted in input
order.  Numeric output carries 17 significant digits so downstream ratio
checks are not format-limited.

Exit codes: 0 all rows clean, 1 at least one row recorded an error,
2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from .hyperbolic import UncorrParams
from .oracle import QuadratureSpec, bs_implied_vol, numint_density, numint_price
from .presets import PRESETS
from .sabr_correlated import (CorrModel, CorrParams, find_saddles_corr,
                              implied_vol_expansion, log_density_corr, price_corr)
from .sabr_uncorrelated import (log_density_sum_uncorr, phi_rate, price_uncorr,
                                price_uncorr_degenerate)
from .saddle_core import K_CRITICAL, classify_minimizers

PRICE_COLUMNS = ["K", "t", "p_numint", "p_saddle", "p_saddle_upsilon",
                 "ratio_numint_saddle", "ratio_numint_saddle_upsilon",
                 "iv_numint", "iv_saddle", "iv_leading", "error"]
SMILE_COLUMNS = ["K", "t", "iv_numint", "iv_saddle", "iv_leading", "iv_expansion",
                 "error"]
RATE_COLUMNS = ["K", "k", "rate", "n_minima", "error"]
DENSITY_COLUMNS = ["K", "t", "f_saddle", "f_numint", "ratio_saddle_numint", "error"]


@dataclass
class RunConfig:
    model: UncorrParams | CorrParams
    strikes: list[float]
    maturities: list[float]
    mode: str = "all"
    out_format: str = "csv"
    out_path: str | None = None
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if self.mode not in ("asymptotic", "upsilon_exact", "oracle", "all"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if any(t <= 0 for t in self.maturities):
            raise ValueError("maturities must be positive")
        if self.mode != "oracle" and any(k <= 2.0 for k in self.strikes):
            raise ValueError("asymptotic modes require strikes > 2")


class ConfigError(ValueError):
    pass


def _parse_model(d: dict) -> UncorrParams | CorrParams:
    keys = set(d)
    if keys <= {"a0"}:
        return UncorrParams(**d)
    try:
        return CorrParams(**d)
    except TypeError as e:
        raise ConfigError(f"model: {e}") from None
    except ValueError as e:
        raise ConfigError(f"model: {e}") from None


def _parse_grid(text: str) -> list[float]:
    """'2.1,2.3' or range form 'lo:hi:step' (inclusive of hi within 1e-9)."""
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + i * step for i in range(n)]
    return [float(v) for v in text.split(",") if v.strip()]


def build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict[str, Any] = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; have {sorted(PRESETS)}")
        raw.update(json.loads(json.dumps(PRESETS[args.preset])))
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw.update(json.load(fh))
    if not raw.get("model"):
        raise ConfigError("no model: give --preset or --config with a model object")
    if getattr(args, "strikes", None):
        raw["strikes"] = _parse_grid(args.strikes)
    if getattr(args, "maturities", None):
        raw["maturities"] = _parse_grid(args.maturities)
    if getattr(args, "mode", None):
        raw["mode"] = args.mode
    quad = {}
    if raw.get("quadrature"):
        quad.update(raw["quadrature"])
    if getattr(args, "rel_tol", None):
        quad["rel_tol"] = args.rel_tol
    if getattr(args, "max_evals", None):
        quad["max_evals"] = int(args.max_evals)
    try:
        return RunConfig(model=_parse_model(raw["model"]),
                         strikes=[float(k) for k in raw.get("strikes", [])],
                         maturities=[float(t) for t in raw.get("maturities", [])],
                         mode=raw.get("mode", "all"),
                         out_format=getattr(args, "format", None) or "csv",
                         out_path=getattr(args, "out", None),
                         quadrature=QuadratureSpec(**quad))
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _as_corr(model) -> CorrParams:
    """Uncorrelated model embedded in the correlated engine (unit scales)."""
    if isinstance(model, CorrParams):
        return model
    return CorrParams(sigma_x=1.0, sigma_y=1.0, alpha=1.0, a0=model.a0)


def _n_workers() -> int:
    env = os.environ.get("BASKET_SABR_THREADS", "0")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _run_rows(tasks, worker: Callable[[Any], dict]) -> list[dict]:
    with ThreadPoolExecutor(max_workers=_n_workers()) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------------------
# row computations
# ---------------------------------------------------------------------------

def _saddle_prices(model, K: float, t: float) -> tuple[float, float]:
    """(log asymptotic, log upsilon-exact) saddle prices for either model."""
    if isinstance(model, CorrParams):
        cm = CorrModel(model)
        la = price_corr(K, t, model, "asymptotic", model=cm).log_price
        lu = price_corr(K, t, model, "upsilon_exact", model=cm).log_price
    elif abs(K - K_CRITICAL) < 1e-12:
        la = price_uncorr_degenerate(t, model.a0, "asymptotic").log_price
        lu = price_uncorr_degenerate(t, model.a0, "upsilon_exact").log_price
    else:
        la = price_uncorr(K, t, model.a0, "asymptotic").log_price
        lu = price_uncorr(K, t, model.a0, "upsilon_exact").log_price
    return la, lu


def _iv_or_none(log_price: float, K: float, t: float) -> float | None:
    """Implied vol of the half-basket normalization C(1, K/2)."""
    try:
        return bs_implied_vol(None, 1.0, K / 2.0, t,
                              log_price=log_price - math.log(2.0))
    except ValueError:
        return None


def cmd_price(cfg: RunConfig) -> list[dict]:
    corr = _as_corr(cfg.model)
    cm = CorrModel(corr)

    def one(kt):
        K, t = kt
        row: dict[str, Any] = {"K": K, "t": t}
        try:
            if cfg.mode in ("asymptotic", "upsilon_exact", "all"):
                la, lu = _saddle_prices(cfg.model, K, t)
                if cfg.mode in ("asymptotic", "all"):
                    row["p_saddle"] = math.exp(la) if la < 700 else math.inf
                if cfg.mode in ("upsilon_exact", "all"):
                    row["p_saddle_upsilon"] = math.exp(lu) if lu < 700 else math.inf
                    row["iv_saddle"] = _iv_or_none(lu, K, t)
            if cfg.mode in ("oracle", "all"):
                res = numint_price(K, t, corr, cfg.quadrature, model=cm)
                row["p_numint"] = res.price
                row["iv_numint"] = _iv_or_none(res.log_price, K, t)
                if cfg.mode == "all":
                    row["ratio_numint_saddle"] = math.exp(res.log_price - la)
                    row["ratio_numint_saddle_upsilon"] = math.exp(res.log_price - lu)
            if cfg.mode == "all" and K > 2.0:
                sigma0, _, _ = implied_vol_expansion(K, t, corr, model=cm)
                row["iv_leading"] = sigma0
        except Exception as e:  # recorded per row, batch continues
            row["error"] = f"{type(e).__name__}: {e}"
        return row

    return _run_rows([(K, t) for t in cfg.maturities for K in cfg.strikes], one)


def cmd_smile(cfg: RunConfig) -> list[dict]:
    if not isinstance(cfg.model, CorrParams):
        raise ConfigError("smile requires a correlated model")
    cm = CorrModel(cfg.model)

    def one(kt):
        K, t = kt
        row: dict[str, Any] = {"K": K, "t": t}
        try:
            lu = price_corr(K, t, cfg.model, "upsilon_exact", model=cm).log_price
            row["iv_saddle"] = _iv_or_none(lu, K, t)
            res = numint_price(K, t, cfg.model, cfg.quadrature, model=cm)
            row["iv_numint"] = _iv_or_none(res.log_price, K, t)
            sigma0, _, sigma_t = implied_vol_expansion(K, t, cfg.model, model=cm)
            row["iv_leading"] = sigma0
            row["iv_expansion"] = sigma_t
        except Exception as e:
            row["error"] = f"{type(e).__name__}: {e}"
        return row

    return _run_rows([(K, t) for t in cfg.maturities for K in cfg.strikes], one)


def cmd_rate(cfg: RunConfig) -> list[dict]:
    corr = cfg.model if isinstance(cfg.model, CorrParams) else None
    cm = CorrModel(corr) if corr else None

    def one(K):
        row: dict[str, Any] = {"K": K, "k": math.log(K)}
        try:
            if corr is None:
                phi, saddle = phi_rate(K, cfg.model.a0)
                row["rate"] = phi
                row["n_minima"] = saddle.n_minima
            else:
                s = find_saddles_corr(K, corr, model=cm)
                row["rate"] = s.rate
                row["n_minima"] = s.n
        except Exception as e:
            row["error"] = f"{type(e).__name__}: {e}"
        return row

    return _run_rows(list(cfg.strikes), one)


def cmd_density(cfg: RunConfig) -> list[dict]:
    corr = _as_corr(cfg.model)
    cm = CorrModel(corr)

    def one(kt):
        K, t = kt
        row: dict[str, Any] = {"K": K, "t": t}
        try:
            if isinstance(cfg.model, CorrParams):
                lf = log_density_corr(K, t, cfg.model, model=cm)
            else:
                lf = log_density_sum_uncorr(K, t, cfg.model.a0)
            row["f_saddle"] = math.exp(lf)
            if cfg.mode in ("oracle", "all"):
                fn = numint_density(K, t, corr, cfg.quadrature, model=cm)
                row["f_numint"] = fn
                row["ratio_saddle_numint"] = math.exp(lf - math.log(fn))
        except Exception as e:
            row["error"] = f"{type(e).__name__}: {e}"
        return row

    return _run_rows([(K, t) for t in cfg.maturities for K in cfg.strikes], one)


def cmd_classify(K: float) -> dict:
    cls = classify_minimizers(K)
    return {"K": K, "kind": cls.kind.value,
            "minimizers": list(cls.minimizers), "hbar_min": cls.min_value,
            "K_critical": K_CRITICAL}


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def emit(rows: list[dict], columns: list[str], fmt: str, out_path: str | None,
         command: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        text = buf.getvalue()
    else:
        text = json.dumps({"command": command,
                           "rows": [{c: r.get(c) for c in columns if r.get(c) is not None}
                                    for r in rows]},
                          indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--preset", help=f"named preset: {', '.join(sorted(PRESETS))}")
    sub.add_argument("--strikes", help="comma list or lo:hi:step")
    sub.add_argument("--maturities", help="comma list or lo:hi:step")
    sub.add_argument("--mode", choices=["asymptotic", "upsilon_exact", "oracle", "all"])
    sub.add_argument("--out", help="output path (default stdout)")
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--rel-tol", dest="rel_tol", type=float,
                     help="oracle relative tolerance")
    sub.add_argument("--max-evals", dest="max_evals", type=float,
                     help="oracle evaluation budget")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="basket-sabr",
                                 description="small-time basket option asymptotics")
    subs = ap.add_subparsers(dest="command", required=True)
    for name in ("price", "smile", "rate", "density"):
        _add_common(subs.add_parser(name))
    cls = subs.add_parser("classify")
    cls.add_argument("K", type=float)
    cls.add_argument("--format", choices=["csv", "json"], default="json")
    cls.add_argument("--out")
    args = ap.parse_args(argv)

    if args.command == "classify":
        report = cmd_classify(args.K)
        text = json.dumps(report, indent=2)
        if args.format != "json":
            text = (f"K = {report['K']}: {report['kind']}\n"
                    f"minimizers = {report['minimizers']}\n"
                    f"hbar_min = {report['hbar_min']:.17g}\n")
        else:
            text += "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    try:
        cfg = build_config(args)
        runner = {"price": (cmd_price, PRICE_COLUMNS),
                  "smile": (cmd_smile, SMILE_COLUMNS),
                  "rate": (cmd_rate, RATE_COLUMNS),
                  "density": (cmd_density, DENSITY_COLUMNS)}[args.command]
    except ConfigError as e:
        sys.stderr.write(json.dumps({"config_error": str(e)}) + "\n")
        return 2
    try:
        rows = runner[0](cfg)
    except ConfigError as e:
        sys.stderr.write(json.dumps({"config_error": str(e)}) + "\n")
        return 2
    emit(rows, runner[1], cfg.out_format, cfg.out_path, args.command)
    failures = [{"K": r.get("K"), "t": r.get("t"), "error": r["error"]}
                for r in rows if r.get("error")]
    if failures:
        sys.stderr.write(json.dumps({"row_errors": failures}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
