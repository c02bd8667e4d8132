"""Command-line laboratory: ``lab verify|flow|reduce-flow|scaling|rs|rank``.

Every command writes ``report.json`` (configuration echo, checks, tables)
and, with ``--format csv``, one CSV file per table into the output
directory.  Wall-clock timings go to ``timing.json`` so that the report
itself is byte-identical for a fixed seed and configuration.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
import warnings
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import master_system as ms
from . import models as md
from . import reduction as rd
from . import sampling as sp
from . import suites as su
from .errors import ConditioningWarning, SingularityError
from .report import CheckResult, WorstCase

COMMANDS = ("verify", "flow", "reduce-flow", "scaling", "rs", "rank")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# per-command defaults
_DEFAULTS = {
    "verify": dict(n=2, samples=20, t_max=1.0, steps=100),
    "flow": dict(n=2, samples=1, t_max=10.0, steps=100),
    "reduce-flow": dict(n=3, samples=1, t_max=1.0, steps=100),
    "scaling": dict(n=3, samples=1, t_max=0.0, steps=0),
    "rs": dict(n=3, samples=100, t_max=0.0, steps=0),
    "rank": dict(n=3, samples=20, t_max=0.0, steps=0),
}


class ConfigError(ValueError):
    """Malformed configuration file or out-of-range setting."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    seed: int = 42
    t_max: float = 1.0
    steps: int = 100
    eps: tuple[float, ...] = tuple(md.halving_sequence())
    coupling: float = 0.7
    samples: int = 1
    tol_scale: float = 1.0
    output: str = "lab-output"
    format: str = "csv"
    example: str = "random"
    power: int = 1
    eta0: bool = False

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["eps"] = list(self.eps)
        return d


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_eps(s: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in s.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad eps list {s!r}") from exc
    if not vals:
        raise ConfigError("empty eps list")
    return vals


_PARSERS = {
    "n": int, "seed": int, "t_max": float, "steps": int, "eps": _parse_eps, "coupling": float,
    "samples": int, "tol_scale": float, "output": str, "format": str, "example": str,
    "power": int, "eta0": _parse_bool,
}


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` pairs; ``#`` starts a comment; keys accept ``-`` or ``_``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    values = dict(_DEFAULTS[command])
    values.update(file_values)
    values.update({k: v for k, v in flag_values.items() if v is not None})
    cfg = RunConfig(command=command, **values)
    if not 2 <= cfg.n <= 8:
        raise ConfigError("n must lie in [2, 8]")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg.example not in ("random", "canned"):
        raise ConfigError("example must be random or canned")
    if cfg.samples < 1 or cfg.steps < 0 or cfg.t_max < 0 or cfg.tol_scale <= 0:
        raise ConfigError("samples >= 1, steps >= 0, t_max >= 0 and tol_scale > 0 required")
    if any(e <= 0 for e in cfg.eps) or any(b >= a for a, b in zip(cfg.eps, cfg.eps[1:])):
        raise ConfigError("eps must be positive and strictly decreasing")
    if command == "rs" and cfg.coupling == 0:
        raise ConfigError("coupling must be nonzero")
    if command == "flow" and cfg.example == "canned" and cfg.n != 2:
        raise ConfigError("the canned example has n = 2")
    if not 1 <= cfg.power <= cfg.n:
        raise ConfigError("power must lie in [1, n]")
    return cfg


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def to_jsonable(x: Any) -> Any:
    """Matrices become ``{"shape", "data"}`` with row-major interleaved (re, im) data."""
    if isinstance(x, CheckResult):
        return {"name": x.name, "residual": to_jsonable(x.residual), "threshold": x.threshold,
                "status": "PASS" if x.passed else "FAIL", "count": x.count,
                "sample": to_jsonable(x.sample), "info": to_jsonable(x.info)}
    if isinstance(x, md.SutherlandPoint):
        return {"q": to_jsonable(x.q), "p": to_jsonable(x.p), "X": to_jsonable(x.X)}
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            inter = np.stack([x.real, x.imag], axis=-1).ravel()
            return {"shape": list(x.shape), "data": [_num(v) for v in inter]}
        return {"shape": list(x.shape), "data": [_num(v) for v in x.ravel()]}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _num(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    return x


def _num(v) -> float | None:
    v = float(v)
    return v if np.isfinite(v) else None


def matrix_columns(prefix: str, n: int) -> list[str]:
    return [f"{prefix}_{part}_{i + 1}_{j + 1}" for i in range(n) for j in range(n) for part in ("re", "im")]


def matrix_values(A: np.ndarray) -> list[float]:
    return [float(v) for v in np.stack([A.real, A.imag], axis=-1).ravel()]


@dataclasses.dataclass
class Table:
    columns: list[str]
    rows: list[list]


class Run:
    """Collects checks and tables, then writes them to the output directory."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.checks: list[CheckResult] = []
        self.tables: dict[str, Table] = {}
        self.notes: dict[str, Any] = {}
        self.timing: dict[str, float] = {}

    def add(self, results) -> None:
        self.checks.extend(results)

    def timed(self, label: str, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.timing[label] = round(time.perf_counter() - t0, 6)
        return out

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def write(self) -> Path:
        out = Path(self.cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        report = {
            "version": __version__,
            "command": self.cfg.command,
            "config": self.cfg.echo(),
            "status": "PASS" if self.passed else "FAIL",
            "checks": [to_jsonable(c) for c in self.checks],
            "notes": to_jsonable(self.notes),
            "tables": {},
        }
        for name, tab in self.tables.items():
            if self.cfg.format == "csv":
                fname = f"{name}.csv"
                with open(out / fname, "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(tab.columns)
                    for row in tab.rows:
                        w.writerow([_csv_cell(v) for v in row])
                report["tables"][name] = {"file": fname, "columns": tab.columns, "rows": len(tab.rows)}
            else:
                report["tables"][name] = {"columns": tab.columns,
                                          "rows": [[to_jsonable(v) for v in r] for r in tab.rows]}
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (out / "timing.json").write_text(json.dumps(self.timing, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return out


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_verify(cfg: RunConfig, run: Run) -> None:
    n, m, seed, ts = cfg.n, cfg.samples, cfg.seed, cfg.tol_scale
    ns = [n]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        run.add(run.timed("manin", su.manin_checks, ns, 50 * m, seed, ts))
        run.add(run.timed("factorize", su.factorization_checks, ns, 50 * m, seed, ts))
        run.add(run.timed("axioms", su.bracket_axiom_checks, ns, m, seed, ts))
        run.add(run.timed("poisson_maps", su.poisson_map_checks, ns, max(1, m // 10), seed, ts))
        run.add(run.timed("moment_maps", su.moment_checks, ns, 1, seed, ts))
        run.add(run.timed("master", su.master_checks, ns, max(1, m // 4), seed, ts, cfg.t_max * 10))
        run.add(run.timed("rank", su.rank_checks, ns, m, seed))
        run.add(run.timed("reduced", su.reduced_bracket_checks, ns, m, seed, ts))
        run.add(run.timed("quadrature", su.quadrature_checks, n, max(1, m // 4), seed, ts, cfg.t_max))
        run.add(run.timed("zeta", su.zeta_checks, ns, 50 * m, seed, ts))
        run.add(run.timed("scaling", su.scaling_checks, ns, 1, seed, ts, cfg.eps))
        xs = sorted({0.3, -0.3, 1.0, -1.0, cfg.coupling})
        run.add(run.timed("rs", su.rs_checks, ns, xs, 5 * m, seed, ts))


def _t_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.steps == 0 or cfg.t_max == 0:
        return np.array([0.0])
    return np.linspace(0.0, cfg.t_max, cfg.steps + 1)


def _phi(cfg: RunConfig) -> ms.InvariantObservable:
    return ms.InvariantObservable(power=cfg.power)


def _power_columns(n: int) -> list[str]:
    return [f"tr_L{k}" for k in range(1, n)]


def _powers(L: np.ndarray) -> list[float]:
    n = L.shape[0]
    return [float(np.trace(np.linalg.matrix_power(L, k)).real) for k in range(1, n)]


def cmd_flow(cfg: RunConfig, run: Run) -> None:
    n = cfg.n
    if cfg.example == "canned":
        g0 = np.eye(2, dtype=np.complex128)
        L0 = np.diag([2.0, 0.5]).astype(np.complex128)
    else:
        rng = sp.rng_for(cfg.seed, 0, 100)
        g0, L0 = sp.random_su(rng, n), sp.random_positive(rng, n)
    phi = _phi(cfg)
    P0 = ms.psi((g0, L0))
    cols = ["t"] + matrix_columns("g", n) + matrix_columns("L", n) + _power_columns(n) + ["psi_residual",
                                                                                          "psi_spectrum_residual"]
    rows = []
    wc = WorstCase("master flow conserves Psi", 1e-9 * cfg.tol_scale)
    ev0 = np.linalg.eigvalsh(P0[1])
    for t in _t_grid(cfg):
        g, L = ms.free_flow(phi, (g0, L0), t)
        Pt = ms.psi((g, L))
        res = max(np.abs(Pt[0] - P0[0]).max(), np.abs(Pt[1] - P0[1]).max())
        spec_res = float(np.abs(np.linalg.eigvalsh(Pt[0]) - ev0).max())
        wc.add(max(res, spec_res), t=float(t))
        rows.append([float(t)] + matrix_values(g) + matrix_values(L) + _powers(L) + [float(res), spec_res])
    run.tables["flow"] = Table(cols, rows)
    run.add([wc.result()])
    run.notes["initial"] = {"g": g0, "L": L0, "hamiltonian": phi.label}
    run.notes["generator"] = phi.derivative(L0)


def cmd_reduce_flow(cfg: RunConfig, run: Run) -> None:
    n = cfg.n
    if cfg.example == "canned":
        if n != 2:
            raise ConfigError("the canned example has n = 2")
        Q0 = np.diag(np.exp(1j * np.array([np.pi / 4, -np.pi / 4])))
        L0 = np.diag([2.0, 0.5]).astype(np.complex128)
    else:
        rng = sp.rng_for(cfg.seed, 0, 101)
        Q0, L0 = sp.random_regular_torus(rng, n), sp.random_positive(rng, n, 0.4)
    phi = _phi(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConditioningWarning)
        traj = rd.quadrature_integrate(phi, (Q0, L0), _t_grid(cfg), eta0=cfg.eta0)
    p0 = _powers(L0)
    cols = ["t"] + matrix_columns("Q", n) + matrix_columns("L", n) + _power_columns(n) + ["spectral_residual"]
    rows = []
    wc = WorstCase("reduced flow spectral invariants", 1e-8 * cfg.tol_scale)
    for t, Q, L in zip(traj.t, traj.Q, traj.L):
        pk = _powers(L)
        res = max((abs(a - b) for a, b in zip(pk, p0)), default=0.0)
        wc.add(res, t=float(t))
        rows.append([float(t)] + matrix_values(Q) + matrix_values(L) + pk + [float(res)])
    run.tables["reduce_flow"] = Table(cols, rows)
    run.add([wc.result()])
    run.notes["initial"] = {"Q": Q0, "L": L0, "hamiltonian": phi.label, "eta0": cfg.eta0}
    run.notes["breakpoint"] = traj.breakpoint
    run.notes["warnings"] = [str(w.message) for w in caught]
    if len(traj.t) > 1:
        ph = np.unwrap(np.angle(np.array([np.diag(Q) for Q in traj.Q])), axis=0)
        run.notes["phase_rates"] = np.polyfit(traj.t, ph, 1)[0]


def cmd_scaling(cfg: RunConfig, run: Run) -> None:
    cols = ["eps", "value", "target", "error", "ratio", "extrapolated"]
    checks = {k: (WorstCase(f"scaling {k}: ratio rule", 0.5), WorstCase(f"scaling {k}: limit value",
                                                                               1e-4 * cfg.tol_scale))
              for k in ("H", "bracket")}
    orders = {}
    for i in range(cfg.samples):
        tabs = su.scaling_tables(cfg.n, i, cfg.seed, cfg.eps)
        for kind in ("H", "bracket"):
            tab = tabs[kind]
            run.tables[f"scaling_{kind}_{i}"] = Table(cols, [[r[c] for c in cols] for r in tab.rows()])
            ratio_wc, limit_wc = checks[kind]
            if len(tab.eps) > 1:
                ratio_wc.add(0.0 if tab.passed else 1.0, index=i, status=tab.status, order=tab.observed_order())
            limit_wc.add(tab.limit_error(), index=i)
            orders[f"{kind}_{i}"] = {"status": tab.status, "observed_order": tab.observed_order()}
        run.notes[f"point_{i}"] = tabs["point"]
    run.notes["tables"] = orders
    for ratio_wc, limit_wc in checks.values():
        if ratio_wc.count:
            run.add([ratio_wc.result()])
        run.add([limit_wc.result()])


def cmd_rs(cfg: RunConfig, run: Run) -> None:
    n = cfg.n
    ctx = md.RSContext(n, cfg.coupling)
    cols = (["sample"] + [f"q_{k + 1}" for k in range(n)] + [f"theta_{k + 1}" for k in range(n)]
            + ["H_plus", "H_minus", "residual_plus", "residual_minus", "constraint"])
    rows = []
    cross = WorstCase("rs cross-check H_+ and H_-", 1e-10 * cfg.tol_scale)
    con = WorstCase("rs constraint on b_+", 1e-10 * cfg.tol_scale)
    skipped = 0
    for i in range(cfg.samples):
        q, theta = su.random_rs_sample(sp.rng_for(cfg.seed, i, 102), n)
        try:
            c = md.rs_crosscheck(q, theta, ctx)
        except SingularityError:
            skipped += 1
            continue
        cross.add(max(c["residual_plus"], c["residual_minus"]), sample=i, q=q, theta=theta)
        con.add(c["constraint"], sample=i, q=q, theta=theta)
        rows.append([i] + list(map(float, q)) + list(map(float, theta))
                    + [c["H_plus"], c["H_minus"], c["residual_plus"], c["residual_minus"], c["constraint"]])
    nux = WorstCase("rs nu(-x) nu(x) = I", 1e-12 * cfg.tol_scale)
    nux.add(np.abs(md.rs_nu(md.RSContext(n, -cfg.coupling)) @ md.rs_nu(ctx) - np.eye(n)).max())
    run.tables["rs"] = Table(cols, rows)
    run.add([nux.result(), con.result(), cross.result()])
    run.notes["skipped"] = skipped


def cmd_rank(cfg: RunConfig, run: Run) -> None:
    cols = ["sample", "status", "rank_H", "expected_rank_H", "rank_F_diff", "expected_rank_F_diff",
            "gap_H", "gap_F", "regularity_margin"]
    rows = []
    wc = WorstCase(f"rank evidence n={cfg.n}", 0.5)
    for i in range(cfg.samples):
        rng = sp.rng_for(cfg.seed, i, 103)
        pt = (sp.random_su(rng, cfg.n), sp.random_positive(rng, cfg.n))
        rep = ms.rank_evidence(pt)
        wc.add(0.0 if rep["status"] == "PASS" else 1.0, sample=i, point=pt, report=rep)
        rows.append([i] + [rep.get(c) if rep.get(c) is not None else "" for c in cols[1:]])
    run.tables["rank"] = Table(cols, rows)
    run.add([wc.result()])


_HANDLERS = {"verify": cmd_verify, "flow": cmd_flow, "reduce-flow": cmd_reduce_flow,
             "scaling": cmd_scaling, "rs": cmd_rs, "rank": cmd_rank}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--eps", type=_parse_eps, help="comma-separated decreasing list")
    p.add_argument("--coupling", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol-scale", dest="tol_scale", type=float)
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--example", choices=("random", "canned"))
    p.add_argument("--power", type=int, help="Hamiltonian tr L^k for the flow commands")
    p.add_argument("--eta0", type=_parse_bool, help="apply the diagonal eta0 correction in reduce-flow")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, file_values, flags)
        run = Run(cfg)
        t0 = time.perf_counter()
        _HANDLERS[cfg.command](cfg, run)
        run.timing["total"] = round(time.perf_counter() - t0, 6)
    except ConfigError as exc:
        print(f"lab: configuration error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    out = run.write()
    for c in run.checks:
        print(c.line())
    print(f"{'PASS' if run.passed else 'FAIL'}: {len(run.checks)} checks, report in {out / 'report.json'}")
    return EXIT_OK if run.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
