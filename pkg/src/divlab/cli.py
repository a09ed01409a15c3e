"""Command-line front end: sweep execution, single-point probes, decay-rate
tables, and CSV/JSON export.

Exit codes: 0 success (sweep: no inequality failures among non-null
records), 1 inequality failures, 2 bad configuration or I/O trouble.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, kernels
from .channels import SingularTimeError, decay_amplitude, decay_rate
from .inequalities import SweepConfig, VerdictRecord, sweep, verify
from .measures import OptConfig

CSV_HEADER = ("t,tau,gamma0,lambda,g,P_I,CP_I,NM1,NM2,d,"
              "lhs_p,rhs_p,ok_p,ok_p_strict,lhs_cp,rhs_cp,ok_cp,singular")


class CliError(Exception):
    """User-facing configuration problem; rendered as one diagnostic line."""


# ---------------------------------------------------------------------------
# Rendering and parsing
# ---------------------------------------------------------------------------

def _fnum(x: Optional[float]) -> str:
    return "" if x is None else format(float(x), ".12g")


def _fbool(x: Optional[bool]) -> str:
    return "" if x is None else ("true" if x else "false")


def render_csv(records: Sequence[VerdictRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _fnum(r.t), _fnum(r.tau), _fnum(r.gamma0), _fnum(r.lam), _fnum(r.g),
            _fnum(r.p_i), _fnum(r.cp_i), _fnum(r.nm1), _fnum(r.nm2), _fnum(r.d),
            _fnum(r.lhs_p), _fnum(r.rhs_p), _fbool(r.ok_p), _fbool(r.ok_p_strict),
            _fnum(r.lhs_cp), _fnum(r.rhs_cp), _fbool(r.ok_cp), _fbool(r.singular),
        ]))
    return "\n".join(lines) + "\n"


def _pnum(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def _pbool(s: str) -> Optional[bool]:
    if s == "":
        return None
    if s not in ("true", "false"):
        raise ValueError(f"expected true/false, got {s!r}")
    return s == "true"


def parse_csv(text: str) -> list[VerdictRecord]:
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("CSV header does not match the sweep contract")
    records = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 18:
            raise ValueError(f"expected 18 fields, got {len(f)}: {ln!r}")
        records.append(VerdictRecord(
            t=float(f[0]), tau=float(f[1]), gamma0=float(f[2]), lam=float(f[3]),
            g=_pnum(f[4]), p_i=_pnum(f[5]), cp_i=_pnum(f[6]), nm1=_pnum(f[7]),
            nm2=_pnum(f[8]), d=_pnum(f[9]), lhs_p=_pnum(f[10]), rhs_p=_pnum(f[11]),
            ok_p=_pbool(f[12]), ok_p_strict=_pbool(f[13]), lhs_cp=_pnum(f[14]),
            rhs_cp=_pnum(f[15]), ok_cp=_pbool(f[16]), singular=_pbool(f[17]),
        ))
    return records


def record_to_dict(r: VerdictRecord, with_args: bool = True) -> dict:
    out = {
        "t": r.t, "tau": r.tau, "gamma0": r.gamma0, "lambda": r.lam, "g": r.g,
        "P_I": r.p_i, "CP_I": r.cp_i, "NM1": r.nm1, "NM2": r.nm2, "d": r.d,
        "lhs_p": r.lhs_p, "rhs_p": r.rhs_p, "ok_p": r.ok_p,
        "ok_p_strict": r.ok_p_strict, "lhs_cp": r.lhs_cp, "rhs_cp": r.rhs_cp,
        "ok_cp": r.ok_cp, "singular": r.singular,
    }
    if with_args:
        out["argmax"] = {
            "p_i": r.p_i_arg, "nm1": r.nm1_arg, "nm2": r.nm2_arg, "d": r.d_arg,
        }
    return out


# ---------------------------------------------------------------------------
# Configuration: defaults < config file < flags
# ---------------------------------------------------------------------------

_CONFIG_TYPES = {
    "gamma0": float, "lambda": float, "tau": float,
    "t_min": float, "t_max": float, "dt": float,
    "family_min": float, "family_max": float, "family_n": int,
    "grid_theta": int, "grid_phi": int, "grid_r": int,
    "tol": float, "out_dir": str, "seed": int,
}


def parse_config_file(path: str) -> dict:
    values: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](val)
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return values


def _parse_family_spec(spec: str) -> tuple[float, float, int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise CliError(f"--family expects MIN:MAX:N, got {spec!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"--family expects MIN:MAX:N, got {spec!r}") from exc


def build_sweep_config(args: argparse.Namespace) -> SweepConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for flag, key in (
        ("gamma0", "gamma0"), ("lam", "lambda"), ("tau", "tau"),
        ("t_min", "t_min"), ("t_max", "t_max"), ("dt", "dt"),
        ("grid_theta", "grid_theta"), ("grid_phi", "grid_phi"),
        ("grid_r", "grid_r"), ("tol", "tol"), ("out_dir", "out_dir"),
        ("seed", "seed"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    if getattr(args, "family", None):
        fmin, fmax, fn = _parse_family_spec(args.family)
        values["family_min"] = fmin
        values["family_max"] = fmax
        values["family_n"] = fn
    base = SweepConfig()
    opt = OptConfig(
        grid_theta=values.get("grid_theta", base.opt.grid_theta),
        grid_phi=values.get("grid_phi", base.opt.grid_phi),
        grid_r=values.get("grid_r", base.opt.grid_r),
        tol=values.get("tol", base.opt.tol),
        gamma0_grid=values.get("family_n", base.family_n),
    )
    cfg = SweepConfig(
        gamma0=values.get("gamma0", base.gamma0),
        lam=values.get("lambda", base.lam),
        tau=values.get("tau", base.tau),
        t_min=values.get("t_min", base.t_min),
        t_max=values.get("t_max", base.t_max),
        dt=values.get("dt", base.dt),
        family_min=values.get("family_min", base.family_min),
        family_max=values.get("family_max", base.family_max),
        family_n=values.get("family_n", base.family_n),
        opt=opt,
        out_dir=values.get("out_dir", base.out_dir),
        seed=values.get("seed", base.seed),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    return cfg


def config_to_dict(cfg: SweepConfig) -> dict:
    return {
        "gamma0": cfg.gamma0, "lambda": cfg.lam, "tau": cfg.tau,
        "t_min": cfg.t_min, "t_max": cfg.t_max, "dt": cfg.dt,
        "family_min": cfg.family_min, "family_max": cfg.family_max,
        "family_n": cfg.family_n, "grid_theta": cfg.opt.grid_theta,
        "grid_phi": cfg.opt.grid_phi, "grid_r": cfg.opt.grid_r,
        "refine_iters": cfg.opt.refine_iters, "tol": cfg.opt.tol,
        "out_dir": cfg.out_dir, "seed": cfg.seed,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = build_sweep_config(args)
    started = time.perf_counter()
    try:
        records = sweep(cfg)
    except ValueError as exc:  # e.g. a malformed DIVLAB_THREADS value
        raise CliError(str(exc)) from exc
    duration = time.perf_counter() - started
    summary = verify(records)

    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out_dir}: {exc}") from exc

    outputs = {}
    csv_bytes = render_csv(records).encode()
    summary_bytes = (json.dumps(summary, indent=2) + "\n").encode()
    for name, payload in (("sweep.csv", csv_bytes), ("summary.json", summary_bytes)):
        path = out_dir / name
        try:
            path.write_bytes(payload)
        except OSError as exc:
            raise CliError(f"cannot write {path}: {exc}") from exc
        outputs[name] = {
            "sha256": hashlib.sha256(payload).hexdigest(),
            "bytes": len(payload),
        }
    manifest = {
        "tool": "divlab",
        "version": __version__,
        "backend": kernels.BACKEND,
        "config": config_to_dict(cfg),
        "duration_s": duration,
        "n_records": summary["n_records"],
        "n_singular": summary["n_singular"],
        "outputs": outputs,
    }
    manifest_bytes = (json.dumps(manifest, indent=2) + "\n").encode()
    try:
        (out_dir / "manifest.json").write_bytes(manifest_bytes)
    except OSError as exc:
        raise CliError(f"cannot write manifest: {exc}") from exc

    failures = summary["p"]["n_fail"] + summary["cp"]["n_fail"]
    print(f"sweep: {summary['n_records']} records ({summary['n_singular']} singular), "
          f"p-failures {summary['p']['n_fail']}, cp-failures {summary['cp']['n_fail']}, "
          f"{duration:.1f}s -> {out_dir / 'sweep.csv'}")
    return 0 if failures == 0 else 1


def cmd_probe(args: argparse.Namespace) -> int:
    from .measures import measure_point  # local import keeps CLI startup light

    cfg = build_sweep_config(args)
    if args.t < 0.0:
        raise CliError(f"t must be nonnegative, got {args.t}")
    if not args.tau > 0.0:
        raise CliError(f"tau must be positive, got {args.tau}")
    rec = measure_point(cfg.params(), cfg.family(), args.t, args.tau, cfg.opt)
    verdict = VerdictRecord.from_measure(rec, cfg.params())
    print(json.dumps(record_to_dict(verdict), indent=2))
    return 0


def cmd_gamma(args: argparse.Namespace) -> int:
    cfg = build_sweep_config(args)
    params = cfg.params()
    lines = ["t,gamma,G"]
    for t in cfg.time_grid():
        t = float(t)
        try:
            gam = _fnum(decay_rate(t, params))
        except SingularTimeError:
            gam = ""
        lines.append(f"{_fnum(t)},{gam},{_fnum(decay_amplitude(t, params))}")
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--gamma0", type=float, help="channel gamma0 (default 2)")
    p.add_argument("--lambda", dest="lam", type=float, help="channel lambda (default 2)")
    p.add_argument("--family", help="free family as MIN:MAX:N (default 0.01:0.99:99)")
    p.add_argument("--grid-theta", dest="grid_theta", type=int)
    p.add_argument("--grid-phi", dest="grid_phi", type=int)
    p.add_argument("--grid-r", dest="grid_r", type=int)
    p.add_argument("--tol", type=float, help="optimizer objective tolerance")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divlab",
        description="Indivisibility and resourcefulness measures for the "
                    "resonant damped-qubit channel family.",
    )
    parser.add_argument("--version", action="version", version=f"divlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="evaluate the time grid and export CSV/JSON")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--tau", type=float, help="interval width (default 0.01)")
    p_sweep.add_argument("--t-min", dest="t_min", type=float)
    p_sweep.add_argument("--t-max", dest="t_max", type=float)
    p_sweep.add_argument("--dt", type=float)
    p_sweep.add_argument("--out-dir", dest="out_dir", help="output directory (default out/)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_probe = sub.add_parser("probe", help="evaluate a single (t, tau) as JSON")
    p_probe.add_argument("t", type=float)
    p_probe.add_argument("tau", type=float)
    _add_common_flags(p_probe)
    p_probe.set_defaults(func=cmd_probe)

    p_gamma = sub.add_parser("gamma", help="tabulate decay rate and amplitude")
    _add_common_flags(p_gamma)
    p_gamma.add_argument("--t-min", dest="t_min", type=float)
    p_gamma.add_argument("--t-max", dest="t_max", type=float)
    p_gamma.add_argument("--dt", type=float)
    p_gamma.add_argument("--out", help="write the CSV here instead of stdout")
    p_gamma.set_defaults(func=cmd_gamma)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"divlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
