"""Render comparison figures from divlab sweep CSV files.

The renderer trusts the CSV completely: no metric is recomputed, singular
rows become gaps, and byte-identical input yields byte-identical SVG. Three
figures are available:

- p-inequality: 2*NM1 and P_I against t,
- cp-inequality: NM2 and CP_I/2 + 1 against t,
- gamma: decay rate and amplitude from a ``divlab gamma`` CSV.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SWEEP_HEADER = ("t,tau,gamma0,lambda,g,P_I,CP_I,NM1,NM2,d,"
                "lhs_p,rhs_p,ok_p,ok_p_strict,lhs_cp,rhs_cp,ok_cp,singular")
GAMMA_HEADER = "t,gamma,G"

FIGURES = ("p-inequality", "cp-inequality", "gamma")

# deterministic vector output: stable ids, searchable text, no timestamps
plt.rcParams["svg.hashsalt"] = "divlab-plotviz"
plt.rcParams["svg.fonttype"] = "none"


class PlotDataError(Exception):
    """Input CSV cannot be rendered; the message names the offending spot."""


@dataclass
class SweepData:
    t: np.ndarray
    p_i: np.ndarray
    nm1: np.ndarray
    nm2: np.ndarray
    cp_i: np.ndarray
    singular: np.ndarray  # boolean mask


def _float_or_nan(field: str, where: str) -> float:
    if field == "":
        return float("nan")
    try:
        return float(field)
    except ValueError as exc:
        raise PlotDataError(f"{where}: not a number: {field!r}") from exc


def read_sweep(path: Path) -> SweepData:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0] != SWEEP_HEADER:
        raise PlotDataError(f"{path}:1: header does not match the sweep contract")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        fields = ln.split(",")
        if len(fields) != 18:
            raise PlotDataError(f"{path}:{lineno}: expected 18 fields, got {len(fields)}")
        where = f"{path}:{lineno}"
        singular = fields[17] == "true"
        rows.append((
            _float_or_nan(fields[0], where),
            _float_or_nan(fields[5], where),
            _float_or_nan(fields[7], where),
            _float_or_nan(fields[8], where),
            _float_or_nan(fields[6], where),
            singular,
        ))
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    arr = np.array([r[:5] for r in rows], dtype=float)
    return SweepData(t=arr[:, 0], p_i=arr[:, 1], nm1=arr[:, 2], nm2=arr[:, 3],
                     cp_i=arr[:, 4],
                     singular=np.array([r[5] for r in rows], dtype=bool))


def read_gamma(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0] != GAMMA_HEADER:
        raise PlotDataError(f"{path}:1: header does not match '{GAMMA_HEADER}'")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        fields = ln.split(",")
        if len(fields) != 3:
            raise PlotDataError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        where = f"{path}:{lineno}"
        rows.append(tuple(_float_or_nan(f, where) for f in fields))
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    arr = np.array(rows, dtype=float)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _masked(y: np.ndarray, singular: np.ndarray) -> np.ndarray:
    out = y.copy()
    out[singular] = np.nan
    return out


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.set_xlabel("t")
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, ax, out_path: Path, dpi: int) -> None:
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=dpi, metadata={"Date": None}
                if out_path.suffix == ".svg" else None)
    plt.close(fig)


def _plot_pair(t, y1, label1, color1, y2, label2, color2, gid1, gid2,
               out_path: Path, dpi: int) -> None:
    if np.isnan(y1).all() and np.isnan(y2).all():
        raise PlotDataError("no plottable rows")
    fig, ax = _new_axes()
    style = {"linestyle": ":", "marker": ".", "markersize": 2.5}
    line1, = ax.plot(t, y1, color=color1, label=label1, **style)
    line2, = ax.plot(t, y2, color=color2, label=label2, **style)
    line1.set_gid(gid1)
    line2.set_gid(gid2)
    _finish(fig, ax, out_path, dpi)


def render_p_inequality(data: SweepData, out_path: Path, dpi: int) -> None:
    _plot_pair(data.t,
               _masked(2.0 * data.nm1, data.singular), "2·NM1", "tab:green",
               _masked(data.p_i, data.singular), "P-I", "tab:blue",
               "series-2nm1", "series-pi", out_path, dpi)


def render_cp_inequality(data: SweepData, out_path: Path, dpi: int) -> None:
    _plot_pair(data.t,
               _masked(data.nm2, data.singular), "NM2", "tab:orange",
               _masked(0.5 * data.cp_i + 1.0, data.singular), "CP-I/2 + 1",
               "magenta", "series-nm2", "series-cpihalf", out_path, dpi)


def render_gamma(path: Path, out_path: Path, dpi: int) -> None:
    t, gam, amp = read_gamma(path)
    if np.isnan(gam).all() and np.isnan(amp).all():
        raise PlotDataError("no plottable rows")
    fig, ax = _new_axes()
    style = {"linestyle": ":", "marker": ".", "markersize": 2.5}
    l1, = ax.plot(t, gam, color="tab:red", label="gamma", **style)
    l2, = ax.plot(t, amp, color="tab:purple", label="G", **style)
    l1.set_gid("series-gamma")
    l2.set_gid("series-amplitude")
    _finish(fig, ax, out_path, dpi)


def render(input_path: Path, out_dir: Path, figure: str | None,
           fmt: str, dpi: int) -> list[Path]:
    """Render the selected figure (or both inequality figures) and return
    the written paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if figure == "gamma":
        target = out_dir / f"gamma.{fmt}"
        render_gamma(input_path, target, dpi)
        return [target]
    data = read_sweep(input_path)
    wanted = [figure] if figure else ["p-inequality", "cp-inequality"]
    for kind in wanted:
        name = kind.replace("-", "_")
        target = out_dir / f"{name}.{fmt}"
        if kind == "p-inequality":
            render_p_inequality(data, target, dpi)
        else:
            render_cp_inequality(data, target, dpi)
        written.append(target)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="divlab-plot",
        description="Render figures from divlab sweep CSV files.")
    parser.add_argument("input", help="sweep CSV (or gamma CSV for --figure gamma)")
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--figure", choices=FIGURES,
                        help="which figure; omitted renders both inequality figures")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        written = render(Path(args.input), Path(args.out), args.figure,
                         args.format, args.dpi)
    except PlotDataError as exc:
        print(f"divlab-plot: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
