"""Parameter sweeps over the three schemes, with CSV and SVG export."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

import numpy as np

from .baselines import scheme2_solve, scheme3_allocate
from .model import ChannelGains, InvalidInputError, RegimeDistribution, SolverConfig
from .waterfill import alternate_solve

CSV_HEADER = ["x", "scheme1_bps_hz", "scheme2_bps_hz", "scheme3_bps_hz"]
SCHEME_LABELS = ("Scheme 1", "Scheme 2", "Scheme 3")


@dataclass
class SweepTable:
    x_label: str
    x_values: np.ndarray
    scheme1: np.ndarray
    scheme2: np.ndarray
    scheme3: np.ndarray
    metadata: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values, dtype=float)
        n = len(self.x_values)
        for name in ("scheme1", "scheme2", "scheme3"):
            col = np.asarray(getattr(self, name), dtype=float)
            if col.shape != (n,):
                raise InvalidInputError(f"column {name} has {col.size} entries, expected {n}")
            setattr(self, name, col)
        if not self.flags:
            self.flags = [""] * n

    @property
    def rates(self) -> tuple:
        return self.scheme1, self.scheme2, self.scheme3

    @property
    def title(self) -> str:
        return self.metadata.get("title", f"Sum rate vs {self.x_label}")

    def max_advantage(self, other: int) -> float:
        """Largest ``100 * (scheme1 / scheme<other> - 1)`` over the sweep, in percent."""
        col = {2: self.scheme2, 3: self.scheme3}[other]
        with np.errstate(divide="ignore", invalid="ignore"):
            pct = 100.0 * (self.scheme1 / col - 1.0)
        pct = pct[np.isfinite(pct)]
        return float(pct.max()) if pct.size else float("nan")


def sweep_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo + step, ..., hi`` without float drift."""
    if not step > 0:
        raise InvalidInputError(f"step must be > 0, got {step!r}")
    if lo > hi:
        raise InvalidInputError(f"lo must not exceed hi ({lo!r} > {hi!r})")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def solve_point(config: SolverConfig) -> tuple:
    """Rates of the three schemes on one configuration, plus a flag string."""
    r1 = alternate_solve(config)
    r2 = scheme2_solve(config)
    r3 = scheme3_allocate(config)
    flags = [name for name, r in (("scheme1", r1), ("scheme2", r2)) if not r.converged]
    flag = "not_converged:" + "+".join(flags) if flags else ""
    return r1.ergodic_rate, r2.ergodic_rate, r3.ergodic_rate, flag


def _run(x_label, xs, configs, base, meta, workers) -> SweepTable:
    tasks = [(k, c) for k, c in enumerate(configs) if not isinstance(c, str)]
    rows = [(math.nan, math.nan, math.nan, c) for c in configs]
    cfgs = [c for _, c in tasks]
    if workers and workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(solve_point, cfgs))
    else:
        out = [solve_point(c) for c in cfgs]
    for (k, _), row in zip(tasks, out):
        rows[k] = row
    cols = np.array([r[:3] for r in rows], dtype=float).reshape(len(rows), 3)
    metadata = {"config": base.to_dict(), **meta}
    return SweepTable(
        x_label=x_label,
        x_values=xs,
        scheme1=cols[:, 0],
        scheme2=cols[:, 1],
        scheme3=cols[:, 2],
        metadata=metadata,
        flags=[r[3] for r in rows],
    )


def _try(build):
    try:
        return build()
    except InvalidInputError as exc:
        return f"invalid:{exc}"


def sweep_power(lo=10.0, hi=100.0, step=10.0, base: SolverConfig = SolverConfig(), workers: int = 1) -> SweepTable:
    """Vary both budgets together, ``P = Q = v``."""
    if lo < 0:
        raise InvalidInputError(f"power must be >= 0, got lo={lo!r}")
    xs = sweep_values(lo, hi, step)
    configs = [dataclasses.replace(base, P_total=float(v), Q_total=float(v)) for v in xs]
    return _run("P = Q (W)", xs, configs, base, {"sweep": "power", "title": "Sum rate vs total power P = Q"}, workers)


def sweep_gain(lo=1.0, hi=20.0, step=1.0, base: SolverConfig = SolverConfig(), workers: int = 1) -> SweepTable:
    """Vary the strong gains together, ``a2 = b2 = v``."""
    if lo < 1:
        raise InvalidInputError(f"strong gain must be >= 1, got lo={lo!r}")
    xs = sweep_values(lo, hi, step)
    configs = [
        dataclasses.replace(base, gains=dataclasses.replace(base.gains, a2=float(v), b2=float(v))) for v in xs
    ]
    return _run("a2 = b2", xs, configs, base, {"sweep": "gain", "title": "Sum rate vs strong gain a2 = b2"}, workers)


def sweep_prob(p_lo=0.0, p_hi=0.5, step=0.05, base: SolverConfig = SolverConfig(), workers: int = 1) -> SweepTable:
    """Regime probabilities ``(p, 0.5 - p, 0.5 - p, p)`` in (p11, p21, p12, p22) order."""
    if not 0 <= p_lo <= p_hi <= 0.5:
        raise InvalidInputError(f"need 0 <= p_lo <= p_hi <= 0.5, got {p_lo!r}, {p_hi!r}")
    xs = sweep_values(p_lo, p_hi, step)
    configs = [
        dataclasses.replace(base, probs=RegimeDistribution(float(p), 0.5 - float(p), 0.5 - float(p), float(p)))
        for p in xs
    ]
    return _run("p", xs, configs, base, {"sweep": "prob", "title": "Sum rate vs regime probability p"}, workers)


def sweep_asym(k_lo=0.1, k_hi=1.0, step=0.1, base: SolverConfig = SolverConfig(), workers: int = 1) -> SweepTable:
    """Scale subchannel 2's gains, ``b1 = k a1`` and ``b2 = k a2``.

    The regime structure stays fixed: ``b2`` keeps its strong-slot role even
    when ``k a2`` reaches 1.  Points with ``k a2 < 1`` cannot be cancelled and
    are recorded as flagged rows with NaN rates.
    """
    if not 0 < k_lo <= k_hi <= 1:
        raise InvalidInputError(f"need 0 < k_lo <= k_hi <= 1, got {k_lo!r}, {k_hi!r}")
    xs = sweep_values(k_lo, k_hi, step)
    a1, a2 = base.gains.a1, base.gains.a2
    configs = [
        _try(lambda k=k: dataclasses.replace(base, gains=ChannelGains(a1=a1, b1=k * a1, a2=a2, b2=k * a2)))
        for k in xs
    ]
    meta = {
        "sweep": "asym",
        "title": "Sum rate vs subchannel-2 gain ratio k",
        "regime_structure": "fixed; b2 = k*a2 stays the strong-slot gain",
    }
    return _run("k", xs, configs, base, meta, workers)


def _fmt(v: float) -> str:
    return "%#.6g" % v


def write_csv(table: SweepTable, destination) -> None:
    """Write ``x`` and the three rate columns, 6 significant digits.

    ``destination`` is a path or a text stream.
    """
    if hasattr(destination, "write"):
        _write_rows(table, destination)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            _write_rows(table, fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(destination)}: {exc.strerror or exc}") from exc


def _write_rows(table: SweepTable, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for x, r1, r2, r3 in zip(table.x_values, *table.rates):
        writer.writerow([_fmt(x), _fmt(r1), _fmt(r2), _fmt(r3)])


def read_csv(source, x_label: str = "x") -> SweepTable:
    """Parse a CSV written by :func:`write_csv`."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise InvalidInputError(f"unexpected CSV header {rows[0] if rows else None!r}")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 4)
    return SweepTable(x_label, data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def _nice_ticks(lo: float, hi: float, target: int = 6) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = np.arange(start, hi + step * 1e-9, step)
    return np.round(ticks, 10)


COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def render_svg(table: SweepTable, destination) -> None:
    """Standalone SVG line chart with one polyline per scheme."""
    if len(table.x_values) < 2:
        raise InvalidInputError("an SVG chart needs at least 2 sweep points")
    width, height = 640, 420
    left, right, top, bottom = 70, 150, 40, 55
    pw, ph = width - left - right, height - top - bottom

    x = table.x_values
    ys = np.concatenate(table.rates)
    ys = ys[np.isfinite(ys)]
    xlo, xhi = float(x.min()), float(x.max())
    ylo = 0.0
    yhi = float(ys.max()) * 1.05 if ys.size and ys.max() > 0 else 1.0
    yticks = _nice_ticks(ylo, yhi)
    yhi = max(yhi, float(yticks[-1]))
    xticks = _nice_ticks(xlo, xhi) if xhi > xlo else np.array([xlo])

    def sx(v):
        return left + (v - xlo) / (xhi - xlo) * pw if xhi > xlo else left + pw / 2

    def sy(v):
        return top + (1 - (v - ylo) / (yhi - ylo)) * ph

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        version="1.1",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    t = ET.SubElement(svg, "text", x=str(left + pw / 2), y="22", attrib={"text-anchor": "middle", "font-size": "15"})
    t.text = table.title

    axes = ET.SubElement(svg, "g", stroke="black", attrib={"stroke-width": "1"})
    ET.SubElement(axes, "line", x1=str(left), y1=str(top + ph), x2=str(left + pw), y2=str(top + ph))
    ET.SubElement(axes, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(top + ph))

    labels = ET.SubElement(svg, "g", attrib={"font-size": "11", "font-family": "sans-serif"})
    for v in xticks:
        if xlo - 1e-12 <= v <= xhi + 1e-12:
            px = sx(v)
            ET.SubElement(axes, "line", x1=f"{px:.2f}", y1=str(top + ph), x2=f"{px:.2f}", y2=str(top + ph + 5))
            lab = ET.SubElement(labels, "text", x=f"{px:.2f}", y=str(top + ph + 18), attrib={"text-anchor": "middle"})
            lab.text = f"{v:g}"
    for v in yticks:
        py = sy(v)
        ET.SubElement(axes, "line", x1=str(left - 5), y1=f"{py:.2f}", x2=str(left), y2=f"{py:.2f}")
        lab = ET.SubElement(labels, "text", x=str(left - 8), y=f"{py + 4:.2f}", attrib={"text-anchor": "end"})
        lab.text = f"{v:g}"
    xl = ET.SubElement(labels, "text", x=str(left + pw / 2), y=str(height - 12), attrib={"text-anchor": "middle"})
    xl.text = table.x_label
    yl = ET.SubElement(
        labels,
        "text",
        x="18",
        y=str(top + ph / 2),
        transform=f"rotate(-90 18 {top + ph / 2})",
        attrib={"text-anchor": "middle"},
    )
    yl.text = "Sum rate (b/s/Hz)"

    for k, (col, label, color) in enumerate(zip(table.rates, SCHEME_LABELS, COLORS)):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, col) if np.isfinite(b))
        ET.SubElement(
            svg,
            "polyline",
            points=pts,
            fill="none",
            stroke=color,
            attrib={"stroke-width": "2", "data-label": label},
        )
        ly = top + 15 + 20 * k
        ET.SubElement(
            svg,
            "line",
            x1=str(left + pw + 15),
            y1=str(ly),
            x2=str(left + pw + 40),
            y2=str(ly),
            stroke=color,
            attrib={"stroke-width": "2"},
        )
        lt = ET.SubElement(svg, "text", x=str(left + pw + 46), y=str(ly + 4), attrib={"font-size": "12"})
        lt.text = label

    data = ET.tostring(svg, encoding="unicode")
    doc = '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n' + data + "\n"
    if hasattr(destination, "write"):
        destination.write(doc)
        return
    try:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(doc)
    except OSError as exc:
        raise OSError(f"cannot write SVG to {os.fspath(destination)}: {exc.strerror or exc}") from exc
