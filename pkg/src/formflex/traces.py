"""Force and flow time traces: CSV ingestion, detachment (MHF) detection and
flow plateau extraction."""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError

# header suffix -> SI suffix
UNIT_SUFFIXES = {"_m3h": "_m3s", "_mbar": "_pa"}


def to_si(values, suffix):
    """Convert from a suffix-declared unit to SI."""
    values = np.asarray(values, dtype=float)
    if suffix == "_m3h":
        return values / 3600.0
    if suffix == "_mbar":
        return values * 100.0
    raise DomainError(f"unknown unit suffix {suffix!r}")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    channel: str = "value"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise DomainError("time and value arrays must be 1-D and equally long")
        if len(t) < 2:
            raise DomainError("a time series needs at least two samples")
        bad = np.nonzero(np.diff(t) <= 0.0)[0]
        if bad.size:
            raise DomainError(f"time must be strictly increasing (sample {bad[0] + 1})")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    def __len__(self):
        return len(self.t)

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    def shifted(self, dt: float) -> "TimeSeries":
        return TimeSeries(self.t + dt, self.v, self.channel)


def _si_channel(name):
    for suffix, si_suffix in UNIT_SUFFIXES.items():
        if name.endswith(suffix):
            return name[: -len(suffix)] + si_suffix, suffix
    return name, None


def parse_traces(text: str) -> dict:
    """Parse a headed CSV whose first column is time in seconds.

    Returns one TimeSeries per remaining column, keyed by SI channel name.
    Columns with a ``_m3h`` or ``_mbar`` suffix are converted to m^3/s and Pa.
    """
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty trace file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError("header must name a time column and at least one channel")
    if len(set(header)) != len(header):
        raise ParseError(f"duplicate column names in header {header}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            data.append([float(c) for c in row])
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from None
    if len(data) < 2:
        raise ParseError("a trace needs at least two data rows")
    arr = np.array(data, dtype=float)
    t = arr[:, 0]
    for k in range(1, len(t)):
        if not t[k] > t[k - 1]:
            raise ParseError(f"row {k + 2}: time {t[k]!r} does not increase (previous {t[k - 1]!r})")
    out = {}
    for j, name in enumerate(header[1:], start=1):
        channel, suffix = _si_channel(name)
        values = arr[:, j] if suffix is None else to_si(arr[:, j], suffix)
        out[channel] = TimeSeries(t.copy(), values, channel)
    return out


def parse_trace(text: str, channel: str = None) -> TimeSeries:
    traces = parse_traces(text)
    if channel is None:
        return next(iter(traces.values()))
    si_name, _ = _si_channel(channel)
    for key in (channel, si_name):
        if key in traces:
            return traces[key]
    raise ParseError(f"missing column {channel!r}; have {list(traces)}")


def serialize_trace(ts: TimeSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_s", ts.channel])
    for t, v in zip(ts.t.tolist(), ts.v.tolist()):
        writer.writerow([repr(t), repr(v)])
    return buf.getvalue()


def extract_mhf(force: TimeSeries, threshold: float = 0.5):
    """Maximum holding force and detachment time from a pull-off trace.

    Detachment is the largest single-step drop larger than ``threshold``
    times the running maximum. Returns ``(mhf, t_detach)`` where ``mhf`` is
    the running maximum before the drop and ``t_detach`` the time of the
    first sample after it.
    """
    if len(force) < 3:
        raise DomainError("need at least three samples to detect detachment")
    v = force.v
    running = np.maximum.accumulate(v)[:-1]
    drops = v[:-1] - v[1:]
    qualifying = (drops > threshold * running) & (running > 0.0)
    if not qualifying.any():
        raise DomainError("no detachment detected")
    k = int(np.argmax(np.where(qualifying, drops, -np.inf)))
    return float(running[k]), float(force.t[k + 1])


@dataclass(frozen=True)
class Plateau:
    value: float     # median over the final window
    stable: bool
    spread: float    # max - min over the window


def extract_plateau(flow: TimeSeries, window: float = 1.0) -> Plateau:
    """Median of the final ``window`` seconds, flagged stable when the spread
    stays under 5 % of it."""
    if not window > 0.0:
        raise DomainError("plateau window is empty")
    if window >= flow.span:
        raise DomainError(f"window {window} s must be shorter than the series span {flow.span} s")
    sel = flow.v[flow.t >= flow.t[-1] - window]
    value = float(np.median(sel))
    spread = float(sel.max() - sel.min())
    return Plateau(value=value, stable=spread < 0.05 * abs(value), spread=spread)


def synthetic_pull_trace(peak: float, noise: float = 0.0, drop_fraction: float = 0.98,
                         t_ramp: float = 2.0, t_after: float = 1.0, dt: float = 0.01,
                         seed: int = 0) -> TimeSeries:
    """Ramp-and-drop pull-off trace for testing.

    Assumed shape, not read off any measured figure: linear ramp from 0 to
    ``peak`` over ``t_ramp`` s at 1/``dt`` Hz, a single-sample drop by
    ``drop_fraction`` of the peak, then a flat tail. Uniform noise of
    amplitude ``noise`` is added everywhere except the peak sample.
    """
    rng = np.random.default_rng(seed)
    n_ramp = int(round(t_ramp / dt)) + 1
    n_tail = int(round(t_after / dt))
    t = dt * np.arange(n_ramp + n_tail)
    v = np.concatenate((np.linspace(0.0, peak, n_ramp), np.full(n_tail, peak * (1.0 - drop_fraction))))
    if noise:
        v = v + rng.uniform(-noise, noise, size=v.shape)
        v[n_ramp - 1] = peak
    return TimeSeries(t, v, "force_n")
