"""CSV emission with a ``#`` provenance header.

Header lines are ``# key = value``. All of them except ``timestamp`` are
a deterministic function of the run, and the model, integrator, steady
and sweep keys are valid config syntax. :func:`config_from_header` turns
an output file back into a config that reproduces it.

Schemas (columns after the first are alphabetical):

* time series: ``t, aux_energy, aux_ergotropy, battery_energy,
  battery_ergotropy, purity``
* steady: ``observable, final_value, residual, steady_value, tau_s``
* sweep: one column per axis in sweep order, then ``residual, status,
  tau_s, value``
* compare: ``case, residual, steady_value, tau_s``

Missing values (no steady state, auxiliary absent) are written as ``nan``.
"""
from __future__ import annotations

import csv
import datetime
import io
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .dynamics import OBSERVABLES, SteadyStateReport, Trajectory
from .experiments import BaselineReport, SweepResult

TIMESTAMP_KEY = "timestamp"
TIME_SERIES_COLUMNS = ("t",) + tuple(sorted(OBSERVABLES))
STEADY_COLUMNS = ("observable", "final_value", "residual", "steady_value", "tau_s")
SWEEP_TAIL = ("residual", "status", "tau_s", "value")
COMPARE_COLUMNS = ("case", "residual", "steady_value", "tau_s")

# header keys that are bookkeeping rather than config
_META_KEYS = {"code_version", "integrator.record_interval", TIMESTAMP_KEY, "kind", "truncation_dim",
              "ordered", "steady_state_reached"}


def fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def header_lines(header: Dict[str, object], timestamp: Optional[str] = None) -> List[str]:
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"# {TIMESTAMP_KEY} = {timestamp}"]
    # None in a header means "use the default", which the config parser accepts
    lines += [f"# {k} = {'default' if v is None else fmt(v)}" for k, v in header.items()]
    return lines


def _table(header, columns: Sequence[str], rows: Iterable[Sequence], timestamp=None) -> str:
    buf = io.StringIO()
    for line in header_lines(header, timestamp):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def time_series_csv(traj: Trajectory, header: Dict[str, object], timestamp=None) -> str:
    cols = [traj.times] + [traj.column(name) for name in TIME_SERIES_COLUMNS[1:]]
    return _table({**header, "kind": "time_series"}, TIME_SERIES_COLUMNS, zip(*cols), timestamp)


def steady_csv(report: SteadyStateReport, header: Dict[str, object], timestamp=None) -> str:
    row = (report.observable, report.final_value, report.residual, report.steady_value, report.tau_s)
    extra = {"kind": "steady", "steady_state_reached": report.reached}
    return _table({**header, **extra}, STEADY_COLUMNS, [row], timestamp)


def sweep_csv(result: SweepResult, timestamp=None) -> str:
    names = result.axis_names
    rows = [[c.point[n] for n in names] + [c.residual, c.status, c.tau_s, c.value]
            for c in result.cells]
    return _table({**result.header, "kind": "sweep"}, tuple(names) + SWEEP_TAIL, rows, timestamp)


def compare_csv(report: BaselineReport, header: Dict[str, object], timestamp=None) -> str:
    rows = [(label, r.residual, r.steady_value, r.tau_s) for label, r in report.rows()]
    return _table({**header, "kind": "compare", "ordered": report.ordered},
                  COMPARE_COLUMNS, rows, timestamp)


def strip_timestamp(text: str) -> str:
    prefix = f"# {TIMESTAMP_KEY} ="
    return "".join(l for l in text.splitlines(keepends=True) if not l.startswith(prefix))


def read_header(text: str) -> Dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition("=")
        out[key.strip()] = value.strip()
    return out


def config_from_header(text: str) -> str:
    """Config text that re-creates the run described by an output header."""
    lines = []
    for key, value in read_header(text).items():
        if key in _META_KEYS or key.startswith("compare."):
            continue
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def read_table(text: str):
    """Parse the data part of an emitted CSV into a header list and row lists."""
    body = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:]
