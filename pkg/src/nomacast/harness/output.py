"""CSV emission, aggregation and re-aggregation of trial rows.

Every CSV starts with ``#`` comment lines holding the code version and the
resolved configuration, followed by one header row.  Floats are written
with ``repr`` so that reading a file back gives the exact same values.
Wall-clock times go to a separate timing file, keeping the result files
byte-identical across reruns.
"""
import csv
import io
import math
import os
import subprocess
from functools import lru_cache

from .. import __version__
from ..channel import mw_to_dbm
from . import config as cfgmod
from .runner import STATUSES, TrialRecord

RAW_FIELDS = ("trial", "seed", "series", "sweep", "scheme", "status", "objective",
              "mm_iterations", "converged")
AGG_FIELDS = ("series", "sweep", "scheme", "n_ok", "n_infeasible", "n_failed", "mean",
              "mean_dbm", "mean_db_domain", "mean_iterations", "max_iterations", "n_converged")


@lru_cache(maxsize=None)
def code_version():
    """Package version plus the git revision of the source tree when available."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=here,
                             capture_output=True, text=True, timeout=10)
        tag = rev.stdout.strip() if rev.returncode == 0 else ""
    except (OSError, subprocess.SubprocessError):
        tag = ""
    return f"{__version__}+{tag}" if tag else __version__


def _num(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _header(cfg):
    lines = [f"# nomacast {code_version()}", f"# kind={cfg.kind}"]
    ini = cfgmod.dumps(cfg, include_out=False)
    lines += [f"# {ln}" if ln else "#" for ln in ini.splitlines()]
    return "\n".join(lines) + "\n"


def _csv_text(cfg, fields, rows):
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    w.writerows(rows)
    return buf.getvalue()


def raw_csv(cfg, records):
    return _csv_text(cfg, RAW_FIELDS, [
        [r.trial, r.seed, _num(r.series), _num(r.sweep), r.scheme, r.status,
         _num(r.objective), r.mm_iterations, _num(r.converged)] for r in records])


def _mean(values):
    return math.fsum(values) / len(values) if values else float("nan")


def aggregate(cfg, records):
    """Per (series, sweep point, scheme): counts and means over the ok rows.

    Infeasible and failed rows are excluded from the means and counted.  For
    power scenarios ``mean_dbm`` is the linear-mW mean in dBm and
    ``mean_db_domain`` the mean of the per-trial dBm values.
    """
    groups = {}
    for r in records:
        groups.setdefault((r.series, r.sweep, r.scheme), []).append(r)
    power = cfg.kind == "PowerMin"
    out = []
    for series, value in cfg.points():
        for scheme in cfg.schemes:
            rows = groups.get((series, value, scheme), [])
            ok = [r for r in rows if r.status == "ok"]
            counts = [sum(r.status == s for r in rows) for s in STATUSES]
            vals = [r.objective for r in ok]
            mean = _mean(vals)
            dbm = mean_db = None
            if power and vals:
                dbm = mw_to_dbm(mean) if mean > 0 else float("-inf")
                mean_db = _mean([mw_to_dbm(v) if v > 0 else float("-inf") for v in vals])
            iters = [r.mm_iterations for r in ok]
            out.append([_num(series), _num(value), scheme, *counts, _num(mean), _num(dbm),
                        _num(mean_db), _num(_mean(iters)), max(iters, default=0),
                        sum(r.converged for r in ok)])
    return out


def aggregate_csv(cfg, records):
    return _csv_text(cfg, AGG_FIELDS, aggregate(cfg, records))


def read_raw(path_or_text):
    """``(config, records)`` from a raw CSV (path or its text)."""
    if os.path.exists(str(path_or_text)) and "\n" not in str(path_or_text):
        with open(path_or_text) as fh:
            text = fh.read()
    else:
        text = str(path_or_text)
    head, body = [], []
    for ln in text.splitlines():
        (head if ln.startswith("#") else body).append(ln)
    ini = "\n".join(ln[2:] if ln.startswith("# ") else "" for ln in head[2:])
    cfg = cfgmod.loads(ini)
    records = []
    for row in csv.DictReader(body):
        records.append(TrialRecord(
            int(row["trial"]), int(row["seed"]), _grid(cfg.series_variable, row["series"]),
            _grid(cfg.sweep_variable, row["sweep"]), row["scheme"], row["status"],
            float(row["objective"]), int(row["mm_iterations"]), row["converged"] == "1"))
    return cfg, records


def _grid(var, text):
    if text == "":
        return None
    return int(text) if var in cfgmod.INT_VARIABLES else float(text)


def reaggregate(path_or_text):
    """Aggregate CSV text recomputed from a raw CSV."""
    cfg, records = read_raw(path_or_text)
    return aggregate_csv(cfg, records)


def timing_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("trial", "series", "sweep", "scheme", "wall_time_s"))
    for r in records:
        w.writerow((r.trial, _num(r.series), _num(r.sweep), r.scheme, f"{r.wall_time:.4f}"))
    return buf.getvalue()


def summary_text(cfg, records, agg_rows=None):
    agg_rows = agg_rows if agg_rows is not None else aggregate(cfg, records)
    lines = [f"nomacast {code_version()}: {cfg.name} ({cfg.kind}), {cfg.trials} trials, "
             f"seed {cfg.seed}",
             f"sweep {cfg.sweep_variable} over {len(cfg.sweep_values)} points"
             + (f", series {cfg.series_variable} {list(cfg.series_values)}"
                if cfg.series_variable else "")]
    unit = {"PowerMin": "mW", "SumRate": "bits/s/Hz", "EE": "bits/J/Hz"}.get(cfg.kind, "")
    for row in agg_rows:
        series, value, scheme, n_ok, n_inf, n_fail, mean, dbm = row[:8]
        label = f"{cfg.series_variable}={series} " if series else ""
        extra = f" ({float(dbm):.2f} dBm)" if dbm else ""
        lines.append(f"  {label}{cfg.sweep_variable}={value} {scheme:6s} mean={float(mean):.6g}"
                     f" {unit}{extra} ok={n_ok} infeasible={n_inf} failed={n_fail}"
                     f" mean_iters={float(row[9]):.2f}")
    failed = sum(r.status == "failed" for r in records)
    total = sum(r.wall_time for r in records)
    lines.append(f"failed rows: {failed}; total solve time {total:.1f} s")
    return "\n".join(lines) + "\n"


def write_outputs(cfg, records, out_dir=None):
    """Write raw, aggregate, timing and summary files; returns their paths."""
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)
    agg = aggregate(cfg, records)
    paths = {
        "raw": os.path.join(out_dir, f"{cfg.name}_raw.csv"),
        "aggregate": os.path.join(out_dir, f"{cfg.name}_aggregate.csv"),
        "timing": os.path.join(out_dir, f"{cfg.name}_timing.csv"),
        "summary": os.path.join(out_dir, f"{cfg.name}_summary.txt"),
    }
    texts = {
        "raw": raw_csv(cfg, records),
        "aggregate": _csv_text(cfg, AGG_FIELDS, agg),
        "timing": timing_csv(records),
        "summary": summary_text(cfg, records, agg),
    }
    for key, path in paths.items():
        with open(path, "w", newline="") as fh:
            fh.write(texts[key])
    return paths
