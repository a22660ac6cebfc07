"""Config parsing, deterministic CSV output, and result directories.

Configs are flat key-value text (`key = value`, one optional nesting level
`section.key = value`) or JSON.  CSV output is byte-deterministic for a
fixed (config, seed): floats print through repr-stable %.12g and no
timestamps enter file contents (timestamps appear only in directory names).
"""

from __future__ import annotations

import hashlib
import json
import subprocess
import time
from pathlib import Path

from . import __version__


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _coerce(text):
    t = text.strip()
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    if "," in t:
        return [_coerce(part) for part in t.split(",")]
    return t


def parse_config(path):
    """Parse a flat key-value or JSON config file."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON: {exc.msg}", line=exc.lineno)
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=ln)
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("empty key", line=ln)
        parts = key.split(".")
        if len(parts) == 1:
            out[key] = _coerce(val)
        elif len(parts) == 2:
            out.setdefault(parts[0], {})
            if not isinstance(out[parts[0]], dict):
                raise ConfigError(f"key {parts[0]!r} mixes scalar and section", line=ln)
            out[parts[0]][parts[1]] = _coerce(val)
        else:
            raise ConfigError("at most one nesting level is supported", line=ln)
    return out


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def fmt_value(x):
    if isinstance(x, float):
        return "%.12g" % x
    if isinstance(x, complex):
        return "%.12g%+.12gj" % (x.real, x.imag)
    return str(x)


def write_csv(path, columns, rows, header_lines=()):
    """Deterministic CSV: optional '#' header lines, then columns, then rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt_value(x) for x in row) + "\n")
    return path


def read_csv(path):
    """Read a CSV written by write_csv: (header_lines, columns, rows-as-str)."""
    header, columns, rows = [], None, []
    for raw in Path(path).read_text().splitlines():
        if raw.startswith("#"):
            header.append(raw[2:] if raw.startswith("# ") else raw[1:])
            continue
        if columns is None:
            columns = raw.split(",")
            continue
        if raw:
            rows.append(raw.split(","))
    return header, columns or [], rows


def version_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"isinglab {__version__} ({out.stdout.strip()})"
    except Exception:
        pass
    return f"isinglab {__version__}"


def result_dir(base, experiment, timestamp=None):
    ts = timestamp or time.strftime("%Y%m%dT%H%M%S")
    d = Path(base) / experiment / ts
    d.mkdir(parents=True, exist_ok=True)
    return d


def export_stream_csv(path, sweeps, observables, seed):
    """Sample stream: one row per measurement, the seed in the header.

    observables: mapping name -> sequence, all of the same length.
    """
    names = sorted(observables)
    rows = []
    for k, sweep in enumerate(sweeps):
        rows.append([sweep] + [observables[n][k] for n in names])
    return write_csv(path, ["sweep"] + names, rows, [f"seed={seed}"])


def export_field_csv(path, field, delta=1.0, header_lines=()):
    """Lattice field: (id, ix, iy, re, im) rows in deterministic order."""
    rows = []
    for k, (pt, val) in enumerate(sorted(field.items())):
        val = complex(val)
        rows.append((k, pt[0], pt[1], val.real, val.imag))
    return write_csv(path, ["id", "ix", "iy", "re", "im"], rows,
                     list(header_lines) + [f"mesh={delta}"])


def export_observable_csv(path, edge_field, method, samples, delta=1.0):
    """Observable field rows: (edge id, ix, iy, re, im, abs, arg, method,
    samples), with (ix, iy) the directed edge's tail vertex."""
    import cmath
    rows = []
    for k, ((tail, head), val) in enumerate(sorted(edge_field.items())):
        val = complex(val)
        rows.append((k, tail[0], tail[1], val.real, val.imag,
                     abs(val), cmath.phase(val), method, samples))
    return write_csv(path, ["id", "ix", "iy", "re", "im", "abs", "arg",
                            "method", "samples"], rows, [f"mesh={delta}"])


def write_summary(out_dir, experiment, config, summary):
    payload = {
        "experiment": experiment,
        "config": config,
        "config_hash": config_hash(config),
        "version": version_describe(),
        "summary": summary,
    }
    path = Path(out_dir) / "summary.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path
