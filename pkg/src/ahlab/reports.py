"""Deterministic CSV/JSON emission for the command-line front end.

Floats are written with 17 significant digits so identical configurations
reproduce identical bytes; JSON documents carry a schema-version field and
sorted keys for the same reason.  No timestamps or machine identifiers are
ever written here (wall times appear only in the verification report,
which is exempt from byte determinism).
"""

import json

import numpy as np

SCHEMA_VERSION = 1


def fmt_float(x):
    return "%.17g" % float(x)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return fmt_float(v)


def config_comments(config):
    return ["# config: %s=%s" % (k, _cell(v)) for k, v in sorted(config.items())]


def write_csv(path, header, rows, config=None, comments=()):
    """Write comment lines, one header line, and formatted data rows.

    `config` is echoed as '# config: key=value' lines; extra `comments`
    (already '#'-prefixed) follow it.
    """
    lines = []
    if config:
        lines.extend(config_comments(config))
    lines.extend(comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def jsonable(obj):
    """Recursively convert numpy containers/scalars to JSON-safe types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def write_json(path, payload, config=None):
    doc = {"schema_version": SCHEMA_VERSION}
    if config is not None:
        doc["config"] = dict(config)
    doc.update(payload)
    text = json.dumps(jsonable(doc), sort_keys=True, indent=2)
    with open(path, "w", newline="") as fh:
        fh.write(text + "\n")


def volume_rows(curve):
    return zip(curve.grid, curve.area, curve.ball, curve.area_ratio, curve.ball_ratio)


VOLUME_HEADER = ["t", "area", "ball", "area_ratio", "ball_ratio"]


def solution_rows(sol):
    return zip(sol.grid, sol.u, sol.uprime)


SOLUTION_HEADER = ["t", "u", "uprime"]


def compactified_rows(grid, rho, j_weighted, h_weighted):
    return zip(grid, rho, j_weighted, h_weighted)


COMPACTIFIED_HEADER = ["t", "rho", "J_weighted", "H_weighted"]
