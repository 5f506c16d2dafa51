"""Output serialization shared by all subcommands.

Floats are rendered with 17 significant digits everywhere (CSV cells and the
JSON report alike) so that parsing the file recovers the exact double; the
JSON schema keeps them as *strings* because JSON writers are allowed to
re-round numeric literals. Every file starts with a header that echoes the
full configuration, which makes any output self-describing and
reproducible.
"""
from __future__ import annotations

import json
import numpy as np

from . import __version__
from .config import RunConfig

__all__ = ["sig17", "header_lines", "csv_text", "json_report"]


def sig17(x: float) -> str:
    return "%.17g" % float(x)


def header_lines(config: RunConfig) -> list[str]:
    items = sorted(config.to_dict().items())
    out = ["# artifact_version: %s" % __version__]
    out += ["# %s: %s" % (k, json.dumps(v) if isinstance(v, (list, dict)) else v)
            for k, v in items]
    return out


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return sig17(v)
    return str(v)


def csv_text(fieldnames: list[str], rows: list[dict], config: RunConfig) -> str:
    lines = header_lines(config)
    lines.append(",".join(fieldnames))
    for row in rows:
        lines.append(",".join(_cell(row[name]) for name in fieldnames))
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return sig17(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"im": sig17(v.imag), "re": sig17(v.real)}
    return v


def json_report(config: RunConfig, results, diagnostics) -> str:
    doc = {
        "config": config.to_dict(),
        "diagnostics": _jsonable(diagnostics),
        "results": _jsonable(results),
    }
    doc["diagnostics"]["artifact_version"] = __version__
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
