"""Deterministic CSV/JSON artifact writers shared by the CLI commands."""

import json

UNITS_NOTE = "lengths in transition wavelengths, rates and shifts in units of Gamma0"


def fmt_float(v: float, digits: int = 12) -> str:
    """Fixed float formatting: `digits` significant figures, scientific below 1e-4."""
    v = float(v)
    if v == 0.0:
        return "0"
    if abs(v) < 1e-4:
        return f"{v:.{digits - 1}e}"
    return f"{v:.{digits}g}"


def fmt_value(v, digits: int = 12) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return fmt_float(v, digits)
    return str(v)


def header_lines(version: str, config_items: list[tuple[str, str]]) -> list[str]:
    """Metadata header: tool version, units note, and the resolved config echo.

    config_items are ('section.key', 'value') pairs; the echoed lines re-parse
    to the same run configuration.
    """
    lines = [f"# dipolerings {version}", f"# units: {UNITS_NOTE}"]
    lines += [f"# config: {key} = {val}" for key, val in config_items]
    return lines


def write_csv(path, version, config_items, columns, rows, digits=12):
    out = header_lines(version, config_items)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(fmt_value(v, digits) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(out) + "\n")


def write_json(path, version, config_items, payload):
    doc = {
        "tool": "dipolerings",
        "version": version,
        "units": UNITS_NOTE,
        "config": {k: v for k, v in config_items},
        **payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")


def interleave_complex(values) -> list[float]:
    """Complex array as a flat [re, im, re, im, ...] list."""
    out = []
    for v in values:
        out.append(float(v.real))
        out.append(float(v.imag))
    return out
