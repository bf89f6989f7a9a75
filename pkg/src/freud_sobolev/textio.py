"""Number rendering and parsing for CSV/JSON output."""

from __future__ import annotations

import math
import re

import mpmath

from .errors import ArgumentError


def format_number(x, digits=None) -> str:
    """Full-precision decimal text for a float or mpmath number.

    Floats use the shortest round-tripping repr; mpmath values are printed
    with ``digits`` significant digits.
    """
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, digits or mpmath.mp.dps, min_fixed=-4, max_fixed=16)
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return repr(float(x))


def format_log_value(log_value, digits=17) -> str:
    """Render exp(log_value) in scientific notation without overflowing."""
    with mpmath.workdps(max(digits + 5, 30)):
        return mpmath.nstr(mpmath.exp(mpmath.mpf(log_value)), digits)


_COMPLEX_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"([+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i\s*$")
_IMAG_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i\s*$")
_REAL_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*$")


def parse_complex(spec: str) -> complex:
    """Parse ``RE+IMi`` (no spaces), ``IMi`` or a plain real."""
    m = _COMPLEX_RE.match(spec)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    m = _IMAG_RE.match(spec)
    if m:
        return complex(0.0, float(m.group(1)))
    m = _REAL_RE.match(spec)
    if m:
        return complex(float(m.group(1)), 0.0)
    raise ArgumentError(f"malformed complex literal {spec!r}; expected RE+IMi")


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"
