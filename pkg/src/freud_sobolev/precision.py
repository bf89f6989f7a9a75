"""Runtime-selectable scalar arithmetic.

Two modes share one interface:

* ``std``: IEEE binary64 (Python ``float``/``complex``), about 16 digits.
* ``ext<digits>``: :mod:`mpmath` numbers at ``digits`` decimal places.

Algorithms written against :class:`Precision` run unchanged in both modes.
All extended-mode work must happen inside ``with prec.context():`` since
mpmath keeps its working precision in global state.
"""

from __future__ import annotations

import cmath
import contextlib
import math
import os
import re
from dataclasses import dataclass

import mpmath

from .errors import ArgumentError

ENV_VAR = "FREUD_SOBOLEV_PRECISION"
DEFAULT_EXT_DIGITS = 50


@dataclass(frozen=True)
class Precision:
    """Arithmetic mode. ``digits is None`` selects binary64."""

    digits: int | None = None

    def __post_init__(self):
        if self.digits is not None and self.digits < 17:
            raise ValueError("extended precision needs at least 17 digits")

    @property
    def extended(self) -> bool:
        return self.digits is not None

    @property
    def tag(self) -> str:
        return "std" if self.digits is None else f"ext{self.digits}"

    @property
    def eps(self):
        if self.digits is None:
            return 2.0 ** -52
        return mpmath.mpf(10) ** (-self.digits)

    def context(self):
        if self.digits is None:
            return contextlib.nullcontext()
        # a few guard digits beyond the requested accuracy
        return mpmath.workdps(self.digits + 10)

    # -- constructors -----------------------------------------------------
    def real(self, x):
        return float(x) if self.digits is None else mpmath.mpf(x)

    def cplx(self, z):
        return complex(z) if self.digits is None else mpmath.mpc(z)

    def zero(self):
        return self.real(0)

    def one(self):
        return self.real(1)

    # -- elementary functions ------------------------------------------------
    def sqrt(self, x):
        return math.sqrt(x) if self.digits is None else mpmath.sqrt(x)

    def csqrt(self, z):
        return cmath.sqrt(z) if self.digits is None else mpmath.sqrt(mpmath.mpc(z))

    def log(self, x):
        return math.log(x) if self.digits is None else mpmath.log(x)

    def exp(self, x):
        return math.exp(x) if self.digits is None else mpmath.exp(x)

    def cexp(self, z):
        return cmath.exp(z) if self.digits is None else mpmath.exp(mpmath.mpc(z))

    def clog(self, z):
        return cmath.log(z) if self.digits is None else mpmath.log(mpmath.mpc(z))

    def gamma(self, x):
        return math.gamma(x) if self.digits is None else mpmath.gamma(x)

    @property
    def pi(self):
        return math.pi if self.digits is None else +mpmath.pi

    def power(self, x, e):
        if self.digits is None:
            return float(x) ** float(e)
        return mpmath.power(mpmath.mpf(x), mpmath.mpf(e))


STD = Precision()


def ext(digits: int = DEFAULT_EXT_DIGITS) -> Precision:
    return Precision(digits)


_SPEC_RE = re.compile(r"^(std|ext(\d*))$")


def parse_precision(spec: str) -> Precision:
    """Parse ``std``, ``ext`` or ``ext<digits>``."""
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ArgumentError(f"bad precision spec {spec!r}; expected std or ext<digits>")
    if m.group(1) == "std":
        return STD
    digits = int(m.group(2)) if m.group(2) else DEFAULT_EXT_DIGITS
    if digits < 50:
        raise ArgumentError("extended mode requires at least 50 digits")
    return Precision(digits)


def precision_from_env(default: Precision = STD) -> Precision:
    spec = os.environ.get(ENV_VAR)
    return parse_precision(spec) if spec else default


def to_float(x) -> float:
    return float(x)


def isfinite(x) -> bool:
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return bool(mpmath.isfinite(x))
    if isinstance(x, complex):
        return cmath.isfinite(x)
    return math.isfinite(x)
