"""Command-line front end.

Exit status: 0 on success, 2 on usage or validation errors, 3 on numeric or
convergence failures. Output goes to ``--output`` (removed again if the run
fails) or to stdout.

Precision is taken from ``--precision``, then the ``FREUD_SOBOLEV_PRECISION``
environment variable, then the ``precision`` key of ``--config``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import asymptotics as asy
from .errors import (ArgumentError, DomainError, FreudSobolevError, RangeError,
                     ResolutionError)
from .freud_coeffs import solve_string_system
from .potential import HERMITE, QUARTIC, freud_field, mrs_table, szego_fn
from .precision import ENV_VAR, parse_precision
from .sobolev import LambdaSchedule, balance_diagnostic, sobolev_rows, write_sobolev_csv
from .textio import format_complex, parse_complex

__all__ = ["RunConfig", "parse_schedule", "parse_grid", "run", "main"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
_USAGE_ERRORS = (ArgumentError, DomainError, RangeError, ResolutionError)
VERIFY_KINDS = ("prop1", "theorem1", "lemma1", "strong", "ratio", "norms", "sninfty")


class UsageError(ArgumentError):
    pass


@dataclass
class RunConfig:
    command: str
    subcommand: str | None = None
    n: int | None = None
    grid: list | None = None
    schedule: str | None = None
    lam: float | None = None
    z: str | None = None
    mrs_field: str = "quartic"
    precision: str = "std"
    output: str | None = None
    format: str | None = None
    threads: int = 1
    corrected: bool = False


def parse_schedule(spec: str) -> LambdaSchedule:
    """``power:<L>:<e>``, ``const:<c>`` or ``file:<path>`` (one lambda per line)."""
    kind, _, rest = spec.partition(":")
    if kind == "power":
        parts = rest.split(":")
        if len(parts) != 2:
            raise UsageError(f"schedule {spec!r}: expected power:<L>:<e>")
        L, e = (_number(p, spec) for p in parts)
        if L <= 0:
            raise ArgumentError(f"schedule {spec!r}: L must be positive")
        return LambdaSchedule("power", L, e, spec=spec)
    if kind == "const":
        c = _number(rest, spec)
        if c <= 0:
            raise ArgumentError(f"schedule {spec!r}: constant must be positive")
        return LambdaSchedule("constant", c, 0.0, spec=spec)
    if kind == "file":
        try:
            lines = Path(rest).read_text().split()
        except OSError as exc:
            raise UsageError(f"schedule file {rest!r}: {exc.strerror}") from exc
        return LambdaSchedule.table([_number(t, spec) for t in lines], spec=spec)
    raise UsageError(f"schedule {spec!r}: unknown kind {kind!r}")


def _number(token: str, spec: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise UsageError(f"schedule {spec!r}: bad number {token!r}") from None


_GRID_RE = re.compile(r"^(\d+):(\d+):x2$")


def parse_grid(spec: str) -> list:
    """``a:b:x2`` (doubling from a to b inclusive) or a comma list."""
    m = _GRID_RE.match(spec.strip())
    if m:
        return asy.doubling_grid(int(m.group(1)), int(m.group(2)))
    try:
        grid = [int(t) for t in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad grid spec {spec!r}; expected a:b:x2 or n1,n2,...") from None
    if any(b <= a for a, b in zip(grid, grid[1:])) or not grid or grid[0] < 1:
        raise UsageError(f"grid {spec!r} must be strictly increasing positive integers")
    return grid


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"config {path!r}: {exc.strerror}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config {path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _field(spec: str):
    if spec == "quartic":
        return QUARTIC
    if spec == "hermite":
        return HERMITE
    kind, _, rest = spec.partition(":")
    if kind == "freud":
        try:
            m, c = (float(t) for t in rest.split(":"))
        except ValueError:
            raise UsageError(f"field {spec!r}: expected freud:<m>:<c>") from None
        return freud_field(m, c)
    raise UsageError(f"unknown field {spec!r}")


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _cmd_coeffs(cfg: RunConfig, prec) -> str:
    table = solve_string_system(_need(cfg.n, "--n"), precision=prec)
    buf = io.StringIO()
    table.write_csv(buf)
    return buf.getvalue()


def _cmd_sobolev(cfg: RunConfig, prec) -> str:
    n = _need(cfg.n, "--n")
    if n < 3:
        raise UsageError("--n must be at least 3")
    table = solve_string_system(max(n, 2), precision=prec)
    if cfg.lam is not None:
        rows = sobolev_rows(table, cfg.lam, n)
    else:
        sched = parse_schedule(_need(cfg.schedule, "--lambda or --schedule"))
        rows = [balance_diagnostic(table, sched, m) for m in range(3, n + 1)]
    buf = io.StringIO()
    write_sobolev_csv(buf, rows, prec.digits)
    return buf.getvalue()


def _cmd_balance(cfg: RunConfig, prec) -> str:
    sched = parse_schedule(_need(cfg.schedule, "--schedule"))
    grid = cfg.grid or ([cfg.n] if cfg.n else None)
    grid = _need(grid, "--grid")
    table = solve_string_system(max(grid[-1], 2), precision=prec)
    rows = asy._map(lambda m: balance_diagnostic(table, sched, m), grid, cfg.threads)
    buf = io.StringIO()
    write_sobolev_csv(buf, rows, prec.digits)
    return buf.getvalue()


def _cmd_mrs(cfg: RunConfig, prec) -> str:
    ns = cfg.grid or ([cfg.n] if cfg.n else None)
    buf = io.StringIO()
    mrs_table(_field(cfg.mrs_field), _need(ns, "--n or --grid")).write_csv(buf)
    return buf.getvalue()


def _cmd_szego(cfg: RunConfig, prec) -> str:
    ns = cfg.grid or ([cfg.n] if cfg.n else None)
    ns = _need(ns, "--n or --grid")
    z = parse_complex(_need(cfg.z, "--z"))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "z", "D_re", "D_im"])
    for n in ns:
        d = szego_fn(n, z)
        w.writerow([n, format_complex(z), repr(d.real), repr(d.imag)])
    return buf.getvalue()


def _cmd_verify(cfg: RunConfig, prec) -> str:
    kind = cfg.subcommand
    grid = _need(cfg.grid, "--grid")
    table = solve_string_system(max(grid[-1], 2), precision=prec)
    z = parse_complex(cfg.z) if cfg.z is not None else 2j
    sched = parse_schedule(cfg.schedule) if cfg.schedule else None
    t = cfg.threads
    if kind == "prop1":
        rep = asy.verify_prop1(table, _need(sched, "--schedule"), grid)
    elif kind == "sninfty":
        rep = asy.verify_sn_infty(table, _need(sched, "--schedule"), grid)
    elif kind == "theorem1":
        rep = asy.verify_theorem1(table, _need(sched, "--schedule"), z, grid, threads=t)
    elif kind == "lemma1":
        rep = asy.verify_lemma1(table, _need(sched, "--schedule"), z, grid, threads=t)
    elif kind == "strong":
        rep = asy.verify_strong_asymptotics(table, z, grid, corrected=cfg.corrected, threads=t)
    elif kind == "ratio":
        rep = asy.verify_pn_ratio(table, z, grid, threads=t)
    elif kind == "norms":
        rep = asy.verify_norm_ratio(table, grid)
    else:
        raise UsageError(f"unknown verify target {kind!r}")
    return rep.to_json() + "\n"


_COMMANDS = {
    "coeffs": (_cmd_coeffs, "csv"),
    "sobolev": (_cmd_sobolev, "csv"),
    "balance": (_cmd_balance, "csv"),
    "mrs": (_cmd_mrs, "csv"),
    "szego": (_cmd_szego, "csv"),
    "verify": (_cmd_verify, "json"),
}


def run(cfg: RunConfig) -> int:
    """Execute one configured command; returns the exit status."""
    try:
        func, fmt = _COMMANDS[cfg.command]
        if cfg.format is not None and cfg.format != fmt:
            raise UsageError(f"{cfg.command} writes {fmt}, not {cfg.format}")
        if cfg.threads < 1:
            raise UsageError("--threads must be positive")
        prec = parse_precision(cfg.precision)
        text = func(cfg, prec)
    except KeyError:
        _err(f"unknown command {cfg.command!r}")
        return EXIT_USAGE
    except _USAGE_ERRORS as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (FreudSobolevError, ArithmeticError) as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    if cfg.output is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        _err(f"cannot write {cfg.output}: {exc.strerror}")
        try:
            os.unlink(cfg.output)
        except OSError:
            pass
        return EXIT_USAGE
    return EXIT_OK


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--grid", help="a:b:x2 (doubling) or n1,n2,...")
    common.add_argument("--schedule", help="power:<L>:<e> | const:<c> | file:<path>")
    common.add_argument("--lambda", dest="lam", type=float, help="fixed penalty (sobolev)")
    common.add_argument("--z", help="complex point RE+IMi")
    common.add_argument("--field", help="quartic | hermite | freud:<m>:<c> (mrs)")
    common.add_argument("--precision", help="std | ext<digits>")
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int)
    common.add_argument("--config", help="key = value file")
    common.add_argument("--corrected", action="store_true",
                        help="strong: include the (z^2 - a_n^2)^(1/4) factor")

    p = argparse.ArgumentParser(prog="freud-sobolev",
                                description="Freud-Sobolev orthogonal polynomials for exp(-x^4).")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="recurrence coefficients (CSV)")
    sub.add_parser("sobolev", parents=[common], help="Sobolev norms and connection coefficients (CSV)")
    sub.add_parser("balance", parents=[common], help="balance diagnostic over a grid (CSV)")
    sub.add_parser("mrs", parents=[common], help="Mhaskar-Rakhmanov-Saff numbers (CSV)")
    sub.add_parser("szego", parents=[common], help="Szego function values (CSV)")
    v = sub.add_parser("verify", parents=[common], help="convergence sweep (JSON)")
    v.add_argument("target", choices=VERIFY_KINDS)
    return p


def config_from_args(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    file_cfg = read_config(args.config) if args.config else {}

    def pick(name, default=None):
        v = getattr(args, name, None)
        if v is not None and v is not False:
            return v
        return file_cfg.get(name, default)

    precision = args.precision or environ.get(ENV_VAR) or file_cfg.get("precision") or "std"
    try:
        n = pick("n")
        n = int(n) if n is not None else None
        threads = int(pick("threads", 1))
        lam = pick("lam", file_cfg.get("lambda"))
        lam = float(lam) if lam is not None else None
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    grid = pick("grid")
    corrected = args.corrected or str(file_cfg.get("corrected", "")).lower() in ("1", "true", "yes")
    return RunConfig(
        command=args.command,
        subcommand=getattr(args, "target", None),
        n=n,
        grid=parse_grid(grid) if grid else None,
        schedule=pick("schedule"),
        lam=lam,
        z=pick("z"),
        mrs_field=pick("field", "quartic"),
        precision=precision,
        output=pick("output"),
        format=pick("format"),
        threads=threads,
        corrected=corrected,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    try:
        cfg = config_from_args(args)
    except _USAGE_ERRORS as exc:
        _err(str(exc))
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
