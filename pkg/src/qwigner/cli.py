"""
Command-line front end.

Subcommands: ``simulate``, ``wigner-field``, ``negativity``, ``entropy``,
``verify``.  Settings come from built-in defaults, then an optional preset,
then an optional ``--config`` key-value file, then explicit flags.

Exit codes: 0 success, 1 invalid arguments, 2 verification failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as qio
from .observables import entanglement_entropy, negativity_series
from .walk import (
    PAPER_SPINOR,
    InitialKind,
    InitialStateSpec,
    WalkState,
    coin_matrix,
    position_distribution,
    position_sigma,
    step,
)
from .wigner import (
    PhaseSpaceGrid,
    default_k_points,
    iter_wigner_rows,
    momentum_amplitudes,
    momentum_matrix,
    position_marginal,
    wigner_from_state,
    wigner_from_state_reference,
    wigner_step,
)

log = logging.getLogger("qwigner")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("simulate", "wigner-field", "negativity", "entropy", "verify")
SPINOR_WARN, SPINOR_REJECT = 1e-6, 1e-3


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    theta: float = math.pi / 4
    steps: int = 0
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)
    k_points: int | None = None
    evolution_method: str = "recursion"
    output_path: str | None = None
    output_format: str = "csv"
    times: tuple[int, ...] | None = None
    # one run per entry; set by the fig6/fig7 presets (0 means localized)
    cat_values: tuple[int, ...] | None = None

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise UsageError("theta must be finite")
        if self.steps < 0:
            raise UsageError("steps must be >= 0")
        if self.k_points is not None and self.k_points < 4:
            raise UsageError("k-points must be >= 4")
        if self.evolution_method not in ("amplitude", "recursion"):
            raise UsageError(f"unknown method {self.evolution_method!r}")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.output_format!r}")

    @property
    def k(self) -> int:
        return self.k_points if self.k_points is not None else default_k_points(self.steps)

    def output(self, command: str) -> Path:
        return Path(self.output_path or f"{command}.{self.output_format}")


PRESETS = {
    "fig1": (
        "wigner-field",
        dict(initial="localized", theta="pi/4", steps="500", times="0,100,500", method="amplitude"),
    ),
    "fig6": ("negativity", dict(theta="pi/4", steps="200", **{"cat-values": "0,4,30"})),
    "fig7": ("entropy", dict(theta="pi/4", steps="500", **{"cat-values": "0,4,30"})),
}


# --- parsing ---------------------------------------------------------------

_ANGLE = re.compile(r"^\s*([-+]?[\d.]*)\s*\*?\s*pi\s*(?:/\s*([\d.]+))?\s*$")


def parse_angle(text: str) -> float:
    """Float radians, or forms like ``pi/4``, ``2pi/3``, ``-0.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise UsageError(f"cannot parse angle {text!r}")
    coef = m.group(1)
    num = -1.0 if coef == "-" else float(coef) if coef not in ("", "+") else 1.0
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


def parse_spinor(text: str) -> tuple[complex, complex]:
    """``re_R,im_R,re_L,im_L``; renormalized, warned or rejected by norm error."""
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse coin spinor {text!r}") from None
    if len(parts) != 4:
        raise UsageError("coin spinor needs four numbers: re_R,im_R,re_L,im_L")
    r, l = complex(parts[0], parts[1]), complex(parts[2], parts[3])
    norm2 = abs(r) ** 2 + abs(l) ** 2
    if abs(norm2 - 1) > SPINOR_REJECT:
        raise UsageError(f"coin spinor norm^2 {norm2:.6g} is too far from 1")
    if abs(norm2 - 1) > SPINOR_WARN:
        log.warning("coin spinor norm^2 is %.9g; renormalizing", norm2)
    s = math.sqrt(norm2)
    return r / s, l / s


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines (``:`` also accepted); ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^([A-Za-z][\w-]*)\s*[=:]\s*(.*)$", line)
        if not m:
            raise UsageError(f"{path}:{num}: expected 'key = value'")
        key = m.group(1).replace("_", "-")
        if key not in _KEYS:
            raise UsageError(f"{path}:{num}: unknown key {m.group(1)!r}")
        out[key] = m.group(2).strip()
    return out


_KEYS = (
    "theta", "steps", "initial", "cat-a", "coin-spinor", "k-points",
    "method", "output", "format", "times", "cat-values",
)


def build_config(settings: dict[str, str]) -> ExperimentConfig:
    """Turn merged string settings into a validated :class:`ExperimentConfig`."""
    try:
        steps = int(settings.get("steps", "0"))
        k_points = int(settings["k-points"]) if "k-points" in settings else None
        cat_a = int(settings.get("cat-a", "0"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kind = settings.get("initial", "localized")
    if kind not in ("localized", "cat"):
        raise UsageError(f"initial must be localized or cat, got {kind!r}")
    if cat_a < 0:
        raise UsageError("cat-a must be >= 0")
    spinor = parse_spinor(settings["coin-spinor"]) if "coin-spinor" in settings else PAPER_SPINOR
    initial = InitialStateSpec(InitialKind(kind), spinor, cat_a)
    return ExperimentConfig(
        theta=parse_angle(settings.get("theta", "pi/4")),
        steps=steps,
        initial=initial,
        k_points=k_points,
        evolution_method=settings.get("method", "recursion"),
        output_path=settings.get("output"),
        output_format=settings.get("format", "csv"),
        times=parse_int_list(settings["times"]) if "times" in settings else None,
        cat_values=parse_int_list(settings["cat-values"]) if "cat-values" in settings else None,
    )


# --- experiments -----------------------------------------------------------


def _suffixed(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def _initial_state(config: ExperimentConfig) -> WalkState:
    spec = config.initial
    return spec.build(spec.radius + config.steps + 1)


def _specs(config: ExperimentConfig) -> list[tuple[str | None, InitialStateSpec]]:
    if not config.cat_values:
        return [(None, config.initial)]
    return [
        (f"a{a}", InitialStateSpec(InitialKind.CAT, half_separation=a)) for a in config.cat_values
    ]


def _record_times(config: ExperimentConfig) -> list[int]:
    times = sorted(set(config.times)) if config.times else [config.steps]
    bad = [t for t in times if t < 0 or t > config.steps]
    if bad:
        raise UsageError(f"requested times {bad} outside 0..{config.steps}")
    return times


def run_simulate(config: ExperimentConfig) -> list[Path]:
    """Position distribution at the recorded times plus a sigma(t) summary."""
    coin = coin_matrix(config.theta)
    times = _record_times(config)
    state = _initial_state(config)
    dist, sig = [], []
    for t in range(config.steps + 1):
        if t:
            state = step(state, coin)
        if t in times:
            n, p = position_distribution(state)
            keep = p > 0
            dist.append(np.column_stack([np.full(keep.sum(), t), n[keep], p[keep]]))
            sig.append((t, position_sigma(state)))
    out = config.output("simulate")
    paths = [
        qio.write_field_rows(out, qio.DISTRIBUTION_COLUMNS, dist, config.output_format),
        qio.write_table(_suffixed(out, "sigma"), qio.SERIES_COLUMNS, sig, config.output_format),
    ]
    t_last, s_last = sig[-1]
    print(f"sigma({t_last}) = {s_last:.12g}")
    return paths


def _even_supported(state: WalkState) -> bool:
    sites = state.sites[(state.a != 0) | (state.b != 0)]
    return bool(np.all(sites % 2 == sites[0] % 2))


def run_wigner_field(config: ExperimentConfig, at_times: Sequence[int] | None = None) -> list[Path]:
    """
    One field file per requested time.

    The amplitude method streams FFT-evaluated rows straight to disk, so the
    full field is never held in memory.  Odd-n rows are omitted when the
    initial state has single-parity support (they are then identically zero).
    """
    if at_times is not None:
        config = replace(config, times=tuple(at_times))
    times = _record_times(config)
    coin = coin_matrix(config.theta)
    state = _initial_state(config)
    grid = PhaseSpaceGrid.for_state(state, config.k)
    even_only = _even_supported(state)
    out = config.output("wigner-field")
    paths = []
    wfield = wigner_from_state(state, grid) if config.evolution_method == "recursion" else None
    for t in range(config.steps + 1):
        if t:
            if wfield is not None:
                wfield = wigner_step(wfield, coin)
            else:
                state = step(state, coin)
        if t not in times:
            continue
        if wfield is not None:
            blocks = [(wfield.grid.n, wfield.values)]
            g = wfield.grid
        else:
            blocks = iter_wigner_rows(state, grid)
            g = grid
        rows = qio.field_row_blocks(t, g, blocks, even_only)
        paths.append(
            qio.write_field_rows(_suffixed(out, f"t{t}"), qio.FIELD_COLUMNS, rows, config.output_format)
        )
    return paths


def run_negativity_series(config: ExperimentConfig) -> list[Path]:
    coin = coin_matrix(config.theta)
    out = config.output("negativity")
    paths = []
    for tag, spec in _specs(config):
        ts, deltas = negativity_series(spec, coin, config.steps, config.k, config.evolution_method)
        path = _suffixed(out, tag) if tag else out
        paths.append(qio.write_table(path, qio.SERIES_COLUMNS, np.column_stack([ts, deltas]), config.output_format))
    return paths


def run_entropy_series(config: ExperimentConfig) -> list[Path]:
    coin = coin_matrix(config.theta)
    out = config.output("entropy")
    paths = []
    for tag, spec in _specs(config):
        state = spec.build(spec.radius + config.steps + 1)
        rows = []
        for t in range(config.steps + 1):
            if t:
                state = step(state, coin)
            rows.append((t, entanglement_entropy(state)))
        path = _suffixed(out, tag) if tag else out
        paths.append(qio.write_table(path, qio.SERIES_COLUMNS, rows, config.output_format))
    return paths


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation < self.tolerance)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<34} max deviation {self.deviation:.3e} (tol {self.tolerance:.0e})"


def verify_checks(config: ExperimentConfig, corrupt: bool = False) -> list[CheckResult]:
    """
    Cross-check both evolution routes and the marginal identities.

    ``corrupt`` perturbs the recursion field after the last step; it exists
    so tests can confirm that a broken field is reported.
    """
    if config.k % 4:
        raise UsageError("verify needs k-points divisible by 4")
    coin = coin_matrix(config.theta)
    state = _initial_state(config)
    grid = PhaseSpaceGrid.for_state(state, config.k)
    wfield = wigner_from_state(state, grid)
    _, m0 = momentum_matrix(wfield)
    pk0 = 0.5 * np.trace(m0, axis1=-2, axis2=-1).real

    worst = dict(norm=0.0, rec=0.0, herm=0.0, pk=0.0)
    for t in range(1, config.steps + 1):
        state = step(state, coin)
        wfield = wigner_step(wfield, coin)
        if corrupt and t == config.steps:
            wfield.values[wfield.grid.n_count // 2, 0, 0, 0] += 1e-6
        direct = wigner_from_state(state, wfield.grid)
        worst["norm"] = max(worst["norm"], abs(state.norm() - 1))
        worst["rec"] = max(worst["rec"], float(np.max(np.abs(direct.values - wfield.values))))
        worst["herm"] = max(worst["herm"], wfield.hermiticity_error())
        _, m = momentum_matrix(wfield)
        pk = 0.5 * np.trace(m, axis1=-2, axis2=-1).real
        worst["pk"] = max(worst["pk"], float(np.max(np.abs(pk - pk0))))

    final = wfield
    ref = wigner_from_state_reference(state, final.grid)
    fast_dev = float(np.max(np.abs(ref.values - wigner_from_state(state, final.grid).values)))

    n, marg = position_marginal(final)
    dens = np.einsum("na,nb->nab", state.spinors, np.conj(state.spinors))
    even = n % 2 == 0
    expect = np.zeros_like(marg)
    for i in np.flatnonzero(even):
        m_site = n[i] // 2
        if state.n_min <= m_site <= state.n_max:
            expect[i] = 2 * dens[m_site - state.n_min]
    even_dev = float(np.max(np.abs(marg[even] - expect[even]), initial=0.0))
    odd_dev = float(np.max(np.abs(marg[~even]), initial=0.0))

    k, mk = momentum_matrix(final)
    amp = momentum_amplitudes(state, k)
    mom_dev = float(np.max(np.abs(mk - 2 * np.einsum("ka,kb->kab", amp, np.conj(amp)))))

    K = final.grid.k_count
    parity = np.where(final.grid.n % 2 == 0, 1.0, -1.0)[:, None, None, None]
    shifted = np.roll(final.values, -K // 2, axis=1)
    par_dev = float(np.max(np.abs(shifted[:, : K // 2] - parity * final.values[:, : K // 2])))

    return [
        CheckResult("state norm", worst["norm"], 1e-10),
        CheckResult("recursion vs transform", worst["rec"], 1e-10),
        CheckResult("fft vs direct transform", fast_dev, 1e-10),
        CheckResult("hermiticity", worst["herm"], 1e-10),
        CheckResult("parity W(n,k+pi)=(-1)^n W(n,k)", par_dev, 1e-10),
        CheckResult("even-n position marginal", even_dev, 1e-9),
        CheckResult("odd-n position marginal", odd_dev, 1e-9),
        CheckResult("momentum matrix", mom_dev, 1e-9),
        CheckResult("P(k) drift", worst["pk"], 1e-9),
        CheckResult("normalization", abs(final.trace_normalization() - 1), 1e-9),
    ]


def run_verify(config: ExperimentConfig, corrupt: bool = False) -> int:
    """Print a pass/fail report; return the process exit status."""
    results = verify_checks(config, corrupt)
    print(
        f"verify: {config.initial.label()}, theta={config.theta:.12g}, "
        f"steps={config.steps}, K={config.k}"
    )
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


# --- entry point -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--theta", help="coin angle in radians, e.g. 0.785 or pi/4 (default pi/4)")
    p.add_argument("--steps", help="number of walk steps (default 0)")
    p.add_argument("--initial", choices=("localized", "cat"))
    p.add_argument("--cat-a", dest="cat_a", help="cat state half separation")
    p.add_argument("--coin-spinor", dest="coin_spinor", help="re_R,im_R,re_L,im_L for the localized state")
    p.add_argument("--k-points", dest="k_points", help="k-grid size (default max(512, 8(steps+1)))")
    p.add_argument("--method", choices=("amplitude", "recursion"))
    p.add_argument("--output", help="output file; per-time/per-a files get a suffix")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--times", help="comma-separated times to record")
    p.add_argument("--cat-values", dest="cat_values", help="comma-separated a values (0 = localized)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwigner", description="Wigner-function tools for the coined quantum walk.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "simulate": "position distribution and spread",
        "wigner-field": "export Wigner fields at chosen times",
        "negativity": "negativity time series",
        "entropy": "coin entanglement entropy time series",
        "verify": "cross-check evolution routes and marginal identities",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_shared(p)
        if name == "verify":
            p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def settings_from_args(args: argparse.Namespace) -> dict[str, str]:
    settings: dict[str, str] = {}
    if args.preset:
        command, values = PRESETS[args.preset]
        if command != args.command:
            raise UsageError(f"preset {args.preset} belongs to the {command!r} command")
        settings.update(values)
    if args.config:
        settings.update(read_config_file(args.config))
    for key in _KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = str(value)
    return settings


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        config = build_config(settings_from_args(args))
        if args.command == "simulate":
            paths = run_simulate(config)
        elif args.command == "wigner-field":
            paths = run_wigner_field(config)
        elif args.command == "negativity":
            paths = run_negativity_series(config)
        elif args.command == "entropy":
            paths = run_entropy_series(config)
        else:
            return run_verify(config, corrupt=args.inject_fault)
    except qio.OutputError as exc:
        print(f"qwigner: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"qwigner: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
