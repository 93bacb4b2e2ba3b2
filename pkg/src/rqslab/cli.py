"""Command-line front end.

Subcommands::

    rqslab model two-state   closed-form vs numerical norm bound, two-level system
    rqslab model detector    same for the ideal-measurement model
    rqslab verify            inequality suite over a seeded random ensemble
    rqslab sweep             plot-ready curves over a log-spaced dt grid
    rqslab preclude          minimum-norm preclusion of post-measurement branches

Exit codes: 0 pass, 2 bound violated, 3 regime inapplicable, 4 invalid
physical parameter, 5 all branches precluded, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .dynamics import characteristic_time, delta_psi, energy_variance, second_moment_root
from .errors import NonPositiveKappa, OrthogonalOverlap, RQSLError
from .models import (
    DetectorModel,
    EnsembleSpec,
    TwoStateModel,
    detector_context,
    detector_exact_norm,
    detector_exact_state,
    detector_norm_limit,
    measurement_time,
    random_system,
    two_state_context,
    two_state_exact_norm,
    two_state_norm_limit,
)
from .preclusion import PartitionSpec, branch_decompose, preclude
from .rqsl import (
    QuadratureConfig,
    discrete_length,
    norm_limit,
    reference_section_length,
    verify_norm_inequality,
    verify_system,
)

EXIT_OK = 0
EXIT_VIOLATED = 2
EXIT_REGIME = 3
EXIT_INVALID_PARAM = 4
EXIT_ALL_PRECLUDED = 5
EXIT_USAGE = 64

DETECTOR_LABELS = ("S1⊗O1", "S1⊗O2", "S2⊗O1", "S2⊗O2")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    hbar: float = 1.0
    dt_min: float = 1e-3
    regime_fraction: float = 1e-2
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    output_format: str = "csv"
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if not self.hbar > 0:
            raise UsageError(f"--hbar must be positive, got {self.hbar!r}")
        if not self.dt_min > 0:
            raise UsageError(f"--dt-min must be positive, got {self.dt_min!r}")
        if not self.regime_fraction > 0:
            raise UsageError(f"--regime-fraction must be positive, got {self.regime_fraction!r}")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {self.output_format!r}")
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"--seed must be a 64-bit unsigned integer, got {self.seed!r}")


# -- output ------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan literals
        return format(value, ".17g") if math.isfinite(value) else json.dumps(str(value))
    return json.dumps(value, ensure_ascii=False)


def render(records: list[dict], fmt: str) -> str:
    """Serialize records as CSV (one header row) or a JSON array."""
    if fmt == "json":
        lines = []
        for rec in records:
            body = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in rec.items())
            lines.append("  {" + body + "}")
        return "[\n" + ",\n".join(lines) + "\n]\n" if lines else "[]\n"
    buf = io.StringIO()
    if records:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(records[0]))
        for rec in records:
            writer.writerow([_fmt(v) for v in rec.values()])
    return buf.getvalue()


def emit(records: list[dict], cfg: RunConfig) -> None:
    text = render(records, cfg.output_format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(**items) -> None:
    print(" ".join(f"{k}={_fmt(v)}" for k, v in items.items()), file=sys.stderr)


# -- argument parsing --------------------------------------------------------


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _add_global_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--hbar", type=float, default=argparse.SUPPRESS, help="reduced Planck constant (default 1)")
    g.add_argument("--dt-min", type=float, default=argparse.SUPPRESS, help="minimum time step (default 1e-3)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="ensemble seed (default 0)")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file; flags override it")
    g.add_argument("--output", default=argparse.SUPPRESS, help="write results here instead of stdout")
    g.add_argument("--format", dest="output_format", choices=("csv", "json"), default=argparse.SUPPRESS)
    g.add_argument("--regime-fraction", type=float, default=argparse.SUPPRESS)
    g.add_argument("--abs-tol", type=float, default=argparse.SUPPRESS, help="quadrature tolerance")
    g.add_argument("--max-depth", type=int, default=argparse.SUPPRESS)
    g.add_argument("--fd-step-fraction", type=float, default=argparse.SUPPRESS)


def _add_two_state_args(p):
    p.add_argument("--c1", type=_complex, default=argparse.SUPPRESS)
    p.add_argument("--c2", type=_complex, default=argparse.SUPPRESS)
    p.add_argument("--e1", type=float, default=argparse.SUPPRESS)
    p.add_argument("--e2", type=float, default=argparse.SUPPRESS)


def _add_detector_args(p):
    p.add_argument("--c1", type=_complex, default=argparse.SUPPRESS, help="defaults to sqrt(1 - |c2|^2)")
    p.add_argument("--c2", type=_complex, default=argparse.SUPPRESS)
    p.add_argument("--kappa", type=float, default=argparse.SUPPRESS)


DEFAULTS = {
    "hbar": 1.0,
    "dt_min": 1e-3,
    "seed": 0,
    "output": None,
    "output_format": "csv",
    "regime_fraction": 1e-2,
    "abs_tol": 1e-8,
    "max_depth": 40,
    "fd_step_fraction": 1e-6,
    "c1": None,
    "c2": None,
    "e1": 0.0,
    "e2": 1.0,
    "kappa": 1.0,
    "dim": 4,
    "count": 100,
    "energy_scale": 1.0,
    "t_fractions": "0.05,0.1,0.3,0.5",
    "dt_fraction": 1e-3,
    "model": "detector",
    "index": 0,
    "lo": 1e-5,
    "hi": 1e-1,
    "points": 25,
    "norm_min": 0.0,
    "renormalize": True,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rqslab", description="Reverse quantum speed limit and minimum-norm checks.")
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    model = sub.add_parser("model", help="closed-form example models")
    model_sub = model.add_subparsers(dest="model_name", parser_class=_Parser, required=True)
    ts = model_sub.add_parser("two-state", help="two-level superposition of energy eigenstates")
    _add_global_flags(ts)
    _add_two_state_args(ts)
    det = model_sub.add_parser("detector", help="ideal-measurement system/observer model")
    _add_global_flags(det)
    _add_detector_args(det)

    ver = sub.add_parser("verify", help="inequality suite over a seeded random ensemble")
    _add_global_flags(ver)
    ver.add_argument("--dim", type=int, default=argparse.SUPPRESS)
    ver.add_argument("--count", type=int, default=argparse.SUPPRESS)
    ver.add_argument("--energy-scale", type=float, default=argparse.SUPPRESS)
    ver.add_argument("--t-fractions", default=argparse.SUPPRESS, help="comma list of T / dt_char")
    ver.add_argument("--dt-fraction", type=float, default=argparse.SUPPRESS, help="norm-check step / dt_char")

    sw = sub.add_parser("sweep", help="norm and length curves over a log-spaced dt grid")
    _add_global_flags(sw)
    sw.add_argument("--model", choices=("two-state", "detector", "random"), default=argparse.SUPPRESS)
    sw.add_argument("--c1", type=_complex, default=argparse.SUPPRESS)
    sw.add_argument("--c2", type=_complex, default=argparse.SUPPRESS)
    sw.add_argument("--e1", type=float, default=argparse.SUPPRESS)
    sw.add_argument("--e2", type=float, default=argparse.SUPPRESS)
    sw.add_argument("--kappa", type=float, default=argparse.SUPPRESS)
    sw.add_argument("--dim", type=int, default=argparse.SUPPRESS)
    sw.add_argument("--index", type=int, default=argparse.SUPPRESS)
    sw.add_argument("--energy-scale", type=float, default=argparse.SUPPRESS)
    sw.add_argument("--lo", type=float, default=argparse.SUPPRESS, help="smallest dt / dt_char")
    sw.add_argument("--hi", type=float, default=argparse.SUPPRESS, help="largest dt / dt_char")
    sw.add_argument("--points", type=int, default=argparse.SUPPRESS)

    pr = sub.add_parser("preclude", help="preclude low-norm branches of the completed measurement")
    _add_global_flags(pr)
    _add_detector_args(pr)
    pr.add_argument("--norm-min", type=float, default=argparse.SUPPRESS)
    pr.add_argument("--no-renormalize", dest="renormalize", action="store_false", default=argparse.SUPPRESS)
    return parser


def resolve(ns: argparse.Namespace) -> tuple[dict, RunConfig]:
    """Merge defaults, config file and flags (later wins)."""
    opts = dict(DEFAULTS)
    flags = vars(ns)
    if "config" in flags:
        try:
            with open(flags["config"], encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {flags['config']!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        quad = loaded.pop("quadrature", {}) or {}
        loaded.update(quad)
        if "format" in loaded:
            loaded["output_format"] = loaded.pop("format")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in opts:
                raise UsageError(f"unknown config key {key!r}")
            opts[key] = value
    for key, value in flags.items():
        if key != "config":
            opts[key] = value
    for key in ("c1", "c2"):
        if isinstance(opts[key], str):
            opts[key] = _complex(opts[key])
    try:
        quad = QuadratureConfig(
            abs_tol=float(opts["abs_tol"]),
            max_depth=int(opts["max_depth"]),
            fd_step_fraction=float(opts["fd_step_fraction"]),
        )
    except RQSLError as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(
        hbar=float(opts["hbar"]),
        dt_min=float(opts["dt_min"]),
        regime_fraction=float(opts["regime_fraction"]),
        quadrature=quad,
        output_format=opts["output_format"],
        seed=int(opts["seed"]),
        output=opts["output"],
    )
    return opts, cfg


# -- commands ----------------------------------------------------------------


def _two_state_model(opts) -> TwoStateModel:
    c1 = opts["c1"] if opts["c1"] is not None else 1 / math.sqrt(2)
    c2 = opts["c2"] if opts["c2"] is not None else 1 / math.sqrt(2)
    # CLI inputs are decimal approximations; rescale onto the unit sphere
    return TwoStateModel.normalized(c1, c2, float(opts["e1"]), float(opts["e2"]))


def _detector_model(opts) -> DetectorModel:
    c2 = opts["c2"] if opts["c2"] is not None else 0.6
    if opts["c1"] is None:
        return DetectorModel.from_c2(c2, float(opts["kappa"]))
    norm = math.hypot(abs(opts["c1"]), abs(c2))
    if norm == 0:
        raise UsageError("c1 and c2 cannot both vanish")
    return DetectorModel(opts["c1"] / norm, c2 / norm, float(opts["kappa"]))


def _norm_verdict(report) -> int:
    if not report.regime_ok:
        return EXIT_REGIME
    return EXIT_OK if report.satisfied else EXIT_VIOLATED


def cmd_model_two_state(opts, cfg: RunConfig) -> int:
    m = _two_state_model(opts)
    ctx = two_state_context(m, cfg.hbar)
    rep = verify_norm_inequality(ctx, cfg.dt_min, regime_fraction=cfg.regime_fraction)
    lim = two_state_norm_limit(m, cfg.hbar, cfg.dt_min)
    exact = two_state_exact_norm(m, cfg.hbar, cfg.dt_min)
    code = _norm_verdict(rep)
    emit(
        [
            {
                "model": "two-state",
                "hbar": cfg.hbar,
                "dt_min": cfg.dt_min,
                "delta_h": rep.delta_h,
                "dt_char": characteristic_time(ctx),
                "norm_lim": lim,
                "norm_lim_numeric": rep.norm_lim,
                "exact_norm": exact,
                "exact_norm_numeric": rep.exact_norm,
                "hsu_estimate": rep.hsu_estimate,
                "ratio": exact / lim if lim > 0 else math.inf,
                "regime_ok": rep.regime_ok,
                "satisfied": rep.satisfied,
                "exit_code": code,
            }
        ],
        cfg,
    )
    return code


def cmd_model_detector(opts, cfg: RunConfig) -> int:
    m = _detector_model(opts)
    ctx = detector_context(m, cfg.hbar)
    rep = verify_norm_inequality(ctx, cfg.dt_min, regime_fraction=cfg.regime_fraction)
    lim = detector_norm_limit(m, cfg.hbar, cfg.dt_min)
    exact = detector_exact_norm(m, cfg.hbar, cfg.dt_min)
    try:
        t_meas = measurement_time(m, cfg.hbar)
        code = _norm_verdict(rep)
    except NonPositiveKappa as exc:
        print(f"rqslab: {exc}", file=sys.stderr)
        t_meas = math.nan
        code = EXIT_INVALID_PARAM
    if lim > 0:
        residual = abs(exact - lim) / lim
    else:
        residual = 0.0 if exact == 0 else math.inf
    emit(
        [
            {
                "model": "detector",
                "hbar": cfg.hbar,
                "dt_min": cfg.dt_min,
                "delta_h": rep.delta_h,
                "dt_char": characteristic_time(ctx),
                "t_meas": t_meas,
                "norm_lim": lim,
                "norm_lim_numeric": rep.norm_lim,
                "exact_norm": exact,
                "exact_norm_numeric": rep.exact_norm,
                "hsu_estimate": rep.hsu_estimate,
                "equality_residual": residual,
                "regime_ok": rep.regime_ok,
                "satisfied": rep.satisfied,
                "exit_code": code,
            }
        ],
        cfg,
    )
    return code


def _fractions(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        values = tuple(float(x) for x in text)
    else:
        try:
            values = tuple(float(x) for x in str(text).split(",") if x.strip())
        except ValueError:
            raise UsageError(f"bad --t-fractions {text!r}") from None
    if not values or any(not v > 0 for v in values):
        raise UsageError(f"--t-fractions must be positive numbers, got {text!r}")
    return values


def cmd_verify(opts, cfg: RunConfig) -> int:
    count, dim = int(opts["count"]), int(opts["dim"])
    if count < 1:
        raise UsageError(f"--count must be positive, got {count}")
    if not 2 <= dim <= 16:
        raise UsageError(f"--dim must lie in [2, 16], got {dim}")
    fractions = _fractions(opts["t_fractions"])
    spec = EnsembleSpec(dim=dim, seed=cfg.seed, count=count, energy_scale=float(opts["energy_scale"]))

    records = []
    for i in range(spec.count):
        ctx = random_system(spec, i, cfg.hbar)
        v = verify_system(ctx, t_fractions=fractions, dt_fraction=float(opts["dt_fraction"]), q=cfg.quadrature)
        rec = {"index": i, "dim": dim, "delta_h": v.delta_h, "dt_char": v.t_char}
        for frac, margin in zip(fractions, v.rqsl_margins):
            rec[f"rqsl_margin_{frac:g}"] = margin
        rec.update(
            {
                "rqsl_ok": v.rqsl_ok,
                "gap": v.gap,
                "gap_ok": v.gap_ok,
                "exact_norm": v.norm_exact,
                "norm_lim": v.norm_lim,
                "norm_ok": v.norm_ok,
                "hsu_estimate": v.hsu_estimate,
                "hsu_ok": v.hsu_ok,
                "identity_residual": v.identity_residual,
                "identity_ok": v.identity_ok,
                "status": v.status,
            }
        )
        records.append(rec)
    emit(records, cfg)

    statuses = [r["status"] for r in records]
    failed = statuses.count("fail")
    undefined = statuses.count("undefined")
    if failed:
        code = EXIT_VIOLATED
    elif undefined:
        code = EXIT_REGIME
    else:
        code = EXIT_OK
    _summary(samples=len(records), failed=failed, undefined=undefined, vacuous=statuses.count("vacuous"), exit=code)
    return code


def _sweep_context(opts, cfg):
    name = opts["model"]
    if name == "two-state":
        return two_state_context(_two_state_model(opts), cfg.hbar)
    if name == "detector":
        return detector_context(_detector_model(opts), cfg.hbar)
    spec = EnsembleSpec(dim=int(opts["dim"]), seed=cfg.seed, count=1, energy_scale=float(opts["energy_scale"]))
    return random_system(spec, int(opts["index"]), cfg.hbar)


def cmd_sweep(opts, cfg: RunConfig) -> int:
    lo, hi, points = float(opts["lo"]), float(opts["hi"]), int(opts["points"])
    if not (lo > 0 and hi > 0) or lo > hi:
        raise UsageError(f"empty dt grid: lo={lo!r}, hi={hi!r}")
    if points < 1:
        raise UsageError(f"--points must be positive, got {points}")
    ctx = _sweep_context(opts, cfg)
    t_char = characteristic_time(ctx)
    if not math.isfinite(t_char):
        print("rqslab: stationary system, no characteristic time to scale the grid", file=sys.stderr)
        return EXIT_REGIME
    dh = energy_variance(ctx)
    grid = np.geomspace(lo, hi, points) * t_char if points > 1 else np.array([lo * t_char])
    records = []
    for dt in grid:
        dt = float(dt)
        try:
            qlen = reference_section_length(ctx, dt, cfg.quadrature)
        except OrthogonalOverlap:
            qlen = math.nan
        records.append(
            {
                "dt": dt,
                "exact_norm": delta_psi(ctx, dt).norm(),
                "lower_bound": norm_limit(dh, dt, ctx.hbar),
                "discrete_length": discrete_length(ctx, dt),
                "quadrature_length": qlen,
            }
        )
    emit(records, cfg)
    _summary(model=opts["model"], dt_char=t_char, delta_h=dh, second_moment_root=second_moment_root(ctx))
    return EXIT_OK


def detector_partition() -> PartitionSpec:
    e = np.eye(4)
    return PartitionSpec.from_rays([("S1⊗O1", e[0]), ("S2⊗O2", e[3])], rest_label="rest")


def cmd_preclude(opts, cfg: RunConfig) -> int:
    m = _detector_model(opts)
    norm_min = float(opts["norm_min"])
    if not norm_min >= 0:
        raise UsageError(f"--norm-min must be >= 0, got {norm_min!r}")
    try:
        t_meas = measurement_time(m, cfg.hbar)
    except NonPositiveKappa as exc:
        print(f"rqslab: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAM
    state = detector_exact_state(m, cfg.hbar, t_meas)
    branches = branch_decompose(state, detector_partition())
    result = preclude(branches, norm_min, renormalize=bool(opts["renormalize"]))
    kept = set(result.report.kept_labels)

    records = [
        {"kind": "branch", "label": b.label, "norm": b.norm, "kept": b.label in kept, "re": math.nan, "im": math.nan}
        for b in branches
    ]
    if result.state is not None:
        for label, amp in zip(DETECTOR_LABELS, result.state.amps):
            records.append(
                {"kind": "amplitude", "label": label, "norm": abs(amp), "kept": True, "re": amp.real, "im": amp.imag}
            )
    emit(records, cfg)
    code = EXIT_ALL_PRECLUDED if result.report.all_precluded else EXIT_OK
    _summary(
        t_meas=t_meas,
        norm_min=norm_min,
        kept="|".join(result.report.kept_labels),
        survived_norm=result.report.survived_norm,
        all_precluded=result.report.all_precluded,
    )
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    command = "model " + ns.model_name if ns.command == "model" else ns.command
    handlers = {
        "model two-state": cmd_model_two_state,
        "model detector": cmd_model_detector,
        "verify": cmd_verify,
        "sweep": cmd_sweep,
        "preclude": cmd_preclude,
    }
    try:
        opts, cfg = resolve(ns)
        return handlers[command](opts, cfg)
    except UsageError as exc:
        print(f"rqslab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RQSLError as exc:
        print(f"rqslab: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAM


if __name__ == "__main__":
    sys.exit(main())
