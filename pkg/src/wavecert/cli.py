"""Config-driven command line: ``verify``, ``construct``, ``curvature``,
``rays``, and ``examples``.

A run configuration is flat key-value text with three section headers::

    [problem]
    A.diagonal = true
    A.entries = ["exp(x1 + x2)", "exp(x1 + x2)"]
    weight = "(x1^2 + x2^2)/2"        # verify only
    constants = {"mu1": 0.5}

    [region]
    dim = 2
    box = [[1, 3], [-1, 1]]
    constraints = ["(x1 - 2)^2 + x2^2 - 1"]
    margin = 0

    [options]
    resolution = 33
    lambda_max = 1048576
    target_margin = 0
    horizon = 20
    step = 0.01
    count = 32
    center = [0, 0]
    threads = 1
    force_j = 1

Values are JSON; full-line ``#`` comments are allowed; unknown keys are
errors.  Exit codes: 0 success or certified, 2 honest negative (not
certified / no admissible axis / budget exhausted), 3 configuration error,
4 numeric or domain error.
"""

import argparse
import csv
import os
import sys
import time

from . import __version__
from .bundled import EXAMPLES
from .coeff import CoefficientField, build
from .condition import ConditionReport, check_condition, weight_function
from .curvature import check_sign_change_window, classify_sign
from .domain import Region, region, sample
from .errors import (
    ConfigError,
    EvaluationError,
    LambdaMaxExceededError,
    RegionError,
    StepCollapseError,
    WavecertError,
    WeightOverflowError,
)
from .rays import fan
from .report import dumps_stable, fmt_float
from .weight import (
    AdmissibleIndex,
    WeightCertificate,
    compute_shift,
    detect_index,
    find_lambda,
    index_sign_ranges,
    pick_index,
)

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4

_PROBLEM_KEYS = {"A.diagonal", "A.entries", "weight", "constants"}
_REGION_KEYS = {"dim", "box", "constraints", "margin"}
_OPTION_KEYS = {
    "resolution",
    "lambda_max",
    "target_margin",
    "horizon",
    "step",
    "count",
    "center",
    "threads",
    "force_j",
}

_DEFAULT_OPTIONS = {
    "resolution": 33,
    "lambda_max": float(2**20),
    "target_margin": 0.0,
    "horizon": 20.0,
    "step": 0.01,
    "count": 32,
    "center": None,
    "threads": None,  # None means all cores
    "force_j": None,
}


# ---------------------------------------------------------------------------
# configuration


def parse_config_text(text: str) -> dict:
    """Parse section-headed key-value text into {section: {key: value}}.

    Every value is JSON.  Unknown sections or keys, duplicate keys, and
    malformed values are all reported as :class:`ConfigError` before any
    computation starts.
    """
    import json

    sections = {"problem": {}, "region": {}, "options": {}}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, _, value_text = line.partition("=")
        key = key.strip()
        allowed = {
            "problem": _PROBLEM_KEYS,
            "region": _REGION_KEYS,
            "options": _OPTION_KEYS,
        }[current]
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            sections[current][key] = json.loads(value_text.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad JSON value for {key!r}: {exc}") from None
    return sections


class RunConfig:
    """Validated problem + region + options, ready to execute."""

    def __init__(self, sections: dict):
        problem = dict(sections.get("problem", {}))
        reg = dict(sections.get("region", {}))
        options = dict(sections.get("options", {}))

        for key in problem:
            if key not in _PROBLEM_KEYS:
                raise ConfigError(f"unknown key {key!r} in [problem]")
        for key in reg:
            if key not in _REGION_KEYS:
                raise ConfigError(f"unknown key {key!r} in [region]")
        for key in options:
            if key not in _OPTION_KEYS:
                raise ConfigError(f"unknown key {key!r} in [options]")

        try:
            self.diagonal = bool(problem["A.diagonal"])
            self.entries = list(problem["A.entries"])
        except KeyError as exc:
            raise ConfigError(f"[problem] is missing {exc.args[0]!r}") from None
        if not self.entries or not all(isinstance(e, str) for e in self.entries):
            raise ConfigError("A.entries must be a nonempty list of expression strings")
        self.weight_text = problem.get("weight")
        if self.weight_text is not None and not isinstance(self.weight_text, str):
            raise ConfigError("weight must be an expression string")
        consts = problem.get("constants", {})
        if not isinstance(consts, dict):
            raise ConfigError("constants must be a table of name -> number")
        try:
            self.constants = {str(k): float(v) for k, v in consts.items()}
        except (TypeError, ValueError):
            raise ConfigError("constants must be a table of name -> number") from None

        try:
            self.dim = int(reg["dim"])
            box = reg["box"]
        except KeyError as exc:
            raise ConfigError(f"[region] is missing {exc.args[0]!r}") from None
        if (
            not isinstance(box, list)
            or len(box) != self.dim
            or not all(isinstance(b, list) and len(b) == 2 for b in box)
        ):
            raise ConfigError("box must be a list of [lo, hi] pairs, one per axis")
        self.box = [[float(lo), float(hi)] for lo, hi in box]
        raw_constraints = reg.get("constraints", [])
        if not isinstance(raw_constraints, list) or not all(
            isinstance(c, str) for c in raw_constraints
        ):
            raise ConfigError("constraints must be a list of expression strings")
        self.constraints = list(raw_constraints)
        self.margin = float(reg.get("margin", 0.0))

        self.options = dict(_DEFAULT_OPTIONS)
        for key, value in options.items():
            self.options[key] = value
        self.options["resolution"] = int(self.options["resolution"])
        self.options["lambda_max"] = float(self.options["lambda_max"])
        self.options["target_margin"] = float(self.options["target_margin"])
        self.options["horizon"] = float(self.options["horizon"])
        self.options["step"] = float(self.options["step"])
        self.options["count"] = int(self.options["count"])
        if self.options["center"] is not None:
            self.options["center"] = [float(v) for v in self.options["center"]]
        if self.options["threads"] is not None:
            self.options["threads"] = int(self.options["threads"])
        if self.options["force_j"] is not None:
            self.options["force_j"] = int(self.options["force_j"])

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(parse_config_text(text))

    @classmethod
    def from_dict(cls, sections: dict) -> "RunConfig":
        return cls(sections)

    def build_field(self) -> CoefficientField:
        try:
            field = build(self.entries, self.diagonal)
        except (WavecertError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad coefficient entries: {exc}") from exc
        if field.dim != self.dim:
            raise ConfigError(
                f"A.entries imply dimension {field.dim}, region has dim {self.dim}"
            )
        return field

    def build_region(self) -> Region:
        try:
            return region(self.dim, self.box, self.constraints, self.margin)
        except WavecertError as exc:
            raise ConfigError(f"bad region: {exc}") from exc

    def build_weight(self):
        if self.weight_text is None:
            raise ConfigError("this command needs a weight expression in [problem]")
        try:
            return weight_function(self.weight_text, self.dim)
        except WavecertError as exc:
            raise ConfigError(f"bad weight expression: {exc}") from exc

    def threads(self) -> int:
        t = self.options["threads"]
        return int(t) if t is not None else (os.cpu_count() or 1)

    def center(self):
        if self.options["center"] is not None:
            if len(self.options["center"]) != self.dim:
                raise ConfigError("center dimension does not match the region")
            return self.options["center"]
        return [0.5 * (lo + hi) for lo, hi in self.box]

    def echo(self) -> dict:
        options = dict(self.options)
        options["center"] = self.center()
        options["threads"] = self.threads()
        problem = {
            "A.diagonal": self.diagonal,
            "A.entries": list(self.entries),
            "constants": dict(self.constants),
        }
        if self.weight_text is not None:
            problem["weight"] = self.weight_text
        return {
            "problem": problem,
            "region": {
                "dim": self.dim,
                "box": [list(b) for b in self.box],
                "constraints": list(self.constraints),
                "margin": self.margin,
            },
            "options": options,
        }


# ---------------------------------------------------------------------------
# report dictionaries


def _point(p):
    return None if p is None else [float(v) for v in p]


def condition_report_dict(rep: ConditionReport) -> dict:
    out = {
        "verdict": rep.verdict,
        "alpha_min": rep.alpha_min,
        "worst_point_alpha": _point(rep.worst_point_alpha),
        "margin": rep.margin,
        "matrix_min_eig": rep.matrix_min_eig,
        "grad_min": rep.grad_min,
        "worst_point_margin": _point(rep.worst_point_margin),
        "worst_point_grad": _point(rep.worst_point_grad),
        "minors_min": None if rep.minors_min is None else list(rep.minors_min),
        "resolution": rep.resolution,
        "point_count": rep.point_count,
    }
    if rep.dump_path is not None:
        out["dump_path"] = rep.dump_path
    return out


def certificate_dict(cert: WeightCertificate) -> dict:
    from .expr import render

    return {
        "axis": cert.axis,
        "sign_case": cert.sign_case,
        "shift": cert.shift,
        "lambda": cert.lam,
        "margin": cert.report.margin,
        "sign_margin": cert.sign_margin,
        "weight": render(cert.weight.expression),
        "report": condition_report_dict(cert.report),
        "refinement": None
        if cert.refinement_report is None
        else condition_report_dict(cert.refinement_report),
    }


def _sign_ranges_list(ranges: dict) -> list:
    return [
        {"axis": j, "entry": i, "min": lo, "max": hi}
        for (j, i), (lo, hi) in sorted(ranges.items())
    ]


def ray_summary_dict(outcomes) -> dict:
    escaped = [o for o in outcomes if o.escaped]
    summary = {
        "count": len(outcomes),
        "escaped": len(escaped),
        "trapped_until_horizon": len(outcomes) - len(escaped),
        "max_drift": max((o.hamiltonian_drift for o in outcomes), default=0.0),
        "rays": [
            {
                "index": idx,
                "outcome": o.label,
                "escape_time": o.escape_time
                if o.escaped
                else "trapped_until_horizon",
                "min_boundary_distance": o.min_boundary_distance,
                "drift": o.hamiltonian_drift,
                "step": o.step_used,
            }
            for idx, o in enumerate(outcomes)
        ],
    }
    if escaped:
        times = [o.escape_time for o in escaped]
        summary["escape_time_min"] = min(times)
        summary["escape_time_max"] = max(times)
    return summary


# ---------------------------------------------------------------------------
# commands (each returns exit_code, verdict, result dict)


def run_verify(cfg: RunConfig, dump_path=None):
    field = cfg.build_field()
    reg = cfg.build_region()
    weight = cfg.build_weight()
    rep = check_condition(
        field,
        weight,
        reg,
        cfg.options["resolution"],
        consts=cfg.constants,
        threads=cfg.threads(),
        dump_path=dump_path,
    )
    code = EXIT_OK if rep.certified else EXIT_NOT_CERTIFIED
    return code, rep.verdict, condition_report_dict(rep)


def run_construct(cfg: RunConfig, dump_path=None):
    field = cfg.build_field()
    if not field.diagonal:
        raise ConfigError("construct requires diagonal coefficients")
    reg = cfg.build_region()
    resolution = cfg.options["resolution"]
    grid = sample(reg, resolution, cfg.constants)
    candidates = detect_index(field, grid, cfg.constants)
    force_axis = cfg.options["force_j"]
    chosen = pick_index(candidates, force_axis=force_axis)
    if chosen is None and force_axis is not None:
        # a forced axis runs even when its partials straddle zero; the sign
        # case follows the dominant side of the measured ranges
        if not 1 <= force_axis <= field.dim:
            raise ConfigError(f"force_j={force_axis} out of range for dimension {field.dim}")
        ranges = index_sign_ranges(field, grid, cfg.constants)
        lows = [ranges[(force_axis, i)][0] for i in range(1, field.dim + 1) if i != force_axis]
        highs = [ranges[(force_axis, i)][1] for i in range(1, field.dim + 1) if i != force_axis]
        sign_case = "positive" if min(lows) >= -max(highs) else "negative"
        chosen = AdmissibleIndex(force_axis, sign_case, min(lows))
    if chosen is None:
        ranges = index_sign_ranges(field, grid, cfg.constants)
        result = {
            "sign_ranges": _sign_ranges_list(ranges),
            "candidates": [
                {"axis": c.axis, "sign_case": c.sign_case, "sign_margin": c.sign_margin}
                for c in candidates
            ],
        }
        return EXIT_NOT_CERTIFIED, "no_admissible_index", result

    shift = compute_shift(grid, chosen.axis, chosen.sign_case)
    try:
        cert = find_lambda(
            field,
            reg,
            chosen.axis,
            chosen.sign_case,
            shift=shift,
            lambda_max=cfg.options["lambda_max"],
            target_margin=cfg.options["target_margin"],
            resolution=resolution,
            consts=cfg.constants,
            threads=cfg.threads(),
        )
    except LambdaMaxExceededError as exc:
        result = {
            "axis": chosen.axis,
            "sign_case": chosen.sign_case,
            "shift": shift,
            "lambda_max": cfg.options["lambda_max"],
            "best_lambda": exc.best_lambda,
            "best_report": None
            if exc.best_report is None
            else condition_report_dict(exc.best_report),
        }
        return EXIT_NOT_CERTIFIED, "lambda_max_exceeded", result
    if dump_path is not None:
        check_condition(
            field,
            cert.weight,
            reg,
            resolution,
            consts=cfg.constants,
            threads=cfg.threads(),
            dump_path=dump_path,
        )
    return EXIT_OK, "certified", certificate_dict(cert)


def run_curvature(cfg: RunConfig, dump_path=None):
    if cfg.dim != 2:
        raise ConfigError("curvature comparison is two-dimensional")
    if not cfg.diagonal or len(cfg.entries) != 2:
        raise ConfigError("curvature needs two diagonal coefficient entries")
    reg = cfg.build_region()
    rep = classify_sign(
        cfg.entries[0],
        cfg.entries[1],
        reg,
        cfg.options["resolution"],
        cfg.constants,
        dump_path=dump_path,
    )
    result = {
        "classification": rep.classification,
        "k_min": rep.k_min,
        "k_max": rep.k_max,
        "witness_positive": _point(rep.witness_positive),
        "witness_negative": _point(rep.witness_negative),
        "resolution": rep.resolution,
        "point_count": rep.point_count,
    }
    if "mu1" in cfg.constants and "mu2" in cfg.constants:
        window = check_sign_change_window(cfg.constants["mu1"], cfg.constants["mu2"])
        result["parameter_window"] = {
            "ok": window.ok,
            "mu1_positive": window.mu1_positive,
            "mu2_positive": window.mu2_positive,
            "sum_below_two": window.sum_below_two,
            "weighted_above_two": window.weighted_above_two,
        }
    return EXIT_OK, rep.classification, result


def run_rays(cfg: RunConfig, dump_path=None):
    field = cfg.build_field()
    reg = cfg.build_region()
    outcomes = fan(
        field,
        reg,
        cfg.center(),
        cfg.options["count"],
        cfg.options["horizon"],
        cfg.options["step"],
        consts=cfg.constants,
        store_paths=dump_path is not None,
    )
    if dump_path is not None:
        with open(dump_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["ray", "t_index"] + [f"x{k}" for k in range(1, cfg.dim + 1)])
            for idx, out in enumerate(outcomes):
                if out.path is None:
                    continue
                for t_index, row in enumerate(out.path):
                    writer.writerow(
                        [idx, t_index] + [format(v, ".17g") for v in row]
                    )
    summary = ray_summary_dict(outcomes)
    return EXIT_OK, "traced", summary


def run_example(name: str, overrides):
    entry = EXAMPLES[name]
    sections = {k: dict(v) for k, v in entry["config"].items()}
    options = dict(sections.get("options", {}))
    options.update(overrides)
    sections["options"] = options
    cfg = RunConfig.from_dict(sections)
    command = entry["command"]
    if command == "construct":
        _, verdict, result = run_construct(cfg)
    elif command == "curvature":
        _, verdict, result = run_curvature(cfg)
    elif command == "construct+rays":
        _, verdict, construct_result = run_construct(cfg)
        _, _, rays_result = run_rays(cfg)
        result = {"construct": construct_result, "rays": rays_result}
    else:
        raise ConfigError(f"bundled example {name!r} has unknown command {command!r}")
    matched = verdict == entry["expect"]
    return {
        "description": entry["description"],
        "command": command,
        "config": cfg.echo(),
        "expect": entry["expect"],
        "verdict": verdict,
        "matched": matched,
        "result": result,
    }


def run_examples(name: str, overrides):
    names = list(EXAMPLES) if name == "all" else [name]
    unknown = [n for n in names if n not in EXAMPLES]
    if unknown:
        raise ConfigError(
            f"unknown example {unknown[0]!r}; available: {', '.join(sorted(EXAMPLES))}"
        )
    results = {n: run_example(n, overrides) for n in names}
    all_matched = all(r["matched"] for r in results.values())
    verdict = "all_matched" if all_matched else "mismatch"
    code = EXIT_OK if all_matched else EXIT_NOT_CERTIFIED
    return code, verdict, {"examples": results}


# ---------------------------------------------------------------------------
# entry point


def _print_human(report: dict, stream):
    verdict = report.get("verdict")
    print(f"wavecert {report['command']}: {verdict}", file=stream)
    result = report.get("result", {})
    if isinstance(result, dict):
        for key in ("margin", "grad_min", "alpha_min", "lambda", "shift", "axis",
                    "sign_case", "classification", "k_min", "k_max", "escaped",
                    "trapped_until_horizon"):
            if key in result and not isinstance(result[key], (dict, list)):
                value = result[key]
                if isinstance(value, float):
                    value = fmt_float(value)
                print(f"  {key}: {value}", file=stream)
        if "examples" in result:
            for name, entry in result["examples"].items():
                status = "ok" if entry["matched"] else "MISMATCH"
                print(
                    f"  {name}: expected {entry['expect']}, got {entry['verdict']} [{status}]",
                    file=stream,
                )
    print(f"  duration_seconds: {report['duration_seconds']:.3f}", file=stream)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecert",
        description="grid certification and construction of wave-equation multiplier weights",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to a run configuration")
        p.add_argument("--resolution", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--dump-grid", default=None, help="write per-point CSV here")
        p.add_argument("--json", default=None, help="write the machine report here")

    p_verify = sub.add_parser("verify", help="certify a given weight")
    common(p_verify)

    p_construct = sub.add_parser("construct", help="build and certify an exponential weight")
    common(p_construct)
    p_construct.add_argument("--force-j", type=int, default=None)
    p_construct.add_argument("--lambda-max", type=float, default=None)
    p_construct.add_argument("--target-margin", type=float, default=None)

    p_curv = sub.add_parser("curvature", help="classify the curvature sign")
    common(p_curv)

    p_rays = sub.add_parser("rays", help="trace a bicharacteristic fan")
    common(p_rays)
    p_rays.add_argument("--center", default=None, help="comma-separated start point")
    p_rays.add_argument("--count", type=int, default=None)
    p_rays.add_argument("--horizon", type=float, default=None)
    p_rays.add_argument("--step", type=float, default=None)

    p_examples = sub.add_parser("examples", help="run bundled reference problems")
    p_examples.add_argument("name", help="example name or 'all'")
    p_examples.add_argument("--resolution", type=int, default=None)
    p_examples.add_argument("--threads", type=int, default=None)
    p_examples.add_argument("--json", default=None)
    return parser


def _collect_overrides(args) -> dict:
    overrides = {}
    if getattr(args, "resolution", None) is not None:
        overrides["resolution"] = args.resolution
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    if getattr(args, "force_j", None) is not None:
        overrides["force_j"] = args.force_j
    if getattr(args, "lambda_max", None) is not None:
        overrides["lambda_max"] = args.lambda_max
    if getattr(args, "target_margin", None) is not None:
        overrides["target_margin"] = args.target_margin
    if getattr(args, "count", None) is not None:
        overrides["count"] = args.count
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    if getattr(args, "step", None) is not None:
        overrides["step"] = args.step
    if getattr(args, "center", None) is not None:
        overrides["center"] = [float(v) for v in str(args.center).split(",")]
    return overrides


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        overrides = _collect_overrides(args)
        if args.command == "examples":
            code, verdict, result = run_examples(args.name, overrides)
            echo = {"examples": sorted(result["examples"])}
        else:
            with open(args.config, "r", encoding="utf-8") as handle:
                sections = parse_config_text(handle.read())
            options = dict(sections.get("options", {}))
            options.update(overrides)
            sections["options"] = options
            cfg = RunConfig.from_dict(sections)
            runner = {
                "verify": run_verify,
                "construct": run_construct,
                "curvature": run_curvature,
                "rays": run_rays,
            }[args.command]
            code, verdict, result = runner(cfg, dump_path=args.dump_grid)
            echo = cfg.echo()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegionError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, WeightOverflowError, StepCollapseError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    report = {
        "command": args.command,
        "config": echo,
        "result": result,
        "verdict": verdict,
        "tool": {"name": "wavecert", "version": __version__},
        "duration_seconds": time.perf_counter() - started,
    }
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            handle.write(dumps_stable(report))
    _print_human(report, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
