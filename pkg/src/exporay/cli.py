"""Command-line front end: tracing, scanning, rendering, experiments.

Subcommands: trace-ray, trace-param-ray, scan, render-dyn, render-param,
verify.  Every run resolves an effective RunConfig (dataclass defaults,
then --config JSON file, then explicit flags) and echoes it into a
.meta.json sidecar next to each artifact, so any output can be
reproduced from its own metadata.  Outputs are bit-for-bit deterministic
for fixed inputs and config: CSV is RFC-4180, JSON is sorted-key UTF-8,
PNG is 8-bit RGB with no timestamps.

Exit codes: 0 success (or experiment pass), 1 evaluation error,
2 experiment failure, 3 experiment inconclusive, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .address import ExternalAddress, enumerate_periodic, sort_lex
from .dynamics import OrbitOverflow
from .geometry import Rect
from .parallel import default_threads
from .parameter import (
    ContinuationStalled,
    HypothesisNotMet,
    PeriodMismatch,
    PolishDiverged,
    RaysNotFound,
    find_characteristic_rays,
    land_parameter_ray,
    scan_components,
    trace_parameter_ray,
)
from .rays import (
    DepthSaturated,
    NotConverged,
    RayBroken,
    RayEvalConfig,
    land_ray,
    ray_polyline,
)
from .render import render_dynamical, render_parameter, grid_image, save_png
from .verify import (
    PathCrossesRay,
    verify_holomorphic_motion,
    verify_theorem1,
    verify_theorem2,
    verify_wake_persistence,
)

USAGE_EXIT = 64
EVAL_EXIT = 1

_EVAL_ERRORS = (
    RayBroken,
    DepthSaturated,
    NotConverged,
    ContinuationStalled,
    PolishDiverged,
    PeriodMismatch,
    RaysNotFound,
    HypothesisNotMet,
    PathCrossesRay,
    OrbitOverflow,
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Effective run configuration: tolerances, budgets, output knobs.

    seed is reserved for experiments that subsample probes; it is part
    of the echoed configuration so reruns can reproduce such runs.
    """

    tol: float = 1e-9
    landing_tol: float = 1e-6
    corrector_tol: float = 1e-9
    max_depth: int = 50_000_000
    max_iter: int = 2000
    escape_iter: int = 120
    steps: int = 80
    out_dir: str = "."
    width: int = 800
    height: int = 600
    color_map: str = "default"
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        for name in ("tol", "landing_tol", "corrector_tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        for name in ("width", "height"):
            v = getattr(self, name)
            if not 1 <= v <= 16384:
                raise UsageError(f"{name} must be in [1, 16384]")
        for name in ("max_depth", "max_iter", "escape_iter", "steps"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1")

    def ray_cfg(self) -> RayEvalConfig:
        return RayEvalConfig(tol=self.tol, max_depth=self.max_depth)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["threads"] is None:
            out["threads"] = default_threads()
        return out


_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flag overrides."""
    values: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


# -- argument parsing ---------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Shell-safe complex literal: a+bi, a-bi, bi, or a (no spaces)."""
    cleaned = text.strip().replace("I", "i")
    try:
        return complex(cleaned.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def parse_address(text: str) -> ExternalAddress:
    try:
        return ExternalAddress.parse(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse address {text!r}: {exc}") from exc


def parse_rect(text: str) -> Rect:
    try:
        return Rect.parse(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse rect {text!r}: {exc}") from exc


def parse_t_range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"t range must be 'a:b', got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"cannot parse t range {text!r}") from exc
    return a, b


def parse_resolution(text: str) -> tuple:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            n = int(parts[0])
            return n, n
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise UsageError(f"resolution must be 'N' or 'NXxNY', got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys")
    common.add_argument("--threads", type=int, help="thread budget "
                        "(default: EXPORAY_THREADS or machine parallelism)")
    common.add_argument("--out-dir", dest="out_dir", help="artifact directory")
    common.add_argument("--tol", type=float, help="ray evaluation tolerance")
    common.add_argument("--landing-tol", dest="landing_tol", type=float)
    common.add_argument("--corrector-tol", dest="corrector_tol", type=float)
    common.add_argument("--max-depth", dest="max_depth", type=int)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--escape-iter", dest="escape_iter", type=int)
    common.add_argument("--steps", type=int, help="trace/overlay samples")
    common.add_argument("--width", type=int, help="image width (<= 16384)")
    common.add_argument("--height", type=int, help="image height (<= 16384)")
    common.add_argument("--color-map", dest="color_map")
    common.add_argument("--seed", type=int, help="probe-sampling seed")

    p = _Parser(prog="exporay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="command")

    tr = sub.add_parser("trace-ray", parents=[common],
                        help="dynamic ray polyline")
    tr.add_argument("--kappa", required=True)
    tr.add_argument("--address", required=True)
    tr.add_argument("--t", default="0.05:10", help="potential range lo:hi")
    tr.add_argument("--samples", type=int, default=None,
                    help="sample count (default: config steps)")
    tr.add_argument("--land", action="store_true",
                    help="append a landing record to the metadata")
    tr.add_argument("--out", default=None, help="output basename")

    tp = sub.add_parser("trace-param-ray", parents=[common], help="parameter ray continuation")
    tp.add_argument("--address", required=True)
    tp.add_argument("--t", default="30:0.001", help="potential walk start:end")
    tp.add_argument("--land", action="store_true",
                    help="polish the parabolic landing into the metadata")
    tp.add_argument("--out", default=None)

    sc = sub.add_parser("scan", parents=[common], help="hyperbolic component grid")
    sc.add_argument("--rect", required=True, help="re_min:re_max:im_min:im_max")
    sc.add_argument("--resolution", required=True, help="N or NXxNY")
    sc.add_argument("--max-period", type=int, default=32)
    sc.add_argument("--out", default=None)

    rd = sub.add_parser("render-dyn", parents=[common], help="escape shading with ray overlays")
    rd.add_argument("--kappa", required=True)
    rd.add_argument("--rect", required=True)
    rd.add_argument("--overlay", action="append", default=[],
                    help="address to draw (repeatable)")
    rd.add_argument("--t", default=None, help="overlay potential range lo:hi")
    rd.add_argument("--out", default=None)

    rp = sub.add_parser("render-param", parents=[common], help="component map with ray overlays")
    rp.add_argument("--rect", required=True)
    rp.add_argument("--overlay", action="append", default=[],
                    help="parameter-ray address to draw (repeatable)")
    rp.add_argument("--max-period", type=int, default=32)
    rp.add_argument("--out", default=None)

    vf = sub.add_parser("verify", parents=[common], help="run a landing experiment")
    vf.add_argument("experiment", help="thm1 | thm2 | motion | wake")
    vf.add_argument("--kappa", default=None)
    vf.add_argument("--max-period", type=int, default=2)
    vf.add_argument("--M", type=int, default=1)
    vf.add_argument("--n", type=int, default=2)
    vf.add_argument("--rect", default="-6:6:-10:10")
    vf.add_argument("--address", default="|0")
    vf.add_argument("--path", default=None, help="complex endpoints a:b")
    vf.add_argument("--path-steps", type=int, default=10)
    vf.add_argument("--sample", default=None,
                    help="parameter inside the component (wake)")
    vf.add_argument("--period", type=int, default=2)
    vf.add_argument("--probes", default=None,
                    help="comma-separated probe parameters (wake)")
    vf.add_argument("--out", default=None)
    return p


# -- artifact emission --------------------------------------------------------


def _outpath(cfg: RunConfig, base: str, suffix: str) -> Path:
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{base}{suffix}"


def _safe_name(s: ExternalAddress) -> str:
    return str(s).replace("|", "p").replace(",", "_").replace("-", "m")


def write_meta(path: Path, cfg: RunConfig, command: str, payload: dict) -> None:
    doc = {"command": command, "config": cfg.as_dict()}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_csv(path: Path, header: tuple, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


# -- subcommands --------------------------------------------------------------


def cmd_trace_ray(args, cfg: RunConfig) -> int:
    kappa = parse_complex(args.kappa)
    s = parse_address(args.address)
    t_lo, t_hi = parse_t_range(args.t)
    if not 0 < t_lo < t_hi:
        raise UsageError("need 0 < t_lo < t_hi")
    samples = args.samples if args.samples is not None else cfg.steps
    ray_cfg = cfg.ray_cfg()
    pts, broken = ray_polyline(kappa, s, t_lo, t_hi, samples=max(samples, 2),
                               cfg=ray_cfg, residual=True, on_broken="truncate")
    if not pts:
        print(f"ray evaluation produced no samples: {broken}", file=sys.stderr)
        return EVAL_EXIT
    base = args.out or f"dynray_{_safe_name(s)}"
    csv_path = _outpath(cfg, base, ".csv")
    ordered = sorted(pts, key=lambda p: p.t)
    write_csv(csv_path, ("t", "re", "im", "depth", "residual"),
              (p.as_row() for p in ordered))
    payload = {
        "kappa": [kappa.real, kappa.imag],
        "address": str(s),
        "t_range": [t_lo, t_hi],
        "samples": len(pts),
        "broken": None if broken is None else {
            "step": broken.step, "error": "RayBroken", "message": str(broken)},
        "outputs": [csv_path.name],
    }
    if args.land:
        est = land_ray(kappa, s, ray_cfg, landing_tol=cfg.landing_tol)
        payload["landing"] = {
            "limit": [est.limit.real, est.limit.imag],
            "matched_distance": est.matched_distance,
            "converged": est.converged,
            "orbit": est.orbit.as_dict(),
        }
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "trace-ray", payload)
    print(csv_path)
    return 0


def cmd_trace_param_ray(args, cfg: RunConfig) -> int:
    s = parse_address(args.address)
    t_start, t_end = parse_t_range(args.t)
    if t_end >= t_start:
        raise UsageError("parameter rays walk downward: need t_end < t_start")
    if t_end <= 0:
        raise UsageError("t_end must be positive")
    tr = trace_parameter_ray(s, t_start, t_end, steps=cfg.steps,
                             corrector_tol=cfg.corrector_tol, cfg=cfg.ray_cfg())
    base = args.out or f"paramray_{_safe_name(s)}"
    csv_path = _outpath(cfg, base, ".csv")
    write_csv(csv_path, ("t", "re", "im", "residual"), tr.as_rows())
    payload = {
        "address": str(s),
        "t_range": [t_start, t_end],
        "t_min_reached": tr.t_min_reached,
        "samples": len(tr.samples),
        "outputs": [csv_path.name],
    }
    if args.land:
        payload["landing"] = land_parameter_ray(tr).as_dict()
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "trace-param-ray",
               payload)
    print(csv_path)
    return 0


def cmd_scan(args, cfg: RunConfig) -> int:
    rect = parse_rect(args.rect)
    resolution = parse_resolution(args.resolution)
    grid = scan_components(rect, resolution, max_period=args.max_period,
                           max_iter=cfg.max_iter, threads=cfg.threads)
    base = args.out or "scan"
    csv_path = _outpath(cfg, base, ".csv")
    write_csv(csv_path, ("ix", "iy", "re", "im", "verdict", "period"),
              grid.as_csv_rows())
    png_path = _outpath(cfg, base, ".png")
    save_png(grid_image(grid), png_path)
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "scan", {
        "rect": [rect.re_min, rect.re_max, rect.im_min, rect.im_max],
        "resolution": list(resolution),
        "max_period": args.max_period,
        "counts": grid.counts(),
        "outputs": [csv_path.name, png_path.name],
    })
    print(csv_path)
    print(png_path)
    return 0


def cmd_render_dyn(args, cfg: RunConfig) -> int:
    kappa = parse_complex(args.kappa)
    rect = parse_rect(args.rect)
    overlays = [parse_address(a) for a in args.overlay]
    t_lo, t_hi = (0.05, None)
    if args.t is not None:
        t_lo, t_hi = parse_t_range(args.t)
        if not 0 < t_lo < t_hi:
            raise UsageError("need 0 < t_lo < t_hi")
    rgb, meta = render_dynamical(
        kappa, rect, (cfg.width, cfg.height), overlays=overlays,
        t_lo=t_lo, t_hi=t_hi, samples=cfg.steps, max_iter=cfg.escape_iter,
        cfg=cfg.ray_cfg(),
    )
    base = args.out or "dyn"
    png_path = _outpath(cfg, base, ".png")
    save_png(rgb, png_path)
    meta["outputs"] = [png_path.name]
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "render-dyn", meta)
    print(png_path)
    return 0


def cmd_render_param(args, cfg: RunConfig) -> int:
    rect = parse_rect(args.rect)
    overlays = [parse_address(a) for a in args.overlay]
    rgb, meta = render_parameter(
        rect, (cfg.width, cfg.height), overlays=overlays, steps=cfg.steps,
        max_period=args.max_period, max_iter=cfg.max_iter, threads=cfg.threads,
    )
    base = args.out or "param"
    png_path = _outpath(cfg, base, ".png")
    save_png(rgb, png_path)
    meta["outputs"] = [png_path.name]
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "render-param", meta)
    print(png_path)
    return 0


def _addresses_up_to(max_period: int, m: int) -> list:
    pool = set()
    for n in range(1, max_period + 1):
        pool.update(enumerate_periodic(n, m))
    return sort_lex(list(pool))


def cmd_verify(args, cfg: RunConfig) -> int:
    ray_cfg = cfg.ray_cfg()
    if args.experiment == "thm1":
        if args.kappa is None:
            raise UsageError("thm1 needs --kappa")
        rep = verify_theorem1(
            parse_complex(args.kappa),
            _addresses_up_to(args.max_period, args.M),
            cfg=ray_cfg, landing_tol=cfg.landing_tol, threads=cfg.threads,
        )
    elif args.experiment == "thm2":
        if args.kappa is None:
            raise UsageError("thm2 needs --kappa")
        rep = verify_theorem2(
            parse_complex(args.kappa), args.n, parse_rect(args.rect), args.M,
            cfg=ray_cfg, threads=cfg.threads,
        )
    elif args.experiment == "motion":
        if args.path is None:
            raise UsageError("motion needs --path=a:b")
        parts = args.path.split(":")
        if len(parts) != 2:
            raise UsageError("--path must be two complex endpoints a:b")
        a, b = parse_complex(parts[0]), parse_complex(parts[1])
        k = max(args.path_steps, 1)
        path = [a + (b - a) * i / (k - 1) for i in range(k)] if k > 1 else [a]
        rep = verify_holomorphic_motion(
            path, parse_address(args.address), cfg=ray_cfg,
            agree_tol=1e-8, threads=cfg.threads,
        )
    elif args.experiment == "wake":
        if args.sample is None:
            raise UsageError("wake needs --sample")
        sample = parse_complex(args.sample)
        wake = find_characteristic_rays(sample, args.period,
                                        threads=cfg.threads)
        if args.probes is not None:
            probes = [parse_complex(x) for x in args.probes.split(",")]
        else:
            root = wake.root.kappa
            probes = [root + (sample - root) * f
                      for f in (0.2, 0.4, 0.6, 0.8, 1.0)]
        rep = verify_wake_persistence(wake, probes, wake.char_addresses,
                                      cfg=ray_cfg, threads=cfg.threads)
    else:
        raise UsageError(f"unknown experiment {args.experiment!r}")

    base = args.out or f"verify_{args.experiment}"
    json_path = _outpath(cfg, base, ".json")
    json_path.write_text(rep.as_json() + "\n", encoding="utf-8")
    txt_path = _outpath(cfg, base, ".txt")
    txt_path.write_text(rep.text_summary() + "\n", encoding="utf-8")
    write_meta(_outpath(cfg, base, ".meta.json"), cfg, "verify", {
        "experiment": rep.experiment,
        "verdict": rep.verdict,
        "outputs": [json_path.name, txt_path.name],
    })
    print(rep.text_summary())
    return rep.exit_code()


_COMMANDS = {
    "trace-ray": cmd_trace_ray,
    "trace-param-ray": cmd_trace_param_ray,
    "scan": cmd_scan,
    "render-dyn": cmd_render_dyn,
    "render-param": cmd_render_param,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required "
                             f"(one of {', '.join(_COMMANDS)})")
        overrides = {k: getattr(args, k) for k in _CONFIG_KEYS
                     if hasattr(args, k)}
        cfg = load_config(args.config, overrides)
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except _EVAL_ERRORS as exc:
        print(f"evaluation error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EVAL_EXIT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
