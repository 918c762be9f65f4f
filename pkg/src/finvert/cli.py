"""Command line: certify maps, invert targets, tabulate radii, dump profiles.

Exit codes: 0 success/certified, 1 usage error, 2 refuted,
3 inconclusive (including a lift that stalls before reaching its target).

Options may come from ``--config FILE`` (flat ``key=value`` lines, ``#``
comments); explicit command-line flags override the file.  A seed is
mandatory so every run is reproducible; with ``--no-timestamp`` the
written artifacts are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    Certificate,
    ball_inclusion_certificate,
    combine_certificates,
    domain_radius,
    jf_regular_check,
    radial_profile,
    weighted_covering_check,
)
from .invert import LiftFailure, LiftTrace, NonConvergence, global_invert
from .norms import derive_seed, parse_norm
from .pseudojac import MapUnderStudy
from .registry import RegistryEntry, available_names, lookup
from .report import (
    render_profile_figure,
    render_radius_figure,
    render_trace_figure,
    write_json,
    write_profile_csv,
    write_radius_csv,
    write_trace_csv,
)

__all__ = ["main", "build_parser", "UsageError"]

_EXIT = {CERTIFIED: 0, REFUTED: 2, INCONCLUSIVE: 3}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we standardize on 1
        raise UsageError(message)


_CONFIG_KEYS = (
    "map",
    "x0",
    "target",
    "norm",
    "norm_out",
    "seed",
    "weight",
    "out",
    "no_timestamp",
    "r",
    "rho_max",
    "rho_steps",
    "per_shell",
    "tol",
    "trust",
    "path_mode",
)

_DEFAULTS = {
    "out": "finvert-out",
    "rho_max": "2.0",
    "rho_steps": "8",
    "per_shell": "4",
    "tol": "1e-8",
    "trust": "1.0",
    "path_mode": "auto",
    "no_timestamp": False,
}


def build_parser() -> _Parser:
    parser = _Parser(
        prog="finvert",
        description="Certify invertibility of locally Lipschitz maps and "
        "solve for inverses by path lifting.",
    )
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value option file")
    common.add_argument("--map", help="registry map name, e.g. sin-perturbed-identity")
    common.add_argument("--x0", help="base point, comma-separated floats (default: origin)")
    common.add_argument("--norm", help="domain norm, e.g. l2, linf, lp:3, wlp:1,2:2, poly:...")
    common.add_argument("--norm-out", dest="norm_out", help="codomain norm (defaults to --norm when dimensions match)")
    common.add_argument("--seed", help="RNG seed (required; every run is reproducible)")
    common.add_argument("--weight", help="registry weight name, e.g. weight:const:2")
    common.add_argument("--out", help="output directory (default: finvert-out)")
    common.add_argument(
        "--no-timestamp",
        dest="no_timestamp",
        action="store_true",
        default=None,
        help="omit timestamps so artifacts are byte-identical across runs",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_cert = sub.add_parser(
        "certify",
        parents=[common],
        help="hull regularity at x0 plus a radial rate profile; optional "
        "weighted covering and ball-inclusion parts",
    )
    p_cert.add_argument("--r", help="also certify inclusion of a target ball for this source radius")
    p_cert.add_argument("--rho-max", dest="rho_max", help="largest profile radius (default 2.0)")
    p_cert.add_argument("--rho-steps", dest="rho_steps", help="number of profile shells (default 8)")
    p_cert.add_argument("--per-shell", dest="per_shell", help="interior samples per shell (default 4)")

    p_inv = sub.add_parser(
        "invert", parents=[common], help="solve f(x) = target by path lifting"
    )
    p_inv.add_argument("--target", help="target point, comma-separated floats")
    p_inv.add_argument("--tol", help="final residual tolerance (default 1e-8)")
    p_inv.add_argument("--trust", help="Newton trust radius per step (default 1.0)")
    p_inv.add_argument(
        "--path",
        dest="path_mode",
        choices=["auto", "straight"],
        help="auto uses a registry path when one exists; straight forces the segment",
    )

    p_rad = sub.add_parser(
        "radius",
        parents=[common],
        help="guaranteed target radius and ball certificate for each source radius",
    )
    p_rad.add_argument("--r", help="comma-separated source radii, e.g. 1,5,20")
    p_rad.add_argument("--rho-steps", dest="rho_steps", help="profile shells out to max radius (default 12)")
    p_rad.add_argument("--per-shell", dest="per_shell", help="interior samples per shell (default 4)")

    p_prof = sub.add_parser(
        "profile", parents=[common], help="write the radial rate profile only"
    )
    p_prof.add_argument("--rho-max", dest="rho_max", help="largest profile radius (default 2.0)")
    p_prof.add_argument("--rho-steps", dest="rho_steps", help="number of profile shells (default 8)")
    p_prof.add_argument("--per-shell", dest="per_shell", help="interior samples per shell (default 4)")
    return parser


def _read_config(path: str) -> dict:
    if not os.path.exists(path):
        raise UsageError(f"config file {path!r} does not exist")
    out = {}
    with open(path) as handle:
        for ln, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise UsageError(
                    f"{path}:{ln}: unknown option {key!r} (known: {', '.join(_CONFIG_KEYS)})"
                )
            out[key] = value.strip()
    return out


def _merge(args: argparse.Namespace) -> dict:
    file_cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    cfg = dict(_DEFAULTS)
    cfg.update(file_cfg)
    for key in _CONFIG_KEYS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            cfg[key] = cli_val
    if isinstance(cfg.get("no_timestamp"), str):
        cfg["no_timestamp"] = cfg["no_timestamp"].lower() in ("1", "true", "yes")
    if cfg.get("seed") in (None, ""):
        raise UsageError(
            "a seed is required for reproducible runs (--seed N or seed=N in the config)"
        )
    try:
        cfg["seed"] = int(cfg["seed"])
    except ValueError:
        raise UsageError(f"seed must be an integer, got {cfg['seed']!r}")
    return cfg


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}")


def _float(cfg: dict, key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError:
        raise UsageError(f"{key} must be a number, got {cfg[key]!r}")


def _int(cfg: dict, key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError:
        raise UsageError(f"{key} must be an integer, got {cfg[key]!r}")


def _load_map(cfg: dict) -> tuple[MapUnderStudy, RegistryEntry]:
    name = cfg.get("map")
    if not name:
        raise UsageError("--map is required (or map= in the config file)")
    try:
        entry = lookup(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    except ValueError as exc:
        raise UsageError(str(exc))
    if entry.kind != "map":
        raise UsageError(f"{name!r} is a {entry.kind}, not a map")
    f = entry.obj
    if not isinstance(f, MapUnderStudy):
        raise UsageError(
            f"{name!r} is a point map between manifolds; study it through a "
            "chart representative with the library API"
        )
    try:
        if cfg.get("norm"):
            norm_in = parse_norm(cfg["norm"], f.dim_in)
            if cfg.get("norm_out"):
                norm_out = parse_norm(cfg["norm_out"], f.dim_out)
            elif f.dim_in == f.dim_out:
                norm_out = parse_norm(cfg["norm"], f.dim_out)
            else:
                norm_out = f.norm_out
            f = f.with_norms(norm_in, norm_out)
        elif cfg.get("norm_out"):
            f = f.with_norms(f.norm_in, parse_norm(cfg["norm_out"], f.dim_out))
    except ValueError as exc:
        raise UsageError(str(exc))
    return f, entry


def _parse_x0(cfg: dict, f: MapUnderStudy) -> np.ndarray:
    if not cfg.get("x0"):
        return np.zeros(f.dim_in)
    vals = _floats(cfg["x0"], "--x0")
    if len(vals) != f.dim_in:
        raise UsageError(
            f"--x0 has {len(vals)} components but {f.name!r} expects {f.dim_in}"
        )
    return np.asarray(vals)


def _load_weight(cfg: dict):
    name = cfg.get("weight")
    if not name:
        return None
    try:
        entry = lookup(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    except ValueError as exc:
        raise UsageError(str(exc))
    if entry.kind != "weight":
        raise UsageError(f"{name!r} is a {entry.kind}, not a weight")
    return entry.obj


def _stamp(cert: Certificate, cfg: dict) -> None:
    if not cfg["no_timestamp"]:
        cert.timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()


def _rho_schedule(cfg: dict, smallest_fraction: float = 1.0) -> list[float]:
    rho_max = _float(cfg, "rho_max")
    steps = _int(cfg, "rho_steps")
    if rho_max <= 0 or steps < 1:
        raise UsageError("rho_max must be positive and rho_steps >= 1")
    return list(np.linspace(rho_max / steps, rho_max, steps))


def cmd_certify(cfg: dict) -> int:
    f, entry = _load_map(cfg)
    seed = cfg["seed"]
    chart_view = False
    if f.dim_in != f.dim_out:
        model = entry.extras.get("local_model")
        if model is None:
            raise UsageError(
                f"{f.name!r} maps R^{f.dim_in} to R^{f.dim_out}; certification "
                "needs matching dimensions (or a registry chart view)"
            )
        f, chart_view = model, True
    x0 = _parse_x0(cfg, f)
    weight = _load_weight(cfg)

    jf = jf_regular_check(f, x0, seed=derive_seed(seed, 1))
    schedule = _rho_schedule(cfg)
    rows = radial_profile(
        f, x0, schedule, per_shell_count=_int(cfg, "per_shell"),
        seed=derive_seed(seed, 2),
    )
    profile_min = rows[-1]["inf_index"]
    profile_part = Certificate(
        operation="radial_profile",
        verdict=CERTIFIED if profile_min > 0.0 else REFUTED,
        theorem_tags=["Cor 6.7"],
        numbers={"profile_min": profile_min, "rho_max": schedule[-1]},
        witnesses={} if profile_min > 0.0 else {"witness": rows[-1]["witness"]},
        hypotheses_checked=[
            "sampled rate infimum stays positive out to the largest radius"
        ],
        provenance={"seed": seed, "rho_schedule": schedule},
    )
    parts = [jf, profile_part]
    if weight is not None:
        parts.append(
            weighted_covering_check(
                f, x0, weight, schedule, seed=derive_seed(seed, 3),
                profile_rows=rows,
            )
        )
    if cfg.get("r"):
        r = _float(cfg, "r")
        reuse = rows if schedule[-1] >= r else None
        parts.append(
            ball_inclusion_certificate(
                f, x0, r, seed=derive_seed(seed, 4), profile_rows=reuse,
            )
        )

    tags = None
    if jf.verdict == CERTIFIED and profile_part.verdict == CERTIFIED:
        tags = ["Thm 6.1", "Cor 6.7"]
        if weight is not None and parts[2].verdict == CERTIFIED:
            tags += ["Thm 6.3", "Cor 6.5"]
        if cfg.get("r"):
            tags += ["Rem 6.6"]
    cert = combine_certificates("certify", parts, tags=tags)
    cert.provenance.update(
        {
            "map": entry.name,
            "chart_view": chart_view,
            "x0": [float(v) for v in x0],
            "seed": seed,
            "norm_in": f.norm_in.config_string(),
            "norm_out": f.norm_out.config_string(),
        }
    )
    _stamp(cert, cfg)

    out = cfg["out"]
    write_json(
        os.path.join(out, "certificate.json"),
        cert.to_json_dict(include_timestamp=not cfg["no_timestamp"]),
    )
    write_profile_csv(os.path.join(out, "profile.csv"), rows)
    render_profile_figure(
        rows, os.path.join(out, "profile.png"),
        title=f"{entry.name}: rate profile",
    )
    print(f"certify {entry.name}: {cert.verdict}")
    print(f"wrote {out}/certificate.json, {out}/profile.csv, {out}/profile.png")
    return _EXIT[cert.verdict]


def _parse_target(cfg: dict, f: MapUnderStudy, entry: RegistryEntry) -> np.ndarray:
    text = cfg.get("target")
    if not text:
        raise UsageError("--target is required for invert")
    vals = _floats(text, "--target")
    parser = entry.extras.get("target_parser")
    if parser is not None:
        try:
            return np.asarray(parser(vals), dtype=float)
        except ValueError as exc:
            raise UsageError(str(exc))
    if len(vals) != f.dim_out:
        raise UsageError(
            f"--target has {len(vals)} components but {f.name!r} produces {f.dim_out}"
        )
    return np.asarray(vals)


def cmd_invert(cfg: dict) -> int:
    f, entry = _load_map(cfg)
    x0 = _parse_x0(cfg, f)
    y = _parse_target(cfg, f, entry)
    weight = _load_weight(cfg)
    seed = cfg["seed"]
    tol = _float(cfg, "tol")
    trust = _float(cfg, "trust")
    path = None
    if cfg["path_mode"] == "auto":
        factory = entry.extras.get("path_factory")
        if factory is not None:
            path = factory(f, x0, y)

    out = cfg["out"]
    trace: Optional[LiftTrace] = None
    try:
        sol, trace = global_invert(
            f, x0, y, weight=weight, tol=tol, trust_radius=trust,
            path=path, seed=seed,
        )
    except LiftFailure as exc:
        trace = exc.trace
        written = [f"{out}/trace.csv", f"{out}/result.json"]
        write_trace_csv(os.path.join(out, "trace.csv"), trace)
        if trace.rows:
            render_trace_figure(
                trace, os.path.join(out, "trace.png"),
                title=f"{entry.name}: stalled lift",
            )
            written.append(f"{out}/trace.png")
        write_json(
            os.path.join(out, "result.json"),
            {
                "status": "lift-failure",
                "message": str(exc),
                "t_reached": trace.t_reached,
                "map": entry.name,
                "seed": seed,
            },
        )
        print(f"lift failed: {exc}", file=sys.stderr)
        print("wrote " + ", ".join(written), file=sys.stderr)
        return 3
    except NonConvergence as exc:
        write_json(
            os.path.join(out, "result.json"),
            {
                "status": "no-convergence",
                "message": str(exc),
                "map": entry.name,
                "seed": seed,
            },
        )
        print(f"solver failed: {exc}", file=sys.stderr)
        return 3

    residual = float(f.norm_out.eval(f.value(sol) - y))
    write_trace_csv(os.path.join(out, "trace.csv"), trace)
    render_trace_figure(
        trace, os.path.join(out, "trace.png"), title=f"{entry.name}: lift"
    )
    write_json(
        os.path.join(out, "result.json"),
        {
            "status": "ok",
            "inverse": [float(v) for v in sol],
            "residual": residual,
            "steps": len(trace.rows),
            "min_weight_product": trace.min_weight_product,
            "map": entry.name,
            "seed": seed,
        },
    )
    print("inverse: " + ",".join(repr(float(v)) for v in sol))
    print(f"residual: {residual:.3e} after {len(trace.rows)} steps")
    print(f"wrote {out}/result.json, {out}/trace.csv, {out}/trace.png")
    return 0


def cmd_radius(cfg: dict) -> int:
    f, entry = _load_map(cfg)
    x0 = _parse_x0(cfg, f)
    seed = cfg["seed"]
    if not cfg.get("r"):
        raise UsageError("--r is required for radius (e.g. --r 1,5,20)")
    r_list = _floats(cfg["r"], "--r")
    if not r_list or any(r <= 0 for r in r_list):
        raise UsageError(f"radii must be positive, got {r_list}")
    r_list = sorted(r_list)
    steps = max(_int(cfg, "rho_steps"), 12)
    schedule = list(np.linspace(max(r_list) / steps, max(r_list), steps))
    rows = radial_profile(
        f, x0, schedule, per_shell_count=_int(cfg, "per_shell"),
        seed=derive_seed(seed, 2),
    )
    table = []
    parts = []
    for i, r in enumerate(r_list):
        cert = ball_inclusion_certificate(
            f, x0, r, seed=derive_seed(seed, 4, i), profile_rows=rows
        )
        varrho = cert.numbers["varrho"]
        table.append({"r": r, "rho": varrho, "verdict": cert.verdict})
        parts.append(cert)
        print(f"r={r:g}: guaranteed target radius {varrho:.6g} [{cert.verdict}]")
    cert = combine_certificates("radius", parts)
    cert.provenance.update(
        {
            "map": entry.name,
            "x0": [float(v) for v in x0],
            "seed": seed,
            "radii": r_list,
        }
    )
    _stamp(cert, cfg)
    out = cfg["out"]
    write_radius_csv(os.path.join(out, "radius.csv"), table)
    render_radius_figure(
        table, os.path.join(out, "radius.png"),
        title=f"{entry.name}: guaranteed radii",
    )
    write_json(
        os.path.join(out, "certificate.json"),
        cert.to_json_dict(include_timestamp=not cfg["no_timestamp"]),
    )
    print(f"wrote {out}/radius.csv, {out}/radius.png, {out}/certificate.json")
    return _EXIT[cert.verdict]


def cmd_profile(cfg: dict) -> int:
    f, entry = _load_map(cfg)
    x0 = _parse_x0(cfg, f)
    rows = radial_profile(
        f, x0, _rho_schedule(cfg), per_shell_count=_int(cfg, "per_shell"),
        seed=derive_seed(cfg["seed"], 2),
    )
    out = cfg["out"]
    write_profile_csv(os.path.join(out, "profile.csv"), rows)
    render_profile_figure(
        rows, os.path.join(out, "profile.png"),
        title=f"{entry.name}: rate profile",
    )
    print(f"wrote {out}/profile.csv, {out}/profile.png")
    return 0


_COMMANDS = {
    "certify": cmd_certify,
    "invert": cmd_invert,
    "radius": cmd_radius,
    "profile": cmd_profile,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
