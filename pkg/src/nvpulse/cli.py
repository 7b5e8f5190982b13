"""Command-line front end.

The CLI is a thin client of the HTTP service: it loads a run config,
resolves any local file references (spin-system files, shape coefficient
files) into an inline request, posts it to the service, and writes the
returned rows as CSV plus a run-manifest JSON.  By default the request is
served in-process through an ASGI transport, so no server or network is
needed; --server routes the same request to a remote instance instead.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import httpx

from . import __version__
from .csvio import (
    atomic_write_text,
    write_lines_csv,
    write_manifest,
    write_multiflip_csv,
    write_profile_csv,
    write_rabi_csv,
    write_sweep_csv,
)
from .errors import ConfigError
from .shapes import FourierShape, builtin_shape_names, load_shape_file, shape_to_json

_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 3

_SHAPELESS_KINDS = ("rectangular", "gaussian", "hermite")


class _ServiceError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


def _post_in_process(endpoint: str, payload: dict) -> httpx.Response:
    """Drive the ASGI app directly; no server or network involved."""
    import asyncio

    from .service.app import create_app

    async def run() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://nvpulse.internal", timeout=None
        ) as client:
            return await client.post(endpoint, json=payload)

    return asyncio.run(run())


def _load_run_config(ref: str) -> tuple[dict, Path | None]:
    """Load a run config from a path or a packaged preset (preset:NAME)."""
    if ref.startswith("preset:"):
        name = ref.split(":", 1)[1]
        resource = resources.files("nvpulse").joinpath("presets", f"{name}.json")
        if not resource.is_file():
            raise ConfigError(f"unknown preset {name!r}", path=ref)
        return json.loads(resource.read_text()), None
    path = Path(ref)
    if not path.is_file():
        raise ConfigError("run config not found", path=str(path))
    try:
        return json.loads(path.read_text()), path.parent
    except json.JSONDecodeError as exc:
        raise ConfigError(f"run config is not valid JSON: {exc}", path=str(path)) from exc


def _resolve_spin_system(cfg: dict, base: Path | None) -> dict:
    if "spin_system" in cfg:
        return cfg["spin_system"]
    if "spin_system_path" in cfg:
        ref = Path(cfg["spin_system_path"])
        if not ref.is_absolute() and base is not None:
            ref = base / ref
        if not ref.is_file():
            raise ConfigError("spin system file not found", path=str(ref))
        return json.loads(ref.read_text())
    raise ConfigError("run config needs spin_system or spin_system_path")


def _resolve_shape_ref(ref, base: Path | None) -> dict:
    """Shape reference -> inline coefficient dict for the request."""
    if isinstance(ref, dict):
        return ref
    if ref in builtin_shape_names():
        return {"builtin": ref}
    path = Path(ref)
    if not path.is_absolute() and base is not None:
        path = base / path
    shape = load_shape_file(path)
    return {"name": shape.name, "a0": shape.a0, "an": list(shape.an), "bn": list(shape.bn)}


def _resolve_pulse(cfg: dict, args, base: Path | None) -> dict:
    pulse = dict(cfg.get("pulse", {}))
    if args.duration_ns is not None:
        pulse["duration_ns"] = args.duration_ns
    if args.slices is not None:
        pulse["n_slices"] = args.slices
    if args.shape is not None:
        pulse["shape"] = args.shape
    shape_ref = pulse.pop("shape", None)
    if isinstance(shape_ref, str) and shape_ref in _SHAPELESS_KINDS:
        pulse["kind"] = shape_ref
    elif shape_ref is not None:
        pulse.setdefault("kind", "fourier")
        pulse["shape"] = _resolve_shape_ref(shape_ref, base)
    if "duration_ns" not in pulse:
        raise ConfigError("pulse needs duration_ns", field="pulse.duration_ns")
    return pulse


def _post(args, endpoint: str, payload: dict) -> dict:
    if args.server:
        with httpx.Client(base_url=args.server, timeout=None) as client:
            response = client.post(endpoint, json=payload)
    else:
        response = _post_in_process(endpoint, payload)
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        raise _ServiceError("numerical", f"HTTP {response.status_code}: {response.text[:200]}")
    if response.status_code == 422:
        raise _ServiceError("config", json.dumps(body.get("detail", body)))
    kind = body.get("kind", "config" if response.status_code == 400 else "numerical")
    raise _ServiceError(kind, body.get("message", response.text[:200]))


def _manifest(args, command: str, payload: dict, extra: dict) -> dict:
    manifest = {
        "tool": "nvpulse",
        "version": __version__,
        "command": command,
        "config": args.config,
        "seed": args.seed,
        "request": payload,
    }
    manifest.update(extra)
    return manifest


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- commands ------------------------------------------------------------


def cmd_lines(args) -> None:
    cfg, base = _load_run_config(args.config)
    payload = {"spin_system": _resolve_spin_system(cfg, base)}
    body = _post(args, "/lines", payload)
    rows = [(ln["frequency_hz"], ln["weight"], ln["label"]) for ln in body["lines"]]
    out = _out_dir(args)
    write_lines_csv(out / "lines.csv", rows)
    write_manifest(out / "run_manifest.json", _manifest(args, "lines", payload, {
        "line_frequencies_hz": [r[0] for r in rows],
    }))
    print(f"wrote {out / 'lines.csv'} ({len(rows)} lines)")


def cmd_profile(args) -> None:
    cfg, base = _load_run_config(args.config)
    payload = {
        "pulse": _resolve_pulse(cfg, args, base),
        "detuning_grid_hz": cfg.get("detuning_grid_hz", {}),
    }
    body = _post(args, "/profile", payload)
    out = _out_dir(args)
    rows = body["rows"]
    write_profile_csv(
        out / "profile.csv",
        [r["detuning_hz"] for r in rows],
        [r["mz"] for r in rows],
        [r["mxy"] for r in rows],
    )
    write_manifest(out / "run_manifest.json", _manifest(args, "profile", payload, {
        "pulse_resolved": body["pulse"],
    }))
    print(f"wrote {out / 'profile.csv'} ({len(rows)} points)")


def cmd_sweep(args) -> None:
    cfg, base = _load_run_config(args.config)
    payload = {
        "pulse": _resolve_pulse(cfg, args, base),
        "spin_system": _resolve_spin_system(cfg, base),
        "carriers_hz": cfg.get("carriers_hz", {}),
        "signal_model": cfg.get("signal_model", {}),
    }
    body = _post(args, "/sweep", payload)
    out = _out_dir(args)
    rows = body["rows"]
    write_sweep_csv(
        out / "sweep.csv", [r["carrier_hz"] for r in rows], [r["signal"] for r in rows]
    )
    write_manifest(out / "run_manifest.json", _manifest(args, "sweep", payload, {
        "pulse_resolved": body["pulse"],
        "line_frequencies_hz": body["line_frequencies_hz"],
    }))
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} carriers)")


def cmd_rabi(args) -> None:
    cfg, base = _load_run_config(args.config)
    payload = {
        "spin_system": _resolve_spin_system(cfg, base),
        "carrier_hz": cfg["carrier_hz"],
        "rabi_amplitude_rad_per_s": cfg["rabi_amplitude_rad_per_s"],
        "times_s": cfg.get("times_s", {}),
        "signal_model": cfg.get("signal_model", {}),
    }
    body = _post(args, "/rabi", payload)
    out = _out_dir(args)
    rows = body["rows"]
    write_rabi_csv(out / "rabi.csv", [r["time_s"] for r in rows], [r["signal"] for r in rows])
    write_manifest(out / "run_manifest.json", _manifest(args, "rabi", payload, {
        "line_frequencies_hz": body["line_frequencies_hz"],
    }))
    print(f"wrote {out / 'rabi.csv'} ({len(rows)} times)")


def cmd_multiflip(args) -> None:
    cfg, base = _load_run_config(args.config)
    payload = {
        "pulse": _resolve_pulse(cfg, args, base),
        "spin_system": _resolve_spin_system(cfg, base),
        "target_labels": cfg["target_labels"],
        "n_flips": cfg.get("n_flips", 16),
        "signal_model": cfg.get("signal_model", {}),
    }
    body = _post(args, "/multiflip", payload)
    out = _out_dir(args)
    rows = body["rows"]
    write_multiflip_csv(
        out / "multiflip.csv",
        [r["flip"] for r in rows],
        [r["selected_population"] for r in rows],
        [r["spectator_population"] for r in rows],
    )
    write_manifest(out / "run_manifest.json", _manifest(args, "multiflip", payload, {
        "pulse_resolved": body["pulse"],
        "line_frequencies_hz": body["line_frequencies_hz"],
        "carrier_hz": body["carrier_hz"],
        "total_signal": body["total_signal"],
    }))
    print(f"wrote {out / 'multiflip.csv'} ({len(rows) - 1} flips)")


def cmd_optimize(args) -> None:
    cfg, _base = _load_run_config(args.config)
    schedule = dict(cfg.get("schedule", {}))
    if args.seed is not None:
        schedule["rng_seed"] = args.seed
    payload = {
        "objective": cfg.get("objective", {}),
        "schedule": schedule,
        "refine_iters": cfg.get("refine_iters", 200),
    }
    body = _post(args, "/optimize", payload)
    out = _out_dir(args)
    shape = body["shape"]
    shape_json = shape_to_json(
        FourierShape(
            a0=shape["a0"], an=tuple(shape["an"]), bn=tuple(shape["bn"]), name=shape["name"]
        ),
        inversion=True,
        provenance=(
            f"designed by nvpulse {__version__}: simulated annealing plus gradient "
            f"refinement, seed {schedule.get('rng_seed', 0)}"
        ),
    )
    atomic_write_text(out / "shape_designed.json", shape_json + "\n")
    write_manifest(out / "optimize_trace.json", {
        "final_cost": body["final_cost"],
        "evaluations": body["evaluations"],
        "cost_trace": body["cost_trace"],
        "objective": payload["objective"],
        "schedule": payload["schedule"],
        "refine_iters": payload["refine_iters"],
    })
    write_manifest(out / "run_manifest.json", _manifest(args, "optimize", payload, {
        "final_cost": body["final_cost"],
    }))
    print(f"wrote {out / 'shape_designed.json'} (cost {body['final_cost']:.6f})")


def cmd_serve(args) -> None:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvpulse",
        description="Band-selective shaped-pulse simulator for NV-center spin control",
    )
    parser.add_argument("--version", action="version", version=f"nvpulse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        if name != "serve":
            p.add_argument("--config", required=True,
                           help="run config JSON path, or preset:NAME")
            p.add_argument("--out", default="out", help="output directory")
            p.add_argument("--seed", type=int, default=None, help="rng seed override")
            p.add_argument("--slices", type=int, default=None, help="n_slices override")
            p.add_argument("--duration-ns", type=float, default=None, dest="duration_ns",
                           help="pulse duration override (ns)")
            p.add_argument("--shape", default=None,
                           help="shape override: built-in name, kind, or coefficient file")
            p.add_argument("--server", default=None,
                           help="base URL of a running service (default: in-process)")
        return p

    add("lines", cmd_lines, "resolve the spin system and write its transition lines")
    add("profile", cmd_profile, "excitation profile of a pulse over a detuning grid")
    add("sweep", cmd_sweep, "pulsed frequency sweep across the spin system")
    add("rabi", cmd_rabi, "multi-line Rabi time trace at a fixed carrier")
    add("multiflip", cmd_multiflip, "repeated-inversion populations per flip")
    add("optimize", cmd_optimize, "design a band-selective shape from scratch")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.set_defaults(fn=cmd_serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except (ConfigError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        detail = f"missing config key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"nvpulse: error kind=config {detail}", file=sys.stderr)
        return _EXIT_CONFIG
    except httpx.HTTPError as exc:
        print(f"nvpulse: error kind=config server unreachable: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except _ServiceError as exc:
        print(f"nvpulse: error kind={exc.kind} {exc}", file=sys.stderr)
        return _EXIT_CONFIG if exc.kind == "config" else _EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
