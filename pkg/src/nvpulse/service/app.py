"""FastAPI service wrapping the simulator.

Every endpoint is a pure computation on the request body; the service
holds no state, so any number of clients (or the bundled CLI in
in-process mode) can share one instance.  Domain errors map to structured
bodies: config problems to HTTP 400, numerical failures to HTTP 500,
both carrying {"kind", "message"}.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, InvalidInputError, NumericalFailureError
from ..experiments import PulseSpec, frequency_sweep, multi_flip, rabi_beating
from ..optimizer import design_shape
from ..propagator import excitation_profile
from ..shapes import builtin_shape_names
from . import schemas as sc


def _resolved_pulse(spec: PulseSpec) -> sc.ResolvedPulse:
    return sc.ResolvedPulse(
        kind=spec.kind,
        shape_name=spec.shape.name if spec.shape is not None else None,
        duration_ns=spec.duration * 1e9,
        n_slices=spec.n_slices,
        flip_angle_rad=spec.flip_angle,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="nvpulse", version=__version__)

    @app.exception_handler(ConfigError)
    @app.exception_handler(InvalidInputError)
    @app.exception_handler(FileNotFoundError)
    async def _config_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=400, content={"kind": "config", "message": str(exc)})

    @app.exception_handler(NumericalFailureError)
    async def _numerical_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=500, content={"kind": "numerical", "message": str(exc)})

    @app.get("/health", response_model=sc.HealthResponse)
    def health() -> sc.HealthResponse:
        return sc.HealthResponse(status="ok", version=__version__)

    @app.get("/shapes")
    def shapes() -> list[str]:
        return builtin_shape_names()

    @app.post("/lines", response_model=sc.LinesResponse)
    def lines(req: sc.LinesRequest) -> sc.LinesResponse:
        line_set = req.spin_system.resolve().line_set()
        return sc.LinesResponse(
            lines=[
                sc.LineRow(frequency_hz=ln.frequency, weight=ln.weight, label=ln.label)
                for ln in line_set.lines
            ]
        )

    @app.post("/profile", response_model=sc.ProfileResponse)
    def profile(req: sc.ProfileRequest) -> sc.ProfileResponse:
        pulse = req.pulse.resolve()
        grid = np.asarray(req.detuning_grid_hz.resolve())
        prof = excitation_profile(pulse.build(), grid)
        rows = [
            sc.ProfileRow(detuning_hz=d, mz=z, mxy=xy)
            for d, z, xy in zip(prof.detunings, prof.mz, prof.mxy)
        ]
        return sc.ProfileResponse(rows=rows, pulse=_resolved_pulse(pulse))

    @app.post("/sweep", response_model=sc.SweepResponse)
    def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
        pulse = req.pulse.resolve()
        line_set = req.spin_system.resolve().line_set()
        carriers = np.asarray(req.carriers_hz.resolve())
        result = frequency_sweep(pulse, line_set, carriers, req.signal_model.resolve())
        rows = [
            sc.SweepRow(carrier_hz=c, signal=s) for c, s in zip(result.carriers, result.signal)
        ]
        return sc.SweepResponse(
            rows=rows,
            pulse=_resolved_pulse(pulse),
            line_frequencies_hz=list(line_set.frequencies()),
        )

    @app.post("/rabi", response_model=sc.RabiResponse)
    def rabi(req: sc.RabiRequest) -> sc.RabiResponse:
        line_set = req.spin_system.resolve().line_set()
        trace = rabi_beating(
            req.rabi_amplitude_rad_per_s,
            line_set,
            req.carrier_hz,
            np.asarray(req.times_s.resolve()),
            req.signal_model.resolve(),
        )
        rows = [sc.RabiRow(time_s=t, signal=s) for t, s in zip(trace.times, trace.signal)]
        return sc.RabiResponse(rows=rows, line_frequencies_hz=list(line_set.frequencies()))

    @app.post("/multiflip", response_model=sc.MultiFlipResponse)
    def multiflip(req: sc.MultiFlipRequest) -> sc.MultiFlipResponse:
        pulse = req.pulse.resolve()
        line_set = req.spin_system.resolve().line_set()
        result = multi_flip(
            pulse.build(),
            line_set,
            set(req.target_labels),
            req.n_flips,
            req.signal_model.resolve(),
        )
        freqs = line_set.frequencies()
        targets = [lbl in set(req.target_labels) for lbl in line_set.labels()]
        selected = freqs[np.array(targets)]
        rows = [
            sc.MultiFlipRow(flip=i, selected_population=s, spectator_population=p)
            for i, s, p in zip(
                result.flip_index, result.selected_population, result.spectator_population
            )
        ]
        return sc.MultiFlipResponse(
            rows=rows,
            total_signal=list(result.total_signal),
            pulse=_resolved_pulse(pulse),
            line_frequencies_hz=list(freqs),
            carrier_hz=0.5 * (selected.min() + selected.max()),
        )

    @app.post("/optimize", response_model=sc.OptimizeResponse)
    def optimize(req: sc.OptimizeRequest) -> sc.OptimizeResponse:
        result = design_shape(
            req.objective.resolve(), req.schedule.resolve(), refine_iters=req.refine_iters
        )
        return sc.OptimizeResponse(
            shape=sc.ShapeOut(
                name=result.shape.name,
                a0=result.shape.a0,
                an=list(result.shape.an),
                bn=list(result.shape.bn),
            ),
            final_cost=result.final_cost,
            evaluations=result.evaluations,
            cost_trace=list(result.cost_trace),
        )

    return app


app = create_app()
