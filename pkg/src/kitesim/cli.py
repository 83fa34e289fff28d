"""Command-line entry point: batch simulation, replay, log analysis,
controller tuning, and the live console service.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import Config, ConfigError, load_config
from .flightlog import LogError, analyze_lag, export_kml, read_log
from .scenarios import builtin_scenario_names, resolve_scenario
from .sensors import GpsOrigin
from .station import (
    DEFAULT_ORIGIN,
    SimulationRun,
    replay,
    write_run,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # I/O problems
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kite-sim",
                description="Tethered-kite flight simulator and ground station")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a scenario to completion")
    sim.add_argument("--config", help="JSON config file (defaults built in)")
    sim.add_argument("--scenario", default="takeoff-calm",
                     help="bundled name (%s) or wind JSON file"
                     % ", ".join(builtin_scenario_names()))
    sim.add_argument("--duration", type=float, help="seconds (scenario default)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--realtime", action="store_true",
                     help="pace to wall clock instead of fast-as-possible")
    sim.add_argument("--json", action="store_true", help="machine-readable stdout")

    rep = sub.add_parser("replay", help="re-run a manifest and verify the log")
    rep.add_argument("--manifest", required=True)
    rep.add_argument("--out", help="write the replayed log here")
    rep.add_argument("--json", action="store_true")

    ana = sub.add_parser("analyze", help="analyze a flight log")
    ana.add_argument("--log", required=True)
    ana.add_argument("--lag", action="store_true",
                     help="wind-to-altitude lag via cross-correlation")
    ana.add_argument("--kml", help="write a KML flight path here")
    ana.add_argument("--origin", default=None,
                     help="lat,lon of the winch (default %.1f,%.1f)"
                     % (DEFAULT_ORIGIN.lat, DEFAULT_ORIGIN.lon))
    ana.add_argument("--json", action="store_true")

    tune = sub.add_parser("tune", help="optimize the wind-hold threshold table")
    tune.add_argument("--config", help="JSON config file (defaults built in)")
    tune.add_argument("--budget", type=int, required=True)
    tune.add_argument("--out", required=True)
    tune.add_argument("--scenario", default="gusty-training")
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--json", action="store_true")

    srv = sub.add_parser("serve", help="run the live console service")
    srv.add_argument("--config", help="JSON config file (defaults built in)")
    srv.add_argument("--scenario", default="flight-6min")
    srv.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    srv.add_argument("--out", help="directory for finished-run files")
    srv.add_argument("--seed", type=int, default=0)
    srv.add_argument("--speed", type=float, default=1.0,
                     help="simulation speed multiplier")
    srv.add_argument("--duration", type=float)
    return p


def _load_config(path) -> Config:
    if path is None:
        return Config()
    return load_config(path)


def _cmd_sim(args) -> int:
    config = _load_config(args.config)
    scenario = resolve_scenario(args.scenario)
    run = SimulationRun(config, scenario, args.duration, args.seed)
    if args.realtime:
        import time

        next_wall = time.monotonic()
        while not run.finished:
            run.tick()
            next_wall += run.period
            delay = next_wall - time.monotonic()
            if delay > 0:
                time.sleep(delay)
    else:
        run.run()
    manifest = run.manifest()
    out = write_run(run.records, manifest, args.out)
    summary = {"run_id": manifest.run_id, "out_dir": str(out),
               "ticks": len(run.records), **manifest.outcome}
    if args.json:
        print(json.dumps(summary))
    else:
        o = manifest.outcome
        print(f"run {manifest.run_id}: {len(run.records)} ticks, "
              f"max altitude {o['max_altitude_m']:.2f} m, "
              f"time aloft {o['time_aloft_s']:.1f} s, "
              f"line travel {o['line_travel_m']:.1f} m -> {out}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    records, manifest, matches = replay(args.manifest)
    if args.out:
        from .flightlog import write_log

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_log(records, out / manifest.log_file)
    if args.json:
        print(json.dumps({"run_id": manifest.run_id, "matches": matches,
                          "ticks": len(records)}))
    else:
        state = {True: "byte-identical", False: "MISMATCH",
                 None: "original log missing"}[matches]
        print(f"replay {manifest.run_id}: {len(records)} ticks, {state}")
    return EXIT_OK if matches in (True, None) else EXIT_VALIDATION


def _parse_origin(text) -> GpsOrigin:
    if text is None:
        return DEFAULT_ORIGIN
    try:
        lat, lon = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError("origin must be 'lat,lon'") from None
    return GpsOrigin(lat=lat, lon=lon)


def _cmd_analyze(args) -> int:
    records = read_log(args.log)
    result = {"records": len(records)}
    if args.lag:
        result["lag_s"] = analyze_lag(records)
    if args.kml:
        doc = export_kml(records, _parse_origin(args.origin))
        Path(args.kml).write_text(doc)
        result["kml"] = args.kml
    if args.json:
        print(json.dumps(result))
    else:
        print(f"{len(records)} records")
        if "lag_s" in result:
            print(f"wind-to-altitude lag: {result['lag_s']:.1f} s")
        if args.kml:
            print(f"kml written to {args.kml}")
    return EXIT_OK


def _cmd_tune(args) -> int:
    from .config import save_config
    from .tuning import history_csv, optimize

    config = _load_config(args.config)
    scenario = resolve_scenario(args.scenario)
    best, history, mono = optimize(config, [scenario], args.budget, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_config(best, out / "tuned_config.json")
    (out / "tuning_history.csv").write_text(history_csv(history))
    first, last = mono[0].objective, mono[-1].objective
    if args.json:
        print(json.dumps({"evaluations": len(history),
                          "initial_objective": first,
                          "best_objective": last,
                          "out_dir": str(out)}))
    else:
        print(f"{len(history)} evaluations: objective {first:.4f} -> {last:.4f}")
        print(f"tuned config -> {out / 'tuned_config.json'}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import StationSession, create_app

    config = _load_config(args.config)
    scenario = resolve_scenario(args.scenario)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError("bind must be host:port")
    # surface a busy port as an I/O error before uvicorn owns the process
    import socket

    probe = socket.socket()
    try:
        probe.bind((host, int(port)))
    finally:
        probe.close()
    session = StationSession(config, scenario, duration=args.duration,
                             seed=args.seed, speed=args.speed,
                             out_dir=args.out)
    console = Path(__file__).resolve().parents[2] / "frontend"
    app = create_app(session,
                     console_dir=console if (console / "index.html").exists()
                     else None)
    session.start()
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    finally:
        session.stop()
    return EXIT_OK


_COMMANDS = {
    "sim": _cmd_sim,
    "replay": _cmd_replay,
    "analyze": _cmd_analyze,
    "tune": _cmd_tune,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    except (ConfigError, LogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
