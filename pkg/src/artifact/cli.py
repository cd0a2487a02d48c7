"""Command-line front end: ``artifact {simulate,optimize,protocol,cavity-map,sweep}``."""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cavity import region_map, write_region_map
from .config import Scenario, check_sweep_key, load_raw, parse_scenario, set_key
from .dynamics import integrate
from .errors import ConfigError, NumericalError
from .optimizer import optimize_pulse
from .photonics import donor_photon, ion_photon, overlap, write_pair_csv
from .protocol import evaluate

log = logging.getLogger("artifact")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SUMMARY_KEYS = ("re_overlap", "arg_overlap", "p1_yb", "p1_in", "c1", "fidelity", "p_succ", "rate_khz")


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def simulate(sc: Scenario):
    """Donor and ion trajectories, their photons and the overlap ``<ion|donor>``."""
    donor_traj = integrate(sc.donor, sc.grid, method=sc.method)
    ion_traj = integrate(sc.ion, sc.grid, method=sc.method)
    donor_ph = donor_photon(donor_traj, sc.donor)
    ion_ph = ion_photon(ion_traj, sc.ion)
    return donor_traj, ion_traj, donor_ph, ion_ph, overlap(ion_ph, donor_ph)


def protocol_metrics(sc: Scenario, ov: complex, p_emit: Optional[tuple] = None) -> dict:
    params = sc.protocol.params
    if sc.protocol.p1_source == "simulated":
        if p_emit is None:
            raise ConfigError("protocol.p1_source", "'simulated' needs simulated photons")
        params = params.replace(p1_yb=p_emit[0], p1_in=p_emit[1])
    report = evaluate(params, ov, sc.protocol.epsilon)
    out = {
        "re_overlap": ov.real,
        "arg_overlap": cmath.phase(ov) if ov != 0 else 0.0,
        "abs_overlap": abs(ov),
        "p1_yb": params.p1_yb,
        "p1_in": params.p1_in,
    }
    out.update(report.to_dict())
    return out


def run_simulate(sc: Scenario, out_dir: Path, metadata: Optional[dict]) -> dict:
    donor_traj, ion_traj, donor_ph, ion_ph, ov = simulate(sc)
    if sc.protocol.re_overlap is not None:
        log.info("protocol.re_overlap is ignored by simulate; the simulated overlap is used")
    summary = protocol_metrics(sc, ov, (ion_ph.p_emit, donor_ph.p_emit))
    summary["p_emit_yb"] = ion_ph.p_emit
    summary["p_emit_in"] = donor_ph.p_emit
    _write_artifacts(sc, out_dir, summary, donor_traj, ion_traj, donor_ph, ion_ph, ov)
    _finish(sc, out_dir, summary, metadata)
    return summary


def _write_artifacts(sc, out_dir, summary, donor_traj, ion_traj, donor_ph, ion_ph, ov):
    f = sc.files
    if "trajectories" in sc.outputs:
        donor_traj.to_csv(out_dir / f["trajectory_donor"])
        ion_traj.to_csv(out_dir / f["trajectory_ion"])
    if "wavefunctions" in sc.outputs:
        donor_ph.to_csv(out_dir / f["wavefunction_donor"])
        ion_ph.to_csv(out_dir / f["wavefunction_ion"])
        write_pair_csv(out_dir / f["wavefunction_pair"], ion_ph, donor_ph)
    if "overlap" in sc.outputs:
        _write_json(out_dir / f["overlap"], {"re": ov.real, "im": ov.imag, "abs": abs(ov),
                                             "arg": summary["arg_overlap"]})
    if "metrics" in sc.outputs:
        _write_json(out_dir / f["metrics"], {k: v for k, v in summary.items() if k != "rho"})
    if "cavity-map" in sc.outputs:
        _cavity_map(sc, out_dir)


def _finish(sc: Scenario, out_dir: Path, summary: dict, metadata: Optional[dict]) -> None:
    data = dict(summary)
    if metadata is not None:
        data["metadata"] = metadata
    _write_json(out_dir / sc.files["summary"], data)


def run_optimize(sc: Scenario, out_dir: Path, metadata: Optional[dict]) -> dict:
    if sc.optimization is None:
        raise ConfigError("optimization", "missing section; optimize needs [optimization]")
    result = optimize_pulse(sc.optimization, sc.donor, sc.ion)
    if sc.optimization.free_side == "donor":
        sc = replace(sc, donor=sc.donor.with_pulse(result.pulse))
    else:
        sc = replace(sc, ion=sc.ion.with_pulse(result.pulse))
    if "optimizer-log" in sc.outputs:
        result.write_log(out_dir / sc.files["optimizer_log"])
    donor_traj, ion_traj, donor_ph, ion_ph, ov = simulate(sc)
    summary = protocol_metrics(sc, ov, (ion_ph.p_emit, donor_ph.p_emit))
    summary.update({
        "p_emit_yb": ion_ph.p_emit,
        "p_emit_in": donor_ph.p_emit,
        "free_side": sc.optimization.free_side,
        "optimized_pulse": asdict(result.pulse),
        "evaluations": result.evaluations,
        "optimizer_re_overlap": result.re_overlap,
        "optimizer_p1": result.p1,
    })
    _write_artifacts(sc, out_dir, summary, donor_traj, ion_traj, donor_ph, ion_ph, ov)
    _finish(sc, out_dir, summary, metadata)
    return summary


def run_protocol(sc: Scenario, out_dir: Path, metadata: Optional[dict]) -> dict:
    """Protocol figures only; uses ``protocol.re_overlap`` when given, else simulates."""
    if sc.protocol.re_overlap is not None and sc.protocol.p1_source == "config":
        summary = protocol_metrics(sc, complex(sc.protocol.re_overlap, 0.0))
    else:
        _, _, donor_ph, ion_ph, ov = simulate(sc)
        summary = protocol_metrics(sc, ov, (ion_ph.p_emit, donor_ph.p_emit))
    _finish(sc, out_dir, summary, metadata)
    return summary


def _cavity_map(sc: Scenario, out_dir: Path) -> Path:
    cs = sc.cavity
    qs = np.geomspace(cs.q_min, cs.q_max, cs.q_steps)
    vs = np.geomspace(cs.v_min, cs.v_max, cs.v_steps)
    rows = region_map(qs, vs, wavelength=cs.wavelength, refractive_index=cs.refractive_index, gamma=sc.donor.gamma_in)
    path = out_dir / sc.files["cavity_map"]
    write_region_map(path, rows)
    return path


def run_cavity_map(sc: Scenario, out_dir: Path, metadata: Optional[dict]) -> dict:
    path = _cavity_map(sc, out_dir)
    return {"cavity_map": str(path)}


# sweep ------------------------------------------------------------------

SWEEP_COLUMNS = ("value", *SUMMARY_KEYS)


def _sweep_point(args) -> dict:
    raw, key, value, name, simulated = args
    sc = parse_scenario(set_key(raw, key, value), name=name)
    if simulated is not None:
        ov, p_emit = simulated
        return protocol_metrics(sc, ov, p_emit)
    if sc.protocol.re_overlap is not None and sc.protocol.p1_source == "config":
        return protocol_metrics(sc, complex(sc.protocol.re_overlap, 0.0))
    _, _, donor_ph, ion_ph, ov = simulate(sc)
    return protocol_metrics(sc, ov, (ion_ph.p_emit, donor_ph.p_emit))


def run_sweep(raw: dict, name: str, key: str, lo: float, hi: float, steps: int, out_dir: Path,
              jobs: int = 1, filename: str = "sweep.csv") -> list[dict]:
    check_sweep_key(key)
    if steps < 1:
        raise ConfigError("--range", "steps must be at least 1")
    if key == "protocol.p1" and raw.get("protocol", {}).get("p1_source", "config") == "simulated":
        raise ConfigError("protocol.p1", "cannot sweep p1 while protocol.p1_source = 'simulated'")
    values = [float(v) for v in np.linspace(lo, hi, steps)]
    scenarios = [parse_scenario(set_key(raw, key, v), name=name) for v in values]  # validate every point first

    # protocol-only keys do not change the photons: simulate once
    simulated = None
    base = scenarios[0]
    if key.startswith("protocol.") and key != "protocol.re_overlap" and base.protocol.re_overlap is None:
        _, _, donor_ph, ion_ph, ov = simulate(base)
        simulated = (ov, (ion_ph.p_emit, donor_ph.p_emit))

    tasks = [(raw, key, v, name, simulated) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))  # map preserves input order
    else:
        results = [_sweep_point(t) for t in tasks]

    rows = [{"value": v, **{k: r[k] for k in SUMMARY_KEYS}} for v, r in zip(values, results)]
    path = out_dir / filename
    with open(path, "w") as f:
        f.write(",".join(["param", *SWEEP_COLUMNS]) + "\n")
        for row in rows:
            f.write(",".join([key, *("%.17g" % row[c] for c in SWEEP_COLUMNS)]) + "\n")
    return rows


# entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description="Photon pulse shaping and remote entanglement metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, type=Path, help="scenario TOML file")
        p.add_argument("--out-dir", type=Path, default=Path("."), help="directory for artifacts (default: .)")
        p.add_argument("--seed", type=int, default=None, help="override optimization.seed")
        p.add_argument("--no-metadata", action="store_true", help="omit the wall-clock metadata field")
        p.add_argument("--print-effective-config", action="store_true",
                       help="echo fully resolved values (rad/ns, ns) as JSON and continue")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    common(sub.add_parser("simulate", help="simulate both emitters, overlap and protocol metrics"))
    common(sub.add_parser("optimize", help="optimise the free pulse, then simulate"))
    common(sub.add_parser("protocol", help="protocol metrics only"))
    common(sub.add_parser("cavity-map", help="write the (Q, V) region map"))
    sw = common(sub.add_parser("sweep", help="sweep one numeric config key"))
    sw.add_argument("--param", required=True, help="dotted key, e.g. protocol.p1 or donor.pulse.omega_max")
    sw.add_argument("--range", nargs=3, required=True, metavar=("LO", "HI", "STEPS"))
    sw.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    sw.add_argument("--output", default="sweep.csv", help="CSV file name inside --out-dir")
    return parser


def _with_seed(raw: dict, seed: Optional[int]) -> dict:
    if seed is None:
        return raw
    if "optimization" not in raw:
        return raw
    return set_key(raw, "optimization.seed", seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        raw = _with_seed(load_raw(args.config), args.seed)
        name = args.config.stem
        sc = parse_scenario(raw, name=name)
        if args.print_effective_config:
            print(json.dumps(sc.effective(), indent=2, sort_keys=True))
        args.out_dir.mkdir(parents=True, exist_ok=True)
        metadata = None if args.no_metadata else {
            "version": __version__,
            "command": args.command,
            "config": str(args.config),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        if args.command == "sweep":
            try:
                lo, hi = float(args.range[0]), float(args.range[1])
                steps = int(args.range[2])
            except ValueError:
                raise ConfigError("--range", f"expected LO HI STEPS numbers, got {args.range}") from None
            if args.jobs < 1:
                raise ConfigError("--jobs", "must be >= 1")
            rows = run_sweep(raw, name, args.param, lo, hi, steps, args.out_dir, args.jobs, args.output)
            print(f"wrote {len(rows)} rows to {args.out_dir / args.output}")
            return EXIT_OK
        runner = {"simulate": run_simulate, "optimize": run_optimize, "protocol": run_protocol,
                  "cavity-map": run_cavity_map}[args.command]
        summary = runner(sc, args.out_dir, metadata)
        for k in SUMMARY_KEYS:
            if k in summary:
                print(f"{k:12s} {summary[k]:.10g}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error in {exc.stage}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
