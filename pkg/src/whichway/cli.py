"""Command line: ``whichway {simulate,metrics,sweep}``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config
from .elements import wire_positions
from .errors import ClampWarning
from .metrics import (envelope_weighted_blocked_fraction, greenberger_yasin,
                      which_way_lower_bound, wire_limited_visibility,
                      worst_case_visibility)
from .scenarios import (MAIN_CASES, RunSummary, emit_summary, full_pipeline,
                        run_scenario, _now)
from .photons import count_coincidences, sample_photon_stream

log = logging.getLogger("whichway")


def _simulate(args) -> int:
    geom, opts = config.build(args.config, option_overrides={
        "grid_n": args.grid_n, "mode": args.mode, "seed": args.seed,
        "photons": True if args.photons else None, "flux": args.flux,
        "duration": args.duration, "jitter": True if args.jitter else None,
    })
    out = Path(args.out)
    if args.case == "all":
        summary = full_pipeline(geom, opts)
    else:
        # single condition: no reductions or metrics
        no_photons = dataclasses.replace(opts, photons=False)
        result = run_scenario(geom, args.case, no_photons)
        coincidence = events = None
        if opts.photons:
            from .scenarios import _simulate as simulate_case
            _, image = simulate_case(geom, args.case, opts, keep_image=True)
            events = sample_photon_stream(
                image, geom.detector_regions(), opts.flux, opts.duration,
                opts.dark_rate, seed=opts.seed, dead_time=opts.dead_time)
            result.photon_counts = events.counts()
            coincidence = count_coincidences(events, opts.coincidence_window,
                                             duration=opts.duration)
        summary = RunSummary(geom, opts, {args.case: result},
                             coincidence=coincidence, events=events,
                             timestamp=_now())
    path = emit_summary(summary, out / "summary.json")
    print(path)
    return 0


def _metrics(args) -> int:
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ClampWarning)
        v_wire = wire_limited_visibility(args.b, args.wire_t)
        ratio, v_star = worst_case_visibility(args.airy_radius, args.wire_t,
                                              args.n_wires, args.blocked_frac)
        k_b = which_way_lower_bound(args.w2, args.leak)
        k_a = which_way_lower_bound(
            args.w1 if args.w1 is not None else args.w2,
            args.leak_a if args.leak_a is not None else args.leak)
    flags = [str(w.message) for w in caught]
    gy, violated = greenberger_yasin(v_star, min(k_a, k_b))
    json.dump({"V_wire_limited": v_wire, "intensity_ratio": ratio,
               "V_star_lower_bound": v_star, "K_A": k_a, "K_B": k_b,
               "gy_value": gy, "gy_violated": violated, "flags": flags},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _sweep(args) -> int:
    geom, opts = config.build(args.config, option_overrides={
        "grid_n": args.grid_n, "mode": args.mode})
    if args.steps < 1:
        raise ValueError("--steps must be >= 1")
    values_mm = np.linspace(args.start, args.stop, args.steps)
    header = ["wire_thickness_mm", "V_wire_limited", "blocked_fraction_oracle",
              "V_star_oracle"]
    if args.simulate:
        header += ["b_loss_pct_sim", "V_star_sim"]
    rows = []
    for t_mm in values_mm:
        g = dataclasses.replace(geom, wire_thickness=t_mm * 1e-3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ClampWarning)
            v_wire = wire_limited_visibility(g.fringe_b, g.wire_thickness)
            centers = wire_positions(g, g.fringe_period)
            frac = envelope_weighted_blocked_fraction(
                g.fringe_b, g.wire_thickness, centers, g.airy_radius)
            v_star = (worst_case_visibility(g.airy_radius, g.wire_thickness,
                                            g.wire_count, frac)[1]
                      if frac > 0 else 1.0)
            row = [t_mm, v_wire, frac, v_star]
            if args.simulate:
                a = run_scenario(g, "a", opts)
                b = run_scenario(g, "b", opts)
                loss = max(1 - b.detector1_count / a.detector1_count,
                           1 - b.detector2_count / a.detector2_count)
                v_sim = (worst_case_visibility(g.airy_radius, g.wire_thickness,
                                               g.wire_count, loss)[1]
                         if loss > 0 else 1.0)
                row += [100 * loss, v_sim]
        rows.append(row)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fh = (out / "sweep.csv").open("w", newline="")
    else:
        fh = sys.stdout
    w = csv.writer(fh)
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    if fh is not sys.stdout:
        fh.close()
        print(out / "sweep.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="whichway",
        description="Dual-pinhole / wire-grid / lens-imaging simulator")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run measurement conditions a-d")
    s.add_argument("--case", choices=list(MAIN_CASES) + ["all"], default="all")
    s.add_argument("--config", help="flat YAML/JSON config file")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--grid-n", type=int)
    s.add_argument("--mode", choices=["1d", "2d"])
    s.add_argument("--seed", type=int)
    s.add_argument("--jitter", action="store_true",
                   help="misalign each wire within the alignment tolerance")
    s.add_argument("--photons", action="store_true", help="sample photon clicks")
    s.add_argument("--flux", type=float, help="photons/s")
    s.add_argument("--duration", type=float, help="s")
    s.set_defaults(func=_simulate)

    m = sub.add_parser("metrics", help="visibility / which-way arithmetic only")
    m.add_argument("--w2", type=float, required=True,
                   help="detector-2 count with grid, %% of unobstructed")
    m.add_argument("--leak", type=float, required=True,
                   help="detector-2 count with pinhole B blocked, %%")
    m.add_argument("--w1", type=float, help="detector-1 count with grid, %%")
    m.add_argument("--leak-a", type=float,
                   help="detector-1 count with pinhole A blocked, %%")
    m.add_argument("--blocked-frac", type=float, required=True,
                   help="fraction of photons stopped by the grid")
    m.add_argument("--airy-radius", type=float, required=True, help="mm")
    m.add_argument("--wire-t", type=float, required=True, help="mm")
    m.add_argument("--b", type=float, required=True, help="1/mm")
    m.add_argument("--n-wires", type=int, default=6)
    m.set_defaults(func=_metrics)

    w = sub.add_parser("sweep", help="scan a geometry parameter")
    w.add_argument("--param", choices=["wire_thickness"], required=True)
    w.add_argument("--from", dest="start", type=float, required=True, help="mm")
    w.add_argument("--to", dest="stop", type=float, required=True, help="mm")
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--config")
    w.add_argument("--simulate", action="store_true",
                   help="also run cases a and b at each step")
    w.add_argument("--grid-n", type=int)
    w.add_argument("--mode", choices=["1d", "2d"])
    w.add_argument("--out", help="directory for sweep.csv (default: stdout)")
    w.set_defaults(func=_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, NotImplementedError) as exc:
        print(f"whichway {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
