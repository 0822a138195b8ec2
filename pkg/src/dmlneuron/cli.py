"""Command-line entry point.

Every subcommand writes its data files (CSV with 17 significant digits,
JSON with a ``schema_version``), optional SVG figures and a run manifest
into the output directory. The manifest records the argument vector, the
resolved parameters, solver settings, the package version and a SHA-256
digest of each output, so ``rerun`` can repeat the command and check the
bytes.

Exit status: 0 on success, 1 on usage errors (bad flag, invalid
parameter, missing file), 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .files import SCHEMA_VERSION, read_table, sha256, write_csv, write_json
from .model import ImprovedParams, OriginalParams

OUT_ENV = "DMLNEURON_OUT"
DEFAULT_OUT = "dmlneuron-out"

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- run record


@dataclass
class Run:
    subcommand: str
    argv: list[str]
    out: Path
    stem: str
    params: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    outputs: list[Path] = field(default_factory=list)

    def path(self, suffix: str) -> Path:
        p = self.out / f"{self.stem}{suffix}"
        self.outputs.append(p)
        return p

    def manifest(self, wall: float) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "subcommand": self.subcommand,
            "argv": self.argv,
            "params": self.params,
            "settings": self.settings,
            "version": __version__,
            "outputs": [{"path": p.name, "sha256": sha256(p)} for p in self.outputs],
            "wall_time_s": wall,
        }


def _strip_out(argv: list[str]) -> list[str]:
    kept, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        kept.append(tok)
    return kept


# ---------------------------------------------------------------- parameters


def _add_planar(p: argparse.ArgumentParser, gamma: float | None = 0.315, I: float | None = 0.0) -> None:
    d = OriginalParams()
    p.add_argument("--A", type=float, default=d.A, help="exponential amplitude A")
    p.add_argument("--alpha", type=float, default=d.alpha, help="exponential rate alpha")
    if gamma is not None:
        p.add_argument("--gamma", type=float, default=gamma, help="recovery rate gamma (> 0)")
    if I is not None:
        p.add_argument("--I", type=float, default=I, help="constant input current I")


_FORCED_FLAGS = {f.name: "--" + f.name.replace("_", "-") for f in fields(ImprovedParams)}


def _add_forced(p: argparse.ArgumentParser) -> None:
    for f in fields(ImprovedParams):
        p.add_argument(_FORCED_FLAGS[f.name], dest=f.name, type=float, default=None,
                       help=f"override {f.name} (default {f.default})")


def _invalid(exc: Exception) -> UsageError:
    msg = str(exc)
    name, _, rest = msg.partition(" ")
    if name in _FORCED_FLAGS:
        return UsageError(f"invalid value for {_FORCED_FLAGS[name]}: {name} {rest}")
    return UsageError(f"invalid parameter: {msg}")


def _planar(ns) -> OriginalParams:
    kw = {"A": ns.A, "alpha": ns.alpha}
    if hasattr(ns, "gamma"):
        kw["gamma"] = ns.gamma
    if hasattr(ns, "I"):
        kw["I"] = ns.I
    try:
        return OriginalParams(**kw)
    except ValueError as exc:
        raise _invalid(exc) from None


def _forced(ns, base: ImprovedParams | None = None) -> ImprovedParams:
    over = {k: getattr(ns, k) for k in _FORCED_FLAGS if getattr(ns, k) is not None}
    try:
        return (base or ImprovedParams()).with_(**over)
    except ValueError as exc:
        raise _invalid(exc) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


# ---------------------------------------------------------------- subcommands


def cmd_nullclines(ns, run: Run) -> int:
    from .equilibria import find_equilibria, x_nullcline, y_nullcline

    p = _planar(ns)
    run.params = p.to_dict()
    run.settings = {"x_min": ns.x_min, "x_max": ns.x_max, "n": ns.n}
    x = np.linspace(ns.x_min, ns.x_max, ns.n)
    csv_path = write_csv(run.path(".csv"), ["x", "y_x_nullcline", "y_y_nullcline"],
                         zip(x, x_nullcline(x, p), y_nullcline(x, p)))
    eqs = [e.to_dict() for e in find_equilibria(p)]
    write_json(run.path(".equilibria.json"), {"schema_version": SCHEMA_VERSION, "params": p.to_dict(),
                                              "equilibria": eqs})
    if ns.svg:
        from .plotting import plot_nullclines

        plot_nullclines(read_table(csv_path), run.path(".svg"), eqs, title=f"gamma={p.gamma:g}, I={p.I:g}")
    return EXIT_OK


def cmd_equilibria(ns, run: Run) -> int:
    from .equilibria import find_equilibria

    p = _planar(ns)
    run.params = p.to_dict()
    run.settings = {"x_lo": ns.x_lo, "x_hi": ns.x_hi, "grid_n": ns.grid}
    eqs = [e.to_dict() for e in find_equilibria(p, ns.x_lo, ns.x_hi, ns.grid)]
    write_json(run.path(".json"), eqs)
    print(json.dumps(eqs, indent=2))
    return EXIT_OK


def cmd_continue(ns, run: Run) -> int:
    from .continuation import FreeParam, continue_equilibrium, cycle_envelope
    from .equilibria import find_equilibria

    free = FreeParam(ns.free)
    p = _planar(ns)
    try:
        start_params = p.with_(**{free.value: ns.start})
    except ValueError as exc:
        raise _invalid(exc) from None
    eqs = find_equilibria(start_params)
    if not eqs:
        raise NumericalFailure(f"no equilibrium at {free.value}={ns.start!r}")
    if ns.start_index >= len(eqs):
        raise UsageError(f"--start-index {ns.start_index} out of range: {len(eqs)} equilibria at the start")
    direction = 1 if ns.stop > ns.start else -1
    lo, hi = sorted((ns.start, ns.stop))
    run.params = start_params.to_dict()
    run.settings = {"free": free.value, "start": ns.start, "stop": ns.stop, "start_index": ns.start_index,
                    "h_max": ns.h_max, "envelope": ns.envelope, "cycle_horizon": ns.cycle_horizon}
    br = continue_equilibrium(eqs[ns.start_index], start_params, free, (lo, hi), h_max=ns.h_max,
                              direction=direction)
    pts = br.points
    csv_path = write_csv(run.path(".csv"), ["param", "x", "y", "trace", "det", "stability"],
                         [(b.param, b.x, b.y, b.trace, b.det, b.stability.value) for b in pts])
    bifs = [b.to_dict() for b in br.bifurcations]
    write_json(run.path(".bifurcations.json"), {"schema_version": SCHEMA_VERSION, "free": free.value,
                                                "status": br.status, "params": start_params.to_dict(),
                                                "bifurcations": bifs})
    env_table = None
    if ns.envelope:
        values = np.linspace(lo, hi, ns.envelope)
        samples = cycle_envelope(start_params, free, values, horizon=ns.cycle_horizon)
        env_path = write_csv(run.path(".envelope.csv"), ["param", "x_min", "x_max", "has_cycle"],
                             [(s.param, s.x_min, s.x_max, s.has_cycle) for s in samples])
        env_table = read_table(env_path)
    if ns.svg:
        from .plotting import plot_branch

        plot_branch(read_table(csv_path), run.path(".svg"), bifs, env_table, free=free.value)
    if br.status != "complete":
        raise NumericalFailure(f"continuation stopped early: {br.status}")
    return EXIT_OK


def _region_cell(args):
    from .codim2 import classify_region

    i, I, gamma, pd, horizon = args
    r = classify_region(I, gamma, OriginalParams.from_dict(pd), horizon=horizon)
    return i, I, gamma, r.region.value, r.n_equilibria, r.n_stable, r.cycle_present


def _pool_map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def cmd_codim2(ns, run: Run) -> int:
    from .codim2 import X_MAX, find_all_generalized_hopf, find_cusp, fold_curve, hopf_curve

    p = _planar(ns)
    run.params = {"A": p.A, "alpha": p.alpha}
    run.settings = {"n": ns.n, "regions": ns.regions, "I_range": ns.I_range, "gamma_range": ns.gamma_range,
                    "workers": ns.workers, "cycle_horizon": ns.cycle_horizon}
    x = np.linspace(0.0, X_MAX, ns.n + 2)[1:-1]
    fold = fold_curve(p, x)
    hopf = hopf_curve(p, x)
    header = ["x", "I", "gamma", "genuine"]
    fold_path = write_csv(run.path(".fold.csv"), header, [(q.x_eq, q.I, q.gamma, True) for q in fold])
    hopf_path = write_csv(run.path(".hopf.csv"), header, [(q.x_eq, q.I, q.gamma, q.genuine) for q in hopf])
    points = [find_cusp(p).to_dict()] + [g.to_dict() for g in find_all_generalized_hopf(p)]
    write_json(run.path(".points.json"), {"schema_version": SCHEMA_VERSION, "params": run.params,
                                          "points": points})
    reg_table = None
    if ns.regions:
        nI, nG = ns.regions
        Is = np.linspace(*ns.I_range, nI)
        Gs = np.linspace(*ns.gamma_range, nG)
        if Gs.min() <= 0:
            raise UsageError(f"invalid parameter: --gamma-range must stay > 0, got {ns.gamma_range}")
        jobs = [(i * nI + j, float(I), float(g), p.to_dict(), ns.cycle_horizon)
                for i, g in enumerate(Gs) for j, I in enumerate(Is)]
        rows = sorted(_pool_map(_region_cell, jobs, ns.workers))
        reg_path = write_csv(run.path(".regions.csv"),
                             ["index", "I", "gamma", "region", "n_equilibria", "n_stable", "cycle"], rows)
        reg_table = read_table(reg_path)
    if ns.svg:
        from .plotting import plot_codim2

        plot_codim2(read_table(fold_path), read_table(hopf_path), run.path(".svg"), points, reg_table)
    return EXIT_OK


def cmd_cusp(ns, run: Run) -> int:
    from .codim2 import find_cusp

    p = _planar(ns)
    run.params = {"A": p.A, "alpha": p.alpha}
    c = find_cusp(p).to_dict()
    write_json(run.path(".json"), {"schema_version": SCHEMA_VERSION, "params": run.params, "points": [c]})
    print(json.dumps(c, indent=2))
    return EXIT_OK


def cmd_gh(ns, run: Run) -> int:
    from .codim2 import find_all_generalized_hopf, hopf_l1_along_curve

    p = _planar(ns)
    run.params = {"A": p.A, "alpha": p.alpha}
    run.settings = {"side_offset": ns.side_offset}
    pts = []
    for g in find_all_generalized_hopf(p):
        d = g.to_dict()
        d["l1_left"] = hopf_l1_along_curve(g.x - ns.side_offset, p)
        d["l1_right"] = hopf_l1_along_curve(g.x + ns.side_offset, p)
        pts.append(d)
    if not pts:
        raise NumericalFailure("no sign change of l1 on the genuine Hopf locus")
    write_json(run.path(".json"), {"schema_version": SCHEMA_VERSION, "params": run.params, "points": pts})
    print(json.dumps(pts, indent=2))
    return EXIT_OK


def cmd_regions(ns, run: Run) -> int:
    from .codim2 import classify_region

    p = _planar(ns)
    run.params = p.to_dict()
    run.settings = {"cycle_horizon": ns.cycle_horizon}
    r = classify_region(p.I, p.gamma, p, horizon=ns.cycle_horizon)
    d = {"schema_version": SCHEMA_VERSION, **r.to_dict(), "equilibria": [e.to_dict() for e in r.equilibria],
         "cycle_widths": r.cycle_widths}
    write_json(run.path(".json"), d)
    print(json.dumps({k: d[k] for k in ("region", "n_equilibria", "n_stable", "cycle_present")}))
    return EXIT_OK


def _scenario_from(ns):
    from .simulate import Scenario, get_scenario

    if ns.scenario:
        try:
            base = get_scenario(ns.scenario)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    else:
        base = Scenario("custom", ImprovedParams())
    params = _forced(ns, base.params)
    kw = {"params": params}
    if ns.periods is not None:
        kw["n_periods"] = ns.periods
    if ns.transient is not None:
        kw["transient_fraction"] = ns.transient
    if ns.ic is not None:
        kw["initial_state"] = tuple(ns.ic)
    try:
        return replace(base, **kw)
    except ValueError as exc:
        raise _invalid(exc) from None


def cmd_simulate(ns, run: Run) -> int:
    from .simulate import run_scenario

    sc = _scenario_from(ns)
    run.params = sc.params.to_dict()
    run.settings = {"scenario": sc.name, "n_periods": sc.n_periods, "transient_fraction": sc.transient_fraction,
                    "initial_state": list(sc.initial_state), "rtol": ns.rtol, "atol": ns.atol}
    ts = run_scenario(sc, rtol=ns.rtol, atol=ns.atol)
    csv_path = write_csv(run.path(".csv"), ["t", "x", "y", "phi"],
                         (([t] + list(s)) for t, s in zip(ts.t, ts.states)))
    write_json(run.path(".json"), {"schema_version": SCHEMA_VERSION, **ts.meta, "expected": sc.expected,
                                   "note": sc.note})
    if ns.svg:
        from .plotting import plot_time_series

        plot_time_series(read_table(csv_path), run.path(".svg"), t_start=ts.meta["transient_end"],
                         title=f"{sc.name}: I0={sc.params.I0:g}, omega={sc.params.omega:g}")
    return EXIT_OK


def cmd_classify(ns, run: Run) -> int:
    from .classify import classify_activity
    from .simulate import TimeSeries, run_scenario

    if (ns.input is None) == (ns.scenario is None):
        raise UsageError("classify: give exactly one of --input or --scenario")
    if ns.scenario:
        sc = _scenario_from(ns)
        ts = run_scenario(sc, rtol=ns.rtol, atol=ns.atol)
        run.params = sc.params.to_dict()
        source = {"scenario": sc.name}
    else:
        tab = read_table(ns.input)
        missing = [c for c in ("t", "x") if c not in tab]
        if missing:
            raise UsageError(f"{ns.input}: missing column(s) {', '.join(missing)}")
        cols = [tab[c] for c in ("x", "y", "phi") if c in tab]
        meta_path = Path(ns.meta) if ns.meta else Path(ns.input).with_suffix(".json")
        meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.is_file() else {}
        if ns.meta and not meta_path.is_file():
            raise FileNotFoundError(f"no such file: {meta_path}")
        ts = TimeSeries(tab["t"], np.column_stack(cols), meta)
        run.params = meta.get("params", {})
        source = {"input": Path(ns.input).name}
    period = ns.forcing_period or ts.meta.get("forcing_period")
    if not period:
        raise UsageError("classify: forcing period unknown; pass --forcing-period or a meta JSON")
    if ns.transient_end is not None:
        ts.meta["transient_end"] = ns.transient_end
    run.settings = {**source, "forcing_period": period, "transient_end": ts.meta.get("transient_end"),
                    "rtol": ns.rtol, "atol": ns.atol}
    label = classify_activity(ts.post_transient(), float(period))
    d = {"schema_version": SCHEMA_VERSION, **label.to_dict(), "source": source}
    write_json(run.path(".json"), d)
    print(json.dumps({k: d[k] for k in ("kind", "n_per_burst", "spike_count", "strobe_period")}))
    return EXIT_OK


def _sweep_cell(args):
    from .classify import classify_activity
    from .simulate import Scenario, run_scenario

    i, value, sc_dict, name, rtol, atol = args
    params = ImprovedParams.from_dict(sc_dict["params"]).with_(**{name: value})
    sc = Scenario(sc_dict["name"], params, initial_state=tuple(sc_dict["initial_state"]),
                  n_periods=sc_dict["n_periods"], transient_fraction=sc_dict["transient_fraction"])
    ts = run_scenario(sc, rtol=rtol, atol=atol)
    lab = classify_activity(ts.post_transient(), sc.period)
    d = lab.to_dict()
    return (i, value, d["kind"], d["n_per_burst"], d["spike_count"], d["strobe_period"], d["subthreshold_count"])


def cmd_sweep(ns, run: Run) -> int:
    sc = _scenario_from(ns)
    if ns.param not in _FORCED_FLAGS:
        raise UsageError(f"--param: unknown parameter {ns.param!r}; choose from {', '.join(_FORCED_FLAGS)}")
    if ns.values:
        values = [float(v) for v in ns.values]
    elif ns.range:
        a, b, n = ns.range
        if not float(n).is_integer() or n < 1:
            raise UsageError(f"--range: count must be a positive integer, got {n!r}")
        values = [float(v) for v in np.linspace(a, b, int(n))]
    else:
        raise UsageError("sweep: give --values or --range")
    for v in values:
        try:
            sc.params.with_(**{ns.param: v})
        except ValueError as exc:
            raise _invalid(exc) from None
    run.params = sc.params.to_dict()
    run.settings = {"scenario": sc.name, "param": ns.param, "values": values, "workers": ns.workers,
                    "n_periods": sc.n_periods, "rtol": ns.rtol, "atol": ns.atol}
    jobs = [(i, v, sc.describe(), ns.param, ns.rtol, ns.atol) for i, v in enumerate(values)]
    rows = sorted(_pool_map(_sweep_cell, jobs, ns.workers))
    write_csv(run.path(".csv"), ["index", ns.param, "kind", "n_per_burst", "spike_count", "strobe_period",
                                 "subthreshold_count"], rows)
    return EXIT_OK


def cmd_scenario_list(ns, run: Run) -> int:
    from .simulate import SCENARIOS

    items = [sc.describe() for sc in SCENARIOS.values()]
    write_json(run.path(".json"), {"schema_version": SCHEMA_VERSION, "scenarios": items})
    for sc in SCENARIOS.values():
        p = sc.params
        n = f"({sc.n_per_burst})" if sc.n_per_burst else ""
        print(f"{sc.name:6s}  A={p.A:g} gamma={p.gamma:g} I0={p.I0:g} omega={p.omega:g} k={p.k:g}"
              f"  expected={sc.expected}{n}")
    return EXIT_OK


def cmd_render(ns, run: Run) -> int:
    from . import plotting

    run.settings = {"kind": ns.kind, "inputs": [Path(f).name for f in ns.inputs]}
    tables = [read_table(f) for f in ns.inputs]
    extra = json.loads(Path(ns.points).read_text(encoding="utf-8")) if ns.points else None
    out = run.path(".svg")
    if ns.kind == "timeseries":
        plotting.plot_time_series(tables[0], out, t_start=ns.t_start)
    elif ns.kind == "nullclines":
        plotting.plot_nullclines(tables[0], out, (extra or {}).get("equilibria"))
    elif ns.kind == "branch":
        env = tables[1] if len(tables) > 1 else None
        plotting.plot_branch(tables[0], out, (extra or {}).get("bifurcations"), env,
                             free=(extra or {}).get("free", "I"))
    else:
        if len(tables) < 2:
            raise UsageError("render codim2: needs the fold and Hopf CSV files")
        plotting.plot_codim2(tables[0], tables[1], out, (extra or {}).get("points"),
                             tables[2] if len(tables) > 2 else None)
    return EXIT_OK


def cmd_rerun(ns, run: Run) -> int:
    mpath = Path(ns.manifest)
    if not mpath.is_file():
        raise FileNotFoundError(f"no such file: {mpath}")
    man = json.loads(mpath.read_text(encoding="utf-8"))
    out = Path(ns.out) if ns.out else mpath.parent
    argv = list(man["argv"]) + ["--out", str(out)]
    status = main(argv)
    if status != EXIT_OK:
        return status
    bad = [o["path"] for o in man["outputs"] if not (out / o["path"]).is_file() or sha256(out / o["path"]) != o["sha256"]]
    if bad:
        print(f"rerun: outputs differ from the manifest: {', '.join(bad)}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"rerun: {len(man['outputs'])} output(s) reproduced byte-identically")
    return EXIT_OK


# ---------------------------------------------------------------- grammar


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=None,
                        help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--stem", default=None, help="output file stem (default: subcommand name)")

    solver = _Parser(add_help=False)
    solver.add_argument("--rtol", type=float, default=1e-9)
    solver.add_argument("--atol", type=float, default=1e-12)

    scen = _Parser(add_help=False)
    scen.add_argument("--scenario", default=None, help="named scenario (see `scenario list`)")
    scen.add_argument("--periods", type=_positive_int, default=None, help="horizon in forcing periods")
    scen.add_argument("--transient", type=float, default=None, help="fraction of the horizon discarded")
    scen.add_argument("--ic", type=float, nargs=3, default=None, metavar=("X", "Y", "PHI"))
    _add_forced(scen)

    parser = _Parser(prog="dmlneuron", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("nullclines", parents=[common], help="nullcline CSV and equilibria")
    _add_planar(p)
    p.add_argument("--x-min", type=float, default=-0.4)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--n", type=_positive_int, default=601)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_nullclines)

    p = sub.add_parser("equilibria", parents=[common], help="equilibria with stability")
    _add_planar(p)
    p.add_argument("--x-lo", type=float, default=-1.0)
    p.add_argument("--x-hi", type=float, default=1.5)
    p.add_argument("--grid", type=_positive_int, default=512)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("continue", parents=[common], help="equilibrium branch in I or gamma")
    _add_planar(p)
    p.add_argument("--free", choices=["I", "gamma"], default="I")
    p.add_argument("--from", dest="start", type=float, required=True, help="start value of the free parameter")
    p.add_argument("--to", dest="stop", type=float, required=True, help="end value of the free parameter")
    p.add_argument("--start-index", type=int, default=0, help="which start equilibrium, by increasing x")
    p.add_argument("--h-max", type=float, default=1e-2)
    p.add_argument("--envelope", type=int, default=0, help="number of cycle-envelope samples")
    p.add_argument("--cycle-horizon", type=float, default=3000.0)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("codim2", parents=[common], help="fold/Hopf loci, cusp, GH, region grid")
    _add_planar(p, gamma=None, I=None)
    p.add_argument("--n", type=_positive_int, default=2000, help="points per locus")
    p.add_argument("--regions", type=_positive_int, nargs=2, default=None, metavar=("N_I", "N_GAMMA"))
    p.add_argument("--I-range", type=float, nargs=2, default=(-0.02, 0.08), metavar=("LO", "HI"))
    p.add_argument("--gamma-range", type=float, nargs=2, default=(0.1, 0.35), metavar=("LO", "HI"))
    p.add_argument("--cycle-horizon", type=float, default=3000.0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_codim2)

    p = sub.add_parser("cusp", parents=[common], help="cusp point")
    _add_planar(p, gamma=None, I=None)
    p.set_defaults(func=cmd_cusp)

    p = sub.add_parser("gh", parents=[common], help="generalized Hopf points")
    _add_planar(p, gamma=None, I=None)
    p.add_argument("--side-offset", type=float, default=1e-3, help="x offset for the l1 sign report")
    p.set_defaults(func=cmd_gh)

    p = sub.add_parser("regions", parents=[common], help="region of one (I, gamma) point")
    _add_planar(p)
    p.add_argument("--cycle-horizon", type=float, default=3000.0)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("simulate", parents=[common, scen, solver], help="integrate the forced model")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", parents=[common, scen, solver], help="label a firing pattern")
    p.add_argument("--input", default=None, help="series CSV with columns t, x[, y, phi]")
    p.add_argument("--meta", default=None, help="meta JSON (default: the CSV path with .json)")
    p.add_argument("--forcing-period", type=float, default=None)
    p.add_argument("--transient-end", type=float, default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", parents=[common, scen, solver], help="simulate and classify over a parameter")
    p.add_argument("--param", required=True, help="forced-model parameter to vary, e.g. I0")
    p.add_argument("--values", nargs="+", type=float, default=None)
    p.add_argument("--range", nargs=3, type=float, default=None, metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenario", help="named scenarios")
    ssub = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    q = ssub.add_parser("list", parents=[common], help="print the named scenarios")
    q.set_defaults(func=cmd_scenario_list)

    p = sub.add_parser("render", parents=[common], help="SVG from data files")
    p.add_argument("kind", choices=["timeseries", "nullclines", "branch", "codim2"])
    p.add_argument("inputs", nargs="+", help="CSV files (branch: branch[, envelope]; codim2: fold hopf[, regions])")
    p.add_argument("--points", default=None, help="JSON with equilibria / bifurcations / points")
    p.add_argument("--t-start", type=float, default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("rerun", help="repeat a run from its manifest and check the outputs")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output directory (default: the manifest's directory)")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if ns.func is cmd_rerun:
        return _guarded(lambda: cmd_rerun(ns, None))
    name = ns.command if ns.command != "scenario" else f"scenario-{ns.action}"
    out = Path(ns.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    run = Run(name, _strip_out(argv), out, ns.stem or name)

    def body():
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        status = ns.func(ns, run)
        write_json(out / f"{run.stem}.manifest.json", run.manifest(time.perf_counter() - t0))
        return status

    return _guarded(body)


def _guarded(fn) -> int:
    from .simulate import IntegrationError

    try:
        return fn()
    except (UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, IntegrationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
