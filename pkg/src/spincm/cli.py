"""Command line front end: ``spincm simulate|verify|rmatrix|orbit --config scenario.json``.

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
failure, 4 tolerance violation.
"""
import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import tol_scale
from .dynamics import ENGINES, SimulationConfig, conserved_report, engine_agreement, simulate
from .errors import ConfigError, NotRegularError, SpinCMError, StructureError
from .lie import as_algebra
from .orbits import (
    OrbitSpec,
    OrbitPoint,
    minimal_orbit_normal_form,
    orbit_dimension,
    project_to_ann_m,
    spectrum,
)
from .reduction import ReducedPoint, embed_reduced, gauge_fix_spin, lax_matrix

log = logging.getLogger("spincm")

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOL = 0, 1, 2, 3, 4
COMMANDS = ("simulate", "verify", "rmatrix", "orbit")

SECTIONS = {
    "system": {"n", "orbit"},
    "initial": {"q", "p", "spin"},
    "run": {"t_end", "dt", "engine", "spin_sign", "sample_every", "drift_tol"},
    "output": {"dir", "plot_script", "raw_spin"},
    "verify": {"n", "seed", "samples", "weinstein_pairs", "reduced_pairs", "h"},
    "rmatrix": {"families", "n", "points", "seed", "h_step", "min_gap"},
    "orbit": {"seeds"},
}
REQUIRED = {"system": {"n", "orbit"}, "initial": {"q", "p", "spin"}, "run": {"t_end", "dt"}}

# projection-engine conservation tolerances; direct-engine agreement tolerance
SIM_TOLS = {"energy": 1e-10, "lax_eigenvalues": 1e-8, "lax_traces": 1e-8, "casimirs": 1e-8,
            "lax_vs_alpha0": 1e-8}
AGREEMENT_TOL = 1e-6
COLLAPSE_TOL = 1e-8
RMATRIX_TOL = 1e-7
VERIFY_FD_TOL = 1e-6
VERIFY_ALG_TOL = 1e-9


# ---------------------------------------------------------------- config

def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _reject_constant(name):
    raise ConfigError(f"non-standard JSON constant {name}")


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        raise
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    for name, section in doc.items():
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be an object")
        extra = set(section) - SECTIONS[name]
        if extra:
            raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(extra))}")
    return doc


def _require(doc, section):
    if section not in doc:
        raise ConfigError(f"missing section {section!r}")
    missing = REQUIRED.get(section, set()) - set(doc[section])
    if missing:
        raise ConfigError(f"missing key(s) in {section!r}: {', '.join(sorted(missing))}")
    return doc[section]


def _number(value, where, positive=False, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if integer:
        ok = ok and float(value).is_integer()
    if not ok or not math.isfinite(value):
        raise ConfigError(f"{where} must be a finite {'integer' if integer else 'number'}")
    if positive and not value > 0:
        raise ConfigError(f"{where} must be positive")
    return int(value) if integer else float(value)


def _vector(value, n, where):
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError(f"{where} must be a list of {n} numbers")
    return np.array([_number(v, f"{where}[{k}]") for k, v in enumerate(value)])


def _matrix(value, n, where):
    """Complex matrix given as {"re": [[...]], "im": [[...]]}; "im" defaults to zero."""
    if not isinstance(value, dict) or set(value) - {"re", "im"} or "re" not in value:
        raise ConfigError(f"{where} must be an object with keys 're' and optionally 'im'")

    def part(rows, label):
        if not isinstance(rows, list) or len(rows) != n:
            raise ConfigError(f"{where}.{label} must be {n} rows")
        return np.array([_vector(r, n, f"{where}.{label}[{i}]") for i, r in enumerate(rows)])

    re = part(value["re"], "re")
    im = part(value["im"], "im") if "im" in value else np.zeros((n, n))
    return re + 1j * im


def parse_orbit(system):
    n = _number(system["n"], "system.n", positive=True, integer=True)
    if n < 2:
        raise ConfigError("system.n must be at least 2")
    orbit = system["orbit"]
    if not isinstance(orbit, dict) or len(orbit) != 1 or set(orbit) - {"generator", "rank_one"}:
        raise ConfigError("system.orbit must have exactly one of 'generator' or 'rank_one'")
    try:
        if "generator" in orbit:
            return n, OrbitSpec(generator=as_algebra(_matrix(orbit["generator"], n,
                                                                 "system.orbit.generator")))
        r1 = orbit["rank_one"]
        if not isinstance(r1, dict) or set(r1) - {"v", "c"} or "v" not in r1:
            raise ConfigError("system.orbit.rank_one must be an object with 'v' and optional 'c'")
        v = _vector(r1["v"], n, "system.orbit.rank_one.v")
        spec = OrbitSpec.from_rank_one(v)
        if "c" in r1:
            c = _number(r1["c"], "system.orbit.rank_one.c", positive=True)
            if abs(c - spec.rank_one[1]) > 1e-12 * max(1.0, c):
                raise ConfigError(
                    f"system.orbit.rank_one.c = {c!r} violates tracelessness (need |v|^2/n = "
                    f"{spec.rank_one[1]!r})")
        return n, spec
    except StructureError as exc:
        raise ConfigError(f"system.orbit: {exc}") from None


def parse_initial(doc, n, spec, seed=None):
    initial = _require(doc, "initial")
    q = _vector(initial["q"], n, "initial.q")
    p = _vector(initial["p"], n, "initial.p")
    if np.any(np.diff(q) >= 0):
        raise ConfigError("initial.q must be strictly decreasing (chamber condition)")
    spin = initial["spin"]
    if not isinstance(spin, dict) or len(spin) != 1 or set(spin) - {"Z", "project_seed"}:
        raise ConfigError("initial.spin must have exactly one of 'Z' or 'project_seed'")
    if "Z" in spin:
        Z = _matrix(spin["Z"], n, "initial.spin.Z")
        try:
            OrbitPoint(value=as_algebra(Z), spec=spec).certify()
        except StructureError as exc:
            raise ConfigError(f"initial.spin.Z: {exc}") from None
    else:
        s = seed if seed is not None else _number(spin["project_seed"],
                                                  "initial.spin.project_seed", integer=True)
        Z = project_to_ann_m(spec, s).value
    Z, _ = gauge_fix_spin(Z)
    try:
        return ReducedPoint(q=q, p=p, Z=Z, gauge="row1-real")
    except (StructureError, NotRegularError) as exc:
        raise ConfigError(f"initial: {exc}") from None


def parse_run(doc, n, initial):
    run = _require(doc, "run")
    engine = run.get("engine", "projection")
    if engine not in ENGINES + ("both",):
        raise ConfigError(f"run.engine must be one of {ENGINES + ('both',)}")
    sign = run.get("spin_sign", "auto")
    if sign not in (1, -1, "auto"):
        raise ConfigError("run.spin_sign must be 1, -1 or \"auto\"")
    t_end = _number(run["t_end"], "run.t_end", positive=True)
    dt = _number(run["dt"], "run.dt", positive=True)
    every = _number(run.get("sample_every", 1), "run.sample_every", positive=True, integer=True)
    drift = _number(run.get("drift_tol", 1e-6), "run.drift_tol", positive=True)
    engines = ENGINES if engine == "both" else (engine,)
    try:
        return [SimulationConfig(n=n, initial=initial, t_end=t_end, dt=dt, engine=e,
                                 spin_sign=sign, sample_every=every, drift_tol=drift)
                for e in engines]
    except ValueError as exc:
        raise ConfigError(f"run: {exc}") from None


def _output_options(doc, args):
    out = doc.get("output", {})
    directory = args.out or out.get("dir", ".")
    plot = out.get("plot_script", False)
    raw = args.raw_spin or out.get("raw_spin", False)
    if not isinstance(plot, bool) or not isinstance(raw, bool):
        raise ConfigError("output.plot_script and output.raw_spin must be booleans")
    if not isinstance(directory, str):
        raise ConfigError("output.dir must be a string")
    return directory, plot, raw


# ---------------------------------------------------------------- output

def _fmt(x):
    return "%.17g" % x


def csv_header(n, raw_spin=False):
    cols = ["t"] + [f"q_{i}" for i in range(1, n + 1)] + [f"p_{i}" for i in range(1, n + 1)]
    cols += ["energy"] + [f"lax_eig_{i}" for i in range(1, n + 1)]
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    cols += [f"spin_mod2_{i}{j}" for i, j in pairs]
    if raw_spin:
        for i, j in pairs:
            cols += [f"gauge_dependent_Z_re_{i}{j}", f"gauge_dependent_Z_im_{i}{j}"]
    return cols


def trajectory_rows(traj, raw_spin=False):
    n = traj.points[0].n
    iu = np.triu_indices(n, 1)
    energy = traj.diagnostics["energy"]
    eigs = traj.diagnostics["lax_eigenvalues"]
    for k, (t, r) in enumerate(zip(traj.times, traj.points)):
        row = [t, *r.q, *r.p, energy[k], *eigs[k], *r.spin_moduli()]
        if raw_spin:
            for z in r.Z[iu]:
                row += [z.real, z.imag]
        yield row


def write_csv(path, traj, raw_spin=False):
    n = traj.points[0].n
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(csv_header(n, raw_spin)) + "\n")
        for row in trajectory_rows(traj, raw_spin):
            fh.write(",".join(_fmt(float(x)) for x in row) + "\n")


def write_plot_script(path, csv_names, n):
    lines = ["set datafile separator ','", "set key autotitle columnhead", "set xlabel 't'"]
    for name in csv_names:
        stem = os.path.splitext(name)[0]
        lines.append(f"set output '{stem}_q.png'")
        lines.append("set terminal pngcairo")
        plots = ", ".join(f"'{name}' using 1:{k + 2} with lines" for k in range(n))
        lines.append(f"plot {plots}")
        lines.append(f"set output '{stem}_energy.png'")
        lines.append(f"plot '{name}' using 1:{2 * n + 2} with lines")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------- commands

def run_simulate(doc, args):
    n, spec = parse_orbit(_require(doc, "system"))
    initial = parse_initial(doc, n, spec, args.seed)
    cfgs = parse_run(doc, n, initial)
    directory, plot, raw = _output_options(doc, args)

    alpha0 = embed_reduced(initial).alpha
    free_eigs = np.linalg.eigvalsh(alpha0)
    trajs, drifts, tol = {}, {}, tol_scale()
    violations = []
    for cfg in cfgs:
        traj = simulate(cfg)
        trajs[cfg.engine] = traj
        d = conserved_report(traj).as_dict()
        d["lax_vs_alpha0"] = float(np.max(np.abs(
            traj.diagnostics["lax_eigenvalues"] - free_eigs[None, :])))
        if cfg.engine == "direct":
            d["structural"] = traj.structural_drift
            d["spin_sign"] = traj.spin_sign
        else:
            violations += [f"projection {k} drift {d[k]:.3e} > {SIM_TOLS[k] * tol:g}"
                           for k in SIM_TOLS if d[k] > SIM_TOLS[k] * tol]
        drifts[cfg.engine] = d

    agreement = None
    if len(trajs) == 2:
        agreement = engine_agreement(trajs["projection"], trajs["direct"])
        violations += [f"engine agreement {k} {v:.3e} > {AGREEMENT_TOL * tol:g}"
                       for k, v in agreement.items() if v > AGREEMENT_TOL * tol]

    os.makedirs(directory, exist_ok=True)
    names = []
    for engine, traj in trajs.items():
        name = f"trajectory_{engine}.csv"
        write_csv(os.path.join(directory, name), traj, raw)
        names.append(name)
    if plot:
        write_plot_script(os.path.join(directory, "trajectory.gp"), names, n)
    report = {
        "scenario": doc,
        "drifts": drifts,
        "engine_agreement": agreement,
        "status": "ok" if not violations else "tolerance_violation",
        "violations": violations,
        "outputs": names,
    }
    return report, directory, bool(violations)


def run_verify(doc, args):
    from .verify import check_connection_identities, reduced_form_suite, weinstein_suite

    sec = doc.get("verify", {})
    n_default = doc["system"]["n"] if "system" in doc and "n" in doc["system"] else 3
    n = _number(sec.get("n", n_default), "verify.n", positive=True, integer=True)
    if n < 2:
        raise ConfigError("verify.n must be at least 2")
    seed = args.seed if args.seed is not None else _number(sec.get("seed", 0), "verify.seed",
                                                           integer=True)
    samples = _number(sec.get("samples", 100), "verify.samples", positive=True, integer=True)
    wp = _number(sec.get("weinstein_pairs", 50), "verify.weinstein_pairs", positive=True,
                 integer=True)
    rp = _number(sec.get("reduced_pairs", 30), "verify.reduced_pairs", positive=True,
                 integer=True)
    h = _number(sec.get("h", 1e-5), "verify.h", positive=True)
    tol = tol_scale()

    conn = check_connection_identities(n, seed, samples, VERIFY_ALG_TOL * tol)
    wein = weinstein_suite(n, seed + 1, wp, h)
    red, skipped = reduced_form_suite(n, seed + 2, rp, h)
    w_max = max(c.residual for _, c in wein)
    r_max = max(c.residual for c in red)
    violations = [f"connection {k} {v:.3e}" for k, v in conn.residuals.items()
                  if v > VERIFY_ALG_TOL * tol]
    if w_max > VERIFY_FD_TOL * tol:
        violations.append(f"weinstein form residual {w_max:.3e}")
    if r_max > VERIFY_FD_TOL * tol:
        violations.append(f"reduced form residual {r_max:.3e}")
    results = {
        "n": n, "seed": seed,
        "connection_identities": conn.residuals,
        "min_inertia_eigenvalue": conn.min_inertia_eigenvalue,
        "weinstein_form": {"pairs": wp, "vertical_pairs": sum(v for v, _ in wein),
                           "max_residual": w_max},
        "reduced_form": {"pairs": rp, "skipped": skipped, "max_residual": r_max},
    }
    return _aux_report(doc, results, violations), _out_dir(doc, args), bool(violations)


def run_rmatrix(doc, args):
    from .rmatrix import FAMILIES, casimir_tensor, cdybe_check, make_r, r21

    sec = doc.get("rmatrix", {})
    families = sec.get("families", list(FAMILIES))
    if not isinstance(families, list) or any(f not in FAMILIES for f in families):
        raise ConfigError(f"rmatrix.families must be a list drawn from {FAMILIES}")
    ns = sec.get("n", [2, 3])
    if not isinstance(ns, list) or not ns:
        raise ConfigError("rmatrix.n must be a non-empty list of integers")
    ns = [_number(v, "rmatrix.n[]", positive=True, integer=True) for v in ns]
    if min(ns) < 2 or max(ns) > 4:
        raise ConfigError("rmatrix.n entries must lie in 2..4")
    points = _number(sec.get("points", 20), "rmatrix.points", positive=True, integer=True)
    seed = args.seed if args.seed is not None else _number(sec.get("seed", 0), "rmatrix.seed",
                                                           integer=True)
    h = _number(sec.get("h_step", 1e-5), "rmatrix.h_step", positive=True)
    gap = _number(sec.get("min_gap", 0.5), "rmatrix.min_gap", positive=True)
    tol = tol_scale()

    rng = np.random.default_rng(seed)
    rows, violations = [], []
    for family in families:
        for n in ns:
            worst, conventions, sym = 0.0, set(), 0.0
            for _ in range(points):
                q = random_regular_base(n, rng, gap)
                res, conv = cdybe_check(family, n, q, h, RMATRIX_TOL * tol)
                worst = max(worst, res)
                conventions.add(conv)
                r = make_r(family, n, q)
                target = casimir_tensor(n).tensor if family == "trigonometric" else 0.0
                sym = max(sym, float(np.max(np.abs(r.tensor + r21(r.tensor, n) - target))))
            conv = conventions.pop() if len(conventions) == 1 else "inconsistent"
            rows.append({"family": family, "n": n, "points": points, "max_residual": worst,
                         "convention": conv, "symmetric_part_residual": sym})
            if worst > RMATRIX_TOL * tol or conv in (None, "inconsistent"):
                violations.append(f"{family} n={n}: CDYBE residual {worst:.3e} ({conv})")
            if sym > 1e-12 * tol:
                violations.append(f"{family} n={n}: r + r21 residual {sym:.3e}")
    for row in rows:
        print(f"{row['family']:>13s}  n={row['n']}  max residual {row['max_residual']:.3e}  "
              f"convention {row['convention']}")
    return _aux_report(doc, {"table": rows}, violations), _out_dir(doc, args), bool(violations)


def random_regular_base(n, rng, min_gap):
    """Decreasing base point with all root values at least ``min_gap`` in modulus."""
    while True:
        q = np.sort(rng.uniform(-n, n, size=n))[::-1]
        if np.min(-np.diff(q)) >= min_gap:
            return q


def run_orbit(doc, args):
    n, spec = parse_orbit(_require(doc, "system"))
    sec = doc.get("orbit", {})
    seeds = _number(sec.get("seeds", 5), "orbit.seeds", positive=True, integer=True)
    base = args.seed if args.seed is not None else 0
    tol = tol_scale()
    violations = []

    samples = [project_to_ann_m(spec, base + k) for k in range(seeds)]
    results = {
        "n": n,
        "spectrum": spectrum(spec.generator).tolist(),
        "dimension": orbit_dimension(spec.generator),
        "ann_m_sample": {"re": samples[0].value.real.tolist(),
                         "im": samples[0].value.imag.tolist()},
        "max_spectrum_residual": max(s.spectrum_residual() for s in samples),
        "max_diagonal": max(float(np.max(np.abs(np.diag(s.value)))) for s in samples),
    }
    if spec.is_minimal_balanced():
        c = spec.rank_one[1]
        iu = np.triu_indices(n, 1)
        dev = max(float(np.max(np.abs(np.abs(s.value[iu]) ** 2 - c ** 2))) for s in samples)
        normal = minimal_orbit_normal_form(spec)
        results["minimal_collapse"] = {"c": c, "max_modulus_deviation": dev,
                                       "normal_form_spectrum_residual":
                                           normal.spectrum_residual()}
        if dev > COLLAPSE_TOL * tol:
            violations.append(f"minimal-orbit collapse deviation {dev:.3e}")
    if results["max_spectrum_residual"] > 1e-8 * tol:
        violations.append("sample off the orbit")
    return _aux_report(doc, results, violations), _out_dir(doc, args), bool(violations)


def _out_dir(doc, args):
    out = doc.get("output", {})
    return args.out or out.get("dir", ".")


def _aux_report(doc, results, violations):
    return {
        "scenario": doc,
        "drifts": {},
        "engine_agreement": None,
        "status": "ok" if not violations else "tolerance_violation",
        "violations": violations,
        "results": results,
    }


RUNNERS = {"simulate": run_simulate, "verify": run_verify, "rmatrix": run_rmatrix,
           "orbit": run_orbit}


def build_parser():
    parser = argparse.ArgumentParser(prog="spincm", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, help="override every seed in the scenario")
    parser.add_argument("--raw-spin", action="store_true",
                        help="also write gauge-dependent Z entries to the CSV")
    parser.add_argument("--timing", action="store_true",
                        help="record wall-clock time in the report (breaks byte-determinism)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        doc = load_config(args.config)
        report, directory, violated = RUNNERS[args.command](doc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpinCMError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start
    if args.timing:
        report["wall_clock_s"] = elapsed
    try:
        os.makedirs(directory, exist_ok=True)
        name = "report.json" if args.command == "simulate" else f"{args.command}_report.json"
        write_report(os.path.join(directory, name), _jsonable(report))
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.command}: {report['status']} ({elapsed:.2f} s)", file=sys.stderr)
    for v in report["violations"]:
        print(f"  violation: {v}", file=sys.stderr)
    return EXIT_TOL if violated else EXIT_OK


def main():
    sys.exit(run_command(sys.argv[1:]))
