"""Command-line entry point binding the modules into reproducible runs.

Each subcommand reads a flat JSON configuration (every key optional, unknown
or inapplicable keys rejected), merges it over the defaults and the command
line flags, writes the resolved configuration next to its outputs, and stamps
every artifact with a header carrying the package version, a hash of the
resolved configuration, and the seed. Runs are bit-for-bit reproducible from
(config, seed): no artifact contains a timestamp, and all randomness flows
through counter-based generators keyed by the seed.

Exit codes: 0 when every declared check of the subcommand passed, 1 when a
check failed, 2 for configuration or usage errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .equilibrium import (ConvergenceError, PotentialSpec, solve_equilibrium)
from .fluctuations import (closed_form_v0, interpolation_check,
                           variance_report, variance_solve)
from .gibbs import (ChainSpec, generator_identity_gap, linear_statistics,
                    sample, sample_batch)
from .spectral import assemble, eigensystem, weyl_fit
from .torus import TrigSeries
from .transport import concentration_experiment

_COMMON = ("potential", "psi", "beta", "K", "M", "tol", "out_dir")
_ALLOWED = {
    "equilibrium": _COMMON,
    "spectrum": _COMMON + ("K_op", "j_min", "j_max"),
    "variance": _COMMON + ("K_op",),
    "interpolate": _COMMON + ("K_op", "beta_grid", "witness_floor"),
    "sample": _COMMON + ("N", "algorithm", "step_size", "n_steps",
                         "burn_in", "thinning"),
    "clt": _COMMON + ("N", "algorithm", "step_size", "burn_in", "n_chains",
                      "K_op"),
    "concentration": _COMMON + ("N", "algorithm", "step_size", "burn_in",
                                "n_samples", "r_grid"),
    "generator-check": _COMMON + ("N", "n_configs", "gap_tol"),
}
_DEFAULTS = {
    "potential": {"preset": "zero"},
    "psi": {"cos": [1.0]},
    "beta": 1.0,
    "K": 256,
    "M": 1024,
    "tol": 1e-10,
    "K_op": None,
    "N": 200,
    "algorithm": "MH",
    "step_size": None,
    "n_steps": 1000,
    "burn_in": 100,
    "thinning": 10,
    "n_chains": 2000,
    "n_samples": 2000,
    "r_grid": [0.6, 0.8, 1.0, 1.2],
    "n_configs": 100,
    "gap_tol": 1e-10,
    "beta_grid": None,
    "witness_floor": 100.0,
    "j_min": None,
    "j_max": None,
    "out_dir": "htcg-out",
}


class ConfigError(ValueError):
    """Configuration violates the schema (maps to exit code 2)."""


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _as_number(val, key, lo=None):
    _need(isinstance(val, (int, float)) and not isinstance(val, bool),
          "%s must be a number" % key)
    v = float(val)
    _need(np.isfinite(v), "%s must be finite" % key)
    if lo is not None:
        _need(v >= lo, "%s must be >= %g" % (key, lo))
    return v


def _as_int(val, key, lo=None):
    _need(isinstance(val, int) and not isinstance(val, bool),
          "%s must be an integer" % key)
    if lo is not None:
        _need(val >= lo, "%s must be >= %d" % (key, lo))
    return int(val)


def _as_number_list(val, key, min_len=1):
    _need(isinstance(val, list) and len(val) >= min_len,
          "%s must be a list of at least %d numbers" % (key, min_len))
    return [_as_number(v, key + " entry") for v in val]


def _parse_series(obj, key):
    _need(isinstance(obj, dict), "%s must be an object" % key)
    _need(set(obj) <= {"cos", "sin"} and obj,
          "%s takes keys 'cos' and 'sin'" % key)
    a = [_as_number(v, key + ".cos entry") for v in obj.get("cos", [])]
    b = [_as_number(v, key + ".sin entry") for v in obj.get("sin", [])]
    _need(len(a) + len(b) > 0, "%s needs at least one coefficient" % key)
    return TrigSeries.from_cos_sin(0.0, a, b)


def _parse_potential(obj):
    _need(isinstance(obj, dict), "potential must be an object")
    if "preset" in obj:
        preset = obj["preset"]
        if preset == "zero":
            _need(set(obj) == {"preset"}, "preset 'zero' takes no parameters")
            return PotentialSpec.zero()
        if preset == "cosine":
            _need(set(obj) <= {"preset", "a", "b"},
                  "preset 'cosine' takes parameters a, b")
            return PotentialSpec.cosine(
                _as_number(obj.get("a", 1.0), "potential.a"),
                _as_number(obj.get("b", 0.0), "potential.b"))
        raise ConfigError("unknown potential preset %r" % (preset,))
    return PotentialSpec(_parse_series(obj, "potential"))


def resolve_config(command, raw, args):
    """Merge defaults <- file <- flags; validate; return the resolved dict."""
    _need(isinstance(raw, dict), "configuration root must be a JSON object")
    allowed = _ALLOWED[command]
    for key in raw:
        _need(key in _DEFAULTS, "unknown configuration key %r" % (key,))
        _need(key in allowed,
              "key %r does not apply to command %r" % (key, command))
    cfg = {k: _DEFAULTS[k] for k in allowed}
    cfg.update(raw)

    _parse_potential(cfg["potential"])
    _parse_series(cfg["psi"], "psi")
    cfg["beta"] = _as_number(cfg["beta"], "beta", lo=0.0)
    cfg["K"] = _as_int(cfg["K"], "K", lo=8)
    cfg["M"] = _as_int(cfg["M"], "M", lo=32)
    _need(cfg["M"] >= 4 * cfg["K"], "need M >= 4 K")
    cfg["tol"] = _as_number(cfg["tol"], "tol", lo=0.0)
    if "K_op" in allowed:
        if cfg["K_op"] is None:
            cfg["K_op"] = min(64, cfg["K"] // 2)
        cfg["K_op"] = _as_int(cfg["K_op"], "K_op", lo=1)
        _need(cfg["K_op"] <= cfg["K"] // 2, "need K_op <= K/2")
    if "N" in allowed:
        cfg["N"] = _as_int(cfg["N"], "N", lo=1)
    if "algorithm" in allowed:
        _need(cfg["algorithm"] in ("MH", "MALA", "IID0"),
              "algorithm must be MH, MALA or IID0")
        _need(cfg["algorithm"] != "IID0" or cfg["beta"] == 0.0,
              "IID0 requires beta = 0")
        if cfg["step_size"] is not None:
            cfg["step_size"] = _as_number(cfg["step_size"], "step_size")
            _need(cfg["step_size"] > 0, "step_size must be positive")
    for key, lo in (("n_steps", 1), ("burn_in", 0), ("thinning", 1),
                    ("n_chains", 2), ("n_samples", 2), ("n_configs", 1)):
        if key in allowed:
            cfg[key] = _as_int(cfg[key], key, lo=lo)
    if "r_grid" in allowed:
        cfg["r_grid"] = _as_number_list(cfg["r_grid"], "r_grid")
    if "gap_tol" in allowed:
        cfg["gap_tol"] = _as_number(cfg["gap_tol"], "gap_tol", lo=0.0)
    if "beta_grid" in allowed and cfg["beta_grid"] is not None:
        grid = _as_number_list(cfg["beta_grid"], "beta_grid", min_len=2)
        _need(all(b > 0 for b in grid) and grid == sorted(grid),
              "beta_grid must be positive and ascending")
        cfg["beta_grid"] = grid
    if "witness_floor" in allowed:
        cfg["witness_floor"] = _as_number(cfg["witness_floor"],
                                          "witness_floor", lo=0.0)
    for key in ("j_min", "j_max"):
        if key in allowed and cfg[key] is not None:
            cfg[key] = _as_int(cfg[key], key, lo=1)
    if "j_min" in allowed:
        _need(cfg.get("K_op", 2) >= 2, "need K_op >= 2 for the growth fit")
        jmin = cfg["j_min"] if cfg["j_min"] is not None else cfg["K_op"] // 2
        jmax = cfg["j_max"] if cfg["j_max"] is not None else cfg["K_op"]
        _need(jmin < jmax <= cfg["K_op"],
              "need j_min < j_max <= K_op for the growth fit window")
    _need(isinstance(cfg["out_dir"], str) and cfg["out_dir"],
          "out_dir must be a nonempty string")

    if args.out is not None:
        cfg["out_dir"] = args.out
    cfg["command"] = command
    cfg["seed"] = args.seed
    cfg["workers"] = args.workers
    cfg["strict"] = bool(args.strict)
    return cfg


def _config_hash(cfg):
    """Hash of the resolved configuration.  The output path, worker count,
    and strictness are excluded: none of them change the numbers, so the
    same experiment hashes identically however it is scheduled or where
    it is written."""
    skip = ("out_dir", "workers", "strict")
    payload = {k: v for k, v in cfg.items() if k not in skip}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class Run:
    """Output directory, metadata stamp, and the declared-check ledger."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.out = cfg["out_dir"]
        os.makedirs(self.out, exist_ok=True)
        self.meta = {
            "version": __version__,
            "config_hash": _config_hash(cfg),
            "seed": cfg["seed"],
        }
        self.checks = []
        with open(os.path.join(self.out, "resolved_config.json"), "w") as fh:
            json.dump(cfg, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def check(self, name, ok, detail):
        self.checks.append((name, bool(ok), detail))
        print("check %-28s %s  (%s)" % (name, "pass" if ok else "FAIL",
                                        detail))

    def write_json(self, name, payload):
        path = os.path.join(self.out, name)
        body = {"meta": self.meta}
        body.update(payload)
        with open(path, "w") as fh:
            json.dump(body, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return path

    def write_csv(self, name, header, rows):
        path = os.path.join(self.out, name)
        with open(path, "w") as fh:
            for k, v in self.meta.items():
                fh.write("# %s=%s\n" % (k, v))
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_csv_cell(v) for v in row) + "\n")
        return path

    def passed(self):
        return all(ok for _, ok, _ in self.checks)


def _csv_cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    return "%.17g" % v


def _solve(cfg, beta=None):
    return solve_equilibrium(_parse_potential(cfg["potential"]),
                             cfg["beta"] if beta is None else beta,
                             tol=cfg["tol"], K=cfg["K"], M=cfg["M"])


def _chain_spec(cfg, **over):
    kw = dict(N=cfg["N"], beta=cfg["beta"],
              potential=_parse_potential(cfg["potential"]),
              algorithm=cfg["algorithm"], step_size=cfg["step_size"],
              burn_in=cfg["burn_in"], seed=cfg["seed"])
    kw.update(over)
    try:
        return ChainSpec(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc))


def cmd_equilibrium(run):
    cfg = run.cfg
    eq = _solve(cfg)
    run.write_csv("rho.csv", ("x", "rho"),
                  zip(eq.density.rho_grid.x, eq.rho))
    run.write_json("equilibrium.json", {
        "beta": eq.beta, "K": eq.K, "M": eq.M,
        "C_prime": eq.C_prime,
        "residual_sup": eq.residual_sup,
        "iterations": eq.iterations,
        "min_rho": float(np.min(eq.rho)),
        "max_rho": float(np.max(eq.rho)),
    })
    print("beta=%g residual=%.3e C'=%.12g min rho=%.6g iterations=%d"
          % (eq.beta, eq.residual_sup, eq.C_prime, float(np.min(eq.rho)),
             eq.iterations))
    run.check("el_residual", eq.residual_sup <= cfg["tol"],
              "%.3e <= %g" % (eq.residual_sup, cfg["tol"]))


def cmd_spectrum(run):
    cfg = run.cfg
    eq = _solve(cfg)
    model = assemble(eq, cfg["K_op"])
    es = eigensystem(model)
    j_min = cfg["j_min"] if cfg["j_min"] is not None else max(1, cfg["K_op"] // 2)
    j_max = cfg["j_max"] if cfg["j_max"] is not None else cfg["K_op"]
    wf = weyl_fit(es, j_min, j_max)
    run.write_csv("eigenvalues.csv", ("j", "kappa"),
                  [(j + 1, k) for j, k in enumerate(es.kappas)])
    run.write_json("spectrum.json", {
        "K_op": cfg["K_op"],
        "kappa_head": [float(v) for v in es.kappas[:10]],
        "ortho_residual": float(es.ortho_residual),
        "asym_defect": float(model.asym_defect),
        "weyl": {"alpha_hat": wf.alpha_hat, "spread": wf.spread,
                 "j_min": wf.j_min, "j_max": wf.j_max},
    })
    print("kappa[1..6] = %s" % " ".join("%.9g" % v for v in es.kappas[:6]))
    print("weyl alpha_hat=%.6g spread=%.3g over j in [%d, %d]"
          % (wf.alpha_hat, wf.spread, wf.j_min, wf.j_max))
    run.check("spd_model", model.asym_defect <= 1e-8,
              "asymmetry defect %.3e" % model.asym_defect)
    run.check("orthonormality", es.ortho_residual <= 1e-8,
              "residual %.3e" % es.ortho_residual)


def cmd_variance(run):
    cfg = run.cfg
    eq = _solve(cfg)
    psi = _parse_series(cfg["psi"], "psi")
    rep = variance_report(psi, eq, K_op=cfg["K_op"])
    payload = rep.to_json_dict()
    print("sigma^2 eigen route  = %.12g" % rep.sigma2_eigen)
    print("sigma^2 solve route  = %.12g" % rep.sigma2_solve)
    run.check("route_agreement", rep.route_gap <= 1e-8,
              "relative gap %.3e" % rep.route_gap)
    V = _parse_potential(cfg["potential"])
    if V.is_zero:
        cf = closed_form_v0(psi, cfg["beta"])
        payload["sigma2_closed_form"] = cf
        print("sigma^2 closed form  = %.12g" % cf)
        gap = abs(rep.sigma2_solve - cf) / max(abs(cf), 1e-300)
        run.check("closed_form_agreement", gap <= 1e-8,
                  "relative gap %.3e" % gap)
    run.write_json("variance.json", payload)


def cmd_interpolate(run):
    cfg = run.cfg
    psi = _parse_series(cfg["psi"], "psi")
    V = _parse_potential(cfg["potential"])
    table = interpolation_check(psi, V, beta_grid=cfg["beta_grid"],
                                K=cfg["K"], M=cfg["M"], tol=cfg["tol"],
                                K_op=cfg["K_op"],
                                witness_floor=cfg["witness_floor"])
    cols = ("beta", "sigma2", "beta_sigma2", "l2_target", "h_half_target",
            "beta_min_rho")
    run.write_csv("interpolation.csv", cols,
                  [[r[c] for c in cols] for r in table.rows])
    report = table.endpoint_report()
    run.write_json("endpoints.json", report)
    print("beta sweep: %d points in [%g, %g]"
          % (len(table.rows), table.rows[0]["beta"], table.rows[-1]["beta"]))
    print("low end  gap %.3g%% of L2 target" % (100 * report["low_gap_rel"]))
    if report["high_abstained"]:
        print("high end abstained: witness beta*min rho = %.3g below %g"
              % (report["high_witness"], table.witness_floor))
    else:
        print("high end gap %.3g%% of H^{1/2} target"
              % (100 * report["high_gap_rel"]))
    sig = [r["sigma2"] for r in table.rows]
    mono = all(b <= a * (1 + 1e-12) for a, b in zip(sig, sig[1:]))
    run.check("sigma2_monotone", mono, "non-increasing along the grid")


def cmd_sample(run):
    cfg = run.cfg
    eq = _solve(cfg)
    psi = _parse_series(cfg["psi"], "psi")
    spec = _chain_spec(cfg, n_steps=cfg["n_steps"], thinning=cfg["thinning"])
    res = sample(spec)
    series = linear_statistics(res, psi, eq, seed_base=cfg["seed"])
    run.write_csv("samples.csv",
                  ["x%d" % j for j in range(spec.N)], res.configs)
    payload = series.to_json_dict()
    payload["acceptance"] = res.acceptance
    payload["step_size"] = res.step_size
    payload["sampler_warnings"] = list(res.warnings)
    run.write_json("stats.json", payload)
    s = series.summary
    print("kept %d states  acceptance %.3f  step %s"
          % (len(res), res.acceptance,
             "%.4g" % res.step_size if res.step_size else "n/a"))
    print("nu_N(psi): mean %.4f  variance %.4f" % (s["mean"], s["variance"]))
    run.check("chain_completed", len(res) == spec.n_steps // spec.thinning,
              "%d retained" % len(res))
    for w in res.warnings:
        warnings.warn(w)


def cmd_clt(run):
    cfg = run.cfg
    eq = _solve(cfg)
    psi = _parse_series(cfg["psi"], "psi")
    sigma2 = variance_solve(psi, assemble(eq, cfg["K_op"]))
    spec = _chain_spec(cfg, n_steps=1)
    samples = sample_batch(spec, cfg["n_chains"], workers=cfg["workers"])
    series = linear_statistics(samples, psi, eq, seed_base=cfg["seed"])
    s = series.summary
    n = cfg["n_chains"]
    se_var = s["variance"] * np.sqrt(2.0 / (n - 1))
    var_tol = max(3.0 * se_var, 0.02)
    run.write_json("clt.json", {
        "target_sigma2": sigma2,
        "summary": s,
        "n_chains": n,
        "var_tolerance": var_tol,
    })
    print("target sigma^2 = %.8g   sample variance = %.8g (n = %d)"
          % (sigma2, s["variance"], n))
    print("mean = %.5f (3 SE = %.5f)   normality p = %.4f"
          % (s["mean"], 3 * s["stderr"], s["normality_p"]))
    run.check("variance_match", abs(s["variance"] - sigma2) <= var_tol,
              "|%.5g - %.5g| <= %.5g" % (s["variance"], sigma2, var_tol))
    run.check("mean_centered", abs(s["mean"]) <= 3 * s["stderr"],
              "|%.4g| <= %.4g" % (s["mean"], 3 * s["stderr"]))
    run.check("normality", s["normality_p"] > 0.01,
              "p = %.4f" % s["normality_p"])


def cmd_concentration(run):
    cfg = run.cfg
    eq = _solve(cfg)
    spec = _chain_spec(cfg, n_steps=1)
    rows, w1 = concentration_experiment(spec, eq, cfg["r_grid"],
                                        n_samples=cfg["n_samples"],
                                        workers=cfg["workers"])
    run.write_csv("concentration.csv",
                  ("r", "empirical_freq", "theorem_bound", "vacuous_flag"),
                  [[r["r"], r["empirical_freq"], r["theorem_bound"],
                    r["vacuous_flag"]] for r in rows])
    run.write_json("concentration.json", {
        "rows": rows,
        "w1_median": float(np.median(w1)),
        "w1_max": float(np.max(w1)),
        "n_samples": cfg["n_samples"],
    })
    print("W1 median %.4f  max %.4f over %d samples"
          % (float(np.median(w1)), float(np.max(w1)), cfg["n_samples"]))
    violations = [r for r in rows
                  if not r["vacuous_flag"]
                  and r["empirical_freq"] > r["theorem_bound"]]
    for r in rows:
        print("r=%.3g freq=%.4g bound=%.4g%s"
              % (r["r"], r["empirical_freq"], r["theorem_bound"],
                 "  (vacuous)" if r["vacuous_flag"] else ""))
    run.check("tail_bound", not violations,
              "%d non-vacuous rows violated" % len(violations))


def cmd_generator_check(run):
    cfg = run.cfg
    eq = _solve(cfg)
    psi = _parse_series(cfg["psi"], "psi")
    rng = np.random.default_rng(cfg["seed"])
    gaps = np.array([generator_identity_gap(
        rng.uniform(0.0, 2.0 * np.pi, cfg["N"]), psi, eq)
        for _ in range(cfg["n_configs"])])
    run.write_json("generator.json", {
        "n_configs": cfg["n_configs"],
        "N": cfg["N"],
        "gap_max": float(np.max(gaps)),
        "gap_median": float(np.median(gaps)),
        "gap_tol": cfg["gap_tol"],
    })
    print("identity gap over %d configurations: max %.3e median %.3e"
          % (cfg["n_configs"], float(np.max(gaps)), float(np.median(gaps))))
    run.check("generator_identity", float(np.max(gaps)) <= cfg["gap_tol"],
              "max %.3e <= %g" % (float(np.max(gaps)), cfg["gap_tol"]))


_COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "spectrum": cmd_spectrum,
    "variance": cmd_variance,
    "interpolate": cmd_interpolate,
    "sample": cmd_sample,
    "clt": cmd_clt,
    "concentration": cmd_concentration,
    "generator-check": cmd_generator_check,
}


def _seed_type(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="htcg",
        description="High-temperature circle gas experiments.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", metavar="PATH",
                        help="JSON configuration file (defaults used if omitted)")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory (default from config: htcg-out)")
    parser.add_argument("--seed", type=_seed_type, default=0, metavar="U64")
    parser.add_argument("--workers", type=int, default=None, metavar="N",
                        help="worker processes (default: HTCG_WORKERS or cores)")
    parser.add_argument("--strict", action="store_true",
                        help="warnings become failures")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.workers is None:
        env = os.environ.get("HTCG_WORKERS", "")
        args.workers = int(env) if env.isdigit() and int(env) > 0 \
            else (os.cpu_count() or 1)
    elif args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2

    raw = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            print("error: cannot read config: %s" % exc, file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print("error: config is not valid JSON: %s" % exc, file=sys.stderr)
            return 2

    try:
        cfg = resolve_config(args.command, raw, args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            run = Run(cfg)
            _COMMANDS[args.command](run)
        for w in caught:
            print("warning: %s" % w.message, file=sys.stderr)
        if cfg["strict"] and caught:
            run.check("no_warnings", False,
                      "%d warnings under --strict" % len(caught))
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: cannot write artifacts: %s" % exc, file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3

    print("artifacts in %s" % run.out)
    return 0 if run.passed() else 1


if __name__ == "__main__":
    sys.exit(main())
