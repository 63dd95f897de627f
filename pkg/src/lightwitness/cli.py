"""Command-line front end.

Exit codes: 0 ran to completion (whatever the verdict), 1 usage or config
error, 2 numerical failure or a failed verification suite.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, analytic, kernels, verify
from .config import RUN_DEFAULTS, ConfigError, ExperimentConfig, direction_angles
from .geometry import structure_factor
from .loos import DegenerateZetaWarning, build_loos
from .scan import field_to_csv, field_to_json, sweep
from .witness import NumericalFailure, noise_threshold, witness_min

RESULT_SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (YAML or JSON)")
    common.add_argument("--out", type=Path, help="output directory (default: run.out of the config)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--tolerance", type=float, help="detection tolerance (W < -tolerance counts)")
    common.add_argument("--format", choices=("csv", "json"), help="field file format for scan")

    parser = _Parser(prog="lightwitness", description="Far-field entanglement witnesses for emitter arrays.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("witness", parents=[common], help="evaluate the witness at one direction")
    sub.add_parser("scan", parents=[common], help="sweep the witness over a direction grid")
    sub.add_parser("threshold", parents=[common], help="white-noise threshold at one direction")
    v = sub.add_parser("verify", parents=[common], help="run the built-in property suites")
    v.add_argument("--inject-loo-phase-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _settings(args, cfg: ExperimentConfig | None) -> dict:
    run = dict(cfg.run) if cfg else dict(RUN_DEFAULTS)
    for key in ("seed", "tolerance", "format"):
        val = getattr(args, key)
        if val is not None:
            run[key] = val
    if args.out is not None:
        run["out"] = str(args.out)
    if run["tolerance"] <= 0:
        raise ConfigError("--tolerance must be positive")
    return run


def _provenance(cfg: ExperimentConfig | None, run: dict, command: str) -> dict:
    return {
        "tool": "lightwitness",
        "version": __version__,
        "command": command,
        "config_digest": cfg.digest if cfg else "defaults",
        "seed": run["seed"],
        "tolerance": run["tolerance"],
        "backend": kernels.BACKEND,
    }


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _json_doc(provenance: dict, **body) -> str:
    return json.dumps({"schema_version": RESULT_SCHEMA_VERSION, "provenance": provenance, **body},
                      indent=1, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def cmd_witness(cfg: ExperimentConfig, run: dict) -> int:
    direction = cfg.direction()
    family = build_loos(cfg.array(), cfg.table(), cfg.channel(direction))
    bd = witness_min(cfg.state().density(), family)
    verdict = "entangled_detected" if bd.W < -run["tolerance"] else "not_detected"
    theta, phi = direction_angles(direction)
    result = {**bd.to_dict(), "theta": theta, "phi": phi,
              "structure_factor": structure_factor(cfg.array(), direction), "verdict": verdict}
    path = _write(Path(run["out"]), "witness.json", _json_doc(_provenance(cfg, run, "witness"), result=result))
    print(f"W = {bd.W:.12g} ({bd.min_label}) -> {verdict}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_scan(cfg: ExperimentConfig, run: dict) -> int:
    fld = sweep(cfg.state(), cfg.array(), cfg.table(), cfg.channel_spec(), cfg.grid())
    prov = _provenance(cfg, run, "scan")
    if run["format"] == "csv":
        path = _write(Path(run["out"]), "field.csv", field_to_csv(fld, prov))
    else:
        path = _write(Path(run["out"]), "field.json", field_to_json(fld, prov))
    best = fld.global_minimum()
    frac = fld.violating_fraction(run["tolerance"])
    print(f"grid {fld.grid.shape[0]}x{fld.grid.shape[1]}: violating fraction {frac:.4f}")
    print(f"global minimum W = {best.breakdown.W:.12g} ({best.breakdown.min_label}) "
          f"at theta = {best.theta:.6f}, phi = {best.phi:.6f}")
    for note in fld.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {path}")
    return EXIT_OK


def _analytic_prediction(cfg: ExperimentConfig, s: float) -> tuple[float | None, str]:
    st = cfg.state()
    n = st.n_sites
    if st.label == "dicke_symmetric":
        return analytic.sym_noise_threshold(n, s).p_star, "(N - S) / ((N - 1) + (N - S))"
    if st.label == "singlet":
        return analytic.asym_noise_threshold(n, s).p_star, "(S - N) / ((N - 1) + (S - N))"
    return None, "no closed form for this state"


def cmd_threshold(cfg: ExperimentConfig, run: dict) -> int:
    direction = cfg.direction()
    array, table = cfg.array(), cfg.table()
    state = cfg.state(noise=0.0)
    s = structure_factor(array, direction)
    p_num = noise_threshold(state, array, table, cfg.channel(direction),
                            p_resolution=run["p_resolution"], tolerance=run["tolerance"])
    p_ref, formula = _analytic_prediction(cfg, s)
    result = {"state": state.label, "structure_factor": s, "p_star": p_num,
              "analytic_p_star": p_ref, "analytic_formula": formula,
              "difference": None if p_num is None or p_ref is None else p_num - p_ref,
              "status": "no_violation" if p_num is None else "threshold_found"}
    if state.label == "w_state":
        n = state.n_sites
        result["w_state_bound"] = analytic.w_state_violation_bound(n)
        result["w_state_w1_bound"] = analytic.w_state_w1_bound(n, state.local_dim)
    path = _write(Path(run["out"]), "threshold.json", _json_doc(_provenance(cfg, run, "threshold"), result=result))
    if p_num is None:
        print(f"no violation: the noiseless state is not detected at this direction (S = {s:.6g})")
    else:
        print(f"S = {s:.6g}: numerical p* = {p_num:.9f}")
        if p_ref is not None:
            print(f"analytic p* = {p_ref:.9f}, difference {p_num - p_ref:.3e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig | None, run: dict, fault: float) -> int:
    results = verify.run_all(seed=run["seed"], fault=fault)
    for r in results:
        print(r.line())
        for f in r.failures[:5]:
            print(f"      {f}")
    failed = [r.name for r in results if not r.passed]
    if run.get("out") and cfg is not None:
        _write(Path(run["out"]), "verify.json", _json_doc(
            _provenance(cfg, run, "verify"),
            suites=[{"name": r.name, "passed": r.passed, "detail": r.detail, "failures": r.failures}
                    for r in results]))
    if failed:
        print(f"failed suites: {', '.join(failed)}")
        return EXIT_NUMERICAL
    print("all suites passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = None
        if args.config is not None:
            cfg = ExperimentConfig.load(args.config)
        elif args.command != "verify":
            raise ConfigError(f"{args.command} requires --config")
        run = _settings(args, cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateZetaWarning)
            if args.command == "witness":
                return cmd_witness(cfg, run)
            if args.command == "scan":
                return cmd_scan(cfg, run)
            if args.command == "threshold":
                return cmd_threshold(cfg, run)
            return cmd_verify(cfg, run, args.inject_loo_phase_fault)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
