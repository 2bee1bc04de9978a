"""``distsense`` command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional

import jsonschema
import numpy as np

from . import bounds
from .gaussian_core import as_weights
from .errors import InvalidArgument, NotEstimable, NumericalFailure, UnsupportedInput
from .estimation import monte_carlo
from .nongaussian import NNOO, NOON, fock_bound, fock_photon_correlation, fock_qfim, ghz_state
from .optimizer import N_RESTARTS, sweep_ratio
from .schemes import KINDS, TWO_GROUP, CustomTwoMode, SchemeSpec, evaluate_scheme

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["weights", "n_total"],
    "additionalProperties": False,
    "properties": {
        "weights": _NUMBER_LIST,
        "n_total": {"type": "number", "exclusiveMinimum": 0},
        "scheme_kind": {"enum": list(KINDS)},
        "custom_params": {
            "type": "object",
            "required": ["r1", "varphi1", "r2", "varphi2", "alpha1", "alpha2", "theta"],
            "additionalProperties": False,
            "properties": {
                **{k: {"type": "number"} for k in ("r1", "varphi1", "r2", "varphi2", "theta")},
                "alpha1": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "alpha2": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["ratios"],
            "additionalProperties": False,
            "properties": {
                "ratios": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
                "restarts": {"type": "integer", "minimum": 1},
            },
        },
        "simulate": {
            "type": "object",
            "required": ["nu", "batches"],
            "additionalProperties": False,
            "properties": {
                "nu": {"type": "integer", "minimum": 1},
                "batches": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "true_phases": _NUMBER_LIST,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["var_ratio_to_crb", "bias", "nu", "batches", "seed", "crb"],
    "additionalProperties": False,
    "properties": {
        "var_ratio_to_crb": {"type": "number"},
        "bias": {"type": "number"},
        "nu": {"type": "integer", "minimum": 1},
        "batches": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "crb": {"type": "number", "exclusiveMinimum": 0},
    },
}


class ConfigError(Exception):
    """Bad configuration; the message names the file and the offending line or field."""


@dataclass
class ScenarioConfig:
    weights: list
    n_total: float
    scheme_kind: str = TWO_GROUP
    custom_params: Optional[dict] = None
    sweep: Optional[dict] = None
    simulate: Optional[dict] = None
    output: Optional[dict] = None
    source: str = "<config>"

    def scheme(self):
        try:
            as_weights(self.weights)
        except InvalidArgument as exc:
            raise ConfigError(f"{self.source}: field 'weights': {exc}") from exc
        custom = None
        if self.custom_params is not None:
            p = self.custom_params
            custom = CustomTwoMode(
                p["r1"], p["varphi1"], p["r2"], p["varphi2"], complex(*p["alpha1"]), complex(*p["alpha2"]), p["theta"]
            )
        try:
            return SchemeSpec(self.scheme_kind, self.weights, self.n_total, custom)
        except InvalidArgument as exc:
            raise ConfigError(f"{self.source}: field 'scheme_kind': {exc}") from exc


def _field_path(error):
    path = ""
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<root>"


def parse_config(text, source="<config>"):
    """Validate JSON config text and return a :class:`ScenarioConfig`.

    Raises:
        ConfigError: syntax errors carry ``line:column``, schema errors the field path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        first = errors[0]
        raise ConfigError(f"{source}: field '{_field_path(first)}': {first.message}")
    cfg = ScenarioConfig(source=source, **raw)
    if (cfg.custom_params is not None) != (cfg.scheme_kind == "custom-two-mode"):
        raise ConfigError(f"{source}: field 'custom_params': required exactly for scheme_kind 'custom-two-mode'")
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    return parse_config(text, str(path))


def _fmt(x):
    return "%.12g" % x


def _csv(header, rows):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_bounds(cfg):
    """Rows ``(name, value, formula_ref)`` for the analytic bounds and the configured scheme."""
    w, n = cfg.weights, cfg.n_total
    spec = cfg.scheme()
    rows = [
        ("sql", bounds.sql_bound(w, n), "sum_i w_i^2/(4 N_i) with N_i=|w_i| N"),
        ("product_squeezed", bounds.product_squeezed_bound(w, n), "sum_i w_i^2/(8 N_i (N_i+1)) at optimal N_i"),
        ("proposed", bounds.proposed_bound(w, n), "sum_s ||w_s||_1^2/(8 N_s (N_s+1)) over sign groups"),
        ("heisenberg_envelope", bounds.heisenberg_envelope(w, n), "||(||w_+||_1,||w_-||_1)||_{2/3}^2/(8 N^2)"),
    ]
    report = evaluate_scheme(spec)
    rows.append((f"{spec.kind}_qcrb", report.qcrb, "w^T H^+ w of the scheme probe"))
    if report.homodyne_ccrb is not None:
        rows.append((f"{spec.kind}_homodyne_ccrb", report.homodyne_ccrb, "w^T F^+ w at optimal homodyne angles"))
    return rows


def bounds_csv(rows):
    return _csv(("name", "value", "formula_ref"), rows)


SWEEP_HEADER = ("ratio", "qcrb", "theta_opt", "r1", "r2", "a1", "a2", "converged")


def cmd_sweep(cfg, workers=None):
    if cfg.sweep is None:
        raise ConfigError(f"{cfg.source}: field 'sweep': required for the sweep command")
    if len(cfg.weights) != 2:
        raise ConfigError(f"{cfg.source}: field 'weights': sweep needs exactly two modes, got {len(cfg.weights)}")
    ratios = cfg.sweep["ratios"]
    if ratios != sorted(ratios):
        raise ConfigError(f"{cfg.source}: field 'sweep.ratios': must be sorted ascending")
    try:
        rows = sweep_ratio(cfg.weights, cfg.n_total, ratios, cfg.sweep.get("restarts", N_RESTARTS), workers)
    except InvalidArgument as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from exc
    out = [
        (r.ratio, r.qcrb, r.theta_effective, r.params.r1, r.params.r2, r.params.a1_mag, r.params.a2_mag,
         "true" if r.converged else "false")
        for r in rows
    ]
    return _csv(SWEEP_HEADER, out)


def cmd_simulate(cfg, workers=None):
    if cfg.simulate is None:
        raise ConfigError(f"{cfg.source}: field 'simulate': required for the simulate command")
    sim = cfg.simulate
    spec = cfg.scheme()
    phases = sim.get("true_phases")
    if phases is not None and len(phases) != spec.n_modes:
        raise ConfigError(f"{cfg.source}: field 'simulate.true_phases': need {spec.n_modes} entries")
    try:
        report = monte_carlo(spec, sim["nu"], sim["batches"], sim.get("seed", 0), phases, workers)
    except UnsupportedInput as exc:
        raise ConfigError(f"{cfg.source}: field 'scheme_kind': {exc}") from exc
    out = report.as_dict()
    jsonschema.validate(out, REPORT_SCHEMA)
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def noon_table(n):
    """Photon-number correlations, QFIMs and projected bounds of NOON and NNOO states."""
    w_minus, w_plus = (0.5, -0.5), (0.5, 0.5)
    rows = []
    for kind in (NOON, NNOO):
        state = ghz_state(kind, n)
        h = fock_qfim(state).h
        row = [kind, n, fock_photon_correlation(state), h[0, 0], h[0, 1], h[1, 1]]
        for w in (w_minus, w_plus):
            try:
                row.append(fock_bound(state, w))
            except NotEstimable:
                row.append("not-estimable")
        rows.append(row)
    return _csv(("state", "n", "correlation", "h11", "h12", "h22", "bound_minus", "bound_plus"), rows)


def _emit(text, cfg, out=None):
    path = out or (cfg.output or {}).get("path")
    if path:
        _write(path, text)
    else:
        sys.stdout.write(text)


def _build_parser():
    parser = argparse.ArgumentParser(prog="distsense", description="Bounds for distributed phase sensing.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bounds", help="tabulate analytic bounds and the configured scheme")
    p.add_argument("--config", required=True)
    p = sub.add_parser("sweep", help="two-mode squeezing-share sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p = sub.add_parser("simulate", help="homodyne Monte Carlo to JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p = sub.add_parser("noon", help="NOON / NNOO table")
    p.add_argument("--n", type=int, required=True)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "noon":
            try:
                sys.stdout.write(noon_table(args.n))
            except InvalidArgument as exc:
                raise ConfigError(f"--n: {exc}") from exc
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "bounds":
            try:
                rows = cmd_bounds(cfg)
            except InvalidArgument as exc:
                raise ConfigError(f"{cfg.source}: {exc}") from exc
            text = bounds_csv(rows)
            if cfg.output and cfg.output.get("format") == "json":
                text = json.dumps([{"name": a, "value": b, "formula_ref": c} for a, b, c in rows], indent=2) + "\n"
            _emit(text, cfg)
        elif args.command == "sweep":
            _emit(cmd_sweep(cfg), cfg, args.out)
        elif args.command == "simulate":
            _emit(cmd_simulate(cfg), cfg, args.out)
    except ConfigError as exc:
        print(f"distsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, NotEstimable, np.linalg.LinAlgError) as exc:
        print(f"distsense: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
