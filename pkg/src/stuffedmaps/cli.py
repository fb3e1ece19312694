"""Command line front end.

Every subcommand writes newline-delimited JSON records, to stdout or to
``<out>/<subcommand>.ndjson``.  Exit status: 0 on success, 1 on a
computation error or a failed check, 2 on a bad configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema

from .errors import StuffedMapsError
from .oracle import DEFAULT_CAP, OracleQuery, induce_weights, induced_moments, stuffed_term
from .series import CellWeightVar, GradedSeries, WeightSpec
from .spectral import build_operator, solve_cylinder, solve_disk
from .toprec import TopRec, is_stable
from .verify import moment_table, run_checks, standard_suite, topologies

SCHEMA_VERSION = 1

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]*[1-9][0-9]*)?$"}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "weights": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["h", "perimeters"],
                "additionalProperties": False,
                "properties": {
                    "h": {"type": "integer", "minimum": 0},
                    "perimeters": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
                    "name": {"type": "string"},
                    "value": RATIONAL,
                    "upow": {"type": "integer"},
                },
            },
        },
        "truncation": {"type": "integer", "minimum": 0},
        "chi_max": {"type": "integer", "minimum": -1},
        "oracle_cap": {"type": "integer", "minimum": 0},
        "lmax": {"type": "integer", "minimum": 0},
        "verify": {"type": "boolean"},
        "out": {"type": "string"},
        "query": {
            "type": "object",
            "required": ["n", "g", "perimeters"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "g": {"type": "integer", "minimum": 0},
                "perimeters": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "monomial": {"type": "array", "items": {
                    "type": "array", "minItems": 2, "maxItems": 2,
                    "prefixItems": [{"type": "integer", "minimum": 0},
                                    {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}}]}},
            },
        },
        "induce": {
            "type": "object",
            "required": ["alpha_order"],
            "additionalProperties": False,
            "properties": {
                "alpha_order": {"type": "integer", "minimum": 0},
                "alpha": RATIONAL,
                "gamma": RATIONAL,
                "run": {"type": "boolean"},
            },
        },
    },
}


class ConfigError(Exception):
    pass


class RunConfig:
    def __init__(self, data: dict):
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{path}: {exc.message}") from None
        self.data = data
        self.truncation = data.get("truncation", 2)
        self.chi_max = data.get("chi_max", 1)
        self.oracle_cap = data.get("oracle_cap", DEFAULT_CAP)
        self.lmax = data.get("lmax", 6)
        self.verify = data.get("verify", False)
        self.out = data.get("out")
        self.query = data.get("query")
        self.induce = data.get("induce")
        cells = [CellWeightVar.make(w["h"], w["perimeters"]) for w in data.get("weights", [])]
        if len(set(cells)) != len(cells):
            raise ConfigError("weights: duplicate cell")
        self.values = {c: (Fraction(w["value"]), w.get("upow", 0)) for c, w in zip(cells, data.get("weights", [])) if "value" in w}
        self.cells = cells

    @classmethod
    def load(cls, path: str | None, overrides: dict) -> "RunConfig":
        data: dict = {"schema_version": SCHEMA_VERSION}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(data)

    def spec(self) -> WeightSpec:
        return WeightSpec(self.cells, self.truncation, self.values)


# records

def series_record(s: GradedSeries, spec: WeightSpec) -> dict:
    rec = {"series": s.to_records()}
    if spec.values:
        rec["specialized"] = s.specialize(spec.values).to_records()
    return rec


def moment_records(table: dict, spec: WeightSpec):
    for (n, g, ps), s in sorted(table.items()):
        yield {"kind": "moment", "spec": spec.label(), "n": n, "g": g, "perimeters": list(ps),
               **series_record(s, spec)}


def disk_records(cfg: RunConfig, engine: TopRec | None = None):
    spec = cfg.spec()
    disk = engine.disk if engine else solve_disk(spec)
    yield {
        "kind": "disk", "spec": spec.label(), "truncation": spec.truncation, "rounds": disk.rounds,
        "alpha": disk.frame.alpha.to_records(), "gamma": disk.frame.gamma.to_records(),
        "resolvent": [[j, q.to_records()] for j, q in sorted(disk.resolvent.items())],
        "tau": [[m, v.to_records()] for m, v in sorted(disk.tau.items())],
    }
    table = {(1, 0, (l,)): disk.moment(l) for l in range(cfg.lmax + 1)}
    yield from moment_records(table, spec)


def cylinder_records(cfg: RunConfig, engine: TopRec | None = None):
    spec = cfg.spec()
    if engine is None:
        disk = solve_disk(spec)
        cyl = solve_cylinder(spec, disk, build_operator(spec, disk))
        engine = TopRec(spec, disk, cyl)
    yield {"kind": "cylinder", "spec": spec.label(), "truncation": spec.truncation,
           "rounds": engine.cyl.rounds, "C": engine.cyl.correction.to_json()}
    yield from moment_records(moment_table(engine, 2, 0, cfg.lmax), spec)


def toprec_records(cfg: RunConfig):
    spec = cfg.spec()
    engine = TopRec(spec)
    yield from disk_records(cfg, engine)
    if cfg.chi_max >= 0:
        yield from cylinder_records(cfg, engine)
    engine.compute_all(cfg.chi_max)
    for n, g in topologies(cfg.chi_max):
        if not is_stable(n, g):
            continue
        yield {"kind": "correlator", "spec": spec.label(), "n": n, "g": g,
               "form": engine.omega(n, g).to_json()}
        yield from moment_records(moment_table(engine, n, g, cfg.lmax), spec)
    if cfg.verify:
        reports = run_checks(engine, cfg.chi_max, None, cfg.oracle_cap)
        for r in reports:
            yield {"kind": "residual", **r.to_record()}
        if not all(r.passed for r in reports):
            raise CheckFailed()


class CheckFailed(Exception):
    pass


def oracle_records(cfg: RunConfig):
    if cfg.query is None:
        raise ConfigError("oracle needs a query (config 'query' or --query)")
    q = cfg.query
    if len(q["perimeters"]) != q["n"]:
        raise ConfigError("query: perimeters must have length n")
    mono = tuple(sorted(CellWeightVar.make(h, p) for h, p in q.get("monomial", [])))
    upow, c = stuffed_term(OracleQuery(q["n"], q["g"], tuple(q["perimeters"]), mono), cfg.oracle_cap)
    yield {"kind": "oracle", "query": q, "upow": upow, "coeff": f"{c.numerator}/{c.denominator}"}


def verify_records(cfg: RunConfig, suite: str | None):
    if suite == "standard":
        reports = standard_suite(cfg.truncation, max(cfg.chi_max, 2), 4, cfg.oracle_cap)
    else:
        reports = run_checks(TopRec(cfg.spec()), cfg.chi_max, 4, cfg.oracle_cap)
    for r in reports:
        yield {"kind": "residual", **r.to_record()}
    if not all(r.passed for r in reports):
        raise CheckFailed()


def induce_records(cfg: RunConfig):
    ind = cfg.induce or {"alpha_order": 2}
    for perims, kappa in induced_moments(ind["alpha_order"], cfg.oracle_cap).items():
        yield {"kind": "induced_moment", "perimeters": list(perims), "alpha_pow": sum(perims),
               "terms": [{"npow": p, "upow": q, "coeff": f"{c.numerator}/{c.denominator}"}
                         for (p, q), c in sorted(kappa.items())]}
    ws = induce_weights(ind["alpha_order"], cfg.oracle_cap)
    for w in ws:
        yield {"kind": "induced_weight", "h": w.cell.h, "perimeters": list(w.cell.perimeters),
               "coeff": f"{w.coeff.numerator}/{w.coeff.denominator}", "alpha_pow": w.alpha_pow,
               "gamma_pow": w.gamma_pow, "upow": w.upow}
    weights = []
    alpha, gamma = Fraction(ind.get("alpha", "1")), Fraction(ind.get("gamma", "1"))
    for w in ws:
        v = w.coeff * alpha ** w.alpha_pow * gamma ** w.gamma_pow
        weights.append({"h": w.cell.h, "perimeters": list(w.cell.perimeters),
                        "value": f"{v.numerator}/{v.denominator}", "upow": w.upow})
    induced = {"schema_version": SCHEMA_VERSION, "weights": weights, "truncation": cfg.truncation,
               "chi_max": cfg.chi_max, "lmax": cfg.lmax}
    RunConfig(induced)  # round trip through the schema
    yield {"kind": "induced_config", "config": induced}
    if ind.get("run"):
        yield from disk_records(RunConfig(induced))


COMMANDS = ("disk", "cylinder", "toprec", "oracle", "verify", "induce")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stuffedmaps", description="Exact generating series of stuffed maps.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--chi-max", type=int, help="compute all (n, g) with 2g - 2 + n <= CHI_MAX")
    p.add_argument("--truncation", type=int, help="maximum number of cells D")
    p.add_argument("--oracle-cap", type=int, help="maximum half-edges in oracle queries")
    p.add_argument("--lmax", type=int, help="largest perimeter in moment tables")
    p.add_argument("--out", help="directory for <command>.ndjson (default: stdout)")
    p.add_argument("--suite", choices=("standard",), help="verify: run the built-in battery")
    p.add_argument("--query", help="oracle: JSON query {n, g, perimeters, monomial}")
    p.add_argument("--verify", action="store_true", default=None, help="toprec: also run residual checks")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        query = json.loads(args.query) if args.query else None
    except json.JSONDecodeError as exc:
        print(f"config error: --query: {exc}", file=sys.stderr)
        return 2
    overrides = {"chi_max": args.chi_max, "truncation": args.truncation, "oracle_cap": args.oracle_cap,
                 "lmax": args.lmax, "out": args.out, "query": query, "verify": args.verify}
    try:
        cfg = RunConfig.load(args.config, overrides)
        gen = {
            "disk": lambda: disk_records(cfg),
            "cylinder": lambda: cylinder_records(cfg),
            "toprec": lambda: toprec_records(cfg),
            "oracle": lambda: oracle_records(cfg),
            "verify": lambda: verify_records(cfg, args.suite),
            "induce": lambda: induce_records(cfg),
        }[args.command]()
        lines = []
        status = 0
        try:
            for rec in gen:
                lines.append(json.dumps(rec))
        except CheckFailed:
            status = 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StuffedMapsError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = "\n".join(lines) + ("\n" if lines else "")
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.ndjson").write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
