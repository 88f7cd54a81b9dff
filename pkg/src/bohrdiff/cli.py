"""Command-line front end. Each subcommand writes JSON-lines records and a
short human summary on stderr.

Exit status: 0 no violations, 1 violations found, 2 bad arguments or config,
3 a computation would exceed the element budget.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields
from typing import Sequence

from . import __version__
from .bohr import dense_upto, union_of_translated_balls
from .construction import (
    PRESETS,
    ConstructionParams,
    density_records,
    theorem2_brute,
    verify_disjointness,
)
from .field import DEFAULT_BUDGET, BudgetExceeded, group_array, group_order
from .hamming import ball_size, parse_balls
from .partition import Z, PartitionSpec, classify_array, count_cell
from .report import CheckRecord, write_records
from .shift import PART_NAMES, verify_shift_lemma

COMMANDS = ("verify-lemmas", "build", "check-construction", "bohr-density", "count", "brute-theorem2")
THREADS_ENV = "BOHRDIFF_THREADS"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    p: int = 2
    spec: str | None = None
    shifts: str | None = None
    E: str | None = None
    level: int | None = None
    scale: int | None = None
    dmax: int = 2
    samples: int = 10_000
    seed: int = 0
    budget: int | None = DEFAULT_BUDGET
    output: str | None = None
    mode: str = "exhaustive"
    cell: str = "0"
    balls: str | None = None
    preset: str | None = None
    method: str = "auto"
    parts: str | None = None

    def canonical(self) -> str:
        """The config as "key = value" lines, loadable with --config."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_INT_KEYS = {"p", "level", "scale", "dmax", "samples", "seed"}
_KEYS = {f.name for f in fields(RunConfig)}


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    if key == "budget":
        if str(value).lower() in ("none", "unlimited"):
            return None
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"budget must be an integer or 'none', got {value!r}") from exc
    return str(value)


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohrdiff", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        # defaults stay None so that config-file values are only overridden by explicit flags
        sp.add_argument("--config")
        sp.add_argument("--p")
        sp.add_argument("--spec", help='partition spec "n:m,..." or construction levels "n:m:k,..."')
        sp.add_argument("--shifts", help='shift radii "k1,k2,..."')
        sp.add_argument("--E", dest="E", help='residues "1,3"')
        sp.add_argument("--level")
        sp.add_argument("--scale")
        sp.add_argument("--dmax")
        sp.add_argument("--samples")
        sp.add_argument("--seed")
        sp.add_argument("--budget", help='element-count cap, or "none"')
        sp.add_argument("--output")
        sp.add_argument("--mode", choices=("exhaustive", "sampled"))
        sp.add_argument("--cell", help='cell label: residue or "Z"')
        sp.add_argument("--balls", help='translated Hamming balls "n:k,..."')
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--method", choices=("auto", "direct", "fourier"))
        sp.add_argument("--parts", help='subset of lemma parts, e.g. "i,iii,vii"')
        sp.add_argument("--print-config", action="store_true", help="echo the parsed config and exit")
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        values.update(read_config_file(ns.config))
        cmd = values.pop("command", None)
        if cmd is not None and cmd != ns.command:
            raise ConfigError(f"config is for {cmd!r}, not {ns.command!r}")
    for key in _KEYS - {"command"}:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(ns.command, **{k: _coerce(k, v) for k, v in values.items()})


# -- commands ------------------------------------------------------------------

def _ints(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from exc


def _construction(cfg: RunConfig) -> ConstructionParams:
    E = frozenset(_ints(cfg.E)) if cfg.E else None
    if cfg.preset:
        base = PRESETS[cfg.preset]
        return ConstructionParams(base.p, base.levels, E if E is not None else base.E, cfg.level)
    if not cfg.spec:
        raise ConfigError("give --preset or --spec")
    toks = [t for t in cfg.spec.split(",") if t.strip()]
    if all(t.count(":") == 2 for t in toks):
        return ConstructionParams.parse_levels(cfg.p, cfg.spec, E=E, L=cfg.level)
    spec = PartitionSpec.parse(cfg.p, cfg.spec)
    shifts = _ints(cfg.shifts)
    if len(shifts) != len(spec):
        raise ConfigError("give one shift radius per level with --shifts, or n:m:k levels")
    return ConstructionParams(cfg.p, tuple((n, m, k) for (n, m), k in zip(spec.levels, shifts)),
                              E=E, L=cfg.level)


def cmd_verify_lemmas(cfg: RunConfig) -> list[CheckRecord]:
    if not cfg.spec:
        raise ConfigError("verify-lemmas needs --spec")
    spec = PartitionSpec.parse(cfg.p, cfg.spec)
    shifts = _ints(cfg.shifts) or [1] * len(spec)
    parts = [t.strip() for t in cfg.parts.split(",")] if cfg.parts else None
    if parts and any(t not in PART_NAMES for t in parts):
        raise ConfigError(f"parts must be among {', '.join(PART_NAMES)}")
    return verify_shift_lemma(spec, shifts, mode=cfg.mode, samples=cfg.samples, seed=cfg.seed,
                              budget=cfg.budget, parts=parts)


def cmd_build(cfg: RunConfig) -> list[CheckRecord]:
    params = _construction(cfg)
    recs = density_records(params)
    for j, ball in enumerate(params.balls(), 1):
        recs.append(CheckRecord("construction.ball", "translated-hamming-ball",
                                dict(params.describe(), level=j, ball=str(ball)), "exact", 1, 0,
                                exact_values={"size": ball_size(params.p, ball),
                                              "group": group_order(params.p, ball.n)}))
    return recs


def cmd_check_construction(cfg: RunConfig) -> list[CheckRecord]:
    params = _construction(cfg)
    return verify_disjointness(params, mode=cfg.mode, samples=cfg.samples, seed=cfg.seed,
                               budget=cfg.budget, threads=_threads())


def cmd_bohr_density(cfg: RunConfig) -> list[CheckRecord]:
    if cfg.scale is None or not cfg.balls:
        raise ConfigError("bohr-density needs --scale and --balls")
    balls = parse_balls(cfg.balls)
    ind = union_of_translated_balls(cfg.p, cfg.scale, balls, shift=1, budget=cfg.budget)
    res = dense_upto(ind, cfg.scale, cfg.dmax, p=cfg.p, method=cfg.method, budget=cfg.budget)
    wit = [] if res.dense else [f"system={res.system.describe()} missing={','.join(map(str, res.missing))}"]
    params = {"p": cfg.p, "scale": cfg.scale, "dmax": cfg.dmax, "balls": cfg.balls, "method": cfg.method}
    return [CheckRecord("bohr.coset_coverage", "hamming-ball-density", params, "exhaustive",
                        res.systems_checked, int(not res.dense), wit,
                        exact_values={"members": int(ind.sum()), "group": ind.size},
                        notes=[f"certified for subgroups of index <= {cfg.p}^{cfg.dmax} only"])]


def cmd_count(cfg: RunConfig) -> list[CheckRecord]:
    if not cfg.spec:
        raise ConfigError("count needs --spec")
    spec = PartitionSpec.parse(cfg.p, cfg.spec)
    label = Z if cfg.cell.strip().upper() == "Z" else int(cfg.cell) % cfg.p
    count = count_cell(spec, label)
    group = group_order(cfg.p, spec.scale)
    values = {"count": count, "group": group}
    bad, mode, notes = 0, "exact", []
    if cfg.budget is None or group <= cfg.budget:
        labels = classify_array(group_array(cfg.p, spec.scale, budget=cfg.budget), spec)
        direct = int((labels == label).sum())
        values["enumerated"] = direct
        bad = int(direct != count)
        mode = "exhaustive"
    else:
        notes.append("group too large to cross-check by enumeration")
    return [CheckRecord("partition.count", "cell-count", {"p": cfg.p, "spec": str(spec), "cell": cfg.cell},
                        mode, 1, bad, exact_values=values, notes=notes)]


def cmd_brute_theorem2(cfg: RunConfig) -> list[CheckRecord]:
    if cfg.scale is None:
        raise ConfigError("brute-theorem2 needs --scale")
    return theorem2_brute(cfg.p, cfg.scale, mode=cfg.mode, samples=cfg.samples, seed=cfg.seed,
                          budget=cfg.budget)


HANDLERS = {
    "verify-lemmas": cmd_verify_lemmas,
    "build": cmd_build,
    "check-construction": cmd_check_construction,
    "bohr-density": cmd_bohr_density,
    "count": cmd_count,
    "brute-theorem2": cmd_brute_theorem2,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        records = HANDLERS[cfg.command](cfg)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if cfg.output:
        with open(cfg.output, "w") as fh:
            write_records(records, fh)
    else:
        write_records(records, stdout)
    for rec in records:
        print(rec.summary(), file=stderr)
    return 0 if all(r.passed for r in records) else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if ns.print_config:
        sys.stdout.write(cfg.canonical())
        return 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
