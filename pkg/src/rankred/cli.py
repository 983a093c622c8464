"""``rankred`` command line: rank, reduce, solve, verify and demo.

Every command prints JSON lines to stdout (``--pretty`` indents them).
Exit codes: 0 success, 1 a verification was violated, 2 usage or schema
error, 3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from math import prod
from typing import Any, Dict, List, Optional, Sequence

from .algebra import Matrix, Tensor, rank
from .fields import Field, GF
from .instances import AffineMatrixFamily, PartialMatrix, compose
from .oracles import (BUDGET_ENV, BudgetExceeded, InfiniteFieldError, OracleError,
                      RankBoundExceeded, SearchBudget, mrank, solve_min_rank,
                      tensor_rank_exhaustive)
from .reductions.one_rm_to_3tr import DependentCoefficients, build_stacked_tensor
from .reductions.one_rm_to_lrmc import NotRankOne, reduce_1rm_to_lrmc
from .reductions.rm_to_1rm import reduce_rm_to_1rm
from .reductions.three_tr_to_rm import build_e, default_k
from .reductions.tr_to_rm import build_c
from .serialize import (SchemaError, certificate_from_json, digest, dump_instance,
                        load_instance, parse_field, witness_to_json)
from .verify import REDUCTIONS, VIOLATED, VerifyConfig, run_verify

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

SOURCE_KIND = {
    "rm-to-1rm": "rm", "1rm-to-lrmc": "rm", "1rm-to-3tr": "rm",
    "3tr-to-rm": "tr", "tr-to-rm": "tr",
}


class UsageError(Exception):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


def _emit(obj: Dict[str, Any], args: argparse.Namespace) -> None:
    if getattr(args, "pretty", False):
        print(json.dumps(obj, indent=2, sort_keys=False))
    else:
        print(json.dumps(obj, separators=(",", ":")))


def _read_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _field_override(raw: Optional[str]) -> Optional[Field]:
    if raw is None:
        return None
    tag: Any = "Q" if raw.upper() == "Q" else {"p": _int(raw, "--field")}
    return parse_field(tag, "--field")


def _int(raw: str, flag: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{flag} expects an integer, got {raw!r}") from None


def _budget(args: argparse.Namespace) -> SearchBudget:
    """Flag, then ``$RANKRED_BUDGET``, then the config file, then the default."""
    cfg = args.config_data
    base = SearchBudget(int(cfg.get("budget", SearchBudget.max_assignments)),
                        int(cfg.get("max_pure_candidates", SearchBudget.max_pure_candidates)))
    base = SearchBudget.from_env(base)
    if getattr(args, "budget", None) is not None:
        base = SearchBudget(args.budget, base.max_pure_candidates)
    return base


def _shape(inst: Any) -> List[int]:
    return list(inst.shape)


# commands


def cmd_rank(args: argparse.Namespace) -> int:
    obj = _read_json(args.file)
    kind, inst = load_instance(obj, _field_override(args.field))
    report: Dict[str, Any] = {"command": "rank", "kind": kind, "digest": digest(dump_instance(inst))}
    if isinstance(inst, Matrix):
        report["rank"] = rank(inst)
    elif isinstance(inst, Tensor):
        report["unfolding_ranks"] = [rank(inst.unfolding(k)) for k in range(inst.order)]
        report["rank"] = max(report["unfolding_ranks"])
        report["note"] = "rank is the largest unfolding rank, a lower bound on tensor rank"
    elif isinstance(inst, AffineMatrixFamily):
        report["rank"] = rank(inst.base)
        report["note"] = "rank of the base matrix"
    else:
        raise UsageError("rank needs a matrix, tensor or rm instance", "$.kind")
    _emit(report, args)
    return EXIT_OK


def _reduce(kind: str, inst: Any, args: argparse.Namespace):
    if kind == "rm-to-1rm":
        return reduce_rm_to_1rm(inst)
    if kind == "1rm-to-lrmc":
        try:
            return reduce_1rm_to_lrmc(inst)
        except NotRankOne as exc:
            raise UsageError(str(exc), "$.terms") from None
    if kind == "1rm-to-3tr":
        try:
            st = build_stacked_tensor(inst)
        except DependentCoefficients as exc:
            raise UsageError(str(exc), "$.terms") from None
        except ValueError as exc:
            raise UsageError(str(exc), "$.terms") from None
        return st.tensor, st.certificate()
    if kind == "3tr-to-rm":
        if inst.order != 3:
            raise UsageError(f"3tr-to-rm needs an order-3 tensor, got order {inst.order}",
                             "$.tensor.shape")
        g = build_e(inst, args.k if args.k is not None else default_k(inst.shape))
        return g.family, g.certificate()
    k = args.k if args.k is not None else prod(inst.shape) // max(inst.shape)
    g = build_c(inst, k)
    return g.family, g.certificate()


def cmd_reduce(args: argparse.Namespace) -> int:
    obj = _read_json(args.input)
    kind, inst = load_instance(obj, _field_override(args.field))
    want = SOURCE_KIND[args.reduction]
    if kind != want:
        raise UsageError(f"{args.reduction} needs a {want!r} instance, got {kind!r}", "$.kind")
    if args.k is not None and args.k < 1:
        raise UsageError("--k must be at least 1")
    out, cert = _reduce(args.reduction, inst, args)
    if isinstance(obj, dict) and "certificate" in obj and "kind" not in obj:
        cert = compose(certificate_from_json(obj["certificate"]), cert)
    reduced = dump_instance(out)
    payload = {"instance": reduced, "certificate": cert.to_json()}
    report: Dict[str, Any] = {
        "command": "reduce", "reduction": args.reduction,
        "source_digest": digest(dump_instance(inst)), "target_digest": digest(reduced),
        "offset": cert.offset, "source_shape": _shape(inst), "target_shape": _shape(out),
    }
    if isinstance(out, AffineMatrixFamily):
        report["variables"] = len(out.variables)
    elif isinstance(out, PartialMatrix):
        report["unknowns"] = len(out.unknowns())
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        report["output"] = args.output
    else:
        report.update(payload)
    _emit(report, args)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    obj = _read_json(args.file)
    kind, inst = load_instance(obj, _field_override(args.field))
    bud = _budget(args)
    report: Dict[str, Any] = {"command": "solve", "kind": kind, "digest": digest(dump_instance(inst))}
    res = None
    if isinstance(inst, Matrix):
        report.update(minimum=rank(inst), witness={}, explored=0)
    else:
        if isinstance(inst, AffineMatrixFamily):
            res = solve_min_rank(inst, bud, args.jobs)
        elif isinstance(inst, PartialMatrix):
            res = mrank(inst, bud)
        else:
            res = tensor_rank_exhaustive(inst, bud, args.r_max)
        report.update(minimum=res.minimum, witness=witness_to_json(inst.field, res.witness),
                      explored=res.explored)
    if res is not None and isinstance(obj, dict) and "certificate" in obj and "kind" not in obj:
        cert = certificate_from_json(obj["certificate"])
        pulled = cert.pull(res.witness)
        report["source_minimum"] = report["minimum"] - cert.offset
        report["pulled_back"] = witness_to_json(inst.field, pulled)
    _emit(report, args)
    return EXIT_OK


def _dims(raw: Optional[str]) -> Optional[tuple]:
    if raw is None:
        return None
    try:
        dims = tuple(int(x) for x in raw.replace("x", ",").split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--dims expects comma-separated integers, got {raw!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise UsageError("--dims entries must be positive")
    return dims


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        cfg = VerifyConfig(args.reduction, trials=args.trials, seed=args.seed, p=args.field,
                           dims=_dims(args.dims), s=args.s, k=args.k, jobs=args.jobs,
                           budget=_budget(args))
        GF(args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    start = time.perf_counter()
    reports, summary = run_verify(cfg)
    for r in reports:
        _emit(r, args)
    if args.timing:
        summary["wall_time_s"] = round(time.perf_counter() - start, 3)
    _emit(summary, args)
    return EXIT_VIOLATION if any(r["verdict"] == VIOLATED for r in reports) else EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    from .demo import run_demo

    checks = run_demo(_budget(args))
    for c in checks:
        _emit({"command": "demo", **c}, args)
    failed = sum(not c["pass"] for c in checks)
    _emit({"command": "demo", "summary": True, "passed": len(checks) - failed,
           "failed": failed}, args)
    return EXIT_VIOLATION if failed else EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="indent JSON output")
    common.add_argument("--timing", action="store_true", help="add wall-clock times to reports")
    common.add_argument("--config", help="JSON file with defaults (budget, max_pure_candidates)")
    common.add_argument("--budget", type=int, default=None,
                        help=f"max assignments to enumerate (overrides ${BUDGET_ENV})")

    parser = argparse.ArgumentParser(prog="rankred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", parents=[common], help="exact rank of a matrix or tensor flattenings")
    p.add_argument("file")
    p.add_argument("--field", help="override the field: a prime p or Q")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("reduce", parents=[common], help="apply one reduction")
    p.add_argument("reduction", choices=REDUCTIONS)
    p.add_argument("input")
    p.add_argument("-o", "--output", help="write instance and certificate here")
    p.add_argument("--field", help="override the field: a prime p or Q")
    p.add_argument("--k", type=int, default=None, help="rank bound for 3tr-to-rm / tr-to-rm")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", parents=[common], help="run the matching exhaustive oracle")
    p.add_argument("file")
    p.add_argument("--field", help="override the field: a prime p")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--r-max", type=int, default=None, dest="r_max",
                   help="give up on tensor rank above this")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="seeded end-to-end identity checks")
    p.add_argument("--reduction", required=True, choices=REDUCTIONS)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", type=int, default=2, help="prime p of GF(p)")
    p.add_argument("--dims", help="e.g. 2,2 or 2,2,2")
    p.add_argument("--s", type=int, default=1, help="number of terms")
    p.add_argument("--k", type=int, default=None, help="rank bound (raised to the oracle rank)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", parents=[common], help="reproduce the worked examples")
    p.set_defaults(func=cmd_demo)
    return parser


def _load_config(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    data = _read_json(path)
    if not isinstance(data, dict):
        raise SchemaError("$", "config must be a JSON object")
    return data


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        args.config_data = _load_config(args.config)
        return args.func(args)
    except SchemaError as exc:
        _error(args, str(exc), exc.path)
        return EXIT_USAGE
    except UsageError as exc:
        _error(args, str(exc), exc.path)
        return EXIT_USAGE
    except InfiniteFieldError as exc:
        _error(args, str(exc), "$.field")
        return EXIT_USAGE
    except BudgetExceeded as exc:
        _error(args, f"budget exceeded: {exc}", None)
        return EXIT_BUDGET
    except RankBoundExceeded as exc:
        _error(args, str(exc), None)
        return EXIT_BUDGET
    except OracleError as exc:
        _error(args, str(exc), None)
        return EXIT_BUDGET
    except (ValueError, KeyError) as exc:
        _error(args, str(exc), None)
        return EXIT_USAGE


def _error(args: argparse.Namespace, message: str, path: Optional[str]) -> None:
    obj = {"command": getattr(args, "command", None), "error": message}
    if path:
        obj["path"] = path
    print(json.dumps(obj), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
