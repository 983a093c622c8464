"""Seeded end-to-end checks of the reduction identities.

Each trial draws an instance, solves source and reduced instance with the
exhaustive oracles, pushes the reduced witness back through a certificate
that went through a JSON round trip, and checks both

* the minima differ by exactly the certificate offset, and
* the pulled-back witness attains the source minimum.

Trial ``t`` uses ``numpy.random.default_rng([seed, t])``, so reports do not
depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from math import prod
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .algebra import Matrix, Tensor, rank, sum_tensors
from .fields import GF, PrimeField
from .instances import AffineMatrixFamily, Certificate
from .oracles import BudgetExceeded, SearchBudget, mrank, solve_min_rank, tensor_rank_exhaustive
from .reductions.one_rm_to_3tr import build_stacked_tensor, recover_minimizer
from .reductions.one_rm_to_lrmc import reduce_1rm_to_lrmc
from .reductions.rm_to_1rm import reduce_rm_to_1rm
from .reductions.three_tr_to_rm import build_e
from .reductions.tr_to_rm import build_c
from .serialize import digest, dump_instance, witness_to_json

REDUCTIONS = ("rm-to-1rm", "1rm-to-lrmc", "1rm-to-3tr", "3tr-to-rm", "tr-to-rm")
VERIFIED, VIOLATED, SKIPPED = "verified", "violated", "skipped(budget)"

DEFAULT_DIMS = {
    "rm-to-1rm": (2, 2), "1rm-to-lrmc": (2, 2), "1rm-to-3tr": (2, 2),
    "3tr-to-rm": (2, 2, 2), "tr-to-rm": (2, 2, 2),
}


@dataclass(frozen=True)
class VerifyConfig:
    reduction: str
    trials: int = 10
    seed: int = 0
    p: int = 2
    dims: Optional[Tuple[int, ...]] = None
    s: int = 1
    k: Optional[int] = None
    jobs: int = 1
    budget: SearchBudget = dc_field(default_factory=SearchBudget)

    def __post_init__(self):
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction {self.reduction!r}")
        if self.trials < 0 or self.s < 0 or self.jobs < 1:
            raise ValueError("trials and s must be non-negative, jobs positive")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")
        dims = self.shape
        want3 = self.reduction == "3tr-to-rm"
        want2 = self.reduction in ("rm-to-1rm", "1rm-to-lrmc", "1rm-to-3tr")
        if (want3 and len(dims) != 3) or (want2 and len(dims) != 2) or len(dims) < 2:
            raise ValueError(f"dims {dims} do not fit {self.reduction}")
        if self.reduction == "1rm-to-3tr" and self.s > prod(dims):
            raise ValueError("more independent rank-one terms than matrix entries")

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.dims) if self.dims else DEFAULT_DIMS[self.reduction]

    @property
    def field(self) -> PrimeField:
        return GF(self.p)

    def echo(self) -> Dict[str, Any]:
        return {"reduction": self.reduction, "trials": self.trials, "seed": self.seed,
                "field": {"p": self.p}, "dims": list(self.shape), "s": self.s, "k": self.k}


# random instances


def random_matrix(rng: np.random.Generator, f: PrimeField, n: int, m: int) -> Matrix:
    return Matrix(f, n, m, tuple(int(x) for x in rng.integers(0, f.p, n * m)))


def _nonzero_vector(rng: np.random.Generator, f: PrimeField, n: int) -> Tuple[int, ...]:
    while True:
        v = tuple(int(x) for x in rng.integers(0, f.p, n))
        if any(v):
            return v


def random_rank_one(rng: np.random.Generator, f: PrimeField, n: int, m: int) -> Matrix:
    return Matrix.outer(f, _nonzero_vector(rng, f, n), _nonzero_vector(rng, f, m))


def random_family(rng: np.random.Generator, f: PrimeField, n: int, m: int, s: int, *,
                  rank_one: bool = False, independent: bool = False) -> AffineMatrixFamily:
    A = random_matrix(rng, f, n, m)
    while True:
        Bs = [random_rank_one(rng, f, n, m) if rank_one else random_matrix(rng, f, n, m)
              for _ in range(s)]
        if not independent or not Bs:
            break
        M = Matrix(f, s, n * m, tuple(x for B in Bs for x in B.entries))
        if rank(M) == s:
            break
    return AffineMatrixFamily(A, tuple((f"x{i}", B) for i, B in enumerate(Bs, start=1)))


def random_tensor(rng: np.random.Generator, f: PrimeField, shape: Tuple[int, ...]) -> Tensor:
    return Tensor(f, shape, tuple(int(x) for x in rng.integers(0, f.p, prod(shape))))


# trials


def _roundtrip(cert: Certificate) -> Certificate:
    return Certificate.from_json(json.loads(json.dumps(cert.to_json())))


def _check_matrix_family(cfg: VerifyConfig, rng, report, checks):
    f = cfg.field
    n, m = cfg.shape
    red = cfg.reduction
    fam = random_family(rng, f, n, m, cfg.s, rank_one=red != "rm-to-1rm",
                        independent=red == "1rm-to-3tr")
    report["counterexample"] = inst = dump_instance(fam)
    report["instance_digest"] = digest(inst)
    src = solve_min_rank(fam, cfg.budget)
    if red == "rm-to-1rm":
        out, cert = reduce_rm_to_1rm(fam)
        tgt = solve_min_rank(out, cfg.budget)
    elif red == "1rm-to-lrmc":
        out, cert = reduce_1rm_to_lrmc(fam)
        tgt = mrank(out, cfg.budget)
    else:
        st = build_stacked_tensor(fam)
        cert = st.certificate()
        tgt = tensor_rank_exhaustive(st.tensor, cfg.budget)
        _, residual = recover_minimizer(st, tgt.witness)
        checks["residual_length"] = len(residual) == src.minimum
    report.update(source_min=src.minimum, target_min=tgt.minimum, offset=cert.offset)
    pulled = _roundtrip(cert).pull(tgt.witness)
    checks["offset"] = tgt.minimum == src.minimum + cert.offset
    checks["pullback"] = rank(fam.evaluate(pulled)) == src.minimum
    report["witness"] = witness_to_json(f, pulled)


def _check_tensor(cfg: VerifyConfig, rng, report, checks):
    f = cfg.field
    T = random_tensor(rng, f, cfg.shape)
    report["counterexample"] = inst = dump_instance(T)
    report["instance_digest"] = digest(inst)
    src = tensor_rank_exhaustive(T, cfg.budget)
    k = max(1, src.minimum, cfg.k or 0)
    report["k"] = k
    g = build_e(T, k) if cfg.reduction == "3tr-to-rm" else build_c(T, k)
    cert = g.certificate()
    tgt = solve_min_rank(g.family, cfg.budget)
    report.update(source_min=src.minimum, target_min=tgt.minimum, offset=cert.offset)
    checks["offset"] = tgt.minimum == src.minimum + cert.offset
    pulled = _roundtrip(cert).pull(tgt.witness)
    checks["sum"] = sum_tensors(f, T.shape, pulled) == T
    if cfg.reduction == "3tr-to-rm":
        checks["pullback"] = len(pulled) == src.minimum
    else:
        parts = [tensor_rank_exhaustive(W, cfg.budget).minimum for W in pulled]
        checks["pullback"] = sum(parts) == src.minimum
    report["witness"] = witness_to_json(f, pulled)


def _trial(cfg: VerifyConfig, t: int) -> Dict[str, Any]:
    rng = np.random.default_rng([cfg.seed, t])
    report: Dict[str, Any] = {"command": "verify", "reduction": cfg.reduction, "trial": t}
    checks: Dict[str, bool] = {}
    run = _check_tensor if cfg.reduction in ("3tr-to-rm", "tr-to-rm") else _check_matrix_family
    try:
        run(cfg, rng, report, checks)
    except BudgetExceeded:
        report.pop("counterexample", None)
        report["verdict"] = SKIPPED
        return report
    except (AssertionError, ArithmeticError, ValueError) as exc:
        # a failed internal consistency check is a violation, not a crash
        checks["consistent"] = False
        report["error"] = f"{type(exc).__name__}: {exc}"
    report["checks"] = checks
    ok = bool(checks) and all(checks.values())
    report["verdict"] = VERIFIED if ok else VIOLATED
    inst = report.pop("counterexample", None)
    if not ok and inst is not None:
        report["counterexample"] = inst
    return report


def run_verify(cfg: VerifyConfig) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    """Trial reports in trial order plus a summary record."""
    if cfg.jobs > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            reports = list(ex.map(lambda t: _trial(cfg, t), range(cfg.trials)))
    else:
        reports = [_trial(cfg, t) for t in range(cfg.trials)]
    counts = {v: sum(r["verdict"] == v for r in reports) for v in (VERIFIED, VIOLATED, SKIPPED)}
    summary = {"command": "verify", "summary": True, **cfg.echo(),
               "verified": counts[VERIFIED], "violated": counts[VIOLATED],
               "skipped": counts[SKIPPED]}
    return reports, summary


__all__ = [
    "DEFAULT_DIMS", "REDUCTIONS", "SKIPPED", "VERIFIED", "VIOLATED", "VerifyConfig",
    "random_family", "random_matrix", "random_rank_one", "random_tensor", "run_verify",
]
