"""Worked examples with known answers, each checked end to end."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from .algebra import Matrix, Tensor, rank
from .fields import GF, QQ, Field
from .instances import AffineMatrixFamily, PartialMatrix, Unknown, compose
from .oracles import SearchBudget, mrank, solve_min_rank, tensor_rank_exhaustive
from .reductions.one_rm_to_3tr import build_stacked_tensor
from .reductions.one_rm_to_lrmc import reduce_1rm_to_lrmc
from .reductions.rm_to_1rm import build_j, reduce_rm_to_1rm
from .reductions.three_tr_to_rm import build_e
from .reductions.tr_to_rm import build_b, k_constant, pad

Check = Dict[str, Any]


def _check(name: str, expected: Any, got: Any) -> Check:
    return {"example": name, "expected": expected, "got": got, "pass": expected == got}


def rotation_family(f: Field) -> AffineMatrixFamily:
    """``[[x, 1], [-1, x]]``: rank 1 exactly when ``x^2 = -1``."""
    return AffineMatrixFamily(Matrix.from_rows(f, [[0, 1], [-1, 0]]),
                              (("x", Matrix.identity(f, 2)),))


def single_row_family(f: Field) -> AffineMatrixFamily:
    return AffineMatrixFamily(Matrix.identity(f, 2), (("x", Matrix.from_rows(f, [[0, 0], [2, 3]])),))


def general_rank_one_family(f: Field) -> AffineMatrixFamily:
    return AffineMatrixFamily(Matrix.identity(f, 2), (("x", Matrix.from_rows(f, [[1, 2], [3, 6]])),))


def epsilon_family(f: Field, eps: int) -> AffineMatrixFamily:
    return AffineMatrixFamily(Matrix.from_rows(f, [[1, eps], [0, 1]]),
                              (("x", Matrix.from_rows(f, [[0, 0], [1, 0]])),))


EIGHT_BY_NINE = [
    [0, 1, 0, 0, "?", 0, 1, 0, 0],
    [-1, 0, 0, 0, 0, "?", 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 1, 1, "?"],
    [1, 0, -1, 0, -1, 0, 0, 0, 0],
    [0, 1, 0, -1, 0, -1, 0, 0, 0],
    [0, 0, "?", 0, 0, 0, -1, 0, 0],
    [0, 0, 0, "?", 0, 0, 0, -1, 0],
    [0, 0, -1, -1, 0, 0, 0, 0, -1],
]


def _pattern(P: PartialMatrix) -> List[List[Any]]:
    return [["?" if isinstance(P[i, j], Unknown) else P[i, j] for j in range(P.cols)]
            for i in range(P.rows)]


def _fill_checks(name: str, fam_of: Callable[[Field], AffineMatrixFamily], fill: Fraction,
                 primes: List[int], expected_mrank: int, layout: List[List[Any]]) -> List[Check]:
    out = []
    P, _ = reduce_1rm_to_lrmc(fam_of(QQ))
    out.append(_check(f"{name}: bordered layout over Q", layout, [[str(x) if not isinstance(x, str)
                                                                   else x for x in r]
                                                                  for r in _pattern(P)]))
    (u,) = P.unknowns()
    completed = P.complete({u: fill})
    out.append(_check(f"{name}: rank at fill {fill} over Q", expected_mrank, rank(completed)))
    out.append(_check(f"{name}: known-entry lower bound over Q", expected_mrank,
                      P.known_rank_bound()))
    for p in primes:
        f = GF(p)
        Pp, _ = reduce_1rm_to_lrmc(fam_of(f))
        res = mrank(Pp)
        out.append(_check(f"{name}: mrank over GF({p})", expected_mrank, res.minimum))
        minimizers = [x for x in f.elements() if rank(Pp.complete({u: x})) == expected_mrank]
        out.append(_check(f"{name}: unique minimizing fill over GF({p})", [f(fill)], minimizers))
    return out


def run_demo(budget: Optional[SearchBudget] = None) -> List[Check]:
    checks: List[Check] = []

    # J-gadget layout for the 2x2 rotation family
    g = build_j(Matrix.from_rows(QQ, [[0, 1], [-1, 0]]), Matrix.identity(QQ, 2))
    checks.append(_check("J-gadget of [[x,1],[-1,x]]: shape and variables",
                         [[3, 4], 5], [list(g.family.shape), len(g.family.variables)]))

    # RM -> LRMC chain on the rotation family
    layout = [[x if isinstance(x, str) else str(x) for x in r] for r in EIGHT_BY_NINE]
    fam_q = rotation_family(QQ)
    F, _ = reduce_rm_to_1rm(fam_q)
    P, _ = reduce_1rm_to_lrmc(F)
    checks.append(_check("rotation family: 8x9 completion layout over Q", layout,
                         [[x if isinstance(x, str) else str(x) for x in r] for r in _pattern(P)]))
    for p, want in ((3, 7), (5, 6)):
        f = GF(p)
        fam = rotation_family(f)
        F, c1 = reduce_rm_to_1rm(fam)
        P, c2 = reduce_1rm_to_lrmc(F)
        res = mrank(P, budget)
        checks.append(_check(f"rotation family: 8x9 mrank over GF({p})", want, res.minimum))
        x = compose(c1, c2).pull(res.witness)["x"]
        checks.append(_check(f"rotation family: pulled-back x attains min over GF({p})",
                             want - 5, rank(fam.evaluate({"x": x}))))

    checks += _fill_checks("single-row term", single_row_family, Fraction(-1, 3), [7, 11], 2,
                           [["1", "0", "0"], ["0", "1", "?"], ["2", "3", "-1"]])
    checks += _fill_checks("general rank-one term", general_rank_one_family, Fraction(-1, 7),
                           [11, 13], 3, [["1", "0", "0", "1"], ["0", "1", "0", "3"],
                                         ["1", "2", "-1", "0"], ["0", "0", "?", "-1"]])

    # stacked tensor: rank 2 when eps != 0, rank 3 when eps = 0
    for p in (2, 3, 5):
        f = GF(p)
        for eps, want in ((1, 2), (0, 3)):
            st = build_stacked_tensor(epsilon_family(f, eps))
            res = tensor_rank_exhaustive(st.tensor, budget)
            checks.append(_check(f"eps={eps} stacked tensor rank over GF({p})", want, res.minimum))

    # E-gadget with k = 3 on a (2,2,2) tensor: min rank = 12 + rank T
    f = GF(2)
    T = build_stacked_tensor(epsilon_family(f, 0)).tensor
    e = build_e(T, 3)
    res = solve_min_rank(e.family, budget)
    checks.append(_check("E-gadget (2,2,2), k=3: min rank - rank T", 12,
                         res.minimum - tensor_rank_exhaustive(T, budget).minimum))

    # padding and the B construction
    checks.append(_check("mrank pad(I_2) over GF(2)", 2, mrank(pad(Matrix.identity(f, 2))).minimum))
    checks.append(_check("K(2,2,2)", 2, k_constant((2, 2, 2))))
    pure = Tensor.outer(f, [1, 0], [1, 1], [0, 1])
    checks.append(_check("mrank B(pure (2,2,2)) over GF(2)", 3, mrank(build_b(pure)).minimum))
    return checks


__all__ = ["EIGHT_BY_NINE", "epsilon_family", "general_rank_one_family", "rotation_family",
           "run_demo", "single_row_family"]
