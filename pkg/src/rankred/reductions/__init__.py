"""The five reductions. Importing this package registers every pullback."""

from __future__ import annotations

from . import one_rm_to_3tr, one_rm_to_lrmc, rm_to_1rm, three_tr_to_rm, tr_to_rm

__all__ = ["one_rm_to_3tr", "one_rm_to_lrmc", "rm_to_1rm", "three_tr_to_rm", "tr_to_rm"]
