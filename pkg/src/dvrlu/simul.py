"""Simultaneous block factorization of a family against one random matrix.

Given matrices M_1..M_n with block types d_1..d_n, draw one Haar-random
omega and certify, at a precision budget v chosen in advance from the target
failure probability, that

* omega is invertible and every entry of omega^-1 has valuation >= -v;
* for every m, the block unit lower triangular factor L_m of omega * M_m
  exists and every entry has valuation >= -v (membership in p^-v R);
* whenever M_m is detectably invertible over the ring (determinant
  valuation 0), the factor's entries are known at absolute precision at
  least N - 2v.

One draw succeeds with probability >= 1 - eps when v = required_v(...); the
driver retries with fresh draws until success.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .config import DvrConfig
from .errors import DvrError, DegenerateInput, ExhaustedRetries
from .lu_fast import matmul
from .lu_stable import (
    LvOutput,
    block_l,
    lower_triangular_inverse,
    lv_decomposition,
    vij_statistics,
)
from .matrix import PrecMatrix, random_matrix
from .stats.formulas import pi_q


def required_v(
    q: int, r_list: Sequence[int], eps: float, variant: str = "base"
) -> int:
    """Precision budget v for the simultaneous factorization.

    variant "base": the minimal integer v >= 0 with
    q^v >= S / ((q - 1) * eps), S = sum(r_list), evaluated exactly in
    rational arithmetic (eps is taken at its decimal face value).
    variant "pi": same with the sharper constant Pi(q) in place of q - 1
    (float evaluation with an integer adjustment loop).  The "pi" budget is
    never smaller than the "base" one.
    """
    if not r_list or any(r < 1 for r in r_list):
        raise ValueError("r_list must be a nonempty list of positive ints")
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    s = sum(r_list)
    if variant == "base":
        bound = Fraction(s, 1) / ((q - 1) * Fraction(str(eps)))
        v = 0
        while Fraction(q) ** v < bound:
            v += 1
        return v
    if variant == "pi":
        bound = s / (pi_q(q) * eps)
        v = max(0, math.ceil(math.log(bound) / math.log(q)))
        while q**v < bound:
            v += 1
        while v > 0 and q ** (v - 1) >= bound:
            v -= 1
        return v
    raise ValueError(f"unknown variant {variant!r}")


@dataclass
class SimulFailure:
    """Why one attempt was rejected."""

    stage: str
    matrix_index: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        at = "" if self.matrix_index is None else f" (matrix {self.matrix_index})"
        return f"{self.stage}{at}: {self.detail}"


@dataclass
class SimulResult:
    omega: PrecMatrix
    omega_inv: PrecMatrix
    factors: list
    v: int
    n: int
    tries: int = 1


def min_val_bound(m: PrecMatrix) -> int:
    """Guaranteed lower bound on entry valuations (valuation for unit-form
    entries, precision bound for zeroish ones)."""
    return min(e.val_lower_bound for r in m.rows for e in r)


def invert_via_lv(m: PrecMatrix) -> tuple[PrecMatrix, LvOutput]:
    """Inverse through the split decomposition: H' = M * W' with H' lower
    triangular, so M^-1 = W' * H'^-1 (forward substitution; no capping).
    Raises DegenerateInput when invertibility is not certifiable."""
    out = lv_decomposition(m)
    if any(c is None for c in out.col_val):
        raise DegenerateInput("determinant valuation undeterminable")
    h_inv = lower_triangular_inverse(out.hp)
    return matmul(out.wp, h_inv), out


def _det_unit_detectable(m: PrecMatrix) -> bool:
    try:
        return vij_statistics(m).det_val == 0
    except DvrError:
        return False


def attempt_simultaneous(
    cfg: DvrConfig,
    family: Sequence[tuple[PrecMatrix, Sequence[int]]],
    v: int,
    rng: random.Random,
):
    """One draw of omega and the full certification.

    Returns a SimulResult on success, a SimulFailure otherwise.
    """
    n = cfg.prec
    d = family[0][0].nrows
    omega = random_matrix(cfg, d, rng, n)
    try:
        omega_inv, _ = invert_via_lv(omega)
    except DvrError as exc:
        return SimulFailure(stage="invertibility", detail=str(exc))
    if min_val_bound(omega_inv) < -v:
        return SimulFailure(
            stage="inverse-valuation",
            detail=f"omega^-1 has an entry below valuation {-v}",
        )
    factors = []
    for idx, (mat, sizes) in enumerate(family):
        if mat.nrows != d or mat.ncols != d:
            raise ValueError(f"family matrix {idx} is not {d}x{d}")
        try:
            prod = matmul(omega, mat).cap_abs(n)
            fact = block_l(prod, sizes)
        except DvrError as exc:
            return SimulFailure(stage="factor", matrix_index=idx, detail=str(exc))
        if min_val_bound(fact.lower) < -v:
            return SimulFailure(
                stage="factor-valuation",
                matrix_index=idx,
                detail=f"factor has an entry below valuation {-v}",
            )
        if _det_unit_detectable(mat):
            got = fact.lower.min_abs_prec()
            if got < n - 2 * v:
                return SimulFailure(
                    stage="factor-precision",
                    matrix_index=idx,
                    detail=f"absolute precision {got} < {n - 2 * v}",
                )
        factors.append(fact)
    return SimulResult(
        omega=omega, omega_inv=omega_inv, factors=factors, v=v, n=n
    )


def simultaneous_block_lu(
    cfg: DvrConfig,
    family: Sequence[tuple[PrecMatrix, Sequence[int]]],
    eps: float,
    variant: str = "base",
    seed: Optional[int] = None,
    rng: Optional[random.Random] = None,
    max_tries: int = 200,
) -> SimulResult:
    """Retry :func:`attempt_simultaneous` with fresh draws until success.

    The per-matrix failure weights are the block counts len(d_m); the budget
    is v = required_v(q, [len(d_m)], eps, variant).  Raises ExhaustedRetries
    (carrying the last failure) after max_tries rejected draws.
    """
    if rng is None:
        rng = random.Random(seed)
    v = required_v(cfg.q, [len(sizes) for _, sizes in family], eps, variant)
    last: Optional[SimulFailure] = None
    for t in range(1, max_tries + 1):
        got = attempt_simultaneous(cfg, family, v, rng)
        if isinstance(got, SimulResult):
            got.tries = t
            return got
        last = got
    raise ExhaustedRetries(
        f"no successful draw in {max_tries} tries (last: {last})",
        tries=max_tries,
        last_failure=last,
    )


# ---------------------------------------------------------------------------
# instance (de)serialization for the command line
# ---------------------------------------------------------------------------


def family_from_json(obj: dict):
    """Parse {"config", "eps", "variant", "family": [{"matrix",
    "block_type"}]} into (cfg, eps, variant, family)."""
    try:
        cfg = DvrConfig.from_json(obj["config"])
        eps = float(obj["eps"])
        variant = obj.get("variant", "base")
        fam = []
        for ent in obj["family"]:
            mat = PrecMatrix.from_json(cfg, ent["matrix"])
            sizes = [int(x) for x in ent["block_type"]]
            fam.append((mat, sizes))
        if not fam:
            raise ValueError("family is empty")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance: {exc}") from exc
    return cfg, eps, variant, fam


def result_to_json(res: SimulResult) -> dict:
    return {
        "v": res.v,
        "n": res.n,
        "tries": res.tries,
        "omega": res.omega.to_json(),
        "omega_inv": res.omega_inv.to_json(),
        "factors": [f.lower.to_json() for f in res.factors],
    }
