"""Precision-stable column elimination over a DVR.

Everything here computes variants of the (permuted) LU factorization of a
square matrix whose entries carry finite precision, using the valuation-aware
pivoting rule: before clearing entry (i, j) we swap columns i and j whenever
v(entry) < v(pivot), so the pivot of every division has minimal valuation
among the candidates and the division loses as little relative precision as
possible.  The elimination scalar is re-lifted to the working absolute
precision N before every column update; for an integral input known at flat
precision N this keeps *every* intermediate entry at absolute precision
exactly N (the update subtracts a term of absolute precision >= N from an
entry of absolute precision N), which is what the precision guarantees — and
the bit-identical fast variants — rely on.

Provided algorithms:

* :func:`vij_statistics` — runs the elimination recording the valuation
  profile (the off-diagonal comparison reads, the round-end pivots, the
  partial diagonal sums) without producing a factor;
* :func:`naive_gauss_l` — textbook row elimination without pivoting, as the
  unstable baseline;
* :func:`lift_recompute_l` — the lift-and-recompute workaround: zero-pad the
  input, run the naive elimination at the higher precision, certify the
  result from the observed pivot valuations;
* :func:`stable_l` — the pivoted elimination returning the unit lower
  triangular factor with sharp per-entry precision;
* :func:`lv_decomposition` — same elimination, additionally accumulating the
  column transform and snapshotting (L', V') at round boundaries;
* :func:`lv_to_l`, :func:`hermite_from_lv` — conversions from the split
  decomposition to the triangular factor and to the Hermite normal form;
* :func:`block_l`, :func:`block_l_unitlower` — the block-unit-lower variants
  (generic over scalar and truncated-series entries).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .element import PrecElem, valuation_less
from .errors import (
    DegenerateDecomposition,
    DegenerateInput,
    DivisionByUnknownZero,
    InsufficientLift,
)
from .matrix import PrecMatrix


def working_precision(m: PrecMatrix) -> int:
    """The absolute precision N the elimination lifts to: the largest
    precision any entry carries (= the flat precision for flat inputs)."""
    return max(e.abs_prec for r in m.rows for e in r)


def _vals_less(a, b) -> bool:
    """Pivoting comparison v(a) < v(b) through the element protocol."""
    return valuation_less(a.pivot_scalar(), b.pivot_scalar())


def _pivot_guard(e) -> None:
    if e.is_zeroish:
        raise DegenerateInput(
            f"pivot {e!r} indistinguishable from zero after pivoting"
        )


def _eliminate(omega: PrecMatrix, i: int, j: int, n: int, *extras: PrecMatrix) -> None:
    """One elimination step: clear (i, j) using pivot (i, i).

    The scalar is lifted to absolute precision n before the column update
    (choosing a representative; the transform identity is exact for any
    representative, and for flat inputs this is what keeps precision flat).
    The same update is applied to every extra matrix (accumulated
    transforms).
    """
    s = (omega[i, j] / omega[i, i]).lift_to_precision(n)
    omega.sub_scaled_col(s, i, j)
    for x in extras:
        x.sub_scaled_col(s, i, j)


def _round_swaps(omega: PrecMatrix, j: int, n: int, *extras: PrecMatrix):
    """Generator over i = 0..j-1 running swap + guard, yielding i after the
    pivot at (i, i) is in place.  Column swaps are applied to omega and to
    every extra matrix."""
    for i in range(j):
        if _vals_less(omega[i, j], omega[i, i]):
            omega.swap_cols(i, j)
            for x in extras:
                x.swap_cols(i, j)
        _pivot_guard(omega[i, i])
        yield i


# ---------------------------------------------------------------------------
# valuation profile (no factor)
# ---------------------------------------------------------------------------


@dataclass
class VijProfile:
    """Valuation profile of one pivoted elimination.

    Attributes:
        table: (i, j) -> valuation read at that point of the elimination,
            0-indexed.  For i < j this is v of entry (i, j) *before* the
            round-j swap test at step i; for i == j it is the diagonal
            valuation at the end of round j.  None when the entry was
            indistinguishable from zero (only its precision bound is known).
        boundary_sums: partial sums sum(v(omega[k, k]) for k <= j) re-read at
            the end of round j (later swaps can change earlier diagonal
            entries, so these are genuine re-reads, not a running total).
            These equal the valuations of the leading principal minors.
        det_val: valuation of det(M) = last boundary sum (None if any final
            diagonal entry was indistinguishable from zero).
        swaps: the (i, j) column swaps performed, in order.
        vl: the factor's max denominator exponent
            max(0, -min_j min_{i>j} (v(omega[i, j]) - v(omega[j, j]))), the
            quotient valuations read at the end of each round.  An int when
            determined; a (lo, hi) tuple when zeroish entries could hide
            smaller valuations than the known minimum; None when a diagonal
            read was indistinguishable from zero.
    """

    table: dict = field(default_factory=dict)
    boundary_sums: list = field(default_factory=list)
    det_val: Optional[int] = None
    swaps: list = field(default_factory=list)
    vl: object = None


def _val_or_none(e) -> Optional[int]:
    s = e.pivot_scalar()
    return None if s.is_zeroish else s.valuation


def vij_statistics(m: PrecMatrix, n: Optional[int] = None) -> VijProfile:
    """Run the pivoted column elimination recording its valuation profile.

    Raises AmbiguousValuation when a swap decision is not forced by the
    known precision, DegenerateInput when a pivot degenerates.
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    n = working_precision(m) if n is None else n
    omega = m.copy()
    prof = VijProfile()
    known_min = 0  # quotient valuations, clipped at 0
    hidden_min: Optional[int] = None
    vl_defined = True
    for j in range(d):
        for i in range(j):
            prof.table[(i, j)] = _val_or_none(omega[i, j])
            if _vals_less(omega[i, j], omega[i, i]):
                omega.swap_cols(i, j)
                prof.swaps.append((i, j))
            _pivot_guard(omega[i, i])
            _eliminate(omega, i, j, n)
        prof.table[(j, j)] = _val_or_none(omega[j, j])
        vals = [_val_or_none(omega[k, k]) for k in range(j + 1)]
        prof.boundary_sums.append(None if None in vals else sum(vals))
        if j < d - 1:
            piv = omega[j, j]
            if piv.is_zeroish:
                vl_defined = False
            else:
                vjj = piv.valuation
                for i in range(j + 1, d):
                    e = omega[i, j]
                    if e.is_zeroish:
                        b = e.val_lower_bound - vjj
                        hidden_min = b if hidden_min is None else min(hidden_min, b)
                    else:
                        known_min = min(known_min, e.valuation - vjj)
    prof.det_val = prof.boundary_sums[-1]
    if not vl_defined:
        prof.vl = None
    elif hidden_min is None or hidden_min >= known_min:
        prof.vl = -known_min
    else:
        prof.vl = (-known_min, -hidden_min)
    return prof


# ---------------------------------------------------------------------------
# naive elimination and the lift-and-recompute workaround
# ---------------------------------------------------------------------------


def naive_gauss_l(m: PrecMatrix) -> PrecMatrix:
    """Unit lower triangular L by textbook row elimination, no pivoting.

    Precision is whatever the plain arithmetic yields — this is the unstable
    baseline whose entries lose precision proportional to the accumulated
    pivot valuations.  Raises DivisionByUnknownZero when a pivot is
    indistinguishable from zero.
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    n = working_precision(m)
    u = m.copy()
    lower = PrecMatrix.identity_like(m, d, n)
    for j in range(d):
        piv = u[j, j]
        if piv.is_zeroish:
            raise DivisionByUnknownZero(
                f"naive elimination hit zeroish pivot at column {j}"
            )
        for i in range(j + 1, d):
            s = u[i, j] / piv
            lower[i, j] = s
            for k in range(j, d):
                u[i, k] = u[i, k] - s * u[j, k]
    return lower


def naive_pivot_valuations(m: PrecMatrix) -> list[int]:
    """Successive pivot valuations of the naive (unpivoted) elimination.

    Raises DivisionByUnknownZero if a pivot is indistinguishable from zero.
    """
    d = m.nrows
    u = m.copy()
    out = []
    for j in range(d):
        piv = u[j, j]
        if piv.is_zeroish:
            raise DivisionByUnknownZero(
                f"pivot valuation at column {j} undeterminable"
            )
        out.append(piv.valuation)
        for i in range(j + 1, d):
            s = u[i, j] / piv
            for k in range(j, d):
                u[i, k] = u[i, k] - s * u[j, k]
    return out


def lift_recompute_l(m: PrecMatrix, extra: Optional[int] = None) -> PrecMatrix:
    """Naive elimination made reliable by lifting first.

    Zero-pads the input from its precision N to N' = N + extra (choosing the
    representative with zero high digits), runs the naive elimination at N',
    reads off the pivot valuations W_1..W_d, and checks the certificate

        N' - N >= 2 * (sum(W_i) - max(W_i)).

    On success the factor is correct at absolute precision N - 2*max(W_i)
    and is truncated there.  On failure an InsufficientLift carries the
    minimal sufficient N'; if a pivot valuation was itself undeterminable at
    N' the exception suggests trying ceil(2d/q) digits higher.

    Args:
        m: square matrix over the scalar ring.
        extra: how many digits to lift; default ceil(2d/q), the expected
            total pivot valuation margin for Haar-random input.
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    n = working_precision(m)
    q = m.rows[0][0].cfg.q
    if extra is None:
        extra = max(1, math.ceil(2 * d / q))
    n_hi = n + extra
    lifted = m.lift_to_precision(n_hi)
    try:
        pivot_vals = naive_pivot_valuations(lifted)
    except DivisionByUnknownZero as exc:
        raise InsufficientLift(
            f"pivot valuation undeterminable at precision {n_hi}; "
            f"retry higher",
            required_prec=n_hi + max(1, math.ceil(2 * d / q)),
        ) from exc
    w_max = max(pivot_vals)
    need = 2 * (sum(pivot_vals) - w_max)
    if n_hi - n < need:
        raise InsufficientLift(
            f"lift of {n_hi - n} digits too small: pivot valuations "
            f"{pivot_vals} need {need}",
            required_prec=n + need,
        )
    lower = naive_gauss_l(lifted)
    return lower.cap_abs(n - 2 * w_max)


# ---------------------------------------------------------------------------
# the stable factorization
# ---------------------------------------------------------------------------


@dataclass
class StableL:
    """Result of :func:`stable_l`.

    Attributes:
        lower: unit lower triangular factor of the column-permuted input;
            strictly-lower entries carry the guaranteed precision
            O(pi^(N - v_j + min(0, w))) where v_j is the j-th principal
            minor valuation and w the quotient's valuation offset.
        col_vals: v_j = sum(v(omega[k, k]) for k <= j) read at the end of
            round j (the principal minor valuations of the permuted input).
        n: the working absolute precision N.
    """

    lower: PrecMatrix
    col_vals: list
    n: int


def _prescribed_quotient(num, den_val: int, v_round: int, n: int):
    """num / pivot with the sharp prescribed precision cap.

    The prescribed absolute precision is N - v_round - max(0, den_val - w)
    with w the numerator valuation (its precision bound when the numerator
    is indistinguishable from zero).  For flat integral inputs this never
    exceeds the quotient's natural precision; capping (never raising) keeps
    the claim honest for arbitrary inputs.
    """
    w = num.val_lower_bound
    prescribed = n - v_round - max(0, den_val - w)
    return prescribed


def stable_l(m: PrecMatrix) -> StableL:
    """Unit lower triangular factor via the valuation-pivoted elimination.

    Runs the column elimination with swap rule v(entry) < v(pivot) and
    scalars re-lifted to N, then after each round j fills column j of L with
    the quotients omega[i, j] / omega[j, j] (i > j) at the guaranteed
    precision.  The factor satisfies A = L * U for a column permutation A of
    the input and some upper triangular U, with every strictly-lower entry
    correct at least at O(pi^(N - 2 * V)) where V bounds the principal minor
    valuations.

    Raises:
        AmbiguousValuation: a swap decision was not forced at this precision.
        DegenerateInput: a pivot (hence a leading principal minor) is
            indistinguishable from zero.
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    n = working_precision(m)
    omega = m.copy()
    lower = PrecMatrix.identity_like(m, d, n)
    col_vals = []
    for j in range(d):
        for i in _round_swaps(omega, j, n):
            _eliminate(omega, i, j, n)
        diag = [omega[k, k] for k in range(j + 1)]
        if any(e.is_zeroish for e in diag):
            raise DegenerateInput(
                f"diagonal entry indistinguishable from zero after round {j}"
            )
        v = sum(e.valuation for e in diag)
        col_vals.append(v)
        den = omega[j, j]
        for i in range(j + 1, d):
            quot = omega[i, j] / den
            lower[i, j] = quot.cap_abs(
                _prescribed_quotient(omega[i, j], den.valuation, v, n)
            )
    return StableL(lower=lower, col_vals=col_vals, n=n)


def precision_loss(lower: PrecMatrix, n: int) -> int:
    """N minus the worst absolute precision among strictly-lower entries
    (0 for 1x1: the diagonal carries no information)."""
    d = lower.nrows
    worst = n
    for i in range(d):
        for j in range(i):
            a = lower[i, j].abs_prec
            if a < worst:
                worst = a
    return n - worst


def vl_of_lower(lower: PrecMatrix):
    """max(0, -min valuation) over strictly-lower entries of L.

    Returns an int when every strictly-lower entry either has known
    valuation or is zero at a precision that cannot hide anything smaller
    than the known minimum; otherwise returns the interval (lo, hi) of
    possible values as a tuple.
    """
    known_min = 0  # the diagonal 1s have valuation 0
    hidden_min = None
    for i in range(lower.nrows):
        for j in range(i):
            e = lower[i, j]
            if e.is_zeroish:
                b = e.val_lower_bound
                hidden_min = b if hidden_min is None else min(hidden_min, b)
            else:
                known_min = min(known_min, e.valuation)
    if hidden_min is None or hidden_min >= known_min:
        return -known_min
    return (-known_min, -hidden_min)


# ---------------------------------------------------------------------------
# the split (LV) decomposition
# ---------------------------------------------------------------------------


@dataclass
class LvOutput:
    """Split decomposition: column snapshots plus the accumulated transform.

    Attributes:
        lp: L' — column j is the state of omega's column j at the end of
            round j (lower triangular up to the pivoting, numerators of the
            eventual L).
        vp: V' — column j is the state of the transform's column j at the
            same moment (denominator data).
        hp: H' — final omega = M * W'.
        wp: W' — final accumulated column transform (det ±1).
        col_val: valuation of H'[j, j] per column (None when zeroish).
        degenerate: True when some diagonal entry of L' is indistinguishable
            from zero (the decomposition is returned anyway; conversions
            refuse it).
    """

    lp: PrecMatrix
    vp: PrecMatrix
    hp: PrecMatrix
    wp: PrecMatrix
    col_val: list
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "L'": self.lp.to_json(),
            "V'": self.vp.to_json(),
            "H'": self.hp.to_json(),
            "W'": self.wp.to_json(),
            "col_val": self.col_val,
            "degenerate": self.degenerate,
        }


def lv_decomposition(m: PrecMatrix) -> LvOutput:
    """Pivoted elimination accumulating the transform: H' = M * W'.

    Same elimination as :func:`stable_l` (swaps and updates applied to the
    transform as well), with columns of (omega, transform) snapshotted at
    the end of their round into (L', V').  Degeneracy (a zeroish diagonal
    in L') is reported via the flag, not an exception; only an unforced
    swap comparison raises (AmbiguousValuation).
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    n = working_precision(m)
    omega = m.copy()
    wp = PrecMatrix.identity_like(m, d, n)
    lp = PrecMatrix.zero_like(m, d, d, n)
    vp = PrecMatrix.zero_like(m, d, d, n)
    for j in range(d):
        for i in _round_swaps(omega, j, n, wp):
            _eliminate(omega, i, j, n, wp)
        for r in range(d):
            lp[r, j] = omega[r, j]
            vp[r, j] = wp[r, j]
    col_val = [_val_or_none(omega[j, j]) for j in range(d)]
    degenerate = any(lp[j, j].is_zeroish for j in range(d))
    return LvOutput(lp=lp, vp=vp, hp=omega, wp=wp, col_val=col_val, degenerate=degenerate)


def lv_to_l(out: LvOutput) -> PrecMatrix:
    """Recover the unit lower triangular factor from a split decomposition.

    L[i, j] = L'[i, j] / L'[j, j] at prescribed precision
    O(pi^(N - v_j + min(0, w))), where v_j = sum over k <= j of
    (v(L'[k, k]) - v(V'[k, k])) equals the j-th principal minor valuation of
    the (permuted) input, and w is the valuation offset of the quotient.
    Produces exactly the factor :func:`stable_l` returns, entry for entry
    and precision for precision.

    Raises DegenerateDecomposition if a needed diagonal entry of L' or V'
    is indistinguishable from zero.
    """
    d = out.lp.nrows
    n = working_precision(out.lp)
    lower = PrecMatrix.identity_like(out.lp, d, n)
    v = 0
    for j in range(d):
        lkk, vkk = out.lp[j, j], out.vp[j, j]
        if lkk.is_zeroish or vkk.is_zeroish:
            raise DegenerateDecomposition(
                f"diagonal entry at column {j} indistinguishable from zero"
            )
        v += lkk.valuation - vkk.valuation
        for i in range(j + 1, d):
            quot = out.lp[i, j] / lkk
            lower[i, j] = quot.cap_abs(
                _prescribed_quotient(out.lp[i, j], lkk.valuation, v, n)
            )
    return lower


def hermite_from_lv(out: LvOutput) -> PrecMatrix:
    """Hermite normal form H of the input from its split decomposition.

    With v_j = v(H'[j, j]) and u_j the unit part of H'[j, j]:
    H[j, j] = pi^v_j exactly (represented at absolute precision N),
    H[i, j] = H'[i, j] / u_j for i > j at absolute precision N - v_j, and
    everything above the diagonal is an exact zero O(pi^N).

    Raises DegenerateDecomposition when a diagonal entry of H' is
    indistinguishable from zero (the form requires unit-detectable pivots).
    """
    d = out.hp.nrows
    n = working_precision(out.hp)
    proto = out.hp.rows[0][0]
    h = PrecMatrix.zero_like(out.hp, d, d, n)
    for j in range(d):
        hjj = out.hp[j, j]
        if hjj.is_zeroish:
            raise DegenerateDecomposition(
                f"H' diagonal at column {j} indistinguishable from zero"
            )
        vj = hjj.valuation
        uj = hjj / PrecElem.unit_form(proto.cfg, vj, 1, hjj.rel_prec)
        h[j, j] = PrecElem.unit_form(proto.cfg, vj, 1, n - vj)
        for i in range(j + 1, d):
            h[i, j] = (out.hp[i, j] / uj).cap_abs(n - vj)
    return h


def lower_triangular_inverse(m: PrecMatrix) -> PrecMatrix:
    """Inverse of a lower triangular matrix by forward substitution.

    Strictly-upper entries are treated as the exact zeros they are (the
    elimination leaves O(pi^N) there).  Raises DegenerateInput when a
    diagonal entry is indistinguishable from zero.  Works for scalar and
    series entries alike; no precision capping is applied.
    """
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    for j in range(d):
        if m[j, j].is_zeroish:
            raise DegenerateInput(
                f"diagonal entry {j} indistinguishable from zero"
            )
    n = working_precision(m)
    out = PrecMatrix.zero_like(m, d, d, n)
    for c in range(d):
        for i in range(c, d):
            if i == c:
                acc = m[i, i].like_one(n)
            else:
                acc = None
            for k in range(c, i):
                term = m[i, k] * out[k, c]
                acc = -term if acc is None else acc - term
            out[i, c] = acc / m[i, i]
    return out


# ---------------------------------------------------------------------------
# block variants (generic over scalar / truncated-series entries)
# ---------------------------------------------------------------------------


@dataclass
class BlockL:
    """Result of the block elimination.

    Attributes:
        lower: block unit lower triangular factor (diagonal blocks are
            identities for :func:`block_l`; unit lower triangular ones for
            :func:`block_l_unitlower`).
        block_vals: the precision-budget valuations v used at each block
            boundary (sum of diagonal valuations strictly above the block).
        n: working absolute precision.
    """

    lower: PrecMatrix
    block_vals: list
    n: int


def _block_elimination(m: PrecMatrix, block_sizes: Sequence[int], clear: bool) -> BlockL:
    d = m.nrows
    if d != m.ncols:
        raise ValueError("square matrix required")
    if any(b < 1 for b in block_sizes) or sum(block_sizes) != d:
        raise ValueError(f"block sizes {list(block_sizes)} do not tile dimension {d}")
    n = working_precision(m)
    omega = m.copy()
    lower = PrecMatrix.zero_like(m, d, d, n)
    block_vals = []
    j0 = 0
    boundaries = []
    acc = 0
    for b in block_sizes:
        acc += b
        boundaries.append(acc)
    b_idx = 0
    for j in range(d):
        for i in _round_swaps(omega, j, n):
            _eliminate(omega, i, j, n)
        if j + 1 == boundaries[b_idx]:
            hi = boundaries[b_idx]  # block spans columns j0..hi-1
            # normalize: L's block columns are omega's scaled by the pivot
            for jp in range(j0, hi):
                piv = omega[jp, jp]
                if piv.is_zeroish:
                    raise DegenerateInput(
                        f"block pivot at column {jp} indistinguishable from zero"
                    )
                for r in range(d):
                    lower[r, jp] = omega[r, jp] / piv
            if clear:
                # make the diagonal block an identity: subtract the other
                # block columns one at a time, re-reading updated entries
                # (the one-shot simultaneous sum would leave second-order
                # residue below the first subdiagonal)
                for jp in range(j0, hi):
                    for ip in range(jp + 1, hi):
                        s = lower[ip, jp]
                        for r in range(d):
                            lower[r, jp] = lower[r, jp] - s * lower[r, ip]
            # precision budget: diagonal valuations strictly above the block
            vparts = [omega[k, k].pivot_scalar() for k in range(j0)]
            if any(e.is_zeroish for e in vparts):
                raise DegenerateInput(
                    "diagonal entry above block indistinguishable from zero"
                )
            v = sum(e.valuation for e in vparts)
            block_vals.append(v)
            for jp in range(j0, hi):
                for ip in range(j0, d):
                    lower[ip, jp] = lower[ip, jp].cap_abs(n - 2 * v)
            j0 = hi
            b_idx += 1
    return BlockL(lower=lower, block_vals=block_vals, n=n)


def block_l(m: PrecMatrix, block_sizes: Sequence[int]) -> BlockL:
    """Block unit lower triangular factor for the given block type.

    Runs the pivoted elimination and, at each block boundary, normalizes the
    block's columns by their pivots and clears the diagonal block to the
    identity, capping the block's entries at O(pi^(N - 2v)) where v is the
    diagonal valuation budget above the block.  Entries only ever lose
    precision at the cap (the literal re-declaration could otherwise claim
    digits the arithmetic never produced).

    Works unchanged for scalar and truncated-series entries (pivoting looks
    at constant coefficients in the series case).
    """
    return _block_elimination(m, block_sizes, clear=True)


def block_l_unitlower(m: PrecMatrix, block_sizes: Sequence[int]) -> BlockL:
    """Same as :func:`block_l` but the diagonal blocks are left unit lower
    triangular instead of being cleared to identities (cheaper; equally
    valid as a block factor)."""
    return _block_elimination(m, block_sizes, clear=False)
