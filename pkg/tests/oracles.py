"""Independent exact references for the factorization tests.

Everything in this module works over exact rationals (``fractions.Fraction``)
and plain integers — no precision tracking, no imports from the package under
test.  The elimination oracle mirrors the pivoted column elimination over the
field of fractions, so the package's finite-precision answers can be checked
digit by digit against ground truth; the determinant and minor helpers give a
second, independent route to the same quantities (Cramer quotients, principal
minor valuations) so the oracle itself is cross-checked.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def val_of(x, p: int):
    """p-adic valuation of an int or Fraction; None for exact zero."""
    if x == 0:
        return None
    if isinstance(x, Fraction):
        return val_of(x.numerator, p) - val_of(x.denominator, p)
    x = abs(int(x))
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def exact_det(rows) -> Fraction:
    """Permutation-sum determinant (fine for the small oracle dimensions)."""
    d = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(d)):
        sign = 1
        seen = list(perm)
        # count inversions for the sign
        inv = sum(
            1
            for a in range(d)
            for b in range(a + 1, d)
            if seen[a] > seen[b]
        )
        sign = -1 if inv % 2 else 1
        prod = Fraction(1)
        for i in range(d):
            prod *= Fraction(rows[i][perm[i]])
        total += sign * prod
    return total


def leading_minor(rows, k: int) -> Fraction:
    """Determinant of the leading principal k x k minor."""
    return exact_det([row[:k] for row in rows[:k]])


def cramer_quotient(rows, i: int, j: int) -> Fraction:
    """The unit-lower-factor entry L[i, j] as a ratio of minors.

    Numerator: the (j+1) x (j+1) minor on rows 0..j-1 plus i and columns
    0..j.  Denominator: the leading (j+1) x (j+1) principal minor.
    """
    sel = list(range(j)) + [i]
    num = exact_det([[rows[r][c] for c in range(j + 1)] for r in sel])
    den = leading_minor(rows, j + 1)
    return num / den


def exact_profile(rows, p: int) -> dict:
    """Pivoted column elimination over Q, recording the valuation profile.

    The swap rule is v(entry) < v(pivot) with exact valuations (an exact
    zero never has smaller valuation than anything).  Returns a dict with:

    - 'table': (i, j) -> valuation read before the swap test (i < j) or at
      the round end (i == j); None for exact zero;
    - 'boundary_sums': sum of diagonal valuations after each round (None if
      a diagonal entry is exactly zero);
    - 'det_val': the last boundary sum;
    - 'swaps': column swaps performed, in order;
    - 'vl': max(0, -min quotient valuation) over the round-end reads
      v(w[i, j]) - v(w[j, j]) for i > j (exact zeros contribute nothing);
    - 'lower': dict (i, j) -> Fraction, the exact unit-lower factor entries
      (quotients at the end of round j), for i > j;
    - 'col_vals': sum of diagonal valuations up to column j, per j;
    - 'permuted': the column-permuted input (Fractions) under the *final*
      permutation;
    - 'col_orders': per round j, the column order (original indices) in
      effect at the end of that round — later rounds may swap earlier
      columns, so minor identities for round j must use this snapshot, not
      the final permutation;
    - 'degenerate': True if some pivot was exactly zero (elimination stops).
    """
    d = len(rows)
    w = [[Fraction(x) for x in row] for row in rows]
    perm = [[Fraction(x) for x in row] for row in rows]
    order = list(range(d))
    out = {
        "table": {},
        "boundary_sums": [],
        "swaps": [],
        "lower": {},
        "col_vals": [],
        "col_orders": [],
        "degenerate": False,
    }
    known_min = 0
    for j in range(d):
        for i in range(j):
            out["table"][(i, j)] = val_of(w[i][j], p)
            ve, vp_ = val_of(w[i][j], p), val_of(w[i][i], p)
            less = ve is not None and (vp_ is None or ve < vp_)
            if less:
                for r in range(d):
                    w[r][i], w[r][j] = w[r][j], w[r][i]
                    perm[r][i], perm[r][j] = perm[r][j], perm[r][i]
                order[i], order[j] = order[j], order[i]
                out["swaps"].append((i, j))
            if w[i][i] == 0:
                out["degenerate"] = True
                return out
            s = w[i][j] / w[i][i]
            for r in range(d):
                w[r][j] -= s * w[r][i]
        out["table"][(j, j)] = val_of(w[j][j], p)
        out["col_orders"].append(list(order))
        vals = [val_of(w[k][k], p) for k in range(j + 1)]
        out["boundary_sums"].append(None if None in vals else sum(vals))
        if None not in vals:
            out["col_vals"].append(sum(vals))
        else:
            out["col_vals"].append(None)
        if w[j][j] != 0:
            vjj = val_of(w[j][j], p)
            for i in range(j + 1, d):
                out["lower"][(i, j)] = w[i][j] / w[j][j]
                if j < d - 1 and w[i][j] != 0:
                    known_min = min(known_min, val_of(w[i][j], p) - vjj)
    out["det_val"] = out["boundary_sums"][-1]
    out["vl"] = -known_min
    out["permuted"] = perm
    return out


def reorder_columns(rows, order):
    """The matrix with columns rearranged to the given original-index order."""
    return [[row[c] for c in order] for row in rows]


def fraction_matches_digits(x: Fraction, p: int, v: int, u: int, abs_prec: int) -> bool:
    """Does the exact rational x equal u * p^v up to O(p^abs_prec)?

    x must be a p-adic integer times p^v (denominator prime to p after
    clearing p^v); the claimed digits agree iff v_p(x - u * p^v) >= abs_prec.
    """
    diff = x - Fraction(u) * Fraction(p) ** v
    if diff == 0:
        return True
    return val_of(diff, p) >= abs_prec


def fraction_is_small(x: Fraction, p: int, abs_prec: int) -> bool:
    """Is the exact rational x inside O(p^abs_prec)?"""
    return x == 0 or val_of(x, p) >= abs_prec


def integral_hermite_checks(rows, p: int, h_reps) -> bool:
    """Certify a Hermite-form representative against the exact input.

    ``h_reps`` is a square integer/Fraction matrix (representatives of the
    claimed form).  Checks that H differs from the input by a unimodular
    column transform over the local ring: M^{-1} H must be p-integral with
    p-unit determinant.  Triangularity and the p-power diagonal are the
    caller's (cheap) checks.
    """
    d = len(rows)
    m_det = exact_det(rows)
    if m_det == 0:
        return False
    # adjugate route for M^{-1} H, keeping everything exact
    inv_h = []
    for i in range(d):
        inv_row = []
        for j in range(d):
            # (M^{-1} H)[i][j] = sum_k adj[i][k] H[k][j] / det
            acc = Fraction(0)
            for k in range(d):
                minor = [
                    [Fraction(rows[r][c]) for c in range(d) if c != i]
                    for r in range(d)
                    if r != k
                ]
                cof = exact_det(minor) * (-1) ** (i + k)
                acc += cof * Fraction(h_reps[k][j])
            inv_row.append(acc / m_det)
        inv_h.append(inv_row)
    for i in range(d):
        for j in range(d):
            x = inv_h[i][j]
            if x != 0 and val_of(x, p) < 0:
                return False
    w_det = exact_det(inv_h)
    return w_det != 0 and val_of(w_det, p) == 0
