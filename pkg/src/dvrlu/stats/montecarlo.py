"""Vectorized Monte-Carlo engine for the elimination's valuation statistics.

The engine runs the pivoted column elimination on batches of Haar-random
matrices using exact machine arithmetic in Z/p^K — 64-bit wraparound words
for p = 2, and the largest K with p^K < 2^31 in signed words for odd p.  For
an integral matrix at flat precision K the tracked-precision elimination is
literally arithmetic in Z/p^K (the re-lifted scalars are exactly the masked
machine quotients), so the engine agrees with the object path digit for
digit; it additionally flags every trial whose pivoting comparison was not
forced (both operands exactly zero mod p^K), and those trials are re-run on
the object path with fresh Haar digits extending the matrix to precision 2K.

Trials are processed in fixed-size chunks, each with its own generator
seeded by (seed, chunk index), so results are identical for any worker
count and the chunked merge is deterministic.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config import DvrConfig
from ..element import PrecElem, pw
from ..errors import AmbiguousValuation, DegenerateInput
from ..lu_stable import vij_statistics
from ..matrix import PrecMatrix

_CHUNK_TARGET = 1 << 22  # entries per chunk's matrix block


def _chunk_size(d: int) -> int:
    return max(256, min(4096, _CHUNK_TARGET // max(1, d * d)))


class Engine:
    """Exact batched arithmetic in Z/p^K with valuation bookkeeping."""

    def __init__(self, p: int):
        self.p = p
        if p == 2:
            self.K = 64
            self.dtype = np.uint64
            self.modulus = None  # implicit 2^64 wraparound
            self.pows = None
        else:
            k = 1
            while p ** (k + 1) < 2**31:
                k += 1
            self.K = k
            self.dtype = np.int64
            self.modulus = p**k
            self.pows = np.array([p**i for i in range(k + 1)], dtype=np.int64)

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.p == 2:
            return rng.integers(
                0, np.iinfo(np.uint64).max, size=shape, dtype=np.uint64, endpoint=True
            )
        return rng.integers(0, self.modulus, size=shape, dtype=np.int64)

    def vals(self, x: np.ndarray) -> np.ndarray:
        """Entrywise valuation; exact zeros get the sentinel K."""
        if self.p == 2:
            out = np.full(x.shape, 64, dtype=np.int64)
            nz = x != 0
            if nz.any():
                xs = x[nz]
                lsb = xs & ((~xs) + np.uint64(1))
                out[nz] = np.log2(lsb.astype(np.float64)).astype(np.int64)
            return out
        out = np.zeros(x.shape, dtype=np.int64)
        y = x.copy()
        nz = y != 0
        while True:
            div = nz & (y % self.p == 0)
            if not div.any():
                break
            y[div] //= self.p
            out[div] += 1
        out[~nz] = self.K
        return out

    def inv_units(self, u: np.ndarray) -> np.ndarray:
        """Inverse of odd/unit residues mod p^K (Newton iteration)."""
        if self.p == 2:
            x = u.copy()
            two = np.uint64(2)
            for _ in range(5):  # 3 correct bits double per step: > 64 after 5
                x = x * (two - u * x)
            return x
        p, big = self.p, self.modulus
        base = (u % p).astype(np.int64)
        res = np.ones_like(base)
        e = p - 2
        while e:  # Fermat inverse mod p
            if e & 1:
                res = (res * base) % p
            base = (base * base) % p
            e >>= 1
        x = res
        bits = 1
        while bits < self.K:  # lift to mod p^K
            x = (x * ((2 - (u * x) % big) % big)) % big
            bits *= 2
        return x

    def _scaled_quotient(self, e, piv, vp, dead):
        """The elimination scalar, exactly as the object path lifts it:
        strip the pivot, multiply by its unit inverse, keep K - v_p digits."""
        if self.p == 2:
            vp_safe = np.where(dead, 0, vp).astype(np.uint64)
            piv_safe = np.where(dead, np.uint64(1), piv)
            inv = self.inv_units(piv_safe >> vp_safe)
            mask = (~np.uint64(0)) >> vp_safe
            s = ((e >> vp_safe) * inv) & mask
            return np.where(dead, np.uint64(0), s)
        vp_safe = np.where(dead, 0, vp)
        piv_safe = np.where(dead, 1, piv)
        inv = self.inv_units(piv_safe // self.pows[vp_safe])
        s = ((e // self.pows[vp_safe]) * inv) % self.pows[self.K - vp_safe]
        return np.where(dead, 0, s)

    def _sub_scaled(self, dst, s, src):
        if self.p == 2:
            return dst - s[:, None] * src
        return (dst - s[:, None] * src) % self.modulus

    def eliminate(self, m: np.ndarray, record_table: bool = False) -> dict:
        """Run the pivoted elimination in place on a (B, d, d) batch.

        Returns per-trial arrays:
          vl          max denominator exponent of the factor (int64)
          vl_ok       False when a diagonal read was exactly zero
          det_val     valuation of the determinant (boundary sum at d)
          det_ok      False when undeterminable at this precision
          boundary    (B, d) partial diagonal-valuation sums (-1 invalid)
          ambiguous   True when some swap comparison was not forced
          table       (B, d, d) valuation reads (sentinel K for zeros),
                      only when record_table
        """
        b, d, _ = m.shape
        k = self.K
        ambiguous = np.zeros(b, dtype=bool)
        vl_ok = np.ones(b, dtype=bool)
        boundary = np.full((b, d), -1, dtype=np.int64)
        table = np.full((b, d, d), -1, dtype=np.int64) if record_table else None
        min_m = np.zeros(b, dtype=np.int64)
        for j in range(d):
            for i in range(j):
                e = m[:, i, j]
                piv = m[:, i, i]
                ve = self.vals(e)
                vp = self.vals(piv)
                if record_table:
                    table[:, i, j] = ve
                ambiguous |= (ve == k) & (vp == k)
                sw = ve < vp
                if sw.any():
                    idx = np.nonzero(sw)[0]
                    tmp = m[idx, :, i].copy()
                    m[idx, :, i] = m[idx, :, j]
                    m[idx, :, j] = tmp
                    ve, vp = np.where(sw, vp, ve), np.where(sw, ve, vp)
                    e = m[:, i, j]
                    piv = m[:, i, i]
                dead = vp == k
                s = self._scaled_quotient(e, piv, vp, dead)
                m[:, :, j] = self._sub_scaled(m[:, :, j], s, m[:, :, i])
            idx = np.arange(j + 1)
            dvals = self.vals(np.ascontiguousarray(m[:, idx, idx]))
            if record_table:
                table[:, j, j] = dvals[:, j]
            good = ~(dvals == k).any(axis=1)
            boundary[good, j] = dvals[good].sum(axis=1)
            if j < d - 1:
                vjj = dvals[:, j]
                vl_ok &= vjj != k
                vsub = self.vals(np.ascontiguousarray(m[:, j + 1 :, j]))
                # exact-zero entries have quotient valuation >= K - v_jj >= 1,
                # so they can never lower the (<= 0 clipped) minimum: the
                # sentinel K makes them harmlessly large here
                mj = vsub.min(axis=1) - vjj
                min_m = np.minimum(min_m, np.where(vl_ok, mj, min_m))
        det_ok = boundary[:, d - 1] >= 0
        out = {
            "vl": -min_m,
            "vl_ok": vl_ok,
            "det_val": boundary[:, d - 1],
            "det_ok": det_ok,
            "boundary": boundary,
            "ambiguous": ambiguous,
        }
        if record_table:
            out["table"] = table
        return out


# ---------------------------------------------------------------------------
# object-path fallback for unresolved trials
# ---------------------------------------------------------------------------


def _object_retry(p: int, k: int, packed: np.ndarray, rng) -> Optional[dict]:
    """Re-run one trial on the tracked-element path at precision 2K,
    extending every entry with fresh Haar digits above p^K.  Returns the
    same per-trial fields as the engine, or None if still unresolved."""
    d = packed.shape[0]
    cfg = DvrConfig(p=p, prec=2 * k)
    hi = pw(p, k)
    if p == 2:
        ext = rng.integers(
            0, np.iinfo(np.uint64).max, size=(d, d), dtype=np.uint64, endpoint=True
        )
    else:
        ext = rng.integers(0, hi, size=(d, d), dtype=np.int64)
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            v = int(packed[i, j]) + hi * int(ext[i, j])
            row.append(PrecElem.from_int(cfg, v, abs_prec=2 * k))
        rows.append(row)
    try:
        prof = vij_statistics(PrecMatrix(rows))
    except (AmbiguousValuation, DegenerateInput):
        return None
    if prof.det_val is None or not isinstance(prof.vl, int):
        return None
    table = np.full((d, d), -1, dtype=np.int64)
    for (i, j), v in prof.table.items():
        table[i, j] = 2 * k if v is None else v
    boundary = np.array(
        [-1 if s is None else s for s in prof.boundary_sums], dtype=np.int64
    )
    return {
        "vl": prof.vl,
        "det_val": prof.det_val,
        "boundary": boundary,
        "table": table,
    }


# ---------------------------------------------------------------------------
# chunked simulation
# ---------------------------------------------------------------------------


def _run_chunk(args) -> dict:
    p, d, n, seed, chunk_idx, record_table = args
    eng = Engine(p)
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_idx]))
    m = eng.random(rng, (n, d, d))
    packed = m.copy()
    out = eng.eliminate(m, record_table)
    bad = out["ambiguous"] | ~out["vl_ok"] | ~out["det_ok"]
    retried = 0
    dropped = 0
    for t in np.nonzero(bad)[0]:
        retried += 1
        rng_t = np.random.default_rng(np.random.SeedSequence([seed, chunk_idx, int(t)]))
        fix = _object_retry(p, eng.K, packed[t], rng_t)
        if fix is None:
            dropped += 1
            continue
        out["vl"][t] = fix["vl"]
        out["det_val"][t] = fix["det_val"]
        out["boundary"][t] = fix["boundary"]
        out["vl_ok"][t] = out["det_ok"][t] = True
        out["ambiguous"][t] = False
        if record_table:
            out["table"][t] = fix["table"]
    keep = ~(out["ambiguous"] | ~out["vl_ok"] | ~out["det_ok"])
    res = {
        "vl": out["vl"][keep],
        "det_val": out["det_val"][keep],
        "boundary": out["boundary"][keep],
        "retried": retried,
        "dropped": dropped,
    }
    if record_table:
        res["table"] = out["table"][keep]
    return res


def simulate(
    p: int,
    d: int,
    trials: int,
    seed: int = 0,
    jobs: int = 1,
    record_table: bool = False,
) -> dict:
    """Chunked engine simulation over Haar-random matrices.

    Returns concatenated per-trial arrays ('vl', 'det_val', 'boundary', and
    'table' if requested) plus 'retried'/'dropped' counts.  Identical output
    for any `jobs`; chunks are merged in index order.
    """
    if d < 1:
        raise ValueError("d must be positive")
    size = _chunk_size(d)
    starts = list(range(0, trials, size))
    args = [
        (p, d, min(size, trials - s), seed, idx, record_table)
        for idx, s in enumerate(starts)
    ]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_chunk, args))
    else:
        parts = [_run_chunk(a) for a in args]
    out = {
        "vl": np.concatenate([c["vl"] for c in parts]),
        "det_val": np.concatenate([c["det_val"] for c in parts]),
        "boundary": np.concatenate([c["boundary"] for c in parts]),
        "retried": sum(c["retried"] for c in parts),
        "dropped": sum(c["dropped"] for c in parts),
    }
    if record_table:
        out["table"] = np.concatenate([c["table"] for c in parts])
    return out


def simulate_matrices(p: int, matrices: np.ndarray, record_table: bool = False) -> dict:
    """Run the engine on caller-supplied packed matrices (B, d, d).

    No retries: flags are returned as-is.  Used to cross-validate the engine
    against the tracked-element path on identical inputs.
    """
    eng = Engine(p)
    m = np.array(matrices, dtype=eng.dtype, copy=True)
    return eng.eliminate(m, record_table)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------


@dataclass
class McSummary:
    """Sample statistics of one simulated integer-valued quantity."""

    p: int
    d: int
    trials: int
    used: int
    mean: float
    stddev: float
    ci99: float
    histogram: dict = field(default_factory=dict)
    retried: int = 0
    dropped: int = 0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "d": self.d,
            "trials": self.trials,
            "used": self.used,
            "mean": self.mean,
            "stddev": self.stddev,
            "ci99": self.ci99,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "retried": self.retried,
            "dropped": self.dropped,
        }


def _summary(p, d, trials, arr, retried, dropped) -> McSummary:
    used = int(arr.size)
    mean = float(arr.mean()) if used else float("nan")
    std = float(arr.std(ddof=1)) if used > 1 else 0.0
    ci = 2.5758293035489004 * std / math.sqrt(used) if used else float("nan")
    vals, counts = np.unique(arr, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(vals, counts)}
    return McSummary(
        p=p, d=d, trials=trials, used=used, mean=mean, stddev=std, ci99=ci,
        histogram=hist, retried=retried, dropped=dropped,
    )


def monte_carlo_vl(p: int, d: int, trials: int, seed: int = 0, jobs: int = 1) -> McSummary:
    """Sample statistics of the factor's max denominator exponent V_L."""
    if d == 1:
        return McSummary(p=p, d=d, trials=trials, used=trials, mean=0.0,
                         stddev=0.0, ci99=0.0, histogram={0: trials})
    sim = simulate(p, d, trials, seed=seed, jobs=jobs)
    return _summary(p, d, trials, sim["vl"], sim["retried"], sim["dropped"])


def monte_carlo_det(p: int, d: int, trials: int, seed: int = 0, jobs: int = 1) -> McSummary:
    """Sample statistics of v(det M) for Haar-random M."""
    sim = simulate(p, d, trials, seed=seed, jobs=jobs)
    return _summary(p, d, trials, sim["det_val"], sim["retried"], sim["dropped"])


def tail_frequency(vl: np.ndarray, q: int, d: int, ell: int, centering: str = "statement") -> float:
    """Empirical P[|V_L - c| > ell + 1/2] with c = log_q d +- 1/2 (the
    asserted centering or the one its proof uses)."""
    c = math.log(d) / math.log(q)
    c = c + 0.5 if centering == "statement" else c - 0.5
    return float(np.mean(np.abs(vl.astype(np.float64) - c) > ell + 0.5))


def simulate_wi_2x2(p: int, trials: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Row-pivot profile (W_1, W_2) for random 2x2 matrices: W_1 is the
    minimal valuation in row 1, and W_1 + W_2 = v(det).  Trials where the
    determinant's valuation is undeterminable at precision K are dropped."""
    eng = Engine(p)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    m = eng.random(rng, (trials, 2, 2))
    if p == 2:
        det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    else:
        det = (m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]) % eng.modulus
    w1 = np.minimum(eng.vals(m[:, 0, 0]), eng.vals(m[:, 0, 1]))
    vdet = eng.vals(det)
    keep = (vdet < eng.K) & (w1 < eng.K)
    return w1[keep], (vdet - w1)[keep]
