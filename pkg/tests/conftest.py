import random
from fractions import Fraction

import pytest
from hypothesis import settings

from dvrlu import DvrConfig, PrecElem, PrecMatrix

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def flat_from_ints(cfg: DvrConfig, rows, n=None) -> PrecMatrix:
    """Integer matrix at flat absolute precision n (default cfg.prec)."""
    n = cfg.prec if n is None else n
    return PrecMatrix(
        [[PrecElem.from_int(cfg, x, abs_prec=n) for x in row] for row in rows]
    )


def random_int_rows(rng: random.Random, d: int, p: int, n: int):
    """Uniform integer representatives mod p^n, as plain ints."""
    hi = p**n
    return [[rng.randrange(hi) for _ in range(d)] for _ in range(d)]


def elem_matches_fraction(e: PrecElem, x: Fraction) -> bool:
    """Every claimed digit of e agrees with the exact rational x."""
    from oracles import fraction_is_small, fraction_matches_digits

    p = e.cfg.p
    if e.is_zeroish:
        return fraction_is_small(Fraction(x), p, e.val_lower_bound)
    return fraction_matches_digits(
        Fraction(x), p, e.valuation, e.unit_digits, e.abs_prec
    )


@pytest.fixture(scope="session")
def mc():
    """Session cache of engine runs keyed by (p, d, trials, seed)."""
    from dvrlu.stats.montecarlo import simulate

    cache = {}

    def get(p, d, trials, seed=0, record_table=False):
        key = (p, d, trials, seed, record_table)
        if key not in cache:
            cache[key] = simulate(p, d, trials, seed=seed, record_table=record_table)
        return cache[key]

    return get
