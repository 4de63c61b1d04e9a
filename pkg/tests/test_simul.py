"""Tests for the simultaneous block factorization driver."""

from __future__ import annotations

import random

import pytest

from dvrlu.config import DvrConfig
from dvrlu.element import PrecElem
from dvrlu.errors import DegenerateInput, ExhaustedRetries
from dvrlu.lu_fast import matmul
from dvrlu.matrix import PrecMatrix
from dvrlu.simul import (
    SimulFailure,
    SimulResult,
    attempt_simultaneous,
    family_from_json,
    invert_via_lv,
    min_val_bound,
    required_v,
    result_to_json,
    simultaneous_block_lu,
)

from conftest import flat_from_ints


# ---------------------------------------------------------------------------
# the precision budget


def test_required_v_frozen_values():
    assert required_v(2, [4], 0.25, "base") == 4
    assert required_v(2, [4], 0.25, "pi") == 5
    # generous eps with one tiny block needs no budget at all
    assert required_v(5, [1], 0.9, "base") == 0


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("eps", [0.5, 0.25, 0.1])
def test_required_v_pi_never_below_base(q, eps):
    for r_list in ([1], [2, 2], [4, 1, 3]):
        base = required_v(q, r_list, eps, "base")
        sharp = required_v(q, r_list, eps, "pi")
        assert sharp >= base
        # both satisfy their defining inequality and are minimal for it
        s = sum(r_list)
        assert q**base >= s / ((q - 1) * eps) - 1e-9
        if base > 0:
            assert q ** (base - 1) < s / ((q - 1) * eps) + 1e-9


def test_required_v_monotone_in_eps_and_size():
    assert required_v(2, [2], 0.1) >= required_v(2, [2], 0.5)
    assert required_v(2, [2, 2], 0.25) >= required_v(2, [2], 0.25)


def test_required_v_validation():
    with pytest.raises(ValueError):
        required_v(2, [], 0.5)
    with pytest.raises(ValueError):
        required_v(2, [0], 0.5)
    with pytest.raises(ValueError):
        required_v(2, [1], 0.0)
    with pytest.raises(ValueError):
        required_v(2, [1], 1.0)
    with pytest.raises(ValueError):
        required_v(2, [1], 0.5, variant="sharpest")


# ---------------------------------------------------------------------------
# pieces


def test_min_val_bound_mixes_units_and_zeroish():
    cfg = DvrConfig(p=5, prec=8)
    a = PrecElem.from_int(cfg, 25, abs_prec=8)  # val 2
    b = PrecElem.from_int(cfg, 3, abs_prec=8)  # val 0
    z = PrecElem.bigoh(cfg, 3)  # zeroish at O(5^3)
    m = PrecMatrix([[a, b], [z, a]])
    assert min_val_bound(m) == 0
    q = a / PrecElem.from_int(cfg, 125, abs_prec=8)  # val -1
    assert min_val_bound(PrecMatrix([[q]])) == -1


def test_invert_via_lv_roundtrip():
    cfg = DvrConfig(p=5, prec=12)
    rng = random.Random(9)
    rows = [[rng.randrange(5**12) for _ in range(3)] for _ in range(3)]
    m = flat_from_ints(cfg, rows)
    inv, out = invert_via_lv(m)
    prod = matmul(m, inv)
    for i in range(3):
        for j in range(3):
            e = prod[i, j]
            if i == j:
                diff = e - e.like_one(e.abs_prec)
            else:
                diff = e
            assert diff.is_zeroish
            assert diff.val_lower_bound >= 12 - 2 * max(0, -min_val_bound(inv))


def test_invert_via_lv_rejects_undetectable_determinant():
    cfg = DvrConfig(p=2, prec=6)
    m = PrecMatrix([[PrecElem.bigoh(cfg, 6)]])
    with pytest.raises(DegenerateInput):
        invert_via_lv(m)


def test_simul_failure_str():
    assert str(SimulFailure("invertibility", detail="no pivot")) == (
        "invertibility: no pivot"
    )
    assert "matrix 2" in str(SimulFailure("factor", matrix_index=2, detail="x"))


# ---------------------------------------------------------------------------
# one attempt


def _random_family(cfg, rng, d, specs):
    fam = []
    for sizes in specs:
        rows = [[rng.randrange(cfg.p**cfg.prec) for _ in range(d)] for _ in range(d)]
        fam.append((flat_from_ints(cfg, rows), list(sizes)))
    return fam


def test_attempt_success_certifies_all_bounds():
    cfg = DvrConfig(p=2, prec=40)
    rng = random.Random(17)
    fam = _random_family(cfg, rng, 4, [[2, 2], [4]])
    v = required_v(2, [2, 1], 0.5)
    got = attempt_simultaneous(cfg, fam, v, random.Random(3))
    assert isinstance(got, SimulResult)
    assert min_val_bound(got.omega_inv) >= -v
    assert len(got.factors) == 2
    for fact in got.factors:
        assert min_val_bound(fact.lower) >= -v


def test_attempt_rejects_wrong_shape():
    cfg = DvrConfig(p=2, prec=10)
    rng = random.Random(0)
    fam = _random_family(cfg, rng, 3, [[3]])
    fam.append((flat_from_ints(cfg, [[1, 0], [0, 1]]), [2]))
    with pytest.raises(ValueError):
        attempt_simultaneous(cfg, fam, 1, random.Random(1))


def test_attempt_factor_valuation_failure(monkeypatch):
    # pin omega to the identity so the product is the raw matrix, whose
    # unit-lower factor costs a 1/p entry; budget v = 0 must reject it
    cfg = DvrConfig(p=5, prec=10)
    ident = PrecMatrix.identity_like(
        flat_from_ints(cfg, [[1, 1], [1, 1]]), 2, 10
    )
    monkeypatch.setattr("dvrlu.simul.random_matrix", lambda *a, **k: ident.copy())
    fam = [(flat_from_ints(cfg, [[5, 1], [1, 1]]), [1, 1])]
    got = attempt_simultaneous(cfg, fam, 0, random.Random(0))
    assert isinstance(got, SimulFailure)
    assert got.stage == "factor-valuation"
    assert got.matrix_index == 0
    # a budget of one digit absorbs the same loss
    ok = attempt_simultaneous(cfg, fam, 1, random.Random(0))
    assert isinstance(ok, SimulResult)


def test_attempt_factor_stage_failure(monkeypatch):
    cfg = DvrConfig(p=2, prec=8)
    ident = PrecMatrix.identity_like(
        flat_from_ints(cfg, [[1, 1], [1, 1]]), 2, 8
    )
    monkeypatch.setattr("dvrlu.simul.random_matrix", lambda *a, **k: ident.copy())
    zero = flat_from_ints(cfg, [[0, 0], [0, 0]])
    got = attempt_simultaneous(cfg, [(zero, [1, 1])], 2, random.Random(0))
    assert isinstance(got, SimulFailure)
    assert got.stage == "factor"


# ---------------------------------------------------------------------------
# the retry driver


def test_simultaneous_block_lu_succeeds_quickly():
    cfg = DvrConfig(p=2, prec=40)
    rng = random.Random(23)
    fam = _random_family(cfg, rng, 4, [[1, 3], [2, 2]])
    res = simultaneous_block_lu(cfg, fam, eps=0.5, seed=5)
    assert res.v == required_v(2, [2, 2], 0.5)
    assert res.n == 40
    assert res.tries <= 10
    for fact in res.factors:
        assert min_val_bound(fact.lower) >= -res.v


def test_simultaneous_block_lu_exhausts_on_hopeless_draws(monkeypatch):
    cfg = DvrConfig(p=2, prec=8)
    bad = PrecMatrix(
        [[PrecElem.bigoh(cfg, 8) for _ in range(2)] for _ in range(2)]
    )
    monkeypatch.setattr("dvrlu.simul.random_matrix", lambda *a, **k: bad.copy())
    fam = [(flat_from_ints(cfg, [[1, 0], [0, 1]]), [1, 1])]
    with pytest.raises(ExhaustedRetries) as info:
        simultaneous_block_lu(cfg, fam, eps=0.5, seed=0, max_tries=5)
    assert info.value.tries == 5
    assert info.value.last_failure.stage == "invertibility"


# ---------------------------------------------------------------------------
# JSON plumbing


def test_family_json_roundtrip():
    cfg = DvrConfig(p=3, prec=12)
    rng = random.Random(2)
    fam = _random_family(cfg, rng, 3, [[1, 2], [3]])
    obj = {
        "config": cfg.to_json(),
        "eps": 0.25,
        "variant": "pi",
        "family": [
            {"matrix": mat.to_json(), "block_type": sizes} for mat, sizes in fam
        ],
    }
    cfg2, eps, variant, fam2 = family_from_json(obj)
    assert (cfg2.p, cfg2.prec) == (3, 12)
    assert eps == 0.25 and variant == "pi"
    assert [sizes for _, sizes in fam2] == [[1, 2], [3]]
    for (a, _), (b, _) in zip(fam, fam2):
        assert a.to_json() == b.to_json()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda o: o.pop("config"),
        lambda o: o.pop("eps"),
        lambda o: o["family"].clear(),
        lambda o: o["family"][0].pop("block_type"),
        lambda o: o["family"][0].__setitem__("block_type", ["x"]),
    ],
)
def test_family_json_malformed(mutate):
    cfg = DvrConfig(p=2, prec=6)
    obj = {
        "config": cfg.to_json(),
        "eps": 0.5,
        "family": [
            {
                "matrix": flat_from_ints(cfg, [[1, 0], [0, 1]]).to_json(),
                "block_type": [1, 1],
            }
        ],
    }
    mutate(obj)
    with pytest.raises(ValueError, match="malformed instance"):
        family_from_json(obj)


def test_result_json_keys():
    cfg = DvrConfig(p=2, prec=30)
    rng = random.Random(4)
    fam = _random_family(cfg, rng, 3, [[1, 2]])
    res = simultaneous_block_lu(cfg, fam, eps=0.5, seed=1)
    obj = result_to_json(res)
    assert set(obj) == {"v", "n", "tries", "omega", "omega_inv", "factors"}
    assert obj["n"] == 30
    assert len(obj["factors"]) == 1
