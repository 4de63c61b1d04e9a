"""Truncated power series with precision-tracked coefficients.

A :class:`SeriesElem` is a length-``order`` tuple of scalar coefficients
(:class:`~dvrlu.element.PrecElem`), i.e. an element of R[[X]]/(X^order) whose
coefficients may individually live in the fraction field.  It implements the
same element protocol as the scalars, so the block elimination runs on
series matrices unchanged; pivoting decisions are driven by the constant
coefficient (an entry counts as "indistinguishable from zero" when its
constant coefficient does).
"""

from __future__ import annotations

from typing import Sequence

from .config import DvrConfig
from .element import PrecElem
from .errors import DivisionByUnknownZero


class SeriesElem:
    __slots__ = ("cfg", "coeffs")

    def __init__(self, cfg: DvrConfig, coeffs: Sequence[PrecElem]):
        if not coeffs:
            raise ValueError("series needs at least one coefficient")
        self.cfg = cfg
        self.coeffs = tuple(coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def constant(cls, scalar: PrecElem, order: int, pad_abs: int) -> "SeriesElem":
        pad = [PrecElem.bigoh(scalar.cfg, pad_abs) for _ in range(order - 1)]
        return cls(scalar.cfg, [scalar] + pad)

    # -- element protocol ----------------------------------------------------

    @property
    def is_zeroish(self) -> bool:
        """Zero for pivoting purposes: constant coefficient indistinguishable
        from zero (such an entry is not invertible in the truncated ring)."""
        return self.coeffs[0].is_zeroish

    @property
    def abs_prec(self) -> int:
        return min(c.abs_prec for c in self.coeffs)

    @property
    def val_lower_bound(self) -> int:
        """Guaranteed lower bound on the pi-valuation of every coefficient."""
        return min(c.val_lower_bound for c in self.coeffs)

    def pivot_scalar(self) -> PrecElem:
        return self.coeffs[0]

    def like_one(self, abs_prec: int) -> "SeriesElem":
        one = self.coeffs[0].like_one(abs_prec)
        return SeriesElem.constant(one, self.order, abs_prec)

    def like_zero(self, abs_prec: int) -> "SeriesElem":
        z = self.coeffs[0].like_zero(abs_prec)
        return SeriesElem(self.cfg, [z] * self.order)

    def lift_to_precision(self, n: int) -> "SeriesElem":
        return SeriesElem(self.cfg, [c.lift_to_precision(n) for c in self.coeffs])

    def cap_abs(self, n: int) -> "SeriesElem":
        return SeriesElem(self.cfg, [c.cap_abs(n) for c in self.coeffs])

    # -- arithmetic ------------------------------------------------------------

    def _check(self, other: "SeriesElem") -> None:
        if self.order != other.order:
            raise ValueError("series orders disagree")

    def __neg__(self) -> "SeriesElem":
        return SeriesElem(self.cfg, [-c for c in self.coeffs])

    def __add__(self, other: "SeriesElem") -> "SeriesElem":
        self._check(other)
        return SeriesElem(
            self.cfg, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other: "SeriesElem") -> "SeriesElem":
        self._check(other)
        return SeriesElem(
            self.cfg, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __mul__(self, other: "SeriesElem") -> "SeriesElem":
        self._check(other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc = acc + a[i] * b[k - i]
            out.append(acc)
        return SeriesElem(self.cfg, out)

    def __truediv__(self, other: "SeriesElem") -> "SeriesElem":
        """Long division in R[[X]]/(X^order); the divisor's constant
        coefficient must be distinguishable from zero (it may have positive
        valuation — quotient coefficients then live in the fraction field)."""
        self._check(other)
        g = other.coeffs
        if g[0].is_zeroish:
            raise DivisionByUnknownZero(
                "series division by element with zeroish constant coefficient"
            )
        q: list[PrecElem] = []
        for k in range(self.order):
            acc = self.coeffs[k]
            for i in range(1, k + 1):
                acc = acc - g[i] * q[k - i]
            q.append(acc / g[0])
        return SeriesElem(self.cfg, q)

    # -- comparison / io --------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesElem):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return "Series[" + ", ".join(map(repr, self.coeffs)) + "]"

    def to_json(self) -> list:
        return [c.to_json() for c in self.coeffs]

    @classmethod
    def from_json(cls, cfg: DvrConfig, obj: list, order: int) -> "SeriesElem":
        if not isinstance(obj, list) or len(obj) != order:
            raise ValueError(f"expected a list of {order} coefficients")
        return cls(cfg, [PrecElem.from_json(cfg, c) for c in obj])
