"""Ring configuration shared by every precision-tracked object.

A :class:`DvrConfig` fixes the complete discrete valuation ring we compute in:
the p-adic integers ``Z_p`` (backend ``"padic"``) or the power-series ring
``F_p[[t]]`` (backend ``"series"``).  In both cases the residue field has
cardinality ``p`` and elements are stored as finitely many base-``p`` digits,
so the two backends share all arithmetic; only the digit-carry rule differs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Backend(enum.Enum):
    """Which concrete DVR the digits live in."""

    PADIC = "padic"
    SERIES = "series"


@dataclass(frozen=True, slots=True)
class DvrConfig:
    """Immutable description of the working ring.

    Args:
        p: residue characteristic; must be prime.  This is both the residue
            field cardinality q and (for the padic backend) the uniformizer.
        prec: default relative precision for exact ring elements, i.e. the
            number of significant base-p digits carried by a freshly created
            unit.  Must be positive.
        backend: ``Backend.PADIC`` for Z_p, ``Backend.SERIES`` for F_p[[t]].
    """

    p: int
    prec: int
    backend: Backend = Backend.PADIC

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p!r}")
        # sympy is heavy; import only when a config is actually built.
        from sympy import isprime

        if not isprime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if not isinstance(self.prec, int) or self.prec < 1:
            raise ValueError(f"prec must be a positive integer, got {self.prec!r}")
        if not isinstance(self.backend, Backend):
            raise ValueError(f"backend must be a Backend, got {self.backend!r}")

    @property
    def q(self) -> int:
        """Residue field cardinality (alias of p; both backends have q = p)."""
        return self.p

    def to_json(self) -> dict:
        return {"backend": self.backend.value, "p": self.p, "prec": self.prec}

    @staticmethod
    def from_json(obj: dict) -> "DvrConfig":
        try:
            backend = Backend(obj.get("backend", "padic"))
            return DvrConfig(p=obj["p"], prec=obj["prec"], backend=backend)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed ring config: {exc}") from exc
