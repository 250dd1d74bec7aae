"""Rigorous analytic constants for the unit square.

Three families feed every infinite-dimensional bound chain:

  C_P  -- Poincare: ||v||_L2 <= C_P ||v||_H10, C_P = 1/sqrt(2 pi^2) from the
          first Dirichlet eigenvalue of the Laplacian on (0,1)^2.
  C_4  -- embedding H^1_0 -> L^4.  Derived here from the pointwise bound
          u(x,y)^2 <= int |u u_x| dx' (valid since u vanishes on the
          boundary), which gives int u^4 <= (1/2) ||u||_L2^2 ||grad u||^2 and
          hence C_4 = (C_P^2/2)^{1/4}.  Higher even embeddings follow from
          ||v||_L2 <= ||grad v||_L1 / sqrt(2) recursively.
  C_N  -- projection-error constant of the tensor Legendre space V_h^N:
          both  ||(I-R_h) A^{-1} g||_H10 <= C_N ||g||_L2  and
          ||w||_L2 <= C_N ||w||_H10 on the complement hold with the same
          best constant (a duality argument), so one upper bound serves
          both.  The bound used: split the complement at a cut degree M
          into a finite slab (complement Poincare constant via verified
          eigenvalue bounds, tailspace module) and the analytic remainder
          C(M) = sqrt(chat_M^2 + cbar_M^2), where chat/cbar are 1D Legendre
          coefficient-tail constants and the cross-derivative identity
          ||D^2 u|| = ||Lap u|| on the square combines the directions.

Values are configuration with provenance: a JSON table can override any
constant, and certificates record sources and overrides.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .interval import Interval, _up

_SRC_CP = "first Dirichlet eigenvalue 2*pi^2 of the unit square"
_SRC_C4 = "boundary-splitting Ladyzhenskaya bound: int u^4 <= 1/2 ||u||^2 ||grad u||^2"
_SRC_CN = ("finite complement slab (verified Schur/eigenvalue bounds, cut M={m}) "
           "+ 1D Legendre tail estimate beyond the cut")


class ConstantRangeError(ValueError):
    """Requested constant outside the certified table."""


def poincare_constant() -> Interval:
    """Enclosure of 1/(sqrt(2) pi) on the unit square."""
    two = Interval.point(2.0)
    return Interval.point(1.0) / (two.sqrt() * Interval.pi())


def embedding_L4() -> Interval:
    """Enclosure of the default H^1_0 -> L^4 embedding constant."""
    cp = poincare_constant()
    return (cp.sqr() * Interval.point(0.5)).sqrt().sqrt()


def _root_upper(x: float, m: int) -> float:
    """Smallest convenient float r with r^m >= x (x >= 0)."""
    if x <= 0.0:
        return 0.0
    r = x ** (1.0 / m)
    for _ in range(60):
        if Fraction(r) ** m >= Fraction(x):
            return r
        r = float(_up(r))
    raise ArithmeticError("root certification failed")


def embedding_constant(p: int, c4: Optional[Interval] = None) -> Interval:
    """Upper bound of the H^1_0 -> L^p embedding constant, p even >= 2.

    p=2 is Poincare, p=4 the sharp square bound; beyond that the recursion
    ||u^m||_L2 <= (m/sqrt(2)) ||u^{m-1}||_L2 ||grad u||_L2 is applied.
    """
    if p % 2 or p < 2:
        raise ValueError("only even p >= 2 supported")
    m = p // 2
    if m == 1:
        return poincare_constant()
    if m == 2:
        return c4 if c4 is not None else embedding_L4()
    prev = embedding_constant(p - 2, c4)
    # C_{2m}^m = (m/sqrt 2) * C_{2(m-1)}^{m-1}
    acc = Interval.point(float(m)) / Interval.point(2.0).sqrt()
    for _ in range(m - 1):
        acc = acc * prev
    return Interval(0.0, _root_upper(acc.hi, m))


@dataclass
class ConstantRecord:
    value: Interval
    source: str
    overridden: bool = False

    def to_json(self) -> dict:
        return {"value": list(self.value.to_hex()), "source": self.source,
                "overridden": self.overridden}

    @staticmethod
    def from_json(obj: dict, overridden: bool = True) -> "ConstantRecord":
        return ConstantRecord(value=Interval.from_hex(obj["value"]),
                              source=obj.get("source", "user override"),
                              overridden=overridden)


def _chat_tail(m: int) -> Interval:
    """1D L^2-projection tail constant on (0,1) for degree cut m."""
    def inv_sqrt(a: int, b: int) -> Interval:
        prod = Interval.from_fraction(Fraction(a) * Fraction(b))
        return Interval.point(1.0) / prod.sqrt()
    term1 = inv_sqrt(2 * m + 1, 2 * m + 3)
    term2 = inv_sqrt(2 * m + 3, 2 * m + 5)
    return (term1 + term2) * Interval.point(0.5)


def _cbar_tail(m: int, rows: int = 96) -> Interval:
    """1D complement Poincare constant beyond degree m (Gershgorin rows)."""
    worst = Interval.point(0.0)
    for k in range(m + 1, m + rows + 1):
        diag = Interval.from_fraction(
            Fraction(1, 4 * (2 * k + 1)) * (Fraction(1, 2 * k - 1) + Fraction(1, 2 * k + 3)))
        up_prod = Interval.from_fraction(Fraction((2 * k + 1) * (2 * k + 5)))
        off_up = Interval.point(1.0) / (Interval.from_fraction(Fraction(4 * (2 * k + 3)))
                                        * up_prod.sqrt())
        row = diag + off_up
        if k - 2 > m:
            dn_prod = Interval.from_fraction(Fraction((2 * k - 3) * (2 * k + 1)))
            off_dn = Interval.point(1.0) / (Interval.from_fraction(Fraction(4 * (2 * k - 1)))
                                            * dn_prod.sqrt())
            row = row + off_dn
        if row.hi > worst.hi:
            worst = row
    # analytic cap for all rows beyond the window: row_k <= 1/(2k-3)^2
    kc = m + rows + 1
    cap = Interval.from_fraction(Fraction(1, (2 * kc - 3) ** 2))
    hi = max(worst.hi, cap.hi)
    return Interval(0.0, hi).sqrt()


def analytic_tail_constant(m: int) -> Interval:
    """Projection constant of the full tensor space V_h^M (analytic route).

    Combines the 1D constants through the cross-derivative identity on the
    square: C(M) = sqrt(chat_M^2 + cbar_M^2).
    """
    a = _chat_tail(m)
    b = _cbar_tail(m)
    return (a.sqr() + b.sqr()).sqrt()


def projection_constant_derived(n: int, cut: Optional[int] = None) -> tuple[Interval, str]:
    """Certified C_N for V_h^N on (0,1)^2 together with its source string."""
    from .tailspace import complement_poincare  # deferred: heavy import chain
    m = cut if cut is not None else n + 16
    slab = complement_poincare(n, m)
    tail = analytic_tail_constant(m)
    value = (slab.sqr() + tail.sqr()).sqrt()
    return Interval(0.0, value.hi), _SRC_CN.format(m=m)


@dataclass
class ConstantProvider:
    """Source-tagged constants; everything the bound chains consume."""

    c_p: ConstantRecord = field(default_factory=lambda: ConstantRecord(
        poincare_constant(), _SRC_CP))
    c_4: ConstantRecord = field(default_factory=lambda: ConstantRecord(
        embedding_L4(), _SRC_C4))
    c_n_table: dict[int, ConstantRecord] = field(default_factory=dict)
    max_degree: int = 64
    cut_margin: int = 16

    # --- accessors ------------------------------------------------
    @property
    def poincare(self) -> Interval:
        return self.c_p.value

    @property
    def l4(self) -> Interval:
        return self.c_4.value

    def projection_constant(self, n: int) -> Interval:
        if n < 1:
            raise ConstantRangeError("degree must be >= 1")
        if n in self.c_n_table:
            return self.c_n_table[n].value
        if n > self.max_degree:
            raise ConstantRangeError(
                f"no certified projection constant for N={n} (table covers up to "
                f"{self.max_degree}); supply one via the constants file")
        value, src = projection_constant_derived(n, n + self.cut_margin)
        self.c_n_table[n] = ConstantRecord(value, src)
        return value

    def embedding(self, p: int) -> Interval:
        return embedding_constant(p, self.c_4.value)

    # --- overrides / io ---------------------------------------------
    def override(self, name: str, value: Interval, source: str, n: Optional[int] = None):
        rec = ConstantRecord(value, source, overridden=True)
        if name == "C_P":
            self.c_p = rec
        elif name == "C_4":
            self.c_4 = rec
        elif name == "C_N":
            if n is None:
                raise ValueError("C_N override needs a degree")
            self.c_n_table[n] = rec
        else:
            raise ValueError(f"unknown constant {name!r}")

    def sources(self) -> dict:
        out = {"C_P": self.c_p.to_json(), "C_4": self.c_4.to_json(),
               "C_N": {str(n): rec.to_json() for n, rec in sorted(self.c_n_table.items())}}
        return out

    def to_file(self, path):
        with open(path, "w") as fh:
            json.dump(self.sources(), fh, indent=1, sort_keys=True)

    @staticmethod
    def from_file(path) -> "ConstantProvider":
        with open(path) as fh:
            obj = json.load(fh)
        prov = ConstantProvider()
        if "C_P" in obj:
            prov.c_p = ConstantRecord.from_json(obj["C_P"])
        if "C_4" in obj:
            prov.c_4 = ConstantRecord.from_json(obj["C_4"])
        for key, rec in obj.get("C_N", {}).items():
            prov.c_n_table[int(key)] = ConstantRecord.from_json(rec)
        return prov
