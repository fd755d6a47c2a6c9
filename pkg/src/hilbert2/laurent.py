"""Truncated two-variable Laurent series over a Galois ring.

A Series approximates an element of the two-variable completion by a
finite coefficient grid on T^i * pi^j together with an explicit account
of what the approximation does not know:

  window        the stored bounding box (T-support pledge; pi rows of the
                grid).  Stored entries are exact representatives.
  e             global denominator exponent (value = grid * p^-e).
  q             per-pi-row certified precision (value level), an array
                aligned to the working cap: the true coefficient on row j
                differs from the stored one by at most p^q[row j].
  above_q       valuation bound for unknown content above the cap;
  below_q       same below the cap floor.

Content discarded beyond the T-cap is charged to the claim of its pi-row:
its re-entry into later products lands exactly where the row-claim
machinery expects it, at the cost of row (not cell) granularity.

Claims only shrink under arithmetic, by min-plus convolution against the
cofactor's stored valuations: pollution sitting under high-valuation rows
stays invisible, which is what keeps the 1/pi principal parts usable
through the cochain pairings.  Nothing is ever dropped silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _ops
from .coeffring import CoeffElem, CoeffRing
from .errors import (
    ConfigError,
    DenominatorBudgetExceeded,
    DivergentSubstitution,
    NotInvertible,
    PrecisionExhausted,
    WindowUnderflow,
)

INF = 10**9  # effectively infinite valuation / claim / radius

# headroom digits for p-adic exponent representatives fed to math.comb;
# covers v_p(k!) for every term count the windows can produce
_EXP_GUARD = 96


@dataclass(frozen=True)
class Window:
    t_lo: int
    t_hi: int
    y_lo: int
    y_hi: int

    def __post_init__(self):
        if self.t_lo > self.t_hi or self.y_lo > self.y_hi:
            raise WindowUnderflow(f"empty window {self}")

    @property
    def tspan(self) -> int:
        return self.t_hi - self.t_lo + 1

    @property
    def yspan(self) -> int:
        return self.y_hi - self.y_lo + 1

    def contains(self, i: int, j: int) -> bool:
        return self.t_lo <= i <= self.t_hi and self.y_lo <= j <= self.y_hi


def default_window(p: int, n: int, m: int, budget: int = 8) -> Window:
    """Working-cap defaults sized for level-n pairings at precision m.

    The floor covers the principal part of the 1/pi expansion at level n
    down to where its valuation exceeds the stored digits; the ceiling is
    tall enough that series tails only pair against those deep
    high-valuation rows; the T-range gives Frobenius images room so that
    T-overflow carries large valuation.
    """
    mstore = m + budget
    y_hi = max(2 * p ** (n + 1), p**n + (p**n - 1) * (mstore - 2) + 2)
    y_lo = -(p**n + (p**n - 1) * (mstore - 1) + 4)
    t_hi = max(3 * p**n, y_hi + 2 * p + 3)
    return Window(-t_hi, t_hi, y_lo, y_hi)


def _val_int(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


class SeriesRing:
    """Parent object tying a coefficient ring to a working cap window."""

    def __init__(self, cr: CoeffRing, cap: Window):
        self.cr = cr
        self.cap = cap
        self.p = cr.p
        self.f = cr.f
        self.mod = cr.mod
        self.Mstore = cr.Mstore
        self.budget = cr.budget
        self.exp_mod = cr.p ** (cr.Mstore + _EXP_GUARD)
        # one dtype for every grid of this ring, so arrays never mix
        worst = 4 * cap.tspan * cap.yspan
        self.use_i64 = cr.f == 1 and cr.mod * cr.mod * worst < 2**62
        self._red_rows = None

    # -- constructors --------------------------------------------------------

    def _blank(self, tspan: int, yspan: int) -> np.ndarray:
        if self.f == 1:
            return np.zeros((tspan, yspan), dtype=np.int64 if self.use_i64 else object)
        return np.zeros((tspan, yspan, self.f), dtype=object)

    def full_q(self) -> np.ndarray:
        return np.full(self.cap.yspan, INF, dtype=np.int64)

    def zero(self) -> "Series":
        return Series._assemble(self, self._blank(1, 1), 0, 0, 0,
                                self.full_q(), INF, INF)

    def one(self) -> "Series":
        return self.monomial(1, 0, 0)

    def monomial(self, c, i: int = 0, j: int = 0) -> "Series":
        return self.from_terms({(i, j): c})

    def from_terms(self, terms: dict, e: int = 0) -> "Series":
        """Exact series from {(t_exp, pi_exp): coefficient}; coefficients are
        ints or length-f tuples, understood times p^-e."""
        clean = {}
        for (i, j), c in terms.items():
            if isinstance(c, CoeffElem):
                if c.e:
                    raise ConfigError("pass denominators via the e argument of from_terms")
                c = c.mant
            if isinstance(c, int):
                c = (c,) + (0,) * (self.f - 1)
            clean[(i, j)] = tuple(int(x) % self.mod for x in c)
        if not clean:
            return self.zero()
        for (i, j) in clean:
            if not self.cap.contains(i, j):
                raise WindowUnderflow(f"term T^{i}*pi^{j} outside the working window {self.cap}")
        t_lo = min(i for i, _ in clean)
        y_lo = min(j for _, j in clean)
        arr = self._blank(max(i for i, _ in clean) - t_lo + 1,
                          max(j for _, j in clean) - y_lo + 1)
        for (i, j), c in clean.items():
            if self.f == 1:
                arr[i - t_lo, j - y_lo] = c[0]
            else:
                arr[i - t_lo, j - y_lo, :] = c
        return Series._assemble(self, arr, t_lo, y_lo, e, self.full_q(), INF, INF)

    def gen_T(self) -> "Series":
        return self.monomial(1, 1, 0)

    def gen_pi(self) -> "Series":
        return self.monomial(1, 0, 1)

    def int_series(self, c: int) -> "Series":
        return self.monomial(c, 0, 0)

    # -- misc ------------------------------------------------------------------

    def exp_rep(self, c) -> int:
        """Nonnegative integer representative of a p-adic exponent.

        Accepts ints (reduced mod p^(Mstore+guard)) and (num, den) pairs
        with den a p-unit.
        """
        if isinstance(c, tuple):
            num, den = c
            if den % self.p == 0:
                raise ConfigError("exponent denominator must be a p-unit")
            return (num * pow(den, -1, self.exp_mod)) % self.exp_mod
        return c % self.exp_mod

    def binom_rep(self, c_rep: int, k: int) -> int:
        return math.comb(c_rep, k) % self.mod

    def red_rows(self):
        if self._red_rows is None:
            rows = []
            cur = tuple((-c) % self.mod for c in self.cr.modulus)  # x^f
            rows.append(cur)
            x = (0, 1) + (0,) * (self.f - 2)
            for _ in range(self.f - 2):
                cur = self.cr.poly_mul(cur, x)
                rows.append(cur)
            self._red_rows = rows
        return self._red_rows


def _minplus_into(target: np.ndarray, t_off: int, a: np.ndarray, b: np.ndarray):
    """target[i+j+t_off] = min(target, a[i] + b[j]) for all i, j (min-plus
    convolution accumulated into target, offset already folded in)."""
    fin = np.nonzero(a < INF)[0]
    if len(fin) == 0 or int(b.min()) >= INF:
        return
    lb = len(b)
    for i in fin:
        ai = int(a[i])
        lo = int(i) + t_off
        seg = target[lo:lo + lb]
        np.minimum(seg, ai + b[:len(seg)], out=seg)


class Series:
    """Stored grid spans T in [window.t_lo, window.t_hi], pi rows
    window.y_lo .. window.y_hi; claims vector q is aligned to the ring cap."""

    __slots__ = ("ring", "window", "arr", "e", "q", "above_q", "below_q", "_svals")

    def __init__(self, ring, window, arr, e, q, above_q, below_q):
        self.ring = ring
        self.window = window
        self.arr = arr
        self.e = e
        self.q = q
        self.above_q = above_q
        self.below_q = below_q
        self._svals = None

    # -- claims helpers -----------------------------------------------------------

    def eff_q(self, j: int) -> int:
        """Certified digits for row j (value level)."""
        cap = self.ring.cap
        if j > cap.y_hi:
            bound = self.above_q
        elif j < cap.y_lo:
            bound = self.below_q
        else:
            bound = int(self.q[j - cap.y_lo])
        return min(bound, self.ring.Mstore - self.e)

    def claim_at(self, i: int, j: int) -> int:
        return self.eff_q(j)

    def stored_vals(self) -> np.ndarray:
        """Per-cap-row minimum valuation of the stored content (value
        level; INF on empty rows), cached."""
        if self._svals is not None:
            return self._svals
        ring = self.ring
        cap = ring.cap
        out = np.full(cap.yspan, INF, dtype=np.int64)
        if self.ring.f == 1:
            vals = _ops.grid_vals(self.arr, ring.p, ring.Mstore)
            rowmins = vals.min(axis=0)
            mask = (self.arr != 0).any(axis=0)
        else:
            p = ring.p
            rowmins = np.full(self.arr.shape[1], ring.Mstore, dtype=np.int64)
            for iy in range(self.arr.shape[1]):
                vs = [min(_val_int(int(c), p, ring.Mstore) for c in cell)
                      for cell in self.arr[:, iy] if any(int(c) for c in cell)]
                if vs:
                    rowmins[iy] = min(vs)
            mask = self.arr.astype(bool).any(axis=2).any(axis=0)
        base = self.window.y_lo - cap.y_lo
        for iy in range(self.arr.shape[1]):
            if mask[iy]:
                out[base + iy] = int(rowmins[iy]) - self.e
        self._svals = out
        return out

    def content_bound(self) -> int:
        """Global valuation bound of everything the series may contain."""
        s = self.stored_vals()
        sq = np.minimum(s, self.q)
        return int(min(sq.min() if len(sq) else INF, self.above_q, self.below_q))

    # -- construction core -------------------------------------------------------

    @staticmethod
    def _assemble(ring: SeriesRing, arr: np.ndarray, t0: int, y0: int, e: int,
                  q: np.ndarray, above_q: int, below_q: int) -> "Series":
        """Clamp a raw grid (T-exp t0+it, pi-exp y0+iy) to the working cap,
        folding everything that gets dropped into the claim bounds."""
        p = ring.p
        cap = ring.cap
        if e > ring.budget:
            raise DenominatorBudgetExceeded(
                f"denominator exponent {e} exceeds budget {ring.budget}")

        nt, ny = arr.shape[0], arr.shape[1]
        # index ranges of the in-cap part of the grid
        it_a = max(0, cap.t_lo - t0)
        it_b = min(nt, cap.t_hi - t0 + 1)
        iy_a = max(0, cap.y_lo - y0)
        iy_b = min(ny, cap.y_hi - y0 + 1)
        inside = arr[it_a:it_b, iy_a:iy_b] if it_a < it_b and iy_a < iy_b else None

        if it_a > 0 or it_b < nt or iy_a > 0 or iy_b < ny:
            flat = arr if ring.f == 1 else arr.astype(bool).any(axis=2)
            q = np.array(q, dtype=np.int64)
            vals = None
            for it in range(nt):
                for iy in range(ny):
                    if it_a <= it < it_b and iy_a <= iy < iy_b:
                        continue
                    cell = flat[it, iy]
                    if not cell:
                        continue
                    if vals is None:
                        if ring.f == 1:
                            vals = _ops.grid_vals(arr, p, ring.Mstore)
                        else:
                            vals = np.array([[min(_val_int(int(c), p, ring.Mstore)
                                                  for c in arr[a_, b_])
                                              for b_ in range(ny)] for a_ in range(nt)])
                    v = int(vals[it, iy]) - e
                    j = y0 + iy
                    if j > cap.y_hi:
                        above_q = min(above_q, v)
                    elif j < cap.y_lo:
                        below_q = min(below_q, v)
                    else:
                        q[j - cap.y_lo] = min(int(q[j - cap.y_lo]), v)

        if inside is None or not inside.any():
            win = Window(0, 0, 0, 0)
            return Series(ring, win, ring._blank(1, 1), 0,
                          np.array(q, dtype=np.int64), above_q, below_q)
        mask = inside != 0 if ring.f == 1 else inside.astype(bool).any(axis=2)
        t_live = np.nonzero(mask.any(axis=1))[0]
        y_live = np.nonzero(mask.any(axis=0))[0]
        it_lo, it_hi = int(t_live[0]), int(t_live[-1])
        iy_lo, iy_hi = int(y_live[0]), int(y_live[-1])
        box = np.array(inside[it_lo:it_hi + 1, iy_lo:iy_hi + 1], copy=True)
        if e > 0:
            k = 0
            while k < e and not (box % p**(k + 1)).any():
                k += 1
            if k > 0:
                box = box // p**k
                e -= k
        box.flags.writeable = False
        win = Window(t0 + it_a + it_lo, t0 + it_a + it_hi,
                     y0 + iy_a + iy_lo, y0 + iy_a + iy_hi)
        return Series(ring, win, box, e, np.array(q, dtype=np.int64), above_q, below_q)

    def replace_claims(self, q=None, above_q=None, below_q=None) -> "Series":
        return Series(self.ring, self.window, self.arr, self.e,
                      np.array(self.q if q is None else q, dtype=np.int64),
                      self.above_q if above_q is None else above_q,
                      self.below_q if below_q is None else below_q)

    def cap_q(self, bound: int) -> "Series":
        return self.replace_claims(q=np.minimum(self.q, bound))

    # -- views ----------------------------------------------------------------------

    def coeff(self, i: int, j: int) -> CoeffElem:
        claim = self.claim_at(i, j)
        if claim <= 0:
            raise WindowUnderflow(
                f"coefficient at T^{i} pi^{j} carries no certified digits")
        cr = self.ring.cr
        it, iy = i - self.window.t_lo, j - self.window.y_lo
        if not (0 <= it < self.arr.shape[0] and 0 <= iy < self.arr.shape[1]):
            return CoeffElem(cr, cr.zero_mant(), 0, claim)
        mant = ((int(self.arr[it, iy]),) if self.ring.f == 1
                else tuple(int(c) for c in self.arr[it, iy]))
        return CoeffElem(cr, mant, self.e, claim)._normalize()

    def terms(self) -> dict[tuple[int, int], CoeffElem]:
        out = {}
        w = self.window
        mask = (self.arr != 0) if self.ring.f == 1 else self.arr.astype(bool).any(axis=2)
        for it, iy in zip(*np.nonzero(mask)):
            i, j = w.t_lo + int(it), w.y_lo + int(iy)
            out[(i, j)] = self.coeff(i, j)
        return out

    def support_y_min(self) -> int | None:
        mask = (self.arr != 0) if self.ring.f == 1 else self.arr.astype(bool).any(axis=2)
        cols = np.nonzero(mask.any(axis=0))[0]
        return None if len(cols) == 0 else self.window.y_lo + int(cols[0])

    def is_zero(self, mod_p_exp: int | None = None) -> bool:
        w = self.window
        for iy in range(self.arr.shape[1]):
            claim = self.eff_q(w.y_lo + iy)
            if mod_p_exp is not None:
                claim = min(claim, mod_p_exp)
            if claim <= 0:
                continue
            modulus = self.ring.p ** (claim + self.e)
            col = self.arr[:, iy]
            if self.ring.f == 1 and col.dtype != object:
                if ((col % modulus) != 0).any():
                    return False
            elif any(int(c) % modulus for c in np.asarray(col).ravel()):
                return False
        return True

    def eq(self, other: "Series", mod_p_exp: int | None = None) -> bool:
        return (self - other).is_zero(mod_p_exp)

    def min_claim(self) -> int:
        """Smallest certified precision over the stored box (for reports)."""
        w = self.window
        out = INF
        for iy in range(self.arr.shape[1]):
            out = min(out, self.eff_q(w.y_lo + iy))
        return out

    def __repr__(self):
        from .seriestext import format_series

        return (f"<Series {format_series(self, max_terms=8)} | t[{self.window.t_lo},"
                f"{self.window.t_hi}] pi[{self.window.y_lo},{self.window.y_hi}]"
                f" e={self.e} q~{self.min_claim()}>")

    # -- ring operations ---------------------------------------------------------

    def _check_ring(self, other: "Series"):
        if other.ring is not self.ring and other.ring.cr.params != self.ring.cr.params:
            raise ConfigError("operands live in different series rings")

    def _combine_add(self, other: "Series", sign: int) -> "Series":
        self._check_ring(other)
        ring = self.ring
        e = max(self.e, other.e)
        q = np.minimum(self.q, other.q)
        wa, wb = self.window, other.window
        t_lo, t_hi = min(wa.t_lo, wb.t_lo), max(wa.t_hi, wb.t_hi)
        y_lo, y_hi = min(wa.y_lo, wb.y_lo), max(wa.y_hi, wb.y_hi)
        arr = ring._blank(t_hi - t_lo + 1, y_hi - y_lo + 1)
        pa = ring.p ** (e - self.e)
        pb = sign * ring.p ** (e - other.e)
        arr[wa.t_lo - t_lo:wa.t_lo - t_lo + self.arr.shape[0],
            wa.y_lo - y_lo:wa.y_lo - y_lo + self.arr.shape[1]] += self.arr * pa
        arr[wb.t_lo - t_lo:wb.t_lo - t_lo + other.arr.shape[0],
            wb.y_lo - y_lo:wb.y_lo - y_lo + other.arr.shape[1]] += other.arr * pb
        arr %= ring.mod
        return Series._assemble(ring, arr, t_lo, y_lo, e, q,
                                min(self.above_q, other.above_q),
                                min(self.below_q, other.below_q))

    def __add__(self, other: "Series") -> "Series":
        return self._combine_add(other, 1)

    def __sub__(self, other: "Series") -> "Series":
        return self._combine_add(other, -1)

    def __neg__(self) -> "Series":
        arr = (-self.arr) % self.ring.mod
        arr.flags.writeable = False
        return Series(self.ring, self.window, arr, self.e, self.q,
                      self.above_q, self.below_q)

    def __mul__(self, other: "Series") -> "Series":
        self._check_ring(other)
        ring = self.ring
        cap = ring.cap
        ys = cap.yspan
        e = self.e + other.e
        # fast path: both operands fully certified
        if (self.above_q >= INF and other.above_q >= INF
                and self.below_q >= INF and other.below_q >= INF
                and int(self.q.min()) >= INF and int(other.q.min()) >= INF):
            if ring.f == 1:
                conv = _ops.conv2d_mod(self.arr, other.arr, ring.mod)
            else:
                conv = _ops.conv2d_poly_mod(self.arr, other.arr, ring.mod, ring.red_rows())
            return Series._assemble(ring, conv,
                                    self.window.t_lo + other.window.t_lo,
                                    self.window.y_lo + other.window.y_lo,
                                    e, ring.full_q(), INF, INF)
        # error propagation by min-plus convolution: err_a * content_b and
        # content_a * err_b, with staircases for above/below-cap content
        sa = np.minimum(self.stored_vals(), self.q)
        sb = np.minimum(other.stored_vals(), other.q)
        # positions: row r maps to index r - 2*cap.y_lo + 1, rows
        # [2*y_lo - 1 .. 2*y_hi + 1]
        span = 2 * ys + 1
        big = np.full(span, INF, dtype=np.int64)
        _minplus_into(big, 1, self.q, sb)
        _minplus_into(big, 1, sa, other.q)
        above = min(self.above_q + other.above_q, INF)
        below = min(self.below_q + other.below_q, INF)
        everywhere = min(self.above_q + other.below_q, self.below_q + other.above_q)
        for a_above, a_below, srows in ((self.above_q, self.below_q, sb),
                                        (other.above_q, other.below_q, sa)):
            if a_above < INF:
                for j2 in range(ys):
                    if srows[j2] >= INF:
                        continue
                    bound = a_above + int(srows[j2])
                    idx = min(span, ys + j2 + 1)
                    np.minimum(big[idx:], bound, out=big[idx:])
                    above = min(above, bound)
            if a_below < INF:
                for j2 in range(ys):
                    if srows[j2] >= INF:
                        continue
                    bound = a_below + int(srows[j2])
                    np.minimum(big[:j2 + 1], bound, out=big[:j2 + 1])
                    below = min(below, bound)
        if everywhere < INF:
            np.minimum(big, everywhere, out=big)
            above = min(above, everywhere)
            below = min(below, everywhere)
        lo_idx = 1 - cap.y_lo  # index of row cap.y_lo under r -> r - 2*y_lo + 1
        q = np.array(big[lo_idx:lo_idx + ys])
        if lo_idx + ys < span:
            above = min(above, int(big[lo_idx + ys:].min()))
        if lo_idx > 0:
            below = min(below, int(big[:lo_idx].min()))
        if ring.f == 1:
            conv = _ops.conv2d_mod(self.arr, other.arr, ring.mod)
        else:
            conv = _ops.conv2d_poly_mod(self.arr, other.arr, ring.mod, ring.red_rows())
        return Series._assemble(ring, conv, self.window.t_lo + other.window.t_lo,
                                self.window.y_lo + other.window.y_lo,
                                e, q, above, below)

    def scale(self, c) -> "Series":
        """Multiply by a coefficient (int or CoeffElem)."""
        ring = self.ring
        if isinstance(c, int):
            c = ring.cr.elem(c)
        if all(x == 0 for x in c.mant):
            vc = c.prec
            q = np.minimum(self.stored_vals(), self.q) + vc
            return ring.zero().replace_claims(q=np.minimum(q, INF),
                                              above_q=min(self.above_q + vc, INF),
                                              below_q=min(self.below_q + vc, INF))
        vc = ring.cr.val(c.mant) - c.e
        e = self.e + c.e
        s = np.minimum(self.stored_vals(), self.q)
        q = np.minimum(self.q + vc, s + c.prec)
        if ring.f == 1:
            arr = (self.arr * c.mant[0]) % ring.mod
        else:
            arr = np.empty_like(self.arr)
            for it in range(self.arr.shape[0]):
                for iy in range(self.arr.shape[1]):
                    arr[it, iy, :] = ring.cr.poly_mul(
                        tuple(int(x) for x in self.arr[it, iy]), c.mant)
        shift = min(vc, c.prec)
        return Series._assemble(ring, arr, self.window.t_lo, self.window.y_lo, e,
                                np.minimum(q, INF),
                                min(self.above_q + shift, INF),
                                min(self.below_q + shift, INF))

    def divide_by_p(self, k: int = 1) -> "Series":
        if k == 0:
            return self
        return Series._assemble(self.ring, np.array(self.arr), self.window.t_lo,
                                self.window.y_lo, self.e + k, self.q - k,
                                self.above_q - k if self.above_q < INF else INF,
                                self.below_q - k if self.below_q < INF else INF)

    def shift(self, di: int, dj: int) -> "Series":
        """Multiply by the monomial T^di * pi^dj."""
        if di == 0 and dj == 0:
            return self
        cap = self.ring.cap
        q = np.full(cap.yspan, INF, dtype=np.int64)
        for idx in range(cap.yspan):
            src = idx - dj
            if src < 0:
                q[idx] = self.below_q
            elif src >= cap.yspan:
                q[idx] = self.above_q
            else:
                q[idx] = self.q[src]
        above = min(self.above_q, *(int(self.q[s]) for s in
                                    range(max(0, cap.yspan - dj), cap.yspan))) \
            if dj > 0 else self.above_q
        below = min(self.below_q, *(int(self.q[s]) for s in range(0, min(-dj, cap.yspan)))) \
            if dj < 0 else self.below_q
        return Series._assemble(self.ring, np.array(self.arr), self.window.t_lo + di,
                                self.window.y_lo + dj, self.e, q, above, below)

    def split_y(self, cut: int) -> tuple["Series", "Series"]:
        """Exact split of the model into (pi-exponent < cut, >= cut)."""
        cap = self.ring.cap
        w = self.window
        low = np.array(self.arr)
        high = np.array(self.arr)
        kcut = max(0, min(cut - w.y_lo, self.arr.shape[1]))
        low[:, kcut:] = 0
        high[:, :kcut] = 0
        ridx = max(0, min(cut - cap.y_lo, cap.yspan))
        q_low = np.array(self.q)
        q_low[ridx:] = INF
        q_high = np.array(self.q)
        q_high[:ridx] = INF
        low_s = Series._assemble(self.ring, low, w.t_lo, w.y_lo, self.e, q_low,
                                 INF if cut <= cap.y_hi + 1 else self.above_q,
                                 self.below_q)
        high_s = Series._assemble(self.ring, high, w.t_lo, w.y_lo, self.e, q_high,
                                  self.above_q,
                                  INF if cut >= cap.y_lo else self.below_q)
        return low_s, high_s


# -- named operations ----------------------------------------------------------------


def series_arith(a: Series, b: Series, op: str) -> Series:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def series_invert(a: Series) -> Series:
    """Invert c*T^u*pi^v*(1+w) with c a unit and w topologically nilpotent."""
    ring = a.ring
    p = ring.p
    mask = (a.arr != 0) if ring.f == 1 else a.arr.astype(bool).any(axis=2)
    if not mask.any():
        raise NotInvertible("cannot invert a series that is zero within the window")
    w = a.window

    def cell_val(it, iy):
        if ring.f == 1:
            return _val_int(int(a.arr[it, iy]), p, ring.Mstore)
        return min(_val_int(int(c), p, ring.Mstore) for c in a.arr[it, iy])

    vals = {(int(it), int(iy)): cell_val(it, iy) for it, iy in zip(*np.nonzero(mask))}
    v0 = min(vals.values())
    work = a.divide_by_p(v0) if v0 else a
    rows_units: dict[int, list[int]] = {}
    for (it, iy), v in vals.items():
        if v == v0:
            rows_units.setdefault(iy, []).append(it)
    unit_row = min(rows_units)
    if len(rows_units[unit_row]) != 1:
        raise NotInvertible("no unit leading monomial: several units on the lowest unit row")
    u = w.t_lo + rows_units[unit_row][0]
    v = w.y_lo + unit_row
    lead_inv = work.coeff(u, v).unit_inverse()
    rest = work.scale(lead_inv).shift(-u, -v)
    one = ring.one()
    wseries = rest - one
    for (i, j), cc in wseries.terms().items():
        if j <= 0 and not cc.is_zero() and cc.valuation() < 1:
            raise NotInvertible(f"monomial T^{i}pi^{j} of the reduced tail is a unit")
    acc = one
    term = one
    limit = ring.Mstore + ring.cap.yspan + 8
    for _ in range(limit):
        term = -(term * wseries)
        if term.is_zero():
            acc = _fold_discard(acc, term)
            break
        acc = acc + term
    else:
        raise NotInvertible("Neumann series for the inverse did not converge")
    out = acc.scale(lead_inv).shift(-u, -v)
    if v0:
        out = out.divide_by_p(v0)
    return out


def _fold_discard(acc: Series, term: Series) -> Series:
    """Account for a series dropped from an accumulation loop: its claims
    survive in the accumulator, and any stored content it still carried
    caps the claims rowwise."""
    bound = np.minimum(term.stored_vals(), term.q)
    return acc.replace_claims(q=np.minimum(acc.q, bound),
                              above_q=min(acc.above_q, term.above_q),
                              below_q=min(acc.below_q, term.below_q))


def _row_series(a: Series, iy: int, texp: int, tmul: int) -> Series:
    """Rebuild one stored pi-row of `a` at pi-level 0, mapping T^i to
    T^(texp*i) scaled by tmul^i (drop-aware)."""
    ring = a.ring
    w = a.window
    col = a.arr[:, iy]
    live = np.nonzero(col if ring.f == 1 else col.astype(bool).any(axis=1))[0]
    idx = [texp * (w.t_lo + int(it)) for it in live]
    g_lo = min(idx)
    grid = ring._blank(max(idx) - g_lo + 1, 1)
    for it, gi in zip(live, idx):
        cval = _cell(a, int(it), iy)
        if tmul != 1:
            i = w.t_lo + int(it)
            cval = tuple((x * pow(tmul, i, ring.mod)) % ring.mod for x in cval)
        if ring.f == 1:
            grid[gi - g_lo, 0] = cval[0]
        else:
            grid[gi - g_lo, 0, :] = cval
    cap = ring.cap
    q = np.full(cap.yspan, INF, dtype=np.int64)
    q[-cap.y_lo] = a.eff_q(w.y_lo + iy)
    return Series._assemble(ring, grid, g_lo, 0, a.e, q, INF, INF)


def _cell(a: Series, it: int, iy: int) -> tuple[int, ...]:
    if a.ring.f == 1:
        return (int(a.arr[it, iy]),)
    return tuple(int(c) for c in a.arr[it, iy])


def substitute(a: Series, pi_image: Series | None = None, t_image=None) -> Series:
    """Evaluate a at pi -> pi_image, T -> t_image.

    pi_image must have pi-valuation >= 1, or be p-divisible below pi^1 and
    applied to exact series; t_image is None, an (exp, scale) monomial,
    or an invertible Series.
    """
    ring = a.ring
    cap = ring.cap
    if pi_image is None and t_image is None:
        return a

    rows: list[tuple[int, Series]] = []
    pow_cache: dict = {}

    def general_pow(base: Series, i: int) -> Series:
        if i in pow_cache:
            return pow_cache[i]
        if i == 0:
            out = ring.one()
        elif i > 0:
            out = general_pow(base, i - 1) * base
        else:
            if "inv" not in pow_cache:
                pow_cache["inv"] = series_invert(base)
            out = general_pow(base, i + 1) * pow_cache["inv"]
        pow_cache[i] = out
        return out

    for iy in range(a.arr.shape[1]):
        col = a.arr[:, iy]
        live = np.nonzero(col if ring.f == 1 else col.astype(bool).any(axis=1))[0]
        if len(live) == 0:
            continue
        j = a.window.y_lo + iy
        if t_image is None or isinstance(t_image, tuple):
            texp, tmul = (1, 1) if t_image is None else t_image
            row = _row_series(a, iy, texp, tmul)
        else:
            row = ring.zero()
            qrow = np.full(cap.yspan, INF, dtype=np.int64)
            qrow[-cap.y_lo] = a.eff_q(j)
            for it in live:
                i = a.window.t_lo + int(it)
                mono = ring.from_terms({(0, 0): _cell(a, int(it), iy)}, e=a.e)
                mono = mono.replace_claims(q=qrow)
                row = row + mono * general_pow(t_image, i)
        rows.append((j, row))

    if pi_image is None:
        out = ring.zero()
        for j, row in rows:
            out = out + row.shift(0, j)
        return _sub_claims_fold(out, a, 1)
    y_val = pi_image.support_y_min()
    if y_val is None or y_val < 1:
        if y_val is not None:
            low, _ = pi_image.split_y(1)
            if not all(c.is_zero() or c.valuation() >= 1 for c in low.terms().values()):
                raise DivergentSubstitution("pi-image is not topologically nilpotent")
        exact_above = a.above_q >= INF and bool((a.q >= ring.Mstore - a.e).all())
        if not exact_above:
            raise DivergentSubstitution(
                "pi-image with pi-valuation 0 may only be substituted into exact series")
    out = ring.zero()
    pos = {j: r for j, r in rows if j >= 0}
    neg = {j: r for j, r in rows if j < 0}
    if pos:
        top = max(pos)
        acc = pos[top]
        for j in range(top - 1, -1, -1):
            acc = acc * pi_image
            if j in pos:
                acc = acc + pos[j]
        out = out + acc
    if neg:
        inv = series_invert(pi_image)
        bottom = min(neg)
        acc = ring.zero()
        for j in range(bottom, 0):
            if j in neg:
                acc = acc + neg[j]
            acc = acc * inv
        out = out + acc
    return _sub_claims_fold(out, a, y_val if y_val is not None and y_val >= 1 else 1)


def _sub_claims_fold(out: Series, a: Series, y_val: int) -> Series:
    """Fold the argument's unknown-content claims into a substitution
    result: above-cap content maps to pi-valuation >= cap.y_hi + 1 (the
    image has pi-valuation >= 1); below-floor content caps everything."""
    q = np.array(out.q)
    above = min(out.above_q, a.above_q)
    below = out.below_q
    if a.below_q < INF:
        q = np.minimum(q, a.below_q)
        above = min(above, a.below_q)
        below = min(below, a.below_q)
    return out.replace_claims(q=q, above_q=above, below_q=below)


def binomial_pow(c, base: Series) -> Series:
    """(1 + s)^c for a p-adic exponent c; base = 1 + s with s in (p, pi).

    The generalized binomial coefficients are evaluated exactly on an
    integer representative of c with enough guard digits that every
    certified digit of the result is correct.
    """
    ring = base.ring
    s = base - ring.one()
    for (i, j), cc in s.terms().items():
        if j <= 0 and not cc.is_zero() and cc.valuation() < 1:
            raise DivergentSubstitution("binomial base must be 1 + (p, pi)-small")
    rep = ring.exp_rep(c)
    acc = ring.one()
    term = ring.one()
    limit = ring.Mstore + ring.cap.yspan + 8
    for k in range(1, limit + 1):
        term = term * s
        if term.is_zero():
            acc = _fold_discard(acc, term)
            break
        coeff = ring.binom_rep(rep, k)
        if coeff:
            acc = acc + term.scale(coeff)
    else:
        raise PrecisionExhausted("binomial series did not converge inside the window")
    return acc


def log_one_plus(u: Series) -> Series:
    """log of a principal unit: sum of (-1)^(k+1) (u-1)^k / k."""
    ring = u.ring
    s = u - ring.one()
    for (i, j), cc in s.terms().items():
        if j <= 0 and not cc.is_zero() and cc.valuation() < 1:
            raise DivergentSubstitution("log argument must be a principal unit (1 + (p, pi))")
    acc = ring.zero()
    power = ring.one()
    limit = ring.Mstore + ring.cap.yspan + 8
    for k in range(1, limit + 1):
        power = power * s
        if power.is_zero():
            acc = _fold_discard(acc, power)
            break
        v = _val_int(k, ring.p, 64)
        term = power.scale(pow(k // ring.p**v, -1, ring.mod))
        if v:
            term = term.divide_by_p(v)
        acc = acc + term if k % 2 == 1 else acc - term
    else:
        raise PrecisionExhausted("log series did not converge inside the window")
    return acc


def series_exp(s: Series) -> Series:
    """exp(s) = sum s^k / k!.  Convergence is budget-guarded, not assumed."""
    ring = s.ring
    acc = ring.one()
    power = ring.one()
    fact_v = 0
    fact_unit = 1
    limit = ring.Mstore + ring.cap.yspan + 8
    for k in range(1, limit + 1):
        power = power * s
        v = _val_int(k, ring.p, 64)
        fact_v += v
        fact_unit = (fact_unit * (k // ring.p**v)) % ring.mod
        if power.is_zero():
            acc = _fold_discard(acc, power)
            break
        term = power.scale(pow(fact_unit, -1, ring.mod))
        if fact_v:
            term = term.divide_by_p(fact_v)
        acc = acc + term
    else:
        raise PrecisionExhausted("exp series did not converge inside the window")
    return acc


def derive(a: Series, axis: str) -> Series:
    """D1 = (pi+1) d/dpi, D2 = T d/dT, both exact termwise."""
    ring = a.ring
    w = a.window
    dtype = np.int64 if ring.use_i64 else object
    if axis == "D2":
        mult = np.arange(w.t_lo, w.t_lo + a.arr.shape[0], dtype=dtype).reshape(
            (-1, 1) if ring.f == 1 else (-1, 1, 1))
        arr = (a.arr * mult) % ring.mod
        return Series._assemble(ring, arr, w.t_lo, w.y_lo, a.e, a.q,
                                a.above_q, a.below_q)
    if axis != "D1":
        raise ValueError(f"unknown derivation axis {axis!r}")
    mult = np.arange(w.y_lo, w.y_lo + a.arr.shape[1], dtype=dtype).reshape(
        (1, -1) if ring.f == 1 else (1, -1, 1))
    darr = (a.arr * mult) % ring.mod
    cap = ring.cap
    q = np.full(cap.yspan, INF, dtype=np.int64)
    q[:-1] = a.q[1:]
    q[-1] = a.above_q
    ddpi = Series._assemble(ring, darr, w.t_lo, w.y_lo - 1, a.e, q,
                            a.above_q, min(a.below_q, int(a.q[0])))
    return ddpi + ddpi.shift(0, 1)
