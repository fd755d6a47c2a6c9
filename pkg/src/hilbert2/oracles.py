"""Independent brute-force ground truths.

psi_naive computes the normalized trace over the rank-p^2 extension
A/phi(A) literally: it adjoins a formal p-th root of unity zeta (as a
vector space over the base with the cyclotomic relation), sums the p^2
twists T -> zeta^i T, 1+pi -> zeta^j (1+pi), checks that the result
descends, divides by p^2 and inverts phi on the image.  None of that code
is shared with the basis-decomposition psi.

pairing_via_cohomology chains the Kummer cochains through the cup product
and the simplified duality pairing and applies the Tate trace; it shares
only the series layer with the closed-form route.
"""

from __future__ import annotations

import numpy as np

from .errors import DecompositionFailed, NotInDomain
from .galois_ops import Operators
from .herr import cup_h1_h1, pair_h1_h2_simplified, tate_trace
from .kummer import iota_n
from .laurent import Series, series_invert
from .vostokov import SymbolInput


# -- zeta_p extension helpers ----------------------------------------------------


class _Zeta:
    """Z[zeta_p] mod p^Mstore as integer vectors on 1, zeta, ..., zeta^(p-2)."""

    def __init__(self, p: int, mod: int):
        self.p = p
        self.mod = mod
        self.dim = p - 1
        # zeta^(p-1) = -(1 + zeta + ... + zeta^(p-2)); higher powers by shifting
        self.red = []
        cur = [(-1) % mod] * self.dim
        self.red.append(list(cur))
        for _ in range(self.dim - 2):
            cur = self._mul_by_zeta(cur)
            self.red.append(list(cur))

    def _mul_by_zeta(self, v):
        out = [0] + list(v[:-1])
        top = v[-1]
        if top:
            for i in range(self.dim):
                out[i] = (out[i] + top * self.red[0][i]) % self.mod
        return [x % self.mod for x in out]

    def pow_vec(self, k: int):
        k %= self.p
        v = [0] * self.dim
        if k < self.dim:
            v[k] = 1
            return v
        return list(self.red[0])  # k = p-1

    def mul(self, u, v):
        conv = [0] * (2 * self.dim - 1)
        for i, ui in enumerate(u):
            if ui == 0:
                continue
            for j, vj in enumerate(v):
                if vj:
                    conv[i + j] = (conv[i + j] + ui * vj) % self.mod
        for d in range(2 * self.dim - 2, self.dim - 1, -1):
            c = conv[d]
            if c == 0:
                continue
            conv[d] = 0
            row = self.red[d - self.dim]
            for i in range(self.dim):
                conv[i] = (conv[i] + c * row[i]) % self.mod
        return conv[: self.dim]


def psi_naive(ops: Operators, a: Series) -> Series:
    """Trace-formula psi: (1/p^2) Tr_{A/phi(A)} then phi^-1.

    Requires the input to live in pi-exponents >= 0 (powers of the twisted
    1+pi stay integral there; the inverse twists would need denominator
    room the budget does not grant).
    """
    ring = a.ring
    p = ring.p
    ymin = a.support_y_min()
    if ymin is not None and ymin < 0:
        raise NotInDomain("psi_naive handles pi-exponents >= 0 only")
    claim = max(1, a.min_claim())
    z = _Zeta(p, ring.mod)
    f = ring.f
    w = a.window
    nt, ny = a.arr.shape[0], a.arr.shape[1]
    # twist images of pi-powers: P_j^b for P_j = zeta^j (1+pi) - 1,
    # as lists over pi-exponent of zeta-vectors
    b_max = w.y_lo + ny - 1
    pow_tab = {}
    for j in range(p):
        zj = z.pow_vec(j)
        base = {0: [(zj[i] - (1 if i == 0 else 0)) % ring.mod for i in range(z.dim)], 1: zj}
        tab = [{0: z.pow_vec(0)}]
        for _ in range(b_max):
            nxt: dict[int, list] = {}
            for y1, v1 in tab[-1].items():
                for y2, v2 in base.items():
                    y = y1 + y2
                    prod = z.mul(v1, v2)
                    if y in nxt:
                        nxt[y] = [(x + yv) % ring.mod for x, yv in zip(nxt[y], prod)]
                    else:
                        nxt[y] = prod
            tab.append(nxt)
        pow_tab[j] = tab
    # accumulate the p^2 twists
    total: dict[tuple[int, int], list] = {}
    for i in range(p):
        for j in range(p):
            for it in range(nt):
                t_exp = w.t_lo + it
                zi = z.pow_vec((i * t_exp) % p)
                for iy in range(ny):
                    cell = a.arr[it, iy]
                    if f == 1:
                        if cell == 0:
                            continue
                        comps = (int(cell),)
                    else:
                        if not any(int(c) for c in cell):
                            continue
                        comps = tuple(int(c) for c in cell)
                    b = w.y_lo + iy
                    for y_exp, zvec in pow_tab[j][b].items():
                        zz = z.mul(zi, zvec)
                        key = (t_exp, y_exp)
                        acc = total.setdefault(key, [[0] * f for _ in range(z.dim)])
                        for zi_idx in range(z.dim):
                            zc = zz[zi_idx]
                            if zc:
                                for ci in range(f):
                                    acc[zi_idx][ci] = (acc[zi_idx][ci] + zc * comps[ci]) % ring.mod
    # descent and division by p^2
    p2 = p * p
    descended: dict[tuple[int, int], tuple] = {}
    check_mod = p ** min(ring.Mstore, claim + a.e)
    for key, vecs in total.items():
        for zi_idx in range(1, z.dim):
            if any(c % check_mod for c in vecs[zi_idx]):
                raise DecompositionFailed(
                    f"trace at T^{key[0]}pi^{key[1]} does not descend to the base ring")
        comp0 = vecs[0]
        if any(c % p2 for c in comp0):
            raise DecompositionFailed("trace is not divisible by p^2")
        val = tuple((c // p2) % ring.mod for c in comp0)
        if any(val):
            descended[key] = val
    phi_psi = ring.from_terms(descended, e=a.e).cap_q(max(1, claim - 2))
    out = _invert_phi_on_image(ops, phi_psi)
    # claims compress like psi's: block k certified by rows pk..pk+p-1
    cap = ring.cap
    k_top = (cap.y_hi + 1) // p
    q = np.full(cap.yspan, 10**9, dtype=np.int64)
    for k in range(cap.y_lo, cap.y_hi + 1):
        bound = claim - 2
        if a.above_q < claim:
            bound = min(bound, a.above_q + max(0, k_top - k))
        q[k - cap.y_lo] = max(0, bound)
    return out.replace_claims(q=np.minimum(out.q, q))


def _invert_phi_on_image(ops: Operators, v: Series) -> Series:
    """Solve phi(u) = v for v in the image of phi (T-exponents divisible by
    p; pi-structure inverted by p-adic back-substitution on pivots p*k)."""
    ring = v.ring
    p = ring.p
    w = v.window
    y_lo, y_hi = w.y_lo, w.y_hi
    k_lo, k_hi = y_lo // p, y_hi // p
    phi_pow = {0: ring.one()}
    for k in range(1, k_hi + 1):
        phi_pow[k] = phi_pow[k - 1] * ops.phi_pi
    if k_lo < 0:
        inv = series_invert(ops.phi_pi)
        for k in range(-1, k_lo - 1, -1):
            phi_pow[k] = phi_pow[k + 1] * inv
    rows = y_hi - y_lo + 1
    cols = list(range(k_lo, k_hi + 1))
    mat = np.zeros((rows, len(cols)), dtype=object)
    for cidx, k in enumerate(cols):
        s = phi_pow[k]
        for iy in range(s.arr.shape[1]):
            y = s.window.y_lo + iy
            if y_lo <= y <= y_hi:
                mat[y - y_lo, cidx] = int(s.arr[0, iy])
    terms = {}
    check_mod = p ** min(ring.Mstore, max(1, v.min_claim()) + v.e)
    for it in range(v.arr.shape[0]):
        t = w.t_lo + it
        col = v.arr[it] if ring.f == 1 else v.arr[it, :, :]
        if not np.asarray(col).any():
            continue
        if t % p:
            raise DecompositionFailed(f"input has T-exponent {t} not divisible by p")
        for comp in range(ring.f):
            x = np.zeros(rows, dtype=object)
            for iy in range(v.arr.shape[1]):
                cell = v.arr[it, iy] if ring.f == 1 else v.arr[it, iy, comp]
                x[iy + (w.y_lo - y_lo)] = int(cell)
            u = np.zeros(len(cols), dtype=object)
            r = x.copy()
            for _ in range(ring.Mstore + 2):
                if not any(int(c) % check_mod for c in r):
                    break
                for cidx, k in enumerate(cols):
                    d = p * k
                    if y_lo <= d <= y_hi:
                        u[cidx] = (u[cidx] + r[d - y_lo]) % ring.mod
                r = (x - mat @ u) % ring.mod
            else:
                raise DecompositionFailed("phi-image inversion did not converge")
            for cidx, k in enumerate(cols):
                val = int(u[cidx])
                if val:
                    key = (t // p, k)
                    cur = list(terms.get(key, (0,) * ring.f))
                    cur[comp] = val
                    terms[key] = tuple(cur)
    out = v.ring.from_terms(terms, e=v.e).cap_q(max(1, v.min_claim()))
    if ring.f > 1:
        arr = np.empty_like(out.arr)
        for it in range(out.arr.shape[0]):
            for iy in range(out.arr.shape[1]):
                arr[it, iy, :] = ring.cr.frobenius_mant(
                    tuple(int(c) for c in out.arr[it, iy]), ring.f - 1)
        out = Series._assemble(ring, arr, out.window.t_lo, out.window.y_lo, out.e,
                                out.q, out.above_q, out.below_q)
    return out


def substitute_naive(a: Series, pi_image: Series | None = None, t_image: Series | None = None) -> Series:
    """Fully expanded monomial-by-monomial substitution; quadratic-time
    reference for laurent.substitute (fresh powers per monomial, no Horner,
    no caching)."""
    ring = a.ring
    out = ring.zero()
    inv_pi = series_invert(pi_image) if pi_image is not None else None
    inv_t = series_invert(t_image) if t_image is not None else None

    def power(base, inv_base, k):
        acc = ring.one()
        step = base if k >= 0 else inv_base
        for _ in range(abs(k)):
            acc = acc * step
        return acc

    for (i, j), c in a.terms().items():
        mono = ring.from_terms({(0 if t_image is not None else i,
                                 0 if pi_image is not None else j): c.mant},
                               e=c.e).cap_q(c.prec)
        term = mono
        if t_image is not None:
            term = term * power(t_image, inv_t, i)
        if pi_image is not None:
            term = term * power(pi_image, inv_pi, j)
        out = out + term
    return out


def pairing_via_cohomology(inp: SymbolInput) -> int:
    """Kummer cochains -> cup product -> simplified duality pairing ->
    -c * TR, all at level n; exponent mod p^n."""
    ctx = inp.ctx
    n = ctx.level
    u1 = iota_n(ctx, inp.F1)
    u2 = iota_n(ctx, inp.F2)
    u3 = iota_n(ctx, inp.F3)
    w = cup_h1_h1(ctx.ops, u1, u2, level_mod=n)
    form = pair_h1_h2_simplified(ctx.ops, u3, w, level_mod=n)
    return tate_trace(form, n, ctx.tate)
