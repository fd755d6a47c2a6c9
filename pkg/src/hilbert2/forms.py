"""2-forms lambda * dpi ^ dT: dlog, wedge, residue, trace-residue and the
twisted (phi, G)-action.

Everything is kept in canonical coordinates: a 1-form is a_pi*dpi + a_T*dT
and a 2-form is lambda*dpi^dT (pi before T; the opposite order flips the
global sign of every pairing).  Actions on forms fold the Jacobian of the
substitution into lambda immediately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffring import CoeffElem
from .errors import NonIntegralResidue
from .galois_ops import Operators
from .laurent import INF, Series, series_invert


@dataclass(frozen=True)
class Form1:
    a_pi: Series
    a_T: Series


@dataclass(frozen=True)
class Form2:
    lam: Series


def _d_dpi(a: Series) -> Series:
    ring = a.ring
    w = a.window
    cap = ring.cap
    dtype = np.int64 if ring.use_i64 else object
    mult = np.arange(w.y_lo, w.y_lo + a.arr.shape[1], dtype=dtype).reshape(
        (1, -1) if ring.f == 1 else (1, -1, 1))
    arr = (a.arr * mult) % ring.mod
    q = np.full(cap.yspan, INF, dtype=np.int64)
    q[:-1] = a.q[1:]
    q[-1] = a.above_q
    return Series._assemble(ring, arr, w.t_lo, w.y_lo - 1, a.e, q,
                            a.above_q, min(a.below_q, int(a.q[0])))


def _d_dT(a: Series) -> Series:
    ring = a.ring
    w = a.window
    dtype = np.int64 if ring.use_i64 else object
    mult = np.arange(w.t_lo, w.t_lo + a.arr.shape[0], dtype=dtype).reshape(
        (-1, 1) if ring.f == 1 else (-1, 1, 1))
    arr = (a.arr * mult) % ring.mod
    return Series._assemble(ring, arr, w.t_lo - 1, w.y_lo, a.e, a.q,
                            a.above_q, a.below_q)


def d(a: Series) -> Form1:
    """Total differential da = (da/dpi) dpi + (da/dT) dT."""
    return Form1(_d_dpi(a), _d_dT(a))


def dlog(u: Series) -> Form1:
    """dlog u = du/u; raises NotInvertible through series_invert."""
    inv = series_invert(u)
    return Form1(_d_dpi(u) * inv, _d_dT(u) * inv)


def wedge(w1: Form1, w2: Form1) -> Form2:
    return Form2(w1.a_pi * w2.a_T - w1.a_T * w2.a_pi)


def res(omega: Form2) -> CoeffElem:
    """Coefficient of T^-1 pi^-1 of lambda (WindowUnderflow when it lies
    above the reliable ceiling)."""
    return omega.lam.coeff(-1, -1)


def tr_res(omega: Form2, j: int | None = None) -> CoeffElem | int:
    """Trace of the residue down to the prime subring; reduced mod p^j when
    j is given.  Denominators must cancel: otherwise NonIntegralResidue."""
    r = res(omega).trace()
    if not r.is_integral():
        raise NonIntegralResidue(
            f"trace-residue carries p^-{r.e} after cancellation (certified mod p^{r.prec})")
    if j is None:
        return r
    if j > r.prec:
        raise NonIntegralResidue(
            f"residue certified only mod p^{r.prec}, cannot reduce mod p^{j}")
    return r.residue_mod(j)


def twisted_action(ops: Operators, omega: Form2, op: str, c: int = 1) -> Form2:
    """The (phi, G)-action on 2-forms in canonical coordinates.

    phiOmega: (1/p^2) phi(lam) dphi(pi)^dphi(T) -- the p^2 cancels against
    the Jacobian, keeping the action integral.
    gamma actions carry the cyclotomic twist chi(g).
    """
    lam = omega.lam
    ring = lam.ring
    one = ring.one()
    if op == "phiOmega":
        jac = ops.one_plus_pi_pow(ops.p - 1) * ring.monomial(1, ops.p - 1, 0)
        return Form2(ops.phi(lam) * jac)
    if op == "gamma1":
        chi_c = pow(ops.chi, c, ring.exp_mod)
        jac = ops.one_plus_pi_pow(chi_c - 1).scale(chi_c % ring.mod)
        twist = chi_c % ring.mod
        return Form2(ops.gamma1_pow(c, lam).scale(twist) * jac)
    if op == "gamma2":
        jac = ops.one_plus_pi_pow(ring.exp_rep(c) * ops.N)
        return Form2(ops.gamma2_pow(c, lam) * jac)
    raise ValueError(f"unknown twisted action {op!r}")


def form_gamma2_ratio(ops: Operators, c, omega: Form2) -> Form2:
    """(gamma2^c - 1)/(gamma2 - 1) for the twisted gamma2-action on forms.

    The twisted action on the T^k column multiplies by (1+pi)^(cN(k+1)), so
    it is the series-level ratio conjugated by one T-shift.
    """
    shifted = omega.lam.shift(1, 0)
    return Form2(ops.gamma2_ratio(c, shifted).shift(-1, 0))


def phi_pullback_raw(ops: Operators, omega: Form2) -> Form2:
    """phi(lam) dphi(pi)^dphi(T) without the 1/p^2 normalization."""
    lam = omega.lam
    ring = lam.ring
    jac = ops.one_plus_pi_pow(ops.p - 1) * ring.monomial(1, ops.p - 1, 0)
    return Form2(ops.phi(lam) * jac.scale(ops.p * ops.p))
