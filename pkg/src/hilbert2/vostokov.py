"""The closed-form higher Hilbert pairing exponent.

For three principal-unit lifts F1, F2, F3 in the level-n variables, build

    Phi = -(1/pi) [ (1/p^2) f1 dlog F2^phi ^ dlog F3^phi
                  - (1/p)   f2 dlog F1     ^ dlog F3^phi
                  +         f3 dlog F1     ^ dlog F2 ]

with f_i = (1 - phi/p) log F_i, and return Tr Res(Phi) mod p^n.  The
residue is taken in the working frame (the coefficient of
pi^-1 T^-1 dpi^dT); integrality of the residue is verified, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _ops
from .coeffring import CoeffElem
from .errors import NonIntegralResidue
from .forms import Form2, dlog, wedge
from .kummer import LevelContext, l_map
from .laurent import Series


@dataclass(frozen=True)
class SymbolInput:
    F1: Series
    F2: Series
    F3: Series
    ctx: LevelContext


@dataclass
class SymbolResult:
    exponent: int
    modulus: int
    audit: dict = field(default_factory=dict)


def phi_form(inp: SymbolInput) -> Form2:
    ctx = inp.ctx
    ops = ctx.ops
    p = ctx.ring.p
    f1 = l_map(ctx, inp.F1)
    f2 = l_map(ctx, inp.F2)
    f3 = l_map(ctx, inp.F3)
    dl1 = dlog(inp.F1)
    dl2 = dlog(inp.F2)
    dl3 = dlog(inp.F3)
    dl2_phi = dlog(ops.phi(inp.F2))
    dl3_phi = dlog(ops.phi(inp.F3))
    t1 = (f1 * wedge(dl2_phi, dl3_phi).lam).divide_by_p(2)
    t2 = (f2 * wedge(dl1, dl3_phi).lam).divide_by_p(1)
    t3 = f3 * wedge(dl1, dl2).lam
    combo = t1 - t2 + t3
    return Form2(-(ctx.inv_pi * combo))


def symbol_exponent(inp: SymbolInput) -> SymbolResult:
    ctx = inp.ctx
    n = ctx.level
    p = ctx.ring.p
    omega = phi_form(inp)
    r = omega.lam.coeff(-1, -1)
    if not r.is_integral():
        raise NonIntegralResidue(
            f"residue of Phi carries p^-{r.e} (certified mod p^{r.prec}); "
            "denominators failed to cancel")
    tr = r.trace()
    if tr.prec < n:
        raise NonIntegralResidue(
            f"residue certified only mod p^{tr.prec}, need mod p^{n}")
    exponent = tr.residue_mod(n)
    audit = {
        "residue_prec": r.prec,
        "residue_denom_exp": r.e,
        "form_window": (omega.lam.window.t_lo, omega.lam.window.t_hi,
                        omega.lam.window.y_lo, omega.lam.window.y_hi),
        "form_min_claim": omega.lam.min_claim(),
        "kernel": _ops.kernel_name(),
    }
    return SymbolResult(exponent, p**n, audit)


def v_n(inp: SymbolInput) -> str:
    """Presentation of the pairing value as a root of unity zeta_{p^n}^e."""
    res = symbol_exponent(inp)
    return f"zeta_{res.modulus}^{res.exponent % res.modulus}"
