"""The level-n Kummer map on principal units.

A lift F = 1 + (p, pi)-small is sent to the degree-1 cochain

    [ l(F) * tau,  a_gamma1,  b_gamma2 ]   (twist 1),

where l(F) = (1 - phi/p) log F, tau = 1/pi - 1/2 expanded at level n, and
the coefficients a, b are the unique S_n-solutions of

    (phi - 1)(a (x) eps) = (gamma1_n - 1)(l(F) tau (x) eps),
    (phi - 1)(b (x) eps) = (gamma2_n - 1)(l(F) tau (x) eps).

Their mod-pi leading terms are closed formulas in D1 log F and D2 log F;
the solver subtracts them and inverts (phi - 1) on the pi-divisible rest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UniquenessCheckFailed
from .galois_ops import GaloisParams, Operators, level_operators
from .herr import Cochain, TateConstant
from .laurent import Series, SeriesRing, derive, log_one_plus, series_invert


@dataclass
class LevelContext:
    """Everything the level-n computations share: the level operators, the
    base-pi expansion, tau, and the Tate constant."""

    ring: SeriesRing
    gp: GaloisParams
    ops: Operators
    pi_base: Series
    inv_pi: Series
    tau: Series
    tate: TateConstant

    @staticmethod
    def build(ring: SeriesRing, gp: GaloisParams) -> "LevelContext":
        ops = level_operators(ring, gp)
        pi_base = ops.one_plus_pi_pow(ring.p**gp.level) - ring.one()
        inv_pi = series_invert(pi_base)
        half_inv = pow(2, -1, ring.mod)
        tau = inv_pi - ring.one().scale(half_inv)
        tate = TateConstant.compute(ring.cr, gp)
        return LevelContext(ring, gp, ops, pi_base, inv_pi, tau, tate)

    @property
    def level(self) -> int:
        return self.gp.level

    def is_principal_unit(self, F: Series) -> bool:
        s = F - self.ring.one()
        return all(c.is_zero() or j >= 1 or c.valuation() >= 1
                   for (i, j), c in s.terms().items())


@dataclass(frozen=True)
class KummerDatum:
    F: Series
    level: int
    f_series: Series
    a_gamma1: Series
    b_gamma2: Series
    tau: Series


def l_map(ctx: LevelContext, F: Series) -> Series:
    """l(F) = log F - (1/p) phi(log F); integral for principal units (the
    1/p cancels), which the denominator normal form makes visible."""
    lg = log_one_plus(F)
    return lg - ctx.ops.phi(lg).divide_by_p(1)


def _solve_defining(ctx: LevelContext, rhs: Series, leading: Series, what: str) -> Series:
    """Solve (phi-1) s = rhs with s = leading mod pi, rhs given mod p^n."""
    n = ctx.level
    residual = rhs - (ctx.ops.phi(leading) - leading)
    low, high = residual.split_y(1)
    if not low.is_zero(n):
        raise UniquenessCheckFailed(
            f"defining equation for {what}: residual not in pi*S_n mod p^{n}")
    s = leading + ctx.ops.solve_phi_minus_one(high)
    check = (ctx.ops.phi(s) - s) - rhs
    if not check.is_zero(n):
        raise UniquenessCheckFailed(
            f"defining equation for {what} fails after solving (mod p^{n})")
    return s


def kummer_coefficients(ctx: LevelContext, F: Series) -> KummerDatum:
    """Exact a_gamma1, b_gamma2 for the lift F, via the mod-pi leading
    terms plus the (phi-1)-solver; both defining equations are re-checked
    mod p^n before returning."""
    ops = ctx.ops
    ring = ctx.ring
    n = ctx.level
    p = ring.p
    chi_n = ctx.gp.chi_gamma1n
    eta_n = ctx.gp.eta_gamma2n // p**n

    f = l_map(ctx, F)
    x = f * ctx.tau
    log_f = log_one_plus(F)

    # (gamma1_n - 1) twisted by one cyclotomic power
    rhs_a = ops.gamma1_pow(1, x).scale(chi_n % ring.mod) - x
    lead_a = derive(log_f, "D1").scale(((1 - chi_n) // p**n) % ring.mod)
    a = _solve_defining(ctx, rhs_a, lead_a, "a_gamma1")

    # chi(gamma2) = 1: untwisted.  The leading term solving the equation is
    # -eta_n * D2 log F: (gamma2_n - 1)(f tau) = eta_n (1 - phi) D2 log F
    # mod (pi, p^n), and (phi - 1)(-eta_n D2 log F) matches it.
    rhs_b = ops.gamma2_pow(1, x) - x
    lead_b = derive(log_f, "D2").scale((-eta_n) % ring.mod)
    b = _solve_defining(ctx, rhs_b, lead_b, "b_gamma2")

    return KummerDatum(F, n, f, a, b, ctx.tau)


def iota_n(ctx: LevelContext, F: Series) -> Cochain:
    """The degree-1 cochain [l(F) tau, a_gamma1, b_gamma2] with twist 1."""
    datum = kummer_coefficients(ctx, F)
    return Cochain(1, (datum.f_series * ctx.tau, datum.a_gamma1, datum.b_gamma2), 1)
