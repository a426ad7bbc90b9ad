//! The elliptic gamma function `Γ(x;p,q)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{relative_residual, residue, CheckResult, EllipticContext};
use crate::theta::{qpochhammer_inf, theta, ThetaProductPlan};
use crate::toolkit::{cpow, efac};
use crate::C64;

/// Truncation of the double product defining `Γ`.
///
/// The product is taken row by row over the smaller nome (`j ≤ j_max`), each row
/// being a ratio of two infinite Pochhammer symbols in the other nome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGridPlan {
    pub j_max: usize,
    pub k_max: usize,
    pub tail_bound: f64,
    /// True when rows run over `q` instead of `p`.
    pub swapped: bool,
}

impl GammaGridPlan {
    pub fn new(x: C64, p: C64, q: C64, ctx: &EllipticContext) -> Result<Self> {
        for nome in [p, q] {
            if !(nome.norm() < 1.0) {
                return Err(Error::NomeOutOfRange);
            }
        }
        if x == Complex::new(0.0, 0.0) {
            return Err(Error::GammaPole);
        }
        let swapped = q.norm() < p.norm();
        let (r, s) = if swapped { (q, p) } else { (p, q) };
        let (rn, sn) = (r.norm(), s.norm());
        let xn = x.norm();
        let mut j_max = 0usize;
        let mut tail = f64::INFINITY;
        if rn == 0.0 {
            tail = 0.0;
        } else {
            let amp = (rn * sn / xn + xn) * 2.0 / ((1.0 - rn) * (1.0 - sn));
            let mut rj = rn;
            while j_max < 4096 {
                tail = rj * amp;
                if tail <= ctx.eps_trunc && rj * xn < 0.5 {
                    break;
                }
                j_max += 1;
                rj *= rn;
            }
        }
        let row = ThetaProductPlan::new(x, s, ctx)?;
        Ok(GammaGridPlan {
            j_max,
            k_max: row.n_head + row.series_terms,
            tail_bound: tail,
            swapped,
        })
    }
}

/// `Γ(x;p,q) = Π_{j,k≥0} (1 − p^{j+1}q^{k+1}/x)/(1 − p^j q^k x)`.
///
/// Returns an exact zero at the zeros `x = p^{j+1}q^{k+1}` and
/// [`Error::GammaPole`] at the poles `x = p^{-j}q^{-k}`.
pub fn egamma(x: C64, p: C64, q: C64, ctx: &EllipticContext) -> Result<C64> {
    let plan = GammaGridPlan::new(x, p, q, ctx)?;
    let (r, s) = if plan.swapped { (q, p) } else { (p, q) };
    let mut num = Complex::new(1.0, 0.0);
    let mut den = Complex::new(1.0, 0.0);
    let mut rj = Complex::new(1.0, 0.0);
    for _ in 0..=plan.j_max {
        num *= qpochhammer_inf(rj * r * s / x, s, ctx)?;
        den *= qpochhammer_inf(rj * x, s, ctx)?;
        rj *= r;
    }
    if den == Complex::new(0.0, 0.0) {
        return Err(Error::GammaPole);
    }
    Ok(num / den)
}

/// `Γ(t x; p,q) Γ(t/x; p,q)`.
pub fn egamma_pm(t: C64, x: C64, p: C64, q: C64, ctx: &EllipticContext) -> Result<C64> {
    Ok(egamma(t * x, p, q, ctx)? * egamma(t / x, p, q, ctx)?)
}

/// `Γ(qx) = θ(x;p) Γ(x)`.
pub fn functional_equation_check(x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let l = egamma(q * x, p, q, ctx)?;
    let r = theta(x, p, ctx)? * egamma(x, p, q, ctx)?;
    relative_residual(l, r, 0.0, ctx)
}

/// `Γ(x) Γ(pq/x) = 1`.
pub fn inversion_check(x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let v = egamma(x, p, q, ctx)? * egamma(p * q / x, p, q, ctx)?;
    relative_residual(v, Complex::new(1.0, 0.0), 0.0, ctx)
}

/// `Γ(x;p,q) = Γ(x;q,p)`.
pub fn nome_symmetry_check(x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    relative_residual(egamma(x, p, q, ctx)?, egamma(x, q, p, ctx)?, 0.0, ctx)
}

/// `Γ(qx, 1/x) / Γ(x, q/x) = θ(x;p)/θ(1/x;p)`.
pub fn reflection_shift_check(x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let g = |y: C64| egamma(y, p, q, ctx);
    let l = g(q * x)? * g(1.0 / x)? / (g(x)? * g(q / x)?);
    let r = theta(x, p, ctx)? / theta(1.0 / x, p, ctx)?;
    relative_residual(l, r, 0.0, ctx)
}

/// `(a;q,p)_n = Γ(q^n a)/Γ(a)`.
pub fn efac_via_gamma(a: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let l = efac(a, n, ctx)?;
    let r = egamma(cpow(q, n as i64) * a, p, q, ctx)? / egamma(a, p, q, ctx)?;
    relative_residual(l, r, 0.0, ctx)
}

/// `1/((p;p)_∞ (q;q)_∞)`, the residue of `Γ(t/x)` at `x = t` divided by `t`.
pub fn gamma_residue_constant(p: C64, q: C64, ctx: &EllipticContext) -> Result<C64> {
    Ok(Complex::new(1.0, 0.0) / (qpochhammer_inf(p, p, ctx)? * qpochhammer_inf(q, q, ctx)?))
}

/// Compares [`gamma_residue_constant`] with a small-circle residue of `Γ(t/x)` at `x = t`.
pub fn residue_constant_check(t: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let radius = t.norm() * (1.0 - p.norm().max(q.norm())) / 4.0;
    let qr = residue(|x| egamma(t / x, p, q, ctx), t, radius, ctx)?;
    let c = gamma_residue_constant(p, q, ctx)?;
    relative_residual(qr.value / t, c, qr.max_abs * radius / t.norm(), ctx)
}
