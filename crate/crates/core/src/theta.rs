//! The theta function θ(x;p) = (x;p)_∞ (p/x;p)_∞ and its infinite-product kernel.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::EllipticContext;
use crate::C64;

/// How an infinite product `(a;p)_∞` is truncated: `n_head` explicit factors,
/// then `exp(-Σ_n (a p^N)^n / (n(1-p^n)))` summed to `series_terms` terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaProductPlan {
    pub n_head: usize,
    pub series_terms: usize,
    /// Bound on the neglected part of `log (a;p)_∞`.
    pub tail_bound: f64,
}

impl ThetaProductPlan {
    pub fn new(a: C64, p: C64, ctx: &EllipticContext) -> Result<Self> {
        let ap = p.norm();
        if !(ap < 1.0) {
            return Err(Error::NomeOutOfRange);
        }
        let mut z = a.norm();
        let mut n_head = 0usize;
        if ap == 0.0 {
            return Ok(ThetaProductPlan {
                n_head: usize::from(z != 0.0),
                series_terms: 0,
                tail_bound: 0.0,
            });
        }
        while z >= 0.5 {
            z *= ap;
            n_head += 1;
        }
        // remaining log-series terms are bounded by z^n / (n (1-|p|) (1-z))
        let denom = (1.0 - ap) * (1.0 - z);
        let mut series_terms = 0usize;
        let mut zn = z;
        let mut bound = if z == 0.0 { 0.0 } else { z / denom };
        while bound > ctx.eps_trunc {
            series_terms += 1;
            zn *= z;
            bound = zn / ((series_terms + 1) as f64 * denom);
        }
        Ok(ThetaProductPlan {
            n_head,
            series_terms,
            tail_bound: bound,
        })
    }
}

fn zero_factor(f: C64, ctx: &EllipticContext) -> bool {
    f.norm() <= 10.0 * ctx.eps_trunc
}

/// The infinite product `(a;p)_∞ = Π_{k≥0} (1 - a p^k)`.
pub fn qpochhammer_inf(a: C64, p: C64, ctx: &EllipticContext) -> Result<C64> {
    let plan = ThetaProductPlan::new(a, p, ctx)?;
    let one = Complex::new(1.0, 0.0);
    if a == Complex::new(0.0, 0.0) {
        return Ok(one);
    }
    let mut prod = one;
    let mut apk = a;
    for _ in 0..plan.n_head {
        let f = one - apk;
        if zero_factor(f, ctx) {
            return Ok(Complex::new(0.0, 0.0));
        }
        prod *= f;
        apk *= p;
    }
    if plan.series_terms > 0 {
        let z = apk;
        let mut zn = one;
        let mut pn = one;
        let mut log = Complex::new(0.0, 0.0);
        for n in 1..=plan.series_terms {
            zn *= z;
            pn *= p;
            log += zn / ((one - pn) * n as f64);
        }
        prod *= (-log).exp();
    } else if p == Complex::new(0.0, 0.0) {
        return Ok(one - a);
    }
    Ok(prod)
}

/// θ(x;p) = (x;p)_∞ (p/x;p)_∞, exactly zero on `p^Z`.
pub fn theta(x: C64, p: C64, ctx: &EllipticContext) -> Result<C64> {
    if x == Complex::new(0.0, 0.0) {
        return Err(Error::ThetaArgumentZero);
    }
    let a = qpochhammer_inf(x, p, ctx)?;
    if a == Complex::new(0.0, 0.0) {
        return Ok(a);
    }
    let b = qpochhammer_inf(p / x, p, ctx)?;
    Ok(a * b)
}

/// θ(x;p) from Jacobi's triple product: `Σ_n (-1)^n p^{n(n-1)/2} x^n / (p;p)_∞`.
pub fn theta_series(x: C64, p: C64, ctx: &EllipticContext) -> Result<C64> {
    if x == Complex::new(0.0, 0.0) {
        return Err(Error::ThetaArgumentZero);
    }
    if !(p.norm() < 1.0) {
        return Err(Error::NomeOutOfRange);
    }
    let one = Complex::new(1.0, 0.0);
    let mut sum = one;
    let mut biggest = 1f64;
    // n >= 1: t_{n+1} = -p^n x t_n
    let mut t = one;
    let mut pn = one;
    loop {
        let mult = -pn * x;
        t *= mult;
        sum += t;
        biggest = biggest.max(t.norm());
        pn *= p;
        if (t.norm() <= ctx.eps_trunc * biggest && (pn * x).norm() < 1.0) || t.norm() == 0.0 {
            break;
        }
    }
    // n <= -1: t_{n-1} = -p^{1-n} / x t_n
    let mut t = one;
    let mut pn = p;
    loop {
        t *= -pn / x;
        sum += t;
        biggest = biggest.max(t.norm());
        pn *= p;
        if (t.norm() <= ctx.eps_trunc * biggest && (pn / x).norm() < 1.0) || t.norm() == 0.0 {
            break;
        }
    }
    Ok(sum / qpochhammer_inf(p, p, ctx)?)
}

/// θ(a₁,…,aₘ;p); the empty product is 1.
pub fn theta_multi(args: &[C64], p: C64, ctx: &EllipticContext) -> Result<C64> {
    let mut prod = Complex::new(1.0, 0.0);
    for &a in args {
        prod *= theta(a, p, ctx)?;
    }
    Ok(prod)
}

/// θ(ax^±;p) = θ(ax;p) θ(a/x;p).
pub fn theta_pm(a: C64, x: C64, p: C64, ctx: &EllipticContext) -> Result<C64> {
    if x == Complex::new(0.0, 0.0) {
        return Err(Error::ThetaArgumentZero);
    }
    Ok(theta(a * x, p, ctx)? * theta(a / x, p, ctx)?)
}

/// Predicted value of θ(p^k x;p): `(-1)^k p^{-k(k-1)/2} x^{-k} θ(x;p)`.
pub fn quasi_shift(x: C64, p: C64, k: i32, ctx: &EllipticContext) -> Result<C64> {
    let base = theta(x, p, ctx)?;
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let kk = k as i64;
    let e = kk * (kk - 1) / 2;
    Ok(base * sign * p.powi(-(e as i32)) * x.powi(-k))
}

/// θ(x;p) with the context nome.
pub fn th(x: C64, ctx: &EllipticContext) -> Result<C64> {
    theta(x, ctx.p, ctx)
}

/// Product of θ(·;p) over `args` with the context nome.
pub fn th_multi(args: &[C64], ctx: &EllipticContext) -> Result<C64> {
    theta_multi(args, ctx.p, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    fn ctx() -> EllipticContext {
        EllipticContext::default()
    }

    #[test]
    fn pochhammer_examples() {
        let ctx = ctx();
        assert_eq!(qpochhammer_inf(c(0.0, 0.0), c(0.3, 0.0), &ctx).unwrap(), c(1.0, 0.0));
        assert_eq!(qpochhammer_inf(c(1.0, 0.0), c(0.3, 0.2), &ctx).unwrap(), c(0.0, 0.0));
        let mut brute = c(1.0, 0.0);
        for k in 0..200 {
            brute *= 1.0 - 0.5 * 0.5f64.powi(k);
        }
        let v = qpochhammer_inf(c(0.5, 0.0), c(0.5, 0.0), &ctx).unwrap();
        assert!((v - brute).norm() < 1e-14, "{v} vs {brute}");
    }

    #[test]
    fn pochhammer_matches_brute_force_for_large_argument() {
        let ctx = ctx();
        let a = c(-7.0, 3.0);
        let p = c(0.4, -0.3);
        let mut brute = c(1.0, 0.0);
        let mut apk = a;
        for _ in 0..400 {
            brute *= 1.0 - apk;
            apk *= p;
        }
        let v = qpochhammer_inf(a, p, &ctx).unwrap();
        assert!((v - brute).norm() < 1e-13 * brute.norm());
    }

    #[test]
    fn plan_respects_tail_bound() {
        let ctx = ctx();
        for (a, p) in [
            (c(0.9, 0.0), c(0.9, 0.0)),
            (c(30.0, 1.0), c(0.2, 0.1)),
            (c(1e-3, 0.0), c(0.5, 0.0)),
        ] {
            let plan = ThetaProductPlan::new(a, p, &ctx).unwrap();
            assert!(plan.tail_bound <= ctx.eps_trunc);
            assert!((a * p.powi(plan.n_head as i32)).norm() < 0.5);
        }
        assert_eq!(
            ThetaProductPlan::new(c(0.5, 0.0), c(1.0, 0.0), &ctx),
            Err(Error::NomeOutOfRange)
        );
    }

    #[test]
    fn theta_examples() {
        let ctx = ctx();
        let x = c(0.3, 0.1);
        assert!((theta(x, c(0.0, 0.0), &ctx).unwrap() - (1.0 - x)).norm() < 1e-16);
        assert_eq!(theta(c(0.2, 0.0), c(0.2, 0.0), &ctx).unwrap(), c(0.0, 0.0));
        let p = c(0.15, 0.0);
        let sp = p.sqrt();
        let v = theta_multi(&[c(-1.0, 0.0), sp, -sp], p, &ctx).unwrap();
        assert!((v - 2.0).norm() < 1e-13);
        assert_eq!(theta(c(0.0, 0.0), p, &ctx), Err(Error::ThetaArgumentZero));
        assert_eq!(theta(c(0.5, 0.0), c(1.2, 0.0), &ctx), Err(Error::NomeOutOfRange));
    }

    #[test]
    fn theta_zero_on_lattice() {
        let ctx = ctx();
        let p = c(0.3, 0.2);
        for k in -4..=4 {
            assert_eq!(theta(p.powi(k), p, &ctx).unwrap(), c(0.0, 0.0), "k={k}");
        }
    }

    #[test]
    fn series_examples() {
        let ctx = ctx();
        let p = c(0.1, 0.0);
        let a = theta_series(c(-1.0, 0.0), p, &ctx).unwrap();
        let b = theta(c(-1.0, 0.0), p, &ctx).unwrap();
        assert!((a - b).norm() < 1e-13);
        let x = Complex::from_polar(0.7, 0.3);
        let p = c(0.25, 0.1);
        let a = theta_series(x, p, &ctx).unwrap();
        let b = theta(x, p, &ctx).unwrap();
        assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        let x = c(0.4, -0.2);
        let a = theta_series(x, c(0.0, 0.0), &ctx).unwrap();
        assert!((a - (1.0 - x)).norm() < 1e-16);
    }

    #[test]
    fn multi_and_pm() {
        let ctx = ctx();
        let p = c(0.3, 0.0);
        assert_eq!(theta_multi(&[], p, &ctx).unwrap(), c(1.0, 0.0));
        let sp = p.sqrt();
        let v = theta_multi(&[c(-1.0, 0.0), sp, -sp], p, &ctx).unwrap();
        assert!((v - 2.0).norm() < 1e-13);
        let a = c(0.7, 0.4);
        let x = c(1.1, -0.6);
        let l = theta_pm(a, x, p, &ctx).unwrap();
        let r = theta_pm(a, 1.0 / x, p, &ctx).unwrap();
        assert!((l - r).norm() < 1e-14 * l.norm());
    }

    #[test]
    fn quasi_shift_examples() {
        let ctx = ctx();
        let p = c(0.2, 0.0);
        let x = c(0.6, 0.0);
        assert_eq!(quasi_shift(x, p, 0, &ctx).unwrap(), theta(x, p, &ctx).unwrap());
        let direct = theta(p * x, p, &ctx).unwrap();
        assert!((quasi_shift(x, p, 1, &ctx).unwrap() - direct).norm() < 1e-13);
        let x = Complex::from_polar(1.0, 2.1);
        let p = c(0.3, 0.15);
        let direct = theta(p.powi(-2) * x, p, &ctx).unwrap();
        let pred = quasi_shift(x, p, -2, &ctx).unwrap();
        assert!((pred - direct).norm() < 1e-13 * direct.norm());
    }
}
