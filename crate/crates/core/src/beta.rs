//! Well-poised elliptic hypergeometric integrals and Spiridonov's elliptic beta integral.

use num_complex::Complex;

use crate::biorthogonal::r_fn;
use crate::error::{Error, Result};
use crate::gamma::{egamma, gamma_residue_constant};
use crate::numerics::{
    relative_residual, residue, trapezoid_contour, CheckResult, EllipticContext, Quadrature, Sampler,
};
use crate::theta::theta;
use crate::toolkit::{binom2, cpow, efac};
use crate::C64;

/// Pole-lattice depth used when sizing residue circles and probing forbidden products.
const LATTICE_RANK: i32 = 32;

/// Parameters and contour of the integral `∮ Π_j Γ(t_j x^±)/Γ(x^{±2}) dx/(2πi x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSpec {
    pub t: Vec<C64>,
    pub p: C64,
    pub q: C64,
    pub radius: f64,
    pub nodes: usize,
    pub max_doublings: usize,
}

impl IntegralSpec {
    pub fn new(t: Vec<C64>, p: C64, q: C64) -> Self {
        IntegralSpec {
            t,
            p,
            q,
            radius: 1.0,
            nodes: 64,
            max_doublings: 8,
        }
    }

    /// Spiridonov's configuration: `t₅ = pq/(t₀⋯t₄)`.
    pub fn spiridonov(t: [C64; 5], p: C64, q: C64) -> Self {
        let t5 = p * q / t.iter().product::<C64>();
        let mut all = t.to_vec();
        all.push(t5);
        Self::new(all, p, q)
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = r;
        self
    }

    /// `m` in `t₀..t_m`.
    pub fn m(&self) -> usize {
        self.t.len() - 1
    }

    /// Relative defect of `(t₀⋯t_m)² = (pq)^{m-3}`.
    pub fn balance_defect(&self) -> f64 {
        let prod: C64 = self.t.iter().product();
        let l = prod * prod;
        let r = cpow(self.p * self.q, self.m() as i64 - 3);
        (l - r).norm() / l.norm().max(r.norm())
    }

    pub fn is_balanced(&self, ctx: &EllipticContext) -> bool {
        self.balance_defect() <= 64.0 * ctx.eps_trunc
    }

    fn context(&self, ctx: &EllipticContext) -> Result<EllipticContext> {
        ctx.with_pq(self.p, self.q)
    }

    /// `t_j t_k` must avoid `p^{-a} q^{-b}`, `a, b ≥ 0`.
    pub fn check_forbidden(&self) -> Result<()> {
        for j in 0..self.t.len() {
            for k in j..self.t.len() {
                let tt = self.t[j] * self.t[k];
                for a in 0..LATTICE_RANK {
                    let pa = tt * cpow(self.p, a as i64);
                    if pa.norm() < 0.5 {
                        break;
                    }
                    for b in 0..LATTICE_RANK {
                        let v = pa * cpow(self.q, b as i64);
                        if v.norm() < 0.5 {
                            break;
                        }
                        if (v - 1.0).norm() <= 1e-9 {
                            return Err(Error::ForbiddenProduct(j, k));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The contour `|x| = radius` must separate the poles `t_l p^j q^k` from their reciprocals.
    pub fn check_contour(&self) -> Result<()> {
        for t in &self.t {
            if !(t.norm() < self.radius && t.norm() * self.radius < 1.0) {
                return Err(Error::ParameterOutsideDisk);
            }
        }
        Ok(())
    }

    /// Poles of the integrand: `t_l p^j q^k` and their reciprocals.
    pub fn pole_lattice(&self, rank: i32) -> Vec<C64> {
        let mut out = Vec::new();
        for &t in &self.t {
            for j in 0..rank {
                for k in 0..rank {
                    let v = t * cpow(self.p, j as i64) * cpow(self.q, k as i64);
                    if v.norm() < 1e-8 {
                        break;
                    }
                    out.push(v);
                    out.push(1.0 / v);
                }
            }
        }
        out
    }
}

/// `−θ(x²;p)θ(x²;q)/x²`, which equals `1/Γ(x^{±2};p,q)`.
pub fn inverse_gamma_x2(x: C64, ctx: &EllipticContext) -> Result<C64> {
    let x2 = x * x;
    Ok(-theta(x2, ctx.p, ctx)? * theta(x2, ctx.q, ctx)? / x2)
}

fn integrand_in(x: C64, t: &[C64], ctx: &EllipticContext) -> Result<C64> {
    let (p, q) = (ctx.p, ctx.q);
    let mut v = inverse_gamma_x2(x, ctx)?;
    for &tj in t {
        let g = |y: C64| match egamma(y, p, q, ctx) {
            Err(Error::GammaPole) => Err(Error::IntegrandPole),
            other => other,
        };
        v *= g(tj * x)? * g(tj / x)?;
    }
    Ok(v)
}

/// The integrand `Π_j Γ(t_j x^±;p,q) / Γ(x^{±2};p,q)`.
pub fn wp_integrand(x: C64, spec: &IntegralSpec, ctx: &EllipticContext) -> Result<C64> {
    integrand_in(x, &spec.t, &spec.context(ctx)?)
}

/// Trapezoidal quadrature of the integral on `|x| = spec.radius`.
pub fn integrate(spec: &IntegralSpec, ctx: &EllipticContext) -> Result<Quadrature> {
    spec.check_forbidden()?;
    spec.check_contour()?;
    let ictx = spec.context(ctx)?;
    trapezoid_contour(
        |x| integrand_in(x, &spec.t, &ictx),
        spec.radius,
        spec.nodes,
        spec.max_doublings,
        &ictx,
    )
}

/// `2 Π_{i<j} Γ(t_i t_j;p,q) / ((p;p)_∞ (q;q)_∞)`.
pub fn spiridonov_closed_form(t: &[C64], p: C64, q: C64, ctx: &EllipticContext) -> Result<C64> {
    let mut v = 2.0 * gamma_residue_constant(p, q, ctx)?;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            v *= egamma(t[i] * t[j], p, q, ctx)?;
        }
    }
    Ok(v)
}

/// Quadrature of Spiridonov's integral against its closed-form evaluation, with `t₅ = pq/(t₀⋯t₄)`.
pub fn spiridonov_eval(t: [C64; 5], p: C64, q: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    spiridonov_spec_eval(&IntegralSpec::spiridonov(t, p, q), ctx)
}

/// As [`spiridonov_eval`] for a prepared six-parameter spec.
pub fn spiridonov_spec_eval(spec: &IntegralSpec, ctx: &EllipticContext) -> Result<CheckResult> {
    if spec.t.len() != 6 || !spec.is_balanced(ctx) {
        return Err(Error::InvalidArgument("needs six parameters with t₀⋯t₅ = pq".into()));
    }
    let quad = integrate(spec, ctx)?;
    let closed = spiridonov_closed_form(&spec.t, spec.p, spec.q, ctx)?;
    Ok(relative_residual(quad.value, closed, quad.max_abs, ctx)?
        .with_witness(spec.t.iter().enumerate().map(|(j, &v)| (format!("t{j}"), v)).collect()))
}

/// The integral on radii 0.95 and 1.05 agrees.
pub fn radius_robustness(spec: &IntegralSpec, ctx: &EllipticContext) -> Result<CheckResult> {
    let a = integrate(&spec.clone().with_radius(0.95), ctx)?;
    let b = integrate(&spec.clone().with_radius(1.05), ctx)?;
    relative_residual(a.value, b.value, a.max_abs.max(b.max_abs), ctx)
}

/// Draws an admissible Spiridonov configuration with `|t_j| ≤ t_max` and `|p|, |q| ≤ nome_max`.
pub fn draw_spiridonov(s: &mut Sampler, t_max: f64, nome_max: f64) -> Result<IntegralSpec> {
    let p = s.complex(0.05, nome_max);
    let q = s.complex(0.05, nome_max);
    draw_spiridonov_in(s, t_max, p, q)
}

/// As [`draw_spiridonov`] at fixed nomes.
pub fn draw_spiridonov_in(s: &mut Sampler, t_max: f64, p: C64, q: C64) -> Result<IntegralSpec> {
    for _ in 0..1000 {
        let t: Vec<C64> = (0..4).map(|_| s.complex(0.4, t_max)).collect();
        let rest = p * q / t.iter().product::<C64>();
        let lo = rest.norm() / t_max;
        if lo >= 0.9 * t_max {
            continue;
        }
        let t4 = s.complex(lo.max(0.05) * 1.05, t_max * 0.98);
        let t5 = rest / t4;
        if t5.norm() > t_max {
            continue;
        }
        let spec = IntegralSpec::new(vec![t[0], t[1], t[2], t[3], t4, t5], p, q);
        if spec.check_forbidden().is_ok() {
            return Ok(spec);
        }
    }
    Err(Error::NoAdmissibleSample)
}

/// `f(q^k x)/f(x)` against
/// `C^k q^{C(k,2)(m-3)} x^{k(m-3)} θ(q^{2k}x²;p)/θ(x²;p) Π_j (t_j x)_k/(qx/t_j)_k`,
/// `C = (-1)^{m+1} q^{m-2}/(t₀⋯t_m)`.
pub fn shift_ratio_check(spec: &IntegralSpec, x: C64, k: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let ictx = spec.context(ctx)?;
    let (p, q) = (spec.p, spec.q);
    let m = spec.m() as i64;
    let ki = k as i64;
    let lhs = integrand_in(cpow(q, ki) * x, &spec.t, &ictx)? / integrand_in(x, &spec.t, &ictx)?;
    let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let c = sign * cpow(q, m - 2) / spec.t.iter().product::<C64>();
    let mut rhs =
        cpow(c, ki) * cpow(q, binom2(ki) * (m - 3)) * cpow(x, ki * (m - 3)) * theta(cpow(q, 2 * ki) * x * x, p, &ictx)?
            / theta(x * x, p, &ictx)?;
    for &tj in &spec.t {
        rhs *= efac(tj * x, k, &ictx)? / efac(q * x / tj, k, &ictx)?;
    }
    relative_residual(lhs, rhs, 0.0, ctx)
}

/// Compares `f(qpx)/f(px)` with `f(qx)/f(x)`; equal iff `(t₀⋯t_m)² = (pq)^{m-3}`.
pub fn ellipticity_criterion(spec: &IntegralSpec, x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let ictx = spec.context(ctx)?;
    let (p, q) = (spec.p, spec.q);
    let f = |y: C64| integrand_in(y, &spec.t, &ictx);
    let a = f(q * x)? / f(x)?;
    let b = f(q * p * x)? / f(p * x)?;
    relative_residual(a, b, 0.0, ctx)
}

/// A quarter of the distance from `pole` to the nearest other singularity in `others` (or 0).
pub fn residue_radius(pole: C64, others: &[C64]) -> f64 {
    let mut d = pole.norm();
    for &o in others {
        let r = (o - pole).norm();
        if r > 1e-10 * pole.norm().max(1.0) {
            d = d.min(r);
        }
    }
    d / 4.0
}

/// Residue of the integrand at `pole`; a requested `radius` larger than the safe one is an error.
pub fn residue_at(spec: &IntegralSpec, pole: C64, radius: Option<f64>, ctx: &EllipticContext) -> Result<Quadrature> {
    let safe = residue_radius(pole, &spec.pole_lattice(LATTICE_RANK));
    let r = match radius {
        Some(r) if r > safe => return Err(Error::ResidueCircleTooLarge { suggested: safe }),
        Some(r) => r,
        None => safe,
    };
    let ictx = spec.context(ctx)?;
    residue(|x| integrand_in(x, &spec.t, &ictx), pole, r, &ictx)
}

/// `Res_{x=u₀q^k} f / Res_{x=u₀} f` against
/// `θ(q^{2k}u₀²;p)/θ(u₀²;p) (u₀²,u₀u₁,…,u₀u₅)_k/(q,qu₀/u₁,…,qu₀/u₅)_k q^{2k}`, with
/// `t = (u₀,…,u₄, p u₅)` and `u₀⋯u₅ = q` (`u₅` solved from the first five).
pub fn residue_series_link(u: [C64; 5], k_max: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let u5 = q / u.iter().product::<C64>();
    let us = [u[0], u[1], u[2], u[3], u[4], u5];
    let mut t = us.to_vec();
    t[5] = p * u5;
    let spec = IntegralSpec::new(t, p, q);
    let u0 = us[0];
    let base = residue_at(&spec, u0, None, ctx)?;
    let mut out = vec![CheckResult::exact()];
    for k in 1..=k_max {
        let pole = u0 * cpow(q, k as i64);
        let r = residue_at(&spec, pole, None, ctx)?;
        let ratio = r.value / base.value;
        let mut closed = theta(cpow(q, 2 * k as i64) * u0 * u0, p, ctx)? / theta(u0 * u0, p, ctx)?
            * cpow(q, 2 * k as i64)
            * efac(u0 * u0, k, ctx)?
            / efac(q, k, ctx)?;
        for &uj in &us[1..] {
            closed *= efac(u0 * uj, k, ctx)? / efac(q * u0 / uj, k, ctx)?;
        }
        out.push(relative_residual(ratio / closed, Complex::new(1.0, 0.0), 0.0, ctx)?);
    }
    Ok(CheckResult::worst_of(out))
}

fn biorthogonal_integrand(x: C64, t: &[C64; 6], k: usize, l: usize, lam: C64, ctx: &EllipticContext) -> Result<C64> {
    let q = ctx.q;
    let dual = [t[0], t[1], t[2], t[3], t[5], t[4]];
    let th = theta(lam * x, q, ctx)? * theta(lam / x, q, ctx)?;
    Ok(th * integrand_in(x, t, ctx)? * r_fn(k, x, t, ctx)? * r_fn(l, x, &dual, ctx)?)
}

/// `∮ θ(λx^±;q) Γ-kernel r_k(x;t₀..t₅) r_l(x;t₀,t₁,t₂,t₃,t₅,t₄) dx/(2πi x)` for `t₀⋯t₅ = q`.
///
/// The displaced poles `t₄q^{-s}p^m` (`s ≤ k`) and `t₅q^{-s}p^m` (`s ≤ l`) must be
/// enclosed; those outside the unit circle are added as residues, twice (the
/// reciprocal poles contribute equally). Returns the value and its term scale.
pub fn biorthogonal_integral(t: &[C64; 6], k: usize, l: usize, lam: C64, ctx: &EllipticContext) -> Result<(C64, f64)> {
    let (p, q) = (ctx.p, ctx.q);
    let prod: C64 = t.iter().product();
    if (prod / q - 1.0).norm() > 64.0 * ctx.eps_trunc {
        return Err(Error::InvalidArgument("needs t₀⋯t₅ = q".into()));
    }
    for tj in t {
        if !(tj.norm() < 1.0) {
            return Err(Error::ParameterOutsideDisk);
        }
    }
    let f = |x: C64| biorthogonal_integrand(x, t, k, l, lam, ctx);
    let quad = trapezoid_contour(f, 1.0, 64, 8, ctx)?;
    let mut total = quad.value;
    let mut scale = quad.max_abs;
    let mut displaced = Vec::new();
    for (tt, smax) in [(t[4], k), (t[5], l)] {
        for s in 1..=smax {
            for m in 0..LATTICE_RANK {
                let pole = tt * cpow(q, -(s as i64)) * cpow(p, m as i64);
                if pole.norm() <= 1.0 {
                    break;
                }
                displaced.push(pole);
            }
        }
    }
    let mut others = IntegralSpec::new(t.to_vec(), p, q).pole_lattice(LATTICE_RANK);
    for &d in &displaced {
        others.push(d);
        others.push(1.0 / d);
    }
    for &pole in &displaced {
        let r = residue_radius(pole, &others).min(1e-3 * pole.norm());
        let res = residue(|z| Ok(f(z)? / z), pole, r, ctx)?;
        total += 2.0 * res.value;
        scale = scale.max(2.0 * res.max_abs * r);
    }
    Ok((total, scale))
}

/// The biorthogonal integral vanishes for `k ≠ l`.
pub fn continuous_biorthogonality(
    t: &[C64; 6],
    k: usize,
    l: usize,
    lam: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    if k == l {
        return Err(Error::InvalidArgument("orthogonality is claimed only for k ≠ l".into()));
    }
    let (v, scale) = biorthogonal_integral(t, k, l, lam, ctx)?;
    relative_residual(v, Complex::new(0.0, 0.0), scale, ctx)
}

/// Parameters `t₀..t₅` with moduli in `[0.8, 0.97]` and `t₀⋯t₅ = q`.
///
/// Draws are rejected when a pole `t q^{-s} p^m` displaced by degrees up to
/// two sits within a factor 0.97 of the unit circle, since the trapezoid rule
/// converges like the pole's distance to the contour.
pub fn draw_biorthogonal_params(s: &mut Sampler, ctx: &EllipticContext) -> Result<[C64; 6]> {
    let (p, q) = (ctx.p, ctx.q);
    let near = |z: C64| z.norm() > 0.97 && z.norm() < 1.0 / 0.97;
    for _ in 0..1000 {
        let t: Vec<C64> = (0..5).map(|_| s.complex(0.8, 0.97)).collect();
        let t5 = q / t.iter().product::<C64>();
        if !(t5.norm() < 0.97 && t5.norm() > q.norm()) {
            continue;
        }
        let crowded = [t[4], t5]
            .iter()
            .any(|&tt| (1..=2).any(|s| (0..LATTICE_RANK).any(|m| near(tt * cpow(q, -s) * cpow(p, m as i64)))));
        if !crowded {
            return Ok([t[0], t[1], t[2], t[3], t[4], t5]);
        }
    }
    Err(Error::NoAdmissibleSample)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn integrand_symmetry_and_finiteness() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 1);
        let spec = draw_spiridonov(&mut s, 0.8, 0.4).unwrap();
        let x = s.complex(0.7, 1.3);
        let a = wp_integrand(x, &spec, &ctx).unwrap();
        let b = wp_integrand(1.0 / x, &spec, &ctx).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
        for j in 0..16 {
            let v = wp_integrand(Complex::from_polar(1.0, j as f64 * 0.4), &spec, &ctx).unwrap();
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn shift_ratio() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 2);
        let spec = draw_spiridonov(&mut s, 0.8, 0.4).unwrap();
        let x = s.complex(0.7, 1.3);
        for k in 1..=3 {
            assert!(shift_ratio_check(&spec, x, k, &ctx).unwrap().pass);
        }
    }

    #[test]
    fn symmetric_point() {
        let (p, q) = (c(0.05, 0.0), c(0.05, 0.0));
        let ctx = EllipticContext::default().with_tol(1e-8);
        let t = c(0.0025f64.powf(1.0 / 6.0), 0.0);
        let r = spiridonov_eval([t; 5], p, q, &ctx).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn seeded_complex_draw() {
        let ctx = EllipticContext::default().with_tol(1e-7);
        let spec = draw_spiridonov(&mut Sampler::new(&ctx, 3), 0.8, 0.4).unwrap();
        let r = spiridonov_spec_eval(&spec, &ctx).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(radius_robustness(&spec, &ctx).unwrap().pass);
    }

    #[test]
    fn forbidden_and_outside() {
        let ctx = EllipticContext::default();
        let (p, q) = (ctx.p, ctx.q);
        let t = [c(0.5, 0.1), 1.0 / c(0.5, 0.1), c(0.6, 0.0), c(0.3, 0.2), c(0.7, -0.1)];
        assert!(matches!(
            spiridonov_eval(t, p, q, &ctx),
            Err(Error::ForbiddenProduct(0, 1))
        ));
        let t = [c(0.1, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0), c(0.2, 0.0)];
        assert!(matches!(
            spiridonov_eval(t, p, q, &ctx),
            Err(Error::ParameterOutsideDisk)
        ));
    }

    #[test]
    fn criterion_separates_balanced_from_unbalanced() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 4);
        let spec = draw_spiridonov(&mut s, 0.8, 0.4).unwrap();
        let x = s.complex(0.7, 1.3);
        assert!(ellipticity_criterion(&spec, x, &ctx).unwrap().pass);
        let mut off = spec.clone();
        off.t[2] *= 1.3;
        let r = ellipticity_criterion(&off, x, &ctx).unwrap();
        assert!(r.ratio() > 1e3 * ctx.tol, "{r:?}");
    }

    #[test]
    fn residue_link() {
        let ctx = EllipticContext::default().with_tol(1e-8);
        let mut s = Sampler::new(&ctx, 5);
        let u: [C64; 5] = (0..5)
            .map(|_| s.complex(0.5, 1.2))
            .collect::<Vec<_>>()
            .try_into()
            .unwrap();
        let r0 = residue_series_link(u, 0, &ctx).unwrap();
        assert_eq!(r0.residual, 0.0);
        let r = residue_series_link(u, 2, &ctx).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn oversized_residue_circle() {
        let ctx = EllipticContext::default();
        let spec = draw_spiridonov(&mut Sampler::new(&ctx, 6), 0.8, 0.4).unwrap();
        let err = residue_at(&spec, spec.t[0], Some(10.0), &ctx).unwrap_err();
        assert!(matches!(err, Error::ResidueCircleTooLarge { .. }));
    }

    #[test]
    fn continuous_biorthogonality_low_degrees() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 7);
        let t = draw_biorthogonal_params(&mut s, &ctx).unwrap();
        let lam = t[3];
        let (v, _) = biorthogonal_integral(&t, 0, 0, lam, &ctx).unwrap();
        assert!(v.norm() > 1e-6);
        for (k, l) in [(0, 1), (1, 0), (1, 2)] {
            let r = continuous_biorthogonality(&t, k, l, lam, &ctx).unwrap();
            assert!(r.pass, "k={k} l={l}: {r:?}");
        }
    }
}
