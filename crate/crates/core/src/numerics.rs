//! Evaluation context, residual bookkeeping, seeded sampling and circle quadrature.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_EPS_TRUNC: f64 = 1e-15;

/// Nome, base and numerical policy shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticContext {
    pub p: C64,
    pub q: C64,
    pub eps_trunc: f64,
    pub tol: f64,
    pub rng_seed: u64,
}

impl EllipticContext {
    pub fn new(p: C64, q: C64) -> Result<Self> {
        let ctx = EllipticContext {
            p,
            q,
            eps_trunc: DEFAULT_EPS_TRUNC,
            tol: DEFAULT_TOL,
            rng_seed: 0,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        let (ap, aq) = (self.p.norm(), self.q.norm());
        if !(ap > 0.0 && ap < 1.0) {
            return Err(Error::InvalidContext(format!("|p| = {ap} not in (0,1)")));
        }
        if !(aq > 0.0 && aq < 1.0) {
            return Err(Error::InvalidContext(format!("|q| = {aq} not in (0,1)")));
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc.is_finite()) {
            return Err(Error::InvalidContext("eps_trunc must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidContext("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_eps_trunc(mut self, eps: f64) -> Self {
        self.eps_trunc = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Same policy, different nome and base.
    pub fn with_pq(&self, p: C64, q: C64) -> Result<Self> {
        let ctx = EllipticContext { p, q, ..*self };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Principal square root of the nome.
    pub fn sqrt_p(&self) -> C64 {
        self.p.sqrt()
    }

    /// Pairs `(k, l)` with `|k|,|l| <= 32`, `(k,l) != (0,0)` and `q^k` within
    /// `eps_trunc` of `p^l`. An empty list means no resonance was detected.
    pub fn ndpq_probe(&self) -> Vec<(i32, i32)> {
        let lq = self.q.ln();
        let lp = self.p.ln();
        let mut hits = Vec::new();
        for k in -32i32..=32 {
            for l in -32i32..=32 {
                if k == 0 && l == 0 {
                    continue;
                }
                let d = lq * k as f64 - lp * l as f64;
                let turns = (d.im / (2.0 * PI)).round();
                let gap = Complex::new(d.re, d.im - 2.0 * PI * turns).norm();
                if gap <= self.eps_trunc {
                    hits.push((k, l));
                }
            }
        }
        hits
    }

    /// The context for trial `trial` of a seeded suite.
    pub fn for_trial(&self, trial: u64) -> Self {
        let mut z = self
            .rng_seed
            .wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        EllipticContext {
            rng_seed: z ^ (z >> 31),
            ..*self
        }
    }

    /// A reproducible generator; distinct `stream` values give independent sequences.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }
}

impl Default for EllipticContext {
    fn default() -> Self {
        EllipticContext {
            p: Complex::new(0.2, 0.1),
            q: Complex::new(0.35, -0.2),
            eps_trunc: DEFAULT_EPS_TRUNC,
            tol: DEFAULT_TOL,
            rng_seed: 0,
        }
    }
}

/// Labelled inputs that produced a residual.
pub type Witness = Vec<(String, C64)>;

/// Outcome of comparing two evaluations of an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl CheckResult {
    pub fn ratio(&self) -> f64 {
        self.residual / self.scale
    }

    /// A trivially passing result.
    pub fn exact() -> Self {
        CheckResult {
            residual: 0.0,
            scale: 1.0,
            pass: true,
            witness: None,
        }
    }

    pub fn from_parts(residual: f64, scale: f64, tol: f64) -> Self {
        let scale = scale.max(1.0);
        let pass = residual.is_finite() && residual / scale <= tol;
        CheckResult {
            residual,
            scale,
            pass,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    /// Keeps whichever result has the larger normalized residual.
    pub fn worst(self, other: CheckResult) -> CheckResult {
        let a = self.ratio();
        let b = other.ratio();
        let pass = self.pass && other.pass;
        let mut w = if b > a || b.is_nan() { other } else { self };
        w.pass = pass;
        w
    }

    /// Folds a sequence of results into the worst one; an empty sequence passes.
    pub fn worst_of<I: IntoIterator<Item = CheckResult>>(iter: I) -> CheckResult {
        iter.into_iter()
            .reduce(CheckResult::worst)
            .unwrap_or_else(CheckResult::exact)
    }
}

/// `a / b` with both operands scaled by `|b|` first, so quotients of moduli
/// beyond `1e154` do not overflow the intermediate `|b|²`.
pub fn cdiv(a: C64, b: C64) -> C64 {
    let s = b.norm();
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    (a / s) * (b / s).conj()
}

/// Cancellation-aware comparison of `lhs` and `rhs`.
pub fn relative_residual(lhs: C64, rhs: C64, term_scale: f64, ctx: &EllipticContext) -> Result<CheckResult> {
    if !(lhs.re.is_finite() && lhs.im.is_finite() && rhs.re.is_finite() && rhs.im.is_finite()) {
        return Err(Error::NonFiniteOperand);
    }
    if !(term_scale >= 0.0) || !term_scale.is_finite() {
        return Err(Error::NonFiniteOperand);
    }
    let residual = (lhs - rhs).norm();
    let scale = 1f64.max(term_scale).max(lhs.norm()).max(rhs.norm());
    Ok(CheckResult::from_parts(residual, scale, ctx.tol))
}

/// Seeded points in the annulus `r_min <= |x| <= r_max`, avoiding thin wedges
/// around the given directions.
pub fn sample_annulus(
    r_min: f64,
    r_max: f64,
    count: usize,
    excluded_rays: &[C64],
    ctx: &EllipticContext,
) -> Result<Vec<C64>> {
    if !(r_min > 0.0 && r_min <= r_max) || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "annulus [{r_min}, {r_max}] with {count} points"
        )));
    }
    let width = 10.0 * ctx.eps_trunc;
    if excluded_rays.len() as f64 * 2.0 * width >= 2.0 * PI {
        return Err(Error::NoAdmissibleSample);
    }
    let rays: Vec<f64> = excluded_rays.iter().map(|z| z.arg()).collect();
    let mut rng = ctx.rng(0x5a3d);
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count {
        let phi = rng.gen_range(-PI..PI);
        let blocked = rays.iter().any(|&ray| {
            let d = (phi - ray).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) < width
        });
        if blocked {
            misses += 1;
            if misses > 10_000 {
                return Err(Error::NoAdmissibleSample);
            }
            continue;
        }
        let r = if r_min == r_max {
            r_min
        } else {
            rng.gen_range(r_min..=r_max)
        };
        out.push(Complex::from_polar(r, phi));
    }
    Ok(out)
}

/// Trapezoid estimate together with its convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    /// Difference between the last two estimates.
    pub delta: f64,
    pub nodes: usize,
    /// Largest integrand modulus seen on the contour.
    pub max_abs: f64,
    /// `|delta|` after each doubling, oldest first.
    pub deltas: Vec<f64>,
}

/// Mean of `f` over the circle `|x - center| = r`, doubling the node count until
/// successive estimates agree within `ctx.tol * max(1, max|f|)`.
pub fn circle_mean<F>(
    mut f: F,
    center: C64,
    r: f64,
    nodes: usize,
    max_doublings: usize,
    ctx: &EllipticContext,
) -> Result<Quadrature>
where
    F: FnMut(C64) -> Result<C64>,
{
    if nodes < 8 || !nodes.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "node count {nodes} must be a power of two >= 8"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let mut max_abs = 0f64;
    let mut eval = |j: usize, n: usize, max_abs: &mut f64| -> Result<C64> {
        let x = center + Complex::from_polar(r, 2.0 * PI * j as f64 / n as f64);
        let v = f(x)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteOperand);
        }
        *max_abs = max_abs.max(v.norm());
        Ok(v)
    };
    let mut n = nodes;
    let mut acc = CompensatedSum::default();
    for j in 0..n {
        acc.add(eval(j, n, &mut max_abs)?);
    }
    let mut estimate = acc.value() / n as f64;
    let mut deltas = Vec::new();
    for _ in 0..max_doublings {
        let mut odd = CompensatedSum::default();
        for j in 0..n {
            odd.add(eval(2 * j + 1, 2 * n, &mut max_abs)?);
        }
        let next = (estimate + odd.value() / n as f64) * 0.5;
        n *= 2;
        let delta = (next - estimate).norm();
        deltas.push(delta);
        let previous = estimate;
        estimate = next;
        if delta <= ctx.tol * max_abs.max(1.0) {
            return Ok(Quadrature {
                value: estimate,
                delta,
                nodes: n,
                max_abs,
                deltas,
            });
        }
        if deltas.len() == max_doublings {
            return Err(Error::QuadratureStall {
                last: estimate,
                previous,
            });
        }
    }
    Err(Error::QuadratureStall {
        last: estimate,
        previous: estimate,
    })
}

/// `(1/2πi)∮ f(x) dx/x` over `|x| = r`, i.e. the mean of `f` on that circle.
pub fn trapezoid_contour<F>(
    f: F,
    r: f64,
    nodes: usize,
    max_doublings: usize,
    ctx: &EllipticContext,
) -> Result<Quadrature>
where
    F: FnMut(C64) -> Result<C64>,
{
    circle_mean(f, Complex::new(0.0, 0.0), r, nodes, max_doublings, ctx)
}

/// Residue of `g` at `z0` from the mean of `(z - z0) g(z)` on a small circle.
pub fn residue<F>(mut g: F, z0: C64, radius: f64, ctx: &EllipticContext) -> Result<Quadrature>
where
    F: FnMut(C64) -> Result<C64>,
{
    circle_mean(|z| Ok(g(z)? * (z - z0)), z0, radius, 16, 10, ctx)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: C64,
    comp: C64,
    max_term: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: C64) {
        self.max_term = self.max_term.max(x.norm());
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }

    /// Largest modulus among the added terms.
    pub fn max_term(&self) -> f64 {
        self.max_term
    }
}

fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

impl std::iter::FromIterator<C64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Maximum number of redraws when a sampled parameter set hits a degeneracy.
pub const MAX_REDRAWS: usize = 32;

/// Runs `check` on fresh draws from `stream` until one is nondegenerate.
pub fn with_redraws<T, F>(ctx: &EllipticContext, stream: u64, mut check: F) -> Result<T>
where
    F: FnMut(&mut Sampler) -> Result<T>,
{
    let mut sampler = Sampler::new(ctx, stream);
    for _ in 0..MAX_REDRAWS {
        match check(&mut sampler) {
            Err(e) if e.is_degenerate() => continue,
            other => return other,
        }
    }
    Err(Error::DegenerateDraw(MAX_REDRAWS))
}

/// Seeded parameter draws.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(ctx: &EllipticContext, stream: u64) -> Self {
        Sampler { rng: ctx.rng(stream) }
    }

    pub fn from_seed(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Complex number with modulus uniform in `[lo, hi]` and uniform argument.
    pub fn complex(&mut self, lo: f64, hi: f64) -> C64 {
        let r = if lo == hi { lo } else { self.rng.gen_range(lo..hi) };
        Complex::from_polar(r, self.rng.gen_range(-PI..PI))
    }

    /// Parameter in the default well-conditioned range.
    pub fn param(&mut self) -> C64 {
        self.complex(0.3, 1.5)
    }

    pub fn params(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.param()).collect()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn residual_examples() {
        let ctx = EllipticContext::default();
        let r = relative_residual(c(1.0, 0.0), c(1.0, 0.0), 0.0, &ctx).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.pass);
        let r = relative_residual(c(0.0, 0.0), c(1e-12, 0.0), 1e3, &ctx).unwrap();
        assert!(r.pass);
        assert!((r.ratio() - 1e-15).abs() < 1e-20);
        let r = relative_residual(c(1.0, 0.0), c(2.0, 0.0), 0.0, &ctx).unwrap();
        assert!(!r.pass);
        assert_eq!(r.residual, 1.0);
    }

    #[test]
    fn residual_rejects_nan() {
        let ctx = EllipticContext::default();
        assert_eq!(
            relative_residual(c(f64::NAN, 0.0), c(1.0, 0.0), 0.0, &ctx),
            Err(Error::NonFiniteOperand)
        );
        assert_eq!(
            relative_residual(c(1.0, 0.0), c(f64::INFINITY, 0.0), 0.0, &ctx),
            Err(Error::NonFiniteOperand)
        );
    }

    #[test]
    fn context_validation() {
        assert!(EllipticContext::new(c(1.0, 0.0), c(0.3, 0.0)).is_err());
        assert!(EllipticContext::new(c(0.0, 0.0), c(0.3, 0.0)).is_err());
        assert!(EllipticContext::new(c(0.3, 0.0), c(0.0, 1.2)).is_err());
        let ctx = EllipticContext::new(c(0.3, 0.0), c(0.2, 0.1)).unwrap();
        assert!(ctx.with_tol(-1.0).validate().is_err());
        assert!(ctx.with_eps_trunc(0.0).validate().is_err());
    }

    #[test]
    fn ndpq_probe_flags_resonance() {
        let ctx = EllipticContext::new(c(0.09, 0.0), c(0.3, 0.0)).unwrap();
        let hits = ctx.ndpq_probe();
        assert!(hits.contains(&(2, 1)));
        assert!(hits.contains(&(-2, -1)));
        let generic = EllipticContext::default();
        assert!(generic.ndpq_probe().is_empty());
    }

    #[test]
    fn annulus_samples() {
        let ctx = EllipticContext::default().with_seed(11);
        let pts = sample_annulus(1.0, 1.0, 4, &[], &ctx).unwrap();
        assert_eq!(pts.len(), 4);
        for z in &pts {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(pts, sample_annulus(1.0, 1.0, 4, &[], &ctx).unwrap());
        let pts = sample_annulus(0.5, 2.0, 16, &[], &ctx).unwrap();
        assert!(pts.iter().all(|z| z.norm() >= 0.5 && z.norm() <= 2.0));
    }

    #[test]
    fn annulus_exclusions() {
        let ctx = EllipticContext::default().with_eps_trunc(1e-2);
        let rays = [c(1.0, 0.0), c(0.0, 1.0)];
        let pts = sample_annulus(0.5, 1.0, 200, &rays, &ctx).unwrap();
        for z in pts {
            for r in &rays {
                let d = (z.arg() - r.arg()).rem_euclid(2.0 * PI);
                assert!(d.min(2.0 * PI - d) >= 0.1);
            }
        }
        let wide = EllipticContext::default().with_eps_trunc(1.0);
        assert_eq!(
            sample_annulus(0.5, 1.0, 3, &rays, &wide),
            Err(Error::NoAdmissibleSample)
        );
    }

    #[test]
    fn trapezoid_examples() {
        let ctx = EllipticContext::default().with_tol(1e-14);
        let q = trapezoid_contour(|_| Ok(c(1.0, 0.0)), 1.0, 8, 4, &ctx).unwrap();
        assert_eq!(q.value, c(1.0, 0.0));
        for k in [-3i32, -1, 1, 2, 5] {
            let q = trapezoid_contour(|x| Ok(x.powi(k)), 1.0, 16, 4, &ctx).unwrap();
            assert!(q.value.norm() < 1e-14, "k={k}: {}", q.value);
        }
        // mean of x/(x-0.3) on the unit circle is the residue of 1/(x-0.3)
        let q = trapezoid_contour(|x| Ok(x / (x - 0.3)), 1.0, 8, 10, &ctx).unwrap();
        assert!((q.value - 1.0).norm() < 1e-12);
        let q = trapezoid_contour(|x| Ok(1.0 / (x - 0.3)), 1.0, 8, 10, &ctx).unwrap();
        assert!(q.value.norm() < 1e-12);
    }

    #[test]
    fn trapezoid_converges_geometrically() {
        let ctx = EllipticContext::default().with_tol(1e-15);
        let q = trapezoid_contour(|x| Ok(x / (x - 0.3)), 1.0, 8, 10, &ctx).unwrap();
        let d = &q.deltas;
        for w in d.windows(2) {
            if w[0] > 1e-13 {
                assert!(w[1] <= w[0] / 2.0, "{:?}", d);
            }
        }
    }

    #[test]
    fn trapezoid_stall() {
        let ctx = EllipticContext::default().with_tol(1e-15);
        let err = trapezoid_contour(|x| Ok(1.0 / (x - 0.999)), 1.0, 8, 2, &ctx).unwrap_err();
        assert!(matches!(err, Error::QuadratureStall { .. }));
        assert!(trapezoid_contour(|_| Ok(c(1.0, 0.0)), 1.0, 12, 2, &ctx).is_err());
    }

    #[test]
    fn residue_of_simple_pole() {
        let ctx = EllipticContext::default().with_tol(1e-13);
        let z0 = c(0.2, 0.4);
        let r = residue(|z| Ok(c(3.0, 1.0) / (z - z0) + z * z), z0, 0.05, &ctx).unwrap();
        assert!((r.value - c(3.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(c(1e16, 0.0));
        s.add(c(1.0, 1.0));
        s.add(c(-1e16, 0.0));
        assert_eq!(s.value(), c(1.0, 1.0));
        assert_eq!(s.max_term(), 1e16);
    }

    #[test]
    fn trials_get_distinct_seeds() {
        let ctx = EllipticContext::default().with_seed(7);
        let a = ctx.for_trial(0);
        let b = ctx.for_trial(1);
        assert_ne!(a.rng_seed, b.rng_seed);
        assert_eq!(a, ctx.for_trial(0));
        assert_eq!(a.p, ctx.p);
    }

    #[test]
    fn redraws_skip_degenerate_samples() {
        let ctx = EllipticContext::default();
        let mut calls = 0;
        let v = with_redraws(&ctx, 1, |s| {
            calls += 1;
            if calls < 3 {
                Err(Error::DenominatorZero(0))
            } else {
                Ok(s.real(0.0, 1.0))
            }
        })
        .unwrap();
        assert!((0.0..1.0).contains(&v));
        assert_eq!(calls, 3);
        let r: Result<()> = with_redraws(&ctx, 1, |_| Err(Error::EvaluationAtPole));
        assert_eq!(r, Err(Error::DegenerateDraw(MAX_REDRAWS)));
        let r: Result<()> = with_redraws(&ctx, 1, |_| Err(Error::NomeOutOfRange));
        assert_eq!(r, Err(Error::NomeOutOfRange));
    }

    #[test]
    fn worst_keeps_largest_ratio() {
        let a = CheckResult::from_parts(1e-12, 1.0, 1e-9);
        let b = CheckResult::from_parts(1e-6, 10.0, 1e-9);
        let w = a.clone().worst(b.clone());
        assert_eq!(w.residual, 1e-6);
        assert!(!w.pass);
        let w = CheckResult::worst_of(vec![a.clone(), a]);
        assert!(w.pass);
    }
}
