//! Elliptic biorthogonal rational functions and their discrete biorthogonality.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{relative_residual, CheckResult, CompensatedSum, EllipticContext, Sampler};
use crate::series::v_sum;
use crate::theta::theta;
use crate::toolkit::{cpow, efac_ratio, x_generator};
use crate::C64;

/// A parameter hexad with `ab = q^{-n}` and `abcdef = q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalFamily {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub e: C64,
    pub f: C64,
    pub n: usize,
    /// Generator pair `(a_X, b_X)` used to label the nodes by `X(aq^j)`.
    pub generator: (C64, C64),
    weights: Vec<C64>,
}

impl BiorthogonalFamily {
    /// Builds the family from `a, c, d, e`, solving `b = q^{-n}/a` and `f = q/(abcde)`.
    pub fn new(a: C64, c: C64, d: C64, e: C64, n: usize, ctx: &EllipticContext) -> Result<Self> {
        let q = ctx.q;
        let b = cpow(q, -(n as i64)) / a;
        let f = q / (a * b * c * d * e);
        let mut fam = BiorthogonalFamily {
            a,
            b,
            c,
            d,
            e,
            f,
            n,
            generator: (Complex::new(0.45, 0.2), Complex::new(-0.3, 0.55)),
            weights: Vec::new(),
        };
        fam.validate(ctx)?;
        fam.weights = (0..=n).map(|j| fam.weight(j, ctx)).collect::<Result<_>>()?;
        Ok(fam)
    }

    /// A seeded family; draws hitting a degeneracy come back as errors for the caller to redraw.
    pub fn draw(s: &mut Sampler, n: usize, ctx: &EllipticContext) -> Result<Self> {
        let v = s.params(4);
        let gen = (s.complex(0.3, 0.9), s.complex(0.3, 0.9));
        Ok(Self::new(v[0], v[1], v[2], v[3], n, ctx)?.with_generator(gen.0, gen.1))
    }

    pub fn with_generator(mut self, a_x: C64, b_x: C64) -> Self {
        self.generator = (a_x, b_x);
        self
    }

    pub fn params(&self) -> [C64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    /// Parameters with `e` and `f` exchanged.
    pub fn dual_params(&self) -> [C64; 6] {
        [self.a, self.b, self.c, self.d, self.f, self.e]
    }

    fn validate(&self, ctx: &EllipticContext) -> Result<()> {
        let q = ctx.q;
        let ab = self.a * self.b * cpow(q, self.n as i64);
        let all = self.a * self.b * self.c * self.d * self.e * self.f / q;
        let tol = 64.0 * ctx.eps_trunc;
        if (ab - 1.0).norm() > tol || (all - 1.0).norm() > tol {
            return Err(Error::InvalidArgument("family violates ab = q^-n or abcdef = q".into()));
        }
        Ok(())
    }

    fn weight(&self, j: usize, ctx: &EllipticContext) -> Result<C64> {
        let (p, q) = (ctx.p, ctx.q);
        let [a, b, c, d, e, f] = self.params();
        let a2 = a * a;
        let t0 = theta(a2, p, ctx)?;
        if t0 == Complex::new(0.0, 0.0) {
            return Err(Error::DenominatorZero(j));
        }
        let ratio = efac_ratio(
            &[a2, a * b, a * c, a * d, a * e, a * f],
            &[q, a * q / b, a * q / c, a * q / d, a * q / e, a * q / f],
            j,
            ctx,
        )?;
        Ok(theta(a2 * cpow(q, 2 * j as i64), p, ctx)? / t0 * ratio * cpow(q, j as i64))
    }

    /// Weights `w_0..w_n` of the discrete measure.
    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Nodes `x_j = aq^j`.
    pub fn nodes(&self, ctx: &EllipticContext) -> Vec<C64> {
        (0..=self.n).map(|j| self.a * cpow(ctx.q, j as i64)).collect()
    }

    /// Node labels `X(aq^j)` under the pinned generator.
    pub fn node_labels(&self, ctx: &EllipticContext) -> Result<Vec<C64>> {
        let (ga, gb) = self.generator;
        self.nodes(ctx)
            .into_iter()
            .map(|x| x_generator(x, ga, gb, ctx))
            .collect()
    }

    /// Closed-form norm `C_k = G_kk`.
    pub fn norm(&self, k: usize, ctx: &EllipticContext) -> Result<C64> {
        let (p, q) = (ctx.p, ctx.q);
        let [a, b, c, d, e, f] = self.params();
        let n = self.n;
        let ef = one_over(e * f);
        let outer = efac_ratio(
            &[a * a * q, q / (c * d), q / (c * e), q / (d * e)],
            &[a * q / c, a * q / d, a * q / e, q / (a * c * d * e)],
            n,
            ctx,
        )?;
        let den = theta(cpow(q, 2 * k as i64) * ef, p, ctx)?;
        if den == Complex::new(0.0, 0.0) {
            return Err(Error::DenominatorZero(k));
        }
        Ok(
            outer * efac_ratio(&[q, a * b, a * c, a * d, b * c, b * d, c * d], &[ef], k, ctx)? * theta(ef, p, ctx)?
                / den
                * cpow(q, -(k as i64)),
        )
    }
}

fn one_over(z: C64) -> C64 {
    Complex::new(1.0, 0.0) / z
}

/// `r_k(x; a,b,c,d,e,f)`, a rational function of `X(x)` built from a `₁₂V₁₁` sum.
pub fn r_fn(k: usize, x: C64, params: &[C64; 6], ctx: &EllipticContext) -> Result<C64> {
    Ok(r_fn_scaled(k, x, params, ctx)?.0)
}

/// `r_k(x)` with the modulus of its largest term.
pub fn r_fn_scaled(k: usize, x: C64, params: &[C64; 6], ctx: &EllipticContext) -> Result<(C64, f64)> {
    let q = ctx.q;
    let [a, b, c, d, e, f] = *params;
    let pre = efac_ratio(&[a * b, a * c, a * d, one_over(a * f)], &[a * q / e], k, ctx)?;
    let v = v_sum(
        a / e,
        &[
            a * x,
            a / x,
            q / (b * e),
            q / (c * e),
            q / (d * e),
            cpow(q, k as i64) / (e * f),
            cpow(q, -(k as i64)),
        ],
        k,
        ctx,
    )?;
    Ok((pre * v.value, pre.norm() * v.max_term))
}

/// Gram matrix together with the per-entry term scale.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: Vec<Vec<C64>>,
    pub scales: Vec<Vec<f64>>,
}

/// `G_kl = Σ_j w_j r_k(aq^j; a,b,c,d,e,f) r_l(aq^j; a,b,c,d,f,e)`.
pub fn gram_matrix(fam: &BiorthogonalFamily, ctx: &EllipticContext) -> Result<GramMatrix> {
    let n = fam.n;
    let nodes = fam.nodes(ctx);
    let (pr, du) = (fam.params(), fam.dual_params());
    let mut left = vec![vec![(Complex::new(0.0, 0.0), 0.0); n + 1]; n + 1];
    let mut right = left.clone();
    for k in 0..=n {
        for (j, &x) in nodes.iter().enumerate() {
            left[k][j] = r_fn_scaled(k, x, &pr, ctx)?;
            right[k][j] = r_fn_scaled(k, x, &du, ctx)?;
        }
    }
    let w = fam.weights();
    let mut entries = vec![vec![Complex::new(0.0, 0.0); n + 1]; n + 1];
    let mut scales = vec![vec![0f64; n + 1]; n + 1];
    for k in 0..=n {
        for l in 0..=n {
            let s: CompensatedSum = (0..=n).map(|j| w[j] * left[k][j].0 * right[l][j].0).collect();
            entries[k][l] = s.value();
            // largest term of the sum with both r-factors expanded
            scales[k][l] = (0..=n)
                .map(|j| w[j].norm() * left[k][j].1 * right[l][j].1)
                .fold(0.0, f64::max);
        }
    }
    Ok(GramMatrix { entries, scales })
}

/// `G_kl = δ_kl C_k`, worst residual over all entries.
pub fn biorthogonality_check(fam: &BiorthogonalFamily, ctx: &EllipticContext) -> Result<CheckResult> {
    let g = gram_matrix(fam, ctx)?;
    let mut out = Vec::new();
    for k in 0..=fam.n {
        let ck = fam.norm(k, ctx)?;
        for l in 0..=fam.n {
            let target = if k == l { ck } else { Complex::new(0.0, 0.0) };
            // off-diagonal scale also carries |C_k| so that zero targets stay cancellation-aware
            let scale = g.scales[k][l].max(ck.norm());
            out.push(relative_residual(g.entries[k][l], target, scale, ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// When `abcdef = q`, `r_k` is symmetric in `(a,b,c,d)`; checks the exchange `a ↔ b`.
pub fn symmetry_check(k: usize, x: C64, params: &[C64; 6], ctx: &EllipticContext) -> Result<CheckResult> {
    let [a, b, c, d, e, f] = *params;
    let (lhs, sl) = r_fn_scaled(k, x, params, ctx)?;
    let (rhs, sr) = r_fn_scaled(k, x, &[b, a, c, d, e, f], ctx)?;
    relative_residual(lhs, rhs, sl.max(sr), ctx)
}
