//! Terminating elliptic hypergeometric sums and their summation and
//! transformation formulas.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{cdiv, relative_residual, CheckResult, CompensatedSum, EllipticContext};
use crate::theta::{theta, theta_pm};
use crate::toolkit::{cpow, efac, efac_base, efac_multi, efac_pm, efac_ratio, efac_ratio_base};
use crate::C64;

fn one() -> C64 {
    Complex::new(1.0, 0.0)
}

fn zero() -> C64 {
    Complex::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `ₘ₊₁Eₘ` with free argument `z`.
    E,
    /// Very-well-poised `ₘ₊₁Vₘ`, argument fixed to `q`.
    V,
}

/// Parameters of a terminating `ₘ₊₁Eₘ` or `ₘ₊₁Vₘ` sum.
///
/// For `E`, `numerators` are `a₁..aₘ` (the terminating `q^{-n}` is implicit).
/// For `V`, `numerators` are `b₁..b_{m-4}` including the terminating `q^{-n}`,
/// `denominators` is unused and `a` is the special parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub a: C64,
    pub numerators: Vec<C64>,
    pub denominators: Vec<C64>,
    pub n: usize,
    pub z: C64,
    pub balanced: bool,
}

/// Value of a finite sum together with its largest term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: C64,
    pub max_term: f64,
}

impl SeriesSpec {
    pub fn e(numerators: Vec<C64>, denominators: Vec<C64>, n: usize, z: C64) -> Self {
        SeriesSpec {
            kind: SeriesKind::E,
            a: one(),
            numerators,
            denominators,
            n,
            z,
            balanced: false,
        }
    }

    pub fn v(a: C64, numerators: Vec<C64>, n: usize) -> Self {
        SeriesSpec {
            kind: SeriesKind::V,
            a,
            numerators,
            denominators: Vec::new(),
            n,
            z: one(),
            balanced: false,
        }
    }

    /// Marks the spec as balanced; `sum` then enforces the condition.
    pub fn balanced(mut self) -> Self {
        self.balanced = true;
        self
    }

    /// Relative violation of the balancing condition.
    pub fn balance_defect(&self, ctx: &EllipticContext) -> f64 {
        let q = ctx.q;
        let (l, r) = match self.kind {
            SeriesKind::E => {
                let l = cpow(q, -(self.n as i64)) * self.numerators.iter().product::<C64>();
                let r = q * self.denominators.iter().product::<C64>();
                (l, r)
            }
            SeriesKind::V => {
                let m = self.numerators.len() as i64;
                let l = self.numerators.iter().map(|b| b * b).product::<C64>();
                let r = cpow(q, m - 3) * cpow(self.a, m - 1);
                (l, r)
            }
        };
        (l - r).norm() / l.norm().max(r.norm())
    }

    pub fn sum(&self, ctx: &EllipticContext) -> Result<SeriesSum> {
        if self.balanced && self.balance_defect(ctx) > 64.0 * ctx.eps_trunc {
            return Err(Error::InvalidArgument("balancing condition violated".into()));
        }
        match self.kind {
            SeriesKind::E => e_sum(self, ctx),
            SeriesKind::V => v_sum(self.a, &self.numerators, self.n, ctx),
        }
    }
}

/// `(a;base,p)_k` as one factor of a hypergeometric term.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Fac {
    pub a: C64,
    pub base: C64,
}

pub(crate) fn fq(a: C64, ctx: &EllipticContext) -> Fac {
    Fac { a, base: ctx.q }
}

/// `z · 2^e` without overflowing the intermediate power of two.
fn ldexp(mut z: C64, mut e: i32) -> C64 {
    while e != 0 && z != zero() {
        let step = e.clamp(-1000, 1000);
        z *= 2f64.powi(step);
        e -= step;
    }
    z
}

/// `Σ_{k=0}^n w(k) · Π(nums)_k/Π(dens)_k · z^k` with incremental factorials.
pub(crate) fn factorial_sum<W>(
    nums: &[Fac],
    dens: &[Fac],
    z: C64,
    n: usize,
    mut weight: W,
    ctx: &EllipticContext,
) -> Result<SeriesSum>
where
    W: FnMut(usize) -> Result<C64>,
{
    let p = ctx.p;
    let mut ratio = one();
    let mut exp2 = 0i32;
    let mut zk = one();
    let mut sum = CompensatedSum::default();
    let mut npow: Vec<C64> = nums.iter().map(|f| f.a).collect();
    let mut dpow: Vec<C64> = dens.iter().map(|f| f.a).collect();
    for k in 0..=n {
        if k > 0 {
            // one numerator and one denominator theta at a time
            let mut step = one();
            let (mut num_zero, mut den_zero) = (false, false);
            for m in 0..npow.len().max(dpow.len()) {
                if let (Some(x), Some(f)) = (npow.get_mut(m), nums.get(m)) {
                    let t = theta(*x, p, ctx)?;
                    num_zero |= t == zero();
                    step *= t;
                    *x *= f.base;
                }
                if let (Some(x), Some(f)) = (dpow.get_mut(m), dens.get(m)) {
                    let t = theta(*x, p, ctx)?;
                    if t == zero() {
                        den_zero = true;
                    } else {
                        step = cdiv(step, t);
                    }
                    *x *= f.base;
                }
            }
            if den_zero {
                return Err(Error::DenominatorZero(k));
            }
            if num_zero {
                break;
            }
            ratio *= step;
            zk *= z;
            // keep the running ratio near unit modulus; weights can be large
            // enough that the bare ratio would underflow before the product does
            let m = ratio.norm();
            if m.is_finite() && m > 0.0 {
                let e = m.log2().round() as i32;
                ratio /= 2f64.powi(e);
                exp2 += e;
            }
        }
        let t = weight(k)? * ratio * zk;
        sum.add(ldexp(t, exp2));
    }
    Ok(SeriesSum {
        value: sum.value(),
        max_term: sum.max_term(),
    })
}

/// `Σ_{k=0}^n (q^{-n},a₁,…;q,p)_k / (q,b₁,…;q,p)_k z^k`.
pub fn e_sum(spec: &SeriesSpec, ctx: &EllipticContext) -> Result<SeriesSum> {
    if spec.kind != SeriesKind::E || spec.numerators.len() != spec.denominators.len() {
        return Err(Error::InvalidArgument(
            "E-series needs matching numerator and denominator lists".into(),
        ));
    }
    let q = ctx.q;
    let mut nums = vec![fq(cpow(q, -(spec.n as i64)), ctx)];
    nums.extend(spec.numerators.iter().map(|&a| fq(a, ctx)));
    let mut dens = vec![fq(q, ctx)];
    dens.extend(spec.denominators.iter().map(|&b| fq(b, ctx)));
    factorial_sum(&nums, &dens, spec.z, spec.n, |_| Ok(one()), ctx)
}

/// `ₘ₊₁Vₘ(a; b₁,…;q,p)` summed over `k = 0..=n`; the list should contain the
/// terminating parameter `q^{-n}`.
pub fn v_sum(a: C64, b: &[C64], n: usize, ctx: &EllipticContext) -> Result<SeriesSum> {
    let (p, q) = (ctx.p, ctx.q);
    let ta = theta(a, p, ctx)?;
    if ta == zero() {
        return Err(Error::DenominatorZero(0));
    }
    let mut nums = vec![fq(a, ctx)];
    nums.extend(b.iter().map(|&x| fq(x, ctx)));
    let mut dens = vec![fq(q, ctx)];
    for &x in b {
        if x == zero() {
            return Err(Error::ThetaArgumentZero);
        }
        dens.push(fq(a * q / x, ctx));
    }
    let q2 = q * q;
    let mut aq2k = a;
    factorial_sum(
        &nums,
        &dens,
        q,
        n,
        |k| {
            if k > 0 {
                aq2k *= q2;
            }
            Ok(theta(aq2k, p, ctx)? / ta)
        },
        ctx,
    )
}

/// Reversal of a balanced `E` sum: compares it with the reversed-order series.
pub fn e_reversal_check(spec: &SeriesSpec, ctx: &EllipticContext) -> Result<CheckResult> {
    let q = ctx.q;
    let n = spec.n as i64;
    let lhs = e_sum(spec, ctx)?;
    let fac = efac_ratio(&spec.numerators, &spec.denominators, spec.n, ctx)?;
    let rev = SeriesSpec::e(
        spec.denominators.iter().map(|b| cpow(q, 1 - n) / b).collect(),
        spec.numerators.iter().map(|a| cpow(q, 1 - n) / a).collect(),
        spec.n,
        one() / spec.z,
    );
    let r = e_sum(&rev, ctx)?;
    let pre = cpow(-spec.z, n) / cpow(q, n * (n + 1) / 2) * fac;
    relative_residual(
        lhs.value,
        pre * r.value,
        lhs.max_term.max((pre * r.max_term).norm()),
        ctx,
    )
}

/// Frenkel–Turaev: balanced `₁₀V₉(a;b,c,d,e,q^{-n})` with `e = a²q^{n+1}/(bcd)`.
pub fn frenkel_turaev(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let q = ctx.q;
    let ni = n as i64;
    let e = a * a * cpow(q, ni + 1) / (b * c * d);
    let lhs = v_sum(a, &[b, c, d, e, cpow(q, -ni)], n, ctx)?;
    let aq = a * q;
    let rhs = efac_ratio(
        &[aq, aq / (b * c), aq / (b * d), aq / (c * d)],
        &[aq / b, aq / c, aq / d, aq / (b * c * d)],
        n,
        ctx,
    )?;
    Ok(relative_residual(lhs.value, rhs, lhs.max_term, ctx)?.with_witness(vec![
        ("a".into(), a),
        ("b".into(), b),
        ("c".into(), c),
        ("d".into(), d),
        ("n".into(), Complex::new(n as f64, 0.0)),
    ]))
}

/// Classical `(x;q)_n`.
pub fn classical_qpoch(x: C64, q: C64, n: usize) -> C64 {
    let mut prod = one();
    let mut xq = x;
    for _ in 0..n {
        prod *= one() - xq;
        xq *= q;
    }
    prod
}

/// A nome small enough that [`saalschutz_limit`] at length `n` differs from its
/// classical limit by less than double rounding: the leading correction is of
/// size `√p |q|^{-2n-2}`.
pub fn saalschutz_nome(n: usize, ctx: &EllipticContext) -> f64 {
    let sp = 1e-17 * ctx.q.norm().powi(2 * n as i32 + 2);
    sp * sp
}

/// The `p → 0` limit of Frenkel–Turaev with `a, d, e` scaled by `√p`: the
/// elliptic sum at nome `p_small` against the classical q-Saalschütz value
/// `(C/A, C/B;q)_n/(C, C/AB;q)_n`, `A = b`, `B = c`, `C = aq/d`.
pub fn saalschutz_limit(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    p_small: f64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let lctx = ctx.with_pq(Complex::new(p_small, 0.0), ctx.q)?;
    let q = ctx.q;
    let ni = n as i64;
    let sp = p_small.sqrt();
    let (as_, ds) = (a * sp, d * sp);
    let e = as_ * as_ * cpow(q, ni + 1) / (b * c * ds);
    let lhs = v_sum(as_, &[b, c, ds, e, cpow(q, -ni)], n, &lctx)?;
    let (big_a, big_b, big_c) = (b, c, a * q / d);
    let rhs = classical_qpoch(big_c / big_a, q, n) * classical_qpoch(big_c / big_b, q, n)
        / (classical_qpoch(big_c, q, n) * classical_qpoch(big_c / (big_a * big_b), q, n));
    relative_residual(lhs.value, rhs, lhs.max_term, ctx)
}

/// `h_n(x;a) = (ax^±;q,p)_n`.
pub fn h_fn(x: C64, a: C64, n: usize, ctx: &EllipticContext) -> Result<C64> {
    efac_pm(a, x, n, ctx)
}

/// The elliptic binomial coefficient `C_k^n(a,b,c)`.
pub fn elliptic_binomial(n: usize, k: usize, a: C64, b: C64, c: C64, ctx: &EllipticContext) -> Result<C64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} > n={n}")));
    }
    let (p, q) = (ctx.p, ctx.q);
    let (ni, ki) = (n as i64, k as i64);
    let num = cpow(q, ni - ki)
        * theta(cpow(q, 2 * ki - ni) * b / c, p, ctx)?
        * efac_multi(&[q, a * b, a * c], n, ctx)?
        * efac(a / c, k, ctx)?
        * efac(a / b, n - k, ctx)?;
    let den = theta(b / c, p, ctx)?
        * efac(b * c, n, ctx)?
        * efac_multi(&[q, a * b, q * b / c], k, ctx)?
        * efac_multi(&[q, a * c, q * c / b], n - k, ctx)?;
    if den == zero() {
        return Err(Error::DenominatorZero(k));
    }
    Ok(num / den)
}

/// `h_n(x;a) = Σ_k C_k^n h_k(x;b) h_{n-k}(x;c)` at one point.
pub fn binomial_expansion_check(
    n: usize,
    a: C64,
    b: C64,
    c: C64,
    x: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let lhs = h_fn(x, a, n, ctx)?;
    let mut sum = CompensatedSum::default();
    for k in 0..=n {
        sum.add(elliptic_binomial(n, k, a, b, c, ctx)? * h_fn(x, b, k, ctx)? * h_fn(x, c, n - k, ctx)?);
    }
    relative_residual(lhs, sum.value(), sum.max_term(), ctx)
}

/// The Pascal-type recursion expressing `C_k^{n+1}` through `C_{k-1}^n`, `C_k^n`.
pub fn pascal_recursion_check(
    n: usize,
    k: usize,
    a: C64,
    b: C64,
    c: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    if k > n + 1 {
        return Err(Error::InvalidArgument(format!("k={k} > n+1")));
    }
    let (p, q) = (ctx.p, ctx.q);
    let (ni, ki) = (n as i64, k as i64);
    let lhs = elliptic_binomial(n + 1, k, a, b, c, ctx)?;
    let prev = if k >= 1 {
        elliptic_binomial(n, k - 1, a, b, c, ctx)?
    } else {
        zero()
    };
    let same = if k <= n {
        elliptic_binomial(n, k, a, b, c, ctx)?
    } else {
        zero()
    };
    let bcq = b * c * cpow(q, ni);
    let t1 = theta(a * c * cpow(q, 2 * ni - ki + 1), p, ctx)? * theta(a * cpow(q, ki - 1) / c, p, ctx)?
        / (theta(bcq, p, ctx)? * theta(b * cpow(q, 2 * ki - 2 - ni) / c, p, ctx)?)
        * prev;
    let t2 =
        b * cpow(q, 2 * ki - ni) * theta(a * b * cpow(q, ni + ki), p, ctx)? * theta(a * cpow(q, ni - ki) / b, p, ctx)?
            / (c * theta(bcq, p, ctx)? * theta(b * cpow(q, 2 * ki - ni) / c, p, ctx)?)
            * same;
    relative_residual(lhs, t1 - t2, t1.norm().max(t2.norm()), ctx)
}

/// `R_k^l(a,b,c,d;n)` from its closed `₁₂V₁₁` form.
pub fn rkl_coefficient(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    k: usize,
    l: usize,
    ctx: &EllipticContext,
) -> Result<C64> {
    Ok(rkl_coefficient_scaled(a, b, c, d, n, k, l, ctx)?.0)
}

/// [`rkl_coefficient`] with the modulus of the largest term of its sum.
pub fn rkl_coefficient_scaled(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    k: usize,
    l: usize,
    ctx: &EllipticContext,
) -> Result<(C64, f64)> {
    if k > n || l > n {
        return Err(Error::InvalidArgument(format!("k={k}, l={l} must be <= n={n}")));
    }
    let q = ctx.q;
    let (ni, ki, li) = (n as i64, k as i64, l as i64);
    let qp = |e: i64| cpow(q, e);
    let num = qp(li * (li - ni))
        * efac(q, n, ctx)?
        * efac_multi(&[a * c, a / c], k, ctx)?
        * efac_multi(&[qp(ni - li) * b * d, b / d], l, ctx)?
        * efac_multi(&[b * c, b / c], n - k, ctx)?
        * efac(b / c, n - l, ctx)?;
    let den = efac_multi(&[c * d, b / c], n, ctx)?
        * efac_multi(&[q, b * c, qp(li - ni) * c / d], l, ctx)?
        * efac_multi(&[q, qp(-li) * d / c], n - l, ctx)?;
    if den == zero() {
        return Err(Error::DenominatorZero(l));
    }
    let v = v_sum(
        qp(-ni) * c / b,
        &[
            qp(-ki),
            qp(-li),
            qp(ki - ni) * a / b,
            qp(li - ni) * c / d,
            c * d,
            qp(1 - ni) / (a * b),
            q * c / b,
        ],
        k.min(l),
        ctx,
    )?;
    let pre = num / den;
    Ok((pre * v.value, pre.norm() * v.max_term))
}

/// `R_k^l` as the composition `Σ_j C_j^k(a,c,bq^{n-k}) C_{l-j}^{n-j}(b,cq^j,d)`.
pub fn rkl_double_sum(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    k: usize,
    l: usize,
    ctx: &EllipticContext,
) -> Result<C64> {
    Ok(rkl_double_sum_scaled(a, b, c, d, n, k, l, ctx)?.0)
}

/// [`rkl_double_sum`] with the modulus of its largest term.
pub fn rkl_double_sum_scaled(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    k: usize,
    l: usize,
    ctx: &EllipticContext,
) -> Result<(C64, f64)> {
    let q = ctx.q;
    let mut sum = CompensatedSum::default();
    for j in 0..=k.min(l) {
        sum.add(
            elliptic_binomial(k, j, a, c, b * cpow(q, (n - k) as i64), ctx)?
                * elliptic_binomial(n - j, l - j, b, c * cpow(q, j as i64), d, ctx)?,
        );
    }
    Ok((sum.value(), sum.max_term()))
}

/// All `(n+1)²` coefficients `R_k^l(a,b,c,d;n)`, indexed `[k][l]`.
pub fn rkl_matrix(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<Vec<Vec<C64>>> {
    (0..=n)
        .map(|k| (0..=n).map(|l| rkl_coefficient(a, b, c, d, n, k, l, ctx)).collect())
        .collect()
}

/// `h_k(x;a)h_{n-k}(x;b) = Σ_l R_k^l h_l(x;c)h_{n-l}(x;d)` at one point.
pub fn connection_check(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    n: usize,
    k: usize,
    x: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let lhs = h_fn(x, a, k, ctx)? * h_fn(x, b, n - k, ctx)?;
    let mut sum = CompensatedSum::default();
    let mut scale = 0f64;
    for l in 0..=n {
        let (r, rs) = rkl_coefficient_scaled(a, b, c, d, n, k, l, ctx)?;
        let h = h_fn(x, c, l, ctx)? * h_fn(x, d, n - l, ctx)?;
        sum.add(r * h);
        scale = scale.max(rs * h.norm());
    }
    relative_residual(lhs, sum.value(), scale.max(sum.max_term()), ctx)
}

/// `R_k^l(a,b,c,d;n) = R_{n-k}^l(b,a,c,d;n)`, worst over all `k, l`.
pub fn rkl_symmetry_check(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    for k in 0..=n {
        for l in 0..=n {
            let (x, sx) = rkl_coefficient_scaled(a, b, c, d, n, k, l, ctx)?;
            let (y, sy) = rkl_coefficient_scaled(b, a, c, d, n, n - k, l, ctx)?;
            out.push(relative_residual(x, y, sx.max(sy), ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// `(n+1)²` coefficients with their term scales.
type ScaledMatrix = (Vec<Vec<C64>>, Vec<Vec<f64>>);

fn rkl_matrix_scaled(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<ScaledMatrix> {
    let mut vals = vec![vec![zero(); n + 1]; n + 1];
    let mut scales = vec![vec![0f64; n + 1]; n + 1];
    for k in 0..=n {
        for l in 0..=n {
            let (v, s) = rkl_coefficient_scaled(a, b, c, d, n, k, l, ctx)?;
            vals[k][l] = v;
            scales[k][l] = s;
        }
    }
    Ok((vals, scales))
}

/// Product of two scaled matrices; each entry's scale is the largest term
/// `|x_ik| |y_kj|` measured with the factors' own term scales.
fn matmul(x: &ScaledMatrix, y: &ScaledMatrix) -> ScaledMatrix {
    let n = x.0.len();
    let mut out = vec![vec![zero(); n]; n];
    let mut scale = vec![vec![0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = CompensatedSum::default();
            let mut m = 0f64;
            for k in 0..n {
                s.add(x.0[i][k] * y.0[k][j]);
                m = m.max(x.1[i][k].max(x.0[i][k].norm()) * y.1[k][j].max(y.0[k][j].norm()));
            }
            out[i][j] = s.value();
            scale[i][j] = m.max(s.max_term());
        }
    }
    (out, scale)
}

fn identity_residual(m: &[Vec<C64>], scale: &[Vec<f64>], ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { one() } else { zero() };
            out.push(relative_residual(*v, target, scale[i][j], ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// `Σ_j R_k^j(a,b,c,d;n) R_j^l(c,d,a,b;n) = δ_{kl}`.
pub fn rkl_unitarity_check(a: C64, b: C64, c: C64, d: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let x = rkl_matrix_scaled(a, b, c, d, n, ctx)?;
    let y = rkl_matrix_scaled(c, d, a, b, n, ctx)?;
    let (m, s) = matmul(&x, &y);
    identity_residual(&m, &s, ctx)
}

/// Addition formula `R_k^l(a,b,e,f) = Σ_j R_k^j(a,b,c,d) R_j^l(c,d,e,f)`.
pub fn rkl_addition_check(pars: [C64; 6], n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let [a, b, c, d, e, f] = pars;
    let x = rkl_matrix_scaled(a, b, c, d, n, ctx)?;
    let y = rkl_matrix_scaled(c, d, e, f, n, ctx)?;
    let z = rkl_matrix_scaled(a, b, e, f, n, ctx)?;
    let (m, s) = matmul(&x, &y);
    let mut out = Vec::new();
    for k in 0..=n {
        for l in 0..=n {
            out.push(relative_residual(z.0[k][l], m[k][l], s[k][l].max(z.1[k][l]), ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// Convolution formula splitting `n = n₁ + n₂` with shift pattern `(α, β)`.
pub fn rkl_convolution_check(
    pars: [C64; 4],
    n1: usize,
    n2: usize,
    alpha: bool,
    beta: bool,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let [a, b, c, d] = pars;
    let q = ctx.q;
    let qp = |e: usize| cpow(q, e as i64);
    let (al, be) = (alpha as usize, beta as usize);
    let mut out = Vec::new();
    for k1 in 0..=n1 {
        for k2 in 0..=n2 {
            for l in 0..=n1 + n2 {
                let (lhs, ls) = rkl_coefficient_scaled(a, b, c, d, n1 + n2, k1 + k2, l, ctx)?;
                let mut sum = CompensatedSum::default();
                let mut scale = ls;
                for l1 in l.saturating_sub(n2)..=l.min(n1) {
                    let l2 = l - l1;
                    let (r1, s1) =
                        rkl_coefficient_scaled(a * qp(al * k2), b * qp(be * (n2 - k2)), c, d, n1, k1, l1, ctx)?;
                    let (r2, s2) = rkl_coefficient_scaled(
                        a * qp((1 - al) * k1),
                        b * qp((1 - be) * (n1 - k1)),
                        c * qp(l1),
                        d * qp(n1 - l1),
                        n2,
                        k2,
                        l2,
                        ctx,
                    )?;
                    sum.add(r1 * r2);
                    scale = scale.max(s1.max(r1.norm()) * s2.max(r2.norm()));
                }
                out.push(relative_residual(lhs, sum.value(), scale.max(sum.max_term()), ctx)?);
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// The addition formula at `n = 3` and all four convolution variants at
/// `n₁ = n₂ = 2`, for the given six parameters.
pub fn rkl_addition_convolution_suite(pars: [C64; 6], ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = vec![rkl_addition_check(pars, 3, ctx)?];
    let four = [pars[0], pars[1], pars[2], pars[3]];
    for (alpha, beta) in [(false, false), (false, true), (true, false), (true, true)] {
        out.push(rkl_convolution_check(four, 2, 2, alpha, beta, ctx)?);
    }
    Ok(CheckResult::worst_of(out))
}

/// Elliptic Bailey transformation with `g = q^{n+2}a³/(bcdef)`, `λ = a²q/(bcd)`.
pub fn bailey_transform(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    e: C64,
    f: C64,
    n: usize,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let q = ctx.q;
    let ni = n as i64;
    let g = cpow(q, ni + 2) * a * a * a / (b * c * d * e * f);
    let lam = a * a * q / (b * c * d);
    let qn = cpow(q, -ni);
    let lhs = v_sum(a, &[b, c, d, e, f, g, qn], n, ctx)?;
    let pre = efac_ratio(
        &[a * q, a * q / (e * f), lam * q / e, lam * q / f],
        &[a * q / e, a * q / f, lam * q, lam * q / (e * f)],
        n,
        ctx,
    )?;
    let r = v_sum(lam, &[lam * b / a, lam * c / a, lam * d / a, e, f, g, qn], n, ctx)?;
    let scale = lhs.max_term.max(pre.norm() * r.max_term);
    relative_residual(lhs.value, pre * r.value, scale, ctx)
}

/// The twice-iterated Bailey transformation (same constraint on `g`).
pub fn bailey_iterated(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    e: C64,
    f: C64,
    n: usize,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let q = ctx.q;
    let ni = n as i64;
    let g = cpow(q, ni + 2) * a * a * a / (b * c * d * e * f);
    let qn = cpow(q, -ni);
    let aq = a * q;
    let lhs = v_sum(a, &[b, c, d, e, f, g, qn], n, ctx)?;
    let pre = cpow(g, ni)
        * efac_ratio(
            &[aq, b, aq / (c * g), aq / (d * g), aq / (e * g), aq / (f * g)],
            &[aq / c, aq / d, aq / e, aq / f, aq / g, b / g],
            n,
            ctx,
        )?;
    let r = v_sum(
        qn * g / b,
        &[
            qn * g / a,
            aq / (b * c),
            aq / (b * d),
            aq / (b * e),
            aq / (b * f),
            g,
            qn,
        ],
        n,
        ctx,
    )?;
    let scale = lhs.max_term.max(pre.norm() * r.max_term);
    relative_residual(lhs.value, pre * r.value, scale, ctx)
}

fn indefinite_partial(a: C64, e: C64, f: C64, g: C64, n: usize, ctx: &EllipticContext) -> Result<SeriesSum> {
    let (p, q) = (ctx.p, ctx.q);
    let h = a * a / (e * f * g);
    let nums: Vec<Fac> = [e, f, g, h].iter().map(|&x| fq(x, ctx)).collect();
    let dens: Vec<Fac> = [e, f, g, h].iter().map(|&x| fq(a * q / x, ctx)).collect();
    let ta = theta(a, p, ctx)?;
    factorial_sum(
        &nums,
        &dens,
        q,
        n,
        |k| Ok(theta(a * cpow(q, 2 * k as i64), p, ctx)? / ta),
        ctx,
    )
}

fn indefinite_closed(a: C64, e: C64, f: C64, g: C64, n: usize, ctx: &EllipticContext) -> Result<C64> {
    let p = ctx.p;
    let h = a * a / (e * f * g);
    let pre = theta(a / e, p, ctx)? * theta(a / f, p, ctx)? * theta(a / g, p, ctx)? * theta(a / (e * f * g), p, ctx)?
        / (theta(a, p, ctx)? * theta(a / (e * f), p, ctx)? * theta(a / (e * g), p, ctx)? * theta(a / (f * g), p, ctx)?);
    Ok(pre * (one() - efac_ratio(&[e, f, g, h], &[a / e, a / f, a / g, a / h], n + 1, ctx)?))
}

/// Indefinite well-poised sum `Σ_{k≤n} θ(aq^{2k})/θ(a) (e,f,g,h)_k/(aq/e,aq/f,aq/g,aq/h)_k q^k`
/// with `h = a²/(efg)` against its closed form.
pub fn indefinite_sum_check(a: C64, e: C64, f: C64, g: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let lhs = indefinite_partial(a, e, f, g, n, ctx)?;
    let rhs = indefinite_closed(a, e, f, g, n, ctx)?;
    relative_residual(lhs.value, rhs, lhs.max_term, ctx)
}

/// Induction step: the closed form at `n+1` minus the closed form at `n` is term `n+1`.
pub fn indefinite_step_check(a: C64, e: C64, f: C64, g: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let (p, q) = (ctx.p, ctx.q);
    let r0 = indefinite_closed(a, e, f, g, n, ctx)?;
    let r1 = indefinite_closed(a, e, f, g, n + 1, ctx)?;
    let h = a * a / (e * f * g);
    let k = n + 1;
    let term = theta(a * cpow(q, 2 * k as i64), p, ctx)? / theta(a, p, ctx)?
        * efac_ratio(&[e, f, g, h], &[a * q / e, a * q / f, a * q / g, a * q / h], k, ctx)?
        * cpow(q, k as i64);
    relative_residual(r1 - r0, term, r0.norm().max(r1.norm()), ctx)
}

/// Four-sequence theta telescoping identity.
pub fn telescoping_theta(a: &[C64], b: &[C64], c: &[C64], d: &[C64], ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = a.len();
    if b.len() != n || c.len() != n || d.len() != n || n == 0 {
        return Err(Error::InvalidArgument("sequences must share a nonzero length".into()));
    }
    let big = |j: usize| -> Result<C64> { Ok(theta_pm(a[j], d[j], p, ctx)? * theta_pm(b[j], c[j], p, ctx)?) };
    let small = |j: usize| -> Result<C64> { Ok(theta_pm(b[j], d[j], p, ctx)? * theta_pm(a[j], c[j], p, ctx)?) };
    let bigs = (0..n).map(big).collect::<Result<Vec<_>>>()?;
    let smalls = (0..n).map(small).collect::<Result<Vec<_>>>()?;
    let mut sum = CompensatedSum::default();
    for k in 0..n {
        let mut t = a[k] / c[k] * theta_pm(c[k], d[k], p, ctx)? * theta_pm(b[k], a[k], p, ctx)?;
        for v in &bigs[..k] {
            t *= v;
        }
        for v in &smalls[k + 1..] {
            t *= v;
        }
        sum.add(t);
    }
    let l: C64 = bigs.iter().product();
    let r: C64 = smalls.iter().product();
    relative_residual(sum.value(), l - r, sum.max_term().max(l.norm()).max(r.norm()), ctx)
}

fn bibasic_weight(c: C64, d: C64, q: C64, r: C64, k: usize, ctx: &EllipticContext) -> Result<C64> {
    let p = ctx.p;
    let (qk, rk) = (cpow(q, k as i64), cpow(r, k as i64));
    Ok(theta(c * d * qk * rk, p, ctx)? * theta(d * rk / (c * qk), p, ctx)?
        / (theta(c * d, p, ctx)? * theta(d / c, p, ctx)?))
}

fn fac_pm(x: C64, y: C64, base: C64, k: usize, ctx: &EllipticContext) -> Result<C64> {
    Ok(efac_base(x * y, base, k, ctx.p, ctx)? * efac_base(x / y, base, k, ctx.p, ctx)?)
}

/// The bibasic sum in bases `q` and `r` (nome from the context).
pub fn bibasic_check(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    q: C64,
    r: C64,
    n: usize,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let p = ctx.p;
    let mut sum = CompensatedSum::default();
    for k in 0..=n {
        let t = bibasic_weight(c, d, q, r, k, ctx)? * fac_pm(d, a, r, k, ctx)? * fac_pm(c, b, q, k, ctx)?
            / (fac_pm(r * d, b, r, k, ctx)? * fac_pm(q * c, a, q, k, ctx)?)
            * cpow(q, k as i64);
        sum.add(t);
    }
    let pre = theta_pm(a, c, p, ctx)? * theta_pm(d, b, p, ctx)? / (theta_pm(a, b, p, ctx)? * theta_pm(d, c, p, ctx)?);
    let tail = fac_pm(c, b, q, n + 1, ctx)? * fac_pm(d, a, r, n + 1, ctx)?
        / (fac_pm(c, a, q, n + 1, ctx)? * fac_pm(d, b, r, n + 1, ctx)?);
    let rhs = pre * (one() - tail);
    relative_residual(sum.value(), rhs, sum.max_term().max(pre.norm()), ctx)
}

/// The bibasic Kronecker-delta sum; returns `(value, max term)`.
pub fn kronecker_sum(c: C64, d: C64, q: C64, r: C64, n: usize, ctx: &EllipticContext) -> Result<SeriesSum> {
    let p = ctx.p;
    let (rn, ni) = (cpow(r, n as i64), n as i64);
    let mut sum = CompensatedSum::default();
    for k in 0..=n {
        let t = bibasic_weight(c, d, q, r, k, ctx)?
            * efac_ratio_base(&[cpow(r, -ni), rn * d * d], &[r, r * d * d], r, k, p, ctx)?
            * fac_pm(c, d, q, k, ctx)?
            * efac_ratio_base(&[], &[q * rn * c * d, q * c / (rn * d)], q, k, p, ctx)?
            * cpow(q, k as i64);
        sum.add(t);
    }
    Ok(SeriesSum {
        value: sum.value(),
        max_term: sum.max_term(),
    })
}

/// The Kronecker-delta sum against `δ_{n0}`.
pub fn kronecker_check(c: C64, d: C64, q: C64, r: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let s = kronecker_sum(c, d, q, r, n, ctx)?;
    let target = if n == 0 { one() } else { zero() };
    relative_residual(s.value, target, s.max_term, ctx)
}

/// Warnaar's quadratic sum with `d = a²q^{2n+1}/c`; returns `(lhs, rhs, scale)`.
pub fn warnaar_sides(a: C64, b: C64, c: C64, n: usize, ctx: &EllipticContext) -> Result<(C64, C64, f64)> {
    let q = ctx.q;
    let q2 = q * q;
    let ni = n as i64;
    let d = a * a * cpow(q, 2 * ni + 1) / c;
    let f2 = |x: C64| Fac { a: x, base: q2 };
    let nums = [
        fq(a, ctx),
        fq(b, ctx),
        fq(q / b, ctx),
        f2(c),
        f2(d),
        f2(cpow(q, -2 * ni)),
    ];
    let dens = [
        f2(q2),
        f2(a * q2 / b),
        f2(a * b * q),
        fq(a * q / c, ctx),
        fq(a * q / d, ctx),
        fq(a * cpow(q, 1 + 2 * ni), ctx),
    ];
    let ta = theta(a, ctx.p, ctx)?;
    let q3 = q * q * q;
    let lhs = factorial_sum(
        &nums,
        &dens,
        q,
        n,
        |k| Ok(theta(a * cpow(q3, k as i64), ctx.p, ctx)? / ta),
        ctx,
    )?;
    let p = ctx.p;
    let rhs = efac_ratio(&[a * q], &[a * q / c], 2 * n, ctx)?
        * efac_ratio_base(
            &[a * b * q / c, a * q2 / (b * c)],
            &[a * b * q, a * q2 / b],
            q2,
            n,
            p,
            ctx,
        )?;
    Ok((lhs.value, rhs, lhs.max_term))
}

/// Warnaar's quadratic summation.
pub fn warnaar_quadratic(a: C64, b: C64, c: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let (l, r, s) = warnaar_sides(a, b, c, n, ctx)?;
    relative_residual(l, r, s, ctx)
}

/// The quadratic sum's left side is unchanged by `b ↦ q/b`.
pub fn warnaar_b_symmetry(a: C64, b: C64, c: C64, n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let (l1, _, s1) = warnaar_sides(a, b, c, n, ctx)?;
    let (l2, _, s2) = warnaar_sides(a, ctx.q / b, c, n, ctx)?;
    relative_residual(l1, l2, s1.max(s2), ctx)
}

/// Minton's sum: `V(a; b, a/b, q^{-n}, c_l q^{m_l}, aq/c_l)` with `n = Σ m_l`
/// against its product evaluation.
pub fn minton_sum(a: C64, b: C64, c: &[C64], m: &[usize], ctx: &EllipticContext) -> Result<CheckResult> {
    let s = minton_lhs(a, b, c, m, ctx)?;
    let q = ctx.q;
    let n: usize = m.iter().sum();
    let mut rhs = efac_ratio(&[q, a * q], &[a * q / b, b * q], n, ctx)?;
    for (&cl, &ml) in c.iter().zip(m) {
        rhs *= efac_ratio(&[cl / b, b * cl / a], &[cl, cl / a], ml, ctx)?;
    }
    relative_residual(s.value, rhs, s.max_term, ctx)
}

/// The very-well-poised side of Minton's sum.
pub fn minton_lhs(a: C64, b: C64, c: &[C64], m: &[usize], ctx: &EllipticContext) -> Result<SeriesSum> {
    if c.len() != m.len() || c.is_empty() {
        return Err(Error::InvalidArgument(
            "c and m lists must match and be nonempty".into(),
        ));
    }
    let q = ctx.q;
    let n: usize = m.iter().sum();
    let mut params = vec![b, a / b, cpow(q, -(n as i64))];
    for (&cl, &ml) in c.iter().zip(m) {
        params.push(cl * cpow(q, ml as i64));
    }
    for &cl in c {
        params.push(a * q / cl);
    }
    v_sum(a, &params, n, ctx)
}

/// The classical shadow of Minton's sum: the elliptic side evaluated at
/// nome `p_small`, `a = a_small`, `q = e^{-h}`, `b = q^β`, `c_l = q^{γ_l}`.
/// As `p_small, a_small, h → 0` this tends to `r+2F_{r+1}(-n, β, γ+m; β+1, γ; 1)`.
pub fn minton_q_shadow(beta: f64, gamma: &[f64], m: &[usize], h: f64, ctx: &EllipticContext) -> Result<C64> {
    let q = Complex::new((-h).exp(), 0.0);
    let lctx = ctx.with_pq(Complex::new(1e-24, 0.0), q)?;
    let a = Complex::new(1e-8, 0.0);
    let qpow = |x: f64| Complex::new((-h * x).exp(), 0.0);
    let c: Vec<C64> = gamma.iter().map(|&g| qpow(g)).collect();
    Ok(minton_lhs(a, qpow(beta), &c, m, &lctx)?.value)
}

/// A single term of the well-poised sum `Π_j (x₀x_j)_k/(x₀/x_j)_k z^k`.
pub fn well_poised_term(x: &[C64], k: usize, z: C64, ctx: &EllipticContext) -> Result<C64> {
    let x0 = x[0];
    let mut t = cpow(z, k as i64);
    for &xj in &x[1..] {
        let den = efac(x0 / xj, k, ctx)?;
        if den == zero() {
            return Err(Error::DenominatorZero(k));
        }
        t *= efac(x0 * xj, k, ctx)? / den;
    }
    Ok(t)
}

/// Term `k` of the well-poised sum before and after `x_j ↦ p^{α_j} x_j`.
/// `x` holds `x₀..x_m`; `x_{m+1}` is solved from `x₁²⋯x²_{m+1} = 1`.
pub fn total_ellipticity_check(
    x: &[C64],
    alpha: &[i64],
    k: usize,
    z: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    if x.len() < 2 || alpha.len() != x.len() + 1 {
        return Err(Error::InvalidArgument("need x₀..x_m and α₀..α_{m+1}".into()));
    }
    if alpha[1..].iter().sum::<i64>() != 0 {
        return Err(Error::InvalidArgument("shifts α₁..α_{m+1} must sum to zero".into()));
    }
    let mut full = x.to_vec();
    let prod: C64 = x[1..].iter().product();
    full.push(one() / prod);
    let shifted: Vec<C64> = full.iter().zip(alpha).map(|(v, &al)| v * cpow(ctx.p, al)).collect();
    let t0 = well_poised_term(&full, k, z, ctx)?;
    let t1 = well_poised_term(&shifted, k, z, ctx)?;
    relative_residual(t1 / t0, one(), 0.0, ctx)
}

/// The lower-triangular pair `A`, `B` built from `y`, `z`; checks `AB = BA = I`.
pub fn matrix_inversion_check(y: &[C64], z: &[C64], ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = y.len();
    if z.len() != n {
        return Err(Error::InvalidArgument("y and z must have equal length".into()));
    }
    let tpm = |u: C64, v: C64| theta_pm(u, v, p, ctx);
    let mut a = vec![vec![zero(); n]; n];
    let mut b = vec![vec![zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut num = one();
            for &zk in &z[j..i] {
                num *= tpm(y[j], zk)?;
            }
            let mut den = one();
            for &yk in &y[j + 1..=i] {
                den *= tpm(y[j], yk)?;
            }
            a[i][j] = num / den;
            let mut num = y[i] * tpm(y[j], z[j])?;
            for &zk in &z[j + 1..=i] {
                num *= tpm(y[i], zk)?;
            }
            let mut den = y[j] * tpm(y[i], z[i])?;
            for &yk in &y[j..i] {
                den *= tpm(y[i], yk)?;
            }
            b[i][j] = num / den;
        }
    }
    let zs = vec![vec![0f64; a.len()]; a.len()];
    let (a, b) = ((a, zs.clone()), (b, zs));
    let (ab, s1) = matmul(&a, &b);
    let (ba, s2) = matmul(&b, &a);
    Ok(identity_residual(&ab, &s1, ctx)?.worst(identity_residual(&ba, &s2, ctx)?))
}

/// Vanishing of a balanced very-well-poised sum with `a = q^{-n}`, `n` even;
/// `b` holds all but the last parameter, which is solved from the balancing.
pub fn v_even_vanishing(b: &[C64], n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    let q = ctx.q;
    let a = cpow(q, -(n as i64));
    let m = b.len() as i64 + 1;
    let prod2: C64 = b.iter().map(|x| x * x).product();
    let last = (cpow(q, m - 3) * cpow(a, m - 1) / prod2).sqrt();
    let mut all = b.to_vec();
    all.push(last);
    let spec = SeriesSpec::v(a, all, n).balanced();
    let s = spec.sum(ctx)?;
    relative_residual(s.value, zero(), s.max_term, ctx)
}
