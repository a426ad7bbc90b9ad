//! Elliptic shifted factorials, the even generator X, theta interpolation and
//! the partial-fraction family of theta identities.

use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{
    cdiv, circle_mean, relative_residual, with_redraws, CheckResult, CompensatedSum, EllipticContext, Sampler,
};
use crate::theta::{qpochhammer_inf, theta, theta_pm};
use crate::C64;

fn one() -> C64 {
    Complex::new(1.0, 0.0)
}

/// `(a;base,p)_k = Π_{j<k} θ(a base^j; p)`.
pub fn efac_base(a: C64, base: C64, k: usize, p: C64, ctx: &EllipticContext) -> Result<C64> {
    let mut prod = one();
    let mut x = a;
    for _ in 0..k {
        prod *= theta(x, p, ctx)?;
        x *= base;
    }
    Ok(prod)
}

/// `(a;q,p)_k` with the context base and nome.
pub fn efac(a: C64, k: usize, ctx: &EllipticContext) -> Result<C64> {
    efac_base(a, ctx.q, k, ctx.p, ctx)
}

/// `(a₁,…,aₘ;q,p)_k`.
pub fn efac_multi(args: &[C64], k: usize, ctx: &EllipticContext) -> Result<C64> {
    let mut prod = one();
    for &a in args {
        prod *= efac(a, k, ctx)?;
    }
    Ok(prod)
}

/// `(n₁,…;q,p)_k / (d₁,…;q,p)_k`, formed one theta ratio at a time so that
/// large numerators and denominators do not overflow separately.
pub fn efac_ratio(num: &[C64], den: &[C64], k: usize, ctx: &EllipticContext) -> Result<C64> {
    efac_ratio_base(num, den, ctx.q, k, ctx.p, ctx)
}

/// [`efac_ratio`] with an explicit base and nome.
pub fn efac_ratio_base(num: &[C64], den: &[C64], base: C64, k: usize, p: C64, ctx: &EllipticContext) -> Result<C64> {
    let mut prod = one();
    let mut qi = one();
    for i in 0..k {
        for m in 0..num.len().max(den.len()) {
            if let Some(&a) = num.get(m) {
                prod *= theta(a * qi, p, ctx)?;
            }
            if let Some(&b) = den.get(m) {
                let t = theta(b * qi, p, ctx)?;
                if t == Complex::new(0.0, 0.0) {
                    return Err(Error::DenominatorZero(i));
                }
                prod = cdiv(prod, t);
            }
        }
        qi *= base;
    }
    Ok(prod)
}

/// `(ax^±;q,p)_k = (ax;q,p)_k (a/x;q,p)_k`.
pub fn efac_pm(a: C64, x: C64, k: usize, ctx: &EllipticContext) -> Result<C64> {
    if x == Complex::new(0.0, 0.0) {
        return Err(Error::ThetaArgumentZero);
    }
    Ok(efac(a * x, k, ctx)? * efac(a / x, k, ctx)?)
}

/// `k(k-1)/2` for any integer `k`.
pub(crate) fn binom2(k: i64) -> i64 {
    k * (k - 1) / 2
}

pub(crate) fn cpow(z: C64, k: i64) -> C64 {
    z.powi(k as i32)
}

fn is_lattice(z: C64, p: C64, ctx: &EllipticContext) -> Result<bool> {
    Ok(theta(z, p, ctx)? == Complex::new(0.0, 0.0))
}

/// Checks the four standard manipulation rules for `(a;q,p)_k` at one seeded
/// draw of `(a, n, k, m)` with `n, k <= 6`, `|m| <= 2`.
pub fn efac_identity_suite(ctx: &EllipticContext) -> Result<CheckResult> {
    with_redraws(ctx, 0x0e91, |s| {
        let a = s.param();
        let n = s.index(7);
        let k = s.index(n + 1);
        let m = s.index(5) as i64 - 2;
        efac_identities(a, n, k, m, ctx)
    })
}

/// The four rules at explicit `(a, n, k, m)`; `k <= n` is required for the reversal.
pub fn efac_identities(a: C64, n: usize, k: usize, m: i64, ctx: &EllipticContext) -> Result<CheckResult> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k={k} > n={n}")));
    }
    let (q, p) = (ctx.q, ctx.p);
    let (ni, ki) = (n as i64, k as i64);
    let sign = |e: i64| if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let w = || {
        vec![
            ("a".to_string(), a),
            ("n".to_string(), Complex::new(n as f64, 0.0)),
            ("k".to_string(), Complex::new(k as f64, 0.0)),
            ("m".to_string(), Complex::new(m as f64, 0.0)),
        ]
    };

    let l1 = efac(a, n + k, ctx)?;
    let r1 = efac(a, n, ctx)? * efac(a * cpow(q, ni), k, ctx)?;
    let c1 = relative_residual(l1, r1, 0.0, ctx)?;

    let l2 = efac(a, n - k, ctx)?;
    let r2 = sign(ki) * cpow(q, binom2(ki)) * efac(a, n, ctx)?
        / (cpow(a * cpow(q, ni - 1), ki) * efac(cpow(q, 1 - ni) / a, k, ctx)?);
    let c2 = relative_residual(l2, r2, 0.0, ctx)?;

    let l3 = efac(a, k, ctx)?;
    let r3 = sign(ki) * cpow(a, ki) * cpow(q, binom2(ki)) * efac(cpow(q, 1 - ki) / a, k, ctx)?;
    let c3 = relative_residual(l3, r3, 0.0, ctx)?;

    let l4 = efac(cpow(p, m) * a, n, ctx)?;
    let r4 = sign(m * ni) * efac(a, n, ctx)? / (cpow(a, m * ni) * cpow(p, ni * binom2(m)) * cpow(q, m * binom2(ni)));
    let c4 = relative_residual(l4, r4, 0.0, ctx)?;

    Ok(CheckResult::worst_of([c1, c2, c3, c4]).with_witness(w()))
}

/// X(x) = θ(ax^±;p)/θ(bx^±;p), a generator for even elliptic functions.
pub fn x_generator(x: C64, a: C64, b: C64, ctx: &EllipticContext) -> Result<C64> {
    check_generator(a, b, ctx)?;
    let den = theta_pm(b, x, ctx.p, ctx)?;
    if den == Complex::new(0.0, 0.0) {
        return Err(Error::EvaluationAtPole);
    }
    Ok(theta_pm(a, x, ctx.p, ctx)? / den)
}

fn check_generator(a: C64, b: C64, ctx: &EllipticContext) -> Result<()> {
    if a == Complex::new(0.0, 0.0) || b == Complex::new(0.0, 0.0) {
        return Err(Error::ThetaArgumentZero);
    }
    if is_lattice(a * b, ctx.p, ctx)? || is_lattice(a / b, ctx.p, ctx)? {
        return Err(Error::InvalidArgument("generator needs ab, a/b outside p^Z".into()));
    }
    Ok(())
}

/// X'(x) = a (p;p)_∞² θ(ba^±, x²;p) / (x² θ(bx^±;p)²).
pub fn x_generator_derivative(x: C64, a: C64, b: C64, ctx: &EllipticContext) -> Result<C64> {
    check_generator(a, b, ctx)?;
    let p = ctx.p;
    let den = theta_pm(b, x, p, ctx)?;
    if den == Complex::new(0.0, 0.0) {
        return Err(Error::EvaluationAtPole);
    }
    let pp = qpochhammer_inf(p, p, ctx)?;
    let num = a * pp * pp * theta_pm(b, a, p, ctx)? * theta(x * x, p, ctx)?;
    Ok(num / (x * x * den * den))
}

/// Theta interpolation through `(y_j, f(y_j))` for functions with
/// `f(px) = f(x)/(t x^n)`-type quasi-periodicity fixed by `t`.
pub fn lagrange_theta_interpolate(nodes: &[C64], values: &[C64], t: C64, x: C64, ctx: &EllipticContext) -> Result<C64> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::InvalidArgument(
            "nodes and values must be nonempty and of equal length".into(),
        ));
    }
    let p = ctx.p;
    let tt = theta(t, p, ctx)?;
    if tt == Complex::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("t lies in p^Z".into()));
    }
    let mut sum = CompensatedSum::default();
    for (j, (&yj, &fj)) in nodes.iter().zip(values).enumerate() {
        let mut term = fj * theta(t * x / yj, p, ctx)? / tt;
        for (k, &yk) in nodes.iter().enumerate() {
            if k == j {
                continue;
            }
            let d = theta(yj / yk, p, ctx)?;
            if d == Complex::new(0.0, 0.0) {
                return Err(Error::DegenerateNodes);
            }
            term *= theta(x / yk, p, ctx)? / d;
        }
        sum.add(term);
    }
    Ok(sum.value())
}

/// θ(ax^±,bc^±) - θ(bx^±,ac^±) - (a/c)θ(cx^±,ba^±) at explicit arguments.
pub fn three_term(a: C64, b: C64, c: C64, x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let lhs = theta_pm(a, x, p, ctx)? * theta_pm(b, c, p, ctx)?;
    let t1 = theta_pm(b, x, p, ctx)? * theta_pm(a, c, p, ctx)?;
    let t2 = a / c * theta_pm(c, x, p, ctx)? * theta_pm(b, a, p, ctx)?;
    let scale = t1.norm().max(t2.norm());
    Ok(relative_residual(lhs, t1 + t2, scale, ctx)?.with_witness(vec![
        ("a".into(), a),
        ("b".into(), b),
        ("c".into(), c),
        ("x".into(), x),
    ]))
}

/// The three-term identity at one seeded draw.
pub fn ttr_check(ctx: &EllipticContext) -> Result<CheckResult> {
    with_redraws(ctx, 0x77e1, |s| {
        let v = s.params(4);
        three_term(v[0], v[1], v[2], v[3], ctx)
    })
}

/// The elliptic number `[z] = e^{-iπz} θ(e^{2πiz}; e^{2πiτ})`.
pub fn elliptic_number(z: C64, tau: C64, ctx: &EllipticContext) -> Result<C64> {
    let i = Complex::new(0.0, 1.0);
    let p = (2.0 * PI * i * tau).exp();
    Ok((-PI * i * z).exp() * theta((2.0 * PI * i * z).exp(), p, ctx)?)
}

/// `[z±a][b±c] - [z±b][a±c] - [z±c][b±a]` for a given bracket.
pub fn number_identity<F>(mut br: F, z: C64, a: C64, b: C64, c: C64, ctx: &EllipticContext) -> Result<CheckResult>
where
    F: FnMut(C64) -> Result<C64>,
{
    let mut pair = |u: C64, v: C64| -> Result<C64> { Ok(br(u + v)? * br(u - v)?) };
    let lhs = pair(z, a)? * pair(b, c)?;
    let t1 = pair(z, b)? * pair(a, c)?;
    let t2 = pair(z, c)? * pair(b, a)?;
    relative_residual(lhs, t1 + t2, t1.norm().max(t2.norm()), ctx)
}

/// `[b±c] - [a±c] - [b±a]`: true for sin and z, false for elliptic numbers.
pub fn two_term_number_identity<F>(mut br: F, a: C64, b: C64, c: C64, ctx: &EllipticContext) -> Result<CheckResult>
where
    F: FnMut(C64) -> Result<C64>,
{
    let mut pair = |u: C64, v: C64| -> Result<C64> { Ok(br(u + v)? * br(u - v)?) };
    let lhs = pair(b, c)?;
    let t1 = pair(a, c)?;
    let t2 = pair(b, a)?;
    relative_residual(lhs, t1 + t2, t1.norm().max(t2.norm()), ctx)
}

/// Draws `(z, a, b, c, τ)` for the elliptic-number checks.
pub fn draw_number_args(s: &mut Sampler) -> (C64, C64, C64, C64, C64) {
    let mut small = || Complex::new(s.real(-0.5, 0.5), s.real(-0.2, 0.2));
    let (z, a, b, c) = (small(), small(), small(), small());
    let tau = Complex::new(s.real(-0.5, 0.5), s.real(0.25, 0.6));
    (z, a, b, c, tau)
}

fn draw_distinct(s: &mut Sampler, n: usize) -> Vec<C64> {
    (0..n).map(|_| s.complex(0.5, 1.5)).collect()
}

/// Elliptic partial fractions at one seeded draw of size `n`: the general
/// expansion, its balanced vanishing case, the even (x^±) expansion and its
/// specialization at `x = z₁`. Returns the worst of the four.
pub fn partial_fraction_suite(n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!("n={n} outside 2..=8")));
    }
    with_redraws(ctx, 0x9f00 + n as u64, |s| {
        let y = draw_distinct(s, n);
        let z = draw_distinct(s, n);
        let x = s.complex(0.5, 1.5);
        let r1 = epf(&y, &z, x, ctx)?;
        let mut zb = z.clone();
        let prod_y: C64 = y.iter().product();
        let prod_z: C64 = z[..n - 1].iter().product();
        zb[n - 1] = prod_y / prod_z;
        let r2 = epv(&y, &zb, ctx)?;
        let r3 = dpf(&y, &z[..n - 1], x, ctx)?;
        let r4 = vdf(&y, &z[1..n - 1], ctx)?;
        Ok(CheckResult::worst_of([r1, r2, r3, r4]))
    })
}

/// Π θ(x/z_k)/θ(x/y_k) against its expansion in the poles `x = y_j`.
pub fn epf(y: &[C64], z: &[C64], x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = y.len();
    if z.len() != n {
        return Err(Error::InvalidArgument("epf needs |y| = |z|".into()));
    }
    let yp: C64 = y.iter().product();
    let zp: C64 = z.iter().product();
    let mut lhs = one();
    for k in 0..n {
        lhs *= theta(x / z[k], p, ctx)? / theta(x / y[k], p, ctx)?;
    }
    let mut sum = CompensatedSum::default();
    for j in 0..n {
        let mut t = theta(x * yp / (y[j] * zp), p, ctx)? / (theta(yp / zp, p, ctx)? * theta(x / y[j], p, ctx)?);
        for k in 0..n {
            t *= theta(y[j] / z[k], p, ctx)?;
            if k != j {
                t /= theta(y[j] / y[k], p, ctx)?;
            }
        }
        sum.add(t);
    }
    relative_residual(lhs, sum.value(), sum.max_term(), ctx)
}

/// Σ_j Π_k θ(y_j/z_k) / Π_{k≠j} θ(y_j/y_k) = 0 when Πy = Πz.
pub fn epv(y: &[C64], z: &[C64], ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = y.len();
    let mut sum = CompensatedSum::default();
    for j in 0..n {
        let mut t = one();
        for k in 0..n {
            t *= theta(y[j] / z[k], p, ctx)?;
            if k != j {
                t /= theta(y[j] / y[k], p, ctx)?;
            }
        }
        sum.add(t);
    }
    relative_residual(sum.value(), Complex::new(0.0, 0.0), sum.max_term(), ctx)
}

/// The even partial-fraction expansion with `n` poles `y` and `n-1` zeros `z`.
pub fn dpf(y: &[C64], z: &[C64], x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = y.len();
    if z.len() + 1 != n {
        return Err(Error::InvalidArgument("dpf needs |z| = |y| - 1".into()));
    }
    let mut lhs = one();
    for zk in z {
        lhs *= theta_pm(x, *zk, p, ctx)?;
    }
    for yk in y {
        lhs /= theta_pm(x, *yk, p, ctx)?;
    }
    let mut sum = CompensatedSum::default();
    for j in 0..n {
        let mut t = one() / theta_pm(x, y[j], p, ctx)?;
        for zk in z {
            t *= theta_pm(y[j], *zk, p, ctx)?;
        }
        for (k, yk) in y.iter().enumerate() {
            if k != j {
                t /= theta_pm(y[j], *yk, p, ctx)?;
            }
        }
        sum.add(t);
    }
    relative_residual(lhs, sum.value(), sum.max_term(), ctx)
}

/// Σ_j y_j Π_k θ(y_j z_k^±) / Π_{k≠j} θ(y_j y_k^±) = 0 with `n-2` zeros `z`.
pub fn vdf(y: &[C64], z: &[C64], ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    if z.len() + 2 != y.len() {
        return Err(Error::InvalidArgument("vdf needs |z| = |y| - 2".into()));
    }
    let mut sum = CompensatedSum::default();
    for (j, &yj) in y.iter().enumerate() {
        let mut t = yj;
        for zk in z {
            t *= theta_pm(yj, *zk, p, ctx)?;
        }
        for (k, yk) in y.iter().enumerate() {
            if k != j {
                t /= theta_pm(yj, *yk, p, ctx)?;
            }
        }
        sum.add(t);
    }
    relative_residual(sum.value(), Complex::new(0.0, 0.0), sum.max_term(), ctx)
}

/// The antisymmetrized theta product identity with `a₁⋯aₙ b₁⋯b_{n+2} = 1`
/// (last `b` solved for) at one seeded draw.
pub fn sbt_identity(n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    with_redraws(ctx, 0x5b70 + n as u64, |s| {
        let a = draw_distinct(s, n);
        let mut b = draw_distinct(s, n + 1);
        let pa: C64 = a.iter().product();
        let pb: C64 = b.iter().product();
        b.push(one() / (pa * pb));
        let x = s.complex(0.5, 1.5);
        sbt_at(&a, &b, x, ctx)
    })
}

/// Both sides of the antisymmetrized product identity at explicit arguments.
pub fn sbt_at(a: &[C64], b: &[C64], x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = a.len();
    let ni = n as i64;
    let mut left = cpow(x, -ni - 1);
    let mut right = cpow(x, ni + 1);
    for &v in a.iter().chain(b) {
        left *= theta(v * x, p, ctx)?;
        right *= theta(v / x, p, ctx)?;
    }
    let lhs = left - right;
    let pa: C64 = a.iter().product();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pre = sign * x * theta(one() / (x * x), p, ctx)? / pa;
    let mut sum = CompensatedSum::default();
    for k in 0..n {
        let mut t = pre;
        for &bj in b {
            t *= theta(a[k] * bj, p, ctx)?;
        }
        for j in 0..n {
            if j != k {
                t *= theta_pm(a[j], x, p, ctx)? / theta(a[k] / a[j], p, ctx)?;
            }
        }
        sum.add(t);
    }
    let scale = left.norm().max(right.norm()).max(sum.max_term());
    relative_residual(lhs, sum.value(), scale, ctx)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<C64>>) -> C64 {
    let n = m.len();
    let mut det = one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap_or(col);
        if m[piv][col] == Complex::new(0.0, 0.0) {
            return Complex::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    det
}

/// Frobenius's evaluation of `det θ(t x_i y_j)/θ(x_i y_j)` at one seeded draw, `n <= 5`.
pub fn frobenius_determinant(n: usize, ctx: &EllipticContext) -> Result<CheckResult> {
    if !(1..=5).contains(&n) {
        return Err(Error::InvalidArgument(format!("n={n} outside 1..=5")));
    }
    with_redraws(ctx, 0xf20b + n as u64, |s| {
        let x = draw_distinct(s, n);
        let y = draw_distinct(s, n);
        let t = s.complex(0.5, 1.5);
        frobenius_at(&x, &y, t, ctx)
    })
}

/// Both sides of Frobenius's determinant at explicit arguments.
pub fn frobenius_at(x: &[C64], y: &[C64], t: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let n = x.len();
    let mut m = vec![vec![Complex::new(0.0, 0.0); n]; n];
    let mut entry_scale = 0f64;
    for i in 0..n {
        for j in 0..n {
            m[i][j] = theta(t * x[i] * y[j], p, ctx)? / theta(x[i] * y[j], p, ctx)?;
            entry_scale = entry_scale.max(m[i][j].norm());
        }
    }
    let lhs = determinant(m);
    let px: C64 = x.iter().product();
    let py: C64 = y.iter().product();
    let mut rhs = theta(t, p, ctx)?.powi(n as i32 - 1) * theta(t * px * py, p, ctx)?;
    for i in 0..n {
        for j in i + 1..n {
            rhs *= x[j] * y[j] * theta(x[i] / x[j], p, ctx)? * theta(y[i] / y[j], p, ctx)?;
        }
    }
    for &xi in x {
        for &yj in y {
            rhs /= theta(xi * yj, p, ctx)?;
        }
    }
    // n! products of entries bound the cancellation in the expansion
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    relative_residual(lhs, rhs, fact * entry_scale.powi(n as i32), ctx)
}

/// Zeros minus poles of `g` in the annulus `|p| r < |x| < r`, from
/// `(1/2πi)∮ g'/g dx` over both boundary circles with a central-difference `g'`.
pub fn zero_pole_count<G>(mut g: G, r: f64, ctx: &EllipticContext) -> Result<i64>
where
    G: FnMut(C64) -> Result<C64>,
{
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let qctx = ctx.with_tol(ctx.tol.max(1e-7));
    let h = 1e-7 * r;
    let mut log_deriv = |x: C64| -> Result<C64> {
        let gx = g(x)?;
        if gx == Complex::new(0.0, 0.0) {
            return Err(Error::ContourTooClose(f64::NAN));
        }
        let d = (g(x + h)? - g(x - h)?) / (2.0 * h);
        Ok(x * d / gx)
    };
    let origin = Complex::new(0.0, 0.0);
    let outer = circle_mean(&mut log_deriv, origin, r, 64, 8, &qctx)?.value;
    let inner = circle_mean(&mut log_deriv, origin, ctx.p.norm() * r, 64, 8, &qctx)?.value;
    let w = outer - inner;
    let k = w.re.round();
    let off = (w - k).norm();
    if off > 0.1 {
        return Err(Error::ContourTooClose(w.re));
    }
    Ok(k as i64)
}

/// `(X(a_k)-X(d_k))`-form of the telescoping identity: the rational shadow of the
/// theta telescoping sum, evaluated on arbitrary values.
pub fn rational_telescoping(a: &[C64], b: &[C64], c: &[C64], d: &[C64], ctx: &EllipticContext) -> Result<CheckResult> {
    let n = a.len();
    if b.len() != n || c.len() != n || d.len() != n || n == 0 {
        return Err(Error::InvalidArgument("sequences must share a nonzero length".into()));
    }
    let big = |j: usize| (a[j] - d[j]) * (b[j] - c[j]);
    let small = |j: usize| (b[j] - d[j]) * (a[j] - c[j]);
    let mut sum = CompensatedSum::default();
    for k in 0..n {
        let mut t = (c[k] - d[k]) * (b[k] - a[k]);
        for j in 0..k {
            t *= big(j);
        }
        for j in k + 1..n {
            t *= small(j);
        }
        sum.add(t);
    }
    let l: C64 = (0..n).map(big).product();
    let r: C64 = (0..n).map(small).product();
    relative_residual(sum.value(), l - r, sum.max_term().max(l.norm()).max(r.norm()), ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    fn ctx_real() -> EllipticContext {
        EllipticContext::new(c(0.2, 0.0), c(0.3, 0.0)).unwrap()
    }

    #[test]
    fn efac_examples() {
        let ctx = ctx_real();
        let a = c(0.4, 0.0);
        assert_eq!(efac(a, 0, &ctx).unwrap(), c(1.0, 0.0));
        let direct = theta(a, ctx.p, &ctx).unwrap() * theta(a * ctx.q, ctx.p, &ctx).unwrap();
        assert!((efac(a, 2, &ctx).unwrap() - direct).norm() < 1e-15);
        let mut classical = c(1.0, 0.0);
        let q = c(0.3, 0.1);
        let a = c(0.7, -0.4);
        for j in 0..5 {
            classical *= 1.0 - a * q.powi(j);
        }
        let v = efac_base(a, q, 5, c(0.0, 0.0), &ctx).unwrap();
        assert!((v - classical).norm() < 1e-15);
    }

    #[test]
    fn efac_pm_and_multi() {
        let ctx = EllipticContext::default();
        let (a, x) = (c(0.6, 0.2), c(1.1, -0.3));
        let v = efac_pm(a, x, 3, &ctx).unwrap();
        let w = efac_multi(&[a * x, a / x], 3, &ctx).unwrap();
        assert!((v - w).norm() < 1e-15 * v.norm());
        assert_eq!(efac_multi(&[], 4, &ctx).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn efac_rules() {
        let ctx = EllipticContext::default();
        let r = efac_identities(c(0.8, 0.3), 0, 0, 0, &ctx).unwrap();
        assert_eq!(r.residual, 0.0);
        for seed in 0..20 {
            let r = efac_identity_suite(&ctx.for_trial(seed)).unwrap();
            assert!(r.pass, "seed {seed}: {r:?}");
        }
        let a = c(0.9, -0.5);
        let l = efac(ctx.p * a, 1, &ctx).unwrap();
        let r = -efac(a, 1, &ctx).unwrap() / a;
        assert!((l - r).norm() < 1e-14 * l.norm());
    }

    #[test]
    fn x_generator_properties() {
        let ctx = EllipticContext::default();
        let (a, b) = (c(0.7, 0.3), c(1.3, -0.4));
        let s = Sampler::new(&ctx, 3).params(8);
        for x in s {
            let v = x_generator(x, a, b, &ctx).unwrap();
            let w = x_generator(1.0 / x, a, b, &ctx).unwrap();
            let u = x_generator(ctx.p * x, a, b, &ctx).unwrap();
            assert!((v - w).norm() < 1e-12 * v.norm().max(1.0));
            assert!((v - u).norm() < 1e-12 * v.norm().max(1.0));
            let h = 1e-6 * x.norm();
            let fd = (x_generator(x + h, a, b, &ctx).unwrap() - x_generator(x - h, a, b, &ctx).unwrap()) / (2.0 * h);
            let d = x_generator_derivative(x, a, b, &ctx).unwrap();
            assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0), "{fd} vs {d}");
        }
        assert_eq!(x_generator(b, a, b, &ctx), Err(Error::EvaluationAtPole));
        assert!(x_generator(c(0.5, 0.0), a, a * ctx.p, &ctx).is_err());
    }

    #[test]
    fn interpolation_single_node() {
        let ctx = EllipticContext::default();
        let (y, f, t, x) = (c(0.8, 0.1), c(2.0, -1.0), c(0.6, 0.5), c(1.2, 0.4));
        let v = lagrange_theta_interpolate(&[y], &[f], t, x, &ctx).unwrap();
        let e = f * theta(t * x / y, ctx.p, &ctx).unwrap() / theta(t, ctx.p, &ctx).unwrap();
        assert!((v - e).norm() < 1e-15 * e.norm());
    }

    #[test]
    fn interpolation_reconstructs_theta_products() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 9);
        let (z1, z2, y1, y2) = (s.param(), s.param(), s.param(), s.param());
        let t = y1 * y2 / (z1 * z2);
        let f = |x: C64| theta(x / z1, ctx.p, &ctx).unwrap() * theta(x / z2, ctx.p, &ctx).unwrap();
        let nodes = [y1, y2];
        let values = [f(y1), f(y2)];
        for _ in 0..16 {
            let x = s.param();
            let v = lagrange_theta_interpolate(&nodes, &values, t, x, &ctx).unwrap();
            assert!((v - f(x)).norm() <= ctx.tol * f(x).norm().max(1.0));
        }
        for (j, y) in nodes.iter().enumerate() {
            let v = lagrange_theta_interpolate(&nodes, &values, t, *y, &ctx).unwrap();
            assert!((v - values[j]).norm() <= 1e-12 * values[j].norm().max(1.0));
            let mut bumped = values;
            bumped[j] += 1e-3;
            let w = lagrange_theta_interpolate(&nodes, &bumped, t, *y, &ctx).unwrap();
            assert!((w - v - 1e-3).norm() < 1e-12);
        }
        assert_eq!(
            lagrange_theta_interpolate(&[y1, y1 * ctx.p], &values, t, y2, &ctx),
            Err(Error::DegenerateNodes)
        );
    }

    #[test]
    fn three_term_holds() {
        let ctx = EllipticContext::default();
        for seed in 0..20 {
            assert!(ttr_check(&ctx.for_trial(seed)).unwrap().pass);
        }
    }

    #[test]
    fn elliptic_numbers() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 4);
        let mut two_term_failed = false;
        for _ in 0..10 {
            let (z, a, b, c, tau) = draw_number_args(&mut s);
            let r = number_identity(|w| elliptic_number(w, tau, &ctx), z, a, b, c, &ctx).unwrap();
            assert!(r.pass, "{r:?}");
            let r = number_identity(|w| Ok(w.sin()), z, a, b, c, &ctx).unwrap();
            assert!(r.pass);
            let r = two_term_number_identity(|w| Ok(w.sin()), a, b, c, &ctx).unwrap();
            assert!(r.pass);
            let r = two_term_number_identity(|w| elliptic_number(w, tau, &ctx), a, b, c, &ctx).unwrap();
            if r.ratio() > 1e3 * ctx.tol {
                two_term_failed = true;
            }
        }
        assert!(two_term_failed);
    }

    #[test]
    fn partial_fractions() {
        let ctx = EllipticContext::default();
        for n in 2..=8 {
            let r = partial_fraction_suite(n, &ctx).unwrap();
            assert!(r.pass, "n={n}: {r:?}");
        }
        assert!(partial_fraction_suite(1, &ctx).is_err());
    }

    #[test]
    fn balanced_sum_vanishes_for_permuted_lists() {
        let ctx = EllipticContext::default();
        let y = [c(0.7, 0.2), c(1.1, -0.3), c(0.9, 0.6)];
        let z = [y[2], y[0], y[1]];
        let r = epv(&y, &z, &ctx).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn antisymmetric_products() {
        let ctx = EllipticContext::default();
        for n in 1..=4 {
            let r = sbt_identity(n, &ctx).unwrap();
            assert!(r.pass, "n={n}: {r:?}");
        }
    }

    #[test]
    fn frobenius() {
        let ctx = EllipticContext::default();
        let (x, y, t) = (c(0.8, 0.2), c(1.2, -0.1), c(0.5, 0.4));
        let r = frobenius_at(&[x], &[y], t, &ctx).unwrap();
        assert!(r.residual < 1e-15);
        for n in 1..=5 {
            let r = frobenius_determinant(n, &ctx).unwrap();
            assert!(r.pass, "n={n}: {r:?}");
        }
    }

    #[test]
    fn determinant_small() {
        let m = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]];
        assert!((determinant(m) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_pole_counts() {
        let ctx = EllipticContext::new(c(0.3, 0.0), c(0.4, 0.1)).unwrap();
        let (a, b, cc, d) = (c(0.6, 0.3), c(-0.5, 0.45), c(0.2, -0.62), c(-0.45, -0.5));
        let g = |x: C64| -> Result<C64> {
            let p = ctx.p;
            Ok(theta(x / a, p, &ctx)? * theta(x / b, p, &ctx)? / (theta(x / cc, p, &ctx)? * theta(x / d, p, &ctx)?))
        };
        assert_eq!(zero_pole_count(g, 1.0, &ctx).unwrap(), 0);
        let single = |x: C64| theta(x / a, ctx.p, &ctx);
        assert_eq!(zero_pole_count(single, 1.0, &ctx).unwrap(), 1);
    }

    #[test]
    fn rational_shadow() {
        let ctx = EllipticContext::default();
        let mut s = Sampler::new(&ctx, 12);
        let (ga, gb) = (c(0.7, 0.2), c(1.3, -0.5));
        let mut seq = || -> Vec<C64> { (0..8).map(|_| x_generator(s.param(), ga, gb, &ctx).unwrap()).collect() };
        let (a, b, cc, d) = (seq(), seq(), seq(), seq());
        assert!(rational_telescoping(&a, &b, &cc, &d, &ctx).unwrap().pass);
    }
}
