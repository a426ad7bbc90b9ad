//! Baxter's elliptic solid-on-solid model: Boltzmann weights, the dynamical
//! Yang–Baxter equation, unitarity, and fused weights.
//!
//! Heights are a complex base `λ₀` plus integer offsets, so height shifts are exact.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{relative_residual, CheckResult, CompensatedSum, EllipticContext, Sampler};
use crate::series::{h_fn, rkl_double_sum};
use crate::theta::theta;
use crate::C64;

type Height = i32;

fn zero() -> C64 {
    Complex::new(0.0, 0.0)
}

/// `q^e` for complex `e`, through the principal logarithm of `q`.
pub fn qpow(e: C64, ctx: &EllipticContext) -> C64 {
    (e * ctx.q.ln()).exp()
}

fn qpow_r(e: f64, ctx: &EllipticContext) -> C64 {
    qpow(Complex::new(e, 0.0), ctx)
}

/// Index set of a weight `R^{mn}_{kl}(λ|u)`; indices are `±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosWeightKey {
    pub lambda: C64,
    pub m: i32,
    pub n: i32,
    pub k: i32,
    pub l: i32,
    pub u: C64,
}

/// `R^{mn}_{kl}(λ|u)`; inadmissible index sets give 0.
pub fn sos_weight(key: &SosWeightKey, ctx: &EllipticContext) -> Result<C64> {
    r_entry(key.m, key.n, key.k, key.l, key.lambda, key.u, ctx)
}

fn r_entry(m: i32, n: i32, k: i32, l: i32, lam: C64, u: C64, ctx: &EllipticContext) -> Result<C64> {
    if [m, n, k, l].iter().any(|&s| s != 1 && s != -1) || k + l != m + n {
        return Ok(zero());
    }
    if m == n {
        return Ok(Complex::new(1.0, 0.0));
    }
    let p = ctx.p;
    let th = |x: C64| theta(x, p, ctx);
    // m = -n here; sg is the sign making θ(q^{sg λ}) the denominator
    let sg = if m == 1 { -1.0 } else { 1.0 };
    let ql = qpow(sg * lam, ctx);
    let den = th(ql)? * th(u * ctx.q)?;
    if den == zero() {
        return Err(Error::WeightPole);
    }
    let num = if m == k {
        th(ql * ctx.q)? * th(u)?
    } else {
        th(ctx.q)? * th(ql * u)?
    };
    Ok(num / den)
}

/// `W(a b; c d | u) = R^{c-a, d-c}_{d-b, b-a}(λ₀ + a | u)`.
pub fn height_weight(
    lam0: C64,
    a: Height,
    b: Height,
    c: Height,
    d: Height,
    u: C64,
    ctx: &EllipticContext,
) -> Result<C64> {
    r_entry(c - a, d - c, d - b, b - a, lam0 + a as f64, u, ctx)
}

const SIGNS: [i32; 2] = [1, -1];

/// Both sides of the index form of the Yang–Baxter equation for one sign tuple `(i,j,k,l,m,n)`.
pub fn cyb_sides(t: [i32; 6], lam: C64, u: C64, v: C64, w: C64, ctx: &EllipticContext) -> Result<(C64, C64, f64)> {
    let [i, j, k, l, m, n] = t;
    let r = |a, b, c, d, la: C64, z| r_entry(a, b, c, d, la, z, ctx);
    let mut lhs = CompensatedSum::default();
    let mut rhs = CompensatedSum::default();
    for x in SIGNS {
        lhs.add(
            r(l + m - x, x, l, m, lam + n as f64, u / v)?
                * r(i, j + k - x, l + m - x, n, lam, u / w)?
                * r(j, k, x, j + k - x, lam + i as f64, v / w)?,
        );
        rhs.add(
            r(x, m + n - x, m, n, lam, v / w)?
                * r(i + j - x, k, l, m + n - x, lam + x as f64, u / w)?
                * r(i, j, i + j - x, x, lam, u / v)?,
        );
    }
    Ok((lhs.value(), rhs.value(), lhs.max_term().max(rhs.max_term())))
}

/// The 20 sign tuples with `i+j+k = l+m+n`.
pub fn ybe_tuples() -> Vec<[i32; 6]> {
    let mut out = Vec::new();
    for i in SIGNS {
        for j in SIGNS {
            for k in SIGNS {
                for l in SIGNS {
                    for m in SIGNS {
                        for n in SIGNS {
                            if i + j + k == l + m + n {
                                out.push([i, j, k, l, m, n]);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Worst residual of the Yang–Baxter equation over all 20 sign tuples.
pub fn yang_baxter_check(lam: C64, u: C64, v: C64, w: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    for t in ybe_tuples() {
        let (l, r, s) = cyb_sides(t, lam, u, v, w, ctx)?;
        out.push(relative_residual(l, r, s, ctx)?);
    }
    Ok(CheckResult::worst_of(out))
}

/// The four-term case `(+,−,+,+,−,+)` against its explicit theta-function form.
pub fn four_term_check(lam: C64, u: C64, v: C64, w: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let p = ctx.p;
    let q = ctx.q;
    let th = |x: C64| theta(x, p, ctx);
    let ql = |e: f64| qpow(lam + e, ctx);
    let qm = |e: f64| qpow(-lam + e, ctx);
    let tq3 = th(q)?.powi(3);
    let l1 = tq3 * th(ql(1.0) * u / v)? * th(qm(0.0) * u / w)? * th(ql(1.0) * v / w)?
        / (th(ql(1.0))? * th(u * q / v)? * th(qm(0.0))? * th(u * q / w)? * th(ql(1.0))? * th(v * q / w)?);
    let l2 = th(qm(0.0))? * th(u / v)? * th(ql(2.0))? * th(v / w)?
        / (th(qm(-1.0))? * th(u * q / v)? * th(ql(1.0))? * th(v * q / w)?);
    let r1 = tq3 * th(qm(0.0) * v / w)? * th(ql(1.0) * u / w)? * th(qm(0.0) * u / v)?
        / (th(qm(0.0))? * th(v * q / w)? * th(ql(1.0))? * th(u * q / w)? * th(qm(0.0))? * th(u * q / v)?);
    let r2 = th(ql(1.0))? * th(v / w)? * th(qm(1.0))? * th(u / v)?
        / (th(ql(0.0))? * th(v * q / w)? * th(qm(0.0))? * th(u * q / v)?);
    let (cl, cr, s) = cyb_sides([1, -1, 1, 1, -1, 1], lam, u, v, w, ctx)?;
    let explicit = relative_residual(l1 + l2, r1 + r2, s, ctx)?;
    Ok(explicit
        .worst(relative_residual(cl, l1 + l2, s, ctx)?)
        .worst(relative_residual(cr, r1 + r2, s, ctx)?))
}

/// A vector in `V^{⊗r}` with basis `e_{±1}`; keys are index tuples.
type Tensor<const R: usize> = BTreeMap<[i32; R], C64>;

/// `R^{ab}` with a dynamical shift from the weights of the listed factors.
fn apply_r<const R: usize>(
    vec: &Tensor<R>,
    (a, b): (usize, usize),
    shift_from: Option<usize>,
    lam: C64,
    z: C64,
    ctx: &EllipticContext,
) -> Result<Tensor<R>> {
    let mut out: Tensor<R> = BTreeMap::new();
    for (idx, &coef) in vec {
        let la = lam + shift_from.map_or(0.0, |f| idx[f] as f64);
        let (k, l) = (idx[a], idx[b]);
        for mm in SIGNS {
            let nn = k + l - mm;
            let r = r_entry(k, l, mm, nn, la, z, ctx)?;
            if r == zero() {
                continue;
            }
            let mut j = *idx;
            j[a] = mm;
            j[b] = nn;
            *out.entry(j).or_insert_with(zero) += coef * r;
        }
    }
    Ok(out)
}

fn basis<const R: usize>(idx: [i32; R]) -> Tensor<R> {
    let mut t = BTreeMap::new();
    t.insert(idx, Complex::new(1.0, 0.0));
    t
}

/// Both sides of Felder's operator equation applied to `e_i ⊗ e_j ⊗ e_k`.
pub fn operator_sides(
    input: [i32; 3],
    lam: C64,
    u: C64,
    v: C64,
    w: C64,
    ctx: &EllipticContext,
) -> Result<(Tensor<3>, Tensor<3>)> {
    let e = basis(input);
    let l = apply_r(&e, (1, 2), Some(0), lam, v / w, ctx)?;
    let l = apply_r(&l, (0, 2), None, lam, u / w, ctx)?;
    let l = apply_r(&l, (0, 1), Some(2), lam, u / v, ctx)?;
    let r = apply_r(&e, (0, 1), None, lam, u / v, ctx)?;
    let r = apply_r(&r, (0, 2), Some(1), lam, u / w, ctx)?;
    let r = apply_r(&r, (1, 2), None, lam, v / w, ctx)?;
    Ok((l, r))
}

/// Operator-form contraction on all 8 basis inputs versus the index form:
/// the difference of residuals, entry by entry, relative to the term scale.
pub fn operator_consistency(lam: C64, u: C64, v: C64, w: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    for t in ybe_tuples() {
        let [i, j, k, l, m, n] = t;
        let (ol, or) = operator_sides([i, j, k], lam, u, v, w, ctx)?;
        let key = [l, m, n];
        let get = |tv: &Tensor<3>| tv.get(&key).copied().unwrap_or_else(zero);
        let (cl, cr, s) = cyb_sides(t, lam, u, v, w, ctx)?;
        out.push(relative_residual(get(&ol) - get(&or), cl - cr, s, ctx)?);
        out.push(relative_residual(get(&ol), cl, s, ctx)?);
        out.push(relative_residual(get(&or), cr, s, ctx)?);
    }
    // outputs off the weight-conserving set must vanish on both sides
    for i in SIGNS {
        for j in SIGNS {
            for k in SIGNS {
                let (ol, or) = operator_sides([i, j, k], lam, u, v, w, ctx)?;
                for (idx, val) in ol.iter().chain(or.iter()) {
                    if idx.iter().sum::<i32>() != i + j + k {
                        out.push(relative_residual(*val, zero(), 0.0, ctx)?);
                    }
                }
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// `Σ_x W(d x; c b | u/v) W(d a; x b | v/u) = δ_{ac}` over all admissible `(a,b,c,d)`.
pub fn unitarity_check(lam0: C64, u: C64, v: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    let a: Height = 0;
    for b in [a + 1, a - 1] {
        for d in [a + 1, a - 1] {
            for c in [b + 1, b - 1] {
                if (c - d).abs() != 1 {
                    continue;
                }
                let mut s = CompensatedSum::default();
                for x in [d + 1, d - 1] {
                    s.add(height_weight(lam0, d, x, c, b, u / v, ctx)? * height_weight(lam0, d, a, x, b, v / u, ctx)?);
                }
                let target = if a == c { Complex::new(1.0, 0.0) } else { zero() };
                out.push(relative_residual(s.value(), target, s.max_term(), ctx)?);
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// `R^{12}(λ|u,v) R^{21}(λ|v,u) = Id` on the four basis vectors of `V ⊗ V`.
pub fn operator_unitarity(lam: C64, u: C64, v: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let entry_max = |z: C64| -> Result<f64> {
        let mut m = 1f64;
        for a in SIGNS {
            for k in SIGNS {
                m = m.max(r_entry(a, -a, k, -k, lam, z, ctx)?.norm());
            }
        }
        Ok(m)
    };
    let scale = entry_max(u / v)? * entry_max(v / u)?;
    let mut out = Vec::new();
    for i in SIGNS {
        for j in SIGNS {
            // R^{21}(λ|v,u): R(λ|v,u) acting with the two factors exchanged
            let e = basis([j, i]);
            let r21 = apply_r(&e, (0, 1), None, lam, v / u, ctx)?;
            let swapped: Tensor<2> = r21.into_iter().map(|([a, b], c)| ([b, a], c)).collect();
            let res = apply_r(&swapped, (0, 1), None, lam, u / v, ctx)?;
            for a in SIGNS {
                for b in SIGNS {
                    let got = res.get(&[a, b]).copied().unwrap_or_else(zero);
                    let want = if (a, b) == (i, j) {
                        Complex::new(1.0, 0.0)
                    } else {
                        zero()
                    };
                    out.push(relative_residual(got, want, scale, ctx)?);
                }
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// Both symmetries `R^{mn}_{kl}(λ) = R^{-m,-n}_{-k,-l}(-λ) = R^{nm}_{lk}(-λ-k-l)` over all six entries.
pub fn symmetry_check(lam: C64, u: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let mut out = Vec::new();
    for m in SIGNS {
        for n in SIGNS {
            for k in SIGNS {
                let l = m + n - k;
                if l.abs() != 1 {
                    continue;
                }
                let base = r_entry(m, n, k, l, lam, u, ctx)?;
                let s1 = r_entry(-m, -n, -k, -l, -lam, u, ctx)?;
                let s2 = r_entry(n, m, l, k, -lam - (k + l) as f64, u, ctx)?;
                out.push(relative_residual(base, s1, 0.0, ctx)?);
                out.push(relative_residual(base, s2, 0.0, ctx)?);
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// `φ(a,c|u)(x) = θ(s x^±;p)/s`, `s = q^{a(c-a)/2}√u`, with `su` the chosen root of `u`.
pub fn phi_with_root(a: C64, c: C64, su: C64, x: C64, ctx: &EllipticContext) -> Result<C64> {
    let s = qpow(a * (c - a) / 2.0, ctx) * su;
    Ok(theta(s * x, ctx.p, ctx)? * theta(s / x, ctx.p, ctx)? / s)
}

/// `φ(a,c|u)(x)` with the principal `√u`.
pub fn phi(a: C64, c: C64, u: C64, x: C64, ctx: &EllipticContext) -> Result<C64> {
    phi_with_root(a, c, u.sqrt(), x, ctx)
}

fn check_fused_heights(m: usize, a: Height, c: Height) -> Result<usize> {
    let diff = c - a;
    if diff.unsigned_abs() as usize > m || (diff + m as i32) % 2 != 0 {
        return Err(Error::InadmissibleHeights);
    }
    Ok(((m as i32 + diff) / 2) as usize)
}

/// `φ_M(a,c|u)(x)` in closed product form; heights `λ₀ + a`, `λ₀ + c`.
pub fn phi_m_with_root(
    mm: usize,
    lam0: C64,
    a: Height,
    c: Height,
    su: C64,
    x: C64,
    ctx: &EllipticContext,
) -> Result<C64> {
    let k = check_fused_heights(mm, a, c)?;
    let (ah, ch) = (lam0 + a as f64, lam0 + c as f64);
    let mf = mm as f64;
    let pre = qpow((ah * ah - ch * ch + mf * mf) / 4.0, ctx) / su.powi(mm as i32);
    let b1 = qpow((1.0 - mf + ah) / 2.0, ctx) * su;
    let b2 = qpow((1.0 - mf - ah) / 2.0, ctx) * su;
    Ok(pre * h_fn(x, b1, k, ctx)? * h_fn(x, b2, mm - k, ctx)?)
}

/// `φ_M(a,c|u)(x)` with the principal `√u`.
pub fn phi_m(mm: usize, lam0: C64, a: Height, c: Height, u: C64, x: C64, ctx: &EllipticContext) -> Result<C64> {
    phi_m_with_root(mm, lam0, a, c, u.sqrt(), x, ctx)
}

/// `φ_M` as the product `Π_i φ(h_i, h_{i+1} | u q^{i+1-M})` along an explicit height path.
pub fn phi_m_path(path: &[Height], lam0: C64, su: C64, x: C64, ctx: &EllipticContext) -> Result<C64> {
    let mm = path.len() - 1;
    let mut v = Complex::new(1.0, 0.0);
    for (i, pair) in path.windows(2).enumerate() {
        if (pair[1] - pair[0]).abs() != 1 {
            return Err(Error::InadmissibleHeights);
        }
        let shift = qpow_r((i as f64 + 1.0 - mm as f64) / 2.0, ctx);
        v *= phi_with_root(lam0 + pair[0] as f64, lam0 + pair[1] as f64, su * shift, x, ctx)?;
    }
    Ok(v)
}

/// All ±1 paths from `a` to `c` of length `m`.
pub fn height_paths(a: Height, c: Height, m: usize) -> Vec<Vec<Height>> {
    let mut out = Vec::new();
    let mut cur = vec![a];
    fn rec(cur: &mut Vec<Height>, c: Height, left: usize, out: &mut Vec<Vec<Height>>) {
        let last = *cur.last().unwrap();
        if left == 0 {
            if last == c {
                out.push(cur.clone());
            }
            return;
        }
        for s in SIGNS {
            let nxt = last + s;
            if ((c - nxt).unsigned_abs() as usize) < left {
                cur.push(nxt);
                rec(cur, c, left - 1, out);
                cur.pop();
            }
        }
    }
    rec(&mut cur, c, m, &mut out);
    out
}

/// Path independence of `φ_M`: every path product against the closed form.
pub fn phi_path_independence(
    mm: usize,
    lam0: C64,
    a: Height,
    c: Height,
    u: C64,
    x: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let su = u.sqrt();
    let closed = phi_m_with_root(mm, lam0, a, c, su, x, ctx)?;
    let mut out = Vec::new();
    for path in height_paths(a, c, mm) {
        out.push(relative_residual(
            phi_m_path(&path, lam0, su, x, ctx)?,
            closed,
            0.0,
            ctx,
        )?);
    }
    Ok(CheckResult::worst_of(out))
}

/// `φ(a,a+1|u/q)φ(a+1,a|u) = φ(a,a−1|u/q)φ(a−1,a|u)`.
pub fn phi_lemma_check(a: C64, u: C64, x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let su = u.sqrt();
    let sq = qpow_r(-0.5, ctx);
    let one = Complex::new(1.0, 0.0);
    let l = phi_with_root(a, a + one, su * sq, x, ctx)? * phi_with_root(a + one, a, su, x, ctx)?;
    let r = phi_with_root(a, a - one, su * sq, x, ctx)? * phi_with_root(a - one, a, su, x, ctx)?;
    relative_residual(l, r, l.norm().max(r.norm()), ctx)
}

/// `φ(b,d|u) = Σ_c W(a b; c d|u) φ(a,c|uq)` for all four `(b, d)` around `a = λ₀`.
pub fn phi_expansion_check(lam0: C64, su: C64, x: C64, ctx: &EllipticContext) -> Result<CheckResult> {
    let u = su * su;
    let suq = su * qpow_r(0.5, ctx);
    let h = |o: Height| lam0 + o as f64;
    let mut out = Vec::new();
    for b in [1, -1] {
        for d in [b + 1, b - 1] {
            let l = phi_with_root(h(b), h(d), su, x, ctx)?;
            let mut s = CompensatedSum::default();
            for c in [1, -1] {
                s.add(height_weight(lam0, 0, b, c, d, u, ctx)? * phi_with_root(h(0), h(c), suq, x, ctx)?);
            }
            out.push(relative_residual(l, s.value(), s.max_term(), ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// An `M × N` block of the model with fixed corners and boundary paths.
///
/// The top row runs from `a` to `b` (`N` steps), the right column from `b` to
/// `d` (`M` steps); the left column ends at `c`. Heights are offsets from `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedWeightSpec {
    pub m: usize,
    pub n: usize,
    pub lambda: C64,
    pub a: Height,
    pub b: Height,
    pub c: Height,
    pub d: Height,
    pub u: C64,
    pub top: Option<Vec<Height>>,
    pub right: Option<Vec<Height>>,
}

impl FusedWeightSpec {
    pub fn new(m: usize, n: usize, lambda: C64, [a, b, c, d]: [Height; 4], u: C64) -> Self {
        FusedWeightSpec {
            m,
            n,
            lambda,
            a,
            b,
            c,
            d,
            u,
            top: None,
            right: None,
        }
    }

    pub fn with_paths(mut self, top: Vec<Height>, right: Vec<Height>) -> Self {
        self.top = Some(top);
        self.right = Some(right);
        self
    }

    /// Parity and range conditions on the corners.
    pub fn admissible(&self) -> bool {
        check_fused_heights(self.m, self.a, self.c).is_ok()
            && check_fused_heights(self.m, self.b, self.d).is_ok()
            && check_fused_heights(self.n, self.a, self.b).is_ok()
            && check_fused_heights(self.n, self.c, self.d).is_ok()
    }

    fn boundary(&self) -> Result<(Vec<Height>, Vec<Height>)> {
        if !self.admissible() {
            return Err(Error::InadmissibleHeights);
        }
        let straight = |from: Height, to: Height, len: usize| -> Vec<Height> {
            let ups = ((len as i32 + to - from) / 2) as usize;
            let mut v = vec![from];
            for j in 0..len {
                let last = *v.last().unwrap();
                v.push(if j < ups { last + 1 } else { last - 1 });
            }
            v
        };
        let top = self.top.clone().unwrap_or_else(|| straight(self.a, self.b, self.n));
        let right = self.right.clone().unwrap_or_else(|| straight(self.b, self.d, self.m));
        let valid = |p: &[Height], from: Height, to: Height, len: usize| {
            p.len() == len + 1 && p[0] == from && p[len] == to && p.windows(2).all(|w| (w[1] - w[0]).abs() == 1)
        };
        if !valid(&top, self.a, self.b, self.n) || !valid(&right, self.b, self.d, self.m) {
            return Err(Error::InadmissibleHeights);
        }
        Ok((top, right))
    }
}

/// Partition function of the fused block by row-by-row dynamic programming.
///
/// The face in row `i`, column `j` (0-based) carries spectral parameter `u q^{i-j}`.
pub fn fused_weight(spec: &FusedWeightSpec, ctx: &EllipticContext) -> Result<C64> {
    Ok(fused_weight_scaled(spec, ctx)?.0)
}

/// [`fused_weight`] together with the sum of the moduli of all configuration
/// weights, the natural scale for cancellation in the partition function.
pub fn fused_weight_scaled(spec: &FusedWeightSpec, ctx: &EllipticContext) -> Result<(C64, f64)> {
    let (top, right) = spec.boundary()?;
    let (mm, nn) = (spec.m, spec.n);
    let mut rows: BTreeMap<Vec<Height>, (C64, f64)> = BTreeMap::new();
    rows.insert(top, (Complex::new(1.0, 0.0), 1.0));
    for i in 1..=mm {
        let mut next: BTreeMap<Vec<Height>, (C64, f64)> = BTreeMap::new();
        for (prev, &(wt, mag)) in &rows {
            for steps in 0..(1u32 << nn) {
                let mut row: Vec<Height> = (0..nn)
                    .map(|j| prev[j] + if steps >> j & 1 == 1 { -1 } else { 1 })
                    .collect();
                row.push(right[i]);
                if i == mm && row[0] != spec.c {
                    continue;
                }
                if row.windows(2).any(|w| (w[1] - w[0]).abs() != 1) {
                    continue;
                }
                let (mut w, mut m) = (wt, mag);
                for j in 0..nn {
                    let z = spec.u * qpow_r(i as f64 - 1.0 - j as f64, ctx);
                    let f = height_weight(spec.lambda, prev[j], prev[j + 1], row[j], row[j + 1], z, ctx)?;
                    w *= f;
                    m *= f.norm();
                    if w == zero() {
                        break;
                    }
                }
                let e = next.entry(row).or_insert((zero(), 0.0));
                e.0 += w;
                e.1 += m;
            }
        }
        rows = next;
    }
    Ok(rows.values().fold((zero(), 0.0), |(v, m), &(w, n)| (v + w, m + n)))
}

/// The same partition function by enumerating every interior height assignment.
pub fn fused_weight_naive(spec: &FusedWeightSpec, ctx: &EllipticContext) -> Result<C64> {
    let (top, right) = spec.boundary()?;
    let (mm, nn) = (spec.m, spec.n);
    let mut grid = vec![vec![0 as Height; nn + 1]; mm + 1];
    grid[0] = top;
    for (i, r) in right.iter().enumerate() {
        grid[i][nn] = *r;
    }
    grid[mm][0] = spec.c;
    let free: Vec<(usize, usize)> = (1..=mm)
        .flat_map(|i| (0..nn).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == mm && j == 0))
        .collect();
    let span = (mm + nn) as Height;
    let mut total = zero();
    let count = free.len() as u32;
    let width = (2 * span + 1) as u64;
    for code in 0..width.pow(count) {
        let mut c = code;
        for &(i, j) in &free {
            grid[i][j] = spec.a - span + (c % width) as Height;
            c /= width;
        }
        let mut w = Complex::new(1.0, 0.0);
        'faces: for i in 1..=mm {
            for j in 0..nn {
                let (a, b, cc, d) = (grid[i - 1][j], grid[i - 1][j + 1], grid[i][j], grid[i][j + 1]);
                if [(a, b), (a, cc), (b, d), (cc, d)]
                    .iter()
                    .any(|(x, y)| (x - y).abs() != 1)
                {
                    w = zero();
                    break 'faces;
                }
                w *= height_weight(
                    spec.lambda,
                    a,
                    b,
                    cc,
                    d,
                    spec.u * qpow_r(i as f64 - 1.0 - j as f64, ctx),
                    ctx,
                )?;
            }
        }
        total += w;
    }
    Ok(total)
}

/// Every pair of boundary paths gives the same partition function.
pub fn path_independence_check(spec: &FusedWeightSpec, ctx: &EllipticContext) -> Result<CheckResult> {
    let (base, bs) = fused_weight_scaled(spec, ctx)?;
    let mut out = Vec::new();
    for top in height_paths(spec.a, spec.b, spec.n) {
        for right in height_paths(spec.b, spec.d, spec.m) {
            let alt = spec.clone().with_paths(top.clone(), right);
            let (v, vs) = fused_weight_scaled(&alt, ctx)?;
            out.push(relative_residual(v, base, vs.max(bs), ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// Closed form of `W_MM` through the connection coefficients, with `su` the chosen `√u`.
pub fn fused_closed_form(spec: &FusedWeightSpec, su: C64, ctx: &EllipticContext) -> Result<C64> {
    if spec.m != spec.n {
        return Err(Error::InvalidArgument("closed form needs M = N".into()));
    }
    if !spec.admissible() {
        return Err(Error::InadmissibleHeights);
    }
    let h = |o: Height| spec.lambda + o as f64;
    let (a, b, c, d) = (h(spec.a), h(spec.b), h(spec.c), h(spec.d));
    let (mf, nf) = (spec.m as f64, spec.n as f64);
    let k = ((spec.m as i32 + spec.d - spec.b) / 2) as usize;
    let l = ((spec.m as i32 + spec.c - spec.a) / 2) as usize;
    let pre = qpow((b * b + c * c - a * a - d * d + 2.0 * mf * nf) / 4.0, ctx);
    let r = rkl_double_sum(
        qpow((1.0 - mf + b) / 2.0, ctx) * su,
        qpow((1.0 - mf - b) / 2.0, ctx) * su,
        qpow((1.0 - mf + nf + a) / 2.0, ctx) * su,
        qpow((1.0 - mf + nf - a) / 2.0, ctx) * su,
        spec.m,
        k,
        l,
        ctx,
    )?;
    Ok(pre * r)
}

/// Partition function against the connection-coefficient closed form (`M = N`).
pub fn fused_vs_connection(spec: &FusedWeightSpec, ctx: &EllipticContext) -> Result<CheckResult> {
    let (w, ws) = fused_weight_scaled(spec, ctx)?;
    let f = fused_closed_form(spec, spec.u.sqrt(), ctx)?;
    relative_residual(w, f, ws, ctx)
}

/// `φ_M(b,d|u q^{M−N}) = Σ_c W_MN(a b; c d|u) φ_M(a,c|u q^M)` for all admissible
/// `b, d` around `a = 0`, at the point `x`.
pub fn fused_expansion_check(
    mm: usize,
    nn: usize,
    lam0: C64,
    u: C64,
    x: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let su = u.sqrt();
    let (mf, nf) = (mm as f64, nn as f64);
    let su_l = su * qpow_r((mf - nf) / 2.0, ctx);
    let su_r = su * qpow_r(mf / 2.0, ctx);
    let mut out = Vec::new();
    let a = 0;
    for b in (-(nn as i32)..=nn as i32).step_by(2) {
        for d in (b - mm as i32..=b + mm as i32).step_by(2) {
            let l = phi_m_with_root(mm, lam0, b, d, su_l, x, ctx)?;
            let mut s = CompensatedSum::default();
            let mut scale = 0f64;
            for c in (a - mm as i32..=a + mm as i32).step_by(2) {
                let spec = FusedWeightSpec::new(mm, nn, lam0, [a, b, c, d], u);
                if !spec.admissible() {
                    continue;
                }
                let (w, ws) = fused_weight_scaled(&spec, ctx)?;
                let ph = phi_m_with_root(mm, lam0, a, c, su_r, x, ctx)?;
                s.add(w * ph);
                scale = scale.max(ws * ph.norm());
            }
            out.push(relative_residual(l, s.value(), scale.max(s.max_term()), ctx)?);
        }
    }
    Ok(CheckResult::worst_of(out))
}

fn fused_or_zero(mm: usize, nn: usize, lam0: C64, h: [Height; 4], z: C64, ctx: &EllipticContext) -> Result<(C64, f64)> {
    let spec = FusedWeightSpec::new(mm, nn, lam0, h, z);
    if spec.admissible() {
        fused_weight_scaled(&spec, ctx)
    } else {
        Ok((zero(), 0.0))
    }
}

/// Yang–Baxter equation for fused weights with multiplicities `(M, N, P)`,
/// worst over all admissible exterior heights around `a = 0`.
pub fn fused_yang_baxter(
    mm: usize,
    nn: usize,
    pp: usize,
    lam0: C64,
    u: C64,
    v: C64,
    w: C64,
    ctx: &EllipticContext,
) -> Result<CheckResult> {
    let (mi, ni, pi) = (mm as i32, nn as i32, pp as i32);
    let range = mi + ni + pi;
    let f = |m, n, h, z| fused_or_zero(m, n, lam0, h, z, ctx);
    let mut out = Vec::new();
    let a = 0;
    for b in (a - ni..=a + ni).step_by(2) {
        for c in (b - mi..=b + mi).step_by(2) {
            for fh in (a - pi..=a + pi).step_by(2) {
                for e in (fh - mi..=fh + mi).step_by(2) {
                    for d in (e - ni..=e + ni).step_by(2) {
                        if check_fused_heights(pp, d, c).is_err() {
                            continue;
                        }
                        let mut l = CompensatedSum::default();
                        let mut r = CompensatedSum::default();
                        let mut scale = 0f64;
                        let prod3 = |t: [(C64, f64); 3]| (t[0].0 * t[1].0 * t[2].0, t[0].1 * t[1].1 * t[2].1);
                        for x in a - range..=a + range {
                            let (lv, ls) = prod3([
                                f(mm, nn, [a, b, x, c], u / v)?,
                                f(mm, pp, [fh, a, e, x], u / w)?,
                                f(nn, pp, [e, x, d, c], v / w)?,
                            ]);
                            let (rv, rs) = prod3([
                                f(nn, pp, [fh, a, x, b], v / w)?,
                                f(mm, pp, [x, b, d, c], u / w)?,
                                f(mm, nn, [fh, x, e, d], u / v)?,
                            ]);
                            l.add(lv);
                            r.add(rv);
                            scale = scale.max(ls).max(rs);
                        }
                        out.push(relative_residual(l.value(), r.value(), scale, ctx)?);
                    }
                }
            }
        }
    }
    Ok(CheckResult::worst_of(out))
}

/// Height base `λ₀` off the integer lattice by at least 0.1 in the real direction.
pub fn draw_lambda(s: &mut Sampler) -> C64 {
    let k = s.real(-3.0, 3.0).floor();
    Complex::new(k + s.real(0.1, 0.9), s.real(-0.5, 0.5))
}

/// Spectral parameter with modulus in `[0.5, 1.5]`.
pub fn draw_spectral(s: &mut Sampler) -> C64 {
    s.complex(0.5, 1.5)
}
