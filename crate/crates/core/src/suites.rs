//! Seeded identity suites: each check runs a number of trials, each trial with
//! its own derived seed, so results do not depend on scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex;

use crate::beta::{
    continuous_biorthogonality, draw_biorthogonal_params, draw_spiridonov_in, ellipticity_criterion, radius_robustness,
    residue_series_link, shift_ratio_check, spiridonov_spec_eval,
};
use crate::biorthogonal::{self, biorthogonality_check, BiorthogonalFamily};
use crate::error::{Error, Result};
use crate::gamma::{
    efac_via_gamma, functional_equation_check, inversion_check, nome_symmetry_check, reflection_shift_check,
    residue_constant_check,
};
use crate::numerics::{relative_residual, with_redraws, CheckResult, EllipticContext, Sampler, Witness};
use crate::series::{
    bailey_iterated, bailey_transform, bibasic_check, binomial_expansion_check, connection_check, e_reversal_check,
    frenkel_turaev, indefinite_step_check, indefinite_sum_check, kronecker_check, matrix_inversion_check, minton_sum,
    pascal_recursion_check, rkl_addition_convolution_suite, rkl_coefficient_scaled, rkl_double_sum_scaled,
    rkl_symmetry_check, rkl_unitarity_check, saalschutz_limit, saalschutz_nome, telescoping_theta,
    total_ellipticity_check, v_even_vanishing, warnaar_b_symmetry, warnaar_quadratic, SeriesSpec,
};
use crate::sos::{
    draw_lambda, draw_spectral, four_term_check, fused_expansion_check, fused_vs_connection, fused_weight,
    fused_weight_naive, fused_yang_baxter, operator_consistency, operator_unitarity, path_independence_check,
    phi_expansion_check, phi_lemma_check, phi_path_independence, symmetry_check, unitarity_check, yang_baxter_check,
    FusedWeightSpec,
};
use crate::theta::{quasi_shift, theta, theta_multi, theta_series};
use crate::toolkit::{
    efac_identity_suite, elliptic_number, frobenius_determinant, number_identity, partial_fraction_suite, sbt_identity,
    three_term,
};
use crate::C64;

/// The named suites, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Theta,
    Toolkit,
    Series,
    FrenkelTuraev,
    Bailey,
    Quadratic,
    Minton,
    Biorthogonal,
    Gamma,
    BetaIntegral,
    Sos,
    Fusion,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Theta,
        Suite::Toolkit,
        Suite::Series,
        Suite::FrenkelTuraev,
        Suite::Bailey,
        Suite::Quadratic,
        Suite::Minton,
        Suite::Biorthogonal,
        Suite::Gamma,
        Suite::BetaIntegral,
        Suite::Sos,
        Suite::Fusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theta => "theta",
            Suite::Toolkit => "toolkit",
            Suite::Series => "series",
            Suite::FrenkelTuraev => "frenkel-turaev",
            Suite::Bailey => "bailey",
            Suite::Quadratic => "quadratic",
            Suite::Minton => "minton",
            Suite::Biorthogonal => "biorthogonal",
            Suite::Gamma => "gamma",
            Suite::BetaIntegral => "beta-integral",
            Suite::Sos => "sos",
            Suite::Fusion => "fusion",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn checks(self) -> Vec<CheckDef> {
        match self {
            Suite::Theta => theta_checks(),
            Suite::Toolkit => toolkit_checks(),
            Suite::Series => series_checks(),
            Suite::FrenkelTuraev => ft_checks(),
            Suite::Bailey => bailey_checks(),
            Suite::Quadratic => quadratic_checks(),
            Suite::Minton => minton_checks(),
            Suite::Biorthogonal => biorthogonal_checks(),
            Suite::Gamma => gamma_checks(),
            Suite::BetaIntegral => beta_checks(),
            Suite::Sos => sos_checks(),
            Suite::Fusion => fusion_checks(),
        }
    }
}

/// One trial: labelled inputs and the comparison outcome.
pub type Outcome = (Witness, CheckResult);

/// A named identity with its default trial count and tolerance.
#[derive(Clone, Copy)]
pub struct CheckDef {
    pub id: &'static str,
    pub trials: usize,
    pub tol: f64,
    pub run: fn(&EllipticContext, usize) -> Result<Outcome>,
}

/// Result of one trial of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub id: String,
    pub trial: usize,
    pub params: Witness,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
    pub error: Option<String>,
}

/// Overrides applied to every check of a suite.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuiteOptions {
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

/// Runs a suite; records are sorted by `(id, trial)`.
pub fn run_suite(suite: Suite, ctx: &EllipticContext, opts: SuiteOptions) -> Vec<CheckRecord> {
    run_checks(&suite.checks(), ctx, opts)
}

/// Runs checks concurrently over a pool of scoped threads.
pub fn run_checks(checks: &[CheckDef], ctx: &EllipticContext, opts: SuiteOptions) -> Vec<CheckRecord> {
    let jobs: Vec<(usize, usize)> = checks
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..opts.trials.unwrap_or(c.trials)).map(move |t| (i, t)))
        .collect();
    let threads = opts
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, t)) = jobs.get(j) else { break };
                let rec = run_one(&checks[i], t, ctx, opts.tol);
                out.lock().unwrap().push(rec);
            });
        }
    });
    let mut recs = out.into_inner().unwrap();
    recs.sort_by(|a, b| a.id.cmp(&b.id).then(a.trial.cmp(&b.trial)));
    recs
}

fn run_one(check: &CheckDef, trial: usize, ctx: &EllipticContext, tol: Option<f64>) -> CheckRecord {
    let tctx = ctx.for_trial(trial as u64).with_tol(tol.unwrap_or(check.tol));
    let mut rec = CheckRecord {
        id: check.id.to_string(),
        trial,
        params: Vec::new(),
        residual: f64::NAN,
        scale: f64::NAN,
        pass: false,
        error: None,
    };
    match (check.run)(&tctx, trial) {
        Ok((params, r)) => {
            rec.params = if params.is_empty() {
                r.witness.clone().unwrap_or_default()
            } else {
                params
            };
            rec.residual = r.residual;
            rec.scale = r.scale;
            rec.pass = r.pass;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn real(x: f64) -> C64 {
    c(x, 0.0)
}

fn w(pairs: &[(&str, C64)]) -> Witness {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn wv(name: &str, v: &[C64]) -> Witness {
    v.iter().enumerate().map(|(j, &x)| (format!("{name}{j}"), x)).collect()
}

fn def(id: &'static str, trials: usize, tol: f64, run: fn(&EllipticContext, usize) -> Result<Outcome>) -> CheckDef {
    CheckDef { id, trials, tol, run }
}

/// Nomes on which the theta constant is checked, cycled by trial.
pub const THETA_CONSTANT_NOMES: [(f64, f64); 4] = [(0.1, 0.0), (0.4, 0.0), (0.2, 0.3), (-0.35, 0.0)];

fn theta_checks() -> Vec<CheckDef> {
    vec![
        def("theta.constant", 4, 1e-12, |ctx, t| {
            let (re, im) = THETA_CONSTANT_NOMES[t % 4];
            let p = c(re, im);
            let sp = p.sqrt();
            let v = theta_multi(&[real(-1.0), sp, -sp], p, ctx)?;
            Ok((w(&[("p", p)]), relative_residual(v, real(2.0), 0.0, ctx)?))
        }),
        def("theta.product_vs_series", 64, 1e-12, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let x = s.complex(0.3, 2.0);
                let r = relative_residual(theta(x, ctx.p, ctx)?, theta_series(x, ctx.p, ctx)?, 0.0, ctx)?;
                Ok((w(&[("x", x), ("p", ctx.p)]), r))
            })
        }),
        def("theta.quasi_periodicity", 32, 1e-12, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let x = s.complex(0.3, 2.0);
                let k = (t % 5) as i32 - 2;
                let direct = theta(ctx.p.powi(k) * x, ctx.p, ctx)?;
                let r = relative_residual(quasi_shift(x, ctx.p, k, ctx)?, direct, 0.0, ctx)?;
                Ok((w(&[("x", x), ("k", real(k as f64))]), r))
            })
        }),
        def("theta.reflection", 32, 1e-12, |ctx, _| {
            with_redraws(ctx, 3, |s| {
                let x = s.complex(0.3, 2.0);
                let l = theta(1.0 / x, ctx.p, ctx)?;
                let r = -theta(x, ctx.p, ctx)? / x;
                Ok((w(&[("x", x)]), relative_residual(l, r, 0.0, ctx)?))
            })
        }),
    ]
}

fn toolkit_checks() -> Vec<CheckDef> {
    vec![
        def("toolkit.three_term", 100, 1e-9, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let v = s.params(4);
                Ok((Vec::new(), three_term(v[0], v[1], v[2], v[3], ctx)?))
            })
        }),
        def("toolkit.partial_fractions", 100, 1e-9, |ctx, t| {
            let n = 2 + t % 7;
            Ok((w(&[("n", real(n as f64))]), partial_fraction_suite(n, ctx)?))
        }),
        def("toolkit.antisymmetric_product", 100, 1e-9, |ctx, t| {
            let n = 1 + t % 8;
            Ok((w(&[("n", real(n as f64))]), sbt_identity(n, ctx)?))
        }),
        def("toolkit.frobenius", 20, 1e-9, |ctx, t| {
            let n = 1 + t % 5;
            Ok((w(&[("n", real(n as f64))]), frobenius_determinant(n, ctx)?))
        }),
        def("toolkit.factorial_rules", 32, 1e-9, |ctx, _| {
            Ok((Vec::new(), efac_identity_suite(ctx)?))
        }),
        def("toolkit.elliptic_numbers", 32, 1e-9, |ctx, _| {
            with_redraws(ctx, 2, |s| {
                let (z, a, b, cc, tau) = crate::toolkit::draw_number_args(s);
                let r = number_identity(|x| elliptic_number(x, tau, ctx), z, a, b, cc, ctx)?;
                Ok((w(&[("z", z), ("a", a), ("b", b), ("c", cc), ("tau", tau)]), r))
            })
        }),
    ]
}

fn series_checks() -> Vec<CheckDef> {
    vec![
        def("series.e_reversal", 32, 1e-9, |ctx, t| {
            with_redraws(ctx, 1, |s| {
                let m = 2 + t % 2;
                let n = 1 + t % 5;
                let a = s.params(m);
                let mut b = s.params(m - 1);
                let last = ctx.q.powi(-(n as i32)) * a.iter().product::<C64>() / (ctx.q * b.iter().product::<C64>());
                b.push(last);
                let z = s.param();
                let spec = SeriesSpec::e(a.clone(), b, n, z).balanced();
                Ok((wv("a", &a), e_reversal_check(&spec, ctx)?))
            })
        }),
        def("series.v_even_vanishing", 16, 1e-9, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let n = 2 * (1 + t % 3);
                let b = s.params(2 * (1 + t % 2));
                Ok((wv("b", &b), v_even_vanishing(&b, n, ctx)?))
            })
        }),
        def("series.binomial_expansion", 32, 1e-9, |ctx, t| {
            with_redraws(ctx, 3, |s| {
                let v = s.params(4);
                let n = t % 6;
                Ok((wv("v", &v), binomial_expansion_check(n, v[0], v[1], v[2], v[3], ctx)?))
            })
        }),
        def("series.pascal", 32, 1e-9, |ctx, t| {
            with_redraws(ctx, 4, |s| {
                let v = s.params(3);
                let n = t % 6;
                let k = s.index(n + 2);
                Ok((wv("v", &v), pascal_recursion_check(n, k, v[0], v[1], v[2], ctx)?))
            })
        }),
        def("series.connection", 24, 1e-9, |ctx, t| {
            with_redraws(ctx, 5, |s| {
                let v = s.params(4);
                let n = 1 + t % 4;
                let k = s.index(n + 1);
                let l = s.index(n + 1);
                let x = s.param();
                let (closed, s1) = rkl_coefficient_scaled(v[0], v[1], v[2], v[3], n, k, l, ctx)?;
                let (comp, s2) = rkl_double_sum_scaled(v[0], v[1], v[2], v[3], n, k, l, ctx)?;
                let r = relative_residual(closed, comp, s1.max(s2), ctx)?
                    .worst(connection_check(v[0], v[1], v[2], v[3], n, k, x, ctx)?)
                    .worst(rkl_symmetry_check(v[0], v[1], v[2], v[3], n, ctx)?);
                Ok((wv("v", &v), r))
            })
        }),
        def("series.addition_convolution", 8, 1e-9, |ctx, _| {
            with_redraws(ctx, 6, |s| {
                let v = s.params(6);
                let pars = [v[0], v[1], v[2], v[3], v[4], v[5]];
                Ok((wv("v", &v), rkl_addition_convolution_suite(pars, ctx)?))
            })
        }),
        def("series.indefinite", 24, 1e-9, |ctx, t| {
            with_redraws(ctx, 7, |s| {
                let v = s.params(4);
                let n = t % 7;
                let r = indefinite_sum_check(v[0], v[1], v[2], v[3], n, ctx)?
                    .worst(indefinite_step_check(v[0], v[1], v[2], v[3], n, ctx)?);
                Ok((wv("v", &v), r))
            })
        }),
        def("series.total_ellipticity", 16, 1e-9, |ctx, t| {
            with_redraws(ctx, 8, |s| {
                let x = s.params(3);
                let z = s.param();
                let alphas: [[i64; 4]; 3] = [[0, 1, -1, 0], [1, 0, 0, 0], [0, 2, -1, -1]];
                let r = total_ellipticity_check(&x, &alphas[t % 3], 3, z, ctx)?;
                Ok((wv("x", &x), r))
            })
        }),
        def("series.matrix_inversion", 12, 1e-9, |ctx, t| {
            with_redraws(ctx, 9, |s| {
                let n = 1 + t % 6;
                let (y, z) = (s.params(n), s.params(n));
                Ok((wv("y", &y), matrix_inversion_check(&y, &z, ctx)?))
            })
        }),
    ]
}

fn ft_checks() -> Vec<CheckDef> {
    vec![
        def("frenkel-turaev.sum", 100, 1e-9, |ctx, t| {
            with_redraws(ctx, 1, |s| {
                let v = s.params(4);
                let n = t % 9;
                let mut wit = wv("v", &v);
                wit.push(("n".into(), real(n as f64)));
                Ok((wit, frenkel_turaev(v[0], v[1], v[2], v[3], n, ctx)?))
            })
        }),
        def("frenkel-turaev.saalschutz_limit", 20, 1e-9, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let v = s.params(4);
                let n = t % 7;
                Ok((
                    wv("v", &v),
                    saalschutz_limit(v[0], v[1], v[2], v[3], n, saalschutz_nome(n, ctx), ctx)?,
                ))
            })
        }),
    ]
}

fn bailey_checks() -> Vec<CheckDef> {
    vec![
        def("bailey.transform", 50, 1e-9, |ctx, t| {
            with_redraws(ctx, 1, |s| {
                let v = s.params(6);
                let n = t % 6;
                Ok((
                    wv("v", &v),
                    bailey_transform(v[0], v[1], v[2], v[3], v[4], v[5], n, ctx)?,
                ))
            })
        }),
        def("bailey.iterated", 10, 1e-9, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let v = s.params(6);
                Ok((
                    wv("v", &v),
                    bailey_iterated(v[0], v[1], v[2], v[3], v[4], v[5], t % 4, ctx)?,
                ))
            })
        }),
        def("bailey.connection_unitarity", 20, 1e-9, |ctx, t| {
            with_redraws(ctx, 3, |s| {
                let v = s.params(4);
                let n = t % 5;
                Ok((wv("v", &v), rkl_unitarity_check(v[0], v[1], v[2], v[3], n, ctx)?))
            })
        }),
    ]
}

/// Bases of the bibasic and Kronecker checks.
pub const BIBASIC_BASES: (f64, f64) = (0.3, 0.45);

fn quadratic_checks() -> Vec<CheckDef> {
    vec![
        def("quadratic.telescoping", 20, 1e-9, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let (a, b, cc, d) = (s.params(8), s.params(8), s.params(8), s.params(8));
                Ok((wv("a", &a), telescoping_theta(&a, &b, &cc, &d, ctx)?))
            })
        }),
        def("quadratic.bibasic", 24, 1e-9, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let v = s.params(4);
                let (q, r) = (real(BIBASIC_BASES.0), real(BIBASIC_BASES.1));
                Ok((wv("v", &v), bibasic_check(v[0], v[1], v[2], v[3], q, r, t % 6, ctx)?))
            })
        }),
        def("quadratic.kronecker", 20, 1e-9, |ctx, t| {
            with_redraws(ctx, 3, |s| {
                let (cc, d) = (s.param(), s.param());
                let (q, r) = (real(BIBASIC_BASES.0), real(BIBASIC_BASES.1));
                Ok((w(&[("c", cc), ("d", d)]), kronecker_check(cc, d, q, r, t % 5, ctx)?))
            })
        }),
        def("quadratic.warnaar", 25, 1e-9, |ctx, t| {
            with_redraws(ctx, 4, |s| {
                let v = s.params(3);
                let n = t % 5;
                let r =
                    warnaar_quadratic(v[0], v[1], v[2], n, ctx)?.worst(warnaar_b_symmetry(v[0], v[1], v[2], n, ctx)?);
                Ok((wv("v", &v), r))
            })
        }),
    ]
}

fn minton_checks() -> Vec<CheckDef> {
    vec![def("minton.sum", 50, 1e-9, |ctx, _| {
        with_redraws(ctx, 1, |s| {
            let r = 1 + s.index(3);
            let budget = s.index(6);
            let mut m = vec![0usize; r];
            for _ in 0..budget {
                m[s.index(r)] += 1;
            }
            let (a, b) = (s.param(), s.param());
            let cs = s.params(r);
            let mut wit = w(&[("a", a), ("b", b)]);
            wit.extend(wv("c", &cs));
            wit.extend(m.iter().enumerate().map(|(j, &x)| (format!("m{j}"), real(x as f64))));
            Ok((wit, minton_sum(a, b, &cs, &m, ctx)?))
        })
    })]
}

fn biorthogonal_checks() -> Vec<CheckDef> {
    vec![
        def("biorthogonal.discrete", 10, 1e-9, |ctx, t| {
            let n = 1 + t % 6;
            with_redraws(ctx, 1, |s| {
                let fam = BiorthogonalFamily::draw(s, n, ctx)?;
                Ok((wv("t", &fam.params()), biorthogonality_check(&fam, ctx)?))
            })
        }),
        def("biorthogonal.parameter_symmetry", 16, 1e-9, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let v = s.params(5);
                let f = ctx.q / v.iter().product::<C64>();
                let pr = [v[0], v[1], v[2], v[3], v[4], f];
                let x = s.param();
                Ok((wv("t", &pr), biorthogonal::symmetry_check(t % 4, x, &pr, ctx)?))
            })
        }),
        def("biorthogonal.continuous", 4, 1e-9, |ctx, t| {
            let (k, l) = [(0, 1), (1, 0), (1, 2), (2, 1)][t % 4];
            with_redraws(ctx, 3, |s| {
                let tp = draw_biorthogonal_params(s, ctx)?;
                Ok((wv("t", &tp), continuous_biorthogonality(&tp, k, l, tp[3], ctx)?))
            })
        }),
    ]
}

fn gamma_checks() -> Vec<CheckDef> {
    fn point(ctx: &EllipticContext, f: fn(C64, &EllipticContext) -> Result<CheckResult>) -> Result<Outcome> {
        with_redraws(ctx, 1, |s| {
            let x = s.complex(0.4, 1.6);
            Ok((w(&[("x", x)]), f(x, ctx)?))
        })
    }
    vec![
        def("gamma.functional_equation", 32, 1e-10, |ctx, _| {
            point(ctx, functional_equation_check)
        }),
        def("gamma.inversion", 32, 1e-10, |ctx, _| point(ctx, inversion_check)),
        def("gamma.nome_symmetry", 32, 1e-10, |ctx, _| {
            point(ctx, nome_symmetry_check)
        }),
        def("gamma.reflection_shift", 32, 1e-10, |ctx, _| {
            point(ctx, reflection_shift_check)
        }),
        def("gamma.factorial", 16, 1e-10, |ctx, t| {
            with_redraws(ctx, 2, |s| {
                let a = s.param();
                Ok((w(&[("a", a)]), efac_via_gamma(a, t % 6, ctx)?))
            })
        }),
        def("gamma.residue_constant", 4, 1e-8, |ctx, _| {
            with_redraws(ctx, 3, |s| {
                let x = s.complex(0.4, 0.9);
                Ok((w(&[("t", x)]), residue_constant_check(x, ctx)?))
            })
        }),
    ]
}

/// Largest `|t_j|` in the beta-integral draws.
pub const BETA_T_MAX: f64 = 0.8;

fn beta_checks() -> Vec<CheckDef> {
    vec![
        def("beta-integral.spiridonov", 25, 1e-7, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let spec = draw_spiridonov_in(s, BETA_T_MAX, ctx.p, ctx.q)?;
                Ok((wv("t", &spec.t), spiridonov_spec_eval(&spec, ctx)?))
            })
        }),
        def("beta-integral.radius_robustness", 10, 1e-7, |ctx, _| {
            with_redraws(ctx, 2, |s| {
                let spec = draw_spiridonov_in(s, BETA_T_MAX, ctx.p, ctx.q)?;
                Ok((wv("t", &spec.t), radius_robustness(&spec, ctx)?))
            })
        }),
        def("beta-integral.shift_ratio", 12, 1e-9, |ctx, t| {
            with_redraws(ctx, 3, |s| {
                let spec = draw_spiridonov_in(s, BETA_T_MAX, ctx.p, ctx.q)?;
                let x = s.complex(0.7, 1.3);
                let r = shift_ratio_check(&spec, x, 1 + t % 3, ctx)?.worst(ellipticity_criterion(&spec, x, ctx)?);
                Ok((wv("t", &spec.t), r))
            })
        }),
        def("beta-integral.residue_series", 4, 1e-8, |ctx, _| {
            with_redraws(ctx, 4, |s| {
                let u: Vec<C64> = (0..5).map(|_| s.complex(0.5, 1.2)).collect();
                let ua = [u[0], u[1], u[2], u[3], u[4]];
                Ok((wv("u", &u), residue_series_link(ua, 2, ctx)?))
            })
        }),
    ]
}

fn sos_draw(s: &mut Sampler) -> (C64, C64, C64, C64) {
    (draw_lambda(s), draw_spectral(s), draw_spectral(s), draw_spectral(s))
}

fn sos_wit(l: C64, u: C64, v: C64, x: C64) -> Witness {
    w(&[("lambda", l), ("u", u), ("v", v), ("w", x)])
}

fn sos_checks() -> Vec<CheckDef> {
    vec![
        def("sos.yang_baxter", 20, 1e-12, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let (l, u, v, x) = sos_draw(s);
                Ok((sos_wit(l, u, v, x), yang_baxter_check(l, u, v, x, ctx)?))
            })
        }),
        def("sos.four_term", 20, 1e-12, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let (l, u, v, x) = sos_draw(s);
                Ok((sos_wit(l, u, v, x), four_term_check(l, u, v, x, ctx)?))
            })
        }),
        def("sos.operator_form", 20, 1e-13, |ctx, _| {
            with_redraws(ctx, 1, |s| {
                let (l, u, v, x) = sos_draw(s);
                Ok((sos_wit(l, u, v, x), operator_consistency(l, u, v, x, ctx)?))
            })
        }),
        def("sos.unitarity", 20, 1e-12, |ctx, _| {
            with_redraws(ctx, 2, |s| {
                let (l, u, v, _) = sos_draw(s);
                let r = unitarity_check(l, u, v, ctx)?.worst(operator_unitarity(l, u, v, ctx)?);
                Ok((w(&[("lambda", l), ("u", u), ("v", v)]), r))
            })
        }),
        def("sos.symmetries", 20, 1e-12, |ctx, _| {
            with_redraws(ctx, 3, |s| {
                let (l, u) = (draw_lambda(s), draw_spectral(s));
                Ok((w(&[("lambda", l), ("u", u)]), symmetry_check(l, u, ctx)?))
            })
        }),
        def("sos.phi_lemma", 20, 1e-12, |ctx, _| {
            with_redraws(ctx, 4, |s| {
                let (l, u, x) = (draw_lambda(s), draw_spectral(s), s.complex(0.6, 1.4));
                Ok((w(&[("lambda", l), ("u", u), ("x", x)]), phi_lemma_check(l, u, x, ctx)?))
            })
        }),
        def("sos.phi_paths", 12, 1e-12, |ctx, t| {
            with_redraws(ctx, 5, |s| {
                let (l, u, x) = (draw_lambda(s), draw_spectral(s), s.complex(0.6, 1.4));
                let m = 1 + t % 3;
                let cc = m as i32 - 2 * s.index(m + 1) as i32;
                Ok((
                    w(&[("lambda", l), ("u", u), ("x", x)]),
                    phi_path_independence(m, l, 0, cc, u, x, ctx)?,
                ))
            })
        }),
        def("sos.phi_expansion", 10, 1e-12, |ctx, _| phi_expansion_trial(ctx, 1.0)),
        def("sos.phi_expansion_opposite_root", 10, 1e-12, |ctx, _| {
            phi_expansion_trial(ctx, -1.0)
        }),
    ]
}

fn phi_expansion_trial(ctx: &EllipticContext, sign: f64) -> Result<Outcome> {
    with_redraws(ctx, 6, |s| {
        let (l, u) = (draw_lambda(s), draw_spectral(s));
        let mut out = Vec::new();
        for _ in 0..8 {
            let x = s.complex(0.6, 1.4);
            out.push(phi_expansion_check(l, sign * u.sqrt(), x, ctx)?);
        }
        Ok((w(&[("lambda", l), ("u", u)]), CheckResult::worst_of(out)))
    })
}

/// Random admissible corners `(0, b, c, d)` for an `M × N` block.
pub fn draw_corners(s: &mut Sampler, m: usize, n: usize) -> [i32; 4] {
    let (mi, ni) = (m as i32, n as i32);
    let b = ni - 2 * s.index(n + 1) as i32;
    let cc = mi - 2 * s.index(m + 1) as i32;
    let ds: Vec<i32> = (b - mi..=b + mi)
        .step_by(2)
        .filter(|d| (d - cc).abs() <= ni && (d - cc - ni) % 2 == 0)
        .collect();
    [0, b, cc, ds[s.index(ds.len())]]
}

fn fused_wit(l: C64, u: C64, h: [i32; 4], m: usize, n: usize) -> Witness {
    let mut wit = w(&[("lambda", l), ("u", u), ("M", real(m as f64)), ("N", real(n as f64))]);
    for (k, v) in ["a", "b", "c", "d"].iter().zip(h) {
        wit.push((k.to_string(), real(v as f64)));
    }
    wit
}

fn fusion_checks() -> Vec<CheckDef> {
    vec![
        def("fusion.path_independence", 18, 1e-10, |ctx, t| {
            let (m, n) = (1 + t % 3, 1 + (t / 3) % 3);
            with_redraws(ctx, 1, |s| {
                let (l, u) = (draw_lambda(s), draw_spectral(s));
                let h = draw_corners(s, m, n);
                let spec = FusedWeightSpec::new(m, n, l, h, u);
                Ok((fused_wit(l, u, h, m, n), path_independence_check(&spec, ctx)?))
            })
        }),
        def("fusion.naive_oracle", 8, 1e-12, |ctx, t| {
            let (m, n) = [(1, 1), (1, 2), (2, 1), (2, 2)][t % 4];
            with_redraws(ctx, 2, |s| {
                let (l, u) = (draw_lambda(s), draw_spectral(s));
                let h = draw_corners(s, m, n);
                let spec = FusedWeightSpec::new(m, n, l, h, u);
                let r = relative_residual(fused_weight(&spec, ctx)?, fused_weight_naive(&spec, ctx)?, 0.0, ctx)?;
                Ok((fused_wit(l, u, h, m, n), r))
            })
        }),
        def("fusion.connection", 12, 1e-9, |ctx, t| connection_trial(ctx, 1 + t % 2)),
        def("fusion.connection_m3", 4, 1e-7, |ctx, _| connection_trial(ctx, 3)),
        def("fusion.expansion", 8, 1e-9, |ctx, t| {
            let (m, n) = (1 + t % 2, 1 + (t / 2) % 2);
            with_redraws(ctx, 4, |s| {
                let (l, u) = (draw_lambda(s), draw_spectral(s));
                let mut out = Vec::new();
                for _ in 0..8 {
                    out.push(fused_expansion_check(m, n, l, u, s.complex(0.6, 1.4), ctx)?);
                }
                Ok((fused_wit(l, u, [0; 4], m, n), CheckResult::worst_of(out)))
            })
        }),
        def("fusion.yang_baxter", 8, 1e-9, |ctx, t| {
            let (m, n, p) = (1 + t % 2, 1 + (t / 2) % 2, 1 + (t / 4) % 2);
            with_redraws(ctx, 5, |s| {
                let (l, u, v, x) = sos_draw(s);
                let mut wit = sos_wit(l, u, v, x);
                wit.extend(w(&[
                    ("M", real(m as f64)),
                    ("N", real(n as f64)),
                    ("P", real(p as f64)),
                ]));
                Ok((wit, fused_yang_baxter(m, n, p, l, u, v, x, ctx)?))
            })
        }),
    ]
}

fn connection_trial(ctx: &EllipticContext, m: usize) -> Result<Outcome> {
    with_redraws(ctx, 3, |s| {
        let (l, u) = (draw_lambda(s), draw_spectral(s));
        let h = draw_corners(s, m, m);
        let spec = FusedWeightSpec::new(m, m, l, h, u);
        Ok((fused_wit(l, u, h, m, m), fused_vs_connection(&spec, ctx)?))
    })
}

/// Splits records into `(passed, failed)` counts.
pub fn tally(records: &[CheckRecord]) -> (usize, usize) {
    let passed = records.iter().filter(|r| r.pass).count();
    (passed, records.len() - passed)
}

/// Parses a suite name; `all` is handled by callers.
pub fn parse_suite(name: &str) -> Result<Suite> {
    Suite::from_name(name).ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name}")))
}
