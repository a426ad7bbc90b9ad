use ellhyp::biorthogonal::r_fn_scaled;
use ellhyp::numerics::relative_residual;
use ellhyp::series::rkl_coefficient_scaled;
use ellhyp::sos::{draw_lambda, draw_spectral, fused_weight_scaled};
use ellhyp::suites::{draw_corners, run_checks, tally};
use ellhyp::{c64, run_suite, EllipticContext, FusedWeightSpec, Sampler, Suite, SuiteOptions, C64};

fn seeded(seed: u64) -> EllipticContext {
    EllipticContext::default().with_seed(seed)
}

#[test]
fn every_suite_passes_at_seed_seven() {
    let ctx = seeded(7);
    for suite in Suite::ALL {
        let recs = run_suite(suite, &ctx, SuiteOptions::default());
        let failed: Vec<_> = recs.iter().filter(|r| !r.pass).collect();
        assert!(!recs.is_empty(), "{} ran nothing", suite.name());
        assert!(failed.is_empty(), "{}: {failed:#?}", suite.name());
    }
}

#[test]
fn every_suite_passes_at_a_real_nome() {
    let ctx = EllipticContext::new(c64(0.3, 0.0), c64(0.25, 0.0))
        .unwrap()
        .with_seed(3);
    for suite in Suite::ALL {
        let recs = run_suite(
            suite,
            &ctx,
            SuiteOptions {
                trials: Some(4),
                ..Default::default()
            },
        );
        let (_, failed) = tally(&recs);
        assert_eq!(failed, 0, "{}", suite.name());
    }
}

#[test]
fn records_do_not_depend_on_thread_count() {
    let ctx = seeded(11);
    for suite in [Suite::Toolkit, Suite::Sos, Suite::Fusion] {
        let one = run_suite(
            suite,
            &ctx,
            SuiteOptions {
                threads: Some(1),
                ..Default::default()
            },
        );
        let many = run_suite(
            suite,
            &ctx,
            SuiteOptions {
                threads: Some(5),
                ..Default::default()
            },
        );
        assert_eq!(one, many, "{}", suite.name());
        let keys: Vec<_> = one.iter().map(|r| (r.id.clone(), r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}

#[test]
fn seeds_change_the_draws() {
    let a = run_suite(Suite::Bailey, &seeded(1), SuiteOptions::default());
    let b = run_suite(Suite::Bailey, &seeded(2), SuiteOptions::default());
    assert_ne!(
        a.iter().map(|r| &r.params).collect::<Vec<_>>(),
        b.iter().map(|r| &r.params).collect::<Vec<_>>()
    );
}

#[test]
fn unattainable_tolerance_fails() {
    let opts = SuiteOptions {
        tol: Some(1e-30),
        ..Default::default()
    };
    let recs = run_suite(Suite::Series, &seeded(7), opts);
    let (_, failed) = tally(&recs);
    assert!(failed > recs.len() / 2, "{failed} of {}", recs.len());
}

#[test]
fn trial_override_applies_per_check() {
    let checks = Suite::Gamma.checks();
    let recs = run_checks(
        &checks,
        &seeded(7),
        SuiteOptions {
            trials: Some(3),
            ..Default::default()
        },
    );
    assert_eq!(recs.len(), 3 * checks.len());
}

/// Fraction of `(value, scale)` pairs where a relative corruption `delta`
/// would exceed `tol` after normalisation by the reported scale.
fn detectable(pairs: &[(C64, f64)], delta: f64, tol: f64) -> f64 {
    let ctx = EllipticContext::default().with_tol(tol);
    let hits = pairs
        .iter()
        .filter(|(v, s)| !relative_residual(v * (1.0 + delta), *v, *s, &ctx).unwrap().pass)
        .count();
    hits as f64 / pairs.len() as f64
}

#[test]
fn cancellation_scales_still_expose_wrong_values() {
    let ctx = EllipticContext::default();
    let mut s = Sampler::from_seed(5, 0);
    let (mut fused, mut rkl, mut rfn) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..200 {
        let (m, n) = (1 + s.index(3), 1 + s.index(3));
        let (l, u) = (draw_lambda(&mut s), draw_spectral(&mut s));
        let h = draw_corners(&mut s, m, n);
        if let Ok(r) = fused_weight_scaled(&FusedWeightSpec::new(m, n, l, h, u), &ctx) {
            fused.push(r);
        }
        let v = s.params(4);
        let n = s.index(5);
        let (k, j) = (s.index(n + 1), s.index(n + 1));
        if let Ok(r) = rkl_coefficient_scaled(v[0], v[1], v[2], v[3], n, k, j, &ctx) {
            rkl.push(r);
        }
        let v = s.params(5);
        let f = ctx.q / v.iter().product::<C64>();
        if let Ok(r) = r_fn_scaled(s.index(4), s.param(), &[v[0], v[1], v[2], v[3], v[4], f], &ctx) {
            rfn.push(r);
        }
    }
    for (name, pairs, tol) in [("fused", &fused, 1e-10), ("rkl", &rkl, 1e-9), ("rfn", &rfn, 1e-9)] {
        assert!(pairs.len() > 150, "{name}: only {} draws evaluated", pairs.len());
        let frac = detectable(pairs, 1e-6, tol);
        assert!(
            frac >= 0.9,
            "{name}: a 1e-6 error is caught in only {:.0}% of draws",
            100.0 * frac
        );
    }
}
