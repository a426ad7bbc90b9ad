//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ellhyp::beta::{draw_spiridonov, integrate, radius_robustness, spiridonov_spec_eval};
use ellhyp::numerics::with_redraws;
use ellhyp::suites::{run_checks, CheckDef, THETA_CONSTANT_NOMES};
use ellhyp::{c64, CheckRecord, EllipticContext, Sampler, Suite, SuiteOptions};

const SEED: u64 = 7;

fn base() -> EllipticContext {
    EllipticContext::default().with_seed(SEED)
}

fn check(id: &str) -> CheckDef {
    Suite::ALL
        .iter()
        .flat_map(|s| s.checks())
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("no check {id}"))
}

/// Records of the named checks at their default trial counts and tolerances.
fn run(ids: &[&str], ctx: &EllipticContext) -> Vec<CheckRecord> {
    let defs: Vec<CheckDef> = ids.iter().map(|id| check(id)).collect();
    run_checks(&defs, ctx, SuiteOptions::default())
}

/// Runs trial `t` of `def` at a context of the caller's choosing.
fn run_at(def: &CheckDef, t: usize, ctx: &EllipticContext) -> Result<bool, String> {
    let tctx = ctx.for_trial(t as u64).with_tol(def.tol);
    match (def.run)(&tctx, t) {
        Ok((_, r)) if r.pass => Ok(true),
        Ok((w, r)) => Err(format!("{} trial {t}: ratio {:e} at {w:?}", def.id, r.ratio())),
        Err(e) => Err(format!("{} trial {t}: {e}", def.id)),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn tally(recs: &[CheckRecord], expected: &[(&str, usize)]) -> Outcome {
    for &(id, n) in expected {
        let got = recs.iter().filter(|r| r.id == id).count();
        if got != n {
            return Outcome {
                ok: false,
                detail: format!("{id}: {got} trials, expected {n}"),
            };
        }
    }
    match recs.iter().find(|r| !r.pass) {
        Some(r) => Outcome {
            ok: false,
            detail: format!(
                "{} trial {}: residual {:e} scale {:e} {}",
                r.id,
                r.trial,
                r.residual,
                r.scale,
                r.error.as_deref().unwrap_or("")
            ),
        },
        None => Outcome {
            ok: true,
            detail: format!("{} trials", recs.len()),
        },
    }
}

fn within(out: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if out.ok && elapsed > budget {
        return Outcome {
            ok: false,
            detail: format!("took {elapsed:.1?}, budget {budget:?}"),
        };
    }
    out
}

/// A nome with modulus in `[lo, hi]`.
fn draw_nome(s: &mut Sampler, lo: f64, hi: f64) -> ellhyp::C64 {
    s.complex(lo, hi)
}

fn theta_constant() -> Outcome {
    let t = Instant::now();
    let recs = run(&["theta.constant"], &base());
    let mut out = tally(&recs, &[("theta.constant", 4)]);
    let nomes: Vec<_> = recs.iter().map(|r| r.params[0].1).collect();
    let want: Vec<_> = THETA_CONSTANT_NOMES.iter().map(|&(re, im)| c64(re, im)).collect();
    if nomes != want {
        out = Outcome {
            ok: false,
            detail: format!("nomes {nomes:?}"),
        };
    }
    within(out, t.elapsed(), Duration::from_millis(100))
}

fn triple_product() -> Outcome {
    let mut recs = Vec::new();
    for &(re, im) in &THETA_CONSTANT_NOMES {
        let ctx = base().with_pq(c64(re, im), base().q).unwrap();
        recs.extend(run(&["theta.product_vs_series"], &ctx));
    }
    tally(&recs, &[("theta.product_vs_series", 256)])
}

fn partial_fractions() -> Outcome {
    let ids = [
        "toolkit.three_term",
        "toolkit.partial_fractions",
        "toolkit.antisymmetric_product",
    ];
    let recs = run(&ids, &base());
    tally(&recs, &ids.map(|id| (id, 100)))
}

fn frenkel_turaev() -> Outcome {
    let sum = check("frenkel-turaev.sum");
    // fresh nomes per draw, moduli in [0.2, 0.5]
    for t in 0..100 {
        let mut s = Sampler::from_seed(SEED, 0xf7 + t as u64);
        let (p, q) = (draw_nome(&mut s, 0.2, 0.5), draw_nome(&mut s, 0.2, 0.5));
        let ctx = match base().with_pq(p, q) {
            Ok(c) => c,
            Err(e) => {
                return Outcome {
                    ok: false,
                    detail: e.to_string(),
                }
            }
        };
        if let Err(e) = run_at(&sum, t, &ctx) {
            return Outcome {
                ok: false,
                detail: format!("{e} (p={p}, q={q})"),
            };
        }
    }
    let recs = run(&["frenkel-turaev.saalschutz_limit"], &base());
    let out = tally(&recs, &[("frenkel-turaev.saalschutz_limit", 20)]);
    Outcome {
        detail: format!("100 sums at random nomes, {}", out.detail),
        ..out
    }
}

fn bailey() -> Outcome {
    let recs = run(&["bailey.transform", "bailey.connection_unitarity"], &base());
    tally(&recs, &[("bailey.transform", 50), ("bailey.connection_unitarity", 20)])
}

fn quadratic() -> Outcome {
    let ids = [
        "quadratic.telescoping",
        "quadratic.bibasic",
        "quadratic.kronecker",
        "quadratic.warnaar",
    ];
    tally(&run(&ids, &base()), &[])
}

fn minton() -> Outcome {
    tally(&run(&["minton.sum"], &base()), &[("minton.sum", 50)])
}

fn biorthogonality() -> Outcome {
    let t = Instant::now();
    let out = tally(
        &run(&["biorthogonal.discrete"], &base()),
        &[("biorthogonal.discrete", 10)],
    );
    within(out, t.elapsed(), Duration::from_secs(30))
}

fn gamma() -> Outcome {
    let ids = [
        "gamma.functional_equation",
        "gamma.inversion",
        "gamma.nome_symmetry",
        "gamma.residue_constant",
    ];
    let recs = run(&ids, &base());
    let mut out = tally(
        &recs,
        &[
            ("gamma.functional_equation", 32),
            ("gamma.inversion", 32),
            ("gamma.nome_symmetry", 32),
        ],
    );
    if out.ok
        && !recs
            .iter()
            .all(|r| r.id.ends_with("residue_constant") || check(&r.id).tol <= 1e-10)
    {
        out = Outcome {
            ok: false,
            detail: "tolerance above 1e-10".into(),
        };
    }
    out
}

fn spiridonov() -> Outcome {
    let start = Instant::now();
    let ctx = base().with_tol(1e-7);
    for t in 0..25u64 {
        let tctx = ctx.for_trial(t);
        let res = with_redraws(&tctx, 1, |s| {
            let spec = draw_spiridonov(s, 0.8, 0.4)?;
            let nodes = integrate(&spec, &tctx)?.nodes;
            Ok((
                spiridonov_spec_eval(&spec, &tctx)?,
                radius_robustness(&spec, &tctx)?,
                nodes,
                spec,
            ))
        });
        match res {
            Ok((eval, radius, nodes, spec)) => {
                let big = spec.t.iter().map(|x| x.norm()).fold(0.0, f64::max);
                if !(eval.pass && radius.pass)
                    || nodes > 1 << 14
                    || big > 0.8
                    || spec.p.norm() > 0.4
                    || spec.q.norm() > 0.4
                {
                    return Outcome {
                        ok: false,
                        detail: format!(
                            "draw {t}: eval {:e} radius {:e} nodes {nodes}",
                            eval.ratio(),
                            radius.ratio()
                        ),
                    };
                }
            }
            Err(e) => {
                return Outcome {
                    ok: false,
                    detail: format!("draw {t}: {e}"),
                }
            }
        }
    }
    within(
        Outcome {
            ok: true,
            detail: "25 draws".into(),
        },
        start.elapsed(),
        Duration::from_secs(120),
    )
}

fn sos() -> Outcome {
    let ids = ["sos.yang_baxter", "sos.unitarity", "sos.operator_form"];
    let recs = run(&ids, &base());
    let mut out = tally(
        &recs,
        &[
            ("sos.yang_baxter", 20),
            ("sos.unitarity", 20),
            ("sos.operator_form", 20),
        ],
    );
    if out.ok && check("sos.operator_form").tol > 1e-13 {
        out = Outcome {
            ok: false,
            detail: "operator form tolerance above 1e-13".into(),
        };
    }
    out
}

fn fusion() -> Outcome {
    let t = Instant::now();
    let ids = [
        "fusion.path_independence",
        "fusion.connection",
        "fusion.connection_m3",
        "fusion.expansion",
        "fusion.yang_baxter",
    ];
    within(tally(&run(&ids, &base()), &[]), t.elapsed(), Duration::from_secs(60))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("ellhyp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_ellhyp"))
            .args(["check", "all", "--seed", "7", "--no-timestamp", "--json"])
            .arg(&path)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("exit {status}"));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    match (report("a.json"), report("b.json")) {
        (Ok(a), Ok(b)) if a == b => Outcome {
            ok: true,
            detail: format!("{} identical bytes", a.len()),
        },
        (Ok(_), Ok(_)) => Outcome {
            ok: false,
            detail: "reports differ".into(),
        },
        (Err(e), _) | (_, Err(e)) => Outcome { ok: false, detail: e },
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("theta constant", theta_constant),
        ("triple product vs series", triple_product),
        ("three-term and partial fractions", partial_fractions),
        ("Frenkel-Turaev and Saalschutz limit", frenkel_turaev),
        ("Bailey transform and R unitarity", bailey),
        ("telescoping, bibasic, Kronecker, quadratic", quadratic),
        ("Minton", minton),
        ("discrete biorthogonality", biorthogonality),
        ("elliptic gamma", gamma),
        ("beta integral", spiridonov),
        ("SOS Yang-Baxter and unitarity", sos),
        ("fusion", fusion),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let tag = if out.ok { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.2?}]", i + 1, out.detail, t.elapsed());
        failed += usize::from(!out.ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
