//! The `eval` subcommand: one function value per invocation.

use std::collections::BTreeMap;

use ellhyp::beta::integrate;
use ellhyp::series::SeriesSpec;
use ellhyp::{
    e_sum, efac, egamma, fused_weight, r_fn, sos_weight, theta, v_sum, EllipticContext, FusedWeightSpec, IntegralSpec,
    SosWeightKey, C64,
};

use crate::parse::parse_complex;

/// Why an evaluation did not produce a value.
#[derive(Debug)]
pub enum EvalError {
    /// Bad function name or arguments; exit code 2.
    Usage(String),
    /// The library rejected the input; exit code 3.
    Eval(ellhyp::Error),
}

impl From<ellhyp::Error> for EvalError {
    fn from(e: ellhyp::Error) -> Self {
        EvalError::Eval(e)
    }
}

struct Signature {
    name: &'static str,
    params: &'static [&'static str],
    /// Parameters that may be omitted (defaults come from the context).
    optional: &'static [&'static str],
    /// Repeatable list parameters; extra positional values go to the first one.
    lists: &'static [&'static str],
    help: &'static str,
}

const FUNCTIONS: &[Signature] = &[
    Signature {
        name: "theta",
        params: &["x", "p"],
        optional: &["p"],
        lists: &[],
        help: "theta x [p]                       θ(x;p)",
    },
    Signature {
        name: "efac",
        params: &["a", "k", "q", "p"],
        optional: &["q", "p"],
        lists: &[],
        help: "efac a k [q] [p]                  (a;q,p)_k",
    },
    Signature {
        name: "egamma",
        params: &["x", "p", "q"],
        optional: &["p", "q"],
        lists: &[],
        help: "egamma x [p] [q]                  Γ(x;p,q)",
    },
    Signature {
        name: "esum",
        params: &["n", "z"],
        optional: &["z"],
        lists: &["num", "den"],
        help: "esum n [z] num=.. den=..          Σ_k (q^-n,num;q,p)_k/(q,den;q,p)_k z^k, z defaults to q",
    },
    Signature {
        name: "vsum",
        params: &["a", "n"],
        optional: &[],
        lists: &["b"],
        help: "vsum a n [b ...]                  terminating V-sum; q^-n is appended to b",
    },
    Signature {
        name: "rfn",
        params: &["k", "x", "a", "b", "c", "d", "e", "f"],
        optional: &[],
        lists: &[],
        help: "rfn k x a b c d e f               biorthogonal r_k(x;a,b,c,d,e,f)",
    },
    Signature {
        name: "sos_weight",
        params: &["lambda", "m", "n", "k", "l", "u"],
        optional: &[],
        lists: &[],
        help: "sos_weight lambda m n k l u       R^{mn}_{kl}(λ|u), signs ±1",
    },
    Signature {
        name: "fused_weight",
        params: &["M", "N", "lambda", "a", "b", "c", "d", "u"],
        optional: &[],
        lists: &[],
        help: "fused_weight M N lambda a b c d u fused weight W_MN(a b; c d|u) on heights λ+a, ...",
    },
    Signature {
        name: "beta_integral",
        params: &["t0", "t1", "t2", "t3", "t4", "t5"],
        optional: &["t5"],
        lists: &[],
        help: "beta_integral t0..t4 [t5]         contour integral; t5 defaults to pq/(t0⋯t4)",
    },
];

pub fn usage() -> String {
    let mut s = String::from("functions (arguments positional or name=value):\n");
    for f in FUNCTIONS {
        s.push_str("  ");
        s.push_str(f.help);
        s.push('\n');
    }
    s
}

struct Bound {
    single: BTreeMap<&'static str, C64>,
    lists: BTreeMap<&'static str, Vec<C64>>,
}

impl Bound {
    fn get(&self, name: &str) -> Option<C64> {
        self.single.get(name).copied()
    }

    fn req(&self, name: &str) -> C64 {
        self.single[name]
    }

    fn list(&self, name: &str) -> Vec<C64> {
        self.lists.get(name).cloned().unwrap_or_default()
    }

    fn count(&self, name: &str) -> Result<usize, EvalError> {
        let z = self.req(name);
        if z.im != 0.0 || z.re < 0.0 || z.re.fract() != 0.0 || z.re > 1e6 {
            return Err(EvalError::Usage(format!("{name} must be a non-negative integer")));
        }
        Ok(z.re as usize)
    }

    fn int(&self, name: &str) -> Result<i32, EvalError> {
        let z = self.req(name);
        if z.im != 0.0 || z.re.fract() != 0.0 || z.re.abs() > 1e6 {
            return Err(EvalError::Usage(format!("{name} must be an integer")));
        }
        Ok(z.re as i32)
    }
}

fn bind(sig: &Signature, args: &[String]) -> Result<Bound, EvalError> {
    let mut single = BTreeMap::new();
    let mut lists: BTreeMap<&'static str, Vec<C64>> = BTreeMap::new();
    let mut next = 0;
    let value = |s: &str| parse_complex(s).map_err(EvalError::Usage);
    for arg in args {
        if let Some((k, v)) = arg.split_once('=') {
            if let Some(&name) = sig.params.iter().find(|&&p| p == k) {
                single.insert(name, value(v)?);
            } else if let Some(&name) = sig.lists.iter().find(|&&p| p == k) {
                lists.entry(name).or_default().push(value(v)?);
            } else {
                return Err(EvalError::Usage(format!("{}: unknown parameter {k:?}", sig.name)));
            }
            continue;
        }
        while next < sig.params.len() && single.contains_key(sig.params[next]) {
            next += 1;
        }
        if next < sig.params.len() {
            single.insert(sig.params[next], value(arg)?);
            next += 1;
        } else if let Some(&name) = sig.lists.first() {
            lists.entry(name).or_default().push(value(arg)?);
        } else {
            return Err(EvalError::Usage(format!("{}: too many arguments", sig.name)));
        }
    }
    for p in sig.params {
        if !single.contains_key(p) && !sig.optional.contains(p) {
            return Err(EvalError::Usage(format!("{}: missing parameter {p}", sig.name)));
        }
    }
    Ok(Bound { single, lists })
}

/// Evaluates `function` on its raw command-line arguments.
pub fn evaluate(function: &str, args: &[String], ctx: &EllipticContext) -> Result<C64, EvalError> {
    let sig = FUNCTIONS
        .iter()
        .find(|f| f.name == function)
        .ok_or_else(|| EvalError::Usage(format!("unknown function {function:?}")))?;
    let b = bind(sig, args)?;
    let p = b.get("p").unwrap_or(ctx.p);
    let q = b.get("q").unwrap_or(ctx.q);
    let value = match sig.name {
        "theta" => theta(b.req("x"), p, ctx)?,
        "efac" => {
            let ctx = ctx.with_pq(p, q)?;
            efac(b.req("a"), b.count("k")?, &ctx)?
        }
        "egamma" => egamma(b.req("x"), p, q, ctx)?,
        "esum" => {
            let spec = SeriesSpec::e(b.list("num"), b.list("den"), b.count("n")?, b.get("z").unwrap_or(q));
            if spec.numerators.len() != spec.denominators.len() {
                return Err(EvalError::Usage("esum: num and den need the same length".into()));
            }
            e_sum(&spec, ctx)?.value
        }
        "vsum" => {
            let n = b.count("n")?;
            let mut list = b.list("b");
            list.push(q.powi(-(n as i32)));
            v_sum(b.req("a"), &list, n, ctx)?.value
        }
        "rfn" => {
            let t = ["a", "b", "c", "d", "e", "f"].map(|k| b.req(k));
            r_fn(b.count("k")?, b.req("x"), &t, ctx)?
        }
        "sos_weight" => {
            let key = SosWeightKey {
                lambda: b.req("lambda"),
                m: b.int("m")?,
                n: b.int("n")?,
                k: b.int("k")?,
                l: b.int("l")?,
                u: b.req("u"),
            };
            sos_weight(&key, ctx)?
        }
        "fused_weight" => {
            let (mm, nn) = (b.count("M")?, b.count("N")?);
            if mm == 0 || nn == 0 || mm > 6 || nn > 6 {
                return Err(EvalError::Usage("fused_weight: M and N must lie in 1..=6".into()));
            }
            let h = [b.int("a")?, b.int("b")?, b.int("c")?, b.int("d")?];
            fused_weight(&FusedWeightSpec::new(mm, nn, b.req("lambda"), h, b.req("u")), ctx)?
        }
        "beta_integral" => {
            let t5 = ["t0", "t1", "t2", "t3", "t4"].map(|k| b.req(k));
            let spec = match b.get("t5") {
                Some(t6) => IntegralSpec::new([t5.as_slice(), &[t6]].concat(), ctx.p, ctx.q),
                None => IntegralSpec::spiridonov(t5, ctx.p, ctx.q),
            };
            integrate(&spec, ctx)?.value
        }
        _ => unreachable!("signature table and dispatch disagree"),
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellhyp::c64;

    fn one() -> C64 {
        c64(1.0, 0.0)
    }

    fn run(f: &str, args: &[&str]) -> Result<C64, EvalError> {
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        evaluate(f, &args, &EllipticContext::default())
    }

    #[test]
    fn trivial_values() {
        assert_eq!(run("theta", &["0.3", "0"]).unwrap(), c64(0.7, 0.0));
        assert_eq!(run("efac", &["a=0.4", "k=0"]).unwrap(), one());
        assert_eq!(run("vsum", &["0.3+0.1i", "n=0"]).unwrap(), one());
        assert_eq!(run("esum", &["n=0"]).unwrap(), one());
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(run("nope", &[]), Err(EvalError::Usage(_))));
        assert!(matches!(run("theta", &[]), Err(EvalError::Usage(_))));
        assert!(matches!(run("theta", &["1", "0.1", "3"]), Err(EvalError::Usage(_))));
        assert!(matches!(run("efac", &["0.4", "1.5"]), Err(EvalError::Usage(_))));
        assert!(matches!(run("theta", &["w=1"]), Err(EvalError::Usage(_))));
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(run("theta", &["0"]), Err(EvalError::Eval(_))));
        assert!(matches!(run("egamma", &["1"]), Err(EvalError::Eval(_))));
    }

    #[test]
    fn lists_and_named_arguments() {
        let ctx = EllipticContext::default();
        let direct = v_sum(c64(0.3, 0.1), &[c64(0.5, 0.0), ctx.q.powi(-2)], 2, &ctx)
            .unwrap()
            .value;
        assert_eq!(run("vsum", &["0.3+0.1i", "2", "0.5"]).unwrap(), direct);
        assert_eq!(run("vsum", &["n=2", "b=0.5", "a=0.3,0.1"]).unwrap(), direct);
    }
}
