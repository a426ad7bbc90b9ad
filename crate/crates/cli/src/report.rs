//! JSON report for `check`.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use ellhyp::{CheckRecord, EllipticContext, Witness, C64};

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Witness parameters as an object in their recorded order.
struct Params<'a>(&'a Witness);

impl Serialize for Params<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, &pair(*v))?;
        }
        m.end()
    }
}

#[derive(Serialize)]
struct Context {
    p: [f64; 2],
    q: [f64; 2],
    tol: Option<f64>,
    seed: u64,
}

#[derive(Serialize)]
struct Check<'a> {
    id: &'a str,
    trial: usize,
    params: Params<'a>,
    residual: f64,
    scale: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize, Clone, Copy, PartialEq, Debug)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        Summary {
            total: records.len(),
            passed,
            failed: records.len() - passed,
        }
    }
}

#[derive(Serialize)]
pub struct SuiteSummary {
    pub name: &'static str,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Serialize)]
struct Report<'a> {
    suite: &'a str,
    context: Context,
    checks: Vec<Check<'a>>,
    suites: &'a [SuiteSummary],
    summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u64>,
}

/// Serializes a finished run. `tol` is the override, if any; `None` means
/// each check used its own tolerance.
pub fn to_json(
    suite: &str,
    ctx: &EllipticContext,
    tol: Option<f64>,
    records: &[CheckRecord],
    suites: &[SuiteSummary],
    wall_ms: Option<u64>,
) -> String {
    let report = Report {
        suite,
        context: Context {
            p: pair(ctx.p),
            q: pair(ctx.q),
            tol,
            seed: ctx.rng_seed,
        },
        checks: records
            .iter()
            .map(|r| Check {
                id: &r.id,
                trial: r.trial,
                params: Params(&r.params),
                residual: r.residual,
                scale: r.scale,
                pass: r.pass,
                error: r.error.as_deref(),
            })
            .collect(),
        suites,
        summary: Summary::of(records),
        wall_ms,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellhyp::c64;

    fn record(id: &str, pass: bool) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            trial: 0,
            params: vec![("z".into(), c64(1.0, 2.0)), ("a".into(), c64(0.5, 0.0))],
            residual: if pass { 0.0 } else { f64::NAN },
            scale: 1.0,
            pass,
            error: (!pass).then(|| "boom".to_string()),
        }
    }

    #[test]
    fn schema_fields() {
        let recs = [record("x.a", true), record("x.b", false)];
        let json = to_json("x", &EllipticContext::default(), None, &recs, &[], Some(5));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["suite"], "x");
        assert_eq!(v["context"]["p"][0], 0.2);
        assert_eq!(v["summary"]["total"], 2);
        assert_eq!(v["summary"]["failed"], 1);
        assert_eq!(v["wall_ms"], 5);
        assert_eq!(v["checks"][1]["residual"], serde_json::Value::Null);
        assert_eq!(v["checks"][1]["error"], "boom");
        assert!(v["checks"][0].get("error").is_none());
        // parameters keep their recorded order
        let z = json.find("\"z\"").unwrap();
        let a = json.find("\"a\"").unwrap();
        assert!(z < a);
        let quiet = to_json("x", &EllipticContext::default(), None, &recs, &[], None);
        assert!(!quiet.contains("wall_ms"));
    }
}
