use std::collections::BTreeMap;
use std::fs;

use ivmonoid::arith::{self, Rational};
use ivmonoid::density;
use ivmonoid::divisor_hom::{self, GlobalContext};
use ivmonoid::monoid::MonoidContext;
use ivmonoid::problem::{ProblemSpec, Scope};
use ivmonoid::suite;
use ivmonoid::{Error, Result};
use log::info;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::Common;

pub struct Outcome {
    pub spec_hash: String,
    pub result: Value,
    /// A checked property failed (only `verify` sets this).
    pub violated: bool,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn parse_json(flag: &str, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("--{flag}: {e}")))
}

/// Problem file merged with command line overrides.
pub fn load(c: &Common) -> Result<ProblemSpec> {
    let mut root = match &c.problem {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            parse_json("problem", &text)?
        }
        None => json!({}),
    };
    let obj = root
        .as_object_mut()
        .ok_or_else(|| Error::Input("the problem file must hold a JSON object".into()))?;
    for (key, flag) in [("polynomial", &c.polynomial), ("set", &c.set), ("g", &c.g), ("a", &c.a), ("b", &c.b)] {
        if let Some(text) = flag {
            obj.insert(key.into(), parse_json(key, text)?);
        }
    }
    if let Some(s) = &c.scope {
        let v = s.parse::<u64>().map_or_else(|_| json!(s), |p| json!(p));
        obj.insert("scope".into(), v);
    }
    if let Some(s) = &c.point {
        obj.insert("point".into(), json!(s));
    }
    if let Some(ps) = &c.points {
        obj.insert("points".into(), json!(ps));
    }
    let options = obj.entry("options").or_insert_with(|| json!({}));
    let options = options
        .as_object_mut()
        .ok_or_else(|| Error::Input("options must be an object".into()))?;
    let numeric: [(&str, Option<u64>); 6] = [
        ("depth_bound", c.depth_bound.map(u64::from)),
        ("witness_bound", c.witness_bound.map(u64::from)),
        ("samples", c.samples.map(|x| x as u64)),
        ("seed", c.seed),
        ("oracle_radius", c.oracle_radius),
        ("m_max", c.m_max.map(u64::from)),
    ];
    for (key, v) in numeric {
        if let Some(v) = v {
            options.insert(key.into(), json!(v));
        }
    }
    ProblemSpec::from_json(&root.to_string())
}

fn hash_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn spec_hash(spec: &ProblemSpec) -> String {
    hash_text(&serde_json::to_string(spec).expect("serializable"))
}

fn context(spec: &ProblemSpec) -> Result<MonoidContext> {
    MonoidContext::with_options(spec.f()?, spec.set.clone(), spec.prime()?, &spec.options.dense())
}

fn global_context(spec: &ProblemSpec) -> Result<GlobalContext> {
    GlobalContext::with_options(spec.f()?, spec.set.clone(), &spec.options.dense())
}

fn points(spec: &ProblemSpec) -> Result<&[Rational]> {
    spec.points
        .as_deref()
        .ok_or_else(|| Error::Input("the problem has no \"points\" field".into()))
}

fn g_or_f(spec: &ProblemSpec) -> Result<ivmonoid::FactoredPoly> {
    if spec.g.is_some() {
        spec.field("g")
    } else {
        spec.f()
    }
}

pub fn run(command: &str, c: &Common) -> Result<Outcome> {
    let spec = load(c)?;
    let spec_hash = spec_hash(&spec);
    info!("{command}: spec {spec_hash}");
    let mut violated = false;
    let result = match command {
        "factor" => {
            let f = spec.f()?;
            json!({ "factored": to_value(&f), "display": f.to_string(), "degree": f.degree() })
        }
        "dense-set" => dense_set(&spec)?,
        "closure" => {
            let p = spec.prime()?;
            let s = spec
                .point
                .as_ref()
                .ok_or_else(|| Error::Input("the problem has no \"point\" field".into()))?;
            let factors = spec.f()?.factor_polys();
            let cert = density::closure_check(s, points(&spec)?, &factors, p)?;
            json!({ "inside": cert.is_inside(), "certificate": to_value(&cert) })
        }
        "is-dense" => {
            let p = spec.prime()?;
            let factors = spec.f()?.factor_polys();
            let report = density::density_check(points(&spec)?, &spec.set, &factors, p)?;
            let mut v = to_value(&report);
            v["violation"] = to_value(&report.violation());
            v
        }
        "fixed-divisor" => fixed_divisor(&spec)?,
        "member" => member(&spec)?,
        "divides" => divides(&spec)?,
        "phi" => {
            let g = g_or_f(&spec)?;
            let phi = match spec.scope {
                Scope::Prime(_) => divisor_hom::phi_local(&g, &context(&spec)?)?,
                Scope::Global => divisor_hom::phi_global(&g, &global_context(&spec)?)?,
            };
            json!({ "g": g.to_string(), "phi": to_value(&phi), "display": phi.to_string() })
        }
        "witnesses" => {
            let ctx = context(&spec)?;
            let w = divisor_hom::build_witnesses(&ctx, spec.options.witness_bound)?;
            json!({
                "points": to_value(&ctx.dense.points.iter().map(arith::format_rational).collect::<Vec<_>>()),
                "all_realized": w.all_realized(),
                "witnesses": to_value(&w),
            })
        }
        "critical-primes" => {
            let primes = divisor_hom::critical_primes_with(&spec.f()?, &spec.set, &spec.options.dense())?;
            json!({ "primes": primes })
        }
        "verify" => {
            let (samples, seed) = (spec.options.samples, spec.options.seed);
            match spec.scope {
                Scope::Prime(_) => {
                    let ctx = context(&spec)?;
                    let hom = divisor_hom::verify_divisor_hom(&ctx, samples, seed)?;
                    let theory = divisor_hom::verify_divisor_theory(&ctx, spec.options.witness_bound)?;
                    violated = !hom.holds() || !theory.holds();
                    json!({
                        "summary": format!("{}/{} equivalences hold", hom.equivalences, hom.samples),
                        "homomorphism": to_value(&hom),
                        "theory": to_value(&theory),
                    })
                }
                Scope::Global => {
                    let ctx = global_context(&spec)?;
                    let hom = divisor_hom::verify_divisor_hom_global(&ctx, samples, seed)?;
                    violated = !hom.holds();
                    json!({
                        "summary": format!("{}/{} equivalences hold", hom.equivalences, hom.samples),
                        "critical_primes": ctx.primes,
                        "homomorphism": to_value(&hom),
                    })
                }
            }
        }
        other => unreachable!("unknown command {other}"),
    };
    Ok(Outcome {
        spec_hash,
        result,
        violated,
    })
}

fn dense_set(spec: &ProblemSpec) -> Result<Value> {
    let p = spec.prime()?;
    let factors = spec.f()?.factor_polys();
    let opts = spec.options.dense();
    let dense = density::dense_set_with(&spec.set, &factors, p, &opts)?;
    let report = density::density_check(&dense.points, &spec.set, &factors, p)?;
    let minimal = density::minimize_dense_set_with(&dense.points, &spec.set, &factors, p, &opts)?;
    let mut v = to_value(&dense);
    v["certificates"] = to_value(&report.certificates);
    v["minimal_points"] = to_value(&minimal.points.iter().map(arith::format_rational).collect::<Vec<_>>());
    if let Some(r) = spec.options.oracle_radius {
        let oracle = density::minimal_vectors_oracle(&spec.set, &factors, p, r)?;
        v["oracle_agrees"] = json!(oracle == dense.minimal_vectors());
    }
    Ok(v)
}

fn fixed_divisor(spec: &ProblemSpec) -> Result<Value> {
    let g = g_or_f(spec)?;
    match spec.scope {
        Scope::Prime(_) => {
            let ctx = context(spec)?;
            let v = ctx.image_min(&g)?;
            Ok(json!({
                "g": g.to_string(),
                "valuation": to_value(&v),
                "image_primitive": v == ivmonoid::ValInt::ZERO,
            }))
        }
        Scope::Global => {
            let d = divisor_hom::fixed_divisor_global(&g, &spec.set)?;
            Ok(json!({
                "g": g.to_string(),
                "fixed_divisor": arith::format_rational(&d),
                "image_primitive": d == Rational::from_integer(1.into()),
            }))
        }
    }
}

fn member(spec: &ProblemSpec) -> Result<Value> {
    let g = spec.field("g")?;
    match spec.scope {
        Scope::Prime(_) => {
            let m = context(spec)?.in_monoid(&g)?;
            let mut v = to_value(&m);
            v["g"] = json!(g.to_string());
            Ok(v)
        }
        Scope::Global => Ok(match global_context(spec)?.membership(&g)? {
            Ok(cert) => {
                let mut v = to_value(&cert);
                v["verdict"] = json!("member");
                v["g"] = json!(g.to_string());
                v
            }
            Err(why) => json!({ "verdict": "refused", "detail": why, "g": g.to_string() }),
        }),
    }
}

fn divides(spec: &ProblemSpec) -> Result<Value> {
    let a = spec.field("a")?;
    let b = spec.field("b")?;
    let (a_in, b_in, cofactor) = match spec.scope {
        Scope::Prime(_) => {
            let ctx = context(spec)?;
            (
                ctx.in_monoid(&a)?.is_member(),
                ctx.in_monoid(&b)?.is_member(),
                ctx.divides_in_monoid(&a, &b),
            )
        }
        Scope::Global => {
            let ctx = global_context(spec)?;
            (
                ctx.membership(&a)?.is_ok(),
                ctx.membership(&b)?.is_ok(),
                ctx.divides_in_monoid(&a, &b),
            )
        }
    };
    Ok(json!({
        "a_in_monoid": a_in,
        "b_in_monoid": b_in,
        "divides": cofactor.is_some(),
        "cofactor": to_value(&cofactor),
    }))
}

pub fn run_suite(which: &str, c: &Common) -> Result<Outcome> {
    let ids: Vec<u8> = if which == "all" {
        (1..=11).collect()
    } else {
        which
            .split(',')
            .map(|s| match s.trim().parse::<u8>() {
                Ok(id @ 1..=11) => Ok(id),
                _ => Err(Error::Input(format!("unknown criterion {s:?}"))),
            })
            .collect::<Result<_>>()?
    };
    let seed = c.seed.unwrap_or(7);
    let outcomes: Vec<suite::CriterionOutcome> = ids
        .iter()
        .map(|&id| {
            info!("criterion {id}");
            suite::run(id, seed)
        })
        .collect();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let lines: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{} {:>2} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title))
        .collect();
    Ok(Outcome {
        spec_hash: hash_text(&format!("suite:{which}:seed={seed}")),
        result: json!({
            "passed": outcomes.len() - failed,
            "failed": failed,
            "lines": lines,
            "criteria": to_value(&outcomes),
        }),
        violated: failed > 0,
    })
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Input(_) => "input",
        Error::Precondition(_) => "precondition",
        Error::Domain(_) => "domain",
        Error::Unsupported(_) => "unsupported",
        Error::EmptyChoice(_) => "empty_choice",
        Error::Resource(_) => "resource",
        Error::Certification(_) => "certification",
    }
}

/// The report wrapper and the process exit code.
pub fn envelope(command: &str, outcome: Result<Outcome>) -> (Value, u8) {
    let mut report = Map::new();
    report.insert("tool".into(), json!("ivmonoid"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    report.insert("command".into(), json!(command));
    let code = match outcome {
        Ok(o) => {
            report.insert("spec_hash".into(), json!(o.spec_hash));
            report.insert("status".into(), json!(if o.violated { "violated" } else { "ok" }));
            report.insert("result".into(), o.result);
            u8::from(o.violated)
        }
        Err(e) => {
            log::error!("{e}");
            report.insert("status".into(), json!("error"));
            let detail: BTreeMap<&str, String> =
                BTreeMap::from([("kind", error_kind(&e).to_string()), ("message", e.to_string())]);
            report.insert("error".into(), to_value(&detail));
            e.exit_code() as u8
        }
    };
    (Value::Object(report), code)
}
