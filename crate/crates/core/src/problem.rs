//! The JSON problem file read by the command line front end.

use serde::{Deserialize, Serialize};

use crate::arith::{self, Rational};
use crate::density::{DenseOptions, DEFAULT_DEPTH_BOUND};
use crate::divisor_hom::DEFAULT_WITNESS_BOUND;
use crate::error::{input, Error, Result};
use crate::factor::{factor_over_q, FactoredPoly};
use crate::poly::Poly;
use crate::set_model::SetSpec;

/// A polynomial given either by coefficients (factored on load) or already
/// factored (certified on load).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyInput {
    Coefficients(Poly),
    Factored(FactoredPoly),
}

impl PolyInput {
    pub fn factored(&self) -> Result<FactoredPoly> {
        match self {
            PolyInput::Coefficients(p) => factor_over_q(p),
            PolyInput::Factored(f) => Ok(f.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScope", into = "RawScope")]
pub enum Scope {
    Prime(u64),
    Global,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawScope {
    Prime(u64),
    Named(String),
}

impl TryFrom<RawScope> for Scope {
    type Error = Error;
    fn try_from(raw: RawScope) -> Result<Scope> {
        match raw {
            RawScope::Prime(p) => {
                arith::check_prime(p)?;
                Ok(Scope::Prime(p))
            }
            RawScope::Named(s) if s == "global" => Ok(Scope::Global),
            RawScope::Named(s) => s.parse::<u64>().map_err(|_| Error::Input(format!(
                "scope must be a prime or \"global\", got {s:?}"
            ))).and_then(|p| Scope::try_from(RawScope::Prime(p))),
        }
    }
}

impl From<Scope> for RawScope {
    fn from(s: Scope) -> RawScope {
        match s {
            Scope::Prime(p) => RawScope::Prime(p),
            Scope::Global => RawScope::Named("global".into()),
        }
    }
}

impl std::str::FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scope> {
        Scope::try_from(RawScope::Named(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub depth_bound: u32,
    pub witness_bound: u32,
    pub samples: usize,
    pub seed: u64,
    /// Window radius for brute-force comparisons; `p^10` when absent.
    pub oracle_radius: Option<u64>,
    /// Largest power of `f` used when sampling.
    pub m_max: u32,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            depth_bound: DEFAULT_DEPTH_BOUND,
            witness_bound: DEFAULT_WITNESS_BOUND,
            samples: 200,
            seed: 7,
            oracle_radius: None,
            m_max: 3,
        }
    }
}

impl Options {
    pub fn dense(&self) -> DenseOptions {
        DenseOptions {
            depth_bound: self.depth_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub polynomial: PolyInput,
    #[serde(default = "integers")]
    pub set: SetSpec,
    #[serde(default = "global")]
    pub scope: Scope,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<PolyInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<PolyInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<PolyInput>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub point: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational_vec")]
    pub points: Option<Vec<Rational>>,
}

fn integers() -> SetSpec {
    SetSpec::Integers
}

fn global() -> Scope {
    Scope::Global
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(r) => s.serialize_some(&arith::format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "arith::rational_str")] Rational);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

mod opt_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.iter().map(arith::format_rational).collect::<Vec<_>>()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "arith::rational_vec")] Vec<Rational>);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("problem file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = match &self.polynomial {
            PolyInput::Coefficients(p) => p.is_zero(),
            PolyInput::Factored(_) => false,
        };
        if zero {
            return input("the polynomial is zero");
        }
        if let Scope::Prime(p) = self.scope {
            self.set.check_prime(p)?;
        }
        if self.options.m_max == 0 {
            return input("options.m_max must be at least 1");
        }
        Ok(())
    }

    pub fn prime(&self) -> Result<u64> {
        match self.scope {
            Scope::Prime(p) => Ok(p),
            Scope::Global => input("this command needs a prime scope"),
        }
    }

    pub fn f(&self) -> Result<FactoredPoly> {
        self.polynomial.factored()
    }

    /// The optional polynomial field `name`, factored.
    pub fn field(&self, name: &str) -> Result<FactoredPoly> {
        let slot = match name {
            "g" => &self.g,
            "a" => &self.a,
            "b" => &self.b,
            _ => unreachable!("unknown field {name}"),
        };
        slot.as_ref()
            .ok_or_else(|| Error::Input(format!("the problem file has no \"{name}\" field")))?
            .factored()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn parses_full_file() {
        let text = r#"{
            "polynomial": ["0", "-1", "1"],
            "set": {"set": "residues", "modulus": 4, "residues": [1, 2]},
            "scope": 2,
            "options": {"samples": 10, "seed": 3},
            "g": {"content": "1/2", "factors": [{"coeffs": ["0", "1"], "mult": 1}, {"coeffs": ["-1", "1"], "mult": 1}]},
            "point": "5",
            "points": ["1", 2]
        }"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        assert_eq!(spec.prime().unwrap(), 2);
        assert_eq!(spec.options.samples, 10);
        assert_eq!(spec.options.depth_bound, DEFAULT_DEPTH_BOUND);
        assert_eq!(spec.field("g").unwrap().content(), &rat(1, 2));
        assert_eq!(spec.point, Some(int(5)));
        assert_eq!(spec.points, Some(vec![int(1), int(2)]));
        assert_eq!(spec.f().unwrap().factors().len(), 2);
    }

    #[test]
    fn defaults_and_errors() {
        let spec = ProblemSpec::from_json(r#"{"polynomial": ["1"]}"#).unwrap();
        assert_eq!(spec.scope, Scope::Global);
        assert_eq!(spec.set, SetSpec::Integers);
        assert!(spec.prime().is_err());
        assert!(ProblemSpec::from_json(r#"{"polynomial": ["0"]}"#).is_err());
        assert!(ProblemSpec::from_json(r#"{"polynomial": ["1"], "scope": 4}"#).is_err());
        assert!(ProblemSpec::from_json(r#"{"polynomial": ["1"], "scope": "local"}"#).is_err());
        assert!(ProblemSpec::from_json(r#"{"polynomial": ["1"], "colour": 1}"#).is_err());
        let bad = r#"{"polynomial": ["1"], "scope": 3, "set": {"set": "finite", "elements": ["1/3"]}}"#;
        assert!(ProblemSpec::from_json(bad).is_err());
        assert_eq!("5".parse::<Scope>().unwrap(), Scope::Prime(5));
    }

    #[test]
    fn round_trips() {
        let spec = ProblemSpec::from_json(r#"{"polynomial": ["0", "1/2", "1/2"], "scope": "global", "point": "3/2"}"#)
            .unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(ProblemSpec::from_json(&text).unwrap(), spec);
    }
}
