//! JSON run configuration. Rationals travel as `"p/q"` strings so they stay
//! exact; plain JSON numbers are read through their shortest decimal form.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::admissible::{AdmissibleData, AdmissibleError, BaseFactor};
use crate::flow::{FlowConfig, FlowError, InitialData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("config error at {path}: {source}")]
    Admissible { path: String, source: AdmissibleError },
    #[error("config error: {0}")]
    Invalid(String),
}

/// An exact rational read from `"p/q"`, `"p"`, a decimal string, or a
/// JSON number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rational(pub BigRational);

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
            let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        parse_decimal(s).map(Rational)
    }
}

/// Exact value of a decimal literal such as `-0.125` or `1e-3`.
fn parse_decimal(s: &str) -> Result<BigRational, String> {
    let bad = || format!("{s:?} is not a rational number");
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int}{frac}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if shift >= 0 {
        r *= BigRational::from_integer(ten.pow(shift as u32));
    } else {
        r /= BigRational::from_integer(ten.pow((-shift) as u32));
    }
    Ok(if neg { -r } else { r })
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or a number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                parse_decimal(&format!("{v:e}")).map(Rational).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub d: u32,
    pub s: Rational,
    pub x: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: FlowConfig::default().n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSpec {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub tol_conv: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let d = FlowConfig::default();
        Self { cfl: d.cfl, dt_max: d.dt_max, t_end: d.t_end, tol_conv: d.tol_conv }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Canonical,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(rename = "type")]
    pub kind: InitialKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub power: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { kind: InitialKind::Perturbed, amplitude: 0.1, power: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scales: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub interval: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { interval: FlowConfig::default().output_interval }
    }
}

/// The file format, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub factors: Vec<FactorSpec>,
    pub d0: u32,
    pub dinf: u32,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: AdmissibleData,
    pub flow: FlowConfig,
    pub initial: InitialData,
    pub sweep: Option<Vec<BigRational>>,
}

impl RunConfig {
    pub fn to_file(&self) -> ConfigFile {
        let (kind, amplitude, power) = match self.initial {
            InitialData::Canonical => (InitialKind::Canonical, 0.0, 1.0),
            InitialData::Perturbed { amplitude, power } => (InitialKind::Perturbed, amplitude, power),
        };
        ConfigFile {
            factors: self
                .data
                .base_factors
                .iter()
                .map(|f| FactorSpec { d: f.d, s: Rational(f.s.clone()), x: Rational(f.x.clone()) })
                .collect(),
            d0: self.data.d0,
            dinf: self.data.dinf,
            grid: GridSpec { n: self.flow.n },
            flow: FlowSpec {
                cfl: self.flow.cfl,
                dt_max: self.flow.dt_max,
                t_end: self.flow.t_end,
                tol_conv: self.flow.tol_conv,
            },
            initial: InitialSpec { kind, amplitude, power },
            sweep: self
                .sweep
                .as_ref()
                .map(|s| SweepSpec { scales: s.iter().cloned().map(Rational).collect() }),
            output: OutputSpec { interval: self.flow.output_interval },
        }
    }
}

impl TryFrom<ConfigFile> for RunConfig {
    type Error = ConfigError;

    fn try_from(file: ConfigFile) -> Result<Self, ConfigError> {
        let factors = file
            .factors
            .into_iter()
            .map(|f| BaseFactor::new(f.d, f.s.0, f.x.0))
            .collect();
        let data = AdmissibleData::new(factors, file.d0, file.dinf).map_err(|e| ConfigError::Admissible {
            path: e.field_path().unwrap_or_else(|| "factors".to_string()),
            source: e,
        })?;
        let flow = FlowConfig {
            n: file.grid.n,
            cfl: file.flow.cfl,
            dt_max: file.flow.dt_max,
            t_end: file.flow.t_end,
            tol_conv: file.flow.tol_conv,
            output_interval: file.output.interval,
        };
        flow.validate().map_err(|e| match e {
            FlowError::InvalidConfig { field, message } => ConfigError::Schema {
                path: match field {
                    "n" => "grid.n".to_string(),
                    "output_interval" => "output.interval".to_string(),
                    other => format!("flow.{other}"),
                },
                message,
            },
            other => ConfigError::Invalid(other.to_string()),
        })?;
        let initial = match file.initial.kind {
            InitialKind::Canonical => InitialData::Canonical,
            InitialKind::Perturbed => {
                if !(file.initial.power >= 1.0) {
                    return Err(ConfigError::Schema {
                        path: "initial.power".to_string(),
                        message: format!("power = {} must be at least 1", file.initial.power),
                    });
                }
                if !file.initial.amplitude.is_finite() {
                    return Err(ConfigError::Schema {
                        path: "initial.amplitude".to_string(),
                        message: "amplitude must be finite".to_string(),
                    });
                }
                InitialData::Perturbed { amplitude: file.initial.amplitude, power: file.initial.power }
            }
        };
        let sweep = match file.sweep {
            None => None,
            Some(s) => {
                for (i, r) in s.scales.iter().enumerate() {
                    if !r.0.is_positive() || r.0 > BigRational::one() {
                        return Err(ConfigError::Schema {
                            path: format!("sweep.scales[{i}]"),
                            message: format!("scale {r} must lie in (0, 1]"),
                        });
                    }
                }
                Some(s.scales.into_iter().map(|r| r.0).collect())
            }
        };
        Ok(RunConfig { data, flow, initial, sweep })
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    RunConfig::try_from(file)
}

pub fn serialize_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(&config.to_file()).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycalc::{rat, rat_int};

    #[test]
    fn koiso_config() {
        let c = parse_config(r#"{"factors":[{"d":1,"s":"2","x":"1/2"}],"d0":0,"dinf":0}"#).unwrap();
        assert_eq!(c.data, AdmissibleData::koiso(1, rat(1, 2)).unwrap());
        assert_eq!(c.flow, FlowConfig::default());
    }

    #[test]
    fn round_config() {
        let c = parse_config(r#"{"factors":[],"d0":0,"dinf":0}"#).unwrap();
        assert!(c.data.base_factors.is_empty());
    }

    #[test]
    fn bad_x_reports_path() {
        let err = parse_config(r#"{"factors":[{"d":1,"s":"2","x":"3/2"}],"d0":0,"dinf":0}"#).unwrap_err();
        match err {
            ConfigError::Admissible { path, .. } => assert_eq!(path, "factors[0].x"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_report_path() {
        let err = parse_config(r#"{"factors":[{"d":1,"s":"2","x":"zz"}],"d0":0,"dinf":0}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { path, .. } if path == "factors[0].x"), "{err:?}");
        let err = parse_config(r#"{"factors":[],"d0":0,"dinf":0,"grid":{"n":15}}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { path, .. } if path == "grid.n"), "{err:?}");
        let err = parse_config(r#"{"factors":[],"d0":0}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Schema { .. }));
    }

    #[test]
    fn numbers_are_exact() {
        let c = parse_config(r#"{"factors":[{"d":2,"s":3,"x":0.1}],"d0":0,"dinf":1,"sweep":{"scales":[1,"1/2",0.25]}}"#)
            .unwrap();
        assert_eq!(c.data.base_factors[0].x, rat(1, 10));
        assert_eq!(c.data.base_factors[0].s, rat_int(3));
        assert_eq!(c.sweep.unwrap(), vec![rat_int(1), rat(1, 2), rat(1, 4)]);
        assert_eq!("-1.5e-2".parse::<Rational>().unwrap().0, rat(-3, 200));
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"factors":[{"d":1,"s":"-7/3","x":"-1/9"}],"d0":1,"dinf":2,
            "grid":{"n":64},"flow":{"cfl":0.3,"dt_max":0.001,"t_end":2.5,"tol_conv":1e-9},
            "initial":{"type":"canonical"},"sweep":{"scales":["1/3"]},"output":{"interval":0.2}}"#;
        let c = parse_config(text).unwrap();
        let again = parse_config(&serialize_config(&c)).unwrap();
        assert_eq!(c, again);
    }
}
