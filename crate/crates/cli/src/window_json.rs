//! Window descriptions on the command line: JSON files or inline presets.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gabor_zz::window::DEFAULT_GAMMA;
use gabor_zz::{ExpTerm, ShiftTerm, WindowSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number written as `1.5` or `[1.5, -2.0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl JsonComplex {
    fn value(self) -> Complex64 {
        match self {
            JsonComplex::Real(re) => Complex64::new(re, 0.0),
            JsonComplex::Pair([re, im]) => Complex64::new(re, im),
        }
    }

    fn from(c: Complex64) -> Self {
        JsonComplex::Pair([c.re, c.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonTerm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<JsonComplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<JsonComplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<JsonComplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// The window JSON document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<JsonComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den_coeffs: Option<Vec<JsonComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<JsonTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
}

fn complexes(v: &[JsonComplex]) -> Vec<Complex64> {
    v.iter().map(|c| c.value()).collect()
}

fn require<T: Clone>(field: &Option<T>, name: &str, variant: &str) -> Result<T> {
    field
        .clone()
        .with_context(|| format!("variant \"{variant}\" needs the field \"{name}\""))
}

impl WindowConfig {
    fn present_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.gamma.is_some() {
            out.push("gamma");
        }
        if self.n.is_some() {
            out.push("n");
        }
        if self.coeffs.is_some() {
            out.push("coeffs");
        }
        if self.den_coeffs.is_some() {
            out.push("den_coeffs");
        }
        if self.deltas.is_some() {
            out.push("deltas");
        }
        if self.terms.is_some() {
            out.push("terms");
        }
        if self.support.is_some() {
            out.push("support");
        }
        if self.smoothness.is_some() {
            out.push("smoothness");
        }
        out
    }

    pub fn to_spec(&self) -> Result<WindowSpec> {
        let v = self.variant.as_str();
        let allowed: &[&str] = match v {
            "gaussian" => &["gamma"],
            "hermite" => &["n"],
            "poly_gaussian" => &["coeffs", "gamma"],
            "rational_gaussian" => &["coeffs", "den_coeffs", "gamma"],
            "exp_poly_gaussian" => &["terms", "gamma"],
            "totally_positive_gaussian" => &["deltas", "gamma"],
            "shifted_gaussian_combo" => &["terms"],
            "compact_bump" => &["support", "smoothness"],
            other => bail!(
                "unknown window variant \"{other}\" (expected gaussian, hermite, poly_gaussian, \
                 rational_gaussian, exp_poly_gaussian, totally_positive_gaussian, \
                 shifted_gaussian_combo or compact_bump)"
            ),
        };
        if let Some(f) = self.present_fields().into_iter().find(|f| !allowed.contains(f)) {
            bail!("field \"{f}\" does not apply to variant \"{v}\"");
        }
        let gamma = self.gamma.unwrap_or(DEFAULT_GAMMA);
        Ok(match v {
            "gaussian" => WindowSpec::Gaussian { gamma },
            "hermite" => WindowSpec::Hermite {
                n: require(&self.n, "n", v)?,
            },
            "poly_gaussian" => WindowSpec::PolyGaussian {
                coeffs: complexes(&require(&self.coeffs, "coeffs", v)?),
                gamma,
            },
            "rational_gaussian" => WindowSpec::RationalGaussian {
                num: complexes(&require(&self.coeffs, "coeffs", v)?),
                den: complexes(&require(&self.den_coeffs, "den_coeffs", v)?),
                gamma,
            },
            "exp_poly_gaussian" => WindowSpec::ExpPolyGaussian {
                terms: require(&self.terms, "terms", v)?
                    .iter()
                    .map(|t| {
                        if t.d.is_some() || t.a.is_some() || t.b.is_some() {
                            bail!("exp_poly_gaussian terms take \"coeff\" and \"lambda\" only");
                        }
                        Ok(ExpTerm {
                            coeff: require(&t.coeff, "coeff", v)?.value(),
                            lambda: require(&t.lambda, "lambda", v)?.value(),
                        })
                    })
                    .collect::<Result<_>>()?,
                gamma,
            },
            "totally_positive_gaussian" => WindowSpec::TotallyPositiveGaussian {
                deltas: require(&self.deltas, "deltas", v)?,
                gamma,
            },
            "shifted_gaussian_combo" => WindowSpec::ShiftedGaussianCombo {
                terms: require(&self.terms, "terms", v)?
                    .iter()
                    .map(|t| {
                        if t.coeff.is_some() || t.lambda.is_some() {
                            bail!("shifted_gaussian_combo terms take \"d\", \"a\" and \"b\" only");
                        }
                        Ok(ShiftTerm {
                            d: require(&t.d, "d", v)?.value(),
                            a: t.a.unwrap_or(0.0),
                            b: t.b.unwrap_or(0.0),
                        })
                    })
                    .collect::<Result<_>>()?,
            },
            "compact_bump" => {
                let [lo, hi] = require(&self.support, "support", v)?;
                WindowSpec::CompactBump {
                    support: (lo, hi),
                    smoothness: self.smoothness.unwrap_or(1.0),
                }
            }
            _ => unreachable!(),
        })
    }

    /// The canonical document for a spec, echoed in reports.
    pub fn from_spec(spec: &WindowSpec) -> Self {
        let cx = |v: &[Complex64]| Some(v.iter().copied().map(JsonComplex::from).collect());
        let blank = WindowConfig::default();
        match spec {
            WindowSpec::Gaussian { gamma } => WindowConfig {
                variant: "gaussian".into(),
                gamma: Some(*gamma),
                ..blank
            },
            WindowSpec::Hermite { n } => WindowConfig {
                variant: "hermite".into(),
                n: Some(*n),
                ..blank
            },
            WindowSpec::PolyGaussian { coeffs, gamma } => WindowConfig {
                variant: "poly_gaussian".into(),
                coeffs: cx(coeffs),
                gamma: Some(*gamma),
                ..blank
            },
            WindowSpec::RationalGaussian { num, den, gamma } => WindowConfig {
                variant: "rational_gaussian".into(),
                coeffs: cx(num),
                den_coeffs: cx(den),
                gamma: Some(*gamma),
                ..blank
            },
            WindowSpec::ExpPolyGaussian { terms, gamma } => WindowConfig {
                variant: "exp_poly_gaussian".into(),
                terms: Some(
                    terms
                        .iter()
                        .map(|t| JsonTerm {
                            coeff: Some(JsonComplex::from(t.coeff)),
                            lambda: Some(JsonComplex::from(t.lambda)),
                            d: None,
                            a: None,
                            b: None,
                        })
                        .collect(),
                ),
                gamma: Some(*gamma),
                ..blank
            },
            WindowSpec::TotallyPositiveGaussian { deltas, gamma } => WindowConfig {
                variant: "totally_positive_gaussian".into(),
                deltas: Some(deltas.clone()),
                gamma: Some(*gamma),
                ..blank
            },
            WindowSpec::ShiftedGaussianCombo { terms } => WindowConfig {
                variant: "shifted_gaussian_combo".into(),
                terms: Some(
                    terms
                        .iter()
                        .map(|t| JsonTerm {
                            coeff: None,
                            lambda: None,
                            d: Some(JsonComplex::from(t.d)),
                            a: Some(t.a),
                            b: Some(t.b),
                        })
                        .collect(),
                ),
                ..blank
            },
            WindowSpec::CompactBump { support, smoothness } => WindowConfig {
                variant: "compact_bump".into(),
                support: Some([support.0, support.1]),
                smoothness: Some(*smoothness),
                ..blank
            },
        }
    }
}

/// `gaussian`, `hermite:N`, `bump` or `bump:LO,HI`; anything else is read as
/// a path to a window JSON file.
pub fn resolve(arg: &str) -> Result<WindowSpec> {
    if let Some(spec) = preset(arg)? {
        return Ok(spec);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read window file {arg}"))?;
    let cfg: WindowConfig =
        serde_json::from_str(&text).with_context(|| format!("invalid window JSON in {arg}"))?;
    cfg.to_spec().with_context(|| format!("invalid window in {arg}"))
}

fn preset(arg: &str) -> Result<Option<WindowSpec>> {
    let (name, param) = match arg.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (arg, None),
    };
    Ok(Some(match (name, param) {
        ("gaussian", None) => WindowSpec::gaussian(),
        ("hermite", Some(n)) => WindowSpec::hermite(n.parse().with_context(|| format!("bad Hermite order \"{n}\""))?),
        ("bump", None) => WindowSpec::bump(0.0, 1.0),
        ("bump", Some(range)) => {
            let (lo, hi) = range
                .split_once(',')
                .with_context(|| format!("bump preset needs LO,HI, got \"{range}\""))?;
            WindowSpec::bump(
                lo.trim().parse().context("bad bump support")?,
                hi.trim().parse().context("bad bump support")?,
            )
        }
        ("gaussian" | "hermite", _) => bail!("malformed window preset \"{arg}\""),
        _ => return Ok(None),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<WindowSpec> {
        serde_json::from_str::<WindowConfig>(s)?.to_spec()
    }

    #[test]
    fn presets() {
        assert_eq!(resolve("gaussian").unwrap(), WindowSpec::gaussian());
        assert_eq!(resolve("hermite:3").unwrap(), WindowSpec::hermite(3));
        assert_eq!(resolve("bump").unwrap(), WindowSpec::bump(0.0, 1.0));
        assert_eq!(resolve("bump:1,2.5").unwrap(), WindowSpec::bump(1.0, 2.5));
        assert!(resolve("hermite:x").is_err());
        assert!(resolve("hermite").is_err());
        assert!(resolve("/no/such/file.json").is_err());
    }

    #[test]
    fn documents() {
        assert_eq!(
            parse(r#"{"variant": "gaussian", "gamma": 2.0}"#).unwrap(),
            WindowSpec::Gaussian { gamma: 2.0 }
        );
        let spec = parse(r#"{"variant": "rational_gaussian", "coeffs": [1], "den_coeffs": [1, 0, [1, 0]]}"#).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(
            spec,
            WindowSpec::RationalGaussian {
                num: vec![one],
                den: vec![one, Complex64::new(0.0, 0.0), one],
                gamma: DEFAULT_GAMMA,
            }
        );
        let spec = parse(r#"{"variant": "exp_poly_gaussian", "terms": [{"coeff": 1, "lambda": 1}, {"coeff": 1, "lambda": -1}]}"#);
        assert!(matches!(spec.unwrap(), WindowSpec::ExpPolyGaussian { terms, .. } if terms.len() == 2));
        let spec = parse(r#"{"variant": "shifted_gaussian_combo", "terms": [{"d": [1, 0]}, {"d": 0.5, "a": 1, "b": 0.25}]}"#);
        assert!(matches!(spec.unwrap(), WindowSpec::ShiftedGaussianCombo { terms } if terms[1].b == 0.25));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse(r#"{"variant": "hermite"}"#).is_err());
        assert!(parse(r#"{"variant": "hermite", "n": 2, "gamma": 1}"#).is_err());
        assert!(parse(r#"{"variant": "wavelet"}"#).is_err());
        assert!(parse(r#"{"variant": "gaussian", "sigma": 1}"#).is_err());
        assert!(parse(r#"{"variant": "exp_poly_gaussian", "terms": [{"d": 1}]}"#).is_err());
    }

    #[test]
    fn round_trip() {
        for arg in ["gaussian", "hermite:4", "bump:0,1"] {
            let spec = resolve(arg).unwrap();
            let doc = serde_json::to_string(&WindowConfig::from_spec(&spec)).unwrap();
            assert_eq!(parse(&doc).unwrap(), spec);
        }
        let spec = WindowSpec::TotallyPositiveGaussian {
            deltas: vec![0.5, -0.25],
            gamma: 3.0,
        };
        let doc = serde_json::to_string(&WindowConfig::from_spec(&spec)).unwrap();
        assert_eq!(parse(&doc).unwrap(), spec);
    }
}
