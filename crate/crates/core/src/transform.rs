//! Strictly increasing maps `h` used to build isomorphic objectives `h∘f`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneTransform {
    /// `a·v + b`, `a > 0`.
    Linear { a: f64, b: f64 },
    /// `v^p` for odd `p ≥ 3`.
    OddPower { p: u32 },
    /// `ln(v − lower + 1)`, defined for `v > lower − 1`.
    LogShift { lower: f64 },
    /// `exp((v − offset) / scale)`. Unset parameters are fitted to the
    /// data by [`MonotoneTransform::resolve`]: `offset` = data minimum,
    /// `scale` = data range, which keeps the output in `[1, e]`.
    Exponential {
        offset: Option<f64>,
        scale: Option<f64>,
    },
    /// Applied left to right.
    Composite { parts: Vec<MonotoneTransform> },
}

impl MonotoneTransform {
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "linear transform needs a > 0, got a = {a}"
            )));
        }
        Ok(Self::Linear { a, b })
    }

    pub fn odd_power(p: u32) -> Result<Self> {
        if p < 3 || p % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "odd_power needs an odd exponent ≥ 3, got {p}"
            )));
        }
        Ok(Self::OddPower { p })
    }

    pub fn log_shift(lower: f64) -> Self {
        Self::LogShift { lower }
    }

    pub fn exponential() -> Self {
        Self::Exponential {
            offset: None,
            scale: None,
        }
    }

    pub fn composite(parts: Vec<MonotoneTransform>) -> Self {
        Self::Composite { parts }
    }

    /// True when the map is affine with positive slope.
    pub fn is_linear(&self) -> bool {
        match self {
            Self::Linear { .. } => true,
            Self::Composite { parts } => parts.iter().all(Self::is_linear),
            _ => false,
        }
    }

    /// Fixes data-dependent parameters using the values the map will see.
    pub fn resolve(&self, values: &[f64]) -> Self {
        match self {
            Self::Exponential { offset, scale } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let range = if lo.is_finite() && hi > lo { hi - lo } else { 1.0 };
                Self::Exponential {
                    offset: Some(offset.unwrap_or(if lo.is_finite() { lo } else { 0.0 })),
                    scale: Some(scale.unwrap_or(range)),
                }
            }
            Self::Composite { parts } => {
                let mut current = values.to_vec();
                let mut resolved = Vec::with_capacity(parts.len());
                for part in parts {
                    let r = part.resolve(&current);
                    current = current.iter().map(|&v| r.eval(v)).collect();
                    resolved.push(r);
                }
                Self::Composite { parts: resolved }
            }
            other => other.clone(),
        }
    }

    /// Raw evaluation; may be non-finite outside the validity range.
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Self::Linear { a, b } => a * v + b,
            Self::OddPower { p } => v.powi(*p as i32),
            // ln_1p keeps values near `lower` distinguishable
            Self::LogShift { lower } => {
                let shifted = v - lower;
                if shifted > -1.0 {
                    shifted.ln_1p()
                } else {
                    f64::NAN
                }
            }
            Self::Exponential { offset, scale } => {
                ((v - offset.unwrap_or(0.0)) / scale.unwrap_or(1.0)).exp()
            }
            Self::Composite { parts } => parts.iter().fold(v, |acc, t| t.eval(acc)),
        }
    }

    /// Checked evaluation.
    pub fn apply(&self, v: f64) -> Result<f64> {
        let out = self.eval(v);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::TransformDomain {
                transform: self.to_string(),
                value: v,
            })
        }
    }

    /// Fails on the first value the map cannot send to a finite number.
    pub fn check_domain(&self, values: &[f64]) -> Result<()> {
        values.iter().try_for_each(|&v| self.apply(v).map(drop))
    }
}

impl fmt::Display for MonotoneTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { a, b } => write!(f, "linear({a},{b})"),
            Self::OddPower { p } => write!(f, "odd_power({p})"),
            Self::LogShift { lower } => write!(f, "log_shift({lower})"),
            Self::Exponential {
                offset: None,
                scale: None,
            } => write!(f, "exponential"),
            Self::Exponential { offset, scale } => write!(
                f,
                "exponential({},{})",
                offset.unwrap_or(0.0),
                scale.unwrap_or(1.0)
            ),
            Self::Composite { parts } => {
                write!(f, "composite(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for MonotoneTransform {
    type Err = Error;

    /// Accepts the `Display` forms plus `cube` and `exp`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse transform `{s}`"));
        let args = |prefix: &str| -> Option<Vec<f64>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|x| x.trim().parse().ok()).collect()
        };
        match s {
            "cube" => return Self::odd_power(3),
            "exp" | "exponential" => return Ok(Self::exponential()),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("composite(").and_then(|r| r.strip_suffix(')')) {
            let parts = inner
                .split(';')
                .map(str::parse)
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self::composite(parts));
        }
        if let Some(v) = args("linear") {
            return match v.as_slice() {
                [a, b] => Self::linear(*a, *b),
                _ => Err(bad()),
            };
        }
        if let Some(v) = args("odd_power") {
            return match v.as_slice() {
                [p] if p.fract() == 0.0 && *p > 0.0 => Self::odd_power(*p as u32),
                _ => Err(bad()),
            };
        }
        if let Some(v) = args("log_shift") {
            return match v.as_slice() {
                [lower] => Ok(Self::log_shift(*lower)),
                _ => Err(bad()),
            };
        }
        if let Some(v) = args("exponential") {
            return match v.as_slice() {
                [offset, scale] if *scale > 0.0 => Ok(Self::Exponential {
                    offset: Some(*offset),
                    scale: Some(*scale),
                }),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }
}

/// The standard audit suite: two linear maps, a cube, an exponential and,
/// when the optimum is known, `ln(f − f* + 1)`.
pub fn transform_suite(f_star: Option<f64>) -> Vec<MonotoneTransform> {
    let mut suite = vec![
        MonotoneTransform::Linear { a: 2.0, b: 5.0 },
        MonotoneTransform::Linear { a: 0.1, b: -3.0 },
        MonotoneTransform::OddPower { p: 3 },
        MonotoneTransform::exponential(),
    ];
    if let Some(fs) = f_star {
        suite.push(MonotoneTransform::log_shift(fs));
    }
    suite
}
