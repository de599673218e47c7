//! Weight-sequence families and the divergence diagnostic for the `X_p`
//! condition `sum_{w_n < eps} w_n^{2p/(p-2)} = infinity`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, XpError};
use crate::operators::BlockSystem;
use crate::space::weight_pow;

/// Growth ratio across a doubling at or above which a family is flagged as
/// diverging at the given truncation.
pub const DIVERGING_RATIO: f64 = 1.5;

/// Multiplicities `m_k` of a doubly indexed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Multiplicity {
    /// `m_k = round(k^exponent)`, at least 1.
    Power { exponent: f64 },
    /// `m_k = ceil(w_k^{-2p/(p-2)})`, so each level carries omega-mass about 1.
    EqualMass { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightFamily {
    Constant {
        value: f64,
        #[serde(rename = "D")]
        d: usize,
    },
    /// `w_n = n^{-a}`.
    PowerLaw {
        a: f64,
        #[serde(rename = "D")]
        d: usize,
    },
    /// `w_n = ratio^n`.
    Geometric {
        ratio: f64,
        #[serde(rename = "D")]
        d: usize,
    },
    /// Level `k` repeats `w_k = k^{-b}` exactly `m_k` times.
    DoublyIndexed {
        b: f64,
        multiplicity: Multiplicity,
        #[serde(rename = "D")]
        d: usize,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl WeightFamily {
    /// The family's own truncation.
    pub fn dim(&self) -> usize {
        match self {
            WeightFamily::Constant { d, .. }
            | WeightFamily::PowerLaw { d, .. }
            | WeightFamily::Geometric { d, .. }
            | WeightFamily::DoublyIndexed { d, .. } => *d,
            WeightFamily::Explicit { values } => values.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(XpError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self {
            WeightFamily::Constant { value, .. } => positive("value", *value),
            WeightFamily::PowerLaw { a, .. } => {
                if a.is_finite() && *a >= 0.0 {
                    Ok(())
                } else {
                    Err(XpError::InvalidParameter(format!(
                        "a must be nonnegative, got {a}"
                    )))
                }
            }
            WeightFamily::Geometric { ratio, .. } => positive("ratio", *ratio),
            WeightFamily::DoublyIndexed {
                b, multiplicity, ..
            } => {
                positive("b", *b)?;
                match multiplicity {
                    Multiplicity::Power { exponent }
                        if !exponent.is_finite() || *exponent < 0.0 =>
                    {
                        Err(XpError::InvalidParameter(format!(
                            "exponent must be nonnegative, got {exponent}"
                        )))
                    }
                    Multiplicity::EqualMass { p } if !(*p > 2.0 && p.is_finite()) => {
                        Err(XpError::InvalidExponent(*p))
                    }
                    _ => Ok(()),
                }
            }
            WeightFamily::Explicit { values } => {
                values.iter().enumerate().try_for_each(|(i, &v)| {
                    if v.is_finite() && v > 0.0 {
                        Ok(())
                    } else {
                        Err(XpError::NonPositiveWeight {
                            index: i + 1,
                            value: v,
                        })
                    }
                })
            }
        }
    }

    /// The first `len` weights, ignoring the family's own `D`. Explicit
    /// lists are truncated to what they contain.
    pub fn generate_len(&self, len: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let out: Vec<f64> = match self {
            WeightFamily::Constant { value, .. } => vec![*value; len],
            WeightFamily::PowerLaw { a, .. } => (1..=len).map(|n| (n as f64).powf(-a)).collect(),
            WeightFamily::Geometric { ratio, .. } => {
                (1..=len).map(|n| ratio.powf(n as f64)).collect()
            }
            WeightFamily::DoublyIndexed {
                b, multiplicity, ..
            } => {
                let mut out = Vec::with_capacity(len);
                let mut k = 1usize;
                while out.len() < len {
                    let w = (k as f64).powf(-b);
                    let m = match multiplicity {
                        Multiplicity::Power { exponent } => {
                            ((k as f64).powf(*exponent).round() as usize).max(1)
                        }
                        Multiplicity::EqualMass { p } => {
                            let e = 2.0 * p / (p - 2.0);
                            (weight_pow(w, -e).ceil() as usize).max(1)
                        }
                    };
                    out.extend(std::iter::repeat_n(w, m.min(len - out.len())));
                    k += 1;
                }
                out
            }
            WeightFamily::Explicit { values } => values.iter().copied().take(len).collect(),
        };
        if let Some((i, &v)) = out
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(XpError::NonPositiveWeight {
                index: i + 1,
                value: v,
            });
        }
        Ok(out)
    }

    /// The `D` weights of the family.
    pub fn generate(&self) -> Result<Vec<f64>> {
        self.generate_len(self.dim())
    }

    /// The default experiment family: `w_k = k^{-1/4}` with equal omega-mass
    /// levels.
    pub fn default_experiment(p: f64, d: usize) -> Self {
        WeightFamily::DoublyIndexed {
            b: 0.25,
            multiplicity: Multiplicity::EqualMass { p },
            d,
        }
    }
}

/// `sum_{n in range, w_n < eps} w_n^{2p/(p-2)}` over 1-based `lo..=hi`.
pub fn partial_sum(weights: &[f64], p: f64, eps: f64, lo: usize, hi: usize) -> f64 {
    let e = 2.0 * p / (p - 2.0);
    let hi = hi.min(weights.len());
    if lo == 0 || lo > hi {
        return 0.0;
    }
    weights[lo - 1..hi]
        .iter()
        .filter(|&&w| w < eps)
        .map(|&w| weight_pow(w, e))
        .fold(0.0, |a, b| a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    #[serde(rename = "D")]
    pub d: usize,
    pub s: f64,
    /// `S(eps, 2D)` when the family reaches that far.
    pub s_double: Option<f64>,
    /// `S(eps, 2D) / S(eps, D)`.
    pub growth: Option<f64>,
    pub diverging: bool,
}

/// Partial sums `S(eps, D)` for each `D` with the growth across a doubling.
/// A heuristic: finite truncations never certify divergence.
pub fn rosenthal_diagnostic(
    f: &WeightFamily,
    p: f64,
    eps: f64,
    d_list: &[usize],
) -> Result<Vec<DiagnosticRow>> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(XpError::InvalidExponent(p));
    }
    if !(eps > 0.0) {
        return Err(XpError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let max_d = d_list.iter().copied().max().unwrap_or(0);
    let w = f.generate_len(2 * max_d)?;
    Ok(d_list
        .iter()
        .map(|&d| {
            let s = partial_sum(&w, p, eps, 1, d);
            let s_double = (2 * d <= w.len()).then(|| partial_sum(&w, p, eps, 1, 2 * d));
            let growth = s_double.filter(|_| s > 0.0).map(|sd| sd / s);
            DiagnosticRow {
                d,
                s,
                s_double,
                growth,
                diverging: growth.is_some_and(|g| g >= DIVERGING_RATIO),
            }
        })
        .collect())
}

/// `w'_j = omega(E_j)^{(p-2)/2p}` for each block.
pub fn induced_weights(sys: &BlockSystem) -> Vec<f64> {
    sys.induced_weights().to_vec()
}
