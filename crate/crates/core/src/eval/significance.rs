use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Significance level applied to Bonferroni-adjusted p-values.
pub const ALPHA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    /// `±inf` when every paired difference is the same non-zero value.
    #[serde(with = "extended_f64")]
    pub t: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

/// JSON numbers cannot hold infinities; they are written as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Two-tailed paired t-test on `a - b` with Bonferroni correction over
/// `comparisons` tests.
///
/// When every difference is identical the statistic degenerates: all-zero
/// differences give `t = 0, p = 1`; a constant non-zero difference is taken
/// as the limit `t = ±inf, p = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64], comparisons: usize) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("paired t-test needs n >= 2, got {n}")));
    }
    if comparisons == 0 {
        return Err(Error::InvalidArgument("comparisons must be >= 1".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("paired samples must be finite".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    let (t, p_raw) = if var == 0.0 || d.iter().all(|&x| x == d[0]) {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        }
    } else {
        let t = mean / (var / n as f64).sqrt();
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("n - 1 >= 1 degrees of freedom");
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    let p_adjusted = (p_raw * comparisons as f64).min(1.0);
    Ok(SignificanceResult {
        t,
        p_raw,
        p_adjusted,
        significant: p_adjusted < ALPHA,
    })
}
