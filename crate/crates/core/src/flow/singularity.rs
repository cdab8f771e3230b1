use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    OriginContact,
    CurvatureBlowup,
    StepUnderflow,
}

/// Where and when an evolution stopped, and why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub detected: bool,
    /// From the last computed time to the extrapolated singular time plus its fit spread.
    pub singular_time_bracket: [f64; 2],
    pub singular_point: Vec2,
    pub trigger: Option<Trigger>,
    #[serde(with = "nan_as_null")]
    pub max_curvature_at_stop: f64,
    #[serde(with = "nan_as_null")]
    pub min_radius_at_stop: f64,
    #[serde(with = "nan_as_null")]
    pub t_estimate: f64,
    #[serde(with = "nan_as_null")]
    pub confidence_width: f64,
    /// The min-radius series was not monotone near the stop.
    pub inconclusive: bool,
}

impl SingularityReport {
    pub fn none(t: f64, point: Vec2, max_curvature: f64, min_radius: f64) -> Self {
        SingularityReport {
            detected: false,
            singular_time_bracket: [t, t],
            singular_point: point,
            trigger: None,
            max_curvature_at_stop: max_curvature,
            min_radius_at_stop: min_radius,
            t_estimate: t,
            confidence_width: 0.0,
            inconclusive: false,
        }
    }

    pub fn bracket_width(&self) -> f64 {
        self.singular_time_bracket[1] - self.singular_time_bracket[0]
    }
}

/// JSON has no NaN; unavailable values are written as `null`.
pub(crate) mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularTimeEstimate {
    pub t_estimate: f64,
    pub confidence_width: f64,
    pub bracket: [f64; 2],
    pub inconclusive: bool,
}

const FIT_WINDOW: usize = 8;

/// Least-squares zero of `m² = α + βt`: the square-root model `m ≈ √(A(T − t))`.
fn sqrt_model_zero(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let t0 = samples[samples.len() - 1].0;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, m) in samples {
        let (x, y) = (t - t0, m * m);
        st += x;
        sy += y;
        stt += x * x;
        sty += x * y;
    }
    let det = n * stt - st * st;
    if det.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let beta = (n * sty - st * sy) / det;
    let alpha = (sy - beta * st) / n;
    (beta < 0.0).then(|| t0 - alpha / beta)
}

/// Extrapolates min |x|(t) → 0 with a square-root model over the last few samples
/// of a `(t, min |x|)` series. The bracket runs from the last computed time to the
/// extrapolated zero, widened by the disagreement between two fit windows.
pub fn estimate_singular_time(samples: &[(f64, f64)]) -> SingularTimeEstimate {
    let t_last = samples.last().map(|s| s.0).unwrap_or(0.0);
    let fallback = SingularTimeEstimate {
        t_estimate: t_last,
        confidence_width: 0.0,
        bracket: [t_last, t_last],
        inconclusive: true,
    };
    if samples.len() < 3 {
        return fallback;
    }
    let k = FIT_WINDOW.min(samples.len());
    let tail = &samples[samples.len() - k..];
    let monotone = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let Some(t1) = sqrt_model_zero(tail) else {
        return fallback;
    };
    let wide = &samples[samples.len() - (2 * k).min(samples.len())..];
    let t2 = sqrt_model_zero(wide).unwrap_or(t1);
    let t_est = t1.max(t_last);
    let upper = t_est + (t1 - t2).abs();
    SingularTimeEstimate {
        t_estimate: t_est,
        confidence_width: upper - t_last,
        bracket: [t_last, upper],
        inconclusive: !monotone,
    }
}
