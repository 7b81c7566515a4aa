//! Horizon-bounded convergence verdicts.
//!
//! A verdict classifies the trajectory of log partial products
//! `S_n = sum(log a_k, k <= n)` observed over a trailing window. The
//! classification is a heuristic decision procedure: it certifies behavior up
//! to the horizon and records `n_used` and `eps` with every answer.

use serde::{Deserialize, Serialize};

use crate::numerics::NeumaierSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Converges,
    DivergesToZero,
    DivergesToInfinity,
    Oscillates,
    Inconclusive,
}

/// Classification of a product's behavior with the estimates backing it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub limit_estimate: Option<f64>,
    #[serde(rename = "liminf")]
    pub liminf_estimate: Option<f64>,
    #[serde(rename = "limsup")]
    pub limsup_estimate: Option<f64>,
    pub n_used: u64,
    pub eps: f64,
    pub evidence: String,
}

impl Verdict {
    pub fn converges(&self) -> bool {
        self.kind == VerdictKind::Converges
    }

    pub(crate) fn inconclusive(n_used: u64, eps: f64, evidence: impl Into<String>) -> Self {
        Verdict {
            kind: VerdictKind::Inconclusive,
            limit_estimate: None,
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: evidence.into(),
        }
    }
}

/// Log magnitude past which exp(S) has left the binary64 range.
pub const LOG_ESCAPE: f64 = 700.0;

/// Half-window log-range below which decaying fluctuations count as settled.
const SETTLED_RANGE: f64 = 0.05;
/// Required shrink factor between consecutive half-window ranges.
const DECAY_FACTOR: f64 = 0.8;
/// Oscillation: half-window ranges must agree to this fraction of the range.
const OSC_RANGE_AGREE: f64 = 0.05;
/// Oscillation: the drift between half-window means must stay below this
/// fraction of the oscillation range (rules out linear trends).
const OSC_DRIFT_FRAC: f64 = 0.25;

struct HalfStats {
    min: f64,
    max: f64,
    mean: f64,
}

fn half_stats(values: &[f64]) -> HalfStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = NeumaierSum::new();
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum.add(v);
    }
    HalfStats {
        min,
        max,
        mean: sum.value() / values.len() as f64,
    }
}

/// Classify a trailing-window trajectory of log partial products.
///
/// `window` holds `S_n` for the last `W+1` realized indices, ending at the
/// horizon. The decision order is: range escape, strict Cauchy window,
/// decaying fluctuations, stabilized oscillation, drift slope, inconclusive.
pub fn classify_log_window(window: &[f64], n_used: u64, eps: f64) -> Verdict {
    let w = window.len();
    if w < 8 {
        return Verdict::inconclusive(n_used, eps, format!("window too short ({w} samples)"));
    }
    let s_final = window[w - 1];

    if !(-LOG_ESCAPE..=LOG_ESCAPE).contains(&s_final) {
        let kind = if s_final > 0.0 {
            VerdictKind::DivergesToInfinity
        } else {
            VerdictKind::DivergesToZero
        };
        return Verdict {
            kind,
            limit_estimate: None,
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: format!("log partial product escaped to {s_final:.6e}"),
        };
    }

    let (h1, h2) = window.split_at(w / 2);
    let a = half_stats(h1);
    let b = half_stats(h2);
    let r1 = a.max - a.min;
    let r2 = b.max - b.min;
    let r_full = a.max.max(b.max) - a.min.min(b.min);
    let drift = b.mean - a.mean;
    let slope = drift / (w as f64 / 2.0);
    let stats = format!(
        "window [{}..{}]: range={r_full:.6e} halves=({r1:.6e},{r2:.6e}) drift={drift:.6e}",
        n_used - (w as u64 - 1),
        n_used
    );

    // A limit of exp(S) outside [eps, 1/eps] does not count as convergence.
    let bounded = s_final.abs() <= -eps.ln();

    // Strict Cauchy window: every tail ratio inside the window is within eps
    // of 1, i.e. the log range stays below log(1 + eps).
    if r_full <= eps.ln_1p() && bounded {
        return Verdict {
            kind: VerdictKind::Converges,
            limit_estimate: Some(s_final.exp()),
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: format!("cauchy window settled; {stats}"),
        };
    }

    // Decaying fluctuations: the half-window ranges shrink and the recent
    // range is already small on the log scale.
    if r2 <= DECAY_FACTOR * r1 && r2 <= SETTLED_RANGE && bounded {
        return Verdict {
            kind: VerdictKind::Converges,
            limit_estimate: Some(s_final.exp()),
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: format!("fluctuations decaying; {stats}"),
        };
    }

    // Stabilized oscillation: both halves show the same range, the mean does
    // not drift, and the range is genuinely larger than eps.
    let range_agree = (r2 - r1).abs() <= eps.max(OSC_RANGE_AGREE * r1.max(r2));
    if r2 > eps && range_agree && drift.abs() <= OSC_DRIFT_FRAC * r2 {
        return Verdict {
            kind: VerdictKind::Oscillates,
            limit_estimate: None,
            liminf_estimate: Some(b.min.exp()),
            limsup_estimate: Some(b.max.exp()),
            n_used,
            eps,
            evidence: format!("stabilized oscillation; {stats}"),
        };
    }

    // Monotone drift beyond the slope threshold.
    let slope_threshold = eps / w as f64;
    if slope > slope_threshold {
        return Verdict {
            kind: VerdictKind::DivergesToInfinity,
            limit_estimate: None,
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: format!("positive drift {slope:.6e} per step; {stats}"),
        };
    }
    if slope < -slope_threshold {
        return Verdict {
            kind: VerdictKind::DivergesToZero,
            limit_estimate: None,
            liminf_estimate: None,
            limsup_estimate: None,
            n_used,
            eps,
            evidence: format!("negative drift {slope:.6e} per step; {stats}"),
        };
    }

    Verdict::inconclusive(n_used, eps, format!("no stable pattern; {stats}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify_seq(f: impl Fn(u64) -> f64, n: u64, w: u64, eps: f64) -> Verdict {
        let window: Vec<f64> = ((n - w)..=n).map(f).collect();
        classify_log_window(&window, n, eps)
    }

    #[test]
    fn constant_log_sum_converges() {
        let v = classify_seq(|_| 0.0, 1000, 500, 1e-9);
        assert_eq!(v.kind, VerdictKind::Converges);
        assert_eq!(v.limit_estimate, Some(1.0));
    }

    #[test]
    fn harmonic_growth_diverges_to_infinity() {
        let v = classify_seq(|n| (n as f64 + 1.0).ln(), 1_000_000, 500_000, 1e-9);
        assert_eq!(v.kind, VerdictKind::DivergesToInfinity);
    }

    #[test]
    fn negated_harmonic_diverges_to_zero() {
        let v = classify_seq(|n| -((n as f64 + 1.0).ln()), 1_000_000, 500_000, 1e-9);
        assert_eq!(v.kind, VerdictKind::DivergesToZero);
    }

    #[test]
    fn alternating_harmonic_tail_converges() {
        // S_n within c +- 1/(2n), alternating by parity.
        let v = classify_seq(
            |n| {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                2.0_f64.ln() + sign * 0.5 / n as f64
            },
            1_000_000,
            500_000,
            1e-9,
        );
        assert_eq!(v.kind, VerdictKind::Converges);
    }

    #[test]
    fn two_level_oscillation_is_detected() {
        let v = classify_seq(
            |n| if n % 2 == 0 { 0.0 } else { -(2.0_f64.ln()) },
            100_000,
            50_000,
            1e-9,
        );
        assert_eq!(v.kind, VerdictKind::Oscillates);
        let lo = v.liminf_estimate.unwrap();
        let hi = v.limsup_estimate.unwrap();
        assert!((lo - 0.5).abs() < 1e-12);
        assert!((hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn escape_wins_over_everything() {
        let v = classify_seq(|n| n as f64, 2000, 1000, 1e-9);
        assert_eq!(v.kind, VerdictKind::DivergesToInfinity);
    }

    #[test]
    fn linear_trend_is_not_oscillation() {
        // Constant half-window ranges but a strong drift.
        let v = classify_seq(|n| 1e-4 * n as f64, 100_000, 50_000, 1e-9);
        assert_eq!(v.kind, VerdictKind::DivergesToInfinity);
    }

    #[test]
    fn short_window_is_inconclusive() {
        let v = classify_log_window(&[0.0; 4], 4, 1e-9);
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }
}
