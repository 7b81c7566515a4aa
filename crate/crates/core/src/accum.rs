//! Log-domain partial products, convergence estimation, m-absolute
//! convergence, weighted geometric means, and the series oracle.
//!
//! All products are accumulated as compensated sums of `log a_n`; the value
//! `u_n = exp(S_n)` is materialized only on output. The m-absolute channel
//! sums `|log a_n| = log mmod(a_n)` from the same term evaluations, so the
//! raw product and its mmod transform are always consistent.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{CompensatedSum, DoubleDouble, NeumaierSum, Precision};
use crate::seq::{PosSeq, RealSeq};
use crate::verdict::{classify_log_window, Verdict, VerdictKind};

/// Shared knobs for horizon-bounded analyses.
#[derive(Clone, Copy, Debug)]
pub struct AnalysisParams {
    pub eps: f64,
    pub n_max: u64,
    pub window: u64,
    pub precision: Precision,
}

impl AnalysisParams {
    pub fn new(eps: f64, n_max: u64, window: u64, precision: Precision) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if n_max < 2 || window == 0 || window >= n_max {
            return Err(Error::InvalidInput(format!(
                "need n_max > window >= 1, got n_max={n_max} window={window}"
            )));
        }
        Ok(AnalysisParams {
            eps,
            n_max,
            window,
            precision,
        })
    }

    /// Default tolerances at a given horizon: eps 1e-9, window = horizon / 2.
    pub fn with_horizon(n_max: u64) -> Self {
        AnalysisParams {
            eps: 1e-9,
            n_max,
            window: (n_max / 2).max(1),
            precision: Precision::Fast,
        }
    }
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self::with_horizon(1_000_000)
    }
}

/// Compensated log-domain partial-product state.
///
/// Tracks `S_n = sum(log a_k)` and `sum |log a_k|`, plus a ring buffer of the
/// most recent log partial products.
#[derive(Clone, Debug)]
pub struct LogAccumulator {
    count: u64,
    sum: CompensatedSum,
    abs_sum: CompensatedSum,
    window: VecDeque<f64>,
    capacity: usize,
    overflow: u64,
    underflow: u64,
}

impl LogAccumulator {
    pub fn new(precision: Precision, window_capacity: usize) -> Self {
        LogAccumulator {
            count: 0,
            sum: CompensatedSum::new(precision),
            abs_sum: CompensatedSum::new(precision),
            window: VecDeque::with_capacity(window_capacity.min(1 << 20)),
            capacity: window_capacity,
            overflow: 0,
            underflow: 0,
        }
    }

    pub fn push_log(&mut self, log_term: f64) {
        self.count += 1;
        self.sum.add(log_term);
        self.abs_sum.add(log_term.abs());
        let s = self.sum.value();
        if self.capacity > 0 {
            if self.window.len() == self.capacity {
                self.window.pop_front();
            }
            self.window.push_back(s);
        }
        let u = s.exp();
        if u.is_infinite() {
            self.overflow += 1;
        } else if u == 0.0 {
            self.underflow += 1;
        }
    }

    pub fn n(&self) -> u64 {
        self.count
    }

    pub fn logsum(&self) -> f64 {
        self.sum.value()
    }

    pub fn abs_logsum(&self) -> f64 {
        self.abs_sum.value()
    }

    /// The current partial product; may overflow to `inf` or underflow to 0,
    /// in which case the log state is still intact.
    pub fn u(&self) -> f64 {
        self.sum.value().exp()
    }

    pub fn window_logs(&self) -> &VecDeque<f64> {
        &self.window
    }

    pub fn overflow_events(&self) -> u64 {
        self.overflow
    }

    pub fn underflow_events(&self) -> u64 {
        self.underflow
    }
}

/// Stream of `(n, u_n)` for the first `n_max` factors.
pub fn partial_products<'a>(
    seq: &'a PosSeq,
    n_max: u64,
    precision: Precision,
) -> impl Iterator<Item = Result<(u64, f64)>> + 'a {
    let origin = seq.origin();
    let mut acc = LogAccumulator::new(precision, 0);
    (1..=n_max).map(move |k| {
        let log = seq.log_term(origin + k - 1)?;
        acc.push_log(log);
        Ok((k, acc.u()))
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Checkpoint {
    /// Number of factors consumed.
    pub n: u64,
    /// Sequence index of the last factor.
    pub index: u64,
    /// `log u_n` on the selected channel.
    pub log_u: f64,
    /// `log prod mmod(a_k)` on the selected channel.
    pub log_mmod_u: f64,
}

/// One full pass over the first `n_max` factors, recording the raw and
/// m-absolute channels plus a double-double shadow of the raw channel.
pub(crate) struct Trajectory {
    pub n_terms: u64,
    pub s_raw: f64,
    pub s_raw_oracle: f64,
    pub s_abs: f64,
    pub window_raw: Vec<f64>,
    pub window_abs: Vec<f64>,
    pub window_raw_oracle: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
}

pub(crate) fn run_trajectory(seq: &PosSeq, params: &AnalysisParams) -> Result<Trajectory> {
    let origin = seq.origin();
    let n_max = params.n_max;
    let window_from = n_max - params.window;

    let mut neumaier = NeumaierSum::new();
    let mut dd = DoubleDouble::new();
    let mut abs = CompensatedSum::new(params.precision);

    let cap = (params.window + 1) as usize;
    let mut window_raw = Vec::with_capacity(cap);
    let mut window_abs = Vec::with_capacity(cap);
    let mut window_raw_oracle = Vec::with_capacity(cap);
    let mut checkpoints = Vec::new();

    for k in 1..=n_max {
        let idx = origin + k - 1;
        let log = seq.log_term(idx)?;
        neumaier.add(log);
        dd.add(log);
        abs.add(log.abs());

        let s_sel = match params.precision {
            Precision::Fast => neumaier.value(),
            Precision::Oracle => dd.value(),
        };
        if k >= window_from {
            window_raw.push(s_sel);
            window_abs.push(abs.value());
            window_raw_oracle.push(dd.value());
        }
        if k.is_power_of_two() || k == n_max {
            checkpoints.push(Checkpoint {
                n: k,
                index: idx,
                log_u: s_sel,
                log_mmod_u: abs.value(),
            });
        }
    }

    Ok(Trajectory {
        n_terms: n_max,
        s_raw: match params.precision {
            Precision::Fast => neumaier.value(),
            Precision::Oracle => dd.value(),
        },
        s_raw_oracle: dd.value(),
        s_abs: abs.value(),
        window_raw,
        window_abs,
        window_raw_oracle,
        checkpoints,
    })
}

/// Convergence verdict for `prod a_n` from the windowed Cauchy analysis.
pub fn estimate_convergence(seq: &PosSeq, params: &AnalysisParams) -> Result<Verdict> {
    let t = run_trajectory(seq, params)?;
    Ok(classify_log_window(&t.window_raw, t.n_terms, params.eps))
}

/// Verdict for `prod mmod(a_n)` plus the bounds implied by it.
#[derive(Clone, Debug, Serialize)]
pub struct MAbsoluteReport {
    /// Verdict for the mmod-transformed product.
    pub verdict: Verdict,
    /// Verdict for the raw product, evaluated when the mmod product
    /// converges ("m-absolute convergence implies convergence").
    pub raw_verdict: Option<Verdict>,
    pub implies_convergence_ok: Option<bool>,
    /// The sandwich `(prod mmod)^-1 <= prod a <= prod mmod` at every dyadic
    /// checkpoint, allowing 4 ulp of compensation slack.
    pub sandwich_ok: bool,
    /// Worst signed excess of `|log u|` over `log mmod-product`.
    pub sandwich_max_excess: f64,
    pub checkpoints: Vec<Checkpoint>,
}

pub fn m_absolute_verdict(seq: &PosSeq, params: &AnalysisParams) -> Result<MAbsoluteReport> {
    let t = run_trajectory(seq, params)?;
    let verdict = classify_log_window(&t.window_abs, t.n_terms, params.eps);

    let mut max_excess = f64::NEG_INFINITY;
    for cp in &t.checkpoints {
        max_excess = max_excess.max(cp.log_u.abs() - cp.log_mmod_u);
    }
    let slack = 4.0 * f64::EPSILON * (1.0 + t.s_abs.abs());
    let sandwich_ok = max_excess <= slack;

    let (raw_verdict, implies_ok) = if verdict.converges() {
        let raw = classify_log_window(&t.window_raw, t.n_terms, params.eps);
        let ok = raw.converges();
        (Some(raw), Some(ok))
    } else {
        (None, None)
    };

    Ok(MAbsoluteReport {
        verdict,
        raw_verdict,
        implies_convergence_ok: implies_ok,
        sandwich_ok,
        sandwich_max_excess: max_excess,
        checkpoints: t.checkpoints,
    })
}

/// Weighted geometric mean stream
/// `g_n = (a_1^{t_1} ... a_n^{t_n})^{1 / (t_1 + ... + t_n)}`.
#[derive(Clone, Debug, Serialize)]
pub struct GeoMeans {
    /// Decimated `(n, g_n)` samples, always ending at the horizon.
    pub points: Vec<(u64, f64)>,
    pub final_value: f64,
    pub weight_sum: f64,
    /// Whether the weight sum still looks divergent at the horizon.
    pub weights_divergent: bool,
    pub diagnostic: Option<String>,
}

pub fn weighted_geometric_means(
    seq: &PosSeq,
    weights: &RealSeq,
    n_max: u64,
    every: u64,
    precision: Precision,
) -> Result<GeoMeans> {
    if n_max < 4 {
        return Err(Error::InvalidInput("horizon too small".into()));
    }
    let origin = seq.origin();
    let every = every.max(1);
    let mut num = CompensatedSum::new(precision);
    let mut den = CompensatedSum::new(precision);
    let mut points = Vec::new();
    let mut t_quarter = 0.0;
    let mut t_half = 0.0;
    let mut g = f64::NAN;
    for k in 1..=n_max {
        let idx = origin + k - 1;
        let t = weights.value_at(idx)?;
        if t <= 0.0 {
            return Err(Error::eval(idx, format!("weight t_{idx} = {t} must be positive")));
        }
        let log = seq.log_term(idx)?;
        num.add(t * log);
        den.add(t);
        g = (num.value() / den.value()).exp();
        if k % every == 0 || k == n_max {
            points.push((k, g));
        }
        if k == n_max / 4 {
            t_quarter = den.value();
        }
        if k == n_max / 2 {
            t_half = den.value();
        }
    }
    let weight_sum = den.value();
    // Divergent weight sums keep growing by comparable increments; a
    // convergent tail makes the latest increment collapse.
    let inc_old = t_half - t_quarter;
    let inc_new = weight_sum - t_half;
    let weights_divergent = inc_new > 0.6 * inc_old;
    let diagnostic = if weights_divergent {
        None
    } else {
        Some("weight sum looks convergent up to the horizon; the geometric-mean limit needs a divergent weight sum".into())
    };
    Ok(GeoMeans {
        points,
        final_value: g,
        weight_sum,
        weights_divergent,
        diagnostic,
    })
}

/// Cross-check of the compensated accumulator against the double-double
/// log-series oracle.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub primary: Verdict,
    pub oracle: Verdict,
    pub kinds_agree: bool,
    /// `|u_N - exp(S_oracle)|` relative, when the partial products are
    /// representable.
    pub partial_rel_dev: Option<f64>,
    /// Relative deviation of the two convergence limits.
    pub limit_rel_dev: Option<f64>,
    pub logsum_primary: f64,
    pub logsum_oracle: f64,
    pub ok: bool,
}

pub fn oracle_compare(seq: &PosSeq, params: &AnalysisParams) -> Result<OracleReport> {
    let t = run_trajectory(seq, params)?;
    let primary = classify_log_window(&t.window_raw, t.n_terms, params.eps);
    let oracle = classify_log_window(&t.window_raw_oracle, t.n_terms, params.eps);
    let kinds_agree = primary.kind == oracle.kind;

    let partial_rel_dev = if t.s_raw.abs() < 700.0 && t.s_raw_oracle.abs() < 700.0 {
        Some((t.s_raw - t.s_raw_oracle).exp_m1().abs())
    } else {
        None
    };
    let limit_rel_dev = match (&primary.limit_estimate, &oracle.limit_estimate) {
        (Some(a), Some(b)) => Some(crate::numerics::rel_dev(*a, *b)),
        _ => None,
    };
    let ok = kinds_agree && partial_rel_dev.is_none_or(|d| d < 1e-9);
    Ok(OracleReport {
        primary,
        oracle,
        kinds_agree,
        partial_rel_dev,
        limit_rel_dev,
        logsum_primary: t.s_raw,
        logsum_oracle: t.s_raw_oracle,
        ok,
    })
}

/// True when the verdict would count as "converges" for hypothesis checks.
pub fn converges(v: &Verdict) -> bool {
    v.kind == VerdictKind::Converges
}
