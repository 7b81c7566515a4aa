//! Shared fixtures for the integration suites.

use prodkit::{PosSeq, VerdictKind};

/// The analysis corpus: expression, expected behavior, and the analytic
/// limit where one exists.
pub struct CorpusEntry {
    pub name: &'static str,
    pub expr: &'static str,
    pub expected: VerdictKind,
    pub limit: Option<f64>,
}

pub const BASEL: f64 = 1.6449340668482264; // pi^2/6
pub const ETA2: f64 = 0.8224670334241132; // pi^2/12

pub fn corpus() -> Vec<CorpusEntry> {
    use VerdictKind::*;
    vec![
        CorpusEntry {
            name: "exp(1/n)",
            expr: "exp(1/n)",
            expected: DivergesToInfinity,
            limit: None,
        },
        CorpusEntry {
            name: "exp(-1/n)",
            expr: "exp(-1/n)",
            expected: DivergesToZero,
            limit: None,
        },
        CorpusEntry {
            name: "exp(1/n^2)",
            expr: "exp(1/n^2)",
            expected: Converges,
            limit: Some(BASEL.exp()),
        },
        CorpusEntry {
            name: "exp((-1)^(n+1)/n)",
            expr: "exp((-1)^(n+1)/n)",
            expected: Converges,
            limit: Some(2.0),
        },
        CorpusEntry {
            name: "exp((-1)^(n+1)/n^2)",
            expr: "exp((-1)^(n+1)/n^2)",
            expected: Converges,
            limit: Some(ETA2.exp()),
        },
        CorpusEntry {
            name: "1 + 1/n",
            expr: "1+1/n",
            expected: DivergesToInfinity,
            limit: None,
        },
        CorpusEntry {
            name: "telescoping n/(n+1)",
            expr: "n/(n+1)",
            expected: DivergesToZero,
            limit: None,
        },
        CorpusEntry {
            name: "alternating 1/2, 2",
            expr: "(1/2)^((-1)^(n+1))",
            expected: Oscillates,
            limit: None,
        },
        CorpusEntry {
            name: "wallis 4n^2/(4n^2-1)",
            expr: "(4*n^2)/(4*n^2-1)",
            expected: Converges,
            limit: Some(std::f64::consts::FRAC_PI_2),
        },
        CorpusEntry {
            name: "constant 1",
            expr: "1",
            expected: Converges,
            limit: Some(1.0),
        },
        CorpusEntry {
            name: "constant 2",
            expr: "2",
            expected: DivergesToInfinity,
            limit: None,
        },
        CorpusEntry {
            name: "constant 1/2",
            expr: "1/2",
            expected: DivergesToZero,
            limit: None,
        },
    ]
}

pub fn seq(text: &str) -> PosSeq {
    PosSeq::from_expr_str(text).expect("corpus expression parses")
}
