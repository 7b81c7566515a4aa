//! The exponentiation action of real matrices on positive vectors, its
//! homomorphism identities, and regular product-summability transforms.
//!
//! `(A * x)_i = prod_j x_j^(a_ij)`, which is an ordinary matrix-vector
//! product applied to the log vector. This makes the identity checks sharp:
//! they reduce to float linear algebra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{rel_dev, NeumaierSum};
use crate::seq::PosSeq;
use crate::verdict::{classify_log_window, Verdict};

/// A vector with strictly positive entries.
#[derive(Clone, Debug, PartialEq)]
pub struct PosVector(Vec<f64>);

impl PosVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "vector entry {i} must be a positive finite real, got {v}"
                )));
            }
        }
        Ok(PosVector(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    fn logs(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.ln()).collect()
    }

    /// Entrywise product (the group operation on positive vectors).
    pub fn mul(&self, other: &PosVector) -> Result<PosVector> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "entrywise product of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        PosVector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }
}

/// A dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: Vec<Vec<f64>>,
}

impl RealMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "ragged matrix: row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "matrix entry ({i},{j}) is not finite"
                    )));
                }
            }
        }
        Ok(RealMatrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        RealMatrix { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Ordinary matrix product `self * other`.
    pub fn matmul(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.ncols() != other.nrows() {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let rows = (0..self.nrows())
            .map(|i| {
                (0..other.ncols())
                    .map(|j| {
                        let mut acc = NeumaierSum::new();
                        for k in 0..self.ncols() {
                            acc.add(self.rows[i][k] * other.rows[k][j]);
                        }
                        acc.value()
                    })
                    .collect()
            })
            .collect();
        Ok(RealMatrix { rows })
    }

    pub fn add(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(Error::Dimension("matrix addition shape mismatch".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(RealMatrix { rows })
    }
}

/// The star action: `(A * x)_i = prod_j x_j^(a_ij)`, evaluated as
/// `exp(sum_j a_ij log x_j)`.
pub fn star_apply(a: &RealMatrix, x: &PosVector) -> Result<PosVector> {
    if a.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "star action of a {}x{} matrix on a length-{} vector",
            a.nrows(),
            a.ncols(),
            x.len()
        )));
    }
    let logs = x.logs();
    let entries = a
        .rows
        .iter()
        .map(|row| {
            let mut acc = NeumaierSum::new();
            for (c, l) in row.iter().zip(&logs) {
                acc.add(c * l);
            }
            acc.value().exp()
        })
        .collect();
    PosVector::new(entries)
}

fn max_entry_dev(a: &PosVector, b: &PosVector) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(&x, &y)| rel_dev(x, y))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    /// `B*(A*x) = (BA)*x`
    pub composition_dev: f64,
    /// `(C+B)*y = (C*y)(B*y)`
    pub additivity_dev: f64,
    /// `A*((D+E)*z) = (A*(D*z))(A*(E*z))`
    pub distributivity_dev: f64,
    pub tol: f64,
    pub ok: bool,
}

/// Verify the three homomorphism identities of the star action on explicit
/// inputs, each to relative `tol` per entry.
#[allow(clippy::too_many_arguments)]
pub fn check_homomorphisms(
    a: &RealMatrix,
    b: &RealMatrix,
    c: &RealMatrix,
    d: &RealMatrix,
    e: &RealMatrix,
    x: &PosVector,
    y: &PosVector,
    z: &PosVector,
    tol: f64,
) -> Result<IdentityReport> {
    // (1) composition through the star action
    let lhs1 = star_apply(b, &star_apply(a, x)?)?;
    let rhs1 = star_apply(&b.matmul(a)?, x)?;
    let composition_dev = max_entry_dev(&lhs1, &rhs1);

    // (2) matrix addition maps to entrywise multiplication
    let lhs2 = star_apply(&c.add(b)?, y)?;
    let rhs2 = star_apply(c, y)?.mul(&star_apply(b, y)?)?;
    let additivity_dev = max_entry_dev(&lhs2, &rhs2);

    // (3) the action distributes over an added exponent stage
    let lhs3 = star_apply(a, &star_apply(&d.add(e)?, z)?)?;
    let rhs3 = star_apply(a, &star_apply(d, z)?)?.mul(&star_apply(a, &star_apply(e, z)?)?)?;
    let distributivity_dev = max_entry_dev(&lhs3, &rhs3);

    let ok = composition_dev <= tol && additivity_dev <= tol && distributivity_dev <= tol;
    Ok(IdentityReport {
        composition_dev,
        additivity_dev,
        distributivity_dev,
        tol,
        ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomIdentityReport {
    pub trials: u32,
    pub max_dev: f64,
    pub tol: f64,
    pub ok: bool,
}

/// Randomized identity checks on shapes up to `max_dim`, with small integer
/// exponents and log-uniform positive vectors.
pub fn check_homomorphisms_random(
    max_dim: usize,
    trials: u32,
    seed: u64,
    tol: f64,
) -> Result<RandomIdentityReport> {
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    let mut rng = SmallRng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(1..=max_dim);
        let m = rng.gen_range(1..=max_dim);
        let k = rng.gen_range(1..=max_dim);
        let mat = |rows: usize, cols: usize, rng: &mut SmallRng| {
            RealMatrix::new(
                (0..rows)
                    .map(|_| (0..cols).map(|_| rng.gen_range(-3..=3) as f64).collect())
                    .collect(),
            )
            .expect("generated matrix is well-formed")
        };
        let vector = |len: usize, rng: &mut SmallRng| {
            PosVector::new((0..len).map(|_| rng.gen_range(-2.0f64..2.0).exp()).collect())
                .expect("generated vector is positive")
        };
        let a = mat(m, n, &mut rng);
        let b = mat(k, m, &mut rng);
        let c = mat(k, m, &mut rng);
        let d = mat(n, k, &mut rng);
        let e = mat(n, k, &mut rng);
        let x = vector(n, &mut rng);
        let y = vector(m, &mut rng);
        let z = vector(k, &mut rng);
        let r = check_homomorphisms(&a, &b, &c, &d, &e, &x, &y, &z, tol)?;
        max_dev = max_dev
            .max(r.composition_dev)
            .max(r.additivity_dev)
            .max(r.distributivity_dev);
    }
    Ok(RandomIdentityReport {
        trials,
        max_dev,
        tol,
        ok: max_dev <= tol,
    })
}

/// Row-generated nonnegative matrices for product summability.
#[derive(Clone, Debug)]
pub enum SummabilityKind {
    /// `a_(m,n) = 1/m` for `n <= m`.
    Cesaro,
    /// Euler means: `a_(m,n) = C(m,n) q^n (1-q)^(m-n)` for `n <= m`.
    Euler { q: f64 },
    /// Explicit rows; row support is the row length.
    ExplicitRows(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct SummabilityMatrix {
    pub kind: SummabilityKind,
    /// Declared bound on the row sums.
    pub bound: f64,
}

impl SummabilityMatrix {
    pub fn cesaro() -> Self {
        SummabilityMatrix {
            kind: SummabilityKind::Cesaro,
            bound: 1.0 + 1e-12,
        }
    }

    pub fn euler(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidInput(format!(
                "euler parameter must lie in (0,1), got {q}"
            )));
        }
        Ok(SummabilityMatrix {
            kind: SummabilityKind::Euler { q },
            bound: 1.0 + 1e-9,
        })
    }

    pub fn explicit(rows: Vec<Vec<f64>>, bound: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("need at least one row".into()));
        }
        Ok(SummabilityMatrix {
            kind: SummabilityKind::ExplicitRows(rows),
            bound,
        })
    }

    /// Entries of row `m` (1-based) over its declared support.
    fn row(&self, m: u64) -> Result<Vec<f64>> {
        match &self.kind {
            SummabilityKind::Cesaro => Ok(vec![1.0 / m as f64; m as usize]),
            SummabilityKind::Euler { q } => {
                // iterate log C(m,n) q^n (1-q)^(m-n) across the row
                let mf = m as f64;
                let lq = q.ln();
                let l1q = (1.0 - q).ln();
                let mut lw = mf * l1q; // n = 0 term, not part of the row (n >= 1)
                let mut row = Vec::with_capacity(m as usize);
                for n in 1..=m {
                    let nf = n as f64;
                    lw += ((mf - nf + 1.0) / nf).ln() + lq - l1q;
                    row.push(lw.exp());
                }
                Ok(row)
            }
            SummabilityKind::ExplicitRows(rows) => rows
                .get(m as usize - 1)
                .cloned()
                .ok_or_else(|| Error::eval(m, "row beyond the explicit matrix")),
        }
    }

    fn max_row(&self) -> Option<u64> {
        match &self.kind {
            SummabilityKind::ExplicitRows(rows) => Some(rows.len() as u64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularTransformReport {
    /// `(m, y_m)` along the row grid.
    pub points: Vec<(u64, f64)>,
    /// Verdict on the trajectory of `y_m` (converges means a finite limit;
    /// `tends_to_one` narrows it to the regularity conclusion).
    pub verdict: Verdict,
    pub tends_to_one: bool,
    pub final_gap: f64,
    pub hypothesis_violations: Vec<String>,
}

/// For a nonnegative matrix with bounded row sums and vanishing columns,
/// `y_m = prod_n x_n^(a_(m,n)) -> 1` whenever `x_n -> 1`. A positive limit
/// `p` of `x` is handled by transforming through `x_n / p`.
pub fn regular_transform(
    matrix: &SummabilityMatrix,
    x: &PosSeq,
    m_grid: &[u64],
    eps: f64,
    normalize_by: Option<f64>,
) -> Result<RegularTransformReport> {
    if m_grid.len() < 8 {
        return Err(Error::InvalidInput("need at least 8 grid rows".into()));
    }
    let mut sorted = m_grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(max_row) = matrix.max_row() {
        if sorted.last().copied().unwrap_or(0) > max_row {
            return Err(Error::InvalidInput(format!(
                "grid reaches row {} but the matrix has {max_row} rows",
                sorted.last().unwrap()
            )));
        }
    }
    let lp = match normalize_by {
        Some(p) if p > 0.0 && p.is_finite() => p.ln(),
        Some(p) => {
            return Err(Error::InvalidInput(format!(
                "normalization limit must be positive and finite, got {p}"
            )))
        }
        None => 0.0,
    };
    let origin = x.origin();
    let mut violations = Vec::new();
    let mut points = Vec::new();
    let mut traj = Vec::new();
    let mut columns_mid = [f64::NAN; 8];
    let mut columns_end = [f64::NAN; 8];
    let mid_row = sorted[sorted.len() / 2];

    for &m in &sorted {
        let row = matrix.row(m)?;
        let mut row_sum = NeumaierSum::new();
        let mut acc = NeumaierSum::new();
        for (k, &w) in row.iter().enumerate() {
            if w < 0.0 {
                violations.push(format!("negative entry a({m},{}) = {w}", k + 1));
                break;
            }
            row_sum.add(w);
            let idx = origin + k as u64;
            acc.add(w * (x.log_term(idx)? - lp));
            if k < 8 {
                if m == mid_row {
                    columns_mid[k] = w;
                }
                columns_end[k] = w;
            }
        }
        if row_sum.value() > matrix.bound * (1.0 + 1e-12) {
            violations.push(format!(
                "row {m} sums to {} beyond the declared bound {}",
                row_sum.value(),
                matrix.bound
            ));
        }
        let y = acc.value().exp();
        points.push((m, y));
        traj.push(acc.value());
    }

    // column condition lim_m a_(m,n) = 0: leading-column entries must keep
    // shrinking between the middle of the grid and its end
    for k in 0..8 {
        let (mid, end) = (columns_mid[k], columns_end[k]);
        if mid.is_finite() && end.is_finite() && end > 1e-12 && end > 0.75 * mid {
            violations.push(format!(
                "column {} does not vanish along the grid (entry {mid} at row {mid_row}, {end} at the last row)",
                k + 1
            ));
        }
    }

    let verdict = classify_log_window(&traj, *sorted.last().unwrap(), eps);
    let final_gap = (points.last().unwrap().1 - 1.0).abs();
    let tends_to_one = verdict.converges() && final_gap <= eps && violations.is_empty();
    Ok(RegularTransformReport {
        points,
        verdict,
        tends_to_one,
        final_gap,
        hypothesis_violations: violations,
    })
}

/// Dyadic row grid `1, 2, 4, ..., 2^k <= m_max` ending exactly at `m_max`.
pub fn dyadic_grid(m_max: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut m = 1u64;
    while m < m_max {
        grid.push(m);
        m *= 2;
    }
    grid.push(m_max);
    grid
}
