//! Independent brute-force verification of the decimation predictions:
//! a dense cyclic-Jacobi eigendecomposition of the negated Dirichlet
//! restriction, tolerance clustering, multiset comparison, and residual
//! evaluation.
//!
//! The solver is deliberately self-contained and shares no code path with
//! the decimation module.

use serde::{Deserialize, Serialize};

use crate::decimation::SpectrumEntry;
use crate::error::{Error, Result};
use crate::operator::{GridFunction, IntMatrix, Operator};
use crate::scalar::{cast, from_int, Scalar};

/// Relative off-diagonal norm at which a Jacobi run is considered converged.
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;

/// Default relative clustering tolerance for grouping repeated eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

const MAX_SWEEPS: usize = 64;

/// Dense symmetric real matrix, row-major.
#[derive(Clone, Debug)]
pub struct DenseMatrix<S> {
    side: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(side: usize) -> Self {
        DenseMatrix {
            side,
            data: vec![S::zero(); side * side],
        }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let side = rows.len();
        if rows.iter().any(|r| r.len() != side) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(DenseMatrix { side, data })
    }

    /// The negation of an integer matrix, promoted to the scalar. Applied to
    /// a Dirichlet restriction this is the matrix whose eigenvalues are the
    /// Dirichlet eigenvalues.
    pub fn negated_from(m: &IntMatrix) -> Self {
        DenseMatrix {
            side: m.side(),
            data: (0..m.side())
                .flat_map(|i| (0..m.side()).map(move |j| (i, j)))
                .map(|(i, j)| from_int::<S>(-m.get(i, j)))
                .collect(),
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.data[row * self.side + col] = value;
    }

    /// Column `col` as a vector.
    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.side).map(|r| self.get(r, col)).collect()
    }

    fn frobenius(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, v| acc + *v * *v)
            .sqrt()
    }

    fn off_diagonal_norm(&self) -> S {
        let mut acc = S::zero();
        for p in 0..self.side {
            for q in (p + 1)..self.side {
                let v = self.get(p, q);
                acc = acc + v * v;
            }
        }
        (acc + acc).sqrt()
    }
}

/// One group of numerically coincident eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster<S> {
    pub value: S,
    pub count: u64,
}

/// The full spectrum of one symmetric matrix, ascending, with clusters.
#[derive(Clone, Debug)]
pub struct OracleSpectrum<S> {
    eigenvalues: Vec<S>,
    clusters: Vec<Cluster<S>>,
}

impl<S: Scalar> OracleSpectrum<S> {
    /// Wraps an ascending list of eigenvalues and clusters it: consecutive
    /// values within `cluster_tol * max(1, |λ|_max)` belong to one cluster,
    /// represented by the cluster mean.
    pub fn new(eigenvalues: Vec<S>, cluster_tol: S) -> Self {
        let clusters = cluster_eigenvalues(&eigenvalues, cluster_tol);
        OracleSpectrum {
            eigenvalues,
            clusters,
        }
    }

    pub fn eigenvalues(&self) -> &[S] {
        &self.eigenvalues
    }

    pub fn clusters(&self) -> &[Cluster<S>] {
        &self.clusters
    }

    /// Re-clusters the same eigenvalues at a different tolerance.
    pub fn reclustered(&self, cluster_tol: S) -> OracleSpectrum<S> {
        OracleSpectrum::new(self.eigenvalues.clone(), cluster_tol)
    }

    pub fn min_eigenvalue(&self) -> Option<S> {
        self.eigenvalues.first().copied()
    }
}

/// Groups an ascending eigenvalue list by the gap criterion.
pub fn cluster_eigenvalues<S: Scalar>(sorted: &[S], cluster_tol: S) -> Vec<Cluster<S>> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let magnitude = sorted
        .iter()
        .fold(S::zero(), |acc, v| acc.max(v.abs()))
        .max(S::one());
    let gap = cluster_tol * magnitude;
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > gap {
            let members = &sorted[start..i];
            let sum = members.iter().fold(S::zero(), |acc, v| acc + *v);
            clusters.push(Cluster {
                value: sum / S::from_usize(members.len()).unwrap(),
                count: members.len() as u64,
            });
            start = i;
        }
    }
    clusters
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi sweeps, run until the
/// off-diagonal norm falls below `tol` times the Frobenius norm. Eigenvalues
/// come back ascending, clustered at the default tolerance.
pub fn symmetric_eigen<S: Scalar>(m: &DenseMatrix<S>, tol: S) -> Result<OracleSpectrum<S>> {
    let (values, _) = jacobi(m, tol, false)?;
    Ok(OracleSpectrum::new(values, cast::<S>(DEFAULT_CLUSTER_TOL)))
}

/// Like [`symmetric_eigen`], additionally accumulating the rotations; the
/// returned matrix holds unit eigenvectors as columns, in eigenvalue order.
pub fn symmetric_eigen_with_vectors<S: Scalar>(
    m: &DenseMatrix<S>,
    tol: S,
) -> Result<(OracleSpectrum<S>, DenseMatrix<S>)> {
    let (values, vectors) = jacobi(m, tol, true)?;
    Ok((
        OracleSpectrum::new(values, cast::<S>(DEFAULT_CLUSTER_TOL)),
        vectors.expect("vectors requested"),
    ))
}

fn jacobi<S: Scalar>(
    input: &DenseMatrix<S>,
    tol: S,
    want_vectors: bool,
) -> Result<(Vec<S>, Option<DenseMatrix<S>>)> {
    let n = input.side();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if input.get(i, j) != input.get(j, i) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut a = input.clone();
    let mut v = want_vectors.then(|| identity::<S>(n));
    let threshold = tol * a.frobenius();

    // Running diagonal with the usual per-sweep accumulator pair: `base`
    // collects finished sweeps, `delta` the in-flight corrections.
    let mut diag: Vec<S> = (0..n).map(|i| a.get(i, i)).collect();
    let mut base = diag.clone();
    let mut delta = vec![S::zero(); n];

    for _sweep in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= threshold {
            return Ok(match v {
                Some(vm) => {
                    let sorted = sort_with_vectors(&mut diag, vm);
                    (diag, Some(sorted))
                }
                None => {
                    diag.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
                    (diag, None)
                }
            });
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut diag, &mut delta, v.as_mut(), p, q);
            }
        }
        for i in 0..n {
            base[i] = base[i] + delta[i];
            delta[i] = S::zero();
            diag[i] = base[i];
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

fn identity<S: Scalar>(n: usize) -> DenseMatrix<S> {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, S::one());
    }
    m
}

/// Annihilates `a[p][q]` with a plane rotation, updating the running
/// diagonal and, when present, the accumulated eigenvector matrix. Both
/// triangles of `a` are kept in sync.
fn rotate<S: Scalar>(
    a: &mut DenseMatrix<S>,
    diag: &mut [S],
    delta: &mut [S],
    vectors: Option<&mut DenseMatrix<S>>,
    p: usize,
    q: usize,
) {
    let apq = a.get(p, q);
    if apq == S::zero() {
        return;
    }
    let gap = diag[q] - diag[p];
    let t = if gap.abs() + cast::<S>(100.0) * apq.abs() == gap.abs() {
        // Off-diagonal negligible against the gap: first-order angle.
        apq / gap
    } else {
        let theta = gap / (cast::<S>(2.0) * apq);
        let t = S::one() / (theta.abs() + (S::one() + theta * theta).sqrt());
        if theta < S::zero() {
            -t
        } else {
            t
        }
    };
    let c = S::one() / (S::one() + t * t).sqrt();
    let s = t * c;
    let tau = s / (S::one() + c);
    let shift = t * apq;

    diag[p] = diag[p] - shift;
    diag[q] = diag[q] + shift;
    delta[p] = delta[p] - shift;
    delta[q] = delta[q] + shift;
    a.set(p, q, S::zero());
    a.set(q, p, S::zero());

    let n = a.side();
    let turn = |a: &mut DenseMatrix<S>, rp: usize, cp: usize, rq: usize, cq: usize| {
        let g = a.get(rp, cp);
        let h = a.get(rq, cq);
        let gp = g - s * (h + g * tau);
        let hq = h + s * (g - h * tau);
        a.set(rp, cp, gp);
        a.set(cp, rp, gp);
        a.set(rq, cq, hq);
        a.set(cq, rq, hq);
    };
    for j in 0..p {
        turn(a, j, p, j, q);
    }
    for j in (p + 1)..q {
        turn(a, p, j, j, q);
    }
    for j in (q + 1)..n {
        turn(a, p, j, q, j);
    }
    if let Some(v) = vectors {
        for j in 0..n {
            let g = v.get(j, p);
            let h = v.get(j, q);
            v.set(j, p, g - s * (h + g * tau));
            v.set(j, q, h + s * (g - h * tau));
        }
    }
}

fn sort_with_vectors<S: Scalar>(diag: &mut Vec<S>, v: DenseMatrix<S>) -> DenseMatrix<S> {
    let n = diag.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let sorted_diag: Vec<S> = order.iter().map(|&i| diag[i]).collect();
    let mut sorted_v = DenseMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted_v.set(row, new_col, v.get(row, old_col));
        }
    }
    *diag = sorted_diag;
    sorted_v
}

/// One predicted/observed pairing in a comparison report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedEntry<S> {
    pub predicted_value: S,
    pub predicted_multiplicity: u64,
    pub oracle_value: S,
    pub oracle_count: u64,
}

/// Unmatched predicted entry (value and multiplicity only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedPrediction<S> {
    pub value: S,
    pub multiplicity: u64,
}

/// Outcome of comparing a predicted spectrum against an oracle run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport<S> {
    pub matched: Vec<MatchedEntry<S>>,
    pub max_value_error: S,
    pub unmatched_predicted: Vec<UnmatchedPrediction<S>>,
    pub unmatched_oracle: Vec<Cluster<S>>,
    /// Pairs of predicted values closer than ten times the tolerance; greedy
    /// matching cannot silently confuse clusters unless this is nonempty.
    pub ambiguous: Vec<(S, S)>,
    pub passed: bool,
}

/// Greedy nearest matching of predicted entries to oracle clusters. Passes
/// iff the matching is a bijection, multiplicities agree exactly, and every
/// value error is at most `tol`.
pub fn spectrum_compare<S: Scalar>(
    predicted: &[SpectrumEntry<S>],
    oracle: &OracleSpectrum<S>,
    tol: S,
) -> ComparisonReport<S> {
    let mut predicted: Vec<(S, u64)> = predicted
        .iter()
        .map(|e| (e.value, e.multiplicity))
        .collect();
    predicted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));

    let mut ambiguous = Vec::new();
    for w in predicted.windows(2) {
        if w[1].0 - w[0].0 < cast::<S>(10.0) * tol {
            ambiguous.push((w[0].0, w[1].0));
        }
    }

    let clusters = oracle.clusters();
    let mut used = vec![false; clusters.len()];
    let mut matched = Vec::new();
    let mut unmatched_predicted = Vec::new();
    let mut max_value_error = S::zero();

    for &(value, multiplicity) in &predicted {
        let nearest = (0..clusters.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| {
                let di = (clusters[i].value - value).abs();
                let dj = (clusters[j].value - value).abs();
                di.partial_cmp(&dj).expect("finite values")
            });
        match nearest {
            Some(i) => {
                used[i] = true;
                let err = (clusters[i].value - value).abs();
                max_value_error = max_value_error.max(err);
                matched.push(MatchedEntry {
                    predicted_value: value,
                    predicted_multiplicity: multiplicity,
                    oracle_value: clusters[i].value,
                    oracle_count: clusters[i].count,
                });
            }
            None => unmatched_predicted.push(UnmatchedPrediction {
                value,
                multiplicity,
            }),
        }
    }
    let unmatched_oracle: Vec<Cluster<S>> = clusters
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(c, _)| *c)
        .collect();

    let passed = unmatched_predicted.is_empty()
        && unmatched_oracle.is_empty()
        && max_value_error <= tol
        && matched
            .iter()
            .all(|m| m.predicted_multiplicity == m.oracle_count);

    ComparisonReport {
        matched,
        max_value_error,
        unmatched_predicted,
        unmatched_oracle,
        ambiguous,
        passed,
    }
}

/// Largest violation of the Dirichlet eigen-equation off the boundary:
/// `max |(H u)(p) + lam u(p)|` over `p` outside `V_0`. The input must vanish
/// on `V_0`.
pub fn eigen_residual<S: Scalar>(h: &Operator, u: &GridFunction<S>, lam: S) -> Result<S> {
    for i in 0..h.n() as usize {
        if u.value(i) != S::zero() {
            return Err(Error::NotDirichlet { index: i });
        }
    }
    let hu = h.apply(u)?;
    let mut worst = S::zero();
    for i in h.n() as usize..h.side() {
        worst = worst.max((hu.value(i) + lam * u.value(i)).abs());
    }
    Ok(worst)
}
