//! Extension of level-`η` eigenfunctions to arbitrary points of the shift
//! space along fibres, the renormalized eigenvalue limit `N^{m+1} λ_m`, and
//! numerical convergence diagnostics.
//!
//! Along the minus-branch tail the eigenvalue sequence stays in `(0, 1)` and
//! decays like `N^{-m}`, so the partial products `Π (1 - λ_k)^{-1}` converge
//! and the renormalized sequence has a positive limit.

use serde::{Deserialize, Serialize};

use crate::decimation::{
    materialize_eigenpair, refine_eigenvalue, Branch, SpectrumEntry,
};
use crate::error::{Error, Result};
use crate::operator::{renormalization_factor, GridFunction, Operator};
use crate::scalar::{cast, from_count, Scalar};
use crate::symbolic::{LevelSet, Point};

/// A level-`η` grid function extended over the whole space: values on any
/// deeper point follow from the base value of its fibre divided by the
/// product of `1 - λ` factors at the letter-change positions, with the
/// eigenvalue sequence continued along the minus branch.
pub struct ExtendedEigenfunction<S> {
    n: u32,
    eta: usize,
    base: GridFunction<S>,
    base_eigenvalue: S,
    base_level_set: LevelSet,
}

impl<S: Scalar> ExtendedEigenfunction<S> {
    pub fn new(n: u32, eta: usize, base: GridFunction<S>, base_eigenvalue: S) -> Result<Self> {
        if eta < 1 {
            return Err(Error::InvalidArgument(
                "the base level must be at least 1".into(),
            ));
        }
        if base.level() != eta {
            return Err(Error::LevelMismatch {
                expected: eta,
                got: base.level(),
            });
        }
        if base.n() != n {
            return Err(Error::InvalidArgument(format!(
                "base function is over {} symbols, expected {n}",
                base.n()
            )));
        }
        if base_eigenvalue < S::zero() {
            return Err(Error::InvalidArgument(
                "only the positive spectrum is carried along the minus tail".into(),
            ));
        }
        let base_level_set = LevelSet::enumerate(n, eta)?;
        Ok(ExtendedEigenfunction {
            n,
            eta,
            base,
            base_eigenvalue,
            base_level_set,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn base(&self) -> &GridFunction<S> {
        &self.base
    }

    pub fn base_eigenvalue(&self) -> S {
        self.base_eigenvalue
    }

    /// The eigenvalue at level `m >= eta`: the base value pushed through the
    /// minus branch `m - eta` times.
    pub fn eigenvalue_at(&self, m: usize) -> S {
        let mut lam = self.base_eigenvalue;
        for _ in self.eta..m {
            lam = refine_eigenvalue(lam, Branch::Minus, self.n);
        }
        lam
    }

    /// Value at a point: read from the base for levels up to `eta`; deeper
    /// points take the fibre base value divided by `Π (1 - λ_i)` over the
    /// letter-change positions `i` in `(eta, level]`.
    pub fn evaluate(&self, p: &Point) -> Result<S> {
        if p.max_symbol() > self.n {
            return Err(Error::SymbolOutOfRange {
                value: p.max_symbol(),
                n: self.n,
            });
        }
        let level = p.level();
        if level <= self.eta {
            let i = self
                .base_level_set
                .position(p)
                .expect("points up to the base level are enumerated");
            return Ok(self.base.value(i));
        }
        let fibre_base = p.truncate(self.eta);
        let i = self
            .base_level_set
            .position(&fibre_base)
            .expect("fibre base lies in the base level set");
        let mut value = self.base.value(i);
        let mut lam = self.base_eigenvalue;
        for pos in self.eta + 1..=level {
            lam = refine_eigenvalue(lam, Branch::Minus, self.n);
            if p.symbol_at(pos) != p.symbol_at(pos + 1) {
                let denom = S::one() - lam;
                if denom == S::zero() {
                    return Err(Error::ForbiddenEigenvalue {
                        value: 1.0,
                        reason: "fibre product hit the pole at 1",
                    });
                }
                value = value / denom;
            }
        }
        Ok(value)
    }
}

/// One row of a renormalized limit trace: `[m, λ_m, N^{m+1} λ_m]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTerm<S>(pub usize, pub S, pub S);

impl<S: Copy> LimitTerm<S> {
    pub fn level(&self) -> usize {
        self.0
    }

    pub fn eigenvalue(&self) -> S {
        self.1
    }

    pub fn scaled(&self) -> S {
        self.2
    }
}

/// A converged renormalized limit run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTrace<S> {
    #[serde(rename = "N")]
    pub n: u32,
    pub m0: usize,
    pub lambda0: S,
    pub terms: Vec<LimitTerm<S>>,
    pub converged_value: S,
    pub iterations: usize,
}

impl<S: Scalar> LimitTrace<S> {
    /// CSV export of the recorded terms, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,lambda,scaled\n");
        for t in &self.terms {
            out.push_str(&format!("{},{},{}\n", t.0, t.1, t.2));
        }
        out
    }
}

/// Iterates `λ_{m+1} = φ_-(λ_m)` from `(m0, lam0)`, recording the scaled
/// terms `N^{m+1} λ_m` until two successive terms agree to relative `tol`.
/// The scaled sequence must never increase; reaching `max_m` without
/// convergence is an error carrying the last term.
pub fn renormalized_limit<S: Scalar>(
    n: u32,
    lam0: S,
    m0: usize,
    tol: S,
    max_m: usize,
) -> Result<LimitTrace<S>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 symbols, got N = {n}"
        )));
    }
    if !(lam0 >= S::zero()) {
        return Err(Error::InvalidArgument(
            "the starting eigenvalue must be nonnegative".into(),
        ));
    }
    if !(tol > S::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if max_m <= m0 {
        return Err(Error::InvalidArgument(
            "max_m must exceed the starting level".into(),
        ));
    }

    let base = from_count::<S>(n as usize);
    let mut lam = lam0;
    let mut level = m0;
    let mut scale = renormalization_factor::<S>(n, m0);
    let mut terms = vec![LimitTerm(level, lam, scale * lam)];

    loop {
        lam = refine_eigenvalue(lam, Branch::Minus, n);
        level += 1;
        scale = scale * base;
        let scaled = scale * lam;
        let prev = terms.last().expect("at least one term").scaled();
        if scaled > prev {
            return Err(Error::InvalidArgument(format!(
                "renormalized term increased from {prev} to {scaled} at level {level}; \
                 the scaled sequence must be non-increasing"
            )));
        }
        terms.push(LimitTerm(level, lam, scaled));
        if (prev - scaled).abs() <= tol * scaled.abs() {
            let iterations = terms.len();
            return Ok(LimitTrace {
                n,
                m0,
                lambda0: lam0,
                terms,
                converged_value: scaled,
                iterations,
            });
        }
        if level >= max_m {
            return Err(Error::LimitNotConverged {
                max_m,
                last: scaled.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
}

/// Desk-scale witness of the renormalized eigen-equation: builds the entry's
/// first eigenfunction, pushes it along the minus tail to `m_max`, and
/// returns `max |N^{m_max+1} (H u)(p) + λ u(p)|` over the points of level
/// exactly `m_max`, with `λ` the converged renormalized limit of the entry.
pub fn laplacian_residual<S: Scalar>(
    n: u32,
    entry: &SpectrumEntry<S>,
    m_max: usize,
) -> Result<S> {
    let start_level = entry.address.level();
    if m_max < start_level {
        return Err(Error::InvalidArgument(format!(
            "m_max = {m_max} is below the entry level {start_level}"
        )));
    }
    let pair = materialize_eigenpair(n, entry)?;
    let u = pair.functions.first().ok_or(Error::EmptyMatrix)?;
    let limit_tol = S::epsilon() * cast::<S>(100.0);
    let limit = renormalized_limit(n, entry.value, start_level, limit_tol, start_level + 512)?;
    laplacian_residual_from(u, entry.value, limit.converged_value, m_max)
}

/// Same residual for an explicit starting function and limit value; the
/// starting eigenvalue is continued along the minus branch.
pub fn laplacian_residual_from<S: Scalar>(
    start: &GridFunction<S>,
    start_eigenvalue: S,
    limit_eigenvalue: S,
    m_max: usize,
) -> Result<S> {
    let n = start.n();
    let mut u = start.clone();
    let mut lam = start_eigenvalue;
    for _ in start.level()..m_max {
        lam = refine_eigenvalue(lam, Branch::Minus, n);
        u = crate::decimation::extend_eigenfunction(&u, lam, n)?;
    }
    let h = Operator::assemble(n, m_max)?;
    let hu = h.apply(&u)?;
    let scale = renormalization_factor::<S>(n, m_max);
    let mut worst = S::zero();
    for i in h.level_set().level_range(m_max) {
        worst = worst.max((scale * hu.value(i) + limit_eigenvalue * u.value(i)).abs());
    }
    Ok(worst)
}

/// Length of the common initial run of two full sequences; `None` when the
/// points are equal (agreement everywhere).
fn shared_prefix_len(x: &Point, y: &Point) -> Option<usize> {
    if x == y {
        return None;
    }
    let horizon = x.level().max(y.level()) + 1;
    for i in 1..=horizon {
        if x.symbol_at(i) != y.symbol_at(i) {
            return Some(i - 1);
        }
    }
    unreachable!("distinct canonical points disagree within the horizon")
}

/// Difference of the extension at the depth-truncations of two points on a
/// common fibre. The points must share a prefix strictly longer than the
/// base level.
pub fn continuity_probe<S: Scalar>(
    f: &ExtendedEigenfunction<S>,
    x: &Point,
    y: &Point,
    depth: usize,
) -> Result<S> {
    if let Some(shared) = shared_prefix_len(x, y) {
        if shared <= f.eta() {
            return Err(Error::InvalidArgument(format!(
                "points share only {shared} leading symbols; the probe needs \
                 agreement past the base level {}",
                f.eta()
            )));
        }
    }
    let vx = f.evaluate(&x.truncate(depth))?;
    let vy = f.evaluate(&y.truncate(depth))?;
    Ok((vx - vy).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimation::{dirichlet_spectrum, eigenbasis_one, extend_eigenfunction};
    use crate::symbolic::LevelSet;

    // Frozen with a 60-digit independent iteration of the stable root
    // formula for N = 3 starting from eigenvalue 1 at level 1.
    const LAM2: f64 = 0.2679491924311227; // 2 - sqrt(3)
    const LAM3: f64 = 0.08416048199196065;
    const GOLDEN_LIMIT: f64 = 6.6297219090190795;

    fn chi_extension() -> ExtendedEigenfunction<f64> {
        let chi = eigenbasis_one::<f64>(3, 1).unwrap();
        ExtendedEigenfunction::new(3, 1, chi.functions[0].clone(), 1.0).unwrap()
    }

    #[test]
    fn evaluate_reads_the_base_at_shallow_points() {
        let f = chi_extension();
        let p = Point::parse("1.2", 3).unwrap();
        assert_eq!(f.evaluate(&p).unwrap(), 1.0);
        let q = Point::parse(".2", 3).unwrap();
        assert_eq!(f.evaluate(&q).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_applies_the_fibre_product() {
        let f = chi_extension();
        // 1-2-2.1: the only change past the base level is at position 3.
        let p = Point::parse("1-2-2.1", 3).unwrap();
        let v = f.evaluate(&p).unwrap();
        let expected = 1.0 / (1.0 - LAM3);
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
        assert!((v - 1.091894355219581).abs() < 1e-12);

        // 1-2-3.1: changes at positions 2 and 3.
        let q = Point::parse("1-2-3.1", 3).unwrap();
        let w = f.evaluate(&q).unwrap();
        let expected = 1.0 / ((1.0 - LAM2) * (1.0 - LAM3));
        assert!((w - expected).abs() < 1e-14);
        assert!((w - 1.4915554274787775).abs() < 1e-12);
    }

    #[test]
    fn evaluate_agrees_with_level_by_level_extension() {
        let f = chi_extension();
        let mut u = f.base().clone();
        let mut lam = 1.0f64;
        for _ in 1..4 {
            lam = refine_eigenvalue(lam, Branch::Minus, 3);
            u = extend_eigenfunction(&u, lam, 3).unwrap();
        }
        let ls = LevelSet::enumerate(3, 3).unwrap();
        for (i, p) in ls.points().iter().enumerate() {
            let direct = f.evaluate(p).unwrap();
            assert!(
                (direct - u.value(i)).abs() <= 1e-12 * u.value(i).abs().max(1.0),
                "at {p}: {direct} vs {}",
                u.value(i)
            );
        }
    }

    #[test]
    fn limit_trace_of_zero_is_zero() {
        let trace = renormalized_limit(3, 0.0f64, 1, 1e-12, 100).unwrap();
        assert_eq!(trace.converged_value, 0.0);
        assert!(trace.terms.iter().all(|t| t.scaled() == 0.0));
    }

    #[test]
    fn limit_trace_reproduces_the_golden_run() {
        let trace = renormalized_limit(3, 1.0f64, 1, 1e-12, 81).unwrap();
        assert_eq!(trace.terms[0].scaled(), 9.0);
        assert!((trace.terms[1].scaled() - 27.0 * (2.0 - 3.0f64.sqrt())).abs() < 1e-12);
        assert!((trace.terms[1].scaled() - 7.234628195640313).abs() < 1e-12);
        assert!((trace.terms[2].scaled() - 6.816999041348812).abs() < 1e-12);
        assert!(
            (trace.converged_value - GOLDEN_LIMIT).abs() <= 1e-12 * GOLDEN_LIMIT,
            "{}",
            trace.converged_value
        );
        assert!(trace.iterations <= 80);
        for w in trace.terms.windows(2) {
            assert!(w[1].scaled() < w[0].scaled());
            assert!(w[1].scaled() > 0.0);
            assert!(w[1].eigenvalue() < 1.0);
        }
    }

    #[test]
    fn limit_decrement_rate_is_bounded() {
        // Successive relative decrements stay below lam * (1 + 1/N).
        let trace = renormalized_limit(3, 1.0f64, 1, 1e-12, 81).unwrap();
        for w in trace.terms.windows(2) {
            let lhs = (w[0].scaled() - w[1].scaled()) / w[0].scaled();
            let rhs = w[0].eigenvalue() * (1.0 + 1.0 / 3.0);
            assert!(lhs <= rhs + 1e-15);
        }
    }

    #[test]
    fn limit_errors_when_not_converged() {
        let err = renormalized_limit(3, 1.0f64, 1, 1e-12, 4).unwrap_err();
        match err {
            Error::LimitNotConverged { max_m: 4, last } => {
                assert!(last > 0.0 && last < 9.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn limit_rejects_bad_arguments() {
        assert!(renormalized_limit(3, -1.0f64, 1, 1e-12, 10).is_err());
        assert!(renormalized_limit(3, 1.0f64, 1, 0.0, 10).is_err());
        assert!(renormalized_limit(3, 1.0f64, 5, 1e-12, 5).is_err());
    }

    #[test]
    fn partial_products_converge_under_the_majorant() {
        // a_n = prod_{k=2}^n 1/(1 - lam_k) for the minus tail from 1 at
        // level 1; b_n majorizes it once lam_n <= C / N^n.
        let n = 3u32;
        let mut lams = vec![0.0f64; 130];
        lams[1] = 1.0;
        for k in 2..130 {
            lams[k] = refine_eigenvalue(lams[k - 1], Branch::Minus, n);
        }
        let mut a = vec![1.0f64; 130];
        for k in 2..130 {
            a[k] = a[k - 1] / (1.0 - lams[k]);
            // Strictly increasing until lam_k reaches rounding scale, never
            // decreasing after.
            if k <= 30 {
                assert!(a[k] > a[k - 1], "partial products must increase");
            } else {
                assert!(a[k] >= a[k - 1]);
            }
        }
        assert!((a[61] - a[60]).abs() < 1e-12, "Cauchy by level 61");
        assert!((a[129] - 1.554974269999409).abs() < 1e-12);

        let m0 = 8usize;
        let c = 3.0f64.powi(m0 as i32) * lams[m0];
        let mut b = a[m0];
        for k in m0 + 1..130 {
            let nk = 3.0f64.powi(k as i32);
            b *= nk / (nk - c);
            assert!(a[k] <= b + 1e-13, "majorant fails at {k}: {} > {b}", a[k]);
        }
    }

    #[test]
    fn laplacian_residual_decreases_along_the_tail() {
        let entries = dirichlet_spectrum::<f64>(3, 1).unwrap();
        let one = &entries[0];
        assert_eq!(one.value, 1.0);
        let r2 = laplacian_residual(3, one, 2).unwrap();
        let r3 = laplacian_residual(3, one, 3).unwrap();
        let r4 = laplacian_residual(3, one, 4).unwrap();
        assert!(r2 > r3 && r3 > r4, "r2={r2} r3={r3} r4={r4}");
        // Desk-scale values frozen from the independent run.
        assert!((r2 - 0.826317354434).abs() < 1e-9);
        assert!((r3 - 0.279334223169).abs() < 1e-9);
        assert!((r4 - 0.0935398275576).abs() < 1e-9);
    }

    #[test]
    fn laplacian_residual_of_zero_function_is_zero() {
        let zero = GridFunction::<f64>::zeros(3, 1).unwrap();
        for m_max in 1..=3 {
            let r = laplacian_residual_from(&zero, 1.0, GOLDEN_LIMIT, m_max).unwrap();
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn laplacian_residual_detects_a_wrong_limit() {
        let chi = eigenbasis_one::<f64>(3, 1).unwrap();
        let u = &chi.functions[0];
        let honest = laplacian_residual_from(u, 1.0, GOLDEN_LIMIT, 4).unwrap();
        let faked = laplacian_residual_from(u, 1.0, 2.0 * GOLDEN_LIMIT, 4).unwrap();
        assert!(honest < 0.1);
        assert!(faked > 1.0, "wrong limit must not look converged: {faked}");
    }

    #[test]
    fn probe_vanishes_for_identical_points() {
        let f = chi_extension();
        let p = Point::parse("1-2-1-2.1", 3).unwrap();
        assert_eq!(continuity_probe(&f, &p, &p, 12).unwrap(), 0.0);
    }

    #[test]
    fn probe_shrinks_with_the_shared_prefix() {
        let f = chi_extension();
        let depth = 16;
        // x alternates 1212...; y follows x for m0 symbols, then holds 3.
        let xs: Vec<u32> = (0..depth).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let x = Point::new(&xs, if depth % 2 == 0 { 1 } else { 2 }, 3).unwrap();
        let frozen = [(2usize, 0.188948826301), (4, 0.0211878689872), (8, 0.000261833334418)];
        let mut prev = f64::INFINITY;
        for (m0, expected) in frozen {
            let mut ys = xs[..m0].to_vec();
            ys.resize(depth, 3);
            let y = Point::new(&ys, 3, 3).unwrap();
            let d = continuity_probe(&f, &x, &y, depth).unwrap();
            assert!((d - expected).abs() < 1e-9, "m0={m0}: {d} vs {expected}");
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn probe_difference_obeys_the_product_bound() {
        let f = chi_extension();
        let depth = 16;
        let m0 = 4usize;
        let xs: Vec<u32> = (0..depth).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let x = Point::new(&xs, 1, 3).unwrap();
        let mut ys = xs[..m0].to_vec();
        ys.resize(depth, 3);
        let y = Point::new(&ys, 3, 3).unwrap();
        let probe = continuity_probe(&f, &x, &y, depth).unwrap();

        // Majorant b for the shared-prefix factor, and the explicit tail
        // product difference past the shared prefix.
        let mut lams = vec![0.0f64; depth + 2];
        lams[1] = 1.0;
        for k in 2..lams.len() {
            lams[k] = refine_eigenvalue(lams[k - 1], Branch::Minus, 3);
        }
        let tail = |p: &Point| -> f64 {
            let t = p.truncate(depth);
            let mut acc = 1.0;
            for pos in m0 + 1..=t.level() {
                if t.symbol_at(pos) != t.symbol_at(pos + 1) {
                    acc /= 1.0 - lams[pos];
                }
            }
            acc
        };
        let tail_diff = (tail(&x) - tail(&y)).abs();
        let c = 3.0f64.powi(m0 as i32) * lams[m0];
        let mut b = (2..=m0).fold(1.0, |acc, k| acc / (1.0 - lams[k]));
        for k in m0 + 1..=depth + 1 {
            let nk = 3.0f64.powi(k as i32);
            b *= nk / (nk - c);
        }
        let max_base = 1.0; // chi takes values in {0, 1}
        assert!(probe <= b * max_base * tail_diff + 1e-12);
    }

    #[test]
    fn probe_requires_agreement_past_the_base_level() {
        let f = chi_extension();
        let x = Point::parse("1-2-1.2", 3).unwrap();
        let y = Point::parse("2-2-1.2", 3).unwrap();
        assert!(continuity_probe(&f, &x, &y, 8).is_err());
    }

    #[test]
    fn trace_serialization_round_trips() {
        let trace = renormalized_limit(3, 1.0f64, 1, 1e-10, 60).unwrap();
        let text = serde_json::to_string(&trace).unwrap();
        let back: LimitTrace<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, trace);
        assert!(text.starts_with("{\"N\":3,\"m0\":1,\"lambda0\":1.0,"));
        let csv = trace.to_csv();
        assert!(csv.starts_with("m,lambda,scaled\n1,1,9\n"));
    }
}
