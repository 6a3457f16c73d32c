//! Spectral decimation: the two-branch refinement map between eigenvalues of
//! consecutive difference operators, the complete Dirichlet spectrum with
//! multiplicities and addresses, and the explicit eigenbases.
//!
//! An eigenvalue `x` of `H_{m-1}` refines into the two roots of
//! `t^2 - (N + x) t + x = 0`; conversely `x = t (N - t) / (1 - t)`. The full
//! Dirichlet spectrum of `H_m` is the pair `{1, N}` together with both
//! refinements of the spectrum of `H_{m-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::GridFunction;
use crate::scalar::{cast, from_count, Scalar};
use crate::symbolic::{LevelSet, Point, Symbol, DEFAULT_SIZE_CAP};

/// Default absolute tolerance for recognizing the degenerate values 0, 1, N.
pub const DEFAULT_FORBIDDEN_TOL: f64 = 1e-9;

/// Root choice in the refinement quadratic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign_char(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }
}

/// Refines a level-`(m-1)` eigenvalue into a level-`m` one: the chosen root
/// of `t^2 - (N + x) t + x = 0`. The minus branch uses the product form
/// `2x / ((N + x) + sqrt((N + x)^2 - 4x))`, which does not cancel as
/// `x -> 0`.
pub fn refine_eigenvalue<S: Scalar>(x: S, branch: Branch, n: u32) -> S {
    let n = from_count::<S>(n as usize);
    let two = cast::<S>(2.0);
    let four = cast::<S>(4.0);
    let sum = n + x;
    let root = (sum * sum - four * x).sqrt();
    match branch {
        Branch::Plus => (sum + root) / two,
        Branch::Minus => two * x / (sum + root),
    }
}

/// Inverts both refinement branches: `lam (N - lam) / (1 - lam)`. The value
/// `lam = 1` is a pole and is refused.
pub fn coarsen_eigenvalue<S: Scalar>(lam: S, n: u32) -> Result<S> {
    let one = S::one();
    if lam == one {
        return Err(Error::ForbiddenEigenvalue {
            value: 1.0,
            reason: "the inverse relation has a pole at 1",
        });
    }
    let n = from_count::<S>(n as usize);
    Ok(lam * (n - lam) / (one - lam))
}

/// Classification of an eigenvalue against the degenerate values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueClass {
    Zero,
    One,
    SymbolCount,
    Regular,
}

/// Tags `lam` within `tol` of 0, 1, or N. Extension refuses all three;
/// coarsening refuses 0 and 1.
pub fn classify_eigenvalue<S: Scalar>(lam: S, n: u32, tol: S) -> ValueClass {
    if (lam - S::zero()).abs() <= tol {
        ValueClass::Zero
    } else if (lam - S::one()).abs() <= tol {
        ValueClass::One
    } else if (lam - from_count::<S>(n as usize)).abs() <= tol {
        ValueClass::SymbolCount
    } else {
        ValueClass::Regular
    }
}

/// Base eigenvalue of a decimation address: the localized values `1` and `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpectrumBase {
    One,
    N,
}

impl SpectrumBase {
    pub fn value<S: Scalar>(self, n: u32) -> S {
        match self {
            SpectrumBase::One => S::one(),
            SpectrumBase::N => from_count::<S>(n as usize),
        }
    }
}

#[derive(Serialize, Deserialize, Clone)]
struct AddressWire {
    base: String,
    born_at: usize,
    betas: String,
}

/// Canonical identity of a spectrum entry: the base value, the level at
/// which it entered the spectrum, and the branch word applied since,
/// oldest first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "AddressWire", try_from = "AddressWire")]
pub struct DecimationAddress {
    base: SpectrumBase,
    born_at: usize,
    branches: Vec<Branch>,
}

impl DecimationAddress {
    pub fn born(base: SpectrumBase, born_at: usize) -> Self {
        DecimationAddress {
            base,
            born_at,
            branches: Vec::new(),
        }
    }

    pub fn base(&self) -> SpectrumBase {
        self.base
    }

    pub fn born_at(&self) -> usize {
        self.born_at
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The level this address describes: birth level plus branch count.
    pub fn level(&self) -> usize {
        self.born_at + self.branches.len()
    }

    pub fn child(&self, branch: Branch) -> Self {
        let mut branches = self.branches.clone();
        branches.push(branch);
        DecimationAddress {
            base: self.base,
            born_at: self.born_at,
            branches,
        }
    }

    /// Recomputes the eigenvalue the address denotes by applying the branch
    /// word to the base value.
    pub fn value<S: Scalar>(&self, n: u32) -> S {
        let mut lam = self.base.value::<S>(n);
        for &b in &self.branches {
            lam = refine_eigenvalue(lam, b, n);
        }
        lam
    }
}

impl From<DecimationAddress> for AddressWire {
    fn from(a: DecimationAddress) -> AddressWire {
        AddressWire {
            base: match a.base {
                SpectrumBase::One => "1".to_string(),
                SpectrumBase::N => "N".to_string(),
            },
            born_at: a.born_at,
            betas: a.branches.iter().map(|b| b.sign_char()).collect(),
        }
    }
}

impl TryFrom<AddressWire> for DecimationAddress {
    type Error = String;

    fn try_from(w: AddressWire) -> std::result::Result<Self, String> {
        let base = match w.base.as_str() {
            "1" => SpectrumBase::One,
            "N" => SpectrumBase::N,
            other => return Err(format!("unknown spectrum base '{other}'")),
        };
        let branches = w
            .betas
            .chars()
            .map(|c| match c {
                '+' => Ok(Branch::Plus),
                '-' => Ok(Branch::Minus),
                other => Err(format!("unknown branch sign '{other}'")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DecimationAddress {
            base,
            born_at: w.born_at,
            branches,
        })
    }
}

/// One Dirichlet eigenvalue with its multiplicity and address.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry<S> {
    pub value: S,
    pub multiplicity: u64,
    pub address: DecimationAddress,
}

/// JSON form of a complete spectrum.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct SpectrumDocument<S> {
    #[serde(rename = "N")]
    pub n: u32,
    pub m: usize,
    pub entries: Vec<SpectrumEntry<S>>,
    pub total_multiplicity: u64,
}

impl<S: Scalar> SpectrumDocument<S> {
    pub fn new(n: u32, m: usize, entries: Vec<SpectrumEntry<S>>) -> Self {
        let total_multiplicity = entries.iter().map(|e| e.multiplicity).sum();
        SpectrumDocument {
            n,
            m,
            entries,
            total_multiplicity,
        }
    }
}

fn require_spectrum_inputs(n: u32, m: usize, cap: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::TooFewSymbols { n });
    }
    if m < 1 {
        return Err(Error::InvalidArgument(
            "spectrum is defined for levels m >= 1".into(),
        ));
    }
    let required = (n as u128).checked_pow(m as u32 + 1).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::SizeCapExceeded { n, m, required, cap });
    }
    Ok(())
}

/// The complete Dirichlet spectrum of `H_m`, in address order. Values `1` and
/// `N` enter fresh at every level with multiplicities `N` and `N^m (N - 2)`;
/// every entry of level `m - 1` refines along both branches, keeping its
/// multiplicity. Multiplicities sum to `N^{m+1} - N`.
pub fn dirichlet_spectrum<S: Scalar>(n: u32, m: usize) -> Result<Vec<SpectrumEntry<S>>> {
    dirichlet_spectrum_with_cap(n, m, DEFAULT_SIZE_CAP)
}

pub fn dirichlet_spectrum_with_cap<S: Scalar>(
    n: u32,
    m: usize,
    cap: usize,
) -> Result<Vec<SpectrumEntry<S>>> {
    require_spectrum_inputs(n, m, cap)?;
    let mut entries = fresh_entries::<S>(n, 1);
    for level in 2..=m {
        let mut next = fresh_entries::<S>(n, level);
        for e in &entries {
            for branch in [Branch::Plus, Branch::Minus] {
                next.push(SpectrumEntry {
                    value: refine_eigenvalue(e.value, branch, n),
                    multiplicity: e.multiplicity,
                    address: e.address.child(branch),
                });
            }
        }
        entries = next;
    }
    entries.sort_by(|a, b| a.address.cmp(&b.address));
    debug_assert_eq!(entries.len(), (1usize << (m + 1)) - 2);
    Ok(entries)
}

fn fresh_entries<S: Scalar>(n: u32, level: usize) -> Vec<SpectrumEntry<S>> {
    vec![
        SpectrumEntry {
            value: S::one(),
            multiplicity: n as u64,
            address: DecimationAddress::born(SpectrumBase::One, level),
        },
        SpectrumEntry {
            value: from_count::<S>(n as usize),
            multiplicity: (n as u64).pow(level as u32) * (n as u64 - 2),
            address: DecimationAddress::born(SpectrumBase::N, level),
        },
    ]
}

/// An eigenvalue with a basis of its Dirichlet eigenspace.
#[derive(Clone, Debug)]
pub struct EigenPair<S> {
    pub value: S,
    pub functions: Vec<GridFunction<S>>,
}

/// The `N` localized eigenfunctions for the eigenvalue `1` at level `m`: for
/// each symbol `s`, the indicator of the `N - 1` level-`m` points whose
/// prefix is `s` repeated `m` times.
pub fn eigenbasis_one<S: Scalar>(n: u32, m: usize) -> Result<EigenPair<S>> {
    require_spectrum_inputs(n, m, DEFAULT_SIZE_CAP)?;
    let ls = LevelSet::enumerate(n, m)?;
    let mut functions = Vec::with_capacity(n as usize);
    for s in 1..=n {
        let sym = Symbol::new(s, n)?;
        let word = vec![sym; m];
        let mut f = GridFunction::zeros(n, m)?;
        for l in 1..=n {
            if l == s {
                continue;
            }
            let p = Point::canonical(word.clone(), Symbol::new(l, n)?);
            let i = ls.position(&p).expect("class member enumerated");
            f.set_value(i, S::one());
        }
        functions.push(f);
    }
    Ok(EigenPair {
        value: S::one(),
        functions,
    })
}

/// The `N^m (N - 2)` localized eigenfunctions for the eigenvalue `N` at
/// level `m`: per equivalence class of the `m`-relation, `+1` at the earliest
/// level-`m` member and `-1` at each other level-`m` member.
pub fn eigenbasis_n<S: Scalar>(n: u32, m: usize) -> Result<EigenPair<S>> {
    require_spectrum_inputs(n, m, DEFAULT_SIZE_CAP)?;
    let ls = LevelSet::enumerate(n, m)?;
    let class_count = (n as usize).pow(m as u32);
    let mut functions = Vec::with_capacity(class_count * (n as usize - 2));
    for qi in 0..class_count {
        let word: Vec<_> = {
            let q = ls.point(qi);
            (1..=m).map(|i| q.symbol_at(i)).collect()
        };
        let mut member_indices: Vec<usize> = (1..=n)
            .filter_map(|l| {
                let p = Point::canonical(word.clone(), Symbol::new(l, n).ok()?);
                if p.level() == m {
                    Some(ls.position(&p).expect("class member enumerated"))
                } else {
                    None
                }
            })
            .collect();
        member_indices.sort_unstable();
        let designated = member_indices[0];
        for &other in &member_indices[1..] {
            let mut f = GridFunction::zeros(n, m)?;
            f.set_value(designated, S::one());
            f.set_value(other, -S::one());
            functions.push(f);
        }
    }
    Ok(EigenPair {
        value: from_count::<S>(n as usize),
        functions,
    })
}

/// Extends a grid function on `V_{m-1}` to `V_m` by the decimation rule:
/// values carry over, and every new level-`m` point takes the value of its
/// designated `V_{m-1}` neighbor divided by `1 - lam_m`. If the input is an
/// eigenfunction for the coarsened eigenvalue, the output is one for
/// `lam_m`.
pub fn extend_eigenfunction<S: Scalar>(
    u_prev: &GridFunction<S>,
    lam_m: S,
    n: u32,
) -> Result<GridFunction<S>> {
    let m = u_prev.level() + 1;
    let ls = LevelSet::enumerate(n, m)?;
    extend_with(&ls, u_prev, lam_m)
}

/// Extension using a pre-enumerated `V_m`; `ls.m()` must be
/// `u_prev.level() + 1`.
pub fn extend_with<S: Scalar>(
    ls: &LevelSet,
    u_prev: &GridFunction<S>,
    lam_m: S,
) -> Result<GridFunction<S>> {
    let n = ls.n();
    let m = ls.m();
    if u_prev.level() + 1 != m {
        return Err(Error::LevelMismatch {
            expected: m - 1,
            got: u_prev.level(),
        });
    }
    if u_prev.n() != n {
        return Err(Error::InvalidArgument(format!(
            "grid function is over {} symbols, level set over {n}",
            u_prev.n()
        )));
    }
    let class = classify_eigenvalue(lam_m, n, cast::<S>(DEFAULT_FORBIDDEN_TOL));
    if class != ValueClass::Regular {
        return Err(Error::ForbiddenEigenvalue {
            value: lam_m.to_f64().unwrap_or(f64::NAN),
            reason: "extension divides by 1 - lam and needs lam away from 0, 1, N",
        });
    }

    let mut values = u_prev.values().to_vec();
    values.reserve(ls.len() - values.len());
    let scale = S::one() / (S::one() - lam_m);
    for i in ls.level_range(m) {
        let q = ls.point(i).designated_lower().expect("level >= 1");
        let qi = ls.position(&q).expect("lower neighbor enumerated");
        values.push(u_prev.value(qi) * scale);
    }
    GridFunction::from_values(n, m, values)
}

/// Materializes the eigenspace of every spectrum entry at level `m`: the
/// localized basis at the birth level, pushed up along the branch word by
/// repeated extension. Pairs are returned in address order; the total
/// function count is `N^{m+1} - N`.
pub fn dirichlet_eigenbasis<S: Scalar>(n: u32, m: usize) -> Result<Vec<EigenPair<S>>> {
    let entries = dirichlet_spectrum::<S>(n, m)?;
    let mut level_sets = Vec::with_capacity(m);
    for level in 1..=m {
        level_sets.push(LevelSet::enumerate(n, level)?);
    }
    entries
        .iter()
        .map(|entry| eigenpair_for(n, entry, &level_sets))
        .collect()
}

/// Materializes the eigenspace of a single spectrum entry.
pub fn materialize_eigenpair<S: Scalar>(
    n: u32,
    entry: &SpectrumEntry<S>,
) -> Result<EigenPair<S>> {
    let m = entry.address.level();
    let mut level_sets = Vec::with_capacity(m);
    for level in 1..=m {
        level_sets.push(LevelSet::enumerate(n, level)?);
    }
    eigenpair_for(n, entry, &level_sets)
}

fn eigenpair_for<S: Scalar>(
    n: u32,
    entry: &SpectrumEntry<S>,
    level_sets: &[LevelSet],
) -> Result<EigenPair<S>> {
    let born = entry.address.born_at();
    let base = match entry.address.base() {
        SpectrumBase::One => eigenbasis_one::<S>(n, born)?,
        SpectrumBase::N => eigenbasis_n::<S>(n, born)?,
    };
    let mut lam = base.value;
    let mut functions = base.functions;
    for (step, &branch) in entry.address.branches().iter().enumerate() {
        lam = refine_eigenvalue(lam, branch, n);
        let ls = &level_sets[born + step]; // V_{born + step + 1}
        functions = functions
            .iter()
            .map(|f| extend_with(ls, f, lam))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(EigenPair {
        value: lam,
        functions,
    })
}
