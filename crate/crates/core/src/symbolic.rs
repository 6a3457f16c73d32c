//! Eventually constant points of the shift space, the ordered vertex sets
//! `V_m`, deleted neighborhoods, the standard metric, and the cylinder
//! measure.
//!
//! A point of `V_m` is an infinite sequence over `{1, ..., N}` that is
//! constant from position `m + 1` on. It is stored canonically as the
//! shortest prefix plus the repeating tail symbol, so equality and hashing
//! are structural.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num::{BigInt, BigRational};

use crate::error::{Error, Result};

/// Default bound on `|V_m| = N^{m+1}`; enumeration refuses beyond it.
pub const DEFAULT_SIZE_CAP: usize = 200_000;

/// One letter of the alphabet `{1, ..., N}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub fn new(value: u32, n: u32) -> Result<Self> {
        if value == 0 || value > n {
            return Err(Error::SymbolOutOfRange { value, n });
        }
        Ok(Symbol(value))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An eventually constant sequence in canonical form: the prefix never ends
/// with the tail symbol, so `level == prefix.len()` is minimal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    prefix: Vec<Symbol>,
    tail: Symbol,
}

impl Point {
    /// The fixed point `(l l l ...)` of the shift, an element of `V_0`.
    pub fn fixed(tail: Symbol) -> Self {
        Point {
            prefix: Vec::new(),
            tail,
        }
    }

    /// Canonicalizes `(prefix, tail)` by absorbing trailing prefix symbols
    /// equal to the tail. Symbols are validated against the alphabet size.
    pub fn new(prefix: &[u32], tail: u32, n: u32) -> Result<Self> {
        let prefix = prefix
            .iter()
            .map(|&v| Symbol::new(v, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonical(prefix, Symbol::new(tail, n)?))
    }

    pub(crate) fn canonical(mut prefix: Vec<Symbol>, tail: Symbol) -> Self {
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Point { prefix, tail }
    }

    /// The minimal `m` with `self ∈ V_m`.
    pub fn level(&self) -> usize {
        self.prefix.len()
    }

    pub fn tail(&self) -> Symbol {
        self.tail
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    /// The symbol at 1-based position `i` of the full sequence.
    pub fn symbol_at(&self, i: usize) -> Symbol {
        debug_assert!(i >= 1);
        if i <= self.prefix.len() {
            self.prefix[i - 1]
        } else {
            self.tail
        }
    }

    /// Largest symbol value occurring in the sequence.
    pub fn max_symbol(&self) -> u32 {
        self.prefix
            .iter()
            .map(|s| s.get())
            .chain(std::iter::once(self.tail.get()))
            .max()
            .unwrap()
    }

    /// Drops the first symbol; fixed points shift to themselves.
    pub fn shift(&self) -> Point {
        if self.prefix.is_empty() {
            self.clone()
        } else {
            Point::canonical(self.prefix[1..].to_vec(), self.tail)
        }
    }

    /// The point `(p_1 ... p_depth, ṗ_{depth+1})`: keeps the first `depth`
    /// symbols and repeats the next one. For `depth >= level` this is the
    /// point itself.
    pub fn truncate(&self, depth: usize) -> Point {
        if depth >= self.level() {
            return self.clone();
        }
        let prefix = self.prefix[..depth].to_vec();
        Point::canonical(prefix, self.symbol_at(depth + 1))
    }

    /// 1-based positions `i <= level` where `p_i != p_{i+1}`. The last one is
    /// always `level` itself (canonical form), so the list is empty exactly
    /// for fixed points.
    pub fn change_positions(&self) -> Vec<usize> {
        (1..=self.level())
            .filter(|&i| self.symbol_at(i) != self.symbol_at(i + 1))
            .collect()
    }

    /// Chain of points connecting the boundary to `self`: the fixed point of
    /// the first symbol, then the truncation at every change position.
    /// Consecutive elements are related at the deeper element's level.
    pub fn chain_to_boundary(&self) -> Vec<Point> {
        let mut chain = vec![Point::fixed(self.symbol_at(1))];
        for i in self.change_positions() {
            chain.push(self.truncate(i));
        }
        chain
    }

    /// For a point of level `m >= 1`, its unique neighbor in `V_{m-1}`:
    /// `(p_1 ... p_{m-1}, ṗ_m)`.
    pub fn designated_lower(&self) -> Option<Point> {
        let m = self.level();
        if m == 0 {
            return None;
        }
        Some(Point::canonical(
            self.prefix[..m - 1].to_vec(),
            self.prefix[m - 1],
        ))
    }

    /// Parses the text form: prefix symbols joined by `-`, a `.`, then the
    /// tail symbol; an empty prefix is a leading `.`. Examples: `1-2.1`, `.3`.
    pub fn parse(input: &str, n: u32) -> Result<Point> {
        let parse_err = |reason| Error::PointParse {
            input: input.to_string(),
            reason,
        };
        let (head, tail_str) = input
            .rsplit_once('.')
            .ok_or_else(|| parse_err("missing '.' before the tail symbol"))?;
        let tail: u32 = tail_str
            .parse()
            .map_err(|_| parse_err("tail is not a positive integer"))?;
        let mut prefix = Vec::new();
        if !head.is_empty() {
            for part in head.split('-') {
                let v: u32 = part
                    .parse()
                    .map_err(|_| parse_err("prefix symbol is not a positive integer"))?;
                prefix.push(v);
            }
        }
        Point::new(&prefix, tail, n)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ".{}", self.tail)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl Ord for Point {
    /// The enumeration order of `V_*`: lower levels first; within one level
    /// a point follows its shift (recursively), ties broken by the first
    /// symbol. Unrolled, the key of a level-`k` point is the tuple
    /// `(k, tail, p_k, p_{k-1}, ..., p_1)` compared lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then_with(|| self.tail.cmp(&other.tail))
            .then_with(|| {
                self.prefix
                    .iter()
                    .rev()
                    .cmp(other.prefix.iter().rev())
            })
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A cylinder set fixing the initial `word` of a sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    word: Vec<Symbol>,
}

impl Cylinder {
    pub fn new(word: &[u32], n: u32) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidArgument(
                "cylinder word must be nonempty".into(),
            ));
        }
        let word = word
            .iter()
            .map(|&v| Symbol::new(v, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cylinder { word })
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    /// The equidistributed Bernoulli measure: exactly `1 / N^len`.
    pub fn measure(&self, n: u32) -> BigRational {
        let denom = BigInt::from(n).pow(self.word.len() as u32);
        BigRational::new(BigInt::from(1), denom)
    }
}

/// The standard metric `1 / 2^ρ` where `ρ` is the first position at which the
/// full sequences disagree; zero for equal points.
pub fn distance(x: &Point, y: &Point) -> BigRational {
    let horizon = x.level().max(y.level()) + 1;
    for i in 1..=horizon {
        if x.symbol_at(i) != y.symbol_at(i) {
            let denom = BigInt::from(2).pow(i as u32);
            return BigRational::new(BigInt::from(1), denom);
        }
    }
    // Canonical points agreeing through max(level) + 1 are equal.
    debug_assert_eq!(x, y);
    BigRational::from(BigInt::from(0))
}

/// The deleted neighborhood of `p` in `V_depth`: the other `N - 1` points
/// whose first `depth` symbols coincide with those of `p`, in ascending tail
/// order. Requires `level(p) <= depth`.
pub fn deleted_neighborhood(p: &Point, depth: usize, n: u32) -> Result<Vec<Point>> {
    if p.level() > depth {
        return Err(Error::DepthBelowLevel {
            depth,
            level: p.level(),
        });
    }
    let word: Vec<Symbol> = (1..=depth).map(|i| p.symbol_at(i)).collect();
    let mut out = Vec::with_capacity(n as usize - 1);
    for l in 1..=n {
        let sym = Symbol::new(l, n)?;
        let q = Point::canonical(word.clone(), sym);
        if &q != p {
            out.push(q);
        }
    }
    debug_assert_eq!(out.len(), n as usize - 1);
    Ok(out)
}

/// The ordered vertex set `V_m` with index lookup.
///
/// The order extends the one on `V_{m-1}`: the first `N^m` entries are
/// exactly `V_{m-1}`, and the new level-`m` points follow, sorted by the
/// position of their one-symbol shift and then by their first symbol.
#[derive(Debug)]
pub struct LevelSet {
    n: u32,
    m: usize,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
}

impl LevelSet {
    pub fn enumerate(n: u32, m: usize) -> Result<Self> {
        Self::enumerate_with_cap(n, m, DEFAULT_SIZE_CAP)
    }

    pub fn enumerate_with_cap(n: u32, m: usize, cap: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 symbols, got N = {n}"
            )));
        }
        let required = (n as u128)
            .checked_pow(m as u32 + 1)
            .unwrap_or(u128::MAX);
        if required > cap as u128 {
            return Err(Error::SizeCapExceeded { n, m, required, cap });
        }

        let mut points: Vec<Point> = (1..=n)
            .map(|l| Point::fixed(Symbol(l)))
            .collect();
        for k in 1..=m {
            // Points of level exactly k - 1, in order.
            let lo = if k == 1 { 0 } else { (n as usize).pow(k as u32 - 1) };
            let hi = (n as usize).pow(k as u32);
            let mut fresh = Vec::with_capacity(hi * (n as usize - 1));
            for qi in lo..hi {
                let q = &points[qi];
                for l in 1..=n {
                    let mut prefix = Vec::with_capacity(q.level() + 1);
                    prefix.push(Symbol(l));
                    prefix.extend_from_slice(&q.prefix);
                    let p = Point::canonical(prefix, q.tail);
                    if p.level() == k {
                        fresh.push(p);
                    }
                }
            }
            points.extend(fresh);
        }
        debug_assert_eq!(points.len(), required as usize);

        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(LevelSet { n, m, points, index })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Position of a point of any level `<= m`; prefix consistency makes the
    /// position independent of `m`.
    pub fn position(&self, p: &Point) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Index range of the points of level exactly `k`.
    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        assert!(k <= self.m);
        if k == 0 {
            0..self.n as usize
        } else {
            (self.n as usize).pow(k as u32)..(self.n as usize).pow(k as u32 + 1)
        }
    }
}
