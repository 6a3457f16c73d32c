//! Exact integer assembly of the difference operator `H_m` on the ordered
//! vertex set `V_m`, its Dirichlet restriction, and its action on grid
//! functions.
//!
//! Entries are integers by construction: the diagonal of a level-`n` point is
//! `-(m - n + 1)(N - 1)`, off-diagonal entries are `1` exactly for the pairs
//! related at some admissible depth, and every row sums to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_count, from_int, Scalar};
use crate::symbolic::{LevelSet, Point, DEFAULT_SIZE_CAP};

/// Dense symmetric integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    side: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(side: usize) -> Self {
        IntMatrix {
            side,
            data: vec![0; side * side],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.side + col] = value;
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.data[row * self.side..(row + 1) * self.side]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.data.chunks_exact(self.side)
    }
}

/// A real-valued function on `V_level`, indexed by the canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<S> {
    n: u32,
    level: usize,
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    pub fn zeros(n: u32, level: usize) -> Result<Self> {
        let size = (n as u128).checked_pow(level as u32 + 1).unwrap_or(u128::MAX);
        if size > DEFAULT_SIZE_CAP as u128 {
            return Err(Error::SizeCapExceeded {
                n,
                m: level,
                required: size,
                cap: DEFAULT_SIZE_CAP,
            });
        }
        Ok(GridFunction {
            n,
            level,
            values: vec![S::zero(); size as usize],
        })
    }

    pub fn from_values(n: u32, level: usize, values: Vec<S>) -> Result<Self> {
        let expected = (n as usize).pow(level as u32 + 1);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "grid function on V_{level} over {n} symbols needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(GridFunction { n, level, values })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> S {
        self.values[i]
    }

    pub fn set_value(&mut self, i: usize, v: S) {
        self.values[i] = v;
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Whether the function vanishes identically on the boundary `V_0`.
    pub fn is_dirichlet(&self) -> bool {
        self.values[..self.n as usize].iter().all(|v| *v == S::zero())
    }

    /// Restriction to `V_k`, `k <= level`: the leading `N^{k+1}` values.
    pub fn restrict(&self, k: usize) -> Result<GridFunction<S>> {
        if k > self.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                got: k,
            });
        }
        let size = (self.n as usize).pow(k as u32 + 1);
        Ok(GridFunction {
            n: self.n,
            level: k,
            values: self.values[..size].to_vec(),
        })
    }
}

/// JSON form of an assembled operator.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct OperatorDump {
    #[serde(rename = "N")]
    pub n: u32,
    pub m: usize,
    pub size: usize,
    pub rows: Vec<Vec<i64>>,
}

/// The difference operator `H_m`, with its vertex set.
pub struct Operator {
    level_set: LevelSet,
    entries: IntMatrix,
}

impl Operator {
    pub fn assemble(n: u32, m: usize) -> Result<Operator> {
        Self::assemble_with_cap(n, m, DEFAULT_SIZE_CAP)
    }

    pub fn assemble_with_cap(n: u32, m: usize, cap: usize) -> Result<Operator> {
        let level_set = LevelSet::enumerate_with_cap(n, m, cap)?;
        let side = level_set.len();
        let mut entries = IntMatrix::zeros(side);

        for k in 0..=m {
            let diag = -((m - k + 1) as i64) * (n as i64 - 1);
            for i in level_set.level_range(k) {
                entries.set(i, i, diag);
            }
        }

        // Every unordered related pair appears in exactly one equivalence
        // class: the V_0 class at depth 0, and for depth i >= 1 one class per
        // point of V_{i-1} (its first i symbols form the class word).
        let link = |entries: &mut IntMatrix, members: &[usize]| {
            for (a, &x) in members.iter().enumerate() {
                for &y in &members[a + 1..] {
                    assert_eq!(entries.get(x, y), 0, "pair linked twice");
                    entries.set(x, y, 1);
                    entries.set(y, x, 1);
                }
            }
        };
        let boundary: Vec<usize> = (0..n as usize).collect();
        link(&mut entries, &boundary);
        for depth in 1..=m {
            let class_count = (n as usize).pow(depth as u32);
            for qi in 0..class_count {
                let word: Vec<_> = {
                    let q = level_set.point(qi);
                    (1..=depth).map(|i| q.symbol_at(i)).collect()
                };
                let members: Vec<usize> = (1..=n)
                    .map(|l| {
                        let sym = crate::symbolic::Symbol::new(l, n).expect("symbol in range");
                        let p = Point::canonical(word.clone(), sym);
                        level_set.position(&p).expect("class member enumerated")
                    })
                    .collect();
                link(&mut entries, &members);
            }
        }

        Ok(Operator { level_set, entries })
    }

    pub fn n(&self) -> u32 {
        self.level_set.n()
    }

    pub fn m(&self) -> usize {
        self.level_set.m()
    }

    pub fn side(&self) -> usize {
        self.entries.side()
    }

    pub fn level_set(&self) -> &LevelSet {
        &self.level_set
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries.get(row, col)
    }

    /// Matrix-vector product `H_m u`; integer entries promote to the scalar.
    pub fn apply<S: Scalar>(&self, u: &GridFunction<S>) -> Result<GridFunction<S>> {
        if u.level() != self.m() {
            return Err(Error::LevelMismatch {
                expected: self.m(),
                got: u.level(),
            });
        }
        if u.len() != self.side() {
            return Err(Error::InvalidArgument(format!(
                "grid function has {} values, operator side is {}",
                u.len(),
                self.side()
            )));
        }
        let mut out = Vec::with_capacity(self.side());
        for row in self.entries.rows() {
            let mut acc = S::zero();
            for (a, v) in row.iter().zip(u.values()) {
                if *a != 0 {
                    acc = acc + from_int::<S>(*a) * *v;
                }
            }
            out.push(acc);
        }
        GridFunction::from_values(self.n(), self.m(), out)
    }

    /// Principal submatrix on the non-boundary indices. The Dirichlet
    /// eigenvalues of `H_m` are exactly the eigenvalues of its negation.
    pub fn dirichlet_restrict(&self) -> IntMatrix {
        let n = self.n() as usize;
        let side = self.side() - n;
        let mut out = IntMatrix::zeros(side);
        for i in 0..side {
            for j in 0..side {
                out.set(i, j, self.entries.get(i + n, j + n));
            }
        }
        out
    }

    /// Point labels in canonical order.
    pub fn labels(&self) -> Vec<String> {
        self.level_set.points().iter().map(|p| p.to_string()).collect()
    }

    pub fn dump(&self) -> OperatorDump {
        OperatorDump {
            n: self.n(),
            m: self.m(),
            size: self.side(),
            rows: self.entries.rows().map(|r| r.to_vec()).collect(),
        }
    }

    /// CSV dump: header row of point labels, then the integer rows.
    pub fn to_csv(&self) -> String {
        let mut out = self.labels().join(",");
        out.push('\n');
        for row in self.entries.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Scale factor `N^{m+1}` as a scalar.
pub(crate) fn renormalization_factor<S: Scalar>(n: u32, m: usize) -> S {
    let base = from_count::<S>(n as usize);
    let mut acc = S::one();
    for _ in 0..=m {
        acc = acc * base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h0_matrix_for_three_symbols() {
        let h = Operator::assemble(3, 0).unwrap();
        let expected = [[-2, 1, 1], [1, -2, 1], [1, 1, -2]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.entry(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn h1_structure_for_three_symbols() {
        let h = Operator::assemble(3, 1).unwrap();
        assert_eq!(h.side(), 9);
        for i in 0..3 {
            assert_eq!(h.entry(i, i), -4);
        }
        for i in 3..9 {
            assert_eq!(h.entry(i, i), -2);
        }
        // Row of (.1): ones exactly at (.2), (.3), (1.2), (1.3).
        let labels = h.labels();
        let ones: Vec<&str> = (0..9)
            .filter(|&j| h.entry(0, j) == 1)
            .map(|j| labels[j].as_str())
            .collect();
        assert_eq!(ones, [".2", ".3", "1.2", "1.3"]);
    }

    #[test]
    fn rows_have_the_forced_number_of_ones() {
        for (n, m) in [(3u32, 2usize), (4, 2), (2, 3), (5, 1)] {
            let h = Operator::assemble(n, m).unwrap();
            for k in 0..=m {
                for i in h.level_set().level_range(k) {
                    let ones = (0..h.side()).filter(|&j| h.entry(i, j) == 1).count();
                    assert_eq!(ones, (m - k + 1) * (n as usize - 1));
                }
            }
        }
    }

    #[test]
    fn structural_invariants_hold() {
        for (n, m) in [(3u32, 3usize), (4, 2), (2, 4), (6, 1)] {
            let h = Operator::assemble(n, m).unwrap();
            for i in 0..h.side() {
                let mut sum = 0i64;
                for j in 0..h.side() {
                    let e = h.entry(i, j);
                    sum += e;
                    assert_eq!(e, h.entry(j, i));
                    if i != j {
                        assert!(e == 0 || e == 1);
                    }
                }
                assert_eq!(sum, 0, "row {i} of H_{m} (N={n})");
            }
        }
    }

    #[test]
    fn apply_kills_constants() {
        let h = Operator::assemble(3, 2).unwrap();
        let u = GridFunction::from_values(3, 2, vec![5.0f64; 27]).unwrap();
        let hu = h.apply(&u).unwrap();
        assert!(hu.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn apply_indicator_reads_off_a_column() {
        let h = Operator::assemble(3, 1).unwrap();
        let ls = h.level_set();
        let target = Point::new(&[1], 2, 3).unwrap();
        let ti = ls.position(&target).unwrap();
        let mut u = GridFunction::<f64>::zeros(3, 1).unwrap();
        u.set_value(ti, 1.0);
        let hu = h.apply(&u).unwrap();
        for (i, p) in ls.points().iter().enumerate() {
            let expected = match p.to_string().as_str() {
                "1.2" => -2.0,
                ".1" | "1.3" => 1.0,
                _ => 0.0,
            };
            assert_eq!(hu.value(i), expected, "at {p}");
        }
    }

    #[test]
    fn apply_rejects_level_mismatch() {
        let h = Operator::assemble(3, 2).unwrap();
        let u = GridFunction::<f64>::zeros(3, 1).unwrap();
        assert!(matches!(
            h.apply(&u),
            Err(Error::LevelMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn dirichlet_restriction_shape_and_content() {
        let h1 = Operator::assemble(3, 1).unwrap();
        let d1 = h1.dirichlet_restrict();
        assert_eq!(d1.side(), 6);
        let h2 = Operator::assemble(3, 2).unwrap();
        assert_eq!(h2.dirichlet_restrict().side(), 24);

        // Level-1 diagonal stays -2 and the two same-class level-1 points
        // are adjacent: (1.2) and (1.3) sit at offsets 2 and 4 past V_0.
        for i in 0..6 {
            assert_eq!(d1.get(i, i), -2);
        }
        let ls = h1.level_set();
        let a = ls.position(&Point::new(&[1], 2, 3).unwrap()).unwrap() - 3;
        let b = ls.position(&Point::new(&[1], 3, 3).unwrap()).unwrap() - 3;
        assert_eq!(d1.get(a, b), 1);
    }

    #[test]
    fn dump_round_trips_through_json() {
        let h = Operator::assemble(3, 1).unwrap();
        let dump = h.dump();
        let text = serde_json::to_string(&dump).unwrap();
        let back: OperatorDump = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dump);
        assert!(text.starts_with("{\"N\":3,\"m\":1,\"size\":9,"));
    }

    #[test]
    fn csv_dump_has_labels_and_integer_rows() {
        let h = Operator::assemble(3, 0).unwrap();
        assert_eq!(h.to_csv(), ".1,.2,.3\n-2,1,1\n1,-2,1\n1,1,-2\n");
    }
}
