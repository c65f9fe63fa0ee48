//! Dense matrices over `Z/p^r`: arithmetic, kernels modulo `p`, and
//! elementary divisors by local diagonalization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp;
use crate::ring::{LocalRing, RingError, RingHeader};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("rings differ: {0:?} vs {1:?}")]
    RingMismatch(LocalRing, LocalRing),
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("matrix is not invertible")]
    Singular,
    #[error("entry {value} at ({row}, {col}) is not reduced modulo {modulus}")]
    Unreduced { row: usize, col: usize, value: u64, modulus: u64 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    ring: LocalRing,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// Paired elementary-divisor exponents of an antisymmetric matrix, capped at
/// the level. `exponents` is ascending with `h = floor(d/2)` entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorProfile {
    pub level: u32,
    pub exponents: Vec<u32>,
}

impl DivisorProfile {
    pub fn h(&self) -> usize {
        self.exponents.len()
    }

    /// Number of exponents strictly below the level.
    pub fn below_level(&self) -> usize {
        self.exponents.iter().filter(|&&a| a < self.level).count()
    }

    /// The profile seen at a lower level: every entry capped at `level`.
    pub fn capped(&self, level: u32) -> DivisorProfile {
        DivisorProfile {
            level,
            exponents: self.exponents.iter().map(|&a| a.min(level)).collect(),
        }
    }
}

/// Result of `P A Q = D` with `D` diagonal with entries `p^e_i` (capped at `r`).
#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Valuations of the diagonal, one per index `< min(rows, cols)`, in
    /// pivot order (not sorted).
    pub exponents: Vec<u32>,
    /// `Q`, when requested.
    pub col_transform: Option<Mat>,
    /// `det(A)` for square input.
    pub det: Option<u64>,
}

impl Mat {
    pub fn zeros(ring: LocalRing, rows: usize, cols: usize) -> Self {
        Mat { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: LocalRing, n: usize) -> Self {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % ring.modulus();
        }
        m
    }

    pub fn from_fn(ring: LocalRing, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i128) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(ring.from_int(f(i, j)));
            }
        }
        Mat { ring, rows, cols, data }
    }

    pub fn from_rows(ring: LocalRing, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Mat::from_fn(ring, rows.len(), cols, |i, j| rows[i][j] as i128)
    }

    /// Builds a matrix from already reduced residues in row-major order.
    pub fn from_residues(ring: LocalRing, rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|&x| x < ring.modulus()));
        Mat { ring, rows, cols, data }
    }

    /// The matrix unit `e_ij`.
    pub fn unit(ring: LocalRing, n: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(ring, n, n);
        m.data[i * n + j] = 1 % ring.modulus();
        m
    }

    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.ring.modulus();
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entries as signed integers in the symmetric range `(-m/2, m/2]`.
    pub fn signed_entries(&self) -> Vec<Vec<i64>> {
        let m = self.ring.modulus();
        self.to_rows()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|x| if x > m / 2 { x as i64 - m as i64 } else { x as i64 })
                    .collect()
            })
            .collect()
    }

    fn check_same(&self, other: &Mat) -> Result<(), MatrixError> {
        if self.ring != other.ring {
            return Err(MatrixError::RingMismatch(self.ring, other.ring));
        }
        Ok(())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.check_same(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatrixError::Shape(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| ring.add(a, b)).collect();
        Ok(Mat { ring, rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        let ring = self.ring;
        Mat { data: self.data.iter().map(|&a| ring.neg(a)).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: u64) -> Mat {
        let ring = self.ring;
        let s = s % ring.modulus();
        Mat { data: self.data.iter().map(|&a| ring.mul(a, s)).collect(), ..self.clone() }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.check_same(other)?;
        if self.cols != other.rows {
            return Err(MatrixError::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let m = self.ring.modulus() as u128;
        let mut out = Mat::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u128 * other.get(k, j) as u128;
                    if acc >= 1u128 << 125 {
                        acc %= m;
                    }
                }
                out.data[i * other.cols + j] = (acc % m) as u64;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let m = self.ring.modulus() as u128;
        (0..self.rows)
            .map(|i| {
                let acc: u128 = (0..self.cols)
                    .map(|k| self.get(i, k) as u128 * v[k] as u128 % m)
                    .sum();
                (acc % m) as u64
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn trace(&self) -> u64 {
        (0..self.rows.min(self.cols)).fold(0, |acc, i| self.ring.add(acc, self.get(i, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self.get(i, j) == self.ring.neg(self.get(j, i)))
            })
    }

    /// Minimum valuation over all entries (`r` for the zero matrix).
    pub fn valuation(&self) -> u32 {
        self.data.iter().map(|&x| self.ring.valuation(x)).min().unwrap_or(self.ring.level())
    }

    /// Reduction modulo `p^level`.
    pub fn reduce(&self, level: u32) -> Result<Mat, MatrixError> {
        let target = self.ring.at_level(level)?;
        if level > self.ring.level() {
            return Err(RingError::BadReduction { from: self.ring.level(), to: level }.into());
        }
        let m = target.modulus();
        Ok(Mat { ring: target, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x % m).collect() })
    }

    /// Same residues read in a ring of higher level (the canonical lift).
    pub fn lift(&self, ring: LocalRing) -> Mat {
        assert!(ring.p() == self.ring.p() && ring.level() >= self.ring.level());
        Mat { ring, ..self.clone() }
    }

    pub fn mod_p_rows(&self) -> Vec<Vec<u64>> {
        let p = self.ring.p();
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x % p).collect()).collect()
    }

    /// Basis of the kernel of the reduction modulo `p`.
    pub fn kernel_mod_p(&self) -> Vec<Vec<u64>> {
        fp::kernel(&self.mod_p_rows(), self.cols, self.ring.p())
    }

    pub fn rank_mod_p(&self) -> usize {
        fp::rank(&self.mod_p_rows(), self.cols, self.ring.p())
    }

    /// Diagonalizes over `Z/p^r` by minimum-valuation pivoting (row-major
    /// first among ties), optionally tracking the column transform.
    pub fn diagonalize(&self, track_columns: bool) -> Diagonalization {
        let ring = self.ring;
        let r = ring.level();
        let (m, n) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let mut q = track_columns.then(|| Mat::identity(ring, n));
        let mut det = 1 % ring.modulus();
        let mut negate = false;
        let mut exponents = Vec::with_capacity(m.min(n));
        for k in 0..m.min(n) {
            let mut best: Option<(usize, usize, u32)> = None;
            'search: for i in k..m {
                for j in k..n {
                    let v = ring.valuation(a[i * n + j]);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let (pi, pj, v) = best.expect("nonempty block");
            if v >= r {
                exponents.extend(std::iter::repeat_n(r, m.min(n) - k));
                det = 0;
                break;
            }
            if pi != k {
                for j in 0..n {
                    a.swap(pi * n + j, k * n + j);
                }
                negate = !negate;
            }
            if pj != k {
                for i in 0..m {
                    a.swap(i * n + pj, i * n + k);
                }
                if let Some(q) = q.as_mut() {
                    for i in 0..n {
                        q.data.swap(i * n + pj, i * n + k);
                    }
                }
                negate = !negate;
            }
            let pivot = a[k * n + k];
            det = ring.mul(det, pivot);
            let pv = ring.p().pow(v);
            let unit = pivot / pv;
            let unit_inv = ring.inverse(unit).expect("unit part");
            for j in k..n {
                a[k * n + j] = ring.mul(a[k * n + j], unit_inv);
            }
            for i in k + 1..m {
                let e = a[i * n + k];
                if e == 0 {
                    continue;
                }
                let f = e / pv;
                for j in k..n {
                    let t = ring.mul(f, a[k * n + j]);
                    a[i * n + j] = ring.sub(a[i * n + j], t);
                }
            }
            for j in k + 1..n {
                let e = a[k * n + j];
                if e == 0 {
                    continue;
                }
                let f = e / pv;
                a[k * n + j] = 0;
                if let Some(q) = q.as_mut() {
                    for i in 0..n {
                        let t = ring.mul(f, q.data[i * n + k]);
                        q.data[i * n + j] = ring.sub(q.data[i * n + j], t);
                    }
                }
            }
            exponents.push(v);
        }
        if negate {
            det = ring.neg(det);
        }
        Diagonalization { exponents, col_transform: q, det: (m == n).then_some(det) }
    }

    /// Elementary-divisor exponents, ascending, capped at the level.
    pub fn elementary_divisors(&self) -> Vec<u32> {
        let mut e = self.diagonalize(false).exponents;
        e.sort_unstable();
        e
    }

    pub fn det(&self) -> Result<u64, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape("determinant of non-square matrix".into()));
        }
        let ring = self.ring;
        let g = |i, j| self.get(i, j);
        Ok(match self.rows {
            0 => 1 % ring.modulus(),
            1 => g(0, 0),
            2 => ring.sub(ring.mul(g(0, 0), g(1, 1)), ring.mul(g(0, 1), g(1, 0))),
            3 => {
                let minor = |a: usize, b: usize, c: usize, d: usize| {
                    ring.sub(ring.mul(g(1, a), g(2, b)), ring.mul(g(1, c), g(2, d)))
                };
                let t0 = ring.mul(g(0, 0), minor(1, 2, 2, 1));
                let t1 = ring.mul(g(0, 1), minor(0, 2, 2, 0));
                let t2 = ring.mul(g(0, 2), minor(0, 1, 1, 0));
                ring.add(ring.sub(t0, t1), t2)
            }
            _ => self.diagonalize(false).det.expect("square"),
        })
    }

    /// Inverse by Gauss-Jordan with unit pivots.
    pub fn inverse(&self) -> Result<Mat, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape("inverse of non-square matrix".into()));
        }
        let ring = self.ring;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(ring, n);
        for col in 0..n {
            let pr = (col..n).find(|&i| ring.is_unit(a.get(i, col))).ok_or(MatrixError::Singular)?;
            if pr != col {
                for j in 0..n {
                    a.data.swap(pr * n + j, col * n + j);
                    inv.data.swap(pr * n + j, col * n + j);
                }
            }
            let u = ring.inverse(a.get(col, col)).expect("unit pivot");
            for j in 0..n {
                a.data[col * n + j] = ring.mul(a.data[col * n + j], u);
                inv.data[col * n + j] = ring.mul(inv.data[col * n + j], u);
            }
            for i in 0..n {
                let f = a.get(i, col);
                if i == col || f == 0 {
                    continue;
                }
                for j in 0..n {
                    a.data[i * n + j] = ring.sub(a.data[i * n + j], ring.mul(f, a.data[col * n + j]));
                    inv.data[i * n + j] = ring.sub(inv.data[i * n + j], ring.mul(f, inv.data[col * n + j]));
                }
            }
        }
        Ok(inv)
    }

    /// Paired elementary-divisor profile of an antisymmetric matrix.
    pub fn antisymmetric_profile(&self) -> Result<DivisorProfile, MatrixError> {
        if !self.is_antisymmetric() {
            return Err(MatrixError::NotAntisymmetric);
        }
        let r = self.ring.level();
        let d = self.rows;
        let e = self.elementary_divisors();
        // an odd dimension carries one extra vanishing divisor, sorted last
        let paired = &e[..d - d % 2];
        for pair in paired.chunks(2) {
            assert_eq!(pair[0], pair[1], "antisymmetric divisors must pair up: {e:?}");
        }
        if d % 2 == 1 {
            assert_eq!(e[d - 1], r);
        }
        Ok(DivisorProfile { level: r, exponents: paired.iter().step_by(2).copied().collect() })
    }

    /// Basis (mod `p`) of the reduction modulo `p` of the kernel over `Z/p^r`.
    pub fn kernel_reduction_mod_p(&self) -> Vec<Vec<u64>> {
        let r = self.ring.level();
        let p = self.ring.p();
        let diag = self.diagonalize(true);
        let q = diag.col_transform.expect("tracked");
        let mut exps = diag.exponents.clone();
        exps.resize(self.cols, r);
        (0..self.cols)
            .filter(|&i| exps[i] >= r)
            .map(|i| q.column(i).into_iter().map(|x| x % p).collect())
            .collect()
    }
}

/// JSON form: ring header plus an array of integer rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatJson {
    pub ring: RingHeader,
    pub entries: Vec<Vec<u64>>,
}

impl From<&Mat> for MatJson {
    fn from(m: &Mat) -> Self {
        MatJson { ring: m.ring.into(), entries: m.to_rows() }
    }
}

impl TryFrom<MatJson> for Mat {
    type Error = MatrixError;
    fn try_from(j: MatJson) -> Result<Self, MatrixError> {
        let ring = LocalRing::try_from(j.ring)?;
        let cols = j.entries.first().map_or(0, Vec::len);
        let mut data = Vec::new();
        for (i, row) in j.entries.iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::Shape("ragged rows".into()));
            }
            for (c, &value) in row.iter().enumerate() {
                if value >= ring.modulus() {
                    return Err(MatrixError::Unreduced { row: i, col: c, value, modulus: ring.modulus() });
                }
                data.push(value);
            }
        }
        Ok(Mat { ring, rows: j.entries.len(), cols, data })
    }
}

impl Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatJson::deserialize(d)?;
        Mat::try_from(j).map_err(serde::de::Error::custom)
    }
}
