//! The Lie lattices `sl_n` and `gl_n` over `Z/p^r`: fixed bases, structure
//! constants, the trace form, and commutator matrices of linear forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp;
use crate::matrix::{Mat, MatrixError};
use crate::ring::LocalRing;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("matrix is not in the lattice (nonzero trace or wrong size)")]
    NotInLattice,
    #[error("the invariant form is degenerate modulo {p}")]
    DegenerateForm { p: u64 },
    #[error("span is not closed under the bracket: [y{i}, y{j}] leaves it")]
    NotClosed { i: usize, j: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LieKind {
    Sl,
    Gl,
}

/// Integer description of `sl_n` or `gl_n` in a fixed basis.
///
/// The `sl_n` basis lists the upper off-diagonal units row by row, then
/// `e_ii - e_(i+1)(i+1)`, then the lower off-diagonal units row by row. The
/// `gl_n` basis is the matrix units in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieLattice {
    n: usize,
    kind: LieKind,
    /// Basis matrices, each `n*n` integers row-major.
    basis: Vec<Vec<i64>>,
    /// `structure[(i*d + j)*d + k] = lambda^k_ij`.
    structure: Vec<i64>,
    /// Gram matrix of the invariant form, `d*d`.
    gram: Vec<i64>,
    /// The form is `form_scale * tr(xy)`.
    form_scale: i64,
}

fn int_mul(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

impl LieLattice {
    pub fn sl(n: usize) -> Self {
        assert!(n >= 2);
        let unit = |i: usize, j: usize| {
            let mut m = vec![0i64; n * n];
            m[i * n + j] = 1;
            m
        };
        let mut basis = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                basis.push(unit(i, j));
            }
        }
        for i in 0..n - 1 {
            let mut m = vec![0i64; n * n];
            m[i * n + i] = 1;
            m[(i + 1) * n + i + 1] = -1;
            basis.push(m);
        }
        for i in 0..n {
            for j in 0..i {
                basis.push(unit(i, j));
            }
        }
        Self::build(n, LieKind::Sl, basis, 1)
    }

    pub fn gl(n: usize) -> Self {
        let basis = (0..n * n)
            .map(|k| {
                let mut m = vec![0i64; n * n];
                m[k] = 1;
                m
            })
            .collect();
        Self::build(n, LieKind::Gl, basis, 1)
    }

    /// Same lattice with the form multiplied by `scale`.
    pub fn with_form_scale(&self, scale: i64) -> Self {
        Self::build(self.n, self.kind, self.basis.clone(), scale)
    }

    fn build(n: usize, kind: LieKind, basis: Vec<Vec<i64>>, form_scale: i64) -> Self {
        let d = basis.len();
        let mut lattice = LieLattice { n, kind, basis, structure: vec![0; d * d * d], gram: vec![0; d * d], form_scale };
        for i in 0..d {
            for j in 0..d {
                let xy = int_mul(&lattice.basis[i], &lattice.basis[j], n);
                let yx = int_mul(&lattice.basis[j], &lattice.basis[i], n);
                let br: Vec<i64> = xy.iter().zip(&yx).map(|(a, b)| a - b).collect();
                let c = lattice.int_coordinates(&br).expect("bracket stays in the lattice");
                lattice.structure[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&c);
                let tr: i64 = (0..n).map(|k| xy[k * n + k]).sum();
                lattice.gram[i * d + j] = form_scale * tr;
            }
        }
        lattice
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> LieKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.basis.len()
    }

    pub fn h(&self) -> usize {
        self.d() / 2
    }

    pub fn form_scale(&self) -> i64 {
        self.form_scale
    }

    pub fn basis_ints(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn basis_matrix(&self, i: usize, ring: LocalRing) -> Mat {
        let n = self.n;
        Mat::from_fn(ring, n, n, |a, b| self.basis[i][a * n + b] as i128)
    }

    #[inline]
    pub fn structure(&self, i: usize, j: usize, k: usize) -> i64 {
        let d = self.d();
        self.structure[(i * d + j) * d + k]
    }

    pub fn gram(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.d() + j]
    }

    pub fn gram_matrix(&self, ring: LocalRing) -> Mat {
        let d = self.d();
        Mat::from_fn(ring, d, d, |i, j| self.gram(i, j) as i128)
    }

    /// Integer coordinates of an integer matrix; `None` if it is outside.
    pub fn int_coordinates(&self, m: &[i64]) -> Option<Vec<i64>> {
        let n = self.n;
        match self.kind {
            LieKind::Gl => Some(m.to_vec()),
            LieKind::Sl => {
                let tr: i64 = (0..n).map(|k| m[k * n + k]).sum();
                if tr != 0 {
                    return None;
                }
                let mut c = Vec::with_capacity(n * n - 1);
                for i in 0..n {
                    for j in i + 1..n {
                        c.push(m[i * n + j]);
                    }
                }
                let mut acc = 0;
                for i in 0..n - 1 {
                    acc += m[i * n + i];
                    c.push(acc);
                }
                for i in 0..n {
                    for j in 0..i {
                        c.push(m[i * n + j]);
                    }
                }
                Some(c)
            }
        }
    }

    /// Coordinates of a lattice element over `Z/p^r`.
    pub fn coordinates(&self, x: &Mat) -> Result<Vec<u64>, LieError> {
        let n = self.n;
        if x.rows() != n || x.cols() != n {
            return Err(LieError::NotInLattice);
        }
        let ring = x.ring();
        match self.kind {
            LieKind::Gl => Ok(x.data().to_vec()),
            LieKind::Sl => {
                if x.trace() != 0 {
                    return Err(LieError::NotInLattice);
                }
                let mut c = Vec::with_capacity(n * n - 1);
                for i in 0..n {
                    for j in i + 1..n {
                        c.push(x.get(i, j));
                    }
                }
                let mut acc = 0;
                for i in 0..n - 1 {
                    acc = ring.add(acc, x.get(i, i));
                    c.push(acc);
                }
                for i in 0..n {
                    for j in 0..i {
                        c.push(x.get(i, j));
                    }
                }
                Ok(c)
            }
        }
    }

    /// The element with the given coordinates.
    pub fn element(&self, coords: &[u64], ring: LocalRing) -> Mat {
        assert_eq!(coords.len(), self.d());
        let n = self.n;
        let m = ring.modulus();
        let mut data = vec![0u64; n * n];
        for (c, b) in coords.iter().zip(&self.basis) {
            let c = c % m;
            if c == 0 {
                continue;
            }
            for (slot, &e) in data.iter_mut().zip(b) {
                if e != 0 {
                    *slot = ring.add(*slot, ring.mul(c, ring.from_int(e as i128)));
                }
            }
        }
        Mat::from_residues(ring, n, n, data)
    }

    pub fn contains(&self, x: &Mat) -> bool {
        self.coordinates(x).is_ok()
    }

    pub fn bracket(&self, x: &Mat, y: &Mat) -> Result<Mat, LieError> {
        if !self.contains(x) || !self.contains(y) {
            return Err(LieError::NotInLattice);
        }
        Ok(x.mul(y)?.sub(&y.mul(x)?)?)
    }

    /// Matrix of `ad_x`: column `j` holds the coordinates of `[x, b_j]`.
    pub fn ad_matrix(&self, x: &Mat) -> Result<Mat, LieError> {
        let c = self.coordinates(x)?;
        Ok(self.ad_from_coordinates(&c, x.ring()))
    }

    /// `ad` of the element with coordinates `c`, via structure constants.
    pub fn ad_from_coordinates(&self, c: &[u64], ring: LocalRing) -> Mat {
        let d = self.d();
        let mut ad = Mat::zeros(ring, d, d);
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    let l = self.structure(i, j, k);
                    if l != 0 {
                        let v = ring.add(ad.get(k, j), ring.mul(ci, ring.from_int(l as i128)));
                        ad.set(k, j, v);
                    }
                }
            }
        }
        ad
    }

    /// The invariant form `scale * tr(xy)`.
    pub fn form(&self, x: &Mat, y: &Mat) -> Result<u64, LieError> {
        let ring = x.ring();
        let tr = x.mul(y)?.trace();
        Ok(ring.mul(tr, ring.from_int(self.form_scale as i128)))
    }

    /// Coordinates of `form(e, -)` in the dual basis: `Gram * coords(e)`.
    pub fn dual_coordinates(&self, e: &Mat) -> Result<Vec<u64>, LieError> {
        let ring = e.ring();
        let g = self.gram_matrix(ring);
        if !ring.is_unit(g.det()?) {
            return Err(LieError::DegenerateForm { p: ring.p() });
        }
        Ok(g.mul_vec(&self.coordinates(e)?))
    }

    /// Inverse of `dual_coordinates`.
    pub fn from_dual_coordinates(&self, w: &[u64], ring: LocalRing) -> Result<Mat, LieError> {
        let g = self.gram_matrix(ring);
        let ginv = g.inverse().map_err(|_| LieError::DegenerateForm { p: ring.p() })?;
        Ok(self.element(&ginv.mul_vec(w), ring))
    }

    /// `R(Y)_ij = sum_k lambda^k_ij Y_k` for the full basis.
    pub fn commutator_matrix(&self) -> FormMatrix {
        let d = self.d();
        let mut coeffs = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                coeffs.push((0..d).map(|k| self.structure(i, j, k)).collect());
            }
        }
        FormMatrix { dim: d, modulus: None, coeffs }
    }

    /// Commutator matrix of an `F_p`-span given by coordinate vectors; the
    /// span must be closed under the bracket.
    pub fn span_commutator_matrix(&self, span: &[Vec<u64>], p: u64) -> Result<FormMatrix, LieError> {
        let k = span.len();
        let field = LocalRing::new(p, 1).expect("odd prime");
        let elems: Vec<Mat> = span.iter().map(|v| self.element(v, field)).collect();
        let mut coeffs = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let br = elems[i].mul(&elems[j])?.sub(&elems[j].mul(&elems[i])?)?;
                let c = self.coordinates(&br)?;
                let lam = fp::solve(span, &c, p).ok_or(LieError::NotClosed { i, j })?;
                coeffs.push(lam.into_iter().map(|x| x as i64).collect());
            }
        }
        Ok(FormMatrix { dim: k, modulus: Some(p), coeffs })
    }
}

/// An antisymmetric matrix whose entries are linear forms in `Y_1..Y_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormMatrix {
    pub dim: usize,
    /// Present when the coefficients are residues modulo a prime.
    pub modulus: Option<u64>,
    /// `coeffs[i*dim + j][k]` is the coefficient of `Y_k` in entry `(i, j)`.
    pub coeffs: Vec<Vec<i64>>,
}

impl FormMatrix {
    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> i64 {
        self.coeffs[i * self.dim + j][k]
    }

    /// Substitutes `Y = w`.
    pub fn evaluate(&self, w: &[u64], ring: LocalRing) -> Mat {
        assert_eq!(w.len(), self.dim);
        if let Some(p) = self.modulus {
            assert_eq!(ring.p(), p);
        }
        let d = self.dim;
        let mut out = Mat::zeros(ring, d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0u64;
                for (k, &c) in self.coeffs[i * d + j].iter().enumerate() {
                    if c != 0 && w[k] != 0 {
                        acc = ring.add(acc, ring.mul(ring.from_int(c as i128), w[k]));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Entry `(i, j)` rendered as a linear form, e.g. `3X2 - X0`.
    pub fn entry_string(&self, i: usize, j: usize) -> String {
        let mut s = String::new();
        for (k, &c) in self.coeffs[i * self.dim + j].iter().enumerate() {
            let c = match self.modulus {
                Some(p) if c as u64 > p / 2 => c - p as i64,
                _ => c,
            };
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            let mag = c.unsigned_abs();
            if s.is_empty() {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            if mag != 1 {
                s.push_str(&mag.to_string());
            }
            s.push_str(&format!("X{k}"));
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}
