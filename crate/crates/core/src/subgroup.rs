//! Subgroups of `SL_n(F_p)` held as sorted element codes, with the invariants
//! used to compare shadows.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::fp::{self, Subspace};
use crate::group::{enumerate_sl, sl_order, MatCodec};
use crate::lie::LieLattice;
use crate::matrix::Mat;
use crate::ring::LocalRing;

/// A subgroup of `SL_n(F_p)`; equal subgroups compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    p: u64,
    n: usize,
    elems: Vec<u64>,
}

/// Isomorphism invariants of a subgroup together with its Lie span.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub order: u64,
    /// Dimension of the additive span intersected with `sl_n`.
    pub span_dim: usize,
    /// Dimension of the functionals on that span fixed by the group.
    pub fixed_dual_dim: usize,
    /// Element order to number of elements of that order.
    pub element_orders: BTreeMap<u64, u64>,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let orders: Vec<String> = self.element_orders.iter().map(|(o, c)| format!("{o}^{c}")).collect();
        write!(f, "|S|={} d={} z={} [{}]", self.order, self.span_dim, self.fixed_dual_dim, orders.join(" "))
    }
}

/// Small dense helper for products of codes.
#[derive(Debug, Clone, Copy)]
pub struct FieldCodec {
    codec: MatCodec,
}

impl FieldCodec {
    pub fn new(p: u64, n: usize) -> Self {
        let ring = LocalRing::new(p, 1).expect("odd prime");
        FieldCodec { codec: MatCodec::new(ring, n).expect("code fits in 64 bits") }
    }

    pub fn ring(&self) -> LocalRing {
        self.codec.ring
    }

    pub fn n(&self) -> usize {
        self.codec.n
    }

    pub fn encode(&self, m: &Mat) -> u64 {
        let p = self.codec.ring.p();
        let entries: Vec<u64> = m.data().iter().map(|x| x % p).collect();
        self.codec.encode_entries(&entries)
    }

    pub fn decode(&self, code: u64) -> Mat {
        self.codec.decode(code)
    }

    pub fn identity(&self) -> u64 {
        self.codec.encode(&Mat::identity(self.codec.ring, self.codec.n))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let n = self.codec.n;
        let p = self.codec.ring.p();
        let mut x = [0u64; 16];
        let mut y = [0u64; 16];
        self.codec.decode_entries(a, &mut x[..n * n]);
        self.codec.decode_entries(b, &mut y[..n * n]);
        let mut z = [0u64; 16];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0;
                for k in 0..n {
                    acc += x[i * n + k] * y[k * n + j];
                }
                z[i * n + j] = acc % p;
            }
        }
        self.codec.encode_entries(&z[..n * n])
    }

    pub fn inverse(&self, a: u64) -> u64 {
        self.encode(&self.decode(a).inverse().expect("invertible"))
    }
}

impl Subgroup {
    /// Wraps a set of codes that is already known to be a subgroup.
    pub fn from_codes(p: u64, n: usize, mut elems: Vec<u64>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        Subgroup { p, n, elems }
    }

    pub fn trivial(p: u64, n: usize) -> Self {
        let c = FieldCodec::new(p, n);
        Subgroup { p, n, elems: vec![c.identity()] }
    }

    /// `SL_n(F_p)` itself.
    pub fn full(p: u64, n: usize) -> Self {
        let ring = LocalRing::new(p, 1).expect("odd prime");
        let (_, all) = enumerate_sl(n, ring, u128::MAX).expect("codes fit");
        Subgroup { p, n, elems: all.as_ref().clone() }
    }

    /// The subgroup generated by the given codes.
    pub fn generated_by(p: u64, n: usize, gens: &[u64]) -> Self {
        let c = FieldCodec::new(p, n);
        let id = c.identity();
        let mut seen: HashSet<u64> = HashSet::from([id]);
        let mut frontier = vec![id];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = c.mul(x, g);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Subgroup::from_codes(p, n, seen.into_iter().collect())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codec(&self) -> FieldCodec {
        FieldCodec::new(self.p, self.n)
    }

    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    pub fn codes(&self) -> &[u64] {
        &self.elems
    }

    pub fn contains_code(&self, code: u64) -> bool {
        self.elems.binary_search(&code).is_ok()
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.contains_code(self.codec().encode(m))
    }

    pub fn matrices(&self) -> Vec<Mat> {
        let c = self.codec();
        self.elems.iter().map(|&e| c.decode(e)).collect()
    }

    pub fn is_full(&self) -> bool {
        self.order() as u128 == sl_order(self.n, self.p, 1)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elems.iter().all(|&e| other.contains_code(e))
    }

    /// Checks closure under products; a debugging aid for small groups.
    pub fn is_closed(&self) -> bool {
        let c = self.codec();
        self.elems.iter().all(|&a| self.elems.iter().all(|&b| self.contains_code(c.mul(a, b))))
    }

    /// A generating set chosen greedily in code order.
    pub fn generators(&self) -> Vec<u64> {
        if self.is_full() {
            let ring = LocalRing::new(self.p, 1).expect("odd prime");
            let c = self.codec();
            let mut gens = Vec::new();
            for i in 0..self.n {
                for j in 0..self.n {
                    if i != j {
                        let mut m = Mat::identity(ring, self.n);
                        m.set(i, j, 1);
                        gens.push(c.encode(&m));
                    }
                }
            }
            return gens;
        }
        let mut gens = Vec::new();
        let mut span = Subgroup::trivial(self.p, self.n);
        for &e in &self.elems {
            if span.order() == self.order() {
                break;
            }
            if !span.contains_code(e) {
                gens.push(e);
                span = Subgroup::generated_by(self.p, self.n, &gens);
            }
        }
        gens
    }

    pub fn is_abelian(&self) -> bool {
        let c = self.codec();
        let gens = self.generators();
        gens.iter().all(|&a| gens.iter().all(|&b| c.mul(a, b) == c.mul(b, a)))
    }

    pub fn element_orders(&self) -> BTreeMap<u64, u64> {
        let c = self.codec();
        let id = c.identity();
        let mut hist = BTreeMap::new();
        for &e in &self.elems {
            let mut k = 1u64;
            let mut x = e;
            while x != id {
                x = c.mul(x, e);
                k += 1;
            }
            *hist.entry(k).or_insert(0) += 1;
        }
        hist
    }

    /// Additive span of the elements inside `M_n(F_p)`, intersected with the
    /// lattice, in lattice coordinates.
    pub fn lie_span(&self, lattice: &LieLattice) -> Subspace {
        let n = self.n;
        let p = self.p;
        let c = self.codec();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut rank = 0;
        for &e in &self.elems {
            let mut v = vec![0u64; n * n];
            c.codec.decode_entries(e, &mut v);
            rows.push(v);
            let r = fp::rank(&rows, n * n, p);
            if r == rank {
                rows.pop();
            } else {
                rank = r;
                if rank == n * n {
                    break;
                }
            }
        }
        let span = Subspace::span(&rows, n * n, p);
        let weights: Vec<u64> = (0..n * n).map(|k| u64::from(k % (n + 1) == 0)).collect();
        let traceless = span.intersect_hyperplane(&weights);
        let field = c.ring();
        let coords: Vec<Vec<u64>> = traceless
            .basis()
            .iter()
            .map(|v| lattice.coordinates(&Mat::from_residues(field, n, n, v.clone())).expect("traceless"))
            .collect();
        Subspace::span(&coords, lattice.d(), p)
    }

    /// Matrix (in the RREF basis of `span`) of `y -> g y g^-1` restricted to
    /// a conjugation-stable span.
    pub fn conjugation_on(&self, lattice: &LieLattice, span: &Subspace, g: u64) -> Vec<Vec<u64>> {
        let c = self.codec();
        let field = c.ring();
        let gm = c.decode(g);
        let gi = gm.inverse().expect("invertible");
        let k = span.dim();
        let mut m = vec![vec![0u64; k]; k];
        for (j, y) in span.basis().iter().enumerate() {
            let ym = lattice.element(y, field);
            let conj = gm.mul(&ym).expect("shape").mul(&gi).expect("shape");
            let cc = span.coords(&lattice.coordinates(&conj).expect("traceless")).expect("span is stable");
            for (i, v) in cc.into_iter().enumerate() {
                m[i][j] = v;
            }
        }
        m
    }

    /// Dimension of the functionals on `span` fixed by the conjugation action.
    pub fn fixed_dual_dim(&self, lattice: &LieLattice, span: &Subspace) -> usize {
        let k = span.dim();
        let p = self.p;
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for g in self.generators() {
            let m = self.conjugation_on(lattice, span, g);
            // c fixed iff c . (Ad_g y_j - y_j) = 0 for all j
            for j in 0..k {
                rows.push((0..k).map(|i| (m[i][j] + p - u64::from(i == j)) % p).collect());
            }
        }
        k - fp::rank(&rows, k, p)
    }

    pub fn signature(&self, lattice: &LieLattice) -> Signature {
        let span = self.lie_span(lattice);
        Signature {
            order: self.order(),
            span_dim: span.dim(),
            fixed_dual_dim: self.fixed_dual_dim(lattice, &span),
            element_orders: self.element_orders(),
        }
    }

    /// `g H g^-1` for `g` in `GL_n(F_p)`.
    pub fn conjugate(&self, g: &Mat) -> Subgroup {
        let c = self.codec();
        let gc = c.encode(g);
        let gi = c.encode(&g.inverse().expect("invertible"));
        Subgroup::from_codes(self.p, self.n, self.elems.iter().map(|&e| c.mul(c.mul(gc, e), gi)).collect())
    }

    /// Searches `GL_n(F_p)` for `g` with `g H g^-1 = other`; exhaustive, so
    /// only meant for small `p^(n^2)`.
    pub fn gl_conjugator(&self, other: &Subgroup) -> Option<Mat> {
        if self.order() != other.order() || self.n != other.n || self.p != other.p {
            return None;
        }
        let c = self.codec();
        let field = c.ring();
        let n = self.n;
        let total = self.p.pow((n * n) as u32);
        let gens = self.generators();
        for code in 0..total {
            let g = c.decode(code);
            if !field.is_unit(g.det().expect("square")) {
                continue;
            }
            let gi = c.encode(&g.inverse().expect("unit det"));
            let ok = gens.iter().all(|&h| other.contains_code(c.mul(c.mul(code, h), gi)));
            if ok {
                return Some(g);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> LocalRing {
        LocalRing::new(p, 1).unwrap()
    }

    #[test]
    fn full_and_trivial() {
        let sl2 = LieLattice::sl(2);
        let full = Subgroup::full(5, 2);
        assert_eq!(full.order(), 120);
        assert!(full.is_closed());
        let sig = full.signature(&sl2);
        assert_eq!(sig.span_dim, 3);
        assert_eq!(sig.fixed_dual_dim, 0);
        assert_eq!(sig.element_orders.values().sum::<u64>(), 120);
        let triv = Subgroup::trivial(5, 2);
        let t = triv.signature(&sl2);
        assert_eq!((t.order, t.span_dim, t.fixed_dual_dim), (1, 0, 0));
        assert!(triv.is_abelian());
        assert!(!full.is_abelian());
    }

    #[test]
    fn unipotent_centralizer() {
        // {+-(I + t e12)} in SL_2(F_5)
        let f = field(5);
        let c = FieldCodec::new(5, 2);
        let g1 = c.encode(&Mat::from_rows(f, &[vec![1, 1], vec![0, 1]]));
        let g2 = c.encode(&Mat::from_rows(f, &[vec![-1, 0], vec![0, -1]]));
        let h = Subgroup::generated_by(5, 2, &[g1, g2]);
        assert_eq!(h.order(), 10);
        assert!(h.is_abelian());
        let sig = h.signature(&LieLattice::sl(2));
        assert_eq!((sig.span_dim, sig.fixed_dual_dim), (1, 1));
        assert_eq!(sig.element_orders, BTreeMap::from([(1, 1), (2, 1), (5, 4), (10, 4)]));
    }

    #[test]
    fn conjugates_are_found() {
        let f = field(3);
        let c = FieldCodec::new(3, 2);
        let upper = Subgroup::generated_by(3, 2, &[c.encode(&Mat::from_rows(f, &[vec![1, 1], vec![0, 1]]))]);
        let lower = Subgroup::generated_by(3, 2, &[c.encode(&Mat::from_rows(f, &[vec![1, 0], vec![1, 1]]))]);
        let g = upper.gl_conjugator(&lower).expect("conjugate");
        assert_eq!(upper.conjugate(&g), lower);
        let torus = Subgroup::generated_by(3, 2, &[c.encode(&Mat::from_rows(f, &[vec![2, 0], vec![0, 2]]))]);
        assert!(upper.gl_conjugator(&torus).is_none());
    }
}
