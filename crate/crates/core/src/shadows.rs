//! Group and Lie shadows of lattice elements, their classification in
//! `sl_3`, coadjoint orbits on Lie shadows and the resulting lift tallies.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp::{self, Subspace};
use crate::group::{enumerate_sl, GroupError};
use crate::lie::{FormMatrix, LieError, LieLattice};
use crate::matrix::{Mat, MatrixError};
use crate::ring::{LocalRing, RingError};
use crate::subgroup::{FieldCodec, Signature, Subgroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShadowError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("no shadow-preserving lift of the level-{level} reduction was found")]
    NoShadowPreservingLift { level: u32 },
    #[error("{what} needs {size} steps, above the bound {bound}")]
    Infeasible { what: String, size: u128, bound: u128 },
}

/// How group shadows are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowStrategy {
    /// Enumerate `SL_n(Z/p^r)` and reduce the stabilizer.
    Oracle { bound: u128 },
    /// Walk up from level 1, cutting each shadow down to a functional stabilizer.
    Recursive,
    /// Units of determinant one in `F_p I + (Lie shadow)`.
    Centralizer,
}

impl ShadowStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ShadowStrategy::Oracle { .. } => "oracle",
            ShadowStrategy::Recursive => "recursive",
            ShadowStrategy::Centralizer => "centralizer",
        }
    }
}

/// Reduction mod `p` of the centralizer of `a`, as a subspace of coordinates.
pub fn lie_shadow(lattice: &LieLattice, a: &Mat) -> Result<Subspace, LieError> {
    let ad = lattice.ad_matrix(a)?;
    Ok(Subspace::span(&ad.kernel_reduction_mod_p(), lattice.d(), a.ring().p()))
}

/// Dimension of the Lie shadow read off the elementary divisors of the
/// commutator matrix at the dual coordinates of `a`.
pub fn lie_shadow_dim_from_profile(lattice: &LieLattice, a: &Mat) -> Result<usize, LieError> {
    let w = lattice.dual_coordinates(a)?;
    let profile = lattice.commutator_matrix().evaluate(&w, a.ring()).antisymmetric_profile()?;
    Ok(lattice.d() - 2 * profile.below_level())
}

fn centralizer_shadow(lattice: &LieLattice, p: u64, span: &Subspace) -> Subgroup {
    let n = lattice.n();
    if span.dim() == lattice.d() {
        return Subgroup::full(p, n);
    }
    let field = LocalRing::new(p, 1).expect("odd prime");
    let codec = FieldCodec::new(p, n);
    let k = span.dim();
    let basis: Vec<Mat> = span.basis().iter().map(|y| lattice.element(y, field)).collect();
    let total = p.pow(k as u32 + 1);
    let mut elems = Vec::new();
    for idx in 0..total {
        let mut rest = idx;
        let mut m = Mat::identity(field, n).scale(rest % p);
        rest /= p;
        for b in &basis {
            m = m.add(&b.scale(rest % p)).expect("shape");
            rest /= p;
        }
        if m.det().expect("square") == 1 {
            elems.push(codec.encode(&m));
        }
    }
    Subgroup::from_codes(p, n, elems)
}

fn oracle_shadow(a: &Mat, bound: u128) -> Result<Subgroup, ShadowError> {
    let ring = a.ring();
    let n = a.rows();
    let p = ring.p();
    let (codec, all) = enumerate_sl(n, ring, bound)?;
    let field = FieldCodec::new(p, n);
    let mut elems: Vec<u64> = all
        .par_iter()
        .filter_map(|&code| {
            let g = codec.decode(code);
            let ga = g.mul(a).expect("shape");
            let ag = a.mul(&g).expect("shape");
            (ga == ag).then(|| field.encode(&g))
        })
        .collect();
    elems.sort_unstable();
    elems.dedup();
    Ok(Subgroup::from_codes(p, n, elems))
}

/// Stabilizer in `s_group` of the functional `kappa(xc, -)` restricted to
/// `span`, all over `F_p`.
pub fn functional_stabilizer(lattice: &LieLattice, s_group: &Subgroup, span: &Subspace, xc: &Mat) -> Subgroup {
    let codec = s_group.codec();
    let field = codec.ring();
    let ys: Vec<Mat> = span.basis().iter().map(|y| lattice.element(y, field)).collect();
    let elems = s_group
        .codes()
        .iter()
        .copied()
        .filter(|&g| {
            let gm = codec.decode(g);
            let moved = gm.mul(xc).expect("shape").mul(&gm.inverse().expect("unit")).expect("shape");
            let diff = moved.sub(xc).expect("shape");
            ys.iter().all(|y| lattice.form(&diff, y).expect("shape") == 0)
        })
        .collect();
    Subgroup::from_codes(s_group.p(), s_group.n(), elems)
}

fn recursive_shadow(lattice: &LieLattice, a: &Mat) -> Result<Subgroup, ShadowError> {
    let ring = a.ring();
    let p = ring.p();
    let r = ring.level();
    if r == 1 {
        return Ok(centralizer_shadow(lattice, p, &lie_shadow(lattice, a)?));
    }
    let e = a.reduce(r - 1)?;
    let s_e = recursive_shadow(lattice, &e)?;
    let span_e = lie_shadow(lattice, &e)?;
    let b = shadow_preserving_lift(lattice, &e, ShadowStrategy::Centralizer)?
        .ok_or(ShadowError::NoShadowPreservingLift { level: r - 1 })?;
    let field = ring.residue_field();
    let pr = ring.p_power(r - 1);
    let diff = a.sub(&b)?;
    let xc = Mat::from_fn(field, a.rows(), a.cols(), |i, j| (diff.get(i, j) / pr) as i128);
    Ok(functional_stabilizer(lattice, &s_e, &span_e, &xc))
}

/// Reduction mod `p` of the stabilizer of `a` under the adjoint action.
pub fn group_shadow(lattice: &LieLattice, a: &Mat, strategy: ShadowStrategy) -> Result<Subgroup, ShadowError> {
    lattice.coordinates(a)?;
    match strategy {
        ShadowStrategy::Oracle { bound } => oracle_shadow(a, bound),
        ShadowStrategy::Recursive => recursive_shadow(lattice, a),
        ShadowStrategy::Centralizer => Ok(centralizer_shadow(lattice, a.ring().p(), &lie_shadow(lattice, a)?)),
    }
}

/// A lift of `a` one level up with the same group shadow, searched in
/// lexicographic order of the correction term. Candidates must first have
/// the same Lie shadow; the group shadow is then compared with `strategy`.
pub fn shadow_preserving_lift(
    lattice: &LieLattice,
    a: &Mat,
    strategy: ShadowStrategy,
) -> Result<Option<Mat>, ShadowError> {
    let ring = a.ring();
    let p = ring.p();
    let up = ring.lifted(1)?;
    let span = lie_shadow(lattice, a)?;
    let target = group_shadow(lattice, a, strategy)?;
    let base = lattice.element(&lattice.coordinates(a)?, up);
    let d = lattice.d();
    let step = up.p_power(ring.level());
    for idx in 0..p.pow(d as u32) {
        let mut rest = idx;
        let y: Vec<u64> = (0..d)
            .map(|_| {
                let v = rest % p;
                rest /= p;
                up.mul(v, step)
            })
            .collect();
        let b = base.add(&lattice.element(&y, up))?;
        if lie_shadow(lattice, &b)? != span {
            continue;
        }
        if group_shadow(lattice, &b, strategy)? == target {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// Labels of shadows in `sl_3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShadowLabel {
    SL,
    L,
    J,
    R,
    Other(String),
}

impl std::fmt::Display for ShadowLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShadowLabel::SL => write!(f, "SL"),
            ShadowLabel::L => write!(f, "L"),
            ShadowLabel::J => write!(f, "J"),
            ShadowLabel::R => write!(f, "R"),
            ShadowLabel::Other(s) => write!(f, "OTHER({s})"),
        }
    }
}

/// Whether `x` satisfies `(x - alpha)(x + 2 alpha) = 0` for some `alpha != 0`.
fn has_subregular_semisimple_polynomial(x: &Mat) -> bool {
    let ring = x.ring();
    let n = x.rows();
    (1..ring.modulus()).any(|alpha| {
        let id = Mat::identity(ring, n);
        let left = x.sub(&id.scale(alpha)).expect("shape");
        let right = x.add(&id.scale(ring.mul(2, alpha))).expect("shape");
        left.mul(&right).expect("shape").is_zero()
    })
}

/// Center of a bracket-closed span, in lattice coordinates.
pub fn span_center(lattice: &LieLattice, span: &Subspace, p: u64) -> Result<Subspace, LieError> {
    let k = span.dim();
    let form = lattice.span_commutator_matrix(span.basis(), p)?;
    let mut rows = Vec::new();
    for j in 0..k {
        for l in 0..k {
            rows.push((0..k).map(|i| form.coefficient(i, j, l) as u64 % p).collect::<Vec<u64>>());
        }
    }
    let ker = fp::kernel(&rows, k, p);
    let vectors: Vec<Vec<u64>> = ker
        .iter()
        .map(|a| {
            let mut v = vec![0u64; lattice.d()];
            for (ai, y) in a.iter().zip(span.basis()) {
                for (vj, yj) in v.iter_mut().zip(y) {
                    *vj = (*vj + ai * yj) % p;
                }
            }
            v
        })
        .collect();
    Ok(Subspace::span(&vectors, lattice.d(), p))
}

/// Label of a Lie shadow of `sl_3` from its dimension and center.
pub fn classify_span_sl3(lattice: &LieLattice, span: &Subspace, p: u64) -> ShadowLabel {
    match span.dim() {
        8 => ShadowLabel::SL,
        2 => ShadowLabel::R,
        4 => {
            let Ok(center) = span_center(lattice, span, p) else {
                return ShadowLabel::Other("span not closed".into());
            };
            if center.dim() != 1 {
                return ShadowLabel::Other(format!("center dim {}", center.dim()));
            }
            let field = LocalRing::new(p, 1).expect("odd prime");
            let z = lattice.element(&center.basis()[0], field);
            if z.mul(&z).expect("shape").is_zero() {
                ShadowLabel::J
            } else if has_subregular_semisimple_polynomial(&z) {
                ShadowLabel::L
            } else {
                ShadowLabel::Other("dim 4".into())
            }
        }
        k => ShadowLabel::Other(format!("dim {k}")),
    }
}

/// Label of a subgroup of `SL_3(F_p)` through its Lie span.
pub fn classify_subgroup_sl3(lattice: &LieLattice, s: &Subgroup) -> ShadowLabel {
    classify_span_sl3(lattice, &s.lie_span(lattice), s.p())
}

/// Label of the shadow of `a` in `sl_3(F_p)`.
pub fn classify_shadow_sl3(lattice: &LieLattice, a: &Mat) -> Result<ShadowLabel, LieError> {
    if a.is_zero() {
        return Ok(ShadowLabel::SL);
    }
    let dim = lie_shadow(lattice, a)?.dim();
    Ok(match dim {
        2 => ShadowLabel::R,
        4 if a.mul(a)?.is_zero() => ShadowLabel::J,
        4 if has_subregular_semisimple_polynomial(a) => ShadowLabel::L,
        k => ShadowLabel::Other(format!("dim {k}")),
    })
}

/// A group shadow together with its Lie data.
#[derive(Debug, Clone)]
pub struct ShadowRecord {
    pub element: Mat,
    pub group: Subgroup,
    pub lie_shadow: Subspace,
    pub d_s: usize,
    pub z_s: usize,
    pub label: Option<ShadowLabel>,
    pub strategy: ShadowStrategy,
}

impl ShadowRecord {
    pub fn new(lattice: &LieLattice, a: &Mat, strategy: ShadowStrategy) -> Result<Self, ShadowError> {
        let group = group_shadow(lattice, a, strategy)?;
        let lie = lie_shadow(lattice, a)?;
        let z_s = group.fixed_dual_dim(lattice, &lie);
        let label = (lattice.n() == 3 && a.ring().level() == 1).then(|| classify_shadow_sl3(lattice, a)).transpose()?;
        Ok(ShadowRecord { element: a.clone(), d_s: lie.dim(), lie_shadow: lie, group, z_s, label, strategy })
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    pub fn p(&self) -> u64 {
        self.group.p()
    }
}

/// One orbit of a shadow on the functionals of its Lie shadow.
#[derive(Debug, Clone)]
pub struct CoadjointOrbit {
    /// Values of the representative on the RREF basis of the Lie shadow.
    pub rep: Vec<u64>,
    pub size: u64,
    pub stabilizer: Subgroup,
    /// `dim ker` of the span commutator matrix at the representative.
    pub kernel_dim: usize,
}

#[derive(Debug, Clone)]
pub struct CoadjointCensus {
    pub group_order: u64,
    pub span_dim: usize,
    pub orbits: Vec<CoadjointOrbit>,
}

impl CoadjointCensus {
    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }
}

/// Orbits of `s` acting on `Hom(span, F_p)` by `(g.c)(y) = c(Ad_{g^-1} y)`.
pub fn coadjoint_orbits(
    lattice: &LieLattice,
    s: &Subgroup,
    span: &Subspace,
    bound: u128,
) -> Result<CoadjointCensus, ShadowError> {
    let p = s.p();
    let k = span.dim();
    let count = p.pow(k as u32);
    let work = count as u128 * s.order() as u128;
    if work > bound {
        return Err(ShadowError::Infeasible { what: "coadjoint orbit census".into(), size: work, bound });
    }
    let form = lattice.span_commutator_matrix(span.basis(), p)?;
    let codec = s.codec();
    // action matrices of g^-1 for every element, indexed like s.codes()
    let actions: Vec<Vec<Vec<u64>>> =
        s.codes().iter().map(|&g| s.conjugation_on(lattice, span, codec.inverse(g))).collect();
    let act = |m: &Vec<Vec<u64>>, c: &[u64]| -> Vec<u64> {
        (0..k).map(|j| (0..k).fold(0, |acc, i| (acc + m[i][j] * c[i]) % p)).collect()
    };
    let index = |c: &[u64]| c.iter().rev().fold(0u64, |acc, &v| acc * p + v);
    let mut seen = vec![false; count as usize];
    let mut orbits = Vec::new();
    for start in 0..count {
        if seen[start as usize] {
            continue;
        }
        let mut rest = start;
        let c: Vec<u64> = (0..k)
            .map(|_| {
                let v = rest % p;
                rest /= p;
                v
            })
            .collect();
        let mut size = 0u64;
        let mut stab = Vec::new();
        for (g, m) in s.codes().iter().zip(&actions) {
            let image = act(m, &c);
            if image == c {
                stab.push(*g);
            }
            let idx = index(&image) as usize;
            if !seen[idx] {
                seen[idx] = true;
                size += 1;
            }
        }
        let field = codec.ring();
        let kernel_dim = k - form.evaluate(&c, field).rank_mod_p();
        orbits.push(CoadjointOrbit { rep: c, size, stabilizer: Subgroup::from_codes(p, s.n(), stab), kernel_dim });
    }
    Ok(CoadjointCensus { group_order: s.order(), span_dim: k, orbits })
}

/// Functional tallies `Lambda(S, T)` for an `sl_3` shadow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaTable {
    pub source: ShadowLabel,
    /// Tallies labelled through the group stabilizer.
    pub by_group: BTreeMap<ShadowLabel, u64>,
    /// Tallies labelled through the kernel of the span commutator matrix.
    pub by_lie: BTreeMap<ShadowLabel, u64>,
    pub z: usize,
    pub total: u64,
}

/// `Lambda(S, T)` for every label `T` and `z_S`, computed twice: from the
/// stabilizer subgroup of each functional, and from the kernel dimension of
/// the span commutator matrix.
pub fn lambda_and_z(lattice: &LieLattice, record: &ShadowRecord, bound: u128) -> Result<LambdaTable, ShadowError> {
    let p = record.p();
    let census = coadjoint_orbits(lattice, &record.group, &record.lie_shadow, bound)?;
    let source = record.label.clone().unwrap_or_else(|| classify_subgroup_sl3(lattice, &record.group));
    let mut by_group = BTreeMap::new();
    let mut by_lie = BTreeMap::new();
    let mut fixed = 0u64;
    for orbit in &census.orbits {
        let label = if orbit.stabilizer == record.group {
            source.clone()
        } else {
            classify_subgroup_sl3(lattice, &orbit.stabilizer)
        };
        *by_group.entry(label).or_insert(0) += orbit.size;
        let lie_label = if orbit.kernel_dim == record.d_s {
            source.clone()
        } else {
            match orbit.kernel_dim {
                2 => ShadowLabel::R,
                k => ShadowLabel::Other(format!("dim {k}")),
            }
        };
        *by_lie.entry(lie_label).or_insert(0) += orbit.size;
        if orbit.size == 1 {
            fixed += 1;
        }
    }
    let total = p.pow(record.d_s as u32);
    let mut z = 0;
    while p.pow(z as u32) < fixed {
        z += 1;
    }
    assert_eq!(p.pow(z as u32), fixed, "fixed functionals form a subspace");
    Ok(LambdaTable { source, by_group, by_lie, z, total })
}

/// Signature tallies of functional stabilizers: `T -> #{c : stab(c) ~ T}`.
pub fn lambda_by_signature(lattice: &LieLattice, census: &CoadjointCensus) -> BTreeMap<Signature, u64> {
    let mut out = BTreeMap::new();
    for orbit in &census.orbits {
        *out.entry(orbit.stabilizer.signature(lattice)).or_insert(0) += orbit.size;
    }
    out
}

/// The commutator matrix of the Lie shadow of `a` (bracket-closed span).
pub fn shadow_commutator_matrix(lattice: &LieLattice, a: &Mat) -> Result<FormMatrix, LieError> {
    let span = lie_shadow(lattice, a)?;
    lattice.span_commutator_matrix(span.basis(), a.ring().p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::sl_order;

    fn ring(p: u64, r: u32) -> LocalRing {
        LocalRing::new(p, r).unwrap()
    }

    fn sl3_elem(p: u64, rows: &[Vec<i64>]) -> Mat {
        Mat::from_rows(ring(p, 1), rows)
    }

    #[test]
    fn lie_shadow_examples() {
        let sl3 = LieLattice::sl(3);
        let zero = Mat::zeros(ring(5, 1), 3, 3);
        assert_eq!(lie_shadow(&sl3, &zero).unwrap().dim(), 8);
        let e12 = sl3_elem(5, &[vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]]);
        let s = lie_shadow(&sl3, &e12).unwrap();
        let expected: Vec<Vec<u64>> = [
            vec![vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]],
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]],
            vec![vec![0, 0, 1], vec![0, 0, 0], vec![0, 0, 0]],
            vec![vec![0, 0, 0], vec![0, 0, 0], vec![0, 1, 0]],
        ]
        .iter()
        .map(|m| sl3.coordinates(&sl3_elem(5, m)).unwrap())
        .collect();
        assert_eq!(s, Subspace::span(&expected, 8, 5));
        let l = sl3_elem(5, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]]);
        assert_eq!(lie_shadow(&sl3, &l).unwrap().dim(), 4);
        for a in [&zero, &e12, &l] {
            assert_eq!(lie_shadow_dim_from_profile(&sl3, a).unwrap(), lie_shadow(&sl3, a).unwrap().dim());
        }
    }

    #[test]
    fn group_shadow_examples() {
        let sl3 = LieLattice::sl(3);
        let zero = Mat::zeros(ring(5, 1), 3, 3);
        let full = group_shadow(&sl3, &zero, ShadowStrategy::Centralizer).unwrap();
        assert_eq!(full.order(), 372_000);
        let l = sl3_elem(5, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]]);
        let sl = group_shadow(&sl3, &l, ShadowStrategy::Centralizer).unwrap();
        assert_eq!(sl.order(), 480);
        let oracle = group_shadow(&sl3, &l, ShadowStrategy::Oracle { bound: 10_000_000 }).unwrap();
        assert_eq!(oracle, sl);
        let sl2 = LieLattice::sl(2);
        let e = Mat::unit(ring(5, 1), 2, 0, 1);
        assert_eq!(group_shadow(&sl2, &e, ShadowStrategy::Oracle { bound: 1000 }).unwrap().order(), 10);
        assert!(matches!(
            group_shadow(&sl3, &Mat::zeros(ring(5, 2), 3, 3), ShadowStrategy::Oracle { bound: 10_000_000 }),
            Err(ShadowError::Group(GroupError::BoundExceeded { .. }))
        ));
    }

    #[test]
    fn strategies_agree_on_sl2_level_two() {
        let sl2 = LieLattice::sl(2);
        for p in [3u64, 5] {
            let z = ring(p, 2);
            let m = z.modulus();
            for idx in (0..m.pow(3)).step_by(7) {
                let a = sl2.element(&[idx % m, (idx / m) % m, idx / (m * m)], z);
                let oracle = group_shadow(&sl2, &a, ShadowStrategy::Oracle { bound: 100_000 }).unwrap();
                let centr = group_shadow(&sl2, &a, ShadowStrategy::Centralizer).unwrap();
                let rec = group_shadow(&sl2, &a, ShadowStrategy::Recursive).unwrap();
                assert_eq!(oracle, centr, "{a:?}");
                assert_eq!(oracle, rec, "{a:?}");
                let span = oracle.lie_span(&sl2);
                let lie = lie_shadow(&sl2, &a).unwrap();
                if p > 3 {
                    assert_eq!(span, lie);
                } else {
                    assert!(span.is_subspace_of(&lie));
                }
                assert!(sl_order(2, p, 1).is_multiple_of(oracle.order() as u128));
            }
        }
    }

    #[test]
    fn additive_span_can_drop_at_three() {
        // the split torus of SL_2(F_3) is {I, -I}, whose span misses sl_2
        let sl2 = LieLattice::sl(2);
        let h = Mat::from_rows(ring(3, 1), &[vec![1, 0], vec![0, -1]]);
        let s = group_shadow(&sl2, &h, ShadowStrategy::Oracle { bound: 1000 }).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.lie_span(&sl2).dim(), 0);
        assert_eq!(lie_shadow(&sl2, &h).unwrap().dim(), 1);
    }

    #[test]
    fn classification_examples() {
        let sl3 = LieLattice::sl(3);
        let l = sl3_elem(5, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]]);
        let e12 = sl3_elem(5, &[vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]]);
        let reg = sl3_elem(7, &[vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, -3]]);
        assert_eq!(classify_shadow_sl3(&sl3, &l).unwrap(), ShadowLabel::L);
        assert_eq!(classify_shadow_sl3(&sl3, &e12).unwrap(), ShadowLabel::J);
        assert_eq!(classify_shadow_sl3(&sl3, &reg).unwrap(), ShadowLabel::R);
        assert_eq!(classify_shadow_sl3(&sl3, &Mat::zeros(ring(5, 1), 3, 3)).unwrap(), ShadowLabel::SL);
        for a in [&l, &e12, &reg] {
            let s = group_shadow(&sl3, a, ShadowStrategy::Centralizer).unwrap();
            assert_eq!(classify_subgroup_sl3(&sl3, &s), classify_shadow_sl3(&sl3, a).unwrap());
        }
    }

    #[test]
    fn shadow_preserving_lifts() {
        let sl2 = LieLattice::sl(2);
        let f = ring(5, 1);
        let oracle = ShadowStrategy::Oracle { bound: 100_000 };
        let zero = Mat::zeros(f, 2, 2);
        assert_eq!(shadow_preserving_lift(&sl2, &zero, oracle).unwrap(), Some(Mat::zeros(ring(5, 2), 2, 2)));
        let e = Mat::unit(f, 2, 0, 1);
        assert_eq!(shadow_preserving_lift(&sl2, &e, oracle).unwrap(), Some(Mat::unit(ring(5, 2), 2, 0, 1)));
        for idx in 0..125u64 {
            let a = sl2.element(&[idx % 5, (idx / 5) % 5, idx / 25], f);
            assert!(shadow_preserving_lift(&sl2, &a, oracle).unwrap().is_some());
        }
    }

    #[test]
    fn coadjoint_examples() {
        let sl2 = LieLattice::sl(2);
        let f = ring(5, 1);
        // trivial group on a 2-dim span
        let span = Subspace::span(&[vec![1, 0, 0], vec![0, 1, 0]], 3, 5);
        let census = coadjoint_orbits(&sl2, &Subgroup::trivial(5, 2), &span, 1 << 20).unwrap();
        assert_eq!(census.orbit_count(), 25);
        // regular element: abelian shadow, trivial action on the 1-dim dual
        let h = Mat::from_rows(f, &[vec![1, 0], vec![0, -1]]);
        let rec = ShadowRecord::new(&sl2, &h, ShadowStrategy::Centralizer).unwrap();
        let census = coadjoint_orbits(&sl2, &rec.group, &rec.lie_shadow, 1 << 20).unwrap();
        assert_eq!(census.orbit_count(), 5);
        assert!(census.orbits.iter().all(|o| o.size == 1));
        // zero: the census is the adjoint census of SL_2(F_5) on sl_2(F_5)
        let zero = ShadowRecord::new(&sl2, &Mat::zeros(f, 2, 2), ShadowStrategy::Centralizer).unwrap();
        let census = coadjoint_orbits(&sl2, &zero.group, &zero.lie_shadow, 1 << 20).unwrap();
        for o in &census.orbits {
            assert_eq!(o.size * o.stabilizer.order(), 120);
        }
        assert_eq!(census.orbits.iter().map(|o| o.size).sum::<u64>(), 125);
    }

    #[test]
    fn lambda_tables_sl3() {
        let sl3 = LieLattice::sl(3);
        let q = 5u64;
        let e12 = sl3_elem(q, &[vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]]);
        let l = sl3_elem(q, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]]);
        for (a, label) in [(e12, ShadowLabel::J), (l, ShadowLabel::L)] {
            let rec = ShadowRecord::new(&sl3, &a, ShadowStrategy::Centralizer).unwrap();
            let t = lambda_and_z(&sl3, &rec, 1 << 24).unwrap();
            assert_eq!(t.source, label);
            assert_eq!(t.z, 1);
            assert_eq!(t.by_group, t.by_lie);
            assert_eq!(t.by_group.get(&label), Some(&q));
            assert_eq!(t.by_group.get(&ShadowLabel::R), Some(&(q * (q * q * q - 1))));
            assert_eq!(t.by_group.values().sum::<u64>(), t.total);
        }
    }
}
