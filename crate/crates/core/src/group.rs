//! `SL_n(Z/p^r)`: membership, elementary generators, the adjoint action and
//! the truncated exponential series.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::LieLattice;
use crate::orbits::CheckTally;
use crate::matrix::{Mat, MatrixError};
use crate::ring::{factorial_valuation, LocalRing, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("determinant is {det}, not 1")]
    NotSpecial { det: u64 },
    #[error("entry ({row}, {col}) is a unit; the exponential needs every entry in pZ/p^r")]
    UnitEntry { row: usize, col: usize },
    #[error("|SL_{n}(Z/{p}^{r})| = {order} exceeds the enumeration bound {bound}")]
    BoundExceeded { n: usize, p: u64, r: u32, order: u128, bound: u128 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

pub fn sl_membership(m: &Mat) -> bool {
    m.is_square() && m.det().is_ok_and(|d| d == 1 % m.ring().modulus())
}

/// An element of `SL_n(Z/p^r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Mat", into = "Mat")]
pub struct GroupElem {
    matrix: Mat,
}

impl TryFrom<Mat> for GroupElem {
    type Error = GroupError;
    fn try_from(matrix: Mat) -> Result<Self, GroupError> {
        GroupElem::new(matrix)
    }
}

impl From<GroupElem> for Mat {
    fn from(g: GroupElem) -> Mat {
        g.matrix
    }
}

impl GroupElem {
    pub fn new(matrix: Mat) -> Result<Self, GroupError> {
        let det = matrix.det()?;
        if det != 1 % matrix.ring().modulus() {
            return Err(GroupError::NotSpecial { det });
        }
        Ok(GroupElem { matrix })
    }

    pub fn identity(ring: LocalRing, n: usize) -> Self {
        GroupElem { matrix: Mat::identity(ring, n) }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn mul(&self, other: &GroupElem) -> Result<GroupElem, GroupError> {
        Ok(GroupElem { matrix: self.matrix.mul(&other.matrix)? })
    }

    pub fn inverse(&self) -> GroupElem {
        GroupElem { matrix: self.matrix.inverse().expect("determinant one") }
    }
}

/// Elementary matrices `I + t e_ij` with `t` running over `1, p, ..., p^(r-1)`.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    ring: LocalRing,
    n: usize,
    /// `(i, j, t)` triples.
    moves: Vec<(usize, usize, u64)>,
}

impl GeneratorSet {
    pub fn elementary(ring: LocalRing, n: usize) -> Self {
        let mut moves = Vec::new();
        for k in 0..ring.level() {
            let t = ring.p_power(k);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        moves.push((i, j, t));
                    }
                }
            }
        }
        GeneratorSet { ring, n, moves }
    }

    pub fn moves(&self) -> &[(usize, usize, u64)] {
        &self.moves
    }

    pub fn elements(&self) -> Vec<GroupElem> {
        self.moves
            .iter()
            .map(|&(i, j, t)| {
                let mut m = Mat::identity(self.ring, self.n);
                m.set(i, j, t);
                GroupElem { matrix: m }
            })
            .collect()
    }
}

/// `Ad_g(x) = g x g^-1`.
pub fn adjoint_action(g: &GroupElem, x: &Mat) -> Result<Mat, GroupError> {
    Ok(g.matrix.mul(x)?.mul(&g.matrix.inverse()?)?)
}

/// Number of series terms and extra precision for the exponential at level
/// `r`: returns `(i_max, E)` where terms `i >= i_max` vanish modulo `p^r`
/// and `E = v_p((i_max - 1)!)`.
pub fn exp_truncation(p: u64, r: u32) -> (u64, u32) {
    // j - v_p(j!) is nondecreasing in j, so the first j reaching r works
    let mut i = 1u64;
    while (i as i64) - (factorial_valuation(p, i) as i64) < r as i64 {
        i += 1;
    }
    (i, factorial_valuation(p, i.saturating_sub(1)))
}

/// `sum_i m^i / i!` for a square matrix with every entry in `p Z/p^r`.
///
/// Powers are taken at precision `r + E` so that each division by `i!` is
/// exact before reducing back to level `r`.
pub fn exp_series(m: &Mat) -> Result<Mat, GroupError> {
    let ring = m.ring();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if ring.is_unit(m.get(i, j)) {
                return Err(GroupError::UnitEntry { row: i, col: j });
            }
        }
    }
    let (i_max, extra) = exp_truncation(ring.p(), ring.level());
    let lifted = ring.lifted(extra)?;
    let x = m.lift(lifted);
    let n = m.rows();
    let mut power = Mat::identity(lifted, n);
    let mut sum = Mat::identity(ring, n);
    for i in 1..i_max {
        power = power.mul(&x)?;
        let (v, unit) = lifted.factorial_split(i);
        let unit_inv = ring.inverse(unit % ring.modulus()).expect("unit");
        let mut term = Mat::zeros(ring, n, n);
        for a in 0..n {
            for b in 0..n {
                let q = lifted.div_p_power(power.get(a, b), v).expect("p^i divides x^i");
                term.set(a, b, ring.mul(q % ring.modulus(), unit_inv));
            }
        }
        sum = sum.add(&term)?;
    }
    Ok(sum)
}

pub fn exponential(x: &Mat) -> Result<Mat, GroupError> {
    exp_series(x)
}

/// Whether `exp(x)` has determinant one.
pub fn exp_lie_criterion(x: &Mat) -> Result<bool, GroupError> {
    Ok(sl_membership(&exponential(x)?))
}

/// Matrix of `Ad_g` on the lattice: column `j` holds the coordinates of
/// `g b_j g^-1`.
pub fn ad_of_group(lattice: &LieLattice, g: &Mat) -> Result<Mat, GroupError> {
    let ring = g.ring();
    let d = lattice.d();
    let ginv = g.inverse()?;
    let mut out = Mat::zeros(ring, d, d);
    for j in 0..d {
        let b = lattice.basis_matrix(j, ring);
        let c = lattice.coordinates(&g.mul(&b)?.mul(&ginv)?).expect("conjugation preserves the lattice");
        for (i, v) in c.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// `|SL_n(Z/p^r)| = p^((r-1)(n^2-1)) * p^(n(n-1)/2) * prod_{k=2..n} (p^k - 1)`.
pub fn sl_order(n: usize, p: u64, r: u32) -> u128 {
    let p = p as u128;
    let mut order = p.pow((n * (n - 1) / 2) as u32);
    for k in 2..=n as u32 {
        order *= p.pow(k) - 1;
    }
    order * p.pow((r - 1) * (n * n - 1) as u32)
}

/// `|GL_n(F_p)|`.
pub fn gl_order_field(n: usize, p: u64) -> u128 {
    let p = p as u128;
    (0..n as u32).map(|k| p.pow(n as u32) - p.pow(k)).product()
}

/// Packs an `n x n` matrix over `Z/p^r` into one integer (base `p^r` digits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatCodec {
    pub ring: LocalRing,
    pub n: usize,
}

impl MatCodec {
    pub fn new(ring: LocalRing, n: usize) -> Option<Self> {
        let bits = 64 - ring.modulus().leading_zeros();
        (bits as usize * n * n <= 64).then_some(MatCodec { ring, n })
    }

    pub fn encode_entries(&self, entries: &[u64]) -> u64 {
        let m = self.ring.modulus();
        entries.iter().rev().fold(0u64, |acc, &e| acc * m + e)
    }

    pub fn encode(&self, mat: &Mat) -> u64 {
        self.encode_entries(mat.data())
    }

    pub fn decode_entries(&self, mut code: u64, out: &mut [u64]) {
        let m = self.ring.modulus();
        for slot in out.iter_mut() {
            *slot = code % m;
            code /= m;
        }
    }

    pub fn decode(&self, code: u64) -> Mat {
        let mut data = vec![0u64; self.n * self.n];
        self.decode_entries(code, &mut data);
        Mat::from_residues(self.ring, self.n, self.n, data)
    }
}

type GroupCache = Mutex<HashMap<(usize, u64, u32), Arc<Vec<u64>>>>;

fn group_cache() -> &'static GroupCache {
    static CACHE: OnceLock<GroupCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All elements of `SL_n(Z/p^r)` as sorted codes, by closure under the
/// elementary generators. Results are cached per `(n, p, r)`.
pub fn enumerate_sl(n: usize, ring: LocalRing, bound: u128) -> Result<(MatCodec, Arc<Vec<u64>>), GroupError> {
    let order = sl_order(n, ring.p(), ring.level());
    let too_big = GroupError::BoundExceeded { n, p: ring.p(), r: ring.level(), order, bound };
    if order > bound {
        return Err(too_big);
    }
    let codec = MatCodec::new(ring, n).ok_or(too_big)?;
    let key = (n, ring.p(), ring.level());
    if let Some(hit) = group_cache().lock().expect("cache lock").get(&key) {
        return Ok((codec, hit.clone()));
    }
    let gens = GeneratorSet::elementary(ring, n);
    let id = codec.encode(&Mat::identity(ring, n));
    let mut seen: HashSet<u64> = HashSet::with_capacity(order as usize);
    seen.insert(id);
    let mut frontier = vec![id];
    let mut buf = vec![0u64; n * n];
    while let Some(code) = frontier.pop() {
        for &(i, j, t) in gens.moves() {
            codec.decode_entries(code, &mut buf);
            // left multiplication by I + t e_ij: row_i += t row_j
            for k in 0..n {
                buf[i * n + k] = ring.add(buf[i * n + k], ring.mul(t, buf[j * n + k]));
            }
            let next = codec.encode_entries(&buf);
            if seen.insert(next) {
                frontier.push(next);
            }
        }
    }
    let mut all: Vec<u64> = seen.into_iter().collect();
    all.sort_unstable();
    assert_eq!(all.len() as u128, order, "elementary matrices generate SL_n");
    let all = Arc::new(all);
    group_cache().lock().expect("cache lock").insert(key, all.clone());
    Ok((codec, all))
}

/// Domain of the exponential suite: `p gl_n(Z/p^r)`, or its traceless part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpDomain {
    pub n: usize,
    pub p: u64,
    pub r: u32,
    pub traceless: bool,
}

impl ExpDomain {
    /// Number of elements: `p^((r-1) n^2)`, or `p^((r-1)(n^2-1))` if traceless.
    pub fn size(&self) -> u128 {
        let dim = if self.traceless { self.n * self.n - 1 } else { self.n * self.n };
        (self.p as u128).pow((self.r - 1) * dim as u32)
    }

    fn element(&self, ring: LocalRing, mut index: u128) -> Mat {
        let base = (self.p as u128).pow(self.r - 1);
        let n = self.n;
        let mut m = Mat::zeros(ring, n, n);
        let mut trace = 0u64;
        for k in 0..n * n {
            if self.traceless && k == n * n - 1 {
                break;
            }
            let v = (index % base) as u64 * self.p;
            index /= base;
            m.set(k / n, k % n, v);
            if k % (n + 1) == 0 {
                trace = ring.add(trace, v);
            }
        }
        if self.traceless {
            m.set(n - 1, n - 1, ring.neg(trace));
        }
        m
    }
}

impl std::fmt::Display for ExpDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let alg = if self.traceless { "sl" } else { "gl" };
        write!(f, "{}*{}_{}(Z/{}^{})", self.p, alg, self.n, self.p, self.r)
    }
}

/// Results of the exponential identities over one domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpSuiteReport {
    pub domain: String,
    pub elements: u64,
    pub exhaustive: bool,
    /// `exp(x) exp(-x) = 1`.
    pub inverse: CheckTally,
    /// `exp((a + b) x) = exp(a x) exp(b x)` for `a, b` in `0..=p`.
    pub additivity: CheckTally,
    /// `Ad_exp(x) = exp(ad_x)` on `gl_n`.
    pub adjoint: CheckTally,
    /// `x` traceless iff `det exp(x) = 1`.
    pub lie_criterion: CheckTally,
}

impl ExpSuiteReport {
    pub fn checks(&self) -> Vec<(&'static str, &CheckTally)> {
        vec![
            ("exp-inverse", &self.inverse),
            ("exp-additive", &self.additivity),
            ("exp-adjoint", &self.adjoint),
            ("exp-lie-criterion", &self.lie_criterion),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed())
    }
}

/// Matrix of `y -> g y g^-1` on `gl_n` in the basis of matrix units.
fn conjugation_on_gl(g: &Mat) -> Result<Mat, GroupError> {
    let ring = g.ring();
    let n = g.rows();
    let ginv = g.inverse()?;
    let mut out = Mat::zeros(ring, n * n, n * n);
    for j in 0..n * n {
        let mut e = Mat::zeros(ring, n, n);
        e.set(j / n, j % n, 1);
        let c = g.mul(&e)?.mul(&ginv)?;
        for i in 0..n * n {
            out.set(i, j, c.get(i / n, i % n));
        }
    }
    Ok(out)
}

/// Matrix of `ad_x` on `gl_n` in the basis of matrix units.
fn ad_on_gl(x: &Mat) -> Result<Mat, GroupError> {
    let ring = x.ring();
    let n = x.rows();
    let mut out = Mat::zeros(ring, n * n, n * n);
    for j in 0..n * n {
        let mut e = Mat::zeros(ring, n, n);
        e.set(j / n, j % n, 1);
        let c = x.mul(&e)?.sub(&e.mul(x)?)?;
        for i in 0..n * n {
            out.set(i, j, c.get(i / n, i % n));
        }
    }
    Ok(out)
}

#[derive(Default)]
struct ExpOutcome {
    inverse: bool,
    additivity: Vec<(u64, u64, bool)>,
    adjoint: bool,
    lie_criterion: bool,
}

fn exp_checks(x: &Mat, p: u64) -> Result<ExpOutcome, GroupError> {
    let ring = x.ring();
    let n = x.rows();
    let ex = exponential(x)?;
    let inverse = ex.mul(&exponential(&x.neg())?)? == Mat::identity(ring, n);
    let mut additivity = Vec::new();
    for a in 0..=p {
        for b in 0..=p {
            let lhs = exponential(&x.scale(a + b))?;
            let rhs = exponential(&x.scale(a))?.mul(&exponential(&x.scale(b))?)?;
            additivity.push((a, b, lhs == rhs));
        }
    }
    let adjoint = conjugation_on_gl(&ex)? == exp_series(&ad_on_gl(x)?)?;
    let lie_criterion = (x.trace() == 0) == sl_membership(&ex);
    Ok(ExpOutcome { inverse, additivity, adjoint, lie_criterion })
}

/// Checks the exponential identities on every element of `domain`, or on
/// `samples` seeded random elements when given.
pub fn verify_exp_suite(
    domain: ExpDomain,
    samples: Option<(u64, u64)>,
    bound: u128,
) -> Result<ExpSuiteReport, GroupError> {
    use rand::{Rng, SeedableRng};
    use rayon::prelude::*;

    let ring = LocalRing::new(domain.p, domain.r)?;
    let size = domain.size();
    let indices: Vec<u128> = match samples {
        Some((count, seed)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| rng.gen_range(0..size)).collect()
        }
        None => {
            if size > bound {
                return Err(GroupError::BoundExceeded {
                    n: domain.n,
                    p: domain.p,
                    r: domain.r,
                    order: size,
                    bound,
                });
            }
            (0..size).collect()
        }
    };
    let outcomes: Vec<(u128, ExpOutcome)> = indices
        .par_iter()
        .map(|&k| exp_checks(&domain.element(ring, k), domain.p).map(|o| (k, o)))
        .collect::<Result<_, _>>()?;
    let mut report = ExpSuiteReport {
        domain: domain.to_string(),
        elements: outcomes.len() as u64,
        exhaustive: samples.is_none(),
        ..Default::default()
    };
    for (k, o) in outcomes {
        let x = || format!("{:?}", domain.element(ring, k));
        report.inverse.record(o.inverse, x);
        for (a, b, ok) in o.additivity {
            report.additivity.record(ok, || format!("a = {a}, b = {b}, x = {}", x()));
        }
        report.adjoint.record(o.adjoint, x);
        report.lie_criterion.record(o.lie_criterion, x);
    }
    Ok(report)
}

/// The full suite: `p gl_2(Z/p^r)` and `p sl_2(Z/p^(r+1))` exhaustively, and
/// `samples` seeded elements of `p gl_3(Z/p^r)`.
pub fn exp_suite_standard(p: u64, r: u32, samples: u64, seed: u64, bound: u128) -> Result<Vec<ExpSuiteReport>, GroupError> {
    Ok(vec![
        verify_exp_suite(ExpDomain { n: 2, p, r, traceless: false }, None, bound)?,
        verify_exp_suite(ExpDomain { n: 2, p, r: r + 1, traceless: true }, None, bound)?,
        verify_exp_suite(ExpDomain { n: 3, p, r, traceless: false }, Some((samples, seed)), bound)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, r: u32) -> LocalRing {
        LocalRing::new(p, r).unwrap()
    }

    #[test]
    fn membership_examples() {
        let z25 = ring(5, 2);
        assert!(sl_membership(&Mat::from_rows(z25, &[vec![1, 2], vec![0, 1]])));
        let f5 = ring(5, 1);
        assert!(sl_membership(&Mat::from_rows(f5, &[vec![2, 0], vec![0, 3]])));
        assert!(!sl_membership(&Mat::from_rows(f5, &[vec![2, 0], vec![0, 2]])));
        assert!(sl_membership(&Mat::from_rows(f5, &[vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 1]])));
        assert!(GroupElem::new(Mat::identity(z25, 3).scale(2)).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let f5 = ring(5, 1);
        let h = Mat::from_rows(f5, &[vec![1, 0], vec![0, -1]]);
        assert_eq!(adjoint_action(&GroupElem::identity(f5, 2), &h).unwrap(), h);
        let g = GroupElem::new(Mat::from_rows(f5, &[vec![1, 1], vec![0, 1]])).unwrap();
        let expect = h.sub(&Mat::unit(f5, 2, 0, 1).scale(2)).unwrap();
        assert_eq!(adjoint_action(&g, &h).unwrap(), expect);
    }

    #[test]
    fn adjoint_is_a_homomorphism() {
        let z25 = ring(5, 2);
        let sl3 = LieLattice::sl(3);
        let gens = GeneratorSet::elementary(z25, 3).elements();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let word = |rng: &mut ChaCha8Rng| {
            (0..12).fold(GroupElem::identity(z25, 3), |acc, _| acc.mul(&gens[rng.gen_range(0..gens.len())]).unwrap())
        };
        for _ in 0..50 {
            let g = word(&mut rng);
            let h = word(&mut rng);
            let c: Vec<u64> = (0..8).map(|_| rng.gen_range(0..25)).collect();
            let x = sl3.element(&c, z25);
            let lhs = adjoint_action(&g.mul(&h).unwrap(), &x).unwrap();
            let rhs = adjoint_action(&g, &adjoint_action(&h, &x).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            assert!(sl3.contains(&lhs));
        }
    }

    #[test]
    fn truncation_bounds() {
        assert_eq!(exp_truncation(5, 2), (2, 0));
        assert_eq!(exp_truncation(5, 3), (3, 0));
        assert_eq!(exp_truncation(3, 3), (4, 1));
        // brute-force oracle for the truncation index
        for p in [3u64, 5, 7] {
            for r in 1..6 {
                let (i_max, _) = exp_truncation(p, r);
                for j in i_max..60 {
                    assert!(j as i64 - factorial_valuation(p, j) as i64 >= r as i64);
                }
                if i_max > 1 {
                    let j = i_max - 1;
                    assert!((j as i64 - factorial_valuation(p, j) as i64) < r as i64);
                }
            }
        }
    }

    #[test]
    fn exponential_examples() {
        let z25 = ring(5, 2);
        assert_eq!(exponential(&Mat::zeros(z25, 2, 2)).unwrap(), Mat::identity(z25, 2));
        let x = Mat::unit(z25, 2, 0, 1).scale(5);
        assert_eq!(exponential(&x).unwrap(), Mat::identity(z25, 2).add(&x).unwrap());
        let h = Mat::from_rows(z25, &[vec![5, 0], vec![0, -5]]);
        assert_eq!(exponential(&h).unwrap(), Mat::from_rows(z25, &[vec![6, 0], vec![0, 21]]));
        let e11 = Mat::unit(z25, 2, 0, 0).scale(5);
        assert_eq!(exponential(&e11).unwrap(), Mat::from_rows(z25, &[vec![6, 0], vec![0, 1]]));
        assert!(!exp_lie_criterion(&e11).unwrap());
        assert!(exp_lie_criterion(&x).unwrap());
        assert!(matches!(exponential(&Mat::unit(z25, 2, 0, 1)), Err(GroupError::UnitEntry { row: 0, col: 1 })));
    }

    /// Exponential over the rationals on an integer lift, as an oracle.
    fn rational_exp_oracle(x: &Mat) -> Mat {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::{One, ToPrimitive, Zero};
        let n = x.rows();
        let ring = x.ring();
        let xs: Vec<Vec<BigRational>> = x
            .signed_entries()
            .into_iter()
            .map(|r| r.into_iter().map(|v| BigRational::from_integer(BigInt::from(v))).collect())
            .collect();
        let mut power: Vec<Vec<BigRational>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect();
        let mut sum = power.clone();
        let mut fact = BigRational::one();
        for i in 1..40u32 {
            let mut next = vec![vec![BigRational::zero(); n]; n];
            for a in 0..n {
                for b in 0..n {
                    for k in 0..n {
                        next[a][b] += &power[a][k] * &xs[k][b];
                    }
                }
            }
            power = next;
            fact *= BigRational::from_integer(BigInt::from(i));
            for a in 0..n {
                for b in 0..n {
                    sum[a][b] += &power[a][b] / &fact;
                }
            }
        }
        let m = BigInt::from(ring.modulus());
        Mat::from_fn(ring, n, n, |a, b| {
            let v = &sum[a][b];
            let denom_inv = ring.inverse((v.denom() % &m).to_u64().unwrap()).expect("p-integral");
            let num = ((v.numer() % &m) + &m) % &m;
            ring.mul(num.to_u64().unwrap(), denom_inv) as i128
        })
    }

    #[test]
    fn exponential_matches_rational_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (p, r) in [(3u64, 2u32), (3, 3), (5, 2), (5, 3), (7, 2)] {
            let ring = ring(p, r);
            for _ in 0..30 {
                let x = Mat::from_fn(ring, 3, 3, |_, _| (p * rng.gen_range(0..ring.modulus() / p)) as i128);
                assert_eq!(exponential(&x).unwrap(), rational_exp_oracle(&x), "p={p} r={r}");
            }
        }
    }

    #[test]
    fn orders_and_enumeration() {
        assert_eq!(sl_order(2, 5, 1), 120);
        assert_eq!(sl_order(3, 5, 1), 372_000);
        assert_eq!(sl_order(2, 5, 2), 15_000);
        assert_eq!(gl_order_field(2, 5), 480);
        let (codec, all) = enumerate_sl(2, ring(3, 2), 1_000_000).unwrap();
        assert_eq!(all.len(), 648);
        assert!(all.iter().all(|&c| sl_membership(&codec.decode(c))));
        assert!(matches!(enumerate_sl(3, ring(5, 2), 10_000_000), Err(GroupError::BoundExceeded { .. })));
    }

    #[test]
    fn group_elements_serialize_with_ring() {
        let g = GroupElem::new(Mat::from_rows(ring(5, 2), &[vec![1, 5], vec![0, 1]])).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"ring":{"p":5,"r":2},"entries":[[1,5],[0,1]]}"#);
        assert!(serde_json::from_str::<GroupElem>(r#"{"ring":{"p":5,"r":1},"entries":[[2,0],[0,2]]}"#).is_err());
    }

    #[test]
    fn exp_suite_small() {
        let d = ExpDomain { n: 2, p: 3, r: 2, traceless: false };
        assert_eq!(d.size(), 81);
        let rep = verify_exp_suite(d, None, 1 << 20).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.elements, 81);
        assert_eq!(rep.additivity.checked, 81 * 16);
        let t = ExpDomain { n: 2, p: 3, r: 3, traceless: true };
        let ring = LocalRing::new(3, 3).unwrap();
        assert!((0..t.size()).all(|k| t.element(ring, k).trace() == 0));
        assert!(verify_exp_suite(t, None, 1 << 20).unwrap().passed());
        let s = verify_exp_suite(ExpDomain { n: 3, p: 3, r: 2, traceless: false }, Some((50, 1)), 0).unwrap();
        assert!(s.passed() && !s.exhaustive);
        assert!(matches!(
            verify_exp_suite(ExpDomain { n: 3, p: 5, r: 3, traceless: false }, None, 1000),
            Err(GroupError::BoundExceeded { .. })
        ));
    }
}
