//! Poincaré series of commutator matrices: direct enumeration with
//! certificates, the shadow-sequence formula, the `sl_3` data table and the
//! resulting zeta functions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::fp;
use crate::lie::{LieError, LieLattice};
use crate::matrix::{Mat, MatrixError};
use crate::orbits::{sl3_level_one_census, OrbitError};
use crate::poly::{q_power, Poly, QPoly, RationalFunc};
use crate::report::{json_cell, json_int, json_rational, json_rational_func, Provenance};
use crate::ring::{is_prime, LocalRing, RingError};
use crate::shadows::{lambda_and_z, ShadowError, ShadowLabel, ShadowRecord, ShadowStrategy};
use crate::subgroup::Subgroup;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZetaError {
    #[error("q = {q} must be an odd prime")]
    InvalidPrime { q: u64 },
    #[error("q = {q} is divisible by 3, excluded for sl_3")]
    DivisibleByThree { q: u64 },
    #[error("{what} needs {size} evaluations, above the bound {bound}")]
    Infeasible { what: String, size: u128, bound: u128 },
    #[error("missing transition {from} -> {to}")]
    MissingTransition { from: String, to: String },
    #[error("{cell}: formula gives {formula}, enumeration gives {oracle}")]
    Mismatch { cell: String, formula: String, oracle: String },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

/// Rejects `q` outside the odd primes (and multiples of 3 for `sl_3`).
pub fn validate_q(q: u64, n: usize) -> Result<(), ZetaError> {
    if q < 3 || !is_prime(q) {
        return Err(ZetaError::InvalidPrime { q });
    }
    if n == 3 && q == 3 {
        return Err(ZetaError::DivisibleByThree { q });
    }
    Ok(())
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// Histogram of `rank R(w)` over nonzero `w` in `F_q^d`, with the rank-4
/// classes of `sl_3` split into semisimple and nilpotent elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCensus {
    pub q: u64,
    pub n: usize,
    pub histogram: BTreeMap<usize, u64>,
    pub subregular_semisimple: u64,
    pub subregular_nilpotent: u64,
}

impl RankCensus {
    pub fn count(&self, rank: usize) -> u64 {
        self.histogram.get(&rank).copied().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.histogram.iter().filter(|(_, &c)| c > 0).map(|(&r, _)| r).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algebra,q,rank,count\n");
        for (rank, count) in &self.histogram {
            out.push_str(&format!("sl{},{},{},{}\n", self.n, self.q, rank, count));
        }
        out
    }
}

#[derive(Default, Clone)]
struct CensusAcc {
    ranks: Vec<u64>,
    semisimple: u64,
    nilpotent: u64,
}

impl CensusAcc {
    fn new(d: usize) -> Self {
        CensusAcc { ranks: vec![0; d + 1], semisimple: 0, nilpotent: 0 }
    }

    fn merge(mut self, other: CensusAcc) -> CensusAcc {
        for (a, b) in self.ranks.iter_mut().zip(other.ranks) {
            *a += b;
        }
        self.semisimple += other.semisimple;
        self.nilpotent += other.nilpotent;
        self
    }
}

/// Level-1 rank census of the commutator matrix.
pub fn rank_census(lattice: &LieLattice, q: u64, bound: u128) -> Result<RankCensus, ZetaError> {
    validate_q(q, lattice.n())?;
    let d = lattice.d();
    let total = (q as u128).pow(d as u32);
    if total > bound {
        return Err(ZetaError::Infeasible { what: "rank census".into(), size: total, bound });
    }
    let field = LocalRing::new(q, 1)?;
    let qi = q as i64;
    let mut terms: Vec<(usize, usize, usize, u32)> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let c = lattice.structure(i, j, k).rem_euclid(qi) as u32;
                if c != 0 {
                    terms.push((i, j, k, c));
                }
            }
        }
    }
    let q32 = q as u32;
    let split = lattice.n() == 3;
    const CHUNK: u64 = 1 << 14;
    let total = total as u64;
    let chunks = total.div_ceil(CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = CensusAcc::new(d);
            let mut w = vec![0u64; d];
            let mut buf = vec![0u32; d * d];
            for idx in (chunk * CHUNK).max(1)..((chunk + 1) * CHUNK).min(total) {
                let mut rest = idx;
                for v in w.iter_mut() {
                    *v = rest % q;
                    rest /= q;
                }
                buf.iter_mut().for_each(|b| *b = 0);
                for &(i, j, k, c) in &terms {
                    buf[i * d + j] = (buf[i * d + j] + c * w[k] as u32) % q32;
                }
                let rank = fp::rank_in_place(&mut buf, d, d, q32);
                acc.ranks[rank] += 1;
                if split && rank == 4 {
                    let e = lattice.from_dual_coordinates(&w, field).expect("nondegenerate form");
                    if e.mul(&e).expect("square").is_zero() {
                        acc.nilpotent += 1;
                    } else {
                        acc.semisimple += 1;
                    }
                }
            }
            acc
        })
        .reduce(|| CensusAcc::new(d), CensusAcc::merge);
    let histogram = acc.ranks.iter().enumerate().filter(|(_, &c)| c > 0).map(|(r, &c)| (r, c)).collect();
    Ok(RankCensus {
        q,
        n: lattice.n(),
        histogram,
        subregular_semisimple: acc.semisimple,
        subregular_nilpotent: acc.nilpotent,
    })
}

/// `Delta(S, T)` polynomials of the `sl_3` table.
pub fn sl3_transition_poly(from: &str, to: &str) -> Option<QPoly> {
    match (from, to) {
        ("SL", "L") => Some(QPoly::new(&[0, 0, -1, 0, 0, 1])),
        ("SL", "J") => Some(QPoly::new(&[-1, -1, 0, 1, 1])),
        ("SL", "R") => Some(
            QPoly::new(&[0, 1])
                .mul(&QPoly::new(&[-1, 1]))
                .mul(&QPoly::new(&[-1, -2, -1, 0, 1, 1, 1])),
        ),
        ("L", "R") | ("J", "R") => Some(QPoly::new(&[0, -1, 0, 0, 1])),
        _ => None,
    }
}

/// `(d', z', delta')` of the `sl_3` labels.
pub fn sl3_label_data(label: &str) -> (u32, u32, u32) {
    match label {
        "SL" => (8, 0, 0),
        "L" | "J" => (4, 1, 2),
        "R" => (2, 2, 3),
        _ => panic!("unknown label {label}"),
    }
}

/// One row of the `sl_3` table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub source: String,
    pub d_prime: u32,
    pub z_prime: u32,
    pub delta_prime: u32,
    pub z_oracle: Option<u32>,
    pub d_oracle: Option<u32>,
    pub target: Option<String>,
    pub transition_poly: Option<String>,
    pub poly_value: Option<BigInt>,
    pub oracle_value: Option<BigInt>,
}

impl TableRow {
    /// Every available oracle value agrees with the table.
    pub fn matches(&self) -> bool {
        let value = match (&self.poly_value, &self.oracle_value) {
            (Some(p), Some(o)) => p == o,
            _ => true,
        };
        value && self.z_oracle.is_none_or(|z| z == self.z_prime) && self.d_oracle.is_none_or(|d| d == self.d_prime)
    }

    fn to_json(&self) -> Value {
        let cell = |v: &Option<BigInt>, tag| v.as_ref().map_or(Value::Null, |v| json_cell(v, tag));
        json!({
            "S": self.source,
            "dPrime": self.d_prime,
            "zPrime": self.z_prime,
            "deltaPrime": self.delta_prime,
            "dOracle": self.d_oracle,
            "zOracle": self.z_oracle,
            "T": self.target,
            "DeltaPolynomial": self.transition_poly,
            "DeltaPoly": cell(&self.poly_value, Provenance::Poly),
            "DeltaOracle": cell(&self.oracle_value, Provenance::Oracle),
            "match": self.matches(),
        })
    }
}

/// The `sl_3` table at `q`, with oracle values when requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl3Table {
    pub q: u64,
    pub rows: Vec<TableRow>,
    pub census: Option<RankCensus>,
}

impl Sl3Table {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(TableRow::matches)
    }

    pub fn first_mismatch(&self) -> Option<&TableRow> {
        self.rows.iter().find(|r| !r.matches())
    }

    /// `Delta(from, to)`, from the oracle when present.
    pub fn transition(&self, from: &str, to: &str) -> Option<(BigInt, Provenance)> {
        self.rows.iter().find(|r| r.source == from && r.target.as_deref() == Some(to)).and_then(|r| {
            match (&r.oracle_value, &r.poly_value) {
                (Some(o), _) => Some((o.clone(), Provenance::Oracle)),
                (None, Some(p)) => Some((p.clone(), Provenance::Poly)),
                _ => None,
            }
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "rows": self.rows.iter().map(TableRow::to_json).collect::<Vec<_>>(),
            "allMatch": self.all_match(),
        })
    }

    /// Shadow data for the Poincaré formula built from this table.
    pub fn shadow_data(&self) -> Result<ShadowData, ZetaError> {
        let mut transitions = BTreeMap::new();
        for (from, to) in [("SL", "L"), ("SL", "J"), ("SL", "R"), ("L", "R"), ("J", "R")] {
            let (v, _) = self.transition(from, to).ok_or_else(|| ZetaError::MissingTransition {
                from: from.into(),
                to: to.into(),
            })?;
            transitions.insert((from.to_string(), to.to_string()), v);
        }
        let types = ["SL", "L", "J", "R"]
            .iter()
            .map(|&l| {
                let (d, z, delta) = sl3_label_data(l);
                (l.to_string(), ShadowType { d, z, delta })
            })
            .collect();
        Ok(ShadowData {
            q: self.q,
            d: 8,
            types,
            transitions,
            sequences: vec![
                vec!["L".into()],
                vec!["J".into()],
                vec!["R".into()],
                vec!["L".into(), "R".into()],
                vec!["J".into(), "R".into()],
            ],
        })
    }
}

/// Builds the table; with `oracle`, every row is also enumerated: the
/// level-1 rank census for `Delta(SL, -)`, functional stabilizers for
/// `Delta(L, R)` and `Delta(J, R)`, and orbit representatives for `z`.
pub fn sl3_table(q: u64, oracle: bool, bound: u128) -> Result<Sl3Table, ZetaError> {
    validate_q(q, 3)?;
    let lattice = LieLattice::sl(3);
    let mut oracle_values: BTreeMap<(String, String), BigInt> = BTreeMap::new();
    let mut z_oracle: BTreeMap<String, u32> = BTreeMap::new();
    let mut d_oracle: BTreeMap<String, u32> = BTreeMap::new();
    let mut census = None;
    if oracle {
        let c = rank_census(&lattice, q, bound)?;
        oracle_values.insert(("SL".into(), "L".into()), big(c.subregular_semisimple));
        oracle_values.insert(("SL".into(), "J".into()), big(c.subregular_nilpotent));
        oracle_values.insert(("SL".into(), "R".into()), big(c.count(6)));
        let field = LocalRing::new(q, 1)?;
        let full = Subgroup::full(q, 3);
        let whole = fp::Subspace::whole(8, q);
        z_oracle.insert("SL".into(), full.fixed_dual_dim(&lattice, &whole) as u32);
        d_oracle.insert("SL".into(), full.lie_span(&lattice).dim() as u32);
        let reps = [
            ("L", Mat::from_rows(field, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]])),
            ("J", Mat::unit(field, 3, 0, 1)),
        ];
        for (label, a) in reps {
            let rec = ShadowRecord::new(&lattice, &a, ShadowStrategy::Centralizer)?;
            let t = lambda_and_z(&lattice, &rec, bound)?;
            if t.by_group != t.by_lie {
                return Err(ZetaError::Mismatch {
                    cell: format!("Lambda({label}, -)"),
                    formula: format!("{:?}", t.by_lie),
                    oracle: format!("{:?}", t.by_group),
                });
            }
            let regular: u64 = t
                .by_group
                .iter()
                .filter(|(l, _)| **l == ShadowLabel::R)
                .map(|(_, c)| c)
                .sum();
            oracle_values.insert((label.into(), "R".into()), big(regular));
            z_oracle.insert(label.into(), t.z as u32);
            d_oracle.insert(label.into(), rec.d_s as u32);
        }
        let orbit_census = sl3_level_one_census(q, bound)?;
        if orbit_census.regular_abelian.passed() {
            z_oracle.insert("R".into(), 2);
            d_oracle.insert("R".into(), 2);
        }
        census = Some(c);
    }
    let mut rows = Vec::new();
    for (from, to) in [("SL", Some("L")), ("SL", Some("J")), ("SL", Some("R")), ("L", Some("R")), ("J", Some("R")), ("R", None)]
    {
        let (d, z, delta) = sl3_label_data(from);
        let poly = to.and_then(|t| sl3_transition_poly(from, t));
        rows.push(TableRow {
            source: from.into(),
            d_prime: d,
            z_prime: z,
            delta_prime: delta,
            z_oracle: z_oracle.get(from).copied(),
            d_oracle: d_oracle.get(from).copied(),
            target: to.map(String::from),
            transition_poly: poly.as_ref().map(|p| p.to_string()),
            poly_value: poly.as_ref().map(|p| p.eval(q)),
            oracle_value: to.and_then(|t| oracle_values.get(&(from.to_string(), t.to_string())).cloned()),
        });
    }
    Ok(Sl3Table { q, rows, census })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowType {
    pub d: u32,
    pub z: u32,
    pub delta: u32,
}

/// Inputs of the shadow-sequence formula; the source label is always `SL`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowData {
    pub q: u64,
    pub d: u32,
    pub types: BTreeMap<String, ShadowType>,
    pub transitions: BTreeMap<(String, String), BigInt>,
    pub sequences: Vec<Vec<String>>,
}

/// Shadow data of `sl_2`: one merged regular label.
pub fn sl2_shadow_data(q: u64, regular_count: BigInt) -> ShadowData {
    let mut types = BTreeMap::new();
    types.insert("SL".to_string(), ShadowType { d: 3, z: 0, delta: 0 });
    types.insert("R".to_string(), ShadowType { d: 1, z: 1, delta: 1 });
    let mut transitions = BTreeMap::new();
    transitions.insert(("SL".to_string(), "R".to_string()), regular_count);
    ShadowData { q, d: 3, types, transitions, sequences: vec![vec!["R".into()]] }
}

/// `P(t) = 1 + sum_I F_I prod_S x_S / (1 - x_S)` with
/// `x_S = q^(d - d_S + z_S) t^delta_S`.
pub fn poincare_from_shadow_data(data: &ShadowData) -> Result<RationalFunc, ZetaError> {
    let q = data.q;
    let d = data.d as i64;
    let mut total = RationalFunc::from_poly(Poly::one());
    for seq in &data.sequences {
        let mut prev = "SL".to_string();
        let mut factor = BigRational::one();
        let mut z_sum = 0i64;
        let mut term = RationalFunc::from_poly(Poly::one());
        for label in seq {
            let ty = data.types.get(label).ok_or_else(|| ZetaError::MissingTransition {
                from: prev.clone(),
                to: label.clone(),
            })?;
            let delta = data.transitions.get(&(prev.clone(), label.clone())).ok_or_else(|| {
                ZetaError::MissingTransition { from: prev.clone(), to: label.clone() }
            })?;
            factor *= BigRational::from_integer(delta.clone());
            z_sum += ty.z as i64;
            let x = q_power(q, d - ty.d as i64 + ty.z as i64);
            term = term.mul(&RationalFunc::geometric(x, ty.delta as usize));
            prev = label.clone();
        }
        let last = &data.types[seq.last().expect("nonempty sequence")];
        factor *= q_power(q, -(d - last.d as i64) - z_sum);
        total = total.add(&term.scale(&factor));
    }
    Ok(total)
}

/// One summand `|N_{I, r}|` of the Poincaré series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincareCell {
    pub subset: Vec<usize>,
    pub exponents: Vec<u32>,
    pub level: u32,
    pub degree: u32,
    pub pattern: Vec<u32>,
    pub count: Option<BigInt>,
    pub provenance: Option<Provenance>,
}

impl PoincareCell {
    /// Rank mod `p` forced by the pattern: two per vanishing entry.
    pub fn level_one_rank(&self) -> usize {
        2 * self.pattern.iter().filter(|&&a| a == 0).count()
    }
}

/// `nu` pattern `(0^mu_l, r_l^mu_(l-1), (r_l + r_(l-1))^mu_(l-2), ..., N^mu_0)`.
pub fn profile_pattern(h: usize, subset: &[usize], exponents: &[u32]) -> Vec<u32> {
    let l = subset.len();
    let mut bounds = vec![0usize];
    bounds.extend_from_slice(subset);
    bounds.push(h);
    let mut out = Vec::with_capacity(h);
    let mut value = 0u32;
    for j in (0..=l).rev() {
        let mu = bounds[j + 1] - bounds[j];
        out.extend(std::iter::repeat_n(value, mu));
        if j > 0 {
            value += exponents[j - 1];
        }
    }
    out
}

/// All `(I, r_I)` with `sum r_j (h - i_j) <= k`.
pub fn admissible_cells(h: usize, k: u32) -> Vec<(Vec<usize>, Vec<u32>)> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << h) {
        let subset: Vec<usize> = (0..h).filter(|i| mask & (1 << i) != 0).collect();
        let weights: Vec<u32> = subset.iter().map(|&i| (h - i) as u32).collect();
        let mut exps = vec![1u32; subset.len()];
        fn rec(pos: usize, weights: &[u32], exps: &mut Vec<u32>, budget: u32, out: &mut Vec<Vec<u32>>) {
            if pos == weights.len() {
                out.push(exps.clone());
                return;
            }
            let mut r = 1;
            while r * weights[pos] <= budget {
                exps[pos] = r;
                rec(pos + 1, weights, exps, budget - r * weights[pos], out);
                r += 1;
            }
        }
        let mut all = Vec::new();
        rec(0, &weights, &mut exps, k, &mut all);
        for e in all {
            out.push((subset.clone(), e));
        }
    }
    out.sort_by_key(|(s, e)| {
        let deg: u32 = s.iter().zip(e).map(|(&i, &r)| r * (h - i) as u32).sum();
        (deg, s.clone(), e.clone())
    });
    out
}

/// Histogram of profiles `nu_N(w)` over primitive `w` in `(Z/p^N)^d`.
pub fn profile_histogram(
    lattice: &LieLattice,
    p: u64,
    level: u32,
    bound: u128,
) -> Result<BTreeMap<Vec<u32>, u64>, ZetaError> {
    let d = lattice.d();
    let h = lattice.h();
    if level == 1 {
        let census = rank_census(lattice, p, bound)?;
        return Ok(census
            .histogram
            .iter()
            .map(|(&rank, &count)| {
                let zeros = rank / 2;
                let mut nu = vec![0u32; zeros];
                nu.extend(std::iter::repeat_n(1, h - zeros));
                (nu, count)
            })
            .collect());
    }
    let ring = LocalRing::new(p, level)?;
    let m = ring.modulus();
    let total = (m as u128).pow(d as u32);
    if total > bound {
        return Err(ZetaError::Infeasible { what: format!("profiles at level {level}"), size: total, bound });
    }
    let form = lattice.commutator_matrix();
    let hist = (0..total as u64)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rest = idx;
            let w: Vec<u64> = (0..d)
                .map(|_| {
                    let v = rest % m;
                    rest /= m;
                    v
                })
                .collect();
            if w.iter().all(|&v| v % p == 0) {
                return None;
            }
            let profile = form.evaluate(&w, ring).antisymmetric_profile().expect("antisymmetric");
            Some(profile.exponents)
        })
        .fold(BTreeMap::new, |mut acc: BTreeMap<Vec<u32>, u64>, nu| {
            *acc.entry(nu).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(hist)
}

/// Truncated Poincaré series from enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincareTruncation {
    pub q: u64,
    pub n: usize,
    pub terms: u32,
    pub max_level: u32,
    pub cells: Vec<PoincareCell>,
    pub level_one_ranks: Vec<usize>,
}

impl PoincareTruncation {
    /// Coefficient of `t^k`; `None` when a contributing cell is unknown.
    pub fn coefficient(&self, k: u32) -> Option<BigInt> {
        let mut sum = BigInt::zero();
        for c in self.cells.iter().filter(|c| c.degree == k) {
            sum += c.count.as_ref()?;
        }
        Some(sum)
    }

    /// `ORACLE` if some contributing cell was enumerated, `CERT-ZERO` if all
    /// were certified empty, `FORMULA-ONLY` if any is unknown.
    pub fn provenance(&self, k: u32) -> Provenance {
        let tags: Vec<Option<Provenance>> = self.cells.iter().filter(|c| c.degree == k).map(|c| c.provenance).collect();
        if tags.iter().any(|t| t.is_none() || *t == Some(Provenance::Estimate)) {
            Provenance::FormulaOnly
        } else if tags.contains(&Some(Provenance::Oracle)) {
            Provenance::Oracle
        } else {
            Provenance::CertZero
        }
    }

    pub fn unknown_cells(&self) -> Vec<&PoincareCell> {
        self.cells.iter().filter(|c| c.count.is_none()).collect()
    }
}

/// Coefficients of `t^0 .. t^k` of the Poincaré series by enumerating
/// primitive vectors up to level `max_level`. Cells at higher levels are
/// certified zero when their level-1 rank class is vacant, else left unknown.
pub fn poincare_enumerate(
    lattice: &LieLattice,
    p: u64,
    k: u32,
    max_level: u32,
    bound: u128,
) -> Result<PoincareTruncation, ZetaError> {
    validate_q(p, lattice.n())?;
    let h = lattice.h();
    let cells_spec = admissible_cells(h, k);
    let needed_max = cells_spec.iter().map(|(_, e)| e.iter().sum::<u32>()).max().unwrap_or(0);
    let mut histograms: BTreeMap<u32, BTreeMap<Vec<u32>, u64>> = BTreeMap::new();
    for level in 1..=max_level.min(needed_max.max(1)) {
        histograms.insert(level, profile_histogram(lattice, p, level, bound)?);
    }
    let level_one_ranks: Vec<usize> = histograms
        .get(&1)
        .map(|hist| hist.keys().map(|nu| 2 * nu.iter().filter(|&&a| a == 0).count()).collect())
        .unwrap_or_default();
    let mut cells = Vec::new();
    for (subset, exponents) in cells_spec {
        let level: u32 = exponents.iter().sum();
        let degree: u32 = subset.iter().zip(&exponents).map(|(&i, &r)| r * (h - i) as u32).sum();
        let pattern = profile_pattern(h, &subset, &exponents);
        let mut cell = PoincareCell { subset, exponents, level, degree, pattern, count: None, provenance: None };
        if cell.level == 0 {
            cell.count = Some(BigInt::one());
            cell.provenance = Some(Provenance::Oracle);
        } else if let Some(hist) = histograms.get(&cell.level) {
            let count = hist.get(&cell.pattern).copied().unwrap_or(0);
            let vacant = count == 0 && !level_one_ranks.contains(&cell.level_one_rank());
            cell.count = Some(big(count));
            cell.provenance = Some(if vacant { Provenance::CertZero } else { Provenance::Oracle });
        } else if !level_one_ranks.is_empty() && !level_one_ranks.contains(&cell.level_one_rank()) {
            cell.count = Some(BigInt::zero());
            cell.provenance = Some(Provenance::CertZero);
        }
        cells.push(cell);
    }
    Ok(PoincareTruncation { q: p, n: lattice.n(), terms: k, max_level, cells, level_one_ranks })
}

/// Seeded Monte Carlo estimate of `|N_{I, r}|` for one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub subset: Vec<usize>,
    pub exponents: Vec<u32>,
    pub samples: u64,
    pub hits: u64,
    pub estimate: BigInt,
    pub provenance: Provenance,
}

pub fn estimate_cell(
    lattice: &LieLattice,
    p: u64,
    subset: &[usize],
    exponents: &[u32],
    samples: u64,
    seed: u64,
) -> Result<CellEstimate, ZetaError> {
    let level: u32 = exponents.iter().sum();
    let ring = LocalRing::new(p, level)?;
    let d = lattice.d();
    let m = ring.modulus();
    let pattern = profile_pattern(lattice.h(), subset, exponents);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<Vec<u64>> = Vec::with_capacity(samples as usize);
    while (draws.len() as u64) < samples {
        let w: Vec<u64> = (0..d).map(|_| rng.gen_range(0..m)).collect();
        if w.iter().any(|&v| v % p != 0) {
            draws.push(w);
        }
    }
    let form = lattice.commutator_matrix();
    let hits = draws
        .par_iter()
        .filter(|w| form.evaluate(w, ring).antisymmetric_profile().expect("antisymmetric").exponents == pattern)
        .count() as u64;
    let cone = BigInt::from(m).pow(d as u32) - BigInt::from(m / p).pow(d as u32);
    let estimate = if samples == 0 { BigInt::zero() } else { (cone * hits + samples / 2) / samples };
    Ok(CellEstimate {
        subset: subset.to_vec(),
        exponents: exponents.to_vec(),
        samples,
        hits,
        estimate,
        provenance: Provenance::Estimate,
    })
}

/// The closed form for `sl_3`, without the factor `q^(8m)`, in `T = q^-s`:
/// `(1 + u(q) q^-3 T^2 + u(1/q) q^-2 T^3 + q^-5 T^5) / ((1 - q T^2)(1 - q^2 T^3))`
/// with `u(X) = X^3 + X^2 - X - 1 - X^-1`.
pub fn theorem_c(q: u64) -> RationalFunc {
    let u = |x: BigRational| -> BigRational {
        let one = BigRational::one();
        &x * &x * &x + &x * &x - &x - &one - x.recip()
    };
    let qr = BigRational::from_integer(big(q));
    let num = Poly::new(vec![
        BigRational::one(),
        BigRational::zero(),
        u(qr.clone()) * q_power(q, -3),
        u(qr.recip()) * q_power(q, -2),
        BigRational::zero(),
        q_power(q, -5),
    ]);
    let den = Poly::new(vec![BigRational::one(), BigRational::zero(), -qr.clone()])
        .mul(&Poly::new(vec![BigRational::one(), BigRational::zero(), BigRational::zero(), -(&qr * &qr)]));
    RationalFunc::new(num, den)
}

/// `P(T / q^2)`: the zeta function without the factor `q^(dm)`.
pub fn zeta_from_poincare(p: &RationalFunc, q: u64) -> RationalFunc {
    p.substitute_scale(&q_power(q, -2))
}

/// The `sl_2` closed form without `q^(3m)`: `(1 - q^-2 T) / (1 - q T)`.
pub fn sl2_closed_form(q: u64) -> RationalFunc {
    let num = Poly::new(vec![BigRational::one(), -q_power(q, -2)]);
    let den = Poly::new(vec![BigRational::one(), -q_power(q, 1)]);
    RationalFunc::new(num, den)
}

/// Series coefficients of `q^(dm) f(T)` for `T^0 .. T^k`.
pub fn dirichlet_expand(f: &RationalFunc, q: u64, dm: u32, k: usize) -> Vec<BigRational> {
    let scale = q_power(q, dm as i64);
    f.series(k).into_iter().map(|c| c * &scale).collect()
}

/// One coefficient of the truncated series with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesCoefficient {
    pub degree: u32,
    pub formula: BigRational,
    pub enumerated: Option<BigInt>,
    pub provenance: Provenance,
}

/// Zeta function of the `m`-th congruence subgroup of `SL_n` with all the
/// evidence used to certify it.
#[derive(Debug, Clone)]
pub struct ZetaReport {
    pub n: usize,
    pub q: u64,
    pub m: u32,
    pub poincare: RationalFunc,
    pub zeta: RationalFunc,
    pub closed_form: RationalFunc,
    pub closed_form_text: String,
    pub identity_holds: bool,
    pub coefficients: Vec<SeriesCoefficient>,
    pub truncation: Option<PoincareTruncation>,
    pub table: Option<Sl3Table>,
    pub estimates: Vec<CellEstimate>,
}

impl ZetaReport {
    pub fn scale(&self) -> BigInt {
        BigInt::from(self.q).pow(self.lattice_dim() * self.m)
    }

    fn lattice_dim(&self) -> u32 {
        (self.n * self.n - 1) as u32
    }

    /// Every enumerated coefficient agrees with the formula.
    pub fn consistent(&self) -> bool {
        self.identity_holds
            && self.coefficients.iter().all(|c| {
                c.enumerated.as_ref().is_none_or(|e| BigRational::from_integer(e.clone()) == c.formula)
            })
            && self.table.as_ref().is_none_or(Sl3Table::all_match)
    }

    pub fn to_json(&self) -> Value {
        let d = self.lattice_dim();
        let dirichlet = dirichlet_expand(&self.zeta, self.q, d * self.m, self.coefficients.len().saturating_sub(1));
        let truncation: Vec<Value> = self
            .coefficients
            .iter()
            .zip(&dirichlet)
            .map(|(c, z)| {
                json!({
                    "degree": c.degree,
                    "poincare": json_rational(&c.formula),
                    "enumerated": c.enumerated.as_ref().map(json_int),
                    "zetaCoefficient": json_rational(z),
                    "provenance": c.provenance.tag(),
                })
            })
            .collect();
        let certificates: Vec<Value> = self
            .truncation
            .as_ref()
            .map(|t| {
                t.cells
                    .iter()
                    .map(|c| {
                        json!({
                            "I": c.subset,
                            "r": c.exponents,
                            "level": c.level,
                            "degree": c.degree,
                            "pattern": c.pattern,
                            "count": c.count.as_ref().map(json_int),
                            "provenance": c.provenance.map_or("UNKNOWN", |p| p.tag()),
                        })
                    })
                    .collect()
            })
            .unwrap_or_default();
        json!({
            "algebra": format!("sl{}", self.n),
            "q": self.q,
            "m": self.m,
            "scale": { "base": self.q, "exponent": d * self.m, "value": json_int(&self.scale()) },
            "poincare": json_rational_func(&self.poincare),
            "rationalFunc": json_rational_func(&self.zeta),
            "closedForm": self.closed_form_text,
            "identityHolds": self.identity_holds,
            "truncation": truncation,
            "certificates": certificates,
            "estimates": self.estimates.iter().map(|e| json!({
                "I": e.subset,
                "r": e.exponents,
                "samples": e.samples,
                "hits": e.hits,
                "value": json_int(&e.estimate),
                "provenance": e.provenance.tag(),
            })).collect::<Vec<_>>(),
            "table": self.table.as_ref().map(Sl3Table::to_json),
            "consistent": self.consistent(),
        })
    }
}

fn coefficients(poincare: &RationalFunc, truncation: Option<&PoincareTruncation>, k: u32) -> Vec<SeriesCoefficient> {
    poincare
        .series(k as usize)
        .into_iter()
        .enumerate()
        .map(|(deg, formula)| {
            let deg = deg as u32;
            let enumerated = truncation.and_then(|t| t.coefficient(deg));
            let provenance = match truncation {
                Some(t) if enumerated.is_some() => t.provenance(deg),
                _ => Provenance::FormulaOnly,
            };
            SeriesCoefficient { degree: deg, formula, enumerated, provenance }
        })
        .collect()
}

/// Options shared by the zeta computations.
#[derive(Debug, Clone, Copy)]
pub struct ZetaOptions {
    pub terms: u32,
    pub bound: u128,
    /// Enumerate the table and the truncation; polynomials only otherwise.
    pub oracle: bool,
    pub estimate_samples: u64,
    pub seed: u64,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions { terms: 3, bound: 10_000_000, oracle: true, estimate_samples: 0, seed: 0 }
    }
}

fn estimates_for(
    lattice: &LieLattice,
    q: u64,
    truncation: Option<&PoincareTruncation>,
    opts: &ZetaOptions,
) -> Result<Vec<CellEstimate>, ZetaError> {
    let Some(t) = truncation else { return Ok(Vec::new()) };
    if opts.estimate_samples == 0 {
        return Ok(Vec::new());
    }
    t.unknown_cells()
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            estimate_cell(lattice, q, &c.subset, &c.exponents, opts.estimate_samples, opts.seed.wrapping_add(k as u64))
        })
        .collect()
}

/// Zeta function of `SL_3` from the table, checked against the closed form.
pub fn zeta_sl3(q: u64, m: u32, opts: &ZetaOptions) -> Result<ZetaReport, ZetaError> {
    validate_q(q, 3)?;
    let lattice = LieLattice::sl(3);
    let table = sl3_table(q, opts.oracle, opts.bound)?;
    let poincare = poincare_from_shadow_data(&table.shadow_data()?)?;
    let zeta = zeta_from_poincare(&poincare, q);
    let closed_form = theorem_c(q);
    let truncation = opts.oracle.then(|| poincare_enumerate(&lattice, q, opts.terms, 1, opts.bound)).transpose()?;
    let estimates = estimates_for(&lattice, q, truncation.as_ref(), opts)?;
    Ok(ZetaReport {
        n: 3,
        q,
        m,
        identity_holds: zeta.equals(&closed_form),
        coefficients: coefficients(&poincare, truncation.as_ref(), opts.terms),
        closed_form_text: format!(
            "{q}^(8*{m}) * (1 + u({q}) {q}^(-3-2s) + u(1/{q}) {q}^(-2-3s) + {q}^(-5-5s)) / ((1 - {q}^(1-2s)) (1 - {q}^(2-3s))), u(X) = X^3 + X^2 - X - 1 - X^-1"
        ),
        poincare,
        zeta,
        closed_form,
        truncation,
        table: Some(table),
        estimates,
    })
}

/// The `sl_2` pipeline: level-1 census, shadow formula, enumeration up to
/// level 2, and the closed form `q^(3m) (1 - q^(-2-s)) / (1 - q^(1-s))`.
pub fn sl2_pipeline(p: u64, m: u32, opts: &ZetaOptions) -> Result<ZetaReport, ZetaError> {
    validate_q(p, 2)?;
    let lattice = LieLattice::sl(2);
    let (regular, truncation) = if opts.oracle {
        let census = rank_census(&lattice, p, opts.bound)?;
        let t = poincare_enumerate(&lattice, p, opts.terms, 2, opts.bound)?;
        (big(census.count(2)), Some(t))
    } else {
        (big(p).pow(3) - 1, None)
    };
    let poincare = poincare_from_shadow_data(&sl2_shadow_data(p, regular))?;
    let zeta = zeta_from_poincare(&poincare, p);
    let closed_form = sl2_closed_form(p);
    let estimates = estimates_for(&lattice, p, truncation.as_ref(), opts)?;
    Ok(ZetaReport {
        n: 2,
        q: p,
        m,
        identity_holds: zeta.equals(&closed_form),
        coefficients: coefficients(&poincare, truncation.as_ref(), opts.terms),
        closed_form_text: format!("{p}^(3*{m}) * (1 - {p}^(-2-s)) / (1 - {p}^(1-s))"),
        poincare,
        zeta,
        closed_form,
        truncation,
        table: None,
        estimates,
    })
}

/// Coefficient of `t^k` of `P` recovered from the closed form by `T = q^2 t`.
pub fn poincare_coefficient_from_closed_form(q: u64, k: usize) -> BigRational {
    theorem_c(q).substitute_scale(&q_power(q, 2)).series(k)[k].clone()
}

/// Number of primitive vectors in `(Z/p^N)^d`.
pub fn cone_size(p: u64, d: usize, level: u32) -> BigInt {
    let m = BigInt::from(p).pow(level);
    m.pow(d as u32) - (m / p).pow(d as u32)
}

/// Exact value of a truncation coefficient as `u64`, for display.
pub fn as_u64(v: &BigInt) -> Option<u64> {
    v.to_u64()
}
