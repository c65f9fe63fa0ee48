//! Acceptance criteria 1 to 7, one PASS/FAIL line each.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use shadow_core::group::exp_suite_standard;
use shadow_core::lie::LieLattice;
use shadow_core::orbits::verify_sl2_theorems;
use shadow_core::zeta::{
    poincare_coefficient_from_closed_form, poincare_from_shadow_data, rank_census, sl2_closed_form, sl2_pipeline,
    sl3_table, theorem_c, zeta_from_poincare, Sl3Table, ZetaOptions,
};

const BOUND: u128 = 10_000_000;

/// Outcome of one criterion: a report that must be reproducible and a verdict.
struct Outcome {
    report: Value,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { report: json!({}), failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn int(v: i128) -> BigInt {
    BigInt::from(v)
}

/// The table polynomials written out directly in integers.
fn expected_transitions(q: i128) -> [(&'static str, &'static str, BigInt); 5] {
    let lr = q * (q.pow(3) - 1);
    [
        ("SL", "L", int(q.pow(5) - q.pow(2))),
        ("SL", "J", int(q.pow(4) + q.pow(3) - q - 1)),
        ("SL", "R", int(q * (q - 1) * (q.pow(6) + q.pow(5) + q.pow(4) - q.pow(2) - 2 * q - 1))),
        ("L", "R", int(lr)),
        ("J", "R", int(lr)),
    ]
}

fn oracle_tables() -> Vec<Sl3Table> {
    [5u64, 7].iter().map(|&q| sl3_table(q, true, BOUND).expect("oracle table")).collect()
}

fn criterion_1(tables: &[Sl3Table]) -> Outcome {
    let mut out = Outcome::new();
    for table in tables {
        let q = table.q as i128;
        for (from, to, expected) in expected_transitions(q) {
            let row = table
                .rows
                .iter()
                .find(|r| r.source == from && r.target.as_deref() == Some(to))
                .expect("row present");
            out.check(
                row.oracle_value.as_ref() == Some(&expected),
                format!("q = {q}: Delta({from}, {to}) oracle {:?}, expected {expected}", row.oracle_value),
            );
            out.check(row.poly_value.as_ref() == Some(&expected), format!("q = {q}: Delta({from}, {to}) polynomial"));
        }
        for (label, z) in [("SL", 0), ("L", 1), ("J", 1), ("R", 2)] {
            let row = table.rows.iter().find(|r| r.source == label).unwrap();
            out.check(row.z_oracle == Some(z), format!("q = {q}: z_{label} = {:?}, expected {z}", row.z_oracle));
        }
        out.check(table.all_match(), format!("q = {q}: table mismatch"));
    }
    out.report = json!(tables.iter().map(Sl3Table::to_json).collect::<Vec<_>>());
    out
}

fn criterion_2(tables: &[Sl3Table]) -> Outcome {
    let mut out = Outcome::new();
    let sl3 = LieLattice::sl(3);
    let mut reports = Vec::new();
    for table in tables {
        let q = table.q;
        let census = rank_census(&sl3, q, BOUND).expect("census");
        let [l, j, r, ..] = expected_transitions(q as i128);
        out.check(census.support() == vec![4, 6], format!("q = {q}: support {:?}", census.support()));
        out.check(BigInt::from(census.count(4)) == l.2 + j.2, format!("q = {q}: rank 4 count {}", census.count(4)));
        out.check(BigInt::from(census.count(6)) == r.2, format!("q = {q}: rank 6 count {}", census.count(6)));
        let total: u64 = census.histogram.values().sum();
        out.check(total + 1 == q.pow(8), format!("q = {q}: {total} nonzero vectors"));
        out.check(table.census.as_ref() == Some(&census), format!("q = {q}: census differs between runs"));
        reports.push(serde_json::to_value(&census).unwrap());
    }
    out.report = json!(reports);
    out
}

fn criterion_3(tables: &[Sl3Table]) -> Outcome {
    let mut out = Outcome::new();
    let mut reports = Vec::new();
    for q in [5u64, 7, 11, 13] {
        let table = match tables.iter().find(|t| t.q == q) {
            Some(t) => t.clone(),
            None => sl3_table(q, false, BOUND).expect("polynomial table"),
        };
        let poincare = poincare_from_shadow_data(&table.shadow_data().expect("complete")).expect("formula");
        let zeta = zeta_from_poincare(&poincare, q);
        let closed = theorem_c(q);
        let difference = zeta.cross_difference(&closed);
        out.check(difference.is_zero(), format!("q = {q}: cross-multiplied difference {difference}"));
        let series = poincare.series(3);
        let qi = q as i128;
        let subregular = int(qi.pow(5) + qi.pow(4) + qi.pow(3) - qi.pow(2) - qi - 1);
        out.check(series[2] == BigRational::from_integer(subregular.clone()), format!("q = {q}: t^2 coefficient"));
        out.check(
            poincare_coefficient_from_closed_form(q, 2) == BigRational::from_integer(subregular),
            format!("q = {q}: t^2 coefficient of the closed form"),
        );
        if let Some(census) = &table.census {
            out.check(
                series[2] == BigRational::from_integer(census.count(4).into()),
                format!("q = {q}: t^2 coefficient versus census"),
            );
            out.check(
                series[3] == BigRational::from_integer(census.count(6).into()),
                format!("q = {q}: t^3 coefficient versus census"),
            );
        }
        if q == 5 {
            out.check(series[2].to_integer() == int(3844) && series[3].to_integer() == int(386_780), "q = 5 values");
        }
        reports.push(json!({
            "q": q,
            "oracle": table.census.is_some(),
            "poincare": poincare.to_string(),
            "zeta": zeta.to_string(),
            "closedForm": closed.to_string(),
        }));
    }
    out.report = json!(reports);
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let mut reports = Vec::new();
    for p in [3u64, 5] {
        for r in [1u32, 2] {
            let report = verify_sl2_theorems(p, r, BOUND).expect("feasible");
            out.check(report.elements == p.pow(3 * r), format!("p = {p}, r = {r}: {} elements", report.elements));
            for (name, tally) in report.checks() {
                let required = !(name == "span-lemma" && p == 3);
                out.check(
                    !required || tally.passed(),
                    format!("p = {p}, r = {r}: {name} {}/{} failed, {:?}", tally.failed, tally.checked, tally.first_failure),
                );
            }
            reports.push(serde_json::to_value(&report).unwrap());
        }
    }
    out.report = json!(reports);
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let reports = exp_suite_standard(5, 2, 1000, 2024, BOUND).expect("feasible");
    let expected = [(625, true), (15_625, true), (1000, false)];
    for (rep, (elements, exhaustive)) in reports.iter().zip(expected) {
        out.check(rep.elements == elements && rep.exhaustive == exhaustive, format!("{}: {} elements", rep.domain, rep.elements));
        for (name, tally) in rep.checks() {
            out.check(tally.passed(), format!("{} {name}: {:?}", rep.domain, tally.first_failure));
        }
    }
    out.report = serde_json::to_value(&reports).unwrap();
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let mut reports = Vec::new();
    for p in [3u64, 5, 7] {
        let opts = ZetaOptions { terms: 2, ..ZetaOptions::default() };
        let report = sl2_pipeline(p, 1, &opts).expect("pipeline");
        out.check(report.zeta.equals(&sl2_closed_form(p)), format!("p = {p}: closed form"));
        let q3 = p.pow(3) as i128;
        for (k, expected) in [(0usize, 1i128), (1, q3 - 1), (2, (q3 - 1) * q3)] {
            let c = &report.coefficients[k];
            out.check(
                c.enumerated.as_ref() == Some(&int(expected)) && c.formula == BigRational::from_integer(int(expected)),
                format!("p = {p}: t^{k} formula {} enumerated {:?}, expected {expected}", c.formula, c.enumerated),
            );
        }
        let level_two = report
            .truncation
            .as_ref()
            .and_then(|t| t.cells.iter().find(|c| c.subset == vec![0] && c.exponents == vec![2]))
            .and_then(|c| c.count.as_ref()?.to_i128());
        out.check(level_two == Some((q3 - 1) * q3), format!("p = {p}: level-2 count {level_two:?}"));
        if p == 5 {
            out.check(level_two == Some(15_500), "p = 5: level-2 count 15500");
        }
        reports.push(report.to_json());
    }
    out.report = json!(reports);
    out
}

fn run_all() -> Vec<Outcome> {
    let tables = oracle_tables();
    vec![
        criterion_1(&tables),
        criterion_2(&tables),
        criterion_3(&tables),
        criterion_4(),
        criterion_5(),
        criterion_6(),
    ]
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool").install(f)
}

fn main() {
    let reference = in_pool(1, run_all);
    let mut lines = Vec::new();
    let mut all_pass = true;
    for (k, outcome) in reference.iter().enumerate() {
        let pass = outcome.failures.is_empty();
        all_pass &= pass;
        let detail = if pass { String::new() } else { format!(" ({})", outcome.failures.join("; ")) };
        lines.push(format!("criterion {}: {}{}", k + 1, if pass { "PASS" } else { "FAIL" }, detail));
    }
    let encode = |outcomes: &[Outcome]| -> Vec<String> {
        outcomes.iter().map(|o| serde_json::to_string(&o.report).expect("serializable")).collect()
    };
    let bytes = encode(&reference);
    let mut differing = Vec::new();
    for threads in [4usize, 8] {
        let other = encode(&in_pool(threads, run_all));
        for (k, (a, b)) in bytes.iter().zip(&other).enumerate() {
            if a != b {
                differing.push(format!("criterion {} at {threads} threads", k + 1));
            }
        }
    }
    let pass = differing.is_empty();
    all_pass &= pass;
    let detail = if pass { String::new() } else { format!(" ({})", differing.join("; ")) };
    lines.push(format!("criterion 7: {}{}", if pass { "PASS" } else { "FAIL" }, detail));
    for line in &lines {
        println!("{line}");
    }
    if !all_pass {
        std::process::exit(1);
    }
}
