//! Frequentist tests on a contingency table: stratified conditional
//! independence, demographic parity, the ML-plug-in IV check and a family of
//! one-sided association tests, one per IV inequality.
//!
//! Every test takes a significance level (e.g. 0.05) and uses Pearson's
//! statistic without continuity correction.

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::ivcore::{iv_slacks, SlackReport};
use crate::tables::{conditional_kernel, empirical_joint, ContingencyTable3};

/// `P(X > x)` for `X ~ chi-square(df)`.
pub fn chi_square_upper_tail(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("chi-square needs at least one degree of freedom".into()));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square statistic {x} is negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(f64::from(df) / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// Pearson statistic of the 2x2 table `[[n00, n01], [n10, n11]]`, or `None`
/// when a row or column is empty.
pub fn pearson_2x2(t: [[u64; 2]; 2]) -> Option<f64> {
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    if rows.contains(&0) || cols.contains(&0) {
        return None;
    }
    let total = (rows[0] + rows[1]) as f64;
    let cross = t[0][0] as f64 * t[1][1] as f64 - t[0][1] as f64 * t[1][0] as f64;
    let stat = total * (cross / rows[0] as f64) * (cross / rows[1] as f64) / cols[0] as f64 / cols[1] as f64;
    Some(stat)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumDetail {
    pub d: usize,
    /// `None` when the stratum has an empty `S` row or `A` column.
    pub statistic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// The p-value is below the smallest positive double and reads 0.
    pub p_underflow: bool,
    pub significance: f64,
    pub reject: bool,
    pub strata: Vec<StratumDetail>,
}

fn check_significance(significance: f64) -> Result<()> {
    if significance > 0.0 && significance < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("significance level {significance} is not in (0, 1)")))
    }
}

fn result(statistic: f64, df: u32, significance: f64, strata: Vec<StratumDetail>) -> Result<TestResult> {
    let p_value = chi_square_upper_tail(statistic, df)?;
    Ok(TestResult {
        statistic,
        df,
        p_value,
        p_underflow: p_value == 0.0,
        significance,
        reject: p_value < significance,
        strata,
    })
}

/// Tests `A` independent of `S` given `D` by summing per-stratum Pearson
/// statistics over the strata where the `S x A` table has no empty margin.
pub fn cond_indep_test(table: &ContingencyTable3, significance: f64) -> Result<TestResult> {
    check_significance(significance)?;
    let n = table.space().n();
    let strata: Vec<StratumDetail> = (0..n)
        .map(|d| {
            let t = [0, 1].map(|s| [0, 1].map(|a| table.count(s, d, a)));
            StratumDetail { d, statistic: pearson_2x2(t) }
        })
        .collect();
    let used: Vec<f64> = strata.iter().filter_map(|s| s.statistic).collect();
    if used.is_empty() {
        return Err(Error::Untestable("no department has both sexes and both outcomes observed".into()));
    }
    result(used.iter().sum(), used.len() as u32, significance, strata)
}

/// Pearson test of equal acceptance rates on `[[rejected, accepted]; sex]`.
pub fn demographic_parity_2x2(counts: [[u64; 2]; 2], significance: f64) -> Result<TestResult> {
    check_significance(significance)?;
    for (s, row) in counts.iter().enumerate() {
        if row[0] + row[1] == 0 {
            return Err(Error::Untestable(format!("no records with sex index {s}")));
        }
    }
    // An empty outcome column means both rates are equal.
    result(pearson_2x2(counts).unwrap_or(0.0), 1, significance, Vec::new())
}

/// Demographic parity on the table aggregated over departments.
pub fn demographic_parity_test(table: &ContingencyTable3, significance: f64) -> Result<TestResult> {
    let n = table.space().n();
    let counts = [0, 1].map(|s| [0, 1].map(|a| (0..n).map(|d| table.count(s, d, a)).sum()));
    demographic_parity_2x2(counts, significance).map_err(|e| match e {
        Error::Untestable(_) => {
            let s = usize::from(counts[0][0] + counts[0][1] != 0);
            Error::Untestable(format!("no records with sex {:?}", table.space().s_labels()[s]))
        }
        other => other,
    })
}

/// IV inequalities evaluated on the maximum-likelihood kernel, tolerance 0.
pub fn ml_iv_check(table: &ContingencyTable3) -> Result<SlackReport> {
    let kernel = conditional_kernel(&empirical_joint(table)?)?;
    Ok(iv_slacks(&kernel, 0.0))
}

/// One inequality of the family, indexed by `(d, a)`.
///
/// `Q = 1[D=d, A=a]` when `S = 1` and `Q = 1 - 1[D=d, A=1-a]` when `S = 0`;
/// the inequality says `gamma = P(Q=1 | S=1) - P(Q=1 | S=0) <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrrTest {
    pub d: usize,
    pub a: usize,
    pub gamma_hat: f64,
    /// `true` when `gamma_hat > 0`, i.e. the data point against the inequality.
    pub challenged: bool,
    pub statistic: f64,
    /// Two-sided Pearson p-value of the `Q x S` association.
    pub association_p: f64,
    pub association_p_underflow: bool,
    /// One-sided p-value in the challenging direction; 1 when unchallenged.
    pub one_sided_p: f64,
    pub adjusted_p: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrrReport {
    pub tests: Vec<WrrTest>,
    pub bonferroni_factor: f64,
    pub significance: f64,
    /// Some inequality is rejected after adjustment.
    pub reject: bool,
}

/// Population value of `gamma` for `(d, a)` on a kernel given as its flat
/// value array.
pub fn wrr_gamma(values: &[f64], n: usize, d: usize, a: usize) -> f64 {
    let k = |s: usize, d: usize, a: usize| values[(s * n + d) * 2 + a];
    k(1, d, a) + k(0, d, 1 - a) - 1.0
}

/// Runs the family of one-sided tests with the Bonferroni factor 2.
pub fn wrr_test(table: &ContingencyTable3, significance: f64) -> Result<WrrReport> {
    check_significance(significance)?;
    let n = table.space().n();
    let m = [0, 1].map(|s| table.stratum_total(s));
    if let Some(s) = (0..2).find(|&s| m[s] == 0) {
        return Err(Error::Positivity(format!("no records with sex {:?}", table.space().s_labels()[s])));
    }
    const FACTOR: f64 = 2.0;
    let mut tests = Vec::with_capacity(2 * n);
    for d in 0..n {
        for a in 0..2 {
            let q1 = [m[0] - table.count(0, d, 1 - a), table.count(1, d, a)];
            let t = [0, 1].map(|s| [m[s] - q1[s], q1[s]]);
            let gamma_hat = q1[1] as f64 / m[1] as f64 - q1[0] as f64 / m[0] as f64;
            let statistic = pearson_2x2(t).unwrap_or(0.0);
            let association_p = chi_square_upper_tail(statistic, 1)?;
            let challenged = gamma_hat > 0.0;
            let one_sided_p = if challenged { association_p / 2.0 } else { 1.0 };
            let adjusted_p = (FACTOR * one_sided_p).min(1.0);
            tests.push(WrrTest {
                d,
                a,
                gamma_hat,
                challenged,
                statistic,
                association_p,
                association_p_underflow: association_p == 0.0,
                one_sided_p,
                adjusted_p,
                reject: adjusted_p < significance,
            });
        }
    }
    let reject = tests.iter().any(|t| t.reject);
    Ok(WrrReport { tests, bonferroni_factor: FACTOR, significance, reject })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_values() {
        assert_eq!(chi_square_upper_tail(0.0, 1).unwrap(), 1.0);
        assert!((chi_square_upper_tail(3.841, 1).unwrap() - 0.050013683763956804).abs() < 1e-12);
        let far = chi_square_upper_tail(200.0, 1).unwrap();
        assert!(far > 0.0 && far < 1e-40);
        assert_eq!(chi_square_upper_tail(5000.0, 1).unwrap(), 0.0);
        assert!(chi_square_upper_tail(1.0, 0).is_err());
        assert!(chi_square_upper_tail(-1.0, 1).is_err());
    }

    #[test]
    fn chi_square_two_df_is_exponential() {
        for x in [0.1, 1.0, 7.5, 30.0] {
            assert!((chi_square_upper_tail(x, 2).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn perfect_separation_stratum() {
        let table = ContingencyTable3::from_fn(2, |s, d, a| match (s, d, a) {
            (0, 0, 1) | (1, 0, 0) => 100,
            _ => 0,
        });
        let r = cond_indep_test(&table, 0.05).unwrap();
        assert!((r.statistic - 200.0).abs() < 1e-9);
        assert_eq!(r.df, 1);
        assert!(r.p_value < 1e-6 && r.reject);
        assert_eq!(r.strata[1].statistic, None);
    }

    #[test]
    fn identical_rows_are_independent() {
        let table = ContingencyTable3::from_fn(2, |_, d, a| if d == 0 { 3 + 4 * a as u64 } else { 0 });
        let r = cond_indep_test(&table, 0.05).unwrap();
        assert_eq!((r.statistic, r.p_value, r.reject), (0.0, 1.0, false));
    }

    #[test]
    fn untestable_without_informative_stratum() {
        let table = ContingencyTable3::from_fn(2, |s, _, _| if s == 0 { 5 } else { 0 });
        assert!(matches!(cond_indep_test(&table, 0.05), Err(Error::Untestable(_))));
        assert!(matches!(demographic_parity_test(&table, 0.05), Err(Error::Untestable(_))));
        assert!(matches!(wrr_test(&table, 0.05), Err(Error::Positivity(_))));
    }

    #[test]
    fn parity_on_balanced_tables() {
        let r = demographic_parity_2x2([[2, 2], [2, 2]], 0.05).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = demographic_parity_2x2([[30, 10], [60, 20]], 0.05).unwrap();
        assert!(r.statistic.abs() < 1e-12);
    }

    #[test]
    fn ml_check_on_extremes() {
        let uniform = ContingencyTable3::from_fn(3, |_, _, _| 4);
        let r = ml_iv_check(&uniform).unwrap();
        assert!(r.satisfied && (r.max_lhs - 1.0 / 3.0).abs() < 1e-15);
        let bad = ContingencyTable3::from_fn(2, |s, d, a| if d == 0 && a == s { 10_000 } else { 0 });
        let r = ml_iv_check(&bad).unwrap();
        assert!(!r.satisfied && r.max_lhs == 2.0);
    }

    #[test]
    fn wrr_on_independent_q() {
        // Every Q has the same distribution under both sexes.
        let table = ContingencyTable3::from_fn(2, |_, _, _| 25);
        let r = wrr_test(&table, 0.05).unwrap();
        for t in &r.tests {
            assert!(!t.challenged && !t.reject);
        }
        // gamma = K(d,a|1) + K(d,1-a|0) - 1 = 0.5 - 1
        assert!(r.tests.iter().all(|t| (t.gamma_hat + 0.5).abs() < 1e-15));
    }

    #[test]
    fn wrr_detects_violation() {
        let table = ContingencyTable3::from_fn(2, |s, d, a| if d == 0 && a == s { 10_000 } else { 0 });
        let r = wrr_test(&table, 0.05).unwrap();
        assert!(r.reject);
        let t = r.tests.iter().find(|t| t.d == 0 && t.a == 1).unwrap();
        assert_eq!(t.gamma_hat, 1.0);
    }
}
