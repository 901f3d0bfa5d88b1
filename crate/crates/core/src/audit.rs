//! The audit pipeline: every test and bound on one table, a verdict, and the
//! simulation and vertex listings used to exercise it.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayes::{posterior_model_probability, BayesReport, DirichletSpec, DEFAULT_LEVEL};
use crate::bounds::{cde_bounds, nde_bounds_binary, nde_point, EffectInterval};
use crate::error::{Error, Result};
use crate::freq::{cond_indep_test, demographic_parity_test, wrr_test, TestResult, WrrReport};
use crate::ivcore::{enumerate_extreme_points, iv_slacks, SlackReport};
use crate::scm::{classify_fairness, observational, parse_generator, FairnessVerdicts, FiniteSCM};
use crate::tables::{
    conditional_kernel, empirical_joint, parse_long_csv, CategorySpace, Coding, ContingencyTable3, CSV_HEADER,
};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
/// `REJECTED` when the upper Clopper-Pearson limit on the posterior
/// probability of IV compatibility falls below this value.
pub const DEFAULT_REJECTION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub input: PathBuf,
    pub coding: Option<Coding>,
    /// Symmetric Dirichlet prior parameter.
    pub alpha: f64,
    pub n_samples: u64,
    /// Confidence level of the Clopper-Pearson interval; the frequentist tests
    /// run at significance `1 - level`.
    pub level: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub rejection_threshold: f64,
    /// Run the Monte-Carlo test.
    pub bayes: bool,
}

impl AuditConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            coding: None,
            alpha: 1.0,
            n_samples: DEFAULT_SAMPLES,
            level: DEFAULT_LEVEL,
            seed: DEFAULT_SEED,
            tolerance: 0.0,
            rejection_threshold: DEFAULT_REJECTION_THRESHOLD,
            bayes: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Domain("the sample count must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Domain(format!("level {} is not in (0, 1)", self.level)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("prior alpha {} is not positive", self.alpha)));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Domain(format!("tolerance {} is not a non-negative number", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    /// The IV inequalities fail: `S` affects `A` other than through `D`.
    Rejected,
    /// The data are compatible with both fair and unfair models.
    Undecidable,
    /// Positivity fails, so the inequalities cannot be evaluated.
    Untestable,
}

impl Verdict {
    pub fn tag(self) -> &'static str {
        match self {
            Verdict::Rejected => "REJECTED",
            Verdict::Undecidable => "UNDECIDABLE",
            Verdict::Untestable => "UNTESTABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRate {
    pub sex: String,
    pub department: String,
    pub applicants: u64,
    pub admitted: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SexRate {
    pub sex: String,
    pub applicants: u64,
    pub admitted: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub total: u64,
    pub departments: usize,
    pub sex_labels: [String; 2],
    pub admitted_labels: [String; 2],
    pub by_sex: Vec<SexRate>,
    pub by_department: Vec<CellRate>,
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

impl DatasetSummary {
    pub fn of(table: &ContingencyTable3) -> Self {
        let space = table.space();
        let by_sex = (0..2)
            .map(|s| {
                let applicants = table.stratum_total(s);
                let admitted = (0..space.n()).map(|d| table.count(s, d, 1)).sum();
                SexRate { sex: space.s_labels()[s].clone(), applicants, admitted, rate: rate(admitted, applicants) }
            })
            .collect();
        let by_department = (0..space.n())
            .flat_map(|d| (0..2).map(move |s| (s, d)))
            .map(|(s, d)| {
                let applicants = table.sd_total(s, d);
                let admitted = table.count(s, d, 1);
                CellRate {
                    sex: space.s_labels()[s].clone(),
                    department: space.d_labels()[d].clone(),
                    applicants,
                    admitted,
                    rate: rate(admitted, applicants),
                }
            })
            .collect();
        Self {
            total: table.total(),
            departments: space.n(),
            sex_labels: space.s_labels().clone(),
            admitted_labels: space.a_labels().clone(),
            by_sex,
            by_department,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepartmentInterval {
    pub department: String,
    pub interval: EffectInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NdeBounds {
    pub from_sex: String,
    pub to_sex: String,
    pub interval: EffectInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub dataset: DatasetSummary,
    pub ml_iv: SlackReport,
    pub bayes: Option<BayesReport>,
    pub wrr: WrrReport,
    pub ci_test: Option<TestResult>,
    pub dp_test: TestResult,
    pub cde: Vec<DepartmentInterval>,
    /// Present when `D` is binary.
    pub nde_bounds: Option<Vec<NdeBounds>>,
    /// Mediation-formula NDE from the first to the second sex label; present
    /// when every `(s, d)` cell is observed.
    pub nde_point: Option<f64>,
    pub notes: Vec<String>,
    pub rejection_threshold: f64,
    pub verdict: Verdict,
}

/// Reads `config.input` and audits it.
pub fn run_audit(config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let text =
        std::fs::read_to_string(&config.input).map_err(|e| Error::Io(format!("{}: {e}", config.input.display())))?;
    let table = parse_long_csv(&text, config.coding.as_ref())?;
    audit_table(&table, config)
}

/// Runs every test and bound on `table`. A sex with no records is a
/// positivity error, reported as `UNTESTABLE` by the command-line tool.
pub fn audit_table(table: &ContingencyTable3, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let space = table.space();
    let joint = empirical_joint(table)?;
    let kernel = conditional_kernel(&joint)?;
    let significance = 1.0 - config.level;
    let mut notes = Vec::new();

    let ml_iv = iv_slacks(&kernel, 0.0);
    let bayes = if config.bayes {
        let prior = DirichletSpec::symmetric(config.alpha, space.cells())?;
        Some(posterior_model_probability(table, &prior, config.n_samples, config.level, config.seed, config.tolerance)?)
    } else {
        None
    };
    let wrr = wrr_test(table, significance)?;
    let ci_test = match cond_indep_test(table, significance) {
        Ok(r) => Some(r),
        Err(Error::Untestable(why)) => {
            notes.push(format!("conditional independence test skipped: {why}"));
            None
        }
        Err(e) => return Err(e),
    };
    let dp_test = demographic_parity_test(table, significance)?;
    let cde = (0..space.n())
        .map(|d| Ok(DepartmentInterval { department: space.d_labels()[d].clone(), interval: cde_bounds(&kernel, d)? }))
        .collect::<Result<_>>()?;
    let nde_bounds = if space.n() == 2 {
        Some(
            (0..2)
                .map(|s| {
                    Ok(NdeBounds {
                        from_sex: space.s_labels()[s].clone(),
                        to_sex: space.s_labels()[1 - s].clone(),
                        interval: nde_bounds_binary(&kernel, s)?,
                    })
                })
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let nde_point = match nde_point(&joint, 0, 1) {
        Ok(v) => Some(v),
        Err(Error::Positivity(why)) => {
            notes.push(format!("mediation formula skipped: {why}"));
            None
        }
        Err(e) => return Err(e),
    };

    let verdict = match &bayes {
        Some(b) if b.ci_upper < config.rejection_threshold => Verdict::Rejected,
        Some(_) => Verdict::Undecidable,
        None if !ml_iv.satisfied => Verdict::Rejected,
        None => Verdict::Undecidable,
    };
    if bayes.is_some() && !ml_iv.satisfied && verdict == Verdict::Undecidable {
        notes.push(
            "the ML estimate violates the IV inequalities but the posterior does not exclude compatibility".into(),
        );
    }

    Ok(AuditReport {
        dataset: DatasetSummary::of(table),
        ml_iv,
        bayes,
        wrr,
        ci_test,
        dp_test,
        cde,
        nde_bounds,
        nde_point,
        notes,
        rejection_threshold: config.rejection_threshold,
        verdict,
    })
}

fn fmt_p(p: f64) -> String {
    if p == 0.0 {
        "0 (underflow)".into()
    } else {
        format!("{p:.4e}")
    }
}

impl AuditReport {
    /// Plain-text summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let d = &self.dataset;
        let _ = writeln!(out, "verdict: {}", self.verdict.tag());
        let _ = writeln!(out, "records: {} in {} departments", d.total, d.departments);
        for s in &d.by_sex {
            let _ = writeln!(out, "  {}: {} applicants, {:.1}% admitted", s.sex, s.applicants, 100.0 * s.rate);
        }
        let _ = writeln!(
            out,
            "ML IV check: max lhs {:.6}, {}",
            self.ml_iv.max_lhs,
            if self.ml_iv.satisfied { "satisfied" } else { "violated" }
        );
        if let Some(b) = &self.bayes {
            let _ = writeln!(
                out,
                "Bayes: {}/{} draws compatible, {:.0}% interval [{:.9}, {:.9}] (alpha {}, seed {})",
                b.n_satisfying,
                b.n_samples,
                100.0 * b.level,
                b.ci_lower,
                b.ci_upper,
                b.prior_alpha.map_or("custom".to_string(), |a| a.to_string()),
                b.seed
            );
        }
        let max_gamma = self.wrr.tests.iter().map(|t| t.gamma_hat).fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            out,
            "WRR: max gamma {:.4}, {}",
            max_gamma,
            if self.wrr.reject { "some inequality rejected" } else { "no inequality rejected" }
        );
        if let Some(t) = &self.ci_test {
            let _ = writeln!(out, "A indep. S given D: chi2 {:.3} on {} df, p {}", t.statistic, t.df, fmt_p(t.p_value));
        }
        let t = &self.dp_test;
        let _ = writeln!(out, "demographic parity: chi2 {:.3}, p {}", t.statistic, fmt_p(t.p_value));
        for c in &self.cde {
            let _ = writeln!(out, "CDE[{}]: [{:.4}, {:.4}]", c.department, c.interval.lower, c.interval.upper);
        }
        if let Some(b) = &self.nde_bounds {
            for e in b {
                let _ = writeln!(
                    out,
                    "NDE {} -> {}: [{:.4}, {:.4}]",
                    e.from_sex, e.to_sex, e.interval.lower, e.interval.upper
                );
            }
        }
        if let Some(v) = self.nde_point {
            let _ = writeln!(out, "mediation formula NDE {} -> {}: {:.6}", d.sex_labels[0], d.sex_labels[1], v);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// A model from a file in the text format, or from a generator spec when no
/// such file exists.
pub fn load_model(source: &str) -> Result<FiniteSCM> {
    let path = std::path::Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{source}: {e}")))?;
        text.parse()
    } else {
        parse_generator(source)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub rows: u64,
    pub seed: u64,
    pub class: String,
    pub departments: usize,
    /// Pass this to `--coding` so that labels map back to the model's indices.
    pub coding: String,
    pub verdicts: FairnessVerdicts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub csv: String,
    pub table: ContingencyTable3,
    pub summary: SimulateSummary,
}

/// Draws `count` records from the observational distribution of `model`,
/// one CSV row per record, sorted by `(s, d, a)`.
pub fn run_simulate(model: &FiniteSCM, count: u64, seed: u64) -> Result<Simulation> {
    let n = model.n();
    let joint = observational(model);
    let sampler = WeightedIndex::new(joint.probs()).map_err(|e| Error::Model(format!("observational pmf: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; 4 * n];
    for _ in 0..count {
        counts[sampler.sample(&mut rng)] += 1;
    }
    let space = CategorySpace::numeric(n);
    let mut csv = String::with_capacity(16 * count as usize + 32);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for (s, d, a) in space.triples() {
        let line = format!("{},{},{},1\n", space.s_labels()[s], space.d_labels()[d], space.a_labels()[a]);
        for _ in 0..counts[space.index(s, d, a)] {
            csv.push_str(&line);
        }
    }
    let coding = Coding::of_space(&space).to_string();
    let table = ContingencyTable3::new(space, counts)?;
    Ok(Simulation {
        csv,
        table,
        summary: SimulateSummary {
            rows: count,
            seed,
            class: model.class().to_string(),
            departments: n,
            coding,
            verdicts: classify_fairness(model),
        },
    })
}

/// One line per extreme point of the compatible-kernel polytope.
pub fn run_vertices(n: usize) -> Result<String> {
    let mut out = String::new();
    for p in enumerate_extreme_points(n)? {
        let _ = writeln!(out, "{p}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivcore::ExtremePoint;
    use crate::scm::example1;

    fn quick(n_samples: u64) -> AuditConfig {
        AuditConfig { n_samples, ..AuditConfig::new("unused.csv") }
    }

    #[test]
    fn uniform_table_is_undecidable() {
        let table = ContingencyTable3::from_fn(2, |_, _, _| 50);
        let r = audit_table(&table, &quick(2000)).unwrap();
        assert_eq!(r.verdict, Verdict::Undecidable);
        assert!(r.nde_bounds.is_some());
        assert_eq!(r.nde_point, Some(0.0));
        assert!(r.summary().starts_with("verdict: UNDECIDABLE"));
    }

    #[test]
    fn violating_table_is_rejected() {
        let table = ContingencyTable3::from_fn(2, |s, d, a| if d == 0 && a == s { 1000 } else { 1 });
        let r = audit_table(&table, &quick(2000)).unwrap();
        assert_eq!(r.verdict, Verdict::Rejected);
        let r = audit_table(&table, &AuditConfig { bayes: false, ..quick(1) }).unwrap();
        assert_eq!(r.verdict, Verdict::Rejected);
        assert!(r.bayes.is_none());
    }

    #[test]
    fn missing_sex_is_a_positivity_error() {
        let table = ContingencyTable3::from_fn(2, |s, _, _| if s == 0 { 5 } else { 0 });
        assert!(matches!(audit_table(&table, &quick(10)), Err(Error::Positivity(_))));
    }

    #[test]
    fn config_validation() {
        assert!(quick(0).validate().is_err());
        assert!(AuditConfig { level: 1.0, ..quick(1) }.validate().is_err());
        assert!(AuditConfig { alpha: 0.0, ..quick(1) }.validate().is_err());
    }

    #[test]
    fn simulate_is_deterministic_and_parses_back() {
        let model = example1(0.25, 0.25).unwrap();
        let a = run_simulate(&model, 500, 4).unwrap();
        let b = run_simulate(&model, 500, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.csv.lines().count(), 501);
        let coding: Coding = a.summary.coding.parse().unwrap();
        assert_eq!(parse_long_csv(&a.csv, Some(&coding)).unwrap(), a.table);
    }

    #[test]
    fn vertex_listing() {
        let text = run_vertices(2).unwrap();
        assert_eq!(text.lines().count(), 12);
        for line in text.lines() {
            line.parse::<ExtremePoint>().unwrap();
        }
        assert!(run_vertices(1).is_err());
    }
}
