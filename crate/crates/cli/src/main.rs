//! `causal-audit`: audit a sex/department/admission table for evidence of a
//! direct effect of sex on admission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_audit::audit::{
    load_model, run_audit, run_simulate, run_vertices, AuditConfig, AuditReport, DEFAULT_REJECTION_THRESHOLD,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
use causal_audit::bayes::{posterior_model_probability, prior_sweep, BayesReport, DirichletSpec, DEFAULT_LEVEL};
use causal_audit::bounds::{cde_bounds, nde_bounds_binary, nde_point};
use causal_audit::freq::{cond_indep_test, ml_iv_check, wrr_test, TestResult, WrrReport};
use causal_audit::ivcore::SlackReport;
use causal_audit::{conditional_kernel, empirical_joint, parse_long_csv, Coding, ContingencyTable3, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "causal-audit", version, about = "Test causal fairness hypotheses on admissions-style data")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Options {
    /// Long-format CSV with header `sex,department,admitted,count`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Label order, e.g. `sex=Male,Female;department=A,B;admitted=Rejected,Admitted`.
    #[arg(long, global = true)]
    coding: Option<Coding>,
    /// Symmetric Dirichlet prior parameter.
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,
    /// Posterior draws.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, global = true, env = "CAUSAL_AUDIT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Confidence level; frequentist tests run at significance `1 - level`.
    #[arg(long, global = true, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// Slack allowed when checking the inequalities on posterior draws.
    #[arg(long, global = true, default_value_t = 0.0)]
    tolerance: f64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every test and bound, with a verdict.
    Audit {
        /// Skip the Monte-Carlo test; the verdict then follows the ML check.
        #[arg(long)]
        no_bayes: bool,
        /// Upper credible limit below which the verdict is REJECTED.
        #[arg(long, default_value_t = DEFAULT_REJECTION_THRESHOLD)]
        rejection_threshold: f64,
    },
    /// Sample records from a model file or a generator spec such as
    /// `random:cf:n=3:seed=7` or `example1:delta=0.25:eps=0.25`.
    Simulate {
        model: String,
        #[arg(long, default_value_t = 10_000)]
        count: u64,
    },
    /// List the extreme points of the compatible-kernel polytope.
    Vertices { n: usize },
    /// IV inequalities on the maximum-likelihood kernel.
    IvCheck,
    /// Posterior probability that the inequalities hold.
    Bayes,
    /// Direct-effect bounds.
    Bounds,
    /// One-sided association test per inequality.
    Wrr,
    /// Stratified test of sex and admission independent given department.
    CiTest,
    /// The Bayesian test under several symmetric priors.
    SweepPrior {
        #[arg(long, value_delimiter = ',', default_value = "0.01,1,100,100000")]
        alphas: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = error_record(&e);
            let body = match cli.opts.format {
                Format::Json => record.to_string(),
                Format::Text => format!("error ({}): {e}", e.kind()),
            };
            println!("{body}");
            eprintln!("causal-audit: {e}");
            ExitCode::FAILURE
        }
    }
}

fn error_record(e: &Error) -> Value {
    let mut record = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    if matches!(e, Error::Positivity(_) | Error::Untestable(_)) {
        record["verdict"] = json!("UNTESTABLE");
    }
    record
}

fn run(cli: &Cli) -> Result<(), Error> {
    let o = &cli.opts;
    let significance = 1.0 - o.level;
    let (value, text) = match &cli.command {
        Command::Audit { no_bayes, rejection_threshold } => {
            let config = AuditConfig {
                input: require_input(o)?.to_path_buf(),
                coding: o.coding.clone(),
                alpha: o.alpha,
                n_samples: o.samples,
                level: o.level,
                seed: o.seed,
                tolerance: o.tolerance,
                rejection_threshold: *rejection_threshold,
                bayes: !no_bayes,
            };
            let report: AuditReport = run_audit(&config)?;
            (to_value(&report), report.summary())
        }
        Command::Simulate { model, count } => return simulate(o, model, *count),
        Command::Vertices { n } => {
            let listing = run_vertices(*n)?;
            (json!(listing.lines().collect::<Vec<_>>()), listing)
        }
        Command::IvCheck => {
            let report = ml_iv_check(&load_table(o)?)?;
            (to_value(&report), slack_text(&report))
        }
        Command::Bayes => {
            let table = load_table(o)?;
            let prior = DirichletSpec::symmetric(o.alpha, table.counts().len())?;
            let report = posterior_model_probability(&table, &prior, o.samples, o.level, o.seed, o.tolerance)?;
            (to_value(&report), bayes_text(&report))
        }
        Command::Bounds => bounds(&load_table(o)?)?,
        Command::Wrr => {
            let report = wrr_test(&load_table(o)?, significance)?;
            (to_value(&report), wrr_text(&report))
        }
        Command::CiTest => {
            let report = cond_indep_test(&load_table(o)?, significance)?;
            (to_value(&report), test_text(&report))
        }
        Command::SweepPrior { alphas } => {
            let reports = prior_sweep(&load_table(o)?, alphas, o.samples, o.level, o.seed, o.tolerance)?;
            let text = reports.iter().map(bayes_text).collect::<String>();
            (to_value(&reports), text)
        }
    };
    let body = match o.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable report")),
        Format::Text => text,
    };
    write_out(o.output.as_deref(), &body)
}

fn to_value(report: &impl serde::Serialize) -> Value {
    serde_json::to_value(report).expect("serializable report")
}

fn require_input(o: &Options) -> Result<&Path, Error> {
    o.input.as_deref().ok_or_else(|| Error::Validation("--input is required for this command".into()))
}

fn load_table(o: &Options) -> Result<ContingencyTable3, Error> {
    let path = require_input(o)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_long_csv(&text, o.coding.as_ref())
}

fn write_out(path: Option<&Path>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// The CSV goes to `--output` or standard output; the summary goes to
/// standard output in the first case and standard error in the second.
fn simulate(o: &Options, model: &str, count: u64) -> Result<(), Error> {
    let sim = run_simulate(&load_model(model)?, count, o.seed)?;
    let summary = match o.format {
        Format::Json => serde_json::to_string_pretty(&to_value(&sim.summary)).expect("serializable summary"),
        Format::Text => {
            let s = &sim.summary;
            format!(
                "{} rows from a {} model, seed {}\ncoding: {}\nverdicts: {:?}",
                s.rows, s.class, s.seed, s.coding, s.verdicts
            )
        }
    };
    match &o.output {
        Some(p) => {
            write_out(Some(p), &sim.csv)?;
            println!("{summary}");
        }
        None => {
            print!("{}", sim.csv);
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn bounds(table: &ContingencyTable3) -> Result<(Value, String), Error> {
    let space = table.space();
    let joint = empirical_joint(table)?;
    let kernel = conditional_kernel(&joint)?;
    let mut text = String::new();
    let mut cde = Vec::new();
    for d in 0..space.n() {
        let b = cde_bounds(&kernel, d)?;
        let _ = writeln!(text, "CDE[{}]: [{:.4}, {:.4}]", space.d_labels()[d], b.lower, b.upper);
        cde.push(json!({ "department": space.d_labels()[d], "interval": to_value(&b) }));
    }
    let mut nde = Value::Null;
    if space.n() == 2 {
        let mut rows = Vec::new();
        for s in 0..2 {
            let b = nde_bounds_binary(&kernel, s)?;
            let (from, to) = (&space.s_labels()[s], &space.s_labels()[1 - s]);
            let _ = writeln!(text, "NDE {from} -> {to}: [{:.4}, {:.4}]", b.lower, b.upper);
            rows.push(json!({ "from_sex": from, "to_sex": to, "interval": to_value(&b) }));
        }
        nde = json!(rows);
    }
    let point = match nde_point(&joint, 0, 1) {
        Ok(v) => {
            let _ = writeln!(text, "mediation formula NDE: {v:.6}");
            json!(v)
        }
        Err(Error::Positivity(why)) => {
            let _ = writeln!(text, "mediation formula NDE: unavailable ({why})");
            Value::Null
        }
        Err(e) => return Err(e),
    };
    Ok((json!({ "cde": cde, "nde_bounds": nde, "nde_point": point }), text))
}

fn slack_text(r: &SlackReport) -> String {
    format!("max lhs {:.6}: {}\n", r.max_lhs, if r.satisfied { "satisfied" } else { "violated" })
}

fn bayes_text(r: &BayesReport) -> String {
    format!(
        "alpha {}: {}/{} compatible, {:.0}% interval [{:.9}, {:.9}]\n",
        r.prior_alpha.map_or("custom".into(), |a| a.to_string()),
        r.n_satisfying,
        r.n_samples,
        100.0 * r.level,
        r.ci_lower,
        r.ci_upper
    )
}

fn test_text(r: &TestResult) -> String {
    format!("chi2 {:.4} on {} df, p {:e}, reject: {}\n", r.statistic, r.df, r.p_value, r.reject)
}

fn wrr_text(r: &WrrReport) -> String {
    let mut out = String::new();
    for t in &r.tests {
        let _ = writeln!(
            out,
            "d={} a={}: gamma {:.4}, p {:e}, adjusted {:e}{}",
            t.d,
            t.a,
            t.gamma_hat,
            t.association_p,
            t.adjusted_p,
            if t.reject { " REJECT" } else { "" }
        );
    }
    let _ = writeln!(out, "family: {}", if r.reject { "rejected" } else { "not rejected" });
    out
}
