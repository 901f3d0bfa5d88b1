//! Three-variable categorical data: protected attribute `S`, mediator `D`
//! and outcome `A`.
//!
//! Every array in this module is laid out `(s, d, a)` with `a` varying
//! fastest, so cell `(s, d, a)` lives at `(s * n + d) * 2 + a` where `n` is
//! the number of mediator values. Counts, joint probabilities and the
//! conditional kernel `K(d, a | s)` all share this layout.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Exact header line required by [`parse_long_csv`].
pub const CSV_HEADER: &str = "sex,department,admitted,count";

/// Normalization tolerance for joint distributions and kernel rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Placeholder label for a binary category that never occurs in the data.
const UNOBSERVED: &str = "(unobserved)";

/// Labels and index coding for the three variables.
///
/// `s_labels[0]` is coded `s = 0`; `a_labels[0]` is coded `a = 0` (reject)
/// and `a_labels[1]` is `a = 1` (accept).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategorySpace {
    s_labels: [String; 2],
    d_labels: Vec<String>,
    a_labels: [String; 2],
}

impl CategorySpace {
    pub fn new(s_labels: [String; 2], d_labels: Vec<String>, a_labels: [String; 2]) -> Result<Self> {
        if d_labels.is_empty() {
            return Err(Error::Schema("at least one mediator label is required".into()));
        }
        check_distinct("sex", s_labels.iter())?;
        check_distinct("department", d_labels.iter())?;
        check_distinct("admitted", a_labels.iter())?;
        Ok(Self { s_labels, d_labels, a_labels })
    }

    /// Space with labels `0`/`1` for `S` and `A` and `d0 .. d{n-1}` for `D`.
    pub fn numeric(n: usize) -> Self {
        assert!(n >= 1, "mediator must have at least one value");
        Self {
            s_labels: ["0".into(), "1".into()],
            d_labels: (0..n).map(|d| format!("d{d}")).collect(),
            a_labels: ["0".into(), "1".into()],
        }
    }

    /// Number of mediator values `n`.
    pub fn n(&self) -> usize {
        self.d_labels.len()
    }

    /// Number of `(s, d, a)` cells, `4n`.
    pub fn cells(&self) -> usize {
        4 * self.n()
    }

    #[inline]
    pub fn index(&self, s: usize, d: usize, a: usize) -> usize {
        debug_assert!(s < 2 && d < self.n() && a < 2);
        (s * self.n() + d) * 2 + a
    }

    pub fn s_labels(&self) -> &[String; 2] {
        &self.s_labels
    }

    pub fn d_labels(&self) -> &[String] {
        &self.d_labels
    }

    pub fn a_labels(&self) -> &[String; 2] {
        &self.a_labels
    }

    /// Iterates all `(s, d, a)` triples in storage order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let n = self.n();
        (0..2).flat_map(move |s| (0..n).flat_map(move |d| (0..2).map(move |a| (s, d, a))))
    }
}

fn check_distinct<'a>(what: &str, labels: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::Schema(format!("duplicate {what} label {label:?}")));
        }
    }
    Ok(())
}

/// User-pinned label order for any of the three columns.
///
/// Parsed from strings such as
/// `sex=male,female;admitted=rejected,admitted;department=A,B,C`. Columns
/// that are not mentioned fall back to first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coding {
    pub sex: Option<[String; 2]>,
    pub department: Option<Vec<String>>,
    pub admitted: Option<[String; 2]>,
}

impl FromStr for Coding {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut coding = Coding::default();
        for clause in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (key, values) = clause
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("coding clause {clause:?} lacks '='")))?;
            let labels: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            if labels.iter().any(String::is_empty) {
                return Err(Error::Validation(format!("empty label in coding clause {clause:?}")));
            }
            match key.trim() {
                "sex" => coding.sex = Some(binary_labels("sex", labels)?),
                "admitted" => coding.admitted = Some(binary_labels("admitted", labels)?),
                "department" => {
                    check_distinct("department", labels.iter())?;
                    coding.department = Some(labels);
                }
                other => return Err(Error::Validation(format!("unknown coding column {other:?}"))),
            }
        }
        Ok(coding)
    }
}

impl fmt::Display for Coding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut clauses = Vec::new();
        if let Some(sex) = &self.sex {
            clauses.push(format!("sex={}", sex.join(",")));
        }
        if let Some(dept) = &self.department {
            clauses.push(format!("department={}", dept.join(",")));
        }
        if let Some(adm) = &self.admitted {
            clauses.push(format!("admitted={}", adm.join(",")));
        }
        f.write_str(&clauses.join(";"))
    }
}

impl Coding {
    /// Coding that pins every label of `space` to its current index.
    pub fn of_space(space: &CategorySpace) -> Self {
        Self {
            sex: Some(space.s_labels.clone()),
            department: Some(space.d_labels.clone()),
            admitted: Some(space.a_labels.clone()),
        }
    }
}

fn binary_labels(what: &str, labels: Vec<String>) -> Result<[String; 2]> {
    check_distinct(what, labels.iter())?;
    <[String; 2]>::try_from(labels)
        .map_err(|l| Error::Schema(format!("{what} coding needs exactly 2 labels, got {}", l.len())))
}

/// Integer counts over `(s, d, a)`.
///
/// A table may have zero total (used for prior-only analyses); operations
/// that need data report [`Error::EmptyData`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable3 {
    space: CategorySpace,
    counts: Vec<u64>,
    total: u64,
}

impl ContingencyTable3 {
    pub fn new(space: CategorySpace, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != space.cells() {
            return Err(Error::DimensionMismatch { expected: space.cells(), actual: counts.len() });
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::Validation("total count overflows u64".into()))?;
        Ok(Self { space, counts, total })
    }

    /// Table over [`CategorySpace::numeric`] filled by `f(s, d, a)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> u64) -> Self {
        let space = CategorySpace::numeric(n);
        let counts = space.triples().map(|(s, d, a)| f(s, d, a)).collect();
        Self::new(space, counts).expect("consistent dimensions")
    }

    pub fn space(&self) -> &CategorySpace {
        &self.space
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, s: usize, d: usize, a: usize) -> u64 {
        self.counts[self.space.index(s, d, a)]
    }

    /// Number of records with `S = s`.
    pub fn stratum_total(&self, s: usize) -> u64 {
        let n = self.space.n();
        self.counts[s * 2 * n..(s + 1) * 2 * n].iter().sum()
    }

    /// Number of records with `S = s, D = d`.
    pub fn sd_total(&self, s: usize, d: usize) -> u64 {
        self.count(s, d, 0) + self.count(s, d, 1)
    }

    /// Serializes every cell (zeros included) in storage order, so parsing
    /// the output without a coding reproduces the same label order.
    pub fn to_long_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        writer.write_record(CSV_HEADER.split(',')).expect("writing to memory");
        for (s, d, a) in self.space.triples() {
            let count = self.count(s, d, a).to_string();
            writer
                .write_record([
                    self.space.s_labels[s].as_str(),
                    self.space.d_labels[d].as_str(),
                    self.space.a_labels[a].as_str(),
                    count.as_str(),
                ])
                .expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 labels")
    }
}

/// Label order under construction: either pinned by a coding or grown by
/// first appearance.
struct LabelIndex {
    column: &'static str,
    labels: Vec<String>,
    lookup: HashMap<String, usize>,
    pinned: bool,
    max: Option<usize>,
}

impl LabelIndex {
    fn new(column: &'static str, pinned: Option<Vec<String>>, max: Option<usize>) -> Self {
        let (labels, was_pinned) = match pinned {
            Some(labels) => (labels, true),
            None => (Vec::new(), false),
        };
        let lookup = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self { column, labels, lookup, pinned: was_pinned, max }
    }

    fn index_of(&mut self, label: &str, line: u64) -> Result<usize> {
        if let Some(&i) = self.lookup.get(label) {
            return Ok(i);
        }
        if self.pinned {
            return Err(Error::Schema(format!(
                "line {line}: {} label {label:?} is not in the supplied coding",
                self.column
            )));
        }
        if let Some(max) = self.max {
            if self.labels.len() == max {
                return Err(Error::Schema(format!(
                    "line {line}: more than {max} distinct {} labels (saw {:?} after {:?})",
                    self.column, label, self.labels
                )));
            }
        }
        self.lookup.insert(label.to_string(), self.labels.len());
        self.labels.push(label.to_string());
        Ok(self.labels.len() - 1)
    }

    fn into_binary(self) -> [String; 2] {
        let mut labels = self.labels;
        while labels.len() < 2 {
            let mut filler = format!("{UNOBSERVED} {}", self.column);
            if labels.contains(&filler) {
                filler.push('#');
            }
            labels.push(filler);
        }
        [labels[0].clone(), labels[1].clone()]
    }
}

/// Parses the long CSV format `sex,department,admitted,count`.
///
/// Repeated `(s, d, a)` rows accumulate. Cells that never appear are zero.
/// Without a coding, labels are indexed by first appearance; a binary
/// column with a single observed label gets a placeholder second label.
pub fn parse_long_csv(text: &str, coding: Option<&Coding>) -> Result<ContingencyTable3> {
    let first_line = text.lines().next().unwrap_or("").trim_end_matches('\r');
    let first_line = first_line.strip_prefix('\u{feff}').unwrap_or(first_line);
    if first_line != CSV_HEADER {
        return Err(Error::Parse { line: 1, message: format!("expected header {CSV_HEADER:?}, found {first_line:?}") });
    }

    let coding = coding.cloned().unwrap_or_default();
    let mut sex = LabelIndex::new("sex", coding.sex.map(Vec::from), Some(2));
    let mut dept = LabelIndex::new("department", coding.department, None);
    let mut admitted = LabelIndex::new("admitted", coding.admitted.map(Vec::from), Some(2));

    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(text.as_bytes());
    let mut cells: Vec<(usize, usize, usize, u64)> = Vec::new();
    for record in reader.records() {
        let record = record
            .map_err(|e| Error::Parse { line: e.position().map(|p| p.line()).unwrap_or(0), message: e.to_string() })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(Error::Parse { line, message: format!("expected 4 fields, found {}", record.len()) });
        }
        let raw_count = record[3].trim();
        let count: u64 = match raw_count.parse::<i128>() {
            Ok(c) if c < 0 => {
                return Err(Error::Validation(format!("line {line}: negative count {c}")));
            }
            Ok(c) => u64::try_from(c).map_err(|_| Error::Parse { line, message: format!("count {c} is too large") })?,
            Err(_) => {
                return Err(Error::Parse { line, message: format!("count {raw_count:?} is not an integer") });
            }
        };
        let s = sex.index_of(&record[0], line)?;
        let d = dept.index_of(&record[1], line)?;
        let a = admitted.index_of(&record[2], line)?;
        cells.push((s, d, a, count));
    }

    if dept.labels.is_empty() {
        return Err(Error::Schema("no department labels: the file has no data rows".into()));
    }
    let space = CategorySpace::new(sex.into_binary(), dept.labels, admitted.into_binary())?;
    let mut counts = vec![0u64; space.cells()];
    for (s, d, a, c) in cells {
        let slot = &mut counts[space.index(s, d, a)];
        *slot = slot.checked_add(c).ok_or_else(|| Error::Validation("cell count overflows u64".into()))?;
    }
    ContingencyTable3::new(space, counts)
}

/// A probability distribution over `(s, d, a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    space: CategorySpace,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(space: CategorySpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.cells() {
            return Err(Error::DimensionMismatch { expected: space.cells(), actual: probs.len() });
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Validation(format!("probability {p} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { space, probs })
    }

    /// Builds `P(s) K(d, a | s)`.
    pub fn from_kernel(kernel: &ConditionalKernel, p_s: [f64; 2]) -> Result<Self> {
        let space = kernel.space().clone();
        let probs = space.triples().map(|(s, d, a)| p_s[s] * kernel.get(s, d, a)).collect();
        Self::new(space, probs)
    }

    pub fn space(&self) -> &CategorySpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, s: usize, d: usize, a: usize) -> f64 {
        self.probs[self.space.index(s, d, a)]
    }

    /// `P(S = s)`.
    pub fn p_s(&self, s: usize) -> f64 {
        let n = self.space.n();
        self.probs[s * 2 * n..(s + 1) * 2 * n].iter().sum()
    }

    /// `P(S = s, D = d)`.
    pub fn p_sd(&self, s: usize, d: usize) -> f64 {
        self.prob(s, d, 0) + self.prob(s, d, 1)
    }

    /// `P(D = d)`.
    pub fn p_d(&self, d: usize) -> f64 {
        self.p_sd(0, d) + self.p_sd(1, d)
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        max_abs_diff(&self.probs, &other.probs)
    }
}

/// The Markov kernel `K(d, a | s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalKernel {
    space: CategorySpace,
    kernel: Vec<f64>,
}

impl ConditionalKernel {
    pub fn new(space: CategorySpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.cells() {
            return Err(Error::DimensionMismatch { expected: space.cells(), actual: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("kernel entry {v} is negative or not finite")));
        }
        let half = space.cells() / 2;
        for s in 0..2 {
            let row: f64 = values[s * half..(s + 1) * half].iter().sum();
            if (row - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Validation(format!("kernel row s={s} sums to {row}, not 1")));
            }
        }
        Ok(Self { space, kernel: values })
    }

    /// Kernel over [`CategorySpace::numeric`] with entries `f(s, d, a)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let space = CategorySpace::numeric(n);
        let values = space.triples().map(|(s, d, a)| f(s, d, a)).collect();
        Self::new(space, values)
    }

    /// `K(d, a | s) = 1 / 2n` everywhere.
    pub fn uniform(n: usize) -> Self {
        let w = 1.0 / (2 * n) as f64;
        Self::from_fn(n, |_, _, _| w).expect("uniform kernel is normalized")
    }

    pub fn space(&self) -> &CategorySpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.kernel
    }

    /// `K(D = d, A = a | S = s)`.
    #[inline]
    pub fn get(&self, s: usize, d: usize, a: usize) -> f64 {
        self.kernel[self.space.index(s, d, a)]
    }

    /// `K(A = a | S = s)`, marginalizing the mediator.
    pub fn outcome_given_s(&self, s: usize, a: usize) -> f64 {
        (0..self.n()).map(|d| self.get(s, d, a)).sum()
    }

    /// The kernel with the roles of `s = 0` and `s = 1` exchanged.
    pub fn swap_s(&self) -> Self {
        let values = self.space.triples().map(|(s, d, a)| self.get(1 - s, d, a)).collect();
        Self { space: self.space.clone(), kernel: values }
    }

    pub fn max_abs_diff(&self, other: &ConditionalKernel) -> f64 {
        max_abs_diff(&self.kernel, &other.kernel)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "comparing arrays of different shapes");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Maximum-likelihood joint: `counts / total`.
pub fn empirical_joint(table: &ContingencyTable3) -> Result<JointDistribution> {
    if table.total() == 0 {
        return Err(Error::EmptyData);
    }
    let total = table.total() as f64;
    let probs = table.counts().iter().map(|&c| c as f64 / total).collect();
    JointDistribution::new(table.space().clone(), probs)
}

/// Conditions the joint on `S`, giving `K(d, a | s) = P(s, d, a) / P(s)`.
pub fn conditional_kernel(joint: &JointDistribution) -> Result<ConditionalKernel> {
    let space = joint.space().clone();
    let p_s = [joint.p_s(0), joint.p_s(1)];
    for (s, p) in p_s.iter().enumerate() {
        if *p <= 0.0 {
            return Err(Error::Positivity(format!(
                "P(S = {:?}) = 0; the kernel is undefined for this stratum",
                space.s_labels()[s]
            )));
        }
    }
    let values = space.triples().map(|(s, d, a)| joint.prob(s, d, a) / p_s[s]).collect();
    // Row sums of a conditioned joint are 1 up to a few ulps, but the sum
    // check in `new` uses the same tolerance, so build directly.
    Ok(ConditionalKernel { space, kernel: values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(rows: &[&str]) -> String {
        std::iter::once(CSV_HEADER).chain(rows.iter().copied()).collect::<Vec<_>>().join("\n")
    }

    #[test]
    fn single_row_accumulates() {
        let table = parse_long_csv(&csv(&["male,A,yes,512"]), None).unwrap();
        assert_eq!(table.total(), 512);
        assert_eq!(table.counts().iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(table.count(0, 0, 0), 512);
    }

    #[test]
    fn repeated_cells_add() {
        let table = parse_long_csv(&csv(&["m,A,y,3", "f,A,n,1", "m,A,y,4"]), None).unwrap();
        assert_eq!(table.count(0, 0, 0), 7);
        assert_eq!(table.total(), 8);
    }

    #[test]
    fn header_must_match_exactly() {
        let err = parse_long_csv("sex,dept,admitted,count\nm,A,y,1", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_long_csv(&csv(&["m,A,y,1", "m,A,y"]), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_long_csv(&csv(&["m,A,y,1", "m,A,y,1", "m,B,n,x"]), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn negative_count_is_a_validation_error() {
        let err = parse_long_csv(&csv(&["m,A,y,-3"]), None).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn third_sex_label_is_a_schema_error() {
        let err = parse_long_csv(&csv(&["m,A,y,1", "f,A,y,1", "x,A,y,1"]), None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        let err = parse_long_csv(&csv(&["m,A,y,1", "m,A,n,1", "m,A,maybe,1"]), None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn coding_pins_indices() {
        let coding: Coding = "sex=f,m;admitted=n,y".parse().unwrap();
        let table = parse_long_csv(&csv(&["m,A,y,5", "f,B,n,2"]), Some(&coding)).unwrap();
        assert_eq!(table.space().s_labels(), &["f".to_string(), "m".to_string()]);
        assert_eq!(table.count(1, 0, 1), 5);
        assert_eq!(table.count(0, 1, 0), 2);
        let err = parse_long_csv(&csv(&["q,A,y,5"]), Some(&coding)).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn coding_round_trips_through_display() {
        let coding: Coding = "sex=a,b;department=x,y,z;admitted=0,1".parse().unwrap();
        assert_eq!(coding.to_string().parse::<Coding>().unwrap(), coding);
        assert!("sex=a".parse::<Coding>().is_err());
        assert!("colour=red,blue".parse::<Coding>().is_err());
    }

    #[test]
    fn csv_round_trip_preserves_counts() {
        let table = parse_long_csv(&csv(&["m,A,y,5", "f,B,n,2", "f,A,y,9"]), None).unwrap();
        let again = parse_long_csv(&table.to_long_csv(), None).unwrap();
        assert_eq!(again, table);
    }

    #[test]
    fn empirical_joint_examples() {
        let table = ContingencyTable3::from_fn(2, |_, d, a| u64::from((d, a) == (0, 0)));
        let joint = empirical_joint(&table).unwrap();
        assert_eq!(joint.prob(0, 0, 0), 0.5);
        assert_eq!(joint.prob(1, 0, 0), 0.5);
        assert_eq!(joint.probs().iter().filter(|&&p| p == 0.0).count(), 6);

        let point = ContingencyTable3::from_fn(3, |s, d, a| if (s, d, a) == (1, 2, 0) { 11 } else { 0 });
        let joint = empirical_joint(&point).unwrap();
        assert_eq!(joint.prob(1, 2, 0), 1.0);

        let empty = ContingencyTable3::from_fn(2, |_, _, _| 0);
        assert_eq!(empirical_joint(&empty).unwrap_err(), Error::EmptyData);
    }

    #[test]
    fn kernel_of_uniform_joint_is_uniform() {
        let n = 5;
        let joint = JointDistribution::new(CategorySpace::numeric(n), vec![1.0 / 20.0; 20]).unwrap();
        let kernel = conditional_kernel(&joint).unwrap();
        for v in kernel.values() {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_stratum_is_a_positivity_error() {
        let table = ContingencyTable3::from_fn(2, |s, _, _| if s == 0 { 3 } else { 0 });
        let joint = empirical_joint(&table).unwrap();
        let err = conditional_kernel(&joint).unwrap_err();
        assert!(matches!(err, Error::Positivity(msg) if msg.contains("\"1\"")));
    }

    #[test]
    fn kernel_validation() {
        assert!(ConditionalKernel::from_fn(2, |_, _, _| 0.3).is_err());
        assert!(ConditionalKernel::from_fn(2, |s, d, a| if s == 0 && d == 0 && a == 0 {
            1.0
        } else if s == 1 {
            0.25
        } else {
            0.0
        })
        .is_ok());
        assert!(ConditionalKernel::from_fn(1, |_, _, a| if a == 0 { -0.5 } else { 1.5 }).is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = CategorySpace::new(["m".into(), "m".into()], vec!["A".into()], ["0".into(), "1".into()]);
        assert!(err.is_err());
    }
}
