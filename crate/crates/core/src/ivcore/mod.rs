//! Instrumental-variable inequalities for the graph `S -> D -> A` with
//! latent `D <-> A` confounding.
//!
//! A kernel `K(d, a | s)` is compatible with such a model (no `S -> A`
//! edge) iff `max_d sum_a max_s K(d, a | s) <= 1`. The compatible kernels
//! form a polytope whose vertices are listed by [`enumerate_extreme_points`];
//! [`decompose`] writes a compatible kernel as a mixture of them and
//! [`realize`] turns the mixture into a response-function model.

pub mod lp;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tables::{CategorySpace, ConditionalKernel};

pub use lp::{lp_feasibility, lp_minimize, LpOutcome};

/// Tolerance for kernel-level assertions (decompositions, round trips).
pub const KERNEL_TOL: f64 = 1e-9;

/// One pair of inequalities for a fixed treatment value `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreatmentSlacks {
    pub d: usize,
    /// `1 - [K(d, 0 | 0) + K(d, 1 | 1)]`.
    pub slack_01: f64,
    /// `1 - [K(d, 0 | 1) + K(d, 1 | 0)]`.
    pub slack_10: f64,
}

impl TreatmentSlacks {
    pub fn min(&self) -> f64 {
        self.slack_01.min(self.slack_10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackReport {
    pub per_treatment: Vec<TreatmentSlacks>,
    pub max_lhs: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl SlackReport {
    /// Smallest of the `2n` slacks.
    pub fn min_slack(&self) -> f64 {
        self.per_treatment.iter().map(TreatmentSlacks::min).fold(f64::INFINITY, f64::min)
    }

    /// Number of inequalities with slack within `eps` of zero.
    pub fn tight_count(&self, eps: f64) -> usize {
        self.per_treatment.iter().flat_map(|t| [t.slack_01, t.slack_10]).filter(|s| s.abs() <= eps).count()
    }
}

/// `max_d sum_a max_s K(d, a | s)` for a flat `(s, d, a)` kernel array.
///
/// Same-stratum sums `K(d, 0 | s) + K(d, 1 | s)` are capped at 1: they are
/// at most 1 for any normalized kernel, and the cap keeps rounding in a
/// row sum from registering as a violation.
#[inline]
pub fn max_lhs(values: &[f64], n: usize) -> f64 {
    debug_assert_eq!(values.len(), 4 * n);
    let mut out: f64 = 0.0;
    for d in 0..n {
        let (k00, k01) = (values[2 * d], values[2 * d + 1]);
        let (k10, k11) = (values[2 * (n + d)], values[2 * (n + d) + 1]);
        let same = (k00 + k01).max(k10 + k11).min(1.0);
        out = out.max(k00 + k11).max(k10 + k01).max(same);
    }
    out
}

/// Evaluates all `2n` inequalities and the left-hand side
/// `max_d sum_a max_s K(d, a | s)`; see [`max_lhs`].
pub fn iv_slacks(kernel: &ConditionalKernel, tolerance: f64) -> SlackReport {
    let max_lhs = max_lhs(kernel.values(), kernel.n());
    let n = kernel.n();
    let per_treatment = (0..n)
        .map(|d| {
            let k = |s, a| kernel.get(s, d, a);
            TreatmentSlacks { d, slack_01: 1.0 - (k(0, 0) + k(1, 1)), slack_10: 1.0 - (k(1, 0) + k(0, 1)) }
        })
        .collect();
    SlackReport { per_treatment, max_lhs, tolerance, satisfied: max_lhs <= 1.0 + tolerance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PointKind {
    Diagonal,
    OffDiagonal,
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointKind::Diagonal => "diagonal",
            PointKind::OffDiagonal => "off-diagonal",
        })
    }
}

/// A vertex `delta(x0, y0 | 0) + delta(x1, y1 | 1)` of the compatible-kernel
/// polytope. Either `x0 != x1` (off-diagonal) or `(x0, y0) == (x1, y1)`
/// (diagonal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ExtremePoint {
    pub x0: usize,
    pub y0: u8,
    pub x1: usize,
    pub y1: u8,
}

impl ExtremePoint {
    pub fn new(x0: usize, y0: u8, x1: usize, y1: u8) -> Result<Self> {
        if y0 > 1 || y1 > 1 {
            return Err(Error::Domain("outcome values are 0 or 1".into()));
        }
        if x0 == x1 && y0 != y1 {
            return Err(Error::Domain(format!(
                "({x0},{y0}|0)+({x1},{y1}|1) is not a vertex: equal treatments need equal outcomes"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn kind(&self) -> PointKind {
        if self.x0 == self.x1 {
            PointKind::Diagonal
        } else {
            PointKind::OffDiagonal
        }
    }

    /// The kernel with unit mass on both cells.
    pub fn kernel(&self, n: usize) -> Result<ConditionalKernel> {
        if self.x0 >= n || self.x1 >= n {
            return Err(Error::Domain(format!("vertex {self} does not fit n = {n}")));
        }
        ConditionalKernel::from_fn(n, |s, d, a| {
            let hit =
                if s == 0 { (d, a) == (self.x0, self.y0 as usize) } else { (d, a) == (self.x1, self.y1 as usize) };
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Storage indices (see [`CategorySpace::index`]) of the two unit cells.
    fn cells(&self, space: &CategorySpace) -> [usize; 2] {
        [space.index(0, self.x0, self.y0 as usize), space.index(1, self.x1, self.y1 as usize)]
    }
}

impl fmt::Display for ExtremePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{},{}|0\t{},{}|1", self.kind(), self.x0, self.y0, self.x1, self.y1)
    }
}

impl FromStr for ExtremePoint {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse { line: 0, message: format!("vertex {line:?}: {why}") };
        let fields: Vec<&str> = line.trim().split('\t').collect();
        let [kind, c0, c1] = fields[..] else {
            return Err(bad("expected three tab-separated fields"));
        };
        let cell = |text: &str, z: &str| -> Result<(usize, u8)> {
            let body = text.strip_suffix(z).ok_or_else(|| bad("cell lacks its instrument suffix"))?;
            let (x, y) = body.split_once(',').ok_or_else(|| bad("cell is not x,y"))?;
            Ok((x.parse().map_err(|_| bad("bad treatment"))?, y.parse().map_err(|_| bad("bad outcome"))?))
        };
        let (x0, y0) = cell(c0, "|0")?;
        let (x1, y1) = cell(c1, "|1")?;
        let point = ExtremePoint::new(x0, y0, x1, y1)?;
        if point.kind().to_string() != kind {
            return Err(bad("kind tag does not match the cells"));
        }
        Ok(point)
    }
}

/// All `4n^2 - 2n` vertices: off-diagonal points first, each group in
/// lexicographic `(x0, y0, x1, y1)` order.
pub fn enumerate_extreme_points(n: usize) -> Result<Vec<ExtremePoint>> {
    if n < 2 {
        return Err(Error::Domain(format!("vertex enumeration needs n >= 2, got {n}")));
    }
    let mut off = Vec::with_capacity(4 * n * (n - 1));
    let mut diag = Vec::with_capacity(2 * n);
    for x0 in 0..n {
        for y0 in 0..2u8 {
            for x1 in 0..n {
                for y1 in 0..2u8 {
                    if x0 != x1 {
                        off.push(ExtremePoint { x0, y0, x1, y1 });
                    } else if y0 == y1 {
                        diag.push(ExtremePoint { x0, y0, x1, y1 });
                    }
                }
            }
        }
    }
    off.extend(diag);
    Ok(off)
}

/// A kernel written as a mixture of vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexDecomposition {
    pub n: usize,
    /// Vertices with positive weight; weights sum to 1.
    pub weights: Vec<(ExtremePoint, f64)>,
}

impl ConvexDecomposition {
    /// `sum_e lambda_e e` as a flat `(s, d, a)` array.
    pub fn reconstruct(&self) -> Vec<f64> {
        let space = CategorySpace::numeric(self.n);
        let mut out = vec![0.0; space.cells()];
        for (point, w) in &self.weights {
            for cell in point.cells(&space) {
                out[cell] += w;
            }
        }
        out
    }
}

/// Solves for vertex weights reproducing `kernel`.
///
/// Returns `Ok(None)` when no mixture exists, which happens exactly when
/// the kernel violates the IV inequalities.
pub fn decompose(kernel: &ConditionalKernel) -> Result<Option<ConvexDecomposition>> {
    let n = kernel.n();
    let points = enumerate_extreme_points(n)?;
    let space = kernel.space();
    let cells = space.cells();

    // One equality per cell plus total weight one.
    let mut a = vec![vec![0.0; points.len()]; cells + 1];
    for (j, point) in points.iter().enumerate() {
        for cell in point.cells(space) {
            a[cell][j] = 1.0;
        }
        a[cells][j] = 1.0;
    }
    let mut b = kernel.values().to_vec();
    b.push(1.0);

    let x = match lp_feasibility(&a, &b)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible { .. } => return Ok(None),
        LpOutcome::Unbounded => unreachable!("feasibility problems have no objective"),
    };
    let total: f64 = x.iter().sum();
    let weights: Vec<(ExtremePoint, f64)> =
        points.into_iter().zip(x).filter(|(_, w)| *w > 0.0).map(|(p, w)| (p, w / total)).collect();
    let decomposition = ConvexDecomposition { n, weights };
    let residual =
        decomposition.reconstruct().iter().zip(kernel.values()).map(|(r, k)| (r - k).abs()).fold(0.0, f64::max);
    if residual > KERNEL_TOL {
        return Err(Error::Numerical { message: "vertex mixture does not reproduce the kernel".into(), residual });
    }
    Ok(Some(decomposition))
}

/// A deterministic unit type: `D = r1(S)`, `A = r2(D)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResponsePair {
    pub r1: [usize; 2],
    pub r2: Vec<u8>,
}

impl ResponsePair {
    /// The response pair behind a vertex; `r2` is 0 off the two used
    /// treatments.
    pub fn from_extreme_point(point: &ExtremePoint, n: usize) -> Self {
        let mut r2 = vec![0u8; n];
        r2[point.x0] = point.y0;
        r2[point.x1] = point.y1;
        Self { r1: [point.x0, point.x1], r2 }
    }
}

/// Mixture of response pairs with an instrument distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseFunctionIVModel {
    pub n: usize,
    pub p_instrument: [f64; 2],
    pub weights: Vec<(ResponsePair, f64)>,
}

impl ResponseFunctionIVModel {
    pub fn new(n: usize, p_instrument: [f64; 2], weights: Vec<(ResponsePair, f64)>) -> Result<Self> {
        if p_instrument.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (p_instrument[0] + p_instrument[1] - 1.0).abs() > 1e-12
        {
            return Err(Error::Validation(format!("{p_instrument:?} is not a distribution")));
        }
        if weights.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation("response weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("response weights sum to {total}")));
        }
        for (pair, _) in &weights {
            if pair.r2.len() != n || pair.r1.iter().any(|&x| x >= n) || pair.r2.iter().any(|&y| y > 1) {
                return Err(Error::Validation(format!("response pair {pair:?} does not fit n = {n}")));
            }
        }
        Ok(Self { n, p_instrument, weights })
    }

    /// `P(D = d, A = a | do(S = s))`.
    pub fn induced_kernel(&self) -> ConditionalKernel {
        let space = CategorySpace::numeric(self.n);
        let mut values = vec![0.0; space.cells()];
        for (pair, w) in &self.weights {
            for s in 0..2 {
                let d = pair.r1[s];
                values[space.index(s, d, pair.r2[d] as usize)] += w;
            }
        }
        ConditionalKernel::new(space, values).expect("mixture of normalized kernels")
    }
}

/// Builds a response-function model whose interventional kernel is
/// `kernel`.
pub fn realize(kernel: &ConditionalKernel, p_instrument: [f64; 2]) -> Result<ResponseFunctionIVModel> {
    if p_instrument.iter().any(|&p| p <= 0.0) {
        return Err(Error::Positivity(format!("instrument distribution {p_instrument:?} is not strictly positive")));
    }
    let Some(decomposition) = decompose(kernel)? else {
        return Err(Error::Realization("kernel violates the IV inequalities".into()));
    };
    let n = kernel.n();
    let mut merged: std::collections::BTreeMap<ResponsePair, f64> = Default::default();
    for (point, w) in &decomposition.weights {
        *merged.entry(ResponsePair::from_extreme_point(point, n)).or_default() += w;
    }
    let total: f64 = merged.values().sum();
    let weights = merged.into_iter().map(|(p, w)| (p, w / total)).collect();
    let model = ResponseFunctionIVModel::new(n, p_instrument, weights)?;
    let residual = model.induced_kernel().max_abs_diff(kernel);
    if residual > KERNEL_TOL {
        return Err(Error::Numerical { message: "realized model does not reproduce the kernel".into(), residual });
    }
    Ok(model)
}
