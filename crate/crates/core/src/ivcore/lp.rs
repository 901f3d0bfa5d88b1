//! Dense two-phase tableau simplex for `A x = b, x >= 0`.
//!
//! Entering and leaving variables follow Bland's rule, so the method
//! terminates on degenerate problems. Intended for the small dense systems
//! arising from kernel decompositions (a few hundred columns at most).

use crate::error::{Error, Result};

/// Reduced costs and pivot entries below this magnitude count as zero.
const PIVOT_EPS: f64 = 1e-11;
/// Phase-one optimum above this value certifies infeasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// A basic feasible solution; `objective` is `c . x` (0 for pure
    /// feasibility problems).
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// The phase-one optimum, the minimum total constraint violation.
    Infeasible {
        phase_one: f64,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// Finds some `x >= 0` with `A x = b`.
pub fn lp_feasibility(a: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome> {
    solve(a, b, None)
}

/// Minimizes `c . x` subject to `A x = b, x >= 0`.
pub fn lp_minimize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpOutcome> {
    solve(a, b, Some(c))
}

fn solve(a: &[Vec<f64>], b: &[f64], cost: Option<&[f64]>) -> Result<LpOutcome> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: b.len() });
    }
    let n = a.first().map_or(0, Vec::len);
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
    }
    if let Some(c) = cost {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: c.len() });
        }
    }
    let finite = a.iter().flatten().chain(b).chain(cost.into_iter().flatten());
    if finite.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("LP data must be finite".into()));
    }

    let mut tab = Tableau::new(a, b);
    let cap = 10_000 + 200 * (m + n);

    // Phase one: minimize the sum of artificials.
    let mut phase_one_cost = vec![0.0; n + m];
    phase_one_cost[n..].iter_mut().for_each(|c| *c = 1.0);
    tab.set_objective(&phase_one_cost);
    if tab.optimize(n + m, cap)? == Step::Unbounded {
        // The phase-one objective is bounded below by zero.
        return Err(Error::Numerical { message: "phase one reported unbounded".into(), residual: f64::NAN });
    }
    let phase_one: f64 =
        tab.basis.iter().zip(&tab.rows).filter(|(&j, _)| j >= n).map(|(_, row)| row[tab.width - 1]).sum();
    if phase_one > FEASIBILITY_TOL {
        return Ok(LpOutcome::Infeasible { phase_one });
    }
    tab.expel_artificials(n);

    let objective_cost: Vec<f64> = match cost {
        Some(c) => c.iter().copied().chain(std::iter::repeat_n(0.0, m)).collect(),
        None => vec![0.0; n + m],
    };
    if cost.is_some() {
        tab.set_objective(&objective_cost);
        if tab.optimize(n, cap)? == Step::Unbounded {
            return Ok(LpOutcome::Unbounded);
        }
    }

    let mut x = vec![0.0; n];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < n {
            x[j] = tab.rows[i][tab.width - 1].max(0.0);
        }
    }
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, bi)| (row.iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    if residual > FEASIBILITY_TOL {
        return Err(Error::Numerical { message: "simplex solution fails the equality check".into(), residual });
    }
    let objective = cost.map_or(0.0, |c| c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum());
    Ok(LpOutcome::Optimal { x, objective })
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced costs over all columns.
    reduced: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    /// Builds `[A | I | b]` with rows negated where `b < 0`.
    fn new(a: &[Vec<f64>], b: &[f64]) -> Self {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        let width = n + m + 1;
        let rows = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(i, (row, &bi))| {
                let sign = if bi < 0.0 { -1.0 } else { 1.0 };
                let mut t = vec![0.0; width];
                for (dst, &v) in t.iter_mut().zip(row) {
                    *dst = sign * v;
                }
                t[n + i] = 1.0;
                t[width - 1] = sign * bi;
                t
            })
            .collect();
        Self { rows, reduced: vec![0.0; width - 1], basis: (n..n + m).collect(), width }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.reduced.copy_from_slice(cost);
        for (row, &j) in self.rows.iter().zip(&self.basis) {
            let cb = cost[j];
            if cb != 0.0 {
                for (r, v) in self.reduced.iter_mut().zip(row) {
                    *r -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v *= inv);
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.reduced[c];
        if f != 0.0 {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations with entering columns restricted to
    /// `0..columns`.
    fn optimize(&mut self, columns: usize, cap: usize) -> Result<Step> {
        for _ in 0..cap {
            let Some(enter) = (0..columns).find(|&j| self.reduced[j] < -PIVOT_EPS) else {
                return Ok(Step::Optimal);
            };
            let rhs = self.width - 1;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter] > PIVOT_EPS {
                    let ratio = row[rhs].max(0.0) / row[enter];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => ratio < best || (ratio == best && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(Step::Unbounded),
            }
        }
        Err(Error::Numerical { message: format!("simplex exceeded {cap} iterations"), residual: f64::NAN })
    }

    /// Pivots zero-level artificials out of the basis; rows where no
    /// original column can replace them are linearly dependent and dropped.
    fn expel_artificials(&mut self, n: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < n {
                i += 1;
                continue;
            }
            let best = (0..n)
                .map(|j| (j, self.rows[i][j].abs()))
                .filter(|&(_, v)| v > 1e-9)
                .max_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((j, _)) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
