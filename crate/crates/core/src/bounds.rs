//! Bounds on direct effects of `S` on `A` from the kernel `K(d, a | s)`.
//!
//! The CDE bounds hold for every model with `D`-`A` confounding; the
//! mediation formula gives the NDE only when there is no confounding.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tables::{ConditionalKernel, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectInterval {
    pub lower: f64,
    pub upper: f64,
    pub contains_zero: bool,
}

impl EffectInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper, contains_zero: lower <= 0.0 && 0.0 <= upper }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Bounds on `P(A=1 | do(S=1, D=d)) - P(A=1 | do(S=0, D=d))`.
pub fn cde_bounds(kernel: &ConditionalKernel, d: usize) -> Result<EffectInterval> {
    if d >= kernel.n() {
        return Err(Error::Domain(format!("department index {d} is out of range 0..{}", kernel.n())));
    }
    let k = |s, a| kernel.get(s, d, a);
    Ok(EffectInterval::new(k(1, 1) + k(0, 0) - 1.0, 1.0 - k(1, 0) - k(0, 1)))
}

/// Every per-department CDE interval contains zero.
pub fn cde_zero_compatible(kernel: &ConditionalKernel) -> bool {
    (0..kernel.n()).all(|d| cde_bounds(kernel, d).expect("in range").contains_zero)
}

/// `sum_d (P(A=1 | d, s') - P(A=1 | d, s)) P(d | s)`.
///
/// Equals the natural direct effect of switching `S` from `s` to `s'` in
/// models without confounding; requires `P(s, d) > 0` everywhere.
pub fn nde_point(joint: &JointDistribution, s: usize, s_prime: usize) -> Result<f64> {
    if s > 1 || s_prime > 1 {
        return Err(Error::Domain("sex indices are 0 and 1".into()));
    }
    let space = joint.space();
    let n = space.n();
    for (ss, d) in (0..2).flat_map(|ss| (0..n).map(move |d| (ss, d))) {
        if joint.p_sd(ss, d) <= 0.0 {
            return Err(Error::Positivity(format!(
                "P(sex={:?}, department={:?}) = 0",
                space.s_labels()[ss],
                space.d_labels()[d]
            )));
        }
    }
    let accept = |s: usize, d: usize| joint.prob(s, d, 1) / joint.p_sd(s, d);
    Ok((0..n).map(|d| (accept(s_prime, d) - accept(s, d)) * joint.p_sd(s, d) / joint.p_s(s)).sum())
}

/// Closed-form NDE bounds for binary `D` under `D`-`A` confounding, switching
/// `S` from `s_from` to `1 - s_from`.
///
/// Terms read as `P(A=a, D=d | S=s)`. `lower > upper` signals a kernel that
/// no confounded model produces.
pub fn nde_bounds_binary(kernel: &ConditionalKernel, s_from: usize) -> Result<EffectInterval> {
    if kernel.n() != 2 {
        return Err(Error::Domain(format!("NDE bounds need two departments, found {}", kernel.n())));
    }
    let k = |a, d, s| kernel.get(s, d, a);
    let (lower, upper) = match s_from {
        0 => (
            [
                kernel.outcome_given_s(0, 0) - 1.0,
                k(0, 0, 0) - k(1, 1, 0) + k(1, 0, 1) - 1.0,
                k(0, 1, 0) - k(1, 0, 0) + k(1, 1, 1) - 1.0,
            ],
            [
                1.0 - kernel.outcome_given_s(0, 1),
                1.0 + k(0, 1, 0) - k(1, 0, 0) - k(0, 0, 1),
                1.0 + k(0, 0, 0) - k(1, 1, 0) - k(0, 1, 1),
            ],
        ),
        1 => (
            [
                kernel.outcome_given_s(1, 0) - 1.0,
                k(1, 0, 0) - k(1, 1, 1) + k(0, 0, 1) - 1.0,
                k(1, 1, 0) - k(1, 0, 1) + k(0, 1, 1) - 1.0,
            ],
            [
                1.0 - kernel.outcome_given_s(1, 1),
                1.0 + k(0, 0, 1) - k(0, 1, 0) - k(1, 1, 1),
                1.0 + k(0, 1, 1) - k(0, 0, 0) - k(1, 0, 1),
            ],
        ),
        other => return Err(Error::Domain(format!("sex index {other} is not 0 or 1"))),
    };
    Ok(EffectInterval::new(
        lower.into_iter().fold(f64::NEG_INFINITY, f64::max),
        upper.into_iter().fold(f64::INFINITY, f64::min),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivcore::iv_slacks;
    use crate::tables::CategorySpace;

    fn kernel_at(n: usize, cells: &[((usize, usize, usize), f64)]) -> ConditionalKernel {
        ConditionalKernel::from_fn(n, |s, d, a| cells.iter().find(|(c, _)| *c == (s, d, a)).map_or(0.0, |(_, v)| *v))
            .unwrap()
    }

    #[test]
    fn cde_extremes() {
        let k = kernel_at(2, &[((1, 0, 1), 1.0), ((0, 0, 0), 1.0)]);
        let b = cde_bounds(&k, 0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(!b.contains_zero);
        let b = cde_bounds(&k, 1).unwrap();
        assert_eq!((b.lower, b.upper), (-1.0, 1.0));
        assert!(cde_bounds(&k, 2).is_err());
    }

    #[test]
    fn cde_four_masses() {
        // K(d,1|1)=0.3, K(d,0|0)=0.4, K(d,0|1)=0.2, K(d,1|0)=0.1
        let k = kernel_at(
            2,
            &[
                ((1, 0, 1), 0.3),
                ((0, 0, 0), 0.4),
                ((1, 0, 0), 0.2),
                ((0, 0, 1), 0.1),
                ((1, 1, 1), 0.5),
                ((0, 1, 1), 0.5),
            ],
        );
        let b = cde_bounds(&k, 0).unwrap();
        assert!((b.lower + 0.3).abs() < 1e-15 && (b.upper - 0.7).abs() < 1e-15, "{b:?}");
    }

    #[test]
    fn zero_compatibility_matches_slacks() {
        assert!(cde_zero_compatible(&ConditionalKernel::uniform(4)));
        let bad = kernel_at(2, &[((0, 0, 0), 1.0), ((1, 0, 1), 1.0)]);
        assert!(!cde_zero_compatible(&bad));
        assert!(!iv_slacks(&bad, 0.0).satisfied);
    }

    #[test]
    fn nde_cancels_across_departments() {
        // Department 0 favors s'=1 by 0.2, department 1 favors s=0 by 0.2.
        let rates = [[0.4, 0.6], [0.6, 0.4]];
        let space = CategorySpace::numeric(2);
        let probs = space
            .triples()
            .map(|(s, d, a)| 0.125 * 2.0 * if a == 1 { rates[s][d] } else { 1.0 - rates[s][d] })
            .collect();
        let joint = JointDistribution::new(space, probs).unwrap();
        assert!(nde_point(&joint, 0, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn nde_requires_positivity() {
        let space = CategorySpace::numeric(2);
        let probs = space.triples().map(|(_, d, _)| if d == 0 { 0.25 } else { 0.0 }).collect();
        let joint = JointDistribution::new(space, probs).unwrap();
        assert!(matches!(nde_point(&joint, 0, 1), Err(Error::Positivity(m)) if m.contains("department=\"d1\"")));
    }

    #[test]
    fn nde_bounds_first_terms() {
        let k = kernel_at(2, &[((0, 0, 1), 0.5), ((0, 1, 1), 0.5), ((1, 0, 0), 1.0)]);
        let b = nde_bounds_binary(&k, 0).unwrap();
        assert!(b.lower >= -1.0 && b.upper <= 0.0);
        assert!(nde_bounds_binary(&ConditionalKernel::uniform(3), 0).is_err());
        assert!(nde_bounds_binary(&k, 2).is_err());
    }

    #[test]
    fn nde_bounds_contain_zero_for_uniform() {
        for s in 0..2 {
            assert!(nde_bounds_binary(&ConditionalKernel::uniform(2), s).unwrap().contains_zero);
        }
    }
}
