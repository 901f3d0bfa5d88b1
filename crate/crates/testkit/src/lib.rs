//! Independent oracles and generators for the causal-audit test suites.

use causal_audit::bayes::{dirichlet_draw, DirichletSpec};
use causal_audit::ivcore::{lp_minimize, LpOutcome, ResponseFunctionIVModel, ResponsePair};
use causal_audit::{CategorySpace, ConditionalKernel, ContingencyTable3};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Flat index of `(s, d, a)` with `n` mediator values.
pub fn cell(n: usize, s: usize, d: usize, a: usize) -> usize {
    (s * n + d) * 2 + a
}

/// Vertices of `{K >= 0, sum_{d,a} K(d,a|s) = 1, K(d,0|0) + K(d,1|1) <= 1,
/// K(d,0|1) + K(d,1|0) <= 1}` by trying every choice of `4n - 2` active
/// inequalities. Returned sorted, as flat `(s, d, a)` arrays.
pub fn brute_force_vertices(n: usize) -> Vec<Vec<f64>> {
    let dim = 4 * n;
    let mut g: Vec<(Vec<f64>, f64)> = (0..dim)
        .map(|i| {
            let mut row = vec![0.0; dim];
            row[i] = -1.0;
            (row, 0.0)
        })
        .collect();
    for d in 0..n {
        for (a0, a1) in [(0, 1), (1, 0)] {
            let mut row = vec![0.0; dim];
            row[cell(n, 0, d, a0)] = 1.0;
            row[cell(n, 1, d, a1)] = 1.0;
            g.push((row, 1.0));
        }
    }
    let eq: Vec<Vec<f64>> =
        (0..2).map(|s| (0..dim).map(|i| if i / (2 * n) == s { 1.0 } else { 0.0 }).collect()).collect();

    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::with_capacity(dim - 2);
    combinations(g.len(), dim - 2, 0, &mut chosen, &mut |active| {
        let rows: Vec<&Vec<f64>> = active.iter().map(|&i| &g[i].0).chain(eq.iter()).collect();
        let m = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
        let rhs = DVector::from_iterator(dim, active.iter().map(|&i| g[i].1).chain([1.0, 1.0]));
        let lu = m.full_piv_lu();
        if !lu.is_invertible() {
            return;
        }
        let Some(x) = lu.solve(&rhs) else { return };
        let feasible = g.iter().all(|(row, h)| row.iter().zip(x.iter()).map(|(r, v)| r * v).sum::<f64>() <= h + 1e-9);
        if feasible {
            let point: Vec<f64> = x.iter().map(|v| (v * 1e9).round() / 1e9 + 0.0).collect();
            if !found.contains(&point) {
                found.push(point);
            }
        }
    });
    found.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    found
}

fn combinations(total: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    let need = k - chosen.len();
    for i in start..=total - need {
        chosen.push(i);
        combinations(total, k, i + 1, chosen, f);
        chosen.pop();
    }
}

/// Range of `P(A=1 | do(S=1, D=d)) - P(A=1 | do(S=0, D=d))` over all
/// mixtures of response functions `(r1: s -> d, r2: (s, d) -> a)` that
/// induce `kernel`. `None` when no mixture does.
pub fn cde_range_by_lp(kernel: &ConditionalKernel, d: usize) -> Option<(f64, f64)> {
    let n = kernel.n();
    let r2_count = 1usize << (2 * n);
    let vars = n * n * r2_count;
    let decode = |v: usize| ([v / r2_count % n, v / r2_count / n], v % r2_count);
    let bit = |r2: usize, s: usize, d: usize| (r2 >> (s * n + d)) & 1;

    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in 0..2 {
        for dd in 0..n {
            for out in 0..2 {
                a.push(
                    (0..vars)
                        .map(|v| {
                            let (r1, r2) = decode(v);
                            f64::from(u8::from(r1[s] == dd && bit(r2, s, dd) == out))
                        })
                        .collect::<Vec<_>>(),
                );
                b.push(kernel.get(s, dd, out));
            }
        }
    }
    a.push(vec![1.0; vars]);
    b.push(1.0);
    let effect: Vec<f64> = (0..vars)
        .map(|v| {
            let (_, r2) = decode(v);
            bit(r2, 1, d) as f64 - bit(r2, 0, d) as f64
        })
        .collect();
    let neg: Vec<f64> = effect.iter().map(|c| -c).collect();
    match (lp_minimize(&a, &b, &effect).ok()?, lp_minimize(&a, &b, &neg).ok()?) {
        (LpOutcome::Optimal { objective: lo, .. }, LpOutcome::Optimal { objective: hi, .. }) => Some((lo, -hi)),
        _ => None,
    }
}

/// A kernel with each stratum drawn from a symmetric Dirichlet with
/// parameter 1 (uniform) or 0.2 (near the boundary), chosen at random.
pub fn random_kernel(n: usize, rng: &mut impl Rng) -> ConditionalKernel {
    let alpha = if rng.random_bool(0.5) { 1.0 } else { 0.2 };
    dirichlet_kernel(n, alpha, rng)
}

/// A kernel uniform on the product of the two stratum simplices.
pub fn uniform_kernel(n: usize, rng: &mut impl Rng) -> ConditionalKernel {
    dirichlet_kernel(n, 1.0, rng)
}

pub fn dirichlet_kernel(n: usize, alpha: f64, rng: &mut impl Rng) -> ConditionalKernel {
    let spec = DirichletSpec::symmetric(alpha, 2 * n).expect("positive");
    let mut values = dirichlet_draw(&spec, rng);
    values.extend(dirichlet_draw(&spec, rng));
    ConditionalKernel::new(CategorySpace::numeric(n), values).expect("normalized")
}

/// A response-function model on up to six random response pairs.
pub fn random_response_model(n: usize, rng: &mut impl Rng) -> ResponseFunctionIVModel {
    let k = rng.random_range(1..=6);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw
        .into_iter()
        .map(|w| {
            let pair = ResponsePair {
                r1: [rng.random_range(0..n), rng.random_range(0..n)],
                r2: (0..n).map(|_| rng.random_range(0..2u8)).collect(),
            };
            (pair, w / total)
        })
        .collect();
    let p0 = rng.random_range(0.05..0.95);
    ResponseFunctionIVModel::new(n, [p0, 1.0 - p0], weights).expect("valid weights")
}

/// `m` records drawn independently from the cell probabilities `probs`.
pub fn sample_table(n: usize, probs: &[f64], m: u64, rng: &mut impl Rng) -> ContingencyTable3 {
    let mut counts = vec![0u64; 4 * n];
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    for _ in 0..m {
        let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
        let i = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
        counts[i] += 1;
    }
    ContingencyTable3::new(CategorySpace::numeric(n), counts).expect("valid counts")
}

/// A table with `per_stratum` records in each department where `S` and `A`
/// are drawn independently given `D`, with rates in `[0.2, 0.8]`.
pub fn independent_table(n: usize, per_stratum: u64, rng: &mut impl Rng) -> ContingencyTable3 {
    let mut counts = vec![0u64; 4 * n];
    for d in 0..n {
        let ps = rng.random_range(0.2..0.8);
        let pa = rng.random_range(0.2..0.8);
        for _ in 0..per_stratum {
            let s = usize::from(rng.random_bool(ps));
            let a = usize::from(rng.random_bool(pa));
            counts[cell(n, s, d, a)] += 1;
        }
    }
    ContingencyTable3::new(CategorySpace::numeric(n), counts).expect("valid counts")
}

/// One-sample Kolmogorov-Smirnov test against `Uniform(0, 1)`; returns the
/// asymptotic p-value.
pub fn ks_uniform_p_value(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = samples.len() as f64;
    let stat =
        samples.iter().enumerate().map(|(i, &x)| (x - i as f64 / m).max((i + 1) as f64 / m - x)).fold(0.0, f64::max);
    let lambda = (m.sqrt() + 0.12 + 0.11 / m.sqrt()) * stat;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
