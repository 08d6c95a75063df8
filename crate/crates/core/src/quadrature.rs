//! Gauss–Legendre rules, spectral differentiation on their nodes, and the
//! fixed-tree pairwise reduction every surface integral goes through.

use std::f64::consts::PI;

const NAIVE_BLOCK: usize = 128;
const PARALLEL_SPLIT: usize = 1 << 15;

/// Gauss–Legendre nodes and weights on `[lo, hi]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize, lo: f64, hi: f64) -> Self {
        assert!(m >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        for i in 0..m.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, z);
                dp = d;
                let step = p / d;
                z -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, z);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = mid - half * z;
            nodes[m - 1 - i] = mid + half * z;
            weights[i] = half * w;
            weights[m - 1 - i] = half * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=m {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    let dp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

/// Differentiation matrix of the polynomial interpolant through `nodes`
/// (row-major, `m × m`). Diagonal entries use the negative-sum identity so
/// constants differentiate to zero up to the summation roundoff.
pub fn differentiation_matrix(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    // barycentric weights in log form; products of m-1 gaps over- or
    // underflow for large m
    let mut log_w = vec![0.0; m];
    let mut sign_w = vec![1.0; m];
    for j in 0..m {
        for k in 0..m {
            if k != j {
                let d = nodes[j] - nodes[k];
                log_w[j] -= d.abs().ln();
                if d < 0.0 {
                    sign_w[j] = -sign_w[j];
                }
            }
        }
    }
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i == j {
                continue;
            }
            let ratio = sign_w[j] * sign_w[i] * (log_w[j] - log_w[i]).exp();
            let v = ratio / (nodes[i] - nodes[j]);
            d[i * m + j] = v;
            diag -= v;
        }
        d[i * m + i] = diag;
    }
    d
}

/// Pairwise (cascade) sum over a tree fixed by index order. The result is
/// bit-identical for identical input regardless of the rayon pool size.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= NAIVE_BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    if values.len() >= PARALLEL_SPLIT {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5, -1.0, 1.0);
        // degree 9 is the limit for 5 nodes
        let integral: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((integral - 2.0 / 9.0).abs() < 1e-15);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gauss_legendre_on_interval() {
        let rule = GaussLegendre::new(64, 0.0, PI);
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.sin())
            .sum();
        assert!((s - 2.0).abs() < 1e-14);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - PI).abs() < 1e-13);
        let big = GaussLegendre::new(200, -1.0, 1.0);
        assert!(big.weights.iter().all(|w| w.is_finite() && *w > 0.0));
    }

    #[test]
    fn differentiation_is_exact_on_polynomials() {
        let rule = GaussLegendre::new(12, 0.0, 2.0);
        let d = differentiation_matrix(&rule.nodes);
        let m = rule.len();
        let f: Vec<f64> = rule.nodes.iter().map(|x| x.powi(5) - 3.0 * x).collect();
        for i in 0..m {
            let df: f64 = (0..m).map(|j| d[i * m + j] * f[j]).sum();
            let x = rule.nodes[i];
            assert!((df - (5.0 * x.powi(4) - 3.0)).abs() < 1e-10, "{df}");
        }
    }

    #[test]
    fn differentiation_of_smooth_periodic_function() {
        let rule = GaussLegendre::new(64, 0.0, 2.0 * PI);
        let d = differentiation_matrix(&rule.nodes);
        let m = rule.len();
        let f: Vec<f64> = rule.nodes.iter().map(|x| x.cos()).collect();
        let worst = (0..m)
            .map(|i| {
                let df: f64 = (0..m).map(|j| d[i * m + j] * f[j]).sum();
                (df + rule.nodes[i].sin()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn pairwise_sum_matches_exact_integers() {
        let v: Vec<f64> = (0..100_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 4_999_950_000.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pairwise_sum_is_thread_count_independent() {
        let v: Vec<f64> = (0..200_000).map(|i| ((i * 37) as f64).sin() * 1e-3).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| pairwise_sum(&v));
        let b = four.install(|| pairwise_sum(&v));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
