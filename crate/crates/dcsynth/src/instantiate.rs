//! Instantiation: numerical minimization of a cost over a fixed template.
//!
//! Multistart local optimization. Start 0 is all-zeros (catching
//! near-identity solutions); the remaining starts draw uniformly from
//! [−π, π]. Starts run in fixed-size parallel batches so results are
//! deterministic for a given seed regardless of thread scheduling.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::circuit::DynamicCircuit;
use crate::cost::{fd_gradient, CostSpec};

const BATCH: usize = 4;
const COST_STOP: f64 = 1e-13;
const GRAD_STOP: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    #[serde(rename = "quasi-newton-fd")]
    QuasiNewtonFd,
    #[serde(rename = "nelder-mead")]
    NelderMead,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstantiateConfig {
    pub multistarts: usize,
    pub max_iters: usize,
    /// Success threshold ε: converged ⇔ cost < ε.
    pub success_threshold: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for InstantiateConfig {
    fn default() -> Self {
        InstantiateConfig {
            multistarts: 16,
            max_iters: 2000,
            success_threshold: 1e-8,
            seed: 0,
            optimizer: Optimizer::QuasiNewtonFd,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstantiateResult {
    pub params: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
    pub starts_used: usize,
}

/// Minimizes a cost spec over a dynamic-circuit template. The optimized
/// vector covers the circuit's parameters plus any W parameters the spec
/// appends.
pub fn instantiate(
    spec: &CostSpec,
    dc: &DynamicCircuit,
    cfg: &InstantiateConfig,
) -> InstantiateResult {
    let n = dc.n_params + spec.extra_params(dc);
    let f = move |x: &[f64]| spec.evaluate(dc, x).unwrap_or(f64::INFINITY);
    minimize(&f, n, cfg)
}

/// Minimizes an arbitrary cost over `n_params` free parameters.
pub fn minimize<F>(f: &F, n_params: usize, cfg: &InstantiateConfig) -> InstantiateResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let starts = run_starts(f, n_params, cfg);
    let starts_used = starts.len();
    let mut best: usize = 0;
    for (k, s) in starts.iter().enumerate() {
        let better = (s.cost < cfg.success_threshold, -s.cost)
            > (starts[best].cost < cfg.success_threshold, -starts[best].cost);
        if better {
            best = k;
        }
    }
    let winner = &starts[best];
    let (params, cost) = normalize_angles(f, winner.params.clone(), winner.cost);
    InstantiateResult {
        params,
        cost,
        converged: cost < cfg.success_threshold,
        starts_used,
    }
}

pub(crate) struct StartResult {
    pub params: Vec<f64>,
    pub cost: f64,
}

/// Runs starts in fixed batches, stopping after the first batch containing
/// a converged start.
pub(crate) fn run_starts<F>(f: &F, n_params: usize, cfg: &InstantiateConfig) -> Vec<StartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let total = cfg.multistarts + 1;
    let mut results: Vec<StartResult> = Vec::with_capacity(total);
    let mut k = 0;
    while k < total {
        let hi = (k + BATCH).min(total);
        let batch: Vec<StartResult> = (k..hi)
            .into_par_iter()
            .map(|idx| {
                let x0 = initial_point(idx, n_params, cfg.seed);
                run_one(f, x0, cfg)
            })
            .collect();
        let done = batch.iter().any(|r| r.cost < cfg.success_threshold);
        results.extend(batch);
        k = hi;
        if done {
            break;
        }
    }
    results
}

fn initial_point(start: usize, n_params: usize, seed: u64) -> Vec<f64> {
    if start == 0 {
        return vec![0.0; n_params];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(start as u64),
    );
    (0..n_params).map(|_| rng.gen_range(-PI..PI)).collect()
}

fn run_one<F>(f: &F, x0: Vec<f64>, cfg: &InstantiateConfig) -> StartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match cfg.optimizer {
        Optimizer::QuasiNewtonFd => lbfgs(f, x0, cfg.max_iters),
        Optimizer::NelderMead => nelder_mead(f, x0, cfg.max_iters),
    }
}

/// Wraps angles into (−π, π] where that does not hurt the cost; gate signs
/// under 2π shifts can interact inside branch sums, so fall back to a 4π
/// wrap (an exact period) when it does.
fn normalize_angles<F>(f: &F, params: Vec<f64>, cost: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let wrap = |x: f64, period: f64| x - period * (x / period).round();
    let w2: Vec<f64> = params.iter().map(|&x| wrap(x, 2.0 * PI)).collect();
    let c2 = f(&w2);
    if c2 <= cost + 1e-12 {
        return (w2, c2);
    }
    let w4: Vec<f64> = params.iter().map(|&x| wrap(x, 4.0 * PI)).collect();
    let c4 = f(&w4);
    if c4 <= cost + 1e-12 {
        return (w4, c4);
    }
    (params, cost)
}

/// L-BFGS with a finite-difference gradient and backtracking line search.
fn lbfgs<F>(f: &F, mut x: Vec<f64>, max_iters: usize) -> StartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    const MEMORY: usize = 10;
    let n = x.len();
    let mut fx = f(&x);
    if n == 0 {
        return StartResult { params: x, cost: fx };
    }
    let mut g = fd_gradient(f, &x);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho: Vec<f64> = Vec::new();

    for _ in 0..max_iters {
        if fx < COST_STOP || inf_norm(&g) < GRAD_STOP || !fx.is_finite() {
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alpha = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            alpha[i] = rho[i] * dot(&s_hist[i], &q);
            axpy(&mut q, -alpha[i], &y_hist[i]);
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            for v in q.iter_mut() {
                *v *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho[i] * dot(&y_hist[i], &q);
            axpy(&mut q, alpha[i] - beta, &s_hist[i]);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Not a descent direction; restart from steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }

        // Backtracking Armijo search.
        let mut step = if s_hist.is_empty() {
            (1.0 / inf_norm(&dir).max(1e-12)).min(1.0)
        } else {
            1.0
        };
        let mut x_new;
        let mut f_new;
        let mut ok = false;
        for _ in 0..40 {
            x_new = x.clone();
            axpy(&mut x_new, step, &dir);
            f_new = f(&x_new);
            if f_new <= fx + 1e-4 * step * slope {
                let g_new = fd_gradient(f, &x_new);
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-14 {
                    s_hist.push(s);
                    y_hist.push(y);
                    rho.push(1.0 / sy);
                    if s_hist.len() > MEMORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho.remove(0);
                    }
                }
                x = x_new;
                fx = f_new;
                g = g_new;
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
    }
    StartResult { params: x, cost: fx }
}

/// Nelder-Mead simplex search; the alternative optimizer for costs where
/// finite differences misbehave.
fn nelder_mead<F>(f: &F, x0: Vec<f64>, max_iters: usize) -> StartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    if n == 0 {
        let fx = f(&x0);
        return StartResult { params: x0, cost: fx };
    }
    let (alpha, gamma, rho_c, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for k in 0..n {
        let mut v = x0.clone();
        v[k] += 0.25;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if values[best] < COST_STOP || (values[worst] - values[best]).abs() < 1e-15 {
            break;
        }
        // Centroid of all but the worst.
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let point_along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = point_along(alpha);
        let f_r = f(&reflected);
        if f_r < values[best] {
            let expanded = point_along(gamma);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
        } else {
            let contracted = point_along(-rho_c);
            let f_c = f(&contracted);
            if f_c < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_c;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..simplex.len() {
                    if i == best {
                        continue;
                    }
                    for (v, b) in simplex[i].iter_mut().zip(&best_point) {
                        *v = b + sigma * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    StartResult { params: simplex.swap_remove(best), cost: values[best] }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &mut [f64], a: f64, y: &[f64]) {
    for (xi, yi) in x.iter_mut().zip(y) {
        *xi += a * yi;
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build, ParamCircuit};
    use crate::linalg::CVector;

    fn single_u3_state_problem() -> (CostSpec, DynamicCircuit) {
        let mut ub = ParamCircuit::new(1);
        ub.push_u3_layer();
        let dc = build::simultaneous(1, &[], ub, |_, live| ParamCircuit::new(live.len()))
            .unwrap();
        (CostSpec::state(CVector::basis(2, 1)), dc)
    }

    #[test]
    fn single_u3_reaches_target_state() {
        let (spec, dc) = single_u3_state_problem();
        let cfg = InstantiateConfig::default();
        let r = instantiate(&spec, &dc, &cfg);
        assert!(r.converged);
        assert!(r.cost < 1e-10, "cost {}", r.cost);
        assert!(r.params.iter().all(|p| p.abs() <= 2.0 * PI + 1e-9));
    }

    #[test]
    fn deterministic_given_seed() {
        let (spec, dc) = single_u3_state_problem();
        let cfg = InstantiateConfig { seed: 42, ..Default::default() };
        let a = instantiate(&spec, &dc, &cfg);
        let b = instantiate(&spec, &dc, &cfg);
        assert_eq!(a.params, b.params);
        assert_eq!(a.starts_used, b.starts_used);
        assert!((a.cost - b.cost).abs() < 1e-12);
    }

    #[test]
    fn result_cost_matches_reevaluation() {
        let (spec, dc) = single_u3_state_problem();
        let r = instantiate(&spec, &dc, &InstantiateConfig::default());
        let again = spec.evaluate(&dc, &r.params).unwrap();
        assert!((r.cost - again).abs() < 1e-12);
    }

    #[test]
    fn monotone_best_over_starts() {
        // Force every start to run by making the threshold unreachable.
        let f = |x: &[f64]| {
            let d0 = x[0] - 0.7;
            let d1 = x[1] + 1.2;
            d0 * d0 + d1 * d1 + 0.5
        };
        let cfg = InstantiateConfig {
            multistarts: 8,
            success_threshold: 0.0,
            seed: 7,
            ..Default::default()
        };
        let starts = run_starts(&f, 2, &cfg);
        assert_eq!(starts.len(), 9);
        let mut best = f64::INFINITY;
        let prefix: Vec<f64> = starts
            .iter()
            .map(|s| {
                best = best.min(s.cost);
                best
            })
            .collect();
        for w in prefix.windows(2) {
            assert!(w[1] <= w[0]);
        }
        // The quadratic bottoms out at 0.5.
        assert!((prefix.last().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn nonconvergence_is_a_result_state() {
        // A cost bounded away from zero never converges.
        let f = |x: &[f64]| 0.25 + x.iter().map(|v| v * v).sum::<f64>();
        let cfg = InstantiateConfig { multistarts: 2, ..Default::default() };
        let r = minimize(&f, 3, &cfg);
        assert!(!r.converged);
        assert!((r.cost - 0.25).abs() < 1e-9);
    }

    #[test]
    fn nelder_mead_minimizes_smooth_bowl() {
        let f = |x: &[f64]| (x[0] - 0.3f64).powi(2) + (x[1] + 0.4f64).powi(2);
        let cfg = InstantiateConfig {
            optimizer: Optimizer::NelderMead,
            max_iters: 4000,
            ..Default::default()
        };
        let r = minimize(&f, 2, &cfg);
        assert!(r.cost < 1e-8, "cost {}", r.cost);
    }
}
