//! Maximum-entropy Nash equilibrium of a symmetric zero-sum meta-game.
//!
//! With antisymmetric payoff `A = W - 0.5`, a mixture `p` is an equilibrium
//! iff `A p <= 0`. The entropy-maximizing one is found through the dual
//! `min_{l >= 0} log sum_i exp((A l)_i)`, whose softmax is `p`. The dual is
//! minimized by damped projected Newton steps.

use thiserror::Error;

/// Exploitability at which a solution is reported as converged.
pub const NASH_TOLERANCE: f64 = 1e-6;
/// Exploitability the solver keeps improving towards.
const TARGET: f64 = 1e-11;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct NashResult {
    /// Maximum-entropy equilibrium mixture.
    pub p: Vec<f64>,
    /// `A p`: each agent's expected payoff against the equilibrium.
    pub skill: Vec<f64>,
    /// `max_i (A p)_i`, zero at an exact equilibrium.
    pub exploitability: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NashError {
    #[error("matrix must be square and non-empty")]
    Shape,
    #[error("W[{0}][{1}] + W[{1}][{0}] must equal 1")]
    NotAntisymmetric(usize, usize),
    #[error("no convergence within {iterations} iterations (exploitability {exploitability:e})")]
    NoConvergence {
        iterations: usize,
        exploitability: f64,
        best: NashResult,
    },
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Solve `m x = b` for symmetric positive definite `m` by Cholesky.
fn cholesky_solve(mut m: Vec<Vec<f64>>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let d = m[j][j] - m[j][..j].iter().map(|x| x * x).sum::<f64>();
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in j + 1..n {
            let v = m[i][j] - m[i][..j].iter().zip(&m[j][..j]).map(|(x, y)| x * y).sum::<f64>();
            m[i][j] = v / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= m[i][k] * y[k];
        }
        y[i] /= m[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= m[k][i] * y[k];
        }
        y[i] /= m[i][i];
    }
    Some(y)
}

fn result(a: &[Vec<f64>], lambda: &[f64], iterations: usize) -> NashResult {
    let p = softmax(&mat_vec(a, lambda));
    let skill = mat_vec(a, &p);
    let exploitability = skill.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    NashResult {
        p,
        skill,
        exploitability,
        iterations,
    }
}

/// Nash averaging of a win-rate matrix `w` (`w[i][j]` = mean outcome of `i`
/// against `j`).
pub fn nash_average(w: &[Vec<f64>]) -> Result<NashResult, NashError> {
    let n = w.len();
    if n == 0 || w.iter().any(|r| r.len() != n) {
        return Err(NashError::Shape);
    }
    for (i, row) in w.iter().enumerate() {
        for (j, x) in row.iter().enumerate().skip(i) {
            if (x + w[j][i] - 1.0).abs() > 1e-9 {
                return Err(NashError::NotAntisymmetric(i, j));
            }
        }
    }
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { (w[i][j] - w[j][i]) / 2.0 })
                .collect()
        })
        .collect();
    let dual = |l: &[f64]| log_sum_exp(&mat_vec(&a, l));
    let mut lambda = vec![0.0; n];
    let mut best = result(&a, &lambda, 0);
    for it in 1..=MAX_ITERATIONS {
        let p = softmax(&mat_vec(&a, &lambda));
        // Gradient of the dual is A^T p = -A p.
        let grad: Vec<f64> = mat_vec(&a, &p).into_iter().map(|v| -v).collect();
        let g0 = dual(&lambda);
        // Coordinates held at the bound.
        let held: Vec<bool> = (0..n).map(|i| lambda[i] <= 1e-12 && grad[i] > 0.0).collect();
        let free: Vec<usize> = (0..n).filter(|i| !held[*i]).collect();
        let mut dir = vec![0.0; n];
        for i in 0..n {
            if held[i] {
                dir[i] = -grad[i];
            }
        }
        if !free.is_empty() {
            // Hessian A^T (diag p - p p^T) A restricted to the free set.
            let cols: Vec<Vec<f64>> = free.iter().map(|&j| (0..n).map(|k| a[k][j]).collect()).collect();
            let mean: Vec<f64> = cols
                .iter()
                .map(|c| c.iter().zip(&p).map(|(x, q)| x * q).sum())
                .collect();
            let gnorm = free.iter().map(|&i| grad[i] * grad[i]).sum::<f64>().sqrt();
            let damping = gnorm + 1e-14;
            let m = free.len();
            let mut h = vec![vec![0.0; m]; m];
            for x in 0..m {
                for y in x..m {
                    let v: f64 = (0..n)
                        .map(|k| p[k] * (cols[x][k] - mean[x]) * (cols[y][k] - mean[y]))
                        .sum();
                    h[x][y] = v;
                    h[y][x] = v;
                }
                h[x][x] += damping;
            }
            let rhs: Vec<f64> = free.iter().map(|&i| -grad[i]).collect();
            match cholesky_solve(h, &rhs) {
                Some(d) => {
                    for (k, &i) in free.iter().enumerate() {
                        dir[i] = d[k];
                    }
                }
                None => {
                    for &i in &free {
                        dir[i] = -grad[i];
                    }
                }
            }
        }
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = (0..n).map(|i| (lambda[i] + step * dir[i]).max(0.0)).collect();
            let decrease: f64 = (0..n).map(|i| grad[i] * (lambda[i] - cand[i])).sum();
            if dual(&cand) <= g0 - 1e-4 * decrease && cand != lambda {
                lambda = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        let r = result(&a, &lambda, it);
        if r.exploitability <= best.exploitability {
            best = r;
        }
        if best.exploitability <= TARGET || !moved {
            break;
        }
    }
    if best.exploitability <= NASH_TOLERANCE {
        Ok(best)
    } else {
        Err(NashError::NoConvergence {
            iterations: best.iterations,
            exploitability: best.exploitability,
            best,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rock_paper_scissors_is_uniform() {
        let w = vec![vec![0.5, 0.0, 1.0], vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.5]];
        let r = nash_average(&w).unwrap();
        for q in &r.p {
            assert!((q - 1.0 / 3.0).abs() < 1e-3);
        }
        assert!(r.exploitability <= 1e-6);
    }

    #[test]
    fn dominant_agent_takes_all_mass() {
        let w = vec![vec![0.5, 0.9], vec![0.1, 0.5]];
        let r = nash_average(&w).unwrap();
        assert!(r.p[0] > 1.0 - 1e-6);
        assert!(r.skill[0] > r.skill[1]);
        assert!(r.exploitability <= 1e-6);
    }

    #[test]
    fn duplicates_do_not_move_other_skills() {
        let w = vec![
            vec![0.5, 0.7, 0.2, 0.6],
            vec![0.3, 0.5, 0.8, 0.4],
            vec![0.8, 0.2, 0.5, 0.55],
            vec![0.4, 0.6, 0.45, 0.5],
        ];
        let base = nash_average(&w).unwrap();
        // Clone agent 1.
        let idx = [0usize, 1, 2, 3, 1];
        let dup: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| w[i][j]).collect()).collect();
        let r = nash_average(&dup).unwrap();
        for i in 0..4 {
            assert!(
                (base.skill[i] - r.skill[i]).abs() < 1e-6,
                "{i}: {} vs {}",
                base.skill[i],
                r.skill[i]
            );
        }
        assert!((r.p[1] - r.p[4]).abs() < 1e-9);
        assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_inconsistent_matrices() {
        assert_eq!(nash_average(&[]), Err(NashError::Shape));
        assert_eq!(
            nash_average(&[vec![0.5, 0.7], vec![0.7, 0.5]]),
            Err(NashError::NotAntisymmetric(0, 1))
        );
    }
}
