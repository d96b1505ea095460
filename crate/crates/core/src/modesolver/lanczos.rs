//! Shift-invert Lanczos for the top of the spectrum of a symmetric operator.
//!
//! The operator is `A`, available through `M = σI − A` (SPD, factored) and
//! matrix-vector products with `M`. Lanczos runs on `M⁻¹`, whose largest
//! eigenvalues belong to the eigenvalues of `A` closest below `σ`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::banded::BandCholesky;

pub struct ShiftInvertProblem<'a> {
    pub shift: f64,
    pub factor: &'a BandCholesky,
    /// y ← M x
    pub apply_shifted: &'a dyn Fn(&[f64], &mut [f64]),
    /// Scale used to make residuals relative (an upper bound on ‖A‖).
    pub operator_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// ‖A v − λ v‖ / (‖v‖ · operator_scale)
    pub relative_residual: f64,
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub pairs: Vec<Eigenpair>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub check_every: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl ShiftInvertProblem<'_> {
    fn residual(&self, v: &[f64], scratch: &mut [f64]) -> (f64, f64) {
        // A v = σ v − M v
        (self.apply_shifted)(v, scratch);
        for (s, x) in scratch.iter_mut().zip(v) {
            *s = self.shift * x - *s;
        }
        let vv = dot(v, v);
        let rayleigh = dot(v, scratch) / vv;
        axpy(-rayleigh, v, scratch);
        (rayleigh, norm(scratch) / (vv.sqrt() * self.operator_scale))
    }

    /// Returns the `want` largest eigenpairs of `A`, largest first.
    pub fn top_eigenpairs(
        &self,
        start: &[f64],
        want: usize,
        settings: &LanczosSettings,
    ) -> LanczosOutcome {
        let n = start.len();
        let want = want.min(n);
        let max_iter = settings.max_iterations.min(n).max(want);

        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        let mut q = start.to_vec();
        let s = norm(&q);
        q.iter_mut().for_each(|x| *x /= s);
        basis.push(q);

        let mut scratch = vec![0.0; n];
        let mut best: Option<Vec<Eigenpair>> = None;

        for step in 0..max_iter {
            let mut w = basis[step].clone();
            self.factor.solve_in_place(&mut w);
            let alpha = dot(&basis[step], &w);
            axpy(-alpha, &basis[step], &mut w);
            if step > 0 {
                axpy(-betas[step - 1], &basis[step - 1], &mut w);
            }
            // full reorthogonalisation, twice
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let beta = norm(&w);
            alphas.push(alpha);

            let m = step + 1;
            let exhausted = beta <= 1e-13 * alpha.abs().max(f64::MIN_POSITIVE) || m == max_iter;
            let due = m >= want && (m % settings.check_every == 0 || exhausted);

            if due {
                let pairs = self.ritz_pairs(&basis, &alphas, &betas, want, &mut scratch);
                let worst = pairs
                    .iter()
                    .map(|p| p.relative_residual)
                    .fold(0.0f64, f64::max);
                let ok = pairs.len() == want && worst <= settings.tolerance;
                best = Some(pairs);
                if ok {
                    return LanczosOutcome {
                        pairs: best.unwrap(),
                        iterations: m,
                        converged: true,
                    };
                }
            }
            if exhausted {
                return LanczosOutcome {
                    pairs: best.unwrap_or_default(),
                    iterations: m,
                    converged: false,
                };
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }
        LanczosOutcome {
            pairs: best.unwrap_or_default(),
            iterations: max_iter,
            converged: false,
        }
    }

    fn ritz_pairs(
        &self,
        basis: &[Vec<f64>],
        alphas: &[f64],
        betas: &[f64],
        want: usize,
        scratch: &mut [f64],
    ) -> Vec<Eigenpair> {
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i == j + 1 {
                betas[j]
            } else if j == i + 1 {
                betas[i]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        // largest θ of M⁻¹ ↔ largest eigenvalue of A
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let n = basis[0].len();
        order
            .into_iter()
            .take(want)
            .filter(|&k| eig.eigenvalues[k] > 0.0)
            .map(|k| {
                let mut v = vec![0.0; n];
                for (row, q) in basis.iter().take(m).enumerate() {
                    axpy(eig.eigenvectors[(row, k)], q, &mut v);
                }
                let s = norm(&v);
                v.iter_mut().for_each(|x| *x /= s);
                let (value, relative_residual) = self.residual(&v, scratch);
                Eigenpair {
                    value,
                    vector: v,
                    relative_residual,
                }
            })
            .collect()
    }
}
