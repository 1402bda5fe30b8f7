//! Small derivative-free optimizer used by the channel-distance and
//! channel-functional searches: Nelder-Mead with restarts driven by
//! seeded Haar starting points.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 32,
            max_iters: 4000,
            tol: 1e-11,
            seed: 0,
        }
    }
}

/// Minimizes `f` by Nelder-Mead from `x0`; returns (argmin, min).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iters {
        // order
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap());
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ofv: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
        simplex = ordered;
        fv = ofv;

        if (fv[n] - fv[0]).abs() < tol * (1.0 + fv[0].abs()) {
            break;
        }

        // centroid of best n
        let mut c = vec![0.0; n];
        for p in simplex.iter().take(n) {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi / n as f64;
            }
        }
        let refl: Vec<f64> = c
            .iter()
            .zip(&simplex[n])
            .map(|(ci, wi)| ci + alpha * (ci - wi))
            .collect();
        let fr = f(&refl);
        if fr < fv[0] {
            let exp: Vec<f64> = c
                .iter()
                .zip(&simplex[n])
                .map(|(ci, wi)| ci + gamma * (ci - wi))
                .collect();
            let fe = f(&exp);
            if fe < fr {
                simplex[n] = exp;
                fv[n] = fe;
            } else {
                simplex[n] = refl;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = refl;
            fv[n] = fr;
        } else {
            let contr: Vec<f64> = c
                .iter()
                .zip(&simplex[n])
                .map(|(ci, wi)| ci + rho * (wi - ci))
                .collect();
            let fc = f(&contr);
            if fc < fv[n] {
                simplex[n] = contr;
                fv[n] = fc;
            } else {
                // shrink toward best
                let best = simplex[0].clone();
                for k in 1..=n {
                    let p: Vec<f64> = best
                        .iter()
                        .zip(&simplex[k])
                        .map(|(bi, pi)| bi + sigma * (pi - bi))
                        .collect();
                    fv[k] = f(&p);
                    simplex[k] = p;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if fv[i] < fv[best] {
            best = i;
        }
    }
    (simplex[best].clone(), fv[best])
}

/// Multi-start Nelder-Mead: draws `starts` initial points from `sample`,
/// polishes each, and returns every local endpoint (value, argmin) sorted
/// best first.
pub fn multistart<F, S, R>(
    mut f: F,
    mut sample: S,
    rng: &mut R,
    cfg: &OptimizerConfig,
    step: f64,
) -> Vec<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> f64,
    S: FnMut(&mut R) -> Vec<f64>,
    R: Rng,
{
    let mut results = Vec::with_capacity(cfg.starts);
    for _ in 0..cfg.starts {
        let x0 = sample(rng);
        let (x, v) = nelder_mead(&mut f, &x0, step, cfg.max_iters, cfg.tol);
        results.push((v, x));
    }
    results.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    results
}
