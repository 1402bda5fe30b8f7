//! Hypothesis-testing relative entropy D_h^ε via the quantum
//! Neyman-Pearson structure, a type-class fast path for classical i.i.d.
//! instances, and the information-spectrum divergence.

use statrs::function::gamma::ln_gamma;

use crate::entropies::EntropyValue;
use crate::error::{QitError, Result};
use crate::qregisters::{
    eig_hermitian, support_projector, DensityState, HermitianOperator, SubnormalizedState,
};

/// Sample of the Neyman-Pearson trade-off at threshold `t`: the test is
/// the projector onto the strictly positive part of ρ − tσ.
#[derive(Debug, Clone, Copy)]
pub struct NPCurvePoint {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub boundary_dim: usize,
}

/// Classical i.i.d. instance: single-copy diagonal spectra and a copy
/// count, standing in for ρ^⊗n vs σ^⊗n in the commuting case.
#[derive(Debug, Clone)]
pub struct ClassicalIIDSpec {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub n: usize,
}

impl ClassicalIIDSpec {
    pub fn new(p: Vec<f64>, q: Vec<f64>, n: usize) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() {
            return Err(QitError::ShapeMismatch("alphabet".into()));
        }
        if p.len() > 8 {
            return Err(QitError::Cutoff("alphabet size above 8".into()));
        }
        if n == 0 || n > 100_000 {
            return Err(QitError::Domain(format!("copy count {n}")));
        }
        for v in p.iter().chain(q.iter()) {
            if *v < 0.0 {
                return Err(QitError::Domain("negative probability".into()));
            }
        }
        let sp: f64 = p.iter().sum();
        if (sp - 1.0).abs() > 1e-12 {
            return Err(QitError::InvalidTrace(sp));
        }
        let sq: f64 = q.iter().sum();
        if (sq - 1.0).abs() > 1e-12 {
            return Err(QitError::InvalidTrace(sq));
        }
        Ok(ClassicalIIDSpec { p, q, n })
    }
}

struct Spectral {
    values: Vec<f64>,
    rho_w: Vec<f64>,
    sig_w: Vec<f64>,
}

fn spectral_weights(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64) -> Spectral {
    let delta = rho.sub(&sigma.scale(t)).expect("same shape");
    let eig = eig_hermitian(&delta);
    let n = rho.dim();
    let mut rho_w = Vec::with_capacity(n);
    let mut sig_w = Vec::with_capacity(n);
    for i in 0..n {
        let v = eig.vectors.column(i);
        rho_w.push((v.adjoint() * rho.matrix() * v)[(0, 0)].re);
        sig_w.push((v.adjoint() * sigma.matrix() * v)[(0, 0)].re);
    }
    Spectral {
        values: eig.values,
        rho_w,
        sig_w,
    }
}

fn type_one_success(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64) -> f64 {
    let s = spectral_weights(rho, sigma, t);
    s.values
        .iter()
        .zip(&s.rho_w)
        .filter(|(l, _)| **l > 0.0)
        .map(|(_, r)| r)
        .sum()
}

/// D_h^ε(ρ‖σ) = −log β at the optimal test with Tr(Λρ) = 1−ε exactly.
/// Bisection on the likelihood threshold, with the boundary eigenspace
/// filled greedily in descending ρ/σ ratio (all ratios tie at the
/// threshold in exact arithmetic, so any fill order gives the same β).
pub fn dh(rho: &DensityState, sigma: &HermitianOperator, eps: f64) -> Result<EntropyValue> {
    if !(0.0..1.0).contains(&eps) {
        return Err(QitError::Domain(format!("D_h radius ε={eps} outside [0,1)")));
    }
    if rho.op().dim() > 4096 {
        return Err(QitError::Cutoff("dimension above 4096".into()));
    }
    let target = 1.0 - eps;

    // free mass outside supp σ never costs β
    let supp = support_projector(sigma);
    let free = rho.op().trace() - supp.pair(rho.op());
    if free >= target - 1e-12 {
        return Ok(EntropyValue::infinite());
    }

    // bracket the crossing of α(t) = 1−ε
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while type_one_success(rho.op(), sigma, hi) >= target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e18 {
            return Ok(EntropyValue::infinite());
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if type_one_success(rho.op(), sigma, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let t = 0.5 * (lo + hi);
    let scale = rho.op().matrix().norm() + t * sigma.matrix().norm();
    for widen in [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4] {
        let band_tol = widen * scale.max(1e-300);
        let s = spectral_weights(rho.op(), sigma, t);
        let mut alpha_in = 0.0;
        let mut beta_in = 0.0;
        let mut band: Vec<(f64, f64)> = Vec::new();
        for i in 0..s.values.len() {
            if s.values[i] > band_tol {
                alpha_in += s.rho_w[i];
                beta_in += s.sig_w[i];
            } else if s.values[i] >= -band_tol {
                band.push((s.rho_w[i], s.sig_w[i]));
            }
        }
        let band_mass: f64 = band.iter().map(|(r, _)| r).sum();
        if alpha_in > target + 1e-12 || alpha_in + band_mass < target - 1e-12 {
            continue;
        }
        // descending ρ/σ ratio; σ-free directions first
        band.sort_by(|a, b| {
            let ra = if a.1 > 1e-300 { a.0 / a.1 } else { f64::INFINITY };
            let rb = if b.1 > 1e-300 { b.0 / b.1 } else { f64::INFINITY };
            rb.partial_cmp(&ra)
                .unwrap()
                .then(a.1.partial_cmp(&b.1).unwrap())
        });
        let mut need = (target - alpha_in).max(0.0);
        let mut beta = beta_in;
        for (r, sw) in band {
            if need <= 1e-15 {
                break;
            }
            if r <= 1e-15 {
                continue;
            }
            if r <= need + 1e-15 {
                beta += sw;
                need -= r;
            } else {
                beta += sw * need / r;
                need = 0.0;
            }
        }
        if need > 1e-10 {
            continue;
        }
        if beta <= 1e-300 {
            return Ok(EntropyValue::infinite());
        }
        return Ok(EntropyValue::finite(-beta.log2()));
    }
    Err(QitError::NonConvergence(
        "boundary eigenspace could not be resolved".into(),
    ))
}

/// One point of the Neyman-Pearson curve at threshold `t`.
pub fn np_point(rho: &DensityState, sigma: &HermitianOperator, t: f64) -> NPCurvePoint {
    let s = spectral_weights(rho.op(), sigma, t);
    let scale = rho.op().matrix().norm() + t * sigma.matrix().norm();
    let band_tol = 1e-9 * scale.max(1e-300);
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut boundary = 0;
    for i in 0..s.values.len() {
        if s.values[i] > band_tol {
            alpha += s.rho_w[i];
            beta += s.sig_w[i];
        } else if s.values[i] >= -band_tol {
            boundary += 1;
        }
    }
    NPCurvePoint {
        t,
        alpha,
        beta,
        boundary_dim: boundary,
    }
}

fn for_each_composition(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(rest: usize, idx: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if idx == buf.len() - 1 {
            buf[idx] = rest;
            f(buf);
            return;
        }
        for v in 0..=rest {
            buf[idx] = v;
            rec(rest - v, idx + 1, buf, f);
        }
    }
    let mut buf = vec![0usize; k];
    rec(n, 0, &mut buf, f);
}

fn composition_count(n: usize, k: usize) -> f64 {
    (ln_gamma((n + k) as f64) - ln_gamma((n + 1) as f64) - ln_gamma(k as f64)).exp()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| (v - m).exp())
        .sum();
    m + s.ln()
}

/// Type-class evaluation of D_h^ε(p^⊗n ‖ q^⊗n) for diagonal spectra.
/// Identical value to `dh` on the explicit tensor-power instance.
pub fn dh_classical_iid(spec: &ClassicalIIDSpec, eps: f64) -> Result<EntropyValue> {
    if !(0.0..1.0).contains(&eps) {
        return Err(QitError::Domain(format!("D_h radius ε={eps} outside [0,1)")));
    }
    let k = spec.p.len();
    let n = spec.n;
    if composition_count(n, k) > 2e7 {
        return Err(QitError::Overflow);
    }
    // class weights exp(ln_count + lp) carry relative error ~ n·ε_mach,
    // so a type-I budget below that cannot be resolved
    if eps > 0.0 && eps < n as f64 * 3e-16 {
        return Err(QitError::Domain(format!(
            "ε={eps} below type-class accumulation precision at n={n}"
        )));
    }

    struct Class {
        ratio: f64,
        comp: Vec<usize>,
        ln_wp: f64,
        ln_wq: f64,
    }
    let ln_p: Vec<f64> = spec.p.iter().map(|v| v.ln()).collect();
    let ln_q: Vec<f64> = spec.q.iter().map(|v| v.ln()).collect();
    let lg_n = ln_gamma(n as f64 + 1.0);
    let mut classes: Vec<Class> = Vec::new();
    for_each_composition(n, k, &mut |c| {
        let mut ln_count = lg_n;
        let mut lp = 0.0;
        let mut lq = 0.0;
        for (i, &ci) in c.iter().enumerate() {
            ln_count -= ln_gamma(ci as f64 + 1.0);
            if ci > 0 {
                lp += ci as f64 * ln_p[i];
                lq += ci as f64 * ln_q[i];
            }
        }
        classes.push(Class {
            ratio: lp - lq,
            comp: c.to_vec(),
            ln_wp: ln_count + lp,
            ln_wq: ln_count + lq,
        });
    });
    classes.sort_by(|a, b| {
        b.ratio
            .partial_cmp(&a.ratio)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.comp.cmp(&b.comp))
    });

    let target = 1.0 - eps;
    let mut alpha = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    let mut taken_ln_wq: Vec<f64> = Vec::new();
    let mut done = false;
    for class in &classes {
        let wp = class.ln_wp.exp();
        if wp <= 0.0 {
            continue;
        }
        if alpha + wp < target - 1e-15 {
            let y = wp - comp;
            let s = alpha + y;
            comp = (s - alpha) - y;
            alpha = s;
            taken_ln_wq.push(class.ln_wq);
        } else {
            let frac = ((target - alpha) / wp).clamp(0.0, 1.0);
            if frac > 0.0 {
                taken_ln_wq.push(class.ln_wq + frac.ln());
            }
            done = true;
            break;
        }
    }
    if !done && alpha < target - 1e-9 {
        return Err(QitError::NonConvergence(
            "type-class mass deficit".into(),
        ));
    }
    let ln_beta = log_sum_exp(&taken_ln_wq);
    if ln_beta == f64::NEG_INFINITY {
        return Ok(EntropyValue::infinite());
    }
    Ok(EntropyValue::finite(-ln_beta / std::f64::consts::LN_2))
}

/// Information-spectrum divergence D̲_s^ε(ρ‖σ): the largest γ with
/// Tr((ρ − 2^γ σ){ρ − 2^γ σ}_+) ≥ 1 − ε.
pub fn info_spectrum(
    rho: &SubnormalizedState,
    sigma: &HermitianOperator,
    eps: f64,
) -> Result<EntropyValue> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(QitError::Domain(format!("ε={eps} outside (0,1)")));
    }
    let target = 1.0 - eps;
    if rho.trace() < target - 1e-12 {
        return Err(QitError::Domain(
            "subnormalized trace below 1−ε: the feasible set is empty".into(),
        ));
    }
    let f = |gamma: f64| -> f64 {
        let delta = rho
            .op()
            .sub(&sigma.scale(2f64.powf(gamma)))
            .expect("same shape");
        eig_hermitian(&delta)
            .values
            .iter()
            .filter(|v| **v > 0.0)
            .map(|v| *v)
            .sum()
    };
    let supp = support_projector(sigma);
    let free = rho.op().trace() - supp.pair(rho.op());
    if free >= target {
        return Ok(EntropyValue::infinite());
    }
    let mut lo = -1.0;
    while f(lo) < target {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(QitError::NonConvergence("γ lower bracket".into()));
        }
    }
    let mut hi = 1.0;
    while f(hi) >= target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(QitError::NonConvergence("γ upper bracket".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EntropyValue::finite(lo))
}
