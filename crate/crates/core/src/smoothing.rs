//! Certified two-sided bounds on smoothed quantities (D_max^ε, D_min^ε,
//! partially smoothed max-information) assembled from inequality chains
//! through the hypothesis testing relative entropy, plus an exact grid
//! oracle for tiny diagonal instances.
//!
//! The oracle is restricted to diagonal states: dephasing in the joint
//! eigenbasis never increases the purified distance, never increases
//! D_max, and never decreases fidelity, so for diagonal inputs the
//! optimal smoothed state can be taken diagonal as well. Ball membership
//! uses the generalized fidelity, so subnormalized smoothing is allowed
//! wherever the definition permits it.

use crate::bounds::{BoundInterval, SmoothingRadius};
use crate::entropies::{dmax, dmin};
use crate::error::{QitError, Result};
use crate::hypotest::dh;
use crate::qregisters::{
    partial_trace, purify, tensor, tensor_in_shape, DensityState, HermitianOperator,
    RegisterShape,
};

/// n-fold tensor power with per-copy label suffixes `@1..@n`.
pub fn tensor_power(op: &HermitianOperator, n: usize) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(QitError::Domain("tensor power needs n >= 1".into()));
    }
    let relabel = |i: usize| -> Result<HermitianOperator> {
        let labels: Vec<String> = op
            .shape()
            .labels()
            .iter()
            .map(|l| format!("{l}@{i}"))
            .collect();
        let shape = RegisterShape::new(labels, op.shape().dims().to_vec())?;
        HermitianOperator::new(shape, op.matrix().clone())
    };
    let mut out = relabel(1)?;
    for i in 2..=n {
        out = tensor(&out, &relabel(i)?)?;
    }
    Ok(out)
}

/// Two-sided bounds on D_max^ε(ρ‖σ) with the purified-distance ball:
/// upper from the D_h^{1−ε²} chain (tightened by the unsmoothed D_max,
/// since smoothing cannot increase the value), lower from D_h^{1−ε²−δ}
/// with the default split δ = (1−ε²)/2.
pub fn dmax_smoothed_bounds(
    rho: &DensityState,
    sigma: &HermitianOperator,
    eps: f64,
) -> Result<BoundInterval> {
    let eps = SmoothingRadius::new(eps)?.0;
    if eps >= 1.0 {
        return Err(QitError::Domain("D_max smoothing needs ε < 1".into()));
    }
    let e2 = eps * eps;
    let delta = (1.0 - e2) / 2.0;

    let chain_upper = if eps > 0.0 {
        let h = dh(rho, sigma, 1.0 - e2)?;
        if h.finite {
            h.bits + (1.0 / (1.0 - e2)).log2()
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    let trivial = dmax(&rho.as_subnormalized(), sigma);
    let trivial_upper = if trivial.finite {
        trivial.bits
    } else {
        f64::INFINITY
    };
    let (upper, upper_prov) = if chain_upper <= trivial_upper {
        (chain_upper, "D_h^{1-eps^2} + log 1/(1-eps^2)")
    } else {
        (trivial_upper, "unsmoothed D_max")
    };

    let h_low = dh(rho, sigma, 1.0 - e2 - delta)?;
    let lower = if h_low.finite {
        h_low.bits - (4.0 / (delta * delta)).log2()
    } else {
        f64::INFINITY
    };

    Ok(BoundInterval::new(
        lower,
        upper,
        "D_h^{1-eps^2-delta} - log 4/delta^2",
        upper_prov,
    ))
}

fn lemma5_bracket(eps: f64, k: f64) -> f64 {
    eps * eps * k.sqrt() + (1.0 - k * eps * eps).max(0.0).sqrt() * (1.0 - eps * eps).sqrt()
}

/// Upper bound on D_min^ε(ρ‖σ) through D_h^{kε²}. We keep the chain's
/// fully derived form D_h^{kε²} − log(1−(ε²√k+√(1−kε²)√(1−ε²))²)
/// − log kε²; the tighter form without the last term is stated elsewhere
/// but does not follow from the derivation, so we do not rely on it.
/// With `eps_prime` the D_max-route bound is also evaluated and the
/// minimum returned.
pub fn dmin_smoothed_upper(
    rho: &DensityState,
    sigma: &HermitianOperator,
    eps: f64,
    k: f64,
    eps_prime: Option<f64>,
) -> Result<f64> {
    let eps = SmoothingRadius::new(eps)?.0;
    if k <= 1.0 {
        return Err(QitError::Domain(format!("D_min chain needs k > 1, got {k}")));
    }
    if eps <= 0.0 || eps > 1.0 / k.sqrt() + 1e-12 {
        return Err(QitError::Domain(format!(
            "D_min chain needs ε in (0, k^(-1/2)] = (0, {:.6}], got {eps}",
            1.0 / k.sqrt()
        )));
    }
    let ke2 = (k * eps * eps).min(1.0 - 1e-15);
    let b = lemma5_bracket(eps, k);
    let slack = 1.0 - b * b;
    let mut upper = if slack <= 0.0 {
        f64::INFINITY
    } else {
        let h = dh(rho, sigma, ke2)?;
        if h.finite {
            h.bits - slack.log2() - ke2.log2()
        } else {
            f64::INFINITY
        }
    };

    if let Some(ep) = eps_prime {
        let ep = SmoothingRadius::new(ep)?.0;
        if eps * eps + ep * ep > 1.0 + 1e-12 {
            return Err(QitError::Domain(format!(
                "D_min/D_max chain needs ε² + ε'² ≤ 1, got {eps} and {ep}"
            )));
        }
        let br = eps * (1.0 - ep * ep).max(0.0).sqrt() + ep * (1.0 - eps * eps).max(0.0).sqrt();
        let sl = 1.0 - br * br;
        if sl > 0.0 {
            let dm = dmax_smoothed_bounds(rho, sigma, ep)?;
            upper = upper.min(dm.upper - sl.log2());
        }
    }
    Ok(upper)
}

/// Lower bound on D_min^ε(ρ‖σ): the unsmoothed value, achieved by the
/// feasible point ρ̄ = ρ for any radius.
pub fn dmin_smoothed_lower(rho: &DensityState, sigma: &HermitianOperator, eps: f64) -> Result<f64> {
    SmoothingRadius::new(eps)?;
    let v = dmin(&rho.as_subnormalized(), sigma);
    Ok(if v.finite { v.bits } else { f64::INFINITY })
}

/// Largest explicit tensor dimension for the smoothed max-information
/// interval; the lower end needs the purification dual, which has no
/// classical reduction, so both ends are evaluated on explicit matrices
/// and each D_h bisection step pays a dense eigendecomposition.
pub const IMAX_TENSOR_CUTOFF: usize = 256;

/// Two-sided bounds on the partially smoothed max-information
/// I_max^{ε,P}(Ṙ^n;B^n) of ρ_BR^{⊗n}, with the marginal on the R
/// factors held fixed. `r_labels` names the R part of `rho_br`.
pub fn imax_partially_smoothed_bounds(
    rho_br: &DensityState,
    r_labels: &[&str],
    n: usize,
    eps: f64,
) -> Result<BoundInterval> {
    let eps = SmoothingRadius::new(eps)?.0;
    if eps <= 0.0 || eps > std::f64::consts::FRAC_1_SQRT_2 {
        return Err(QitError::Domain(format!(
            "smoothed max-information chain needs ε in (0, 2^(-1/2)], got {eps}"
        )));
    }
    let shape = rho_br.op().shape().clone();
    let b_labels: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !r_labels.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let d = shape.total_dim();
    if d.checked_pow(n as u32).map(|v| v > IMAX_TENSOR_CUTOFF) != Some(false) {
        return Err(QitError::Cutoff(format!(
            "primal tensor dimension {d}^{n} above {IMAX_TENSOR_CUTOFF}"
        )));
    }
    let rho_b = partial_trace(rho_br.op(), r_labels)?;
    let rho_r = partial_trace(rho_br.op(), &b_labels)?;

    // upper end: D_h against the product of marginals on n copies
    let prod = tensor_in_shape(&shape, &rho_b, &rho_r)?;
    let rho_n = DensityState::new(tensor_power(rho_br.op(), n)?)?;
    let sigma_n = tensor_power(&prod, n)?;
    let e4 = (eps / 4.0) * (eps / 4.0);
    let e2 = (eps / 2.0) * (eps / 2.0);
    let h_up = dh(&rho_n, &sigma_n, 1.0 - e4)?;
    let upper = if h_up.finite {
        h_up.bits + ((8.0 + e2) / e2).log2()
    } else {
        f64::INFINITY
    };

    // lower end: duality through the canonical purification; the dual
    // instance compares rho_RR' against rho_R^{-1} ⊗ rho_R', and its
    // smoothed D_min is bounded through D_h^{2eps^2}
    let psi = purify(rho_br, "Rpur")?;
    let psi_op = psi.projector();
    let rho_rrp = partial_trace(&psi_op, &b_labels)?;
    let dual_d = rho_rrp.shape().total_dim();
    if dual_d.checked_pow(n as u32).map(|v| v > IMAX_TENSOR_CUTOFF) != Some(false) {
        return Err(QitError::Cutoff(format!(
            "dual tensor dimension {dual_d}^{n} above {IMAX_TENSOR_CUTOFF}"
        )));
    }
    let mut purity_labels = b_labels.clone();
    purity_labels.extend(r_labels.iter().copied());
    let rho_rp = partial_trace(&psi_op, &purity_labels)?;
    let rho_r_inv = crate::qregisters::geninv(&rho_r);
    let dual_sigma_one = tensor_in_shape(rho_rrp.shape(), &rho_r_inv, &rho_rp)?;
    let dual_rho_n = DensityState::new(tensor_power(&rho_rrp, n)?)?;
    let dual_sigma_n = tensor_power(&dual_sigma_one, n)?;
    let k = 2.0;
    let ke2 = k * eps * eps;
    let b = lemma5_bracket(eps, k);
    let slack = 1.0 - b * b;
    let lower = if slack <= 0.0 {
        f64::NEG_INFINITY
    } else {
        let h_low = dh(&dual_rho_n, &dual_sigma_n, ke2)?;
        if h_low.finite {
            -(h_low.bits - slack.log2() - ke2.log2())
        } else {
            f64::NEG_INFINITY
        }
    };

    Ok(BoundInterval::new(
        lower,
        upper,
        "-(D_h^{2eps^2} chain) on the purification dual",
        "D_h^{1-(eps/4)^2} + log (8+(eps/2)^2)/(eps/2)^2",
    ))
}

// ---------------------------------------------------------------------------
// exact diagonal smoothing oracle
// ---------------------------------------------------------------------------

const ORACLE_STEPS: [f64; 4] = [2e-2, 1e-3, 1e-4, 1e-5];
const BALL_TOL: f64 = 1e-9;

fn validate_dist(p: &[f64], max_len: usize) -> Result<()> {
    if p.is_empty() || p.len() > max_len {
        return Err(QitError::Domain(format!(
            "oracle instance size {} outside 1..={max_len}",
            p.len()
        )));
    }
    if p.iter().any(|&v| !(0.0..=1.0 + 1e-9).contains(&v)) {
        return Err(QitError::Domain("oracle weights outside [0,1]".into()));
    }
    Ok(())
}

/// Staged grid search over `dof` coordinates. Each stage scans a box
/// around the incumbent with the given step, pruned by `partial_ok` on
/// coordinate prefixes; `eval` returns None outside the feasible set.
fn staged_grid<F, G>(dof: usize, minimize: bool, partial_ok: G, eval: F, start: &[f64]) -> Option<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Option<f64>,
    G: Fn(&[f64]) -> bool,
{
    let mut incumbent: Option<(f64, Vec<f64>)> = eval(start).map(|v| (v, start.to_vec()));
    let mut prev_step: Option<f64> = None;
    for &step in ORACLE_STEPS.iter() {
        let (lo, hi): (Vec<f64>, Vec<f64>) = match (&incumbent, prev_step) {
            (Some((_, x)), Some(ps)) => (
                x.iter().map(|v| (v - 2.5 * ps).max(0.0)).collect(),
                x.iter().map(|v| (v + 2.5 * ps).min(1.0)).collect(),
            ),
            _ => (vec![0.0; dof], vec![1.0; dof]),
        };
        let mut cand = vec![0.0; dof];
        let mut stage_best: Option<(f64, Vec<f64>)> = incumbent.clone();
        grid_recurse(
            0,
            dof,
            &lo,
            &hi,
            step,
            &partial_ok,
            &eval,
            minimize,
            &mut cand,
            &mut stage_best,
        );
        incumbent = stage_best;
        prev_step = Some(step);
    }
    incumbent
}

#[allow(clippy::too_many_arguments)]
fn grid_recurse<F, G>(
    depth: usize,
    dof: usize,
    lo: &[f64],
    hi: &[f64],
    step: f64,
    partial_ok: &G,
    eval: &F,
    minimize: bool,
    cand: &mut Vec<f64>,
    best: &mut Option<(f64, Vec<f64>)>,
) where
    F: Fn(&[f64]) -> Option<f64>,
    G: Fn(&[f64]) -> bool,
{
    if depth == dof {
        if let Some(v) = eval(cand) {
            let better = match best {
                Some((bv, _)) => {
                    if minimize {
                        v < *bv
                    } else {
                        v > *bv
                    }
                }
                None => true,
            };
            if better {
                *best = Some((v, cand.clone()));
            }
        }
        return;
    }
    let steps = ((hi[depth] - lo[depth]) / step).round() as usize;
    for i in 0..=steps {
        let v = (lo[depth] + i as f64 * step).min(hi[depth]);
        cand[depth] = v;
        if !partial_ok(&cand[..=depth]) {
            continue;
        }
        grid_recurse(
            depth + 1,
            dof,
            lo,
            hi,
            step,
            partial_ok,
            eval,
            minimize,
            cand,
            best,
        );
    }
}

fn ball_fidelity_floor(eps: f64) -> f64 {
    (1.0 - eps * eps).max(0.0).sqrt()
}

/// Prefix feasibility for flat coordinate vectors: total mass at most 1,
/// and the fidelity already accumulated plus the Cauchy-Schwarz headroom
/// of the remaining coordinates must still be able to reach the ball.
fn flat_prune(p: &[f64], floor: f64) -> impl Fn(&[f64]) -> bool + '_ {
    let mut suffix = vec![0.0; p.len() + 1];
    for i in (0..p.len()).rev() {
        suffix[i] = suffix[i + 1] + p[i];
    }
    move |prefix: &[f64]| {
        let s: f64 = prefix.iter().sum();
        if s > 1.0 + 1e-12 {
            return false;
        }
        let fpart: f64 = prefix.iter().zip(p.iter()).map(|(a, b)| (a * b).sqrt()).sum();
        let headroom = ((1.0 - s).max(0.0) * suffix[prefix.len()]).sqrt();
        fpart + headroom >= floor - 1e-12
    }
}

/// Exact smoothed D_max on a diagonal instance: minimize
/// max_i log p̄_i/q_i over diagonal subnormalized p̄ in the
/// purified-distance ε-ball around p.
pub fn exact_smoothing_dmax(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    let eps = SmoothingRadius::new(eps)?.0;
    validate_dist(p, 9)?;
    validate_dist(q, 9)?;
    if p.len() != q.len() {
        return Err(QitError::ShapeMismatch("oracle alphabet".into()));
    }
    let obj = |pb: &[f64]| -> f64 {
        let mut m = 0.0f64;
        for (a, b) in pb.iter().zip(q.iter()) {
            if *a > 1e-300 {
                if *b <= 0.0 {
                    return f64::INFINITY;
                }
                m = m.max(a / b);
            }
        }
        if m <= 0.0 {
            f64::NEG_INFINITY
        } else {
            m.log2()
        }
    };
    if eps == 0.0 {
        return Ok(obj(p));
    }
    let floor = ball_fidelity_floor(eps) - BALL_TOL;
    let eval = |pb: &[f64]| -> Option<f64> {
        let f: f64 = pb.iter().zip(p.iter()).map(|(a, b)| (a * b).sqrt()).sum();
        if f < floor {
            return None;
        }
        Some(obj(pb))
    };
    let partial_ok = flat_prune(p, floor);
    let (v, _) = staged_grid(p.len(), true, partial_ok, eval, p)
        .ok_or_else(|| QitError::NonConvergence("empty oracle feasible set".into()))?;
    Ok(v)
}

/// Exact smoothed D_min on a diagonal instance: maximize −2 log F(p̄,q)
/// over diagonal subnormalized p̄ in the ε-ball around p.
pub fn exact_smoothing_dmin(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    let eps = SmoothingRadius::new(eps)?.0;
    validate_dist(p, 9)?;
    validate_dist(q, 9)?;
    if p.len() != q.len() {
        return Err(QitError::ShapeMismatch("oracle alphabet".into()));
    }
    let obj = |pb: &[f64]| -> f64 {
        let f: f64 = pb.iter().zip(q.iter()).map(|(a, b)| (a * b).sqrt()).sum();
        if f <= 1e-300 {
            f64::INFINITY
        } else {
            -2.0 * f.log2()
        }
    };
    if eps == 0.0 {
        return Ok(obj(p));
    }
    let floor = ball_fidelity_floor(eps) - BALL_TOL;
    let eval = |pb: &[f64]| -> Option<f64> {
        let f: f64 = pb.iter().zip(p.iter()).map(|(a, b)| (a * b).sqrt()).sum();
        if f < floor {
            return None;
        }
        Some(obj(pb))
    };
    let partial_ok = flat_prune(p, floor);
    let (v, _) = staged_grid(p.len(), false, partial_ok, eval, p)
        .ok_or_else(|| QitError::NonConvergence("empty oracle feasible set".into()))?;
    Ok(v)
}

fn diag_imax_bits(joint: &[f64], marg_a: &[f64], na: usize, nb: usize) -> f64 {
    let mut total = 0.0f64;
    for b in 0..nb {
        let mut m = 0.0f64;
        for a in 0..na {
            if marg_a[a] > 1e-300 {
                m = m.max(joint[a * nb + b] / marg_a[a]);
            } else if joint[a * nb + b] > 1e-300 {
                return f64::INFINITY;
            }
        }
        total += m;
    }
    if total <= 0.0 {
        f64::NEG_INFINITY
    } else {
        total.log2()
    }
}

fn validate_joint(p: &[f64], na: usize, nb: usize) -> Result<()> {
    if na == 0 || nb == 0 || na > 3 || nb > 3 || p.len() != na * nb {
        return Err(QitError::Domain(format!(
            "oracle joint instance must be at most 3x3, got {na}x{nb} with {} weights",
            p.len()
        )));
    }
    validate_dist(p, 9)?;
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(QitError::InvalidTrace(s));
    }
    Ok(())
}

/// Exact partially smoothed max-information on a diagonal joint
/// instance: minimize I_max(Ā;B) over diagonal p̄ in the ε-ball with
/// the A-marginal pinned to that of p. The free coordinates are the
/// first nb−1 entries of each row; the last entry closes the row to the
/// fixed marginal.
pub fn exact_smoothing_imax_partial(p: &[f64], na: usize, nb: usize, eps: f64) -> Result<f64> {
    let eps = SmoothingRadius::new(eps)?.0;
    validate_joint(p, na, nb)?;
    let marg_a: Vec<f64> = (0..na).map(|a| p[a * nb..(a + 1) * nb].iter().sum()).collect();
    if eps == 0.0 {
        return Ok(diag_imax_bits(p, &marg_a, na, nb));
    }
    let dof = na * (nb - 1);
    if dof > 4 {
        return Err(QitError::Cutoff(format!(
            "oracle joint search over {dof} free coordinates not supported (max 4)"
        )));
    }
    if dof == 0 {
        return Ok(diag_imax_bits(p, &marg_a, na, nb));
    }
    let expand = |coords: &[f64]| -> Option<Vec<f64>> {
        let mut joint = vec![0.0; na * nb];
        for a in 0..na {
            let row = &coords[a * (nb - 1)..(a + 1) * (nb - 1)];
            let partial: f64 = row.iter().sum();
            let last = marg_a[a] - partial;
            if last < -1e-12 {
                return None;
            }
            for (b, &v) in row.iter().enumerate() {
                joint[a * nb + b] = v;
            }
            joint[a * nb + nb - 1] = last.max(0.0);
        }
        Some(joint)
    };
    let floor = ball_fidelity_floor(eps) - BALL_TOL;
    let eval = |coords: &[f64]| -> Option<f64> {
        let joint = expand(coords)?;
        let f: f64 = joint
            .iter()
            .zip(p.iter())
            .map(|(a, b)| (a * b).sqrt())
            .sum();
        if f < floor {
            return None;
        }
        Some(diag_imax_bits(&joint, &marg_a, na, nb))
    };
    let partial_ok = |prefix: &[f64]| -> bool {
        let a_cur = (prefix.len() - 1) / (nb - 1);
        let row_start = a_cur * (nb - 1);
        let row_sum: f64 = prefix[row_start..].iter().sum();
        if row_sum > marg_a[a_cur] + 1e-12 {
            return false;
        }
        // fidelity committed so far: completed rows with their closing
        // entries, plus the current row's committed coordinates
        let mut fpart = 0.0;
        for a in 0..a_cur {
            let row = &prefix[a * (nb - 1)..(a + 1) * (nb - 1)];
            let mut s = 0.0;
            for (b, &v) in row.iter().enumerate() {
                fpart += (v * p[a * nb + b]).sqrt();
                s += v;
            }
            fpart += ((marg_a[a] - s).max(0.0) * p[a * nb + nb - 1]).sqrt();
        }
        let committed = prefix.len() - row_start;
        for (b, &v) in prefix[row_start..].iter().enumerate() {
            fpart += (v * p[a_cur * nb + b]).sqrt();
        }
        // Cauchy-Schwarz headroom over the undetermined positions
        let mut mass = (marg_a[a_cur] - row_sum).max(0.0);
        let mut pm: f64 = p[a_cur * nb + committed..(a_cur + 1) * nb].iter().sum();
        for a in (a_cur + 1)..na {
            mass += marg_a[a];
            pm += p[a * nb..(a + 1) * nb].iter().sum::<f64>();
        }
        fpart + (mass * pm).sqrt() >= floor - 1e-12
    };
    let start: Vec<f64> = (0..na)
        .flat_map(|a| p[a * nb..a * nb + nb - 1].to_vec())
        .collect();
    let (v, _) = staged_grid(dof, true, partial_ok, eval, &start)
        .ok_or_else(|| QitError::NonConvergence("empty oracle feasible set".into()))?;
    Ok(v)
}

/// Exact fully smoothed max-information on a diagonal joint instance:
/// as above but with the marginal free and subnormalization allowed.
pub fn exact_smoothing_imax_full(p: &[f64], na: usize, nb: usize, eps: f64) -> Result<f64> {
    let eps = SmoothingRadius::new(eps)?.0;
    validate_joint(p, na, nb)?;
    if eps == 0.0 {
        let marg_a: Vec<f64> = (0..na).map(|a| p[a * nb..(a + 1) * nb].iter().sum()).collect();
        return Ok(diag_imax_bits(p, &marg_a, na, nb));
    }
    let dof = na * nb;
    if dof > 4 {
        return Err(QitError::Cutoff(format!(
            "oracle joint search over {dof} free coordinates not supported (max 4)"
        )));
    }
    let floor = ball_fidelity_floor(eps) - BALL_TOL;
    let p_trace: f64 = p.iter().sum();
    let eval = |joint: &[f64]| -> Option<f64> {
        let tr: f64 = joint.iter().sum();
        let mut f: f64 = joint
            .iter()
            .zip(p.iter())
            .map(|(a, b)| (a * b).sqrt())
            .sum();
        f += ((1.0 - tr).max(0.0) * (1.0 - p_trace).max(0.0)).sqrt();
        if f < floor {
            return None;
        }
        let marg_a: Vec<f64> = (0..na).map(|a| joint[a * nb..(a + 1) * nb].iter().sum()).collect();
        Some(diag_imax_bits(joint, &marg_a, na, nb))
    };
    let partial_ok = flat_prune(p, floor);
    let (v, _) = staged_grid(dof, true, partial_ok, eval, p)
        .ok_or_else(|| QitError::NonConvergence("empty oracle feasible set".into()))?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::imax;
    use crate::qregisters::RegisterShape;
    use crate::testutil::{rand_density, rand_prob, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn diag_state(p: &[f64], label: &str) -> DensityState {
        DensityState::from_diag(RegisterShape::single(label, p.len()), p).unwrap()
    }

    fn diag_op(q: &[f64], label: &str) -> HermitianOperator {
        HermitianOperator::from_diag(RegisterShape::single(label, q.len()), q).unwrap()
    }

    #[test]
    fn tensor_power_dims_and_trace() {
        let rho = diag_state(&[0.75, 0.25], "A");
        let p3 = tensor_power(rho.op(), 3).unwrap();
        assert_eq!(p3.dim(), 8);
        assert_abs_diff_eq!(p3.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p3.matrix()[(0, 0)].re, 0.75f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn dmax_bounds_unsmoothed_anchor() {
        let mut rng = seeded_rng(11);
        for _ in 0..5 {
            let rho = rand_density(&mut rng, RegisterShape::single("A", 3));
            let sigma = rand_density(&mut rng, RegisterShape::single("A", 3));
            let iv = dmax_smoothed_bounds(&rho, sigma.op(), 0.0).unwrap();
            let exact = dmax(&rho.as_subnormalized(), sigma.op()).bits;
            assert!(iv.lower <= exact + 1e-9);
            assert_abs_diff_eq!(iv.upper, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn dmax_bounds_contain_oracle() {
        let p = [0.75, 0.25];
        let q = [0.5, 0.5];
        let iv = dmax_smoothed_bounds(&diag_state(&p, "A"), &diag_op(&q, "A"), 0.1).unwrap();
        let oracle = exact_smoothing_dmax(&p, &q, 0.1).unwrap();
        assert!(iv.lower - 1e-6 <= oracle && oracle <= iv.upper + 1e-6);
    }

    #[test]
    fn dmax_bounds_random_sweep() {
        let mut rng = seeded_rng(12);
        for _ in 0..10 {
            let rho = rand_density(&mut rng, RegisterShape::single("A", 2));
            let sigma = rand_density(&mut rng, RegisterShape::single("A", 2));
            for eps in [0.05, 0.2, 0.5] {
                let iv = dmax_smoothed_bounds(&rho, sigma.op(), eps).unwrap();
                assert!(iv.lower <= iv.upper + 1e-9);
                assert!(iv.upper.is_finite());
            }
        }
    }

    #[test]
    fn dmin_domain_checks() {
        let rho = diag_state(&[0.6, 0.4], "A");
        let sig = diag_op(&[0.5, 0.5], "A");
        // boundary ε = k^(-1/2) accepted, beyond rejected
        assert!(dmin_smoothed_upper(&rho, &sig, 0.5, 4.0, None).is_ok());
        assert!(matches!(
            dmin_smoothed_upper(&rho, &sig, 0.6, 4.0, None),
            Err(QitError::Domain(_))
        ));
        assert!(matches!(
            dmin_smoothed_upper(&rho, &sig, 0.2, 1.0, None),
            Err(QitError::Domain(_))
        ));
        assert!(dmin_smoothed_upper(&rho, &sig, 0.0, 2.0, None).is_err());
    }

    #[test]
    fn dmin_oracle_inside_bounds() {
        let p = [0.7, 0.3];
        let q = [0.4, 0.6];
        let rho = diag_state(&p, "A");
        let sig = diag_op(&q, "A");
        let upper = dmin_smoothed_upper(&rho, &sig, 0.2, 2.0, None).unwrap();
        let upper_combined = dmin_smoothed_upper(&rho, &sig, 0.2, 2.0, Some(0.3)).unwrap();
        let lower = dmin_smoothed_lower(&rho, &sig, 0.2).unwrap();
        let oracle = exact_smoothing_dmin(&p, &q, 0.2).unwrap();
        assert!(lower - 1e-6 <= oracle);
        assert!(oracle <= upper + 1e-6);
        assert!(oracle <= upper_combined + 1e-6);
        assert!(upper_combined <= upper + 1e-9);
    }

    #[test]
    fn dmin_shrink_ordering() {
        let rho = diag_state(&[0.8, 0.2], "A");
        let sig = diag_op(&[0.3, 0.7], "A");
        let upper = dmin_smoothed_upper(&rho, &sig, 1e-3, 2.0, None).unwrap();
        let lower = dmin_smoothed_lower(&rho, &sig, 1e-3).unwrap();
        assert!(lower <= upper);
    }

    #[test]
    fn oracle_eps_zero_exact() {
        let p = [0.75, 0.25];
        let q = [0.5, 0.5];
        assert_abs_diff_eq!(
            exact_smoothing_dmax(&p, &q, 0.0).unwrap(),
            1.5f64.log2(),
            epsilon = 1e-12
        );
        let f = (0.75f64 * 0.5).sqrt() + (0.25f64 * 0.5).sqrt();
        assert_abs_diff_eq!(
            exact_smoothing_dmin(&p, &q, 0.0).unwrap(),
            -2.0 * f.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn oracle_dmax_strictly_decreasing() {
        let p = [1.0, 0.0];
        let q = [0.5, 0.5];
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.1, 0.2, 0.3] {
            let v = exact_smoothing_dmax(&p, &q, eps).unwrap();
            assert!(v < prev - 1e-4 || eps == 0.0, "eps={eps}: {v} vs {prev}");
            prev = v;
        }
        assert_abs_diff_eq!(
            exact_smoothing_dmax(&p, &q, 0.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn oracle_dmin_nondecreasing() {
        let p = [0.6, 0.4];
        let q = [0.2, 0.8];
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.0, 0.1, 0.2, 0.3] {
            let v = exact_smoothing_dmin(&p, &q, eps).unwrap();
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn lemma4_inequality_with_oracle() {
        let mut rng = seeded_rng(13);
        for _ in 0..3 {
            let p = rand_prob(&mut rng, 2);
            let q = rand_prob(&mut rng, 2);
            for (eps, ep) in [(0.1, 0.2), (0.3, 0.4), (0.5, 0.5)] {
                let lhs = exact_smoothing_dmin(&p, &q, eps).unwrap();
                let dm = exact_smoothing_dmax(&p, &q, ep).unwrap();
                let br = eps * (1.0 - ep * ep as f64).sqrt() + ep * (1.0 - eps * eps as f64).sqrt();
                let rhs = dm - (1.0 - br * br).log2();
                assert!(lhs <= rhs + 1e-6, "eps={eps} ep={ep}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn lemma18_inequality_with_oracle() {
        let joint = [0.4, 0.1, 0.1, 0.4];
        for (eps, delta) in [(0.05, 0.1), (0.1, 0.2), (0.15, 0.1)] {
            let lhs = exact_smoothing_imax_partial(&joint, 2, 2, 2.0 * eps + delta).unwrap();
            let rhs = exact_smoothing_imax_full(&joint, 2, 2, eps).unwrap()
                + ((8.0 + delta * delta) / (delta * delta)).log2();
            assert!(lhs <= rhs + 1e-6, "eps={eps} delta={delta}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn imax_bounds_anchor_small_eps() {
        let mut rng = seeded_rng(14);
        let shape = RegisterShape::single("B", 2)
            .concat(&RegisterShape::single("R", 2))
            .unwrap();
        let rho = rand_density(&mut rng, shape);
        let eps = 1e-3;
        let iv = imax_partially_smoothed_bounds(&rho, &["R"], 1, eps).unwrap();
        let tau = partial_trace(rho.op(), &["B"]).unwrap();
        let exact = imax(&rho, &tau).unwrap().bits;
        assert!(iv.lower - 1e-6 <= exact, "lower {} vs {}", iv.lower, exact);
        assert!(exact <= iv.upper + 1e-6, "upper {} vs {}", iv.upper, exact);
    }

    #[test]
    fn imax_bounds_product_straddles_zero() {
        let rho_b = diag_op(&[0.6, 0.4], "B");
        let rho_r = diag_op(&[0.7, 0.3], "R");
        let rho = DensityState::new(tensor(&rho_b, &rho_r).unwrap()).unwrap();
        let iv = imax_partially_smoothed_bounds(&rho, &["R"], 1, 0.1).unwrap();
        assert!(iv.lower <= 0.0 + 1e-9);
        assert!(iv.upper >= 0.0 - 1e-9);
    }

    #[test]
    fn imax_bounds_cutoff() {
        let mut rng = seeded_rng(15);
        let shape = RegisterShape::single("B", 2)
            .concat(&RegisterShape::single("R", 2))
            .unwrap();
        let rho = rand_density(&mut rng, shape);
        assert!(matches!(
            imax_partially_smoothed_bounds(&rho, &["R"], 7, 0.1),
            Err(QitError::Cutoff(_))
        ));
    }

    #[test]
    fn imax_bounds_width_per_copy_shrinks() {
        let joint = [0.4, 0.1, 0.1, 0.4];
        let shape = RegisterShape::single("B", 2)
            .concat(&RegisterShape::single("R", 2))
            .unwrap();
        let rho = DensityState::from_diag(shape, &joint).unwrap();
        let eps = 0.2;
        let mut widths = Vec::new();
        for n in [1usize, 2] {
            let iv = imax_partially_smoothed_bounds(&rho, &["R"], n, eps).unwrap();
            widths.push(iv.width() / n as f64);
        }
        assert!(widths[1] < widths[0]);
    }

    #[test]
    fn oracle_domain_rejections() {
        assert!(exact_smoothing_dmax(&[0.5; 10], &[0.1; 10], 0.1).is_err());
        assert!(exact_smoothing_imax_partial(&[0.25; 4], 2, 2, 1.5).is_err());
        assert!(matches!(
            exact_smoothing_imax_partial(&[1.0 / 9.0; 9], 3, 3, 0.1),
            Err(QitError::Cutoff(_))
        ));
    }
}
