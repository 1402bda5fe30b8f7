//! Unsmoothed entropic functionals: von Neumann entropy, relative
//! entropy and its variance, Rényi families, max/min relative entropies,
//! and the max-information conic program. All values are in bits.

use serde::{Deserialize, Serialize};

use crate::distances::fidelity_psd;
use crate::error::{QitError, Result};
use crate::optimize::{multistart, nelder_mead};
use crate::qregisters::{
    eig_hermitian, geninv_sqrt, matrix_function, partial_trace, positive_projector, sqrt_psd,
    tensor_in_shape, CMat, DensityState, HermitianOperator, SubnormalizedState, C64,
    KERNEL_CUTOFF,
};
use crate::sdp::{min_trace_dominating, SdpResult};
use crate::testutil::seeded_rng;
use rand::Rng;

/// Entropic value in bits; `finite = false` encodes the +∞ of a failed
/// support condition (the `bits` field is then meaningless).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub finite: bool,
}

impl EntropyValue {
    pub fn finite(bits: f64) -> Self {
        EntropyValue { bits, finite: true }
    }

    pub fn infinite() -> Self {
        EntropyValue {
            bits: f64::INFINITY,
            finite: false,
        }
    }
}

fn log2_support(x: &HermitianOperator) -> HermitianOperator {
    matrix_function(x, f64::log2, true).expect("log on support")
}

/// Tr(ρ Π_ker σ) ≤ tol, i.e. ρ ≪ σ numerically.
pub fn support_dominated(rho: &HermitianOperator, sigma: &HermitianOperator) -> bool {
    let proj = positive_projector(sigma);
    let overlap = rho.trace() - proj.pair(rho);
    overlap <= 1e-10 * rho.trace().max(1.0)
}

pub fn von_neumann(rho: &DensityState) -> EntropyValue {
    let eig = eig_hermitian(rho.op());
    let mut s = 0.0;
    for &v in &eig.values {
        if v > KERNEL_CUTOFF {
            s -= v * v.log2();
        }
    }
    EntropyValue::finite(s)
}

pub fn varentropy(rho: &DensityState) -> EntropyValue {
    let eig = eig_hermitian(rho.op());
    let mut s = 0.0;
    let mut s2 = 0.0;
    for &v in &eig.values {
        if v > KERNEL_CUTOFF {
            let l = v.log2();
            s -= v * l;
            s2 += v * l * l;
        }
    }
    EntropyValue::finite(s2 - s * s)
}

pub fn relative_entropy(rho: &SubnormalizedState, sigma: &HermitianOperator) -> EntropyValue {
    if !support_dominated(rho.op(), sigma) {
        return EntropyValue::infinite();
    }
    let lr = log2_support(rho.op());
    let ls = log2_support(sigma);
    EntropyValue::finite(rho.op().pair(&lr) - rho.op().pair(&ls))
}

pub fn relative_entropy_variance(
    rho: &SubnormalizedState,
    sigma: &HermitianOperator,
) -> EntropyValue {
    if !support_dominated(rho.op(), sigma) {
        return EntropyValue::infinite();
    }
    let l = log2_support(rho.op())
        .sub(&log2_support(sigma))
        .expect("same shape");
    let d = rho.op().pair(&l);
    // central moment Tr[rho (L - mu)^2]; the raw-moment form loses ~1e-15
    // absolute to cancellation, which sqrt(V) downstream amplifies to 1e-8
    let n = l.matrix().nrows();
    let centered = l.matrix() - CMat::identity(n, n).scale(d);
    let l2 = HermitianOperator::new(l.shape().clone(), &centered * &centered)
        .expect("square stays hermitian");
    EntropyValue::finite(rho.op().pair(&l2).max(0.0))
}

pub fn dmax(rho: &SubnormalizedState, sigma: &HermitianOperator) -> EntropyValue {
    if !support_dominated(rho.op(), sigma) {
        return EntropyValue::infinite();
    }
    let si = geninv_sqrt(sigma);
    let m = si.matrix() * rho.op().matrix() * si.matrix();
    let h = HermitianOperator::new(rho.op().shape().clone(), m).expect("conjugation");
    let lam = eig_hermitian(&h).values.last().copied().unwrap_or(0.0);
    EntropyValue::finite(lam.max(0.0).log2())
}

pub fn dmin(rho: &SubnormalizedState, sigma: &HermitianOperator) -> EntropyValue {
    let f = fidelity_psd(rho.op(), sigma);
    if f <= 1e-150 {
        return EntropyValue::infinite();
    }
    EntropyValue::finite(-2.0 * f.log2())
}

/// Sandwiched Rényi divergence D̃_α; α = 1/2 and α = ∞ route to the
/// D_min / D_max specializations.
pub fn sandwiched_renyi(
    rho: &DensityState,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<EntropyValue> {
    if alpha <= 0.0 || (alpha - 1.0).abs() < 1e-12 {
        return Err(QitError::Domain(format!(
            "sandwiched Rényi order {alpha} outside (0,1)∪(1,∞)"
        )));
    }
    let rs = rho.as_subnormalized();
    if (alpha - 0.5).abs() < 1e-12 {
        return Ok(dmin(&rs, sigma));
    }
    if alpha.is_infinite() {
        return Ok(dmax(&rs, sigma));
    }
    if alpha > 1.0 && !support_dominated(rho.op(), sigma) {
        return Ok(EntropyValue::infinite());
    }
    let e = (1.0 - alpha) / (2.0 * alpha);
    let se = matrix_function(sigma, |v| v.powf(e), true)?;
    let a = se.matrix() * rho.op().matrix() * se.matrix();
    let h = HermitianOperator::new(rho.op().shape().clone(), a)?;
    let tr: f64 = eig_hermitian(&h)
        .values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v.powf(alpha))
        .sum();
    if tr <= 0.0 {
        return Ok(EntropyValue::infinite());
    }
    Ok(EntropyValue::finite(tr.log2() / (alpha - 1.0)))
}

/// Petz Rényi divergence D_α(ρ‖σ) = (1/(α−1)) log Tr(ρ^α σ^{1−α}),
/// defined here for α ∈ [0,2] (the duality range).
pub fn petz_renyi(
    rho: &DensityState,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<EntropyValue> {
    if !(0.0..=2.0).contains(&alpha) || (alpha - 1.0).abs() < 1e-12 {
        return Err(QitError::Domain(format!(
            "Petz Rényi order {alpha} outside [0,2]\\{{1}}"
        )));
    }
    if alpha > 1.0 && !support_dominated(rho.op(), sigma) {
        return Ok(EntropyValue::infinite());
    }
    let ra = matrix_function(rho.op(), |v| v.max(0.0).powf(alpha), true)?;
    let sb = matrix_function(sigma, |v| v.powf(1.0 - alpha), true)?;
    let tr = ra.pair(&sb);
    if tr <= 0.0 {
        return Ok(EntropyValue::infinite());
    }
    Ok(EntropyValue::finite(tr.log2() / (alpha - 1.0)))
}

fn product_of_marginals(rho: &DensityState, a_labels: &[&str]) -> Result<HermitianOperator> {
    let shape = rho.op().shape().clone();
    let b_labels: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !a_labels.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let rho_a = partial_trace(rho.op(), &b_labels)?;
    let rho_b = partial_trace(rho.op(), a_labels)?;
    tensor_in_shape(&shape, &rho_a, &rho_b)
}

/// I(A:B) = D(ρ_AB ‖ ρ_A ⊗ ρ_B) with A given by `a_labels`.
pub fn mutual_information(rho: &DensityState, a_labels: &[&str]) -> Result<EntropyValue> {
    let prod = product_of_marginals(rho, a_labels)?;
    Ok(relative_entropy(&rho.as_subnormalized(), &prod))
}

/// V(A:B) = V(ρ_AB ‖ ρ_A ⊗ ρ_B).
pub fn mutual_information_variance(rho: &DensityState, a_labels: &[&str]) -> Result<EntropyValue> {
    let prod = product_of_marginals(rho, a_labels)?;
    Ok(relative_entropy_variance(&rho.as_subnormalized(), &prod))
}

/// Max-information with certificate: I_max = log min Tr X over
/// τ_A ⊗ X_B ⪰ ρ_AB. `tau` lives on the A-subset of ρ's labels.
pub fn imax_certified(
    rho: &DensityState,
    tau: &HermitianOperator,
) -> Result<(EntropyValue, SdpResult)> {
    let shape = rho.op().shape().clone();
    let a_labels: Vec<&str> = tau.shape().labels().iter().map(|l| l.as_str()).collect();
    let b_labels: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !a_labels.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let rho_a = partial_trace(rho.op(), &b_labels)?;
    if !support_dominated(&rho_a, tau) {
        return Err(QitError::Domain(
            "tau does not dominate the A marginal".into(),
        ));
    }
    let ti = crate::qregisters::embed(&shape, &a_labels, &geninv_sqrt(tau))?;
    let m = HermitianOperator::new(
        shape.clone(),
        ti.matrix() * rho.op().matrix() * ti.matrix(),
    )?;
    let res = min_trace_dominating(&m, &b_labels, 1e-7)?;
    Ok((EntropyValue::finite(res.primal.log2()), res))
}

pub fn imax(rho: &DensityState, tau: &HermitianOperator) -> Result<EntropyValue> {
    let shape = rho.op().shape().clone();
    let a_labels: Vec<&str> = tau.shape().labels().iter().map(|l| l.as_str()).collect();
    let b_labels: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !a_labels.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let rho_a = partial_trace(rho.op(), &b_labels)?;
    if !support_dominated(&rho_a, tau) {
        return Ok(EntropyValue::infinite());
    }
    imax_certified(rho, tau).map(|(v, _)| v)
}

fn params_to_density(shape: &crate::qregisters::RegisterShape, params: &[f64]) -> DensityState {
    let d = shape.total_dim();
    let g = CMat::from_fn(d, d, |r, c| {
        let i = 2 * (r * d + c);
        C64::new(params[i], params[i + 1])
    });
    let w = &g * g.adjoint();
    let tr = w.trace().re.max(1e-300);
    DensityState::new(HermitianOperator::new(shape.clone(), w.scale(1.0 / tr)).expect("psd"))
        .expect("unit trace")
}

/// max over σ_B of F(ρ_AB, τ_A ⊗ σ_B): multiplicative fixed point with a
/// multi-start Nelder-Mead fallback; any achieved value is a valid lower
/// bound on the max, hence a valid upper bound on Ĩ_{1/2}.
fn max_fidelity_over_sigma(rho: &DensityState, tau: &HermitianOperator) -> Result<f64> {
    let shape = rho.op().shape().clone();
    let a_labels: Vec<&str> = tau.shape().labels().iter().map(|l| l.as_str()).collect();
    let b_shape = shape.without(&a_labels)?;
    let sqrt_rho = sqrt_psd(rho.op());
    let tau_l = crate::qregisters::embed(&shape, &a_labels, tau)?;

    let f_of = |sigma: &HermitianOperator| -> f64 {
        let prod = tensor_in_shape(&shape, tau, sigma).expect("partition");
        fidelity_psd(rho.op(), &prod)
    };

    // fixed point from the B marginal
    let mut sigma = partial_trace(rho.op(), &a_labels)?;
    let tr = sigma.trace();
    sigma = sigma.scale(1.0 / tr);
    let mut best = f_of(&sigma);
    let tau_half_l = sqrt_psd(&tau_l);
    for _ in 0..300 {
        let sig_l = crate::qregisters::embed(&shape, &b_labels_of(&shape, &a_labels), &sigma)?;
        let y = HermitianOperator::new(
            shape.clone(),
            sqrt_rho.matrix() * tau_l.matrix() * sig_l.matrix() * sqrt_rho.matrix(),
        )?;
        let y_inv_half = geninv_sqrt(&y);
        // Tr_A[(τ⊗I)K] = Tr_A[(τ^{1/2}⊗I)K(τ^{1/2}⊗I)] keeps the iterate Hermitian
        let k_mat = sqrt_rho.matrix() * y_inv_half.matrix() * sqrt_rho.matrix();
        let core = HermitianOperator::new(
            shape.clone(),
            tau_half_l.matrix() * k_mat * tau_half_l.matrix(),
        )?;
        let g = partial_trace(&core, &a_labels)?;
        let ss = sqrt_psd(&sigma);
        let next_raw = HermitianOperator::new(
            b_shape.clone(),
            ss.matrix() * g.matrix() * ss.matrix(),
        )?;
        let tr = next_raw.trace();
        if tr <= 0.0 {
            break;
        }
        let next = next_raw.scale(1.0 / tr);
        let fv = f_of(&next);
        let delta = (fv - best).abs();
        if fv > best {
            best = fv;
        }
        sigma = next;
        if delta < 1e-11 {
            break;
        }
    }

    // multi-start fallback
    let d = b_shape.total_dim();
    let nparams = 2 * d * d;
    let mut rng = seeded_rng(0x51_6d_61_78);
    for _ in 0..16 {
        let x0: Vec<f64> = (0..nparams).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, neg) = nelder_mead(
            |x| -f_of(params_to_density(&b_shape, x).op()),
            &x0,
            0.3,
            800,
            1e-11,
        );
        if -neg > best {
            best = -neg;
        }
    }
    Ok(best)
}

fn b_labels_of<'a>(shape: &'a crate::qregisters::RegisterShape, a_labels: &[&str]) -> Vec<&'a str> {
    shape
        .labels()
        .iter()
        .filter(|l| !a_labels.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect()
}

/// Ĩ_α(ρ_AB‖τ_A) = min over σ_B of D̃_α(ρ_AB‖τ_A⊗σ_B). Exact for
/// α ∈ {1/2, ∞}; other orders only with `allow_grid`, which returns a
/// multi-start upper bound rather than a certified optimum.
pub fn renyi_mutual_information(
    rho: &DensityState,
    tau: &HermitianOperator,
    alpha: f64,
    allow_grid: bool,
) -> Result<EntropyValue> {
    if alpha.is_infinite() {
        return imax(rho, tau);
    }
    if (alpha - 0.5).abs() < 1e-12 {
        let f = max_fidelity_over_sigma(rho, tau)?;
        if f <= 1e-150 {
            return Ok(EntropyValue::infinite());
        }
        return Ok(EntropyValue::finite(-2.0 * f.log2()));
    }
    if !allow_grid {
        return Err(QitError::Domain(format!(
            "Rényi mutual information order {alpha} needs the grid flag (upper bound only)"
        )));
    }
    let shape = rho.op().shape().clone();
    let a_labels: Vec<&str> = tau.shape().labels().iter().map(|l| l.as_str()).collect();
    let b_shape = shape.without(&a_labels)?;
    let d = b_shape.total_dim();
    let nparams = 2 * d * d;
    let mut rng = seeded_rng(0x67_72_69_64);
    let cfg = crate::optimize::OptimizerConfig {
        starts: 32,
        ..Default::default()
    };
    let results = multistart(
        |x| {
            let sigma = params_to_density(&b_shape, x);
            let prod = tensor_in_shape(&shape, tau, sigma.op()).expect("partition");
            match sandwiched_renyi(rho, &prod, alpha) {
                Ok(v) if v.finite => v.bits,
                _ => f64::INFINITY,
            }
        },
        |r: &mut rand_chacha::ChaCha8Rng| (0..nparams).map(|_| r.gen_range(-1.0..1.0)).collect(),
        &mut rng,
        &cfg,
        0.3,
    );
    Ok(EntropyValue::finite(results[0].0))
}

/// Classical relative entropy Σ p log(p/q) in bits.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).log2())
        .sum()
}

/// Classical relative entropy variance Σ p log²(p/q) − D² in bits².
pub fn classical_relative_entropy_variance(p: &[f64], q: &[f64]) -> f64 {
    let d = classical_relative_entropy(p, q);
    let m2: f64 = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| {
            let l = (pi / qi).log2();
            pi * l * l
        })
        .sum();
    m2 - d * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qregisters::{purify, tensor, DensityState, PureVector, RegisterShape};
    use crate::testutil::{rand_channel, rand_density, rand_pure, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn qubit(l: &str) -> RegisterShape {
        RegisterShape::single(l, 2)
    }

    fn bell() -> DensityState {
        let shape = qubit("A").concat(&qubit("B")).unwrap();
        let mut amp = crate::qregisters::CVec::zeros(4);
        amp[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PureVector::new(shape, amp).unwrap().density().unwrap()
    }

    #[test]
    fn von_neumann_values() {
        assert_abs_diff_eq!(
            von_neumann(&DensityState::maximally_mixed(qubit("A"))).bits,
            1.0,
            epsilon = 1e-12
        );
        let pure = DensityState::from_diag(qubit("A"), &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(von_neumann(&pure).bits, 0.0, epsilon = 1e-12);
        let q34 = DensityState::from_diag(qubit("A"), &[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(von_neumann(&q34).bits, 0.8112781, epsilon = 1e-7);
    }

    #[test]
    fn varentropy_values() {
        assert_abs_diff_eq!(
            varentropy(&DensityState::maximally_mixed(RegisterShape::single("A", 3))).bits,
            0.0,
            epsilon = 1e-12
        );
        let q34 = DensityState::from_diag(qubit("A"), &[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(varentropy(&q34).bits, 0.4710199, epsilon = 1e-7);
    }

    #[test]
    fn relative_entropy_values() {
        let mut rng = seeded_rng(1);
        let rho = rand_density(&mut rng, qubit("A"));
        let d = relative_entropy(&rho.as_subnormalized(), rho.op());
        assert_abs_diff_eq!(d.bits, 0.0, epsilon = 1e-9);
        let v = relative_entropy_variance(&rho.as_subnormalized(), rho.op());
        assert_abs_diff_eq!(v.bits, 0.0, epsilon = 1e-9);

        let pure = DensityState::from_diag(qubit("A"), &[1.0, 0.0]).unwrap();
        let mix = DensityState::maximally_mixed(qubit("A"));
        assert_abs_diff_eq!(
            relative_entropy(&pure.as_subnormalized(), mix.op()).bits,
            1.0,
            epsilon = 1e-9
        );

        let q34 = DensityState::from_diag(qubit("A"), &[0.75, 0.25]).unwrap();
        let v = relative_entropy_variance(&q34.as_subnormalized(), mix.op());
        assert_abs_diff_eq!(v.bits, 0.4710199, epsilon = 1e-7);
    }

    #[test]
    fn relative_entropy_support_violation() {
        let mix = DensityState::maximally_mixed(qubit("A"));
        let pure = DensityState::from_diag(qubit("A"), &[1.0, 0.0]).unwrap();
        assert!(!relative_entropy(&mix.as_subnormalized(), pure.op()).finite);
    }

    #[test]
    fn dmax_values() {
        let mut rng = seeded_rng(2);
        let rho = rand_density(&mut rng, qubit("A"));
        assert_abs_diff_eq!(dmax(&rho.as_subnormalized(), rho.op()).bits, 0.0, epsilon = 1e-9);

        let pure = DensityState::from_diag(qubit("A"), &[1.0, 0.0]).unwrap();
        let mix = DensityState::maximally_mixed(qubit("A"));
        assert_abs_diff_eq!(
            dmax(&pure.as_subnormalized(), mix.op()).bits,
            1.0,
            epsilon = 1e-9
        );
        assert!(!dmax(&mix.as_subnormalized(), pure.op()).finite);
    }

    #[test]
    fn dmin_values_and_ordering() {
        let pure = DensityState::from_diag(qubit("A"), &[1.0, 0.0]).unwrap();
        let mix = DensityState::maximally_mixed(qubit("A"));
        assert_abs_diff_eq!(
            dmin(&pure.as_subnormalized(), mix.op()).bits,
            1.0,
            epsilon = 1e-9
        );
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let a = rand_density(&mut rng, qubit("A"));
            let b = rand_density(&mut rng, qubit("A"));
            let lo = dmin(&a.as_subnormalized(), b.op()).bits;
            let mid = relative_entropy(&a.as_subnormalized(), b.op()).bits;
            let hi = dmax(&a.as_subnormalized(), b.op()).bits;
            assert!(lo <= mid + 1e-9 && mid <= hi + 1e-9);
        }
    }

    #[test]
    fn sandwiched_renyi_endpoints_and_monotonicity() {
        let mut rng = seeded_rng(4);
        for _ in 0..10 {
            let a = rand_density(&mut rng, qubit("A"));
            let b = rand_density(&mut rng, qubit("A"));
            assert_abs_diff_eq!(
                sandwiched_renyi(&a, a.op(), 0.7).unwrap().bits,
                0.0,
                epsilon = 1e-9
            );
            let half = sandwiched_renyi(&a, b.op(), 0.5).unwrap().bits;
            assert_abs_diff_eq!(
                half,
                dmin(&a.as_subnormalized(), b.op()).bits,
                epsilon = 1e-9
            );
            let inf = sandwiched_renyi(&a, b.op(), f64::INFINITY).unwrap().bits;
            assert_abs_diff_eq!(
                inf,
                dmax(&a.as_subnormalized(), b.op()).bits,
                epsilon = 1e-9
            );
            let mut last = f64::NEG_INFINITY;
            for alpha in [0.5, 0.8, 1.3, 2.0, 4.0] {
                let v = sandwiched_renyi(&a, b.op(), alpha).unwrap().bits;
                assert!(v >= last - 1e-9);
                last = v;
            }
        }
    }

    #[test]
    fn mutual_information_values() {
        let mut rng = seeded_rng(5);
        let a = rand_density(&mut rng, qubit("A"));
        let b = rand_density(&mut rng, qubit("B"));
        let prod = DensityState::new(tensor(a.op(), b.op()).unwrap()).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&prod, &["A"]).unwrap().bits,
            0.0,
            epsilon = 1e-9
        );

        let bell = bell();
        assert_abs_diff_eq!(mutual_information(&bell, &["A"]).unwrap().bits, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            mutual_information_variance(&bell, &["A"]).unwrap().bits,
            0.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn pure_state_variance_identity() {
        // |psi> = sqrt(0.75)|00> + sqrt(0.25)|11>
        let q34 = DensityState::from_diag(qubit("A"), &[0.75, 0.25]).unwrap();
        let psi = purify(&q34, "B").unwrap().density().unwrap();
        let v = mutual_information_variance(&psi, &["A"]).unwrap().bits;
        assert_abs_diff_eq!(v, 1.8840795, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 4.0 * varentropy(&q34).bits, epsilon = 1e-9);
    }

    #[test]
    fn lemma7_random_sweep() {
        let mut rng = seeded_rng(6);
        for dim in [2usize, 3] {
            for _ in 0..30 {
                let shape = RegisterShape::single("A", dim)
                    .concat(&RegisterShape::single("B", dim))
                    .unwrap();
                let psi = rand_pure(&mut rng, shape).density().unwrap();
                let rho_a =
                    DensityState::new(partial_trace(psi.op(), &["B"]).unwrap()).unwrap();
                let va = varentropy(&rho_a).bits;
                let vab = mutual_information_variance(&psi, &["A"]).unwrap().bits;
                assert_abs_diff_eq!(vab, 4.0 * va, epsilon = 1e-8);
                // V(rho_AB || I ⊗ rho_B) = V(A)
                let rho_b = partial_trace(psi.op(), &["A"]).unwrap();
                let prod = tensor_in_shape(
                    psi.op().shape(),
                    &HermitianOperator::identity(RegisterShape::single("A", dim)),
                    &rho_b,
                )
                .unwrap();
                let v2 = relative_entropy_variance(&psi.as_subnormalized(), &prod).bits;
                assert_abs_diff_eq!(v2, va, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn imax_values() {
        let mut rng = seeded_rng(7);
        let a = rand_density(&mut rng, qubit("A"));
        let b = rand_density(&mut rng, qubit("B"));
        let prod = DensityState::new(tensor(a.op(), b.op()).unwrap()).unwrap();
        let v = imax(&prod, a.op()).unwrap();
        assert_abs_diff_eq!(v.bits, 0.0, epsilon = 1e-6);

        let bell = bell();
        let tau = partial_trace(bell.op(), &["B"]).unwrap();
        let (v, cert) = imax_certified(&bell, &tau).unwrap();
        assert_abs_diff_eq!(v.bits, 2.0, epsilon = 1e-6);
        assert!(cert.gap_rel <= 1e-7);
        assert!(cert.feas_min_eig >= -1e-9);
    }

    #[test]
    fn imax_nonlockability() {
        let mut rng = seeded_rng(8);
        for _ in 0..5 {
            let shape = qubit("A")
                .concat(&qubit("B"))
                .unwrap()
                .concat(&qubit("C"))
                .unwrap();
            let rho = rand_density(&mut rng, shape);
            let rho_ab = DensityState::new(partial_trace(rho.op(), &["C"]).unwrap()).unwrap();
            let tau = partial_trace(rho.op(), &["B", "C"]).unwrap();
            let big = imax(&rho, &tau).unwrap().bits;
            let small = imax(&rho_ab, &tau).unwrap().bits;
            assert!(small <= big + 1e-6);
            assert!(big <= small + 2.0 + 1e-6);
        }
    }

    #[test]
    fn renyi_mutual_information_product_zero() {
        let mut rng = seeded_rng(9);
        let a = rand_density(&mut rng, qubit("A"));
        let b = rand_density(&mut rng, qubit("B"));
        let prod = DensityState::new(tensor(a.op(), b.op()).unwrap()).unwrap();
        let v = renyi_mutual_information(&prod, a.op(), f64::INFINITY, false).unwrap();
        assert_abs_diff_eq!(v.bits, 0.0, epsilon = 1e-6);
        let v = renyi_mutual_information(&prod, a.op(), 0.5, false).unwrap();
        assert_abs_diff_eq!(v.bits, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn lemma14_dualities() {
        let mut rng = seeded_rng(10);
        for _ in 0..10 {
            let shape = qubit("A")
                .concat(&qubit("B"))
                .unwrap()
                .concat(&qubit("C"))
                .unwrap();
            let psi = rand_pure(&mut rng, shape).density().unwrap();
            let rho_ab = DensityState::new(partial_trace(psi.op(), &["C"]).unwrap()).unwrap();
            let rho_ac = DensityState::new(partial_trace(psi.op(), &["B"]).unwrap()).unwrap();
            let tau = rand_density(&mut rng, qubit("A"));
            let tau_inv = crate::qregisters::geninv(tau.op());

            // sandwiched pair (∞, 1/2)
            let lhs = renyi_mutual_information(&rho_ab, tau.op(), f64::INFINITY, false)
                .unwrap()
                .bits;
            let rhs = -renyi_mutual_information(&rho_ac, &tau_inv, 0.5, false)
                .unwrap()
                .bits;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6);

            // Petz pair (1.5, 0.5)
            let rho_b = partial_trace(psi.op(), &["A", "C"]).unwrap();
            let rho_c = partial_trace(psi.op(), &["A", "B"]).unwrap();
            let prod_b = tensor_in_shape(rho_ab.op().shape(), tau.op(), &rho_b).unwrap();
            let prod_c = tensor_in_shape(rho_ac.op().shape(), &tau_inv, &rho_c).unwrap();
            let d15 = petz_renyi(&rho_ab, &prod_b, 1.5).unwrap().bits;
            let d05 = petz_renyi(&rho_ac, &prod_c, 0.5).unwrap().bits;
            assert_abs_diff_eq!(d15, -d05, epsilon = 1e-6);

            // variance duality
            let v1 = relative_entropy_variance(&rho_ac.as_subnormalized(), &prod_c).bits;
            let v2 = relative_entropy_variance(&rho_ab.as_subnormalized(), &prod_b).bits;
            assert_abs_diff_eq!(v1, v2, epsilon = 1e-6);
        }
    }

    #[test]
    fn lemma20_variance_bound() {
        let mut rng = seeded_rng(11);
        for _ in 0..20 {
            let shape = qubit("A").concat(&qubit("B")).unwrap();
            let rho = rand_density(&mut rng, shape);
            let v = mutual_information_variance(&rho, &["A"]).unwrap().bits;
            let cap = 4.0 * (5.0f64).log2().powi(2);
            assert!(v <= cap + 1e-9);
        }
    }

    #[test]
    fn data_processing_relative_entropies() {
        let mut rng = seeded_rng(12);
        for _ in 0..10 {
            let a = rand_density(&mut rng, qubit("A"));
            let b = rand_density(&mut rng, qubit("A"));
            let ch = rand_channel(&mut rng, qubit("A"), qubit("A"), 2);
            let na = ch.apply(&a).unwrap();
            let nb = ch.apply(&b).unwrap();
            let pairs = [
                (
                    relative_entropy(&a.as_subnormalized(), b.op()).bits,
                    relative_entropy(&na.as_subnormalized(), nb.op()).bits,
                ),
                (
                    dmax(&a.as_subnormalized(), b.op()).bits,
                    dmax(&na.as_subnormalized(), nb.op()).bits,
                ),
                (
                    dmin(&a.as_subnormalized(), b.op()).bits,
                    dmin(&na.as_subnormalized(), nb.op()).bits,
                ),
            ];
            for (before, after) in pairs {
                assert!(after <= before + 1e-8);
            }
        }
    }

    #[test]
    fn classical_helpers() {
        let p = [0.75, 0.25];
        let q = [0.5, 0.5];
        assert_abs_diff_eq!(classical_relative_entropy(&p, &q), 0.1887219, epsilon = 1e-7);
        assert_abs_diff_eq!(
            classical_relative_entropy_variance(&p, &q),
            0.4710199,
            epsilon = 1e-7
        );
    }
}
