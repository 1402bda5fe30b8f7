//! Fidelity family, purified distance, the tight triangle inequality,
//! and the channel purified distance.
//!
//! Convention: `trace_distance` stores the unnormalized one-norm
//! `‖ρ−σ‖₁` (no 1/2 factor), so the Fuchs-van-de-Graaf sandwich
//! `√(2‖ρ−σ‖₁) ≥ P ≥ ‖ρ−σ‖₁` reads verbatim. This diverges from the
//! common 1/2-normalized convention.

use crate::bounds::BoundInterval;
use crate::error::{QitError, Result};
use crate::optimize::{multistart, OptimizerConfig};
use crate::qchannels::Channel;
use crate::qregisters::{
    eig_hermitian, sqrt_psd, CVec, DensityState, HermitianOperator, PureVector, RegisterShape,
    SubnormalizedState, C64,
};
use crate::testutil::seeded_rng;
use rand::Rng;

/// `‖x‖₁` for a Hermitian operator: sum of absolute eigenvalues.
pub fn trace_norm(x: &HermitianOperator) -> f64 {
    eig_hermitian(x).values.iter().map(|v| v.abs()).sum()
}

/// Unnormalized trace distance `‖ρ−σ‖₁`.
pub fn trace_distance(rho: &SubnormalizedState, sigma: &SubnormalizedState) -> Result<f64> {
    let diff = rho.op().sub(sigma.op())?;
    Ok(trace_norm(&diff))
}

/// Standard fidelity `F(ρ,σ) = ‖√ρ√σ‖₁`, computed as the trace of
/// `√(√σ ρ √σ)` with tiny negative eigenvalues clamped to zero.
pub fn fidelity(rho: &SubnormalizedState, sigma: &SubnormalizedState) -> Result<f64> {
    if rho.op().shape() != sigma.op().shape() {
        return Err(QitError::ShapeMismatch("fidelity".into()));
    }
    Ok(fidelity_psd(rho.op(), sigma.op()))
}

/// Fidelity of arbitrary PSD operators (used with non-state second
/// arguments in the duality chains).
pub fn fidelity_psd(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let ss = sqrt_psd(sigma);
    let m = ss.matrix() * rho.matrix() * ss.matrix();
    let h = HermitianOperator::new(rho.shape().clone(), m).expect("conjugation keeps hermiticity");
    eig_hermitian(&h)
        .values
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum()
}

/// Generalized fidelity `F̄ = F + √((1−Trρ)(1−Trσ))`.
pub fn generalized_fidelity(rho: &SubnormalizedState, sigma: &SubnormalizedState) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    let a = (1.0 - rho.trace()).max(0.0);
    let b = (1.0 - sigma.trace()).max(0.0);
    Ok(f + (a * b).sqrt())
}

/// Purified distance `P = √(1 − F̄²)`.
pub fn purified_distance(rho: &SubnormalizedState, sigma: &SubnormalizedState) -> Result<f64> {
    let fb = generalized_fidelity(rho, sigma)?.min(1.0);
    Ok((1.0 - fb * fb).max(0.0).sqrt())
}

/// Outcome of the tight triangle inequality check:
/// applicable iff `P(ρ,σ)² + P(σ,τ)² ≤ 1`, in which case
/// `lhs = P(ρ,τ)` and `rhs = P(ρ,σ)F(σ,τ) + P(σ,τ)F(ρ,σ)`.
#[derive(Debug, Clone, Copy)]
pub struct TriangleCheck {
    pub applicable: bool,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn tight_triangle_check(
    rho: &DensityState,
    sigma: &DensityState,
    tau: &DensityState,
) -> Result<TriangleCheck> {
    let rs = rho.as_subnormalized();
    let ss = sigma.as_subnormalized();
    let ts = tau.as_subnormalized();
    let p_rs = purified_distance(&rs, &ss)?;
    let p_st = purified_distance(&ss, &ts)?;
    let applicable = p_rs * p_rs + p_st * p_st <= 1.0;
    let lhs = purified_distance(&rs, &ts)?;
    let rhs = p_rs * fidelity(&ss, &ts)? + p_st * fidelity(&rs, &ss)?;
    Ok(TriangleCheck {
        applicable,
        lhs,
        rhs,
    })
}

/// Purified distance between channel outputs on a pure input given by
/// real-parametrized amplitudes (2·d_in·d_ref reals).
fn channel_pair_objective(e: &Channel, f: &Channel, params: &[f64]) -> f64 {
    let d_in = e.in_dim();
    let d = d_in * d_in;
    let mut v = CVec::zeros(d);
    let mut n2 = 0.0;
    for i in 0..d {
        let z = C64::new(params[2 * i], params[2 * i + 1]);
        n2 += z.norm_sqr();
        v[i] = z;
    }
    if n2 < 1e-12 {
        return 0.0;
    }
    let s = 1.0 / n2.sqrt();
    for i in 0..d {
        v[i] *= C64::new(s, 0.0);
    }
    let ref_shape = RegisterShape::single("Rref", d_in);
    let shape = e.in_shape().concat(&ref_shape).expect("fresh label");
    let psi = PureVector::new(shape, v).expect("normalized");
    let out_e = e.apply_extended(&psi).expect("shapes match");
    let out_f = f.apply_extended(&psi).expect("shapes match");
    purified_distance(&out_e.as_subnormalized(), &out_f.as_subnormalized()).expect("same shape")
}

/// Channel purified distance `P(E,F) = max_ψ P((E⊗I)ψ, (F⊗I)ψ)` over
/// pure inputs on A⊗R with |R| = |A|. Multi-start local search: the
/// lower end is the best value found and is always a valid lower bound;
/// the upper end adds the observed spread of the top restarts as a
/// heuristic gap (capped at 1).
pub fn channel_purified_distance(
    e: &Channel,
    f: &Channel,
    cfg: &OptimizerConfig,
) -> Result<BoundInterval> {
    if e.in_shape().dims() != f.in_shape().dims() || e.out_shape().dims() != f.out_shape().dims() {
        return Err(QitError::ShapeMismatch("channel pair".into()));
    }
    let d_in = e.in_dim();
    let nparams = 2 * d_in * d_in;
    let mut rng = seeded_rng(cfg.seed);
    let results = multistart(
        |x| -channel_pair_objective(e, f, x),
        |r: &mut rand_chacha::ChaCha8Rng| (0..nparams).map(|_| r.gen_range(-1.0..1.0)).collect(),
        &mut rng,
        cfg,
        0.25,
    );
    let best = -results[0].0;
    let top = (results.len() / 4).max(1);
    let spread = best - (-results[top.min(results.len() - 1)].0);
    let gap = spread.abs().max(1e-7);
    Ok(BoundInterval::new(
        best,
        (best + gap).min(1.0),
        "best multi-start evaluation (valid lower bound)",
        "lower + optimizer spread heuristic",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qregisters::{DensityState, RegisterShape};
    use crate::testutil::{rand_density, rand_pure, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn qubit() -> RegisterShape {
        RegisterShape::single("A", 2)
    }

    fn ket0() -> DensityState {
        DensityState::from_diag(qubit(), &[1.0, 0.0]).unwrap()
    }

    fn ket1() -> DensityState {
        DensityState::from_diag(qubit(), &[0.0, 1.0]).unwrap()
    }

    fn mixed() -> DensityState {
        DensityState::maximally_mixed(qubit())
    }

    #[test]
    fn fidelity_self_is_trace() {
        let mut rng = seeded_rng(1);
        let rho = rand_density(&mut rng, qubit()).as_subnormalized();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fidelity_orthogonal() {
        let f = fidelity(&ket0().as_subnormalized(), &ket1().as_subnormalized()).unwrap();
        assert!(f < 1e-8);
    }

    #[test]
    fn fidelity_pure_vs_mixed() {
        let f = fidelity(&ket0().as_subnormalized(), &mixed().as_subnormalized()).unwrap();
        assert_abs_diff_eq!(f, 0.7071068, epsilon = 1e-7);
    }

    #[test]
    fn fidelity_symmetric() {
        let mut rng = seeded_rng(2);
        for _ in 0..10 {
            let a = rand_density(&mut rng, qubit()).as_subnormalized();
            let b = rand_density(&mut rng, qubit()).as_subnormalized();
            let f1 = fidelity(&a, &b).unwrap();
            let f2 = fidelity(&b, &a).unwrap();
            assert_abs_diff_eq!(f1, f2, epsilon = 1e-10);
        }
    }

    #[test]
    fn generalized_fidelity_subnormalized() {
        // F̄(0.5|0><0|, 0.5|1><1|) = 0 + sqrt(0.5*0.5) = 0.5
        let a = SubnormalizedState::new(ket0().op().scale(0.5)).unwrap();
        let b = SubnormalizedState::new(ket1().op().scale(0.5)).unwrap();
        assert_abs_diff_eq!(generalized_fidelity(&a, &b).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn generalized_fidelity_identical() {
        let a = SubnormalizedState::new(ket0().op().scale(0.37)).unwrap();
        assert_abs_diff_eq!(generalized_fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn generalized_equals_plain_when_normalized() {
        let mut rng = seeded_rng(3);
        for _ in 0..10 {
            let a = rand_density(&mut rng, qubit()).as_subnormalized();
            let b = rand_density(&mut rng, qubit()).as_subnormalized();
            assert_abs_diff_eq!(
                generalized_fidelity(&a, &b).unwrap(),
                fidelity(&a, &b).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn purified_distance_values() {
        let p0 = purified_distance(&ket0().as_subnormalized(), &ket0().as_subnormalized()).unwrap();
        assert!(p0 < 1e-7);
        let p1 = purified_distance(&ket0().as_subnormalized(), &ket1().as_subnormalized()).unwrap();
        assert_abs_diff_eq!(p1, 1.0, epsilon = 1e-8);
        let pm = purified_distance(&ket0().as_subnormalized(), &mixed().as_subnormalized()).unwrap();
        assert_abs_diff_eq!(pm, 0.7071068, epsilon = 1e-7);
    }

    #[test]
    fn fuchs_van_de_graaf_sandwich() {
        let mut rng = seeded_rng(4);
        for _ in 0..50 {
            let a = rand_density(&mut rng, qubit());
            let b = rand_density(&mut rng, qubit());
            // with T = ‖ρ−σ‖₁ unnormalized: √T ≥ P ≥ T/2
            let t = trace_distance(&a.as_subnormalized(), &b.as_subnormalized()).unwrap();
            let p = purified_distance(&a.as_subnormalized(), &b.as_subnormalized()).unwrap();
            assert!(t.sqrt() >= p - 1e-9);
            assert!(p >= t / 2.0 - 1e-9);
        }
    }

    #[test]
    fn triangle_degenerate_cases() {
        let r = ket0();
        let t = mixed();
        let c = tight_triangle_check(&r, &r, &r).unwrap();
        assert!(c.applicable);
        assert!(c.lhs < 1e-7 && c.rhs < 1e-7);

        let c2 = tight_triangle_check(&r, &r, &t).unwrap();
        assert!(c2.applicable);
        assert_abs_diff_eq!(c2.lhs, c2.rhs, epsilon = 1e-7);
    }

    #[test]
    fn triangle_random_sweep() {
        let mut rng = seeded_rng(5);
        let mut applicable = 0;
        for _ in 0..500 {
            let shape = qubit();
            let r = rand_pure(&mut rng, shape.clone()).density().unwrap();
            let s = rand_density(&mut rng, shape.clone());
            let t = rand_density(&mut rng, shape);
            let c = tight_triangle_check(&r, &s, &t).unwrap();
            if c.applicable {
                applicable += 1;
                assert!(c.lhs <= c.rhs + 1e-9, "lhs={} rhs={}", c.lhs, c.rhs);
            }
        }
        assert!(applicable > 0);
    }

    #[test]
    fn purified_distance_metric_axioms() {
        let mut rng = seeded_rng(6);
        for _ in 0..30 {
            let a = rand_density(&mut rng, qubit()).as_subnormalized();
            let b = rand_density(&mut rng, qubit()).as_subnormalized();
            let c = rand_density(&mut rng, qubit()).as_subnormalized();
            let pab = purified_distance(&a, &b).unwrap();
            let pba = purified_distance(&b, &a).unwrap();
            assert_abs_diff_eq!(pab, pba, epsilon = 1e-10);
            let pac = purified_distance(&a, &c).unwrap();
            let pcb = purified_distance(&c, &b).unwrap();
            assert!(pab <= pac + pcb + 1e-9);
        }
    }
}
