//! Executable protocol constructions: convex split, de Finetti objects,
//! channel symmetrization, the teleportation-based coding step, and the
//! strong converse of the identity channel, plus the scalar cost and
//! fudge-term arithmetic of the achievability chains.

use crate::distances::{fidelity, purified_distance, trace_norm};
use crate::entropies::dmax;
use crate::error::{QitError, Result};
use crate::qchannels::Channel;
use crate::qregisters::{
    partial_trace, tensor, C64, CMat, DensityState, HermitianOperator, PureVector, RegisterShape,
};
use rand::Rng;

/// Convex-split input: ρ_BR on registers [B, R], σ_B on B alone.
#[derive(Debug, Clone)]
pub struct ConvexSplitInstance {
    pub rho_br: DensityState,
    pub sigma_b: DensityState,
    pub n: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexSplitReport {
    pub fidelity: f64,
    pub bound: f64,
    /// log n ≥ D_max(ρ_BR‖σ_B⊗ρ_R) + log(1/δ)
    pub hypothesis_holds: bool,
    pub pass: bool,
}

const CONVEX_SPLIT_DIM_BUDGET: usize = 2048;

fn split_labels(inst: &ConvexSplitInstance) -> Result<(String, String)> {
    let labels = inst.rho_br.op().shape().labels();
    if labels.len() != 2 {
        return Err(QitError::ShapeMismatch(
            "convex split needs ρ on exactly two registers [B, R]".into(),
        ));
    }
    if inst.sigma_b.op().shape().dims() != &inst.rho_br.op().shape().dims()[..1] {
        return Err(QitError::ShapeMismatch("σ_B register".into()));
    }
    Ok((labels[0].clone(), labels[1].clone()))
}

/// τ_{B_I R} = (1/n) Σ_i ρ_{B_iR} ⊗ σ_{B_{I∖i}} on registers B@1..B@n, R.
pub fn convex_split_state(inst: &ConvexSplitInstance) -> Result<DensityState> {
    let (_, r_label) = split_labels(inst)?;
    if inst.n == 0 {
        return Err(QitError::Domain("convex split needs n ≥ 1".into()));
    }
    let db = inst.sigma_b.op().dim();
    let dr = inst.rho_br.op().dim() / db;
    let total = db
        .checked_pow(inst.n as u32)
        .and_then(|v| v.checked_mul(dr))
        .filter(|&v| v <= CONVEX_SPLIT_DIM_BUDGET)
        .ok_or_else(|| {
            QitError::Cutoff(format!(
                "convex split dimension {db}^{} · {dr} above {CONVEX_SPLIT_DIM_BUDGET}",
                inst.n
            ))
        })?;

    let mut labels: Vec<String> = (1..=inst.n).map(|i| format!("B@{i}")).collect();
    let mut dims = vec![db; inst.n];
    labels.push(r_label);
    dims.push(dr);
    let shape = RegisterShape::new(labels, dims)?;

    let rho = inst.rho_br.op().matrix();
    let sig = inst.sigma_b.op().matrix();
    let mut mat = CMat::zeros(total, total);
    let w = C64::new(1.0 / inst.n as f64, 0.0);
    for row in 0..total {
        let rd = shape.digits(row);
        for col in 0..total {
            let cd = shape.digits(col);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..inst.n {
                let mut term = rho[(rd[i] * dr + rd[inst.n], cd[i] * dr + cd[inst.n])];
                if term.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..inst.n {
                    if j != i {
                        term *= sig[(rd[j], cd[j])];
                    }
                }
                acc += term;
            }
            mat[(row, col)] = acc * w;
        }
    }
    DensityState::new(HermitianOperator::new(shape, mat)?)
}

/// Exact fidelity of τ against σ_B^⊗n ⊗ ρ_R, with the Lemma-13-style
/// hypothesis flag and the √(1−δ) bound.
pub fn convex_split_check(inst: &ConvexSplitInstance) -> Result<ConvexSplitReport> {
    let (b_label, _) = split_labels(inst)?;
    if !(0.0 < inst.delta && inst.delta <= 1.0) {
        return Err(QitError::Domain(format!(
            "convex split needs δ in (0,1], got {}",
            inst.delta
        )));
    }
    let tau = convex_split_state(inst)?;
    let rho_r = partial_trace(inst.rho_br.op(), &[b_label.as_str()])?;

    let mut target = inst.sigma_b.op().clone();
    target = {
        let mut t = relabel_single(&target, "B@1")?;
        for i in 2..=inst.n {
            t = tensor(&t, &relabel_single(inst.sigma_b.op(), &format!("B@{i}"))?)?;
        }
        t
    };
    let target = tensor(&target, &rho_r)?;

    let f = fidelity(
        &tau.as_subnormalized(),
        &DensityState::new(target.clone())?.as_subnormalized(),
    )?;

    let prod = tensor(inst.sigma_b.op(), &rho_r)?;
    let dmax_bits = dmax(&inst.rho_br.as_subnormalized(), &prod).bits;
    let hypothesis_holds = (inst.n as f64).log2() >= dmax_bits + (1.0 / inst.delta).log2() - 1e-12;
    let bound = (1.0 - inst.delta).sqrt();
    Ok(ConvexSplitReport {
        fidelity: f,
        bound,
        hypothesis_holds,
        pass: f >= bound - 1e-9,
    })
}

fn relabel_single(op: &HermitianOperator, label: &str) -> Result<HermitianOperator> {
    HermitianOperator::new(
        RegisterShape::single(label, op.dim()),
        op.matrix().clone(),
    )
}

/// Block count and communication cost ½·log n of the convex-split
/// construction at a given D_max (bits): n = ceil(2^{D_max + log(4/δ²)}).
pub fn convex_split_cost(dmax_bits: f64, delta: f64) -> Result<(u64, f64)> {
    if !(0.0 < delta && delta <= 1.0) {
        return Err(QitError::Domain(format!("cost needs δ in (0,1], got {delta}")));
    }
    let log_n = dmax_bits + (4.0 / (delta * delta)).log2();
    if log_n > 62.0 {
        return Err(QitError::Overflow);
    }
    let n = log_n.exp2().ceil().max(1.0) as u64;
    Ok((n, 0.5 * (n as f64).log2()))
}

/// g_{n,d}, the symmetric projector, and ζ = Π_sym / Tr Π_sym. For the
/// Haar measure on pure states, ∫ σ^⊗n dσ commutes with every U^⊗n and
/// every permutation and is supported on the symmetric subspace, so by
/// Schur's lemma it is the normalized symmetric projector.
#[derive(Debug, Clone)]
pub struct DeFinettiObjects {
    pub n: usize,
    pub d: usize,
    /// g_{n,d} = C(n+d²−1, n), exact
    pub g: u128,
    pub sym_dim: u128,
    pub zeta: DensityState,
}

fn binomial_u128(n: u128, k: u128) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or(QitError::Overflow)?
            / (i + 1);
    }
    Ok(acc)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Permutation matrix on an n-register shape: register j moves to
/// position perm[j].
fn permutation_matrix(shape: &RegisterShape, perm: &[usize]) -> CMat {
    let d = shape.total_dim();
    let mut mat = CMat::zeros(d, d);
    for col in 0..d {
        let x = shape.digits(col);
        let mut y = vec![0usize; perm.len()];
        for (j, &pj) in perm.iter().enumerate() {
            y[pj] = x[j];
        }
        mat[(shape.index(&y), col)] = C64::new(1.0, 0.0);
    }
    mat
}

fn nfold_shape(prefix: &str, n: usize, d: usize) -> Result<RegisterShape> {
    RegisterShape::new(
        (1..=n).map(|i| format!("{prefix}@{i}")).collect(),
        vec![d; n],
    )
}

pub fn de_finetti(n: usize, d: usize) -> Result<DeFinettiObjects> {
    if n == 0 || d == 0 {
        return Err(QitError::Domain("de Finetti needs n, d ≥ 1".into()));
    }
    if (d as u128).checked_pow(2 * n as u32).map(|v| v > 4096) != Some(false) {
        return Err(QitError::Cutoff(format!("d^(2n) = {d}^{} above 4096", 2 * n)));
    }
    let g = binomial_u128((n + d * d - 1) as u128, n as u128)?;
    let sym_dim = binomial_u128((n + d - 1) as u128, n as u128)?;
    let shape = nfold_shape("A", n, d)?;
    let dim = shape.total_dim();
    let perms = permutations(n);
    let mut proj = CMat::zeros(dim, dim);
    for p in &perms {
        proj += permutation_matrix(&shape, p);
    }
    proj /= C64::new(perms.len() as f64, 0.0);
    let zeta = DensityState::new(HermitianOperator::new(
        shape,
        proj / C64::new(sym_dim as f64, 0.0),
    )?)?;
    Ok(DeFinettiObjects {
        n,
        d,
        g,
        sym_dim,
        zeta,
    })
}

/// Dimension-counting bound g_{n,d} ≤ (n+1)^{d²−1}.
pub fn de_finetti_g_bound(n: usize, d: usize) -> f64 {
    ((n + 1) as f64).powi((d * d - 1) as i32)
}

fn conjugated_channel(ch: &Channel, perm: &[usize]) -> Result<Channel> {
    let u_in = permutation_matrix(ch.in_shape(), perm);
    let u_out = permutation_matrix(ch.out_shape(), perm);
    let kraus = ch
        .kraus()
        .iter()
        .map(|k| u_out.adjoint() * k * &u_in)
        .collect();
    Channel::new(kraus, ch.in_shape().clone(), ch.out_shape().clone())
}

fn check_nfold(ch: &Channel, n: usize) -> Result<()> {
    if n == 0 || n > 5 {
        return Err(QitError::Cutoff(format!("permutation enumeration capped at n ≤ 5, got {n}")));
    }
    for shape in [ch.in_shape(), ch.out_shape()] {
        if shape.dims().len() != n || shape.dims().windows(2).any(|w| w[0] != w[1]) {
            return Err(QitError::ShapeMismatch(
                "symmetrization needs n isomorphic registers".into(),
            ));
        }
    }
    Ok(())
}

/// T̄ = (1/n!) Σ_π π⁻¹ ∘ T ∘ π over all n! register permutations.
pub fn symmetrize(ch: &Channel, n: usize) -> Result<Channel> {
    check_nfold(ch, n)?;
    let perms = permutations(n);
    let w = C64::new(1.0 / (perms.len() as f64).sqrt(), 0.0);
    let mut kraus = Vec::with_capacity(perms.len() * ch.kraus().len());
    for p in &perms {
        let conj = conjugated_channel(ch, p)?;
        for k in conj.kraus() {
            kraus.push(k * w);
        }
    }
    Channel::new(kraus, ch.in_shape().clone(), ch.out_shape().clone())
}

/// Max over all n! permutations of ‖Choi(π⁻¹∘T∘π) − Choi(T)‖₁; zero iff
/// T is permutation covariant.
pub fn covariance_residual(ch: &Channel, n: usize) -> Result<f64> {
    check_nfold(ch, n)?;
    let base = ch.choi()?;
    let mut worst = 0.0f64;
    for p in permutations(n) {
        let other = conjugated_channel(ch, &p)?.choi()?;
        worst = worst.max(trace_norm(&other.sub(&base)?));
    }
    Ok(worst)
}

/// Both sides of the symmetrization non-increase
/// P(τ, T̄(ρ)) ≤ P(τ, T(ρ)) for permutation-invariant ρ and τ.
pub fn symmetrize_noninc_check(
    ch: &Channel,
    n: usize,
    rho: &DensityState,
    tau: &DensityState,
) -> Result<(f64, f64)> {
    let bar = symmetrize(ch, n)?;
    let lhs = purified_distance(
        &tau.as_subnormalized(),
        &bar.apply(rho)?.as_subnormalized(),
    )?;
    let rhs = purified_distance(
        &tau.as_subnormalized(),
        &ch.apply(rho)?.as_subnormalized(),
    )?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy)]
pub struct TeleportReport {
    /// worst sampled P(p·ψ + (1−p)·ψ⊥, ψ)
    pub worst: f64,
    pub bound: f64,
}

/// Teleportation with classical success probability p leaves the state
/// intact with probability p and lands on an orthogonal error branch
/// otherwise; the purified distance to the identity is then √(1−p).
pub fn teleport_coding_check(
    p_succ: f64,
    d: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<TeleportReport> {
    if !(0.0..=1.0).contains(&p_succ) {
        return Err(QitError::Domain(format!("p_succ={p_succ} outside [0,1]")));
    }
    if d < 2 {
        return Err(QitError::Domain("teleport check needs dimension ≥ 2".into()));
    }
    let shape = RegisterShape::new(
        vec!["A".into(), "R".into()],
        vec![d, d],
    )?;
    let bound = (1.0 - p_succ).sqrt();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let psi = crate::testutil::rand_pure(rng, shape.clone());
        let mut w = crate::testutil::rand_pure(rng, shape.clone()).amplitudes().clone();
        let v = psi.amplitudes();
        let overlap = v.dotc(&w);
        w -= v * overlap;
        let norm = w.norm();
        if norm < 1e-8 {
            continue;
        }
        w /= C64::new(norm, 0.0);
        let perp = PureVector::new(shape.clone(), w)?;
        let out = psi
            .projector()
            .scale(p_succ)
            .add(&perp.projector().scale(1.0 - p_succ))?;
        let p = purified_distance(
            &DensityState::new(out)?.as_subnormalized(),
            &psi.density()?.as_subnormalized(),
        )?;
        // purified distance cannot resolve below sqrt(machine eps) ~ 1.5e-8
        if p > bound + 1e-7 {
            return Err(QitError::Domain(format!(
                "teleport distance {p} exceeds √(1−p_succ) = {bound}"
            )));
        }
        worst = worst.max(p);
    }
    Ok(TeleportReport { worst, bound })
}

#[derive(Debug, Clone, Copy)]
pub struct StrongConverseReport {
    pub p_succ: f64,
    pub rate: f64,
    /// 2^{−n(r − log d)} = d^n / M
    pub bound: f64,
    pub pass: bool,
}

/// Average success of decoding M = |states| uniform messages sent
/// through n uses of the identity channel on dimension d, against the
/// strong-converse bound. Holds for arbitrary encoders and POVMs since
/// Tr(E_i ρ_i) ≤ Tr(E_i) and Σ_i Tr(E_i) = d^n.
pub fn strong_converse_check(
    states: &[DensityState],
    povm: &[HermitianOperator],
    d: usize,
    n: usize,
) -> Result<StrongConverseReport> {
    if states.is_empty() || states.len() != povm.len() {
        return Err(QitError::ShapeMismatch("codebook/POVM length".into()));
    }
    let dim = d
        .checked_pow(n as u32)
        .ok_or(QitError::Overflow)?;
    let mut sum = CMat::zeros(dim, dim);
    for e in povm {
        if e.dim() != dim {
            return Err(QitError::ShapeMismatch("POVM element dimension".into()));
        }
        sum += e.matrix();
    }
    let defect = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| {
            let expected = if i == j { 1.0 } else { 0.0 };
            (sum[(i, j)] - C64::new(expected, 0.0)).norm()
        })
        .fold(0.0f64, f64::max);
    if defect > 1e-9 {
        return Err(QitError::Domain(format!(
            "POVM completeness defect {defect:.3e} above 1e-9"
        )));
    }
    let m = states.len();
    let mut p_succ = 0.0;
    for (rho, e) in states.iter().zip(povm) {
        if rho.op().dim() != dim {
            return Err(QitError::ShapeMismatch("codeword dimension".into()));
        }
        p_succ += rho.op().pair(e);
    }
    p_succ /= m as f64;
    let rate = (m as f64).log2() / n as f64;
    let bound = dim as f64 / m as f64;
    Ok(StrongConverseReport {
        p_succ,
        rate,
        bound,
        pass: p_succ <= bound + 1e-9,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FudgeTerm {
    pub eps_prime: f64,
    pub bits: f64,
}

/// Additive fudge term of the n-fold channel-simulation achievability,
/// collecting the de Finetti constant, the smoothing chain constants,
/// and the convex-split overhead:
/// g = ½log(2/(ε′/72)² + 2) + 2(|A|²−1)log(n+1) + ½log(2/(ε′/24)² + 2)
///   + ½log((8+(ε′/4)²)/(ε′/4)²) + log(4/ε′),
/// with ε′ = (ε/√2)·(n+1)^{(1−|A|²)/2}.
pub fn prop8_fudge(eps: f64, a_dim: usize, n: usize) -> Result<FudgeTerm> {
    if !(0.0 < eps && eps <= 1.0) {
        return Err(QitError::Domain(format!("fudge term needs ε in (0,1], got {eps}")));
    }
    if a_dim < 2 || n == 0 {
        return Err(QitError::Domain("fudge term needs |A| ≥ 2, n ≥ 1".into()));
    }
    let a2 = (a_dim * a_dim) as f64;
    let eps_prime =
        eps / std::f64::consts::SQRT_2 * ((n + 1) as f64).powf((1.0 - a2) / 2.0);
    let e72 = eps_prime / 72.0;
    let e24 = eps_prime / 24.0;
    let e4 = eps_prime / 4.0;
    let bits = 0.5 * (2.0 / (e72 * e72) + 2.0).log2()
        + 2.0 * (a2 - 1.0) * ((n + 1) as f64).log2()
        + 0.5 * (2.0 / (e24 * e24) + 2.0).log2()
        + 0.5 * ((8.0 + e4 * e4) / (e4 * e4)).log2()
        + (4.0 / eps_prime).log2();
    Ok(FudgeTerm { eps_prime, bits })
}

/// Scalar composition step of the coding-converse chain: combining a
/// simulation within √ε with a code within 1−ε gives
/// s(ε) = (1−ε)^{3/2} + √ε·√(1−(1−ε)²). The cross term equals ε√(2−ε),
/// so the usable linear bound is s(ε) ≤ 1 − (3/2 − √2)ε + 3ε^{3/2};
/// any 1 − Θ(ε) bound suffices for the O(log 1/ε) conclusion.
pub fn lemma10_scalar(eps: f64) -> Result<(f64, f64)> {
    if !(0.0 < eps && eps <= 0.2) {
        return Err(QitError::Domain(format!("scalar chain checked on (0, 0.2], got {eps}")));
    }
    let lhs = (1.0 - eps).powf(1.5) + eps.sqrt() * (1.0 - (1.0 - eps) * (1.0 - eps)).sqrt();
    let rhs = 1.0 - (1.5 - std::f64::consts::SQRT_2) * eps + 3.0 * eps.powf(1.5);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::tight_triangle_check;
    use crate::qregisters::tensor_in_shape;
    use crate::smoothing::exact_smoothing_imax_partial;
    use crate::testutil::{rand_channel, rand_density, rand_povm, rand_pure, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn classical_br(p: &[f64; 4]) -> DensityState {
        let shape = RegisterShape::new(vec!["B".into(), "R".into()], vec![2, 2]).unwrap();
        DensityState::from_diag(shape, p).unwrap()
    }

    #[test]
    fn convex_split_product_case() {
        let shape = RegisterShape::new(vec!["B".into(), "R".into()], vec![2, 2]).unwrap();
        let sigma = DensityState::from_diag(RegisterShape::single("B", 2), &[0.7, 0.3]).unwrap();
        let rho_r = DensityState::from_diag(RegisterShape::single("R", 2), &[0.6, 0.4]).unwrap();
        let rho = DensityState::new(
            tensor_in_shape(&shape, sigma.op(), rho_r.op()).unwrap(),
        )
        .unwrap();
        let inst = ConvexSplitInstance {
            rho_br: rho,
            sigma_b: sigma,
            n: 1,
            delta: 1.0,
        };
        let rep = convex_split_check(&inst).unwrap();
        assert!(rep.hypothesis_holds);
        assert_abs_diff_eq!(rep.fidelity, 1.0, epsilon = 1e-10);
        assert!(rep.pass);
    }

    #[test]
    fn convex_split_correlated_qubits() {
        let rho = classical_br(&[0.35, 0.15, 0.15, 0.35]);
        let sigma = rho.marginal(&["R"]).unwrap();
        // D_max = log2(0.35/0.25), so n = ceil(2^{D_max+1}) = 3 meets the
        // hypothesis at δ = 0.5
        let dm = dmax(
            &rho.as_subnormalized(),
            &tensor(sigma.op(), rho.marginal(&["B"]).unwrap().op()).unwrap(),
        )
        .bits;
        assert_abs_diff_eq!(dm, (0.35f64 / 0.25).log2(), epsilon = 1e-10);
        let n = (dm + 1.0).exp2().ceil() as usize;
        assert_eq!(n, 3);
        let rep = convex_split_check(&ConvexSplitInstance {
            rho_br: rho,
            sigma_b: sigma,
            n,
            delta: 0.5,
        })
        .unwrap();
        assert!(rep.hypothesis_holds);
        assert!(rep.pass, "F = {} < bound {}", rep.fidelity, rep.bound);
    }

    #[test]
    fn convex_split_fidelity_nondecreasing_in_n() {
        let rho = classical_br(&[0.4, 0.1, 0.1, 0.4]);
        let sigma = rho.marginal(&["R"]).unwrap();
        let mut last = 0.0;
        for n in 1..=6 {
            let rep = convex_split_check(&ConvexSplitInstance {
                rho_br: rho.clone(),
                sigma_b: sigma.clone(),
                n,
                delta: 0.5,
            })
            .unwrap();
            assert!(rep.fidelity >= last - 1e-10, "n={n}");
            last = rep.fidelity;
        }
    }

    #[test]
    fn convex_split_random_sweep() {
        let mut rng = seeded_rng(1301);
        for trial in 0..25 {
            let shape =
                RegisterShape::new(vec!["B".into(), "R".into()], vec![2, 2]).unwrap();
            let rho = rand_density(&mut rng, shape);
            let sigma = rand_density(&mut rng, RegisterShape::single("B", 2));
            let prod = tensor(sigma.op(), rho.marginal(&["B"]).unwrap().op()).unwrap();
            let dm = dmax(&rho.as_subnormalized(), &prod).bits;
            let delta = 0.5f64;
            let n = ((dm + (1.0 / delta).log2()).exp2().ceil() as usize).max(1);
            if n > 8 {
                continue;
            }
            let rep = convex_split_check(&ConvexSplitInstance {
                rho_br: rho,
                sigma_b: sigma,
                n,
                delta,
            })
            .unwrap();
            assert!(rep.hypothesis_holds, "trial {trial}");
            assert!(rep.pass, "trial {trial}: F = {} < {}", rep.fidelity, rep.bound);
        }
    }

    #[test]
    fn convex_split_cost_matches_oracle_interval() {
        // cost accounting: with the smoothed D_max as input, the
        // communication cost ½·log n stays within ½·I_max^{ε−δ} + log(2/δ)
        // plus the ceiling slack
        let p = [0.4, 0.1, 0.2, 0.3];
        for (eps, delta) in [(0.3, 0.1), (0.2, 0.05), (0.5, 0.25)] {
            let i = exact_smoothing_imax_partial(&p, 2, 2, eps - delta).unwrap();
            let (n, cost) = convex_split_cost(i, delta).unwrap();
            assert!(n >= 1);
            assert!(
                cost <= 0.5 * i + (2.0f64 / delta).log2() + 0.5 + 1e-9,
                "eps={eps} delta={delta}: cost {cost}"
            );
            assert!(cost + 1e-9 >= 0.5 * i + (2.0 / delta).log2() - 0.5);
        }
    }

    #[test]
    fn de_finetti_exact_objects() {
        let obj = de_finetti(2, 2).unwrap();
        assert_eq!(obj.g, 10);
        assert_eq!(obj.sym_dim, 3);
        assert!((obj.g as f64) <= de_finetti_g_bound(2, 2));
        assert_abs_diff_eq!(de_finetti_g_bound(2, 2), 27.0, epsilon = 1e-12);
        // ζ = Π_sym/3: eigenvalues 1/3 (triplet), 0 (singlet)
        let eig = crate::qregisters::eig_hermitian(obj.zeta.op());
        let mut vals = eig.values.clone();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-12);
        for v in &vals[1..] {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-12);
        }
        // single copy: ζ = I/d
        let one = de_finetti(1, 3).unwrap();
        assert_abs_diff_eq!(one.zeta.op().matrix()[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-12);
        assert!(de_finetti(7, 2).is_err());
    }

    #[test]
    fn de_finetti_monte_carlo() {
        let obj = de_finetti(2, 2).unwrap();
        let mut rng = seeded_rng(2207);
        let shape = RegisterShape::single("A", 2);
        let dim = 4;
        let mut avg = CMat::zeros(dim, dim);
        let samples = 10_000;
        for _ in 0..samples {
            let psi = rand_pure(&mut rng, shape.clone());
            let p = psi.projector();
            let m = p.matrix();
            for i in 0..dim {
                for j in 0..dim {
                    avg[(i, j)] += m[(i / 2, j / 2)] * m[(i % 2, j % 2)];
                }
            }
        }
        avg /= C64::new(samples as f64, 0.0);
        let avg_op =
            HermitianOperator::new(obj.zeta.op().shape().clone(), avg).unwrap();
        let dist = trace_norm(&avg_op.sub(obj.zeta.op()).unwrap());
        assert!(dist <= 2e-2, "MC trace distance {dist}");
    }

    #[test]
    fn symmetrize_covariance() {
        let mut rng = seeded_rng(808);
        let shape = nfold_shape("A", 2, 2).unwrap();
        let out = nfold_shape("B", 2, 2).unwrap();
        let ch = rand_channel(&mut rng, shape.clone(), out.clone(), 3);
        let raw = covariance_residual(&ch, 2).unwrap();
        assert!(raw > 1e-3, "random channel should not be covariant, residual {raw}");
        let bar = symmetrize(&ch, 2).unwrap();
        let res = covariance_residual(&bar, 2).unwrap();
        assert!(res <= 1e-10, "symmetrized residual {res}");
        // already-covariant channel: symmetrization is a no-op
        let id = Channel::identity(shape);
        assert!(covariance_residual(&id, 2).unwrap() <= 1e-12);
    }

    #[test]
    fn symmetrize_purified_distance_noninc() {
        let mut rng = seeded_rng(811);
        let shape = nfold_shape("A", 2, 2).unwrap();
        let out = nfold_shape("B", 2, 2).unwrap();
        let ch = rand_channel(&mut rng, shape.clone(), out.clone(), 2);
        let rho = de_finetti(2, 2).unwrap().zeta;
        let rho = DensityState::new(HermitianOperator::new(
            shape,
            rho.op().matrix().clone(),
        ).unwrap())
        .unwrap();
        let tau = DensityState::maximally_mixed(out);
        let (lhs, rhs) = symmetrize_noninc_check(&ch, 2, &rho, &tau).unwrap();
        assert!(lhs <= rhs + 1e-10, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn teleport_bounds() {
        let mut rng = seeded_rng(99);
        let rep = teleport_coding_check(1.0, 2, 50, &mut rng).unwrap();
        assert_abs_diff_eq!(rep.bound, 0.0, epsilon = 1e-12);
        assert!(rep.worst <= 1e-7);
        let rep = teleport_coding_check(0.75, 2, 200, &mut rng).unwrap();
        assert_abs_diff_eq!(rep.bound, 0.5, epsilon = 1e-12);
        assert!(rep.worst <= 0.5 + 1e-9);
        // the orthogonal error branch saturates the bound
        assert!(rep.worst >= 0.5 - 1e-6);
        let rep = teleport_coding_check(0.0, 3, 50, &mut rng).unwrap();
        assert_abs_diff_eq!(rep.bound, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn strong_converse_capacity_point() {
        // orthogonal codebook with projective POVM at r = log d
        let shape = RegisterShape::single("A", 4);
        let mut states = Vec::new();
        let mut povm = Vec::new();
        for i in 0..4 {
            let v = PureVector::basis(shape.clone(), i);
            states.push(v.density().unwrap());
            povm.push(v.projector());
        }
        let rep = strong_converse_check(&states, &povm, 4, 1).unwrap();
        assert_abs_diff_eq!(rep.p_succ, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.bound, 1.0, epsilon = 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn strong_converse_random_sweep() {
        let mut rng = seeded_rng(424242);
        let shape = RegisterShape::single("A", 2);
        for _ in 0..100 {
            // r = 2, d = 2, n = 1: four messages through one qubit
            let povm: Vec<HermitianOperator> = rand_povm(&mut rng, 2, 4)
                .into_iter()
                .map(|m| HermitianOperator::new(shape.clone(), m).unwrap())
                .collect();
            let states: Vec<DensityState> =
                (0..4).map(|_| rand_density(&mut rng, shape.clone())).collect();
            let rep = strong_converse_check(&states, &povm, 2, 1).unwrap();
            assert!(rep.pass);
            assert!(rep.p_succ <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn fudge_term_properties() {
        let g1 = prop8_fudge(0.1, 2, 4).unwrap();
        assert!(g1.bits > 0.0);
        assert!(g1.eps_prime <= 0.1 / std::f64::consts::SQRT_2);
        let g2 = prop8_fudge(0.2, 2, 4).unwrap();
        assert!(g2.bits < g1.bits);
        let g3 = prop8_fudge(0.1, 2, 16).unwrap();
        assert!(g3.bits > g1.bits);
        assert!(prop8_fudge(0.0, 2, 4).is_err());
    }

    #[test]
    fn lemma10_scalar_chain() {
        let mut eps = 0.002;
        while eps <= 0.2 {
            let (lhs, rhs) = lemma10_scalar(eps).unwrap();
            assert!(lhs <= rhs + 1e-12, "eps={eps}: {lhs} > {rhs}");
            // nontrivial: bounded away from 1 linearly in ε
            assert!(lhs < 1.0 - 0.08 * eps);
            eps += 0.002;
        }
    }

    #[test]
    fn lemma10_first_inequality_from_triangle() {
        // three states at purified distances √ε and 1−ε: the tight
        // triangle bound reproduces the composed expression
        let mut rng = seeded_rng(500);
        for _ in 0..20 {
            let eps: f64 = rng.gen_range(0.01..0.2);
            let shape = RegisterShape::single("A", 2);
            let psi = rand_pure(&mut rng, shape.clone());
            let mut w = rand_pure(&mut rng, shape.clone()).amplitudes().clone();
            let overlap = psi.amplitudes().dotc(&w);
            w -= psi.amplitudes() * overlap;
            w /= C64::new(w.norm(), 0.0);
            let perp = PureVector::new(shape.clone(), w).unwrap();
            // mid at P = 1−ε from psi, far at P = √ε from mid
            let mid = DensityState::new(
                psi.projector()
                    .scale(1.0 - (1.0 - eps) * (1.0 - eps))
                    .add(&perp.projector().scale((1.0 - eps) * (1.0 - eps)))
                    .unwrap(),
            )
            .unwrap();
            let far = DensityState::new(
                mid.op().scale(1.0 - eps).add(&psi.projector().scale(eps)).unwrap(),
            )
            .unwrap();
            let chk = tight_triangle_check(&far, &mid, &psi.density().unwrap()).unwrap();
            if chk.applicable {
                assert!(chk.lhs <= chk.rhs + 1e-9);
            }
            // and the composed scalar expression bounds any such triple
            let p1 = purified_distance(
                &far.as_subnormalized(),
                &mid.as_subnormalized(),
            )
            .unwrap();
            let p2 = purified_distance(
                &mid.as_subnormalized(),
                &psi.density().unwrap().as_subnormalized(),
            )
            .unwrap();
            if p1 <= eps.sqrt() && p2 <= 1.0 - eps {
                let (scalar, _) = lemma10_scalar(eps).unwrap();
                let direct = purified_distance(
                    &far.as_subnormalized(),
                    &psi.density().unwrap().as_subnormalized(),
                )
                .unwrap();
                assert!(direct <= scalar + 1e-9, "direct {direct} scalar {scalar}");
            }
        }
    }
}
