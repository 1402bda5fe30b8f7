//! CPTP maps in Kraus form, channel functionals (capacity-like quantity,
//! capacity-achieving input set, maximal variance), and the meta-converse
//! evaluator for covariant channels.

use serde::{Deserialize, Serialize};

use crate::entropies::{mutual_information_variance, von_neumann};
use crate::error::{QitError, Result};
use crate::hypotest::dh;
use crate::optimize::{multistart, OptimizerConfig};
use crate::qregisters::{
    partial_trace, purify, tensor_in_shape, CMat, DensityState, HermitianOperator, PureVector,
    RegisterShape, C64,
};
use crate::testutil::seeded_rng;
use rand::Rng;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<CMat>,
    in_shape: RegisterShape,
    out_shape: RegisterShape,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>, in_shape: RegisterShape, out_shape: RegisterShape) -> Result<Self> {
        let din = in_shape.total_dim();
        let dout = out_shape.total_dim();
        if kraus.is_empty() {
            return Err(QitError::ShapeMismatch("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(QitError::ShapeMismatch(format!(
                    "Kraus operator {}x{} vs {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dout,
                    din
                )));
            }
        }
        let mut sum = CMat::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let defect = (&sum - CMat::identity(din, din)).norm();
        if defect > 1e-10 * (din as f64).sqrt().max(1.0) {
            return Err(QitError::Domain(format!(
                "Kraus completeness defect {defect}"
            )));
        }
        Ok(Channel {
            kraus,
            in_shape,
            out_shape,
        })
    }

    /// Identity channel on a register.
    pub fn identity(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        Channel {
            kraus: vec![CMat::identity(d, d)],
            in_shape: shape.clone(),
            out_shape: shape,
        }
    }

    /// Qubit depolarizing channel: ρ ↦ (1−p)ρ + p I/2.
    pub fn depolarizing_qubit(p: f64, in_label: &str, out_label: &str) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QitError::Domain(format!("depolarizing p={p}")));
        }
        let i = CMat::identity(2, 2);
        let x = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let y = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(0.0, -1.0),
            C64::new(0.0, 1.0), C64::new(0.0, 0.0),
        ]);
        let z = CMat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(-1.0, 0.0),
        ]);
        let w0 = (1.0 - 3.0 * p / 4.0).sqrt();
        let w = (p / 4.0).sqrt();
        let kraus = vec![
            i.scale(w0),
            x.scale(w),
            y.scale(w),
            z.scale(w),
        ];
        Channel::new(
            kraus,
            RegisterShape::single(in_label, 2),
            RegisterShape::single(out_label, 2),
        )
    }

    pub fn in_shape(&self) -> &RegisterShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &RegisterShape {
        &self.out_shape
    }

    pub fn in_dim(&self) -> usize {
        self.in_shape.total_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_shape.total_dim()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn apply_op(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.shape().dims() != self.in_shape.dims() {
            return Err(QitError::ShapeMismatch("channel input".into()));
        }
        let dout = self.out_dim();
        let mut out = CMat::zeros(dout, dout);
        for k in &self.kraus {
            out += k * x.matrix() * k.adjoint();
        }
        HermitianOperator::new(self.out_shape.clone(), out)
    }

    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        DensityState::new(self.apply_op(rho.op())?)
    }

    /// Applies the channel to the leading registers of a larger state,
    /// acting as identity on the rest. The input labels must be a prefix
    /// of the state's labels.
    pub fn apply_extended_op(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        let labels = x.shape().labels();
        let n_in = self.in_shape.labels().len();
        if labels.len() < n_in
            || labels[..n_in]
                .iter()
                .zip(self.in_shape.labels())
                .any(|(a, b)| a != b)
            || x.shape().dims()[..n_in] != *self.in_shape.dims()
        {
            return Err(QitError::ShapeMismatch(
                "channel input labels must be a prefix of the state labels".into(),
            ));
        }
        let rest_labels: Vec<&str> = labels[n_in..].iter().map(|l| l.as_str()).collect();
        let rest_shape = x.shape().without(
            &labels[..n_in].iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        )?;
        let _ = rest_labels;
        let d_rest = rest_shape.total_dim();
        let ident = CMat::identity(d_rest, d_rest);
        let out_shape = self.out_shape.concat(&rest_shape)?;
        let dout = out_shape.total_dim();
        let mut out = CMat::zeros(dout, dout);
        for k in &self.kraus {
            let ke = k.kronecker(&ident);
            out += &ke * x.matrix() * ke.adjoint();
        }
        HermitianOperator::new(out_shape, out)
    }

    pub fn apply_extended(&self, psi: &PureVector) -> Result<DensityState> {
        DensityState::new(self.apply_extended_op(&psi.projector())?)
    }

    /// Choi state (N ⊗ I)(Φ) with Φ the normalized maximally entangled
    /// state; reference registers carry the input labels suffixed "_ref".
    pub fn choi(&self) -> Result<HermitianOperator> {
        let d = self.in_dim();
        let ref_shape = RegisterShape::new(
            self.in_shape
                .labels()
                .iter()
                .map(|l| format!("{l}_ref"))
                .collect(),
            self.in_shape.dims().to_vec(),
        )?;
        let shape = self.in_shape.concat(&ref_shape)?;
        let mut phi = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                phi[(i * d + i, j * d + j)] = C64::new(1.0 / d as f64, 0.0);
            }
        }
        let phi_op = HermitianOperator::new(shape, phi)?;
        self.apply_extended_op(&phi_op)
    }

    /// Stinespring isometry V with row index (b·|E| + e) and column a, so
    /// Tr_E(VρV†) = N(ρ); the environment dimension is the Kraus count.
    pub fn stinespring(&self) -> CMat {
        let din = self.in_dim();
        let dout = self.out_dim();
        let env = self.kraus.len();
        CMat::from_fn(dout * env, din, |row, a| {
            let b = row / env;
            let e = row % env;
            self.kraus[e][(b, a)]
        })
    }

    /// Complementary channel output Tr_B(VρV†) on the environment.
    pub fn complementary_output(&self, rho: &DensityState) -> Result<DensityState> {
        let v = self.stinespring();
        let full = &v * rho.op().matrix() * v.adjoint();
        let env = self.kraus.len();
        let shape = self
            .out_shape
            .concat(&RegisterShape::single("_env", env))?;
        let h = HermitianOperator::new(shape, full)?;
        let out_labels: Vec<&str> = self.out_shape.labels().iter().map(|l| l.as_str()).collect();
        DensityState::new(partial_trace(&h, &out_labels)?)
    }
}

/// Channel JSON: {"kraus":[[[re,im],...],...], "in_dims":[...], "out_dims":[...]}
/// with each Kraus matrix row-major.
#[derive(Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<Vec<[f64; 2]>>,
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
}

impl ChannelJson {
    pub fn from_channel(ch: &Channel) -> Self {
        let dout = ch.out_dim();
        let din = ch.in_dim();
        ChannelJson {
            kraus: ch
                .kraus
                .iter()
                .map(|k| {
                    let mut v = Vec::with_capacity(dout * din);
                    for r in 0..dout {
                        for c in 0..din {
                            v.push([k[(r, c)].re, k[(r, c)].im]);
                        }
                    }
                    v
                })
                .collect(),
            in_dims: ch.in_shape.dims().to_vec(),
            out_dims: ch.out_shape.dims().to_vec(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let din: usize = self.in_dims.iter().product();
        let dout: usize = self.out_dims.iter().product();
        let in_shape = RegisterShape::new(
            (0..self.in_dims.len()).map(|i| format!("A{i}")).collect(),
            self.in_dims.clone(),
        )?;
        let out_shape = RegisterShape::new(
            (0..self.out_dims.len()).map(|i| format!("B{i}")).collect(),
            self.out_dims.clone(),
        )?;
        let kraus = self
            .kraus
            .iter()
            .map(|entries| {
                if entries.len() != dout * din {
                    return Err(QitError::Parse("Kraus entry count".into()));
                }
                Ok(CMat::from_fn(dout, din, |r, c| {
                    let e = entries[r * din + c];
                    C64::new(e[0], e[1])
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Channel::new(kraus, in_shape, out_shape)
    }
}

/// Evaluates I(B:R) for the bipartite output at a given input marginal,
/// using the complementary channel: I = S(N(ρ)) + S(ρ) − S(N^c(ρ)).
pub fn coherent_information_sum(ch: &Channel, rho_a: &DensityState) -> Result<f64> {
    let out = ch.apply(rho_a)?;
    let comp = ch.complementary_output(rho_a)?;
    Ok(von_neumann(&out).bits + von_neumann(rho_a).bits - von_neumann(&comp).bits)
}

/// The bipartite output (N ⊗ I)(ψ) on a canonical purification of ρ_A,
/// with the reference register labelled "R".
pub fn bipartite_output(ch: &Channel, rho_a: &DensityState) -> Result<DensityState> {
    let psi = purify(rho_a, "R")?;
    ch.apply_extended(&psi)
}

#[derive(Debug, Clone)]
pub struct OptimizerReport {
    pub starts: usize,
    pub best: f64,
    pub spread: f64,
    pub converged: bool,
}

/// C(N), V_max, and sampled capacity-achieving inputs.
#[derive(Debug, Clone)]
pub struct ChannelFunctionals {
    /// C(N) = max ½ I(B:R) over inputs; certified lower bound.
    pub capacity_like: f64,
    /// max V(B:R) over the sampled capacity-achieving set; lower bound.
    pub vmax: f64,
    /// Input marginals attaining I(B:R) within 1e-7 of the best.
    pub capacity_inputs: Vec<DensityState>,
    pub report: OptimizerReport,
}

fn params_to_input(shape: &RegisterShape, params: &[f64]) -> DensityState {
    let d = shape.total_dim();
    let g = CMat::from_fn(d, d, |r, c| {
        let i = 2 * (r * d + c);
        C64::new(params[i], params[i + 1])
    });
    let w = &g * g.adjoint() + CMat::identity(d, d).scale(1e-12);
    let tr = w.trace().re;
    DensityState::new(HermitianOperator::new(shape.clone(), w.scale(1.0 / tr)).expect("psd"))
        .expect("unit trace")
}

/// Multi-start maximization of I(B:R) over input states. The returned
/// capacity and V_max are certified lower bounds (the optimum is a sup
/// over a set only sampled here); V_max additionally maximizes only over
/// the sampled capacity-achieving cluster.
pub fn channel_functionals(ch: &Channel, cfg: &OptimizerConfig) -> Result<ChannelFunctionals> {
    if ch.in_dim() > 8 {
        return Err(QitError::Cutoff("input dimension above 8".into()));
    }
    let in_shape = ch.in_shape().clone();
    let d = in_shape.total_dim();
    let nparams = 2 * d * d;
    let mut rng = seeded_rng(cfg.seed);
    let results = multistart(
        |x| {
            let rho = params_to_input(&in_shape, x);
            -coherent_information_sum(ch, &rho).unwrap_or(f64::NEG_INFINITY)
        },
        |r: &mut rand_chacha::ChaCha8Rng| (0..nparams).map(|_| r.gen_range(-1.0..1.0)).collect(),
        &mut rng,
        cfg,
        0.3,
    );
    let best_i = -results[0].0;
    if !best_i.is_finite() {
        return Err(QitError::NonConvergence(
            "no optimizer start produced a finite objective".into(),
        ));
    }
    let spread = best_i - (-results[results.len() - 1].0);
    let mut inputs = Vec::new();
    let mut vmax: f64 = 0.0;
    for (neg, x) in &results {
        if best_i - (-neg) > 1e-7 {
            continue;
        }
        let rho = params_to_input(&in_shape, x);
        let out = bipartite_output(ch, &rho)?;
        let v = mutual_information_variance(&out, &["R"])?.bits;
        if v > vmax {
            vmax = v;
        }
        // deduplicate by operator distance
        if !inputs.iter().any(|p: &DensityState| {
            (p.op().matrix() - rho.op().matrix()).norm() < 1e-5
        }) {
            inputs.push(rho);
        }
    }
    Ok(ChannelFunctionals {
        capacity_like: best_i / 2.0,
        vmax,
        capacity_inputs: inputs,
        report: OptimizerReport {
            starts: cfg.starts,
            best: best_i,
            spread,
            converged: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaConverseMode {
    /// Caller asserts covariance; evaluates at the maximally entangled
    /// input with σ_B = N(I/d). Valid upper bound on the simulation rate.
    CovariantMes,
    /// Multi-start heuristic over inputs with σ_B = N(ρ_A); reported as a
    /// heuristic value, not a certified bound.
    GeneralLowerConf,
}

/// ½ D_h^{ε²}((N⊗I)(ρ_AR) ‖ σ_B ⊗ ρ_R) in the requested mode.
pub fn meta_converse_bound(ch: &Channel, eps: f64, mode: MetaConverseMode) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(QitError::Domain(format!("meta-converse ε={eps}")));
    }
    let eval = |rho_a: &DensityState| -> Result<f64> {
        let out = bipartite_output(ch, rho_a)?;
        let sigma_b = ch.apply(rho_a)?;
        let rho_r = partial_trace(out.op(), &ch.out_labels_vec())?;
        let prod = tensor_in_shape(out.op().shape(), sigma_b.op(), &rho_r)?;
        let v = dh(&out, &prod, eps * eps)?;
        if !v.finite {
            return Ok(f64::INFINITY);
        }
        Ok(v.bits / 2.0)
    };
    match mode {
        MetaConverseMode::CovariantMes => {
            let mm = DensityState::maximally_mixed(ch.in_shape().clone());
            eval(&mm)
        }
        MetaConverseMode::GeneralLowerConf => {
            let in_shape = ch.in_shape().clone();
            let d = in_shape.total_dim();
            let nparams = 2 * d * d;
            let mut rng = seeded_rng(0x6d_63);
            let cfg = OptimizerConfig {
                starts: 16,
                max_iters: 400,
                ..Default::default()
            };
            let results = multistart(
                |x| {
                    let rho = params_to_input(&in_shape, x);
                    -eval(&rho).unwrap_or(f64::NEG_INFINITY)
                },
                |r: &mut rand_chacha::ChaCha8Rng| {
                    (0..nparams).map(|_| r.gen_range(-1.0..1.0)).collect()
                },
                &mut rng,
                &cfg,
                0.3,
            );
            Ok(-results[0].0)
        }
    }
}

impl Channel {
    fn out_labels_vec(&self) -> Vec<&str> {
        self.out_shape.labels().iter().map(|l| l.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_channel, rand_density, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn qubit(l: &str) -> RegisterShape {
        RegisterShape::single(l, 2)
    }

    #[test]
    fn identity_channel_applies() {
        let mut rng = seeded_rng(1);
        let ch = Channel::identity(qubit("A"));
        let rho = rand_density(&mut rng, qubit("A"));
        let out = ch.apply(&rho).unwrap();
        assert!((out.op().matrix() - rho.op().matrix()).norm() < 1e-12);
    }

    #[test]
    fn fully_depolarizing_outputs_mixed() {
        let mut rng = seeded_rng(2);
        let ch = Channel::depolarizing_qubit(1.0, "A", "B").unwrap();
        let rho = rand_density(&mut rng, qubit("A"));
        let out = ch.apply(&rho).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(out.op().matrix()[(i, i)].re, 0.5, epsilon = 1e-12);
        }
        assert!(out.op().matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn choi_marginal_is_maximally_mixed() {
        let mut rng = seeded_rng(3);
        let ch = rand_channel(&mut rng, qubit("A"), qubit("B"), 3);
        let choi = ch.choi().unwrap();
        assert_abs_diff_eq!(choi.trace(), 1.0, epsilon = 1e-10);
        let marg = partial_trace(&choi, &["B"]).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(marg.matrix()[(i, i)].re, 0.5, epsilon = 1e-10);
        }
        assert!(marg.matrix()[(0, 1)].norm() < 1e-10);
    }

    #[test]
    fn stinespring_consistency() {
        let mut rng = seeded_rng(4);
        let ch = rand_channel(&mut rng, qubit("A"), qubit("B"), 2);
        let v = ch.stinespring();
        assert!((v.adjoint() * &v - CMat::identity(2, 2)).norm() < 1e-10);
        let rho = rand_density(&mut rng, qubit("A"));
        let full = &v * rho.op().matrix() * v.adjoint();
        let shape = qubit("B").concat(&RegisterShape::single("E", 2)).unwrap();
        let h = HermitianOperator::new(shape, full).unwrap();
        let out = partial_trace(&h, &["E"]).unwrap();
        let direct = ch.apply(&rho).unwrap();
        assert!((out.matrix() - direct.op().matrix()).norm() < 1e-10);
    }

    #[test]
    fn identity_channel_functionals() {
        let ch = Channel::identity(qubit("A"));
        let cfg = OptimizerConfig {
            starts: 24,
            seed: 5,
            ..Default::default()
        };
        let f = channel_functionals(&ch, &cfg).unwrap();
        assert_abs_diff_eq!(f.capacity_like, 1.0, epsilon = 1e-6);
        assert!(f.vmax <= 1e-8);
        for rho in &f.capacity_inputs {
            let i = coherent_information_sum(&ch, rho).unwrap();
            assert!((i - 2.0 * f.capacity_like).abs() <= 1e-6);
        }
    }

    #[test]
    fn fully_depolarizing_functionals() {
        let ch = Channel::depolarizing_qubit(1.0, "A", "B").unwrap();
        let cfg = OptimizerConfig {
            starts: 8,
            seed: 6,
            ..Default::default()
        };
        let f = channel_functionals(&ch, &cfg).unwrap();
        assert!(f.capacity_like.abs() <= 1e-8);
    }

    #[test]
    fn depolarizing_half_matches_mes_evaluation() {
        let ch = Channel::depolarizing_qubit(0.5, "A", "B").unwrap();
        let mm = DensityState::maximally_mixed(qubit("A"));
        let oracle = coherent_information_sum(&ch, &mm).unwrap() / 2.0;
        let cfg = OptimizerConfig {
            starts: 24,
            seed: 7,
            ..Default::default()
        };
        let f = channel_functionals(&ch, &cfg).unwrap();
        assert_abs_diff_eq!(f.capacity_like, oracle, epsilon = 1e-6);
    }

    #[test]
    fn unitary_covariance_of_functionals() {
        let mut rng = seeded_rng(8);
        let ch = rand_channel(&mut rng, qubit("A"), qubit("B"), 2);
        let u = crate::testutil::rand_unitary(&mut rng, 2);
        let rotated = Channel::new(
            ch.kraus().iter().map(|k| k * &u).collect(),
            qubit("A"),
            qubit("B"),
        )
        .unwrap();
        let cfg = OptimizerConfig {
            starts: 24,
            seed: 9,
            ..Default::default()
        };
        let f1 = channel_functionals(&ch, &cfg).unwrap();
        let f2 = channel_functionals(&rotated, &cfg).unwrap();
        assert_abs_diff_eq!(f1.capacity_like, f2.capacity_like, epsilon = 1e-6);
    }

    #[test]
    fn meta_converse_identity_value() {
        let ch = Channel::identity(qubit("A"));
        let v = meta_converse_bound(&ch, 0.5, MetaConverseMode::CovariantMes).unwrap();
        assert_abs_diff_eq!(v, -(0.1875f64).log2() / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn meta_converse_fully_depolarizing() {
        let ch = Channel::depolarizing_qubit(1.0, "A", "B").unwrap();
        for eps in [0.2, 0.5, 0.8] {
            let v = meta_converse_bound(&ch, eps, MetaConverseMode::CovariantMes).unwrap();
            let expect = -(1.0 - eps * eps).log2() / 2.0;
            assert_abs_diff_eq!(v, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn meta_converse_monotone_in_eps() {
        let ch = Channel::depolarizing_qubit(0.3, "A", "B").unwrap();
        let mut last = f64::NEG_INFINITY;
        for eps in [0.1, 0.3, 0.5, 0.7] {
            let v = meta_converse_bound(&ch, eps, MetaConverseMode::CovariantMes).unwrap();
            assert!(v >= last - 1e-9);
            last = v;
        }
    }
}
