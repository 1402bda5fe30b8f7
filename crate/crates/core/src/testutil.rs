//! Seeded random generators for states, unitaries and channels. Used by
//! the verification suites and the test oracles; all streams are
//! counter-based and reproducible from a single u64 seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qchannels::Channel;
use crate::qregisters::{
    CMat, CVec, DensityState, HermitianOperator, PureVector, RegisterShape,
};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn rand_hermitian(rng: &mut impl Rng, shape: RegisterShape) -> HermitianOperator {
    let n = shape.total_dim();
    let g = ginibre(rng, n, n);
    let h = (&g + g.adjoint()).scale(0.5);
    HermitianOperator::new(shape, h).expect("symmetrized")
}

/// Haar-random pure state vector.
pub fn rand_pure(rng: &mut impl Rng, shape: RegisterShape) -> PureVector {
    let n = shape.total_dim();
    let mut v = CVec::from_fn(n, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    PureVector::new(shape, v).expect("normalized")
}

/// Hilbert-Schmidt random density operator (full rank a.s.).
pub fn rand_density(rng: &mut impl Rng, shape: RegisterShape) -> DensityState {
    let n = shape.total_dim();
    let g = ginibre(rng, n, n);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let op = HermitianOperator::new(shape, w.scale(1.0 / tr)).expect("psd");
    DensityState::new(op).expect("unit trace")
}

/// Haar-random unitary via QR of a Ginibre matrix.
pub fn rand_unitary(rng: &mut impl Rng, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix phases so the distribution is Haar
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random isometry d_in -> d_out (columns orthonormal), d_out >= d_in.
pub fn rand_isometry(rng: &mut impl Rng, d_out: usize, d_in: usize) -> CMat {
    let u = rand_unitary(rng, d_out);
    let mut v = CMat::zeros(d_out, d_in);
    for j in 0..d_in {
        v.set_column(j, &u.column(j));
    }
    v
}

/// Random channel with the given input/output shapes and environment
/// dimension, sampled as a Haar isometry followed by tracing the
/// environment.
pub fn rand_channel(
    rng: &mut impl Rng,
    in_shape: RegisterShape,
    out_shape: RegisterShape,
    env_dim: usize,
) -> Channel {
    let din = in_shape.total_dim();
    let dout = out_shape.total_dim();
    let v = rand_isometry(rng, dout * env_dim, din);
    // Kraus operators K_e[(b, a)] = V[(b*env + e, a)]
    let mut kraus = Vec::with_capacity(env_dim);
    for e in 0..env_dim {
        let k = CMat::from_fn(dout, din, |b, a| v[(b * env_dim + e, a)]);
        kraus.push(k);
    }
    Channel::new(kraus, in_shape, out_shape).expect("isometry gives CPTP")
}

/// Random POVM with `m` outcomes on dimension `d`: Ginibre weights
/// normalized by the inverse square root of their sum.
pub fn rand_povm(rng: &mut impl Rng, d: usize, m: usize) -> Vec<CMat> {
    let ws: Vec<CMat> = (0..m)
        .map(|_| {
            let g = ginibre(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let mut total = CMat::zeros(d, d);
    for w in &ws {
        total += w;
    }
    let shape = RegisterShape::single("P", d);
    let t = HermitianOperator::new(shape, total).expect("psd sum");
    let tinv = crate::qregisters::geninv_sqrt(&t);
    ws.iter()
        .map(|w| tinv.matrix() * w * tinv.matrix())
        .collect()
}

/// Random probability vector of length `d`.
pub fn rand_prob(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    p
}

/// Pure-state amplitudes as a column matrix helper.
pub fn vec_to_density(shape: RegisterShape, v: &DVector<C64>) -> DensityState {
    let mat: DMatrix<C64> = v * v.adjoint();
    DensityState::new(HermitianOperator::new(shape, mat).expect("rank one")).expect("normalized")
}
