//! Exact finite-dimensional linear algebra over labelled multipartite
//! registers: the substrate for every other module.
//!
//! All operators are stored dense; the target scale is total dimension
//! up to 4096. The kernel cutoff [`KERNEL_CUTOFF`] (relative to the
//! largest eigenvalue) defines "support" for every support-dependent
//! quantity in the library, so generalized inverses, relative entropies
//! and max-relative entropies are mutually consistent.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QitError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues below `KERNEL_CUTOFF * lambda_max` are treated as kernel.
pub const KERNEL_CUTOFF: f64 = 1e-12;

/// Hermiticity tolerance (relative Frobenius).
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Ordered list of named registers with their dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterShape {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(labels: Vec<String>, dims: Vec<usize>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(QitError::ShapeMismatch(format!(
                "{} labels vs {} dims",
                labels.len(),
                dims.len()
            )));
        }
        for d in &dims {
            if *d == 0 {
                return Err(QitError::ShapeMismatch("zero dimension".into()));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(QitError::LabelCollision(l.clone()));
            }
        }
        Ok(RegisterShape { labels, dims })
    }

    /// Single register of dimension `d`.
    pub fn single(label: &str, d: usize) -> Self {
        RegisterShape {
            labels: vec![label.to_string()],
            dims: vec![d],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.dims[i])
            .ok_or_else(|| QitError::UnknownLabel(label.to_string()))
    }

    /// Concatenation for tensor products; fails on label collision.
    pub fn concat(&self, other: &RegisterShape) -> Result<RegisterShape> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(QitError::LabelCollision(l.clone()));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend(other.dims.iter().cloned());
        Ok(RegisterShape { labels, dims })
    }

    /// Shape with the given labels removed, preserving the order of the rest.
    pub fn without(&self, drop: &[&str]) -> Result<RegisterShape> {
        for d in drop {
            if !self.labels.iter().any(|l| l == d) {
                return Err(QitError::UnknownLabel((*d).to_string()));
            }
        }
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for (l, d) in self.labels.iter().zip(&self.dims) {
            if !drop.contains(&l.as_str()) {
                labels.push(l.clone());
                dims.push(*d);
            }
        }
        Ok(RegisterShape { labels, dims })
    }

    /// Decompose a flat row-major index into per-register digits.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            out[i] = idx % self.dims[i];
            idx /= self.dims[i];
        }
        out
    }

    /// Recompose per-register digits into a flat row-major index.
    pub fn index(&self, digits: &[usize]) -> usize {
        let mut idx = 0;
        for (d, dim) in digits.iter().zip(&self.dims) {
            idx = idx * dim + d;
        }
        idx
    }
}

/// Hermitian operator on a labelled multipartite register.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    shape: RegisterShape,
    mat: CMat,
}

impl HermitianOperator {
    /// Validates the Hermitian invariant (1e-12 relative Frobenius) and
    /// symmetrizes so downstream eigendecompositions see an exactly
    /// Hermitian matrix.
    pub fn new(shape: RegisterShape, mat: CMat) -> Result<Self> {
        let n = shape.total_dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(QitError::ShapeMismatch(format!(
                "matrix {}x{} vs total dimension {}",
                mat.nrows(),
                mat.ncols(),
                n
            )));
        }
        let norm = mat.norm();
        let defect = (&mat - mat.adjoint()).norm();
        if norm > 0.0 && defect > HERMITIAN_TOL * norm.max(1.0) * 2.0 {
            return Err(QitError::NotHermitian(defect / norm));
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(HermitianOperator { shape, mat: sym })
    }

    pub fn identity(shape: RegisterShape) -> Self {
        let n = shape.total_dim();
        HermitianOperator {
            shape,
            mat: CMat::identity(n, n),
        }
    }

    pub fn from_diag(shape: RegisterShape, diag: &[f64]) -> Result<Self> {
        let n = shape.total_dim();
        if diag.len() != n {
            return Err(QitError::ShapeMismatch("diagonal length".into()));
        }
        let mat = CMat::from_diagonal(&CVec::from_iterator(
            n,
            diag.iter().map(|x| C64::new(*x, 0.0)),
        ));
        Ok(HermitianOperator { shape, mat })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator {
            shape: self.shape.clone(),
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.shape != other.shape {
            return Err(QitError::ShapeMismatch("add".into()));
        }
        Ok(HermitianOperator {
            shape: self.shape.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.shape != other.shape {
            return Err(QitError::ShapeMismatch("sub".into()));
        }
        Ok(HermitianOperator {
            shape: self.shape.clone(),
            mat: &self.mat - &other.mat,
        })
    }

    /// Hilbert-Schmidt pairing Tr(a b); real for Hermitian pairs.
    pub fn pair(&self, other: &HermitianOperator) -> f64 {
        (&self.mat * &other.mat).trace().re
    }
}

/// Kronecker product with concatenated shape.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let shape = a.shape.concat(&b.shape)?;
    Ok(HermitianOperator {
        shape,
        mat: a.mat.kronecker(&b.mat),
    })
}

/// Marginal on the surviving labels; survivors keep their order.
pub fn partial_trace(x: &HermitianOperator, drop: &[&str]) -> Result<HermitianOperator> {
    let keep_shape = x.shape.without(drop)?;
    let n_keep = keep_shape.total_dim();
    let full = &x.shape;
    let keep_pos: Vec<usize> = full
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| !drop.contains(&l.as_str()))
        .map(|(i, _)| i)
        .collect();
    let drop_pos: Vec<usize> = full
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| drop.contains(&l.as_str()))
        .map(|(i, _)| i)
        .collect();
    let drop_dims: Vec<usize> = drop_pos.iter().map(|&i| full.dims()[i]).collect();
    let n_drop: usize = drop_dims.iter().product();

    let mut out = CMat::zeros(n_keep, n_keep);
    let mut full_digits = vec![0usize; full.dims().len()];
    for i in 0..n_keep {
        let di = keep_shape.digits(i);
        for j in 0..n_keep {
            let dj = keep_shape.digits(j);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..n_drop {
                // digits of the traced-out block
                let mut tt = t;
                let mut dd = vec![0usize; drop_dims.len()];
                for k in (0..drop_dims.len()).rev() {
                    dd[k] = tt % drop_dims[k];
                    tt /= drop_dims[k];
                }
                for (k, &p) in keep_pos.iter().enumerate() {
                    full_digits[p] = di[k];
                }
                for (k, &p) in drop_pos.iter().enumerate() {
                    full_digits[p] = dd[k];
                }
                let row = full.index(&full_digits);
                for (k, &p) in keep_pos.iter().enumerate() {
                    full_digits[p] = dj[k];
                }
                let col = full.index(&full_digits);
                acc += x.mat[(row, col)];
            }
            out[(i, j)] = acc;
        }
    }
    HermitianOperator::new(keep_shape, out)
}

/// Embeds `b`, which lives on the `keep` registers of `shape`, into the
/// full space as b ⊗ identity, matched to `shape`'s index order.
pub fn embed(shape: &RegisterShape, keep: &[&str], b: &HermitianOperator) -> Result<HermitianOperator> {
    let drop: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !keep.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let keep_shape = shape.without(&drop)?;
    if b.shape().dims() != keep_shape.dims() {
        return Err(QitError::ShapeMismatch("embed operand".into()));
    }
    let keep_pos: Vec<usize> = shape
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| keep.contains(&l.as_str()))
        .map(|(i, _)| i)
        .collect();
    let n = shape.total_dim();
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        let dr = shape.digits(r);
        for c in 0..n {
            let dc = shape.digits(c);
            let mut ok = true;
            for (p, (x, y)) in dr.iter().zip(dc.iter()).enumerate() {
                if !keep_pos.contains(&p) && x != y {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let kr: Vec<usize> = keep_pos.iter().map(|&p| dr[p]).collect();
            let kc: Vec<usize> = keep_pos.iter().map(|&p| dc[p]).collect();
            out[(r, c)] = b.matrix()[(keep_shape.index(&kr), keep_shape.index(&kc))];
        }
    }
    HermitianOperator::new(shape.clone(), out)
}

/// Tensor product of two marginal operators realized in the index order
/// of `shape` (the labels of `a` and `b` must partition `shape`).
pub fn tensor_in_shape(
    shape: &RegisterShape,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<HermitianOperator> {
    let a_labels: Vec<&str> = a.shape().labels().iter().map(|l| l.as_str()).collect();
    let b_labels: Vec<&str> = b.shape().labels().iter().map(|l| l.as_str()).collect();
    let la = embed(shape, &a_labels, a)?;
    let lb = embed(shape, &b_labels, b)?;
    HermitianOperator::new(shape.clone(), la.matrix() * lb.matrix())
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors, matching `values`.
    pub vectors: CMat,
}

pub fn eig_hermitian(x: &HermitianOperator) -> EigenDecomposition {
    let n = x.dim();
    // Seed with the library decomposition, then polish with cyclic Jacobi
    // sweeps on V*AV. The seed solver can lose several digits on badly
    // scaled complex Hermitian matrices; the similarity is nearly diagonal
    // in the common case, so the polish usually converges in one sweep.
    let se = nalgebra::SymmetricEigen::new(x.mat.clone());
    let mut v = se.eigenvectors.clone();
    let mut a = v.adjoint() * &x.mat * &v;
    let scale = a.norm().max(1e-300);
    for _ in 0..40 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / C64::new(mag, 0.0);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J acts on columns p,q: col_p <- c*col_p - s*conj(phase)*col_q,
                // col_q <- s*phase*col_p + c*col_q; zeroes a[p,q] in J* A J.
                let jp = C64::new(c, 0.0);
                let js = phase * C64::new(s, 0.0);
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * jp - arq * js.conj();
                    a[(r, q)] = arp * js + arq * jp;
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * jp - vrq * js.conj();
                    v[(r, q)] = vrp * js + vrq * jp;
                }
                for rc in 0..n {
                    let apc = a[(p, rc)];
                    let aqc = a[(q, rc)];
                    a[(p, rc)] = apc * jp.conj() - aqc * js;
                    a[(q, rc)] = apc * js.conj() + aqc * jp;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(i));
    }
    EigenDecomposition { values, vectors }
}

/// Applies `f` to the spectrum in the eigenbasis. When `support_only` is
/// set, eigenvalues below the kernel cutoff are mapped to zero instead of
/// being passed to `f` (the log / generalized-inverse convention).
pub fn matrix_function<F: Fn(f64) -> f64>(
    x: &HermitianOperator,
    f: F,
    support_only: bool,
) -> Result<HermitianOperator> {
    let eig = eig_hermitian(x);
    let lmax = eig
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = KERNEL_CUTOFF * lmax.max(1e-300);
    let n = x.dim();
    let mut d = CVec::zeros(n);
    for (i, &v) in eig.values.iter().enumerate() {
        let fv = if support_only && v.abs() <= cutoff {
            0.0
        } else {
            let fv = f(v);
            if !fv.is_finite() {
                return Err(QitError::FunctionUndefined(v));
            }
            fv
        };
        d[i] = C64::new(fv, 0.0);
    }
    let mat = &eig.vectors * CMat::from_diagonal(&d) * eig.vectors.adjoint();
    HermitianOperator::new(x.shape.clone(), mat)
}

/// Square root of a PSD operator; tiny negative eigenvalues are clamped.
pub fn sqrt_psd(x: &HermitianOperator) -> HermitianOperator {
    matrix_function(x, |v| v.max(0.0).sqrt(), false).expect("sqrt is total")
}

/// Inverse on the support; kernel maps to zero.
pub fn geninv(x: &HermitianOperator) -> HermitianOperator {
    matrix_function(x, |v| 1.0 / v, true).expect("geninv acts on support")
}

/// Inverse square root on the support.
pub fn geninv_sqrt(x: &HermitianOperator) -> HermitianOperator {
    matrix_function(x, |v| 1.0 / v.max(0.0).sqrt(), true).expect("support only")
}

/// Projector onto the strictly positive part of the spectrum.
pub fn positive_projector(x: &HermitianOperator) -> HermitianOperator {
    let eig = eig_hermitian(x);
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = KERNEL_CUTOFF * lmax.max(1e-300);
    let n = x.dim();
    let mut d = CVec::zeros(n);
    for (i, &v) in eig.values.iter().enumerate() {
        d[i] = C64::new(if v > cutoff { 1.0 } else { 0.0 }, 0.0);
    }
    let mat = &eig.vectors * CMat::from_diagonal(&d) * eig.vectors.adjoint();
    HermitianOperator::new(x.shape.clone(), mat).expect("projector is Hermitian")
}

/// Projector onto the support (nonzero spectrum, positive or negative).
pub fn support_projector(x: &HermitianOperator) -> HermitianOperator {
    let eig = eig_hermitian(x);
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = KERNEL_CUTOFF * lmax.max(1e-300);
    let n = x.dim();
    let mut d = CVec::zeros(n);
    for (i, &v) in eig.values.iter().enumerate() {
        d[i] = C64::new(if v.abs() > cutoff { 1.0 } else { 0.0 }, 0.0);
    }
    let mat = &eig.vectors * CMat::from_diagonal(&d) * eig.vectors.adjoint();
    HermitianOperator::new(x.shape.clone(), mat).expect("projector is Hermitian")
}

/// Positive semidefinite operator with trace in (0, 1 + 1e-10].
#[derive(Debug, Clone)]
pub struct SubnormalizedState {
    op: HermitianOperator,
}

impl SubnormalizedState {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let eig = eig_hermitian(&op);
        let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmin = eig.values.first().copied().unwrap_or(0.0);
        if lmin < -1e-10 * lmax.max(1.0) {
            return Err(QitError::NotPositive(lmin));
        }
        let tr = op.trace();
        if tr <= 0.0 || tr > 1.0 + 1e-10 {
            return Err(QitError::InvalidTrace(tr));
        }
        Ok(SubnormalizedState { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }
}

/// Positive semidefinite operator with unit trace.
#[derive(Debug, Clone)]
pub struct DensityState {
    op: HermitianOperator,
}

impl DensityState {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(QitError::InvalidTrace(tr));
        }
        let sub = SubnormalizedState::new(op.scale(1.0 / tr))?;
        Ok(DensityState { op: sub.op })
    }

    pub fn from_diag(shape: RegisterShape, diag: &[f64]) -> Result<Self> {
        DensityState::new(HermitianOperator::from_diag(shape, diag)?)
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let n = shape.total_dim();
        let op = HermitianOperator::identity(shape).scale(1.0 / n as f64);
        DensityState { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn as_subnormalized(&self) -> SubnormalizedState {
        SubnormalizedState {
            op: self.op.clone(),
        }
    }

    pub fn marginal(&self, drop: &[&str]) -> Result<DensityState> {
        DensityState::new(partial_trace(&self.op, drop)?)
    }
}

/// Pure state vector on a labelled register.
#[derive(Debug, Clone)]
pub struct PureVector {
    shape: RegisterShape,
    amplitudes: CVec,
}

impl PureVector {
    pub fn new(shape: RegisterShape, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(QitError::ShapeMismatch("amplitude length".into()));
        }
        let n2 = amplitudes.norm_squared();
        if n2 <= 0.0 || n2 > 1.0 + 1e-10 {
            return Err(QitError::InvalidTrace(n2));
        }
        Ok(PureVector { shape, amplitudes })
    }

    pub fn basis(shape: RegisterShape, index: usize) -> Self {
        let n = shape.total_dim();
        let mut v = CVec::zeros(n);
        v[index] = C64::new(1.0, 0.0);
        PureVector {
            shape,
            amplitudes: v,
        }
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// |psi><psi| as a density operator (subnormalized if the vector is).
    pub fn projector(&self) -> HermitianOperator {
        let mat = &self.amplitudes * self.amplitudes.adjoint();
        HermitianOperator::new(self.shape.clone(), mat).expect("rank-1 projector")
    }

    pub fn density(&self) -> Result<DensityState> {
        DensityState::new(self.projector())
    }
}

/// Canonical purification: eigenvalues sorted descending, eigenvector
/// phases fixed so the first nonzero component is real positive, and the
/// new register paired with the sorted eigenbasis index.
pub fn purify(rho: &DensityState, new_label: &str) -> Result<PureVector> {
    let d = rho.op().dim();
    let eig = eig_hermitian(rho.op());
    // descending order
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.values[b].partial_cmp(&eig.values[a]).unwrap());
    let new_shape = rho
        .op()
        .shape()
        .concat(&RegisterShape::single(new_label, d))?;
    let mut amp = CVec::zeros(d * d);
    for (k, &i) in order.iter().enumerate() {
        let lam = eig.values[i].max(0.0);
        if lam <= 0.0 {
            continue;
        }
        let col = eig.vectors.column(i);
        // phase convention: first nonzero component real positive
        let mut phase = C64::new(1.0, 0.0);
        for c in col.iter() {
            if c.norm() > 1e-12 {
                phase = c.conj() / c.norm();
                break;
            }
        }
        let w = lam.sqrt();
        for r in 0..d {
            amp[r * d + k] += col[r] * phase * w;
        }
    }
    PureVector::new(new_shape, amp)
}

// ---------------------------------------------------------------------------
// JSON interchange format
// ---------------------------------------------------------------------------

/// Matrix JSON: {"labels":[...], "dims":[...], "entries":[[re,im],...]} with
/// entries row-major.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_operator(op: &HermitianOperator) -> Self {
        let n = op.dim();
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = op.matrix()[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson {
            labels: op.shape().labels().to_vec(),
            dims: op.shape().dims().to_vec(),
            entries,
        }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let shape = RegisterShape::new(self.labels.clone(), self.dims.clone())?;
        let n = shape.total_dim();
        if self.entries.len() != n * n {
            return Err(QitError::Parse(format!(
                "expected {} entries, got {}",
                n * n,
                self.entries.len()
            )));
        }
        let mat = CMat::from_fn(n, n, |r, c| {
            let e = self.entries[r * n + c];
            C64::new(e[0], e[1])
        });
        HermitianOperator::new(shape, mat)
    }
}
