//! Interior-point solver for the trace-minimization cone program behind
//! the max-information: minimize Tr X over Hermitian X on the B factor
//! subject to I_A ⊗ X ⪰ M. A dual certificate is produced so the caller
//! never has to trust the solver: any W ⪰ 0 with Tr_A W ⪯ I gives the
//! valid lower bound Tr(M W) on the optimum.

use nalgebra::DMatrix;

use crate::error::{QitError, Result};
use crate::qregisters::{
    eig_hermitian, partial_trace, CMat, HermitianOperator, RegisterShape, C64,
};

/// Solution with primal/dual certificate data.
#[derive(Debug, Clone)]
pub struct SdpResult {
    /// Optimal X on the kept (B) registers.
    pub x: HermitianOperator,
    /// Tr X at the returned point.
    pub primal: f64,
    /// Certified lower bound Tr(M W') from the exact-feasible dual point.
    pub dual: f64,
    /// (primal - dual) / max(1, |primal|).
    pub gap_rel: f64,
    /// Minimum eigenvalue of I ⊗ X − M (≥ small negative means feasible).
    pub feas_min_eig: f64,
}

/// Real orthogonal-ish basis of Hermitian matrices on dimension d:
/// diagonal units, then (E_ij + E_ji)/√2 and i(E_ij − E_ji)/√2.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m = CMat::zeros(d, d);
            m[(i, j)] = C64::new(s, 0.0);
            m[(j, i)] = C64::new(s, 0.0);
            basis.push(m);
            let mut m2 = CMat::zeros(d, d);
            m2[(i, j)] = C64::new(0.0, s);
            m2[(j, i)] = C64::new(0.0, -s);
            basis.push(m2);
        }
    }
    basis
}

/// Coordinates of a Hermitian matrix in the `hermitian_basis` ordering.
fn herm_coords(t: &CMat) -> Vec<f64> {
    let d = t.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(t[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(s2 * t[(i, j)].re);
            out.push(s2 * t[(i, j)].im);
        }
    }
    out
}

fn from_coords(d: usize, basis: &[CMat], coords: &[f64]) -> CMat {
    let mut m = CMat::zeros(d, d);
    for (b, &c) in basis.iter().zip(coords.iter()) {
        m += b.scale(c);
    }
    m
}

/// Embeds an operator `b` living on the `keep` registers of `shape` into
/// the full space, tensored with identity on the remaining registers.
fn lift(shape: &RegisterShape, keep: &[&str], keep_shape: &RegisterShape, b: &CMat) -> CMat {
    let h = HermitianOperator::new(keep_shape.clone(), b.clone()).expect("hermitian iterate");
    crate::qregisters::embed(shape, keep, &h)
        .expect("labels verified by caller")
        .matrix()
        .clone()
}

/// Restores exact feasibility of a candidate primal/dual pair and builds
/// the certified result: X is pushed back into the cone by adding a
/// multiple of the identity, W is clamped to PSD and rescaled so that
/// the partial trace is dominated by the identity.
fn certify(
    m: &HermitianOperator,
    shape: &RegisterShape,
    keep: &[&str],
    keep_shape: &RegisterShape,
    drop: &[&str],
    x0: &CMat,
    w0: &CMat,
) -> Result<SdpResult> {
    let db = keep_shape.total_dim();
    let n = shape.total_dim();
    let mut x = x0.clone();
    let s_h = HermitianOperator::new(shape.clone(), lift(shape, keep, keep_shape, &x) - m.matrix())?;
    let lam_min = eig_hermitian(&s_h).values[0];
    if lam_min < 0.0 {
        x += CMat::identity(db, db).scale(-lam_min + 1e-15);
    }
    let s_h = HermitianOperator::new(shape.clone(), lift(shape, keep, keep_shape, &x) - m.matrix())?;
    let feas_min_eig = eig_hermitian(&s_h).values[0];

    let we = eig_hermitian(&HermitianOperator::new(shape.clone(), w0.clone())?);
    let mut wp = CMat::zeros(n, n);
    for (i, &v) in we.values.iter().enumerate() {
        if v > 0.0 {
            let col = we.vectors.column(i);
            wp += (col * col.adjoint()).scale(v);
        }
    }
    let w_h = HermitianOperator::new(shape.clone(), wp)?;
    let tra_w = partial_trace(&w_h, drop)?;
    let lam = eig_hermitian(&tra_w).values.last().copied().unwrap_or(1.0);
    let scale = if lam > 1.0 { 1.0 / lam } else { 1.0 };
    let dual = w_h.pair(m) * scale;
    let primal = x.trace().re;
    Ok(SdpResult {
        x: HermitianOperator::new(keep_shape.clone(), x)?,
        primal,
        dual,
        gap_rel: (primal - dual) / primal.abs().max(1.0),
        feas_min_eig,
    })
}

/// Newton polish of the complementarity system Tr_A W = I, (SW + WS)/2 = 0
/// from a centered interior-point iterate. Valid only near a strictly
/// complementary nondegenerate optimum; the caller re-certifies the
/// result, so a failed polish is harmless.
#[allow(clippy::too_many_arguments)]
fn polish_kkt(
    m: &HermitianOperator,
    shape: &RegisterShape,
    keep: &[&str],
    keep_shape: &RegisterShape,
    drop: &[&str],
    basis_b: &[CMat],
    lifted: &[CMat],
    basis_w: &[CMat],
    x0: &CMat,
    w0: &CMat,
) -> Option<(CMat, CMat)> {
    let kb = basis_b.len();
    let kn = basis_w.len();
    let db = keep_shape.total_dim();
    let n = shape.total_dim();
    let res_scale = 1.0 + m.matrix().norm();
    let mut xc = herm_coords(x0);
    let mut wc = herm_coords(w0);

    let mut j1 = DMatrix::<f64>::zeros(kb, kn);
    for (l, c) in basis_w.iter().enumerate() {
        let ch = HermitianOperator::new(shape.clone(), c.clone()).ok()?;
        let pt = partial_trace(&ch, drop).ok()?;
        let co = herm_coords(pt.matrix());
        for k in 0..kb {
            j1[(k, l)] = co[k];
        }
    }

    let mut best: Option<(f64, CMat, CMat)> = None;
    for _ in 0..40 {
        let x = from_coords(db, basis_b, &xc);
        let w = from_coords(n, basis_w, &wc);
        let s = lift(shape, keep, keep_shape, &x) - m.matrix();
        let wh = HermitianOperator::new(shape.clone(), w.clone()).ok()?;
        let taw = partial_trace(&wh, drop).ok()?;
        let f1 = herm_coords(&(taw.matrix() - CMat::identity(db, db)));
        let f2 = herm_coords(&((&s * &w + &w * &s).scale(0.5)));
        let res = f1
            .iter()
            .chain(f2.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let improved = best.as_ref().map(|(r, _, _)| res < *r).unwrap_or(true);
        if improved {
            best = Some((res, x.clone(), w.clone()));
        }
        if res < 1e-13 * res_scale {
            break;
        }
        if !improved && res > best.as_ref().unwrap().0 * 1e3 {
            break;
        }

        let mut jac = DMatrix::<f64>::zeros(kb + kn, kb + kn);
        for k in 0..kb {
            for l in 0..kn {
                jac[(k, kb + l)] = j1[(k, l)];
            }
        }
        for (k, lk) in lifted.iter().enumerate() {
            let co = herm_coords(&((lk * &w + &w * lk).scale(0.5)));
            for l in 0..kn {
                jac[(kb + l, k)] = co[l];
            }
        }
        for (lp, c) in basis_w.iter().enumerate() {
            let co = herm_coords(&((&s * c + c * &s).scale(0.5)));
            for l in 0..kn {
                jac[(kb + l, kb + lp)] = co[l];
            }
        }
        let mut rhs = DMatrix::<f64>::zeros(kb + kn, 1);
        for k in 0..kb {
            rhs[(k, 0)] = -f1[k];
        }
        for l in 0..kn {
            rhs[(kb + l, 0)] = -f2[l];
        }
        let delta = jac.lu().solve(&rhs)?;
        for k in 0..kb {
            xc[k] += delta[(k, 0)];
        }
        for l in 0..kn {
            wc[l] += delta[(kb + l, 0)];
        }
    }
    let (res, x, w) = best?;
    if res < 1e-8 * res_scale {
        Some((x, w))
    } else {
        None
    }
}

/// Solves minimize Tr X subject to I ⊗ X ⪰ M, where X lives on the
/// `keep` registers of `m`'s shape and the identity covers the rest.
/// Log-barrier path following with Newton steps; terminates once the
/// certified relative gap is at most `gap_tol`.
pub fn min_trace_dominating(
    m: &HermitianOperator,
    keep: &[&str],
    gap_tol: f64,
) -> Result<SdpResult> {
    let shape = m.shape().clone();
    let drop: Vec<&str> = shape
        .labels()
        .iter()
        .filter(|l| !keep.contains(&l.as_str()))
        .map(|l| l.as_str())
        .collect();
    let keep_shape = shape.without(&drop)?;
    let db = keep_shape.total_dim();
    let n = shape.total_dim();
    let basis = hermitian_basis(db);
    let k = basis.len();
    let lifted: Vec<CMat> = basis.iter().map(|b| lift(&shape, keep, &keep_shape, b)).collect();

    let m_eigs = eig_hermitian(m);
    let lam_max = m_eigs.values.last().copied().unwrap_or(0.0).max(0.0);

    // strictly feasible start
    let mut x = CMat::identity(db, db).scale(lam_max + 1.0);
    let mut t = 1.0f64.max(1.0 / (lam_max + 1.0));
    let max_outer = 80;
    let mut best: Option<SdpResult> = None;
    let mut best_w: Option<CMat> = None;
    let mut stalled = 0usize;

    for _ in 0..max_outer {
        // Newton iterations at barrier parameter t
        for _ in 0..60 {
            let s_mat = lift(&shape, keep, &keep_shape, &x) - m.matrix();
            let s_h = HermitianOperator::new(shape.clone(), s_mat)?;
            let se = eig_hermitian(&s_h);
            if se.values[0] <= 0.0 {
                return Err(QitError::NonConvergence(
                    "barrier iterate left the cone".into(),
                ));
            }
            // S^{-1}
            let mut dinv = crate::qregisters::CVec::zeros(n);
            for (i, &v) in se.values.iter().enumerate() {
                dinv[i] = C64::new(1.0 / v, 0.0);
            }
            let sinv = &se.vectors * CMat::from_diagonal(&dinv) * se.vectors.adjoint();

            // gradient g_k = t Tr(B_k) - Tr(S^{-1} L_k); Hessian
            // H_{kl} = Tr(S^{-1} L_k S^{-1} L_l)
            let sl: Vec<CMat> = lifted.iter().map(|l| &sinv * l).collect();
            let mut grad = DMatrix::<f64>::zeros(k, 1);
            for (i, b) in basis.iter().enumerate() {
                grad[(i, 0)] = t * b.trace().re - sl[i].trace().re;
            }
            let mut hess = DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                for j in i..k {
                    let v = (&sl[i] * &sl[j]).trace().re;
                    hess[(i, j)] = v;
                    hess[(j, i)] = v;
                }
            }
            let ridge = 1e-12 * (hess.trace() / k as f64).max(1e-30);
            for i in 0..k {
                hess[(i, i)] += ridge;
            }
            let step = match hess.clone().cholesky() {
                Some(chol) => chol.solve(&grad),
                None => hess
                    .clone()
                    .lu()
                    .solve(&grad)
                    .ok_or_else(|| QitError::NonConvergence("singular Newton system".into()))?,
            };
            let decrement: f64 = (grad.transpose() * &step)[(0, 0)];
            if decrement <= 1e-12 {
                break;
            }

            // damped Newton step for the self-concordant barrier; backtrack
            // only if the iterate leaves the cone
            let lambda = decrement.sqrt();
            let mut alpha = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
            let mut moved = false;
            for _ in 0..60 {
                let mut xn = x.clone();
                for (i, b) in basis.iter().enumerate() {
                    xn -= b.scale(alpha * step[(i, 0)]);
                }
                let sn = lift(&shape, keep, &keep_shape, &xn) - m.matrix();
                let sh = HermitianOperator::new(shape.clone(), sn)?;
                if eig_hermitian(&sh).values[0] > 0.0 {
                    x = xn;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }

        // certificate at the current point
        let s_mat = lift(&shape, keep, &keep_shape, &x) - m.matrix();
        let s_h = HermitianOperator::new(shape.clone(), s_mat)?;
        let se = eig_hermitian(&s_h);
        let mut dinv = crate::qregisters::CVec::zeros(n);
        for (i, &v) in se.values.iter().enumerate() {
            dinv[i] = C64::new(1.0 / (v.max(1e-300) * t), 0.0);
        }
        let w = &se.vectors * CMat::from_diagonal(&dinv) * se.vectors.adjoint();
        let w_mat = w.clone();
        let w_h = HermitianOperator::new(shape.clone(), w)?;
        let tra_w = partial_trace(&w_h, &drop)?;
        let lam = eig_hermitian(&tra_w).values.last().copied().unwrap_or(1.0);
        let scale = if lam > 1.0 { 1.0 / lam } else { 1.0 };
        let dual = w_h.pair(m) * scale;
        let primal = x.trace().re;
        let gap_rel = (primal - dual) / primal.abs().max(1.0);
        let feas_min_eig = se.values[0];
        let result = SdpResult {
            x: HermitianOperator::new(keep_shape.clone(), x.clone())?,
            primal,
            dual,
            gap_rel,
            feas_min_eig,
        };
        if std::env::var("OSQIT_SDP_TRACE").is_ok() {
            eprintln!(
                "t={t:.3e} gap={:.3e} primal={:.9} dual={:.9} lam={lam:.6}",
                result.gap_rel, result.primal, result.dual
            );
        }
        let better = best
            .as_ref()
            .map(|b| result.gap_rel < b.gap_rel)
            .unwrap_or(true);
        if better {
            best = Some(result);
            best_w = Some(w_mat);
            stalled = 0;
        } else {
            stalled += 1;
        }
        if let Some(b) = &best {
            if b.gap_rel <= gap_tol {
                return Ok(best.unwrap());
            }
        }
        if stalled >= 4 {
            break;
        }
        t *= 4.0;
    }
    let mut b = best.ok_or_else(|| QitError::NonConvergence("no iterate produced".into()))?;

    // the barrier alone bottoms out around sqrt(machine eps); finish with a
    // Newton polish of the complementarity conditions when a dual iterate
    // is available, re-certifying from scratch so the polish needs no trust
    if b.gap_rel > gap_tol {
        if let Some(w0) = &best_w {
            let basis_w = hermitian_basis(n);
            if let Some((xp, wp)) = polish_kkt(
                m,
                &shape,
                keep,
                &keep_shape,
                &drop,
                &basis,
                &lifted,
                &basis_w,
                b.x.matrix(),
                w0,
            ) {
                if let Ok(r) = certify(m, &shape, keep, &keep_shape, &drop, &xp, &wp) {
                    if r.gap_rel < b.gap_rel {
                        b = r;
                    }
                }
            }
        }
    }
    if b.gap_rel <= gap_tol {
        Ok(b)
    } else {
        Err(QitError::NonConvergence(format!(
            "relative duality gap {} above tolerance {}",
            b.gap_rel, gap_tol
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qregisters::{tensor, RegisterShape};
    use crate::testutil::{rand_density, seeded_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_state_optimum_is_lambda_max() {
        // I⊗X ⪰ rho_A⊗rho_B iff X ⪰ λmax(rho_A) rho_B, so the optimum
        // trace is λmax(rho_A)
        let mut rng = seeded_rng(1);
        let a = rand_density(&mut rng, RegisterShape::single("A", 2));
        let b = rand_density(&mut rng, RegisterShape::single("B", 2));
        let lam = *eig_hermitian(a.op()).values.last().unwrap();
        let m = tensor(a.op(), b.op()).unwrap();
        let r = min_trace_dominating(&m, &["B"], 1e-7).unwrap();
        assert_abs_diff_eq!(r.primal, lam, epsilon = 1e-6);
        assert!(r.gap_rel <= 1e-7);
        assert!(r.feas_min_eig >= -1e-9);
    }

    #[test]
    fn bell_state_optimum_is_four() {
        // M = 2 Φ+ (from τ = I/2): min Tr X with I⊗X ⪰ 2Φ+ is 4 (X = I)
        let shape = RegisterShape::single("A", 2)
            .concat(&RegisterShape::single("B", 2))
            .unwrap();
        let mut mat = crate::qregisters::CMat::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            mat[(r, c)] = C64::new(1.0, 0.0);
        }
        let m = HermitianOperator::new(shape, mat).unwrap();
        let r = min_trace_dominating(&m, &["B"], 1e-7).unwrap();
        assert_abs_diff_eq!(r.primal, 4.0, epsilon = 1e-5);
        assert!(r.gap_rel <= 1e-7);
    }

    #[test]
    fn diagonal_closed_form() {
        // diagonal M: optimum X_b = max_a M_{ab,ab}
        let shape = RegisterShape::single("A", 2)
            .concat(&RegisterShape::single("B", 2))
            .unwrap();
        let m =
            HermitianOperator::from_diag(shape, &[0.4, 0.1, 0.2, 0.3]).unwrap();
        let r = min_trace_dominating(&m, &["B"], 1e-7).unwrap();
        assert_abs_diff_eq!(r.primal, 0.4 + 0.3, epsilon = 1e-6);
    }

    #[test]
    fn random_states_certificate_valid() {
        let mut rng = seeded_rng(7);
        let shape = RegisterShape::single("A", 2)
            .concat(&RegisterShape::single("B", 2))
            .unwrap();
        for _ in 0..5 {
            let rho = rand_density(&mut rng, shape.clone());
            let r = min_trace_dominating(rho.op(), &["B"], 1e-7).unwrap();
            assert!(r.dual <= r.primal + 1e-12);
            assert!(r.gap_rel <= 1e-7);
            assert!(r.feas_min_eig >= -1e-9);
        }
    }
}
