//! Moderate sequences, the closed-form moderate-deviation expansions of
//! the operational tasks, and residual-trend evaluation of computed
//! one-shot quantities against those expansions.
//!
//! Unit note: error sequences use the natural exponential,
//! ε_n = exp(−n a_n²), while all entropic quantities are in bits. The
//! expansions stay scale-consistent because the second-order term
//! √(2V)·a_n arises from the Gaussian quantile of ε_n, which is
//! base-free: Φ⁻¹(ε_n)/√n ≈ −√(2 ln(1/ε_n)/n) = −√2·a_n.

use crate::error::{QitError, Result};
use crate::hypotest::{dh_classical_iid, ClassicalIIDSpec};

/// A sequence a_n driving the error ε_n = exp(−n a_n²).
#[derive(Debug, Clone)]
pub enum ModerateSequence {
    /// a_n = n^(−α)
    Power { alpha: f64 },
    /// a_n = scale · √(ln n / n); moderate but never strict
    SqrtLogOverN { scale: f64 },
    /// explicit values, a_n = values[n−1]
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub moderate: bool,
    pub strict: bool,
    /// true when the verdict comes from the tail heuristic for tables
    /// rather than a closed-form limit
    pub heuristic: bool,
}

impl ModerateSequence {
    pub fn a(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(QitError::Domain("sequence index starts at 1".into()));
        }
        match self {
            ModerateSequence::Power { alpha } => Ok((n as f64).powf(-alpha)),
            ModerateSequence::SqrtLogOverN { scale } => {
                if n == 1 {
                    Ok(0.0)
                } else {
                    Ok(scale * ((n as f64).ln() / n as f64).sqrt())
                }
            }
            ModerateSequence::Table { values } => values
                .get(n - 1)
                .copied()
                .ok_or_else(|| QitError::Domain(format!("table has no entry for n={n}"))),
        }
    }

    /// ε_n = exp(−n a_n²), natural exponential.
    pub fn eps(&self, n: usize) -> Result<f64> {
        let a = self.a(n)?;
        Ok((-(n as f64) * a * a).exp())
    }

    /// Moderate ⇔ a_n → 0 and n a_n² → ∞; strict additionally needs
    /// (n/ln n) a_n² → ∞. Closed-form for the analytic families; for
    /// tables a monotone tail test over the last quarter, flagged as
    /// heuristic.
    pub fn classify(&self) -> Classification {
        match self {
            ModerateSequence::Power { alpha } => {
                let moderate = *alpha > 0.0 && *alpha < 0.5;
                Classification {
                    moderate,
                    strict: moderate,
                    heuristic: false,
                }
            }
            ModerateSequence::SqrtLogOverN { scale } => Classification {
                moderate: *scale > 0.0,
                strict: false,
                heuristic: false,
            },
            ModerateSequence::Table { values } => {
                let len = values.len();
                if len < 8 {
                    return Classification {
                        moderate: false,
                        strict: false,
                        heuristic: true,
                    };
                }
                let tail = &values[(3 * len / 4)..];
                let start = 3 * len / 4 + 1;
                let decreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-15);
                let growing = |f: &dyn Fn(usize, f64) -> f64| -> bool {
                    let vals: Vec<f64> = tail
                        .iter()
                        .enumerate()
                        .map(|(i, &a)| f(start + i, a))
                        .collect();
                    vals.windows(2).all(|w| w[1] >= w[0] - 1e-15)
                        && vals.last().unwrap() > &(vals.first().unwrap() * 1.01)
                };
                let na2 = |n: usize, a: f64| n as f64 * a * a;
                let na2_log = |n: usize, a: f64| n as f64 * a * a / (n as f64).ln().max(1.0);
                let moderate = decreasing && growing(&na2);
                Classification {
                    moderate,
                    strict: moderate && growing(&na2_log),
                    heuristic: true,
                }
            }
        }
    }
}

/// Multiplicative error-rescaling factor: kε_n or poly(n)·ε_n.
#[derive(Debug, Clone, Copy)]
pub enum RescaleFactor {
    Constant(f64),
    /// n^r; needs a strictly moderate sequence
    Poly(f64),
}

/// Checks whether, at the given n, the rescaled error factor·ε_n still
/// corresponds to a sequence b_n with b_n ≤ (1+η)·a_n, where
/// b_n² = a_n² − ln(factor)/n.
pub fn error_rescale(seq: &ModerateSequence, factor: RescaleFactor, n: usize, eta: f64) -> Result<bool> {
    if eta < 0.0 {
        return Err(QitError::Domain(format!("η must be nonnegative, got {eta}")));
    }
    let ln_factor = match factor {
        RescaleFactor::Constant(k) => {
            if k <= 0.0 {
                return Err(QitError::Domain(format!("factor must be positive, got {k}")));
            }
            k.ln()
        }
        RescaleFactor::Poly(r) => {
            if r < 0.0 {
                return Err(QitError::Domain(format!("poly degree must be nonnegative, got {r}")));
            }
            if !seq.classify().strict {
                return Err(QitError::Domain(
                    "polynomial error rescaling needs a strictly moderate sequence".into(),
                ));
            }
            r * (n as f64).ln()
        }
    };
    let a = seq.a(n)?;
    let b2 = a * a - ln_factor / n as f64;
    let b = b2.max(0.0).sqrt();
    Ok(b <= (1.0 + eta) * a + 1e-15)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionTask {
    StateSplitting,
    SourceLow,
    SourceHigh,
    ChannelSim,
    ChannelCoding,
    ImaxPartial,
}

/// Inputs for the expansions; each task consumes the pair it needs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpansionInputs {
    /// I(R:B) and V(R:B) of a purification, for state splitting and the
    /// smoothed max-information
    pub mutual_information: Option<f64>,
    pub mi_variance: Option<f64>,
    /// S(B) and V(B), for the source tasks
    pub entropy: Option<f64>,
    pub varentropy: Option<f64>,
    /// C(N) and V_max(N), for the channel tasks
    pub capacity: Option<f64>,
    pub vmax: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpansionTerm {
    pub leading: f64,
    /// coefficient multiplying a_n
    pub second_coeff: f64,
    pub task: ExpansionTask,
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| QitError::Domain(format!("expansion input missing: {what}")))
}

fn need_var(v: Option<f64>, what: &str) -> Result<f64> {
    let v = need(v, what)?;
    if v < -1e-12 {
        return Err(QitError::Domain(format!("{what} must be nonnegative, got {v}")));
    }
    Ok(v.max(0.0))
}

/// Leading term and a_n coefficient per task:
/// state splitting ½I + a_n√V, source compression S + 2a_n√V (low
/// error) and S − a_n√V (high error), channel simulation C + a_n√V_max,
/// channel coding C + (a_n/√2)√V_max, and the per-copy partially
/// smoothed max-information I + a_n√(4V).
pub fn expansion_term(task: ExpansionTask, inputs: &ExpansionInputs) -> Result<ExpansionTerm> {
    let (leading, second_coeff) = match task {
        ExpansionTask::StateSplitting => {
            let i = need(inputs.mutual_information, "I(R:B)")?;
            let v = need_var(inputs.mi_variance, "V(R:B)")?;
            (0.5 * i, v.sqrt())
        }
        ExpansionTask::ImaxPartial => {
            let i = need(inputs.mutual_information, "I(R:B)")?;
            let v = need_var(inputs.mi_variance, "V(R:B)")?;
            (i, (4.0 * v).sqrt())
        }
        ExpansionTask::SourceLow => {
            let s = need(inputs.entropy, "S(B)")?;
            let v = need_var(inputs.varentropy, "V(B)")?;
            (s, 2.0 * v.sqrt())
        }
        ExpansionTask::SourceHigh => {
            let s = need(inputs.entropy, "S(B)")?;
            let v = need_var(inputs.varentropy, "V(B)")?;
            (s, -v.sqrt())
        }
        ExpansionTask::ChannelSim => {
            let c = need(inputs.capacity, "C(N)")?;
            let v = need_var(inputs.vmax, "V_max(N)")?;
            (c, v.sqrt())
        }
        ExpansionTask::ChannelCoding => {
            let c = need(inputs.capacity, "C(N)")?;
            let v = need_var(inputs.vmax, "V_max(N)")?;
            (c, v.sqrt() / std::f64::consts::SQRT_2)
        }
    };
    Ok(ExpansionTerm {
        leading,
        second_coeff,
        task,
    })
}

/// Predicted rate/cost in bits per copy at the given n.
pub fn expansion(
    task: ExpansionTask,
    inputs: &ExpansionInputs,
    seq: &ModerateSequence,
    n: usize,
) -> Result<f64> {
    let term = expansion_term(task, inputs)?;
    Ok(term.leading + term.second_coeff * seq.a(n)?)
}

#[derive(Debug, Clone)]
pub enum ResidualTask {
    /// (1/n) D_h^{ε_n}(p^⊗n‖q^⊗n) against D − √(2V)·a_n
    DhIidLow { p: Vec<f64>, q: Vec<f64> },
    /// (1/n) D_h^{1−ε_n}(p^⊗n‖q^⊗n) against D + √(2V)·a_n
    DhIidHigh { p: Vec<f64>, q: Vec<f64> },
    /// per-copy upper end of the partially smoothed max-information of
    /// a diagonal joint instance against I + √(4V)·a_n
    ImaxPartialUpper { joint: Vec<f64>, na: usize, nb: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualPoint {
    pub n: usize,
    pub a_n: f64,
    pub eps_n: f64,
    /// computed one-shot quantity, bits per copy
    pub computed: f64,
    /// leading plus second-order term
    pub predicted: f64,
    pub residual_over_an: f64,
}

fn classical_d_v(p: &[f64], q: &[f64]) -> (f64, f64) {
    let d = crate::entropies::classical_relative_entropy(p, q);
    let v = crate::entropies::classical_relative_entropy_variance(p, q);
    (d, v)
}

/// Evaluates the computed quantity along `n_list` and compares against
/// the moderate-deviation prediction for the task's regime. The points
/// are intended for trend inspection; the empirical threshold where an
/// inequality starts to hold is found with `empirical_n_star`.
pub fn residual_curve(
    task: &ResidualTask,
    seq: &ModerateSequence,
    n_list: &[usize],
) -> Result<Vec<ResidualPoint>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a_n = seq.a(n)?;
        let eps_n = seq.eps(n)?;
        let (computed, predicted) = match task {
            ResidualTask::DhIidLow { p, q } => {
                let spec = ClassicalIIDSpec::new(p.clone(), q.clone(), n)?;
                let h = dh_classical_iid(&spec, eps_n)?;
                if !h.finite {
                    return Err(QitError::Domain(format!("D_h infinite at n={n}")));
                }
                let (d, v) = classical_d_v(p, q);
                (h.bits / n as f64, d - (2.0 * v).sqrt() * a_n)
            }
            ResidualTask::DhIidHigh { p, q } => {
                let spec = ClassicalIIDSpec::new(p.clone(), q.clone(), n)?;
                let h = dh_classical_iid(&spec, 1.0 - eps_n)?;
                if !h.finite {
                    return Err(QitError::Domain(format!("D_h infinite at n={n}")));
                }
                let (d, v) = classical_d_v(p, q);
                (h.bits / n as f64, d + (2.0 * v).sqrt() * a_n)
            }
            ResidualTask::ImaxPartialUpper { joint, na, nb } => {
                if joint.len() != na * nb {
                    return Err(QitError::ShapeMismatch("joint instance".into()));
                }
                let pa: Vec<f64> = (0..*na)
                    .map(|a| joint[a * nb..(a + 1) * nb].iter().sum())
                    .collect();
                let pb: Vec<f64> = (0..*nb)
                    .map(|b| (0..*na).map(|a| joint[a * nb + b]).sum())
                    .collect();
                let prod: Vec<f64> = (0..*na)
                    .flat_map(|a| (0..*nb).map(move |b| (a, b)))
                    .map(|(a, b)| pa[a] * pb[b])
                    .collect();
                let eps = eps_n.sqrt().min(std::f64::consts::FRAC_1_SQRT_2);
                let e4 = (eps / 4.0) * (eps / 4.0);
                let e2 = (eps / 2.0) * (eps / 2.0);
                let spec = ClassicalIIDSpec::new(joint.clone(), prod.clone(), n)?;
                let h = dh_classical_iid(&spec, 1.0 - e4)?;
                if !h.finite {
                    return Err(QitError::Domain(format!("D_h infinite at n={n}")));
                }
                let computed = (h.bits + ((8.0 + e2) / e2).log2()) / n as f64;
                let (i, v) = classical_d_v(joint, &prod);
                (computed, i + (4.0 * v).sqrt() * a_n)
            }
        };
        out.push(ResidualPoint {
            n,
            a_n,
            eps_n,
            computed,
            predicted,
            residual_over_an: (computed - predicted) / a_n,
        });
    }
    Ok(out)
}

/// First n in the curve from which residual/a_n ≤ eta holds through the
/// end; reports the empirical threshold only, never a proven one.
pub fn empirical_n_star(points: &[ResidualPoint], eta: f64) -> Option<usize> {
    let mut n_star = None;
    for p in points {
        if p.residual_over_an <= eta {
            if n_star.is_none() {
                n_star = Some(p.n);
            }
        } else {
            n_star = None;
        }
    }
    n_star
}

/// CSV with columns n, a_n, eps_n, computed, predicted, residual_over_an.
pub fn residual_csv(points: &[ResidualPoint]) -> String {
    let mut s = String::from("n,a_n,eps_n,computed,predicted,residual_over_an\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.n, p.a_n, p.eps_n, p.computed, p.predicted, p.residual_over_an
        ));
    }
    s
}
