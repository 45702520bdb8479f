//! Optimal estimates of the pre- and post-measurement states and the mean
//! fidelities of a device, in closed form.
//!
//! For outcome `s` the best guess of the post-measurement state is the top
//! eigenvector of `M_s M_s†`, the best guess of the pre-measurement state is
//! the top eigenvector of `E_s = M_s†M_s`; both share the eigenvalue `a_max`.
//! With `d` the dimension and the input a Haar-random pure state:
//!
//! * `G_post = (1/d) Σ_s a_max^(s)`
//! * `G_pre  = (1 + G_post)/(d + 1)`
//! * `F      = (d + Σ_s |tr M_s|²) / (d(d + 1))`
//!
//! and every device satisfies
//! `√((d+1)F − 1) ≤ √G_post + √((d−1)(1 − G_post))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkernel::{hermitian_eig, inner, CMatrix, EigenSystem, DEGENERACY_GAP};
use crate::measurement::{Measurement, QuantumState};

/// Slack allowed on the tradeoff inequality.
pub const BOUND_SLACK: f64 = 1e-9;

/// Relations between the optimal estimates hold when the phase-insensitive
/// overlap reaches `1 − RELATION_TOL`.
pub const RELATION_TOL: f64 = 1e-9;

/// Outcomes with `a_max` at or below this carry no estimate worth checking.
pub const A_MAX_FLOOR: f64 = 1e-12;

/// Tolerance used by [`is_pure_measurement`].
pub const PURITY_TOL: f64 = 1e-10;

/// Best guesses for one outcome.
#[derive(Clone, Debug)]
pub struct EstimatePair {
    /// 1-based outcome index.
    pub outcome: usize,
    pub a_max: f64,
    pub chi_pre: QuantumState,
    pub chi_post: QuantumState,
    /// Top eigenvalue gap below the degeneracy threshold: the estimate is one
    /// deterministic member of a degenerate eigenspace.
    pub degenerate: bool,
}

/// Analytic fidelities of a device and the tradeoff check.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityReport {
    pub dim: usize,
    pub g_post: f64,
    pub g_pre: f64,
    pub f_op: f64,
    pub per_outcome_a_max: Vec<f64>,
    /// `√((d+1)F − 1)`, zero when the radicand is negative.
    pub bound_lhs: f64,
    /// `√G_post + √((d−1)(1 − G_post))`
    pub bound_rhs: f64,
    pub bound_satisfied: bool,
    /// Whether `(G_post, F)` lies inside `[1/d, 1] × [2/(d+1), 1]`. Devices
    /// such as a traceless unitary legitimately fall below the window.
    pub within_display_window: bool,
}

/// Maximal operation fidelity allowed at a given `G_post`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeoffBound {
    /// `√G_post + √((d−1)(1 − G_post))`, the bound on `√((d+1)F − 1)`.
    pub sqrt_bound: f64,
    /// `(1 + sqrt_bound²)/(d + 1)`
    pub max_f: f64,
}

/// Outcome of checking the links between the optimal estimates.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationCheck {
    Checked {
        /// `|⟨χ_post|U_s|χ_pre⟩|²`
        unitary_overlap: f64,
        /// `|⟨χ_post|M_s|χ_pre⟩|² / a_max`
        kraus_overlap: f64,
        unitary_link_ok: bool,
        kraus_link_ok: bool,
    },
    Skipped {
        reason: SkipReason,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    VanishingTopEigenvalue,
    DegenerateTopEigenvalue,
}

impl RelationCheck {
    pub fn both_hold(&self) -> Option<bool> {
        match self {
            Self::Checked {
                unitary_link_ok,
                kraus_link_ok,
                ..
            } => Some(*unitary_link_ok && *kraus_link_ok),
            Self::Skipped { .. } => None,
        }
    }
}

/// Dimension argument of the boundary curve; `Infinite` is the `d → ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainDim {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub g_post: f64,
    pub max_f: f64,
}

fn state_from(v: Vec<Complex64>) -> QuantumState {
    QuantumState::normalized(v).expect("eigenvectors are unit vectors").canonical()
}

fn left_spectrum(m: &Measurement, s: usize) -> Result<EigenSystem> {
    let k = m.kraus(s)?;
    hermitian_eig(&(k * &k.adjoint()).hermitian_part())
}

/// Top eigenvector of `M_s M_s†`.
pub fn best_post_estimate(m: &Measurement, s: usize) -> Result<QuantumState> {
    Ok(state_from(left_spectrum(m, s)?.top_vector()))
}

/// Top eigenvector of `E_s`.
pub fn best_pre_estimate(m: &Measurement, s: usize) -> Result<QuantumState> {
    Ok(state_from(m.effect_of(s)?.spectrum().top_vector()))
}

pub fn estimate_pair(m: &Measurement, s: usize) -> Result<EstimatePair> {
    let effect = m.effect_of(s)?;
    let left = left_spectrum(m, s)?;
    Ok(EstimatePair {
        outcome: s,
        a_max: effect.a_max(),
        chi_pre: state_from(effect.spectrum().top_vector()),
        chi_post: state_from(left.top_vector()),
        degenerate: effect.spectrum().top_is_degenerate(),
    })
}

pub fn estimate_pairs(m: &Measurement) -> Result<Vec<EstimatePair>> {
    (1..=m.outcomes()).map(|s| estimate_pair(m, s)).collect()
}

fn check_guesses(m: &Measurement, guesses: &[QuantumState]) -> Result<()> {
    if guesses.len() != m.outcomes() {
        return Err(Error::DimensionMismatch {
            expected: m.outcomes(),
            found: guesses.len(),
        });
    }
    if let Some(g) = guesses.iter().find(|g| g.dim() != m.dim()) {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: g.dim(),
        });
    }
    Ok(())
}

fn expectation(op: &CMatrix, v: &[Complex64]) -> f64 {
    inner(v, &op.mul_vec(v)).re
}

/// `(1/d) Σ_s ⟨χ^(s)|M_s M_s†|χ^(s)⟩` for one guess per outcome.
pub fn g_post_of_guess(m: &Measurement, guesses: &[QuantumState]) -> Result<f64> {
    check_guesses(m, guesses)?;
    let total: f64 = m
        .kraus_ops()
        .iter()
        .zip(guesses)
        .map(|(k, g)| {
            // ⟨χ|M M†|χ⟩ = ‖M†χ‖²
            k.adjoint().mul_vec(g.amplitudes()).iter().map(Complex64::norm_sqr).sum::<f64>()
        })
        .sum();
    Ok(total / m.dim() as f64)
}

/// `(1/d) Σ_s a_max^(s)`
pub fn g_post(m: &Measurement) -> f64 {
    m.effects().iter().map(|e| e.a_max()).sum::<f64>() / m.dim() as f64
}

/// `(d + Σ_s ⟨χ^(s)|E_s|χ^(s)⟩) / (d(d+1))`
pub fn g_pre_of_guess(m: &Measurement, guesses: &[QuantumState]) -> Result<f64> {
    check_guesses(m, guesses)?;
    let d = m.dim() as f64;
    let total: f64 = m
        .effects()
        .iter()
        .zip(guesses)
        .map(|(e, g)| expectation(e.matrix(), g.amplitudes()))
        .sum();
    Ok((d + total) / (d * (d + 1.0)))
}

/// `(1 + G_post)/(d + 1)`
pub fn g_pre(m: &Measurement) -> f64 {
    (1.0 + g_post(m)) / (m.dim() as f64 + 1.0)
}

/// Mean operation fidelity `(d + Σ_s |tr M_s|²)/(d(d+1))`.
pub fn operation_fidelity(m: &Measurement) -> f64 {
    let d = m.dim() as f64;
    let traces: f64 = m.kraus_ops().iter().map(|k| k.trace().norm_sqr()).sum();
    (d + traces) / (d * (d + 1.0))
}

fn sqrt_bound(d: f64, g: f64) -> f64 {
    g.clamp(0.0, 1.0).sqrt() + ((d - 1.0) * (1.0 - g)).max(0.0).sqrt()
}

/// Largest `F` compatible with `G_post = g_post_value` in dimension `d`.
pub fn tradeoff_bound(d: usize, g_post_value: f64) -> Result<TradeoffBound> {
    if d < 2 {
        return Err(Error::OutOfDomain(format!("dimension {d} < 2")));
    }
    let lo = 1.0 / d as f64;
    if !(g_post_value >= lo - 1e-12 && g_post_value <= 1.0 + 1e-12) {
        return Err(Error::OutOfDomain(format!(
            "G_post = {g_post_value} outside [1/{d}, 1]"
        )));
    }
    let df = d as f64;
    let b = sqrt_bound(df, g_post_value);
    Ok(TradeoffBound {
        sqrt_bound: b,
        max_f: (1.0 + b * b) / (df + 1.0),
    })
}

/// Evaluates every analytic fidelity and the tradeoff inequality.
pub fn check_bound(m: &Measurement) -> FidelityReport {
    let d = m.dim() as f64;
    let g_post = g_post(m);
    let f_op = operation_fidelity(m);
    let bound_lhs = ((d + 1.0) * f_op - 1.0).max(0.0).sqrt();
    let bound_rhs = sqrt_bound(d, g_post);
    let window = 1e-10;
    FidelityReport {
        dim: m.dim(),
        g_post,
        g_pre: (1.0 + g_post) / (d + 1.0),
        f_op,
        per_outcome_a_max: m.effects().iter().map(|e| e.a_max()).collect(),
        bound_lhs,
        bound_rhs,
        bound_satisfied: bound_lhs <= bound_rhs + BOUND_SLACK,
        within_display_window: g_post >= 1.0 / d - window
            && g_post <= 1.0 + window
            && f_op >= 2.0 / (d + 1.0) - window
            && f_op <= 1.0 + window,
    }
}

/// Device with Kraus operators `√E_s`: same effects, unitary parts removed.
pub fn pure_part(m: &Measurement) -> Result<Measurement> {
    let kraus = m.effects().iter().map(|e| e.sqrt()).collect();
    let pure = Measurement::validate(kraus, m.dim(), m.tolerance())?;
    match m.labels() {
        Some(labels) => pure.with_labels(labels.to_vec()),
        None => Ok(pure),
    }
}

/// True iff every Kraus operator is Hermitian positive semidefinite.
pub fn is_pure_measurement(m: &Measurement) -> bool {
    m.kraus_ops().iter().all(|k| {
        if k.hermitian_defect() > PURITY_TOL {
            return false;
        }
        match hermitian_eig(&k.hermitian_part()) {
            Ok(es) => es.eigenvalues().iter().all(|&a| a >= -PURITY_TOL),
            Err(_) => false,
        }
    })
}

/// Checks `U_s|χ_pre⟩ = |χ_post⟩` and `M_s|χ_pre⟩/√a_max = |χ_post⟩` up to
/// phase. Degenerate or vanishing top eigenvalues are skipped rather than
/// guessed.
pub fn verify_estimate_relations(m: &Measurement, s: usize) -> Result<RelationCheck> {
    let effect = m.effect_of(s)?;
    let a_max = effect.a_max();
    if a_max <= A_MAX_FLOOR {
        return Ok(RelationCheck::Skipped {
            reason: SkipReason::VanishingTopEigenvalue,
        });
    }
    if effect.spectrum().top_gap() < DEGENERACY_GAP {
        return Ok(RelationCheck::Skipped {
            reason: SkipReason::DegenerateTopEigenvalue,
        });
    }
    let pair = estimate_pair(m, s)?;
    let factors = m.bi_orthogonal_factors(s)?;
    let pre = pair.chi_pre.amplitudes();
    let post = pair.chi_post.amplitudes();
    let unitary_overlap = inner(post, &factors.unitary.mul_vec(pre)).norm_sqr();
    let kraus_overlap = inner(post, &m.kraus(s)?.mul_vec(pre)).norm_sqr() / a_max;
    Ok(RelationCheck::Checked {
        unitary_overlap,
        kraus_overlap,
        unitary_link_ok: unitary_overlap >= 1.0 - RELATION_TOL,
        kraus_link_ok: kraus_overlap >= 1.0 - RELATION_TOL,
    })
}

/// Rank-one device `M_s = √a_s |χ_post^(s)⟩⟨χ_pre^(s)|`.
///
/// The pre-states weighted by `a_s` must resolve the identity; the
/// post-states are arbitrary.
pub fn make_rank_one_device(
    pre_states: &[QuantumState],
    post_states: &[QuantumState],
    weights: &[f64],
    tolerance: f64,
) -> Result<Measurement> {
    let n = pre_states.len();
    if post_states.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if post_states.len() != n { post_states.len() } else { weights.len() },
        });
    }
    let d = pre_states.first().ok_or(Error::EmptyDevice)?.dim();
    if let Some(bad) = pre_states.iter().chain(post_states).find(|st| st.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    if let Some(&w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::OutOfDomain(format!("rank-one weight {w} must be positive")));
    }
    let kraus = pre_states
        .iter()
        .zip(post_states)
        .zip(weights)
        .map(|((pre, post), &w)| CMatrix::outer(post.amplitudes(), pre.amplitudes()).scale_real(w.sqrt()))
        .collect();
    Measurement::validate(kraus, d, tolerance)
}

/// Samples the maximal-`F` boundary curve on `steps` uniformly spaced
/// `G_post` values.
///
/// Finite `d` covers `[1/d, 1]` with both endpoints exact. The infinite-`d`
/// limit is the line `F = 1 − G_post`, sampled at `G_post = k/steps`,
/// `k = 1..=steps`.
pub fn domain_boundary(dim: DomainDim, steps: usize) -> Result<Vec<BoundaryPoint>> {
    if steps < 2 {
        return Err(Error::OutOfDomain(format!("steps = {steps} < 2")));
    }
    match dim {
        DomainDim::Finite(d) => {
            if d < 2 {
                return Err(Error::OutOfDomain(format!("dimension {d} < 2")));
            }
            let lo = 1.0 / d as f64;
            let last = steps - 1;
            (0..steps)
                .map(|k| {
                    let g = match k {
                        0 => lo,
                        k if k == last => 1.0,
                        k => lo + (1.0 - lo) * k as f64 / last as f64,
                    };
                    let max_f = if k == 0 {
                        // √(1/d) + (d−1)/√d = √d exactly.
                        1.0
                    } else if k == last {
                        2.0 / (d as f64 + 1.0)
                    } else {
                        tradeoff_bound(d, g)?.max_f
                    };
                    Ok(BoundaryPoint { g_post: g, max_f })
                })
                .collect()
        }
        DomainDim::Infinite => Ok((1..=steps)
            .map(|k| {
                let g = if k == steps { 1.0 } else { k as f64 / steps as f64 };
                BoundaryPoint { g_post: g, max_f: 1.0 - g }
            })
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::DEFAULT_COMPLETENESS_TOL;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn projective(d: usize) -> Measurement {
        let kraus = (0..d)
            .map(|k| {
                let e = QuantumState::basis(d, k);
                CMatrix::outer(e.amplitudes(), e.amplitudes())
            })
            .collect();
        Measurement::validate(kraus, d, DEFAULT_COMPLETENESS_TOL).unwrap()
    }

    fn identity(d: usize) -> Measurement {
        Measurement::validate(vec![CMatrix::identity(d)], d, DEFAULT_COMPLETENESS_TOL).unwrap()
    }

    fn unsharp(lambda: f64) -> Measurement {
        let (a, b) = (((1.0 + lambda) / 2.0).sqrt(), ((1.0 - lambda) / 2.0).sqrt());
        Measurement::validate(
            vec![CMatrix::diag_real(&[a, b]), CMatrix::diag_real(&[b, a])],
            2,
            DEFAULT_COMPLETENESS_TOL,
        )
        .unwrap()
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn kicked_unsharp() -> Measurement {
        let root = CMatrix::diag_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]);
        let other = CMatrix::diag_real(&[0.2f64.sqrt(), 0.8f64.sqrt()]);
        Measurement::validate(vec![&pauli_x() * &root, other], 2, DEFAULT_COMPLETENESS_TOL).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn estimates_of_projective_device() {
        let m = projective(3);
        for s in 1..=3 {
            let e = QuantumState::basis(3, s - 1);
            assert!(close(best_post_estimate(&m, s).unwrap().fidelity(&e), 1.0, 1e-14));
            assert!(close(best_pre_estimate(&m, s).unwrap().fidelity(&e), 1.0, 1e-14));
        }
    }

    #[test]
    fn estimates_of_unsharp_qubit() {
        let m = unsharp(0.6);
        let post = best_post_estimate(&m, 1).unwrap();
        assert_eq!(post, QuantumState::basis(2, 0));
        let pair = estimate_pair(&m, 1).unwrap();
        assert!(close(pair.a_max, 0.8, 1e-14));
        assert!(!pair.degenerate);
    }

    #[test]
    fn estimates_of_kicked_unsharp_differ() {
        let m = kicked_unsharp();
        assert!(close(best_pre_estimate(&m, 1).unwrap().fidelity(&QuantumState::basis(2, 0)), 1.0, 1e-14));
        assert!(close(best_post_estimate(&m, 1).unwrap().fidelity(&QuantumState::basis(2, 1)), 1.0, 1e-14));
    }

    #[test]
    fn estimates_of_rank_one_operator() {
        let l = QuantumState::normalized(vec![c(0.3, 0.1), c(-0.2, 0.9)]).unwrap();
        let r = QuantumState::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let r_perp = QuantumState::normalized(vec![c(0.0, 0.8), c(0.6, 0.0)]).unwrap();
        let m = make_rank_one_device(&[r.clone(), r_perp.clone()], &[l.clone(), r_perp], &[1.0, 1.0], 1e-10).unwrap();
        assert!(close(best_post_estimate(&m, 1).unwrap().fidelity(&l), 1.0, 1e-12));
        assert!(close(best_pre_estimate(&m, 1).unwrap().fidelity(&r), 1.0, 1e-12));
    }

    #[test]
    fn degenerate_estimate_lies_in_eigenspace() {
        let m = identity(3);
        let pair = estimate_pair(&m, 1).unwrap();
        assert!(pair.degenerate);
        // Whole space is the eigenspace; projection residual is zero.
        assert!(close(crate::matkernel::norm(pair.chi_post.amplitudes()), 1.0, 1e-12));

        // E = diag(0.5, 0.5, 0) style degeneracy inside a proper subspace.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k1 = CMatrix::diag_real(&[h, h, 0.0]);
        let k2 = CMatrix::diag_real(&[h, h, 1.0]);
        let m = Measurement::validate(vec![k1, k2], 3, 1e-10).unwrap();
        let pair = estimate_pair(&m, 1).unwrap();
        assert!(pair.degenerate);
        let v = pair.chi_pre.amplitudes();
        assert!(v[2].norm() <= 1e-9, "estimate leaked out of the span of |0>,|1>");
    }

    #[test]
    fn g_post_of_guess_cases() {
        let m = projective(2);
        let swapped = [QuantumState::basis(2, 1), QuantumState::basis(2, 0)];
        assert_eq!(g_post_of_guess(&m, &swapped).unwrap(), 0.0);
        let optimal: Vec<_> = (1..=2).map(|s| best_post_estimate(&m, s).unwrap()).collect();
        assert!(close(g_post_of_guess(&m, &optimal).unwrap(), g_post(&m), 1e-15));
        let any = QuantumState::normalized(vec![c(0.3, -0.2), c(0.1, 0.9), c(0.5, 0.0)]).unwrap();
        assert!(close(g_post_of_guess(&identity(3), &[any]).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(matches!(g_post_of_guess(&m, &swapped[..1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn g_post_values() {
        for d in [2, 3, 5] {
            assert!(close(g_post(&projective(d)), 1.0, 1e-14));
            assert!(close(g_post(&identity(d)), 1.0 / d as f64, 1e-14));
        }
        assert!(close(g_post(&unsharp(0.6)), 0.8, 1e-14));
    }

    #[test]
    fn g_pre_values() {
        let any = QuantumState::normalized(vec![c(0.3, -0.2), c(0.1, 0.9)]).unwrap();
        assert!(close(g_pre_of_guess(&identity(2), &[any]).unwrap(), 0.5, 1e-15));
        let m = projective(2);
        let optimal: Vec<_> = (1..=2).map(|s| best_pre_estimate(&m, s).unwrap()).collect();
        assert!(close(g_pre_of_guess(&m, &optimal).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(g_pre(&m), g_pre_of_guess(&m, &optimal).unwrap(), 1e-15));
        assert!(close(g_pre(&projective(3)), 0.5, 1e-15));
        assert!(close(g_pre(&identity(2)), 0.5, 1e-15));
        assert!(close(g_pre(&unsharp(0.6)), 0.6, 1e-14));
    }

    #[test]
    fn operation_fidelity_values() {
        assert!(close(operation_fidelity(&identity(2)), 1.0, 1e-15));
        assert!(close(operation_fidelity(&projective(3)), 0.5, 1e-15));
        assert!(close(operation_fidelity(&unsharp(0.6)), 2.8 / 3.0, 1e-14));
    }

    #[test]
    fn traceless_unitary_falls_below_window() {
        let m = Measurement::validate(vec![pauli_x()], 2, 1e-10).unwrap();
        let report = check_bound(&m);
        assert!(close(report.f_op, 1.0 / 3.0, 1e-15));
        assert!(report.bound_satisfied);
        assert!(!report.within_display_window);
    }

    #[test]
    fn tradeoff_bound_values() {
        for d in [2, 3, 4, 8, 16] {
            let lo = tradeoff_bound(d, 1.0 / d as f64).unwrap();
            assert!(close(lo.max_f, 1.0, 1e-14));
            let hi = tradeoff_bound(d, 1.0).unwrap();
            assert!(close(hi.max_f, 2.0 / (d as f64 + 1.0), 1e-15));
        }
        assert!(close(tradeoff_bound(2, 0.8).unwrap().max_f, 2.8 / 3.0, 1e-14));
        assert!(matches!(tradeoff_bound(2, 0.3), Err(Error::OutOfDomain(_))));
        assert!(matches!(tradeoff_bound(2, 1.1), Err(Error::OutOfDomain(_))));
        assert!(matches!(tradeoff_bound(1, 1.0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn check_bound_endpoints() {
        let r = check_bound(&projective(2));
        assert!(close(r.bound_lhs, 1.0, 1e-14) && close(r.bound_rhs, 1.0, 1e-14));
        assert!(r.bound_satisfied && r.within_display_window);
        let r = check_bound(&identity(2));
        assert!(close(r.bound_lhs, 2f64.sqrt(), 1e-14) && close(r.bound_rhs, 2f64.sqrt(), 1e-14));
        assert!(r.bound_satisfied);
    }

    #[test]
    fn pure_part_cases() {
        let m = kicked_unsharp();
        let pure = pure_part(&m).unwrap();
        let expected = CMatrix::diag_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]);
        assert!(crate::matkernel::frobenius_distance(pure.kraus(1).unwrap(), &expected).unwrap() < 1e-14);
        assert!(is_pure_measurement(&pure));
        assert!(!is_pure_measurement(&m));
        assert!(close(g_post(&pure), g_post(&m), 1e-14));
        assert!(!close(operation_fidelity(&pure), operation_fidelity(&m), 1e-3));

        let p = projective(3);
        assert!(is_pure_measurement(&p));
        let again = pure_part(&p).unwrap();
        for (a, b) in again.kraus_ops().iter().zip(p.kraus_ops()) {
            assert!(crate::matkernel::frobenius_distance(a, b).unwrap() < 1e-14);
        }
    }

    #[test]
    fn relations_for_pure_and_kicked() {
        let m = unsharp(0.6);
        for s in 1..=2 {
            assert_eq!(verify_estimate_relations(&m, s).unwrap().both_hold(), Some(true));
            let pair = estimate_pair(&m, s).unwrap();
            assert!(pair.chi_pre.fidelity(&pair.chi_post) >= 1.0 - 1e-9);
        }
        let k = kicked_unsharp();
        assert_eq!(verify_estimate_relations(&k, 1).unwrap().both_hold(), Some(true));
        assert_eq!(
            verify_estimate_relations(&identity(2), 1).unwrap(),
            RelationCheck::Skipped {
                reason: SkipReason::DegenerateTopEigenvalue
            }
        );
    }

    #[test]
    fn rank_one_constructor() {
        let basis: Vec<_> = (0..3).map(|k| QuantumState::basis(3, k)).collect();
        let m = make_rank_one_device(&basis, &basis, &[1.0; 3], 1e-10).unwrap();
        assert!(close(g_post(&m), 1.0, 1e-14));
        assert!(close(g_pre(&m), 0.5, 1e-14));
        let err = make_rank_one_device(&basis, &basis, &[0.5; 3], 1e-10).unwrap_err();
        assert!(matches!(err, Error::IncompleteDevice { .. }));
        assert!(make_rank_one_device(&basis, &basis, &[1.0, 0.0, 1.0], 1e-10).is_err());
    }

    #[test]
    fn domain_boundary_small_table() {
        let pts = domain_boundary(DomainDim::Finite(2), 3).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!((pts[0].g_post, pts[0].max_f), (0.5, 1.0));
        assert_eq!(pts[1].g_post, 0.75);
        assert!(close(pts[1].max_f, (1.0 + (0.75f64.sqrt() + 0.25f64.sqrt()).powi(2)) / 3.0, 1e-15));
        assert!(close(pts[1].max_f, 0.955_341_801_261_479_6, 1e-15));
        assert_eq!(pts[2].g_post, 1.0);
        assert!(close(pts[2].max_f, 2.0 / 3.0, 1e-15));

        let inf = domain_boundary(DomainDim::Infinite, 4).unwrap();
        assert!(inf.iter().all(|p| p.max_f == 1.0 - p.g_post));
        assert_eq!(inf.last().unwrap().g_post, 1.0);
        assert!(domain_boundary(DomainDim::Finite(1), 3).is_err());
        assert!(domain_boundary(DomainDim::Finite(2), 1).is_err());
    }
}
