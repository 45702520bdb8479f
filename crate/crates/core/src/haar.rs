//! Monte Carlo oracle over Haar-random pure states.
//!
//! Every mean fidelity has an analytic closed form in [`crate::estimator`];
//! the estimators here integrate the defining integrands directly so the two
//! routes can be compared. Sample `i` of a run keyed by `seed` draws from its
//! own counter-keyed stream `(seed, i)`, and the reduction is an ordered
//! pairwise sum, so results do not depend on how rayon splits the work.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matkernel::{inner, orthonormalize_against, CMatrix};
use crate::measurement::{Measurement, QuantumState, PROBABILITY_FLOOR};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MIN_SAMPLES: usize = 100;

/// Agreement window in standard errors.
pub const AGREEMENT_SIGMAS: f64 = 5.0;
/// Absolute agreement floor.
pub const AGREEMENT_FLOOR: f64 = 1e-3;

/// Deterministic random stream keyed by `(seed, stream_index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloResult {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloResult {
    /// `|mean − analytic| ≤ max(5·std_error, 1e-3)`
    pub fn agrees_with(&self, analytic: f64) -> bool {
        (self.mean - analytic).abs() <= (AGREEMENT_SIGMAS * self.std_error).max(AGREEMENT_FLOOR)
    }

    fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let squares: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
        let variance = pairwise_sum(&squares) / (n as f64 - 1.0);
        Self {
            mean,
            std_error: (variance / n as f64).sqrt(),
            samples: n,
        }
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Normalized vector of `d` independent standard complex Gaussians.
pub fn haar_state_from<R: Rng + ?Sized>(d: usize, rng: &mut R) -> QuantumState {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let amps: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        // All-zero draws have probability zero, but normalization must not divide by 0.
        if let Ok(state) = QuantumState::normalized(amps) {
            return state;
        }
    }
}

pub fn haar_state(d: usize, stream: RngStream) -> QuantumState {
    haar_state_from(d, &mut stream.rng())
}

/// Haar-random unitary from Gram–Schmidt on Gaussian columns.
pub fn haar_unitary(d: usize, stream: RngStream) -> CMatrix {
    let mut rng = stream.rng();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while columns.len() < d {
        let g = haar_state_from(d, &mut rng);
        if let Some(col) = orthonormalize_against(g.amplitudes(), &columns, 1e-8) {
            columns.push(col);
        }
    }
    CMatrix::from_columns(&columns).expect("d columns of length d")
}

/// Mean of `integrand` over `samples` Haar states of dimension `d`.
pub fn monte_carlo<F>(d: usize, samples: usize, seed: u64, integrand: F) -> Result<MonteCarloResult>
where
    F: Fn(&QuantumState) -> f64 + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::OutOfDomain(format!("samples = {samples} < {MIN_SAMPLES}")));
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| integrand(&haar_state(d, RngStream::new(seed, i))))
        .collect();
    Ok(MonteCarloResult::from_values(&values))
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

/// `f_s = |⟨χ|M_s|ψ⟩|² / p_s`
pub fn mc_estimation_fidelity(m: &Measurement, s: usize, guess: &QuantumState, psi: &QuantumState) -> Result<f64> {
    let kraus = m.kraus(s)?;
    if guess.dim() != m.dim() || psi.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: if guess.dim() != m.dim() { guess.dim() } else { psi.dim() },
        });
    }
    let image = kraus.mul_vec(psi.amplitudes());
    let p: f64 = image.iter().map(Complex64::norm_sqr).sum();
    if p <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome {
            outcome: s,
            probability: p,
        });
    }
    Ok(inner(guess.amplitudes(), &image).norm_sqr() / p)
}

/// Haar mean of `Σ_s |⟨χ^(s)|M_s|ψ⟩|²`, i.e. of `Σ_s p_s f_s` without the
/// division by `p_s`.
pub fn mc_g_post(m: &Measurement, guesses: &[QuantumState], samples: usize, seed: u64) -> Result<MonteCarloResult> {
    check_guesses(m, guesses)?;
    // ⟨χ|M|ψ⟩ = ⟨M†χ|ψ⟩
    let pulled: Vec<Vec<Complex64>> = m
        .kraus_ops()
        .iter()
        .zip(guesses)
        .map(|(k, g)| k.adjoint().mul_vec(g.amplitudes()))
        .collect();
    monte_carlo(m.dim(), samples, seed, |psi| {
        pulled.iter().map(|row| inner(row, psi.amplitudes()).norm_sqr()).sum()
    })
}

/// Haar mean of `Σ_s p_s |⟨χ^(s)|ψ⟩|²`.
pub fn mc_g_pre(m: &Measurement, guesses: &[QuantumState], samples: usize, seed: u64) -> Result<MonteCarloResult> {
    check_guesses(m, guesses)?;
    monte_carlo(m.dim(), samples, seed, |psi| {
        let amps = psi.amplitudes();
        m.kraus_ops()
            .iter()
            .zip(guesses)
            .map(|(k, g)| {
                let p: f64 = k.mul_vec(amps).iter().map(Complex64::norm_sqr).sum();
                p * inner(g.amplitudes(), amps).norm_sqr()
            })
            .sum()
    })
}

/// Haar mean of `Σ_s |⟨ψ|M_s|ψ⟩|²`.
pub fn mc_operation_fidelity(m: &Measurement, samples: usize, seed: u64) -> Result<MonteCarloResult> {
    monte_carlo(m.dim(), samples, seed, |psi| {
        let amps = psi.amplitudes();
        m.kraus_ops().iter().map(|k| inner(amps, &k.mul_vec(amps)).norm_sqr()).sum()
    })
}
