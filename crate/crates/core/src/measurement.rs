//! Generalized measurements: Kraus sets, effects, state collapse and the
//! bi-orthogonal expansion of each Kraus operator.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matkernel::{
    canonicalize_phase, frobenius_distance, hermitian_eig, inner, norm, polar_decompose, CMatrix, EigenSystem,
};

/// Default completeness tolerance on `‖Σ_s M_s†M_s − 1‖_F`.
pub const DEFAULT_COMPLETENESS_TOL: f64 = 1e-10;

/// Outcomes at or below this probability are treated as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Negative probabilities down to `-NEGATIVE_PROBABILITY_SLACK` are round-off
/// and clamp to zero.
pub const NEGATIVE_PROBABILITY_SLACK: f64 = 1e-12;

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized pure state of a d-level system.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized to within [`NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if amplitudes.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(Error::NotNormalized { norm: n });
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|k⟩` (0-based level index).
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Same ray with the global phase fixed (first significant amplitude
    /// real and positive).
    pub fn canonical(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        canonicalize_phase(&mut amplitudes);
        Self { amplitudes }
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &Self) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// POVM element `E_s = M_s†M_s` together with its spectrum.
#[derive(Clone, Debug)]
pub struct Effect {
    matrix: CMatrix,
    spectrum: EigenSystem,
}

impl Effect {
    fn of_kraus(kraus: &CMatrix) -> Result<Self> {
        let matrix = (&kraus.adjoint() * kraus).hermitian_part();
        let spectrum = hermitian_eig(&matrix)?;
        Ok(Self { matrix, spectrum })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &EigenSystem {
        &self.spectrum
    }

    /// Largest eigenvalue `a_max`.
    pub fn a_max(&self) -> f64 {
        self.spectrum.top_value()
    }

    /// `√E_s`, the pure measurement part of the Kraus operator.
    pub fn sqrt(&self) -> CMatrix {
        self.spectrum.reconstruct_with(|a| a.max(0.0).sqrt()).hermitian_part()
    }
}

/// Outcome probabilities `p_s = ⟨ψ|E_s|ψ⟩`, indexed from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability of outcome `s` (1-based).
    pub fn probability(&self, s: usize) -> Result<f64> {
        s.checked_sub(1)
            .and_then(|i| self.probabilities.get(i).copied())
            .ok_or(Error::OutcomeOutOfRange {
                outcome: s,
                count: self.probabilities.len(),
            })
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `M_s = Σ_i √a_i |l_i⟩⟨r_i|` with `|l_i⟩ = U_s|r_i⟩`.
#[derive(Clone, Debug)]
pub struct BiOrthogonalFactors {
    /// `a_i`, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors `|r_i⟩` of `E_s`.
    pub right_basis: CMatrix,
    /// Columns are `|l_i⟩ = U_s|r_i⟩`, eigenvectors of `M_s M_s†`.
    pub left_basis: CMatrix,
    /// Unitary part `U_s` of `M_s = U_s √E_s`.
    pub unitary: CMatrix,
}

impl BiOrthogonalFactors {
    pub fn right(&self, i: usize) -> Vec<Complex64> {
        self.right_basis.column(i)
    }

    pub fn left(&self, i: usize) -> Vec<Complex64> {
        self.left_basis.column(i)
    }

    fn expand(&self, weight: impl Fn(f64) -> f64, use_left_on_right: bool) -> CMatrix {
        let d = self.eigenvalues.len();
        let mut out = CMatrix::zeros(d, d);
        for (i, &a) in self.eigenvalues.iter().enumerate() {
            let l = self.left(i);
            let r = if use_left_on_right { l.clone() } else { self.right(i) };
            out = &out + &CMatrix::outer(&l, &r).scale_real(weight(a));
        }
        out
    }

    /// `Σ_i √a_i |l_i⟩⟨r_i|`
    pub fn kraus_expansion(&self) -> CMatrix {
        self.expand(f64::sqrt, false)
    }

    /// `Σ_i |l_i⟩⟨r_i|`
    pub fn unitary_expansion(&self) -> CMatrix {
        self.expand(|_| 1.0, false)
    }

    /// `Σ_i a_i |l_i⟩⟨l_i|`
    pub fn left_gram_expansion(&self) -> CMatrix {
        self.expand(|a| a, true)
    }
}

/// Validated generalized measurement `{M_s}` on dimension `d`.
///
/// Effects and their spectra are computed once at validation; the device is
/// immutable afterwards.
#[derive(Clone, Debug)]
pub struct Measurement {
    dim: usize,
    kraus: Vec<CMatrix>,
    labels: Option<Vec<String>>,
    tolerance: f64,
    defect: f64,
    effects: Vec<Effect>,
}

/// `‖Σ_s M_s†M_s − 1‖_F`, after checking every operator is `dim × dim`.
pub fn completeness_defect(kraus: &[CMatrix], dim: usize) -> Result<f64> {
    check_shapes(kraus, dim)?;
    let mut sum = CMatrix::zeros(dim, dim);
    for m in kraus {
        sum = &sum + &(&m.adjoint() * m);
    }
    frobenius_distance(&sum, &CMatrix::identity(dim))
}

fn check_shapes(kraus: &[CMatrix], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::OutOfDomain("dimension must be positive".into()));
    }
    if kraus.is_empty() {
        return Err(Error::EmptyDevice);
    }
    if let Some(bad) = kraus.iter().find(|m| m.shape() != (dim, dim)) {
        return Err(Error::ShapeMismatch {
            expected: (dim, dim),
            found: bad.shape(),
        });
    }
    Ok(())
}

impl Measurement {
    /// Checks shapes and completeness, then caches the effects.
    pub fn validate(kraus: Vec<CMatrix>, dim: usize, tolerance: f64) -> Result<Self> {
        let defect = completeness_defect(&kraus, dim)?;
        if defect.is_nan() || defect > tolerance {
            return Err(Error::IncompleteDevice { defect, tolerance });
        }
        let effects = kraus.iter().map(Effect::of_kraus).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            kraus,
            labels: None,
            tolerance,
            defect,
            effects,
        })
    }

    /// Attaches outcome names; one label per outcome.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.kraus.len() {
            return Err(Error::DimensionMismatch {
                expected: self.kraus.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes `n`.
    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Completeness defect measured at validation.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    fn index(&self, s: usize) -> Result<usize> {
        if s == 0 || s > self.kraus.len() {
            return Err(Error::OutcomeOutOfRange {
                outcome: s,
                count: self.kraus.len(),
            });
        }
        Ok(s - 1)
    }

    /// Kraus operator `M_s` (1-based).
    pub fn kraus(&self, s: usize) -> Result<&CMatrix> {
        Ok(&self.kraus[self.index(s)?])
    }

    /// Effect `E_s = M_s†M_s` (1-based).
    pub fn effect_of(&self, s: usize) -> Result<&Effect> {
        Ok(&self.effects[self.index(s)?])
    }

    /// `p_s = ⟨ψ|E_s|ψ⟩` for every outcome.
    pub fn outcome_distribution(&self, psi: &QuantumState) -> Result<OutcomeDistribution> {
        psi.check_dim(self.dim)?;
        let probabilities = self
            .effects
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let p = inner(psi.amplitudes(), &e.matrix.mul_vec(psi.amplitudes())).re;
                if p < -NEGATIVE_PROBABILITY_SLACK {
                    Err(Error::NegativeProbability {
                        outcome: i + 1,
                        probability: p,
                    })
                } else {
                    Ok(p.max(0.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OutcomeDistribution { probabilities })
    }

    /// Conditional post-measurement state `M_s|ψ⟩ / √p_s`.
    pub fn collapse(&self, psi: &QuantumState, s: usize) -> Result<QuantumState> {
        psi.check_dim(self.dim)?;
        let idx = self.index(s)?;
        let image = self.kraus[idx].mul_vec(psi.amplitudes());
        let p = image.iter().map(Complex64::norm_sqr).sum::<f64>();
        if p <= PROBABILITY_FLOOR {
            return Err(Error::ZeroProbabilityOutcome {
                outcome: s,
                probability: p,
            });
        }
        let scale = 1.0 / p.sqrt();
        Ok(QuantumState {
            amplitudes: image.into_iter().map(|z| z * scale).collect(),
        })
    }

    /// Draws an outcome by inverse CDF on a single uniform variate and
    /// returns it with the collapsed state. Outcomes at or below the
    /// probability floor are never drawn.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, psi: &QuantumState, rng: &mut R) -> Result<(usize, QuantumState)> {
        let dist = self.outcome_distribution(psi)?;
        let weights: Vec<f64> = dist
            .as_slice()
            .iter()
            .map(|&p| if p > PROBABILITY_FLOOR { p } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            cumulative += w;
            chosen = Some(i);
            if u < cumulative {
                break;
            }
        }
        let s = chosen.ok_or(Error::ZeroProbabilityOutcome {
            outcome: 1,
            probability: 0.0,
        })? + 1;
        Ok((s, self.collapse(psi, s)?))
    }

    /// Polar decomposition `M_s = U_s √E_s` and the bi-orthogonal bases.
    pub fn bi_orthogonal_factors(&self, s: usize) -> Result<BiOrthogonalFactors> {
        let idx = self.index(s)?;
        let polar = polar_decompose(&self.kraus[idx])?;
        let spectrum = &self.effects[idx].spectrum;
        let right_basis = spectrum.eigenvectors().clone();
        let left_basis = &polar.unitary * &right_basis;
        Ok(BiOrthogonalFactors {
            eigenvalues: spectrum.eigenvalues().iter().map(|a| a.max(0.0)).collect(),
            right_basis,
            left_basis,
            unitary: polar.unitary,
        })
    }
}
