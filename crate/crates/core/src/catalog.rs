//! Constructors for the measurement families used in tests, sweeps and the
//! CLI `catalog` command.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimator::make_rank_one_device;
use crate::haar::{haar_state, haar_unitary, RngStream};
use crate::matkernel::{orthonormalize_against, CMatrix};
use crate::measurement::{Measurement, QuantumState, DEFAULT_COMPLETENESS_TOL};

/// Kicks must be unitary to within this Frobenius defect.
pub const KICK_UNITARY_TOL: f64 = 1e-10;

fn require_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::OutOfDomain(format!("dimension {d} < {min}")));
    }
    Ok(())
}

/// Projective measurement in the computational basis, `M_s = |s⟩⟨s|`.
pub fn projective(d: usize) -> Result<Measurement> {
    require_dim(d, 2)?;
    let kraus = (0..d)
        .map(|k| {
            let e = QuantumState::basis(d, k);
            CMatrix::outer(e.amplitudes(), e.amplitudes())
        })
        .collect();
    Measurement::validate(kraus, d, DEFAULT_COMPLETENESS_TOL)
}

/// Single-outcome device that leaves every state untouched.
pub fn identity_device(d: usize) -> Result<Measurement> {
    require_dim(d, 1)?;
    Measurement::validate(vec![CMatrix::identity(d)], d, DEFAULT_COMPLETENESS_TOL)
}

/// Two-outcome unsharp qubit measurement with sharpness `λ ∈ [0, 1]`:
/// `M_± = diag(√((1±λ)/2), √((1∓λ)/2))`.
///
/// Interpolates between the identity (`λ = 0`, two copies of `1/√2`) and the
/// projective device (`λ = 1`).
pub fn unsharp_qubit(lambda: f64) -> Result<Measurement> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfDomain(format!("lambda = {lambda} outside [0, 1]")));
    }
    let hi = ((1.0 + lambda) / 2.0).sqrt();
    let lo = ((1.0 - lambda) / 2.0).sqrt();
    Measurement::validate(
        vec![CMatrix::diag_real(&[hi, lo]), CMatrix::diag_real(&[lo, hi])],
        2,
        DEFAULT_COMPLETENESS_TOL,
    )?
    .with_labels(vec!["+".into(), "-".into()])
}

/// Random `n`-outcome device on dimension `d`.
///
/// Draws a Haar-random isometry `V: C^d → C^{n·d}` (Gram–Schmidt on
/// Gaussian columns) and slices it into `n` blocks of `d` rows, so
/// `Σ_s M_s†M_s = V†V = 1` holds by construction.
pub fn random_device(d: usize, n: usize, seed: u64) -> Result<Measurement> {
    require_dim(d, 2)?;
    if n < 1 {
        return Err(Error::OutOfDomain("outcome count must be at least 1".into()));
    }
    let rows = n * d;
    let mut rng = RngStream::new(seed, 0).rng();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while columns.len() < d {
        let g: Vec<Complex64> = (0..rows)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        if let Some(col) = orthonormalize_against(&g, &columns, 1e-8) {
            columns.push(col);
        }
    }
    let kraus = (0..n)
        .map(|s| CMatrix::from_fn(d, d, |i, j| columns[j][s * d + i]))
        .collect();
    Measurement::validate(kraus, d, DEFAULT_COMPLETENESS_TOL)
}

/// Applies a unitary kick per outcome, `M_s ← V_s M_s`. Effects are
/// unchanged; the operation fidelity generally is not.
pub fn with_kicks(m: &Measurement, kicks: &[CMatrix]) -> Result<Measurement> {
    if kicks.len() != m.outcomes() {
        return Err(Error::DimensionMismatch {
            expected: m.outcomes(),
            found: kicks.len(),
        });
    }
    let mut kraus = Vec::with_capacity(kicks.len());
    for (s, (v, k)) in kicks.iter().zip(m.kraus_ops()).enumerate() {
        if v.shape() != (m.dim(), m.dim()) {
            return Err(Error::ShapeMismatch {
                expected: (m.dim(), m.dim()),
                found: v.shape(),
            });
        }
        let defect = v.unitarity_defect();
        if defect > KICK_UNITARY_TOL {
            return Err(Error::NotUnitary { outcome: s + 1, defect });
        }
        kraus.push(v * k);
    }
    let kicked = Measurement::validate(kraus, m.dim(), m.tolerance())?;
    match m.labels() {
        Some(labels) => kicked.with_labels(labels.to_vec()),
        None => Ok(kicked),
    }
}

/// One Haar-random unitary kick per outcome.
pub fn random_kicks(m: &Measurement, seed: u64) -> Vec<CMatrix> {
    (0..m.outcomes() as u64)
        .map(|s| haar_unitary(m.dim(), RngStream::new(seed, s)))
        .collect()
}

/// Qubit states whose Bloch vectors point at the vertices of a regular
/// tetrahedron, `(±1, ±1, ±1)/√3` with an even number of minus signs.
pub fn tetrahedron_states() -> [QuantumState; 4] {
    let t = 1.0 / 3f64.sqrt();
    [[t, t, t], [t, -t, -t], [-t, t, -t], [-t, -t, t]].map(|n| bloch_state(n[0], n[1], n[2]))
}

/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` for the unit Bloch vector `(x, y, z)`.
fn bloch_state(x: f64, y: f64, z: f64) -> QuantumState {
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    QuantumState::normalized(vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
    .expect("Bloch states are unit vectors")
}

/// Four-outcome rank-one qubit device, `M_s = √(1/2)|post_s⟩⟨tet_s|`.
///
/// Without explicit post-states the device is the pure one, post = pre.
pub fn tetrahedron_rank_one(post_states: Option<&[QuantumState]>) -> Result<Measurement> {
    let pre = tetrahedron_states();
    let post: Vec<QuantumState> = match post_states {
        Some(states) => {
            if states.len() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    found: states.len(),
                });
            }
            states.to_vec()
        }
        None => pre.to_vec(),
    };
    make_rank_one_device(&pre, &post, &[0.5; 4], DEFAULT_COMPLETENESS_TOL)
}

/// Four Haar-random qubit post-states.
pub fn random_post_states(seed: u64) -> Vec<QuantumState> {
    (0..4).map(|k| haar_state(2, RngStream::new(seed, k))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeviceFamily {
    Projective,
    Identity,
    Unsharp,
    Random,
    Tetrahedron,
}

impl DeviceFamily {
    pub const ALL: [DeviceFamily; 5] = [
        DeviceFamily::Projective,
        DeviceFamily::Identity,
        DeviceFamily::Unsharp,
        DeviceFamily::Random,
        DeviceFamily::Tetrahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeviceFamily::Projective => "projective",
            DeviceFamily::Identity => "identity",
            DeviceFamily::Unsharp => "unsharp",
            DeviceFamily::Random => "random",
            DeviceFamily::Tetrahedron => "tetrahedron",
        }
    }
}

impl fmt::Display for DeviceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeviceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeviceFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::OutOfDomain(format!("unknown device family `{s}`")))
    }
}

/// Family name plus parameters; the vocabulary of the CLI `catalog` command.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSpecParams {
    pub family: DeviceFamily,
    /// Dimension `d`; ignored by the qubit-only families.
    pub dim: usize,
    /// Sharpness for `unsharp`.
    pub lambda: f64,
    /// Outcome count for `random`.
    pub outcomes: usize,
    /// Seed for `random`, and for kicks.
    pub seed: u64,
    /// Seed for Haar-random tetrahedron post-states.
    pub post_seed: Option<u64>,
    /// Seed for per-outcome Haar-random unitary kicks.
    pub kick_seed: Option<u64>,
}

impl DeviceSpecParams {
    pub fn new(family: DeviceFamily) -> Self {
        Self {
            family,
            dim: 2,
            lambda: 0.5,
            outcomes: 2,
            seed: 0,
            post_seed: None,
            kick_seed: None,
        }
    }

    pub fn build(&self) -> Result<Measurement> {
        let base = match self.family {
            DeviceFamily::Projective => projective(self.dim)?,
            DeviceFamily::Identity => identity_device(self.dim)?,
            DeviceFamily::Unsharp => unsharp_qubit(self.lambda)?,
            DeviceFamily::Random => random_device(self.dim, self.outcomes, self.seed)?,
            DeviceFamily::Tetrahedron => match self.post_seed {
                Some(seed) => tetrahedron_rank_one(Some(&random_post_states(seed)))?,
                None => tetrahedron_rank_one(None)?,
            },
        };
        match self.kick_seed {
            Some(seed) => with_kicks(&base, &random_kicks(&base, seed)),
            None => Ok(base),
        }
    }
}
