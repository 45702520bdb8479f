use std::cmp::Ordering;

use num_complex::Complex64;

use super::{canonicalize_phase, lex_cmp, CMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Off-diagonal convergence threshold, relative to `‖m‖_F`.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Sweep cap per unit of `d²`.
const SWEEPS_PER_D2: usize = 100;

/// Spectral data of a Hermitian matrix.
///
/// Eigenvalues are in descending order. Within a cluster of eigenvalues
/// whose consecutive gaps are below [`DEGENERACY_GAP`], pairs are ordered by
/// descending lexicographic order of their (phase-canonical) eigenvectors,
/// so inside such a cluster the values are only descending up to the gap.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Unitary matrix whose `i`-th column pairs with `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.vectors.column(i)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn top_value(&self) -> f64 {
        self.values[0]
    }

    pub fn top_vector(&self) -> Vec<Complex64> {
        self.vector(0)
    }

    /// Gap between the two largest eigenvalues; infinite in dimension one.
    pub fn top_gap(&self) -> f64 {
        match self.values.as_slice() {
            [a, b, ..] => a - b,
            _ => f64::INFINITY,
        }
    }

    pub fn top_is_degenerate(&self) -> bool {
        self.top_gap() < DEGENERACY_GAP
    }

    /// Number of eigenvalues in the leading degenerate cluster.
    pub fn top_multiplicity(&self) -> usize {
        1 + self
            .values
            .windows(2)
            .take_while(|w| w[0] - w[1] < DEGENERACY_GAP)
            .count()
    }

    /// `V diag(f(λ)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..d {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Diagonalizes a Hermitian matrix with cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the classical real Jacobi rotation to the resulting
/// real symmetric 2×2 block.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenSystem> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (m.rows(), m.rows()),
            found: m.shape(),
        });
    }
    let asymmetry = m.hermitian_defect();
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }

    let d = m.rows();
    let mut a = m.hermitian_part();
    for i in 0..d {
        a[(i, i)].im = 0.0;
    }
    let mut v = CMatrix::identity(d);
    let threshold = OFF_DIAGONAL_TOL * m.frobenius_norm();
    let max_sweeps = SWEEPS_PER_D2 * d * d;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let values: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    Ok(canonical_order(values, &v))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let d = a.rows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let modulus = apq.norm();
    if modulus == 0.0 {
        return;
    }
    let d = a.rows();
    // ω removes the phase of a_pq: (Φ†AΦ)_pq = |a_pq| with Φ_qq = ω.
    let omega = apq.conj() / modulus;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * modulus);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = Φ R restricted to (p, q):
    //   J_pp = c, J_pq = s, J_qp = -s ω, J_qq = c ω
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -omega * s;
    let j_qq = omega * c;

    // A ← A J, V ← V J
    for k in 0..d {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
    // A ← J† A
    for k in 0..d {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// Sorts eigenpairs descending, canonicalizes eigenvector phases and breaks
/// near-ties by descending lexicographic order of the eigenvectors.
fn canonical_order(values: Vec<f64>, v: &CMatrix) -> EigenSystem {
    let d = values.len();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = values
        .into_iter()
        .enumerate()
        .map(|(k, lambda)| {
            let mut col = v.column(k);
            canonicalize_phase(&mut col);
            (lambda, col)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && pairs[end - 1].0 - pairs[end].0 < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|x, y| match lex_cmp(&y.1, &x.1) {
                Ordering::Equal => y.0.total_cmp(&x.0),
                ord => ord,
            });
        }
        start = end;
    }

    let columns: Vec<Vec<Complex64>> = pairs.iter().map(|(_, c)| c.clone()).collect();
    EigenSystem {
        values: pairs.iter().map(|(l, _)| *l).collect(),
        vectors: CMatrix::from_columns(&columns).expect("eigenvector columns share the dimension"),
    }
}
