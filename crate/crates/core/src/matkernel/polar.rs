use num_complex::Complex64;

use super::{canonicalize_phase, hermitian_eig, norm, orthonormalize_against, CMatrix};
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
const RANK_CUTOFF: f64 = 1e-12;

/// `m = unitary · positive_root` with `positive_root = √(m†m)`.
#[derive(Clone, Debug)]
pub struct PolarDecomposition {
    pub unitary: CMatrix,
    pub positive_root: CMatrix,
}

/// Polar decomposition through the singular value decomposition
/// `m = W Σ V†`: `unitary = W V†`, `positive_root = V Σ V†`.
///
/// `V` and `Σ` come from the eigendecomposition of `m†m`. Left singular
/// vectors on the range are `m v_i / σ_i`; on the kernel, `W` is completed
/// with the trailing eigenvectors of `m m†` in their canonical order, so a
/// rank-deficient input still gets a deterministic unitary factor.
pub fn polar_decompose(m: &CMatrix) -> Result<PolarDecomposition> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (m.rows(), m.rows()),
            found: m.shape(),
        });
    }
    let d = m.rows();
    let right = hermitian_eig(&(&m.adjoint() * m))?;

    // σ_i = ‖m v_i‖ keeps m v_i = σ_i w_i exact on the range.
    let images: Vec<Vec<Complex64>> = (0..d).map(|i| m.mul_vec(&right.vector(i))).collect();
    let mut sigma: Vec<f64> = images.iter().map(|w| norm(w)).collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_CUTOFF * sigma_max;

    let mut left: Vec<Vec<Complex64>> = vec![Vec::new(); d];
    let mut filled: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let mut kernel_slots = Vec::new();
    for i in 0..d {
        let w = (sigma[i] > cutoff && sigma[i] > 0.0)
            .then(|| images[i].iter().map(|z| z / sigma[i]).collect::<Vec<_>>())
            // Re-orthonormalize: tiny σ amplify round-off in m v_i / σ_i.
            .and_then(|w| orthonormalize_against(&w, &filled, 0.5));
        match w {
            Some(w) => {
                filled.push(w.clone());
                left[i] = w;
            }
            None => {
                sigma[i] = 0.0;
                kernel_slots.push(i);
            }
        }
    }

    if !kernel_slots.is_empty() {
        let cokernel = hermitian_eig(&(m * &m.adjoint()))?;
        let k = kernel_slots.len();
        let trailing = (d - k..d).map(|i| cokernel.vector(i));
        let leading = (0..d - k).map(|i| cokernel.vector(i));
        let standard = (0..d).map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            e[j] = Complex64::new(1.0, 0.0);
            e
        });
        let mut pool = trailing.chain(leading).chain(standard);
        for &slot in &kernel_slots {
            let w = loop {
                let cand = pool.next().expect("the standard basis always completes an orthonormal set");
                if let Some(mut w) = orthonormalize_against(&cand, &filled, 1e-6) {
                    canonicalize_phase(&mut w);
                    break w;
                }
            };
            filled.push(w.clone());
            left[slot] = w;
        }
    }

    let w_mat = CMatrix::from_columns(&left)?;
    let v_mat = right.eigenvectors();
    let v_adj = v_mat.adjoint();
    let unitary = &w_mat * &v_adj;
    let sigma_diag = CMatrix::diag_real(&sigma);
    let positive_root = (&(v_mat * &sigma_diag) * &v_adj).hermitian_part();
    Ok(PolarDecomposition { unitary, positive_root })
}
