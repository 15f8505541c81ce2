//! First-moment (mean-field) dynamics of Lindblad models.
//!
//! For quadratic Hamiltonians and linear jump operators the expectation
//! values of the Nambu vector close on themselves: d<x>/dt = G <x>. The
//! drift G is computed exactly from the adjoint action — the Fock-space
//! oracle is used only to verify it, never to produce it.

use ndarray::{s, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::lindblad::{Basis, LindbladError, LindbladModel};
use crate::nambu::{build_hb_matrix, BogoliubovTransform, NambuVector};
use crate::{CMat, CVec};

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("jump operator is not linear in the mode operators")]
    NonlinearJump,
    #[error("retained block is not closed: leakage {0:.3e} exceeds tolerance")]
    NotClosed(f64),
    #[error("rotating frame is not stationary for this drift (entry ({0}, {1}))")]
    FrameNotStationary(usize, usize),
    #[error(transparent)]
    Model(#[from] LindbladError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Drift matrix G with d<x>/dt = G <x> for the Nambu vector x = (a, a†)
/// in the stated basis and rotating frame.
#[derive(Debug, Clone)]
pub struct DriftMatrix {
    pub m: CMat,
    pub basis: Basis,
    /// Rotation frequency of each mode's frame (length N).
    pub frame: Vec<f64>,
}

/// Matrix H with i d<v>/dt = H <v> on a retained subset of modes.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub h: CMat,
    pub mode_labels: Vec<usize>,
}

impl EffectiveHamiltonian {
    /// Wrap a directly specified (generally non-Hermitian) matrix.
    pub fn from_matrix(h: CMat) -> Self {
        let n = h.nrows();
        Self { h, mode_labels: (0..n).collect() }
    }
}

/// Accumulate the annihilation-row contribution of a dissipator block
/// sum_{mu,nu} R_{mu,nu} (2 L_mu rho L_nu† - {L_nu† L_mu, rho}):
/// d<a_i> += sum_{mu,nu} R_{mu,nu} (w_{mu,i} <L_nu†> - conj(u_{nu,i}) <L_mu>).
fn accumulate_block(rows: &mut CMat, ops: &[NambuVector], r: &CMat) {
    let n = rows.nrows();
    let daggers: Vec<CVec> = ops.iter().map(|op| op.dagger().coeffs).collect();
    for (mu, op_mu) in ops.iter().enumerate() {
        for (nu, op_nu) in ops.iter().enumerate() {
            let weight = r[[mu, nu]];
            if weight == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                let w_mu_i = op_mu.coeffs[i + n];
                let u_nu_i = op_nu.coeffs[i].conj();
                if w_mu_i != Complex64::new(0.0, 0.0) {
                    for j in 0..2 * n {
                        rows[[i, j]] += weight * w_mu_i * daggers[nu][j];
                    }
                }
                if u_nu_i != Complex64::new(0.0, 0.0) {
                    for j in 0..2 * n {
                        rows[[i, j]] -= weight * u_nu_i * op_mu.coeffs[j];
                    }
                }
            }
        }
    }
}

/// Signed frame frequency of Nambu index i (positive on annihilation
/// entries, negative on creation entries).
fn signed_frame(frame: &[f64], i: usize) -> f64 {
    let n = frame.len();
    if i < n {
        frame[i]
    } else {
        -frame[i - n]
    }
}

/// Add the frame term +i diag(nu, -nu) after verifying the drift is
/// stationary in that frame (every nonzero entry connects indices with
/// equal signed frame frequency).
fn apply_frame(mut g: CMat, frame: &[f64]) -> Result<CMat, MomentsError> {
    let dim = g.nrows();
    let scale = linalg::max_abs(&g).max(1e-300);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let mismatch = (signed_frame(frame, i) - signed_frame(frame, j)).abs();
            if mismatch > 1e-12 && g[[i, j]].norm() > 1e-14 * scale {
                return Err(MomentsError::FrameNotStationary(i, j));
            }
        }
    }
    for i in 0..dim {
        g[[i, i]] += Complex64::i() * signed_frame(frame, i);
    }
    Ok(g)
}

/// Exact first-moment drift of a Lindblad model, in the model's basis and
/// rotating frame.
pub fn drift(model: &LindbladModel) -> Result<DriftMatrix, MomentsError> {
    model.validate()?;
    let n = model.system.n_modes;

    // Hamiltonian part: d<x>/dt = -i K <x> with [x, H] = K x.
    let k = build_hb_matrix(&model.system).commutator();
    let g_h = k.mapv(|c| -Complex64::i() * c);

    // Dissipative part: annihilation rows from the adjoint action, creation
    // rows by the Nambu mirror G -> Sigma_x conj(G) Sigma_x.
    let mut rows: CMat = Array2::zeros((n, 2 * n));
    for jump in &model.jumps {
        let r = Array2::from_elem((1, 1), Complex64::new(jump.rate, 0.0));
        accumulate_block(&mut rows, std::slice::from_ref(&jump.op), &r);
    }
    for block in &model.cross_blocks {
        accumulate_block(&mut rows, &block.ops, &block.rate_matrix);
    }
    let mut g_d: CMat = Array2::zeros((2 * n, 2 * n));
    g_d.slice_mut(s![..n, ..]).assign(&rows);
    for i in 0..n {
        for j in 0..n {
            g_d[[i + n, j + n]] = rows[[i, j]].conj();
            g_d[[i + n, j]] = rows[[i, j + n]].conj();
        }
    }

    let g = apply_frame(g_h + g_d, &model.frame)?;
    Ok(DriftMatrix { m: g, basis: model.basis, frame: model.frame.clone() })
}

/// Conjugate a bare-basis drift into the dressed basis: G' = T G T^-1.
pub fn to_dressed(d: &DriftMatrix, bt: &BogoliubovTransform) -> Result<DriftMatrix, MomentsError> {
    if d.basis != Basis::Bare {
        return Err(MomentsError::Model(LindbladError::Invalid(
            "drift is already in the dressed basis".into(),
        )));
    }
    if bt.t.nrows() != d.m.nrows() {
        return Err(MomentsError::Dimension { expected: d.m.nrows(), got: bt.t.nrows() });
    }
    let m = bt.t.dot(&d.m).dot(&bt.t_inv);
    Ok(DriftMatrix { m, basis: Basis::Dressed, frame: d.frame.clone() })
}

impl DriftMatrix {
    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    /// Move to a frame rotating `delta[k]` faster on mode k of the current
    /// basis. Fails with `FrameNotStationary` if the drift would become
    /// time-dependent.
    pub fn shifted_frame(&self, delta: &[f64]) -> Result<DriftMatrix, MomentsError> {
        let n = self.n_modes();
        if delta.len() != n {
            return Err(MomentsError::Dimension { expected: n, got: delta.len() });
        }
        let m = apply_frame(self.m.clone(), delta)?;
        let frame = self.frame.iter().zip(delta).map(|(a, b)| a + b).collect();
        Ok(DriftMatrix { m, basis: self.basis, frame })
    }
}

/// Extract i d<v>/dt = H_eff <v> on a subset of (annihilation) modes.
///
/// The rows of the retained modes must not couple to any excluded Nambu
/// component; leakage above 1e-12 * ||G||_F is an error.
pub fn effective_hamiltonian(
    d: &DriftMatrix,
    modes: &[usize],
) -> Result<EffectiveHamiltonian, MomentsError> {
    let n = d.n_modes();
    for &m in modes {
        if m >= n {
            return Err(MomentsError::Dimension { expected: n, got: m });
        }
    }
    let tol = 1e-12 * linalg::frobenius(&d.m);
    let retained: Vec<usize> = modes.to_vec();
    let mut leak: f64 = 0.0;
    for &i in &retained {
        for j in 0..2 * n {
            if !retained.contains(&j) {
                leak = leak.max(d.m[[i, j]].norm());
            }
        }
    }
    if leak > tol {
        return Err(MomentsError::NotClosed(leak));
    }
    let k = retained.len();
    let mut h: CMat = Array2::zeros((k, k));
    for (r, &i) in retained.iter().enumerate() {
        for (c, &j) in retained.iter().enumerate() {
            h[[r, c]] = Complex64::i() * d.m[[i, j]];
        }
    }
    Ok(EffectiveHamiltonian { h, mode_labels: retained })
}

/// Evolve a moment vector: exp(G t) v0.
pub fn propagate(d: &DriftMatrix, v0: &CVec, t: f64) -> Result<CVec, MomentsError> {
    if v0.len() != d.m.nrows() {
        return Err(MomentsError::Dimension { expected: d.m.nrows(), got: v0.len() });
    }
    let gt = d.m.mapv(|c| c * t);
    Ok(linalg::expm(&gt).dot(v0))
}
