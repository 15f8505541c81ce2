//! Lindblad-model builders: local (bare-mode) dissipators, global (dressed)
//! dissipators for non-degenerate spectra, and the cross-coupled dissipator
//! blocks required when the dressed spectrum is degenerate.
//!
//! Dissipators use the convention D(L) rho = 2 L rho L† - L†L rho - rho L†L,
//! so a jump (a, gamma) produces an amplitude decay rate gamma.

use ndarray::Array2;
use thiserror::Error;

use crate::bath::{
    lambda_rate, occupation, spectral_density, validate_baths, BathError, BathSpec,
    SpectralDensity,
};
use crate::linalg;
use crate::nambu::{
    diagonalize, phi_coefficients, BogoliubovTransform, NambuError, NambuVector, QuadraticSystem,
};
use crate::CMat;

/// Relative tolerance for grouping dressed frequencies into eigenspaces.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Rates below this fraction of the largest rate are pruned.
pub const RATE_PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("dressed spectrum is degenerate; use the degenerate builder")]
    DegenerateSpectrum,
    #[error("non-flat spectral densities require a Lamb-shift treatment that is out of scope")]
    UnsupportedLambShift,
    #[error("cross-jump rate matrix is not Hermitian positive-semidefinite (witness {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error(transparent)]
    Nambu(#[from] NambuError),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// A single jump operator with a non-negative rate.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub op: NambuVector,
    pub rate: f64,
}

/// A block of jump operators sharing a Hermitian PSD rate matrix R:
/// D = sum_{mu,nu} R_{mu,nu} (2 L_mu rho L_nu† - {L_nu† L_mu, rho}).
#[derive(Debug, Clone)]
pub struct CrossJumpBlock {
    pub ops: Vec<NambuVector>,
    pub rate_matrix: CMat,
}

impl CrossJumpBlock {
    /// Validates Hermiticity and positive semidefiniteness (to 1e-10 relative).
    pub fn new(ops: Vec<NambuVector>, rate_matrix: CMat) -> Result<Self, LindbladError> {
        let m = ops.len();
        if rate_matrix.dim() != (m, m) {
            return Err(LindbladError::Invalid(
                "rate matrix dimension must match the operator count".into(),
            ));
        }
        let herm_defect = linalg::max_abs(&(&rate_matrix - &rate_matrix.t().mapv(|c| c.conj())));
        let scale = linalg::max_abs(&rate_matrix).max(1e-300);
        if herm_defect > 1e-10 * scale {
            return Err(LindbladError::NotPositiveSemidefinite(herm_defect));
        }
        let min_eig = linalg::eigvalsh(&rate_matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 * scale {
            return Err(LindbladError::NotPositiveSemidefinite(min_eig));
        }
        Ok(Self { ops, rate_matrix })
    }
}

/// Basis in which the model's jump-operator coefficients are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Bare,
    Dressed,
}

/// A quadratic Hamiltonian plus linear dissipators, optionally in a
/// rotating frame (`frame[n]` is the rotation frequency of mode n).
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub system: QuadraticSystem,
    pub jumps: Vec<JumpTerm>,
    pub cross_blocks: Vec<CrossJumpBlock>,
    pub basis: Basis,
    pub frame: Vec<f64>,
}

impl LindbladModel {
    pub fn closed(system: QuadraticSystem) -> Self {
        let n = system.n_modes;
        Self { system, jumps: Vec::new(), cross_blocks: Vec::new(), basis: Basis::Bare, frame: vec![0.0; n] }
    }

    /// Declares a rotating frame; the drift acquires +i nu_n on mode n.
    pub fn with_frame(mut self, frame: Vec<f64>) -> Result<Self, LindbladError> {
        if frame.len() != self.system.n_modes {
            return Err(LindbladError::Invalid("frame length must equal the mode count".into()));
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LindbladError> {
        self.system.validate()?;
        let dim = 2 * self.system.n_modes;
        for j in &self.jumps {
            if j.op.coeffs.len() != dim {
                return Err(LindbladError::Invalid("jump operator dimension mismatch".into()));
            }
            if j.rate < 0.0 {
                return Err(LindbladError::Invalid("negative jump rate".into()));
            }
        }
        for b in &self.cross_blocks {
            for op in &b.ops {
                if op.coeffs.len() != dim {
                    return Err(LindbladError::Invalid("cross-block operator dimension mismatch".into()));
                }
            }
        }
        if self.frame.len() != self.system.n_modes {
            return Err(LindbladError::Invalid("frame length must equal the mode count".into()));
        }
        Ok(())
    }
}

fn prune(mut jumps: Vec<JumpTerm>, mut blocks: Vec<CrossJumpBlock>) -> (Vec<JumpTerm>, Vec<CrossJumpBlock>) {
    let max_rate = jumps
        .iter()
        .map(|j| j.rate)
        .chain(blocks.iter().map(|b| linalg::max_abs(&b.rate_matrix)))
        .fold(0.0, f64::max);
    let cut = RATE_PRUNE_TOL * max_rate;
    jumps.retain(|j| j.rate > cut);
    blocks.retain(|b| linalg::max_abs(&b.rate_matrix) > cut);
    (jumps, blocks)
}

/// The local (bare-mode) master equation: each bath damps and pumps its own
/// mode at the bare frequency, ignoring inter-mode coupling.
pub fn build_local(sys: &QuadraticSystem, baths: &[BathSpec]) -> Result<LindbladModel, LindbladError> {
    sys.validate()?;
    validate_baths(baths, sys.n_modes)?;
    let mut jumps = Vec::new();
    for b in baths {
        let omega = sys.omega[b.mode];
        let loss = lambda_rate(b, omega)?;
        let gain = lambda_rate(b, -omega)?;
        jumps.push(JumpTerm { op: NambuVector::annihilation(b.mode, sys.n_modes), rate: loss });
        jumps.push(JumpTerm { op: NambuVector::creation(b.mode, sys.n_modes), rate: gain });
    }
    let (jumps, cross_blocks) = prune(jumps, Vec::new());
    Ok(LindbladModel {
        system: sys.clone(),
        jumps,
        cross_blocks,
        basis: Basis::Bare,
        frame: vec![0.0; sys.n_modes],
    })
}

fn require_nondegenerate(bt: &BogoliubovTransform) -> Result<(), LindbladError> {
    let freqs = &bt.dressed_freq;
    let max = freqs.first().copied().unwrap_or(0.0);
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            if (freqs[i] - freqs[j]).abs() < DEGENERACY_TOL * max {
                return Err(LindbladError::DegenerateSpectrum);
            }
        }
    }
    Ok(())
}

/// The dressed (global) master equation for a non-degenerate spectrum:
/// independent damping/pumping of each dressed mode b_k, with per-bath
/// weights J_n(Omega_k) |phi_{n,k}|^2.
pub fn build_global(sys: &QuadraticSystem, baths: &[BathSpec]) -> Result<LindbladModel, LindbladError> {
    sys.validate()?;
    validate_baths(baths, sys.n_modes)?;
    let bt = diagonalize(sys)?;
    require_nondegenerate(&bt)?;
    let mut jumps = Vec::new();
    for b in baths {
        let phi = phi_coefficients(&bt, b.mode)?;
        for k in 0..sys.n_modes {
            let omega_k = bt.dressed_freq[k];
            let weight = phi[k].norm_sqr();
            let loss = weight * lambda_rate(b, omega_k)?;
            let gain = weight * lambda_rate(b, -omega_k)?;
            jumps.push(JumpTerm { op: bt.dressed_mode(k), rate: loss });
            jumps.push(JumpTerm { op: bt.dressed_mode_dagger(k), rate: gain });
        }
    }
    let (jumps, cross_blocks) = prune(jumps, Vec::new());
    Ok(LindbladModel {
        system: sys.clone(),
        jumps,
        cross_blocks,
        basis: Basis::Bare,
        frame: vec![0.0; sys.n_modes],
    })
}

/// Partition dressed mode indices into eigenspaces of common frequency.
pub fn eigenspace_groups(bt: &BogoliubovTransform) -> Vec<Vec<usize>> {
    let freqs = &bt.dressed_freq;
    let max = freqs.first().copied().unwrap_or(0.0);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..freqs.len() {
        match groups.last_mut() {
            Some(g) if (freqs[g[0]] - freqs[k]).abs() < DEGENERACY_TOL * max => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// The dressed master equation in the wide-band limit, valid for degenerate
/// spectra: each bath couples the members of a degenerate eigenspace through
/// a rank-one cross rate matrix Phi_{mu,nu} = phi_{n,mu} phi*_{n,nu}.
///
/// Non-degenerate eigenspaces reduce to plain jump terms, so on a
/// non-degenerate system this reproduces [`build_global`].
pub fn build_global_degenerate(
    sys: &QuadraticSystem,
    baths: &[BathSpec],
) -> Result<LindbladModel, LindbladError> {
    sys.validate()?;
    validate_baths(baths, sys.n_modes)?;
    for b in baths {
        if !matches!(b.spectral_density, SpectralDensity::Flat { .. }) {
            return Err(LindbladError::UnsupportedLambShift);
        }
    }
    let bt = diagonalize(sys)?;
    let groups = eigenspace_groups(&bt);
    let mut jumps = Vec::new();
    let mut blocks = Vec::new();
    for b in baths {
        let phi = phi_coefficients(&bt, b.mode)?;
        for group in &groups {
            let omega = bt.dressed_freq[group[0]];
            let j = spectral_density(b, omega)?;
            let f = occupation(b, omega)?;
            let loss = j * (1.0 - b.statistics.zeta() * f);
            let gain = j * f;
            if group.len() == 1 {
                let k = group[0];
                let w = phi[k].norm_sqr();
                jumps.push(JumpTerm { op: bt.dressed_mode(k), rate: w * loss });
                jumps.push(JumpTerm { op: bt.dressed_mode_dagger(k), rate: w * gain });
                continue;
            }
            let m = group.len();
            // loss block over {b_mu}: R_{mu,nu} = phi_mu phi*_nu lambda(+Omega)
            let mut r_loss: CMat = Array2::zeros((m, m));
            // gain block over {b_mu†}: R_{mu,nu} = phi*_mu phi_nu lambda(-Omega)
            let mut r_gain: CMat = Array2::zeros((m, m));
            for (a, &mu) in group.iter().enumerate() {
                for (c, &nu) in group.iter().enumerate() {
                    r_loss[[a, c]] = phi[mu] * phi[nu].conj() * loss;
                    r_gain[[a, c]] = phi[mu].conj() * phi[nu] * gain;
                }
            }
            let ops: Vec<NambuVector> = group.iter().map(|&k| bt.dressed_mode(k)).collect();
            let ops_dag: Vec<NambuVector> =
                group.iter().map(|&k| bt.dressed_mode_dagger(k)).collect();
            blocks.push(CrossJumpBlock::new(ops, r_loss)?);
            blocks.push(CrossJumpBlock::new(ops_dag, r_gain)?);
        }
    }
    let (jumps, cross_blocks) = prune(jumps, blocks);
    Ok(LindbladModel {
        system: sys.clone(),
        jumps,
        cross_blocks,
        basis: Basis::Bare,
        frame: vec![0.0; sys.n_modes],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::bath::Statistics;

    fn flat_bath(mode: usize, statistics: Statistics, t: f64, eta: f64, gamma: f64) -> BathSpec {
        BathSpec {
            mode,
            statistics,
            temperature: t,
            chemical_potential: eta,
            spectral_density: SpectralDensity::Flat { gamma },
        }
    }

    /// (coefficient vector, rate) pairs sorted for comparison.
    fn jump_signature(m: &LindbladModel) -> Vec<(Vec<(f64, f64)>, f64)> {
        let mut sig: Vec<(Vec<(f64, f64)>, f64)> = m
            .jumps
            .iter()
            .map(|j| {
                (
                    j.op.coeffs.iter().map(|c| (c.re, c.im)).collect(),
                    j.rate,
                )
            })
            .collect();
        sig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sig
    }

    #[test]
    fn local_loss_and_gain() {
        // loss gamma on mode 1 (empty bose bath), incoherent gain gamma on
        // mode 2 (filled fermi bath)
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.3),
            flat_bath(1, Statistics::Fermi, 0.0, 100.0, 0.3),
        ];
        let model = build_local(&sys, &baths).unwrap();
        assert_eq!(model.jumps.len(), 2);
        let a1 = NambuVector::annihilation(0, 2);
        let a2d = NambuVector::creation(1, 2);
        assert!(model.jumps.iter().any(|j| j.op == a1 && (j.rate - 0.3).abs() < 1e-15));
        assert!(model.jumps.iter().any(|j| j.op == a2d && (j.rate - 0.3).abs() < 1e-15));
        assert!(model.cross_blocks.is_empty());
    }

    #[test]
    fn local_empty_and_single() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0]).unwrap();
        assert!(build_local(&sys, &[]).unwrap().jumps.is_empty());
        let model =
            build_local(&sys, &[flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.2)]).unwrap();
        assert_eq!(model.jumps.len(), 1);
        assert_eq!(model.jumps[0].op, NambuVector::annihilation(0, 2));
        assert!((model.jumps[0].rate - 0.2).abs() < 1e-15);
    }

    #[test]
    fn global_beamsplitter_rates() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.2),
            flat_bath(1, Statistics::Bose, 0.0, 0.0, 0.6),
        ];
        let model = build_global(&sys, &baths).unwrap();
        // two baths x two dressed modes, gains pruned at T = 0
        assert_eq!(model.jumps.len(), 4);
        // each bath splits evenly over the dressed doublet
        let mut rates: Vec<f64> = model.jumps.iter().map(|j| j.rate).collect();
        rates.sort_by(f64::total_cmp);
        for (r, expect) in rates.iter().zip([0.1, 0.1, 0.3, 0.3]) {
            assert!((r - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn global_reduces_to_local_when_uncoupled() {
        let sys = QuadraticSystem::new(vec![5.0, 3.0]).unwrap();
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.2),
            flat_bath(1, Statistics::Bose, 0.0, 0.0, 0.4),
        ];
        let global = build_global(&sys, &baths).unwrap();
        let local = build_local(&sys, &baths).unwrap();
        assert_eq!(jump_signature(&global), jump_signature(&local));
    }

    #[test]
    fn global_single_mode() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let model =
            build_global(&sys, &[flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.7)]).unwrap();
        assert_eq!(model.jumps.len(), 1);
        assert!((model.jumps[0].rate - 0.7).abs() < 1e-15);
    }

    #[test]
    fn global_rejects_degenerate_spectrum() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_pair_coupling(0, 1, 3.0.into());
        let err = build_global(&sys, &[flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.1)])
            .unwrap_err();
        assert!(matches!(err, LindbladError::DegenerateSpectrum));
    }

    #[test]
    fn degenerate_pairing_blocks() {
        // pairing-coupled doublet at Omega = 4: empty bose bath gives a loss
        // block, filled fermi bath gives a gain block
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_pair_coupling(0, 1, 3.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.3),
            flat_bath(1, Statistics::Fermi, 0.0, 100.0, 0.5),
        ];
        let model = build_global_degenerate(&sys, &baths).unwrap();
        assert!(model.jumps.is_empty());
        assert_eq!(model.cross_blocks.len(), 2);
        let w_sq_sum = 9.0 / 8.0 + 1.0 / 8.0; // |phi_1|^2 + |phi_2|^2
        for block in &model.cross_blocks {
            assert_eq!(block.ops.len(), 2);
            let trace = block.rate_matrix[[0, 0]].re + block.rate_matrix[[1, 1]].re;
            let gamma = if trace > 0.5 { 0.5 } else { 0.3 };
            assert!((trace - gamma * w_sq_sum).abs() < 1e-12, "trace {trace}");
        }
    }

    #[test]
    fn degenerate_builder_matches_global_when_nondegenerate() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.2),
            flat_bath(1, Statistics::Bose, 0.3, 0.0, 0.6),
        ];
        let a = build_global(&sys, &baths).unwrap();
        let b = build_global_degenerate(&sys, &baths).unwrap();
        assert!(b.cross_blocks.is_empty());
        let (sa, sb) = (jump_signature(&a), jump_signature(&b));
        assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x.1 - y.1).abs() < 1e-12);
            for (cx, cy) in x.0.iter().zip(&y.0) {
                assert!((cx.0 - cy.0).abs() < 1e-12 && (cx.1 - cy.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_builder_rejects_ohmic() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let bath = BathSpec {
            mode: 0,
            statistics: Statistics::Bose,
            temperature: 0.0,
            chemical_potential: 0.0,
            spectral_density: SpectralDensity::Ohmic { alpha: 0.1, cutoff: 50.0 },
        };
        let err = build_global_degenerate(&sys, &[bath]).unwrap_err();
        assert!(matches!(err, LindbladError::UnsupportedLambShift));
    }

    #[test]
    fn cross_block_validation() {
        use ndarray::array;
        let ops = vec![NambuVector::annihilation(0, 1)];
        let bad = array![[Complex64::new(-1.0, 0.0)]];
        assert!(matches!(
            CrossJumpBlock::new(ops.clone(), bad),
            Err(LindbladError::NotPositiveSemidefinite(_))
        ));
        let non_hermitian = ndarray::Array2::from_shape_vec(
            (1, 1),
            vec![Complex64::new(1.0, 0.5)],
        )
        .unwrap();
        assert!(CrossJumpBlock::new(ops, non_hermitian).is_err());
    }
}
