//! Brute-force oracle: dense truncated-Fock evolution of a Lindblad model.
//!
//! This module is deliberately naive — dense Kronecker-product operators and
//! fixed-step 4th-order integration of the full density matrix. It exists to
//! verify the algebraic machinery in the rest of the crate, never to be fast.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::lindblad::LindbladModel;
use crate::linalg;
use crate::nambu::NambuVector;
use crate::CMat;

const DIM_GUARD: usize = 65536;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("truncated Fock dimension {0} exceeds the guard rail {DIM_GUARD}")]
    DimensionTooLarge(usize),
    #[error("top Fock layer population {0:.3e} exceeds 1e-6; raise the cutoff or shorten the horizon")]
    Truncation(f64),
    #[error("step {dt:.3e} too large for the fastest scale {scale:.3e} (need dt <= 0.1/scale)")]
    StepTooLarge { dt: f64, scale: f64 },
    #[error("trace drifted by {0:.3e} (> 1e-9); integration step too coarse")]
    TraceDrift(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("rotating-frame models are not supported by the oracle; evolve in the lab frame")]
    UnsupportedFrame,
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

/// Dense truncated-Fock realization of a Lindblad model.
pub struct FockRep {
    pub cutoffs: Vec<usize>,
    pub dim: usize,
    /// Annihilation operator of each mode.
    pub lowering: Vec<CMat>,
    pub hamiltonian: CMat,
    /// Dissipator blocks as (jump matrices, rate matrix).
    pub blocks: Vec<(Vec<CMat>, CMat)>,
    /// Fastest frequency/rate present, for step-size validation.
    pub scale: f64,
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out: CMat = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            if a[[i, j]] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

fn single_mode_lowering(cutoff: usize) -> CMat {
    let d = cutoff + 1;
    let mut a: CMat = Array2::zeros((d, d));
    for k in 1..d {
        a[[k - 1, k]] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|c| c.conj())
}

/// Dense matrix of a linear combination sum_i (u_i a_i + w_i a_i†).
fn linear_operator(lowering: &[CMat], v: &NambuVector) -> CMat {
    let n = lowering.len();
    let dim = lowering[0].nrows();
    let mut out: CMat = Array2::zeros((dim, dim));
    for i in 0..n {
        let (u, w) = (v.coeffs[i], v.coeffs[i + n]);
        if u != Complex64::new(0.0, 0.0) {
            out = out + lowering[i].mapv(|c| c * u);
        }
        if w != Complex64::new(0.0, 0.0) {
            out = out + dagger(&lowering[i]).mapv(|c| c * w);
        }
    }
    out
}

impl FockRep {
    pub fn new(model: &LindbladModel, cutoffs: &[usize]) -> Result<Self, FockError> {
        let n = model.system.n_modes;
        if cutoffs.len() != n {
            return Err(FockError::Dimension { expected: n, got: cutoffs.len() });
        }
        if model.frame.iter().any(|&f| f != 0.0) {
            return Err(FockError::UnsupportedFrame);
        }
        let dim: usize = cutoffs.iter().map(|&c| c + 1).product();
        if dim > DIM_GUARD {
            return Err(FockError::DimensionTooLarge(dim));
        }

        // a_i = I x ... x a x ... x I
        let mut lowering = Vec::with_capacity(n);
        for i in 0..n {
            let mut op: CMat = Array2::eye(1);
            for (j, &c) in cutoffs.iter().enumerate() {
                let factor = if j == i {
                    single_mode_lowering(c)
                } else {
                    Array2::eye(c + 1)
                };
                op = kron(&op, &factor);
            }
            lowering.push(op);
        }

        let sys = &model.system;
        let mut h: CMat = Array2::zeros((dim, dim));
        for i in 0..n {
            let ad = dagger(&lowering[i]);
            h = h + ad.dot(&lowering[i]).mapv(|c| c * sys.omega[i]);
            if sys.chi[i] != Complex64::new(0.0, 0.0) {
                let two = ad.dot(&ad).mapv(|c| c * (sys.chi[i] / 2.0));
                h = h + &two + &dagger(&two);
            }
            for j in (i + 1)..n {
                let adj = dagger(&lowering[j]);
                if sys.lambda[[i, j]] != Complex64::new(0.0, 0.0) {
                    let t = ad.dot(&lowering[j]).mapv(|c| c * sys.lambda[[i, j]]);
                    h = h + &t + &dagger(&t);
                }
                if sys.g[[i, j]] != Complex64::new(0.0, 0.0) {
                    let t = ad.dot(&adj).mapv(|c| c * sys.g[[i, j]]);
                    h = h + &t + &dagger(&t);
                }
            }
        }

        let mut blocks = Vec::new();
        let mut max_rate: f64 = 0.0;
        for jump in &model.jumps {
            let l = linear_operator(&lowering, &jump.op);
            let r = Array2::from_elem((1, 1), Complex64::new(jump.rate, 0.0));
            max_rate = max_rate.max(jump.rate);
            blocks.push((vec![l], r));
        }
        for cb in &model.cross_blocks {
            let ls: Vec<CMat> = cb.ops.iter().map(|op| linear_operator(&lowering, op)).collect();
            max_rate = max_rate.max(crate::linalg::max_abs(&cb.rate_matrix));
            blocks.push((ls, cb.rate_matrix.clone()));
        }

        let max_freq = sys
            .omega
            .iter()
            .map(|w| w.abs())
            .chain(sys.lambda.iter().map(|c| c.norm()))
            .chain(sys.g.iter().map(|c| c.norm()))
            .chain(sys.chi.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        let scale = max_freq.max(max_rate).max(1e-300);

        Ok(Self { cutoffs: cutoffs.to_vec(), dim, lowering, hamiltonian: h, blocks, scale })
    }
}

/// A validated density matrix on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub rho: CMat,
}

impl DensityMatrix {
    pub fn new(rho: CMat) -> Result<Self, FockError> {
        let herm = crate::linalg::max_abs(&(&rho - &dagger(&rho)));
        if herm > 1e-12 {
            return Err(FockError::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let trace = trace_of(&rho);
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(FockError::InvalidState(format!("trace {trace} != 1")));
        }
        let min_eig = crate::linalg::eigvalsh(&rho).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(FockError::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { rho })
    }

    pub fn vacuum(rep: &FockRep) -> Self {
        let mut rho: CMat = Array2::zeros((rep.dim, rep.dim));
        rho[[0, 0]] = Complex64::new(1.0, 0.0);
        Self { rho }
    }

    /// Product of truncated coherent states |alpha_i>.
    pub fn coherent(rep: &FockRep, alphas: &[Complex64]) -> Result<Self, FockError> {
        if alphas.len() != rep.cutoffs.len() {
            return Err(FockError::Dimension { expected: rep.cutoffs.len(), got: alphas.len() });
        }
        let mut psi = ndarray::Array1::from_elem(1, Complex64::new(1.0, 0.0));
        for (alpha, &cutoff) in alphas.iter().zip(&rep.cutoffs) {
            let d = cutoff + 1;
            let mut amp = ndarray::Array1::zeros(d);
            let mut coeff = Complex64::new(1.0, 0.0);
            for k in 0..d {
                if k > 0 {
                    coeff = coeff * alpha / Complex64::new((k as f64).sqrt(), 0.0);
                }
                amp[k] = coeff;
            }
            let norm: f64 = amp.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            amp.mapv_inplace(|c| c / norm);
            let mut next = ndarray::Array1::zeros(psi.len() * d);
            for (i, &pi) in psi.iter().enumerate() {
                for (k, &ak) in amp.iter().enumerate() {
                    next[i * d + k] = pi * ak;
                }
            }
            psi = next;
        }
        let dim = psi.len();
        let mut rho: CMat = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[[i, j]] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { rho })
    }
}

fn trace_of(m: &CMat) -> Complex64 {
    (0..m.nrows()).map(|i| m[[i, i]]).sum()
}

/// Population of basis states in which any mode sits at its truncation edge.
pub fn top_layer_population(rep: &FockRep, rho: &CMat) -> f64 {
    let mut pop = 0.0;
    for idx in 0..rep.dim {
        let mut rem = idx;
        let mut at_edge = false;
        for &c in rep.cutoffs.iter().rev() {
            let d = c + 1;
            if rem % d == c {
                at_edge = true;
            }
            rem /= d;
        }
        if at_edge {
            pop += rho[[idx, idx]].re;
        }
    }
    pop
}

/// Precomputed Liouvillian pieces: d rho/dt = K rho + rho K† + sum_j A_j rho B_j
/// with K = -iH - sum w L_nu† L_mu, A_j = 2 w L_mu, B_j = L_nu†.
struct Generator {
    k: CMat,
    k_dag: CMat,
    sandwiches: Vec<(CMat, CMat)>,
}

fn build_generator(rep: &FockRep) -> Generator {
    let i = Complex64::i();
    let mut k = rep.hamiltonian.mapv(|c| c * (-i));
    let mut sandwiches = Vec::new();
    for (ls, r) in &rep.blocks {
        for (mu, l_mu) in ls.iter().enumerate() {
            for (nu, l_nu) in ls.iter().enumerate() {
                let w = r[[mu, nu]];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let l_nu_dag = dagger(l_nu);
                k = k - linalg::matmul(&l_nu_dag, l_mu).mapv(|c| c * w);
                sandwiches.push((l_mu.mapv(|c| c * (2.0 * w)), l_nu_dag));
            }
        }
    }
    let k_dag = k.t().mapv(|c| c.conj());
    Generator { k, k_dag, sandwiches }
}

fn rhs(gen: &Generator, rho: &CMat) -> CMat {
    let mut d = linalg::matmul(&gen.k, rho) + linalg::matmul(rho, &gen.k_dag);
    for (a, b) in &gen.sandwiches {
        d = d + linalg::matmul(&linalg::matmul(a, rho), b);
    }
    d
}

/// Integrate the master equation for time `t` with fixed-step RK4 of
/// step at most `dt`. Monitors trace conservation and truncation leakage.
pub fn evolve(
    rep: &FockRep,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix, FockError> {
    if rho0.rho.nrows() != rep.dim {
        return Err(FockError::Dimension { expected: rep.dim, got: rho0.rho.nrows() });
    }
    if dt > 0.1 / rep.scale {
        return Err(FockError::StepTooLarge { dt, scale: rep.scale });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let n_steps = (t / dt).ceil() as usize;
    let h = t / n_steps as f64;
    let gen = build_generator(rep);
    let mut rho = rho0.rho.clone();
    for _ in 0..n_steps {
        let k1 = rhs(&gen, &rho);
        let k2 = rhs(&gen, &(&rho + &k1.mapv(|c| c * (h / 2.0))));
        let k3 = rhs(&gen, &(&rho + &k2.mapv(|c| c * (h / 2.0))));
        let k4 = rhs(&gen, &(&rho + &k3.mapv(|c| c * h)));
        rho = &rho
            + &(k1 + k2.mapv(|c| c * 2.0) + k3.mapv(|c| c * 2.0) + k4).mapv(|c| c * (h / 6.0));
    }
    let drift = (trace_of(&rho).re - 1.0).abs();
    if drift > 1e-9 {
        return Err(FockError::TraceDrift(drift));
    }
    let leak = top_layer_population(rep, &rho);
    if leak > 1e-6 {
        return Err(FockError::Truncation(leak));
    }
    Ok(DensityMatrix { rho })
}

/// Tr(rho (sum_i u_i a_i + w_i a_i†)).
pub fn expect_linear(
    rep: &FockRep,
    rho: &DensityMatrix,
    v: &NambuVector,
) -> Result<Complex64, FockError> {
    if v.coeffs.len() != 2 * rep.lowering.len() {
        return Err(FockError::Dimension { expected: 2 * rep.lowering.len(), got: v.coeffs.len() });
    }
    let op = linear_operator(&rep.lowering, v);
    Ok(trace_of(&rho.rho.dot(&op)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathSpec, SpectralDensity, Statistics};
    use crate::lindblad::{build_global, build_global_degenerate, build_local};
    use crate::moments::{drift, propagate};
    use crate::nambu::QuadraticSystem;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat_bath(mode: usize, statistics: Statistics, t: f64, eta: f64, gamma: f64) -> BathSpec {
        BathSpec {
            mode,
            statistics,
            temperature: t,
            chemical_potential: eta,
            spectral_density: SpectralDensity::Flat { gamma },
        }
    }

    #[test]
    fn commutation_on_truncated_space() {
        let sys = QuadraticSystem::new(vec![5.0, 3.0]).unwrap();
        let model = LindbladModel::closed(sys);
        let rep = FockRep::new(&model, &[4, 3]).unwrap();
        for i in 0..2 {
            let a = &rep.lowering[i];
            let comm = a.dot(&dagger(a)) - dagger(a).dot(a);
            // [a, a†] = 1 away from the truncation edge
            for idx in 0..rep.dim {
                let mut rem = idx;
                let mut at_edge = false;
                for &cap in rep.cutoffs.iter().rev() {
                    if rem % (cap + 1) == cap {
                        at_edge = true;
                    }
                    rem /= cap + 1;
                }
                if !at_edge {
                    assert!((comm[[idx, idx]] - c(1.0, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn damped_oscillator_matches_analytics() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let model = build_local(&sys, &[flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.4)]).unwrap();
        let rep = FockRep::new(&model, &[6]).unwrap();
        let alpha = c(0.25, 0.05);
        let rho0 = DensityMatrix::coherent(&rep, &[alpha]).unwrap();
        let t = 1.3;
        let rho = evolve(&rep, &rho0, t, 5e-4).unwrap();
        let a = NambuVector::annihilation(0, 1);
        let got = expect_linear(&rep, &rho, &a).unwrap();
        let expect = alpha * (c(-0.4, -5.0) * t).exp();
        assert!((got - expect).norm() < 1e-8, "got {got}, expected {expect}");
        // conjugate vector gives the conjugate value
        let ad = NambuVector::creation(0, 1);
        let got_dag = expect_linear(&rep, &rho, &ad).unwrap();
        assert!((got_dag - got.conj()).norm() < 1e-12);
    }

    #[test]
    fn unitary_evolution_preserves_purity() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let model = LindbladModel::closed(sys);
        let rep = FockRep::new(&model, &[5, 5]).unwrap();
        let rho0 = DensityMatrix::coherent(&rep, &[c(0.2, 0.0), c(0.0, 0.15)]).unwrap();
        let rho = evolve(&rep, &rho0, 0.8, 0.005).unwrap();
        let purity = trace_of(&rho.rho.dot(&rho.rho)).re;
        assert!((purity - 1.0).abs() < 1e-9, "purity {purity}");
    }

    #[test]
    fn vacuum_expectations_vanish() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let rep = FockRep::new(&LindbladModel::closed(sys), &[10]).unwrap();
        let rho = DensityMatrix::vacuum(&rep);
        let a = NambuVector::annihilation(0, 1);
        assert!(expect_linear(&rep, &rho, &a).unwrap().norm() < 1e-15);
        let coherent = DensityMatrix::coherent(&rep, &[c(0.2, 0.1)]).unwrap();
        let got = expect_linear(&rep, &coherent, &a).unwrap();
        assert!((got - c(0.2, 0.1)).norm() < 1e-9);
    }

    /// Compare oracle expectation trajectories against the exact moment
    /// drift at several sample times.
    fn assert_drift_matches_oracle(model: &LindbladModel, cutoffs: &[usize], t_max: f64) {
        let n = model.system.n_modes;
        let rep = FockRep::new(model, cutoffs).unwrap();
        let alphas: Vec<Complex64> =
            (0..n).map(|i| c(0.12 + 0.03 * i as f64, -0.07 + 0.05 * i as f64)).collect();
        let rho0 = DensityMatrix::coherent(&rep, &alphas).unwrap();
        let d = drift(model).unwrap();
        let mut v0 = crate::CVec::zeros(2 * n);
        for i in 0..n {
            let a = NambuVector::annihilation(i, n);
            let ad = NambuVector::creation(i, n);
            v0[i] = expect_linear(&rep, &rho0, &a).unwrap();
            v0[i + n] = expect_linear(&rep, &rho0, &ad).unwrap();
        }
        // step chosen so the accumulated RK4 error stays well under 1e-8:
        // global error ~ (scale*dt)^4 * scale * t
        let dt = {
            let budget = (1e-9 / (rep.scale * t_max)).powf(0.25) / rep.scale;
            budget.min(0.1 / rep.scale)
        };
        let mut rho = rho0.clone();
        for step in 1..=5 {
            let t = t_max * step as f64 / 5.0;
            rho = evolve(&rep, &rho, t_max / 5.0, dt).unwrap();
            let v = propagate(&d, &v0, t).unwrap();
            for i in 0..n {
                let a = NambuVector::annihilation(i, n);
                let got = expect_linear(&rep, &rho, &a).unwrap();
                assert!(
                    (got - v[i]).norm() < 1e-8,
                    "mode {i} at t={t}: oracle {got}, drift {}",
                    v[i]
                );
            }
        }
    }

    #[test]
    fn oracle_matches_drift_for_global_beamsplitter() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.2),
            flat_bath(1, Statistics::Bose, 0.0, 0.0, 0.6),
        ];
        let model = build_global(&sys, &baths).unwrap();
        assert_drift_matches_oracle(&model, &[6, 6], 2.0);
    }

    #[test]
    fn oracle_matches_drift_for_degenerate_pairing() {
        // the scenario that pins down the dressed-degenerate dissipator and
        // the W coefficient in its first-moment drift
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_pair_coupling(0, 1, 1.5.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.30),
            flat_bath(1, Statistics::Fermi, 0.0, 100.0, 0.18),
        ];
        let model = build_global_degenerate(&sys, &baths).unwrap();
        assert_drift_matches_oracle(&model, &[13, 13], 0.4);
    }

    #[test]
    fn oracle_matches_drift_for_local_gain() {
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_coupling(0, 1, 1.0.into());
        let baths = [
            flat_bath(0, Statistics::Bose, 0.0, 0.0, 0.3),
            flat_bath(1, Statistics::Fermi, 0.0, 100.0, 0.3),
        ];
        let model = build_local(&sys, &baths).unwrap();
        // gain scenario: short horizon keeps the photon number low
        assert_drift_matches_oracle(&model, &[13, 13], 0.4);
    }

    #[test]
    fn truncation_error_reported() {
        // strong pairing drive against a tiny cutoff must trip the monitor
        let sys = QuadraticSystem::new(vec![5.0, 5.0])
            .unwrap()
            .with_pair_coupling(0, 1, 4.0.into());
        let model = LindbladModel::closed(sys);
        let rep = FockRep::new(&model, &[2, 2]).unwrap();
        let rho0 = DensityMatrix::coherent(&rep, &[c(0.3, 0.0), c(0.3, 0.0)]).unwrap();
        let err = evolve(&rep, &rho0, 3.0, 0.01).unwrap_err();
        assert!(matches!(err, FockError::Truncation(_)));
    }

    #[test]
    fn guard_rails() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let model = LindbladModel::closed(sys.clone());
        let rep = FockRep::new(&model, &[4]).unwrap();
        let rho0 = DensityMatrix::vacuum(&rep);
        assert!(matches!(
            evolve(&rep, &rho0, 1.0, 1.0),
            Err(FockError::StepTooLarge { .. })
        ));
        assert!(matches!(
            FockRep::new(&model, &[100000]),
            Err(FockError::DimensionTooLarge(_))
        ));
        let framed = LindbladModel::closed(sys).with_frame(vec![2.0]).unwrap();
        assert!(matches!(FockRep::new(&framed, &[4]), Err(FockError::UnsupportedFrame)));
    }

    #[test]
    fn density_matrix_validation() {
        let sys = QuadraticSystem::new(vec![5.0]).unwrap();
        let rep = FockRep::new(&LindbladModel::closed(sys), &[3]).unwrap();
        let ok = DensityMatrix::coherent(&rep, &[c(0.2, 0.0)]).unwrap();
        assert!(DensityMatrix::new(ok.rho.clone()).is_ok());
        let bad = ok.rho.mapv(|x| x * 2.0);
        assert!(DensityMatrix::new(bad).is_err());
    }
}
