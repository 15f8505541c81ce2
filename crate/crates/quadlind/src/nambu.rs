//! Nambu-space representation of quadratic bosonic Hamiltonians and their
//! Hopfield-Bogoliubov diagonalization.
//!
//! A quadratic Hamiltonian over N modes,
//!
//!   H = sum_n [ omega_n a_n† a_n + (chi_n/2 a_n†a_n† + h.c.) ]
//!     + sum_{i<j} [ (lambda_ij a_i† a_j + h.c.) + (g_ij a_i† a_j† + h.c.) ],
//!
//! acts linearly on the Nambu vector x = (a_1..a_N, a_1†..a_N†):
//! [x, H] = K x. The Hopfield-Bogoliubov matrix stored here is M = K†,
//! written in the conventional block form [[A, -B], [B*, -A*]]. Dressed
//! modes b = T x are eigenoperators of H; the rows of T are the
//! (conjugated) positive-symplectic-norm eigenvectors of M, so that
//! T K T^-1 = diag(Omega, -Omega).

use ndarray::{s, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::{CMat, CVec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum NambuError {
    #[error("invalid quadratic system: {0}")]
    InvalidSystem(String),
    #[error("system outside the stable normal phase: {0}")]
    Instability(String),
    #[error("Bogoliubov transformation singular: eigenvector symplectic norm {0:.3e} below threshold")]
    DegenerateNorm(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// N coupled bosonic modes with rotating-wave couplings `lambda`,
/// counterrotating (pairing) couplings `g` and two-photon drives `chi`.
///
/// `lambda[i][j]` (i < j) multiplies a_i† a_j; `g[i][j]` (i < j) multiplies
/// a_i† a_j†; `chi[n]` multiplies a_n† a_n† / 2. Lower triangles and
/// diagonals of `lambda`/`g` must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSystem {
    pub n_modes: usize,
    pub omega: Vec<f64>,
    pub chi: Vec<Complex64>,
    pub lambda: CMat,
    pub g: CMat,
}

impl QuadraticSystem {
    pub fn new(omega: Vec<f64>) -> Result<Self, NambuError> {
        let n = omega.len();
        if n == 0 {
            return Err(NambuError::InvalidSystem("need at least one mode".into()));
        }
        Ok(Self {
            n_modes: n,
            omega,
            chi: vec![ZERO; n],
            lambda: Array2::zeros((n, n)),
            g: Array2::zeros((n, n)),
        })
    }

    /// Rotating-wave coupling lambda_ij a_i† a_j + h.c. (requires i < j).
    pub fn with_coupling(mut self, i: usize, j: usize, lambda: Complex64) -> Self {
        assert!(i < j && j < self.n_modes, "couplings are upper-triangular");
        self.lambda[[i, j]] = lambda;
        self
    }

    /// Counterrotating coupling g_ij a_i† a_j† + h.c. (requires i < j).
    pub fn with_pair_coupling(mut self, i: usize, j: usize, g: Complex64) -> Self {
        assert!(i < j && j < self.n_modes, "couplings are upper-triangular");
        self.g[[i, j]] = g;
        self
    }

    /// Two-photon drive chi_n/2 a_n† a_n† + h.c.
    pub fn with_two_photon(mut self, n: usize, chi: Complex64) -> Self {
        assert!(n < self.n_modes);
        self.chi[n] = chi;
        self
    }

    pub fn validate(&self) -> Result<(), NambuError> {
        let n = self.n_modes;
        if self.omega.len() != n || self.chi.len() != n {
            return Err(NambuError::InvalidSystem("array lengths inconsistent with n_modes".into()));
        }
        if self.lambda.dim() != (n, n) || self.g.dim() != (n, n) {
            return Err(NambuError::InvalidSystem("coupling matrices must be N x N".into()));
        }
        for i in 0..n {
            for j in 0..=i {
                if self.lambda[[i, j]] != ZERO || self.g[[i, j]] != ZERO {
                    return Err(NambuError::InvalidSystem(
                        "lambda and g must be strictly upper-triangular".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The Hopfield-Bogoliubov matrix M = [[A, -B], [B*, -A*]].
#[derive(Debug, Clone)]
pub struct HBMatrix {
    pub m: CMat,
}

impl HBMatrix {
    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    /// Commutator matrix K with [x, H] = K x; equals Sigma M Sigma = M†.
    pub fn commutator(&self) -> CMat {
        let n = self.n_modes();
        let mut k = self.m.clone();
        k.slice_mut(s![..n, n..]).mapv_inplace(|x| -x);
        k.slice_mut(s![n.., ..n]).mapv_inplace(|x| -x);
        k
    }
}

/// Assemble the HB matrix of a quadratic system.
pub fn build_hb_matrix(sys: &QuadraticSystem) -> HBMatrix {
    let n = sys.n_modes;
    let mut a: CMat = Array2::zeros((n, n));
    let mut b: CMat = Array2::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = sys.omega[i].into();
        b[[i, i]] = sys.chi[i];
        for j in (i + 1)..n {
            a[[i, j]] = sys.lambda[[i, j]];
            a[[j, i]] = sys.lambda[[i, j]].conj();
            b[[i, j]] = sys.g[[i, j]];
            b[[j, i]] = sys.g[[i, j]];
        }
    }
    let mut m: CMat = Array2::zeros((2 * n, 2 * n));
    m.slice_mut(s![..n, ..n]).assign(&a);
    m.slice_mut(s![..n, n..]).assign(&b.mapv(|x| -x));
    m.slice_mut(s![n.., ..n]).assign(&b.mapv(|x| x.conj()));
    m.slice_mut(s![n.., n..]).assign(&a.mapv(|x| -x.conj()));
    HBMatrix { m }
}

/// Canonical Bogoliubov transformation b = T a for a stable system.
#[derive(Debug, Clone)]
pub struct BogoliubovTransform {
    /// 2N x 2N canonical matrix with block structure [[mu, nu], [nu*, mu*]].
    pub t: CMat,
    pub t_inv: CMat,
    /// Dressed frequencies, sorted descending.
    pub dressed_freq: Vec<f64>,
    /// Ground-state energy shift, (1/2) sum_n (Omega_n - omega_n).
    pub ground_shift: f64,
}

const STABILITY_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-9;

/// Linear combination of mode operators, sum_i (u_i a_i + w_i a_i†),
/// stored as the length-2N coefficient vector (u, w).
#[derive(Debug, Clone, PartialEq)]
pub struct NambuVector {
    pub coeffs: CVec,
}

impl NambuVector {
    pub fn new(coeffs: CVec) -> Self {
        assert!(coeffs.len() % 2 == 0, "Nambu vectors have even length");
        Self { coeffs }
    }

    /// The bare annihilation operator a_i of an N-mode system.
    pub fn annihilation(i: usize, n_modes: usize) -> Self {
        let mut c = CVec::zeros(2 * n_modes);
        c[i] = 1.0.into();
        Self { coeffs: c }
    }

    /// The bare creation operator a_i† of an N-mode system.
    pub fn creation(i: usize, n_modes: usize) -> Self {
        let mut c = CVec::zeros(2 * n_modes);
        c[i + n_modes] = 1.0.into();
        Self { coeffs: c }
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Coefficients of the Hermitian conjugate operator.
    pub fn dagger(&self) -> Self {
        let n = self.n_modes();
        let mut c = CVec::zeros(2 * n);
        for i in 0..n {
            c[i] = self.coeffs[i + n].conj();
            c[i + n] = self.coeffs[i].conj();
        }
        Self { coeffs: c }
    }
}

/// Symplectic norm sum_{i<N} |v_i|^2 - sum_{i>=N} |v_i|^2.
fn symplectic_norm(v: &CVec) -> f64 {
    let n = v.len() / 2;
    let pos: f64 = v.iter().take(n).map(|c| c.norm_sqr()).sum();
    let neg: f64 = v.iter().skip(n).map(|c| c.norm_sqr()).sum();
    pos - neg
}

/// Indefinite inner product <u, w> = sum_i sigma_i u_i conj(w_i) with
/// sigma = (+1 on the annihilation half, -1 on the creation half).
fn symplectic_dot(u: &CVec, w: &CVec) -> Complex64 {
    let n = u.len() / 2;
    let mut acc = ZERO;
    for i in 0..u.len() {
        let sign = if i < n { 1.0 } else { -1.0 };
        acc += sign * u[i] * w[i].conj();
    }
    acc
}

/// Diagonalize a stable quadratic system into dressed modes.
pub fn diagonalize(sys: &QuadraticSystem) -> Result<BogoliubovTransform, NambuError> {
    sys.validate()?;
    let n = sys.n_modes;
    let hb = build_hb_matrix(sys);
    let scale = linalg::frobenius(&hb.m);
    let (vals, vecs) = linalg::eig(&hb.m);

    for v in vals.iter() {
        if v.im.abs() > STABILITY_TOL * scale {
            return Err(NambuError::Instability(format!(
                "HB eigenvalue {v} has a non-negligible imaginary part"
            )));
        }
    }

    // Select positive-frequency, positive-symplectic-norm eigenvectors.
    let mut selected: Vec<(f64, CVec)> = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        if v.re <= STABILITY_TOL * scale {
            continue;
        }
        let col: CVec = vecs.column(k).to_owned();
        let sn = symplectic_norm(&col);
        if sn > 0.0 {
            if sn < NORM_TOL {
                return Err(NambuError::DegenerateNorm(sn));
            }
            // rows of T carry the conjugated eigenvector
            selected.push((v.re, col.mapv(|c| c.conj())));
        }
    }
    if selected.len() != n {
        return Err(NambuError::Instability(format!(
            "found {} positive-norm positive-frequency eigenvectors, expected {n} \
             (zero or negative dressed frequencies present)",
            selected.len()
        )));
    }
    selected.sort_by(|a, b| b.0.total_cmp(&a.0));
    let max_freq = selected[0].0;

    // Group degenerate eigenspaces and orthonormalize each with respect to
    // the symplectic inner product. Seeds ordered by descending magnitude of
    // the first nonzero entry for a reproducible basis.
    let mut rows: Vec<(f64, CVec)> = Vec::new();
    let mut idx = 0;
    while idx < selected.len() {
        let mut cluster: Vec<(f64, CVec)> = vec![selected[idx].clone()];
        let mut stop = idx + 1;
        while stop < selected.len() && (selected[idx].0 - selected[stop].0).abs() < STABILITY_TOL * max_freq {
            cluster.push(selected[stop].clone());
            stop += 1;
        }
        if cluster.len() > 1 {
            cluster.sort_by(|a, b| {
                let fa = a.1.iter().find(|c| c.norm() > 1e-12).map_or(0.0, |c| c.norm());
                let fb = b.1.iter().find(|c| c.norm() > 1e-12).map_or(0.0, |c| c.norm());
                fb.total_cmp(&fa)
            });
        }
        let mut basis: Vec<CVec> = Vec::new();
        for (_, v) in &cluster {
            let mut u = v.clone();
            for b in &basis {
                let proj = symplectic_dot(&u, b);
                u = &u - &b.mapv(|c| c * proj);
            }
            let sn = symplectic_norm(&u);
            if sn < NORM_TOL {
                return Err(NambuError::DegenerateNorm(sn));
            }
            u.mapv_inplace(|c| c / sn.sqrt());
            basis.push(u);
        }
        for (i, u) in basis.into_iter().enumerate() {
            rows.push((cluster[i].0, u));
        }
        idx = stop;
    }

    // Phase convention: largest-magnitude entry of the mu block real positive.
    for (_, u) in rows.iter_mut() {
        let mut best = 0;
        for i in 1..n {
            if u[i].norm() > u[best].norm() {
                best = i;
            }
        }
        let phase = u[best] / u[best].norm();
        if u[best].norm() > 0.0 {
            u.mapv_inplace(|c| c / phase);
        }
    }

    let mut t: CMat = Array2::zeros((2 * n, 2 * n));
    for (k, (_, u)) in rows.iter().enumerate() {
        for i in 0..2 * n {
            t[[k, i]] = u[i];
        }
        // partner row for b_k†: (nu*, mu*)
        for i in 0..n {
            t[[k + n, i]] = u[i + n].conj();
            t[[k + n, i + n]] = u[i].conj();
        }
    }

    // Symplectic inverse T^-1 = Sigma T† Sigma.
    let mut t_inv: CMat = t.t().mapv(|c| c.conj());
    for i in 0..2 * n {
        for j in 0..2 * n {
            let sign = if (i < n) == (j < n) { 1.0 } else { -1.0 };
            t_inv[[i, j]] *= sign;
        }
    }

    let resid = linalg::max_abs(&(t.dot(&t_inv) - Array2::<Complex64>::eye(2 * n)));
    if resid > 1e-10 * linalg::frobenius(&t).max(1.0) {
        return Err(NambuError::Instability(format!(
            "canonical transform failed the inverse check (residual {resid:.3e})"
        )));
    }

    let dressed_freq: Vec<f64> = rows.iter().map(|(w, _)| *w).collect();
    let ground_shift = 0.5
        * (dressed_freq.iter().sum::<f64>() - sys.omega.iter().sum::<f64>());

    Ok(BogoliubovTransform { t, t_inv, dressed_freq, ground_shift })
}

impl BogoliubovTransform {
    pub fn n_modes(&self) -> usize {
        self.t.nrows() / 2
    }

    /// The dressed mode b_k as a Nambu vector in the bare basis.
    pub fn dressed_mode(&self, k: usize) -> NambuVector {
        NambuVector::new(self.t.row(k).to_owned())
    }

    /// b_k† in the bare basis.
    pub fn dressed_mode_dagger(&self, k: usize) -> NambuVector {
        NambuVector::new(self.t.row(k + self.n_modes()).to_owned())
    }
}

/// Coupling weights phi_{n,k} of bare mode n onto the dressed modes:
/// phi_{n,k} = (T^-1)_{n,k} + conj((T^-1)_{n,k+N}).
pub fn phi_coefficients(bt: &BogoliubovTransform, n: usize) -> Result<Vec<Complex64>, NambuError> {
    let nm = bt.n_modes();
    if n >= nm {
        return Err(NambuError::Dimension { expected: nm, got: n });
    }
    Ok((0..nm)
        .map(|k| bt.t_inv[[n, k]] + bt.t_inv[[n, k + nm]].conj())
        .collect())
}

/// Re-express an operator's coefficient vector in the dressed basis:
/// O = c^T a = (T^-T c)^T b.
pub fn expectation_frame_change(
    bt: &BogoliubovTransform,
    v: &NambuVector,
) -> Result<NambuVector, NambuError> {
    let nm = bt.n_modes();
    if v.coeffs.len() != 2 * nm {
        return Err(NambuError::Dimension { expected: 2 * nm, got: v.coeffs.len() });
    }
    Ok(NambuVector::new(bt.t_inv.t().dot(&v.coeffs)))
}

/// Inverse of [`expectation_frame_change`]: dressed coefficients back to bare.
pub fn expectation_frame_change_inv(
    bt: &BogoliubovTransform,
    v: &NambuVector,
) -> Result<NambuVector, NambuError> {
    let nm = bt.n_modes();
    if v.coeffs.len() != 2 * nm {
        return Err(NambuError::Dimension { expected: 2 * nm, got: v.coeffs.len() });
    }
    Ok(NambuVector::new(bt.t.t().dot(&v.coeffs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn beamsplitter(omega: f64, g: f64) -> QuadraticSystem {
        QuadraticSystem::new(vec![omega, omega])
            .unwrap()
            .with_coupling(0, 1, g.into())
    }

    fn pairing(omega: f64, g: f64) -> QuadraticSystem {
        QuadraticSystem::new(vec![omega, omega])
            .unwrap()
            .with_pair_coupling(0, 1, g.into())
    }

    #[test]
    fn hb_matrix_beamsplitter() {
        let sys = beamsplitter(5.0, 1.0);
        let m = build_hb_matrix(&sys).m;
        let expect = array![
            [c(5., 0.), c(1., 0.), c(0., 0.), c(0., 0.)],
            [c(1., 0.), c(5., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(-5., 0.), c(-1., 0.)],
            [c(0., 0.), c(0., 0.), c(-1., 0.), c(-5., 0.)],
        ];
        assert!(linalg::max_abs(&(m - expect)) < 1e-15);
    }

    #[test]
    fn hb_matrix_single_mode() {
        let sys = QuadraticSystem::new(vec![3.0]).unwrap();
        let m = build_hb_matrix(&sys).m;
        assert!((m[[0, 0]] - c(3., 0.)).norm() < 1e-15);
        assert!((m[[1, 1]] - c(-3., 0.)).norm() < 1e-15);
        assert!(m[[0, 1]].norm() + m[[1, 0]].norm() < 1e-15);
    }

    #[test]
    fn hb_matrix_pairing() {
        let sys = pairing(5.0, 3.0);
        let m = build_hb_matrix(&sys).m;
        let expect = array![
            [c(5., 0.), c(0., 0.), c(0., 0.), c(-3., 0.)],
            [c(0., 0.), c(5., 0.), c(-3., 0.), c(0., 0.)],
            [c(0., 0.), c(3., 0.), c(-5., 0.), c(0., 0.)],
            [c(3., 0.), c(0., 0.), c(0., 0.), c(-5., 0.)],
        ];
        assert!(linalg::max_abs(&(m - expect)) < 1e-15);
    }

    #[test]
    fn beamsplitter_dressed_modes() {
        let bt = diagonalize(&beamsplitter(5.0, 1.0)).unwrap();
        assert!((bt.dressed_freq[0] - 6.0).abs() < 1e-12);
        assert!((bt.dressed_freq[1] - 4.0).abs() < 1e-12);
        assert!(bt.ground_shift.abs() < 1e-12);
        // b1 = (a1 + a2)/sqrt(2), b2 = (a1 - a2)/sqrt(2) up to global phase
        let r = 1.0 / 2f64.sqrt();
        let b1 = bt.dressed_mode(0);
        assert!((b1.coeffs[0] - c(r, 0.)).norm() < 1e-12);
        assert!((b1.coeffs[1] - c(r, 0.)).norm() < 1e-12);
        let b2 = bt.dressed_mode(1);
        assert!((b2.coeffs[0].norm() - r).abs() < 1e-12);
        assert!((b2.coeffs[0] + b2.coeffs[1]).norm() < 1e-12);
    }

    #[test]
    fn pairing_dressed_modes_match_closed_form() {
        let bt = diagonalize(&pairing(5.0, 3.0)).unwrap();
        assert!((bt.dressed_freq[0] - 4.0).abs() < 1e-12);
        assert!((bt.dressed_freq[1] - 4.0).abs() < 1e-12);
        let w_plus = (9.0f64 / 8.0).sqrt();
        let w_minus = -(1.0f64 / 8.0).sqrt();
        assert!((w_plus - 1.06066).abs() < 1e-5);
        assert!((w_minus + 0.35355).abs() < 1e-5);
        // each dressed mode has |mu| = W+ on one bare mode and |nu| = |W-|
        // on the other
        for k in 0..2 {
            let b = bt.dressed_mode(k);
            let mu_max = b.coeffs[0].norm().max(b.coeffs[1].norm());
            let nu_max = b.coeffs[2].norm().max(b.coeffs[3].norm());
            assert!((mu_max - w_plus).abs() < 1e-12);
            assert!((nu_max - w_minus.abs()).abs() < 1e-12);
        }
        assert!((bt.ground_shift - (4.0 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn pairing_instability_rejected() {
        let err = diagonalize(&pairing(5.0, 6.0)).unwrap_err();
        assert!(matches!(err, NambuError::Instability(_)));
    }

    #[test]
    fn phi_coefficients_cases() {
        // uncoupled single mode: identity transform
        let bt = diagonalize(&QuadraticSystem::new(vec![3.0]).unwrap()).unwrap();
        let phi = phi_coefficients(&bt, 0).unwrap();
        assert!((phi[0] - c(1., 0.)).norm() < 1e-12);

        // resonant beamsplitter: equal weights 1/sqrt(2)
        let bt = diagonalize(&beamsplitter(5.0, 1.0)).unwrap();
        let phi = phi_coefficients(&bt, 0).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((phi[0].norm() - r).abs() < 1e-12);
        assert!((phi[1].norm() - r).abs() < 1e-12);

        // pairing case: phi_{1,.} = (W+, W-) in the canonical basis, so the
        // magnitudes are {W+, |W-|} and the sum is W+ + W-
        let bt = diagonalize(&pairing(5.0, 3.0)).unwrap();
        let phi = phi_coefficients(&bt, 0).unwrap();
        let w_plus = (9.0f64 / 8.0).sqrt();
        let w_minus = -(1.0f64 / 8.0).sqrt();
        let mut mags: Vec<f64> = phi.iter().map(|p| p.norm()).collect();
        mags.sort_by(f64::total_cmp);
        assert!((mags[1] - w_plus).abs() < 1e-12);
        assert!((mags[0] - w_minus.abs()).abs() < 1e-12);
        let sum: Complex64 = phi.iter().sum();
        assert!((sum - c(w_plus + w_minus, 0.)).norm() < 1e-12, "phi sum {sum}");
        assert!((w_plus + w_minus - 0.70711).abs() < 1e-5);

        assert!(phi_coefficients(&bt, 5).is_err());
    }

    #[test]
    fn diagonalizes_commutator_matrix() {
        for sys in [beamsplitter(5.0, 1.0), pairing(5.0, 3.0)] {
            let bt = diagonalize(&sys).unwrap();
            let k = build_hb_matrix(&sys).commutator();
            let d = bt.t.dot(&k).dot(&bt.t_inv);
            let n = sys.n_modes;
            for i in 0..2 * n {
                for j in 0..2 * n {
                    if i == j {
                        let expect = if i < n { bt.dressed_freq[i] } else { -bt.dressed_freq[i - n] };
                        assert!((d[[i, j]] - c(expect, 0.)).norm() < 1e-9);
                    } else {
                        assert!(d[[i, j]].norm() < 1e-9, "off-diagonal leak at ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn frame_change_roundtrip_and_beamsplitter() {
        let bt = diagonalize(&beamsplitter(5.0, 1.0)).unwrap();
        // a1 maps to (b1 + b2)/sqrt(2)
        let v = NambuVector::annihilation(0, 2);
        let d = expectation_frame_change(&bt, &v).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((d.coeffs[0].norm() - r).abs() < 1e-12);
        assert!((d.coeffs[1].norm() - r).abs() < 1e-12);
        // round trip
        let back = expectation_frame_change_inv(&bt, &d).unwrap();
        for i in 0..4 {
            assert!((back.coeffs[i] - v.coeffs[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn dagger_swaps_blocks() {
        let v = NambuVector::new(array![c(1., 2.), c(0., 0.), c(3., -1.), c(0., 0.)]);
        let d = v.dagger();
        assert_eq!(d.coeffs[0], c(3., 1.));
        assert_eq!(d.coeffs[2], c(1., -2.));
    }
}
