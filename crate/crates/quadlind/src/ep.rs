//! Eigen-analysis of effective Hamiltonians: spectral classification,
//! exceptional-point detection along parameter sweeps, and the closed-form
//! EP conditions for the balanced three-mode chain.
//!
//! An exceptional point is flagged where the minimal eigenvalue gap has a
//! local minimum on the grid *and* two right eigenvectors become (nearly)
//! parallel — both eigenvalues and eigenstates must coalesce.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::moments::EffectiveHamiltonian;

/// Relative tolerance for spectral symmetry classification.
const CLASS_TOL: f64 = 1e-9;
/// Eigenvector-overlap threshold above which a gap minimum is a candidate EP.
const COALESCENCE_THRESHOLD: f64 = 0.999;
/// Discriminant residual target (relative to scale^2) for 2x2 refinement.
const DISC_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EpError {
    #[error("a scan needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("scan range is empty or not finite")]
    BadRange,
}

/// Symmetry class of a spectrum, tested in this order of precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// All eigenvalues real (unbroken PT-like phase).
    RealSpectrum,
    /// All eigenvalues purely imaginary (unbroken anti-PT-like phase).
    ImaginarySpectrum,
    /// Spectrum closed under complex conjugation.
    ConjugatePairs,
    /// Spectrum closed under negated conjugation (E -> -E*).
    AntiConjugatePairs,
    Generic,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::RealSpectrum => "real_spectrum",
            Classification::ImaginarySpectrum => "imaginary_spectrum",
            Classification::ConjugatePairs => "conjugate_pairs",
            Classification::AntiConjugatePairs => "anti_conjugate_pairs",
            Classification::Generic => "generic",
        }
    }
}

/// Eigen-data of one effective Hamiltonian, tagged with the parameter value
/// it was generated at (0 for a standalone analysis).
#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub param_value: f64,
    pub eigenvalues: Vec<Complex64>,
    /// Minimal pairwise eigenvalue distance (infinite for a single mode).
    pub min_gap: f64,
    /// Largest normalized right-eigenvector overlap over pairs, in [0, 1].
    pub coalescence: f64,
    pub classification: Classification,
}

/// A detected exceptional point on a parameter sweep.
#[derive(Debug, Clone)]
pub struct EPReport {
    pub location: f64,
    /// Whether root refinement met its residual target.
    pub refined: bool,
    /// |discriminant| at the refined location (2x2), or the coalescence
    /// objective min_gap * (1 - coalescence) for larger matrices.
    pub discriminant_residual: f64,
    /// Spectral class just below / above the EP.
    pub symmetry_side_low: Classification,
    pub symmetry_side_high: Classification,
}

fn classify(eigs: &[Complex64]) -> Classification {
    let scale = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max).max(1e-300);
    let tol = CLASS_TOL * scale;
    if eigs.iter().all(|e| e.im.abs() < tol) {
        return Classification::RealSpectrum;
    }
    if eigs.iter().all(|e| e.re.abs() < tol) {
        return Classification::ImaginarySpectrum;
    }
    let closed_under = |map: &dyn Fn(Complex64) -> Complex64| -> bool {
        let mut used = vec![false; eigs.len()];
        'outer: for &e in eigs {
            let target = map(e);
            for (j, &f) in eigs.iter().enumerate() {
                if !used[j] && (f - target).norm() < tol {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    };
    if closed_under(&|e: Complex64| e.conj()) {
        return Classification::ConjugatePairs;
    }
    if closed_under(&|e: Complex64| -e.conj()) {
        return Classification::AntiConjugatePairs;
    }
    Classification::Generic
}

fn spectrum_at(param: f64, h: &EffectiveHamiltonian) -> SpectrumPoint {
    let (vals, vecs) = linalg::eig(&h.h);
    let eigs: Vec<Complex64> = vals.to_vec();
    let n = eigs.len();
    let mut min_gap = f64::INFINITY;
    let mut coalescence: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((eigs[i] - eigs[j]).norm());
            let vi = vecs.column(i);
            let vj = vecs.column(j);
            let mut dot = Complex64::new(0.0, 0.0);
            let mut ni = 0.0;
            let mut nj = 0.0;
            for k in 0..n {
                dot += vi[k].conj() * vj[k];
                ni += vi[k].norm_sqr();
                nj += vj[k].norm_sqr();
            }
            let overlap = dot.norm() / (ni.sqrt() * nj.sqrt());
            coalescence = coalescence.max(overlap.min(1.0));
        }
    }
    SpectrumPoint {
        param_value: param,
        eigenvalues: eigs.clone(),
        min_gap,
        coalescence,
        classification: classify(&eigs),
    }
}

/// Eigenvalues, gap, coalescence, and symmetry class of one Hamiltonian.
pub fn spectrum(h: &EffectiveHamiltonian) -> SpectrumPoint {
    spectrum_at(0.0, h)
}

/// 2x2 discriminant D = ((h11 - h22)/2)^2 + h12 h21; the eigenvalue
/// splitting is 2 sqrt(D), so an EP is a root of D.
fn discriminant(h: &EffectiveHamiltonian) -> Complex64 {
    let m = &h.h;
    let half_diff = (m[[0, 0]] - m[[1, 1]]) / 2.0;
    half_diff * half_diff + m[[0, 1]] * m[[1, 0]]
}

/// Golden-section minimization of a non-negative objective on [a, b].
fn golden_min(mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Sweep a one-parameter family, flag candidate EPs (gap local minimum with
/// eigenvector coalescence above threshold), and refine each candidate —
/// by discriminant root-finding for 2x2 families, by minimizing
/// min_gap * (1 - coalescence) otherwise. Refinement failure is reported
/// through `refined: false`, never as an error.
pub fn ep_scan<F>(
    family: F,
    range: (f64, f64),
    n_points: usize,
) -> Result<(Vec<SpectrumPoint>, Vec<EPReport>), EpError>
where
    F: Fn(f64) -> EffectiveHamiltonian,
{
    if n_points < 3 {
        return Err(EpError::TooFewPoints(n_points));
    }
    let (lo, hi) = range;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(EpError::BadRange);
    }
    let params: Vec<f64> = (0..n_points)
        .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
        .collect();
    let points: Vec<SpectrumPoint> =
        params.iter().map(|&p| spectrum_at(p, &family(p))).collect();

    let mut reports = Vec::new();
    let mut i = 1;
    while i + 1 < n_points {
        let is_min = points[i].min_gap <= points[i - 1].min_gap
            && points[i].min_gap <= points[i + 1].min_gap;
        if !(is_min && points[i].coalescence > COALESCENCE_THRESHOLD) {
            i += 1;
            continue;
        }
        // Skip over a flat plateau of equal gaps so one EP yields one report.
        let mut j = i;
        while j + 1 < n_points - 1
            && points[j + 1].min_gap == points[i].min_gap
            && points[j + 1].coalescence > COALESCENCE_THRESHOLD
        {
            j += 1;
        }
        let bracket = (params[i - 1], params[j + 1]);
        let n_dim = points[i].eigenvalues.len();
        let scale = linalg::max_abs(&family(params[i]).h).max(1e-300);
        let report = if n_dim == 2 {
            let obj = |p: f64| discriminant(&family(p)).norm();
            let (loc, residual) = golden_min(bracket.0, bracket.1, &obj);
            EPReport {
                location: loc,
                refined: residual < DISC_TOL * scale * scale,
                discriminant_residual: residual,
                symmetry_side_low: points[i - 1].classification,
                symmetry_side_high: points[j + 1].classification,
            }
        } else {
            let obj = |p: f64| {
                let sp = spectrum_at(p, &family(p));
                sp.min_gap * (1.0 - sp.coalescence)
            };
            let (loc, residual) = golden_min(bracket.0, bracket.1, &obj);
            EPReport {
                location: loc,
                refined: residual < 1e-9 * scale,
                discriminant_residual: residual,
                symmetry_side_low: points[i - 1].classification,
                symmetry_side_high: points[j + 1].classification,
            }
        };
        reports.push(report);
        i = j + 2;
    }
    Ok((points, reports))
}

/// Residuals of the closed-form EP conditions for the balanced detuned
/// chain (outer detunings +d and -d, coupling g to the center mode, modal
/// decay rates gamma1 on the outer dressed pair and gamma3 on the center):
///
///   kappa = d^2 (g^2 + gamma1 gamma3) + g^2 (2 g^2 + gamma1^2 + gamma1 gamma3)
///   chi   = g^2 (dg^2 + gamma1^2 - gamma1 gamma3),     dg^2 = d^2 + 2 g^2
///
/// The reduced pair Hamiltonian is [[P - i kappa, -i chi], [-i chi,
/// -P - i kappa]] / (d^2 gamma3 + 2 gamma1 g^2) with P = gamma3 d dg^2, so
/// the anti-PT EP sits at |chi| = P (`anti_pt_residual = 0`) and a real
/// (PT) spectrum additionally needs kappa = 0 (`pt_residual = 0`).
#[derive(Debug, Clone, Copy)]
pub struct EpConditions {
    pub anti_pt_residual: f64,
    pub pt_residual: f64,
}

pub fn ep_conditions_three_mode(
    g: f64,
    delta_prime: f64,
    gamma1: f64,
    gamma3: f64,
) -> EpConditions {
    let dg2 = delta_prime * delta_prime + 2.0 * g * g;
    let chi = g * g * (dg2 + gamma1 * gamma1 - gamma1 * gamma3);
    let kappa = delta_prime * delta_prime * (g * g + gamma1 * gamma3)
        + g * g * (2.0 * g * g + gamma1 * gamma1 + gamma1 * gamma3);
    EpConditions {
        anti_pt_residual: chi.abs() - gamma3 * delta_prime * dg2,
        pt_residual: kappa,
    }
}

/// The reduced pair Hamiltonian of the balanced chain in the modal-rate
/// idealization (useful as an analytic scan family).
pub fn three_mode_pair_hamiltonian(
    g: f64,
    delta_prime: f64,
    gamma1: f64,
    gamma3: f64,
) -> EffectiveHamiltonian {
    let dp = delta_prime;
    let dg2 = dp * dp + 2.0 * g * g;
    let den = dp * dp * gamma3 + 2.0 * gamma1 * g * g;
    let p = gamma3 * dp * dg2 / den;
    let kappa = (dp * dp * (g * g + gamma1 * gamma3)
        + g * g * (2.0 * g * g + gamma1 * gamma1 + gamma1 * gamma3))
        / den;
    let chi = g * g * (dg2 + gamma1 * gamma1 - gamma1 * gamma3) / den;
    EffectiveHamiltonian::from_matrix(ndarray::array![
        [Complex64::new(p, -kappa), Complex64::new(0.0, -chi)],
        [Complex64::new(0.0, -chi), Complex64::new(-p, -kappa)],
    ])
}
