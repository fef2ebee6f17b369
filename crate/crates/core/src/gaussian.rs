//! Two-mode Gaussian state algebra.
//!
//! Quadratures are ordered `(q_A, p_A, q_B, p_B)` and normalised so that the
//! vacuum has unit variance. A covariance matrix `M` is physical when it is
//! symmetric positive definite and `M + iΩ ≥ 0`, equivalently when both of
//! its symplectic eigenvalues are at least one.

use crate::math::{log2, sinh, sqrt, acosh, cosh};
use crate::{Error, Result, TOL_NUM, TOL_PHYS};

pub type Matrix4 = [[f64; 4]; 4];

/// The two-mode symplectic form `Ω = ω ⊕ ω`, `ω = [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm {
    omega: Matrix4,
}

impl SymplecticForm {
    pub fn two_mode() -> Self {
        let mut omega = [[0.0; 4]; 4];
        for k in [0, 2] {
            omega[k][k + 1] = 1.0;
            omega[k + 1][k] = -1.0;
        }
        SymplecticForm { omega }
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.omega
    }
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self::two_mode()
    }
}

/// Two-mode squeezing `r` together with the quadrature variance
/// `v = cosh(2r)` of each half of the squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    r: f64,
    v: f64,
    // sqrt(v^2 - 1), kept separately so small r does not cancel.
    s: f64,
}

impl Squeezing {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::domain("r", r, "finite r >= 0"));
        }
        Ok(Squeezing {
            r,
            v: cosh(2.0 * r),
            s: sinh(2.0 * r),
        })
    }

    /// Builds the squeezing that produces local variance `v`.
    pub fn from_variance(v: f64) -> Result<Self> {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::domain("v", v, "finite v >= 1"));
        }
        Ok(Squeezing {
            r: 0.5 * acosh(v),
            v,
            s: sqrt((v - 1.0) * (v + 1.0)),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// `sqrt(v² − 1) = sinh(2r)`.
    pub fn correlation(&self) -> f64 {
        self.s
    }
}

/// Determinants of the 2×2 blocks `A`, `B`, `C` of `[[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDeterminants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A physical two-mode covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM {
    m: Matrix4,
}

impl TwoModeCM {
    /// Validates symmetry, positive definiteness and the uncertainty
    /// principle (to [`TOL_PHYS`]).
    pub fn new(m: Matrix4) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::numerical("covariance matrix entry", f64::NAN));
        }
        let scale = m.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        for i in 0..4 {
            for j in (i + 1)..4 {
                let gap = (m[i][j] - m[j][i]).abs();
                if gap > 1e-12 * scale {
                    return Err(Error::Unphysical {
                        reason: "asymmetric entries",
                        value: gap,
                    });
                }
            }
        }
        let cm = TwoModeCM { m };
        cm.check_physical(TOL_PHYS)?;
        Ok(cm)
    }

    /// Skips validation; callers guarantee the result of a physical map.
    pub(crate) fn from_raw(m: Matrix4) -> Self {
        TwoModeCM { m }
    }

    /// Builds `[[aI, C], [C, bI]]` with `C = diag(c_plus, c_minus)`.
    pub fn from_standard_form(a: f64, b: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        Self::new(standard_matrix(a, b, c_plus, c_minus))
    }

    /// A covariance matrix without `q`–`p` correlations:
    /// `[[a_q, ·, c_q, ·], [·, a_p, ·, c_p], [c_q, ·, b_q, ·], [·, c_p, ·, b_p]]`.
    pub fn from_quadrature_blocks(
        (a_q, a_p): (f64, f64),
        (b_q, b_p): (f64, f64),
        (c_q, c_p): (f64, f64),
    ) -> Result<Self> {
        Self::new([
            [a_q, 0.0, c_q, 0.0],
            [0.0, a_p, 0.0, c_p],
            [c_q, 0.0, b_q, 0.0],
            [0.0, c_p, 0.0, b_p],
        ])
    }

    pub fn vacuum() -> Self {
        TwoModeCM::from_raw(standard_matrix(1.0, 1.0, 0.0, 0.0))
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn block_determinants(&self) -> BlockDeterminants {
        let m = &self.m;
        BlockDeterminants {
            a: m[0][0] * m[1][1] - m[0][1] * m[1][0],
            b: m[2][2] * m[3][3] - m[2][3] * m[3][2],
            c: m[0][2] * m[1][3] - m[0][3] * m[1][2],
        }
    }

    pub fn determinant(&self) -> f64 {
        det4(self.m)
    }

    /// Symplectic eigenvalues `(ν₋, ν₊)` of the matrix itself.
    pub fn symplectic_spectrum(&self) -> Result<(f64, f64)> {
        let d = self.block_determinants();
        spectrum_from_invariants(d.a + d.b + 2.0 * d.c, self.determinant())
    }

    /// Symplectic eigenvalues `(ν₋, ν₊)` of the partially transposed matrix.
    pub fn pt_symplectic_spectrum(&self) -> Result<(f64, f64)> {
        let d = self.block_determinants();
        spectrum_from_invariants(d.a + d.b - 2.0 * d.c, self.determinant())
    }

    pub fn log_negativity(&self) -> Result<f64> {
        log_negativity(self)
    }

    /// Checks `M > 0` and `ν₋ ≥ 1 − tol`.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        if !is_positive_definite(&self.m) {
            return Err(Error::Unphysical {
                reason: "not positive definite",
                value: self.determinant(),
            });
        }
        // With M > 0, ν₋ ≥ 1 ⇔ (ν₋² − 1)(ν₊² − 1) = 1 + det M − Δ ≥ 0 and
        // Δ = ν₋² + ν₊² ≥ 2. This form stays accurate when ν₋ ≈ ν₊, where
        // the spectrum itself only has half the working precision.
        let d = self.block_determinants();
        let delta = d.a + d.b + 2.0 * d.c;
        let slack = 1.0 + self.determinant() - delta;
        if slack < -tol * delta.max(1.0) || delta < 2.0 * (1.0 - tol) {
            return Err(Error::Unphysical {
                reason: "symplectic eigenvalue below 1",
                value: self.symplectic_spectrum().map_or(f64::NAN, |s| s.0),
            });
        }
        Ok(())
    }

    /// Extracts `(a, b, c₊, c₋)` if the matrix already has the standard
    /// form `[[aI, diag(c₊, c₋)], [diag(c₊, c₋), bI]]`.
    pub fn standard_form(&self) -> Result<StandardFormCM> {
        let m = &self.m;
        let scale = m.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        let tol = 1e-12 * scale;
        let off = [m[0][1], m[0][3], m[1][2], m[2][3]];
        let worst = off
            .iter()
            .copied()
            .chain([m[0][0] - m[1][1], m[2][2] - m[3][3]])
            .fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if worst > tol {
            return Err(Error::numerical("standard form mismatch", worst));
        }
        Ok(StandardFormCM {
            a: m[0][0],
            b: m[2][2],
            c_plus: m[0][2],
            c_minus: m[1][3],
        })
    }

    /// Largest element-wise absolute difference.
    pub fn max_abs_diff(&self, other: &TwoModeCM) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .fold(0.0, |acc, (x, y)| f64::max(acc, (x - y).abs()))
    }
}

/// The standard form `A = aI`, `B = bI`, `C = diag(c₊, c₋)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardFormCM {
    a: f64,
    b: f64,
    c_plus: f64,
    c_minus: f64,
}

impl StandardFormCM {
    pub fn new(a: f64, b: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        if !(a >= 1.0 - TOL_PHYS && b >= 1.0 - TOL_PHYS) {
            return Err(Error::domain("a, b", a.min(b), "local variances >= 1"));
        }
        TwoModeCM::from_standard_form(a, b, c_plus, c_minus)?;
        Ok(StandardFormCM {
            a,
            b,
            c_plus,
            c_minus,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn to_cm(&self) -> TwoModeCM {
        TwoModeCM::from_raw(standard_matrix(self.a, self.b, self.c_plus, self.c_minus))
    }

    pub fn symplectic_spectrum_pt(&self) -> Result<(f64, f64)> {
        symplectic_spectrum_pt(self)
    }
}

/// Covariance matrix of the two-mode squeezed vacuum,
/// `[[vI, √(v²−1) Z], [√(v²−1) Z, vI]]` with `Z = diag(1, −1)`.
pub fn tmsv_cm(sq: Squeezing) -> TwoModeCM {
    let c = sq.correlation();
    TwoModeCM::from_raw(standard_matrix(sq.v(), sq.v(), c, -c))
}

/// Partially transposed symplectic spectrum of a standard-form matrix:
/// `ν±² = (Δ ± √(Δ² − 4 det M))/2` with `Δ = a² + b² − 2c₊c₋`.
pub fn symplectic_spectrum_pt(cm: &StandardFormCM) -> Result<(f64, f64)> {
    let (a, b) = (cm.a, cm.b);
    let det_c = cm.c_plus * cm.c_minus;
    let delta = a * a + b * b - 2.0 * det_c;
    let det_m = (a * b - cm.c_plus * cm.c_plus) * (a * b - cm.c_minus * cm.c_minus);
    spectrum_from_invariants(delta, det_m)
}

/// `E_LN = max(0, −log₂ ν₋)` of the partial transpose.
pub fn log_negativity(cm: &TwoModeCM) -> Result<f64> {
    let d = cm.block_determinants();
    let delta = d.a + d.b - 2.0 * d.c;
    if 1.0 + cm.determinant() - delta >= 0.0 {
        // ν̃₋ ≥ 1 (the partial transpose of a physical state has ν̃₊ ≥ 1).
        return Ok(0.0);
    }
    let (nu_minus, _) = cm.pt_symplectic_spectrum()?;
    Ok(f64::max(0.0, -log2(nu_minus)))
}

/// Pure-loss channels of transmissivity `eta_a`, `eta_b` on the two modes:
/// `M_kk → η_k M_kk + (1 − η_k) I`, cross block scaled by `√(η_a η_b)`.
pub fn apply_loss(cm: &TwoModeCM, eta_a: f64, eta_b: f64) -> Result<TwoModeCM> {
    check_unit("eta_a", eta_a)?;
    check_unit("eta_b", eta_b)?;
    let amp = [sqrt(eta_a), sqrt(eta_a), sqrt(eta_b), sqrt(eta_b)];
    let eta = [eta_a, eta_a, eta_b, eta_b];
    let mut m = cm.m;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] *= amp[i] * amp[j];
        }
        m[i][i] += 1.0 - eta[i];
    }
    Ok(TwoModeCM::from_raw(m))
}

/// Adds `chi_a · I` and `chi_b · I` to the diagonal blocks.
pub fn add_excess_noise(cm: &TwoModeCM, chi_a: f64, chi_b: f64) -> Result<TwoModeCM> {
    for (param, chi) in [("chi_a", chi_a), ("chi_b", chi_b)] {
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(Error::domain(param, chi, "finite excess noise >= 0"));
        }
    }
    let mut m = cm.m;
    m[0][0] += chi_a;
    m[1][1] += chi_a;
    m[2][2] += chi_b;
    m[3][3] += chi_b;
    Ok(TwoModeCM::from_raw(m))
}

pub(crate) fn check_unit(param: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(param, x, "a transmissivity in [0, 1]"))
    }
}

pub(crate) fn standard_matrix(a: f64, b: f64, c_plus: f64, c_minus: f64) -> Matrix4 {
    [
        [a, 0.0, c_plus, 0.0],
        [0.0, a, 0.0, c_minus],
        [c_plus, 0.0, b, 0.0],
        [0.0, c_minus, 0.0, b],
    ]
}

fn spectrum_from_invariants(delta: f64, det_m: f64) -> Result<(f64, f64)> {
    if !(det_m > 0.0) || !delta.is_finite() {
        return Err(Error::Unphysical {
            reason: "non-positive determinant",
            value: det_m,
        });
    }
    let disc = delta * delta - 4.0 * det_m;
    if disc < -TOL_NUM * delta * delta {
        return Err(Error::numerical("symplectic discriminant", disc));
    }
    let nu_plus_sq = 0.5 * (delta + sqrt(disc.max(0.0)));
    // det M = ν₋² ν₊² avoids cancellation in (Δ − √…)/2.
    let nu_minus_sq = det_m / nu_plus_sq;
    Ok((sqrt(nu_minus_sq), sqrt(nu_plus_sq)))
}

fn det4(mut m: Matrix4) -> f64 {
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}

fn is_positive_definite(m: &Matrix4) -> bool {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                l[i][i] = sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    true
}
