//! Post-selection on the direct scheme.
//!
//! Classical post-selection keeps a pulse when the measured combined
//! transmittance `ζ = ηη′` exceeds a threshold. Quantum post-selection taps
//! a fraction `R = 1 − T` of the received mode, measures its amplitude
//! quadrature and keeps the rest when the outcome exceeds `q_th`.

use rand_chacha::ChaCha8Rng;

use crate::fading::FadingChannel;
use crate::gaussian::{check_unit, Squeezing, TwoModeCM};
use crate::math::{exp, sqrt, PI};
use crate::numerics::{erfc, mc_moments, McSpec, QuadratureSpec};
use crate::schemes::{average_pair, direct_realization};
use crate::{Error, Result};

/// Success probabilities below this count as an empty selection.
pub const MIN_SUCCESS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPsConfig {
    zeta_th: f64,
}

impl ClassicalPsConfig {
    pub fn new(zeta_th: f64) -> Result<Self> {
        if !(zeta_th.is_finite() && zeta_th >= 0.0) {
            return Err(Error::domain("zeta_th", zeta_th, "finite threshold >= 0"));
        }
        Ok(ClassicalPsConfig { zeta_th })
    }

    pub fn zeta_th(&self) -> f64 {
        self.zeta_th
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumPsConfig {
    tap_t: f64,
    q_th: f64,
}

impl QuantumPsConfig {
    /// `q_th` may be `-∞` (accept everything).
    pub fn new(tap_t: f64, q_th: f64) -> Result<Self> {
        if !(tap_t > 0.0 && tap_t <= 1.0) {
            return Err(Error::domain("tap_T", tap_t, "tap transmissivity in (0, 1]"));
        }
        if q_th.is_nan() || q_th == f64::INFINITY {
            return Err(Error::domain("q_th", q_th, "a threshold below +inf"));
        }
        Ok(QuantumPsConfig { tap_t, q_th })
    }

    pub fn tap_t(&self) -> f64 {
        self.tap_t
    }

    pub fn tap_r(&self) -> f64 {
        1.0 - self.tap_t
    }

    pub fn q_th(&self) -> f64 {
        self.q_th
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelectionResult {
    pub cm: TwoModeCM,
    pub p_success: f64,
    pub e_ln: f64,
    /// `ζ_th` or `q_th`.
    pub threshold: f64,
}

/// Keeps realizations with `ηη′ > ζ_th` and renormalises.
pub fn classical_postselect(
    sq: Squeezing,
    ch_up: &FadingChannel,
    ch_down: &FadingChannel,
    cfg: ClassicalPsConfig,
    quad: &QuadratureSpec,
) -> Result<PostSelectionResult> {
    let zeta_th = cfg.zeta_th;
    let zeta_max = ch_up.eta0() * ch_down.eta0();
    if zeta_th >= zeta_max {
        return Err(Error::domain("zeta_th", zeta_th, "threshold below eta0 * eta0'"));
    }
    let (v, s) = (sq.v(), sq.correlation());
    // The inner range starts at ζ_th/η, so the selection boundary is always
    // a panel edge and no integrand is discontinuous.
    let [p, b, c] = ch_up.integrate_above(
        zeta_th / ch_down.eta0(),
        |eta| {
            ch_down.integrate_above(
                zeta_th / eta,
                |eta_p| {
                    let zeta = eta * eta_p;
                    Ok([1.0, 1.0 + zeta * (v - 1.0), sqrt(zeta)])
                },
                quad,
            )
        },
        quad,
    )?;
    if !(p >= MIN_SUCCESS) {
        return Err(Error::EmptySelection { p_success: p });
    }
    let (b, c) = (b / p, c / p * s);
    let cm = TwoModeCM::from_standard_form(v, b, c, -c)?;
    Ok(PostSelectionResult {
        e_ln: cm.log_negativity()?,
        cm,
        p_success: p.min(1.0),
        threshold: zeta_th,
    })
}

/// Moments of the accepted part of one realization. They are integrals of
/// the conditional Wigner function over the accepted outcomes and are not
/// divided by `p_success`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumMoments {
    pub q_a: f64,
    pub q_b: f64,
    pub q_a2: f64,
    pub q_b2: f64,
    pub q_ab: f64,
    pub p_success: f64,
}

impl QuantumMoments {
    pub fn as_array(&self) -> [f64; 6] {
        [self.q_a, self.q_b, self.q_a2, self.q_b2, self.q_ab, self.p_success]
    }
}

/// Closed-form accepted moments for transmittances `(η, η′)`.
pub fn quantum_moments_realization(
    sq: Squeezing,
    eta: f64,
    eta_prime: f64,
    cfg: &QuantumPsConfig,
) -> Result<QuantumMoments> {
    check_unit("eta", eta)?;
    check_unit("eta_prime", eta_prime)?;
    let zeta = eta * eta_prime;
    let v = sq.v();
    let b_q = 1.0 + zeta * (v - 1.0);
    let c_q = sqrt(zeta) * sq.correlation();
    Ok(tap_moments(v, b_q, c_q, cfg))
}

fn tap_moments(v: f64, b_q: f64, c_q: f64, cfg: &QuantumPsConfig) -> QuantumMoments {
    let (t, r, q_th) = (cfg.tap_t, cfg.tap_r(), cfg.q_th);
    let var = r * b_q + t;
    let tail = erfc(q_th / sqrt(2.0 * var));
    // Density of the tap outcome at the threshold, and the same times q_th;
    // both vanish as q_th → −∞.
    let (dens, dens_q) = if q_th == f64::NEG_INFINITY {
        (0.0, 0.0)
    } else {
        let g = exp(-q_th * q_th / (2.0 * var));
        (g / sqrt(2.0 * PI * var), q_th * g / sqrt(2.0 * PI * var * var * var))
    };
    let excess = b_q - 1.0;
    QuantumMoments {
        q_a: sqrt(r) * c_q * dens,
        q_b: sqrt(t * r) * excess * dens,
        q_a2: r * c_q * c_q * dens_q + 0.5 * v * tail,
        q_b2: r * t * excess * excess * dens_q + (r * t * excess * excess + b_q) / (2.0 * var) * tail,
        q_ab: sqrt(t) * r * excess * c_q * dens_q + 0.5 * sqrt(t) * c_q * tail,
        p_success: 0.5 * tail,
    }
}

/// Tap-and-measure distillation averaged over both channels.
pub fn quantum_postselect(
    sq: Squeezing,
    ch_up: &FadingChannel,
    ch_down: &FadingChannel,
    cfg: QuantumPsConfig,
    quad: &QuadratureSpec,
) -> Result<PostSelectionResult> {
    let (up, down) = (ch_up.law(quad)?, ch_down.law(quad)?);
    let v = sq.v();
    let (t, r) = (cfg.tap_t, cfg.tap_r());
    let sums = average_pair(&up, &down, |eta, eta_p| {
        let zeta = eta * eta_p;
        let b = 1.0 + zeta * (v - 1.0);
        let c = sqrt(zeta) * sq.correlation();
        let m = tap_moments(v, b, c, &cfg);
        let p = m.p_success;
        Ok([m.q_a, m.q_b, m.q_a2, m.q_b2, m.q_ab, p, p * (t * b + r), p * sqrt(t) * -c])
    })?;
    let p_s = sums[5];
    if !(p_s >= MIN_SUCCESS) {
        return Err(Error::EmptySelection { p_success: p_s });
    }
    let [q_a, q_b, q_a2, q_b2, q_ab, _, b_p, c_p] = sums.map(|x| x / p_s);
    let cm = TwoModeCM::from_quadrature_blocks(
        (q_a2 - q_a * q_a, v),
        (q_b2 - q_b * q_b, b_p),
        (q_ab - q_a * q_b, c_p),
    )?;
    Ok(PostSelectionResult {
        e_ln: cm.log_negativity()?,
        cm,
        p_success: p_s.min(1.0),
        threshold: cfg.q_th,
    })
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    fn new((mean, std_err): (f64, f64)) -> Self {
        Estimate { mean, std_err }
    }

    /// `|x − mean| ≤ k · std_err`.
    pub fn agrees(&self, x: f64, k: f64) -> bool {
        (x - self.mean).abs() <= k * self.std_err + 1e-12 * x.abs().max(1.0)
    }
}

/// Sampled `(P_s, b^ps, c^ps)`; the elements are ratio estimates.
pub fn classical_postselect_mc(
    sq: Squeezing,
    ch_up: &FadingChannel,
    ch_down: &FadingChannel,
    cfg: ClassicalPsConfig,
    mc: &McSpec,
) -> Result<[Estimate; 3]> {
    let (v, s) = (sq.v(), sq.correlation());
    let m = mc_moments(mc, |rng: &mut ChaCha8Rng| {
        let zeta = ch_up.draw(rng) * ch_down.draw(rng);
        if zeta > cfg.zeta_th {
            [1.0, 1.0 + zeta * (v - 1.0), sqrt(zeta) * s]
        } else {
            [0.0; 3]
        }
    });
    if m.mean()[0] == 0.0 {
        return Err(Error::EmptySelection { p_success: 0.0 });
    }
    Ok([
        Estimate::new((m.mean()[0], m.std_err(0))),
        Estimate::new(m.ratio(1, 0)),
        Estimate::new(m.ratio(2, 0)),
    ])
}

/// Sampled channel averages of the accepted moments, in
/// [`QuantumMoments::as_array`] order (not divided by `P_s`).
pub fn quantum_moments_mc(
    sq: Squeezing,
    ch_up: &FadingChannel,
    ch_down: &FadingChannel,
    cfg: QuantumPsConfig,
    mc: &McSpec,
) -> Result<[Estimate; 6]> {
    let mut failure = None;
    let m = mc_moments(mc, |rng: &mut ChaCha8Rng| {
        let (eta, eta_p) = (ch_up.draw(rng), ch_down.draw(rng));
        match quantum_moments_realization(sq, eta, eta_p, &cfg) {
            Ok(q) => q.as_array(),
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 6]
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(core::array::from_fn(|k| Estimate::new((m.mean()[k], m.std_err(k)))))
}

/// Channel averages of the accepted moments by quadrature, in
/// [`QuantumMoments::as_array`] order.
pub fn quantum_moments_ensemble(
    sq: Squeezing,
    ch_up: &FadingChannel,
    ch_down: &FadingChannel,
    cfg: QuantumPsConfig,
    quad: &QuadratureSpec,
) -> Result<[f64; 6]> {
    let (up, down) = (ch_up.law(quad)?, ch_down.law(quad)?);
    average_pair(&up, &down, |eta, eta_p| {
        Ok(quantum_moments_realization(sq, eta, eta_p, &cfg)?.as_array())
    })
}

/// Best single realization reachable by classical selection.
pub fn classical_limit(sq: Squeezing, ch_up: &FadingChannel, ch_down: &FadingChannel) -> Result<TwoModeCM> {
    direct_realization(sq, ch_up.eta0(), ch_down.eta0(), 0.0)
}
