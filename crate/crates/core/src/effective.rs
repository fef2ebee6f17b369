//! Effective loss channels.
//!
//! An entangled covariance matrix `[[aI, cZ], [cZ, bI]]` equals a two-mode
//! squeezed vacuum of squeezing `r_e` sent through pure-loss channels of
//! transmissivity `η_e^a` and `η_e^b`. Comparing effective transmissivities
//! ranks the three schemes.

use crate::gaussian::{apply_loss, tmsv_cm, Squeezing, StandardFormCM, TwoModeCM};
use crate::schemes::{average_pair, SchemeConfig, SchemeKind};
use crate::{Error, Result, TOL_PHYS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub r_e: f64,
    pub eta_a: f64,
    pub eta_b: f64,
}

impl EffectiveParams {
    pub fn cosh_2r(&self) -> f64 {
        libm::cosh(2.0 * self.r_e)
    }

    /// The lossy squeezed state these parameters describe.
    pub fn to_cm(&self) -> Result<TwoModeCM> {
        apply_loss(&tmsv_cm(Squeezing::new(self.r_e)?), self.eta_a, self.eta_b)
    }
}

/// Effective squeezing and transmissivities of an entangled standard-form
/// matrix with `c₊ = −c₋`.
pub fn to_effective(cm: &StandardFormCM) -> Result<EffectiveParams> {
    let (a, b, c) = (cm.a(), cm.b(), cm.c_plus());
    if (c + cm.c_minus()).abs() > 1e-12 * c.abs().max(1.0) {
        return Err(Error::domain("c_minus", cm.c_minus(), "c_minus = -c_plus"));
    }
    let x = (a - 1.0) * (b - 1.0);
    let gap = c * c - x;
    if !(gap > 0.0) {
        let nu_minus = cm.symplectic_spectrum_pt().map_or(f64::NAN, |s| s.0);
        return Err(Error::NotEntangled { nu_minus });
    }
    let cosh_2r = (c * c + x) / gap;
    // cosh 2r_e − 1 = 2x / gap, written out to avoid cancellation for x ≪ c².
    let cosh_m1 = 2.0 * x / gap;
    let (eta_a, eta_b) = if x > 0.0 {
        (unit((a - 1.0) / cosh_m1)?, unit((b - 1.0) / cosh_m1)?)
    } else {
        // A pure state: no loss on either side.
        (1.0, 1.0)
    };
    Ok(EffectiveParams {
        r_e: 0.5 * libm::acosh(cosh_2r),
        eta_a,
        eta_b,
    })
}

fn unit(eta: f64) -> Result<f64> {
    if (0.0..=1.0 + TOL_PHYS).contains(&eta) {
        Ok(eta.min(1.0))
    } else {
        Err(Error::Unphysical {
            reason: "effective transmissivity outside [0, 1]",
            value: eta,
        })
    }
}

/// Channel-averaged effective parameters of a scheme, built from the
/// per-realization effective parameters without excess noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSummary {
    pub kind: SchemeKind,
    /// `None` when the average does not exist: for the swap scheme every
    /// realization with `η + η′ ≤ 1` is separable and the per-realization
    /// `cosh 2r` has a pole at `η + η′ = 1`.
    pub cosh_2r: Option<f64>,
    pub eta_a: f64,
    pub eta_b: f64,
    /// Probability of realizations whose effective parameters do not exist.
    pub separable_mass: f64,
    /// Probability of realizations whose transmissivity integrands fall
    /// outside `[0, 1]`.
    pub out_of_range_mass: f64,
}

impl EffectiveSummary {
    pub fn r_e(&self) -> Option<f64> {
        self.cosh_2r.map(|ch| 0.5 * libm::acosh(ch))
    }

    pub fn eta_product(&self) -> f64 {
        self.eta_a * self.eta_b
    }
}

/// Per-realization swap parameters `(cosh 2r, η^a, η^b)` for uplink
/// transmittances `(eta, eta_prime)`.
pub fn swap_effective_realization(v: f64, eta: f64, eta_prime: f64) -> (f64, f64, f64) {
    let (n, p) = (eta, eta_prime);
    let sum = n + p;
    let cosh_2r = ((n * n + p * p) * (1.0 - v) + n * p * (v * v + 3.0) + sum * (v - 3.0) + 2.0)
        / ((sum - 1.0) * (sum * (v - 1.0) + 2.0));
    let num = -(sum - 1.0) * (v - 1.0);
    (
        cosh_2r,
        num / (n * (1.0 - v) + 2.0 * (p - 1.0)),
        num / (p * (1.0 - v) + 2.0 * (n - 1.0)),
    )
}

pub fn scheme_effective_summary(cfg: &SchemeConfig) -> Result<EffectiveSummary> {
    let v = cfg.squeezing.v();
    let (first, second) = cfg.laws()?;
    let summary = |cosh_2r, eta_a, eta_b| EffectiveSummary {
        kind: cfg.kind,
        cosh_2r,
        eta_a,
        eta_b,
        separable_mass: 0.0,
        out_of_range_mass: 0.0,
    };
    match cfg.kind {
        SchemeKind::Direct => {
            let [eta_b] = average_pair(&first, &second, |n, p| Ok([n * p]))?;
            Ok(summary(Some(v), 1.0, eta_b))
        }
        SchemeKind::SatelliteSource => {
            Ok(summary(Some(v), first.expect(|n| n)?, second.expect(|p| p)?))
        }
        SchemeKind::Swap => {
            let [cosh_sum, eta_a, eta_b, separable, outside] = average_pair(&first, &second, |n, p| {
                let (ch, ea, eb) = swap_effective_realization(v, n, p);
                let entangled = n + p > 1.0;
                let inside = (0.0..=1.0).contains(&ea) && (0.0..=1.0).contains(&eb);
                Ok([
                    if entangled { ch } else { 0.0 },
                    ea,
                    eb,
                    f64::from(u8::from(!entangled)),
                    f64::from(u8::from(!inside)),
                ])
            })?;
            let cosh_2r = (separable == 0.0).then_some(cosh_sum);
            Ok(EffectiveSummary {
                separable_mass: separable,
                out_of_range_mass: outside,
                ..summary(cosh_2r, eta_a, eta_b)
            })
        }
    }
}

/// Effective-transmissivity comparison of the three schemes at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingReport {
    pub direct: EffectiveSummary,
    pub satellite: EffectiveSummary,
    pub swap: EffectiveSummary,
    /// `η^{a″} η^{b″} ≤ η^a η^b`.
    pub swap_le_direct: bool,
    /// `η^{a′} η^{b′} ≥ η^a η^b`.
    pub satellite_ge_direct: bool,
    /// Whether every effective transmissivity lies in `[0, 1]` and the swap
    /// squeezing average exists, the conditions under which the swap
    /// inequality is argued.
    pub premise_holds: bool,
}

/// Violations are reported in the result, never raised.
pub fn ordering_check(base: &SchemeConfig) -> Result<OrderingReport> {
    let of = |kind| scheme_effective_summary(&base.clone().with_kind(kind));
    let direct = of(SchemeKind::Direct)?;
    let satellite = of(SchemeKind::SatelliteSource)?;
    let swap = of(SchemeKind::Swap)?;
    let in_unit = |s: &EffectiveSummary| (0.0..=1.0).contains(&s.eta_a) && (0.0..=1.0).contains(&s.eta_b);
    Ok(OrderingReport {
        swap_le_direct: swap.eta_product() <= direct.eta_product(),
        satellite_ge_direct: satellite.eta_product() >= direct.eta_product(),
        premise_holds: in_unit(&direct)
            && in_unit(&satellite)
            && in_unit(&swap)
            && swap.cosh_2r.is_some_and(|ch| ch > 1.0 && ch.is_finite()),
        direct,
        satellite,
        swap,
    })
}

/// `η^{a″} η^{b″}` for identical fixed channels `η = η′ = t`.
pub fn swap_identical_eta_product(v: f64, t: f64) -> f64 {
    let e = (v - 1.0) * (2.0 * t - 1.0) / (t * (1.0 - v) + 2.0 * (t - 1.0));
    e * e
}

/// Checks that `cm` is reproduced by its effective lossy squeezed state;
/// returns the largest element deviation.
pub fn round_trip_error(cm: &TwoModeCM) -> Result<f64> {
    let params = to_effective(&cm.standard_form()?)?;
    Ok(params.to_cm()?.max_abs_diff(cm))
}
