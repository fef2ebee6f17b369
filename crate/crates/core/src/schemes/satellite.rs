use crate::gaussian::{add_excess_noise, apply_loss, check_unit, tmsv_cm, Squeezing, TwoModeCM};
use crate::math::sqrt;
use crate::Result;

use super::{SchemeConfig, SchemeKind};

/// The satellite sends one mode down to A (`eta`) and one to B
/// (`eta_prime`); both stations add `chi`.
pub fn satellite_realization(sq: Squeezing, eta: f64, eta_prime: f64, chi: f64) -> Result<TwoModeCM> {
    check_unit("eta", eta)?;
    check_unit("eta_prime", eta_prime)?;
    let lossy = apply_loss(&tmsv_cm(sq), eta, eta_prime)?;
    add_excess_noise(&lossy, chi, chi)
}

/// The downlinks are independent, so every element reduces to
/// one-dimensional averages.
pub fn satellite_ensemble(cfg: &SchemeConfig) -> Result<TwoModeCM> {
    cfg.expect_kind(SchemeKind::SatelliteSource)?;
    let (to_a, to_b) = cfg.laws()?;
    let (v, s) = (cfg.squeezing.v(), cfg.squeezing.correlation());
    let a = 1.0 + to_a.expect(|eta| eta)? * (v - 1.0);
    let b = 1.0 + to_b.expect(|eta| eta)? * (v - 1.0);
    let c = to_a.expect(sqrt)? * to_b.expect(sqrt)? * s;
    TwoModeCM::from_standard_form(a + cfg.chi, b + cfg.chi, c, -c)
}
