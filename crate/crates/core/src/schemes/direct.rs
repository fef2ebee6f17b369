use crate::gaussian::{add_excess_noise, apply_loss, check_unit, tmsv_cm, Squeezing, TwoModeCM};
use crate::math::sqrt;
use crate::Result;

use super::{average_pair, SchemeConfig, SchemeKind};

/// Station A keeps one mode; the other crosses the uplink (`eta`) and the
/// downlink (`eta_prime`) to B, where `chi` is added.
pub fn direct_realization(sq: Squeezing, eta: f64, eta_prime: f64, chi: f64) -> Result<TwoModeCM> {
    check_unit("eta", eta)?;
    check_unit("eta_prime", eta_prime)?;
    let lossy = apply_loss(&tmsv_cm(sq), 1.0, eta * eta_prime)?;
    add_excess_noise(&lossy, 0.0, chi)
}

/// Averages `b = 1 + ηη′(v − 1)` and `c = √(ηη′) √(v² − 1)` over the uplink
/// from A and the downlink to B.
pub fn direct_ensemble(cfg: &SchemeConfig) -> Result<TwoModeCM> {
    cfg.expect_kind(SchemeKind::Direct)?;
    let (up, down) = cfg.laws()?;
    let (v, s) = (cfg.squeezing.v(), cfg.squeezing.correlation());
    let [b, c] = average_pair(&up, &down, |eta, eta_p| {
        let zeta = eta * eta_p;
        Ok([1.0 + zeta * (v - 1.0), sqrt(zeta) * s])
    })?;
    TwoModeCM::from_standard_form(v, b + cfg.chi, c, -c)
}
