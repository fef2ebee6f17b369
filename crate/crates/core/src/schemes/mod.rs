//! The three entanglement distribution schemes.
//!
//! Each scheme has a per-realization covariance matrix for fixed channel
//! transmittances `(η, η′)` and an ensemble matrix whose elements are the
//! channel averages of the realization elements. Ensemble averages are
//! formed element-wise, never over `E_LN`.

mod direct;
mod satellite;
mod swap;

pub use direct::{direct_ensemble, direct_realization};
pub use satellite::{satellite_ensemble, satellite_realization};
pub use swap::{
    gain_residuals, optimal_gains, swap_conditional, swap_ensemble, swap_ensemble_cm,
    swap_realization, GeneralBipartiteInput, SwapGains,
};

use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha8Rng;

use crate::fading::{expand_links, DiscreteLaw, FadingChannel, LinkGeometry};
use crate::gaussian::{Squeezing, TwoModeCM};
use crate::numerics::{mc_moments, McSpec, QuadratureSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// A keeps one mode and sends the other up to the satellite, which
    /// reflects it down to B.
    Direct,
    /// The satellite prepares the pair and sends one mode to each station.
    SatelliteSource,
    /// Each station uplinks half of its own pair; the satellite swaps.
    Swap,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Direct, SchemeKind::SatelliteSource, SchemeKind::Swap];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Direct => "direct",
            SchemeKind::SatelliteSource => "satellite",
            SchemeKind::Swap => "swap",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SchemeKind::Direct),
            "satellite" => Ok(SchemeKind::SatelliteSource),
            "swap" => Ok(SchemeKind::Swap),
            _ => Err(Error::domain("scheme", f64::NAN, "direct, satellite or swap")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub squeezing: Squeezing,
    pub geometry: LinkGeometry,
    /// Aperture radius.
    pub beta: f64,
    /// Beam spot radius.
    pub w: f64,
    /// Excess noise added at the receivers.
    pub chi: f64,
    pub quad: QuadratureSpec,
}

impl SchemeConfig {
    pub fn new(
        kind: SchemeKind,
        squeezing: Squeezing,
        geometry: LinkGeometry,
        beta_over_w: f64,
        chi: f64,
    ) -> Result<Self> {
        if !(beta_over_w.is_finite() && beta_over_w > 0.0) {
            return Err(Error::domain("beta_over_w", beta_over_w, "finite ratio > 0"));
        }
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(Error::domain("chi", chi, "finite excess noise >= 0"));
        }
        Ok(SchemeConfig {
            kind,
            squeezing,
            geometry,
            beta: 1.0,
            w: 1.0 / beta_over_w,
            chi,
            quad: QuadratureSpec::default(),
        })
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_kind(mut self, kind: SchemeKind) -> Self {
        self.kind = kind;
        self
    }

    /// The two channels the scheme's modes travel through, ordered
    /// (towards A or from A, towards B or from B).
    pub fn channels(&self) -> Result<(FadingChannel, FadingChannel)> {
        let links = expand_links(&self.geometry, self.beta, self.w)?;
        Ok(match self.kind {
            SchemeKind::Direct => (links.a_up, links.b_down),
            SchemeKind::SatelliteSource => (links.a_down, links.b_down),
            SchemeKind::Swap => (links.a_up, links.b_up),
        })
    }

    pub(crate) fn laws(&self) -> Result<(DiscreteLaw, DiscreteLaw)> {
        let (first, second) = self.channels()?;
        Ok((first.law(&self.quad)?, second.law(&self.quad)?))
    }

    pub(crate) fn expect_kind(&self, kind: SchemeKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::domain("kind", f64::NAN, kind.name()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeResult {
    pub kind: SchemeKind,
    pub cm: TwoModeCM,
    pub e_ln: f64,
}

/// Per-realization covariance matrix of any scheme.
pub fn realization(kind: SchemeKind, sq: Squeezing, eta: f64, eta_prime: f64, chi: f64) -> Result<TwoModeCM> {
    match kind {
        SchemeKind::Direct => direct_realization(sq, eta, eta_prime, chi),
        SchemeKind::SatelliteSource => satellite_realization(sq, eta, eta_prime, chi),
        SchemeKind::Swap => swap_realization(sq, eta, eta_prime, chi),
    }
}

/// Ensemble covariance matrix of the configured scheme.
pub fn ensemble(cfg: &SchemeConfig) -> Result<TwoModeCM> {
    match cfg.kind {
        SchemeKind::Direct => direct_ensemble(cfg),
        SchemeKind::SatelliteSource => satellite_ensemble(cfg),
        SchemeKind::Swap => swap_ensemble(cfg),
    }
}

pub fn run(cfg: &SchemeConfig) -> Result<SchemeResult> {
    let cm = ensemble(cfg)?;
    Ok(SchemeResult {
        kind: cfg.kind,
        e_ln: cm.log_negativity()?,
        cm,
    })
}

/// Monte Carlo estimate of the ensemble elements `(a, b, c)` of a
/// standard-form output `[[aI, cZ], [cZ, bI]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementEstimate {
    pub mean: [f64; 3],
    pub std_err: [f64; 3],
}

/// Draws `(η, η′)` from the scheme's channels and averages the realization
/// elements.
pub fn ensemble_mc(cfg: &SchemeConfig, mc: &McSpec) -> Result<ElementEstimate> {
    let (first, second) = cfg.channels()?;
    let (kind, sq, chi) = (cfg.kind, cfg.squeezing, cfg.chi);
    let mut failure = None;
    let moments = mc_moments(mc, |rng: &mut ChaCha8Rng| {
        let eta = first.draw(rng);
        let eta_prime = second.draw(rng);
        match realization(kind, sq, eta, eta_prime, chi) {
            Ok(cm) => [cm.get(0, 0), cm.get(2, 2), cm.get(0, 2)],
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 3]
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ElementEstimate {
        mean: moments.mean(),
        std_err: [moments.std_err(0), moments.std_err(1), moments.std_err(2)],
    })
}

/// `Σᵢⱼ wᵢ wⱼ f(ηᵢ, η′ⱼ)` over the product of two independent laws.
pub(crate) fn average_pair<const K: usize>(
    first: &DiscreteLaw,
    second: &DiscreteLaw,
    mut f: impl FnMut(f64, f64) -> Result<[f64; K]>,
) -> Result<[f64; K]> {
    let mut total = [0.0; K];
    for (w1, eta) in first.iter() {
        let mut row = [0.0; K];
        for (w2, eta_prime) in second.iter() {
            let vals = f(eta, eta_prime)?;
            for k in 0..K {
                row[k] += w2 * vals[k];
            }
        }
        for k in 0..K {
            total[k] += w1 * row[k];
        }
    }
    if total.iter().all(|x| x.is_finite()) {
        Ok(total)
    } else {
        Err(Error::numerical("ensemble average", f64::NAN))
    }
}
