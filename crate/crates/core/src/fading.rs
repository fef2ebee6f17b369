//! Beam-wander fading channels.
//!
//! A beam of spot radius `W` wanders around the centre of an aperture of
//! radius `β`; the deflection `d` is Rayleigh distributed with scale `σ_b`
//! and the transmittance follows `η(d) = η₀ exp(−½ (d/L)^λ)`. The induced
//! density on `(0, η₀]` is the log-negative Weibull law. Every ensemble
//! average here is computed in the deflection domain, where the integrand is
//! smooth.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::math::{ceil, exp, ln, log10, powf, sqrt};
use crate::numerics::{bessel_i_scaled, integrate_vec, uniform_open, QuadratureSpec};
use crate::{Error, Result};

/// Rayleigh tail cut: `P(d > 12σ) = e^{-72}`.
const RAYLEIGH_CUTOFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingChannel {
    sigma_b: f64,
    beta: f64,
    w: f64,
    h: f64,
    lambda_shape: f64,
    l_scale: f64,
    eta0: f64,
}

impl FadingChannel {
    /// Derives the shape `λ`, scale `L` and maximal transmittance `η₀` from
    /// the aperture `beta` and spot radius `w`; `sigma_b = 0` gives a
    /// channel fixed at `η₀`.
    pub fn derive_params(sigma_b: f64, beta: f64, w: f64) -> Result<Self> {
        if !(sigma_b.is_finite() && sigma_b >= 0.0) {
            return Err(Error::domain("sigma_b", sigma_b, "finite sigma_b >= 0"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain("beta", beta, "finite beta > 0"));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::domain("w", w, "finite w > 0"));
        }
        let h = (beta / w) * (beta / w);
        let eta0_sq = -libm::expm1(-2.0 * h);
        let i0 = bessel_i_scaled(0, 4.0 * h)?;
        let i1 = bessel_i_scaled(1, 4.0 * h)?;
        let den = 1.0 - i0;
        if !(den > 1e-15) {
            return Err(Error::numerical("1 - exp(-4h) I0(4h)", den));
        }
        let log_term = ln(2.0 * eta0_sq / den);
        if !(log_term > 0.0) {
            return Err(Error::numerical("ln(2 eta0^2 / (1 - exp(-4h) I0(4h)))", log_term));
        }
        let lambda_shape = 8.0 * h * i1 / den / log_term;
        let l_scale = beta * powf(log_term, -1.0 / lambda_shape);
        if !(lambda_shape.is_finite() && l_scale.is_finite() && lambda_shape > 0.0) {
            return Err(Error::numerical("fading shape", lambda_shape));
        }
        Ok(FadingChannel {
            sigma_b,
            beta,
            w,
            h,
            lambda_shape,
            l_scale,
            eta0: sqrt(eta0_sq),
        })
    }

    /// Channel with `β = 1`, so lengths are in units of the aperture radius.
    pub fn with_ratio(sigma_b: f64, beta_over_w: f64) -> Result<Self> {
        if !(beta_over_w.is_finite() && beta_over_w > 0.0) {
            return Err(Error::domain("beta_over_w", beta_over_w, "finite ratio > 0"));
        }
        Self::derive_params(sigma_b, 1.0, 1.0 / beta_over_w)
    }

    /// The same aperture with a different beam-wander scale.
    pub fn with_sigma(&self, sigma_b: f64) -> Result<Self> {
        if !(sigma_b.is_finite() && sigma_b >= 0.0) {
            return Err(Error::domain("sigma_b", sigma_b, "finite sigma_b >= 0"));
        }
        Ok(FadingChannel { sigma_b, ..*self })
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lambda_shape(&self) -> f64 {
        self.lambda_shape
    }

    pub fn l_scale(&self) -> f64 {
        self.l_scale
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn is_point_mass(&self) -> bool {
        self.sigma_b == 0.0
    }

    /// Transmittance at beam deflection `d`.
    pub fn eta_at(&self, d: f64) -> f64 {
        self.eta0 * exp(-0.5 * powf(d / self.l_scale, self.lambda_shape))
    }

    /// Deflection at which the transmittance drops to `eta`, for
    /// `0 < eta ≤ η₀`.
    pub fn deflection_at(&self, eta: f64) -> f64 {
        if eta >= self.eta0 {
            return 0.0;
        }
        if eta <= 0.0 {
            return f64::INFINITY;
        }
        self.l_scale * powf(2.0 * ln(self.eta0 / eta), 1.0 / self.lambda_shape)
    }

    /// Density of the transmittance; zero outside `(0, η₀)`. A point-mass
    /// channel has no density and returns zero everywhere.
    pub fn pdf(&self, eta: f64) -> f64 {
        if self.is_point_mass() || !(eta > 0.0 && eta < self.eta0) {
            return 0.0;
        }
        let (s, l, lam) = (self.sigma_b, self.l_scale, self.lambda_shape);
        let u = 2.0 * ln(self.eta0 / eta);
        2.0 * l * l / (s * s * lam * eta)
            * powf(u, 2.0 / lam - 1.0)
            * exp(-l * l / (2.0 * s * s) * powf(u, 2.0 / lam))
    }

    /// `P(η ≤ eta)`.
    pub fn cdf(&self, eta: f64) -> f64 {
        if eta >= self.eta0 {
            return 1.0;
        }
        if eta <= 0.0 || self.is_point_mass() {
            return 0.0;
        }
        let d = self.deflection_at(eta);
        exp(-d * d / (2.0 * self.sigma_b * self.sigma_b))
    }

    /// Draws one transmittance via a Rayleigh deflection.
    pub fn sample(&self, rng: &mut impl RngCore) -> Result<f64> {
        if self.is_point_mass() {
            return Err(Error::domain("sigma_b", 0.0, "sigma_b > 0 to sample; use eta0"));
        }
        Ok(self.draw(rng))
    }

    /// Like [`FadingChannel::sample`], returning `η₀` for a point mass.
    pub fn draw(&self, rng: &mut impl RngCore) -> f64 {
        if self.is_point_mass() {
            return self.eta0;
        }
        let u = uniform_open(rng);
        self.eta_at(self.sigma_b * sqrt(-2.0 * ln(u)))
    }

    /// Quadrature nodes for the whole distribution, weights summing to 1.
    pub fn law(&self, quad: &QuadratureSpec) -> Result<DiscreteLaw> {
        let mut law = self.law_above(0.0, quad)?;
        let mass: f64 = law.weights.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::numerical("channel law mass", mass));
        }
        law.weights.iter_mut().for_each(|w| *w /= mass);
        Ok(law)
    }

    /// Quadrature nodes for the sub-distribution `η > eta_min`. Weights are
    /// probabilities and sum to `P(η > eta_min)`.
    pub fn law_above(&self, eta_min: f64, quad: &QuadratureSpec) -> Result<DiscreteLaw> {
        if self.is_point_mass() {
            let mut law = DiscreteLaw::default();
            if self.eta0 > eta_min {
                law.weights.push(1.0);
                law.etas.push(self.eta0);
            }
            return Ok(law);
        }
        let s = self.sigma_b;
        let upper = f64::min(RAYLEIGH_CUTOFF * s, self.deflection_at(eta_min));
        let mut law = DiscreteLaw::default();
        if !(upper > 0.0) {
            return Ok(law);
        }
        let spec = quad.with_subdivisions(self.panels(upper, quad));
        law.weights.reserve(spec.nodes_1d() * spec.subdivisions());
        law.etas.reserve(spec.nodes_1d() * spec.subdivisions());
        spec.for_each_node(0.0, upper, |d, w| {
            law.weights.push(w * d / (s * s) * exp(-d * d / (2.0 * s * s)));
            law.etas.push(self.eta_at(d));
        });
        Ok(law)
    }

    /// `⟨g(η)⟩`.
    pub fn expect(&self, g: impl Fn(f64) -> f64, quad: &QuadratureSpec) -> Result<f64> {
        self.law(quad)?.expect(g)
    }

    /// `∫_{η > eta_min} g(η) p(η) dη`, integrated directly in the
    /// deflection domain.
    pub fn expect_above(
        &self,
        eta_min: f64,
        g: impl Fn(f64) -> f64,
        quad: &QuadratureSpec,
    ) -> Result<f64> {
        let [v] = self.integrate_above(eta_min, |eta| Ok([g(eta)]), quad)?;
        Ok(v)
    }

    /// Vector form of [`FadingChannel::expect_above`]; `f` may fail.
    pub fn integrate_above<const K: usize>(
        &self,
        eta_min: f64,
        mut f: impl FnMut(f64) -> Result<[f64; K]>,
        quad: &QuadratureSpec,
    ) -> Result<[f64; K]> {
        if self.is_point_mass() {
            return if self.eta0 > eta_min { f(self.eta0) } else { Ok([0.0; K]) };
        }
        let s = self.sigma_b;
        let upper = f64::min(RAYLEIGH_CUTOFF * s, self.deflection_at(eta_min));
        if !(upper > 0.0) {
            return Ok([0.0; K]);
        }
        let spec = quad.with_subdivisions(self.panels(upper, quad));
        integrate_vec(
            |d| {
                let density = d / (s * s) * exp(-d * d / (2.0 * s * s));
                let mut vals = f(self.eta_at(d))?;
                vals.iter_mut().for_each(|x| *x *= density);
                Ok(vals)
            },
            0.0,
            upper,
            &spec,
        )
    }

    /// `⟨η⟩`.
    pub fn mean_transmittance(&self, quad: &QuadratureSpec) -> Result<f64> {
        self.expect(|eta| eta, quad)
    }

    /// `⟨η²⟩`.
    pub fn mean_power_transmittance(&self, quad: &QuadratureSpec) -> Result<f64> {
        self.expect(|eta| eta * eta, quad)
    }

    /// Mean channel loss in dB, `−10 log₁₀⟨η²⟩`: `η₀² = 1 − e^{−2h}` is the
    /// captured power fraction, so `η` enters the loss as an amplitude.
    pub fn loss_db(&self, quad: &QuadratureSpec) -> Result<f64> {
        Ok(-10.0 * log10(self.mean_power_transmittance(quad)?))
    }

    // Panels are added once the deflection range exceeds 12 L so that the
    // region where η is appreciable keeps its resolution when σ_b ≫ L.
    fn panels(&self, upper: f64, quad: &QuadratureSpec) -> usize {
        let scale = ceil(upper / (RAYLEIGH_CUTOFF * self.l_scale)).max(1.0);
        quad.subdivisions() * scale as usize
    }
}

/// A finite distribution of transmittances: `Σ wᵢ g(ηᵢ)` approximates an
/// expectation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscreteLaw {
    weights: Vec<f64>,
    etas: Vec<f64>,
}

impl DiscreteLaw {
    pub fn point(eta: f64) -> Self {
        DiscreteLaw {
            weights: alloc::vec![1.0],
            etas: alloc::vec![eta],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.etas.iter().copied())
    }

    pub fn expect(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let v: f64 = self.iter().map(|(w, eta)| w * g(eta)).sum();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numerical("channel expectation", v))
        }
    }
}

/// Beam-wander scales of the four links, `σ_b` being that of the uplink
/// from ground station A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    sigma_b: f64,
    k1: f64,
    k2: f64,
}

impl LinkGeometry {
    /// `k1 ∈ [0, 1]` scales downlinks relative to uplinks; `k2 ≥ 0` scales
    /// station B relative to station A.
    pub fn new(sigma_b: f64, k1: f64, k2: f64) -> Result<Self> {
        if !(sigma_b.is_finite() && sigma_b >= 0.0) {
            return Err(Error::domain("sigma_b", sigma_b, "finite sigma_b >= 0"));
        }
        if !(0.0..=1.0).contains(&k1) {
            return Err(Error::domain("k1", k1, "k1 in [0, 1]"));
        }
        if !(k2.is_finite() && k2 >= 0.0) {
            return Err(Error::domain("k2", k2, "finite k2 >= 0"));
        }
        Ok(LinkGeometry { sigma_b, k1, k2 })
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// `(σ_AS, σ_SA, σ_BS, σ_SB)`.
    pub fn sigmas(&self) -> [f64; 4] {
        let s = self.sigma_b;
        [s, self.k1 * s, self.k2 * s, self.k1 * self.k2 * s]
    }
}

/// The four channels between the ground stations and the satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Links {
    /// A → satellite.
    pub a_up: FadingChannel,
    /// Satellite → A.
    pub a_down: FadingChannel,
    /// B → satellite.
    pub b_up: FadingChannel,
    /// Satellite → B.
    pub b_down: FadingChannel,
}

/// All four links share the aperture and spot size.
pub fn expand_links(geom: &LinkGeometry, beta: f64, w: f64) -> Result<Links> {
    let base = FadingChannel::derive_params(0.0, beta, w)?;
    let [s_as, s_sa, s_bs, s_sb] = geom.sigmas();
    Ok(Links {
        a_up: base.with_sigma(s_as)?,
        a_down: base.with_sigma(s_sa)?,
        b_up: base.with_sigma(s_bs)?,
        b_down: base.with_sigma(s_sb)?,
    })
}
