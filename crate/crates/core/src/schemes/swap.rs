use crate::gaussian::{check_unit, standard_matrix, Squeezing, TwoModeCM};
use crate::math::sqrt;
use crate::{Error, Result};

use super::{average_pair, SchemeConfig, SchemeKind};

/// Two independent two-mode states `[[aI, C], [Cᵀ, bI]]` (modes 1, 2) and
/// `[[dI, F], [Fᵀ, eI]]` (modes 3, 4) with `C = diag(c₊, c₋)`,
/// `F = diag(f₊, f₋)` and zero first moments. Modes 2 and 3 meet at the
/// Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralBipartiteInput {
    pub a: f64,
    pub b: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub d: f64,
    pub e: f64,
    pub f_plus: f64,
    pub f_minus: f64,
}

impl GeneralBipartiteInput {
    pub fn new(a: f64, b: f64, (c_plus, c_minus): (f64, f64), d: f64, e: f64, (f_plus, f_minus): (f64, f64)) -> Result<Self> {
        TwoModeCM::new(standard_matrix(a, b, c_plus, c_minus))?;
        TwoModeCM::new(standard_matrix(d, e, f_plus, f_minus))?;
        Ok(GeneralBipartiteInput {
            a,
            b,
            c_plus,
            c_minus,
            d,
            e,
            f_plus,
            f_minus,
        })
    }

    /// Both stations' squeezed pairs after the uplinks, with `chi` added to
    /// the transmitted modes 2 and 3.
    pub fn from_uplinks(sq: Squeezing, eta: f64, eta_prime: f64, chi: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        check_unit("eta_prime", eta_prime)?;
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(Error::domain("chi", chi, "finite excess noise >= 0"));
        }
        let (v, s) = (sq.v(), sq.correlation());
        let c = sqrt(eta) * s;
        let f = sqrt(eta_prime) * s;
        Ok(GeneralBipartiteInput {
            a: v,
            b: 1.0 + eta * (v - 1.0) + chi,
            c_plus: c,
            c_minus: -c,
            d: 1.0 + eta_prime * (v - 1.0) + chi,
            e: v,
            f_plus: f,
            f_minus: -f,
        })
    }

    fn bell_variance(&self) -> Result<f64> {
        let bd = self.b + self.d;
        if !(bd > 1e-12) {
            return Err(Error::numerical("b + d", bd));
        }
        Ok(bd)
    }
}

/// Displacement gains for modes 1 and 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapGains {
    pub g1: f64,
    pub g4: f64,
}

impl SwapGains {
    /// Phase-independent gains `c₊/(b + d)`, `f₊/(b + d)`; they cancel the
    /// measurement-dependent displacement when `c₋ = −c₊` and `f₋ = −f₊`.
    pub fn optimal_for(inp: &GeneralBipartiteInput) -> Result<Self> {
        let bd = inp.bell_variance()?;
        Ok(SwapGains {
            g1: inp.c_plus / bd,
            g4: inp.f_plus / bd,
        })
    }
}

/// Gains for lossy uplinks without excess noise:
/// `g₁ = √η √(v²−1) / (2 + (η + η′)(v − 1))`, `g₄` with `√η′`.
pub fn optimal_gains(eta: f64, eta_prime: f64, sq: Squeezing) -> Result<SwapGains> {
    check_unit("eta", eta)?;
    check_unit("eta_prime", eta_prime)?;
    let den = 2.0 + (eta + eta_prime) * (sq.v() - 1.0);
    Ok(SwapGains {
        g1: sqrt(eta) * sq.correlation() / den,
        g4: sqrt(eta_prime) * sq.correlation() / den,
    })
}

/// Covariance matrix of modes 1 and 4 conditioned on one Bell measurement
/// outcome.
pub fn swap_conditional(inp: &GeneralBipartiteInput) -> Result<TwoModeCM> {
    let bd = inp.bell_variance()?;
    let i = inp;
    let m = [
        [i.a - i.c_plus * i.c_plus / bd, 0.0, i.c_plus * i.f_plus / bd, 0.0],
        [0.0, i.a - i.c_minus * i.c_minus / bd, 0.0, -i.c_minus * i.f_minus / bd],
        [i.c_plus * i.f_plus / bd, 0.0, i.e - i.f_plus * i.f_plus / bd, 0.0],
        [0.0, -i.c_minus * i.f_minus / bd, 0.0, i.e - i.f_minus * i.f_minus / bd],
    ];
    TwoModeCM::new(m)
}

/// Covariance matrix of modes 1 and 4 averaged over all Bell outcomes after
/// displacements with arbitrary `gains`.
pub fn swap_ensemble_cm(inp: &GeneralBipartiteInput, gains: SwapGains) -> Result<TwoModeCM> {
    if !(gains.g1.is_finite() && gains.g4.is_finite()) {
        return Err(Error::domain("gains", gains.g1 + gains.g4, "finite gains"));
    }
    let i = inp;
    let bd = i.b + i.d;
    let SwapGains { g1, g4 } = gains;
    let m11 = i.a + bd * g1 * g1 - 2.0 * i.c_plus * g1;
    let m22 = i.a + bd * g1 * g1 + 2.0 * i.c_minus * g1;
    let m33 = i.e + bd * g4 * g4 - 2.0 * i.f_plus * g4;
    let m44 = i.e + bd * g4 * g4 + 2.0 * i.f_minus * g4;
    let m13 = i.c_plus * g4 + i.f_plus * g1 - g1 * g4 * bd;
    let m24 = i.c_minus * g4 + i.f_minus * g1 + g1 * g4 * bd;
    TwoModeCM::new([
        [m11, 0.0, m13, 0.0],
        [0.0, m22, 0.0, m24],
        [m13, 0.0, m33, 0.0],
        [0.0, m24, 0.0, m44],
    ])
}

/// Numerators of the displaced conditional first moments of
/// `(q₁, p₁, q₄, p₄)` per unit outcome, each over its positive
/// denominator. All four vanish at the optimal gains.
pub fn gain_residuals(inp: &GeneralBipartiteInput, gains: SwapGains) -> [f64; 4] {
    let i = inp;
    let bd = i.b + i.d;
    let SwapGains { g1, g4 } = gains;
    let den_plus = i.a * (i.d * i.e - i.f_plus * i.f_plus) + i.e * (i.a * i.b - i.c_plus * i.c_plus);
    let den_minus = i.a * (i.d * i.e - i.f_minus * i.f_minus) + i.e * (i.a * i.b - i.c_minus * i.c_minus);
    [
        (-g1 * (i.e * bd - i.f_plus * i.f_plus) - g4 * i.c_plus * i.f_plus + i.e * i.c_plus) / den_plus,
        (g1 * (i.e * bd - i.f_minus * i.f_minus) + g4 * i.c_minus * i.f_minus + i.e * i.c_minus) / den_minus,
        (g4 * (i.a * bd - i.c_plus * i.c_plus) + g1 * i.c_plus * i.f_plus - i.a * i.f_plus) / den_plus,
        (g4 * (i.a * bd - i.c_minus * i.c_minus) + g1 * i.c_minus * i.f_minus + i.a * i.f_minus) / den_minus,
    ]
}

/// Swapped state for one realization of the two uplinks, with the gains
/// set from the transmittances measured at the satellite.
pub fn swap_realization(sq: Squeezing, eta: f64, eta_prime: f64, chi: f64) -> Result<TwoModeCM> {
    let inp = GeneralBipartiteInput::from_uplinks(sq, eta, eta_prime, chi)?;
    swap_ensemble_cm(&inp, SwapGains::optimal_for(&inp)?)
}

/// Averages the swapped realization over both uplinks.
pub fn swap_ensemble(cfg: &SchemeConfig) -> Result<TwoModeCM> {
    cfg.expect_kind(SchemeKind::Swap)?;
    let (up_a, up_b) = cfg.laws()?;
    let (sq, chi) = (cfg.squeezing, cfg.chi);
    let [a, b, c] = average_pair(&up_a, &up_b, |eta, eta_p| {
        let inp = GeneralBipartiteInput::from_uplinks(sq, eta, eta_p, chi)?;
        let bd = inp.b + inp.d;
        Ok([
            inp.a - inp.c_plus * inp.c_plus / bd,
            inp.e - inp.f_plus * inp.f_plus / bd,
            inp.c_plus * inp.f_plus / bd,
        ])
    })?;
    TwoModeCM::from_standard_form(a, b, c, -c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cosh, log2};

    fn sq(r: f64) -> Squeezing {
        Squeezing::new(r).unwrap()
    }

    #[test]
    fn lossless_swap() {
        for r in [0.2, 1.0, 1.7] {
            let v = cosh(2.0 * r);
            let cm = swap_realization(sq(r), 1.0, 1.0, 0.0).unwrap();
            let diag = (v * v + 1.0) / (2.0 * v);
            let cross = (v * v - 1.0) / (2.0 * v);
            assert!((cm.get(0, 0) - diag).abs() < 1e-12);
            assert!((cm.get(2, 2) - diag).abs() < 1e-12);
            assert!((cm.get(0, 2) - cross).abs() < 1e-12);
            assert!((cm.get(1, 3) + cross).abs() < 1e-12);
            assert!((cm.log_negativity().unwrap() - log2(v)).abs() < 1e-10);
        }
        let e = swap_realization(sq(1.0), 1.0, 1.0, 0.0).unwrap().log_negativity().unwrap();
        assert!((e - 1.911_574_892_777_443).abs() < 1e-10);
    }

    #[test]
    fn matches_closed_form_realization() {
        let s = sq(0.8);
        let v = s.v();
        for (eta, eta_p) in [(0.3, 0.9), (0.6, 0.6), (1.0, 0.1), (0.05, 0.5)] {
            let m = (v * v - 1.0) / (2.0 + (eta + eta_p) * (v - 1.0));
            let want = TwoModeCM::from_standard_form(
                v - eta * m,
                v - eta_p * m,
                f64::sqrt(eta * eta_p) * m,
                -f64::sqrt(eta * eta_p) * m,
            )
            .unwrap();
            let got = swap_realization(s, eta, eta_p, 0.0).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn opaque_uplinks_leave_local_thermal_states() {
        let s = sq(1.0);
        let cm = swap_realization(s, 0.0, 0.0, 0.0).unwrap();
        let v = s.v();
        assert_eq!(*cm.matrix(), standard_matrix(v, v, 0.0, 0.0));
        assert_eq!(cm.log_negativity().unwrap(), 0.0);
    }

    #[test]
    fn gains_reference_values() {
        let g = optimal_gains(1.0, 1.0, sq(1.0)).unwrap();
        let want = libm::sinh(2.0) / (2.0 * cosh(2.0));
        assert!((g.g1 - want).abs() < 1e-14 && (g.g4 - want).abs() < 1e-14);
        assert!((g.g1 - 0.482_013_790_037_908_5).abs() < 1e-14);
        assert_eq!(optimal_gains(0.0, 0.5, sq(1.0)).unwrap().g1, 0.0);
        let inp = GeneralBipartiteInput::from_uplinks(sq(0.6), 0.4, 0.7, 0.0).unwrap();
        let general = SwapGains::optimal_for(&inp).unwrap();
        let special = optimal_gains(0.4, 0.7, sq(0.6)).unwrap();
        assert!((general.g1 - special.g1).abs() < 1e-15);
        assert!((general.g4 - special.g4).abs() < 1e-15);
    }

    #[test]
    fn residuals_vanish_at_optimum() {
        for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for eta_p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let inp = GeneralBipartiteInput::from_uplinks(sq(1.1), eta, eta_p, 0.03).unwrap();
                let g = SwapGains::optimal_for(&inp).unwrap();
                assert!(gain_residuals(&inp, g).iter().all(|x| x.abs() < 1e-10));
            }
        }
    }

    #[test]
    fn zero_gains_ignore_measurement() {
        let inp = GeneralBipartiteInput::from_uplinks(sq(0.9), 0.5, 0.8, 0.0).unwrap();
        let cm = swap_ensemble_cm(&inp, SwapGains { g1: 0.0, g4: 0.0 }).unwrap();
        assert_eq!(*cm.matrix(), standard_matrix(inp.a, inp.e, 0.0, 0.0));
    }

    #[test]
    fn symmetric_inputs_give_symmetric_output() {
        let inp = GeneralBipartiteInput::from_uplinks(sq(0.9), 0.6, 0.6, 0.0).unwrap();
        let g = SwapGains::optimal_for(&inp).unwrap();
        assert_eq!(g.g1, g.g4);
        let cm = swap_ensemble_cm(&inp, g).unwrap();
        assert_eq!(cm.get(0, 0), cm.get(2, 2));
    }

    #[test]
    fn no_correlations_to_swap() {
        let inp = GeneralBipartiteInput::new(2.0, 1.5, (0.0, 0.0), 1.7, 3.0, (0.0, 0.0)).unwrap();
        assert_eq!(*swap_conditional(&inp).unwrap().matrix(), standard_matrix(2.0, 3.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_unphysical_inputs() {
        assert!(GeneralBipartiteInput::new(1.0, 1.0, (0.9, -0.9), 1.0, 1.0, (0.0, 0.0)).is_err());
        let inp = GeneralBipartiteInput::from_uplinks(sq(0.5), 0.5, 0.5, 0.0).unwrap();
        assert!(swap_ensemble_cm(&inp, SwapGains { g1: f64::NAN, g4: 0.0 }).is_err());
    }
}
