use cvsat_core::effective::{ordering_check, to_effective, EffectiveSummary};
use cvsat_core::gaussian::{Squeezing, TwoModeCM};
use cvsat_core::numerics::McSpec;
use cvsat_core::postselect::{
    classical_postselect, quantum_postselect, ClassicalPsConfig, PostSelectionResult, QuantumPsConfig,
};
use cvsat_core::schemes::{ensemble, ensemble_mc, SchemeKind};
use cvsat_core::{Error, TOL_PHYS};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::scenario::{PsType, Scenario};
use crate::table::{fmt_num, fmt_opt, Table};
use crate::CliError;

/// Largest element change allowed when the panel count is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Overrides the scenario's Monte Carlo seed.
    pub seed: Option<u64>,
}

/// Maps `f` over `items` in parallel, keeping input order.
fn par_map<T: Sync, R: Send>(
    items: &[T],
    opts: RunOptions,
    f: impl Fn(&T) -> R + Sync + Send,
) -> Result<Vec<R>, CliError> {
    match opts.workers {
        None => Ok(items.par_iter().map(f).collect()),
        Some(0) => Err(CliError::Config {
            field: "workers".into(),
            msg: "must be at least 1".into(),
        }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Config {
                field: "workers".into(),
                msg: e.to_string(),
            })?;
            Ok(pool.install(|| items.par_iter().map(f).collect()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    kind: SchemeKind,
    sigma_b: f64,
    r: f64,
    chi: f64,
}

impl Point {
    fn label(&self) -> String {
        format!("scheme={} sigma_b={} r={} chi={}", self.kind, self.sigma_b, self.r, self.chi)
    }
}

fn grid(s: &Scenario) -> Vec<Point> {
    let mut out = Vec::new();
    for &kind in &s.schemes {
        for sigma_b in s.sigma_b.values() {
            for r in s.r.values() {
                for &chi in &s.chi {
                    out.push(Point { kind, sigma_b, r, chi });
                }
            }
        }
    }
    out
}

fn numerical(point: String) -> impl FnOnce(Error) -> CliError {
    move |source| CliError::Numerical { point, source }
}

/// Mean losses of the uplink from A and the downlink to B.
fn link_losses(s: &Scenario, sigma_b: f64) -> Result<(f64, f64), CliError> {
    let (up, down) = s.direct_channels(sigma_b)?;
    let quad = s.quad()?;
    let at = format!("sigma_b={sigma_b}");
    Ok((
        up.loss_db(&quad).map_err(numerical(at.clone()))?,
        down.loss_db(&quad).map_err(numerical(at))?,
    ))
}

/// Effective `(r_e, η_e^a, η_e^b)` of an entangled output, if defined.
fn effective_of(cm: &TwoModeCM) -> [Option<f64>; 3] {
    match cm.standard_form().and_then(|sf| to_effective(&sf)) {
        Ok(p) => [Some(p.r_e), Some(p.eta_a), Some(p.eta_b)],
        Err(_) => [None; 3],
    }
}

fn audit(cm: &TwoModeCM, point: &str) -> Result<f64, CliError> {
    cm.check_physical(TOL_PHYS).map_err(numerical(point.to_string()))?;
    cm.log_negativity().map_err(numerical(point.to_string()))
}

/// One row per (scheme, σ_b, r, χ).
pub fn sweep(s: &Scenario, opts: RunOptions) -> Result<Table, CliError> {
    let points = grid(s);
    let rows = par_map(&points, opts, |p| -> Result<Vec<String>, CliError> {
        let cfg = s.scheme_config(p.kind, p.sigma_b, p.r, p.chi)?;
        let cm = ensemble(&cfg).map_err(numerical(p.label()))?;
        let e_ln = audit(&cm, &p.label())?;
        let [eff_r, eff_a, eff_b] = effective_of(&cm);
        let (up, down) = link_losses(s, p.sigma_b)?;
        Ok(vec![
            p.kind.name().to_string(),
            fmt_num(p.sigma_b),
            fmt_num(p.r),
            fmt_num(p.chi),
            fmt_num(e_ln),
            fmt_num(1.0),
            fmt_opt(eff_r),
            fmt_opt(eff_a),
            fmt_opt(eff_b),
            fmt_num(up),
            fmt_num(down),
        ])
    })?;
    let mut table = Table::new(vec![
        "scheme",
        "sigma_b",
        "r",
        "chi",
        "e_ln",
        "p_success",
        "eff_r",
        "eff_eta_a",
        "eff_eta_b",
        "mean_loss_up_db",
        "mean_loss_down_db",
    ]);
    table.rows = rows.into_iter().collect::<Result<_, _>>()?;
    Ok(table)
}

#[derive(Debug, Clone, Copy)]
enum Selection {
    Classical(f64),
    Quantum(f64),
}

/// Post-selected direct-scheme states, one row per (σ_b, r, type,
/// threshold). Thresholds that keep nothing give an empty `e_ln`.
pub fn postselect(s: &Scenario, opts: RunOptions) -> Result<Table, CliError> {
    let block = s.postselect.as_ref().ok_or_else(|| CliError::Config {
        field: "postselect.type".into(),
        msg: "required by the postselect command".into(),
    })?;
    if s.schemes != [SchemeKind::Direct] {
        return Err(CliError::Config {
            field: "schemes".into(),
            msg: "post-selection is defined for the direct scheme only".into(),
        });
    }
    if s.chi.iter().any(|&c| c != 0.0) {
        return Err(CliError::Config {
            field: "chi".into(),
            msg: "post-selection is modelled without excess noise".into(),
        });
    }
    let mut selections = Vec::new();
    if block.kind != PsType::Quantum {
        selections.extend(block.zeta_th.unwrap().values().into_iter().map(Selection::Classical));
    }
    if block.kind != PsType::Classical {
        selections.extend(block.q_th.unwrap().values().into_iter().map(Selection::Quantum));
    }
    let mut points = Vec::new();
    for sigma_b in s.sigma_b.values() {
        for r in s.r.values() {
            for &sel in &selections {
                points.push((sigma_b, r, sel));
            }
        }
    }
    let quad = s.quad()?;
    let rows = par_map(&points, opts, |&(sigma_b, r, sel)| -> Result<Vec<String>, CliError> {
        let (up, down) = s.direct_channels(sigma_b)?;
        let sq = Squeezing::new(r).map_err(|e| CliError::Config {
            field: "r".into(),
            msg: e.to_string(),
        })?;
        let (kind, tap, threshold, outcome) = match sel {
            Selection::Classical(z) => {
                let cfg = ClassicalPsConfig::new(z).map_err(|e| CliError::Config {
                    field: "postselect.zeta_th".into(),
                    msg: e.to_string(),
                })?;
                ("classical", None, z, classical_postselect(sq, &up, &down, cfg, &quad))
            }
            Selection::Quantum(q) => {
                let cfg = QuantumPsConfig::new(block.tap_t, q).map_err(|e| CliError::Config {
                    field: "postselect.q_th".into(),
                    msg: e.to_string(),
                })?;
                ("quantum", Some(block.tap_t), q, quantum_postselect(sq, &up, &down, cfg, &quad))
            }
        };
        let label = format!("{kind} threshold={threshold} sigma_b={sigma_b} r={r}");
        let (e_ln, p_success, eff) = match outcome {
            Ok(PostSelectionResult { cm, p_success, .. }) => {
                (Some(audit(&cm, &label)?), p_success, effective_of(&cm))
            }
            Err(Error::EmptySelection { p_success }) => (None, p_success, [None; 3]),
            // Threshold at or above the best reachable transmittance.
            Err(Error::Domain { param: "zeta_th", .. }) => (None, 0.0, [None; 3]),
            Err(e) => return Err(numerical(label)(e)),
        };
        let (loss_up, loss_down) = link_losses(s, sigma_b)?;
        Ok(vec![
            kind.to_string(),
            fmt_num(sigma_b),
            fmt_num(r),
            fmt_opt(tap),
            fmt_num(threshold),
            fmt_opt(e_ln),
            fmt_num(p_success),
            fmt_opt(eff[0]),
            fmt_opt(eff[1]),
            fmt_opt(eff[2]),
            fmt_num(loss_up),
            fmt_num(loss_down),
        ])
    })?;
    let mut table = Table::new(vec![
        "type",
        "sigma_b",
        "r",
        "tap_t",
        "threshold",
        "e_ln",
        "p_success",
        "eff_r",
        "eff_eta_a",
        "eff_eta_b",
        "mean_loss_up_db",
        "mean_loss_down_db",
    ]);
    table.rows = rows.into_iter().collect::<Result<_, _>>()?;
    Ok(table)
}

/// Effective squeezing and transmissivities of each scheme from the
/// per-realization reductions, with the ordering flags of the point.
pub fn effective(s: &Scenario, opts: RunOptions) -> Result<Table, CliError> {
    if s.chi.iter().any(|&c| c != 0.0) {
        return Err(CliError::Config {
            field: "chi".into(),
            msg: "effective-channel summaries are noise-free".into(),
        });
    }
    let mut points = Vec::new();
    for sigma_b in s.sigma_b.values() {
        for r in s.r.values() {
            points.push((sigma_b, r));
        }
    }
    let reports = par_map(&points, opts, |&(sigma_b, r)| {
        let cfg = s.scheme_config(SchemeKind::Direct, sigma_b, r, 0.0)?;
        ordering_check(&cfg).map_err(numerical(format!("sigma_b={sigma_b} r={r}")))
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(vec![
        "scheme",
        "sigma_b",
        "r",
        "cosh_2r",
        "eff_r",
        "eff_eta_a",
        "eff_eta_b",
        "eta_product",
        "separable_mass",
        "out_of_range_mass",
        "swap_le_direct",
        "satellite_ge_direct",
        "premise_holds",
    ]);
    for &kind in &s.schemes {
        for (&(sigma_b, r), rep) in points.iter().zip(&reports) {
            let sum: &EffectiveSummary = match kind {
                SchemeKind::Direct => &rep.direct,
                SchemeKind::SatelliteSource => &rep.satellite,
                SchemeKind::Swap => &rep.swap,
            };
            table.rows.push(vec![
                kind.name().to_string(),
                fmt_num(sigma_b),
                fmt_num(r),
                fmt_opt(sum.cosh_2r),
                fmt_opt(sum.r_e()),
                fmt_num(sum.eta_a),
                fmt_num(sum.eta_b),
                fmt_num(sum.eta_product()),
                fmt_num(sum.separable_mass),
                fmt_num(sum.out_of_range_mass),
                rep.swap_le_direct.to_string(),
                rep.satellite_ge_direct.to_string(),
                rep.premise_holds.to_string(),
            ]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub points: usize,
    pub failures: Vec<Value>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self, name: Option<&str>) -> Value {
        json!({
            "scenario": name,
            "status": if self.passed() { "pass" } else { "fail" },
            "points": self.points,
            "failures": self.failures,
        })
    }
}

/// Convergence gate (panel doubling), physicality audit and, when the
/// scenario has an `mc` block, a Monte Carlo cross-check at every point.
pub fn validate(s: &Scenario, opts: RunOptions) -> Result<ValidationReport, CliError> {
    let points = grid(s);
    let mc = match s.mc {
        Some((n, seed)) => Some(McSpec::new(n, opts.seed.unwrap_or(seed)).map_err(|e| CliError::Config {
            field: "mc.samples".into(),
            msg: e.to_string(),
        })?),
        None => None,
    };
    let found = par_map(&points, opts, |p| -> Result<Vec<Value>, CliError> {
        let cfg = s.scheme_config(p.kind, p.sigma_b, p.r, p.chi)?;
        let fine = cfg.clone().with_quad(cfg.quad.refined(2));
        let at = json!({ "scheme": p.kind.name(), "sigma_b": p.sigma_b, "r": p.r, "chi": p.chi });
        let fail = |check: &str, detail: Value| json!({ "check": check, "point": at.clone(), "detail": detail });
        let (cm, cm_fine) = match (ensemble(&cfg), ensemble(&fine)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Ok(vec![fail("numerical", json!(e.to_string()))]),
        };
        let mut out = Vec::new();
        let diff = cm.max_abs_diff(&cm_fine);
        if !(diff < CONVERGENCE_TOL) {
            out.push(fail("convergence", json!({ "max_abs_diff": diff, "tolerance": CONVERGENCE_TOL })));
        }
        for m in [&cm, &cm_fine] {
            if let Err(e) = m.check_physical(TOL_PHYS) {
                out.push(fail("physicality", json!(e.to_string())));
            }
        }
        if let Some(mc) = &mc {
            match ensemble_mc(&cfg, mc) {
                Ok(est) => {
                    let quad = [cm.get(0, 0), cm.get(2, 2), cm.get(0, 2)];
                    for (k, name) in ["a", "b", "c"].into_iter().enumerate() {
                        let dev = (quad[k] - est.mean[k]).abs();
                        if dev > 4.0 * est.std_err[k] + 1e-12 {
                            out.push(fail(
                                "monte_carlo",
                                json!({ "element": name, "quadrature": quad[k], "mc": est.mean[k], "std_err": est.std_err[k] }),
                            ));
                        }
                    }
                }
                Err(e) => out.push(fail("monte_carlo", json!(e.to_string()))),
            }
        }
        Ok(out)
    })?;
    let mut failures = Vec::new();
    for f in found {
        failures.extend(f?);
    }
    Ok(ValidationReport {
        points: points.len(),
        failures,
    })
}

/// Entangled pairs per second from a success probability and a source rate.
pub fn rate_estimate(p_success: f64, tx_rate_hz: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&p_success) {
        return Err(CliError::Config {
            field: "p".into(),
            msg: format!("{p_success} is not a probability"),
        });
    }
    if !(tx_rate_hz.is_finite() && tx_rate_hz > 0.0) {
        return Err(CliError::Config {
            field: "tx-hz".into(),
            msg: format!("{tx_rate_hz} is not a positive rate"),
        });
    }
    Ok(p_success * tx_rate_hz)
}
