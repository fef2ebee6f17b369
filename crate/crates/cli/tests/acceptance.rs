//! Acceptance criteria A1–A9. Each check prints one `A<n> PASS|FAIL` line
//! with the measured numbers; the binary exits non-zero if any fails.

use std::panic;
use std::sync::atomic::{AtomicBool, Ordering};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cvsat::rate_estimate;
use cvsat_core::effective::{ordering_check, round_trip_error, to_effective};
use cvsat_core::fading::{expand_links, FadingChannel, LinkGeometry};
use cvsat_core::gaussian::{log_negativity, tmsv_cm, Squeezing};
use cvsat_core::numerics::{mc_moments, McSpec, QuadratureSpec};
use cvsat_core::postselect::{
    classical_postselect, classical_postselect_mc, quantum_moments_ensemble, quantum_moments_realization,
    quantum_postselect, ClassicalPsConfig, QuantumPsConfig,
};
use cvsat_core::schemes::{
    ensemble, ensemble_mc, run, swap_conditional, swap_ensemble_cm, swap_realization, GeneralBipartiteInput,
    SchemeConfig, SchemeKind, SwapGains,
};
use rayon::prelude::*;

static REPORTED: AtomicBool = AtomicBool::new(false);

fn report(id: &str, pass: bool, detail: impl AsRef<str>) {
    REPORTED.store(true, Ordering::SeqCst);
    println!("{id} {} {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cfg(kind: SchemeKind, bw: f64, sigma_b: f64, r: f64, chi: f64) -> SchemeConfig {
    let geom = LinkGeometry::new(sigma_b, 0.5, 0.64).unwrap();
    SchemeConfig::new(kind, Squeezing::new(r).unwrap(), geom, bw, chi).unwrap()
}

fn e_ln(kind: SchemeKind, bw: f64, sigma_b: f64, r: f64, chi: f64) -> f64 {
    run(&cfg(kind, bw, sigma_b, r, chi)).unwrap().e_ln
}

/// `(σ_b, r)` grid of the three scheme figures.
fn figure_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for s in linspace(0.1, 1.5, 15) {
        for r in linspace(0.1, 2.0, 15) {
            g.push((s, r));
        }
    }
    g
}

const FIGURES: [f64; 3] = [1.0, 0.5, 0.4];

/// Uplink from A and downlink to B of the post-selection channel with
/// σ_b = β, k1 = 0.5, k2 = 0.64, β/W = 0.5.
fn ps1_channels() -> (FadingChannel, FadingChannel) {
    let links = expand_links(&LinkGeometry::new(1.0, 0.5, 0.64).unwrap(), 1.0, 2.0).unwrap();
    (links.a_up, links.b_down)
}

fn ps2_channels() -> (FadingChannel, FadingChannel) {
    (
        FadingChannel::with_ratio(22.0, 0.5).unwrap(),
        FadingChannel::with_ratio(2.0, 0.5).unwrap(),
    )
}

fn a1_tmsv_analytics() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 1.5, 2.0] {
        let e = log_negativity(&tmsv_cm(Squeezing::new(r).unwrap())).unwrap();
        worst = worst.max((e - 2.0 * r / std::f64::consts::LN_2).abs());
    }
    let el = t.elapsed();
    let pass = worst < 1e-10 && el < Duration::from_secs(1);
    report("A1", pass, format!("max |E_LN - 2r/ln2| = {worst:.2e}, {el:.2?}"));
    assert!(pass);
}

fn a2_lossless_swap_and_gain_equivalence() {
    let mut worst_lossless: f64 = 0.0;
    for r in [0.1, 0.5, 1.0, 1.5, 2.0] {
        let sq = Squeezing::new(r).unwrap();
        let e = swap_realization(sq, 1.0, 1.0, 0.0).unwrap().log_negativity().unwrap();
        worst_lossless = worst_lossless.max((e - (2.0 * r).cosh().log2()).abs());
    }
    // Random physical inputs with c₋ = −c₊ and f₋ = −f₊, from a fixed LCG.
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut uniform = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let (mut worst_equiv, mut n): (f64, usize) = (0.0, 0);
    while n < 100 {
        let (a, b, d, e) = (1.0 + 4.0 * uniform(), 1.0 + 4.0 * uniform(), 1.0 + 4.0 * uniform(), 1.0 + 4.0 * uniform());
        let c = (2.0 * uniform() - 1.0) * (a * b).sqrt();
        let f = (2.0 * uniform() - 1.0) * (d * e).sqrt();
        let Ok(inp) = GeneralBipartiteInput::new(a, b, (c, -c), d, e, (f, -f)) else {
            continue;
        };
        let g = SwapGains::optimal_for(&inp).unwrap();
        let diff = swap_ensemble_cm(&inp, g).unwrap().max_abs_diff(&swap_conditional(&inp).unwrap());
        worst_equiv = worst_equiv.max(diff);
        n += 1;
    }
    let pass = worst_lossless < 1e-10 && worst_equiv < 1e-10;
    report(
        "A2",
        pass,
        format!("lossless swap max err {worst_lossless:.2e}; averaged vs conditional on {n} inputs max err {worst_equiv:.2e}"),
    );
    assert!(pass);
}

fn a3_quoted_link_losses() {
    let t = Instant::now();
    let quad = QuadratureSpec::default();
    let (up4, down4) = ps1_channels();
    let (up5, down5) = ps2_channels();
    let cases: Vec<(&str, FadingChannel, f64)> = vec![
        ("bw=1 s=0.7", FadingChannel::with_ratio(0.7, 1.0).unwrap(), 3.0),
        ("bw=0.5 s=0.7", FadingChannel::with_ratio(0.7, 0.5).unwrap(), 5.4),
        ("bw=0.4 s=0.7", FadingChannel::with_ratio(0.7, 0.4).unwrap(), 6.7),
        ("ps1 up", up4, 6.4),
        ("ps1 down", down4, 4.4),
        ("ps2 up", up5, 30.0),
        ("ps2 down", down5, 10.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut literal = Vec::new();
    for (name, ch, target) in &cases {
        let db = ch.loss_db(&quad).unwrap();
        let amplitude_db = -10.0 * ch.mean_transmittance(&quad).unwrap().log10();
        pass &= (db - target).abs() <= 0.3;
        parts.push(format!("{name}: {db:.2} (quoted {target})"));
        literal.push(format!("{amplitude_db:.2}"));
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(10);
    report("A3", pass, format!("-10log10<eta^2> dB: {}; {el:.2?}", parts.join(", ")));
    println!("A3 note: -10log10<eta> gives [{}] dB, a systematic miss of the quoted losses", literal.join(", "));
    assert!(pass);
}

fn a4_scheme_ordering_on_fig1_grid() {
    let t = Instant::now();
    let grid = figure_grid();
    let rows: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&(s, r)| {
            [SchemeKind::Direct, SchemeKind::SatelliteSource, SchemeKind::Swap].map(|k| e_ln(k, 1.0, s, r, 0.0))
        })
        .collect();
    let sat_bad = rows.iter().filter(|e| e[1] < e[0] - 1e-12).count();
    let mut peak_bad = 0;
    for chunk in rows.chunks(15) {
        let direct = chunk.iter().map(|e| e[0]).fold(0.0, f64::max);
        let swap = chunk.iter().map(|e| e[2]).fold(0.0, f64::max);
        peak_bad += usize::from(swap > direct + 1e-12);
    }
    let el = t.elapsed();
    let pass = sat_bad == 0 && peak_bad == 0 && el < Duration::from_secs(120);
    report(
        "A4",
        pass,
        format!("satellite < direct at {sat_bad}/225 points; max_r swap > max_r direct at {peak_bad}/15 sigma_b; {el:.2?}"),
    );
    assert!(pass);
}

fn a5_excess_noise_reduction() {
    // Reduction of each scheme's peak E_LN over a 15x15 scheme grid.
    let grid = figure_grid();
    let kinds = [SchemeKind::Direct, SchemeKind::SatelliteSource, SchemeKind::Swap];
    let mut pass = true;
    let mut lines = Vec::new();
    for bw in FIGURES {
        for kind in kinds {
            let peak = |chi: f64| {
                grid.par_iter()
                    .map(|&(s, r)| e_ln(kind, bw, s, r, chi))
                    .reduce(|| 0.0, f64::max)
            };
            let base = peak(0.0);
            let mut cells = Vec::new();
            for chi in [0.01, 0.05] {
                let red = 1.0 - peak(chi) / base;
                let (lo, hi) = if kind == SchemeKind::Direct { (0.01, 0.12) } else { (0.03, 0.20) };
                let ok = (lo..=hi).contains(&red);
                pass &= ok;
                cells.push(format!("chi={chi}: {:.1}%{}", 100.0 * red, if ok { "" } else { " (out of band)" }));
            }
            lines.push(format!("bw={bw} {kind}: {}", cells.join(", ")));
        }
    }
    report("A5", pass, "peak E_LN reduction, direct band [1%,12%], satellite/swap band [3%,20%]");
    for l in &lines {
        println!("A5   {l}");
    }
    assert!(pass);
}

fn a6_postselection_tradeoff() {
    let (up, down) = ps1_channels();
    let sq = Squeezing::new(1.5).unwrap();
    let quad = QuadratureSpec::default();
    let try_classical = |z: f64| classical_postselect(sq, &up, &down, ClassicalPsConfig::new(z).unwrap(), &quad);
    let classical = |z: f64| try_classical(z).unwrap();
    // The sweep ends where the selection keeps nothing (P_s < 1e-12).
    let sweep: Vec<_> = linspace(0.0, 0.38, 39).into_iter().map_while(|z| try_classical(z).ok()).collect();
    let e_up = sweep.windows(2).all(|w| w[1].e_ln > w[0].e_ln);
    let p_down = sweep.windows(2).all(|w| w[1].p_success < w[0].p_success);

    // Quantum points, each compared with the classical threshold of equal P_s.
    let zeta_max = up.eta0() * down.eta0();
    let mut worst_gap = f64::INFINITY;
    let mut compared = 0;
    let tap = |q: f64| quantum_postselect(sq, &up, &down, QuantumPsConfig::new(0.93, q).unwrap(), &quad).unwrap();
    let mut q_prev = f64::NEG_INFINITY;
    let mut q_increasing = true;
    for q in linspace(-2.0, 4.0, 25) {
        let qr = tap(q);
        q_increasing &= qr.e_ln > q_prev;
        q_prev = qr.e_ln;
        let (mut lo, mut hi) = (0.0, zeta_max);
        if try_classical(0.999 * zeta_max).is_ok_and(|c| c.p_success > qr.p_success) {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if try_classical(mid).is_ok_and(|c| c.p_success > qr.p_success) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = classical(0.5 * (lo + hi));
        worst_gap = worst_gap.min(c.e_ln - qr.e_ln);
        compared += 1;
    }
    let pass = e_up && p_down && compared > 0 && worst_gap >= 0.0;
    report(
        "A6",
        pass,
        format!(
            "E_LN increasing {e_up}, P_s decreasing {p_down} over {} thresholds (last P_s {:.2e}); classical - quantum E_LN at matched P_s >= {worst_gap:.4} over {compared} points (quantum E_LN increasing in q_th: {q_increasing})",
            sweep.len(),
            sweep.last().unwrap().p_success
        ),
    );
    assert!(pass);
}

fn a7_high_loss_rate() {
    let t = Instant::now();
    let (up, down) = ps2_channels();
    let sq = Squeezing::new(1.5).unwrap();
    let quad = QuadratureSpec::default();
    let zeta_max = up.eta0() * down.eta0();
    // Lowest threshold on a fine scan that reaches E_LN > 1 gives the best rate.
    let found = linspace(0.0, zeta_max * 0.999, 400).into_iter().find_map(|z| {
        let res = classical_postselect(sq, &up, &down, ClassicalPsConfig::new(z).unwrap(), &quad).ok()?;
        (res.e_ln > 1.0).then_some((z, res))
    });
    let el = t.elapsed();
    let Some((z, res)) = found else {
        report("A7", false, "no threshold reaches E_LN > 1");
        panic!("A7");
    };
    let rate = rate_estimate(res.p_success, 1e8).unwrap();
    let pass = res.p_success < 1e-4 && (3.0..=5.0).contains(&rate.log10()) && el < Duration::from_secs(300);
    report(
        "A7",
        pass,
        format!(
            "zeta_th = {z:.4}: E_LN = {:.4}, P_s = {:.3e}, rate at 1e8 Hz = {rate:.3e} Hz; {el:.2?}",
            res.e_ln, res.p_success
        ),
    );
    assert!(pass);
}

/// Unnormalized accepted q-moments of the tapped Wigner function by direct
/// 2D integration over `(q_t ≥ q_th, q_B')`, with `q_A` integrated
/// analytically.
fn wigner_moments(v: f64, b_q: f64, c_q: f64, t: f64, q_th: f64) -> [f64; 6] {
    let r = 1.0 - t;
    let half = 12.0 * b_q.max(1.0).sqrt();
    let (lo, hi) = (q_th.max(-half), half.max(q_th + half));
    let n = 1200;
    let simpson = |i: usize| match i {
        0 => 1.0,
        i if i == n => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let gauss = |x: f64, var: f64| (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
    let a_cond = v - c_q * c_q / b_q;
    let mut acc = [0.0; 6];
    for i in 0..=n {
        let qt = lo + (hi - lo) * i as f64 / n as f64;
        let wi = simpson(i) * (hi - lo) / (3.0 * n as f64);
        for j in 0..=n {
            let qb = -half + 2.0 * half * j as f64 / n as f64;
            let wj = simpson(j) * 2.0 * half / (3.0 * n as f64);
            let q_in = t.sqrt() * qb + r.sqrt() * qt;
            let q_vac = t.sqrt() * qt - r.sqrt() * qb;
            let w = wi * wj * gauss(q_in, b_q) * gauss(q_vac, 1.0);
            let m = c_q / b_q * q_in;
            for (k, x) in [m, qb, m * m + a_cond, qb * qb, m * qb, 1.0].into_iter().enumerate() {
                acc[k] += w * x;
            }
        }
    }
    // Order of the closed form: q_A, q_B', q_A², q_B'², q_A q_B', P.
    acc
}

fn a8_oracle_equivalence() {
    const K: f64 = 4.0;
    let mc = McSpec::new(1_000_000, 20_240_601).unwrap();
    let mut checks = 0;
    let mut worst_z: f64 = 0.0;
    let mut note = |mean: f64, se: f64, x: f64| {
        checks += 1;
        let z = (x - mean).abs() / (se + 1e-300);
        worst_z = worst_z.max(if (x - mean).abs() <= 1e-12 * x.abs().max(1.0) { 0.0 } else { z });
    };

    for (bw, s, r, chi) in [(1.0, 0.7, 1.0, 0.0), (0.4, 1.2, 1.5, 0.05)] {
        for kind in [SchemeKind::Direct, SchemeKind::SatelliteSource, SchemeKind::Swap] {
            let c = cfg(kind, bw, s, r, chi);
            let cm = ensemble(&c).unwrap();
            let est = ensemble_mc(&c, &mc).unwrap();
            for (k, x) in [cm.get(0, 0), cm.get(2, 2), cm.get(0, 2)].into_iter().enumerate() {
                note(est.mean[k], est.std_err[k], x);
            }
        }
    }

    let (up, down) = ps1_channels();
    let sq = Squeezing::new(1.5).unwrap();
    let quad = QuadratureSpec::default();
    for z in [0.05, 0.2] {
        let cfg = ClassicalPsConfig::new(z).unwrap();
        let res = classical_postselect(sq, &up, &down, cfg, &quad).unwrap();
        let est = classical_postselect_mc(sq, &up, &down, cfg, &mc).unwrap();
        for (e, x) in est.iter().zip([res.p_success, res.cm.get(2, 2), res.cm.get(0, 2)]) {
            note(e.mean, e.std_err, x);
        }
    }
    for q in [0.0, 1.5] {
        let cfg = QuantumPsConfig::new(0.93, q).unwrap();
        let res = quantum_postselect(sq, &up, &down, cfg, &quad).unwrap();
        let moments = quantum_moments_ensemble(sq, &up, &down, cfg, &quad).unwrap();
        let (v, s) = (sq.v(), sq.correlation());
        let m = mc_moments(&mc, |rng| {
            let (eta, eta_p) = (up.draw(rng), down.draw(rng));
            let q = quantum_moments_realization(sq, eta, eta_p, &cfg).unwrap().as_array();
            let zeta = eta * eta_p;
            let p = q[5];
            [q[0], q[1], q[2], q[3], q[4], p, p * (0.93 * (1.0 + zeta * (v - 1.0)) + 0.07), -p * 0.93f64.sqrt() * zeta.sqrt() * s]
        });
        let p_s = moments[5];
        let quad_sums = [
            moments[0],
            moments[1],
            moments[2],
            moments[3],
            moments[4],
            p_s,
            res.cm.get(3, 3) * p_s,
            res.cm.get(1, 3) * p_s,
        ];
        for (k, x) in quad_sums.into_iter().enumerate() {
            note(m.mean()[k], m.std_err(k), x);
        }
    }
    let mc_pass = worst_z <= K;

    let mut worst_wigner: f64 = 0.0;
    for zeta in [0.1f64, 0.45, 0.9] {
        for r in [0.3, 1.0, 1.6] {
            for q_th in [-1.5, 0.0, 1.2] {
                let sq = Squeezing::new(r).unwrap();
                let cfg = QuantumPsConfig::new(0.93, q_th).unwrap();
                let closed = quantum_moments_realization(sq, zeta.sqrt(), zeta.sqrt(), &cfg).unwrap().as_array();
                let v = sq.v();
                let oracle = wigner_moments(v, 1.0 + zeta * (v - 1.0), zeta.sqrt() * sq.correlation(), 0.93, q_th);
                for k in 0..6 {
                    worst_wigner = worst_wigner.max((closed[k] - oracle[k]).abs());
                }
            }
        }
    }
    let pass = mc_pass && worst_wigner < 1e-6;
    report(
        "A8",
        pass,
        format!(
            "{checks} ensemble quantities vs 1e6-draw Monte Carlo, max |z| = {worst_z:.2} (limit {K}); tapped moments vs Wigner integration on 27 points, max err {worst_wigner:.2e}"
        ),
    );
    assert!(pass);
}

fn a9_effective_channel() {
    let grid = figure_grid();
    let kinds = [SchemeKind::Direct, SchemeKind::SatelliteSource, SchemeKind::Swap];
    let mut worst_rt: f64 = 0.0;
    let mut entangled = 0;
    let mut ineq_bad = 0;
    let mut outside_premise = 0;
    let mut bad_outside = 0;
    let mut points = 0;
    let (mut cm_level, mut cm_bad) = (0, 0);
    for bw in FIGURES {
        let results: Vec<_> = grid
            .par_iter()
            .map(|&(s, r)| {
                let mut rt: Vec<f64> = Vec::new();
                let mut products = [None; 3];
                for (k, kind) in kinds.into_iter().enumerate() {
                    let cm = ensemble(&cfg(kind, bw, s, r, 0.0)).unwrap();
                    if cm.log_negativity().unwrap() > 0.0 {
                        rt.push(round_trip_error(&cm).unwrap());
                        let p = to_effective(&cm.standard_form().unwrap()).unwrap();
                        products[k] = Some(p.eta_a * p.eta_b);
                    }
                }
                (rt, products, ordering_check(&cfg(SchemeKind::Direct, bw, s, r, 0.0)).unwrap())
            })
            .collect();
        for (rt, products, rep) in results {
            if let [Some(direct), _, Some(swap)] = products {
                cm_level += 1;
                cm_bad += usize::from(swap > direct);
            }
            points += 1;
            entangled += rt.len();
            worst_rt = rt.into_iter().fold(worst_rt, f64::max);
            if !rep.swap_le_direct {
                ineq_bad += 1;
                bad_outside += usize::from(!rep.premise_holds);
            }
            outside_premise += usize::from(!rep.premise_holds);
        }
    }
    let pass = worst_rt < 1e-9 && ineq_bad == 0;
    report(
        "A9",
        pass,
        format!(
            "round trip on {entangled} entangled outputs max err {worst_rt:.2e}; swap eta product > direct at {ineq_bad}/{points} grid points ({bad_outside} of them where some effective transmissivity leaves [0,1] or the swap squeezing average is undefined; {outside_premise} such points in total)"
        ),
    );
    println!(
        "A9 note: from the ensemble matrices themselves, swap eta product > direct at {cm_bad} of {cm_level} points where both are entangled"
    );
    assert!(pass);
}

fn main() -> ExitCode {
    let checks: [(&str, fn()); 9] = [
        ("A1", a1_tmsv_analytics),
        ("A2", a2_lossless_swap_and_gain_equivalence),
        ("A3", a3_quoted_link_losses),
        ("A4", a4_scheme_ordering_on_fig1_grid),
        ("A5", a5_excess_noise_reduction),
        ("A6", a6_postselection_tradeoff),
        ("A7", a7_high_loss_rate),
        ("A8", a8_oracle_equivalence),
        ("A9", a9_effective_channel),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (id, check) in checks {
        REPORTED.store(false, Ordering::SeqCst);
        if panic::catch_unwind(check).is_err() {
            if !REPORTED.load(Ordering::SeqCst) {
                println!("{id} FAIL aborted before reporting");
            }
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
