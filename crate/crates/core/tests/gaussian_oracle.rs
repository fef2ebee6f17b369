use cvsat_core::gaussian::{
    add_excess_noise, apply_loss, log_negativity, symplectic_spectrum_pt, tmsv_cm, Squeezing,
    StandardFormCM, TwoModeCM,
};
use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn omega() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    for k in [0, 2] {
        o[(k, k + 1)] = 1.0;
        o[(k + 1, k)] = -1.0;
    }
    o
}

fn to_na(cm: &TwoModeCM) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| cm.get(i, j))
}

/// Moduli of the eigenvalues of `iΩM`, sorted; each appears twice.
fn brute_spectrum(m: &Matrix4<f64>) -> (f64, f64) {
    let mut nus: Vec<f64> = (omega() * m).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
    nus.sort_by(f64::total_cmp);
    (0.5 * (nus[0] + nus[1]), 0.5 * (nus[2] + nus[3]))
}

fn brute_pt_spectrum(cm: &TwoModeCM) -> (f64, f64) {
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    brute_spectrum(&(flip * to_na(cm) * flip))
}

fn rotation(theta_a: f64, theta_b: f64) -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    for (k, t) in [(0, theta_a), (2, theta_b)] {
        s[(k, k)] = t.cos();
        s[(k, k + 1)] = t.sin();
        s[(k + 1, k)] = -t.sin();
        s[(k + 1, k + 1)] = t.cos();
    }
    s
}

fn squeezers(sa: f64, sb: f64) -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new((-sa).exp(), sa.exp(), (-sb).exp(), sb.exp()))
}

fn beam_splitter(tau: f64) -> Matrix4<f64> {
    let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
    let mut s = Matrix4::zeros();
    for k in 0..2 {
        s[(k, k)] = t;
        s[(k + 2, k + 2)] = t;
        s[(k, k + 2)] = r;
        s[(k + 2, k)] = -r;
    }
    s
}

/// `S diag(ν₁, ν₁, ν₂, ν₂) Sᵀ` for a random symplectic `S`.
fn random_cm(rng: &mut ChaCha8Rng) -> TwoModeCM {
    let nu1 = 1.0 + rng.random::<f64>() * 2.0;
    let nu2 = 1.0 + rng.random::<f64>() * 2.0;
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let mut s = Matrix4::identity();
    for _ in 0..3 {
        s = rotation(rng.random::<f64>() * 6.3, rng.random::<f64>() * 6.3) * s;
        s = squeezers(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * s;
        s = beam_splitter(rng.random::<f64>()) * s;
    }
    let m = s * d * s.transpose();
    let m = 0.5 * (m + m.transpose());
    let rows: [[f64; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|j| m[(i, j)]));
    TwoModeCM::new(rows).expect("random symplectic image is physical")
}

fn random_standard(rng: &mut ChaCha8Rng) -> StandardFormCM {
    loop {
        let a = 1.0 + rng.random::<f64>() * 4.0;
        let b = 1.0 + rng.random::<f64>() * 4.0;
        let bound = (a * b).sqrt();
        let cp = (rng.random::<f64>() * 2.0 - 1.0) * bound;
        let cm = (rng.random::<f64>() * 2.0 - 1.0) * bound;
        if let Ok(sf) = StandardFormCM::new(a, b, cp, cm) {
            return sf;
        }
    }
}

#[test]
fn pt_spectrum_matches_eigenvalues_on_standard_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let sf = random_standard(&mut rng);
        let (lo, hi) = symplectic_spectrum_pt(&sf).unwrap();
        let (blo, bhi) = brute_pt_spectrum(&sf.to_cm());
        assert!((lo - blo).abs() < 1e-10 && (hi - bhi).abs() < 1e-10, "{sf:?}: {lo} {hi} vs {blo} {bhi}");
        let det = sf.to_cm().determinant();
        assert!((lo * hi - det.sqrt()).abs() < 1e-10 * det.sqrt().max(1.0));
    }
}

#[test]
fn invariant_spectra_match_eigenvalues_on_general_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let cm = random_cm(&mut rng);
        let (lo, hi) = cm.pt_symplectic_spectrum().unwrap();
        let (blo, bhi) = brute_pt_spectrum(&cm);
        assert!((lo - blo).abs() < 1e-10 * hi && (hi - bhi).abs() < 1e-10 * hi);
        let (lo, hi) = cm.symplectic_spectrum().unwrap();
        let (blo, bhi) = brute_spectrum(&to_na(&cm));
        // Close eigenvalues lose half their digits in either method.
        let tol = if bhi - blo < 1e-3 { 1e-6 } else { 1e-9 };
        assert!((lo - blo).abs() < tol * hi && (hi - bhi).abs() < tol * hi);
    }
}

#[test]
fn spec_example_two_two_one() {
    let sf = StandardFormCM::new(2.0, 2.0, 1.0, -1.0).unwrap();
    let (lo, _) = symplectic_spectrum_pt(&sf).unwrap();
    let (blo, _) = brute_pt_spectrum(&sf.to_cm());
    assert!((lo - blo).abs() < 1e-10);
    assert!((lo - 1.0).abs() < 1e-12);
}

#[test]
fn tmsv_log_negativity() {
    for r in [0.1, 0.5, 1.0, 1.5, 2.0] {
        let e = log_negativity(&tmsv_cm(Squeezing::new(r).unwrap())).unwrap();
        assert!((e - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-10, "r={r}");
    }
}

#[test]
fn tmsv_pt_minimum_is_exp_minus_two_r() {
    let cm = tmsv_cm(Squeezing::new(1.0).unwrap());
    let (blo, _) = brute_pt_spectrum(&cm);
    assert!((blo - (-2.0f64).exp()).abs() < 1e-12);
    assert!((blo - 0.135_335).abs() < 1e-6);
}

proptest! {
    #[test]
    fn loss_never_increases_entanglement(
        r in 0.0f64..2.5,
        eta_a in 0.0f64..=1.0,
        eta_b in 0.0f64..=1.0,
        shrink in 0.0f64..=1.0,
    ) {
        let tm = tmsv_cm(Squeezing::new(r).unwrap());
        let base = apply_loss(&tm, eta_a, eta_b).unwrap();
        let less_a = apply_loss(&tm, eta_a * shrink, eta_b).unwrap();
        let less_b = apply_loss(&tm, eta_a, eta_b * shrink).unwrap();
        let e = base.log_negativity().unwrap();
        prop_assert!(less_a.log_negativity().unwrap() <= e + 1e-12);
        prop_assert!(less_b.log_negativity().unwrap() <= e + 1e-12);
    }

    #[test]
    fn maps_preserve_physicality(
        r in 0.0f64..2.5,
        eta_a in 0.0f64..=1.0,
        eta_b in 0.0f64..=1.0,
        chi_a in 0.0f64..0.2,
        chi_b in 0.0f64..0.2,
    ) {
        let tm = tmsv_cm(Squeezing::new(r).unwrap());
        let out = add_excess_noise(&apply_loss(&tm, eta_a, eta_b).unwrap(), chi_a, chi_b).unwrap();
        prop_assert!(out.check_physical(1e-9).is_ok());
        let (lo, hi) = out.symplectic_spectrum().unwrap();
        prop_assert!((lo * hi - out.determinant().sqrt()).abs() < 1e-10 * hi * hi);
    }

    #[test]
    fn noise_never_increases_entanglement(r in 0.0f64..2.5, eta in 0.0f64..=1.0, chi in 0.0f64..0.2) {
        let lossy = apply_loss(&tmsv_cm(Squeezing::new(r).unwrap()), 1.0, eta).unwrap();
        let noisy = add_excess_noise(&lossy, 0.0, chi).unwrap();
        prop_assert!(noisy.log_negativity().unwrap() <= lossy.log_negativity().unwrap() + 1e-12);
    }
}
