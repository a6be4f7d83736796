use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::*;
use crate::channel::{generate_scenario, ChannelRealization, Path, PathSet, ScenarioChannels};
use crate::codebook::{Codebook, PhaseConvention};
use crate::numerics::{dot, pseudo_inverse, CMatrix, RandomStream};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fa_design(k: usize, n_a: usize, n_t: usize, n_r: usize, l: usize, stream: &RandomStream) -> LinkDesign {
    let sc = generate_scenario(n_a, k, n_t, n_r, l, stream).unwrap();
    design_link(&sc, BeamSource::ArrayResponse).unwrap()
}

fn all_selections(k: usize, n_a: usize) -> Vec<Vec<usize>> {
    (0..n_a.pow(k as u32))
        .map(|mut code| {
            (0..k)
                .map(|_| {
                    let a = code % n_a;
                    code /= n_a;
                    a
                })
                .collect()
        })
        .collect()
}

#[test]
fn combiner_is_left_inverse_when_receive_array_is_large() {
    let root = RandomStream::new(1);
    for t in 0..20 {
        let d = fa_design(2, 4, 8, 6, 6, &root.child(t));
        for i in 0..2 {
            let hi = d.stacked_channel(i);
            let prod = &d.combiner_matrix(i).adjoint() * hi;
            let err = prod.sub(&CMatrix::identity(4)).unwrap().frobenius_norm();
            assert!(err < 1e-9, "trial {t} user {i}: {err}");
        }
    }
}

#[test]
fn single_receive_antenna_combiner_closed_form() {
    let root = RandomStream::new(2);
    for t in 0..20 {
        let d = fa_design(2, 4, 8, 1, 3, &root.child(t));
        for i in 0..2 {
            let h: Vec<Complex64> = (0..4).map(|a| d.response(i, a, i)[0]).collect();
            let energy: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            let w = d.combiner_matrix(i);
            for a in 0..4 {
                // w_{a,i} = h_a / Σ|h_b|², so w_{a,i}ᴴ = conj(h_a) / Σ|h_b|²
                let expected = h[a] / energy;
                assert!((w[(0, a)] - expected).norm() < 1e-12 * expected.norm().max(1.0));
            }
        }
    }
}

#[test]
fn scalar_case_precoder() {
    let d = fa_design(1, 1, 8, 1, 2, &RandomStream::new(3)).with_beta(0.7);
    let w = d.combiner_matrix(0)[(0, 0)];
    let hf = d.response(0, 0, 0)[0];
    let heff = d.effective_channel(&[0]).unwrap();
    assert_eq!((heff.rows(), heff.cols()), (1, 1));
    assert!((heff[(0, 0)] - w.conj() * hf).norm() < 1e-12);
    let p = d.precoder(&[0]).unwrap();
    assert!((p.matrix[(0, 0)] - c(0.7, 0.0) / heff[(0, 0)]).norm() < 1e-12);
}

#[test]
fn zf_identity_and_diagonal() {
    let p = zf_precoder(&CMatrix::identity(2), 1.0).unwrap();
    assert!(p.matrix.sub(&CMatrix::identity(2)).unwrap().frobenius_norm() < 1e-15);
    assert!(!p.degenerate);
    let p = zf_precoder(&CMatrix::diagonal(&[c(2.0, 0.0), c(4.0, 0.0)]), 1.0).unwrap();
    let expected = CMatrix::diagonal(&[c(0.5, 0.0), c(0.25, 0.0)]);
    assert!(p.matrix.sub(&expected).unwrap().frobenius_norm() < 1e-15);
}

#[test]
fn zf_random_well_conditioned() {
    let root = RandomStream::new(4);
    let mut checked = 0;
    for t in 0..200 {
        let v = crate::numerics::standard_complex_gaussian(&root.child(t), 4);
        let h = CMatrix::from_row_major(2, 2, v).unwrap();
        let beta = 0.3 + t as f64 * 0.01;
        let p = zf_precoder(&h, beta).unwrap();
        if p.condition > 1e4 {
            continue;
        }
        let target = CMatrix::identity(2).scale(c(beta, 0.0));
        let err = (&h * &p.matrix).sub(&target).unwrap().frobenius_norm() / target.frobenius_norm();
        assert!(err <= 1e-9, "{err}");
        checked += 1;
    }
    assert!(checked > 150);
}

#[test]
fn singular_effective_channel_is_flagged() {
    let h = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
    let p = zf_precoder(&h, 1.0).unwrap();
    assert!(p.degenerate);
    assert!(p.matrix.is_finite());
}

#[test]
fn beta_closed_forms() {
    for k in [1usize, 2, 4] {
        for (scale, expected) in [(1.0, 1.0), (2.0, 2.0)] {
            let heff = CMatrix::identity(k).scale(c(scale, 0.0));
            let trace = zf_precoder(&heff, 1.0).unwrap().matrix.frobenius_norm_sq();
            let sample = BetaSample {
                users: k,
                trace,
                degenerate: false,
            };
            for rule in [BetaRule::MeanOfRoot, BetaRule::RootOfMean] {
                let est = combine_beta(&[sample; 3], rule);
                assert!((est.beta - expected).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn beta_estimate_converges() {
    let draw = |s: &RandomStream| -> crate::Result<LinkDesign> {
        let sc = generate_scenario(4, 2, 8, 1, 3, s)?;
        design_link(&sc, BeamSource::ArrayResponse)
    };
    let small = estimate_beta(10_000, BetaRule::MeanOfRoot, &RandomStream::new(10), draw).unwrap();
    let large = estimate_beta(100_000, BetaRule::MeanOfRoot, &RandomStream::new(11), draw).unwrap();
    assert!((small.beta - large.beta).abs() / large.beta < 0.01, "{} vs {}", small.beta, large.beta);
    assert_eq!(large.realizations, 100_000);
}

#[test]
fn zero_noise_scalar_link_recovers_symbol() {
    let constellation = Constellation::new(4).unwrap();
    let d = fa_design(1, 1, 8, 1, 3, &RandomStream::new(5)).with_beta(0.4);
    let mut rng = RandomStream::new(0).rng();
    for label in 0..4 {
        let frame = TxFrame::from_indices(&[0], &[label], &constellation);
        let p = d.precoder(&[0]).unwrap();
        let r = transmit(&frame, &d, &p, 1.0, 0.0, &mut rng).unwrap();
        let z = dot(&d.combiner_matrix(0).column(0), &r[0]) / d.beta();
        assert!((z - constellation.point(label)).norm() < 1e-12);
    }
}

#[test]
fn zero_noise_two_users_zf_cancellation() {
    let constellation = Constellation::new(4).unwrap();
    let root = RandomStream::new(6);
    let mut rng = root.named("bits").rng();
    let mut checked = 0;
    for t in 0..100 {
        let d = fa_design(2, 4, 8, 1, 3, &root.child(t)).with_beta(0.2);
        for sel in all_selections(2, 4) {
            let p = d.precoder(&sel).unwrap();
            if p.condition > 1e6 {
                continue;
            }
            let labels = [rng.random_range(0..4), rng.random_range(0..4)];
            let frame = TxFrame::from_indices(&sel, &labels, &constellation);
            let r = transmit(&frame, &d, &p, 1.0, 0.0, &mut rng).unwrap();
            for i in 0..2 {
                let z = dot(&d.combiner_matrix(i).column(sel[i]), &r[i]);
                let target = constellation.point(labels[i]) * d.beta();
                assert!((z - target).norm() <= 1e-8 * d.beta(), "trial {t} sel {sel:?}");
            }
            checked += 1;
        }
    }
    assert!(checked > 1500);
}

#[test]
fn noise_power_matches_sigma() {
    let d = fa_design(1, 1, 8, 2, 3, &RandomStream::new(7));
    let constellation = Constellation::new(2).unwrap();
    let p = d.precoder(&[0]).unwrap();
    let frame = TxFrame::from_indices(&[0], &[0], &constellation);
    let mut rng = RandomStream::new(8).rng();
    let n = 100_000;
    let sigma2 = 0.37;
    let total: f64 = (0..n)
        .map(|_| {
            let r = transmit(&frame, &d, &p, 0.0, sigma2, &mut rng).unwrap();
            r[0].iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum();
    let mean = total / n as f64;
    assert!((mean - 2.0 * sigma2).abs() / (2.0 * sigma2) < 0.01, "{mean}");
}

#[test]
fn zero_noise_detection_is_exact() {
    let constellation = Constellation::new(4).unwrap();
    let root = RandomStream::new(9);
    let mut total = FrameCounts::default();
    for t in 0..100 {
        let d = fa_design(2, 4, 8, 1, 3, &root.child(t)).with_beta(0.18);
        total += run_frame(&d, &constellation, 100, 1.0, 0.0, &mut root.child(t).named("use").rng()).unwrap();
    }
    assert_eq!(total.uses, 10_000);
    assert_eq!(total.degenerate_uses, 0);
    assert_eq!(total.errors(), 0);
}

#[test]
fn bpsk_nearest_neighbour() {
    // single array, single antenna: choose r so that wᴴ r / β = 0.9
    let paths = PathSet::new(vec![Path {
        gain: c(1.0, 0.5),
        aod: 0.2,
        aoa: 0.0,
    }])
    .unwrap();
    let ch = ChannelRealization::from_paths(paths, 8, 1).unwrap();
    let sc = ScenarioChannels::from_grid(1, 1, vec![ch]).unwrap();
    let d = design_link(&sc, BeamSource::ArrayResponse).unwrap().with_beta(0.5);
    let w = d.combiner_matrix(0)[(0, 0)];
    let r = vec![c(0.9 * 0.5, 0.0) / w.conj()];
    let bpsk = Constellation::new(2).unwrap();
    let det = ml_detect(&r, &d, 0, &bpsk, d.beta());
    assert_eq!(det, Detection { array: 0, label: 0 });
    assert_eq!(bpsk.point(det.label), c(1.0, 0.0));
}

/// Independent hypothesis scan: recompute W_i from H_i and evaluate all
/// (a, m) distances as a matrix product.
fn brute_force_detect(r: &[Complex64], hi: &CMatrix, constellation: &Constellation, scale: f64) -> Detection {
    let w = pseudo_inverse(hi).unwrap().adjoint();
    let z = w.adjoint().mul_vec(r).unwrap();
    let mut best = (f64::INFINITY, 0, 0);
    for (a, za) in z.iter().enumerate() {
        for (m, s) in constellation.points().iter().enumerate() {
            let d = (za / scale - s).norm_sqr();
            if d < best.0 {
                best = (d, a, m);
            }
        }
    }
    Detection {
        array: best.1,
        label: best.2,
    }
}

#[test]
fn detector_matches_brute_force_scan() {
    let root = RandomStream::new(12);
    let mut rng = root.named("noise").rng();
    for (t, m) in (0..300).zip([2usize, 4, 16].into_iter().cycle()) {
        let constellation = Constellation::new(m).unwrap();
        let n_r = 1 + t % 3;
        let d = fa_design(2, 4, 8, n_r, 3, &root.child(t as u64)).with_beta(0.2);
        let sel = random_selection(2, 4, &mut rng);
        let labels = [rng.random_range(0..m), rng.random_range(0..m)];
        let frame = TxFrame::from_indices(&sel, &labels, &constellation);
        let p = d.precoder(&sel).unwrap();
        let rho = 10f64.powf(rng.random_range(-1.0..3.0));
        let r = transmit(&frame, &d, &p, rho, 1.0, &mut rng).unwrap();
        let scale = detection_scale(d.beta(), rho);
        for i in 0..2 {
            let fast = ml_detect(&r[i], &d, i, &constellation, scale);
            let slow = brute_force_detect(&r[i], d.stacked_channel(i), &constellation, scale);
            assert_eq!(fast, slow, "trial {t} user {i}");
        }
    }
}

#[test]
fn detection_invariant_to_common_rescaling() {
    let root = RandomStream::new(13);
    let constellation = Constellation::new(16).unwrap();
    let mut rng = root.named("x").rng();
    for t in 0..100 {
        let d = fa_design(2, 4, 8, 1, 3, &root.child(t)).with_beta(0.2);
        let r: Vec<Complex64> = vec![crate::numerics::complex_gaussian(&mut rng)];
        let base = ml_detect(&r, &d, 0, &constellation, 0.3);
        // scaling r and the detector gain together scales every distance by the same factor
        let k = 3.7;
        let scaled: Vec<Complex64> = r.iter().map(|z| z * k).collect();
        assert_eq!(base, ml_detect(&scaled, &d, 0, &constellation, 0.3 * k));
    }
}

#[test]
fn frame_accounting_adds_up() {
    let constellation = Constellation::new(4).unwrap();
    let cb = Codebook::beamsteering(4, 8, PhaseConvention::Sine).unwrap();
    let root = RandomStream::new(14);
    let sc = generate_scenario(4, 2, 8, 1, 3, &root).unwrap();
    let d = design_link(&sc, BeamSource::Shared(&cb)).unwrap().with_beta(0.2);
    assert!(d.beam(0, 0).is_some());
    let counts = run_frame(&d, &constellation, 500, 100.0, 1.0, &mut root.named("u").rng()).unwrap();
    assert_eq!(counts.uses, 500);
    assert_eq!(counts.spatial_bits, 500 * 2 * 2);
    assert_eq!(counts.symbol_bits, 500 * 2 * 2);
    assert_eq!(counts.errors(), counts.spatial_errors + counts.symbol_errors);
    assert!(counts.errors() <= counts.bits());
}

#[test]
fn selection_validation() {
    let d = fa_design(2, 4, 8, 1, 3, &RandomStream::new(15));
    assert!(d.effective_channel(&[0]).is_err());
    assert!(d.effective_channel(&[0, 4]).is_err());
}
