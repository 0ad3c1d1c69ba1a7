use std::f64::consts::PI;

use odikit::metrics::*;
use odikit::ImageGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(seed: u64, h: usize, w: usize, c: usize) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageGrid::from_fn(h, w, c, |_, _, _| rng.gen_range(0.0..1.0))
}

/// SSIM evaluated window by window with explicit double sums.
fn ssim_oracle(a: &ImageGrid, b: &ImageGrid) -> f64 {
    let g: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / (2.0 * 1.5 * 1.5)).exp()).collect();
    let gs: f64 = g.iter().sum();
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let (h, w) = (a.height(), a.width());
    let mut total = 0.0;
    let mut count = 0.0;
    for top in 0..=h - 11 {
        for left in 0..=w - 11 {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let wt = g[i] * g[j] / (gs * gs);
                    let x = a.get(top + i, left + j, 0);
                    let y = b.get(top + i, left + j, 0);
                    ma += wt * x;
                    mb += wt * y;
                    saa += wt * x * x;
                    sbb += wt * y * y;
                    sab += wt * x * y;
                }
            }
            let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1.0;
        }
    }
    total / count
}

#[test]
fn ssim_matches_direct_windows() {
    for seed in 0..4 {
        let a = random_image(seed, 20, 24, 1);
        let b = ImageGrid::from_fn(20, 24, 1, |m, n, _| 0.6 * a.get(m, n, 0) + 0.2 * ((m * n) % 5) as f64 / 5.0);
        let s = ssim(&a, &b).unwrap();
        assert!((s - ssim_oracle(&a, &b)).abs() < 1e-12, "{s}");
    }
}

#[test]
fn constant_error_psnr() {
    let a = ImageGrid::filled(64, 128, 3, 0.2);
    let b = ImageGrid::filled(64, 128, 3, 0.2 + 16.0 / 255.0);
    let expect = 20.0 * (255.0f64 / 16.0).log10();
    assert!((expect - 24.0484).abs() < 1e-4);
    let p = psnr(&a, &b).unwrap();
    assert!((p - expect).abs() < 1e-9);
    assert!((ws_psnr(&a, &b, &WeightMap::erp(64, 128)).unwrap() - p).abs() < 1e-9);
}

#[test]
fn polar_error_is_discounted() {
    let a = random_image(3, 64, 128, 1);
    let mut b = a.clone();
    for n in 0..128 {
        b.set(0, n, 0, a.get(0, n, 0) + 0.1);
    }
    // brute-force weighted mean of squared errors
    let (mut num, mut den, mut plain) = (0.0, 0.0, 0.0);
    for m in 0..64 {
        let w = (((m as f64 + 0.5) / 64.0 - 0.5) * PI).cos();
        for n in 0..128 {
            let e = (a.get(m, n, 0) - b.get(m, n, 0)).powi(2);
            num += w * e;
            den += w;
            plain += e;
        }
    }
    let ws_expect = 10.0 * (den / num).log10();
    let plain_expect = 10.0 * ((64.0 * 128.0) / plain).log10();
    let ws = ws_psnr(&a, &b, &WeightMap::erp(64, 128)).unwrap();
    let p = psnr(&a, &b).unwrap();
    assert!((ws - ws_expect).abs() < 1e-9 && (p - plain_expect).abs() < 1e-9);
    assert!(ws > p);
}

#[test]
fn constant_weights_collapse() {
    let a = random_image(4, 32, 64, 3);
    let b = random_image(5, 32, 64, 3);
    for value in [0.3, 1.0, 7.0] {
        let w = WeightMap::constant(32, 64, value);
        assert!((ws_psnr(&a, &b, &w).unwrap() - psnr(&a, &b).unwrap()).abs() < 1e-12);
        assert!((ws_ssim(&a, &b, &w).unwrap() - ssim(&a, &b).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn anti_correlated_checkerboard() {
    let a = ImageGrid::from_fn(16, 16, 1, |m, n, _| ((m + n) % 2) as f64);
    let b = ImageGrid::from_fn(16, 16, 1, |m, n, _| 1.0 - a.get(m, n, 0));
    assert!(ssim(&a, &b).unwrap() < 0.0);
}

#[test]
fn erp_weights_formula() {
    let w = WeightMap::erp(6, 12);
    for m in 0..6 {
        let expect = (((m as f64 + 0.5) / 6.0 - 0.5) * PI).cos();
        for n in 0..12 {
            assert!((w.get(m, n) - expect).abs() < 1e-15);
            assert!(w.get(m, n) > 0.0);
        }
    }
}

#[test]
fn shape_and_size_errors() {
    let a = ImageGrid::filled(16, 32, 1, 0.5);
    let b = ImageGrid::filled(16, 30, 1, 0.5);
    assert!(matches!(psnr(&a, &b), Err(odikit::Error::ShapeMismatch(_))));
    let tiny = ImageGrid::filled(8, 16, 1, 0.5);
    assert!(matches!(ssim(&tiny, &tiny), Err(odikit::Error::TooSmall(_))));
}

#[test]
fn metric_set_is_symmetric() {
    let a = random_image(6, 24, 48, 3);
    let b = random_image(7, 24, 48, 3);
    let ab = MetricSet::evaluate(&a, &b).unwrap();
    let ba = MetricSet::evaluate(&b, &a).unwrap();
    assert!((ab.psnr - ba.psnr).abs() < 1e-12 && (ab.ssim - ba.ssim).abs() < 1e-12);
    assert!((ab.ws_psnr - ba.ws_psnr).abs() < 1e-12 && (ab.ws_ssim - ba.ws_ssim).abs() < 1e-12);
    let mean = MetricSet::mean(&[ab, MetricSet::evaluate(&a, &a).unwrap()]).unwrap();
    assert!((mean.psnr - (ab.psnr + PSNR_CAP_DB) / 2.0).abs() < 1e-12);
    assert!(MetricSet::mean(&[]).is_none());
}
