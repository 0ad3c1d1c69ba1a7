use odikit::degradation::*;
use odikit::geometry::ProjectionSpec;
use odikit::metrics::psnr;
use odikit::resample::resize_antialiased;
use odikit::synthetic::SphericalHarmonicField;
use odikit::ImageGrid;

fn smooth(height: usize) -> ImageGrid {
    SphericalHarmonicField::new(8, 1, 2).render_erp(height)
}

fn row_mad(a: &ImageGrid, b: &ImageGrid, rows: impl Iterator<Item = usize>) -> f64 {
    let (mut sum, mut count) = (0.0, 0.0);
    for m in rows {
        for n in 0..a.width() {
            for c in 0..a.channels() {
                sum += (a.get(m, n, c) - b.get(m, n, c)).abs();
                count += 1.0;
            }
        }
    }
    sum / count
}

#[test]
fn difference_concentrates_at_high_latitude() {
    let hr = smooth(256);
    for scale in [2, 4, 8] {
        let fish = fisheye_downsample(&hr, &DegradationConfig::with_scale(scale)).unwrap();
        let plain = erp_downsample(&hr, scale).unwrap();
        let h = fish.height();
        let band = h / 5;
        let polar = row_mad(&fish, &plain, (0..band).chain(h - band..h));
        let middle = row_mad(&fish, &plain, 2 * band..3 * band);
        assert!(polar > 0.0 && middle > 0.0);
        assert!(polar >= 2.0 * middle, "x{scale}: polar {polar:.3e} middle {middle:.3e}");
    }
}

#[test]
fn equator_agrees_with_erp_downsampling() {
    let h = 256;
    let hr = smooth(h);
    let scale = 4;
    let fish = fisheye_downsample(&hr, &DegradationConfig::with_scale(scale)).unwrap();
    let plain = erp_downsample(&hr, scale).unwrap();
    // interior interpolation error of plain downsampling against the field
    // rendered directly at the low resolution
    let direct = SphericalHarmonicField::new(8, 1, 2).render_erp(h / scale);
    let lr = h / scale;
    let interior = row_mad(&plain, &direct, 2 * lr / 5..3 * lr / 5);
    let equator = row_mad(&fish, &plain, lr / 2 - 1..lr / 2 + 1);
    assert!(equator <= 2.0 * interior, "equator {equator:.3e} interior {interior:.3e}");
}

#[test]
fn no_seam_at_hemisphere_split() {
    let hr = smooth(256);
    let fish = fisheye_downsample(&hr, &DegradationConfig::with_scale(2)).unwrap();
    let h = fish.height();
    let grad = |m: usize| -> f64 {
        (0..fish.width()).map(|n| (fish.get(m + 1, n, 0) - fish.get(m, n, 0)).abs()).sum::<f64>() / fish.width() as f64
    };
    // the split lies between rows h/2 - 1 and h/2
    let seam = grad(h / 2 - 1);
    let neighbours = (grad(h / 2 - 3) + grad(h / 2 - 2) + grad(h / 2) + grad(h / 2 + 1)) / 4.0;
    assert!(seam <= 3.0 * neighbours, "seam {seam:.3e} neighbours {neighbours:.3e}");
}

#[test]
fn unit_scale_round_trip() {
    let hr = smooth(128);
    let out = fisheye_downsample(&hr, &DegradationConfig::with_scale(1)).unwrap();
    let spec = ProjectionSpec::erp(128);
    let rows: Vec<usize> = (0..128)
        .filter(|&m| spec.sphere_from_pixel(m as f64, 0.0).unwrap().phi().abs() < 75f64.to_radians())
        .collect();
    let (top, count) = (rows[0], rows.len());
    let a = hr.crop(top, 0, count, 256).unwrap();
    let b = out.crop(top, 0, count, 256).unwrap();
    let p = psnr(&a, &b).unwrap();
    assert!(p >= 40.0, "{p}");
}

#[test]
fn constant_survives_every_scale() {
    let hr = ImageGrid::filled(128, 256, 3, 0.35);
    for scale in [2, 4, 8, 16] {
        let lr = fisheye_downsample(&hr, &DegradationConfig::with_scale(scale)).unwrap();
        assert_eq!(lr.shape(), (128 / scale, 256 / scale, 3));
        assert!(lr.data().iter().all(|v| (v - 0.35).abs() < 1e-6), "x{scale}");
    }
}

#[test]
fn supersampled_disks_and_threads() {
    let hr = smooth(64);
    let cfg = DegradationConfig {
        fisheye_resolution: Some(128),
        ..DegradationConfig::with_scale(2)
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| fisheye_downsample(&hr, &cfg).unwrap());
    let multi = fisheye_downsample(&hr, &cfg).unwrap();
    assert_eq!(single.shape(), (32, 64, 1));
    assert!(single.data().iter().zip(multi.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn erp_downsample_is_plain_resize() {
    let hr = smooth(64);
    let a = erp_downsample(&hr, 4).unwrap();
    let b = resize_antialiased(&hr, 16, 32).unwrap();
    assert_eq!(a, b);
    assert!(erp_downsample(&hr, 3).is_err());
}
