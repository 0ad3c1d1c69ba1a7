use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use odikit::geometry::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sphere(rng: &mut impl Rng, max_abs_phi: f64) -> SphericalCoord {
    // area-uniform latitude
    let z: f64 = rng.gen_range(-max_abs_phi.sin()..max_abs_phi.sin());
    SphericalCoord::new(rng.gen_range(-PI..PI), z.asin()).unwrap()
}

fn random_disk(rng: &mut impl Rng, rho_lo: f64, rho_hi: f64) -> PlaneCoord {
    let rho = rng.gen_range(rho_lo..rho_hi);
    let a = rng.gen_range(-PI..PI);
    PlaneCoord::new(rho * a.cos(), rho * a.sin())
}

fn angular_gap(a: SphericalCoord, b: SphericalCoord) -> f64 {
    let (u, v) = (a.to_vector(), b.to_vector());
    let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[test]
fn erp_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let s = random_sphere(&mut rng, FRAC_PI_2);
        let back = sphere_from_erp(erp_from_sphere(s)).unwrap();
        assert!((back.theta() - s.theta()).abs() < 1e-12 && (back.phi() - s.phi()).abs() < 1e-12);
    }
}

#[test]
fn fisheye_round_trip_all_variants() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let variants = [
        FisheyeParams::horizontal(PI),
        FisheyeParams::horizontal(200f64.to_radians()),
        FisheyeParams::horizontal(PI).with_hemisphere(Hemisphere::South),
        FisheyeParams::horizontal(PI).with_shift(0.4, FRAC_PI_6),
        FisheyeParams::horizontal(2.0).with_shift(-1.0, FRAC_PI_4),
    ];
    for params in &variants {
        for _ in 0..10_000 {
            // sample on the disk so every point is inside the aperture
            let p = random_disk(&mut rng, 1e-3, 0.999);
            let s = match sphere_from_fisheye(p, params) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let q = fisheye_from_sphere(s, params).unwrap();
            assert!((q.x - p.x).abs() < 1e-10 && (q.y - p.y).abs() < 1e-10, "{params:?} {p:?} {q:?}");
            let s2 = sphere_from_fisheye(q, params).unwrap();
            assert!(angular_gap(s, s2) < 1e-10);
        }
    }
}

#[test]
fn perspective_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let params = PerspectiveParams::new(
            rng.gen_range(0.2..3.0),
            rng.gen_range(-PI..PI),
            rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
        );
        let t = params.half_extent().min(20.0);
        let p = PlaneCoord::new(rng.gen_range(-t..t), rng.gen_range(-t..t));
        let s = sphere_from_perspective(p, &params);
        let hit = perspective_from_sphere(s, &params).unwrap();
        assert!(hit.within_fov);
        let tol = 1e-10 * (1.0 + p.x * p.x + p.y * p.y);
        assert!((hit.point.x - p.x).abs() < tol && (hit.point.y - p.y).abs() < tol, "{p:?} {:?}", hit.point);
        assert!(angular_gap(s, sphere_from_perspective(hit.point, &params)) < 1e-10);
    }
}

#[test]
fn raster_round_trips() {
    let specs = [
        ProjectionSpec::erp(64),
        ProjectionSpec::fisheye(80, FisheyeParams::horizontal(PI)),
        ProjectionSpec::fisheye(80, FisheyeParams::horizontal(PI).with_hemisphere(Hemisphere::South)),
        ProjectionSpec::perspective(48, 64, PerspectiveParams::new(FRAC_PI_2, 0.3, -0.4)),
    ];
    for spec in &specs {
        for m in 0..spec.height {
            for n in 0..spec.width {
                let Ok(s) = spec.sphere_from_pixel(m as f64, n as f64) else { continue };
                let (r, c) = spec.pixel_from_sphere(s).unwrap();
                assert!((r - m as f64).abs() < 1e-9 && (c - n as f64).abs() < 1e-9, "{spec:?} ({m},{n}) -> ({r},{c})");
            }
        }
    }
}

fn jacobian_check(map: ProjectionMap<'_>, s: SphericalCoord, closed: f64) {
    let numeric = numeric_stretch(map, s, 1e-5).unwrap();
    assert!((numeric - closed).abs() < 1e-5, "{map:?} at {s:?}: {numeric} vs {closed}");
}

#[test]
fn jacobian_identity_erp() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let s = random_sphere(&mut rng, FRAC_PI_2 - 1e-2);
        jacobian_check(ProjectionMap::Erp, s, stretch_erp(erp_from_sphere(s)).unwrap());
    }
}

#[test]
fn jacobian_identity_fisheye() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for delta_phi in [0.0, FRAC_PI_6, FRAC_PI_4] {
        let params = FisheyeParams::horizontal(PI).with_shift(0.0, delta_phi);
        let mut checked = 0;
        while checked < 1000 {
            let p = random_disk(&mut rng, 0.05, 0.95);
            let s = sphere_from_fisheye(p, &params).unwrap();
            // keep the finite-difference stencil away from the poles
            if s.phi().abs() > FRAC_PI_2 - 1e-3 {
                continue;
            }
            jacobian_check(ProjectionMap::Fisheye(&params), s, stretch_fisheye(p, &params).unwrap());
            checked += 1;
        }
    }
}

#[test]
fn jacobian_identity_perspective() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let params = PerspectiveParams::new(FRAC_PI_2, rng.gen_range(-PI..PI), rng.gen_range(-1.2..1.2));
        let p = PlaneCoord::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = sphere_from_perspective(p, &params);
        if s.phi().abs() > FRAC_PI_2 - 1e-3 {
            continue;
        }
        jacobian_check(ProjectionMap::Perspective(&params), s, stretch_perspective(p).unwrap());
    }
}

#[test]
fn erp_over_fisheye_ratio_on_latitude_grid() {
    let params = FisheyeParams::horizontal(PI);
    for k in 0..64 {
        // northern disk covers φ ≥ 0, its mirror covers the south
        let phi = -FRAC_PI_2 + (k as f64 + 0.5) * PI / 64.0;
        let s = SphericalCoord::new(0.7, phi).unwrap();
        let disk = if phi >= 0.0 { params } else { params.with_hemisphere(Hemisphere::South) };
        let pf = fisheye_from_sphere(s, &disk).unwrap();
        let ratio = stretch_erp(erp_from_sphere(s)).unwrap() / stretch_fisheye(pf, &disk).unwrap();
        assert!((ratio - stretch_erp_over_fisheye(phi).unwrap()).abs() < 1e-8);
        assert!((ratio - (FRAC_PI_2 - phi.abs())).abs() < 1e-8);
    }
}

#[test]
fn fisheye_distortion_is_bounded_but_erp_diverges() {
    let params = FisheyeParams::horizontal(PI);
    let mut worst: f64 = 0.0;
    for k in 1..=1000 {
        let rho = k as f64 / 1000.0;
        let inv = 1.0 / stretch_fisheye(PlaneCoord::new(rho, 0.0), &params).unwrap();
        assert!(inv <= FRAC_PI_2 + 1e-12);
        worst = worst.max(inv);
    }
    assert!((worst - FRAC_PI_2).abs() < 1e-12);
    for k in 0..100 {
        let y = FRAC_PI_2 - 1e-3 + k as f64 * 1e-5;
        assert!(stretch_erp(PlaneCoord::new(0.0, y)).unwrap() < 1e-3);
    }
}

#[test]
fn out_of_domain_errors() {
    let params = FisheyeParams::horizontal(PI);
    let s = SphericalCoord::new(0.0, -0.2).unwrap();
    assert!(matches!(fisheye_from_sphere(s, &params), Err(odikit::Error::OutOfHemisphere)));
    let cam = PerspectiveParams::new(FRAC_PI_2, 0.0, 0.0);
    let behind = SphericalCoord::new(PI, 0.0).unwrap();
    assert!(matches!(perspective_from_sphere(behind, &cam), Err(odikit::Error::BehindCamera)));
    let wide = perspective_from_sphere(SphericalCoord::new(1.2, 0.0).unwrap(), &cam).unwrap();
    assert!(!wide.within_fov);
    let shifted = params.with_shift(0.0, FRAC_PI_6);
    assert!(matches!(stretch_fisheye(PlaneCoord::new(0.0, 0.0), &shifted), Err(odikit::Error::SingularJacobian(_))));
    assert!(stretch_fisheye(PlaneCoord::new(0.0, 0.0), &params).unwrap() == 1.0);
}

proptest! {
    #[test]
    fn rotation_neutral_general_form_matches_horizontal(rho in 1e-6f64..1.0) {
        let closed = (2.0 / PI) * (FRAC_PI_2 * rho).sin() / rho;
        let k = stretch_fisheye(PlaneCoord::new(0.0, rho), &FisheyeParams::horizontal(PI)).unwrap();
        prop_assert!((k - closed).abs() < 1e-10);
        // the shifted expression evaluated at zero shift
        let general = (FRAC_PI_2 * (1.0 - rho)).cos() / (FRAC_PI_2 * rho);
        prop_assert!((k - general).abs() < 1e-10);
    }

    #[test]
    fn longitude_wrap_is_idempotent(theta in -100.0f64..100.0) {
        let w = wrap_longitude(theta);
        prop_assert!(w > -PI && w <= PI);
        prop_assert_eq!(wrap_longitude(w), w);
        prop_assert!(((theta - w) / (2.0 * PI) - ((theta - w) / (2.0 * PI)).round()).abs() < 1e-9);
    }

    #[test]
    fn perspective_stretch_is_at_most_one(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let k = stretch_perspective(PlaneCoord::new(x, y)).unwrap();
        prop_assert!(k > 0.0 && k <= 1.0);
    }
}
