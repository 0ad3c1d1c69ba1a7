//! Coordinate transforms between the unit sphere and the ERP, fisheye and
//! perspective planes, their closed-form stretching ratios, and a
//! finite-difference Jacobian used to check those closed forms.
//!
//! Plane conventions:
//! - ERP: `x = θ`, `y = φ`.
//! - Fisheye: normalized disk, `ρ = 2·polar/A_F ∈ [0, 1]`, `(x, y) = ρ(cos θ*, sin θ*)`
//!   where `polar = π/2 − φ*` is the angle from the fisheye axis.
//! - Perspective: gnomonic, `x = tan θ`, `y = tan φ / cos θ` in the camera frame.
//!
//! Stretching ratios `K = δS/δP` are measured on metric planes that share
//! radian units: ERP and perspective as above, fisheye on the angular plane
//! whose radius is the polar angle itself (`ρ·A_F/2`). With this metric the
//! ERP/fisheye ratio is exactly `π/2 − |φ|` for the horizontally spliced disk.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Wraps a longitude into `(−π, π]`.
pub fn wrap_longitude(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// A direction on the unit sphere: longitude `theta`, latitude `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    theta: f64,
    phi: f64,
}

impl SphericalCoord {
    /// Longitude is wrapped into `(−π, π]`; latitudes beyond the poles are rejected.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain(format!("non-finite angle ({theta}, {phi})")));
        }
        if phi.abs() > FRAC_PI_2 {
            return Err(Error::Domain(format!("latitude {phi} beyond a pole")));
        }
        Ok(Self {
            theta: wrap_longitude(theta),
            phi,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit vector; `+x` points at `(0, 0)`, `+z` at the north pole.
    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * ct, cp * st, sp]
    }

    /// Inverse of [`to_vector`](Self::to_vector); the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Domain("zero direction vector".into()));
        }
        let phi = (v[2] / norm).clamp(-1.0, 1.0).asin();
        let theta = v[1].atan2(v[0]);
        Self::new(theta, phi)
    }
}

/// A point on a projection plane, in that projection's own units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCoord {
    pub x: f64,
    pub y: f64,
}

impl PlaneCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Which pole a fisheye disk is centred on.
///
/// A horizontally spliced dual fisheye is a `North` disk plus a `South` disk;
/// the south disk reflects latitude before projecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hemisphere {
    #[default]
    North,
    South,
}

/// Equidistant fisheye lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisheyeParams {
    /// Full aperture `A_F` in radians, in `(0, 2π)`.
    pub aperture: f64,
    /// Longitude shift `Δθ_r` applied before projecting.
    pub delta_theta: f64,
    /// Latitude shift `Δφ_r` applied before projecting.
    pub delta_phi: f64,
    pub hemisphere: Hemisphere,
}

impl FisheyeParams {
    /// Horizontally spliced disk centred on the north pole.
    pub fn horizontal(aperture: f64) -> Self {
        Self {
            aperture,
            delta_theta: 0.0,
            delta_phi: 0.0,
            hemisphere: Hemisphere::North,
        }
    }

    pub fn with_shift(mut self, delta_theta: f64, delta_phi: f64) -> Self {
        self.delta_theta = delta_theta;
        self.delta_phi = delta_phi;
        self
    }

    pub fn with_hemisphere(mut self, hemisphere: Hemisphere) -> Self {
        self.hemisphere = hemisphere;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aperture > 0.0 && self.aperture < TAU) {
            return Err(Error::InvalidSpec(format!(
                "fisheye aperture {} outside (0, 2π)",
                self.aperture
            )));
        }
        if !self.delta_theta.is_finite() || !(self.delta_phi.abs() <= FRAC_PI_2) {
            return Err(Error::InvalidSpec(format!(
                "fisheye shift ({}, {}) invalid",
                self.delta_theta, self.delta_phi
            )));
        }
        Ok(())
    }

    fn is_horizontal(&self) -> bool {
        self.delta_phi == 0.0
    }
}

/// Pinhole camera looking along `(yaw, pitch)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveParams {
    /// Horizontal field of view `A_P` in radians, in `(0, π)`.
    pub fov: f64,
    /// View longitude `θ_p`.
    pub yaw: f64,
    /// View latitude `φ_p`.
    pub pitch: f64,
}

impl PerspectiveParams {
    pub fn new(fov: f64, yaw: f64, pitch: f64) -> Self {
        Self { fov, yaw, pitch }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < PI) {
            return Err(Error::InvalidSpec(format!(
                "perspective fov {} outside (0, π)",
                self.fov
            )));
        }
        if !self.yaw.is_finite() || !(self.pitch.abs() <= FRAC_PI_2) {
            return Err(Error::InvalidSpec(format!(
                "view direction ({}, {}) invalid",
                self.yaw, self.pitch
            )));
        }
        Ok(())
    }

    pub fn half_extent(&self) -> f64 {
        (self.fov / 2.0).tan()
    }

    // camera -> world: pitch about +y, then yaw about +z
    fn to_world(&self, v: [f64; 3]) -> [f64; 3] {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let (x, y, z) = (v[0] * cp - v[2] * sp, v[1], v[0] * sp + v[2] * cp);
        [x * cy - y * sy, x * sy + y * cy, z]
    }

    fn to_camera(&self, v: [f64; 3]) -> [f64; 3] {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let (x, y, z) = (v[0] * cy + v[1] * sy, -v[0] * sy + v[1] * cy, v[2]);
        [x * cp + z * sp, y, -x * sp + z * cp]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Erp,
    Fisheye(FisheyeParams),
    Perspective(PerspectiveParams),
}

/// A projection together with the raster it is sampled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSpec {
    pub projection: Projection,
    pub width: usize,
    pub height: usize,
}

impl ProjectionSpec {
    pub fn erp(height: usize) -> Self {
        Self {
            projection: Projection::Erp,
            width: 2 * height,
            height,
        }
    }

    /// Square fisheye raster whose inscribed disk is the aperture.
    pub fn fisheye(diameter: usize, params: FisheyeParams) -> Self {
        Self {
            projection: Projection::Fisheye(params),
            width: diameter,
            height: diameter,
        }
    }

    pub fn perspective(height: usize, width: usize, params: PerspectiveParams) -> Self {
        Self {
            projection: Projection::Perspective(params),
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSpec("empty raster".into()));
        }
        match &self.projection {
            Projection::Erp if self.width != 2 * self.height => Err(Error::InvalidSpec(format!(
                "ERP raster {}x{} must have width = 2·height",
                self.height, self.width
            ))),
            Projection::Erp => Ok(()),
            Projection::Fisheye(p) => p.validate(),
            Projection::Perspective(p) => p.validate(),
        }
    }

    /// Plane coordinate at fractional pixel index `(row, col)`.
    pub fn plane_from_pixel(&self, row: f64, col: f64) -> PlaneCoord {
        let (h, w) = (self.height as f64, self.width as f64);
        match &self.projection {
            Projection::Erp => PlaneCoord::new(
                (col + 0.5) / w * TAU - PI,
                FRAC_PI_2 - (row + 0.5) / h * PI,
            ),
            Projection::Fisheye(_) => {
                PlaneCoord::new(2.0 * (col + 0.5) / w - 1.0, 1.0 - 2.0 * (row + 0.5) / h)
            }
            Projection::Perspective(p) => {
                let t = p.half_extent();
                PlaneCoord::new(
                    (2.0 * (col + 0.5) / w - 1.0) * t,
                    (1.0 - 2.0 * (row + 0.5) / h) * t * h / w,
                )
            }
        }
    }

    /// Fractional pixel index `(row, col)` of a plane coordinate.
    pub fn pixel_from_plane(&self, p: PlaneCoord) -> (f64, f64) {
        let (h, w) = (self.height as f64, self.width as f64);
        match &self.projection {
            Projection::Erp => (
                (FRAC_PI_2 - p.y) / PI * h - 0.5,
                (p.x + PI) / TAU * w - 0.5,
            ),
            Projection::Fisheye(_) => ((1.0 - p.y) / 2.0 * h - 0.5, (p.x + 1.0) / 2.0 * w - 0.5),
            Projection::Perspective(pp) => {
                let t = pp.half_extent();
                (
                    (1.0 - p.y / (t * h / w)) / 2.0 * h - 0.5,
                    (p.x / t + 1.0) / 2.0 * w - 0.5,
                )
            }
        }
    }

    pub fn sphere_from_pixel(&self, row: f64, col: f64) -> Result<SphericalCoord> {
        let p = self.plane_from_pixel(row, col);
        match &self.projection {
            Projection::Erp => sphere_from_erp(p),
            Projection::Fisheye(f) => sphere_from_fisheye(p, f),
            Projection::Perspective(pp) => Ok(sphere_from_perspective(p, pp)),
        }
    }

    /// Fractional `(row, col)` where `s` lands on this raster.
    pub fn pixel_from_sphere(&self, s: SphericalCoord) -> Result<(f64, f64)> {
        let p = match &self.projection {
            Projection::Erp => erp_from_sphere(s),
            Projection::Fisheye(f) => fisheye_from_sphere(s, f)?,
            Projection::Perspective(pp) => {
                let hit = perspective_from_sphere(s, pp)?;
                let t = pp.half_extent();
                let ty = t * self.height as f64 / self.width as f64;
                if hit.point.x.abs() > t || hit.point.y.abs() > ty {
                    return Err(Error::OutsideFov);
                }
                hit.point
            }
        };
        Ok(self.pixel_from_plane(p))
    }
}

pub fn erp_from_sphere(s: SphericalCoord) -> PlaneCoord {
    PlaneCoord::new(s.theta, s.phi)
}

pub fn sphere_from_erp(p: PlaneCoord) -> Result<SphericalCoord> {
    SphericalCoord::new(p.x, p.y)
}

/// Latitude/longitude of `s` in the frame where the fisheye axis is the north pole.
fn fisheye_frame(s: SphericalCoord, params: &FisheyeParams) -> (f64, f64) {
    let phi = match params.hemisphere {
        Hemisphere::North => s.phi,
        Hemisphere::South => -s.phi,
    };
    (wrap_longitude(s.theta - params.delta_theta), phi + params.delta_phi)
}

/// Projects `s` onto the normalized fisheye disk.
///
/// Fails with [`Error::OutOfHemisphere`] when the point falls outside the
/// aperture (`ρ > 1`) or past the shifted pole.
pub fn fisheye_from_sphere(s: SphericalCoord, params: &FisheyeParams) -> Result<PlaneCoord> {
    let (theta, phi) = fisheye_frame(s, params);
    if phi > FRAC_PI_2 {
        return Err(Error::OutOfHemisphere);
    }
    let rho = 2.0 * (FRAC_PI_2 - phi) / params.aperture;
    if rho > 1.0 {
        return Err(Error::OutOfHemisphere);
    }
    let (st, ct) = theta.sin_cos();
    Ok(PlaneCoord::new(rho * ct, rho * st))
}

pub fn sphere_from_fisheye(p: PlaneCoord, params: &FisheyeParams) -> Result<SphericalCoord> {
    let rho = p.radius();
    if !(rho <= 1.0) {
        return Err(Error::Domain(format!("fisheye radius {rho} outside the unit disk")));
    }
    let theta = if rho == 0.0 { 0.0 } else { p.y.atan2(p.x) };
    let phi = FRAC_PI_2 - rho * params.aperture / 2.0 - params.delta_phi;
    let phi = match params.hemisphere {
        Hemisphere::North => phi,
        Hemisphere::South => -phi,
    };
    SphericalCoord::new(theta + params.delta_theta, phi)
}

/// A perspective projection result with its field-of-view flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveHit {
    pub point: PlaneCoord,
    /// `|x|, |y| ≤ tan(A_P/2)`.
    pub within_fov: bool,
}

pub fn perspective_from_sphere(s: SphericalCoord, params: &PerspectiveParams) -> Result<PerspectiveHit> {
    let v = params.to_camera(s.to_vector());
    if v[0] <= 0.0 {
        return Err(Error::BehindCamera);
    }
    let theta = v[1].atan2(v[0]);
    let phi = v[2].clamp(-1.0, 1.0).asin();
    let point = PlaneCoord::new(theta.tan(), phi.tan() / theta.cos());
    let t = params.half_extent();
    Ok(PerspectiveHit {
        point,
        within_fov: point.x.abs() <= t && point.y.abs() <= t,
    })
}

pub fn sphere_from_perspective(p: PlaneCoord, params: &PerspectiveParams) -> SphericalCoord {
    let world = params.to_world([1.0, p.x, p.y]);
    SphericalCoord::from_vector(world).expect("camera ray is never zero")
}

/// `K_ERP = cos y`.
pub fn stretch_erp(p: PlaneCoord) -> Result<f64> {
    if !(p.y.abs() <= FRAC_PI_2) {
        return Err(Error::Domain(format!("ERP ordinate {} beyond a pole", p.y)));
    }
    Ok(p.y.cos())
}

/// Fisheye stretching ratio at a normalized disk point.
///
/// Horizontal disks (`Δφ_r = 0`) use `sin(r)/r` with `r = ρ·A_F/2`, which is
/// `(2/π)·sin(πρ/2)/ρ` for `A_F = π`, and return the limit 1 at the centre.
/// Shifted disks use `cos(π/2 − r − Δφ_r)/r`, which has a pole at the centre.
pub fn stretch_fisheye(p: PlaneCoord, params: &FisheyeParams) -> Result<f64> {
    let rho = p.radius();
    if !(rho <= 1.0) {
        return Err(Error::Domain(format!("fisheye radius {rho} outside the unit disk")));
    }
    let polar = rho * params.aperture / 2.0;
    if params.is_horizontal() {
        if polar == 0.0 {
            return Ok(1.0);
        }
        return Ok(polar.sin() / polar);
    }
    if rho < 1e-9 {
        return Err(Error::SingularJacobian(polar));
    }
    Ok((FRAC_PI_2 - polar - params.delta_phi).cos() / polar)
}

/// `K_P = (1 + x² + y²)^(−3/2)`.
pub fn stretch_perspective(p: PlaneCoord) -> Result<f64> {
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::Domain("non-finite perspective coordinate".into()));
    }
    Ok((1.0 + p.x * p.x + p.y * p.y).powf(-1.5))
}

/// Ratio `K_ERP / K_Fisheye = π/2 − |φ|` at corresponding points of the
/// horizontally spliced `A_F = π` disk pair.
pub fn stretch_erp_over_fisheye(phi: f64) -> Result<f64> {
    if !(phi.abs() <= FRAC_PI_2) {
        return Err(Error::Domain(format!("latitude {phi} beyond a pole")));
    }
    Ok(FRAC_PI_2 - phi.abs())
}

/// A sphere-to-plane map in the metric units the stretching ratios use.
#[derive(Debug, Clone, Copy)]
pub enum ProjectionMap<'a> {
    Erp,
    Fisheye(&'a FisheyeParams),
    Perspective(&'a PerspectiveParams),
}

impl ProjectionMap<'_> {
    pub fn metric_plane(&self, s: SphericalCoord) -> Result<PlaneCoord> {
        match self {
            ProjectionMap::Erp => Ok(erp_from_sphere(s)),
            ProjectionMap::Fisheye(f) => {
                let p = fisheye_from_sphere(s, f)?;
                let scale = f.aperture / 2.0;
                Ok(PlaneCoord::new(p.x * scale, p.y * scale))
            }
            ProjectionMap::Perspective(pp) => Ok(perspective_from_sphere(s, pp)?.point),
        }
    }
}

/// `cos φ / |J|` with `J` the central-difference Jacobian of `map` at `s`.
pub fn numeric_stretch(map: ProjectionMap<'_>, s: SphericalCoord, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::Domain(format!("finite-difference step {h} outside (0, 1e-3]")));
    }
    let at = |dt: f64, dp: f64| -> Result<PlaneCoord> {
        map.metric_plane(SphericalCoord::new(s.theta + dt, s.phi + dp)?)
    };
    let (tp, tm) = (at(h, 0.0)?, at(-h, 0.0)?);
    let (pp, pm) = (at(0.0, h)?, at(0.0, -h)?);
    let dx_dt = (tp.x - tm.x) / (2.0 * h);
    let dy_dt = (tp.y - tm.y) / (2.0 * h);
    let dx_dp = (pp.x - pm.x) / (2.0 * h);
    let dy_dp = (pp.y - pm.y) / (2.0 * h);
    let det = (dx_dt * dy_dp - dx_dp * dy_dt).abs();
    if det < 1e-12 {
        return Err(Error::SingularJacobian(det));
    }
    Ok(s.phi.cos() / det)
}
