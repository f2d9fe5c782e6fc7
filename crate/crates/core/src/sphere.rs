use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn combine(s: f64, a: Vec3, t: f64, b: Vec3) -> Vec3 {
    add(scale(a, s), scale(b, t))
}

/// A one-dimensional subspace, stored as its unit vector on the closed
/// northern hemisphere (antipodes identified).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray(Vec3);

impl Ray {
    pub const E1: Ray = Ray([1.0, 0.0, 0.0]);
    pub const E2: Ray = Ray([0.0, 1.0, 0.0]);
    pub const E3: Ray = Ray([0.0, 0.0, 1.0]);

    pub fn new(v: Vec3) -> Result<Ray> {
        canonicalize(v)
    }

    /// Standard basis ray e_i, i in 1..=3.
    pub fn basis(i: usize) -> Ray {
        match i {
            1 => Ray::E1,
            2 => Ray::E2,
            3 => Ray::E3,
            _ => panic!("basis index {i} out of range"),
        }
    }

    /// (e_i + e_j)/sqrt 2.
    pub fn diagonal(i: usize, j: usize) -> Ray {
        assert!(i != j);
        let mut v = [0.0; 3];
        v[i - 1] = std::f64::consts::FRAC_1_SQRT_2;
        v[j - 1] = std::f64::consts::FRAC_1_SQRT_2;
        Ray(v)
    }

    pub fn coords(&self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, other: &Ray) -> f64 {
        dot(self.0, other.0)
    }

    /// Canonical ray through the cross product; errors if the rays coincide.
    pub fn cross(&self, other: &Ray) -> Result<Ray> {
        canonicalize(cross(self.0, other.0))
            .map_err(|_| Error::Degenerate("cross product of coincident rays".into()))
    }

    /// Ray at the given colatitude and longitude (radians) in the chart of `pole`.
    pub fn from_polar(pole: &Ray, colatitude: f64, longitude: f64) -> Result<Ray> {
        let (u, w) = chart_frame(pole);
        let (s, c) = colatitude.sin_cos();
        let dir = combine(longitude.cos(), u, longitude.sin(), w);
        canonicalize(combine(c, pole.0, s, dir))
    }
}

/// Representative of the ray through `v` on the canonical hemisphere:
/// v3 > 0, or v3 = 0 and v1 > 0, or v3 = v1 = 0 and v2 = 1.
pub fn canonicalize(v: Vec3) -> Result<Ray> {
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite vector".into()));
    }
    let n2 = dot(v, v);
    if n2 == 0.0 {
        return Err(Error::InvalidInput("zero vector has no ray".into()));
    }
    // leave already-unit vectors untouched so the map is idempotent bitwise
    let mut u = if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON {
        v
    } else {
        scale(v, 1.0 / n2.sqrt())
    };
    let flip = if u[2] != 0.0 {
        u[2] < 0.0
    } else if u[0] != 0.0 {
        u[0] < 0.0
    } else {
        u[1] < 0.0
    };
    if flip {
        u = scale(u, -1.0);
    }
    for x in u.iter_mut() {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    if u[2] == 0.0 && u[0] == 0.0 {
        u[1] = 1.0;
    }
    Ok(Ray(u))
}

/// Angle between two rays, in [0, pi/2].
pub fn angle(a: &Ray, b: &Ray) -> f64 {
    let c = a.dot(b).abs();
    let s = norm(cross(a.0, b.0));
    s.atan2(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Largest |<x,y>| accepted as orthogonal.
    pub ortho_eps: f64,
    /// Rays closer than this angle (radians) are identified.
    pub dedup_eps: f64,
    /// Margin used for strict LP comparisons.
    pub lp_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            ortho_eps: 1e-10,
            dedup_eps: 1e-9,
            lp_eps: 1e-6,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.ortho_eps) && ok(self.dedup_eps) && ok(self.lp_eps)) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.ortho_eps > 1e-8 {
            return Err(Error::InvalidInput("ortho_eps must not exceed 1e-8".into()));
        }
        Ok(())
    }
}

/// q' orthogonal to z and q, and q'' completing {q, q', q''} to a frame.
pub fn orthogonal_completion(z: &Ray, q: &Ray, tol: &Tolerance) -> Result<(Ray, Ray)> {
    if angle(z, q) < tol.dedup_eps {
        return Err(Error::Degenerate(
            "orthogonal completion of a ray with itself".into(),
        ));
    }
    let q1 = canonicalize(cross(z.0, q.0))?;
    let q2 = canonicalize(cross(q.0, q1.0))?;
    Ok((q1, q2))
}

/// Point of the gnomonic chart centred on `pole`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub pole: Ray,
    /// tan of the colatitude
    pub radius: f64,
    /// in [0, 2pi)
    pub longitude: f64,
}

/// Tangent frame (u, w) at `pole`: u comes from the coordinate axis least
/// aligned with the pole, w = pole x u. For e3 this is (e1, e2).
pub fn chart_frame(pole: &Ray) -> (Vec3, Vec3) {
    let p = pole.0;
    let mut k = 0;
    for i in 1..3 {
        if p[i].abs() < p[k].abs() {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let t = combine(1.0, e, -p[k], p);
    let u = scale(t, 1.0 / norm(t));
    let w = cross(p, u);
    (u, w)
}

const CHART_MARGIN: f64 = 1e-9;

fn wrap_longitude(x: f64) -> f64 {
    let l = x.rem_euclid(2.0 * PI);
    if l >= 2.0 * PI {
        0.0
    } else {
        l
    }
}

pub fn chart_project(pole: &Ray, x: &Ray) -> Result<ChartPoint> {
    let th = angle(pole, x);
    if th >= FRAC_PI_2 - CHART_MARGIN {
        return Err(Error::OutOfChart { angle: th });
    }
    let c = pole.dot(x);
    let v = if c < 0.0 { scale(x.0, -1.0) } else { x.0 };
    let (u, w) = chart_frame(pole);
    let (xu, xw) = (dot(v, u), dot(v, w));
    let longitude = if th == 0.0 { 0.0 } else { wrap_longitude(xw.atan2(xu)) };
    Ok(ChartPoint {
        pole: *pole,
        radius: th.tan(),
        longitude,
    })
}

pub fn chart_unproject(p: &ChartPoint) -> Result<Ray> {
    if !(p.radius.is_finite() && p.radius >= 0.0) {
        return Err(Error::InvalidInput("chart radius must be finite and nonnegative".into()));
    }
    let (u, w) = chart_frame(&p.pole);
    let dir = combine(p.longitude.cos(), u, p.longitude.sin(), w);
    canonicalize(combine(1.0, p.pole.0, p.radius, dir))
}

/// Colatitude and longitude of `x` relative to `pole`.
pub fn polar(pole: &Ray, x: &Ray) -> Result<(f64, f64)> {
    let cp = chart_project(pole, x)?;
    Ok((angle(pole, x), cp.longitude))
}

/// Move from `q` along the chart line through `q` perpendicular to the radial
/// line, until the longitude has changed by `dphi`.
pub fn perp_step(pole: &Ray, q: &Ray, dphi: f64) -> Result<Ray> {
    let th = angle(pole, q);
    if th == 0.0 {
        return Err(Error::Degenerate("perpendicular step from the pole".into()));
    }
    if th >= FRAC_PI_2 - CHART_MARGIN {
        return Err(Error::OutOfChart { angle: th });
    }
    if !dphi.is_finite() || dphi.abs() >= FRAC_PI_2 - CHART_MARGIN {
        return Err(Error::Precondition(format!(
            "longitude step {dphi} must lie strictly inside (-pi/2, pi/2)"
        )));
    }
    if dphi == 0.0 {
        return Ok(*q);
    }
    let qv = if pole.dot(q) < 0.0 { scale(q.0, -1.0) } else { q.0 };
    let t = combine(1.0, qv, -th.cos(), pole.0);
    let t = scale(t, 1.0 / norm(t));
    let n = cross(pole.0, t);
    let psi = (th.sin() * dphi.tan()).atan();
    canonicalize(combine(psi.cos(), qv, psi.sin(), n))
}

/// Minimal signed representative of an angle difference, in (-pi, pi].
pub fn signed_delta(x: f64) -> f64 {
    let mut d = x.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}
