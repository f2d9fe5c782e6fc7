//! Fitting symmetric operators to basis samples, Born values, residual frame
//! functions, and LP intervals for p(x) under p(z0) = 1.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{extend_with_d, Forge};
use crate::graph::OrthoGraph;
use crate::lp::{q, Rational};
use crate::sphere::{angle, perp_step, polar, Ray};
use crate::state::StatePolytope;

pub const BASIS_NAMES: [&str; 6] = ["e1", "e2", "e3", "b12", "b13", "b23"];

pub fn basis_rays() -> [Ray; 6] {
    [
        Ray::E1,
        Ray::E2,
        Ray::E3,
        Ray::diagonal(1, 2),
        Ray::diagonal(1, 3),
        Ray::diagonal(2, 3),
    ]
}

/// Real symmetric 3x3 operator, stored as (w11, w22, w33, w12, w13, w23).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub w: [f64; 6],
}

impl DensityMatrix {
    pub fn from_entries(w: [f64; 6]) -> Self {
        DensityMatrix { w }
    }

    /// Upper triangle of `m` (symmetry is by storage).
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        DensityMatrix {
            w: [m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(0, 1)], m[(0, 2)], m[(1, 2)]],
        }
    }

    pub fn projector(x: &Ray) -> Self {
        let v = Vector3::from(x.coords());
        Self::from_matrix(&(v * v.transpose()))
    }

    pub fn maximally_mixed() -> Self {
        let t = 1.0 / 3.0;
        DensityMatrix {
            w: [t, t, t, 0.0, 0.0, 0.0],
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let [a, b, c, d, e, f] = self.w;
        Matrix3::new(a, d, e, d, b, f, e, f, c)
    }

    pub fn trace(&self) -> f64 {
        self.w[0] + self.w[1] + self.w[2]
    }

    pub fn eigenvalues(&self) -> Vector3<f64> {
        SymmetricEigen::new(self.matrix()).eigenvalues
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().iter().all(|l| *l >= -tol)
    }

    /// PSD within 1e-10 and trace 1 within 1e-12.
    pub fn is_state(&self) -> bool {
        self.is_psd(1e-10) && (self.trace() - 1.0).abs() <= 1e-12
    }

    /// <x, W x>
    pub fn born(&self, x: &Ray) -> f64 {
        let v = x.coords();
        let [a, b, c, d, e, f] = self.w;
        a * v[0] * v[0]
            + b * v[1] * v[1]
            + c * v[2] * v[2]
            + 2.0 * (d * v[0] * v[1] + e * v[0] * v[2] + f * v[1] * v[2])
    }

    pub fn born_values(&self, g: &OrthoGraph) -> Vec<f64> {
        g.rays.iter().map(|r| self.born(r)).collect()
    }
}

pub fn born(w: &DensityMatrix, x: &Ray) -> f64 {
    w.born(x)
}

/// W with W_ii = p(e_i) and W_ij = p(b_ij) - (p(e_i) + p(e_j)) / 2.
pub fn fit_w(samples: &BTreeMap<String, f64>) -> Result<DensityMatrix> {
    let mut s = [0.0; 6];
    for (k, name) in BASIS_NAMES.iter().enumerate() {
        s[k] = *samples
            .get(*name)
            .ok_or_else(|| Error::InvalidInput(format!("missing sample for {name}")))?;
    }
    let off = |bij: f64, pi: f64, pj: f64| bij - 0.5 * (pi + pj);
    Ok(DensityMatrix {
        w: [
            s[0],
            s[1],
            s[2],
            off(s[3], s[0], s[1]),
            off(s[4], s[0], s[2]),
            off(s[5], s[1], s[2]),
        ],
    })
}

/// Samples of `p` at the six basis rays, keyed by name.
pub fn basis_samples(p: impl Fn(&Ray) -> f64) -> BTreeMap<String, f64> {
    BASIS_NAMES
        .iter()
        .zip(basis_rays())
        .map(|(n, r)| (n.to_string(), p(&r)))
        .collect()
}

/// p(x) - <x, W x> at each ray.
pub fn residual(rays: &[Ray], p: &[f64], w: &DensityMatrix) -> Vec<f64> {
    rays.iter().zip(p).map(|(r, v)| v - w.born(r)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndeterminacyQuery {
    pub z0: Ray,
    pub x: Ray,
    pub epsilon: f64,
    /// number of enrichment stages after the bare stage 0
    pub stages: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalStage {
    pub stage: usize,
    pub rays: usize,
    pub lo: Rational,
    pub hi: Rational,
    pub born: f64,
}

impl IntervalStage {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Outermost colatitude used by the lower enrichment side.
const LOWER_LIMIT_DEG: f64 = 80.0;

/// Exact bounds on p(x) under p(z0) = 1 for a cumulative sequence of graphs.
/// Stage s adds one monotone link on each side of x: a ray y_s nearer the
/// pole (colatitude theta_x (1 - s/(S+1))) linked to y_{s-1}, and a ray w_s
/// further out (colatitude spread towards 80 degrees) linked from w_{s-1};
/// y_0 = w_0 = x. Each link is a single perpendicular step.
pub fn indeterminacy_interval(forge: &Forge, query: &IndeterminacyQuery) -> Result<Vec<IntervalStage>> {
    if query.epsilon.is_nan() || query.epsilon <= 0.0 {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let z = query.z0;
    let x = query.x;
    let (tx, lon_x) = polar(&z, &x)
        .map_err(|_| Error::Precondition("x must not be orthogonal to z0".into()))?;
    if tx < forge.tol.dedup_eps {
        return Err(Error::Precondition("x must differ from z0".into()));
    }
    let stages = query.stages;
    let born = DensityMatrix::projector(&z).born(&x);
    let mut g = OrthoGraph::new(forge.tol);
    let iz = g.add_ray(z);
    let ix = g.add_ray(x);
    let mut out = Vec::new();
    let (mut up, mut up_lon) = (x, lon_x);
    let mut down = x;
    let lower_span = LOWER_LIMIT_DEG.to_radians() - tx;
    for s in 0..=stages {
        if s > 0 {
            let cu = tx * (1.0 - s as f64 / (stages + 1) as f64);
            let cprev = angle(&z, &up);
            let dphi = (cu.tan() / cprev.tan()).acos();
            let y = Ray::from_polar(&z, cu, up_lon - dphi)?;
            extend_with_d(&mut g, &z, &y, &up)?;
            up = y;
            up_lon -= dphi;
            if lower_span > 0.0 {
                let cw = tx + lower_span * s as f64 / stages as f64;
                let cprev = angle(&z, &down);
                let dphi = (cprev.tan() / cw.tan()).acos();
                let w = perp_step(&z, &down, dphi)?;
                extend_with_d(&mut g, &z, &down, &w)?;
                down = w;
            }
        }
        let poly = StatePolytope::new(&g).pin(iz, q(1))?;
        let obj = [(ix, q(1))];
        let hi = poly.optimize(&obj, true).optimum;
        let lo = poly.optimize(&obj, false).optimum;
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(Error::Degenerate("state polytope unexpectedly empty".into()));
        };
        out.push(IntervalStage {
            stage: s,
            rays: g.len(),
            lo,
            hi,
            born,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_examples() {
        let all = |v: f64| BASIS_NAMES.iter().map(|n| (n.to_string(), v)).collect();
        let w = fit_w(&all(1.0 / 3.0)).unwrap();
        assert!(w.w[..3].iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!(w.w[3..].iter().all(|x| x.abs() < 1e-15));

        let p = basis_samples(|r| DensityMatrix::projector(&Ray::E1).born(r));
        let w = fit_w(&p).unwrap();
        let expect = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(w.w.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));

        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for (n, v) in BASIS_NAMES.iter().zip([0.4, 0.4, 0.2, 0.6, 0.3, 0.3]) {
            m.insert(n.to_string(), v);
        }
        let w = fit_w(&m).unwrap();
        assert!((w.w[3] - 0.2).abs() < 1e-15);
        assert!((w.born(&Ray::diagonal(1, 2)) - 0.6).abs() < 1e-15);

        m.remove("b23");
        assert!(fit_w(&m).is_err());
    }

    #[test]
    fn born_examples() {
        let w = DensityMatrix::projector(&Ray::E3);
        let x = Ray::from_polar(&Ray::E3, 30f64.to_radians(), 1.0).unwrap();
        assert!((w.born(&x) - 0.75).abs() < 1e-15);
        let m = DensityMatrix::maximally_mixed();
        assert!((m.born(&x) - 1.0 / 3.0).abs() < 1e-15);
        let s: f64 = [Ray::E1, Ray::E2, Ray::E3].iter().map(|e| m.born(e)).sum();
        assert!((s - m.trace()).abs() < 1e-15);
        assert!(m.is_state() && w.is_state());
        assert!(!DensityMatrix::from_entries([1.0, -0.5, 0.5, 0.0, 0.0, 0.0]).is_psd(1e-10));
    }

    #[test]
    fn residual_vanishes_on_basis() {
        // a frame-function-like assignment that is not a Born state
        let p = |r: &Ray| {
            let c = r.coords();
            0.2 + 0.1 * c[0] * c[0] - 0.3 * c[1] * c[2] + 0.05 * c[0] * c[1]
        };
        let w = fit_w(&basis_samples(p)).unwrap();
        let rays = basis_rays();
        let vals: Vec<f64> = rays.iter().map(p).collect();
        assert!(residual(&rays, &vals, &w).iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn stage_zero_is_unconstrained() {
        let forge = Forge::default();
        let x = Ray::from_polar(&Ray::E3, 30f64.to_radians(), 0.0).unwrap();
        let query = IndeterminacyQuery {
            z0: Ray::E3,
            x,
            epsilon: 0.1,
            stages: 0,
        };
        let st = indeterminacy_interval(&forge, &query).unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!((st[0].lo.clone(), st[0].hi.clone()), (q(0), q(1)));
        assert!(indeterminacy_interval(&forge, &IndeterminacyQuery { x: Ray::E1, ..query.clone() }).is_err());
        assert!(indeterminacy_interval(&forge, &IndeterminacyQuery { epsilon: 0.0, ..query }).is_err());
    }
}
