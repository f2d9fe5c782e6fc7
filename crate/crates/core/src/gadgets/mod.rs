//! Constructions of ray sets that force relations between state values.

mod chain;
pub mod descent;
mod embed;

use std::f64::consts::FRAC_PI_2;

pub use chain::{plan_chain, plan_d_steps, plan_steps, ChainPlan, CHAIN_MAX_STEP};
pub use embed::{embed_dim, EmbedRecord};

use crate::error::{Error, Result};
use crate::graph::{Claim, GadgetReport, OrthoGraph, Pin};
use crate::sphere::{
    angle, canonicalize, dot, orthogonal_completion, perp_step, Ray, Tolerance, Vec3,
};

/// Builders sharing one tolerance setting.
#[derive(Clone, Copy, Debug, Default)]
pub struct Forge {
    pub tol: Tolerance,
}

/// Rays of one Piron gadget, as graph indices.
#[derive(Clone, Copy, Debug)]
struct PironIds {
    z: usize,
    q: usize,
    qp: usize,
    qpp: usize,
    r: usize,
    l: usize,
    t: usize,
    l_ray: Ray,
}

/// Rays of Gamma(a, b).
#[derive(Clone, Copy, Debug)]
struct GammaIds {
    a: usize,
    b: usize,
    a_perp: usize,
    b_perp: usize,
    n: usize,
}

struct Build {
    g: OrthoGraph,
    pirons: usize,
}

fn pins(list: &[(&str, &str)]) -> Vec<Pin> {
    list.iter().map(|(r, v)| Pin::new(r, v)).collect()
}

/// Unit vector of `b` flipped towards `a`, and the unit tangent at `a`
/// pointing to `b` along their great circle.
fn circle_frame(a: &Ray, b: &Ray) -> (Vec3, Vec3, f64) {
    let av = a.coords();
    let mut bv = b.coords();
    if dot(av, bv) < 0.0 {
        bv = [-bv[0], -bv[1], -bv[2]];
    }
    let c = dot(av, bv);
    let t = [bv[0] - c * av[0], bv[1] - c * av[1], bv[2] - c * av[2]];
    let n = crate::sphere::norm(t);
    (bv, [t[0] / n, t[1] / n, t[2] / n], angle(a, b))
}

fn arc_point(a: Vec3, v: Vec3, phi: f64) -> Result<Ray> {
    let (s, c) = phi.sin_cos();
    canonicalize([
        c * a[0] + s * v[0],
        c * a[1] + s * v[1],
        c * a[2] + s * v[2],
    ])
}

fn check_non_orthogonal(a: &Ray, b: &Ray, tol: &Tolerance) -> Result<f64> {
    let th = angle(a, b);
    if th < tol.dedup_eps {
        return Err(Error::Precondition("the two rays coincide".into()));
    }
    if a.dot(b).abs() < tol.ortho_eps || th >= FRAC_PI_2 - 1e-9 {
        return Err(Error::Precondition(
            "the construction needs two non orthogonal rays".into(),
        ));
    }
    Ok(th)
}

impl Build {
    fn new(tol: Tolerance) -> Build {
        Build {
            g: OrthoGraph::new(tol),
            pirons: 0,
        }
    }

    fn tol(&self) -> Tolerance {
        self.g.tol
    }

    fn piron(&mut self, z: &Ray, q: &Ray, r: &Ray) -> Result<PironIds> {
        let tol = self.tol();
        if angle(z, q) >= FRAC_PI_2 - 1e-9 {
            return Err(Error::Precondition("q must not be orthogonal to the pole".into()));
        }
        let (qp, qpp) = orthogonal_completion(z, q, &tol)?;
        let off = r.dot(&qpp).abs();
        if off >= tol.ortho_eps {
            return Err(Error::Precondition(format!(
                "r is off the great circle through q and q' (|<r,q''>| = {off:.3e})"
            )));
        }
        let l = r.cross(&qpp)?;
        let t = z.cross(&qp)?;
        let g = &mut self.g;
        let ids = PironIds {
            z: g.add_ray(*z),
            q: g.add_ray(*q),
            qp: g.add_ray(qp),
            qpp: g.add_ray(qpp),
            r: g.add_ray(*r),
            l: g.add_ray(l),
            t: g.add_ray(t),
            l_ray: l,
        };
        g.certify_triple(ids.q, ids.qp, ids.qpp)?;
        g.certify_triple(ids.r, ids.l, ids.qpp)?;
        g.certify_triple(ids.z, ids.qp, ids.t)?;
        self.pirons += 1;
        Ok(ids)
    }

    fn g_prime(&mut self, z: &Ray, q: &Ray, r: &Ray) -> Result<ChainPlan> {
        let plan = plan_chain(z, q, r, &self.tol())?;
        if plan.dphis.is_empty() {
            self.g.add_ray(*z);
            self.g.add_ray(*q);
        }
        for w in plan.waypoints.windows(2) {
            self.piron(z, &w[0], &w[1])?;
        }
        Ok(plan)
    }

    fn descent(&self, a: &Ray, b: &Ray) -> Result<Vec<Ray>> {
        let th = check_non_orthogonal(a, b, &self.tol())?;
        let (_, v, _) = circle_frame(a, b);
        let steps = descent::schedule(th)?;
        let mut pos = th;
        let mut out = Vec::with_capacity(steps.len());
        for (k, s) in steps.iter().enumerate() {
            pos += s;
            if k + 1 == steps.len() {
                out.push(canonicalize(v)?);
            } else {
                out.push(arc_point(a.coords(), v, pos)?);
            }
        }
        Ok(out)
    }

    /// Union of G'(c_j, c_{j+1}, c_{j-1}) with c_{-1} = a, c_0 = b, plus the
    /// completion triple of a and c_n.
    fn g_double_prime(&mut self, a: &Ray, b: &Ray) -> Result<Vec<Ray>> {
        let cs = self.descent(a, b)?;
        let (mut before, mut pole) = (*a, *b);
        for c in &cs {
            self.g_prime(&pole, c, &before)?;
            before = pole;
            pole = *c;
        }
        let last = cs.last().unwrap();
        let n = a.cross(last)?;
        self.g.add_triple(*a, *last, n)?;
        Ok(cs)
    }

    fn gamma(&mut self, a: &Ray, b: &Ray) -> Result<GammaIds> {
        let th = check_non_orthogonal(a, b, &self.tol())?;
        let (_, v, _) = circle_frame(a, b);
        let a_perp = canonicalize(v)?;
        let b_perp = arc_point(a.coords(), v, th + FRAC_PI_2)?;
        let n = a.cross(&a_perp)?;
        self.g_double_prime(a, b)?;
        self.g_double_prime(a, &b_perp)?;
        self.g_double_prime(b, a)?;
        self.g_double_prime(b, &a_perp)?;
        let [ia, iap, inn] = self.g.add_triple(*a, a_perp, n)?;
        let [ib, ibp, _] = self.g.add_triple(*b, b_perp, n)?;
        Ok(GammaIds {
            a: ia,
            b: ib,
            a_perp: iap,
            b_perp: ibp,
            n: inn,
        })
    }

    fn d1(&mut self, z: &Ray, q: &Ray, r: &Ray) -> Result<PironIds> {
        let p = self.piron(z, q, r)?;
        self.gamma(z, &p.l_ray)?;
        Ok(p)
    }

    fn d(&mut self, z: &Ray, a: &Ray, b: &Ray) -> Result<ChainPlan> {
        let tol = self.tol();
        let (ta, tb) = (angle(z, a), angle(z, b));
        if !(ta >= tol.dedup_eps && tb < FRAC_PI_2 - 1e-9 && tb - ta > tol.dedup_eps) {
            return Err(Error::Precondition(
                "need 0 < angle(z,a) < angle(z,b) < 90 degrees".into(),
            ));
        }
        let (delta, rho) = chain::chain_targets(z, a, b)?;
        let steps = plan_d_steps(ta, delta, rho)?;
        let plan = chain::realise(z, a, b, steps)?;
        for w in plan.waypoints.windows(2) {
            self.d1(z, &w[0], &w[1])?;
        }
        Ok(plan)
    }

    fn finish(mut self, mut rep: GadgetReport) -> OrthoGraph {
        rep.real("pirons", self.pirons as f64)
            .real("rays", self.g.len() as f64)
            .real("triples", self.g.triples.len() as f64);
        self.g.provenance.push(rep);
        self.g
    }
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

impl Forge {
    pub fn new(tol: Tolerance) -> Result<Forge> {
        tol.validate()?;
        Ok(Forge { tol })
    }

    /// Seven rays z, q, q', q'', r, l, t forcing p(q) >= p(r) when p(z) = 1.
    pub fn piron(&self, z: &Ray, q: &Ray, r: &Ray) -> Result<OrthoGraph> {
        let mut b = Build::new(self.tol);
        let p = b.piron(z, q, r)?;
        let mut rep = GadgetReport::new("piron");
        for (name, i) in [
            ("z", p.z),
            ("q", p.q),
            ("qp", p.qp),
            ("qpp", p.qpp),
            ("r", p.r),
            ("l", p.l),
            ("t", p.t),
        ] {
            rep.ray(name, i, &b.g);
        }
        rep.claim(Claim::MaxAtMost {
            pins: pins(&[("z", "1")]),
            objective: Claim::difference("r", "q"),
            bound: "0".into(),
        });
        Ok(b.finish(rep))
    }

    pub fn plan_chain(&self, z: &Ray, q: &Ray, r: &Ray) -> Result<ChainPlan> {
        plan_chain(z, q, r, &self.tol)
    }

    /// Chain of Piron gadgets around z from q to r.
    pub fn g_prime(&self, z: &Ray, q: &Ray, r: &Ray) -> Result<OrthoGraph> {
        let mut b = Build::new(self.tol);
        let plan = b.g_prime(z, q, r)?;
        let mut rep = GadgetReport::new("gprime");
        let (iz, iq, ir) = (b.g.add_ray(*z), b.g.add_ray(*q), b.g.add_ray(*r));
        rep.ray("z", iz, &b.g).ray("q", iq, &b.g).ray("r", ir, &b.g);
        for (k, w) in plan.waypoints.iter().enumerate() {
            let i = b.g.add_ray(*w);
            rep.ray(&format!("w{}", k + 1), i, &b.g);
        }
        rep.real("angle_zq_deg", deg(angle(z, q)))
            .real("angle_zr_deg", deg(angle(z, r)))
            .real("steps", plan.dphis.len() as f64);
        for (k, d) in plan.dphis.iter().enumerate() {
            rep.real(&format!("dphi{}_deg", k + 1), deg(*d));
        }
        rep.claim(Claim::MaxAtMost {
            pins: pins(&[("z", "1")]),
            objective: Claim::difference("r", "q"),
            bound: "0".into(),
        });
        Ok(b.finish(rep))
    }

    /// c_1..c_n on the a-b great circle, with strictly shrinking steps and
    /// c_n orthogonal to a.
    pub fn descent_sequence(&self, a: &Ray, b: &Ray) -> Result<Vec<Ray>> {
        Build::new(self.tol).descent(a, b)
    }

    /// Rays on which p(a) = 1 forces p(b) < 1.
    pub fn g_double_prime(&self, a: &Ray, b: &Ray) -> Result<OrthoGraph> {
        let mut bd = Build::new(self.tol);
        let cs = bd.g_double_prime(a, b)?;
        let mut rep = GadgetReport::new("gdouble");
        let (ia, ib) = (bd.g.add_ray(*a), bd.g.add_ray(*b));
        rep.ray("a", ia, &bd.g).ray("b", ib, &bd.g);
        for (k, c) in cs.iter().enumerate() {
            let i = bd.g.add_ray(*c);
            rep.ray(&format!("c{}", k + 1), i, &bd.g);
        }
        rep.real("angle_ab_deg", deg(angle(a, b)))
            .real("descent_steps", cs.len() as f64);
        rep.claim(Claim::Infeasible {
            pins: pins(&[("a", "1"), ("b", "1")]),
        })
        .claim(Claim::MaxBelow {
            pins: pins(&[("a", "1")]),
            objective: vec![crate::graph::Term {
                ray: "b".into(),
                coeff: "1".into(),
            }],
            bound: "1".into(),
        });
        Ok(bd.finish(rep))
    }

    /// Rays on which p(a), p(b) in {0,1} forces p(a) = p(b) = 0.
    pub fn gamma(&self, a: &Ray, b: &Ray) -> Result<OrthoGraph> {
        let mut bd = Build::new(self.tol);
        let ids = bd.gamma(a, b)?;
        let mut rep = GadgetReport::new("gamma");
        rep.ray("a", ids.a, &bd.g)
            .ray("b", ids.b, &bd.g)
            .ray("a_perp", ids.a_perp, &bd.g)
            .ray("b_perp", ids.b_perp, &bd.g)
            .ray("n", ids.n, &bd.g);
        rep.real("angle_ab_deg", deg(angle(a, b)));
        for (a, b) in [("1", "1"), ("1", "0"), ("0", "1")] {
            rep.claim(Claim::Infeasible {
                pins: pins(&[("a", a), ("b", b)]),
            });
        }
        rep.claim(Claim::Feasible {
            pins: pins(&[("a", "0"), ("b", "0")]),
        });
        Ok(bd.finish(rep))
    }

    /// G(z,q,r) together with Gamma(z,l): p(z) = 1 forces p(q) > p(r).
    pub fn d1(&self, z: &Ray, q: &Ray, r: &Ray) -> Result<OrthoGraph> {
        let mut bd = Build::new(self.tol);
        let p = bd.d1(z, q, r)?;
        let mut rep = GadgetReport::new("d1");
        rep.ray("z", p.z, &bd.g)
            .ray("q", p.q, &bd.g)
            .ray("r", p.r, &bd.g)
            .ray("l", p.l, &bd.g);
        rep.real("angle_zl_deg", deg(angle(z, &p.l_ray)));
        rep.claim(Claim::MaxBelow {
            pins: pins(&[("z", "1")]),
            objective: Claim::difference("r", "q"),
            bound: "0".into(),
        });
        Ok(bd.finish(rep))
    }

    /// Chain of D1 gadgets: p(z) = 1 forces p(a) > p(b).
    pub fn d(&self, z: &Ray, a: &Ray, b: &Ray) -> Result<OrthoGraph> {
        let mut bd = Build::new(self.tol);
        let plan = bd.d(z, a, b)?;
        let mut rep = GadgetReport::new("d");
        let (iz, ia, ib) = (bd.g.add_ray(*z), bd.g.add_ray(*a), bd.g.add_ray(*b));
        rep.ray("z", iz, &bd.g).ray("a", ia, &bd.g).ray("b", ib, &bd.g);
        rep.real("angle_za_deg", deg(angle(z, a)))
            .real("angle_zb_deg", deg(angle(z, b)));
        let mut th = angle(z, a);
        for (k, d) in plan.dphis.iter().enumerate() {
            rep.real(&format!("dphi{}_deg", k + 1), deg(*d))
                .real(&format!("angle_zl{}_deg", k + 1), deg(chain::side_angle(th, *d)));
            th = (th.tan() / d.cos()).atan();
        }
        rep.claim(Claim::MaxBelow {
            pins: pins(&[("z", "1")]),
            objective: Claim::difference("b", "a"),
            bound: "0".into(),
        });
        Ok(bd.finish(rep))
    }

    /// Witness rays for Lambda_k: colatitudes evenly spread over [15, 75]
    /// degrees, each one perpendicular step from the previous.
    pub fn lambda_witnesses(&self, z: &Ray, k: usize) -> Result<Vec<Ray>> {
        if k < 2 {
            return Err(Error::InvalidInput("k must be at least 2".into()));
        }
        let colat = |i: usize| (15.0 + 60.0 * i as f64 / (k - 1) as f64).to_radians();
        let mut out = vec![Ray::from_polar(z, colat(0), 0.0)?];
        for i in 1..k {
            let dphi = (colat(i - 1).tan() / colat(i).tan()).acos();
            out.push(perp_step(z, &out[i - 1], dphi)?);
        }
        Ok(out)
    }

    /// Union of d(z, a_i, a_{i+1}): every state with p(z) = 1 takes at least
    /// k distinct values on the witnesses.
    pub fn lambda_k(&self, z: &Ray, k: usize) -> Result<OrthoGraph> {
        let ws = self.lambda_witnesses(z, k)?;
        let mut bd = Build::new(self.tol);
        for w in ws.windows(2) {
            bd.d(z, &w[0], &w[1])?;
        }
        let mut rep = GadgetReport::new("lambda");
        let iz = bd.g.add_ray(*z);
        rep.ray("z", iz, &bd.g);
        for (i, w) in ws.iter().enumerate() {
            let id = bd.g.add_ray(*w);
            rep.ray(&format!("a{}", i + 1), id, &bd.g);
            rep.real(&format!("angle_za{}_deg", i + 1), deg(angle(z, w)));
        }
        rep.real("k", k as f64);
        for i in 1..k {
            rep.claim(Claim::MaxBelow {
                pins: pins(&[("z", "1")]),
                objective: Claim::difference(&format!("a{}", i + 1), &format!("a{i}")),
                bound: "0".into(),
            });
        }
        Ok(bd.finish(rep))
    }

    /// e1, e2, e3, b12, b13, b23 with the frame triple and detected pairs.
    pub fn frame_basis(&self) -> OrthoGraph {
        let mut g = OrthoGraph::new(self.tol);
        let names = ["e1", "e2", "e3", "b12", "b13", "b23"];
        let rays = [
            Ray::E1,
            Ray::E2,
            Ray::E3,
            Ray::diagonal(1, 2),
            Ray::diagonal(1, 3),
            Ray::diagonal(2, 3),
        ];
        for r in rays {
            g.add_ray(r);
        }
        g.certify_triple(0, 1, 2).expect("standard basis is orthonormal");
        let mut g = g.detect_orthogonality();
        let mut rep = GadgetReport::new("frame");
        for (i, n) in names.iter().enumerate() {
            rep.ray(n, i, &g);
        }
        rep.claim(Claim::MaxAtMost {
            pins: pins(&[("e3", "1")]),
            objective: vec![crate::graph::Term {
                ray: "b12".into(),
                coeff: "1".into(),
            }],
            bound: "0".into(),
        });
        g.provenance.push(rep);
        g
    }
}

/// Emit `d(z, a, b)` into an existing graph; used for cumulative enrichments.
pub(crate) fn extend_with_d(g: &mut OrthoGraph, z: &Ray, a: &Ray, b: &Ray) -> Result<()> {
    let mut bd = Build {
        g: std::mem::take(g),
        pirons: 0,
    };
    let res = bd.d(z, a, b);
    *g = bd.g;
    res.map(|_| ())
}

#[cfg(test)]
mod tests;
