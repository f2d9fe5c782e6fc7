//! Longitude schedules for chains of perpendicular steps around a pole.
//!
//! A chain from q to r with longitude difference `delta` and radius ratio
//! `rho = tan(angle(z,q)) / tan(angle(z,r))` needs steps with
//! `sum dphi = delta (mod 2pi)` and `prod cos(dphi) = rho`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{angle, chart_project, perp_step, signed_delta, Ray, Tolerance};

const ZERO_STEP: f64 = 1e-13;
const TINY_STEP: f64 = 1e-6;
const MAX_ITERS: usize = 10_000;

/// Largest longitude step of a monotone chain.
pub const CHAIN_MAX_STEP: f64 = PI / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub pole: Ray,
    pub waypoints: Vec<Ray>,
    pub dphis: Vec<f64>,
}

/// Two steps (alpha, beta) with alpha + beta = delta and
/// cos(alpha) cos(beta) = rho, both within `max`.
pub(crate) fn two_step(delta: f64, rho: f64, max: f64) -> Option<(f64, f64)> {
    let c = 2.0 * rho - delta.cos();
    if !(-1.0..=1.0).contains(&c) {
        return None;
    }
    let d = c.acos();
    let (a, b) = ((delta + d) / 2.0, (delta - d) / 2.0);
    let slack = 1e-12;
    (a.abs() <= max + slack && b.abs() <= max + slack).then_some((a, b))
}

/// Step sequence realising (delta, rho) with every |step| <= max.
pub fn plan_steps(delta: f64, rho: f64, max: f64) -> Result<Vec<f64>> {
    let mut delta = signed_delta(delta);
    let mut rho = rho;
    let mut steps = Vec::new();
    let push = |steps: &mut Vec<f64>, s: f64| {
        if s.abs() > ZERO_STEP {
            steps.push(s);
        }
    };
    for _ in 0..MAX_ITERS {
        if delta.abs() <= ZERO_STEP && (rho - 1.0).abs() <= 1e-12 {
            return Ok(steps);
        }
        if rho >= 1.0 - 1e-15 {
            return Err(Error::Degenerate(
                "chain endpoints at equal distance from the pole with different longitudes".into(),
            ));
        }
        if (delta.cos() - rho).abs() < 1e-12 && delta.abs() <= max {
            push(&mut steps, delta);
            return Ok(steps);
        }
        if let Some((a, b)) = two_step(delta, rho, max) {
            let small = a.abs().min(b.abs());
            if small <= ZERO_STEP || small >= TINY_STEP {
                push(&mut steps, a);
                push(&mut steps, b);
                return Ok(steps);
            }
            // avoid a near-duplicate waypoint: split the arc instead
            let s = delta / 2.0;
            push(&mut steps, s);
            rho /= s.cos();
            delta -= s;
            continue;
        }
        let half = (delta / 2.0).cos();
        let s = if rho > half * half {
            let mut n = 2usize;
            loop {
                let step = delta / n as f64;
                if step.abs() <= max && step.cos().powi(n as i32) >= rho {
                    break step;
                }
                n += 1;
                if n > MAX_ITERS {
                    return Err(Error::Degenerate("chain needs too many steps".into()));
                }
            }
        } else if delta >= 0.0 {
            max
        } else {
            -max
        };
        push(&mut steps, s);
        rho /= s.cos();
        delta = signed_delta(delta - s);
    }
    Err(Error::Degenerate("chain planner did not converge".into()))
}

/// Longitude difference and radius ratio from q to r around z.
pub(crate) fn chain_targets(z: &Ray, q: &Ray, r: &Ray) -> Result<(f64, f64)> {
    let pq = chart_project(z, q)?;
    let pr = chart_project(z, r)?;
    Ok((signed_delta(pr.longitude - pq.longitude), pq.radius / pr.radius))
}

/// Walk the steps from q and snap the end onto r.
pub(crate) fn realise(z: &Ray, q: &Ray, r: &Ray, dphis: Vec<f64>) -> Result<ChainPlan> {
    let mut waypoints = vec![*q];
    for d in &dphis {
        let next = perp_step(z, waypoints.last().unwrap(), *d)?;
        waypoints.push(next);
    }
    let end = waypoints.last().unwrap();
    if angle(end, r) > 1e-9 {
        return Err(Error::Degenerate(format!(
            "chain ends {:.3e} rad away from its target",
            angle(end, r)
        )));
    }
    *waypoints.last_mut().unwrap() = *r;
    Ok(ChainPlan {
        pole: *z,
        waypoints,
        dphis,
    })
}

pub fn plan_chain(z: &Ray, q: &Ray, r: &Ray, tol: &Tolerance) -> Result<ChainPlan> {
    let tq = angle(z, q);
    let tr = angle(z, r);
    if tq < tol.dedup_eps {
        return Err(Error::Degenerate("chain start at the pole".into()));
    }
    if tr >= std::f64::consts::FRAC_PI_2 - 1e-9 {
        return Err(Error::OutOfChart { angle: tr });
    }
    if angle(q, r) < tol.dedup_eps {
        return Ok(ChainPlan {
            pole: *z,
            waypoints: vec![*q],
            dphis: vec![],
        });
    }
    if tq > tr + 1e-12 {
        return Err(Error::Precondition(
            "chain must not approach the pole (angle(z,q) <= angle(z,r))".into(),
        ));
    }
    let (delta, rho) = chain_targets(z, q, r)?;
    let steps = plan_steps(delta, rho.min(1.0), CHAIN_MAX_STEP)?;
    realise(z, q, r, steps)
}

/// Angle between the pole and l = r x q'' for a step `dphi` taken at
/// colatitude `theta`.
pub(crate) fn side_angle(theta: f64, dphi: f64) -> f64 {
    let psi = (theta.sin() * dphi.tan()).atan();
    (psi.sin().abs() * theta.cos()).clamp(0.0, 1.0).acos()
}

pub(crate) const D_MIN_STEP: f64 = 20.0 * PI / 180.0;
pub(crate) const D_MAX_STEP: f64 = 88.0 * PI / 180.0;

fn d_score(theta0: f64, steps: &[f64]) -> f64 {
    let mut th = theta0;
    let mut s = 0.0;
    for d in steps {
        let phi = side_angle(th, *d);
        let m = phi.min(PI / 2.0 - phi);
        s += 1.0 / (m * m);
        th = (th.tan() / d.cos()).atan();
    }
    s
}

/// Steps for the strict-monotonicity chain: each |step| in [20, 88] degrees,
/// chosen to keep the side rays l away from both the pole and its equator.
pub fn plan_d_steps(theta_q: f64, delta: f64, rho: f64) -> Result<Vec<f64>> {
    let delta = signed_delta(delta);
    if (delta.cos() - rho).abs() < 1e-12 && delta.abs() <= D_MAX_STEP && delta.abs() >= D_MIN_STEP {
        return Ok(vec![delta]);
    }
    let ok = |x: f64| x.abs() >= D_MIN_STEP - 1e-12 && x.abs() <= D_MAX_STEP + 1e-12;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |steps: Vec<f64>| {
        let sc = d_score(theta_q, &steps);
        if best.as_ref().is_none_or(|(b, _)| sc < *b) {
            best = Some((sc, steps));
        }
    };
    for n in 2..=6usize {
        let bulk = n - 2;
        let sigmas: Vec<f64> = (0..=136).map(|k| (20.0 + 0.5 * k as f64).to_radians()).collect();
        let patterns: &[i32] = if bulk == 0 { &[0] } else { &[0, 1, 2] };
        for &pat in patterns {
            for &sigma in &sigmas {
                let mut steps = Vec::with_capacity(n);
                for i in 0..bulk {
                    let s = match pat {
                        0 => sigma,
                        1 => -sigma,
                        _ => {
                            if i % 2 == 0 {
                                sigma
                            } else {
                                -sigma
                            }
                        }
                    };
                    steps.push(s);
                }
                let used: f64 = steps.iter().sum();
                let prod: f64 = steps.iter().map(|s| s.cos()).product();
                let d = signed_delta(delta - used);
                let r = rho / prod;
                if r >= 1.0 {
                    continue;
                }
                if let Some((a, b)) = two_step(d, r, D_MAX_STEP) {
                    if ok(a) && ok(b) {
                        steps.push(a);
                        steps.push(b);
                        consider(steps);
                    }
                }
                if bulk == 0 {
                    break;
                }
            }
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::Degenerate("no admissible step plan for the monotone chain".into()))
}
