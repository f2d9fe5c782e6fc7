//! Arc schedules for the descent c_1..c_n along the great circle through a
//! and b, ending orthogonal to a.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

use super::chain::{plan_steps, CHAIN_MAX_STEP};

const MIN_STEP: f64 = 1e-3;

/// Number of chain steps for a pole between two rays on opposite sides at
/// arc distances `near` < `far`.
fn chain_cost(near: f64, far: f64) -> Option<usize> {
    plan_steps(PI, near.tan() / far.tan(), CHAIN_MAX_STEP)
        .ok()
        .map(|s| s.len())
}

/// Strictly decreasing arc steps s_1 > s_2 > ... summing to pi/2 - theta with
/// s_1 < theta.
fn candidate(theta: f64, f: f64, lambda: f64) -> Option<Vec<f64>> {
    let total = FRAC_PI_2 - theta;
    let mut steps = Vec::new();
    let mut used = 0.0;
    let mut s = f * theta;
    loop {
        if used + s >= total {
            let rest = total - used;
            if rest < MIN_STEP {
                return None;
            }
            steps.push(rest);
            return Some(steps);
        }
        steps.push(s);
        used += s;
        s *= lambda;
        if s < MIN_STEP {
            return None;
        }
    }
}

fn cost(theta: f64, steps: &[f64]) -> Option<usize> {
    let mut prev = theta;
    let mut total = 0;
    for &s in steps {
        total += chain_cost(s, prev)?;
        prev = s;
    }
    Some(total)
}

fn search(theta: f64) -> Option<Vec<f64>> {
    let mut best: Option<(usize, usize, Vec<f64>)> = None;
    let mut consider = |steps: Vec<f64>| {
        if let Some(c) = cost(theta, &steps) {
            let better = match &best {
                None => true,
                Some((bc, bn, _)) => c < *bc || (c == *bc && steps.len() < *bn),
            };
            if better {
                best = Some((c, steps.len(), steps));
            }
        }
    };
    let rest = FRAC_PI_2 - theta;
    if rest < theta {
        consider(vec![rest]);
    }
    for fi in 0..35 {
        let f = 0.30 + 0.02 * fi as f64;
        for li in 0..140 {
            let lambda = 0.300 + 0.005 * li as f64;
            if let Some(s) = candidate(theta, f, lambda) {
                consider(s);
            }
        }
    }
    best.map(|(_, _, s)| s)
}

/// Arc steps of the descent for rays at angle `theta` (radians).
pub fn schedule(theta: f64) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Precondition(
            "descent needs two distinct, non orthogonal rays".into(),
        ));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&theta.to_bits()) {
        return Ok(s.clone());
    }
    let s = search(theta)
        .ok_or_else(|| Error::Degenerate(format!("no descent schedule for angle {theta}")))?;
    cache.lock().unwrap().insert(theta.to_bits(), s.clone());
    Ok(s)
}

/// Total chain steps the schedule implies (one Piron gadget per step).
pub fn schedule_cost(theta: f64) -> Result<usize> {
    let s = schedule(theta)?;
    cost(theta, &s).ok_or_else(|| Error::Degenerate("descent chain unplannable".into()))
}
