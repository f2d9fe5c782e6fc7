//! States and frame functions on a graph as exact linear programs.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Certificate, Claim, GadgetReport, OrthoGraph, Pin, Term};
use crate::lp::{fmt_rational, parse_rational, q, Lp, LpOutcome, LpStatus, Rational, Row};
use crate::search::two_valued_search;
use crate::sphere::Ray;

/// Which certified constraints a state must respect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semantics {
    /// triple sums equal 1, and p(x) + p(y) <= 1 on orthogonal pairs
    #[default]
    TriplesAndPairs,
    TriplesOnly,
}

fn ones(ids: &[usize]) -> Vec<(usize, Rational)> {
    ids.iter().map(|&i| (i, q(1))).collect()
}

/// Polytope of states on a graph with optional pins.
#[derive(Clone, Debug)]
pub struct StatePolytope<'g> {
    pub graph: &'g OrthoGraph,
    pub semantics: Semantics,
    pub pins: BTreeMap<usize, Rational>,
}

impl<'g> StatePolytope<'g> {
    pub fn new(graph: &'g OrthoGraph) -> Self {
        StatePolytope {
            graph,
            semantics: Semantics::default(),
            pins: BTreeMap::new(),
        }
    }

    pub fn with_semantics(mut self, s: Semantics) -> Self {
        self.semantics = s;
        self
    }

    pub fn pin(mut self, ray: usize, value: Rational) -> Result<Self> {
        if ray >= self.graph.len() {
            return Err(Error::InvalidInput(format!("pinned ray {ray} out of range")));
        }
        if value.is_negative() || value > q(1) {
            return Err(Error::InvalidInput(format!(
                "pin value {} outside [0,1]",
                fmt_rational(&value)
            )));
        }
        self.pins.insert(ray, value);
        Ok(self)
    }

    pub fn lp(&self) -> Lp {
        let g = self.graph;
        let mut lp = Lp::new(g.len(), q(0), q(1));
        for t in &g.triples {
            lp.push(Row::eq(ones(t), q(1)));
        }
        if self.semantics == Semantics::TriplesAndPairs {
            for p in g.bare_pairs() {
                lp.push(Row::le(ones(&p), q(1)));
            }
        }
        for (i, v) in &self.pins {
            lp.fix(*i, v.clone());
        }
        lp
    }

    pub fn feasible(&self) -> LpOutcome {
        self.lp().feasible()
    }

    pub fn optimize(&self, objective: &[(usize, Rational)], maximize: bool) -> LpOutcome {
        let lp = self.lp();
        if maximize {
            lp.maximize(objective)
        } else {
            lp.minimize(objective)
        }
    }
}

/// Residuals of a real-valued assignment against the state constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlackReport {
    pub max_triple_residual: f64,
    pub max_pair_excess: f64,
    pub max_bound_excess: f64,
}

impl SlackReport {
    pub fn within(&self, slack: f64) -> bool {
        self.max_triple_residual <= slack && self.max_pair_excess <= slack && self.max_bound_excess <= slack
    }
}

/// Check a floating-point assignment (e.g. Born values) against every triple
/// equality and pair inequality of `g`.
pub fn slack_check(g: &OrthoGraph, p: &[f64]) -> SlackReport {
    let mut r = SlackReport {
        max_triple_residual: 0.0,
        max_pair_excess: 0.0,
        max_bound_excess: 0.0,
    };
    for t in &g.triples {
        let s = p[t[0]] + p[t[1]] + p[t[2]];
        r.max_triple_residual = r.max_triple_residual.max((s - 1.0).abs());
    }
    for pr in &g.pairs {
        r.max_pair_excess = r.max_pair_excess.max(p[pr[0]] + p[pr[1]] - 1.0);
    }
    for v in p {
        r.max_bound_excess = r.max_bound_excess.max(-v).max(v - 1.0);
    }
    r
}

/// Frame functions vanishing on the six basis rays: triple sums 0, |p| <= 1.
#[derive(Clone, Debug)]
pub struct FramePolytope<'g> {
    pub graph: &'g OrthoGraph,
    pub pins: BTreeMap<usize, Rational>,
}

/// Indices of e1, e2, e3, b12, b13, b23 in `g`, if all present.
pub fn basis_indices(g: &OrthoGraph) -> Option<[usize; 6]> {
    let rays = [
        Ray::E1,
        Ray::E2,
        Ray::E3,
        Ray::diagonal(1, 2),
        Ray::diagonal(1, 3),
        Ray::diagonal(2, 3),
    ];
    let mut out = [0; 6];
    for (k, r) in rays.iter().enumerate() {
        out[k] = g.find(r)?;
    }
    Some(out)
}

impl<'g> FramePolytope<'g> {
    /// Frame polytope with the basis pins p(e_i) = p(b_ij) = 0.
    pub fn vanishing_on_basis(graph: &'g OrthoGraph) -> Result<Self> {
        let ids = basis_indices(graph)
            .ok_or_else(|| Error::InvalidInput("graph lacks the basis rays e_i, b_ij".into()))?;
        Ok(FramePolytope {
            graph,
            pins: ids.iter().map(|&i| (i, q(0))).collect(),
        })
    }

    pub fn lp(&self) -> Lp {
        let mut lp = Lp::new(self.graph.len(), q(-1), q(1));
        for t in &self.graph.triples {
            lp.push(Row::eq(ones(t), q(0)));
        }
        for (i, v) in &self.pins {
            lp.fix(*i, v.clone());
        }
        lp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Halving {
    pub holds: bool,
    pub max_ratio: Rational,
}

/// max |p(x0)| over frame functions vanishing on the basis, |p| <= 1.
pub fn halving_check(g: &OrthoGraph, x0: &Ray) -> Result<Halving> {
    let i = g
        .find(x0)
        .ok_or_else(|| Error::InvalidInput("x0 is not a ray of the graph".into()))?;
    let lp = FramePolytope::vanishing_on_basis(g)?.lp();
    let obj = vec![(i, q(1))];
    let hi = lp.maximize(&obj).optimum;
    let lo = lp.minimize(&obj).optimum;
    let m = match (hi, lo) {
        (Some(h), Some(l)) => h.abs().max(l.abs()),
        _ => q(0),
    };
    Ok(Halving {
        holds: m <= crate::lp::frac(1, 2),
        max_ratio: m,
    })
}

fn resolve(rep: &GadgetReport, name: &str) -> Result<usize> {
    rep.index_of(name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown ray name '{name}'")))
}

fn value(s: &str) -> Result<Rational> {
    parse_rational(s).ok_or_else(|| Error::InvalidInput(format!("not a number: '{s}'")))
}

pub fn resolve_pins(rep: &GadgetReport, pins: &[Pin]) -> Result<Vec<(usize, Rational)>> {
    pins.iter()
        .map(|p| Ok((resolve(rep, &p.ray)?, value(&p.value)?)))
        .collect()
}

pub fn resolve_objective(rep: &GadgetReport, terms: &[Term]) -> Result<Vec<(usize, Rational)>> {
    terms
        .iter()
        .map(|t| Ok((resolve(rep, &t.ray)?, value(&t.coeff)?)))
        .collect()
}

fn polytope<'g>(
    g: &'g OrthoGraph,
    sem: Semantics,
    pins: &[(usize, Rational)],
) -> Result<StatePolytope<'g>> {
    let mut p = StatePolytope::new(g).with_semantics(sem);
    for (i, v) in pins {
        p = p.pin(*i, v.clone())?;
    }
    Ok(p)
}

/// Evaluate claim number `k` of `rep` on `g`.
pub fn verify_claim(
    g: &OrthoGraph,
    rep: &GadgetReport,
    k: usize,
    sem: Semantics,
) -> Result<Certificate> {
    let claim = &rep.claims[k];
    let pins = resolve_pins(rep, claim.pins())?;
    let poly = polytope(g, sem, &pins)?;
    let cert = |status: LpStatus, holds: bool, out: Option<&LpOutcome>| Certificate {
        claim: k,
        status: status.to_string(),
        holds,
        optimum: out.and_then(|o| o.optimum.as_ref()).map(fmt_rational),
        witness: out
            .and_then(|o| o.witness.as_ref())
            .map(|w| w.iter().map(fmt_rational).collect()),
    };
    Ok(match claim {
        Claim::Infeasible { .. } => {
            let out = poly.feasible();
            cert(out.status, out.status == LpStatus::Infeasible, None)
        }
        Claim::Feasible { .. } => {
            let out = poly.feasible();
            cert(out.status, out.is_feasible(), Some(&out))
        }
        Claim::MaxBelow {
            objective, bound, ..
        }
        | Claim::MaxAtMost {
            objective, bound, ..
        } => {
            let obj = resolve_objective(rep, objective)?;
            let b = value(bound)?;
            let out = poly.optimize(&obj, true);
            let holds = match &out.optimum {
                None => out.status == LpStatus::Infeasible,
                Some(v) if matches!(claim, Claim::MaxBelow { .. }) => *v < b,
                Some(v) => *v <= b,
            };
            let mut c = cert(out.status, holds, Some(&out));
            c.witness = None;
            c
        }
        Claim::NoTwoValued { .. } => {
            let bits: Vec<(usize, bool)> = pins
                .iter()
                .map(|(i, v)| {
                    if v.is_zero() {
                        Ok((*i, false))
                    } else if *v == q(1) {
                        Ok((*i, true))
                    } else {
                        Err(Error::InvalidInput("two-valued pins must be 0 or 1".into()))
                    }
                })
                .collect::<Result<_>>()?;
            let found = two_valued_search(g, &bits, sem);
            Certificate {
                claim: k,
                status: if found.is_some() { "witness" } else { "none" }.into(),
                holds: found.is_none(),
                optimum: None,
                witness: found.map(|w| w.iter().map(|b| if *b { "1" } else { "0" }.to_string()).collect()),
            }
        }
    })
}

/// Evaluate every claim of the top-level report.
pub fn verify_report(g: &OrthoGraph, sem: Semantics) -> Result<Vec<Certificate>> {
    let rep = g
        .report()
        .ok_or_else(|| Error::InvalidInput("graph carries no report".into()))?;
    (0..rep.claims.len())
        .map(|k| verify_claim(g, rep, k, sem))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::Tolerance;

    fn frame() -> OrthoGraph {
        let mut g = OrthoGraph::new(Tolerance::default());
        g.add_triple(Ray::E1, Ray::E2, Ray::E3).unwrap();
        g
    }

    #[test]
    fn pinned_frame() {
        let g = frame();
        let out = StatePolytope::new(&g).pin(2, q(1)).unwrap().feasible();
        assert_eq!(out.witness.unwrap(), vec![q(0), q(0), q(1)]);
        let out = StatePolytope::new(&g).optimize(&[(0, q(1))], true);
        assert_eq!(out.optimum, Some(q(1)));
        assert!(StatePolytope::new(&g).pin(0, q(2)).is_err());
    }

    #[test]
    fn pair_forces_zero() {
        let mut g = frame();
        let b = g.add_ray(Ray::diagonal(1, 2));
        g.certify_pair(2, b).unwrap();
        let p = StatePolytope::new(&g).pin(2, q(1)).unwrap();
        assert_eq!(p.optimize(&[(b, q(1))], true).optimum, Some(q(0)));
        let p = p.with_semantics(Semantics::TriplesOnly);
        assert_eq!(p.optimize(&[(b, q(1))], true).optimum, Some(q(1)));
    }

    #[test]
    fn halving_examples() {
        let mut g = frame();
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            g.add_ray(Ray::diagonal(i, j));
        }
        let x0 = Ray::new([0.2, 0.3, 0.9]).unwrap();
        g.add_ray(x0);
        let h = halving_check(&g, &x0).unwrap();
        assert_eq!((h.holds, h.max_ratio), (false, q(1)));
        let h = halving_check(&g, &Ray::diagonal(1, 3)).unwrap();
        assert_eq!((h.holds, h.max_ratio), (true, q(0)));
        assert!(halving_check(&frame(), &Ray::E1).is_err());
    }
}
