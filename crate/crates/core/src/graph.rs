use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{angle, Ray, Tolerance, Vec3};

/// Sign of a term in a linear objective over named rays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub ray: String,
    pub coeff: String,
}

/// A named pin `ray = value`, value written as an exact fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub ray: String,
    pub value: String,
}

impl Pin {
    pub fn new(ray: &str, value: &str) -> Pin {
        Pin {
            ray: ray.into(),
            value: value.into(),
        }
    }
}

/// A verifiable statement about the states on a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    Infeasible { pins: Vec<Pin> },
    Feasible { pins: Vec<Pin> },
    /// max objective < bound
    MaxBelow {
        pins: Vec<Pin>,
        objective: Vec<Term>,
        bound: String,
    },
    /// max objective <= bound
    MaxAtMost {
        pins: Vec<Pin>,
        objective: Vec<Term>,
        bound: String,
    },
    /// no 0/1 state extends the pins
    NoTwoValued { pins: Vec<Pin> },
}

impl Claim {
    pub fn pins(&self) -> &[Pin] {
        match self {
            Claim::Infeasible { pins }
            | Claim::Feasible { pins }
            | Claim::MaxBelow { pins, .. }
            | Claim::MaxAtMost { pins, .. }
            | Claim::NoTwoValued { pins } => pins,
        }
    }

    pub fn ray_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.pins().iter().map(|p| p.ray.as_str()).collect();
        if let Claim::MaxBelow { objective, .. } | Claim::MaxAtMost { objective, .. } = self {
            out.extend(objective.iter().map(|t| t.ray.as_str()));
        }
        out
    }

    /// "b - a" style objective as terms.
    pub fn difference(plus: &str, minus: &str) -> Vec<Term> {
        vec![
            Term {
                ray: plus.into(),
                coeff: "1".into(),
            },
            Term {
                ray: minus.into(),
                coeff: "-1".into(),
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedRay {
    pub name: String,
    pub index: usize,
    pub coords: [String; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedReal {
    pub name: String,
    pub value: f64,
}

/// LP result attached to a claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: usize,
    pub status: String,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

pub const PAIR_SEMANTICS: &str = "states: p >= 0, sum 1 on every certified triple, \
p(x) + p(y) <= 1 on every certified orthogonal pair not inside a triple; \
completion triples make the claims hold under triples-only reading too";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetReport {
    pub gadget: String,
    pub rays: Vec<NamedRay>,
    pub reals: Vec<NamedReal>,
    pub claims: Vec<Claim>,
    pub semantics: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<Certificate>,
}

pub(crate) fn fmt_coord(x: f64) -> String {
    format!("{x:.16e}")
}

impl GadgetReport {
    pub fn new(gadget: &str) -> GadgetReport {
        GadgetReport {
            gadget: gadget.into(),
            rays: vec![],
            reals: vec![],
            claims: vec![],
            semantics: PAIR_SEMANTICS.into(),
            certificates: vec![],
        }
    }

    pub fn ray(&mut self, name: &str, index: usize, g: &OrthoGraph) -> &mut Self {
        let c = g.rays[index].coords();
        self.rays.push(NamedRay {
            name: name.into(),
            index,
            coords: [fmt_coord(c[0]), fmt_coord(c[1]), fmt_coord(c[2])],
        });
        self
    }

    pub fn real(&mut self, name: &str, value: f64) -> &mut Self {
        self.reals.push(NamedReal {
            name: name.into(),
            value,
        });
        self
    }

    pub fn claim(&mut self, c: Claim) -> &mut Self {
        self.claims.push(c);
        self
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.rays.iter().find(|r| r.name == name).map(|r| r.index)
    }
}

type Cell = (i64, i64, i64);

const CELL: f64 = 1e-6;

fn cell(v: Vec3) -> Cell {
    (
        (v[0] / CELL).round() as i64,
        (v[1] / CELL).round() as i64,
        (v[2] / CELL).round() as i64,
    )
}

/// Deduplicated rays with certified orthonormal triples and orthogonal pairs.
#[derive(Clone, Debug, Default)]
pub struct OrthoGraph {
    pub rays: Vec<Ray>,
    pub triples: BTreeSet<[usize; 3]>,
    pub pairs: BTreeSet<[usize; 2]>,
    pub provenance: Vec<GadgetReport>,
    pub tol: Tolerance,
    grid: HashMap<Cell, Vec<usize>>,
}

impl PartialEq for OrthoGraph {
    fn eq(&self, other: &Self) -> bool {
        self.rays == other.rays
            && self.triples == other.triples
            && self.pairs == other.pairs
            && self.provenance == other.provenance
    }
}

fn sorted3(i: usize, j: usize, k: usize) -> [usize; 3] {
    let mut t = [i, j, k];
    t.sort_unstable();
    t
}

fn sorted2(i: usize, j: usize) -> [usize; 2] {
    if i < j {
        [i, j]
    } else {
        [j, i]
    }
}

impl OrthoGraph {
    pub fn new(tol: Tolerance) -> OrthoGraph {
        OrthoGraph {
            tol,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Index of a stored ray within `dedup_eps` of `r` (either sign).
    pub fn find(&self, r: &Ray) -> Option<usize> {
        let v = r.coords();
        let neg = [-v[0], -v[1], -v[2]];
        for w in [v, neg] {
            let (a, b, c) = cell(w);
            for da in -1..=1 {
                for db in -1..=1 {
                    for dc in -1..=1 {
                        if let Some(ids) = self.grid.get(&(a + da, b + db, c + dc)) {
                            for &i in ids {
                                if angle(&self.rays[i], r) < self.tol.dedup_eps {
                                    return Some(i);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn add_ray(&mut self, r: Ray) -> usize {
        if let Some(i) = self.find(&r) {
            return i;
        }
        let i = self.rays.len();
        self.rays.push(r);
        self.grid.entry(cell(r.coords())).or_default().push(i);
        i
    }

    fn check_orthogonal(&self, ids: &[usize]) -> Result<()> {
        let mut worst: f64 = 0.0;
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                let x = if ids[a] == ids[b] {
                    1.0
                } else {
                    self.rays[ids[a]].dot(&self.rays[ids[b]]).abs()
                };
                worst = worst.max(x);
            }
        }
        if worst >= self.tol.ortho_eps {
            return Err(Error::CertificationRejected {
                max_inner: worst,
                ortho_eps: self.tol.ortho_eps,
            });
        }
        Ok(())
    }

    fn check_index(&self, ids: &[usize]) -> Result<()> {
        match ids.iter().find(|&&i| i >= self.rays.len()) {
            Some(i) => Err(Error::InvalidInput(format!("ray index {i} out of range"))),
            None => Ok(()),
        }
    }

    /// Record an orthonormal triple and its three pairs.
    pub fn certify_triple(&mut self, i: usize, j: usize, k: usize) -> Result<()> {
        self.check_index(&[i, j, k])?;
        self.check_orthogonal(&[i, j, k])?;
        self.triples.insert(sorted3(i, j, k));
        for (a, b) in [(i, j), (i, k), (j, k)] {
            self.pairs.insert(sorted2(a, b));
        }
        Ok(())
    }

    pub fn certify_pair(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_index(&[i, j])?;
        self.check_orthogonal(&[i, j])?;
        self.pairs.insert(sorted2(i, j));
        Ok(())
    }

    /// Add three rays and certify them as a triple; returns their indices.
    pub fn add_triple(&mut self, a: Ray, b: Ray, c: Ray) -> Result<[usize; 3]> {
        let ids = [self.add_ray(a), self.add_ray(b), self.add_ray(c)];
        self.certify_triple(ids[0], ids[1], ids[2])?;
        Ok(ids)
    }

    /// Merge `other` into `self`, remapping indices of constraints and reports.
    pub fn absorb(&mut self, other: &OrthoGraph) -> Vec<usize> {
        let map: Vec<usize> = other.rays.iter().map(|r| self.add_ray(*r)).collect();
        for t in &other.triples {
            self.triples.insert(sorted3(map[t[0]], map[t[1]], map[t[2]]));
        }
        for p in &other.pairs {
            self.pairs.insert(sorted2(map[p[0]], map[p[1]]));
        }
        for rep in &other.provenance {
            let mut rep = rep.clone();
            for r in rep.rays.iter_mut() {
                r.index = map[r.index];
            }
            self.provenance.push(rep);
        }
        map
    }

    pub fn union(&self, other: &OrthoGraph) -> OrthoGraph {
        let mut g = self.clone();
        g.absorb(other);
        g
    }

    /// Certify every orthogonal pair and triple found among the rays.
    pub fn detect_orthogonality(&self) -> OrthoGraph {
        let mut g = self.clone();
        let n = g.rays.len();
        let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
        for (i, row) in adj.iter_mut().enumerate() {
            for j in i + 1..n {
                if g.rays[i].dot(&g.rays[j]).abs() < g.tol.ortho_eps {
                    row.push(j);
                    g.pairs.insert([i, j]);
                }
            }
        }
        for i in 0..n {
            for (a, &j) in adj[i].iter().enumerate() {
                for &k in &adj[i][a + 1..] {
                    if adj[j].binary_search(&k).is_ok() {
                        g.triples.insert([i, j, k]);
                    }
                }
            }
        }
        g
    }

    /// Pairs that do not lie inside any certified triple.
    pub fn bare_pairs(&self) -> Vec<[usize; 2]> {
        let mut covered = BTreeSet::new();
        for t in &self.triples {
            covered.insert([t[0], t[1]]);
            covered.insert([t[0], t[2]]);
            covered.insert([t[1], t[2]]);
        }
        self.pairs.difference(&covered).copied().collect()
    }

    /// Largest |<x,y>| over all certified pairs.
    pub fn max_pair_inner(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| self.rays[p[0]].dot(&self.rays[p[1]]).abs())
            .fold(0.0, f64::max)
    }

    /// Structural invariants: no near-duplicate rays, certified constraints
    /// orthogonal, pairs closed under triple projection, report rays valid.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, r) in self.rays.iter().enumerate() {
            if let Some(j) = self.find(r) {
                if j != i {
                    return Err(Error::InvalidInput(format!("rays {j} and {i} coincide")));
                }
            }
        }
        for t in &self.triples {
            self.check_index(t)?;
            self.check_orthogonal(t)?;
            for p in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
                if !self.pairs.contains(&p) {
                    return Err(Error::InvalidInput(format!("pair {p:?} missing")));
                }
            }
        }
        for p in &self.pairs {
            self.check_index(p)?;
            self.check_orthogonal(p)?;
        }
        for rep in &self.provenance {
            for r in &rep.rays {
                self.check_index(&[r.index])?;
            }
            for c in &rep.claims {
                for name in c.ray_names() {
                    if rep.index_of(name).is_none() {
                        return Err(Error::InvalidInput(format!(
                            "claim in '{}' names unknown ray '{name}'",
                            rep.gadget
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Top-level report: the last provenance entry.
    pub fn report(&self) -> Option<&GadgetReport> {
        self.provenance.last()
    }

    pub fn report_mut(&mut self) -> Option<&mut GadgetReport> {
        self.provenance.last_mut()
    }

    /// Look up a ray index by name in the top-level report.
    pub fn named(&self, name: &str) -> Option<usize> {
        self.report().and_then(|r| r.index_of(name))
    }
}
