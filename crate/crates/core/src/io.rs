//! graph-json, dot and csv encodings of an [`OrthoGraph`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{fmt_coord, GadgetReport, OrthoGraph};
use crate::sphere::{angle, canonicalize, Ray, Tolerance};

#[derive(Serialize, Deserialize)]
struct GraphJson {
    rays: Vec<[String; 3]>,
    triples: Vec<[usize; 3]>,
    pairs: Vec<[usize; 2]>,
    #[serde(default)]
    provenance: Vec<GadgetReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    GraphJson,
    Dot,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "graph-json" | "json" => Ok(Format::GraphJson),
            "dot" => Ok(Format::Dot),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidInput(format!("unknown format '{s}'"))),
        }
    }
}

pub fn to_graph_json(g: &OrthoGraph) -> String {
    let doc = GraphJson {
        rays: g
            .rays
            .iter()
            .map(|r| r.coords().map(fmt_coord))
            .collect(),
        triples: g.triples.iter().copied().collect(),
        pairs: g.pairs.iter().copied().collect(),
        provenance: g.provenance.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

fn parse_coord(s: &str, ray: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidInput(format!("ray {ray}: bad coordinate '{s}'")))
}

/// Parse graph-json; every ray must be a canonical unit vector and every
/// listed triple and pair must pass the orthogonality check.
pub fn from_graph_json(text: &str, tol: Tolerance) -> Result<OrthoGraph> {
    let doc: GraphJson = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
    let mut g = OrthoGraph::new(tol);
    for (i, c) in doc.rays.iter().enumerate() {
        let v = [
            parse_coord(&c[0], i)?,
            parse_coord(&c[1], i)?,
            parse_coord(&c[2], i)?,
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("ray {i} is not a unit vector")));
        }
        let r = canonicalize(v)?;
        if r.coords() != v {
            return Err(Error::InvalidInput(format!("ray {i} is not in canonical form")));
        }
        if g.add_ray(r) != i {
            return Err(Error::InvalidInput(format!("ray {i} duplicates an earlier ray")));
        }
    }
    for t in &doc.triples {
        g.certify_triple(t[0], t[1], t[2])?;
    }
    for p in &doc.pairs {
        g.certify_pair(p[0], p[1])?;
    }
    g.provenance = doc.provenance;
    g.check_invariants()?;
    Ok(g)
}

/// Plain ray list: one `x,y,z` (or whitespace separated) triple per line.
/// Lines starting with `#` are skipped. No constraints are attached.
pub fn rays_from_text(text: &str, tol: Tolerance) -> Result<OrthoGraph> {
    let mut g = OrthoGraph::new(tol);
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("index") {
            continue;
        }
        let parts: Vec<&str> = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|s| s.parse::<f64>()).collect();
        let nums = nums.map_err(|e| Error::parse(ln + 1, 1, e.to_string()))?;
        let v = match nums.len() {
            3 => [nums[0], nums[1], nums[2]],
            4 => [nums[1], nums[2], nums[3]],
            _ => return Err(Error::parse(ln + 1, 1, "expected 3 coordinates")),
        };
        let r = canonicalize(v).map_err(|e| Error::parse(ln + 1, 1, e.to_string()))?;
        g.add_ray(r);
    }
    Ok(g)
}

pub fn to_dot(g: &OrthoGraph) -> String {
    let mut names = vec![String::new(); g.len()];
    if let Some(rep) = g.report() {
        for r in &rep.rays {
            if names[r.index].is_empty() {
                names[r.index] = r.name.clone();
            }
        }
    }
    let mut s = String::from("graph orthogonality {\n");
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            let _ = writeln!(s, "  {i};");
        } else {
            let _ = writeln!(s, "  {i} [label=\"{name}\"];");
        }
    }
    for p in &g.pairs {
        let _ = writeln!(s, "  {} -- {};", p[0], p[1]);
    }
    s.push_str("}\n");
    s
}

pub fn to_csv(g: &OrthoGraph, pole: Option<&Ray>) -> String {
    let mut s = String::from("index,x,y,z");
    if pole.is_some() {
        s.push_str(",angle_to_pole_deg");
    }
    s.push('\n');
    for (i, r) in g.rays.iter().enumerate() {
        let c = r.coords();
        let _ = write!(s, "{i},{},{},{}", fmt_coord(c[0]), fmt_coord(c[1]), fmt_coord(c[2]));
        if let Some(p) = pole {
            let _ = write!(s, ",{:.12}", angle(p, r).to_degrees());
        }
        s.push('\n');
    }
    s
}

pub fn export(g: &OrthoGraph, format: Format, pole: Option<&Ray>) -> String {
    match format {
        Format::GraphJson => to_graph_json(g),
        Format::Dot => to_dot(g),
        Format::Csv => to_csv(g, pole),
    }
}
