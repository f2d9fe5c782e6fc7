use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{fmt_coord, OrthoGraph};

/// A 3-dimensional ray set lifted to dimension n: the original rays padded
/// with zeros, plus e_4..e_n, and every triple extended by all padding rays.
/// Documentation and export only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedRecord {
    pub dimension: usize,
    pub rays: Vec<Vec<String>>,
    /// Indices (into `rays`) of the padding rays e_4..e_n.
    pub padding: Vec<usize>,
    /// Orthonormal bases of the lifted space: triple + padding.
    pub bases: Vec<Vec<usize>>,
    pub pairs: Vec<[usize; 2]>,
}

pub fn embed_dim(g: &OrthoGraph, n: usize) -> Result<EmbedRecord> {
    if n < 3 {
        return Err(Error::InvalidInput("target dimension must be at least 3".into()));
    }
    let zero = fmt_coord(0.0);
    let mut rays: Vec<Vec<String>> = g
        .rays
        .iter()
        .map(|r| {
            let mut v: Vec<String> = r.coords().iter().map(|x| fmt_coord(*x)).collect();
            v.resize(n, zero.clone());
            v
        })
        .collect();
    let mut padding = Vec::new();
    for k in 3..n {
        let mut v = vec![zero.clone(); n];
        v[k] = fmt_coord(1.0);
        padding.push(rays.len());
        rays.push(v);
    }
    let bases = g
        .triples
        .iter()
        .map(|t| t.iter().copied().chain(padding.iter().copied()).collect())
        .collect();
    Ok(EmbedRecord {
        dimension: n,
        rays,
        padding,
        bases,
        pairs: g.pairs.iter().copied().collect(),
    })
}
