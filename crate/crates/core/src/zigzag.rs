//! Zigzag modules along boundary caps and their barcodes.
//!
//! Barcodes are read off from generalized ranks of subpaths by
//! inclusion-exclusion: the multiplicity of the bar `[i, j]` is
//! `r(i, j) - r(i-1, j) - r(i, j+1) + r(i-1, j+1)` where `r(a, b)` is the
//! full-bar multiplicity of the restriction to nodes `a..=b`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{Bifiltration, HomologyBasis};
use crate::grid::{CapVariant, GridInterval, GridPoint, ZigzagPath};
use crate::linalg::{Matrix, PrimeField};
use crate::module::{lim_to_colim_rank, ArrowRef, Diagram, ExplicitModule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowDirection {
    /// node `k` to node `k + 1`
    Forward,
    /// node `k + 1` to node `k`
    Backward,
}

/// A representation of a type-A quiver with arbitrary orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagModule {
    field: PrimeField,
    dims: Vec<usize>,
    arrows: Vec<(ArrowDirection, Matrix)>,
    /// (src, dst) node indices per arrow
    ends: Vec<(usize, usize)>,
}

impl ZigzagModule {
    pub fn new(
        field: PrimeField,
        dims: Vec<usize>,
        arrows: Vec<(ArrowDirection, Matrix)>,
    ) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::validation("a zigzag module needs at least one node"));
        }
        if arrows.len() + 1 != dims.len() {
            return Err(Error::validation(format!(
                "{} nodes need {} arrows, got {}",
                dims.len(),
                dims.len() - 1,
                arrows.len()
            )));
        }
        let mut ends = Vec::with_capacity(arrows.len());
        for (k, (dir, m)) in arrows.iter().enumerate() {
            let (s, t) = match dir {
                ArrowDirection::Forward => (k, k + 1),
                ArrowDirection::Backward => (k + 1, k),
            };
            if m.field() != field {
                return Err(Error::FieldMismatch(field.modulus(), m.field().modulus()));
            }
            if m.shape() != (dims[t], dims[s]) {
                return Err(Error::validation(format!(
                    "arrow {k} has shape {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    dims[t],
                    dims[s]
                )));
            }
            ends.push((s, t));
        }
        Ok(ZigzagModule {
            field,
            dims,
            arrows,
            ends,
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arrow(&self, k: usize) -> (ArrowDirection, &Matrix) {
        let (d, m) = &self.arrows[k];
        (*d, m)
    }

    pub fn directions(&self) -> Vec<ArrowDirection> {
        self.arrows.iter().map(|(d, _)| *d).collect()
    }

    /// Restriction to nodes `lo..=hi`.
    pub fn subpath(&self, lo: usize, hi: usize) -> ZigzagModule {
        assert!(lo <= hi && hi < self.len(), "subpath {lo}..={hi} out of range");
        ZigzagModule {
            field: self.field,
            dims: self.dims[lo..=hi].to_vec(),
            arrows: self.arrows[lo..hi].to_vec(),
            ends: self.ends[lo..hi]
                .iter()
                .map(|&(s, t)| (s - lo, t - lo))
                .collect(),
        }
    }

    /// Multiplicity of the bar spanning every node.
    pub fn full_bar_multiplicity(&self) -> usize {
        lim_to_colim_rank(self).expect("zigzag posets are connected")
    }

    pub fn barcode(&self) -> ZigzagBarcode {
        let n = self.len();
        // r[i][j] for i <= j
        let mut r = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i..n {
                r[i][j] = self.subpath(i, j).full_bar_multiplicity() as i64;
            }
        }
        let get = |i: isize, j: usize| -> i64 {
            if i < 0 || j >= n {
                0
            } else {
                r[i as usize][j]
            }
        };
        let mut bars = Vec::new();
        for i in 0..n {
            for j in i..n {
                let m = get(i as isize, j) - get(i as isize - 1, j) - get(i as isize, j + 1)
                    + get(i as isize - 1, j + 1);
                assert!(m >= 0, "negative bar multiplicity on [{i}, {j}]");
                if m > 0 {
                    bars.push(Bar {
                        lo: i,
                        hi: j,
                        mult: m as usize,
                    });
                }
            }
        }
        ZigzagBarcode { nodes: n, bars }
    }
}

impl Diagram for ZigzagModule {
    fn field(&self) -> PrimeField {
        self.field
    }

    fn node_count(&self) -> usize {
        self.dims.len()
    }

    fn node_dim(&self, node: usize) -> usize {
        self.dims[node]
    }

    fn arrows(&self) -> Vec<ArrowRef<'_>> {
        self.arrows
            .iter()
            .zip(&self.ends)
            .map(|((_, m), &(src, dst))| ArrowRef { src, dst, map: m })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bar {
    pub lo: usize,
    pub hi: usize,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZigzagBarcode {
    pub nodes: usize,
    pub bars: Vec<Bar>,
}

impl ZigzagBarcode {
    pub fn multiplicity(&self, lo: usize, hi: usize) -> usize {
        self.bars
            .iter()
            .filter(|b| b.lo == lo && b.hi == hi)
            .map(|b| b.mult)
            .sum()
    }

    /// Total multiplicity of bars containing node `k`.
    pub fn dim_at(&self, k: usize) -> usize {
        self.bars
            .iter()
            .filter(|b| b.lo <= k && k <= b.hi)
            .map(|b| b.mult)
            .sum()
    }
}

/// Restriction of `m` to the boundary cap of `interval`. Consecutive equal cap
/// points (a column holding a single min and max element) become one node.
pub fn zigzag_along_cap(
    m: &ExplicitModule,
    interval: &GridInterval,
    variant: CapVariant,
) -> Result<ZigzagModule> {
    if !interval.is_subset_of(m.domain()) {
        return Err(Error::validation(format!(
            "interval {interval} is not contained in the domain {}",
            m.domain()
        )));
    }
    let mut pts = interval.boundary_cap(variant).points().to_vec();
    pts.dedup();
    m.restrict_to_path(&ZigzagPath::new(pts)?)
}

/// Homology along the faithful completion of the boundary cap of `interval`.
pub fn zigzag_from_bifiltration(
    f: &Bifiltration,
    interval: &GridInterval,
    degree: usize,
    variant: CapVariant,
) -> Result<ZigzagModule> {
    if !interval.is_subset_of(f.domain()) {
        return Err(Error::validation(format!(
            "interval {interval} is not contained in the grid {}",
            f.domain()
        )));
    }
    let path = interval.boundary_cap(variant).faithful_completion();
    let mut cache: HashMap<GridPoint, HomologyBasis> = HashMap::new();
    for &p in path.points() {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(p) {
            e.insert(f.homology_basis(p, degree)?);
        }
    }
    let pts = path.points();
    let dims = pts.iter().map(|p| cache[p].dim()).collect();
    let arrows = pts
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.leq(b) {
                (ArrowDirection::Forward, cache[&a].map_into(&cache[&b]))
            } else {
                (ArrowDirection::Backward, cache[&b].map_into(&cache[&a]))
            }
        })
        .collect();
    ZigzagModule::new(f.field(), dims, arrows)
}
