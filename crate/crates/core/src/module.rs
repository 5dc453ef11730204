//! Explicit persistence modules over grid intervals, and the limit / colimit
//! machinery shared with zigzag modules.
//!
//! A module is stored on cover relations only: one matrix per unit step to the
//! right and one per unit step up. Longer structure maps are composed on demand
//! and memoized. Limits are computed as section spaces (kernel of the stacked
//! cover constraints) and colimits as quotients of the direct sum by the span
//! of cover relations.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::filtration::{Bifiltration, HomologyBasis};
use crate::grid::{GridInterval, GridPoint, ZigzagPath};
use crate::linalg::{quotient_map, Matrix, PrimeField};
use crate::zigzag::{ArrowDirection, ZigzagModule};

// ============================================================================
// Diagrams: the common shape of grid modules and zigzag modules
// ============================================================================

/// A generating arrow `src -> dst` of a finite poset diagram.
#[derive(Debug, Clone, Copy)]
pub struct ArrowRef<'a> {
    pub src: usize,
    pub dst: usize,
    pub map: &'a Matrix,
}

/// A functor from a finite poset, presented by the matrices on a generating set
/// of relations (cover relations, or the arrows of a zigzag).
pub trait Diagram {
    fn field(&self) -> PrimeField;
    fn node_count(&self) -> usize;
    fn node_dim(&self, node: usize) -> usize;
    fn arrows(&self) -> Vec<ArrowRef<'_>>;

    fn total_dim(&self) -> usize {
        (0..self.node_count()).map(|i| self.node_dim(i)).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        (0..self.node_count())
            .map(|i| {
                let o = acc;
                acc += self.node_dim(i);
                o
            })
            .collect()
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for a in self.arrows() {
            let (ra, rb) = (find(&mut parent, a.src), find(&mut parent, a.dst));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|i| find(&mut parent, i) == root)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    Limit,
    Colimit,
}

/// A (co)cone over a diagram.
///
/// For a limit, `legs[i]` is the projection `π_i : L -> M_i` (shape
/// `dim M_i x dim L`) and `basis` holds the sections as columns of the direct
/// sum. For a colimit, `legs[i]` is the injection `i_i : M_i -> C` (shape
/// `dim C x dim M_i`) and `basis` is the quotient map out of the direct sum.
#[derive(Debug, Clone)]
pub struct ConePresentation {
    pub kind: ConeKind,
    pub dim: usize,
    pub basis: Matrix,
    pub legs: Vec<Matrix>,
}

/// Section space of the diagram.
pub fn limit<D: Diagram + ?Sized>(d: &D) -> ConePresentation {
    let f = d.field();
    let offsets = d.offsets();
    let total = d.total_dim();
    let arrows = d.arrows();
    let rows: usize = arrows.iter().map(|a| d.node_dim(a.dst)).sum();
    let mut constraints = Matrix::zeros(f, rows, total);
    let mut r0 = 0;
    for a in &arrows {
        // v_dst - A v_src = 0
        let (ds, dt) = (d.node_dim(a.src), d.node_dim(a.dst));
        for i in 0..dt {
            constraints.set(r0 + i, offsets[a.dst] + i, 1);
            for j in 0..ds {
                let v = a.map.get(i, j);
                if v != 0 {
                    constraints.set(r0 + i, offsets[a.src] + j, f.neg(v));
                }
            }
        }
        r0 += dt;
    }
    let basis = constraints.kernel_basis();
    let legs = (0..d.node_count())
        .map(|i| basis.select_rows(offsets[i]..offsets[i] + d.node_dim(i)))
        .collect();
    ConePresentation {
        kind: ConeKind::Limit,
        dim: basis.cols(),
        basis,
        legs,
    }
}

/// Quotient of the direct sum by `j_src(v) - j_dst(A v)` over all arrows.
pub fn colimit<D: Diagram + ?Sized>(d: &D) -> ConePresentation {
    let f = d.field();
    let offsets = d.offsets();
    let total = d.total_dim();
    let arrows = d.arrows();
    let cols: usize = arrows.iter().map(|a| d.node_dim(a.src)).sum();
    let mut relations = Matrix::zeros(f, total, cols);
    let mut c0 = 0;
    for a in &arrows {
        let (ds, dt) = (d.node_dim(a.src), d.node_dim(a.dst));
        for j in 0..ds {
            relations.set(offsets[a.src] + j, c0 + j, 1);
            for i in 0..dt {
                let v = a.map.get(i, j);
                if v != 0 {
                    relations.set(offsets[a.dst] + i, c0 + j, f.neg(v));
                }
            }
        }
        c0 += ds;
    }
    let q = quotient_map(f, total, &relations);
    let legs = (0..d.node_count())
        .map(|i| {
            let idx: Vec<usize> = (offsets[i]..offsets[i] + d.node_dim(i)).collect();
            q.select_cols(&idx)
        })
        .collect();
    ConePresentation {
        kind: ConeKind::Colimit,
        dim: q.rows(),
        basis: q,
        legs,
    }
}

/// The canonical limit-to-colimit map `i_p ∘ π_p`, checked to be the same for
/// every node `p`.
pub fn lim_to_colim_map<D: Diagram + ?Sized>(d: &D) -> Result<Matrix> {
    if !d.is_connected() {
        return Err(Error::validation(
            "limit-to-colimit map needs a nonempty connected domain",
        ));
    }
    let lim = limit(d);
    let colim = colimit(d);
    let psi = colim.legs[0].mul(&lim.legs[0]);
    for p in 1..d.node_count() {
        let other = colim.legs[p].mul(&lim.legs[p]);
        assert_eq!(other, psi, "limit-to-colimit map depends on the base node {p}");
    }
    Ok(psi)
}

/// Generalized rank: rank of the canonical limit-to-colimit map.
pub fn lim_to_colim_rank<D: Diagram + ?Sized>(d: &D) -> Result<usize> {
    Ok(lim_to_colim_map(d)?.rank())
}

// ============================================================================
// ExplicitModule
// ============================================================================

/// A persistence module over a finite grid interval with matrices on covers.
#[derive(Debug)]
pub struct ExplicitModule {
    field: PrimeField,
    domain: GridInterval,
    points: Vec<GridPoint>,
    dims: Vec<usize>,
    /// Map from point i to its right neighbour, when that neighbour is in the domain.
    right: Vec<Option<Matrix>>,
    /// Map from point i to its upper neighbour.
    up: Vec<Option<Matrix>>,
    memo: RwLock<HashMap<(usize, usize), Matrix>>,
}

impl Clone for ExplicitModule {
    fn clone(&self) -> Self {
        ExplicitModule {
            field: self.field,
            domain: self.domain.clone(),
            points: self.points.clone(),
            dims: self.dims.clone(),
            right: self.right.clone(),
            up: self.up.clone(),
            memo: RwLock::new(HashMap::new()),
        }
    }
}

impl PartialEq for ExplicitModule {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.domain == other.domain
            && self.dims == other.dims
            && self.right == other.right
            && self.up == other.up
    }
}

impl ExplicitModule {
    /// Builds and validates a module. `map(p, q)` is queried for every cover
    /// `p ⋖ q` of the domain; `None` stands for the zero map.
    pub fn from_fn(
        field: PrimeField,
        domain: GridInterval,
        mut dim: impl FnMut(GridPoint) -> usize,
        mut map: impl FnMut(GridPoint, GridPoint) -> Option<Matrix>,
    ) -> Result<Self> {
        let points: Vec<GridPoint> = domain.points().collect();
        let dims: Vec<usize> = points.iter().map(|&p| dim(p)).collect();
        let mut right = vec![None; points.len()];
        let mut up = vec![None; points.len()];
        for (i, &p) in points.iter().enumerate() {
            for (q, slot) in [
                (GridPoint::new(p.x + 1, p.y), &mut right[i]),
                (GridPoint::new(p.x, p.y + 1), &mut up[i]),
            ] {
                let Some(j) = domain.index_of(q) else { continue };
                let m = map(p, q).unwrap_or_else(|| Matrix::zeros(field, dims[j], dims[i]));
                if m.field() != field {
                    return Err(Error::FieldMismatch(field.modulus(), m.field().modulus()));
                }
                if m.shape() != (dims[j], dims[i]) {
                    return Err(Error::validation(format!(
                        "map {p}->{q} has shape {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        dims[j],
                        dims[i]
                    )));
                }
                *slot = Some(m);
            }
        }
        let module = ExplicitModule {
            field,
            domain,
            points,
            dims,
            right,
            up,
            memo: RwLock::new(HashMap::new()),
        };
        module.check_commutativity()?;
        Ok(module)
    }

    /// Reports the lower-left corner of the first non-commuting unit square.
    pub fn check_commutativity(&self) -> Result<()> {
        for p in self.domain.unit_squares() {
            let i = self.idx(p);
            let r = self.idx(GridPoint::new(p.x + 1, p.y));
            let u = self.idx(GridPoint::new(p.x, p.y + 1));
            let right_then_up = self.up[r].as_ref().unwrap().mul(self.right[i].as_ref().unwrap());
            let up_then_right = self.right[u].as_ref().unwrap().mul(self.up[i].as_ref().unwrap());
            if right_then_up != up_then_right {
                return Err(Error::NotCommutative(p));
            }
        }
        Ok(())
    }

    fn idx(&self, p: GridPoint) -> usize {
        self.domain.index_of(p).expect("point in domain")
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn domain(&self) -> &GridInterval {
        &self.domain
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    /// Dimension at `p`; zero outside the domain.
    pub fn dim(&self, p: GridPoint) -> usize {
        self.domain.index_of(p).map_or(0, |i| self.dims[i])
    }

    pub fn dims(&self) -> BTreeMap<GridPoint, usize> {
        self.points.iter().copied().zip(self.dims.iter().copied()).collect()
    }

    pub fn total_dimension(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Matrix on the cover `p ⋖ q`.
    pub fn cover_map(&self, p: GridPoint, q: GridPoint) -> Result<&Matrix> {
        let i = self.domain.index_of(p).ok_or(Error::OutsideDomain(p))?;
        if !self.domain.contains(q) {
            return Err(Error::OutsideDomain(q));
        }
        if q == GridPoint::new(p.x + 1, p.y) {
            Ok(self.right[i].as_ref().unwrap())
        } else if q == GridPoint::new(p.x, p.y + 1) {
            Ok(self.up[i].as_ref().unwrap())
        } else {
            Err(Error::NotOrdered(p, q))
        }
    }

    /// `φ(p, q)` for `p <= q`, composed along the x-then-y monotone path.
    pub fn structure_map(&self, p: GridPoint, q: GridPoint) -> Result<Matrix> {
        let i = self.domain.index_of(p).ok_or(Error::OutsideDomain(p))?;
        let j = self.domain.index_of(q).ok_or(Error::OutsideDomain(q))?;
        if !p.leq(q) {
            return Err(Error::NotOrdered(p, q));
        }
        if let Some(m) = self.memo.read().unwrap().get(&(i, j)) {
            return Ok(m.clone());
        }
        let mut acc = Matrix::identity(self.field, self.dims[i]);
        let mut cur = p;
        while cur.x < q.x {
            let k = self.idx(cur);
            acc = self.right[k].as_ref().unwrap().mul(&acc);
            cur.x += 1;
        }
        while cur.y < q.y {
            let k = self.idx(cur);
            acc = self.up[k].as_ref().unwrap().mul(&acc);
            cur.y += 1;
        }
        self.memo.write().unwrap().entry((i, j)).or_insert_with(|| acc.clone());
        Ok(acc)
    }

    /// Module induced by a bifiltration in homology degree `degree`.
    pub fn from_bifiltration(f: &Bifiltration, degree: usize) -> Result<Self> {
        let domain = f.domain().clone();
        let bases: HashMap<GridPoint, HomologyBasis> = domain
            .points()
            .map(|p| Ok((p, f.homology_basis(p, degree)?)))
            .collect::<Result<_>>()?;
        ExplicitModule::from_fn(
            f.field(),
            domain,
            |p| bases[&p].dim(),
            |p, q| Some(bases[&p].map_into(&bases[&q])),
        )
    }

    /// Restriction to a sub-interval.
    pub fn restrict(&self, sub: &GridInterval) -> Result<Self> {
        if let Some(p) = sub.points().find(|&p| !self.domain.contains(p)) {
            return Err(Error::OutsideDomain(p));
        }
        ExplicitModule::from_fn(
            self.field,
            sub.clone(),
            |p| self.dim(p),
            |p, q| Some(self.cover_map(p, q).unwrap().clone()),
        )
    }

    /// Zigzag module along a path; repeated points become distinct nodes.
    pub fn restrict_to_path(&self, path: &ZigzagPath) -> Result<ZigzagModule> {
        let pts = path.points();
        if let Some(&p) = pts.iter().find(|&&p| !self.domain.contains(p)) {
            return Err(Error::OutsideDomain(p));
        }
        let dims: Vec<usize> = pts.iter().map(|&p| self.dim(p)).collect();
        let mut arrows = Vec::with_capacity(pts.len().saturating_sub(1));
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.leq(b) {
                arrows.push((ArrowDirection::Forward, self.structure_map(a, b)?));
            } else {
                arrows.push((ArrowDirection::Backward, self.structure_map(b, a)?));
            }
        }
        ZigzagModule::new(self.field, dims, arrows)
    }

    pub fn limit(&self) -> ConePresentation {
        limit(self)
    }

    pub fn colimit(&self) -> ConePresentation {
        colimit(self)
    }

    pub fn lim_to_colim_rank(&self) -> Result<usize> {
        lim_to_colim_rank(self)
    }

    /// `I_I` as a module over `domain`.
    pub fn interval_module(field: PrimeField, interval: &GridInterval, domain: &GridInterval) -> Result<Self> {
        if !interval.is_subset_of(domain) {
            return Err(Error::validation(format!(
                "interval {interval} is not contained in {domain}"
            )));
        }
        ExplicitModule::from_fn(
            field,
            domain.clone(),
            |p| usize::from(interval.contains(p)),
            |p, q| {
                (interval.contains(p) && interval.contains(q)).then(|| Matrix::identity(field, 1))
            },
        )
    }

    /// External direct sum of modules over a common domain.
    pub fn direct_sum(parts: &[ExplicitModule]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::validation("direct sum of an empty list"));
        };
        for m in parts {
            if m.field != first.field {
                return Err(Error::FieldMismatch(first.field.modulus(), m.field.modulus()));
            }
            if m.domain != first.domain {
                return Err(Error::validation("direct sum of modules over different domains"));
            }
        }
        let f = first.field;
        ExplicitModule::from_fn(
            f,
            first.domain.clone(),
            |p| parts.iter().map(|m| m.dim(p)).sum(),
            |p, q| {
                let blocks: Vec<Matrix> =
                    parts.iter().map(|m| m.cover_map(p, q).unwrap().clone()).collect();
                Some(block_diagonal(f, &blocks))
            },
        )
    }

    /// Change of basis by invertible `g_p` at every point: maps become
    /// `g_q A g_p^{-1}`. The result is isomorphic to `self`.
    pub fn conjugate(&self, g: &HashMap<GridPoint, Matrix>) -> Result<Self> {
        let inv: HashMap<GridPoint, Matrix> = g
            .iter()
            .map(|(&p, m)| {
                m.right_inverse()
                    .filter(|_| m.rows() == m.cols())
                    .map(|i| (p, i))
                    .ok_or_else(|| Error::validation(format!("change of basis at {p} is singular")))
            })
            .collect::<Result<_>>()?;
        ExplicitModule::from_fn(
            self.field,
            self.domain.clone(),
            |p| self.dim(p),
            |p, q| Some(g[&q].mul(self.cover_map(p, q).unwrap()).mul(&inv[&p])),
        )
    }

    /// Quotient by the submodule spanned pointwise by `generators[p]` (columns).
    /// The spans must be closed under the structure maps.
    pub fn quotient_by_summand(&self, generators: &HashMap<GridPoint, Matrix>) -> Result<Self> {
        let f = self.field;
        let mut sub: HashMap<GridPoint, Matrix> = HashMap::new();
        for &p in &self.points {
            let g = match generators.get(&p) {
                Some(g) => {
                    if g.rows() != self.dim(p) {
                        return Err(Error::validation(format!(
                            "generators at {p} have length {}, expected {}",
                            g.rows(),
                            self.dim(p)
                        )));
                    }
                    g.column_space()
                }
                None => Matrix::zeros(f, self.dim(p), 0),
            };
            sub.insert(p, g);
        }
        for (p, q) in self.domain.covers() {
            let img = self.cover_map(p, q)?.mul(&sub[&p]);
            if sub[&q].solve_matrix(&img).is_none() {
                return Err(Error::NotSubmodule(format!(
                    "image of the span at {p} leaves the span at {q}"
                )));
            }
        }
        let quot: HashMap<GridPoint, Matrix> = self
            .points
            .iter()
            .map(|&p| (p, quotient_map(f, self.dim(p), &sub[&p])))
            .collect();
        let lifts: HashMap<GridPoint, Matrix> = quot
            .iter()
            .map(|(&p, q)| (p, q.right_inverse().expect("quotient maps are surjective")))
            .collect();
        ExplicitModule::from_fn(
            f,
            self.domain.clone(),
            |p| quot[&p].rows(),
            |p, q| Some(quot[&q].mul(self.cover_map(p, q).unwrap()).mul(&lifts[&p])),
        )
    }

    // ------------------------------------------------------------------------
    // Sections
    // ------------------------------------------------------------------------

    /// Whether `v` (one vector per domain point) is a global section.
    pub fn is_section(&self, v: &Section) -> bool {
        self.domain.covers().into_iter().all(|(p, q)| match (v.get(p), v.get(q)) {
            (Some(a), Some(b)) => self.cover_map(p, q).unwrap().mul_vec(a) == *b,
            _ => false,
        })
    }

    /// Whether `v` (one vector per path node) is a section along `path`:
    /// consecutive entries are related by the structure map between them.
    pub fn is_section_along_path(&self, path: &ZigzagPath, v: &[Vec<u32>]) -> Result<bool> {
        let pts = path.points();
        if v.len() != pts.len() {
            return Err(Error::validation(format!(
                "expected {} components, got {}",
                pts.len(),
                v.len()
            )));
        }
        for (k, (&p, comp)) in pts.iter().zip(v).enumerate() {
            if !self.domain.contains(p) {
                return Err(Error::OutsideDomain(p));
            }
            if comp.len() != self.dim(p) {
                return Err(Error::validation(format!(
                    "component {k} has length {}, expected {}",
                    comp.len(),
                    self.dim(p)
                )));
            }
        }
        for k in 0..pts.len() - 1 {
            let (a, b) = (pts[k], pts[k + 1]);
            let ok = if a.leq(b) {
                self.structure_map(a, b)?.mul_vec(&v[k]) == v[k + 1]
            } else {
                self.structure_map(b, a)?.mul_vec(&v[k + 1]) == v[k]
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Extends a section over a lower fence `fence` to a global section:
    /// `w_q = φ(p, q) v_p` for any fence point `p <= q`.
    pub fn section_extension(&self, fence: &[GridPoint], v: &Section) -> Result<Section> {
        check_lower_fence(&self.domain, fence)?;
        for &p in fence {
            match v.get(p) {
                Some(c) if c.len() == self.dim(p) => {}
                _ => {
                    return Err(Error::NotSection(format!(
                        "missing or mis-sized component at {p}"
                    )))
                }
            }
        }
        for &a in fence {
            for &b in fence {
                if a != b && a.leq(b) && self.structure_map(a, b)?.mul_vec(v.get(a).unwrap()) != *v.get(b).unwrap() {
                    return Err(Error::NotSection(format!(
                        "components at {a} and {b} are not related by the structure map"
                    )));
                }
            }
        }
        let mut out = Section::default();
        for &q in &self.points {
            let mut value: Option<Vec<u32>> = None;
            for &p in fence.iter().filter(|p| p.leq(q)) {
                let w = self.structure_map(p, q)?.mul_vec(v.get(p).unwrap());
                match &value {
                    None => value = Some(w),
                    Some(prev) => {
                        if *prev != w {
                            return Err(Error::NotSection(format!(
                                "extension to {q} is not well defined"
                            )));
                        }
                    }
                }
            }
            out.insert(q, value.expect("fence meets every down-set"));
        }
        Ok(out)
    }

    // ------------------------------------------------------------------------
    // JSON
    // ------------------------------------------------------------------------

    pub fn to_json(&self) -> Value {
        let mut dims = Map::new();
        for (p, d) in self.points.iter().zip(&self.dims) {
            dims.insert(format!("{},{}", p.x, p.y), json!(d));
        }
        let mut maps = Map::new();
        for (p, q) in self.domain.covers() {
            let m = self.cover_map(p, q).unwrap();
            if m.rows() == 0 || m.cols() == 0 {
                continue;
            }
            maps.insert(
                format!("{},{}->{},{}", p.x, p.y, q.x, q.y),
                json!(m.to_rows()),
            );
        }
        json!({
            "field": self.field.modulus(),
            "grid": self.domain,
            "dims": dims,
            "maps": maps,
        })
    }

    /// Loads the JSON format. Maps are keyed by cover relations; a map may be
    /// omitted only when one of its endpoints has dimension zero.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let field = match v.get("field") {
            None => PrimeField::F2,
            Some(x) => {
                let p = x
                    .as_u64()
                    .ok_or_else(|| Error::Syntax("`field` must be an integer".into()))?;
                PrimeField::new(p as u32)?
            }
        };
        let grid_v = v.get("grid").ok_or_else(|| Error::Syntax("missing `grid`".into()))?;
        let domain: GridInterval = serde_json::from_value(grid_v.clone()).map_err(|e| {
            if e.is_data() && e.to_string().contains("not") {
                Error::NotInterval(e.to_string())
            } else {
                Error::Syntax(format!("bad `grid`: {e}"))
            }
        })?;
        let mut dims: HashMap<GridPoint, usize> = HashMap::new();
        if let Some(d) = v.get("dims") {
            let obj = d
                .as_object()
                .ok_or_else(|| Error::Syntax("`dims` must be an object".into()))?;
            for (k, val) in obj {
                let p = parse_point_key(k)?;
                if !domain.contains(p) {
                    return Err(Error::OutsideDomain(p));
                }
                let n = val
                    .as_u64()
                    .ok_or_else(|| Error::Syntax(format!("dimension at `{k}` must be a nonnegative integer")))?;
                dims.insert(p, n as usize);
            }
        }
        let mut maps: HashMap<(GridPoint, GridPoint), Matrix> = HashMap::new();
        if let Some(m) = v.get("maps") {
            let obj = m
                .as_object()
                .ok_or_else(|| Error::Syntax("`maps` must be an object".into()))?;
            for (k, val) in obj {
                let (a, b) = k
                    .split_once("->")
                    .ok_or_else(|| Error::Syntax(format!("map key `{k}` must look like `x,y->x,y`")))?;
                let (p, q) = (parse_point_key(a)?, parse_point_key(b)?);
                if !domain.contains(p) {
                    return Err(Error::OutsideDomain(p));
                }
                if !domain.contains(q) {
                    return Err(Error::OutsideDomain(q));
                }
                if !p.is_cover_of(q) {
                    return Err(Error::validation(format!("map key `{k}` is not a cover relation")));
                }
                let (dp, dq) = (*dims.get(&p).unwrap_or(&0), *dims.get(&q).unwrap_or(&0));
                let rows = val
                    .as_array()
                    .ok_or_else(|| Error::Syntax(format!("map `{k}` must be a list of rows")))?;
                let mut data: Vec<Vec<i64>> = Vec::with_capacity(rows.len());
                for row in rows {
                    let r = row
                        .as_array()
                        .ok_or_else(|| Error::Syntax(format!("map `{k}` must be a list of rows")))?;
                    data.push(
                        r.iter()
                            .map(|e| e.as_i64().ok_or_else(|| Error::Syntax(format!("non-integer entry in map `{k}`"))))
                            .collect::<Result<_>>()?,
                    );
                }
                if data.len() != dq || data.iter().any(|r| r.len() != dp) {
                    return Err(Error::validation(format!(
                        "map `{k}` has the wrong shape, expected {dq}x{dp}"
                    )));
                }
                maps.insert((p, q), Matrix::from_rows(field, dp, &data));
            }
        }
        for (p, q) in domain.covers() {
            let (dp, dq) = (*dims.get(&p).unwrap_or(&0), *dims.get(&q).unwrap_or(&0));
            if dp > 0 && dq > 0 && !maps.contains_key(&(p, q)) {
                return Err(Error::validation(format!(
                    "missing map {},{}->{},{}",
                    p.x, p.y, q.x, q.y
                )));
            }
        }
        ExplicitModule::from_fn(
            field,
            domain,
            |p| *dims.get(&p).unwrap_or(&0),
            |p, q| maps.remove(&(p, q)),
        )
    }
}

fn parse_point_key(k: &str) -> Result<GridPoint> {
    let (a, b) = k
        .split_once(',')
        .ok_or_else(|| Error::Syntax(format!("point key `{k}` must look like `x,y`")))?;
    let x = a.trim().parse::<i32>().map_err(|_| Error::Syntax(format!("bad point key `{k}`")))?;
    let y = b.trim().parse::<i32>().map_err(|_| Error::Syntax(format!("bad point key `{k}`")))?;
    Ok(GridPoint::new(x, y))
}

pub fn block_diagonal(field: PrimeField, blocks: &[Matrix]) -> Matrix {
    let rows = blocks.iter().map(Matrix::rows).sum();
    let cols = blocks.iter().map(Matrix::cols).sum();
    let mut out = Matrix::zeros(field, rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                out.set(r0 + r, c0 + c, b.get(r, c));
            }
        }
        r0 += b.rows();
        c0 += b.cols();
    }
    out
}

impl Diagram for ExplicitModule {
    fn field(&self) -> PrimeField {
        self.field
    }

    fn node_count(&self) -> usize {
        self.points.len()
    }

    fn node_dim(&self, node: usize) -> usize {
        self.dims[node]
    }

    fn arrows(&self) -> Vec<ArrowRef<'_>> {
        let mut out = Vec::new();
        for (i, &p) in self.points.iter().enumerate() {
            if let Some(m) = &self.right[i] {
                out.push(ArrowRef { src: i, dst: self.idx(GridPoint::new(p.x + 1, p.y)), map: m });
            }
            if let Some(m) = &self.up[i] {
                out.push(ArrowRef { src: i, dst: self.idx(GridPoint::new(p.x, p.y + 1)), map: m });
            }
        }
        out
    }
}

/// One vector per point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Section {
    components: BTreeMap<GridPoint, Vec<u32>>,
}

impl Section {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: GridPoint, v: Vec<u32>) {
        self.components.insert(p, v);
    }

    pub fn get(&self, p: GridPoint) -> Option<&Vec<u32>> {
        self.components.get(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridPoint, &Vec<u32>)> {
        self.components.iter()
    }

    /// Restriction to a subset of points.
    pub fn restrict(&self, pts: &[GridPoint]) -> Section {
        Section {
            components: pts
                .iter()
                .filter_map(|p| self.components.get(p).map(|v| (*p, v.clone())))
                .collect(),
        }
    }

    pub fn is_nowhere_zero(&self) -> bool {
        self.components.values().all(|v| v.iter().any(|&x| x != 0))
    }
}

impl FromIterator<(GridPoint, Vec<u32>)> for Section {
    fn from_iter<T: IntoIterator<Item = (GridPoint, Vec<u32>)>>(iter: T) -> Self {
        Section {
            components: iter.into_iter().collect(),
        }
    }
}

fn comparability_connected(pts: &[GridPoint]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let mut seen = vec![false; pts.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..pts.len() {
            if !seen[j] && pts[i].comparable(pts[j]) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A lower fence is connected and meets every down-set in a nonempty,
/// connected set.
pub fn check_lower_fence(domain: &GridInterval, fence: &[GridPoint]) -> Result<()> {
    if let Some(&p) = fence.iter().find(|&&p| !domain.contains(p)) {
        return Err(Error::OutsideDomain(p));
    }
    if !comparability_connected(fence) {
        return Err(Error::validation("fence is not connected"));
    }
    for q in domain.points() {
        let below: Vec<GridPoint> = fence.iter().copied().filter(|p| p.leq(q)).collect();
        if !comparability_connected(&below) {
            return Err(Error::validation(format!(
                "fence meets the down-set of {q} in an empty or disconnected set"
            )));
        }
    }
    Ok(())
}

/// Dual of [`check_lower_fence`].
pub fn check_upper_fence(domain: &GridInterval, fence: &[GridPoint]) -> Result<()> {
    if let Some(&p) = fence.iter().find(|&&p| !domain.contains(p)) {
        return Err(Error::OutsideDomain(p));
    }
    if !comparability_connected(fence) {
        return Err(Error::validation("fence is not connected"));
    }
    for q in domain.points() {
        let above: Vec<GridPoint> = fence.iter().copied().filter(|p| q.leq(*p)).collect();
        if !comparability_connected(&above) {
            return Err(Error::validation(format!(
                "fence meets the up-set of {q} in an empty or disconnected set"
            )));
        }
    }
    Ok(())
}

// ============================================================================
// Endomorphisms (small-scale oracle)
// ============================================================================

/// A basis of `End(M)`: tuples `(e_p)` with `e_q A = A e_p` on every cover.
/// Each element is returned as one square matrix per point.
pub fn endomorphism_basis(m: &ExplicitModule) -> Vec<Vec<Matrix>> {
    let f = m.field();
    let pts = m.points();
    let mut offsets = Vec::with_capacity(pts.len());
    let mut n = 0;
    for &p in pts {
        offsets.push(n);
        n += m.dim(p) * m.dim(p);
    }
    // unknown e_p[r][c] at offsets[p] + r * d_p + c
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (p, q) in m.domain().covers() {
        let a = m.cover_map(p, q).unwrap();
        let (dp, dq) = (m.dim(p), m.dim(q));
        let (op, oq) = (offsets[m.idx(p)], offsets[m.idx(q)]);
        // (e_q A)[i][j] - (A e_p)[i][j] = 0
        for i in 0..dq {
            for j in 0..dp {
                let mut row = vec![0u32; n];
                for k in 0..dq {
                    let v = a.get(k, j);
                    if v != 0 {
                        row[oq + i * dq + k] = f.add(row[oq + i * dq + k], v);
                    }
                }
                for k in 0..dp {
                    let v = a.get(i, k);
                    if v != 0 {
                        row[op + k * dp + j] = f.sub(row[op + k * dp + j], v);
                    }
                }
                rows.push(row);
            }
        }
    }
    let system = Matrix::from_fn(f, rows.len(), n, |r, c| rows[r][c]);
    let kernel = if rows.is_empty() { Matrix::identity(f, n) } else { system.kernel_basis() };
    (0..kernel.cols())
        .map(|k| {
            pts.iter()
                .enumerate()
                .map(|(i, &p)| {
                    let d = m.dim(p);
                    Matrix::from_fn(f, d, d, |r, c| kernel.get(offsets[i] + r * d + c, k))
                })
                .collect()
        })
        .collect()
}

/// Every idempotent endomorphism, found by enumerating all of `End(M)`.
/// Refuses when `|End(M)|` exceeds `limit` elements.
pub fn idempotents(m: &ExplicitModule, limit: u64) -> Result<Vec<Vec<Matrix>>> {
    let basis = endomorphism_basis(m);
    let f = m.field();
    let p = f.modulus() as u64;
    let count = p
        .checked_pow(basis.len() as u32)
        .filter(|&c| c <= limit)
        .ok_or(Error::Guard {
            what: "endomorphism algebra size",
            limit: limit as usize,
            actual: p.saturating_pow(basis.len() as u32) as usize,
        })?;
    let pts = m.points();
    let mut out = Vec::new();
    let mut coeffs = vec![0u32; basis.len()];
    for _ in 0..count {
        let e: Vec<Matrix> = (0..pts.len())
            .map(|i| {
                let d = m.dim(pts[i]);
                let mut acc = Matrix::zeros(f, d, d);
                for (k, b) in basis.iter().enumerate() {
                    if coeffs[k] != 0 {
                        acc = acc.add(&b[i].scale(coeffs[k]));
                    }
                }
                acc
            })
            .collect();
        if e.iter().all(|x| x.mul(x) == *x) {
            out.push(e);
        }
        // next coefficient vector
        for c in coeffs.iter_mut() {
            *c += 1;
            if (*c as u64) < p {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

/// True when the only idempotents are `0` and `id` (and the module is nonzero).
pub fn is_indecomposable(m: &ExplicitModule, limit: u64) -> Result<bool> {
    if m.total_dimension() == 0 {
        return Ok(false);
    }
    let idem = idempotents(m, limit)?;
    Ok(idem
        .iter()
        .all(|e| e.iter().all(Matrix::is_zero) || e.iter().all(Matrix::is_identity)))
}

/// Image of an idempotent as a module over the same domain.
pub fn image_module(m: &ExplicitModule, e: &[Matrix]) -> Result<ExplicitModule> {
    let f = m.field();
    let bases: HashMap<GridPoint, Matrix> = m
        .points()
        .iter()
        .zip(e)
        .map(|(&p, ep)| (p, ep.column_space()))
        .collect();
    ExplicitModule::from_fn(
        f,
        m.domain().clone(),
        |p| bases[&p].cols(),
        |p, q| {
            let img = m.cover_map(p, q).unwrap().mul(&bases[&p]);
            Some(bases[&q].solve_matrix(&img).expect("image of an idempotent is a submodule"))
        },
    )
}
