//! Dimension functions, interval detection, peeling decompositions, summand
//! tests and barcode ensembles.
//!
//! [`interval_decompose`] grows intervals from points of positive remaining
//! dimension, accepting a neighbour `q` when the generalized rank over
//! `I ∪ {q}` exceeds the total multiplicity of already emitted intervals that
//! contain `I ∪ {q}`. [`true_interval`] performs the same search on honest
//! quotients and serves as its oracle. [`test_interval`] measures the
//! multiplicity of an interval module as a direct summand through the
//! composition pairing `Hom(M, I_I) x Hom(I_I, M) -> End(I_I) = F`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::filtration::Bifiltration;
use crate::gen::{normalize_barcode, Barcode};
use crate::grid::{extend, nbd, GridInterval, GridPoint};
use crate::linalg::{Matrix, PrimeField};
use crate::module::{idempotents, image_module, ExplicitModule, Section};
use crate::rank::{Method, RankCache};

/// Default guards for [`barcode_ensemble`].
pub const ENSEMBLE_POINT_GUARD: usize = 9;
pub const ENSEMBLE_DIM_GUARD: usize = 12;
/// Largest endomorphism algebra enumerated by the idempotent oracle.
pub const IDEMPOTENT_GUARD: u64 = 1 << 18;

// ============================================================================
// Dim
// ============================================================================

/// Column-reduction state of a growing filtration.
#[derive(Clone)]
struct Reducer {
    field: PrimeField,
    /// insertion position of each simplex present so far
    pos_of: HashMap<usize, usize>,
    dims: Vec<usize>,
    columns: Vec<Vec<u32>>,
    pivot_of_low: HashMap<usize, usize>,
    count: Vec<usize>,
    /// rank of the boundary map out of each degree
    boundary_rank: Vec<usize>,
}

impl Reducer {
    fn new(field: PrimeField, max_dim: usize) -> Self {
        Reducer {
            field,
            pos_of: HashMap::new(),
            dims: Vec::new(),
            columns: Vec::new(),
            pivot_of_low: HashMap::new(),
            count: vec![0; max_dim + 2],
            boundary_rank: vec![0; max_dim + 2],
        }
    }

    fn add(&mut self, f: &Bifiltration, s: usize, capacity: usize) {
        let fd = self.field;
        let pos = self.columns.len();
        let dim = f.complex().simplices()[s].dim();
        let mut col = vec![0u32; capacity];
        for &(face, neg) in f.faces(s) {
            col[self.pos_of[&face]] = if neg { fd.neg(1) } else { 1 };
        }
        while let Some(low) = col.iter().rposition(|&v| v != 0) {
            match self.pivot_of_low.get(&low) {
                Some(&other) => {
                    let o = &self.columns[other];
                    let factor = fd.mul(col[low], fd.inv(o[low]));
                    for (c, &ov) in col.iter_mut().zip(o) {
                        if ov != 0 {
                            *c = fd.sub(*c, fd.mul(factor, ov));
                        }
                    }
                }
                None => {
                    self.pivot_of_low.insert(low, pos);
                    self.boundary_rank[dim] += 1;
                    break;
                }
            }
        }
        self.pos_of.insert(s, pos);
        self.dims.push(dim);
        self.columns.push(col);
        self.count[dim] += 1;
    }

    fn betti(&self, degree: usize) -> usize {
        let n = self.count.get(degree).copied().unwrap_or(0);
        let out = self.boundary_rank.get(degree).copied().unwrap_or(0);
        let inc = self.boundary_rank.get(degree + 1).copied().unwrap_or(0);
        n - out - inc
    }
}

/// `dim H_degree(F(p))` for every grid point, by one reduction per tree of
/// unit steps rooted at each minimal point. The reduction state is copied at
/// every branching node.
pub fn dim_all(f: &Bifiltration, degree: usize) -> BTreeMap<GridPoint, usize> {
    let domain = f.domain();
    let capacity = f.complex().len();
    let mut out = BTreeMap::new();
    let mut bound = i32::MAX;
    for p in domain.min_elements() {
        let in_region = |q: GridPoint| domain.contains(q) && p.leq(q) && q.y < bound;
        let region: Vec<GridPoint> = domain.points().filter(|&q| in_region(q)).collect();
        let mut children: HashMap<GridPoint, Vec<GridPoint>> = HashMap::new();
        for &q in &region {
            if q == p {
                continue;
            }
            let left = GridPoint::new(q.x - 1, q.y);
            let parent = if in_region(left) { left } else { GridPoint::new(q.x, q.y - 1) };
            children.entry(parent).or_default().push(q);
        }
        let mut stack: Vec<(GridPoint, Option<GridPoint>, Reducer)> =
            vec![(p, None, Reducer::new(f.field(), f.max_dim()))];
        while let Some((q, parent, mut state)) = stack.pop() {
            let mut fresh: Vec<usize> = f
                .global_order()
                .iter()
                .copied()
                .filter(|&s| f.grade(s).leq(q) && parent.is_none_or(|u| !f.grade(s).leq(u)))
                .collect();
            fresh.sort_by_key(|&s| f.complex().simplices()[s].dim());
            for s in fresh {
                state.add(f, s, capacity);
            }
            out.insert(q, state.betti(degree));
            if let Some(kids) = children.get(&q) {
                for &k in kids {
                    stack.push((k, Some(q), state.clone()));
                }
            }
        }
        bound = p.y;
    }
    out
}

// ============================================================================
// IsInterval
// ============================================================================

/// `m` when `M|_P ≅ I_P^m`, otherwise 0.
pub fn is_interval(m: &ExplicitModule, poset: &GridInterval) -> Result<usize> {
    let r = crate::rank::generalized_rank(m, poset, Method::Zigzag)?.rank;
    Ok(if poset.points().all(|p| m.dim(p) == r) { r } else { 0 })
}

// ============================================================================
// Decomposition output
// ============================================================================

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompEntry {
    pub interval: GridInterval,
    pub mult: usize,
    pub id: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecompositionOutput {
    pub entries: Vec<DecompEntry>,
    /// One line per neighbour test and per emitted interval.
    pub trace: Vec<String>,
}

impl DecompositionOutput {
    /// Entries as a sorted multiset.
    pub fn barcode(&self) -> Barcode {
        let items: Vec<(GridInterval, usize)> =
            self.entries.iter().map(|e| (e.interval.clone(), e.mult)).collect();
        normalize_barcode(&items)
    }

    /// `Σ_{entries ∋ p} μ = dim M_p` at every point of the module's domain.
    pub fn accounting_holds(&self, m: &ExplicitModule) -> bool {
        m.points().iter().all(|&p| {
            let s: usize = self
                .entries
                .iter()
                .filter(|e| e.interval.contains(p))
                .map(|e| e.mult)
                .sum();
            s == m.dim(p)
        })
    }

    pub fn to_json(&self, decomposable: Option<bool>) -> Value {
        json!({
            "entries": self.entries,
            "decomposable": match decomposable {
                Some(b) => json!(b),
                None => json!("unknown"),
            },
        })
    }
}

/// How [`interval_decompose`] picks start points and neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderPolicy {
    /// First candidate in grid order.
    #[default]
    Deterministic,
    /// Uniformly random candidate from a seeded generator.
    Seeded(u64),
}

enum Chooser {
    First,
    Random(Box<ChaCha8Rng>),
}

impl Chooser {
    fn pick(&mut self, candidates: &[GridPoint]) -> GridPoint {
        match self {
            Chooser::First => candidates[0],
            Chooser::Random(rng) => *candidates.choose(rng.as_mut()).unwrap(),
        }
    }
}

fn restricted(m: &ExplicitModule, poset: &GridInterval) -> Result<ExplicitModule> {
    if poset == m.domain() {
        Ok(m.clone())
    } else {
        m.restrict(poset)
    }
}

// ============================================================================
// Interval
// ============================================================================

/// Peeling simulation on the original module, bookkeeping emitted intervals
/// per point instead of forming quotients.
pub fn interval_decompose(
    m: &ExplicitModule,
    poset: &GridInterval,
    policy: OrderPolicy,
) -> Result<DecompositionOutput> {
    let m = restricted(m, poset)?;
    let ranks = RankCache::new(&m, Method::Zigzag);
    let mut chooser = match policy {
        OrderPolicy::Deterministic => Chooser::First,
        OrderPolicy::Seeded(s) => Chooser::Random(Box::new(ChaCha8Rng::seed_from_u64(s))),
    };
    let pts: Vec<GridPoint> = poset.points().collect();
    let mut d: HashMap<GridPoint, i64> = pts.iter().map(|&p| (p, m.dim(p) as i64)).collect();
    let mut lists: HashMap<GridPoint, BTreeSet<usize>> =
        pts.iter().map(|&p| (p, BTreeSet::new())).collect();
    let mut out = DecompositionOutput::default();
    let count = |ids: &BTreeSet<usize>, entries: &[DecompEntry]| -> usize {
        ids.iter().map(|&i| entries[i].mult).sum()
    };
    loop {
        let starts: Vec<GridPoint> = pts.iter().copied().filter(|p| d[p] > 0).collect();
        if starts.is_empty() {
            break;
        }
        let p = chooser.pick(&starts);
        out.trace.push(format!("start p={p} d={}", d[&p]));
        let mut interval = GridInterval::singleton(p);
        let mut list = lists[&p].clone();
        let mut marked: HashSet<GridPoint> = HashSet::new();
        loop {
            let candidates: Vec<GridPoint> = nbd(&interval, poset)
                .into_iter()
                .filter(|q| !marked.contains(q))
                .collect();
            if candidates.is_empty() {
                break;
            }
            let q = chooser.pick(&candidates);
            marked.insert(q);
            let templist: BTreeSet<usize> = list.intersection(&lists[&q]).copied().collect();
            let c = count(&templist, &out.entries);
            let grown = extend(&interval, q)?;
            let r = ranks.rank(&grown)?;
            let accept = r > c;
            out.trace.push(format!(
                "try q={q} rk={r} c={c} -> {}",
                if accept { "accept" } else { "reject" }
            ));
            if accept {
                interval = grown;
                list = templist;
            }
        }
        let c = count(&list, &out.entries);
        let r = ranks.rank(&interval)?;
        assert!(r > c, "emitted interval must have positive multiplicity");
        let mult = r - c;
        let id = out.entries.len();
        for q in interval.points() {
            *d.get_mut(&q).unwrap() -= mult as i64;
            lists.get_mut(&q).unwrap().insert(id);
        }
        out.trace.push(format!("output I={interval} mult={mult} id={id}"));
        out.entries.push(DecompEntry { interval, mult, id });
    }
    Ok(out)
}

// ============================================================================
// Hom spaces against interval modules
// ============================================================================

fn null_space(field: PrimeField, rows: Vec<Vec<u32>>, n: usize) -> Matrix {
    if rows.is_empty() {
        return Matrix::identity(field, n);
    }
    Matrix::from_fn(field, rows.len(), n, |r, c| rows[r][c]).kernel_basis()
}

fn interval_offsets(m: &ExplicitModule, interval: &GridInterval) -> (HashMap<GridPoint, usize>, usize) {
    let mut off = HashMap::new();
    let mut n = 0;
    for p in interval.points() {
        off.insert(p, n);
        n += m.dim(p);
    }
    (off, n)
}

/// Basis of `Hom(I_I, M)`: sections over `I` killed by every cover leaving
/// `I` upward. Columns live in `⊕_{p ∈ I} M_p`.
pub fn hom_from_interval(m: &ExplicitModule, interval: &GridInterval) -> Matrix {
    let f = m.field();
    let (off, n) = interval_offsets(m, interval);
    let mut rows = Vec::new();
    for (p, q) in m.domain().covers() {
        if !interval.contains(p) {
            continue;
        }
        let a = m.cover_map(p, q).unwrap();
        for i in 0..m.dim(q) {
            let mut row = vec![0u32; n];
            for j in 0..m.dim(p) {
                row[off[&p] + j] = f.neg(a.get(i, j));
            }
            if interval.contains(q) {
                row[off[&q] + i] = f.add(row[off[&q] + i], 1);
            }
            rows.push(row);
        }
    }
    null_space(f, rows, n)
}

/// Basis of `Hom(M, I_I)`: row vectors `w_p` on `I` with `w_q A = w_p` inside
/// `I` and `w_q A = 0` on covers entering `I`. Columns live in `⊕_{p ∈ I} M_p^*`.
pub fn hom_to_interval(m: &ExplicitModule, interval: &GridInterval) -> Matrix {
    let f = m.field();
    let (off, n) = interval_offsets(m, interval);
    let mut rows = Vec::new();
    for (p, q) in m.domain().covers() {
        if !interval.contains(q) {
            continue;
        }
        let a = m.cover_map(p, q).unwrap();
        for j in 0..m.dim(p) {
            let mut row = vec![0u32; n];
            for i in 0..m.dim(q) {
                row[off[&q] + i] = a.get(i, j);
            }
            if interval.contains(p) {
                row[off[&p] + j] = f.sub(row[off[&p] + j], 1);
            }
            rows.push(row);
        }
    }
    null_space(f, rows, n)
}

/// Matrix of `(g, f) ↦ g ∘ f ∈ F`, rows indexed by `Hom(M, I_I)` and columns
/// by `Hom(I_I, M)`. The scalar is checked to agree at every point of `I`.
fn pairing(m: &ExplicitModule, interval: &GridInterval, homs_in: &Matrix, homs_out: &Matrix) -> Matrix {
    let f = m.field();
    let (off, _) = interval_offsets(m, interval);
    let value_at = |p: GridPoint, g: usize, h: usize| -> u32 {
        let mut acc = 0;
        for i in 0..m.dim(p) {
            acc = f.add(acc, f.mul(homs_out.get(off[&p] + i, g), homs_in.get(off[&p] + i, h)));
        }
        acc
    };
    let pts: Vec<GridPoint> = interval.points().collect();
    Matrix::from_fn(f, homs_out.cols(), homs_in.cols(), |g, h| {
        let v = value_at(pts[0], g, h);
        for &p in &pts[1..] {
            assert_eq!(value_at(p, g, h), v, "composition with I_I is not a scalar");
        }
        v
    })
}

/// Multiplicity of `I_I` as a direct summand of `M`.
pub fn test_interval(m: &ExplicitModule, interval: &GridInterval) -> Result<usize> {
    if !interval.is_subset_of(m.domain()) {
        return Err(Error::validation(format!(
            "interval {interval} is not contained in the domain {}",
            m.domain()
        )));
    }
    let fs = hom_from_interval(m, interval);
    let gs = hom_to_interval(m, interval);
    if fs.cols() == 0 || gs.cols() == 0 {
        return Ok(0);
    }
    Ok(pairing(m, interval, &fs, &gs).rank())
}

/// Pointwise generators of a summand `≅ I_I^mult`, or an error when no such
/// summand exists.
fn summand_generators(
    m: &ExplicitModule,
    interval: &GridInterval,
    mult: usize,
) -> Result<HashMap<GridPoint, Matrix>> {
    let fs = hom_from_interval(m, interval);
    let gs = hom_to_interval(m, interval);
    let b = pairing(m, interval, &fs, &gs);
    let cols = b.independent_columns();
    if cols.len() < mult {
        return Err(Error::Summand(format!(
            "{interval}: found {} of {mult} interval summands",
            cols.len()
        )));
    }
    let chosen = fs.select_cols(&cols[..mult]);
    let (off, _) = interval_offsets(m, interval);
    Ok(interval
        .points()
        .map(|p| (p, chosen.select_rows(off[&p]..off[&p] + m.dim(p))))
        .collect())
}

/// Largest `μ` such that some idempotent endomorphism has image `≅ I_I^μ`.
/// Exhaustive; refuses when `End(M)` has more than `limit` elements.
pub fn idempotent_multiplicity(m: &ExplicitModule, interval: &GridInterval, limit: u64) -> Result<usize> {
    let mut best = 0;
    for e in idempotents(m, limit)? {
        let img = image_module(m, &e)?;
        let Some(p0) = interval.points().next() else { continue };
        let mu = img.dim(p0);
        if mu <= best {
            continue;
        }
        let shape_ok = img
            .points()
            .iter()
            .all(|&p| img.dim(p) == if interval.contains(p) { mu } else { 0 });
        if shape_ok && img.restrict(interval)?.lim_to_colim_rank()? == mu {
            best = mu;
        }
    }
    Ok(best)
}

// ============================================================================
// TrueInterval
// ============================================================================

/// Literal peeling: find a maximal interval of positive rank on the current
/// module, split off the corresponding summand and pass to the quotient.
/// Meant for interval-decomposable input; fails with [`Error::Summand`]
/// otherwise.
pub fn true_interval(m: &ExplicitModule, poset: &GridInterval) -> Result<DecompositionOutput> {
    let mut cur = restricted(m, poset)?;
    let mut out = DecompositionOutput::default();
    while cur.total_dimension() > 0 {
        let p = *cur.points().iter().find(|&&p| cur.dim(p) > 0).unwrap();
        let ranks = RankCache::new(&cur, Method::Zigzag);
        let mut interval = GridInterval::singleton(p);
        'grow: loop {
            for q in nbd(&interval, poset) {
                let grown = extend(&interval, q)?;
                if ranks.rank(&grown)? > 0 {
                    interval = grown;
                    continue 'grow;
                }
            }
            break;
        }
        let mult = ranks.rank(&interval)?;
        let gens = summand_generators(&cur, &interval, mult)?;
        let next = cur.quotient_by_summand(&gens)?;
        let id = out.entries.len();
        out.trace.push(format!("peel I={interval} mult={mult}"));
        out.entries.push(DecompEntry { interval, mult, id });
        cur = next;
    }
    Ok(out)
}

// ============================================================================
// IsIntervalDecomp
// ============================================================================

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailingInterval {
    pub interval: GridInterval,
    pub expected: usize,
    pub found: usize,
}

#[derive(Debug, Clone)]
pub struct DecomposabilityReport {
    pub decomposable: bool,
    pub output: DecompositionOutput,
    pub failing: Option<FailingInterval>,
}

/// Runs [`interval_decompose`] and checks each emitted interval with
/// [`test_interval`]. A run whose multiplicities do not add up to the
/// pointwise dimensions is also reported as not decomposable.
pub fn is_interval_decomposable(
    m: &ExplicitModule,
    poset: &GridInterval,
    policy: OrderPolicy,
) -> Result<DecomposabilityReport> {
    let sub = restricted(m, poset)?;
    let output = interval_decompose(&sub, poset, policy)?;
    for e in &output.entries {
        let found = test_interval(&sub, &e.interval)?;
        if found != e.mult {
            let failing = FailingInterval {
                interval: e.interval.clone(),
                expected: e.mult,
                found,
            };
            return Ok(DecomposabilityReport {
                decomposable: false,
                output,
                failing: Some(failing),
            });
        }
    }
    let decomposable = output.accounting_holds(&sub);
    Ok(DecomposabilityReport {
        decomposable,
        output,
        failing: None,
    })
}

// ============================================================================
// Fully supported sections
// ============================================================================

/// `rk(M)(I)` sections of `M|_I` whose images under the limit-to-colimit map
/// are independent; each is nonzero at every point of `I`.
pub fn full_support_sections(m: &ExplicitModule, interval: &GridInterval) -> Result<Vec<Section>> {
    let sub = m.restrict(interval)?;
    let lim = sub.limit();
    let colim = sub.colimit();
    let psi = colim.legs[0].mul(&lim.legs[0]);
    let pts = sub.points().to_vec();
    Ok(psi
        .independent_columns()
        .into_iter()
        .map(|k| {
            pts.iter()
                .enumerate()
                .map(|(i, &p)| (p, lim.legs[i].column(k)))
                .collect()
        })
        .collect())
}

// ============================================================================
// Barcode ensemble
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleGuard {
    pub max_points: usize,
    pub max_total_dim: usize,
}

impl Default for EnsembleGuard {
    fn default() -> Self {
        EnsembleGuard {
            max_points: ENSEMBLE_POINT_GUARD,
            max_total_dim: ENSEMBLE_DIM_GUARD,
        }
    }
}

/// Every distinct output of [`interval_decompose`] over all choices of start
/// points and neighbour orders, as sorted multisets.
///
/// The exploration state is the multiset emitted so far: the count used by a
/// neighbour test only depends on which emitted intervals contain `I ∪ {q}`.
pub fn barcode_ensemble(
    m: &ExplicitModule,
    poset: &GridInterval,
    guard: EnsembleGuard,
) -> Result<Vec<Barcode>> {
    if poset.len() > guard.max_points {
        return Err(Error::Guard {
            what: "ensemble poset size",
            limit: guard.max_points,
            actual: poset.len(),
        });
    }
    let m = restricted(m, poset)?;
    if m.total_dimension() > guard.max_total_dim {
        return Err(Error::Guard {
            what: "ensemble total dimension",
            limit: guard.max_total_dim,
            actual: m.total_dimension(),
        });
    }
    let ranks = RankCache::new(&m, Method::Zigzag);
    let mut seen: HashSet<Barcode> = HashSet::new();
    let mut members: BTreeSet<Barcode> = BTreeSet::new();
    let mut stack: Vec<Barcode> = vec![Vec::new()];
    while let Some(state) = stack.pop() {
        if !seen.insert(state.clone()) {
            continue;
        }
        let above = |x: &GridInterval| -> usize {
            state
                .iter()
                .filter(|(j, _)| x.is_subset_of(j))
                .map(|(_, mu)| mu)
                .sum()
        };
        let starts: Vec<GridPoint> = m
            .points()
            .iter()
            .copied()
            .filter(|&p| {
                let used: usize = state.iter().filter(|(j, _)| j.contains(p)).map(|(_, mu)| mu).sum();
                (m.dim(p) as i64) - (used as i64) > 0
            })
            .collect();
        if starts.is_empty() {
            members.insert(state);
            continue;
        }
        let mut finals: BTreeSet<GridInterval> = BTreeSet::new();
        for p in starts {
            let mut visited: HashSet<(GridInterval, BTreeSet<GridPoint>)> = HashSet::new();
            let mut work = vec![(GridInterval::singleton(p), BTreeSet::new())];
            while let Some((interval, marked)) = work.pop() {
                if !visited.insert((interval.clone(), marked.clone())) {
                    continue;
                }
                let candidates: Vec<GridPoint> = nbd(&interval, poset)
                    .into_iter()
                    .filter(|q| !marked.contains(q))
                    .collect();
                if candidates.is_empty() {
                    finals.insert(interval);
                    continue;
                }
                for q in candidates {
                    let mut marked2 = marked.clone();
                    marked2.insert(q);
                    let grown = extend(&interval, q)?;
                    if ranks.rank(&grown)? > above(&grown) {
                        work.push((grown, marked2));
                    } else {
                        work.push((interval.clone(), marked2));
                    }
                }
            }
        }
        for interval in finals {
            let mult = ranks.rank(&interval)? - above(&interval);
            let mut next = state.clone();
            next.push((interval, mult));
            stack.push(normalize_barcode(&next));
        }
    }
    Ok(members.into_iter().collect())
}

/// `max_C Σ_{I ∈ C, I ⊇ J} μ_I` over ensemble members `C`.
pub fn ensemble_rank(ensemble: &[Barcode], j: &GridInterval) -> usize {
    ensemble
        .iter()
        .map(|c| {
            c.iter()
                .filter(|(i, _)| j.is_subset_of(i))
                .map(|(_, mu)| mu)
                .sum()
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::BifiltrationBuilder;
    use crate::samples;

    fn pt(x: i32, y: i32) -> GridPoint {
        GridPoint::new(x, y)
    }

    #[test]
    fn dims_of_hollow_then_filled_triangle() {
        let f = PrimeField::F2;
        let dom = GridInterval::rect(0, 0, 2, 2).unwrap();
        let mut b = BifiltrationBuilder::new(f, dom.clone());
        let g = pt(1, 1);
        b.add(0, &[0], g).unwrap();
        b.add(1, &[1], g).unwrap();
        b.add(2, &[2], g).unwrap();
        b.add(3, &[0, 1], g).unwrap();
        b.add(4, &[0, 2], g).unwrap();
        b.add(5, &[1, 2], g).unwrap();
        b.add(6, &[0, 1, 2], pt(2, 2)).unwrap();
        let filt = b.build().unwrap();
        let dims = dim_all(&filt, 1);
        for p in dom.points() {
            let expected = usize::from(g.leq(p) && p != pt(2, 2));
            assert_eq!(dims[&p], expected, "at {p}");
        }
        let h0 = dim_all(&filt, 0);
        for p in dom.points() {
            assert_eq!(h0[&p], usize::from(g.leq(p)));
        }
    }

    #[test]
    fn is_interval_examples() {
        let f = PrimeField::F2;
        let p = samples::small_grid();
        let ip = ExplicitModule::interval_module(f, &p, &p).unwrap();
        let three = ExplicitModule::direct_sum(&[ip.clone(), ip.clone(), ip.clone()]).unwrap();
        assert_eq!(is_interval(&three, &p).unwrap(), 3);
        let sub = GridInterval::rect(1, 1, 2, 1).unwrap();
        let extra = ExplicitModule::interval_module(f, &sub, &p).unwrap();
        let mixed = ExplicitModule::direct_sum(&[ip, extra]).unwrap();
        assert_eq!(is_interval(&mixed, &p).unwrap(), 0);
    }

    #[test]
    fn nested_example_peels_in_order() {
        let m = samples::nested_intervals();
        let p = samples::small_grid();
        let out = interval_decompose(&m, &p, OrderPolicy::Deterministic).unwrap();
        let got: Vec<(GridInterval, usize)> =
            out.entries.iter().map(|e| (e.interval.clone(), e.mult)).collect();
        assert_eq!(got, samples::nested_barcode());
        assert!(out.accounting_holds(&m));
        assert!(out.trace.iter().any(|l| l.starts_with("try q=") && l.ends_with("-> reject")));
        let t = true_interval(&m, &p).unwrap();
        assert_eq!(t.barcode(), out.barcode());
        assert!(is_interval_decomposable(&m, &p, OrderPolicy::Deterministic).unwrap().decomposable);
    }

    #[test]
    fn three_lines_is_not_decomposable() {
        let n = samples::three_lines_module();
        let p = samples::small_grid();
        let report = is_interval_decomposable(&n, &p, OrderPolicy::Deterministic).unwrap();
        assert!(!report.decomposable);
        let ens = barcode_ensemble(&n, &p, EnsembleGuard::default()).unwrap();
        assert!(ens.len() >= 2);
    }

    #[test]
    fn test_interval_on_powers() {
        let f = PrimeField::new(3).unwrap();
        let i = GridInterval::from_columns(&[(0, 1, 2), (1, 0, 1)]).unwrap();
        let dom = GridInterval::rect(0, 0, 1, 2).unwrap();
        let one = ExplicitModule::interval_module(f, &i, &dom).unwrap();
        let two = ExplicitModule::direct_sum(&[one.clone(), one]).unwrap();
        assert_eq!(test_interval(&two, &i).unwrap(), 2);
        let other = GridInterval::singleton(pt(0, 0));
        assert_eq!(test_interval(&two, &other).unwrap(), 0);
    }

    #[test]
    fn full_support_sections_are_nowhere_zero() {
        let f = PrimeField::F2;
        let p = GridInterval::rect(0, 0, 1, 1).unwrap();
        let ip = ExplicitModule::interval_module(f, &p, &p).unwrap();
        let s = full_support_sections(&ip, &p).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].is_nowhere_zero());
        let z = ExplicitModule::from_fn(f, p.clone(), |_| 0, |_, _| None).unwrap();
        assert!(full_support_sections(&z, &p).unwrap().is_empty());
    }

    #[test]
    fn json_shape() {
        let m = samples::nested_intervals();
        let out = interval_decompose(&m, &samples::small_grid(), OrderPolicy::Deterministic).unwrap();
        let v = out.to_json(Some(true));
        assert_eq!(v["entries"].as_array().unwrap().len(), 3);
        assert_eq!(v["entries"][0]["mult"], 1);
        assert_eq!(v["entries"][0]["id"], 0);
        assert_eq!(v["decomposable"], true);
        assert_eq!(out.to_json(None)["decomposable"], "unknown");
    }
}
