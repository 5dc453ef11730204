//! Seeded random instances: modules, interval sums, intervals and
//! bifiltrations.
//!
//! Random modules are built point by point in grid order. Where a point closes
//! a unit square, the incoming maps are drawn through the pushout of the two
//! incoming spaces, which makes every square commute by construction.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::filtration::{Bifiltration, BifiltrationBuilder};
use crate::grid::{nbd, GridInterval, GridPoint};
use crate::linalg::{quotient_map, Matrix, PrimeField};
use crate::module::ExplicitModule;

/// Uniformly random matrix.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, field: PrimeField, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(field, rows, cols, |_, _| rng.gen_range(0..field.modulus()))
}

/// Random matrix whose rank is drawn uniformly from `0..=min(rows, cols)`
/// (as an upper bound; the product may have smaller rank).
pub fn random_low_rank<R: Rng + ?Sized>(rng: &mut R, field: PrimeField, rows: usize, cols: usize) -> Matrix {
    let k = rng.gen_range(0..=rows.min(cols));
    random_matrix(rng, field, rows, k).mul(&random_matrix(rng, field, k, cols))
}

/// Random invertible matrix.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, field: PrimeField, n: usize) -> Matrix {
    loop {
        let m = random_matrix(rng, field, n, n);
        if m.rank() == n {
            return m;
        }
    }
}

/// Random module over `domain` with pointwise dimensions in `0..=max_dim`.
pub fn random_module<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    domain: &GridInterval,
    max_dim: usize,
) -> ExplicitModule {
    let pts: Vec<GridPoint> = domain.points().collect();
    let mut dims: HashMap<GridPoint, usize> = HashMap::new();
    let mut maps: HashMap<(GridPoint, GridPoint), Matrix> = HashMap::new();
    for &q in &pts {
        let d = rng.gen_range(0..=max_dim);
        dims.insert(q, d);
        let left = GridPoint::new(q.x - 1, q.y);
        let below = GridPoint::new(q.x, q.y - 1);
        let diag = GridPoint::new(q.x - 1, q.y - 1);
        let has_left = domain.contains(left);
        let has_below = domain.contains(below);
        if has_left && has_below && domain.contains(diag) {
            // pushout of left <- diag -> below
            let (dl, db) = (dims[&left], dims[&below]);
            let to_left = &maps[&(diag, left)];
            let to_below = &maps[&(diag, below)];
            let rel = to_left.vstack(&to_below.scale(field.neg(1)));
            let quot = quotient_map(field, dl + db, &rel);
            let g = random_low_rank(rng, field, d, quot.rows()).mul(&quot);
            let idx_l: Vec<usize> = (0..dl).collect();
            let idx_b: Vec<usize> = (dl..dl + db).collect();
            maps.insert((left, q), g.select_cols(&idx_l));
            maps.insert((below, q), g.select_cols(&idx_b));
        } else {
            if has_left {
                maps.insert((left, q), random_low_rank(rng, field, d, dims[&left]));
            }
            if has_below {
                maps.insert((below, q), random_low_rank(rng, field, d, dims[&below]));
            }
        }
    }
    ExplicitModule::from_fn(field, domain.clone(), |p| dims[&p], |p, q| maps.remove(&(p, q)))
        .expect("pushout construction commutes")
}

/// Random interval inside `domain`, grown from a random point by random
/// admissible neighbours.
pub fn random_interval<R: Rng + ?Sized>(rng: &mut R, domain: &GridInterval) -> GridInterval {
    let pts: Vec<GridPoint> = domain.points().collect();
    let start = *pts.choose(rng).unwrap();
    let mut cur = GridInterval::singleton(start);
    let steps = rng.gen_range(0..domain.len());
    for _ in 0..steps {
        let nb = nbd(&cur, domain);
        let Some(&q) = nb.choose(rng) else { break };
        cur = GridInterval::from_points(cur.points().chain(std::iter::once(q)))
            .expect("neighbourhood points extend to intervals");
    }
    cur
}

/// A multiset of intervals, as `(interval, multiplicity)` sorted by interval.
pub type Barcode = Vec<(GridInterval, usize)>;

/// Merges repeated intervals and sorts.
pub fn normalize_barcode(items: &[(GridInterval, usize)]) -> Barcode {
    let mut acc: BTreeMap<GridInterval, usize> = BTreeMap::new();
    for (i, m) in items {
        if *m > 0 {
            *acc.entry(i.clone()).or_default() += m;
        }
    }
    acc.into_iter().collect()
}

/// `⊕ I_{I_j}^{μ_j}` over `domain` for the given barcode, hidden behind a
/// random change of basis at every point.
pub fn module_from_barcode<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    domain: &GridInterval,
    barcode: &[(GridInterval, usize)],
) -> Result<ExplicitModule> {
    let mut parts = Vec::new();
    for (i, m) in barcode {
        for _ in 0..*m {
            parts.push(ExplicitModule::interval_module(field, i, domain)?);
        }
    }
    if parts.is_empty() {
        return ExplicitModule::from_fn(field, domain.clone(), |_| 0, |_, _| None);
    }
    let sum = ExplicitModule::direct_sum(&parts)?;
    let g: HashMap<GridPoint, Matrix> = domain
        .points()
        .map(|p| (p, random_invertible(rng, field, sum.dim(p))))
        .collect();
    sum.conjugate(&g)
}

/// Random interval-decomposable module with `1..=max_intervals` summands
/// (counted with multiplicity) and its barcode.
pub fn interval_sum<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    domain: &GridInterval,
    max_intervals: usize,
) -> Result<(ExplicitModule, Barcode)> {
    if max_intervals == 0 {
        return Err(Error::validation("max_intervals must be positive"));
    }
    let k = rng.gen_range(1..=max_intervals);
    let mut items = Vec::with_capacity(k);
    for _ in 0..k {
        items.push((random_interval(rng, domain), 1));
    }
    let barcode = normalize_barcode(&items);
    let m = module_from_barcode(rng, field, domain, &barcode)?;
    Ok((m, barcode))
}

/// Random bifiltration over a rectangle: vertices, then edges and triangles
/// on existing faces, each entering at or after the join of its faces.
pub fn random_bifiltration<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    domain: &GridInterval,
    max_simplices: usize,
) -> Result<Bifiltration> {
    let (x0, x1) = domain.x_range();
    let (y0, y1) = domain.span(x0).expect("first column");
    if GridInterval::rect(x0, y0, x1, y1)? != *domain {
        return Err(Error::validation("random bifiltrations need a rectangular grid"));
    }
    let max_simplices = max_simplices.max(1);
    let mut b = BifiltrationBuilder::new(field, domain.clone());
    let mut grades: BTreeMap<Vec<u32>, GridPoint> = BTreeMap::new();
    let mut next_id = 0u32;
    let bump = |rng: &mut R, g: GridPoint| -> GridPoint {
        let dx = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=(x1 - g.x)) };
        let dy = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=(y1 - g.y)) };
        GridPoint::new(g.x + dx, g.y + dy)
    };
    let n_vertices = rng.gen_range(1..=max_simplices.min(6)) as u32;
    for v in 0..n_vertices {
        let g = GridPoint::new(rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        b.add(next_id, &[v], g)?;
        grades.insert(vec![v], g);
        next_id += 1;
    }
    let mut attempts = 0;
    while (next_id as usize) < max_simplices && attempts < 20 * max_simplices {
        attempts += 1;
        let dim = if rng.gen_bool(0.6) { 1 } else { 2 };
        let mut verts: Vec<u32> = (0..n_vertices).collect();
        verts.shuffle(rng);
        let mut s: Vec<u32> = verts.into_iter().take(dim + 1).collect();
        if s.len() != dim + 1 {
            continue;
        }
        s.sort_unstable();
        if grades.contains_key(&s) {
            continue;
        }
        let mut join: Option<GridPoint> = None;
        let mut ok = true;
        for i in 0..s.len() {
            let mut face = s.clone();
            face.remove(i);
            match grades.get(&face) {
                Some(&g) => join = Some(join.map_or(g, |j| j.join(g))),
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let g = bump(rng, join.unwrap());
        b.add(next_id, &s, g)?;
        grades.insert(s, g);
        next_id += 1;
    }
    b.build()
}

/// Random small modules for the idempotent oracle: tiny grid, dims at most 2.
pub fn indecomposable_candidates<R: Rng + ?Sized>(
    rng: &mut R,
    field: PrimeField,
    domain: &GridInterval,
    count: usize,
) -> Vec<ExplicitModule> {
    (0..count).map(|_| random_module(rng, field, domain, 2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_modules_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..30 {
            let f = if k % 2 == 0 { PrimeField::F2 } else { PrimeField::new(3).unwrap() };
            let dom = GridInterval::rect(0, 0, 3, 2).unwrap();
            let m = random_module(&mut rng, f, &dom, 3);
            m.check_commutativity().unwrap();
            let stair = GridInterval::from_columns(&[(0, 2, 3), (1, 0, 3), (2, 0, 1)]).unwrap();
            random_module(&mut rng, f, &stair, 2).check_commutativity().unwrap();
        }
    }

    #[test]
    fn random_intervals_are_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dom = GridInterval::rect(0, 0, 3, 3).unwrap();
        for _ in 0..50 {
            assert!(random_interval(&mut rng, &dom).is_subset_of(&dom));
        }
    }

    #[test]
    fn interval_sums_have_expected_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dom = GridInterval::rect(0, 0, 2, 2).unwrap();
        for _ in 0..10 {
            let (m, bc) = interval_sum(&mut rng, PrimeField::new(3).unwrap(), &dom, 4).unwrap();
            for p in dom.points() {
                let expected: usize = bc.iter().filter(|(i, _)| i.contains(p)).map(|(_, m)| m).sum();
                assert_eq!(m.dim(p), expected);
            }
        }
    }

    #[test]
    fn bifiltrations_are_deterministic() {
        let dom = GridInterval::rect(0, 0, 3, 3).unwrap();
        let a = random_bifiltration(&mut ChaCha8Rng::seed_from_u64(5), PrimeField::F2, &dom, 15).unwrap();
        let b = random_bifiltration(&mut ChaCha8Rng::seed_from_u64(5), PrimeField::F2, &dom, 15).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.complex().len() <= 15);
    }
}
