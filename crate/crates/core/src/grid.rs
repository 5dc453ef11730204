//! Points, finite intervals and zigzag paths in the integer grid `Z^2`.
//!
//! A finite interval of `Z^2` is stored column by column. Convexity and
//! connectivity together are equivalent to the staircase conditions checked in
//! [`GridInterval::from_columns`]: consecutive `x`, both column bounds
//! non-increasing in `x`, and `lo(x) <= hi(x + 1)` between neighbouring columns.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `|P|` for exhaustive interval enumeration.
pub const ENUMERATION_GUARD: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        GridPoint { x, y }
    }

    /// Componentwise order.
    #[inline]
    pub fn leq(self, other: GridPoint) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    #[inline]
    pub fn comparable(self, other: GridPoint) -> bool {
        self.leq(other) || other.leq(self)
    }

    pub fn join(self, other: GridPoint) -> GridPoint {
        GridPoint::new(self.x.max(other.x), self.y.max(other.y))
    }

    pub fn meet(self, other: GridPoint) -> GridPoint {
        GridPoint::new(self.x.min(other.x), self.y.min(other.y))
    }

    /// The four axis neighbours in N, E, S, W order.
    pub fn neighbours(self) -> [GridPoint; 4] {
        [
            GridPoint::new(self.x, self.y + 1),
            GridPoint::new(self.x + 1, self.y),
            GridPoint::new(self.x, self.y - 1),
            GridPoint::new(self.x - 1, self.y),
        ]
    }

    /// True when `other` is one unit step above or to the right of `self`.
    pub fn is_cover_of(self, other: GridPoint) -> bool {
        (other.x == self.x + 1 && other.y == self.y) || (other.x == self.x && other.y == self.y + 1)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

pub fn join(p: GridPoint, q: GridPoint) -> GridPoint {
    p.join(q)
}

pub fn meet(p: GridPoint, q: GridPoint) -> GridPoint {
    p.meet(q)
}

// ============================================================================
// GridInterval
// ============================================================================

/// A nonempty, convex, connected finite subset of `Z^2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridInterval {
    x0: i32,
    /// `(lo, hi)` for columns `x0, x0 + 1, ...`
    spans: Vec<(i32, i32)>,
}

impl fmt::Debug for GridInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridInterval({self})")
    }
}

impl GridInterval {
    /// Validates a column description `(x, lo, hi)`; columns must be listed
    /// for consecutive `x` in ascending order.
    pub fn from_columns(columns: &[(i32, i32, i32)]) -> Result<Self> {
        let Some(&(x0, _, _)) = columns.first() else {
            return Err(Error::NotInterval("empty".into()));
        };
        let mut spans = Vec::with_capacity(columns.len());
        for (i, &(x, lo, hi)) in columns.iter().enumerate() {
            if x != x0 + i as i32 {
                return Err(Error::NotInterval(format!(
                    "columns must have consecutive x, got {x} after {}",
                    x0 + i as i32 - 1
                )));
            }
            if lo > hi {
                return Err(Error::NotInterval(format!("column {x} has lo {lo} > hi {hi}")));
            }
            if let Some(&(plo, phi)) = spans.last() {
                if lo > plo || hi > phi {
                    return Err(Error::NotInterval(format!(
                        "column {x} rises above column {}; not convex",
                        x - 1
                    )));
                }
                if plo > hi {
                    return Err(Error::NotInterval(format!(
                        "columns {} and {x} are not connected",
                        x - 1
                    )));
                }
            }
            spans.push((lo, hi));
        }
        Ok(GridInterval { x0, spans })
    }

    /// The rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: i32, y0: i32, x1: i32, y1: i32) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::NotInterval(format!(
                "degenerate rectangle {x0} {y0} {x1} {y1}"
            )));
        }
        Ok(GridInterval {
            x0,
            spans: vec![(y0, y1); (x1 - x0 + 1) as usize],
        })
    }

    pub fn singleton(p: GridPoint) -> Self {
        GridInterval {
            x0: p.x,
            spans: vec![(p.y, p.y)],
        }
    }

    /// Builds an interval from an explicit point set, rejecting anything that
    /// is not nonempty, convex and connected.
    pub fn from_points<I: IntoIterator<Item = GridPoint>>(points: I) -> Result<Self> {
        let set: BTreeSet<GridPoint> = points.into_iter().collect();
        let Some(first) = set.first() else {
            return Err(Error::NotInterval("empty".into()));
        };
        let mut columns: Vec<(i32, i32, i32)> = Vec::new();
        let mut count = 0usize;
        let mut cur = (first.x, first.y, first.y);
        for &p in set.iter().skip(1) {
            if p.x == cur.0 {
                cur.2 = p.y;
            } else {
                columns.push(cur);
                cur = (p.x, p.y, p.y);
            }
        }
        columns.push(cur);
        for &(_, lo, hi) in &columns {
            count += (hi - lo + 1) as usize;
        }
        if count != set.len() {
            return Err(Error::NotInterval("a column has a gap; not convex".into()));
        }
        Self::from_columns(&columns)
    }

    pub fn columns(&self) -> Vec<(i32, i32, i32)> {
        self.spans
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| (self.x0 + i as i32, lo, hi))
            .collect()
    }

    pub fn x_range(&self) -> (i32, i32) {
        (self.x0, self.x0 + self.spans.len() as i32 - 1)
    }

    pub fn span(&self, x: i32) -> Option<(i32, i32)> {
        let i = x.checked_sub(self.x0)?;
        if i < 0 {
            return None;
        }
        self.spans.get(i as usize).copied()
    }

    #[inline]
    pub fn contains(&self, p: GridPoint) -> bool {
        matches!(self.span(p.x), Some((lo, hi)) if lo <= p.y && p.y <= hi)
    }

    pub fn len(&self) -> usize {
        self.spans.iter().map(|&(lo, hi)| (hi - lo + 1) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points in lexicographic `(x, y)` order.
    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.columns()
            .into_iter()
            .flat_map(|(x, lo, hi)| (lo..=hi).map(move |y| GridPoint::new(x, y)))
    }

    /// Index of `p` in the [`points`](Self::points) order.
    pub fn index_of(&self, p: GridPoint) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let col = (p.x - self.x0) as usize;
        let before: usize = self.spans[..col]
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as usize)
            .sum();
        Some(before + (p.y - self.spans[col].0) as usize)
    }

    pub fn is_subset_of(&self, other: &GridInterval) -> bool {
        self.columns().iter().all(|&(x, lo, hi)| {
            matches!(other.span(x), Some((olo, ohi)) if olo <= lo && hi <= ohi)
        })
    }

    /// Cover relations `p ⋖ q` with both endpoints inside the interval.
    pub fn covers(&self) -> Vec<(GridPoint, GridPoint)> {
        let mut out = Vec::new();
        for p in self.points() {
            let up = GridPoint::new(p.x, p.y + 1);
            let right = GridPoint::new(p.x + 1, p.y);
            if self.contains(right) {
                out.push((p, right));
            }
            if self.contains(up) {
                out.push((p, up));
            }
        }
        out
    }

    /// Unit squares `(p, p+e1, p+e2, p+e1+e2)` lying entirely inside.
    pub fn unit_squares(&self) -> Vec<GridPoint> {
        self.points()
            .filter(|p| {
                self.contains(GridPoint::new(p.x + 1, p.y))
                    && self.contains(GridPoint::new(p.x, p.y + 1))
                    && self.contains(GridPoint::new(p.x + 1, p.y + 1))
            })
            .collect()
    }

    /// Minimal elements in ascending `x`.
    pub fn min_elements(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for (i, &(lo, _)) in self.spans.iter().enumerate() {
            if i == 0 || self.spans[i - 1].0 > lo {
                out.push(GridPoint::new(self.x0 + i as i32, lo));
            }
        }
        out
    }

    /// Maximal elements in ascending `x`.
    pub fn max_elements(&self) -> Vec<GridPoint> {
        let n = self.spans.len();
        let mut out = Vec::new();
        for (i, &(_, hi)) in self.spans.iter().enumerate() {
            if i + 1 == n || self.spans[i + 1].1 < hi {
                out.push(GridPoint::new(self.x0 + i as i32, hi));
            }
        }
        out
    }

    /// Lower zigzag fence `p_0 < p_0∨p_1 > p_1 < ... > p_k`.
    pub fn min_zz(&self) -> ZigzagPath {
        let mins = self.min_elements();
        let mut pts = vec![mins[0]];
        for w in mins.windows(2) {
            pts.push(w[0].join(w[1]));
            pts.push(w[1]);
        }
        ZigzagPath::new(pts).expect("lower fence is a path")
    }

    /// Upper zigzag fence `q_0 > q_0∧q_1 < q_1 > ... < q_l`.
    pub fn max_zz(&self) -> ZigzagPath {
        let maxs = self.max_elements();
        let mut pts = vec![maxs[0]];
        for w in maxs.windows(2) {
            pts.push(w[0].meet(w[1]));
            pts.push(w[1]);
        }
        ZigzagPath::new(pts).expect("upper fence is a path")
    }

    /// The boundary cap of the interval.
    ///
    /// `Upper` walks the lower fence from `p_k` back to `p_0`, steps up to
    /// `q_0` and then walks the upper fence to `q_l`. `Lower` walks the lower
    /// fence from `p_0` to `p_k`, steps up to `q_l` and walks the upper fence
    /// back to `q_0`. Both have `(2k+1) + (2l+1)` nodes, repeats included.
    pub fn boundary_cap(&self, variant: CapVariant) -> ZigzagPath {
        let lower = self.min_zz().points;
        let upper = self.max_zz().points;
        let pts: Vec<GridPoint> = match variant {
            CapVariant::Upper => lower.iter().rev().chain(upper.iter()).copied().collect(),
            CapVariant::Lower => lower.iter().chain(upper.iter().rev()).copied().collect(),
        };
        ZigzagPath::new(pts).expect("boundary cap is a path")
    }

    /// Text form `cols: x:lo-hi; ...`.
    pub fn to_spec_string(&self) -> String {
        self.to_string()
    }

    /// ASCII drawing, top row first; `#` inside, `.` in the bounding box.
    pub fn render(&self) -> String {
        let (xa, xb) = self.x_range();
        let ya = self.spans.iter().map(|s| s.0).min().unwrap();
        let yb = self.spans.iter().map(|s| s.1).max().unwrap();
        let mut s = String::new();
        for y in (ya..=yb).rev() {
            for x in xa..=xb {
                s.push(if self.contains(GridPoint::new(x, y)) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for GridInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cols:")?;
        for (i, (x, lo, hi)) in self.columns().into_iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, " {x}:{lo}-{hi}")?;
        }
        Ok(())
    }
}

fn parse_int(tok: &str) -> Result<i32> {
    tok.trim()
        .parse::<i32>()
        .map_err(|_| Error::Syntax(format!("expected an integer, found `{}`", tok.trim())))
}

impl FromStr for GridInterval {
    type Err = Error;

    /// Accepts `rect: x0 y0 x1 y1` or `cols: x0:lo-hi; x1:lo-hi; ...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("rect:") {
            let nums: Vec<i32> = rest
                .split_whitespace()
                .map(parse_int)
                .collect::<Result<_>>()?;
            if nums.len() != 4 {
                return Err(Error::Syntax(format!(
                    "rect needs 4 integers, found {}",
                    nums.len()
                )));
            }
            return GridInterval::rect(nums[0], nums[1], nums[2], nums[3]);
        }
        if let Some(rest) = s.strip_prefix("cols:") {
            let mut cols = Vec::new();
            for part in rest.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let (x, range) = part
                    .split_once(':')
                    .ok_or_else(|| Error::Syntax(format!("column `{part}` lacks `x:`")))?;
                let range = range.trim();
                // lo may itself be negative: split on the first '-' after position 0
                let cut = range[1..]
                    .find('-')
                    .map(|i| i + 1)
                    .ok_or_else(|| Error::Syntax(format!("column `{part}` lacks `lo-hi`")))?;
                cols.push((
                    parse_int(x)?,
                    parse_int(&range[..cut])?,
                    parse_int(&range[cut + 1..])?,
                ));
            }
            return GridInterval::from_columns(&cols);
        }
        Err(Error::Syntax(format!(
            "interval must start with `rect:` or `cols:`, found `{s}`"
        )))
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalJson {
    cols: Vec<[i32; 3]>,
}

impl Serialize for GridInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalJson {
            cols: self.columns().into_iter().map(|(x, a, b)| [x, a, b]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = IntervalJson::deserialize(d)?;
        let cols: Vec<(i32, i32, i32)> = raw.cols.into_iter().map(|[x, a, b]| (x, a, b)).collect();
        GridInterval::from_columns(&cols).map_err(serde::de::Error::custom)
    }
}

// ============================================================================
// Free operations on point sets
// ============================================================================

/// Whether a finite point set is a (nonempty, convex, connected) interval.
pub fn is_interval(points: &[GridPoint]) -> bool {
    GridInterval::from_points(points.iter().copied()).is_ok()
}

/// Points `p` of `domain \ interval` such that `interval ∪ {p}` is an interval
/// of `Z^2`, in N, E, S, W-of-boundary lexicographic order.
pub fn nbd(interval: &GridInterval, domain: &GridInterval) -> Vec<GridPoint> {
    let mut candidates = BTreeSet::new();
    for p in interval.points() {
        for q in p.neighbours() {
            if !interval.contains(q) && domain.contains(q) {
                candidates.insert(q);
            }
        }
    }
    candidates
        .into_iter()
        .filter(|&q| GridInterval::from_points(interval.points().chain(std::iter::once(q))).is_ok())
        .collect()
}

/// Adds one point to an interval, failing if the union is not an interval.
pub fn extend(interval: &GridInterval, p: GridPoint) -> Result<GridInterval> {
    GridInterval::from_points(interval.points().chain(std::iter::once(p)))
}

/// Smallest interval containing `points`; errors if the convex closure is
/// disconnected.
pub fn interval_closure(points: &[GridPoint]) -> Result<GridInterval> {
    if points.is_empty() {
        return Err(Error::NotInterval("empty".into()));
    }
    let mut set: HashSet<GridPoint> = points.iter().copied().collect();
    loop {
        let cur: Vec<GridPoint> = set.iter().copied().collect();
        let mut added = false;
        for &p in &cur {
            for &q in &cur {
                if p.leq(q) && p != q {
                    for x in p.x..=q.x {
                        for y in p.y..=q.y {
                            added |= set.insert(GridPoint::new(x, y));
                        }
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    GridInterval::from_points(set).map_err(|e| match e {
        Error::NotInterval(m) => Error::NotInterval(format!("closure is not connected ({m})")),
        other => other,
    })
}

/// All intervals contained in `domain`, each once, larger ones first (a linear
/// extension of reverse inclusion); ties broken by canonical column order.
pub fn enumerate_intervals(domain: &GridInterval, guard: usize) -> Result<Vec<GridInterval>> {
    if domain.len() > guard {
        return Err(Error::Guard {
            what: "interval enumeration domain size",
            limit: guard,
            actual: domain.len(),
        });
    }
    let cols = domain.columns();
    let mut out = Vec::new();
    for start in 0..cols.len() {
        let mut acc: Vec<(i32, i32, i32)> = Vec::new();
        grow_columns(&cols, start, &mut acc, &mut out);
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn grow_columns(
    domain: &[(i32, i32, i32)],
    idx: usize,
    acc: &mut Vec<(i32, i32, i32)>,
    out: &mut Vec<GridInterval>,
) {
    if idx == domain.len() {
        return;
    }
    let (x, dlo, dhi) = domain[idx];
    for lo in dlo..=dhi {
        for hi in lo..=dhi {
            if let Some(&(_, plo, phi)) = acc.last() {
                if lo > plo || hi > phi || plo > hi {
                    continue;
                }
            }
            acc.push((x, lo, hi));
            out.push(GridInterval::from_columns(acc).expect("staircase by construction"));
            grow_columns(domain, idx + 1, acc, out);
            acc.pop();
        }
    }
}

// ============================================================================
// Zigzag paths
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapVariant {
    #[default]
    Upper,
    Lower,
}

impl FromStr for CapVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(CapVariant::Upper),
            "lower" => Ok(CapVariant::Lower),
            _ => Err(Error::Syntax(format!("unknown cap variant `{s}`"))),
        }
    }
}

/// A sequence of grid points whose consecutive entries are comparable.
/// Points may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZigzagPath {
    points: Vec<GridPoint>,
    directions: Vec<Direction>,
}

impl ZigzagPath {
    pub fn new(points: Vec<GridPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("a path needs at least one point"));
        }
        let mut directions = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            directions.push(if a == b {
                Direction::Flat
            } else if a.leq(b) {
                Direction::Up
            } else if b.leq(a) {
                Direction::Down
            } else {
                return Err(Error::validation(format!(
                    "consecutive path points {a} and {b} are incomparable"
                )));
            });
        }
        Ok(ZigzagPath { points, directions })
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every step is a single unit move.
    pub fn is_faithful(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].is_cover_of(w[1]) || w[1].is_cover_of(w[0]))
    }

    /// Inserts unit steps between consecutive points: ascending legs move in
    /// `x` first then `y`, descending legs are the reverse of the ascending leg
    /// between the same endpoints. Repeated consecutive points collapse to one.
    pub fn faithful_completion(&self) -> ZigzagPath {
        let mut out = vec![self.points[0]];
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == b {
                continue;
            }
            let leg = if a.leq(b) {
                ascending_leg(a, b)
            } else {
                let mut l = ascending_leg(b, a);
                l.reverse();
                l
            };
            out.extend_from_slice(&leg[1..]);
        }
        ZigzagPath::new(out).expect("completion of a path is a path")
    }
}

fn ascending_leg(a: GridPoint, b: GridPoint) -> Vec<GridPoint> {
    let mut out = vec![a];
    let mut cur = a;
    while cur.x < b.x {
        cur.x += 1;
        out.push(cur);
    }
    while cur.y < b.y {
        cur.y += 1;
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: i32, y: i32) -> GridPoint {
        GridPoint::new(x, y)
    }

    fn pts(v: &[(i32, i32)]) -> Vec<GridPoint> {
        v.iter().map(|&(x, y)| pt(x, y)).collect()
    }

    /// Brute-force convexity + connectivity straight from the definition.
    fn brute_is_interval(points: &[GridPoint]) -> bool {
        if points.is_empty() {
            return false;
        }
        let set: HashSet<GridPoint> = points.iter().copied().collect();
        for &p in &set {
            for &q in &set {
                if p.leq(q) {
                    for x in p.x..=q.x {
                        for y in p.y..=q.y {
                            if !set.contains(&pt(x, y)) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        let start = *set.iter().next().unwrap();
        let mut seen = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for &q in &set {
                if p.comparable(q) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        seen.len() == set.len()
    }

    #[test]
    fn is_interval_examples() {
        assert!(is_interval(&pts(&[(0, 0)])));
        assert!(!is_interval(&pts(&[(0, 0), (1, 1)])));
        assert!(is_interval(&pts(&[(1, 0), (0, 1), (1, 1)])));
        assert!(!is_interval(&[]));
        // L-shape with a corner missing its box
        assert!(!is_interval(&pts(&[(0, 0), (1, 0), (1, 1)])));
    }

    #[test]
    fn is_interval_matches_brute_force_on_3x3() {
        let grid: Vec<GridPoint> = (0..3).flat_map(|x| (0..3).map(move |y| pt(x, y))).collect();
        for mask in 0u32..(1 << 9) {
            let s: Vec<GridPoint> = (0..9).filter(|i| mask >> i & 1 == 1).map(|i| grid[i]).collect();
            assert_eq!(is_interval(&s), brute_is_interval(&s), "{s:?}");
        }
    }

    #[test]
    fn join_meet() {
        assert_eq!(join(pt(0, 1), pt(1, 0)), pt(1, 1));
        assert_eq!(meet(pt(0, 1), pt(1, 0)), pt(0, 0));
        assert_eq!(join(pt(2, 2), pt(2, 2)), pt(2, 2));
    }

    #[test]
    fn extremal_elements() {
        let r = GridInterval::rect(0, 0, 2, 3).unwrap();
        assert_eq!(r.min_elements(), vec![pt(0, 0)]);
        assert_eq!(r.max_elements(), vec![pt(2, 3)]);
        let l = GridInterval::from_points(pts(&[(1, 0), (0, 1), (1, 1)])).unwrap();
        assert_eq!(l.min_elements(), pts(&[(0, 1), (1, 0)]));
        assert_eq!(l.max_elements(), pts(&[(1, 1)]));
        let s = GridInterval::singleton(pt(4, -2));
        assert_eq!(s.min_elements(), vec![pt(4, -2)]);
        assert_eq!(s.max_elements(), vec![pt(4, -2)]);
    }

    #[test]
    fn fences() {
        let r = GridInterval::rect(0, 0, 2, 3).unwrap();
        assert_eq!(r.min_zz().points(), &[pt(0, 0)]);
        let l = GridInterval::from_points(pts(&[(1, 0), (0, 1), (1, 1)])).unwrap();
        assert_eq!(l.min_zz().points(), pts(&[(0, 1), (1, 1), (1, 0)]).as_slice());
        assert_eq!(l.max_zz().points(), &[pt(1, 1)]);
    }

    #[test]
    fn caps() {
        let r = GridInterval::rect(0, 0, 3, 5).unwrap();
        assert_eq!(r.boundary_cap(CapVariant::Upper).points(), &[pt(0, 0), pt(3, 5)]);
        let l = GridInterval::from_points(pts(&[(1, 0), (0, 1), (1, 1)])).unwrap();
        let cap = l.boundary_cap(CapVariant::Upper);
        assert_eq!(cap.points(), pts(&[(1, 0), (1, 1), (0, 1), (1, 1)]).as_slice());
        assert_eq!(
            cap.directions(),
            &[Direction::Up, Direction::Down, Direction::Up]
        );
        let lower = l.boundary_cap(CapVariant::Lower);
        assert_eq!(lower.points(), pts(&[(0, 1), (1, 1), (1, 0), (1, 1)]).as_slice());
    }

    #[test]
    fn faithful_completion_examples() {
        let p = ZigzagPath::new(pts(&[(0, 0), (2, 1)])).unwrap();
        assert_eq!(
            p.faithful_completion().points(),
            pts(&[(0, 0), (1, 0), (2, 0), (2, 1)]).as_slice()
        );
        let q = ZigzagPath::new(pts(&[(1, 0), (1, 1), (0, 1), (1, 1)])).unwrap();
        assert!(q.is_faithful());
        assert_eq!(q.faithful_completion(), q);
        let down = ZigzagPath::new(pts(&[(2, 1), (0, 0)])).unwrap();
        assert_eq!(
            down.faithful_completion().points(),
            pts(&[(2, 1), (2, 0), (1, 0), (0, 0)]).as_slice()
        );
    }

    #[test]
    fn nbd_examples() {
        let p = GridInterval::rect(0, 0, 2, 2).unwrap();
        assert!(nbd(&p, &p).is_empty());
        let i = GridInterval::singleton(pt(1, 1));
        // oracle: try all 8 surrounding points with the brute-force predicate
        let mut expect: Vec<GridPoint> = Vec::new();
        for q in p.points() {
            if q != pt(1, 1) && brute_is_interval(&[pt(1, 1), q]) {
                expect.push(q);
            }
        }
        expect.sort();
        assert_eq!(nbd(&i, &p), expect);
        assert_eq!(expect, pts(&[(0, 1), (1, 0), (1, 2), (2, 1)]));
    }

    #[test]
    fn closure_examples() {
        let l = GridInterval::from_points(pts(&[(1, 0), (0, 1), (1, 1)])).unwrap();
        assert_eq!(interval_closure(&l.points().collect::<Vec<_>>()).unwrap(), l);
        assert_eq!(
            interval_closure(&pts(&[(0, 0), (1, 1)])).unwrap(),
            GridInterval::rect(0, 0, 1, 1).unwrap()
        );
        assert!(interval_closure(&pts(&[(0, 1), (1, 0)])).is_err());
    }

    fn brute_enumerate(domain: &GridInterval) -> Vec<Vec<GridPoint>> {
        let all: Vec<GridPoint> = domain.points().collect();
        let mut out = Vec::new();
        for mask in 1u64..(1 << all.len()) {
            let s: Vec<GridPoint> =
                (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
            if brute_is_interval(&s) {
                out.push(s);
            }
        }
        out
    }

    #[test]
    fn enumeration_counts() {
        let single = GridInterval::singleton(pt(0, 0));
        assert_eq!(enumerate_intervals(&single, 25).unwrap(), vec![single.clone()]);
        let sq = GridInterval::rect(0, 0, 1, 1).unwrap();
        assert_eq!(brute_enumerate(&sq).len(), 11);
        assert_eq!(enumerate_intervals(&sq, 25).unwrap().len(), 11);
        for n in 1..=6 {
            let seg = GridInterval::rect(0, 0, n - 1, 0).unwrap();
            let n = n as usize;
            assert_eq!(enumerate_intervals(&seg, 25).unwrap().len(), n * (n + 1) / 2);
        }
        let p = GridInterval::rect(0, 0, 2, 1).unwrap();
        let mut ours: Vec<Vec<GridPoint>> = enumerate_intervals(&p, 25)
            .unwrap()
            .iter()
            .map(|i| i.points().collect())
            .collect();
        let mut brute = brute_enumerate(&p);
        ours.sort();
        brute.sort();
        assert_eq!(ours, brute);
        let big = GridInterval::rect(0, 0, 5, 5).unwrap();
        assert!(enumerate_intervals(&big, 25).unwrap_err().is_guard());
    }

    #[test]
    fn enumeration_is_supersets_first() {
        let p = GridInterval::from_columns(&[(0, 1, 2), (1, 0, 2), (2, 0, 1)]).unwrap();
        let all = enumerate_intervals(&p, 25).unwrap();
        for (i, a) in all.iter().enumerate() {
            for b in &all[..i] {
                assert!(!(b.is_subset_of(a) && b != a), "{b} listed before its superset {a}");
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let i: GridInterval = "cols: 0:1-2; 1:0-1".parse().unwrap();
        assert_eq!(i.to_string(), "cols: 0:1-2; 1:0-1");
        assert_eq!(i.to_string().parse::<GridInterval>().unwrap(), i);
        let r: GridInterval = "rect: 0 0 2 3".parse().unwrap();
        assert_eq!(r.len(), 12);
        let n: GridInterval = "cols: -1:-3--2; 0:-3--3".parse().unwrap();
        assert_eq!(n.columns(), vec![(-1, -3, -2), (0, -3, -3)]);
        assert!("rect: 0 0 1".parse::<GridInterval>().unwrap_err().is_parse());
        assert!("square".parse::<GridInterval>().unwrap_err().is_parse());
        assert!(matches!(
            "cols: 0:0-0; 1:1-1".parse::<GridInterval>(),
            Err(Error::NotInterval(_))
        ));
        let json = serde_json::to_string(&i).unwrap();
        assert_eq!(json, r#"{"cols":[[0,1,2],[1,0,1]]}"#);
        assert_eq!(serde_json::from_str::<GridInterval>(&json).unwrap(), i);
    }

    fn arb_interval() -> impl Strategy<Value = GridInterval> {
        let dom = GridInterval::rect(0, 0, 3, 3).unwrap();
        let all = enumerate_intervals(&dom, 25).unwrap();
        proptest::sample::select(all)
    }

    proptest! {
        #[test]
        fn cap_points_lie_inside(i in arb_interval()) {
            for v in [CapVariant::Upper, CapVariant::Lower] {
                let cap = i.boundary_cap(v);
                prop_assert!(cap.points().iter().all(|&p| i.contains(p)));
                let k = i.min_elements().len() - 1;
                let l = i.max_elements().len() - 1;
                prop_assert_eq!(cap.len(), (2 * k + 1) + (2 * l + 1));
            }
        }

        #[test]
        fn completion_is_faithful(i in arb_interval()) {
            let cap = i.boundary_cap(CapVariant::Upper);
            let done = cap.faithful_completion();
            prop_assert!(done.len() == 1 || done.is_faithful());
            prop_assert!(done.points().iter().all(|&p| i.contains(p)));
            prop_assert_eq!(done.points().first(), cap.points().first());
            prop_assert_eq!(done.points().last(), cap.points().last());
            let mut orig = cap.points().to_vec();
            orig.dedup();
            let mut it = done.points().iter();
            for p in &orig {
                prop_assert!(it.any(|q| q == p));
            }
        }

        #[test]
        fn closure_is_extensive_and_idempotent(i in arb_interval(), extra in 0..16usize) {
            let dom = GridInterval::rect(0, 0, 3, 3).unwrap();
            let cands = nbd(&i, &dom);
            if !cands.is_empty() {
                let a = cands[extra % cands.len()];
                let mut s: Vec<GridPoint> = i.points().collect();
                s.push(a);
                if extra % 2 == 1 {
                    s.push(cands[(extra / 2) % cands.len()]);
                }
                let c = interval_closure(&s).unwrap();
                prop_assert!(s.iter().all(|&p| c.contains(p)));
                prop_assert_eq!(interval_closure(&c.points().collect::<Vec<_>>()).unwrap(), c.clone());
                // brute force: smallest enumerated interval containing s
                let best = enumerate_intervals(&dom, 25).unwrap()
                    .into_iter()
                    .filter(|j| s.iter().all(|&p| j.contains(p)))
                    .min_by_key(|j| j.len())
                    .unwrap();
                prop_assert_eq!(best, c);
            }
        }

        #[test]
        fn proper_subintervals_have_neighbours(i in arb_interval()) {
            let dom = GridInterval::rect(0, 0, 3, 3).unwrap();
            if i != dom {
                prop_assert!(!nbd(&i, &dom).is_empty());
            }
        }
    }
}
