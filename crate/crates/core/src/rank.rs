//! Generalized rank invariant and generalized persistence diagram.
//!
//! The default engine restricts the module to the boundary cap of the query
//! interval and counts full bars of the resulting zigzag module. The direct
//! engine computes the limit-to-colimit rank over the whole interval.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{enumerate_intervals, interval_closure, nbd, CapVariant, GridInterval, GridPoint};
use crate::module::ExplicitModule;
use crate::zigzag::zigzag_along_cap;

/// Largest neighbourhood accepted by [`dgm_via_neighborhood`].
pub const NEIGHBORHOOD_GUARD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Zigzag,
    Direct,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zigzag" => Ok(Method::Zigzag),
            "direct" => Ok(Method::Direct),
            _ => Err(Error::Syntax(format!("unknown method `{s}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Zigzag => "zigzag",
            Method::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankQueryResult {
    pub interval: GridInterval,
    pub rank: usize,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgmEntry {
    pub interval: GridInterval,
    pub value: i64,
}

fn check_contained(m: &ExplicitModule, interval: &GridInterval) -> Result<()> {
    if interval.is_subset_of(m.domain()) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "interval {interval} is not contained in the domain {}",
            m.domain()
        )))
    }
}

/// `rk(M)(I)` by the requested engine, using the upper boundary cap.
pub fn generalized_rank(
    m: &ExplicitModule,
    interval: &GridInterval,
    method: Method,
) -> Result<RankQueryResult> {
    check_contained(m, interval)?;
    let rank = match method {
        Method::Zigzag => zigzag_along_cap(m, interval, CapVariant::Upper)?.full_bar_multiplicity(),
        Method::Direct => m.restrict(interval)?.lim_to_colim_rank()?,
    };
    Ok(RankQueryResult {
        interval: interval.clone(),
        rank,
        method,
    })
}

/// Zigzag engine on the lower boundary cap.
pub fn generalized_rank_lower_variant(m: &ExplicitModule, interval: &GridInterval) -> Result<usize> {
    check_contained(m, interval)?;
    Ok(zigzag_along_cap(m, interval, CapVariant::Lower)?.full_bar_multiplicity())
}

/// Memoized rank queries against one module, keyed by interval.
pub struct RankCache<'a> {
    module: &'a ExplicitModule,
    method: Method,
    cache: RefCell<HashMap<GridInterval, usize>>,
}

impl<'a> RankCache<'a> {
    pub fn new(module: &'a ExplicitModule, method: Method) -> Self {
        RankCache {
            module,
            method,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn module(&self) -> &'a ExplicitModule {
        self.module
    }

    pub fn rank(&self, interval: &GridInterval) -> Result<usize> {
        if let Some(&r) = self.cache.borrow().get(interval) {
            return Ok(r);
        }
        let r = generalized_rank(self.module, interval, self.method)?.rank;
        self.cache.borrow_mut().insert(interval.clone(), r);
        Ok(r)
    }

    pub fn queries(&self) -> usize {
        self.cache.borrow().len()
    }
}

fn check_poset(m: &ExplicitModule, interval: &GridInterval, poset: &GridInterval) -> Result<()> {
    check_contained(m, poset)?;
    if !interval.is_subset_of(poset) {
        return Err(Error::validation(format!(
            "interval {interval} is not contained in {poset}"
        )));
    }
    Ok(())
}

/// `dgm(I)` by inclusion-exclusion over subsets of the neighbourhood of `I`
/// in `poset`.
pub fn dgm_via_neighborhood(
    m: &ExplicitModule,
    interval: &GridInterval,
    poset: &GridInterval,
    method: Method,
    guard: usize,
) -> Result<DgmEntry> {
    check_poset(m, interval, poset)?;
    let ranks = RankCache::new(m, method);
    dgm_via_neighborhood_cached(&ranks, interval, poset, guard)
}

pub fn dgm_via_neighborhood_cached(
    ranks: &RankCache<'_>,
    interval: &GridInterval,
    poset: &GridInterval,
    guard: usize,
) -> Result<DgmEntry> {
    let nb = nbd(interval, poset);
    if nb.len() > guard {
        return Err(Error::Guard {
            what: "neighbourhood size",
            limit: guard,
            actual: nb.len(),
        });
    }
    let base: Vec<GridPoint> = interval.points().collect();
    let mut value = ranks.rank(interval)? as i64;
    for mask in 1u64..(1u64 << nb.len()) {
        let mut pts = base.clone();
        pts.extend(
            nb.iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p),
        );
        let closure = interval_closure(&pts)?;
        let r = ranks.rank(&closure)? as i64;
        if mask.count_ones() % 2 == 1 {
            value -= r;
        } else {
            value += r;
        }
    }
    Ok(DgmEntry {
        interval: interval.clone(),
        value,
    })
}

/// The full diagram over every interval of `poset` by triangular Möbius
/// inversion, supersets first. Entries follow [`enumerate_intervals`] order.
pub fn dgm_all(
    m: &ExplicitModule,
    poset: &GridInterval,
    method: Method,
    guard: usize,
) -> Result<Vec<DgmEntry>> {
    check_contained(m, poset)?;
    let intervals = enumerate_intervals(poset, guard)?;
    let ranks = RankCache::new(m, method);
    let mut out: Vec<DgmEntry> = Vec::with_capacity(intervals.len());
    for i in &intervals {
        let above: i64 = out
            .iter()
            .filter(|e| i.is_subset_of(&e.interval))
            .map(|e| e.value)
            .sum();
        out.push(DgmEntry {
            interval: i.clone(),
            value: ranks.rank(i)? as i64 - above,
        });
    }
    Ok(out)
}
