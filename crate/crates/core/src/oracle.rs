//! Exact solvers for small graphs.
//!
//! Memoized recursion over the set of still-uncovered vertices (a bitmask).
//! Each state branches on its lowest uncovered vertex `v`, which must be
//! covered by a star whose lowest vertex is `v`. The candidate stars are
//! enumerated once per graph and indexed by their lowest vertex.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::graph::{Graph, VertexId};
use crate::partition::{Star, StarPartition};

/// Default vertex cap for the exact solvers.
pub const DEFAULT_CAP: usize = 18;

/// Largest `n` for [`enumerate_all_graphs`].
pub const MAX_ENUMERATION_N: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Minimize the number of stars.
    Stars,
    /// Minimize the number of 1-stars.
    Singletons,
}

impl Objective {
    fn cost(self, order: usize) -> u32 {
        match self {
            Objective::Stars => 1,
            Objective::Singletons => u32::from(order == 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: usize,
    pub witness: StarPartition,
    pub explored_states: u64,
}

pub fn min_star_partition(g: &Graph, k: usize) -> Result<OracleResult, ParamError> {
    solve_exact(g, k, Objective::Stars, DEFAULT_CAP)
}

pub fn min_1star_partition(g: &Graph, k: usize) -> Result<OracleResult, ParamError> {
    solve_exact(g, k, Objective::Singletons, DEFAULT_CAP)
}

/// Exact optimum of `objective` over all `k⁻`-star partitions of `g`, for
/// any `k >= 1` and `g.n() <= cap` (at most 32).
pub fn solve_exact(
    g: &Graph,
    k: usize,
    objective: Objective,
    cap: usize,
) -> Result<OracleResult, ParamError> {
    let n = g.n();
    if k == 0 {
        return Err(ParamError::KTooSmall { k, min: 1 });
    }
    let cap = cap.min(32);
    if n > cap {
        return Err(ParamError::GraphTooLarge { n, cap });
    }
    let candidates = StarTable::build(g, k);
    let mut dp = Solver {
        cand: &candidates,
        objective,
        memo: HashMap::new(),
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let value = dp.best(full);

    let mut stars = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (_, choice) = dp.memo[&mask];
        let (set, center) = candidates.by_lowest[mask.trailing_zeros() as usize][choice as usize];
        stars.push(star_from_mask(set, center));
        mask &= !set;
    }
    let witness = StarPartition::from_stars(n, k, stars);
    Ok(OracleResult {
        value: value as usize,
        witness,
        explored_states: dp.memo.len() as u64,
    })
}

fn star_from_mask(set: u32, center: VertexId) -> Star {
    let sats = (0..32)
        .filter(|&v| v != center && set >> v & 1 == 1)
        .collect();
    Star::new(center, sats)
}

struct StarTable {
    // (vertex set, center) grouped by the lowest vertex of the set
    by_lowest: Vec<Vec<(u32, VertexId)>>,
}

impl StarTable {
    fn build(g: &Graph, k: usize) -> Self {
        let n = g.n();
        let mut seen: HashMap<u32, VertexId> = HashMap::new();
        let mut order: Vec<u32> = Vec::new();
        for c in g.vertices() {
            let nbrs = g.neighbors(c);
            let max_sats = (k - 1).min(nbrs.len());
            // enumerate subsets of the neighborhood of size <= k-1
            let mut chosen = Vec::with_capacity(max_sats);
            subsets(nbrs, max_sats, 0, &mut chosen, &mut |sats| {
                let set = sats.iter().fold(1u32 << c, |m, &v| m | 1 << v);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(set) {
                    e.insert(c);
                    order.push(set);
                }
            });
        }
        let mut by_lowest = vec![Vec::new(); n];
        for set in order {
            by_lowest[set.trailing_zeros() as usize].push((set, seen[&set]));
        }
        StarTable { by_lowest }
    }
}

fn subsets(
    pool: &[VertexId],
    max: usize,
    from: usize,
    chosen: &mut Vec<VertexId>,
    visit: &mut impl FnMut(&[VertexId]),
) {
    visit(chosen);
    if chosen.len() == max {
        return;
    }
    for i in from..pool.len() {
        chosen.push(pool[i]);
        subsets(pool, max, i + 1, chosen, visit);
        chosen.pop();
    }
}

struct Solver<'a> {
    cand: &'a StarTable,
    objective: Objective,
    // uncovered set -> (optimal value, index of the chosen star)
    memo: HashMap<u32, (u32, u32)>,
}

impl Solver<'_> {
    fn best(&mut self, mask: u32) -> u32 {
        if mask == 0 {
            return 0;
        }
        if let Some(&(v, _)) = self.memo.get(&mask) {
            return v;
        }
        let low = mask.trailing_zeros() as usize;
        let mut best = (u32::MAX, 0u32);
        for (i, &(set, _)) in self.cand.by_lowest[low].iter().enumerate() {
            if set & !mask != 0 {
                continue;
            }
            let cost = self.objective.cost(set.count_ones() as usize);
            if cost >= best.0 {
                continue;
            }
            let total = cost + self.best(mask & !set);
            if total < best.0 {
                best = (total, i as u32);
            }
        }
        self.memo.insert(mask, best);
        best.0
    }
}

/// All `2^C(n,2)` labeled graphs on `n <= 6` vertices. Graph number `i`
/// contains the `b`-th pair of the lexicographic list `(0,1), (0,2), …`
/// iff bit `b` of `i` is set.
pub fn enumerate_all_graphs(n: usize) -> Result<impl Iterator<Item = Graph>, ParamError> {
    if n > MAX_ENUMERATION_N {
        return Err(ParamError::GraphTooLarge {
            n,
            cap: MAX_ENUMERATION_N,
        });
    }
    let pairs: Vec<(VertexId, VertexId)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let total = 1u64 << pairs.len();
    Ok((0..total).map(move |bits| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| bits >> b & 1 == 1)
            .map(|(_, &e)| e);
        Graph::from_edges(n, edges).expect("valid pairs").graph
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{count_1stars, validate};

    /// Brute force: assign every vertex a center (itself or a neighbor) and
    /// keep the assignments that form a partition. Exponential, tiny n only.
    fn brute_force(g: &Graph, k: usize, objective: Objective) -> usize {
        let n = g.n();
        let choices: Vec<Vec<VertexId>> = g
            .vertices()
            .map(|v| std::iter::once(v).chain(g.neighbors(v).iter().copied()).collect())
            .collect();
        let mut pick = vec![0usize; n];
        let mut best = usize::MAX;
        loop {
            let center: Vec<VertexId> = (0..n).map(|v| choices[v][pick[v]]).collect();
            // a vertex pointing elsewhere must point to a self-centered vertex
            let ok = (0..n).all(|v| center[v] == v || center[center[v]] == center[v]);
            if ok {
                let mut size = vec![0usize; n];
                for v in 0..n {
                    size[center[v]] += 1;
                }
                if size.iter().all(|&s| s <= k) {
                    let value = match objective {
                        Objective::Stars => size.iter().filter(|&&s| s > 0).count(),
                        Objective::Singletons => size.iter().filter(|&&s| s == 1).count(),
                    };
                    best = best.min(value);
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn star_k17_values() {
        let g = Graph::star(7);
        assert_eq!(brute_force(&g, 4, Objective::Stars), 5);
        assert_eq!(brute_force(&g, 4, Objective::Singletons), 4);
        let r = min_star_partition(&g, 4).unwrap();
        assert_eq!(r.value, 5);
        assert!(validate(&r.witness, &g).is_ok());
        assert_eq!(r.witness.len(), 5);
        let r = min_1star_partition(&g, 4).unwrap();
        assert_eq!(r.value, 4);
        assert_eq!(count_1stars(&r.witness), 4);
    }

    #[test]
    fn small_named_graphs() {
        assert_eq!(min_star_partition(&Graph::complete(3), 4).unwrap().value, 1);
        assert_eq!(brute_force(&Graph::cycle(5), 4, Objective::Stars), 2);
        assert_eq!(min_star_partition(&Graph::cycle(5), 4).unwrap().value, 2);
        assert_eq!(brute_force(&Graph::path(4), 4, Objective::Singletons), 0);
        assert_eq!(min_1star_partition(&Graph::path(4), 4).unwrap().value, 0);
        assert_eq!(min_1star_partition(&Graph::empty(5), 4).unwrap().value, 5);
        assert_eq!(min_star_partition(&Graph::empty(0), 4).unwrap().value, 0);
    }

    #[test]
    fn matches_brute_force_on_all_five_vertex_graphs() {
        for g in enumerate_all_graphs(5).unwrap() {
            for k in 1..=5 {
                for obj in [Objective::Stars, Objective::Singletons] {
                    let r = solve_exact(&g, k, obj, DEFAULT_CAP).unwrap();
                    assert_eq!(r.value, brute_force(&g, k, obj), "{g:?} k={k} {obj:?}");
                    assert!(validate(&r.witness, &g).is_ok());
                    let attained = match obj {
                        Objective::Stars => r.witness.len(),
                        Objective::Singletons => count_1stars(&r.witness),
                    };
                    assert_eq!(attained, r.value);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_all_graphs(2).unwrap().count(), 2);
        assert_eq!(enumerate_all_graphs(3).unwrap().count(), 8);
        assert_eq!(enumerate_all_graphs(4).unwrap().count(), 64);
        assert!(enumerate_all_graphs(7).is_err());
        let all: Vec<Graph> = enumerate_all_graphs(3).unwrap().collect();
        assert_eq!(all[0], Graph::empty(3));
        assert_eq!(all[7], Graph::complete(3));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            min_star_partition(&Graph::empty(19), 4),
            Err(ParamError::GraphTooLarge { n: 19, cap: 18 })
        ));
        assert!(solve_exact(&Graph::empty(3), 0, Objective::Stars, 18).is_err());
    }

    #[test]
    fn monotone_in_k() {
        for g in enumerate_all_graphs(4).unwrap() {
            let vals: Vec<usize> = (1..=5)
                .map(|k| min_star_partition(&g, k).unwrap().value)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{g:?}: {vals:?}");
        }
    }
}
