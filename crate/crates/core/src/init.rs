//! Initial partition with the minimum number of 1-stars.
//!
//! Starting from all singletons, every exposed vertex (a 1-star) is offered
//! to [`rescue_search`], a breadth-first augmenting search over "demand"
//! vertices. A demand vertex `x` looks at its neighbors `y` and takes the
//! first applicable move, in this priority:
//!
//! * (a) `y` is a 1-star: form the 2-star `{x, y}`.
//! * (b) `y` is in a 2-star: re-center that star at `y` and attach `x`.
//! * (c) `y` is a satellite of a star of order ≥ 3: split `y` off into the
//!   2-star `y-x`.
//! * (d) `y` is the center of a star of order `< k`: attach `x`.
//! * (e) `y` is the center of a full star `T` (order `k`): `x` takes the place
//!   of one satellite of `T`, and every satellite of `T` becomes a demand
//!   vertex of the next BFS layer.
//!
//! Moves (a) to (d) end the search. Each full star is expanded by (e) at
//! most once. Move (c) stays available on stars that were already expanded,
//! unless `y` is the satellite that the current search path pushes out of
//! that star. Without that, a demand vertex could not pair up with another
//! satellite of the star it was pushed out of.
//!
//! The outer loop repeats full passes over the exposed vertices until a
//! pass rescues nobody.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::ParamError;
use crate::graph::{Graph, VertexId};
use crate::partition::{Star, StarPartition};

/// Smallest `k` the solver accepts.
pub const MIN_K: usize = 4;

/// One displacement along a rescue chain: `attached` replaces `detached`
/// as a satellite of full star `star` (an index into the partition the
/// trace was computed on).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RescueStep {
    pub detached: VertexId,
    pub star: usize,
    pub attached: VertexId,
}

/// The move that finally houses the last demand vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TerminalMove {
    /// (a) pair with the 1-star `partner`.
    PairSingleton { demand: VertexId, partner: VertexId },
    /// (b) re-center the 2-star `star` at `new_center` and attach.
    RecenterPair {
        demand: VertexId,
        new_center: VertexId,
        star: usize,
    },
    /// (c) detach satellite `partner` from `star`; form `partner-demand`.
    SplitSatellite {
        demand: VertexId,
        partner: VertexId,
        star: usize,
    },
    /// (d) attach to the non-full star centered at `center`.
    AttachToCenter {
        demand: VertexId,
        center: VertexId,
        star: usize,
    },
}

impl TerminalMove {
    pub fn demand(&self) -> VertexId {
        match *self {
            TerminalMove::PairSingleton { demand, .. }
            | TerminalMove::RecenterPair { demand, .. }
            | TerminalMove::SplitSatellite { demand, .. }
            | TerminalMove::AttachToCenter { demand, .. } => demand,
        }
    }
}

/// A successful augmenting search for the exposed vertex `origin`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RescueTrace {
    pub origin: VertexId,
    /// Steps ordered from `origin` outward.
    pub chain: Vec<RescueStep>,
    pub terminal: TerminalMove,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InitStats {
    pub passes: usize,
    pub rescues: usize,
}

struct Node {
    vertex: VertexId,
    parent: usize,
    // star this vertex is being pushed out of; unused for the root
    star: usize,
}

const ROOT: usize = usize::MAX;

/// Searches for a rescue of the 1-star `u`. Returns `None` (and leaves the
/// partition untouched, since it is borrowed immutably) when no move chain
/// exists or `u` is not a 1-star.
pub fn rescue_search(p: &StarPartition, g: &Graph, u: VertexId) -> Option<RescueTrace> {
    let root_star = p.owner(u)?;
    if p.star(root_star).order() != 1 {
        return None;
    }
    let k = p.k();
    let mut expanded = vec![false; p.len()];
    let mut nodes = vec![Node {
        vertex: u,
        parent: ROOT,
        star: ROOT,
    }];
    let mut queue = VecDeque::from([0usize]);

    // whether star `t` lies on the path of node `id`, and if so which
    // vertex that path pushes out of it
    let displaced_on_path = |nodes: &[Node], mut id: usize, t: usize| -> Option<VertexId> {
        while id != ROOT {
            let node = &nodes[id];
            if node.star == t {
                return Some(node.vertex);
            }
            id = node.parent;
        }
        None
    };

    while let Some(id) = queue.pop_front() {
        let x = nodes[id].vertex;
        // best terminal move: (rule rank, neighbor)
        let mut best: Option<(u8, VertexId, usize)> = None;
        for &y in g.neighbors(x) {
            if y == u {
                continue;
            }
            let t = p.owner_of(y);
            let star = p.star(t);
            let rank = match star.order() {
                1 => 0,
                2 => 1,
                o if star.center != y => {
                    debug_assert!(o >= 3);
                    if expanded[t] && displaced_on_path(&nodes, id, t) == Some(y) {
                        continue;
                    }
                    2
                }
                o if o < k => 3,
                _ => continue,
            };
            if best.is_none_or(|(r, _, _)| rank < r) {
                best = Some((rank, y, t));
                if rank == 0 {
                    break;
                }
            }
        }

        if let Some((rank, y, t)) = best {
            let terminal = match rank {
                0 => TerminalMove::PairSingleton { demand: x, partner: y },
                1 => TerminalMove::RecenterPair {
                    demand: x,
                    new_center: y,
                    star: t,
                },
                2 => TerminalMove::SplitSatellite {
                    demand: x,
                    partner: y,
                    star: t,
                },
                _ => TerminalMove::AttachToCenter {
                    demand: x,
                    center: y,
                    star: t,
                },
            };
            let mut chain = Vec::new();
            let mut cur = id;
            while cur != 0 {
                let node = &nodes[cur];
                chain.push(RescueStep {
                    detached: node.vertex,
                    star: node.star,
                    attached: nodes[node.parent].vertex,
                });
                cur = node.parent;
            }
            chain.reverse();
            return Some(RescueTrace {
                origin: u,
                chain,
                terminal,
            });
        }

        // (e) expand full stars centered at a neighbor
        for &y in g.neighbors(x) {
            let t = p.owner_of(y);
            let star = p.star(t);
            if star.center != y || star.order() < k || expanded[t] {
                continue;
            }
            expanded[t] = true;
            for &s in &star.satellites {
                nodes.push(Node {
                    vertex: s,
                    parent: id,
                    star: t,
                });
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    None
}

/// Applies a trace produced by [`rescue_search`] on this same partition.
pub fn apply_rescue(p: &mut StarPartition, trace: &RescueTrace) {
    let mut work: BTreeMap<usize, Option<Star>> = BTreeMap::new();
    let mut fresh = Vec::new();

    fn slot<'a>(
        work: &'a mut BTreeMap<usize, Option<Star>>,
        p: &StarPartition,
        t: usize,
    ) -> &'a mut Star {
        work.entry(t)
            .or_insert_with(|| Some(p.star(t).clone()))
            .as_mut()
            .expect("star already dissolved")
    }

    let root = p.owner_of(trace.origin);
    work.insert(root, None);
    for step in &trace.chain {
        let s = slot(&mut work, p, step.star);
        let removed = s.remove_satellite(step.detached);
        debug_assert!(removed, "stale rescue step {step:?}");
        s.insert_satellite(step.attached);
    }
    match trace.terminal {
        TerminalMove::PairSingleton { demand, partner } => {
            work.insert(p.owner_of(partner), Some(Star::pair(demand, partner)));
        }
        TerminalMove::RecenterPair {
            demand,
            new_center,
            star,
        } => {
            let s = slot(&mut work, p, star);
            let mut r = s.recentered(new_center);
            r.insert_satellite(demand);
            *s = r;
        }
        TerminalMove::SplitSatellite {
            demand,
            partner,
            star,
        } => {
            let s = slot(&mut work, p, star);
            let removed = s.remove_satellite(partner);
            debug_assert!(removed);
            fresh.push(Star::new(partner, vec![demand]));
        }
        TerminalMove::AttachToCenter { demand, star, .. } => {
            slot(&mut work, p, star).insert_satellite(demand);
        }
    }
    let remove: Vec<usize> = work.keys().copied().collect();
    let add = work.into_values().flatten().chain(fresh).collect();
    p.replace(&remove, add);
}

/// Valid `k⁻`-star partition of `g` with the fewest possible 1-stars.
pub fn initial_partition(g: &Graph, k: usize) -> Result<StarPartition, ParamError> {
    initial_partition_with_stats(g, k).map(|(p, _)| p)
}

pub fn initial_partition_with_stats(
    g: &Graph,
    k: usize,
) -> Result<(StarPartition, InitStats), ParamError> {
    if k < MIN_K {
        return Err(ParamError::KTooSmall { k, min: MIN_K });
    }
    let mut p = StarPartition::singletons(g.n(), k);
    let mut stats = InitStats::default();
    loop {
        stats.passes += 1;
        let mut progress = false;
        for u in g.vertices() {
            if p.star_of(u).order() != 1 {
                continue;
            }
            if let Some(trace) = rescue_search(&p, g, u) {
                apply_rescue(&mut p, &trace);
                stats.rescues += 1;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    Ok((p, stats))
}

pub use crate::partition::count_1stars;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{count_1stars, validate};

    #[test]
    fn rejects_small_k() {
        assert_eq!(
            initial_partition(&Graph::complete(3), 3).unwrap_err(),
            ParamError::KTooSmall { k: 3, min: 4 }
        );
    }

    #[test]
    fn star_k17() {
        let g = Graph::star(7);
        let p = initial_partition(&g, 4).unwrap();
        assert!(validate(&p, &g).is_ok());
        assert_eq!(count_1stars(&p), 4);
    }

    #[test]
    fn triangle_and_empty() {
        let g = Graph::complete(3);
        let p = initial_partition(&g, 4).unwrap();
        assert_eq!(count_1stars(&p), 0);
        assert_eq!(p.len(), 1);

        let g = Graph::empty(3);
        let p = initial_partition(&g, 4).unwrap();
        assert_eq!(count_1stars(&p), 3);
        assert_eq!(count_1stars(&StarPartition::singletons(7, 4)), 7);
    }

    #[test]
    fn rule_a_on_path() {
        let g = Graph::path(3);
        let p = StarPartition::singletons(3, 4);
        let t = rescue_search(&p, &g, 0).unwrap();
        assert!(t.chain.is_empty());
        assert_eq!(
            t.terminal,
            TerminalMove::PairSingleton {
                demand: 0,
                partner: 1
            }
        );
    }

    #[test]
    fn rule_b_recenters_pair() {
        // 2-star {0 (center), 1}; u = 2 adjacent only to the satellite 1
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap().graph;
        let mut p = StarPartition::from_stars(3, 4, vec![Star::pair(0, 1), Star::singleton(2)]);
        let t = rescue_search(&p, &g, 2).unwrap();
        assert!(matches!(t.terminal, TerminalMove::RecenterPair { new_center: 1, .. }));
        apply_rescue(&mut p, &t);
        assert_eq!(p.stars(), &[Star::new(1, vec![0, 2])]);
    }

    #[test]
    fn rule_e_then_a_through_full_star() {
        // full 4-star 0-{1,2,3}; u = 4 adjacent only to center 0;
        // satellite 3 has the exposed neighbor 5
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4), (3, 5)])
            .unwrap()
            .graph;
        let mut p = StarPartition::from_stars(
            6,
            4,
            vec![
                Star::new(0, vec![1, 2, 3]),
                Star::singleton(4),
                Star::singleton(5),
            ],
        );
        assert_eq!(count_1stars(&p), 2);
        let t = rescue_search(&p, &g, 4).unwrap();
        assert_eq!(
            t.chain,
            vec![RescueStep {
                detached: 3,
                star: 0,
                attached: 4
            }]
        );
        assert_eq!(
            t.terminal,
            TerminalMove::PairSingleton {
                demand: 3,
                partner: 5
            }
        );
        apply_rescue(&mut p, &t);
        assert!(validate(&p, &g).is_ok());
        assert_eq!(count_1stars(&p), 0);
        assert_eq!(p.star_of(4), &Star::new(0, vec![1, 2, 4]));
        assert_eq!(p.star_of(5), &Star::pair(3, 5));
    }

    #[test]
    fn seven_vertex_tree_reaches_zero() {
        // tree: hub 0 with leaves 1, 2, 4 and 3; path 3-5-6
        let g = Graph::from_edges(7, [(0, 1), (0, 2), (0, 3), (0, 4), (3, 5), (5, 6)])
            .unwrap()
            .graph;
        let mut p = StarPartition::from_stars(
            7,
            4,
            vec![
                Star::new(0, vec![1, 2, 3]),
                Star::singleton(4),
                Star::singleton(5),
                Star::singleton(6),
            ],
        );
        let mut counts = vec![count_1stars(&p)];
        for u in [4, 6] {
            let t = rescue_search(&p, &g, u).unwrap();
            apply_rescue(&mut p, &t);
            assert!(validate(&p, &g).is_ok());
            counts.push(count_1stars(&p));
        }
        assert_eq!(counts, vec![3, 1, 0]);
        assert_eq!(count_1stars(&initial_partition(&g, 4).unwrap()), 0);
    }

    #[test]
    fn split_inside_expanded_star() {
        // Regression: full 4-star 0-{1,2,3} with the edge 1-2, and a leaf
        // 4 on the center. Pairing 1 with 2 frees a slot for 4. A search
        // that never revisits expanded stars leaves 4 exposed.
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)])
            .unwrap()
            .graph;
        let mut p = StarPartition::from_stars(
            5,
            4,
            vec![Star::new(0, vec![1, 2, 3]), Star::singleton(4)],
        );
        let t = rescue_search(&p, &g, 4).unwrap();
        assert!(matches!(
            t.terminal,
            TerminalMove::SplitSatellite {
                demand: 1,
                partner: 2,
                star: 0
            }
        ));
        apply_rescue(&mut p, &t);
        assert!(validate(&p, &g).is_ok());
        assert_eq!(count_1stars(&p), 0);
        assert_eq!(count_1stars(&initial_partition(&g, 4).unwrap()), 0);
    }

    #[test]
    fn no_rescue_for_isolated_or_covered() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap().graph;
        let p = StarPartition::from_stars(3, 4, vec![Star::pair(0, 1), Star::singleton(2)]);
        assert!(rescue_search(&p, &g, 2).is_none());
        assert!(rescue_search(&p, &g, 0).is_none());
    }

    #[test]
    fn deterministic() {
        let g = crate::generate::gen_gnp(60, 0.08, 11).unwrap();
        let a = initial_partition(&g, 4).unwrap();
        let b = initial_partition(&g, 4).unwrap();
        assert_eq!(a, b);
    }
}
