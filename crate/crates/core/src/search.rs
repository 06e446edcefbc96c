//! The three local operations and the main improvement loop.
//!
//! Every operation strictly lowers the potential `q(S) = 3|S₂| + |S₃|` and
//! never creates a 1-star, so the loop stops after at most `⌊3n/2⌋`
//! applications. Each application is recorded as an [`OpApplication`] so the
//! potential argument can be audited after the fact.
//!
//! Detection routines are pure functions of the partition. Ties are broken
//! by ascending star index, then ascending vertex id.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{ContractViolation, ParamError};
use crate::graph::{Graph, VertexId};
use crate::init::{initial_partition_with_stats, InitStats};
use crate::partition::{count_1stars, tiny_type, Star, StarPartition};

/// Version tag for JSON-lines operation logs.
pub const OPLOG_FORMAT_VERSION: u32 = 1;

/// Guaranteed potential decrease of operation `op_id` (1, 2 or 3).
pub fn min_q_decrease(op_id: u8) -> u64 {
    match op_id {
        1 => 1,
        2 => 4,
        3 => 3,
        _ => panic!("unknown operation {op_id}"),
    }
}

/// One applied operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpApplication {
    pub op_id: u8,
    /// `(role, vertex)` pairs, e.g. `("u", 4)`, `("v1", 0)`, `("w3", 8)`.
    pub participants: Vec<(String, VertexId)>,
    pub q_before: u64,
    pub q_after: u64,
    pub sequence_number: u64,
}

impl OpApplication {
    pub fn decrease(&self) -> i64 {
        self.q_before as i64 - self.q_after as i64
    }

    /// Whether the recorded potential drop meets the operation's floor.
    pub fn meets_floor(&self) -> bool {
        self.q_after < self.q_before && self.q_before - self.q_after >= min_q_decrease(self.op_id)
    }

    pub fn participant(&self, role: &str) -> Option<VertexId> {
        self.participants
            .iter()
            .find(|(r, _)| r == role)
            .map(|&(_, v)| v)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: u64,
    /// Applications of operations 1, 2, 3.
    pub op_counts: [u64; 3],
    /// `q` before the first operation, then after each one.
    pub q_trajectory: Vec<u64>,
    pub one_star_count: usize,
    pub init: InitStats,
    #[serde(serialize_with = "secs")]
    pub init_time: Duration,
    #[serde(serialize_with = "secs")]
    pub wall_time: Duration,
    #[serde(skip)]
    pub log: Vec<OpApplication>,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Operation 1: `u` in a 2-star, `v` a satellite of a `4⁺`-star centered at
/// `c`, `{u, v}` an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Op1Candidate {
    pub u: VertexId,
    pub v: VertexId,
    pub c: VertexId,
}

/// Operation 2: the star centered at `s_center` and, for each of its
/// vertices `v_j` (center first, then satellites ascending), a critical
/// neighbor `w_j`, all in pairwise different stars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Op2Candidate {
    pub s_center: VertexId,
    pub pairs: Vec<(VertexId, VertexId)>,
}

/// Operation 3 on the tiny star containing `v1` and the 2-star `{w1, w2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op3Candidate {
    /// `w1, w2` join the star of `v1` as satellites.
    Merge {
        v1: VertexId,
        w1: VertexId,
        w2: VertexId,
    },
    /// `k = 4`, 3-star `v1-…`: `w1, w2` join `v1`, satellite `vj` moves to
    /// the star of the critical vertex `w3`.
    Rewire {
        v1: VertexId,
        w1: VertexId,
        w2: VertexId,
        vj: VertexId,
        w3: VertexId,
    },
}

impl Op3Candidate {
    pub fn v1(&self) -> VertexId {
        match *self {
            Op3Candidate::Merge { v1, .. } | Op3Candidate::Rewire { v1, .. } => v1,
        }
    }
}

pub fn find_op1(p: &StarPartition, g: &Graph) -> Option<Op1Candidate> {
    for u in g.vertices() {
        if p.star_of(u).order() != 2 {
            continue;
        }
        for &v in g.neighbors(u) {
            let t = p.star_of(v);
            if t.order() >= 4 && t.center != v {
                return Some(Op1Candidate { u, v, c: t.center });
            }
        }
    }
    None
}

fn check_op1(p: &StarPartition, g: &Graph, c: &Op1Candidate) -> Result<(), ContractViolation> {
    let stale = |why: &str| Err(ContractViolation::StaleCandidate(format!("op1 {c:?}: {why}")));
    if p.star_of(c.u).order() != 2 {
        return stale("u not in a 2-star");
    }
    let t = p.star_of(c.v);
    if t.order() < 4 || t.center != c.c || c.v == c.c {
        return stale("v not a satellite of a 4+-star centered at c");
    }
    if !g.has_edge(c.u, c.v) {
        return stale("{u, v} not an edge");
    }
    Ok(())
}

pub fn apply_op1(
    p: &mut StarPartition,
    g: &Graph,
    c: &Op1Candidate,
) -> Result<OpApplication, ContractViolation> {
    check_op1(p, g, c)?;
    let q_before = p.tracked_q();
    let (iu, ic) = (p.owner_of(c.u), p.owner_of(c.v));
    let mut grown = p.star(iu).recentered(c.u);
    grown.insert_satellite(c.v);
    let mut shrunk = p.star(ic).clone();
    shrunk.remove_satellite(c.v);
    p.replace(&[iu, ic], vec![grown, shrunk]);
    Ok(OpApplication {
        op_id: 1,
        participants: vec![("u".into(), c.u), ("v".into(), c.v), ("c".into(), c.c)],
        q_before,
        q_after: p.tracked_q(),
        sequence_number: 0,
    })
}

/// Picks one entry per slot so that all chosen stars differ.
fn distinct_assignment(slots: &[Vec<(usize, VertexId)>]) -> Option<Vec<VertexId>> {
    fn go(
        slots: &[Vec<(usize, VertexId)>],
        j: usize,
        used: &mut Vec<usize>,
        out: &mut Vec<VertexId>,
    ) -> bool {
        if j == slots.len() {
            return true;
        }
        for &(t, w) in &slots[j] {
            if used.contains(&t) {
                continue;
            }
            used.push(t);
            out.push(w);
            if go(slots, j + 1, used, out) {
                return true;
            }
            used.pop();
            out.pop();
        }
        false
    }
    let mut used = Vec::with_capacity(slots.len());
    let mut out = Vec::with_capacity(slots.len());
    go(slots, 0, &mut used, &mut out).then_some(out)
}

/// Operation 2 detection by scanning the neighborhoods of each candidate
/// star `S`. For every `v_j` the first `ℓ` distinct stars holding a critical
/// neighbor of `v_j` are retained; `ℓ` per slot always suffice to complete
/// an assignment with pairwise different stars whenever one exists.
pub fn find_op2(p: &StarPartition, g: &Graph) -> Option<Op2Candidate> {
    let mut slots: Vec<Vec<(usize, VertexId)>> = Vec::with_capacity(4);
    for (si, s) in p.stars().iter().enumerate() {
        let ell = s.order();
        if !(2..=4).contains(&ell) {
            continue;
        }
        slots.clear();
        let mut feasible = true;
        for vj in s.vertices() {
            let mut slot = Vec::with_capacity(ell);
            for &w in g.neighbors(vj) {
                if !p.is_critical(w) {
                    continue;
                }
                let t = p.owner_of(w);
                if t == si || slot.iter().any(|&(x, _)| x == t) {
                    continue;
                }
                slot.push((t, w));
                if slot.len() == ell {
                    break;
                }
            }
            if slot.is_empty() {
                feasible = false;
                break;
            }
            slots.push(slot);
        }
        if !feasible {
            continue;
        }
        if let Some(ws) = distinct_assignment(&slots) {
            return Some(Op2Candidate {
                s_center: s.center,
                pairs: s.vertices().zip(ws).collect(),
            });
        }
    }
    None
}

/// Operation 2 detection through tiny-star types: for each `S`, every other
/// tiny star is bucketed by its type against `S`, keeping up to `ℓ`
/// representatives per bucket, and the assignment is searched over the
/// representatives only. Independent of [`find_op2`]; used by the
/// local-optimality audit.
pub fn find_op2_by_type(p: &StarPartition, g: &Graph) -> Option<Op2Candidate> {
    let tiny: Vec<usize> = (0..p.len()).filter(|&i| p.star(i).is_tiny()).collect();
    for (si, s) in p.stars().iter().enumerate() {
        let ell = s.order();
        if !(2..=4).contains(&ell) {
            continue;
        }
        let mut buckets = BTreeMap::new();
        for &ti in &tiny {
            if ti == si {
                continue;
            }
            let ty = tiny_type(p.star(ti), s, g).expect("tiny star against 2..4-star");
            if ty.bits == 0 {
                continue;
            }
            let reps: &mut Vec<usize> = buckets.entry(ty).or_default();
            if reps.len() < ell {
                reps.push(ti);
            }
        }
        let mut slots = vec![Vec::new(); ell];
        for (j, slot) in slots.iter_mut().enumerate() {
            for (ty, reps) in &buckets {
                let ncrit = match ty.kind {
                    crate::partition::TinyKind::Two => 2,
                    crate::partition::TinyKind::Three => 1,
                };
                let Some(i) = (0..ncrit).find(|&i| ty.adjacent(i, j)) else {
                    continue;
                };
                for &ti in reps {
                    if slot.len() == ell {
                        break;
                    }
                    let w = p.star(ti);
                    let wi = if i == 0 { w.center } else { w.satellites[0] };
                    slot.push((ti, wi));
                }
            }
        }
        if slots.iter().any(|s| s.is_empty()) {
            continue;
        }
        if let Some(ws) = distinct_assignment(&slots) {
            return Some(Op2Candidate {
                s_center: s.center,
                pairs: s.vertices().zip(ws).collect(),
            });
        }
    }
    None
}

fn check_op2(p: &StarPartition, g: &Graph, c: &Op2Candidate) -> Result<(), ContractViolation> {
    let stale = |why: String| Err(ContractViolation::StaleCandidate(format!("op2 {c:?}: {why}")));
    let si = p.owner_of(c.s_center);
    let s = p.star(si);
    if s.center != c.s_center || !(2..=4).contains(&s.order()) {
        return stale("S is not a 2..4-star centered at s_center".into());
    }
    if !s.vertices().eq(c.pairs.iter().map(|&(v, _)| v)) {
        return stale("pairs do not list the vertices of S in order".into());
    }
    let mut hosts = Vec::new();
    for &(v, w) in &c.pairs {
        if !p.is_critical(w) {
            return stale(format!("w = {w} not critical"));
        }
        let t = p.owner_of(w);
        if t == si {
            return stale(format!("w = {w} lies in S"));
        }
        if hosts.contains(&t) {
            return stale(format!("w = {w} not separate from the others"));
        }
        hosts.push(t);
        if !g.has_edge(v, w) {
            return stale(format!("{{{v}, {w}}} not an edge"));
        }
    }
    Ok(())
}

pub fn apply_op2(
    p: &mut StarPartition,
    g: &Graph,
    c: &Op2Candidate,
) -> Result<OpApplication, ContractViolation> {
    check_op2(p, g, c)?;
    let q_before = p.tracked_q();
    let mut remove = vec![p.owner_of(c.s_center)];
    let mut add = Vec::with_capacity(c.pairs.len());
    for &(v, w) in &c.pairs {
        let t = p.owner_of(w);
        let mut host = p.star(t).recentered(w);
        host.insert_satellite(v);
        remove.push(t);
        add.push(host);
    }
    p.replace(&remove, add);
    let mut participants = Vec::new();
    for (j, &(v, w)) in c.pairs.iter().enumerate() {
        participants.push((format!("v{}", j + 1), v));
        participants.push((format!("w{}", j + 1), w));
    }
    Ok(OpApplication {
        op_id: 2,
        participants,
        q_before,
        q_after: p.tracked_q(),
        sequence_number: 0,
    })
}

pub fn find_op3(p: &StarPartition, g: &Graph) -> Option<Op3Candidate> {
    let k = p.k();
    for (si, s) in p.stars().iter().enumerate() {
        let ell = s.order();
        let roles: &[VertexId] = match ell {
            2 => &[s.center.min(s.satellites[0]), s.center.max(s.satellites[0])],
            3 => std::slice::from_ref(&s.center),
            _ => continue,
        };
        for &v1 in roles {
            for &w1 in g.neighbors(v1) {
                let t = p.owner_of(w1);
                if t == si {
                    continue;
                }
                let Some(w2) = p.star(t).partner(w1) else {
                    continue;
                };
                if !g.has_edge(v1, w2) {
                    continue;
                }
                if k >= 5 || ell == 2 {
                    return Some(Op3Candidate::Merge { v1, w1, w2 });
                }
                for &vj in &s.satellites {
                    for &w3 in g.neighbors(vj) {
                        let t3 = p.owner_of(w3);
                        if t3 != si && t3 != t && p.is_critical(w3) {
                            return Some(Op3Candidate::Rewire {
                                v1,
                                w1,
                                w2,
                                vj,
                                w3,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

fn check_op3(p: &StarPartition, g: &Graph, c: &Op3Candidate) -> Result<(), ContractViolation> {
    let stale = |why: &str| Err(ContractViolation::StaleCandidate(format!("op3 {c:?}: {why}")));
    let (v1, w1, w2) = match *c {
        Op3Candidate::Merge { v1, w1, w2 } | Op3Candidate::Rewire { v1, w1, w2, .. } => {
            (v1, w1, w2)
        }
    };
    let si = p.owner_of(v1);
    let s = p.star(si);
    let ell = s.order();
    if !(ell == 2 || (ell == 3 && s.center == v1)) {
        return stale("v1 is not the center of a tiny star");
    }
    let t = p.owner_of(w1);
    if t == si || p.star(t).partner(w1) != Some(w2) {
        return stale("{w1, w2} is not a 2-star disjoint from S");
    }
    if !g.has_edge(v1, w1) || !g.has_edge(v1, w2) {
        return stale("w1, w2 not both adjacent to v1");
    }
    let merge = p.k() >= 5 || ell == 2;
    match *c {
        Op3Candidate::Merge { .. } if merge => Ok(()),
        Op3Candidate::Rewire { vj, w3, .. } if !merge => {
            if vj == v1 || !s.contains(vj) {
                return stale("vj not a satellite of S");
            }
            let t3 = p.owner_of(w3);
            if t3 == si || t3 == t || !p.is_critical(w3) {
                return stale("w3 not a critical vertex outside S and W");
            }
            if !g.has_edge(vj, w3) {
                return stale("{vj, w3} not an edge");
            }
            Ok(())
        }
        _ => stale("wrong branch for this k and star order"),
    }
}

pub fn apply_op3(
    p: &mut StarPartition,
    g: &Graph,
    c: &Op3Candidate,
) -> Result<OpApplication, ContractViolation> {
    check_op3(p, g, c)?;
    let q_before = p.tracked_q();
    let participants: Vec<(String, VertexId)> = match *c {
        Op3Candidate::Merge { v1, w1, w2 } => {
            let (si, t) = (p.owner_of(v1), p.owner_of(w1));
            let mut merged = p.star(si).recentered(v1);
            merged.insert_satellite(w1);
            merged.insert_satellite(w2);
            p.replace(&[si, t], vec![merged]);
            vec![("v1".into(), v1), ("w1".into(), w1), ("w2".into(), w2)]
        }
        Op3Candidate::Rewire { v1, w1, w2, vj, w3 } => {
            let (si, t, t3) = (p.owner_of(v1), p.owner_of(w1), p.owner_of(w3));
            let mut four = p.star(si).clone();
            four.remove_satellite(vj);
            four.insert_satellite(w1);
            four.insert_satellite(w2);
            let mut host = p.star(t3).recentered(w3);
            host.insert_satellite(vj);
            p.replace(&[si, t, t3], vec![four, host]);
            vec![
                ("v1".into(), v1),
                ("w1".into(), w1),
                ("w2".into(), w2),
                ("vj".into(), vj),
                ("w3".into(), w3),
            ]
        }
    };
    Ok(OpApplication {
        op_id: 3,
        participants,
        q_before,
        q_after: p.tracked_q(),
        sequence_number: 0,
    })
}

/// Next applicable operation, checked in the order 1, 3, 2.
pub fn next_operation(p: &StarPartition, g: &Graph) -> Option<Operation> {
    if let Some(c) = find_op1(p, g) {
        return Some(Operation::Op1(c));
    }
    if let Some(c) = find_op3(p, g) {
        return Some(Operation::Op3(c));
    }
    find_op2(p, g).map(Operation::Op2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    Op1(Op1Candidate),
    Op2(Op2Candidate),
    Op3(Op3Candidate),
}

impl Operation {
    pub fn apply(&self, p: &mut StarPartition, g: &Graph) -> Result<OpApplication, ContractViolation> {
        match self {
            Operation::Op1(c) => apply_op1(p, g, c),
            Operation::Op2(c) => apply_op2(p, g, c),
            Operation::Op3(c) => apply_op3(p, g, c),
        }
    }
}

/// Applies operations to `p` until none is applicable.
pub fn local_search(p: &mut StarPartition, g: &Graph) -> SolveStats {
    let start = Instant::now();
    let mut stats = SolveStats {
        q_trajectory: vec![p.tracked_q()],
        ..SolveStats::default()
    };
    while let Some(op) = next_operation(p, g) {
        let mut app = op.apply(p, g).expect("fresh candidate");
        debug_assert!(app.meets_floor(), "{app:?}");
        app.sequence_number = stats.iterations;
        stats.iterations += 1;
        stats.op_counts[app.op_id as usize - 1] += 1;
        stats.q_trajectory.push(app.q_after);
        stats.log.push(app);
    }
    stats.one_star_count = count_1stars(p);
    stats.wall_time = start.elapsed();
    stats
}

/// Minimum-1-star initialization followed by [`local_search`].
pub fn approx1(g: &Graph, k: usize) -> Result<(StarPartition, SolveStats), ParamError> {
    let start = Instant::now();
    let (mut p, init) = initial_partition_with_stats(g, k)?;
    let init_time = start.elapsed();
    let mut stats = local_search(&mut p, g);
    stats.init = init;
    stats.init_time = init_time;
    stats.wall_time = start.elapsed();
    Ok((p, stats))
}

/// From-scratch check that none of the three operations applies. Uses the
/// type-bucketed detector for operation 2.
pub fn audit_local_optimality(p: &StarPartition, g: &Graph) -> bool {
    find_op1(p, g).is_none() && find_op3(p, g).is_none() && find_op2_by_type(p, g).is_none()
}

/// Stars of `p` as a map for tests and diagnostics.
pub fn stars_by_center(p: &StarPartition) -> BTreeMap<VertexId, Star> {
    p.stars().iter().map(|s| (s.center, s.clone())).collect()
}
