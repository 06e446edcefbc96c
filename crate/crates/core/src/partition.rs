//! Stars, star partitions, and the criticality machinery shared by the
//! solver and the verifier.
//!
//! A [`StarPartition`] keeps an incrementally maintained owner map and
//! per-order counters. [`validate`] and [`q_value`] recompute everything from
//! the star list alone and serve as independent auditors of that bookkeeping.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ContractViolation, Error};
use crate::graph::{Graph, VertexId};

const NO_OWNER: usize = usize::MAX;

/// Version tag written into every partition file.
pub const PARTITION_FORMAT_VERSION: u32 = 1;

/// One center plus its satellites. `satellites` is kept sorted ascending.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Star {
    pub center: VertexId,
    pub satellites: Vec<VertexId>,
}

impl Star {
    pub fn singleton(v: VertexId) -> Self {
        Star {
            center: v,
            satellites: Vec::new(),
        }
    }

    /// 2-star on `{a, b}`; the lower id becomes the center.
    pub fn pair(a: VertexId, b: VertexId) -> Self {
        Star {
            center: a.min(b),
            satellites: vec![a.max(b)],
        }
    }

    pub fn new(center: VertexId, mut satellites: Vec<VertexId>) -> Self {
        satellites.sort_unstable();
        Star { center, satellites }
    }

    #[inline]
    pub fn order(&self) -> usize {
        1 + self.satellites.len()
    }

    /// Center first, then satellites ascending.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        std::iter::once(self.center).chain(self.satellites.iter().copied())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.center == v || self.satellites.binary_search(&v).is_ok()
    }

    pub fn is_tiny(&self) -> bool {
        matches!(self.order(), 2 | 3)
    }

    /// The other vertex of a 2-star.
    pub fn partner(&self, v: VertexId) -> Option<VertexId> {
        if self.order() != 2 {
            return None;
        }
        let s = self.satellites[0];
        if v == self.center {
            Some(s)
        } else if v == s {
            Some(self.center)
        } else {
            None
        }
    }

    /// Same vertex set with `v` as center. `v` must belong to the star.
    pub fn recentered(&self, v: VertexId) -> Star {
        if v == self.center {
            return self.clone();
        }
        let sats = self
            .vertices()
            .filter(|&x| x != v)
            .collect::<Vec<_>>();
        Star::new(v, sats)
    }

    pub(crate) fn insert_satellite(&mut self, v: VertexId) {
        let pos = self.satellites.partition_point(|&x| x < v);
        self.satellites.insert(pos, v);
    }

    pub(crate) fn remove_satellite(&mut self, v: VertexId) -> bool {
        match self.satellites.binary_search(&v) {
            Ok(pos) => {
                self.satellites.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

impl fmt::Debug for Star {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{:?}", self.center, self.satellites)
    }
}

/// A collection of stars over the vertices of a host graph, together with
/// the order cap `k`.
///
/// The partition may be handed arbitrary (even invalid) star lists through
/// [`StarPartition::from_stars`]; [`validate`] reports what is wrong with
/// them. The solver only ever works on valid partitions.
#[derive(Clone, PartialEq, Eq)]
pub struct StarPartition {
    k: usize,
    stars: Vec<Star>,
    owner: Vec<usize>,
    // number of stars of order 1, 2, 3 (index 0 unused)
    small: [usize; 4],
}

impl StarPartition {
    /// Every vertex is its own 1-star.
    pub fn singletons(n: usize, k: usize) -> Self {
        Self::from_stars(n, k, (0..n).map(Star::singleton).collect())
    }

    /// Wraps a star list without checking it. Satellites are sorted; the
    /// owner map records the last star containing each vertex.
    pub fn from_stars(n: usize, k: usize, mut stars: Vec<Star>) -> Self {
        let mut owner = vec![NO_OWNER; n];
        let mut small = [0usize; 4];
        for (i, s) in stars.iter_mut().enumerate() {
            s.satellites.sort_unstable();
            for v in s.vertices() {
                if v < n {
                    owner[v] = i;
                }
            }
            if s.order() <= 3 {
                small[s.order()] += 1;
            }
        }
        StarPartition {
            k,
            stars,
            owner,
            small,
        }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of vertices of the host graph.
    #[inline]
    pub fn n(&self) -> usize {
        self.owner.len()
    }

    /// Number of stars.
    #[inline]
    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    #[inline]
    pub fn stars(&self) -> &[Star] {
        &self.stars
    }

    #[inline]
    pub fn star(&self, idx: usize) -> &Star {
        &self.stars[idx]
    }

    /// Index of the star containing `v`, if any.
    #[inline]
    pub fn owner(&self, v: VertexId) -> Option<usize> {
        match self.owner[v] {
            NO_OWNER => None,
            i => Some(i),
        }
    }

    /// Index of the star containing `v`. Panics if `v` is uncovered.
    #[inline]
    pub(crate) fn owner_of(&self, v: VertexId) -> usize {
        let i = self.owner[v];
        debug_assert_ne!(i, NO_OWNER, "vertex {v} uncovered");
        i
    }

    #[inline]
    pub fn star_of(&self, v: VertexId) -> &Star {
        &self.stars[self.owner_of(v)]
    }

    /// Critical per Definition of tiny stars: in a 2-star, or the center of
    /// a 3-star.
    #[inline]
    pub fn is_critical(&self, v: VertexId) -> bool {
        let s = self.star_of(v);
        match s.order() {
            2 => true,
            3 => s.center == v,
            _ => false,
        }
    }

    /// Number of stars of order `j`, maintained incrementally for `j <= 3`.
    pub fn count_of_order(&self, j: usize) -> usize {
        if (1..=3).contains(&j) {
            self.small[j]
        } else {
            self.stars.iter().filter(|s| s.order() == j).count()
        }
    }

    /// `3·|S₂| + |S₃|` from the incrementally maintained counters.
    pub fn tracked_q(&self) -> u64 {
        3 * self.small[2] as u64 + self.small[3] as u64
    }

    /// Stars sorted by center, the form used for output and comparisons.
    pub fn canonical_stars(&self) -> Vec<Star> {
        let mut v = self.stars.clone();
        v.sort();
        v
    }

    /// Same partition with its stars in canonical order.
    pub fn canonicalized(&self) -> StarPartition {
        StarPartition::from_stars(self.n(), self.k, self.canonical_stars())
    }

    /// Removes the stars at `remove` and appends `add`. Removal uses
    /// `swap_remove`, so the index of the last star may change.
    pub(crate) fn replace(&mut self, remove: &[usize], add: Vec<Star>) {
        let mut idx = remove.to_vec();
        idx.sort_unstable_by(|a, b| b.cmp(a));
        idx.dedup();
        for i in idx {
            let old = self.stars.swap_remove(i);
            self.uncount(&old);
            for v in old.vertices() {
                self.owner[v] = NO_OWNER;
            }
            if i < self.stars.len() {
                for v in self.stars[i].vertices() {
                    self.owner[v] = i;
                }
            }
        }
        for s in add {
            debug_assert!(s.order() >= 1);
            let i = self.stars.len();
            for v in s.vertices() {
                debug_assert_eq!(self.owner[v], NO_OWNER, "vertex {v} covered twice");
                self.owner[v] = i;
            }
            if s.order() <= 3 {
                self.small[s.order()] += 1;
            }
            self.stars.push(s);
        }
    }

    fn uncount(&mut self, s: &Star) {
        if s.order() <= 3 {
            self.small[s.order()] -= 1;
        }
    }

    pub fn to_file(&self) -> PartitionFile {
        PartitionFile {
            format_version: PARTITION_FORMAT_VERSION,
            k: self.k,
            stars: self.canonical_stars(),
        }
    }

    /// Pretty JSON in the partition file format, stars in canonical order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    /// Reads a partition file. `n` is the vertex count of the host graph.
    pub fn from_json(text: &str, n: usize) -> Result<Self, Error> {
        let file: PartitionFile = serde_json::from_str(text)?;
        if let Some(v) = file
            .stars
            .iter()
            .flat_map(|s| s.vertices())
            .find(|&v| v >= n)
        {
            return Err(ContractViolation::InvalidPartition(format!(
                "vertex {v} out of range for n = {n}"
            ))
            .into());
        }
        Ok(StarPartition::from_stars(n, file.k, file.stars))
    }
}

impl fmt::Debug for StarPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarPartition")
            .field("k", &self.k)
            .field("stars", &self.canonical_stars())
            .finish()
    }
}

/// On-disk partition format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub k: usize,
    pub stars: Vec<Star>,
}

fn default_version() -> u32 {
    PARTITION_FORMAT_VERSION
}

/// One reason a star list fails to be a `k⁻`-star partition of the graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    VertexOutOfRange { vertex: VertexId },
    Uncovered { vertex: VertexId },
    DoubleCovered { vertex: VertexId },
    NonEdge { center: VertexId, satellite: VertexId },
    OrderExceedsK { star: usize, order: usize, k: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// From-scratch check that `p` is a `k⁻`-star partition of `g`. Uses only
/// the star list, never the owner map.
pub fn validate(p: &StarPartition, g: &Graph) -> ValidityReport {
    let n = g.n();
    let mut seen = vec![0u32; n];
    let mut violations = Vec::new();
    for (i, s) in p.stars().iter().enumerate() {
        for v in s.vertices() {
            if v >= n {
                violations.push(Violation::VertexOutOfRange { vertex: v });
            } else {
                seen[v] += 1;
            }
        }
        for &sat in &s.satellites {
            if s.center < n && sat < n && !g.has_edge(s.center, sat) {
                violations.push(Violation::NonEdge {
                    center: s.center,
                    satellite: sat,
                });
            }
        }
        if s.order() > p.k() {
            violations.push(Violation::OrderExceedsK {
                star: i,
                order: s.order(),
                k: p.k(),
            });
        }
    }
    for (v, &c) in seen.iter().enumerate() {
        match c {
            0 => violations.push(Violation::Uncovered { vertex: v }),
            1 => {}
            _ => violations.push(Violation::DoubleCovered { vertex: v }),
        }
    }
    ValidityReport { violations }
}

/// `q(S) = 3·|S₂| + |S₃|`, recomputed from the star list.
pub fn q_value(p: &StarPartition) -> u64 {
    p.stars()
        .iter()
        .map(|s| match s.order() {
            2 => 3,
            3 => 1,
            _ => 0,
        })
        .sum()
}

/// Number of 1-stars, recomputed from the star list.
pub fn count_1stars(p: &StarPartition) -> usize {
    p.stars().iter().filter(|s| s.order() == 1).count()
}

/// Which vertices are critical and which stars are tiny.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalitySnapshot {
    pub is_critical: Vec<bool>,
    pub tiny_star_ids: BTreeSet<usize>,
}

pub fn criticality(p: &StarPartition) -> CriticalitySnapshot {
    let mut is_critical = vec![false; p.n()];
    let mut tiny_star_ids = BTreeSet::new();
    for (i, s) in p.stars().iter().enumerate() {
        match s.order() {
            2 => {
                tiny_star_ids.insert(i);
                for v in s.vertices() {
                    is_critical[v] = true;
                }
            }
            3 => {
                tiny_star_ids.insert(i);
                is_critical[s.center] = true;
            }
            _ => {}
        }
    }
    CriticalitySnapshot {
        is_critical,
        tiny_star_ids,
    }
}

/// Whether two critical vertices lie in different stars. The endpoints of
/// one 2-star are not separate, and neither is a vertex from itself.
pub fn separate(p: &StarPartition, u: VertexId, v: VertexId) -> Result<bool, ContractViolation> {
    for x in [u, v] {
        if !p.is_critical(x) {
            return Err(ContractViolation::NotCritical(x));
        }
    }
    Ok(p.owner_of(u) != p.owner_of(v))
}

/// Whether the tiny star is a 2-star or a 3-star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TinyKind {
    Two,
    Three,
}

/// Adjacency pattern between a tiny star `W` and a reference star
/// `S = v₁-v₂…v_ℓ`.
///
/// For a 2-star `W = w₁-w₂` (center first) bit `(i-1)·ℓ + (j-1)` is set iff
/// `{w_i, v_j}` is an edge. For a 3-star centered at `w` bit `j-1` is set iff
/// `{w, v_j}` is an edge. `v₁` is the center of `S`, the rest its satellites
/// in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TinyStarType {
    pub kind: TinyKind,
    pub ell: u8,
    pub bits: u16,
}

impl TinyStarType {
    /// The tuple `(x₁₁, …, x₁ℓ, x₂₁, …, x₂ℓ)` or `(x₁, …, x_ℓ)`.
    pub fn to_tuple(&self) -> Vec<u8> {
        let len = match self.kind {
            TinyKind::Two => 2 * self.ell as usize,
            TinyKind::Three => self.ell as usize,
        };
        (0..len).map(|b| ((self.bits >> b) & 1) as u8).collect()
    }

    /// Whether critical vertex `i` of `W` (0 = center, 1 = the satellite of
    /// a 2-star) is adjacent to `v_{j+1}`.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        (self.bits >> (i * self.ell as usize + j)) & 1 == 1
    }

    /// Maximum number of distinct types for reference order `ell`.
    pub fn type_count_bound(ell: usize) -> usize {
        4usize.pow(ell as u32) + 2usize.pow(ell as u32)
    }
}

/// Computes the type of tiny star `w` against reference star `s`.
pub fn tiny_type(w: &Star, s: &Star, g: &Graph) -> Result<TinyStarType, ContractViolation> {
    if w == s {
        return Err(ContractViolation::BadStar("W must differ from S".into()));
    }
    let ell = s.order();
    if !(2..=4).contains(&ell) {
        return Err(ContractViolation::BadStar(format!(
            "reference star has order {ell}, expected 2..=4"
        )));
    }
    let kind = match w.order() {
        2 => TinyKind::Two,
        3 => TinyKind::Three,
        o => {
            return Err(ContractViolation::BadStar(format!(
                "W has order {o}, expected 2 or 3"
            )))
        }
    };
    let crit: &[VertexId] = match kind {
        TinyKind::Two => &[w.center, w.satellites[0]],
        TinyKind::Three => std::slice::from_ref(&w.center),
    };
    let mut bits = 0u16;
    for (i, &wi) in crit.iter().enumerate() {
        for (j, vj) in s.vertices().enumerate() {
            if g.has_edge(wi, vj) {
                bits |= 1 << (i * ell + j);
            }
        }
    }
    Ok(TinyStarType {
        kind,
        ell: ell as u8,
        bits,
    })
}
