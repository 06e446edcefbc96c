//! Deterministic instance generators.
//!
//! All generators draw from [`ChaCha8Rng`] seeded through
//! `SeedableRng::seed_from_u64`. ChaCha8 is a fixed, portable stream cipher
//! construction, so a given `(parameters, seed)` produces the same graph on
//! every platform.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ParamError;
use crate::graph::{Graph, VertexId};

/// The generator stream used everywhere in the crate.
pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi `G(n, p)`: every pair `u < v`, visited in ascending order,
/// is an edge independently with probability `p`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph, ParamError> {
    let coin = Bernoulli::new(p).map_err(|_| ParamError::Probability(p))?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if coin.sample(&mut rng) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(n, edges).expect("generated edges are simple").graph)
}

/// `centers` disjoint copies of `K_{1,legs}`. Copy `i` uses center
/// `i * (legs + 1)` followed by its leaves. With `bridge`, the leaves of
/// every pair of consecutive copies are joined by a uniformly random perfect
/// matching.
pub fn gen_star_heavy(centers: usize, legs: usize, bridge: bool, seed: u64) -> Result<Graph, ParamError> {
    if centers == 0 || legs == 0 {
        return Err(ParamError::Other(
            "star-heavy generator needs at least one center and one leg".into(),
        ));
    }
    let block = legs + 1;
    let n = centers * block;
    let mut edges = Vec::with_capacity(centers * legs * 2);
    for c in 0..centers {
        let base = c * block;
        edges.extend((1..=legs).map(|j| (base, base + j)));
    }
    if bridge {
        let mut rng = rng_from_seed(seed);
        let mut perm: Vec<usize> = (1..=legs).collect();
        for c in 0..centers.saturating_sub(1) {
            perm.shuffle(&mut rng);
            let (a, b) = (c * block, (c + 1) * block);
            edges.extend((1..=legs).zip(&perm).map(|(i, &j)| (a + i, b + j)));
        }
    }
    Ok(Graph::from_edges(n, edges).expect("generated edges are simple").graph)
}

/// Uniform random labeled tree on `n` vertices, decoded from a uniform
/// Prüfer sequence.
pub fn gen_random_tree(n: usize, seed: u64) -> Result<Graph, ParamError> {
    if n == 0 {
        return Err(ParamError::Other("a tree needs at least one vertex".into()));
    }
    if n <= 2 {
        let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
        return Ok(Graph::from_edges(n, edges).unwrap().graph);
    }
    let mut rng = rng_from_seed(seed);
    let seq: Vec<VertexId> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    Ok(Graph::from_edges(n, prufer_decode(n, &seq)).unwrap().graph)
}

/// Decodes a Prüfer sequence of length `n - 2` into the `n - 1` tree edges.
pub fn prufer_decode(n: usize, seq: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    debug_assert_eq!(seq.len() + 2, n);
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<VertexId>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(a) = leaves.pop().unwrap();
    let Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    edges
}

/// Generator mini-grammar used on the command line:
/// `gnp:N:P:SEED`, `tree:N:SEED`, `starheavy:C:L:B:SEED` (B is 0/1).
#[derive(Clone, Debug, PartialEq)]
pub enum GenSpec {
    Gnp { n: usize, p: f64, seed: u64 },
    Tree { n: usize, seed: u64 },
    StarHeavy { centers: usize, legs: usize, bridge: bool, seed: u64 },
}

impl GenSpec {
    pub fn generate(&self) -> Result<Graph, ParamError> {
        match *self {
            GenSpec::Gnp { n, p, seed } => gen_gnp(n, p, seed),
            GenSpec::Tree { n, seed } => gen_random_tree(n, seed),
            GenSpec::StarHeavy {
                centers,
                legs,
                bridge,
                seed,
            } => gen_star_heavy(centers, legs, bridge, seed),
        }
    }
}

impl FromStr for GenSpec {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParamError::GeneratorSpec(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        fn num<T: FromStr>(t: &str, bad: impl Fn() -> ParamError) -> Result<T, ParamError> {
            t.parse().map_err(|_| bad())
        }
        match parts.as_slice() {
            ["gnp", n, p, seed] => Ok(GenSpec::Gnp {
                n: num(n, bad)?,
                p: num(p, bad)?,
                seed: num(seed, bad)?,
            }),
            ["tree", n, seed] => Ok(GenSpec::Tree {
                n: num(n, bad)?,
                seed: num(seed, bad)?,
            }),
            ["starheavy", c, l, b, seed] => Ok(GenSpec::StarHeavy {
                centers: num(c, bad)?,
                legs: num(l, bad)?,
                bridge: match *b {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(bad()),
                },
                seed: num(seed, bad)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Gnp { n, p, seed } => write!(f, "gnp:{n}:{p}:{seed}"),
            GenSpec::Tree { n, seed } => write!(f, "tree:{n}:{seed}"),
            GenSpec::StarHeavy {
                centers,
                legs,
                bridge,
                seed,
            } => write!(f, "starheavy:{centers}:{legs}:{}:{seed}", u8::from(*bridge)),
        }
    }
}
