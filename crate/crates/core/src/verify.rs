//! Token-based ratio argument checked on concrete instances.
//!
//! Given a graph, a local-search fixed point `S` and a reference partition
//! `Q` (normally an optimum), every vertex receives a token amount computed
//! from the stars of `Q` and the criticality of the vertex in `S`. The
//! checker then asserts the per-vertex floors, the per-star receipts, the
//! pairing of special stars with their associates, and the resulting
//! inequalities between `|S|` and `|Q|`. All arithmetic is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{ContractViolation, ParamError};
use crate::graph::{Graph, VertexId};
use crate::init::MIN_K;
use crate::partition::{count_1stars, validate, StarPartition};
use crate::search::audit_local_optimality;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(n: usize) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

fn ser_rat<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn ser_rat_opt<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

fn ser_rat_vec<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// `α(k) = (2k − 3) / (2k² − 4k + 1)`.
pub fn alpha_of(k: usize) -> Result<Rational, ParamError> {
    if k < MIN_K {
        return Err(ParamError::KTooSmall { k, min: MIN_K });
    }
    let k = k as i64;
    Ok(rat(2 * k - 3, 2 * k * k - 4 * k + 1))
}

/// Every constant of the argument for one `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub k: usize,
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rational,
    /// `(1 − α)/(k − 1)`: floor for critical vertices and satellites of `Q`.
    #[serde(serialize_with = "ser_rat")]
    pub satellite_floor: Rational,
    /// `1 − (k − 1)α`: floor for every vertex.
    #[serde(serialize_with = "ser_rat")]
    pub vertex_floor: Rational,
    /// `5(1 − α)/(2(k − 1))`: floor for a star of order at least 4.
    #[serde(serialize_with = "ser_rat")]
    pub big_star_floor: Rational,
    /// `α + (1 − α)/(k − 1)`: floor for a regular 2- or 3-star, and the
    /// average per non-1-star.
    #[serde(serialize_with = "ser_rat")]
    pub regular_floor: Rational,
    /// `2α + 2(1 − α)/(k − 1)`: floor for a special star with its associate.
    #[serde(serialize_with = "ser_rat")]
    pub pair_floor: Rational,
    /// `(2k² − 4k + 1)/(4k − 7)`.
    #[serde(serialize_with = "ser_rat")]
    pub ratio_bound: Rational,
}

impl Constants {
    pub fn new(k: usize) -> Result<Self, ParamError> {
        let alpha = alpha_of(k)?;
        let one = Rational::one();
        let km1 = int(k - 1);
        let satellite_floor = (&one - &alpha) / &km1;
        let vertex_floor = &one - &km1 * &alpha;
        let big_star_floor = int(5) * (&one - &alpha) / (int(2) * &km1);
        let regular_floor = &alpha + &satellite_floor;
        let pair_floor = int(2) * &regular_floor;
        let ki = k as i64;
        let ratio_bound = rat(2 * ki * ki - 4 * ki + 1, 4 * ki - 7);
        Ok(Constants {
            k,
            alpha,
            satellite_floor,
            vertex_floor,
            big_star_floor,
            regular_floor,
            pair_floor,
            ratio_bound,
        })
    }

    /// `1 − (k − 1)α = (1 − α)/(2(k − 1))`.
    pub fn half_satellite_identity(&self) -> bool {
        &self.vertex_floor * int(2) == self.satellite_floor
    }

    /// `1 − (k − 1)α < (1 − α)/(k − 1) < 1/k < α < 3(1 − α)/(2(k − 1))`.
    pub fn strict_chain(&self) -> bool {
        let inv_k = rat(1, self.k as i64);
        let upper = int(3) * (Rational::one() - &self.alpha) / int(2 * (self.k - 1));
        self.vertex_floor < self.satellite_floor
            && self.satellite_floor < inv_k
            && inv_k < self.alpha
            && self.alpha < upper
    }

    /// `1/k < α < 1/(k − 1)`.
    pub fn alpha_in_range(&self) -> bool {
        rat(1, self.k as i64) < self.alpha && self.alpha < rat(1, self.k as i64 - 1)
    }

    /// `k/2 − (k − 2)/(8k − 14)`, the second closed form of the ratio bound.
    pub fn ratio_bound_alt(&self) -> Rational {
        let k = self.k as i64;
        rat(k, 2) - rat(k - 2, 8 * k - 14)
    }

    /// `α + (1 − α)/(k − 1) = (4k − 7)/(2k² − 4k + 1)`.
    pub fn regular_floor_closed_form(&self) -> bool {
        self.regular_floor.recip() == self.ratio_bound
    }
}

/// Tokens per vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TokenAssignment {
    pub k: usize,
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rational,
    #[serde(serialize_with = "ser_rat_vec")]
    pub tokens: Vec<Rational>,
}

impl TokenAssignment {
    pub fn total(&self) -> Rational {
        self.tokens.iter().fold(Rational::zero(), |a, t| a + t)
    }

    pub fn received<I: IntoIterator<Item = VertexId>>(&self, vertices: I) -> Rational {
        vertices
            .into_iter()
            .fold(Rational::zero(), |a, v| a + &self.tokens[v])
    }
}

/// Center and star of every vertex in the reference partition.
struct RefView<'a> {
    q: &'a StarPartition,
}

impl RefView<'_> {
    fn center(&self, v: VertexId) -> VertexId {
        self.q.star_of(v).center
    }

    /// Center of `Q`, 1-star vertices included.
    fn is_center(&self, v: VertexId) -> bool {
        self.center(v) == v
    }

    fn is_satellite(&self, v: VertexId) -> bool {
        !self.is_center(v)
    }

    /// `{x, y}` is an edge of a star of `Q`.
    fn edge(&self, x: VertexId, y: VertexId) -> bool {
        x != y && self.q.owner(x) == self.q.owner(y) && {
            let c = self.center(x);
            c == x || c == y
        }
    }

    /// Endpoints of the `Q`-edges at `v`.
    fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let s = self.q.star_of(v);
        if s.center == v {
            s.satellites.clone()
        } else {
            vec![s.center]
        }
    }
}

fn check_partition(p: &StarPartition, g: &Graph, k: usize, name: &str) -> Result<(), ContractViolation> {
    let report = validate(p, g);
    if !report.is_ok() {
        return Err(ContractViolation::InvalidPartition(format!(
            "{name}: {:?}",
            report.violations
        )));
    }
    if let Some(s) = p.stars().iter().find(|s| s.order() > k) {
        return Err(ContractViolation::InvalidPartition(format!(
            "{name}: star centered at {} has order {} > k = {k}",
            s.center,
            s.order()
        )));
    }
    Ok(())
}

/// Tokens from the stars of `q`; criticality is taken from `s`.
///
/// A 1-star vertex of `q` gets `α`. For a `j`-star of `q` with center `c`:
/// if `c` is critical, `c` gets `α` and each satellite `(1 − α)/(j − 1)`;
/// else if some satellite is critical, each satellite gets `α` and `c` gets
/// `1 − (j − 1)α`; otherwise every vertex gets `1/j`.
pub fn assign_tokens(
    g: &Graph,
    s: &StarPartition,
    q: &StarPartition,
    k: usize,
) -> Result<TokenAssignment, ContractViolation> {
    check_partition(s, g, k, "S")?;
    check_partition(q, g, k, "Q")?;
    let alpha = alpha_of(k).map_err(|e| ContractViolation::InvalidPartition(e.to_string()))?;
    let one = Rational::one();
    let mut tokens = vec![Rational::zero(); g.n()];
    for star in q.stars() {
        let j = star.order();
        if j == 1 {
            tokens[star.center] = alpha.clone();
        } else if s.is_critical(star.center) {
            tokens[star.center] = alpha.clone();
            let share = (&one - &alpha) / int(j - 1);
            for &v in &star.satellites {
                tokens[v] = share.clone();
            }
        } else if star.satellites.iter().any(|&v| s.is_critical(v)) {
            tokens[star.center] = &one - int(j - 1) * &alpha;
            for &v in &star.satellites {
                tokens[v] = alpha.clone();
            }
        } else {
            for v in star.vertices() {
                tokens[v] = rat(1, j as i64);
            }
        }
    }
    Ok(TokenAssignment { k, alpha, tokens })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexFloorViolation {
    pub vertex: VertexId,
    #[serde(serialize_with = "ser_rat")]
    pub token: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub floor: Rational,
}

/// Every vertex holds at least `1 − (k − 1)α`; critical vertices and
/// satellites of `q` hold at least `(1 − α)/(k − 1)`.
pub fn check_vertex_floors(
    a: &TokenAssignment,
    s: &StarPartition,
    q: &StarPartition,
) -> Result<Vec<VertexFloorViolation>, ParamError> {
    let c = Constants::new(a.k)?;
    let view = RefView { q };
    let mut out = Vec::new();
    for (v, t) in a.tokens.iter().enumerate() {
        let floor = if s.is_critical(v) || view.is_satellite(v) {
            &c.satellite_floor
        } else {
            &c.vertex_floor
        };
        if t < floor || !t.is_positive_strict() {
            out.push(VertexFloorViolation {
                vertex: v,
                token: t.clone(),
                floor: floor.clone(),
            });
        }
    }
    Ok(out)
}

trait StrictlyPositive {
    fn is_positive_strict(&self) -> bool;
}

impl StrictlyPositive for Rational {
    fn is_positive_strict(&self) -> bool {
        *self > Rational::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpecialCondition {
    /// 3-star: center a satellite of `Q`, both satellites centers of `Q`,
    /// and two `Q`-edges into a 2-star of `S`.
    C1C2,
    /// 2-star (k = 4 only): both vertices `Q`-satellites of the center of a
    /// 3-star of `S`.
    C3,
    /// 2-star: both vertices `Q`-satellites, their `Q`-centers forming a
    /// 2-star of `S`.
    C4,
}

impl fmt::Display for SpecialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecialCondition::C1C2 => "C1C2",
            SpecialCondition::C3 => "C3",
            SpecialCondition::C4 => "C4",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum StarLabel {
    /// Not a 2- or 3-star.
    Exempt,
    Regular,
    Special {
        condition: SpecialCondition,
        /// Chosen associate: the smallest candidate index.
        associate: usize,
        candidates: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialClassification {
    /// Indexed like `S.stars()`.
    pub labels: Vec<StarLabel>,
    /// Stars that are a candidate associate of two or more special stars.
    pub shared_associates: Vec<(usize, Vec<usize>)>,
    /// Candidate associates that are special themselves.
    pub special_associates: Vec<usize>,
}

impl SpecialClassification {
    pub fn special_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| matches!(l, StarLabel::Special { .. }))
            .count()
    }

    /// The chosen associations, special star first.
    pub fn associations(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.labels.iter().enumerate().filter_map(|(i, l)| match l {
            StarLabel::Special { associate, .. } => Some((i, *associate)),
            _ => None,
        })
    }

    /// No star is a candidate associate of two special stars and no
    /// associate is special, so the chosen map is injective.
    pub fn is_injective(&self) -> bool {
        self.shared_associates.is_empty() && self.special_associates.is_empty()
    }
}

/// Labels every 2- and 3-star of `s` as special or regular relative to `q`.
pub fn classify_special(s: &StarPartition, q: &StarPartition, k: usize) -> SpecialClassification {
    let view = RefView { q };
    let mut labels = Vec::with_capacity(s.len());
    for (i, star) in s.stars().iter().enumerate() {
        let label = match star.order() {
            3 => special_three(s, &view, i),
            2 => special_two(s, &view, i, k),
            _ => None,
        };
        labels.push(match label {
            Some((condition, candidates)) => StarLabel::Special {
                condition,
                associate: candidates[0],
                candidates,
            },
            None if star.is_tiny() => StarLabel::Regular,
            None => StarLabel::Exempt,
        });
    }
    let mut by_associate: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if let StarLabel::Special { candidates, .. } = l {
            for &t in candidates {
                by_associate.entry(t).or_default().push(i);
            }
        }
    }
    let special_associates = by_associate
        .keys()
        .copied()
        .filter(|&t| matches!(labels[t], StarLabel::Special { .. }))
        .collect();
    let shared_associates = by_associate
        .into_iter()
        .filter(|(_, specials)| specials.len() > 1)
        .collect();
    SpecialClassification {
        labels,
        shared_associates,
        special_associates,
    }
}

fn special_three(s: &StarPartition, q: &RefView, i: usize) -> Option<(SpecialCondition, Vec<usize>)> {
    let star = s.star(i);
    if !q.is_satellite(star.center) || !star.satellites.iter().all(|&v| q.is_center(v)) {
        return None;
    }
    let mut candidates = Vec::new();
    for v in star.vertices() {
        for w in q.neighbors(v) {
            let t = s.owner(w).expect("valid partition");
            if t == i || s.star(t).order() != 2 || candidates.contains(&t) {
                continue;
            }
            let (a, b) = (s.star(t).center, s.star(t).satellites[0]);
            let joined = |w1: VertexId, w2: VertexId| {
                star.vertices().any(|vi| {
                    q.edge(vi, w1) && star.vertices().any(|vj| vj != vi && q.edge(vj, w2))
                })
            };
            if joined(a, b) || joined(b, a) {
                candidates.push(t);
            }
        }
    }
    candidates.sort_unstable();
    (!candidates.is_empty()).then_some((SpecialCondition::C1C2, candidates))
}

fn special_two(
    s: &StarPartition,
    q: &RefView,
    i: usize,
    k: usize,
) -> Option<(SpecialCondition, Vec<usize>)> {
    let star = s.star(i);
    let (x, y) = (star.center, star.satellites[0]);
    if !q.is_satellite(x) || !q.is_satellite(y) {
        return None;
    }
    let (cx, cy) = (q.center(x), q.center(y));
    let (tx, ty) = (s.owner(cx)?, s.owner(cy)?);
    if cx == cy {
        let host = s.star(tx);
        (k == 4 && host.order() == 3 && host.center == cx)
            .then(|| (SpecialCondition::C3, vec![tx]))
    } else {
        (tx == ty && tx != i && s.star(tx).order() == 2).then(|| (SpecialCondition::C4, vec![tx]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiptClass {
    BigStar,
    SpecialPair,
    RegularTiny,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceiptViolation {
    pub class: ReceiptClass,
    /// Star indices; two for a special pair.
    pub stars: Vec<usize>,
    #[serde(serialize_with = "ser_rat")]
    pub received: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub floor: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReceiptReport {
    pub big_stars: usize,
    pub special_pairs: usize,
    pub regular_tiny: usize,
    pub violations: Vec<ReceiptViolation>,
}

impl ReceiptReport {
    pub fn passed(&self, class: ReceiptClass) -> bool {
        self.violations.iter().all(|v| v.class != class)
    }
}

/// Per-star token receipts: stars of order at least 4, special stars
/// together with their associate, and the remaining 2- and 3-stars.
pub fn check_star_receipts(
    a: &TokenAssignment,
    cls: &SpecialClassification,
    s: &StarPartition,
) -> Result<ReceiptReport, ParamError> {
    let c = Constants::new(a.k)?;
    let mut report = ReceiptReport::default();
    let mut paired = vec![false; s.len()];
    for (sp, asc) in cls.associations() {
        paired[sp] = true;
        paired[asc] = true;
    }
    let check = |report: &mut ReceiptReport, class, stars: Vec<usize>, floor: &Rational| {
        let received = stars
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + a.received(s.star(i).vertices()));
        if &received < floor {
            report.violations.push(ReceiptViolation {
                class,
                stars,
                received,
                floor: floor.clone(),
            });
        }
    };
    for (i, star) in s.stars().iter().enumerate() {
        if star.order() >= 4 {
            report.big_stars += 1;
            check(&mut report, ReceiptClass::BigStar, vec![i], &c.big_star_floor);
        } else if star.is_tiny() && !paired[i] {
            report.regular_tiny += 1;
            check(&mut report, ReceiptClass::RegularTiny, vec![i], &c.regular_floor);
        }
    }
    for (sp, asc) in cls.associations() {
        report.special_pairs += 1;
        check(&mut report, ReceiptClass::SpecialPair, vec![sp, asc], &c.pair_floor);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub s_stars: usize,
    pub s_one_stars: usize,
    pub q_stars: usize,
    pub q_one_stars: usize,
    /// `|S| / |Q|`, absent when `Q` is empty.
    #[serde(serialize_with = "ser_rat_opt")]
    pub realized_ratio: Option<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub bound: Rational,
    /// `|S₁| <= |Q₁|`.
    pub one_stars_ok: bool,
    /// `(α + (1 − α)/(k − 1))(|S| − |S₁|)`.
    #[serde(serialize_with = "ser_rat")]
    pub token_lhs: Rational,
    /// `|Q| + (α − 1)|Q₁|`.
    #[serde(serialize_with = "ser_rat")]
    pub token_rhs: Rational,
    pub token_inequality_ok: bool,
    /// `|S| <= bound · |Q|`.
    pub ratio_ok: bool,
}

pub fn check_ratio(s: &StarPartition, q: &StarPartition, k: usize) -> Result<RatioReport, ParamError> {
    let c = Constants::new(k)?;
    let (s_stars, s_one) = (s.len(), count_1stars(s));
    let (q_stars, q_one) = (q.len(), count_1stars(q));
    let token_lhs = &c.regular_floor * int(s_stars - s_one);
    let token_rhs = int(q_stars) + (&c.alpha - Rational::one()) * int(q_one);
    Ok(RatioReport {
        s_stars,
        s_one_stars: s_one,
        q_stars,
        q_one_stars: q_one,
        realized_ratio: (q_stars > 0).then(|| int(s_stars) / int(q_stars)),
        one_stars_ok: s_one <= q_one,
        token_inequality_ok: token_lhs <= token_rhs,
        ratio_ok: int(s_stars) <= &c.ratio_bound * int(q_stars),
        bound: c.ratio_bound,
        token_lhs,
        token_rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyStatus {
    Pass,
    Violation,
    /// `S` admits an operation, so the checks do not apply.
    NotFixedPoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub format_version: u32,
    pub status: VerifyStatus,
    pub k: usize,
    pub constants: Constants,
    pub checks: Vec<CheckOutcome>,
    #[serde(serialize_with = "ser_rat_opt")]
    pub token_total: Option<Rational>,
    pub vertex_floor_violations: Vec<VertexFloorViolation>,
    pub classification: Option<SpecialClassification>,
    pub receipts: Option<ReceiptReport>,
    pub ratio: Option<RatioReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == VerifyStatus::Pass
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }
}

/// Version tag of the serialized [`VerifyReport`].
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Check names, in report order.
pub const CHECK_NAMES: [&str; 9] = [
    "token_conservation",
    "vertex_floors",
    "associate_injectivity",
    "big_star_receipts",
    "special_pair_receipts",
    "regular_tiny_receipts",
    "one_star_count",
    "token_inequality",
    "ratio_bound",
];

/// Runs every check on `(g, s, q)`. Inputs that are not valid `k⁻`-star
/// partitions of `g` are rejected; a valid `s` that is not a fixed point
/// yields [`VerifyStatus::NotFixedPoint`] without running the checks.
pub fn verify(
    g: &Graph,
    s: &StarPartition,
    q: &StarPartition,
    k: usize,
) -> Result<VerifyReport, crate::Error> {
    let constants = Constants::new(k)?;
    check_partition(s, g, k, "S")?;
    check_partition(q, g, k, "Q")?;
    let mut report = VerifyReport {
        format_version: REPORT_FORMAT_VERSION,
        status: VerifyStatus::NotFixedPoint,
        k,
        constants,
        checks: Vec::new(),
        token_total: None,
        vertex_floor_violations: Vec::new(),
        classification: None,
        receipts: None,
        ratio: None,
    };
    if !audit_local_optimality(s, g) {
        return Ok(report);
    }
    let a = assign_tokens(g, s, q, k)?;
    let total = a.total();
    let expected = int(q.len()) + (&a.alpha - Rational::one()) * int(count_1stars(q));
    let floors = check_vertex_floors(&a, s, q)?;
    let cls = classify_special(s, q, k);
    let receipts = check_star_receipts(&a, &cls, s)?;
    let ratio = check_ratio(s, q, k)?;
    let outcomes = [
        total == expected,
        floors.is_empty(),
        cls.is_injective(),
        receipts.passed(ReceiptClass::BigStar),
        receipts.passed(ReceiptClass::SpecialPair),
        receipts.passed(ReceiptClass::RegularTiny),
        ratio.one_stars_ok,
        ratio.token_inequality_ok,
        ratio.ratio_ok,
    ];
    report.checks = CHECK_NAMES
        .iter()
        .zip(outcomes)
        .map(|(&name, passed)| CheckOutcome { name, passed })
        .collect();
    report.status = if outcomes.iter().all(|&b| b) {
        VerifyStatus::Pass
    } else {
        VerifyStatus::Violation
    };
    report.token_total = Some(total);
    report.vertex_floor_violations = floors;
    report.classification = Some(cls);
    report.receipts = Some(receipts);
    report.ratio = Some(ratio);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Star;
    use crate::search::approx1;

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_of(4).unwrap(), rat(5, 17));
        assert_eq!(alpha_of(5).unwrap(), rat(7, 31));
        assert!(matches!(alpha_of(3), Err(ParamError::KTooSmall { .. })));
    }

    #[test]
    fn k4_constants() {
        let c = Constants::new(4).unwrap();
        assert_eq!(c.satellite_floor, rat(4, 17));
        assert_eq!(c.vertex_floor, rat(2, 17));
        assert_eq!(c.regular_floor, rat(9, 17));
        assert_eq!(c.pair_floor, rat(18, 17));
        assert_eq!(c.big_star_floor, rat(10, 17));
        assert_eq!(c.ratio_bound, rat(17, 9));
        assert!(c.half_satellite_identity());
    }

    #[test]
    fn k5_bound_closed_forms() {
        let c = Constants::new(5).unwrap();
        assert_eq!(c.ratio_bound, rat(31, 13));
        assert_eq!(c.ratio_bound_alt(), rat(5, 2) - rat(3, 26));
    }

    #[test]
    fn identities_over_range() {
        for k in 4..=64 {
            let c = Constants::new(k).unwrap();
            assert!(c.half_satellite_identity(), "k={k}");
            assert!(c.strict_chain(), "k={k}");
            assert!(c.alpha_in_range(), "k={k}");
            assert_eq!(c.ratio_bound, c.ratio_bound_alt(), "k={k}");
            assert!(c.regular_floor_closed_form(), "k={k}");
            assert!(c.regular_floor <= c.big_star_floor, "k={k}");
        }
    }

    #[test]
    fn token_cases() {
        // Q: 3-star 0-{1,2} with 0 critical in S (S has 3-star 0-{1,2} too),
        // 1-star 3, 4-star 4-{5,6,7} with no critical vertex
        let g = Graph::from_edges(8, [(0, 1), (0, 2), (4, 5), (4, 6), (4, 7)])
            .unwrap()
            .graph;
        let s = StarPartition::from_stars(
            8,
            4,
            vec![Star::new(0, vec![1, 2]), Star::singleton(3), Star::new(4, vec![5, 6, 7])],
        );
        let a = assign_tokens(&g, &s, &s, 4).unwrap();
        assert_eq!(a.tokens[0], rat(5, 17));
        assert_eq!(a.tokens[1], rat(6, 17));
        assert_eq!(a.tokens[3], rat(5, 17));
        for v in 4..8 {
            assert_eq!(a.tokens[v], rat(1, 4));
        }
        assert_eq!(a.received([0, 1, 2]), Rational::one());
        assert_eq!(a.total(), int(3) + (rat(5, 17) - Rational::one()));
    }

    #[test]
    fn token_case_noncritical_center() {
        // S: 2-star {1,2}, 4-star 0-{3,4,5}; Q: 3-star 0-{1,3}, rest 1-stars
        let g = Graph::from_edges(6, [(0, 1), (0, 3), (1, 2), (0, 4), (0, 5)])
            .unwrap()
            .graph;
        let s = StarPartition::from_stars(6, 4, vec![Star::pair(1, 2), Star::new(0, vec![3, 4, 5])]);
        let q = StarPartition::from_stars(
            6,
            4,
            vec![Star::new(0, vec![1, 3]), Star::singleton(2), Star::singleton(4), Star::singleton(5)],
        );
        let a = assign_tokens(&g, &s, &q, 4).unwrap();
        assert_eq!(a.tokens[1], rat(5, 17));
        assert_eq!(a.tokens[3], rat(5, 17));
        assert_eq!(a.tokens[0], rat(7, 17));
        // Q must cover every vertex with edges of g
        let partial = StarPartition::from_stars(6, 4, vec![Star::new(0, vec![1, 3])]);
        assert!(assign_tokens(&g, &s, &partial, 4).is_err());
    }

    /// Left configuration: S = 3-star 0-{1,2}, 2-stars 3-4 and 5-6.
    /// Q = 3-star 1-{5,4}, 2-stars 2-6 and 3-0.
    fn three_star_config() -> (Graph, StarPartition, StarPartition) {
        let g = Graph::from_edges(
            7,
            [(0, 1), (0, 2), (3, 4), (5, 6), (1, 4), (0, 3), (1, 5), (2, 6)],
        )
        .unwrap()
        .graph;
        let s = StarPartition::from_stars(
            7,
            4,
            vec![Star::new(0, vec![1, 2]), Star::pair(3, 4), Star::pair(5, 6)],
        );
        let q = StarPartition::from_stars(
            7,
            4,
            vec![Star::new(1, vec![4, 5]), Star::pair(2, 6), Star::new(3, vec![0])],
        );
        (g, s, q)
    }

    #[test]
    fn special_three_star() {
        let (g, s, q) = three_star_config();
        assert!(audit_local_optimality(&s, &g));
        let cls = classify_special(&s, &q, 4);
        assert_eq!(
            cls.labels[0],
            StarLabel::Special {
                condition: SpecialCondition::C1C2,
                associate: 1,
                candidates: vec![1, 2]
            }
        );
        assert_eq!(cls.labels[1], StarLabel::Regular);
        assert_eq!(cls.labels[2], StarLabel::Regular);
        assert!(cls.is_injective());
        let report = verify(&g, &s, &q, 4).unwrap();
        assert!(report.passed(), "{report:#?}");
        assert_eq!(report.receipts.as_ref().unwrap().special_pairs, 1);
    }

    /// Right configuration: S = 2-stars 0-1 and 2-3; Q-edges {0,2}, {1,3}.
    fn two_star_config(q_centers: [VertexId; 2]) -> (Graph, StarPartition, StarPartition) {
        let g = Graph::from_edges(4, [(0, 1), (2, 3), (0, 2), (1, 3)]).unwrap().graph;
        let s = StarPartition::from_stars(4, 4, vec![Star::pair(0, 1), Star::pair(2, 3)]);
        let mk = |c: VertexId, o: VertexId| Star::new(c, vec![o]);
        let q = StarPartition::from_stars(
            4,
            4,
            vec![
                if q_centers[0] == 0 { mk(0, 2) } else { mk(2, 0) },
                if q_centers[1] == 1 { mk(1, 3) } else { mk(3, 1) },
            ],
        );
        (g, s, q)
    }

    #[test]
    fn special_two_star_direction_follows_q_centers() {
        let (g, s, q) = two_star_config([2, 3]);
        assert!(audit_local_optimality(&s, &g));
        let cls = classify_special(&s, &q, 4);
        assert!(matches!(
            cls.labels[0],
            StarLabel::Special {
                condition: SpecialCondition::C4,
                associate: 1,
                ..
            }
        ));
        assert_eq!(cls.labels[1], StarLabel::Regular);

        let (_, s, q) = two_star_config([0, 1]);
        let cls = classify_special(&s, &q, 4);
        assert_eq!(cls.labels[0], StarLabel::Regular);
        assert!(matches!(cls.labels[1], StarLabel::Special { associate: 0, .. }));

        // mixed centers: neither star has two Q-satellites
        let (_, s, q) = two_star_config([0, 3]);
        assert_eq!(classify_special(&s, &q, 4).special_count(), 0);
        assert!(verify(&g, &s, &q, 4).unwrap().passed());
    }

    #[test]
    fn c3_requires_k4() {
        // S: 2-star {0,1}, 3-star 2-{3,4}; Q: 3-star 2-{0,1}, 2-star 3-4
        let g = Graph::from_edges(5, [(0, 1), (2, 3), (2, 4), (2, 0), (2, 1), (3, 4)])
            .unwrap()
            .graph;
        let s = StarPartition::from_stars(5, 5, vec![Star::pair(0, 1), Star::new(2, vec![3, 4])]);
        let q = StarPartition::from_stars(5, 5, vec![Star::new(2, vec![0, 1]), Star::pair(3, 4)]);
        assert!(matches!(
            classify_special(&s, &q, 4).labels[0],
            StarLabel::Special {
                condition: SpecialCondition::C3,
                ..
            }
        ));
        assert_eq!(classify_special(&s, &q, 5).labels[0], StarLabel::Regular);
        // a fixed point for k = 4 only; for k = 5 the two stars merge
        let s4 = StarPartition::from_stars(5, 4, s.stars().to_vec());
        assert!(audit_local_optimality(&s4, &g));
        assert!(!audit_local_optimality(&s, &g));
        assert!(verify(&g, &s4, &q, 4).unwrap().passed());
    }

    #[test]
    fn two_star_of_q_centers_is_regular() {
        let (_, s, q) = two_star_config([0, 1]);
        let cls = classify_special(&s, &q, 4);
        assert_eq!(cls.labels[0], StarLabel::Regular);
    }

    #[test]
    fn ratio_on_k4() {
        let g = Graph::complete(4);
        let (s, _) = approx1(&g, 4).unwrap();
        let r = check_ratio(&s, &s, 4).unwrap();
        assert_eq!(r.realized_ratio, Some(Rational::one()));
        assert_eq!(r.bound, rat(17, 9));
        assert!(r.ratio_ok && r.one_stars_ok && r.token_inequality_ok);
        assert!(verify(&g, &s, &s, 4).unwrap().passed());
    }

    #[test]
    fn refuses_non_fixed_point() {
        // Fig-1-like: Op1 applies
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (4, 5), (4, 3)])
            .unwrap()
            .graph;
        let s = StarPartition::from_stars(6, 4, vec![Star::new(0, vec![1, 2, 3]), Star::pair(4, 5)]);
        let r = verify(&g, &s, &s, 4).unwrap();
        assert_eq!(r.status, VerifyStatus::NotFixedPoint);
        assert!(r.checks.is_empty());
        let bad = StarPartition::from_stars(6, 4, vec![Star::new(0, vec![1, 2, 3])]);
        assert!(verify(&g, &bad, &s, 4).is_err());
    }

    #[test]
    fn report_serializes_rationals_as_strings() {
        let (g, s, q) = three_star_config();
        let json = serde_json::to_value(verify(&g, &s, &q, 4).unwrap()).unwrap();
        assert_eq!(json["constants"]["alpha"], "5/17");
        assert_eq!(json["status"], "pass");
        assert_eq!(json["ratio"]["realized_ratio"], "1");
    }
}
