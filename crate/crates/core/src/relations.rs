//! Stable many-to-one relationships between object types: mining with noise tolerance and
//! conformance checking against a declared relationship set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::model::{ObjectId, ObjectType, TypePair};
use crate::ocel::{CoOccurrence, Ocel};

/// Slack for comparing object fractions against `1 - noise`.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelationError {
    #[error("relationship ({0},{0}) relates a type to itself")]
    SelfRelationship(ObjectType),
}

/// A set of ordered type pairs `(many, one)` with distinct components.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RelationshipSet(BTreeSet<TypePair>);

impl RelationshipSet {
    pub fn new(pairs: impl IntoIterator<Item = TypePair>) -> Result<Self, RelationError> {
        let mut set = BTreeSet::new();
        for p in pairs {
            if p.many == p.one {
                return Err(RelationError::SelfRelationship(p.many));
            }
            set.insert(p);
        }
        Ok(RelationshipSet(set))
    }

    pub fn pairs(&self) -> &BTreeSet<TypePair> {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Types occurring on either side of some pair.
    pub fn types(&self) -> BTreeSet<ObjectType> {
        self.0.iter().flat_map(|p| [p.many.clone(), p.one.clone()]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// A many-side object co-occurring with zero or several one-side objects.
    Many,
    /// A one-side object co-occurring with no many-side object.
    One,
}

/// An object breaking a relationship, with the co-occurrence set that shows it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub pair: TypePair,
    pub side: Side,
    pub object: ObjectId,
    /// `lo(object, other type)`.
    pub lo: BTreeSet<ObjectId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let other = match self.side {
            Side::Many => &self.pair.one,
            Side::One => &self.pair.many,
        };
        let lo: Vec<&str> = self.lo.iter().map(|o| o.id()).collect();
        write!(f, "{} {}: lo({}, {}) = {{{}}}", self.pair, self.side_name(), self.object, other, lo.join(","))
    }
}

impl Violation {
    fn side_name(&self) -> &'static str {
        match self.side {
            Side::Many => "many-side",
            Side::One => "one-side",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub pair: TypePair,
    /// Many-side objects co-occurring with exactly one one-side object.
    pub many_ok: usize,
    pub many_total: usize,
    /// One-side objects co-occurring with at least one many-side object.
    pub one_ok: usize,
    pub one_total: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    /// Number of stable ordered pairs.
    pub m2o_count: usize,
    /// Unordered type pairs stable in both orientations.
    pub one_to_one_pairs: usize,
    /// Stable pairs whose reverse is not stable.
    pub one_way: usize,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.one_to_one_pairs > 0 {
            write!(f, "{} ({}+2*{})", self.m2o_count, self.one_way, self.one_to_one_pairs)
        } else {
            write!(f, "{} ({}+0)", self.m2o_count, self.one_way)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiningReport {
    pub noise: f64,
    pub pairs: Vec<PairStats>,
    pub stable: Vec<TypePair>,
    pub summary: Summary,
    pub note: String,
}

impl MiningReport {
    pub fn stable_set(&self) -> RelationshipSet {
        RelationshipSet(self.stable.iter().cloned().collect())
    }

    /// Aligned plain-text table with one row per ordered pair, followed by the summary.
    pub fn render_table(&self) -> String {
        let header = ["many", "one", "many ok", "one ok", "stable"];
        let rows: Vec<[String; 5]> = self
            .pairs
            .iter()
            .map(|p| {
                [
                    p.pair.many.to_string(),
                    p.pair.one.to_string(),
                    format!("{}/{}", p.many_ok, p.many_total),
                    format!("{}/{}", p.one_ok, p.one_total),
                    if p.stable { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[&str]| {
            let padded: Vec<String> =
                cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&header);
        for row in &rows {
            line(&row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        let _ = writeln!(out, "#m2o(noise={}) = {}", self.noise, self.summary);
        out
    }
}

/// Many-side and one-side counts for one pair.
fn pair_stats(log: &Ocel, co: &CoOccurrence, pair: &TypePair, noise: f64) -> PairStats {
    let many: Vec<&ObjectId> = log.objects_of_type(&pair.many).collect();
    let one: Vec<&ObjectId> = log.objects_of_type(&pair.one).collect();
    let many_ok = many.iter().filter(|o| co.lo_len(o, &pair.one) == 1).count();
    let one_ok = one.iter().filter(|o| co.lo_len(o, &pair.many) > 0).count();
    let within = |ok: usize, total: usize| total == 0 || ok as f64 >= (1.0 - noise) * total as f64 - EPS;
    PairStats {
        pair: pair.clone(),
        many_ok,
        many_total: many.len(),
        one_ok,
        one_total: one.len(),
        stable: within(many_ok, many.len()) && within(one_ok, one.len()),
    }
}

/// Mines all ordered type pairs of the log that are stable many-to-one relationships, allowing a
/// fraction `noise` of offending objects on each side.
pub fn discover_stable_m2o(log: &Ocel, noise: f64) -> MiningReport {
    let co = CoOccurrence::new(log);
    let mut pairs = Vec::new();
    for many in log.types() {
        for one in log.types() {
            if many != one {
                pairs.push(pair_stats(log, &co, &TypePair::new(many.clone(), one.clone()), noise));
            }
        }
    }
    let stable: Vec<TypePair> = pairs.iter().filter(|p| p.stable).map(|p| p.pair.clone()).collect();
    let set: BTreeSet<&TypePair> = stable.iter().collect();
    let symmetric = stable.iter().filter(|p| set.contains(&p.reversed())).count();
    let summary = Summary {
        m2o_count: stable.len(),
        one_to_one_pairs: symmetric / 2,
        one_way: stable.len() - symmetric,
    };
    MiningReport {
        noise,
        pairs,
        stable,
        summary,
        note: "noise is the tolerated fraction of offending objects per side; counts under noise are \
               approximate with respect to other tools"
            .to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conformance {
    pub conforms: bool,
    pub violations: Vec<Violation>,
}

/// Checks every pair of `relations` against the log without noise, listing each offending object.
pub fn check_conformance(log: &Ocel, relations: &RelationshipSet) -> Conformance {
    let co = CoOccurrence::new(log);
    let mut violations = Vec::new();
    for pair in relations.pairs() {
        violations.extend(pair_violations(log, &co, pair));
    }
    Conformance { conforms: violations.is_empty(), violations }
}

pub(crate) fn pair_violations(log: &Ocel, co: &CoOccurrence, pair: &TypePair) -> Vec<Violation> {
    let mut out = Vec::new();
    for o in log.objects_of_type(&pair.many) {
        let lo = co.lo(o, &pair.one);
        if lo.len() != 1 {
            out.push(Violation { pair: pair.clone(), side: Side::Many, object: o.clone(), lo });
        }
    }
    for o in log.objects_of_type(&pair.one) {
        let lo = co.lo(o, &pair.many);
        if lo.is_empty() {
            out.push(Violation { pair: pair.clone(), side: Side::One, object: o.clone(), lo });
        }
    }
    out
}

/// For a conforming pair, the many-side objects attached to each one-side object.
pub(crate) fn link_partners(log: &Ocel, co: &CoOccurrence, pair: &TypePair) -> BTreeMap<ObjectId, Vec<ObjectId>> {
    log.objects_of_type(&pair.one)
        .map(|o| (o.clone(), co.lo(o, &pair.many).into_iter().collect()))
        .collect()
}
