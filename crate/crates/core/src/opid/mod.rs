//! Object-centric Petri nets with identifiers: colored places, inscribed arcs and role tags.

mod executor;
mod semantics;
mod structured;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use executor::BoundedExecutor;
pub use semantics::{enabled, extend_binding, fire, BindingError, FireError, OpidBinding, OpidMarking, Value};
pub use structured::{created_links, replay_structured, replay_t1, replay_tr, StructuredError};

use crate::model::{Color, Inscription, ObjectType, PlaceId, TransitionId, TypePair, VarKind, Variable};

/// What a place was generated for. Hand-built nets use `Core` throughout.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlaceRole {
    #[default]
    Core,
    Play,
    Stop,
    /// A place that is both the play and the stop place of its type.
    PlayStop,
    LinkPlace {
        pair: TypePair,
    },
    BeforeLink {
        #[serde(rename = "type")]
        ty: ObjectType,
        pair: TypePair,
    },
    AfterLink {
        pair: TypePair,
        #[serde(rename = "type")]
        ty: ObjectType,
    },
}

impl PlaceRole {
    pub fn is_play(&self) -> bool {
        matches!(self, PlaceRole::Play | PlaceRole::PlayStop)
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, PlaceRole::Stop | PlaceRole::PlayStop)
    }
}

/// What a transition was generated for.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransitionRole {
    #[default]
    Core,
    Emit {
        #[serde(rename = "type")]
        ty: ObjectType,
    },
    Consume {
        #[serde(rename = "type")]
        ty: ObjectType,
    },
    PreEmit {
        #[serde(rename = "type")]
        ty: ObjectType,
    },
    Link {
        pair: TypePair,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpidPlace {
    pub id: PlaceId,
    pub color: Color,
    pub role: PlaceRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpidTransition {
    pub id: TransitionId,
    pub label: Option<String>,
    pub role: TransitionRole,
}

impl OpidTransition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcDirection {
    /// Place to transition.
    In,
    /// Transition to place.
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpidArc {
    pub place: PlaceId,
    pub transition: TransitionId,
    pub direction: ArcDirection,
    pub inscription: Inscription,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpidStructureError {
    #[error("duplicate node id {0}")]
    DuplicateId(String),
    #[error("place {place} uses undeclared type {ty}")]
    UndeclaredType { place: String, ty: String },
    #[error("arc {index} references unknown place {place}")]
    UnknownPlace { index: usize, place: String },
    #[error("arc {index} references unknown transition {transition}")]
    UnknownTransition { index: usize, transition: String },
    #[error("duplicate arc between {place} and {transition}")]
    DuplicateArc { place: String, transition: String },
    #[error("arc {index}: inscription color {inscription} differs from place color {place}")]
    ColorMismatch { index: usize, inscription: String, place: String },
}

/// A violated OPID well-formedness condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OpidViolation {
    /// A fresh variable is read by an input arc.
    FreshInput { transition: TransitionId, variable: String },
    /// An output variable is neither read nor fresh.
    UnboundOutput { transition: TransitionId, variable: String },
    /// Two variables share a name but differ in kind or type.
    VariableClash { name: String },
}

impl fmt::Display for OpidViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpidViolation::FreshInput { transition, variable } => {
                write!(f, "fresh-input({transition}): {variable} on an input arc")
            }
            OpidViolation::UnboundOutput { transition, variable } => {
                write!(f, "unbound-output({transition}): {variable} is not an input variable")
            }
            OpidViolation::VariableClash { name } => write!(f, "variable-clash: {name}"),
        }
    }
}

/// Shape of a net as told by its role tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    /// No generated elements.
    Plain,
    /// Emitting and consuming transitions only.
    T1,
    /// Additionally carries link machinery.
    Tr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opid {
    types: Vec<ObjectType>,
    places: Vec<OpidPlace>,
    transitions: Vec<OpidTransition>,
    arcs: Vec<OpidArc>,
    place_index: BTreeMap<PlaceId, usize>,
    transition_index: BTreeMap<TransitionId, usize>,
    /// Per transition: `(place index, inscription)` of its input and output arcs.
    pre: Vec<Vec<(usize, Inscription)>>,
    post: Vec<Vec<(usize, Inscription)>>,
}

impl Opid {
    pub fn new(
        types: Vec<ObjectType>,
        places: Vec<OpidPlace>,
        transitions: Vec<OpidTransition>,
        mut arcs: Vec<OpidArc>,
    ) -> Result<Self, OpidStructureError> {
        let declared: BTreeSet<&ObjectType> = types.iter().collect();
        let mut seen = BTreeSet::new();
        let mut place_index = BTreeMap::new();
        for (i, p) in places.iter().enumerate() {
            if !seen.insert(p.id.as_str().to_string()) {
                return Err(OpidStructureError::DuplicateId(p.id.to_string()));
            }
            if let Some(ty) = p.color.components().iter().find(|t| !declared.contains(t)) {
                return Err(OpidStructureError::UndeclaredType { place: p.id.to_string(), ty: ty.to_string() });
            }
            place_index.insert(p.id.clone(), i);
        }
        let mut transition_index = BTreeMap::new();
        for (i, t) in transitions.iter().enumerate() {
            if !seen.insert(t.id.as_str().to_string()) {
                return Err(OpidStructureError::DuplicateId(t.id.to_string()));
            }
            transition_index.insert(t.id.clone(), i);
        }
        let mut pre = vec![Vec::new(); transitions.len()];
        let mut post = vec![Vec::new(); transitions.len()];
        let mut pairs = BTreeSet::new();
        for (index, a) in arcs.iter().enumerate() {
            let p = *place_index
                .get(&a.place)
                .ok_or_else(|| OpidStructureError::UnknownPlace { index, place: a.place.to_string() })?;
            let t = *transition_index.get(&a.transition).ok_or_else(|| {
                OpidStructureError::UnknownTransition { index, transition: a.transition.to_string() }
            })?;
            if a.inscription.color() != places[p].color {
                return Err(OpidStructureError::ColorMismatch {
                    index,
                    inscription: a.inscription.color().to_string(),
                    place: places[p].color.to_string(),
                });
            }
            if !pairs.insert((a.place.clone(), a.transition.clone(), a.direction)) {
                return Err(OpidStructureError::DuplicateArc {
                    place: a.place.to_string(),
                    transition: a.transition.to_string(),
                });
            }
            match a.direction {
                ArcDirection::In => pre[t].push((p, a.inscription.clone())),
                ArcDirection::Out => post[t].push((p, a.inscription.clone())),
            }
        }
        for list in pre.iter_mut().chain(post.iter_mut()) {
            list.sort_by_key(|(p, _)| *p);
        }
        arcs.sort_by(|a, b| {
            (transition_index[&a.transition], a.direction, place_index[&a.place]).cmp(&(
                transition_index[&b.transition],
                b.direction,
                place_index[&b.place],
            ))
        });
        Ok(Opid { types, places, transitions, arcs, place_index, transition_index, pre, post })
    }

    pub fn types(&self) -> &[ObjectType] {
        &self.types
    }

    pub fn places(&self) -> &[OpidPlace] {
        &self.places
    }

    pub fn transitions(&self) -> &[OpidTransition] {
        &self.transitions
    }

    /// Arcs ordered by transition, direction and place.
    pub fn arcs(&self) -> &[OpidArc] {
        &self.arcs
    }

    pub fn place(&self, id: &PlaceId) -> Option<&OpidPlace> {
        self.place_index.get(id).map(|&i| &self.places[i])
    }

    pub fn transition(&self, id: &TransitionId) -> Option<&OpidTransition> {
        self.transition_index.get(id).map(|&i| &self.transitions[i])
    }

    pub(crate) fn place_idx(&self, id: &PlaceId) -> Option<usize> {
        self.place_index.get(id).copied()
    }

    pub(crate) fn transition_idx(&self, id: &TransitionId) -> Option<usize> {
        self.transition_index.get(id).copied()
    }

    pub(crate) fn pre_of(&self, t: usize) -> &[(usize, Inscription)] {
        &self.pre[t]
    }

    pub(crate) fn post_of(&self, t: usize) -> &[(usize, Inscription)] {
        &self.post[t]
    }

    /// Input inscription `F_in(p, t)`.
    pub fn f_in(&self, p: &PlaceId, t: &TransitionId) -> Option<&Inscription> {
        let (pi, ti) = (self.place_idx(p)?, self.transition_idx(t)?);
        self.pre[ti].iter().find(|(q, _)| *q == pi).map(|(_, i)| i)
    }

    /// Output inscription `F_out(t, p)`.
    pub fn f_out(&self, t: &TransitionId, p: &PlaceId) -> Option<&Inscription> {
        let (pi, ti) = (self.place_idx(p)?, self.transition_idx(t)?);
        self.post[ti].iter().find(|(q, _)| *q == pi).map(|(_, i)| i)
    }

    pub fn invars(&self, t: &TransitionId) -> BTreeSet<Variable> {
        self.transition_idx(t).map(|ti| vars_of(&self.pre[ti])).unwrap_or_default()
    }

    pub fn outvars(&self, t: &TransitionId) -> BTreeSet<Variable> {
        self.transition_idx(t).map(|ti| vars_of(&self.post[ti])).unwrap_or_default()
    }

    /// Violations of the variable conditions on every transition.
    pub fn validate(&self) -> Vec<OpidViolation> {
        let mut out = BTreeSet::new();
        let mut names: BTreeMap<&str, &Variable> = BTreeMap::new();
        for a in &self.arcs {
            for v in a.inscription.vars() {
                match names.get(v.name()) {
                    Some(prev) if *prev != v => {
                        out.insert(OpidViolation::VariableClash { name: v.name().to_string() });
                    }
                    _ => {
                        names.insert(v.name(), v);
                    }
                }
            }
        }
        for (ti, t) in self.transitions.iter().enumerate() {
            let inv = vars_of(&self.pre[ti]);
            for v in &inv {
                if v.kind() == VarKind::Fresh {
                    out.insert(OpidViolation::FreshInput { transition: t.id.clone(), variable: v.name().to_string() });
                }
            }
            for v in vars_of(&self.post[ti]) {
                if v.kind() != VarKind::Fresh && !inv.contains(&v) {
                    out.insert(OpidViolation::UnboundOutput {
                        transition: t.id.clone(),
                        variable: v.name().to_string(),
                    });
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn kind(&self) -> NetKind {
        let linked = self.transitions.iter().any(|t| matches!(t.role, TransitionRole::Link { .. } | TransitionRole::PreEmit { .. }))
            || self.places.iter().any(|p| {
                matches!(p.role, PlaceRole::LinkPlace { .. } | PlaceRole::BeforeLink { .. } | PlaceRole::AfterLink { .. })
            });
        if linked {
            NetKind::Tr
        } else if self
            .transitions
            .iter()
            .any(|t| matches!(t.role, TransitionRole::Emit { .. } | TransitionRole::Consume { .. }))
        {
            NetKind::T1
        } else {
            NetKind::Plain
        }
    }

    /// The relationship pairs carried by link transitions.
    pub fn relationships(&self) -> BTreeSet<TypePair> {
        self.transitions
            .iter()
            .filter_map(|t| match &t.role {
                TransitionRole::Link { pair } => Some(pair.clone()),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn transition_with_role(&self, role: &TransitionRole) -> Option<usize> {
        self.transitions.iter().position(|t| &t.role == role)
    }
}

fn vars_of(arcs: &[(usize, Inscription)]) -> BTreeSet<Variable> {
    arcs.iter().flat_map(|(_, i)| i.vars().iter().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> ObjectType {
        ObjectType::new(s)
    }

    fn place(id: &str, color: Color) -> OpidPlace {
        OpidPlace { id: id.into(), color, role: PlaceRole::Core }
    }

    fn trans(id: &str) -> OpidTransition {
        OpidTransition { id: id.into(), label: Some(id.into()), role: TransitionRole::Core }
    }

    fn arc(p: &str, t: &str, direction: ArcDirection, vars: Vec<Variable>) -> OpidArc {
        OpidArc { place: p.into(), transition: t.into(), direction, inscription: Inscription::new(vars).unwrap() }
    }

    #[test]
    fn color_mismatch_is_a_structure_error() {
        let r = Opid::new(
            vec![ty("A"), ty("B")],
            vec![place("p", Color::single(ty("A")))],
            vec![trans("t")],
            vec![arc("p", "t", ArcDirection::In, vec![Variable::normal(&ty("B"))])],
        );
        assert!(matches!(r, Err(OpidStructureError::ColorMismatch { .. })));
    }

    #[test]
    fn variable_conditions() {
        let a = ty("A");
        let net = Opid::new(
            vec![a.clone()],
            vec![place("p", Color::single(a.clone())), place("q", Color::single(a.clone()))],
            vec![trans("t")],
            vec![
                arc("p", "t", ArcDirection::In, vec![Variable::fresh(&a)]),
                arc("q", "t", ArcDirection::Out, vec![Variable::list(&a)]),
            ],
        )
        .unwrap();
        let v = net.validate();
        assert!(v.contains(&OpidViolation::FreshInput { transition: "t".into(), variable: "nu_A".into() }));
        assert!(v.contains(&OpidViolation::UnboundOutput { transition: "t".into(), variable: "X_A".into() }));
    }

    #[test]
    fn plain_net_kind() {
        let a = ty("A");
        let net = Opid::new(
            vec![a.clone()],
            vec![place("p", Color::single(a.clone()))],
            vec![trans("t")],
            vec![arc("p", "t", ArcDirection::In, vec![Variable::normal(&a)])],
        )
        .unwrap();
        assert_eq!(net.kind(), NetKind::Plain);
        assert!(net.validate().is_empty());
        assert_eq!(net.f_in(&"p".into(), &"t".into()).unwrap().to_string(), "<x_A>");
        assert!(net.f_out(&"t".into(), &"p".into()).is_none());
    }
}
