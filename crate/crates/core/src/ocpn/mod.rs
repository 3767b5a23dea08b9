//! Object-centric Petri nets: structure, well-formedness, firing and log replay.

mod replay;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

pub use replay::{replay, replay_with_budget};

use crate::model::{ObjectId, ObjectType, PlaceId, TransitionId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcpnPlace {
    pub id: PlaceId,
    pub ty: ObjectType,
    pub play: bool,
    pub stop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcpnTransition {
    pub id: TransitionId,
    /// `None` marks a silent transition.
    pub label: Option<String>,
}

impl OcpnTransition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// A flow as written in a model file: node ids on both ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlowSpec {
    pub from: String,
    pub to: String,
    pub variable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Place to transition.
    In,
    /// Transition to place.
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Flow {
    pub place: PlaceId,
    pub transition: TransitionId,
    pub direction: Direction,
    pub variable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("duplicate node id {0}")]
    DuplicateId(String),
    #[error("place {place} has undeclared type {ty}")]
    UndeclaredType { place: String, ty: String },
    #[error("flow {index} references unknown node {node}")]
    UnknownNode { index: usize, node: String },
    #[error("flow {index} connects {from} and {to}, which are not a place and a transition")]
    NotBipartite { index: usize, from: String, to: String },
    #[error("duplicate flow from {from} to {to}")]
    DuplicateFlow { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OcpnError {
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("invalid binding for {transition}: {reason}")]
    InvalidBinding { transition: String, reason: String },
    #[error("transition {0} is not enabled")]
    NotEnabled(String),
    #[error("object {object} has type {ty} without play/stop place")]
    UnknownType { object: String, ty: String },
}

/// A violated structural assumption, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// The transition has both variable and non-variable flows for `ty`.
    WellFormedness { transition: TransitionId, ty: ObjectType },
    PlayPlaceCardinality { ty: ObjectType, count: usize },
    StopPlaceCardinality { ty: ObjectType, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WellFormedness { transition, ty } => {
                write!(f, "well-formedness({transition}): mixed variability for {ty}")
            }
            Violation::PlayPlaceCardinality { ty, count } => {
                write!(f, "play-place-cardinality({ty}): {count} play places")
            }
            Violation::StopPlaceCardinality { ty, count } => {
                write!(f, "stop-place-cardinality({ty}): {count} stop places")
            }
        }
    }
}

/// Non-fatal findings: a type's component is not a workflow net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Warning {
    pub ty: ObjectType,
    pub message: String,
}

/// Per transition and type: the pre/post places of that type and whether flows are variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TypeSlot {
    pub ty: ObjectType,
    pub pre: Vec<usize>,
    pub post: Vec<usize>,
    pub variable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ocpn {
    types: Vec<ObjectType>,
    places: Vec<OcpnPlace>,
    transitions: Vec<OcpnTransition>,
    flows: Vec<Flow>,
    place_index: BTreeMap<PlaceId, usize>,
    transition_index: BTreeMap<TransitionId, usize>,
    slots: Vec<Vec<TypeSlot>>,
}

/// Binding of an OCPN transition: object sets per type.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OcpnBinding(pub BTreeMap<ObjectType, BTreeSet<ObjectId>>);

impl OcpnBinding {
    /// Partition of a set of objects by type.
    pub fn from_objects<'a>(objects: impl IntoIterator<Item = &'a ObjectId>) -> Self {
        let mut map: BTreeMap<ObjectType, BTreeSet<ObjectId>> = BTreeMap::new();
        for o in objects {
            map.entry(o.object_type().clone()).or_default().insert(o.clone());
        }
        OcpnBinding(map)
    }

    pub fn codomain(&self) -> BTreeSet<ObjectId> {
        self.0.values().flatten().cloned().collect()
    }
}

/// Set-valued marking: which objects sit on which places.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OcpnMarking(pub BTreeSet<(PlaceId, ObjectId)>);

impl OcpnMarking {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, place: &PlaceId, object: &ObjectId) -> bool {
        self.0.contains(&(place.clone(), object.clone()))
    }

    pub fn objects_on(&self, place: &PlaceId) -> BTreeSet<ObjectId> {
        self.0.iter().filter(|(p, _)| p == place).map(|(_, o)| o.clone()).collect()
    }
}

pub type TokenSet = BTreeSet<(PlaceId, ObjectId)>;

impl Ocpn {
    pub fn new(
        types: Vec<ObjectType>,
        places: Vec<OcpnPlace>,
        transitions: Vec<OcpnTransition>,
        flows: Vec<FlowSpec>,
    ) -> Result<Self, StructureError> {
        let declared: BTreeSet<&ObjectType> = types.iter().collect();
        let mut place_index = BTreeMap::new();
        let mut transition_index = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, p) in places.iter().enumerate() {
            if !seen.insert(p.id.as_str().to_string()) {
                return Err(StructureError::DuplicateId(p.id.to_string()));
            }
            if !declared.contains(&p.ty) {
                return Err(StructureError::UndeclaredType {
                    place: p.id.to_string(),
                    ty: p.ty.to_string(),
                });
            }
            place_index.insert(p.id.clone(), i);
        }
        for (i, t) in transitions.iter().enumerate() {
            if !seen.insert(t.id.as_str().to_string()) {
                return Err(StructureError::DuplicateId(t.id.to_string()));
            }
            transition_index.insert(t.id.clone(), i);
        }
        let mut resolved = Vec::with_capacity(flows.len());
        let mut pairs = BTreeSet::new();
        for (index, f) in flows.iter().enumerate() {
            for node in [&f.from, &f.to] {
                if !seen.contains(node.as_str()) {
                    return Err(StructureError::UnknownNode { index, node: node.clone() });
                }
            }
            let (from_p, to_t) = (PlaceId::new(&f.from), TransitionId::new(&f.to));
            let (from_t, to_p) = (TransitionId::new(&f.from), PlaceId::new(&f.to));
            let flow = if place_index.contains_key(&from_p) && transition_index.contains_key(&to_t) {
                Flow { place: from_p, transition: to_t, direction: Direction::In, variable: f.variable }
            } else if transition_index.contains_key(&from_t) && place_index.contains_key(&to_p) {
                Flow { place: to_p, transition: from_t, direction: Direction::Out, variable: f.variable }
            } else {
                return Err(StructureError::NotBipartite {
                    index,
                    from: f.from.clone(),
                    to: f.to.clone(),
                });
            };
            if !pairs.insert((f.from.clone(), f.to.clone())) {
                return Err(StructureError::DuplicateFlow { from: f.from.clone(), to: f.to.clone() });
            }
            resolved.push(flow);
        }
        let mut net = Ocpn {
            types,
            places,
            transitions,
            flows: resolved,
            place_index,
            transition_index,
            slots: Vec::new(),
        };
        net.slots = net.compute_slots();
        Ok(net)
    }

    fn compute_slots(&self) -> Vec<Vec<TypeSlot>> {
        let mut slots: Vec<BTreeMap<ObjectType, TypeSlot>> = vec![BTreeMap::new(); self.transitions.len()];
        for f in &self.flows {
            let t = self.transition_index[&f.transition];
            let p = self.place_index[&f.place];
            let ty = self.places[p].ty.clone();
            let slot = slots[t].entry(ty.clone()).or_insert(TypeSlot {
                ty,
                pre: Vec::new(),
                post: Vec::new(),
                variable: false,
            });
            slot.variable |= f.variable;
            match f.direction {
                Direction::In => slot.pre.push(p),
                Direction::Out => slot.post.push(p),
            }
        }
        slots.into_iter().map(|m| m.into_values().collect()).collect()
    }

    pub fn types(&self) -> &[ObjectType] {
        &self.types
    }

    pub fn places(&self) -> &[OcpnPlace] {
        &self.places
    }

    pub fn transitions(&self) -> &[OcpnTransition] {
        &self.transitions
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn place(&self, id: &PlaceId) -> Option<&OcpnPlace> {
        self.place_index.get(id).map(|&i| &self.places[i])
    }

    pub fn transition(&self, id: &TransitionId) -> Option<&OcpnTransition> {
        self.transition_index.get(id).map(|&i| &self.transitions[i])
    }

    pub(crate) fn transition_idx(&self, id: &TransitionId) -> Option<usize> {
        self.transition_index.get(id).copied()
    }

    pub fn pre_places(&self, t: &TransitionId) -> Vec<&OcpnPlace> {
        self.flows
            .iter()
            .filter(|f| &f.transition == t && f.direction == Direction::In)
            .map(|f| &self.places[self.place_index[&f.place]])
            .collect()
    }

    pub fn post_places(&self, t: &TransitionId) -> Vec<&OcpnPlace> {
        self.flows
            .iter()
            .filter(|f| &f.transition == t && f.direction == Direction::Out)
            .map(|f| &self.places[self.place_index[&f.place]])
            .collect()
    }

    /// Types of all places connected to `t`.
    pub fn tpl(&self, t: &TransitionId) -> BTreeSet<ObjectType> {
        self.tpl_filtered(t, |_| true)
    }

    /// Types connected to `t` through a variable flow.
    pub fn tpl_var(&self, t: &TransitionId) -> BTreeSet<ObjectType> {
        self.tpl_filtered(t, |f| f.variable)
    }

    /// Types connected to `t` through a non-variable flow.
    pub fn tpl_nv(&self, t: &TransitionId) -> BTreeSet<ObjectType> {
        self.tpl_filtered(t, |f| !f.variable)
    }

    fn tpl_filtered(&self, t: &TransitionId, keep: impl Fn(&Flow) -> bool) -> BTreeSet<ObjectType> {
        self.flows
            .iter()
            .filter(|f| &f.transition == t && keep(f))
            .map(|f| self.places[self.place_index[&f.place]].ty.clone())
            .collect()
    }

    pub fn play_place(&self, ty: &ObjectType) -> Option<&OcpnPlace> {
        self.places.iter().find(|p| p.play && &p.ty == ty)
    }

    pub fn stop_place(&self, ty: &ObjectType) -> Option<&OcpnPlace> {
        self.places.iter().find(|p| p.stop && &p.ty == ty)
    }

    /// Structural violations; empty iff the net is well-formed and every type has exactly one
    /// play and one stop place.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for t in &self.transitions {
            let var = self.tpl_var(&t.id);
            for ty in var.intersection(&self.tpl_nv(&t.id)) {
                out.push(Violation::WellFormedness { transition: t.id.clone(), ty: ty.clone() });
            }
        }
        for ty in &self.types {
            let play = self.places.iter().filter(|p| p.play && &p.ty == ty).count();
            let stop = self.places.iter().filter(|p| p.stop && &p.ty == ty).count();
            if play != 1 {
                out.push(Violation::PlayPlaceCardinality { ty: ty.clone(), count: play });
            }
            if stop != 1 {
                out.push(Violation::StopPlaceCardinality { ty: ty.clone(), count: stop });
            }
        }
        out
    }

    /// Checks each type's component (its places plus adjacent transitions) for the workflow-net
    /// shape: the play place is the only source, the stop place the only sink, and every node
    /// lies on a path between them.
    pub fn workflow_warnings(&self) -> Vec<Warning> {
        type Node<'a> = (bool, &'a str);
        fn reach<'a>(start: Node<'a>, edges: &BTreeMap<Node<'a>, Vec<Node<'a>>>) -> BTreeSet<Node<'a>> {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for &m in edges.get(&n).into_iter().flatten() {
                    if seen.insert(m) {
                        queue.push_back(m);
                    }
                }
            }
            seen
        }
        let mut out = Vec::new();
        for ty in &self.types {
            let (Some(play), Some(stop)) = (self.play_place(ty), self.stop_place(ty)) else {
                continue;
            };
            // Nodes: places as ("p", id), transitions as ("t", id).
            let mut succ: BTreeMap<(bool, &str), Vec<(bool, &str)>> = BTreeMap::new();
            let mut pred: BTreeMap<(bool, &str), Vec<(bool, &str)>> = BTreeMap::new();
            let mut nodes = BTreeSet::new();
            for f in &self.flows {
                let p = &self.places[self.place_index[&f.place]];
                if &p.ty != ty {
                    continue;
                }
                let pn = (true, p.id.as_str());
                let tn = (false, f.transition.as_str());
                nodes.insert(pn);
                nodes.insert(tn);
                let (a, b) = match f.direction {
                    Direction::In => (pn, tn),
                    Direction::Out => (tn, pn),
                };
                succ.entry(a).or_default().push(b);
                pred.entry(b).or_default().push(a);
            }
            for p in self.places.iter().filter(|p| &p.ty == ty) {
                nodes.insert((true, p.id.as_str()));
            }
            let from_play = reach((true, play.id.as_str()), &succ);
            let to_stop = reach((true, stop.id.as_str()), &pred);
            for n in &nodes {
                if !from_play.contains(n) || !to_stop.contains(n) {
                    out.push(Warning {
                        ty: ty.clone(),
                        message: format!(
                            "{} {} is not on a path from {} to {}",
                            if n.0 { "place" } else { "transition" },
                            n.1,
                            play.id,
                            stop.id
                        ),
                    });
                }
            }
            if pred.contains_key(&(true, play.id.as_str())) {
                out.push(Warning { ty: ty.clone(), message: format!("play place {} has inflow", play.id) });
            }
            if succ.contains_key(&(true, stop.id.as_str())) {
                out.push(Warning { ty: ty.clone(), message: format!("stop place {} has outflow", stop.id) });
            }
        }
        out
    }

    /// Checks that `b` is a binding execution for `t`: its domain is `tpl(t)`, non-variable types
    /// bind exactly one object, variable types a non-empty set, all of the right type.
    pub fn check_binding(&self, t: &TransitionId, b: &OcpnBinding) -> Result<(), OcpnError> {
        let ti = self.transition_idx(t).ok_or_else(|| OcpnError::UnknownTransition(t.to_string()))?;
        let invalid = |reason: String| OcpnError::InvalidBinding { transition: t.to_string(), reason };
        let slots = &self.slots[ti];
        if slots.len() != b.0.len() || slots.iter().any(|s| !b.0.contains_key(&s.ty)) {
            let dom: Vec<_> = b.0.keys().map(|k| k.to_string()).collect();
            return Err(invalid(format!("domain {dom:?} differs from tpl")));
        }
        for slot in slots {
            let objs = &b.0[&slot.ty];
            if objs.is_empty() {
                return Err(invalid(format!("empty object set for {}", slot.ty)));
            }
            if !slot.variable && objs.len() != 1 {
                return Err(invalid(format!("{} objects for non-variable type {}", objs.len(), slot.ty)));
            }
            if let Some(o) = objs.iter().find(|o| o.object_type() != &slot.ty) {
                return Err(invalid(format!("object {o} is not of type {}", slot.ty)));
            }
        }
        Ok(())
    }

    /// Tokens consumed and produced by the binding execution `(t, b)`.
    pub fn cons_prod(&self, t: &TransitionId, b: &OcpnBinding) -> Result<(TokenSet, TokenSet), OcpnError> {
        self.check_binding(t, b)?;
        let ti = self.transition_index[t];
        Ok(self.cons_prod_unchecked(ti, b))
    }

    pub(crate) fn cons_prod_unchecked(&self, ti: usize, b: &OcpnBinding) -> (TokenSet, TokenSet) {
        let mut cons = TokenSet::new();
        let mut prod = TokenSet::new();
        for slot in &self.slots[ti] {
            let objs = &b.0[&slot.ty];
            for &p in &slot.pre {
                cons.extend(objs.iter().map(|o| (self.places[p].id.clone(), o.clone())));
            }
            for &p in &slot.post {
                prod.extend(objs.iter().map(|o| (self.places[p].id.clone(), o.clone())));
            }
        }
        (cons, prod)
    }

    /// Fires `(t, b)` in `m`, returning `m − cons + prod`.
    pub fn fire(&self, m: &OcpnMarking, t: &TransitionId, b: &OcpnBinding) -> Result<OcpnMarking, OcpnError> {
        let (cons, prod) = self.cons_prod(t, b)?;
        if !cons.is_subset(&m.0) {
            return Err(OcpnError::NotEnabled(t.to_string()));
        }
        Ok(apply(m, &cons, &prod))
    }

    pub fn initial_marking<'a>(
        &self,
        objects: impl IntoIterator<Item = &'a ObjectId>,
    ) -> Result<OcpnMarking, OcpnError> {
        self.boundary_marking(objects, |p| p.play)
    }

    pub fn final_marking<'a>(
        &self,
        objects: impl IntoIterator<Item = &'a ObjectId>,
    ) -> Result<OcpnMarking, OcpnError> {
        self.boundary_marking(objects, |p| p.stop)
    }

    fn boundary_marking<'a>(
        &self,
        objects: impl IntoIterator<Item = &'a ObjectId>,
        pick: impl Fn(&OcpnPlace) -> bool,
    ) -> Result<OcpnMarking, OcpnError> {
        let mut m = OcpnMarking::default();
        for o in objects {
            let place = self
                .places
                .iter()
                .find(|p| pick(p) && &p.ty == o.object_type())
                .ok_or_else(|| OcpnError::UnknownType {
                    object: o.id().to_string(),
                    ty: o.object_type().to_string(),
                })?;
            m.0.insert((place.id.clone(), o.clone()));
        }
        Ok(m)
    }
}

impl Ocpn {
    /// Every binding execution of transition `ti` enabled in `m`. Candidates for a type are the
    /// objects present on all of its pre-places; output-only types draw from `universe`.
    pub(crate) fn enabled_bindings(
        &self,
        ti: usize,
        m: &OcpnMarking,
        universe: &BTreeMap<ObjectType, Vec<ObjectId>>,
    ) -> Vec<OcpnBinding> {
        let mut partial = vec![OcpnBinding::default()];
        for slot in &self.slots[ti] {
            let candidates: Vec<ObjectId> = if slot.pre.is_empty() {
                universe.get(&slot.ty).cloned().unwrap_or_default()
            } else {
                let mut sets = slot.pre.iter().map(|&p| m.objects_on(&self.places[p].id));
                let first = sets.next().unwrap_or_default();
                sets.fold(first, |acc, s| acc.intersection(&s).cloned().collect()).into_iter().collect()
            };
            let options: Vec<Vec<ObjectId>> = if slot.variable {
                crate::replay::nonempty_subsets(&candidates)
            } else {
                candidates.into_iter().map(|o| vec![o]).collect()
            };
            if options.is_empty() {
                return Vec::new();
            }
            partial = partial
                .into_iter()
                .flat_map(|b| {
                    options.iter().map(move |opt| {
                        let mut b = b.clone();
                        b.0.insert(slot.ty.clone(), opt.iter().cloned().collect());
                        b
                    })
                })
                .collect();
        }
        partial
    }
}

pub(crate) fn apply(m: &OcpnMarking, cons: &TokenSet, prod: &TokenSet) -> OcpnMarking {
    let mut next: TokenSet = m.0.difference(cons).cloned().collect();
    next.extend(prod.iter().cloned());
    OcpnMarking(next)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::io::read_ocpn_json;

    pub(crate) fn bike_net() -> Ocpn {
        read_ocpn_json(include_bytes!("../../fixtures/bike_ocpn.json")).unwrap()
    }

    fn obj(id: &str) -> ObjectId {
        let ty = match &id[..1] {
            "w" => "Wheel",
            "f" => "Frame",
            _ => "Handlebar",
        };
        ObjectId::new(id, ObjectType::new(ty))
    }

    fn binding(ids: &[&str]) -> OcpnBinding {
        let objs: Vec<_> = ids.iter().map(|i| obj(i)).collect();
        OcpnBinding::from_objects(&objs)
    }

    fn tokens(pairs: &[(&str, &str)]) -> TokenSet {
        pairs.iter().map(|(p, o)| (PlaceId::new(p), obj(o))).collect()
    }

    fn flow(from: &str, to: &str, variable: bool) -> FlowSpec {
        FlowSpec { from: from.into(), to: to.into(), variable }
    }

    fn place(id: &str, ty: &str, play: bool, stop: bool) -> OcpnPlace {
        OcpnPlace { id: id.into(), ty: ty.into(), play, stop }
    }

    #[test]
    fn bike_net_is_valid() {
        let net = bike_net();
        assert_eq!(net.places().len(), 9);
        assert_eq!(net.transitions().len(), 4);
        assert!(net.validate().is_empty());
        // The frame loop leaves the stop place, which a strict workflow net forbids.
        let warnings = net.workflow_warnings();
        assert_eq!(warnings.len(), 1, "{warnings:?}");
        assert_eq!(warnings[0].ty, ObjectType::new("Frame"));
        assert!(warnings[0].message.contains("frame_stop has outflow"));
    }

    #[test]
    fn mixed_variability_is_reported() {
        let net = Ocpn::new(
            vec!["Wheel".into()],
            vec![place("a", "Wheel", true, false), place("b", "Wheel", false, true)],
            vec![OcpnTransition { id: "t".into(), label: Some("t".into()) }],
            vec![flow("a", "t", true), flow("t", "b", false)],
        )
        .unwrap();
        assert_eq!(
            net.validate(),
            vec![Violation::WellFormedness { transition: "t".into(), ty: "Wheel".into() }]
        );
    }

    #[test]
    fn two_play_places_are_reported() {
        let net = Ocpn::new(
            vec!["Frame".into()],
            vec![
                place("a", "Frame", true, false),
                place("b", "Frame", true, false),
                place("c", "Frame", false, true),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(net.validate(), vec![Violation::PlayPlaceCardinality { ty: "Frame".into(), count: 2 }]);
    }

    #[test]
    fn structure_errors() {
        let r = Ocpn::new(
            vec!["A".into()],
            vec![place("a", "A", true, true), place("b", "A", false, false)],
            vec![],
            vec![flow("a", "b", false)],
        );
        assert!(matches!(r, Err(StructureError::NotBipartite { .. })));
        let r = Ocpn::new(vec!["A".into()], vec![place("a", "A", true, true)], vec![], vec![flow("a", "zz", false)]);
        assert!(matches!(r, Err(StructureError::UnknownNode { .. })));
        let r = Ocpn::new(vec![], vec![place("a", "A", true, true)], vec![], vec![]);
        assert!(matches!(r, Err(StructureError::UndeclaredType { .. })));
    }

    #[test]
    fn cons_prod_of_collect() {
        let net = bike_net();
        let (cons, prod) = net.cons_prod(&"collect".into(), &binding(&["w1", "w2", "f1", "h1"])).unwrap();
        assert_eq!(
            cons,
            tokens(&[("wheel_play", "w1"), ("wheel_play", "w2"), ("frame_play", "f1"), ("handlebar_play", "h1")])
        );
        assert_eq!(
            prod,
            tokens(&[("wheel_mid", "w1"), ("wheel_mid", "w2"), ("frame_mid", "f1"), ("handlebar_mid", "h1")])
        );
    }

    #[test]
    fn cons_of_assemble_w() {
        let net = bike_net();
        let (cons, _) = net.cons_prod(&"assemble_w".into(), &binding(&["w1", "w2", "f1"])).unwrap();
        assert_eq!(cons, tokens(&[("wheel_mid", "w1"), ("wheel_mid", "w2"), ("frame_mid", "f1")]));
    }

    #[test]
    fn single_type_binding_consumes_one_token_per_pre_place() {
        let net = bike_net();
        let (cons, _) = net.cons_prod(&"s1".into(), &binding(&["f1"])).unwrap();
        assert_eq!(cons.len(), net.pre_places(&"s1".into()).len());
    }

    #[test]
    fn invalid_bindings() {
        let net = bike_net();
        // Two frames on a non-variable arc.
        assert!(net.cons_prod(&"assemble_w".into(), &binding(&["w1", "f1", "f2"])).is_err());
        // Missing the frame.
        assert!(net.cons_prod(&"assemble_w".into(), &binding(&["w1"])).is_err());
        // Handlebar outside tpl.
        assert!(net.cons_prod(&"assemble_w".into(), &binding(&["w1", "f1", "h1"])).is_err());
    }

    #[test]
    fn fire_collect_from_initial_marking() {
        let net = bike_net();
        let all: Vec<_> = ["f1", "f2", "h1", "h2", "w1", "w2", "w3", "w4"].iter().map(|i| obj(i)).collect();
        let m0 = net.initial_marking(&all).unwrap();
        assert_eq!(m0.objects_on(&"wheel_play".into()).len(), 4);
        assert_eq!(m0.objects_on(&"frame_play".into()).len(), 2);
        assert_eq!(m0.objects_on(&"handlebar_play".into()).len(), 2);

        let m1 = net.fire(&m0, &"collect".into(), &binding(&["w1", "w2", "f1", "h1"])).unwrap();
        let expected = tokens(&[
            ("wheel_mid", "w1"),
            ("wheel_mid", "w2"),
            ("frame_mid", "f1"),
            ("handlebar_mid", "h1"),
            ("wheel_play", "w3"),
            ("wheel_play", "w4"),
            ("frame_play", "f2"),
            ("handlebar_play", "h2"),
        ]);
        assert_eq!(m1.0, expected);
        assert_eq!(m1.len(), m0.len() - 4 + 4);
    }

    #[test]
    fn fire_not_enabled() {
        let net = bike_net();
        let m0 = net.initial_marking(&[obj("w1"), obj("f1")]).unwrap();
        assert_eq!(
            net.fire(&m0, &"assemble_w".into(), &binding(&["w1", "f1"])),
            Err(OcpnError::NotEnabled("assemble_w".into()))
        );
    }

    #[test]
    fn silent_loop_moves_frame_back() {
        let net = bike_net();
        let m = OcpnMarking(tokens(&[("frame_stop", "f1")]));
        let next = net.fire(&m, &"s1".into(), &binding(&["f1"])).unwrap();
        assert_eq!(next.0, tokens(&[("frame_mid", "f1")]));
    }

    #[test]
    fn boundary_markings() {
        let net = bike_net();
        assert!(net.initial_marking(&[]).unwrap().is_empty());
        let seat = ObjectId::new("s1", "Seat".into());
        assert!(matches!(net.final_marking(&[seat]), Err(OcpnError::UnknownType { .. })));
        let m = net.final_marking(&[obj("w1")]).unwrap();
        assert!(m.contains(&"wheel_stop".into(), &obj("w1")));
    }
}
