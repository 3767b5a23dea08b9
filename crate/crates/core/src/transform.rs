//! Net-to-net lowerings: OCPN to identifier-based OPID, and injection of link machinery that
//! enforces a set of stable many-to-one relationships.

use std::collections::BTreeSet;

use crate::model::{Color, Inscription, ObjectType, PlaceId, TransitionId, TypePair, Variable};
use crate::ocpn::{self, Direction, Ocpn};
use crate::opid::{
    ArcDirection, NetKind, Opid, OpidArc, OpidPlace, OpidStructureError, OpidTransition, PlaceRole, TransitionRole,
};
use crate::relations::RelationshipSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("net violates structural assumptions: {}", join(.0))]
    InvalidOcpn(Vec<ocpn::Violation>),
    #[error("transition {transition} produces {ty} objects without consuming any")]
    OutputOnlyType { transition: String, ty: String },
    #[error("generated id {0} collides with an existing element")]
    IdCollision(String),
    #[error("net has no emitting and consuming transitions or already carries links")]
    NotT1Tagged,
    #[error("relationship ({0},{0}) relates a type to itself")]
    SelfRelationship(ObjectType),
    #[error("relationship type {0} has no places in the net")]
    UnknownType(ObjectType),
    #[error("transition {transition} has {ty} inflow without outflow or vice versa")]
    Unbalanced { transition: String, ty: String },
    #[error(transparent)]
    Structure(#[from] OpidStructureError),
}

fn join(v: &[ocpn::Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub fn emit_id(ty: &ObjectType) -> String {
    format!("emit__{ty}")
}

pub fn consume_id(ty: &ObjectType) -> String {
    format!("consume__{ty}")
}

pub fn init_id(ty: &ObjectType) -> String {
    format!("init__{ty}")
}

pub fn link_transition_id(pair: &TypePair) -> String {
    format!("link__{}__{}", pair.many, pair.one)
}

pub fn link_place_id(pair: &TypePair) -> String {
    format!("links__{}__{}", pair.many, pair.one)
}

pub fn before_id(ty: &ObjectType, pair: &TypePair) -> String {
    format!("before__{ty}__{}__{}", pair.many, pair.one)
}

pub fn after_id(pair: &TypePair, ty: &ObjectType) -> String {
    format!("after__{}__{}__{ty}", pair.many, pair.one)
}

fn arc(place: &str, transition: &str, direction: ArcDirection, inscription: Inscription) -> OpidArc {
    OpidArc { place: place.into(), transition: transition.into(), direction, inscription }
}

fn single(v: Variable) -> Inscription {
    Inscription::single(v)
}

/// Tracks used ids so generated elements never shadow existing ones.
struct Ids(BTreeSet<String>);

impl Ids {
    fn claim(&mut self, id: String) -> Result<String, TransformError> {
        if self.0.insert(id.clone()) {
            Ok(id)
        } else {
            Err(TransformError::IdCollision(id))
        }
    }
}

/// Maps an OCPN onto an OPID whose places hold single objects, adding one silent emitting and one
/// silent consuming transition per object type.
pub fn t1(net: &Ocpn) -> Result<Opid, TransformError> {
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(TransformError::InvalidOcpn(violations));
    }
    for t in net.transitions() {
        let inputs: BTreeSet<ObjectType> = net.pre_places(&t.id).iter().map(|p| p.ty.clone()).collect();
        if let Some(p) = net.post_places(&t.id).iter().find(|p| !inputs.contains(&p.ty)) {
            return Err(TransformError::OutputOnlyType { transition: t.id.to_string(), ty: p.ty.to_string() });
        }
    }
    let mut ids = Ids(net.places().iter().map(|p| p.id.to_string()).chain(net.transitions().iter().map(|t| t.id.to_string())).collect());

    let places = net
        .places()
        .iter()
        .map(|p| OpidPlace {
            id: p.id.clone(),
            color: Color::single(p.ty.clone()),
            role: match (p.play, p.stop) {
                (true, true) => PlaceRole::PlayStop,
                (true, false) => PlaceRole::Play,
                (false, true) => PlaceRole::Stop,
                (false, false) => PlaceRole::Core,
            },
        })
        .collect();
    let mut transitions: Vec<OpidTransition> = net
        .transitions()
        .iter()
        .map(|t| OpidTransition { id: t.id.clone(), label: t.label.clone(), role: TransitionRole::Core })
        .collect();
    let mut arcs: Vec<OpidArc> = net
        .flows()
        .iter()
        .map(|f| {
            let ty = &net.place(&f.place).expect("resolved flow").ty;
            let var = if f.variable { Variable::list(ty) } else { Variable::normal(ty) };
            let direction = match f.direction {
                Direction::In => ArcDirection::In,
                Direction::Out => ArcDirection::Out,
            };
            OpidArc { place: f.place.clone(), transition: f.transition.clone(), direction, inscription: single(var) }
        })
        .collect();

    let mut consumers = Vec::new();
    for ty in net.types() {
        let play = net.play_place(ty).expect("validated net");
        let stop = net.stop_place(ty).expect("validated net");
        let emit = ids.claim(emit_id(ty))?;
        transitions.push(OpidTransition { id: emit.as_str().into(), label: None, role: TransitionRole::Emit { ty: ty.clone() } });
        arcs.push(arc(play.id.as_str(), &emit, ArcDirection::Out, single(Variable::fresh(ty))));
        let consume = ids.claim(consume_id(ty))?;
        consumers.push(OpidTransition { id: consume.as_str().into(), label: None, role: TransitionRole::Consume { ty: ty.clone() } });
        arcs.push(arc(stop.id.as_str(), &consume, ArcDirection::In, single(Variable::normal(ty))));
    }
    transitions.extend(consumers);
    Ok(Opid::new(net.types().to_vec(), places, transitions, arcs)?)
}

/// Adds link places and the transitions creating links so that every core transition touching
/// both types of a relationship only binds linked objects.
pub fn t_r(net: &Opid, relations: &RelationshipSet) -> Result<Opid, TransformError> {
    if net.kind() != NetKind::T1 {
        return Err(TransformError::NotT1Tagged);
    }
    let has_places: BTreeSet<&ObjectType> = net.places().iter().flat_map(|p| p.color.components()).collect();
    for pair in relations.pairs() {
        if pair.many == pair.one {
            return Err(TransformError::SelfRelationship(pair.many.clone()));
        }
        for ty in [&pair.many, &pair.one] {
            if !has_places.contains(ty) {
                return Err(TransformError::UnknownType(ty.clone()));
            }
        }
    }
    if relations.is_empty() {
        return Ok(net.clone());
    }
    let related = relations.types();
    let single_color = |p: &PlaceId| net.place(p).map(|pl| pl.color.clone());
    for t in net.transitions().iter().filter(|t| t.role == TransitionRole::Core) {
        for ty in &related {
            let color = Color::single(ty.clone());
            let touches = |dir: ArcDirection| {
                net.arcs().iter().any(|a| a.transition == t.id && a.direction == dir && single_color(&a.place).as_ref() == Some(&color))
            };
            if touches(ArcDirection::In) != touches(ArcDirection::Out) {
                return Err(TransformError::Unbalanced { transition: t.id.to_string(), ty: ty.to_string() });
            }
        }
    }

    let mut ids = Ids(net.places().iter().map(|p| p.id.to_string()).chain(net.transitions().iter().map(|t| t.id.to_string())).collect());
    let role_of = |id: &TransitionId| net.transition(id).map(|t| t.role.clone()).unwrap_or_default();
    let mut places = net.places().to_vec();
    let mut transitions = net.transitions().to_vec();
    // Emitting transitions of related types read from the after-link places instead of creating.
    let mut arcs: Vec<OpidArc> = net
        .arcs()
        .iter()
        .map(|a| match role_of(&a.transition) {
            TransitionRole::Emit { ty } if related.contains(&ty) && a.direction == ArcDirection::Out => {
                OpidArc { inscription: single(Variable::normal(&ty)), ..a.clone() }
            }
            _ => a.clone(),
        })
        .collect();

    for ty in &related {
        let id = ids.claim(init_id(ty))?;
        transitions.push(OpidTransition { id: id.as_str().into(), label: None, role: TransitionRole::PreEmit { ty: ty.clone() } });
    }
    for pair in relations.pairs() {
        let (m, o) = (&pair.many, &pair.one);
        let link_place = ids.claim(link_place_id(pair))?;
        places.push(OpidPlace {
            id: link_place.as_str().into(),
            color: Color::pair(m.clone(), o.clone()),
            role: PlaceRole::LinkPlace { pair: pair.clone() },
        });
        let link = ids.claim(link_transition_id(pair))?;
        transitions.push(OpidTransition { id: link.as_str().into(), label: None, role: TransitionRole::Link { pair: pair.clone() } });
        for (ty, var) in [(m, Variable::list(m)), (o, Variable::normal(o))] {
            let before = ids.claim(before_id(ty, pair))?;
            places.push(OpidPlace {
                id: before.as_str().into(),
                color: Color::single(ty.clone()),
                role: PlaceRole::BeforeLink { ty: ty.clone(), pair: pair.clone() },
            });
            let after = ids.claim(after_id(pair, ty))?;
            places.push(OpidPlace {
                id: after.as_str().into(),
                color: Color::single(ty.clone()),
                role: PlaceRole::AfterLink { pair: pair.clone(), ty: ty.clone() },
            });
            arcs.push(arc(&before, &init_id(ty), ArcDirection::Out, single(Variable::fresh(ty))));
            arcs.push(arc(&before, &link, ArcDirection::In, single(var.clone())));
            arcs.push(arc(&after, &link, ArcDirection::Out, single(var)));
            arcs.push(arc(&after, &emit_id(ty), ArcDirection::In, single(Variable::normal(ty))));
        }
        let pair_ins = |many_var: Variable| Inscription::new(vec![many_var, Variable::normal(o)]).expect("one list");
        arcs.push(arc(&link_place, &link, ArcDirection::Out, pair_ins(Variable::list(m))));
        arcs.push(arc(&link_place, &consume_id(m), ArcDirection::In, pair_ins(Variable::normal(m))));

        // Core transitions reading both types read and write the links they rely on.
        for t in net.transitions().iter().filter(|t| t.role == TransitionRole::Core) {
            let inflow = |ty: &ObjectType| {
                let color = Color::single(ty.clone());
                net.arcs().iter().find(|a| {
                    a.transition == t.id && a.direction == ArcDirection::In && single_color(&a.place).as_ref() == Some(&color)
                })
            };
            let (Some(many_in), Some(_)) = (inflow(m), inflow(o)) else { continue };
            let many_var = if many_in.inscription.is_template() { Variable::list(m) } else { Variable::normal(m) };
            let ins = pair_ins(many_var);
            arcs.push(arc(&link_place, t.id.as_str(), ArcDirection::In, ins.clone()));
            arcs.push(arc(&link_place, t.id.as_str(), ArcDirection::Out, ins));
        }
    }
    Ok(Opid::new(net.types().to_vec(), places, transitions, arcs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocpn::tests::bike_net;
    use crate::ocpn::{FlowSpec, OcpnPlace, OcpnTransition};

    fn wf_hf() -> RelationshipSet {
        RelationshipSet::new([TypePair::new("Wheel", "Frame"), TypePair::new("Handlebar", "Frame")]).unwrap()
    }

    #[test]
    fn lowered_bike() {
        let net = t1(&bike_net()).unwrap();
        assert_eq!(net.places().len(), 9);
        assert_eq!(net.transitions().len(), 10);
        assert_eq!(net.kind(), NetKind::T1);
        assert!(net.validate().is_empty());
        let ins = net.f_out(&"collect".into(), &"wheel_mid".into()).unwrap();
        assert_eq!(ins.to_string(), "<X_Wheel>");
        assert_eq!(net.f_out(&"emit__Wheel".into(), &"wheel_play".into()).unwrap().to_string(), "<nu_Wheel>");
        assert_eq!(net.f_in(&"frame_stop".into(), &"consume__Frame".into()).unwrap().to_string(), "<x_Frame>");
        assert!(net.transitions().iter().filter(|t| t.role != TransitionRole::Core).all(|t| t.is_silent()));
    }

    #[test]
    fn t1_single_type_single_transition() {
        let net = Ocpn::new(
            vec!["A".into()],
            vec![
                OcpnPlace { id: "i".into(), ty: "A".into(), play: true, stop: false },
                OcpnPlace { id: "o".into(), ty: "A".into(), play: false, stop: true },
            ],
            vec![OcpnTransition { id: "t".into(), label: Some("t".into()) }],
            vec![
                FlowSpec { from: "i".into(), to: "t".into(), variable: false },
                FlowSpec { from: "t".into(), to: "o".into(), variable: false },
            ],
        )
        .unwrap();
        assert_eq!(t1(&net).unwrap().transitions().len(), 3);
    }

    #[test]
    fn t1_rejects_invalid_and_output_only() {
        let p = |id: &str, play, stop| OcpnPlace { id: id.into(), ty: "A".into(), play, stop };
        let net = Ocpn::new(vec!["A".into()], vec![p("i", true, false)], vec![], vec![]).unwrap();
        assert!(matches!(t1(&net), Err(TransformError::InvalidOcpn(_))));
        let net = Ocpn::new(
            vec!["A".into()],
            vec![p("i", true, false), p("o", false, true)],
            vec![OcpnTransition { id: "t".into(), label: None }],
            vec![FlowSpec { from: "t".into(), to: "o".into(), variable: false }],
        )
        .unwrap();
        assert!(matches!(t1(&net), Err(TransformError::OutputOnlyType { .. })));
    }

    #[test]
    fn linked_bike() {
        let base = t1(&bike_net()).unwrap();
        let net = t_r(&base, &wf_hf()).unwrap();
        assert_eq!(net.kind(), NetKind::Tr);
        assert!(net.validate().is_empty(), "{:?}", net.validate());
        let count = |f: &dyn Fn(&PlaceRole) -> bool| net.places().iter().filter(|p| f(&p.role)).count();
        assert_eq!(count(&|r| matches!(r, PlaceRole::LinkPlace { .. })), 2);
        assert_eq!(count(&|r| matches!(r, PlaceRole::BeforeLink { .. })), 4);
        assert_eq!(count(&|r| matches!(r, PlaceRole::AfterLink { .. })), 4);
        let tcount = |f: &dyn Fn(&TransitionRole) -> bool| net.transitions().iter().filter(|t| f(&t.role)).count();
        assert_eq!(tcount(&|r| matches!(r, TransitionRole::Link { .. })), 2);
        assert_eq!(tcount(&|r| matches!(r, TransitionRole::PreEmit { .. })), 3);
        assert_eq!(net.places().len(), base.places().len() + 10);
        assert_eq!(net.transitions().len(), base.transitions().len() + 5);

        let wf = PlaceId::new("links__Wheel__Frame");
        let hf = PlaceId::new("links__Handlebar__Frame");
        assert_eq!(net.place(&wf).unwrap().color, Color::pair("Wheel".into(), "Frame".into()));
        assert_eq!(net.f_in(&wf, &"collect".into()).unwrap().to_string(), "<X_Wheel,x_Frame>");
        assert_eq!(net.f_out(&"collect".into(), &wf), net.f_in(&wf, &"collect".into()));
        assert_eq!(net.f_in(&hf, &"collect".into()).unwrap().to_string(), "<x_Handlebar,x_Frame>");
        assert!(net.f_in(&wf, &"assemble_w".into()).is_some());
        assert!(net.f_in(&hf, &"assemble_w".into()).is_none());
        assert!(net.f_in(&hf, &"assemble_h".into()).is_some());
        assert!(net.f_in(&wf, &"assemble_h".into()).is_none());
        assert_eq!(net.f_in(&wf, &"consume__Wheel".into()).unwrap().to_string(), "<x_Wheel,x_Frame>");
        assert_eq!(net.f_out(&"link__Wheel__Frame".into(), &wf).unwrap().to_string(), "<X_Wheel,x_Frame>");
        assert_eq!(net.f_out(&"emit__Frame".into(), &"frame_play".into()).unwrap().to_string(), "<x_Frame>");
        // Frame is in two relationships, so its emitting transition reads two after-link places.
        let frame_reads = net.arcs().iter().filter(|a| a.transition.as_str() == "emit__Frame" && a.direction == ArcDirection::In).count();
        assert_eq!(frame_reads, 2);
    }

    #[test]
    fn t_r_keeps_core_inscriptions() {
        let base = t1(&bike_net()).unwrap();
        let net = t_r(&base, &wf_hf()).unwrap();
        for a in base.arcs() {
            if base.transition(&a.transition).unwrap().role == TransitionRole::Core {
                assert!(net.arcs().contains(a));
            }
        }
    }

    #[test]
    fn t_r_empty_is_identity_and_errors() {
        let base = t1(&bike_net()).unwrap();
        assert_eq!(t_r(&base, &RelationshipSet::default()).unwrap(), base);
        let tr = t_r(&base, &wf_hf()).unwrap();
        assert_eq!(t_r(&tr, &wf_hf()), Err(TransformError::NotT1Tagged));
        let seat = RelationshipSet::new([TypePair::new("Seat", "Frame")]).unwrap();
        assert_eq!(t_r(&base, &seat), Err(TransformError::UnknownType("Seat".into())));
    }
}
