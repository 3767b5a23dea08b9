use serde::{Deserialize, Serialize};

use super::{from_json, IoError};
use crate::model::{Color, Inscription, ObjectType, VarKind, Variable};
use crate::opid::{ArcDirection, Opid, OpidArc, OpidPlace, OpidStructureError, OpidTransition, PlaceRole, TransitionRole};

#[derive(Serialize, Deserialize)]
struct Doc {
    types: Vec<String>,
    places: Vec<PlaceDoc>,
    transitions: Vec<TransitionDoc>,
    flows: Vec<FlowDoc>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    v == &T::default()
}

#[derive(Serialize, Deserialize)]
struct PlaceDoc {
    id: String,
    color: Vec<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    role: PlaceRole,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    id: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    role: TransitionRole,
}

#[derive(Serialize, Deserialize)]
struct FlowDoc {
    from: String,
    to: String,
    inscription: Vec<VarDoc>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct VarDoc {
    pub name: String,
    pub kind: VarKind,
    #[serde(rename = "type")]
    pub ty: String,
}

/// Reads an OPID from its JSON encoding.
pub fn read_opid_json(bytes: &[u8]) -> Result<Opid, IoError> {
    let doc: Doc = from_json(bytes)?;
    let mut places = Vec::with_capacity(doc.places.len());
    for (i, p) in doc.places.iter().enumerate() {
        let color = Color::new(p.color.iter().map(ObjectType::new).collect())
            .ok_or_else(|| IoError::schema(format!("/places/{i}/color"), "empty color"))?;
        places.push(OpidPlace { id: p.id.as_str().into(), color, role: p.role.clone() });
    }
    let transitions = doc
        .transitions
        .iter()
        .map(|t| OpidTransition { id: t.id.as_str().into(), label: t.label.clone(), role: t.role.clone() })
        .collect();
    let place_ids: std::collections::BTreeSet<&str> = doc.places.iter().map(|p| p.id.as_str()).collect();
    let mut arcs = Vec::with_capacity(doc.flows.len());
    for (i, f) in doc.flows.iter().enumerate() {
        let vars = f.inscription.iter().map(|v| Variable::new(v.kind, ObjectType::new(&v.ty), &v.name)).collect();
        let inscription =
            Inscription::new(vars).map_err(|e| IoError::schema(format!("/flows/{i}/inscription"), e.to_string()))?;
        let (place, transition, direction) = if place_ids.contains(f.from.as_str()) {
            (&f.from, &f.to, ArcDirection::In)
        } else {
            (&f.to, &f.from, ArcDirection::Out)
        };
        arcs.push(OpidArc { place: place.as_str().into(), transition: transition.as_str().into(), direction, inscription });
    }
    Opid::new(doc.types.iter().map(ObjectType::new).collect(), places, transitions, arcs).map_err(|e| {
        let pointer = match &e {
            OpidStructureError::UnknownPlace { index, .. }
            | OpidStructureError::UnknownTransition { index, .. }
            | OpidStructureError::ColorMismatch { index, .. } => format!("/flows/{index}"),
            OpidStructureError::UndeclaredType { place, .. } => {
                format!("/places/{}/color", doc.places.iter().position(|p| &p.id == place).unwrap_or_default())
            }
            OpidStructureError::DuplicateId(_) | OpidStructureError::DuplicateArc { .. } => "/".to_string(),
        };
        IoError::schema(pointer, e.to_string())
    })
}

pub(crate) fn var_doc(v: &Variable) -> VarDoc {
    VarDoc { name: v.name().to_string(), kind: v.kind(), ty: v.base_type().to_string() }
}

/// Writes the JSON encoding read by [`read_opid_json`].
pub fn write_opid_json(net: &Opid) -> String {
    let doc = Doc {
        types: net.types().iter().map(|t| t.to_string()).collect(),
        places: net
            .places()
            .iter()
            .map(|p| PlaceDoc {
                id: p.id.to_string(),
                color: p.color.components().iter().map(|c| c.to_string()).collect(),
                role: p.role.clone(),
            })
            .collect(),
        transitions: net
            .transitions()
            .iter()
            .map(|t| TransitionDoc { id: t.id.to_string(), label: t.label.clone(), role: t.role.clone() })
            .collect(),
        flows: net
            .arcs()
            .iter()
            .map(|a| {
                let (from, to) = match a.direction {
                    ArcDirection::In => (a.place.to_string(), a.transition.to_string()),
                    ArcDirection::Out => (a.transition.to_string(), a.place.to_string()),
                };
                FlowDoc { from, to, inscription: a.inscription.vars().iter().map(var_doc).collect() }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("net serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocpn::tests::bike_net;
    use crate::relations::RelationshipSet;
    use crate::transform::{t1, t_r};

    #[test]
    fn round_trip_t1_and_tr() {
        let base = t1(&bike_net()).unwrap();
        assert_eq!(read_opid_json(write_opid_json(&base).as_bytes()).unwrap(), base);
        let r = RelationshipSet::new([crate::model::TypePair::new("Wheel", "Frame")]).unwrap();
        let tr = t_r(&base, &r).unwrap();
        let text = write_opid_json(&tr);
        assert!(text.contains(r#""kind": "link-place""#));
        assert_eq!(read_opid_json(text.as_bytes()).unwrap(), tr);
    }

    #[test]
    fn two_lists_are_a_schema_error() {
        let doc = br#"{"types":["A"],"places":[{"id":"p","color":["A","A"]}],"transitions":[{"id":"t","label":null}],
            "flows":[{"from":"p","to":"t","inscription":[{"name":"X_A","kind":"list","type":"A"},{"name":"Y_A","kind":"list","type":"A"}]}]}"#;
        match read_opid_json(doc) {
            Err(IoError::Schema { pointer, .. }) => assert_eq!(pointer, "/flows/0/inscription"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
