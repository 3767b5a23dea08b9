use serde::{Deserialize, Serialize};

use super::{from_json, IoError};
use crate::model::ObjectType;
use crate::ocpn::{Direction, FlowSpec, Ocpn, OcpnPlace, OcpnTransition, StructureError};

#[derive(Serialize, Deserialize)]
struct Doc {
    types: Vec<String>,
    places: Vec<PlaceDoc>,
    transitions: Vec<TransitionDoc>,
    flows: Vec<FlowDoc>,
}

#[derive(Serialize, Deserialize)]
struct PlaceDoc {
    id: String,
    #[serde(rename = "type")]
    ty: String,
    play: bool,
    stop: bool,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    id: String,
    /// `null` marks a silent transition.
    #[serde(default)]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct FlowDoc {
    from: String,
    to: String,
    variable: bool,
}

/// Reads an OCPN from its JSON encoding.
pub fn read_ocpn_json(bytes: &[u8]) -> Result<Ocpn, IoError> {
    let doc: Doc = from_json(bytes)?;
    for (i, t) in doc.types.iter().enumerate() {
        if t.is_empty() {
            return Err(IoError::schema(format!("/types/{i}"), "empty type name"));
        }
    }
    let places = doc
        .places
        .iter()
        .map(|p| OcpnPlace { id: p.id.as_str().into(), ty: ObjectType::new(&p.ty), play: p.play, stop: p.stop })
        .collect();
    let transitions = doc
        .transitions
        .iter()
        .map(|t| OcpnTransition { id: t.id.as_str().into(), label: t.label.clone() })
        .collect();
    let flows = doc
        .flows
        .iter()
        .map(|f| FlowSpec { from: f.from.clone(), to: f.to.clone(), variable: f.variable })
        .collect();
    Ocpn::new(doc.types.iter().map(ObjectType::new).collect(), places, transitions, flows)
        .map_err(|e| locate(&doc, e))
}

fn locate(doc: &Doc, e: StructureError) -> IoError {
    let message = e.to_string();
    let pointer = match &e {
        StructureError::DuplicateId(id) => {
            let places = doc.places.iter().enumerate().filter(|(_, p)| &p.id == id).map(|(i, _)| format!("/places/{i}/id"));
            let transitions =
                doc.transitions.iter().enumerate().filter(|(_, t)| &t.id == id).map(|(i, _)| format!("/transitions/{i}/id"));
            places.chain(transitions).nth(1).unwrap_or_default()
        }
        StructureError::UndeclaredType { place, .. } => {
            let i = doc.places.iter().position(|p| &p.id == place).unwrap_or_default();
            format!("/places/{i}/type")
        }
        StructureError::UnknownNode { index, node } => {
            let end = if &doc.flows[*index].from == node { "from" } else { "to" };
            format!("/flows/{index}/{end}")
        }
        StructureError::NotBipartite { index, .. } => format!("/flows/{index}"),
        StructureError::DuplicateFlow { from, to } => {
            let i = doc.flows.iter().enumerate().filter(|(_, f)| &f.from == from && &f.to == to).map(|(i, _)| i).nth(1);
            format!("/flows/{}", i.unwrap_or_default())
        }
    };
    IoError::schema(pointer, message)
}

/// Writes the JSON encoding read by [`read_ocpn_json`].
pub fn write_ocpn_json(net: &Ocpn) -> String {
    let doc = Doc {
        types: net.types().iter().map(|t| t.to_string()).collect(),
        places: net
            .places()
            .iter()
            .map(|p| PlaceDoc { id: p.id.to_string(), ty: p.ty.to_string(), play: p.play, stop: p.stop })
            .collect(),
        transitions: net
            .transitions()
            .iter()
            .map(|t| TransitionDoc { id: t.id.to_string(), label: t.label.clone() })
            .collect(),
        flows: net
            .flows()
            .iter()
            .map(|f| {
                let (from, to) = match f.direction {
                    Direction::In => (f.place.to_string(), f.transition.to_string()),
                    Direction::Out => (f.transition.to_string(), f.place.to_string()),
                };
                FlowDoc { from, to, variable: f.variable }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("net serializes")
}
