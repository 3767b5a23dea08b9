//! Object-centric event logs: model, JSON ingestion and object co-occurrence.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{ObjectId, ObjectType};

#[derive(Debug, thiserror::Error)]
pub enum OcelError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("event {event} references unknown object {object}")]
    DanglingObject { event: String, object: String },
    #[error("object {object} declared with types {first} and {second}")]
    TypeConflict { object: String, first: String, second: String },
    #[error("object {object} has undeclared type {ty}")]
    UnknownType { object: String, ty: String },
    #[error("event {0} references no objects")]
    EmptyEvent(String),
    #[error("duplicate event id {0}")]
    DuplicateEvent(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown object type {0}")]
    UnknownObjectType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcelFormat {
    Native,
    Ocel2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub activity: String,
    pub objects: BTreeSet<ObjectId>,
    pub time: DateTime<Utc>,
}

/// A validated event log. Events are kept sorted by `(time, id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ocel {
    types: BTreeSet<ObjectType>,
    objects: BTreeMap<String, ObjectId>,
    events: Vec<Event>,
}

impl Ocel {
    pub fn new(
        types: impl IntoIterator<Item = ObjectType>,
        objects: impl IntoIterator<Item = ObjectId>,
        mut events: Vec<Event>,
    ) -> Result<Self, OcelError> {
        let types: BTreeSet<ObjectType> = types.into_iter().collect();
        let mut table: BTreeMap<String, ObjectId> = BTreeMap::new();
        for o in objects {
            if !types.contains(o.object_type()) {
                return Err(OcelError::UnknownType {
                    object: o.id().to_string(),
                    ty: o.object_type().to_string(),
                });
            }
            if let Some(prev) = table.get(o.id()) {
                if prev.object_type() != o.object_type() {
                    return Err(OcelError::TypeConflict {
                        object: o.id().to_string(),
                        first: prev.object_type().to_string(),
                        second: o.object_type().to_string(),
                    });
                }
                continue;
            }
            table.insert(o.id().to_string(), o);
        }
        let mut ids = BTreeSet::new();
        for e in &events {
            if !ids.insert(e.id.as_str()) {
                return Err(OcelError::DuplicateEvent(e.id.clone()));
            }
            if e.objects.is_empty() {
                return Err(OcelError::EmptyEvent(e.id.clone()));
            }
            for o in &e.objects {
                match table.get(o.id()) {
                    Some(known) if known == o => {}
                    _ => {
                        return Err(OcelError::DanglingObject {
                            event: e.id.clone(),
                            object: o.id().to_string(),
                        })
                    }
                }
            }
        }
        events.sort_by(|a, b| (a.time, &a.id).cmp(&(b.time, &b.id)));
        Ok(Ocel { types, objects: table, events })
    }

    /// Builds a log from an ordered list of `(activity, object ids)` entries, resolving ids
    /// against `objects` and assigning synthetic increasing timestamps.
    pub fn from_sequence(
        types: impl IntoIterator<Item = ObjectType>,
        objects: impl IntoIterator<Item = ObjectId>,
        sequence: &[(&str, &[&str])],
    ) -> Result<Self, OcelError> {
        let objects: Vec<ObjectId> = objects.into_iter().collect();
        let by_id: BTreeMap<&str, &ObjectId> = objects.iter().map(|o| (o.id(), o)).collect();
        let mut events = Vec::with_capacity(sequence.len());
        for (i, (activity, ids)) in sequence.iter().enumerate() {
            let event_id = format!("e{:06}", i + 1);
            let mut objs = BTreeSet::new();
            for id in *ids {
                let o = by_id.get(id).ok_or_else(|| OcelError::DanglingObject {
                    event: event_id.clone(),
                    object: id.to_string(),
                })?;
                objs.insert((*o).clone());
            }
            events.push(Event {
                id: event_id,
                activity: activity.to_string(),
                objects: objs,
                time: synthetic_time(i),
            });
        }
        Ocel::new(types, objects, events)
    }

    pub fn types(&self) -> &BTreeSet<ObjectType> {
        &self.types
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectId> + '_ {
        self.objects.values()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn object(&self, id: &str) -> Option<&ObjectId> {
        self.objects.get(id)
    }

    pub fn objects_of_type<'a>(&'a self, ty: &'a ObjectType) -> impl Iterator<Item = &'a ObjectId> + 'a {
        self.objects.values().filter(move |o| o.object_type() == ty)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// A copy of this log keeping only the events for which `keep` returns true.
    pub fn filter_events(&self, mut keep: impl FnMut(usize, &Event) -> bool) -> Ocel {
        Ocel {
            types: self.types.clone(),
            objects: self.objects.clone(),
            events: self
                .events
                .iter()
                .enumerate()
                .filter(|(i, e)| keep(*i, e))
                .map(|(_, e)| e.clone())
                .collect(),
        }
    }

    /// All objects of type `ty` that co-occur with `o` in some event. Includes `o` itself when
    /// `ty` is its own type and it occurs in an event.
    pub fn lo(&self, o: &str, ty: &ObjectType) -> Result<BTreeSet<ObjectId>, OcelError> {
        let obj = self.objects.get(o).ok_or_else(|| OcelError::UnknownObject(o.to_string()))?;
        if !self.types.contains(ty) {
            return Err(OcelError::UnknownObjectType(ty.to_string()));
        }
        let mut out = BTreeSet::new();
        for e in &self.events {
            if e.objects.contains(obj) {
                out.extend(e.objects.iter().filter(|x| x.object_type() == ty).cloned());
            }
        }
        Ok(out)
    }

    pub fn to_native_json(&self) -> String {
        let doc = NativeDoc {
            types: self.types.iter().map(|t| t.to_string()).collect(),
            objects: self
                .objects
                .values()
                .map(|o| NativeObject { id: o.id().to_string(), ty: o.object_type().to_string() })
                .collect(),
            events: self
                .events
                .iter()
                .map(|e| NativeEvent {
                    id: e.id.clone(),
                    activity: e.activity.clone(),
                    time: Some(e.time.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true)),
                    objects: e.objects.iter().map(|o| o.id().to_string()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("log serializes")
    }
}

/// Co-occurrence index over a log: for every object, the co-occurring objects grouped by type.
#[derive(Debug, Clone, Default)]
pub struct CoOccurrence {
    linked: BTreeMap<ObjectId, BTreeMap<ObjectType, BTreeSet<ObjectId>>>,
}

impl CoOccurrence {
    pub fn new(log: &Ocel) -> Self {
        let mut linked: BTreeMap<ObjectId, BTreeMap<ObjectType, BTreeSet<ObjectId>>> = BTreeMap::new();
        for e in log.events() {
            for o in &e.objects {
                let entry = linked.entry(o.clone()).or_default();
                for other in &e.objects {
                    entry.entry(other.object_type().clone()).or_default().insert(other.clone());
                }
            }
        }
        CoOccurrence { linked }
    }

    /// Same as [`Ocel::lo`] but without validation; unknown objects yield the empty set.
    pub fn lo(&self, o: &ObjectId, ty: &ObjectType) -> BTreeSet<ObjectId> {
        self.linked.get(o).and_then(|m| m.get(ty)).cloned().unwrap_or_default()
    }

    pub fn lo_len(&self, o: &ObjectId, ty: &ObjectType) -> usize {
        self.linked.get(o).and_then(|m| m.get(ty)).map_or(0, |s| s.len())
    }

    pub fn occurs(&self, o: &ObjectId) -> bool {
        self.linked.contains_key(o)
    }
}

pub fn synthetic_time(index: usize) -> DateTime<Utc> {
    Utc.timestamp_opt(index as i64 + 1, 0).single().expect("in range")
}

#[derive(Serialize, Deserialize)]
struct NativeDoc {
    types: Vec<String>,
    objects: Vec<NativeObject>,
    events: Vec<NativeEvent>,
}

#[derive(Serialize, Deserialize)]
struct NativeObject {
    id: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Serialize, Deserialize)]
struct NativeEvent {
    id: String,
    activity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time: Option<String>,
    objects: Vec<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Ocel2Doc {
    #[serde(default)]
    object_types: Vec<Ocel2Type>,
    #[serde(default)]
    objects: Vec<NativeObject>,
    #[serde(default)]
    events: Vec<Ocel2Event>,
}

#[derive(Deserialize)]
struct Ocel2Type {
    name: String,
}

#[derive(Deserialize)]
struct Ocel2Event {
    id: String,
    #[serde(rename = "type", alias = "activity")]
    activity: String,
    time: Option<String>,
    #[serde(default)]
    relationships: Vec<Ocel2Relationship>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Ocel2Relationship {
    object_id: String,
}

fn parse_time(raw: Option<&str>, index: usize, event: &str) -> Result<DateTime<Utc>, OcelError> {
    match raw {
        None => Ok(synthetic_time(index)),
        Some(s) => DateTime::parse_from_rfc3339(s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(|e| OcelError::Malformed(format!("event {event}: bad timestamp {s:?}: {e}"))),
    }
}

fn build(
    types: Vec<String>,
    objects: Vec<NativeObject>,
    events: Vec<(String, String, Option<String>, Vec<String>)>,
) -> Result<Ocel, OcelError> {
    let types: BTreeSet<ObjectType> = types.iter().map(ObjectType::new).collect();
    let mut table: BTreeMap<String, ObjectId> = BTreeMap::new();
    let mut objs = Vec::with_capacity(objects.len());
    for o in objects {
        let ty = ObjectType::new(&o.ty);
        if let Some(prev) = table.get(&o.id) {
            if prev.object_type() != &ty {
                return Err(OcelError::TypeConflict {
                    object: o.id,
                    first: prev.object_type().to_string(),
                    second: o.ty,
                });
            }
            continue;
        }
        let obj = ObjectId::new(&o.id, ty);
        table.insert(o.id, obj.clone());
        objs.push(obj);
    }
    let mut evs = Vec::with_capacity(events.len());
    for (i, (id, activity, time, refs)) in events.into_iter().enumerate() {
        let time = parse_time(time.as_deref(), i, &id)?;
        let mut set = BTreeSet::new();
        for r in refs {
            let o = table
                .get(&r)
                .ok_or_else(|| OcelError::DanglingObject { event: id.clone(), object: r.clone() })?;
            set.insert(o.clone());
        }
        evs.push(Event { id, activity, objects: set, time });
    }
    Ocel::new(types, objs, evs)
}

/// Parses a log in the native or the OCEL 2.0 JSON layout. Unknown fields are ignored.
pub fn parse_ocel(bytes: &[u8], format: OcelFormat) -> Result<Ocel, OcelError> {
    let text = std::str::from_utf8(bytes).map_err(|e| OcelError::Malformed(e.to_string()))?;
    match format {
        OcelFormat::Native => {
            let doc: NativeDoc =
                serde_json::from_str(text).map_err(|e| OcelError::Malformed(e.to_string()))?;
            let events = doc.events.into_iter().map(|e| (e.id, e.activity, e.time, e.objects)).collect();
            build(doc.types, doc.objects, events)
        }
        OcelFormat::Ocel2 => {
            let doc: Ocel2Doc =
                serde_json::from_str(text).map_err(|e| OcelError::Malformed(e.to_string()))?;
            let events = doc
                .events
                .into_iter()
                .map(|e| {
                    let refs = e.relationships.into_iter().map(|r| r.object_id).collect();
                    (e.id, e.activity, e.time, refs)
                })
                .collect();
            build(doc.object_types.into_iter().map(|t| t.name).collect(), doc.objects, events)
        }
    }
}

/// Picks the layout from the document keys: `objectTypes` means OCEL 2.0.
pub fn parse_ocel_auto(bytes: &[u8]) -> Result<Ocel, OcelError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| OcelError::Malformed(e.to_string()))?;
    let format = if value.get("objectTypes").is_some() { OcelFormat::Ocel2 } else { OcelFormat::Native };
    parse_ocel(bytes, format)
}
