//! Object-centric Petri nets (OCPN) and Petri nets with identifiers (OPID): firing semantics, the
//! OCPN to OPID lowering and its relationship-enforcing extension, log replay, and mining of
//! stable many-to-one relationships from object-centric event logs.

pub mod gen;
pub mod io;
pub mod model;
pub mod ocel;
pub mod ocpn;
pub mod opid;
pub mod relations;
pub mod replay;
pub mod transform;
