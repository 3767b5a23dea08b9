use std::fmt::Write as _;

use crate::ocpn::{Direction, Ocpn};
use crate::opid::{ArcDirection, Opid};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(s: &mut String) {
    s.push_str("digraph net {\n  rankdir=LR;\n");
}

fn place(s: &mut String, id: &str, label: &str) {
    let _ = writeln!(s, "  {} [shape=circle, label={}];", quote(id), quote(label));
}

fn transition(s: &mut String, id: &str, label: Option<&str>) {
    match label {
        Some(l) => {
            let _ = writeln!(s, "  {} [shape=box, label={}];", quote(id), quote(l));
        }
        None => {
            let _ = writeln!(s, "  {} [shape=box, style=filled, fillcolor=black, label=\"\"];", quote(id));
        }
    }
}

fn edge(s: &mut String, from: &str, to: &str, label: Option<&str>, double: bool) {
    let mut attrs = Vec::new();
    if let Some(l) = label {
        attrs.push(format!("label={}", quote(l)));
    }
    if double {
        attrs.push("penwidth=2".to_string());
    }
    if attrs.is_empty() {
        let _ = writeln!(s, "  {} -> {};", quote(from), quote(to));
    } else {
        let _ = writeln!(s, "  {} -> {} [{}];", quote(from), quote(to), attrs.join(", "));
    }
}

/// Renders an OCPN; variable arcs get double pen width. Nodes appear in declaration order.
pub fn ocpn_to_dot(net: &Ocpn) -> String {
    let mut s = String::new();
    header(&mut s);
    for p in net.places() {
        place(&mut s, p.id.as_str(), p.ty.as_str());
    }
    for t in net.transitions() {
        transition(&mut s, t.id.as_str(), t.label.as_deref());
    }
    for f in net.flows() {
        let (from, to) = match f.direction {
            Direction::In => (f.place.as_str(), f.transition.as_str()),
            Direction::Out => (f.transition.as_str(), f.place.as_str()),
        };
        edge(&mut s, from, to, None, f.variable);
    }
    s.push_str("}\n");
    s
}

/// Renders an OPID; places are labeled by color, arcs by inscription, template arcs get double
/// pen width.
pub fn opid_to_dot(net: &Opid) -> String {
    let mut s = String::new();
    header(&mut s);
    for p in net.places() {
        place(&mut s, p.id.as_str(), &p.color.to_string());
    }
    for t in net.transitions() {
        transition(&mut s, t.id.as_str(), t.label.as_deref());
    }
    for a in net.arcs() {
        let (from, to) = match a.direction {
            ArcDirection::In => (a.place.as_str(), a.transition.as_str()),
            ArcDirection::Out => (a.transition.as_str(), a.place.as_str()),
        };
        edge(&mut s, from, to, Some(&a.inscription.to_string()), a.inscription.is_template());
    }
    s.push_str("}\n");
    s
}
