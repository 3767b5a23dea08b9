//! PNML core documents; colors, inscriptions and role tags live in `toolspecific` elements with
//! `tool="opid" version="1"`.

use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::IoError;
use crate::model::{Color, Inscription, ObjectType, TypePair, VarKind, Variable};
use crate::opid::{ArcDirection, Opid, OpidArc, OpidPlace, OpidTransition, PlaceRole, TransitionRole};

const TOOL: &str = "opid";
const VERSION: &str = "1";
const NET_TYPE: &str = "http://www.pnml.org/version-2009/grammar/ptnet";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn role_attrs(kind: &str, ty: Option<&ObjectType>, pair: Option<&TypePair>) -> String {
    let mut s = format!(r#"kind="{kind}""#);
    if let Some(ty) = ty {
        let _ = write!(s, r#" type="{}""#, esc(ty.as_str()));
    }
    if let Some(p) = pair {
        let _ = write!(s, r#" many="{}" one="{}""#, esc(p.many.as_str()), esc(p.one.as_str()));
    }
    s
}

fn place_role_attrs(role: &PlaceRole) -> Option<String> {
    Some(match role {
        PlaceRole::Core => return None,
        PlaceRole::Play => role_attrs("play", None, None),
        PlaceRole::Stop => role_attrs("stop", None, None),
        PlaceRole::PlayStop => role_attrs("play-stop", None, None),
        PlaceRole::LinkPlace { pair } => role_attrs("link-place", None, Some(pair)),
        PlaceRole::BeforeLink { ty, pair } => role_attrs("before-link", Some(ty), Some(pair)),
        PlaceRole::AfterLink { pair, ty } => role_attrs("after-link", Some(ty), Some(pair)),
    })
}

fn transition_role_attrs(role: &TransitionRole) -> Option<String> {
    Some(match role {
        TransitionRole::Core => return None,
        TransitionRole::Emit { ty } => role_attrs("emit", Some(ty), None),
        TransitionRole::Consume { ty } => role_attrs("consume", Some(ty), None),
        TransitionRole::PreEmit { ty } => role_attrs("pre-emit", Some(ty), None),
        TransitionRole::Link { pair } => role_attrs("link", None, Some(pair)),
    })
}

/// Writes `net` as a PNML document.
pub fn write_opid_pnml(net: &Opid) -> String {
    let mut s = String::new();
    let open_tool = format!(r#"<toolspecific tool="{TOOL}" version="{VERSION}">"#);
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, "<pnml>");
    let _ = writeln!(s, r#"  <net id="opid" type="{NET_TYPE}">"#);
    let _ = writeln!(s, "    {open_tool}");
    let _ = writeln!(s, "      <types>");
    for ty in net.types() {
        let _ = writeln!(s, "        <type>{}</type>", esc(ty.as_str()));
    }
    let _ = writeln!(s, "      </types>");
    let _ = writeln!(s, "    </toolspecific>");
    let _ = writeln!(s, r#"    <page id="page0">"#);
    for p in net.places() {
        let _ = writeln!(s, r#"      <place id="{}">"#, esc(p.id.as_str()));
        let _ = writeln!(s, "        <name><text>{}</text></name>", esc(p.id.as_str()));
        let _ = writeln!(s, "        {open_tool}");
        let _ = writeln!(s, "          <color>{}</color>", esc(&p.color.to_string()));
        if let Some(attrs) = place_role_attrs(&p.role) {
            let _ = writeln!(s, "          <role {attrs}/>");
        }
        let _ = writeln!(s, "        </toolspecific>");
        let _ = writeln!(s, "      </place>");
    }
    for t in net.transitions() {
        let _ = writeln!(s, r#"      <transition id="{}">"#, esc(t.id.as_str()));
        let name = t.label.as_deref().unwrap_or(t.id.as_str());
        let _ = writeln!(s, "        <name><text>{}</text></name>", esc(name));
        let _ = writeln!(s, "        {open_tool}");
        match &t.label {
            Some(label) => {
                let _ = writeln!(s, "          <label>{}</label>", esc(label));
            }
            None => {
                let _ = writeln!(s, "          <silent/>");
            }
        }
        if let Some(attrs) = transition_role_attrs(&t.role) {
            let _ = writeln!(s, "          <role {attrs}/>");
        }
        let _ = writeln!(s, "        </toolspecific>");
        let _ = writeln!(s, "      </transition>");
    }
    for (i, a) in net.arcs().iter().enumerate() {
        let (source, target) = match a.direction {
            ArcDirection::In => (a.place.as_str(), a.transition.as_str()),
            ArcDirection::Out => (a.transition.as_str(), a.place.as_str()),
        };
        let _ = writeln!(s, r#"      <arc id="a{i}" source="{}" target="{}">"#, esc(source), esc(target));
        let _ = writeln!(s, "        <inscription><text>{}</text></inscription>", esc(&a.inscription.to_string()));
        let _ = writeln!(s, "        {open_tool}");
        for v in a.inscription.vars() {
            let _ = writeln!(
                s,
                r#"          <inscription-vars kind="{}" type="{}" name="{}"/>"#,
                v.kind().as_str(),
                esc(v.base_type().as_str()),
                esc(v.name())
            );
        }
        let _ = writeln!(s, "        </toolspecific>");
        let _ = writeln!(s, "      </arc>");
    }
    let _ = writeln!(s, "    </page>");
    let _ = writeln!(s, "  </net>");
    let _ = writeln!(s, "</pnml>");
    s
}

fn children<'a, 'i>(n: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    n.children().filter(move |c| c.is_element() && c.tag_name().name() == name)
}

fn tool<'a, 'i>(n: Node<'a, 'i>) -> Option<Node<'a, 'i>> {
    children(n, "toolspecific").find(|c| c.attribute("tool") == Some(TOOL))
}

fn attr<'a>(n: Node<'a, '_>, name: &str, path: &str) -> Result<&'a str, IoError> {
    n.attribute(name).ok_or_else(|| IoError::schema(path, format!("missing attribute {name}")))
}

fn text<'a>(n: Node<'a, '_>) -> &'a str {
    n.text().unwrap_or("").trim()
}

fn read_pair(n: Node, path: &str) -> Result<TypePair, IoError> {
    Ok(TypePair::new(attr(n, "many", path)?, attr(n, "one", path)?))
}

fn read_type(n: Node, path: &str) -> Result<ObjectType, IoError> {
    Ok(ObjectType::new(attr(n, "type", path)?))
}

fn read_place_role(n: Node, path: &str) -> Result<PlaceRole, IoError> {
    Ok(match attr(n, "kind", path)? {
        "play" => PlaceRole::Play,
        "stop" => PlaceRole::Stop,
        "play-stop" => PlaceRole::PlayStop,
        "link-place" => PlaceRole::LinkPlace { pair: read_pair(n, path)? },
        "before-link" => PlaceRole::BeforeLink { ty: read_type(n, path)?, pair: read_pair(n, path)? },
        "after-link" => PlaceRole::AfterLink { pair: read_pair(n, path)?, ty: read_type(n, path)? },
        other => return Err(IoError::schema(path, format!("unknown place role {other}"))),
    })
}

fn read_transition_role(n: Node, path: &str) -> Result<TransitionRole, IoError> {
    Ok(match attr(n, "kind", path)? {
        "emit" => TransitionRole::Emit { ty: read_type(n, path)? },
        "consume" => TransitionRole::Consume { ty: read_type(n, path)? },
        "pre-emit" => TransitionRole::PreEmit { ty: read_type(n, path)? },
        "link" => TransitionRole::Link { pair: read_pair(n, path)? },
        other => return Err(IoError::schema(path, format!("unknown transition role {other}"))),
    })
}

/// Reads a document written by [`write_opid_pnml`]. Places, transitions and arcs may be spread
/// over several pages.
pub fn read_opid_pnml(text_in: &str) -> Result<Opid, IoError> {
    let doc = Document::parse(text_in).map_err(|e| IoError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "pnml" {
        return Err(IoError::schema("/", "root element is not pnml"));
    }
    let net = children(root, "net").next().ok_or_else(|| IoError::schema("/pnml", "missing net"))?;
    let types: Vec<ObjectType> = tool(net)
        .and_then(|t| children(t, "types").next())
        .map(|ts| children(ts, "type").map(|t| ObjectType::new(text(t))).collect())
        .unwrap_or_default();

    let mut places = Vec::new();
    let mut transitions = Vec::new();
    let mut arc_nodes = Vec::new();
    for page in children(net, "page") {
        for n in page.children().filter(Node::is_element) {
            match n.tag_name().name() {
                "place" => places.push(n),
                "transition" => transitions.push(n),
                "arc" => arc_nodes.push(n),
                _ => {}
            }
        }
    }

    let mut out_places = Vec::with_capacity(places.len());
    for n in places {
        let id = attr(n, "id", "/pnml/net/page/place")?;
        let path = format!("/pnml/net/page/place[@id={id}]");
        let ts = tool(n).ok_or_else(|| IoError::schema(&path, "missing opid toolspecific"))?;
        let color_text = children(ts, "color").next().map(text).unwrap_or("");
        let components: Vec<ObjectType> =
            color_text.split(',').map(str::trim).filter(|c| !c.is_empty()).map(ObjectType::new).collect();
        let color = Color::new(components).ok_or_else(|| IoError::schema(&path, "empty color"))?;
        let role = match children(ts, "role").next() {
            Some(r) => read_place_role(r, &path)?,
            None => PlaceRole::Core,
        };
        out_places.push(OpidPlace { id: id.into(), color, role });
    }

    let mut out_transitions = Vec::with_capacity(transitions.len());
    for n in transitions {
        let id = attr(n, "id", "/pnml/net/page/transition")?;
        let path = format!("/pnml/net/page/transition[@id={id}]");
        let ts = tool(n);
        let label = ts.and_then(|t| children(t, "label").next()).map(|l| text(l).to_string());
        let role = match ts.and_then(|t| children(t, "role").next()) {
            Some(r) => read_transition_role(r, &path)?,
            None => TransitionRole::Core,
        };
        out_transitions.push(OpidTransition { id: id.into(), label, role });
    }

    let place_ids: std::collections::BTreeSet<&str> = out_places.iter().map(|p| p.id.as_str()).collect();
    let mut arcs = Vec::with_capacity(arc_nodes.len());
    for n in arc_nodes {
        let id = n.attribute("id").unwrap_or("?");
        let path = format!("/pnml/net/page/arc[@id={id}]");
        let source = attr(n, "source", &path)?;
        let target = attr(n, "target", &path)?;
        let ts = tool(n).ok_or_else(|| IoError::schema(&path, "missing opid toolspecific"))?;
        let mut vars = Vec::new();
        for v in children(ts, "inscription-vars") {
            let kind = VarKind::parse(attr(v, "kind", &path)?)
                .ok_or_else(|| IoError::schema(&path, "unknown variable kind"))?;
            vars.push(Variable::new(kind, ObjectType::new(attr(v, "type", &path)?), attr(v, "name", &path)?));
        }
        let inscription = Inscription::new(vars).map_err(|e| IoError::schema(&path, e.to_string()))?;
        let (place, transition, direction) = if place_ids.contains(source) {
            (source, target, ArcDirection::In)
        } else {
            (target, source, ArcDirection::Out)
        };
        arcs.push(OpidArc { place: place.into(), transition: transition.into(), direction, inscription });
    }
    Opid::new(types, out_places, out_transitions, arcs).map_err(|e| IoError::schema("/pnml/net", e.to_string()))
}
