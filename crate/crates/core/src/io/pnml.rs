//! PNML place/transition nets.
//!
//! Accepted subset: `net` (first one only), `page` (flattened), `place` with
//! optional `initialMarking/text`, `transition` with optional `name/text` and
//! `toolspecific`, `arc` with optional `inscription/text`, and the
//! `finalmarkings/marking/place[@idref]/text` block. A transition is silent
//! when its name is missing, empty or starts with `tau`, or when a
//! `toolspecific` element carries `activity="$invisible$"`. Without a
//! `finalmarkings` block the final marking is read from `<file>.final`,
//! which lists `place_id` or `place_id:count` tokens separated by whitespace
//! (`#` starts a comment).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};

use crate::net::{NetBuilder, NetError, PetriNet};

#[derive(Debug, thiserror::Error)]
pub enum PnmlError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("line {line}, <{element}>: {message}")]
    Parse {
        line: u32,
        element: String,
        message: String,
    },
    #[error("no final marking: add a <finalmarkings> block or a `.final` sidecar file")]
    MissingFinalMarking,
    #[error("final marking sidecar: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

fn parse_err(doc: &Document, node: Node, message: impl Into<String>) -> PnmlError {
    PnmlError::Parse {
        line: doc.text_pos_at(node.range().start).row,
        element: node.tag_name().name().to_string(),
        message: message.into(),
    }
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == name)
}

/// Text of `node/<name>/text`, trimmed.
fn text_of(node: Node, name: &str) -> Option<String> {
    let t = child(child(node, name)?, "text")?;
    Some(t.text().unwrap_or("").trim().to_string())
}

fn count(doc: &Document, node: Node, text: &str) -> Result<u32, PnmlError> {
    text.parse::<u32>()
        .map_err(|_| parse_err(doc, node, format!("expected a non-negative integer, got `{text}`")))
}

fn is_silent_name(name: Option<&str>) -> bool {
    match name {
        None => true,
        Some(n) => n.is_empty() || n.to_ascii_lowercase().starts_with("tau"),
    }
}

/// Parses PNML text. `sidecar` supplies the final marking when the document
/// has none.
pub fn parse_pnml(text: &str, sidecar: Option<&str>) -> Result<PetriNet, PnmlError> {
    let doc = Document::parse(text).map_err(|e| PnmlError::Xml(e.to_string()))?;
    let root = doc.root_element();
    let net = root
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "net")
        .ok_or_else(|| parse_err(&doc, root, "no <net> element"))?;

    let mut b = NetBuilder::new();
    let mut places = HashMap::new();
    let mut transitions = HashMap::new();
    let elems: Vec<Node> = net.descendants().filter(|n| n.is_element()).collect();
    let in_final_block = |n: &Node| n.ancestors().any(|a| a.tag_name().name() == "finalmarkings");

    for &n in &elems {
        if n.tag_name().name() != "place" || in_final_block(&n) {
            continue;
        }
        let id = n.attribute("id").ok_or_else(|| parse_err(&doc, n, "missing id"))?;
        if places.contains_key(id) {
            return Err(parse_err(&doc, n, format!("duplicate place id `{id}`")));
        }
        let p = b.place(id);
        places.insert(id.to_string(), p);
        if let Some(m) = text_of(n, "initialMarking") {
            let k = count(&doc, n, &m)?;
            if k > 0 {
                b.initial(p, k);
            }
        }
    }
    for &n in &elems {
        if n.tag_name().name() != "transition" {
            continue;
        }
        let id = n.attribute("id").ok_or_else(|| parse_err(&doc, n, "missing id"))?;
        if transitions.contains_key(id) || places.contains_key(id) {
            return Err(parse_err(&doc, n, format!("duplicate node id `{id}`")));
        }
        let name = text_of(n, "name");
        let invisible = n
            .children()
            .filter(|c| c.is_element() && c.tag_name().name() == "toolspecific")
            .any(|c| c.attribute("activity") == Some("$invisible$"));
        let label = if invisible || is_silent_name(name.as_deref()) {
            None
        } else {
            name
        };
        let t = b.transition(id, label.as_deref());
        transitions.insert(id.to_string(), t);
    }
    for &n in &elems {
        if n.tag_name().name() != "arc" {
            continue;
        }
        let src = n.attribute("source").ok_or_else(|| parse_err(&doc, n, "missing source"))?;
        let dst = n.attribute("target").ok_or_else(|| parse_err(&doc, n, "missing target"))?;
        let w = match text_of(n, "inscription") {
            Some(s) => count(&doc, n, &s)?,
            None => 1,
        };
        if w == 0 {
            return Err(parse_err(&doc, n, "arc weight must be positive"));
        }
        match (places.get(src), transitions.get(src), places.get(dst), transitions.get(dst)) {
            (Some(&p), _, _, Some(&t)) => {
                b.input_weighted(p, t, w);
            }
            (_, Some(&t), Some(&p), _) => {
                b.output_weighted(t, p, w);
            }
            _ => {
                return Err(parse_err(
                    &doc,
                    n,
                    format!("arc `{src}` -> `{dst}` does not join a known place and transition"),
                ))
            }
        }
    }

    let final_block = elems
        .iter()
        .find(|n| n.tag_name().name() == "finalmarkings")
        .and_then(|fm| child(*fm, "marking"));
    match (final_block, sidecar) {
        (Some(marking), _) => {
            for p in marking.children().filter(|c| c.is_element() && c.tag_name().name() == "place") {
                let id = p.attribute("idref").ok_or_else(|| parse_err(&doc, p, "missing idref"))?;
                let &pid = places
                    .get(id)
                    .ok_or_else(|| parse_err(&doc, p, format!("unknown place `{id}`")))?;
                let k = match child(p, "text") {
                    Some(t) => count(&doc, p, t.text().unwrap_or("").trim())?,
                    None => 1,
                };
                if k > 0 {
                    b.final_tokens(pid, k);
                }
            }
        }
        (None, Some(text)) => {
            for tok in text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
            {
                let (id, k) = match tok.split_once(':') {
                    Some((id, k)) => (
                        id,
                        k.parse::<u32>()
                            .map_err(|_| PnmlError::Sidecar(format!("bad count in `{tok}`")))?,
                    ),
                    None => (tok, 1),
                };
                let &pid = places
                    .get(id)
                    .ok_or_else(|| PnmlError::Sidecar(format!("unknown place `{id}`")))?;
                if k > 0 {
                    b.final_tokens(pid, k);
                }
            }
        }
        (None, None) => return Err(PnmlError::MissingFinalMarking),
    }
    Ok(b.build()?)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".final");
    PathBuf::from(s)
}

pub fn read_pnml(path: &Path) -> Result<PetriNet, PnmlError> {
    let text = std::fs::read_to_string(path).map_err(|source| PnmlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        Some(std::fs::read_to_string(&side).map_err(|source| PnmlError::Io { path: side, source })?)
    } else {
        None
    };
    parse_pnml(&text, sidecar.as_deref())
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

/// Serializes a net, final marking included. Output is deterministic.
pub fn write_pnml(net: &PetriNet, name: &str) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    let _ = writeln!(
        s,
        "  <net id=\"{}\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">",
        esc(name)
    );
    let _ = writeln!(s, "    <name><text>{}</text></name>", esc(name));
    s.push_str("    <page id=\"page0\">\n");
    for (p, place) in net.places().iter().enumerate() {
        let _ = write!(s, "      <place id=\"{}\"><name><text>{}</text></name>", esc(&place.id), esc(&place.id));
        let k = net.initial_marking().get(p);
        if k > 0 {
            let _ = write!(s, "<initialMarking><text>{k}</text></initialMarking>");
        }
        s.push_str("</place>\n");
    }
    for t in net.transitions() {
        let _ = write!(s, "      <transition id=\"{}\">", esc(&t.id));
        match &t.label {
            Some(l) => {
                let _ = write!(s, "<name><text>{}</text></name>", esc(l));
            }
            None => {
                let _ = write!(
                    s,
                    "<name><text>tau</text></name><toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\"/>"
                );
            }
        }
        s.push_str("</transition>\n");
    }
    let mut arc = 0;
    let mut arc_line = |s: &mut String, src: &str, dst: &str, w: u32| {
        let _ = write!(s, "      <arc id=\"a{arc}\" source=\"{}\" target=\"{}\">", esc(src), esc(dst));
        if w != 1 {
            let _ = write!(s, "<inscription><text>{w}</text></inscription>");
        }
        s.push_str("</arc>\n");
        arc += 1;
    };
    for t in net.transitions() {
        for &(p, w) in &t.preset {
            arc_line(&mut s, &net.place(p).id, &t.id, w);
        }
        for &(p, w) in &t.postset {
            arc_line(&mut s, &t.id, &net.place(p).id, w);
        }
    }
    s.push_str("    </page>\n    <finalmarkings>\n      <marking>\n");
    for (p, k) in net.final_marking().iter() {
        let _ = writeln!(
            s,
            "        <place idref=\"{}\"><text>{k}</text></place>",
            esc(&net.place(p).id)
        );
    }
    s.push_str("      </marking>\n    </finalmarkings>\n  </net>\n</pnml>\n");
    s
}
