//! JSON / DOT / CSV artifacts. JSON is the machine format, DOT is for
//! graph visualization, CSV for verification tables. Every JSON document
//! carries a `meta` object with the config hash and crate version so runs
//! are reproducible byte for byte.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::bottleneck::BottleneckResult;
use crate::ends::EndsReport;
use crate::farey::FareyGraph;
use crate::group::{CayleyBall, GroupOracle};
use crate::metric::MetricGraph;
use crate::rat::{rat, Rat};
use crate::slab::SlabTree;
use crate::treeapprox::{QiReport, TreeApprox};
use crate::xgraph::XGraph;
use crate::{Error, Result};

/// FNV-1a hash of the canonical config text, printed in every artifact.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn meta(config_hash_hex: &str) -> Value {
    json!({
        "config_hash": config_hash_hex,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse "p/q" or "p" into a rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::Precondition(format!("bad rational {s:?}"));
    match parts.as_slice() {
        [n] => Ok(rat(n.parse::<i128>().map_err(|_| bad())?)),
        [n, d] => {
            let num = n.parse::<i128>().map_err(|_| bad())?;
            let den = d.parse::<i128>().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rat::new(num, den))
        }
        _ => Err(bad()),
    }
}

pub fn ball_to_json(ball: &CayleyBall, oracle: &GroupOracle, meta_v: &Value) -> Value {
    let gens = oracle.generators();
    json!({
        "meta": meta_v,
        "radius": ball.radius,
        "vertices": ball.vertices.iter().enumerate().map(|(i, w)| json!({
            "id": i,
            "word": w.display(gens),
            "length": ball.distance[i],
        })).collect::<Vec<_>>(),
        "edges": ball.edges.iter().map(|&(u, l, v)| json!([
            u,
            format!("{}{}", gens.name(l.gen()), if l.inverse { "'" } else { "" }),
            v,
        ])).collect::<Vec<_>>(),
        "twoCells": ball.two_cells.iter().map(|c| json!({
            "vertices": c.vertices,
            "relator": c.relator,
        })).collect::<Vec<_>>(),
    })
}

pub fn ball_to_dot(ball: &CayleyBall, oracle: &GroupOracle) -> String {
    let gens = oracle.generators();
    let mut out = String::from("graph cayley_ball {\n");
    for (i, w) in ball.vertices.iter().enumerate() {
        let _ = writeln!(out, "  v{} [label=\"{}\"];", i, w.display(gens));
    }
    for &(u, l, v) in &ball.edges {
        let _ = writeln!(
            out,
            "  v{} -- v{} [label=\"{}{}\"];",
            u,
            v,
            gens.name(l.gen()),
            if l.inverse { "'" } else { "" }
        );
    }
    out.push_str("}\n");
    out
}

pub fn slabtree_to_json(tree: &SlabTree, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "ballRadius": tree.ball_radius,
        "interiorRadius": tree.interior_radius,
        "vertexSpaces": tree.vertex_spaces.iter().map(|s| json!({
            "id": s.id,
            "level": s.level,
            "size": s.members.len(),
            "interior": s.interior,
        })).collect::<Vec<_>>(),
        "tracks": tree.tracks.iter().map(|t| json!({
            "id": t.id,
            "level": format!("{}+1/2", t.below),
            "crossings": t.crossings.len(),
            "sides": [t.sides.0, t.sides.1],
            "interior": t.interior,
        })).collect::<Vec<_>>(),
    })
}

pub fn slabtree_to_dot(tree: &SlabTree) -> String {
    let mut out = String::from("graph slab_tree {\n");
    for s in &tree.vertex_spaces {
        let shape = if s.interior { "ellipse" } else { "box" };
        let _ = writeln!(
            out,
            "  s{} [label=\"level {} (size {})\", shape={}];",
            s.id,
            s.level,
            s.members.len(),
            shape
        );
    }
    for t in &tree.tracks {
        let style = if t.interior { "solid" } else { "dashed" };
        let _ = writeln!(out, "  s{} -- s{} [style={}];", t.sides.0, t.sides.1, style);
    }
    out.push_str("}\n");
    out
}

pub fn ends_report_to_json(report: &EndsReport, oracle: &GroupOracle, meta_v: &Value) -> Value {
    let gens = oracle.generators();
    json!({
        "meta": meta_v,
        "positiveCount": report.positive_count,
        "negativeCount": report.negative_count,
        "classification": report.classification.to_string(),
        "radiiTested": report.radii_tested,
        "perRadius": report.per_radius.iter().map(|c| json!({
            "radius": c.radius,
            "positive": c.positive,
            "negative": c.negative,
            "positiveWitnesses": c.positive_directions.iter().map(|d| json!({
                "word": d.witness_word.display(gens),
                "value": rat_string(&d.witness_value),
                "component": d.witness_component,
            })).collect::<Vec<_>>(),
            "negativeWitnesses": c.negative_directions.iter().map(|d| json!({
                "word": d.witness_word.display(gens),
                "value": rat_string(&d.witness_value),
                "component": d.witness_component,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Read a metric graph from a JSON document
/// `{"vertices": n, "edges": [[u, v], ...]}` or
/// `{"vertices": n, "edges": [[u, v, "len"], ...]}`.
pub fn metric_graph_from_json(doc: &Value) -> Result<MetricGraph> {
    let n = doc
        .get("vertices")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Precondition("graph json needs a numeric \"vertices\"".into()))?;
    let edges_v = doc
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Precondition("graph json needs an \"edges\" array".into()))?;
    let mut edges = Vec::new();
    for e in edges_v {
        let arr = e
            .as_array()
            .ok_or_else(|| Error::Precondition("each edge must be an array".into()))?;
        if arr.len() < 2 {
            return Err(Error::Precondition("each edge needs two endpoints".into()));
        }
        let u = arr[0].as_u64().ok_or_else(|| Error::Precondition("bad endpoint".into()))?;
        let v = arr[1].as_u64().ok_or_else(|| Error::Precondition("bad endpoint".into()))?;
        let len = match arr.get(2) {
            None => rat(1),
            Some(Value::Number(x)) if x.is_u64() => rat(x.as_u64().unwrap() as i128),
            Some(Value::String(s)) => parse_rat(s)?,
            Some(other) => {
                return Err(Error::Precondition(format!("bad edge length {other}")));
            }
        };
        edges.push((u as u32, v as u32, len));
    }
    MetricGraph::new(n as usize, edges)
}

/// Minimal DOT reader: undirected `graph { a -- b [len=3]; }`. Node names
/// become indices in order of first appearance.
pub fn metric_graph_from_dot(text: &str) -> Result<MetricGraph> {
    let mut names: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut edges = Vec::new();
    let body = text
        .split_once('{')
        .map(|(_, b)| b)
        .unwrap_or(text)
        .rsplit_once('}')
        .map(|(b, _)| b)
        .unwrap_or(text);
    for raw in body.split(';') {
        let stmt = raw.trim();
        if stmt.is_empty() || !stmt.contains("--") {
            continue;
        }
        let (edge_part, attr_part) = match stmt.split_once('[') {
            Some((e, a)) => (e.trim(), Some(a.trim_end_matches(']').trim())),
            None => (stmt, None),
        };
        let mut len = rat(1);
        if let Some(attrs) = attr_part {
            for attr in attrs.split(',') {
                if let Some((k, v)) = attr.split_once('=') {
                    if k.trim() == "len" {
                        len = parse_rat(v.trim().trim_matches('"'))?;
                    }
                }
            }
        }
        let ends: Vec<&str> = edge_part.split("--").map(str::trim).collect();
        if ends.len() != 2 {
            return Err(Error::Precondition(format!("bad dot edge {stmt:?}")));
        }
        let mut ids = [0u32; 2];
        for (k, name) in ends.iter().enumerate() {
            let id = *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                (names.len() - 1) as u32
            });
            ids[k] = id;
        }
        edges.push((ids[0], ids[1], len));
    }
    if names.is_empty() {
        return Err(Error::Precondition("dot graph has no edges".into()));
    }
    MetricGraph::new(names.len(), edges)
}

pub fn metric_graph_to_json(g: &MetricGraph, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "vertices": g.vertex_count(),
        "subdivided": g.subdivided,
        "unit": rat_string(&g.unit),
        "edges": g.edges().iter().map(|&(u, v, w)| json!([u, v, w])).collect::<Vec<_>>(),
    })
}

pub fn bottleneck_to_json(r: &BottleneckResult, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "deltaUnits": r.delta_units,
        "delta": rat_string(&r.delta),
        "witnessPair": [r.witness_pair.0, r.witness_pair.1],
        "witnessMidpoint": r.witness_midpoint,
    })
}

pub fn bottleneck_pairs_to_csv(r: &BottleneckResult) -> String {
    let mut out = String::from("x,y,delta_units\n");
    if let Some(table) = &r.per_pair {
        for &(x, y, d) in table {
            let _ = writeln!(out, "{x},{y},{d}");
        }
    }
    out
}

pub fn treeapprox_to_json(t: &TreeApprox, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "delta": t.delta,
        "r": t.r,
        "beta": t.beta,
        "edges": t.edges.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "edgeImageLengths": t.edge_image_lengths,
    })
}

pub fn treeapprox_to_dot(t: &TreeApprox) -> String {
    let mut out = String::from("graph tree_approx {\n");
    for (i, &b) in t.beta.iter().enumerate() {
        let _ = writeln!(out, "  p{i} [label=\"p{i} -> y{b}\"];");
    }
    for &(a, b) in &t.edges {
        let _ = writeln!(out, "  p{a} -- p{b};");
    }
    out.push_str("}\n");
    out
}

pub fn qi_report_to_csv(r: &QiReport) -> String {
    let mut out = String::from("x,y,tree_distance,image_distance,lower_bound,upper_bound\n");
    for v in &r.violations {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            v.x, v.y, v.tree_distance, v.image_distance, v.lower_bound, v.upper_bound
        );
    }
    out
}

pub fn xgraph_to_json(x: &XGraph, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "gRadius": x.g_radius,
        "hRadius": x.h_radius,
        "trackRadius": x.track_radius,
        "truncationSkips": x.truncation_skips,
        "vertices": x.vertices.iter().map(|v| json!([v.group, v.track])).collect::<Vec<_>>(),
        "edges": x.adjacency.iter().enumerate().flat_map(|(i, row)| {
            row.iter().filter(move |&&j| (i as u32) < j).map(move |&j| json!([i, j]))
        }).collect::<Vec<_>>(),
    })
}

pub fn xgraph_to_dot(x: &XGraph) -> String {
    let mut out = String::from("graph x_graph {\n");
    for (i, v) in x.vertices.iter().enumerate() {
        let _ = writeln!(out, "  x{i} [label=\"(g{}, t{})\"];", v.group, v.track);
    }
    for (i, row) in x.adjacency.iter().enumerate() {
        for &j in row {
            if (i as u32) < j {
                let _ = writeln!(out, "  x{i} -- x{j};");
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn farey_to_json(fg: &FareyGraph, meta_v: &Value) -> Value {
    json!({
        "meta": meta_v,
        "qBound": fg.q_bound,
        "vertices": fg.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "edges": fg.edges.iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
    })
}

pub fn farey_to_dot(fg: &FareyGraph) -> String {
    let mut out = String::from("graph farey {\n");
    for (i, v) in fg.vertices.iter().enumerate() {
        let _ = writeln!(out, "  f{i} [label=\"{v}\"];");
    }
    for &(u, v) in &fg.edges {
        let _ = writeln!(out, "  f{u} -- f{v};");
    }
    out.push_str("}\n");
    out
}
