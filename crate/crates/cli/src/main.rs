//! Unified command-line front end: loads an experiment config, runs one of
//! the pipelines, and writes JSON/DOT/CSV artifacts into the output
//! directory. Identical config and command produce byte-identical outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use pclab::config::ExperimentConfig;
use pclab::ends::{classify_ends_report, pingpong_pair, separated_triple};
use pclab::export;
use pclab::farey::{farey_bottleneck_stability, farey_graph, orbit_diameter, FareyVertex};
use pclab::group::{cayley_ball, Word};
use pclab::metric::MetricGraph;
use pclab::pseudochar::{defect_estimate, epsilon, homogenize, scale_normalize};
use pclab::slab::build_slab_tree;
use pclab::treeapprox::{build_tree, coarse_surjectivity_check, verify_qi};
use pclab::xgraph::{build_x, verify_cobounded, verify_separation_lemmas, verify_x_bottleneck};
use pclab::Error;

const USAGE: &str = "\
pclab - pseudocharacter geometry laboratory

USAGE:
    pclab [--config FILE] [--out DIR] [--threads N] <command> [options]

COMMANDS:
    pseudochar eval --word W       evaluate f, homogenize, and report epsilon
    pseudochar defect --radius R   measured defect bound at the given radius
    slabtree build [--radius R]    vertex spaces + tracks (JSON, DOT)
    ends classify                  ends report over ends.radii (JSON)
    ends pingpong                  separated triple + ping-pong certificate
    bottleneck --graph FILE [--all-pairs]
                                   bottleneck constant of a metric graph
    treeapprox build --graph FILE [--basepoint N]
                                   tree approximation + QI window check
    x build                        the quasi-tree X (JSON, DOT, truncation)
    x verify                       coboundedness/separation/Delta_X checks
    farey gen [--Q N]              Farey graph truncation (JSON, DOT)
    farey bottleneck [--Q a,b,c]   Delta across truncations
    farey orbit [--base p/q] [--len K]
                                   orbit diameter inside the truncation

Graph files may be JSON ({\"vertices\": n, \"edges\": [[u,v,len?]]}) or DOT.
Environment: PCLAB_THREADS sets the default worker count.
Exit codes: 0 ok, 1 domain error, 2 usage error.
";

struct Cli {
    config: Option<PathBuf>,
    out: PathBuf,
    flags: std::collections::BTreeMap<String, String>,
    command: Vec<String>,
}

fn parse_cli(mut argv: Vec<String>) -> Result<Cli, String> {
    argv.remove(0);
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut threads: Option<usize> =
        std::env::var("PCLAB_THREADS").ok().and_then(|v| v.parse().ok());
    let mut command = Vec::new();
    let mut flags = std::collections::BTreeMap::new();
    let mut i = 0;
    const BOOLEAN_FLAGS: &[&str] = &["all-pairs"];
    while i < argv.len() {
        let arg = &argv[i];
        if let Some(name) = arg.strip_prefix("--") {
            if BOOLEAN_FLAGS.contains(&name) {
                // bare flag, with an optional explicit true/false value
                let explicit = argv.get(i + 1).filter(|v| *v == "true" || *v == "false");
                let value = explicit.cloned().unwrap_or_else(|| "true".to_string());
                i += if explicit.is_some() { 2 } else { 1 };
                flags.insert(name.to_string(), value);
                continue;
            }
            let value =
                argv.get(i + 1).cloned().ok_or(format!("flag --{name} needs a value"))?;
            i += 2;
            match name {
                "config" => config = Some(PathBuf::from(value)),
                "out" => out = PathBuf::from(value),
                "threads" => {
                    threads =
                        Some(value.parse().map_err(|_| "bad --threads value".to_string())?);
                }
                other => {
                    flags.insert(other.to_string(), value);
                }
            }
        } else {
            command.push(arg.clone());
            i += 1;
        }
    }
    if let Some(n) = threads {
        pclab::configure_threads(n);
    }
    if command.is_empty() {
        return Err("no command given".into());
    }
    Ok(Cli { config, out, flags, command })
}

fn main() -> ExitCode {
    let cli = match parse_cli(std::env::args().collect()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("usage error: {msg}\n\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}\n\n{USAGE}");
            ExitCode::from(2)
        }
        Err(RunError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Domain(e)
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let cmd: Vec<&str> = cli.command.iter().map(String::as_str).collect();
    match cmd.as_slice() {
        ["pseudochar", "eval"] => pseudochar_eval(cli),
        ["pseudochar", "defect"] => pseudochar_defect(cli),
        ["slabtree", "build"] => slabtree_build(cli),
        ["ends", "classify"] => ends_classify(cli),
        ["ends", "pingpong"] => ends_pingpong(cli),
        ["bottleneck"] => bottleneck_cmd(cli),
        ["treeapprox", "build"] => treeapprox_build(cli),
        ["x", "build"] => x_build(cli),
        ["x", "verify"] => x_verify(cli),
        ["farey", "gen"] => farey_gen(cli),
        ["farey", "bottleneck"] => farey_bottleneck_cmd(cli),
        ["farey", "orbit"] => farey_orbit(cli),
        other => Err(RunError::Usage(format!("unknown command {:?}", other.join(" ")))),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let Some(path) = &cli.config else {
        return Err(RunError::Usage("this command needs --config".into()));
    };
    let mut config = ExperimentConfig::from_file(path).map_err(RunError::Domain)?;
    if let Some(r) = cli.flags.get("radius") {
        config.set("ball.radius", r);
    }
    if let Some(q) = cli.flags.get("Q") {
        config.set("farey.q", q);
    }
    Ok(config)
}

fn write_out(cli: &Cli, name: &str, content: &str) -> Result<(), RunError> {
    std::fs::create_dir_all(&cli.out).map_err(|e| RunError::Domain(e.into()))?;
    let path = cli.out.join(name);
    std::fs::write(&path, content).map_err(|e| RunError::Domain(e.into()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json(cli: &Cli, name: &str, value: &serde_json::Value) -> Result<(), RunError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| RunError::Domain(e.into()))?;
    text.push('\n');
    write_out(cli, name, &text)
}

/// Comment line carrying the config hash and version, so DOT and CSV
/// artifacts are stamped like the JSON ones.
fn stamp(meta: &serde_json::Value, comment: &str) -> String {
    format!(
        "{comment} config_hash={} version={}\n",
        meta["config_hash"].as_str().unwrap_or("-"),
        meta["version"].as_str().unwrap_or("-")
    )
}

fn write_dot(cli: &Cli, name: &str, meta: &serde_json::Value, dot: &str) -> Result<(), RunError> {
    write_out(cli, name, &format!("{}{dot}", stamp(meta, "//")))
}

fn write_csv(cli: &Cli, name: &str, meta: &serde_json::Value, csv: &str) -> Result<(), RunError> {
    write_out(cli, name, &format!("{}{csv}", stamp(meta, "#")))
}

struct GroupSetup {
    oracle: pclab::group::GroupOracle,
    scaled: pclab::pseudochar::PseudocharacterScaled,
    presentation: Option<pclab::group::Presentation>,
    meta: serde_json::Value,
    config: ExperimentConfig,
}

fn group_setup(cli: &Cli) -> Result<GroupSetup, RunError> {
    let config = load_config(cli)?;
    let oracle = config.oracle()?;
    let f = config.quasicharacter(&oracle)?;
    let presentation = config.presentation(&oracle)?;
    let scale_radius = config.usize_field("scale.radius", Some(4))?;
    let scaled = scale_normalize(&f, &oracle, scale_radius)?;
    let meta = export::meta(&export::config_hash(&config.canonical()));
    Ok(GroupSetup { oracle, scaled, presentation, meta, config })
}

fn pseudochar_eval(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let Some(word_s) = cli.flags.get("word") else {
        return Err(RunError::Usage("pseudochar eval needs --word".into()));
    };
    let w = Word::parse(word_s, setup.oracle.generators())?;
    let f = &setup.scaled.base;
    let value = f.eval(&w, &setup.oracle)?;
    let doublings = setup.config.usize_field("pseudochar.doublings", Some(12))? as u32;
    let homog = homogenize(f, &w, doublings, &setup.oracle)?;
    let radius = setup.config.usize_field("scale.radius", Some(4))?;
    let eps = epsilon(f, &setup.oracle, radius)?;
    let doc = serde_json::json!({
        "meta": setup.meta,
        "word": w.display(setup.oracle.generators()),
        "value": value.to_string(),
        "homogenized": homog.to_string(),
        "epsilon": eps.to_string(),
        "scale": setup.scaled.scale.to_string(),
    });
    write_json(cli, "pseudochar_eval.json", &doc)?;
    println!("f({}) = {}", w.display(setup.oracle.generators()), value);
    Ok(())
}

fn pseudochar_defect(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let radius = match cli.flags.get("radius") {
        Some(r) => r.parse().map_err(|_| RunError::Usage("bad --radius".into()))?,
        None => setup.config.usize_field("scale.radius", Some(3))?,
    };
    let d = defect_estimate(&setup.scaled.base, &setup.oracle, radius)?;
    let doc = serde_json::json!({
        "meta": setup.meta,
        "radius": radius,
        "defect": d.to_string(),
    });
    write_json(cli, "defect.json", &doc)?;
    println!("defect bound at radius {radius}: {d}");
    Ok(())
}

fn slabtree_build(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let radius = setup.config.usize_field("ball.radius", None)?;
    let ball = cayley_ball(&setup.oracle, radius, setup.presentation.as_ref())?;
    let tree = build_slab_tree(&ball, &setup.scaled, &setup.oracle)?;
    write_json(cli, "slabtree.json", &export::slabtree_to_json(&tree, &setup.meta))?;
    write_dot(cli, "slabtree.dot", &setup.meta, &export::slabtree_to_dot(&tree))?;
    println!(
        "slab tree: {} vertex spaces, {} tracks, interior radius {}",
        tree.vertex_spaces.len(),
        tree.tracks.len(),
        tree.interior_radius
    );
    Ok(())
}

fn ends_classify(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let radius = setup.config.usize_field("ball.radius", None)?;
    let radii = setup.config.i64_list("ends.radii")?;
    let ball = cayley_ball(&setup.oracle, radius, setup.presentation.as_ref())?;
    let tree = build_slab_tree(&ball, &setup.scaled, &setup.oracle)?;
    let report = classify_ends_report(&tree, &ball, &radii)?;
    write_json(
        cli,
        "ends_report.json",
        &export::ends_report_to_json(&report, &setup.oracle, &setup.meta),
    )?;
    println!(
        "ends: counts ({}, {}), classification {}",
        report.positive_count, report.negative_count, report.classification
    );
    Ok(())
}

fn ends_pingpong(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let radius = setup.config.usize_field("ball.radius", None)?;
    let barrier = setup.config.i64_field("ends.barrier", Some(1))?;
    let syllables = setup.config.usize_field("ends.syllables", Some(6))?;
    let defect_radius = setup.config.usize_field("ends.defect_radius", Some(2))?;
    let ball = cayley_ball(&setup.oracle, radius, setup.presentation.as_ref())?;
    let tree = build_slab_tree(&ball, &setup.scaled, &setup.oracle)?;
    let defect = defect_estimate(&setup.scaled.base, &setup.oracle, defect_radius)?;
    let triple =
        separated_triple(&setup.scaled, &setup.oracle, &tree, &ball, barrier, &defect)?;
    let pair = pingpong_pair(&setup.oracle, &tree, &ball, &triple, syllables)?;
    let gens = setup.oracle.generators();
    let doc = serde_json::json!({
        "meta": setup.meta,
        "triple": {
            "g1": triple.g1.display(gens),
            "g2": triple.g2.display(gens),
            "g3": triple.g3.display(gens),
            "N": triple.n_power,
        },
        "pair": {
            "g": pair.g.display(gens),
            "gPrime": pair.g_prime.display(gens),
            "power": pair.power,
            "wordsChecked": pair.words_checked,
        },
    });
    write_json(cli, "pingpong.json", &doc)?;
    println!(
        "ping-pong pair ({}, {}): {} words checked, no relation",
        pair.g.display(gens),
        pair.g_prime.display(gens),
        pair.words_checked
    );
    Ok(())
}

fn load_graph(cli: &Cli) -> Result<MetricGraph, RunError> {
    let Some(path) = cli.flags.get("graph") else {
        return Err(RunError::Usage("this command needs --graph FILE".into()));
    };
    let text =
        std::fs::read_to_string(Path::new(path)).map_err(|e| RunError::Domain(e.into()))?;
    let g = if path.ends_with(".dot") {
        export::metric_graph_from_dot(&text)?
    } else {
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| RunError::Domain(e.into()))?;
        export::metric_graph_from_json(&doc)?
    };
    Ok(g)
}

fn graph_meta(cli: &Cli) -> serde_json::Value {
    let tag = cli.flags.get("graph").cloned().unwrap_or_default();
    export::meta(&export::config_hash(&tag))
}

fn bottleneck_cmd(cli: &Cli) -> Result<(), RunError> {
    let g = load_graph(cli)?.subdivide();
    let all_pairs = cli.flags.get("all-pairs").map(String::as_str) == Some("true");
    let r = pclab::bottleneck::bottleneck_delta(&g, all_pairs)?;
    let meta = graph_meta(cli);
    write_json(cli, "bottleneck.json", &export::bottleneck_to_json(&r, &meta))?;
    if all_pairs {
        write_csv(cli, "bottleneck_pairs.csv", &meta, &export::bottleneck_pairs_to_csv(&r))?;
    }
    println!(
        "Delta = {} subdivided units (witness pair {:?}, midpoint {})",
        r.delta_units, r.witness_pair, r.witness_midpoint
    );
    Ok(())
}

fn treeapprox_build(cli: &Cli) -> Result<(), RunError> {
    let g = load_graph(cli)?.subdivide();
    let basepoint: u32 = match cli.flags.get("basepoint") {
        Some(b) => b.parse().map_err(|_| RunError::Usage("bad --basepoint".into()))?,
        None => 0,
    };
    let t = build_tree(&g, basepoint, None)?;
    let report = verify_qi(&t, &g, (4, 5))?;
    let (gap, gap_ok) = coarse_surjectivity_check(&t, &g);
    let meta = graph_meta(cli);
    write_json(cli, "treeapprox.json", &export::treeapprox_to_json(&t, &meta))?;
    write_dot(cli, "treeapprox.dot", &meta, &export::treeapprox_to_dot(&t))?;
    write_csv(cli, "treeapprox_window.csv", &meta, &export::qi_report_to_csv(&report))?;
    println!(
        "tree: {} vertices, Delta {}, R {}; window violations {}; coarse gap {} ({})",
        t.vertex_count(),
        t.delta,
        t.r,
        report.violations.len(),
        gap,
        if gap_ok { "ok" } else { "exceeds bound" }
    );
    Ok(())
}

fn x_params(setup: &GroupSetup) -> Result<(usize, usize, usize, usize), RunError> {
    let g_radius = setup.config.usize_field("x.g_radius", Some(4))?;
    let h_radius = setup.config.usize_field("x.h_radius", Some(3))?;
    let track_radius = setup.config.usize_field("x.track_radius", Some(3))?;
    let ambient = setup
        .config
        .usize_field("ball.radius", Some(g_radius + h_radius + track_radius))?;
    Ok((g_radius, h_radius, track_radius, ambient))
}

fn x_build(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let (g_radius, h_radius, track_radius, ambient) = x_params(&setup)?;
    let ball = cayley_ball(&setup.oracle, ambient, setup.presentation.as_ref())?;
    let tree = build_slab_tree(&ball, &setup.scaled, &setup.oracle)?;
    let (x, _builder) =
        build_x(&ball, &tree, &setup.oracle, g_radius, h_radius, track_radius)?;
    write_json(cli, "xgraph.json", &export::xgraph_to_json(&x, &setup.meta))?;
    write_dot(cli, "xgraph.dot", &setup.meta, &export::xgraph_to_dot(&x))?;
    let truncation = serde_json::json!({
        "meta": setup.meta,
        "skips": x.truncation_skips,
        "exhaustive": x.truncation_skips == 0,
    });
    write_json(cli, "x_truncation.json", &truncation)?;
    println!(
        "X: {} vertices, {} tracks, truncation skips {}",
        x.vertex_count(),
        x.track_ids.len(),
        x.truncation_skips
    );
    Ok(())
}

fn x_verify(cli: &Cli) -> Result<(), RunError> {
    let setup = group_setup(cli)?;
    let (g_radius, h_radius, track_radius, ambient) = x_params(&setup)?;
    let ball = cayley_ball(&setup.oracle, ambient, setup.presentation.as_ref())?;
    let tree = build_slab_tree(&ball, &setup.scaled, &setup.oracle)?;
    let (x, builder) =
        build_x(&ball, &tree, &setup.oracle, g_radius, h_radius, track_radius)?;
    let cobounded = verify_cobounded(&x, &ball, &setup.oracle)?;
    let separation = verify_separation_lemmas(&x, &builder)?;
    let delta = verify_x_bottleneck(&x)?;
    let varpi = pclab::xgraph::varpi_values(&x, &tree);
    let varpi_range = match (varpi.iter().min(), varpi.iter().max()) {
        (Some(lo), Some(hi)) => vec![lo.to_string(), hi.to_string()],
        _ => vec![],
    };
    let doc = serde_json::json!({
        "meta": setup.meta,
        "varpiRange": varpi_range,
        "orbitGap": cobounded.max_gap,
        "intersectingPairs": separation.intersecting_pairs,
        "intersectViolations": separation.intersect_violations,
        "separatedTriples": separation.separated_triples,
        "tbottleViolations": separation.tbottle_violations,
        "deltaX": delta.delta.to_string(),
        "deltaXSubdividedUnits": delta.delta_units,
    });
    write_json(cli, "x_verify.json", &doc)?;
    println!(
        "X checks: orbit gap {}, intersect violations {}, tbottle violations {}, Delta_X {}",
        cobounded.max_gap,
        separation.intersect_violations,
        separation.tbottle_violations,
        delta.delta
    );
    Ok(())
}

fn flag_i64(cli: &Cli, name: &str, default: i64) -> Result<i64, RunError> {
    match cli.flags.get(name) {
        Some(v) => v.parse().map_err(|_| RunError::Usage(format!("bad --{name}"))),
        None => Ok(default),
    }
}

fn farey_gen(cli: &Cli) -> Result<(), RunError> {
    let q = flag_i64(cli, "Q", 10)?;
    let fg = farey_graph(q)?;
    let meta = export::meta(&export::config_hash(&format!("farey.q = {q}")));
    write_json(cli, "farey.json", &export::farey_to_json(&fg, &meta))?;
    write_dot(cli, "farey.dot", &meta, &export::farey_to_dot(&fg))?;
    println!("Farey(Q={q}): {} vertices, {} edges", fg.vertices.len(), fg.edges.len());
    Ok(())
}

fn farey_bottleneck_cmd(cli: &Cli) -> Result<(), RunError> {
    let qs: Vec<i64> = match cli.flags.get("Q") {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| RunError::Usage("bad --Q list".into())))
            .collect::<Result<_, _>>()?,
        None => vec![10, 20, 40],
    };
    let rows = farey_bottleneck_stability(&qs)?;
    let meta = export::meta(&export::config_hash(&format!("{qs:?}")));
    let doc = serde_json::json!({
        "meta": meta,
        "rows": rows.iter().map(|(q, r)| serde_json::json!({
            "Q": q,
            "deltaUnits": r.delta_units,
        })).collect::<Vec<_>>(),
    });
    write_json(cli, "farey_bottleneck.json", &doc)?;
    for (q, r) in &rows {
        println!("Q = {q}: Delta = {} subdivided units", r.delta_units);
    }
    Ok(())
}

fn farey_orbit(cli: &Cli) -> Result<(), RunError> {
    let q = flag_i64(cli, "Q", 40)?;
    let len = flag_i64(cli, "len", 6)? as usize;
    let base = match cli.flags.get("base").map(String::as_str) {
        None | Some("1/0") | Some("inf") => FareyVertex::infinity(),
        Some(s) => {
            let (p, qq) = s
                .split_once('/')
                .ok_or_else(|| RunError::Usage("bad --base, expected p/q".into()))?;
            let p: i64 = p.parse().map_err(|_| RunError::Usage("bad --base".into()))?;
            let qq: i64 = qq.parse().map_err(|_| RunError::Usage("bad --base".into()))?;
            FareyVertex::new(p, qq)
        }
    };
    let fg = farey_graph(q)?;
    let d = orbit_diameter(&fg, &base, len)?;
    let meta = export::meta(&export::config_hash(&format!("farey orbit {q} {base} {len}")));
    let doc = serde_json::json!({
        "meta": meta,
        "Q": q,
        "base": base.to_string(),
        "wordLength": d.word_length,
        "orbitInWindow": d.orbit_in_window,
        "escaped": d.escaped,
        "diameter": d.diameter,
    });
    write_json(cli, "farey_orbit.json", &doc)?;
    println!(
        "orbit of {base} at length {len}: diameter {} over {} in-window points ({} escaped)",
        d.diameter, d.orbit_in_window, d.escaped
    );
    Ok(())
}
