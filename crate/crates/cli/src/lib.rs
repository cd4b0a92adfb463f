//! Command line front end for the `wres` engine.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wres::blowup::{make_center, transform_block, weighted_blowup, TransformMode};
use wres::driver::{
    max_invariant_points, principalize, resolve_hypersurface, resolve_point, verify_drop,
    ChartTree, DriverOptions, NamedPoint,
};
use wres::error::{Error, Partial};
use wres::exactalg::{parse_poly, CoordChange, Poly, Rat, Ring};
use wres::invariant::{compute_invariant_with, InvariantOptions, InvariantResult};
use wres::report::{format_blocks, format_invariant, invariant_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Invariant,
    Center,
    Blowup,
    Principalize,
    Resolve,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Invariant => "invariant",
            Command::Center => "center",
            Command::Blowup => "blowup",
            Command::Principalize => "principalize",
            Command::Resolve => "resolve",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub max_rounds: usize,
    pub transform: TransformMode,
    pub at: Vec<NamedPoint>,
    pub json: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    pub command: Command,
    pub ring: Ring,
    pub generators: Vec<Poly>,
    pub options: Options,
}

#[derive(Parser, Debug)]
#[command(name = "wres", about = "Weighted resolution invariants, centers and blow-ups")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Comma separated variable names, in order.
    #[arg(short = 'v', long = "vars", required = true)]
    vars: String,
    /// A generator of the ideal; repeat for more.
    #[arg(short = 'i', long = "ideal", required = true)]
    ideal: Vec<String>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long = "max-rounds", default_value_t = 10)]
    max_rounds: usize,
    #[arg(long, default_value = "controlled")]
    transform: String,
    /// Extra candidate point such as "x=1,y=-1/2"; repeatable.
    #[arg(long)]
    at: Vec<String>,
    /// Print the sub-induction trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Compute the invariant at the origin.
    Invariant(Common),
    /// Compute the weighted center at the origin.
    Center(Common),
    /// Blow up the center once and print every chart.
    Blowup(Common),
    /// Blow up until the ideal is principal in every chart.
    Principalize(Common),
    /// Blow up until the proper transform of a hypersurface is smooth.
    Resolve(Common),
    /// Principalize and check the strict drop on every edge.
    Verify(Common),
}

fn parse_point(src: &str, ring: &Ring) -> Result<NamedPoint> {
    let mut p = NamedPoint::new();
    for part in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .with_context(|| format!("expected `name=value` in `{part}`"))?;
        let name = name.trim();
        if ring.index_of(name).is_none() {
            return Err(Error::Parse { pos: 0, msg: format!("unknown variable `{name}` in point") }.into());
        }
        let v: Rat = value
            .trim()
            .parse()
            .map_err(|e| Error::Parse { pos: 0, msg: format!("malformed rational `{}`: {e}", value.trim()) })?;
        p.insert(name.to_string(), v);
    }
    Ok(p)
}

pub fn parse_request<S: AsRef<str>>(argv: &[S]) -> Result<Request> {
    let args = std::iter::once("wres").chain(argv.iter().map(AsRef::as_ref));
    let cli = Cli::try_parse_from(args)?;
    let (command, c) = match cli.command {
        Sub::Invariant(c) => (Command::Invariant, c),
        Sub::Center(c) => (Command::Center, c),
        Sub::Blowup(c) => (Command::Blowup, c),
        Sub::Principalize(c) => (Command::Principalize, c),
        Sub::Resolve(c) => (Command::Resolve, c),
        Sub::Verify(c) => (Command::Verify, c),
    };
    let names: Vec<String> = c.vars.split(',').map(|s| s.trim().to_string()).collect();
    let ring = Ring::new(&names).map_err(|e| Error::Input(format!("bad variable list: {e}")))?;
    let generators = c
        .ideal
        .iter()
        .map(|g| parse_poly(g, &ring).with_context(|| format!("in `{g}`")))
        .collect::<Result<Vec<_>>>()?;
    let transform: TransformMode = c.transform.parse().map_err(|e: String| Error::Input(e))?;
    let at = c.at.iter().map(|a| parse_point(a, &ring)).collect::<Result<Vec<_>>>()?;
    Ok(Request {
        command,
        ring,
        generators,
        options: Options {
            max_rounds: c.max_rounds,
            transform,
            at,
            json: c.json,
            dot: c.dot,
            trace: c.trace,
        },
    })
}

impl Request {
    /// Arguments that parse back to this request.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec![self.command.name().to_string(), "-v".into(), self.ring.names().join(",")];
        for g in &self.generators {
            a.push("-i".into());
            a.push(g.to_string());
        }
        let o = &self.options;
        a.push("--max-rounds".into());
        a.push(o.max_rounds.to_string());
        a.push("--transform".into());
        a.push(match o.transform {
            TransformMode::Controlled => "controlled".into(),
            TransformMode::Proper => "proper".into(),
        });
        for p in &o.at {
            let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
            a.push("--at".into());
            a.push(parts.join(","));
        }
        if let Some(j) = &o.json {
            a.push("--json".into());
            a.push(j.display().to_string());
        }
        if let Some(d) = &o.dot {
            a.push("--dot".into());
            a.push(d.display().to_string());
        }
        if o.trace {
            a.push("--trace".into());
        }
        a
    }

    fn driver_options(&self) -> DriverOptions {
        DriverOptions {
            max_rounds: self.options.max_rounds,
            mode: self.options.transform,
            candidates: self.options.at.clone(),
            invariant: InvariantOptions::default(),
        }
    }
}

/// Exit status for an error: 1 parse or input, 2 contract, 3 verification,
/// 4 resource.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(err) = e.downcast_ref::<Error>() {
        return err.exit_code();
    }
    if let Some(c) = e.downcast_ref::<clap::Error>() {
        if !c.use_stderr() {
            return 0;
        }
    }
    1
}

fn write_file(path: &Option<PathBuf>, body: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn print_invariant(out: &mut dyn Write, res: &InvariantResult, trace: bool) -> Result<()> {
    let inv = &res.invariant;
    let shown = format_invariant(inv);
    if inv.trimmed().len() < inv.entries.len() {
        writeln!(out, "inv = {shown}  (length {})", inv.entries.len())?;
    } else {
        writeln!(out, "inv = {shown}")?;
    }
    writeln!(out, "terminated by: {:?}", inv.terminated_by)?;
    writeln!(out, "blocks: {}", format_blocks(res))?;
    if trace {
        for t in &res.trace {
            writeln!(out, "  s={} H={} case {:?}", t.s, t.h, t.case)?;
        }
    }
    Ok(())
}

fn print_tree(out: &mut dyn Write, tree: &ChartTree) -> Result<()> {
    for n in &tree.nodes {
        let indent = "  ".repeat(n.round);
        let gens: Vec<String> = n.generators.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "{indent}[{}] {} {} {:?}: {}",
            n.id,
            n.label(),
            format_invariant(n.reference_invariant()),
            n.status,
            gens.join(", ")
        )?;
        if let Some(e) = &n.expansion {
            writeln!(out, "{indent}    center {}", e.center)?;
        }
    }
    Ok(())
}

fn emit_tree(req: &Request, tree: &ChartTree) -> Result<()> {
    write_file(&req.options.json, &serde_json::to_string_pretty(tree)?)?;
    write_file(&req.options.dot, &tree.to_dot())?;
    Ok(())
}

/// Run the tree-building command, writing any partial tree before failing.
fn build_tree(req: &Request, out: &mut dyn Write) -> Result<ChartTree> {
    let opts = req.driver_options();
    let built = match req.command {
        Command::Resolve => {
            if req.generators.len() != 1 {
                bail!(Error::Input("resolve takes exactly one generator".into()));
            }
            resolve_hypersurface(&req.generators[0], &opts)
        }
        _ => principalize(&req.generators, req.ring.len(), &opts),
    };
    match built {
        Ok(t) => Ok(t),
        Err(Error::Resource { msg, partial: Some(Partial::Tree(tree)) }) => {
            writeln!(out, "partial tree:")?;
            print_tree(out, &tree)?;
            emit_tree(req, &tree)?;
            Err(Error::Resource { msg, partial: None }.into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Default sample points on an exceptional divisor of an `m`-dimensional
/// chart: three fixed rational points in the remaining coordinates.
pub fn default_samples(m: usize) -> Vec<Vec<Rat>> {
    let seeds: [(i64, i64); 3] = [(1, 1), (-2, 3), (3, -1)];
    seeds
        .iter()
        .map(|&(a, b)| {
            (0..m.saturating_sub(1))
                .map(|k| Rat::new(a + k as i64, if k % 2 == 0 { 1 } else { b.abs() + 1 }))
                .collect()
        })
        .collect()
}

pub fn run(req: &Request, out: &mut dyn Write) -> Result<()> {
    let m = req.ring.len();
    let opts = InvariantOptions::default();
    match req.command {
        Command::Invariant => {
            let res = compute_invariant_with(&req.generators, m, &opts)?;
            print_invariant(out, &res, req.options.trace)?;
            write_file(&req.options.json, &serde_json::to_string_pretty(&invariant_json(&res))?)?;
        }
        Command::Center | Command::Blowup => {
            let mut points = vec![vec![Rat::zero(); m]];
            for p in &req.options.at {
                points.push(resolve_point(p, &req.ring).expect("validated at parse time"));
            }
            let (best, mut results) = max_invariant_points(&req.generators, &points, &opts)?;
            let point = points[best[0]].clone();
            let res = results.swap_remove(best[0]);
            let center = make_center(&res)?.after(&CoordChange::translation(&req.ring, &point)?)?;
            if point.iter().any(|c| !c.is_zero()) {
                let p: Vec<String> = point.iter().map(ToString::to_string).collect();
                writeln!(out, "point = ({})", p.join(", "))?;
            }
            print_invariant(out, &res, req.options.trace)?;
            writeln!(out, "center = {center}")?;
            writeln!(out, "threshold = {}", center.threshold)?;
            if req.command == Command::Center {
                let body = json!({ "invariant": res.invariant, "center": center });
                write_file(&req.options.json, &serde_json::to_string_pretty(&body)?)?;
                return Ok(());
            }
            let mut charts = Vec::new();
            for ch in weighted_blowup(&center)? {
                let gens = transform_block(&res.generators, &ch, &center, req.options.transform)?;
                let cres = compute_invariant_with(&gens, ch.ring.len(), &opts)?;
                let shown: Vec<String> = gens.iter().map(ToString::to_string).collect();
                writeln!(
                    out,
                    "chart {} (mu_{}): {}  inv = {}",
                    ch.chart_var,
                    ch.group_order,
                    shown.join(", "),
                    format_invariant(&cres.invariant)
                )?;
                charts.push(json!({
                    "chart": ch,
                    "generators": shown,
                    "invariant": cres.invariant,
                }));
            }
            let body = json!({ "center": center, "charts": charts });
            write_file(&req.options.json, &serde_json::to_string_pretty(&body)?)?;
        }
        Command::Principalize | Command::Resolve => {
            let tree = build_tree(req, out)?;
            print_tree(out, &tree)?;
            writeln!(out, "done in {} round(s), {} chart(s)", tree.rounds(), tree.nodes.len())?;
            emit_tree(req, &tree)?;
        }
        Command::Verify => {
            let tree = build_tree(req, out)?;
            let report = verify_drop(&tree, &default_samples(m), &opts)?;
            writeln!(out, "all {} edges: strict drop", report.edges())?;
            emit_tree(req, &tree)?;
        }
    }
    Ok(())
}
