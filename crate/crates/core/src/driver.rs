//! The principalization loop, hypersurface resolution and drop verification
//! over an explicit tree of charts.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::blowup::{make_center, transform_block, weighted_blowup, Center, Chart, TransformMode};
use crate::error::{Error, Partial, Result};
use crate::exactalg::{CoordChange, Poly, Rat, Ring};
use crate::invariant::{
    compute_invariant_with, integerize, lex_compare, Invariant, InvariantOptions, InvariantResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeStatus {
    Active,
    Principal,
    Smooth,
    /// Left unexpanded because the round limit was reached.
    Pruned,
}

/// How a node was blown up.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub point: Vec<Rat>,
    pub result: InvariantResult,
    pub center: Center,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    pub round: usize,
    pub chart: Option<Chart>,
    pub ring: Ring,
    pub generators: Vec<Poly>,
    /// Invariant at the chart origin.
    pub invariant: InvariantResult,
    pub status: NodeStatus,
    /// Exceptional coordinates of this chart.
    pub exceptional: Vec<usize>,
    pub expansion: Option<Expansion>,
    pub children: Vec<usize>,
}

impl Node {
    /// The invariant children must drop below: the expansion invariant when
    /// the node was expanded, else the origin invariant.
    pub fn reference_invariant(&self) -> &Invariant {
        match &self.expansion {
            Some(e) => &e.result.invariant,
            None => &self.invariant.invariant,
        }
    }

    pub fn label(&self) -> String {
        self.chart
            .as_ref()
            .map_or_else(|| "root".to_string(), |c| c.chart_var.clone())
    }
}

#[derive(Clone, Debug)]
pub struct ChartTree {
    pub dim: usize,
    pub mode: TransformMode,
    pub nodes: Vec<Node>,
}

impl ChartTree {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .filter_map(|n| n.parent.map(|p| (p, n.id)))
            .collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    pub fn rounds(&self) -> usize {
        self.nodes.iter().map(|n| n.round).max().unwrap_or(0)
    }

    /// Node ids from the root down to `id`.
    pub fn branch(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph charts {\n");
        for n in &self.nodes {
            s.push_str(&format!(
                "  n{} [label=\"{} / {} / {:?}\"];\n",
                n.id,
                n.label(),
                crate::report::format_invariant(n.reference_invariant()),
                n.status
            ));
        }
        for (p, c) in self.edges() {
            s.push_str(&format!("  n{p} -> n{c};\n"));
        }
        s.push_str("}\n");
        s
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("id", &self.id)?;
        m.serialize_entry("parent_id", &self.parent)?;
        m.serialize_entry("round", &self.round)?;
        m.serialize_entry("chart", &self.chart)?;
        m.serialize_entry("variables", self.ring.names())?;
        let gens: Vec<String> = self.generators.iter().map(Poly::to_string).collect();
        m.serialize_entry("generators", &gens)?;
        m.serialize_entry("invariant", &self.invariant.invariant)?;
        m.serialize_entry("status", &self.status)?;
        if let Some(e) = &self.expansion {
            m.serialize_entry("expansion_point", &e.point)?;
            m.serialize_entry("expansion_invariant", &e.result.invariant)?;
            m.serialize_entry("center", &e.center)?;
        }
        m.end()
    }
}

impl Serialize for ChartTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("dimension", &self.dim)?;
        m.serialize_entry("transform", &self.mode)?;
        m.serialize_entry("nodes", &self.nodes)?;
        m.end()
    }
}

/// A candidate point given by variable names; unnamed variables are zero.
pub type NamedPoint = BTreeMap<String, Rat>;

#[derive(Clone, Debug)]
pub struct DriverOptions {
    pub max_rounds: usize,
    pub mode: TransformMode,
    pub candidates: Vec<NamedPoint>,
    pub invariant: InvariantOptions,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            max_rounds: 10,
            mode: TransformMode::Controlled,
            candidates: Vec::new(),
            invariant: InvariantOptions::default(),
        }
    }
}

/// Coordinates of `p` in `ring`, or `None` if it names a variable the ring
/// does not have.
pub fn resolve_point(p: &NamedPoint, ring: &Ring) -> Option<Vec<Rat>> {
    let mut out = vec![Rat::zero(); ring.len()];
    for (name, v) in p {
        out[ring.index_of(name)?] = v.clone();
    }
    Some(out)
}

fn invariant_at(gens: &[Poly], p: &[Rat], opts: &InvariantOptions) -> Result<InvariantResult> {
    let ring = gens[0].ring();
    let t = CoordChange::translation(ring, p)?;
    let moved = t.apply_all(gens)?;
    compute_invariant_with(&moved, ring.len(), opts)
}

/// Indices of the candidates where the invariant is maximal, with all the
/// computed results in candidate order.
pub fn max_invariant_points(
    gens: &[Poly],
    candidates: &[Vec<Rat>],
    opts: &InvariantOptions,
) -> Result<(Vec<usize>, Vec<InvariantResult>)> {
    if gens.is_empty() {
        return Err(Error::structural("empty generator list"));
    }
    let results = candidates
        .iter()
        .map(|p| invariant_at(gens, p, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Vec<usize> = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match best.first() {
            None => best.push(i),
            Some(&b) => match lex_compare(&r.invariant, &results[b].invariant)? {
                Ordering::Greater => best = vec![i],
                Ordering::Equal => best.push(i),
                Ordering::Less => {}
            },
        }
    }
    Ok((best, results))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Principal,
    Smooth,
}

fn is_principal(gens: &[Poly], exceptional: &[usize]) -> bool {
    if gens.iter().any(Poly::is_unit_at_origin) {
        return true;
    }
    let nonzero: Vec<&Poly> = gens.iter().filter(|g| !g.is_zero()).collect();
    if nonzero.is_empty() {
        return false;
    }
    let mut cofactors: Vec<Poly> = nonzero.iter().map(|g| (*g).clone()).collect();
    for &e in exceptional {
        let k = cofactors.iter().map(|g| g.var_order(e)).min().unwrap_or(0);
        if k > 0 {
            cofactors = cofactors
                .iter()
                .map(|g| g.div_var_pow(e, k).expect("common power divides"))
                .collect();
        }
    }
    cofactors.iter().any(Poly::is_unit_at_origin)
}

fn is_smooth(f: &Poly) -> bool {
    f.is_unit_at_origin() || (0..f.nvars()).any(|j| f.partial(j).is_unit_at_origin())
}

fn classify(goal: Goal, gens: &[Poly], exceptional: &[usize]) -> NodeStatus {
    let done = match goal {
        Goal::Principal => is_principal(gens, exceptional),
        Goal::Smooth => is_smooth(&gens[0]),
    };
    if done {
        match goal {
            Goal::Principal => NodeStatus::Principal,
            Goal::Smooth => NodeStatus::Smooth,
        }
    } else {
        NodeStatus::Active
    }
}

struct ChildPlan {
    chart: Chart,
    generators: Vec<Poly>,
    invariant: InvariantResult,
    exceptional: Vec<usize>,
    status: NodeStatus,
}

fn expand(
    node: &Node,
    goal: Goal,
    opts: &DriverOptions,
) -> Result<(Expansion, Vec<ChildPlan>)> {
    let mut points = vec![vec![Rat::zero(); node.ring.len()]];
    for c in &opts.candidates {
        if let Some(p) = resolve_point(c, &node.ring) {
            if !points.contains(&p) {
                points.push(p);
            }
        }
    }
    let (best, mut results) = max_invariant_points(&node.generators, &points, &opts.invariant)?;
    let pick = best[0];
    let point = points[pick].clone();
    let result = results.swap_remove(pick);
    let translation = CoordChange::translation(&node.ring, &point)?;
    let center = make_center(&result)?.after(&translation)?;
    let charts = weighted_blowup(&center)?;
    let parent_inv = &result.invariant;
    let mut children = Vec::with_capacity(charts.len());
    for chart in charts {
        let generators = transform_block(&result.generators, &chart, &center, opts.mode)?;
        let invariant = compute_invariant_with(&generators, chart.ring.len(), &opts.invariant)?;
        if lex_compare(&invariant.invariant, parent_inv)? != Ordering::Less {
            return Err(Error::Verification {
                parent: node.id,
                child: usize::MAX,
                msg: format!(
                    "chart {} at origin: {} is not below {}",
                    chart.chart_var, invariant.invariant, parent_inv
                ),
            });
        }
        // An old exceptional coordinate stays a coordinate hyperplane in the
        // chart only if the center's coordinate change left it alone.
        let mut exceptional = vec![chart.u()];
        for &e in &node.exceptional {
            let kept = center.coord_change.images()[e] == Poly::var(&node.ring, e);
            if let (true, Some(k)) = (kept, chart.var_map[e]) {
                exceptional.push(k);
            }
        }
        exceptional.sort_unstable();
        let status = classify(goal, &generators, &exceptional);
        children.push(ChildPlan { chart, generators, invariant, exceptional, status });
    }
    Ok((Expansion { point, result, center }, children))
}

fn run_loop(gens: Vec<Poly>, m: usize, goal: Goal, opts: &DriverOptions) -> Result<ChartTree> {
    let ring = gens[0].ring().clone();
    let invariant = compute_invariant_with(&gens, m, &opts.invariant)?;
    let status = classify(goal, &gens, &[]);
    let mut tree = ChartTree {
        dim: m,
        mode: opts.mode,
        nodes: vec![Node {
            id: 0,
            parent: None,
            round: 0,
            chart: None,
            ring,
            generators: gens,
            invariant,
            status,
            exceptional: Vec::new(),
            expansion: None,
            children: Vec::new(),
        }],
    };
    let mut frontier: Vec<usize> = if status == NodeStatus::Active { vec![0] } else { vec![] };
    let mut round = 0usize;
    while !frontier.is_empty() {
        if round >= opts.max_rounds {
            for &id in &frontier {
                tree.nodes[id].status = NodeStatus::Pruned;
            }
            return Err(Error::Resource {
                msg: format!(
                    "{} chart(s) still unresolved after {} round(s)",
                    frontier.len(),
                    opts.max_rounds
                ),
                partial: Some(Partial::Tree(Box::new(tree))),
            });
        }
        let expanded: Vec<Result<(Expansion, Vec<ChildPlan>)>> = frontier
            .par_iter()
            .map(|&id| expand(&tree.nodes[id], goal, opts))
            .collect();
        let mut next = Vec::new();
        for (&id, res) in frontier.iter().zip(expanded) {
            let (exp, children) = match res {
                Ok(v) => v,
                Err(Error::Verification { parent, msg, .. }) => {
                    let child = tree.nodes.len();
                    return Err(Error::Verification { parent, child, msg });
                }
                Err(e) => return Err(e),
            };
            tree.nodes[id].expansion = Some(exp);
            for c in children {
                let cid = tree.nodes.len();
                tree.nodes[id].children.push(cid);
                if c.status == NodeStatus::Active {
                    next.push(cid);
                }
                tree.nodes.push(Node {
                    id: cid,
                    parent: Some(id),
                    round: round + 1,
                    ring: c.chart.ring.clone(),
                    chart: Some(c.chart),
                    generators: c.generators,
                    invariant: c.invariant,
                    status: c.status,
                    exceptional: c.exceptional,
                    expansion: None,
                    children: Vec::new(),
                });
            }
        }
        frontier = next;
        round += 1;
    }
    Ok(tree)
}

fn check_ideal(gens: &[Poly], m: usize) -> Result<()> {
    let Some(first) = gens.first() else {
        return Err(Error::structural("empty generator list"));
    };
    for g in gens {
        first.ring().ensure_same(g.ring())?;
    }
    if first.nvars() != m {
        return Err(Error::structural("ambient dimension differs from ring"));
    }
    if gens.iter().all(Poly::is_zero) {
        return Err(Error::Input("the zero ideal cannot be principalized".into()));
    }
    Ok(())
}

/// Blow up maximal-invariant centers until every chart carries a principal
/// ideal: a unit, or an exceptional monomial times a unit.
pub fn principalize(gens: &[Poly], m: usize, opts: &DriverOptions) -> Result<ChartTree> {
    check_ideal(gens, m)?;
    run_loop(gens.to_vec(), m, Goal::Principal, opts)
}

fn univariate_gcd_degree(a: &[Rat], b: &[Rat]) -> usize {
    fn trim(v: &mut Vec<Rat>) {
        while v.last().is_some_and(Rat::is_zero) {
            v.pop();
        }
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let q = a.last().unwrap() / b.last().unwrap();
            for (i, c) in b.iter().enumerate() {
                a[shift + i] = &a[shift + i] - &(&q * c);
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Whether `f` restricted to three seeded random lines always has a
/// repeated factor, which signals a non-reduced polynomial.
pub fn looks_non_reduced(f: &Poly) -> Result<bool> {
    let n = f.nvars();
    let line = Ring::of(&["t"]);
    let t = Poly::var(&line, 0);
    let mut hits = 0;
    for k in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + k);
        let images: Vec<Poly> = (0..n)
            .map(|_| {
                let b: i64 = rng.gen_range(-7..=7);
                let mut v: i64 = rng.gen_range(-7..=7);
                if v == 0 {
                    v = 1;
                }
                &Poly::constant(&line, Rat::from(b)) + &t.scale(&Rat::from(v))
            })
            .collect();
        let g = if n == 0 { f.clone() } else { f.substitute(&images)? };
        let coeffs = g.univariate_coeffs(0).unwrap_or_default();
        let dg = g.partial(0).univariate_coeffs(0).unwrap_or_default();
        if coeffs.len() > 1 && univariate_gcd_degree(&coeffs, &dg) >= 1 {
            hits += 1;
        }
    }
    Ok(hits == 3)
}

/// Blow up until the proper transform of the hypersurface `f = 0` is smooth
/// in every chart.
pub fn resolve_hypersurface(f: &Poly, opts: &DriverOptions) -> Result<ChartTree> {
    let m = f.nvars();
    check_ideal(std::slice::from_ref(f), m)?;
    if f.is_unit_at_origin() {
        return Err(Error::Input("the hypersurface does not pass through the origin".into()));
    }
    if looks_non_reduced(f)? {
        return Err(Error::Input(format!("`{f}` appears to have a repeated factor")));
    }
    let opts = DriverOptions { mode: TransformMode::Proper, ..opts.clone() };
    run_loop(vec![f.clone()], m, Goal::Smooth, &opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct DropCheck {
    pub parent: usize,
    pub child: usize,
    pub point: Vec<Rat>,
    pub parent_invariant: Invariant,
    pub child_invariant: Invariant,
    pub strict: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DropReport {
    pub checks: Vec<DropCheck>,
}

impl DropReport {
    pub fn edges(&self) -> usize {
        let mut e: Vec<(usize, usize)> = self.checks.iter().map(|c| (c.parent, c.child)).collect();
        e.dedup();
        e.len()
    }
}

/// Compare every child against its parent at the chart origin and at each
/// sample point `(0, s)` on the exceptional divisor `u = 0`.
pub fn verify_drop(tree: &ChartTree, samples: &[Vec<Rat>], opts: &InvariantOptions) -> Result<DropReport> {
    let mut report = DropReport::default();
    for (p, c) in tree.edges() {
        let parent_inv = tree.nodes[p].reference_invariant().clone();
        let child = &tree.nodes[c];
        let mut pts = vec![vec![Rat::zero(); child.ring.len()]];
        for s in samples {
            if s.len() + 1 != child.ring.len() {
                return Err(Error::structural(format!(
                    "sample point has {} coordinates, expected {}",
                    s.len(),
                    child.ring.len() - 1
                )));
            }
            let mut q = vec![Rat::zero()];
            q.extend(s.iter().cloned());
            if !pts.contains(&q) {
                pts.push(q);
            }
        }
        for q in pts {
            let inv = invariant_at(&child.generators, &q, opts)?.invariant;
            let strict = lex_compare(&inv, &parent_inv)? == Ordering::Less;
            if !strict {
                return Err(Error::Verification {
                    parent: p,
                    child: c,
                    msg: format!("at {q:?}: {inv} is not below {parent_inv}"),
                });
            }
            report.checks.push(DropCheck {
                parent: p,
                child: c,
                point: q,
                parent_invariant: parent_inv.clone(),
                child_invariant: inv,
                strict,
            });
        }
    }
    Ok(report)
}

/// Integerized invariants along every root-to-leaf branch must strictly
/// decrease; returns the number of comparisons made.
pub fn check_integer_descent(tree: &ChartTree) -> Result<usize> {
    let mut n = 0;
    for (p, c) in tree.edges() {
        let a = integerize(tree.nodes[p].reference_invariant())?;
        let b = integerize(&tree.nodes[c].invariant.invariant)?;
        if b >= a {
            return Err(Error::Verification {
                parent: p,
                child: c,
                msg: "integerized invariant did not decrease".into(),
            });
        }
        n += 1;
    }
    Ok(n)
}
