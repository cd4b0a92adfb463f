//! Weighted centers, the charts of their smoothed weighted blow-ups, and the
//! transforms of ideals through those charts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactalg::{CoordChange, Mono, Poly, Rat, Ring};
use crate::invariant::{InvariantResult, Termination};

#[derive(Clone, Debug, PartialEq)]
pub struct CenterBlock {
    pub vars: Vec<usize>,
    pub weight: u64,
}

/// Weighted center: coordinate blocks with coprime integer weights, given in
/// the coordinates reached by `coord_change` from the ambient ones.
#[derive(Clone, Debug)]
pub struct Center {
    pub ring: Ring,
    pub blocks: Vec<CenterBlock>,
    pub threshold: u64,
    pub coord_change: CoordChange,
}

impl Center {
    pub fn vars(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| b.vars.iter().copied()).collect()
    }

    pub fn weight_of(&self, v: usize) -> Option<u64> {
        self.blocks.iter().find(|b| b.vars.contains(&v)).map(|b| b.weight)
    }

    /// Codimension of the center.
    pub fn codim(&self) -> usize {
        self.blocks.iter().map(|b| b.vars.len()).sum()
    }

    /// Precompose the center's coordinates with `first` (for example a
    /// translation moving a point to the origin).
    pub fn after(mut self, first: &CoordChange) -> Result<Center> {
        self.coord_change = first.compose(&self.coord_change)?;
        Ok(self)
    }
}

impl std::fmt::Display for Center {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.vars.iter().map(|&v| self.ring.name(v)).collect();
                format!("{{{}}}:{}", names.join(","), b.weight)
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for Center {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct B<'a> {
            vars: Vec<&'a str>,
            weight: u64,
        }
        let blocks: Vec<B> = self
            .blocks
            .iter()
            .map(|b| B {
                vars: b.vars.iter().map(|&v| self.ring.name(v)).collect(),
                weight: b.weight,
            })
            .collect();
        let coords: BTreeMap<&str, String> = self
            .coord_change
            .inverse()
            .map(|inv| {
                inv.iter()
                    .enumerate()
                    .filter(|(i, p)| **p != Poly::var(&self.ring, *i))
                    .map(|(i, p)| (self.ring.name(i), p.to_string()))
                    .collect()
            })
            .unwrap_or_default();
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("blocks", &blocks)?;
        m.serialize_entry("threshold", &self.threshold)?;
        m.serialize_entry("coordinates", &coords)?;
        m.end()
    }
}

/// Center of the canonical blow-up: the filtration blocks with weights
/// cleared to coprime integers. Residual variables are not part of it.
pub fn make_center(res: &InvariantResult) -> Result<Center> {
    if res.invariant.terminated_by == Termination::UnitIdeal {
        return Err(Error::contract("the unit ideal has no center"));
    }
    let blocks = res.filtration.blocks();
    if blocks.is_empty() {
        return Err(Error::contract("filtration has no blocks"));
    }
    let lcm = blocks
        .iter()
        .fold(BigInt::one(), |acc, b| acc.lcm(b.weight.denom()));
    let ints: Vec<BigInt> = blocks
        .iter()
        .map(|b| b.weight.numer() * (&lcm / b.weight.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let weights: Vec<u64> = ints
        .iter()
        .map(|x| (x / &g).to_u64())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Resource {
            msg: "center weights too large".into(),
            partial: None,
        })?;
    let d = res
        .invariant
        .d()
        .to_u64()
        .ok_or_else(|| Error::diagnostic("multiplicity is not a small integer"))?;
    Ok(Center {
        ring: res.filtration.ring().clone(),
        blocks: blocks
            .iter()
            .zip(&weights)
            .map(|(b, &w)| CenterBlock { vars: b.vars.clone(), weight: w })
            .collect(),
        threshold: d * weights[0],
        coord_change: res.coord_change.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMode {
    #[default]
    Controlled,
    Proper,
}

impl std::str::FromStr for TransformMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "controlled" => Ok(TransformMode::Controlled),
            "proper" => Ok(TransformMode::Proper),
            _ => Err(format!("unknown transform mode `{s}`")),
        }
    }
}

/// One chart of a weighted blow-up. The chart variable becomes `u^a`, the
/// other center variables `u^{a_k} * x'`, and the group `mu_a` acts with
/// weights `action`.
#[derive(Clone, Debug)]
pub struct Chart {
    /// (block, position in block) of the chart variable.
    pub index: (usize, usize),
    /// Name of the chart variable in the parent ring.
    pub chart_var: String,
    pub ring: Ring,
    /// Block coordinates of the parent to chart coordinates.
    pub map: CoordChange,
    /// Parent ambient coordinates to chart coordinates.
    pub substitution: CoordChange,
    pub group_order: u64,
    pub action: Vec<i64>,
    /// Exceptional variables of the chart with their multiplicities.
    pub exceptional_history: Vec<(String, u64)>,
    /// Parent variable index to chart variable index, for variables that
    /// survive as coordinates (primed or untouched).
    pub var_map: Vec<Option<usize>>,
}

impl Chart {
    pub fn u(&self) -> usize {
        0
    }

    /// Chart coordinates of a parent point given in block coordinates, when
    /// the point lies over `u != 0` in this chart and the needed root is
    /// rational.
    pub fn preimage(&self, p: &[Rat], c: &Center) -> Option<Vec<Rat>> {
        let (bi, bj) = self.index;
        let v = c.blocks[bi].vars[bj];
        let a = c.blocks[bi].weight;
        let u = rational_root(&p[v], a)?;
        if u.is_zero() {
            return None;
        }
        let mut out = vec![Rat::zero(); self.ring.len()];
        out[0] = u.clone();
        for (i, slot) in self.var_map.iter().enumerate() {
            let Some(k) = slot else { continue };
            out[*k] = match c.weight_of(i) {
                Some(ak) => &p[i] / u.pow(ak as u32),
                None => p[i].clone(),
            };
        }
        Some(out)
    }
}

impl Serialize for Chart {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut subst: Vec<(String, String)> = Vec::new();
        let src = self.map.source();
        for (i, img) in self.map.images().iter().enumerate() {
            let name = src.name(i);
            let unchanged = self.var_map[i]
                .map(|k| *img == Poly::var(&self.ring, k) && self.ring.name(k) == name)
                .unwrap_or(false);
            if !unchanged {
                subst.push((name.to_string(), img.to_string()));
            }
        }
        struct Ordered<'a>(&'a [(String, String)]);
        impl Serialize for Ordered<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("chart", &self.chart_var)?;
        m.serialize_entry("subst", &Ordered(&subst))?;
        m.serialize_entry("group_order", &self.group_order)?;
        m.serialize_entry("action", &self.action)?;
        m.end()
    }
}

/// Exact `a`-th root of a rational, if it exists.
pub fn rational_root(x: &Rat, a: u64) -> Option<Rat> {
    let a32 = a.to_u32()?;
    if a == 1 {
        return Some(x.clone());
    }
    if x.is_negative() && a.is_multiple_of(2) {
        return None;
    }
    let root_int = |n: &BigInt| -> Option<BigInt> {
        let r = n.abs().nth_root(a32);
        (num_traits::pow(r.clone(), a as usize) == n.abs()).then(|| if n.is_negative() { -r } else { r })
    };
    Some(Rat::new(root_int(x.numer())?, root_int(x.denom())?))
}

pub fn weighted_blowup(c: &Center) -> Result<Vec<Chart>> {
    if c.blocks.iter().all(|b| b.vars.is_empty()) {
        return Err(Error::structural("empty center"));
    }
    let parent = &c.ring;
    let n = parent.len();
    let center_vars = c.vars();
    let mut charts = Vec::new();
    for (bi, block) in c.blocks.iter().enumerate() {
        for (bj, &v) in block.vars.iter().enumerate() {
            // Build the chart ring: u, primed center variables, the rest.
            let mut names: Vec<String> = Vec::new();
            let mut var_map: Vec<Option<usize>> = vec![None; n];
            let mut action: Vec<i64> = vec![1];
            for i in (0..n).filter(|&i| center_vars.contains(&i) && i != v) {
                var_map[i] = Some(names.len() + 1);
                names.push(format!("{}'", parent.name(i)));
                action.push(-(c.weight_of(i).unwrap() as i64));
            }
            for i in (0..n).filter(|i| !center_vars.contains(i)) {
                var_map[i] = Some(names.len() + 1);
                names.push(parent.name(i).to_string());
                action.push(0);
            }
            let probe = Ring::new(&names)?;
            let u_name = probe.fresh_name("u");
            let mut all = vec![u_name.clone()];
            all.extend(names);
            let ring = Ring::new(&all)?;
            let u = Poly::var(&ring, 0);
            let images: Vec<Poly> = (0..n)
                .map(|i| {
                    if i == v {
                        u.pow(block.weight as u32)
                    } else {
                        let k = var_map[i].unwrap();
                        match c.weight_of(i) {
                            Some(a) => &u.pow(a as u32) * &Poly::var(&ring, k),
                            None => Poly::var(&ring, k),
                        }
                    }
                })
                .collect();
            let map = CoordChange::new(parent, &ring, images)?;
            let substitution = c.coord_change.compose(&map)?;
            charts.push(Chart {
                index: (bi, bj),
                chart_var: parent.name(v).to_string(),
                ring,
                map,
                substitution,
                group_order: block.weight,
                action,
                exceptional_history: vec![(u_name, c.threshold)],
                var_map,
            });
        }
    }
    Ok(charts)
}

/// Pull the generators through the chart and divide by the exceptional
/// parameter: by `u^threshold` (controlled) or by each generator's exact
/// power of `u` (proper).
pub fn transform(gens: &[Poly], ch: &Chart, c: &Center, mode: TransformMode) -> Result<Vec<Poly>> {
    if let Some(deg) = ch.substitution.images_truncated_at() {
        return Err(Error::contract(format!(
            "the chart substitution is a power series known to degree {deg}; \
             transform the generators in block coordinates instead"
        )));
    }
    pull_and_divide(gens, &ch.substitution, ch, c, mode)
}

/// As [`transform`], for generators already written in the block
/// coordinates of the center. Exact even when the center's coordinate
/// change is only known as a series.
pub fn transform_block(
    block_gens: &[Poly],
    ch: &Chart,
    c: &Center,
    mode: TransformMode,
) -> Result<Vec<Poly>> {
    pull_and_divide(block_gens, &ch.map, ch, c, mode)
}

fn pull_and_divide(
    gens: &[Poly],
    via: &CoordChange,
    ch: &Chart,
    c: &Center,
    mode: TransformMode,
) -> Result<Vec<Poly>> {
    gens.iter()
        .map(|g| {
            let h = via.apply(g)?;
            if h.is_zero() {
                return Ok(h);
            }
            let k = match mode {
                TransformMode::Controlled => c.threshold as u32,
                TransformMode::Proper => h.var_order(ch.u()),
            };
            h.div_var_pow(ch.u(), k).ok_or_else(|| {
                Error::contract(format!(
                    "pullback of `{g}` is not divisible by {}^{k}",
                    ch.ring.name(ch.u())
                ))
            })
        })
        .collect()
}

pub fn controlled_transform(gens: &[Poly], ch: &Chart, c: &Center) -> Result<Vec<Poly>> {
    transform(gens, ch, c, TransformMode::Controlled)
}

pub fn exceptional_restriction(transformed: &[Poly], ch: &Chart) -> Vec<Poly> {
    transformed
        .iter()
        .map(|f| f.set_var(ch.u(), &Rat::zero()))
        .collect()
}

/// Common character of the terms of `f` under the chart's group action,
/// as a residue modulo the group order; `None` if `f` is not semi-invariant.
pub fn character(f: &Poly, ch: &Chart) -> Option<u64> {
    let n = ch.group_order as i64;
    let chi = |m: &Mono| -> i64 {
        m.exps()
            .iter()
            .zip(&ch.action)
            .map(|(&e, &w)| e as i64 * w)
            .sum::<i64>()
            .rem_euclid(n)
    };
    let mut it = f.terms().map(|(m, _)| chi(m));
    let first = it.next().unwrap_or(0);
    it.all(|x| x == first).then_some(first as u64)
}
