//! Weighted filtrations by coordinate blocks, weighted orders, initial forms
//! and the sets of candidate weights.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactalg::{CoordChange, Mono, Poly, Rat, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub vars: Vec<usize>,
    pub weight: Rat,
}

/// Blocks of coordinates with strictly decreasing weights, plus a residual
/// block of weight 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WFiltration {
    ring: Ring,
    blocks: Vec<Block>,
    residual: Vec<usize>,
    coord_change: CoordChange,
}

impl WFiltration {
    pub fn new(
        ring: &Ring,
        blocks: Vec<Block>,
        residual: Vec<usize>,
        coord_change: CoordChange,
    ) -> Result<WFiltration> {
        let n = ring.len();
        let mut seen = vec![false; n];
        for v in blocks.iter().flat_map(|b| &b.vars).chain(&residual) {
            if *v >= n || seen[*v] {
                return Err(Error::structural(format!(
                    "filtration blocks do not partition the variables (index {v})"
                )));
            }
            seen[*v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::structural("filtration blocks miss a variable"));
        }
        for b in &blocks {
            if !b.weight.is_positive() {
                return Err(Error::structural("block weight must be positive"));
            }
        }
        if blocks.windows(2).any(|w| w[0].weight <= w[1].weight) {
            return Err(Error::structural("block weights must strictly decrease"));
        }
        if let Some(last) = blocks.last() {
            if last.weight < Rat::one() {
                return Err(Error::structural("last block weight must be at least 1"));
            }
        }
        coord_change.target().ensure_same(ring)?;
        Ok(WFiltration {
            ring: ring.clone(),
            blocks,
            residual,
            coord_change,
        })
    }

    /// All coordinates in the residual block: the order filtration.
    pub fn m_adic(ring: &Ring) -> WFiltration {
        WFiltration {
            ring: ring.clone(),
            blocks: Vec::new(),
            residual: (0..ring.len()).collect(),
            coord_change: CoordChange::identity(ring),
        }
    }

    /// Filtration from explicit per-block weights with everything else in the
    /// residual. Handy for tests and one-off weight vectors.
    pub fn from_blocks(ring: &Ring, blocks: Vec<Block>) -> Result<WFiltration> {
        let used: Vec<usize> = blocks.iter().flat_map(|b| b.vars.clone()).collect();
        let residual = (0..ring.len()).filter(|v| !used.contains(v)).collect();
        WFiltration::new(ring, blocks, residual, CoordChange::identity(ring))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    pub fn coord_change(&self) -> &CoordChange {
        &self.coord_change
    }

    /// Weight of every variable, by index.
    pub fn weights(&self) -> Vec<Rat> {
        let mut w = vec![Rat::one(); self.ring.len()];
        for b in &self.blocks {
            for &v in &b.vars {
                w[v] = b.weight.clone();
            }
        }
        w
    }

    pub fn block_weights(&self) -> Vec<Rat> {
        self.blocks.iter().map(|b| b.weight.clone()).collect()
    }

    pub fn min_weight(&self) -> Rat {
        self.weights().into_iter().min().unwrap_or_else(Rat::one)
    }

    /// Variables carrying the minimal weight, in index order.
    pub fn min_weight_vars(&self) -> Vec<usize> {
        let w = self.weights();
        let min = self.min_weight();
        (0..w.len()).filter(|&i| w[i] == min).collect()
    }

    /// Same blocks with every variable renamed through `perm` (old index ->
    /// new index) into `ring`.
    pub fn permuted(&self, ring: &Ring, perm: &[usize]) -> WFiltration {
        let map = |vs: &[usize]| {
            let mut v: Vec<usize> = vs.iter().map(|&i| perm[i]).collect();
            v.sort_unstable();
            v
        };
        WFiltration {
            ring: ring.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    vars: map(&b.vars),
                    weight: b.weight.clone(),
                })
                .collect(),
            residual: map(&self.residual),
            coord_change: CoordChange::identity(ring),
        }
    }
}

struct NamedBlock<'a>(&'a Ring, &'a Block);

impl Serialize for NamedBlock<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Block", 2)?;
        let names: Vec<&str> = self.1.vars.iter().map(|&v| self.0.name(v)).collect();
        st.serialize_field("vars", &names)?;
        st.serialize_field("weight", &self.1.weight)?;
        st.end()
    }
}

impl Serialize for WFiltration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        let blocks: Vec<NamedBlock> = self.blocks.iter().map(|b| NamedBlock(&self.ring, b)).collect();
        m.serialize_entry("blocks", &blocks)?;
        let residual: Vec<&str> = self.residual.iter().map(|&v| self.ring.name(v)).collect();
        m.serialize_entry("residual", &residual)?;
        m.end()
    }
}

pub fn mono_weight(m: &Mono, weights: &[Rat]) -> Rat {
    m.exps()
        .iter()
        .zip(weights)
        .filter(|(e, _)| **e > 0)
        .fold(Rat::zero(), |acc, (&e, w)| acc + w * Rat::from(e as i64))
}

/// Minimum weight of a term of `f`; `None` stands for infinity (f = 0).
pub fn order_with_weights(f: &Poly, weights: &[Rat]) -> Option<Rat> {
    f.terms().map(|(m, _)| mono_weight(m, weights)).min()
}

pub fn weighted_order(f: &Poly, filt: &WFiltration) -> Option<Rat> {
    order_with_weights(f, &filt.weights())
}

/// Smallest total order among the generators; `None` if all vanish.
pub fn ideal_multiplicity(gens: &[Poly]) -> Result<Option<u32>> {
    if gens.is_empty() {
        return Err(Error::structural("empty generator list"));
    }
    Ok(gens.iter().filter_map(Poly::order).min())
}

pub fn initial_form_with_weights(f: &Poly, weights: &[Rat], threshold: &Rat) -> Result<Poly> {
    if let Some(o) = order_with_weights(f, weights) {
        if &o < threshold {
            return Err(Error::contract(format!(
                "weighted order {o} is below threshold {threshold}"
            )));
        }
    }
    Ok(f.filter_terms(|m| &mono_weight(m, weights) == threshold))
}

/// Part of `f` of weight exactly `threshold`; every term must weigh at least
/// that much.
pub fn initial_form(f: &Poly, filt: &WFiltration, threshold: &Rat) -> Result<Poly> {
    initial_form_with_weights(f, &filt.weights(), threshold)
}

/// All monomials of weight exactly `q`, in ascending monomial order.
pub fn basis_with_weights(weights: &[Rat], q: &Rat) -> Vec<Mono> {
    let n = weights.len();
    let mut out = Vec::new();
    if q.is_negative() {
        return out;
    }
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: &Rat, w: &[Rat], cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if i == w.len() {
            if left.is_zero() {
                out.push(Mono::new(cur.clone()));
            }
            return;
        }
        let max = (left / &w[i]).floor().to_u32().unwrap_or(0);
        for e in 0..=max {
            cur[i] = e;
            let rest = left - &w[i] * Rat::from(e as i64);
            rec(i + 1, &rest, w, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, q, weights, &mut cur, &mut out);
    out.sort();
    out
}

pub fn graded_piece_basis(filt: &WFiltration, q: &Rat) -> Vec<Mono> {
    basis_with_weights(&filt.weights(), q)
}

/// An element `H` of the candidate set together with the integers
/// witnessing `H * (sum g^i a_i) + beta = H * g^0 * d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaSolution {
    pub h: Rat,
    pub alpha: Vec<u32>,
    pub beta: BigInt,
}

impl ThetaSolution {
    /// Check the defining equality and the strict inequality on `alpha`.
    pub fn holds(&self, block_weights: &[Rat], d: u32) -> bool {
        if self.alpha.len() != block_weights.len() || block_weights.is_empty() {
            return false;
        }
        let top = &block_weights[0] * Rat::from(d as i64);
        let s = self
            .alpha
            .iter()
            .zip(block_weights)
            .fold(Rat::zero(), |acc, (&a, g)| acc + g * Rat::from(a as i64));
        s < top && &self.h * &s + Rat::from_int(self.beta.clone()) == &self.h * &top
    }
}

impl Serialize for ThetaSolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("H", &self.h)?;
        m.serialize_entry("alpha", &self.alpha)?;
        m.serialize_entry("beta", &self.beta.to_string())?;
        m.end()
    }
}

/// The discrete set of candidate weights `H = beta / (g^0 d - sum g^i a_i)`
/// with `H > 1`, for fixed block weights and multiplicity.
#[derive(Clone, Debug)]
pub struct Theta {
    block_weights: Vec<Rat>,
    d: u32,
    /// Each attainable gap `g^0 d - sum g^i a_i > 0` with its smallest `alpha`.
    gaps: Vec<(Rat, Vec<u32>)>,
}

impl Theta {
    pub fn new(block_weights: &[Rat], d: u32) -> Result<Theta> {
        if d == 0 || block_weights.is_empty() {
            return Err(Error::contract("candidate weights need d >= 1 and a block"));
        }
        let top = &block_weights[0] * Rat::from(d as i64);
        let mut gaps: BTreeMap<Rat, Vec<u32>> = BTreeMap::new();
        let mut cur = vec![0u32; block_weights.len()];
        // Lexicographic enumeration means the first alpha seen per gap is the
        // smallest one.
        fn rec(
            i: usize,
            left: &Rat,
            w: &[Rat],
            cur: &mut Vec<u32>,
            gaps: &mut BTreeMap<Rat, Vec<u32>>,
        ) {
            if i == w.len() {
                if left.is_positive() {
                    gaps.entry(left.clone()).or_insert_with(|| cur.clone());
                }
                return;
            }
            let mut e = 0u32;
            loop {
                let rest = left - &w[i] * Rat::from(e as i64);
                if !rest.is_positive() {
                    break;
                }
                cur[i] = e;
                rec(i + 1, &rest, w, cur, gaps);
                e += 1;
            }
            cur[i] = 0;
        }
        rec(0, &top, block_weights, &mut cur, &mut gaps);
        Ok(Theta {
            block_weights: block_weights.to_vec(),
            d,
            gaps: gaps.into_iter().collect(),
        })
    }

    pub fn block_weights(&self) -> &[Rat] {
        &self.block_weights
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Smallest element strictly greater than `max(after, 1)`.
    pub fn next_after(&self, after: &Rat) -> ThetaSolution {
        let after = if after < &Rat::one() { Rat::one() } else { after.clone() };
        let mut best: Option<ThetaSolution> = None;
        for (gap, alpha) in &self.gaps {
            let beta: BigInt = (&after * gap).floor() + BigInt::from(1);
            let h = Rat::from_int(beta.clone()) / gap;
            let cand = ThetaSolution {
                h,
                alpha: alpha.clone(),
                beta,
            };
            best = Some(match best {
                None => cand,
                Some(b) => {
                    if cand.h < b.h
                        || (cand.h == b.h && (&cand.alpha, &cand.beta) < (&b.alpha, &b.beta))
                    {
                        cand
                    } else {
                        b
                    }
                }
            });
        }
        best.expect("at least the zero alpha gives a positive gap")
    }

    /// All elements in `(1, upto]`, ascending.
    pub fn up_to(&self, upto: &Rat) -> Vec<ThetaSolution> {
        let mut out = Vec::new();
        let mut cur = Rat::one();
        loop {
            let next = self.next_after(&cur);
            if &next.h > upto {
                return out;
            }
            cur = next.h.clone();
            out.push(next);
        }
    }
}

/// Elements of the candidate set for the blocks of `filt`, in `(1, upto]`.
pub fn theta_enumerate(filt: &WFiltration, d: u32, upto: &Rat) -> Result<Vec<ThetaSolution>> {
    Ok(Theta::new(&filt.block_weights(), d)?.up_to(upto))
}
