//! The resolution invariant: induction over blocks, the sub-induction over
//! candidate weights, comparison, integerization and the dimension shift.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::contact::{full_contact_module, straighten_all};
use crate::error::{Error, Partial, Result};
use crate::exactalg::{CoordChange, Mono, Poly, Rat, Ring};
use crate::filtration::{
    ideal_multiplicity, initial_form_with_weights, mono_weight, Block, Theta, ThetaSolution,
    WFiltration,
};

/// Default ceiling on candidate weights examined per level.
pub const DEFAULT_MAX_THETA_STEPS: usize = 10_000;

/// Environment variable overriding [`DEFAULT_MAX_THETA_STEPS`].
pub const THETA_STEPS_ENV: &str = "WRES_MAX_THETA_STEPS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Termination {
    EarlyZero,
    BlocksExhausted,
    Converged,
    UnitIdeal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Invariant {
    pub entries: Vec<Rat>,
    pub terminated_by: Termination,
}

impl Invariant {
    pub fn zero(m: usize) -> Invariant {
        Invariant {
            entries: vec![Rat::zero(); 2 * m],
            terminated_by: Termination::UnitIdeal,
        }
    }

    /// Number of ambient variables the invariant was computed in.
    pub fn dim(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn d(&self) -> &Rat {
        &self.entries[0]
    }

    /// `g_t` for `t >= 1`, or `d` for `t = 0`.
    pub fn g(&self, t: usize) -> &Rat {
        &self.entries[2 * t]
    }

    pub fn l(&self, t: usize) -> &Rat {
        &self.entries[2 * t + 1]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Rat::is_zero)
    }

    /// Entries with trailing zeros trimmed to whole pairs.
    pub fn trimmed(&self) -> &[Rat] {
        let mut end = self.entries.len();
        while end >= 2 && self.entries[end - 1].is_zero() && self.entries[end - 2].is_zero() {
            end -= 2;
        }
        &self.entries[..end]
    }
}

impl std::fmt::Display for Invariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(Rat::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for Invariant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("entries", &self.entries)?;
        m.serialize_entry("terminated_by", &self.terminated_by)?;
        m.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub s: usize,
    pub h: Rat,
    pub case: Case,
}

impl Serialize for TraceStep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("s", &self.s)?;
        m.serialize_entry("H", &self.h)?;
        m.serialize_entry("case", &self.case)?;
        m.end()
    }
}

/// A new block weight together with the data that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub s: usize,
    /// Block weights of the filtration before the new block was split off.
    pub block_weights: Vec<Rat>,
    pub d: u32,
    pub solution: ThetaSolution,
}

impl Witness {
    pub fn holds(&self) -> bool {
        self.solution.holds(&self.block_weights, self.d)
    }
}

/// Counters gathered along one run, for diagnostics and acceptance checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub theta_steps: usize,
    pub max_theta_steps_per_level: usize,
    /// Number of realizable weights confirmed to carry no annihilating field.
    pub vanishing_checks: usize,
    pub contact_modules: usize,
}

#[derive(Clone, Debug)]
pub struct InvariantResult {
    pub invariant: Invariant,
    pub filtration: WFiltration,
    /// Original coordinates to block coordinates.
    pub coord_change: CoordChange,
    /// Generators rewritten in block coordinates.
    pub generators: Vec<Poly>,
    pub witnesses: Vec<Witness>,
    pub trace: Vec<TraceStep>,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub struct InvariantOptions {
    pub max_theta_steps: usize,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        let max_theta_steps = std::env::var(THETA_STEPS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_THETA_STEPS);
        InvariantOptions { max_theta_steps }
    }
}

pub fn lex_compare(a: &Invariant, b: &Invariant) -> Result<Ordering> {
    if a.entries.len() != b.entries.len() {
        return Err(Error::structural(format!(
            "cannot compare invariants of lengths {} and {}",
            a.entries.len(),
            b.entries.len()
        )));
    }
    Ok(a.entries.cmp(&b.entries))
}

/// Largest factorial argument `denominator_bound` will evaluate.
pub const MAX_FACTORIAL_ARG: u64 = 100_000;

fn factorial(n: u64) -> BigInt {
    fn prod(lo: u64, hi: u64) -> BigInt {
        if hi - lo < 16 {
            (lo..=hi).fold(BigInt::one(), |acc, k| acc * k)
        } else {
            let mid = lo + (hi - lo) / 2;
            prod(lo, mid) * prod(mid + 1, hi)
        }
    }
    if n < 2 {
        BigInt::one()
    } else {
        prod(2, n)
    }
}

/// Integer `D` with `D * g` integral for every legal next entry `g` after the
/// prefix `(d, g_1, ..., g_{t-1})`: `D_t = (D_1 ... D_{t-1} * d * g_1 ... g_{t-1})!`.
pub fn denominator_bound(g_prefix: &[Rat]) -> Result<BigInt> {
    let Some((d, gs)) = g_prefix.split_first() else {
        return Ok(BigInt::one());
    };
    if !d.is_integer() || d.is_negative() {
        return Err(Error::diagnostic("first invariant entry must be a non-negative integer"));
    }
    let mut prod_d = BigInt::one();
    let mut prod_g = Rat::one();
    // D_1 = d!, then each step folds in the previous bound and entry.
    let mut bound = fact_of(&Rat::from_int(d.numer().clone()))?;
    for g in gs {
        prod_d *= &bound;
        prod_g *= g;
        let arg = Rat::from_int(prod_d.clone()) * d * &prod_g;
        bound = fact_of(&arg)?;
    }
    Ok(bound)
}

fn fact_of(arg: &Rat) -> Result<BigInt> {
    let n = arg
        .to_integer()
        .ok_or_else(|| Error::diagnostic(format!("denominator bound argument {arg} is not integral")))?;
    let n = n
        .to_u64()
        .filter(|&n| n <= MAX_FACTORIAL_ARG)
        .ok_or_else(|| Error::Resource {
            msg: format!("denominator bound needs ({n})!, beyond the supported size"),
            partial: None,
        })?;
    Ok(factorial(n))
}

/// Scale every entry by the denominator bound of its prefix; the result is an
/// integer vector ordered exactly like the invariants.
pub fn integerize(inv: &Invariant) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(inv.entries.len());
    for (i, e) in inv.entries.iter().enumerate() {
        let scaled = if e.is_zero() {
            Rat::zero()
        } else if i % 2 == 1 || i == 0 {
            e.clone()
        } else {
            let prefix: Vec<Rat> = (0..i / 2).map(|t| inv.g(t).clone()).collect();
            e * Rat::from_int(denominator_bound(&prefix)?)
        };
        out.push(scaled.to_integer().ok_or_else(|| {
            Error::diagnostic(format!("entry {i} of {inv} does not integerize ({scaled})"))
        })?);
    }
    Ok(out)
}

/// Shift of the `l` entries for an ambient dimension grown by `eps`.
pub fn diff_correction(eps: usize, inv: &Invariant) -> Invariant {
    let m = inv.dim();
    let mut entries = inv.entries.clone();
    entries.resize(2 * (m + eps), Rat::zero());
    let mut terminated_by = inv.terminated_by;
    if eps == 0 {
        return Invariant { entries, terminated_by };
    }
    let t = (0..m).find(|&t| inv.l(t).is_zero()).unwrap_or(m);
    let g_t = if t < m { inv.g(t).clone() } else { Rat::zero() };
    let upto = if !g_t.is_zero() {
        Some(t)
    } else if t >= 1 {
        Some(t - 1)
    } else {
        None
    };
    let Some(upto) = upto else {
        return Invariant { entries, terminated_by };
    };
    let e = Rat::from(eps as i64);
    for k in 0..=upto {
        entries[2 * k + 1] = &entries[2 * k + 1] + &e;
    }
    if !g_t.is_zero() {
        // The new variables stay in the residual block for ever.
        terminated_by = Termination::Converged;
    }
    Invariant { entries, terminated_by }
}

fn weights_for(n: usize, blocks: &[Vec<usize>], gw: &[Rat], h: &Rat) -> Vec<Rat> {
    let mut w = vec![Rat::one(); n];
    for (vars, g) in blocks.iter().zip(gw) {
        for &v in vars {
            w[v] = h * g;
        }
    }
    w
}

/// Whether some term `X^E Y^Q` with `Q != 0` has `wt(E) < g^0 d` under the
/// block weights: only such terms can still enter an initial form.
fn has_active_term(gens: &[Poly], blocks: &[Vec<usize>], gw: &[Rat], residual: &[usize], top: &Rat) -> bool {
    let n = gens.first().map_or(0, Poly::nvars);
    let mut w = vec![Rat::zero(); n];
    for (vars, g) in blocks.iter().zip(gw) {
        for &v in vars {
            w[v] = g.clone();
        }
    }
    gens.iter().any(|f| {
        f.terms().any(|(m, _)| {
            residual.iter().any(|&y| m.exps()[y] > 0) && &mono_weight(m, &w) < top
        })
    })
}

pub fn compute_invariant(gens: &[Poly], m: usize) -> Result<InvariantResult> {
    compute_invariant_with(gens, m, &InvariantOptions::default())
}

pub fn compute_invariant_with(
    gens: &[Poly],
    m: usize,
    opts: &InvariantOptions,
) -> Result<InvariantResult> {
    let Some(first) = gens.first() else {
        return Err(Error::structural("empty generator list"));
    };
    let ring: Ring = first.ring().clone();
    for g in gens {
        ring.ensure_same(g.ring())?;
    }
    if ring.len() != m {
        return Err(Error::structural(format!(
            "ambient dimension {m} differs from ring {ring}"
        )));
    }
    let Some(d) = ideal_multiplicity(gens)? else {
        return Err(Error::Input("the zero ideal has no invariant".into()));
    };
    let mut stats = Stats::default();
    let identity = CoordChange::identity(&ring);
    if d == 0 {
        return Ok(InvariantResult {
            invariant: Invariant::zero(m),
            filtration: WFiltration::m_adic(&ring),
            coord_change: identity,
            generators: gens.to_vec(),
            witnesses: Vec::new(),
            trace: Vec::new(),
            stats,
        });
    }

    // Level zero: all weights one, initial forms are the degree-d parts.
    let f0 = WFiltration::m_adic(&ring);
    let v0: Vec<Poly> = gens.iter().map(|g| g.homogeneous_part(d)).filter(|p| !p.is_zero()).collect();
    let l0 = full_contact_module(&v0, &f0)?;
    stats.contact_modules += 1;
    stats.vanishing_checks += l0.vanishing_checked.len();
    let st = straighten_all(&l0, &f0)?;
    let mut gens: Vec<Poly> = st.change.apply_all(gens)?;
    let mut total = st.change.clone();
    let mut entries: Vec<Rat> = vec![Rat::from(d as i64), Rat::from(st.y.len() as i64)];
    let mut trace = Vec::new();
    let mut witnesses = Vec::new();

    if st.y.is_empty() {
        entries.resize(2 * m, Rat::zero());
        let filtration = WFiltration::new(
            &ring,
            vec![Block { vars: (0..m).collect(), weight: Rat::one() }],
            Vec::new(),
            total.clone(),
        )?;
        return Ok(InvariantResult {
            invariant: Invariant { entries, terminated_by: Termination::EarlyZero },
            filtration,
            coord_change: total,
            generators: gens,
            witnesses,
            trace,
            stats,
        });
    }

    // A single generator of order one cuts out a smooth germ, so the
    // generator itself becomes the block coordinate. Its inverse is a power
    // series in general and is kept truncated.
    let nonzero: Vec<usize> = (0..gens.len()).filter(|&i| !gens[i].is_zero()).collect();
    if d == 1 && nonzero.len() == 1 && st.z.len() == 1 {
        let j = st.z[0];
        let g = &gens[nonzero[0]];
        let c = g.coeff(&Mono::var(m, j));
        let mut new_in_old: Vec<Poly> = (0..m).map(|i| Poly::var(&ring, i)).collect();
        new_in_old[j] = g.scale(&c.recip());
        let deg = (2 * g.total_degree().unwrap_or(0)).max(4);
        let sigma = CoordChange::new(&ring, &ring, new_in_old)?
            .with_truncated_inverse(deg)?
            .invert()
            .expect("inverse was just attached");
        total = total.compose(&sigma)?;
        let gens: Vec<Poly> = gens
            .iter()
            .map(|p| if p.is_zero() { p.clone() } else { Poly::var(&ring, j).scale(&c) })
            .collect();
        entries.resize(2 * m, Rat::zero());
        let filtration = WFiltration::new(
            &ring,
            vec![Block { vars: vec![j], weight: Rat::one() }],
            st.y.clone(),
            total.clone(),
        )?;
        return Ok(InvariantResult {
            invariant: Invariant { entries, terminated_by: Termination::Converged },
            filtration,
            coord_change: total,
            generators: gens,
            witnesses,
            trace,
            stats,
        });
    }

    let mut blocks: Vec<Vec<usize>> = vec![st.z.clone()];
    let mut gw: Vec<Rat> = vec![Rat::one()];
    let mut residual: Vec<usize> = st.y.clone();
    let mut s = 1usize;
    let terminated_by;

    'levels: loop {
        let top = &gw[0] * Rat::from(d as i64);
        let theta = Theta::new(&gw, d)?;
        let mut h_prev = Rat::one();
        let mut steps = 0usize;
        loop {
            if !has_active_term(&gens, &blocks, &gw, &residual, &top) {
                terminated_by = Termination::Converged;
                break 'levels;
            }
            steps += 1;
            stats.theta_steps += 1;
            stats.max_theta_steps_per_level = stats.max_theta_steps_per_level.max(steps);
            if steps > opts.max_theta_steps {
                return Err(Error::Resource {
                    msg: format!(
                        "more than {} candidate weights examined at level {s}",
                        opts.max_theta_steps
                    ),
                    partial: Some(Partial::Trace(trace)),
                });
            }
            let sol = theta.next_after(&h_prev);
            let h = sol.h.clone();
            let w = weights_for(m, &blocks, &gw, &h);
            let threshold = &h * &top;
            let v: Vec<Poly> = gens
                .iter()
                .map(|g| initial_form_with_weights(g, &w, &threshold))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|p| !p.is_zero())
                .collect();
            let fh = WFiltration::new(
                &ring,
                blocks
                    .iter()
                    .zip(&gw)
                    .map(|(vars, g)| Block { vars: vars.clone(), weight: &h * g })
                    .collect(),
                residual.clone(),
                CoordChange::identity(&ring),
            )?;
            let l = full_contact_module(&v, &fh)?;
            stats.contact_modules += 1;
            stats.vanishing_checks += l.vanishing_checked.len();
            let st = straighten_all(&l, &fh)?;
            if !st.change.is_identity() {
                gens = st.change.apply_all(&gens)?;
                total = total.compose(&st.change)?;
            }
            if l.dim() < residual.len() {
                trace.push(TraceStep { s, h: h.clone(), case: Case::A });
                witnesses.push(Witness {
                    s,
                    block_weights: gw.clone(),
                    d,
                    solution: sol,
                });
                entries.push(h.clone());
                entries.push(Rat::from(st.y.len() as i64));
                gw = gw.iter().map(|g| g * &h).collect();
                gw.push(Rat::one());
                blocks.push(st.z.clone());
                residual = st.y.clone();
                if residual.is_empty() {
                    terminated_by = Termination::BlocksExhausted;
                    break 'levels;
                }
                s += 1;
                continue 'levels;
            }
            trace.push(TraceStep { s, h: h.clone(), case: Case::B });
            h_prev = h;
        }
    }

    entries.resize(2 * m, Rat::zero());
    let filtration = WFiltration::new(
        &ring,
        blocks
            .iter()
            .zip(&gw)
            .map(|(vars, g)| Block { vars: vars.clone(), weight: g.clone() })
            .collect(),
        residual,
        total.clone(),
    )?;
    Ok(InvariantResult {
        invariant: Invariant { entries, terminated_by },
        filtration,
        coord_change: total,
        generators: gens,
        witnesses,
        trace,
        stats,
    })
}
