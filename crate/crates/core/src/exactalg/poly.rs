use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

use super::mono::Mono;
use super::rat::Rat;
use super::ring::Ring;

/// Multivariate polynomial over the rationals. Zero coefficients are never
/// stored, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    ring: Ring,
    terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero(ring: &Ring) -> Poly {
        Poly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Ring, c: Rat) -> Poly {
        let mut p = Poly::zero(ring);
        if !c.is_zero() {
            p.terms.insert(Mono::one(ring.len()), c);
        }
        p
    }

    pub fn one(ring: &Ring) -> Poly {
        Poly::constant(ring, Rat::one())
    }

    pub fn var(ring: &Ring, i: usize) -> Poly {
        Poly::monomial(ring, Mono::var(ring.len(), i), Rat::one())
    }

    pub fn monomial(ring: &Ring, m: Mono, c: Rat) -> Poly {
        assert_eq!(m.len(), ring.len(), "monomial length differs from ring");
        let mut p = Poly::zero(ring);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Mono, Rat)>) -> Poly {
        let mut p = Poly::zero(ring);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.ring.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Mono::one(self.nvars()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Mono::is_one)
    }

    /// Whether the polynomial does not vanish at the origin.
    pub fn is_unit_at_origin(&self) -> bool {
        !self.constant_term().is_zero()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    /// Lowest total degree of a term; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).min()
    }

    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|m| m.exps()[j]).max().unwrap_or(0)
    }

    /// Whether variable `j` occurs in some term.
    pub fn involves(&self, j: usize) -> bool {
        self.terms.keys().any(|m| m.exps()[j] > 0)
    }

    pub(crate) fn add_term(&mut self, m: Mono, c: &Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.ring.ensure_same(&other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.ring.ensure_same(&other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.ring.ensure_same(&other.ring)?;
        let mut out = Poly::zero(&self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ring);
        }
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono) -> Poly {
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial(&self, j: usize) -> Poly {
        let mut out = Poly::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exps()[j];
            if e > 0 {
                out.add_term(m.with_exp(j, e - 1), &(c * Rat::from(e as i64)));
            }
        }
        out
    }

    /// Formal antiderivative in `x_j` with no `x_j`-free part.
    pub fn integrate(&self, j: usize) -> Poly {
        let mut out = Poly::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exps()[j] + 1;
            out.add_term(m.with_exp(j, e), &(c / Rat::from(e as i64)));
        }
        out
    }

    /// Ring homomorphism sending variable `i` to `images[i]`; the result lives
    /// in the ring shared by the images.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars() {
            return Err(Error::structural(format!(
                "substitution has {} images for {} variables",
                images.len(),
                self.nvars()
            )));
        }
        let target = match images.first() {
            Some(p) => p.ring.clone(),
            None => {
                // Constant polynomial in the empty ring.
                return Ok(self.clone());
            }
        };
        for p in images {
            target.ensure_same(&p.ring)?;
        }
        let mut cache: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::one(&target), p.clone()])
            .collect();
        let mut out = Poly::zero(&target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(&target, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let powers = &mut cache[i];
                while powers.len() <= e as usize {
                    let next = &powers[powers.len() - 1] * &powers[1];
                    powers.push(next);
                }
                t = &t * &powers[e as usize];
            }
            for (k, v) in t.terms {
                out.add_term(k, &v);
            }
        }
        Ok(out)
    }

    /// Replace `x_j` by the constant `value`, staying in the same ring.
    pub fn set_var(&self, j: usize, value: &Rat) -> Poly {
        let mut out = Poly::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exps()[j];
            out.add_term(m.with_exp(j, 0), &(c * value.pow(e)));
        }
        out
    }

    /// `f(x + p)`: moves the point `p` to the origin.
    pub fn translate(&self, p: &[Rat]) -> Result<Poly> {
        if p.len() != self.nvars() {
            return Err(Error::structural("point length differs from ring"));
        }
        if p.iter().all(Rat::is_zero) {
            return Ok(self.clone());
        }
        let images: Vec<Poly> = p
            .iter()
            .enumerate()
            .map(|(i, c)| &Poly::var(&self.ring, i) + &Poly::constant(&self.ring, c.clone()))
            .collect();
        self.substitute(&images)
    }

    pub fn eval(&self, p: &[Rat]) -> Result<Rat> {
        if p.len() != self.nvars() {
            return Err(Error::structural("point length differs from ring"));
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in p.iter().zip(m.exps()) {
                if e > 0 {
                    t *= &x.pow(e);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Terms of total degree at most `deg`.
    pub fn truncate(&self, deg: u32) -> Poly {
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, deg: u32) -> Poly {
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keep only the terms satisfying `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Mono) -> bool) -> Poly {
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Move into `target`, sending variable `i` to `target[map[i]]`.
    pub fn relabel(&self, target: &Ring, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars());
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; target.len()];
            for (i, &k) in m.exps().iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Mono::new(e), c);
        }
        out
    }

    /// Largest `k` such that `x_j^k` divides every term (0 for the zero polynomial).
    pub fn var_order(&self, j: usize) -> u32 {
        self.terms.keys().map(|m| m.exps()[j]).min().unwrap_or(0)
    }

    /// Divide by `x_j^k`; fails if some term has a smaller `x_j`-exponent.
    pub fn div_var_pow(&self, j: usize, k: u32) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exps()[j];
            if e < k {
                return None;
            }
            terms.insert(m.with_exp(j, e - k), c.clone());
        }
        Some(Poly {
            ring: self.ring.clone(),
            terms,
        })
    }

    /// Coefficients of a univariate polynomial in variable `j`, lowest degree
    /// first; `None` if another variable occurs.
    pub fn univariate_coeffs(&self, j: usize) -> Option<Vec<Rat>> {
        let mut out = vec![Rat::zero(); self.degree_in(j) as usize + 1];
        for (m, c) in &self.terms {
            if m.exps().iter().enumerate().any(|(i, &e)| i != j && e > 0) {
                return None;
            }
            out[m.exps()[j] as usize] = c.clone();
        }
        Some(out)
    }

    fn fmt_mono(&self, m: &Mono, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(self.ring.name(i))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                self.fmt_mono(m, f)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Operator forms panic on ambient mismatch; they are for internal code that
// has already established a shared ring. Public entry points validate first.
impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("ambient mismatch in add")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("ambient mismatch in sub")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("ambient mismatch in mul")
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&Rat::from(-1))
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;

    fn p(r: &Ring, s: &str) -> Poly {
        parse_poly(s, r).unwrap()
    }

    #[test]
    fn ring_ops_examples() {
        let r = Ring::of(&["x", "y"]);
        assert_eq!(&p(&r, "x+y") * &p(&r, "x-y"), p(&r, "x^2-y^2"));
        assert_eq!(&p(&r, "x^2+y^3") + &Poly::zero(&r), p(&r, "x^2+y^3"));
        assert_eq!(
            p(&r, "x^2+y^3").scale(&Rat::new(1, 2)),
            p(&r, "1/2*x^2+1/2*y^3")
        );
    }

    #[test]
    fn mismatch_is_structural() {
        let a = Poly::var(&Ring::of(&["x"]), 0);
        let b = Poly::var(&Ring::of(&["y"]), 0);
        assert!(matches!(a.checked_add(&b), Err(Error::Structural(_))));
    }

    #[test]
    fn substitution_examples() {
        let r = Ring::of(&["x", "y"]);
        let f = p(&r, "x^2");
        let images = vec![p(&r, "x+y^2"), p(&r, "y")];
        assert_eq!(f.substitute(&images).unwrap(), p(&r, "x^2+2*x*y^2+y^4"));
        let id = vec![Poly::var(&r, 0), Poly::var(&r, 1)];
        let g = p(&r, "x^2+y^3");
        assert_eq!(g.substitute(&id).unwrap(), g);
    }

    #[test]
    fn partials_and_integrals() {
        let r = Ring::of(&["x", "y", "z", "t"]);
        assert_eq!(p(&r, "x^2+y^3").partial(0), p(&r, "2*x"));
        assert!(p(&r, "x^2+y^3").partial(2).is_zero());
        assert_eq!(p(&r, "z^2*t^2").partial(3), p(&r, "2*z^2*t"));
        assert_eq!(p(&r, "y").integrate(1), p(&r, "1/2*y^2"));
        assert!(Poly::zero(&r).integrate(1).is_zero());
        assert_eq!(p(&r, "3*x*y^2").integrate(1), p(&r, "x*y^3"));
    }

    #[test]
    fn display_order_and_signs() {
        let r = Ring::of(&["x", "y"]);
        assert_eq!(p(&r, "y^2 + x*y + x^2").to_string(), "x^2 + x*y + y^2");
        assert_eq!(p(&r, "1 - 1/2*x^2").to_string(), "1 - 1/2*x^2");
        assert_eq!(p(&r, "-y").to_string(), "-y");
        assert_eq!(Poly::zero(&r).to_string(), "0");
    }

    #[test]
    fn translate_and_eval() {
        let r = Ring::of(&["x", "y"]);
        let f = p(&r, "x^2+y^2*x");
        let pt = [Rat::from(1), Rat::from(2)];
        let g = f.translate(&pt).unwrap();
        assert_eq!(g.constant_term(), f.eval(&pt).unwrap());
        assert_eq!(f.set_var(1, &Rat::from(2)), p(&r, "x^2+4*x"));
    }

    #[test]
    fn u_division() {
        let r = Ring::of(&["u", "y"]);
        let f = p(&r, "u^6+u^6*y^3");
        assert_eq!(f.var_order(0), 6);
        assert_eq!(f.div_var_pow(0, 6).unwrap(), p(&r, "1+y^3"));
        assert!(f.div_var_pow(0, 7).is_none());
    }
}
