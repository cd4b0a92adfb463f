use crate::error::{Error, Result};

use super::coord::CoordChange;
use super::poly::Poly;
use super::ring::Ring;

/// A vector field `sum_j coeffs[j] * d/dx_j` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    ring: Ring,
    coeffs: Vec<Poly>,
}

impl Derivation {
    pub fn new(ring: &Ring, coeffs: Vec<Poly>) -> Result<Derivation> {
        if coeffs.len() != ring.len() {
            return Err(Error::structural("derivation needs one coefficient per variable"));
        }
        for c in &coeffs {
            ring.ensure_same(c.ring())?;
        }
        Ok(Derivation {
            ring: ring.clone(),
            coeffs,
        })
    }

    pub fn zero(ring: &Ring) -> Derivation {
        Derivation {
            ring: ring.clone(),
            coeffs: vec![Poly::zero(ring); ring.len()],
        }
    }

    /// The coordinate derivative `d/dx_j`.
    pub fn partial(ring: &Ring, j: usize) -> Derivation {
        let mut d = Derivation::zero(ring);
        d.coeffs[j] = Poly::one(ring);
        d
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Poly {
        &self.coeffs[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Index `j` if this is exactly `d/dx_j`.
    pub fn as_coordinate(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..self.coeffs.len())
            .filter(|&j| !self.coeffs[j].is_zero())
            .collect();
        match nz.as_slice() {
            [j] if self.coeffs[*j] == Poly::one(&self.ring) => Some(*j),
            _ => None,
        }
    }

    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        self.ring.ensure_same(f.ring())?;
        let mut out = Poly::zero(&self.ring);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() || !f.involves(j) {
                continue;
            }
            out = &out + &(c * &f.partial(j));
        }
        Ok(out)
    }

    /// `[self, other] = self∘other - other∘self`.
    pub fn bracket(&self, other: &Derivation) -> Result<Derivation> {
        self.ring.ensure_same(&other.ring)?;
        let coeffs = (0..self.coeffs.len())
            .map(|k| Ok(&self.apply(&other.coeffs[k])? - &other.apply(&self.coeffs[k])?))
            .collect::<Result<Vec<_>>>()?;
        Derivation::new(&self.ring, coeffs)
    }

    /// Express the field in the target coordinates of `sigma`. The new
    /// coefficient of `d/dy_k` is `D(y_k)` with `y_k` written in old
    /// coordinates, then rewritten in new ones.
    pub fn pushforward(&self, sigma: &CoordChange) -> Result<Derivation> {
        self.ring.ensure_same(sigma.source())?;
        let inv = sigma
            .inverse()
            .ok_or_else(|| Error::contract("pushforward needs an invertible coordinate change"))?;
        let coeffs = inv
            .iter()
            .map(|yk| sigma.apply(&self.apply(yk)?))
            .collect::<Result<Vec<_>>>()?;
        Derivation::new(sigma.target(), coeffs)
    }

    pub fn scale(&self, c: &super::rat::Rat) -> Derivation {
        Derivation {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        Derivation {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::fmt::Display for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.num_terms() > 1 {
                write!(f, "({c})*d_{}", self.ring.name(j))?;
            } else if *c == Poly::one(&self.ring) {
                write!(f, "d_{}", self.ring.name(j))?;
            } else {
                write!(f, "{c}*d_{}", self.ring.name(j))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
