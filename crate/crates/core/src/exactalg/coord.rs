use crate::error::{Error, Result};
use crate::linalg;

use super::mono::Mono;
use super::poly::Poly;
use super::rat::Rat;
use super::ring::Ring;

/// A polynomial map between coordinate systems.
///
/// `images[i]` expresses old variable `i` (of `source`) in the new
/// coordinates (of `target`); substituting them into a polynomial rewrites it
/// in the new coordinates. When present, `inverse[k]` expresses new variable
/// `k` in the old coordinates.
///
/// Either side may be a power series cut off at some total degree; the
/// `*_truncated_at` fields record the last degree that is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordChange {
    source: Ring,
    target: Ring,
    images: Vec<Poly>,
    inverse: Option<Vec<Poly>>,
    images_truncated_at: Option<u32>,
    inverse_truncated_at: Option<u32>,
}

fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl CoordChange {
    pub fn identity(ring: &Ring) -> CoordChange {
        let vars: Vec<Poly> = (0..ring.len()).map(|i| Poly::var(ring, i)).collect();
        CoordChange {
            source: ring.clone(),
            target: ring.clone(),
            images: vars.clone(),
            inverse: Some(vars),
            images_truncated_at: None,
            inverse_truncated_at: None,
        }
    }

    pub fn new(source: &Ring, target: &Ring, images: Vec<Poly>) -> Result<CoordChange> {
        if images.len() != source.len() {
            return Err(Error::structural(format!(
                "{} images for {} variables",
                images.len(),
                source.len()
            )));
        }
        for p in &images {
            target.ensure_same(p.ring())?;
        }
        Ok(CoordChange {
            source: source.clone(),
            target: target.clone(),
            images,
            inverse: None,
            images_truncated_at: None,
            inverse_truncated_at: None,
        })
    }

    pub fn with_inverse(mut self, inverse: Vec<Poly>) -> Result<CoordChange> {
        if inverse.len() != self.target.len() {
            return Err(Error::structural("inverse length differs from target ring"));
        }
        for p in &inverse {
            self.source.ensure_same(p.ring())?;
        }
        self.inverse = Some(inverse);
        Ok(self)
    }

    /// `x_i -> sum_j a[i][j] x_j`; fails on a singular matrix.
    pub fn linear(ring: &Ring, a: &[Vec<Rat>]) -> Result<CoordChange> {
        let n = ring.len();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::structural("matrix shape differs from ring"));
        }
        let inv = linalg::inverse(a)
            .ok_or_else(|| Error::contract("linear coordinate change is singular"))?;
        let lin = |m: &[Vec<Rat>]| -> Vec<Poly> {
            m.iter()
                .map(|row| {
                    Poly::from_terms(
                        ring,
                        row.iter()
                            .enumerate()
                            .map(|(j, c)| (Mono::var(n, j), c.clone())),
                    )
                })
                .collect()
        };
        Ok(CoordChange {
            source: ring.clone(),
            target: ring.clone(),
            images: lin(a),
            inverse: Some(lin(&inv)),
            images_truncated_at: None,
            inverse_truncated_at: None,
        })
    }

    /// `x -> x + p`, moving the point `p` to the origin of the new coordinates.
    pub fn translation(ring: &Ring, p: &[Rat]) -> Result<CoordChange> {
        if p.len() != ring.len() {
            return Err(Error::structural("point length differs from ring"));
        }
        let shift = |sign: i64| -> Vec<Poly> {
            p.iter()
                .enumerate()
                .map(|(i, c)| &Poly::var(ring, i) + &Poly::constant(ring, c * Rat::from(sign)))
                .collect()
        };
        Ok(CoordChange {
            source: ring.clone(),
            target: ring.clone(),
            images: shift(1),
            inverse: Some(shift(-1)),
            images_truncated_at: None,
            inverse_truncated_at: None,
        })
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    pub fn inverse(&self) -> Option<&[Poly]> {
        self.inverse.as_deref()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self
                .images
                .iter()
                .enumerate()
                .all(|(i, p)| *p == Poly::var(&self.target, i))
    }

    /// Rewrite `f` (in source coordinates) in target coordinates.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        self.source.ensure_same(f.ring())?;
        if self.source.is_empty() {
            return Ok(Poly::constant(&self.target, f.constant_term()));
        }
        f.substitute(&self.images)
    }

    pub fn apply_all(&self, fs: &[Poly]) -> Result<Vec<Poly>> {
        fs.iter().map(|f| self.apply(f)).collect()
    }

    /// Rewrite `g` (in target coordinates) back in source coordinates; needs
    /// a stored inverse.
    pub fn pull_back(&self, g: &Poly) -> Result<Poly> {
        self.target.ensure_same(g.ring())?;
        let inv = self
            .inverse
            .as_ref()
            .ok_or_else(|| Error::contract("coordinate change has no stored inverse"))?;
        g.substitute(inv)
    }

    /// First `self`, then `next`: the result maps the source of `self` to the
    /// target of `next`.
    pub fn compose(&self, next: &CoordChange) -> Result<CoordChange> {
        self.target.ensure_same(&next.source)?;
        let images = self
            .images
            .iter()
            .map(|p| next.apply(p))
            .collect::<Result<Vec<_>>>()?;
        let inverse = match (&self.inverse, &next.inverse) {
            (Some(a), Some(b)) => Some(
                b.iter()
                    .map(|p| {
                        if self.target.is_empty() {
                            Ok(Poly::constant(&self.source, p.constant_term()))
                        } else {
                            p.substitute(a)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Ok(CoordChange {
            source: self.source.clone(),
            target: next.target.clone(),
            images,
            inverse,
            images_truncated_at: min_trunc(self.images_truncated_at, next.images_truncated_at),
            inverse_truncated_at: min_trunc(self.inverse_truncated_at, next.inverse_truncated_at),
        })
    }

    /// The last exact degree of the images, if they are a truncated series.
    pub fn images_truncated_at(&self) -> Option<u32> {
        self.images_truncated_at
    }

    pub fn inverse_truncated_at(&self) -> Option<u32> {
        self.inverse_truncated_at
    }

    /// The matrix of degree-one coefficients of the images.
    pub fn linear_part(&self) -> Vec<Vec<Rat>> {
        let n = self.target.len();
        self.images
            .iter()
            .map(|p| (0..n).map(|j| p.coeff(&Mono::var(n, j))).collect())
            .collect()
    }

    /// Inverse of the map up to total degree `deg`, for a square map fixing
    /// the origin with invertible linear part. Solves `tau = A^{-1}(x - N(tau))`
    /// by fixed-point iteration, where `A` is the linear part and `N` the
    /// higher-order part; each pass fixes one more degree.
    pub fn truncated_inverse(&self, deg: u32) -> Result<Vec<Poly>> {
        let n = self.source.len();
        if self.target.len() != n {
            return Err(Error::contract("truncated inverse needs a square map"));
        }
        if self.images.iter().any(Poly::is_unit_at_origin) {
            return Err(Error::contract("truncated inverse needs images without constant terms"));
        }
        let a = self.linear_part();
        let a_inv = linalg::inverse(&a)
            .ok_or_else(|| Error::contract("linear part of coordinate change is singular"))?;
        let nonlinear: Vec<Poly> = self
            .images
            .iter()
            .map(|p| p.filter_terms(|m| m.degree() >= 2))
            .collect();
        // tau lives in the source ring: new coordinates as functions of old.
        let src = &self.source;
        let xs: Vec<Poly> = (0..n).map(|i| Poly::var(src, i)).collect();
        let combine = |rhs: &[Poly]| -> Vec<Poly> {
            a_inv
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(rhs)
                        .fold(Poly::zero(src), |acc, (c, p)| &acc + &p.scale(c))
                })
                .collect()
        };
        let mut tau = combine(&xs);
        for _ in 1..deg.max(1) {
            let mut rhs = Vec::with_capacity(n);
            for (x, nl) in xs.iter().zip(&nonlinear) {
                // N evaluated at tau, relabelled from target to source ring.
                let nl_src = nl.relabel(src, &(0..n).collect::<Vec<_>>());
                let v = nl_src.substitute(&tau)?.truncate(deg);
                rhs.push(x - &v);
            }
            tau = combine(&rhs).into_iter().map(|p| p.truncate(deg)).collect();
        }
        Ok(tau)
    }

    pub fn with_truncated_inverse(mut self, deg: u32) -> Result<CoordChange> {
        if self.inverse.is_none() {
            let inv = self.truncated_inverse(deg)?;
            let exact = inv.iter().enumerate().all(|(k, p)| {
                p.substitute(&self.images)
                    .is_ok_and(|q| q == Poly::var(&self.target, k))
            });
            self.inverse = Some(inv);
            if !exact {
                self.inverse_truncated_at = Some(deg);
            }
        }
        Ok(self)
    }

    /// Swap directions; needs a stored inverse.
    pub fn invert(&self) -> Option<CoordChange> {
        self.inverse.as_ref().map(|inv| CoordChange {
            source: self.target.clone(),
            target: self.source.clone(),
            images: inv.clone(),
            inverse: Some(self.images.clone()),
            images_truncated_at: self.inverse_truncated_at,
            inverse_truncated_at: self.images_truncated_at,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;

    #[test]
    fn composition_keeps_inverses_consistent() {
        let r = Ring::of(&["x", "y"]);
        let p = |s: &str| parse_poly(s, &r).unwrap();
        let a = CoordChange::new(&r, &r, vec![p("x - y^2"), p("y")])
            .unwrap()
            .with_inverse(vec![p("x + y^2"), p("y")])
            .unwrap();
        let b = CoordChange::linear(
            &r,
            &[vec![Rat::from(1), Rat::from(1)], vec![Rat::from(0), Rat::from(1)]],
        )
        .unwrap();
        let c = a.compose(&b).unwrap();
        let f = p("x^3 + x*y + y^5");
        let g = c.apply(&f).unwrap();
        assert_eq!(c.pull_back(&g).unwrap(), f);
    }

    #[test]
    fn truncated_inverse_of_triangular_map() {
        let r = Ring::of(&["x", "y"]);
        let p = |s: &str| parse_poly(s, &r).unwrap();
        let c = CoordChange::new(&r, &r, vec![p("x + y^2"), p("2*y")]).unwrap();
        let inv = c.truncated_inverse(4).unwrap();
        assert_eq!(inv[0], p("x - 1/4*y^2"));
        assert_eq!(inv[1], p("1/2*y"));
    }

    #[test]
    fn translation_round_trip() {
        let r = Ring::of(&["x", "y"]);
        let t = CoordChange::translation(&r, &[Rat::from(0), Rat::from(1)]).unwrap();
        let f = parse_poly("x^2 + y^2*x", &r).unwrap();
        let g = t.apply(&f).unwrap();
        assert_eq!(g, parse_poly("x^2 + x*y^2 + 2*x*y + x", &r).unwrap());
        assert_eq!(t.pull_back(&g).unwrap(), f);
    }

    #[test]
    fn singular_linear_change_rejected() {
        let r = Ring::of(&["x", "y"]);
        let m = vec![vec![Rat::from(1), Rat::from(2)], vec![Rat::from(2), Rat::from(4)]];
        assert!(CoordChange::linear(&r, &m).is_err());
    }
}
