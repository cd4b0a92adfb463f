//! Modules of negative-weight derivations killing a graded space, their
//! annihilator block and the straightening coordinate changes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::exactalg::{CoordChange, Derivation, Mono, Poly, Rat, Ring};
use crate::filtration::{basis_with_weights, mono_weight, WFiltration};
use crate::linalg;

/// Basis of weight-homogeneous derivations of weight `weight` (negative).
#[derive(Clone, Debug)]
pub struct DerivationModule {
    pub basis: Vec<Derivation>,
    pub weight: Rat,
    pub filtration: WFiltration,
    /// Other realizable weights `-b` at which the module was checked to vanish.
    pub vanishing_checked: Vec<Rat>,
}

impl DerivationModule {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }
}

fn homogeneous_weight(f: &Poly, w: &[Rat]) -> Result<Option<Rat>> {
    let mut it = f.terms().map(|(m, _)| mono_weight(m, w));
    let Some(first) = it.next() else {
        return Ok(None);
    };
    if it.any(|q| q != first) {
        return Err(Error::contract(format!(
            "`{f}` is not weight-homogeneous"
        )));
    }
    Ok(Some(first))
}

/// Unknowns of the linear system at weight `-b`: pairs (variable, monomial
/// coefficient). Constant coefficients on minimal-weight variables come
/// first so that echelon pivots land on them whenever possible.
fn unknowns(filt: &WFiltration, b: &Rat) -> Vec<(usize, Mono)> {
    let w = filt.weights();
    let n = w.len();
    let min_vars = filt.min_weight_vars();
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for j in 0..n {
        let q = &w[j] - b;
        if q.is_negative() {
            continue;
        }
        for m in basis_with_weights(&w, &q) {
            if m.is_one() && min_vars.contains(&j) {
                head.push((j, m));
            } else {
                tail.push((j, m));
            }
        }
    }
    head.extend(tail);
    head
}

/// Derivations of weight `-b` annihilating every element of `v`.
pub fn negative_derivations(v: &[Poly], filt: &WFiltration, b: &Rat) -> Result<DerivationModule> {
    if !b.is_positive() {
        return Err(Error::contract("derivation weight must be negative"));
    }
    let ring = filt.ring();
    let w = filt.weights();
    for f in v {
        ring.ensure_same(f.ring())?;
        homogeneous_weight(f, &w)?;
    }
    let cols = unknowns(filt, b);
    let ncols = cols.len();
    let mut row_of: BTreeMap<Mono, usize> = BTreeMap::new();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for f in v.iter().filter(|f| !f.is_zero()) {
        // Each equation is a coefficient of D(f); rows are local to f.
        row_of.clear();
        let start = rows.len();
        let partials: Vec<Poly> = (0..ring.len()).map(|j| f.partial(j)).collect();
        for (c, (j, mu)) in cols.iter().enumerate() {
            for (m, a) in partials[*j].terms() {
                let key = m.mul(mu);
                let r = *row_of.entry(key).or_insert_with(|| {
                    rows.push(vec![Rat::zero(); ncols]);
                    rows.len() - 1
                });
                debug_assert!(r >= start);
                rows[r][c] += a;
            }
        }
    }
    let ker = linalg::kernel(&rows, ncols);
    let (basis_rows, _) = linalg::rref(&ker, ncols);
    let basis = basis_rows
        .iter()
        .map(|row| {
            let mut coeffs = vec![Poly::zero(ring); ring.len()];
            for (c, (j, mu)) in cols.iter().enumerate() {
                if !row[c].is_zero() {
                    coeffs[*j] = &coeffs[*j] + &Poly::monomial(ring, mu.clone(), row[c].clone());
                }
            }
            Derivation::new(ring, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivationModule {
        basis,
        weight: -b,
        filtration: filt.clone(),
        vanishing_checked: Vec::new(),
    })
}

/// Every `b > 0` for which derivations of weight `-b` exist at all.
pub fn realizable_weights(filt: &WFiltration) -> Vec<Rat> {
    let w = filt.weights();
    let Some(top) = w.iter().max().cloned() else {
        return Vec::new();
    };
    let mut reach: BTreeSet<Rat> = BTreeSet::new();
    let mut frontier = vec![Rat::zero()];
    while let Some(q) = frontier.pop() {
        if !reach.insert(q.clone()) {
            continue;
        }
        for wi in &w {
            let next = &q + wi;
            if next < top && !reach.contains(&next) {
                frontier.push(next);
            }
        }
    }
    let mut bs: BTreeSet<Rat> = BTreeSet::new();
    for wj in &w {
        for q in reach.iter().filter(|q| *q < wj) {
            bs.insert(wj - q);
        }
    }
    bs.into_iter().collect()
}

/// The module at the minimal coordinate weight, after checking that every
/// other realizable weight carries no annihilating derivation.
pub fn full_contact_module(v: &[Poly], filt: &WFiltration) -> Result<DerivationModule> {
    let a0 = filt.min_weight();
    let mut checked = Vec::new();
    for b in realizable_weights(filt) {
        if b == a0 {
            continue;
        }
        let m = negative_derivations(v, filt, &b)?;
        if !m.is_zero() {
            return Err(Error::diagnostic(format!(
                "derivations of weight -{b} annihilate the initial forms: {}",
                m.basis[0]
            )));
        }
        checked.push(-b);
    }
    let mut module = negative_derivations(v, filt, &a0)?;
    module.vanishing_checked = checked;
    Ok(module)
}

/// Constant coefficients of `d` in the minimal-weight directions.
pub fn pr(d: &Derivation, filt: &WFiltration) -> Vec<Rat> {
    filt.min_weight_vars()
        .into_iter()
        .map(|j| d.coeff(j).constant_term())
        .collect()
}

/// Linear change sending the minimal-weight coordinates to (Y, Z) where the
/// Z coordinates are annihilated by every `pr` of the module. Returns the
/// change, the Y variables and the Z variables.
fn annihilator_change(
    prs: &[Vec<Rat>],
    filt: &WFiltration,
) -> Result<(CoordChange, Vec<usize>, Vec<usize>, linalg::Matrix)> {
    let ring = filt.ring();
    let min_vars = filt.min_weight_vars();
    let k = min_vars.len();
    let (r, pivots) = linalg::rref(prs, k);
    let ys: Vec<usize> = pivots.iter().map(|&p| min_vars[p]).collect();
    let zs: Vec<usize> = (0..k)
        .filter(|c| !pivots.contains(c))
        .map(|c| min_vars[c])
        .collect();
    let mut images: Vec<Poly> = (0..ring.len()).map(|i| Poly::var(ring, i)).collect();
    let mut inverse = images.clone();
    for (c, &q) in min_vars.iter().enumerate() {
        if pivots.contains(&c) {
            continue;
        }
        for (row, &p) in pivots.iter().enumerate() {
            let coef = &r[row][c];
            if coef.is_zero() {
                continue;
            }
            let yp = Poly::var(ring, min_vars[p]).scale(coef);
            images[q] = &images[q] + &yp;
            inverse[q] = &inverse[q] - &yp;
        }
    }
    let change = CoordChange::new(ring, ring, images)?.with_inverse(inverse)?;
    Ok((change, ys, zs, r))
}

/// Variables of the annihilator block of `l` among the minimal-weight
/// coordinates, after the linear change returned alongside.
pub fn annihilator_block(l: &DerivationModule, filt: &WFiltration) -> Result<(CoordChange, Vec<usize>)> {
    let prs: Vec<Vec<Rat>> = l.basis.iter().map(|d| pr(d, filt)).collect();
    let (change, _, zs, _) = annihilator_change(&prs, filt)?;
    Ok((change, zs))
}

fn check_homogeneous_field(d: &Derivation, w: &[Rat], weight: &Rat) -> Result<()> {
    for (j, c) in d.coeffs().iter().enumerate() {
        for (m, _) in c.terms() {
            if &(mono_weight(m, w) - &w[j]) != weight {
                return Err(Error::contract(format!(
                    "derivation `{d}` is not homogeneous of weight {weight}"
                )));
            }
        }
    }
    Ok(())
}

/// Coordinate changes `x_j -> x_j + G_j` making `d` equal `d/dy_p`, assuming
/// `d` already has constant coefficient 1 at `y_p` and 0 at the other
/// minimal-weight coordinates. Returns the change and the field in the new
/// coordinates.
fn straighten_normalized(
    d: &Derivation,
    p: usize,
    w: &[Rat],
    ring: &Ring,
) -> Result<(CoordChange, Derivation)> {
    let mut total = CoordChange::identity(ring);
    let mut cur = d.clone();
    for _ in 0..=ring.len() {
        if cur.as_coordinate() == Some(p) {
            return Ok((total, cur));
        }
        if cur.coeff(p) != &Poly::one(ring) {
            return Err(Error::diagnostic(format!(
                "straightening lost the unit coefficient at {}",
                ring.name(p)
            )));
        }
        let level = (0..ring.len())
            .filter(|&j| j != p && !cur.coeff(j).is_zero())
            .map(|j| w[j].clone())
            .min()
            .expect("non-straight field has another coefficient");
        let mut images: Vec<Poly> = (0..ring.len()).map(|i| Poly::var(ring, i)).collect();
        let mut inverse = images.clone();
        for j in (0..ring.len()).filter(|&j| j != p && w[j] == level) {
            let lam = cur.coeff(j);
            if lam.is_zero() {
                continue;
            }
            if lam.involves(j) {
                return Err(Error::diagnostic("straightening coefficient involves its own variable"));
            }
            let g = -&lam.integrate(p);
            images[j] = &images[j] - &g;
            inverse[j] = &inverse[j] + &g;
        }
        let step = CoordChange::new(ring, ring, images)?.with_inverse(inverse)?;
        cur = cur.pushforward(&step)?;
        total = total.compose(&step)?;
    }
    Err(Error::diagnostic("straightening did not terminate"))
}

/// Coordinate change after which `d` acts as a single coordinate derivative.
pub fn straighten(d: &Derivation, filt: &WFiltration) -> Result<CoordChange> {
    let ring = filt.ring();
    ring.ensure_same(d.ring())?;
    let w = filt.weights();
    let a0 = filt.min_weight();
    check_homogeneous_field(d, &w, &-&a0)?;
    let min_vars = filt.min_weight_vars();
    let c = pr(d, filt);
    let Some(pi) = c.iter().position(|x| !x.is_zero()) else {
        return Err(Error::contract("straightening needs a field with nonzero projection"));
    };
    let p = min_vars[pi];
    let cp = c[pi].clone();
    // Linear step: the new y_p is y_p / c_p and the other minimal-weight
    // coordinates lose their d-derivative.
    let mut images: Vec<Poly> = (0..ring.len()).map(|i| Poly::var(ring, i)).collect();
    let mut inverse = images.clone();
    images[p] = Poly::var(ring, p).scale(&cp);
    inverse[p] = Poly::var(ring, p).scale(&cp.recip());
    for (k, &q) in min_vars.iter().enumerate() {
        if q == p || c[k].is_zero() {
            continue;
        }
        images[q] = &images[q] + &Poly::var(ring, p).scale(&c[k]);
        inverse[q] = &inverse[q] - &Poly::var(ring, p).scale(&(&c[k] / &cp));
    }
    let lin = CoordChange::new(ring, ring, images)?.with_inverse(inverse)?;
    let pushed = d.pushforward(&lin)?;
    let (rest, _) = straighten_normalized(&pushed, p, &w, ring)?;
    lin.compose(&rest)
}

/// Result of straightening a whole module.
#[derive(Clone, Debug)]
pub struct Straightened {
    pub change: CoordChange,
    /// Coordinates dual to the straightened fields.
    pub y: Vec<usize>,
    /// Remaining minimal-weight coordinates: the annihilator block.
    pub z: Vec<usize>,
    /// The basis in the new coordinates; each is `d/dy` for its `y`.
    pub fields: Vec<Derivation>,
}

/// Straighten a basis of `l` one field at a time so that it becomes the
/// coordinate fields of the Y variables, leaving Z as the annihilator.
pub fn straighten_all(l: &DerivationModule, filt: &WFiltration) -> Result<Straightened> {
    let ring = filt.ring();
    let w = filt.weights();
    let a0 = filt.min_weight();
    for d in &l.basis {
        check_homogeneous_field(d, &w, &-&a0)?;
    }
    let min_vars = filt.min_weight_vars();
    let k = min_vars.len();
    let prs: Vec<Vec<Rat>> = l.basis.iter().map(|d| pr(d, filt)).collect();
    if linalg::rank(&prs, k) < l.basis.len() {
        return Err(Error::diagnostic(
            "projection of the contact module to the minimal-weight coordinates is not injective",
        ));
    }
    // Recombine the basis so that each projection is a reduced echelon row.
    let n = l.basis.len();
    let aug: Vec<Vec<Rat>> = prs
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let (red, _) = linalg::rref(&aug, k + n);
    let mut fields: Vec<Derivation> = red
        .iter()
        .map(|row| {
            row[k..]
                .iter()
                .zip(&l.basis)
                .filter(|(c, _)| !c.is_zero())
                .fold(Derivation::zero(ring), |acc, (c, d)| acc.add(&d.scale(c)))
        })
        .collect();

    let (lin, y, z, _) = annihilator_change(&prs, filt)?;
    fields = fields
        .iter()
        .map(|d| d.pushforward(&lin))
        .collect::<Result<Vec<_>>>()?;
    let mut total = lin;
    for i in 0..fields.len() {
        let (step, straight) = straighten_normalized(&fields[i], y[i], &w, ring)?;
        for (j, f) in fields.iter_mut().enumerate() {
            *f = if j == i { straight.clone() } else { f.pushforward(&step)? };
        }
        total = total.compose(&step)?;
        for a in 0..=i {
            for b in a + 1..fields.len() {
                if !fields[a].bracket(&fields[b])?.is_zero() {
                    return Err(Error::diagnostic(format!(
                        "straightened fields {} and {} do not commute",
                        fields[a], fields[b]
                    )));
                }
            }
        }
    }
    for (f, &yi) in fields.iter().zip(&y) {
        if f.as_coordinate() != Some(yi) {
            return Err(Error::diagnostic(format!(
                "field {f} was not straightened to d_{}",
                ring.name(yi)
            )));
        }
    }
    Ok(Straightened {
        change: total,
        y,
        z,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse_poly;
    use crate::filtration::Block;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn weighted(names: &[&str], blocks: &[(&[usize], &str)]) -> WFiltration {
        let ring = Ring::of(names);
        WFiltration::from_blocks(
            &ring,
            blocks
                .iter()
                .map(|(v, w)| Block { vars: v.to_vec(), weight: r(w) })
                .collect(),
        )
        .unwrap()
    }

    /// Independent oracle: dense solve of `sum_j v_j * df/dx_j = 0` for
    /// constant fields, in the all-weights-one case.
    fn constant_kernel_dim(f: &Poly) -> usize {
        let n = f.nvars();
        let parts: Vec<Poly> = (0..n).map(|j| f.partial(j)).collect();
        let mut monos: Vec<Mono> = parts.iter().flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
        monos.sort();
        monos.dedup();
        let rows: Vec<Vec<Rat>> = monos
            .iter()
            .map(|m| parts.iter().map(|p| p.coeff(m)).collect())
            .collect();
        n - linalg::rank(&rows, n)
    }

    #[test]
    fn negative_derivation_examples() {
        let f = weighted(&["x", "y", "z", "t"], &[]);
        let v = vec![parse_poly("x^2+y^2", f.ring()).unwrap()];
        let l = negative_derivations(&v, &f, &Rat::one()).unwrap();
        assert_eq!(l.dim(), 2);
        assert_eq!(l.dim(), constant_kernel_dim(&v[0]));
        assert_eq!(l.basis[0], Derivation::partial(f.ring(), 2));
        assert_eq!(l.basis[1], Derivation::partial(f.ring(), 3));

        let f = weighted(&["x", "y", "z", "t"], &[(&[0, 1], "2")]);
        let v = vec![parse_poly("x^2+y^2+z^2*t^2", f.ring()).unwrap()];
        assert_eq!(negative_derivations(&v, &f, &Rat::one()).unwrap().dim(), 0);

        let f = weighted(&["x", "y"], &[]);
        let v = vec![parse_poly("x^2", f.ring()).unwrap()];
        let l = negative_derivations(&v, &f, &Rat::one()).unwrap();
        assert_eq!(l.basis, vec![Derivation::partial(f.ring(), 1)]);
    }

    #[test]
    fn non_homogeneous_is_contract_error() {
        let f = weighted(&["x", "y"], &[]);
        let v = vec![parse_poly("x^2+y^3", f.ring()).unwrap()];
        assert!(matches!(
            negative_derivations(&v, &f, &Rat::one()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn full_module_examples() {
        let f = weighted(&["x", "y"], &[(&[0], "3/2")]);
        let v = vec![parse_poly("x^2+y^3", f.ring()).unwrap()];
        let l = full_contact_module(&v, &f).unwrap();
        assert_eq!(l.dim(), 0);
        assert_eq!(l.vanishing_checked, vec![r("-1/2"), r("-3/2")]);

        let f = weighted(&["x", "y", "z"], &[(&[0], "3/2")]);
        let v = vec![parse_poly("x^2+y^3", f.ring()).unwrap()];
        let l = full_contact_module(&v, &f).unwrap();
        assert_eq!(l.basis, vec![Derivation::partial(f.ring(), 2)]);

        let f = weighted(&["x", "y"], &[]);
        assert_eq!(full_contact_module(&[], &f).unwrap().dim(), 2);
    }

    #[test]
    fn vanishing_violation_is_diagnostic() {
        // y^3 alone is killed by y*d_x, a field of weight -1/2.
        let f = weighted(&["x", "y"], &[(&[0], "3/2")]);
        let v = vec![parse_poly("y^3", f.ring()).unwrap()];
        assert!(matches!(full_contact_module(&v, &f), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn annihilator_examples() {
        let f = weighted(&["x", "y", "z", "t"], &[]);
        let ring = f.ring().clone();
        let l = DerivationModule {
            basis: vec![Derivation::partial(&ring, 2), Derivation::partial(&ring, 3)],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        let (ch, z) = annihilator_block(&l, &f).unwrap();
        assert_eq!(z, vec![0, 1]);
        assert!(ch.is_identity());

        let f = weighted(&["x", "y", "z"], &[(&[0], "2")]);
        let l = DerivationModule {
            basis: vec![],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        assert_eq!(annihilator_block(&l, &f).unwrap().1, vec![1, 2]);

        let f = weighted(&["x", "y"], &[]);
        let l = DerivationModule {
            basis: vec![Derivation::partial(f.ring(), 1)],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        assert_eq!(annihilator_block(&l, &f).unwrap().1, vec![0]);
    }

    #[test]
    fn straighten_examples() {
        let f = weighted(&["x", "y"], &[(&[0], "2")]);
        let ring = f.ring().clone();
        let p = |s: &str| parse_poly(s, &ring).unwrap();
        assert!(straighten(&Derivation::partial(&ring, 1), &f).unwrap().is_identity());

        let d = Derivation::new(&ring, vec![p("2*y"), p("1")]).unwrap();
        let ch = straighten(&d, &f).unwrap();
        // The new x coordinate is x - y^2 and is killed by d.
        assert_eq!(ch.inverse().unwrap()[0], p("x - y^2"));
        assert!(d.apply(&ch.inverse().unwrap()[0]).unwrap().is_zero());
        assert_eq!(d.pushforward(&ch).unwrap().as_coordinate(), Some(1));

        let f3 = weighted(&["x", "y"], &[(&[0], "3")]);
        let d = Derivation::new(&ring, vec![p("3*y^2"), p("1")]).unwrap();
        let ch = straighten(&d, &f3).unwrap();
        assert_eq!(ch.inverse().unwrap()[0], p("x - y^3"));
        assert!(d.apply(&ch.inverse().unwrap()[0]).unwrap().is_zero());
    }

    #[test]
    fn straighten_rejects_zero_projection() {
        let f = weighted(&["x", "y"], &[(&[0], "2")]);
        let ring = f.ring().clone();
        let d = Derivation::new(&ring, vec![parse_poly("y", &ring).unwrap(), Poly::zero(&ring)]).unwrap();
        assert!(matches!(straighten(&d, &f), Err(Error::Contract(_))));
    }

    #[test]
    fn straighten_all_examples() {
        let f = weighted(&["x", "y", "z", "t"], &[]);
        let ring = f.ring().clone();
        let l = DerivationModule {
            basis: vec![Derivation::partial(&ring, 2), Derivation::partial(&ring, 3)],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        let s = straighten_all(&l, &f).unwrap();
        assert!(s.change.is_identity());
        assert_eq!((s.y, s.z), (vec![2, 3], vec![0, 1]));

        let f = weighted(&["x", "y"], &[(&[0], "2")]);
        let ring = f.ring().clone();
        let p = |s: &str| parse_poly(s, &ring).unwrap();
        let l = DerivationModule {
            basis: vec![Derivation::new(&ring, vec![p("2*y"), p("1")]).unwrap()],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        let s = straighten_all(&l, &f).unwrap();
        assert_eq!(s.change.inverse().unwrap()[0], p("x - y^2"));
        assert_eq!((s.y, s.z), (vec![1], vec![]));

        let f = weighted(&["x", "y", "z"], &[(&[0], "2")]);
        let l = DerivationModule {
            basis: vec![],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        let s = straighten_all(&l, &f).unwrap();
        assert!(s.change.is_identity());
        assert_eq!((s.y, s.z), (vec![], vec![1, 2]));
    }

    #[test]
    fn straighten_all_mixed_pr() {
        // Fields with a non-diagonal projection: d_y + d_z and d_t + 2 d_z.
        let f = weighted(&["x", "y", "z", "t"], &[(&[0], "2")]);
        let ring = f.ring().clone();
        let p = |s: &str| parse_poly(s, &ring).unwrap();
        let l = DerivationModule {
            basis: vec![
                Derivation::new(&ring, vec![p("y"), p("1"), p("1"), p("0")]).unwrap(),
                Derivation::new(&ring, vec![p("0"), p("0"), p("2"), p("1")]).unwrap(),
            ],
            weight: r("-1"),
            filtration: f.clone(),
            vanishing_checked: vec![],
        };
        let s = straighten_all(&l, &f).unwrap();
        assert_eq!(s.y.len(), 2);
        assert_eq!(s.z.len(), 1);
        // Every original field kills the new Z coordinates and new x.
        let inv = s.change.inverse().unwrap();
        for d in &l.basis {
            assert!(d.apply(&inv[s.z[0]]).unwrap().is_zero());
            assert!(d.apply(&inv[0]).unwrap().is_zero());
        }
    }
}
