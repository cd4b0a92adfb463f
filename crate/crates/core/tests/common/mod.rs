#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wres::driver::ChartTree;
use wres::exactalg::{parse_poly, CoordChange, Poly, Rat, Ring};
use wres::invariant::InvariantResult;

pub struct Case {
    pub name: &'static str,
    pub vars: &'static [&'static str],
    pub gens: &'static [&'static str],
}

impl Case {
    pub fn ring(&self) -> Ring {
        Ring::of(self.vars)
    }

    pub fn polys(&self) -> Vec<Poly> {
        let ring = self.ring();
        self.gens.iter().map(|g| parse_poly(g, &ring).unwrap()).collect()
    }

    pub fn m(&self) -> usize {
        self.vars.len()
    }

    pub fn is_hypersurface(&self) -> bool {
        self.gens.len() == 1
    }
}

pub const SUITE: &[Case] = &[
    Case { name: "cusp", vars: &["x", "y"], gens: &["x^2+y^3"] },
    Case { name: "eq11", vars: &["x", "y", "z", "t"], gens: &["x^2+y^2+(z*t)^2"] },
    Case { name: "x2y5", vars: &["x", "y"], gens: &["x^2+y^5"] },
    Case { name: "umbrella", vars: &["x", "y", "z"], gens: &["x^2+y^2*z"] },
    Case { name: "line", vars: &["x", "y"], gens: &["x"] },
    Case { name: "cusp3", vars: &["x", "y", "z"], gens: &["x^2+y^3"] },
    Case { name: "moved_cusp", vars: &["x", "y"], gens: &["(x-y^2)^2+y^5"] },
    Case { name: "node", vars: &["x", "y"], gens: &["x^2+y^2"] },
    Case { name: "e6", vars: &["x", "y"], gens: &["x^3+y^4"] },
    Case { name: "quartic", vars: &["x", "y"], gens: &["x^2*y^2+x^5+y^5"] },
    Case { name: "brieskorn", vars: &["x", "y", "z"], gens: &["x^2+y^3+z^4"] },
    Case { name: "d4", vars: &["x", "y", "z"], gens: &["x^2*y+z^3"] },
    Case { name: "monomial", vars: &["x", "y"], gens: &["x^2", "y^3"] },
    Case { name: "mixed", vars: &["x", "y"], gens: &["x*y", "x^3+y^2"] },
    Case { name: "cross", vars: &["x", "y", "z"], gens: &["x*y", "z^2"] },
    Case { name: "a6", vars: &["x", "y"], gens: &["x^2+y^7"] },
    Case { name: "e8", vars: &["x", "y"], gens: &["x^3+y^5"] },
    Case { name: "e8_surface", vars: &["x", "y", "z"], gens: &["x^2+y^3+z^5"] },
    Case { name: "cone", vars: &["x", "y", "z"], gens: &["x^2+y^2+z^2"] },
    Case { name: "planes", vars: &["x", "y", "z"], gens: &["x*y*z"] },
    Case { name: "threefold", vars: &["x", "y", "z", "t"], gens: &["x^2+y^3+z^2*t"] },
    Case { name: "cusp_family", vars: &["x", "y", "z"], gens: &["x^2*z+y^3"] },
    Case { name: "node_and_cube", vars: &["x", "y", "z"], gens: &["x^2+y^2", "z^3"] },
    Case { name: "pinch", vars: &["x", "y", "z"], gens: &["x^2+y^3*z^2"] },
];

pub fn case(name: &str) -> &'static Case {
    SUITE.iter().find(|c| c.name == name).unwrap()
}

pub fn rat(s: &str) -> Rat {
    s.parse().unwrap()
}

pub fn strs(v: &[Rat]) -> Vec<String> {
    v.iter().map(Rat::to_string).collect()
}

/// Every invariant computation recorded in a tree: node origins and the
/// points chosen for expansion.
pub fn results(tree: &ChartTree) -> Vec<&InvariantResult> {
    let mut out = Vec::new();
    for n in &tree.nodes {
        out.push(&n.invariant);
        if let Some(e) = &n.expansion {
            out.push(&e.result);
        }
    }
    out
}

/// Random integer matrix of determinant +-1: a product of elementary row
/// operations, a permutation and sign flips.
pub fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Rat>> {
    let mut a: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    if n > 1 {
        for _ in 0..2 * n {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let k: i64 = [-2, -1, 1, 2][rng.gen_range(0..4)];
            let src = a[j].clone();
            for (x, y) in a[i].iter_mut().zip(src) {
                *x += k * y;
            }
        }
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            a.swap(i, j);
        }
    }
    for row in a.iter_mut() {
        if rng.gen_bool(0.5) {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    a.into_iter()
        .map(|r| r.into_iter().map(Rat::from).collect())
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn linear_change(ring: &Ring, a: &[Vec<Rat>]) -> CoordChange {
    CoordChange::linear(ring, a).unwrap()
}

/// Three fixed rational points for an exceptional divisor of a chart with
/// `n` coordinates, given in the coordinates other than `u`.
pub fn samples(n: usize) -> Vec<Vec<Rat>> {
    let vals = [["1", "-2", "1/2"], ["-1", "3", "2/3"], ["2", "1/3", "-3"]];
    vals.iter()
        .map(|row| (0..n - 1).map(|k| rat(row[k % 3])).collect())
        .collect()
}
