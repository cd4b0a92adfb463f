use std::cmp::Ordering;

/// Exponent vector of a monomial. Ordered by total degree first, then
/// lexicographically with larger leading exponents first, so `x^2 < x*y < y^2`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(Vec<u32>);

impl Mono {
    pub fn new(exps: Vec<u32>) -> Mono {
        Mono(exps)
    }

    pub fn one(n: usize) -> Mono {
        Mono(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Mono {
        let mut e = vec![0; n];
        e[i] = 1;
        Mono(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Mono) -> Option<Mono> {
        if other.divides(self) {
            Some(Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
        } else {
            None
        }
    }

    pub fn with_exp(&self, i: usize, e: u32) -> Mono {
        let mut v = self.0.clone();
        v[i] = e;
        Mono(v)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of length `n` with total degree exactly `deg`, in
/// ascending `Mono` order.
pub fn monomials_of_degree(n: usize, deg: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left;
            out.push(Mono(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if deg == 0 {
            out.push(Mono(vec![]));
        }
        return out;
    }
    rec(0, deg, &mut cur, &mut out);
    out
}
