//! Seeded generators of small exact data: rationals, tensors, cochains and
//! valid bialgebras.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::endo_eval::BialgebraData;
use crate::exact_tensor::{ratio, MultiTensor, Rational};
use crate::gs_complex::GSCochain;

/// Entries are `a/b` with `|a| ≤ 7`, `1 ≤ b ≤ 7`.
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rational(&mut self) -> Rational {
        ratio(self.rng.gen_range(-7..=7), self.rng.gen_range(1..=7))
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn tensor(&mut self, dim: usize, p: usize, q: usize) -> MultiTensor {
        MultiTensor::from_fn(dim, p, q, |_, _| self.rational())
    }

    pub fn cochain(&mut self, dim: usize, p: usize, q: usize) -> GSCochain {
        GSCochain::new(self.tensor(dim, p, q)).expect("p, q ≥ 1")
    }

    /// A random unimodular integer matrix and its inverse, as maps `V → V`:
    /// a signed permutation followed by a few elementary row operations, so
    /// transported structure constants stay small.
    pub fn invertible(&mut self, dim: usize) -> (MultiTensor, MultiTensor) {
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(&mut self.rng);
        let mut m: Vec<Vec<Rational>> = order
            .iter()
            .map(|&k| {
                let s = if self.rng.gen_bool(0.5) { 1 } else { -1 };
                (0..dim).map(|j| if j == k { ratio(s, 1) } else { Rational::zero() }).collect()
            })
            .collect();
        for _ in 0..if dim > 1 { 2 * dim } else { 0 } {
            let i = self.rng.gen_range(0..dim);
            let j = (i + self.rng.gen_range(1..dim)) % dim;
            let c = ratio(self.rng.gen_range(-2..=2), 1);
            let row_j = m[j].clone();
            for (x, y) in m[i].iter_mut().zip(row_j) {
                *x += &c * y;
            }
        }
        let inv = invert(&m).expect("unimodular");
        let to_t = |a: &Vec<Vec<Rational>>| MultiTensor::from_fn(dim, 1, 1, |o, i| a[o[0]][i[0]].clone());
        (to_t(&m), to_t(&inv))
    }

    /// A valid bialgebra of the given dimension: a semigroup bialgebra, its
    /// dual, a half-trivial variant, or the trivial one, transported along a
    /// random change of basis and rescaled by `μ ↦ λμ`, `Δ ↦ λ⁻¹Δ`.
    pub fn bialgebra(&mut self, dim: usize) -> BialgebraData {
        let sg = semigroups(dim);
        let table = sg.choose(&mut self.rng).expect("every order has a semigroup").clone();
        let kind = self.rng.gen_range(0..8);
        let base = match kind {
            0..=2 => semigroup_bialgebra(dim, &table),
            3..=5 => dual_semigroup_bialgebra(dim, &table),
            6 => {
                let b = semigroup_bialgebra(dim, &table);
                if self.rng.gen_bool(0.5) {
                    BialgebraData::new(b.mu().clone(), MultiTensor::zeros(dim, 1, 2)).unwrap()
                } else {
                    BialgebraData::new(MultiTensor::zeros(dim, 2, 1), b.delta().clone()).unwrap()
                }
            }
            _ => BialgebraData::trivial(dim),
        };
        let (p, pinv) = self.invertible(dim);
        let lambda = self.nonzero_rational();
        transport(&base, &p, &pinv, &lambda)
    }
}

/// `μ' = P⁻¹μ(P⊗P)`, `Δ' = (P⁻¹⊗P⁻¹)ΔP`, then `μ' ↦ λμ'`, `Δ' ↦ λ⁻¹Δ'`.
pub fn transport(b: &BialgebraData, p: &MultiTensor, pinv: &MultiTensor, lambda: &Rational) -> BialgebraData {
    use crate::exact_tensor::Linear;
    let pp = p.tensor_product(p).unwrap();
    let pipi = pinv.tensor_product(pinv).unwrap();
    let mu = pinv.compose(&b.mu().compose(&pp).unwrap()).unwrap().scale(lambda);
    let delta = pipi.compose(&b.delta().compose(p).unwrap()).unwrap().scale(&(Rational::one() / lambda));
    BialgebraData::new(mu, delta).unwrap()
}

/// All associative multiplication tables on `{0, …, n−1}` (`n ≤ 3`).
pub fn semigroups(n: usize) -> Vec<Vec<Vec<usize>>> {
    assert!((1..=3).contains(&n), "semigroup enumeration supports orders 1..3");
    let cells = n * n;
    let total = n.pow(cells as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut t = vec![vec![0; n]; n];
        for cell in 0..cells {
            t[cell / n][cell % n] = c % n;
            c /= n;
        }
        let assoc = (0..n).all(|a| (0..n).all(|b| (0..n).all(|x| t[t[a][b]][x] == t[a][t[b][x]])));
        if assoc {
            out.push(t);
        }
    }
    out
}

/// `k[S]` with `μ(e_s⊗e_t) = e_{st}` and `Δ(e_s) = e_s⊗e_s`.
pub fn semigroup_bialgebra(n: usize, t: &[Vec<usize>]) -> BialgebraData {
    let one = Rational::one;
    let mu = MultiTensor::from_fn(n, 2, 1, |o, i| if t[i[0]][i[1]] == o[0] { one() } else { Rational::zero() });
    let delta = MultiTensor::from_fn(n, 1, 2, |o, i| if o[0] == i[0] && o[1] == i[0] { one() } else { Rational::zero() });
    BialgebraData::new(mu, delta).unwrap()
}

/// Functions on `S`: `μ(δ_s⊗δ_t) = [s=t]δ_s`, `Δ(δ_u) = Σ_{st=u} δ_s⊗δ_t`.
pub fn dual_semigroup_bialgebra(n: usize, t: &[Vec<usize>]) -> BialgebraData {
    let one = Rational::one;
    let mu = MultiTensor::from_fn(n, 2, 1, |o, i| if i[0] == i[1] && i[0] == o[0] { one() } else { Rational::zero() });
    let delta = MultiTensor::from_fn(n, 1, 2, |o, i| if t[o[0]][o[1]] == i[0] { one() } else { Rational::zero() });
    BialgebraData::new(mu, delta).unwrap()
}

/// Gauss–Jordan inverse over the rationals; `None` if singular.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = Rational::one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
