//! Exact rationals, permutations with Koszul signs, and dense multilinear maps.
//!
//! A [`MultiTensor`] with `p` inputs and `q` outputs stores the matrix of a
//! linear map `V^{⊗p} → V^{⊗q}` in a fixed basis of `V`. Entries are indexed by
//! `(out, in)` multi-indices, each read in mixed radix `dim` with the leftmost
//! tensor factor as the most significant digit.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"p/q"` or `"p"`. Floats and zero denominators are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Linear combinations; implemented by every element type the algebraic layers
/// manipulate.
pub trait Linear: Clone {
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }
}

/// A bijection of `{1..n}`, stored by its 1-based images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i == 0 || i > n || seen[i - 1] {
                return Err(Error::InvalidPerm(format!("{images:?}")));
            }
            seen[i - 1] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(n: usize) -> Self {
        Perm { images: (1..=n).collect() }
    }

    /// Build from 0-based images.
    pub fn from_zero_based(images: &[usize]) -> Result<Self> {
        Perm::new(images.iter().map(|i| i + 1).collect())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// σ(i), 1-based.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        if self.len() != other.len() {
            return Err(Error::PermLength { expected: self.len(), got: other.len() });
        }
        Ok(Perm { images: other.images.iter().map(|&i| self.images[i - 1]).collect() })
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &s) in self.images.iter().enumerate() {
            inv[s - 1] = i + 1;
        }
        Perm { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &s)| s == i + 1)
    }

    pub fn sign(&self) -> i32 {
        let n = self.len();
        let mut s = 1;
        for i in 0..n {
            for j in i + 1..n {
                if self.images[i] > self.images[j] {
                    s = -s;
                }
            }
        }
        s
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Sign picked up when graded symbols `x_1..x_n` of the given degrees are
/// reordered into `x_{s(1)}, …, x_{s(n)}`.
pub fn koszul_sign(s: &Perm, degrees: &[i64]) -> Result<i32> {
    if s.len() != degrees.len() {
        return Err(Error::PermLength { expected: degrees.len(), got: s.len() });
    }
    let im = s.images();
    let mut sign = 1;
    for i in 0..im.len() {
        for j in i + 1..im.len() {
            if im[i] > im[j] && degrees[im[i] - 1] % 2 != 0 && degrees[im[j] - 1] % 2 != 0 {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

pub(crate) fn upow(dim: usize, k: usize) -> usize {
    dim.pow(k as u32)
}

/// Digits of `index` in base `dim`, most significant first.
pub(crate) fn decode(mut index: usize, dim: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for slot in (0..len).rev() {
        digits[slot] = index % dim;
        index /= dim;
    }
    digits
}

pub(crate) fn encode(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * dim + d)
}

/// Dense exact-rational linear map `V^{⊗p} → V^{⊗q}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiTensor {
    dim: usize,
    p: usize,
    q: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for MultiTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.entries.iter().map(format_rational).collect();
        write!(f, "MultiTensor(dim={}, {}→{}, [{}])", self.dim, self.p, self.q, e.join(", "))
    }
}

impl MultiTensor {
    pub fn zeros(dim: usize, p: usize, q: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        MultiTensor { dim, p, q, entries: vec![Rational::zero(); upow(dim, p + q)] }
    }

    pub fn from_entries(dim: usize, p: usize, q: usize, entries: Vec<Rational>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let need = upow(dim, p + q);
        if entries.len() != need {
            return Err(Error::Arity(format!(
                "expected {need} entries for dim {dim}, {p} inputs, {q} outputs; got {}",
                entries.len()
            )));
        }
        Ok(MultiTensor { dim, p, q, entries })
    }

    /// Fill from a function of `(out digits, in digits)`.
    pub fn from_fn(
        dim: usize,
        p: usize,
        q: usize,
        mut f: impl FnMut(&[usize], &[usize]) -> Rational,
    ) -> Self {
        let (np, nq) = (upow(dim, p), upow(dim, q));
        let mut entries = Vec::with_capacity(np * nq);
        for o in 0..nq {
            let od = decode(o, dim, q);
            for i in 0..np {
                entries.push(f(&od, &decode(i, dim, p)));
            }
        }
        MultiTensor { dim, p, q, entries }
    }

    pub fn scalar(dim: usize, c: Rational) -> Self {
        MultiTensor { dim, p: 0, q: 0, entries: vec![c] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of inputs.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of outputs.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, out: &[usize], inp: &[usize]) -> &Rational {
        &self.entries[self.flat(out, inp)]
    }

    pub fn set(&mut self, out: &[usize], inp: &[usize], v: Rational) {
        let k = self.flat(out, inp);
        self.entries[k] = v;
    }

    pub fn get_flat(&self, out: usize, inp: usize) -> &Rational {
        &self.entries[out * upow(self.dim, self.p) + inp]
    }

    fn flat(&self, out: &[usize], inp: &[usize]) -> usize {
        assert_eq!(out.len(), self.q);
        assert_eq!(inp.len(), self.p);
        encode(out, self.dim) * upow(self.dim, self.p) + encode(inp, self.dim)
    }

    fn same_shape(&self, other: &MultiTensor) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        if self.p != other.p || self.q != other.q {
            return Err(Error::Arity(format!(
                "shape {}→{} vs {}→{}",
                self.p, self.q, other.p, other.q
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MultiTensor) -> Result<MultiTensor> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(MultiTensor { dim: self.dim, p: self.p, q: self.q, entries })
    }

    pub fn try_sub(&self, other: &MultiTensor) -> Result<MultiTensor> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(MultiTensor { dim: self.dim, p: self.p, q: self.q, entries })
    }

    pub fn neg(&self) -> MultiTensor {
        self.scale(&rat(-1))
    }

    /// Horizontal juxtaposition `a ⊗ b`.
    pub fn tensor_product(&self, b: &MultiTensor) -> Result<MultiTensor> {
        if self.dim != b.dim {
            return Err(Error::DimMismatch(self.dim, b.dim));
        }
        let dim = self.dim;
        let (ap, bp, bq) = (upow(dim, self.p), upow(dim, b.p), upow(dim, b.q));
        let aq = upow(dim, self.q);
        let mut out = MultiTensor::zeros(dim, self.p + b.p, self.q + b.q);
        let rp = ap * bp;
        for oa in 0..aq {
            for ia in 0..ap {
                let x = &self.entries[oa * ap + ia];
                if x.is_zero() {
                    continue;
                }
                for ob in 0..bq {
                    for ib in 0..bp {
                        let y = &b.entries[ob * bp + ib];
                        if y.is_zero() {
                            continue;
                        }
                        out.entries[(oa * bq + ob) * rp + ia * bp + ib] = x * y;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Vertical composition `a ∘ b` (apply `b` first).
    pub fn compose(&self, b: &MultiTensor) -> Result<MultiTensor> {
        if self.dim != b.dim {
            return Err(Error::DimMismatch(self.dim, b.dim));
        }
        if self.p != b.q {
            return Err(Error::Arity(format!(
                "cannot compose a map with {} inputs after a map with {} outputs",
                self.p, b.q
            )));
        }
        let dim = self.dim;
        let (mid, outs, ins) = (upow(dim, self.p), upow(dim, self.q), upow(dim, b.p));
        let mut out = MultiTensor::zeros(dim, b.p, self.q);
        for o in 0..outs {
            for k in 0..mid {
                let x = &self.entries[o * mid + k];
                if x.is_zero() {
                    continue;
                }
                for i in 0..ins {
                    let y = &b.entries[k * ins + i];
                    if !y.is_zero() {
                        out.entries[o * ins + i] += x * y;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `f ∘ T_σ`, where `T_σ` moves the factor in slot `i` to slot `σ(i)`.
    pub fn permute_inputs(&self, s: &Perm) -> Result<MultiTensor> {
        if s.len() != self.p {
            return Err(Error::PermLength { expected: self.p, got: s.len() });
        }
        let map = slot_map(self.dim, s);
        let np = upow(self.dim, self.p);
        let mut out = self.clone();
        for o in 0..upow(self.dim, self.q) {
            for (j, &k) in map.iter().enumerate() {
                out.entries[o * np + j] = self.entries[o * np + k].clone();
            }
        }
        Ok(out)
    }

    /// `T_σ ∘ f`.
    pub fn permute_outputs(&self, s: &Perm) -> Result<MultiTensor> {
        if s.len() != self.q {
            return Err(Error::PermLength { expected: self.q, got: s.len() });
        }
        let map = slot_map(self.dim, s);
        let np = upow(self.dim, self.p);
        let mut out = self.clone();
        for (o, &k) in map.iter().enumerate() {
            for i in 0..np {
                out.entries[k * np + i] = self.entries[o * np + i].clone();
            }
        }
        Ok(out)
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }

    pub fn max_abs(&self) -> Rational {
        self.entries.iter().map(|e| e.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// `{"entries": ["p/q", …]}`; arity and dimension are supplied by context.
    pub fn to_json(&self) -> Value {
        json!({ "entries": self.entries.iter().map(format_rational).collect::<Vec<_>>() })
    }

    /// Parse `{"entries": […]}`. If `dim` is `None` it is inferred from the
    /// entry count.
    pub fn from_json(v: &Value, dim: Option<usize>, p: usize, q: usize) -> Result<MultiTensor> {
        let arr = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("tensor needs an \"entries\" array".into()))?;
        let entries = arr
            .iter()
            .map(|e| match e {
                Value::String(s) => parse_rational(s),
                Value::Number(n) if n.is_i64() => Ok(rat(n.as_i64().unwrap())),
                other => Err(Error::Parse(format!("not an exact rational: {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let dim = match dim {
            Some(d) => d,
            None => infer_dim(entries.len(), p + q)?,
        };
        MultiTensor::from_entries(dim, p, q, entries)
    }
}

fn infer_dim(len: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Parse("cannot infer dimension of a scalar".into()));
    }
    (1..=len)
        .find(|&d| upow(d, k) >= len)
        .filter(|&d| upow(d, k) == len)
        .ok_or_else(|| Error::Parse(format!("{len} entries is not a power of arity {k}")))
}

/// For each basis multi-index `j`, the flat index `k` with `k_{σ(i)} = j_i`.
fn slot_map(dim: usize, s: &Perm) -> Vec<usize> {
    let n = s.len();
    (0..upow(dim, n))
        .map(|j| {
            let jd = decode(j, dim, n);
            let mut kd = vec![0; n];
            for i in 0..n {
                kd[s.apply(i + 1) - 1] = jd[i];
            }
            encode(&kd, dim)
        })
        .collect()
}

impl Linear for MultiTensor {
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("shape mismatch in MultiTensor addition")
    }

    fn scale(&self, c: &Rational) -> Self {
        MultiTensor {
            dim: self.dim,
            p: self.p,
            q: self.q,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }
}

/// Identity on `V^{⊗k}`; `k = 0` is the scalar 1.
pub fn identity_power(dim: usize, k: usize) -> MultiTensor {
    let n = upow(dim, k);
    let mut t = MultiTensor::zeros(dim, k, k);
    for i in 0..n {
        t.entries[i * n + i] = Rational::one();
    }
    t
}

/// The map `T_σ` on `V^{⊗n}`.
pub fn permutation_tensor(dim: usize, s: &Perm) -> MultiTensor {
    identity_power(dim, s.len()).permute_outputs(s).expect("lengths agree")
}

/// Tensor product of a list of maps; the empty list gives the scalar 1.
pub fn tensor_all(dim: usize, parts: &[MultiTensor]) -> Result<MultiTensor> {
    parts.iter().try_fold(identity_power(dim, 0), |acc, t| acc.tensor_product(t))
}
