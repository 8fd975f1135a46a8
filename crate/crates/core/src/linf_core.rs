//! Curved L∞ algebras with finitely many brackets: twisting by Maurer–Cartan
//! elements, flattening, master-equation residuals, symmetric braces generated
//! by a pre-Lie product, and the A∞ specialization.

use std::collections::BTreeMap;
use std::fmt::Debug;

use itertools::Itertools;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::diff_table::DiffTable;
use crate::endo_eval::BialgebraData;
use crate::error::{Error, Result};
use crate::exact_tensor::{identity_power, rat, tensor_all, Linear, MultiTensor, Rational};
use crate::gs_complex::{bracket_all, eta, gerstenhaber_bracket, gerstenhaber_circ, unshuffles, GSElement};

/// `(W, l₀, l₁, l₂, …)` with `l_n = 0` for `n > N`.
pub trait BracketProvider {
    type Elem: Linear + Debug;

    fn zero(&self) -> Self::Elem;

    /// Degree of a homogeneous nonzero element; `None` for zero or
    /// inhomogeneous elements.
    fn degree(&self, x: &Self::Elem) -> Option<i64>;

    /// `l_n(x₁, …, x_n)` with `n = xs.len()`, including `n = 0`.
    fn bracket(&self, xs: &[&Self::Elem]) -> Result<Self::Elem>;

    /// The `N` beyond which every bracket vanishes.
    fn truncation_order(&self) -> usize;
}

impl<P: BracketProvider + ?Sized> BracketProvider for &P {
    type Elem = P::Elem;

    fn zero(&self) -> Self::Elem {
        (**self).zero()
    }

    fn degree(&self, x: &Self::Elem) -> Option<i64> {
        (**self).degree(x)
    }

    fn bracket(&self, xs: &[&Self::Elem]) -> Result<Self::Elem> {
        (**self).bracket(xs)
    }

    fn truncation_order(&self) -> usize {
        (**self).truncation_order()
    }
}

/// A linear degree-1 map `d` on the underlying space.
pub type Differential<'a, E> = Box<dyn Fn(&E) -> E + 'a>;
/// Borrowed form of [`Differential`].
pub type DifferentialRef<'a, E> = dyn Fn(&E) -> E + 'a;

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * rat(k as i64))
}

fn pm(odd: bool) -> Rational {
    if odd {
        rat(-1)
    } else {
        rat(1)
    }
}

/// `l_k(κ, …, κ, ws…)` with `s` copies of `κ`.
fn with_kappa<P: BracketProvider>(l: &P, kappa: &P::Elem, s: usize, ws: &[&P::Elem]) -> Result<P::Elem> {
    let mut args: Vec<&P::Elem> = vec![kappa; s];
    args.extend_from_slice(ws);
    l.bracket(&args)
}

fn require_degree_one<P: BracketProvider>(l: &P, kappa: &P::Elem) -> Result<()> {
    if kappa.is_zero() || l.degree(kappa) == Some(1) {
        Ok(())
    } else {
        Err(Error::NotDegreeOne)
    }
}

/// `dκ − l₀ + Σ_{k≥1} c_k l_k(κ^{⊗k})` with `c_k = −(−1)^{C(k+1,2)}/k!`, i.e.
/// `dκ − l₀ + l₁κ + (1/2!)l₂(κ,κ) − (1/3!)l₃(κ,κ,κ) − (1/4!)l₄(κ⁴) + ⋯`.
/// It vanishes exactly when `κ` solves the master equation.
pub fn master_residual<P: BracketProvider>(
    l: &P,
    d: Option<&DifferentialRef<'_, P::Elem>>,
    kappa: &P::Elem,
) -> Result<P::Elem> {
    require_degree_one(l, kappa)?;
    let mut out = l.bracket(&[])?.scale(&rat(-1));
    if let Some(d) = d {
        out = out.add(&d(kappa));
    }
    if kappa.is_zero() {
        return Ok(out);
    }
    for k in 1..=l.truncation_order() {
        let c = -pm((k * (k + 1) / 2) % 2 == 1) / factorial(k);
        out = out.add(&with_kappa(l, kappa, k, &[])?.scale(&c));
    }
    Ok(out)
}

/// `L^κ` with `l_n^κ(w) = Σ_{s≥0} (−1)^{sn + C(s+1,2)} (1/s!) l_{n+s}(κ^{⊗s}, w)`.
pub struct Twisted<P: BracketProvider> {
    base: P,
    kappa: P::Elem,
}

impl<P: BracketProvider> Twisted<P> {
    pub fn kappa(&self) -> &P::Elem {
        &self.kappa
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    /// The curvature `l₀^κ`.
    pub fn curvature(&self) -> Result<P::Elem> {
        self.bracket(&[])
    }
}

pub fn twist<P: BracketProvider>(l: P, kappa: P::Elem) -> Result<Twisted<P>> {
    require_degree_one(&l, &kappa)?;
    Ok(Twisted { base: l, kappa })
}

impl<P: BracketProvider> BracketProvider for Twisted<P> {
    type Elem = P::Elem;

    fn zero(&self) -> Self::Elem {
        self.base.zero()
    }

    fn degree(&self, x: &Self::Elem) -> Option<i64> {
        self.base.degree(x)
    }

    fn bracket(&self, ws: &[&Self::Elem]) -> Result<Self::Elem> {
        let n = ws.len();
        let big_n = self.base.truncation_order();
        let mut out = self.base.zero();
        if n > big_n {
            return Ok(out);
        }
        let smax = if self.kappa.is_zero() { 0 } else { big_n - n };
        for s in 0..=smax {
            let c = pm((s * n + s * (s + 1) / 2) % 2 == 1) / factorial(s);
            out = out.add(&with_kappa(&self.base, &self.kappa, s, ws)?.scale(&c));
        }
        Ok(out)
    }

    fn truncation_order(&self) -> usize {
        self.base.truncation_order()
    }
}

/// `(W, 0, l₁^κ + d, l₂^κ, l₃^κ, …)`.
pub struct Flattened<'a, P: BracketProvider> {
    twisted: Twisted<P>,
    d: Option<Differential<'a, P::Elem>>,
}

impl<'a, P: BracketProvider> Flattened<'a, P> {
    pub fn twisted(&self) -> &Twisted<P> {
        &self.twisted
    }
}

impl<'a, P: BracketProvider> BracketProvider for Flattened<'a, P> {
    type Elem = P::Elem;

    fn zero(&self) -> Self::Elem {
        self.twisted.zero()
    }

    fn degree(&self, x: &Self::Elem) -> Option<i64> {
        self.twisted.degree(x)
    }

    fn bracket(&self, ws: &[&Self::Elem]) -> Result<Self::Elem> {
        match ws.len() {
            0 => Ok(self.zero()),
            1 => {
                let l1 = self.twisted.bracket(ws)?;
                Ok(match &self.d {
                    Some(d) => l1.add(&d(ws[0])),
                    None => l1,
                })
            }
            _ => self.twisted.bracket(ws),
        }
    }

    fn truncation_order(&self) -> usize {
        self.twisted.truncation_order()
    }
}

#[derive(Debug, Error)]
pub enum FlattenError<E: Debug> {
    #[error("κ does not satisfy the flatness hypothesis; residual {0:?}")]
    Residual(E),
    #[error(transparent)]
    Core(#[from] Error),
}

/// Flatten `L^κ` using `d`, after checking `d(κ) = l₀ − l₁(κ) − (1/2!)l₂(κ,κ) + ⋯` exactly.
pub fn flatten<'a, P: BracketProvider>(
    lk: Twisted<P>,
    d: Option<Differential<'a, P::Elem>>,
) -> std::result::Result<Flattened<'a, P>, FlattenError<P::Elem>> {
    let r = master_residual(&lk.base, d.as_deref(), &lk.kappa)?;
    if !r.is_zero() {
        return Err(FlattenError::Residual(r));
    }
    Ok(Flattened { twisted: lk, d })
}

/// The curved L∞ relation at `xs`:
/// `Σ_{i+j=n+1, i≥0} Σ_σ η(σ)(−1)^{i(j−1)} l_j(l_i(x_{σ(1)}…x_{σ(i)}), x_{σ(i+1)}…x_{σ(n)})`
/// over `(i, n−i)`-unshuffles `σ`.
pub fn linf_relation<P: BracketProvider>(l: &P, xs: &[&P::Elem]) -> Result<P::Elem> {
    let n = xs.len();
    let degs = xs
        .iter()
        .map(|x| match l.degree(x) {
            Some(d) => Ok(d),
            None if x.is_zero() => Ok(0),
            None => Err(Error::NotComputable("relation inputs must be homogeneous".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = l.zero();
    for i in 0..=n {
        let j = n + 1 - i;
        for (first, rest) in unshuffles(n, i) {
            let order: Vec<usize> = first.iter().chain(&rest).copied().collect();
            let e = eta(&order, &degs)?;
            let inner = l.bracket(&first.iter().map(|&k| xs[k]).collect::<Vec<_>>())?;
            let mut args = vec![&inner];
            args.extend(rest.iter().map(|&k| xs[k]));
            let s = e * if (i * (j - 1)) % 2 == 0 { 1 } else { -1 };
            out = out.add(&l.bracket(&args)?.scale(&rat(s)));
        }
    }
    Ok(out)
}

/// The L∞ structure on the deformation complex of a bialgebra.
#[derive(Clone, Debug)]
pub struct GsProvider {
    table: DiffTable,
    bialgebra: BialgebraData,
}

impl GsProvider {
    pub fn new(table: DiffTable, bialgebra: BialgebraData) -> Self {
        GsProvider { table, bialgebra }
    }

    pub fn table(&self) -> &DiffTable {
        &self.table
    }

    pub fn bialgebra(&self) -> &BialgebraData {
        &self.bialgebra
    }
}

impl BracketProvider for GsProvider {
    type Elem = GSElement;

    fn zero(&self) -> GSElement {
        GSElement::zero(self.bialgebra.dim())
    }

    fn degree(&self, x: &GSElement) -> Option<i64> {
        x.degree()
    }

    fn bracket(&self, xs: &[&GSElement]) -> Result<GSElement> {
        bracket_all(&self.table, &self.bialgebra, xs)
    }

    fn truncation_order(&self) -> usize {
        self.table.truncation_order()
    }
}

/// A vector in a finite graded space with a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVector {
    coeffs: Vec<Rational>,
}

impl GradedVector {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        GradedVector { coeffs }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); dim];
        coeffs[i] = Rational::one();
        GradedVector { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }
}

impl Linear for GradedVector {
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "vectors of different spaces");
        GradedVector { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    fn scale(&self, c: &Rational) -> Self {
        GradedVector { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// An L∞ algebra on a finite graded basis, given by the values of each `l_k`
/// on non-decreasing basis tuples and extended by graded antisymmetry
/// `l_k(x_σ) = η(σ) l_k(x)`.
#[derive(Clone, Debug)]
pub struct FiniteLInfinity {
    degrees: Vec<i64>,
    brackets: BTreeMap<Vec<usize>, GradedVector>,
    order: usize,
}

impl FiniteLInfinity {
    pub fn new(degrees: Vec<i64>) -> Self {
        FiniteLInfinity { degrees, brackets: BTreeMap::new(), order: 0 }
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn basis(&self, i: usize) -> GradedVector {
        GradedVector::basis(self.dim(), i)
    }

    pub fn vector(&self, coeffs: &[(usize, Rational)]) -> GradedVector {
        let mut v = GradedVector::new(vec![Rational::zero(); self.dim()]);
        for (i, c) in coeffs {
            v.coeffs[*i] += c;
        }
        v
    }

    /// Set `l_k(e_{i₁}, …, e_{i_k}) = value`; the stored normal form uses the
    /// sorted index tuple.
    pub fn set(&mut self, indices: &[usize], value: GradedVector) -> Result<()> {
        let (sorted, sign) = self.normalize(indices)?;
        if sign == 0 {
            return if value.is_zero() {
                Ok(())
            } else {
                Err(Error::NotComputable("bracket must vanish on repeated even elements".into()))
            };
        }
        self.order = self.order.max(indices.len());
        self.brackets.insert(sorted, value.scale(&rat(sign)));
        Ok(())
    }

    /// Sorted tuple and the sign `η` relating the two orders (0 if forced to vanish).
    fn normalize(&self, indices: &[usize]) -> Result<(Vec<usize>, i64)> {
        let order: Vec<usize> = (0..indices.len()).sorted_by_key(|&k| indices[k]).collect();
        let degs: Vec<i64> = indices.iter().map(|&i| self.degrees[i]).collect();
        let sorted: Vec<usize> = order.iter().map(|&k| indices[k]).collect();
        let repeated_even = sorted.windows(2).any(|w| w[0] == w[1] && self.degrees[w[0]] % 2 == 0);
        if repeated_even {
            return Ok((sorted, 0));
        }
        Ok((sorted, eta(&order, &degs)?))
    }

    fn basis_bracket(&self, indices: &[usize]) -> Result<Option<GradedVector>> {
        let (sorted, sign) = self.normalize(indices)?;
        if sign == 0 {
            return Ok(None);
        }
        Ok(self.brackets.get(&sorted).map(|v| v.scale(&rat(sign))))
    }
}

impl BracketProvider for FiniteLInfinity {
    type Elem = GradedVector;

    fn zero(&self) -> GradedVector {
        GradedVector::new(vec![Rational::zero(); self.dim()])
    }

    fn degree(&self, x: &GradedVector) -> Option<i64> {
        let degs: std::collections::BTreeSet<i64> =
            x.coeffs.iter().zip(&self.degrees).filter(|(c, _)| !c.is_zero()).map(|(_, d)| *d).collect();
        (degs.len() == 1).then(|| *degs.iter().next().unwrap())
    }

    fn bracket(&self, xs: &[&GradedVector]) -> Result<GradedVector> {
        let mut out = self.zero();
        if xs.is_empty() {
            return Ok(self.brackets.get(&vec![]).cloned().unwrap_or(out));
        }
        if xs.len() > self.order {
            return Ok(out);
        }
        let supports: Vec<Vec<usize>> = xs.iter().map(|x| (0..self.dim()).filter(|&i| !x.coeffs[i].is_zero()).collect()).collect();
        for idx in supports.iter().map(|s| s.iter().copied()).multi_cartesian_product() {
            if let Some(v) = self.basis_bracket(&idx)? {
                let c = idx.iter().zip(xs).fold(Rational::one(), |acc, (&i, x)| acc * &x.coeffs[i]);
                out = out.add(&v.scale(&c));
            }
        }
        Ok(out)
    }

    fn truncation_order(&self) -> usize {
        self.order
    }
}

/// A pre-Lie product `◇` of degree 0 on a graded space.
pub trait PreLie {
    type Elem: Linear + Debug;

    fn circ(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;

    fn degree(&self, x: &Self::Elem) -> i64;
}

/// Hochschild cochains `Lin(V^{⊗p}, V)` in degree `p − 1` with the
/// Gerstenhaber insertion.
#[derive(Clone, Copy, Debug, Default)]
pub struct HochschildPreLie;

impl PreLie for HochschildPreLie {
    type Elem = MultiTensor;

    fn circ(&self, x: &MultiTensor, y: &MultiTensor) -> Result<MultiTensor> {
        gerstenhaber_circ(x, y)
    }

    fn degree(&self, x: &MultiTensor) -> i64 {
        x.p() as i64 - 1
    }
}

/// `A(x,y,z) = (x◇y)◇z − x◇(y◇z)`.
pub fn associator<P: PreLie>(pl: &P, x: &P::Elem, y: &P::Elem, z: &P::Elem) -> Result<P::Elem> {
    let a = pl.circ(&pl.circ(x, y)?, z)?;
    let b = pl.circ(x, &pl.circ(y, z)?)?;
    Ok(a.sub(&b))
}

fn koszul(degs_moved: i64, degs_past: i64) -> i64 {
    if (degs_moved * degs_past) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The symmetric brace `x⟨x₁,…,x_n⟩` generated by `◇`, by the recursion
/// `x⟨x₁…x_{n−1},y⟩ = x⟨x₁…x_{n−1}⟩◇y − Σ_i (−1)^{|y|(|x_{i+1}|+⋯+|x_{n−1}|)} x⟨x₁,…,x_i◇y,…,x_{n−1}⟩`.
pub fn brace<P: PreLie>(pl: &P, x: &P::Elem, xs: &[P::Elem]) -> Result<P::Elem> {
    let n = xs.len();
    if n == 0 {
        return Ok(x.clone());
    }
    let (init, y) = (&xs[..n - 1], &xs[n - 1]);
    let dy = pl.degree(y);
    let mut out = pl.circ(&brace(pl, x, init)?, y)?;
    for i in 0..init.len() {
        let after: i64 = init[i + 1..].iter().map(|e| pl.degree(e)).sum();
        let mut args = init.to_vec();
        args[i] = pl.circ(&init[i], y)?;
        out = out.sub(&brace(pl, x, &args)?.scale(&rat(koszul(dy, after))));
    }
    Ok(out)
}

/// The same brace from the other end of the axiom: expanding
/// `(x◇x₁)⟨x₂…x_n⟩` and solving for the term in which no `x_k`, `k ≥ 2`, lands on `x₁`:
/// `x⟨x₁,Y⟩ = (x◇x₁)⟨Y⟩ − Σ_{∅≠Y₁⊆Y} ε(Y₁,Y₂) x⟨x₁⟨Y₁⟩, Y₂⟩`.
pub fn brace_by_first<P: PreLie>(pl: &P, x: &P::Elem, xs: &[P::Elem]) -> Result<P::Elem> {
    match xs.len() {
        0 => return Ok(x.clone()),
        1 => return pl.circ(x, &xs[0]),
        _ => {}
    }
    let (x1, ys) = (&xs[0], &xs[1..]);
    let m = ys.len();
    let degs: Vec<i64> = ys.iter().map(|e| pl.degree(e)).collect();
    let mut out = brace_by_first(pl, &pl.circ(x, x1)?, ys)?;
    for size in 1..=m {
        for (first, rest) in unshuffles(m, size) {
            let order: Vec<usize> = first.iter().chain(&rest).copied().collect();
            // Koszul sign only: the brace is graded symmetric, not antisymmetric
            let s = crate::exact_tensor::koszul_sign(&crate::exact_tensor::Perm::from_zero_based(&order)?, &degs)? as i64;
            let y1: Vec<P::Elem> = first.iter().map(|&k| ys[k].clone()).collect();
            let mut args = vec![brace_by_first(pl, x1, &y1)?];
            args.extend(rest.iter().map(|&k| ys[k].clone()));
            out = out.sub(&brace_by_first(pl, x, &args)?.scale(&rat(s)));
        }
    }
    Ok(out)
}

/// `R_n = dμ_n + ½ Σ_{i+j=n+1, i,j≥2} [μ_i, μ_j]` for `n = 2, …, 2·max − 1`, with
/// `dμ = d∘μ − (−1)^n μ∘d^{[n]}`. `mus[k]` is `μ_{k+2}`.
pub fn ainf_master_residual(mus: &[MultiTensor], d: Option<&MultiTensor>) -> Result<Vec<(usize, MultiTensor)>> {
    let dim = match (mus.first(), d) {
        (Some(m), _) => m.dim(),
        (None, Some(d)) => d.dim(),
        (None, None) => return Ok(vec![]),
    };
    for (k, m) in mus.iter().enumerate() {
        if m.p() != k + 2 || m.q() != 1 {
            return Err(Error::Arity(format!("μ_{} must be {}-ary with one output", k + 2, k + 2)));
        }
        if m.dim() != dim {
            return Err(Error::DimMismatch(dim, m.dim()));
        }
    }
    if let Some(d) = d {
        if (d.p(), d.q()) != (1, 1) {
            return Err(Error::Arity("d must map V → V".into()));
        }
    }
    let mu = |n: usize| mus.get(n.wrapping_sub(2));
    let top = 2 * (mus.len() + 1) - 1;
    let mut out = Vec::new();
    for n in 2..=top.max(2) {
        let mut r = MultiTensor::zeros(dim, n, 1);
        if let (Some(d), Some(m)) = (d, mu(n)) {
            let spread = (0..n)
                .map(|i| tensor_all(dim, &[identity_power(dim, i), d.clone(), identity_power(dim, n - 1 - i)]))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .reduce(|a, b| a.add(&b))
                .expect("n ≥ 2");
            r = r.add(&d.compose(m)?).sub(&m.compose(&spread)?.scale(&pm(n % 2 == 1)));
        }
        for i in 2..=n - 1 {
            let j = n + 1 - i;
            if let (Some(a), Some(b)) = (mu(i), mu(j)) {
                r = r.add(&gerstenhaber_bracket(a, b)?.scale(&crate::exact_tensor::ratio(1, 2)));
            }
        }
        out.push((n, r));
    }
    Ok(out)
}

/// Basis index of `x₁` in [`mc_example`].
pub const EX_X1: usize = 0;
/// Basis index of `x₂` in [`mc_example`].
pub const EX_X2: usize = 1;
/// Basis index of `y` in [`mc_example`].
pub const EX_Y: usize = 2;

/// Basis index of the elementary endomorphism `E_{ij}: e_j ↦ e_i` in [`mc_example`].
pub fn ex_end(i: usize, j: usize) -> usize {
    3 + 3 * i + j
}

/// A truncated L∞ algebra with `N = 4`: the direct sum of
///
/// * a central part `x₁, x₂` (degree 1), `y` (degree 2) with
///   `l_k(x₁,…,x₁) = k!·y` for `k = 1…4` and every other bracket zero, and
/// * the graded Lie algebra `End(C)` for `C = ⟨e₀, e₁, e₂⟩` in degrees 0, 1, 2,
///   with the graded commutator.
///
/// `x₁ + E₁₀` solves the master equation.
pub fn mc_example() -> FiniteLInfinity {
    let mut degrees = vec![1, 1, 2];
    for i in 0..3 {
        for j in 0..3 {
            degrees.push(i as i64 - j as i64);
        }
    }
    let mut l = FiniteLInfinity::new(degrees);
    let y = l.basis(EX_Y);
    for k in 1..=4 {
        l.set(&vec![EX_X1; k], y.scale(&factorial(k))).expect("x₁ is odd");
    }
    for (i, j, k, m) in itertools::iproduct!(0..3, 0..3, 0..3, 0..3) {
        let (a, b) = (ex_end(i, j), ex_end(k, m));
        if a > b {
            continue;
        }
        let (da, db) = ((i as i64 - j as i64), (k as i64 - m as i64));
        // E_ij E_km = δ_jk E_im
        let mut v = l.zero();
        if j == k {
            v = v.add(&l.basis(ex_end(i, m)));
        }
        if m == i {
            v = v.sub(&l.basis(ex_end(k, j)).scale(&pm((da * db) % 2 != 0)));
        }
        l.set(&[a, b], v).expect("graded commutators vanish on repeated even elements");
    }
    l
}

/// The differential on [`mc_example`]'s space with `d(x₂) = y`.
pub fn mc_example_differential(x: &GradedVector) -> GradedVector {
    let mut c = vec![Rational::zero(); x.coeffs().len()];
    c[EX_Y] = x.coeffs()[EX_X2].clone();
    GradedVector::new(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff_table::builtin_table;
    use crate::exact_tensor::ratio;
    use crate::fraction_calc::fraction;
    use crate::gs_complex::GSCochain;
    use crate::prop_graph::{DecoratedGraph, GenSym};
    use crate::random::RandomSource;

    fn random_homogeneous(l: &FiniteLInfinity, r: &mut RandomSource, deg: i64) -> GradedVector {
        let coeffs = l.degrees().iter().map(|&d| if d == deg { r.rational() } else { Rational::zero() }).collect();
        GradedVector::new(coeffs)
    }

    fn kappa(l: &FiniteLInfinity) -> GradedVector {
        l.basis(EX_X1).add(&l.basis(ex_end(1, 0)))
    }

    #[test]
    fn example_is_an_linfinity_algebra() {
        let l = mc_example();
        assert_eq!(l.truncation_order(), 4);
        let mut r = RandomSource::new(1);
        for n in 1..=4 {
            for _ in 0..4 {
                let xs: Vec<GradedVector> = (0..n).map(|_| {
                    let d = [-2, -1, 0, 1, 2][r.range(0, 4)];
                    random_homogeneous(&l, &mut r, d)
                }).collect();
                let refs: Vec<&GradedVector> = xs.iter().collect();
                assert!(linf_relation(&l, &refs).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn graded_antisymmetry_of_commutator() {
        let l = mc_example();
        let (a, b) = (l.basis(ex_end(1, 0)), l.basis(ex_end(2, 1)));
        // both odd: [E₁₀, E₂₁] = E₁₀E₂₁ + E₂₁E₁₀ = E₂₀
        let ab = l.bracket(&[&a, &b]).unwrap();
        let ba = l.bracket(&[&b, &a]).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab, l.basis(ex_end(2, 0)));
        let c = l.basis(ex_end(0, 0));
        assert_eq!(l.bracket(&[&c, &a]).unwrap(), l.basis(ex_end(1, 0)).scale(&rat(-1)));
    }

    #[test]
    fn twisting_by_an_mc_element() {
        let l = mc_example();
        let k = kappa(&l);
        assert!(master_residual(&l, None, &k).unwrap().is_zero());
        let t = twist(&l, k.clone()).unwrap();
        assert!(t.curvature().unwrap().is_zero());
        let f = flatten(t, None).unwrap();
        let mut r = RandomSource::new(2);
        let mut nontrivial = false;
        for i in 0..l.dim() {
            let w = l.basis(i);
            let lw = f.bracket(&[&w]).unwrap();
            nontrivial |= !lw.is_zero();
            assert!(f.bracket(&[&lw]).unwrap().is_zero());
        }
        assert!(nontrivial);
        for n in 1..=3 {
            let xs: Vec<GradedVector> = (0..n).map(|k| random_homogeneous(&l, &mut r, [0, 1, -1][k % 3])).collect();
            assert!(linf_relation(&f, &xs.iter().collect::<Vec<_>>()).unwrap().is_zero());
        }
    }

    #[test]
    fn twisting_by_zero_is_the_identity() {
        let l = mc_example();
        let t = twist(&l, l.zero()).unwrap();
        let mut r = RandomSource::new(3);
        for n in 0..=4 {
            let xs: Vec<GradedVector> = (0..n).map(|_| random_homogeneous(&l, &mut r, 1)).collect();
            let refs: Vec<&GradedVector> = xs.iter().collect();
            assert_eq!(t.bracket(&refs).unwrap(), l.bracket(&refs).unwrap());
        }
    }

    #[test]
    fn twists_compose() {
        let l = mc_example();
        let mut r = RandomSource::new(4);
        let (k1, k2) = (random_homogeneous(&l, &mut r, 1), random_homogeneous(&l, &mut r, 1));
        let both = twist(twist(&l, k1.clone()).unwrap(), k2.clone()).unwrap();
        let sum = twist(&l, k1.add(&k2)).unwrap();
        for n in 0..=4 {
            let xs: Vec<GradedVector> = (0..n).map(|k| random_homogeneous(&l, &mut r, [1, 0, 2, -1][k])).collect();
            let refs: Vec<&GradedVector> = xs.iter().collect();
            assert_eq!(both.bracket(&refs).unwrap(), sum.bracket(&refs).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn flattening_with_a_differential() {
        let l = mc_example();
        let s = ratio(1, 2);
        let poly = &s + &s * &s - &s * &s * &s - &s * &s * &s * &s;
        let k = l.vector(&[(EX_X1, s.clone()), (EX_X2, -poly.clone())]);
        let d = |x: &GradedVector| mc_example_differential(x);
        assert!(master_residual(&l, Some(&d), &k).unwrap().is_zero());
        let f = flatten(twist(&l, k).unwrap(), Some(Box::new(mc_example_differential))).unwrap();
        for i in 0..l.dim() {
            let lw = f.bracket(&[&l.basis(i)]).unwrap();
            assert!(f.bracket(&[&lw]).unwrap().is_zero());
        }
        assert!(f.bracket(&[]).unwrap().is_zero());
        // without d the hypothesis fails and the residual is reported
        let bad = l.vector(&[(EX_X1, s), (EX_X2, -poly)]);
        match flatten(twist(&l, bad).unwrap(), None) {
            Err(FlattenError::Residual(r)) => assert!(!r.is_zero()),
            _ => panic!("expected a residual"),
        }
    }

    #[test]
    fn single_binary_bracket_twist() {
        // a (degree 1), b (degree 2), l₂(a,a) = b
        let mut l = FiniteLInfinity::new(vec![1, 2]);
        l.set(&[0, 0], l.basis(1)).unwrap();
        let a = l.basis(0);
        let t = twist(&l, a.clone()).unwrap();
        assert_eq!(t.bracket(&[&a]).unwrap(), l.bracket(&[&a, &a]).unwrap());
        assert!(twist(&l, l.basis(1)).is_err());
    }

    fn kappa_gs(m: MultiTensor, c: MultiTensor) -> GSElement {
        GSElement::from_tensors(m.dim(), [m, c]).unwrap()
    }

    #[test]
    fn trivial_bialgebra_master_equation() {
        let gs = GsProvider::new(builtin_table(), BialgebraData::trivial(1));
        let g = BialgebraData::ground_field();
        let k = kappa_gs(g.mu().clone(), g.delta().clone());
        assert!(master_residual(&gs, None, &k).unwrap().is_zero());
        let k2 = kappa_gs(g.mu().clone(), g.delta().scale(&rat(2)));
        let r = master_residual(&gs, None, &k2).unwrap();
        assert!(r.component(2, 2).is_some());
        assert!(r.component(3, 1).is_none() && r.component(1, 3).is_none());
        // h₂ and h₄ on the (2,2) component
        let h2 = gs.bracket(&[&k, &k]).unwrap().component_or_zero(2, 2);
        let cm = g.delta().compose(g.mu()).unwrap();
        assert_eq!(h2, cm.scale(&rat(-2)));
        let h4 = gs.bracket(&[&k, &k, &k, &k]).unwrap().component_or_zero(2, 2);
        let (m, c) = (DecoratedGraph::corolla(GenSym::MU), DecoratedGraph::corolla(GenSym::DELTA));
        let fr = fraction(&[m.clone(), m], &[c.clone(), c]).unwrap();
        let fr = crate::endo_eval::evaluate(&fr, &crate::endo_eval::Decoration::new(&g)).unwrap();
        assert_eq!(h4, fr.scale(&rat(-24)));
        assert!(gs.bracket(&[&k, &k, &k]).unwrap().is_zero());
    }

    #[test]
    fn residual_requires_degree_one() {
        let gs = GsProvider::new(builtin_table(), BialgebraData::trivial(1));
        let mut r = RandomSource::new(5);
        let f = GSElement::from_cochain(&r.cochain(1, 2, 2));
        assert_eq!(master_residual(&gs, None, &f), Err(Error::NotDegreeOne));
        let flat = master_residual(&gs, None, &gs.zero()).unwrap();
        assert!(flat.is_zero());
    }

    #[test]
    fn ainf_residuals() {
        let g = BialgebraData::ground_field();
        let res = ainf_master_residual(&[g.mu().clone()], None).unwrap();
        assert_eq!(res.len(), 2);
        assert!(res.iter().all(|(_, r)| r.is_zero()));
        assert!(ainf_master_residual(&[], None).unwrap().is_empty());
        let mut r = RandomSource::new(6);
        let mu = r.tensor(2, 2, 1);
        let res = ainf_master_residual(std::slice::from_ref(&mu), None).unwrap();
        let r3 = &res[1].1;
        let id = identity_power(2, 1);
        let assoc = mu.compose(&mu.tensor_product(&id).unwrap()).unwrap().sub(&mu.compose(&id.tensor_product(&mu).unwrap()).unwrap());
        assert_eq!(r3, &assoc);
        // the same component from the deformation complex of the trivial bialgebra
        let gs = GsProvider::new(builtin_table(), BialgebraData::trivial(2));
        let m = master_residual(&gs, None, &GSElement::from_cochain(&GSCochain::new(mu).unwrap())).unwrap();
        assert_eq!(m.component_or_zero(3, 1), r3.neg());
        assert!(ainf_master_residual(&[r.tensor(2, 3, 1)], None).is_err());
    }

    #[test]
    fn braces_two_routes() {
        let pl = HochschildPreLie;
        let mut r = RandomSource::new(7);
        let x = r.tensor(2, 3, 1);
        let xs = vec![r.tensor(2, 2, 1), r.tensor(2, 1, 1), r.tensor(2, 3, 1)];
        assert_eq!(brace(&pl, &x, &[]).unwrap(), x);
        assert_eq!(brace(&pl, &x, &xs[..1]).unwrap(), gerstenhaber_circ(&x, &xs[0]).unwrap());
        let two = brace(&pl, &x, &xs[..2]).unwrap();
        let seed = associator(&pl, &x, &xs[0], &xs[1]).unwrap();
        assert_eq!(two, seed);
        let a = brace(&pl, &x, &xs).unwrap();
        let b = brace_by_first(&pl, &x, &xs).unwrap();
        assert!(!a.is_zero());
        assert_eq!(a, b);
        // graded symmetry: |x₁| = 1, |x₃| = 2
        let swapped = brace(&pl, &x, &[xs[2].clone(), xs[1].clone(), xs[0].clone()]).unwrap();
        assert_eq!(swapped, a);
        let odd = vec![r.tensor(2, 2, 1), r.tensor(2, 2, 1)];
        let y = r.tensor(2, 4, 1);
        assert_eq!(brace(&pl, &y, &odd).unwrap(), brace(&pl, &y, &[odd[1].clone(), odd[0].clone()]).unwrap().neg());
    }
}
