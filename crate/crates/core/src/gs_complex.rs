//! The deformation bicomplex of a bialgebra, the differential induced by the
//! minimal model, and the L∞ brackets it carries.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::diff_table::DiffTable;
use crate::endo_eval::{evaluate, iterated_diagonal, iterated_product, BialgebraData, Decoration, Diagram};
use crate::error::{Error, Result};
use crate::exact_tensor::{koszul_sign, rat, Linear, MultiTensor, Perm, Rational};
use crate::prop_graph::{DecoratedGraph, GenSym};

/// `f ∈ C^{p,q} = Lin(V^{⊗p}, V^{⊗q})`, of degree `p + q − 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSCochain {
    tensor: MultiTensor,
}

impl GSCochain {
    pub fn new(tensor: MultiTensor) -> Result<Self> {
        if tensor.p() == 0 || tensor.q() == 0 {
            return Err(Error::Arity(format!("cochains need p, q ≥ 1; got ({}, {})", tensor.p(), tensor.q())));
        }
        Ok(GSCochain { tensor })
    }

    pub fn p(&self) -> usize {
        self.tensor.p()
    }

    pub fn q(&self) -> usize {
        self.tensor.q()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn degree(&self) -> i64 {
        (self.p() + self.q()) as i64 - 2
    }

    /// `(outputs, inputs)`, the biarity of the generator it decorates.
    pub fn biarity(&self) -> (usize, usize) {
        (self.q(), self.p())
    }

    pub fn tensor(&self) -> &MultiTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> MultiTensor {
        self.tensor
    }
}

/// A finite sum of cochains, one tensor per `(p, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSElement {
    dim: usize,
    components: BTreeMap<(usize, usize), MultiTensor>,
}

impl GSElement {
    pub fn zero(dim: usize) -> Self {
        GSElement { dim, components: BTreeMap::new() }
    }

    pub fn from_tensor(t: MultiTensor) -> Self {
        let mut e = GSElement::zero(t.dim());
        e.add_component(t).expect("same dimension");
        e
    }

    pub fn from_cochain(f: &GSCochain) -> Self {
        GSElement::from_tensor(f.tensor().clone())
    }

    pub fn from_tensors(dim: usize, ts: impl IntoIterator<Item = MultiTensor>) -> Result<Self> {
        let mut e = GSElement::zero(dim);
        for t in ts {
            e.add_component(t)?;
        }
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Add `t` to the component of its shape; zero components are dropped.
    pub fn add_component(&mut self, t: MultiTensor) -> Result<()> {
        if t.dim() != self.dim {
            return Err(Error::DimMismatch(self.dim, t.dim()));
        }
        if t.p() == 0 || t.q() == 0 {
            return Err(Error::Arity("components need p, q ≥ 1".into()));
        }
        let key = (t.p(), t.q());
        let sum = match self.components.remove(&key) {
            Some(old) => old.try_add(&t)?,
            None => t,
        };
        if !Linear::is_zero(&sum) {
            self.components.insert(key, sum);
        }
        Ok(())
    }

    pub fn component(&self, p: usize, q: usize) -> Option<&MultiTensor> {
        self.components.get(&(p, q))
    }

    /// The component at `(p, q)`, zero if absent.
    pub fn component_or_zero(&self, p: usize, q: usize) -> MultiTensor {
        self.component(p, q).cloned().unwrap_or_else(|| MultiTensor::zeros(self.dim, p, q))
    }

    pub fn components(&self) -> impl Iterator<Item = ((usize, usize), &MultiTensor)> {
        self.components.iter().map(|(k, t)| (*k, t))
    }

    /// The common degree of all components, if homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let degs: BTreeSet<i64> = self.components.keys().map(|&(p, q)| (p + q) as i64 - 2).collect();
        (degs.len() == 1).then(|| *degs.iter().next().unwrap())
    }

    pub fn is_homogeneous_of(&self, d: i64) -> bool {
        self.components.keys().all(|&(p, q)| (p + q) as i64 - 2 == d)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "components": self.components.iter().map(|(&(p, q), t)| json!({"p": p, "q": q, "tensor": t.to_json()})).collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &Value, dim: usize) -> Result<Self> {
        let arr = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("element needs a \"components\" array".into()))?;
        let mut e = GSElement::zero(dim);
        let mut seen = BTreeSet::new();
        for c in arr {
            let get = |k: &str| {
                c.get(k)
                    .and_then(Value::as_u64)
                    .filter(|&x| x >= 1)
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse(format!("component needs a positive integer \"{k}\"")))
            };
            let (p, q) = (get("p")?, get("q")?);
            if !seen.insert((p, q)) {
                return Err(Error::Parse(format!("duplicate component ({p},{q})")));
            }
            let t = c.get("tensor").ok_or_else(|| Error::Parse("component needs a \"tensor\"".into()))?;
            e.add_component(MultiTensor::from_json(t, Some(dim), p, q)?)?;
        }
        Ok(e)
    }
}

impl Linear for GSElement {
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (_, t) in other.components() {
            out.add_component(t.clone()).expect("same dimension");
        }
        out
    }

    fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return GSElement::zero(self.dim);
        }
        GSElement { dim: self.dim, components: self.components.iter().map(|(k, t)| (*k, t.scale(c))).collect() }
    }

    fn is_zero(&self) -> bool {
        self.components.is_empty()
    }
}

fn sign(odd: bool) -> Rational {
    if odd {
        rat(-1)
    } else {
        rat(1)
    }
}

fn id(dim: usize, k: usize) -> Diagram {
    Diagram::identity(dim, k)
}

fn map(t: &MultiTensor) -> Diagram {
    Diagram::map(t)
}

fn tens(dim: usize, parts: &[Diagram]) -> Diagram {
    Diagram::tensor(dim, parts).expect("same dimension")
}

fn comp(a: &Diagram, b: &Diagram) -> Diagram {
    Diagram::compose(a, b).expect("arities agree")
}

fn eval(x: &Diagram) -> MultiTensor {
    x.evaluate().expect("well-formed diagram")
}

/// `(a₁…a_k, w₁…w_k) ↦ (a₁, w₁, …, a_k, w_k)`.
fn interleave(k: usize) -> Perm {
    let mut images = vec![0; 2 * k];
    for i in 0..k {
        images[i] = 2 * i + 1;
        images[k + i] = 2 * i + 2;
    }
    Perm::new(images).expect("interleaving is a bijection")
}

/// `u · (w₁⊗…⊗w_q) = Δ^{[q]}(u)·(w₁⊗…⊗w_q)`, as a map `V⊗V^{⊗q} → V^{⊗q}`.
fn left_action(b: &BialgebraData, q: usize) -> Diagram {
    let d = b.dim();
    let mus = tens(d, &vec![map(b.mu()); q]);
    let t = Diagram::permutation(d, &interleave(q));
    comp(&mus, &comp(&t, &tens(d, &[map(&iterated_diagonal(b, q)), id(d, q)])))
}

/// `(w₁⊗…⊗w_q) · u`, as a map `V^{⊗q}⊗V → V^{⊗q}`.
fn right_action(b: &BialgebraData, q: usize) -> Diagram {
    let d = b.dim();
    let mus = tens(d, &vec![map(b.mu()); q]);
    let t = Diagram::permutation(d, &interleave(q));
    comp(&mus, &comp(&t, &tens(d, &[id(d, q), map(&iterated_diagonal(b, q))])))
}

/// The coaction dual to [`left_action`], `V^{⊗p} → V⊗V^{⊗p}`.
fn left_coaction(b: &BialgebraData, p: usize) -> Diagram {
    let d = b.dim();
    let deltas = tens(d, &vec![map(b.delta()); p]);
    let t = Diagram::permutation(d, &interleave(p).inverse());
    comp(&tens(d, &[map(&iterated_product(b, p)), id(d, p)]), &comp(&t, &deltas))
}

/// The coaction dual to [`right_action`], `V^{⊗p} → V^{⊗p}⊗V`.
fn right_coaction(b: &BialgebraData, p: usize) -> Diagram {
    let d = b.dim();
    let deltas = tens(d, &vec![map(b.delta()); p]);
    let t = Diagram::permutation(d, &interleave(p).inverse());
    comp(&tens(d, &[id(d, p), map(&iterated_product(b, p))]), &comp(&t, &deltas))
}

fn check_dim(b: &BialgebraData, t: &MultiTensor) -> Result<()> {
    if b.dim() != t.dim() {
        return Err(Error::DimMismatch(b.dim(), t.dim()));
    }
    Ok(())
}

/// The Hochschild differential of `(V, μ)` with coefficients in the bimodule
/// `V^{⊗q}`: `C^{p,q} → C^{p+1,q}`.
pub fn d1(b: &BialgebraData, f: &GSCochain) -> Result<GSCochain> {
    check_dim(b, f.tensor())?;
    GSCochain::new(d1_tensor(b, f.tensor()))
}

fn d1_tensor(b: &BialgebraData, f: &MultiTensor) -> MultiTensor {
    let (d, p, q) = (b.dim(), f.p(), f.q());
    let mut out = eval(&comp(&left_action(b, q), &tens(d, &[id(d, 1), map(f)])));
    for i in 1..=p {
        let inner = tens(d, &[id(d, i - 1), map(b.mu()), id(d, p - i)]);
        out = out.add(&eval(&comp(&map(f), &inner)).scale(&sign(i % 2 == 1)));
    }
    let last = eval(&comp(&right_action(b, q), &tens(d, &[map(f), id(d, 1)])));
    out.add(&last.scale(&sign((p + 1) % 2 == 1)))
}

/// The dual, co-Hochschild differential `C^{p,q} → C^{p,q+1}`.
pub fn d2(b: &BialgebraData, f: &GSCochain) -> Result<GSCochain> {
    check_dim(b, f.tensor())?;
    GSCochain::new(d2_tensor(b, f.tensor()))
}

fn d2_tensor(b: &BialgebraData, f: &MultiTensor) -> MultiTensor {
    let (d, p, q) = (b.dim(), f.p(), f.q());
    let mut out = eval(&comp(&tens(d, &[id(d, 1), map(f)]), &left_coaction(b, p)));
    for i in 1..=q {
        let outer = tens(d, &[id(d, i - 1), map(b.delta()), id(d, q - i)]);
        out = out.add(&eval(&comp(&outer, &map(f))).scale(&sign(i % 2 == 1)));
    }
    let last = eval(&comp(&tens(d, &[map(f), id(d, 1)]), &right_coaction(b, p)));
    out.add(&last.scale(&sign((q + 1) % 2 == 1)))
}

/// Sign of `d₂` inside `d_GS`, making the two differentials anticommute.
pub fn d2_twist(p: usize) -> i64 {
    if p.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `d_GS = d₁ + (−1)^p d₂` componentwise; see [`d2_twist`].
pub fn d_gs(b: &BialgebraData, x: &GSElement) -> Result<GSElement> {
    if b.dim() != x.dim() {
        return Err(Error::DimMismatch(b.dim(), x.dim()));
    }
    let mut out = GSElement::zero(b.dim());
    for ((p, _), t) in x.components() {
        out.add_component(d1_tensor(b, t))?;
        out.add_component(d2_tensor(b, t).scale(&rat(d2_twist(p))))?;
    }
    Ok(out)
}

/// `f^{[k]} = Σ_i 1^{⊗(i−1)} ⊗ f ⊗ 1^{⊗(k−i)}` for `f ∈ C^{1,1}`.
fn spread(f: &MultiTensor, k: usize) -> MultiTensor {
    let d = f.dim();
    (0..k)
        .map(|i| eval(&tens(d, &[id(d, i), map(f), id(d, k - 1 - i)])))
        .reduce(|a, b| a.add(&b))
        .expect("k ≥ 1")
}

/// The contribution of `f ∈ C^{1,1}` at `ξ^m_n`: `f^{[m]}∘β(ξ) − β(ξ)∘f^{[n]}`.
/// `C^{1,1}` decorates no vertex; it enters through the endomorphism generator
/// of the minimal model, whose differential is the derivation commutator.
fn endomorphism_sector(b: &BialgebraData, f: &MultiTensor, target: GenSym) -> MultiTensor {
    let beta = match target {
        GenSym::MU => b.mu(),
        GenSym::DELTA => b.delta(),
        _ => return MultiTensor::zeros(b.dim(), target.ins, target.outs),
    };
    let (fo, fi) = (spread(f, target.outs), spread(f, target.ins));
    fo.compose(beta).unwrap().try_sub(&beta.compose(&fi).unwrap()).unwrap()
}

/// `ν(f₁…f_k) = Σ_i (k − i)|f_i|`.
fn nu(degrees: &[i64]) -> i64 {
    let k = degrees.len() as i64;
    degrees.iter().enumerate().map(|(i, d)| (k - 1 - i as i64) * d).sum()
}

fn target_gen(target: (usize, usize)) -> Result<GenSym> {
    GenSym::new(target.0, target.1)
}

/// `l_k(x₁…x_k)^m_n` for arbitrary (possibly inhomogeneous) elements.
///
/// Each term of `∂ξ^m_n` contributes, for every ordered tuple of distinct
/// vertices `v₁…v_k`, the graph with `v_i` decorated by the component of `x_i`
/// of matching biarity and all other vertices by `β`; multilinearity in the
/// components is exact because each vertex selects at most one component.
pub fn bracket_element(t: &DiffTable, b: &BialgebraData, xs: &[&GSElement], target: (usize, usize)) -> Result<MultiTensor> {
    let gen = target_gen(target)?;
    let entry = t.entry(gen)?;
    let (dim, k) = (b.dim(), xs.len());
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimMismatch(dim, x.dim()));
    }
    let mut out = MultiTensor::zeros(dim, gen.ins, gen.outs);
    if k == 0 {
        for (c, g) in entry.terms() {
            out = out.add(&evaluate(g, &Decoration::new(b))?.scale(&rat(c)));
        }
        return Ok(out);
    }
    if k >= 2 && xs.iter().any(|x| x.component(1, 1).is_some()) {
        return Err(Error::NotComputable("C^{1,1} enters only the unary bracket".into()));
    }
    if k == 1 {
        if let Some(f) = xs[0].component(1, 1) {
            out = out.add(&endomorphism_sector(b, f, gen).scale(&rat(-1)));
        }
    }
    for (c, g) in entry.terms() {
        out = out.add(&graph_bracket(g, b, xs)?.scale(&rat(c)));
    }
    Ok(out)
}

fn graph_bracket(g: &DecoratedGraph, b: &BialgebraData, xs: &[&GSElement]) -> Result<MultiTensor> {
    let k = xs.len();
    let n = g.vertex_count();
    let mut out = MultiTensor::zeros(b.dim(), g.inputs(), g.outputs());
    if k > n {
        return Ok(out);
    }
    // for each element, the vertices it can decorate
    let fits: Vec<Vec<(usize, &MultiTensor)>> = xs
        .iter()
        .map(|x| {
            (0..n)
                .filter_map(|v| {
                    let gen = g.decoration(v);
                    x.component(gen.ins, gen.outs).map(|t| (v, t))
                })
                .collect()
        })
        .collect();
    for choice in fits.iter().map(|f| f.iter()).multi_cartesian_product() {
        let vs: Vec<usize> = choice.iter().map(|(v, _)| *v).collect();
        if vs.iter().collect::<BTreeSet<_>>().len() < k {
            continue;
        }
        let degs: Vec<i64> = choice.iter().map(|(_, t)| (t.p() + t.q()) as i64 - 2).collect();
        // Koszul sign for bringing the decorated vertices into graph order
        let order: Vec<usize> = (0..k).sorted_by_key(|&i| vs[i]).collect();
        let vdegs: Vec<i64> = degs.iter().map(|d| d - 1).collect();
        let ks = koszul_sign(&Perm::from_zero_based(&order)?, &vdegs)?;
        let s = if nu(&degs) % 2 == 0 { ks } else { -ks };
        let mut dec = Decoration::new(b);
        for (v, t) in &choice {
            dec = dec.with(*v, t);
        }
        out = out.add(&evaluate(g, &dec)?.scale(&rat(s as i64)));
    }
    Ok(out)
}

/// `l_k(f₁…f_k)^m_n` for cochains.
pub fn l_bracket(t: &DiffTable, b: &BialgebraData, fs: &[GSCochain], target: (usize, usize)) -> Result<MultiTensor> {
    let es: Vec<GSElement> = fs.iter().map(GSElement::from_cochain).collect();
    bracket_element(t, b, &es.iter().collect::<Vec<_>>(), target)
}

/// `(δ_B f)^m_n`.
pub fn delta_b(t: &DiffTable, b: &BialgebraData, f: &GSCochain, target: (usize, usize)) -> Result<MultiTensor> {
    l_bracket(t, b, std::slice::from_ref(f), target)
}

/// All components of `l_k(x₁…x_k)` at the table's generators.
pub fn bracket_all(t: &DiffTable, b: &BialgebraData, xs: &[&GSElement]) -> Result<GSElement> {
    let mut out = GSElement::zero(b.dim());
    for g in t.generators() {
        out.add_component(bracket_element(t, b, xs, (g.outs, g.ins))?)?;
    }
    Ok(out)
}

/// Global sign `c` with `(δ_B f)^q_{p+1} = c·d₁f` on `C^{p,q}`, determined by
/// exact comparison against the built-in table:
/// `(−1)^{C(q+1,2) + (p−1)(q−1)}`, except `+1` on `C^{1,1}`.
pub fn d1_sign(p: usize, q: usize) -> i64 {
    if (p, q) == (1, 1) {
        return 1;
    }
    if (q * (q + 1) / 2 + (p - 1) * (q - 1)).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Global sign `c` with `(δ_B f)^{q+1}_p = c·d₂f` on `C^{p,q}`, determined by
/// exact comparison against the built-in table.
pub fn d2_sign(_p: usize, _q: usize) -> i64 {
    -1
}

/// Comparison of `δ_B f` with `d₁f` and `d₂f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaComparison {
    pub d1_sign: i64,
    pub d2_sign: i64,
    /// `(δ_B f)^q_{p+1} − c₁·d₁f`
    pub d1_residual: MultiTensor,
    /// `(δ_B f)^{q+1}_p − c₂·d₂f`
    pub d2_residual: MultiTensor,
    /// Whether `δ_B f` vanishes at each other target of the right degree.
    pub other_targets: BTreeMap<(usize, usize), bool>,
}

impl DeltaComparison {
    pub fn matches(&self) -> bool {
        Linear::is_zero(&self.d1_residual) && Linear::is_zero(&self.d2_residual) && self.other_targets.values().all(|&z| z)
    }
}

pub fn delta_matches_dgs(t: &DiffTable, b: &BialgebraData, f: &GSCochain) -> Result<DeltaComparison> {
    let (p, q) = (f.p(), f.q());
    let (c1, c2) = (d1_sign(p, q), d2_sign(p, q));
    let r1 = delta_b(t, b, f, (q, p + 1))?.try_sub(&d1(b, f)?.tensor().scale(&rat(c1)))?;
    let r2 = delta_b(t, b, f, (q + 1, p))?.try_sub(&d2(b, f)?.tensor().scale(&rat(c2)))?;
    let mut other_targets = BTreeMap::new();
    for g in t.generators() {
        let tg = (g.outs, g.ins);
        if g.outs + g.ins == p + q + 1 && tg != (q, p + 1) && tg != (q + 1, p) {
            other_targets.insert(tg, Linear::is_zero(&delta_b(t, b, f, tg)?));
        }
    }
    Ok(DeltaComparison { d1_sign: c1, d2_sign: c2, d1_residual: r1, d2_residual: r2, other_targets })
}

/// Insertion `f ∘ g = Σ_i (−1)^{(i−1)(r−1)} f(1^{⊗(i−1)} ⊗ g ⊗ 1^{⊗(p−i)})`
/// for single-output `f` (p-ary) and `g` (r-ary).
pub fn gerstenhaber_circ(f: &MultiTensor, g: &MultiTensor) -> Result<MultiTensor> {
    if f.q() != 1 || g.q() != 1 {
        return Err(Error::Arity("Gerstenhaber operations need single-output cochains".into()));
    }
    if f.dim() != g.dim() {
        return Err(Error::DimMismatch(f.dim(), g.dim()));
    }
    let (d, p, r) = (f.dim(), f.p(), g.p());
    let mut out = MultiTensor::zeros(d, p + r - 1, 1);
    for i in 1..=p {
        let inner = tens(d, &[id(d, i - 1), map(g), id(d, p - i)]);
        out = out.add(&eval(&comp(&map(f), &inner)).scale(&sign((i - 1) * (r.max(1) - 1) % 2 == 1)));
    }
    Ok(out)
}

/// `[f, g] = f∘g − (−1)^{(p−1)(r−1)} g∘f`.
pub fn gerstenhaber_bracket(f: &MultiTensor, g: &MultiTensor) -> Result<MultiTensor> {
    let (p, r) = (f.p(), g.p());
    let fg = gerstenhaber_circ(f, g)?;
    let gf = gerstenhaber_circ(g, f)?;
    fg.try_sub(&gf.scale(&sign((p.max(1) - 1) * (r.max(1) - 1) % 2 == 1)))
}

/// `(i, n−i)`-unshuffles as 0-based index lists (first block, second block).
pub fn unshuffles(n: usize, i: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..n)
        .combinations(i)
        .map(|first| {
            let rest = (0..n).filter(|x| !first.contains(x)).collect();
            (first, rest)
        })
        .collect()
}

/// `η(σ) = sgn(σ)·ε(σ)` for the reordering `x_{σ(1)} … x_{σ(n)}`.
pub fn eta(order: &[usize], degrees: &[i64]) -> Result<i64> {
    let s = Perm::from_zero_based(order)?;
    Ok(s.sign() as i64 * koszul_sign(&s, degrees)? as i64)
}

/// The generalized Jacobi expression
/// `Σ_{i+j=n+1} Σ_σ η(σ)(−1)^{i(j−1)} l_j(l_i(f_{σ(1)}…f_{σ(i)}), f_{σ(i+1)}…f_{σ(n)})`
/// at `target`. Inner brackets are assembled at every vertex biarity the
/// outer graphs can feed them to; a missing table entry there is reported.
pub fn linf_relation_residual(
    t: &DiffTable,
    b: &BialgebraData,
    fs: &[GSCochain],
    target: (usize, usize),
) -> Result<MultiTensor> {
    let n = fs.len();
    let gen = target_gen(target)?;
    let entry = t.entry(gen)?;
    let slots: BTreeSet<GenSym> = entry.terms().flat_map(|(_, g)| g.decorations().to_vec()).collect();
    let degs: Vec<i64> = fs.iter().map(GSCochain::degree).collect();
    let elems: Vec<GSElement> = fs.iter().map(GSElement::from_cochain).collect();
    let mut out = MultiTensor::zeros(b.dim(), gen.ins, gen.outs);
    for i in 1..=n {
        let j = n + 1 - i;
        for (first, rest) in unshuffles(n, i) {
            let inner_deg: i64 = first.iter().map(|&k| degs[k]).sum::<i64>() + 2 - i as i64;
            let order: Vec<usize> = first.iter().chain(&rest).copied().collect();
            let e = eta(&order, &degs)?;
            let args: Vec<&GSElement> = first.iter().map(|&k| &elems[k]).collect();
            let mut inner = GSElement::zero(b.dim());
            for s in &slots {
                if s.degree() + 1 != inner_deg {
                    continue;
                }
                if t.get(*s).is_none() {
                    return Err(Error::NotComputable(format!("inner bracket needs the table entry for {s}")));
                }
                inner.add_component(bracket_element(t, b, &args, (s.outs, s.ins))?)?;
            }
            let mut outer_args = vec![&inner];
            outer_args.extend(rest.iter().map(|&k| &elems[k]));
            let v = bracket_element(t, b, &outer_args, target)?;
            let s = e * if (i * (j - 1)).is_multiple_of(2) { 1 } else { -1 };
            out = out.add(&v.scale(&rat(s)));
        }
    }
    Ok(out)
}
