//! Bialgebra data and the contraction of `End_V`-decorated graphs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_tensor::{decode, identity_power, permutation_tensor, rat, upow, MultiTensor, Perm, Rational};
use crate::fraction_calc::special_permutation;
use crate::prop_graph::{DecoratedGraph, GenSym, Graph, Source};

/// A vector space `V = k^dim` with a multiplication and a comultiplication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BialgebraData {
    dim: usize,
    mu: MultiTensor,
    delta: MultiTensor,
}

impl BialgebraData {
    pub fn new(mu: MultiTensor, delta: MultiTensor) -> Result<Self> {
        if mu.dim() != delta.dim() {
            return Err(Error::DimMismatch(mu.dim(), delta.dim()));
        }
        if (mu.p(), mu.q()) != (2, 1) {
            return Err(Error::Arity("μ must map V⊗V → V".into()));
        }
        if (delta.p(), delta.q()) != (1, 2) {
            return Err(Error::Arity("Δ must map V → V⊗V".into()));
        }
        Ok(BialgebraData { dim: mu.dim(), mu, delta })
    }

    /// `μ = 0`, `Δ = 0`.
    pub fn trivial(dim: usize) -> Self {
        BialgebraData { dim, mu: MultiTensor::zeros(dim, 2, 1), delta: MultiTensor::zeros(dim, 1, 2) }
    }

    /// `V = k·x` with `μ(x⊗x) = x`, `Δ(x) = x⊗x`.
    pub fn ground_field() -> Self {
        BialgebraData {
            dim: 1,
            mu: MultiTensor::from_entries(1, 2, 1, vec![rat(1)]).unwrap(),
            delta: MultiTensor::from_entries(1, 1, 2, vec![rat(1)]).unwrap(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> &MultiTensor {
        &self.mu
    }

    pub fn delta(&self) -> &MultiTensor {
        &self.delta
    }

    pub fn to_json(&self) -> Value {
        json!({ "dim": self.dim, "mu": self.mu.to_json(), "delta": self.delta.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Parse("bialgebra needs a positive integer \"dim\"".into()))? as usize;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("bialgebra needs \"{k}\"")));
        let mu = MultiTensor::from_json(field("mu")?, Some(dim), 2, 1)?;
        let delta = MultiTensor::from_json(field("delta")?, Some(dim), 1, 2)?;
        BialgebraData::new(mu, delta)
    }
}

/// `β` on the binary generators plus per-vertex overrides.
#[derive(Clone, Debug)]
pub struct Decoration<'a> {
    pub base: &'a BialgebraData,
    pub overrides: BTreeMap<usize, &'a MultiTensor>,
}

impl<'a> Decoration<'a> {
    pub fn new(base: &'a BialgebraData) -> Self {
        Decoration { base, overrides: BTreeMap::new() }
    }

    pub fn with(mut self, v: usize, f: &'a MultiTensor) -> Self {
        self.overrides.insert(v, f);
        self
    }
}

/// Contract a graph whose vertices carry the given maps.
pub fn contract(dim: usize, g: &Graph, assignment: &[&MultiTensor]) -> Result<MultiTensor> {
    contract_in_order(dim, g, assignment, &g.topological_order()?)
}

/// As [`contract`], propagating through the vertices in the given topological order.
pub fn contract_in_order(dim: usize, g: &Graph, assignment: &[&MultiTensor], order: &[usize]) -> Result<MultiTensor> {
    let n = g.vertex_count();
    if assignment.len() != n {
        return Err(Error::Arity(format!("{} maps for {n} vertices", assignment.len())));
    }
    for (v, t) in assignment.iter().enumerate() {
        if t.dim() != dim {
            return Err(Error::DimMismatch(dim, t.dim()));
        }
        let (outs, ins) = g.biarity(v);
        if (t.q(), t.p()) != (outs, ins) {
            return Err(Error::Arity(format!(
                "vertex {v} has biarity ({outs},{ins}) but its map is {}→{}",
                t.p(),
                t.q()
            )));
        }
    }
    let plan = Plan::new(dim, g, order)?;
    // integer columns: each map is scaled by the lcm of its denominators
    let mut denom: BigInt = One::one();
    let columns: Columns<BigInt> = assignment
        .iter()
        .map(|t| {
            let d = t.entries().iter().fold(<BigInt as One>::one(), |acc, x| acc.lcm(x.denom()));
            denom *= &d;
            let (np, nq) = (upow(dim, t.p()), upow(dim, t.q()));
            (0..np)
                .map(|i| {
                    (0..nq)
                        .filter_map(|o| {
                            let x = t.get_flat(o, i);
                            (!x.is_zero()).then(|| (o, x.numer() * (&d / x.denom())))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let small: Option<Columns<i128>> = columns
        .iter()
        .map(|v| v.iter().map(|c| c.iter().map(|(o, x)| x.to_i128().map(|x| (*o, x))).collect()).collect())
        .collect();
    let ints: Vec<BigInt> = match small.and_then(|c| plan.run(&c)) {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => plan.run(&columns).expect("big integers do not overflow"),
    };
    let entries = ints.into_iter().map(|n| Rational::new(n, denom.clone())).collect();
    MultiTensor::from_entries(dim, g.inputs(), g.outputs(), entries)
}

/// Per tensor, per input index: the nonzero `(output index, numerator)` pairs.
type Columns<C> = Vec<Vec<Vec<(usize, C)>>>;

/// Exact ring arithmetic for the contraction kernel; `None` signals overflow.
trait Coeff: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul_add(&mut self, a: &Self, b: &Self) -> Option<()>;
    fn add_to(&mut self, a: &Self) -> Option<()>;
}

impl Coeff for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn mul_add(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self = self.checked_add(a.checked_mul(*b)?)?;
        Some(())
    }
    fn add_to(&mut self, a: &Self) -> Option<()> {
        *self = self.checked_add(*a)?;
        Some(())
    }
}

impl Coeff for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_add(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self += a * b;
        Some(())
    }
    fn add_to(&mut self, a: &Self) -> Option<()> {
        *self += a;
        Some(())
    }
}

/// Wiring of a graph for contraction. Every graph input and vertex out-port
/// owns a wire slot; a state packs one basis digit per slot into a `u128`.
struct Plan {
    dim: usize,
    ni: usize,
    pow: Vec<u128>,
    steps: Vec<Step>,
    out_slots: Vec<usize>,
}

struct Step {
    vertex: usize,
    srcs: Vec<usize>,
    /// Packed contribution of each output index of the vertex's map.
    placed: Vec<u128>,
}

impl Plan {
    fn new(dim: usize, g: &Graph, order: &[usize]) -> Result<Plan> {
        let n = g.vertex_count();
        let mut offset = Vec::with_capacity(n);
        let mut slots = g.inputs();
        for v in 0..n {
            offset.push(slots);
            slots += g.biarity(v).0;
        }
        let mut pow = Vec::with_capacity(slots);
        let mut acc: u128 = 1;
        for _ in 0..slots {
            pow.push(acc);
            acc = acc
                .checked_mul(dim.max(1) as u128)
                .ok_or_else(|| Error::NotComputable(format!("{slots} wires of dimension {dim} exceed the state encoding")))?;
        }
        let slot = |s: Source| match s {
            Source::Input(i) => i,
            Source::Vertex(v, p) => offset[v] + p,
        };
        let steps = order
            .iter()
            .map(|&v| {
                let outs = g.biarity(v).0;
                let placed = (0..upow(dim, outs))
                    .map(|o| decode(o, dim, outs).iter().enumerate().map(|(k, &d)| d as u128 * pow[offset[v] + k]).sum())
                    .collect();
                Step { vertex: v, srcs: g.sources(v).iter().map(|&s| slot(s)).collect(), placed }
            })
            .collect();
        let out_slots = g.output_sources().iter().map(|&s| slot(s)).collect();
        Ok(Plan { dim, ni: g.inputs(), pow, steps, out_slots })
    }

    fn digit(&self, key: u128, s: usize) -> usize {
        ((key / self.pow[s]) % self.dim as u128) as usize
    }

    /// Entries of the contracted map (output-major), or `None` on overflow.
    fn run<C: Coeff>(&self, columns: &[Vec<Vec<(usize, C)>>]) -> Option<Vec<C>> {
        let np = upow(self.dim, self.ni);
        let mut entries = vec![C::zero(); upow(self.dim, self.ni + self.out_slots.len())];
        let mut state: FxHashMap<u128, C> = FxHashMap::default();
        let mut next: FxHashMap<u128, C> = FxHashMap::default();
        for inp in 0..np {
            let key = decode(inp, self.dim, self.ni).iter().enumerate().map(|(i, &d)| d as u128 * self.pow[i]).sum();
            state.clear();
            state.insert(key, C::one());
            for step in &self.steps {
                next.clear();
                for (key, c) in state.drain() {
                    let mut index = 0;
                    let mut base = key;
                    // consumed wires are reset so equal downstream states merge
                    for &s in &step.srcs {
                        let d = self.digit(key, s);
                        index = index * self.dim + d;
                        base -= d as u128 * self.pow[s];
                    }
                    for (o, x) in &columns[step.vertex][index] {
                        next.entry(base + step.placed[*o]).or_insert_with(C::zero).mul_add(&c, x)?;
                    }
                }
                next.retain(|_, c| !c.is_zero());
                std::mem::swap(&mut state, &mut next);
            }
            for (key, c) in &state {
                let o = self.out_slots.iter().fold(0, |acc, &s| acc * self.dim + self.digit(*key, s));
                entries[o * np + inp].add_to(c)?;
            }
        }
        Some(entries)
    }
}

/// Contract `g` with overridden vertices carrying their maps and every other
/// vertex carrying `β` (`μ`, `Δ`, or zero on higher generators).
pub fn evaluate(g: &DecoratedGraph, d: &Decoration<'_>) -> Result<MultiTensor> {
    let dim = d.base.dim();
    if let Some(&v) = d.overrides.keys().find(|&&v| v >= g.vertex_count()) {
        return Err(Error::Graph(format!("override for nonexistent vertex {v}")));
    }
    let zero = || MultiTensor::zeros(dim, g.inputs(), g.outputs());
    let mut assignment = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        let t = match d.overrides.get(&v) {
            Some(t) => *t,
            None => match g.decoration(v) {
                GenSym::MU => d.base.mu(),
                GenSym::DELTA => d.base.delta(),
                _ => return Ok(zero()),
            },
        };
        if t.dim() != dim {
            return Err(Error::DimMismatch(dim, t.dim()));
        }
        assignment.push(t);
    }
    if assignment.iter().any(|t| t.nonzero_count() == 0) {
        // still validate arities before short-circuiting
        contract_check_only(g.graph(), &assignment)?;
        return Ok(zero());
    }
    contract(dim, g.graph(), &assignment)
}

fn contract_check_only(g: &Graph, assignment: &[&MultiTensor]) -> Result<()> {
    for (v, t) in assignment.iter().enumerate() {
        let (outs, ins) = g.biarity(v);
        if (t.q(), t.p()) != (outs, ins) {
            return Err(Error::Arity(format!("vertex {v} has biarity ({outs},{ins}) but its map is {}→{}", t.p(), t.q())));
        }
    }
    Ok(())
}

/// A wiring diagram whose vertices carry concrete maps. Evaluating it
/// contracts everything in one pass, so identity strands and permutations
/// are never materialized as tensors.
#[derive(Clone, Debug)]
pub struct Diagram {
    dim: usize,
    graph: Graph,
    maps: Vec<MultiTensor>,
}

impl Diagram {
    pub fn map(t: &MultiTensor) -> Diagram {
        let graph = Graph::corolla_any(t.q(), t.p()).expect("a single vertex is a valid graph");
        Diagram { dim: t.dim(), graph, maps: vec![t.clone()] }
    }

    pub fn identity(dim: usize, n: usize) -> Diagram {
        Diagram { dim, graph: Graph::identity(n), maps: vec![] }
    }

    /// Carries input `i` to output `σ(i)`.
    pub fn permutation(dim: usize, s: &Perm) -> Diagram {
        Diagram { dim, graph: Graph::permutation(s), maps: vec![] }
    }

    /// `a ∘ b`.
    pub fn compose(a: &Diagram, b: &Diagram) -> Result<Diagram> {
        if a.dim != b.dim {
            return Err(Error::DimMismatch(a.dim, b.dim));
        }
        let graph = Graph::compose_any(&a.graph, &b.graph)?;
        Ok(Diagram { dim: a.dim, graph, maps: b.maps.iter().chain(&a.maps).cloned().collect() })
    }

    pub fn tensor(dim: usize, parts: &[Diagram]) -> Result<Diagram> {
        let mut out = Diagram::identity(dim, 0);
        for p in parts {
            if p.dim != dim {
                return Err(Error::DimMismatch(dim, p.dim));
            }
            out.graph = Graph::tensor(&out.graph, &p.graph);
            out.maps.extend(p.maps.iter().cloned());
        }
        Ok(out)
    }

    pub fn inputs(&self) -> usize {
        self.graph.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.graph.outputs()
    }

    pub fn evaluate(&self) -> Result<MultiTensor> {
        if self.maps.iter().any(|t| t.nonzero_count() == 0) {
            return Ok(MultiTensor::zeros(self.dim, self.inputs(), self.outputs()));
        }
        contract(self.dim, &self.graph, &self.maps.iter().collect::<Vec<_>>())
    }
}

/// Residuals (lhs − rhs) of associativity, coassociativity and compatibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BialgebraResiduals {
    pub associativity: MultiTensor,
    pub coassociativity: MultiTensor,
    pub compatibility: MultiTensor,
}

impl BialgebraResiduals {
    pub fn is_bialgebra(&self) -> bool {
        [&self.associativity, &self.coassociativity, &self.compatibility]
            .iter()
            .all(|r| r.nonzero_count() == 0)
    }
}

pub fn check_bialgebra(b: &BialgebraData) -> BialgebraResiduals {
    let (mu, delta, id) = (b.mu(), b.delta(), identity_power(b.dim(), 1));
    let t = |x: &MultiTensor, y: &MultiTensor| x.tensor_product(y).expect("same dimension");
    let c = |x: &MultiTensor, y: &MultiTensor| x.compose(y).expect("arities agree");
    let associativity = c(mu, &t(mu, &id)).try_sub(&c(mu, &t(&id, mu))).unwrap();
    let coassociativity = c(&t(delta, &id), delta).try_sub(&c(&t(&id, delta), delta)).unwrap();
    let swap = permutation_tensor(b.dim(), &special_permutation(2, 2));
    let rhs = c(&t(mu, mu), &c(&swap, &t(delta, delta)));
    let compatibility = c(delta, mu).try_sub(&rhs).unwrap();
    BialgebraResiduals { associativity, coassociativity, compatibility }
}

/// `Δ^{[q]} : V → V^{⊗q}`, with `Δ^{[1]} = id` and `Δ^{[q]} = (Δ⊗id^{⊗(q−2)})∘Δ^{[q−1]}`.
pub fn iterated_diagonal(b: &BialgebraData, q: usize) -> MultiTensor {
    assert!(q >= 1, "iterated diagonal needs q ≥ 1");
    let mut acc = identity_power(b.dim(), 1);
    for k in 2..=q {
        let step = b.delta().tensor_product(&identity_power(b.dim(), k - 2)).unwrap();
        acc = step.compose(&acc).unwrap();
    }
    acc
}

/// `μ^{[p]} : V^{⊗p} → V`, with `μ^{[1]} = id` and `μ^{[p]} = μ^{[p−1]}∘(μ⊗id^{⊗(p−2)})`.
pub fn iterated_product(b: &BialgebraData, p: usize) -> MultiTensor {
    assert!(p >= 1, "iterated product needs p ≥ 1");
    let mut acc = identity_power(b.dim(), 1);
    for k in 2..=p {
        let step = b.mu().tensor_product(&identity_power(b.dim(), k - 2)).unwrap();
        acc = acc.compose(&step).unwrap();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraction_calc::fraction;

    fn x2() -> MultiTensor {
        MultiTensor::from_entries(1, 1, 2, vec![rat(2)]).unwrap()
    }

    #[test]
    fn corolla_contracts_to_its_map() {
        let b = BialgebraData::ground_field();
        let g = DecoratedGraph::corolla(GenSym::MU);
        assert_eq!(&evaluate(&g, &Decoration::new(&b)).unwrap(), b.mu());
    }

    #[test]
    fn compatibility_on_ground_field() {
        let b = BialgebraData::ground_field();
        let (m, d) = (DecoratedGraph::corolla(GenSym::MU), DecoratedGraph::corolla(GenSym::DELTA));
        let y = DecoratedGraph::compose(&d, &m).unwrap();
        let f = fraction(&[m.clone(), m], &[d.clone(), d]).unwrap();
        let one = MultiTensor::from_entries(1, 2, 2, vec![rat(1)]).unwrap();
        assert_eq!(evaluate(&y, &Decoration::new(&b)).unwrap(), one);
        assert_eq!(evaluate(&f, &Decoration::new(&b)).unwrap(), one);
        assert!(check_bialgebra(&b).is_bialgebra());
        assert!(check_bialgebra(&BialgebraData::trivial(3)).is_bialgebra());
        let bad = BialgebraData::new(b.mu().clone(), x2()).unwrap();
        let r = check_bialgebra(&bad);
        assert_eq!(r.compatibility.entries(), &[rat(2) - rat(4)]);
        assert!(!r.is_bialgebra());
    }

    #[test]
    fn higher_generators_evaluate_to_zero() {
        let b = BialgebraData::ground_field();
        let g = DecoratedGraph::corolla(GenSym::new(1, 3).unwrap());
        assert_eq!(evaluate(&g, &Decoration::new(&b)).unwrap(), MultiTensor::zeros(1, 3, 1));
        let f = MultiTensor::from_entries(1, 3, 1, vec![rat(5)]).unwrap();
        assert_eq!(evaluate(&g, &Decoration::new(&b).with(0, &f)).unwrap(), f);
        let wrong = MultiTensor::zeros(1, 2, 1);
        assert!(evaluate(&g, &Decoration::new(&b).with(0, &wrong)).is_err());
    }

    #[test]
    fn diagrams_match_dense_composition() {
        use crate::random::RandomSource;
        let mut r = RandomSource::new(1);
        let (f, g) = (r.tensor(2, 2, 1), r.tensor(2, 1, 2));
        let s = Perm::new(vec![2, 3, 1]).unwrap();
        let dense = f
            .tensor_product(&identity_power(2, 1))
            .unwrap()
            .compose(&permutation_tensor(2, &s).compose(&identity_power(2, 1).tensor_product(&g).unwrap()).unwrap())
            .unwrap();
        let d = |t: &MultiTensor| Diagram::map(t);
        let inner = Diagram::tensor(2, &[Diagram::identity(2, 1), d(&g)]).unwrap();
        let outer = Diagram::tensor(2, &[d(&f), Diagram::identity(2, 1)]).unwrap();
        let x = Diagram::compose(&outer, &Diagram::compose(&Diagram::permutation(2, &s), &inner).unwrap()).unwrap();
        assert_eq!(x.evaluate().unwrap(), dense);
        assert_eq!(Diagram::identity(2, 2).evaluate().unwrap(), identity_power(2, 2));
        assert!(Diagram::compose(&d(&f), &d(&f)).is_err());
    }

    #[test]
    fn iterated_maps() {
        let b = BialgebraData::ground_field();
        assert_eq!(iterated_diagonal(&b, 1), identity_power(1, 1));
        assert_eq!(&iterated_diagonal(&b, 2), b.delta());
        assert_eq!(iterated_diagonal(&b, 3), MultiTensor::from_entries(1, 1, 3, vec![rat(1)]).unwrap());
        assert_eq!(&iterated_product(&b, 2), b.mu());
        assert_eq!(iterated_product(&b, 4), MultiTensor::from_entries(1, 4, 1, vec![rat(1)]).unwrap());
    }

    #[test]
    fn bialgebra_json_round_trip() {
        let b = BialgebraData::ground_field();
        let back = BialgebraData::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert!(BialgebraData::from_json(&json!({"dim": 0, "mu": {"entries": []}, "delta": {"entries": []}})).is_err());
    }
}
