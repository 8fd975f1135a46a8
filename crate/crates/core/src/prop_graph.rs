//! Directed acyclic graphs with ordered ports, their decorated versions, and
//! integer formal sums of decorated graphs.
//!
//! Internally all indices are 0-based. A graph stores, for every vertex in-port
//! and every graph output, the [`Source`] feeding it; the remaining invariants
//! (each source used exactly once, no cycles) are checked at construction.

use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_tensor::Perm;

/// A generator `ξ^m_n` with `m` outputs and `n` inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenSym {
    pub outs: usize,
    pub ins: usize,
}

impl GenSym {
    pub fn new(outs: usize, ins: usize) -> Result<Self> {
        if outs == 0 || ins == 0 || (outs, ins) == (1, 1) {
            return Err(Error::InvalidGenerator(outs, ins));
        }
        Ok(GenSym { outs, ins })
    }

    /// `ξ^1_2`, interpreted as the multiplication.
    pub const MU: GenSym = GenSym { outs: 1, ins: 2 };
    /// `ξ^2_1`, interpreted as the comultiplication.
    pub const DELTA: GenSym = GenSym { outs: 2, ins: 1 };

    pub fn degree(&self) -> i64 {
        self.outs as i64 + self.ins as i64 - 3
    }

    pub fn is_binary(&self) -> bool {
        *self == GenSym::MU || *self == GenSym::DELTA
    }
}

impl fmt::Display for GenSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ξ^{}_{}", self.outs, self.ins)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Input(usize),
    /// `(vertex, out-port)`
    Vertex(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Output(usize),
    /// `(vertex, in-port)`
    Vertex(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    inputs: usize,
    outputs: usize,
    /// `(outs, ins)` per vertex.
    vertices: Vec<(usize, usize)>,
    vertex_sources: Vec<Vec<Source>>,
    output_sources: Vec<Source>,
}

type Builder = fn(usize, usize, Vec<(usize, usize)>, Vec<Vec<Source>>, Vec<Source>) -> Result<Graph>;

impl Graph {
    /// Build from an edge list, checking every structural invariant.
    pub fn new(
        inputs: usize,
        outputs: usize,
        vertices: Vec<(usize, usize)>,
        edges: &[(Source, Target)],
    ) -> Result<Graph> {
        let mut vs: Vec<Vec<Option<Source>>> = vertices.iter().map(|&(_, b)| vec![None; b]).collect();
        let mut os: Vec<Option<Source>> = vec![None; outputs];
        for &(s, t) in edges {
            let slot = match t {
                Target::Output(j) => os
                    .get_mut(j)
                    .ok_or_else(|| Error::Graph(format!("output label {} out of range", j + 1)))?,
                Target::Vertex(v, port) => vs
                    .get_mut(v)
                    .ok_or_else(|| Error::Graph(format!("vertex {v} out of range")))?
                    .get_mut(port)
                    .ok_or_else(|| Error::Graph(format!("in-port {} of vertex {v} out of range", port + 1)))?,
            };
            if slot.is_some() {
                return Err(Error::Graph(format!("doubly-used port {t:?}")));
            }
            *slot = Some(s);
        }
        let unfed = |t: Target| Error::Graph(format!("dangling port {t:?}"));
        let vertex_sources = vs
            .into_iter()
            .enumerate()
            .map(|(v, ports)| {
                ports
                    .into_iter()
                    .enumerate()
                    .map(|(k, s)| s.ok_or_else(|| unfed(Target::Vertex(v, k))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let output_sources = os
            .into_iter()
            .enumerate()
            .map(|(j, s)| s.ok_or_else(|| unfed(Target::Output(j))))
            .collect::<Result<Vec<_>>>()?;
        Graph::from_wiring(inputs, outputs, vertices, vertex_sources, output_sources)
    }

    /// Build from the source feeding each vertex in-port and each output.
    pub fn from_wiring(
        inputs: usize,
        outputs: usize,
        vertices: Vec<(usize, usize)>,
        vertex_sources: Vec<Vec<Source>>,
        output_sources: Vec<Source>,
    ) -> Result<Graph> {
        for &(a, b) in &vertices {
            if (a, b) == (0, 0) || (a, b) == (1, 1) {
                return Err(Error::ForbiddenBiarity(a, b));
            }
        }
        Graph::from_wiring_any(inputs, outputs, vertices, vertex_sources, output_sources)
    }

    /// As [`Graph::from_wiring`], but vertices may have any biarity; used for
    /// diagrams of concrete maps rather than generators.
    pub(crate) fn from_wiring_any(
        inputs: usize,
        outputs: usize,
        vertices: Vec<(usize, usize)>,
        vertex_sources: Vec<Vec<Source>>,
        output_sources: Vec<Source>,
    ) -> Result<Graph> {
        if vertex_sources.len() != vertices.len() || output_sources.len() != outputs {
            return Err(Error::Graph("wiring does not match vertex/output counts".into()));
        }
        let g = Graph { inputs, outputs, vertices, vertex_sources, output_sources };
        for (v, srcs) in g.vertex_sources.iter().enumerate() {
            if srcs.len() != g.vertices[v].1 {
                return Err(Error::Graph(format!("vertex {v} has {} in-ports wired, needs {}", srcs.len(), g.vertices[v].1)));
            }
        }
        let mut used: BTreeMap<Source, usize> = BTreeMap::new();
        for s in g.all_sources_fed() {
            match s {
                Source::Input(i) if i >= inputs => {
                    return Err(Error::Graph(format!("input label {} out of range", i + 1)))
                }
                Source::Vertex(w, p) if w >= g.vertices.len() || p >= g.vertices[w].0 => {
                    return Err(Error::Graph(format!("source {s:?} out of range")))
                }
                _ => {}
            }
            *used.entry(s).or_default() += 1;
        }
        g.topological_order()?;
        if let Some((s, _)) = used.iter().find(|(_, &c)| c > 1) {
            return Err(Error::Graph(format!("doubly-used port {s:?}")));
        }
        for s in g.all_sources() {
            if !used.contains_key(&s) {
                return Err(match s {
                    Source::Input(i) => Error::Graph(format!("label gap: input {} is not wired", i + 1)),
                    _ => Error::Graph(format!("dangling port {s:?}")),
                });
            }
        }
        Ok(g)
    }

    fn all_sources_fed(&self) -> impl Iterator<Item = Source> + '_ {
        self.vertex_sources.iter().flatten().chain(self.output_sources.iter()).copied()
    }

    fn all_sources(&self) -> Vec<Source> {
        let mut out: Vec<Source> = (0..self.inputs).map(Source::Input).collect();
        for (v, &(a, _)) in self.vertices.iter().enumerate() {
            out.extend((0..a).map(|p| Source::Vertex(v, p)));
        }
        out
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// `(outs, ins)` of vertex `v`.
    pub fn biarity(&self, v: usize) -> (usize, usize) {
        self.vertices[v]
    }

    pub fn sources(&self, v: usize) -> &[Source] {
        &self.vertex_sources[v]
    }

    pub fn output_sources(&self) -> &[Source] {
        &self.output_sources
    }

    pub fn edges(&self) -> Vec<(Source, Target)> {
        let mut e = Vec::new();
        for (v, srcs) in self.vertex_sources.iter().enumerate() {
            e.extend(srcs.iter().enumerate().map(|(k, &s)| (s, Target::Vertex(v, k))));
        }
        e.extend(self.output_sources.iter().enumerate().map(|(j, &s)| (s, Target::Output(j))));
        e
    }

    /// The target consuming each source.
    pub fn consumers(&self) -> BTreeMap<Source, Target> {
        self.edges().into_iter().collect()
    }

    /// Kahn's algorithm, always releasing the smallest ready vertex index.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        self.topological_order_by(|v| v)
    }

    fn topological_order_by(&self, key: impl Fn(usize) -> usize) -> Result<Vec<usize>> {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, srcs) in self.vertex_sources.iter().enumerate() {
            for s in srcs {
                if let Source::Vertex(w, _) = *s {
                    indeg[v] += 1;
                    succ[w].push(v);
                }
            }
        }
        let mut ready: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).filter(|&v| indeg[v] == 0).map(|v| Reverse((key(v), v))).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, v))) = ready.pop() {
            order.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(Reverse((key(w), w)));
                }
            }
        }
        if order.len() != n {
            return Err(Error::Cycle);
        }
        Ok(order)
    }

    /// Vertex-free graph wiring input `i` to output `i`.
    pub fn identity(n: usize) -> Graph {
        Graph {
            inputs: n,
            outputs: n,
            vertices: vec![],
            vertex_sources: vec![],
            output_sources: (0..n).map(Source::Input).collect(),
        }
    }

    /// Vertex-free graph carrying input `i` to output `σ(i)`.
    pub fn permutation(s: &Perm) -> Graph {
        let n = s.len();
        let mut output_sources = vec![Source::Input(0); n];
        for i in 1..=n {
            output_sources[s.apply(i) - 1] = Source::Input(i - 1);
        }
        Graph { inputs: n, outputs: n, vertices: vec![], vertex_sources: vec![], output_sources }
    }

    /// Single vertex of biarity `(outs, ins)` with inputs and outputs in order.
    pub fn corolla(outs: usize, ins: usize) -> Result<Graph> {
        Graph::corolla_with(outs, ins, Graph::from_wiring)
    }

    pub(crate) fn corolla_any(outs: usize, ins: usize) -> Result<Graph> {
        Graph::corolla_with(outs, ins, Graph::from_wiring_any)
    }

    fn corolla_with(outs: usize, ins: usize, build: Builder) -> Result<Graph> {
        build(
            ins,
            outs,
            vec![(outs, ins)],
            vec![(0..ins).map(Source::Input).collect()],
            (0..outs).map(|p| Source::Vertex(0, p)).collect(),
        )
    }

    /// `a ∘ b`: the outputs of `b` feed the inputs of `a`. Vertices of `b`
    /// come first in the result.
    pub fn compose(a: &Graph, b: &Graph) -> Result<Graph> {
        Graph::compose_with(a, b, Graph::from_wiring)
    }

    pub(crate) fn compose_any(a: &Graph, b: &Graph) -> Result<Graph> {
        Graph::compose_with(a, b, Graph::from_wiring_any)
    }

    fn compose_with(a: &Graph, b: &Graph, build: Builder) -> Result<Graph> {
        if a.inputs != b.outputs {
            return Err(Error::Arity(format!(
                "cannot graft {} outputs into {} inputs",
                b.outputs, a.inputs
            )));
        }
        let nb = b.vertices.len();
        let lift = |s: Source| match s {
            Source::Input(i) => b.output_sources[i],
            Source::Vertex(u, p) => Source::Vertex(nb + u, p),
        };
        let mut vertex_sources = b.vertex_sources.clone();
        vertex_sources.extend(a.vertex_sources.iter().map(|ss| ss.iter().map(|&s| lift(s)).collect()));
        let mut vertices = b.vertices.clone();
        vertices.extend_from_slice(&a.vertices);
        build(
            b.inputs,
            a.outputs,
            vertices,
            vertex_sources,
            a.output_sources.iter().map(|&s| lift(s)).collect(),
        )
    }

    /// Side-by-side juxtaposition; vertices of `a` come first.
    pub fn tensor(a: &Graph, b: &Graph) -> Graph {
        let na = a.vertices.len();
        let shift = |s: Source| match s {
            Source::Input(i) => Source::Input(a.inputs + i),
            Source::Vertex(u, p) => Source::Vertex(na + u, p),
        };
        let mut vertices = a.vertices.clone();
        vertices.extend_from_slice(&b.vertices);
        let mut vertex_sources = a.vertex_sources.clone();
        vertex_sources.extend(b.vertex_sources.iter().map(|ss| ss.iter().map(|&s| shift(s)).collect()));
        let mut output_sources = a.output_sources.clone();
        output_sources.extend(b.output_sources.iter().map(|&s| shift(s)));
        Graph { inputs: a.inputs + b.inputs, outputs: a.outputs + b.outputs, vertices, vertex_sources, output_sources }
    }

    /// Renumber vertices: new vertex `k` is old vertex `order[k]`.
    fn relabel(&self, order: &[usize]) -> Graph {
        let mut new_of = vec![0; order.len()];
        for (k, &old) in order.iter().enumerate() {
            new_of[old] = k;
        }
        let map = |s: Source| match s {
            Source::Input(i) => Source::Input(i),
            Source::Vertex(u, p) => Source::Vertex(new_of[u], p),
        };
        Graph {
            inputs: self.inputs,
            outputs: self.outputs,
            vertices: order.iter().map(|&o| self.vertices[o]).collect(),
            vertex_sources: order.iter().map(|&o| self.vertex_sources[o].iter().map(|&s| map(s)).collect()).collect(),
            output_sources: self.output_sources.iter().map(|&s| map(s)).collect(),
        }
    }

    /// An isomorphism-invariant vertex order.
    ///
    /// Inputs are labeled and ports are ordered, so a breadth-first walk from
    /// the inputs (then the outputs) that visits ports in order reaches every
    /// vertex along a path determined by the isomorphism class alone; the
    /// discovery index then breaks ties in a topological sort.
    fn canonical_order(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let consumers = self.consumers();
        let mut label: Vec<Option<usize>> = vec![None; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        let mut discover = |v: usize, label: &mut Vec<Option<usize>>, queue: &mut VecDeque<usize>| {
            if label[v].is_none() {
                label[v] = Some(next);
                next += 1;
                queue.push_back(v);
            }
        };
        let seeds: Vec<Option<usize>> = (0..self.inputs)
            .map(|i| match consumers.get(&Source::Input(i)) {
                Some(Target::Vertex(v, _)) => Some(*v),
                _ => None,
            })
            .chain(self.output_sources.iter().map(|s| match s {
                Source::Vertex(v, _) => Some(*v),
                _ => None,
            }))
            .collect();
        for seed in seeds.into_iter().chain((0..n).map(Some)).flatten() {
            discover(seed, &mut label, &mut queue);
            while let Some(v) = queue.pop_front() {
                for s in &self.vertex_sources[v] {
                    if let Source::Vertex(w, _) = *s {
                        discover(w, &mut label, &mut queue);
                    }
                }
                for p in 0..self.vertices[v].0 {
                    if let Some(Target::Vertex(w, _)) = consumers.get(&Source::Vertex(v, p)) {
                        discover(*w, &mut label, &mut queue);
                    }
                }
            }
        }
        self.topological_order_by(|v| label[v].expect("every vertex discovered"))
            .expect("validated graphs are acyclic")
    }

    pub fn to_json(&self) -> Value {
        self.to_json_with(|v| self.vertices[v])
    }

    fn to_json_with(&self, gen: impl Fn(usize) -> (usize, usize)) -> Value {
        let src = |s: Source| match s {
            Source::Input(i) => json!(["in", i + 1]),
            Source::Vertex(v, p) => json!([v, p + 1]),
        };
        let tgt = |t: Target| match t {
            Target::Output(j) => json!(["out", j + 1]),
            Target::Vertex(v, p) => json!([v, p + 1]),
        };
        json!({
            "inputs": self.inputs,
            "outputs": self.outputs,
            "vertices": (0..self.vertices.len()).map(|v| { let (a, b) = gen(v); json!({"gen": [a, b]}) }).collect::<Vec<_>>(),
            "edges": self.edges().into_iter().map(|(s, t)| json!({"from": src(s), "to": tgt(t)})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Graph> {
        let count = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("graph needs a non-negative integer {k:?}")))
        };
        let (inputs, outputs) = (count("inputs")?, count("outputs")?);
        let vertices = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("graph needs a \"vertices\" array".into()))?
            .iter()
            .map(|vx| {
                let g = vx.get("gen").and_then(Value::as_array).filter(|a| a.len() == 2);
                let g = g.ok_or_else(|| Error::Parse("vertex needs \"gen\": [a, b]".into()))?;
                match (g[0].as_u64(), g[1].as_u64()) {
                    (Some(a), Some(b)) => Ok((a as usize, b as usize)),
                    _ => Err(Error::Parse("vertex arities must be non-negative integers".into())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = v
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("graph needs an \"edges\" array".into()))?
            .iter()
            .map(|e| {
                let s = endpoint(e.get("from"), "in")?;
                let t = endpoint(e.get("to"), "out")?;
                let s = match s {
                    (None, i) => Source::Input(i),
                    (Some(v), p) => Source::Vertex(v, p),
                };
                let t = match t {
                    (None, j) => Target::Output(j),
                    (Some(v), p) => Target::Vertex(v, p),
                };
                Ok((s, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Graph::new(inputs, outputs, vertices, &edges)
    }
}

/// Parse `["in", i]` / `["out", j]` (→ `(None, i-1)`) or `[v, port]` (→ `(Some(v), port-1)`).
fn endpoint(v: Option<&Value>, boundary: &str) -> Result<(Option<usize>, usize)> {
    let bad = || Error::Parse(format!("bad edge endpoint {v:?}"));
    let a = v.and_then(Value::as_array).filter(|a| a.len() == 2).ok_or_else(bad)?;
    let k = a[1].as_u64().filter(|&k| k >= 1).ok_or_else(bad)? as usize - 1;
    match &a[0] {
        Value::String(s) if s == boundary => Ok((None, k)),
        Value::Number(n) => Ok((Some(n.as_u64().ok_or_else(bad)? as usize), k)),
        _ => Err(bad()),
    }
}

/// A graph whose vertices carry generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedGraph {
    graph: Graph,
    decorations: Vec<GenSym>,
}

impl DecoratedGraph {
    pub fn new(graph: Graph, decorations: Vec<GenSym>) -> Result<Self> {
        if decorations.len() != graph.vertex_count() {
            return Err(Error::Graph("one decoration per vertex required".into()));
        }
        for (v, g) in decorations.iter().enumerate() {
            if (g.outs, g.ins) != graph.biarity(v) {
                return Err(Error::Graph(format!("decoration {g} does not match vertex biarity {:?}", graph.biarity(v))));
            }
        }
        Ok(DecoratedGraph { graph, decorations })
    }

    pub fn corolla(g: GenSym) -> Self {
        DecoratedGraph { graph: Graph::corolla(g.outs, g.ins).expect("generators are valid vertices"), decorations: vec![g] }
    }

    pub fn identity(n: usize) -> Self {
        DecoratedGraph { graph: Graph::identity(n), decorations: vec![] }
    }

    pub fn permutation(s: &Perm) -> Self {
        DecoratedGraph { graph: Graph::permutation(s), decorations: vec![] }
    }

    pub fn compose(a: &DecoratedGraph, b: &DecoratedGraph) -> Result<Self> {
        let graph = Graph::compose(&a.graph, &b.graph)?;
        let mut decorations = b.decorations.clone();
        decorations.extend_from_slice(&a.decorations);
        Ok(DecoratedGraph { graph, decorations })
    }

    pub fn tensor(a: &DecoratedGraph, b: &DecoratedGraph) -> Self {
        let mut decorations = a.decorations.clone();
        decorations.extend_from_slice(&b.decorations);
        DecoratedGraph { graph: Graph::tensor(&a.graph, &b.graph), decorations }
    }

    pub fn tensor_all(parts: &[DecoratedGraph]) -> Self {
        parts.iter().fold(DecoratedGraph::identity(0), |acc, g| DecoratedGraph::tensor(&acc, g))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn decorations(&self) -> &[GenSym] {
        &self.decorations
    }

    pub fn decoration(&self, v: usize) -> GenSym {
        self.decorations[v]
    }

    pub fn inputs(&self) -> usize {
        self.graph.inputs
    }

    pub fn outputs(&self) -> usize {
        self.graph.outputs
    }

    pub fn vertex_count(&self) -> usize {
        self.decorations.len()
    }

    pub fn degree(&self) -> i64 {
        self.decorations.iter().map(GenSym::degree).sum()
    }

    pub fn canonical_form(&self) -> DecoratedGraph {
        let order = self.graph.canonical_order();
        DecoratedGraph {
            graph: self.graph.relabel(&order),
            decorations: order.iter().map(|&o| self.decorations[o]).collect(),
        }
    }

    /// Renumber vertices: new vertex `k` is old vertex `order[k]`.
    pub fn relabel(&self, order: &[usize]) -> Result<DecoratedGraph> {
        Perm::from_zero_based(order)?;
        if order.len() != self.vertex_count() {
            return Err(Error::PermLength { expected: self.vertex_count(), got: order.len() });
        }
        Ok(DecoratedGraph {
            graph: self.graph.relabel(order),
            decorations: order.iter().map(|&o| self.decorations[o]).collect(),
        })
    }

    /// Replace vertex `v` by the graph `h`. The remaining vertices of `self`
    /// keep their relative order and come first; `h`'s vertices follow.
    pub fn substitute(&self, v: usize, h: &DecoratedGraph) -> Result<DecoratedGraph> {
        let (a, b) = self.graph.biarity(v);
        if h.inputs() != b || h.outputs() != a {
            return Err(Error::Arity(format!(
                "cannot substitute a ({},{})-graph for a ({a},{b})-vertex",
                h.outputs(),
                h.inputs()
            )));
        }
        let n = self.vertex_count();
        let keep: Vec<usize> = (0..n).filter(|&w| w != v).collect();
        let mut new_of = vec![usize::MAX; n];
        for (k, &w) in keep.iter().enumerate() {
            new_of[w] = k;
        }
        let base = keep.len();
        let outer = |s: Source| -> Source {
            match s {
                Source::Input(i) => Source::Input(i),
                Source::Vertex(w, p) => Source::Vertex(new_of[w], p),
            }
        };
        // what feeds v's in-port i, seen from the new graph
        let feed_in = |i: usize| outer(self.graph.vertex_sources[v][i]);
        let inner = |s: Source| -> Source {
            match s {
                Source::Input(i) => feed_in(i),
                Source::Vertex(u, p) => Source::Vertex(base + u, p),
            }
        };
        let resolve = |s: Source| -> Source {
            match s {
                Source::Vertex(w, p) if w == v => inner(h.graph.output_sources[p]),
                other => outer(other),
            }
        };
        let mut vertices: Vec<(usize, usize)> = keep.iter().map(|&w| self.graph.vertices[w]).collect();
        vertices.extend_from_slice(&h.graph.vertices);
        let mut vertex_sources: Vec<Vec<Source>> = keep
            .iter()
            .map(|&w| self.graph.vertex_sources[w].iter().map(|&s| resolve(s)).collect())
            .collect();
        vertex_sources.extend(h.graph.vertex_sources.iter().map(|ss| ss.iter().map(|&s| inner(s)).collect()));
        let output_sources = self.graph.output_sources.iter().map(|&s| resolve(s)).collect();
        let graph = Graph::from_wiring(self.inputs(), self.outputs(), vertices, vertex_sources, output_sources)?;
        let mut decorations: Vec<GenSym> = keep.iter().map(|&w| self.decorations[w]).collect();
        decorations.extend_from_slice(&h.decorations);
        Ok(DecoratedGraph { graph, decorations })
    }

    pub fn to_json(&self) -> Value {
        self.graph.to_json_with(|v| (self.decorations[v].outs, self.decorations[v].ins))
    }

    pub fn from_json(v: &Value) -> Result<DecoratedGraph> {
        let graph = Graph::from_json(v)?;
        let decorations = (0..graph.vertex_count())
            .map(|k| {
                let (a, b) = graph.biarity(k);
                GenSym::new(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        DecoratedGraph::new(graph, decorations)
    }
}

/// An integer linear combination of decorated graphs of a common biarity,
/// keyed by canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSum {
    outs: usize,
    ins: usize,
    terms: BTreeMap<DecoratedGraph, i64>,
}

impl FormalSum {
    pub fn zero(outs: usize, ins: usize) -> Self {
        FormalSum { outs, ins, terms: BTreeMap::new() }
    }

    pub fn from_terms(outs: usize, ins: usize, terms: impl IntoIterator<Item = (i64, DecoratedGraph)>) -> Result<Self> {
        let mut s = FormalSum::zero(outs, ins);
        for (c, g) in terms {
            s.add_term(c, &g)?;
        }
        Ok(s)
    }

    /// `(outs, ins)`.
    pub fn biarity(&self) -> (usize, usize) {
        (self.outs, self.ins)
    }

    pub fn add_term(&mut self, coeff: i64, g: &DecoratedGraph) -> Result<()> {
        if (g.outputs(), g.inputs()) != (self.outs, self.ins) {
            return Err(Error::Arity(format!(
                "term of biarity ({},{}) in a sum of biarity ({},{})",
                g.outputs(),
                g.inputs(),
                self.outs,
                self.ins
            )));
        }
        if coeff == 0 {
            return Ok(());
        }
        let key = g.canonical_form();
        let c = self.terms.entry(key.clone()).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &DecoratedGraph)> {
        self.terms.iter().map(|(g, &c)| (c, g))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum_add(&self, other: &FormalSum) -> Result<FormalSum> {
        if self.biarity() != other.biarity() {
            return Err(Error::Arity(format!("adding sums of biarity {:?} and {:?}", self.biarity(), other.biarity())));
        }
        let mut out = self.clone();
        for (c, g) in other.terms() {
            out.add_term(c, g)?;
        }
        Ok(out)
    }

    pub fn sum_scale(&self, c: i64) -> FormalSum {
        if c == 0 {
            return FormalSum::zero(self.outs, self.ins);
        }
        FormalSum { outs: self.outs, ins: self.ins, terms: self.terms.iter().map(|(g, &k)| (g.clone(), k * c)).collect() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "biarity": [self.outs, self.ins],
            "terms": self.terms().map(|(c, g)| json!({"coeff": c, "graph": g.to_json()})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<FormalSum> {
        let b = v
            .get("biarity")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse("sum needs \"biarity\": [m, n]".into()))?;
        let (outs, ins) = match (b[0].as_u64(), b[1].as_u64()) {
            (Some(m), Some(n)) => (m as usize, n as usize),
            _ => return Err(Error::Parse("biarity must be non-negative integers".into())),
        };
        let mut s = FormalSum::zero(outs, ins);
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("sum needs a \"terms\" array".into()))?;
        for t in terms {
            let c = t
                .get("coeff")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Parse("term coefficient must be an integer".into()))?;
            let g = DecoratedGraph::from_json(t.get("graph").ok_or_else(|| Error::Parse("term needs a \"graph\"".into()))?)?;
            s.add_term(c, &g)?;
        }
        Ok(s)
    }
}
