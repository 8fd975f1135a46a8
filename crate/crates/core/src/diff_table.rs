//! Generators of the minimal model and their differentials.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction_calc::fraction;
use crate::prop_graph::{DecoratedGraph, FormalSum, GenSym};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiffTable {
    entries: BTreeMap<GenSym, FormalSum>,
}

impl DiffTable {
    pub fn empty() -> Self {
        DiffTable::default()
    }

    /// Build a table, checking every entry.
    pub fn new(entries: BTreeMap<GenSym, FormalSum>) -> Result<Self> {
        for (g, s) in &entries {
            check_entry(*g, s)?;
        }
        Ok(DiffTable { entries })
    }

    pub fn get(&self, g: GenSym) -> Option<&FormalSum> {
        self.entries.get(&g)
    }

    pub fn entry(&self, g: GenSym) -> Result<&FormalSum> {
        self.entries.get(&g).ok_or(Error::MissingEntry(g))
    }

    pub fn generators(&self) -> impl Iterator<Item = GenSym> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (GenSym, &FormalSum)> {
        self.entries.iter().map(|(g, s)| (*g, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert or override an entry.
    pub fn insert(&mut self, g: GenSym, s: FormalSum) -> Result<()> {
        check_entry(g, &s)?;
        self.entries.insert(g, s);
        Ok(())
    }

    /// Whether every generator decorating a term of `∂g` has an entry itself.
    pub fn closed_at(&self, g: GenSym) -> bool {
        self.entries.get(&g).is_some_and(|s| {
            s.terms().all(|(_, t)| t.decorations().iter().all(|d| self.entries.contains_key(d)))
        })
    }

    /// Largest vertex count of any term; all brackets with more inputs vanish.
    pub fn truncation_order(&self) -> usize {
        self.entries
            .values()
            .flat_map(|s| s.terms().map(|(_, g)| g.vertex_count()))
            .max()
            .unwrap_or(0)
    }

    /// `∂` extended to a decorated graph as a derivation. Vertices are visited in
    /// the canonical topological order and pick up the Koszul sign of the
    /// decorations before them.
    pub fn extend_derivation(&self, g: &DecoratedGraph) -> Result<FormalSum> {
        let g = g.canonical_form();
        let mut out = FormalSum::zero(g.outputs(), g.inputs());
        let mut before = 0i64;
        for v in 0..g.vertex_count() {
            let dec = g.decoration(v);
            let sign = if before % 2 == 0 { 1 } else { -1 };
            for (c, h) in self.entry(dec)?.terms() {
                out.add_term(sign * c, &g.substitute(v, h)?)?;
            }
            before += dec.degree();
        }
        Ok(out)
    }

    /// `∂∂g`, which must be the empty sum.
    pub fn d_squared(&self, g: GenSym) -> Result<FormalSum> {
        let mut out = FormalSum::zero(g.outs, g.ins);
        for (c, t) in self.entry(g)?.terms() {
            out = out.sum_add(&self.extend_derivation(t)?.sum_scale(c))?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "entries": self.entries.iter().map(|(g, s)| json!({"gen": [g.outs, g.ins], "sum": s.to_json()})).collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &Value) -> Result<DiffTable> {
        let arr = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("table needs an \"entries\" array".into()))?;
        let mut entries = BTreeMap::new();
        for e in arr {
            let g = e
                .get("gen")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse("entry needs \"gen\": [m, n]".into()))?;
            let g = match (g[0].as_u64(), g[1].as_u64()) {
                (Some(m), Some(n)) => GenSym::new(m as usize, n as usize)?,
                _ => return Err(Error::Parse("generator arities must be integers".into())),
            };
            let s = FormalSum::from_json(e.get("sum").ok_or_else(|| Error::Parse("entry needs a \"sum\"".into()))?)?;
            if entries.insert(g, s).is_some() {
                return Err(Error::Parse(format!("duplicate entry for {g}")));
            }
        }
        DiffTable::new(entries)
    }
}

fn check_entry(g: GenSym, s: &FormalSum) -> Result<()> {
    let err = |msg: String| Err(Error::Table { gen: g, msg });
    if s.biarity() != (g.outs, g.ins) {
        return err(format!("biarity mismatch: sum has {:?}", s.biarity()));
    }
    for (c, t) in s.terms() {
        if t.degree() != g.degree() - 1 {
            return err(format!("degree mismatch: term of degree {} in the differential of a degree {} generator", t.degree(), g.degree()));
        }
        if t.vertex_count() < 2 {
            return err("non-decomposable term".into());
        }
        if c.abs() != 1 {
            return err(format!("coefficient {c} is not ±1"));
        }
    }
    Ok(())
}

/// Parse a table from JSON; entries in `text` replace those of `base` (if given).
pub fn load_table(text: &str, base: Option<&DiffTable>) -> Result<DiffTable> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let loaded = DiffTable::from_json(&v)?;
    let mut out = base.cloned().unwrap_or_default();
    for (g, s) in loaded.entries {
        out.insert(g, s)?;
    }
    Ok(out)
}

fn c(outs: usize, ins: usize) -> DecoratedGraph {
    DecoratedGraph::corolla(GenSym::new(outs, ins).expect("valid generator"))
}

fn id(n: usize) -> DecoratedGraph {
    DecoratedGraph::identity(n)
}

fn comp(a: &DecoratedGraph, b: &DecoratedGraph) -> DecoratedGraph {
    DecoratedGraph::compose(a, b).expect("arities agree")
}

fn tens(parts: &[DecoratedGraph]) -> DecoratedGraph {
    DecoratedGraph::tensor_all(parts)
}

fn frac(num: &[DecoratedGraph], den: &[DecoratedGraph]) -> DecoratedGraph {
    fraction(num, den).expect("arities agree")
}

fn sum(outs: usize, ins: usize, terms: Vec<(i64, DecoratedGraph)>) -> FormalSum {
    FormalSum::from_terms(outs, ins, terms).expect("terms share the biarity")
}

/// The differential on generators of degree ≤ 2 (plus `ξ^1_4`).
pub fn builtin_table() -> DiffTable {
    let mu = c(1, 2);
    let delta = c(2, 1);
    let x13 = c(1, 3);
    let x31 = c(3, 1);
    let x22 = c(2, 2);
    // (ab)c and a(bc)
    let left = comp(&mu, &tens(&[mu.clone(), id(1)]));
    let right = comp(&mu, &tens(&[id(1), mu.clone()]));
    // (Δ⊗1)Δ and (1⊗Δ)Δ
    let co_left = comp(&tens(&[delta.clone(), id(1)]), &delta);
    let co_right = comp(&tens(&[id(1), delta.clone()]), &delta);
    let ddd = [delta.clone(), delta.clone(), delta.clone()];

    let mut e = BTreeMap::new();
    e.insert(GenSym::MU, FormalSum::zero(1, 2));
    e.insert(GenSym::DELTA, FormalSum::zero(2, 1));
    e.insert(GenSym::new(1, 3).unwrap(), sum(1, 3, vec![(1, left.clone()), (-1, right.clone())]));
    e.insert(GenSym::new(3, 1).unwrap(), sum(3, 1, vec![(1, co_left.clone()), (-1, co_right.clone())]));
    e.insert(
        GenSym::new(2, 2).unwrap(),
        sum(2, 2, vec![(1, comp(&delta, &mu)), (-1, frac(&[mu.clone(), mu.clone()], &[delta.clone(), delta.clone()]))]),
    );
    e.insert(
        GenSym::new(1, 4).unwrap(),
        sum(
            1,
            4,
            vec![
                (1, comp(&x13, &tens(&[mu.clone(), id(2)]))),
                (-1, comp(&x13, &tens(&[id(1), mu.clone(), id(1)]))),
                (1, comp(&x13, &tens(&[id(2), mu.clone()]))),
                (-1, comp(&mu, &tens(&[x13.clone(), id(1)]))),
                (-1, comp(&mu, &tens(&[id(1), x13.clone()]))),
            ],
        ),
    );
    e.insert(
        GenSym::new(2, 3).unwrap(),
        sum(
            2,
            3,
            vec![
                (1, comp(&delta, &x13)),
                (-1, comp(&x22, &tens(&[mu.clone(), id(1)]))),
                (1, comp(&x22, &tens(&[id(1), mu.clone()]))),
                (1, frac(&[mu.clone(), mu.clone()], &[delta.clone(), x22.clone()])),
                (-1, frac(&[mu.clone(), mu.clone()], &[x22.clone(), delta.clone()])),
                (-1, frac(&[right, x13.clone()], &ddd)),
                (-1, frac(&[x13, left], &ddd)),
            ],
        ),
    );
    e.insert(
        GenSym::new(3, 2).unwrap(),
        sum(
            3,
            2,
            vec![
                (-1, comp(&x31, &mu)),
                (1, comp(&tens(&[delta.clone(), id(1)]), &x22)),
                (-1, comp(&tens(&[id(1), delta.clone()]), &x22)),
                (-1, frac(&[mu.clone(), x22.clone()], &[delta.clone(), delta.clone()])),
                (1, frac(&[x22, mu.clone()], &[delta.clone(), delta])),
                (1, frac(&[mu.clone(), mu.clone(), mu.clone()], &[co_right, x31.clone()])),
                (1, frac(&[mu.clone(), mu.clone(), mu], &[x31, co_left])),
            ],
        ),
    );
    DiffTable::new(e).expect("built-in entries satisfy the table invariants")
}
