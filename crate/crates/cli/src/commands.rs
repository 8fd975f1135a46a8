//! One function per subcommand. Each loads its inputs through [`Ctx`], which
//! records them in the report digest, and appends checks and results.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use bialg_core::diff_table::{builtin_table, load_table, DiffTable};
use bialg_core::endo_eval::{check_bialgebra, evaluate, BialgebraData, Decoration};
use bialg_core::exact_tensor::Linear;
use bialg_core::gs_complex::{
    bracket_all, bracket_element, d1, d2, d2_twist, d_gs, delta_matches_dgs, linf_relation_residual, GSCochain, GSElement,
};
use bialg_core::linf_core::{ainf_master_residual, master_residual, twist, BracketProvider, GsProvider};
use bialg_core::random::RandomSource;
use bialg_core::{DecoratedGraph, Error, MultiTensor};

use crate::report::{Check, Report};
use crate::Opts;

/// Shapes exercised by `compare-diff --seed` when no cochain is given.
const COMPARE_SHAPES: [(usize, usize); 5] = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)];

pub struct Ctx<'a> {
    opts: &'a Opts,
    pub report: Report,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

fn tensor_json(t: &MultiTensor) -> Value {
    json!({ "p": t.p(), "q": t.q(), "entries": t.to_json()["entries"] })
}

/// `None` for a zero tensor, for use as a check residual.
fn nonzero(t: &MultiTensor) -> Option<Value> {
    (!t.is_zero()).then(|| tensor_json(t))
}

fn nonzero_element(e: &GSElement) -> Option<Value> {
    (!e.is_zero()).then(|| e.to_json())
}

fn pair(t: (usize, usize)) -> String {
    format!("{},{}", t.0, t.1)
}

fn uncomputable(e: &Error) -> bool {
    matches!(e, Error::NotComputable(_) | Error::MissingEntry(_))
}

impl<'a> Ctx<'a> {
    pub fn new(opts: &'a Opts, report: Report) -> Self {
        let mut ctx = Ctx { opts, report };
        if let Some(t) = opts.target {
            ctx.report.digest_input("target", &json!([t.0, t.1]));
        }
        ctx
    }

    fn bialgebra(&mut self) -> Result<BialgebraData> {
        let path = self.opts.bialgebra.as_ref().ok_or_else(|| anyhow!("this command needs --bialgebra FILE"))?;
        let b = BialgebraData::from_json(&read_json(path)?).with_context(|| format!("invalid bialgebra in {}", path.display()))?;
        self.report.digest_input("bialgebra", &b.to_json());
        Ok(b)
    }

    /// `--bialgebra`, or the trivial bialgebra of dimension `--dim`.
    fn bialgebra_or_dim(&mut self) -> Result<BialgebraData> {
        match (&self.opts.bialgebra, self.opts.dim) {
            (Some(_), _) => self.bialgebra(),
            (None, Some(d)) if d >= 1 => {
                self.report.digest_input("dim", &json!(d));
                Ok(BialgebraData::trivial(d))
            }
            _ => bail!("this command needs --bialgebra FILE or --dim N (N ≥ 1)"),
        }
    }

    fn table(&mut self) -> Result<DiffTable> {
        let t = match &self.opts.table {
            None => builtin_table(),
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                load_table(&text, None).with_context(|| format!("invalid table in {}", path.display()))?
            }
        };
        self.report.digest_input("table", &t.to_json());
        Ok(t)
    }

    /// Cochain files in order, then one random cochain per `--random p,q`.
    fn elements(&mut self, dim: usize) -> Result<Vec<GSElement>> {
        let mut out = Vec::new();
        for path in &self.opts.cochain {
            let e = GSElement::from_json(&read_json(path)?, dim).with_context(|| format!("invalid cochain in {}", path.display()))?;
            self.report.digest_input("cochain", &e.to_json());
            out.push(e);
        }
        if !self.opts.random.is_empty() {
            self.report.digest_input("seed", &json!(self.opts.seed));
            let mut r = RandomSource::new(self.opts.seed);
            for &(p, q) in &self.opts.random {
                if p == 0 || q == 0 {
                    bail!("--random {p},{q}: cochains need p, q ≥ 1");
                }
                let e = GSElement::from_cochain(&r.cochain(dim, p, q));
                self.report.digest_input("random", &json!([p, q]));
                out.push(e);
            }
        }
        Ok(out)
    }

    /// As [`Ctx::elements`], requiring each to have a single component.
    fn cochains(&mut self, dim: usize) -> Result<Vec<GSCochain>> {
        self.elements(dim)?
            .into_iter()
            .map(|e| {
                let mut comps = e.components();
                match (comps.next(), comps.next()) {
                    (Some((_, t)), None) => Ok(GSCochain::new(t.clone())?),
                    _ => bail!("this command needs single-component cochains"),
                }
            })
            .collect()
    }
}

pub fn check_bialgebra_cmd(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let r = check_bialgebra(&b);
    ctx.report.check(Check::zero("associativity", nonzero(&r.associativity)));
    ctx.report.check(Check::zero("coassociativity", nonzero(&r.coassociativity)));
    ctx.report.check(Check::zero("compatibility", nonzero(&r.compatibility)));
    ctx.report.result("dim", json!(b.dim()));
    Ok(())
}

pub fn table_check(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.table()?;
    let mut terms = serde_json::Map::new();
    for (g, s) in t.entries() {
        let name = format!("d_squared[{},{}]", g.outs, g.ins);
        let dd = t.d_squared(g)?;
        let residual = (!dd.is_empty()).then(|| dd.to_json());
        ctx.report.check(Check::zero(name, residual));
        terms.insert(pair((g.outs, g.ins)), json!(s.len()));
    }
    let text = t.to_json().to_string();
    let again = load_table(&text, None)?.to_json().to_string();
    let mut rt = Check::zero("json_round_trip", None);
    if again != text {
        rt = Check::zero("json_round_trip", Some(json!("serialization changed on reload")));
    }
    ctx.report.check(rt);
    ctx.report.result("terms", Value::Object(terms));
    ctx.report.result("truncation_order", json!(t.truncation_order()));
    Ok(())
}

pub fn gs_diff(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let fs = ctx.cochains(b.dim())?;
    if fs.is_empty() {
        bail!("gs-diff needs at least one --cochain or --random");
    }
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let (p, q) = (f.p(), f.q());
        let (x, y) = (d1(&b, f)?, d2(&b, f)?);
        let tag = format!("#{i} C^{{{p},{q}}}");
        ctx.report.check(Check::zero(format!("{tag} d1^2"), nonzero(d1(&b, &x)?.tensor())));
        ctx.report.check(Check::zero(format!("{tag} d2^2"), nonzero(d2(&b, &y)?.tensor())));
        let anti = d1(&b, &y)?.tensor().scale(&sign(d2_twist(p))).add(&d2(&b, &x)?.tensor().scale(&sign(d2_twist(p + 1))));
        ctx.report.check(Check::zero(format!("{tag} d1 d2 + d2 d1 (twisted)"), nonzero(&anti)));
        let e = GSElement::from_cochain(f);
        let de = d_gs(&b, &e)?;
        ctx.report.check(Check::zero(format!("{tag} d_GS^2"), nonzero_element(&d_gs(&b, &de)?)));
        out.push(json!({ "d1": tensor_json(x.tensor()), "d2": tensor_json(y.tensor()), "d_gs": de.to_json() }));
    }
    ctx.report.result("differentials", json!(out));
    Ok(())
}

fn sign(s: i64) -> bialg_core::Rational {
    bialg_core::exact_tensor::rat(s)
}

/// Brackets of `xs` at `--target`, or at every table generator.
fn bracket_report(ctx: &mut Ctx, t: &DiffTable, b: &BialgebraData, xs: &[&GSElement], key: &str) -> Result<()> {
    match ctx.opts.target {
        Some(tg) => match bracket_element(t, b, xs, tg) {
            Ok(v) => ctx.report.result(key, json!({ pair(tg): tensor_json(&v) })),
            Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable(format!("{key}[{}]", pair(tg)), e.to_string())),
            Err(e) => return Err(e.into()),
        },
        None => match bracket_all(t, b, xs) {
            Ok(v) => ctx.report.result(key, v.to_json()),
            Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable(key, e.to_string())),
            Err(e) => return Err(e.into()),
        },
    }
    Ok(())
}

pub fn delta_b(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let t = ctx.table()?;
    let es = ctx.elements(b.dim())?;
    if es.is_empty() {
        bail!("delta-b needs a --cochain or --random");
    }
    for (i, e) in es.iter().enumerate() {
        bracket_report(ctx, &t, &b, &[e], &format!("delta_b#{i}"))?;
    }
    Ok(())
}

pub fn compare_diff(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let t = ctx.table()?;
    let mut fs = ctx.cochains(b.dim())?;
    if fs.is_empty() {
        ctx.report.digest_input("seed", &json!(ctx.opts.seed));
        let mut r = RandomSource::new(ctx.opts.seed);
        fs = COMPARE_SHAPES.iter().map(|&(p, q)| r.cochain(b.dim(), p, q)).collect();
    }
    let mut signs = serde_json::Map::new();
    for (i, f) in fs.iter().enumerate() {
        let (p, q) = (f.p(), f.q());
        let tag = format!("#{i} C^{{{p},{q}}}");
        match delta_matches_dgs(&t, &b, f) {
            Ok(c) => {
                ctx.report.check(Check::zero(format!("{tag} target ({}) vs d1", pair((q, p + 1))), nonzero(&c.d1_residual)));
                ctx.report.check(Check::zero(format!("{tag} target ({}) vs d2", pair((q + 1, p))), nonzero(&c.d2_residual)));
                for (tg, zero) in &c.other_targets {
                    let residual = (!zero).then(|| json!("nonzero"));
                    ctx.report.check(Check::zero(format!("{tag} target ({}) vanishes", pair(*tg)), residual));
                }
                signs.insert(format!("{p},{q}"), json!({ "d1": c.d1_sign, "d2": c.d2_sign }));
            }
            Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable(tag, e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    ctx.report.result("signs", Value::Object(signs));
    Ok(())
}

pub fn bracket(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let t = ctx.table()?;
    let es = ctx.elements(b.dim())?;
    let refs: Vec<&GSElement> = es.iter().collect();
    ctx.report.result("arity", json!(es.len()));
    bracket_report(ctx, &t, &b, &refs, "bracket")
}

pub fn linf_check(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra()?;
    let t = ctx.table()?;
    let fs = ctx.cochains(b.dim())?;
    if fs.is_empty() {
        bail!("linf-check needs at least one --cochain or --random");
    }
    let targets: Vec<(usize, usize)> = match ctx.opts.target {
        Some(tg) => vec![tg],
        None => t.generators().map(|g| (g.outs, g.ins)).collect(),
    };
    for tg in targets {
        let name = format!("relation n={} at ({})", fs.len(), pair(tg));
        match linf_relation_residual(&t, &b, &fs, tg) {
            Ok(r) => ctx.report.check(Check::zero(name, nonzero(&r))),
            Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable(name, e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn single_kappa(ctx: &mut Ctx, dim: usize) -> Result<(GSElement, Vec<GSElement>)> {
    let mut es = ctx.elements(dim)?.into_iter();
    let kappa = es.next().ok_or_else(|| anyhow!("the first --cochain is κ and is required"))?;
    Ok((kappa, es.collect()))
}

pub fn master(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra_or_dim()?;
    let t = ctx.table()?;
    let (kappa, rest) = single_kappa(ctx, b.dim())?;
    if !rest.is_empty() {
        bail!("master takes exactly one cochain κ");
    }
    let gs = GsProvider::new(t, b);
    match master_residual(&gs, None, &kappa) {
        Ok(r) => ctx.report.check(Check::zero("master_equation", nonzero_element(&r))),
        Err(Error::NotDegreeOne) => bail!("κ must be homogeneous of degree 1 (components with p + q = 3)"),
        Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable("master_equation", e.to_string())),
        Err(e) => return Err(e.into()),
    }
    ctx.report.result("truncation_order", json!(gs.truncation_order()));
    Ok(())
}

pub fn twist_cmd(ctx: &mut Ctx) -> Result<()> {
    let b = ctx.bialgebra_or_dim()?;
    let t = ctx.table()?;
    let (kappa, args) = single_kappa(ctx, b.dim())?;
    let gs = GsProvider::new(t, b);
    let tw = match twist(&gs, kappa) {
        Ok(tw) => tw,
        Err(Error::NotDegreeOne) => bail!("κ must be homogeneous of degree 1 (components with p + q = 3)"),
        Err(e) => return Err(e.into()),
    };
    let curvature = tw.curvature()?;
    ctx.report.check(Check::zero("curvature", nonzero_element(&curvature)));
    let refs: Vec<&GSElement> = args.iter().collect();
    match tw.bracket(&refs) {
        Ok(v) => ctx.report.result(format!("twisted_l{}", args.len()), v.to_json()),
        Err(e) if uncomputable(&e) => ctx.report.check(Check::not_computable(format!("twisted_l{}", args.len()), e.to_string())),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub fn eval_graph(ctx: &mut Ctx) -> Result<()> {
    let path = ctx.opts.graph.clone().ok_or_else(|| anyhow!("eval-graph needs --graph FILE"))?;
    let g = DecoratedGraph::from_json(&read_json(&path)?).with_context(|| format!("invalid graph in {}", path.display()))?;
    ctx.report.digest_input("graph", &g.to_json());
    let b = ctx.bialgebra_or_dim()?;
    let v = evaluate(&g, &Decoration::new(&b))?;
    ctx.report.result("tensor", tensor_json(&v));
    Ok(())
}

pub fn ainf_check(ctx: &mut Ctx) -> Result<()> {
    let dim = match (&ctx.opts.bialgebra, ctx.opts.dim) {
        (Some(_), _) => ctx.bialgebra()?.dim(),
        (None, Some(d)) if d >= 1 => d,
        _ => bail!("ainf-check needs --dim N or --bialgebra FILE to fix the dimension"),
    };
    let es = ctx.elements(dim)?;
    let mut mus: Vec<Option<MultiTensor>> = Vec::new();
    let mut d: Option<MultiTensor> = None;
    for ((p, q), t) in es.iter().flat_map(|e| e.components()) {
        match (p, q) {
            (1, 1) if d.is_none() => d = Some(t.clone()),
            (n, 1) if n >= 2 => {
                if mus.len() < n - 1 {
                    mus.resize(n - 1, None);
                }
                if mus[n - 2].replace(t.clone()).is_some() {
                    bail!("two cochains give μ_{n}");
                }
            }
            _ => bail!("ainf-check takes single-output cochains: μ_n in C^{{n,1}} (n ≥ 2) and at most one d in C^{{1,1}}"),
        }
    }
    if mus.is_empty() {
        bail!("ainf-check needs at least μ_2");
    }
    let mus: Vec<MultiTensor> = mus
        .into_iter()
        .enumerate()
        .map(|(k, m)| m.unwrap_or_else(|| MultiTensor::zeros(dim, k + 2, 1)))
        .collect();
    for (n, r) in ainf_master_residual(&mus, d.as_ref())? {
        ctx.report.check(Check::zero(format!("R_{n}"), nonzero(&r)));
    }
    Ok(())
}
