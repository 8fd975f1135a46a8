//! Special permutations and `(k,l)`-fractions.
//!
//! A fraction stacks a row of `l` graphs with `k` inputs each on top of a row
//! of `k` graphs with `l` outputs each; the `r`-th output of the `j`-th lower
//! graph feeds the `j`-th input of the `r`-th upper graph. In the wiring this is
//! `σ(k,l)`, read as "bottom wire `i` goes to top slot `σ(i)`".

use crate::error::{Error, Result};
use crate::exact_tensor::Perm;
use crate::prop_graph::DecoratedGraph;

/// `σ(i) = k(i − 1 − (s−1)l) + s` where `(s−1)l < i ≤ sl`.
pub fn special_permutation(k: usize, l: usize) -> Perm {
    assert!(k >= 1 && l >= 1, "special permutations need k, l ≥ 1");
    let images = (1..=k * l)
        .map(|i| {
            let s = i.div_ceil(l);
            k * (i - 1 - (s - 1) * l) + s
        })
        .collect();
    Perm::new(images).expect("special permutations are bijections")
}

/// `(A₁⊗⋯⊗A_l) ∘ σ(k,l) ∘ (B₁⊗⋯⊗B_k)`.
pub fn fraction(numerators: &[DecoratedGraph], denominators: &[DecoratedGraph]) -> Result<DecoratedGraph> {
    let (l, k) = (numerators.len(), denominators.len());
    if l == 0 || k == 0 {
        return Err(Error::Arity("a fraction needs at least one numerator and one denominator".into()));
    }
    if let Some(a) = numerators.iter().find(|a| a.inputs() != k) {
        return Err(Error::Arity(format!("numerator with {} inputs in a fraction over {k} denominators", a.inputs())));
    }
    if let Some(b) = denominators.iter().find(|b| b.outputs() != l) {
        return Err(Error::Arity(format!("denominator with {} outputs in a fraction of {l} numerators", b.outputs())));
    }
    let top = DecoratedGraph::tensor_all(numerators);
    let bottom = DecoratedGraph::tensor_all(denominators);
    let middle = DecoratedGraph::permutation(&special_permutation(k, l));
    DecoratedGraph::compose(&top, &DecoratedGraph::compose(&middle, &bottom)?)
}
