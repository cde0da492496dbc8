//! Named, typed learnable tensors addressed by hierarchical path, plus the
//! binding context that exposes them as tape leaves during a forward pass.

use crate::tape::{Tape, Var};
use indexmap::IndexMap;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("unknown parameter path {0}")]
    UnknownPath(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
}

/// Map from hierarchical path (e.g. "ehgt.att.longitudinal.h0") to tensor.
/// Insertion order is fixed at model construction and preserved on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterStore {
    entries: IndexMap<String, Array2<f64>>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: &str, value: Array2<f64>) {
        assert!(
            !self.entries.contains_key(path),
            "parameter path {path} registered twice"
        );
        self.entries.insert(path.to_string(), value);
    }

    pub fn get(&self, path: &str) -> Result<&Array2<f64>, ParamError> {
        self.entries
            .get(path)
            .ok_or_else(|| ParamError::UnknownPath(path.to_string()))
    }

    pub fn get_mut(&mut self, path: &str) -> Result<&mut Array2<f64>, ParamError> {
        self.entries
            .get_mut(path)
            .ok_or_else(|| ParamError::UnknownPath(path.to_string()))
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array2<f64>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_scalars(&self) -> usize {
        self.entries.values().map(|v| v.len()).sum()
    }
}

/// Xavier-uniform matrix; deterministic per (seed, path).
pub fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
}

/// Per-path RNG so parameter values do not depend on registration order.
pub fn path_rng(seed: u64, path: &str) -> ChaCha8Rng {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    path.hash(&mut h);
    ChaCha8Rng::seed_from_u64(seed ^ h.finish())
}

/// Forward-pass context: a tape plus lazily bound parameter leaves.
pub struct Ctx<'a> {
    pub tape: Tape,
    store: &'a ParameterStore,
    bound: IndexMap<String, Var>,
}

impl<'a> Ctx<'a> {
    pub fn new(store: &'a ParameterStore) -> Self {
        Ctx {
            tape: Tape::new(),
            store,
            bound: IndexMap::new(),
        }
    }

    /// Bind a parameter as a tape leaf (once per path per forward pass).
    pub fn param(&mut self, path: &str) -> Var {
        if let Some(v) = self.bound.get(path) {
            return *v;
        }
        let value = self
            .store
            .get(path)
            .unwrap_or_else(|e| panic!("{e}"))
            .clone();
        let v = self.tape.leaf(value);
        self.bound.insert(path.to_string(), v);
        v
    }

    pub fn input(&mut self, value: Array2<f64>) -> Var {
        self.tape.leaf(value)
    }

    /// Gradients per bound parameter path after `Tape::backward`.
    pub fn param_grads(
        &self,
        grads: &[Option<Array2<f64>>],
    ) -> IndexMap<String, Array2<f64>> {
        let mut out = IndexMap::new();
        for (path, var) in &self.bound {
            let g = grads[var.0]
                .clone()
                .unwrap_or_else(|| Array2::zeros(self.store.get(path).unwrap().dim()));
            out.insert(path.clone(), g);
        }
        out
    }
}

// ---- neural building blocks -------------------------------------------------

/// y = x . W + b with parameters at `<path>.w` (in x out) and `<path>.b` (1 x out).
pub fn linear(ctx: &mut Ctx, x: Var, path: &str) -> Var {
    let w = ctx.param(&format!("{path}.w"));
    let b = ctx.param(&format!("{path}.b"));
    let xw = ctx.tape.matmul(x, w);
    ctx.tape.add_row(xw, b)
}

/// Two-layer feed-forward map with a GELU hidden layer.
pub fn mlp2(ctx: &mut Ctx, x: Var, path: &str) -> Var {
    let h = linear(ctx, x, &format!("{path}.l1"));
    let h = ctx.tape.gelu(h);
    linear(ctx, h, &format!("{path}.l2"))
}

pub fn register_linear(store: &mut ParameterStore, seed: u64, path: &str, rows: usize, cols: usize) {
    let w_path = format!("{path}.w");
    let mut rng = path_rng(seed, &w_path);
    store.insert(&w_path, xavier(&mut rng, rows, cols));
    store.insert(&format!("{path}.b"), Array2::zeros((1, cols)));
}

pub fn register_mlp2(store: &mut ParameterStore, seed: u64, path: &str, input: usize, hidden: usize, out: usize) {
    register_linear(store, seed, &format!("{path}.l1"), input, hidden);
    register_linear(store, seed, &format!("{path}.l2"), hidden, out);
}

/// One GRU step. Gates follow the standard formulation:
/// z = sigm(xWz + hUz + bz), r = sigm(xWr + hUr + br),
/// n = tanh(xWn + (r*h)Un + bn), h' = (1-z)*n + z*h.
pub fn gru_step(ctx: &mut Ctx, x: Var, h: Var, path: &str) -> Var {
    let gate = |ctx: &mut Ctx, x: Var, h: Var, name: &str| {
        let wx = ctx.param(&format!("{path}.w{name}"));
        let uh = ctx.param(&format!("{path}.u{name}"));
        let b = ctx.param(&format!("{path}.b{name}"));
        let a = ctx.tape.matmul(x, wx);
        let c = ctx.tape.matmul(h, uh);
        let s = ctx.tape.add(a, c);
        ctx.tape.add_row(s, b)
    };
    let z = gate(ctx, x, h, "z");
    let z = ctx.tape.sigmoid(z);
    let r = gate(ctx, x, h, "r");
    let r = ctx.tape.sigmoid(r);
    let rh = ctx.tape.mul(r, h);
    let n = gate(ctx, x, rh, "n");
    let n = ctx.tape.tanh(n);
    let one_minus_z = ctx.tape.one_minus(z);
    let a = ctx.tape.mul(one_minus_z, n);
    let b = ctx.tape.mul(z, h);
    ctx.tape.add(a, b)
}

/// Run a GRU over a sequence of 1xIn inputs from a zero initial state.
pub fn gru_seq(ctx: &mut Ctx, inputs: &[Var], width: usize, path: &str) -> Var {
    let mut h = ctx.tape.zeros(1, width);
    for &x in inputs {
        h = gru_step(ctx, x, h, path);
    }
    h
}

pub fn register_gru(store: &mut ParameterStore, seed: u64, path: &str, input: usize, hidden: usize) {
    for name in ["z", "r", "n"] {
        let wp = format!("{path}.w{name}");
        let mut rng = path_rng(seed, &wp);
        store.insert(&wp, xavier(&mut rng, input, hidden));
        let up = format!("{path}.u{name}");
        let mut rng = path_rng(seed, &up);
        store.insert(&up, xavier(&mut rng, hidden, hidden));
        store.insert(&format!("{path}.b{name}"), Array2::zeros((1, hidden)));
    }
}

/// Multi-head scaled dot-product cross-attention. The first argument
/// supplies queries, the second keys and values. An empty key set yields
/// a zero output so residual paths carry the signal.
pub fn cross_attention(ctx: &mut Ctx, queries: Var, keys_values: Option<Var>, heads: usize, path: &str) -> Var {
    let n = ctx.tape.value(queries).nrows();
    let d = ctx.tape.value(queries).ncols();
    let kv = match keys_values {
        Some(kv) if ctx.tape.value(kv).nrows() > 0 => kv,
        _ => return ctx.tape.zeros(n, d),
    };
    let d_h = d / heads;
    let q = linear(ctx, queries, &format!("{path}.q"));
    let k = linear(ctx, kv, &format!("{path}.k"));
    let v = linear(ctx, kv, &format!("{path}.v"));
    let mut parts = Vec::with_capacity(heads);
    for i in 0..heads {
        let qi = ctx.tape.slice_cols(q, i * d_h, d_h);
        let ki = ctx.tape.slice_cols(k, i * d_h, d_h);
        let vi = ctx.tape.slice_cols(v, i * d_h, d_h);
        let kit = ctx.tape.transpose(ki);
        let scores = ctx.tape.matmul(qi, kit);
        let scores = ctx.tape.scale(scores, 1.0 / (d_h as f64).sqrt());
        let weights = ctx.tape.softmax_rows(scores);
        parts.push(ctx.tape.matmul(weights, vi));
    }
    let cat = ctx.tape.concat_cols(&parts);
    linear(ctx, cat, &format!("{path}.o"))
}

pub fn register_cross_attention(store: &mut ParameterStore, seed: u64, path: &str, d: usize) {
    for name in ["q", "k", "v", "o"] {
        register_linear(store, seed, &format!("{path}.{name}"), d, d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy_store() -> ParameterStore {
        let mut s = ParameterStore::new();
        register_linear(&mut s, 7, "lin", 3, 2);
        register_gru(&mut s, 7, "gru", 3, 4);
        register_cross_attention(&mut s, 7, "att", 4);
        s
    }

    #[test]
    fn linear_matches_manual_computation() {
        let store = toy_store();
        let mut ctx = Ctx::new(&store);
        let x = ctx.input(array![[1.0, -2.0, 0.5]]);
        let y = linear(&mut ctx, x, "lin");
        let w = store.get("lin.w").unwrap();
        let b = store.get("lin.b").unwrap();
        for c in 0..2 {
            let expect = 1.0 * w[[0, c]] - 2.0 * w[[1, c]] + 0.5 * w[[2, c]] + b[[0, c]];
            assert!((ctx.tape.value(y)[[0, c]] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn gru_with_zero_params_stays_at_zero_state() {
        let mut s = ParameterStore::new();
        for name in ["z", "r", "n"] {
            s.insert(&format!("g.w{name}"), Array2::zeros((3, 4)));
            s.insert(&format!("g.u{name}"), Array2::zeros((4, 4)));
            s.insert(&format!("g.b{name}"), Array2::zeros((1, 4)));
        }
        let mut ctx = Ctx::new(&s);
        let x = ctx.input(array![[1.0, 2.0, 3.0]]);
        let h = gru_seq(&mut ctx, &[x], 4, "g");
        // z = 0.5, n = tanh(0) = 0, h' = 0.5*0 + 0.5*0 = 0
        assert!(ctx.tape.value(h).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cross_attention_singleton_key_returns_value_projection() {
        let store = toy_store();
        let mut ctx = Ctx::new(&store);
        let q = ctx.input(array![[0.1, 0.2, 0.3, 0.4]]);
        let kv = ctx.input(array![[1.0, -1.0, 0.5, 2.0]]);
        let out = cross_attention(&mut ctx, q, Some(kv), 2, "att");

        // with a single key the softmax weight is 1, so out = o(v(kv))
        let mut ctx2 = Ctx::new(&store);
        let kv2 = ctx2.input(array![[1.0, -1.0, 0.5, 2.0]]);
        let v = linear(&mut ctx2, kv2, "att.v");
        let expect = linear(&mut ctx2, v, "att.o");
        for c in 0..4 {
            assert!((ctx.tape.value(out)[[0, c]] - ctx2.tape.value(expect)[[0, c]]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_key_set_yields_zeros() {
        let store = toy_store();
        let mut ctx = Ctx::new(&store);
        let q = ctx.input(array![[0.1, 0.2, 0.3, 0.4]]);
        let out = cross_attention(&mut ctx, q, None, 2, "att");
        assert!(ctx.tape.value(out).iter().all(|&v| v == 0.0));
    }
}
