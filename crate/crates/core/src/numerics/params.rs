//! Named parameter storage and the per-pass binding session.
//!
//! Model layers hold `ParamId` handles into a `ParamStore`; a `Session`
//! owns one tape and lazily binds each parameter to a single leaf node,
//! so a weight used by several consumers accumulates all gradient
//! contributions in one buffer.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::graph::{Graph, NodeId};
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

#[derive(Debug, Clone)]
pub struct ParamEntry {
    pub name: String,
    pub value: Tensor,
    pub trainable: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: Tensor, trainable: bool) -> Result<ParamId> {
        if self.index.contains_key(name) {
            return Err(Error::config(format!("duplicate parameter name `{name}`")));
        }
        let id = self.entries.len();
        self.index.insert(name.to_string(), id);
        self.entries.push(ParamEntry {
            name: name.to_string(),
            value,
            trainable,
        });
        Ok(ParamId(id))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.entries[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.entries[id.0].value
    }

    pub fn is_trainable(&self, id: ParamId) -> bool {
        self.entries[id.0].trainable
    }

    pub fn set_trainable(&mut self, id: ParamId, trainable: bool) {
        self.entries[id.0].trainable = trainable;
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &ParamEntry)> {
        self.entries.iter().enumerate().map(|(i, e)| (ParamId(i), e))
    }

    /// Total scalar parameter count.
    pub fn total_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.value.numel()).sum()
    }

    /// Scalar count over trainable entries only.
    pub fn trainable_scalars(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.trainable)
            .map(|e| e.value.numel())
            .sum()
    }

    /// SHA-256 over all frozen entries (name, shape, raw little-endian
    /// values) in insertion order. Used to prove adapters never touch
    /// the base weights.
    pub fn frozen_hash(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.entries {
            if e.trainable {
                continue;
            }
            h.update(e.name.as_bytes());
            h.update([0x1f]);
            h.update((e.value.rows() as u64).to_le_bytes());
            h.update((e.value.cols() as u64).to_le_bytes());
            for v in e.value.data() {
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Deep copy of all values, for best-epoch snapshots.
    pub fn snapshot(&self) -> Vec<Tensor> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Tensor]) {
        assert_eq!(snapshot.len(), self.entries.len(), "snapshot size mismatch");
        for (e, t) in self.entries.iter_mut().zip(snapshot.iter()) {
            e.value = t.clone();
        }
    }
}

/// Gradients read out of one backward pass, indexed by `ParamId`.
#[derive(Debug, Clone)]
pub struct Gradients {
    by_param: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Assemble gradients directly, e.g. for optimizer tests or for
    /// averaging across accumulation steps.
    pub fn from_parts(by_param: Vec<Option<Tensor>>) -> Self {
        Gradients { by_param }
    }

    pub fn get(&self, id: ParamId) -> Option<&Tensor> {
        self.by_param.get(id.0).and_then(|g| g.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.by_param
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.as_ref().map(|t| (ParamId(i), t)))
    }
}

/// One forward/backward pass bound to a parameter store.
pub struct Session<'a> {
    pub g: Graph,
    store: &'a ParamStore,
    bound: Vec<Option<NodeId>>,
}

impl<'a> Session<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Session {
            g: Graph::new(),
            store,
            bound: vec![None; store.len()],
        }
    }

    pub fn store(&self) -> &ParamStore {
        self.store
    }

    /// Leaf node for a parameter; bound at most once per session.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(n) = self.bound[id.0] {
            return n;
        }
        let entry = &self.store.entries[id.0];
        let n = self.g.leaf(entry.value.clone(), entry.trainable);
        self.bound[id.0] = Some(n);
        n
    }

    pub fn constant(&mut self, t: Tensor) -> NodeId {
        self.g.constant(t)
    }

    /// Backward from `loss`, then collect each bound parameter's gradient.
    pub fn backward(mut self, loss: NodeId) -> Result<Gradients> {
        self.g.backward(loss)?;
        let mut by_param = vec![None; self.store.len()];
        for (pid, node) in self.bound.iter().enumerate() {
            if let Some(n) = node {
                by_param[pid] = self.g.take_grad(*n);
            }
        }
        Ok(Gradients { by_param })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_name_rejected() {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(1.0), true).unwrap();
        assert!(store.insert("w", Tensor::scalar(2.0), true).is_err());
    }

    #[test]
    fn shared_param_accumulates_once_per_use() {
        let mut store = ParamStore::new();
        let w = store.insert("w", Tensor::row(vec![2.0]), true).unwrap();
        let mut sess = Session::new(&store);
        let a = sess.param(w);
        let b = sess.param(w);
        assert_eq!(a, b); // same leaf
        let prod = sess.g.mul_elem(a, b).unwrap(); // w^2
        let loss = sess.g.sum_all(prod);
        let grads = sess.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().data(), &[4.0]); // d(w^2)/dw = 2w
    }

    #[test]
    fn frozen_hash_ignores_trainable() {
        let mut s1 = ParamStore::new();
        s1.insert("frozen", Tensor::row(vec![1.0, 2.0]), false).unwrap();
        s1.insert("train", Tensor::row(vec![5.0]), true).unwrap();
        let h1 = s1.frozen_hash();
        *s1.value_mut(ParamId(1)) = Tensor::row(vec![9.0]);
        assert_eq!(h1, s1.frozen_hash());
        *s1.value_mut(ParamId(0)) = Tensor::row(vec![1.0, 3.0]);
        assert_ne!(h1, s1.frozen_hash());
    }
}
