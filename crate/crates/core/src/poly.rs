//! Group polynomials as straight-line programs.
//!
//! A [`GroupPolynomial`] is a DAG over constants, variables, products and
//! inverses. Nodes only reference earlier nodes, so evaluation is a single
//! forward pass. The flattened word the DAG denotes can be astronomically
//! long; its length is tracked exactly with big integers.
//!
//! An inverse letter `x⁻¹` counts as one letter of the word.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Elem, FiniteGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("assignment has {got} values but the polynomial has {expected} variables")]
    ArityMismatch { expected: usize, got: usize },
    #[error("polynomials live over different groups")]
    GroupMismatch,
    #[error("flat word has {length} letters, above the cap of {cap}")]
    CapExceeded { length: BigUint, cap: u64 },
    #[error("flat length does not fit in 64 bits")]
    IntegerOverflow,
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("SLP parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Elem),
    Var(u32),
    Mul(NodeId, NodeId),
    Inv(NodeId),
}

/// A polynomial over a finite group, stored as a straight-line program.
#[derive(Clone, Debug)]
pub struct GroupPolynomial {
    group: Arc<FiniteGroup>,
    nodes: Vec<Node>,
    root: NodeId,
    var_arity: usize,
}

impl PartialEq for GroupPolynomial {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group)
            && self.nodes == other.nodes
            && self.root == other.root
            && self.var_arity == other.var_arity
    }
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Hash-consing builder. Structurally identical nodes are created once.
#[derive(Clone, Debug)]
pub struct PolyBuilder {
    group: Arc<FiniteGroup>,
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl PolyBuilder {
    pub fn new(group: Arc<FiniteGroup>) -> Self {
        PolyBuilder { group, nodes: Vec::new(), index: HashMap::new() }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    fn push(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    pub fn constant(&mut self, e: Elem) -> NodeId {
        self.push(Node::Const(e))
    }

    pub fn var(&mut self, v: usize) -> NodeId {
        self.push(Node::Var(v as u32))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Node::Mul(a, b))
    }

    pub fn inv(&mut self, a: NodeId) -> NodeId {
        self.push(Node::Inv(a))
    }

    /// `[a, b] = a⁻¹b⁻¹ab`
    pub fn comm(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let ai = self.inv(a);
        let bi = self.inv(b);
        let t = self.mul(ai, bi);
        let t = self.mul(t, a);
        self.mul(t, b)
    }

    /// `[a, b, …, b]` with `k` copies of `b`.
    pub fn iter_comm(&mut self, a: NodeId, b: NodeId, k: usize) -> NodeId {
        (0..k).fold(a, |acc, _| self.comm(acc, b))
    }

    /// `q̃ᵏ(z, x₁, …, x_k)`: nests an ω-fold commutator with each `xᵢ` in turn.
    pub fn qstar(&mut self, z: NodeId, xs: &[NodeId], omega: usize) -> NodeId {
        xs.iter().fold(z, |acc, &x| self.iter_comm(acc, x, omega))
    }

    /// `qᵏ(z, x₁, …, x_k, w) = q̃ᵏ⁺¹(z, x₁, …, x_k, w)`.
    pub fn q(&mut self, z: NodeId, xs: &[NodeId], w: NodeId, omega: usize) -> NodeId {
        let inner = self.qstar(z, xs, omega);
        self.iter_comm(inner, w, omega)
    }

    /// `D(x, y₁, y₂, y₃) = x · q̃³(x, y₁, y₂, y₃)⁻¹`.
    pub fn d(&mut self, x: NodeId, ys: [NodeId; 3], omega: usize) -> NodeId {
        let q3 = self.qstar(x, &ys, omega);
        let q3i = self.inv(q3);
        self.mul(x, q3i)
    }

    /// Copies `p` into this builder, replacing variable `i` by `vars[i]`.
    pub fn import(&mut self, p: &GroupPolynomial, vars: &[NodeId]) -> Result<NodeId, PolyError> {
        if !same_group(&self.group, &p.group) {
            return Err(PolyError::GroupMismatch);
        }
        if vars.len() < p.var_arity {
            return Err(PolyError::ArityMismatch { expected: p.var_arity, got: vars.len() });
        }
        let mut map = Vec::with_capacity(p.nodes.len());
        for node in &p.nodes {
            let id = match *node {
                Node::Const(e) => self.constant(e),
                Node::Var(v) => vars[v as usize],
                Node::Mul(a, b) => self.mul(map[a.index()], map[b.index()]),
                Node::Inv(a) => self.inv(map[a.index()]),
            };
            map.push(id);
        }
        Ok(map[p.root.index()])
    }

    /// Keeps only nodes reachable from `root`, renumbered in creation order.
    pub fn finish(&self, root: NodeId, var_arity: usize) -> GroupPolynomial {
        let mut live = vec![false; self.nodes.len()];
        live[root.index()] = true;
        for i in (0..=root.index()).rev() {
            if !live[i] {
                continue;
            }
            match self.nodes[i] {
                Node::Mul(a, b) => {
                    live[a.index()] = true;
                    live[b.index()] = true;
                }
                Node::Inv(a) => live[a.index()] = true,
                _ => {}
            }
        }
        let mut renumber = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate().take(root.index() + 1) {
            if !live[i] {
                continue;
            }
            let r = |n: NodeId| NodeId(renumber[n.index()]);
            let node = match *node {
                Node::Mul(a, b) => Node::Mul(r(a), r(b)),
                Node::Inv(a) => Node::Inv(r(a)),
                other => other,
            };
            renumber[i] = nodes.len() as u32;
            nodes.push(node);
        }
        let root = NodeId(renumber[root.index()]);
        let max_var = nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(v) => Some(*v as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        GroupPolynomial {
            group: self.group.clone(),
            nodes,
            root,
            var_arity: var_arity.max(max_var),
        }
    }
}

/// A letter of a flattened word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    Const(Elem),
    Var { id: u32, inverse: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatWord {
    pub letters: Vec<Letter>,
}

impl FlatWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Left-to-right product of the letters.
    pub fn evaluate(&self, g: &FiniteGroup, assignment: &[Elem]) -> Elem {
        self.letters.iter().fold(g.identity(), |acc, l| {
            let v = match *l {
                Letter::Const(c) => c,
                Letter::Var { id, inverse: false } => assignment[id as usize],
                Letter::Var { id, inverse: true } => g.inv(assignment[id as usize]),
            };
            g.mul(acc, v)
        })
    }
}

impl GroupPolynomial {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn var_arity(&self) -> usize {
        self.var_arity
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// The single-variable polynomial `x₀`.
    pub fn variable(group: Arc<FiniteGroup>) -> Self {
        let mut b = PolyBuilder::new(group);
        let v = b.var(0);
        b.finish(v, 1)
    }

    pub fn constant(group: Arc<FiniteGroup>, e: Elem) -> Self {
        let mut b = PolyBuilder::new(group);
        let c = b.constant(e);
        b.finish(c, 0)
    }

    pub fn evaluate(&self, assignment: &[Elem]) -> Result<Elem, PolyError> {
        if assignment.len() != self.var_arity {
            return Err(PolyError::ArityMismatch { expected: self.var_arity, got: assignment.len() });
        }
        if let Some(bad) = assignment.iter().find(|e| e.index() >= self.group.order()) {
            return Err(PolyError::ElementOutOfRange(bad.index()));
        }
        Ok(self.evaluator().eval(assignment))
    }

    /// Reusable evaluator with its own scratch buffer.
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator { poly: self, values: vec![Elem(0); self.nodes.len()] }
    }

    /// Composition: variable `i` is replaced by `map[i]`; unmapped variables
    /// stay as they are. All mapped polynomials read the same variables.
    pub fn substitute(
        &self,
        map: &BTreeMap<usize, GroupPolynomial>,
    ) -> Result<GroupPolynomial, PolyError> {
        let mut b = PolyBuilder::new(self.group.clone());
        let mut arity = 0;
        let mut vars = Vec::with_capacity(self.var_arity);
        for i in 0..self.var_arity {
            match map.get(&i) {
                Some(p) => {
                    let inner: Vec<NodeId> = (0..p.var_arity).map(|v| b.var(v)).collect();
                    let id = b.import(p, &inner)?;
                    arity = arity.max(p.var_arity);
                    vars.push(id);
                }
                None => {
                    arity = arity.max(i + 1);
                    vars.push(b.var(i));
                }
            }
        }
        let root = b.import(self, &vars)?;
        Ok(b.finish(root, arity))
    }

    /// Exact letter count of the flattened word.
    pub fn flat_length(&self) -> BigUint {
        let mut len: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let l = match *node {
                Node::Const(_) | Node::Var(_) => BigUint::one(),
                Node::Mul(a, b) => &len[a.index()] + &len[b.index()],
                Node::Inv(a) => len[a.index()].clone(),
            };
            len.push(l);
        }
        len.swap_remove(self.root.index())
    }

    pub fn flat_length_u64(&self) -> Result<u64, PolyError> {
        self.flat_length().to_u64().ok_or(PolyError::IntegerOverflow)
    }

    /// Materializes the word, failing if it has more than `cap` letters.
    pub fn flatten(&self, cap: u64) -> Result<FlatWord, PolyError> {
        let length = self.flat_length();
        if length > BigUint::from(cap) {
            return Err(PolyError::CapExceeded { length, cap });
        }
        let g = &self.group;
        let mut letters = Vec::with_capacity(length.to_usize().unwrap_or(0));
        let mut stack = vec![(self.root, false)];
        while let Some((id, inverted)) = stack.pop() {
            match self.nodes[id.index()] {
                Node::Const(c) => letters.push(Letter::Const(if inverted { g.inv(c) } else { c })),
                Node::Var(v) => letters.push(Letter::Var { id: v, inverse: inverted }),
                // the stack is LIFO: push the part emitted second first
                Node::Mul(a, b) if !inverted => {
                    stack.push((b, false));
                    stack.push((a, false));
                }
                Node::Mul(a, b) => {
                    stack.push((a, true));
                    stack.push((b, true));
                }
                Node::Inv(a) => stack.push((a, !inverted)),
            }
        }
        Ok(FlatWord { letters })
    }

    /// Bit-exact straight-line-program text.
    pub fn to_slp(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let _ = match node {
                Node::Const(e) => writeln!(out, "t{i} = CONST g{}", e.0),
                Node::Var(v) => writeln!(out, "t{i} = VAR x{v}"),
                Node::Mul(a, b) => writeln!(out, "t{i} = MUL t{} t{}", a.0, b.0),
                Node::Inv(a) => writeln!(out, "t{i} = INV t{}", a.0),
            };
        }
        let _ = writeln!(out, "ROOT t{}", self.root.0);
        out
    }

    /// Parses the straight-line-program text. `var_arity` defaults to one
    /// more than the largest variable id.
    pub fn from_slp(
        text: &str,
        group: Arc<FiniteGroup>,
        var_arity: Option<usize>,
    ) -> Result<GroupPolynomial, PolyError> {
        let err = |line: usize, msg: &str| PolyError::Parse { line: line + 1, msg: msg.into() };
        let mut nodes = Vec::new();
        let mut root = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if root.is_some() {
                return Err(err(ln, "content after ROOT"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let node_ref = |s: &str, bound: usize| -> Result<NodeId, PolyError> {
                let i: usize = s
                    .strip_prefix('t')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| err(ln, "expected t<i>"))?;
                if i >= bound {
                    return Err(err(ln, "reference is not to an earlier node"));
                }
                Ok(NodeId(i as u32))
            };
            if parts[0] == "ROOT" {
                if parts.len() != 2 || nodes.is_empty() {
                    return Err(err(ln, "malformed ROOT"));
                }
                root = Some(node_ref(parts[1], nodes.len())?);
                continue;
            }
            if parts.len() < 3 || parts[1] != "=" || parts[0] != format!("t{}", nodes.len()) {
                return Err(err(ln, "expected t<i> = ... with consecutive indices"));
            }
            let node = match (parts[2], parts.len()) {
                ("CONST", 4) => {
                    let e: usize = parts[3]
                        .strip_prefix('g')
                        .and_then(|n| n.parse().ok())
                        .ok_or_else(|| err(ln, "expected g<e>"))?;
                    if e >= group.order() {
                        return Err(PolyError::ElementOutOfRange(e));
                    }
                    Node::Const(Elem(e as u32))
                }
                ("VAR", 4) => {
                    let v: u32 = parts[3]
                        .strip_prefix('x')
                        .and_then(|n| n.parse().ok())
                        .ok_or_else(|| err(ln, "expected x<v>"))?;
                    Node::Var(v)
                }
                ("MUL", 5) => Node::Mul(node_ref(parts[3], nodes.len())?, node_ref(parts[4], nodes.len())?),
                ("INV", 4) => Node::Inv(node_ref(parts[3], nodes.len())?),
                _ => return Err(err(ln, "unknown node kind")),
            };
            nodes.push(node);
        }
        let root = root.ok_or_else(|| err(text.lines().count(), "missing ROOT"))?;
        let max_var = nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(v) => Some(*v as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let var_arity = var_arity.unwrap_or(max_var);
        if var_arity < max_var {
            return Err(PolyError::ArityMismatch { expected: max_var, got: var_arity });
        }
        Ok(GroupPolynomial { group, nodes, root, var_arity })
    }
}

/// Evaluates one polynomial many times without reallocating.
pub struct Evaluator<'a> {
    poly: &'a GroupPolynomial,
    values: Vec<Elem>,
}

impl Evaluator<'_> {
    /// Caller guarantees the assignment length and element range.
    pub fn eval(&mut self, assignment: &[Elem]) -> Elem {
        let g = &*self.poly.group;
        for (i, node) in self.poly.nodes.iter().enumerate() {
            self.values[i] = match *node {
                Node::Const(c) => c,
                Node::Var(v) => assignment[v as usize],
                Node::Mul(a, b) => g.mul(self.values[a.index()], self.values[b.index()]),
                Node::Inv(a) => g.inv(self.values[a.index()]),
            };
        }
        self.values[self.poly.root.index()]
    }
}

/// `q̃ᵏ(z, x₁, …, x_k)` with variables ordered `(z, x₁, …, x_k)`.
pub fn build_qstar(group: Arc<FiniteGroup>, omega: usize, k: usize) -> GroupPolynomial {
    let mut b = PolyBuilder::new(group);
    let z = b.var(0);
    let xs: Vec<NodeId> = (1..=k).map(|i| b.var(i)).collect();
    let root = b.qstar(z, &xs, omega);
    b.finish(root, k + 1)
}

/// `qᵏ(z, x₁, …, x_k, w)` with variables ordered `(z, x₁, …, x_k, w)`.
pub fn build_q(group: Arc<FiniteGroup>, omega: usize, k: usize) -> GroupPolynomial {
    let mut b = PolyBuilder::new(group);
    let z = b.var(0);
    let xs: Vec<NodeId> = (1..=k).map(|i| b.var(i)).collect();
    let w = b.var(k + 1);
    let root = b.q(z, &xs, w, omega);
    b.finish(root, k + 2)
}

/// `D(x, y₁, y₂, y₃)` with variables ordered `(x, y₁, y₂, y₃)`.
pub fn build_d(group: Arc<FiniteGroup>, omega: usize) -> GroupPolynomial {
    let mut b = PolyBuilder::new(group);
    let x = b.var(0);
    let ys = [b.var(1), b.var(2), b.var(3)];
    let root = b.d(x, ys, omega);
    b.finish(root, 4)
}

/// Length after one ω-fold commutator level: `L ↦ 2^ω(L + 2) − 2` when
/// the commuting letter has length one. General form with a commuting
/// word of length `x`: `2^ω·L + (2^ω − 1)·2x`.
pub fn iter_comm_length(l: &BigUint, x: &BigUint, omega: usize) -> BigUint {
    let p = BigUint::one() << omega;
    &p * l + (&p - 1u32) * x * 2u32
}

/// `log₂` of a big integer, accurate to double precision.
pub fn log2_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits") as f64).log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("fits") as f64;
    top.log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s3() -> Arc<FiniteGroup> {
        Arc::new(builtin("S3").unwrap())
    }

    /// A random DAG over `vars` variables, every variable used.
    fn random_poly(g: &Arc<FiniteGroup>, vars: usize, extra: usize, rng: &mut impl Rng) -> GroupPolynomial {
        let mut b = PolyBuilder::new(g.clone());
        let mut ids: Vec<NodeId> = (0..vars).map(|v| b.var(v)).collect();
        ids.push(b.constant(Elem(rng.gen_range(0..g.order() as u32))));
        for _ in 0..extra {
            let x = ids[rng.gen_range(0..ids.len())];
            let id = if rng.gen_bool(0.3) {
                b.inv(x)
            } else {
                let y = ids[rng.gen_range(0..ids.len())];
                b.mul(x, y)
            };
            ids.push(id);
        }
        let root = ids.iter().fold(ids[ids.len() - 1], |acc, &x| b.mul(acc, x));
        b.finish(root, vars)
    }

    fn all_assignments(n: usize, arity: usize) -> impl Iterator<Item = Vec<Elem>> {
        let total = crate::search::space_size(n, arity).unwrap();
        (0..total).map(move |i| crate::search::decode(i, n, arity))
    }

    #[test]
    fn variable_and_trivial_commutator() {
        let g = s3();
        let v = GroupPolynomial::variable(g.clone());
        for x in g.elements() {
            assert_eq!(v.evaluate(&[x]).unwrap(), x);
        }
        let q1 = build_qstar(g.clone(), 2, 1);
        for z in g.elements() {
            assert_eq!(q1.evaluate(&[z, g.identity()]).unwrap(), g.identity());
        }
        assert!(matches!(v.evaluate(&[]), Err(PolyError::ArityMismatch { expected: 1, got: 0 })));
        assert!(matches!(v.evaluate(&[Elem(6)]), Err(PolyError::ElementOutOfRange(6))));
    }

    #[test]
    fn d_with_trivial_ys_is_x() {
        let g = s3();
        let d = build_d(g.clone(), 2);
        let e = g.identity();
        for x in g.elements() {
            assert_eq!(d.evaluate(&[x, e, e, e]).unwrap(), x);
        }
    }

    #[test]
    fn flat_lengths_by_hand() {
        let g = s3();
        assert_eq!(GroupPolynomial::variable(g.clone()).flat_length(), BigUint::from(1u32));
        // z⁻¹x⁻¹zx
        assert_eq!(build_qstar(g.clone(), 1, 1).flat_length(), BigUint::from(4u32));
        // [[z,x],x] = [z,x]⁻¹ x⁻¹ [z,x] x
        assert_eq!(build_qstar(g.clone(), 2, 1).flat_length(), BigUint::from(10u32));
        let w = build_qstar(g.clone(), 1, 1).flatten(10).unwrap();
        let expect = [
            Letter::Var { id: 0, inverse: true },
            Letter::Var { id: 1, inverse: true },
            Letter::Var { id: 0, inverse: false },
            Letter::Var { id: 1, inverse: false },
        ];
        assert_eq!(w.letters, expect);
    }

    #[test]
    fn closed_form_length() {
        // L₀ = 1 and L ↦ 2^ω(L + 2) − 2 give L_k = 3·2^{ωk} − 2
        let g = s3();
        for omega in 1..=4 {
            let mut prev_nodes = 0;
            let mut first_step = None;
            for k in 0..=6 {
                let p = build_qstar(g.clone(), omega, k);
                let closed = BigUint::from(3u32) * (BigUint::one() << (omega * k)) - 2u32;
                assert_eq!(p.flat_length(), closed, "ω={omega} k={k}");
                let mut rec = BigUint::one();
                for _ in 0..k {
                    rec = iter_comm_length(&rec, &BigUint::one(), omega);
                }
                assert_eq!(rec, closed);
                // each level adds the same number of nodes
                if k >= 1 {
                    let step = p.node_count() - prev_nodes;
                    match first_step {
                        None => first_step = Some(step),
                        Some(s) => assert_eq!(step, s, "ω={omega} k={k}"),
                    }
                }
                prev_nodes = p.node_count();
            }
        }
    }

    #[test]
    fn identity_substitution_is_noop() {
        let g = s3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_poly(&g, 2, 12, &mut rng);
            let map: BTreeMap<usize, GroupPolynomial> = (0..2)
                .map(|i| {
                    let mut b = PolyBuilder::new(g.clone());
                    let v = b.var(i);
                    (i, b.finish(v, i + 1))
                })
                .collect();
            let q = p.substitute(&map).unwrap();
            assert_eq!(q.var_arity(), 2);
            for a in all_assignments(6, 2) {
                assert_eq!(p.evaluate(&a).unwrap(), q.evaluate(&a).unwrap());
            }
        }
    }

    #[test]
    fn q_with_repeated_last_variable() {
        // q^{k+1}(z, x⃗, w, w) = q^k(z, x⃗, w) pointwise, for the group's ω
        // and its multiples
        let g = s3();
        let omega = crate::structure::compute_omega(&g).unwrap().omega;
        for omega in [omega, 2 * omega] {
            for k in 0..=1 {
                let big = build_q(g.clone(), omega, k + 1);
                let small = build_q(g.clone(), omega, k);
                let mut b = PolyBuilder::new(g.clone());
                let w = b.var(k + 1);
                let map = BTreeMap::from([(k + 2, b.finish(w, k + 2))]);
                let merged = big.substitute(&map).unwrap();
                assert_eq!(merged.var_arity(), k + 2);
                for a in all_assignments(6, k + 2) {
                    assert_eq!(merged.evaluate(&a).unwrap(), small.evaluate(&a).unwrap());
                }
            }
        }
    }

    #[test]
    fn chained_substitution_is_composition() {
        let g = s3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_poly(&g, 2, 8, &mut rng);
            let m1: BTreeMap<_, _> = (0..2).map(|i| (i, random_poly(&g, 2, 6, &mut rng))).collect();
            let m2: BTreeMap<_, _> = (0..2).map(|i| (i, random_poly(&g, 2, 6, &mut rng))).collect();
            let chained = p.substitute(&m1).unwrap().substitute(&m2).unwrap();
            let composed: BTreeMap<_, _> =
                m1.iter().map(|(&i, q)| (i, q.substitute(&m2).unwrap())).collect();
            let direct = p.substitute(&composed).unwrap();
            for _ in 0..20 {
                let a: Vec<Elem> = (0..2).map(|_| Elem(rng.gen_range(0..6))).collect();
                let inner: Vec<Elem> = (0..2).map(|i| m2[&i].evaluate(&a).unwrap()).collect();
                let mid: Vec<Elem> = (0..2).map(|i| m1[&i].evaluate(&inner).unwrap()).collect();
                let want = p.evaluate(&mid).unwrap();
                assert_eq!(chained.evaluate(&a).unwrap(), want);
                assert_eq!(direct.evaluate(&a).unwrap(), want);
            }
        }
    }

    #[test]
    fn substitution_needs_same_group() {
        let p = GroupPolynomial::variable(s3());
        let other = GroupPolynomial::variable(Arc::new(builtin("C3").unwrap()));
        let map = BTreeMap::from([(0, other)]);
        assert_eq!(p.substitute(&map).unwrap_err(), PolyError::GroupMismatch);
    }

    #[test]
    fn flatten_agrees_with_dag() {
        let g = s3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_poly(&g, 3, 10, &mut rng);
            let w = p.flatten(1_000_000).unwrap();
            assert_eq!(BigUint::from(w.len()), p.flat_length());
            for a in all_assignments(6, 3) {
                assert_eq!(w.evaluate(&g, &a), p.evaluate(&a).unwrap());
            }
        }
    }

    #[test]
    fn flatten_cap() {
        let p = build_qstar(s3(), 4, 3);
        assert!(matches!(p.flatten(100), Err(PolyError::CapExceeded { .. })));
        let huge = build_qstar(s3(), 6, 20);
        assert_eq!(huge.flat_length_u64(), Err(PolyError::IntegerOverflow));
        assert!((log2_big(&huge.flat_length()) - (120.0 + 3f64.log2())).abs() < 1e-9);
    }

    #[test]
    fn slp_parse_errors() {
        let g = s3();
        for bad in [
            "",
            "t0 = VAR x0\n",
            "t0 = VAR x0\nROOT t1\n",
            "t1 = VAR x0\nROOT t1\n",
            "t0 = VAR x0\nt1 = MUL t0 t1\nROOT t1\n",
            "t0 = NOPE\nROOT t0\n",
        ] {
            assert!(
                matches!(GroupPolynomial::from_slp(bad, g.clone(), None), Err(PolyError::Parse { .. })),
                "{bad:?}"
            );
        }
        assert_eq!(
            GroupPolynomial::from_slp("t0 = CONST g9\nROOT t0\n", g.clone(), None),
            Err(PolyError::ElementOutOfRange(9))
        );
        let ok = "t0 = VAR x1\nROOT t0\n";
        assert_eq!(GroupPolynomial::from_slp(ok, g.clone(), None).unwrap().var_arity(), 2);
        assert!(GroupPolynomial::from_slp(ok, g, Some(1)).is_err());
    }

    proptest! {
        #[test]
        fn slp_round_trip(seed in any::<u64>(), vars in 1usize..4, extra in 0usize..30) {
            let g = s3();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_poly(&g, vars, extra, &mut rng);
            let text = p.to_slp();
            let q = GroupPolynomial::from_slp(&text, g, Some(vars)).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(q.to_slp(), text);
        }
    }
}
