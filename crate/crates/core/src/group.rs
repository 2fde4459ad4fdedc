//! Concrete finite groups given by full multiplication tables.
//!
//! Every group is stored as an `order × order` table over element indices.
//! Groups can be built from permutation generators (closure by breadth-first
//! search), from an explicit Cayley table, from the built-in catalog, or as
//! quotients and subgroups of other groups.
//!
//! Permutations compose left to right: `p · q` applies `p` first and then
//! `q`. In S₃ this gives `(1 2)·(1 3) = (1 2 3)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{ElemSet, NormalSubgroup};

/// Default cap on the size of a generator closure.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000;

/// Tables up to this order have associativity checked exhaustively.
pub const ASSOCIATIVITY_CHECK_LIMIT: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not associative: ({0}·{1})·{2} differs from {0}·({1}·{2})")]
    NonAssociativeTable(usize, usize, usize),
    #[error("multiplication table has no two-sided identity")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),
    #[error("generator closure exceeds the cap of {0} elements")]
    ClosureCapExceeded(usize),
    #[error("unknown built-in group `{0}`")]
    UnknownBuiltin(String),
    #[error("element index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("malformed permutation generators: {0}")]
    InvalidPermutation(String),
    #[error("subset is not a normal subgroup")]
    NotNormal,
    #[error("malformed group file: {0}")]
    MalformedFile(String),
}

/// An element of a [`FiniteGroup`], identified by its row in the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Elem {
    fn from(i: usize) -> Self {
        Elem(i as u32)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Permutation generators, each given as a list of disjoint cycles over
/// the points `1..=degree`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermSpec {
    pub degree: usize,
    pub generators: Vec<Vec<Vec<usize>>>,
}

/// How a group came into being. Used when re-exporting a group file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSource {
    Builtin(String),
    Permutations(PermSpec),
    Table,
    Quotient { parent_order: usize, kernel_order: usize },
    Subgroup { parent_order: usize },
}

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: Elem,
    labels: Option<Vec<String>>,
    name: Option<String>,
    source: GroupSource,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.identity == other.identity && self.mul == other.mul
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validates an explicit Cayley table.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let order = mul.len();
        if order == 0 {
            return Err(GroupError::MalformedTable("empty table".into()));
        }
        let mut flat = Vec::with_capacity(order * order);
        for (i, row) in mul.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::MalformedTable(format!(
                    "row {i} has {} entries, expected {order}",
                    row.len()
                )));
            }
            for &e in row {
                if e >= order {
                    return Err(GroupError::IndexOutOfRange { index: e, order });
                }
                flat.push(e as u32);
            }
        }
        Self::from_flat_table(order, flat, GroupSource::Table)
    }

    pub(crate) fn from_flat_table(
        order: usize,
        mul: Vec<u32>,
        source: GroupSource,
    ) -> Result<Self, GroupError> {
        let at = |x: usize, y: usize| mul[x * order + y] as usize;
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inv = vec![0u32; order];
        for x in 0..order {
            let y = (0..order)
                .find(|&y| at(x, y) == identity && at(y, x) == identity)
                .ok_or(GroupError::MissingInverse(x))?;
            inv[x] = y as u32;
        }
        if order <= ASSOCIATIVITY_CHECK_LIMIT {
            for x in 0..order {
                for y in 0..order {
                    let xy = at(x, y);
                    for z in 0..order {
                        if at(xy, z) != at(x, at(y, z)) {
                            return Err(GroupError::NonAssociativeTable(x, y, z));
                        }
                    }
                }
            }
        } else {
            // Identity and inverses make rows and columns permutations only
            // under associativity, so check the Latin property directly.
            let mut seen = vec![u32::MAX; order];
            for x in 0..order {
                for y in 0..order {
                    let v = at(x, y);
                    if seen[v] == x as u32 {
                        return Err(GroupError::MalformedTable(format!("row {x} repeats {v}")));
                    }
                    seen[v] = x as u32;
                }
            }
        }
        Ok(FiniteGroup {
            order,
            mul,
            inv,
            identity: Elem(identity as u32),
            labels: None,
            name: None,
            source,
        })
    }

    /// Closes the generators under composition. The identity gets index 0
    /// and the remaining elements are numbered in breadth-first discovery
    /// order, trying generators in input order.
    pub fn from_permutations(spec: &PermSpec, cap: usize) -> Result<Self, GroupError> {
        let gens = spec.to_images()?;
        let identity: Vec<u16> = (0..spec.degree as u16).collect();
        let mut elems: Vec<Vec<u16>> = vec![identity.clone()];
        let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
        index.insert(identity, 0);
        let mut head = 0;
        while head < elems.len() {
            for gen in &gens {
                let next = compose(&elems[head], gen);
                if !index.contains_key(&next) {
                    if elems.len() >= cap {
                        return Err(GroupError::ClosureCapExceeded(cap));
                    }
                    index.insert(next.clone(), elems.len() as u32);
                    elems.push(next);
                }
            }
            head += 1;
        }
        let order = elems.len();
        let mut mul = Vec::with_capacity(order * order);
        for p in &elems {
            for q in &elems {
                mul.push(index[&compose(p, q)]);
            }
        }
        let mut inv = vec![0u32; order];
        for (i, p) in elems.iter().enumerate() {
            let mut pinv = vec![0u16; p.len()];
            for (a, &b) in p.iter().enumerate() {
                pinv[b as usize] = a as u16;
            }
            inv[i] = index[&pinv];
        }
        let labels = elems.iter().map(|p| cycle_notation(p)).collect();
        Ok(FiniteGroup {
            order,
            mul,
            inv,
            identity: Elem(0),
            labels: Some(labels),
            name: None,
            source: GroupSource::Permutations(spec.clone()),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn source(&self) -> &GroupSource {
        &self.source
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: Elem) -> String {
        match &self.labels {
            Some(l) => l[x.index()].clone(),
            None => x.to_string(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GroupError> {
        if labels.len() != self.order {
            return Err(GroupError::MalformedFile(format!(
                "{} labels for a group of order {}",
                labels.len(),
                self.order
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub(crate) fn with_source(mut self, source: GroupSource) -> Self {
        self.source = source;
        self
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order as u32).map(Elem)
    }

    pub fn check(&self, x: Elem) -> Result<Elem, GroupError> {
        if x.index() < self.order {
            Ok(x)
        } else {
            Err(GroupError::IndexOutOfRange { index: x.index(), order: self.order })
        }
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        Elem(self.mul[x.index() * self.order + y.index()])
    }

    #[inline]
    pub fn inv(&self, x: Elem) -> Elem {
        Elem(self.inv[x.index()])
    }

    /// Checked multiplication.
    pub fn multiply(&self, x: Elem, y: Elem) -> Result<Elem, GroupError> {
        Ok(self.mul(self.check(x)?, self.check(y)?))
    }

    /// Checked inversion.
    pub fn invert(&self, x: Elem) -> Result<Elem, GroupError> {
        Ok(self.inv(self.check(x)?))
    }

    /// `[x, y] = x⁻¹y⁻¹xy`
    #[inline]
    pub fn comm(&self, x: Elem, y: Elem) -> Elem {
        let a = self.mul(self.inv(x), self.inv(y));
        self.mul(self.mul(a, x), y)
    }

    /// `[x, y, …, y]` with `k` copies of `y`.
    pub fn iter_comm(&self, x: Elem, y: Elem, k: usize) -> Elem {
        let mut acc = x;
        for _ in 0..k {
            acc = self.comm(acc, y);
        }
        acc
    }

    /// `x^y = y⁻¹xy`
    #[inline]
    pub fn conj(&self, x: Elem, y: Elem) -> Elem {
        self.mul(self.mul(self.inv(y), x), y)
    }

    pub fn pow(&self, x: Elem, k: usize) -> Elem {
        let mut acc = self.identity;
        for _ in 0..k {
            acc = self.mul(acc, x);
        }
        acc
    }

    pub fn element_order(&self, x: Elem) -> usize {
        let mut acc = x;
        let mut k = 1;
        while acc != self.identity {
            acc = self.mul(acc, x);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|x| self.elements().all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// The multiplication table as nested rows.
    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(|r| r.iter().map(|&e| e as usize).collect()).collect()
    }

    /// Builds `G/N` on cosets. Cosets are numbered by their smallest
    /// element index. Returns the quotient and the projection `x ↦ xN`.
    pub fn quotient(&self, n: &NormalSubgroup) -> Result<(FiniteGroup, Vec<Elem>), GroupError> {
        if !n.is_normal_in(self) {
            return Err(GroupError::NotNormal);
        }
        let members: Vec<Elem> = n.iter().collect();
        let mut proj = vec![u32::MAX; self.order];
        let mut reps = Vec::new();
        for x in self.elements() {
            if proj[x.index()] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            for &m in &members {
                proj[self.mul(x, m).index()] = c;
            }
            reps.push(x);
        }
        let q = reps.len();
        let mut mul = Vec::with_capacity(q * q);
        for &a in &reps {
            for &b in &reps {
                mul.push(proj[self.mul(a, b).index()]);
            }
        }
        let group = FiniteGroup::from_flat_table(
            q,
            mul,
            GroupSource::Quotient { parent_order: self.order, kernel_order: members.len() },
        )?;
        Ok((group, proj.into_iter().map(Elem).collect()))
    }

    /// Re-indexes a subgroup as a group of its own. Elements keep their
    /// relative index order; the returned vector embeds each new index into
    /// this group.
    pub fn subgroup(&self, set: &ElemSet) -> Result<(FiniteGroup, Vec<Elem>), GroupError> {
        let embed: Vec<Elem> = set.iter().collect();
        let mut local = vec![u32::MAX; self.order];
        for (i, e) in embed.iter().enumerate() {
            local[e.index()] = i as u32;
        }
        let n = embed.len();
        let mut mul = Vec::with_capacity(n * n);
        for &a in &embed {
            for &b in &embed {
                let v = local[self.mul(a, b).index()];
                if v == u32::MAX {
                    return Err(GroupError::MalformedTable("subset is not closed".into()));
                }
                mul.push(v);
            }
        }
        let mut group = FiniteGroup::from_flat_table(
            n,
            mul,
            GroupSource::Subgroup { parent_order: self.order },
        )?;
        if let Some(labels) = &self.labels {
            group.labels = Some(embed.iter().map(|e| labels[e.index()].clone()).collect());
        }
        Ok((group, embed))
    }

    /// Direct product `A × B`, indexing `(a, b)` as `a·|B| + b`.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let (na, nb) = (a.order, b.order);
        let n = na * nb;
        let mut mul = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let p = a.mul(Elem((x / nb) as u32), Elem((y / nb) as u32)).index();
                let q = b.mul(Elem((x % nb) as u32), Elem((y % nb) as u32)).index();
                mul.push((p * nb + q) as u32);
            }
        }
        let inv = (0..n)
            .map(|x| {
                let p = a.inv(Elem((x / nb) as u32)).index();
                let q = b.inv(Elem((x % nb) as u32)).index();
                (p * nb + q) as u32
            })
            .collect();
        let identity = Elem((a.identity.index() * nb + b.identity.index()) as u32);
        let labels = (0..n)
            .map(|x| {
                format!("({}, {})", a.label(Elem((x / nb) as u32)), b.label(Elem((x % nb) as u32)))
            })
            .collect();
        FiniteGroup {
            order: n,
            mul,
            inv,
            identity,
            labels: Some(labels),
            name: None,
            source: GroupSource::Table,
        }
    }

    /// Stable fingerprint of the multiplication table.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.order as u64).to_le_bytes());
        h.update(self.identity.0.to_le_bytes());
        for &v in &self.mul {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

impl PermSpec {
    /// Zero-based image arrays, one per generator.
    pub fn to_images(&self) -> Result<Vec<Vec<u16>>, GroupError> {
        if self.degree == 0 || self.degree > u16::MAX as usize {
            return Err(GroupError::InvalidPermutation(format!("degree {}", self.degree)));
        }
        let mut out = Vec::with_capacity(self.generators.len());
        for (gi, cycles) in self.generators.iter().enumerate() {
            let mut img: Vec<u16> = (0..self.degree as u16).collect();
            let mut used = vec![false; self.degree];
            for cycle in cycles {
                for &p in cycle {
                    if p == 0 || p > self.degree {
                        return Err(GroupError::InvalidPermutation(format!(
                            "generator {gi}: point {p} outside 1..={}",
                            self.degree
                        )));
                    }
                    if used[p - 1] {
                        return Err(GroupError::InvalidPermutation(format!(
                            "generator {gi}: point {p} appears twice"
                        )));
                    }
                    used[p - 1] = true;
                }
                for (i, &p) in cycle.iter().enumerate() {
                    let next = cycle[(i + 1) % cycle.len()];
                    img[p - 1] = (next - 1) as u16;
                }
            }
            out.push(img);
        }
        Ok(out)
    }
}

fn compose(p: &[u16], q: &[u16]) -> Vec<u16> {
    p.iter().map(|&i| q[i as usize]).collect()
}

/// Disjoint-cycle notation over points `1..=n`, `()` for the identity.
pub fn cycle_notation(p: &[u16]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] as usize == start {
            continue;
        }
        let mut cycle = vec![start + 1];
        seen[start] = true;
        let mut j = p[start] as usize;
        while j != start {
            seen[j] = true;
            cycle.push(j + 1);
            j = p[j] as usize;
        }
        out.push('(');
        out.push_str(&cycle.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

/// On-disk group description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation_generators: Option<PermSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cayley_table: Option<CayleyTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CayleyTable {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
}

/// What to build a group from.
#[derive(Clone, Debug)]
pub enum GroupInput {
    Builtin(String),
    Permutations(PermSpec),
    Table(Vec<Vec<usize>>),
}

/// Builds and validates a group from any supported description.
pub fn load_group(input: &GroupInput) -> Result<FiniteGroup, GroupError> {
    load_group_with_cap(input, DEFAULT_CLOSURE_CAP)
}

pub fn load_group_with_cap(input: &GroupInput, cap: usize) -> Result<FiniteGroup, GroupError> {
    match input {
        GroupInput::Builtin(name) => crate::catalog::builtin_with_cap(name, cap),
        GroupInput::Permutations(spec) => FiniteGroup::from_permutations(spec, cap),
        GroupInput::Table(t) => FiniteGroup::from_table(t.clone()),
    }
}

impl GroupFile {
    pub fn parse(json: &str) -> Result<Self, GroupError> {
        serde_json::from_str(json).map_err(|e| GroupError::MalformedFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group file serializes")
    }

    pub fn input(&self) -> Result<GroupInput, GroupError> {
        let given = [
            self.builtin.is_some(),
            self.permutation_generators.is_some(),
            self.cayley_table.is_some(),
        ];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(GroupError::MalformedFile(
                "exactly one of builtin, permutation_generators, cayley_table is required".into(),
            ));
        }
        if let Some(b) = &self.builtin {
            return Ok(GroupInput::Builtin(b.clone()));
        }
        if let Some(p) = &self.permutation_generators {
            return Ok(GroupInput::Permutations(p.clone()));
        }
        let t = self.cayley_table.as_ref().expect("checked above");
        if t.mul.len() != t.order {
            return Err(GroupError::MalformedTable(format!(
                "order {} but {} rows",
                t.order,
                t.mul.len()
            )));
        }
        Ok(GroupInput::Table(t.mul.clone()))
    }

    pub fn load(&self) -> Result<FiniteGroup, GroupError> {
        let mut g = load_group(&self.input()?)?;
        if let Some(labels) = &self.labels {
            g = g.with_labels(labels.clone())?;
        }
        if let Some(name) = &self.name {
            g = g.with_name(name.clone());
        }
        Ok(g)
    }

    /// Describes `g` so that loading the file rebuilds the same table.
    pub fn describe(g: &FiniteGroup) -> Self {
        let mut file = GroupFile { name: g.name.clone(), ..Default::default() };
        match &g.source {
            GroupSource::Builtin(b) => file.builtin = Some(b.clone()),
            GroupSource::Permutations(p) => file.permutation_generators = Some(p.clone()),
            _ => {
                file.cayley_table = Some(CayleyTable { order: g.order, mul: g.table() });
                file.labels = g.labels.clone();
            }
        }
        file
    }

    /// Always writes the explicit table, whatever the group's origin.
    pub fn describe_as_table(g: &FiniteGroup) -> Self {
        GroupFile {
            name: g.name.clone(),
            cayley_table: Some(CayleyTable { order: g.order, mul: g.table() }),
            labels: g.labels.clone(),
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn perm(g: &FiniteGroup, label: &str) -> Elem {
        g.elements().find(|&e| g.label(e) == label).unwrap()
    }

    #[test]
    fn c2_table() {
        let g = builtin("C2").unwrap();
        assert_eq!(g.table(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn s4_from_two_generators() {
        let spec = PermSpec { degree: 4, generators: vec![vec![vec![1, 2]], vec![vec![1, 2, 3, 4]]] };
        let g = FiniteGroup::from_permutations(&spec, DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(g.order(), 24);
        assert_eq!(g.identity(), Elem(0));
        assert_eq!(g.label(Elem(1)), "(1 2)");
        assert_eq!(g.label(Elem(2)), "(1 2 3 4)");
    }

    #[test]
    fn left_to_right_composition() {
        let g = builtin("S3").unwrap();
        let p = g.mul(perm(&g, "(1 2)"), perm(&g, "(1 3)"));
        assert_eq!(g.label(p), "(1 2 3)");
        assert_eq!(g.label(g.inv(perm(&g, "(1 2 3)"))), "(1 3 2)");
        let c = g.comm(perm(&g, "(1 2)"), perm(&g, "(1 2 3)"));
        assert_ne!(c, g.identity());
        assert_eq!(g.element_order(c), 3);
    }

    #[test]
    fn unit_and_inverse_laws() {
        let g = builtin("S4").unwrap();
        for x in g.elements() {
            assert_eq!(g.mul(g.identity(), x), x);
            assert_eq!(g.mul(x, g.inv(x)), g.identity());
            assert_eq!(g.inv(g.inv(x)), x);
            assert_eq!(g.inv(x), g.pow(x, g.element_order(x) - 1));
            assert_eq!(g.comm(x, g.identity()), g.identity());
            assert_eq!(g.comm(x, x), g.identity());
            assert_eq!(g.iter_comm(x, g.identity(), 3), g.identity());
            assert_eq!(g.iter_comm(x, g.identity(), 0), x);
        }
        assert_eq!(g.invert(g.identity()).unwrap(), g.identity());
    }

    #[test]
    fn out_of_range_index() {
        let g = builtin("S3").unwrap();
        assert_eq!(
            g.multiply(Elem(6), Elem(0)),
            Err(GroupError::IndexOutOfRange { index: 6, order: 6 })
        );
        assert!(g.invert(Elem(100)).is_err());
    }

    #[test]
    fn table_errors() {
        assert_eq!(
            FiniteGroup::from_table(vec![vec![0, 0], vec![0, 0]]).unwrap_err(),
            GroupError::NoIdentity
        );
        // identity 0, but 1·1 = 1 leaves 1 without an inverse
        assert_eq!(
            FiniteGroup::from_table(vec![vec![0, 1, 2], vec![1, 1, 2], vec![2, 2, 0]]).unwrap_err(),
            GroupError::MissingInverse(1)
        );
        // a Latin square loop of order 5 that is not a group
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::from_table(loop5).unwrap_err(),
            GroupError::NonAssociativeTable(..)
        ));
    }

    #[test]
    fn closure_cap() {
        let spec = PermSpec { degree: 5, generators: vec![vec![vec![1, 2]], vec![vec![1, 2, 3, 4, 5]]] };
        assert_eq!(
            FiniteGroup::from_permutations(&spec, 50).unwrap_err(),
            GroupError::ClosureCapExceeded(50)
        );
    }

    #[test]
    fn bad_cycles() {
        let spec = PermSpec { degree: 3, generators: vec![vec![vec![1, 4]]] };
        assert!(FiniteGroup::from_permutations(&spec, 100).is_err());
        let spec = PermSpec { degree: 3, generators: vec![vec![vec![1, 2], vec![2, 3]]] };
        assert!(FiniteGroup::from_permutations(&spec, 100).is_err());
    }

    #[test]
    fn quotient_edge_cases() {
        use crate::structure::{normal_closure, NormalSubgroup};
        let g = builtin("S4").unwrap();
        let (q, proj) = g.quotient(&NormalSubgroup::trivial(&g)).unwrap();
        assert_eq!(q.order(), 24);
        assert_eq!(proj.iter().map(|e| e.index()).collect::<Vec<_>>(), (0..24).collect::<Vec<_>>());
        let (q, _) = g.quotient(&NormalSubgroup::whole(&g)).unwrap();
        assert_eq!(q.order(), 1);
        let three_cycle = perm(&g, "(1 2 3)");
        let a4 = normal_closure(&g, &ElemSet::from_elems(g.order(), [three_cycle]));
        let (q, proj) = g.quotient(&a4).unwrap();
        assert_eq!(q.order(), 2);
        for x in g.elements() {
            for y in g.elements() {
                assert_eq!(proj[g.mul(x, y).index()], q.mul(proj[x.index()], proj[y.index()]));
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let spec = PermSpec { degree: 4, generators: vec![vec![vec![1, 2]], vec![vec![1, 2, 3, 4]]] };
        let file = GroupFile { permutation_generators: Some(spec), ..Default::default() };
        let g = file.load().unwrap();
        let again = GroupFile::parse(&GroupFile::describe(&g).to_json()).unwrap().load().unwrap();
        assert_eq!(g.table(), again.table());
        let table = GroupFile::parse(&GroupFile::describe_as_table(&g).to_json()).unwrap().load().unwrap();
        assert_eq!(g.table(), table.table());
        assert_eq!(table.labels(), g.labels());
    }

    #[test]
    fn file_requires_exactly_one_source() {
        let f = GroupFile::parse(r#"{"name": "x"}"#).unwrap();
        assert!(f.input().is_err());
        let f = GroupFile::parse(r#"{"builtin": "C2", "cayley_table": {"order": 1, "mul": [[0]]}}"#).unwrap();
        assert!(f.input().is_err());
        assert!(GroupFile::parse(r#"{"bogus": 1}"#).is_err());
    }
}
