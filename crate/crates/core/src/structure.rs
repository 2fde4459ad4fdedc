//! Subgroup-level structure: closures, commutator subgroups, the lower
//! central series, the stabilization exponent ω, the Fitting subgroup,
//! the upper Fitting series, and the normal-subgroup lattice.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

use crate::group::{Elem, FiniteGroup, GroupError};

/// Default cap on the number of normal subgroups enumerated.
pub const DEFAULT_LATTICE_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("subset is not a normal subgroup")]
    NotNormal,
    #[error("group is not solvable: the upper Fitting series stalls at order {stalled_at}")]
    NotSolvable { stalled_at: usize },
    #[error("the Baer set is not a nilpotent normal subgroup")]
    BaerSetNotSubgroup,
    #[error("normal-subgroup lattice exceeds the cap of {0}")]
    LatticeCapExceeded(usize),
    #[error("K0 is not contained in K")]
    NotNested,
    #[error("stabilization exponent failed re-verification: {0}")]
    OmegaVerification(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A subset of a group's elements as a bit set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElemSet {
    bits: Vec<u64>,
    universe: usize,
}

impl ElemSet {
    pub fn empty(universe: usize) -> Self {
        ElemSet { bits: vec![0; universe.div_ceil(64)], universe }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(Elem(i as u32));
        }
        s
    }

    pub fn from_elems(universe: usize, elems: impl IntoIterator<Item = Elem>) -> Self {
        let mut s = Self::empty(universe);
        for e in elems {
            s.insert(e);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, e: Elem) -> bool {
        let i = e.index();
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns true if the element was not present before.
    #[inline]
    pub fn insert(&mut self, e: Elem) -> bool {
        let i = e.index();
        let was = self.contains(e);
        self.bits[i / 64] |= 1 << (i % 64);
        !was
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(Elem(wi as u32 * 64 + b))
            })
        })
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &ElemSet) -> ElemSet {
        ElemSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect(),
            universe: self.universe,
        }
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        ElemSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
            universe: self.universe,
        }
    }

    /// Complement-wise difference `self ∖ other`.
    pub fn difference(&self, other: &ElemSet) -> ElemSet {
        ElemSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect(),
            universe: self.universe,
        }
    }

    pub fn first(&self) -> Option<Elem> {
        self.iter().next()
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter().map(Elem::index).collect()
    }

    /// Is this set a subgroup of `g` (nonempty, closed under products and
    /// inverses)?
    pub fn is_subgroup_of(&self, g: &FiniteGroup) -> bool {
        if !self.contains(g.identity()) {
            return false;
        }
        let elems: Vec<Elem> = self.iter().collect();
        elems.iter().all(|&x| {
            self.contains(g.inv(x)) && elems.iter().all(|&y| self.contains(g.mul(x, y)))
        })
    }

    pub fn is_normal_in(&self, g: &FiniteGroup) -> bool {
        self.is_subgroup_of(g)
            && self.iter().all(|x| g.elements().all(|y| self.contains(g.conj(x, y))))
    }
}

/// Orders by size, then lexicographically by the sorted element list.
impl Ord for ElemSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for ElemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}

impl Serialize for ElemSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|e| e.0))
    }
}

/// A subset known to be a normal subgroup of its group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NormalSubgroup(ElemSet);

impl NormalSubgroup {
    pub fn new(g: &FiniteGroup, set: ElemSet) -> Result<Self, StructureError> {
        if set.universe() == g.order() && set.is_normal_in(g) {
            Ok(NormalSubgroup(set))
        } else {
            Err(StructureError::NotNormal)
        }
    }

    pub fn trivial(g: &FiniteGroup) -> Self {
        NormalSubgroup(ElemSet::from_elems(g.order(), [g.identity()]))
    }

    pub fn whole(g: &FiniteGroup) -> Self {
        NormalSubgroup(ElemSet::full(g.order()))
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn set(&self) -> &ElemSet {
        &self.0
    }

    pub fn into_set(self) -> ElemSet {
        self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.len() == 1
    }
}

impl Deref for NormalSubgroup {
    type Target = ElemSet;
    fn deref(&self) -> &ElemSet {
        &self.0
    }
}

impl fmt::Debug for NormalSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Normal{:?}", self.0)
    }
}

/// Smallest subgroup containing `gens` (and the identity).
pub fn subgroup_closure(g: &FiniteGroup, gens: &ElemSet) -> ElemSet {
    let gens: Vec<Elem> = gens.iter().filter(|&x| x != g.identity()).collect();
    let mut set = ElemSet::from_elems(g.order(), [g.identity()]);
    let mut queue = VecDeque::from([g.identity()]);
    while let Some(x) = queue.pop_front() {
        for &s in &gens {
            let y = g.mul(x, s);
            if set.insert(y) {
                queue.push_back(y);
            }
        }
    }
    set
}

/// Smallest normal subgroup containing `x`.
pub fn normal_closure(g: &FiniteGroup, x: &ElemSet) -> NormalSubgroup {
    let mut conjugates = ElemSet::empty(g.order());
    for a in x.iter() {
        for y in g.elements() {
            conjugates.insert(g.conj(a, y));
        }
    }
    NormalSubgroup(subgroup_closure(g, &conjugates))
}

/// `⟨[a, b] : a ∈ A, b ∈ B⟩` for arbitrary subsets.
pub fn commutator_of_sets(g: &FiniteGroup, a: &ElemSet, b: &ElemSet) -> ElemSet {
    let bs: Vec<Elem> = b.iter().collect();
    let mut gens = ElemSet::empty(g.order());
    for x in a.iter() {
        for &y in &bs {
            gens.insert(g.comm(x, y));
        }
    }
    subgroup_closure(g, &gens)
}

/// `[A, B, …, B]` with `k` copies of `B`. The result is checked to be
/// normal.
pub fn commutator_subgroup(
    g: &FiniteGroup,
    a: &NormalSubgroup,
    b: &NormalSubgroup,
    k: usize,
) -> Result<NormalSubgroup, StructureError> {
    let mut acc = a.set().clone();
    for _ in 0..k {
        acc = commutator_of_sets(g, &acc, b);
    }
    NormalSubgroup::new(g, acc)
}

/// Product set `AB`; a subgroup when one factor is normal.
pub fn product(g: &FiniteGroup, a: &ElemSet, b: &ElemSet) -> ElemSet {
    let bs: Vec<Elem> = b.iter().collect();
    let mut out = ElemSet::empty(g.order());
    for x in a.iter() {
        for &y in &bs {
            out.insert(g.mul(x, y));
        }
    }
    out
}

/// Preimage of `set` (in the quotient) under a projection map.
pub fn preimage(proj: &[Elem], set: &ElemSet) -> ElemSet {
    ElemSet::from_elems(
        proj.len(),
        proj.iter().enumerate().filter(|(_, q)| set.contains(**q)).map(|(i, _)| Elem(i as u32)),
    )
}

/// Image of a subset of `G` under a projection into a group of order `n`.
pub fn image(proj: &[Elem], n: usize, set: &ElemSet) -> ElemSet {
    ElemSet::from_elems(n, set.iter().map(|x| proj[x.index()]))
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerCentralSeries {
    /// γ₀ = G ⊇ γ₁ ⊇ … up to and including the first repeated term.
    pub terms: Vec<NormalSubgroup>,
    /// First `i` with γᵢ = γᵢ₊₁.
    pub residual_index: usize,
}

impl LowerCentralSeries {
    pub fn nilpotent_residual(&self) -> &NormalSubgroup {
        &self.terms[self.residual_index]
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotent_residual().is_trivial()
    }

    /// γᵢ for any `i`, staying at the residual once the series is stable.
    pub fn term(&self, i: usize) -> &NormalSubgroup {
        &self.terms[i.min(self.residual_index)]
    }
}

pub fn lower_central_series(g: &FiniteGroup) -> LowerCentralSeries {
    let whole = ElemSet::full(g.order());
    let terms = lower_central_series_of(g, &whole);
    let residual_index = terms.len() - 1;
    LowerCentralSeries { terms: terms.into_iter().map(NormalSubgroup).collect(), residual_index }
}

/// Lower central series of a subgroup `h` (γ₀ = h, γᵢ₊₁ = [γᵢ, h]), until
/// it repeats. The last entry is the nilpotent residual of `h`.
pub fn lower_central_series_of(g: &FiniteGroup, h: &ElemSet) -> Vec<ElemSet> {
    let mut terms = vec![h.clone()];
    loop {
        let next = commutator_of_sets(g, terms.last().expect("nonempty"), h);
        if &next == terms.last().expect("nonempty") {
            return terms;
        }
        terms.push(next);
    }
}

pub fn is_nilpotent_subgroup(g: &FiniteGroup, h: &ElemSet) -> bool {
    lower_central_series_of(g, h).last().expect("nonempty").len() == 1
}

/// The stabilization exponent ω together with the data that determines it.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaData {
    pub omega: usize,
    /// Largest preperiod of `i ↦ [x, i y]` over all pairs.
    pub max_preperiod: usize,
    /// Least common multiple of the eventual periods over all pairs.
    pub period_lcm: usize,
    /// Stabilization index of the chains `[M, k N]` over normal pairs.
    pub k0: usize,
    /// Per-pair preperiods, indexed `x·|G| + y`.
    #[serde(skip)]
    pub preperiods: Vec<u32>,
    /// Per-pair periods, indexed `x·|G| + y`.
    #[serde(skip)]
    pub periods: Vec<u32>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Computes the least ω ≥ 1 that is at least every preperiod, a multiple
/// of every period, and at least the subgroup-chain stabilization index.
pub fn compute_omega(g: &FiniteGroup) -> Result<OmegaData, StructureError> {
    let lattice = all_normal_subgroups(g, DEFAULT_LATTICE_CAP)?;
    compute_omega_with_lattice(g, &lattice)
}

pub fn compute_omega_with_lattice(
    g: &FiniteGroup,
    lattice: &[NormalSubgroup],
) -> Result<OmegaData, StructureError> {
    let n = g.order();
    let mut preperiods = vec![0u32; n * n];
    let mut periods = vec![0u32; n * n];
    let mut first_seen = vec![u32::MAX; n];
    let mut touched = Vec::with_capacity(n);
    let (mut max_pre, mut lcm) = (0usize, 1usize);
    for x in g.elements() {
        for y in g.elements() {
            let mut s = x;
            let mut i = 0u32;
            while first_seen[s.index()] == u32::MAX {
                first_seen[s.index()] = i;
                touched.push(s.index());
                s = g.comm(s, y);
                i += 1;
            }
            let pre = first_seen[s.index()];
            let period = i - pre;
            let idx = x.index() * n + y.index();
            preperiods[idx] = pre;
            periods[idx] = period;
            max_pre = max_pre.max(pre as usize);
            lcm = lcm / gcd(lcm, period as usize) * period as usize;
            for t in touched.drain(..) {
                first_seen[t] = u32::MAX;
            }
        }
    }
    let mut k0 = 0;
    for m in lattice {
        for nn in lattice {
            let mut prev = m.set().clone();
            let mut k = 0;
            loop {
                let next = commutator_of_sets(g, &prev, nn);
                if next == prev {
                    break;
                }
                prev = next;
                k += 1;
            }
            k0 = k0.max(k);
        }
    }
    let floor = max_pre.max(k0).max(1);
    let omega = floor.div_ceil(lcm) * lcm;
    let data = OmegaData { omega, max_preperiod: max_pre, period_lcm: lcm, k0, preperiods, periods };
    verify_omega(g, lattice, omega)?;
    Ok(data)
}

/// Checks `[x, ω y] = [x, 2ω y]` for all pairs and `[M, ω N] = [M, ω+1 N]`
/// for all normal pairs.
pub fn verify_omega(
    g: &FiniteGroup,
    lattice: &[NormalSubgroup],
    omega: usize,
) -> Result<(), StructureError> {
    for x in g.elements() {
        for y in g.elements() {
            let a = g.iter_comm(x, y, omega);
            if a != g.iter_comm(a, y, omega) {
                return Err(StructureError::OmegaVerification(format!(
                    "element pair ({}, {})",
                    x.0, y.0
                )));
            }
        }
    }
    for m in lattice {
        for nn in lattice {
            let mut s = m.set().clone();
            for _ in 0..omega {
                s = commutator_of_sets(g, &s, nn);
            }
            if commutator_of_sets(g, &s, nn) != s {
                return Err(StructureError::OmegaVerification("subgroup chain".into()));
            }
        }
    }
    Ok(())
}

/// Fitting subgroup by Baer's formula `{g : [h, ω g] = 1 for all h}`,
/// checked to be a nilpotent normal subgroup.
pub fn fitting_subgroup(
    g: &FiniteGroup,
    omega: &OmegaData,
) -> Result<NormalSubgroup, StructureError> {
    let w = omega.omega;
    let set = ElemSet::from_elems(
        g.order(),
        g.elements().filter(|&x| g.elements().all(|h| g.iter_comm(h, x, w) == g.identity())),
    );
    if !set.is_normal_in(g) || !is_nilpotent_subgroup(g, &set) {
        return Err(StructureError::BaerSetNotSubgroup);
    }
    Ok(NormalSubgroup(set))
}

#[derive(Clone, Debug, Serialize)]
pub struct FittingSeries {
    /// U₀ = 1 < U₁ < … < U_d = G.
    pub terms: Vec<NormalSubgroup>,
    pub fitting_length: usize,
}

impl FittingSeries {
    pub fn term(&self, i: usize) -> &NormalSubgroup {
        &self.terms[i.min(self.fitting_length)]
    }

    /// Least `i` with `set ⊆ Uᵢ`.
    pub fn level_of(&self, set: &ElemSet) -> usize {
        self.terms.iter().position(|u| set.is_subset(u)).expect("U_d is the whole group")
    }
}

/// Upper Fitting series: Uᵢ₊₁ is the preimage of Fit(G/Uᵢ), each quotient
/// analysed with its own ω.
pub fn upper_fitting_series(g: &FiniteGroup) -> Result<FittingSeries, StructureError> {
    let mut terms = vec![NormalSubgroup::trivial(g)];
    loop {
        let current = terms.last().expect("nonempty");
        if current.order() == g.order() {
            break;
        }
        let (q, proj) = g.quotient(current)?;
        let omega = compute_omega(&q)?;
        let fit = fitting_subgroup(&q, &omega)?;
        let next = preimage(&proj, &fit);
        if next.len() == current.order() {
            return Err(StructureError::NotSolvable { stalled_at: current.order() });
        }
        terms.push(NormalSubgroup::new(g, next)?);
    }
    let fitting_length = terms.len() - 1;
    Ok(FittingSeries { terms, fitting_length })
}

/// Fitting length of a subgroup, computed intrinsically.
pub fn fitting_length_of(g: &FiniteGroup, h: &ElemSet) -> Result<usize, StructureError> {
    let (sub, _) = g.subgroup(h)?;
    Ok(upper_fitting_series(&sub)?.fitting_length)
}

/// The full normal-subgroup lattice, as the join closure of the normal
/// closures of single elements, sorted by order and then lexicographically.
pub fn all_normal_subgroups(
    g: &FiniteGroup,
    cap: usize,
) -> Result<Vec<NormalSubgroup>, StructureError> {
    let mut found: Vec<ElemSet> = Vec::new();
    let mut seen: HashSet<ElemSet> = HashSet::new();
    for x in g.elements() {
        let c = normal_closure(g, &ElemSet::from_elems(g.order(), [x])).into_set();
        if seen.insert(c.clone()) {
            found.push(c);
        }
    }
    let cyclic = found.clone();
    let mut head = 0;
    while head < found.len() {
        let cur = found[head].clone();
        for c in &cyclic {
            if c.is_subset(&cur) {
                continue;
            }
            let joined = product(g, &cur, c);
            if seen.insert(joined.clone()) {
                if found.len() >= cap {
                    return Err(StructureError::LatticeCapExceeded(cap));
                }
                found.push(joined);
            }
        }
        head += 1;
    }
    found.sort();
    Ok(found.into_iter().map(NormalSubgroup).collect())
}

/// The Fitting subgroup as the join of every nilpotent normal subgroup in
/// the lattice. Independent of ω; used to cross-check Baer's formula.
pub fn fitting_by_lattice(g: &FiniteGroup, lattice: &[NormalSubgroup]) -> ElemSet {
    lattice
        .iter()
        .filter(|nn| is_nilpotent_subgroup(g, nn))
        .fold(ElemSet::from_elems(g.order(), [g.identity()]), |acc, nn| product(g, &acc, nn))
}

/// `{g : [x, g] ∈ K₀ for all x ∈ K}`.
pub fn centralizer_mod(
    g: &FiniteGroup,
    k: &NormalSubgroup,
    k0: &NormalSubgroup,
) -> Result<NormalSubgroup, StructureError> {
    if !k0.is_subset(k) {
        return Err(StructureError::NotNested);
    }
    let ks: Vec<Elem> = k.iter().collect();
    let set = ElemSet::from_elems(
        g.order(),
        g.elements().filter(|&y| ks.iter().all(|&x| k0.contains(g.comm(x, y)))),
    );
    NormalSubgroup::new(g, set)
}

/// Centralizer `C_G(N) = {g : [g, h] = 1 for all h ∈ N}`.
pub fn centralizer(g: &FiniteGroup, n: &ElemSet) -> ElemSet {
    let ns: Vec<Elem> = n.iter().collect();
    ElemSet::from_elems(
        g.order(),
        g.elements().filter(|&y| ns.iter().all(|&x| g.comm(y, x) == g.identity())),
    )
}

/// Convenience bundle of the structural data of one group.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub lattice: Vec<NormalSubgroup>,
    pub lower_central: LowerCentralSeries,
    pub omega: OmegaData,
    pub fitting: Result<FittingSeries, StructureError>,
}

pub fn analyze(g: &FiniteGroup) -> Result<Analysis, StructureError> {
    let lattice = all_normal_subgroups(g, DEFAULT_LATTICE_CAP)?;
    let omega = compute_omega_with_lattice(g, &lattice)?;
    Ok(Analysis {
        lower_central: lower_central_series(g),
        fitting: upper_fitting_series(g),
        lattice,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn find(g: &FiniteGroup, label: &str) -> Elem {
        g.elements().find(|&e| g.label(e) == label).unwrap()
    }

    fn set(g: &FiniteGroup, labels: &[&str]) -> ElemSet {
        ElemSet::from_elems(g.order(), labels.iter().map(|l| find(g, l)))
    }

    #[test]
    fn elemset_basics() {
        let mut s = ElemSet::empty(130);
        assert!(s.is_empty());
        assert!(s.insert(Elem(129)));
        assert!(!s.insert(Elem(129)));
        s.insert(Elem(3));
        assert_eq!(s.to_indices(), vec![3, 129]);
        assert_eq!(s.len(), 2);
        let t = ElemSet::from_elems(130, [Elem(3), Elem(5)]);
        assert_eq!(s.intersection(&t).to_indices(), vec![3]);
        assert_eq!(s.difference(&t).to_indices(), vec![129]);
        assert!(ElemSet::from_elems(130, [Elem(3)]).is_subset(&t));
        // order: size first, then sorted element list
        assert!(ElemSet::from_elems(130, [Elem(100)]) < t);
        assert!(ElemSet::from_elems(130, [Elem(0), Elem(7)]) < t);
    }

    #[test]
    fn closures() {
        let g = builtin("S4").unwrap();
        let id = ElemSet::from_elems(24, [g.identity()]);
        assert_eq!(subgroup_closure(&g, &id), id);
        assert_eq!(subgroup_closure(&g, &ElemSet::full(24)).len(), 24);
        let v4 = subgroup_closure(&g, &set(&g, &["(1 2)(3 4)", "(1 3)(2 4)"]));
        assert_eq!(v4.len(), 4);
        assert!(normal_closure(&g, &id).is_trivial());
        let a4 = normal_closure(&g, &set(&g, &["(1 2 3)"]));
        assert_eq!(a4.order(), 12);
    }

    #[test]
    fn s4_commutators_and_lattice() {
        let g = builtin("S4").unwrap();
        let lat = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        assert_eq!(lat.iter().map(|n| n.order()).collect::<Vec<_>>(), vec![1, 4, 12, 24]);
        let (v4, a4, s4) = (&lat[1], &lat[2], &lat[3]);
        assert_eq!(&commutator_subgroup(&g, s4, s4, 1).unwrap(), a4);
        assert_eq!(&commutator_subgroup(&g, a4, a4, 1).unwrap(), v4);
        assert!(commutator_subgroup(&g, a4, &lat[0], 1).unwrap().is_trivial());
        for a in &lat {
            for b in &lat {
                let ab = commutator_subgroup(&g, a, b, 1).unwrap();
                assert_eq!(ab, commutator_subgroup(&g, b, a, 1).unwrap());
                assert!(ab.is_subset(&a.intersection(b)));
            }
        }
        let lcs = lower_central_series(&g);
        assert_eq!(lcs.terms[1], *a4);
        assert_eq!(lcs.nilpotent_residual(), a4);
        assert!(!lcs.is_nilpotent());
    }

    #[test]
    fn prime_cyclic_lattice() {
        for p in ["C2", "C5", "C7"] {
            let g = builtin(p).unwrap();
            let lat = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
            assert_eq!(lat.len(), 2);
            assert!(lower_central_series(&g).is_nilpotent());
        }
    }

    #[test]
    fn lattice_is_complete_on_s3() {
        // brute force: every subset containing the identity
        let g = builtin("S3").unwrap();
        let lat = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let mut brute = Vec::new();
        for mask in 0u32..(1 << 6) {
            let s = ElemSet::from_elems(6, (0..6).filter(|i| mask >> i & 1 == 1).map(Elem));
            if s.is_normal_in(&g) {
                brute.push(s);
            }
        }
        brute.sort();
        assert_eq!(lat.into_iter().map(NormalSubgroup::into_set).collect::<Vec<_>>(), brute);
    }

    #[test]
    fn lattice_cap() {
        let g = builtin("C2xC2xC2").unwrap();
        assert_eq!(
            all_normal_subgroups(&g, 5).unwrap_err(),
            StructureError::LatticeCapExceeded(5)
        );
    }

    #[test]
    fn omega_abelian_is_one() {
        for name in ["C1", "C2", "C6", "C2xC2", "C3xC3"] {
            let g = builtin(name).unwrap();
            assert_eq!(compute_omega(&g).unwrap().omega, 1, "{name}");
        }
    }

    #[test]
    fn omega_s4_fixture() {
        let g = builtin("S4").unwrap();
        let w = compute_omega(&g).unwrap();
        assert_eq!((w.max_preperiod, w.period_lcm, w.k0), (2, 6, 2));
        assert_eq!(w.omega, 6);
    }

    #[test]
    fn omega_s4_periodicity() {
        let g = builtin("S4").unwrap();
        let w = compute_omega(&g).unwrap().omega;
        for x in g.elements() {
            for y in g.elements() {
                for i in w..w + 8 {
                    assert_eq!(g.iter_comm(x, y, i), g.iter_comm(x, y, i + w));
                }
            }
        }
    }

    #[test]
    fn fitting_subgroups() {
        let g = builtin("S4").unwrap();
        let w = compute_omega(&g).unwrap();
        assert_eq!(fitting_subgroup(&g, &w).unwrap().order(), 4);
        let c = builtin("C2xC2xC2").unwrap();
        let w = compute_omega(&c).unwrap();
        assert_eq!(fitting_subgroup(&c, &w).unwrap().order(), 8);
    }

    #[test]
    fn fitting_series_s4() {
        let g = builtin("S4").unwrap();
        let f = upper_fitting_series(&g).unwrap();
        assert_eq!(f.fitting_length, 3);
        assert_eq!(f.terms.iter().map(|t| t.order()).collect::<Vec<_>>(), vec![1, 4, 12, 24]);
    }

    #[test]
    fn fitting_series_small_cases() {
        assert_eq!(upper_fitting_series(&builtin("C6").unwrap()).unwrap().fitting_length, 1);
        assert_eq!(upper_fitting_series(&builtin("D15").unwrap()).unwrap().fitting_length, 2);
        assert_eq!(upper_fitting_series(&builtin("C1").unwrap()).unwrap().fitting_length, 0);
        assert!(matches!(
            upper_fitting_series(&builtin("S5").unwrap()),
            Err(StructureError::NotSolvable { stalled_at: 1 })
        ));
    }

    #[test]
    fn centralizer_mod_cases() {
        let g = builtin("S4").unwrap();
        let lat = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let (one, v4, a4) = (&lat[0], &lat[1], &lat[2]);
        assert_eq!(centralizer_mod(&g, a4, a4).unwrap().order(), 24);
        assert_eq!(centralizer_mod(&g, one, one).unwrap().order(), 24);
        assert_eq!(&centralizer_mod(&g, a4, v4).unwrap(), a4);
        assert_eq!(centralizer_mod(&g, v4, a4).unwrap_err(), StructureError::NotNested);
    }
}
