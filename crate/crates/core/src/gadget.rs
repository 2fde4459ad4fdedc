//! Conjunction gadgets over groups of Fitting length at least three.
//!
//! [`GadgetContext::prepare`] restricts the input group to a term `G₀` of
//! its lower central series whose top Fitting quotient is abelian, then
//! picks the normal subgroups `K ⊳ K₀`, the centralizer `H` of `K/K₀`,
//! the constants `a ∈ K∖K₀`, `g ∈ G₀∖H` and a chain `h₁, …, h_d`.
//!
//! A gadget of level `α` maps inputs to the coset `h_α·U_{α−1}` when every
//! input lies outside `H` and into `U_{α−1}` otherwise (AND), or does the
//! same for a 3-CNF pattern of clauses (SAT). The contract is checked by
//! evaluation, never assumed.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Roots;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{Elem, FiniteGroup, GroupError};
use crate::poly::{iter_comm_length, log2_big, GroupPolynomial, NodeId, PolyBuilder, PolyError};
use crate::search;
use crate::structure::{
    all_normal_subgroups, centralizer_mod, commutator_of_sets, compute_omega,
    compute_omega_with_lattice, fitting_length_of, fitting_subgroup, image,
    lower_central_series, lower_central_series_of, normal_closure, product,
    upper_fitting_series, ElemSet, FittingSeries, NormalSubgroup, OmegaData, StructureError,
    DEFAULT_LATTICE_CAP,
};

/// Default limit on exhaustively checked assignments.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 1_000_000;
/// Default seed for sampled verification.
pub const DEFAULT_SEED: u64 = 0xF177;
/// Default number of sampled assignments per membership class.
pub const DEFAULT_TRIALS_PER_CLASS: usize = 1000;
/// Inputs up to this arity get one sampling class per membership pattern.
const FULL_PATTERN_ARITY: usize = 8;

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("Fitting length {d} is below 3, so no gadget context exists")]
    FittingLengthTooSmall { d: usize },
    #[error("no normal subgroup K with [K, G₀] = K and Fitting length d − 1")]
    NoCandidate,
    #[error("{count} maximal normal subgroups below K, expected exactly one")]
    NonUniqueMaximal { count: usize },
    #[error("the centralizer of K/K₀ is the whole group")]
    CentralizerIsWholeGroup,
    #[error("no element yields a nontrivial commutator at level {alpha}")]
    NoWitness { alpha: usize },
    #[error("level {alpha} is outside 1..={max}")]
    LevelOutOfRange { alpha: usize, max: usize },
    #[error("arity must be at least 1")]
    EmptyArity,
    #[error("{needed} assignments exceed the exhaustive budget of {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("context invariant violated: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn violation(msg: impl Into<String>) -> GadgetError {
    GadgetError::ContractViolation(msg.into())
}

/// `G₀ = γ_m(G)` together with its embedding into `G`.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub g0: FiniteGroup,
    /// `embedding[i]` is the element of `G` that `i ∈ G₀` stands for.
    pub embedding: Vec<Elem>,
    pub m_index: usize,
    pub fitting_length: usize,
}

/// Picks the deepest lower-central term not contained in `U_{d−1}(G)`.
pub fn restrict_to_g0(g: &FiniteGroup) -> Result<Restriction, GadgetError> {
    let series = upper_fitting_series(g)?;
    let d = series.fitting_length;
    if d < 3 {
        return Err(GadgetError::FittingLengthTooSmall { d });
    }
    let top = series.term(d - 1);
    let lcs = lower_central_series(g);
    let m_index = (0..=lcs.residual_index)
        .rev()
        .find(|&i| !lcs.term(i).is_subset(top))
        .expect("γ₀ = G is never inside U_{d−1}");
    let (sub, embedding) = g.subgroup(lcs.term(m_index))?;
    let name = match (g.name(), m_index) {
        (Some(n), 0) => n.to_string(),
        (Some(n), i) => format!("gamma_{i}({n})"),
        (None, i) => format!("gamma_{i}"),
    };
    let g0 = sub.with_name(name);
    let s0 = upper_fitting_series(&g0)?;
    if s0.fitting_length != d {
        return Err(violation(format!(
            "G₀ has Fitting length {} instead of {d}",
            s0.fitting_length
        )));
    }
    let derived = commutator_of_sets(&g0, &ElemSet::full(g0.order()), &ElemSet::full(g0.order()));
    if !derived.is_subset(s0.term(d - 1)) {
        return Err(violation("G₀/U_{d−1} is not abelian"));
    }
    Ok(Restriction { g0, embedding, m_index, fitting_length: d })
}

/// A polynomial whose image is `γ_j(G)`: one variable for `j = 0`, and the
/// `|G|`-fold product of commutators of fresh copies of the previous
/// witness with fresh variables otherwise. Variables are numbered depth
/// first, left to right.
pub fn inducibility_witness(g: Arc<FiniteGroup>, j: usize) -> GroupPolynomial {
    fn build(b: &mut PolyBuilder, n: usize, j: usize, next: &mut usize) -> NodeId {
        let fresh = |b: &mut PolyBuilder, next: &mut usize| {
            let v = b.var(*next);
            *next += 1;
            v
        };
        if j == 0 {
            return fresh(b, next);
        }
        let mut acc: Option<NodeId> = None;
        for _ in 0..n {
            let z = build(b, n, j - 1, next);
            let y = fresh(b, next);
            let c = b.comm(z, y);
            acc = Some(match acc {
                Some(p) => b.mul(p, c),
                None => c,
            });
        }
        acc.expect("group has an element")
    }
    let n = g.order();
    let mut b = PolyBuilder::new(g);
    let mut next = 0;
    let root = build(&mut b, n, j, &mut next);
    b.finish(root, next)
}

/// Image of [`inducibility_witness`] computed by set closure: start from
/// `G`, then repeatedly take products of `|G|` commutators `[z, y]`.
pub fn witness_image_by_closure(g: &FiniteGroup, j: usize) -> ElemSet {
    let n = g.order();
    let mut current = ElemSet::full(n);
    for _ in 0..j {
        let comms = ElemSet::from_elems(
            n,
            current.iter().flat_map(|z| g.elements().map(move |y| g.comm(z, y))),
        );
        let mut acc = comms.clone();
        for _ in 1..n {
            let next = product(g, &acc, &comms);
            if next == acc {
                break;
            }
            acc = next;
        }
        current = acc;
    }
    current
}

/// Tabulation of `x ↦ [x, y]·M` on a subset `X`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub is_homomorphism: bool,
    pub kernel: ElemSet,
    pub image_size: usize,
    pub is_bijective_on_quotient: bool,
}

/// Analyses `x ↦ [x, y]·modulus` for `x ∈ domain`. `modulus` must be normal.
pub fn commutator_map_report(
    g: &FiniteGroup,
    domain: &ElemSet,
    modulus: &ElemSet,
    y: Elem,
) -> PhiReport {
    let n = g.order();
    let rep: Vec<Elem> = g
        .elements()
        .map(|z| modulus.iter().map(|k| g.mul(z, k)).min().expect("modulus is nonempty"))
        .collect();
    let phi = |x: Elem| rep[g.comm(x, y).index()];
    let xs: Vec<Elem> = domain.iter().collect();
    let is_homomorphism = xs.iter().all(|&x1| {
        xs.iter().all(|&x2| phi(g.mul(x1, x2)) == rep[g.mul(phi(x1), phi(x2)).index()])
    });
    let id_rep = rep[g.identity().index()];
    let kernel = ElemSet::from_elems(n, xs.iter().copied().filter(|&x| phi(x) == id_rep));
    let image = ElemSet::from_elems(n, xs.iter().map(|&x| phi(x)));
    let quotient_size = domain.len() / modulus.len();
    let is_bijective_on_quotient =
        is_homomorphism && &kernel == modulus && image.len() == quotient_size;
    PhiReport { is_homomorphism, kernel, image_size: image.len(), is_bijective_on_quotient }
}

/// Data of one step of the `h_α` descent.
#[derive(Clone, Debug, Serialize)]
pub struct DescentStep {
    pub alpha: usize,
    pub quotient_order: usize,
    /// ω of the quotient `G₀/U_{α−1}`.
    pub quotient_omega: usize,
    /// Depth of `[ā, ω h̄_{α+1}]` in the lower central series of `Ū_α`.
    pub beta: usize,
    /// Smallest quotient element reaching that depth.
    pub a_bar: Elem,
}

/// Everything the gadget constructions depend on.
#[derive(Clone, Debug)]
pub struct GadgetContext {
    pub g0: Arc<FiniteGroup>,
    pub embedding: Vec<Elem>,
    pub ambient_order: usize,
    pub m_index: usize,
    pub d: usize,
    pub series: FittingSeries,
    pub omega: OmegaData,
    pub lattice: Vec<NormalSubgroup>,
    pub k: NormalSubgroup,
    pub k0: NormalSubgroup,
    pub h: NormalSubgroup,
    pub a: Elem,
    pub g: Elem,
    /// `chain[α − 1] = h_α` for `α = 1..=d`.
    pub chain: Vec<Elem>,
    pub descent: Vec<DescentStep>,
}

impl GadgetContext {
    pub fn prepare(g: &FiniteGroup) -> Result<Self, GadgetError> {
        let r = restrict_to_g0(g)?;
        let g0 = Arc::new(r.g0);
        let d = r.fitting_length;
        let series = upper_fitting_series(&g0)?;
        let lattice = all_normal_subgroups(&g0, DEFAULT_LATTICE_CAP)?;
        let omega = compute_omega_with_lattice(&g0, &lattice)?;
        let k = choose_k(&g0, &lattice, d)?;
        let (k0, h) = compute_k0_and_h(&g0, &lattice, &series, &omega, &k, d)?;
        let a = k.difference(&k0).first().expect("K₀ < K");
        let gg = ElemSet::full(g0.order()).difference(&h).first().expect("H < G₀");
        let (chain, descent) = derive_h_chain(&g0, &series, omega.omega, d, a, gg)?;
        let ctx = GadgetContext {
            ambient_order: g.order(),
            embedding: r.embedding,
            m_index: r.m_index,
            d,
            series,
            omega,
            lattice,
            k,
            k0,
            h,
            a,
            g: gg,
            chain,
            descent,
            g0,
        };
        ctx.check_invariants()?;
        Ok(ctx)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.g0
    }

    /// `h_α` for `α = 1..=d`.
    pub fn h_elem(&self, alpha: usize) -> Elem {
        self.chain[alpha - 1]
    }

    /// `U_α(G₀)`.
    pub fn u(&self, alpha: usize) -> &NormalSubgroup {
        self.series.term(alpha)
    }

    /// Index `|G₀ : H|`, the number of colors in the coloring reduction.
    pub fn c(&self) -> usize {
        self.g0.order() / self.h.order()
    }

    pub fn omega(&self) -> usize {
        self.omega.omega
    }

    /// Index of the coset of `H` containing `x`, numbered by first
    /// appearance in element order.
    pub fn coset_index(&self, x: Elem) -> usize {
        let g0 = &self.g0;
        let mut reps: Vec<Elem> = Vec::new();
        for y in g0.elements() {
            let rep = self.h.iter().map(|k| g0.mul(k, y)).min().expect("H nonempty");
            if !reps.contains(&rep) {
                reps.push(rep);
            }
        }
        let rep = self.h.iter().map(|k| g0.mul(k, x)).min().expect("H nonempty");
        reps.iter().position(|&r| r == rep).expect("every coset is listed")
    }

    /// Re-asserts every structural invariant of a prepared context.
    pub fn check_invariants(&self) -> Result<(), GadgetError> {
        let g0 = &*self.g0;
        let n = g0.order();
        let d = self.d;
        let whole = ElemSet::full(n);
        if d < 3 {
            return Err(GadgetError::FittingLengthTooSmall { d });
        }
        let derived = commutator_of_sets(g0, &whole, &whole);
        if !derived.is_subset(self.u(d - 1)) {
            return Err(violation("G₀/U_{d−1} is not abelian"));
        }
        if commutator_of_sets(g0, &self.k, &whole) != *self.k.set() {
            return Err(violation("[K, G₀] ≠ K"));
        }
        if fitting_length_of(g0, &self.k)? != d - 1 {
            return Err(violation("Fitting length of K is not d − 1"));
        }
        if self.lattice.iter().any(|nn| {
            self.k0.is_subset(nn) && nn.is_subset(&self.k) && nn.len() != self.k0.len()
                && nn.len() != self.k.len()
        }) {
            return Err(violation("a normal subgroup lies strictly between K₀ and K"));
        }
        if !self.k0.is_subset(&self.k) || self.k0.len() == self.k.len() {
            return Err(violation("K₀ is not a proper subgroup of K"));
        }
        if !self.u(d - 1).is_subset(&self.h) || self.h.len() == n {
            return Err(violation("U_{d−1} ≤ H < G₀ fails"));
        }
        if !commutator_of_sets(g0, &self.k, &self.k).is_subset(&self.k0) {
            return Err(violation("K/K₀ is not abelian"));
        }
        if !k0_descent_holds(g0, &self.k0, &self.k, self.omega(), d)? {
            return Err(violation("[K₀, ω G₀] is not inside U_{d−2}(K)"));
        }
        if !self.k.difference(&self.k0).contains(self.a) {
            return Err(violation("a ∉ K∖K₀"));
        }
        if self.h.contains(self.g) {
            return Err(violation("g ∈ H"));
        }
        for alpha in 1..=d {
            let x = self.h_elem(alpha);
            if !self.u(alpha).contains(x) || self.u(alpha - 1).contains(x) {
                return Err(violation(format!("h_{alpha} ∉ U_{alpha}∖U_{}", alpha - 1)));
            }
        }
        if self.h_elem(1) == g0.identity() {
            return Err(violation("h₁ = 1"));
        }
        Ok(())
    }

    /// SHA-256 over the group table and every choice made during
    /// preparation.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.g0.fingerprint().as_bytes());
        let mut put = |tag: &str, xs: &[usize]| {
            hasher.update(tag.as_bytes());
            for x in xs {
                hasher.update((*x as u64).to_le_bytes());
            }
        };
        put("omega", &[self.omega()]);
        put("K", &self.k.to_indices());
        put("K0", &self.k0.to_indices());
        put("H", &self.h.to_indices());
        put("ag", &[self.a.index(), self.g.index()]);
        put("h", &self.chain.iter().map(|e| e.index()).collect::<Vec<_>>());
        hex::encode(hasher.finalize())
    }

    pub fn summary(&self) -> ContextSummary {
        ContextSummary {
            g0_order: self.g0.order(),
            g0_name: self.g0.name().map(str::to_string),
            m_index: self.m_index,
            embedding: self.embedding.clone(),
            d: self.d,
            omega: self.omega(),
            k: self.k.to_indices(),
            k0: self.k0.to_indices(),
            h: self.h.to_indices(),
            c: self.c(),
            a: self.a,
            g: self.g,
            chain: self.chain.clone(),
            descent: self.descent.clone(),
            fingerprint: self.fingerprint(),
        }
    }
}

/// Serializable view of a [`GadgetContext`].
#[derive(Clone, Debug, Serialize)]
pub struct ContextSummary {
    pub g0_order: usize,
    pub g0_name: Option<String>,
    pub m_index: usize,
    pub embedding: Vec<Elem>,
    pub d: usize,
    pub omega: usize,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    #[serde(rename = "K0")]
    pub k0: Vec<usize>,
    #[serde(rename = "H")]
    pub h: Vec<usize>,
    #[serde(rename = "C")]
    pub c: usize,
    pub a: Elem,
    pub g: Elem,
    /// `h₁, …, h_d`.
    pub chain: Vec<Elem>,
    pub descent: Vec<DescentStep>,
    pub fingerprint: String,
}

/// `[K₀, ω G₀] ≤ U_{d−2}(K)`, with `U(K)` the intrinsic series of `K`.
fn k0_descent_holds(
    g0: &FiniteGroup,
    k0: &ElemSet,
    k: &ElemSet,
    omega: usize,
    d: usize,
) -> Result<bool, GadgetError> {
    let whole = ElemSet::full(g0.order());
    let mut m = k0.clone();
    for _ in 0..omega {
        m = commutator_of_sets(g0, &m, &whole);
    }
    let (ksub, embed) = g0.subgroup(k)?;
    let ks = upper_fitting_series(&ksub)?;
    let term = ElemSet::from_elems(g0.order(), ks.term(d - 2).iter().map(|x| embed[x.index()]));
    Ok(m.is_subset(&term))
}

/// The inclusion-minimal normal `K` with `[K, G₀] = K` and Fitting length
/// `d − 1`; ties go to the smallest order, then the smallest element list.
/// Also checks that `K` is not a product of two smaller normal subgroups.
pub fn choose_k(
    g0: &FiniteGroup,
    lattice: &[NormalSubgroup],
    d: usize,
) -> Result<NormalSubgroup, GadgetError> {
    let whole = ElemSet::full(g0.order());
    let mut candidates = Vec::new();
    for nn in lattice {
        if nn.is_trivial() || commutator_of_sets(g0, nn, &whole) != *nn.set() {
            continue;
        }
        if fitting_length_of(g0, nn)? == d - 1 {
            candidates.push(nn.clone());
        }
    }
    let k = candidates
        .iter()
        .find(|c| !candidates.iter().any(|o| o.is_subset(c) && o.len() < c.len()))
        .cloned()
        .ok_or(GadgetError::NoCandidate)?;
    for n1 in lattice {
        for n2 in lattice {
            if product(g0, n1, n2) == *k.set() && n1.len() != k.len() && n2.len() != k.len() {
                return Err(violation("K is a product of two proper normal subgroups"));
            }
        }
    }
    Ok(k)
}

/// `K₀`, the unique maximal normal subgroup of `G₀` strictly inside `K`,
/// and `H`, the centralizer of `K/K₀`.
pub fn compute_k0_and_h(
    g0: &FiniteGroup,
    lattice: &[NormalSubgroup],
    series: &FittingSeries,
    omega: &OmegaData,
    k: &NormalSubgroup,
    d: usize,
) -> Result<(NormalSubgroup, NormalSubgroup), GadgetError> {
    let proper: Vec<&NormalSubgroup> =
        lattice.iter().filter(|nn| nn.is_subset(k) && nn.len() < k.len()).collect();
    let maximal: Vec<&NormalSubgroup> = proper
        .iter()
        .copied()
        .filter(|nn| !proper.iter().any(|o| nn.is_subset(o) && nn.len() < o.len()))
        .collect();
    if maximal.len() != 1 {
        return Err(GadgetError::NonUniqueMaximal { count: maximal.len() });
    }
    let k0 = maximal[0].clone();
    let h = centralizer_mod(g0, k, &k0)?;
    let n = g0.order();
    if h.len() == n {
        return Err(GadgetError::CentralizerIsWholeGroup);
    }
    let whole = ElemSet::full(n);
    if !commutator_of_sets(g0, k, k).is_subset(&k0) {
        return Err(violation("K/K₀ is not abelian"));
    }
    if !k0_descent_holds(g0, &k0, k, omega.omega, d)? {
        return Err(violation("[K₀, ω G₀] is not inside U_{d−2}(K)"));
    }
    if !series.term(d - 1).is_subset(&h) {
        return Err(violation("U_{d−1} is not inside H"));
    }
    if !commutator_of_sets(g0, &whole, &whole).is_subset(&h) {
        return Err(violation("G₀/H is not abelian"));
    }
    Ok((k0, h))
}

/// `h_{d−1} = [a, ω g]`, `h_d` the first element outside `U_{d−1}`, and
/// the descent for `α = d−2, …, 1`: in `Q = G₀/U_{α−1}`, the commutator
/// `[ā, ω h̄_{α+1}]` that lies deepest in the lower central series of
/// `Ū_α = Fit(Q)` (smallest `ā` on ties), lifted to its smallest preimage.
/// The ω used is that of `G₀`, the one the polynomials are built with.
pub fn derive_h_chain(
    g0: &FiniteGroup,
    series: &FittingSeries,
    omega: usize,
    d: usize,
    a: Elem,
    g: Elem,
) -> Result<(Vec<Elem>, Vec<DescentStep>), GadgetError> {
    let mut chain = vec![g0.identity(); d];
    let top = g0.iter_comm(a, g, omega);
    if series.term(d - 2).contains(top) {
        return Err(violation("[a, ω g] lies in U_{d−2}"));
    }
    chain[d - 2] = top;
    chain[d - 1] = ElemSet::full(g0.order())
        .difference(series.term(d - 1))
        .first()
        .expect("U_{d−1} < G₀");
    let mut descent = Vec::new();
    for alpha in (1..d - 1).rev() {
        let below = series.term(alpha - 1);
        let (q, proj) = g0.quotient(below)?;
        let q_omega = compute_omega(&q)?;
        let fit = image(&proj, q.order(), series.term(alpha));
        if fitting_subgroup(&q, &q_omega)?.set() != &fit {
            return Err(violation(format!("image of U_{alpha} is not Fit(G₀/U_{})", alpha - 1)));
        }
        let lcs = lower_central_series_of(&q, &fit);
        let hb = proj[chain[alpha].index()];
        let mut best: Option<(usize, Elem, Elem)> = None;
        for abar in q.elements() {
            let c = q.iter_comm(abar, hb, omega);
            if c == q.identity() || !fit.contains(c) {
                continue;
            }
            let beta = lcs.iter().rposition(|t| t.contains(c)).expect("c ∈ γ₀");
            if best.is_none_or(|(b, _, _)| beta > b) {
                best = Some((beta, abar, c));
            }
        }
        let (beta, a_bar, c) = best.ok_or(GadgetError::NoWitness { alpha })?;
        if q.iter_comm(c, hb, omega) != c {
            return Err(violation(format!("h_{alpha} is not fixed by [·, ω h_{}]", alpha + 1)));
        }
        let lifted = g0.elements().find(|x| proj[x.index()] == c).expect("projection is onto");
        chain[alpha - 1] = lifted;
        descent.push(DescentStep {
            alpha,
            quotient_order: q.order(),
            quotient_omega: q_omega.omega,
            beta,
            a_bar,
        });
    }
    Ok((chain, descent))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GadgetKind {
    And,
    Sat,
}

/// A built AND or SAT polynomial with its contract.
#[derive(Clone, Debug)]
pub struct GadgetFamily {
    pub kind: GadgetKind,
    pub level: usize,
    /// Number of inputs (AND) or clauses (SAT).
    pub arity: usize,
    pub polynomial: GroupPolynomial,
    pub true_target: Elem,
    /// `U_{α−1}`.
    pub modulus: NormalSubgroup,
    pub declared_flat_length: BigUint,
}

/// `(k, ℓ)` with `k` the least integer with `k^e ≥ m` and `ℓ = ⌈m/k⌉`.
pub fn split_arity(m: usize, e: usize) -> (usize, usize) {
    let mut k = m.nth_root(e as u32);
    while k.pow(e as u32) < m {
        k += 1;
    }
    let k = k.max(1);
    (k, m.div_ceil(k))
}

fn padded<T: Clone>(items: &[T], len: usize) -> Vec<T> {
    let mut out = items.to_vec();
    let last = items.last().expect("nonempty").clone();
    out.resize(len, last);
    out
}

impl GadgetContext {
    fn check_level(&self, alpha: usize) -> Result<(), GadgetError> {
        if alpha == 0 || alpha >= self.d {
            return Err(GadgetError::LevelOutOfRange { alpha, max: self.d - 1 });
        }
        Ok(())
    }

    /// Adds `AND_α` applied to `inputs` to the builder. With no inputs the
    /// conjunction is empty and the result is the constant `h_α`.
    pub fn and_nodes(&self, b: &mut PolyBuilder, alpha: usize, inputs: &[NodeId]) -> NodeId {
        let w = self.omega();
        if inputs.is_empty() {
            return b.constant(self.h_elem(alpha));
        }
        if alpha == self.d - 1 {
            let a = b.constant(self.a);
            let g = b.constant(self.g);
            return b.q(a, inputs, g, w);
        }
        let (k, l) = split_arity(inputs.len(), self.d - alpha);
        let inputs = padded(inputs, k * l);
        let blocks: Vec<NodeId> =
            inputs.chunks(l).map(|blk| self.and_nodes(b, alpha + 1, blk)).collect();
        let ha = b.constant(self.h_elem(alpha));
        let hn = b.constant(self.h_elem(alpha + 1));
        b.q(ha, &blocks, hn, w)
    }

    /// Adds `SAT_α` applied to clause triples to the builder.
    pub fn sat_nodes(&self, b: &mut PolyBuilder, alpha: usize, clauses: &[[NodeId; 3]]) -> NodeId {
        let w = self.omega();
        if clauses.is_empty() {
            return b.constant(self.h_elem(alpha));
        }
        if alpha == self.d - 1 {
            let mut s = b.constant(self.a);
            for &cl in clauses {
                s = b.d(s, cl, w);
            }
            let g = b.constant(self.g);
            return b.iter_comm(s, g, w);
        }
        let (k, l) = split_arity(clauses.len(), self.d - alpha);
        let clauses = padded(clauses, k * l);
        let blocks: Vec<NodeId> =
            clauses.chunks(l).map(|blk| self.sat_nodes(b, alpha + 1, blk)).collect();
        let ha = b.constant(self.h_elem(alpha));
        let hn = b.constant(self.h_elem(alpha + 1));
        b.q(ha, &blocks, hn, w)
    }

    /// Flat length of `AND_α` given the flat lengths of its inputs,
    /// computed by the length recurrence alone.
    pub fn and_length(&self, alpha: usize, inputs: &[BigUint]) -> BigUint {
        let w = self.omega();
        let one = BigUint::from(1u32);
        if inputs.is_empty() {
            return one;
        }
        if alpha == self.d - 1 {
            let inner = inputs.iter().fold(one.clone(), |l, x| iter_comm_length(&l, x, w));
            return iter_comm_length(&inner, &one, w);
        }
        let (k, l) = split_arity(inputs.len(), self.d - alpha);
        let inputs = padded(inputs, k * l);
        let blocks: Vec<BigUint> =
            inputs.chunks(l).map(|blk| self.and_length(alpha + 1, blk)).collect();
        let inner = blocks.iter().fold(one.clone(), |acc, x| iter_comm_length(&acc, x, w));
        iter_comm_length(&inner, &one, w)
    }

    /// Flat length of `SAT_α` given the flat lengths of its clause inputs.
    pub fn sat_length(&self, alpha: usize, clauses: &[[BigUint; 3]]) -> BigUint {
        let w = self.omega();
        let one = BigUint::from(1u32);
        if clauses.is_empty() {
            return one;
        }
        if alpha == self.d - 1 {
            let mut s = one.clone();
            for cl in clauses {
                let q3 = cl.iter().fold(s.clone(), |l, x| iter_comm_length(&l, x, w));
                s = &s + q3;
            }
            return iter_comm_length(&s, &one, w);
        }
        let (k, l) = split_arity(clauses.len(), self.d - alpha);
        let clauses = padded(clauses, k * l);
        let blocks: Vec<BigUint> =
            clauses.chunks(l).map(|blk| self.sat_length(alpha + 1, blk)).collect();
        let inner = blocks.iter().fold(one.clone(), |acc, x| iter_comm_length(&acc, x, w));
        iter_comm_length(&inner, &one, w)
    }

    pub fn build_and_gadget(&self, alpha: usize, m: usize) -> Result<GadgetFamily, GadgetError> {
        self.check_level(alpha)?;
        if m == 0 {
            return Err(GadgetError::EmptyArity);
        }
        let mut b = PolyBuilder::new(self.g0.clone());
        let vars: Vec<NodeId> = (0..m).map(|i| b.var(i)).collect();
        let root = self.and_nodes(&mut b, alpha, &vars);
        let polynomial = b.finish(root, m);
        Ok(GadgetFamily {
            kind: GadgetKind::And,
            level: alpha,
            arity: m,
            declared_flat_length: self.and_length(alpha, &vec![BigUint::from(1u32); m]),
            polynomial,
            true_target: self.h_elem(alpha),
            modulus: self.u(alpha - 1).clone(),
        })
    }

    pub fn build_sat_gadget(&self, alpha: usize, m: usize) -> Result<GadgetFamily, GadgetError> {
        self.check_level(alpha)?;
        if m == 0 {
            return Err(GadgetError::EmptyArity);
        }
        let mut b = PolyBuilder::new(self.g0.clone());
        let clauses: Vec<[NodeId; 3]> =
            (0..m).map(|i| [b.var(3 * i), b.var(3 * i + 1), b.var(3 * i + 2)]).collect();
        let root = self.sat_nodes(&mut b, alpha, &clauses);
        let polynomial = b.finish(root, 3 * m);
        let one = || BigUint::from(1u32);
        Ok(GadgetFamily {
            kind: GadgetKind::Sat,
            level: alpha,
            arity: m,
            declared_flat_length: self.sat_length(alpha, &vec![[one(), one(), one()]; m]),
            polynomial,
            true_target: self.h_elem(alpha),
            modulus: self.u(alpha - 1).clone(),
        })
    }

    pub fn build(&self, kind: GadgetKind, alpha: usize, m: usize) -> Result<GadgetFamily, GadgetError> {
        match kind {
            GadgetKind::And => self.build_and_gadget(alpha, m),
            GadgetKind::Sat => self.build_sat_gadget(alpha, m),
        }
    }

    /// `qᵏ(h_α, x₁, …, x_k, h_{α+1})`, the level polynomial.
    pub fn level_polynomial(&self, alpha: usize, k: usize) -> Result<GroupPolynomial, GadgetError> {
        if alpha == 0 || alpha >= self.d {
            return Err(GadgetError::LevelOutOfRange { alpha, max: self.d - 1 });
        }
        let mut b = PolyBuilder::new(self.g0.clone());
        let xs: Vec<NodeId> = (0..k).map(|i| b.var(i)).collect();
        let ha = b.constant(self.h_elem(alpha));
        let hn = b.constant(self.h_elem(alpha + 1));
        let root = b.q(ha, &xs, hn, self.omega());
        Ok(b.finish(root, k))
    }
}

/// What a contract demands of one value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Value in `target·modulus`.
    TargetCoset,
    /// Value in `modulus`.
    Modulus,
    /// Value in `x·modulus` for the given element.
    CosetOf(Elem),
    Unconstrained,
}

/// A coset contract: for each assignment, where the value must land.
pub struct Contract<'a> {
    pub target: Elem,
    pub modulus: &'a ElemSet,
    pub classify: Box<dyn Fn(&[Elem]) -> Expectation + Sync + 'a>,
}

impl Contract<'_> {
    pub fn holds(&self, g: &FiniteGroup, value: Elem, exp: Expectation) -> bool {
        match exp {
            Expectation::TargetCoset => self.modulus.contains(g.mul(g.inv(self.target), value)),
            Expectation::Modulus => self.modulus.contains(value),
            Expectation::CosetOf(x) => self.modulus.contains(g.mul(g.inv(x), value)),
            Expectation::Unconstrained => true,
        }
    }
}

/// How assignments are drawn for sampled verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleClass {
    /// Exact `H`-membership of every input.
    Pattern(Vec<bool>),
    /// Exactly this many inputs in `H`, at random positions.
    InCount(usize),
    /// Exactly this many clause triples entirely outside `H`; every other
    /// triple has at least one input in `H`.
    OutsideClauses(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive { budget: u64 },
    Sampled { seed: u64, trials_per_class: usize },
    /// Exhaustive within the budget, sampled beyond it.
    Auto { budget: u64, seed: u64, trials_per_class: usize },
}

impl Default for VerifyMode {
    fn default() -> Self {
        VerifyMode::Auto {
            budget: DEFAULT_EXHAUSTIVE_BUDGET,
            seed: DEFAULT_SEED,
            trials_per_class: DEFAULT_TRIALS_PER_CLASS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub assignment: Vec<Elem>,
    pub value: Elem,
    pub expected: Expectation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub mode: &'static str,
    pub passed: bool,
    pub assignments_checked: u64,
    pub classes: Option<usize>,
    pub seed: Option<u64>,
    pub counterexample: Option<Counterexample>,
}

/// Checks a contract on every assignment; the least failing assignment in
/// enumeration order is reported.
pub fn verify_exhaustive(
    poly: &GroupPolynomial,
    contract: &Contract<'_>,
    budget: u64,
) -> Result<VerificationReport, GadgetError> {
    let g = poly.group().clone();
    let n = g.order();
    let arity = poly.var_arity();
    let total = search::space_size(n, arity)
        .filter(|&t| t <= budget)
        .ok_or_else(|| GadgetError::BudgetExceeded {
            needed: format!("{n}^{arity}"),
            budget,
        })?;
    let failing = search::find_first(n, arity, total, || poly.evaluator(), |ev, a| {
        let v = ev.eval(a);
        !contract.holds(&g, v, (contract.classify)(a))
    });
    let counterexample = failing.map(|idx| {
        let assignment = search::decode(idx, n, arity);
        let value = poly.evaluate(&assignment).expect("arity matches");
        Counterexample { expected: (contract.classify)(&assignment), assignment, value }
    });
    Ok(VerificationReport {
        mode: "exhaustive",
        passed: counterexample.is_none(),
        assignments_checked: failing.map_or(total, |i| i + 1),
        classes: None,
        seed: None,
        counterexample,
    })
}

/// Stratified sampling: each class gets its own generator seeded from
/// `(seed, class index)`, so results do not depend on scheduling.
pub fn verify_sampled(
    poly: &GroupPolynomial,
    contract: &Contract<'_>,
    member: &ElemSet,
    classes: &[SampleClass],
    seed: u64,
    trials: usize,
) -> VerificationReport {
    let g = poly.group().clone();
    let inside: Vec<Elem> = member.iter().collect();
    let outside: Vec<Elem> = ElemSet::full(g.order()).difference(member).iter().collect();
    let arity = poly.var_arity();
    let failures: Vec<Option<(usize, Counterexample)>> = classes
        .par_iter()
        .enumerate()
        .map(|(ci, class)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (ci as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut ev = poly.evaluator();
            for t in 0..trials {
                let pattern = draw_pattern(class, arity, &mut rng);
                let a: Vec<Elem> = pattern
                    .iter()
                    .map(|&inn| {
                        let pool = if inn { &inside } else { &outside };
                        *pool.choose(&mut rng).expect("both parts nonempty")
                    })
                    .collect();
                let v = ev.eval(&a);
                let exp = (contract.classify)(&a);
                if !contract.holds(&g, v, exp) {
                    return Some((t, Counterexample { assignment: a, value: v, expected: exp }));
                }
            }
            None
        })
        .collect();
    let first = failures.into_iter().enumerate().find_map(|(ci, f)| f.map(|(t, c)| (ci, t, c)));
    let checked = match &first {
        Some((ci, t, _)) => (*ci * trials + t + 1) as u64,
        None => (classes.len() * trials) as u64,
    };
    VerificationReport {
        mode: "sampled",
        passed: first.is_none(),
        assignments_checked: checked,
        classes: Some(classes.len()),
        seed: Some(seed),
        counterexample: first.map(|(_, _, c)| c),
    }
}

fn draw_pattern(class: &SampleClass, arity: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    match class {
        SampleClass::Pattern(p) => p.clone(),
        SampleClass::InCount(c) => {
            let mut p = vec![false; arity];
            for i in rand::seq::index::sample(rng, arity, *c) {
                p[i] = true;
            }
            p
        }
        SampleClass::OutsideClauses(j) => {
            let m = arity / 3;
            let mut p = vec![false; arity];
            let outside: Vec<usize> = rand::seq::index::sample(rng, m, *j).into_vec();
            for cl in (0..m).filter(|c| !outside.contains(c)) {
                // a random nonempty subset of the triple lies in H
                let mask = rng.gen_range(1u8..8);
                for bit in 0..3 {
                    p[3 * cl + bit] = mask & (1 << bit) != 0;
                }
            }
            p
        }
    }
}

/// Sampling classes for a gadget with `vars` variables.
pub fn sample_classes(kind: GadgetKind, vars: usize) -> Vec<SampleClass> {
    if vars <= FULL_PATTERN_ARITY {
        return (0..1usize << vars)
            .map(|mask| SampleClass::Pattern((0..vars).map(|i| mask >> i & 1 == 1).collect()))
            .collect();
    }
    match kind {
        GadgetKind::And => (0..=vars).map(SampleClass::InCount).collect(),
        GadgetKind::Sat => (0..=vars / 3).map(SampleClass::OutsideClauses).collect(),
    }
}

impl GadgetContext {
    /// The coset contract of a gadget family.
    pub fn gadget_contract<'a>(&'a self, family: &'a GadgetFamily) -> Contract<'a> {
        let h = &self.h;
        let classify: Box<dyn Fn(&[Elem]) -> Expectation + Sync + 'a> = match family.kind {
            GadgetKind::And => Box::new(move |a: &[Elem]| {
                if a.iter().any(|&x| h.contains(x)) {
                    Expectation::Modulus
                } else {
                    Expectation::TargetCoset
                }
            }),
            GadgetKind::Sat => Box::new(move |a: &[Elem]| {
                if a.chunks(3).any(|cl| cl.iter().all(|&x| !h.contains(x))) {
                    Expectation::Modulus
                } else {
                    Expectation::TargetCoset
                }
            }),
        };
        Contract { target: family.true_target, modulus: family.modulus.set(), classify }
    }

    pub fn verify_gadget(
        &self,
        family: &GadgetFamily,
        mode: &VerifyMode,
    ) -> Result<VerificationReport, GadgetError> {
        let contract = self.gadget_contract(family);
        let poly = &family.polynomial;
        let sampled = |seed: u64, trials: usize| {
            let classes = sample_classes(family.kind, poly.var_arity());
            verify_sampled(poly, &contract, &self.h, &classes, seed, trials)
        };
        match *mode {
            VerifyMode::Exhaustive { budget } => verify_exhaustive(poly, &contract, budget),
            VerifyMode::Sampled { seed, trials_per_class } => Ok(sampled(seed, trials_per_class)),
            VerifyMode::Auto { budget, seed, trials_per_class } => {
                let fits = search::space_size(self.g0.order(), poly.var_arity())
                    .is_some_and(|t| t <= budget);
                if fits {
                    verify_exhaustive(poly, &contract, budget)
                } else {
                    Ok(sampled(seed, trials_per_class))
                }
            }
        }
    }

    /// Level contract: `qᵏ(h_α, x⃗, h_{α+1})` lies in `U_{α−1}` when some
    /// `xᵢ ∈ U_α` and in `h_α·U_{α−1}` when all `xᵢ ∈ h_{α+1}U_α`.
    pub fn verify_level(
        &self,
        alpha: usize,
        k: usize,
        target: Elem,
        budget: u64,
    ) -> Result<VerificationReport, GadgetError> {
        let poly = self.level_polynomial(alpha, k)?;
        let g0 = self.g0.clone();
        let ua = self.u(alpha).clone();
        let hn = self.h_elem(alpha + 1);
        let classify = move |a: &[Elem]| {
            if a.iter().any(|&x| ua.contains(x)) {
                Expectation::Modulus
            } else if a.iter().all(|&x| ua.contains(g0.mul(g0.inv(hn), x))) {
                Expectation::TargetCoset
            } else {
                Expectation::Unconstrained
            }
        };
        let contract =
            Contract { target, modulus: self.u(alpha - 1).set(), classify: Box::new(classify) };
        verify_exhaustive(&poly, &contract, budget)
    }

    /// `q̃¹(x, y) ∈ xK₀` for `x ∈ K, y ∉ H` and `∈ K₀` for `y ∈ H`.
    pub fn verify_qstar1_cosets(&self) -> CheckOutcome {
        let g0 = &*self.g0;
        let w = self.omega();
        let mut checked = 0u64;
        for x in self.k.iter() {
            for y in g0.elements() {
                checked += 1;
                let v = g0.iter_comm(x, y, w);
                let want = if self.h.contains(y) { g0.identity() } else { x };
                if !self.k0.contains(g0.mul(g0.inv(want), v)) {
                    return CheckOutcome::fail("qstar1 cosets", checked, format!("x={x} y={y}"));
                }
            }
        }
        CheckOutcome::pass("qstar1 cosets", checked)
    }

    /// `D(x, y⃗) ∈ K₀` when `x ∈ K` and all `yⱼ ∉ H`, and `∈ xK₀` when some
    /// `yⱼ ∈ H`.
    pub fn verify_d_cosets(&self) -> CheckOutcome {
        let g0 = self.g0.clone();
        let d = crate::poly::build_d(g0.clone(), self.omega());
        let n = g0.order();
        let ks: Vec<Elem> = self.k.iter().collect();
        let bad = ks.par_iter().find_map_first(|&x| {
            let mut ev = d.evaluator();
            let mut a = vec![x, Elem(0), Elem(0), Elem(0)];
            for idx in 0..n.pow(3) {
                a[1] = Elem((idx % n) as u32);
                a[2] = Elem((idx / n % n) as u32);
                a[3] = Elem((idx / n / n) as u32);
                let v = ev.eval(&a);
                let some_in = a[1..].iter().any(|&y| self.h.contains(y));
                let want = if some_in { x } else { g0.identity() };
                if !self.k0.contains(g0.mul(g0.inv(want), v)) {
                    return Some(format!("{a:?}"));
                }
            }
            None
        });
        let checked = (ks.len() * n.pow(3)) as u64;
        match bad {
            None => CheckOutcome::pass("D cosets", checked),
            Some(detail) => CheckOutcome::fail("D cosets", checked, detail),
        }
    }

    /// `⟨⟨a⟩⟩ = K` for every `a ∈ K∖K₀`.
    pub fn verify_normal_closures(&self) -> CheckOutcome {
        let g0 = &*self.g0;
        let diff = self.k.difference(&self.k0);
        for (i, a) in diff.iter().enumerate() {
            let c = normal_closure(g0, &ElemSet::from_elems(g0.order(), [a]));
            if c.set() != self.k.set() {
                return CheckOutcome::fail("normal closures", i as u64 + 1, format!("a={a}"));
            }
        }
        CheckOutcome::pass("normal closures", diff.len() as u64)
    }

    /// `x ↦ [x, g]K₀` is bijective on `K/K₀` for every `g ∉ H`.
    pub fn verify_phi_bijective(&self) -> CheckOutcome {
        let outside = ElemSet::full(self.g0.order()).difference(&self.h);
        for (i, g) in outside.iter().enumerate() {
            if !self.phi_analysis(g).is_bijective_on_quotient {
                return CheckOutcome::fail("phi bijective", i as u64 + 1, format!("g={g}"));
            }
        }
        CheckOutcome::pass("phi bijective", outside.len() as u64)
    }

    pub fn phi_analysis(&self, g: Elem) -> PhiReport {
        commutator_map_report(&self.g0, &self.k, &self.k0, g)
    }
}

/// Result of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub detail: Option<String>,
}

impl CheckOutcome {
    pub fn pass(name: &str, checked: u64) -> Self {
        CheckOutcome { name: name.to_string(), passed: true, checked, detail: None }
    }

    pub fn fail(name: &str, checked: u64, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed: false, checked, detail: Some(detail) }
    }
}

/// JSON header written in front of a serialized gadget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetHeader {
    pub kind: GadgetKind,
    pub level: usize,
    pub arity: usize,
    pub variables: usize,
    pub true_target: Elem,
    pub declared_flat_length: String,
    pub log2_flat_length: f64,
    pub node_count: usize,
    pub context_fingerprint: String,
}

impl GadgetFamily {
    pub fn header(&self, ctx: &GadgetContext) -> GadgetHeader {
        GadgetHeader {
            kind: self.kind,
            level: self.level,
            arity: self.arity,
            variables: self.polynomial.var_arity(),
            true_target: self.true_target,
            declared_flat_length: self.declared_flat_length.to_string(),
            log2_flat_length: log2_big(&self.declared_flat_length),
            node_count: self.polynomial.node_count(),
            context_fingerprint: ctx.fingerprint(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn s4() -> GadgetContext {
        GadgetContext::prepare(&builtin("S4").unwrap()).unwrap()
    }

    fn labels(g: &FiniteGroup, s: &ElemSet) -> Vec<String> {
        s.iter().map(|e| g.label(e)).collect()
    }

    #[test]
    fn split_arity_cases() {
        assert_eq!(split_arity(1, 2), (1, 1));
        assert_eq!(split_arity(4, 2), (2, 2));
        assert_eq!(split_arity(5, 2), (3, 2));
        assert_eq!(split_arity(10, 2), (4, 3));
        assert_eq!(split_arity(27, 3), (3, 9));
        assert_eq!(split_arity(28, 3), (4, 7));
        for m in 1..200 {
            for e in 1..4 {
                let (k, l) = split_arity(m, e);
                assert!(k.pow(e as u32) >= m && (k == 1 || (k - 1).pow(e as u32) < m));
                assert!(k * l >= m && k * (l - 1) < m);
            }
        }
    }

    #[test]
    fn s4_context() {
        let ctx = s4();
        let g = &*ctx.g0;
        assert_eq!((ctx.d, ctx.m_index, ctx.omega()), (3, 0, 6));
        assert_eq!(g.order(), 24);
        assert_eq!(ctx.k.order(), 12);
        assert_eq!(ctx.k0.order(), 4);
        assert_eq!(ctx.h.set(), ctx.k.set());
        assert_eq!(ctx.c(), 2);
        // K₀ is the Klein four-group: identity plus the double transpositions
        assert!(labels(g, &ctx.k0).iter().all(|l| l == "()" || l.matches('(').count() == 2));
        let h2 = ctx.h_elem(2);
        assert!(ctx.k.contains(h2) && !ctx.k0.contains(h2));
        let h1 = ctx.h_elem(1);
        assert!(ctx.k0.contains(h1) && h1 != g.identity());
        assert!(!ctx.h.contains(ctx.h_elem(3)));
    }

    #[test]
    fn refuses_small_fitting_length() {
        for name in ["D15", "C6", "S3", "remark72"] {
            let err = GadgetContext::prepare(&builtin(name).unwrap()).unwrap_err();
            assert!(matches!(err, GadgetError::FittingLengthTooSmall { d: 2 | 1 }), "{name}");
        }
    }

    #[test]
    fn and1_single_input_values() {
        let ctx = s4();
        let fam = ctx.build_and_gadget(1, 1).unwrap();
        for y in ctx.g0.elements() {
            let v = fam.polynomial.evaluate(&[y]).unwrap();
            let want = if ctx.h.contains(y) { ctx.g0.identity() } else { ctx.h_elem(1) };
            assert_eq!(v, want, "y = {y}");
        }
    }

    #[test]
    fn declared_length_matches_dag() {
        let ctx = s4();
        for m in 1..6 {
            for kind in [GadgetKind::And, GadgetKind::Sat] {
                for alpha in 1..3 {
                    let fam = ctx.build(kind, alpha, m).unwrap();
                    assert_eq!(fam.declared_flat_length, fam.polynomial.flat_length());
                }
            }
        }
    }

    #[test]
    fn level_out_of_range() {
        let ctx = s4();
        assert!(matches!(ctx.build_and_gadget(0, 2), Err(GadgetError::LevelOutOfRange { .. })));
        assert!(matches!(ctx.build_and_gadget(3, 2), Err(GadgetError::LevelOutOfRange { .. })));
        assert!(matches!(ctx.build_sat_gadget(1, 0), Err(GadgetError::EmptyArity)));
    }

    #[test]
    fn mutated_target_is_caught() {
        let ctx = s4();
        let mut fam = ctx.build_and_gadget(1, 1).unwrap();
        fam.true_target = ctx.g0.identity();
        let r = ctx.verify_gadget(&fam, &VerifyMode::Exhaustive { budget: 100 }).unwrap();
        assert!(!r.passed);
        let cx = r.counterexample.unwrap();
        assert!(!ctx.h.contains(cx.assignment[0]));
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let ctx = s4();
        let fam = ctx.build_and_gadget(1, 3).unwrap();
        let err = ctx.verify_gadget(&fam, &VerifyMode::Exhaustive { budget: 1000 }).unwrap_err();
        assert!(matches!(err, GadgetError::BudgetExceeded { .. }));
    }

    #[test]
    fn witness_images_small() {
        let s3 = Arc::new(builtin("S3").unwrap());
        let w0 = inducibility_witness(s3.clone(), 0);
        assert_eq!((w0.var_arity(), w0.node_count()), (1, 1));
        let w1 = inducibility_witness(s3.clone(), 1);
        assert_eq!(w1.var_arity(), 12);
        let closure = witness_image_by_closure(&s3, 1);
        assert_eq!(closure.len(), 3);
        let lcs = lower_central_series(&s3);
        assert_eq!(&closure, lcs.term(1).set());
    }

    #[test]
    fn phi_identity_is_constant() {
        let ctx = s4();
        let r = ctx.phi_analysis(ctx.g0.identity());
        assert!(r.is_homomorphism);
        assert_eq!(&r.kernel, ctx.k.set());
        assert_eq!(r.image_size, 1);
        assert!(!r.is_bijective_on_quotient);
    }

    #[test]
    fn coset_indices_follow_element_order() {
        let ctx = s4();
        assert_eq!(ctx.coset_index(ctx.g0.identity()), 0);
        assert_eq!(ctx.coset_index(ctx.g), 1);
    }
}
