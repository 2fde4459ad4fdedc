//! Commutator calculus checks.
//!
//! Five families of identities, each checkable exhaustively on small
//! groups or on seeded random tuples:
//!
//! - product rules `[xy,z] = [x,z]^y [y,z]` and `[x,yz] = [x,z][x,y]^z`;
//! - `[K₁,K₂] = [K₂,K₁] ≤ K₁ ∩ K₂` and `[K₁K₂,N] = [K₁,N][K₂,N]`;
//! - `x ≡ y mod N`, `g ∈ M` imply `[x,k g] ≡ [y,k g] mod [N,k M]`;
//! - `g ∈ M`, `xᵢ ≡ yᵢ mod N` imply `[g,x₁…xₙ] ≡ [g,y₁…yₙ] mod [M,N]`;
//! - `[hf,k g] = [h,k g][f,k g]` for `h ∈ N`, `f ∈ C_G(N)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::group::{Elem, FiniteGroup};
use crate::structure::{
    centralizer, commutator_of_sets, product, ElemSet, NormalSubgroup,
};

/// Outcome of one identity family.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally { name: name.to_string(), ..Default::default() }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

/// Shared data for the subgroup-level identities.
pub struct IdentityContext<'a> {
    pub g: &'a FiniteGroup,
    pub lattice: &'a [NormalSubgroup],
    /// Largest iteration count checked for the `k`-fold identities.
    pub k_max: usize,
    /// `[N, k M]` for every lattice pair and `k ≤ k_max`, indexed
    /// `[n][m][k]`.
    iterated: Vec<Vec<Vec<ElemSet>>>,
}

impl<'a> IdentityContext<'a> {
    pub fn new(g: &'a FiniteGroup, lattice: &'a [NormalSubgroup], k_max: usize) -> Self {
        let iterated = lattice
            .iter()
            .map(|nn| {
                lattice
                    .iter()
                    .map(|mm| {
                        let mut chain = vec![nn.set().clone()];
                        for _ in 0..k_max {
                            let next = commutator_of_sets(g, chain.last().expect("nonempty"), mm);
                            chain.push(next);
                        }
                        chain
                    })
                    .collect()
            })
            .collect();
        IdentityContext { g, lattice, k_max, iterated }
    }

    fn same_coset(&self, a: Elem, b: Elem, modulus: &ElemSet) -> bool {
        modulus.contains(self.g.mul(self.g.inv(a), b))
    }

    fn check_product_rules(&self, x: Elem, y: Elem, z: Elem) -> bool {
        let g = self.g;
        let left = g.comm(g.mul(x, y), z) == g.mul(g.conj(g.comm(x, z), y), g.comm(y, z));
        let right = g.comm(x, g.mul(y, z)) == g.mul(g.comm(x, z), g.conj(g.comm(x, y), z));
        left && right
    }

    fn check_iterated_left(&self, ni: usize, mi: usize, x: Elem, h: Elem, gm: Elem, k: usize) -> bool {
        let g = self.g;
        let y = g.mul(h, x);
        self.same_coset(g.iter_comm(x, gm, k), g.iter_comm(y, gm, k), &self.iterated[ni][mi][k])
    }

    fn check_iterated_right(&self, ni: usize, mi: usize, gm: Elem, xs: &[Elem], hs: &[Elem]) -> bool {
        let g = self.g;
        let lhs = xs.iter().fold(gm, |acc, &x| g.comm(acc, x));
        let rhs = xs.iter().zip(hs).fold(gm, |acc, (&x, &h)| g.comm(acc, g.mul(h, x)));
        self.same_coset(lhs, rhs, &self.iterated[ni][mi][1])
    }

    fn check_central(&self, h: Elem, f: Elem, gg: Elem, k: usize) -> bool {
        let g = self.g;
        g.iter_comm(g.mul(h, f), gg, k) == g.mul(g.iter_comm(h, gg, k), g.iter_comm(f, gg, k))
    }

    /// Product rules on all triples.
    pub fn product_rules(&self) -> Tally {
        let mut t = Tally::new("product rules");
        for x in self.g.elements() {
            for y in self.g.elements() {
                for z in self.g.elements() {
                    t.record(self.check_product_rules(x, y, z), || format!("x={x} y={y} z={z}"));
                }
            }
        }
        t
    }

    /// Symmetry, intersection bound and product rule over the lattice.
    pub fn subgroup_rules(&self) -> Tally {
        let g = self.g;
        let mut t = Tally::new("subgroup commutators");
        for (i, k1) in self.lattice.iter().enumerate() {
            for (j, k2) in self.lattice.iter().enumerate() {
                let c12 = &self.iterated[i][j][1];
                let ok = c12 == &self.iterated[j][i][1] && c12.is_subset(&k1.intersection(k2));
                t.record(ok, || format!("K1={i} K2={j}"));
                let joined = product(g, k1, k2);
                for (l, nn) in self.lattice.iter().enumerate() {
                    let lhs = commutator_of_sets(g, &joined, nn);
                    let rhs = product(g, &self.iterated[i][l][1], &self.iterated[j][l][1]);
                    t.record(lhs == rhs, || format!("K1={i} K2={j} N={l}"));
                }
            }
        }
        t
    }

    /// Left iterated commutators respect congruences, for every lattice
    /// pair, every `x`, `h ∈ N`, `g ∈ M` and `k ≤ k_max`.
    pub fn iterated_left(&self) -> Tally {
        let mut t = Tally::new("iterated commutator congruence");
        for (ni, nn) in self.lattice.iter().enumerate() {
            for (mi, mm) in self.lattice.iter().enumerate() {
                for x in self.g.elements() {
                    for h in nn.iter() {
                        for gm in mm.iter() {
                            for k in 0..=self.k_max {
                                t.record(self.check_iterated_left(ni, mi, x, h, gm, k), || {
                                    format!("N={ni} M={mi} x={x} h={h} g={gm} k={k}")
                                });
                            }
                        }
                    }
                }
            }
        }
        t
    }

    /// Right-nested commutators respect congruences for `n ≤ n_max`.
    pub fn iterated_right(&self, n_max: usize) -> Tally {
        let mut t = Tally::new("right-nested congruence");
        let elems: Vec<Elem> = self.g.elements().collect();
        for (ni, nn) in self.lattice.iter().enumerate() {
            let hs: Vec<Elem> = nn.iter().collect();
            for (mi, mm) in self.lattice.iter().enumerate() {
                for gm in mm.iter() {
                    for n in 1..=n_max {
                        let total = (elems.len() * hs.len()).pow(n as u32);
                        for idx in 0..total {
                            let mut rest = idx;
                            let mut xs = Vec::with_capacity(n);
                            let mut ys = Vec::with_capacity(n);
                            for _ in 0..n {
                                xs.push(elems[rest % elems.len()]);
                                rest /= elems.len();
                                ys.push(hs[rest % hs.len()]);
                                rest /= hs.len();
                            }
                            t.record(self.check_iterated_right(ni, mi, gm, &xs, &ys), || {
                                format!("N={ni} M={mi} g={gm} x={xs:?} h={ys:?}")
                            });
                        }
                    }
                }
            }
        }
        t
    }

    /// The distributive rule for centralizing factors.
    pub fn central_rule(&self) -> Tally {
        let mut t = Tally::new("centralizer distributivity");
        for nn in self.lattice {
            let cent = centralizer(self.g, nn);
            for h in nn.iter() {
                for f in cent.iter() {
                    for gg in self.g.elements() {
                        for k in 0..=self.k_max {
                            t.record(self.check_central(h, f, gg, k), || {
                                format!("h={h} f={f} g={gg} k={k}")
                            });
                        }
                    }
                }
            }
        }
        t
    }

    /// All five families exhaustively, right-nested up to `n_max`.
    pub fn exhaustive(&self, n_max: usize) -> Vec<Tally> {
        vec![
            self.product_rules(),
            self.subgroup_rules(),
            self.iterated_left(),
            self.iterated_right(n_max),
            self.central_rule(),
        ]
    }

    /// `samples` random instances of each element-level family, plus the
    /// full lattice-level check.
    pub fn sampled(&self, seed: u64, samples: u64) -> Vec<Tally> {
        let g = self.g;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elems: Vec<Elem> = g.elements().collect();
        let pick = |rng: &mut ChaCha8Rng, s: &ElemSet| {
            let v: Vec<Elem> = s.iter().collect();
            *v.choose(rng).expect("subgroups are nonempty")
        };
        let lat = self.lattice.len();
        let mut prod = Tally::new("product rules");
        let mut left = Tally::new("iterated commutator congruence");
        let mut right = Tally::new("right-nested congruence");
        let mut central = Tally::new("centralizer distributivity");
        let cents: Vec<ElemSet> = self.lattice.iter().map(|nn| centralizer(g, nn)).collect();
        for _ in 0..samples {
            let (x, y, z) = (*elems.choose(&mut rng).unwrap(), *elems.choose(&mut rng).unwrap(), *elems.choose(&mut rng).unwrap());
            prod.record(self.check_product_rules(x, y, z), || format!("x={x} y={y} z={z}"));

            let (ni, mi) = (rng.gen_range(0..lat), rng.gen_range(0..lat));
            let h = pick(&mut rng, &self.lattice[ni]);
            let gm = pick(&mut rng, &self.lattice[mi]);
            let k = rng.gen_range(0..=self.k_max);
            left.record(self.check_iterated_left(ni, mi, x, h, gm, k), || {
                format!("N={ni} M={mi} x={x} h={h} g={gm} k={k}")
            });

            let n = rng.gen_range(1..=3);
            let xs: Vec<Elem> = (0..n).map(|_| *elems.choose(&mut rng).unwrap()).collect();
            let hs: Vec<Elem> = (0..n).map(|_| pick(&mut rng, &self.lattice[ni])).collect();
            right.record(self.check_iterated_right(ni, mi, gm, &xs, &hs), || {
                format!("N={ni} M={mi} g={gm} x={xs:?} h={hs:?}")
            });

            let f = pick(&mut rng, &cents[ni]);
            central.record(self.check_central(h, f, z, k), || format!("h={h} f={f} g={z} k={k}"));
        }
        vec![prod, self.subgroup_rules(), left, right, central]
    }
}
