//! Brute-force ground truth.
//!
//! The baseline engines enumerate every assignment in order (variable 0
//! fastest) with no pruning at all; simplicity is their correctness
//! argument. A separately selected pruned engine only re-evaluates the
//! nodes that depend on the digits that changed, and is cross-checked
//! against the baseline.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::group::Elem;
use crate::poly::{GroupPolynomial, Node};
use crate::reduce::{CnfFormula, EquationInstance, Graph, Mode};
use crate::search;

/// Default cap on the number of assignments any engine may enumerate.
pub const DEFAULT_SOLVE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("{needed} candidates exceed the budget of {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("instance asks the {0:?} question, which this engine does not answer")]
    ModeMismatch(Mode),
    #[error("engine produced a verdict its own witness does not confirm")]
    UnsoundVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Sat(Vec<Elem>),
    Unsat,
    HoldsIdentically,
    Counterexample(Vec<Elem>),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::HoldsIdentically => "HOLDS_IDENTICALLY",
            Verdict::Counterexample(_) => "COUNTEREXAMPLE",
        }
    }

    pub fn assignment(&self) -> Option<&[Elem]> {
        match self {
            Verdict::Sat(a) | Verdict::Counterexample(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Assignments up to and including the reported one, in enumeration
    /// order; independent of the number of workers.
    pub assignments_tried: u64,
    pub wall_time: Duration,
}

/// JSON shape of a [`SolveResult`].
#[derive(Serialize)]
pub struct SolveJson<'a> {
    pub verdict: &'static str,
    pub witness: Option<&'a [Elem]>,
    pub assignments_tried: u64,
    pub millis: u128,
}

impl SolveResult {
    pub fn to_json(&self) -> SolveJson<'_> {
        SolveJson {
            verdict: self.verdict.label(),
            witness: self.verdict.assignment(),
            assignments_tried: self.assignments_tried,
            millis: self.wall_time.as_millis(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Baseline,
    /// Re-evaluates only nodes that read a changed variable.
    Pruned,
}

fn space(poly: &GroupPolynomial, budget: u64) -> Result<u64, SolveError> {
    let n = poly.group().order();
    let arity = poly.var_arity();
    search::space_size(n, arity).filter(|&t| t <= budget).ok_or_else(|| SolveError::BudgetExceeded {
        needed: format!("{n}^{arity}"),
        budget,
    })
}

/// Evaluator that recomputes only the nodes whose lowest variable is at
/// most the highest digit that changed since the previous call.
pub struct PrunedEvaluator<'a> {
    poly: &'a GroupPolynomial,
    values: Vec<Elem>,
    /// `schedule[d]`: nodes to recompute when digits `0..=d` changed.
    schedule: Vec<Vec<usize>>,
    last: Option<Vec<Elem>>,
}

impl<'a> PrunedEvaluator<'a> {
    pub fn new(poly: &'a GroupPolynomial) -> Self {
        let nodes = poly.nodes();
        let mut min_var = vec![u32::MAX; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            min_var[i] = match *node {
                Node::Const(_) => u32::MAX,
                Node::Var(v) => v,
                Node::Mul(a, b) => min_var[a.0 as usize].min(min_var[b.0 as usize]),
                Node::Inv(a) => min_var[a.0 as usize],
            };
        }
        let arity = poly.var_arity();
        let schedule = (0..arity)
            .map(|d| (0..nodes.len()).filter(|&i| min_var[i] as usize <= d).collect())
            .collect();
        PrunedEvaluator { poly, values: vec![Elem(0); nodes.len()], schedule, last: None }
    }

    fn compute(&mut self, i: usize, assignment: &[Elem]) {
        let g = self.poly.group();
        self.values[i] = match self.poly.nodes()[i] {
            Node::Const(c) => c,
            Node::Var(v) => assignment[v as usize],
            Node::Mul(a, b) => g.mul(self.values[a.0 as usize], self.values[b.0 as usize]),
            Node::Inv(a) => g.inv(self.values[a.0 as usize]),
        };
    }

    pub fn eval(&mut self, assignment: &[Elem]) -> Elem {
        let changed = self.last.as_ref().map(|prev| {
            prev.iter().zip(assignment).rposition(|(p, a)| p != a)
        });
        match changed {
            Some(None) => {}
            Some(Some(d)) => {
                for k in 0..self.schedule[d].len() {
                    let i = self.schedule[d][k];
                    self.compute(i, assignment);
                }
            }
            None => {
                for i in 0..self.values.len() {
                    self.compute(i, assignment);
                }
            }
        }
        match &mut self.last {
            Some(prev) => prev.copy_from_slice(assignment),
            None => self.last = Some(assignment.to_vec()),
        }
        self.values[self.poly.root().0 as usize]
    }
}

/// Least assignment index with `found(value)`, over the whole space.
fn first_where(
    poly: &GroupPolynomial,
    total: u64,
    engine: Engine,
    found: impl Fn(Elem) -> bool + Sync + Send,
) -> Option<u64> {
    let n = poly.group().order();
    let arity = poly.var_arity();
    match engine {
        Engine::Baseline => {
            search::find_first(n, arity, total, || poly.evaluator(), |ev, a| found(ev.eval(a)))
        }
        Engine::Pruned => search::find_first(
            n,
            arity,
            total,
            || PrunedEvaluator::new(poly),
            |ev, a| found(ev.eval(a)),
        ),
    }
}

/// Is there an assignment with `p = target`? Reports the least one.
pub fn polsat_bruteforce(instance: &EquationInstance, budget: u64) -> Result<SolveResult, SolveError> {
    polsat_with(instance, budget, Engine::Baseline)
}

pub fn polsat_with(
    instance: &EquationInstance,
    budget: u64,
    engine: Engine,
) -> Result<SolveResult, SolveError> {
    if instance.mode != Mode::Satisfiability {
        return Err(SolveError::ModeMismatch(instance.mode));
    }
    let started = Instant::now();
    let poly = &instance.polynomial;
    let total = space(poly, budget)?;
    let target = instance.target;
    let hit = first_where(poly, total, engine, |v| v == target);
    let n = poly.group().order();
    let (verdict, tried) = match hit {
        Some(i) => {
            let w = search::decode(i, n, poly.var_arity());
            if poly.evaluate(&w).ok() != Some(target) {
                return Err(SolveError::UnsoundVerdict);
            }
            (Verdict::Sat(w), i + 1)
        }
        None => (Verdict::Unsat, total),
    };
    Ok(SolveResult { verdict, assignments_tried: tried, wall_time: started.elapsed() })
}

/// Does `p = target` hold everywhere? Reports the least counterexample.
pub fn poleqv_bruteforce(instance: &EquationInstance, budget: u64) -> Result<SolveResult, SolveError> {
    poleqv_with(instance, budget, Engine::Baseline)
}

pub fn poleqv_with(
    instance: &EquationInstance,
    budget: u64,
    engine: Engine,
) -> Result<SolveResult, SolveError> {
    if instance.mode != Mode::Identity {
        return Err(SolveError::ModeMismatch(instance.mode));
    }
    let started = Instant::now();
    let poly = &instance.polynomial;
    let total = space(poly, budget)?;
    let target = instance.target;
    let miss = first_where(poly, total, engine, |v| v != target);
    let n = poly.group().order();
    let (verdict, tried) = match miss {
        Some(i) => {
            let w = search::decode(i, n, poly.var_arity());
            if poly.evaluate(&w).ok() == Some(target) {
                return Err(SolveError::UnsoundVerdict);
            }
            (Verdict::Counterexample(w), i + 1)
        }
        None => (Verdict::HoldsIdentically, total),
    };
    Ok(SolveResult { verdict, assignments_tried: tried, wall_time: started.elapsed() })
}

/// Runs the engine matching the instance's question.
pub fn solve(instance: &EquationInstance, budget: u64, engine: Engine) -> Result<SolveResult, SolveError> {
    match instance.mode {
        Mode::Satisfiability => polsat_with(instance, budget, engine),
        Mode::Identity => poleqv_with(instance, budget, engine),
    }
}

/// `p ≡ 1` exactly when `p = x` has no solution for every `x ≠ 1`.
/// Returns whether both sides agree.
pub fn duality_holds(poly: &GroupPolynomial, budget: u64) -> Result<bool, SolveError> {
    let g = poly.group();
    let provenance = crate::reduce::Provenance {
        source_kind: crate::reduce::Pipeline::Sat,
        source_sha256: String::new(),
        context_fingerprint: String::new(),
    };
    let instance = |target, mode| EquationInstance {
        polynomial: poly.clone(),
        target,
        mode,
        provenance: provenance.clone(),
    };
    let holds = matches!(
        poleqv_bruteforce(&instance(g.identity(), Mode::Identity), budget)?.verdict,
        Verdict::HoldsIdentically
    );
    let mut all_unsat = true;
    for x in g.elements().filter(|&x| x != g.identity()) {
        if polsat_bruteforce(&instance(x, Mode::Satisfiability), budget)?.verdict != Verdict::Unsat {
            all_unsat = false;
        }
    }
    Ok(holds == all_unsat)
}

/// Truth-table search; the least satisfying assignment with variable 0 as
/// the lowest bit.
pub fn sat_oracle(phi: &CnfFormula, budget: u64) -> Result<Option<Vec<bool>>, SolveError> {
    let n = phi.num_vars;
    let total = search::space_size(2, n).filter(|&t| t <= budget && n <= 30).ok_or_else(|| {
        SolveError::BudgetExceeded { needed: format!("2^{n}"), budget }
    })?;
    for bits in 0..total {
        let a: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        if phi.evaluate(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Enumerates all `c^|V|` colorings; the least proper one with vertex 0 as
/// the lowest digit.
pub fn coloring_oracle(graph: &Graph, colors: usize, budget: u64) -> Result<Option<Vec<usize>>, SolveError> {
    let n = graph.num_vertices;
    if colors == 0 {
        return Ok((n == 0).then(Vec::new));
    }
    let total = search::space_size(colors, n).filter(|&t| t <= budget && n <= 20).ok_or_else(|| {
        SolveError::BudgetExceeded { needed: format!("{colors}^{n}"), budget }
    })?;
    for idx in 0..total {
        let a: Vec<usize> = search::decode(idx, colors, n).into_iter().map(|e| e.index()).collect();
        if graph.is_proper_coloring(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::poly::PolyBuilder;
    use crate::reduce::{Literal, Pipeline, Provenance};
    use std::sync::Arc;

    fn instance(poly: GroupPolynomial, target: Elem, mode: Mode) -> EquationInstance {
        let provenance = Provenance {
            source_kind: Pipeline::Sat,
            source_sha256: String::new(),
            context_fingerprint: String::new(),
        };
        EquationInstance { polynomial: poly, target, mode, provenance }
    }

    #[test]
    fn single_variable() {
        let g = Arc::new(builtin("S3").unwrap());
        let p = GroupPolynomial::variable(g.clone());
        let r = polsat_bruteforce(&instance(p.clone(), g.identity(), Mode::Satisfiability), 100).unwrap();
        assert_eq!(r.verdict, Verdict::Sat(vec![g.identity()]));
        assert_eq!(r.assignments_tried, 1);
        let r = poleqv_bruteforce(&instance(p, g.identity(), Mode::Identity), 100).unwrap();
        assert_eq!(r.verdict, Verdict::Counterexample(vec![Elem(1)]));
    }

    #[test]
    fn commutator_over_abelian_group() {
        let g = Arc::new(builtin("C2xC2").unwrap());
        let mut b = PolyBuilder::new(g.clone());
        let (x, y) = (b.var(0), b.var(1));
        let c = b.comm(x, y);
        let p = b.finish(c, 2);
        let r = poleqv_bruteforce(&instance(p.clone(), g.identity(), Mode::Identity), 100).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsIdentically);
        assert_eq!(r.assignments_tried, 16);
        assert!(duality_holds(&p, 100).unwrap());
    }

    #[test]
    fn mode_and_budget_errors() {
        let g = Arc::new(builtin("S3").unwrap());
        let p = GroupPolynomial::variable(g.clone());
        let inst = instance(p.clone(), g.identity(), Mode::Identity);
        assert!(matches!(polsat_bruteforce(&inst, 100), Err(SolveError::ModeMismatch(_))));
        let inst = instance(p, g.identity(), Mode::Satisfiability);
        assert!(matches!(polsat_bruteforce(&inst, 5), Err(SolveError::BudgetExceeded { .. })));
    }

    #[test]
    fn pruned_matches_baseline_on_s3_commutators() {
        let g = Arc::new(builtin("S3").unwrap());
        let mut b = PolyBuilder::new(g.clone());
        let (x, y, z) = (b.var(0), b.var(1), b.var(2));
        let c = b.comm(x, y);
        let c = b.iter_comm(c, z, 2);
        let p = b.finish(c, 3);
        for t in g.elements() {
            for mode in [Mode::Satisfiability, Mode::Identity] {
                let inst = instance(p.clone(), t, mode);
                let a = solve(&inst, 1000, Engine::Baseline).unwrap();
                let b = solve(&inst, 1000, Engine::Pruned).unwrap();
                assert_eq!((a.verdict, a.assignments_tried), (b.verdict, b.assignments_tried));
            }
        }
    }

    #[test]
    fn boolean_oracles() {
        let empty = CnfFormula::new(2, vec![]).unwrap();
        assert_eq!(sat_oracle(&empty, 10).unwrap(), Some(vec![false, false]));
        let contradiction =
            CnfFormula::new(1, vec![[Literal::pos(0); 3], [Literal::neg(0); 3]]).unwrap();
        assert_eq!(sat_oracle(&contradiction, 10).unwrap(), None);
        let k3 = Graph::complete(3);
        assert_eq!(coloring_oracle(&k3, 2, 100).unwrap(), None);
        assert_eq!(coloring_oracle(&k3, 3, 100).unwrap(), Some(vec![2, 1, 0]));
        assert!(coloring_oracle(&Graph::complete(21), 2, u64::MAX).is_err());
    }
}
