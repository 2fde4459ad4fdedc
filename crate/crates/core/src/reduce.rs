//! Compiling 3-CNF formulas and graphs into group equations.
//!
//! A literal `X_k` becomes the two-letter word `g·x_k` and `¬X_k` the
//! single letter `x_k`; a slot counts as true when its value lies in `H`.
//! The literal words fill the `3m` slots of the level-1 SAT gadget. For
//! coloring, each edge `{u, v}` becomes `x_u·x_v⁻¹`, fed into the level-1
//! AND gadget in ascending edge order.
//!
//! Both questions are emitted for the same polynomial: does it ever take
//! the value `h₁`, and is it identically `1`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gadget::GadgetContext;
use crate::group::{Elem, FiniteGroup, GroupError, GroupFile};
use crate::poly::{log2_big, GroupPolynomial, NodeId, PolyBuilder, PolyError};

pub const GROUP_FILE: &str = "group.json";
pub const POLYNOMIAL_FILE: &str = "polynomial.slp";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("variable {var} out of range for {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("the formula has no clauses")]
    EmptyFormula,
    #[error("lifted witness does not satisfy the source instance")]
    WitnessInvalid,
    #[error("assignment has {got} values, expected {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("bundle error: {0}")]
    Bundle(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> ReduceError {
    ReduceError::Parse { line, msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var] != self.negated
    }

    fn dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

/// A formula in exact 3-CNF. Shorter clauses are padded by repeating
/// their last literal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self, ReduceError> {
        for lit in clauses.iter().flatten() {
            if lit.var >= num_vars {
                return Err(ReduceError::VariableOutOfRange { var: lit.var, num_vars });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Parses DIMACS CNF. Clauses may span lines and end with `0`; clauses
    /// of one or two literals are padded, longer ones are rejected.
    pub fn parse_dimacs(text: &str) -> Result<Self, ReduceError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            last_line = i + 1;
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                    return Err(parse_err(i + 1, "expected a single `p cnf <vars> <clauses>`"));
                }
                let n = parts[2].parse().map_err(|_| parse_err(i + 1, "bad variable count"))?;
                let m = parts[3].parse().map_err(|_| parse_err(i + 1, "bad clause count"))?;
                header = Some((n, m));
                continue;
            }
            let (n, _) = header.ok_or_else(|| parse_err(i + 1, "clause before header"))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| parse_err(i + 1, format!("bad literal `{tok}`")))?;
                if v == 0 {
                    clauses.push(pad_clause(&current).ok_or_else(|| match current.len() {
                        0 => parse_err(i + 1, "empty clause"),
                        _ => parse_err(i + 1, "clause with more than 3 literals"),
                    })?);
                    current.clear();
                    continue;
                }
                let var = v.unsigned_abs() as usize - 1;
                if var >= n {
                    return Err(ReduceError::VariableOutOfRange { var, num_vars: n });
                }
                current.push(Literal { var, negated: v < 0 });
            }
        }
        let (n, m) = header.ok_or_else(|| parse_err(last_line, "missing `p cnf` header"))?;
        if !current.is_empty() {
            clauses.push(pad_clause(&current).ok_or_else(|| {
                parse_err(last_line, "clause with more than 3 literals")
            })?);
        }
        if clauses.len() != m {
            return Err(parse_err(
                last_line,
                format!("header declares {m} clauses, found {}", clauses.len()),
            ));
        }
        CnfFormula::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for cl in &self.clauses {
            let _ = writeln!(out, "{} {} {} 0", cl[0].dimacs(), cl[1].dimacs(), cl[2].dimacs());
        }
        out
    }

    /// An empty clause list is satisfied by every assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|cl| cl.iter().any(|l| l.eval(assignment)))
    }

    /// Uniformly random clauses over `num_vars ≥ 1` variables.
    pub fn random(num_vars: usize, num_clauses: usize, rng: &mut impl Rng) -> Self {
        let lit = |rng: &mut dyn rand::RngCore| Literal {
            var: rng.gen_range(0..num_vars),
            negated: rng.gen_bool(0.5),
        };
        let clauses = (0..num_clauses).map(|_| [lit(rng), lit(rng), lit(rng)]).collect();
        CnfFormula { num_vars, clauses }
    }
}

fn pad_clause(lits: &[Literal]) -> Option<[Literal; 3]> {
    match *lits {
        [a] => Some([a, a, a]),
        [a, b] => Some([a, b, b]),
        [a, b, c] => Some([a, b, c]),
        _ => None,
    }
}

/// A simple undirected graph; edges are stored as `(min, max)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ReduceError> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(ReduceError::InvalidGraph(format!("loop at vertex {u}")));
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(ReduceError::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(ReduceError::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Graph { num_vertices, edges: set })
    }

    /// Parses `p edge <n> <m>` followed by `e <u> <v>` lines, vertices
    /// numbered from 1.
    pub fn parse_dimacs(text: &str) -> Result<Self, ReduceError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            last_line = i + 1;
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(i + 1, format!("bad number `{s}`")));
            match parts[0] {
                "p" if parts.len() == 4 && parts[1] == "edge" && header.is_none() => {
                    header = Some((num(parts[2])?, num(parts[3])?));
                }
                "e" if parts.len() == 3 => {
                    header.ok_or_else(|| parse_err(i + 1, "edge before header"))?;
                    let (u, v) = (num(parts[1])?, num(parts[2])?);
                    if u == 0 || v == 0 {
                        return Err(parse_err(i + 1, "vertices are numbered from 1"));
                    }
                    edges.push((u - 1, v - 1));
                }
                _ => return Err(parse_err(i + 1, format!("unexpected line `{line}`"))),
            }
        }
        let (n, m) = header.ok_or_else(|| parse_err(last_line, "missing `p edge` header"))?;
        if edges.len() != m {
            return Err(parse_err(last_line, format!("header declares {m} edges, found {}", edges.len())));
        }
        Graph::new(n, &edges)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p edge {} {}\n", self.num_vertices, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }

    pub fn is_proper_coloring(&self, colors: &[usize]) -> bool {
        self.edges.iter().all(|&(u, v)| colors[u] != colors[v])
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, &edges).expect("complete graphs are simple")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    /// Is there an assignment with `p = target`?
    Satisfiability,
    /// Does `p = target` hold for every assignment?
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pipeline {
    Sat,
    Coloring,
}

/// Where a compiled instance came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_kind: Pipeline,
    /// SHA-256 of the canonical DIMACS text of the source.
    pub source_sha256: String,
    pub context_fingerprint: String,
}

#[derive(Clone, Debug)]
pub struct EquationInstance {
    pub polynomial: GroupPolynomial,
    pub target: Elem,
    pub mode: Mode,
    pub provenance: Provenance,
}

impl EquationInstance {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.polynomial.group()
    }
}

/// Size and timing of one compilation. The wall time is left out of the
/// serialized form so that written artifacts are reproducible.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionReport {
    /// Clauses or edges.
    pub m: usize,
    #[serde(with = "big_decimal")]
    pub flat_length: BigUint,
    pub log2_flat_length: f64,
    pub node_count: usize,
    pub pipeline: Pipeline,
    #[serde(rename = "C")]
    pub c: usize,
    /// Pipeline that carries hardness for this context.
    pub recommended_pipeline: Pipeline,
    #[serde(skip)]
    pub wall_time: Duration,
}

mod big_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The pair of instances produced by one compilation.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub satisfiability: EquationInstance,
    pub identity: EquationInstance,
    pub report: ReductionReport,
}

/// COLORING when there are at least three cosets of `H`, SAT otherwise:
/// 2-coloring is easy, so only `C ≥ 3` makes coloring meaningful.
pub fn choose_pipeline(ctx: &GadgetContext) -> Pipeline {
    if ctx.c() >= 3 {
        Pipeline::Coloring
    } else {
        Pipeline::Sat
    }
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn finish_reduction(
    ctx: &GadgetContext,
    polynomial: GroupPolynomial,
    pipeline: Pipeline,
    source: &str,
    m: usize,
    flat_length: BigUint,
    started: Instant,
) -> Reduction {
    let provenance = Provenance {
        source_kind: pipeline,
        source_sha256: sha256_hex(source),
        context_fingerprint: ctx.fingerprint(),
    };
    let report = ReductionReport {
        m,
        log2_flat_length: log2_big(&flat_length),
        flat_length,
        node_count: polynomial.node_count(),
        pipeline,
        c: ctx.c(),
        recommended_pipeline: choose_pipeline(ctx),
        wall_time: started.elapsed(),
    };
    let make = |target, mode| EquationInstance {
        polynomial: polynomial.clone(),
        target,
        mode,
        provenance: provenance.clone(),
    };
    Reduction {
        satisfiability: make(ctx.h_elem(1), Mode::Satisfiability),
        identity: make(ctx.g0.identity(), Mode::Identity),
        report,
    }
}

/// Compiles `Φ` into `SAT₁⁽ᵐ⁾` over the literal words.
pub fn reduce_sat(phi: &CnfFormula, ctx: &GadgetContext) -> Result<Reduction, ReduceError> {
    let started = Instant::now();
    if phi.clauses.is_empty() {
        return Err(ReduceError::EmptyFormula);
    }
    let mut b = PolyBuilder::new(ctx.g0.clone());
    let g = b.constant(ctx.g);
    let xs: Vec<NodeId> = (0..phi.num_vars).map(|k| b.var(k)).collect();
    let slot = |b: &mut PolyBuilder, l: Literal| {
        if l.negated {
            xs[l.var]
        } else {
            b.mul(g, xs[l.var])
        }
    };
    let clauses: Vec<[NodeId; 3]> = phi
        .clauses
        .iter()
        .map(|cl| [slot(&mut b, cl[0]), slot(&mut b, cl[1]), slot(&mut b, cl[2])])
        .collect();
    let root = ctx.sat_nodes(&mut b, 1, &clauses);
    let polynomial = b.finish(root, phi.num_vars);
    let len = |l: Literal| BigUint::from(if l.negated { 1u32 } else { 2 });
    let slot_lengths: Vec<[BigUint; 3]> =
        phi.clauses.iter().map(|cl| [len(cl[0]), len(cl[1]), len(cl[2])]).collect();
    let flat_length = ctx.sat_length(1, &slot_lengths);
    Ok(finish_reduction(
        ctx,
        polynomial,
        Pipeline::Sat,
        &phi.to_dimacs(),
        phi.clauses.len(),
        flat_length,
        started,
    ))
}

/// Compiles `Γ` into `AND₁⁽ᵐ⁾` over the edge words `x_u·x_v⁻¹`. An
/// edgeless graph compiles to the constant `h₁`.
pub fn reduce_coloring(graph: &Graph, ctx: &GadgetContext) -> Result<Reduction, ReduceError> {
    let started = Instant::now();
    let mut b = PolyBuilder::new(ctx.g0.clone());
    let xs: Vec<NodeId> = (0..graph.num_vertices).map(|v| b.var(v)).collect();
    let inputs: Vec<NodeId> = graph
        .edges
        .iter()
        .map(|&(u, v)| {
            let vi = b.inv(xs[v]);
            b.mul(xs[u], vi)
        })
        .collect();
    let root = ctx.and_nodes(&mut b, 1, &inputs);
    let polynomial = b.finish(root, graph.num_vertices);
    let flat_length = ctx.and_length(1, &vec![BigUint::from(2u32); inputs.len()]);
    Ok(finish_reduction(
        ctx,
        polynomial,
        Pipeline::Coloring,
        &graph.to_dimacs(),
        graph.edges.len(),
        flat_length,
        started,
    ))
}

/// `X_k` is true exactly when `x_k ∉ H`; the result is checked against `Φ`.
pub fn lift_sat_witness(
    phi: &CnfFormula,
    ctx: &GadgetContext,
    assignment: &[Elem],
) -> Result<Vec<bool>, ReduceError> {
    if assignment.len() != phi.num_vars {
        return Err(ReduceError::ArityMismatch { expected: phi.num_vars, got: assignment.len() });
    }
    let bools: Vec<bool> = assignment.iter().map(|&x| !ctx.h.contains(x)).collect();
    if !phi.evaluate(&bools) {
        return Err(ReduceError::WitnessInvalid);
    }
    Ok(bools)
}

/// Colors are the cosets of `H`; the result is checked against `Γ`.
pub fn lift_coloring_witness(
    graph: &Graph,
    ctx: &GadgetContext,
    assignment: &[Elem],
) -> Result<Vec<usize>, ReduceError> {
    if assignment.len() != graph.num_vertices {
        return Err(ReduceError::ArityMismatch {
            expected: graph.num_vertices,
            got: assignment.len(),
        });
    }
    let colors: Vec<usize> = assignment.iter().map(|&x| ctx.coset_index(x)).collect();
    if !graph.is_proper_coloring(&colors) {
        return Err(ReduceError::WitnessInvalid);
    }
    Ok(colors)
}

/// Group assignment for a boolean one: true ↦ `g⁻¹`, false ↦ `1`. Then a
/// positive literal's word `g·x` is `1 ∈ H` exactly when the variable is
/// true, and a negative literal's word `x` lies in `H` exactly when it is
/// false.
pub fn embed_sat_assignment(ctx: &GadgetContext, bools: &[bool]) -> Vec<Elem> {
    let gi = ctx.g0.inv(ctx.g);
    bools.iter().map(|&b| if b { gi } else { ctx.g0.identity() }).collect()
}

/// Group assignment for a coloring: color `c` ↦ a fixed representative of
/// the `c`-th coset of `H`.
pub fn embed_coloring(ctx: &GadgetContext, colors: &[usize]) -> Vec<Elem> {
    let reps = coset_representatives(ctx);
    colors.iter().map(|&c| reps[c]).collect()
}

/// Smallest element of each coset of `H`, in coset-index order.
pub fn coset_representatives(ctx: &GadgetContext) -> Vec<Elem> {
    let mut reps = vec![None; ctx.c()];
    for x in ctx.g0.elements() {
        let i = ctx.coset_index(x);
        reps[i].get_or_insert(x);
    }
    reps.into_iter().map(|r| r.expect("every coset is nonempty")).collect()
}

/// One question in a bundle manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestInstance {
    pub mode: Mode,
    pub target: Elem,
}

/// `manifest.json` of an instance bundle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub group_file: String,
    pub polynomial_file: String,
    pub variables: usize,
    pub instances: Vec<ManifestInstance>,
    pub provenance: Provenance,
    pub report: ReductionReport,
}

/// Writes `group.json`, `polynomial.slp` and `manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, red: &Reduction) -> Result<(), ReduceError> {
    std::fs::create_dir_all(dir)?;
    let poly = &red.satisfiability.polynomial;
    let group = GroupFile::describe(poly.group());
    std::fs::write(dir.join(GROUP_FILE), group.to_json() + "\n")?;
    std::fs::write(dir.join(POLYNOMIAL_FILE), poly.to_slp())?;
    let manifest = Manifest {
        group_file: GROUP_FILE.into(),
        polynomial_file: POLYNOMIAL_FILE.into(),
        variables: poly.var_arity(),
        instances: [&red.satisfiability, &red.identity]
            .iter()
            .map(|i| ManifestInstance { mode: i.mode, target: i.target })
            .collect(),
        provenance: red.satisfiability.provenance.clone(),
        report: red.report.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(())
}

/// Reads a bundle back as one instance per manifest entry.
pub fn read_bundle(dir: &Path) -> Result<(Manifest, Vec<EquationInstance>), ReduceError> {
    let manifest_text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| ReduceError::Bundle(format!("manifest: {e}")))?;
    let group_text = std::fs::read_to_string(dir.join(&manifest.group_file))?;
    let group = Arc::new(GroupFile::parse(&group_text)?.load()?);
    let slp = std::fs::read_to_string(dir.join(&manifest.polynomial_file))?;
    let polynomial = GroupPolynomial::from_slp(&slp, group.clone(), Some(manifest.variables))?;
    let mut instances = Vec::new();
    for mi in &manifest.instances {
        group.check(mi.target)?;
        instances.push(EquationInstance {
            polynomial: polynomial.clone(),
            target: mi.target,
            mode: mi.mode,
            provenance: manifest.provenance.clone(),
        });
    }
    Ok((manifest, instances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn s4() -> GadgetContext {
        GadgetContext::prepare(&builtin("S4").unwrap()).unwrap()
    }

    #[test]
    fn dimacs_round_trip_and_padding() {
        let phi = CnfFormula::parse_dimacs("c demo\np cnf 3 2\n1 -2 0\n3\n-1 2 0\n").unwrap();
        assert_eq!(phi.num_vars, 3);
        assert_eq!(phi.clauses[0], [Literal::pos(0), Literal::neg(1), Literal::neg(1)]);
        assert_eq!(phi.clauses[1], [Literal::pos(2), Literal::neg(0), Literal::pos(1)]);
        assert_eq!(CnfFormula::parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }

    #[test]
    fn dimacs_errors() {
        for bad in [
            "1 2 0\n",
            "p cnf 2 1\n1 3 0\n",
            "p cnf 2 1\n0\n",
            "p cnf 4 1\n1 2 3 4 0\n",
            "p cnf 2 2\n1 2 0\n",
            "p cnf x 1\n",
            "p cnf 2 1\n1 a 0\n",
        ] {
            assert!(CnfFormula::parse_dimacs(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn graph_parsing() {
        let g = Graph::parse_dimacs("p edge 3 3\ne 1 2\ne 2 3\ne 3 1\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert_eq!(Graph::parse_dimacs(&g.to_dimacs()).unwrap(), g);
        for bad in ["p edge 2 1\ne 1 1\n", "p edge 2 2\ne 1 2\ne 2 1\n", "p edge 2 1\ne 1 3\n", "e 1 2\n"] {
            assert!(Graph::parse_dimacs(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn single_variable_formula_has_one_group_variable() {
        let ctx = s4();
        let phi = CnfFormula::new(1, vec![[Literal::pos(0); 3]]).unwrap();
        let red = reduce_sat(&phi, &ctx).unwrap();
        assert_eq!(red.satisfiability.polynomial.var_arity(), 1);
        assert_eq!(red.report.pipeline, Pipeline::Sat);
        assert_eq!(red.report.c, 2);
        assert_eq!(red.satisfiability.target, ctx.h_elem(1));
        assert_eq!(red.identity.target, ctx.g0.identity());
        assert_eq!(red.report.flat_length, red.satisfiability.polynomial.flat_length());
    }

    #[test]
    fn empty_formula_is_rejected() {
        let ctx = s4();
        let phi = CnfFormula::new(2, vec![]).unwrap();
        assert!(phi.evaluate(&[false, false]));
        assert!(matches!(reduce_sat(&phi, &ctx), Err(ReduceError::EmptyFormula)));
    }

    #[test]
    fn embedded_assignments_hit_the_target() {
        let ctx = s4();
        let phi = CnfFormula::new(2, vec![[Literal::pos(0), Literal::neg(1), Literal::neg(1)]]).unwrap();
        let red = reduce_sat(&phi, &ctx).unwrap();
        for bits in 0..4u8 {
            let bools = [bits & 1 == 1, bits & 2 == 2];
            let a = embed_sat_assignment(&ctx, &bools);
            let v = red.satisfiability.polynomial.evaluate(&a).unwrap();
            let want = if phi.evaluate(&bools) { ctx.h_elem(1) } else { ctx.g0.identity() };
            assert_eq!(v, want, "{bools:?}");
        }
    }

    #[test]
    fn edgeless_graph_is_constant() {
        let ctx = s4();
        let g = Graph::new(3, &[]).unwrap();
        let red = reduce_coloring(&g, &ctx).unwrap();
        let a = vec![ctx.g0.identity(); 3];
        assert_eq!(red.satisfiability.polynomial.evaluate(&a).unwrap(), ctx.h_elem(1));
        assert_eq!(lift_coloring_witness(&g, &ctx, &a).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn bundle_round_trip() {
        let ctx = s4();
        let phi = CnfFormula::new(2, vec![[Literal::pos(0), Literal::neg(1), Literal::pos(1)]]).unwrap();
        let red = reduce_sat(&phi, &ctx).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), &red).unwrap();
        let (manifest, instances) = read_bundle(dir.path()).unwrap();
        assert_eq!(manifest.instances.len(), 2);
        assert_eq!(instances[0].mode, Mode::Satisfiability);
        assert_eq!(instances[1].target, Elem(0));
        let p = &red.satisfiability.polynomial;
        let q = &instances[0].polynomial;
        for x in 0..24u32 {
            for y in 0..24u32 {
                let a = [Elem(x), Elem(y)];
                assert_eq!(p.evaluate(&a).unwrap(), q.evaluate(&a).unwrap());
            }
        }
    }
}
