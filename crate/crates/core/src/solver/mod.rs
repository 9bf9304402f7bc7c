//! Internal LP and MILP solving: bounded-variable revised simplex plus
//! branch-and-bound, so every benchmark and oracle in this crate runs
//! without an external solver.
//!
//! Branching fixes the most fractional binary; nodes are explored in
//! best-bound order with ids as tie-breaks, and the simplex warm-starts from
//! whatever basis the previously processed node left behind (a basis stays
//! valid under bound changes). No presolve and no cutting planes: solve
//! times reflect the raw branch-and-bound effort, so timing comparisons
//! between formulations are about their variable and constraint counts.

mod simplex;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::milp_model::{MilpProblem, Relation, Sense};
use simplex::{Simplex, SimplexStatus};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of a linear relaxation.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the problem's own sense; meaningful only when optimal.
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    TimeLimit,
}

/// Solution of a mixed-integer solve.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent objective in the problem's own sense (NaN when none).
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
    /// Number of LP solves performed (root, heuristic probe and nodes).
    pub node_count: u64,
    /// Wall-clock seconds spent inside the solve.
    pub wall_time: f64,
    /// Proven bound in the problem's own sense at termination.
    pub best_bound: f64,
}

/// Stopping controls for [`solve_milp`].
#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub time_limit: Option<f64>,
    /// Absolute optimality gap that counts as proven.
    pub gap_absolute: f64,
    /// Relative gap (fraction of the incumbent magnitude); the effective gap
    /// is the larger of the two.
    pub gap_relative: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            time_limit: None,
            gap_absolute: 1e-6,
            gap_relative: 0.0,
        }
    }
}

struct Instance {
    simplex: Simplex,
    names: Vec<String>,
    binary_cols: Vec<usize>,
    /// +1 for minimize, -1 for maximize (internal objective is minimized).
    flip: f64,
}

fn build_instance(problem: &MilpProblem) -> Result<Instance> {
    let n_cont = problem.continuous().len();
    let n_total = n_cont + problem.binaries().len();
    let mut names = Vec::with_capacity(n_total);
    let mut index: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::with_capacity(n_total);
    let mut lo = Vec::with_capacity(n_total);
    let mut hi = Vec::with_capacity(n_total);
    for var in problem.continuous() {
        index.insert(var.name.as_str(), names.len());
        names.push(var.name.clone());
        lo.push(var.lower);
        hi.push(var.upper);
    }
    for bin in problem.binaries() {
        index.insert(bin.as_str(), names.len());
        names.push(bin.clone());
        lo.push(0.0);
        hi.push(1.0);
    }

    let flip = match problem.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut obj = vec![0.0; n_total];
    for (name, coef) in problem.objective_terms() {
        let j = *index
            .get(name.as_str())
            .ok_or_else(|| Error::InvalidProblem(format!("objective variable '{name}'")))?;
        obj[j] += flip * coef;
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_total];
    let mut rhs = Vec::with_capacity(problem.constraints().len());
    let mut slack_bounds = Vec::with_capacity(problem.constraints().len());
    for (row, con) in problem.constraints().iter().enumerate() {
        for (name, coef) in &con.terms {
            let j = *index.get(name.as_str()).ok_or_else(|| {
                Error::InvalidProblem(format!(
                    "constraint '{}' variable '{name}'",
                    con.name
                ))
            })?;
            if *coef != 0.0 {
                cols[j].push((row, *coef));
            }
        }
        rhs.push(con.rhs);
        slack_bounds.push(match con.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        });
    }

    let binary_cols = (n_cont..n_total).collect();
    Ok(Instance {
        simplex: Simplex::new(cols, obj, lo, hi, rhs, slack_bounds),
        names,
        binary_cols,
        flip,
    })
}

fn extract_values(inst: &Instance) -> BTreeMap<String, f64> {
    inst.names
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), inst.simplex.value(j)))
        .collect()
}

/// Solves the linear relaxation (binaries relaxed to [0,1]).
pub fn solve_lp(problem: &MilpProblem) -> Result<LpSolution> {
    let mut inst = build_instance(problem)?;
    let status = inst.simplex.solve()?;
    let (status, objective) = match status {
        SimplexStatus::Optimal => (LpStatus::Optimal, inst.flip * inst.simplex.objective_value()),
        SimplexStatus::Infeasible => (LpStatus::Infeasible, f64::NAN),
        SimplexStatus::Unbounded => (LpStatus::Unbounded, f64::NAN),
    };
    let values = if status == LpStatus::Optimal {
        extract_values(&inst)
    } else {
        BTreeMap::new()
    };
    Ok(LpSolution {
        status,
        objective,
        values,
    })
}

struct Fix {
    parent: Option<Rc<Fix>>,
    col: usize,
    value: u8,
}

fn chain_fixes(chain: &Option<Rc<Fix>>) -> Vec<(usize, u8)> {
    let mut fixes = Vec::new();
    let mut cursor = chain.as_ref();
    while let Some(fix) = cursor {
        fixes.push((fix.col, fix.value));
        cursor = fix.parent.as_ref();
    }
    fixes
}

struct Node {
    id: u64,
    bound: f64,
    chain: Option<Rc<Fix>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the lowest bound first; id breaks ties
    // in creation order for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn apply_node(inst: &mut Instance, chain: &Option<Rc<Fix>>) {
    for &col in &inst.binary_cols {
        inst.simplex.set_bounds(col, 0.0, 1.0);
    }
    for (col, value) in chain_fixes(chain) {
        let v = value as f64;
        inst.simplex.set_bounds(col, v, v);
    }
}

/// Most fractional binary, or None when the point is integral.
fn most_fractional(inst: &Instance) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &col in &inst.binary_cols {
        let v = inst.simplex.value(col);
        let dist = (v - v.round()).abs();
        if dist <= INT_TOL {
            continue;
        }
        let frac = (v - 0.5).abs();
        if best.as_ref().map_or(true, |(_, f)| frac < *f) {
            best = Some((col, frac));
        }
    }
    best.map(|(col, _)| col)
}

/// Branch-and-bound with LP relaxations.
pub fn solve_milp(problem: &MilpProblem, options: &MilpOptions) -> Result<MilpSolution> {
    let start = Instant::now();
    let mut inst = build_instance(problem)?;
    let mut node_count: u64 = 0;

    let root_status = inst.simplex.solve()?;
    node_count += 1;
    match root_status {
        SimplexStatus::Infeasible => {
            return Ok(MilpSolution {
                status: MilpStatus::Infeasible,
                objective: f64::NAN,
                values: BTreeMap::new(),
                node_count,
                wall_time: start.elapsed().as_secs_f64(),
                best_bound: f64::NAN,
            });
        }
        SimplexStatus::Unbounded => {
            return Err(Error::SolverFailure(
                "relaxation is unbounded; the integer problem is ill-posed".into(),
            ));
        }
        SimplexStatus::Optimal => {}
    }
    let root_bound = inst.simplex.objective_value();

    // Incumbent in internal (minimization) objective, with structural values.
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let snapshot = |inst: &Instance| -> Vec<f64> {
        (0..inst.names.len()).map(|j| inst.simplex.value(j)).collect()
    };

    let gap = |inc: f64, opts: &MilpOptions| -> f64 {
        opts.gap_absolute.max(opts.gap_relative * inc.abs())
    };

    let mut queue: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id: u64 = 0;

    if inst.binary_cols.is_empty() || most_fractional(&inst).is_none() {
        let obj = root_bound;
        let values = snapshot(&inst);
        incumbent = Some((obj, values));
    } else {
        // Rounding probe: fix every binary to its rounded relaxation value
        // for a quick incumbent.
        let rounded: Vec<(usize, f64)> = inst
            .binary_cols
            .iter()
            .map(|&col| (col, inst.simplex.value(col).round().clamp(0.0, 1.0)))
            .collect();
        for &(col, v) in &rounded {
            inst.simplex.set_bounds(col, v, v);
        }
        if inst.simplex.solve()? == SimplexStatus::Optimal {
            incumbent = Some((inst.simplex.objective_value(), snapshot(&inst)));
        }
        node_count += 1;
        for &col in &inst.binary_cols {
            inst.simplex.set_bounds(col, 0.0, 1.0);
        }

        // Branch the root.
        let root_chain: Option<Rc<Fix>> = None;
        // Re-establish the root solution for the branching decision: the
        // probe moved the basis, so re-solve (warm, typically few pivots).
        inst.simplex.solve()?;
        node_count += 1;
        if let Some(col) = most_fractional(&inst) {
            for value in [0u8, 1u8] {
                queue.push(Node {
                    id: next_id,
                    bound: root_bound,
                    chain: Some(Rc::new(Fix {
                        parent: root_chain.clone(),
                        col,
                        value,
                    })),
                });
                next_id += 1;
            }
        } else if let Some((obj, values)) = Some((inst.simplex.objective_value(), snapshot(&inst)))
        {
            // The re-solve came back integral.
            if incumbent.as_ref().map_or(true, |(best, _)| obj < *best) {
                incumbent = Some((obj, values));
            }
        }
    }

    let mut status = MilpStatus::Optimal;
    let mut best_bound = root_bound;
    while let Some(node) = queue.pop() {
        best_bound = node.bound;
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= inc_obj - gap(*inc_obj, options) - 1e-12 {
                // Best-bound order: every remaining node proves the same.
                best_bound = node.bound.min(*inc_obj);
                break;
            }
        }
        if let Some(limit) = options.time_limit {
            if start.elapsed().as_secs_f64() > limit {
                status = MilpStatus::TimeLimit;
                break;
            }
        }

        apply_node(&mut inst, &node.chain);
        let node_status = inst.simplex.solve()?;
        node_count += 1;
        if node_status == SimplexStatus::Unbounded {
            return Err(Error::SolverFailure(
                "node relaxation unbounded; the integer problem is ill-posed".into(),
            ));
        }
        if node_status == SimplexStatus::Infeasible {
            continue;
        }
        let obj = inst.simplex.objective_value();
        if let Some((inc_obj, _)) = &incumbent {
            if obj >= inc_obj - gap(*inc_obj, options) - 1e-12 {
                continue;
            }
        }
        match most_fractional(&inst) {
            None => {
                if incumbent.as_ref().map_or(true, |(best, _)| obj < *best) {
                    incumbent = Some((obj, snapshot(&inst)));
                }
            }
            Some(col) => {
                let bound = obj.max(node.bound);
                for value in [0u8, 1u8] {
                    queue.push(Node {
                        id: next_id,
                        bound,
                        chain: Some(Rc::new(Fix {
                            parent: node.chain.clone(),
                            col,
                            value,
                        })),
                    });
                    next_id += 1;
                }
            }
        }
    }
    if queue.is_empty() && status == MilpStatus::Optimal {
        if let Some((inc_obj, _)) = &incumbent {
            best_bound = *inc_obj;
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    match incumbent {
        Some((obj, values)) => {
            let map: BTreeMap<String, f64> = inst
                .names
                .iter()
                .cloned()
                .zip(values)
                .collect();
            debug_assert!(best_bound <= obj + 1e-9, "dual bound exceeds incumbent");
            Ok(MilpSolution {
                status,
                objective: inst.flip * obj,
                values: map,
                node_count,
                wall_time,
                best_bound: inst.flip * best_bound,
            })
        }
        None => Ok(MilpSolution {
            status: if status == MilpStatus::TimeLimit {
                MilpStatus::TimeLimit
            } else {
                MilpStatus::Infeasible
            },
            objective: f64::NAN,
            values: BTreeMap::new(),
            node_count,
            wall_time,
            best_bound: inst.flip * best_bound,
        }),
    }
}
