//! Bounded-variable revised simplex on a row-equality standard form.
//!
//! Every constraint `a.x REL b` carries one slack column with bounds encoding
//! the relation, giving `A x + s = b`. The basis starts at the slacks and the
//! dense basis inverse is maintained explicitly with product-form updates;
//! phase 1 minimizes the total bound violation of the basic variables, which
//! warm-starts cleanly from any basis after bound changes (the key operation
//! branch-and-bound needs).
//!
//! Pricing is Dantzig's rule with an automatic switch to Bland's rule during
//! degenerate stalls. All tie-breaks are index-based, so identical inputs
//! take identical pivot sequences.

use crate::error::{Error, Result};

pub(crate) const FEAS_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const STALL_LIMIT: u32 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NbState {
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Flip(f64),
    Pivot {
        row: usize,
        step: f64,
        to_upper: bool,
    },
    Unblocked,
}

pub(crate) struct Simplex {
    m: usize,
    /// Structural column count; columns `n..n+m` are the slacks.
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    basic_pos: Vec<i32>,
    state: Vec<NbState>,
    /// Dense basis inverse, row-major m*m.
    binv: Vec<f64>,
    xb: Vec<f64>,
    scratch_u: Vec<f64>,
    scratch_y: Vec<f64>,
    scratch_row: Vec<f64>,
    scratch_r: Vec<f64>,
    pivot_count: u64,
}

fn initial_state(lo: f64, hi: f64) -> NbState {
    if lo.is_finite() {
        NbState::AtLower
    } else if hi.is_finite() {
        NbState::AtUpper
    } else {
        NbState::Free
    }
}

impl Simplex {
    /// Builds the solver for `min obj . x` subject to the sparse structural
    /// columns, right-hand sides and slack bounds. `slack_bounds[i]` encodes
    /// the relation of row i ((0, inf) for <=, (-inf, 0) for >=, (0,0) for =).
    pub(crate) fn new(
        structural_cols: Vec<Vec<(usize, f64)>>,
        obj: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        rhs: Vec<f64>,
        slack_bounds: Vec<(f64, f64)>,
    ) -> Simplex {
        let n = structural_cols.len();
        let m = rhs.len();
        debug_assert_eq!(slack_bounds.len(), m);
        let mut cols = structural_cols;
        let mut full_lo = lo;
        let mut full_hi = hi;
        let mut full_obj = obj;
        for (i, (slo, shi)) in slack_bounds.into_iter().enumerate() {
            cols.push(vec![(i, 1.0)]);
            full_lo.push(slo);
            full_hi.push(shi);
            full_obj.push(0.0);
        }
        let total = n + m;
        let mut basic_pos = vec![-1i32; total];
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            basis.push(n + i);
            basic_pos[n + i] = i as i32;
        }
        let state = (0..total)
            .map(|j| initial_state(full_lo[j], full_hi[j]))
            .collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Simplex {
            m,
            n,
            cols,
            rhs,
            lo: full_lo,
            hi: full_hi,
            obj: full_obj,
            basis,
            basic_pos,
            state,
            binv,
            xb: vec![0.0; m],
            scratch_u: vec![0.0; m],
            scratch_y: vec![0.0; m],
            scratch_row: vec![0.0; m],
            scratch_r: vec![0.0; m],
            pivot_count: 0,
        }
    }

    /// Changes the bounds of a structural column. The basis is untouched;
    /// the next [`Simplex::solve`] re-establishes feasibility from it.
    pub(crate) fn set_bounds(&mut self, col: usize, lo: f64, hi: f64) {
        debug_assert!(col < self.n);
        self.lo[col] = lo;
        self.hi[col] = hi;
        if self.basic_pos[col] < 0 {
            // Keep the stored state meaningful for the new bounds.
            self.state[col] = match self.state[col] {
                NbState::AtLower if lo.is_finite() => NbState::AtLower,
                NbState::AtUpper if hi.is_finite() => NbState::AtUpper,
                _ => initial_state(lo, hi),
            };
        }
    }

    fn nb_value(&self, j: usize) -> f64 {
        match self.state[j] {
            NbState::AtLower => self.lo[j],
            NbState::AtUpper => self.hi[j],
            NbState::Free => 0.0,
        }
    }

    /// Current value of any column.
    pub(crate) fn value(&self, j: usize) -> f64 {
        let pos = self.basic_pos[j];
        if pos >= 0 {
            self.xb[pos as usize]
        } else {
            self.nb_value(j)
        }
    }

    pub(crate) fn objective_value(&self) -> f64 {
        (0..self.n).map(|j| self.obj[j] * self.value(j)).sum()
    }

    fn compute_xb(&mut self) {
        let m = self.m;
        self.scratch_r.copy_from_slice(&self.rhs);
        for j in 0..self.n + m {
            if self.basic_pos[j] >= 0 {
                continue;
            }
            let v = self.nb_value(j);
            if v != 0.0 {
                for &(row, a) in &self.cols[j] {
                    self.scratch_r[row] -= a * v;
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (b, r) in row.iter().zip(&self.scratch_r) {
                acc += b * r;
            }
            self.xb[i] = acc;
        }
    }

    /// u = B^-1 a_j into the scratch buffer.
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        self.scratch_u[..m].fill(0.0);
        for &(row, a) in &self.cols[j] {
            if a == 0.0 {
                continue;
            }
            for i in 0..m {
                self.scratch_u[i] += a * self.binv[i * m + row];
            }
        }
    }

    /// Rebuilds the basis inverse from scratch by Gauss-Jordan elimination
    /// with partial pivoting.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(row, a) in &self.cols[j] {
                dense[row * m + pos] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = dense[col * m + col].abs();
            for r in col + 1..m {
                let v = dense[r * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return Err(Error::SolverFailure(format!(
                    "singular basis during refactorization (column {col})"
                )));
            }
            if piv_row != col {
                for k in 0..m {
                    dense.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let piv = dense[col * m + col];
            for k in 0..m {
                dense[col * m + k] /= piv;
                inv[col * m + k] /= piv;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = dense[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        dense[r * m + k] -= f * dense[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        Ok(())
    }

    fn total_infeasibility(&self) -> f64 {
        let mut total = 0.0;
        for (pos, &j) in self.basis.iter().enumerate() {
            let v = self.xb[pos];
            if v < self.lo[j] {
                total += self.lo[j] - v;
            } else if v > self.hi[j] {
                total += v - self.hi[j];
            }
        }
        total
    }

    /// Reduced-cost vector buildup: y = c_B B^-1 for a sparse basic cost
    /// assignment, written into `scratch_y`.
    fn build_dual(&mut self, basic_costs: impl Iterator<Item = (usize, f64)>) {
        let m = self.m;
        self.scratch_y[..m].fill(0.0);
        for (pos, c) in basic_costs {
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for (yk, b) in self.scratch_y.iter_mut().zip(row) {
                *yk += c * b;
            }
        }
    }

    fn reduced_cost(&self, j: usize, with_obj: bool) -> f64 {
        let mut d = if with_obj { self.obj[j] } else { 0.0 };
        for &(row, a) in &self.cols[j] {
            d -= self.scratch_y[row] * a;
        }
        d
    }

    /// Picks the entering column. Returns (column, direction).
    fn price(&self, with_obj: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            if self.basic_pos[j] >= 0 {
                continue;
            }
            let d = self.reduced_cost(j, with_obj);
            let dir = match self.state[j] {
                NbState::AtLower => {
                    if d < -COST_TOL {
                        1.0
                    } else {
                        continue;
                    }
                }
                NbState::AtUpper => {
                    if d > COST_TOL {
                        -1.0
                    } else {
                        continue;
                    }
                }
                NbState::Free => {
                    if d < -COST_TOL {
                        1.0
                    } else if d > COST_TOL {
                        -1.0
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if best.as_ref().map_or(true, |(_, _, s)| score > *s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Bounded ratio test. `phase1` lets infeasible basics run to the bound
    /// they violate (where they become feasible) instead of blocking early.
    fn ratio_test(&self, q: usize, dir: f64, phase1: bool) -> Block {
        let mut best_step = f64::INFINITY;
        let mut best_row: Option<(usize, f64, bool)> = None; // (row, |u|, to_upper)

        let own_range = self.hi[q] - self.lo[q];
        let flip_step = if own_range.is_finite() { own_range } else { f64::INFINITY };

        for i in 0..self.m {
            let u_i = self.scratch_u[i];
            if u_i.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let delta = -dir * u_i; // change of xb[i] per unit step
            let v = self.xb[i];
            let (lo, hi) = (self.lo[j], self.hi[j]);
            let below = phase1 && v < lo - FEAS_TOL;
            let above = phase1 && v > hi + FEAS_TOL;
            let (step, to_upper) = if below {
                if delta > 0.0 {
                    ((lo - v) / delta, false)
                } else {
                    continue;
                }
            } else if above {
                if delta < 0.0 {
                    ((hi - v) / delta, true)
                } else {
                    continue;
                }
            } else if delta > 0.0 {
                if hi.is_finite() {
                    (((hi - v) / delta).max(0.0), true)
                } else {
                    continue;
                }
            } else {
                if lo.is_finite() {
                    (((lo - v) / delta).max(0.0), false)
                } else {
                    continue;
                }
            };
            let step = step.max(0.0);
            if step < best_step - 1e-9 {
                best_step = step;
                best_row = Some((i, u_i.abs(), to_upper));
            } else if step <= best_step + 1e-9 {
                // Tie: prefer the larger pivot magnitude for stability.
                if let Some((_, mag, _)) = best_row {
                    if u_i.abs() > mag {
                        best_step = best_step.min(step);
                        best_row = Some((i, u_i.abs(), to_upper));
                    }
                } else {
                    best_step = step;
                    best_row = Some((i, u_i.abs(), to_upper));
                }
            }
        }

        match best_row {
            Some((row, _, to_upper)) if best_step <= flip_step => Block::Pivot {
                row,
                step: best_step,
                to_upper,
            },
            _ if flip_step.is_finite() => Block::Flip(flip_step),
            Some((row, _, to_upper)) => Block::Pivot {
                row,
                step: best_step,
                to_upper,
            },
            None => Block::Unblocked,
        }
    }

    fn apply_flip(&mut self, q: usize, dir: f64, step: f64) {
        for i in 0..self.m {
            let u_i = self.scratch_u[i];
            if u_i != 0.0 {
                self.xb[i] -= dir * step * u_i;
            }
        }
        self.state[q] = match self.state[q] {
            NbState::AtLower => NbState::AtUpper,
            NbState::AtUpper => NbState::AtLower,
            NbState::Free => unreachable!("free columns cannot bound-flip"),
        };
    }

    fn apply_pivot(&mut self, q: usize, dir: f64, row: usize, step: f64, to_upper: bool) {
        let m = self.m;
        let entering_value = self.nb_value(q) + dir * step;
        for i in 0..m {
            if i == row {
                continue;
            }
            let u_i = self.scratch_u[i];
            if u_i != 0.0 {
                self.xb[i] -= dir * step * u_i;
            }
        }
        let leaving = self.basis[row];
        self.basic_pos[leaving] = -1;
        self.state[leaving] = if to_upper {
            NbState::AtUpper
        } else {
            NbState::AtLower
        };
        self.basis[row] = q;
        self.basic_pos[q] = row as i32;
        self.xb[row] = entering_value;

        // Product-form update of the dense inverse.
        let piv = self.scratch_u[row];
        let row_slice = &mut self.binv[row * m..(row + 1) * m];
        for v in row_slice.iter_mut() {
            *v /= piv;
        }
        self.scratch_row.copy_from_slice(&self.binv[row * m..(row + 1) * m]);
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = self.scratch_u[i];
            if f == 0.0 {
                continue;
            }
            let target = &mut self.binv[i * m..(i + 1) * m];
            for (t, r) in target.iter_mut().zip(&self.scratch_row) {
                *t -= f * r;
            }
        }
        self.pivot_count += 1;
    }

    fn iteration_cap(&self) -> u64 {
        50 * (self.n + self.m) as u64 + 10_000
    }

    /// Phase 1: drive the total bound violation of the basic variables to
    /// zero. Returns false when the violation cannot be removed (infeasible).
    fn phase1(&mut self) -> Result<bool> {
        let mut bland = false;
        let mut stall: u32 = 0;
        let mut best_inf = f64::INFINITY;
        let cap = self.iteration_cap();
        let mut iters: u64 = 0;
        loop {
            let mut violated: Vec<(usize, f64)> = Vec::new();
            for (pos, &j) in self.basis.iter().enumerate() {
                let v = self.xb[pos];
                if v < self.lo[j] - FEAS_TOL {
                    violated.push((pos, -1.0));
                } else if v > self.hi[j] + FEAS_TOL {
                    violated.push((pos, 1.0));
                }
            }
            if violated.is_empty() {
                return Ok(true);
            }
            let inf = self.total_infeasibility();
            if inf < best_inf - 1e-12 {
                best_inf = inf;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            self.build_dual(violated.iter().copied());
            let Some((q, dir)) = self.price(false, bland) else {
                return Ok(false);
            };
            self.ftran(q);
            match self.ratio_test(q, dir, true) {
                Block::Flip(step) => self.apply_flip(q, dir, step),
                Block::Pivot { row, step, to_upper } => {
                    self.apply_pivot(q, dir, row, step, to_upper)
                }
                Block::Unblocked => {
                    return Err(Error::SolverFailure(
                        "phase 1 direction unbounded; numerical breakdown".into(),
                    ));
                }
            }
            iters += 1;
            if iters > cap {
                return Err(Error::SolverFailure(format!(
                    "phase 1 exceeded {cap} iterations"
                )));
            }
        }
    }

    fn phase2(&mut self) -> Result<SimplexStatus> {
        let mut bland = false;
        let mut stall: u32 = 0;
        let mut best_obj = f64::INFINITY;
        let cap = self.iteration_cap();
        let mut iters: u64 = 0;
        loop {
            let obj = self.objective_value();
            if obj < best_obj - 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }

            let costs: Vec<(usize, f64)> = self
                .basis
                .iter()
                .enumerate()
                .filter_map(|(pos, &j)| {
                    let c = self.obj[j];
                    (c != 0.0).then_some((pos, c))
                })
                .collect();
            self.build_dual(costs.into_iter());
            let Some((q, dir)) = self.price(true, bland) else {
                return Ok(SimplexStatus::Optimal);
            };
            self.ftran(q);
            match self.ratio_test(q, dir, false) {
                Block::Flip(step) => self.apply_flip(q, dir, step),
                Block::Pivot { row, step, to_upper } => {
                    self.apply_pivot(q, dir, row, step, to_upper)
                }
                Block::Unblocked => return Ok(SimplexStatus::Unbounded),
            }
            iters += 1;
            if iters > cap {
                return Err(Error::SolverFailure(format!(
                    "phase 2 exceeded {cap} iterations"
                )));
            }
        }
    }

    /// Largest violation of the original row equations and variable bounds
    /// at the current point.
    fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut activity = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            let v = self.value(j);
            worst = worst
                .max(self.lo[j] - v)
                .max(v - self.hi[j]);
            if v != 0.0 {
                for &(row, a) in &self.cols[j] {
                    activity[row] += a * v;
                }
            }
        }
        for i in 0..self.m {
            worst = worst.max((activity[i] - self.rhs[i]).abs());
        }
        worst
    }

    /// Solves from the current basis (warm) after recomputing basic values.
    pub(crate) fn solve(&mut self) -> Result<SimplexStatus> {
        self.compute_xb();
        for attempt in 0..2 {
            if !self.phase1()? {
                return Ok(SimplexStatus::Infeasible);
            }
            let status = self.phase2()?;
            if status == SimplexStatus::Unbounded {
                return Ok(status);
            }
            let residual = self.residual();
            if residual <= 1e-7 {
                return Ok(status);
            }
            if attempt == 0 {
                // Accumulated drift in the inverse; rebuild and resolve.
                self.refactor()?;
                self.compute_xb();
            } else {
                return Err(Error::SolverFailure(format!(
                    "residual {residual:.3e} after refactorization"
                )));
            }
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GE: (f64, f64) = (f64::NEG_INFINITY, 0.0);
    const LE: (f64, f64) = (0.0, f64::INFINITY);

    #[test]
    fn two_variable_lp() {
        // min x + y  s.t.  x + 2y >= 2, 2x + y >= 2, x, y >= 0.
        let cols = vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 2.0), (1, 1.0)]];
        let mut s = Simplex::new(
            cols,
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
            vec![2.0, 2.0],
            vec![GE, GE],
        );
        assert_eq!(s.solve().unwrap(), SimplexStatus::Optimal);
        assert!((s.objective_value() - 4.0 / 3.0).abs() < 1e-9);
        assert!((s.value(0) - 2.0 / 3.0).abs() < 1e-9);
        assert!((s.value(1) - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_bounds() {
        // y >= 1 and y <= 0.
        let cols = vec![vec![(0, 1.0), (1, 1.0)]];
        let mut s = Simplex::new(
            cols,
            vec![0.0],
            vec![f64::NEG_INFINITY],
            vec![f64::INFINITY],
            vec![1.0, 0.0],
            vec![GE, LE],
        );
        assert_eq!(s.solve().unwrap(), SimplexStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        // min -x with only x >= 0 as a row.
        let cols = vec![vec![(0, 1.0)]];
        let mut s = Simplex::new(
            cols,
            vec![-1.0],
            vec![0.0],
            vec![f64::INFINITY],
            vec![0.0],
            vec![GE],
        );
        assert_eq!(s.solve().unwrap(), SimplexStatus::Unbounded);
    }

    #[test]
    fn warm_restart_after_bound_change() {
        // min y s.t. y >= x, y >= 1 - x, x in [0,1].
        let cols = vec![
            vec![(0, -1.0), (1, 1.0)],
            vec![(0, 1.0), (1, 1.0)],
        ];
        let mut s = Simplex::new(
            cols,
            vec![0.0, 1.0],
            vec![0.0, f64::NEG_INFINITY],
            vec![1.0, f64::INFINITY],
            vec![0.0, 1.0],
            vec![(f64::NEG_INFINITY, 0.0), (f64::NEG_INFINITY, 0.0)],
        );
        assert_eq!(s.solve().unwrap(), SimplexStatus::Optimal);
        assert!((s.objective_value() - 0.5).abs() < 1e-9);
        // Fix x to 0.2 and re-solve warm: optimum becomes 0.8.
        s.set_bounds(0, 0.2, 0.2);
        assert_eq!(s.solve().unwrap(), SimplexStatus::Optimal);
        assert!((s.objective_value() - 0.8).abs() < 1e-9);
    }
}
