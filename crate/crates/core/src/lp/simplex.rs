//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Variables are shifted to `[0, upper - lower]`, rows and columns are
//! equilibrated with power-of-two factors (exact in floating point), and
//! upper bounds are handled by bound flipping rather than extra rows.
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots the solver switches to Bland's rule (lowest index enters, lowest
//! basic index leaves on ties) for the rest of the solve.

use nalgebra::{DMatrix, DVector};

use super::problem::StandardFormLp;
use super::validate::validate_solution;
use super::{LpSolution, LpStatus, FEASIBILITY_TOL};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum At {
    Lower,
    Upper,
    Basic,
}

struct Tableau {
    m: usize,
    width: usize,
    /// Structural columns, then one slack per row, then artificials.
    n_struct: usize,
    n_art: usize,
    /// Scaled constraint matrix including slack/artificial columns, kept for the final refactorization.
    original: Vec<f64>,
    rhs: Vec<f64>,
    tab: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<At>,
    upper: Vec<f64>,
    reduced: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

fn pow2_round(x: f64) -> f64 {
    if !x.is_finite() || x <= 0.0 {
        return 1.0;
    }
    2f64.powi(x.log2().round() as i32)
}

/// Geometric-mean equilibration, a few alternating passes.
fn equilibrate(lp: &StandardFormLp) -> (Vec<f64>, Vec<f64>) {
    let m = lp.num_rows();
    let n = lp.num_vars();
    let mut r = vec![1.0; m];
    let mut s = vec![1.0; n];
    for _ in 0..4 {
        for (i, row) in lp.rows().iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
            for &(v, a) in &row.terms {
                let x = (a * s[v.0]).abs();
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if hi > 0.0 {
                r[i] = pow2_round(1.0 / (lo * hi).sqrt());
            }
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0_f64; n];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(v, a) in &row.terms {
                let x = (a * r[i]).abs();
                lo[v.0] = lo[v.0].min(x);
                hi[v.0] = hi[v.0].max(x);
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                s[j] = pow2_round(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    (r, s)
}

impl Tableau {
    fn new(lp: &StandardFormLp, row_scale: &[f64], col_scale: &[f64]) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let vars = lp.variables();

        let mut rhs = vec![0.0; m];
        for (i, row) in lp.rows().iter().enumerate() {
            let shift: f64 = row.terms.iter().map(|&(v, a)| a * vars[v.0].lower).sum();
            rhs[i] = (row.rhs - shift) * row_scale[i];
        }
        let negative: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
        let n_art = negative.len();
        let width = n + m + n_art;

        let mut original = vec![0.0; m * width];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(v, a) in &row.terms {
                original[i * width + v.0] = a * row_scale[i] * col_scale[v.0];
            }
            original[i * width + n + i] = 1.0;
        }
        // rows with negative rhs are negated so an artificial can start basic
        let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        let mut tab = original.clone();
        let mut beta = rhs.clone();
        for (k, &i) in negative.iter().enumerate() {
            let art = n + m + k;
            original[i * width + art] = -1.0;
            for j in 0..width {
                tab[i * width + j] = -original[i * width + j];
            }
            beta[i] = -rhs[i];
            basis[i] = art;
        }

        let mut upper = vec![f64::INFINITY; width];
        for (j, v) in vars.iter().enumerate() {
            upper[j] = (v.upper - v.lower) / col_scale[j];
        }
        let mut state = vec![At::Lower; width];
        for &b in &basis {
            state[b] = At::Basic;
        }

        Tableau {
            m,
            width,
            n_struct: n,
            n_art,
            original,
            rhs,
            tab,
            beta,
            basis,
            state,
            upper,
            reduced: vec![0.0; width],
            bland: false,
            degenerate_run: 0,
            iterations: 0,
            max_iterations: 50 * (m + width) + 1000,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct + self.m
    }

    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        self.reduced.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * w..(i + 1) * w];
                for (d, &t) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn choose_entering(&self, allow_artificial: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.width {
            if !allow_artificial && self.is_artificial(j) {
                continue;
            }
            let d = self.reduced[j];
            let dir = match self.state[j] {
                At::Basic => continue,
                At::Lower if d < -OPT_TOL && self.upper[j] > 0.0 => 1.0,
                At::Upper if d > OPT_TOL => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.tab[r * w + q];
        for j in 0..w {
            self.tab[r * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.tab[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * w + q];
            if f != 0.0 {
                let row = &mut self.tab[i * w..(i + 1) * w];
                for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= dq * pr;
            }
            self.reduced[q] = 0.0;
        }
        // the caller sets the leaving variable's bound state
        self.basis[r] = q;
        self.state[q] = At::Basic;
    }

    fn iterate(&mut self, allow_artificial: bool) -> Result<Step> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::SolverFailure(format!(
                "iteration limit {} reached",
                self.max_iterations
            )));
        }
        let Some((q, dir)) = self.choose_entering(allow_artificial) else {
            return Ok(Step::Optimal);
        };
        let w = self.width;

        let mut theta = f64::INFINITY;
        let mut leave: Option<(usize, At)> = None;
        let mut leave_alpha = 0.0;
        for i in 0..self.m {
            let alpha = self.tab[i * w + q];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let delta = -alpha * dir;
            let b = self.basis[i];
            let (limit, target) = if delta < 0.0 {
                (self.beta[i].max(0.0) / -delta, At::Lower)
            } else if self.upper[b].is_finite() {
                ((self.upper[b] - self.beta[i]).max(0.0) / delta, At::Upper)
            } else {
                continue;
            };
            let better = match leave {
                None => true,
                Some((r, _)) => {
                    if limit < theta - 1e-12 {
                        true
                    } else if limit <= theta + 1e-12 {
                        if self.bland {
                            b < self.basis[r]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = limit;
                leave = Some((i, target));
                leave_alpha = alpha.abs();
            }
        }

        let flip = self.upper[q].is_finite() && self.upper[q] <= theta;
        if !flip && leave.is_none() {
            return Ok(Step::Unbounded);
        }
        let step = if flip { self.upper[q] } else { theta };

        if step <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        for i in 0..self.m {
            let alpha = self.tab[i * w + q];
            if alpha != 0.0 {
                self.beta[i] -= alpha * dir * step;
            }
        }

        if flip {
            self.state[q] = if dir > 0.0 { At::Upper } else { At::Lower };
            return Ok(Step::Continue);
        }

        let (r, target) = leave.expect("checked above");
        let leaving = self.basis[r];
        let entering_value = if dir > 0.0 { step } else { self.upper[q] - step };
        self.pivot(r, q);
        self.state[leaving] = target;
        self.beta[r] = entering_value;
        Ok(Step::Continue)
    }

    fn run(&mut self, allow_artificial: bool) -> Result<Step> {
        loop {
            match self.iterate(allow_artificial)? {
                Step::Continue => {}
                done => return Ok(done),
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            At::Upper => self.upper[j],
            _ => 0.0,
        }
    }

    /// Pivot zero-valued artificials out of the basis where possible.
    fn expel_artificials(&mut self) {
        let w = self.width;
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let candidate = (0..self.n_struct + self.m)
                .filter(|&j| self.state[j] != At::Basic)
                .max_by(|&a, &b| {
                    self.tab[r * w + a]
                        .abs()
                        .total_cmp(&self.tab[r * w + b].abs())
                        .then(b.cmp(&a))
                });
            if let Some(q) = candidate.filter(|&q| self.tab[r * w + q].abs() > 1e-7) {
                let leaving = self.basis[r];
                let value = self.nonbasic_value(q);
                self.pivot(r, q);
                self.state[leaving] = At::Lower;
                self.beta[r] = value;
            }
        }
    }

    /// Recompute basic values from the scaled data with a fresh LU of the basis.
    fn refactor(&mut self) {
        let m = self.m;
        if m == 0 {
            return;
        }
        let w = self.width;
        let b = DMatrix::from_fn(m, m, |i, k| self.original[i * w + self.basis[k]]);
        let mut rhs = DVector::from_column_slice(&self.rhs);
        for j in 0..w {
            if self.state[j] == At::Upper {
                let u = self.upper[j];
                for i in 0..m {
                    rhs[i] -= self.original[i * w + j] * u;
                }
            }
        }
        if let Some(x) = b.lu().solve(&rhs) {
            if x.iter().all(|v| v.is_finite()) {
                for i in 0..m {
                    self.beta[i] = x[i];
                }
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut y: Vec<f64> = (0..self.n_struct).map(|j| self.nonbasic_value(j)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                y[b] = self.beta[i];
            }
        }
        y
    }
}

/// Solve `lp` to optimality, or certify it infeasible or unbounded.
///
/// Returns [`Error::SolverFailure`] when the iteration limit is hit or the
/// final assignment fails the feasibility check, rather than a wrong answer.
pub fn solve_lp(lp: &StandardFormLp) -> Result<LpSolution> {
    let n = lp.num_vars();
    let (row_scale, col_scale) = equilibrate(lp);
    let mut t = Tableau::new(lp, &row_scale, &col_scale);

    let cost_max = lp
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| (v.cost * col_scale[j]).abs())
        .fold(0.0_f64, f64::max);
    let cost_scale = pow2_round(if cost_max > 0.0 { 1.0 / cost_max } else { 1.0 });

    if t.n_art > 0 {
        let mut phase1 = vec![0.0; t.width];
        for c in phase1.iter_mut().skip(t.n_struct + t.m) {
            *c = 1.0;
        }
        t.price(&phase1);
        t.run(true)?;
        let rhs_max = t.rhs.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        let infeasibility: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| t.is_artificial(b))
            .map(|(i, _)| t.beta[i].max(0.0))
            .sum();
        if infeasibility > 1e-9 * (1.0 + rhs_max) {
            return Ok(LpSolution::infeasible());
        }
        t.expel_artificials();
        for j in t.n_struct + t.m..t.width {
            t.upper[j] = 0.0;
        }
        t.bland = false;
        t.degenerate_run = 0;
    }

    let mut phase2 = vec![0.0; t.width];
    for (j, v) in lp.variables().iter().enumerate() {
        phase2[j] = v.cost * col_scale[j] * cost_scale;
    }
    t.price(&phase2);
    if let Step::Unbounded = t.run(false)? {
        return Ok(LpSolution::unbounded());
    }

    t.refactor();
    let y = t.structural_values();
    let values: Vec<f64> = lp
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| (v.lower + y[j] * col_scale[j]).clamp(v.lower, v.upper))
        .collect();
    debug_assert_eq!(values.len(), n);

    let report = validate_solution(lp, &values)?;
    if report.max_violation() > FEASIBILITY_TOL {
        return Err(Error::SolverFailure(format!(
            "numerical breakdown: final assignment violates constraints by {:e}",
            report.max_violation()
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_value(&values),
        values,
    })
}
