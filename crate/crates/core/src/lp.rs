//! Dense two-phase simplex for small linear programs.
//!
//! `maximize cᵀx` subject to row constraints, with `x ≥ 0` or `x` free.
//! Dantzig pricing, falling back to Bland's rule after a run of degenerate
//! pivots so that cycling cannot persist.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub free_vars: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// `duals[i]` is the multiplier of constraint `i`: at the optimum the
    /// objective equals `Σ duals[i]·coeffs_i` on the support of `x`.
    Optimal { x: Vec<f64>, value: f64, duals: Vec<f64> },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;
/// Consecutive degenerate pivots before switching from Dantzig to Bland pricing.
const STALL: usize = 50;

struct Tableau {
    /// rows × (cols + 1); last column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced costs of the current phase; last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let row = std::mem::take(&mut self.t[r]);
        let eliminate = |other: &mut Vec<f64>| {
            let f = other[c];
            if f != 0.0 {
                for (o, v) in other.iter_mut().zip(&row) {
                    *o -= f * v;
                }
            }
        };
        for (i, other) in self.t.iter_mut().enumerate() {
            if i != r {
                eliminate(other);
            }
        }
        eliminate(&mut self.cost);
        self.t[r] = row;
        self.basis[r] = c;
    }

    /// Installs `cost` as the phase objective, reduced against the basis.
    fn set_cost(&mut self, cost: &[f64]) {
        let mut rc = cost.to_vec();
        rc.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let f = cost[b];
            if f != 0.0 {
                for (o, v) in rc.iter_mut().zip(&self.t[i]) {
                    *o -= f * v;
                }
            }
        }
        self.cost = rc;
    }

    /// Minimizes the installed cost over columns in `allowed`. Returns false if unbounded.
    fn minimize(&mut self, allowed: &[bool]) -> bool {
        let mut stalled = 0;
        for _ in 0..MAX_PIVOTS {
            let candidates = (0..self.cols).filter(|&j| allowed[j] && self.cost[j] < -EPS);
            let enter = if stalled < STALL {
                candidates.min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
            } else {
                candidates.into_iter().next()
            };
            let Some(c) = enter else { return true };
            // ratio test on pivots that are not tiny relative to the column
            let col_max = self.t.iter().map(|row| row[c].abs()).fold(0.0, f64::max);
            let piv_tol = PIVOT_TOL * col_max.max(1.0);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > piv_tol {
                    let ratio = self.t[i][self.cols].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= EPS * (1.0 + lr.abs());
                            if (!tie && ratio < lr) || (tie && a > self.t[li][c]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return false };
            stalled = if ratio <= EPS { stalled + 1 } else { 0 };
            self.pivot(r, c);
        }
        true
    }
}

impl LinearProgram {
    pub fn new(n_vars: usize, objective: Vec<f64>, free_vars: bool) -> Self {
        Self {
            n_vars,
            objective,
            constraints: Vec::new(),
            free_vars,
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        let nv = if self.free_vars { 2 * self.n_vars } else { self.n_vars };
        let rows = self.constraints.len();
        // normalize every row to rhs ≥ 0; a `≤` row then starts with its slack basic
        let normalized: Vec<(f64, Cmp)> = self
            .constraints
            .iter()
            .map(|c| {
                let sign = if c.rhs < 0.0 || (c.rhs == 0.0 && c.cmp == Cmp::Ge) { -1.0 } else { 1.0 };
                let cmp = match (c.cmp, sign < 0.0) {
                    (Cmp::Le, true) => Cmp::Ge,
                    (Cmp::Ge, true) => Cmp::Le,
                    (k, _) => k,
                };
                (sign, cmp)
            })
            .collect();
        let n_slack = normalized.iter().filter(|(_, k)| *k != Cmp::Eq).count();
        let n_art = normalized.iter().filter(|(_, k)| *k != Cmp::Le).count();
        let art0 = nv + n_slack;
        let cols = art0 + n_art;
        let mut t = vec![vec![0.0; cols + 1]; rows];
        let mut basis = vec![0; rows];
        let (mut slack, mut art) = (nv, art0);
        for (i, (con, &(sign, cmp))) in self.constraints.iter().zip(&normalized).enumerate() {
            for (j, &a) in con.coeffs.iter().enumerate().take(self.n_vars) {
                t[i][j] = sign * a;
                if self.free_vars {
                    t[i][self.n_vars + j] = -sign * a;
                }
            }
            match cmp {
                Cmp::Le => {
                    t[i][slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Cmp::Ge => {
                    t[i][slack] = -1.0;
                    slack += 1;
                }
                Cmp::Eq => {}
            }
            if cmp != Cmp::Le {
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
            t[i][cols] = sign * con.rhs;
        }
        let mut tab = Tableau {
            t,
            cost: Vec::new(),
            basis,
            cols,
        };
        let all = vec![true; cols];
        if n_art > 0 {
            let mut cost1 = vec![0.0; cols];
            for c in cost1.iter_mut().skip(art0) {
                *c = 1.0;
            }
            tab.set_cost(&cost1);
            tab.minimize(&all);
            let infeas: f64 = (0..rows).filter(|&i| tab.basis[i] >= art0).map(|i| tab.t[i][cols]).sum();
            let scale = 1.0 + self.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
            if infeas > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificials out of the basis
            for i in 0..rows {
                if tab.basis[i] >= art0 {
                    let top = (0..art0).map(|j| tab.t[i][j].abs()).fold(0.0, f64::max);
                    if let Some(j) = (0..art0).find(|&j| tab.t[i][j].abs() > 1e-9 && tab.t[i][j].abs() >= 0.1 * top) {
                        tab.pivot(i, j);
                    }
                }
            }
        }
        let mut cost2 = vec![0.0; cols];
        for j in 0..self.n_vars {
            cost2[j] = -self.objective[j];
            if self.free_vars {
                cost2[self.n_vars + j] = self.objective[j];
            }
        }
        tab.set_cost(&cost2);
        let allowed: Vec<bool> = (0..cols).map(|j| j < art0).collect();
        if !tab.minimize(&allowed) {
            return LpOutcome::Unbounded;
        }
        let mut raw = vec![0.0; cols];
        for (i, &b) in tab.basis.iter().enumerate() {
            raw[b] = tab.t[i][cols];
        }
        let x: Vec<f64> = (0..self.n_vars)
            .map(|j| if self.free_vars { raw[j] - raw[self.n_vars + j] } else { raw[j] })
            .collect();
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        // each normalized row owns a `+e_i` column (its slack for `≤`, else its
        // artificial); that column's reduced cost is the row's multiplier
        let (mut slack, mut art) = (nv, art0);
        let duals = normalized
            .iter()
            .map(|&(sign, cmp)| {
                let col = match cmp {
                    Cmp::Le => slack,
                    Cmp::Ge => art,
                    Cmp::Eq => art,
                };
                if cmp != Cmp::Eq {
                    slack += 1;
                }
                if cmp != Cmp::Le {
                    art += 1;
                }
                sign * tab.cost[col]
            })
            .collect();
        LpOutcome::Optimal { x, value, duals }
    }
}

/// Is `target` a non-negative combination of `generators`? Returns the weights.
pub fn conic_combination(generators: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    let d = target.len();
    let mut lp = LinearProgram::new(generators.len(), vec![0.0; generators.len()], false);
    for k in 0..d {
        lp.push(generators.iter().map(|g| g[k]).collect(), Cmp::Eq, target[k]);
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let scale = 1.0 + target.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let err = (0..d)
                .map(|k| (generators.iter().zip(&x).map(|(g, w)| g[k] * w).sum::<f64>() - target[k]).abs())
                .fold(0.0, f64::max);
            (err <= 1e-9 * scale).then_some(x)
        }
        _ => None,
    }
}
