//! Non-negative least squares, `min ‖A c − b‖` subject to `c ≥ 0`.
//!
//! Lawson–Hanson active-set iteration working on the Gram matrix of the
//! columns, with a warm start from a previous passive set and two steps of
//! iterative refinement on each unconstrained subproblem.

#[derive(Debug, Clone)]
pub struct Nnls {
    cols: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub coeffs: Vec<f64>,
    pub residual_sq: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Nnls {
    pub fn new() -> Self {
        Self {
            cols: Vec::new(),
            gram: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.cols[k]
    }

    pub fn push(&mut self, col: Vec<f64>) {
        let row: Vec<f64> = self.cols.iter().map(|c| dot(c, &col)).collect();
        for (g, v) in self.gram.iter_mut().zip(&row) {
            g.push(*v);
        }
        let mut row = row;
        row.push(dot(&col, &col));
        self.gram.push(row);
        self.cols.push(col);
    }

    /// Keep only the columns whose flag is set.
    pub fn retain(&mut self, keep: &[bool]) {
        let idx: Vec<usize> = (0..self.cols.len()).filter(|&k| keep[k]).collect();
        self.cols = idx.iter().map(|&k| std::mem::take(&mut self.cols[k])).collect();
        self.gram = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.gram[i][j]).collect())
            .collect();
    }

    fn apply(&self, c: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (col, &w) in self.cols.iter().zip(c) {
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += w * v;
                }
            }
        }
        out
    }

    /// Least squares restricted to `passive`; `None` if the Gram block is singular.
    fn solve_passive(&self, passive: &[usize], b: &[f64]) -> Option<Vec<f64>> {
        let k = passive.len();
        let g: Vec<Vec<f64>> = passive
            .iter()
            .map(|&i| passive.iter().map(|&j| self.gram[i][j]).collect())
            .collect();
        let chol = cholesky(&g)?;
        let rhs: Vec<f64> = passive.iter().map(|&i| dot(&self.cols[i], b)).collect();
        let mut z = chol_solve(&chol, &rhs);
        for _ in 0..2 {
            let mut r = b.to_vec();
            for (t, &i) in passive.iter().enumerate() {
                for (ri, v) in r.iter_mut().zip(&self.cols[i]) {
                    *ri -= z[t] * v;
                }
            }
            let corr_rhs: Vec<f64> = passive.iter().map(|&i| dot(&self.cols[i], &r)).collect();
            let corr = chol_solve(&chol, &corr_rhs);
            for t in 0..k {
                z[t] += corr[t];
            }
        }
        Some(z)
    }

    pub fn solve(&self, b: &[f64], warm: Option<&[f64]>) -> NnlsSolution {
        let k = self.cols.len();
        let dim = b.len();
        let mut x = vec![0.0; k];
        let mut passive = vec![false; k];
        if let Some(w) = warm {
            for (i, &v) in w.iter().enumerate().take(k) {
                if v > 0.0 {
                    passive[i] = true;
                }
            }
            self.inner_loop(b, &mut x, &mut passive);
        }
        let bnorm = dot(b, b).sqrt().max(1e-300);
        let max_outer = 3 * k + 10;
        for _ in 0..max_outer {
            let r: Vec<f64> = {
                let ax = self.apply(&x, dim);
                b.iter().zip(&ax).map(|(p, q)| p - q).collect()
            };
            let mut best = None;
            let mut best_w = 1e-13 * bnorm;
            for i in 0..k {
                if !passive[i] {
                    let w = dot(&self.cols[i], &r) / dot(&self.cols[i], &self.cols[i]).sqrt().max(1e-300);
                    if w > best_w {
                        best_w = w;
                        best = Some(i);
                    }
                }
            }
            let Some(t) = best else { break };
            passive[t] = true;
            if !self.inner_loop(b, &mut x, &mut passive) {
                // entering column was dependent on the passive set
                passive[t] = false;
                break;
            }
        }
        let ax = self.apply(&x, dim);
        let residual_sq = b.iter().zip(&ax).map(|(p, q)| (p - q) * (p - q)).sum();
        NnlsSolution {
            coeffs: x,
            residual_sq,
        }
    }

    /// Feasibility-restoring inner loop of Lawson–Hanson.
    fn inner_loop(&self, b: &[f64], x: &mut [f64], passive: &mut [bool]) -> bool {
        for _ in 0..(2 * x.len() + 5) {
            let idx: Vec<usize> = (0..x.len()).filter(|&i| passive[i]).collect();
            if idx.is_empty() {
                return true;
            }
            let Some(z) = self.solve_passive(&idx, b) else {
                return false;
            };
            if z.iter().all(|&v| v > 0.0) {
                for i in x.iter_mut() {
                    *i = 0.0;
                }
                for (t, &i) in idx.iter().enumerate() {
                    x[i] = z[t];
                }
                return true;
            }
            let mut alpha = f64::INFINITY;
            for (t, &i) in idx.iter().enumerate() {
                if z[t] <= 0.0 {
                    let denom = x[i] - z[t];
                    let a = if denom > 0.0 { x[i] / denom } else { 0.0 };
                    alpha = alpha.min(a);
                }
            }
            for (t, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[t] - x[i]);
                if x[i] <= 1e-15 * (1.0 + z[t].abs()) || z[t] <= 0.0 && x[i] <= 1e-12 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
        true
    }
}

impl Default for Nnls {
    fn default() -> Self {
        Self::new()
    }
}

fn cholesky(g: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = g.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[i][j];
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            if i == j {
                if s <= 1e-13 * g[i][i].max(1e-300) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let k = l.len();
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = rhs[i];
        for p in 0..i {
            s -= l[i][p] * y[p];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in (i + 1)..k {
            s -= l[p][i] * x[p];
        }
        x[i] = s / l[i][i];
    }
    x
}
