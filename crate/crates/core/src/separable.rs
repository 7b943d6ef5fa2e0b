//! Separable decompositions `Σ a_l ⊗ v_l` with PSD factors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::{is_psd, BlockMatrix, PSD_TOL};
use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nnls::Nnls;
use crate::random::{rng, unit_vector, wishart};
use crate::scalar::{cre, C};
use crate::seesaw::{run, Extremum};

/// Product vector `(x, y)` of one rank-one term `xx* ⊗ yy*`.
type Atom = (Vec<C<f64>>, Vec<C<f64>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub a: Matrix<f64>,
    pub v: Matrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableDecomposition {
    pub n: usize,
    pub m: usize,
    pub terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn new(n: usize, m: usize, terms: Vec<SeparableTerm>) -> Self {
        Self { n, m, terms }
    }

    pub fn resum(&self) -> BlockMatrix<f64> {
        self.terms.iter().fold(BlockMatrix::zeros(self.n, self.m), |acc, t| {
            acc.add(&BlockMatrix::product(&t.a, &t.v))
        })
    }

    /// Relative Frobenius error against `target`.
    pub fn residual(&self, target: &BlockMatrix<f64>) -> f64 {
        if (self.n, self.m) != (target.n(), target.m()) {
            return f64::INFINITY;
        }
        self.resum().flat().rel_frobenius_diff(target.flat())
    }

    /// Every factor passes `is_psd` at the default tolerance.
    pub fn factors_psd(&self) -> bool {
        self.terms.iter().all(|t| {
            [&t.a, &t.v]
                .iter()
                .all(|f| is_psd(f, PSD_TOL).map(|c| c.psd).unwrap_or(false))
        })
    }

    /// Rewrite as `α · diag(v_1, …, v_q) · α*` with `α ∈ M_{n,q}`, refining every
    /// `a_l` into rank-one pieces.
    pub fn to_alpha_diag(&self) -> Result<AlphaDiag> {
        let mut cols = Vec::new();
        let mut vs = Vec::new();
        for t in &self.terms {
            for (w, _) in rank_one_refine(&t.a)? {
                cols.push(w);
                vs.push(t.v.clone());
            }
        }
        let alpha = Matrix::from_fn(self.n, cols.len(), |i, l| cols[l][i]);
        Ok(AlphaDiag {
            n: self.n,
            m: self.m,
            alpha,
            diag: vs,
        })
    }
}

/// `α · diag(v_1, …, v_q) · α*`; block `(i, j)` is `Σ_l α_{il} v_l ᾱ_{jl}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaDiag {
    pub n: usize,
    pub m: usize,
    pub alpha: Matrix<f64>,
    pub diag: Vec<Matrix<f64>>,
}

impl AlphaDiag {
    pub fn evaluate(&self) -> BlockMatrix<f64> {
        let (n, m) = (self.n, self.m);
        let mut blocks = vec![vec![Matrix::zeros(m, m); n]; n];
        for (l, v) in self.diag.iter().enumerate() {
            for (i, row) in blocks.iter_mut().enumerate() {
                for (j, b) in row.iter_mut().enumerate() {
                    let c = self.alpha[(i, l)] * self.alpha[(j, l)].conj();
                    *b = &*b + &v.scale(c);
                }
            }
        }
        BlockMatrix::from_blocks(&blocks).unwrap_or_else(|_| BlockMatrix::zeros(n, m))
    }

    pub fn to_decomposition(&self) -> SeparableDecomposition {
        let terms = self
            .diag
            .iter()
            .enumerate()
            .map(|(l, v)| {
                let col = self.alpha.col(l);
                SeparableTerm {
                    a: Matrix::outer(&col, &col),
                    v: v.clone(),
                }
            })
            .collect();
        SeparableDecomposition::new(self.n, self.m, terms)
    }
}

/// Split a PSD `p` into `Σ w w*` (each returned with its eigenvalue) keeping
/// eigenvalues above `1e-10·λ_max`. Each `w` is `sqrt(λ)` times a unit eigenvector.
pub fn rank_one_refine(p: &Matrix<f64>) -> Result<Vec<(Vec<C<f64>>, f64)>> {
    let spec = eig_hermitian(p)?;
    let top = spec.max().unwrap_or(0.0).max(0.0);
    let cut = 1e-10 * top;
    let mut out = Vec::new();
    for (k, &lambda) in spec.eigenvalues.iter().enumerate().rev() {
        if lambda > cut && lambda > 0.0 {
            let s = lambda.sqrt();
            out.push((spec.vector(k).into_iter().map(|z| z * s).collect(), lambda));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompOptions {
    /// Outer conditional-gradient iterations.
    pub iterations: usize,
    /// Stop once `‖A − Σ‖_F² / ‖A‖_F²` falls below this.
    pub tol: f64,
    /// See-saw starts per iteration.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DecompOptions {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            tol: 1e-18,
            restarts: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum DecompOutcome {
    Found {
        decomposition: SeparableDecomposition,
        /// Relative Frobenius residual.
        residual: f64,
        iterations: usize,
    },
    NotFound {
        residual: f64,
        iterations: usize,
        /// Best approximation reached, for witness extraction.
        approximation: SeparableDecomposition,
    },
}

/// Real coordinates of a hermitian matrix, isometric for the Frobenius norm.
pub(crate) fn herm_vec(h: &Matrix<f64>) -> Vec<f64> {
    let d = h.rows();
    let mut out = Vec::with_capacity(d * d);
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        out.push(h[(i, i)].re);
        for j in (i + 1)..d {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            out.push(r2 * z.re);
            out.push(r2 * z.im);
        }
    }
    out
}

fn product_atom(x: &[C<f64>], y: &[C<f64>]) -> Vec<f64> {
    let xy: Vec<C<f64>> = x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect();
    herm_vec(&Matrix::outer(&xy, &xy))
}

/// `μ·(I − P)` with `P` the projector onto the numerical range of `a`, or
/// `None` when `a` has full rank.
fn range_penalty(a: &BlockMatrix<f64>) -> Result<Option<BlockMatrix<f64>>> {
    let spec = eig_hermitian(a.flat())?;
    let top = spec.max().unwrap_or(0.0).max(0.0);
    let d = a.flat().rows();
    let kernel: Vec<usize> = (0..d).filter(|&k| spec.eigenvalues[k] <= 1e-10 * top).collect();
    if kernel.is_empty() || kernel.len() == d {
        return Ok(None);
    }
    let mu = 10.0 * top;
    let mut flat = Matrix::zeros(d, d);
    for k in kernel {
        let v = spec.vector(k);
        let outer = Matrix::outer(&v, &v);
        flat = Matrix::from_fn(d, d, |i, j| flat[(i, j)] + outer[(i, j)] * mu);
    }
    Ok(Some(BlockMatrix::from_flat(a.n(), a.m(), flat)?))
}

const POLISH_SWEEPS: usize = 1;

/// Block-coordinate descent on the atoms: each `(x_l, y_l, c_l)` is replaced by
/// the best product approximation of the residual with that atom put back,
/// found by a see-saw started at the current vectors.
fn polish(a: &BlockMatrix<f64>, outside: Option<&BlockMatrix<f64>>, vectors: &mut [Atom], coeffs: &mut [f64]) -> Result<()> {
    let (n, m) = (a.n(), a.m());
    let atom = |x: &[C<f64>], y: &[C<f64>], c: f64| BlockMatrix::product(&Matrix::outer(x, x).scale_real(c), &Matrix::outer(y, y));
    let mut r = a.clone();
    for ((x, y), &c) in vectors.iter().zip(coeffs.iter()) {
        r = r.sub(&atom(x, y, c));
    }
    for _ in 0..POLISH_SWEEPS {
        for ((x, y), c) in vectors.iter_mut().zip(coeffs.iter_mut()) {
            let rl = r.add(&atom(x, y, *c));
            let search = outside.map_or_else(|| rl.clone(), |o| rl.sub(o));
            let (nx, ny, _) = run(&search, Extremum::Max, vec![cre(0.0); n], y.clone(), false, 20)?;
            debug_assert_eq!((nx.len(), ny.len()), (n, m));
            let value = rl.product_value(&nx, &ny).max(0.0);
            r = rl.sub(&atom(&nx, &ny, value));
            *x = nx;
            *y = ny;
            *c = value;
        }
    }
    Ok(())
}

/// Search for `A = Σ c_l (x_l x_l*) ⊗ (y_l y_l*)`.
///
/// Each iteration finds product vectors maximizing `⟨x⊗y, R (x⊗y)⟩` for the
/// current residual `R` by see-saw runs from random starts, adds every
/// improving product state as an atom, and re-fits all weights by
/// non-negative least squares. Stops when the relative squared residual is
/// below `opts.tol`, or when no product state improves the fit.
pub fn decompose_separable(a: &BlockMatrix<f64>, opts: &DecompOptions) -> Result<DecompOutcome> {
    a.check_hermitian()?;
    let check = is_psd(a.flat(), PSD_TOL)?;
    if !check.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: check.min_eigenvalue,
        });
    }
    let (n, m) = (a.n(), a.m());
    let target = herm_vec(a.flat());
    let norm_sq: f64 = target.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return Ok(DecompOutcome::Found {
            decomposition: SeparableDecomposition::new(n, m, Vec::new()),
            residual: 0.0,
            iterations: 0,
        });
    }
    // product vectors of any decomposition lie in the range of `a`
    let outside = range_penalty(a)?;
    let mut solver = Nnls::new();
    let mut vectors: Vec<Atom> = Vec::new();
    let mut coeffs: Vec<f64> = Vec::new();
    let mut residual_sq = norm_sq;
    let restarts = opts.restarts.clamp(1, 8);
    let mut iterations = 0;

    let build = |vectors: &[Atom], coeffs: &[f64]| {
        let terms = vectors
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c > 0.0)
            .map(|((x, y), &c)| SeparableTerm {
                a: Matrix::outer(x, x).scale_real(c),
                v: Matrix::outer(y, y),
            })
            .collect();
        SeparableDecomposition::new(n, m, terms)
    };

    while iterations < opts.iterations {
        iterations += 1;
        let approx = build(&vectors, &coeffs).resum();
        let r = a.sub(&approx);
        let r_scale = r.flat().max_abs().max(1e-300);
        let search = outside.as_ref().map_or_else(|| r.clone(), |o| r.sub(o));
        let mut found = 0;
        for k in 0..restarts {
            let mut g = rng(opts.seed, ((iterations as u64) << 16) | k as u64);
            let y0 = unit_vector(&mut g, m);
            let (x, y, _) = run(&search, Extremum::Max, vec![cre(0.0); n], y0, false, 100)?;
            let value = r.product_value(&x, &y);
            if value <= 1e-13 * r_scale {
                continue;
            }
            let atom = product_atom(&x, &y);
            let dup = (0..solver.len()).any(|i| {
                let c = solver.column(i);
                c.iter().zip(&atom).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() < 1e-20
            });
            if !dup {
                solver.push(atom);
                vectors.push((x, y));
                coeffs.push(0.0);
                found += 1;
            }
        }
        let before = residual_sq;
        let sol = solver.solve(&target, Some(&coeffs));
        coeffs = sol.coeffs;
        residual_sq = sol.residual_sq;
        let keep: Vec<bool> = coeffs.iter().map(|&c| c > 0.0).collect();
        solver.retain(&keep);
        vectors = vectors
            .into_iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v)
            .collect();
        coeffs.retain(|&c| c > 0.0);
        if residual_sq / norm_sq < opts.tol {
            break;
        }
        // boundary targets stall under atom insertion alone; polish the atoms
        polish(a, outside.as_ref(), &mut vectors, &mut coeffs)?;
        solver = Nnls::new();
        for (x, y) in &vectors {
            solver.push(product_atom(x, y));
        }
        let sol = solver.solve(&target, Some(&coeffs));
        coeffs = sol.coeffs;
        residual_sq = sol.residual_sq;
        if residual_sq / norm_sq < opts.tol {
            break;
        }
        // no new atom and polishing no longer helps: stalled
        if found == 0 && residual_sq > 0.99 * before {
            break;
        }
    }

    let decomposition = build(&vectors, &coeffs);
    let residual = decomposition.residual(a);
    if residual_sq / norm_sq < opts.tol {
        Ok(DecompOutcome::Found {
            decomposition,
            residual,
            iterations,
        })
    } else {
        Ok(DecompOutcome::NotFound {
            residual,
            iterations,
            approximation: decomposition,
        })
    }
}

/// Reproducible conic combination of `terms` products of Wishart-sampled PSD
/// factors, returned with its ground-truth decomposition.
pub fn sample_dmax(
    n: usize,
    m: usize,
    terms: usize,
    seed: u64,
) -> (BlockMatrix<f64>, SeparableDecomposition) {
    let mut g = rng(seed, u64::MAX);
    let list: Vec<SeparableTerm> = (0..terms.max(1))
        .map(|_| {
            let ra = g.random_range(1..=n.max(1));
            let rv = g.random_range(1..=m.max(1));
            let weight = g.random_range(0.2..1.0);
            SeparableTerm {
                a: wishart(&mut g, n, ra).scale_real(weight),
                v: wishart(&mut g, m, rv),
            }
        })
        .collect();
    let dec = SeparableDecomposition::new(n, m, list);
    (dec.resum(), dec)
}
