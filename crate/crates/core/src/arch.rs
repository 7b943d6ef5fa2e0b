//! Archimedeanization of finite-dimensional ordered spaces presented by a
//! generator list or a built-in membership oracle.
//!
//! Elements are real coordinate vectors in a fixed basis of `V_h`. Level-`n`
//! elements of `M_n(V)_h ≅ (M_n)_h ⊗ V_h` use coordinates indexed
//! `α·dim + k`, with `α` running over [`herm_basis`]`(n)`.

use serde::{Deserialize, Serialize};

use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::lp::{conic_combination, Cmp, LinearProgram, LpOutcome};
use crate::matrix::Matrix;
use crate::random::{gaussian, rng, wishart};
use crate::scalar::{cre, C};

const BOX: f64 = 1e4;
const MAX_CUT_ROUNDS: usize = 400;
/// Violation a separation oracle reports, relative to the functional's size.
const ORACLE_TOL: f64 = 1e-11;
/// Accepted violation once the state LP stops moving (its own accuracy).
const STALL_ORACLE_TOL: f64 = 1e-9;
/// Tangent cuts converge slowly on round state spaces, so PSD oracles accept
/// a larger violation.
const PSD_ORACLE_TOL: f64 = 1e-7;
/// Relative singular-value cutoff for the common kernel of the states.
pub const NULL_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    /// `{(x, y) : y > 0} ∪ {(x, 0) : x ≥ 0}`, not closed.
    Lexicographic2,
    /// PSD cone of `M_2` in [`herm_basis`] coordinates.
    Psd2,
    /// PSD cone of `M_3` in [`herm_basis`] coordinates.
    Psd3,
    /// `ℝ^+ ⊂ ℝ`.
    Ray1,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Lexicographic2 => "lexicographic2",
            Builtin::Psd2 => "psd2",
            Builtin::Psd3 => "psd3",
            Builtin::Ray1 => "ray1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let name = s.strip_prefix("builtin:").ok_or_else(|| Error::InvalidInput(format!("unknown oracle {s:?}")))?;
        [Builtin::Lexicographic2, Builtin::Psd2, Builtin::Psd3, Builtin::Ray1]
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown builtin oracle {name:?}")))
    }

    pub fn dim(self) -> usize {
        match self {
            Builtin::Lexicographic2 => 2,
            Builtin::Psd2 => 4,
            Builtin::Psd3 => 9,
            Builtin::Ray1 => 1,
        }
    }

    fn psd_size(self) -> Option<usize> {
        match self {
            Builtin::Psd2 => Some(2),
            Builtin::Psd3 => Some(3),
            _ => None,
        }
    }

    fn contains(self, x: &[f64]) -> bool {
        match self {
            Builtin::Lexicographic2 => x[1] > 0.0 || (x[1] == 0.0 && x[0] >= 0.0),
            Builtin::Ray1 => x[0] >= 0.0,
            Builtin::Psd2 | Builtin::Psd3 => {
                let d = self.psd_size().expect("psd");
                let h = herm_from_coords(x, d);
                let lam = eig_hermitian(&h).ok().and_then(|s| s.min()).unwrap_or(f64::NEG_INFINITY);
                lam >= -1e-12 * (1.0 + h.max_abs())
            }
        }
    }

    /// An element `g` of the cone with `s(g) < 0`, if the functional `s` is not
    /// already non-negative on the cone.
    fn separate(self, s: &[f64], tol: f64) -> Option<Vec<f64>> {
        let scale = tol * (1.0 + s.iter().map(|v| v.abs()).fold(0.0, f64::max));
        match self {
            Builtin::Lexicographic2 => {
                let (a, b) = (s[0], s[1]);
                if b < -scale {
                    Some(vec![0.0, 1.0])
                } else if a.abs() <= scale {
                    None
                } else {
                    // s(g) = −|a| + b·ρ < 0, and the cut shrinks |a| tenfold
                    Some(vec![-a.signum(), a.abs() / (10.0 * b.max(a.abs()))])
                }
            }
            Builtin::Ray1 => (s[0] < -scale).then(|| vec![1.0]),
            Builtin::Psd2 | Builtin::Psd3 => {
                // tangent cuts converge slowly on the round state space
                let d = self.psd_size().expect("psd");
                let spec = eig_hermitian(&herm_from_coords(s, d)).ok()?;
                if spec.min()? < -scale.max(PSD_ORACLE_TOL * (1.0 + s.iter().map(|v| v.abs()).fold(0.0, f64::max))) {
                    let u = spec.vector(0);
                    Some(herm_coords(&Matrix::outer(&u, &u)))
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConePresentation {
    Generators(Vec<Vec<f64>>),
    Oracle(Builtin),
    /// Image of `parent` under the quotient by the complement of `basis`;
    /// membership is the Archimedean closure test of the lift.
    Quotient {
        parent: Box<GeneratedCone>,
        basis: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeWire", into = "ConeWire")]
pub struct GeneratedCone {
    pub dim: usize,
    pub presentation: ConePresentation,
    pub unit: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConeWire {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    generators: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    parent: Option<Box<GeneratedCone>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    basis: Option<Vec<Vec<f64>>>,
    unit: Vec<f64>,
}

impl TryFrom<ConeWire> for GeneratedCone {
    type Error = Error;
    fn try_from(w: ConeWire) -> Result<Self> {
        let presentation = match (w.generators, w.oracle.as_deref(), w.parent, w.basis) {
            (Some(g), None, None, None) => ConePresentation::Generators(g),
            (None, Some("quotient"), Some(parent), Some(basis)) => ConePresentation::Quotient { parent, basis },
            (None, Some(o), None, None) => ConePresentation::Oracle(Builtin::parse(o)?),
            _ => {
                return Err(Error::InvalidInput(
                    "cone needs exactly one of \"generators\" or \"oracle\"".into(),
                ))
            }
        };
        GeneratedCone::new(w.dim, presentation, w.unit)
    }
}

impl From<GeneratedCone> for ConeWire {
    fn from(c: GeneratedCone) -> Self {
        let mut w = ConeWire {
            dim: c.dim,
            generators: None,
            oracle: None,
            parent: None,
            basis: None,
            unit: c.unit,
        };
        match c.presentation {
            ConePresentation::Generators(g) => w.generators = Some(g),
            ConePresentation::Oracle(b) => w.oracle = Some(format!("builtin:{}", b.name())),
            ConePresentation::Quotient { parent, basis } => {
                w.oracle = Some("quotient".into());
                w.parent = Some(parent);
                w.basis = Some(basis);
            }
        }
        w
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

impl GeneratedCone {
    pub fn new(dim: usize, presentation: ConePresentation, unit: Vec<f64>) -> Result<Self> {
        if unit.len() != dim {
            return Err(Error::ShapeMismatch(format!("unit has length {}, expected {dim}", unit.len())));
        }
        match &presentation {
            ConePresentation::Generators(g) => {
                if let Some(bad) = g.iter().find(|v| v.len() != dim) {
                    return Err(Error::ShapeMismatch(format!("generator of length {}, expected {dim}", bad.len())));
                }
            }
            ConePresentation::Oracle(b) => {
                if b.dim() != dim {
                    return Err(Error::ShapeMismatch(format!("oracle {} has dimension {}", b.name(), b.dim())));
                }
            }
            ConePresentation::Quotient { parent, basis } => {
                if basis.len() != dim || basis.iter().any(|v| v.len() != parent.dim) {
                    return Err(Error::ShapeMismatch("quotient basis shape".into()));
                }
            }
        }
        Ok(Self { dim, presentation, unit })
    }

    pub fn oracle(b: Builtin) -> Self {
        let unit = match b.psd_size() {
            Some(d) => herm_coords(&Matrix::identity(d)),
            None => match b {
                Builtin::Lexicographic2 => vec![0.0, 1.0],
                _ => vec![1.0],
            },
        };
        Self::new(b.dim(), ConePresentation::Oracle(b), unit).expect("builtin shapes")
    }

    pub fn generators(dim: usize, generators: Vec<Vec<f64>>, unit: Vec<f64>) -> Result<Self> {
        Self::new(dim, ConePresentation::Generators(generators), unit)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.presentation {
            ConePresentation::Generators(g) => conic_combination(g, x).is_some(),
            ConePresentation::Oracle(b) => b.contains(x),
            ConePresentation::Quotient { parent, basis } => {
                arch_closure_test(&lift(basis, x), parent, &default_schedule()).passed
            }
        }
    }

    /// Cone element on which the functional `s` is negative, if any.
    fn separate(&self, s: &[f64], tol: f64) -> Option<Vec<f64>> {
        match &self.presentation {
            ConePresentation::Generators(g) => {
                let scale = tol * (1.0 + s.iter().map(|v| v.abs()).fold(0.0, f64::max));
                g.iter()
                    .map(|v| (dot(s, v) / (1.0 + v.iter().map(|x| x.abs()).fold(0.0, f64::max)), v))
                    .filter(|(val, _)| *val < -scale)
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, v)| v.clone())
            }
            ConePresentation::Oracle(b) => b.separate(s, tol),
            ConePresentation::Quotient { parent, basis } => {
                let pulled = lift(basis, s);
                parent.separate(&pulled, tol).map(|g| project(basis, &g))
            }
        }
    }

    /// Spot check of the order-unit property: for random `v`, some `r ≤ 2^40`
    /// has `r·e − v` in the cone.
    pub fn check_order_unit(&self, samples: usize, seed: u64) -> bool {
        (0..samples).all(|s| {
            let mut g = rng(seed, s as u64);
            let v: Vec<f64> = (0..self.dim).map(|_| gaussian(&mut g)).collect();
            (0..=40).any(|k| {
                let r = 2f64.powi(k);
                let x: Vec<f64> = self.unit.iter().zip(&v).map(|(e, vi)| r * e - vi).collect();
                self.contains(&x)
            })
        })
    }

    /// `cone ∩ −cone = {0}`, checked on the generators.
    pub fn is_proper(&self) -> Option<bool> {
        match &self.presentation {
            ConePresentation::Generators(g) => Some(g.iter().all(|v| {
                v.iter().all(|x| *x == 0.0) || !self.contains(&v.iter().map(|x| -x).collect::<Vec<_>>())
            })),
            _ => None,
        }
    }
}

/// Orthonormal basis of `(M_d)_h` under the trace inner product: `E_ii`, then
/// `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2` for `i < j`.
pub fn herm_basis(d: usize) -> Vec<Matrix<f64>> {
    let mut out: Vec<Matrix<f64>> = (0..d).map(|i| Matrix::unit(d, d, i, i)).collect();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let mut s = Matrix::zeros(d, d);
            s[(i, j)] = cre(r);
            s[(j, i)] = cre(r);
            out.push(s);
            let mut a = Matrix::zeros(d, d);
            a[(i, j)] = C::new(0.0, r);
            a[(j, i)] = C::new(0.0, -r);
            out.push(a);
        }
    }
    out
}

pub fn herm_coords(h: &Matrix<f64>) -> Vec<f64> {
    herm_basis(h.rows()).iter().map(|b| b.hs_inner(h).re).collect()
}

pub fn herm_from_coords(x: &[f64], d: usize) -> Matrix<f64> {
    herm_basis(d)
        .iter()
        .zip(x)
        .fold(Matrix::zeros(d, d), |acc, (b, &c)| &acc + &b.scale_real(c))
}

/// Rank-one projectors spanning `(M_n)_h`: `E_ii`, and `(e_i ± e_j)`, `(e_i ± i e_j)`
/// halves for `i < j` (the octahedron of Bloch directions when `n = 2`).
pub fn frame_projectors(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(herm_coords(&Matrix::unit(n, n, i, i)));
    }
    for i in 0..n {
        for j in i + 1..n {
            for phase in [cre(1.0), cre(-1.0), C::new(0.0, 1.0), C::new(0.0, -1.0)] {
                let mut v = vec![cre(0.0); n];
                v[i] = cre(std::f64::consts::FRAC_1_SQRT_2);
                v[j] = phase * std::f64::consts::FRAC_1_SQRT_2;
                out.push(herm_coords(&Matrix::outer(&v, &v)));
            }
        }
    }
    out
}

/// Level-`n` view of a base cone: cut vectors `a_j ⊗ g` with frame projectors `a_j`.
struct Level<'a> {
    base: &'a GeneratedCone,
    frames: Vec<Vec<f64>>,
    dim: usize,
    unit: Vec<f64>,
}

impl<'a> Level<'a> {
    fn new(base: &'a GeneratedCone, n: usize) -> Self {
        let unit = kron(&herm_coords(&Matrix::identity(n)), &base.unit);
        Self {
            base,
            frames: frame_projectors(n),
            dim: n * n * base.dim,
            unit,
        }
    }

    fn initial_cuts(&self) -> Vec<Vec<f64>> {
        match &self.base.presentation {
            ConePresentation::Generators(g) => self
                .frames
                .iter()
                .flat_map(|a| g.iter().map(move |v| kron(a, v)))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn separate(&self, s: &[f64], tol: f64) -> Vec<Vec<f64>> {
        let d = self.base.dim;
        let mut cuts = Vec::new();
        for a in &self.frames {
            let slice: Vec<f64> = (0..d).map(|k| a.iter().enumerate().map(|(al, w)| w * s[al * d + k]).sum()).collect();
            if let Some(g) = self.base.separate(&slice, tol) {
                cuts.push(kron(a, &g));
            }
        }
        cuts
    }
}

/// Extreme state for `objective` by cutting planes. Each round solves the dual
/// of `max ⟨objective, s⟩ : ⟨unit, s⟩ = 1, ⟨g, s⟩ ≥ 0 (g ∈ cuts), |s_i| ≤ BOX`,
/// which has one row per coordinate however many cuts accumulate, and reads
/// the state off its multipliers.
fn solve_state(level: &Level, cuts: &mut Vec<Vec<f64>>, objective: &[f64]) -> Result<Vec<f64>> {
    let dim = level.dim;
    let mut prev = None;
    for _ in 0..MAX_CUT_ROUNDS {
        // variables: t⁺, t⁻, λ_k (one per cut), p_i, q_i
        let nv = 2 + cuts.len() + 2 * dim;
        let mut cost = vec![0.0; nv];
        cost[0] = -1.0;
        cost[1] = 1.0;
        for c in cost.iter_mut().skip(2 + cuts.len()) {
            *c = -BOX;
        }
        let mut lp = LinearProgram::new(nv, cost, false);
        for i in 0..dim {
            let mut row = vec![0.0; nv];
            row[0] = level.unit[i];
            row[1] = -level.unit[i];
            for (k, g) in cuts.iter().enumerate() {
                row[2 + k] = -g[i];
            }
            row[2 + cuts.len() + i] = 1.0;
            row[2 + cuts.len() + dim + i] = -1.0;
            lp.push(row, Cmp::Eq, objective[i]);
        }
        let s: Vec<f64> = match lp.solve() {
            LpOutcome::Optimal { duals, .. } => duals.iter().map(|y| -y).collect(),
            LpOutcome::Unbounded => return Err(Error::EmptyStateSpace),
            LpOutcome::Infeasible => return Err(Error::NoConvergence { residual: f64::NAN }),
        };
        // aim for the tight tolerance, settle for the LP's accuracy once it stalls
        let stalled = prev.as_ref().is_some_and(|p: &Vec<f64>| {
            p.iter().zip(&s).all(|(a, b)| (a - b).abs() <= 1e-13 * (1.0 + a.abs()))
        });
        let tol = if stalled { STALL_ORACLE_TOL } else { ORACLE_TOL };
        let new = level.separate(&s, tol);
        prev = Some(s.clone());
        if new.is_empty() {
            if s.iter().any(|v| v.abs() > 0.5 * BOX) {
                return Err(Error::UnboundedStateSpace);
            }
            return Ok(s);
        }
        for c in new {
            let top = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
            cuts.push(c.into_iter().map(|v| v / top).collect());
        }
    }
    Err(Error::NoConvergence { residual: f64::NAN })
}

fn level_states(c: &GeneratedCone, n: usize, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let level = Level::new(c, n);
    let mut cuts = level.initial_cuts();
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut g = rng(seed, k as u64);
        let objective: Vec<f64> = (0..level.dim).map(|_| gaussian(&mut g)).collect();
        out.push(solve_state(&level, &mut cuts, &objective)?);
    }
    Ok(out)
}

pub fn default_samples(dim: usize) -> usize {
    64 * dim
}

/// Sampled states `s` (`s(e) = 1`, `s ≥ 0` on the cone), as extreme points
/// of the state polytope under random linear objectives.
pub fn compute_states(c: &GeneratedCone, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    level_states(c, 1, samples, seed)
}

/// Orthonormal basis of the row span of `rows` (pivoted Gram–Schmidt, relative cutoff).
fn row_space(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut res: Vec<Vec<f64>> = rows.to_vec();
    let top = rows.iter().map(|r| dot(r, r).sqrt()).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let (k, norm) = res
            .iter()
            .enumerate()
            .map(|(k, r)| (k, dot(r, r).sqrt()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if k == usize::MAX || norm <= NULL_CUTOFF * top {
            break;
        }
        let q: Vec<f64> = res[k].iter().map(|v| v / norm).collect();
        for r in res.iter_mut() {
            for _ in 0..2 {
                let p = dot(r, &q);
                for (ri, qi) in r.iter_mut().zip(&q) {
                    *ri -= p * qi;
                }
            }
        }
        basis.push(q);
    }
    basis
}

fn complement(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    let mut out = Vec::new();
    let mut cands: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    while all.len() < dim {
        for c in cands.iter_mut() {
            for _ in 0..2 {
                for q in &all {
                    let p = dot(c, q);
                    for (ci, qi) in c.iter_mut().zip(q) {
                        *ci -= p * qi;
                    }
                }
            }
        }
        let (k, norm) = cands
            .iter()
            .enumerate()
            .map(|(k, c)| (k, dot(c, c).sqrt()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut q: Vec<f64> = cands[k].iter().map(|v| v / norm).collect();
        if let Some(first) = q.iter().find(|v| v.abs() > 1e-8) {
            if *first < 0.0 {
                q.iter_mut().for_each(|v| *v = -*v);
            }
        }
        all.push(q.clone());
        out.push(q);
    }
    out
}

fn lift(basis: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let dim = basis.first().map_or(0, |b| b.len());
    let mut out = vec![0.0; dim];
    for (b, &c) in basis.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(b) {
            *o += c * v;
        }
    }
    out
}

fn project(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    basis.iter().map(|b| dot(b, v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSpace {
    pub basis: Vec<Vec<f64>>,
    /// Orthonormal basis of the complement (the span of the states).
    pub complement: Vec<Vec<f64>>,
    pub states_used: usize,
    /// Largest `|s(ν)|` over sampled states and basis vectors.
    pub max_annihilation: f64,
}

fn null_space_of(states: &[Vec<f64>], dim: usize) -> NullSpace {
    let range = row_space(states, dim);
    let basis = complement(&range, dim);
    let max_annihilation = states
        .iter()
        .flat_map(|s| basis.iter().map(move |b| dot(s, b).abs()))
        .fold(0.0, f64::max);
    NullSpace {
        basis,
        complement: range,
        states_used: states.len(),
        max_annihilation,
    }
}

/// `N = ∩ ker s` over sampled states.
pub fn compute_n(c: &GeneratedCone, samples: usize, seed: u64) -> Result<NullSpace> {
    Ok(null_space_of(&compute_states(c, samples, seed)?, c.dim))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub n: usize,
    pub dim_n: usize,
    pub expected_dim: usize,
    /// Largest `|S(b ⊗ ν)|` over level-`n` states `S`, matrix units `b`, `ν ∈ N`.
    pub max_annihilation: f64,
    pub matches: bool,
}

/// Compares the null space of level-`n` states with `M_n(N)`.
pub fn level_check(c: &GeneratedCone, n: usize, base: &NullSpace, samples: usize, seed: u64) -> Result<LevelReport> {
    let states = level_states(c, n, samples, seed)?;
    let level_dim = n * n * c.dim;
    let ns = null_space_of(&states, level_dim);
    let mut worst: f64 = 0.0;
    for b in herm_basis(n) {
        let bc = herm_coords(&b);
        for nu in &base.basis {
            let v = kron(&bc, nu);
            for s in &states {
                worst = worst.max(dot(s, &v).abs());
            }
        }
    }
    let expected = n * n * base.basis.len();
    Ok(LevelReport {
        n,
        dim_n: ns.basis.len(),
        expected_dim: expected,
        max_annihilation: worst,
        matches: ns.basis.len() == expected && worst <= 1e-9,
    })
}

pub fn default_schedule() -> Vec<f64> {
    (0..=20).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureTest {
    pub passed: bool,
    pub first_failure: Option<f64>,
    pub tested: usize,
}

/// Is `r·e + A` in the cone for every `r` of the (decreasing) schedule? A
/// semi-decision at finite precision: the smallest `r` tested bounds what it
/// can see.
pub fn arch_closure_test(a: &[f64], c: &GeneratedCone, schedule: &[f64]) -> ClosureTest {
    for (k, &r) in schedule.iter().enumerate() {
        let x: Vec<f64> = c.unit.iter().zip(a).map(|(e, v)| r * e + v).collect();
        if !c.contains(&x) {
            return ClosureTest {
                passed: false,
                first_failure: Some(r),
                tested: k + 1,
            };
        }
    }
    ClosureTest {
        passed: true,
        first_failure: None,
        tested: schedule.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchResult {
    pub n_basis: Vec<Vec<f64>>,
    pub quotient_dim: usize,
    pub quotient_cone: GeneratedCone,
    pub quotient_unit: Vec<f64>,
    pub states_used: usize,
    pub max_state_on_n: f64,
    /// Largest deviation of `φ(v)` from `φ(lift(q(v)))` over sampled unital
    /// positive maps into `M_2`.
    pub universal_property_deviation: f64,
    pub level2: LevelReport,
    /// `N = {0}`: the cone is returned as is.
    pub unchanged: bool,
}

fn inv_sqrt(t: &Matrix<f64>) -> Result<Matrix<f64>> {
    let spec = eig_hermitian(t)?;
    let d = t.rows();
    let mut out = Matrix::zeros(d, d);
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let v = spec.vector(k);
        out = &out + &Matrix::outer(&v, &v).scale_real(1.0 / lam.max(1e-300).sqrt());
    }
    Ok(out)
}

/// Quotient by `N` followed by Archimedean closure of the image cone.
pub fn archimedeanize(c: &GeneratedCone, samples: usize, seed: u64) -> Result<ArchResult> {
    let states = compute_states(c, samples, seed)?;
    let ns = null_space_of(&states, c.dim);
    let q = ns.complement.clone();
    let unchanged = ns.basis.is_empty();
    let quotient_cone = if unchanged {
        c.clone()
    } else {
        let unit = project(&q, &c.unit);
        match &c.presentation {
            // finitely generated cones are closed
            ConePresentation::Generators(g) => {
                GeneratedCone::generators(q.len(), g.iter().map(|v| project(&q, v)).collect(), unit)?
            }
            _ => GeneratedCone::new(
                q.len(),
                ConePresentation::Quotient {
                    parent: Box::new(c.clone()),
                    basis: q.clone(),
                },
                unit,
            )?,
        }
    };
    let quotient_unit = quotient_cone.unit.clone();
    // unital positive maps v ↦ Σ s_l(v) P_l into M_2 with Σ P_l = I
    let mut worst: f64 = 0.0;
    for t in 0..8u64 {
        let mut g = rng(seed, (1 << 32) + t);
        let terms = 1 + (t as usize % 4).min(states.len().saturating_sub(1));
        let ws: Vec<Matrix<f64>> = (0..terms).map(|_| wishart(&mut g, 2, 2)).collect();
        let total = ws.iter().fold(Matrix::zeros(2, 2), |a, w| &a + w);
        let r = inv_sqrt(&total.hermitian_part())?;
        let ps: Vec<Matrix<f64>> = ws.iter().map(|w| r.matmul(w).matmul(&r)).collect();
        let pick: Vec<&Vec<f64>> = (0..terms).map(|l| &states[(t as usize * 7 + l * 13) % states.len()]).collect();
        let phi = |v: &[f64]| {
            pick.iter()
                .zip(&ps)
                .fold(Matrix::zeros(2, 2), |acc, (s, p)| &acc + &p.scale_real(dot(s, v)))
        };
        for _ in 0..4 {
            let v: Vec<f64> = (0..c.dim).map(|_| gaussian(&mut g)).collect();
            let back = lift(&q, &project(&q, &v));
            worst = worst.max(phi(&v).max_abs_diff(&phi(&back)));
        }
        for nu in &ns.basis {
            worst = worst.max(phi(nu).max_abs());
        }
    }
    // spanning the level-2 state space needs about as many states as its dimension
    let level2 = level_check(c, 2, &ns, (16 * c.dim).min(4 * samples.max(1)), seed ^ 0x5eed)?;
    Ok(ArchResult {
        quotient_dim: q.len(),
        n_basis: ns.basis,
        quotient_cone,
        quotient_unit,
        states_used: states.len(),
        max_state_on_n: ns.max_annihilation,
        universal_property_deviation: worst,
        level2,
        unchanged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_coordinates_round_trip() {
        let h = crate::random::hermitian(&mut rng(1, 0), 3);
        let back = herm_from_coords(&herm_coords(&h), 3);
        assert!(back.max_abs_diff(&h) < 1e-14);
        assert_eq!(frame_projectors(2).len(), 6);
    }

    #[test]
    fn lexicographic_states_and_kernel() {
        let c = GeneratedCone::oracle(Builtin::Lexicographic2);
        let states = compute_states(&c, 32, 0).unwrap();
        for s in &states {
            assert!(s[0].abs() < 1e-9 && (s[1] - 1.0).abs() < 1e-12, "{s:?}");
        }
        let n = compute_n(&c, 32, 0).unwrap();
        assert_eq!(n.basis.len(), 1);
        assert!((n.basis[0][0] - 1.0).abs() < 1e-9 && n.basis[0][1].abs() < 1e-9);
    }

    #[test]
    fn ray_has_single_state() {
        let c = GeneratedCone::oracle(Builtin::Ray1);
        let s = compute_states(&c, 8, 0).unwrap();
        assert!(s.iter().all(|v| (v[0] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn psd_states_are_densities() {
        let c = GeneratedCone::oracle(Builtin::Psd2);
        for s in compute_states(&c, 16, 3).unwrap() {
            let rho = herm_from_coords(&s, 2);
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
            assert!(eig_hermitian(&rho).unwrap().min().unwrap() > -1e-6);
        }
    }

    #[test]
    fn closure_examples() {
        let lex = GeneratedCone::oracle(Builtin::Lexicographic2);
        assert!(!lex.contains(&[-5.0, 0.0]));
        assert!(arch_closure_test(&[-5.0, 0.0], &lex, &default_schedule()).passed);
        let psd = GeneratedCone::oracle(Builtin::Psd2);
        let a = herm_coords(&Matrix::diag_real(&[1.0, -0.1]));
        let t = arch_closure_test(&a, &psd, &default_schedule());
        assert!(!t.passed && t.first_failure.unwrap() < 0.1);
        assert!(arch_closure_test(&herm_coords(&Matrix::identity(2)), &psd, &default_schedule()).passed);
    }

    #[test]
    fn lexicographic_archimedeanization() {
        let c = GeneratedCone::oracle(Builtin::Lexicographic2);
        let r = archimedeanize(&c, 32, 0).unwrap();
        assert_eq!(r.quotient_dim, 1);
        assert!(r.quotient_cone.contains(&[1.0]) && r.quotient_cone.contains(&[0.0]));
        assert!(!r.quotient_cone.contains(&[-1e-3]));
        assert!((r.quotient_unit[0] - 1.0).abs() < 1e-9);
        assert!(r.universal_property_deviation < 1e-9);
        assert!(r.level2.matches, "{:?}", r.level2);
        assert_eq!(r.level2.dim_n, 4);
    }

    #[test]
    fn cone_json_round_trip() {
        let c = GeneratedCone::oracle(Builtin::Lexicographic2);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"dim":2,"oracle":"builtin:lexicographic2","unit":[0.0,1.0]}"#);
        assert_eq!(serde_json::from_str::<GeneratedCone>(&s).unwrap(), c);
        assert!(serde_json::from_str::<GeneratedCone>(r#"{"dim":2,"unit":[0,1]}"#).is_err());
        let g = GeneratedCone::generators(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(g.is_proper(), Some(true));
        assert!(g.check_order_unit(16, 0));
    }
}
