//! Truncated Connes distance between vector states.
//!
//! For states `v, w` and the stored algebra basis `a_i`, the distance is
//!
//! ```text
//! d(v, w) = sup { Σ c_i b_i : ‖Σ c_i [D, a_i]‖ ≤ 1 },   b_i = ⟨v,a_i v⟩ - ⟨w,a_i w⟩.
//! ```
//!
//! The constraint set is symmetric under `c ↦ -c`, so the supremum of the
//! signed objective already equals the supremum of its absolute value.
//! Internally the Hermitian generators `H_i = -i [D, a_i]` are used; they
//! have the same operator norms as the commutators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_norm, spectral_norm, CMatrix, I};
use crate::registry::{Named, Registry};
use crate::triple_model::{state_expectation, DistanceMatrix, TruncatedTriple, VectorState};

const REFINE_ROUNDS: usize = 3;
const REFINE_TRIGGER: f64 = 1e-6;

/// Feasibility slack accepted when re-checking returned coefficients.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// Sparse Hermitian matrix as `(row, col, value)` triplets (both triangles).
#[derive(Clone, Debug)]
struct SparseHermitian {
    entries: Vec<(usize, usize, Complex64)>,
}

/// Commutator generators of one triple, shared by all problems built on it.
#[derive(Debug)]
pub struct CommutatorBasis {
    dim: usize,
    generators: Vec<SparseHermitian>,
    /// Pseudo-inverse of the Gram matrix `Q_ij = Re tr(H_i H_j)`.
    gram_pinv: DMatrix<f64>,
    /// Orthogonal projector onto the range of the Gram matrix.
    range_projector: DMatrix<f64>,
}

impl CommutatorBasis {
    pub fn new(t: &TruncatedTriple) -> Result<Self> {
        t.validate()?;
        let d = &t.dirac_eigenvalues;
        let generators: Vec<SparseHermitian> = t
            .algebra_basis
            .iter()
            .map(|a| {
                let m = a.matrix();
                let mut entries = Vec::new();
                for c in 0..m.ncols() {
                    for r in 0..m.nrows() {
                        let value = -I * m[(r, c)] * (d[r] - d[c]);
                        if value != Complex64::new(0.0, 0.0) {
                            entries.push((r, c, value));
                        }
                    }
                }
                SparseHermitian { entries }
            })
            .collect();
        let p = generators.len();
        let dense: Vec<CMatrix> = generators.iter().map(|g| to_dense(g, t.dim())).collect();
        let gram = DMatrix::from_fn(p, p, |i, j| {
            generators[j]
                .entries
                .iter()
                .map(|&(r, c, v)| (dense[i][(r, c)].conj() * v).re)
                .sum()
        });
        let gram = (&gram + gram.transpose()) * 0.5;
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut gram_pinv = DMatrix::zeros(p, p);
        let mut range_projector = DMatrix::zeros(p, p);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > 1e-12 * top.max(f64::MIN_POSITIVE) {
                let u = eig.eigenvectors.column(k);
                gram_pinv += &u * u.transpose() / lambda;
                range_projector += &u * u.transpose();
            }
        }
        Ok(CommutatorBasis {
            dim: t.dim(),
            generators,
            gram_pinv,
            range_projector,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The commutator `[D, a_i]` (anti-Hermitian) as a dense matrix.
    pub fn commutator(&self, i: usize) -> CMatrix {
        to_dense(&self.generators[i], self.dim) * I
    }

    /// `Σ c_i H_i`.
    pub fn combine(&self, c: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (g, &ci) in self.generators.iter().zip(c) {
            if ci != 0.0 {
                for &(r, col, v) in &g.entries {
                    out[(r, col)] += v * ci;
                }
            }
        }
        out
    }

    /// Adjoint map `X ↦ (Re tr(H_i X))_i`.
    fn adjoint(&self, x: &CMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.generators.len(),
            self.generators.iter().map(|g| {
                g.entries
                    .iter()
                    .map(|&(r, c, v)| (v.conj() * x[(r, c)]).re)
                    .sum::<f64>()
            }),
        )
    }

    /// `‖Σ c_i [D, a_i]‖`.
    pub fn constraint_norm(&self, c: &[f64]) -> f64 {
        hermitian_norm(&self.combine(c))
    }
}

fn to_dense(g: &SparseHermitian, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for &(r, c, v) in &g.entries {
        m[(r, c)] = v;
    }
    m
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: Vec<f64>,
    pub basis: Arc<CommutatorBasis>,
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

pub fn build_problem(t: &TruncatedTriple, v: &VectorState, w: &VectorState) -> Result<SdpProblem> {
    problem_with_basis(t, Arc::new(CommutatorBasis::new(t)?), v, w)
}

pub fn problem_with_basis(
    t: &TruncatedTriple,
    basis: Arc<CommutatorBasis>,
    v: &VectorState,
    w: &VectorState,
) -> Result<SdpProblem> {
    let objective = t
        .algebra_basis
        .iter()
        .map(|a| Ok(state_expectation(t, v, a)? - state_expectation(t, w, a)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SdpProblem { objective, basis })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation parameter of the splitting.
    pub relaxation: f64,
    pub initial_penalty: f64,
    /// Stop once the certified duality gap falls below this relative level.
    pub gap_tol: f64,

    /// Restarts and seed used by randomized solvers.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 20_000,
            relaxation: 1.6,
            initial_penalty: 1.0,
            gap_tol: 1e-3,
            restarts: 100,
            seed: 0,
        }
    }
}

/// Solver state that can seed a related problem on the same basis.
#[derive(Clone, Debug, Default)]
pub struct WarmStart {
    z: Option<CMatrix>,
    u: Option<CMatrix>,
    penalty: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    /// Certified distance: objective at the returned, feasible coefficients.
    pub value: f64,
    pub coefficients: Vec<f64>,
    pub status: SolveStatus,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Dual bound `≥ value` when available.
    pub upper_bound: Option<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub warm_start: WarmStart,
}

pub trait DistanceSolver: Named + Send + Sync {
    fn solve(&self, p: &SdpProblem, opts: &SolverOptions, warm: Option<&WarmStart>) -> Result<SdpSolution>;
}

fn zero_solution(p: &SdpProblem) -> SdpSolution {
    SdpSolution {
        value: 0.0,
        coefficients: vec![0.0; p.basis.len()],
        status: SolveStatus::Optimal,
        primal_residual: 0.0,
        dual_residual: 0.0,
        upper_bound: Some(0.0),
        iterations: 0,
        warm_start: WarmStart::default(),
    }
}

/// Projection onto the spectral-norm unit ball: clip eigenvalues to `[-1, 1]`.
fn project_ball(x: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(x);
    let mut out = x.clone();
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() > 1.0 {
            let excess = lambda - lambda.signum();
            let u = vectors.column(k);
            out -= &u * u.adjoint() * Complex64::new(excess, 0.0);
        }
    }
    out
}

fn nuclear_norm(x: &CMatrix) -> f64 {
    crate::linalg::hermitian_eigenvalues(x).iter().map(|l| l.abs()).sum()
}

fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Operator splitting (ADMM with over-relaxation) on
/// `max bᵀc  s.t.  Σ c_i H_i = Z,  ‖Z‖ ≤ 1`.
pub struct AdmmSolver;

impl Named for AdmmSolver {
    fn name(&self) -> &'static str {
        "admm"
    }
    fn describe(&self) -> &'static str {
        "operator splitting with spectral-ball projection"
    }
}

/// One sweep of the splitting from `(Z, U)`.
struct Sweep {
    c: DVector<f64>,
    ac: CMatrix,
    z: CMatrix,
    u: CMatrix,
}

fn sweep(basis: &CommutatorBasis, b: &DVector<f64>, rho: f64, alpha: f64, z: &CMatrix, u: &CMatrix) -> Sweep {
    let rhs = b / rho + basis.adjoint(&(z - u));
    let c = &basis.gram_pinv * rhs;
    let ac = basis.combine(c.as_slice());
    let x_hat = &ac * Complex64::new(alpha, 0.0) + z * Complex64::new(1.0 - alpha, 0.0);
    let z_next = hermitian_part(&project_ball(&(&x_hat + u)));
    let u_next = u + &x_hat - &z_next;
    Sweep {
        c,
        ac,
        z: z_next,
        u: u_next,
    }
}

impl DistanceSolver for AdmmSolver {
    fn solve(&self, p: &SdpProblem, opts: &SolverOptions, warm: Option<&WarmStart>) -> Result<SdpSolution> {
        let basis = &p.basis;
        if p.objective.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: p.objective.len(),
            });
        }
        let b = DVector::from_column_slice(&p.objective);
        let bnorm = b.norm();
        if bnorm == 0.0 {
            return Ok(zero_solution(p));
        }
        let off_range = (&b - &basis.range_projector * &b).norm();
        if off_range > 1e-9 * bnorm {
            return Ok(SdpSolution {
                value: f64::INFINITY,
                status: SolveStatus::Infeasible,
                upper_bound: None,
                ..zero_solution(p)
            });
        }
        let n = basis.dim();
        let alpha = opts.relaxation;
        let mut rho = match warm {
            Some(w) if w.penalty > 0.0 => w.penalty,
            _ => opts.initial_penalty,
        };
        let mut z = warm.and_then(|w| w.z.clone()).unwrap_or_else(|| CMatrix::zeros(n, n));
        let mut u = warm.and_then(|w| w.u.clone()).unwrap_or_else(|| CMatrix::zeros(n, n));
        let mut c = DVector::zeros(basis.len());
        let mut best: Option<(f64, DVector<f64>)> = None;
        let mut upper = f64::INFINITY;
        let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
        let mut status = SolveStatus::MaxIter;
        let mut iterations = 0;
        let check_every = 10;

        while iterations < opts.max_iter {
            iterations += 1;
            let mut out = sweep(basis, &b, rho, alpha, &z, &u);
            let z_old = z.clone();
            c = out.c.clone();

            let scale_p = out.ac.norm().max(out.z.norm()).max(1.0);
            primal = (&out.ac - &out.z).norm() / scale_p;
            let y_adj = basis.adjoint(&out.u) * rho;
            dual = rho * basis.adjoint(&(&out.z - &z_old)).norm() / y_adj.norm().max(1.0);

            if iterations % check_every == 0 || (primal <= opts.tol && dual <= opts.tol) {
                // feasible rescaling gives a lower bound, the corrected dual an upper bound
                let norm = hermitian_norm(&out.ac).max(1.0);
                let value = b.dot(&c) / norm;
                if best.as_ref().map_or(true, |(v, _)| value > *v) {
                    best = Some((value, &c / norm));
                }
                let y = &out.u * Complex64::new(rho, 0.0);
                let correction = &basis.gram_pinv * (&b - basis.adjoint(&y));
                let y_feasible = &y + basis.combine(correction.as_slice());
                upper = upper.min(nuclear_norm(&hermitian_part(&y_feasible)));
                let lower = best.as_ref().map_or(0.0, |(v, _)| *v);
                let gap_ok = upper - lower <= opts.gap_tol * lower.abs().max(1.0);
                if (primal <= opts.tol && dual <= opts.tol) || gap_ok {
                    status = SolveStatus::Optimal;
                    z = out.z;
                    u = out.u;
                    break;
                }
                // residual balancing
                if primal > 10.0 * dual || dual > 10.0 * primal {
                    let factor = if primal > dual { 2.0 } else { 0.5 };
                    rho *= factor;
                    out.u /= Complex64::new(factor, 0.0);
                }
            }
            z = out.z;
            u = out.u;
        }
        let (value, coefficients) = best.unwrap_or_else(|| {
            let norm = hermitian_norm(&basis.combine(c.as_slice())).max(1.0);
            (b.dot(&c) / norm, &c / norm)
        });
        Ok(SdpSolution {
            value,
            coefficients: coefficients.iter().copied().collect(),
            status,
            primal_residual: primal,
            dual_residual: dual,
            upper_bound: upper.is_finite().then_some(upper),
            iterations,
            warm_start: WarmStart {
                z: Some(z),
                u: Some(u),
                penalty: rho,
            },
        })
    }
}

/// Lower bound by projected subgradient ascent on `bᵀc / ‖Σ c_i H_i‖` with
/// random restarts.
pub struct SubgradientOracle;

impl Named for SubgradientOracle {
    fn name(&self) -> &'static str {
        "subgradient"
    }
    fn describe(&self) -> &'static str {
        "randomized subgradient ascent (verification oracle)"
    }
}

impl DistanceSolver for SubgradientOracle {
    fn solve(&self, p: &SdpProblem, opts: &SolverOptions, _warm: Option<&WarmStart>) -> Result<SdpSolution> {
        let value = oracle_distance(p, opts.restarts, opts.seed, opts.max_iter.min(2000))?;
        Ok(SdpSolution {
            value: value.0,
            coefficients: value.1,
            status: SolveStatus::MaxIter,
            primal_residual: 0.0,
            dual_residual: f64::NAN,
            upper_bound: None,
            iterations: opts.max_iter.min(2000),
            warm_start: WarmStart::default(),
        })
    }
}

/// Best feasible value found by subgradient ascent from `restarts` seeded
/// starting points, and the corresponding coefficients.
pub fn oracle_distance(p: &SdpProblem, restarts: usize, rng_seed: u64, iterations: usize) -> Result<(f64, Vec<f64>)> {
    let basis = &p.basis;
    if p.objective.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: p.objective.len(),
        });
    }
    let b = DVector::from_column_slice(&p.objective);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best = (0.0, vec![0.0; basis.len()]);
    if b.norm() == 0.0 {
        return Ok(best);
    }
    for restart in 0..restarts {
        let mut c = if restart == 0 {
            b.clone()
        } else {
            DVector::from_fn(basis.len(), |_, _| StandardNormal.sample(&mut rng))
        };
        for k in 0..iterations {
            let ac = basis.combine(c.as_slice());
            let (values, vectors) = hermitian_eigen(&ac);
            let (idx, lambda) = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, l)| (i, *l))
                .expect("nonempty spectrum");
            if lambda.abs() < 1e-300 {
                break;
            }
            c /= lambda.abs();
            let value = b.dot(&c);
            if value > best.0 {
                best = (value, c.iter().copied().collect());
            }
            // subgradient of bᵀc / ‖A c‖ at ‖A c‖ = 1
            let top = vectors.column(idx);
            let outer = &top * top.adjoint() * Complex64::new(lambda.signum(), 0.0);
            let grad_norm = basis.adjoint(&outer);
            let g = &b - grad_norm * value;
            let gn = g.norm();
            if gn < 1e-14 {
                break;
            }
            let step = c.norm() / (gn * (1.0 + k as f64).sqrt()) * 0.5;
            c += g * step;
        }
    }
    Ok(best)
}

pub fn solver_registry() -> Registry<dyn DistanceSolver> {
    let mut r: Registry<dyn DistanceSolver> = Registry::new("distance solver");
    r.register(Arc::new(AdmmSolver)).register(Arc::new(SubgradientOracle));
    r
}

/// Convenience entry point: ADMM with the given tolerance and iteration cap.
pub fn solve_distance(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    AdmmSolver.solve(
        p,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
        None,
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub upper_bound: Option<f64>,
    /// Largest singular value of `Σ c_i [D, a_i]`, recomputed outside the solver.
    pub constraint_norm: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub distances: DistanceMatrix,
    pub pairs: Vec<PairReport>,
    pub max_triangle_violation: f64,
}

impl DistanceReport {
    pub fn all_optimal(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.status == SolveStatus::Optimal && p.certified)
    }
}

/// Solves every pair once. Rows run in parallel; within a row each solve is
/// warm-started from the previous pair, which shares its first state.
pub fn distance_matrix(
    t: &TruncatedTriple,
    states: &[VectorState],
    solver: &dyn DistanceSolver,
    opts: &SolverOptions,
) -> Result<DistanceReport> {
    if states.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 states, got {}",
            states.len()
        )));
    }
    let basis = Arc::new(CommutatorBasis::new(t)?);
    let k = states.len();
    let solve_pair = |i: usize, j: usize, opts: &SolverOptions, warm: Option<&WarmStart>| {
        let p = problem_with_basis(t, basis.clone(), &states[i], &states[j])?;
        let sol = solver.solve(&p, opts, warm)?;
        let certificate = spectral_norm(&basis.combine(&sol.coefficients));
        let report = PairReport {
            i,
            j,
            value: sol.value.max(0.0),
            status: sol.status,
            iterations: sol.iterations,
            upper_bound: sol.upper_bound,
            constraint_norm: certificate,
            certified: certificate <= 1.0 + CERTIFICATE_TOL,
        };
        Ok::<_, Error>((report, sol.warm_start))
    };
    let rows: Vec<Vec<PairReport>> = (0..k - 1)
        .into_par_iter()
        .map(|i| {
            let mut warm: Option<WarmStart> = None;
            let mut out = Vec::with_capacity(k - i - 1);
            for j in i + 1..k {
                let (report, next) = solve_pair(i, j, opts, warm.as_ref())?;
                out.push(report);
                warm = Some(next);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut pairs: Vec<PairReport> = rows.into_iter().flatten().collect();
    let index = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * k - i - 1) / 2 + (j - i - 1)
    };

    // Values are lower bounds, so a violated triangle means its two short
    // sides are loose. Those pairs are re-solved with a tighter gap.
    let mut refine_opts = *opts;
    for _ in 0..REFINE_ROUNDS {
        let mut distances = DistanceMatrix::zeros(k);
        for p in &pairs {
            distances.set(p.i, p.j, p.value);
        }
        let mut loose = std::collections::BTreeSet::new();
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if a != b
                        && b != c
                        && a != c
                        && distances.get(a, c) - distances.get(a, b) - distances.get(b, c) > REFINE_TRIGGER
                    {
                        loose.insert(index(a, b));
                        loose.insert(index(b, c));
                    }
                }
            }
        }
        if loose.is_empty() {
            break;
        }
        refine_opts.gap_tol *= 0.01;
        refine_opts.max_iter *= 2;
        let loose: Vec<usize> = loose.into_iter().collect();
        let refined: Vec<PairReport> = loose
            .par_iter()
            .map(|&idx| solve_pair(pairs[idx].i, pairs[idx].j, &refine_opts, None).map(|r| r.0))
            .collect::<Result<_>>()?;
        for (idx, mut r) in loose.into_iter().zip(refined) {
            r.iterations += pairs[idx].iterations;
            if r.value < pairs[idx].value {
                r.value = pairs[idx].value;
            }
            pairs[idx] = r;
        }
    }

    let mut distances = DistanceMatrix::zeros(k);
    for p in &pairs {
        distances.set(p.i, p.j, p.value);
    }
    let max_triangle_violation = distances.max_triangle_violation();
    Ok(DistanceReport {
        distances,
        pairs,
        max_triangle_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometries::build_circle;

    #[test]
    fn identical_states_have_zero_distance() {
        let t = build_circle(2.0).unwrap();
        let v = VectorState::basis(5, 1);
        let p = build_problem(&t, &v, &v).unwrap();
        assert!(p.objective.iter().all(|&x| x == 0.0));
        let s = solve_distance(&p, 1e-6, 100).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(oracle_distance(&p, 3, 0, 10).unwrap().0, 0.0);
    }

    #[test]
    fn identity_generator_vanishes() {
        let t = build_circle(2.0).unwrap();
        let basis = CommutatorBasis::new(&t).unwrap();
        assert!(basis.commutator(0).iter().all(|z| z.norm() == 0.0));
        let p = build_problem(&t, &VectorState::basis(5, 2), &VectorState::basis(5, 3)).unwrap();
        assert_eq!(p.objective[0], 0.0);
        // cos θ has zero diagonal, so basis states cannot tell it apart
        assert_eq!(p.objective[1], 0.0);
    }

    #[test]
    fn commutators_are_anti_hermitian() {
        let t = build_circle(3.0).unwrap();
        let basis = CommutatorBasis::new(&t).unwrap();
        for i in 0..basis.len() {
            let k = basis.commutator(i);
            assert!((&k + k.adjoint()).norm() < 1e-14);
        }
    }

    #[test]
    fn ball_projection_clips_spectrum() {
        let m = CMatrix::from_fn(3, 3, |r, c| Complex64::new((r + c) as f64, (r as f64) - (c as f64)));
        let z = project_ball(&m);
        assert!(hermitian_norm(&z) <= 1.0 + 1e-12);
    }

    #[test]
    fn unbounded_objective_is_infeasible() {
        // a single generator that commutes with D but separates the states
        let mut t = build_circle(1.0).unwrap();
        t.algebra_basis.truncate(1);
        t.algebra_basis[0] = crate::triple_model::HermitianMatrix::new(
            CMatrix::from_diagonal(&DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            "projector",
        )
        .unwrap();
        let p = build_problem(&t, &VectorState::basis(3, 0), &VectorState::basis(3, 1)).unwrap();
        assert_eq!(solve_distance(&p, 1e-6, 100).unwrap().status, SolveStatus::Infeasible);
    }
}
