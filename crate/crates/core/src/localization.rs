//! Dispersion and barycenters of vector states, the repulsive energy used to
//! forge new states, its minimizer, and analytic heat-flow states.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometries::{eigenvector_values, Point};
use crate::linalg::{hermitian_eigen, normalize, CMatrix, CVector};
use crate::triple_model::{Manifold, TruncatedTriple, VectorState};

/// Below this norm the mean embedded position has no well-defined barycenter.
pub const DEGENERATE_MEAN: f64 = 1e-6;

/// Lower clamp applied to the dispersion before it is inverted.
pub const ETA_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub eta: f64,
    pub mean_phi: Vec<f64>,
    /// `None` when the state is degenerate or the triple has no model manifold.
    pub barycenter: Option<Point>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub g_e: f64,
    /// Mean embedded positions of the states generated so far.
    pub existing_states: Vec<Vec<f64>>,
}

impl EnergyParams {
    pub fn new(g_e: f64, existing_states: Vec<Vec<f64>>) -> Result<Self> {
        if !(g_e >= 0.0) {
            return Err(Error::InvalidArgument(format!("g_e must be >= 0, got {g_e}")));
        }
        Ok(EnergyParams { g_e, existing_states })
    }
}

/// Smallest repulsion coupling for which the sufficiency condition holds,
/// given Lipschitz-type bounds `alpha` and `beta` on the dispersion landscape.
pub fn sufficient_repulsion(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need alpha > 0 and beta >= 0, got alpha={alpha}, beta={beta}"
        )));
    }
    Ok((1.0 - beta * beta / (alpha * alpha)).max(0.0))
}

fn check_dim(t: &TruncatedTriple, v: &CVector) -> Result<()> {
    if v.len() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Rayleigh quotients of `φᵢ` and `φᵢ²` together with the products needed for gradients.
struct Moments {
    mean: Vec<f64>,
    second: Vec<f64>,
    phi_v: Vec<CVector>,
    phi_sq_v: Vec<CVector>,
    norm_sq: f64,
}

impl Moments {
    fn new(t: &TruncatedTriple, v: &CVector) -> Self {
        let norm_sq = v.norm_squared();
        let phi_v: Vec<CVector> = t.phi.iter().map(|a| a.matrix() * v).collect();
        let phi_sq_v: Vec<CVector> = t.phi_sq.iter().map(|a| a.matrix() * v).collect();
        let mean = phi_v.iter().map(|av| v.dotc(av).re / norm_sq).collect();
        let second = phi_sq_v.iter().map(|av| v.dotc(av).re / norm_sq).collect();
        Moments {
            mean,
            second,
            phi_v,
            phi_sq_v,
            norm_sq,
        }
    }

    fn eta(&self) -> f64 {
        let raw: f64 = self.second.iter().sum::<f64>() - self.mean.iter().map(|m| m * m).sum::<f64>();
        raw.max(0.0)
    }

    /// Gradient of the quotient `⟨v,Av⟩/⟨v,v⟩` given `Av` and its value.
    fn quotient_gradient(&self, v: &CVector, av: &CVector, value: f64) -> CVector {
        (av - v * Complex64::new(value, 0.0)) * Complex64::new(2.0 / self.norm_sq, 0.0)
    }

    fn eta_gradient(&self, v: &CVector) -> CVector {
        let mut g = CVector::zeros(v.len());
        for (av, &value) in self.phi_sq_v.iter().zip(&self.second) {
            g += self.quotient_gradient(v, av, value);
        }
        for (av, &value) in self.phi_v.iter().zip(&self.mean) {
            g -= self.quotient_gradient(v, av, value) * Complex64::new(2.0 * value, 0.0);
        }
        g
    }
}

fn barycenter(manifold: Option<Manifold>, mean: &[f64]) -> (Option<Point>, bool) {
    let norm = mean.iter().map(|m| m * m).sum::<f64>().sqrt();
    if norm < DEGENERATE_MEAN {
        return (None, true);
    }
    (manifold.and_then(|m| Point::project(m, mean)), false)
}

pub fn dispersion(t: &TruncatedTriple, v: &VectorState) -> Result<DispersionReport> {
    check_dim(t, v.coefficients())?;
    let moments = Moments::new(t, v.coefficients());
    let (barycenter, degenerate) = barycenter(t.manifold, &moments.mean);
    Ok(DispersionReport {
        eta: moments.eta(),
        mean_phi: moments.mean,
        barycenter,
        degenerate,
    })
}

/// `e(v) = -1/η(v) + g_e Σ_w 1/‖E_v[φ] - w‖²`.
///
/// Expectations are Rayleigh quotients, so the energy is defined for any
/// nonzero vector and is invariant under rescaling. A state sitting exactly
/// on a stored mean position has infinite energy.
pub fn energy(t: &TruncatedTriple, v: &VectorState, params: &EnergyParams) -> Result<f64> {
    check_dim(t, v.coefficients())?;
    Ok(energy_raw(t, v.coefficients(), params))
}

pub(crate) fn energy_raw(t: &TruncatedTriple, v: &CVector, params: &EnergyParams) -> f64 {
    let moments = Moments::new(t, v);
    let mut e = -1.0 / moments.eta().max(ETA_FLOOR);
    for w in &params.existing_states {
        let d2 = squared_distance(&moments.mean, w);
        if d2 == 0.0 {
            return f64::INFINITY;
        }
        e += params.g_e / d2;
    }
    e
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gradient of [`energy`] with respect to the real and imaginary parts of the
/// coefficients, as a complex vector `g` with `de = Re⟨g, δv⟩`. It is tangent
/// to the unit sphere of `H_Λ` at normalized `v`.
pub fn energy_gradient(t: &TruncatedTriple, v: &VectorState, params: &EnergyParams) -> Result<CVector> {
    check_dim(t, v.coefficients())?;
    Ok(energy_and_gradient(t, v.coefficients(), params).1)
}

fn energy_and_gradient(t: &TruncatedTriple, v: &CVector, params: &EnergyParams) -> (f64, CVector) {
    let (e, g, _) = evaluate(t, v, params);
    (e, g)
}

fn evaluate(t: &TruncatedTriple, v: &CVector, params: &EnergyParams) -> (f64, CVector, Moments) {
    let moments = Moments::new(t, v);
    let eta = moments.eta();
    let mut e = -1.0 / eta.max(ETA_FLOOR);
    let mut g = if eta > ETA_FLOOR {
        moments.eta_gradient(v) * Complex64::new(1.0 / (eta * eta), 0.0)
    } else {
        CVector::zeros(v.len())
    };
    if params.existing_states.is_empty() || params.g_e == 0.0 {
        return (e, g, moments);
    }
    let mean_grads: Vec<CVector> = moments
        .phi_v
        .iter()
        .zip(&moments.mean)
        .map(|(av, &value)| moments.quotient_gradient(v, av, value))
        .collect();
    for w in &params.existing_states {
        let d2 = squared_distance(&moments.mean, w);
        if d2 == 0.0 {
            return (f64::INFINITY, CVector::zeros(v.len()), moments);
        }
        e += params.g_e / d2;
        let scale = -2.0 * params.g_e / (d2 * d2);
        for ((mi, wi), mg) in moments.mean.iter().zip(w).zip(&mean_grads) {
            g += mg * Complex64::new(scale * (mi - wi), 0.0);
        }
    }
    (e, g, moments)
}

/// `⟨u,Au⟩/‖u‖² - ⟨v,Av⟩/‖v‖²` without cancellation between the two quotients.
fn quotient_difference(u: &CVector, au: &CVector, v: &CVector, av: &CVector) -> f64 {
    let (nu, nv) = (u.norm_squared(), v.norm_squared());
    let du = u - v;
    let dn = -(v - u).dotc(&(v + u)).re;
    let numerator = nv * du.dotc(&(au + av)).re - v.dotc(av).re * dn;
    numerator / (nu * nv)
}

/// `e(u) - e(v)` accurate to rounding relative to the difference itself, so
/// that line searches keep working once energy values stop resolving steps.
fn energy_difference(params: &EnergyParams, u: &CVector, mu: &Moments, v: &CVector, mv: &Moments) -> f64 {
    let dmean: Vec<f64> = mu
        .phi_v
        .iter()
        .zip(&mv.phi_v)
        .map(|(au, av)| quotient_difference(u, au, v, av))
        .collect();
    let dsecond: f64 = mu
        .phi_sq_v
        .iter()
        .zip(&mv.phi_sq_v)
        .map(|(au, av)| quotient_difference(u, au, v, av))
        .sum();
    let (eta_u, eta_v) = (mu.eta(), mv.eta());
    let mut diff = if eta_u > ETA_FLOOR && eta_v > ETA_FLOOR {
        let deta = dsecond
            - dmean
                .iter()
                .zip(mu.mean.iter().zip(&mv.mean))
                .map(|(d, (a, b))| d * (a + b))
                .sum::<f64>();
        deta / (eta_u * eta_v)
    } else {
        1.0 / eta_v.max(ETA_FLOOR) - 1.0 / eta_u.max(ETA_FLOOR)
    };
    if params.g_e != 0.0 {
        for w in &params.existing_states {
            let (du2, dv2) = (squared_distance(&mu.mean, w), squared_distance(&mv.mean, w));
            let shrink: f64 = dmean
                .iter()
                .zip(mu.mean.iter().zip(&mv.mean))
                .zip(w)
                .map(|((d, (a, b)), wi)| -d * (a + b - 2.0 * wi))
                .sum();
            diff += params.g_e * shrink / (du2 * dv2);
        }
    }
    diff
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerConfig {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub restarts: usize,
    pub memory: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            max_iter: 500,
            grad_tol: 1e-8,
            restarts: 3,
            memory: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub state: VectorState,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Energy after every accepted iteration of the winning restart.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    let mut v = CVector::from_fn(dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    normalize(&mut v);
    v
}

fn real_dot(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).re
}

fn project_tangent(v: &CVector, x: &CVector) -> CVector {
    x - v * Complex64::new(real_dot(v, x), 0.0)
}

/// Riemannian L-BFGS on the unit sphere of `H_Λ` with Armijo backtracking.
fn descend(t: &TruncatedTriple, params: &EnergyParams, start: CVector, cfg: &MinimizerConfig) -> MinimizeOutcome {
    let mut v = start;
    let (mut e, mut g, mut moments) = evaluate(t, &v, params);
    let mut history: VecDeque<(CVector, CVector, f64)> = VecDeque::new();
    let mut trace = vec![e];
    let mut iterations = 0;
    while iterations < cfg.max_iter && e.is_finite() {
        let gnorm = g.norm();
        if gnorm < cfg.grad_tol {
            break;
        }
        let mut d = project_tangent(&v, &lbfgs_direction(&g, &history));
        let mut slope = real_dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = lbfgs_direction(&g, &history);
            slope = real_dot(&g, &d);
        }
        let mut found = line_search(t, params, &v, &moments, &d, slope);
        if found.is_none() && !history.is_empty() {
            history.clear();
            d = lbfgs_direction(&g, &history);
            found = line_search(t, params, &v, &moments, &d, real_dot(&g, &d));
        }
        let Some((next, decrease)) = found else {
            break;
        };
        let (e_next, g_next, m_next) = evaluate(t, &next, params);
        iterations += 1;
        let s = project_tangent(&next, &(&next - &v));
        let y = &g_next - project_tangent(&next, &g);
        for (ps, py, rho) in history.iter_mut() {
            *ps = project_tangent(&next, ps);
            *py = project_tangent(&next, py);
            let sy = real_dot(ps, py);
            *rho = if sy > 0.0 { 1.0 / sy } else { 0.0 };
        }
        history.retain(|(_, _, rho)| *rho > 0.0);
        let sy = real_dot(&s, &y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        v = next;
        g = g_next;
        moments = m_next;
        e = e_next;
        // the recorded energy follows the accurate differences
        let last = *trace.last().expect("trace starts non-empty");
        trace.push(last + decrease);
    }
    let grad_norm = g.norm();
    MinimizeOutcome {
        state: VectorState::from_normalized(v).expect("iterates stay normalized"),
        energy: e,
        iterations,
        grad_norm,
        converged: grad_norm < cfg.grad_tol,
        trace,
    }
}

fn lbfgs_direction(g: &CVector, history: &VecDeque<(CVector, CVector, f64)>) -> CVector {
    let mut q = -g.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * real_dot(s, &q);
        q -= y * Complex64::new(a, 0.0);
        alphas.push(a);
    }
    let gamma = match history.back() {
        Some((s, y, _)) => real_dot(s, y) / real_dot(y, y),
        None => 1.0 / g.norm().max(1.0),
    };
    q *= Complex64::new(gamma, 0.0);
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * real_dot(y, &q);
        q += s * Complex64::new(a - b, 0.0);
    }
    q
}

/// Backtracking along the retraction `v ↦ (v + αd)/‖v + αd‖`; returns the
/// accepted point and its (negative) energy change.
fn line_search(
    t: &TruncatedTriple,
    params: &EnergyParams,
    v: &CVector,
    moments: &Moments,
    d: &CVector,
    slope: f64,
) -> Option<(CVector, f64)> {
    if !(slope < 0.0) {
        return None;
    }
    let mut step = 1.0;
    for _ in 0..60 {
        let mut trial = v + d * Complex64::new(step, 0.0);
        normalize(&mut trial);
        if trial == *v {
            return None;
        }
        let mt = Moments::new(t, &trial);
        let change = energy_difference(params, &trial, &mt, v, moments);
        if change <= 1e-4 * step * slope {
            return Some((trial, change));
        }
        step *= 0.5;
    }
    None
}

/// Minimizes the energy from `cfg.restarts` seeded random starts (standard
/// complex Gaussian coefficients) and keeps the lowest energy. Deterministic
/// for a given seed.
pub fn minimize_state(
    t: &TruncatedTriple,
    params: &EnergyParams,
    rng_seed: u64,
    cfg: &MinimizerConfig,
) -> Result<MinimizeOutcome> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let starts: Vec<CVector> = (0..cfg.restarts).map(|_| random_unit(t.dim(), &mut rng)).collect();
    let outcomes: Vec<MinimizeOutcome> = starts
        .into_par_iter()
        .map(|start| descend(t, params, start, cfg))
        .collect();
    Ok(outcomes
        .into_iter()
        .reduce(|best, o| if o.energy < best.energy { o } else { best })
        .expect("restarts > 0"))
}

/// Descends from a given start instead of random ones.
pub fn minimize_from(
    t: &TruncatedTriple,
    params: &EnergyParams,
    start: &VectorState,
    cfg: &MinimizerConfig,
) -> Result<MinimizeOutcome> {
    check_dim(t, start.coefficients())?;
    Ok(descend(t, params, start.coefficients().clone(), cfg))
}

/// Top eigenvector of `Σ nᵢ φᵢ`: the state pushed furthest towards the
/// direction `n` of the embedding.
pub fn directional_state(t: &TruncatedTriple, direction: &[f64]) -> Result<VectorState> {
    if direction.len() != t.embedding_dim() {
        return Err(Error::DimensionMismatch {
            expected: t.embedding_dim(),
            found: direction.len(),
        });
    }
    if direction.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let mut m = CMatrix::zeros(t.dim(), t.dim());
    for (phi, &n) in t.phi.iter().zip(direction) {
        m += phi.matrix() * Complex64::new(n, 0.0);
    }
    let (_, vectors) = hermitian_eigen(&m);
    VectorState::new(vectors.column(t.dim() - 1).into_owned())
}

/// `t_Λ = 2m Λ⁻² log Λ`.
pub fn heat_time(spectral_dim: u32, cutoff: f64) -> Result<f64> {
    if !(cutoff > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "heat states need cutoff > 1, got {cutoff}"
        )));
    }
    if spectral_dim == 0 {
        return Err(Error::InvalidArgument("spectral dimension must be positive".into()));
    }
    Ok(2.0 * f64::from(spectral_dim) * cutoff.ln() / (cutoff * cutoff))
}

/// Truncated heat-flow lift of the spinor `v_x` at `base`: coefficients
/// `e^{-t_Λ λ²} · conj(ψ_λ(x)[component])`, normalized.
pub fn heat_state(t: &TruncatedTriple, base: &Point, component: usize, spectral_dim: u32) -> Result<VectorState> {
    let time = heat_time(spectral_dim, t.cutoff)?;
    let values = eigenvector_values(t, base)?;
    let coefficients = CVector::from_iterator(
        t.dim(),
        values.iter().zip(&t.dirac_eigenvalues).map(|(psi, lambda)| {
            psi.get(component).copied().unwrap_or_default().conj() * (-time * lambda * lambda).exp()
        }),
    );
    if values.first().is_some_and(|psi| component >= psi.len()) {
        return Err(Error::InvalidArgument(format!(
            "spinor component {component} out of range for `{}`",
            t.name
        )));
    }
    VectorState::new(coefficients)
}

/// Pointwise density `Σ_k |Σ_λ c_λ ψ_λ(y)[k]|²` of a state at `y`.
pub fn density(t: &TruncatedTriple, v: &VectorState, y: &Point) -> Result<f64> {
    let values = eigenvector_values(t, y)?;
    let components = values.first().map_or(0, Vec::len);
    let mut total = 0.0;
    for k in 0..components {
        let amp: Complex64 = values
            .iter()
            .zip(v.coefficients().iter())
            .map(|(psi, c)| psi[k] * c)
            .sum();
        total += amp.norm_sqr();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometries::build_circle;

    #[test]
    fn constant_state_on_circle() {
        let t = build_circle(3.0).unwrap();
        let r = dispersion(&t, &VectorState::basis(7, 3)).unwrap();
        assert!(r.degenerate && r.barycenter.is_none());
        assert!((r.eta - 1.0).abs() < 1e-15);
        assert!(r.mean_phi.iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn empty_repulsion_is_inverse_dispersion() {
        let t = build_circle(3.0).unwrap();
        let v = VectorState::new(CVector::from_fn(7, |i, _| Complex64::new(1.0 + i as f64, 0.3))).unwrap();
        let eta = dispersion(&t, &v).unwrap().eta;
        let params = EnergyParams::new(0.7, vec![]).unwrap();
        assert!((energy(&t, &v, &params).unwrap() + 1.0 / eta).abs() < 1e-12);
    }

    #[test]
    fn coincident_state_has_infinite_energy() {
        let t = build_circle(2.0).unwrap();
        let v = VectorState::basis(5, 1);
        let mean = dispersion(&t, &v).unwrap().mean_phi;
        let params = EnergyParams::new(0.1, vec![mean]).unwrap();
        assert_eq!(energy(&t, &v, &params).unwrap(), f64::INFINITY);
        assert!(energy_gradient(&t, &v, &params)
            .unwrap()
            .iter()
            .all(|z| *z == Complex64::default()));
    }

    #[test]
    fn heat_time_formula() {
        assert!((heat_time(2, 10.0).unwrap() - 0.4 * 10f64.ln() / 10.0).abs() < 1e-15);
        assert!((heat_time(2, 10.0).unwrap() - 0.0921).abs() < 1e-4);
        assert!(heat_time(2, 1.0).is_err());
        assert!(EnergyParams::new(-0.1, vec![]).is_err());
    }

    #[test]
    fn repulsion_threshold() {
        assert_eq!(sufficient_repulsion(2.0, 1.0).unwrap(), 0.75);
        assert_eq!(sufficient_repulsion(1.0, 2.0).unwrap(), 0.0);
        assert!(sufficient_repulsion(0.0, 1.0).is_err());
    }

    #[test]
    fn accurate_difference_agrees_with_direct_difference() {
        let t = build_circle(3.0).unwrap();
        let params = EnergyParams::new(0.3, vec![vec![0.2, -0.5], vec![-0.4, 0.1]]).unwrap();
        let v = CVector::from_fn(7, |i, _| Complex64::new((i as f64).sin(), 0.1 * i as f64));
        let mut v = v;
        normalize(&mut v);
        let mut u = &v + CVector::from_fn(7, |i, _| Complex64::new(0.01 * (i as f64).cos(), 0.02));
        normalize(&mut u);
        let (mv, mu) = (Moments::new(&t, &v), Moments::new(&t, &u));
        let direct = energy_raw(&t, &u, &params) - energy_raw(&t, &v, &params);
        let accurate = energy_difference(&params, &u, &mu, &v, &mv);
        assert!(
            (direct - accurate).abs() < 1e-12 * direct.abs().max(1.0),
            "{direct} vs {accurate}"
        );
    }
}
