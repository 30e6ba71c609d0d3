//! Dispersion scans and distance-bound comparisons on metric graphs.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::connes::{build_problem, AdmmSolver, DistanceSolver, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::geometries::{build_sphere_with, AlgebraSpan, CutoffConvention, Point};
use crate::localization::{dispersion, heat_state, DEGENERATE_MEAN};
use crate::triple_model::{Manifold, MetricGraph, TruncatedTriple};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub cutoff: f64,
    pub dim: usize,
    pub eta: f64,
}

/// Least-squares fit of `η = a · log Λ / Λ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub max_relative_residual: f64,
    /// Fewer than two distinct cutoffs: the one-parameter fit interpolates
    /// exactly and says nothing about the scaling.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionScan {
    pub samples: Vec<DispersionSample>,
    pub fit: ScalingFit,
}

impl DispersionScan {
    pub fn strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].eta < w[0].eta)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "cutoff,dim,eta,fit")?;
        for s in &self.samples {
            let fit = self.fit.a * s.cutoff.ln() / (s.cutoff * s.cutoff);
            writeln!(out, "{:?},{},{:?},{:?}", s.cutoff, s.dim, s.eta, fit)?;
        }
        Ok(())
    }
}

fn check_cutoffs(cutoffs: &[f64]) -> Result<()> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidArgument("empty cutoff list".into()));
    }
    if let Some(bad) = cutoffs.iter().find(|&&c| !(c > 1.0)) {
        return Err(Error::InvalidArgument(format!("cutoff {bad} must exceed 1")));
    }
    Ok(())
}

pub fn fit_log_scaling(samples: &[DispersionSample]) -> Result<ScalingFit> {
    let cutoffs: Vec<f64> = samples.iter().map(|s| s.cutoff).collect();
    check_cutoffs(&cutoffs)?;
    let basis: Vec<f64> = cutoffs.iter().map(|c| c.ln() / (c * c)).collect();
    let a = samples.iter().zip(&basis).map(|(s, f)| s.eta * f).sum::<f64>() / basis.iter().map(|f| f * f).sum::<f64>();
    let max_relative_residual = samples
        .iter()
        .zip(&basis)
        .map(|(s, f)| ((s.eta - a * f) / s.eta).abs())
        .fold(0.0, f64::max);
    let mut distinct = cutoffs.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    Ok(ScalingFit {
        a,
        max_relative_residual,
        degenerate: distinct.len() < 2,
    })
}

/// Dispersion of the north-pole heat state on the sphere for each cutoff.
pub fn dispersion_scan(cutoffs: &[f64], convention: CutoffConvention, spectral_dim: u32) -> Result<DispersionScan> {
    check_cutoffs(cutoffs)?;
    let north = Point::Sphere { theta: 0.0, phi: 0.0 };
    let samples = cutoffs
        .iter()
        .map(|&cutoff| {
            let t = build_sphere_with(cutoff, convention, AlgebraSpan::EmbeddingOnly)?;
            let v = heat_state(&t, &north, 0, spectral_dim)?;
            Ok(DispersionSample {
                cutoff,
                dim: t.dim(),
                eta: dispersion(&t, &v)?.eta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_log_scaling(&samples)?;
    Ok(DispersionScan { samples, fit })
}

/// One pair of states compared against the geodesic distance of their barycenters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub i: usize,
    pub j: usize,
    /// Truncated Connes distance.
    pub truncated: f64,
    /// Geodesic distance between the barycenters.
    pub geodesic: f64,
    /// `d_M − (π/2)·√(Σ (η + 1 − ‖x‖²))` over the two states.
    pub lower: f64,
    pub degenerate: bool,
}

impl BoundRow {
    pub fn signed_error(&self) -> f64 {
        self.truncated - self.geodesic
    }
}

fn lower_bound(geodesic: f64, moments: [(f64, &[f64]); 2]) -> f64 {
    let slack: f64 = moments
        .iter()
        .map(|(eta, x)| eta + (1.0 - x.iter().map(|v| v * v).sum::<f64>()).max(0.0))
        .sum();
    geodesic - FRAC_PI_2 * slack.sqrt()
}

fn manifold_of(graph: &MetricGraph) -> Result<Manifold> {
    match graph.barycenter_coords.first().map(Vec::len) {
        Some(2) => Ok(Manifold::Circle),
        Some(3) => Ok(Manifold::Sphere),
        other => Err(Error::InvalidArgument(format!(
            "cannot infer a model manifold from barycenters of length {other:?}"
        ))),
    }
}

fn row(i: usize, j: usize, truncated: f64, manifold: Manifold, moments: [(f64, &[f64]); 2]) -> BoundRow {
    let points = moments.map(|(_, x)| {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < DEGENERATE_MEAN {
            None
        } else {
            Point::project(manifold, x)
        }
    });
    match points {
        [Some(p), Some(q)] => {
            let geodesic = p.geodesic(&q);
            BoundRow {
                i,
                j,
                truncated,
                geodesic,
                lower: lower_bound(geodesic, moments),
                degenerate: false,
            }
        }
        _ => BoundRow {
            i,
            j,
            truncated,
            geodesic: f64::NAN,
            lower: f64::NAN,
            degenerate: true,
        },
    }
}

/// Bound rows for every pair of a metric graph.
pub fn graph_bounds(graph: &MetricGraph) -> Result<Vec<BoundRow>> {
    graph.validate()?;
    let manifold = manifold_of(graph)?;
    let k = graph.len();
    let mut rows = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            rows.push(row(
                i,
                j,
                graph.distances.get(i, j),
                manifold,
                [
                    (graph.dispersions[i], &graph.barycenter_coords[i]),
                    (graph.dispersions[j], &graph.barycenter_coords[j]),
                ],
            ));
        }
    }
    Ok(rows)
}

/// Heat states at `angles` along the meridian `φ = 0`, each compared with the
/// state at the first angle.
pub fn great_circle_sweep(
    t: &TruncatedTriple,
    angles: &[f64],
    spectral_dim: u32,
    opts: &SolverOptions,
) -> Result<Vec<BoundRow>> {
    if t.manifold != Some(Manifold::Sphere) {
        return Err(Error::InvalidArgument(format!("`{}` is not a sphere geometry", t.name)));
    }
    let (&base, rest) = angles
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("sweep needs at least one angle".into()))?;
    let state = |theta: f64| heat_state(t, &Point::Sphere { theta, phi: 0.0 }, 0, spectral_dim);
    let v = state(base)?;
    let dv = dispersion(t, &v)?;
    rest.iter()
        .enumerate()
        .map(|(k, &theta)| {
            let w = state(theta)?;
            let dw = dispersion(t, &w)?;
            let sol = AdmmSolver.solve(&build_problem(t, &v, &w)?, opts, None)?;
            if sol.status == SolveStatus::Infeasible {
                return Err(Error::Inconsistent("degenerate algebra basis in sweep".into()));
            }
            Ok(row(
                0,
                k + 1,
                sol.value.max(0.0),
                Manifold::Sphere,
                [(dv.eta, &dv.mean_phi), (dw.eta, &dw.mean_phi)],
            ))
        })
        .collect()
}

/// `π/n, 2π/n, …` up to but excluding the antipode, preceded by the base angle 0.
pub fn default_sweep_angles(n: usize) -> Vec<f64> {
    let step = std::f64::consts::PI / n as f64;
    std::iter::once(0.0).chain((1..n).map(|k| k as f64 * step)).collect()
}

pub fn write_bounds_csv(rows: &[BoundRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "i,j,truncated,geodesic,lower,signed_error,degenerate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:?},{:?},{:?},{:?},{}",
            r.i,
            r.j,
            r.truncated,
            r.geodesic,
            r.lower,
            r.signed_error(),
            r.degenerate
        )?;
    }
    Ok(())
}
