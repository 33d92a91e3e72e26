//! Grid evaluations spread over threads. Every node is computed independently
//! and collected in grid order, so results do not depend on the thread count.

use anyhow::{bail, Result};
use rayon::prelude::*;
use wigmaj_core::channels::{
    average_at, convolve_point, convolve_with, draw_samples, GaussianChannel, OutputGrid, RandomGaussianUnitarySpec,
};
use wigmaj_core::phase_space::{grid_wigner, GridFunction, WignerEvaluable};

fn nodes(grid: &OutputGrid) -> Result<Vec<(f64, f64)>> {
    let a = grid.halfwidth;
    let n = grid.points;
    let g = GridFunction::new((-a, a, n), (-a, a, n), vec![0.0; n * n])?;
    Ok((0..n * n).map(|k| (g.x(k / n), g.p(k % n))).collect())
}

/// Same as the core `convolve`, evaluated in parallel.
pub fn convolve(ch: &GaussianChannel, w: &WignerEvaluable, grid: &OutputGrid) -> Result<WignerEvaluable> {
    if w.n_modes() != 1 {
        bail!("grid outputs are single-mode");
    }
    // validates the channel against the input once
    convolve_point(ch, w, &[0.0, 0.0])?;
    let values: Vec<f64> =
        nodes(grid)?.into_par_iter().map(|(x, p)| convolve_point(ch, w, &[x, p]).expect("validated above")).collect();
    let mut it = values.into_iter();
    Ok(convolve_with(ch, w, grid, |_, _| it.next().expect("one value per node"))?)
}

/// Monte Carlo output of a random Gaussian unitary channel with per-node
/// standard errors.
pub fn random_unitary(
    spec: &RandomGaussianUnitarySpec,
    w: &WignerEvaluable,
    grid: &OutputGrid,
) -> Result<WignerEvaluable> {
    if w.n_modes() != 1 {
        bail!("grid outputs are single-mode");
    }
    let samples = draw_samples(spec)?;
    if samples[0].s.nrows() != 2 {
        bail!("sampler and input differ in mode count");
    }
    let pts: Vec<(f64, f64)> = nodes(grid)?.into_par_iter().map(|(x, p)| average_at(&samples, w, &[x, p])).collect();
    let (values, se): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (a, n) = (grid.halfwidth, grid.points);
    let g = GridFunction::new((-a, a, n), (-a, a, n), values)?.with_std_err(se)?;
    Ok(grid_wigner(g, w.is_normalized()))
}
