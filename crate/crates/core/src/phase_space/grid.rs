use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Single-mode function sampled on a uniform (x, p) grid, evaluated by
/// bilinear interpolation and zero outside the grid. Both axes need an odd
/// number of nodes so the half-resolution subgrid spans the same box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x0: f64,
    dx: f64,
    nx: usize,
    p0: f64,
    dp: f64,
    np: usize,
    /// Row-major, `values[ix * np + ip]`.
    values: Vec<f64>,
    std_err: Option<Vec<f64>>,
}

impl GridFunction {
    pub fn new(x: (f64, f64, usize), p: (f64, f64, usize), values: Vec<f64>) -> Result<Self> {
        let (x0, x1, nx) = x;
        let (p0, p1, np) = p;
        for (lo, hi, n) in [(x0, x1, nx), (p0, p1, np)] {
            if n < 3 || n % 2 == 0 {
                return Err(Error::ParamOutOfRange(format!("grid needs an odd node count >= 3, got {n}")));
            }
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::ParamOutOfRange(format!("bad grid range [{lo}, {hi}]")));
            }
        }
        if values.len() != nx * np {
            return Err(Error::DimensionMismatch(format!("{} samples for a {nx} x {np} grid", values.len())));
        }
        Ok(GridFunction {
            x0,
            dx: (x1 - x0) / (nx - 1) as f64,
            nx,
            p0,
            dp: (p1 - p0) / (np - 1) as f64,
            np,
            values,
            std_err: None,
        })
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(
        x0: f64,
        x1: f64,
        nx: usize,
        p0: f64,
        p1: f64,
        np: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut g = Self::new((x0, x1, nx), (p0, p1, np), alloc::vec![0.0; nx * np])?;
        for ix in 0..nx {
            for ip in 0..np {
                g.values[ix * np + ip] = f(g.x(ix), g.p(ip));
            }
        }
        Ok(g)
    }

    /// Attaches per-node standard errors (Monte Carlo outputs).
    pub fn with_std_err(mut self, se: Vec<f64>) -> Result<Self> {
        if se.len() != self.values.len() {
            return Err(Error::DimensionMismatch("standard errors do not match the grid".into()));
        }
        self.std_err = Some(se);
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + self.dx * ix as f64
    }

    pub fn p(&self, ip: usize) -> f64 {
        self.p0 + self.dp * ip as f64
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dp)
    }

    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.np + ip]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_err(&self) -> Option<&[f64]> {
        self.std_err.as_deref()
    }

    pub(crate) fn halfwidth(&self) -> f64 {
        let xe = self.x0.abs().max(self.x(self.nx - 1).abs());
        let pe = self.p0.abs().max(self.p(self.np - 1).abs());
        xe.max(pe)
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let fx = (x - self.x0) / self.dx;
        let fp = (p - self.p0) / self.dp;
        let (nxf, npf) = ((self.nx - 1) as f64, (self.np - 1) as f64);
        let eps = 1e-12;
        if !(fx >= -eps && fx <= nxf + eps && fp >= -eps && fp <= npf + eps) {
            return 0.0;
        }
        let fx = fx.clamp(0.0, nxf);
        let fp = fp.clamp(0.0, npf);
        let ix = (fx as usize).min(self.nx - 2);
        let ip = (fp as usize).min(self.np - 2);
        let tx = fx - ix as f64;
        let tp = fp - ip as f64;
        let v00 = self.value(ix, ip);
        let v01 = self.value(ix, ip + 1);
        let v10 = self.value(ix + 1, ip);
        let v11 = self.value(ix + 1, ip + 1);
        (1.0 - tx) * ((1.0 - tp) * v00 + tp * v01) + tx * ((1.0 - tp) * v10 + tp * v11)
    }

    /// Trapezoid samples (value, weight, max-norm of the node) on the full
    /// grid (`stride = 1`) or on every other node (`stride = 2`).
    pub(crate) fn trapezoid_samples(&self, stride: usize) -> Vec<(f64, f64, f64)> {
        let wx = self.dx * stride as f64;
        let wp = self.dp * stride as f64;
        let mut out = Vec::with_capacity(self.values.len() / (stride * stride));
        let lastx = self.nx - 1;
        let lastp = self.np - 1;
        for ix in (0..self.nx).step_by(stride) {
            let cx = if ix == 0 || ix == lastx { 0.5 } else { 1.0 };
            for ip in (0..self.np).step_by(stride) {
                let cp = if ip == 0 || ip == lastp { 0.5 } else { 1.0 };
                let ext = self.x(ix).abs().max(self.p(ip).abs());
                out.push((self.value(ix, ip), cx * cp * wx * wp, ext));
            }
        }
        out
    }
}
