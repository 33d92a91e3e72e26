//! Row quadrature for single-mode functions without a radial profile.
//!
//! Each row x = const is integrated in p with panels split where W crosses
//! the relevant levels, so kinks of |W|, [W - t]_+ and |W|^alpha sit on panel
//! ends. The outer x integral is adaptive Gauss-Kronrod, which refines
//! around the points where a zero curve turns vertical.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::integrate::Estimate;
use super::WignerEvaluable;
use crate::quadrature::{brent, GaussLegendre};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Scan points per row used to bracket level crossings.
const ROW_SCAN: usize = 160;
/// Widest inner panel.
const ROW_PANEL: f64 = 1.0;
/// Outer panels before refinement.
const OUTER_START: f64 = 1.0;
const MAX_DEPTH: usize = 40;
/// Geometric refinement levels toward level crossings when grading.
const ROW_GRADING: i32 = 16;

pub(crate) struct Rows<'a> {
    w: &'a WignerEvaluable,
    halfwidth: f64,
    gl: GaussLegendre,
    tolerance: f64,
}

impl<'a> Rows<'a> {
    pub(crate) fn new(w: &'a WignerEvaluable, halfwidth: f64, tolerance: f64) -> Self {
        Rows { w, halfwidth, gl: GaussLegendre::new(10), tolerance }
    }

    fn row<G: Fn(f64) -> f64>(&self, x: f64, g: &G, levels: &[f64], graded: bool) -> f64 {
        let l = self.halfwidth;
        let f = |p: f64| self.w.eval(&[x, p]);
        let h = 2.0 * l / ROW_SCAN as f64;
        let mut breaks = alloc::vec![-l, l];
        let mut prev_p = -l;
        let mut prev_f = f(-l);
        for i in 1..=ROW_SCAN {
            let p = -l + h * i as f64;
            let fp = f(p);
            for lv in levels {
                let (a, b) = (prev_f - lv, fp - lv);
                if a * b < 0.0 {
                    let root = brent(|q| f(q) - lv, prev_p, p, a, b, 1e-15).unwrap_or(0.5 * (prev_p + p));
                    breaks.push(root);
                }
            }
            prev_p = p;
            prev_f = fp;
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        let mut s = 0.0;
        for iv in breaks.windows(2) {
            let (a, b) = (iv[0], iv[1]);
            // no level is crossed inside, so a transform that vanishes at the
            // midpoint vanishes on the whole interval
            if !(b > a) || g(f(0.5 * (a + b))) == 0.0 {
                continue;
            }
            let (ga, gb) = (graded && a > -l, graded && b < l);
            if !(ga || gb) {
                s += self.gl.composite(a, b, ROW_PANEL, |p| g(f(p)));
                continue;
            }
            let h = 0.5 * (b - a);
            let (mut lo, mut hi) = (a, b);
            for j in 1..=ROW_GRADING {
                let (x0, x1) = (h * 0.5f64.powi(j), h * 0.5f64.powi(j - 1));
                if ga {
                    s += self.gl.composite(a + x0, a + x1, ROW_PANEL, |p| g(f(p)));
                }
                if gb {
                    s += self.gl.composite(b - x1, b - x0, ROW_PANEL, |p| g(f(p)));
                }
            }
            let tail = h * 0.5f64.powi(ROW_GRADING);
            if ga {
                s += self.gl.composite(a, a + tail, ROW_PANEL, |p| g(f(p)));
                lo = a + h;
            }
            if gb {
                s += self.gl.composite(b - tail, b, ROW_PANEL, |p| g(f(p)));
                hi = b - h;
            }
            if hi > lo {
                s += self.gl.composite(lo, hi, ROW_PANEL, |p| g(f(p)));
            }
        }
        s
    }

    /// Kronrod estimate and its error over [a, b].
    fn kronrod<H: Fn(f64) -> f64>(h: &H, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let fc = h(c);
        let mut k = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        let mut vals = [(0.0, 0.0); 7];
        for j in 0..7 {
            let d = r * XGK[j];
            let (f1, f2) = (h(c - d), h(c + d));
            vals[j] = (f1, f2);
            k += WGK[j] * (f1 + f2);
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * k;
        let mut asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((vals[j].0 - mean).abs() + (vals[j].1 - mean).abs());
        }
        let (k, gauss, asc) = (k * r, gauss * r, asc * r.abs());
        let mut err = (k - gauss).abs();
        if asc != 0.0 && err != 0.0 {
            err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
        }
        (k, err)
    }

    /// int g(W) over the box, splitting rows where W crosses `levels`.
    pub(crate) fn integral<G: Fn(f64) -> f64>(&self, g: G, levels: &[f64]) -> Estimate {
        self.integral_with(g, levels, false)
    }

    /// As `integral`, with geometric panels toward crossings when `graded`.
    pub(crate) fn integral_with<G: Fn(f64) -> f64>(&self, g: G, levels: &[f64], graded: bool) -> Estimate {
        let l = self.halfwidth;
        let h = |x: f64| self.row(x, &g, levels, graded);
        let panels = ((2.0 * l / OUTER_START).ceil() as usize).max(1);
        let width = 2.0 * l / panels as f64;
        let mut stack: Vec<(f64, f64, usize)> =
            (0..panels).map(|k| (-l + width * k as f64, -l + width * (k + 1) as f64, 0)).collect();
        let (mut total, mut error) = (0.0, 0.0);
        while let Some((a, b, depth)) = stack.pop() {
            let (q, e) = Self::kronrod(&h, a, b);
            let allowed = self.tolerance * (b - a) / (2.0 * l);
            if e <= allowed || depth >= MAX_DEPTH {
                total += q;
                error += e;
            } else {
                let m = 0.5 * (a + b);
                stack.push((a, m, depth + 1));
                stack.push((m, b, depth + 1));
            }
        }
        Estimate::new(total, error)
    }
}
