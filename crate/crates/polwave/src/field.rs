//! Periodic grids in the slow variable, spectral transforms, and the
//! differential / pointwise operators acting on envelope fields.
//!
//! Envelope fields live on a uniform grid over the torus `[0,L_1) x ... x [0,L_d)`
//! and carry `n` complex components per grid point. Both representations are
//! kept and materialized lazily from each other. The spectral convention is
//!
//! ```text
//! f(x) = sum_k fhat(k) e^{i k.x},   k_l = 2 pi m_l / L_l,   m_l in {-N/2, ..., N/2-1},
//! ```
//!
//! i.e. coefficients of the trigonometric interpolant: a single mode `c e^{i xi}`
//! has the single coefficient `c`. All norm reductions run serially in ascending
//! flat mode index, so results are bitwise reproducible.

use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const TAU: f64 = std::f64::consts::TAU;

/// Uniform periodic grid: per-dimension torus lengths and point counts.
///
/// Point counts must be powers of two with at least 16 points per dimension;
/// grid points are `x_i = i L / N`, `i = 0..N-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lengths: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lengths: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() != points.len() {
            return Err(Error::Config(format!(
                "grid needs matching, nonempty lengths/points (got {} and {})",
                lengths.len(),
                points.len()
            )));
        }
        for &l in &lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config(format!("grid length {l} must be positive")));
            }
        }
        for &n in &points {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::Config(format!(
                    "grid point count {n} must be a power of two >= 16"
                )));
            }
        }
        Ok(GridSpec { lengths, points })
    }

    /// Default slow grid: 256 points per dimension on a torus of length 32 pi.
    pub fn default_slow(d: usize) -> Self {
        GridSpec::new(vec![16.0 * TAU; d], vec![256; d]).expect("default grid is valid")
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn npoints(&self) -> usize {
        self.points.iter().product()
    }

    /// Cell volume of the Riemann sum, `prod_l L_l / N_l`.
    pub fn cell_volume(&self) -> f64 {
        self.lengths
            .iter()
            .zip(&self.points)
            .map(|(l, &n)| l / n as f64)
            .product()
    }

    /// Physical coordinates of the flat (row-major) point index.
    pub fn coord(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let n = self.points[a];
            out[a] = (rem % n) as f64 * self.lengths[a] / n as f64;
            rem /= n;
        }
    }

    /// Integer mode index per axis, in `{-N/2, ..., N/2-1}`, of a flat index
    /// in FFT storage order.
    pub fn mode(&self, flat: usize, out: &mut [i64]) {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let n = self.points[a];
            let idx = rem % n;
            out[a] = if idx < n / 2 {
                idx as i64
            } else {
                idx as i64 - n as i64
            };
            rem /= n;
        }
    }

    /// Wavenumber vector `k_l = 2 pi m_l / L_l` of a flat spectral index.
    pub fn wavenumber(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let n = self.points[a];
            let idx = rem % n;
            let m = if idx < n / 2 {
                idx as i64
            } else {
                idx as i64 - n as i64
            };
            out[a] = TAU * m as f64 / self.lengths[a];
            rem /= n;
        }
    }

    /// Flat index of the negated mode, `m -> -m` (mod N per axis).
    pub fn negated_mode_index(&self, flat: usize) -> usize {
        let mut rem = flat;
        let mut out = 0;
        let mut weight = 1;
        // rebuild from the last axis outward
        let mut weights = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            weights[a] = weight;
            weight *= self.points[a];
        }
        for a in (0..self.dim()).rev() {
            let n = self.points[a];
            let idx = rem % n;
            let neg = (n - idx) % n;
            out += neg * weights[a];
            rem /= n;
        }
        out
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// In-place multi-dimensional FFT of one component row (row-major layout).
fn fft_nd(data: &mut [C64], shape: &[usize], forward: bool) {
    let npoints: usize = shape.iter().product();
    debug_assert_eq!(data.len(), npoints);
    for (axis, &len) in shape.iter().enumerate() {
        let fft = {
            let mut p = planner().lock().unwrap();
            if forward {
                p.plan_fft_forward(len)
            } else {
                p.plan_fft_inverse(len)
            }
        };
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let stride: usize = shape[axis + 1..].iter().product();
        let block = len * stride;
        if stride == 1 {
            for chunk in data.chunks_exact_mut(len) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
        } else {
            let mut line = vec![C64::new(0.0, 0.0); len];
            for b in (0..npoints).step_by(block) {
                for s in 0..stride {
                    for (t, v) in line.iter_mut().enumerate() {
                        *v = data[b + s + t * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (t, v) in line.iter().enumerate() {
                        data[b + s + t * stride] = *v;
                    }
                }
            }
        }
    }
    if forward {
        let scale = 1.0 / npoints as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// A complex n-vector-valued function sampled on a periodic grid.
///
/// Immutable after construction; operations return new fields. Physical and
/// spectral data share the `(ncomp, npoints)` layout, one component per row.
#[derive(Debug)]
pub struct EnvelopeField {
    grid: GridSpec,
    ncomp: usize,
    phys: OnceLock<Array2<C64>>,
    spec: OnceLock<Array2<C64>>,
}

impl Clone for EnvelopeField {
    fn clone(&self) -> Self {
        let out = EnvelopeField {
            grid: self.grid.clone(),
            ncomp: self.ncomp,
            phys: OnceLock::new(),
            spec: OnceLock::new(),
        };
        if let Some(p) = self.phys.get() {
            let _ = out.phys.set(p.clone());
        }
        if let Some(s) = self.spec.get() {
            let _ = out.spec.set(s.clone());
        }
        out
    }
}

impl EnvelopeField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        let n = grid.npoints();
        let field = EnvelopeField {
            grid,
            ncomp,
            phys: OnceLock::new(),
            spec: OnceLock::new(),
        };
        let _ = field.phys.set(Array2::zeros((ncomp, n)));
        let _ = field.spec.set(Array2::zeros((ncomp, n)));
        field
    }

    pub fn from_values(grid: GridSpec, values: Array2<C64>) -> Self {
        assert_eq!(values.ncols(), grid.npoints(), "value count must match grid");
        let field = EnvelopeField {
            grid,
            ncomp: values.nrows(),
            phys: OnceLock::new(),
            spec: OnceLock::new(),
        };
        let _ = field.phys.set(values);
        field
    }

    pub fn from_spectrum(grid: GridSpec, coeffs: Array2<C64>) -> Self {
        assert_eq!(coeffs.ncols(), grid.npoints(), "coefficient count must match grid");
        let field = EnvelopeField {
            grid,
            ncomp: coeffs.nrows(),
            phys: OnceLock::new(),
            spec: OnceLock::new(),
        };
        let _ = field.spec.set(coeffs);
        field
    }

    /// Sample a field from a pointwise closure receiving the coordinates and
    /// a component output slice.
    pub fn from_fn(grid: GridSpec, ncomp: usize, mut f: impl FnMut(&[f64], &mut [C64])) -> Self {
        let npoints = grid.npoints();
        let d = grid.dim();
        let mut values = Array2::zeros((ncomp, npoints));
        let mut x = vec![0.0; d];
        let mut col = vec![C64::new(0.0, 0.0); ncomp];
        for p in 0..npoints {
            grid.coord(p, &mut x);
            f(&x, &mut col);
            for c in 0..ncomp {
                values[(c, p)] = col[c];
            }
        }
        EnvelopeField::from_values(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    /// Physical samples, materialized from the spectrum if needed.
    pub fn values(&self) -> &Array2<C64> {
        self.phys.get_or_init(|| {
            let mut data = self.spec.get().expect("field has a representation").clone();
            let shape = self.grid.points().to_vec();
            for mut row in data.rows_mut() {
                fft_nd(row.as_slice_mut().expect("rows are contiguous"), &shape, false);
            }
            data
        })
    }

    /// Spectral coefficients, materialized from the samples if needed.
    pub fn spectrum(&self) -> &Array2<C64> {
        self.spec.get_or_init(|| {
            let mut data = self.phys.get().expect("field has a representation").clone();
            let shape = self.grid.points().to_vec();
            for mut row in data.rows_mut() {
                fft_nd(row.as_slice_mut().expect("rows are contiguous"), &shape, true);
            }
            data
        })
    }

    fn check_same_grid(&self, other: &EnvelopeField) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(Error::GridMismatch(format!(
                "fields have incompatible shape: {:?}x{} vs {:?}x{}",
                self.grid.points(),
                self.ncomp,
                other.grid.points(),
                other.ncomp
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &EnvelopeField) -> Result<EnvelopeField> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &EnvelopeField) -> Result<EnvelopeField> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `self + a * other`, evaluated in physical space.
    pub fn axpy(&self, a: C64, other: &EnvelopeField) -> Result<EnvelopeField> {
        self.check_same_grid(other)?;
        let mut out = self.values().clone();
        out.zip_mut_with(other.values(), |x, y| *x += a * *y);
        Ok(EnvelopeField::from_values(self.grid.clone(), out))
    }

    pub fn scale(&self, a: C64) -> EnvelopeField {
        let mut out = self.values().clone();
        out.mapv_inplace(|x| a * x);
        EnvelopeField::from_values(self.grid.clone(), out)
    }

    /// Pointwise complex conjugate. Its spectrum satisfies
    /// `conj(f)^(k) = conj(fhat(-k))`.
    pub fn conj(&self) -> EnvelopeField {
        let mut out = self.values().clone();
        out.mapv_inplace(|x| x.conj());
        EnvelopeField::from_values(self.grid.clone(), out)
    }

    /// Apply a constant matrix to the component vector at every point.
    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> EnvelopeField {
        assert_eq!(m.ncols(), self.ncomp, "matrix size must match components");
        let (data, spectral) = match self.phys.get() {
            Some(p) => (p, false),
            None => (self.spectrum(), true),
        };
        let nout = m.nrows();
        let npts = self.grid.npoints();
        let mut out = Array2::zeros((nout, npts));
        let mut col = vec![C64::new(0.0, 0.0); self.ncomp];
        for p in 0..npts {
            for c in 0..self.ncomp {
                col[c] = data[(c, p)];
            }
            for r in 0..nout {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..self.ncomp {
                    acc += m[(r, c)] * col[c];
                }
                out[(r, p)] = acc;
            }
        }
        let field = EnvelopeField {
            grid: self.grid.clone(),
            ncomp: nout,
            phys: OnceLock::new(),
            spec: OnceLock::new(),
        };
        if spectral {
            let _ = field.spec.set(out);
        } else {
            let _ = field.phys.set(out);
        }
        field
    }

    /// Apply the first-order operator `sum_l M_l d/dxi_l` spectrally:
    /// mode `k` is multiplied by `i k_l` and then by the real matrix `M_l`.
    pub fn apply_first_order(&self, mats: &[DMatrix<f64>]) -> EnvelopeField {
        assert_eq!(mats.len(), self.grid.dim(), "one matrix per dimension");
        let spec = self.spectrum();
        let npts = self.grid.npoints();
        let d = self.grid.dim();
        let mut out = Array2::zeros((self.ncomp, npts));
        let mut k = vec![0.0; d];
        let mut col = vec![C64::new(0.0, 0.0); self.ncomp];
        for p in 0..npts {
            self.grid.wavenumber(p, &mut k);
            for c in 0..self.ncomp {
                col[c] = spec[(c, p)];
            }
            for (l, m) in mats.iter().enumerate() {
                let ik = C64::new(0.0, k[l]);
                for r in 0..self.ncomp {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..self.ncomp {
                        acc += m[(r, c)] * col[c];
                    }
                    out[(r, p)] += ik * acc;
                }
            }
        }
        EnvelopeField::from_spectrum(self.grid.clone(), out)
    }

    /// Multiply every mode by a scalar factor `f(k)`, acting on all components.
    pub fn apply_mode_scalar(&self, mut f: impl FnMut(&[f64]) -> C64) -> EnvelopeField {
        let spec = self.spectrum();
        let npts = self.grid.npoints();
        let mut out = spec.clone();
        let mut k = vec![0.0; self.grid.dim()];
        for p in 0..npts {
            self.grid.wavenumber(p, &mut k);
            let w = f(&k);
            for c in 0..self.ncomp {
                out[(c, p)] *= w;
            }
        }
        EnvelopeField::from_spectrum(self.grid.clone(), out)
    }

    /// Spectral partial derivative `d^alpha`, with multi-index `alpha`.
    pub fn derivative(&self, alpha: &[usize]) -> EnvelopeField {
        assert_eq!(alpha.len(), self.grid.dim());
        self.apply_mode_scalar(|k| {
            let mut w = C64::new(1.0, 0.0);
            for (l, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    w *= C64::new(0.0, k[l]);
                }
            }
            w
        })
    }

    /// Translate by `delta` via trigonometric interpolation: mode `k` is
    /// multiplied by `e^{-i k.delta}`, so the result samples `f(x - delta)`.
    pub fn shift(&self, delta: &[f64]) -> EnvelopeField {
        assert_eq!(delta.len(), self.grid.dim());
        self.apply_mode_scalar(|k| {
            let phase: f64 = k.iter().zip(delta).map(|(ki, di)| ki * di).sum();
            C64::from_polar(1.0, -phase)
        })
    }

    /// Re-sample onto a grid with the same torus lengths via spectral
    /// zero-padding (or truncation). Exact for band-limited fields.
    pub fn resample(&self, target: &GridSpec) -> Result<EnvelopeField> {
        if target.dim() != self.grid.dim()
            || target
                .lengths()
                .iter()
                .zip(self.grid.lengths())
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::GridMismatch(
                "resample requires matching torus lengths".into(),
            ));
        }
        let spec = self.spectrum();
        let npts_out = target.npoints();
        let mut out = Array2::zeros((self.ncomp, npts_out));
        let d = self.grid.dim();
        let mut m = vec![0i64; d];
        // walk source modes; copy those representable on the target grid
        for p in 0..self.grid.npoints() {
            self.grid.mode(p, &mut m);
            let mut q = 0usize;
            let mut ok = true;
            for a in 0..d {
                let n_t = target.points()[a] as i64;
                if m[a] < -n_t / 2 || m[a] >= n_t / 2 {
                    ok = false;
                    break;
                }
                let idx = if m[a] >= 0 { m[a] } else { m[a] + n_t } as usize;
                q = q * target.points()[a] + idx;
            }
            if ok {
                for c in 0..self.ncomp {
                    out[(c, q)] = spec[(c, p)];
                }
            }
        }
        Ok(EnvelopeField::from_spectrum(target.clone(), out))
    }

    /// Zero all modes with any axis index `|m_l| >= N_l/3` (2/3-rule filter).
    pub fn dealias_two_thirds(&self) -> EnvelopeField {
        let spec = self.spectrum();
        let mut out = spec.clone();
        let d = self.grid.dim();
        let mut m = vec![0i64; d];
        for p in 0..self.grid.npoints() {
            self.grid.mode(p, &mut m);
            let cut = (0..d).any(|a| 3 * m[a].unsigned_abs() as usize >= self.grid.points()[a]);
            if cut {
                for c in 0..self.ncomp {
                    out[(c, p)] = C64::new(0.0, 0.0);
                }
            }
        }
        EnvelopeField::from_spectrum(self.grid.clone(), out)
    }

    /// Wiener norm `W^s`: sum over multi-indices `|alpha|_1 <= s` of the
    /// l1-in-k norm of the spectrum of `d^alpha f` (Euclidean norm over
    /// components per mode). Summation is serial in ascending mode index.
    pub fn wiener_norm(&self, s: usize) -> f64 {
        let mut total = 0.0;
        let mut alpha = vec![0usize; self.grid.dim()];
        self.wiener_rec(s, 0, &mut alpha, &mut total);
        total
    }

    fn wiener_rec(&self, budget: usize, axis: usize, alpha: &mut Vec<usize>, total: &mut f64) {
        if axis == self.grid.dim() {
            *total += self.weighted_l1_spectrum(alpha);
            return;
        }
        for a in 0..=budget {
            alpha[axis] = a;
            self.wiener_rec(budget - a, axis + 1, alpha, total);
        }
        alpha[axis] = 0;
    }

    fn weighted_l1_spectrum(&self, alpha: &[usize]) -> f64 {
        let spec = self.spectrum();
        let npts = self.grid.npoints();
        let mut k = vec![0.0; self.grid.dim()];
        let mut total = 0.0;
        for p in 0..npts {
            self.grid.wavenumber(p, &mut k);
            let mut w = 1.0;
            for (l, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    w *= k[l];
                }
            }
            let mut sq = 0.0;
            for c in 0..self.ncomp {
                sq += spec[(c, p)].norm_sqr();
            }
            total += w.abs() * sq.sqrt();
        }
        total
    }

    /// Max over grid points of the Euclidean norm of the component vector.
    pub fn linf_norm(&self) -> f64 {
        let vals = self.values();
        let npts = self.grid.npoints();
        let mut best = 0.0f64;
        for p in 0..npts {
            let mut sq = 0.0;
            for c in 0..self.ncomp {
                sq += vals[(c, p)].norm_sqr();
            }
            best = best.max(sq.sqrt());
        }
        best
    }

    /// Discrete L2 norm (Riemann sum over the torus).
    pub fn l2_norm(&self) -> f64 {
        let vals = self.values();
        let sum: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// Largest absolute imaginary part over all samples and components.
    pub fn max_imag(&self) -> f64 {
        self.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_abs_diff(&self, other: &EnvelopeField) -> Result<f64> {
        self.check_same_grid(other)?;
        let a = self.values();
        let b = other.values();
        let mut best = 0.0f64;
        for (x, y) in a.iter().zip(b.iter()) {
            best = best.max((x - y).norm());
        }
        Ok(best)
    }
}

/// Pointwise combination of three fields through a closure acting on the
/// component vectors. Used to evaluate trilinear nonlinearities.
pub fn pointwise3(
    f: &EnvelopeField,
    g: &EnvelopeField,
    h: &EnvelopeField,
    mut op: impl FnMut(&[C64], &[C64], &[C64], &mut [C64]),
) -> Result<EnvelopeField> {
    f.check_same_grid(g)?;
    f.check_same_grid(h)?;
    let (fv, gv, hv) = (f.values(), g.values(), h.values());
    let n = f.ncomp();
    let npts = f.grid().npoints();
    let mut out = Array2::zeros((n, npts));
    let mut a = vec![C64::new(0.0, 0.0); n];
    let mut b = vec![C64::new(0.0, 0.0); n];
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut r = vec![C64::new(0.0, 0.0); n];
    for p in 0..npts {
        for i in 0..n {
            a[i] = fv[(i, p)];
            b[i] = gv[(i, p)];
            c[i] = hv[(i, p)];
        }
        op(&a, &b, &c, &mut r);
        for i in 0..n {
            out[(i, p)] = r[i];
        }
    }
    Ok(EnvelopeField::from_values(f.grid().clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid1() -> GridSpec {
        GridSpec::new(vec![TAU], vec![64]).unwrap()
    }

    /// Smooth random field: random low modes with Gaussian spectral decay.
    pub fn smooth_random(grid: &GridSpec, ncomp: usize, seed: u64) -> EnvelopeField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let npts = grid.npoints();
        let mut coeffs = Array2::zeros((ncomp, npts));
        let mut m = vec![0i64; grid.dim()];
        for p in 0..npts {
            grid.mode(p, &mut m);
            let msq: f64 = m.iter().map(|&x| (x * x) as f64).sum();
            let w = (-0.5 * msq).exp();
            if w > 1e-14 {
                for c in 0..ncomp {
                    coeffs[(c, p)] =
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w;
                }
            }
        }
        EnvelopeField::from_spectrum(grid.clone(), coeffs)
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(vec![1.0], vec![15]).is_err());
        assert!(GridSpec::new(vec![1.0], vec![48]).is_err());
        assert!(GridSpec::new(vec![-1.0], vec![32]).is_err());
        assert!(GridSpec::new(vec![1.0, 2.0], vec![32]).is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let grid = grid1();
        let f = smooth_random(&grid, 2, 7);
        let back = EnvelopeField::from_spectrum(grid.clone(), f.spectrum().clone());
        let phys = EnvelopeField::from_values(grid, back.values().clone());
        let scale = f.linf_norm();
        assert!(f.max_abs_diff(&phys).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn single_mode_has_single_coefficient() {
        let grid = grid1();
        let c = C64::new(0.3, -0.4);
        let f = EnvelopeField::from_fn(grid, 1, |x, out| {
            out[0] = c * C64::from_polar(1.0, x[0]);
        });
        let spec = f.spectrum();
        // mode +1 sits at flat index 1
        assert_abs_diff_eq!(spec[(0, 1)].re, c.re, epsilon = 1e-13);
        assert_abs_diff_eq!(spec[(0, 1)].im, c.im, epsilon = 1e-13);
        let rest: f64 = (0..64)
            .filter(|&p| p != 1)
            .map(|p| spec[(0, p)].norm())
            .sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn wiener_norm_single_mode() {
        let grid = grid1();
        let c = C64::new(0.3, -0.4);
        let f = EnvelopeField::from_fn(grid, 1, |x, out| {
            out[0] = c * C64::from_polar(1.0, x[0]);
        });
        assert_abs_diff_eq!(f.wiener_norm(0), c.norm(), epsilon = 1e-12);
        // W^1 = |c| + |i k c| with k = 1
        assert_abs_diff_eq!(f.wiener_norm(1), 2.0 * c.norm(), epsilon = 1e-12);
        let zero = EnvelopeField::zeros(grid1(), 3);
        assert_eq!(zero.wiener_norm(2), 0.0);
    }

    #[test]
    fn wiener_triangle_inequality() {
        let grid = grid1();
        for seed in 0..10 {
            let f = smooth_random(&grid, 2, seed);
            let g = smooth_random(&grid, 2, seed + 100);
            let sum = f.add(&g).unwrap();
            for s in 0..=2 {
                assert!(sum.wiener_norm(s) <= f.wiener_norm(s) + g.wiener_norm(s) + 1e-10);
            }
        }
    }

    #[test]
    fn shift_identities() {
        let grid = grid1();
        let f = smooth_random(&grid, 2, 3);
        let scale = f.linf_norm();
        assert!(f.shift(&[0.0]).max_abs_diff(&f).unwrap() < 1e-13 * scale);
        assert!(f.shift(&[TAU]).max_abs_diff(&f).unwrap() < 1e-12 * scale);

        // single mode picks up e^{-i delta}
        let c = C64::new(1.0, 0.5);
        let mode = EnvelopeField::from_fn(grid, 1, |x, out| {
            out[0] = c * C64::from_polar(1.0, x[0]);
        });
        let delta = 0.37;
        let shifted = mode.shift(&[delta]);
        let expected = mode.scale(C64::from_polar(1.0, -delta));
        assert!(shifted.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn conjugation_symmetry_of_spectrum() {
        let grid = grid1();
        let f = smooth_random(&grid, 2, 11);
        let fc = f.conj();
        let a = f.spectrum();
        let b = fc.spectrum();
        for p in 0..grid.npoints() {
            let q = grid.negated_mode_index(p);
            for c in 0..2 {
                let diff = (b[(c, p)] - a[(c, q)].conj()).norm();
                assert!(diff < 1e-12, "mode {p} component {c}: {diff}");
            }
        }
    }

    #[test]
    fn derivative_and_shift_commute() {
        let grid = grid1();
        let f = smooth_random(&grid, 2, 5);
        let mats = vec![DMatrix::<f64>::identity(2, 2)];
        let a = f.apply_first_order(&mats).shift(&[0.7]);
        let b = f.shift(&[0.7]).apply_first_order(&mats);
        let scale = f.linf_norm();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-11 * scale.max(1.0));
    }

    #[test]
    fn resample_is_exact_for_band_limited_fields() {
        let grid = grid1();
        let f = smooth_random(&grid, 1, 9);
        let fine = GridSpec::new(vec![TAU], vec![256]).unwrap();
        let up = f.resample(&fine).unwrap();
        // compare on the original points, which are every 4th fine point
        let coarse_vals = f.values();
        let fine_vals = up.values();
        for p in 0..64 {
            let diff = (coarse_vals[(0, p)] - fine_vals[(0, 4 * p)]).norm();
            assert!(diff < 1e-12);
        }
        let down = up.resample(f.grid()).unwrap();
        assert!(down.max_abs_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn two_dimensional_round_trip() {
        let grid = GridSpec::new(vec![TAU, 2.0 * TAU], vec![16, 32]).unwrap();
        let f = smooth_random(&grid, 2, 21);
        let back = EnvelopeField::from_values(grid, f.values().clone());
        let spec_a = f.spectrum();
        let spec_b = back.spectrum();
        for (x, y) in spec_a.iter().zip(spec_b.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn pointwise3_and_dealias() {
        let grid = grid1();
        let f = smooth_random(&grid, 2, 1);
        let zero = EnvelopeField::zeros(grid.clone(), 2);
        let prod = pointwise3(&f, &zero, &f, |a, b, c, out| {
            for i in 0..out.len() {
                out[i] = a[i] * b[i] * c[i];
            }
        })
        .unwrap();
        assert!(prod.linf_norm() < 1e-15);

        let filtered = f.dealias_two_thirds();
        let spec = filtered.spectrum();
        let mut m = vec![0i64];
        for p in 0..grid.npoints() {
            grid.mode(p, &mut m);
            if 3 * m[0].unsigned_abs() as usize >= 64 {
                assert_eq!(spec[(0, p)].norm(), 0.0);
            }
        }
    }
}
