//! Wave functions on periodic uniform grids with spectral calculus.
//!
//! Everything here works in natural units (ħ = 1, m = 1 unless a generator
//! says otherwise). A [`GridSpec`] describes an n-dimensional torus sampled
//! with `points` nodes per axis over a box of size `extent`, centered at the
//! origin. Derivatives are spectral: multiplication by `i k` in the discrete
//! Fourier basis, which makes them exact on every grid-resolvable plane wave.
//! Inner products are Riemann sums with weight `h^n`, so fields must either
//! be exactly periodic or decay well below the quadrature tolerance at the
//! box edge; [`ComplexField::boundary_max_abs`] is the diagnostic for that.

use crate::error::{Error, Result};
use crate::fft;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Periodic uniform grid: `points` nodes per axis, `dim` axes, box size `extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, extent: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1..=3, got {dim}")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("points must be >= 2, got {points}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self { dim, points, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Grid spacing `h = extent / points`.
    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    /// Total number of grid nodes, `points^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^dim` of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of node `i` along one axis; the box is `[-extent/2, extent/2)`.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.spacing()
    }

    /// Angular wavenumber of FFT bin `j` (signed mode convention).
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * fft::signed_mode(j, self.points) as f64 / self.extent
    }

    /// Shape vector `[points; dim]` for the row-major value buffer.
    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    /// Decompose a flat index into per-axis indices (row-major, axis 0 slowest).
    pub fn unravel(&self, flat: usize, out: &mut [usize]) {
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.points;
            rest /= self.points;
        }
    }

    /// Coordinates of the node with flat index `flat`.
    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        let mut idx = [0usize; 3];
        self.unravel(flat, &mut idx[..self.dim]);
        for a in 0..self.dim {
            out[a] = self.coord(idx[a]);
        }
    }

    /// Shortest signed distance on the circle of circumference `extent`.
    pub fn wrap(&self, u: f64) -> f64 {
        u - self.extent * (u / self.extent).round()
    }
}

/// Complex amplitudes sampled on a [`GridSpec`]; the wave function ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "value buffer has {} entries, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()] }
    }

    /// Sample a closure of the node coordinates.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut y = [0.0f64; 3];
        for flat in 0..grid.len() {
            grid.coords(flat, &mut y[..grid.dim()]);
            values.push(f(&y[..grid.dim()]));
        }
        Self::new(grid, values)
    }

    /// L²-normalized Gaussian packet `exp(-(y-c)^2 / (2 sigma^2) + i k0·y)`.
    ///
    /// `sigma` is the amplitude width; the probability density `|ψ|^2` then
    /// has per-axis standard deviation `sigma / sqrt(2)`.
    pub fn gaussian(grid: GridSpec, center: &[f64], sigma: f64, momentum: &[f64]) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::Range(format!("gaussian width must be positive, got {sigma}")));
        }
        let mut field = Self::from_fn(grid, |y| {
            let mut q2 = 0.0;
            let mut phase = 0.0;
            for a in 0..grid.dim() {
                let u = grid.wrap(y[a] - center[a]);
                q2 += u * u;
                phase += momentum[a] * y[a];
            }
            Complex64::from_polar((-q2 / (2.0 * sigma * sigma)).exp(), phase)
        })?;
        field.normalize();
        Ok(field)
    }

    /// Normalized plane wave `exp(i k·y) / sqrt(L^n)` for integer modes.
    pub fn plane_wave(grid: GridSpec, modes: &[i64]) -> Result<Self> {
        if modes.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} mode numbers for a {}-dimensional grid",
                modes.len(),
                grid.dim()
            )));
        }
        let amp = grid.extent().powi(grid.dim() as i32).sqrt().recip();
        let ks: Vec<f64> = modes.iter().map(|&m| 2.0 * PI * m as f64 / grid.extent()).collect();
        Self::from_fn(grid, |y| {
            let phase: f64 = ks.iter().zip(y).map(|(k, yi)| k * yi).sum();
            Complex64::from_polar(amp, phase)
        })
    }

    /// Sample the Gaussian delta family `(r/pi)^{n/2} exp(-r (y-w)^2)`.
    ///
    /// This keeps the delta-function normalization `∫ δ^(r) = 1`, not the L²
    /// one; the nonlinear functionals applied to it are degree-1 homogeneous,
    /// so either convention gives the same images up to the overall factor.
    pub fn delta_family(grid: GridSpec, center: &[f64], r: f64) -> Result<Self> {
        if r <= 0.0 {
            return Err(Error::Range(format!("delta sharpness must be positive, got {r}")));
        }
        let n = grid.dim();
        let amp = (r / PI).powf(n as f64 / 2.0);
        Self::from_fn(grid, |y| {
            let mut q2 = 0.0;
            for a in 0..n {
                let u = grid.wrap(y[a] - center[a]);
                q2 += u * u;
            }
            Complex64::new(amp * (-r * q2).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.cell_volume();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = n.recip();
            for v in &mut self.values {
                *v *= s;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |ψ| over the outermost index shell of every axis; fields that
    /// are not exactly periodic should keep this below ~1e-10 for the
    /// quadrature contract to hold.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.grid.points();
        let mut worst: f64 = 0.0;
        let mut idx = [0usize; 3];
        for (flat, v) in self.values.iter().enumerate() {
            self.grid.unravel(flat, &mut idx[..self.grid.dim()]);
            if idx[..self.grid.dim()].iter().any(|&i| i == 0 || i == n - 1) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Unnormalized DFT coefficients of the field, row-major over modes.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        fft::transform_axes(&mut data, &self.grid.shape(), 0..self.grid.dim(), false);
        data
    }

    /// Mean of the coordinate along `axis` under |ψ|² (state need not be normalized).
    pub fn position_mean(&self, axis: usize) -> f64 {
        let w = self.grid.cell_volume();
        let mut y = [0.0f64; 3];
        let mut acc = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            self.grid.coords(flat, &mut y[..self.grid.dim()]);
            acc += y[axis] * v.norm_sqr();
        }
        acc * w / self.norm_sq()
    }

    /// Total position variance Σ_a (⟨y_a²⟩ - ⟨y_a⟩²).
    pub fn position_variance(&self) -> f64 {
        let w = self.grid.cell_volume();
        let ns = self.norm_sq();
        let dim = self.grid.dim();
        let means: Vec<f64> = (0..dim).map(|a| self.position_mean(a)).collect();
        let mut acc = 0.0;
        let mut y = [0.0f64; 3];
        for (flat, v) in self.values.iter().enumerate() {
            self.grid.coords(flat, &mut y[..dim]);
            for a in 0..dim {
                let d = y[a] - means[a];
                acc += d * d * v.norm_sqr();
            }
        }
        acc * w / ns
    }
}

fn check_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Riemann inner product `Σ conj(a_i) b_i h^n`; conjugate-linear in `a`.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    check_same_grid(&a.grid, &b.grid)?;
    let w = a.grid.cell_volume();
    let mut acc = Complex64::default();
    for (x, y) in a.values.iter().zip(&b.values) {
        acc += x.conj() * y;
    }
    Ok(acc * w)
}

/// Spectral gradient: one field per axis, each `F^-1 { i k_a F psi }`.
pub fn gradient(f: &ComplexField) -> Vec<ComplexField> {
    let grid = f.grid;
    let dim = grid.dim();
    let shape = grid.shape();
    let spectrum = f.spectrum();
    let mut out = Vec::with_capacity(dim);
    let mut idx = [0usize; 3];
    for axis in 0..dim {
        let mut data = spectrum.clone();
        for (flat, v) in data.iter_mut().enumerate() {
            grid.unravel(flat, &mut idx[..dim]);
            let k = grid.wavenumber(idx[axis]);
            *v *= Complex64::new(0.0, k);
        }
        fft::transform_axes(&mut data, &shape, 0..dim, true);
        out.push(ComplexField { grid, values: data });
    }
    out
}

/// Spectral Laplacian: `F^-1 { -|k|^2 F psi }`.
pub fn laplacian(f: &ComplexField) -> ComplexField {
    let grid = f.grid;
    let dim = grid.dim();
    let shape = grid.shape();
    let mut data = f.spectrum();
    let mut idx = [0usize; 3];
    for (flat, v) in data.iter_mut().enumerate() {
        grid.unravel(flat, &mut idx[..dim]);
        let mut k2 = 0.0;
        for a in 0..dim {
            let k = grid.wavenumber(idx[a]);
            k2 += k * k;
        }
        *v *= -k2;
    }
    fft::transform_axes(&mut data, &shape, 0..dim, true);
    ComplexField { grid, values: data }
}

/// Two-particle wave function ψ(x_a, y_b) stored row-major as a
/// `(points_a^n_a) x (points_b^n_b)` coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleField {
    grid_a: GridSpec,
    grid_b: GridSpec,
    values: Vec<Complex64>,
}

/// Transverse envelope of an EPR-correlated pair state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// Translation invariant on the torus: exact zero total momentum.
    Uniform,
    /// Gaussian of the given width in the center-of-mass coordinate.
    Gaussian(f64),
}

impl TwoParticleField {
    pub fn new(grid_a: GridSpec, grid_b: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid_a.len() * grid_b.len() {
            return Err(Error::GridMismatch(format!(
                "value buffer has {} entries, expected {} x {}",
                values.len(),
                grid_a.len(),
                grid_b.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { grid_a, grid_b, values })
    }

    /// Product state φ_a ⊗ φ_b.
    pub fn product(a: &ComplexField, b: &ComplexField) -> Self {
        let mut values = Vec::with_capacity(a.values.len() * b.values.len());
        for va in &a.values {
            for vb in &b.values {
                values.push(va * vb);
            }
        }
        Self { grid_a: a.grid, grid_b: b.grid, values }
    }

    /// Normalized EPR pair state on a 1-dimensional torus.
    ///
    /// The relative coordinate carries a wrapped Gaussian of amplitude width
    /// `sqrt(2) sigma_c` (so the conditional position spread given the other
    /// particle is `sigma_c`); the center of mass carries the requested
    /// envelope. With [`Envelope::Uniform`] the state depends on `x - y`
    /// alone and has exactly zero total momentum on the grid, so a momentum
    /// measurement of particle `a` collapses particle `b` onto an exact
    /// plane wave.
    pub fn epr(grid: GridSpec, sigma_c: f64, envelope: Envelope) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidGrid("EPR construction requires a 1-dimensional grid".into()));
        }
        if sigma_c <= 0.0 {
            return Err(Error::Range(format!("correlation width must be positive, got {sigma_c}")));
        }
        let n = grid.points();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                let y = grid.coord(j);
                let u = grid.wrap(x - y);
                let corr = (-u * u / (4.0 * sigma_c * sigma_c)).exp();
                let env = match envelope {
                    Envelope::Uniform => 1.0,
                    Envelope::Gaussian(sigma_e) => {
                        let s = grid.wrap(x + y);
                        (-s * s / (8.0 * sigma_e * sigma_e)).exp()
                    }
                };
                values.push(Complex64::new(corr * env, 0.0));
            }
        }
        let mut field = Self { grid_a: grid, grid_b: grid, values };
        field.normalize();
        Ok(field)
    }

    pub fn grid_a(&self) -> &GridSpec {
        &self.grid_a
    }

    pub fn grid_b(&self) -> &GridSpec {
        &self.grid_b
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Row-major shape: the a-axes followed by the b-axes.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = self.grid_a.shape();
        s.extend(self.grid_b.shape());
        s
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid_a.cell_volume() * self.grid_b.cell_volume()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = n.recip();
            for v in &mut self.values {
                *v *= s;
            }
        }
    }

    /// Expectation of an operator acting on particle `b` alone.
    pub fn expectation_on_b(&self, apply_b: impl Fn(&ComplexField) -> ComplexField) -> f64 {
        let nb = self.grid_b.len();
        let wa = self.grid_a.cell_volume();
        let mut acc = Complex64::default();
        for row in self.values.chunks(nb) {
            let phi = ComplexField { grid: self.grid_b, values: row.to_vec() };
            let image = apply_b(&phi);
            acc += inner_product(&phi, &image).expect("same grid by construction");
        }
        (acc * wa).re
    }

    /// Schmidt spectrum: singular values of the coefficient matrix, scaled so
    /// their squares sum to the squared norm of the state. Descending order.
    pub fn schmidt_spectrum(&self) -> Vec<f64> {
        let na = self.grid_a.len();
        let nb = self.grid_b.len();
        let m = nalgebra::DMatrix::from_fn(na, nb, |i, j| self.values[i * nb + j]);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).expect("singular values are finite"));
        let scale = self.cell_volume().sqrt();
        sv.iter_mut().for_each(|s| *s *= scale);
        sv
    }

    /// Purity Tr ρ_b² of the reduced state of particle `b` (state must be normalized).
    pub fn purity_b(&self) -> f64 {
        self.schmidt_spectrum().iter().map(|s| s.powi(4)).sum()
    }
}

/// Serialize a one-particle field: `key=value` grid header, then one CSV row
/// per node with per-axis indices and the real/imaginary parts.
pub fn field_to_csv(f: &ComplexField) -> String {
    let grid = f.grid();
    let mut out = String::new();
    let _ = writeln!(out, "dimension={}", grid.dim());
    let _ = writeln!(out, "points={}", grid.points());
    let _ = writeln!(out, "extent={}", fmt_float(grid.extent()));
    let cols: Vec<String> = (0..grid.dim()).map(|a| format!("i{a}")).collect();
    let _ = writeln!(out, "{},re,im", cols.join(","));
    let mut idx = [0usize; 3];
    for (flat, v) in f.values().iter().enumerate() {
        grid.unravel(flat, &mut idx[..grid.dim()]);
        let ix: Vec<String> = idx[..grid.dim()].iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{},{},{}", ix.join(","), fmt_float(v.re), fmt_float(v.im));
    }
    out
}

/// Parse the format written by [`field_to_csv`].
pub fn field_from_csv(text: &str) -> Result<ComplexField> {
    let mut dim = None;
    let mut points = None;
    let mut extent = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            match key.trim() {
                "dimension" => dim = Some(parse_usize(value, "dimension")?),
                "points" => points = Some(parse_usize(value, "points")?),
                "extent" => extent = Some(parse_f64(value, "extent")?),
                other => return Err(Error::Config(format!("unknown field header key `{other}`"))),
            }
            continue;
        }
        if line.starts_with('i') {
            continue; // column header
        }
        rows.push(line);
    }
    let dim = dim.ok_or_else(|| Error::Config("missing `dimension` header".into()))?;
    let points = points.ok_or_else(|| Error::Config("missing `points` header".into()))?;
    let extent = extent.ok_or_else(|| Error::Config("missing `extent` header".into()))?;
    let grid = GridSpec::new(dim, points, extent)?;
    let mut values = vec![Complex64::default(); grid.len()];
    if rows.len() != grid.len() {
        return Err(Error::Config(format!(
            "field body has {} rows, grid has {} nodes",
            rows.len(),
            grid.len()
        )));
    }
    for line in rows {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 2 {
            return Err(Error::Config(format!("bad field row `{line}`")));
        }
        let mut flat = 0usize;
        for part in &parts[..dim] {
            let i = parse_usize(part, "index")?;
            if i >= points {
                return Err(Error::Config(format!("index {i} out of range in row `{line}`")));
            }
            flat = flat * points + i;
        }
        let re = parse_f64(parts[dim], "re")?;
        let im = parse_f64(parts[dim + 1], "im")?;
        values[flat] = Complex64::new(re, im);
    }
    ComplexField::new(grid, values)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{s}` as integer for {what}")))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{s}` as number for {what}")))
}

/// Scientific notation with 17 significant digits; round-trips f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
