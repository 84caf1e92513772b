//! Norm-preserving time integration of `i ħ ∂_t ψ = F ψ`.
//!
//! Two schemes:
//!
//! * `SplitStep` — Strang splitting. The hermitian kinetic term propagates
//!   exactly in the Fourier basis; everything else (the whole nonlinear
//!   remainder) takes an explicit midpoint step. The DG term stays in the
//!   nonlinear substep even though it contains a Laplacian: its coefficient
//!   is imaginary relative to the Schrödinger convention, so it acts as a
//!   diffusion and must not be folded into the unitary kinetic propagator.
//! * `Rk4` — classical fourth-order step on the full generator.
//!
//! Norm drift is policed every step against `tolerance × elapsed time` and
//! reported as an integration failure rather than silently renormalized;
//! `renormalize_each_step` opts into projection for callers that want it.

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec, TwoParticleField};
use crate::generator::{apply_generator, apply_nonlinearity, norm_hermiticity_defect, GeneratorSpec, Nonlinearity};
use crate::fft;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SplitStep,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Allowed norm drift per unit time.
    pub norm_tolerance: f64,
    pub renormalize_each_step: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, scheme: Scheme::SplitStep, norm_tolerance: 1e-6, renormalize_each_step: false }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Range(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::Range(format!(
                "norm tolerance must be positive, got {}",
                self.norm_tolerance
            )));
        }
        Ok(())
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// One row of a trajectory dump: `(t, norm, ⟨y⟩ per axis, width², Im(ψ,Fψ))`.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub norm: f64,
    pub mean: Vec<f64>,
    pub width_sq: f64,
    pub hermiticity_defect: f64,
}

fn kinetic_phases(grid: &GridSpec, spec: &GeneratorSpec, dt: f64) -> Vec<Complex64> {
    let dim = grid.dim();
    let mut idx = [0usize; 3];
    (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx[..dim]);
            let mut k2 = 0.0;
            for a in 0..dim {
                let k = grid.wavenumber(idx[a]);
                k2 += k * k;
            }
            Complex64::from_polar(1.0, -spec.hbar * k2 / (2.0 * spec.mass) * dt)
        })
        .collect()
}

fn apply_spectral_multiplier(psi: &mut ComplexField, phases: &[Complex64]) {
    let shape = psi.grid().shape();
    let dim = shape.len();
    let data = psi.values_mut();
    fft::transform_axes(data, &shape, 0..dim, false);
    for (v, p) in data.iter_mut().zip(phases) {
        *v *= p;
    }
    fft::transform_axes(data, &shape, 0..dim, true);
}

/// Time derivative contributed by the nonlinear remainder: `-(i/ħ) (F - K) ψ`.
fn nonlinear_rhs(psi: &ComplexField, spec: &GeneratorSpec) -> Result<ComplexField> {
    Ok(apply_nonlinearity(psi, spec)?.scale(Complex64::new(0.0, -1.0 / spec.hbar)))
}

/// Full time derivative `-(i/ħ) F ψ` for the RK4 path.
fn full_rhs(psi: &ComplexField, spec: &GeneratorSpec) -> Result<ComplexField> {
    Ok(apply_generator(psi, spec)?.scale(Complex64::new(0.0, -1.0 / spec.hbar)))
}

fn split_step(psi: &mut ComplexField, spec: &GeneratorSpec, dt: f64, half_phases: &[Complex64]) -> Result<()> {
    apply_spectral_multiplier(psi, half_phases);
    if spec.nonlinearity != Nonlinearity::Linear {
        let g1 = nonlinear_rhs(psi, spec)?;
        let mid = psi.add(&g1.scale(Complex64::new(0.5 * dt, 0.0)))?;
        let g2 = nonlinear_rhs(&mid, spec)?;
        *psi = psi.add(&g2.scale(Complex64::new(dt, 0.0)))?;
    }
    apply_spectral_multiplier(psi, half_phases);
    Ok(())
}

fn rk4_step(psi: &mut ComplexField, spec: &GeneratorSpec, dt: f64) -> Result<()> {
    let k1 = full_rhs(psi, spec)?;
    let k2 = full_rhs(&psi.add(&k1.scale(Complex64::new(0.5 * dt, 0.0)))?, spec)?;
    let k3 = full_rhs(&psi.add(&k2.scale(Complex64::new(0.5 * dt, 0.0)))?, spec)?;
    let k4 = full_rhs(&psi.add(&k3.scale(Complex64::new(dt, 0.0)))?, spec)?;
    let mut incr = k1;
    incr = incr.add(&k2.scale(Complex64::new(2.0, 0.0)))?;
    incr = incr.add(&k3.scale(Complex64::new(2.0, 0.0)))?;
    incr = incr.add(&k4)?;
    *psi = psi.add(&incr.scale(Complex64::new(dt / 6.0, 0.0)))?;
    Ok(())
}

fn police_norm(norm: f64, t: f64, cfg: &IntegratorConfig) -> Result<()> {
    let drift = (norm - 1.0).abs();
    let allowed = cfg.norm_tolerance * t.max(cfg.dt);
    if !norm.is_finite() || drift > allowed {
        return Err(Error::NormDrift { t, drift, allowed });
    }
    Ok(())
}

fn plan_steps(t_final: f64, dt: f64) -> Vec<f64> {
    let n_full = (t_final / dt + 1e-9).floor() as usize;
    let mut steps = vec![dt; n_full];
    let remainder = t_final - n_full as f64 * dt;
    if remainder > dt * 1e-9 {
        steps.push(remainder);
    }
    steps
}

/// Propagate `ψ` to time `T`; `T = 0` returns the input bit for bit.
pub fn evolve(
    psi: &ComplexField,
    spec: &GeneratorSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<ComplexField> {
    Ok(evolve_trajectory(psi, spec, t_final, cfg, 0)?.0)
}

/// Propagate and record up to `samples` intermediate trajectory rows
/// (always including the initial and final states when `samples > 0`).
pub fn evolve_trajectory(
    psi: &ComplexField,
    spec: &GeneratorSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<(ComplexField, Vec<TrajectorySample>)> {
    spec.validate()?;
    cfg.validate()?;
    if !(t_final >= 0.0) {
        return Err(Error::Range(format!("evolution time must be nonnegative, got {t_final}")));
    }
    let defect = (psi.norm() - 1.0).abs();
    if defect > 1e-6 {
        return Err(Error::NotNormalized { defect });
    }

    let record = |state: &ComplexField, t: f64, out: &mut Vec<TrajectorySample>| -> Result<()> {
        if samples == 0 {
            return Ok(());
        }
        let mean = (0..state.grid().dim()).map(|a| state.position_mean(a)).collect();
        out.push(TrajectorySample {
            t,
            norm: state.norm(),
            mean,
            width_sq: state.position_variance(),
            hermiticity_defect: norm_hermiticity_defect(state, spec)?,
        });
        Ok(())
    };

    let mut rows = Vec::new();
    record(psi, 0.0, &mut rows)?;
    if t_final == 0.0 {
        return Ok((psi.clone(), rows));
    }

    let steps = plan_steps(t_final, cfg.dt);
    let every = if samples > 0 { (steps.len() / samples).max(1) } else { usize::MAX };
    let mut state = psi.clone();
    let mut phases = kinetic_phases(psi.grid(), spec, 0.5 * cfg.dt);
    let mut phase_dt = cfg.dt;
    let mut t = 0.0;
    for (i, &dt) in steps.iter().enumerate() {
        match cfg.scheme {
            Scheme::SplitStep => {
                if (dt - phase_dt).abs() > dt * 1e-12 {
                    phases = kinetic_phases(psi.grid(), spec, 0.5 * dt);
                    phase_dt = dt;
                }
                split_step(&mut state, spec, dt, &phases)?;
            }
            Scheme::Rk4 => rk4_step(&mut state, spec, dt)?,
        }
        t += dt;
        if cfg.renormalize_each_step {
            state.normalize();
        } else {
            police_norm(state.norm(), t, cfg)?;
        }
        if (i + 1) % every == 0 || i + 1 == steps.len() {
            record(&state, t, &mut rows)?;
        }
    }
    Ok((state, rows))
}

// ---------------------------------------------------------------------------
// Two-particle evolution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Particle {
    A,
    B,
}

fn particle_axes(psi: &TwoParticleField, which: Particle) -> std::ops::Range<usize> {
    let da = psi.grid_a().dim();
    let db = psi.grid_b().dim();
    match which {
        Particle::A => 0..da,
        Particle::B => da..da + db,
    }
}

fn axis_wavenumber(psi: &TwoParticleField, axis: usize, bin: usize) -> f64 {
    let da = psi.grid_a().dim();
    if axis < da {
        psi.grid_a().wavenumber(bin)
    } else {
        psi.grid_b().wavenumber(bin)
    }
}

fn unravel(shape: &[usize], flat: usize, out: &mut [usize]) {
    let mut rest = flat;
    for a in (0..shape.len()).rev() {
        out[a] = rest % shape[a];
        rest /= shape[a];
    }
}

/// Laplacian over the axes of one particle.
fn subset_laplacian(psi: &TwoParticleField, which: Particle) -> TwoParticleField {
    let shape = psi.shape();
    let axes = particle_axes(psi, which);
    let mut data = psi.values().to_vec();
    fft::transform_axes(&mut data, &shape, axes.clone(), false);
    let mut idx = [0usize; 6];
    for (flat, v) in data.iter_mut().enumerate() {
        unravel(&shape, flat, &mut idx[..shape.len()]);
        let mut k2 = 0.0;
        for a in axes.clone() {
            let k = axis_wavenumber(psi, a, idx[a]);
            k2 += k * k;
        }
        *v *= -k2;
    }
    fft::transform_axes(&mut data, &shape, axes, true);
    TwoParticleField::new(*psi.grid_a(), *psi.grid_b(), data).expect("shape preserved")
}

/// Pointwise `|∇_s ψ|²` over the axes of one particle.
fn subset_gradient_density(psi: &TwoParticleField, which: Particle) -> Vec<f64> {
    let shape = psi.shape();
    let axes = particle_axes(psi, which);
    let mut g2 = vec![0.0f64; psi.values().len()];
    let mut idx = [0usize; 6];
    for axis in axes {
        let mut data = psi.values().to_vec();
        fft::transform_axis(&mut data, &shape, axis, false);
        for (flat, v) in data.iter_mut().enumerate() {
            unravel(&shape, flat, &mut idx[..shape.len()]);
            let k = axis_wavenumber(psi, axis, idx[axis]);
            *v *= Complex64::new(0.0, k);
        }
        fft::transform_axis(&mut data, &shape, axis, true);
        for (acc, v) in g2.iter_mut().zip(&data) {
            *acc += v.norm_sqr();
        }
    }
    g2
}

fn scale_tp(psi: &TwoParticleField, c: Complex64) -> TwoParticleField {
    let values = psi.values().iter().map(|v| v * c).collect();
    TwoParticleField::new(*psi.grid_a(), *psi.grid_b(), values).expect("shape preserved")
}

fn add_assign_tp(dst: &mut Vec<Complex64>, src: &TwoParticleField, c: Complex64) {
    for (d, s) in dst.iter_mut().zip(src.values()) {
        *d += s * c;
    }
}

/// Nonlinear part of `F_a^{(1)} + F_b^{(2)}` on the joint state.
///
/// DG terms act through derivatives in their own particle's variables and
/// the joint density, which is exactly the combination that keeps product
/// states product. The multiplicative log terms (BBM, Kostin) carry no
/// variable direction; their couplings simply add across the two species,
/// which also separates.
fn two_particle_nonlinearity(
    psi: &TwoParticleField,
    spec_a: &GeneratorSpec,
    spec_b: &GeneratorSpec,
) -> Result<TwoParticleField> {
    let mut out = vec![Complex64::default(); psi.values().len()];
    for (spec, which) in [(spec_a, Particle::A), (spec_b, Particle::B)] {
        match spec.nonlinearity {
            Nonlinearity::Linear => {}
            Nonlinearity::Dg { d } => {
                let lap = subset_laplacian(psi, which);
                let g2 = subset_gradient_density(psi, which);
                let coeff = Complex64::new(0.0, d * spec.hbar);
                add_assign_tp(&mut out, &lap, coeff);
                for (i, ((o, v), g)) in out.iter_mut().zip(psi.values()).zip(&g2).enumerate() {
                    let dens = v.norm_sqr();
                    if spec.epsilon == 0.0 && dens < 1e-300 && *g > 0.0 {
                        return Err(Error::SingularPoint { index: i, density: dens });
                    }
                    let denom = dens + spec.epsilon;
                    if denom > 0.0 {
                        *o += v * (*g / denom) * coeff;
                    }
                }
            }
            Nonlinearity::Bbm { p } => {
                for (o, v) in out.iter_mut().zip(psi.values()) {
                    let ln = 0.5 * (v.norm_sqr() + spec.epsilon).ln();
                    *o += v * (p * ln);
                }
            }
            Nonlinearity::Kostin { q } => {
                for (o, v) in out.iter_mut().zip(psi.values()) {
                    *o += v * (-2.0 * q * v.arg());
                }
            }
        }
    }
    TwoParticleField::new(*psi.grid_a(), *psi.grid_b(), out)
}

/// Full two-particle generator `Fψ = F_a ψ + F_b ψ` with `Q_ab = 0`.
pub fn apply_two_particle_generator(
    psi: &TwoParticleField,
    spec_a: &GeneratorSpec,
    spec_b: &GeneratorSpec,
) -> Result<TwoParticleField> {
    let mut out = two_particle_nonlinearity(psi, spec_a, spec_b)?;
    for (spec, which) in [(spec_a, Particle::A), (spec_b, Particle::B)] {
        let lap = subset_laplacian(psi, which);
        let c = Complex64::new(-spec.hbar * spec.hbar / (2.0 * spec.mass), 0.0);
        let mut data = out.values().to_vec();
        add_assign_tp(&mut data, &lap, c);
        out = TwoParticleField::new(*psi.grid_a(), *psi.grid_b(), data)?;
    }
    Ok(out)
}

fn tp_kinetic_phases(psi: &TwoParticleField, spec_a: &GeneratorSpec, spec_b: &GeneratorSpec, dt: f64) -> Vec<Complex64> {
    let shape = psi.shape();
    let da = psi.grid_a().dim();
    let mut idx = [0usize; 6];
    (0..psi.values().len())
        .map(|flat| {
            unravel(&shape, flat, &mut idx[..shape.len()]);
            let mut omega = 0.0;
            for a in 0..shape.len() {
                let k = axis_wavenumber(psi, a, idx[a]);
                let spec = if a < da { spec_a } else { spec_b };
                omega += spec.hbar * k * k / (2.0 * spec.mass);
            }
            Complex64::from_polar(1.0, -omega * dt)
        })
        .collect()
}

fn tp_apply_spectral(psi: &mut TwoParticleField, phases: &[Complex64]) {
    let shape = psi.shape();
    let n_axes = shape.len();
    let data = psi.values_mut();
    fft::transform_axes(data, &shape, 0..n_axes, false);
    for (v, p) in data.iter_mut().zip(phases) {
        *v *= p;
    }
    fft::transform_axes(data, &shape, 0..n_axes, true);
}

fn tp_nonlinear_rhs(psi: &TwoParticleField, spec_a: &GeneratorSpec, spec_b: &GeneratorSpec) -> Result<TwoParticleField> {
    Ok(scale_tp(
        &two_particle_nonlinearity(psi, spec_a, spec_b)?,
        Complex64::new(0.0, -1.0 / spec_a.hbar),
    ))
}

fn tp_full_rhs(psi: &TwoParticleField, spec_a: &GeneratorSpec, spec_b: &GeneratorSpec) -> Result<TwoParticleField> {
    Ok(scale_tp(
        &apply_two_particle_generator(psi, spec_a, spec_b)?,
        Complex64::new(0.0, -1.0 / spec_a.hbar),
    ))
}

/// Propagate a two-particle state; both specs must share `ħ`.
pub fn evolve_two_particle(
    psi: &TwoParticleField,
    spec_a: &GeneratorSpec,
    spec_b: &GeneratorSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<TwoParticleField> {
    spec_a.validate()?;
    spec_b.validate()?;
    cfg.validate()?;
    if spec_a.hbar != spec_b.hbar {
        return Err(Error::Range(format!(
            "two-particle evolution requires a shared hbar, got {} and {}",
            spec_a.hbar, spec_b.hbar
        )));
    }
    if !(t_final >= 0.0) {
        return Err(Error::Range(format!("evolution time must be nonnegative, got {t_final}")));
    }
    let defect = (psi.norm() - 1.0).abs();
    if defect > 1e-6 {
        return Err(Error::NotNormalized { defect });
    }
    if t_final == 0.0 {
        return Ok(psi.clone());
    }

    let steps = plan_steps(t_final, cfg.dt);
    let mut state = psi.clone();
    let mut phases = tp_kinetic_phases(psi, spec_a, spec_b, 0.5 * cfg.dt);
    let mut phase_dt = cfg.dt;
    let both_linear = spec_a.nonlinearity == Nonlinearity::Linear && spec_b.nonlinearity == Nonlinearity::Linear;
    let mut t = 0.0;
    for &dt in &steps {
        match cfg.scheme {
            Scheme::SplitStep => {
                if (dt - phase_dt).abs() > dt * 1e-12 {
                    phases = tp_kinetic_phases(psi, spec_a, spec_b, 0.5 * dt);
                    phase_dt = dt;
                }
                tp_apply_spectral(&mut state, &phases);
                if !both_linear {
                    let g1 = tp_nonlinear_rhs(&state, spec_a, spec_b)?;
                    let mut mid = state.values().to_vec();
                    for (m, g) in mid.iter_mut().zip(g1.values()) {
                        *m += g * (0.5 * dt);
                    }
                    let mid = TwoParticleField::new(*psi.grid_a(), *psi.grid_b(), mid)?;
                    let g2 = tp_nonlinear_rhs(&mid, spec_a, spec_b)?;
                    let data = state.values_mut();
                    for (v, g) in data.iter_mut().zip(g2.values()) {
                        *v += g * dt;
                    }
                }
                tp_apply_spectral(&mut state, &phases);
            }
            Scheme::Rk4 => {
                let k1 = tp_full_rhs(&state, spec_a, spec_b)?;
                let stage = |base: &TwoParticleField, k: &TwoParticleField, c: f64| -> Result<TwoParticleField> {
                    let mut data = base.values().to_vec();
                    add_assign_tp(&mut data, k, Complex64::new(c, 0.0));
                    TwoParticleField::new(*base.grid_a(), *base.grid_b(), data)
                };
                let k2 = tp_full_rhs(&stage(&state, &k1, 0.5 * dt)?, spec_a, spec_b)?;
                let k3 = tp_full_rhs(&stage(&state, &k2, 0.5 * dt)?, spec_a, spec_b)?;
                let k4 = tp_full_rhs(&stage(&state, &k3, dt)?, spec_a, spec_b)?;
                let data = state.values_mut();
                for ((((v, a), b), c), d) in data
                    .iter_mut()
                    .zip(k1.values())
                    .zip(k2.values())
                    .zip(k3.values())
                    .zip(k4.values())
                {
                    *v += (a + (b + c) * 2.0 + d) * (dt / 6.0);
                }
            }
        }
        t += dt;
        if cfg.renormalize_each_step {
            state.normalize();
        } else {
            let norm = state.norm();
            let drift = (norm - 1.0).abs();
            let allowed = cfg.norm_tolerance * t.max(cfg.dt);
            if !norm.is_finite() || drift > allowed {
                return Err(Error::NormDrift { t, drift, allowed });
            }
        }
    }
    Ok(state)
}
