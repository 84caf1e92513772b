//! Observables, projective measurements, mixtures, and the signaling
//! functionals.
//!
//! The protocol: measure observable `A` on particle `a` of a two-particle
//! state at `t = 0`, evolve the resulting mixture for a delay `t`, then read
//! out a hermitian observable `B` on particle `b`. The expected value is
//!
//! ```text
//! E(B, t | A) = Σ_λ p_λ ⟨E_t φ_λ | B | E_t φ_λ⟩
//! ```
//!
//! and the signal is the dependence of this number on the choice of basis,
//! `Δ(B, t | A, A') = E(B, t | A) - E(B, t | A')`, which vanishes identically
//! at `t = 0` and for all `t` under linear evolution. Expanding in `t`, the
//! first-order rate is
//!
//! ```text
//! E₁(B | A) = (2/ħ) Σ_λ p_λ Im ⟨B φ_λ | F φ_λ⟩ ,
//! ```
//!
//! and because measurement on `a` leaves product states, only the particle-b
//! generator enters the bracket.
//!
//! Positions are measured in the grid cell basis and momenta in the discrete
//! Fourier basis: both are orthonormal, complete, and finite, so none of the
//! continuum delta-normalization issues arise here.

use crate::error::{Error, Result};
use crate::evolve::{evolve, IntegratorConfig};
use crate::field::{inner_product, ComplexField, GridSpec, TwoParticleField};
use crate::fft;
use crate::fit;
use crate::generator::{apply_generator, apply_nonlinearity, GeneratorSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Hermitian observable on a one-particle grid.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Multiplication by a real function of position.
    PositionDiagonal(Vec<f64>),
    /// Multiplication by a real function of the Fourier mode index.
    MomentumDiagonal(Vec<f64>),
    /// Integral operator `(Bψ)(x) = Σ_j K(x_i, y_j) ψ_j h^n` with `K = K†`.
    SmoothKernel { grid: GridSpec, kernel: Vec<Complex64> },
    /// Projector `|χ⟩⟨χ|` onto a normalized state.
    RankOne(ComplexField),
}

impl Observable {
    pub fn position_diagonal(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut y = [0.0f64; 3];
        let values = (0..grid.len())
            .map(|flat| {
                grid.coords(flat, &mut y[..grid.dim()]);
                f(&y[..grid.dim()])
            })
            .collect();
        Observable::PositionDiagonal(values)
    }

    /// Hermiticity is checked entry by entry at construction; a non-hermitian
    /// kernel is rejected here, never at application time.
    pub fn smooth_kernel(grid: GridSpec, kernel: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        if kernel.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in i..n {
                let a = kernel[i * n + j];
                let b = kernel[j * n + i];
                if (a - b.conj()).norm() > 0.0 {
                    return Err(Error::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(Observable::SmoothKernel { grid, kernel })
    }

    /// Projector onto `chi`, which is normalized here.
    pub fn rank_one(mut chi: ComplexField) -> Result<Self> {
        let n = chi.norm();
        if n == 0.0 {
            return Err(Error::Range("rank-one observable needs a nonzero state".into()));
        }
        chi.normalize();
        Ok(Observable::RankOne(chi))
    }

    pub fn apply(&self, psi: &ComplexField) -> Result<ComplexField> {
        match self {
            Observable::PositionDiagonal(b) => {
                if b.len() != psi.grid().len() {
                    return Err(Error::GridMismatch("diagonal observable length".into()));
                }
                let mut out = psi.clone();
                for (v, f) in out.values_mut().iter_mut().zip(b) {
                    *v *= *f;
                }
                Ok(out)
            }
            Observable::MomentumDiagonal(b) => {
                if b.len() != psi.grid().len() {
                    return Err(Error::GridMismatch("diagonal observable length".into()));
                }
                let shape = psi.grid().shape();
                let dim = shape.len();
                let mut out = psi.clone();
                let data = out.values_mut();
                fft::transform_axes(data, &shape, 0..dim, false);
                for (v, f) in data.iter_mut().zip(b) {
                    *v *= *f;
                }
                fft::transform_axes(data, &shape, 0..dim, true);
                Ok(out)
            }
            Observable::SmoothKernel { grid, kernel } => {
                if grid != psi.grid() {
                    return Err(Error::GridMismatch("kernel grid".into()));
                }
                let n = grid.len();
                let w = grid.cell_volume();
                let mut out = ComplexField::zeros(*grid);
                let values = out.values_mut();
                for i in 0..n {
                    let mut acc = Complex64::default();
                    for (j, v) in psi.values().iter().enumerate() {
                        acc += kernel[i * n + j] * v;
                    }
                    values[i] = acc * w;
                }
                Ok(out)
            }
            Observable::RankOne(chi) => {
                let overlap = inner_product(chi, psi)?;
                Ok(chi.scale(overlap))
            }
        }
    }

    /// Continuum kernel diagonal `K(x, x)` at grid node `flat`; defined for
    /// the smoothing variants only.
    pub fn kernel_diagonal(&self, flat: usize) -> Result<f64> {
        match self {
            Observable::RankOne(chi) => Ok(chi.values()[flat].norm_sqr()),
            Observable::SmoothKernel { grid, kernel } => Ok(kernel[flat * grid.len() + flat].re),
            _ => Err(Error::Range(
                "kernel diagonal is defined for smoothing observables only".into(),
            )),
        }
    }
}

/// `⟨ψ|B|ψ⟩`; real up to the hermiticity residue of the arithmetic.
pub fn expectation(psi: &ComplexField, b: &Observable) -> Result<f64> {
    Ok(inner_product(psi, &b.apply(psi)?)?.re)
}

/// Expectation of `I ⊗ B` in a two-particle state.
pub fn expectation_on_b(psi: &TwoParticleField, b: &Observable) -> Result<f64> {
    let nb = psi.grid_b().len();
    let wa = psi.grid_a().cell_volume();
    let mut acc = 0.0;
    for row in psi.values().chunks(nb) {
        let phi = ComplexField::new(*psi.grid_b(), row.to_vec())?;
        acc += inner_product(&phi, &b.apply(&phi)?)?.re;
    }
    Ok(acc * wa)
}

/// Measurement basis on particle `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

impl Basis {
    pub fn label(&self) -> &'static str {
        match self {
            Basis::Position => "position",
            Basis::Momentum => "momentum",
        }
    }
}

/// One outcome of a projective measurement on particle `a`: the weight, the
/// collapsed a-factor, and the conditional b-state.
#[derive(Debug, Clone)]
pub struct MixtureMember {
    pub weight: f64,
    pub factor_a: ComplexField,
    pub factor_b: ComplexField,
}

/// Weighted ensemble of normalized product states.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub members: Vec<MixtureMember>,
}

impl Mixture {
    /// Weights sum to one and every factor is normalized, both within 1e-10.
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Range(format!("mixture weights sum to {total}")));
        }
        for m in &self.members {
            if (m.factor_a.norm() - 1.0).abs() > 1e-10 || (m.factor_b.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized {
                    defect: (m.factor_b.norm() - 1.0).abs().max((m.factor_a.norm() - 1.0).abs()),
                });
            }
        }
        Ok(())
    }

    /// Weighted average of `⟨φ_b|B|φ_b⟩` over the members, in member order.
    pub fn expectation(&self, b: &Observable) -> Result<f64> {
        let mut acc = 0.0;
        for m in &self.members {
            acc += m.weight * expectation(&m.factor_b, b)?;
        }
        Ok(acc)
    }
}

/// Projective measurement of particle `a` in the grid or Fourier basis.
///
/// Outcomes with weight below `truncation` are dropped and the remainder is
/// rescaled, which preserves the relative weights exactly. The weights prior
/// to truncation sum to `‖Ψ‖²`.
pub fn measure_first_particle(
    psi: &TwoParticleField,
    basis: Basis,
    truncation: f64,
) -> Result<Mixture> {
    if !(0.0..=1e-3).contains(&truncation) {
        return Err(Error::Range(format!(
            "truncation must lie in [0, 1e-3], got {truncation}"
        )));
    }
    let grid_a = *psi.grid_a();
    let grid_b = *psi.grid_b();
    let na = grid_a.len();
    let nb = grid_b.len();
    let wa = grid_a.cell_volume();
    let wb = grid_b.cell_volume();

    // Coefficient matrix against the orthonormal outcome basis: grid deltas
    // e_i / sqrt(h^n) for position, plane waves e^{ikx} / sqrt(L^n) for
    // momentum. c_λ(j) = <e_λ ⊗ cell_j | Ψ> up to the common b-side factor.
    let (coeff, amp_scale): (Vec<Complex64>, f64) = match basis {
        Basis::Position => (psi.values().to_vec(), wa.sqrt()),
        Basis::Momentum => {
            let mut data = psi.values().to_vec();
            let shape = psi.shape();
            let da = psi.grid_a().dim();
            fft::transform_axes(&mut data, &shape, 0..da, false);
            let vol = grid_a.extent().powi(grid_a.dim() as i32);
            (data, wa / vol.sqrt())
        }
    };

    let mut members = Vec::with_capacity(na);
    let mut total_weight = 0.0;
    for i in 0..na {
        let row = &coeff[i * nb..(i + 1) * nb];
        let row_sq: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        let weight = row_sq * amp_scale * amp_scale * wb;
        total_weight += weight;
        if weight <= truncation || weight == 0.0 {
            continue;
        }
        // normalize the conditional b-state: divide by sqrt(row_sq * wb)
        let scale = (row_sq * wb).sqrt().recip();
        let factor_b = ComplexField::new(grid_b, row.iter().map(|v| v * scale).collect())?;
        let factor_a = match basis {
            Basis::Position => {
                let mut f = ComplexField::zeros(grid_a);
                f.values_mut()[i] = Complex64::new(wa.sqrt().recip(), 0.0);
                f
            }
            Basis::Momentum => {
                let mut modes = [0i64; 3];
                let mut idx = [0usize; 3];
                grid_a.unravel(i, &mut idx[..grid_a.dim()]);
                for a in 0..grid_a.dim() {
                    modes[a] = fft::signed_mode(idx[a], grid_a.points());
                }
                ComplexField::plane_wave(grid_a, &modes[..grid_a.dim()])?
            }
        };
        members.push(MixtureMember { weight, factor_a, factor_b });
    }
    if members.is_empty() {
        return Err(Error::EmptyMixture { truncation });
    }
    debug_assert!((total_weight - psi.norm_sq()).abs() < 1e-8);
    let kept: f64 = members.iter().map(|m| m.weight).sum();
    for m in &mut members {
        m.weight /= kept;
    }
    Ok(Mixture { members })
}

/// `E(B, t | A)`: measure, evolve each member by `t`, average `B`.
///
/// Only the b-factor is propagated: `B` acts on particle `b` alone and the
/// evolution is norm preserving, so the a-factor traces out to one.
pub fn expectation_after_delay(
    psi: &TwoParticleField,
    basis: Basis,
    b: &Observable,
    t: f64,
    spec_b: &GeneratorSpec,
    cfg: &IntegratorConfig,
    truncation: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Range(format!("delay must be nonnegative, got {t}")));
    }
    let mixture = measure_first_particle(psi, basis, truncation)?;
    let contributions: Vec<Result<f64>> = mixture
        .members
        .par_iter()
        .map(|m| {
            let evolved = evolve(&m.factor_b, spec_b, t, cfg)?;
            Ok(m.weight * expectation(&evolved, b)?)
        })
        .collect();
    let mut acc = 0.0;
    for c in contributions {
        acc += c?;
    }
    Ok(acc)
}

/// First-order rate `E₁(B|A) = (2/ħ) Σ_λ p_λ Im ⟨B φ_λ | F φ_λ⟩` with the
/// particle-b generator standing in for the full one.
pub fn first_order_rate(mixture: &Mixture, b: &Observable, spec: &GeneratorSpec) -> Result<f64> {
    rate_with(mixture, b, spec, apply_generator)
}

/// Same functional restricted to the nonlinear part of `F`; this is the
/// branch-resolved diagnostic (for a momentum branch made of exact plane
/// waves the DG part vanishes identically).
pub fn first_order_rate_nonlinear(
    mixture: &Mixture,
    b: &Observable,
    spec: &GeneratorSpec,
) -> Result<f64> {
    rate_with(mixture, b, spec, apply_nonlinearity)
}

fn rate_with(
    mixture: &Mixture,
    b: &Observable,
    spec: &GeneratorSpec,
    image: impl Fn(&ComplexField, &GeneratorSpec) -> Result<ComplexField> + Sync,
) -> Result<f64> {
    let terms: Vec<Result<f64>> = mixture
        .members
        .par_iter()
        .enumerate()
        .map(|(idx, m)| {
            let b_phi = b.apply(&m.factor_b)?;
            let f_phi = image(&m.factor_b, spec).map_err(|e| match e {
                Error::SingularPoint { index, density } => Error::CheckFailed(format!(
                    "singular point at grid index {index} (|psi|^2 = {density:.3e}) in mixture member {idx}"
                )),
                other => other,
            })?;
            Ok(m.weight * inner_product(&b_phi, &f_phi)?.im)
        })
        .collect();
    let mut acc = 0.0;
    for t in terms {
        acc += t?;
    }
    Ok(2.0 / spec.hbar * acc)
}

/// `Δ₁(B | A, A') = E₁(B|A) - E₁(B|A')`; antisymmetric under basis swap.
pub fn delta1(
    psi: &TwoParticleField,
    b: &Observable,
    basis1: Basis,
    basis2: Basis,
    spec: &GeneratorSpec,
    truncation: f64,
) -> Result<f64> {
    let m1 = measure_first_particle(psi, basis1, truncation)?;
    let m2 = measure_first_particle(psi, basis2, truncation)?;
    Ok(first_order_rate(&m1, b, spec)? - first_order_rate(&m2, b, spec)?)
}

/// Quadratic-in-`t` fit of `E(B, t | A)` over `t_list`.
///
/// The quadratic column absorbs the `O(t²)` Taylor term so the linear
/// coefficient estimates `E₁` cleanly; the slope is checked against
/// [`first_order_rate`] by the caller. Requires the times to span at least a
/// factor of two.
pub fn finite_difference_check(
    psi: &TwoParticleField,
    b: &Observable,
    basis: Basis,
    spec: &GeneratorSpec,
    t_list: &[f64],
    cfg: &IntegratorConfig,
    truncation: f64,
) -> Result<fit::FitResult> {
    if t_list.len() < 3 {
        return Err(Error::FitConditioning(format!(
            "need at least 3 delays, got {}",
            t_list.len()
        )));
    }
    let lo = t_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_list.iter().copied().fold(0.0f64, f64::max);
    if !(lo > 0.0) || hi / lo < 2.0 {
        return Err(Error::FitConditioning(format!(
            "delays [{lo:.3e}, {hi:.3e}] span less than a factor 2"
        )));
    }

    let mut ts = vec![0.0];
    ts.extend_from_slice(t_list);
    let values: Vec<Result<f64>> = ts
        .par_iter()
        .map(|&t| expectation_after_delay(psi, basis, b, t, spec, cfg, truncation))
        .collect();
    let mut e = Vec::with_capacity(ts.len());
    for v in values {
        e.push(v?);
    }

    let ones = vec![1.0; ts.len()];
    let t2: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let coeff = fit::least_squares(&[&ones, &ts, &t2], &e)?;
    let predicted: Vec<f64> = ts.iter().map(|t| coeff[0] + coeff[1] * t + coeff[2] * t * t).collect();
    let max_rel_residual = e
        .iter()
        .zip(&predicted)
        .map(|(a, p)| (a - p).abs() / a.abs().max(1e-300))
        .fold(0.0, f64::max);
    Ok(fit::FitResult {
        slope: coeff[1],
        intercept: coeff[0],
        residual_exponent: None,
        r_range: (lo, hi),
        max_rel_residual,
    })
}

/// Wavenumber of an FFT bin, exposed for reports.
pub fn mode_wavenumber(grid: &GridSpec, bin: usize) -> f64 {
    2.0 * PI * fft::signed_mode(bin, grid.points()) as f64 / grid.extent()
}
