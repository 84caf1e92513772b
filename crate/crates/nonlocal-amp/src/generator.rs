//! The evolution generator `F` of `i ħ ∂_t ψ = F ψ`.
//!
//! `F` is a spectral kinetic term plus a selectable nonlinearity:
//!
//! * `DG(D)`: `i D ħ (∇²ψ + Nψ)` with `Nψ = (|∇ψ|² / |ψ|²) ψ`, the
//!   non-real-linear part singled out as its own functional. `∇² + N`
//!   annihilates every plane wave, which is what makes the momentum branch
//!   of the signaling protocol exactly silent.
//! * `BBM(p)`: the logarithmic term `p ln|ψ| ψ`.
//! * `Kostin(q)`: `i q ln(ψ/ψ̄) ψ = -2 q arg(ψ) ψ`, with `arg` taken as the
//!   per-point principal value. No phase unwrapping across the grid is
//!   attempted.
//!
//! The `R(ψ)ψ` slot of the general family is fixed to zero. Denominators and
//! logarithms are regularized additively with `epsilon`; the number of nodes
//! where the regularizer matters is available as a diagnostic so its effect
//! is never silent.

use crate::error::{Error, Result};
use crate::field::{gradient, inner_product, laplacian, ComplexField};
use num_complex::Complex64;

/// Density floor below which a zero of ψ counts as singular when ε = 0.
const SINGULAR_DENSITY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    Linear,
    /// Doebner–Goldin diffusion term with coefficient `D`.
    Dg { d: f64 },
    /// Bialynicki-Birula–Mycielski logarithmic term with coefficient `p`.
    Bbm { p: f64 },
    /// Kostin phase term with coefficient `q`.
    Kostin { q: f64 },
}

impl Nonlinearity {
    pub fn label(&self) -> &'static str {
        match self {
            Nonlinearity::Linear => "linear",
            Nonlinearity::Dg { .. } => "dg",
            Nonlinearity::Bbm { .. } => "bbm",
            Nonlinearity::Kostin { .. } => "kostin",
        }
    }
}

/// Selection and constants of the generator `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub mass: f64,
    pub hbar: f64,
    pub nonlinearity: Nonlinearity,
    pub epsilon: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, nonlinearity: Nonlinearity::Linear, epsilon: 1e-12 }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::Range(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::Range(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Range(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn linear() -> Self {
        Self::default()
    }

    pub fn dg(d: f64) -> Self {
        Self { nonlinearity: Nonlinearity::Dg { d }, ..Self::default() }
    }

    pub fn bbm(p: f64) -> Self {
        Self { nonlinearity: Nonlinearity::Bbm { p }, ..Self::default() }
    }

    pub fn kostin(q: f64) -> Self {
        Self { nonlinearity: Nonlinearity::Kostin { q }, ..Self::default() }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Pointwise `|∇ψ|²` summed over axes.
fn gradient_density(psi: &ComplexField) -> Vec<f64> {
    let comps = gradient(psi);
    let mut g2 = vec![0.0f64; psi.grid().len()];
    for comp in &comps {
        for (acc, v) in g2.iter_mut().zip(comp.values()) {
            *acc += v.norm_sqr();
        }
    }
    g2
}

/// The N functional: `(|∇ψ|² / (|ψ|² + ε)) ψ`.
///
/// With `ε = 0` the ratio is left exact; a node where `|ψ|²` underflows while
/// the gradient does not is reported as a singular point instead of silently
/// producing infinities.
pub fn apply_n(psi: &ComplexField, epsilon: f64) -> Result<ComplexField> {
    let g2 = gradient_density(psi);
    let mut out = ComplexField::zeros(*psi.grid());
    for (i, ((o, v), g)) in out
        .values_mut()
        .iter_mut()
        .zip(psi.values())
        .zip(&g2)
        .enumerate()
    {
        let d = v.norm_sqr();
        if epsilon == 0.0 && d < SINGULAR_DENSITY && *g > 0.0 {
            return Err(Error::SingularPoint { index: i, density: d });
        }
        let denom = d + epsilon;
        if denom > 0.0 {
            *o = v * (*g / denom);
        }
    }
    Ok(out)
}

/// Count of nodes where the ε-regularizer dominates the density.
pub fn regularized_point_count(psi: &ComplexField, epsilon: f64) -> usize {
    psi.values().iter().filter(|v| v.norm_sqr() < epsilon).count()
}

/// Kinetic part `-(ħ²/2m) ∇²ψ`.
pub fn kinetic(psi: &ComplexField, spec: &GeneratorSpec) -> ComplexField {
    laplacian(psi).scale(Complex64::new(-spec.hbar * spec.hbar / (2.0 * spec.mass), 0.0))
}

/// Nonlinear part of `F` (zero for the linear variant).
pub fn apply_nonlinearity(psi: &ComplexField, spec: &GeneratorSpec) -> Result<ComplexField> {
    match spec.nonlinearity {
        Nonlinearity::Linear => Ok(ComplexField::zeros(*psi.grid())),
        Nonlinearity::Dg { d } => {
            let lap = laplacian(psi);
            let n = apply_n(psi, spec.epsilon)?;
            Ok(lap.add(&n)?.scale(Complex64::new(0.0, d * spec.hbar)))
        }
        Nonlinearity::Bbm { p } => {
            let mut out = ComplexField::zeros(*psi.grid());
            for (o, v) in out.values_mut().iter_mut().zip(psi.values()) {
                // symmetric form ln(|psi|^2 + eps)/2 avoids log(0)
                let ln = 0.5 * (v.norm_sqr() + spec.epsilon).ln();
                *o = v * (p * ln);
            }
            Ok(out)
        }
        Nonlinearity::Kostin { q } => {
            let mut out = ComplexField::zeros(*psi.grid());
            for (o, v) in out.values_mut().iter_mut().zip(psi.values()) {
                *o = v * (-2.0 * q * v.arg());
            }
            Ok(out)
        }
    }
}

/// Full generator `Fψ`.
pub fn apply_generator(psi: &ComplexField, spec: &GeneratorSpec) -> Result<ComplexField> {
    let nl = apply_nonlinearity(psi, spec)?;
    kinetic(psi, spec).add(&nl)
}

/// `Im (ψ, Fψ)`; zero for norm-preserving generators.
pub fn norm_hermiticity_defect(psi: &ComplexField, spec: &GeneratorSpec) -> Result<f64> {
    let image = apply_generator(psi, spec)?;
    Ok(inner_product(psi, &image)?.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid1d(points: usize, extent: f64) -> GridSpec {
        GridSpec::new(1, points, extent).unwrap()
    }

    #[test]
    fn n_turns_plane_wave_into_k_squared() {
        let grid = grid1d(64, 2.0 * PI);
        for m in [1i64, 3, -5, 11] {
            let w = ComplexField::plane_wave(grid, &[m]).unwrap();
            let k = 2.0 * PI * m as f64 / grid.extent();
            let lap = laplacian(&w);
            let n = apply_n(&w, 0.0).unwrap();
            // (lap + N) psi annihilated: N psi = k^2 psi, lap psi = -k^2 psi
            let total = lap.add(&n).unwrap();
            assert!(total.max_abs() < 1e-10, "mode {m}: {}", total.max_abs());
            let expected = w.scale(Complex64::new(k * k, 0.0));
            assert!(n.sub(&expected).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn n_on_delta_family_matches_closed_form() {
        // N(delta^(r))(y) = 4 r^2 y^2 delta^(r)(y)
        let grid = grid1d(512, 16.0);
        let r = 4.0;
        let delta = ComplexField::delta_family(grid, &[0.0], r).unwrap();
        let image = apply_n(&delta, 0.0).unwrap();
        for (flat, (got, d)) in image.values().iter().zip(delta.values()).enumerate() {
            if d.re <= 1e-8 {
                continue;
            }
            let y = grid.coord(flat);
            let expected = 4.0 * r * r * y * y * d.re;
            if expected.abs() > 1e-12 {
                let rel = (got.re - expected).abs() / expected.abs();
                assert!(rel < 1e-6, "y={y}: got {} expected {expected}", got.re);
            }
        }
    }

    #[test]
    fn n_of_constant_field_is_zero() {
        let grid = grid1d(32, 4.0);
        let c = ComplexField::from_fn(grid, |_| Complex64::new(0.4, 0.9)).unwrap();
        let n = apply_n(&c, 1e-12).unwrap();
        assert!(n.max_abs() < 1e-12);
    }

    #[test]
    fn singular_point_is_reported_with_index() {
        let grid = grid1d(32, 4.0);
        let mut vals: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new((2.0 * PI * i as f64 / 32.0).sin(), 0.3))
            .collect();
        vals[7] = Complex64::default();
        let psi = ComplexField::new(grid, vals).unwrap();
        match apply_n(&psi, 0.0) {
            Err(Error::SingularPoint { index, .. }) => assert_eq!(index, 7),
            other => panic!("expected singular point, got {other:?}"),
        }
    }

    #[test]
    fn linear_generator_on_plane_wave_is_kinetic_eigenvalue() {
        let grid = grid1d(64, 2.0 * PI);
        let w = ComplexField::plane_wave(grid, &[3]).unwrap();
        let f = apply_generator(&w, &GeneratorSpec::linear()).unwrap();
        let expected = w.scale(Complex64::new(9.0 / 2.0, 0.0));
        assert!(f.sub(&expected).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn dg_generator_on_plane_wave_reduces_to_kinetic() {
        let grid = grid1d(64, 2.0 * PI);
        let w = ComplexField::plane_wave(grid, &[4]).unwrap();
        let spec = GeneratorSpec::dg(0.3).with_epsilon(0.0);
        let f = apply_generator(&w, &spec).unwrap();
        let expected = w.scale(Complex64::new(16.0 / 2.0, 0.0));
        assert!(f.sub(&expected).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn kostin_vanishes_on_real_positive_states() {
        let grid = grid1d(128, 16.0);
        let g = ComplexField::gaussian(grid, &[0.0], 1.0, &[0.0]).unwrap();
        let term = apply_nonlinearity(&g, &GeneratorSpec::kostin(0.7)).unwrap();
        assert!(term.max_abs() < 1e-12);
        let f = apply_generator(&g, &GeneratorSpec::kostin(0.7)).unwrap();
        let kin = kinetic(&g, &GeneratorSpec::kostin(0.7));
        assert!(f.sub(&kin).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn norm_hermiticity_across_variants() {
        let grid = grid1d(128, 16.0);
        let g = ComplexField::gaussian(grid, &[0.3], 1.0, &[1.0]).unwrap();
        // Oracle for DG: integration by parts gives Re(psi, (lap+N) psi) =
        // -∫|∇psi|² + ∫|∇psi|² = 0, so Im(psi, F psi) = 0.
        let dg = norm_hermiticity_defect(&g, &GeneratorSpec::dg(0.1)).unwrap();
        assert!(dg.abs() < 1e-8, "DG defect {dg}");
        let lin = norm_hermiticity_defect(&g, &GeneratorSpec::linear()).unwrap();
        assert!(lin.abs() < 1e-10, "linear defect {lin}");
        let bbm = norm_hermiticity_defect(&g, &GeneratorSpec::bbm(1.0)).unwrap();
        assert!(bbm.abs() < 1e-10, "BBM defect {bbm}");
        let kos = norm_hermiticity_defect(&g, &GeneratorSpec::kostin(1.0)).unwrap();
        assert!(kos.abs() < 1e-10, "Kostin defect {kos}");
    }

    #[test]
    fn cancellation_identity_on_smooth_nowhere_vanishing_field() {
        let grid = grid1d(64, 2.0 * PI);
        // 2 + small smooth modulation: bounded away from zero
        let psi = ComplexField::from_fn(grid, |y| {
            Complex64::new(2.0 + 0.3 * y[0].cos(), 0.2 * (2.0 * y[0]).sin())
        })
        .unwrap();
        let lap = laplacian(&psi);
        let n = apply_n(&psi, 0.0).unwrap();
        let total = lap.add(&n).unwrap();
        let pairing = inner_product(&psi, &total).unwrap();
        assert!(pairing.re.abs() < 1e-8, "real part {}", pairing.re);
        assert!(pairing.im.abs() < 1e-8, "imag part {}", pairing.im);
    }

    #[test]
    fn regularized_point_diagnostic_counts_small_density_nodes() {
        let grid = grid1d(128, 32.0);
        let g = ComplexField::gaussian(grid, &[0.0], 0.5, &[0.0]).unwrap();
        assert!(regularized_point_count(&g, 1e-4) > 0);
        // a plane wave has |psi|^2 = 1/L everywhere: nothing to regularize
        let w = ComplexField::plane_wave(grid, &[2]).unwrap();
        assert_eq!(regularized_point_count(&w, 1e-12), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        // Complex homogeneity of degree one: N(c psi) = c N(psi) for eps = 0
        // on nowhere-vanishing fields.
        #[test]
        fn n_is_complex_homogeneous(re in -3.0f64..3.0, im in -3.0f64..3.0,
                                    a1 in -0.2f64..0.2, a2 in -0.2f64..0.2) {
            prop_assume!(re * re + im * im > 0.1);
            let grid = grid1d(32, 2.0 * PI);
            let psi = ComplexField::from_fn(grid, |y| {
                Complex64::new(1.0 + a1 * y[0].cos(), a2 * (2.0 * y[0]).sin())
            }).unwrap();
            let c = Complex64::new(re, im);
            let lhs = apply_n(&psi.scale(c), 0.0).unwrap();
            let rhs = apply_n(&psi, 0.0).unwrap().scale(c);
            let err = lhs.sub(&rhs).unwrap().max_abs();
            prop_assert!(err < 1e-9 * psi.max_abs(), "err {err}");
        }

        // Parseval: the grid inner product equals the rescaled spectral sum.
        #[test]
        fn parseval_identity(m1 in -5i64..5, m2 in -5i64..5, w1 in 0.1f64..2.0, w2 in 0.1f64..2.0) {
            let grid = grid1d(32, 2.0 * PI);
            let a = ComplexField::plane_wave(grid, &[m1]).unwrap().scale(Complex64::new(w1, 0.2));
            let b = ComplexField::plane_wave(grid, &[m2]).unwrap().scale(Complex64::new(0.0, w2));
            let f = a.add(&b).unwrap();
            let direct = f.norm_sq();
            let spec_sum: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>()
                / grid.len() as f64 * grid.cell_volume();
            prop_assert!((direct - spec_sum).abs() <= 1e-10 * direct.max(1.0));
        }

        // grad . grad summed over axes equals the Laplacian.
        #[test]
        fn divergence_of_gradient_is_laplacian(m in -6i64..6, amp in 0.1f64..1.5) {
            let grid = GridSpec::new(2, 16, 2.0 * PI).unwrap();
            let f = ComplexField::from_fn(grid, |y| {
                Complex64::new(amp * (m as f64 * y[0]).cos() * y[1].sin(), amp * y[0].sin())
            }).unwrap();
            let grads = gradient(&f);
            let mut div = ComplexField::zeros(grid);
            for (axis, g) in grads.iter().enumerate() {
                let gg = gradient(g);
                div = div.add(&gg[axis]).unwrap();
            }
            let lap = laplacian(&f);
            prop_assert!(div.sub(&lap).unwrap().max_abs() < 1e-10 * (1.0 + lap.max_abs()));
        }

        // The spectral Laplacian is hermitian: Im(f, lap f) = 0.
        #[test]
        fn laplacian_is_hermitian(m1 in -6i64..6, m2 in -6i64..6, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let grid = grid1d(32, 2.0 * PI);
            let a = ComplexField::plane_wave(grid, &[m1]).unwrap();
            let b = ComplexField::plane_wave(grid, &[m2]).unwrap().scale(Complex64::new(re, im));
            let f = a.add(&b).unwrap();
            let ip = inner_product(&f, &laplacian(&f)).unwrap();
            prop_assert!(ip.im.abs() < 1e-10);
        }
    }
}
