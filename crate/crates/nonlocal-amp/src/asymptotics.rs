//! The Gaussian delta family and its calculus under the nonlinear
//! functionals.
//!
//! `δ^(r)(y) = (r/π)^{n/2} exp(-r y²)` integrates to one for every sharpness
//! `r` and tends weakly to the Dirac delta as `r → ∞`. Everything the
//! amplification analysis needs about it is exactly computable:
//!
//! * moments: `∫ ‖y‖^p e^{-r y²} d^n y = (σ_n/2) Γ((n+p)/2) r^{-(n+p)/2}`
//!   with `σ_n = 2π^{n/2}/Γ(n/2)` the unit-sphere surface measure;
//! * the image under the N functional: `N(δ^(r)) = 4 r² y² δ^(r)`, whose
//!   pairing with a test function expands as
//!   `2 n r f(0) + (n/2 + 1) Tr(Hf)(0) + O(r^{-1})`;
//! * the log images: `M(δ^(r)) = ((n/2) ln(r/π) - r y²) δ^(r)` and
//!   `K(δ^(r)) = 0` — the leading `(n/2) ln r` growth is real, which is why
//!   those nonlinearities do not amplify.
//!
//! Each closed form is cross-checked against adaptive quadrature, and the
//! expansions are verified by sweeping `r` over decades and fitting.

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};
use crate::fit::{self, FitResult};
use crate::generator::{apply_nonlinearity, GeneratorSpec};
use crate::quad;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Largest argument for which Γ fits in an f64.
const GAMMA_OVERFLOW: f64 = 170.0;

/// The δ-approximating family: sharpness `r`, center `w`, dimension `n`.
#[derive(Debug, Clone)]
pub struct GaussianDelta {
    pub r: f64,
    pub center: Vec<f64>,
    pub dim: usize,
}

impl GaussianDelta {
    pub fn new(r: f64, center: Vec<f64>, dim: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Range(format!("sharpness must be positive, got {r}")));
        }
        if center.len() != dim || !(1..=3).contains(&dim) {
            return Err(Error::Range(format!(
                "center has {} components for dimension {dim}",
                center.len()
            )));
        }
        Ok(Self { r, center, dim })
    }

    pub fn amplitude(&self) -> f64 {
        (self.r / PI).powf(self.dim as f64 / 2.0)
    }

    fn dist_sq(&self, y: &[f64]) -> f64 {
        y.iter().zip(&self.center).map(|(a, w)| (a - w) * (a - w)).sum()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.amplitude() * (-self.r * self.dist_sq(y)).exp()
    }

    /// Multiplier of `δ^(r)` under the N functional: `4 r² (y-w)²`.
    pub fn n_multiplier(&self, y: &[f64]) -> f64 {
        4.0 * self.r * self.r * self.dist_sq(y)
    }

    /// Multiplier under `∇² + N`: `8 r² (y-w)² - 2 n r`.
    pub fn lap_plus_n_multiplier(&self, y: &[f64]) -> f64 {
        2.0 * self.n_multiplier(y) - 2.0 * self.dim as f64 * self.r
    }

    /// Multiplier under the BBM image: `(n/2) ln(r/π) - r (y-w)²`.
    pub fn bbm_multiplier(&self, y: &[f64]) -> f64 {
        0.5 * self.dim as f64 * (self.r / PI).ln() - self.r * self.dist_sq(y)
    }

    /// Sample onto a grid (keeps the δ normalization, not the L² one).
    pub fn sample(&self, grid: GridSpec) -> Result<ComplexField> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "delta family dimension {} vs grid dimension {}",
                self.dim,
                grid.dim()
            )));
        }
        ComplexField::delta_family(grid, &self.center, self.r)
    }

    /// Half-width of a quadrature box that captures the Gaussian tail to
    /// well below every tolerance used here.
    pub fn support_radius(&self) -> f64 {
        12.0 / self.r.sqrt()
    }
}

/// Smooth test function with analytically known data at the origin.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    /// Radial integrands take the fast 1-dimensional reduction.
    pub radial: bool,
    pub f: fn(&[f64]) -> f64,
    pub value_at_origin: f64,
    /// Trace of the Hessian at the origin as a function of the dimension.
    pub hessian_trace: fn(usize) -> f64,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

fn sq(y: &[f64]) -> f64 {
    y.iter().map(|a| a * a).sum()
}

/// The canonical test-function library.
///
/// Hessian traces at the origin: `gauss` −2n, `y2_gauss` +2n, `odd_gauss` 0,
/// `cos_gauss` −(2n+1), `bump` −2n; values at the origin 1, 0, 0, 1, 1.
pub fn test_functions() -> Vec<TestFunction> {
    vec![
        TestFunction {
            name: "gauss",
            radial: true,
            f: |y| (-sq(y)).exp(),
            value_at_origin: 1.0,
            hessian_trace: |n| -2.0 * n as f64,
        },
        TestFunction {
            name: "y2_gauss",
            radial: true,
            f: |y| sq(y) * (-sq(y)).exp(),
            value_at_origin: 0.0,
            hessian_trace: |n| 2.0 * n as f64,
        },
        TestFunction {
            name: "odd_gauss",
            radial: false,
            f: |y| y[0] * (-sq(y)).exp(),
            value_at_origin: 0.0,
            hessian_trace: |_| 0.0,
        },
        TestFunction {
            name: "cos_gauss",
            radial: false,
            f: |y| y[0].cos() * (-sq(y)).exp(),
            value_at_origin: 1.0,
            hessian_trace: |n| -(2.0 * n as f64 + 1.0),
        },
        TestFunction {
            name: "bump",
            radial: true,
            f: |y| 1.0 / (1.0 + sq(y)),
            value_at_origin: 1.0,
            hessian_trace: |n| -2.0 * n as f64,
        },
    ]
}

pub fn test_function(name: &str) -> Result<TestFunction> {
    test_functions()
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| Error::Config(format!("unknown test function `{name}`")))
}

/// Closed form `∫ ‖y‖^p e^{-r y²} d^n y` via the Gamma function.
pub fn moment_exact(n: usize, p: usize, r: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::Range(format!("dimension must be 1..=3, got {n}")));
    }
    if p % 2 != 0 {
        return Err(Error::Range(format!("moment order must be even, got {p}")));
    }
    if !(r > 0.0) {
        return Err(Error::Range(format!("sharpness must be positive, got {r}")));
    }
    let arg = (n + p) as f64 / 2.0;
    if arg > GAMMA_OVERFLOW {
        return Err(Error::Range(format!("Gamma argument {arg} exceeds the f64 range")));
    }
    let surface = quad::sphere_surface(n)?;
    Ok(surface / 2.0 * gamma(arg) * r.powf(-arg))
}

/// The same moment by adaptive radial quadrature.
pub fn moment_quadrature(n: usize, p: usize, r: f64) -> Result<f64> {
    let rmax = 14.0 / r.sqrt() * (1.0 + p as f64 / 8.0);
    quad::integrate_radial(
        |rho| rho.powi(p as i32) * (-r * rho * rho).exp(),
        n,
        rmax,
        1e-10,
        1e-14,
    )
}

/// Exponent of `r` in `r^{2 + n/2} · moment(n, p, r)`; only `p ≥ 4` keeps it
/// from growing.
pub fn combined_growth_exponent(n: usize, p: usize) -> f64 {
    2.0 + n as f64 / 2.0 - (n + p) as f64 / 2.0
}

/// Pairing `∫ N(δ^(r)) f d^n y = 4 r² ∫ y² δ^(r) f d^n y` by adaptive
/// quadrature of the closed-form image.
pub fn pair_n_gaussian(f: &TestFunction, r: f64, n: usize) -> Result<f64> {
    let delta = GaussianDelta::new(r, vec![0.0; n], n)?;
    let radius = delta.support_radius();
    if f.radial {
        quad::integrate_radial(
            |rho| {
                let y = [rho];
                delta.n_multiplier(&y) * delta.amplitude() * (-r * rho * rho).exp() * (f.f)(&y)
            },
            n,
            radius,
            1e-10,
            1e-13,
        )
    } else {
        let boxes = vec![(-radius, radius); n];
        quad::integrate_nd(
            |y| delta.n_multiplier(y) * delta.eval(y) * (f.f)(y),
            &boxes,
            1e-10,
            1e-13,
        )
    }
}

/// Pairing `∫ δ^(r) f d^n y` by adaptive quadrature.
pub fn pair_delta(f: &TestFunction, r: f64, n: usize) -> Result<f64> {
    let delta = GaussianDelta::new(r, vec![0.0; n], n)?;
    let radius = delta.support_radius();
    if f.radial {
        quad::integrate_radial(
            |rho| {
                let y = [rho];
                delta.amplitude() * (-r * rho * rho).exp() * (f.f)(&y)
            },
            n,
            radius,
            1e-11,
            1e-14,
        )
    } else {
        let boxes = vec![(-radius, radius); n];
        quad::integrate_nd(|y| delta.eval(y) * (f.f)(y), &boxes, 1e-11, 1e-14)
    }
}

/// Pairing `∫ M(δ^(r)) f d^n y` of the BBM image by adaptive quadrature.
pub fn pair_bbm(f: &TestFunction, r: f64, n: usize) -> Result<f64> {
    let delta = GaussianDelta::new(r, vec![0.0; n], n)?;
    let radius = delta.support_radius();
    if f.radial {
        quad::integrate_radial(
            |rho| {
                let y = [rho];
                delta.bbm_multiplier(&y) * delta.amplitude() * (-r * rho * rho).exp() * (f.f)(&y)
            },
            n,
            radius,
            1e-10,
            1e-13,
        )
    } else {
        let boxes = vec![(-radius, radius); n];
        quad::integrate_nd(
            |y| delta.bbm_multiplier(y) * delta.eval(y) * (f.f)(y),
            &boxes,
            1e-10,
            1e-13,
        )
    }
}

/// Verify the expansion of `∫ N(δ^(r)) f` in `r`.
///
/// Fits `a·r + b + c/r` by least squares over the sweep (the `1/r` column
/// carries the remainder; a plain affine fit over two decades would leak it
/// into the intercept) and reads the remainder exponent from a log–log fit
/// of the residual against the affine part. Expected: `a = 2n f(0)`,
/// `b = (n/2 + 1) Tr(Hf)(0)`, exponent ≈ −1.
pub fn verify_n_expansion(f: &TestFunction, r_list: &[f64], n: usize) -> Result<FitResult> {
    if r_list.len() < 8 {
        return Err(Error::FitConditioning(format!(
            "need at least 8 sweep points, got {}",
            r_list.len()
        )));
    }
    let (lo, hi) = fit::require_decades(r_list, 2.0)?;
    let values: Vec<f64> = r_list
        .iter()
        .map(|&r| pair_n_gaussian(f, r, n))
        .collect::<Result<_>>()?;
    let ones = vec![1.0; r_list.len()];
    let inv: Vec<f64> = r_list.iter().map(|r| 1.0 / r).collect();
    let coeff = fit::least_squares(&[r_list, &ones, &inv], &values)?;
    let residuals: Vec<f64> = values
        .iter()
        .zip(r_list)
        .map(|(v, r)| v - coeff[0] * r - coeff[1])
        .collect();
    let exponent = fit::loglog(r_list, &residuals, 1e-10)?.map(|(s, _)| s);
    let max_rel_residual = residuals
        .iter()
        .zip(&values)
        .map(|(res, v)| res.abs() / v.abs().max(1e-300))
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope: coeff[0],
        intercept: coeff[1],
        residual_exponent: exponent,
        r_range: (lo, hi),
        max_rel_residual,
    })
}

/// Verify `δ^(r) → δ` weakly with an `O(r^{-1})` rate: fits the decay
/// exponent of `∫ δ^(r) f - f(0)`.
pub fn verify_delta_weak_limit(f: &TestFunction, r_list: &[f64], n: usize) -> Result<FitResult> {
    let (lo, hi) = fit::require_decades(r_list, 2.0)?;
    let residuals: Vec<f64> = r_list
        .iter()
        .map(|&r| Ok(pair_delta(f, r, n)? - f.value_at_origin))
        .collect::<Result<_>>()?;
    let fit_ll = fit::loglog(r_list, &residuals, 1e-10)?;
    let max_rel_residual = residuals
        .iter()
        .map(|res| res.abs() / f.value_at_origin.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope: fit_ll.map(|(s, _)| s).unwrap_or(0.0),
        intercept: fit_ll.map(|(_, i)| i).unwrap_or(0.0),
        residual_exponent: fit_ll.map(|(s, _)| s),
        r_range: (lo, hi),
        max_rel_residual,
    })
}

/// Grid and pairing checks of the closed-form BBM and Kostin images.
#[derive(Debug, Clone)]
pub struct LogImageReport {
    pub r: f64,
    pub dim: usize,
    /// max |K(δ^(r))| on the grid; exactly zero for a real positive state.
    pub kostin_max_abs: f64,
    /// max |BBM path - closed form| over the grid.
    pub bbm_max_err: f64,
    /// fitted slope of `∫ M(δ^(r)) f` against `ln r`.
    pub pairing_slope: f64,
    /// expected slope `(n/2) f(0)`.
    pub pairing_slope_target: f64,
    pub pairing_rows: Vec<(f64, f64)>,
}

/// Check both log-nonlinearity images on a sampled `δ^(r)` and the
/// logarithmic growth of the BBM pairing over `r_list` (≥ 3 decades).
pub fn bbm_kostin_on_gaussian(
    r: f64,
    grid: GridSpec,
    f: &TestFunction,
    r_list: &[f64],
) -> Result<LogImageReport> {
    let n = grid.dim();
    let delta = GaussianDelta::new(r, vec![0.0; n], n)?;
    let sampled = delta.sample(grid)?;

    // Kostin path: arg of a positive real field is exactly zero.
    let kostin = apply_nonlinearity(&sampled, &GeneratorSpec::kostin(1.0))?;
    let kostin_max_abs = kostin.max_abs();

    // BBM path against ((n/2) ln(r/pi) - r y^2) delta^(r); compared where the
    // sampled delta has not underflowed.
    let bbm = apply_nonlinearity(&sampled, &GeneratorSpec::bbm(1.0).with_epsilon(0.0))?;
    let mut bbm_max_err: f64 = 0.0;
    let mut y = [0.0f64; 3];
    for (flat, (got, d)) in bbm.values().iter().zip(sampled.values()).enumerate() {
        if d.re < 1e-12 {
            continue;
        }
        grid.coords(flat, &mut y[..n]);
        let expected = delta.bbm_multiplier(&y[..n]) * d.re;
        bbm_max_err = bbm_max_err.max((got.re - expected).abs());
        bbm_max_err = bbm_max_err.max(got.im.abs());
    }

    fit::require_decades(r_list, 3.0)?;
    let pairing_rows: Vec<(f64, f64)> = r_list
        .iter()
        .map(|&ri| Ok((ri, pair_bbm(f, ri, n)?)))
        .collect::<Result<_>>()?;
    let ln_r: Vec<f64> = pairing_rows.iter().map(|(ri, _)| ri.ln()).collect();
    let vals: Vec<f64> = pairing_rows.iter().map(|(_, v)| *v).collect();
    let (pairing_slope, _) = fit::affine(&ln_r, &vals)?;

    Ok(LogImageReport {
        r,
        dim: n,
        kostin_max_abs,
        bbm_max_err,
        pairing_slope,
        pairing_slope_target: 0.5 * n as f64 * f.value_at_origin,
        pairing_rows,
    })
}

/// Log-spaced sweep helper.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::apply_n;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn moment_formula_reference_values() {
        // (1, 0, 1): the plain Gaussian integral sqrt(pi)
        assert_relative_eq!(moment_exact(1, 0, 1.0).unwrap(), PI.sqrt(), max_relative = 1e-12);
        // (3, 2, 2): 2 pi Gamma(5/2) 2^{-5/2}, frozen from the symbolic oracle
        assert_relative_eq!(
            moment_exact(3, 2, 2.0).unwrap(),
            1.476525932411476851,
            max_relative = 1e-12
        );
        // (2, 0, pi): sigma_2 = 2 pi, value exactly 1
        assert_relative_eq!(moment_exact(2, 0, PI).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn moment_matches_tensorized_quadrature_oracle() {
        // fully independent of the radial reduction used by moment_quadrature
        let cases = [(1usize, 2usize, 1.0), (2, 4, 3.0), (3, 2, 2.0)];
        for (n, p, r) in cases {
            let exact = moment_exact(n, p, r).unwrap();
            let radius = 12.0 / r.sqrt();
            let boxes = vec![(-radius, radius); n];
            let quad_v = quad::integrate_nd(
                |y| sq(y).powf(p as f64 / 2.0) * (-r * sq(y)).exp(),
                &boxes,
                1e-9,
                1e-12,
            )
            .unwrap();
            assert_relative_eq!(exact, quad_v, max_relative = 1e-6);
        }
    }

    #[test]
    fn moment_overflow_guard() {
        assert!(matches!(moment_exact(1, 340, 1.0), Err(Error::Range(_))));
    }

    #[test]
    fn growth_exponent_arithmetic() {
        // nonnegative exactly when p <= 4, for every dimension
        for n in 1..=3 {
            for p in (0..=8).step_by(2) {
                let e = combined_growth_exponent(n, p);
                assert_eq!(e >= 0.0, p <= 4, "n={n} p={p} e={e}");
            }
        }
    }

    // Oracle: exact symbolic pairing 2 r^{5/2} / (1+r)^{3/2} for f = e^{-y^2}
    // in one dimension.
    #[test]
    fn pair_n_gaussian_matches_symbolic_oracle() {
        let f = test_function("gauss").unwrap();
        let v10 = pair_n_gaussian(&f, 10.0, 1).unwrap();
        assert_relative_eq!(v10, 17.335683440828951, max_relative = 1e-8);
        let v100 = pair_n_gaussian(&f, 100.0, 1).unwrap();
        assert_relative_eq!(v100, 197.03706736831468, max_relative = 1e-8);
        // large-r trend 2r - 3 + O(1/r)
        assert!((v100 - 197.0).abs() < 0.04);
    }

    #[test]
    fn pair_n_gaussian_odd_function_vanishes() {
        let f = test_function("odd_gauss").unwrap();
        let v = pair_n_gaussian(&f, 10.0, 1).unwrap();
        assert!(v.abs() < 1e-10);
    }

    // Oracle: cos_gauss pairing 4 r^{5/2} e^{-1/(4s)} (s^{-3/2}/2 - s^{-5/2}/4)
    // with s = r + 1; frozen at r = 10.
    #[test]
    fn pair_n_gaussian_cos_modulated_oracle() {
        let f = test_function("cos_gauss").unwrap();
        let v = pair_n_gaussian(&f, 10.0, 1).unwrap();
        assert_relative_eq!(v, 16.175855277327434, max_relative = 1e-8);
    }

    // Oracle: bump pairing 4r^2 - 4 sqrt(pi) r^{5/2} e^r erfc(sqrt(r)),
    // frozen at r = 10.
    #[test]
    fn pair_n_gaussian_bump_oracle() {
        let f = test_function("bump").unwrap();
        let v = pair_n_gaussian(&f, 10.0, 1).unwrap();
        assert_relative_eq!(v, 17.565354827889309, max_relative = 1e-8);
    }

    #[test]
    fn n_expansion_coefficients_in_one_dimension() {
        let f = test_function("gauss").unwrap();
        let r_list = logspace(10.0, 1000.0, 12);
        let fitres = verify_n_expansion(&f, &r_list, 1).unwrap();
        assert_relative_eq!(fitres.slope, 2.0, max_relative = 5e-3);
        assert_relative_eq!(fitres.intercept, -3.0, max_relative = 2e-2);
        let e = fitres.residual_exponent.unwrap();
        assert!((e + 1.0).abs() < 0.15, "exponent {e}");
    }

    #[test]
    fn n_expansion_coefficients_in_two_dimensions() {
        let f = test_function("gauss").unwrap();
        let r_list = logspace(10.0, 1000.0, 12);
        let fitres = verify_n_expansion(&f, &r_list, 2).unwrap();
        assert_relative_eq!(fitres.slope, 4.0, max_relative = 5e-3);
        assert_relative_eq!(fitres.intercept, -8.0, max_relative = 2e-2);
    }

    #[test]
    fn n_expansion_with_vanishing_origin_value() {
        let f = test_function("y2_gauss").unwrap();
        let r_list = logspace(10.0, 1000.0, 12);
        let fitres = verify_n_expansion(&f, &r_list, 1).unwrap();
        assert!(fitres.slope.abs() < 1e-3, "slope {}", fitres.slope);
        // leading behavior is the constant (n/2+1) TrH = 3
        assert_relative_eq!(fitres.intercept, 3.0, max_relative = 2e-2);
    }

    #[test]
    fn n_expansion_requires_two_decades() {
        let f = test_function("gauss").unwrap();
        let r_list = logspace(10.0, 50.0, 10);
        assert!(matches!(
            verify_n_expansion(&f, &r_list, 1),
            Err(Error::FitConditioning(_))
        ));
    }

    // Oracle: exact closed form (1 + 1/r)^{-1/2}, residual ≈ -1/(2r).
    #[test]
    fn weak_limit_of_delta_family() {
        let f = test_function("gauss").unwrap();
        let v = pair_delta(&f, 10.0, 1).unwrap();
        assert_relative_eq!(v, (1.0f64 + 0.1).powf(-0.5), max_relative = 1e-9);
        let r_list = logspace(10.0, 1000.0, 10);
        let fitres = verify_delta_weak_limit(&f, &r_list, 1).unwrap();
        let e = fitres.residual_exponent.unwrap();
        assert!((e + 1.0).abs() < 0.15, "exponent {e}");
    }

    #[test]
    fn weak_limit_degenerate_cases() {
        // normalization: f ≡ 1 has residual 0 for every r
        let one = TestFunction {
            name: "one",
            radial: true,
            f: |_| 1.0,
            value_at_origin: 1.0,
            hessian_trace: |_| 0.0,
        };
        let r_list = logspace(1.0, 100.0, 8);
        let fitres = verify_delta_weak_limit(&one, &r_list, 1).unwrap();
        assert!(fitres.residual_exponent.is_none());
        assert!(fitres.max_rel_residual < 1e-9);
        // parity: odd test function pairs to zero exactly
        let odd = test_function("odd_gauss").unwrap();
        let fitres = verify_delta_weak_limit(&odd, &r_list, 1).unwrap();
        assert!(fitres.residual_exponent.is_none());
    }

    #[test]
    fn bbm_and_kostin_images() {
        let grid = GridSpec::new(1, 512, 16.0).unwrap();
        let f = test_function("gauss").unwrap();
        let r_list = logspace(10.0, 1e4, 9);
        let report = bbm_kostin_on_gaussian(4.0, grid, &f, &r_list).unwrap();
        assert!(report.kostin_max_abs < 1e-12, "Kostin image {}", report.kostin_max_abs);
        assert!(report.bbm_max_err < 1e-9, "BBM image error {}", report.bbm_max_err);
        let ratio = report.pairing_slope / report.pairing_slope_target;
        assert!((ratio - 1.0).abs() < 0.02, "pairing slope ratio {ratio}");
    }

    #[test]
    fn bbm_multiplier_vanishes_at_r_equals_pi_at_center() {
        let delta = GaussianDelta::new(PI, vec![0.0], 1).unwrap();
        assert_abs_diff_eq!(delta.bbm_multiplier(&[0.0]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sampled_delta_integrates_to_one() {
        // grid resolves width 1/sqrt(r) with >= 8 points
        let r = 4.0;
        let grid = GridSpec::new(1, 128, 16.0).unwrap();
        let delta = GaussianDelta::new(r, vec![0.0], 1).unwrap();
        let sampled = delta.sample(grid).unwrap();
        let integral: f64 = sampled.values().iter().map(|v| v.re).sum::<f64>() * grid.cell_volume();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-8);
    }

    // Cross-validation: closed form vs adaptive quadrature across the whole
    // (n, p, r) grid used by the acceptance suite.
    #[test]
    fn moment_cross_validation_grid() {
        for n in 1..=3usize {
            for p in [0usize, 2, 4, 6] {
                for r in [0.5, 1.0, 10.0, 100.0] {
                    let exact = moment_exact(n, p, r).unwrap();
                    let quad_v = moment_quadrature(n, p, r).unwrap();
                    let rel = (exact - quad_v).abs() / exact.abs();
                    assert!(rel < 1e-6, "n={n} p={p} r={r}: rel {rel}");
                }
            }
        }
    }

    // Cross-validation: pair_n_gaussian two ways — closed-form quadrature vs
    // apply_n on a sampled grid field. The grid side needs the epsilon floor:
    // below the FFT noise floor the spectral gradient no longer tracks the
    // true tail and the bare ratio |∇ψ|²/|ψ|² blows up.
    #[test]
    fn pairing_against_grid_n_functional() {
        let f = test_function("gauss").unwrap();
        let r = 4.0;
        let grid = GridSpec::new(1, 512, 16.0).unwrap();
        let delta = GaussianDelta::new(r, vec![0.0], 1).unwrap();
        let sampled = delta.sample(grid).unwrap();
        let image = apply_n(&sampled, 1e-12).unwrap();
        let mut acc = 0.0;
        for (flat, v) in image.values().iter().enumerate() {
            let y = grid.coord(flat);
            acc += v.re * (f.f)(&[y]);
        }
        let grid_value = acc * grid.cell_volume();
        let quad_value = pair_n_gaussian(&f, r, 1).unwrap();
        assert_relative_eq!(grid_value, quad_value, max_relative = 1e-5);
    }
}
