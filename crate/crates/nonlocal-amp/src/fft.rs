//! Strided multi-axis FFT on row-major buffers.
//!
//! rustfft transforms are unnormalized in both directions; the inverse here
//! divides by the axis length so that `inverse(forward(x)) == x` up to
//! roundoff. Plans are cached per thread.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Transform one axis of a row-major array with the given shape in place.
pub fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let block = n * stride;

    let fft = plan(n, inverse);
    let mut line = vec![Complex64::default(); n];
    let scale = 1.0 / n as f64;

    for o in 0..outer {
        for s in 0..stride {
            let base = o * block + s;
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[base + t * stride];
            }
            fft.process(&mut line);
            if inverse {
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = v * scale;
                }
            } else {
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = *v;
                }
            }
        }
    }
}

/// Transform a contiguous range of axes.
pub fn transform_axes(
    data: &mut [Complex64],
    shape: &[usize],
    axes: std::ops::Range<usize>,
    inverse: bool,
) {
    for axis in axes {
        transform_axis(data, shape, axis, inverse);
    }
}

/// Signed integer mode number for FFT bin `j` of an axis with `n` points.
///
/// Follows the usual layout: bins `0..n/2` are nonnegative modes, the rest
/// are negative; for even `n` the shared Nyquist bin is assigned `-n/2` so
/// that first and second derivatives use one consistent wavenumber.
pub fn signed_mode(j: usize, n: usize) -> i64 {
    if j <= (n - 1) / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
