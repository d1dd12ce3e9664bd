//! Unnormalised multi-dimensional FFTs on cubic row-major arrays.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Transform `data`, viewed as an `n^dims` array, along each axis in `axes`.
///
/// No normalisation is applied in either direction.
pub fn transform_axes(data: &mut [Complex64], n: usize, dims: usize, axes: &[usize], inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dims as u32));
    if n <= 1 {
        return;
    }
    let fft = plan(n, inverse);
    let mut scratch = Vec::new();
    for &axis in axes {
        assert!(axis < dims);
        let stride = n.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        // gather each block into contiguous lines, transform, scatter back
        let block = n * stride;
        scratch.resize(block, Complex64::new(0.0, 0.0));
        for chunk in data.chunks_mut(block) {
            for j in 0..n {
                for i in 0..stride {
                    scratch[i * n + j] = chunk[j * stride + i];
                }
            }
            fft.process(&mut scratch);
            for j in 0..n {
                for i in 0..stride {
                    chunk[j * stride + i] = scratch[i * n + j];
                }
            }
        }
    }
}

/// Full transform along every axis.
pub fn transform(data: &mut [Complex64], n: usize, dims: usize, inverse: bool) {
    let axes: Vec<usize> = (0..dims).collect();
    transform_axes(data, n, dims, &axes, inverse);
}
