//! Dense kernels for the score network. Buffers are row-major; a layer with
//! `inp` inputs and `out` outputs stores its weight as `out x inp`.

#![allow(unsafe_code)]

/// `y (b x out) = x (b x inp) W^T + bias`.
pub fn linear_forward(x: &[f64], w: &[f64], bias: &[f64], y: &mut [f64], b: usize, inp: usize, out: usize) {
    assert_eq!(x.len(), b * inp);
    assert_eq!(w.len(), out * inp);
    assert_eq!(bias.len(), out);
    assert_eq!(y.len(), b * out);
    for row in y.chunks_exact_mut(out) {
        row.copy_from_slice(bias);
    }
    // SAFETY: the asserts above bound every access of dgemm to the slices.
    unsafe {
        matrixmultiply::dgemm(
            b,
            inp,
            out,
            1.0,
            x.as_ptr(),
            inp as isize,
            1,
            w.as_ptr(),
            1,
            inp as isize,
            1.0,
            y.as_mut_ptr(),
            out as isize,
            1,
        );
    }
}

/// Accumulates `dW += dy^T x` and `dbias += sum_rows dy`, and writes
/// `dx = dy W` when requested.
#[allow(clippy::too_many_arguments)]
pub fn linear_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    dbias: &mut [f64],
    dx: Option<&mut [f64]>,
    b: usize,
    inp: usize,
    out: usize,
) {
    assert_eq!(x.len(), b * inp);
    assert_eq!(w.len(), out * inp);
    assert_eq!(dy.len(), b * out);
    assert_eq!(dw.len(), out * inp);
    assert_eq!(dbias.len(), out);
    for row in dy.chunks_exact(out) {
        for (acc, v) in dbias.iter_mut().zip(row) {
            *acc += v;
        }
    }
    // SAFETY: sizes asserted above.
    unsafe {
        matrixmultiply::dgemm(
            out,
            b,
            inp,
            1.0,
            dy.as_ptr(),
            1,
            out as isize,
            x.as_ptr(),
            inp as isize,
            1,
            1.0,
            dw.as_mut_ptr(),
            inp as isize,
            1,
        );
    }
    if let Some(dx) = dx {
        assert_eq!(dx.len(), b * inp);
        // SAFETY: sizes asserted above.
        unsafe {
            matrixmultiply::dgemm(
                b,
                out,
                inp,
                1.0,
                dy.as_ptr(),
                out as isize,
                1,
                w.as_ptr(),
                inp as isize,
                1,
                0.0,
                dx.as_mut_ptr(),
                inp as isize,
                1,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn forward_matches_naive() {
        let (b, inp, out) = (3, 4, 2);
        let x: vec::Vec<f64> = (0..b * inp).map(|i| i as f64 * 0.5 - 1.0).collect();
        let w: vec::Vec<f64> = (0..out * inp).map(|i| (i as f64).sin()).collect();
        let bias = [0.1, -0.2];
        let mut y = vec![0.0; b * out];
        linear_forward(&x, &w, &bias, &mut y, b, inp, out);
        for r in 0..b {
            for o in 0..out {
                let expected: f64 = bias[o] + (0..inp).map(|k| x[r * inp + k] * w[o * inp + k]).sum::<f64>();
                assert!((y[r * out + o] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_matches_naive() {
        let (b, inp, out) = (3, 4, 2);
        let x: vec::Vec<f64> = (0..b * inp).map(|i| (i as f64 * 0.3).cos()).collect();
        let w: vec::Vec<f64> = (0..out * inp).map(|i| (i as f64).sin()).collect();
        let dy: vec::Vec<f64> = (0..b * out).map(|i| i as f64 - 2.0).collect();
        let mut dw = vec![1.0; out * inp];
        let mut db = vec![0.5; out];
        let mut dx = vec![9.0; b * inp];
        linear_backward(&x, &w, &dy, &mut dw, &mut db, Some(&mut dx), b, inp, out);
        for o in 0..out {
            let s: f64 = (0..b).map(|r| dy[r * out + o]).sum();
            assert!((db[o] - 0.5 - s).abs() < 1e-12);
            for k in 0..inp {
                let g: f64 = (0..b).map(|r| dy[r * out + o] * x[r * inp + k]).sum();
                assert!((dw[o * inp + k] - 1.0 - g).abs() < 1e-12);
            }
        }
        for r in 0..b {
            for k in 0..inp {
                let g: f64 = (0..out).map(|o| dy[r * out + o] * w[o * inp + k]).sum();
                assert!((dx[r * inp + k] - g).abs() < 1e-12);
            }
        }
    }
}
