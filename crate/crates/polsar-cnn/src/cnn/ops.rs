//! The four map-level primitives the network is built from: valid
//! cross-correlation, block average pooling, and their exact adjoints.
//!
//! "Convolution" here is the cross-correlation convention (no kernel flip),
//! used identically in the forward and backward passes; for learned kernels
//! the two conventions differ only by which orientation the weights settle
//! into. All accumulation runs in a fixed nested-loop order so results are
//! bit-reproducible.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Unpadded ("valid") cross-correlation: `out(r,c) = Σ_{u,v} k(u,v)·in(r+u, c+v)`,
/// shrinking an `H×W` input to `(H-Kx+1)×(W-Ky+1)`.
pub fn valid_conv2d(kernel: &Array2<f64>, input: &Array2<f64>) -> Result<Array2<f64>> {
    let (kx, ky) = kernel.dim();
    let (h, w) = input.dim();
    if kx > h || ky > w {
        return Err(Error::KernelLargerThanInput {
            kernel_rows: kx,
            kernel_cols: ky,
            input_rows: h,
            input_cols: w,
        });
    }
    let mut out = Array2::zeros((h - kx + 1, w - ky + 1));
    for r in 0..h - kx + 1 {
        for c in 0..w - ky + 1 {
            let mut acc = 0.0;
            for u in 0..kx {
                for v in 0..ky {
                    acc += kernel[[u, v]] * input[[r + u, c + v]];
                }
            }
            out[[r, c]] = acc;
        }
    }
    Ok(out)
}

/// Average pooling over non-overlapping `ssx×ssy` blocks (`ssx` rows,
/// `ssy` columns); trailing rows/columns that do not fill a block are
/// dropped, giving a `⌊H/ssx⌋×⌊W/ssy⌋` map.
pub fn subsample(map: &Array2<f64>, ssx: usize, ssy: usize) -> Result<Array2<f64>> {
    let (h, w) = map.dim();
    if ssx == 0 || ssy == 0 || ssx > h || ssy > w {
        return Err(Error::BadSubsample {
            ssx,
            ssy,
            height: h,
            width: w,
        });
    }
    let norm = 1.0 / (ssx * ssy) as f64;
    let mut out = Array2::zeros((h / ssx, w / ssy));
    for i in 0..h / ssx {
        for j in 0..w / ssy {
            let mut acc = 0.0;
            for u in 0..ssx {
                for v in 0..ssy {
                    acc += map[[i * ssx + u, j * ssy + v]];
                }
            }
            out[[i, j]] = acc * norm;
        }
    }
    Ok(out)
}

/// Adjoint of [`valid_conv2d`] with respect to its input: scatters each
/// delta cell back through the kernel footprint,
/// `grad(a,b) = Σ_{u,v} k(u,v)·δ(a-u, b-v)` over in-bounds terms (a full,
/// zero-padded correlation).
pub fn conv2d_input_grad(
    kernel: &Array2<f64>,
    delta: &Array2<f64>,
    input_dims: (usize, usize),
) -> Array2<f64> {
    let (kx, ky) = kernel.dim();
    let (dr, dc) = delta.dim();
    debug_assert_eq!(input_dims, (dr + kx - 1, dc + ky - 1));
    let mut grad = Array2::zeros(input_dims);
    for r in 0..dr {
        for c in 0..dc {
            let d = delta[[r, c]];
            for u in 0..kx {
                for v in 0..ky {
                    grad[[r + u, c + v]] += kernel[[u, v]] * d;
                }
            }
        }
    }
    grad
}

/// Adjoint of [`valid_conv2d`] with respect to its kernel:
/// `grad(u,v) = Σ_{r,c} δ(r,c)·in(r+u, c+v)`, which is itself a valid
/// cross-correlation with the delta map acting as the kernel.
pub fn conv2d_kernel_grad(input: &Array2<f64>, delta: &Array2<f64>) -> Array2<f64> {
    valid_conv2d(delta, input).expect("delta never exceeds the input it came from")
}

/// Adjoint of [`subsample`]: each pooled cell's gradient is divided equally
/// among its `ssx·ssy` source cells; rows/columns the forward pass dropped
/// receive zero.
pub fn subsample_grad(
    delta: &Array2<f64>,
    ssx: usize,
    ssy: usize,
    input_dims: (usize, usize),
) -> Array2<f64> {
    let (di, dj) = delta.dim();
    debug_assert_eq!((input_dims.0 / ssx, input_dims.1 / ssy), (di, dj));
    let norm = 1.0 / (ssx * ssy) as f64;
    let mut grad = Array2::zeros(input_dims);
    for i in 0..di {
        for j in 0..dj {
            let d = delta[[i, j]] * norm;
            for u in 0..ssx {
                for v in 0..ssy {
                    grad[[i * ssx + u, j * ssy + v]] = d;
                }
            }
        }
    }
    grad
}
