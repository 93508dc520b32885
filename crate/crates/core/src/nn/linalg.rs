//! Small dense-matrix kernels used by the network code.
//!
//! Everything is row-major `f64`. The loops are ordered for cache
//! friendliness; tests compare them against naive triple loops.

use crate::data::FeatureMatrix;

/// a (n×k) · b (k×m) -> n×m, where `b` is a raw row-major buffer.
pub(crate) fn matmul(a: &FeatureMatrix, b: &[f64], k: usize, m: usize) -> FeatureMatrix {
    debug_assert_eq!(a.cols(), k);
    debug_assert_eq!(b.len(), k * m);
    let n = a.rows();
    let mut out = vec![0.0; n * m];
    for r in 0..n {
        let arow = a.row(r);
        let orow = &mut out[r * m..(r + 1) * m];
        for (i, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[i * m..(i + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    FeatureMatrix::new(n, m, out).expect("shape is consistent by construction")
}

/// a (n×m) · bᵀ where b is p×m row-major -> n×p (row-dot-row).
pub(crate) fn matmul_abt(a: &FeatureMatrix, b: &[f64], p: usize, m: usize) -> FeatureMatrix {
    debug_assert_eq!(a.cols(), m);
    debug_assert_eq!(b.len(), p * m);
    let n = a.rows();
    let mut out = vec![0.0; n * p];
    for r in 0..n {
        let arow = a.row(r);
        for q in 0..p {
            let brow = &b[q * m..(q + 1) * m];
            let mut acc = 0.0;
            for (av, bv) in arow.iter().zip(brow) {
                acc += av * bv;
            }
            out[r * p + q] = acc;
        }
    }
    FeatureMatrix::new(n, p, out).expect("shape is consistent by construction")
}

/// aᵀ (k×n viewed from a: n×k) · b (n×m) -> k×m as a raw buffer.
pub(crate) fn matmul_atb(a: &FeatureMatrix, b: &FeatureMatrix) -> Vec<f64> {
    debug_assert_eq!(a.rows(), b.rows());
    let (k, m) = (a.cols(), b.cols());
    let mut out = vec![0.0; k * m];
    for r in 0..a.rows() {
        let arow = a.row(r);
        let brow = b.row(r);
        for (i, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let orow = &mut out[i * m..(i + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// Add a row vector to every row.
pub(crate) fn add_bias(m: &mut FeatureMatrix, bias: &[f64]) {
    debug_assert_eq!(m.cols(), bias.len());
    for r in 0..m.rows() {
        for (v, &b) in m.row_mut(r).iter_mut().zip(bias) {
            *v += b;
        }
    }
}

/// Column sums of a matrix.
pub(crate) fn column_sums(m: &FeatureMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for r in 0..m.rows() {
        for (o, &v) in out.iter_mut().zip(m.row(r)) {
            *o += v;
        }
    }
    out
}

/// dst -= step * grad, elementwise.
pub(crate) fn axpy_neg(dst: &mut [f64], step: f64, grad: &[f64]) {
    debug_assert_eq!(dst.len(), grad.len());
    for (d, &g) in dst.iter_mut().zip(grad) {
        *d -= step * g;
    }
}
