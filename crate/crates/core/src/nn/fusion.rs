//! Merge layers joining the audio and visual feature vectors.

use serde::{Deserialize, Serialize};

use super::layers::axpy;
use super::{NnError, Result, Scalar};

pub const DEFAULT_MFB_FACTOR: usize = 5;
pub const DEFAULT_MFB_OUTPUT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Merge {
    /// Single subnet feeding the head directly.
    #[default]
    None,
    Concat,
    /// Factorized bilinear pooling with factor `k` and `out` output units.
    Mfb { k: usize, out: usize },
}

impl Merge {
    pub fn mfb() -> Self {
        Merge::Mfb {
            k: DEFAULT_MFB_FACTOR,
            out: DEFAULT_MFB_OUTPUT,
        }
    }
}

/// `[x, y]`.
pub fn concat_fuse<T: Copy>(x: &[T], y: &[T]) -> Vec<T> {
    let mut z = Vec::with_capacity(x.len() + y.len());
    z.extend_from_slice(x);
    z.extend_from_slice(y);
    z
}

/// Low-rank bilinear factors. `u` is `n × (k·out)` and `v` is `n2 × (k·out)`,
/// both row-major; columns `i·k .. (i+1)·k` belong to output unit `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfbParams<T> {
    pub n: usize,
    pub n2: usize,
    pub k: usize,
    pub out: usize,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> MfbParams<T> {
    pub fn new(n: usize, n2: usize, k: usize, out: usize, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if k == 0 || out == 0 {
            return Err(NnError::InvalidConfig("MFB factor and output must be positive".into()));
        }
        if u.len() != n * k * out || v.len() != n2 * k * out {
            return Err(NnError::ShapeMismatch {
                expected: n * k * out,
                found: u.len(),
            });
        }
        Ok(MfbParams { n, n2, k, out, u, v })
    }

    /// Dense bilinear matrix `W_i = U_i V_i^T` for output unit `i` (`n × n2`).
    pub fn dense_matrix(&self, i: usize) -> Vec<T> {
        let kk = self.k * self.out;
        let mut w = vec![T::zero(); self.n * self.n2];
        for a in 0..self.n {
            for b in 0..self.n2 {
                let mut s = T::zero();
                for j in i * self.k..(i + 1) * self.k {
                    s += self.u[a * kk + j] * self.v[b * kk + j];
                }
                w[a * self.n2 + b] = s;
            }
        }
        w
    }
}

/// Projections `U^T x` and `V^T y`, each of length `k·out`.
pub(crate) fn mfb_project<T: Scalar>(u: &[T], v: &[T], x: &[T], y: &[T], kk: usize) -> (Vec<T>, Vec<T>) {
    let mut a = vec![T::zero(); kk];
    let mut b = vec![T::zero(); kk];
    for (r, &xr) in x.iter().enumerate() {
        axpy(xr, &u[r * kk..(r + 1) * kk], &mut a);
    }
    for (r, &yr) in y.iter().enumerate() {
        axpy(yr, &v[r * kk..(r + 1) * kk], &mut b);
    }
    (a, b)
}

pub(crate) fn mfb_pool<T: Scalar>(a: &[T], b: &[T], k: usize, out: usize) -> Vec<T> {
    (0..out)
        .map(|i| (i * k..(i + 1) * k).map(|j| a[j] * b[j]).sum())
        .collect()
}

/// `z_i = 1^T (U_i^T x ∘ V_i^T y)`.
pub fn mfb_fuse<T: Scalar>(x: &[T], y: &[T], p: &MfbParams<T>) -> Result<Vec<T>> {
    if x.len() != p.n {
        return Err(NnError::ShapeMismatch { expected: p.n, found: x.len() });
    }
    if y.len() != p.n2 {
        return Err(NnError::ShapeMismatch { expected: p.n2, found: y.len() });
    }
    let (a, b) = mfb_project(&p.u, &p.v, x, y, p.k * p.out);
    Ok(mfb_pool(&a, &b, p.k, p.out))
}

/// Backward pass of MFB given upstream `dz`. Accumulates into `du`, `dv`
/// and writes `dx`, `dy`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn mfb_backward<T: Scalar>(
    u: &[T],
    v: &[T],
    x: &[T],
    y: &[T],
    k: usize,
    out: usize,
    dz: &[T],
    du: &mut [T],
    dv: &mut [T],
    dx: &mut [T],
    dy: &mut [T],
) {
    let kk = k * out;
    let (a, b) = mfb_project(u, v, x, y, kk);
    let mut da = vec![T::zero(); kk];
    let mut db = vec![T::zero(); kk];
    for i in 0..out {
        for j in i * k..(i + 1) * k {
            da[j] = dz[i] * b[j];
            db[j] = dz[i] * a[j];
        }
    }
    for (r, &xr) in x.iter().enumerate() {
        axpy(xr, &da, &mut du[r * kk..(r + 1) * kk]);
        dx[r] = super::layers::dot(&u[r * kk..(r + 1) * kk], &da);
    }
    for (r, &yr) in y.iter().enumerate() {
        axpy(yr, &db, &mut dv[r * kk..(r + 1) * kk]);
        dy[r] = super::layers::dot(&v[r * kk..(r + 1) * kk], &db);
    }
}
