//! Small dense symmetric eigenvalue solver (cyclic Jacobi).

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::mode::MAX_DIM;

/// Eigenvalues of the leading `dim × dim` block, ascending.
pub(crate) fn symmetric_eigenvalues(m: &[[f64; MAX_DIM]; MAX_DIM], dim: usize) -> [f64; MAX_DIM] {
    let mut a = *m;
    for _ in 0..64 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [0.0; MAX_DIM];
    for i in 0..dim {
        ev[i] = a[i][i];
    }
    ev[..dim].sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}
