//! Scalar helpers over `libm` plus the log-space tilt shared by the optimal
//! policy and the learner.

use crate::table::Table;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// In-place softmax with max subtraction. `logits` must be non-empty.
pub fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in logits.iter_mut() {
        *v = exp(*v - max);
        total += *v;
    }
    for v in logits.iter_mut() {
        *v /= total;
    }
}

/// Row-wise `softmax(ln pi_ref(.|s) + eta * score(s, .))`.
pub fn tilt(reference: &Table<f64>, score: &Table<f64>, eta: f64) -> Table<f64> {
    debug_assert_eq!(reference.shape(), score.shape());
    let mut out = Table::filled(reference.rows(), reference.cols(), 0.0);
    for s in 0..reference.rows() {
        let row = out.row_mut(s);
        for (a, v) in row.iter_mut().enumerate() {
            *v = ln(reference.get(s, a)) + eta * score.get(s, a);
        }
        softmax_in_place(row);
    }
    out
}

/// `KL(p || q)` with `0 log 0 = 0`. Returns `+inf` when `p` has mass where `q` does not.
///
/// Summed as `sum q * phi(p/q - 1)` with `phi(t) = (1+t) ln(1+t) - t >= 0`,
/// which equals the usual form for normalized rows but keeps full relative
/// accuracy when `p` and `q` are nearly equal.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if qi == 0.0 {
                if pi == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else if pi == 0.0 {
                qi
            } else {
                let t = (pi - qi) / qi;
                (qi * ((1.0 + t) * libm::log1p(t) - t)).max(0.0)
            }
        })
        .sum()
}

/// Total-variation distance between two probability rows.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
