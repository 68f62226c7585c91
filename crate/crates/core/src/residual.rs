//! Residual measures shared by the identity checks.

use num_complex::Complex64;

/// `|lhs/rhs − 1|` when `rhs ≠ 0`, otherwise `|lhs − rhs|`.
pub fn relative(lhs: Complex64, rhs: Complex64) -> f64 {
    if rhs.norm() > 0.0 {
        (lhs / rhs - 1.0).norm()
    } else {
        (lhs - rhs).norm()
    }
}

/// `|lhs − rhs| / max(|lhs|, |rhs|, scale)`.
///
/// Both sides of the summation identities are differences of products that can
/// nearly cancel; `scale` is the largest individual term entering either side.
pub fn scaled(lhs: Complex64, rhs: Complex64, scale: f64) -> f64 {
    let denom = lhs.norm().max(rhs.norm()).max(scale);
    if denom > 0.0 {
        (lhs - rhs).norm() / denom
    } else {
        0.0
    }
}
