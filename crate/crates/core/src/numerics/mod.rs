//! Numerical building blocks: adaptive quadrature, Student t and normal
//! distribution functions, and multivariate t probabilities.

pub mod mvt;
pub mod quadrature;
pub mod special;

/// `floor(x)` for nonnegative block-size arithmetic, as an integer.
///
/// All block-size scalings of the form `m * a` go through this helper.
pub fn floor_block(x: f64) -> usize {
    debug_assert!(x >= 0.0);
    // guard against 3.0000000000000004-style representation error
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}
