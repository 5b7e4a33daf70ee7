//! Exact comparisons between integer column sums and real thresholds.
//!
//! Thresholds such as `lambda * n` and `alpha * n` are never rounded through
//! floating point. A finite `f64` is a dyadic rational `m * 2^e`, so its
//! product with an integer can be floored exactly in 128-bit arithmetic.

/// `floor(x * n)` computed exactly. Saturates to the `i128` range, and maps
/// NaN to zero.
pub fn floor_mul(x: f64, n: u64) -> i128 {
    if x == 0.0 || n == 0 || x.is_nan() {
        return 0;
    }
    if x.is_infinite() {
        return if x > 0.0 { i128::MAX } else { i128::MIN };
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    let (mantissa, exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | 0x0010_0000_0000_0000, biased - 1075)
    };
    // |mantissa * n| < 2^117
    let mut product = mantissa as i128 * n as i128;
    if negative {
        product = -product;
    }
    if exp >= 0 {
        let headroom = product.unsigned_abs().leading_zeros() as i32 - 1;
        if exp > headroom {
            return if negative { i128::MIN } else { i128::MAX };
        }
        product << exp
    } else {
        let shift = -exp;
        if shift >= 127 {
            if negative {
                -1
            } else {
                0
            }
        } else {
            // arithmetic shift rounds toward negative infinity
            product >> shift
        }
    }
}

/// `ceil(x * n)` computed exactly.
pub fn ceil_mul(x: f64, n: u64) -> i128 {
    floor_mul(-x, n).saturating_neg()
}

/// `s > x * n`, exactly.
pub fn int_gt_scaled(s: i64, x: f64, n: u64) -> bool {
    s as i128 > floor_mul(x, n)
}

/// `s >= x * n`, exactly.
pub fn int_ge_scaled(s: i64, x: f64, n: u64) -> bool {
    s as i128 >= ceil_mul(x, n)
}
