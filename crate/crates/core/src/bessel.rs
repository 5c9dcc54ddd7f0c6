//! Integer-order Bessel functions of the first kind, by Miller's backward
//! recurrence normalized with `J_0 + 2 sum_k J_2k = 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const MAX_ORDER: i64 = 60;
pub const MAX_ARGUMENT: f64 = 50.0;

const RESCALE_ABOVE: f64 = 1e250;

/// `J_n(x)` for `|n| <= 60`, `|x| <= 50`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    check(n, x)?;
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_orders(x, order)?[order];
    Ok(if n < 0 && order % 2 == 1 { -value } else { value })
}

/// `[J_0(x), ..., J_max_order(x)]` within the supported range.
pub fn bessel_j_orders(x: f64, max_order: usize) -> Result<Vec<f64>> {
    check(max_order as i64, x)?;
    let mut values = vec![0.0; max_order + 1];
    if x == 0.0 {
        values[0] = 1.0;
        return Ok(values);
    }
    let ax = libm::fabs(x);
    let top = max_order.max(libm::ceil(ax) as usize);
    let mut start = top + 20 + libm::sqrt(40.0 * top as f64) as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k, k = start
    let mut norm = 2.0 * current;
    for k in (1..=start).rev() {
        let previous = (2.0 * k as f64 / ax) * current - next;
        next = current;
        current = previous;
        let order = k - 1;
        if order <= max_order {
            values[order] = current;
        }
        if order == 0 {
            norm += current;
        } else if order % 2 == 0 {
            norm += 2.0 * current;
        }
        if libm::fabs(current) > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            next *= s;
            norm *= s;
            for v in values.iter_mut() {
                *v *= s;
            }
        }
    }
    let scale = 1.0 / norm;
    for (order, v) in values.iter_mut().enumerate() {
        *v *= scale;
        if x < 0.0 && order % 2 == 1 {
            *v = -*v;
        }
    }
    Ok(values)
}

fn check(n: i64, x: f64) -> Result<()> {
    if n.abs() > MAX_ORDER || !(libm::fabs(x) <= MAX_ARGUMENT) {
        return Err(Error::BesselOutOfRange { order: n, x });
    }
    Ok(())
}
