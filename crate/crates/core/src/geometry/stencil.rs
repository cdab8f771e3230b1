//! Fourth-order finite differences with respect to the node index.
//!
//! Closed curves use periodic central stencils. Open curves switch to one-sided
//! fourth-order stencils on the two nodes nearest each end; arcs with fewer than
//! six nodes fall back to second-order differences.

use std::ops::{Add, Mul, Sub};

pub(crate) trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Sample for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

#[inline]
fn combo<T: Sample>(terms: &[(f64, T)]) -> T {
    let mut acc = terms[0].1 * terms[0].0;
    for &(c, v) in &terms[1..] {
        acc = acc + v * c;
    }
    acc
}

/// First and second derivatives per node, unit parameter spacing.
pub(crate) fn derivatives<T: Sample>(f: &[T], periodic: bool) -> (Vec<T>, Vec<T>) {
    let n = f.len();
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    if periodic {
        let at = |i: isize| f[i.rem_euclid(n as isize) as usize];
        for i in 0..n as isize {
            let (m2, m1, c, p1, p2) = (at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
            d1.push(combo(&[(-1.0, p2), (8.0, p1), (-8.0, m1), (1.0, m2)]) * (1.0 / 12.0));
            d2.push(
                combo(&[(-1.0, p2), (16.0, p1), (-30.0, c), (16.0, m1), (-1.0, m2)]) * (1.0 / 12.0),
            );
        }
        return (d1, d2);
    }

    if n < 6 {
        return low_order_open(f);
    }
    for i in 0..n {
        let (a, b) = if i == 0 {
            (
                combo(&[(-25.0, f[0]), (48.0, f[1]), (-36.0, f[2]), (16.0, f[3]), (-3.0, f[4])]),
                combo(&[
                    (45.0, f[0]),
                    (-154.0, f[1]),
                    (214.0, f[2]),
                    (-156.0, f[3]),
                    (61.0, f[4]),
                    (-10.0, f[5]),
                ]),
            )
        } else if i == 1 {
            (
                combo(&[(-3.0, f[0]), (-10.0, f[1]), (18.0, f[2]), (-6.0, f[3]), (1.0, f[4])]),
                combo(&[
                    (10.0, f[0]),
                    (-15.0, f[1]),
                    (-4.0, f[2]),
                    (14.0, f[3]),
                    (-6.0, f[4]),
                    (1.0, f[5]),
                ]),
            )
        } else if i == n - 2 {
            (
                combo(&[
                    (3.0, f[n - 1]),
                    (10.0, f[n - 2]),
                    (-18.0, f[n - 3]),
                    (6.0, f[n - 4]),
                    (-1.0, f[n - 5]),
                ]),
                combo(&[
                    (10.0, f[n - 1]),
                    (-15.0, f[n - 2]),
                    (-4.0, f[n - 3]),
                    (14.0, f[n - 4]),
                    (-6.0, f[n - 5]),
                    (1.0, f[n - 6]),
                ]),
            )
        } else if i == n - 1 {
            (
                combo(&[
                    (25.0, f[n - 1]),
                    (-48.0, f[n - 2]),
                    (36.0, f[n - 3]),
                    (-16.0, f[n - 4]),
                    (3.0, f[n - 5]),
                ]),
                combo(&[
                    (45.0, f[n - 1]),
                    (-154.0, f[n - 2]),
                    (214.0, f[n - 3]),
                    (-156.0, f[n - 4]),
                    (61.0, f[n - 5]),
                    (-10.0, f[n - 6]),
                ]),
            )
        } else {
            (
                combo(&[(-1.0, f[i + 2]), (8.0, f[i + 1]), (-8.0, f[i - 1]), (1.0, f[i - 2])]),
                combo(&[
                    (-1.0, f[i + 2]),
                    (16.0, f[i + 1]),
                    (-30.0, f[i]),
                    (16.0, f[i - 1]),
                    (-1.0, f[i - 2]),
                ]),
            )
        };
        d1.push(a * (1.0 / 12.0));
        d2.push(b * (1.0 / 12.0));
    }
    (d1, d2)
}

fn low_order_open<T: Sample>(f: &[T]) -> (Vec<T>, Vec<T>) {
    let n = f.len();
    let zero = f[0] * 0.0;
    if n < 2 {
        return (vec![zero; n], vec![zero; n]);
    }
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        let slope = if i == 0 {
            f[1] - f[0]
        } else if i == n - 1 {
            f[n - 1] - f[n - 2]
        } else {
            (f[i + 1] - f[i - 1]) * 0.5
        };
        let curv = if n < 3 {
            zero
        } else {
            let j = i.clamp(1, n - 2);
            f[j + 1] - f[j] * 2.0 + f[j - 1]
        };
        d1.push(slope);
        d2.push(curv);
    }
    (d1, d2)
}
