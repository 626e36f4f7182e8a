use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Central finite-difference stencil for the second derivative.
///
/// `weights[o]` multiplies `f(x ± o·h) / h²`. Points beyond the grid are
/// dropped, which imposes hard walls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    order: usize,
    weights: Vec<f64>,
}

impl Stencil {
    pub fn new(order: usize) -> Result<Self> {
        let weights = match order {
            2 => vec![-2.0, 1.0],
            4 => vec![-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            6 => vec![-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
            8 => vec![-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
            _ => return Err(invalid("fd_order", format!("supported orders are 2, 4, 6, 8; got {order}"))),
        };
        Ok(Self { order, weights })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_width(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Symbol of the stencil, i.e. the eigenvalue on `exp(ikx)` times h².
    pub fn symbol(&self, kh: f64) -> f64 {
        self.weights[0]
            + self.weights[1..]
                .iter()
                .enumerate()
                .map(|(o, w)| 2.0 * w * ((o + 1) as f64 * kh).cos())
                .sum::<f64>()
    }

    /// Adds `scale · ∂²x` along axis `axis` of a row-major array with
    /// shape `dims` into `y`.
    pub fn add_second_derivative(
        &self,
        x: &[f64],
        y: &mut [f64],
        dims: &[usize],
        axis: usize,
        spacing: f64,
        scale: f64,
    ) {
        let n = dims[axis];
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let c: Vec<f64> = self.weights.iter().map(|w| scale * w / (spacing * spacing)).collect();
        let h = self.half_width();
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..n {
                let row = base + i * inner;
                for (a, b) in y[row..row + inner].iter_mut().zip(&x[row..row + inner]) {
                    *a += c[0] * b;
                }
                for off in 1..=h.min(n - 1) {
                    let w = c[off];
                    if i >= off {
                        let src = row - off * inner;
                        for (a, b) in y[row..row + inner].iter_mut().zip(&x[src..src + inner]) {
                            *a += w * b;
                        }
                    }
                    if i + off < n {
                        let src = row + off * inner;
                        for (a, b) in y[row..row + inner].iter_mut().zip(&x[src..src + inner]) {
                            *a += w * b;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_order_rejected() {
        assert!(Stencil::new(3).is_err());
    }

    #[test]
    fn weights_sum_to_zero() {
        for order in [2, 4, 6, 8] {
            let s = Stencil::new(order).unwrap();
            assert!(s.symbol(0.0).abs() < 1e-13);
        }
    }

    #[test]
    fn plane_wave_symbol_within_truncation_error() {
        // ξ axis of the dimer grid: h = 0.2.
        let h = 0.2;
        for order in [2usize, 4, 6, 8] {
            let s = Stencil::new(order).unwrap();
            for k in [0.5, 1.0, 2.0] {
                let approx = s.symbol(k * h) / (h * h);
                let err = (approx + k * k).abs();
                let bound = 2.0 * k * k * (k * h).powi(order as i32);
                assert!(err <= bound, "order {order} k {k}: err {err} > {bound}");
            }
        }
    }

    #[test]
    fn second_derivative_of_quadratic_in_interior() {
        let s = Stencil::new(4).unwrap();
        let dims = [3, 9];
        let h = 0.1;
        let x: Vec<f64> = (0..27).map(|i| ((i % 9) as f64 * h).powi(2)).collect();
        let mut y = vec![0.0; 27];
        s.add_second_derivative(&x, &mut y, &dims, 1, h, 1.0);
        for r in 0..3 {
            for i in 2..7 {
                assert!((y[r * 9 + i] - 2.0).abs() < 1e-10);
            }
        }
    }
}
