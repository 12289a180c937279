//! Dense row-major 2D plane of `f64`, the carrier for every per-slice
//! operation in the transforms.

use crate::error::{Error, Result};

/// A 2D array of real values, row-major (`w` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(h: usize, w: usize) -> Self {
        Plane {
            h,
            w,
            data: vec![0.0; h * w],
        }
    }

    pub fn from_vec(h: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != h * w {
            return Err(Error::shape(format!(
                "plane data length {} != {}x{}",
                data.len(),
                h,
                w
            )));
        }
        Ok(Plane { h, w, data })
    }

    pub fn from_fn(h: usize, w: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                data.push(f(y, x));
            }
        }
        Plane { h, w, data }
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f64) {
        self.data[y * self.w + x] = v;
    }

    pub fn same_dims(&self, other: &Plane) -> bool {
        self.h == other.h && self.w == other.w
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            h: self.h,
            w: self.w,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Plane) -> Plane {
        debug_assert!(self.same_dims(other));
        Plane {
            h: self.h,
            w: self.w,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Plane) {
        debug_assert!(self.same_dims(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Plane) -> Plane {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> Plane {
        self.map(|v| v * s)
    }

    /// Circular shift by (`dy`, `dx`); positive shifts move content down/right.
    pub fn circshift(&self, dy: isize, dx: isize) -> Plane {
        let h = self.h as isize;
        let w = self.w as isize;
        Plane::from_fn(self.h, self.w, |y, x| {
            let sy = (y as isize - dy).rem_euclid(h) as usize;
            let sx = (x as isize - dx).rem_euclid(w) as usize;
            self.get(sy, sx)
        })
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        debug_assert!(self.same_dims(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Bilinear 2x upsampling; output pixel `(y, x)` samples input coordinate
    /// `(y/2, x/2)`, clamping at the far edges.
    pub fn upsample2_bilinear(&self) -> Plane {
        let (h, w) = (self.h, self.w);
        Plane::from_fn(2 * h, 2 * w, |y, x| {
            let fy = y as f64 / 2.0;
            let fx = x as f64 / 2.0;
            let y0 = fy.floor() as usize;
            let x0 = fx.floor() as usize;
            let ty = fy - y0 as f64;
            let tx = fx - x0 as f64;
            let y1 = (y0 + 1).min(h - 1);
            let x1 = (x0 + 1).min(w - 1);
            self.get(y0, x0) * (1.0 - ty) * (1.0 - tx)
                + self.get(y0, x1) * (1.0 - ty) * tx
                + self.get(y1, x0) * ty * (1.0 - tx)
                + self.get(y1, x1) * ty * tx
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circshift_round_trip() {
        let p = Plane::from_fn(4, 5, |y, x| (y * 5 + x) as f64);
        let q = p.circshift(1, -2).circshift(-1, 2);
        assert_eq!(p, q);
    }

    #[test]
    fn upsample_doubles_dims_and_interpolates() {
        let p = Plane::from_fn(2, 2, |y, x| (y * 2 + x) as f64);
        let u = p.upsample2_bilinear();
        assert_eq!((u.h, u.w), (4, 4));
        assert_eq!(u.get(0, 0), 0.0);
        assert_eq!(u.get(0, 1), 0.5); // midpoint between 0 and 1
        assert_eq!(u.get(1, 0), 1.0); // midpoint between 0 and 2
    }
}
