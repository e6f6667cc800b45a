//! Small fixed-capacity vectors for states in `R^d`.

use core::fmt;
use core::ops::{Add, AddAssign, Deref, DerefMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Largest supported state dimension.
pub const MAX_DIM: usize = 8;

/// A vector in `R^d` with `d <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds MAX_DIM");
        Vector {
            dim,
            data: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                dim: values.len(),
                reason: "state vectors need 1 <= d <= 8 components",
            });
        }
        let mut v = Vector::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        Ok(v)
    }

    /// The `i`-th canonical basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (*self - *other).norm()
    }

    /// `self += alpha * x`
    #[inline]
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        debug_assert_eq!(self.dim, x.dim);
        for (a, b) in self.iter_mut().zip(x.iter()) {
            *a += alpha * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim,
            });
        }
        Ok(())
    }
}

impl Deref for Vector {
    type Target = [f64];

    #[inline]
    fn deref(&self) -> &[f64] {
        &self.data[..self.dim]
    }
}

impl DerefMut for Vector {
    #[inline]
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.dim]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(mut self, rhs: Vector) -> Vector {
        self += rhs;
        self
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.iter_mut().zip(rhs.iter()) {
            *a += b;
        }
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(mut self, rhs: Vector) -> Vector {
        self -= rhs;
        self
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.iter_mut().zip(rhs.iter()) {
            *a -= b;
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn mul(mut self, rhs: f64) -> Vector {
        for a in self.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    #[inline]
    fn mul(self, rhs: Vector) -> Vector {
        rhs * self
    }
}

impl Neg for Vector {
    type Output = Vector;
    #[inline]
    fn neg(self) -> Vector {
        self * -1.0
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for x in self.iter() {
            seq.serialize_element(x)?;
        }
        seq.end()
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let values = alloc::vec::Vec::<f64>::deserialize(deserializer)?;
        Vector::from_slice(&values).map_err(serde::de::Error::custom)
    }
}
