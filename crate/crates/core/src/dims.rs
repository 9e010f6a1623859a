use crate::error::{Error, Result};

/// Dimension pair `(d1, d2)` and its derived quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub d1: usize,
    pub d2: usize,
}

impl Dims {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::Dims(format!("d1 = {d1}, d2 = {d2}; both must be positive")));
        }
        Ok(Dims { d1, d2 })
    }

    /// Topological dimension.
    pub fn d(&self) -> usize {
        self.d1 + self.d2
    }

    /// Homogeneous dimension.
    pub fn q(&self) -> usize {
        self.d1 + 2 * self.d2
    }

    /// `max{d, 2 d2}`.
    pub fn big_d(&self) -> usize {
        self.d().max(2 * self.d2)
    }

    /// `min{D, d + 1}`.
    pub fn frak_d(&self) -> usize {
        self.big_d().min(self.d() + 1)
    }
}

impl Default for Dims {
    fn default() -> Self {
        Dims { d1: 1, d2: 1 }
    }
}
