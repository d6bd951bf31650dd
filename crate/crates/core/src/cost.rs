//! Operation counting for the detector kernels.
//!
//! The kernels are generic over [`Tally`]; the `()` implementation compiles to
//! nothing, [`OpCount`] records floating-point multiplications.

/// Sink for operation counts.
pub trait Tally {
    fn muls(&mut self, n: u64);
}

impl Tally for () {
    #[inline(always)]
    fn muls(&mut self, _n: u64) {}
}

/// Multiplication counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub multiplications: u64,
}

impl Tally for OpCount {
    #[inline]
    fn muls(&mut self, n: u64) {
        self.multiplications += n;
    }
}
