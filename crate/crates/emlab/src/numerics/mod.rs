//! Internal numerical kernels: quadrature and monotone interpolation.

pub(crate) mod interp;
pub(crate) mod quad;
