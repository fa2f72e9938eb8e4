//! Float helpers that work with and without `std`.

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `10^(db/10)`.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    powf(10.0, db / 10.0)
}
