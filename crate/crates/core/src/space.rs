//! Minimal inner-product-space vocabulary shared by points and matrices.

/// A finite-dimensional real Hilbert space element.
pub trait Euclidean: Clone {
    fn inner(&self, other: &Self) -> f64;

    /// `self += alpha * x`
    fn axpy(&mut self, alpha: f64, x: &Self);

    fn scale(&mut self, alpha: f64);

    fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    fn dist(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.norm()
    }

    fn sub(&self, other: &Self) -> Self {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d
    }

    fn add(&self, other: &Self) -> Self {
        let mut d = self.clone();
        d.axpy(1.0, other);
        d
    }

    fn scaled(&self, alpha: f64) -> Self {
        let mut d = self.clone();
        d.scale(alpha);
        d
    }
}

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(tok: &str) -> crate::Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| crate::Error::Parse(format!("not a real number: {tok:?}")))
}
