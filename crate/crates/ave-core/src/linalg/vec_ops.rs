//! Small dense vector helpers shared across the crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compensated accumulator (Neumaier summation with exact product
/// residues). Residual evaluations cancel catastrophically near a solution;
/// plain accumulation would floor them at `eps * |A| |x|`, orders of
/// magnitude above the stopping tolerances at large scales.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        CompensatedSum::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    /// Add `a * b` exactly: the product's rounding residue is recovered
    /// with a fused multiply-add and fed into the compensation term.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let residue = a.mul_add(b, -p);
        self.add(p);
        self.compensation += residue;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// `a - b` elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm_inf(&[-3.0, 2.0]), 3.0);
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
    }

    #[test]
    fn compensated_sum_sees_through_cancellation() {
        // 4*(1/3) - 1/3 - 1 = -2^-54 exactly in binary64 arithmetic;
        // plain accumulation rounds it to zero
        let third = 1.0f64 / 3.0;
        let mut acc = CompensatedSum::new();
        acc.add_product(4.0, third);
        acc.add(-third);
        acc.add(-1.0);
        assert_eq!(acc.total(), -(2.0f64.powi(-54)));
    }

    #[test]
    fn compensated_sum_recovers_product_residue() {
        let mut acc = CompensatedSum::new();
        acc.add_product(1e8 + 1.0, 1e8 + 1.0);
        acc.add(-1e16);
        acc.add(-2e8);
        assert_eq!(acc.total(), 1.0);
    }
}
