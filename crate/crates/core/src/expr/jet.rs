use super::eval::Scalar;

/// Value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn variable(index: usize, dim: usize, value: f64) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Jet1 { value, grad }
    }
}

impl Scalar for Jet1 {
    const DIFFERENTIATED: bool = true;

    fn constant(c: f64, dim: usize) -> Self {
        Jet1 {
            value: c,
            grad: vec![0.0; dim],
        }
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn add(&self, rhs: &Self) -> Self {
        Jet1 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Jet1 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        Jet1 {
            value: self.value * rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a * rhs.value + self.value * b)
                .collect(),
        }
    }

    fn chain(&self, d0: f64, d1: f64, _d2: f64) -> Self {
        Jet1 {
            value: d0,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
        }
    }
}

/// Second-order jet: value, gradient and Hessian (row-major, symmetric).
///
/// Propagation is forward mode truncated at second order, which is the
/// multi-direction form of nested dual numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn variable(index: usize, dim: usize, value: f64) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Jet2 {
            value,
            grad,
            hess: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hessian(&self, a: usize, b: usize) -> f64 {
        self.hess[a * self.dim() + b]
    }
}

impl Scalar for Jet2 {
    const DIFFERENTIATED: bool = true;

    fn constant(c: f64, dim: usize) -> Self {
        Jet2 {
            value: c,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn add(&self, rhs: &Self) -> Self {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let n = self.dim();
        let (u, v) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| a * v + u * b)
            .collect();
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess.push(
                    u * rhs.hess[k]
                        + v * self.hess[k]
                        + self.grad[i] * rhs.grad[j]
                        + rhs.grad[i] * self.grad[j],
                );
            }
        }
        Jet2 {
            value: u * v,
            grad,
            hess,
        }
    }

    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self {
        let n = self.dim();
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                hess.push(d1 * self.hess[i * n + j] + d2 * self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: d0,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
            hess,
        }
    }
}
