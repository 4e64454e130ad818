use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

macro_rules! components {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(components: Vec<f64>) -> Self {
                $name(components)
            }

            pub fn zeros(dim: usize) -> Self {
                $name(vec![0.0; dim])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.is_finite())
            }

            pub fn scaled(&self, s: f64) -> Self {
                $name(self.0.iter().map(|c| s * c).collect())
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }
    };
}

components!(Vector, "Tangent vector components in chart coordinate order.");
components!(Covector, "Covector components in chart coordinate order.");

impl Covector {
    /// The pairing `alpha(v)`.
    pub fn apply(&self, v: &Vector) -> f64 {
        crate::linalg::dot(self, v)
    }
}
