//! McCormick under- and over-estimators of a product `w * z` on a rectangle.

use serde::{Deserialize, Serialize};

use crate::interval::Interval;

/// Which anchored inequalities bound each monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McCormickVariant {
    /// Lower form anchored at `(w^L, z^L)`, upper form at `(w^U, z^L)`.
    #[default]
    Lower,
    /// Chooses, per monomial, between the two valid anchors on each side the
    /// one whose `z` coefficient has the smaller magnitude.
    Envelope,
}

/// The affine function `z_coef * z + w_coef * w + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearForm {
    pub z_coef: f64,
    pub w_coef: f64,
    pub constant: f64,
}

impl BilinearForm {
    /// `w_anchor * z + w * z_anchor - w_anchor * z_anchor`.
    fn anchored(w_anchor: f64, z_anchor: f64) -> Self {
        Self {
            z_coef: w_anchor,
            w_coef: z_anchor,
            constant: -w_anchor * z_anchor,
        }
    }

    pub fn eval(&self, w: f64, z: f64) -> f64 {
        self.z_coef * z + self.w_coef * w + self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCormickForms {
    pub lower: BilinearForm,
    pub upper: BilinearForm,
}

/// Affine forms with `lower(w, z) <= w * z <= upper(w, z)` on `w x z`.
pub fn mccormick_bounds(w: Interval, z: Interval, variant: McCormickVariant) -> McCormickForms {
    match variant {
        McCormickVariant::Lower => McCormickForms {
            lower: BilinearForm::anchored(w.lo(), z.lo()),
            upper: BilinearForm::anchored(w.hi(), z.lo()),
        },
        McCormickVariant::Envelope => {
            let lower = if w.lo().abs() <= w.hi().abs() {
                BilinearForm::anchored(w.lo(), z.lo())
            } else {
                BilinearForm::anchored(w.hi(), z.hi())
            };
            let upper = if w.hi().abs() <= w.lo().abs() {
                BilinearForm::anchored(w.hi(), z.lo())
            } else {
                BilinearForm::anchored(w.lo(), z.hi())
            };
            McCormickForms { lower, upper }
        }
    }
}
