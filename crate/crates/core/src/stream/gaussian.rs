use std::f64::consts::{PI, SQRT_2};

/// Weighted running mean/variance (West's update) with observed range.
#[derive(Debug, Clone, Default)]
pub(crate) struct GaussianEstimator {
    weight: f64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl GaussianEstimator {
    pub fn add(&mut self, x: f64, w: f64) {
        if w <= 0.0 || !x.is_finite() {
            return;
        }
        if self.weight == 0.0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.weight += w;
        let delta = x - self.mean;
        self.mean += w * delta / self.weight;
        self.m2 += w * delta * (x - self.mean);
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    #[cfg(test)]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn variance(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn log_density(&self, x: f64, var_floor: f64) -> f64 {
        let var = self.variance() + var_floor;
        let d = x - self.mean;
        -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
    }

    /// Weight estimated to lie at or below `x`.
    pub fn weight_below(&self, x: f64) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 {
            self.weight * normal_cdf((x - self.mean) / sd)
        } else if x < self.mean {
            0.0
        } else {
            self.weight
        }
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Complementary error function (Numerical Recipes `erfcc`, |ε| < 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}
