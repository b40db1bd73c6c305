//! Poissonian resetting: mean and Laplace transform of the service time, and
//! the no-reset transform used as the baseline.

use super::{Combiner, ResetPolicy, ServiceModel};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::numerics::jet::{jet_combine, Jet, JetExpr};

/// Highest Taylor order served by the transform jets.
pub const MAX_LT_ORDER: usize = 1024;

fn check_rate(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("resetting rate must be finite and > 0, got {r}")))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_LT_ORDER {
        return Err(Error::InvalidParameter(format!("jet order {order} exceeds {MAX_LT_ORDER}")));
    }
    Ok(())
}

fn finite(x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

/// Jet in `z` of the affine argument `s0 + slope * z`.
fn argument(s0: f64, slope: f64, order: usize) -> Jet {
    let mut c = vec![0.0; order + 1];
    c[0] = s0;
    if order >= 1 {
        c[1] = slope;
    }
    Jet::from_coeffs(0.0, c)
}

impl ServiceModel {
    /// Multiplicative resetting with a deterministic slowdown `v` grows like
    /// `exp(r v X)`, so the job size needs that exponential moment.
    fn check_poisson_regularity(&self, r: f64) -> Result<()> {
        match (self.combiner, self.slowdown) {
            (Combiner::Additive, _) => self.jobsize.laplace_m1(-r).map(|_| ()),
            (Combiner::Multiplicative, DistributionSpec::Deterministic { value }) => {
                self.jobsize.laplace_m1(-r * value).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Mean service time under Poissonian resetting at rate `r`.
    ///
    /// Multiplicative: `E_X[(1 - S~(rX)) / (r S~(rX))]`.
    /// Additive: `(X~(-r) - S~(r)) / (r S~(r))`, which needs `E[exp(rX)] < inf`.
    pub fn mean_poisson(&self, r: f64) -> Result<f64> {
        self.validate()?;
        check_rate(r)?;
        self.check_poisson_regularity(r)?;
        let s = &self.slowdown;
        match self.combiner {
            Combiner::Multiplicative => {
                let g = |x: f64, out: &mut [f64]| -> Result<()> {
                    let w = r * x;
                    let lt = s.laplace_value(w)?;
                    if lt <= 0.0 {
                        return Err(Error::NonFinite { at: x });
                    }
                    out[0] = finite(x, -s.laplace_m1(w)? / (r * lt))?;
                    Ok(())
                };
                Ok(self.expect_over_x(1, &g)?[0])
            }
            Combiner::Additive => {
                let xm1 = self.jobsize.laplace_m1(-r)?;
                let sm1 = s.laplace_m1(r)?;
                let lt = s.laplace_value(r)?;
                finite(r, (xm1 - sm1) / (r * lt))
            }
        }
    }

    /// Jet in `s` of the service-time Laplace transform under Poissonian
    /// resetting at rate `r`, anchored at `s`.
    pub fn lt_poisson(&self, s: f64, r: f64, order: usize) -> Result<Jet> {
        let j = self.lt_poisson_along(s, 1.0, r, order)?;
        Ok(Jet::from_coeffs(s, j.into_coeffs()))
    }

    /// Jet in `z` of the transform evaluated at `s0 + slope * z`.
    pub fn lt_poisson_along(&self, s0: f64, slope: f64, r: f64, order: usize) -> Result<Jet> {
        self.validate()?;
        check_rate(r)?;
        check_order(order)?;
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("transform argument must be >= 0, got {s0}")));
        }
        if s0 == 0.0 && order >= 1 {
            // derivatives at the origin are moments; the k-th grows like
            // exp(k r X) when the job size sets the success probability
            self.check_poisson_regularity(r * order as f64)?;
        }
        let sd = self.slowdown;
        let combiner = self.combiner;
        let g = move |x: f64, out: &mut [f64]| -> Result<()> {
            let var = JetExpr::leaf(argument(s0, slope, order));
            let shifted = JetExpr::leaf(argument(s0 + r, slope, order));
            let rate = JetExpr::constant(r);
            // per-attempt completion transform at s + r
            let attempt = match combiner {
                Combiner::Multiplicative => JetExpr::leaf(sd.laplace_along((s0 + r) * x, slope * x, order)?),
                Combiner::Additive => {
                    let sj = sd.laplace_along(s0 + r, slope, order)?;
                    let ej = argument(s0 + r, slope, order).scale(-x).exp();
                    JetExpr::leaf(&ej * &sj)
                }
            };
            let num = std::rc::Rc::new(JetExpr::Mul(shifted, attempt.clone()));
            let den = std::rc::Rc::new(JetExpr::Add(var, std::rc::Rc::new(JetExpr::Mul(rate, attempt))));
            let j = jet_combine(&JetExpr::Div(num, den))?;
            for (o, c) in out.iter_mut().zip(j.coeffs()) {
                *o = finite(x, *c)?;
            }
            Ok(())
        };
        Ok(Jet::from_coeffs(0.0, self.expect_over_x(order + 1, &g)?))
    }

    /// Jet in `z` of the no-reset transform at `s0 + slope * z`:
    /// `E_X[S~(sX)]` or `X~(s) S~(s)`.
    pub fn lt_no_reset_along(&self, s0: f64, slope: f64, order: usize) -> Result<Jet> {
        self.validate()?;
        check_order(order)?;
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("transform argument must be >= 0, got {s0}")));
        }
        match self.combiner {
            Combiner::Additive => {
                let xj = self.jobsize.laplace_along(s0, slope, order)?;
                let sj = self.slowdown.laplace_along(s0, slope, order)?;
                Ok(&xj * &sj)
            }
            Combiner::Multiplicative => {
                if let DistributionSpec::Deterministic { value } = self.slowdown {
                    // V = vX exactly
                    return self.jobsize.laplace_along(s0 * value, slope * value, order);
                }
                let sd = self.slowdown;
                let g = move |x: f64, out: &mut [f64]| -> Result<()> {
                    let j = sd.laplace_along(s0 * x, slope * x, order)?;
                    out.copy_from_slice(j.coeffs());
                    Ok(())
                };
                Ok(Jet::from_coeffs(0.0, self.expect_over_x(order + 1, &g)?))
            }
        }
    }

    /// Service-time transform jet along `s0 + slope * z` for the policies
    /// with a usable closed form.
    pub fn service_lt_along(&self, policy: &ResetPolicy, s0: f64, slope: f64, order: usize) -> Result<Jet> {
        match *policy {
            ResetPolicy::None => self.lt_no_reset_along(s0, slope, order),
            ResetPolicy::Poisson { rate } => self.lt_poisson_along(s0, slope, rate, order),
            ResetPolicy::Sharp { .. } | ResetPolicy::Renewal { .. } => Err(Error::Unsupported(
                "service-time transform is available for no resetting and Poissonian resetting only".into(),
            )),
        }
    }
}
