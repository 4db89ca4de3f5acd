//! Closed-form evaluation of the continuous second-order flow
//! `f̈ + ((1+2s)/t) ḟ + K*K f = K* y^δ` in singular coordinates.

mod bessel;
mod bias;
mod model;
mod rates;

pub use bessel::{bessel_j, BesselOrder};
pub use bias::{bias_r, bias_r_dot, filter_g, ode_bias_oracle, ORACLE_EPS};
pub use model::{SpectralModel, StoppingTime};
pub use rates::{
    discrete_rate_experiment, loglog_slope, rate_experiment, RateFit, RatePoint, RateProblem,
    RateRule, SourceConditionFixture,
};
