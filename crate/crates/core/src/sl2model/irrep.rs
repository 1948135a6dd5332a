use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Series {
    Principal,
    Complementary,
    Discrete,
    Mock,
}

impl std::str::FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "principal" => Ok(Series::Principal),
            "complementary" => Ok(Series::Complementary),
            "discrete" => Ok(Series::Discrete),
            "mock" | "mock-discrete" => Ok(Series::Mock),
            other => Err(Error::Configuration(format!("unknown series `{other}`"))),
        }
    }
}

/// One irreducible unitary representation of SL(2,R) in its Fourier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrepParams {
    pub series: Series,
    /// Casimir eigenvalue.
    pub mu: f64,
    pub varpi: Complex64,
    pub nu0: f64,
    /// Discrete-series index `n`; zero for the other series.
    pub n: u32,
}

impl IrrepParams {
    pub fn principal(mu: f64) -> Result<Self> {
        if !(mu > 1.0 && mu.is_finite()) {
            return domain(format!("principal series needs mu > 1, got {mu}"));
        }
        Ok(Self {
            series: Series::Principal,
            mu,
            varpi: Complex64::new(0.0, (mu - 1.0).sqrt()),
            nu0: 0.0,
            n: 0,
        })
    }

    pub fn complementary(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return domain(format!("complementary series needs 0 < mu < 1, got {mu}"));
        }
        let v = (1.0 - mu).sqrt();
        Ok(Self {
            series: Series::Complementary,
            mu,
            varpi: Complex64::new(v, 0.0),
            nu0: v,
            n: 0,
        })
    }

    /// Complementary series with ϖ ∈ (0,1) given directly.
    pub fn complementary_varpi(varpi: f64) -> Result<Self> {
        if !(varpi > 0.0 && varpi < 1.0) {
            return domain(format!("complementary parameter must lie in (0,1), got {varpi}"));
        }
        Self::complementary(1.0 - varpi * varpi)
    }

    pub fn mock() -> Self {
        Self {
            series: Series::Mock,
            mu: 1.0,
            varpi: Complex64::new(0.0, 0.0),
            nu0: 0.0,
            n: 0,
        }
    }

    pub fn discrete(n: u32) -> Result<Self> {
        if n < 2 {
            return domain("discrete series numerics need n >= 2");
        }
        let nf = n as f64;
        Ok(Self {
            series: Series::Discrete,
            mu: -nf * nf + 2.0 * nf,
            varpi: Complex64::new(nf - 1.0, 0.0),
            nu0: 1.0 - nf,
            n,
        })
    }

    /// Builds from a series tag and its parameter (μ, or `n` for the discrete series).
    pub fn make(series: Series, param: f64) -> Result<Self> {
        match series {
            Series::Principal => Self::principal(param),
            Series::Complementary => Self::complementary(param),
            Series::Mock => {
                if param != 1.0 {
                    return domain("mock-discrete series sits at mu = 1");
                }
                Ok(Self::mock())
            }
            Series::Discrete => {
                if param.fract() != 0.0 || param < 2.0 || param > u32::MAX as f64 {
                    return domain(format!("discrete index must be an integer >= 2, got {param}"));
                }
                Self::discrete(param as u32)
            }
        }
    }

    /// Re ϖ, the exponent of the model weight |λ|^{-Re ϖ}.
    pub fn rho(&self) -> f64 {
        self.varpi.re
    }

    pub fn half_line(&self) -> bool {
        matches!(self.series, Series::Discrete | Series::Mock)
    }

    /// Optimal decay rate: (1-ν₀)/2, equal to n/2 on the discrete series.
    pub fn optimal_rate(&self) -> f64 {
        (1.0 - self.nu0) / 2.0
    }
}
