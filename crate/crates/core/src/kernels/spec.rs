use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Record;
use crate::scalar::Real;

use super::family::{
    make_log_limit, make_rescaled, make_smoothed_log, make_smoothed_log_ball, make_smoothed_power, make_stable,
    make_truncated_power, FamilyKind, KernelFamily,
};
use super::{FamilyTag, RadialKernel};

/// Flat description of one family kernel: (family, d, p, ε, β, ε₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: FamilyTag,
    pub d: usize,
    pub p: f64,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    /// ε of the stable base of a rescaled kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_eps: Option<f64>,
}

pub const KERNEL_KEYS: [&str; 7] = ["family", "d", "p", "eps", "beta", "eps0", "base_eps"];

impl KernelSpec {
    fn plain(family: FamilyTag, d: usize, p: f64, eps: f64) -> Self {
        Self {
            family,
            d,
            p,
            eps,
            beta: None,
            eps0: None,
            base_eps: None,
        }
    }

    pub fn stable(d: usize, p: f64, eps: f64) -> Self {
        Self::plain(FamilyTag::Stable, d, p, eps)
    }

    pub fn truncated_power(d: usize, p: f64, beta: f64, eps: f64) -> Self {
        Self {
            beta: Some(beta),
            ..Self::plain(FamilyTag::TruncatedPower, d, p, eps)
        }
    }

    pub fn smoothed_power(d: usize, p: f64, beta: f64, eps: f64, eps0: f64) -> Self {
        Self {
            beta: Some(beta),
            eps0: Some(eps0),
            ..Self::plain(FamilyTag::SmoothedPower, d, p, eps)
        }
    }

    pub fn log_limit(d: usize, p: f64, eps: f64, eps0: f64) -> Self {
        Self {
            eps0: Some(eps0),
            ..Self::plain(FamilyTag::LogLimit, d, p, eps)
        }
    }

    pub fn smoothed_log(d: usize, p: f64, eps: f64, eps0: f64) -> Self {
        Self {
            eps0: Some(eps0),
            ..Self::plain(FamilyTag::SmoothedLog, d, p, eps)
        }
    }

    pub fn smoothed_log_ball(d: usize, p: f64, eps: f64, eps0: f64) -> Self {
        Self {
            eps0: Some(eps0),
            ..Self::plain(FamilyTag::SmoothedLogBall, d, p, eps)
        }
    }

    pub fn rescaled_stable(d: usize, p: f64, base_eps: f64, eps: f64) -> Self {
        Self {
            base_eps: Some(base_eps),
            ..Self::plain(FamilyTag::Rescaled, d, p, eps)
        }
    }

    /// Record for a rescaling of `base`; only stable bases have one.
    pub(crate) fn rescaled_from(base: &KernelSpec, eps: f64) -> Option<Self> {
        (base.family == FamilyTag::Stable).then(|| Self::rescaled_stable(base.d, base.p, base.eps, eps))
    }

    /// The same spec at another ε.
    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    fn need(&self, v: Option<f64>, key: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Record(format!("family `{}` needs key `{key}`", self.family)))
    }

    pub fn build<F: Real>(&self) -> Result<RadialKernel<F>> {
        let (d, p, eps) = (self.d, F::of(self.p), F::of(self.eps));
        match self.family {
            FamilyTag::Stable => make_stable(d, p, eps),
            FamilyTag::Rescaled => {
                let base = make_stable(d, p, F::of(self.need(self.base_eps, "base_eps")?))?;
                make_rescaled(&base, eps)
            }
            FamilyTag::TruncatedPower => make_truncated_power(d, p, F::of(self.need(self.beta, "beta")?), eps),
            FamilyTag::SmoothedPower => make_smoothed_power(
                d,
                p,
                F::of(self.need(self.beta, "beta")?),
                eps,
                F::of(self.need(self.eps0, "eps0")?),
            ),
            FamilyTag::LogLimit => make_log_limit(d, p, eps, F::of(self.need(self.eps0, "eps0")?)),
            FamilyTag::SmoothedLog => make_smoothed_log(d, p, eps, F::of(self.need(self.eps0, "eps0")?)),
            FamilyTag::SmoothedLogBall => make_smoothed_log_ball(d, p, eps, F::of(self.need(self.eps0, "eps0")?)),
            FamilyTag::Custom => Err(Error::Unsupported("custom kernels have no flat record".into())),
        }
    }

    /// The family this spec belongs to (ε dropped).
    pub fn family<F: Real>(&self) -> Result<KernelFamily<F>> {
        let p = F::of(self.p);
        let kind = match self.family {
            FamilyTag::Stable => FamilyKind::Stable,
            FamilyTag::Rescaled => {
                return KernelFamily::rescaled_stable(self.d, p, F::of(self.need(self.base_eps, "base_eps")?))
            }
            FamilyTag::TruncatedPower => FamilyKind::TruncatedPower {
                beta: F::of(self.need(self.beta, "beta")?),
            },
            FamilyTag::SmoothedPower => FamilyKind::SmoothedPower {
                beta: F::of(self.need(self.beta, "beta")?),
                eps0: F::of(self.need(self.eps0, "eps0")?),
            },
            FamilyTag::LogLimit => FamilyKind::LogLimit {
                eps0: F::of(self.need(self.eps0, "eps0")?),
            },
            FamilyTag::SmoothedLog => FamilyKind::SmoothedLog {
                eps0: F::of(self.need(self.eps0, "eps0")?),
            },
            FamilyTag::SmoothedLogBall => FamilyKind::SmoothedLogBall {
                eps0: F::of(self.need(self.eps0, "eps0")?),
            },
            FamilyTag::Custom => return Err(Error::Unsupported("custom kernels have no family".into())),
        };
        KernelFamily::new(kind, self.d, p)
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("family", self.family)
            .push("d", self.d)
            .push("p", self.p)
            .push("eps", self.eps)
            .push_opt("beta", self.beta)
            .push_opt("eps0", self.eps0)
            .push_opt("base_eps", self.base_eps);
        r
    }

    pub fn to_record_string(&self) -> String {
        self.to_record().to_string()
    }

    pub fn from_record(rec: &Record) -> Result<Self> {
        rec.check_keys("kernel", &KERNEL_KEYS)?;
        let family: FamilyTag = rec.required("family")?.parse()?;
        let d = rec
            .usize("d")?
            .ok_or_else(|| Error::Record("missing required key `d`".into()))?;
        let spec = Self {
            family,
            d,
            p: rec.f64_req("p")?,
            eps: rec.f64_req("eps")?,
            beta: rec.f64("beta")?,
            eps0: rec.f64("eps0")?,
            base_eps: rec.f64("base_eps")?,
        };
        Ok(spec)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_record(&Record::parse(text)?)
    }
}
