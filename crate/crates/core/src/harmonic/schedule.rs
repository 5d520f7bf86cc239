//! Concrete instantiation of the parameter schedule L, J, R, T, ε.

use crate::error::{Error, Result};
use crate::util::loglog;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: u64,
    /// Moment order scale, ⌈log log N⌉.
    pub l: u32,
    /// Frequency truncation, max(64, ⌈N^{1/25}⌉).
    pub j: u64,
    /// Prime cutoff, ⌈N^{1/log log N}⌉.
    pub r: u64,
    /// Major-arc denominator bound, ⌈J^{1/8}⌉.
    pub t: u64,
    /// Window width, J^{−1/2}.
    pub eps: f64,
}

impl Schedule {
    pub fn for_n(n: u64) -> Result<Self> {
        if n < 16 {
            return Err(Error::validation(format!("N = {n} must be at least 16")));
        }
        let nf = n as f64;
        let ll = loglog(nf);
        let j = 64u64.max(nf.powf(1.0 / 25.0).ceil() as u64);
        let r = (nf.powf(1.0 / ll).ceil() as u64).clamp(2, n);
        Ok(Self {
            n,
            l: ll.ceil().max(1.0) as u32,
            j,
            r,
            t: (j as f64).powf(1.0 / 8.0).ceil() as u64,
            eps: (j as f64).powf(-0.5),
        })
    }

    /// Override individual entries, keeping the derived ones consistent
    /// unless set explicitly.
    pub fn with_overrides(
        mut self,
        r: Option<u64>,
        j: Option<u64>,
        l: Option<u32>,
        eps: Option<f64>,
        t: Option<u64>,
    ) -> Result<Self> {
        if let Some(j) = j {
            if j < 64 {
                return Err(Error::validation(format!("J = {j} must be at least 64")));
            }
            self.j = j;
            self.t = (j as f64).powf(1.0 / 8.0).ceil() as u64;
            self.eps = (j as f64).powf(-0.5);
        }
        if let Some(r) = r {
            if r < 2 || r > self.n {
                return Err(Error::validation(format!("R = {r} must lie in [2, N]")));
            }
            self.r = r;
        }
        if let Some(l) = l {
            self.l = l;
        }
        if let Some(eps) = eps {
            if !(eps > 0.0 && eps <= 0.5) {
                return Err(Error::validation(format!("epsilon = {eps} must lie in (0, 1/2]")));
            }
            self.eps = eps;
        }
        if let Some(t) = t {
            if t == 0 {
                return Err(Error::validation("T must be at least 1"));
            }
            self.t = t;
        }
        Ok(self)
    }
}
