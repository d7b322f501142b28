//! Initial-data families.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use hypflow::geometry::read_profile;
use hypflow::{AmbientSpace, RadialProfile};

use crate::config::Pairs;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `ρ = τ`.
    Constant { tau: f64 },
    /// `ρ = τ + ε cos kθ`.
    Cosk { tau: f64, eps: f64, k: f64 },
    /// `ρ = τ + ε P_l(cos θ)`.
    Legendre { tau: f64, eps: f64, l: usize },
    /// A profile written by `write_profile`.
    File { path: PathBuf },
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 1..l {
        let kf = k as f64;
        (p0, p1) = (p1, ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0));
    }
    p1
}

impl InitSpec {
    pub fn from_pairs(pairs: &Pairs) -> Result<Self, CliError> {
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<f64, CliError> {
            let v = get(key).ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
            v.parse().map_err(|_| CliError::config(format!("`{key}`: cannot parse `{v}`")))
        };
        let family = get("init.family").ok_or_else(|| CliError::config("missing required key `init.family`"))?;
        let spec = match family {
            "constant" => Self::Constant { tau: num("init.tau")? },
            "cosk" => Self::Cosk { tau: num("init.tau")?, eps: num("init.eps")?, k: num("init.mode")? },
            "legendre" => {
                let l = num("init.mode")?;
                if l < 0.0 || l.fract() != 0.0 {
                    return Err(CliError::config(format!("`init.mode` for legendre must be a non-negative integer, got {l}")));
                }
                Self::Legendre { tau: num("init.tau")?, eps: num("init.eps")?, l: l as usize }
            }
            "file" => Self::File {
                path: get("init.path").ok_or_else(|| CliError::config("missing required key `init.path`"))?.into(),
            },
            other => return Err(CliError::config(format!("unknown init.family `{other}`"))),
        };
        Ok(spec)
    }

    pub fn profile(&self, amb: AmbientSpace, nodes: usize) -> Result<RadialProfile, CliError> {
        let stage = |e| CliError::module("initial data", e);
        match *self {
            Self::Constant { tau } => RadialProfile::constant(amb, nodes, tau).map_err(stage),
            Self::Cosk { tau, eps, k } => RadialProfile::from_fn(amb, nodes, |t| tau + eps * (k * t).cos()).map_err(stage),
            Self::Legendre { tau, eps, l } => {
                RadialProfile::from_fn(amb, nodes, |t| tau + eps * legendre_p(l, t.cos())).map_err(stage)
            }
            Self::File { ref path } => {
                let file = File::open(path)
                    .map_err(|e| CliError::config(format!("cannot open profile `{}`: {e}", path.display())))?;
                let profile = read_profile(BufReader::new(file)).map_err(stage)?;
                if *profile.amb() != amb {
                    return Err(CliError::config(format!(
                        "profile `{}` is for {}, config asks for {amb}",
                        path.display(),
                        profile.amb()
                    )));
                }
                if profile.rho().len() != nodes {
                    return Err(CliError::config(format!(
                        "profile `{}` has {} nodes, config asks for {nodes}",
                        path.display(),
                        profile.rho().len()
                    )));
                }
                Ok(profile)
            }
        }
    }
}
