//! Transverse displacement profiles for uniformly spaced emitter arrays.
//!
//! Lengths are in units of the evanescent decay length of the guided mode,
//! so a displacement `y` attenuates an emitter's field coupling by `exp(-y)`.
//! The axial spacing enters only through the phase `xi = k * dx`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Linear,
    SingleGaussian,
    DoubleGaussian,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Linear => "linear",
            ProfileKind::SingleGaussian => "single-gaussian",
            ProfileKind::DoubleGaussian => "double-gaussian",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProfileKind::Linear),
            "single-gaussian" | "single" => Ok(ProfileKind::SingleGaussian),
            "double-gaussian" | "double" => Ok(ProfileKind::DoubleGaussian),
            other => Err(Error::param(
                "profile",
                format!("unknown profile `{other}` (expected linear, single-gaussian or double-gaussian)"),
            )),
        }
    }
}

/// How the 1-based site index `mu` is mapped onto the unit interval that the
/// Gaussian profiles are written on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// `(mu - 1) / (N - 1)`: first and last emitters sit at 0 and 1, so the
    /// array centre coincides with the profile centre for odd `N`.
    /// A single emitter is placed at 1/2.
    #[default]
    Endpoint,
    /// `mu / N`, with the last emitter at 1 and the first at `1/N`.
    Fractional,
}

impl IndexConvention {
    /// Position of site `mu` (1-based) of an `n`-site array on [0, 1].
    pub fn site_fraction(self, mu: usize, n: usize) -> f64 {
        debug_assert!(mu >= 1 && mu <= n);
        match self {
            IndexConvention::Endpoint if n == 1 => 0.5,
            IndexConvention::Endpoint => (mu - 1) as f64 / (n - 1) as f64,
            IndexConvention::Fractional => mu as f64 / n as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IndexConvention::Endpoint => "endpoint",
            IndexConvention::Fractional => "fractional",
        }
    }
}

impl fmt::Display for IndexConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint" => Ok(IndexConvention::Endpoint),
            "fractional" => Ok(IndexConvention::Fractional),
            other => Err(Error::param(
                "index-convention",
                format!("unknown index convention `{other}` (expected endpoint or fractional)"),
            )),
        }
    }
}

/// Shape of the transverse displacement profile.
///
/// `eta` is the profile amplitude and `sigma` the Gaussian width measured on
/// the unit interval of site positions. Both are ignored for
/// [`ProfileKind::Linear`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub eta: f64,
    pub sigma: f64,
}

impl ProfileSpec {
    pub fn linear() -> Self {
        ProfileSpec {
            kind: ProfileKind::Linear,
            eta: 0.0,
            sigma: 1.0,
        }
    }

    pub fn single_gaussian(eta: f64, sigma: f64) -> Self {
        ProfileSpec {
            kind: ProfileKind::SingleGaussian,
            eta,
            sigma,
        }
    }

    pub fn double_gaussian(eta: f64, sigma: f64) -> Self {
        ProfileSpec {
            kind: ProfileKind::DoubleGaussian,
            eta,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_finite() {
            return Err(Error::param("eta", "must be finite"));
        }
        if !self.sigma.is_finite() {
            return Err(Error::param("sigma", "must be finite"));
        }
        if self.kind != ProfileKind::Linear {
            if self.eta < 0.0 {
                return Err(Error::param(
                    "eta",
                    format!("must be >= 0, got {}", self.eta),
                ));
            }
            if self.sigma <= 0.0 {
                return Err(Error::param(
                    "sigma",
                    format!("must be > 0, got {}", self.sigma),
                ));
            }
        }
        Ok(())
    }

    /// Displacement of an emitter sitting at `fraction` on the unit interval.
    pub fn displacement_at(&self, fraction: f64) -> f64 {
        let bump = |centre: f64| {
            let d = fraction - centre;
            2.0 * self.eta * (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
        };
        match self.kind {
            ProfileKind::Linear => 0.0,
            ProfileKind::SingleGaussian => bump(0.5) - self.eta,
            ProfileKind::DoubleGaussian => bump(0.25) + bump(0.75) - self.eta,
        }
    }
}

/// A uniformly spaced emitter array with per-site transverse displacements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    spacing_xi: f64,
    transverse_y: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(spacing_xi: f64, transverse_y: Vec<f64>) -> Result<Self> {
        if transverse_y.is_empty() {
            return Err(Error::param("n", "array must contain at least one emitter"));
        }
        if !spacing_xi.is_finite() || spacing_xi < 0.0 {
            return Err(Error::param(
                "xi",
                format!("must be finite and >= 0, got {spacing_xi}"),
            ));
        }
        if let Some(pos) = transverse_y.iter().position(|y| !y.is_finite()) {
            return Err(Error::param(
                "y",
                format!("displacement of site {} is not finite", pos + 1),
            ));
        }
        Ok(ArrayGeometry {
            spacing_xi,
            transverse_y,
        })
    }

    pub fn n_emitters(&self) -> usize {
        self.transverse_y.len()
    }

    pub fn spacing_xi(&self) -> f64 {
        self.spacing_xi
    }

    pub fn transverse_y(&self) -> &[f64] {
        &self.transverse_y
    }
}

/// Builds an `n`-emitter array with the default [`IndexConvention`].
pub fn make_profile(spec: ProfileSpec, n: usize, xi: f64) -> Result<ArrayGeometry> {
    make_profile_with(spec, n, xi, IndexConvention::default())
}

pub fn make_profile_with(
    spec: ProfileSpec,
    n: usize,
    xi: f64,
    convention: IndexConvention,
) -> Result<ArrayGeometry> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    spec.validate()?;
    let y = (1..=n)
        .map(|mu| spec.displacement_at(convention.site_fraction(mu, n)))
        .collect();
    ArrayGeometry::new(xi, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_is_flat() {
        let g = make_profile(
            ProfileSpec {
                kind: ProfileKind::Linear,
                eta: 3.0,
                sigma: -1.0,
            },
            5,
            0.3,
        )
        .unwrap();
        assert_eq!(g.transverse_y(), &[0.0; 5]);
    }

    #[test]
    fn single_gaussian_centre_value() {
        let spec = ProfileSpec::single_gaussian(0.05, 0.2);
        assert_eq!(spec.displacement_at(0.5), 0.05);
        // site 51 of 101 sits exactly at the centre in the endpoint convention
        let g = make_profile(spec, 101, 0.1).unwrap();
        assert_eq!(g.transverse_y()[50], 0.05);
    }

    #[test]
    fn single_gaussian_first_site() {
        let spec = ProfileSpec::single_gaussian(0.05, 0.2);
        // mpmath, 40 digits
        let frac = make_profile_with(spec, 101, 0.1, IndexConvention::Fractional).unwrap();
        assert!((frac.transverse_y()[0] - (-0.045_033_540_598_534_59)).abs() < 1e-15);
        let end = make_profile(spec, 101, 0.1).unwrap();
        assert!((end.transverse_y()[0] - (-0.045_606_306_637_659_26)).abs() < 1e-15);
    }

    #[test]
    fn double_gaussian_quarter_point() {
        let spec = ProfileSpec::double_gaussian(0.05, 0.075);
        let y = spec.displacement_at(0.25);
        // second lobe contributes 2.2336e-11
        assert!((y - 0.050_000_000_022_336_31).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let ok = ProfileSpec::single_gaussian(0.05, 0.2);
        assert!(make_profile(ok, 0, 0.1).is_err());
        assert!(make_profile(ok, 3, f64::NAN).is_err());
        assert!(make_profile(ok, 3, -0.1).is_err());
        assert!(make_profile(ProfileSpec::single_gaussian(f64::INFINITY, 0.2), 3, 0.1).is_err());
        assert!(make_profile(ProfileSpec::single_gaussian(0.05, 0.0), 3, 0.1).is_err());
        assert!(make_profile(ProfileSpec::double_gaussian(-0.1, 0.1), 3, 0.1).is_err());
        let err = make_profile(ProfileSpec::single_gaussian(0.05, f64::NAN), 3, 0.1).unwrap_err();
        assert!(err.to_string().contains("sigma"));
    }

    #[test]
    fn single_emitter_sits_at_centre() {
        let spec = ProfileSpec::single_gaussian(0.05, 0.2);
        let g = make_profile(spec, 1, 0.0).unwrap();
        assert_eq!(g.transverse_y(), &[0.05]);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            "single-gaussian".parse::<ProfileKind>().unwrap(),
            ProfileKind::SingleGaussian
        );
        assert_eq!(
            "double".parse::<ProfileKind>().unwrap(),
            ProfileKind::DoubleGaussian
        );
        assert!("triple".parse::<ProfileKind>().is_err());
    }

    proptest! {
        #[test]
        fn single_gaussian_mirror_symmetric(eta in 0.0..0.5f64, sigma in 0.01..1.0f64, x in 0.0..1.0f64) {
            let spec = ProfileSpec::single_gaussian(eta, sigma);
            let a = spec.displacement_at(x);
            let b = spec.displacement_at(1.0 - x);
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a >= -eta && a <= eta);
        }

        #[test]
        fn double_gaussian_mirror_symmetric(eta in 0.0..0.5f64, sigma in 0.01..1.0f64, x in 0.0..1.0f64) {
            let spec = ProfileSpec::double_gaussian(eta, sigma);
            prop_assert!((spec.displacement_at(x) - spec.displacement_at(1.0 - x)).abs() < 1e-12);
        }

        #[test]
        fn endpoint_grid_is_mirror_symmetric(eta in 0.0..0.2f64, sigma in 0.02..0.5f64, n in 1usize..300) {
            let g = make_profile(ProfileSpec::single_gaussian(eta, sigma), n, 0.5).unwrap();
            let y = g.transverse_y();
            for i in 0..n {
                prop_assert!((y[i] - y[n - 1 - i]).abs() < 1e-12);
                prop_assert!(y[i] >= -eta && y[i] <= eta);
            }
        }
    }
}
