use std::path::PathBuf;

use bayesedge::noise::{BoundaryMode, NoiseMatrix, NoiseSpec};
use clap::Args;

use crate::error::{in_file, read_text, CliError, CliResult};

/// Noise model flags shared by the subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct NoiseArgs {
    /// Noise model, e.g. `gaussian(4)`, `replacement(uniform)`,
    /// `mixture(0.5, gaussian(1), replacement(delta 0))` or `identity`
    #[arg(long)]
    pub noise: Option<String>,
    /// Standard deviation of additive Gaussian noise
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Replacement distribution: `uniform`, `delta K` or N probabilities
    #[arg(long)]
    pub replacement: Option<String>,
    /// Weight of the Gaussian part when both --sigma and --replacement are given
    #[arg(long)]
    pub mix_weight: Option<f64>,
    /// Noise matrix CSV (header `N,mode`, then N rows)
    #[arg(long)]
    pub noise_matrix: Option<PathBuf>,
    /// Treatment of the gray-level range ends [default: renormalize]
    #[arg(long)]
    pub boundary_mode: Option<BoundaryMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSource {
    Identity,
    Spec(NoiseSpec),
    File(PathBuf),
}

impl NoiseSource {
    /// Text form as written to manifests; inverse of [`Self::parse`].
    pub fn describe(&self) -> String {
        match self {
            NoiseSource::Identity => "identity".into(),
            NoiseSource::Spec(s) => s.to_string(),
            NoiseSource::File(p) => format!("file:{}", p.display()),
        }
    }

    pub fn parse(text: &str, num_colors: usize) -> CliResult<Self> {
        let text = text.trim();
        if text == "identity" {
            return Ok(NoiseSource::Identity);
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Ok(NoiseSource::File(PathBuf::from(path)));
        }
        NoiseSpec::parse(text, num_colors)
            .map(NoiseSource::Spec)
            .map_err(|e| CliError::Usage(format!("--noise: {e}")))
    }

    pub fn matrix(&self, num_colors: Option<usize>, mode: BoundaryMode) -> CliResult<NoiseMatrix> {
        let m = match self {
            NoiseSource::Identity => NoiseMatrix::identity(require_colors(num_colors)?)?,
            NoiseSource::Spec(s) => NoiseMatrix::build(s, require_colors(num_colors)?, mode)?,
            NoiseSource::File(path) => in_file(path, NoiseMatrix::from_csv(&read_text(path)?))?,
        };
        if let Some(n) = num_colors {
            if n != m.num_colors() {
                return Err(CliError::Usage(format!(
                    "--colors {n} does not match the {}-color noise matrix",
                    m.num_colors()
                )));
            }
        }
        Ok(m)
    }
}

fn require_colors(n: Option<usize>) -> CliResult<usize> {
    n.ok_or_else(|| CliError::Usage("--colors is required".into()))
}

impl NoiseArgs {
    pub fn is_empty(&self) -> bool {
        self.noise.is_none()
            && self.sigma.is_none()
            && self.replacement.is_none()
            && self.mix_weight.is_none()
            && self.noise_matrix.is_none()
    }

    /// The selected noise model, or `None` when no noise flag was given.
    pub fn source(&self, num_colors: Option<usize>) -> CliResult<Option<NoiseSource>> {
        let shortcut =
            self.sigma.is_some() || self.replacement.is_some() || self.mix_weight.is_some();
        let given = [self.noise.is_some(), shortcut, self.noise_matrix.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(CliError::Usage(
                "give only one of --noise, --noise-matrix and --sigma/--replacement/--mix-weight"
                    .into(),
            ));
        }
        if let Some(path) = &self.noise_matrix {
            return Ok(Some(NoiseSource::File(path.clone())));
        }
        if let Some(text) = &self.noise {
            let n = require_colors(num_colors)?;
            return NoiseSource::parse(text, n).map(Some);
        }
        if !shortcut {
            return Ok(None);
        }
        let n = require_colors(num_colors)?;
        let replacement = self
            .replacement
            .as_ref()
            .map(|r| {
                NoiseSpec::parse(&format!("replacement({r})"), n)
                    .map_err(|e| CliError::Usage(format!("--replacement: {e}")))
            })
            .transpose()?;
        let spec = match (self.sigma, replacement, self.mix_weight) {
            (Some(s), None, None) => NoiseSpec::gaussian(s),
            (None, Some(r), None) => r,
            (Some(s), Some(r), Some(w)) => NoiseSpec::mixture(w, NoiseSpec::gaussian(s), r),
            (Some(_), Some(_), None) => {
                return Err(CliError::Usage(
                    "--sigma with --replacement needs --mix-weight".into(),
                ))
            }
            _ => {
                return Err(CliError::Usage(
                    "--mix-weight needs both --sigma and --replacement".into(),
                ))
            }
        };
        Ok(Some(NoiseSource::Spec(spec)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortcuts_build_specs() {
        let args = NoiseArgs {
            sigma: Some(1.0),
            replacement: Some("delta 0".into()),
            mix_weight: Some(0.5),
            ..Default::default()
        };
        let src = args.source(Some(4)).unwrap().unwrap();
        let text = src.describe();
        assert_eq!(NoiseSource::parse(&text, 4).unwrap(), src);
        assert!(text.starts_with("mixture("));
    }

    #[test]
    fn conflicting_or_incomplete_flags_are_usage_errors() {
        let both = NoiseArgs {
            sigma: Some(1.0),
            noise: Some("gaussian(2)".into()),
            ..Default::default()
        };
        assert_eq!(both.source(Some(4)).unwrap_err().exit_code(), 1);
        let no_weight = NoiseArgs {
            sigma: Some(1.0),
            replacement: Some("uniform".into()),
            ..Default::default()
        };
        assert_eq!(no_weight.source(Some(4)).unwrap_err().exit_code(), 1);
        let no_colors = NoiseArgs {
            sigma: Some(1.0),
            ..Default::default()
        };
        assert_eq!(no_colors.source(None).unwrap_err().exit_code(), 1);
        assert_eq!(NoiseArgs::default().source(Some(4)).unwrap(), None);
    }

    #[test]
    fn identity_and_file_sources() {
        assert_eq!(
            NoiseSource::parse("identity", 4).unwrap(),
            NoiseSource::Identity
        );
        let f = NoiseSource::parse("file:/tmp/m.csv", 4).unwrap();
        assert_eq!(f, NoiseSource::File(PathBuf::from("/tmp/m.csv")));
        assert_eq!(f.describe(), "file:/tmp/m.csv");
        let m = NoiseSource::Identity
            .matrix(Some(3), BoundaryMode::Renormalize)
            .unwrap();
        assert_eq!(m.get(1, 1), 1.0);
    }
}
