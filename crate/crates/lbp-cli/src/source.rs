use std::fs;

use lbp::report::fmt_g;
use lbp::{parse_model, Mrf, Topology};

use crate::commands::CliError;
use crate::GraphSource;

pub enum Source {
    Generated(Topology),
    File(Mrf),
}

impl Source {
    pub fn load(src: &GraphSource) -> Result<Self, CliError> {
        match (&src.generate, &src.graph) {
            (Some(spec), None) => spec
                .parse::<Topology>()
                .map(Source::Generated)
                .map_err(|e| CliError::Usage(format!("--generate: {e}"))),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                parse_model(&text).map(Source::File).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
            }
            _ => Err(CliError::Usage("give exactly one of --generate or --graph".into())),
        }
    }

    /// Models to evaluate: one per η for generators, the file model alone otherwise.
    pub fn models(&self, etas: Option<&[f64]>) -> Result<Vec<(Option<f64>, Mrf)>, CliError> {
        match (self, etas) {
            (Source::Generated(t), Some(etas)) => etas
                .iter()
                .map(|&eta| t.build(eta).map(|m| (Some(eta), m)).map_err(|e| CliError::Usage(e.to_string())))
                .collect(),
            (Source::Generated(_), None) => Err(CliError::Usage("--eta is required with --generate".into())),
            (Source::File(m), None) => Ok(vec![(None, m.clone())]),
            (Source::File(_), Some(_)) => Err(CliError::Usage("--eta applies to generated graphs only".into())),
        }
    }
}

/// Parses `x` or `start:stop:step` (inclusive of `stop` when it lies on the grid).
pub fn parse_eta(s: &str) -> Result<Vec<f64>, CliError> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{t}' in --eta")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || !(start < stop) {
                return Err(CliError::Usage(format!("--eta {s}: need step > 0 and start < stop")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n)
                .map(|i| fmt_g(start + i as f64 * step).parse::<f64>().expect("formatted float parses"))
                .collect())
        }
        _ => Err(CliError::Usage(format!("--eta {s}: expected a value or start:stop:step"))),
    }
}
