//! The canonical constitutions and distributions used by tests.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::Serialize;

use quantarrow::constitution::Constitution;
use quantarrow::distribution::VoteDistribution;
use quantarrow::io::{ConstitutionFile, DistributionFile};
use quantarrow::ranking::Ranking;
use quantarrow::{Error, Result};

use crate::report::{CliError, CliResult};

pub enum Fixture {
    Constitution(Constitution),
    Distribution(VoteDistribution),
}

fn perturbed_dictator() -> Result<Constitution> {
    let mut f = Constitution::dictator(3, 3, 0, 1)?;
    let mut ab = f.oriented(0, 1)?;
    ab.flip(5);
    f.set_pair(0, 1, ab)?;
    Ok(f)
}

fn symmetric() -> Result<VoteDistribution> {
    // Reversal pairs in lex order are (0, 5), (1, 3) and (2, 4).
    let probs = [(1, 4), (1, 6), (1, 12), (1, 6), (1, 12), (1, 4)]
        .iter()
        .map(|&(p, q)| BigRational::new(p.into(), q.into()))
        .collect();
    VoteDistribution::from_rationals(3, probs)
}

/// File name and contents of every fixture, in a fixed order.
pub fn all() -> Result<Vec<(&'static str, Fixture)>> {
    use Fixture::{Constitution as C, Distribution as D};
    Ok(vec![
        ("dictator-n3.json", C(Constitution::dictator(3, 3, 0, 1)?)),
        ("antidictator-n3.json", C(Constitution::dictator(3, 3, 0, -1)?)),
        ("constant-abc-n3.json", C(Constitution::constant(&Ranking::from_order(&[0, 1, 2])?, 3)?)),
        ("majority-n1.json", C(Constitution::majority(3, 1)?)),
        ("majority-n3.json", C(Constitution::majority(3, 3)?)),
        ("majority-n5.json", C(Constitution::majority(3, 5)?)),
        ("parity-n3.json", C(Constitution::from_fn(3, 3, |_, _| quantarrow::boolfn::BooleanFunction::parity(3).expect("n = 3 fits"))?)),
        ("perturbed-dictator-n3.json", C(perturbed_dictator()?)),
        ("uniform-k3.json", D(VoteDistribution::uniform(3))),
        ("symmetric-k3.json", D(symmetric()?)),
    ])
}

fn pretty<T: Serialize>(t: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(t)? + "\n")
}

pub fn render(fixture: &Fixture) -> Result<String> {
    match fixture {
        Fixture::Constitution(f) => pretty(&ConstitutionFile::from_constitution(f)),
        Fixture::Distribution(mu) => pretty(&DistributionFile::from_distribution(mu)),
    }
}

pub fn emit(dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, fixture) in all()? {
        let path = dir.join(name);
        let text = render(&fixture)?;
        std::fs::write(&path, text).map_err(|e| CliError::Core(Error::Format(format!("cannot write {}: {e}", path.display()))))?;
        written.push(path);
    }
    Ok(written)
}
