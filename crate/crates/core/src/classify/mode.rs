use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Modes of social action. The first four are atomic (scale x manner);
/// the rest are unions of atomic modes.
///
/// Variant order follows the row order of the evaluation table and is the
/// iteration order everywhere in exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    CollectiveForce,
    CollectivePeace,
    SingularForce,
    SingularPeace,
    Collective,
    Singular,
    Force,
    Peace,
    All,
}

use ActionMode::*;

impl ActionMode {
    pub const ALL_MODES: [ActionMode; 9] = [
        CollectiveForce,
        CollectivePeace,
        SingularForce,
        SingularPeace,
        Collective,
        Singular,
        Force,
        Peace,
        All,
    ];
    pub const ATOMIC: [ActionMode; 4] = [CollectiveForce, CollectivePeace, SingularForce, SingularPeace];
    pub const COLLAPSED: [ActionMode; 5] = [Collective, Singular, Force, Peace, All];

    pub fn name(self) -> &'static str {
        match self {
            CollectiveForce => "collective_force",
            CollectivePeace => "collective_peace",
            SingularForce => "singular_force",
            SingularPeace => "singular_peace",
            Collective => "collective",
            Singular => "singular",
            Force => "force",
            Peace => "peace",
            All => "all",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL_MODES.into_iter().find(|m| m.name() == name)
    }

    /// Row label as printed in evaluation tables.
    pub fn title(self) -> &'static str {
        match self {
            CollectiveForce => "Collective force",
            CollectivePeace => "Collective peace",
            SingularForce => "Singular force",
            SingularPeace => "Singular peace",
            Collective => "Collective",
            Singular => "Singular",
            Force => "Force",
            Peace => "Peace",
            All => "All",
        }
    }

    pub fn is_atomic(self) -> bool {
        Self::ATOMIC.contains(&self)
    }

    /// Atomic modes whose union this mode is.
    pub fn components(self) -> &'static [ActionMode] {
        match self {
            CollectiveForce => &[CollectiveForce],
            CollectivePeace => &[CollectivePeace],
            SingularForce => &[SingularForce],
            SingularPeace => &[SingularPeace],
            Collective => &[CollectivePeace, CollectiveForce],
            Singular => &[SingularPeace, SingularForce],
            Force => &[SingularForce, CollectiveForce],
            Peace => &[SingularPeace, CollectivePeace],
            All => &Self::ATOMIC,
        }
    }

    /// Whether a tweet coded with the atomic `labels` is positive for this mode.
    pub fn is_positive(self, labels: &BTreeSet<ActionMode>) -> bool {
        self.components().iter().any(|c| labels.contains(c))
    }
}

impl fmt::Display for ActionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ActionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActionMode::from_name(s).ok_or_else(|| Error::InvalidInput(format!("unknown mode {s:?}")))
    }
}

/// Maps a set of atomic modes to the collapsed modes it implies.
pub fn collapse_labels(atomic: &BTreeSet<ActionMode>) -> Result<BTreeSet<ActionMode>> {
    if let Some(m) = atomic.iter().find(|m| !m.is_atomic()) {
        return Err(Error::InvalidInput(format!(
            "collapse_labels expects atomic modes, got {m}"
        )));
    }
    Ok(ActionMode::COLLAPSED
        .into_iter()
        .filter(|m| m.is_positive(atomic))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: &[ActionMode]) -> BTreeSet<ActionMode> {
        m.iter().copied().collect()
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(
            collapse_labels(&set(&[CollectiveForce])).unwrap(),
            set(&[Collective, Force, All])
        );
        assert!(collapse_labels(&set(&[])).unwrap().is_empty());
        assert_eq!(
            collapse_labels(&set(&[SingularPeace, CollectiveForce])).unwrap(),
            set(&[Singular, Collective, Peace, Force, All])
        );
        assert!(collapse_labels(&set(&[All])).is_err());
    }

    #[test]
    fn names_round_trip() {
        for m in ActionMode::ALL_MODES {
            assert_eq!(ActionMode::from_name(m.name()), Some(m));
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
