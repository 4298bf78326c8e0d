use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::graph::NodeMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl VariantId {
    pub const ALL: [VariantId; 8] = [
        VariantId::A,
        VariantId::B,
        VariantId::C,
        VariantId::D,
        VariantId::E,
        VariantId::F,
        VariantId::G,
        VariantId::H,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VariantId::A => "A",
            VariantId::B => "B",
            VariantId::C => "C",
            VariantId::D => "D",
            VariantId::E => "E",
            VariantId::F => "F",
            VariantId::G => "G",
            VariantId::H => "H",
        }
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantId {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(VariantId::A),
            "B" | "b" => Ok(VariantId::B),
            "C" | "c" => Ok(VariantId::C),
            "D" | "d" => Ok(VariantId::D),
            "E" | "e" => Ok(VariantId::E),
            "F" | "f" => Ok(VariantId::F),
            "G" | "g" => Ok(VariantId::G),
            "H" | "h" => Ok(VariantId::H),
            other => Err(PromptError::UnknownVariant(other.to_owned())),
        }
    }
}

/// The feature on/off vector of one generation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant_id: VariantId,
    pub use_main_idea: bool,
    pub use_taic: bool,
    pub node_mode: NodeMode,
    pub use_usage: bool,
    pub use_relationship: bool,
    pub use_cts: bool,
}

/// The variant matrix. A is the baseline with every feature except CTS;
/// B drops the main idea, C drops the target TAIC, D swaps faceted
/// summaries for cited abstracts, E drops usage, F drops relationships,
/// G drops both, and H adds CTS re-generation on top of A.
pub fn variant_features(variant_id: VariantId) -> VariantSpec {
    let baseline = VariantSpec {
        variant_id,
        use_main_idea: true,
        use_taic: true,
        node_mode: NodeMode::Faceted,
        use_usage: true,
        use_relationship: true,
        use_cts: false,
    };
    match variant_id {
        VariantId::A => baseline,
        VariantId::B => VariantSpec { use_main_idea: false, ..baseline },
        VariantId::C => VariantSpec { use_taic: false, ..baseline },
        VariantId::D => VariantSpec { node_mode: NodeMode::Abstract, ..baseline },
        VariantId::E => VariantSpec { use_usage: false, ..baseline },
        VariantId::F => VariantSpec { use_relationship: false, ..baseline },
        VariantId::G => VariantSpec { use_usage: false, use_relationship: false, ..baseline },
        VariantId::H => VariantSpec { use_cts: true, ..baseline },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_drops_only_the_main_idea() {
        let b = variant_features(VariantId::B);
        let a = variant_features(VariantId::A);
        assert!(!b.use_main_idea);
        assert_eq!(
            (b.use_taic, b.node_mode, b.use_usage, b.use_relationship, b.use_cts),
            (a.use_taic, a.node_mode, a.use_usage, a.use_relationship, a.use_cts)
        );
    }

    #[test]
    fn d_swaps_node_mode_to_abstract() {
        assert_eq!(variant_features(VariantId::D).node_mode, NodeMode::Abstract);
        assert_eq!(variant_features(VariantId::A).node_mode, NodeMode::Faceted);
    }

    #[test]
    fn h_is_the_only_variant_with_cts() {
        for id in VariantId::ALL {
            assert_eq!(variant_features(id).use_cts, id == VariantId::H);
        }
    }

    #[test]
    fn g_drops_usage_and_relationship() {
        let g = variant_features(VariantId::G);
        assert!(!g.use_usage && !g.use_relationship);
        assert!(g.use_main_idea && g.use_taic);
    }

    #[test]
    fn unknown_id_errors() {
        assert!("X".parse::<VariantId>().is_err());
        assert_eq!("h".parse::<VariantId>().unwrap(), VariantId::H);
    }
}
