//! Body-part vocabularies of the two body-model families and the merge into
//! the 15 final parts.

use serde::{Deserialize, Serialize};

use super::LabelError;

/// The 15 final body parts. Discriminants are the stored label ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum BodyPart {
    Head = 1,
    RightArm = 2,
    LeftArm = 3,
    RightForeArm = 4,
    LeftForeArm = 5,
    RightHand = 6,
    LeftHand = 7,
    Torso = 8,
    Hips = 9,
    RightUpLeg = 10,
    LeftUpLeg = 11,
    RightLeg = 12,
    LeftLeg = 13,
    RightFoot = 14,
    LeftFoot = 15,
}

impl BodyPart {
    pub const ALL: [BodyPart; 15] = [
        BodyPart::Head,
        BodyPart::RightArm,
        BodyPart::LeftArm,
        BodyPart::RightForeArm,
        BodyPart::LeftForeArm,
        BodyPart::RightHand,
        BodyPart::LeftHand,
        BodyPart::Torso,
        BodyPart::Hips,
        BodyPart::RightUpLeg,
        BodyPart::LeftUpLeg,
        BodyPart::RightLeg,
        BodyPart::LeftLeg,
        BodyPart::RightFoot,
        BodyPart::LeftFoot,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<BodyPart> {
        Self::ALL.get((id as usize).wrapping_sub(1)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BodyPart::Head => "head",
            BodyPart::RightArm => "rightArm",
            BodyPart::LeftArm => "leftArm",
            BodyPart::RightForeArm => "rightForeArm",
            BodyPart::LeftForeArm => "leftForeArm",
            BodyPart::RightHand => "rightHand",
            BodyPart::LeftHand => "leftHand",
            BodyPart::Torso => "torso",
            BodyPart::Hips => "hips",
            BodyPart::RightUpLeg => "rightUpLeg",
            BodyPart::LeftUpLeg => "leftUpLeg",
            BodyPart::RightLeg => "rightLeg",
            BodyPart::LeftLeg => "leftLeg",
            BodyPart::RightFoot => "rightFoot",
            BodyPart::LeftFoot => "leftFoot",
        }
    }

    pub fn from_name(name: &str) -> Option<BodyPart> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BodyModelFamily {
    #[serde(rename = "SMPL-X")]
    SmplX,
    #[serde(rename = "SMPL")]
    Smpl,
}

/// SMPL-X face segmentation vocabulary (26 parts).
const SMPLX_PARTS: [&str; 26] = [
    "rightHand",
    "rightUpLeg",
    "leftArm",
    "head",
    "leftEye",
    "rightEye",
    "leftLeg",
    "leftToeBase",
    "leftFoot",
    "spine1",
    "spine2",
    "leftShoulder",
    "rightShoulder",
    "rightFoot",
    "rightArm",
    "leftHandIndex1",
    "rightLeg",
    "rightHandIndex1",
    "leftForeArm",
    "rightForeArm",
    "neck",
    "rightToeBase",
    "spine",
    "leftUpLeg",
    "hips",
    "leftHand",
];

/// Source parts folded into a larger final part. Everything else maps to the
/// final part of the same name.
const MERGE_RULES: [(&[&str], BodyPart); 6] = [
    (&["leftEye", "rightEye", "neck", "head"], BodyPart::Head),
    (&["leftToeBase", "leftFoot"], BodyPart::LeftFoot),
    (&["rightToeBase", "rightFoot"], BodyPart::RightFoot),
    (&["leftHandIndex1", "leftHand"], BodyPart::LeftHand),
    (&["rightHandIndex1", "rightHand"], BodyPart::RightHand),
    (
        &["spine", "spine1", "spine2", "leftShoulder", "rightShoulder"],
        BodyPart::Torso,
    ),
];

/// Source vocabulary of one family plus its merge into [`BodyPart`].
///
/// Source part ids are 1-based positions in `source_parts`; 0 means
/// "no part".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TaxonomyRepr", into = "TaxonomyRepr")]
pub struct BodyPartTaxonomy {
    family: BodyModelFamily,
    source_parts: Vec<String>,
    merged: Vec<BodyPart>,
}

#[derive(Serialize, Deserialize)]
struct TaxonomyRepr {
    family: BodyModelFamily,
    source_parts: Vec<String>,
    merge: Vec<(String, String)>,
    final_parts: Vec<String>,
}

impl From<BodyPartTaxonomy> for TaxonomyRepr {
    fn from(t: BodyPartTaxonomy) -> Self {
        TaxonomyRepr {
            family: t.family,
            merge: t
                .source_parts
                .iter()
                .zip(&t.merged)
                .map(|(s, p)| (s.clone(), p.name().to_string()))
                .collect(),
            source_parts: t.source_parts,
            final_parts: BodyPart::ALL.iter().map(|p| p.name().to_string()).collect(),
        }
    }
}

impl TryFrom<TaxonomyRepr> for BodyPartTaxonomy {
    type Error = LabelError;

    fn try_from(r: TaxonomyRepr) -> Result<Self, Self::Error> {
        let reference = BodyPartTaxonomy::build(r.family);
        let final_ok = r.final_parts.len() == 15
            && r.final_parts
                .iter()
                .zip(BodyPart::ALL)
                .all(|(n, p)| n == p.name());
        let merge_ok = r.merge.len() == r.source_parts.len()
            && r.merge.iter().zip(&r.source_parts).all(|((s, f), src)| {
                s == src && reference.merge_name(s).map(|p| p.name()) == Some(f.as_str())
            });
        let mut sorted_in = r.source_parts.clone();
        let mut sorted_ref = reference.source_parts.clone();
        sorted_in.sort();
        sorted_ref.sort();
        if !final_ok || !merge_ok || sorted_in != sorted_ref {
            return Err(LabelError::Taxonomy(format!(
                "serialized taxonomy does not match the {:?} vocabulary",
                r.family
            )));
        }
        let merged = r
            .source_parts
            .iter()
            .map(|s| reference.merge_name(s).expect("checked above"))
            .collect();
        Ok(BodyPartTaxonomy {
            family: r.family,
            source_parts: r.source_parts,
            merged,
        })
    }
}

impl BodyPartTaxonomy {
    pub fn build(family: BodyModelFamily) -> Self {
        let source_parts: Vec<String> = SMPLX_PARTS
            .iter()
            .filter(|name| {
                family == BodyModelFamily::SmplX || !matches!(**name, "leftEye" | "rightEye")
            })
            .map(|s| s.to_string())
            .collect();
        let merged = source_parts.iter().map(|s| merge_rule(s)).collect();
        Self {
            family,
            source_parts,
            merged,
        }
    }

    pub fn family(&self) -> BodyModelFamily {
        self.family
    }

    pub fn source_parts(&self) -> &[String] {
        &self.source_parts
    }

    pub fn source_count(&self) -> usize {
        self.source_parts.len()
    }

    pub fn final_parts(&self) -> [BodyPart; 15] {
        BodyPart::ALL
    }

    /// 1-based id of a source part name.
    pub fn source_id(&self, name: &str) -> Option<u16> {
        self.source_parts
            .iter()
            .position(|s| s == name)
            .map(|i| i as u16 + 1)
    }

    pub fn source_name(&self, id: u16) -> Option<&str> {
        self.source_parts
            .get((id as usize).wrapping_sub(1))
            .map(String::as_str)
    }

    /// Final part of a source id; `None` for 0 or out-of-range ids.
    pub fn merge_source(&self, id: u16) -> Option<BodyPart> {
        self.merged.get((id as usize).wrapping_sub(1)).copied()
    }

    /// Merge applied to a name. Final-part names map to themselves, so the
    /// map is idempotent.
    pub fn merge_name(&self, name: &str) -> Option<BodyPart> {
        self.source_id(name)
            .and_then(|id| self.merge_source(id))
            .or_else(|| BodyPart::from_name(name))
    }

    /// Lookup table source id → final id, index 0 → 0.
    pub fn part_lut(&self) -> Vec<u32> {
        std::iter::once(0)
            .chain(self.merged.iter().map(|p| p.id() as u32))
            .collect()
    }
}

fn merge_rule(source: &str) -> BodyPart {
    MERGE_RULES
        .iter()
        .find(|(members, _)| members.contains(&source))
        .map(|(_, part)| *part)
        .or_else(|| BodyPart::from_name(source))
        .unwrap_or_else(|| panic!("source part {source} has no merge rule"))
}
