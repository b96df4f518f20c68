//! The catalog of admissible coefficient sparsity patterns and the
//! permutation classifier.
//!
//! A coefficient matrix with at most three nonzero entries above the diagonal
//! and no zero column corresponds to a 3-edge spanning graph on the four
//! frame indices. There are 16 such masks; the symmetric group on the three
//! normal indices partitions them into the four types:
//!
//! * B — star at index 0 (Bishop), 1 mask
//! * C — path with index 0 interior, 6 masks
//! * D — star at a normal index, 3 masks
//! * F — path with index 0 at an end (Frenet-like), 6 masks
//!
//! Mask ids 0-15 enumerate the catalog with B = 0, C = 1-6, D = 7-9,
//! F = 10-15; ids 1, 7 and 10 are the canonical C, D and F matrices.

use crate::linalg::{Skew4, UPPER_PAIRS};
use serde::{Deserialize, Serialize};

/// The four equivalence classes of generalized Bishop frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameType {
    B,
    C,
    D,
    F,
}

impl FrameType {
    pub const ALL: [FrameType; 4] = [FrameType::B, FrameType::C, FrameType::D, FrameType::F];

    /// Mask id of the canonical coefficient matrix of this type.
    pub fn canonical_mask(&self) -> usize {
        match self {
            FrameType::B => 0,
            FrameType::C => 1,
            FrameType::D => 7,
            FrameType::F => 10,
        }
    }

    pub fn parse(s: &str) -> Option<FrameType> {
        match s {
            "B" | "b" => Some(FrameType::B),
            "C" | "c" => Some(FrameType::C),
            "D" | "d" => Some(FrameType::D),
            "F" | "f" => Some(FrameType::F),
            _ => None,
        }
    }
}

impl std::fmt::Display for FrameType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            FrameType::B => 'B',
            FrameType::C => 'C',
            FrameType::D => 'D',
            FrameType::F => 'F',
        };
        write!(f, "{c}")
    }
}

/// Each mask lists the indices into [`UPPER_PAIRS`] of its three allowed
/// upper-triangle entries, ascending (row-major catalog order).
pub const MASKS: [[usize; 3]; 16] = [
    [0, 1, 2], // 0  B:  (01)(02)(03)
    [0, 1, 4], // 1  C1: (01)(02)(13)   canonical C
    [0, 1, 5], // 2  C2: (01)(02)(23)
    [0, 2, 5], // 3  C3: (01)(03)(23)
    [0, 2, 3], // 4  C4: (01)(03)(12)
    [1, 2, 3], // 5  C5: (02)(03)(12)
    [1, 2, 4], // 6  C6: (02)(03)(13)
    [0, 3, 4], // 7  D1: (01)(12)(13)   canonical D
    [1, 3, 5], // 8  D2: (02)(12)(23)
    [2, 4, 5], // 9  D3: (03)(13)(23)
    [0, 3, 5], // 10 F1: (01)(12)(23)   canonical F
    [2, 3, 4], // 11 F2: (03)(12)(13)
    [2, 3, 5], // 12 F3: (03)(12)(23)
    [0, 4, 5], // 13 F4: (01)(13)(23)
    [1, 3, 4], // 14 F5: (02)(12)(13)
    [1, 4, 5], // 15 F6: (02)(13)(23)
];

/// All six permutations of the normal indices {1, 2, 3} (index 0 fixed).
pub const PERMS: [[usize; 3]; 6] = [
    [1, 2, 3],
    [1, 3, 2],
    [2, 1, 3],
    [2, 3, 1],
    [3, 1, 2],
    [3, 2, 1],
];

/// The 16 admissible masks with their types and permutation orbits.
pub struct PatternCatalog;

impl PatternCatalog {
    pub fn type_of(mask_id: usize) -> FrameType {
        match mask_id {
            0 => FrameType::B,
            1..=6 => FrameType::C,
            7..=9 => FrameType::D,
            _ => FrameType::F,
        }
    }

    /// Mask ids in the same permutation orbit (equivalently, the same type).
    pub fn orbit(mask_id: usize) -> Vec<usize> {
        let t = Self::type_of(mask_id);
        (0..16).filter(|&m| Self::type_of(m) == t).collect()
    }

    /// Mask id whose allowed entry set equals `pairs` (sorted), if admissible.
    pub fn mask_id_of(pairs: &[usize; 3]) -> Option<usize> {
        MASKS.iter().position(|m| m == pairs)
    }

    /// Image of a mask under a permutation of the normal indices.
    pub fn permute_mask(mask_id: usize, perm: &[usize; 3]) -> Option<usize> {
        let full = [0, perm[0], perm[1], perm[2]];
        let mut pairs = [0usize; 3];
        for (k, &pos) in MASKS[mask_id].iter().enumerate() {
            let (i, j) = UPPER_PAIRS[pos];
            let (a, b) = (full[i], full[j]);
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            pairs[k] = UPPER_PAIRS.iter().position(|&p| p == (a, b))?;
        }
        pairs.sort_unstable();
        Self::mask_id_of(&pairs)
    }
}

/// One classifier hit: permuting the frame's normal rows by `perm` makes the
/// coefficient matrix fit `mask_id` with off-mask entries at most `residual`.
#[derive(Debug, Clone, Serialize)]
pub struct PatternMatch {
    pub mask_id: usize,
    pub frame_type: FrameType,
    pub perm: [usize; 3],
    pub residual: f64,
}

/// Classification of a coefficient sample path against the catalog.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    /// All (mask, permutation) pairs whose off-mask residual is at most tol.
    pub matches: Vec<PatternMatch>,
    /// Set when the coefficient matrix vanishes identically at tol, in which
    /// case every mask matches and no type claim is meaningful.
    pub degenerate: bool,
    /// Best residual per type over all (mask, permutation) pairs.
    pub best_by_type: [(FrameType, f64); 4],
}

/// Max over samples of the largest off-mask entry of `P X P^T`.
pub fn masked_residual(xs: &[Skew4], mask_id: usize, perm: &[usize; 3]) -> f64 {
    let mask = &MASKS[mask_id];
    let mut worst = 0.0f64;
    for x in xs {
        let px = x.permute(perm);
        for k in 0..6 {
            if !mask.contains(&k) {
                worst = worst.max(px.upper[k].abs());
            }
        }
    }
    worst
}

/// Off-mask residual with the identity permutation.
pub fn pattern_residual(xs: &[Skew4], mask_id: usize) -> f64 {
    masked_residual(xs, mask_id, &PERMS[0])
}

/// Classify a coefficient path against all 16 masks and 6 permutations.
///
/// A vanishing path matches everything; the `degenerate` flag is forced so a
/// caller can never read a unique type out of a zero matrix.
pub fn classify_pattern(xs: &[Skew4], tol: f64) -> Classification {
    let max_entry = xs.iter().fold(0.0f64, |m, x| m.max(x.norm_inf()));
    let degenerate = max_entry <= tol;
    let mut matches = Vec::new();
    let mut best: [(FrameType, f64); 4] = [
        (FrameType::B, f64::INFINITY),
        (FrameType::C, f64::INFINITY),
        (FrameType::D, f64::INFINITY),
        (FrameType::F, f64::INFINITY),
    ];
    for perm in PERMS.iter() {
        for mask_id in 0..16 {
            let residual = masked_residual(xs, mask_id, perm);
            let t = PatternCatalog::type_of(mask_id);
            let slot = FrameType::ALL.iter().position(|&x| x == t).unwrap();
            if residual < best[slot].1 {
                best[slot].1 = residual;
            }
            if residual <= tol {
                matches.push(PatternMatch {
                    mask_id,
                    frame_type: t,
                    perm: *perm,
                    residual,
                });
            }
        }
    }
    Classification {
        matches,
        degenerate,
        best_by_type: best,
    }
}
