//! Classification of raw scalars into selected labels vs. background.
//!
//! Extraction only distinguishes the chosen label values; every other scalar
//! collapses to a single background classification. Membership queries scale
//! with the selected-set size: equality for one label, linear scan for small
//! sets, binary search beyond [`T_LINEAR`].

use crate::volume::LabeledVolume;

/// Reserved background sentinel. No stored scalar may equal it, so it can
/// share the 32-bit field used for classified values in adjacency tuples.
pub const BACKGROUND: u32 = u32::MAX;

/// Linear scan wins below this set size; tunable constant, not a contract.
pub const T_LINEAR: usize = 16;

/// A classified scalar: either a member of the originating
/// [`SelectedLabelSet`] or [`BACKGROUND`].
pub type ClassifiedLabel = u32;

/// Membership query strategy, chosen from the selected-set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Single,
    Linear,
    Logarithmic,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label selection is empty")]
    EmptySelection,
    #[error("label value {0:#x} is the reserved background sentinel")]
    ReservedValue(u32),
    #[error("bad label selector {0:?} (expected `all`, `v1,v2,...`, or `v1-v2`)")]
    BadSelector(String),
}

/// The chosen label subset. Immutable once built; share freely across
/// threads. Mutable query caches live in per-thread [`Classifier`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedLabelSet {
    labels: Vec<u32>,
    strategy: Strategy,
}

impl SelectedLabelSet {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    fn member_with(&self, strategy: Strategy, s: u32) -> bool {
        match strategy {
            Strategy::Single => s == self.labels[0],
            Strategy::Linear => self.labels.contains(&s),
            Strategy::Logarithmic => self.labels.binary_search(&s).is_ok(),
        }
    }

    pub fn contains(&self, s: u32) -> bool {
        self.member_with(self.strategy, s)
    }

    /// Cache-free classification: `s` if selected, else [`BACKGROUND`].
    #[inline]
    pub fn classify(&self, s: u32) -> ClassifiedLabel {
        if self.contains(s) {
            s
        } else {
            BACKGROUND
        }
    }
}

/// Build a set from raw values: deduplicated, sorted, strategy selected by
/// count (1 ⇒ single, ≤ [`T_LINEAR`] ⇒ linear, else logarithmic).
pub fn build_label_set(values: &[u32]) -> Result<SelectedLabelSet, LabelError> {
    if values.is_empty() {
        return Err(LabelError::EmptySelection);
    }
    if let Some(&v) = values.iter().find(|&&v| v == BACKGROUND) {
        return Err(LabelError::ReservedValue(v));
    }
    let mut labels = values.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let strategy = match labels.len() {
        1 => Strategy::Single,
        n if n <= T_LINEAR => Strategy::Linear,
        _ => Strategy::Logarithmic,
    };
    Ok(SelectedLabelSet { labels, strategy })
}

/// Per-thread classification front end: remembers the last selected hit and
/// the last background hit. Never shared between threads, so lookups stay
/// race-free. Results are independent of cache state.
#[derive(Debug, Clone)]
pub struct Classifier<'a> {
    set: &'a SelectedLabelSet,
    last_selected: u32,
    last_background: u32,
}

impl<'a> Classifier<'a> {
    pub fn new(set: &'a SelectedLabelSet) -> Self {
        // No raw scalar equals BACKGROUND, so these seeds can never hit.
        Classifier {
            set,
            last_selected: BACKGROUND,
            last_background: BACKGROUND,
        }
    }

    #[inline(always)]
    pub fn classify(&mut self, s: u32) -> ClassifiedLabel {
        if s == self.last_selected {
            return s;
        }
        if s == self.last_background {
            return BACKGROUND;
        }
        if self.set.contains(s) {
            self.last_selected = s;
            s
        } else {
            self.last_background = s;
            BACKGROUND
        }
    }
}

/// True when the edge between two classified endpoints carries a region
/// boundary. Both-background pairs compare equal, so the inequality test
/// already rejects them; the explicit guard keeps the definition visible.
#[inline(always)]
pub fn edge_intersects(c0: ClassifiedLabel, c1: ClassifiedLabel) -> bool {
    c0 != c1 && !(c0 == BACKGROUND && c1 == BACKGROUND)
}

/// CLI-facing label selection: `all`, a comma list, or inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSelector {
    /// Every distinct nonzero value present in the volume.
    All,
    Values(Vec<u32>),
}

impl LabelSelector {
    /// Parse `all | v1,v2,... | v1-v2` (items may mix values and ranges).
    pub fn parse(text: &str) -> Result<LabelSelector, LabelError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("all") {
            return Ok(LabelSelector::All);
        }
        let bad = || LabelError::BadSelector(text.to_string());
        let mut values = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            if let Some((lo, hi)) = item.split_once('-') {
                let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                values.extend(lo..=hi);
            } else {
                values.push(item.parse().map_err(|_| bad())?);
            }
        }
        if values.is_empty() {
            return Err(bad());
        }
        Ok(LabelSelector::Values(values))
    }

    /// Concrete label values for `vol`. `All` may resolve to an empty list
    /// (all-zero volume); callers treat that as an empty selection.
    pub fn resolve(&self, vol: &LabeledVolume) -> Vec<u32> {
        match self {
            LabelSelector::All => vol.labels_present(),
            LabelSelector::Values(v) => v.clone(),
        }
    }
}
