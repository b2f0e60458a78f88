//! Validation protocol: day-grouped gapped folds, R², random search,
//! SHAP-guided feature elimination and proxy ablations.

mod ablation;
mod rfe;
mod score;
mod search;
mod split;

use std::io::Write;

use serde::Serialize;

pub use ablation::{apply_proxy, proxy_ablation, AblationReport, Proxy};
pub use rfe::{rfe, RfeConfig, RfeStep, RfeTrace};
pub use score::{cross_validate, r2, retrained_score, CvScores};
pub use search::{random_search, SearchResult, SearchSpace, Trial};
pub use split::{split, Fold, GroupGapSplit};

use crate::error::Result;

/// One JSON document per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
