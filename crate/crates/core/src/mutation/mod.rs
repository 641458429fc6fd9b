//! Single-defect source mutation for C and C++.

mod edit;
mod kinds;
mod sites;
mod syntax;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub use edit::{apply_mutation, is_valid_mutation_id, revert_mutation, Mutation};
pub use kinds::{MutatorKind, UnknownMutatorKind};
pub use sites::{enumerate_sites, number_candidates, LineRef, MutationSite, Replacement};
pub use syntax::{
    parse_file, parse_source, FunctionSpan, Language, StatementLine, SyntaxIndex, TokenClass, TokenSite,
};

#[derive(Debug, thiserror::Error)]
pub enum MutationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported language for {0}")]
    UnsupportedLanguage(String),
    #[error("grammar error: {0}")]
    Grammar(String),
    #[error("stale site for mutation {id} at offset {offset}: source differs from the recorded text")]
    StaleSite { id: String, offset: usize },
    #[error("replacement is not a candidate of the {kind} site at offset {offset}")]
    InvalidReplacement { offset: usize, kind: MutatorKind },
}

/// Every C/C++ source file under `root`, as sorted root-relative paths.
/// Hidden directories are skipped.
pub fn source_files(root: &Path) -> Result<Vec<PathBuf>, MutationError> {
    let mut files = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(|e| MutationError::Io {
            path: e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf()),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && Language::from_path(entry.path()).is_some() {
            let rel = entry.path().strip_prefix(root).expect("walk stays under root");
            files.push(rel.to_path_buf());
        }
    }
    Ok(files)
}

/// Parse every source file under `root` and enumerate sites of `kinds`.
pub fn enumerate_tree(root: &Path, kinds: &BTreeSet<MutatorKind>) -> Result<Vec<MutationSite>, MutationError> {
    let mut sites = Vec::new();
    for rel in source_files(root)? {
        let index = parse_file(root, &rel)?;
        sites.extend(enumerate_sites(&index, kinds));
    }
    Ok(sites)
}
