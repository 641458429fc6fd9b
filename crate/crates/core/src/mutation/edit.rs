use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::kinds::MutatorKind;
use super::sites::{LineRef, MutationSite, Replacement};
use super::MutationError;

/// One concrete edit, serialised one per line in a mutation plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub id: String,
    pub file: PathBuf,
    pub offset: usize,
    pub length: usize,
    pub original: String,
    pub kind: MutatorKind,
    pub replacement: Replacement,
    pub enclosing_function: String,
    pub enclosing_file: PathBuf,
}

impl Mutation {
    /// Build a mutation from one of the site's candidates.
    pub fn from_site(site: &MutationSite, replacement: Replacement, seed: Option<u64>) -> Result<Self, MutationError> {
        if !site.candidates.contains(&replacement) {
            return Err(MutationError::InvalidReplacement {
                offset: site.offset,
                kind: site.kind,
            });
        }
        let id = mutation_id(site, &replacement, seed);
        Ok(Mutation {
            id,
            file: site.file.clone(),
            offset: site.offset,
            length: site.length,
            original: site.original.clone(),
            kind: site.kind,
            replacement,
            enclosing_function: site.enclosing_function.clone(),
            enclosing_file: site.enclosing_file.clone(),
        })
    }

    /// Pick one candidate with a generator seeded from `seed` and the site
    /// position, so the choice does not depend on enumeration order.
    pub fn choose(site: &MutationSite, seed: u64) -> Result<Self, MutationError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ site_key(site));
        let replacement = site
            .candidates
            .choose(&mut rng)
            .cloned()
            .ok_or(MutationError::InvalidReplacement {
                offset: site.offset,
                kind: site.kind,
            })?;
        let seeded = matches!(site.kind, MutatorKind::Symbol | MutatorKind::LineOrder);
        Self::from_site(site, replacement, seeded.then_some(seed))
    }
}

fn site_key(site: &MutationSite) -> u64 {
    let mut h = Sha256::new();
    h.update(site.file.to_string_lossy().as_bytes());
    h.update(site.offset.to_le_bytes());
    h.update(site.kind.name().as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn mutation_id(site: &MutationSite, replacement: &Replacement, seed: Option<u64>) -> String {
    let mut h = Sha256::new();
    h.update(site.file.to_string_lossy().as_bytes());
    h.update([0]);
    h.update(site.offset.to_string());
    h.update([0]);
    h.update(site.length.to_string());
    h.update([0]);
    h.update(site.kind.name());
    h.update([0]);
    h.update(serde_json::to_string(replacement).expect("replacement serialises"));
    let digest = hex::encode(&h.finalize()[..8]);
    match seed {
        Some(s) => format!("{}-{}-s{}", site.kind.tag(), digest, s),
        None => format!("{}-{}", site.kind.tag(), digest),
    }
}

/// Mutation ids as produced here: `<tag>-<16 hex>[-s<seed>]`.
pub fn is_valid_mutation_id(id: &str) -> bool {
    let mut parts = id.split('-');
    let (Some(tag), Some(hash)) = (parts.next(), parts.next()) else {
        return false;
    };
    let tag_ok = MutatorKind::ALL.iter().any(|k| k.tag() == tag);
    let hash_ok = hash.len() == 16 && hash.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase());
    let seed_ok = match (parts.next(), parts.next()) {
        (None, None) => true,
        (Some(s), None) => s.strip_prefix('s').is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit())),
        _ => false,
    };
    tag_ok && hash_ok && seed_ok
}

fn region<'a>(text: &'a [u8], offset: usize, len: usize) -> Option<&'a [u8]> {
    text.get(offset..offset.checked_add(len)?)
}

fn stale(m: &Mutation) -> MutationError {
    MutationError::StaleSite {
        id: m.id.clone(),
        offset: m.offset,
    }
}

/// Apply `m` to `text`. Fails with `StaleSite` when the recorded original is
/// no longer at the recorded offset.
pub fn apply_mutation(text: &[u8], m: &Mutation) -> Result<Vec<u8>, MutationError> {
    if region(text, m.offset, m.length) != Some(m.original.as_bytes()) {
        return Err(stale(m));
    }
    match &m.replacement {
        Replacement::Text(r) => Ok(splice(text, m.offset, m.length, r.as_bytes())),
        Replacement::Swap(partner) => {
            if region(text, partner.offset, partner.length) != Some(partner.original.as_bytes()) {
                return Err(stale(m));
            }
            let this = LineRef {
                offset: m.offset,
                length: m.length,
                original: m.original.clone(),
            };
            let (first, second) = order_disjoint(&this, partner).ok_or_else(|| stale(m))?;
            Ok(swap(text, first, second))
        }
    }
}

/// Undo `m` on text produced by [`apply_mutation`]. Fails with `StaleSite`
/// when the replacement cannot be found where the mutation left it.
pub fn revert_mutation(text: &[u8], m: &Mutation) -> Result<Vec<u8>, MutationError> {
    match &m.replacement {
        Replacement::Text(r) => {
            if region(text, m.offset, r.len()) != Some(r.as_bytes()) {
                return Err(stale(m));
            }
            if r.is_empty() {
                // A blanked line: the offset must sit on an empty line.
                let at_line_start = m.offset == 0 || text.get(m.offset - 1) == Some(&b'\n');
                let line_empty = matches!(text.get(m.offset), None | Some(b'\n') | Some(b'\r'));
                if !(at_line_start && line_empty) {
                    return Err(stale(m));
                }
            } else if token_len(r.as_bytes()) == r.len() && token_len(&text[m.offset..]) != r.len() {
                // The replacement is a single token; it must still be one in context.
                return Err(stale(m));
            }
            Ok(splice(text, m.offset, r.len(), m.original.as_bytes()))
        }
        Replacement::Swap(partner) => {
            let this = LineRef {
                offset: m.offset,
                length: m.length,
                original: m.original.clone(),
            };
            let (first, second) = order_disjoint(&this, partner).ok_or_else(|| stale(m))?;
            // After the swap `second` sits at first.offset and `first` was
            // shifted by the length difference.
            let shifted = second.offset + second.length - first.length;
            if region(text, first.offset, second.length) != Some(second.original.as_bytes())
                || region(text, shifted, first.length) != Some(first.original.as_bytes())
            {
                return Err(stale(m));
            }
            let moved_first = LineRef {
                offset: first.offset,
                length: second.length,
                original: second.original.clone(),
            };
            let moved_second = LineRef {
                offset: shifted,
                length: first.length,
                original: first.original.clone(),
            };
            Ok(swap(text, &moved_first, &moved_second))
        }
    }
}

fn order_disjoint<'a>(a: &'a LineRef, b: &'a LineRef) -> Option<(&'a LineRef, &'a LineRef)> {
    let (first, second) = if a.offset <= b.offset { (a, b) } else { (b, a) };
    (first.offset + first.length <= second.offset).then_some((first, second))
}

fn splice(text: &[u8], offset: usize, len: usize, with: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(text.len() + with.len());
    out.extend_from_slice(&text[..offset]);
    out.extend_from_slice(with);
    out.extend_from_slice(&text[offset + len..]);
    out
}

fn swap(text: &[u8], first: &LineRef, second: &LineRef) -> Vec<u8> {
    let mut out = Vec::with_capacity(text.len());
    out.extend_from_slice(&text[..first.offset]);
    out.extend_from_slice(&text[second.offset..second.offset + second.length]);
    out.extend_from_slice(&text[first.offset + first.length..second.offset]);
    out.extend_from_slice(&text[first.offset..first.offset + first.length]);
    out.extend_from_slice(&text[second.offset + second.length..]);
    out
}

const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "->*", "...", "<=>", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "<<", ">>", "++", "--", "->", "::", ".*",
];

/// Length of the C token starting at the beginning of `bytes` (maximal munch).
fn token_len(bytes: &[u8]) -> usize {
    let Some(&first) = bytes.first() else { return 0 };
    if first.is_ascii_alphanumeric() || first == b'_' {
        return bytes
            .iter()
            .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_' || **b == b'\'')
            .count();
    }
    PUNCTUATORS
        .iter()
        .find(|p| bytes.starts_with(p.as_bytes()))
        .map_or(1, |p| p.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutation::sites::enumerate_sites;
    use crate::mutation::syntax::{parse_source, Language};

    fn site_at(src: &str, kind: MutatorKind, original: &str) -> MutationSite {
        let idx = parse_source("t.c", src.as_bytes(), Language::C).unwrap();
        enumerate_sites(&idx, &[kind].into_iter().collect())
            .into_iter()
            .find(|s| s.original == original)
            .expect("site present")
    }

    fn mutation(site: &MutationSite, replacement: &str) -> Mutation {
        Mutation::from_site(site, Replacement::Text(replacement.into()), None).unwrap()
    }

    #[test]
    fn ternary_comparison_mutation() {
        let src = "int f(int rc, int x, int y){ return rc<1 ? x : y; }";
        let site = site_at(src, MutatorKind::Comparison, "<");
        let m = mutation(&site, ">=");
        let out = apply_mutation(src.as_bytes(), &m).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "int f(int rc, int x, int y){ return rc>=1 ? x : y; }"
        );
        assert_eq!(revert_mutation(&out, &m).unwrap(), src.as_bytes());
    }

    #[test]
    fn delete_blanks_line_keeps_line_count() {
        let src = "void f(int count){\n  count++;\n  return;\n}\n";
        let site = site_at(src, MutatorKind::Delete, "  count++;");
        let m = mutation(&site, "");
        let out = String::from_utf8(apply_mutation(src.as_bytes(), &m).unwrap()).unwrap();
        assert_eq!(out, "void f(int count){\n\n  return;\n}\n");
        assert_eq!(out.lines().count(), src.lines().count());
        assert_eq!(revert_mutation(out.as_bytes(), &m).unwrap(), src.as_bytes());
    }

    #[test]
    fn revert_on_unmodified_source_is_stale() {
        let src = "int f(int a){ return a < 2; }";
        let m = mutation(&site_at(src, MutatorKind::Comparison, "<"), "<=");
        assert!(matches!(revert_mutation(src.as_bytes(), &m), Err(MutationError::StaleSite { .. })));

        let src = "void f(int c){\n  c++;\n  c--;\n}\n";
        let m = mutation(&site_at(src, MutatorKind::Delete, "  c++;"), "");
        assert!(matches!(revert_mutation(src.as_bytes(), &m), Err(MutationError::StaleSite { .. })));
    }

    #[test]
    fn revert_of_shorter_operator_detects_unmodified_source() {
        // `<=` -> `<`: the unmodified text still starts with `<` at the offset.
        let src = "int f(int a){ return a<=-1; }";
        let m = mutation(&site_at(src, MutatorKind::Comparison, "<="), "<");
        assert!(revert_mutation(src.as_bytes(), &m).is_err());
        let out = apply_mutation(src.as_bytes(), &m).unwrap();
        assert_eq!(out, b"int f(int a){ return a<-1; }");
        assert_eq!(revert_mutation(&out, &m).unwrap(), src.as_bytes());
    }

    #[test]
    fn stacked_mutations_make_first_revert_stale() {
        let src = "int f(int a){ return a < 2; }";
        let first = mutation(&site_at(src, MutatorKind::Comparison, "<"), ">=");
        let once = String::from_utf8(apply_mutation(src.as_bytes(), &first).unwrap()).unwrap();
        let second = mutation(&site_at(&once, MutatorKind::Comparison, ">="), "==");
        let twice = apply_mutation(once.as_bytes(), &second).unwrap();
        assert!(matches!(revert_mutation(&twice, &first), Err(MutationError::StaleSite { .. })));
    }

    #[test]
    fn apply_on_changed_source_is_stale() {
        let src = "int f(int a){ return a < 2; }";
        let m = mutation(&site_at(src, MutatorKind::Comparison, "<"), ">");
        let changed = src.replace("a < 2", "a + 2");
        assert!(apply_mutation(changed.as_bytes(), &m).is_err());
    }

    #[test]
    fn line_swap_round_trip_with_unequal_lengths() {
        let src = "int f(int a){\n  a++;\n  a = a * 40000;\n  return a;\n}\n";
        let site = site_at(src, MutatorKind::LineOrder, "  a++;");
        for candidate in &site.candidates {
            let m = Mutation::from_site(&site, candidate.clone(), Some(3)).unwrap();
            let out = apply_mutation(src.as_bytes(), &m).unwrap();
            assert_ne!(out, src.as_bytes());
            assert_eq!(out.len(), src.len());
            assert_eq!(revert_mutation(&out, &m).unwrap(), src.as_bytes());
            assert!(revert_mutation(src.as_bytes(), &m).is_err());
        }
        let last = site_at(src, MutatorKind::LineOrder, "  return a;");
        let m = Mutation::from_site(&last, last.candidates[0].clone(), Some(3)).unwrap();
        let out = String::from_utf8(apply_mutation(src.as_bytes(), &m).unwrap()).unwrap();
        assert_eq!(out, "int f(int a){\n  return a;\n  a = a * 40000;\n  a++;\n}\n");
        assert_eq!(revert_mutation(out.as_bytes(), &m).unwrap(), src.as_bytes());
    }

    #[test]
    fn replacement_outside_candidates_rejected() {
        let site = site_at("int f(int a){ return a < 2; }", MutatorKind::Comparison, "<");
        assert!(Mutation::from_site(&site, Replacement::Text("<".into()), None).is_err());
        assert!(Mutation::from_site(&site, Replacement::Text("+".into()), None).is_err());
    }

    #[test]
    fn ids_are_stable_and_well_formed() {
        let site = site_at("int f(int a, int b){ return a + b; }", MutatorKind::Symbol, "a");
        let m1 = Mutation::choose(&site, 9).unwrap();
        let m2 = Mutation::choose(&site, 9).unwrap();
        assert_eq!(m1, m2);
        assert!(m1.id.starts_with("sym-") && m1.id.ends_with("-s9"));
        assert!(is_valid_mutation_id(&m1.id));
        assert!(!is_valid_mutation_id("sym-xyz"));
        assert!(!is_valid_mutation_id("zzz-0123456789abcdef"));
        assert!(is_valid_mutation_id("cmp-0123456789abcdef"));
    }

    #[test]
    fn plan_line_round_trips_through_json() {
        let src = "void f(int c){\n  c++;\n  c--;\n}\n";
        let site = site_at(src, MutatorKind::LineOrder, "  c++;");
        let m = Mutation::choose(&site, 1).unwrap();
        let line = serde_json::to_string(&m).unwrap();
        assert!(line.contains("\"kind\":\"LineOrder\""));
        let back: Mutation = serde_json::from_str(&line).unwrap();
        assert_eq!(back, m);
        let del = mutation(&site_at(src, MutatorKind::Delete, "  c--;"), "");
        let back: Mutation = serde_json::from_str(&serde_json::to_string(&del).unwrap()).unwrap();
        assert_eq!(back.replacement, Replacement::Text(String::new()));
    }
}
