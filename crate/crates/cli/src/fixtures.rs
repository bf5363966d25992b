//! Bundled example scenarios.
//!
//! The fixtures ship inside the binary; `CROSSCLASS_FIXTURES` points lookups
//! at a directory of the same file names instead, for swapping in local
//! copies.

use std::path::PathBuf;

pub const FIXTURES_ENV: &str = "CROSSCLASS_FIXTURES";

pub struct Fixture {
    pub name: &'static str,
    pub file_name: &'static str,
    pub description: &'static str,
    pub contents: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "appendix-c",
        file_name: "appendix-c.json",
        description: "two-scheme Hispanic/non-Hispanic bridging survey (955 respondents), diabetes outcome",
        contents: include_str!("../../../fixtures/appendix-c.json"),
    },
    Fixture {
        name: "asian-subgroups",
        file_name: "asian-subgroups.json",
        description: "one aggregate Asian category split into four subgroups with known shares, diabetes outcome",
        contents: include_str!("../../../fixtures/asian-subgroups.json"),
    },
    Fixture {
        name: "table1-bridging",
        file_name: "table1-bridging.json",
        description: "full 6x6 cross-classification of old and new survey standards (ingestion checks)",
        contents: include_str!("../../../fixtures/table1-bridging.json"),
    },
];

pub fn fixtures_dir_override() -> Option<PathBuf> {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from)
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Resolve a `--scenario` argument: an existing path wins; otherwise a bare
/// fixture name loads the bundled copy (or the same file name under the
/// override directory).
pub fn resolve_scenario_text(arg: &str) -> Option<Result<String, std::io::Error>> {
    let path = PathBuf::from(arg);
    if path.exists() {
        return Some(std::fs::read_to_string(path));
    }
    let fixture = find(arg)?;
    if let Some(dir) = fixtures_dir_override() {
        return Some(std::fs::read_to_string(dir.join(fixture.file_name)));
    }
    Some(Ok(fixture.contents.to_string()))
}
