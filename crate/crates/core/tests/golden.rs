use std::path::PathBuf;

use eudinym::vectors::{generate, Suite};

fn golden_path(suite: Suite) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{}.txt", suite.name()))
}

/// Set UPDATE_GOLDEN=1 to rewrite the files after an intentional format change.
#[test]
fn vectors_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for suite in Suite::ALL {
        let text = generate(suite);
        let path = golden_path(suite);
        if update {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert!(text == expected, "{} drifted from its golden file", suite.name());
    }
}
