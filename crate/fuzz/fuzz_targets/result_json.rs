#![no_main]

use libfuzzer_sys::fuzz_target;
use mcdf_core::report::ResultDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = ResultDocument::from_json(text) else { return };
    let written = doc.to_json();
    let again = ResultDocument::from_json(&written).expect("re-parse of a written document");
    assert_eq!(written, again.to_json());
});
