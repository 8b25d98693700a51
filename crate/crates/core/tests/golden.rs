mod common;

#[test]
fn prompt_templates_match_golden_files() {
    for (name, actual) in common::golden_cases() {
        if let Err(e) = common::check_golden(name, &actual) {
            panic!("{e}");
        }
    }
}
