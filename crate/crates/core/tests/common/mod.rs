#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use lsp_probe::mentalism::{build_routine_transcript, RoutineParams};
use lsp_probe::number::build_number_trial;
use lsp_probe::seed;
use lsp_probe::yesno::{
    load_catalog, render_query, Answer, Constraint, Direction, ObjectCatalog, ObjectId, QuerySource,
    RandomQueries,
};
use lsp_probe::{Role, Transcript};

pub fn render(t: &Transcript) -> String {
    let mut out = String::new();
    for m in &t.messages {
        let role = match m.role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        out.push_str(&format!("[{role}] {}\n", m.content));
    }
    out
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Prompt renderings pinned byte-for-byte.
pub fn golden_cases() -> Vec<(&'static str, String)> {
    let catalog = load_catalog();
    let mut queries = RandomQueries::new(seed::rng(42));
    let mut yesno = String::new();
    for _ in 0..25 {
        let q = queries.next_query(&catalog).unwrap();
        yesno.push_str(&render_query(q, &catalog, None));
        yesno.push('\n');
    }
    let elephant = catalog.id_of("Elephant").unwrap();
    let q = queries.next_query(&catalog).unwrap();
    yesno.push_str(&render_query(q, &catalog, Some(elephant)));
    yesno.push('\n');

    let p = |a, b, c| RoutineParams::new(a, b, c, 10).unwrap();
    vec![
        ("number_n10_i7.txt", render(&build_number_trial(10, 7).unwrap())),
        ("number_n40_i1.txt", render(&build_number_trial(40, 1).unwrap())),
        ("yesno_queries_seed42.txt", yesno),
        ("yesno_hint.txt", catalog.rankings_text()),
        (
            "mentalism_a2_b1_c2.txt",
            render(&build_routine_transcript("g", 0, &p(2, 1, 2), false)),
        ),
        (
            "mentalism_a7_b3_c3_cot.txt",
            render(&build_routine_transcript("g", 0, &p(7, 3, 3), true)),
        ),
    ]
}

/// Compares against the stored file; `UPDATE_GOLDEN=1` rewrites it instead.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected =
        std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .map_or(expected.lines().count().min(actual.lines().count()), |i| i);
        Err(format!("{name} differs from golden at line {}", line + 1))
    }
}

/// Brute-force feasible set, written independently of the library: an
/// object survives a constraint unless it is ranked on the queried attribute
/// and the strict comparison disagrees with the answer.
pub fn oracle_feasible(catalog: &ObjectCatalog, constraints: &[Constraint]) -> BTreeSet<ObjectId> {
    (0..catalog.len())
        .filter(|&x| {
            constraints.iter().all(|c| {
                let column = catalog.column(c.attribute);
                let Some(rank_x) = column.iter().position(|&id| id == x) else {
                    return true;
                };
                let rank_ref = column
                    .iter()
                    .position(|&id| catalog.object(id).name == c.reference)
                    .expect("reference ranked on its attribute");
                let holds = match c.direction {
                    Direction::Greater => rank_x > rank_ref,
                    Direction::Less => rank_x < rank_ref,
                };
                holds == (c.answer == Answer::Yes)
            })
        })
        .collect()
}
