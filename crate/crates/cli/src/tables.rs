//! Reference tables with committed fixtures. `golden --suite tables`
//! regenerates each one and diffs it against the embedded copy, so any
//! drift in enumeration order, cardinalities or weights shows up as a
//! failing diff.

use std::sync::Arc;

use dsmt::{gpt_coefficients, Model, ModelRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    CardFree3,
    CardHybrid3,
    CardShafer3,
    GptHybrid3,
    GptShafer3,
    GptPairFree3,
    LatticeFree2,
    LatticeFree3,
    LatticeHybrid3,
    LatticeShafer3,
}

pub const ALL_TABLES: [TableKind; 10] = [
    TableKind::CardFree3,
    TableKind::CardHybrid3,
    TableKind::CardShafer3,
    TableKind::GptHybrid3,
    TableKind::GptShafer3,
    TableKind::GptPairFree3,
    TableKind::LatticeFree2,
    TableKind::LatticeFree3,
    TableKind::LatticeHybrid3,
    TableKind::LatticeShafer3,
];

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::CardFree3 => "card_free3",
            TableKind::CardHybrid3 => "card_hybrid3",
            TableKind::CardShafer3 => "card_shafer3",
            TableKind::GptHybrid3 => "gpt_hybrid3",
            TableKind::GptShafer3 => "gpt_shafer3",
            TableKind::GptPairFree3 => "gpt_pair_free3",
            TableKind::LatticeFree2 => "lattice_free2",
            TableKind::LatticeFree3 => "lattice_free3",
            TableKind::LatticeHybrid3 => "lattice_hybrid3",
            TableKind::LatticeShafer3 => "lattice_shafer3",
        }
    }

    pub fn fixture(self) -> &'static str {
        match self {
            TableKind::CardFree3 => include_str!("../fixtures/card_free3.txt"),
            TableKind::CardHybrid3 => include_str!("../fixtures/card_hybrid3.txt"),
            TableKind::CardShafer3 => include_str!("../fixtures/card_shafer3.txt"),
            TableKind::GptHybrid3 => include_str!("../fixtures/gpt_hybrid3.txt"),
            TableKind::GptShafer3 => include_str!("../fixtures/gpt_shafer3.txt"),
            TableKind::GptPairFree3 => include_str!("../fixtures/gpt_pair_free3.txt"),
            TableKind::LatticeFree2 => include_str!("../fixtures/lattice_free2.txt"),
            TableKind::LatticeFree3 => include_str!("../fixtures/lattice_free3.txt"),
            TableKind::LatticeHybrid3 => include_str!("../fixtures/lattice_hybrid3.txt"),
            TableKind::LatticeShafer3 => include_str!("../fixtures/lattice_shafer3.txt"),
        }
    }
}

fn free(n: u8) -> ModelRef {
    Arc::new(Model::free(n).expect("small frame"))
}

fn shafer(n: u8) -> ModelRef {
    Arc::new(Model::shafer(n).expect("small frame"))
}

fn hybrid3() -> ModelRef {
    Arc::new(Model::build(3, &["t1^t3", "t2^t3"]).expect("valid constraints"))
}

/// Curated row order for the three-atom free model: grouped by region
/// count, intersections before the mixed forms.
const FREE3_ROWS: [&str; 19] = [
    "empty",
    "t1^t2^t3",
    "t1^t2",
    "t1^t3",
    "t2^t3",
    "(t1vt2)^t3",
    "(t1vt3)^t2",
    "(t2vt3)^t1",
    "((t1^t2)vt3)^(t1vt2)",
    "t1",
    "t2",
    "t3",
    "(t1^t2)vt3",
    "(t1^t3)vt2",
    "(t2^t3)vt1",
    "t1vt2",
    "t1vt3",
    "t2vt3",
    "t1vt2vt3",
];

const HYBRID3_ROWS: [&str; 9] = [
    "empty", "t1^t2", "t3", "t1", "t2", "t1vt2", "t1vt3", "t2vt3", "t1vt2vt3",
];

const SHAFER3_ROWS: [&str; 8] = [
    "empty", "t1", "t2", "t3", "t1vt2", "t1vt3", "t2vt3", "t1vt2vt3",
];

/// Weight-matrix orders leave out the empty set.
const HYBRID3_SOURCES: [&str; 8] = [
    "t1^t2", "t3", "t1", "t2", "t1vt2", "t1vt3", "t2vt3", "t1vt2vt3",
];
const SHAFER3_SOURCES: [&str; 7] = ["t1", "t2", "t3", "t1vt2", "t1vt3", "t2vt3", "t1vt2vt3"];

fn card_table(title: &str, model: &ModelRef, rows: &[&str]) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(&format!("{:<22} {}\n", "element", "count"));
    for expr in rows {
        let e = model.parse(expr).expect("fixture row parses");
        out.push_str(&format!("{:<22} {}\n", expr, model.cardinality(e)));
    }
    out
}

fn weight_matrix(title: &str, model: &ModelRef, order: &[&str]) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    for target in order {
        let t = model.parse(target).expect("target parses");
        let table = gpt_coefficients(t, model);
        out.push_str(&format!("target {target}\n"));
        for source in order {
            let s = model.parse(source).expect("source parses");
            let rep = model.representative(s).expect("source is non-empty");
            let row = table.row_for(rep).expect("source has a row");
            out.push_str(&format!("  {:<20} {}\n", source, row.fraction()));
        }
    }
    out
}

fn pair_table(model: &ModelRef, narrow: &str, wide: &str) -> String {
    let mut out = String::new();
    out.push_str("weights toward two nested targets, free model, 3 atoms\n");
    out.push_str(&format!("{:<22} {:<12} {}\n", "source", narrow, wide));
    let tn = gpt_coefficients(model.parse(narrow).expect("target parses"), model);
    let tw = gpt_coefficients(model.parse(wide).expect("target parses"), model);
    for source in &FREE3_ROWS[1..] {
        let rep = model
            .representative(model.parse(source).expect("source parses"))
            .expect("non-empty");
        let rn = tn.row_for(rep).expect("row");
        let rw = tw.row_for(rep).expect("row");
        out.push_str(&format!(
            "{:<22} {:<12} {}\n",
            source,
            rn.fraction(),
            rw.fraction()
        ));
    }
    out
}

/// The model's restricted lattice in its own enumeration order: the empty
/// set, then one row per distinct non-empty element class.
pub fn lattice_table(model: &ModelRef) -> String {
    let mut out = String::new();
    let spec = model.spec();
    if spec.constraints.is_empty() {
        out.push_str(&format!("lattice, free model, {} atoms\n", model.n()));
    } else {
        out.push_str(&format!(
            "lattice, {} atoms, constraints: {}\n",
            model.n(),
            spec.constraints.join(", ")
        ));
    }
    out.push_str(&format!("{:<6} {:<22} {}\n", "class", "element", "count"));
    out.push_str(&format!("{:<6} {:<22} {}\n", "-", "empty", 0));
    for s in model.survivors() {
        out.push_str(&format!(
            "{:<6} {:<22} {}\n",
            s.index,
            s.representative.to_string(),
            s.cardinality()
        ));
    }
    out
}

pub fn emit(kind: TableKind) -> String {
    match kind {
        TableKind::CardFree3 => {
            card_table("region counts, free model, 3 atoms", &free(3), &FREE3_ROWS)
        }
        TableKind::CardHybrid3 => card_table(
            "region counts, 3 atoms, t1^t3 and t2^t3 empty",
            &hybrid3(),
            &HYBRID3_ROWS,
        ),
        TableKind::CardShafer3 => card_table(
            "region counts, exclusive model, 3 atoms",
            &shafer(3),
            &SHAFER3_ROWS,
        ),
        TableKind::GptHybrid3 => weight_matrix(
            "pignistic weights, 3 atoms, t1^t3 and t2^t3 empty",
            &hybrid3(),
            &HYBRID3_SOURCES,
        ),
        TableKind::GptShafer3 => weight_matrix(
            "pignistic weights, exclusive model, 3 atoms",
            &shafer(3),
            &SHAFER3_SOURCES,
        ),
        TableKind::GptPairFree3 => pair_table(&free(3), "(t1vt3)^t2", "t2"),
        TableKind::LatticeFree2 => lattice_table(&free(2)),
        TableKind::LatticeFree3 => lattice_table(&free(3)),
        TableKind::LatticeHybrid3 => lattice_table(&hybrid3()),
        TableKind::LatticeShafer3 => lattice_table(&shafer(3)),
    }
}
